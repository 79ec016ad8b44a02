//! Seeded synthetic patch databases and the classification, stability and verification
//! metrics run on them.

mod metrics;
mod synth;

pub use metrics::{
    csd, database_features, mre, mre_features, nn_classify, nn_classify_features, pair_verify,
    pair_verify_features, ClassAccuracy, ClassifyResult, Prediction, VerifyResult,
};
pub use synth::{
    build_synth_db, default_base_image, draw_params, grid_center, inverse_warp, load_db, patch_rng, render_patch,
    write_db, Boundary, DbMeta, PatchDatabase, PatchParams, PatchRecord, Ranges, StoredPatch, SynthDbSpec,
    Transform, BASE_SIZE, BASE_TEXTURE_SIGMA, GRID, PATCH_SIZE, SPACING,
};
