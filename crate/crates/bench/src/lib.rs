//! Fixtures shared by the benchmarks.

use diffinv::catalog::{catalog, select_set, SetKind};
use diffinv::experiments::{build_synth_db, default_base_image, PatchDatabase, SynthDbSpec, Transform, PATCH_SIZE};
use diffinv::numeric::{smooth_noise, FeatureExtractor, Image, Padding};
use diffinv::OperatorChain;

/// Catalog chains of growing length.
pub fn sample_chains() -> Vec<(&'static str, OperatorChain)> {
    ["F(1,1)", "F(1,2).G(1,2)", "F(1,2).G(1,3)^3.G(2,4)^2", "F(1,1).F(1,2)^2.F(2,3)^2.F(4,4).G(3,4)"]
        .into_iter()
        .map(|s| (s, OperatorChain::parse(s).expect("fixture chain")))
        .collect()
}

pub fn ir43_members() -> Vec<u32> {
    select_set(4, 3, SetKind::IR).expect("encoded set").members
}

pub fn ir43_extractor(sigma: f64) -> FeatureExtractor {
    FeatureExtractor::new(catalog(), &ir43_members(), &[sigma], Some(PATCH_SIZE), Padding::None).expect("extractor")
}

pub fn texture_patch(seed: u64) -> Image {
    smooth_noise(PATCH_SIZE, PATCH_SIZE, 3.0, seed).expect("texture")
}

/// Four classes of five rotated, intensity-scaled patches.
pub fn small_db() -> PatchDatabase {
    let mut spec = SynthDbSpec::new(&[Transform::Rotation, Transform::IntensityAffine], 5, 0);
    spec.grid = 2;
    build_synth_db(&spec, &default_base_image(0).expect("base")).expect("database")
}
