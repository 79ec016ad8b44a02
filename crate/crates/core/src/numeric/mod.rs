//! Pixels to jets and features.

mod features;
mod gh;
mod image;
mod jet;
mod kernel;
mod moments;
mod synth;

pub use features::{derived_features, ClassicValues, DerivedFeatures};
pub use gh::{gh_comparison, gh_moment, intensity_centroid, GhCenter, GhComparisonRow};
pub use image::{read_pgm_unit, reflect_index, Image, Pgm, PgmFormat};
pub use jet::{
    feature_map, feature_vector, local_jet, patch_center, standardize_patch, FeatureExtractor, FeatureMap,
    FeatureVector, Padding,
};
pub use kernel::{
    default_size, factorial, gaussian_derivative, gaussian_derivative_kernel, gh_function, hermite_phys,
    hermite_prob, KernelStack, MAX_DERIVATIVE,
};
pub use moments::{
    central_moments, moment_invariant, moment_isomorphism_check, random_cloud, transform_cloud, unit_weight,
    WeightedPoint,
};
pub use synth::{gaussian_blur, smooth_noise};
