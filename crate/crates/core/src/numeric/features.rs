use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};

use serde::Serialize;

use crate::invariance::Jet;
use crate::symbolic::DerivSymbol;

/// The five classic low-order invariants evaluated on a floating jet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicValues {
    /// Squared gradient magnitude.
    pub di1: f64,
    /// Laplacian.
    pub di2: f64,
    /// Hessian determinant.
    pub di3: f64,
    /// Second derivative across the gradient, times its squared magnitude.
    pub di4: f64,
    pub di5: f64,
}

impl ClassicValues {
    pub fn from_jet(jet: &Jet<f64>) -> Self {
        let g = |i, j| jet.get(DerivSymbol::new(i, j)).copied().unwrap_or(0.0);
        let (fx, fy, fxx, fxy, fyy) = (g(1, 0), g(0, 1), g(2, 0), g(1, 1), g(0, 2));
        ClassicValues {
            di1: fx * fx + fy * fy,
            di2: fxx + fyy,
            di3: fxx * fyy - fxy * fxy,
            di4: fx * fx * fyy - 2.0 * fx * fy * fxy + fy * fy * fxx,
            di5: fy * fy * fxy + fx * fy * fxx - fx * fy * fyy - fx * fx * fxy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedFeatures {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gaussian_curvature: f64,
    pub mean_curvature: f64,
    /// None when both principal curvatures vanish.
    pub shape_index: Option<f64>,
    pub curvedness: f64,
    pub jet2_norm: f64,
    pub bif: [f64; 6],
    pub first_directional_max: f64,
    pub first_directional_min: f64,
    pub second_directional_max: f64,
    pub second_directional_min: f64,
}

/// Non-polynomial invariants built from the second-order jet.
pub fn derived_features(jet: &Jet<f64>) -> DerivedFeatures {
    let c = ClassicValues::from_jet(jet);
    let disc = (c.di2 * c.di2 - 4.0 * c.di3).max(0.0);
    let root = disc.sqrt();
    let lambda1 = 0.5 * (c.di2 + root);
    let lambda2 = 0.5 * (c.di2 - root);
    let w = 1.0 + c.di1;
    let hsum = c.di2 + c.di4;
    let gaussian_curvature = c.di3 / (w * w);
    let mean_curvature = hsum / (2.0 * w.powf(1.5));
    let num = -hsum;
    let den = (hsum * hsum - 4.0 * w * c.di3).max(0.0).sqrt();
    let shape_index = if den > 0.0 {
        Some(FRAC_2_PI * (num / den).atan())
    } else if num != 0.0 {
        Some(num.signum())
    } else {
        None
    };
    let curvedness = ((hsum * hsum - 2.0 * c.di3 * w) / (2.0 * w.powi(3))).max(0.0).sqrt();
    let jet2_norm = (c.di1 + 0.25 * c.di2 * c.di2 + 0.25 * disc).sqrt();
    let grad = c.di1.sqrt();
    let bif = [
        2.0 * grad,
        c.di2,
        -c.di2,
        FRAC_1_SQRT_2 * (root + c.di2),
        FRAC_1_SQRT_2 * (root - c.di2),
        root,
    ];
    DerivedFeatures {
        lambda1,
        lambda2,
        gaussian_curvature,
        mean_curvature,
        shape_index,
        curvedness,
        jet2_norm,
        bif,
        first_directional_max: grad,
        first_directional_min: -grad,
        second_directional_max: lambda1,
        second_directional_min: lambda2,
    }
}
