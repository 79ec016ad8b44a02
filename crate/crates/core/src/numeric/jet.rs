use rayon::prelude::*;
use serde::Serialize;

use super::image::{reflect_index, Image};
use super::kernel::KernelStack;
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::invariance::Jet;
use crate::symbolic::{CompiledPoly, DerivSymbol, JET_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// The kernel footprint must fit inside the image.
    #[default]
    None,
    /// Mirror reflection about the edge pixels.
    Reflect,
}

/// Gaussian-derivative responses L_ij for 1 <= i+j <= 4 at pixel (x, y).
///
/// Samples are taken relative to the centre value, so a constant neighbourhood gives
/// an exactly zero jet.
pub fn local_jet(img: &Image, x: usize, y: usize, stack: &KernelStack, padding: Padding) -> Result<Jet<f64>> {
    let r = stack.radius();
    let (w, h) = (img.width(), img.height());
    if padding == Padding::None && (x < r || y < r || x + r >= w || y + r >= h) {
        return Err(Error::Footprint { size: stack.size(), x, y, w, h });
    }
    if x >= w || y >= h {
        return Err(Error::Footprint { size: stack.size(), x, y, w, h });
    }
    let size = stack.size();
    let f0 = img.get(x, y);
    // passes[i][n]: 1-D filter i along x, applied to row offset n - r
    let mut passes = vec![vec![0.0; size]; 5];
    let mut line = vec![0.0; size];
    for n in 0..size {
        let yy = reflect_index(y as isize - (n as isize - r as isize), h);
        for (m, v) in line.iter_mut().enumerate() {
            let xx = reflect_index(x as isize - (m as isize - r as isize), w);
            *v = img.get(xx, yy) - f0;
        }
        for (i, pass) in passes.iter_mut().enumerate() {
            pass[n] = stack.kernel_1d(i).iter().zip(&line).map(|(k, v)| k * v).sum();
        }
    }
    let mut jet = Jet::zeros(4);
    for s in DerivSymbol::all(4) {
        let (i, j) = (s.i as usize, s.j as usize);
        let v: f64 = stack.kernel_1d(j).iter().zip(&passes[i]).map(|(k, v)| k * v).sum();
        jet.set(s, v);
    }
    Ok(jet)
}

/// Zero mean and unit (population) variance. A patch whose spread is at rounding level
/// becomes all zeros and the flag is set.
pub fn standardize_patch(img: &Image) -> (Image, bool) {
    let n = img.data().len() as f64;
    let mean = img.data().iter().sum::<f64>() / n;
    let var = img.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    let max_abs = img.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sd.is_nan() || sd <= 8.0 * f64::EPSILON * max_abs || sd < f64::MIN_POSITIVE {
        return (img.map(|_| 0.0), true);
    }
    (img.map(|v| (v - mean) / sd), false)
}

/// Centre pixel of a patch.
pub fn patch_center(img: &Image) -> (usize, usize) {
    (img.width() / 2, img.height() / 2)
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureVector {
    pub ids: Vec<u32>,
    pub sigmas: Vec<f64>,
    /// Sigma-major: all ids at sigmas[0], then all at sigmas[1], ...
    pub values: Vec<f64>,
    pub degenerate: bool,
}

/// Compiled catalog invariants plus one kernel stack per scale.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    ids: Vec<u32>,
    polys: Vec<CompiledPoly>,
    stacks: Vec<KernelStack>,
    padding: Padding,
}

impl FeatureExtractor {
    /// `size` None selects the default kernel width per sigma.
    pub fn new(cat: &Catalog, ids: &[u32], sigmas: &[f64], size: Option<usize>, padding: Padding) -> Result<Self> {
        let polys = ids.iter().map(|&id| cat.polynomial(id).map(|p| p.compile())).collect::<Result<Vec<_>>>()?;
        let stacks = sigmas
            .iter()
            .map(|&s| match size {
                Some(n) => KernelStack::new(s, n),
                None => KernelStack::with_default_size(s),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureExtractor { ids: ids.to_vec(), polys, stacks, padding })
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.stacks.iter().map(|s| s.sigma()).collect()
    }

    pub fn dimension(&self) -> usize {
        self.ids.len() * self.stacks.len()
    }

    pub fn evaluate_jet(&self, jet: &[f64; JET_LEN], out: &mut Vec<f64>) {
        out.extend(self.polys.iter().map(|p| p.eval(jet)));
    }

    /// Standardize, then evaluate every invariant on the centre jet at every scale.
    pub fn feature_vector(&self, patch: &Image) -> Result<FeatureVector> {
        let (std_patch, degenerate) = standardize_patch(patch);
        let (cx, cy) = patch_center(&std_patch);
        let mut values = Vec::with_capacity(self.dimension());
        for stack in &self.stacks {
            let jet = local_jet(&std_patch, cx, cy, stack, self.padding)?;
            self.evaluate_jet(&jet.as_array(), &mut values);
        }
        Ok(FeatureVector { ids: self.ids.clone(), sigmas: self.sigmas(), values, degenerate })
    }
}

pub fn feature_vector(
    cat: &Catalog,
    patch: &Image,
    ids: &[u32],
    sigmas: &[f64],
    size: Option<usize>,
    padding: Padding,
) -> Result<FeatureVector> {
    FeatureExtractor::new(cat, ids, sigmas, size, padding)?.feature_vector(patch)
}

#[derive(Debug, Clone)]
pub struct FeatureMap {
    pub ids: Vec<u32>,
    pub sigma: f64,
    pub maps: Vec<Image>,
}

/// Every selected invariant evaluated at every pixel, reflect padding at the borders.
pub fn feature_map(cat: &Catalog, img: &Image, ids: &[u32], sigma: f64, size: Option<usize>) -> Result<FeatureMap> {
    let ex = FeatureExtractor::new(cat, ids, &[sigma], size, Padding::Reflect)?;
    let (w, h) = (img.width(), img.height());
    let rows: Vec<Vec<Vec<f64>>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    let jet = local_jet(img, x, y, &ex.stacks[0], Padding::Reflect)?;
                    let mut v = Vec::with_capacity(ids.len());
                    ex.evaluate_jet(&jet.as_array(), &mut v);
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let maps = (0..ids.len())
        .map(|k| Image::from_fn(w, h, |x, y| rows[y][x][k]))
        .collect();
    Ok(FeatureMap { ids: ids.to_vec(), sigma, maps })
}
