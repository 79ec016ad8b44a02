use serde::Serialize;

use super::image::Image;
use super::jet::{local_jet, Padding};
use super::kernel::{gh_function, KernelStack};
use crate::error::{Error, Result};
use crate::symbolic::DerivSymbol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GhCenter {
    /// A supplied pixel position.
    Point(f64, f64),
    /// Intensity centroid of the patch.
    Centroid,
}

pub fn intensity_centroid(img: &Image) -> Result<(f64, f64)> {
    let (mut m00, mut m10, mut m01) = (0.0, 0.0, 0.0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(x, y);
            m00 += v;
            m10 += x as f64 * v;
            m01 += y as f64 * v;
        }
    }
    if m00 == 0.0 {
        return Err(Error::Image("centroid undefined: zero total intensity".into()));
    }
    Ok((m10 / m00, m01 / m00))
}

/// Discrete Gaussian-Hermite moment of order (i, j).
pub fn gh_moment(img: &Image, i: usize, j: usize, sigma: f64, center: GhCenter) -> Result<f64> {
    if i > 4 || j > 4 {
        return Err(Error::Kernel(format!("moment order ({i},{j}) exceeds 4")));
    }
    let (x0, y0) = match center {
        GhCenter::Point(x, y) => (x, y),
        GhCenter::Centroid => intensity_centroid(img)?,
    };
    let hx: Vec<f64> = (0..img.width()).map(|x| gh_function(i, x as f64 - x0, sigma)).collect();
    let mut total = 0.0;
    for y in 0..img.height() {
        let hy = gh_function(j, y as f64 - y0, sigma);
        let row: f64 = img.row(y).iter().zip(&hx).map(|(f, h)| f * h).sum();
        total += hy * row;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct GhComparisonRow {
    pub i: usize,
    pub j: usize,
    /// Jet entry at scale sigma / sqrt(2).
    pub derivative: f64,
    /// Gaussian-Hermite moment at scale sigma.
    pub moment: f64,
    /// Least-squares constant shared by all entries of the same order.
    pub constant: f64,
    pub relative_difference: f64,
}

/// Jet entries at sigma/sqrt(2) against the best per-order multiple of the
/// Gaussian-Hermite moments at sigma, both anchored at the centre pixel.
pub fn gh_comparison(img: &Image, sigma: f64, kernel_size: usize) -> Result<Vec<GhComparisonRow>> {
    let (cx, cy) = (img.width() / 2, img.height() / 2);
    let stack = KernelStack::new(sigma / 2f64.sqrt(), kernel_size)?;
    let jet = local_jet(img, cx, cy, &stack, Padding::Reflect)?;
    let mut rows = Vec::new();
    for order in 1..=4u8 {
        let syms: Vec<DerivSymbol> = DerivSymbol::all(4).into_iter().filter(|s| s.order() == order).collect();
        let pairs: Vec<(f64, f64)> = syms
            .iter()
            .map(|s| {
                let l = *jet.get(*s).unwrap();
                let m = gh_moment(img, s.i as usize, s.j as usize, sigma, GhCenter::Point(cx as f64, cy as f64));
                m.map(|m| (l, m))
            })
            .collect::<Result<_>>()?;
        let num: f64 = pairs.iter().map(|(l, m)| l * m).sum();
        let den: f64 = pairs.iter().map(|(_, m)| m * m).sum();
        let c = if den > 0.0 { num / den } else { 0.0 };
        for (s, (l, m)) in syms.iter().zip(pairs) {
            let fit = c * m;
            let rel = if fit != 0.0 { (l - fit).abs() / fit.abs() } else if l == 0.0 { 0.0 } else { f64::INFINITY };
            rows.push(GhComparisonRow {
                i: s.i as usize,
                j: s.j as usize,
                derivative: l,
                moment: m,
                constant: c,
                relative_difference: rel,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(w: usize, cx: f64, cy: f64) -> Image {
        Image::from_fn(w, w, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            (-(dx * dx + dy * dy) / 50.0).exp()
        })
    }

    #[test]
    fn zero_patch() {
        let z = Image::zeros(33, 33);
        assert_eq!(gh_moment(&z, 2, 1, 6.0, GhCenter::Point(16.0, 16.0)).unwrap(), 0.0);
        assert!(gh_moment(&z, 0, 0, 6.0, GhCenter::Centroid).is_err());
    }

    #[test]
    fn blob_moment_peaks_when_centered() {
        let at = |cx: f64| gh_moment(&blob(41, cx, 20.0), 0, 0, 5.0, GhCenter::Point(20.0, 20.0)).unwrap();
        let centered = at(20.0);
        assert!(centered > 0.0);
        for shift in [-3.0, -1.0, 1.0, 2.0, 5.0] {
            assert!(at(20.0 + shift) < centered);
        }
        // brute-force oracle
        let img = blob(41, 20.0, 20.0);
        let norm = (5.0 * std::f64::consts::PI.sqrt()).sqrt();
        let mut direct = 0.0;
        for y in 0..41 {
            for x in 0..41 {
                let (dx, dy) = (x as f64 - 20.0, y as f64 - 20.0);
                direct += (-(dx * dx) / 50.0).exp() / norm * (-(dy * dy) / 50.0).exp() / norm * img.get(x, y);
            }
        }
        assert!((direct - centered).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn centroid_mode_matches_point() {
        let img = blob(41, 17.0, 23.0);
        let (x0, y0) = intensity_centroid(&img).unwrap();
        let a = gh_moment(&img, 1, 2, 4.0, GhCenter::Centroid).unwrap();
        let b = gh_moment(&img, 1, 2, 4.0, GhCenter::Point(x0, y0)).unwrap();
        assert_eq!(a, b);
    }
}
