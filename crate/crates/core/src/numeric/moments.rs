use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::invariance::{pow_q, LinearMap2};
use crate::symbolic::{qr, DerivSymbol, InvariantPolynomial, OperatorChain, Q};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    pub x: Q,
    pub y: Q,
    pub w: Q,
}

/// Exact central moments eta_ij = sum w (x - xbar)^i (y - ybar)^j for 1 <= i+j <= 4.
pub fn central_moments(cloud: &[WeightedPoint]) -> Result<BTreeMap<DerivSymbol, Q>> {
    let m00: Q = cloud.iter().map(|p| p.w.clone()).sum();
    if m00.is_zero() {
        return Err(Error::InvalidMap("point cloud has zero total weight".into()));
    }
    let xbar: Q = cloud.iter().map(|p| &p.w * &p.x).sum::<Q>() / &m00;
    let ybar: Q = cloud.iter().map(|p| &p.w * &p.y).sum::<Q>() / &m00;
    let mut out = BTreeMap::new();
    for s in DerivSymbol::all(4) {
        let mut acc = Q::zero();
        for p in cloud {
            let dx = &p.x - &xbar;
            let dy = &p.y - &ybar;
            acc += &p.w * pow_q(&dx, s.i as i32) * pow_q(&dy, s.j as i32);
        }
        out.insert(s, acc);
    }
    Ok(out)
}

pub fn transform_cloud(cloud: &[WeightedPoint], m: &LinearMap2) -> Vec<WeightedPoint> {
    cloud
        .iter()
        .map(|p| WeightedPoint {
            x: &m.a * &p.x + &m.b * &p.y,
            y: &m.c * &p.x + &m.d * &p.y,
            w: p.w.clone(),
        })
        .collect()
}

/// The collapsed invariant with central moments substituted for derivatives.
pub fn moment_invariant(poly: &InvariantPolynomial, cloud: &[WeightedPoint]) -> Result<Q> {
    poly.eval(&central_moments(cloud)?)
}

/// GMI(M cloud) - det(M)^Q GMI(cloud) for a G-only chain.
pub fn moment_isomorphism_check(chain: &OperatorChain, cloud: &[WeightedPoint], m: &LinearMap2) -> Result<Q> {
    if chain.f_count() > 0 {
        return Err(Error::NotGOnly(chain.f_count()));
    }
    let poly = chain.polynomial();
    let before = moment_invariant(&poly, cloud)?;
    let after = moment_invariant(&poly, &transform_cloud(cloud, m))?;
    Ok(after - pow_q(&m.det(), chain.g_count() as i32) * before)
}

/// Points with numerators in [-12, 12] over denominators {1, 2, 3}; positive weights.
pub fn random_cloud(rng: &mut impl Rng, n: usize) -> Vec<WeightedPoint> {
    let coord = |rng: &mut dyn rand::RngCore| qr(rng.random_range(-12..=12), rng.random_range(1..=3));
    (0..n)
        .map(|_| WeightedPoint {
            x: coord(rng),
            y: coord(rng),
            w: qr(rng.random_range(1..=9), rng.random_range(1..=4)),
        })
        .collect()
}

pub fn unit_weight(x: Q, y: Q) -> WeightedPoint {
    WeightedPoint { x, y, w: Q::one() }
}
