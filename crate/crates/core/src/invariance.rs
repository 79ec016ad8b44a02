//! Jets under linear coordinate maps and relative-invariance weights.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::{q, q_text, qr, DerivSymbol, InvariantPolynomial, OperatorChain, SymbolSource, Q};

/// Derivative values f_ij for 1 <= i+j <= max_order in jet layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    max_order: u8,
    values: Vec<T>,
}

fn jet_len(max_order: u8) -> usize {
    let m = max_order as usize;
    m * (m + 3) / 2
}

impl<T: Scalar> Jet<T> {
    pub fn zeros(max_order: u8) -> Self {
        Jet { max_order, values: vec![T::zero_value(); jet_len(max_order)] }
    }

    pub fn from_values(max_order: u8, values: Vec<T>) -> Result<Self> {
        if max_order > 4 || values.len() != jet_len(max_order) {
            return Err(Error::Length(values.len(), jet_len(max_order)));
        }
        Ok(Jet { max_order, values })
    }

    pub fn max_order(&self) -> u8 {
        self.max_order
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, s: DerivSymbol) -> Option<&T> {
        if s.order() == 0 || s.order() > self.max_order {
            return None;
        }
        self.values.get(s.index())
    }

    pub fn set(&mut self, s: DerivSymbol, v: T) {
        assert!(s.order() >= 1 && s.order() <= self.max_order, "symbol {s} outside jet");
        self.values[s.index()] = v;
    }
}

impl<T: Scalar> SymbolSource<T> for Jet<T> {
    fn value(&self, s: DerivSymbol) -> Option<&T> {
        self.get(s)
    }
}

impl Jet<f64> {
    pub fn as_array(&self) -> [f64; crate::symbolic::JET_LEN] {
        let mut a = [0.0; crate::symbolic::JET_LEN];
        a[..self.values.len()].copy_from_slice(&self.values);
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Euclidean,
    Similarity,
    Affine,
}

/// (u,v) = M (x,y) with M = [[a,b],[c,d]]; translation plays no role for jets.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap2 {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub d: Q,
    kind: MapKind,
}

impl LinearMap2 {
    pub fn identity() -> Self {
        LinearMap2 { a: q(1), b: q(0), c: q(0), d: q(1), kind: MapKind::Euclidean }
    }

    /// Rotation by the angle with the given cosine and sine.
    ///
    /// The matrix is [[cos, sin], [-sin, cos]], so the derivatives of the
    /// rotated image are h_u = cos f_x + sin f_y and h_v = -sin f_x + cos f_y.
    pub fn rotation(cos: Q, sin: Q) -> Result<Self> {
        if &cos * &cos + &sin * &sin != q(1) {
            return Err(Error::InvalidMap("cos^2 + sin^2 != 1".into()));
        }
        Ok(LinearMap2 { a: cos.clone(), b: sin.clone(), c: -sin, d: cos, kind: MapKind::Euclidean })
    }

    /// Rotation-with-scale [[a, b], [-b, a]]; the scale is sqrt(a^2 + b^2).
    pub fn similarity(a: Q, b: Q) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::SingularMap);
        }
        Ok(LinearMap2 { a: a.clone(), b: b.clone(), c: -b, d: a, kind: MapKind::Similarity })
    }

    pub fn affine(a: Q, b: Q, c: Q, d: Q) -> Result<Self> {
        let m = LinearMap2 { a, b, c, d, kind: MapKind::Affine };
        if m.det().is_zero() {
            return Err(Error::SingularMap);
        }
        Ok(m)
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn det(&self) -> Q {
        &self.a * &self.d - &self.b * &self.c
    }

    /// Squared scale a^2 + b^2 of a similarity.
    pub fn scale_squared(&self) -> Q {
        &self.a * &self.a + &self.b * &self.b
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMap);
        }
        Ok(LinearMap2 {
            a: &self.d / &det,
            b: -&self.b / &det,
            c: -&self.c / &det,
            d: &self.a / &det,
            kind: self.kind,
        })
    }

    /// Matrix product self * other, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let kind = match (self.kind, other.kind) {
            (MapKind::Euclidean, MapKind::Euclidean) => MapKind::Euclidean,
            (MapKind::Affine, _) | (_, MapKind::Affine) => MapKind::Affine,
            _ => MapKind::Similarity,
        };
        LinearMap2 {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
            kind,
        }
    }

    pub fn describe(&self) -> String {
        format!("[[{}, {}], [{}, {}]]", q_text(&self.a), q_text(&self.b), q_text(&self.c), q_text(&self.d))
    }
}

/// Derivatives of h(u,v) = f(x,y) where (u,v) = M (x,y).
///
/// With (x,y) = N (u,v), N = M^-1, d/du = n11 d/dx + n21 d/dy and
/// d/dv = n12 d/dx + n22 d/dy; h_ab expands the product of these powers.
pub fn jet_transform<T: Scalar>(jet: &Jet<T>, m: &LinearMap2) -> Result<Jet<T>> {
    let n = m.inverse()?;
    let (du, dv) = (
        [T::from_rational(&n.a), T::from_rational(&n.c)],
        [T::from_rational(&n.b), T::from_rational(&n.d)],
    );
    let mut out = Jet::zeros(jet.max_order);
    for order in 1..=jet.max_order {
        for b in 0..=order {
            let a = order - b;
            // coefficients of dx^(order-k) dy^k
            let mut coef = vec![T::one_value()];
            for (count, d) in [(a, &du), (b, &dv)] {
                for _ in 0..count {
                    let mut next = vec![T::zero_value(); coef.len() + 1];
                    for (k, c) in coef.iter().enumerate() {
                        next[k] = next[k].clone() + c.clone() * d[0].clone();
                        next[k + 1] = next[k + 1].clone() + c.clone() * d[1].clone();
                    }
                    coef = next;
                }
            }
            let mut v = T::zero_value();
            for (k, c) in coef.into_iter().enumerate() {
                let src = DerivSymbol::new(order - k as u8, k as u8);
                v = v + c * jet.get(src).cloned().expect("jet complete up to its order");
            }
            out.set(DerivSymbol::new(a, b), v);
        }
    }
    Ok(out)
}

/// Predicted multiplier DI(h) / DI(f).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    Factor(#[serde(serialize_with = "ser_q")] Q),
    /// Mixed F/G chains under a general affine map: no invariance claimed.
    NoClaim,
}

fn ser_q<S: serde::Serializer>(v: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q_text(v))
}

pub fn chain_weight(chain: &OperatorChain, m: &LinearMap2) -> Weight {
    let (p, qn) = (chain.f_count() as i32, chain.g_count() as i32);
    match m.kind {
        MapKind::Euclidean => Weight::Factor(q(1)),
        MapKind::Similarity => Weight::Factor(pow_q(&m.scale_squared(), -(p + qn))),
        MapKind::Affine if p == 0 => Weight::Factor(pow_q(&m.det(), -qn)),
        MapKind::Affine => Weight::NoClaim,
    }
}

pub fn pow_q(x: &Q, e: i32) -> Q {
    let mut acc = Q::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// DI(transformed jet) - weight * DI(jet), or `None` when no weight is claimed.
pub fn check_invariance<T: Scalar>(
    inv: &InvariantPolynomial,
    chain: &OperatorChain,
    m: &LinearMap2,
    jet: &Jet<T>,
) -> Result<Option<T>> {
    let w = match chain_weight(chain, m) {
        Weight::Factor(w) => w,
        Weight::NoClaim => return Ok(None),
    };
    let moved = jet_transform(jet, m)?;
    let lhs = inv.eval(&moved)?;
    let rhs = inv.eval(jet)?;
    Ok(Some(lhs - T::from_rational(&w) * rhs))
}

/// Seeded rational jet: numerators in [-24, 24], denominators in {1, 2, 4, 8}.
pub fn random_rational_jet(rng: &mut impl Rng, max_order: u8) -> Jet<Q> {
    let values = (0..jet_len(max_order))
        .map(|_| {
            let num = rng.random_range(-24i64..=24);
            let den = [1i64, 2, 4, 8][rng.random_range(0..4)];
            qr(num, den)
        })
        .collect();
    Jet { max_order, values }
}

/// Rotation from a Pythagorean triple with random generator, sign and swap.
pub fn random_pythagorean_rotation(rng: &mut impl Rng) -> LinearMap2 {
    loop {
        let m: i64 = rng.random_range(1..=12);
        let n: i64 = rng.random_range(1..=12);
        if m == n {
            continue;
        }
        let h = m * m + n * n;
        let (mut c, mut s) = (qr(m * m - n * n, h), qr(2 * m * n, h));
        if rng.random_bool(0.5) {
            std::mem::swap(&mut c, &mut s);
        }
        if rng.random_bool(0.5) {
            c = -c;
        }
        if rng.random_bool(0.5) {
            s = -s;
        }
        return LinearMap2::rotation(c, s).expect("Pythagorean pair is on the unit circle");
    }
}

fn nonzero_small(rng: &mut impl Rng) -> Q {
    loop {
        let num = rng.random_range(-9i64..=9);
        if num != 0 {
            return qr(num, [1i64, 2, 3, 4][rng.random_range(0..4)]);
        }
    }
}

pub fn random_similarity(rng: &mut impl Rng) -> LinearMap2 {
    let a = nonzero_small(rng);
    let b = qr(rng.random_range(-9i64..=9), [1i64, 2, 3][rng.random_range(0..3)]);
    LinearMap2::similarity(a, b).expect("a != 0")
}

pub fn random_affine(rng: &mut impl Rng) -> LinearMap2 {
    loop {
        let e: Vec<Q> = (0..4).map(|_| qr(rng.random_range(-6i64..=6), [1i64, 2, 3][rng.random_range(0..3)])).collect();
        if let Ok(m) = LinearMap2::affine(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()) {
            return m;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceRow {
    pub id: u32,
    pub chain: String,
    pub group: MapKind,
    pub trials: usize,
    pub max_residual: String,
    pub status: String,
}

/// Exact invariance sweep over seeded maps, one rational jet per map.
pub fn invariance_sweep(
    entries: &[(u32, OperatorChain, InvariantPolynomial)],
    group: MapKind,
    trials: usize,
    seed: u64,
) -> Vec<InvarianceRow> {
    use rayon::prelude::*;
    entries
        .par_iter()
        .map(|(id, chain, poly)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (*id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut max = Q::zero();
            let mut claimed = true;
            for _ in 0..trials {
                let m = match group {
                    MapKind::Euclidean => random_pythagorean_rotation(&mut rng),
                    MapKind::Similarity => random_similarity(&mut rng),
                    MapKind::Affine => random_affine(&mut rng),
                };
                let jet = random_rational_jet(&mut rng, 4);
                match check_invariance(poly, chain, &m, &jet).expect("complete jet") {
                    Some(r) => {
                        if r.abs() > max {
                            max = r.abs();
                        }
                    }
                    None => claimed = false,
                }
            }
            let status = if !claimed {
                "no_claim"
            } else if max.is_zero() {
                "pass"
            } else {
                "fail"
            };
            InvarianceRow {
                id: *id,
                chain: chain.to_string(),
                group,
                trials,
                max_residual: q_text(&max),
                status: status.into(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet_from(pairs: &[((u8, u8), i64)]) -> Jet<Q> {
        let mut j = Jet::zeros(4);
        for &((i, k), v) in pairs {
            j.set(DerivSymbol::new(i, k), q(v));
        }
        j
    }

    #[test]
    fn identity_keeps_jet() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let j = random_rational_jet(&mut rng, 4);
        assert_eq!(jet_transform(&j, &LinearMap2::identity()).unwrap(), j);
    }

    #[test]
    fn quarter_turn_first_order() {
        let j = jet_from(&[((1, 0), 3), ((0, 1), 5)]);
        let zero = LinearMap2::rotation(q(1), q(0)).unwrap();
        let h = jet_transform(&j, &zero).unwrap();
        assert_eq!(h.get(DerivSymbol::new(1, 0)), Some(&q(3)));
        let quarter = LinearMap2::rotation(q(0), q(1)).unwrap();
        let h = jet_transform(&j, &quarter).unwrap();
        assert_eq!(h.get(DerivSymbol::new(1, 0)), Some(&q(5)));
        assert_eq!(h.get(DerivSymbol::new(0, 1)), Some(&q(-3)));
    }

    #[test]
    fn second_order_matches_inverse_transpose_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_affine(&mut rng);
        let j = random_rational_jet(&mut rng, 2);
        let h = jet_transform(&j, &m).unwrap();
        let n = m.inverse().unwrap();
        // inverse-transpose entries [a', b'; c', d']
        let (a1, b1, c1, d1) = (n.a.clone(), n.c.clone(), n.b.clone(), n.d.clone());
        let f = |i, k| j.get(DerivSymbol::new(i, k)).unwrap().clone();
        let two = q(2);
        let huu = &a1 * &a1 * f(2, 0) + &two * &a1 * &b1 * f(1, 1) + &b1 * &b1 * f(0, 2);
        let huv = &a1 * &c1 * f(2, 0) + (&a1 * &d1 + &b1 * &c1) * f(1, 1) + &b1 * &d1 * f(0, 2);
        let hvv = &c1 * &c1 * f(2, 0) + &two * &c1 * &d1 * f(1, 1) + &d1 * &d1 * f(0, 2);
        assert_eq!(h.get(DerivSymbol::new(2, 0)), Some(&huu));
        assert_eq!(h.get(DerivSymbol::new(1, 1)), Some(&huv));
        assert_eq!(h.get(DerivSymbol::new(0, 2)), Some(&hvv));
    }

    #[test]
    fn weights() {
        let f11 = OperatorChain::parse("F(1,1)").unwrap();
        let g2 = OperatorChain::parse("G(1,2)^2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(chain_weight(&f11, &random_pythagorean_rotation(&mut rng)), Weight::Factor(q(1)));
        let s2 = LinearMap2::similarity(q(2), q(0)).unwrap();
        assert_eq!(chain_weight(&f11, &s2), Weight::Factor(qr(1, 4)));
        let det3 = LinearMap2::affine(q(3), q(1), q(0), q(1)).unwrap();
        assert_eq!(chain_weight(&g2, &det3), Weight::Factor(qr(1, 9)));
        assert_eq!(chain_weight(&f11, &det3), Weight::NoClaim);
    }

    #[test]
    fn laplacian_rotation_exact() {
        let inv = InvariantPolynomial::from_text("f20 + f02").unwrap();
        let chain = OperatorChain::parse("F(1,1)").unwrap();
        let rot = LinearMap2::rotation(qr(3, 5), qr(4, 5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let jet = random_rational_jet(&mut rng, 4);
        assert_eq!(check_invariance(&inv, &chain, &rot, &jet).unwrap(), Some(q(0)));
        let zero: Jet<Q> = Jet::zeros(4);
        assert_eq!(check_invariance(&inv, &chain, &rot, &zero).unwrap(), Some(q(0)));
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(LinearMap2::affine(q(1), q(2), q(2), q(4)), Err(Error::SingularMap));
        assert!(LinearMap2::rotation(q(1), q(1)).is_err());
    }

    #[test]
    fn floating_evaluation_path() {
        let inv = InvariantPolynomial::from_text("f10^2 + f01^2").unwrap();
        let chain = OperatorChain::parse("F(1,2)").unwrap();
        let mut jet = Jet::<f64>::zeros(4);
        jet.set(DerivSymbol::new(1, 0), 0.3);
        jet.set(DerivSymbol::new(0, 1), -1.7);
        let rot = LinearMap2::rotation(qr(5, 13), qr(12, 13)).unwrap();
        let r = check_invariance(&inv, &chain, &rot, &jet).unwrap().unwrap();
        assert!(r.abs() < 1e-12);
    }
}
