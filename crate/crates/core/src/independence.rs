//! Linear and functional independence ranks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{expected_size, select_set, Catalog, SetKind};
use crate::invariance::random_rational_jet;
use crate::symbolic::{enumerate_chains, DerivSymbol, InvariantPolynomial, Monomial, Q};

/// Primes below 2^61 used for modular elimination.
pub const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 2_305_843_009_213_693_921];

/// Rows are invariants, columns the union of their monomial supports.
#[derive(Debug, Clone)]
pub struct MonomialMatrix {
    pub columns: Vec<Monomial>,
    pub rows: Vec<Vec<(usize, Q)>>,
}

impl MonomialMatrix {
    pub fn new(polys: &[&InvariantPolynomial]) -> Self {
        let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
        for p in polys {
            for (m, _) in p.terms() {
                let k = index.len();
                index.entry(m.clone()).or_insert(k);
            }
        }
        // renumber columns in canonical monomial order
        let ordered: Vec<Monomial> = index.keys().cloned().collect();
        let pos: BTreeMap<&Monomial, usize> = ordered.iter().enumerate().map(|(k, m)| (m, k)).collect();
        let rows = polys
            .iter()
            .map(|p| p.terms().map(|(m, c)| (pos[m], c.clone())).collect())
            .collect();
        MonomialMatrix { columns: ordered, rows }
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn reduce_mod(c: &Q, p: u64) -> Option<u64> {
    let pm = BigInt::from(p);
    let num = c.numer().mod_floor(&pm).to_u64().unwrap();
    let den = c.denom().mod_floor(&pm).to_u64().unwrap();
    if den == 0 {
        return None;
    }
    Some(mul_mod(num, pow_mod(den, p - 2, p), p))
}

/// Rank modulo p by sparse incremental elimination; None if a denominator vanishes mod p.
pub fn rank_mod(m: &MonomialMatrix, p: u64) -> Option<usize> {
    let mut pivots: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for row in &m.rows {
        let mut r: Vec<(usize, u64)> = Vec::with_capacity(row.len());
        for (c, v) in row {
            let x = reduce_mod(v, p)?;
            if x != 0 {
                r.push((*c, x));
            }
        }
        r.sort_unstable_by_key(|e| e.0);
        while let Some(&(lead, lv)) = r.first() {
            match pivots.get(&lead) {
                Some(piv) => {
                    // r -= lv * piv (piv has leading coefficient 1)
                    let mut out = Vec::with_capacity(r.len() + piv.len());
                    let (mut a, mut b) = (0, 0);
                    while a < r.len() || b < piv.len() {
                        if b == piv.len() || (a < r.len() && r[a].0 < piv[b].0) {
                            out.push(r[a]);
                            a += 1;
                        } else {
                            let sub = mul_mod(lv, piv[b].1, p);
                            if a < r.len() && r[a].0 == piv[b].0 {
                                let v = (r[a].1 + p - sub) % p;
                                if v != 0 {
                                    out.push((r[a].0, v));
                                }
                                a += 1;
                            } else {
                                out.push((piv[b].0, (p - sub) % p));
                            }
                            b += 1;
                        }
                    }
                    r = out;
                }
                None => {
                    let inv = pow_mod(lv, p - 2, p);
                    for e in r.iter_mut() {
                        e.1 = mul_mod(e.1, inv, p);
                    }
                    pivots.insert(lead, r);
                    break;
                }
            }
        }
    }
    Some(pivots.len())
}

/// Exact rank over the rationals.
pub fn rank_exact(m: &MonomialMatrix) -> usize {
    let mut pivots: BTreeMap<usize, BTreeMap<usize, Q>> = BTreeMap::new();
    for row in &m.rows {
        let mut r: BTreeMap<usize, Q> = row.iter().filter(|(_, v)| !v.is_zero()).cloned().collect();
        while let Some((&lead, lv)) = r.iter().next() {
            let lv = lv.clone();
            match pivots.get(&lead) {
                Some(piv) => {
                    for (c, v) in piv {
                        let e = r.entry(*c).or_insert_with(Q::zero);
                        *e -= &lv * v;
                        if e.is_zero() {
                            r.remove(c);
                        }
                    }
                }
                None => {
                    let normalized = r.into_iter().map(|(c, v)| (c, v / &lv)).collect();
                    pivots.insert(lead, normalized);
                    break;
                }
            }
        }
    }
    pivots.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMethod {
    Modular,
    ExactFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub rank: usize,
    pub method: RankMethod,
}

/// Modular rank over two primes, exact elimination when they disagree.
pub fn matrix_rank(m: &MonomialMatrix) -> RankResult {
    let (a, b) = rayon::join(|| rank_mod(m, PRIMES[0]), || rank_mod(m, PRIMES[1]));
    match (a, b) {
        (Some(x), Some(y)) if x == y => RankResult { rank: x, method: RankMethod::Modular },
        _ => RankResult { rank: rank_exact(m), method: RankMethod::ExactFallback },
    }
}

pub fn polys_rank(polys: &[&InvariantPolynomial]) -> RankResult {
    matrix_rank(&MonomialMatrix::new(polys))
}

pub fn linear_rank(cat: &Catalog, ids: &[u32]) -> RankResult {
    let polys: Vec<&InvariantPolynomial> = ids.iter().map(|id| cat.polynomial(*id).expect("catalog id")).collect();
    polys_rank(&polys)
}

/// Dimension of the span of every invariant of order <= O and degree <= D.
pub fn span_dimension(max_order: usize, max_degree: usize) -> RankResult {
    use rayon::prelude::*;
    let polys: Vec<InvariantPolynomial> =
        enumerate_chains(max_order, max_degree).par_iter().map(|c| c.polynomial()).collect();
    polys_rank(&polys.iter().collect::<Vec<_>>())
}

fn rational_matrix_rank(rows: Vec<Vec<Q>>) -> usize {
    let m = MonomialMatrix {
        columns: Vec::new(),
        rows: rows
            .into_iter()
            .map(|r| r.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect())
            .collect(),
    };
    rank_exact(&m)
}

/// Rank of the Jacobian d(invariants)/d(f_ij), 1 <= i+j <= max_order, at seeded
/// random rational jets; the maximum over `seeds` points is returned.
pub fn jacobian_rank_polys(polys: &[&InvariantPolynomial], max_order: u8, seeds: &[u64]) -> Vec<usize> {
    let symbols = DerivSymbol::all(max_order);
    let partials: Vec<Vec<InvariantPolynomial>> =
        polys.iter().map(|p| symbols.iter().map(|s| p.derivative(*s)).collect()).collect();
    seeds
        .iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let jet = random_rational_jet(&mut rng, 4);
            let rows = partials
                .iter()
                .map(|row| row.iter().map(|d| d.eval(&jet).expect("complete jet")).collect())
                .collect();
            rational_matrix_rank(rows)
        })
        .collect()
}

pub const JACOBIAN_SEEDS: [u64; 3] = [1, 2, 3];

pub fn jacobian_rank(cat: &Catalog, ids: &[u32], max_order: u8) -> usize {
    let polys: Vec<&InvariantPolynomial> = ids.iter().map(|id| cat.polynomial(*id).expect("catalog id")).collect();
    jacobian_rank_polys(&polys, max_order, &JACOBIAN_SEEDS).into_iter().max().unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct RankRow {
    pub set: String,
    pub expected: usize,
    pub computed: usize,
    pub method: String,
    pub status: String,
}

/// Twelve rows: LI rank, IR cardinality, FI Jacobian rank per (O, D).
pub fn set_size_report(cat: &Catalog) -> Vec<RankRow> {
    let mut out = Vec::new();
    for (o, d) in [(4, 4), (4, 3), (3, 4), (3, 3)] {
        for kind in [SetKind::LI, SetKind::IR, SetKind::FI] {
            let set = select_set(o, d, kind).expect("encoded set");
            let expected = expected_size(o, d, kind);
            let (computed, method) = match kind {
                SetKind::LI => {
                    let r = linear_rank(cat, &set.members);
                    (r.rank, format!("{:?}", r.method).to_lowercase())
                }
                SetKind::IR => (set.members.len(), "cardinality".to_string()),
                SetKind::FI => {
                    let r = jacobian_rank(cat, &set.members, o as u8);
                    // FI sets at degree 4 must coincide with the degree-3 ones
                    if d == 4 && select_set(o, 3, kind).expect("encoded set").members != set.members {
                        (0, format!("jacobian; differs from FI,{o},3"))
                    } else if d == 4 {
                        (r, format!("jacobian; equals FI,{o},3"))
                    } else {
                        (r, "jacobian".to_string())
                    }
                }
            };
            let status = if computed == expected {
                "pass"
            } else if kind == SetKind::FI {
                "not certified"
            } else {
                "fail"
            };
            out.push(RankRow {
                set: set.label(),
                expected,
                computed,
                method,
                status: status.into(),
            });
        }
    }
    out
}
