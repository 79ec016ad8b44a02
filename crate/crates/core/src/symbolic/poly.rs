use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::symbol::{DerivSymbol, JET_LEN};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Render a rational as "p" or "p/q".
pub fn q_text(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(a.trim().parse().ok()?, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// A product of derivative symbols with positive exponents, sorted by symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(DerivSymbol, u32)>);

impl Ord for Monomial {
    /// Lexicographic on the expanded symbol sequence, so f20^2 < f20*f02.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.0.iter().flat_map(|(s, e)| std::iter::repeat_n(*s, *e as usize));
        let b = other.0.iter().flat_map(|(s, e)| std::iter::repeat_n(*s, *e as usize));
        a.cmp(b)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_symbols<I: IntoIterator<Item = DerivSymbol>>(syms: I) -> Self {
        let mut v: Vec<DerivSymbol> = syms.into_iter().collect();
        v.sort();
        let mut out: Vec<(DerivSymbol, u32)> = Vec::new();
        for s in v {
            match out.last_mut() {
                Some((t, e)) if *t == s => *e += 1,
                _ => out.push((s, 1)),
            }
        }
        Monomial(out)
    }

    pub fn factors(&self) -> &[(DerivSymbol, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, s: DerivSymbol) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| *t == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() || b < other.0.len() {
            if b == other.0.len() || (a < self.0.len() && self.0[a].0 < other.0[b].0) {
                out.push(self.0[a]);
                a += 1;
            } else if a == self.0.len() || other.0[b].0 < self.0[a].0 {
                out.push(other.0[b]);
                b += 1;
            } else {
                out.push((self.0[a].0, self.0[a].1 + other.0[b].1));
                a += 1;
                b += 1;
            }
        }
        Monomial(out)
    }

    /// d/ds of this monomial as (multiplier, remaining monomial).
    fn derivative(&self, s: DerivSymbol) -> Option<(u32, Monomial)> {
        let pos = self.0.iter().position(|(t, _)| *t == s)?;
        let mut v = self.0.clone();
        let e = v[pos].1;
        if e == 1 {
            v.remove(pos);
        } else {
            v[pos].1 -= 1;
        }
        Some((e, Monomial(v)))
    }

    fn text(&self) -> String {
        self.0
            .iter()
            .map(|(s, e)| if *e == 1 { s.to_string() } else { format!("{s}^{e}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Exact polynomial in derivative symbols; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InvariantPolynomial {
    terms: BTreeMap<Monomial, Q>,
}

impl InvariantPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn symbol(s: DerivSymbol) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::from_symbols([s]), Q::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Q)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), -c.clone());
        }
        p
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        InvariantPolynomial {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                p.add_term(ma.mul(mb), ca * cb);
            }
        }
        p
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(Q::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Set of monomial degrees present.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(Monomial::degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degrees().len() <= 1
    }

    /// Highest derivative order among the symbols used.
    pub fn max_order(&self) -> u8 {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(s, _)| s.order()))
            .max()
            .unwrap_or(0)
    }

    pub fn symbols(&self) -> Vec<DerivSymbol> {
        let mut v: Vec<DerivSymbol> = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(s, _)| *s))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn derivative(&self, s: DerivSymbol) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.derivative(s) {
                p.add_term(rest, c * q(e as i64));
            }
        }
        p
    }

    /// Returns c with self = c * other when such a nonzero rational exists.
    pub fn scalar_ratio(&self, other: &Self) -> Option<Q> {
        if self.len() != other.len() || self.is_zero() {
            return None;
        }
        let (m0, c0) = other.terms.iter().next()?;
        let c = self.terms.get(m0)? / c0;
        for (m, v) in &other.terms {
            if self.terms.get(m)? != &(v * &c) {
                return None;
            }
        }
        Some(c)
    }

    /// Exact or floating evaluation depending on the scalar type.
    pub fn eval<T: Scalar>(&self, jet: &impl SymbolSource<T>) -> Result<T> {
        let mut acc = T::zero_value();
        for (m, c) in &self.terms {
            let mut t = T::from_rational(c);
            for (s, e) in m.factors() {
                let v = jet.value(*s).ok_or(Error::MissingSymbol(s.i, s.j))?;
                for _ in 0..*e {
                    t = t * v.clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Replace every symbol by a polynomial (used for moment substitution).
    pub fn substitute_symbols(&self, f: &dyn Fn(DerivSymbol) -> Self) -> Self {
        let mut acc = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for (s, e) in m.factors() {
                t = t.mul(&f(*s).pow(*e));
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut idx = Vec::new();
                    for (s, e) in m.factors() {
                        for _ in 0..*e {
                            idx.push(s.index() as u8);
                        }
                    }
                    (c.to_f64().unwrap_or(f64::NAN), idx)
                })
                .collect(),
        }
    }

    /// Sorted term list, e.g. "2*f20*f02 - 2*f11^2".
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = m.text();
            if mono.is_empty() {
                out.push_str(&q_text(&a));
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&q_text(&a));
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        super::expr::Expr::parse(s)?.expand(&|id| Err(Error::Unbound(id)))
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson {
                    c: q_text(c),
                    m: m.factors().iter().map(|(s, e)| (s.label(), *e)).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self> {
        let mut p = Self::zero();
        for t in &j.terms {
            let c = parse_q(&t.c).ok_or_else(|| Error::Parse { pos: 0, msg: format!("bad coefficient {}", t.c) })?;
            let mut syms = Vec::new();
            for (l, e) in &t.m {
                let b = l.as_bytes();
                if b.len() != 2 || !b[0].is_ascii_digit() || !b[1].is_ascii_digit() {
                    return Err(Error::Parse { pos: 0, msg: format!("bad symbol {l}") });
                }
                let s = DerivSymbol::new(b[0] - b'0', b[1] - b'0');
                syms.extend(std::iter::repeat_n(s, *e as usize));
            }
            p.add_term(Monomial::from_symbols(syms), c);
        }
        Ok(p)
    }
}

impl fmt::Display for InvariantPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub c: String,
    pub m: BTreeMap<String, u32>,
}

/// Anything that can supply a value per derivative symbol.
pub trait SymbolSource<T> {
    fn value(&self, s: DerivSymbol) -> Option<&T>;
}

impl<T> SymbolSource<T> for BTreeMap<DerivSymbol, T> {
    fn value(&self, s: DerivSymbol) -> Option<&T> {
        self.get(&s)
    }
}

/// Floating evaluation form with coefficients rounded once.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<u8>)>,
}

impl CompiledPoly {
    pub fn eval(&self, jet: &[f64; JET_LEN]) -> f64 {
        let mut acc = 0.0;
        for (c, idx) in &self.terms {
            let mut t = *c;
            for &k in idx {
                t *= jet[k as usize];
            }
            acc += t;
        }
        acc
    }
}
