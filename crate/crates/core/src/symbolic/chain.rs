use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::{InvariantPolynomial, Monomial, Q};
use super::symbol::DerivSymbol;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum OpKind {
    F,
    G,
}

/// A fundamental operator in canonical orientation (F: p <= q, G: p < q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operator {
    kind: OpKind,
    p: u8,
    q: u8,
}

impl Operator {
    /// Builds the canonical operator and the sign picked up by reordering.
    pub fn new(kind: OpKind, p: u8, q: u8) -> Result<(Operator, i8)> {
        if p == 0 || q == 0 {
            return Err(Error::PointOutOfRange { index: 0, n: 0 });
        }
        match kind {
            OpKind::F => Ok((Operator { kind, p: p.min(q), q: p.max(q) }, 1)),
            OpKind::G if p == q => Err(Error::ZeroOperator(p)),
            OpKind::G if p < q => Ok((Operator { kind, p, q }, 1)),
            OpKind::G => Ok((Operator { kind, p: q, q: p }, -1)),
        }
    }

    pub fn f(p: u8, q: u8) -> Operator {
        Self::new(OpKind::F, p, q).unwrap().0
    }

    pub fn g(p: u8, q: u8) -> Operator {
        let (op, s) = Self::new(OpKind::G, p, q).unwrap();
        assert_eq!(s, 1, "G({p},{q}) is not in canonical orientation");
        op
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn points(&self) -> (u8, u8) {
        (self.p, self.q)
    }

    /// Relabel points, returning the canonical operator and orientation sign.
    fn relabel(&self, map: &[u8]) -> (Operator, i8) {
        let p = map[self.p as usize - 1];
        let q = map[self.q as usize - 1];
        Operator::new(self.kind, p, q).expect("relabeling preserves validity")
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            OpKind::F => 'F',
            OpKind::G => 'G',
        };
        write!(f, "{k}({},{})", self.p, self.q)
    }
}

/// A multiset of operators over points 1..n, every point used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorChain {
    ops: Vec<Operator>,
    n: usize,
    sign: i8,
}

impl OperatorChain {
    pub fn new(mut ops: Vec<Operator>, n: usize) -> Result<Self> {
        ops.sort();
        for op in &ops {
            for idx in [op.p, op.q] {
                if idx as usize > n {
                    return Err(Error::PointOutOfRange { index: idx, n });
                }
            }
        }
        let chain = OperatorChain { ops, n, sign: 1 };
        if let Some(k) = (1..=n).find(|&k| chain.usage(k) == 0) {
            return Err(Error::UnusedPoint(k));
        }
        Ok(chain)
    }

    /// Point count inferred from the largest index used.
    pub fn from_ops(ops: Vec<Operator>) -> Result<Self> {
        let n = ops.iter().map(|o| o.q.max(o.p) as usize).max().unwrap_or(0);
        Self::new(ops, n)
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = sign;
        self
    }

    pub fn ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Number of derivatives point k receives.
    pub fn usage(&self, k: usize) -> usize {
        self.ops
            .iter()
            .map(|o| (o.p as usize == k) as usize + (o.q as usize == k) as usize)
            .sum()
    }

    pub fn order(&self) -> usize {
        (1..=self.n).map(|k| self.usage(k)).max().unwrap_or(0)
    }

    pub fn f_count(&self) -> usize {
        self.ops.iter().filter(|o| o.kind == OpKind::F).count()
    }

    pub fn g_count(&self) -> usize {
        self.ops.iter().filter(|o| o.kind == OpKind::G).count()
    }

    /// Parse the chain grammar, e.g. "F(1,1).G(1,2)^2".
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |pos: usize, msg: &str| Error::Parse { pos, msg: msg.to_string() };
        let mut ops = Vec::new();
        let mut sign = 1i8;
        let mut pos = 0usize;
        for term in s.trim().split('.') {
            let t = term.trim();
            let (body, exp) = match t.split_once('^') {
                Some((b, e)) => (b, e.trim().parse::<usize>().map_err(|_| bad(pos, "bad exponent"))?),
                None => (t, 1),
            };
            let body = body.trim();
            let kind = match body.as_bytes().first() {
                Some(b'F') => OpKind::F,
                Some(b'G') => OpKind::G,
                _ => return Err(bad(pos, "expected F or G")),
            };
            let inner = body[1..]
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| bad(pos, "expected (p,q)"))?;
            let (a, b) = inner.split_once(',').ok_or_else(|| bad(pos, "expected p,q"))?;
            let p: u8 = a.trim().parse().map_err(|_| bad(pos, "bad point index"))?;
            let q: u8 = b.trim().parse().map_err(|_| bad(pos, "bad point index"))?;
            if exp == 0 {
                return Err(bad(pos, "zero exponent"));
            }
            let (op, s) = Operator::new(kind, p, q)?;
            for _ in 0..exp {
                ops.push(op);
                sign *= s;
            }
            pos += term.len() + 1;
        }
        Ok(Self::from_ops(ops)?.with_sign(sign))
    }

    /// Expand to the pre-collapse polynomial over points 1..n.
    pub fn apply(&self) -> Result<PointPolynomial> {
        let mut poly = PointPolynomial::unit(self.n);
        for op in &self.ops {
            poly = apply_operator(*op, &poly)?;
        }
        if self.sign < 0 {
            poly = poly.scale(&-Q::one());
        }
        Ok(poly)
    }

    /// Collapsed invariant; integer fast path equivalent to `collapse(apply())`.
    pub fn polynomial(&self) -> InvariantPolynomial {
        let mut terms: BTreeMap<Vec<(u8, u8)>, i64> = BTreeMap::new();
        terms.insert(vec![(0, 0); self.n], self.sign as i64);
        for op in &self.ops {
            let mut next: BTreeMap<Vec<(u8, u8)>, i64> = BTreeMap::new();
            for (m, c) in &terms {
                for (dm, dc) in op_images(*op, m) {
                    *next.entry(dm).or_insert(0) += c * dc;
                }
            }
            next.retain(|_, c| *c != 0);
            terms = next;
        }
        let mut out: BTreeMap<Monomial, i64> = BTreeMap::new();
        for (m, c) in terms {
            let key = Monomial::from_symbols(m.into_iter().map(|(a, b)| DerivSymbol::new(a, b)));
            *out.entry(key).or_insert(0) += c;
        }
        InvariantPolynomial::from_terms(out.into_iter().map(|(m, c)| (m, Q::from_integer(BigInt::from(c)))))
    }
}

impl fmt::Display for OperatorChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // A negative sign is written by reversing the first G operator.
        let mut flip = self.sign < 0;
        let mut k = 0;
        let mut first = true;
        while k < self.ops.len() {
            let mut e = 1;
            while k + e < self.ops.len() && self.ops[k + e] == self.ops[k] {
                e += 1;
            }
            let op = self.ops[k];
            if !first {
                f.write_str(".")?;
            }
            first = false;
            if flip && op.kind == OpKind::G {
                flip = false;
                write!(f, "G({},{})", op.q, op.p)?;
                if e > 1 {
                    write!(f, ".{op}")?;
                    if e > 2 {
                        write!(f, "^{}", e - 1)?;
                    }
                }
            } else {
                write!(f, "{op}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
            k += e;
        }
        Ok(())
    }
}

/// Multi-point polynomial: each monomial stores one (x-order, y-order) per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointPolynomial {
    n: usize,
    terms: BTreeMap<Vec<(u8, u8)>, Q>,
}

impl PointPolynomial {
    pub fn zero(n: usize) -> Self {
        PointPolynomial { n, terms: BTreeMap::new() }
    }

    /// The product f(x1,y1)...f(xn,yn).
    pub fn unit(n: usize) -> Self {
        let mut p = Self::zero(n);
        p.terms.insert(vec![(0, 0); n], Q::one());
        p
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<(u8, u8)>, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Vec<(u8, u8)>, c: Q) {
        assert_eq!(m.len(), self.n);
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn coefficient(&self, m: &[(u8, u8)]) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut p = Self::zero(self.n);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), v * c);
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut p = self.clone();
        for (m, v) in &other.terms {
            p.add_term(m.clone(), v.clone());
        }
        p
    }
}

fn op_images(op: Operator, m: &[(u8, u8)]) -> [(Vec<(u8, u8)>, i64); 2] {
    let (p, q) = (op.p as usize - 1, op.q as usize - 1);
    let mut a = m.to_vec();
    let mut b = m.to_vec();
    match op.kind {
        OpKind::F => {
            a[p].0 += 1;
            a[q].0 += 1;
            b[p].1 += 1;
            b[q].1 += 1;
            [(a, 1), (b, 1)]
        }
        OpKind::G => {
            a[p].0 += 1;
            a[q].1 += 1;
            b[q].0 += 1;
            b[p].1 += 1;
            [(a, 1), (b, -1)]
        }
    }
}

/// Apply one operator to a multi-point polynomial.
pub fn apply_operator(op: Operator, poly: &PointPolynomial) -> Result<PointPolynomial> {
    for idx in [op.p, op.q] {
        if idx as usize > poly.n {
            return Err(Error::PointOutOfRange { index: idx, n: poly.n });
        }
    }
    let mut out = PointPolynomial::zero(poly.n);
    for (m, c) in &poly.terms {
        for (dm, dc) in op_images(op, m) {
            out.add_term(dm, c * Q::from_integer(BigInt::from(dc)));
        }
    }
    Ok(out)
}

/// Rejects G(p,p) before an operator value exists.
pub fn operator(kind: OpKind, p: u8, q: u8) -> Result<(Operator, i8)> {
    Operator::new(kind, p, q)
}

pub fn apply_chain(chain: &OperatorChain) -> Result<PointPolynomial> {
    chain.apply()
}

/// Identify all points with (x,y).
pub fn collapse(poly: &PointPolynomial) -> InvariantPolynomial {
    let mut out = InvariantPolynomial::zero();
    for (m, c) in &poly.terms {
        let syms = m.iter().map(|&(a, b)| DerivSymbol::new(a, b));
        out.add_term(Monomial::from_symbols(syms), c.clone());
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<u8>> {
    fn rec(cur: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                cur.push(k as u8 + 1);
                rec(cur, used, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Result of canonicalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub chain: OperatorChain,
    pub sign: i8,
    /// Some relabeling maps the chain onto itself with sign -1, so it expands to zero.
    pub vanishes: bool,
}

/// Canonical representative of an operator multiset under point relabeling.
///
/// Labels are first compacted in order of first occurrence, then the
/// lexicographically smallest sorted operator list over all relabelings is
/// chosen (identity tried first). The returned chain carries the total sign.
pub fn canonicalize(ops: &[Operator], sign: i8) -> Canonical {
    let mut order: Vec<u8> = Vec::new();
    let mut sorted = ops.to_vec();
    sorted.sort();
    for op in &sorted {
        for idx in [op.p, op.q] {
            if !order.contains(&idx) {
                order.push(idx);
            }
        }
    }
    let max = order.iter().copied().max().unwrap_or(0) as usize;
    let mut compact = vec![0u8; max];
    for (k, &idx) in order.iter().enumerate() {
        compact[idx as usize - 1] = k as u8 + 1;
    }
    let n = order.len();
    let mut base_sign = sign;
    let base: Vec<Operator> = sorted
        .iter()
        .map(|op| {
            let (o, s) = op.relabel(&compact);
            base_sign *= s;
            o
        })
        .collect();

    let mut best: Option<(Vec<Operator>, i8)> = None;
    let mut vanishes = false;
    for perm in permutations(n) {
        let mut s = base_sign;
        let mut mapped: Vec<Operator> = base
            .iter()
            .map(|op| {
                let (o, t) = op.relabel(&perm);
                s *= t;
                o
            })
            .collect();
        mapped.sort();
        match &best {
            None => best = Some((mapped, s)),
            Some((b, bs)) => {
                if mapped < *b {
                    best = Some((mapped, s));
                } else if mapped == *b && s != *bs {
                    vanishes = true;
                }
            }
        }
    }
    let (ops, sign) = best.unwrap_or((Vec::new(), sign));
    let chain = OperatorChain { ops, n, sign };
    Canonical { chain, sign, vanishes }
}

pub fn canonical_chain(chain: &OperatorChain) -> (OperatorChain, i8) {
    let c = canonicalize(&chain.ops, chain.sign);
    (c.chain, c.sign)
}

/// All canonical chains with order <= max_order and degree <= max_degree whose
/// collapsed polynomial is nonzero, in deterministic (sorted) order.
pub fn enumerate_chains(max_order: usize, max_degree: usize) -> Vec<OperatorChain> {
    let mut found: BTreeSet<Vec<Operator>> = BTreeSet::new();
    for n in 1..=max_degree {
        let mut kinds = Vec::new();
        for p in 1..=n as u8 {
            for q in p..=n as u8 {
                kinds.push(Operator::f(p, q));
                if p < q {
                    kinds.push(Operator::g(p, q));
                }
            }
        }
        kinds.sort();
        let mut usage = vec![0usize; n];
        let mut cur = Vec::new();
        grow(&kinds, 0, &mut cur, &mut usage, max_order, &mut |ops: &[Operator]| {
            if ops.is_empty() {
                return;
            }
            let c = canonicalize(ops, 1);
            if !c.vanishes && c.chain.n == n {
                found.insert(c.chain.ops);
            }
        });
    }
    found
        .into_iter()
        .map(|ops| {
            let n = ops.iter().map(|o| o.q as usize).max().unwrap_or(0);
            OperatorChain { ops, n, sign: 1 }
        })
        .filter(|c| !c.polynomial().is_zero())
        .collect()
}

fn grow(
    kinds: &[Operator],
    start: usize,
    cur: &mut Vec<Operator>,
    usage: &mut [usize],
    max_order: usize,
    emit: &mut dyn FnMut(&[Operator]),
) {
    if usage.iter().all(|&u| u > 0) {
        emit(cur);
    }
    for k in start..kinds.len() {
        let op = kinds[k];
        let (p, q) = (op.p as usize - 1, op.q as usize - 1);
        usage[p] += 1;
        usage[q] += 1;
        if usage[p] <= max_order && usage[q] <= max_order {
            cur.push(op);
            grow(kinds, k, cur, usage, max_order, emit);
            cur.pop();
        }
        usage[p] -= 1;
        usage[q] -= 1;
    }
}
