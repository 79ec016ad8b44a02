//! The 230 reference chains, their relations, independent sets and the
//! classic low-order invariants.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{poly_substitute, q_text, Expr, InvariantPolynomial, Monomial, OperatorChain, Q};

const CATALOG_TEXT: &str = include_str!("../assets/catalog.txt");
const RELATIONS_TEXT: &str = include_str!("../assets/relations.txt");
const SETS_TEXT: &str = include_str!("../assets/sets.txt");
const EXPANSIONS_TEXT: &str = include_str!("../assets/expansions.txt");

pub const CATALOG_SIZE: usize = 230;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: u32,
    pub chain: OperatorChain,
    pub polynomial: InvariantPolynomial,
    pub order: usize,
    pub degree: usize,
    /// Number of F operators.
    pub p: usize,
    /// Number of G operators.
    pub q: usize,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, id: u32) -> Option<&CatalogEntry> {
        let e = self.entries.get((id as usize).checked_sub(1)?)?;
        (e.id == id).then_some(e)
    }

    pub fn polynomial(&self, id: u32) -> Result<&InvariantPolynomial> {
        self.get(id).map(|e| &e.polynomial).ok_or(Error::Unbound(id))
    }

    pub fn bindings(&self) -> BTreeMap<u32, InvariantPolynomial> {
        self.entries.iter().map(|e| (e.id, e.polynomial.clone())).collect()
    }

    /// Ids with order <= max_order and degree <= max_degree.
    pub fn filter(&self, max_order: usize, max_degree: usize) -> Vec<u32> {
        self.entries
            .iter()
            .filter(|e| e.order <= max_order && e.degree <= max_degree)
            .map(|e| e.id)
            .collect()
    }
}

/// Parse "id: chain" lines; ids must run 1, 2, 3, ... in order.
pub fn parse_catalog(text: &str) -> Result<Catalog> {
    let mut entries = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (id, chain) = line
            .split_once(':')
            .ok_or_else(|| Error::Catalog { id: entries.len() as u32 + 1, msg: "missing ':'".into() })?;
        let id: u32 = id
            .trim()
            .parse()
            .map_err(|_| Error::Catalog { id: entries.len() as u32 + 1, msg: format!("bad id {id:?}") })?;
        if id as usize != entries.len() + 1 {
            return Err(Error::Catalog { id, msg: "ids out of sequence".into() });
        }
        let chain = OperatorChain::parse(chain).map_err(|e| Error::Catalog { id, msg: e.to_string() })?;
        let polynomial = chain.polynomial();
        if polynomial.is_zero() {
            return Err(Error::Catalog { id, msg: "chain expands to zero".into() });
        }
        entries.push(CatalogEntry {
            id,
            order: chain.order(),
            degree: chain.degree(),
            p: chain.f_count(),
            q: chain.g_count(),
            chain,
            polynomial,
        });
    }
    Ok(Catalog { entries })
}

pub fn build_catalog() -> Result<Catalog> {
    parse_catalog(CATALOG_TEXT)
}

/// Shared, lazily built catalog.
pub fn catalog() -> &'static Catalog {
    static CELL: OnceLock<Catalog> = OnceLock::new();
    CELL.get_or_init(|| build_catalog().expect("bundled catalog is well formed"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RelationStatus {
    Holds,
    HoldsUpToScalar { scalar: String },
    Fails,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationRecord {
    pub lhs: u32,
    pub rhs: String,
    #[serde(flatten)]
    pub status: RelationStatus,
    /// lhs - rhs, expanded; empty when the relation holds exactly.
    pub residual: String,
    pub residual_terms: usize,
}

/// The bundled relation list as (lhs id, rhs text).
pub fn relations() -> Vec<(u32, String)> {
    RELATIONS_TEXT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (a, b) = l.split_once(':').expect("relation line has ':'");
            (a.trim().parse().expect("relation id"), b.trim().to_string())
        })
        .collect()
}

pub fn verify_relation(cat: &Catalog, lhs: u32, rhs: &str) -> Result<RelationRecord> {
    let bindings = cat.bindings();
    let expr = Expr::parse(rhs)?;
    let expanded = poly_substitute(&expr, &bindings)?;
    let left = cat.polynomial(lhs)?;
    let residual = left.sub(&expanded);
    let status = if residual.is_zero() {
        RelationStatus::Holds
    } else if let Some(c) = left.scalar_ratio(&expanded) {
        RelationStatus::HoldsUpToScalar { scalar: q_text(&c) }
    } else {
        RelationStatus::Fails
    };
    Ok(RelationRecord {
        lhs,
        rhs: rhs.to_string(),
        status,
        residual_terms: residual.len(),
        residual: if residual.is_zero() { String::new() } else { residual.to_text() },
    })
}

pub fn verify_relations(cat: &Catalog) -> Vec<RelationRecord> {
    use rayon::prelude::*;
    relations()
        .par_iter()
        .map(|(lhs, rhs)| verify_relation(cat, *lhs, rhs).expect("bundled relation parses"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SetKind {
    LI,
    IR,
    FI,
}

impl std::str::FromStr for SetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LI" => Ok(SetKind::LI),
            "IR" => Ok(SetKind::IR),
            "FI" => Ok(SetKind::FI),
            other => Err(Error::Set(format!("unknown set kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for SetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetDescriptor {
    pub order: usize,
    pub degree: usize,
    pub kind: SetKind,
    pub members: Vec<u32>,
}

impl SetDescriptor {
    pub fn label(&self) -> String {
        format!("{},{},{}", self.kind, self.order, self.degree)
    }

    /// Parse "IR,4,3".
    pub fn parse_request(s: &str) -> Result<SetDescriptor> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Set(format!("expected I,O,D, got {s:?}")));
        }
        let kind: SetKind = parts[0].parse()?;
        let o = parts[1].trim().parse().map_err(|_| Error::Set(format!("bad order {:?}", parts[1])))?;
        let d = parts[2].trim().parse().map_err(|_| Error::Set(format!("bad degree {:?}", parts[2])))?;
        select_set(o, d, kind)
    }
}

fn parse_ranges(s: &str) -> Vec<u32> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => out.extend(a.parse::<u32>().unwrap()..=b.parse::<u32>().unwrap()),
            None => out.push(part.parse().unwrap()),
        }
    }
    out
}

fn encoded_sets() -> &'static BTreeMap<(SetKind, usize, usize), Vec<u32>> {
    static CELL: OnceLock<BTreeMap<(SetKind, usize, usize), Vec<u32>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut m = BTreeMap::new();
        for line in SETS_TEXT.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (head, ids) = line.split_once(':').expect("set line has ':'");
            let h: Vec<&str> = head.split_whitespace().collect();
            let kind: SetKind = h[0].parse().expect("set kind");
            let key = (kind, h[1].parse().unwrap(), h[2].parse().unwrap());
            m.insert(key, parse_ranges(ids));
        }
        m
    })
}

/// One of the twelve encoded independent sets.
pub fn select_set(order: usize, degree: usize, kind: SetKind) -> Result<SetDescriptor> {
    if !(3..=4).contains(&order) || !(3..=4).contains(&degree) {
        return Err(Error::Set(format!("order and degree must be 3 or 4, got ({order},{degree})")));
    }
    let members = encoded_sets()
        .get(&(kind, order, degree))
        .cloned()
        .ok_or_else(|| Error::Set(format!("no set {kind},{order},{degree}")))?;
    Ok(SetDescriptor { order, degree, kind, members })
}

/// Expected cardinalities / ranks of the twelve sets.
pub fn expected_size(order: usize, degree: usize, kind: SetKind) -> usize {
    match (kind, order, degree) {
        (SetKind::LI, 4, 4) => 230,
        (SetKind::LI, 4, 3) => 59,
        (SetKind::LI, 3, 4) => 64,
        (SetKind::LI, 3, 3) => 25,
        (SetKind::IR, 4, 4) => 96,
        (SetKind::IR, 4, 3) => 34,
        (SetKind::IR, 3, 4) => 30,
        (SetKind::IR, 3, 3) => 17,
        (SetKind::FI, 4, _) => 13,
        (SetKind::FI, 3, _) => 8,
        _ => 0,
    }
}

/// Independent sets rebuilt from the catalog: LI by the order/degree filter,
/// IR as LI minus every id that is the left side of a relation.
pub fn derived_set(cat: &Catalog, order: usize, degree: usize, kind: SetKind) -> Option<Vec<u32>> {
    let li = cat.filter(order, degree);
    match kind {
        SetKind::LI => Some(li),
        SetKind::IR => {
            let reducible: BTreeSet<u32> = relations().into_iter().map(|(l, _)| l).collect();
            Some(li.into_iter().filter(|id| !reducible.contains(id)).collect())
        }
        SetKind::FI => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionMatch {
    pub label: u32,
    pub printed: String,
    pub matched_id: Option<u32>,
    pub scalar: Option<String>,
    pub nearest_id: Option<u32>,
    pub nearest_overlap: Option<f64>,
    /// printed - scalar * nearest, when unmatched.
    pub residual: Option<String>,
}

/// Reference expansions as (label, polynomial text).
pub fn reference_expansions() -> Vec<(u32, String)> {
    EXPANSIONS_TEXT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (a, b) = l.split_once(':').unwrap();
            (a.trim().parse().unwrap(), b.trim().to_string())
        })
        .collect()
}

fn support(p: &InvariantPolynomial) -> BTreeSet<Monomial> {
    p.terms().map(|(m, _)| m.clone()).collect()
}

/// Match each reference expansion against the IR(4,3) members up to a scalar.
pub fn match_reference_expansions(cat: &Catalog) -> Vec<ExpansionMatch> {
    let candidates = select_set(4, 3, SetKind::IR).expect("IR 4 3 encoded").members;
    reference_expansions()
        .into_iter()
        .map(|(label, text)| {
            let printed = InvariantPolynomial::from_text(&text).expect("reference expansion parses");
            let mut found = None;
            for &id in &candidates {
                let poly = &cat.get(id).unwrap().polynomial;
                if let Some(c) = printed.scalar_ratio(poly) {
                    found = Some((id, c));
                    break;
                }
            }
            match found {
                Some((id, c)) => ExpansionMatch {
                    label,
                    printed: text,
                    matched_id: Some(id),
                    scalar: Some(q_text(&c)),
                    nearest_id: None,
                    nearest_overlap: None,
                    residual: None,
                },
                None => {
                    let sp = support(&printed);
                    let mut best: Option<(u32, f64)> = None;
                    for &id in &candidates {
                        let sc = support(&cat.get(id).unwrap().polynomial);
                        let inter = sp.intersection(&sc).count() as f64;
                        let union = sp.union(&sc).count() as f64;
                        let j = inter / union;
                        if best.is_none_or(|(_, b)| j > b) {
                            best = Some((id, j));
                        }
                    }
                    let (nid, overlap) = best.expect("candidates nonempty");
                    let near = &cat.get(nid).unwrap().polynomial;
                    let scale = near
                        .terms()
                        .find_map(|(m, c)| {
                            let pc = printed.coefficient(m);
                            (!pc.is_zero()).then(|| pc / c)
                        })
                        .unwrap_or_else(Q::one);
                    let residual = printed.sub(&near.scale(&scale));
                    ExpansionMatch {
                        label,
                        printed: text,
                        matched_id: None,
                        scalar: None,
                        nearest_id: Some(nid),
                        nearest_overlap: Some(overlap),
                        residual: Some(residual.to_text()),
                    }
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicInvariant {
    pub name: String,
    pub polynomial: String,
    /// (catalog id, scalar c) with classic = c * entry.
    pub matches: Vec<(u32, String)>,
}

const CLASSIC: [(&str, &str); 5] = [
    ("DI1", "f10^2 + f01^2"),
    ("DI2", "f20 + f02"),
    ("DI3", "f20*f02 - f11^2"),
    ("DI4", "f10^2*f02 - 2*f10*f01*f11 + f01^2*f20"),
    ("DI5", "f01^2*f11 + f10*f01*f20 - f10*f01*f02 - f10^2*f11"),
];

/// The five classic invariants with their exact catalog correspondences.
pub fn classic_invariants(cat: &Catalog) -> Vec<(ClassicInvariant, InvariantPolynomial)> {
    CLASSIC
        .iter()
        .map(|(name, text)| {
            let poly = InvariantPolynomial::from_text(text).unwrap();
            let matches = cat
                .entries()
                .iter()
                .filter_map(|e| poly.scalar_ratio(&e.polynomial).map(|c| (e.id, q_text(&c))))
                .collect();
            (ClassicInvariant { name: name.to_string(), polynomial: poly.to_text(), matches }, poly)
        })
        .collect()
}
