//! Exact construction of differential invariants from F/G operator chains.

mod chain;
mod expr;
mod poly;
mod symbol;

pub use chain::{
    apply_chain, apply_operator, canonical_chain, canonicalize, collapse, enumerate_chains, operator, Canonical,
    OpKind, Operator, OperatorChain, PointPolynomial,
};
pub use expr::Expr;
pub use poly::{parse_q, q, q_text, qr, CompiledPoly, InvariantPolynomial, Monomial, PolyJson, SymbolSource, TermJson, Q};
pub use symbol::{DerivSymbol, JET_LEN};

/// Expand a DI-variable expression with the given bindings.
pub fn poly_substitute(
    expr: &Expr,
    bindings: &std::collections::BTreeMap<u32, InvariantPolynomial>,
) -> crate::Result<InvariantPolynomial> {
    expr.expand(&|v| bindings.get(&v).cloned().ok_or(crate::Error::Unbound(v)))
}
