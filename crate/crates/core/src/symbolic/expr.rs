//! Expressions over derivative symbols and DI variables.
//!
//! Grammar (whitespace ignored, `*` optional between factors):
//!
//! ```text
//! expr   := ["+"|"-"] term (("+"|"-") term)*
//! term   := factor (["*"] factor)*
//! factor := atom ["^" int]
//! atom   := int ["/" int] | "DI" int | "f" digit digit | "f{" digit digit "}" | "(" expr ")"
//! ```

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;

use super::poly::{InvariantPolynomial, Q};
use super::symbol::DerivSymbol;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Q),
    Sym(DerivSymbol),
    Var(u32),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr> {
        let mut p = Parser { s: s.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// DI variables referenced by the expression.
    pub fn variables(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Num(_) | Expr::Sym(_) => {}
        }
    }

    /// Expand into derivative symbols, resolving DI variables through `bind`.
    pub fn expand(&self, bind: &dyn Fn(u32) -> Result<InvariantPolynomial>) -> Result<InvariantPolynomial> {
        Ok(match self {
            Expr::Num(c) => InvariantPolynomial::constant(c.clone()),
            Expr::Sym(s) => InvariantPolynomial::symbol(*s),
            Expr::Var(v) => bind(*v)?,
            Expr::Neg(a) => a.expand(bind)?.scale(&-Q::one()),
            Expr::Add(a, b) => a.expand(bind)?.add(&b.expand(bind)?),
            Expr::Sub(a, b) => a.expand(bind)?.sub(&b.expand(bind)?),
            Expr::Mul(a, b) => a.expand(bind)?.mul(&b.expand(bind)?),
            Expr::Pow(a, e) => a.expand(bind)?.pow(*e),
        })
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn small_int(&mut self) -> Result<u32> {
        let v = self.int()?;
        u32::try_from(v).map_err(|_| self.err("integer too large"))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = if self.eat(b'-') {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.eat(b'+');
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            // juxtaposition also multiplies
            let implicit = matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'(' || c == b'D' || c == b'f');
            if self.eat(b'*') || implicit {
                acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let a = self.atom()?;
        if self.eat(b'^') {
            let e = self.small_int()?;
            return Ok(Expr::Pow(Box::new(a), e));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.int()?;
                if self.eat(b'/') {
                    let d = self.int()?;
                    if d == BigInt::from(0) {
                        return Err(self.err("zero denominator"));
                    }
                    Ok(Expr::Num(Q::new(n, d)))
                } else {
                    Ok(Expr::Num(Q::from_integer(n)))
                }
            }
            Some(b'D') => {
                if self.s.get(self.pos + 1) != Some(&b'I') {
                    return Err(self.err("expected DI"));
                }
                self.pos += 2;
                Ok(Expr::Var(self.small_int()?))
            }
            Some(b'f') => {
                self.pos += 1;
                let braced = self.s.get(self.pos) == Some(&b'{');
                if braced {
                    self.pos += 1;
                }
                let d = |p: &Self, k: usize| p.s.get(p.pos + k).filter(|c| c.is_ascii_digit()).map(|c| c - b'0');
                let (i, j) = match (d(self, 0), d(self, 1)) {
                    (Some(i), Some(j)) => (i, j),
                    _ => return Err(self.err("expected two digits after f")),
                };
                self.pos += 2;
                if braced && !self.eat(b'}') {
                    return Err(self.err("expected '}'"));
                }
                Ok(Expr::Sym(DerivSymbol::new(i, j)))
            }
            _ => Err(self.err("expected number, symbol, variable or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::qr;

    #[test]
    fn implicit_multiplication() {
        let a = Expr::parse("DI1DI2 - (3/2)DI3").unwrap();
        let b = Expr::parse("DI1*DI2 - (3/2)*DI3").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.variables().into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn expands_symbols() {
        let p = Expr::parse("(f20 + f{02})^2").unwrap().expand(&|v| Err(Error::Unbound(v))).unwrap();
        assert_eq!(p.to_text(), "f20^2 + 2*f20*f02 + f02^2");
    }

    #[test]
    fn unbound_rejected() {
        let e = Expr::parse("DI7").unwrap();
        assert_eq!(e.expand(&|v| Err(Error::Unbound(v))), Err(Error::Unbound(7)));
    }

    #[test]
    fn leading_minus_and_fraction() {
        let p = InvariantPolynomial::from_text("-(1/2)*f10 + 1/4").unwrap();
        assert_eq!(p.coefficient(&super::super::poly::Monomial::one()), qr(1, 4));
        assert!(Expr::parse("f2").is_err());
        assert!(Expr::parse("1/0").is_err());
        assert!(Expr::parse("f20 +").is_err());
    }
}
