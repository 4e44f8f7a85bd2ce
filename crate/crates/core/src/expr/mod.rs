//! Integrand expressions: AST, evaluation, printing, substitution.
//!
//! An [`Expr`] is a formula over the integration variable `p`, the external
//! momentum `q`, and named parameters (`m`, `M`, ...). Expressions are
//! immutable trees; all operations on them are pure functions, so shared
//! expressions are safe to evaluate from many threads at once.

mod deriv;
mod parse;
mod rational;

pub use deriv::differentiate;
pub use parse::parse;
pub use rational::{to_rational, RationalForm};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reserved name of the integration variable.
pub const INTERNAL_MOMENTUM: &str = "p";
/// Reserved name of the external momentum.
pub const EXTERNAL_MOMENTUM: &str = "q";

/// Expression tree over `p`, `q` and named parameters.
///
/// Exponents are non-negative integers; negative exponents are rewritten as
/// division while parsing. Constructed through the smart constructors below,
/// which fold constant subtrees and algebraic identities (`0 + x`, `1 * x`,
/// `x^0`, ...) but perform no other simplification.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<F> {
    Num(F),
    Sym(String),
    Neg(Box<Expr<F>>),
    Add(Box<Expr<F>>, Box<Expr<F>>),
    Sub(Box<Expr<F>>, Box<Expr<F>>),
    Mul(Box<Expr<F>>, Box<Expr<F>>),
    Div(Box<Expr<F>>, Box<Expr<F>>),
    Pow(Box<Expr<F>>, u32),
}

#[allow(clippy::should_implement_trait)] // constructor shorthands, not operator impls
impl<F: Real> Expr<F> {
    pub fn num(v: F) -> Self {
        Expr::Num(v)
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Expr::Sym(name.into())
    }

    /// The integration variable `p`.
    pub fn p() -> Self {
        Expr::Sym(INTERNAL_MOMENTUM.to_owned())
    }

    /// The external momentum `q`.
    pub fn q() -> Self {
        Expr::Sym(EXTERNAL_MOMENTUM.to_owned())
    }

    pub fn neg(e: Expr<F>) -> Self {
        match e {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expr<F>, b: Expr<F>) -> Self {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
            (Expr::Num(z), e) if z == F::zero() => e,
            (e, Expr::Num(z)) if z == F::zero() => e,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr<F>, b: Expr<F>) -> Self {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
            (e, Expr::Num(z)) if z == F::zero() => e,
            (Expr::Num(z), e) if z == F::zero() => Expr::neg(e),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr<F>, b: Expr<F>) -> Self {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
            (Expr::Num(z), _) | (_, Expr::Num(z)) if z == F::zero() => Expr::Num(F::zero()),
            (Expr::Num(one), e) if one == F::one() => e,
            (e, Expr::Num(one)) if one == F::one() => e,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr<F>, b: Expr<F>) -> Self {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) if y != F::zero() => Expr::Num(x / y),
            (e, Expr::Num(one)) if one == F::one() => e,
            (Expr::Num(z), e) if z == F::zero() && !matches!(e, Expr::Num(_)) => {
                Expr::Num(F::zero())
            }
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(base: Expr<F>, exponent: u32) -> Self {
        match (base, exponent) {
            (_, 0) => Expr::Num(F::one()),
            (b, 1) => b,
            (Expr::Num(v), n) => Expr::Num(v.powi(n as i32)),
            (b, n) => Expr::Pow(Box::new(b), n),
        }
    }

    /// All symbol names occurring in the expression, `p` and `q` included.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Neg(x) | Expr::Pow(x, _) => x.collect_symbols(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Parameter names: free symbols other than `p` and `q`.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut s = self.free_symbols();
        s.remove(INTERNAL_MOMENTUM);
        s.remove(EXTERNAL_MOMENTUM);
        s
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Sym(s) => s == name,
            Expr::Neg(x) | Expr::Pow(x, _) => x.contains_symbol(name),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_symbol(name) || b.contains_symbol(name)
            }
        }
    }
}

/// Replaces every occurrence of the symbol `name` by `replacement`,
/// re-folding constants along the way.
pub fn substitute<F: Real>(e: &Expr<F>, name: &str, replacement: &Expr<F>) -> Expr<F> {
    match e {
        Expr::Num(v) => Expr::Num(*v),
        Expr::Sym(s) => {
            if s == name {
                replacement.clone()
            } else {
                Expr::Sym(s.clone())
            }
        }
        Expr::Neg(x) => Expr::neg(substitute(x, name, replacement)),
        Expr::Add(a, b) => Expr::add(
            substitute(a, name, replacement),
            substitute(b, name, replacement),
        ),
        Expr::Sub(a, b) => Expr::sub(
            substitute(a, name, replacement),
            substitute(b, name, replacement),
        ),
        Expr::Mul(a, b) => Expr::mul(
            substitute(a, name, replacement),
            substitute(b, name, replacement),
        ),
        Expr::Div(a, b) => Expr::div(
            substitute(a, name, replacement),
            substitute(b, name, replacement),
        ),
        Expr::Pow(x, n) => Expr::pow(substitute(x, name, replacement), *n),
    }
}

/// Parameter bindings (everything except `p` and `q`, which are supplied
/// per evaluation call).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings<F> {
    map: BTreeMap<String, F>,
}

impl<F: Real> Bindings<F> {
    pub fn new() -> Self {
        Bindings {
            map: BTreeMap::new(),
        }
    }

    /// Binds a parameter. The reserved variables `p` and `q` are rejected.
    pub fn set(&mut self, name: impl Into<String>, value: F) -> Result<()> {
        let name = name.into();
        if name == INTERNAL_MOMENTUM || name == EXTERNAL_MOMENTUM {
            return Err(Error::ReservedSymbol(name));
        }
        self.map.insert(name, value);
        Ok(())
    }

    /// Builds bindings from `(name, value)` pairs.
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, F)>) -> Result<Self> {
        let mut b = Bindings::new();
        for (k, v) in pairs {
            b.set(k, v)?;
        }
        Ok(b)
    }

    pub fn get(&self, name: &str) -> Option<F> {
        self.map.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, F)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Returns a copy with `name` bound to `value`.
    pub fn with(&self, name: impl Into<String>, value: F) -> Result<Self> {
        let mut out = self.clone();
        out.set(name, value)?;
        Ok(out)
    }
}

/// Evaluates `e` at the point `(p, q)` under the given parameter bindings.
pub fn evaluate<F: Real>(e: &Expr<F>, p: F, q: F, b: &Bindings<F>) -> Result<F> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Sym(s) => match s.as_str() {
            INTERNAL_MOMENTUM => Ok(p),
            EXTERNAL_MOMENTUM => Ok(q),
            name => b
                .get(name)
                .ok_or_else(|| Error::UnboundSymbol(name.to_owned())),
        },
        Expr::Neg(x) => Ok(-evaluate(x, p, q, b)?),
        Expr::Add(x, y) => Ok(evaluate(x, p, q, b)? + evaluate(y, p, q, b)?),
        Expr::Sub(x, y) => Ok(evaluate(x, p, q, b)? - evaluate(y, p, q, b)?),
        Expr::Mul(x, y) => Ok(evaluate(x, p, q, b)? * evaluate(y, p, q, b)?),
        Expr::Div(x, y) => {
            let d = evaluate(y, p, q, b)?;
            if d == F::zero() {
                return Err(Error::DivisionByZero {
                    p: p.as_f64(),
                    q: q.as_f64(),
                });
            }
            Ok(evaluate(x, p, q, b)? / d)
        }
        Expr::Pow(x, n) => Ok(evaluate(x, p, q, b)?.powi(*n as i32)),
    }
}

// Printing with minimal parentheses. Precedence levels:
// add/sub 1, mul/div 2, unary minus (and negative literals) 3, pow 4, atoms 5.
fn prec<F: Real>(e: &Expr<F>) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Num(v) if *v < F::zero() => 3,
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::Sym(_) => 5,
    }
}

fn write_prec<F: Real>(e: &Expr<F>, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write_prec(e, f, 0)?;
        return write!(f, ")");
    }
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Sym(s) => write!(f, "{s}"),
        Expr::Neg(x) => {
            write!(f, "-")?;
            write_prec(x, f, 3)
        }
        Expr::Add(a, b) => {
            write_prec(a, f, 1)?;
            write!(f, "+")?;
            write_prec(b, f, 2)
        }
        Expr::Sub(a, b) => {
            write_prec(a, f, 1)?;
            write!(f, "-")?;
            write_prec(b, f, 2)
        }
        Expr::Mul(a, b) => {
            write_prec(a, f, 2)?;
            write!(f, "*")?;
            write_prec(b, f, 3)
        }
        Expr::Div(a, b) => {
            write_prec(a, f, 2)?;
            write!(f, "/")?;
            write_prec(b, f, 3)
        }
        Expr::Pow(b, n) => {
            write_prec(b, f, 5)?;
            write!(f, "^{n}")
        }
    }
}

impl<F: Real> fmt::Display for Expr<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_divergent() -> Expr<f64> {
        parse("1/(p+q+m^2)").unwrap()
    }

    #[test]
    fn evaluate_direct_substitution() {
        let e = log_divergent();
        let b = Bindings::from_pairs([("m", 1.0)]).unwrap();
        assert_eq!(evaluate(&e, 0.0, 1.0, &b).unwrap(), 0.5);
    }

    #[test]
    fn evaluate_pole_is_division_by_zero() {
        let e = log_divergent();
        let b = Bindings::from_pairs([("m", 1.0)]).unwrap();
        let err = evaluate(&e, -2.0, 1.0, &b).unwrap_err();
        assert!(matches!(err, Error::DivisionByZero { .. }));
    }

    #[test]
    fn evaluate_derivative_value() {
        // -1/(p+q+m^2)^2 at p=0, q=1, m=1
        let e: Expr<f64> = parse("-1/(p+q+m^2)^2").unwrap();
        let b = Bindings::from_pairs([("m", 1.0)]).unwrap();
        assert_eq!(evaluate(&e, 0.0, 1.0, &b).unwrap(), -0.25);
    }

    #[test]
    fn evaluate_unbound_symbol() {
        let e = log_divergent();
        let b = Bindings::new();
        assert_eq!(
            evaluate(&e, 0.0, 1.0, &b).unwrap_err(),
            Error::UnboundSymbol("m".to_owned())
        );
    }

    #[test]
    fn bindings_reject_reserved_names() {
        let mut b: Bindings<f64> = Bindings::new();
        assert_eq!(
            b.set("p", 1.0).unwrap_err(),
            Error::ReservedSymbol("p".into())
        );
        assert_eq!(
            b.set("q", 1.0).unwrap_err(),
            Error::ReservedSymbol("q".into())
        );
        b.set("m", 1.0).unwrap();
    }

    #[test]
    fn substitute_folds_constants() {
        // q -> 0 in (q - 0)^2 * x collapses the whole factor
        let e: Expr<f64> = parse("1/(p+q+m^2)").unwrap();
        let at_zero = substitute(&e, "q", &Expr::num(0.0));
        assert_eq!(at_zero, parse("1/(p+m^2)").unwrap());
    }

    #[test]
    fn single_precision_scalar() {
        let e: Expr<f32> = parse("1/(p+q+m^2)").unwrap();
        let b = Bindings::from_pairs([("m", 1.0f32)]).unwrap();
        assert_eq!(evaluate(&e, 0.0, 1.0, &b).unwrap(), 0.5);
    }

    #[test]
    fn smart_constructors_fold() {
        let zero = Expr::<f64>::num(0.0);
        let x = Expr::<f64>::sym("x");
        assert_eq!(Expr::add(zero.clone(), x.clone()), x);
        assert_eq!(Expr::mul(zero.clone(), x.clone()), zero);
        assert_eq!(Expr::mul(Expr::num(1.0), x.clone()), x);
        assert_eq!(Expr::pow(x.clone(), 0), Expr::num(1.0));
        assert_eq!(Expr::pow(x.clone(), 1), x);
        assert_eq!(Expr::sub(zero.clone(), x.clone()), Expr::neg(x.clone()));
        assert_eq!(Expr::neg(Expr::neg(x.clone())), x);
        assert_eq!(Expr::div(Expr::num(1.0), Expr::num(4.0)), Expr::num(0.25));
    }
}
