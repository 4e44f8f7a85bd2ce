//! Symbolic differentiation with respect to the external momentum `q`.
//!
//! Recursive sum/product/quotient/power rules, with no simplification
//! beyond the constant folding done by the smart constructors.

use crate::scalar::Real;

use super::{Expr, EXTERNAL_MOMENTUM};

/// `order`-th symbolic derivative of `e` with respect to `q`.
/// `order = 0` returns the expression unchanged.
pub fn differentiate<F: Real>(e: &Expr<F>, order: u32) -> Expr<F> {
    let mut current = e.clone();
    for _ in 0..order {
        current = d1(&current);
    }
    current
}

fn d1<F: Real>(e: &Expr<F>) -> Expr<F> {
    match e {
        Expr::Num(_) => Expr::num(F::zero()),
        Expr::Sym(s) => {
            if s == EXTERNAL_MOMENTUM {
                Expr::num(F::one())
            } else {
                Expr::num(F::zero())
            }
        }
        Expr::Neg(x) => Expr::neg(d1(x)),
        Expr::Add(a, b) => Expr::add(d1(a), d1(b)),
        Expr::Sub(a, b) => Expr::sub(d1(a), d1(b)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(d1(a), (**b).clone()),
            Expr::mul((**a).clone(), d1(b)),
        ),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(
                Expr::mul(d1(a), (**b).clone()),
                Expr::mul((**a).clone(), d1(b)),
            ),
            Expr::pow((**b).clone(), 2),
        ),
        Expr::Pow(base, n) => Expr::mul(
            Expr::mul(
                Expr::num(F::from_u32(*n).expect("small integer")),
                Expr::pow((**base).clone(), n - 1),
            ),
            d1(base),
        ),
    }
}
