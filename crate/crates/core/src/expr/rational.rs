//! Normalization of an expression into a ratio of polynomials in `p`.
//!
//! Coefficients stay as expression trees in `q` and the parameters; only the
//! `p`-degrees matter downstream, so no polynomial normalization in `q` is
//! attempted and common `p`-factors are not cancelled. Leading coefficients
//! that are identically zero are dropped, with zero detection by evaluating
//! the coefficient at random parameter points.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{evaluate, Bindings, Expr, EXTERNAL_MOMENTUM, INTERNAL_MOMENTUM};

/// Absolute threshold under which a sampled coefficient counts as zero.
const ZERO_THRESHOLD: f64 = 1e-10;
/// Number of random sample points for the zero test.
const ZERO_SAMPLES: usize = 8;
/// Fixed seed so degree counting is deterministic run to run.
const ZERO_TEST_SEED: u64 = 0x5dd_cafe;

/// An expression normalized as `num(p) / den(p)` with coefficient
/// expressions free of `p`, stored by ascending `p`-degree.
///
/// The zero polynomial is represented by an empty coefficient list; the
/// denominator is never identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm<F> {
    num: Vec<Expr<F>>,
    den: Vec<Expr<F>>,
}

impl<F: Real> RationalForm<F> {
    /// Numerator coefficients by ascending `p`-degree (empty if zero).
    pub fn numerator(&self) -> &[Expr<F>] {
        &self.num
    }

    /// Denominator coefficients by ascending `p`-degree.
    pub fn denominator(&self) -> &[Expr<F>] {
        &self.den
    }

    /// `p`-degree of the numerator; `None` for the zero polynomial.
    pub fn num_degree(&self) -> Option<usize> {
        self.num.len().checked_sub(1)
    }

    /// `p`-degree of the denominator.
    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    /// Evaluates `num(p)/den(p)` at a point.
    pub fn evaluate(&self, p: F, q: F, b: &Bindings<F>) -> Result<F> {
        let den = eval_poly(&self.den, p, q, b)?;
        if den == F::zero() {
            return Err(Error::DivisionByZero {
                p: p.as_f64(),
                q: q.as_f64(),
            });
        }
        let num = eval_poly(&self.num, p, q, b)?;
        Ok(num / den)
    }

    /// Denominator coefficients as numbers under the given `q` and bindings.
    pub fn bound_denominator(&self, q: F, b: &Bindings<F>) -> Result<Vec<F>> {
        self.den
            .iter()
            .map(|c| evaluate(c, F::zero(), q, b))
            .collect()
    }
}

fn eval_poly<F: Real>(coeffs: &[Expr<F>], p: F, q: F, b: &Bindings<F>) -> Result<F> {
    let mut acc = F::zero();
    for c in coeffs.iter().rev() {
        acc = acc * p + evaluate(c, p, q, b)?;
    }
    Ok(acc)
}

/// Rewrites `e` as a ratio of polynomials in `p` with exact degrees.
pub fn to_rational<F: Real>(e: &Expr<F>) -> Result<RationalForm<F>> {
    let (num, den) = rat(e)?;
    let num = trim(num);
    let den = trim(den);
    if den.is_empty() {
        return Err(Error::ZeroDenominator);
    }
    Ok(RationalForm { num, den })
}

fn rat<F: Real>(e: &Expr<F>) -> Result<(Vec<Expr<F>>, Vec<Expr<F>>)> {
    let one = || vec![Expr::num(F::one())];
    match e {
        Expr::Num(v) => Ok((vec![Expr::num(*v)], one())),
        Expr::Sym(s) if s == INTERNAL_MOMENTUM => {
            Ok((vec![Expr::num(F::zero()), Expr::num(F::one())], one()))
        }
        Expr::Sym(s) => Ok((vec![Expr::sym(s.clone())], one())),
        Expr::Neg(x) => {
            let (n, d) = rat(x)?;
            Ok((poly_neg(n), d))
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let (na, da) = rat(a)?;
            let (nb, db) = rat(b)?;
            let nb = if matches!(e, Expr::Sub(..)) {
                poly_neg(nb)
            } else {
                nb
            };
            Ok((
                poly_add(&poly_mul(&na, &db), &poly_mul(&nb, &da)),
                poly_mul(&da, &db),
            ))
        }
        Expr::Mul(a, b) => {
            let (na, da) = rat(a)?;
            let (nb, db) = rat(b)?;
            Ok((poly_mul(&na, &nb), poly_mul(&da, &db)))
        }
        Expr::Div(a, b) => {
            let (na, da) = rat(a)?;
            let (nb, db) = rat(b)?;
            if is_zero_poly(&nb) {
                return Err(Error::ZeroDenominator);
            }
            Ok((poly_mul(&na, &db), poly_mul(&da, &nb)))
        }
        Expr::Pow(base, n) => {
            let (nb, db) = rat(base)?;
            let mut num = vec![Expr::num(F::one())];
            let mut den = vec![Expr::num(F::one())];
            for _ in 0..*n {
                num = poly_mul(&num, &nb);
                den = poly_mul(&den, &db);
            }
            Ok((num, den))
        }
    }
}

fn poly_neg<F: Real>(a: Vec<Expr<F>>) -> Vec<Expr<F>> {
    a.into_iter().map(Expr::neg).collect()
}

fn poly_add<F: Real>(a: &[Expr<F>], b: &[Expr<F>]) -> Vec<Expr<F>> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => Expr::add(x.clone(), y.clone()),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

fn poly_mul<F: Real>(a: &[Expr<F>], b: &[Expr<F>]) -> Vec<Expr<F>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Expr::num(F::zero()); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let term = Expr::mul(x.clone(), y.clone());
            out[i + j] = Expr::add(out[i + j].clone(), term);
        }
    }
    out
}

fn is_zero_poly<F: Real>(coeffs: &[Expr<F>]) -> bool {
    coeffs.iter().all(is_identically_zero)
}

fn trim<F: Real>(mut coeffs: Vec<Expr<F>>) -> Vec<Expr<F>> {
    while let Some(top) = coeffs.last() {
        if is_identically_zero(top) {
            coeffs.pop();
        } else {
            break;
        }
    }
    coeffs
}

/// Probabilistic zero test: evaluate at random points for every free symbol
/// and require all samples below [`ZERO_THRESHOLD`] in absolute value.
pub(crate) fn is_identically_zero<F: Real>(e: &Expr<F>) -> bool {
    if let Expr::Num(v) = e {
        return v.abs().as_f64() <= ZERO_THRESHOLD;
    }
    let symbols = e.free_symbols();
    let mut rng = ChaCha8Rng::seed_from_u64(ZERO_TEST_SEED);
    let draw = |rng: &mut ChaCha8Rng| {
        let magnitude = rng.gen_range(0.5..2.5);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        F::of(sign * magnitude)
    };
    for _ in 0..ZERO_SAMPLES {
        // on evaluation failure (a random point hit a pole), redraw a few
        // times; a coefficient we cannot certify as zero counts as nonzero
        let mut verdict = None;
        for _ in 0..4 {
            let p = draw(&mut rng);
            let q = draw(&mut rng);
            let mut b = Bindings::new();
            for s in &symbols {
                if s != INTERNAL_MOMENTUM && s != EXTERNAL_MOMENTUM {
                    b.set(s.clone(), draw(&mut rng)).expect("not reserved");
                }
            }
            if let Ok(v) = evaluate(e, p, q, &b) {
                verdict = Some(v.abs().as_f64() <= ZERO_THRESHOLD);
                break;
            }
        }
        match verdict {
            Some(true) => continue,
            Some(false) | None => return false,
        }
    }
    true
}
