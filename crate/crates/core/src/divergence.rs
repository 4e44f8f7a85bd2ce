//! Superficial degree of divergence and convergence verdicts.
//!
//! The degree is read off the scaling `p -> lambda p` of the integrand
//! together with the measure `dp`: for a rational form it is
//! `1 + deg_p(num) - deg_p(den)`. A verdict also needs the denominator to
//! be root-free on the integration domain `[0, inf)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{evaluate, Bindings, Expr, RationalForm};
use crate::scalar::Real;

/// Roots at or above this point count as lying on the domain `[0, inf)`.
const DOMAIN_EDGE: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Convergent,
    Divergent,
    SingularOnDomain,
}

/// Outcome of divergence analysis of one integrand under fixed bindings.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    /// Superficial degree of divergence.
    pub omega: i64,
    /// Whether the bound denominator has no real root in `[0, inf)`.
    pub pole_free: bool,
    pub verdict: Verdict,
}

/// Superficial degree of divergence `1 + deg_p(num) - deg_p(den)`.
///
/// Returns `i64::MIN` for the identically-zero integrand.
pub fn sdd<F: Real>(r: &RationalForm<F>) -> i64 {
    match r.num_degree() {
        None => i64::MIN,
        Some(dn) => 1 + dn as i64 - r.den_degree() as i64,
    }
}

/// Full report: symbolic degree, pole scan and the combined verdict.
pub fn analyze<F: Real>(r: &RationalForm<F>, q: F, b: &Bindings<F>) -> Result<DivergenceReport> {
    let omega = sdd(r);
    let pole_free = pole_scan(r, q, b)?;
    let verdict = if !pole_free {
        Verdict::SingularOnDomain
    } else if omega < 0 {
        Verdict::Convergent
    } else {
        Verdict::Divergent
    };
    Ok(DivergenceReport {
        omega,
        pole_free,
        verdict,
    })
}

/// Numerical cross-check of the scaling exponent: least-squares slope of
/// `log |lambda * F(lambda p0, q)|` against `log lambda` on a geometric grid
/// `lambda in [1e2, 1e6]`.
pub fn verify_sdd_numeric<F: Real>(e: &Expr<F>, q: F, b: &Bindings<F>, p0: F) -> Result<F> {
    if !(p0 > F::zero()) {
        return Err(Error::InvalidConfig("p0 must be positive".into()));
    }
    let n = 9;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let exponent = 2.0 + 4.0 * i as f64 / (n - 1) as f64;
        let lambda = F::of(10f64.powf(exponent));
        let value = lambda * evaluate(e, lambda * p0, q, b)?;
        if value == F::zero() {
            return Err(Error::DegenerateScaling);
        }
        xs.push(lambda.ln());
        ys.push(value.abs().ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

fn least_squares_slope<F: Real>(xs: &[F], ys: &[F]) -> F {
    let n = F::of(xs.len() as f64);
    let mean = |v: &[F]| v.iter().fold(F::zero(), |a, &x| a + x) / n;
    let (xm, ym) = (mean(xs), mean(ys));
    let mut cov = F::zero();
    let mut var = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        cov = cov + (x - xm) * (y - ym);
        var = var + (x - xm) * (x - xm);
    }
    cov / var
}

/// True iff the bound denominator has no real root in `[0, inf)`.
pub fn pole_scan<F: Real>(r: &RationalForm<F>, q: F, b: &Bindings<F>) -> Result<bool> {
    Ok(poles_in_domain(r, q, b)?.is_empty())
}

/// Real roots of the bound denominator lying in `[0, inf)`, ascending.
pub fn poles_in_domain<F: Real>(r: &RationalForm<F>, q: F, b: &Bindings<F>) -> Result<Vec<f64>> {
    let coeffs: Vec<f64> = r
        .bound_denominator(q, b)?
        .into_iter()
        .map(|c| c.as_f64())
        .collect();
    Ok(real_roots(&coeffs)
        .into_iter()
        .filter(|&x| x >= DOMAIN_EDGE)
        .collect())
}

/// All real roots of a polynomial with coefficients by ascending degree.
///
/// Roots of the derivative split the line into monotonic pieces; each piece
/// is bisected on a sign change. Critical points where the polynomial
/// (nearly) vanishes are kept as even-multiplicity roots.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let c = trim_leading(coeffs);
    if c.len() <= 1 {
        return Vec::new();
    }
    if c.len() == 2 {
        return vec![-c[0] / c[1]];
    }
    let eval = |x: f64| horner(&c, x);
    let scale_at = |x: f64| {
        c.iter()
            .enumerate()
            .map(|(i, a)| a.abs() * x.abs().powi(i as i32))
            .sum::<f64>()
            .max(1e-300)
    };

    // Cauchy bound on root magnitude
    let lead = *c.last().expect("nonempty");
    let bound = 1.0
        + c[..c.len() - 1]
            .iter()
            .map(|a| (a / lead).abs())
            .fold(0.0f64, f64::max);

    let derivative: Vec<f64> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a * i as f64)
        .collect();
    let mut knots = real_roots(&derivative);
    knots.retain(|x| x.abs() <= bound);
    knots.sort_by(f64::total_cmp);
    knots.insert(0, -bound);
    knots.push(bound);

    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (fa, fb) = (eval(a), eval(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fb == 0.0 {
            // right endpoint picked up by the next window or below
            continue;
        }
        if fa.signum() != fb.signum() {
            roots.push(bisect(&eval, a, b, fa));
        }
    }
    // even-multiplicity roots sit at critical points where the value dips to zero
    for &x in &knots[1..knots.len() - 1] {
        if eval(x).abs() <= 1e-9 * scale_at(x) {
            roots.push(x);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs()));
    roots
}

fn trim_leading(coeffs: &[f64]) -> Vec<f64> {
    let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut c: Vec<f64> = coeffs.to_vec();
    while let Some(&top) = c.last() {
        if c.len() > 1 && top.abs() <= 1e-12 * max {
            c.pop();
        } else {
            break;
        }
    }
    c
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let mut sign_a = fa.signum();
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sign_a {
            a = mid;
            sign_a = fm.signum();
        } else {
            b = mid;
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    0.5 * (a + b)
}
