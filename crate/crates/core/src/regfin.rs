//! Regularization schemes, Taylor subtraction and finite-part extraction.
//!
//! A divergent half-line integral with superficial degree of divergence
//! `omega = k >= 0` has a finite part that is independent of the chosen
//! regularization: subtract the order-`k` Taylor polynomial in `q` around
//! the subtraction point. Three routes are implemented and cross-checked:
//!
//! * [`finite_part_direct`]: subtract the Taylor terms from the *integrand*
//!   and integrate the convergent remainder (no regulator at all);
//! * [`finite_part_cutoff_limit`] with a hard cutoff: regulate at scale
//!   `Lambda`, subtract the regulated Taylor terms, send `Lambda -> inf`;
//! * the same limit in the partner scheme, where a partner integrand with
//!   scale `M` is subtracted pointwise and `M -> inf`.

use std::fmt;

use serde::Serialize;

use crate::divergence::{poles_in_domain, sdd};
use crate::error::{Error, Result};
use crate::expr::{differentiate, evaluate, parse, substitute, Bindings, Expr, EXTERNAL_MOMENTUM};
use crate::quad::{self, QuadResult};
use crate::scalar::Real;

/// Partner family used by convenience constructors and the CLI default.
pub const DEFAULT_PARTNER_FAMILY: &str = "1/(p+q+m*M)";
/// Conventional name of the partner scale symbol.
pub const DEFAULT_SCALE_NAME: &str = "M";

/// Doubling budget of the regulator-scale schedule (cap `2^40 * c0`).
const MAX_DOUBLINGS: u32 = 40;

/// Regularization scheme descriptor.
#[derive(Debug, Clone)]
pub enum Regulator<F> {
    /// Truncate the integration domain at `p = lambda`.
    HardCutoff { lambda: F },
    /// Subtract a partner integrand carrying the scale symbol `scale_name`.
    Partner {
        family: Expr<F>,
        scale_name: String,
        scale: F,
    },
    /// No regulator: only the pure subtracted-integrand route applies.
    None,
}

impl<F: Real> Regulator<F> {
    pub fn hard_cutoff(lambda: F) -> Result<Self> {
        if !lambda.is_finite() || !(lambda > F::zero()) {
            return Err(Error::InvalidRegulator(
                "cutoff scale must be finite and positive".into(),
            ));
        }
        Ok(Regulator::HardCutoff { lambda })
    }

    /// Builds a partner regulator and verifies, under the given bindings and
    /// with the scale symbol set to `scale`, that the difference
    /// `original - family` has a negative superficial degree of divergence.
    pub fn partner(
        original: &Expr<F>,
        family: Expr<F>,
        scale_name: impl Into<String>,
        scale: F,
        b: &Bindings<F>,
    ) -> Result<Self> {
        let scale_name = scale_name.into();
        if !scale.is_finite() || !(scale > F::zero()) {
            return Err(Error::InvalidRegulator(
                "partner scale must be finite and positive".into(),
            ));
        }
        let diff = Expr::sub(original.clone(), family.clone());
        let mut bound = substitute(&diff, &scale_name, &Expr::num(scale));
        for (name, value) in b.iter() {
            bound = substitute(&bound, name, &Expr::num(value));
        }
        let omega = sdd(&crate::expr::to_rational(&bound)?);
        if omega >= 0 {
            return Err(Error::InvalidRegulator(format!(
                "partner family does not regulate: sdd(original - partner) = {omega} >= 0"
            )));
        }
        Ok(Regulator::Partner {
            family,
            scale_name,
            scale,
        })
    }

    /// The stock partner family `1/(p+q+m*M)` with scale symbol `M`.
    pub fn default_partner(original: &Expr<F>, scale: F, b: &Bindings<F>) -> Result<Self> {
        let family = parse(DEFAULT_PARTNER_FAMILY).expect("builtin family parses");
        Regulator::partner(original, family, DEFAULT_SCALE_NAME, scale, b)
    }
}

/// Taylor subtraction prescription: order `k` and subtraction point `q_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubtractionSpec<F> {
    pub order: u32,
    pub point: F,
}

impl<F: Real> SubtractionSpec<F> {
    pub fn new(order: u32, point: F) -> Self {
        SubtractionSpec { order, point }
    }
}

/// How a finite part was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FiniteMethod {
    DirectSubtracted,
    CutoffLimit,
    PartnerLimit,
}

impl fmt::Display for FiniteMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FiniteMethod::DirectSubtracted => "direct-subtracted",
            FiniteMethod::CutoffLimit => "cutoff-limit",
            FiniteMethod::PartnerLimit => "partner-limit",
        };
        f.write_str(s)
    }
}

/// A finite-part value with its error estimate and, for the limit methods,
/// the coefficients of the subtraction polynomial at the final regulator
/// scale: entry `(n, c_n)` is the coefficient of `(q - q_s)^n`.
#[derive(Debug, Clone, Serialize)]
pub struct FinitePartResult<F> {
    pub value: F,
    pub abs_error_estimate: F,
    pub method: FiniteMethod,
    pub subtraction_terms: Vec<(u32, F)>,
}

fn check_point<F: Real>(spec: &SubtractionSpec<F>) -> Result<()> {
    if !spec.point.is_finite() || spec.point < F::zero() {
        return Err(Error::InvalidConfig(
            "subtraction point must be finite and >= 0".into(),
        ));
    }
    Ok(())
}

fn check_order<F: Real>(e: &Expr<F>, spec: &SubtractionSpec<F>) -> Result<i64> {
    let omega = sdd(&crate::expr::to_rational(e)?);
    if (spec.order as i64) < omega {
        return Err(Error::InsufficientOrder {
            required: omega,
            got: spec.order,
        });
    }
    Ok(omega)
}

fn demote_pole(e: Error) -> Error {
    match e {
        Error::PoleOnInterval(p) => Error::SingularOnDomain(p),
        other => other,
    }
}

/// Evaluates the regularized integral at the regulator's own scale:
/// `int_0^Lambda e dp` for a hard cutoff, `int_0^inf (e - partner) dp`
/// for a partner scheme.
pub fn regularized_value<F: Real>(
    e: &Expr<F>,
    reg: &Regulator<F>,
    q: F,
    b: &Bindings<F>,
    tol: F,
) -> Result<QuadResult<F>> {
    match reg {
        Regulator::HardCutoff { lambda } => {
            let r = crate::expr::to_rational(e)?;
            if let Some(&pole) = poles_in_domain(&r, q, b)?
                .iter()
                .find(|&&x| x <= lambda.as_f64() + 1e-9)
            {
                return Err(Error::SingularOnDomain(pole));
            }
            quad::integrate_finite(|p| evaluate(e, p, q, b), F::zero(), *lambda, tol)
                .map_err(demote_pole)
        }
        Regulator::Partner {
            family,
            scale_name,
            scale,
        } => {
            let diff = Expr::sub(e.clone(), family.clone());
            let bc = b.with(scale_name.clone(), *scale)?;
            let r = crate::expr::to_rational(&diff)?;
            if let Some(&pole) = poles_in_domain(&r, q, &bc)?.first() {
                return Err(Error::SingularOnDomain(pole));
            }
            quad::integrate_semi_infinite(|p| evaluate(&diff, p, q, &bc), F::zero(), tol)
                .map_err(demote_pole)
        }
        Regulator::None => Err(Error::InvalidRegulator(
            "no regulator: use finite_part_direct for the pure subtracted integrand".into(),
        )),
    }
}

/// The integrand minus its order-`k` Taylor polynomial in `q` around the
/// subtraction point:
/// `e(p,q) - sum_{n=0}^{k} (1/n!) [d^n e/dq^n]_{q=q_s} (q - q_s)^n`.
pub fn taylor_subtracted_integrand<F: Real>(e: &Expr<F>, spec: &SubtractionSpec<F>) -> Expr<F> {
    let point = Expr::num(spec.point);
    let mut result = e.clone();
    let mut factorial = 1.0f64;
    for n in 0..=spec.order {
        if n > 0 {
            factorial *= n as f64;
        }
        let coeff = substitute(&differentiate(e, n), EXTERNAL_MOMENTUM, &point);
        let monomial = Expr::pow(Expr::sub(Expr::q(), point.clone()), n);
        let term = Expr::mul(
            Expr::num(F::of(1.0 / factorial)),
            Expr::mul(coeff, monomial),
        );
        result = Expr::sub(result, term);
    }
    result
}

/// Finite part by integrating the Taylor-subtracted integrand over
/// `[0, inf)`; no regulator involved.
pub fn finite_part_direct<F: Real>(
    e: &Expr<F>,
    spec: &SubtractionSpec<F>,
    q: F,
    b: &Bindings<F>,
    tol: F,
) -> Result<FinitePartResult<F>> {
    check_point(spec)?;
    check_order(e, spec)?;
    let subtracted = taylor_subtracted_integrand(e, spec);
    let r = crate::expr::to_rational(&subtracted)?;
    if let Some(&pole) = poles_in_domain(&r, q, b)?.first() {
        return Err(Error::SingularOnDomain(pole));
    }
    let quad = quad::integrate_semi_infinite(|p| evaluate(&subtracted, p, q, b), F::zero(), tol)
        .map_err(demote_pole)?;
    Ok(FinitePartResult {
        value: quad.value,
        abs_error_estimate: quad.abs_error_estimate,
        method: FiniteMethod::DirectSubtracted,
        subtraction_terms: Vec::new(),
    })
}

struct ScheduleStep<F> {
    value: F,
    quad_err: F,
    terms: Vec<(u32, F)>,
}

/// Finite part as the cut-off limit of the subtracted regularized integral.
///
/// `G(c) = I_c(q) - sum_n (1/n!) [d^n I_c/dq^n]_{q_s} (q-q_s)^n` is evaluated
/// on a doubling schedule of the regulator scale `c` (the scale stored in the
/// regulator only selects the scheme here). One Richardson step with assumed
/// leading error `O(1/c)` is applied before testing convergence of the
/// sequence. Subtraction-term integrals use the symbolic `q`-derivatives of
/// the integrand (differentiation under the integral).
pub fn finite_part_cutoff_limit<F: Real>(
    e: &Expr<F>,
    reg: &Regulator<F>,
    spec: &SubtractionSpec<F>,
    q: F,
    b: &Bindings<F>,
    tol: F,
) -> Result<FinitePartResult<F>> {
    check_point(spec)?;
    check_order(e, spec)?;
    let inner_tol = tol * F::of(0.05);

    // per-scale evaluation of G and its subtraction coefficients
    let step: Box<dyn Fn(F) -> Result<ScheduleStep<F>>> = match reg {
        Regulator::HardCutoff { .. } => {
            let r = crate::expr::to_rational(e)?;
            for &q_at in &[q, spec.point] {
                if let Some(&pole) = poles_in_domain(&r, q_at, b)?.first() {
                    return Err(Error::SingularOnDomain(pole));
                }
            }
            let derivs: Vec<Expr<F>> = (0..=spec.order)
                .map(|n| {
                    substitute(
                        &differentiate(e, n),
                        EXTERNAL_MOMENTUM,
                        &Expr::num(spec.point),
                    )
                })
                .collect();
            let e = e.clone();
            let b = b.clone();
            let (q, point) = (q, spec.point);
            Box::new(move |c: F| {
                let main = quad::integrate_finite_lenient(
                    |p| evaluate(&e, p, q, &b),
                    F::zero(),
                    c,
                    inner_tol,
                )
                .map_err(demote_pole)?;
                assemble_step(main, &derivs, q, point, |d| {
                    quad::integrate_finite_lenient(
                        |p| evaluate(d, p, q, &b),
                        F::zero(),
                        c,
                        inner_tol,
                    )
                    .map_err(demote_pole)
                })
            })
        }
        Regulator::Partner {
            family, scale_name, ..
        } => {
            let diff = Expr::sub(e.clone(), family.clone());
            let derivs: Vec<Expr<F>> = (0..=spec.order)
                .map(|n| {
                    substitute(
                        &differentiate(&diff, n),
                        EXTERNAL_MOMENTUM,
                        &Expr::num(spec.point),
                    )
                })
                .collect();
            let b = b.clone();
            let scale_name = scale_name.clone();
            let (q, point) = (q, spec.point);
            Box::new(move |c: F| {
                let bc = b.with(scale_name.clone(), c)?;
                let main = quad::integrate_semi_infinite_lenient(
                    |p| evaluate(&diff, p, q, &bc),
                    F::zero(),
                    inner_tol,
                )
                .map_err(demote_pole)?;
                assemble_step(main, &derivs, q, point, |d| {
                    quad::integrate_semi_infinite_lenient(
                        |p| evaluate(d, p, q, &bc),
                        F::zero(),
                        inner_tol,
                    )
                    .map_err(demote_pole)
                })
            })
        }
        Regulator::None => {
            return Err(Error::InvalidRegulator(
                "cut-off limit needs a hard cutoff or partner regulator".into(),
            ))
        }
    };

    let method = match reg {
        Regulator::HardCutoff { .. } => FiniteMethod::CutoffLimit,
        Regulator::Partner { .. } => FiniteMethod::PartnerLimit,
        Regulator::None => unreachable!(),
    };

    // schedule start above every scale in the problem
    let mass_scale = b.iter().fold(F::zero(), |acc, (_, v)| acc + v * v);
    let c0 = F::of(10.0) * (q.abs() + spec.point.abs() + mass_scale + F::one());

    let mut prev: Option<ScheduleStep<F>> = None;
    let mut prev_accel: Option<(F, F)> = None; // (R, combined quad error)
    let mut last_step = F::infinity();
    let mut scale = c0;
    for doubling in 0..=MAX_DOUBLINGS {
        scale = c0 * F::of(2.0).powi(doubling as i32);
        let current = step(scale)?;
        if let Some(p) = &prev {
            // Richardson: R(c) = 2 G(2c) - G(c) cancels the O(1/c) term
            let accel = F::of(2.0) * current.value - p.value;
            let accel_err = F::of(2.0) * current.quad_err + p.quad_err;
            if let Some((prev_r, _)) = prev_accel {
                last_step = (accel - prev_r).abs();
                if last_step <= tol {
                    return Ok(FinitePartResult {
                        value: accel,
                        abs_error_estimate: last_step + accel_err,
                        method,
                        subtraction_terms: current.terms,
                    });
                }
            }
            prev_accel = Some((accel, accel_err));
        }
        prev = Some(current);
    }
    Err(Error::SlowConvergence {
        scale: scale.as_f64(),
        last_step: last_step.as_f64(),
    })
}

fn assemble_step<F: Real>(
    main: QuadResult<F>,
    derivs: &[Expr<F>],
    q: F,
    point: F,
    integrate: impl Fn(&Expr<F>) -> Result<QuadResult<F>>,
) -> Result<ScheduleStep<F>> {
    let mut value = main.value;
    let mut quad_err = main.abs_error_estimate;
    let mut terms = Vec::with_capacity(derivs.len());
    let mut factorial = 1.0f64;
    for (n, d) in derivs.iter().enumerate() {
        if n > 0 {
            factorial *= n as f64;
        }
        let integral = integrate(d)?;
        let coeff = integral.value * F::of(1.0 / factorial);
        let monomial = (q - point).powi(n as i32);
        value = value - coeff * monomial;
        quad_err = quad_err + integral.abs_error_estimate * F::of(1.0 / factorial) * monomial.abs();
        terms.push((n as u32, coeff));
    }
    Ok(ScheduleStep {
        value,
        quad_err,
        terms,
    })
}

/// Per-`q` values of the three finite-part methods.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckRow<F> {
    pub q: F,
    pub direct: F,
    pub cutoff: F,
    pub partner: F,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport<F> {
    pub rows: Vec<CrossCheckRow<F>>,
    pub max_discrepancy: F,
}

/// Computes the finite part by all three methods on a `q`-grid and requires
/// pairwise agreement within `10 * tol`.
pub fn cross_regulator_check<F: Real>(
    e: &Expr<F>,
    spec: &SubtractionSpec<F>,
    q_grid: &[F],
    b: &Bindings<F>,
    tol: F,
    partner_family: &Expr<F>,
) -> Result<CrossCheckReport<F>> {
    let scale_name = infer_scale_name(e, partner_family, b)?;
    let cutoff = Regulator::hard_cutoff(F::of(1e4))?;
    let partner = Regulator::partner(e, partner_family.clone(), scale_name, F::of(1e4), b)?;
    let allowed = F::of(10.0) * tol;

    let mut rows = Vec::with_capacity(q_grid.len());
    let mut max_discrepancy = F::zero();
    for &q in q_grid {
        let direct = finite_part_direct(e, spec, q, b, tol)?;
        let cut = finite_part_cutoff_limit(e, &cutoff, spec, q, b, tol)?;
        let par = finite_part_cutoff_limit(e, &partner, spec, q, b, tol)?;
        let pairs = [
            (direct.method, direct.value, cut.method, cut.value),
            (direct.method, direct.value, par.method, par.value),
            (cut.method, cut.value, par.method, par.value),
        ];
        for (m1, v1, m2, v2) in pairs {
            let gap = (v1 - v2).abs();
            if gap > allowed {
                return Err(Error::RegulatorDisagreement {
                    q: q.as_f64(),
                    first: m1.to_string(),
                    second: m2.to_string(),
                    discrepancy: gap.as_f64(),
                });
            }
            if gap > max_discrepancy {
                max_discrepancy = gap;
            }
        }
        rows.push(CrossCheckRow {
            q,
            direct: direct.value,
            cutoff: cut.value,
            partner: par.value,
        });
    }
    Ok(CrossCheckReport {
        rows,
        max_discrepancy,
    })
}

/// The scale symbol of a partner family: the one free symbol of the family
/// that is neither a symbol of the integrand nor bound.
pub fn infer_scale_name<F: Real>(e: &Expr<F>, family: &Expr<F>, b: &Bindings<F>) -> Result<String> {
    let mut candidates = family.parameters();
    for s in e.parameters() {
        candidates.remove(&s);
    }
    let bound: Vec<String> = b.iter().map(|(k, _)| k.to_owned()).collect();
    for s in bound {
        candidates.remove(&s);
    }
    match candidates.len() {
        1 => Ok(candidates.into_iter().next().expect("one candidate")),
        0 => Err(Error::InvalidRegulator(
            "cannot infer the partner scale symbol: no free symbol left".into(),
        )),
        _ => Err(Error::InvalidRegulator(format!(
            "cannot infer the partner scale symbol: candidates {candidates:?}"
        ))),
    }
}

/// Translates a regularized value between schemes using only the
/// subtraction constants: `I'(q) = I(q) - I(0) + I'(0)`.
pub fn scheme_translation<F: Real>(i_reg_q: F, i_reg_0: F, i_regprime_0: F) -> F {
    i_reg_q - i_reg_0 + i_regprime_0
}

/// Classification of a configuration under a parameter sign flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymmetryOutcome {
    Invariant,
    NonInvariant,
    IllDefined,
}

/// Result of [`symmetry_check`]: the regularized value and the subtraction
/// constants are classified separately (they agree for sane schemes).
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport<F> {
    pub outcome: SymmetryOutcome,
    pub value: F,
    pub flipped_value: Option<F>,
    /// Poles the flipped configuration develops on the integration domain.
    pub flipped_poles: Vec<f64>,
    pub subtraction_outcome: SymmetryOutcome,
    pub subtraction_terms: Vec<(u32, F)>,
    pub flipped_subtraction_terms: Option<Vec<(u32, F)>>,
}

/// Compares the regularized value at `param` and `-param`.
///
/// `IllDefined` is a first-class outcome: when the flipped configuration has
/// a pole on the integration domain the scheme silently leaves its domain of
/// validity, and the tool reports the pole instead of a garbage number.
pub fn symmetry_check<F: Real>(
    e: &Expr<F>,
    param: &str,
    reg: &Regulator<F>,
    q: F,
    b: &Bindings<F>,
    tol: F,
) -> Result<SymmetryReport<F>> {
    let v = b
        .get(param)
        .ok_or_else(|| Error::UnboundSymbol(param.to_owned()))?;
    let flipped = b.with(param, -v)?;

    // integrand whose poles decide well-definedness, and the domain cut
    let (config, domain_cap): (Expr<F>, Option<F>) = match reg {
        Regulator::HardCutoff { lambda } => (e.clone(), Some(*lambda)),
        Regulator::Partner {
            family,
            scale_name,
            scale,
        } => (
            substitute(
                &Expr::sub(e.clone(), family.clone()),
                scale_name,
                &Expr::num(*scale),
            ),
            None,
        ),
        Regulator::None => {
            return Err(Error::InvalidRegulator(
                "symmetry check needs a regularization scheme".into(),
            ))
        }
    };
    let rc = crate::expr::to_rational(&config)?;
    let in_domain = |poles: Vec<f64>| -> Vec<f64> {
        match domain_cap {
            Some(cap) => poles
                .into_iter()
                .filter(|&x| x <= cap.as_f64() + 1e-9)
                .collect(),
            None => poles,
        }
    };
    let mut flipped_poles = in_domain(poles_in_domain(&rc, q, &flipped)?);
    for extra in in_domain(poles_in_domain(&rc, F::zero(), &flipped)?) {
        if !flipped_poles.iter().any(|&x| (x - extra).abs() <= 1e-6) {
            flipped_poles.push(extra);
        }
    }
    flipped_poles.sort_by(f64::total_cmp);

    let value = regularized_value(e, reg, q, b, tol)?.value;
    let order = sdd(&crate::expr::to_rational(e)?).max(0) as u32;
    let terms = subtraction_constants(e, reg, order, b, tol)?;

    if !flipped_poles.is_empty() {
        return Ok(SymmetryReport {
            outcome: SymmetryOutcome::IllDefined,
            value,
            flipped_value: None,
            flipped_poles,
            subtraction_outcome: SymmetryOutcome::IllDefined,
            subtraction_terms: terms,
            flipped_subtraction_terms: None,
        });
    }

    let flipped_value = regularized_value(e, reg, q, &flipped, tol)?.value;
    let outcome = if (value - flipped_value).abs() <= tol {
        SymmetryOutcome::Invariant
    } else {
        SymmetryOutcome::NonInvariant
    };
    let flipped_terms = subtraction_constants(e, reg, order, &flipped, tol)?;
    let sub_invariant = terms
        .iter()
        .zip(&flipped_terms)
        .all(|((_, a), (_, b))| (*a - *b).abs() <= tol);
    Ok(SymmetryReport {
        outcome,
        value,
        flipped_value: Some(flipped_value),
        flipped_poles,
        subtraction_outcome: if sub_invariant {
            SymmetryOutcome::Invariant
        } else {
            SymmetryOutcome::NonInvariant
        },
        subtraction_terms: terms,
        flipped_subtraction_terms: Some(flipped_terms),
    })
}

/// Subtraction-polynomial coefficients `(1/n!) d^n I^Reg/dq^n |_{q_s=0}` at
/// the regulator's stored scale.
fn subtraction_constants<F: Real>(
    e: &Expr<F>,
    reg: &Regulator<F>,
    order: u32,
    b: &Bindings<F>,
    tol: F,
) -> Result<Vec<(u32, F)>> {
    let mut terms = Vec::with_capacity(order as usize + 1);
    let mut factorial = 1.0f64;
    for n in 0..=order {
        if n > 0 {
            factorial *= n as f64;
        }
        let dn = substitute(
            &differentiate(e, n),
            EXTERNAL_MOMENTUM,
            &Expr::num(F::zero()),
        );
        let value = match reg {
            Regulator::HardCutoff { lambda } => {
                quad::integrate_finite(|p| evaluate(&dn, p, F::zero(), b), F::zero(), *lambda, tol)
                    .map_err(demote_pole)?
                    .value
            }
            Regulator::Partner {
                family,
                scale_name,
                scale,
            } => {
                let dfam = substitute(
                    &differentiate(family, n),
                    EXTERNAL_MOMENTUM,
                    &Expr::num(F::zero()),
                );
                let diff = Expr::sub(dn.clone(), dfam);
                let bc = b.with(scale_name.clone(), *scale)?;
                quad::integrate_semi_infinite(
                    |p| evaluate(&diff, p, F::zero(), &bc),
                    F::zero(),
                    tol,
                )
                .map_err(demote_pole)?
                .value
            }
            Regulator::None => unreachable!("callers reject Regulator::None"),
        };
        terms.push((n, value * F::of(1.0 / factorial)));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    fn log_divergent() -> Expr<f64> {
        parse("1/(p+q+m^2)").unwrap()
    }

    fn bind_m(m: f64) -> Bindings<f64> {
        Bindings::from_pairs([("m", m)]).unwrap()
    }

    #[test]
    fn cutoff_value_matches_closed_form() {
        // int_0^10 dp/(p+2) = ln[(Lambda+q+m^2)/(q+m^2)] = ln 6
        let reg = Regulator::hard_cutoff(10.0).unwrap();
        let r = regularized_value(&log_divergent(), &reg, 1.0, &bind_m(1.0), TOL).unwrap();
        assert!((r.value - 6f64.ln()).abs() <= 1e-10, "{}", r.value);
    }

    #[test]
    fn partner_value_matches_closed_form() {
        // ln[(q+mM)/(q+m^2)] = ln(101/2) = ln 50.5
        let b = bind_m(1.0);
        let reg = Regulator::default_partner(&log_divergent(), 100.0, &b).unwrap();
        let r = regularized_value(&log_divergent(), &reg, 1.0, &b, TOL).unwrap();
        assert!((r.value - 50.5f64.ln()).abs() <= 1e-9, "{}", r.value);
    }

    #[test]
    fn cutoff_is_invariant_under_mass_flip() {
        let reg = Regulator::hard_cutoff(10.0).unwrap();
        let plus = regularized_value(&log_divergent(), &reg, 1.0, &bind_m(1.0), TOL).unwrap();
        let minus = regularized_value(&log_divergent(), &reg, 1.0, &bind_m(-1.0), TOL).unwrap();
        assert_eq!(plus.value, minus.value);
    }

    #[test]
    fn missing_regulator_rejected() {
        let err = regularized_value(&log_divergent(), &Regulator::None, 1.0, &bind_m(1.0), TOL)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidRegulator(_)));
    }

    #[test]
    fn non_regulating_family_rejected_at_construction() {
        // 1/(p+q+m*M)^2 decays too fast to cancel the leading behaviour
        let family: Expr<f64> = parse("1/(p+q+m*M)^2").unwrap();
        let err =
            Regulator::partner(&log_divergent(), family, "M", 100.0, &bind_m(1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidRegulator(_)));
    }

    #[test]
    fn taylor_subtraction_order_zero_structure() {
        let spec = SubtractionSpec::new(0, 0.0);
        let subtracted = taylor_subtracted_integrand(&log_divergent(), &spec);
        assert_eq!(subtracted, parse("1/(p+q+m^2)-1/(p+m^2)").unwrap());
    }

    #[test]
    fn subtracted_integrand_vanishes_at_subtraction_point() {
        let b = bind_m(1.0);
        for q_s in [0.0, 0.7, 2.0] {
            let spec = SubtractionSpec::new(0, q_s);
            let subtracted = taylor_subtracted_integrand(&log_divergent(), &spec);
            for p in [0.0, 1.0, 5.0] {
                let v = evaluate(&subtracted, p, q_s, &b).unwrap();
                assert!(v.abs() <= 1e-15, "residual {v} at p={p}, q_s={q_s}");
            }
        }
    }

    #[test]
    fn taylor_subtraction_order_one() {
        // p/(p+q+m^2) with k=1, q_s=0 -> p/(p+q+m^2) - p/(p+m^2) + p q/(p+m^2)^2
        let e: Expr<f64> = parse("p/(p+q+m^2)").unwrap();
        let spec = SubtractionSpec::new(1, 0.0);
        let subtracted = taylor_subtracted_integrand(&e, &spec);
        let expected: Expr<f64> = parse("p/(p+q+m^2)-p/(p+m^2)+p*q/(p+m^2)^2").unwrap();
        let b = bind_m(1.0);
        for (p, q) in [(0.5, 0.25), (1.0, 1.0), (3.0, 2.0), (10.0, 0.1)] {
            let got = evaluate(&subtracted, p, q, &b).unwrap();
            let want = evaluate(&expected, p, q, &b).unwrap();
            assert!((got - want).abs() <= 1e-13, "({p},{q}): {got} vs {want}");
        }
        // degree drops by k+1 = 2: omega goes from 1 to -1
        let r = crate::expr::to_rational(&subtracted).unwrap();
        assert_eq!(sdd(&r), -1);
        // first-order coefficient against finite differences of the integrand
        let d1 = substitute(
            &differentiate(&e, 1),
            EXTERNAL_MOMENTUM,
            &Expr::num(0.0_f64),
        );
        let h = 1e-5;
        for p in [0.5, 2.0] {
            let fd =
                (evaluate(&e, p, h, &b).unwrap() - evaluate(&e, p, -h, &b).unwrap()) / (2.0 * h);
            let sym = evaluate(&d1, p, 0.0, &b).unwrap();
            assert!((fd - sym).abs() <= 1e-8, "{fd} vs {sym}");
        }
    }

    #[test]
    fn direct_finite_part_matches_closed_form() {
        // I~(q) = ln[m^2/(q+m^2)] = ln(1/2) at q=1, m=1
        let spec = SubtractionSpec::new(0, 0.0);
        let b = bind_m(1.0);
        let r = finite_part_direct(&log_divergent(), &spec, 1.0, &b, TOL).unwrap();
        assert!((r.value - 0.5f64.ln()).abs() <= 1e-10, "{}", r.value);
        assert_eq!(r.method, FiniteMethod::DirectSubtracted);
        // vanishes when evaluated at the subtraction point
        let r0 = finite_part_direct(&log_divergent(), &spec, 0.0, &b, TOL).unwrap();
        assert!(r0.value.abs() <= 1e-12);
        let spec1 = SubtractionSpec::new(0, 1.0);
        let r1 = finite_part_direct(&log_divergent(), &spec1, 1.0, &b, TOL).unwrap();
        assert!(r1.value.abs() <= 1e-12);
    }

    #[test]
    fn cutoff_limit_matches_closed_form() {
        let spec = SubtractionSpec::new(0, 0.0);
        let b = bind_m(1.0);
        let reg = Regulator::hard_cutoff(10.0).unwrap();
        let r = finite_part_cutoff_limit(&log_divergent(), &reg, &spec, 1.0, &b, TOL).unwrap();
        assert!((r.value - 0.5f64.ln()).abs() <= 1e-9, "{}", r.value);
        assert_eq!(r.method, FiniteMethod::CutoffLimit);
        assert_eq!(r.subtraction_terms.len(), 1);
    }

    #[test]
    fn partner_limit_matches_closed_form() {
        let spec = SubtractionSpec::new(0, 0.0);
        let b = bind_m(1.0);
        let reg = Regulator::default_partner(&log_divergent(), 100.0, &b).unwrap();
        let r = finite_part_cutoff_limit(&log_divergent(), &reg, &spec, 1.0, &b, TOL).unwrap();
        assert!((r.value - 0.5f64.ln()).abs() <= 1e-9, "{}", r.value);
        assert_eq!(r.method, FiniteMethod::PartnerLimit);
    }

    #[test]
    fn cutoff_limit_with_nonzero_subtraction_point() {
        // I~(q, q_s) = ln[(q_s+m^2)/(q+m^2)] = ln(2/3) at q=2, q_s=1, m=1
        let spec = SubtractionSpec::new(0, 1.0);
        let b = bind_m(1.0);
        let reg = Regulator::hard_cutoff(10.0).unwrap();
        let r = finite_part_cutoff_limit(&log_divergent(), &reg, &spec, 2.0, &b, TOL).unwrap();
        let truth = (2.0f64 / 3.0).ln();
        assert!((r.value - truth).abs() <= 1e-9, "{} vs {truth}", r.value);
        let direct = finite_part_direct(&log_divergent(), &spec, 2.0, &b, TOL).unwrap();
        assert!((direct.value - truth).abs() <= 1e-9, "{}", direct.value);
    }

    #[test]
    fn linearly_divergent_case_with_first_order_subtraction() {
        // K~(q) = (q+m^2) ln(q+m^2) - m^2 ln m^2 - q (1 + ln m^2)
        //       = 2 ln 2 - 1 at q = 1, m = 1
        let e: Expr<f64> = parse("p/(p+q+m^2)").unwrap();
        let spec = SubtractionSpec::new(1, 0.0);
        let b = bind_m(1.0);
        let oracle = 2.0 * 2f64.ln() - 1.0;

        let direct = finite_part_direct(&e, &spec, 1.0, &b, 1e-10).unwrap();
        assert!((direct.value - oracle).abs() <= 1e-9, "{}", direct.value);

        let reg = Regulator::hard_cutoff(10.0).unwrap();
        let limit = finite_part_cutoff_limit(&e, &reg, &spec, 1.0, &b, 1e-8).unwrap();
        assert!((limit.value - oracle).abs() <= 1e-7, "{}", limit.value);
    }

    #[test]
    fn insufficient_order_rejected() {
        let e: Expr<f64> = parse("p/(p+q+m^2)").unwrap();
        let spec = SubtractionSpec::new(0, 0.0);
        let err = finite_part_direct(&e, &spec, 1.0, &bind_m(1.0), TOL).unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientOrder {
                required: 1,
                got: 0
            }
        );
    }

    #[test]
    fn scheme_translation_examples() {
        // cutoff(1e8) -> partner(1e8) at q=1, m=1, via the closed forms
        let (q, m2): (f64, f64) = (1.0, 1.0);
        let scale = 1e8;
        let i_cut_q = ((scale + q + m2) / (q + m2)).ln();
        let i_cut_0 = ((scale + m2) / m2).ln();
        let i_par_0 = (scale / m2).ln(); // ln[(0+mM)/(0+m^2)]
        let translated = scheme_translation(i_cut_q, i_cut_0, i_par_0);
        let direct = ((q + scale) / (q + m2)).ln();
        assert!(
            (translated - direct).abs() <= 1e-6,
            "{translated} vs {direct}"
        );
        // q at the subtraction point
        assert_eq!(scheme_translation(3.5, 3.5, 7.0), 7.0);
        // translating a scheme to itself
        assert_eq!(scheme_translation(2.25, 0.5, 0.5), 2.25);
    }

    #[test]
    fn hard_cutoff_symmetric_under_mass_flip() {
        let b = bind_m(1.0);
        let reg = Regulator::hard_cutoff(10.0).unwrap();
        let report = symmetry_check(&log_divergent(), "m", &reg, 1.0, &b, 1e-10).unwrap();
        assert_eq!(report.outcome, SymmetryOutcome::Invariant);
        assert_eq!(report.subtraction_outcome, SymmetryOutcome::Invariant);
        assert!(report.flipped_poles.is_empty());
    }

    #[test]
    fn partner_scheme_ill_defined_under_mass_flip() {
        let b = bind_m(1.0);
        let reg = Regulator::default_partner(&log_divergent(), 100.0, &b).unwrap();
        let report = symmetry_check(&log_divergent(), "m", &reg, 1.0, &b, 1e-10).unwrap();
        assert_eq!(report.outcome, SymmetryOutcome::IllDefined);
        assert_eq!(report.subtraction_outcome, SymmetryOutcome::IllDefined);
        // partner denominator p + q + mM flips to a pole at p = mM - q = 99
        assert!(
            report
                .flipped_poles
                .iter()
                .any(|&x| (x - 99.0).abs() <= 1e-6),
            "poles {:?}",
            report.flipped_poles
        );
        assert!(report.flipped_value.is_none());
    }

    #[test]
    fn even_integrand_invariant_in_even_schemes() {
        let e: Expr<f64> = parse("1/(p+q+m^4)").unwrap();
        let b = bind_m(1.2);
        let cutoff = Regulator::hard_cutoff(50.0).unwrap();
        let report = symmetry_check(&e, "m", &cutoff, 1.0, &b, 1e-10).unwrap();
        assert_eq!(report.outcome, SymmetryOutcome::Invariant);
        let family: Expr<f64> = parse("1/(p+q+m^2*M)").unwrap();
        let partner = Regulator::partner(&e, family, "M", 100.0, &b).unwrap();
        let report = symmetry_check(&e, "m", &partner, 1.0, &b, 1e-10).unwrap();
        assert_eq!(report.outcome, SymmetryOutcome::Invariant);
        assert_eq!(report.subtraction_outcome, SymmetryOutcome::Invariant);
    }

    #[test]
    fn cross_check_at_subtraction_point_only() {
        let spec = SubtractionSpec::new(0, 0.0);
        let b = bind_m(1.0);
        let family: Expr<f64> = parse(DEFAULT_PARTNER_FAMILY).unwrap();
        let report =
            cross_regulator_check(&log_divergent(), &spec, &[0.0], &b, 1e-9, &family).unwrap();
        assert!(report.max_discrepancy <= 1e-9);
    }

    #[test]
    fn scale_name_inference() {
        let family: Expr<f64> = parse(DEFAULT_PARTNER_FAMILY).unwrap();
        let name = infer_scale_name(&log_divergent(), &family, &bind_m(1.0)).unwrap();
        assert_eq!(name, "M");
    }
}
