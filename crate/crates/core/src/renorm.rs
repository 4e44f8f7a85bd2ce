//! Additive and multiplicative renormalization, subtraction-point shifts
//! and running parameters.
//!
//! Models are parameterized by the *renormalized* values at the reference
//! subtraction point `q_s = 0`; bare parameters are derived, regulator-scale
//! dependent outputs ([`running_bare_additive`], [`running_bare_multiplicative`]).
//! Moving the subtraction point induces the finite renormalization
//! [`delta`], and the running of `mu_R`, `g_R` is anchored so that the
//! reference values are reproduced at `q_s = 0`.

use serde::Serialize;

use crate::divergence::sdd;
use crate::error::{Error, Result};
use crate::expr::{to_rational, Bindings, Expr};
use crate::regfin::{finite_part_direct, regularized_value, Regulator, SubtractionSpec};
use crate::scalar::Real;

/// Coupling magnitude above which the perturbative premise is shaky.
pub const PERTURBATIVE_LIMIT: f64 = 0.3;

/// Quantity entering an observable as `E = mu_0 + I(q)` (mass-like).
#[derive(Debug, Clone)]
pub struct AdditiveModel<F> {
    /// Renormalized parameter at the reference point `q_s = 0`.
    pub mu_r: F,
    pub integrand: Expr<F>,
    pub bindings: Bindings<F>,
    /// Subtraction order, `max(omega, 0)` by default.
    pub order: u32,
}

impl<F: Real> AdditiveModel<F> {
    pub fn new(mu_r: F, integrand: Expr<F>, bindings: Bindings<F>) -> Result<Self> {
        if !mu_r.is_finite() {
            return Err(Error::InvalidConfig("mu_R must be finite".into()));
        }
        let order = default_order(&integrand)?;
        Ok(AdditiveModel {
            mu_r,
            integrand,
            bindings,
            order,
        })
    }
}

/// Quantity entering an observable as `E' = g_0 (1 + g_0 I(q))` (coupling-like).
#[derive(Debug, Clone)]
pub struct MultiplicativeModel<F> {
    /// Renormalized coupling at the reference point `q_s = 0`.
    pub g_r: F,
    pub integrand: Expr<F>,
    pub bindings: Bindings<F>,
    pub order: u32,
}

impl<F: Real> MultiplicativeModel<F> {
    pub fn new(g_r: F, integrand: Expr<F>, bindings: Bindings<F>) -> Result<Self> {
        if !g_r.is_finite() {
            return Err(Error::InvalidConfig("g_R must be finite".into()));
        }
        let order = default_order(&integrand)?;
        Ok(MultiplicativeModel {
            g_r,
            integrand,
            bindings,
            order,
        })
    }

    /// Whether `|g_R|` is small enough for the first-order formulas.
    pub fn is_perturbative(&self) -> bool {
        self.g_r.abs().as_f64() < PERTURBATIVE_LIMIT
    }
}

fn default_order<F: Real>(integrand: &Expr<F>) -> Result<u32> {
    Ok(sdd(&to_rational(integrand)?).max(0) as u32)
}

/// One row of a subtraction-point sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RGFlowRow<F> {
    pub q_s: F,
    pub delta: F,
    pub mu_r: F,
    pub g_r: F,
}

/// Rows of `(q_s, Delta(0,q_s), mu_R(q_s), g_R(q_s))`, `q_s` ascending.
#[derive(Debug, Clone, Serialize)]
pub struct RGFlowTable<F> {
    pub rows: Vec<RGFlowRow<F>>,
}

/// Finite renormalization induced by moving the subtraction point:
/// `delta(a, b) = lim [I^Reg(a) - I^Reg(b)]`, computed regulator-free via
/// the subtracted integrand. `delta(0, q_s)` is the shift entering the
/// running formulas.
pub fn delta<F: Real>(
    e: &Expr<F>,
    order: u32,
    b: &Bindings<F>,
    q_s1: F,
    q_s2: F,
    tol: F,
) -> Result<F> {
    let spec = SubtractionSpec::new(order, q_s2);
    Ok(finite_part_direct(e, &spec, q_s1, b, tol)?.value)
}

/// `mu_R(q_s) = mu_R(0) - delta(0, q_s)` (anchoring constant fixed to 0).
pub fn running_mu<F: Real>(model: &AdditiveModel<F>, q_s: F, tol: F) -> Result<F> {
    let shift = delta(
        &model.integrand,
        model.order,
        &model.bindings,
        F::zero(),
        q_s,
        tol,
    )?;
    Ok(model.mu_r - shift)
}

/// `g_R(q_s) = g_R(0) [1 - g_R(0) delta(0, q_s)]`, first order in `g_R`.
pub fn running_g<F: Real>(model: &MultiplicativeModel<F>, q_s: F, tol: F) -> Result<F> {
    let shift = delta(
        &model.integrand,
        model.order,
        &model.bindings,
        F::zero(),
        q_s,
        tol,
    )?;
    let loss = (model.g_r * shift).abs().as_f64();
    if loss > 0.5 {
        return Err(Error::PerturbativityWarning(loss));
    }
    Ok(model.g_r * (F::one() - model.g_r * shift))
}

/// Observable `E = mu_R(q_s) + I~(q, q_s)`; independent of `q_s` by
/// construction.
pub fn observable_additive<F: Real>(model: &AdditiveModel<F>, q: F, q_s: F, tol: F) -> Result<F> {
    let spec = SubtractionSpec::new(model.order, q_s);
    let finite = finite_part_direct(&model.integrand, &spec, q, &model.bindings, tol)?;
    Ok(running_mu(model, q_s, tol)? + finite.value)
}

/// Observable `E' = g(q_s) [1 + g(q_s) I~(q, q_s)]` with `g = running_g`;
/// independent of `q_s` up to `O(g^3)`.
pub fn observable_multiplicative<F: Real>(
    model: &MultiplicativeModel<F>,
    q: F,
    q_s: F,
    tol: F,
) -> Result<F> {
    let spec = SubtractionSpec::new(model.order, q_s);
    let finite = finite_part_direct(&model.integrand, &spec, q, &model.bindings, tol)?;
    let g = running_g(model, q_s, tol)?;
    Ok(g * (F::one() + g * finite.value))
}

/// Bare parameter at finite regulator scale: `mu_0 = mu_R(q_s) - I^Reg(q_s)`.
/// Diverges in the cut-off limit while observables stay fixed.
pub fn running_bare_additive<F: Real>(
    model: &AdditiveModel<F>,
    reg: &Regulator<F>,
    q_s: F,
    tol: F,
) -> Result<F> {
    let reg_value = regularized_value(&model.integrand, reg, q_s, &model.bindings, tol)?.value;
    Ok(running_mu(model, q_s, tol)? - reg_value)
}

/// Bare coupling at finite regulator scale, first order in `g_R`:
/// `g_0 = g_R(q_s) [1 - g_R(q_s) I^Reg(q_s)]`.
pub fn running_bare_multiplicative<F: Real>(
    model: &MultiplicativeModel<F>,
    reg: &Regulator<F>,
    q_s: F,
    tol: F,
) -> Result<F> {
    let reg_value = regularized_value(&model.integrand, reg, q_s, &model.bindings, tol)?.value;
    let g = running_g(model, q_s, tol)?;
    Ok(g * (F::one() - g * reg_value))
}

fn check_grid<F: Real>(grid: &[F], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return Err(Error::InvalidConfig(format!(
            "grid needs at least {min_len} points"
        )));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig(
            "grid must be strictly increasing".into(),
        ));
    }
    if grid.iter().any(|&x| x < F::zero()) {
        return Err(Error::InvalidConfig("grid points must be >= 0".into()));
    }
    Ok(())
}

/// Max over interior grid points of the central finite difference of the
/// observable with respect to the subtraction point. Zero up to quadrature
/// noise for additive models, `O(g_R^3)` for multiplicative ones.
pub fn rg_residual_additive<F: Real>(
    model: &AdditiveModel<F>,
    q: F,
    q_s_grid: &[F],
    tol: F,
) -> Result<F> {
    check_grid(q_s_grid, 3)?;
    max_central_difference(q_s_grid, |q_s| observable_additive(model, q, q_s, tol))
}

/// Multiplicative counterpart of [`rg_residual_additive`].
pub fn rg_residual_multiplicative<F: Real>(
    model: &MultiplicativeModel<F>,
    q: F,
    q_s_grid: &[F],
    tol: F,
) -> Result<F> {
    check_grid(q_s_grid, 3)?;
    max_central_difference(q_s_grid, |q_s| {
        observable_multiplicative(model, q, q_s, tol)
    })
}

fn max_central_difference<F: Real>(grid: &[F], observable: impl Fn(F) -> Result<F>) -> Result<F> {
    let values: Vec<F> = grid.iter().map(|&x| observable(x)).collect::<Result<_>>()?;
    let mut worst = F::zero();
    for i in 1..grid.len() - 1 {
        let slope = (values[i + 1] - values[i - 1]) / (grid[i + 1] - grid[i - 1]);
        if slope.abs() > worst {
            worst = slope.abs();
        }
    }
    Ok(worst)
}

/// Sweeps the subtraction point and tabulates the finite renormalization
/// and both running parameters. The two models share the integrand context.
pub fn rg_flow<F: Real>(
    additive: &AdditiveModel<F>,
    multiplicative: &MultiplicativeModel<F>,
    q_s_grid: &[F],
    tol: F,
) -> Result<RGFlowTable<F>> {
    check_grid(q_s_grid, 1)?;
    let mut rows = Vec::with_capacity(q_s_grid.len());
    for &q_s in q_s_grid {
        let shift = delta(
            &additive.integrand,
            additive.order,
            &additive.bindings,
            F::zero(),
            q_s,
            tol,
        )?;
        rows.push(RGFlowRow {
            q_s,
            delta: shift,
            mu_r: additive.mu_r - shift,
            g_r: running_g(multiplicative, q_s, tol)?,
        });
    }
    Ok(RGFlowTable { rows })
}
