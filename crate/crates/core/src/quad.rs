//! Adaptive quadrature on finite intervals and on `[a, inf)`.
//!
//! Finite intervals use a 15-point Gauss-Kronrod pair with global adaptive
//! bisection of the worst segment. Half-line integrals go through the
//! compactifying substitution `p = a + t/(1-t)`, `t in [0,1)`, with Jacobian
//! `1/(1-t)^2`; the Kronrod nodes are interior, so the singular endpoint
//! `t = 1` is never evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Bisection budget for one integral.
pub const MAX_SUBDIVISIONS: usize = 4096;

/// Value, error estimate and effort of one quadrature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadResult<F> {
    pub value: F,
    pub abs_error_estimate: F,
    pub subdivisions: usize,
}

// 15-point Kronrod abscissae (positive half), embedded 7-point Gauss weights
// and 15-point Kronrod weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

struct Segment<F> {
    a: F,
    b: F,
    value: F,
    err: F,
}

impl<F: Real> PartialEq for Segment<F> {
    fn eq(&self, other: &Self) -> bool {
        self.err.as_f64() == other.err.as_f64()
    }
}
impl<F: Real> Eq for Segment<F> {}
impl<F: Real> PartialOrd for Segment<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: Real> Ord for Segment<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.as_f64().total_cmp(&other.err.as_f64())
    }
}

fn eval_checked<F: Real>(f: &impl Fn(F) -> Result<F>, x: F) -> Result<F> {
    match f(x) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::PoleOnInterval(x.as_f64())),
        Err(Error::DivisionByZero { p, .. }) => Err(Error::PoleOnInterval(p)),
        Err(e) => Err(e),
    }
}

/// One Gauss-Kronrod 15-point pass over `[a, b]`, returning the Kronrod
/// value and a rescaled error estimate (GSL-style).
fn gk15<F: Real>(f: &impl Fn(F) -> Result<F>, a: F, b: F) -> Result<(F, F)> {
    let half = F::of(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);

    let f_center = eval_checked(f, center)?;
    let mut res_gauss = f_center * F::of(WG[3]);
    let mut res_kronrod = f_center * F::of(WGK[7]);
    let mut res_abs = res_kronrod.abs();
    let mut values = [F::zero(); 15];
    values[14] = f_center;

    for j in 0..7 {
        let abscissa = half_len * F::of(XGK[j]);
        let f1 = eval_checked(f, center - abscissa)?;
        let f2 = eval_checked(f, center + abscissa)?;
        values[2 * j] = f1;
        values[2 * j + 1] = f2;
        let fsum = f1 + f2;
        if j % 2 != 0 {
            res_gauss = res_gauss + F::of(WG[j / 2]) * fsum;
        }
        res_kronrod = res_kronrod + F::of(WGK[j]) * fsum;
        res_abs = res_abs + F::of(WGK[j]) * (f1.abs() + f2.abs());
    }

    let mean = res_kronrod * half;
    let mut res_asc = F::of(WGK[7]) * (f_center - mean).abs();
    for j in 0..7 {
        res_asc = res_asc
            + F::of(WGK[j]) * ((values[2 * j] - mean).abs() + (values[2 * j + 1] - mean).abs());
    }

    let raw_err = ((res_kronrod - res_gauss) * half_len).abs();
    res_abs = res_abs * half_len.abs();
    res_asc = res_asc * half_len.abs();

    let mut err = raw_err;
    if res_asc != F::zero() && err != F::zero() {
        let scale = (F::of(200.0) * err / res_asc).powf(F::of(1.5));
        err = if scale < F::one() {
            res_asc * scale
        } else {
            res_asc
        };
    }
    let floor = F::of(50.0) * F::epsilon() * res_abs;
    if floor > err {
        err = floor;
    }

    Ok((res_kronrod * half_len, err))
}

fn adaptive<F: Real>(
    f: &impl Fn(F) -> Result<F>,
    a: F,
    b: F,
    tol: F,
    lenient: bool,
) -> Result<QuadResult<F>> {
    let (value, err) = gk15(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let mut total_err = err;
    let mut subdivisions = 0usize;

    while total_err > tol {
        if subdivisions >= MAX_SUBDIVISIONS {
            if lenient {
                break;
            }
            return Err(Error::MaxSubdivisions {
                tol: tol.as_f64(),
                subdivisions,
                error: total_err.as_f64(),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = F::of(0.5) * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; keep its estimate
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid)?;
        let (v2, e2) = gk15(f, mid, worst.b)?;
        total_err = total_err - worst.err + e1 + e2;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        subdivisions += 1;
    }

    // final sums over the partition, largest segments first for stability
    let segments = heap.into_sorted_vec();
    let mut value = F::zero();
    let mut err = F::zero();
    for s in segments.iter().rev() {
        value = value + s.value;
        err = err + s.err;
    }
    Ok(QuadResult {
        value,
        abs_error_estimate: err,
        subdivisions,
    })
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_finite<F: Real>(
    f: impl Fn(F) -> Result<F>,
    a: F,
    b: F,
    tol: F,
) -> Result<QuadResult<F>> {
    if !(tol > F::zero()) || !tol.is_finite() {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    if !(a <= b) {
        return Err(Error::InvalidConfig("interval must satisfy a <= b".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: F::zero(),
            abs_error_estimate: F::zero(),
            subdivisions: 0,
        });
    }
    adaptive(&f, a, b, tol, false)
}

/// Like [`integrate_finite`], but when the subdivision budget runs out the
/// partial result is returned with its (then above-tolerance) error estimate
/// instead of failing. Used by scale schedules that tolerate noisy steps.
pub(crate) fn integrate_finite_lenient<F: Real>(
    f: impl Fn(F) -> Result<F>,
    a: F,
    b: F,
    tol: F,
) -> Result<QuadResult<F>> {
    if a == b {
        return Ok(QuadResult {
            value: F::zero(),
            abs_error_estimate: F::zero(),
            subdivisions: 0,
        });
    }
    adaptive(&f, a, b, tol, true)
}

/// Integrates `f` over `[a, inf)` to absolute tolerance `tol`.
///
/// Decay of the mapped integrand is probed near `t = 1` first; a tail that
/// neither falls below `tol` nor decays like a negative power means the
/// improper integral does not exist and is reported as [`Error::NonConvergent`].
pub fn integrate_semi_infinite<F: Real>(
    f: impl Fn(F) -> Result<F>,
    a: F,
    tol: F,
) -> Result<QuadResult<F>> {
    semi_infinite(f, a, tol, false)
}

/// Best-effort variant of [`integrate_semi_infinite`]; see
/// [`integrate_finite_lenient`].
pub(crate) fn integrate_semi_infinite_lenient<F: Real>(
    f: impl Fn(F) -> Result<F>,
    a: F,
    tol: F,
) -> Result<QuadResult<F>> {
    semi_infinite(f, a, tol, true)
}

fn semi_infinite<F: Real>(
    f: impl Fn(F) -> Result<F>,
    a: F,
    tol: F,
    lenient: bool,
) -> Result<QuadResult<F>> {
    if !(tol > F::zero()) || !tol.is_finite() {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidConfig("lower limit must be finite".into()));
    }
    let g = |t: F| -> Result<F> {
        let one_minus = F::one() - t;
        let p = a + t / one_minus;
        match f(p) {
            Ok(v) if v.is_finite() => Ok(v / (one_minus * one_minus)),
            Ok(_) => Err(Error::PoleOnInterval(p.as_f64())),
            Err(e) => Err(e),
        }
    };

    // Tail probe at t = 1 - 10^-k, estimate of the remaining integral is
    // |g(t)| * (1 - t). The probe depth respects the scalar resolution:
    // 1 - eps must stay representable below one.
    let min_eps = (8.0 * F::epsilon().as_f64()).max(1e-13);
    let mut tails = Vec::new();
    let mut span = 0.0;
    for k in 4..=13u32 {
        let eps = 10f64.powi(-(k as i32));
        if eps < min_eps {
            break;
        }
        span = (k - 4) as f64;
        let t = F::of(1.0 - eps);
        let gv = eval_checked(&g, t).map_err(|e| match e {
            Error::PoleOnInterval(_) => Error::NonConvergent {
                tail: f64::INFINITY,
                tol: tol.as_f64(),
            },
            other => other,
        })?;
        tails.push(gv.abs().as_f64() * eps);
    }
    let last = *tails.last().expect("nonempty");
    let first = tails[0];
    let decay_exponent = (first.max(1e-300).log10() - last.max(1e-300).log10()) / span.max(1.0);
    let converges = last <= tol.as_f64() || (last < first && decay_exponent >= 0.5);
    if !converges {
        return Err(Error::NonConvergent {
            tail: last,
            tol: tol.as_f64(),
        });
    }

    adaptive(&g, F::zero(), F::one(), tol, lenient)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(x: f64) -> Result<f64> {
        Ok(x)
    }

    #[test]
    fn finite_interval_log_integrand() {
        // int_0^10 dp/(p+2) = ln 6
        let r = integrate_finite(|p| ok(1.0 / (p + 2.0)), 0.0, 10.0, 1e-10).unwrap();
        assert!((r.value - 6f64.ln()).abs() <= 1e-10, "{}", r.value);
        assert!(r.abs_error_estimate >= (r.value - 6f64.ln()).abs());
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = integrate_finite(|p| ok(1.0 / (p + 2.0)), 0.0, 0.0, 1e-10).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn pole_inside_interval_detected() {
        let f = |p: f64| {
            let d = p - 0.5;
            if d == 0.0 {
                Err(Error::DivisionByZero { p, q: 0.0 })
            } else {
                Ok(1.0 / d)
            }
        };
        let err = integrate_finite(f, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(
            err,
            Error::PoleOnInterval(_) | Error::MaxSubdivisions { .. }
        ));
    }

    #[test]
    fn semi_infinite_inverse_square() {
        // int_0^inf dp/(p+2)^2 = 1/2
        let r = integrate_semi_infinite(|p| ok(1.0 / ((p + 2.0) * (p + 2.0))), 0.0, 1e-10).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-10, "{}", r.value);
    }

    #[test]
    fn semi_infinite_subtracted_difference() {
        // int_0^inf [1/(p+2) - 1/(p+1)] dp = ln(1/2)
        let r =
            integrate_semi_infinite(|p| ok(1.0 / (p + 2.0) - 1.0 / (p + 1.0)), 0.0, 1e-10).unwrap();
        assert!((r.value - 0.5f64.ln()).abs() <= 1e-10, "{}", r.value);
        // int_0^inf [1/(p+2) - 1/(p+101)] dp = ln 50.5
        let r = integrate_semi_infinite(|p| ok(1.0 / (p + 2.0) - 1.0 / (p + 101.0)), 0.0, 1e-10)
            .unwrap();
        assert!((r.value - 50.5f64.ln()).abs() <= 1e-9, "{}", r.value);
    }

    #[test]
    fn logarithmically_divergent_tail_rejected() {
        let err = integrate_semi_infinite(|p| ok(1.0 / (p + 2.0)), 0.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NonConvergent { .. }), "{err:?}");
    }

    #[test]
    fn linearly_divergent_tail_rejected() {
        let err = integrate_semi_infinite(|p| ok(p / (p + 2.0)), 0.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NonConvergent { .. }));
    }

    #[test]
    fn unreachable_tolerance_exhausts_budget() {
        // sharp spike; 1e-300 is far below what f64 quadrature can certify
        let f = |p: f64| ok(1.0 / ((p - 0.3) * (p - 0.3) + 1e-12));
        let err = integrate_finite(f, 0.0, 1.0, 1e-300).unwrap_err();
        assert!(matches!(err, Error::MaxSubdivisions { .. }), "{err:?}");
    }

    #[test]
    fn additivity_within_error_estimates() {
        let f = |p: f64| ok(1.0 / ((p + 1.0) * (p + 1.5)));
        let whole = integrate_finite(f, 0.0, 8.0, 1e-12).unwrap();
        let left = integrate_finite(f, 0.0, 3.0, 1e-12).unwrap();
        let right = integrate_finite(f, 3.0, 8.0, 1e-12).unwrap();
        let gap = (whole.value - left.value - right.value).abs();
        assert!(
            gap <= whole.abs_error_estimate
                + left.abs_error_estimate
                + right.abs_error_estimate
                + 1e-15
        );
    }

    #[test]
    fn nonzero_lower_limit() {
        // int_3^inf dp/(p+2)^2 = 1/5
        let r = integrate_semi_infinite(|p| ok(1.0 / ((p + 2.0) * (p + 2.0))), 3.0, 1e-10).unwrap();
        assert!((r.value - 0.2).abs() <= 1e-10);
    }

    #[test]
    fn single_precision_scalar() {
        // tolerance sits above the f32 rounding floor 50 * eps * int |f|
        let r = integrate_finite(|p: f32| Ok(1.0 / (p + 2.0)), 0.0f32, 10.0, 1e-4).unwrap();
        assert!((r.value - 6f32.ln()).abs() <= 1e-4, "{}", r.value);
        // the half-line tail probe must not step below f32 resolution
        let r = integrate_semi_infinite(|p: f32| Ok(1.0 / ((p + 2.0) * (p + 2.0))), 0.0f32, 1e-4)
            .unwrap();
        assert!((r.value - 0.5).abs() <= 1e-4, "{}", r.value);
    }
}
