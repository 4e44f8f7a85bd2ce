//! Analysis of divergent one-dimensional integrals of rational integrands
//! over the half-line `[0, inf)`.
//!
//! The pipeline: parse an integrand in `p`, `q` and named parameters
//! ([`expr`]), measure its superficial degree of divergence by scaling
//! ([`divergence`]), regularize with a hard cutoff or a partner family
//! ([`regfin`]), extract the regularization-independent finite part by
//! Taylor subtraction ([`regfin`]), and absorb the subtraction constants
//! into running renormalized parameters ([`renorm`]). Quadrature lives in
//! [`quad`].
//!
//! Everything numeric is generic over the scalar type via [`Real`];
//! concrete `f64`/`f32` aliases are exported at the crate root.
//!
//! ```
//! use divlim_core::divergence::sdd;
//! use divlim_core::expr::{parse, to_rational, Bindings};
//! use divlim_core::regfin::{finite_part_direct, SubtractionSpec};
//!
//! # fn main() -> divlim_core::Result<()> {
//! let integrand = parse::<f64>("1/(p+q+m^2)")?;
//! let bindings = Bindings::from_pairs([("m", 1.0)])?;
//! // logarithmically divergent: the integrand scales like 1/p
//! assert_eq!(sdd(&to_rational(&integrand)?), 0);
//! // order-0 subtraction around q_s = 0 leaves ln[m^2/(q+m^2)]
//! let spec = SubtractionSpec::new(0, 0.0);
//! let finite = finite_part_direct(&integrand, &spec, 1.0, &bindings, 1e-10)?;
//! assert!((finite.value - 0.5f64.ln()).abs() < 1e-9);
//! # Ok(())
//! # }
//! ```

pub mod divergence;
pub mod error;
pub mod expr;
pub mod quad;
pub mod regfin;
pub mod renorm;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Expr64 = expr::Expr<f64>;
pub type Expr32 = expr::Expr<f32>;
pub type Bindings64 = expr::Bindings<f64>;
pub type Bindings32 = expr::Bindings<f32>;
pub type RationalForm64 = expr::RationalForm<f64>;
pub type QuadResult64 = quad::QuadResult<f64>;
pub type Regulator64 = regfin::Regulator<f64>;
pub type SubtractionSpec64 = regfin::SubtractionSpec<f64>;
pub type FinitePartResult64 = regfin::FinitePartResult<f64>;
pub type AdditiveModel64 = renorm::AdditiveModel<f64>;
pub type MultiplicativeModel64 = renorm::MultiplicativeModel<f64>;
pub type RGFlowTable64 = renorm::RGFlowTable<f64>;
