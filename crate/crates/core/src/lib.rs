//! Fractional integration of radial functions on the p-adic numbers.
//!
//! The operator
//!
//! ```text
//! (I^α f)(x) = C(α,p) ∫_{|y| ≤ |x|} (|x-y|^(α-1) - |y|^(α-1)) f(y) dy,
//! C(α,p) = (1 - p^-α) / (1 - p^(α-1)),   α > 1,
//! ```
//!
//! is evaluated exactly on radial functions by collapsing the integral onto
//! spheres, and compared against its asymptotic expansions at the origin and
//! at infinity.
//!
//! ```
//! use padic_fracint::{ialpha_eval, NumericContext, RadialFunction};
//!
//! let ctx = NumericContext::with_prime(2).unwrap();
//! let v = ialpha_eval(&RadialFunction::indicator(0), 3.into(), 2.0, &ctx).unwrap();
//! assert!((v.value.to_f64() + 5.5).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod context;
pub mod error;
pub mod exact;
pub mod operator;
pub mod padic;
pub mod radial;
pub mod real;
pub mod series;
pub mod verify;

pub use asymptotics::{
    b_coefficient, gen_binomial, omega, omega_tilde, phi_sum, predict_infinity, predict_infinity_beta1,
    predict_origin, series_b, AsymptoticPrediction, Eq13Form, OmegaKind,
};
pub use context::{LogBase, NumericContext, DEFAULT_PRECISION_BITS, DEFAULT_REL_TOL};
pub use error::{Error, Result};
pub use operator::{
    ialpha_eval, ialpha_eval_deepened, ialpha_monomial_exact, mc_ialpha_eval, mc_ialpha_eval_at,
    smallball_kernel_integral, McEstimate, OperatorValue,
};
pub use padic::{
    ball_power_integral, haar_sample_ball, padic_sub_abs, prefactor, sphere_measure, unit_kernel_integral,
    unit_sphere_kernel_excess, BallExponent, PadicApprox, SampleStream,
};
pub use radial::{cumulative_ball_integral, InnerTail, OuterTail, RadialFunction, Table};
pub use real::Real;
pub use verify::{
    default_ladder, lemma_decay_check, ratio_bound_check, residual_scan, Lemma, RatioBound, ResidualReport,
    ResidualRow, ScanOptions, Theorem,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/numbers.md")]
    mod numbers {}
    #[doc = include_str!("../../../book/src/radial.md")]
    mod radial {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/expansions.md")]
    mod expansions {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/monte_carlo.md")]
    mod monte_carlo {}
}
