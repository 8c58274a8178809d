//! The fractional integration operator
//!
//! ```text
//! (I^α f)(x) = C(α,p) ∫_{|y| ≤ |x|} (|x-y|^(α-1) - |y|^(α-1)) f(y) dy,   α > 1,
//! ```
//!
//! on radial `f`, at a point with `|x| = p^N`.
//!
//! For `|y| < |x|` the ultrametric property gives `|x - y| = |x|`, so the
//! kernel is constant on every inner sphere and the integral collapses to
//!
//! ```text
//! C · [ (1 - 1/p) Σ_{j<N} f(p^j) p^j (p^(N(α-1)) - p^(j(α-1)))
//!       + f(p^N) p^(Nα) (U(α,p) - (1 - 1/p)) ]
//! ```
//!
//! where the last term is the outer sphere `|y| = |x|`, rescaled onto the unit
//! sphere by `y = x t`. Below the point where `f` follows its inner power-law
//! model the sum is geometric and is finished in closed form.

use rayon::prelude::*;

use crate::asymptotics::b_coefficient;
use crate::context::NumericContext;
use crate::error::{Error, Result};
use crate::padic::{
    check_alpha_above_one, haar_sample_ball, padic_sub_abs, prefactor, unit_sphere_kernel_excess, BallExponent,
    PadicApprox, SampleStream,
};
use crate::radial::{geometric_below, RadialFunction};
use crate::real::Real;
use crate::series::phi_tail;

/// A value of `I^α f` with a bound on its numerical error.
#[derive(Debug, Clone)]
pub struct OperatorValue {
    pub value: Real,
    /// Upper bound on the accumulated error of `value`. The inner tails are
    /// summed exactly, so this is a rounding bound.
    pub truncation_bound: Real,
    /// Lowest sphere summed term by term; everything below came from the
    /// closed-form tail.
    pub j_cut: BallExponent,
}

impl OperatorValue {
    fn zero(ctx: &NumericContext) -> Self {
        OperatorValue { value: ctx.int(0), truncation_bound: ctx.int(0), j_cut: BallExponent::Zero }
    }
}

/// `(I^α f)(x)` at `|x| = p^N`.
pub fn ialpha_eval(f: &RadialFunction, n: BallExponent, alpha: f64, ctx: &NumericContext) -> Result<OperatorValue> {
    ialpha_eval_deepened(f, n, alpha, 0, ctx)
}

/// As [`ialpha_eval`], but sums `extra_depth` additional spheres term by
/// term before switching to the closed-form tail.
pub fn ialpha_eval_deepened(
    f: &RadialFunction,
    n: BallExponent,
    alpha: f64,
    extra_depth: u32,
    ctx: &NumericContext,
) -> Result<OperatorValue> {
    check_alpha_above_one(alpha, ctx)?;
    f.validate()?;
    let n = match n {
        // The ball of radius zero is a null set.
        BallExponent::Zero => return Ok(OperatorValue::zero(ctx)),
        BallExponent::Finite(n) => n,
    };
    let model = f.inner_model();
    model.check_integrable()?;

    let c = prefactor(ctx, alpha)?;
    let am1 = ctx.real(alpha) - ctx.int(1);
    let outer_kernel = ctx.p_pow(&(&am1 * ctx.int(n)));
    let sphere = ctx.unit_sphere();
    let start = model.start_below(n) - extra_depth as i64;

    let mut sum = ctx.int(0);
    let mut magnitude = ctx.int(0);
    let mut count: i64 = 0;

    for j in start..n {
        let fj = f.eval_at(j, ctx)?;
        if fj.is_zero() {
            continue;
        }
        let inner_kernel = ctx.p_pow(&(&am1 * ctx.int(j)));
        let weight = &sphere * ctx.p_powi(j);
        let term = &fj * &weight * (&outer_kernel - &inner_kernel);
        magnitude = magnitude + fj.abs() * &weight * (&outer_kernel + &inner_kernel);
        sum = sum + term;
        count += 1;
    }

    for t in model.terms.iter().filter(|t| t.coeff != 0.0) {
        // Σ_{j<start} a p^(jM) (1-1/p) p^j (p^(N(α-1)) - p^(j(α-1)))
        let a = ctx.real(t.coeff);
        let g1 = geometric_below(ctx, &(ctx.real(t.exponent) + ctx.int(1)), start - 1);
        let g2 = geometric_below(ctx, &(ctx.real(t.exponent) + ctx.real(alpha)), start - 1);
        let term = &a * &sphere * (&outer_kernel * &g1 - &g2);
        magnitude = magnitude + a.abs() * &sphere * (&outer_kernel * g1 + g2);
        sum = sum + term;
        count += 6;
    }

    let f_outer = f.eval_at(n, ctx)?;
    if !f_outer.is_zero() {
        let term = &f_outer * ctx.p_pow(&(ctx.real(alpha) * ctx.int(n))) * unit_sphere_kernel_excess(ctx, alpha)?;
        magnitude = magnitude + term.abs();
        sum = sum + term;
        count += 6;
    }

    let value = &c * sum;
    let truncation_bound = c.abs() * magnitude * ctx.ulp() * ctx.int(count + 8);
    Ok(OperatorValue { value, truncation_bound, j_cut: BallExponent::Finite(start) })
}

/// `I^α |x|^M` in closed form: `C(α,p) b(M) |x|^(M+α)`.
pub fn ialpha_monomial_exact(m: f64, n: i64, alpha: f64, ctx: &NumericContext) -> Result<Real> {
    let c = prefactor(ctx, alpha)?;
    let b = b_coefficient(m, alpha, ctx)?;
    Ok(c * b * ctx.p_pow(&((ctx.real(m) + ctx.real(alpha)) * ctx.int(n))))
}

/// The small-ball kernel integral
/// `K = ∫_{|t| ≤ p^-R} (|1-t|^(α-1) - |t|^(α-1)) |t|^-β |log|t||^k dt`.
///
/// On `|t| < 1` the kernel is `1 - |t|^(α-1)`, so
/// `K = (1 - 1/p) L^k Σ_{m ≥ R} m^k (p^(-m(1-β)) - p^(-m(α-β)))`.
pub fn smallball_kernel_integral(k: u32, beta: f64, r: i64, alpha: f64, ctx: &NumericContext) -> Result<Real> {
    check_alpha_above_one(alpha, ctx)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::BetaOutOfRange(beta));
    }
    if r < 1 {
        return Err(Error::ParamOutOfRange(format!("small-ball radius exponent R = {r} must be >= 1")));
    }
    let q1 = ctx.p_pow(&(ctx.real(beta) - ctx.int(1)));
    let q2 = ctx.p_pow(&(ctx.real(beta) - ctx.real(alpha)));
    let series = phi_tail(k, &q1, r)? - phi_tail(k, &q2, r)?;
    Ok(ctx.unit_sphere() * ctx.log_unit().powi(k as i64) * series)
}

/// Sample mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    /// `(estimate - exact) / stderr`; zero when both the error and the
    /// standard error vanish.
    pub fn z_score(&self, exact: f64) -> f64 {
        let diff = self.estimate - exact;
        if self.stderr == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            }
        } else {
            diff / self.stderr
        }
    }
}

/// Running mean / second central moment, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }
}

pub const MC_MIN_SAMPLES: u64 = 10_000;
const MC_CHUNK: u64 = 1 << 14;
const MC_DIGITS: usize = 16;
const MC_ESCALATIONS: u32 = 3;
// Spheres below |x| p^-WINDOW are reached with probability p^-WINDOW and are
// evaluated on demand.
const MC_WINDOW: i64 = 96;

/// Monte Carlo estimate of `(I^α f)(x)` at the representative `x = p^-N`.
pub fn mc_ialpha_eval(
    f: &RadialFunction,
    n: i64,
    alpha: f64,
    samples: u64,
    seed: u64,
    ctx: &NumericContext,
) -> Result<McEstimate> {
    let x = PadicApprox::prime_power(ctx.prime(), -n, (4 * MC_DIGITS) << MC_ESCALATIONS);
    mc_ialpha_eval_at(f, &x, alpha, samples, seed, ctx)
}

/// Monte Carlo estimate of `(I^α f)(x)` at an arbitrary non-zero `x`.
///
/// Draws `y` from the normalised Haar measure on `|y| ≤ |x|` and averages
/// `|x| C(α,p) (|x-y|^(α-1) - |y|^(α-1)) f(|y|)`. Samples are split into
/// fixed-size chunks, each driven by its own substream of `seed`, and the
/// chunk statistics are merged in chunk order, so the result does not
/// depend on thread scheduling.
pub fn mc_ialpha_eval_at(
    f: &RadialFunction,
    x: &PadicApprox,
    alpha: f64,
    samples: u64,
    seed: u64,
    ctx: &NumericContext,
) -> Result<McEstimate> {
    check_alpha_above_one(alpha, ctx)?;
    if samples < MC_MIN_SAMPLES {
        return Err(Error::ParamOutOfRange(format!(
            "{samples} samples is below the minimum of {MC_MIN_SAMPLES}"
        )));
    }
    if x.prime() != ctx.prime() {
        return Err(Error::PrimeMismatch(x.prime(), ctx.prime()));
    }
    let n = x
        .abs_exponent()
        .finite()
        .ok_or_else(|| Error::ParamOutOfRange("Monte Carlo point must be non-zero".into()))?;
    f.validate()?;
    f.inner_model().check_integrable()?;

    let p = ctx.prime() as f64;
    let scale = p.powi(n as i32) * prefactor(ctx, alpha)?.to_f64();
    let kernel = |e: i64| p.powf(e as f64 * (alpha - 1.0));
    let window: Vec<f64> = ((n - MC_WINDOW)..=n)
        .map(|j| f.eval_at(j, ctx).map(|v| v.to_f64()))
        .collect::<Result<_>>()?;
    let f_at = |j: i64| -> Result<f64> {
        let idx = j - (n - MC_WINDOW);
        if idx >= 0 {
            Ok(window[idx as usize])
        } else {
            f.eval_at(j, ctx).map(|v| v.to_f64())
        }
    };

    let stream = SampleStream::new(seed);
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sub = stream.split(chunk);
            let len = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut moments = Moments::default();
            for _ in 0..len {
                let mut y = haar_sample_ball(ctx, n, MC_DIGITS, sub.rng())?;
                let mut escalations = 0;
                let e = loop {
                    match padic_sub_abs(x, &y) {
                        Ok(e) => break e,
                        Err(Error::PrecisionExhausted(_)) if escalations < MC_ESCALATIONS => {
                            let extra = y.digit_precision();
                            y.extend_digits(extra, sub.rng());
                            escalations += 1;
                        }
                        Err(err) => return Err(err),
                    }
                };
                let e = e.finite().expect("difference of distinct points is non-zero");
                let j = y.abs_exponent().finite().expect("Haar samples are non-zero");
                let fy = f_at(j)?;
                let value = if fy == 0.0 { 0.0 } else { scale * (kernel(e) - kernel(j)) * fy };
                moments.push(value);
            }
            Ok(moments)
        })
        .collect();

    let mut total = Moments::default();
    for part in partials {
        total = total.merge(part?);
    }
    let variance = if total.count > 1 { total.m2 / (total.count - 1) as f64 } else { 0.0 };
    Ok(McEstimate {
        estimate: total.mean,
        stderr: (variance / total.count as f64).sqrt(),
        samples: total.count,
    })
}
