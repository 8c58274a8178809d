//! Expansion coefficients and truncated asymptotic expansions of `I^α f`.
//!
//! Near the origin, `f = Σ a_n |x|^(M_n)` gives
//! `I^α f ~ C Σ a_n b(M_n) |x|^(M_n+α)`.
//!
//! At infinity, `f = |x|^-β Σ a_n (log|x|)^(γ-n)` with `β < 1` gives
//! `I^α f ~ C |x|^(α-β) Σ B_n (log|x|)^(γ-n)`, with
//! `B_n = Σ_k a_(n-k) binom(γ+k-n, k) Ω(k, α, β)`.
//!
//! For `β = 1` the leading behaviour picks up the cumulative integral
//! `G_1(|x|) = ∫_{|y| ≤ |x|} f`, and the log series uses `Ω̃` instead of `Ω`.

use crate::context::NumericContext;
use crate::error::{Error, Result};
use crate::padic::{check_alpha_above_one, prefactor, unit_kernel_integral, unit_sphere_kernel_excess, BallExponent};
use crate::radial::{cumulative_ball_integral, log_power, RadialFunction};
use crate::real::Real;
use crate::series;

/// Generalised binomial coefficient `binom(γ, k)` at the context precision.
pub fn gen_binomial(gamma: f64, k: u32, ctx: &NumericContext) -> Real {
    series::gen_binomial(gamma, k, ctx.precision_bits())
}

/// `Φ_k(q) = Σ_{m ≥ 1} m^k q^m` in closed form.
pub fn phi_sum(k: u32, q: &Real) -> Result<Real> {
    series::phi_closed(k, q)
}

/// `Φ_k(q)` by direct summation.
pub fn phi_sum_direct(k: u32, q: &Real, ctx: &NumericContext) -> Result<Real> {
    series::phi_series(k, q, ctx.rel_tol())
}

/// `b(M)`, with `I^α |x|^M = C(α,p) b(M) |x|^(M+α)`.
///
/// `b(M) = (p^(1-α) - 1) / ((1 - p^-α) p) + (1 - 1/p) (Φ_0(p^-(M+1)) - Φ_0(p^-(M+α)))`.
pub fn b_coefficient(m: f64, alpha: f64, ctx: &NumericContext) -> Result<Real> {
    check_alpha_above_one(alpha, ctx)?;
    if !(m > -1.0 && m.is_finite()) {
        return Err(Error::DivergentInnerSum(m));
    }
    let m = ctx.real(m);
    let q1 = ctx.p_pow(&-(&m + ctx.int(1)));
    let q2 = ctx.p_pow(&-(&m + ctx.real(alpha)));
    Ok(unit_sphere_kernel_excess(ctx, alpha)? + ctx.unit_sphere() * (phi_sum(0, &q1)? - phi_sum(0, &q2)?))
}

/// `Ω(k, α, β) = ∫_{|t| ≤ 1} (|1-t|^(α-1) - |t|^(α-1)) |t|^-β (log|t|)^k dt`.
pub fn omega(k: u32, alpha: f64, beta: f64, ctx: &NumericContext) -> Result<Real> {
    check_alpha_above_one(alpha, ctx)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::BetaOutOfRange(beta));
    }
    let q1 = ctx.p_pow(&(ctx.real(beta) - ctx.int(1)));
    let q2 = ctx.p_pow(&(ctx.real(beta) - ctx.real(alpha)));
    let spheres = ctx.unit_sphere() * (-ctx.log_unit()).powi(k as i64) * (phi_sum(k, &q1)? - phi_sum(k, &q2)?);
    if k == 0 {
        Ok(unit_sphere_kernel_excess(ctx, alpha)? + spheres)
    } else {
        Ok(spheres)
    }
}

/// `Ω̃(k, α) = ∫_{|t| ≤ 1} (|1-t|^(α-1) - |t|^(α-1) - 1) |t|^-1 (log|t|)^k dt`.
pub fn omega_tilde(k: u32, alpha: f64, ctx: &NumericContext) -> Result<Real> {
    check_alpha_above_one(alpha, ctx)?;
    let q = ctx.p_pow(&(ctx.int(1) - ctx.real(alpha)));
    let spheres = ctx.unit_sphere() * (-ctx.log_unit()).powi(k as i64) * phi_sum(k, &q)?;
    if k == 0 {
        Ok(unit_kernel_integral(ctx, alpha)? - ctx.int(2) * ctx.unit_sphere() - spheres)
    } else {
        Ok(-spheres)
    }
}

/// Which kernel moment the log-series convolution uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaKind {
    Omega { beta: f64 },
    OmegaTilde,
}

/// `B_0 … B_(n_max)` with `B_n = Σ_{k=0}^n a_(n-k) binom(γ+k-n, k) Ω_k`.
/// Coefficients past the end of `a` are zero.
pub fn series_b(
    a: &[f64],
    gamma: f64,
    n_max: u32,
    kind: OmegaKind,
    alpha: f64,
    ctx: &NumericContext,
) -> Result<Vec<Real>> {
    if a.is_empty() {
        return Err(Error::ParamOutOfRange("coefficient list is empty".into()));
    }
    let omegas = (0..=n_max)
        .map(|k| match kind {
            OmegaKind::Omega { beta } => omega(k, alpha, beta, ctx),
            OmegaKind::OmegaTilde => omega_tilde(k, alpha, ctx),
        })
        .collect::<Result<Vec<_>>>()?;
    let coeff = |j: u32| a.get(j as usize).copied().unwrap_or(0.0);
    Ok((0..=n_max)
        .map(|n| {
            (0..=n)
                .filter(|&k| coeff(n - k) != 0.0)
                .map(|k| {
                    ctx.real(coeff(n - k)) * series::gen_binomial_real(&(ctx.real(gamma) + ctx.int(k as i64 - n as i64)), k) * &omegas[k as usize]
                })
                .fold(ctx.int(0), |acc, t| acc + t)
        })
        .collect())
}

/// `prefactor · |x|^power · [G_1(|x|)] + log series`, where the log series is
/// `Σ coeff (log|x|)^exponent`, multiplied by `|x|^power` when
/// `scale_log_terms` is set.
#[derive(Debug, Clone)]
pub struct AsymptoticPrediction {
    pub prefactor: Real,
    pub power_exponent: f64,
    pub log_terms: Vec<(f64, Real)>,
    pub extra_cumulative: bool,
    pub scale_log_terms: bool,
}

impl AsymptoticPrediction {
    /// Value at `|x| = p^x_exp`. `cumulative` is `G_1(p^x_exp)` and is
    /// required when `extra_cumulative` is set.
    pub fn evaluate(&self, x_exp: i64, cumulative: Option<&Real>, ctx: &NumericContext) -> Result<Real> {
        let power = ctx.p_pow(&(ctx.real(self.power_exponent) * ctx.int(x_exp)));
        let log = ctx.log_abs(x_exp);
        let mut logs = ctx.int(0);
        for (e, c) in &self.log_terms {
            if c.is_zero() {
                continue;
            }
            logs = logs + c * log_power(&log, *e, ctx)?;
        }
        let mut total = if self.scale_log_terms { &power * logs } else { logs };
        if self.extra_cumulative {
            let g = cumulative
                .ok_or_else(|| Error::ParamOutOfRange("prediction needs the cumulative integral".into()))?;
            total = total + &power * g;
        }
        Ok(&self.prefactor * total)
    }
}

/// How the `β = 1` prediction treats the `Ω̃` log series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Eq13Form {
    /// The log series carries the factor `|x|^(α-1)`, as the kernel
    /// expansion produces.
    #[default]
    ProofConsistent,
    /// The log series is added without the `|x|^(α-1)` factor.
    Printed,
}

/// Origin prediction `C Σ_{n ≤ N} a_n b(M_n) |x|^(M_n+α)`.
pub fn predict_origin(
    a: &[f64],
    m: &[f64],
    order: usize,
    x_exp: BallExponent,
    alpha: f64,
    ctx: &NumericContext,
) -> Result<Real> {
    if a.len() != m.len() {
        return Err(Error::ParamOutOfRange(format!(
            "{} coefficients but {} scales",
            a.len(),
            m.len()
        )));
    }
    if a.len() < order + 1 {
        return Err(Error::ParamOutOfRange(format!("order {order} needs {} terms", order + 1)));
    }
    if m.windows(2).any(|w| w[0] >= w[1]) || m.iter().any(|s| s.is_nan() || *s <= 0.0) {
        return Err(Error::ParamOutOfRange("scales must be positive and strictly increasing".into()));
    }
    let x = x_exp
        .finite()
        .ok_or_else(|| Error::ParamOutOfRange("origin prediction needs a non-zero radius".into()))?;
    let mut sum = ctx.int(0);
    for n in 0..=order {
        let term = ctx.real(a[n]) * b_coefficient(m[n], alpha, ctx)? * ctx.p_pow(&((ctx.real(m[n]) + ctx.real(alpha)) * ctx.int(x)));
        sum = sum + term;
    }
    Ok(prefactor(ctx, alpha)? * sum)
}

/// The truncated expansion at infinity for `β < 1`, as a reusable object.
pub fn infinity_prediction(
    a: &[f64],
    beta: f64,
    gamma: f64,
    order: u32,
    alpha: f64,
    ctx: &NumericContext,
) -> Result<AsymptoticPrediction> {
    let b = series_b(a, gamma, order, OmegaKind::Omega { beta }, alpha, ctx)?;
    Ok(AsymptoticPrediction {
        prefactor: prefactor(ctx, alpha)?,
        power_exponent: alpha - beta,
        log_terms: b.into_iter().enumerate().map(|(n, c)| (gamma - n as f64, c)).collect(),
        extra_cumulative: false,
        scale_log_terms: true,
    })
}

/// `C |x|^(α-β) Σ_{n ≤ N} B_n (log|x|)^(γ-n)`.
pub fn predict_infinity(
    a: &[f64],
    beta: f64,
    gamma: f64,
    order: u32,
    x_exp: BallExponent,
    alpha: f64,
    ctx: &NumericContext,
) -> Result<Real> {
    let x = x_exp
        .finite()
        .ok_or_else(|| Error::ParamOutOfRange("expansion at infinity needs a finite radius".into()))?;
    infinity_prediction(a, beta, gamma, order, alpha, ctx)?.evaluate(x, None, ctx)
}

/// The truncated expansion at infinity for `β = 1`.
pub fn infinity_prediction_beta1(
    a: &[f64],
    gamma: f64,
    order: u32,
    alpha: f64,
    form: Eq13Form,
    ctx: &NumericContext,
) -> Result<AsymptoticPrediction> {
    let b = series_b(a, gamma, order, OmegaKind::OmegaTilde, alpha, ctx)?;
    Ok(AsymptoticPrediction {
        prefactor: prefactor(ctx, alpha)?,
        power_exponent: alpha - 1.0,
        log_terms: b.into_iter().enumerate().map(|(n, c)| (gamma - n as f64, c)).collect(),
        extra_cumulative: true,
        scale_log_terms: form == Eq13Form::ProofConsistent,
    })
}

/// Checks that `f` declares the outer tail `|x|^-β Σ a_n (log|x|)^(γ-n)`.
pub fn check_outer_tail(f: &RadialFunction, a: &[f64], beta: f64, gamma: f64) -> Result<()> {
    let tail = f
        .outer_expansion()
        .ok_or_else(|| Error::TailMismatch("function declares no expansion at infinity".into()))?;
    let len = tail.coeffs.len().max(a.len());
    let padded = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let same_coeffs = (0..len).all(|i| padded(&tail.coeffs, i) == padded(a, i));
    if tail.beta != beta || tail.gamma != gamma || !same_coeffs {
        return Err(Error::TailMismatch(format!(
            "declared tail (beta={}, gamma={}, coeffs={:?}) differs from (beta={beta}, gamma={gamma}, coeffs={a:?})",
            tail.beta, tail.gamma, tail.coeffs
        )));
    }
    Ok(())
}

/// `C |x|^(α-1) [G_1(|x|) + Σ_{n ≤ N} B̃_n (log|x|)^(γ-n)]` in the default
/// form; see [`Eq13Form`] for the alternative.
#[allow(clippy::too_many_arguments)]
pub fn predict_infinity_beta1(
    a: &[f64],
    gamma: f64,
    order: u32,
    x_exp: BallExponent,
    f: &RadialFunction,
    alpha: f64,
    form: Eq13Form,
    ctx: &NumericContext,
) -> Result<Real> {
    check_outer_tail(f, a, 1.0, gamma)?;
    let x = x_exp
        .finite()
        .ok_or_else(|| Error::ParamOutOfRange("expansion at infinity needs a finite radius".into()))?;
    let g = cumulative_ball_integral(f, x_exp, ctx)?;
    infinity_prediction_beta1(a, gamma, order, alpha, form, ctx)?.evaluate(x, Some(&g), ctx)
}
