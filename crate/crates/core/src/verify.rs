//! Checks of computed `I^α f` against the truncated expansions, the
//! two-sided bound at infinity and the decay lemmas, over ladders of radii.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{
    check_outer_tail, infinity_prediction, infinity_prediction_beta1, predict_origin, Eq13Form,
};
use crate::context::NumericContext;
use crate::error::{Error, Result};
use crate::operator::{ialpha_eval, smallball_kernel_integral};
use crate::padic::check_alpha_above_one;
use crate::radial::{cumulative_ball_integral, log_power, RadialFunction};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// Expansion at the origin.
    T1,
    /// Two-sided bound `|I^α f| ≍ |x|^(α-1)`.
    T2,
    /// Log-power expansion at infinity, `β < 1`.
    T3,
    /// Log-power expansion at infinity, `β = 1`.
    T4,
}

#[derive(Debug, Clone)]
pub struct ResidualRow {
    pub x_exp: i64,
    pub computed: Real,
    pub predicted: Real,
    pub abs_err: Real,
    /// `abs_err` over the size of the first omitted term.
    pub normalized_err: Real,
}

/// Parameters echoed into a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualParams {
    pub p: u64,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub coeffs: Vec<f64>,
    pub scales: Vec<f64>,
    pub eq13_form: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub theorem: Theorem,
    pub order: usize,
    pub params: ResidualParams,
    /// Sorted by `x_exp`.
    pub rows: Vec<ResidualRow>,
}

/// Extra inputs for [`residual_scan`].
#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    /// `(a_n, M_n)` of the expansion at the origin. Required for T1 unless
    /// `f` is a combination of monomials.
    pub origin_expansion: Option<(Vec<f64>, Vec<f64>)>,
    pub eq13_form: Eq13Form,
}

/// Default ladders: `-4, -8, …, -40` at the origin, `4, 8, …, 40` otherwise.
pub fn default_ladder(theorem: Theorem) -> Vec<i64> {
    match theorem {
        Theorem::T1 => (1..=10).map(|i| -4 * i).collect(),
        _ => (1..=10).map(|i| 4 * i).collect(),
    }
}

fn monomial_expansion(f: &RadialFunction) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut terms: Vec<(f64, f64)> = match f {
        RadialFunction::Monomial { exponent } => vec![(*exponent, 1.0)],
        RadialFunction::LinearCombo(parts) => {
            let mut out = Vec::new();
            for (c, g) in parts {
                match g {
                    RadialFunction::Monomial { exponent } => out.push((*exponent, *c)),
                    _ => return None,
                }
            }
            out
        }
        _ => return None,
    };
    if terms.is_empty() {
        return None;
    }
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (m, c) in terms {
        match merged.last_mut() {
            Some(last) if last.0 == m => last.1 += c,
            _ => merged.push((m, c)),
        }
    }
    Some((merged.iter().map(|t| t.1).collect(), merged.iter().map(|t| t.0).collect()))
}

fn sorted_ladder(ladder: &[i64]) -> Result<Vec<i64>> {
    if ladder.is_empty() {
        return Err(Error::ParamOutOfRange("empty ladder".into()));
    }
    let mut l = ladder.to_vec();
    l.sort_unstable();
    l.dedup();
    Ok(l)
}

/// Evaluates `I^α f` over the ladder and compares with the truncated
/// expansion of order `order` named by `theorem`.
pub fn residual_scan(
    theorem: Theorem,
    f: &RadialFunction,
    order: usize,
    ladder: &[i64],
    alpha: f64,
    options: &ScanOptions,
    ctx: &NumericContext,
) -> Result<ResidualReport> {
    check_alpha_above_one(alpha, ctx)?;
    let ladder = sorted_ladder(ladder)?;
    let mut params = ResidualParams {
        p: ctx.prime(),
        alpha,
        beta: None,
        gamma: None,
        coeffs: Vec::new(),
        scales: Vec::new(),
        eq13_form: None,
    };
    let l = ctx.log_unit();

    // Per ladder point: (predicted, normalisation scale).
    type Predictor<'a> = Box<dyn Fn(i64) -> Result<(Real, Real)> + Sync + 'a>;
    let predictor: Predictor = match theorem {
        Theorem::T2 => {
            return Err(Error::HypothesisMismatch(
                "the two-sided bound has no expansion; use ratio_bound_check".into(),
            ))
        }
        Theorem::T1 => {
            let (a, m) = match options.origin_expansion.clone().or_else(|| monomial_expansion(f)) {
                Some(e) => e,
                None if f.is_identically_zero() => (vec![0.0; order + 1], (1..=order + 1).map(|i| i as f64).collect()),
                None => {
                    return Err(Error::HypothesisMismatch(
                        "no expansion at the origin was supplied for this function".into(),
                    ))
                }
            };
            if a.len() != m.len() || a.len() < order + 1 {
                return Err(Error::HypothesisMismatch(format!(
                    "order {order} needs {} expansion terms, got {} coefficients and {} scales",
                    order + 1,
                    a.len(),
                    m.len()
                )));
            }
            if ladder.iter().any(|&x| x > 0) {
                return Err(Error::HypothesisMismatch("origin scans need exponents <= 0".into()));
            }
            params.coeffs = a.clone();
            params.scales = m.clone();
            // Scale of the first omitted term; the last retained one when the
            // expansion supplies nothing further.
            let next = m.get(order + 1).copied().unwrap_or(m[order]);
            Box::new(move |x| {
                let predicted = predict_origin(&a, &m, order, x.into(), alpha, ctx)?;
                Ok((predicted, ctx.p_pow(&((ctx.real(next) + ctx.real(alpha)) * ctx.int(x)))))
            })
        }
        Theorem::T3 | Theorem::T4 => {
            let tail = match f.outer_expansion() {
                Some(t) => t,
                None if f.is_identically_zero() => crate::radial::OuterTail {
                    beta: if theorem == Theorem::T4 { 1.0 } else { 0.0 },
                    gamma: 0.0,
                    coeffs: vec![0.0],
                },
                None => {
                    return Err(Error::HypothesisMismatch("function declares no expansion at infinity".into()))
                }
            };
            if ladder.iter().any(|&x| x < 1) {
                return Err(Error::HypothesisMismatch("scans at infinity need exponents >= 1".into()));
            }
            params.beta = Some(tail.beta);
            params.gamma = Some(tail.gamma);
            params.coeffs = tail.coeffs.clone();
            let gamma = tail.gamma;
            let tail_exp = gamma - order as f64 - 1.0;
            if theorem == Theorem::T3 {
                if tail.beta >= 1.0 {
                    return Err(Error::HypothesisMismatch(format!("beta = {} is not below 1", tail.beta)));
                }
                let pred = infinity_prediction(&tail.coeffs, tail.beta, gamma, order as u32, alpha, ctx)?;
                let power = alpha - tail.beta;
                Box::new(move |x| {
                    let scale = ctx.p_pow(&(ctx.real(power) * ctx.int(x))) * log_power(&(ctx.int(x) * &l), tail_exp, ctx)?;
                    Ok((pred.evaluate(x, None, ctx)?, scale))
                })
            } else {
                if tail.beta != 1.0 {
                    return Err(Error::HypothesisMismatch(format!("beta = {} is not 1", tail.beta)));
                }
                if !f.is_identically_zero() {
                    check_outer_tail(f, &tail.coeffs, 1.0, gamma)?;
                }
                let form = options.eq13_form;
                params.eq13_form = Some(format!("{form:?}"));
                let pred = infinity_prediction_beta1(&tail.coeffs, gamma, order as u32, alpha, form, ctx)?;
                Box::new(move |x| {
                    let g = cumulative_ball_integral(f, x.into(), ctx)?;
                    let logs = log_power(&(ctx.int(x) * &l), tail_exp, ctx)?;
                    // Each form is measured against its own first omitted term.
                    let scale = match form {
                        Eq13Form::ProofConsistent => ctx.p_pow(&((ctx.real(alpha) - ctx.int(1)) * ctx.int(x))) * logs,
                        Eq13Form::Printed => logs,
                    };
                    Ok((pred.evaluate(x, Some(&g), ctx)?, scale))
                })
            }
        }
    };

    let rows = ladder
        .par_iter()
        .map(|&x| {
            let computed = ialpha_eval(f, x.into(), alpha, ctx)?.value;
            let (predicted, scale) = predictor(x)?;
            let abs_err = (&computed - &predicted).abs();
            let normalized_err = if abs_err.is_zero() { ctx.int(0) } else { &abs_err / scale.abs() };
            Ok(ResidualRow { x_exp: x, computed, predicted, abs_err, normalized_err })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ResidualReport { theorem, order, params, rows })
}

/// Outcome of [`ratio_bound_check`].
#[derive(Debug, Clone)]
pub struct RatioBound {
    pub c_hat: Real,
    pub d_hat: Real,
    /// `(x_exp, |I^α f(x)| / |x|^(α-1))`, sorted by `x_exp`.
    pub rows: Vec<(i64, Real)>,
}

/// `min` and `max` of `|I^α f(x)| / |x|^(α-1)` over the ladder, for `f`
/// bounded between positive constants near the origin and decaying faster
/// than `|x|^-1` at infinity.
pub fn ratio_bound_check(f: &RadialFunction, ladder: &[i64], alpha: f64, ctx: &NumericContext) -> Result<RatioBound> {
    check_alpha_above_one(alpha, ctx)?;
    let ladder = sorted_ladder(ladder)?;
    match f.outer_decay() {
        Some(m) if m > 1.0 => {}
        Some(m) => return Err(Error::HypothesisMismatch(format!("outer decay exponent {m} is not above 1"))),
        None => return Err(Error::HypothesisMismatch("function declares no decay at infinity".into())),
    }
    let model = f.inner_model();
    let live: Vec<_> = model.terms.iter().filter(|t| t.coeff != 0.0).collect();
    let bounded_inside = live.iter().all(|t| t.exponent == 0.0) && live.iter().map(|t| t.coeff).sum::<f64>() > 0.0;
    let inside_positive = (model.start_below(0)..0).all(|j| f.eval_at(j, ctx).is_ok_and(|v| !v.is_negative() && !v.is_zero()));
    if !bounded_inside || !inside_positive {
        return Err(Error::HypothesisMismatch(
            "function is not bounded between positive constants on the unit ball".into(),
        ));
    }
    let rows = ladder
        .par_iter()
        .map(|&x| {
            let v = ialpha_eval(f, x.into(), alpha, ctx)?.value;
            Ok((x, v.abs() / ctx.p_pow(&((ctx.real(alpha) - ctx.int(1)) * ctx.int(x)))))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c_hat = rows[0].1.clone();
    let mut d_hat = rows[0].1.clone();
    for (_, r) in &rows[1..] {
        if *r < c_hat {
            c_hat = r.clone();
        }
        if *r > d_hat {
            d_hat = r.clone();
        }
    }
    Ok(RatioBound { c_hat, d_hat, rows })
}

#[derive(Debug, Clone)]
pub enum Lemma {
    /// `G_1(r) = o(r^(1-λ))` for `f = o(|y|^-λ)`.
    L1 { f: RadialFunction, lambda: f64 },
    /// Small-ball kernel integral `O(r^(β+ε-1))` as `r → 0`.
    L2 { k: u32, beta: f64, epsilon: f64, alpha: f64 },
}

/// L1 rows `G_1(p^m) p^(-m(1-λ))`, which should decrease to zero; L2 rows
/// `K(p^-R) p^(R(1-β-ε))`, which should stay bounded.
pub fn lemma_decay_check(which: &Lemma, ladder: &[i64], ctx: &NumericContext) -> Result<Vec<(i64, Real)>> {
    let ladder = sorted_ladder(ladder)?;
    match which {
        Lemma::L1 { f, lambda } => {
            if !(0.0..1.0).contains(lambda) {
                return Err(Error::ParamOutOfRange(format!("lambda = {lambda} must lie in [0, 1)")));
            }
            match f.outer_decay() {
                Some(d) if d > *lambda => {}
                _ => {
                    return Err(Error::ParamOutOfRange(format!(
                        "function does not decay faster than |y|^-{lambda}"
                    )))
                }
            }
            ladder
                .iter()
                .map(|&m| {
                    let g = cumulative_ball_integral(f, m.into(), ctx)?;
                    Ok((m, g * ctx.p_pow(&((ctx.real(*lambda) - ctx.int(1)) * ctx.int(m)))))
                })
                .collect()
        }
        Lemma::L2 { k, beta, epsilon, alpha } => {
            if !(*epsilon > 0.0 && beta + epsilon < 1.0) {
                return Err(Error::ParamOutOfRange(format!(
                    "need epsilon > 0 and beta + epsilon < 1, got beta={beta} epsilon={epsilon}"
                )));
            }
            if ladder[0] < 1 {
                return Err(Error::ParamOutOfRange("small-ball radii need R >= 1".into()));
            }
            ladder
                .iter()
                .map(|&r| {
                    let kern = smallball_kernel_integral(*k, *beta, r, *alpha, ctx)?;
                    Ok((r, kern * ctx.p_pow(&((ctx.int(1) - ctx.real(*beta) - ctx.real(*epsilon)) * ctx.int(r)))))
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> NumericContext {
        NumericContext::with_prime(p).unwrap()
    }

    #[test]
    fn zero_function_gives_zero_rows() {
        let c = ctx(2);
        let z = RadialFunction::zero();
        for th in [Theorem::T1, Theorem::T3, Theorem::T4] {
            let rep = residual_scan(th, &z, 0, &default_ladder(th), 2.0, &ScanOptions::default(), &c).unwrap();
            assert!(rep.rows.iter().all(|r| r.computed.is_zero() && r.abs_err.is_zero()));
        }
        let rows = lemma_decay_check(&Lemma::L1 { f: z, lambda: 0.5 }, &[10, 20], &c).unwrap();
        assert!(rows.iter().all(|r| r.1.is_zero()));
    }

    #[test]
    fn monomial_combos_are_exact_at_the_origin() {
        let c = ctx(3);
        let f = RadialFunction::LinearCombo(vec![
            (2.0, RadialFunction::monomial(2.0)),
            (-1.0, RadialFunction::monomial(0.5)),
        ]);
        let rep = residual_scan(Theorem::T1, &f, 1, &[-2, -7, -12], 1.5, &ScanOptions::default(), &c).unwrap();
        for row in &rep.rows {
            let bound = ialpha_eval(&f, row.x_exp.into(), 1.5, &c).unwrap().truncation_bound;
            assert!(row.abs_err <= bound, "x={}", row.x_exp);
        }
        assert_eq!(rep.params.scales, vec![0.5, 2.0]);
        assert_eq!(rep.rows.iter().map(|r| r.x_exp).collect::<Vec<_>>(), vec![-12, -7, -2]);
    }

    #[test]
    fn hypotheses_are_checked() {
        let c = ctx(2);
        let opts = ScanOptions::default();
        assert!(matches!(
            residual_scan(Theorem::T1, &RadialFunction::indicator(0), 0, &[-4], 2.0, &opts, &c),
            Err(Error::HypothesisMismatch(_))
        ));
        assert!(matches!(
            residual_scan(Theorem::T3, &RadialFunction::capped_power(1.0).unwrap(), 0, &[4], 2.0, &opts, &c),
            Err(Error::HypothesisMismatch(_))
        ));
        assert!(matches!(
            ratio_bound_check(&RadialFunction::capped_power(0.5).unwrap(), &[5], 2.0, &c),
            Err(Error::HypothesisMismatch(_))
        ));
        assert!(matches!(
            lemma_decay_check(&Lemma::L2 { k: 0, beta: 0.6, epsilon: 0.5, alpha: 2.0 }, &[1], &c),
            Err(Error::ParamOutOfRange(_))
        ));
    }

    #[test]
    fn t3_improves_with_order() {
        let c = ctx(2);
        let f = RadialFunction::log_power(0.5, 2.0);
        let opts = ScanOptions::default();
        let r0 = residual_scan(Theorem::T3, &f, 0, &[30], 2.0, &opts, &c).unwrap();
        let r2 = residual_scan(Theorem::T3, &f, 2, &[30], 2.0, &opts, &c).unwrap();
        assert!(r2.rows[0].abs_err < r0.rows[0].abs_err);
    }

    #[test]
    fn ratio_bound_properties() {
        let c = ctx(2);
        let f = RadialFunction::capped_power(2.0).unwrap();
        let one = ratio_bound_check(&f, &[7], 2.0, &c).unwrap();
        assert_eq!(one.c_hat, one.d_hat);
        let base = ratio_bound_check(&f, &[5, 10, 20], 2.0, &c).unwrap();
        let five = ratio_bound_check(&f.clone().scaled(5.0), &[5, 10, 20], 2.0, &c).unwrap();
        for (a, b) in base.rows.iter().zip(&five.rows) {
            assert!((c.int(5) * &a.1).rel_diff(&b.1) < 1e-60);
        }
    }

    #[test]
    fn indicator_ratio_tends_to_a_constant() {
        // For |x| = p^N > 1, I^α 1_{|y|≤1} = C (1-1/p) Σ_{j≤0} p^j (p^{N(α-1)} - p^{j(α-1)}),
        // so the ratio tends to |C| (1-1/p) Σ_{j≤0} p^j = |C|.
        let c = ctx(2);
        let rep = ratio_bound_check(&RadialFunction::indicator(0), &[10, 20, 40], 2.0, &c).unwrap();
        let limit = crate::padic::prefactor(&c, 2.0).unwrap().abs();
        assert!(rep.rows[2].1.rel_diff(&limit) < 1e-10);
    }

    #[test]
    fn lemma_rows() {
        let c = ctx(2);
        let f = RadialFunction::capped_power(0.7).unwrap();
        let rows = lemma_decay_check(&Lemma::L1 { f, lambda: 0.5 }, &(10..=40).collect::<Vec<_>>(), &c).unwrap();
        assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));
        let rows =
            lemma_decay_check(&Lemma::L2 { k: 0, beta: 0.0, epsilon: 0.05, alpha: 2.0 }, &(1..=30).collect::<Vec<_>>(), &c)
                .unwrap();
        let max = rows.iter().map(|r| r.1.to_f64()).fold(0.0, f64::max);
        let min = rows.iter().map(|r| r.1.to_f64()).fold(f64::INFINITY, f64::min);
        assert!(max / min < 5.0);
    }
}
