//! Radial functions `x ↦ f(|x|_p)`.
//!
//! A radial function is determined by its values `f(p^j)` on the spheres
//! `|x| = p^j`. To integrate against it over balls we also need to know how it
//! behaves as `j → -∞`: every representation here exposes an exact power-law
//! model below some exponent (see [`InnerModel`]), so that the infinite inner
//! sums can be finished in closed form.

use serde::{Deserialize, Serialize};

use crate::context::NumericContext;
use crate::error::{Error, Result};
use crate::padic::BallExponent;
use crate::real::Real;

/// Behaviour of a tabulated function below its first stored exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerTail {
    /// `f(p^j) = a p^(jM)`; `M > -1` keeps `f` integrable at the origin.
    Power {
        a: f64,
        #[serde(rename = "M")]
        exponent: f64,
    },
    Zero,
}

/// Behaviour above the last stored exponent:
/// `f(p^j) = p^(-jβ) Σ_n a_n (log p^j)^(γ - n)`.
///
/// `beta` is only required to be non-negative. The logarithmic theorems use
/// `β ≤ 1`, but a faster decay (`β > 1`) is how a table declares the
/// `|x|^-M, M > 1` hypothesis of the two-sided bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterTail {
    pub beta: f64,
    pub gamma: f64,
    pub coeffs: Vec<f64>,
}

impl OuterTail {
    pub fn new(beta: f64, gamma: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidFunction(format!("outer tail beta = {beta} must be >= 0")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidFunction(format!("outer tail gamma = {gamma} must be >= 0")));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidFunction("outer tail needs at least one coefficient".into()));
        }
        Ok(OuterTail { beta, gamma, coeffs })
    }

    /// Value at `|x| = p^j`. Only defined for `j ≥ 1` unless every log power
    /// is a non-negative integer.
    pub fn eval(&self, j: i64, ctx: &NumericContext) -> Result<Real> {
        let log = ctx.log_abs(j);
        let mut sum = ctx.int(0);
        for (n, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            sum = sum + ctx.real(a) * log_power(&log, self.gamma - n as f64, ctx)?;
        }
        Ok(ctx.p_pow(&(ctx.real(-self.beta) * ctx.int(j))) * sum)
    }
}

/// `log^e`, with `0^0 = 1` and integer powers of negative logs allowed.
pub(crate) fn log_power(log: &Real, e: f64, ctx: &NumericContext) -> Result<Real> {
    if e == 0.0 {
        return Ok(ctx.int(1));
    }
    let positive = !log.is_negative() && !log.is_zero();
    if positive {
        return Ok(log.powf(&ctx.real(e)));
    }
    if e.fract() == 0.0 && !(log.is_zero() && e < 0.0) {
        return Ok(log.powi(e as i64));
    }
    Err(Error::LogDomain { log: log.to_f64(), exponent: e })
}

/// Values on a contiguous range of sphere exponents plus declared tails.
///
/// Values are held as [`Real`]s, so a table built from exact data keeps full
/// working precision; [`Table::new`] takes `f64`s as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    lo: i64,
    values: Vec<Real>,
    inner_tail: InnerTail,
    outer_tail: Option<OuterTail>,
}

impl Table {
    pub fn new(lo: i64, values: Vec<f64>, inner_tail: InnerTail, outer_tail: Option<OuterTail>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite table value {v}")));
        }
        // f64 -> Real is exact at any precision of at least 53 bits.
        let values = values.into_iter().map(|v| Real::from_f64(v, 64)).collect();
        Table::from_reals(lo, values, inner_tail, outer_tail)
    }

    /// A table whose values carry their own precision.
    pub fn from_reals(lo: i64, values: Vec<Real>, inner_tail: InnerTail, outer_tail: Option<OuterTail>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFunction("table has no values".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite table value {v}")));
        }
        if let InnerTail::Power { a, exponent } = inner_tail {
            if !a.is_finite() || !exponent.is_finite() {
                return Err(Error::InvalidFunction("non-finite inner tail".into()));
            }
        }
        Ok(Table { lo, values, inner_tail, outer_tail })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    pub fn inner_tail(&self) -> &InnerTail {
        &self.inner_tail
    }

    pub fn outer_tail(&self) -> Option<&OuterTail> {
        self.outer_tail.as_ref()
    }

    /// `(exponent, value)` pairs in increasing exponent order, rounded to `f64`.
    pub fn rows(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.lo + i as i64, v.to_f64()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadialFunction {
    /// `|x|^M`.
    Monomial { exponent: f64 },
    /// `|x|^-β (log|x|)^γ` for `|x| ≥ 1` (with `0^0 = 1` at `|x| = 1`) and
    /// the constant `cap` for `|x| < 1`.
    LogPower { beta: f64, gamma: f64, cap: f64 },
    /// Indicator of the ball `|x| ≤ p^n`.
    Indicator { n: i64 },
    Table(Table),
    LinearCombo(Vec<(f64, RadialFunction)>),
}

/// One power-law piece `coeff · p^(j · exponent)` of an inner model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

/// Exact description of `f(p^j)` for every `j < below` as a finite sum of
/// power laws. `below = None` means the model holds for all `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerModel {
    pub below: Option<i64>,
    pub terms: Vec<PowerTerm>,
}

impl InnerModel {
    fn merge(self, other: InnerModel, scale: f64) -> InnerModel {
        let below = match (self.below, other.below) {
            (None, b) | (b, None) => b,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let mut terms = self.terms;
        terms.extend(other.terms.into_iter().map(|t| PowerTerm { coeff: t.coeff * scale, exponent: t.exponent }));
        InnerModel { below, terms }
    }

    /// First exponent, counting downwards from `top`, from which the model
    /// takes over.
    pub fn start_below(&self, top: i64) -> i64 {
        self.below.map_or(top, |b| b.min(top))
    }

    pub fn eval(&self, j: i64, ctx: &NumericContext) -> Real {
        self.terms
            .iter()
            .map(|t| ctx.real(t.coeff) * ctx.p_pow(&(ctx.real(t.exponent) * ctx.int(j))))
            .fold(ctx.int(0), |a, b| a + b)
    }

    /// Errors unless every term is integrable at the origin.
    pub fn check_integrable(&self) -> Result<()> {
        match self.terms.iter().find(|t| t.coeff != 0.0 && t.exponent <= -1.0) {
            Some(t) => Err(Error::DivergentInnerSum(t.exponent)),
            None => Ok(()),
        }
    }
}

impl RadialFunction {
    pub fn monomial(exponent: f64) -> Self {
        RadialFunction::Monomial { exponent }
    }

    pub fn log_power(beta: f64, gamma: f64) -> Self {
        RadialFunction::LogPower { beta, gamma, cap: 0.0 }
    }

    pub fn indicator(n: i64) -> Self {
        RadialFunction::Indicator { n }
    }

    /// The function that vanishes identically.
    pub fn zero() -> Self {
        RadialFunction::LinearCombo(Vec::new())
    }

    /// `min(1, |x|^-decay)`: one on the unit ball, a pure power outside.
    pub fn capped_power(decay: f64) -> Result<Self> {
        Ok(RadialFunction::Table(Table::new(
            0,
            vec![1.0],
            InnerTail::Power { a: 1.0, exponent: 0.0 },
            Some(OuterTail::new(decay, 0.0, vec![1.0])?),
        )?))
    }

    pub fn scaled(self, c: f64) -> Self {
        RadialFunction::LinearCombo(vec![(c, self)])
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            RadialFunction::LinearCombo(terms) => {
                terms.iter().all(|(c, f)| *c == 0.0 || f.is_identically_zero())
            }
            RadialFunction::Table(t) => {
                t.values.iter().all(|v| v.is_zero())
                    && matches!(t.inner_tail, InnerTail::Zero | InnerTail::Power { a: 0.0, .. })
                    && t.outer_tail.as_ref().is_none_or(|o| o.coeffs.iter().all(|&a| a == 0.0))
            }
            _ => false,
        }
    }

    /// Checks the structural invariants of every form.
    pub fn validate(&self) -> Result<()> {
        match self {
            RadialFunction::Monomial { exponent } if !exponent.is_finite() => {
                Err(Error::InvalidFunction(format!("monomial exponent {exponent}")))
            }
            RadialFunction::LogPower { beta, gamma, cap } => {
                if !beta.is_finite() || !cap.is_finite() || !(*gamma >= 0.0 && gamma.is_finite()) {
                    Err(Error::InvalidFunction(format!("log power beta={beta} gamma={gamma} cap={cap}")))
                } else {
                    Ok(())
                }
            }
            RadialFunction::LinearCombo(terms) => terms.iter().try_for_each(|(_, f)| f.validate()),
            _ => Ok(()),
        }
    }

    /// `f(p^j)`. At the origin this is the limit where one exists.
    pub fn eval_sphere(&self, j: BallExponent, ctx: &NumericContext) -> Result<Real> {
        match j {
            BallExponent::Finite(j) => self.eval_at(j, ctx),
            BallExponent::Zero => self.limit_at_zero(ctx),
        }
    }

    pub(crate) fn eval_at(&self, j: i64, ctx: &NumericContext) -> Result<Real> {
        match self {
            RadialFunction::Monomial { exponent } => Ok(ctx.p_pow(&(ctx.real(*exponent) * ctx.int(j)))),
            RadialFunction::LogPower { beta, gamma, cap } => {
                if j < 0 {
                    Ok(ctx.real(*cap))
                } else {
                    let log = ctx.log_abs(j);
                    Ok(ctx.p_pow(&(ctx.real(-beta) * ctx.int(j))) * log_power(&log, *gamma, ctx)?)
                }
            }
            RadialFunction::Indicator { n } => Ok(ctx.int(if j <= *n { 1 } else { 0 })),
            RadialFunction::Table(t) => {
                if j < t.lo {
                    Ok(match t.inner_tail {
                        InnerTail::Zero => ctx.int(0),
                        InnerTail::Power { a, exponent } => {
                            ctx.real(a) * ctx.p_pow(&(ctx.real(exponent) * ctx.int(j)))
                        }
                    })
                } else if j <= t.hi() {
                    Ok(t.values[(j - t.lo) as usize].with_precision(ctx.precision_bits()))
                } else {
                    match &t.outer_tail {
                        Some(o) => o.eval(j, ctx),
                        None => Err(Error::MissingTail(j)),
                    }
                }
            }
            RadialFunction::LinearCombo(terms) => {
                let mut acc = ctx.int(0);
                for (c, f) in terms {
                    if *c != 0.0 {
                        acc = acc + ctx.real(*c) * f.eval_at(j, ctx)?;
                    }
                }
                Ok(acc)
            }
        }
    }

    fn limit_at_zero(&self, ctx: &NumericContext) -> Result<Real> {
        let model = self.inner_model();
        let mut acc = ctx.int(0);
        for t in &model.terms {
            if t.coeff == 0.0 || t.exponent > 0.0 {
                continue;
            }
            if t.exponent == 0.0 {
                acc = acc + ctx.real(t.coeff);
            } else {
                return Err(Error::UndefinedAtZero);
            }
        }
        Ok(acc)
    }

    /// The exact power-law model of `f` near the origin.
    pub fn inner_model(&self) -> InnerModel {
        match self {
            RadialFunction::Monomial { exponent } => InnerModel {
                below: None,
                terms: vec![PowerTerm { coeff: 1.0, exponent: *exponent }],
            },
            RadialFunction::LogPower { cap, .. } => InnerModel {
                below: Some(0),
                terms: if *cap == 0.0 { vec![] } else { vec![PowerTerm { coeff: *cap, exponent: 0.0 }] },
            },
            RadialFunction::Indicator { n } => InnerModel {
                below: Some(n + 1),
                terms: vec![PowerTerm { coeff: 1.0, exponent: 0.0 }],
            },
            RadialFunction::Table(t) => InnerModel {
                below: Some(t.lo),
                terms: match t.inner_tail {
                    InnerTail::Zero => vec![],
                    InnerTail::Power { a, exponent } => vec![PowerTerm { coeff: a, exponent }],
                },
            },
            RadialFunction::LinearCombo(terms) => terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .fold(InnerModel { below: None, terms: vec![] }, |acc, (c, f)| acc.merge(f.inner_model(), *c)),
        }
    }

    /// The declared expansion at infinity, when `f` has one:
    /// `f(x) = |x|^-β Σ a_n (log|x|)^(γ-n)` for all `|x| > 1` beyond the
    /// stored range.
    pub fn outer_expansion(&self) -> Option<OuterTail> {
        match self {
            RadialFunction::LogPower { beta, gamma, .. } => Some(OuterTail {
                beta: *beta,
                gamma: *gamma,
                coeffs: vec![1.0],
            }),
            RadialFunction::Monomial { exponent } if *exponent <= 0.0 => Some(OuterTail {
                beta: -exponent,
                gamma: 0.0,
                coeffs: vec![1.0],
            }),
            RadialFunction::Table(t) => t.outer_tail.clone(),
            RadialFunction::LinearCombo(terms) => {
                let live: Vec<_> = terms.iter().filter(|(c, _)| *c != 0.0).collect();
                match live.as_slice() {
                    [(c, f)] => f.outer_expansion().map(|mut o| {
                        o.coeffs.iter_mut().for_each(|a| *a *= c);
                        o
                    }),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Polynomial decay exponent `M` with `|f| ≤ C |x|^-M` at infinity, when
    /// it is known. Compactly supported functions report infinity.
    pub fn outer_decay(&self) -> Option<f64> {
        match self {
            RadialFunction::Indicator { .. } => Some(f64::INFINITY),
            RadialFunction::Monomial { exponent } => Some(-exponent),
            RadialFunction::LogPower { beta, gamma, .. } => {
                // A positive log power costs an arbitrarily small amount of decay.
                Some(if *gamma > 0.0 { beta - 1e-9 } else { *beta })
            }
            RadialFunction::Table(t) => match &t.outer_tail {
                None => None,
                Some(o) if o.coeffs.iter().all(|&a| a == 0.0) => Some(f64::INFINITY),
                Some(o) if o.gamma > 0.0 => Some(o.beta - 1e-9),
                Some(o) => Some(o.beta),
            },
            RadialFunction::LinearCombo(terms) => terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(_, f)| f.outer_decay())
                .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d))),
        }
    }

    /// Tabulates `f` on `[lo, hi]`, keeping the inner and outer models
    /// where they are single power laws. Values are rounded to `f64`, the
    /// precision of the table file format.
    pub fn to_table(&self, lo: i64, hi: i64, ctx: &NumericContext) -> Result<Table> {
        if hi < lo {
            return Err(Error::ParamOutOfRange(format!("empty table range [{lo}, {hi}]")));
        }
        if let RadialFunction::Table(t) = self {
            if t.lo == lo && t.hi() == hi {
                return Ok(t.clone());
            }
        }
        let model = self.inner_model();
        if let Some(below) = model.below.filter(|&b| b < lo) {
            return Err(Error::ParamOutOfRange(format!(
                "table start {lo} lies above where the inner model takes over ({below})"
            )));
        }
        let inner_tail = match model.terms.iter().filter(|t| t.coeff != 0.0).collect::<Vec<_>>().as_slice() {
            [] => InnerTail::Zero,
            [t] => InnerTail::Power { a: t.coeff, exponent: t.exponent },
            _ => {
                return Err(Error::InvalidFunction(
                    "inner behaviour is not a single power law; cannot tabulate".into(),
                ))
            }
        };
        let values = (lo..=hi).map(|j| self.eval_at(j, ctx).map(|v| v.to_f64())).collect::<Result<Vec<_>>>()?;
        let outer_tail = match self {
            RadialFunction::Indicator { n } if *n <= hi => Some(OuterTail::new(0.0, 0.0, vec![0.0])?),
            _ => self.outer_expansion(),
        };
        Table::new(lo, values, inner_tail, outer_tail)
    }
}

/// `Σ_{j ≤ top} p^(j s) = p^(top s) / (1 - p^-s)` for `s > 0`.
pub(crate) fn geometric_below(ctx: &NumericContext, s: &Real, top: i64) -> Real {
    ctx.p_pow(&(s * ctx.int(top))) / (ctx.int(1) - ctx.p_pow(&-s))
}

/// `G_1(p^n) = ∫_{|y| ≤ p^n} f(y) dy`.
pub fn cumulative_ball_integral(f: &RadialFunction, n: BallExponent, ctx: &NumericContext) -> Result<Real> {
    cumulative_ball_integral_with_bound(f, n, ctx).map(|(v, _)| v)
}

/// [`cumulative_ball_integral`] with a bound on its accumulated rounding error.
pub fn cumulative_ball_integral_with_bound(
    f: &RadialFunction,
    n: BallExponent,
    ctx: &NumericContext,
) -> Result<(Real, Real)> {
    let n = match n {
        BallExponent::Zero => return Ok((ctx.int(0), ctx.int(0))),
        BallExponent::Finite(n) => n,
    };
    let model = f.inner_model();
    model.check_integrable()?;
    let start = model.start_below(n + 1);
    let sphere = ctx.unit_sphere();
    let mut total = ctx.int(0);
    let mut magnitude = ctx.int(0);
    let mut count = 0i64;
    for j in start..=n {
        let term = f.eval_at(j, ctx)? * &sphere * ctx.p_powi(j);
        magnitude = magnitude + term.abs();
        total = total + term;
        count += 1;
    }
    for t in &model.terms {
        if t.coeff == 0.0 {
            continue;
        }
        let s = ctx.real(t.exponent) + ctx.int(1);
        let term = ctx.real(t.coeff) * &sphere * geometric_below(ctx, &s, start - 1);
        magnitude = magnitude + term.abs();
        total = total + term;
        count += 4;
    }
    let bound = magnitude * ctx.ulp() * ctx.int(count + 4);
    Ok((total, bound))
}
