//! Balls, spheres and Haar measure on `Q_p`.
//!
//! The closed-form integrals here are the building blocks of everything else:
//!
//! * `∫_{|x| ≤ p^n} |x|^(α-1) dx = (1 - 1/p) / (1 - p^-α) · p^(αn)`
//! * `∫_{|x| = p^n} dx = (1 - 1/p) p^n`
//! * `∫_{|t| = 1} |1 - t|^(α-1) dt = (p - 2 + p^-α) / (p (1 - p^-α))`
//!
//! The second half of the module provides truncated p-adic expansions and a
//! sampler for the normalised Haar measure, used by the Monte Carlo oracles.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::context::NumericContext;
use crate::error::{Error, Result};
use crate::real::Real;

/// Exponent `n` of a radius `p^n`, or the radius of the single point `0`.
///
/// `Zero` orders strictly below every finite exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BallExponent {
    Zero,
    Finite(i64),
}

impl BallExponent {
    pub fn finite(self) -> Option<i64> {
        match self {
            BallExponent::Zero => None,
            BallExponent::Finite(n) => Some(n),
        }
    }
}

impl From<i64> for BallExponent {
    fn from(n: i64) -> Self {
        BallExponent::Finite(n)
    }
}

impl PartialOrd for BallExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BallExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        use BallExponent::*;
        match (self, other) {
            (Zero, Zero) => Ordering::Equal,
            (Zero, Finite(_)) => Ordering::Less,
            (Finite(_), Zero) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for BallExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BallExponent::Zero => f.write_str("zero"),
            BallExponent::Finite(n) => write!(f, "{n}"),
        }
    }
}

pub(crate) fn check_alpha_positive(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange { alpha, expected: "alpha > 0" })
    }
}

pub(crate) fn check_alpha_above_one(alpha: f64, ctx: &NumericContext) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 && alpha - 1.0 > ctx.rel_tol() {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange { alpha, expected: "alpha > 1" })
    }
}

/// `∫_{|x| ≤ p^n} |x|^(α-1) dx`; for `α = 1` this is the ball measure `p^n`.
pub fn ball_power_integral(ctx: &NumericContext, alpha: f64, n: i64) -> Result<Real> {
    check_alpha_positive(alpha)?;
    let a = ctx.real(alpha);
    let numer = ctx.unit_sphere();
    let denom = ctx.int(1) - ctx.p_pow(&-&a);
    Ok(numer / denom * ctx.p_pow(&(a * ctx.int(n))))
}

/// Haar measure of the sphere `|x| = p^n`.
pub fn sphere_measure(ctx: &NumericContext, n: i64) -> Real {
    ctx.unit_sphere() * ctx.p_powi(n)
}

/// `U(α, p) = ∫_{|t| = 1} |1 - t|^(α-1) dt`.
pub fn unit_kernel_integral(ctx: &NumericContext, alpha: f64) -> Result<Real> {
    check_alpha_above_one(alpha, ctx)?;
    let p = ctx.p();
    let p_neg_alpha = ctx.p_pow_f64(-alpha);
    let numer = &p - ctx.int(2) + &p_neg_alpha;
    let denom = &p * (ctx.int(1) - p_neg_alpha);
    Ok(numer / denom)
}

/// `U(α, p) - (1 - 1/p)`, the unit-sphere part of the operator kernel,
/// evaluated in the cancellation-free form `(p^(1-α) - 1) / (p (1 - p^-α))`.
pub fn unit_sphere_kernel_excess(ctx: &NumericContext, alpha: f64) -> Result<Real> {
    check_alpha_above_one(alpha, ctx)?;
    let numer = ctx.p_pow(&(ctx.int(1) - ctx.real(alpha))) - ctx.int(1);
    let denom = ctx.p() * (ctx.int(1) - ctx.p_pow_f64(-alpha));
    Ok(numer / denom)
}

/// The operator prefactor `C(α, p) = (1 - p^-α) / (1 - p^(α-1))`, negative
/// for every `α > 1`.
pub fn prefactor(ctx: &NumericContext, alpha: f64) -> Result<Real> {
    check_alpha_above_one(alpha, ctx)?;
    let numer = ctx.int(1) - ctx.p_pow_f64(-alpha);
    let denom = ctx.int(1) - ctx.p_pow(&(ctx.real(alpha) - ctx.int(1)));
    Ok(numer / denom)
}

/// A p-adic number known to finitely many digits:
/// `x = Σ_{i < len} digits[i] · p^(valuation + i) + O(p^(valuation + len))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicApprox {
    prime: u64,
    /// `None` for the exact zero.
    valuation: Option<i64>,
    digits: Vec<u64>,
}

impl PadicApprox {
    /// Builds an approximation from raw digits; leading zero digits are
    /// shifted into the valuation. All-zero input gives the exact zero.
    pub fn from_digits(prime: u64, valuation: i64, digits: Vec<u64>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::ParamOutOfRange("digit precision must be at least 1".into()));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= prime) {
            return Err(Error::ParamOutOfRange(format!("digit {d} is not below p = {prime}")));
        }
        let precision = digits.len();
        match digits.iter().position(|&d| d != 0) {
            None => Ok(PadicApprox { prime, valuation: None, digits: vec![0; precision] }),
            Some(shift) => {
                let mut digits = digits[shift..].to_vec();
                digits.resize(precision, 0);
                Ok(PadicApprox { prime, valuation: Some(valuation + shift as i64), digits })
            }
        }
    }

    /// The non-negative integer `n`, to `precision` digits.
    pub fn from_u64(prime: u64, mut n: u64, precision: usize) -> Result<Self> {
        let mut digits = Vec::with_capacity(precision);
        for _ in 0..precision {
            digits.push(n % prime);
            n /= prime;
        }
        Self::from_digits(prime, 0, digits)
    }

    /// `p^k`, whose absolute value is `p^-k`.
    pub fn prime_power(prime: u64, k: i64, precision: usize) -> Self {
        let mut digits = vec![0; precision.max(1)];
        digits[0] = 1;
        PadicApprox { prime, valuation: Some(k), digits }
    }

    pub fn exact_zero(prime: u64, precision: usize) -> Self {
        PadicApprox { prime, valuation: None, digits: vec![0; precision.max(1)] }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn digit_precision(&self) -> usize {
        self.digits.len()
    }

    /// `|x|_p` as a radius exponent: `p^(-valuation)`.
    pub fn abs_exponent(&self) -> BallExponent {
        match self.valuation {
            None => BallExponent::Zero,
            Some(v) => BallExponent::Finite(-v),
        }
    }

    fn digit_at(&self, position: i64) -> u64 {
        match self.valuation {
            None => 0,
            Some(v) if position < v => 0,
            Some(v) => self.digits.get((position - v) as usize).copied().unwrap_or(0),
        }
    }

    /// First position whose digit is unknown.
    fn known_until(&self) -> Option<i64> {
        self.valuation.map(|v| v + self.digits.len() as i64)
    }

    /// Appends `extra` further i.i.d. uniform digits. For a Haar sample this
    /// refines the same draw rather than producing a new one.
    pub fn extend_digits<R: Rng + ?Sized>(&mut self, extra: usize, rng: &mut R) {
        for _ in 0..extra {
            self.digits.push(rng.gen_range(0..self.prime));
        }
    }
}

/// `|x - y|_p = p^e`, by digitwise subtraction with borrow.
///
/// Only digits known for both operands are compared; if they all cancel the
/// difference is unresolved and `PrecisionExhausted` is returned instead of a
/// spurious zero.
pub fn padic_sub_abs(x: &PadicApprox, y: &PadicApprox) -> Result<BallExponent> {
    if x.prime != y.prime {
        return Err(Error::PrimeMismatch(x.prime, y.prime));
    }
    let precision = x.digit_precision().min(y.digit_precision());
    let (start, end) = match (x.valuation, y.valuation) {
        (None, None) => return Err(Error::PrecisionExhausted(precision)),
        (None, Some(_)) => return Ok(y.abs_exponent()),
        (Some(_), None) => return Ok(x.abs_exponent()),
        (Some(vx), Some(vy)) => {
            let end = x.known_until().unwrap().min(y.known_until().unwrap());
            (vx.min(vy), end)
        }
    };
    let p = x.prime as i64;
    let mut borrow = 0i64;
    for pos in start..end {
        let mut d = x.digit_at(pos) as i64 - y.digit_at(pos) as i64 - borrow;
        if d < 0 {
            d += p;
            borrow = 1;
        } else {
            borrow = 0;
        }
        if d != 0 {
            return Ok(BallExponent::Finite(-pos));
        }
    }
    Err(Error::PrecisionExhausted((end - start) as usize))
}

/// A seeded random stream that can be split into independent substreams.
///
/// Substreams are ChaCha8 streams keyed by the same seed and distinct
/// stream ids, so a computation split over chunks is reproducible no matter
/// how the chunks are scheduled.
#[derive(Debug, Clone)]
pub struct SampleStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent substream number `index`.
    pub fn split(&self, index: u64) -> SampleStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index + 1);
        SampleStream { seed: self.seed, rng }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Draws `y` from the Haar measure restricted to `|y| ≤ p^n`, normalised to
/// a probability.
///
/// The expansion of `y` starts at `p^-n` with i.i.d. uniform digits. Leading
/// zeros are consumed until the first non-zero digit, so the valuation is
/// exact and the returned approximation carries `digit_precision` digits
/// from there on. Hence `P(|y| = p^j) = (1 - 1/p) p^(j-n)` for `j ≤ n`.
pub fn haar_sample_ball<R: Rng + ?Sized>(
    ctx: &NumericContext,
    n: i64,
    digit_precision: usize,
    rng: &mut R,
) -> Result<PadicApprox> {
    if digit_precision < 8 {
        return Err(Error::ParamOutOfRange(format!(
            "digit precision {digit_precision} is below the minimum of 8"
        )));
    }
    let p = ctx.prime();
    let mut valuation = -n;
    let lead = loop {
        let d = rng.gen_range(0..p);
        if d != 0 {
            break d;
        }
        valuation += 1;
    };
    let mut digits = Vec::with_capacity(digit_precision);
    digits.push(lead);
    for _ in 1..digit_precision {
        digits.push(rng.gen_range(0..p));
    }
    Ok(PadicApprox { prime: p, valuation: Some(valuation), digits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn ctx(p: u64) -> NumericContext {
        NumericContext::with_prime(p).unwrap()
    }

    #[test]
    fn zero_exponent_is_below_everything() {
        assert!(BallExponent::Zero < BallExponent::Finite(i64::MIN));
        assert!(BallExponent::Finite(-3) < BallExponent::Finite(2));
    }

    #[test]
    fn ball_measure_and_power_integral() {
        assert_eq!(ball_power_integral(&ctx(3), 1.0, 2).unwrap().to_f64(), 9.0);
        let v = ball_power_integral(&ctx(2), 2.0, 0).unwrap();
        assert!((v.to_f64() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            ball_power_integral(&ctx(2), 0.0, 0),
            Err(Error::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn ball_power_integral_by_sphere_sums() {
        // Σ_{j ≤ 0} (1 - 1/p) p^j p^{j(α-1)}, truncated at j = -200.
        let c = ctx(2);
        let mut acc = c.int(0);
        for j in (-200..=0).rev() {
            acc = acc + sphere_measure(&c, j) * c.p_powi(j);
        }
        let closed = ball_power_integral(&c, 2.0, 0).unwrap();
        assert!(acc.rel_diff(&closed) < 1e-55);
    }

    #[test]
    fn sphere_measures() {
        assert_eq!(sphere_measure(&ctx(5), 0).to_f64(), 0.8);
        assert_eq!(sphere_measure(&ctx(2), 3).to_f64(), 4.0);
        let c = ctx(3);
        let total: Real = (-50..=4).map(|j| sphere_measure(&c, j)).sum();
        let ball = ball_power_integral(&c, 1.0, 4).unwrap();
        assert!(total.rel_diff(&ball) < 1e-20);
    }

    #[test]
    fn unit_kernel_values() {
        let u = unit_kernel_integral(&ctx(2), 2.0).unwrap();
        assert!((u.to_f64() - 1.0 / 6.0).abs() < 1e-16);
        let u3 = unit_kernel_integral(&ctx(3), 2.0).unwrap();
        assert!((u3.to_f64() - 5.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn unit_kernel_level_sets() {
        // |1 - t| = 1 on p - 2 of the p - 1 unit residue classes; on t ≡ 1
        // it equals p^-j on a set of measure (1 - 1/p) p^-j.
        for &p in &[2u64, 3, 5, 7] {
            let c = ctx(p);
            for &alpha in &[1.5, 2.0, 3.25] {
                let mut acc = (c.p() - c.int(2)) / c.p();
                for j in 1..400 {
                    acc = acc + c.unit_sphere() * c.p_powi(-j) * c.p_pow_f64(-(j as f64) * (alpha - 1.0));
                }
                let closed = unit_kernel_integral(&c, alpha).unwrap();
                assert!(acc.rel_diff(&closed) < 10.0 * c.rel_tol(), "p={p} alpha={alpha}");
            }
        }
    }

    #[test]
    fn unit_sphere_excess_identity() {
        for &p in &[2u64, 3, 5] {
            let c = ctx(p);
            for &alpha in &[1.25, 2.0, 3.0, 4.5] {
                let lhs = unit_kernel_integral(&c, alpha).unwrap() - c.unit_sphere();
                let rhs = unit_sphere_kernel_excess(&c, alpha).unwrap();
                assert!(lhs.rel_diff(&rhs) < 10.0 * c.rel_tol());
            }
        }
    }

    #[test]
    fn prefactor_values_and_sign() {
        assert_eq!(prefactor(&ctx(2), 2.0).unwrap().to_f64(), -0.75);
        let c = prefactor(&ctx(3), 1.5).unwrap().to_f64();
        let expect = (1.0 - 3f64.powf(-1.5)) / (1.0 - 3f64.sqrt());
        assert!((c - expect).abs() < 1e-14);
        assert!((c + 1.10264).abs() < 1e-3);
        for &p in &[2u64, 3, 5, 7] {
            for i in 0..=29 {
                let alpha = 1.1 + 0.1 * i as f64;
                assert!(prefactor(&ctx(p), alpha).unwrap().is_negative());
            }
        }
        assert!(prefactor(&ctx(2), 1.0).is_err());
        assert!(prefactor(&ctx(2), 1.0 + 1e-40).is_err());
    }

    #[test]
    fn prefactor_stable_under_doubled_precision() {
        let lo = ctx(3);
        let hi = lo.with_precision(512).unwrap();
        let a = prefactor(&lo, 1.5).unwrap();
        let b = prefactor(&hi, 1.5).unwrap();
        assert!(a.rel_diff(&b) < 2f64.powi(-128));
    }

    #[test]
    fn sub_abs_examples() {
        let one = PadicApprox::from_u64(5, 1, 10).unwrap();
        let two = PadicApprox::from_u64(5, 2, 10).unwrap();
        let six = PadicApprox::from_u64(5, 6, 10).unwrap();
        assert_eq!(padic_sub_abs(&one, &two).unwrap(), BallExponent::Finite(0));
        assert_eq!(padic_sub_abs(&one, &six).unwrap(), BallExponent::Finite(-1));
        assert!(matches!(padic_sub_abs(&one, &one), Err(Error::PrecisionExhausted(_))));
        let zero = PadicApprox::exact_zero(5, 10);
        assert_eq!(padic_sub_abs(&zero, &six).unwrap(), BallExponent::Finite(0));
        let p2 = PadicApprox::from_u64(2, 1, 10).unwrap();
        assert!(matches!(padic_sub_abs(&p2, &one), Err(Error::PrimeMismatch(2, 5))));
    }

    #[test]
    fn sub_abs_with_borrow_chain() {
        // 1 - (1 + 4·5 + 4·25) = -120 = -(4·5 + 4·25), so |·| = 5^-1.
        let x = PadicApprox::from_u64(5, 1, 8).unwrap();
        let y = PadicApprox::from_u64(5, 121, 8).unwrap();
        assert_eq!(padic_sub_abs(&x, &y).unwrap(), BallExponent::Finite(-1));
        // 125 - 1 = 124: unit.
        let z = PadicApprox::from_u64(5, 125, 8).unwrap();
        assert_eq!(padic_sub_abs(&z, &x).unwrap(), BallExponent::Finite(0));
    }

    #[test]
    fn samples_stay_in_the_ball() {
        let c = ctx(3);
        let mut s = SampleStream::new(11);
        for _ in 0..10_000 {
            let y = haar_sample_ball(&c, 2, 8, s.rng()).unwrap();
            assert!(y.abs_exponent() <= BallExponent::Finite(2));
            assert_ne!(y.digits()[0], 0);
        }
        assert!(haar_sample_ball(&c, 0, 4, s.rng()).is_err());
    }

    #[test]
    fn split_streams_are_reproducible_and_distinct() {
        let base = SampleStream::new(5);
        let a: Vec<u64> = (0..4).map(|_| 0).scan(base.split(1), |s, _| Some(s.rng().gen())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(base.split(1), |s, _| Some(s.rng().gen())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(base.split(2), |s, _| Some(s.rng().gen())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn ultrametric_equality_for_distinct_valuations(
            p in prop::sample::select(vec![2u64, 3, 5, 7]),
            seed in any::<u64>(),
            n1 in -5i64..5,
            n2 in -5i64..5,
        ) {
            let c = ctx(p);
            let mut s = SampleStream::new(seed);
            let x = haar_sample_ball(&c, n1, 12, s.rng()).unwrap();
            let y = haar_sample_ball(&c, n2, 12, s.rng()).unwrap();
            let (ex, ey) = (x.abs_exponent(), y.abs_exponent());
            prop_assume!(ex != ey);
            prop_assert_eq!(padic_sub_abs(&x, &y).unwrap(), ex.max(ey));
        }

        #[test]
        fn sub_abs_matches_integer_valuation(p in prop::sample::select(vec![2u64, 3, 5]), a in 0u64..100_000, b in 0u64..100_000) {
            prop_assume!(a != b);
            let x = PadicApprox::from_u64(p, a, 24).unwrap();
            let y = PadicApprox::from_u64(p, b, 24).unwrap();
            let mut d = a.abs_diff(b);
            let mut v = 0i64;
            while d % p == 0 {
                d /= p;
                v += 1;
            }
            prop_assert_eq!(padic_sub_abs(&x, &y).unwrap(), BallExponent::Finite(-v));
        }
    }
}
