//! Exact rational arithmetic for integer `α` and `β = 0`.
//!
//! With an integer exponent every closed form in this crate is a rational
//! function of `p`, except for the powers of `ln p` introduced by logarithmic
//! weights. Those are carried symbolically: a [`LogScaled`] value is a
//! rational times `(ln p)^k`. These routines serve as exact regression
//! oracles for the floating-point paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::context::NumericContext;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::series::{phi_numerator, MAX_PHI_ORDER};

pub type Rational = BigRational;

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn check_prime(p: u64) -> Result<()> {
    if crate::context::is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

fn check_alpha(alpha: u32, min: u32) -> Result<()> {
    if alpha >= min {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange {
            alpha: alpha as f64,
            expected: if min > 1 { "integer alpha >= 2" } else { "integer alpha >= 1" },
        })
    }
}

/// `p^n` as an exact rational.
pub fn p_pow(p: u64, n: i64) -> Rational {
    let base = int(p as i64);
    if n >= 0 {
        num_traits::pow(base, n as usize)
    } else {
        num_traits::pow(base, n.unsigned_abs() as usize).recip()
    }
}

/// A rational multiple of `(ln p)^log_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogScaled {
    pub coeff: Rational,
    pub log_power: u32,
}

impl LogScaled {
    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Numeric value under the context's log convention.
    pub fn to_real(&self, ctx: &NumericContext) -> Real {
        rational_to_real(&self.coeff, ctx.precision_bits()) * ctx.log_unit().powi(self.log_power as i64)
    }
}

/// Rounds a rational into a [`Real`] at `precision` bits.
pub fn rational_to_real(q: &Rational, precision: usize) -> Real {
    let work = precision + 64;
    let num = bigint_to_real(q.numer(), work);
    let den = bigint_to_real(q.denom(), work);
    (num / den).with_precision(precision)
}

fn bigint_to_real(n: &BigInt, precision: usize) -> Real {
    // Horner over base-2^32 limbs.
    let (sign, limbs) = n.to_u32_digits();
    let radix = Real::from_i64(1 << 32, precision);
    let mut acc = Real::zero(precision);
    for &limb in limbs.iter().rev() {
        acc = acc * &radix + Real::from_i64(limb as i64, precision);
    }
    if sign == num_bigint::Sign::Minus {
        -acc
    } else {
        acc
    }
}

pub fn ball_power_integral(p: u64, alpha: u32, n: i64) -> Result<Rational> {
    check_prime(p)?;
    check_alpha(alpha, 1)?;
    let numer = int(1) - p_pow(p, -1);
    let denom = int(1) - p_pow(p, -(alpha as i64));
    Ok(numer / denom * p_pow(p, alpha as i64 * n))
}

pub fn sphere_measure(p: u64, n: i64) -> Result<Rational> {
    check_prime(p)?;
    Ok((int(1) - p_pow(p, -1)) * p_pow(p, n))
}

pub fn unit_kernel_integral(p: u64, alpha: u32) -> Result<Rational> {
    check_prime(p)?;
    check_alpha(alpha, 2)?;
    let pa = p_pow(p, -(alpha as i64));
    let pr = int(p as i64);
    Ok((&pr - int(2) + &pa) / (pr * (int(1) - pa)))
}

/// `(p^(1-α) - 1) / (p (1 - p^-α))`.
pub fn unit_sphere_kernel_excess(p: u64, alpha: u32) -> Result<Rational> {
    check_prime(p)?;
    check_alpha(alpha, 2)?;
    let a = alpha as i64;
    Ok((p_pow(p, 1 - a) - int(1)) / (int(p as i64) * (int(1) - p_pow(p, -a))))
}

pub fn prefactor(p: u64, alpha: u32) -> Result<Rational> {
    check_prime(p)?;
    check_alpha(alpha, 2)?;
    let a = alpha as i64;
    Ok((int(1) - p_pow(p, -a)) / (int(1) - p_pow(p, a - 1)))
}

/// `Φ_k(q) = Σ_{m ≥ 1} m^k q^m` in closed form.
pub fn phi_sum(k: u32, q: &Rational) -> Result<Rational> {
    if k > MAX_PHI_ORDER {
        return Err(Error::OrderTooLarge(k));
    }
    if !(q.is_positive() && q < &int(1)) {
        return Err(Error::QOutOfRange(rational_to_f64(q)));
    }
    let mut numer = Rational::zero();
    let mut power = Rational::one();
    for &c in phi_numerator(k).iter() {
        numer += &power * Rational::from_integer(BigInt::from(c));
        power *= q;
    }
    let denom = num_traits::pow(int(1) - q, k as usize + 1);
    Ok(numer / denom)
}

fn rational_to_f64(q: &Rational) -> f64 {
    rational_to_real(q, 128).to_f64()
}

/// `b(M)` for an integer scale `M ≥ 0`.
pub fn b_coefficient(p: u64, m: u32, alpha: u32) -> Result<Rational> {
    let excess = unit_sphere_kernel_excess(p, alpha)?;
    let q1 = p_pow(p, -(m as i64 + 1));
    let q2 = p_pow(p, -(m as i64 + alpha as i64));
    let sphere = int(1) - p_pow(p, -1);
    Ok(excess + sphere * (phi_sum(0, &q1)? - phi_sum(0, &q2)?))
}

/// `Ω(k, α, 0)`, as a rational multiple of `(ln p)^k`.
pub fn omega(k: u32, p: u64, alpha: u32) -> Result<LogScaled> {
    let unit = if k == 0 { unit_sphere_kernel_excess(p, alpha)? } else { Rational::zero() };
    let q1 = p_pow(p, -1);
    let q2 = p_pow(p, -(alpha as i64));
    let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };
    let sphere = int(1) - p_pow(p, -1);
    let coeff = unit + sphere * sign * (phi_sum(k, &q1)? - phi_sum(k, &q2)?);
    Ok(LogScaled { coeff, log_power: k })
}

/// `Ω̃(k, α)`, as a rational multiple of `(ln p)^k`.
pub fn omega_tilde(k: u32, p: u64, alpha: u32) -> Result<LogScaled> {
    check_alpha(alpha, 2)?;
    let sphere = int(1) - p_pow(p, -1);
    let unit = if k == 0 {
        unit_kernel_integral(p, alpha)? - int(2) * &sphere
    } else {
        Rational::zero()
    };
    let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };
    let q = p_pow(p, 1 - alpha as i64);
    let coeff = unit - sphere * sign * phi_sum(k, &q)?;
    Ok(LogScaled { coeff, log_power: k })
}

/// Generalised binomial coefficient for a rational upper argument.
pub fn gen_binomial(gamma: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * (gamma - int(i as i64)) / int(i as i64 + 1);
    }
    acc
}
