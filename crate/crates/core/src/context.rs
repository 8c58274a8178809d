use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// How `log|x|_p` is measured. At `|x|_p = p^n` it is `n ln p` under
/// [`LogBase::Natural`] and plain `n` under [`LogBase::BaseP`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    BaseP,
}

pub const DEFAULT_PRECISION_BITS: usize = 256;
pub const DEFAULT_REL_TOL: f64 = 1e-30;

/// The prime, working precision and conventions shared by every numeric
/// operation.
#[derive(Debug, Clone)]
pub struct NumericContext {
    prime: u64,
    precision_bits: usize,
    log_base: LogBase,
    rel_tol: f64,
    ln_p: Real,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl NumericContext {
    pub fn new(prime: u64, precision_bits: usize, log_base: LogBase, rel_tol: f64) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        if precision_bits < 64 {
            return Err(Error::PrecisionTooLow(precision_bits));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::RelTolOutOfRange(rel_tol));
        }
        // ln p carries extra guard bits: it gets multiplied by exponents in
        // the hundreds when forming p^x.
        let ln_p = Real::from_i64(prime as i64, precision_bits + 64).ln();
        Ok(NumericContext { prime, precision_bits, log_base, rel_tol, ln_p })
    }

    /// 256-bit natural-log context with the default tolerance.
    pub fn with_prime(prime: u64) -> Result<Self> {
        Self::new(prime, DEFAULT_PRECISION_BITS, LogBase::Natural, DEFAULT_REL_TOL)
    }

    pub fn with_precision(&self, precision_bits: usize) -> Result<Self> {
        Self::new(self.prime, precision_bits, self.log_base, self.rel_tol)
    }

    pub fn with_log_base(&self, log_base: LogBase) -> Self {
        NumericContext { log_base, ..self.clone() }
    }

    pub fn with_rel_tol(&self, rel_tol: f64) -> Result<Self> {
        Self::new(self.prime, self.precision_bits, self.log_base, rel_tol)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Lift an `f64` into the working precision (exactly).
    pub fn real(&self, x: f64) -> Real {
        Real::from_f64(x, self.precision_bits)
    }

    pub fn int(&self, n: i64) -> Real {
        Real::from_i64(n, self.precision_bits)
    }

    pub fn p(&self) -> Real {
        self.int(self.prime as i64)
    }

    /// `1 - 1/p`, the measure of the unit sphere.
    pub fn unit_sphere(&self) -> Real {
        self.int(1) - self.p().recip()
    }

    /// `p^n` for an integer exponent.
    pub fn p_powi(&self, n: i64) -> Real {
        self.p().powi(n)
    }

    /// `p^e` for a real exponent.
    pub fn p_pow(&self, e: &Real) -> Real {
        if let Some(n) = e.to_i64() {
            return self.p_powi(n);
        }
        (e.with_precision(self.precision_bits + 64) * &self.ln_p)
            .exp()
            .with_precision(self.precision_bits)
    }

    pub fn p_pow_f64(&self, e: f64) -> Real {
        self.p_pow(&self.real(e))
    }

    pub fn ln_p(&self) -> Real {
        self.ln_p.with_precision(self.precision_bits)
    }

    /// The unit `L` with `log|x|_p = n L` at `|x|_p = p^n`.
    pub fn log_unit(&self) -> Real {
        match self.log_base {
            LogBase::Natural => self.ln_p(),
            LogBase::BaseP => self.int(1),
        }
    }

    /// `log|x|_p` at `|x|_p = p^n`.
    pub fn log_abs(&self, n: i64) -> Real {
        self.int(n) * self.log_unit()
    }

    /// A unit roundoff of the working precision, with a few guard bits of slack.
    pub(crate) fn ulp(&self) -> Real {
        Real::from_i64(2, self.precision_bits).powi(-(self.precision_bits as i64) + 4)
    }
}
