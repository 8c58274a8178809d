//! Extended-precision real numbers.
//!
//! [`Real`] is a thin value type over a binary big float. Every value carries
//! its own mantissa precision; binary operations round to the larger of the
//! two operand precisions, so mixing precisions never silently truncates.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    // Cache of ln 2, pi and friends used by the transcendental functions.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn from_f64(x: f64, precision: usize) -> Self {
        if x != 0.0 && x.abs() < f64::MIN_POSITIVE {
            // Subnormals are scaled into the normal range first.
            let scaled = Real(BigFloat::from_f64(x * 2f64.powi(128), precision));
            return scaled * Real::from_i64(2, precision).powi(-128);
        }
        Real(BigFloat::from_f64(x, precision))
    }

    pub fn from_i64(n: i64, precision: usize) -> Self {
        Real(BigFloat::from_i64(n, precision))
    }

    pub fn from_i128(n: i128, precision: usize) -> Self {
        Real(BigFloat::from_i128(n, precision))
    }

    pub fn zero(precision: usize) -> Self {
        Real::from_i64(0, precision)
    }

    pub fn one(precision: usize) -> Self {
        Real::from_i64(1, precision)
    }

    /// Mantissa precision in bits (rounded up to the word size). Zero
    /// carries no mantissa and reports a single word.
    pub fn precision(&self) -> usize {
        self.0.precision().unwrap_or(0).max(64)
    }

    /// Rounds to `precision` bits.
    pub fn with_precision(&self, precision: usize) -> Self {
        let mut v = self.0.clone();
        // Only fails for NaN/inf, which keep their flavour anyway.
        let _ = v.set_precision(precision, RM);
        Real(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_int()
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Self {
        Real(self.0.reciprocal(self.precision(), RM))
    }

    /// Natural logarithm; NaN for non-positive input.
    pub fn ln(&self) -> Self {
        let p = self.precision();
        Real(with_consts(|cc| self.0.ln(p, RM, cc)))
    }

    pub fn exp(&self) -> Self {
        let p = self.precision();
        Real(with_consts(|cc| self.0.exp(p, RM, cc)))
    }

    /// `self^n` for an integer exponent, by repeated squaring.
    pub fn powi(&self, n: i64) -> Self {
        let p = self.precision();
        if n == 0 {
            return Real::one(p);
        }
        let mag = Real(self.0.powi(n.unsigned_abs() as usize, p + 64, RM)).with_precision(p);
        if n < 0 {
            mag.recip()
        } else {
            mag
        }
    }

    /// `self^e` for a real exponent. The base must be positive unless the
    /// exponent is an integer.
    pub fn powf(&self, e: &Real) -> Self {
        if e.is_integer() {
            if let Some(n) = e.to_i64() {
                return self.powi(n);
            }
        }
        let p = self.precision().max(e.precision());
        Real(with_consts(|cc| self.0.pow(&e.0, p, RM, cc)))
    }

    /// Exact conversion when the value is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        let f = self.to_f64();
        if f.abs() < 9.0e15 {
            Some(f as i64)
        } else {
            None
        }
    }

    /// Nearest `f64` (infinite when out of range, zero on underflow).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if self.is_zero() {
            return 0.0;
        }
        let (words, _, sign, exponent, _) = match self.0.as_raw_parts() {
            Some(parts) => parts,
            None => return f64::NAN,
        };
        // Mantissa 0.1xxx in binary, top word first. Shift the leading one
        // into bit 63, pulling bits up from the next word.
        let hi = *words.last().unwrap_or(&0);
        let lo = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        let lz = hi.leading_zeros();
        let top = if lz == 0 { hi } else { (hi << lz) | (lo >> (64 - lz)) };
        let e = exponent as i64 - 64 - lz as i64;
        let mag = if e > 2000 {
            f64::INFINITY
        } else if e < -2200 {
            0.0
        } else {
            // Scale in steps so only the final product can go subnormal.
            let mut mag = top as f64;
            let mut e = e;
            while e < -900 {
                let step = (e + 900).max(-900);
                mag *= 2f64.powi(step as i32);
                e -= step;
            }
            mag * 2f64.powi(e as i32)
        };
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Relative distance `|self - other| / max(|self|, |other|)`, zero when
    /// both vanish.
    pub fn rel_diff(&self, other: &Real) -> f64 {
        let scale = if self.abs() > other.abs() { self.abs() } else { other.abs() };
        if scale.is_zero() {
            return 0.0;
        }
        ((self - other).abs() / scale).to_f64()
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let f = self.to_f64();
        if self.is_zero() || (f.is_finite() && f.abs() > 1e-300) {
            return format!("{:.*e}", digits.saturating_sub(1), f);
        }
        if self.0.is_nan() {
            return "NaN".to_string();
        }
        let s = format!("{}", self.0);
        let (mant, exp) = match s.split_once('e') {
            Some(parts) => parts,
            None => return s,
        };
        let (sign, mant) = mant.strip_prefix('-').map_or(("", mant), |m| ("-", m));
        // Truncate the decimal mantissa; only used for values beyond f64 range.
        let keep: String = mant.chars().take(digits + 1).collect();
        let exp: i64 = exp.parse().unwrap_or(0);
        format!("{sign}{keep}e{exp}")
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_sci_string(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string(f.precision().unwrap_or(17)))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.partial_cmp(&other.0) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.precision().max(rhs.precision());
                Real(self.0.$op(&rhs.0, p, RM))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.clone().neg())
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(64), |acc, x| acc + x)
    }
}
