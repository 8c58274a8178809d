//! The power-weighted geometric series `Φ_k(q) = Σ_{m ≥ 1} m^k q^m` and its
//! tails. Every sphere-sum coefficient in the crate reduces to these.

use crate::error::{Error, Result};
use crate::real::Real;

/// Largest `k` whose closed-form numerator fits the `i128` coefficients
/// (they are Eulerian numbers, bounded by `k!`).
pub const MAX_PHI_ORDER: u32 = 32;

/// Integer coefficients (ascending powers of `q`) of the numerator `P_k` in
/// `Φ_k(q) = P_k(q) / (1 - q)^(k+1)`.
///
/// From `Φ_k = q d/dq Φ_{k-1}`:
/// `P_0 = q`, `P_k = q ((1 - q) P'_{k-1} + k P_{k-1})`.
pub fn phi_numerator(k: u32) -> Vec<i128> {
    assert!(k <= MAX_PHI_ORDER, "phi order {k} too large");
    let mut poly: Vec<i128> = vec![0, 1];
    for step in 1..=k as i128 {
        let deriv: Vec<i128> = poly.iter().enumerate().skip(1).map(|(i, &c)| c * i as i128).collect();
        // inner = (1 - q) P' + step P
        let mut inner = vec![0i128; poly.len() + 1];
        for (i, &c) in deriv.iter().enumerate() {
            inner[i] += c;
            inner[i + 1] -= c;
        }
        for (i, &c) in poly.iter().enumerate() {
            inner[i] += step * c;
        }
        let mut next = vec![0i128; inner.len() + 1];
        next[1..].copy_from_slice(&inner);
        while next.len() > 1 && *next.last().unwrap() == 0 {
            next.pop();
        }
        poly = next;
    }
    poly
}

fn check_q(q: &Real) -> Result<()> {
    let one = Real::one(q.precision());
    if q.is_negative() || q.is_zero() || *q >= one || !q.is_finite() {
        Err(Error::QOutOfRange(q.to_f64()))
    } else {
        Ok(())
    }
}

/// `Φ_k(q)` from the rational closed form.
pub fn phi_closed(k: u32, q: &Real) -> Result<Real> {
    if k > MAX_PHI_ORDER {
        return Err(Error::OrderTooLarge(k));
    }
    check_q(q)?;
    let prec = q.precision();
    let mut numer = Real::zero(prec);
    for &c in phi_numerator(k).iter().rev() {
        numer = numer * q + Real::from_i128(c, prec);
    }
    let one_minus_q = Real::one(prec) - q;
    Ok(numer / one_minus_q.powi(k as i64 + 1))
}

/// `Φ_k(q)` by direct summation, stopping once the geometric bound on the
/// remaining tail falls below `rel_tol` of the running sum.
pub fn phi_series(k: u32, q: &Real, rel_tol: f64) -> Result<Real> {
    check_q(q)?;
    let prec = q.precision();
    let tol = Real::from_f64(rel_tol, prec);
    let one = Real::one(prec);
    let mut acc = Real::zero(prec);
    let mut qm = q.clone();
    let mut m: i64 = 1;
    loop {
        let term = Real::from_i64(m, prec).powi(k as i64) * &qm;
        acc = acc + &term;
        // Ratio of the next term to this one; once it drops below 1 it keeps
        // decreasing, so the tail is bounded by term · r / (1 - r).
        let ratio = (Real::from_i64(m + 1, prec) / Real::from_i64(m, prec)).powi(k as i64) * q;
        if ratio < one {
            let tail = &term * &ratio / (&one - &ratio);
            if tail <= &tol * &acc {
                return Ok(acc);
            }
        }
        if m > 10_000_000 {
            return Err(Error::QOutOfRange(q.to_f64()));
        }
        qm = qm * q;
        m += 1;
    }
}

/// `Σ_{m ≥ start} m^k q^m` for `start ≥ 1`, via the binomial shift
/// `m = i + start - 1` onto `Φ_0 … Φ_k`.
pub fn phi_tail(k: u32, q: &Real, start: i64) -> Result<Real> {
    if start < 1 {
        return Err(Error::ParamOutOfRange(format!("tail start {start} must be >= 1")));
    }
    let prec = q.precision();
    let shift = Real::from_i64(start - 1, prec);
    let mut acc = Real::zero(prec);
    let mut binom: i128 = 1;
    for j in 0..=k {
        let term = Real::from_i128(binom, prec) * shift.powi((k - j) as i64) * phi_closed(j, q)?;
        acc = acc + term;
        binom = binom * (k - j) as i128 / (j as i128 + 1);
    }
    Ok(acc * q.powi(start - 1))
}

/// Generalised binomial coefficient `γ (γ-1) ⋯ (γ-k+1) / k!`.
pub fn gen_binomial(gamma: f64, k: u32, precision: usize) -> Real {
    gen_binomial_real(&Real::from_f64(gamma, precision), k)
}

/// [`gen_binomial`] for a big-float `γ`, at its precision.
pub fn gen_binomial_real(gamma: &Real, k: u32) -> Real {
    let precision = gamma.precision();
    let mut acc = Real::one(precision);
    for i in 0..k as i64 {
        acc = acc * (gamma - Real::from_i64(i, precision)) / Real::from_i64(i + 1, precision);
    }
    acc
}
