//! Acceptance criteria. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use padic_fracint::exact::{self, Rational};
use padic_fracint::verify::ScanOptions;
use padic_fracint::{
    b_coefficient, ialpha_eval, ialpha_monomial_exact, lemma_decay_check, mc_ialpha_eval, omega, ratio_bound_check,
    residual_scan, unit_kernel_integral, unit_sphere_kernel_excess, Eq13Form, InnerTail, Lemma, NumericContext,
    RadialFunction, Real, Table, Theorem,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ctx(p: u64) -> NumericContext {
    NumericContext::with_prime(p).unwrap()
}

fn within(limit_secs: u64, start: Instant) -> (bool, Duration) {
    let t = start.elapsed();
    (t < Duration::from_secs(limit_secs), t)
}

/// Relative difference, falling back to absolute when the reference is 0.
fn rel_or_abs(a: &Real, b: &Real) -> f64 {
    let diff = (a - b).abs();
    if b.is_zero() {
        diff.to_f64()
    } else {
        (diff / b.abs()).to_f64()
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut exact_ok = true;
    for p in [2u64, 3, 5] {
        let c = ctx(p);
        for alpha in [2u32, 3] {
            let b0 = exact::b_coefficient(p, 0, alpha).unwrap();
            let o0 = exact::omega(0, p, alpha).unwrap();
            let u = exact::unit_kernel_integral(p, alpha).unwrap();
            let one = Rational::from_integer(1.into());
            let lhs = u - (&one - exact::p_pow(p, -1));
            let rhs = (exact::p_pow(p, 1 - alpha as i64) - &one)
                / (exact::p_pow(p, 1) * (&one - exact::p_pow(p, -(alpha as i64))));
            exact_ok &= b0 == Rational::from_integer(0.into()) && o0.is_zero() && lhs == rhs;

            let a = alpha as f64;
            worst = worst.max(b_coefficient(0.0, a, &c).unwrap().abs().to_f64());
            worst = worst.max(omega(0, a, 0.0, &c).unwrap().abs().to_f64());
            let lhs = unit_kernel_integral(&c, a).unwrap() - c.unit_sphere();
            let rhs = (c.p_pow_f64(1.0 - a) - c.int(1)) / (c.p() * (c.int(1) - c.p_pow_f64(-a)));
            worst = worst.max(rel_or_abs(&lhs, &rhs));
            worst = worst.max(rel_or_abs(&unit_sphere_kernel_excess(&c, a).unwrap(), &rhs));
        }
    }
    let (fast, t) = within(1, start);
    Outcome {
        pass: exact_ok && worst <= 1e-25 && fast,
        detail: format!("exact identities hold: {exact_ok}; worst big-float deviation {worst:.1e} (<= 1e-25); {t:.2?} (< 1 s)"),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    let mut failures = Vec::new();
    for p in [2u64, 3] {
        let c = ctx(p);
        for alpha in [1.5, 2.0, 3.0] {
            for m in [0.5, 1.0, 2.0] {
                let f = RadialFunction::monomial(m);
                for n in -10i64..=10 {
                    let v = ialpha_eval(&f, n.into(), alpha, &c).unwrap();
                    let exact = ialpha_monomial_exact(m, n, alpha, &c).unwrap();
                    let err = (&v.value - &exact).abs();
                    let ratio = (&v.truncation_bound / v.value.abs()).to_f64();
                    worst_ratio = worst_ratio.max(ratio);
                    if err > v.truncation_bound || ratio > 1e-12 {
                        ok = false;
                        failures.push(format!("p={p} alpha={alpha} M={m} N={n}"));
                    }
                }
            }
        }
    }
    let (fast, t) = within(5, start);
    Outcome {
        pass: ok && fast,
        detail: format!(
            "378 points, error within bound: {ok}; worst bound/|value| {worst_ratio:.1e} (<= 1e-12); {t:.2?} (< 5 s){}",
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    }
}

fn criterion_3() -> Outcome {
    let c = ctx(2);
    let ind = ialpha_eval(&RadialFunction::indicator(0), 3.into(), 2.0, &c).unwrap().value.to_f64();
    let mono = ialpha_eval(&RadialFunction::monomial(1.0), 0.into(), 2.0, &c).unwrap().value.to_f64();
    let e1 = (ind + 5.5).abs();
    let e2 = (mono - 5.0 / 28.0).abs();
    Outcome {
        pass: e1 <= 1e-12 && e2 <= 1e-12,
        detail: format!("indicator: {ind} (target -11/2, err {e1:.1e}); monomial: {mono} (target 5/28, err {e2:.1e})"),
    }
}

/// `|x| / (1 + |x|)` on `j ∈ [-60, 0]`, continued by `|x|` below.
fn rational_table(c: &NumericContext) -> RadialFunction {
    let values = (-60..=0)
        .map(|j| {
            let x = c.p_powi(j);
            &x / (c.int(1) + &x)
        })
        .collect();
    RadialFunction::Table(Table::from_reals(-60, values, InnerTail::Power { a: 1.0, exponent: 1.0 }, None).unwrap())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let c = ctx(2);
    let f = rational_table(&c);
    let a: Vec<f64> = (0..6).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let m: Vec<f64> = (1..=6).map(|n| n as f64).collect();
    let opts = ScanOptions { origin_expansion: Some((a, m)), ..Default::default() };
    let ladder: Vec<i64> = (3..=12).map(|i| -2 * i).collect();
    let reports: Vec<_> = (0..3)
        .map(|n| residual_scan(Theorem::T1, &f, n, &ladder, 2.0, &opts, &c).unwrap())
        .collect();
    let mut worst = [0.0f64; 3];
    for (n, rep) in reports.iter().enumerate() {
        for row in &rep.rows {
            worst[n] = worst[n].max(row.normalized_err.to_f64());
        }
    }
    let bounded = worst.iter().all(|&w| w < 5.0);
    let mut monotone = true;
    for i in 0..ladder.len() {
        let errs: Vec<&Real> = reports.iter().map(|r| &r.rows[i].abs_err).collect();
        monotone &= errs[1] < errs[0] && errs[2] < errs[1];
    }
    let (fast, t) = within(10, start);
    Outcome {
        pass: bounded && monotone && fast,
        detail: format!(
            "max normalized_err by order N=0,1,2: {:.3}, {:.3}, {:.3} (< 5); abs_err decreasing in N at every radius: {monotone}; {t:.2?} (< 10 s)",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let f = RadialFunction::capped_power(2.0).unwrap();
    let ladder: Vec<i64> = (5..=30).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [2u64, 3] {
        for alpha in [1.5, 2.0] {
            let r = ratio_bound_check(&f, &ladder, alpha, &ctx(p)).unwrap();
            let spread = (&r.d_hat / &r.c_hat).to_f64();
            ok &= !r.c_hat.is_zero() && spread < 10.0;
            parts.push(format!("p={p} alpha={alpha}: {spread:.3}"));
        }
    }
    let (fast, t) = within(10, start);
    Outcome { pass: ok && fast, detail: format!("d_hat/c_hat {} (< 10); {t:.2?} (< 10 s)", parts.join(", ")) }
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let c = ctx(2);
    let (alpha, beta, gamma) = (2.0, 0.5, 2.0);
    let f = RadialFunction::log_power(beta, gamma);
    let ladder: Vec<i64> = vec![5, 10, 20, 40, 80];
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 0..3usize {
        let rep = residual_scan(Theorem::T3, &f, n, &ladder, alpha, &ScanOptions::default(), &c).unwrap();
        let xs: Vec<f64> = rep.rows.iter().map(|r| (r.x_exp as f64).ln()).collect();
        let ys: Vec<f64> = rep
            .rows
            .iter()
            .map(|r| {
                let scaled = &r.abs_err / c.p_pow_f64(r.x_exp as f64 * (alpha - beta));
                scaled.ln().to_f64()
            })
            .collect();
        let s = slope(&xs, &ys);
        let target = gamma - n as f64 - 1.0;
        let good = (s - target).abs() <= 0.3;
        ok &= good;
        parts.push(format!("N={n}: slope {s:.3} vs {target} [{}]", if good { "ok" } else { "off" }));
    }
    let (fast, t) = within(20, start);
    Outcome { pass: ok && fast, detail: format!("{}; {t:.2?} (< 20 s)", parts.join(", ")) }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let c = ctx(2);
    let alpha = 2.0;
    let f = RadialFunction::capped_power(1.0).unwrap();
    let ladder: Vec<i64> = (1..=10).map(|i| 4 * i).collect();
    let proof = residual_scan(Theorem::T4, &f, 0, &ladder, alpha, &ScanOptions::default(), &c).unwrap();
    let printed_opts = ScanOptions { eq13_form: Eq13Form::Printed, ..Default::default() };
    let printed = residual_scan(Theorem::T4, &f, 0, &ladder, alpha, &printed_opts, &c).unwrap();
    let proof_max = proof.rows.iter().map(|r| r.normalized_err.to_f64()).fold(0.0, f64::max);
    let growth = c.p_pow_f64(alpha - 1.0).to_f64();
    let min_step = printed
        .rows
        .windows(2)
        .map(|w| (&w[1].normalized_err / &w[0].normalized_err).to_f64())
        .fold(f64::INFINITY, f64::min);
    let (fast, t) = within(20, start);
    Outcome {
        pass: proof_max <= 5.0 && min_step >= growth && fast,
        detail: format!(
            "proof form max normalized_err {proof_max:.2e} (<= 5); printed form smallest step growth {min_step:.3e} (>= {growth}); {t:.2?} (< 20 s)"
        ),
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let c = ctx(2);
    let l1 = lemma_decay_check(
        &Lemma::L1 { f: RadialFunction::capped_power(0.7).unwrap(), lambda: 0.5 },
        &(10..=40).collect::<Vec<_>>(),
        &c,
    )
    .unwrap();
    let decreasing = l1.windows(2).all(|w| w[1].1 < w[0].1);
    let mut ok = decreasing;
    let mut parts = vec![format!("L1 strictly decreasing: {decreasing}")];
    for (k, beta, epsilon) in [(0u32, 0.0, 0.05), (2, 0.5, 0.2)] {
        let rows = lemma_decay_check(&Lemma::L2 { k, beta, epsilon, alpha: 2.0 }, &(1..=30).collect::<Vec<_>>(), &c)
            .unwrap();
        let max = rows.iter().map(|r| r.1.to_f64()).fold(0.0, f64::max);
        let min = rows.iter().map(|r| r.1.to_f64()).fold(f64::INFINITY, f64::min);
        let spread = max / min;
        ok &= spread < 5.0;
        parts.push(format!("L2 (k={k}, beta={beta}, eps={epsilon}) max/min {spread:.3}"));
    }
    let (fast, t) = within(5, start);
    Outcome { pass: ok && fast, detail: format!("{} (< 5); {t:.2?} (< 5 s)", parts.join("; ")) }
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let samples = 1_000_000;
    let configs: Vec<(u64, f64, RadialFunction, i64)> = vec![
        (2, 2.0, RadialFunction::monomial(1.0), 0),
        (2, 2.0, RadialFunction::indicator(0), 3),
        (3, 1.5, RadialFunction::monomial(0.5), 1),
        (5, 3.0, RadialFunction::capped_power(2.0).unwrap(), 2),
        (3, 2.5, RadialFunction::log_power(0.5, 1.0), 2),
        (7, 2.0, RadialFunction::indicator(-1), 1),
    ];
    let mut zs = Vec::new();
    for (i, (p, alpha, f, n)) in configs.iter().enumerate() {
        let c = ctx(*p);
        let exact = ialpha_eval(f, (*n).into(), *alpha, &c).unwrap().value.to_f64();
        let mc = mc_ialpha_eval(f, *n, *alpha, samples, 1000 + i as u64, &c).unwrap();
        zs.push(mc.z_score(exact));
    }
    let all_ok = zs.iter().all(|z| z.abs() <= 4.0);

    let c = ctx(2);
    let f = RadialFunction::monomial(1.0);
    let exact = ialpha_eval(&f, 0.into(), 2.0, &c).unwrap().value.to_f64();
    let within4 = (0..100u64)
        .filter(|&s| mc_ialpha_eval(&f, 0, 2.0, samples, 50_000 + s, &c).unwrap().z_score(exact).abs() <= 4.0)
        .count();
    let (fast, t) = within(120, start);
    let zs: Vec<String> = zs.iter().map(|z| format!("{z:.2}")).collect();
    Outcome {
        pass: all_ok && within4 >= 99 && fast,
        detail: format!(
            "z-scores [{}] (|z| <= 4); repetitions within 4 sigma: {within4}/100 (>= 99); {t:.2?} (< 120 s)",
            zs.join(", ")
        ),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("constant identities", criterion_1),
        ("monomial exactness", criterion_2),
        ("worked examples", criterion_3),
        ("origin expansion residuals", criterion_4),
        ("two-sided bound at infinity", criterion_5),
        ("log-power expansion order", criterion_6),
        ("beta = 1 expansion, proof vs printed form", criterion_7),
        ("decay lemmas", criterion_8),
        ("Monte Carlo oracle", criterion_9),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!("criterion {id} {}: {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
