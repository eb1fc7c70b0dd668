//! Acceptance suite: every criterion runs, prints one PASS/FAIL line, and the
//! process exits nonzero if any failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use polyring::circulant::{circulant_eigenvalue, CirculantMatrix, Family};
use polyring::dynamics::{drift_report, init_rotating, integrate, rotation_period};
use polyring::model::{build_positions, PolygonStack};
use polyring::series::{alpha_table, beta_table, series_eval};
use polyring::solver::{
    cramer_two_polygon, mass_sign_threshold, solve_equal_masses, solve_nonplanar,
};
use polyring::spectra::{
    block_limit_product, f_p, mode_determinant, mode_matrix, scaled_block_gap_with,
    scaled_block_limit_with, secondary_product, xi_p, InnerPair, Verdict,
};
use polyring::verify::dense_circulant_eigen;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const EXPONENTS: [f64; 4] = [2.0, 2.5, 3.0, 4.0];

fn grid() -> Vec<f64> {
    (0..50)
        .map(|i| 0.05 + 0.9 * (i as f64 + 0.5) / 50.0)
        .collect()
}

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn circulant_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(3..=16);
        let row: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let m = CirculantMatrix::new(row).unwrap();
        for (p, dense) in dense_circulant_eigen(&m).iter().enumerate() {
            worst = worst.max((circulant_eigenvalue(&m, p + 1).unwrap() - dense).norm());
        }
    }
    check(
        worst < 1e-10,
        format!("max error {worst:.2e}"),
        format!("max error {worst:.2e} >= 1e-10"),
    )
}

fn determinant_positivity() -> Outcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut count = 0;
    for n in 3..=10 {
        for &a in &EXPONENTS {
            for &x in &grid() {
                let stack = PolygonStack::planar(n, vec![1.0, x], a).unwrap();
                for p in (1..=n).filter(|&p| p != n - 1) {
                    count += 1;
                    let rep = mode_determinant(&stack, p, Family::A, 0.0).unwrap();
                    if rep.verdict != Verdict::Positive {
                        violations.push((n, a, x, p, rep.det));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        violations.is_empty() && secs < 60.0,
        format!("{count} determinants positive in {secs:.2}s"),
        format!(
            "{} violations (first {:?}), {secs:.2}s",
            violations.len(),
            violations.first()
        ),
    )
}

fn sign_of_f() -> Outcome {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for n in 3..=10 {
        for &a in &EXPONENTS {
            for p in 1..=n as i64 {
                for &x in &grid() {
                    let v = f_p(x, 1.0, n, a, p).unwrap();
                    if !(v < 0.0) {
                        bad.push(format!("f_{p}({x},1)={v:e} n={n} a={a}"));
                    }
                }
                for &x in &[0.1, 0.4, 0.7] {
                    let exact = f_p(x, 1.0, n, a, p).unwrap();
                    let s = series_eval(p, n, a, x, 100).unwrap();
                    let err = (s.value - exact).abs();
                    worst = worst.max(err);
                    // rounding allowance on top of the truncation bound
                    if err >= 1e-8 || err > s.tail_bound + 1e-14 {
                        bad.push(format!(
                            "series n={n} a={a} p={p} x={x}: err {err:e} bound {:e}",
                            s.tail_bound
                        ));
                    }
                }
            }
        }
    }
    check(
        bad.is_empty(),
        format!("all negative; series max deviation {worst:.2e}"),
        format!(
            "{} failures, first: {}",
            bad.len(),
            bad.first().cloned().unwrap_or_default()
        ),
    )
}

/// `β_n` from the Cauchy product of the `α` series, with std trigonometry.
fn beta_by_convolution(n: usize, p: i64, big_n: usize, alphas: &[f64]) -> (f64, f64) {
    let theta = 2.0 * PI / big_n as f64;
    let c = |order: usize, j: f64| -> (f64, f64) {
        let mut v = 0.0;
        let mut s = 0.0;
        for k in 0..=order {
            let w = alphas[k] * alphas[order - k];
            v += w * (theta * j * (k as f64 - (order - k) as f64)).cos();
            s += w;
        }
        (v, s)
    };
    let mut total = 0.0;
    let mut scale = 0.0;
    for j in 1..=big_n {
        let jf = j as f64;
        let (prev, ps) = if n == 0 { (0.0, 0.0) } else { c(n - 1, jf) };
        let (cur, cs) = c(n, jf);
        total += (jf * theta * p as f64).cos() * prev - (jf * theta * (p + 1) as f64).cos() * cur;
        scale += ps + cs;
    }
    (total, scale)
}

fn series_certification() -> Outcome {
    let mut positive = Vec::new();
    let mut mismatch = Vec::new();
    let mut worst_beta = f64::NEG_INFINITY;
    let mut worst_rel = 0.0f64;
    for n in 3..=12usize {
        for &a in &EXPONENTS {
            let alphas = alpha_table(100, a);
            for p in 1..=n as i64 {
                let (betas, _) = beta_table(100, p, n, a);
                for (k, &b) in betas.iter().enumerate() {
                    worst_beta = worst_beta.max(b);
                    if b > 1e-12 {
                        positive.push((n, a, p, k, b));
                    }
                    let (oracle, scale) = beta_by_convolution(k, p, n, &alphas);
                    let rel = (b - oracle).abs() / scale.max(1.0);
                    worst_rel = worst_rel.max(rel);
                    if rel > 1e-12 {
                        mismatch.push((n, a, p, k, b, oracle));
                    }
                }
            }
        }
    }
    check(
        positive.is_empty() && mismatch.is_empty(),
        format!("max beta {worst_beta:.2e}; oracle agreement {worst_rel:.2e} (scale-relative)"),
        format!(
            "{} positive (first {:?}), {} oracle mismatches (first {:?})",
            positive.len(),
            positive.first(),
            mismatch.len(),
            mismatch.first()
        ),
    )
}

fn xi_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for n in 3..=12usize {
        for p in 1..=n {
            let residue = (p % n) as f64;
            let expect = (n as f64 - (2.0 * residue + 1.0)) / 2.0;
            worst = worst.max((xi_p(1.0, n, 2.0, p as i64).unwrap() - expect).abs());
        }
    }
    check(
        worst < 1e-12,
        format!("max error {worst:.2e}"),
        format!("max error {worst:.2e}"),
    )
}

fn inverse_solve() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst_res = 0.0f64;
    let mut worst_cramer = 0.0f64;
    for _ in 0..50 {
        let l = rng.gen_range(1..=2);
        let n = rng.gen_range(3..=8);
        let a = if rng.gen_bool(0.5) { 2.0 } else { 3.0 };
        let nu = 2.0 * (1.0 - rng.gen::<f64>());
        let base = rng.gen_range(0.5..2.0);
        let ratio = rng.gen_range(1.2..=10.0);
        let radii = if l == 1 {
            vec![base]
        } else if rng.gen_bool(0.5) {
            vec![base, base * ratio]
        } else {
            vec![base * ratio, base]
        };
        let stack = PolygonStack::planar(n, radii.clone(), a).unwrap();
        let sol = match solve_equal_masses(&stack, nu) {
            Ok(s) => s,
            Err(e) => return Err(format!("solve failed for n={n} a={a} radii={radii:?}: {e}")),
        };
        worst_res = worst_res.max(sol.residual);
        if l == 2 {
            let (m1, m2) = cramer_two_polygon(radii[0], radii[1], nu, n, a).unwrap();
            for (c, s) in [m1, m2].iter().zip(&sol.per_polygon_masses) {
                worst_cramer = worst_cramer.max((c - s).abs() / s.abs().max(1.0));
            }
        }
    }
    check(
        worst_res < 1e-10 && worst_cramer < 1e-12,
        format!("max residual {worst_res:.2e}, Cramer agreement {worst_cramer:.2e}"),
        format!("max residual {worst_res:.2e}, Cramer agreement {worst_cramer:.2e}"),
    )
}

fn sign_threshold() -> Outcome {
    let mut bad = Vec::new();
    for n in 3..=8 {
        for &a in &[2.0, 3.0] {
            let r2 = 1.0;
            let delta = mass_sign_threshold(r2, n, a).unwrap();
            let (m1, m2) = cramer_two_polygon(0.999 * delta, r2, 1.0, n, a).unwrap();
            if !(m1 * m2 > 0.0) {
                bad.push(format!("n={n} a={a}: not same-signed below delta"));
            }
            let (m1, m2) = cramer_two_polygon(1.001 * delta, r2, 1.0, n, a).unwrap();
            if !(m1 * m2 < 0.0) {
                bad.push(format!("n={n} a={a}: not opposite-signed above delta"));
            }
            let cells = 10_000;
            let xs: Vec<f64> = (1..cells).map(|i| r2 * i as f64 / cells as f64).collect();
            let signs: Vec<bool> = xs
                .iter()
                .map(|&x| cramer_two_polygon(x, r2, 1.0, n, a).unwrap().1 > 0.0)
                .collect();
            let changes: Vec<usize> = (1..signs.len())
                .filter(|&i| signs[i] != signs[i - 1])
                .collect();
            match changes.as_slice() {
                [i] if xs[i - 1] <= delta && delta <= xs[*i] => {}
                other => bad.push(format!(
                    "n={n} a={a}: dense scan sign changes at {other:?}, delta {delta}"
                )),
            }
        }
    }
    check(
        bad.is_empty(),
        "12 thresholds bracketed and matched by dense scans".into(),
        bad.join("; "),
    )
}

fn dynamics() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for a in [3.0, 2.0] {
        let stack = PolygonStack::planar(4, vec![1.0, 2.0], a).unwrap();
        let sol = solve_equal_masses(&stack, 1.0).unwrap();
        let m = sol.to_assignment(4);
        let s = init_rotating(&build_positions(&stack), &m, a).unwrap();
        let period = rotation_period(1.0, a);
        let steps = 40_000;
        let traj = integrate(&s, &m, a, period / 20_000.0, steps, 10).unwrap();
        let rep = drift_report(&traj, &m, a).unwrap();
        ok &= rep.max_relative_distance_drift < 1e-6 && rep.conserved_quantity_drift < 1e-8;
        let dev = |k: usize| {
            let t = integrate(&s, &m, a, 2.0 * period / k as f64, k, 1).unwrap();
            drift_report(&t, &m, a).unwrap().rotation_deviation
        };
        let ratio = dev(200) / dev(400);
        ok &= (8.0..=32.0).contains(&ratio);
        lines.push(format!(
            "a={a}: distance {:.1e}, integrals {:.1e}, halving ratio {ratio:.1}",
            rep.max_relative_distance_drift, rep.conserved_quantity_drift
        ));
    }
    check(ok, lines.join("; "), lines.join("; "))
}

fn nonplanar() -> Outcome {
    let mut bad = Vec::new();
    // (a) skew-symmetry
    let stacks = [
        PolygonStack::new(4, vec![1.0, 3.0], vec![0.25, 2.0], 3.0).unwrap(),
        PolygonStack::new(5, vec![1.0, 2.0, 0.7], vec![0.0, 1.0, -0.5], 2.5).unwrap(),
        PolygonStack::new(6, vec![1.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.3, -2.0], 3.0).unwrap(),
    ];
    for st in &stacks {
        for p in 1..st.n() {
            if !mode_matrix(st, p, Family::B, 0.7)
                .unwrap()
                .is_skew_symmetric()
            {
                bad.push(format!("B mode {p} not skew for {st:?}"));
            }
        }
    }
    // (b) two-polygon height determinant at mode N, h1 = 0, M from the candidate
    let mut negatives = Vec::new();
    let mut total = 0;
    for n in [3usize, 4, 6] {
        for (r1, r2) in [(1.0, 1.0), (1.0, 2.0), (1.0, 3.0), (2.0, 1.0), (0.5, 3.0)] {
            for h2 in [0.25, 1.0, 2.0] {
                for nu in [0.5, 1.0] {
                    let st = PolygonStack::new(n, vec![r1, r2], vec![0.0, h2], 3.0).unwrap();
                    let np = solve_nonplanar(&st, nu).unwrap();
                    let rep = mode_determinant(&st, n, Family::B, nu * nu / np.solution.total_mass)
                        .unwrap();
                    total += 1;
                    if rep.verdict != Verdict::Positive {
                        negatives.push(format!(
                            "n={n} r=({r1},{r2}) h2={h2} nu={nu} det={:.3e}",
                            rep.det
                        ));
                    }
                }
            }
        }
    }
    if !negatives.is_empty() {
        bad.push(format!(
            "height determinant not positive in {}/{total} instances (first: {})",
            negatives.len(),
            negatives[0]
        ));
    }
    // (c) figure scan
    let xs: Vec<f64> = (1..=660).map(|i| i as f64 / 100.0).collect();
    let mut fs = Vec::new();
    let mut gs = Vec::new();
    for &r1 in &xs {
        let st = PolygonStack::new(4, vec![r1, 3.0], vec![0.25, 2.0], 3.0).unwrap();
        fs.push(secondary_product(&st, 1).unwrap());
        gs.push(secondary_product(&st, 3).unwrap());
    }
    let changes = |v: &[f64]| {
        v.windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count()
    };
    let (cf, cg) = (changes(&fs), changes(&gs));
    if cf == 0 || cg == 0 {
        bad.push(format!("figure products sign changes f={cf}, g={cg}"));
    }
    check(
        bad.is_empty(),
        format!("skew-symmetric; {total} height determinants positive; figure sign changes f={cf}, g={cg}"),
        bad.join("; "),
    )
}

fn scaled_limit() -> Outcome {
    let mut bad = Vec::new();
    let mut worst_rel = 0.0f64;
    for n in [4usize, 5] {
        let stack = PolygonStack::planar(n, vec![1.0, 1.9, 0.8, 1.5], 3.0).unwrap();
        for p in (1..=n).filter(|&p| p != n - 1) {
            let limit = block_limit_product(&stack, p, InnerPair::Trailing).unwrap();
            let gaps: Vec<f64> = (1..=6)
                .map(|e| {
                    scaled_block_gap_with(&stack, p, 10f64.powi(-e), InnerPair::Trailing)
                        .unwrap()
                        .abs()
                })
                .collect();
            if !gaps.windows(2).all(|w| w[1] < w[0]) {
                bad.push(format!("n={n} p={p}: gaps {gaps:?}"));
            }
            let direct = scaled_block_limit_with(&stack, p, 1e-6, InnerPair::Trailing).unwrap();
            let rel = (direct - limit).abs() / limit.abs();
            worst_rel = worst_rel.max(rel);
            if !(rel < 1e-6) {
                bad.push(format!(
                    "n={n} p={p}: relative distance {rel:e} at alpha=1e-6"
                ));
            }
        }
    }
    check(
        bad.is_empty(),
        format!("gaps strictly decreasing; alpha=1e-6 within {worst_rel:.1e} of block product"),
        bad.join("; "),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "circulant eigenvalues vs dense projection",
            circulant_oracle,
        ),
        (
            "two-polygon mode determinants positive",
            determinant_positivity,
        ),
        ("sign of f_p and series bracketing", sign_of_f),
        (
            "series coefficients nonpositive, convolution oracle",
            series_certification,
        ),
        ("closed form of xi_p(1) at a = 2", xi_closed_form),
        ("inverse solve residual and Cramer agreement", inverse_solve),
        ("mass-sign threshold", sign_threshold),
        ("dynamics of the rotating solutions", dynamics),
        ("non-planar structure", nonplanar),
        ("scaled-block limit", scaled_limit),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {detail}", i + 1)
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
