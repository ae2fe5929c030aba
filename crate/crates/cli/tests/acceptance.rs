//! Acceptance suite: one test per criterion, each asserting its stated
//! tolerances and runtime budget and printing a PASS line (run with
//! `--nocapture` to see them).

use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use apgabor_cli::{generate_random_polynomial, generate_random_sequence};
use apgabor_core::ap::{stepanov_norm, time_average_inner, APSequence, TrigPolynomial};
use apgabor_core::frames::{
    fiber_matrix, finite_modulation_failure, frame_bounds, frame_sandwich_check,
    schur_bessel_bound, subspace_frame_bounds, SpectrumSet,
};
use apgabor_core::gabor::{
    adjoint_residual, analysis_family, analysis_norm_via_h, analysis_sequence,
    periodization_oracle, synthesis, GaborSystem,
};
use apgabor_core::windows::{wiener_norm, Gaussian, Rectangle, Triangle, Window};

fn gaussian_system(alpha: f64, beta: f64) -> GaborSystem {
    GaborSystem::new(Arc::new(Gaussian::new(1.0).unwrap()), alpha, beta).unwrap()
}

fn rect_system(alpha: f64, beta: f64) -> GaborSystem {
    GaborSystem::new(Arc::new(Rectangle::new(0.0, 1.0).unwrap()), alpha, beta).unwrap()
}

fn budget(start: Instant, seconds: f64, what: &str) -> f64 {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds,
        "{what}: took {elapsed:.2}s, budget {seconds}s"
    );
    elapsed
}

#[test]
fn criterion_01_parseval_vs_time_average() {
    let start = Instant::now();
    let times = [1e3, 1e4, 1e5];
    let mut rms = [0.0f64; 3];
    for i in 0..20u64 {
        let f = generate_random_polynomial(16_000 + i, 8, (-5.0, 5.0), 0.1).unwrap();
        let exact = f.norm_sqr();
        let cap = f.coeff_abs_sum().powi(2);
        for (slot, &t) in times.iter().enumerate() {
            let err = (time_average_inner(&f, &f, t).unwrap().re - exact).abs();
            assert!(
                err <= cap / (0.1 * t),
                "poly {i}, T={t}: err {err} above (sum |c|)^2/(0.1 T)"
            );
            rms[slot] += err * err;
        }
    }
    let rms: Vec<f64> = rms.iter().map(|s| (s / 20.0).sqrt()).collect();
    assert!(
        rms[0] >= 8.0 * rms[1] && rms[1] >= 8.0 * rms[2],
        "error must shrink >= 8x per decade: rms = {rms:?}"
    );
    let elapsed = budget(start, 1.0, "criterion 1");
    println!(
        "criterion 01 PASS ({elapsed:.2}s): time-average error within (sum|c|)^2/(0.1T), \
         rms decay {:.1}x and {:.1}x per decade",
        rms[0] / rms[1],
        rms[1] / rms[2]
    );
}

#[test]
fn criterion_02_periodization_identity() {
    let start = Instant::now();
    let gauss = Gaussian::new(1.0).unwrap();
    let a = APSequence::exponential(0.5);
    let expected = gauss.fourier(0.5);
    assert!((expected.re - 2.2120916882928263).abs() < 1e-12);

    let coarse = periodization_oracle(&a, &gauss, 1.0, 0.5, 200.0, 1e-3, 216).unwrap();
    let rel_coarse = (coarse - expected).norm() / expected.norm();
    assert!(rel_coarse < 1e-2, "T=200: rel error {rel_coarse}");

    let fine = periodization_oracle(&a, &gauss, 1.0, 0.5, 2000.0, 1e-3, 2016).unwrap();
    let rel_fine = (fine - expected).norm() / expected.norm();
    assert!(rel_fine < 1e-3, "T=2000: rel error {rel_fine}");

    let elapsed = budget(start, 10.0, "criterion 2");
    println!(
        "criterion 02 PASS ({elapsed:.2}s): oracle matches psi_hat(0.5) = {:.6} \
         (rel {rel_coarse:.2e} at T=200, {rel_fine:.2e} at T=2000)",
        expected.re
    );
}

#[test]
fn criterion_03_dual_path_identity() {
    let start = Instant::now();
    let windows: Vec<Arc<dyn Window>> =
        vec![Arc::new(Gaussian::new(1.0).unwrap()), Arc::new(Triangle)];
    let mut worst = 0.0f64;
    for window in windows {
        let sys = GaborSystem::new(window, 1.0, 1.0).unwrap();
        for i in 0..50u64 {
            let f = generate_random_polynomial(3000 + i, 6, (-5.0, 5.0), 0.1).unwrap();
            let direct = analysis_sequence(&f, &sys, 0).norm_sqr();
            let via_h = analysis_norm_via_h(&f, &sys, 0, 4).unwrap();
            let rel = (direct - via_h).abs() / direct.max(1e-300);
            worst = worst.max(rel);
            assert!(rel <= 1e-10, "poly {i}: relative mismatch {rel}");
        }
    }
    let elapsed = budget(start, 2.0, "criterion 3");
    println!(
        "criterion 03 PASS ({elapsed:.2}s): both norm paths agree to 1e-10 \
         (worst relative gap {worst:.2e})"
    );
}

#[test]
fn criterion_04_adjoint_identity() {
    let start = Instant::now();
    let gauss = Gaussian::new(1.0).unwrap();
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let f = generate_random_polynomial(4000 + i, 5, (-5.0, 5.0), 0.1).unwrap();
        let b = generate_random_sequence(4500 + i, 3, 0.1).unwrap();
        // P = 12 covers every lattice index of the sampled spectra, so the
        // synthesis truncation slack is the certified tail only.
        let (_, cert) = synthesis(&b, &gauss, 1.0, 12).unwrap();
        let residual = adjoint_residual(&f, &b, &gauss, 1.0, 12).unwrap();
        worst = worst.max(residual);
        assert!(
            residual <= 1e-10 + f.norm() * cert,
            "pair {i}: residual {residual} above 1e-10 + slack"
        );
    }
    let elapsed = budget(start, 2.0, "criterion 4");
    println!(
        "criterion 04 PASS ({elapsed:.2}s): adjoint residual <= 1e-10 + slack (worst {worst:.2e})"
    );
}

#[test]
fn criterion_05_rectangle_orthonormal_case() {
    let start = Instant::now();
    let sys = rect_system(1.0, TAU);
    let (grid, trunc_k, ell) = (64u32, 3u32, 10_000u32);

    // Fiber matrices are the identity up to 2e-3 at every grid residue.
    let gamma = sys.freq_period();
    for i in 0..grid {
        let lambda = gamma * i as f64 / grid as f64;
        let m = fiber_matrix(&sys, lambda, trunc_k, ell).unwrap();
        for r in 0..m.dim() {
            for c in 0..m.dim() {
                let expected = if r == c { 1.0 } else { 0.0 };
                let dev = (m.entry(r, c) - num_complex::Complex64::new(expected, 0.0)).norm();
                assert!(
                    dev <= 2e-3,
                    "lambda {lambda}, entry ({r},{c}): |m - delta| = {dev}"
                );
            }
        }
    }

    let bounds = frame_bounds(&sys, grid, trunc_k, ell).unwrap();
    assert!(
        (0.99..=1.01).contains(&bounds.lower) && (0.99..=1.01).contains(&bounds.upper),
        "A = {}, B = {}",
        bounds.lower,
        bounds.upper
    );

    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for i in 0..100u64 {
        let f = generate_random_polynomial(5000 + i, 6, (-5.0, 5.0), 0.1).unwrap();
        let report = frame_sandwich_check(&f, &sys, &bounds, 1e-3).unwrap();
        assert!(report.passed, "trial {i} failed the sandwich");
        let ratio = report.ratio();
        assert!(
            (0.99..=1.01).contains(&ratio),
            "trial {i}: ratio {ratio} outside [0.99, 1.01]"
        );
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    let elapsed = budget(start, 30.0, "criterion 5");
    println!(
        "criterion 05 PASS ({elapsed:.2}s): identity fibers, A = {:.4}, B = {:.4}, \
         100 sandwich ratios in [{min_ratio:.4}, {max_ratio:.4}]",
        bounds.lower, bounds.upper
    );
}

#[test]
fn criterion_06_gaussian_frame_sandwich() {
    let start = Instant::now();
    let sys = gaussian_system(1.0, 1.0);
    let ell = apgabor_core::frames::auto_ell_trunc(&sys, sys.freq_period() * 11.0, 1e-8, 20_000);
    let bounds = frame_bounds(&sys, 256, 10, ell).unwrap();
    assert!(
        bounds.lower - bounds.certified_slack > 0.0,
        "A - slack = {} not positive",
        bounds.lower - bounds.certified_slack
    );

    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for i in 0..100u64 {
        let f = generate_random_polynomial(6000 + i, 6, (-5.0, 5.0), 0.1).unwrap();
        let report = frame_sandwich_check(&f, &sys, &bounds, 1e-9).unwrap();
        assert!(report.passed, "trial {i} failed the sandwich");
        min_ratio = min_ratio.min(report.ratio());
        max_ratio = max_ratio.max(report.ratio());
    }
    assert!(
        bounds.upper + bounds.certified_slack >= max_ratio,
        "B + slack = {} below max ratio {max_ratio}",
        bounds.upper + bounds.certified_slack
    );
    assert!(
        bounds.lower - bounds.certified_slack <= min_ratio,
        "A - slack = {} above min ratio {min_ratio}",
        bounds.lower - bounds.certified_slack
    );
    let elapsed = budget(start, 60.0, "criterion 6");
    println!(
        "criterion 06 PASS ({elapsed:.2}s): A = {:.6}, B = {:.6}, slack = {:.2e}, \
         100 ratios in [{min_ratio:.6}, {max_ratio:.6}]",
        bounds.lower, bounds.upper, bounds.certified_slack
    );
}

#[test]
fn criterion_07_schur_vs_fiber_bound() {
    let start = Instant::now();
    let sys = gaussian_system(1.0, 1.0);
    let residues: Vec<f64> = (0..=62).map(|i| i as f64 * 0.1).collect();
    let schur = schur_bessel_bound(&sys, &residues, 10, 10).unwrap();
    let bounds = frame_bounds(&sys, 128, 8, 80).unwrap();
    assert!(
        schur * schur >= bounds.upper - bounds.certified_slack,
        "schur^2 = {} below B - slack = {}",
        schur * schur,
        bounds.upper - bounds.certified_slack
    );
    let elapsed = budget(start, 10.0, "criterion 7");
    println!(
        "criterion 07 PASS ({elapsed:.2}s): schur^2 = {:.4} >= B - slack = {:.4}",
        schur * schur,
        bounds.upper - bounds.certified_slack
    );
}

#[test]
fn criterion_08_stepanov_estimate() {
    let start = Instant::now();
    let sys = GaborSystem::new(Arc::new(Triangle), 1.0, 1.0).unwrap();
    let wiener = wiener_norm(&Triangle, 4, 2_000).unwrap();
    let mut tightest = f64::INFINITY;
    for i in 0..20u64 {
        let f = generate_random_polynomial(8000 + i, 6, (-5.0, 5.0), 0.1).unwrap();
        let lhs = analysis_sequence(&f, &sys, 0).norm();
        let rhs = stepanov_norm(&f, 1e-3).unwrap() * wiener + 1e-3;
        assert!(lhs <= rhs, "poly {i}: {lhs} > {rhs}");
        tightest = tightest.min(rhs - lhs);
    }
    let elapsed = budget(start, 10.0, "criterion 8");
    println!(
        "criterion 08 PASS ({elapsed:.2}s): analysis norm <= stepanov x wiener + 1e-3 \
         (smallest margin {tightest:.3})"
    );
}

#[test]
fn criterion_09_subspace_frames() {
    let start = Instant::now();
    let sys = gaussian_system(1.0, 1.0);

    // Unbounded spectrum: the finite modulation set F = {-1, 0, 1} loses
    // all energy along mu_j = j + 0.5.
    let unbounded = SpectrumSet::new((0..=50).map(|j| j as f64 + 0.5).collect());
    let values = finite_modulation_failure(&unbounded, &sys, &[-1, 0, 1]);
    for j in 2..values.len() - 1 {
        if values[j] > 0.0 {
            assert!(
                values[j + 1] < values[j],
                "values not strictly decreasing at j = {j}"
            );
        } else {
            // Gaussian tails underflow f64 past j ~ 28; the sequence is
            // exactly zero from there on.
            assert_eq!(values[j + 1], 0.0);
        }
    }
    assert!(values[50] < 1e-6, "value at j = 50 is {}", values[50]);

    // Bounded spectrum: exact frame bounds match the per-exponential
    // coefficient energies to relative 1e-8.
    let mu = vec![0.3, 0.7, 1.1];
    let bounded = SpectrumSet::new(mu.clone());
    let (a, b) = subspace_frame_bounds(&bounded, &sys, 40).unwrap();
    assert!(a > 0.0);
    let mut energies = Vec::new();
    for &m in &mu {
        let fam = analysis_family(&TrigPolynomial::exponential(m), &sys, 1e-12).unwrap();
        energies.push(fam.bessel_total());
    }
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((a - min).abs() <= 1e-8 * min, "A = {a} vs min energy {min}");
    assert!((b - max).abs() <= 1e-8 * max, "B = {b} vs max energy {max}");

    let elapsed = budget(start, 5.0, "criterion 9");
    println!(
        "criterion 09 PASS ({elapsed:.2}s): finite-F energies decay below 1e-6, \
         subspace bounds A = {a:.6}, B = {b:.6} match per-exponential energies"
    );
}

#[test]
fn criterion_10_cli_determinism_and_violation_path() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let strip = |report: &str| -> String {
        report
            .lines()
            .filter(|line| !line.trim_start().starts_with("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };

    let mut reports = Vec::new();
    for run in 0..2 {
        let json = dir.path().join(format!("det{run}.json"));
        let csv = dir.path().join(format!("det{run}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_apgabor"))
            .args([
                "sandwich",
                "--window",
                "gaussian:sigma=1",
                "--alpha",
                "1",
                "--beta",
                "1",
                "--grid",
                "32",
                "--K",
                "4",
                "--trials",
                "20",
                "--seed",
                "42",
                "--out-json",
                json.to_str().unwrap(),
                "--out-csv",
                csv.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        reports.push((
            std::fs::read_to_string(&json).unwrap(),
            std::fs::read_to_string(&csv).unwrap(),
        ));
    }
    assert_eq!(
        strip(&reports[0].0),
        strip(&reports[1].0),
        "JSON reports differ beyond the timestamp"
    );
    assert_eq!(reports[0].1, reports[1].1, "CSV tables differ");

    // Violation path: beta = 8π leaves uncovered residues, the lower frame
    // bound dies, exit code 2 with a populated violations array.
    let out = Command::new(env!("CARGO_BIN_EXE_apgabor"))
        .args([
            "sandwich",
            "--window",
            "gaussian:sigma=1",
            "--alpha",
            "1",
            "--beta",
            &format!("{}", 8.0 * PI),
            "--grid",
            "32",
            "--K",
            "4",
            "--trials",
            "10",
            "--seed",
            "42",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let violations = report["violations"].as_array().unwrap();
    assert!(!violations.is_empty(), "violations array is empty");
    assert_eq!(violations[0]["inequality"], "A - slack > 0");

    let elapsed = budget(start, 10.0, "criterion 10");
    println!(
        "criterion 10 PASS ({elapsed:.2}s): byte-identical reports modulo timestamp; \
         beta = 8 pi exits 2 with {} violation(s)",
        violations.len()
    );
}
