//! Fiber matrices and frame bounds.
//!
//! For a residue λ of the frequency lattice `2π/α ℤ` the fiber matrix
//! `m_{k,p}(λ) = Σ_ℓ ψ̂(λ + (2π/α)k - ℓβ) conj(ψ̂(λ + (2π/α)p - ℓβ))`
//! carries the quadratic form that measures the total Gabor coefficient
//! energy of functions supported on that residue class. Sweeping its
//! extremal eigenvalues over a λ grid yields the two-sided frame bounds
//! `A ‖f‖² ≤ S(f) ≤ B ‖f‖²`; the grid min is an upper estimate of the true
//! infimum and the grid max a lower estimate of the true supremum, each
//! widened by a certified slack for the ℓ-truncation.

use num_complex::Complex64;
use serde::Serialize;

use crate::ap::{residue_decompose, TrigPolynomial, TOL_FREQ};
use crate::gabor::{analysis_family, GaborSystem};
use crate::{Error, Result};

/// Truncated Hermitian fiber matrix at one residue λ.
#[derive(Clone, Debug)]
pub struct FiberMatrix {
    lambda: f64,
    trunc_k: u32,
    ell_trunc: u32,
    /// Row-major `(2K+1) × (2K+1)`, Hermitian by construction.
    entries: Vec<Complex64>,
    /// Entrywise bound on the dropped `Σ_{|ℓ|>L}` contribution.
    tail: f64,
}

impl FiberMatrix {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn trunc_k(&self) -> u32 {
        self.trunc_k
    }

    pub fn ell_trunc(&self) -> u32 {
        self.ell_trunc
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn dim(&self) -> usize {
        2 * self.trunc_k as usize + 1
    }

    /// Entry by matrix position `(row, col)` with `row, col < dim`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    /// Entry by lattice indices `k, p ∈ [-K, K]`.
    pub fn entry_kp(&self, k: i64, p: i64) -> Complex64 {
        let off = self.trunc_k as i64;
        self.entry((k + off) as usize, (p + off) as usize)
    }

    /// Eigenvalue slack induced by the entrywise tail: a perturbation of
    /// entry size `tail` moves eigenvalues by at most `tail · dim`.
    pub fn eig_slack(&self) -> f64 {
        self.tail * self.dim() as f64
    }
}

/// Builds the fiber matrix at `λ ∈ [0, 2π/α)` with lattice truncation
/// `|k| ≤ K` and modulation truncation `|ℓ| ≤ L`.
///
/// The entries form the Gram matrix of the rows `(ψ̂(λ + γk - ℓβ))_ℓ`, so
/// Hermitian symmetry holds exactly (upper triangle computed, lower
/// mirrored) and the diagonal is real. The tail is the Cauchy–Schwarz
/// entrywise bound obtained from `freq_decay` on the dropped ℓ range.
pub fn fiber_matrix(
    sys: &GaborSystem,
    lambda: f64,
    trunc_k: u32,
    ell_trunc: u32,
) -> Result<FiberMatrix> {
    let gamma = sys.freq_period();
    if !(0.0..gamma).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} outside the fundamental domain [0, {gamma})"
        )));
    }
    if ell_trunc < 1 {
        return Err(Error::InvalidArgument("L must be at least 1".into()));
    }
    let k_max = trunc_k as i64;
    let l_max = ell_trunc as i64;
    let dim = (2 * k_max + 1) as usize;
    let cols = (2 * l_max + 1) as usize;

    // Row k of the sample table: ψ̂(λ + γk - ℓβ) for |ℓ| ≤ L.
    let mut table = vec![Complex64::new(0.0, 0.0); dim * cols];
    for (ri, k) in (-k_max..=k_max).enumerate() {
        let base = lambda + gamma * k as f64;
        for (ci, ell) in (-l_max..=l_max).enumerate() {
            table[ri * cols + ci] = sys.window().fourier(base - ell as f64 * sys.beta());
        }
    }

    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let mut sum = Complex64::new(0.0, 0.0);
            for l in 0..cols {
                sum += table[i * cols + l] * table[j * cols + l].conj();
            }
            if i == j {
                entries[i * dim + i] = Complex64::new(sum.re, 0.0);
            } else {
                entries[i * dim + j] = sum;
                entries[j * dim + i] = sum.conj();
            }
        }
    }

    let tail = (-k_max..=k_max)
        .map(|k| {
            sys.window()
                .freq_decay(lambda + gamma * k as f64, sys.beta(), ell_trunc)
        })
        .fold(0.0f64, f64::max);

    Ok(FiberMatrix {
        lambda,
        trunc_k,
        ell_trunc,
        entries,
        tail,
    })
}

/// Union of the Gershgorin discs projected to the real axis: an
/// independent sanity interval that must contain both extremal
/// eigenvalues.
pub fn gershgorin_interval(matrix: &FiberMatrix) -> (f64, f64) {
    let n = matrix.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let center = matrix.entry(i, i).re;
        let radius: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| matrix.entry(i, j).norm())
            .sum();
        lo = lo.min(center - radius);
        hi = hi.max(center + radius);
    }
    (lo, hi)
}

/// Extremal eigenvalues of a truncated fiber matrix by cyclic Jacobi
/// iteration, sweeping until the off-diagonal Frobenius norm falls below
/// `1e-12` of the matrix Frobenius norm. Add `±eig_slack()` to account for
/// the ℓ-truncation of the entries.
pub fn hermitian_extremal_eigs(matrix: &FiberMatrix) -> Result<(f64, f64)> {
    let n = matrix.dim();
    let frob: f64 = matrix
        .entries
        .iter()
        .map(|e| e.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let mut max_asym = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let asym = (matrix.entry(i, j) - matrix.entry(j, i).conj()).norm();
            max_asym = max_asym.max(asym);
        }
    }
    if max_asym > 1e-12 * frob.max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "fiber matrix is not Hermitian: max asymmetry {max_asym:.3e}"
        )));
    }
    let eigs = jacobi_eigenvalues(matrix.entries.clone(), n)?;
    let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix given in row-major
/// form. Each rotation factors the pivot's phase out (making the 2×2 block
/// real symmetric) and applies the classic symmetric Jacobi rotation.
fn jacobi_eigenvalues(mut a: Vec<Complex64>, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let frob: f64 = a.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = 1e-12 * frob;
    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            return Ok((0..n).map(|i| a[i * n + i].re).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (tau.abs() + (tau * tau + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Unitary: u_pp = c, u_pq = s, u_qp = -s·conj(phase),
                // u_qq = c·conj(phase).
                let phase_conj = phase.conj();
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    let new_ip = aip * c - aiq * phase_conj * s;
                    let new_iq = aip * s + aiq * phase_conj * c;
                    a[i * n + p] = new_ip;
                    a[p * n + i] = new_ip.conj();
                    a[i * n + q] = new_iq;
                    a[q * n + i] = new_iq.conj();
                }
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Err(Error::InvariantViolation(
        "Jacobi iteration did not converge in 60 sweeps".into(),
    ))
}

/// Grid-swept eigenvalue frame bounds.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrameBounds {
    /// Grid minimum of the fiber λ_min, an upper estimate of the true
    /// lower frame bound, clamped at 0.
    pub lower: f64,
    /// Grid maximum of the fiber λ_max, a lower estimate of the true
    /// upper frame bound.
    pub upper: f64,
    pub lambda_grid: u32,
    pub trunc_k: u32,
    pub ell_trunc: u32,
    /// Largest eigenvalue slack encountered over the grid.
    pub certified_slack: f64,
}

impl FrameBounds {
    /// True only when the lower bound survives its own slack.
    pub fn certifies_frame(&self) -> bool {
        self.lower - self.certified_slack > 0.0
    }
}

/// One grid row of the eigenvalue sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FiberEigRow {
    pub lambda: f64,
    pub eig_min: f64,
    pub eig_max: f64,
}

/// Eigenvalue sweep over `grid_points` equispaced residues in `[0, 2π/α)`.
pub fn fiber_eig_sweep(
    sys: &GaborSystem,
    grid_points: u32,
    trunc_k: u32,
    ell_trunc: u32,
) -> Result<(Vec<FiberEigRow>, f64)> {
    if grid_points < 1 {
        return Err(Error::InvalidArgument(
            "grid_points must be at least 1".into(),
        ));
    }
    let gamma = sys.freq_period();
    let mut rows = Vec::with_capacity(grid_points as usize);
    let mut slack = 0.0f64;
    for i in 0..grid_points {
        let lambda = gamma * i as f64 / grid_points as f64;
        let matrix = fiber_matrix(sys, lambda, trunc_k, ell_trunc)?;
        let (eig_min, eig_max) = hermitian_extremal_eigs(&matrix)?;
        slack = slack.max(matrix.eig_slack());
        rows.push(FiberEigRow {
            lambda,
            eig_min,
            eig_max,
        });
    }
    Ok((rows, slack))
}

/// Frame bounds `A = min_λ λ_min`, `B = max_λ λ_max` over the residue grid.
pub fn frame_bounds(
    sys: &GaborSystem,
    grid_points: u32,
    trunc_k: u32,
    ell_trunc: u32,
) -> Result<FrameBounds> {
    let (rows, slack) = fiber_eig_sweep(sys, grid_points, trunc_k, ell_trunc)?;
    let lower = rows.iter().map(|r| r.eig_min).fold(f64::INFINITY, f64::min);
    let upper = rows
        .iter()
        .map(|r| r.eig_max)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FrameBounds {
        lower: lower.max(0.0),
        upper,
        lambda_grid: grid_points,
        trunc_k,
        ell_trunc,
        certified_slack: slack,
    })
}

/// Picks the smallest modulation truncation L whose certified ℓ-tail stays
/// below `target` for every lattice frequency `|x| ≤ x_max` that the fiber
/// matrices will probe, capped at `max_l` for windows whose tails decay too
/// slowly to reach the target. The downstream computations recompute and
/// report the tail actually achieved, so the cap never weakens a
/// certificate; it only widens the reported slack.
pub fn auto_ell_trunc(sys: &GaborSystem, x_max: f64, target: f64, max_l: u32) -> u32 {
    let max_l = max_l.max(1);
    let mut l = 1u32;
    loop {
        let tail = sys
            .window()
            .freq_decay(x_max, sys.beta(), l)
            .max(sys.window().freq_decay(-x_max, sys.beta(), l));
        if tail <= target || l >= max_l {
            return l;
        }
        l = (l * 2).min(max_l);
    }
}

/// Outcome of the two-sided energy check for a single function.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub norm_sqr: f64,
    /// Truncated coefficient energy `S(f)`.
    pub energy: f64,
    /// `(A - slack - tol) · ‖f‖²`.
    pub lower: f64,
    /// `(B + slack + tol) · ‖f‖²`.
    pub upper: f64,
    pub family_tail: f64,
    pub passed: bool,
}

impl SandwichReport {
    pub fn ratio(&self) -> f64 {
        if self.norm_sqr > 0.0 {
            self.energy / self.norm_sqr
        } else {
            0.0
        }
    }
}

/// Checks `(A - slack - tol) ‖f‖² ≤ S(f) ≤ (B + slack + tol) ‖f‖²` where
/// `S(f)` is the truncated coefficient energy of the analysis family with
/// tail tolerance `tol`. A failed inequality is reported, not raised.
pub fn frame_sandwich_check(
    f: &TrigPolynomial,
    sys: &GaborSystem,
    bounds: &FrameBounds,
    tol: f64,
) -> Result<SandwichReport> {
    let fam = analysis_family(f, sys, tol)?;
    let energy = fam.bessel_total();
    let norm_sqr = f.norm_sqr();
    let lower = (bounds.lower - bounds.certified_slack - tol) * norm_sqr;
    let upper = (bounds.upper + bounds.certified_slack + tol) * norm_sqr;
    let passed = lower <= energy && energy <= upper;
    Ok(SandwichReport {
        norm_sqr,
        energy,
        lower,
        upper,
        family_tail: fam.tail_bound(),
        passed,
    })
}

/// Schur-test bound on the Bessel constant: row/column absolute sums of
/// the coefficient array `b^j_{ℓ,p} = ψ̂(λ_j + (2π/α)p - ℓβ)` give
/// `‖·‖ ≤ √(r·c)` per fiber, so the Bessel constant is at most `r·c`.
/// Truncated sums are completed with the certified absolute tails, which
/// must be finite (the rectangle window is rejected here: its spectrum is
/// not absolutely summable on lattices).
pub fn schur_bessel_bound(
    sys: &GaborSystem,
    residues: &[f64],
    p_trunc: u32,
    ell_trunc: u32,
) -> Result<f64> {
    if residues.is_empty() {
        return Err(Error::InvalidArgument("need at least one residue".into()));
    }
    let gamma = sys.freq_period();
    for &r in residues {
        if !(0.0..gamma).contains(&r) {
            return Err(Error::InvalidArgument(format!(
                "residue {r} outside [0, {gamma})"
            )));
        }
    }
    let probe = sys.window().freq_abs_decay(residues[0], gamma, p_trunc);
    if !probe.is_finite() {
        return Err(Error::UnsupportedWindow(format!(
            "window '{}' has no absolutely summable spectrum on lattices",
            sys.window().spec_string()
        )));
    }
    let window = sys.window();
    let beta = sys.beta();
    let l_max = ell_trunc as i64;
    let p_max = p_trunc as i64;

    let mut row_sup = 0.0f64;
    for &lambda in residues {
        for ell in -l_max..=l_max {
            let offset = lambda - ell as f64 * beta;
            let mut row: f64 = (-p_max..=p_max)
                .map(|p| window.fourier(offset + gamma * p as f64).norm())
                .sum();
            row += window.freq_abs_decay(offset, gamma, p_trunc);
            row_sup = row_sup.max(row);
        }
    }

    let mut col_sup = 0.0f64;
    for &lambda in residues {
        for p in -p_max..=p_max {
            let offset = lambda + gamma * p as f64;
            let mut col: f64 = (-l_max..=l_max)
                .map(|ell| window.fourier(offset - ell as f64 * beta).norm())
                .sum();
            col += window.freq_abs_decay(offset, beta, ell_trunc);
            col_sup = col_sup.max(col);
        }
    }
    Ok((row_sup * col_sup).sqrt())
}

/// A finite spectrum set `M = {μ_j}` for subspace frames.
#[derive(Clone, Debug)]
pub struct SpectrumSet {
    mu: Vec<f64>,
}

impl SpectrumSet {
    /// Sorts and deduplicates the points within [`TOL_FREQ`].
    pub fn new(mut mu: Vec<f64>) -> Self {
        mu.sort_by(f64::total_cmp);
        mu.dedup_by(|a, b| *a - *b < TOL_FREQ);
        Self { mu }
    }

    pub fn points(&self) -> &[f64] {
        &self.mu
    }

    /// Residue decomposition `μ_j = λ_j + (2π/α) p_j` of every point. The
    /// residues are pairwise distinct exactly when the set falls under the
    /// distinct-residue case; a collision is reported with the offending
    /// pair.
    pub fn residue_classes(&self, alpha: f64) -> Result<Vec<crate::ap::ResidueDecomposition>> {
        let gamma = std::f64::consts::TAU / alpha;
        let classes: Vec<_> = self
            .mu
            .iter()
            .map(|&mu| residue_decompose(mu, alpha))
            .collect::<Result<_>>()?;
        for i in 0..classes.len() {
            for j in (i + 1)..classes.len() {
                let d = (classes[i].residue - classes[j].residue).abs();
                if d.min(gamma - d) < TOL_FREQ {
                    return Err(Error::ResidueCollision {
                        i,
                        mu_i: self.mu[i],
                        j,
                        mu_j: self.mu[j],
                    });
                }
            }
        }
        Ok(classes)
    }
}

/// Exact frame bounds of the projected system `{ψ̂(μ_j - ℓβ) e_{μ_j}}` on
/// the span of the `e_{μ_j}`: per-point diagonal sums
/// `s_j = Σ_{|ℓ|≤L} |ψ̂(μ_j - ℓβ)|²` (plus the certified tail), returned as
/// `(min_j s_j, max_j s_j)`.
///
/// Requires all residues of `M` modulo `2π/α` to be distinct; colliding
/// points belong to the lattice-translate construction instead and are
/// reported as an error naming the pair.
pub fn subspace_frame_bounds(
    m: &SpectrumSet,
    sys: &GaborSystem,
    ell_trunc: u32,
) -> Result<(f64, f64)> {
    if m.points().is_empty() {
        return Err(Error::InvalidArgument("spectrum set is empty".into()));
    }
    m.residue_classes(sys.alpha())?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &mu in m.points() {
        let s = diagonal_sum(sys, mu, ell_trunc);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok((lo, hi))
}

fn diagonal_sum(sys: &GaborSystem, mu: f64, ell_trunc: u32) -> f64 {
    let l_max = ell_trunc as i64;
    let sum: f64 = (-l_max..=l_max)
        .map(|ell| {
            sys.window()
                .fourier(mu - ell as f64 * sys.beta())
                .norm_sqr()
        })
        .sum();
    sum + sys.window().freq_decay(mu, sys.beta(), ell_trunc)
}

/// Energies `Σ_{ℓ∈F} |ψ̂(μ_j - ℓβ)|²` of each spectrum point against a
/// fixed finite modulation set `F`; for decaying windows these fall to 0
/// along unbounded `μ_j`, which is why no finite `F` yields a frame there.
pub fn finite_modulation_failure(m: &SpectrumSet, sys: &GaborSystem, f_set: &[i64]) -> Vec<f64> {
    m.points()
        .iter()
        .map(|&mu| {
            f_set
                .iter()
                .map(|&ell| {
                    sys.window()
                        .fourier(mu - ell as f64 * sys.beta())
                        .norm_sqr()
                })
                .sum()
        })
        .collect()
}
