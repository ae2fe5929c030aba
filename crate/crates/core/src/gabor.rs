//! Analysis and synthesis maps between almost periodic functions and
//! sequence families.
//!
//! For a window ψ and lattice steps α, β the analysis map sends `f` to the
//! sequences `(⟨f, T_{αk} M_{βℓ} ψ⟩)_k`, one per modulation index ℓ. On
//! trigonometric polynomials everything is exact: each frequency λ of `f`
//! contributes `c · conj(ψ̂(λ - ℓβ))` at phase `λα`, and phases are merged
//! modulo 2π, which is precisely the residue grouping modulo the lattice
//! `2π/α ℤ`. The synthesis map `a ↦ Σ_k a_k T_{kα} ψ` has Fourier
//! coefficients `α⁻¹ ψ̂(μ)(a, ẽ_{μα})`; [`periodization_oracle`] recovers
//! them from long time averages of the actual translate sum as an
//! independent check.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ap::{residue_decompose, APSequence, TrigPolynomial, TOL_FREQ};
use crate::windows::Window;
use crate::{Error, Result};

/// A Gabor system `(T_{αk} M_{βℓ} ψ)_{k,ℓ}`.
#[derive(Clone)]
pub struct GaborSystem {
    window: Arc<dyn Window>,
    alpha: f64,
    beta: f64,
}

impl GaborSystem {
    pub fn new(window: Arc<dyn Window>, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Ok(Self {
            window,
            alpha,
            beta,
        })
    }

    pub fn window(&self) -> &dyn Window {
        self.window.as_ref()
    }

    pub fn window_arc(&self) -> Arc<dyn Window> {
        Arc::clone(&self.window)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Spacing `2π/α` of the frequency lattice generated by the translates.
    pub fn freq_period(&self) -> f64 {
        TAU / self.alpha
    }
}

/// The analysis coefficients of `f` for all computed modulation indices,
/// with a certified bound on the dropped `Σ_{|ℓ|>L} ‖a^ℓ‖²`.
#[derive(Clone, Debug)]
pub struct AnalysisFamily {
    entries: BTreeMap<i64, APSequence>,
    ell_truncation: u32,
    tail_bound: f64,
}

impl AnalysisFamily {
    pub fn entries(&self) -> &BTreeMap<i64, APSequence> {
        &self.entries
    }

    pub fn entry(&self, ell: i64) -> Option<&APSequence> {
        self.entries.get(&ell)
    }

    pub fn ell_truncation(&self) -> u32 {
        self.ell_truncation
    }

    /// Certified upper bound on the squared norm dropped by the truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Total coefficient energy `Σ_ℓ ‖a^ℓ‖²` of the computed entries; the
    /// untruncated total exceeds this by at most [`Self::tail_bound`].
    pub fn bessel_total(&self) -> f64 {
        self.entries.values().map(APSequence::norm_sqr).sum()
    }
}

/// Analysis sequence `(⟨f, T_{αk} M_{βℓ} ψ⟩)_k = Σ_j c_j conj(ψ̂(λ_j - ℓβ))
/// ẽ_{λ_j α}` with phases merged modulo 2π.
pub fn analysis_sequence(f: &TrigPolynomial, sys: &GaborSystem, ell: i64) -> APSequence {
    analysis_with(f, sys.window(), sys.alpha(), sys.beta(), ell)
}

fn analysis_with(
    f: &TrigPolynomial,
    window: &dyn Window,
    alpha: f64,
    beta: f64,
    ell: i64,
) -> APSequence {
    APSequence::new(f.terms().iter().map(|t| {
        let coeff = t.coeff * window.fourier(t.freq - ell as f64 * beta).conj();
        (t.freq * alpha, coeff)
    }))
}

/// Computes analysis sequences for `|ℓ| ≤ L`, with `L` chosen so the
/// window's frequency decay certifies `Σ_{|ℓ|>L} ‖a^ℓ‖² ≤ tol·‖f‖²`.
///
/// The certificate uses Cauchy–Schwarz: the dropped sum is at most
/// `n · Σ_j |c_j|² · freq_decay(λ_j, β, L)` for an `n`-term polynomial.
pub fn analysis_family(f: &TrigPolynomial, sys: &GaborSystem, tol: f64) -> Result<AnalysisFamily> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    if f.is_zero() {
        return Ok(AnalysisFamily {
            entries: BTreeMap::new(),
            ell_truncation: 0,
            tail_bound: 0.0,
        });
    }
    let n = f.terms().len() as f64;
    let budget = tol * f.norm_sqr();
    let tail_at = |l: u32| -> f64 {
        n * f
            .terms()
            .iter()
            .map(|t| t.coeff.norm_sqr() * sys.window().freq_decay(t.freq, sys.beta(), l))
            .sum::<f64>()
    };
    let mut ell_trunc = 1u32;
    let mut tail = tail_at(ell_trunc);
    while tail > budget {
        if ell_trunc >= 4_000_000 {
            return Err(Error::UnsupportedWindow(format!(
                "frequency decay bound of '{}' cannot certify tail {tail:.3e} <= {budget:.3e}",
                sys.window().spec_string()
            )));
        }
        ell_trunc = (ell_trunc * 2).min(4_000_000);
        tail = tail_at(ell_trunc);
    }
    let mut entries = BTreeMap::new();
    for ell in -(ell_trunc as i64)..=(ell_trunc as i64) {
        let seq = analysis_sequence(f, sys, ell);
        if !seq.is_zero() {
            entries.insert(ell, seq);
        }
    }
    Ok(AnalysisFamily {
        entries,
        ell_truncation: ell_trunc,
        tail_bound: tail,
    })
}

/// Truncation of the orthogonal-system element `h_{λ,ℓ} = Σ_p
/// ψ̂(λ + (2π/α)p - ℓβ) e_{λ + (2π/α)p}` to `|p| ≤ P`, together with a
/// certified bound on the AP norm of the dropped part.
pub fn h_lambda(
    sys: &GaborSystem,
    lambda: f64,
    ell: i64,
    p_trunc: u32,
) -> Result<(TrigPolynomial, f64)> {
    let gamma = sys.freq_period();
    if !(0.0..gamma).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} outside the fundamental domain [0, {gamma})"
        )));
    }
    if p_trunc < 1 {
        return Err(Error::InvalidArgument("P must be at least 1".into()));
    }
    let shift = ell as f64 * sys.beta();
    let poly = TrigPolynomial::new((-(p_trunc as i64)..=(p_trunc as i64)).map(|p| {
        let freq = lambda + gamma * p as f64;
        (freq, sys.window().fourier(freq - shift))
    }));
    let cert = sys
        .window()
        .freq_decay(lambda - shift, gamma, p_trunc)
        .sqrt();
    Ok((poly, cert))
}

/// Residue clusters of the spectrum of `f` modulo `2π/α`, as
/// `(representative residue, lattice indices of the member frequencies)`.
fn residue_clusters(f: &TrigPolynomial, alpha: f64) -> Result<Vec<(f64, Vec<i64>)>> {
    let gamma = TAU / alpha;
    let mut decomposed: Vec<(f64, i64)> = f
        .terms()
        .iter()
        .map(|t| {
            let d = residue_decompose(t.freq, alpha)?;
            Ok((d.residue, d.index))
        })
        .collect::<Result<_>>()?;
    decomposed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<(f64, Vec<i64>)> = Vec::new();
    for (residue, index) in decomposed {
        match clusters.last_mut() {
            Some((rep, members)) if residue - *rep < TOL_FREQ => members.push(index),
            _ => clusters.push((residue, vec![index])),
        }
    }
    // A cluster can straddle the 0 / γ seam: those members sit one lattice
    // step above the representative near 0.
    if clusters.len() > 1 {
        let first_rep = clusters[0].0;
        let last_rep = clusters.last().unwrap().0;
        if first_rep + gamma - last_rep < TOL_FREQ {
            let (_, members) = clusters.pop().unwrap();
            for index in members {
                clusters[0].1.push(index + 1);
            }
        }
    }
    Ok(clusters)
}

/// Coefficient energy `Σ_λ |(f, h_{λ,ℓ})|²` summed over the residues of the
/// spectrum of `f`: an independent code path that must agree with
/// `‖analysis_sequence(f, sys, ℓ)‖²`.
///
/// Exactness requires the lattice truncation to cover every frequency of
/// `f`; if some frequency sits at lattice index `|p| > P` the identity
/// would silently lose it, so that case is an error.
pub fn analysis_norm_via_h(
    f: &TrigPolynomial,
    sys: &GaborSystem,
    ell: i64,
    p_trunc: u32,
) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let clusters = residue_clusters(f, sys.alpha())?;
    for (residue, members) in &clusters {
        for &index in members {
            if index.unsigned_abs() > u64::from(p_trunc) {
                return Err(Error::TruncationCertificate(format!(
                    "frequency at residue {residue} has lattice index {index}, \
                     beyond the truncation P = {p_trunc}"
                )));
            }
        }
    }
    let mut total = 0.0;
    for (residue, _) in clusters {
        let (h, _cert) = h_lambda(sys, residue, ell, p_trunc)?;
        total += f.inner(&h).norm_sqr();
    }
    Ok(total)
}

/// Synthesis `a ↦ Σ_k a_k T_{kα} ψ` on the lattice truncation `|p| ≤ P`:
/// each phase θ of `a` emits frequencies `μ = (θ + 2πp)/α` with coefficient
/// `α⁻¹ ψ̂(μ) (a, ẽ_{μα})`. Returns the polynomial and a certified bound on
/// the AP norm of the dropped lattice tail.
pub fn synthesis(
    a: &APSequence,
    window: &dyn Window,
    alpha: f64,
    p_trunc: u32,
) -> Result<(TrigPolynomial, f64)> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let gamma = TAU / alpha;
    let mut terms = Vec::new();
    for t in a.terms() {
        for p in -(p_trunc as i64)..=(p_trunc as i64) {
            let mu = (t.phase + TAU * p as f64) / alpha;
            terms.push((mu, window.fourier(mu) * t.coeff / alpha));
        }
    }
    let cert = a
        .terms()
        .iter()
        .map(|t| t.coeff.norm() / alpha * window.freq_decay(t.phase / alpha, gamma, p_trunc).sqrt())
        .sum();
    Ok((TrigPolynomial::new(terms), cert))
}

/// Synthesis of a whole analysis family by the absolutely convergent
/// modulation sum: the coefficient at each candidate frequency λ is
/// `Σ_ℓ ψ̂(λ - ℓβ) (a^ℓ, ẽ_{λα})`.
///
/// Note the coefficient rule here carries no `α⁻¹`, matching the
/// frequency-side definition; single-index synthesis via [`synthesis`]
/// differs from it by exactly that factor.
pub fn gabor_synthesis(fam: &AnalysisFamily, sys: &GaborSystem, p_trunc: u32) -> TrigPolynomial {
    let alpha = sys.alpha();
    let mut candidates: Vec<f64> = Vec::new();
    for seq in fam.entries().values() {
        for t in seq.terms() {
            for p in -(p_trunc as i64)..=(p_trunc as i64) {
                candidates.push((t.phase + TAU * p as f64) / alpha);
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| *a - *b < TOL_FREQ);
    let terms = candidates.into_iter().map(|mu| {
        let mut coeff = Complex64::new(0.0, 0.0);
        for (ell, seq) in fam.entries() {
            let weight = seq.coefficient(mu * alpha);
            if weight != Complex64::new(0.0, 0.0) {
                coeff += sys.window().fourier(mu - *ell as f64 * sys.beta()) * weight;
            }
        }
        (mu, coeff)
    });
    TrigPolynomial::new(terms)
}

/// Residual of the adjoint identity between analysis and synthesis:
/// `|(S f, b) - α (f, T b)|`, which vanishes up to truncation slack.
pub fn adjoint_residual(
    f: &TrigPolynomial,
    b: &APSequence,
    window: &dyn Window,
    alpha: f64,
    p_trunc: u32,
) -> Result<f64> {
    let analysis = analysis_with(f, window, alpha, 1.0, 0);
    let lhs = analysis.inner(b);
    let (synth, _cert) = synthesis(b, window, alpha, p_trunc)?;
    let rhs = f.inner(&synth) * alpha;
    Ok((lhs - rhs).norm())
}

/// Time-domain oracle for the synthesis coefficients: evaluates
/// `g(t) = Σ_{|k|≤K} a(k) ψ(t - kα)` on a grid and returns the trapezoid
/// approximation of `(2T)⁻¹ ∫_{-T}^{T} g(t) e^{-iμt} dt`.
///
/// The window must certify (via `time_decay`) that translates beyond the
/// truncation contribute negligibly on the averaging interval.
pub fn periodization_oracle(
    a: &APSequence,
    window: &dyn Window,
    alpha: f64,
    mu: f64,
    t_max: f64,
    dt: f64,
    k_trunc: u32,
) -> Result<Complex64> {
    if !(alpha.is_finite() && alpha > 0.0)
        || !(t_max.is_finite() && t_max > 0.0)
        || !(dt.is_finite() && dt > 0.0)
    {
        return Err(Error::InvalidArgument(
            "alpha, T and dt must all be positive".into(),
        ));
    }
    if a.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let amp = a.coeff_abs_sum();
    // Certify the truncation: dropped translate centers sit at least
    // `dist` beyond the averaging interval; each unit interval out there
    // holds at most ceil(1/α)+1 centers, so their total sup is covered by
    // the per-unit-interval decay sum.
    let dist = k_trunc as f64 * alpha - t_max;
    if dist < 2.0 {
        return Err(Error::UnsupportedWindow(format!(
            "K·alpha = {} does not clear the averaging half-length T = {t_max}",
            k_trunc as f64 * alpha
        )));
    }
    let covering = (1.0 / alpha).ceil() + 1.0;
    let tail = covering * window.time_decay((dist - 1.0).floor() as u32) * amp;
    if tail > 1e-6 * amp.max(1.0) {
        return Err(Error::UnsupportedWindow(format!(
            "time decay certifies only {tail:.3e} for the dropped translates"
        )));
    }

    // Effective radius beyond which a translate's contribution at a point
    // is below 1e-12 in total.
    let mut radius = None;
    for r in 1..=100_000u32 {
        if window.time_decay(r) <= 1e-12 {
            radius = Some(r as f64 + 2.0);
            break;
        }
    }
    let radius = radius.unwrap_or(k_trunc as f64 * alpha + t_max + 1.0);

    let k_max = k_trunc as i64;
    let coeffs: Vec<Complex64> = (-k_max..=k_max).map(|k| a.eval(k)).collect();

    let n = ((2.0 * t_max) / dt).ceil() as usize;
    let h = 2.0 * t_max / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let t = -t_max + h * i as f64;
        let k_lo = (((t - radius) / alpha).ceil() as i64).max(-k_max);
        let k_hi = (((t + radius) / alpha).floor() as i64).min(k_max);
        let mut g = Complex64::new(0.0, 0.0);
        for k in k_lo..=k_hi {
            g += coeffs[(k + k_max) as usize] * window.eval(t - k as f64 * alpha);
        }
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += g * Complex64::new(0.0, -mu * t).exp() * w;
    }
    Ok(sum * h / (2.0 * t_max))
}

// --- JSON wire format -----------------------------------------------------

/// Serialized form of an [`AnalysisFamily`] together with the system that
/// produced it.
#[derive(Serialize, Deserialize)]
pub struct AnalysisFamilyRecord {
    pub alpha: f64,
    pub beta: f64,
    pub window: String,
    pub entries: BTreeMap<String, APSequence>,
    pub tail_bound: f64,
}

impl AnalysisFamilyRecord {
    pub fn new(fam: &AnalysisFamily, sys: &GaborSystem) -> Self {
        Self {
            alpha: sys.alpha(),
            beta: sys.beta(),
            window: sys.window().spec_string(),
            entries: fam
                .entries()
                .iter()
                .map(|(ell, seq)| (ell.to_string(), seq.clone()))
                .collect(),
            tail_bound: fam.tail_bound(),
        }
    }
}
