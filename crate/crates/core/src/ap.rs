//! Finite-spectrum almost periodic functions and sequences.
//!
//! [`TrigPolynomial`] stores `f(t) = Σ c_j e^{i λ_j t}` as a canonical term
//! list (frequencies strictly increasing, separated by at least [`TOL_FREQ`],
//! no zero coefficients). [`APSequence`] is the discrete analogue
//! `a(n) = Σ c_j e^{i θ_j n}` with phases kept in `[0, 2π)` and identified
//! modulo `2π`. On this class the mean-value inner products reduce to
//! Parseval sums over matched frequencies, and the long-time averages that
//! define them have closed forms which serve as independent oracles:
//! [`time_average_inner`] and [`seq_time_average`].

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::windows::Window;
use crate::{Error, Result};

/// Frequencies (and phases, in radians) closer than this are identified.
/// Far below any frequency gap used in practice, far above double-precision
/// noise on the scales handled here.
pub const TOL_FREQ: f64 = 1e-9;

/// Coefficients with modulus below this are pruned as zero.
pub const TOL_COEFF: f64 = 1e-15;

/// One term `coeff · e^{i freq t}` of a trigonometric polynomial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyTerm {
    /// Frequency in radians per unit time.
    pub freq: f64,
    pub coeff: Complex64,
}

/// One term `coeff · e^{i phase n}` of an almost periodic sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeqTerm {
    /// Phase in `[0, 2π)`.
    pub phase: f64,
    pub coeff: Complex64,
}

/// A finite trigonometric polynomial `Σ c_j e^{i λ_j t}`.
///
/// Terms are kept sorted by frequency, frequencies within [`TOL_FREQ`] are
/// merged (coefficients summed) and coefficients below [`TOL_COEFF`] are
/// dropped, so equality of the term lists is a canonical-form comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PolynomialJson", into = "PolynomialJson")]
pub struct TrigPolynomial {
    terms: Vec<PolyTerm>,
}

impl TrigPolynomial {
    /// Builds a polynomial from `(frequency, coefficient)` pairs, merging
    /// near-equal frequencies and pruning zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (f64, Complex64)>) -> Self {
        let mut raw: Vec<PolyTerm> = terms
            .into_iter()
            .map(|(freq, coeff)| PolyTerm { freq, coeff })
            .collect();
        raw.sort_by(|a, b| a.freq.total_cmp(&b.freq));
        let mut merged: Vec<PolyTerm> = Vec::with_capacity(raw.len());
        for term in raw {
            match merged.last_mut() {
                Some(last) if term.freq - last.freq < TOL_FREQ => last.coeff += term.coeff,
                _ => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff.norm() >= TOL_COEFF);
        Self { terms: merged }
    }

    /// The pure exponential `e_λ`.
    pub fn exponential(freq: f64) -> Self {
        Self::new([(freq, Complex64::new(1.0, 0.0))])
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[PolyTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Fourier coefficient at `freq` (zero when no term matches within
    /// [`TOL_FREQ`]).
    pub fn coefficient(&self, freq: f64) -> Complex64 {
        let idx = self.terms.partition_point(|t| t.freq < freq - TOL_FREQ);
        match self.terms.get(idx) {
            Some(t) if (t.freq - freq).abs() < TOL_FREQ => t.coeff,
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Pointwise evaluation `f(t)`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.coeff * Complex64::new(0.0, term.freq * t).exp())
            .sum()
    }

    /// Mean-value inner product `(f, g)` via Parseval: coefficients are
    /// paired over frequencies that match within [`TOL_FREQ`].
    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            if a.freq < b.freq - TOL_FREQ {
                i += 1;
            } else if b.freq < a.freq - TOL_FREQ {
                j += 1;
            } else {
                sum += a.coeff * b.coeff.conj();
                i += 1;
                j += 1;
            }
        }
        sum
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Sum of coefficient moduli `Σ |c_j|`.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Translation `(T_x f)(t) = f(t - x)`: multiplies each coefficient by
    /// `e^{-i λ_j x}`.
    pub fn translate(&self, x: f64) -> Self {
        Self::new(self.terms.iter().map(|t| {
            let rot = Complex64::new(0.0, -t.freq * x).exp();
            (t.freq, t.coeff * rot)
        }))
    }

    /// Modulation `(M_ω f)(t) = e^{i ω t} f(t)`: shifts every frequency by ω.
    pub fn modulate(&self, omega: f64) -> Self {
        Self::new(self.terms.iter().map(|t| (t.freq + omega, t.coeff)))
    }

    /// Convolution with an integrable window: each coefficient is multiplied
    /// by `ψ̂(λ_j)`, since `(e_λ ∗ ψ)(t) = ψ̂(λ) e^{iλt}`.
    pub fn convolve(&self, window: &dyn Window) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| (t.freq, t.coeff * window.fourier(t.freq))),
        )
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.terms.iter().map(|t| (t.freq, t.coeff * factor)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|t| (t.freq, t.coeff)),
        )
    }
}

/// A finite almost periodic sequence `Σ c_j e^{i θ_j n}`.
///
/// Phases are reduced to `[0, 2π)` and identified modulo `2π`; the same
/// merge/prune canonicalization as [`TrigPolynomial`] applies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SequenceJson", into = "SequenceJson")]
pub struct APSequence {
    terms: Vec<SeqTerm>,
}

impl APSequence {
    /// Builds a sequence from `(phase, coefficient)` pairs; phases are wrapped
    /// into `[0, 2π)` and merged modulo `2π` within [`TOL_FREQ`].
    pub fn new(terms: impl IntoIterator<Item = (f64, Complex64)>) -> Self {
        let mut raw: Vec<SeqTerm> = terms
            .into_iter()
            .map(|(phase, coeff)| SeqTerm {
                phase: wrap_phase(phase),
                coeff,
            })
            .collect();
        raw.sort_by(|a, b| a.phase.total_cmp(&b.phase));
        let mut merged: Vec<SeqTerm> = Vec::with_capacity(raw.len());
        for term in raw {
            match merged.last_mut() {
                Some(last) if term.phase - last.phase < TOL_FREQ => last.coeff += term.coeff,
                _ => merged.push(term),
            }
        }
        // A cluster may also straddle the 0 / 2π seam.
        if merged.len() > 1 {
            let first_phase = merged[0].phase;
            let last_phase = merged.last().unwrap().phase;
            if first_phase + TAU - last_phase < TOL_FREQ {
                let last = merged.pop().unwrap();
                merged[0].coeff += last.coeff;
            }
        }
        merged.retain(|t| t.coeff.norm() >= TOL_COEFF);
        Self { terms: merged }
    }

    /// The pure exponential sequence `ẽ_λ(n) = e^{iλn}`.
    pub fn exponential(phase: f64) -> Self {
        Self::new([(phase, Complex64::new(1.0, 0.0))])
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[SeqTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient at `phase` (matched modulo `2π` within [`TOL_FREQ`]).
    pub fn coefficient(&self, phase: f64) -> Complex64 {
        let phase = wrap_phase(phase);
        for t in &self.terms {
            if phase_distance(t.phase, phase) < TOL_FREQ {
                return t.coeff;
            }
        }
        Complex64::new(0.0, 0.0)
    }

    /// Pointwise evaluation `a(n)`.
    pub fn eval(&self, n: i64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.coeff * Complex64::new(0.0, term.phase * n as f64).exp())
            .sum()
    }

    /// Mean-value inner product `(a, b)` via Parseval over phases matched
    /// modulo `2π`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            if a.phase < b.phase - TOL_FREQ {
                i += 1;
            } else if b.phase < a.phase - TOL_FREQ {
                j += 1;
            } else {
                sum += a.coeff * b.coeff.conj();
                i += 1;
                j += 1;
            }
        }
        // Canonical sequences hold at most one term near the 0 / 2π seam, so
        // cross-sequence seam matches cannot have been consumed above.
        if let (Some(fa), Some(lb)) = (self.terms.first(), other.terms.last()) {
            if fa.phase + TAU - lb.phase < TOL_FREQ {
                sum += fa.coeff * lb.coeff.conj();
            }
        }
        if let (Some(fb), Some(la)) = (other.terms.first(), self.terms.last()) {
            if fb.phase + TAU - la.phase < TOL_FREQ {
                sum += la.coeff * fb.coeff.conj();
            }
        }
        sum
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn coeff_abs_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Pointwise multiplication by `e^{i delta n}`: shifts every phase by
    /// `delta` modulo `2π`.
    pub fn modulate(&self, delta: f64) -> Self {
        Self::new(self.terms.iter().map(|t| (t.phase + delta, t.coeff)))
    }
}

fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(TAU);
    if p >= TAU {
        p -= TAU;
    }
    p
}

/// Distance between two phases in `[0, 2π)` measured on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(TAU - d)
}

/// Exact value of `(2T)^{-1} ∫_{-T}^{T} f(t) conj(g(t)) dt`.
///
/// Pairs of terms integrate in closed form, `∫_{-T}^{T} e^{iδt} dt =
/// 2 sin(δT)/δ` for `δ ≠ 0` and `2T` otherwise, so this is an independent
/// oracle for [`TrigPolynomial::inner`] with `O(1/T)` averaging error.
pub fn time_average_inner(f: &TrigPolynomial, g: &TrigPolynomial, t_max: f64) -> Result<Complex64> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "averaging half-length must be positive, got {t_max}"
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for a in f.terms() {
        for b in g.terms() {
            let delta = a.freq - b.freq;
            let weight = if delta == 0.0 {
                1.0
            } else {
                (delta * t_max).sin() / (delta * t_max)
            };
            sum += a.coeff * b.coeff.conj() * weight;
        }
    }
    Ok(sum)
}

/// Exact value of `(2p+1)^{-1} Σ_{n=-p}^{p} a(n) conj(b(n))` by the
/// Dirichlet-kernel closed form; independent oracle for
/// [`APSequence::inner`].
///
/// The symmetric sum has `2p+1` terms, hence the `2p+1` divisor; the limit
/// is the same as with a `2p` divisor.
pub fn seq_time_average(a: &APSequence, b: &APSequence, p: u64) -> Result<Complex64> {
    if p < 1 {
        return Err(Error::InvalidArgument(
            "summation half-length p must be at least 1".into(),
        ));
    }
    let count = (2 * p + 1) as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for x in a.terms() {
        for y in b.terms() {
            let delta = x.phase - y.phase;
            let half_sin = (delta / 2.0).sin();
            let weight = if delta == 0.0 || half_sin == 0.0 {
                1.0
            } else {
                (count * delta / 2.0).sin() / (count * half_sin)
            };
            sum += x.coeff * y.coeff.conj() * weight;
        }
    }
    Ok(sum)
}

/// Decomposition `λ = residue + (2π/α)·index` with `residue ∈ [0, 2π/α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueDecomposition {
    pub residue: f64,
    pub index: i64,
}

impl ResidueDecomposition {
    pub fn reconstruct(&self, alpha: f64) -> f64 {
        self.residue + TAU / alpha * self.index as f64
    }
}

/// Splits `λ` into its residue class modulo the frequency lattice `2π/α ℤ`.
pub fn residue_decompose(lambda: f64, alpha: f64) -> Result<ResidueDecomposition> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let gamma = TAU / alpha;
    let mut index = (lambda / gamma).floor();
    let mut residue = lambda - gamma * index;
    if residue >= gamma {
        residue -= gamma;
        index += 1.0;
    }
    if residue < 0.0 {
        residue += gamma;
        index -= 1.0;
    }
    Ok(ResidueDecomposition {
        residue,
        index: index as i64,
    })
}

/// Lower estimate of the amalgam norm `sup_t (∫_t^{t+1} |f|² ds)^{1/2}`.
///
/// The window integral is evaluated in closed form (every product of
/// exponentials integrates exactly); the sup is taken over `t` on a grid of
/// step `grid_step` covering one quasi-period `P`: when all frequency gaps
/// are commensurable `P = 2π/g` for their common refinement `g`, otherwise
/// the heuristic `P = max(1, 2π/min_gap) · 10`. Being a grid max, the
/// result is a lower estimate of the true sup; it is `≥ ‖f‖_AP` up to grid
/// error.
pub fn stepanov_norm(f: &TrigPolynomial, grid_step: f64) -> Result<f64> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid_step must be positive, got {grid_step}"
        )));
    }
    let terms = f.terms();
    if terms.is_empty() {
        return Ok(0.0);
    }
    let constant: f64 = terms.iter().map(|t| t.coeff.norm_sqr()).sum();
    if terms.len() == 1 {
        return Ok(constant.sqrt());
    }

    // Cross-term data: for each pair j < k the window integral contributes
    // 2 Re( c_j conj(c_k) e^{iδt} w(δ) ) with w(δ) = (e^{iδ} - 1)/(iδ).
    struct Cross {
        weight: Complex64,
        step_rot: Complex64,
        delta: f64,
    }
    let mut gaps: Vec<f64> = Vec::new();
    let mut crosses: Vec<(Complex64, Cross)> = Vec::new();
    for j in 0..terms.len() {
        for k in (j + 1)..terms.len() {
            let delta = terms[j].freq - terms[k].freq;
            gaps.push(delta.abs());
            let weight = (Complex64::new(0.0, delta).exp() - 1.0) / Complex64::new(0.0, delta);
            crosses.push((
                terms[j].coeff * terms[k].coeff.conj(),
                Cross {
                    weight,
                    step_rot: Complex64::new(0.0, delta * grid_step).exp(),
                    delta,
                },
            ));
        }
    }

    let period = quasi_period(&gaps);
    let n_steps = (period / grid_step).ceil() as u64;
    if n_steps > 20_000_000 {
        return Err(Error::InvalidArgument(format!(
            "grid_step {grid_step} over quasi-period {period} needs {n_steps} points; \
             refusing more than 2e7"
        )));
    }

    let mut rotations: Vec<Complex64> = crosses.iter().map(|_| Complex64::new(1.0, 0.0)).collect();
    let mut sup_sqr: f64 = 0.0;
    for i in 0..=n_steps {
        // Refresh the incremental rotations periodically to cap drift.
        if i % 65_536 == 0 {
            let t = i as f64 * grid_step;
            for (rot, (_, c)) in rotations.iter_mut().zip(&crosses) {
                *rot = Complex64::new(0.0, c.delta * t).exp();
            }
        }
        let mut value = constant;
        for (rot, (prod, c)) in rotations.iter_mut().zip(&crosses) {
            value += 2.0 * (*prod * *rot * c.weight).re;
            *rot *= c.step_rot;
        }
        if value > sup_sqr {
            sup_sqr = value;
        }
    }
    Ok(sup_sqr.max(0.0).sqrt())
}

/// Common refinement of the gaps if they are commensurable, else the
/// heuristic fallback period.
fn quasi_period(gaps: &[f64]) -> f64 {
    let positive: Vec<f64> = gaps.iter().copied().filter(|g| *g > TOL_FREQ).collect();
    if positive.is_empty() {
        return 1.0;
    }
    let min_gap = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let mut g = positive[0];
    for &x in &positive[1..] {
        g = float_gcd(g, x);
    }
    let commensurable = g > 1e-6
        && positive
            .iter()
            .all(|&x| (x / g - (x / g).round()).abs() < 1e-6);
    if commensurable {
        TAU / g
    } else {
        (TAU / min_gap).max(1.0) * 10.0
    }
}

fn float_gcd(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b > 1e-9 {
        let r = a - b * (a / b).floor();
        a = b;
        b = r;
    }
    a
}

// --- JSON wire format ---------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PolyTermJson {
    freq: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolynomialJson {
    terms: Vec<PolyTermJson>,
}

impl From<PolynomialJson> for TrigPolynomial {
    fn from(json: PolynomialJson) -> Self {
        TrigPolynomial::new(
            json.terms
                .into_iter()
                .map(|t| (t.freq, Complex64::new(t.re, t.im))),
        )
    }
}

impl From<TrigPolynomial> for PolynomialJson {
    fn from(poly: TrigPolynomial) -> Self {
        PolynomialJson {
            terms: poly
                .terms
                .iter()
                .map(|t| PolyTermJson {
                    freq: t.freq,
                    re: t.coeff.re,
                    im: t.coeff.im,
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SeqTermJson {
    phase: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SequenceJson {
    terms: Vec<SeqTermJson>,
}

impl From<SequenceJson> for APSequence {
    fn from(json: SequenceJson) -> Self {
        APSequence::new(
            json.terms
                .into_iter()
                .map(|t| (t.phase, Complex64::new(t.re, t.im))),
        )
    }
}

impl From<APSequence> for SequenceJson {
    fn from(seq: APSequence) -> Self {
        SequenceJson {
            terms: seq
                .terms
                .iter()
                .map(|t| SeqTermJson {
                    phase: t.phase,
                    re: t.coeff.re,
                    im: t.coeff.im,
                })
                .collect(),
        }
    }
}
