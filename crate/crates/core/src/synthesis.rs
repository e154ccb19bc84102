//! Output envelope of a phase-modulated field after a resonant filter.
//!
//! Three routes are provided, in increasing fidelity and cost:
//!
//! * [`approx_field`]: only the resonant harmonic is altered;
//! * [`sideband_field`]: the resonant harmonic plus `k` shells of
//!   neighbours on either side;
//! * [`exact_field`]: time-domain convolution with the absorber's
//!   Green's function (Lorentzian lines only).
//!
//! [`spectral_field`] filters every comb line and resynthesizes; it is the
//! frequency-domain counterpart of [`exact_field`].
//!
//! Envelopes are normalized to unit input amplitude and written in the frame
//! rotating at the carrier, so the unfiltered input is `e^{im sin Ωt}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel::{bessel_j, green_kernel_j1};
use crate::comb::{default_comb, default_truncation, FrequencyComb, ModulationSpec};
use crate::error::{Error, Result};
use crate::filterbank::{FilterModel, LorentzianFilter};
use crate::quadrature::PanelRule;

/// Uniform sampling of `[start, end]` including both endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    start: f64,
    end: f64,
    samples: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::invalid("samples", "need at least 2 samples"));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::invalid("grid", "need finite start < end"));
        }
        Ok(Self { start, end, samples })
    }

    /// `periods` whole periods from `start`, `samples_per_period` intervals
    /// each.
    pub fn periodic(start: f64, period: f64, periods: usize, samples_per_period: usize) -> Result<Self> {
        if periods == 0 {
            return Err(Error::invalid("periods", "must be >= 1"));
        }
        if samples_per_period == 0 {
            return Err(Error::invalid("samples_per_period", "must be >= 1"));
        }
        Self::new(start, start + periods as f64 * period, periods * samples_per_period + 1)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.samples - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            return self.end;
        }
        self.start + i as f64 * self.spacing()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(move |i| self.time(i))
    }

    /// Rejects grids coarser than `period / 200`.
    pub fn check_resolution(&self, period: f64) -> Result<()> {
        let max = period / 200.0;
        if self.spacing() > max * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "samples_per_period",
                format!("spacing {:e} s exceeds period/200 = {max:e} s", self.spacing()),
            ));
        }
        Ok(())
    }

    /// Same spacing, shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            start: self.start + offset,
            end: self.end + offset,
            samples: self.samples,
        }
    }
}

/// Complex envelope sampled on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTrace {
    grid: TimeGrid,
    envelope: Vec<Complex64>,
}

impl FieldTrace {
    pub fn new(grid: TimeGrid, envelope: Vec<Complex64>) -> Self {
        assert_eq!(grid.len(), envelope.len());
        Self { grid, envelope }
    }

    /// Evaluates `f(t)` at every grid time, in parallel.
    pub fn from_fn<F>(grid: TimeGrid, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let envelope = (0..grid.len()).into_par_iter().map(|i| f(grid.time(i))).collect();
        Self { grid, envelope }
    }

    pub fn try_from_fn<F>(grid: TimeGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64> + Sync,
    {
        let envelope = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.time(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, envelope })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    pub fn intensity(&self) -> IntensityTrace {
        IntensityTrace {
            grid: self.grid,
            values: self.envelope.iter().map(|e| e.norm_sqr()).collect(),
        }
    }

    /// Pointwise map of the envelope.
    pub fn map<F: Fn(f64, Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        let envelope = self
            .envelope
            .par_iter()
            .enumerate()
            .map(|(i, &e)| f(self.grid.time(i), e))
            .collect();
        Self {
            grid: self.grid,
            envelope,
        }
    }

    /// `max_t |E₁(t) − E₂(t)|` for traces on the same grid.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.envelope
            .iter()
            .zip(&other.envelope)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Intensity `|E|²/|E₀|²` on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityTrace {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl IntensityTrace {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_t |I₁(t) − I₂(t)|` for traces on the same grid.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Mean over one period starting at the first sample, by the trapezoid
    /// rule (spectrally exact for periodic band-limited signals).
    pub fn period_mean(&self, period: f64) -> f64 {
        let steps = (period / self.grid.spacing()).round() as usize;
        assert!(steps >= 1 && steps < self.values.len(), "trace shorter than one period");
        self.values[..steps].iter().sum::<f64>() / steps as f64
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }
}

/// Harmonic tuned to the filter and its residual detuning.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScenarioResonance {
    /// Index `n` of the comb line nearest the absorption line.
    pub harmonic: i32,
    /// `Δ_n` (rad/s).
    pub residual: f64,
}

impl ScenarioResonance {
    pub fn new(harmonic: i32, residual: f64) -> Self {
        Self { harmonic, residual }
    }

    pub fn exact(harmonic: i32) -> Self {
        Self::new(harmonic, 0.0)
    }

    /// Detuning of the whole field from the line, `Δ = nΩ + Δ_n`.
    pub fn carrier_detuning(&self, omega: f64) -> f64 {
        f64::from(self.harmonic) * omega + self.residual
    }

    /// Detuning of comb line `q` from the filter line, `Δ_n + (n − q)Ω`.
    pub fn line_detuning(&self, omega: f64, q: i32) -> f64 {
        self.residual + f64::from(self.harmonic - q) * omega
    }
}

fn check_transmission(t0: Complex64) -> Result<()> {
    if t0.norm() <= 1.0 + 1e-12 {
        Ok(())
    } else {
        Err(Error::invalid(
            "transmission",
            format!("|T| must be <= 1, got {}", t0.norm()),
        ))
    }
}

/// Input field with only the resonant harmonic multiplied by `t0`.
pub fn approx_field(
    modulation: &ModulationSpec,
    resonance: ScenarioResonance,
    t0: Complex64,
    grid: TimeGrid,
) -> Result<FieldTrace> {
    check_transmission(t0)?;
    let n = resonance.harmonic;
    let omega = modulation.omega();
    let weight = (t0 - 1.0) * bessel_j(n, modulation.index());
    Ok(FieldTrace::from_fn(grid, |t| {
        modulation.envelope(t) + weight * Complex64::from_polar(1.0, f64::from(n) * omega * t)
    }))
}

/// How many neighbour shells the sideband series keeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShellCount {
    Fixed(usize),
    /// Add shells until one more changes the envelope by less than `tol`
    /// (sup norm over the grid).
    Auto {
        tol: f64,
    },
}

impl ShellCount {
    pub const DEFAULT_AUTO_TOL: f64 = 1e-6;

    pub fn auto() -> Self {
        ShellCount::Auto {
            tol: Self::DEFAULT_AUTO_TOL,
        }
    }
}

/// Sideband-series envelope and the number of shells it kept.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesField {
    pub trace: FieldTrace,
    pub shells: usize,
}

/// Correction amplitudes `J_q(m)(T_q − 1)` for one tuned harmonic.
struct Corrections {
    lines: Vec<(i32, Complex64)>,
}

impl Corrections {
    fn line(
        modulation: &ModulationSpec,
        resonance: ScenarioResonance,
        filter: &FilterModel,
        q: i32,
    ) -> Result<(i32, Complex64)> {
        let delta = resonance.line_detuning(modulation.omega(), q);
        let t = filter.transmission(delta)?;
        Ok((q, (t - 1.0) * bessel_j(q, modulation.index())))
    }

    fn evaluate(&self, omega: f64, t: f64) -> Complex64 {
        self.lines
            .iter()
            .map(|&(q, a)| a * Complex64::from_polar(1.0, f64::from(q) * omega * t))
            .sum()
    }
}

/// Resonant harmonic plus `k` shells `n ± 1, …, n ± k` passed through `filter`,
/// with all other lines untouched.
pub fn sideband_field(
    modulation: &ModulationSpec,
    resonance: ScenarioResonance,
    filter: &FilterModel,
    grid: TimeGrid,
    shells: ShellCount,
) -> Result<SeriesField> {
    let n = resonance.harmonic;
    let omega = modulation.omega();
    let center = Corrections::line(modulation, resonance, filter, n)?;
    let mut corrections = Corrections { lines: vec![center] };

    let kept = match shells {
        ShellCount::Fixed(k) => {
            for j in 1..=k as i32 {
                corrections
                    .lines
                    .push(Corrections::line(modulation, resonance, filter, n + j)?);
                corrections
                    .lines
                    .push(Corrections::line(modulation, resonance, filter, n - j)?);
            }
            k
        }
        ShellCount::Auto { tol } => {
            let limit = default_truncation(modulation.index()) + n.unsigned_abs() as usize;
            let mut k = 0usize;
            loop {
                let j = (k + 1) as i32;
                let (qp, ap) = Corrections::line(modulation, resonance, filter, n + j)?;
                let (qm, am) = Corrections::line(modulation, resonance, filter, n - j)?;
                let shell = Corrections {
                    lines: vec![(qp, ap), (qm, am)],
                };
                let increment = (0..grid.len())
                    .into_par_iter()
                    .map(|i| shell.evaluate(omega, grid.time(i)).norm())
                    .reduce(|| 0.0, f64::max);
                if increment < tol {
                    break;
                }
                k += 1;
                if k > limit {
                    return Err(Error::SidebandLimit {
                        achieved: increment,
                        tol,
                        limit,
                    });
                }
                corrections.lines.extend(shell.lines);
            }
            k
        }
    };

    let trace = FieldTrace::from_fn(grid, |t| modulation.envelope(t) + corrections.evaluate(omega, t));
    Ok(SeriesField { trace, shells: kept })
}

/// Comb with every line `q` multiplied by the filter transmission at its
/// detuning.
pub fn filtered_comb(
    modulation: &ModulationSpec,
    resonance: ScenarioResonance,
    filter: &FilterModel,
) -> Result<FrequencyComb> {
    let base = default_comb(modulation);
    let n_max = base.n_max().max(resonance.harmonic.unsigned_abs() as usize + 8);
    let base = if n_max > base.n_max() {
        crate::comb::comb_amplitudes(modulation, n_max)?
    } else {
        base
    };
    let omega = modulation.omega();
    let mut failure = None;
    let comb = base.map(|q, c| match filter.transmission(resonance.line_detuning(omega, q)) {
        Ok(t) => c * t,
        Err(e) => {
            failure.get_or_insert(e);
            c
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(comb),
    }
}

/// Steady-state output from filtering every comb line.
pub fn spectral_field(
    modulation: &ModulationSpec,
    resonance: ScenarioResonance,
    filter: &FilterModel,
    grid: TimeGrid,
) -> Result<FieldTrace> {
    let comb = filtered_comb(modulation, resonance, filter)?;
    Ok(synthesize(&comb, modulation.omega(), grid))
}

/// `Σ c_q e^{iqΩt}` on the grid.
pub fn synthesize(comb: &FrequencyComb, omega: f64, grid: TimeGrid) -> FieldTrace {
    FieldTrace::from_fn(grid, |t| comb.synthesize(omega, t))
}

/// Accuracy settings for [`exact_field`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvolutionSettings {
    /// Target absolute error on the envelope (input amplitude is 1).
    pub tolerance: f64,
    /// Number of panel doublings attempted before giving up.
    pub max_refinements: u32,
}

impl Default for ConvolutionSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_refinements: 8,
        }
    }
}

/// Output of the semi-infinite Green's-function convolution
/// `E(t) = e^{im sin Ωt} − ∫₀^∞ j₁(bτ) e^{(iΔ−γ)τ} e^{im sin Ω(t−τ)} dτ`.
///
/// The input is periodic in `τ`, so the kernel is first folded onto one
/// period, `K̃(s) = Σ_p K(s + pT)`, and the remaining integral over `[0, T)`
/// is done with Gauss–Kronrod panels shared by all samples. Panels are
/// doubled until the Kronrod–Gauss difference is below the tolerance at
/// every sample.
pub fn exact_field(
    modulation: &ModulationSpec,
    resonance: ScenarioResonance,
    filter: &LorentzianFilter,
    grid: TimeGrid,
) -> Result<FieldTrace> {
    exact_field_with(modulation, resonance, filter, grid, ConvolutionSettings::default())
}

pub fn exact_field_with(
    modulation: &ModulationSpec,
    resonance: ScenarioResonance,
    filter: &LorentzianFilter,
    grid: TimeGrid,
    settings: ConvolutionSettings,
) -> Result<FieldTrace> {
    let b = filter.b();
    if b == 0.0 {
        return Ok(FieldTrace::from_fn(grid, |t| modulation.envelope(t)));
    }
    let gamma = filter.gamma();
    let omega = modulation.omega();
    let m = modulation.index();
    let period = modulation.period();
    let delta = resonance.carrier_detuning(omega);
    let tol = settings.tolerance;

    // |j₁| <= b, so the neglected tail is at most (b/γ)e^{−γτ_max}.
    let tail_time = ((10.0 * b / (gamma * tol)).ln() / gamma).max(30.0 / gamma);
    let folds = (tail_time / period).ceil().max(1.0) as usize;

    let scale = delta.abs() + m * omega + b + gamma;
    let mut panels = ((scale * period / 2.0).ceil() as usize).max(8);
    let mut achieved = f64::INFINITY;
    let mut evaluations = 0;

    for _ in 0..=settings.max_refinements {
        let rule = PanelRule::uniform(0.0, period, panels);
        let kernel: Vec<Complex64> = rule
            .nodes()
            .par_iter()
            .map(|&s| folded_kernel(b, gamma, delta, period, folds, s))
            .collect();
        let (node_sin, node_cos): (Vec<f64>, Vec<f64>) = rule.nodes().iter().map(|&s| (omega * s).sin_cos()).unzip();
        evaluations += kernel.len() * folds;

        let results: Vec<(Complex64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (st, ct) = (omega * grid.time(i)).sin_cos();
                let (integral, err) = rule.integrate_by(|j| {
                    // sin Ω(t − s) from the angle-difference identity
                    let phase = m * (st * node_cos[j] - ct * node_sin[j]);
                    kernel[j] * Complex64::from_polar(1.0, phase)
                });
                (Complex64::from_polar(1.0, m * st) - integral, err)
            })
            .collect();
        achieved = results.iter().map(|r| r.1).fold(0.0, f64::max);
        if achieved <= tol {
            return Ok(FieldTrace::new(grid, results.into_iter().map(|r| r.0).collect()));
        }
        panels *= 2;
    }
    Err(Error::NotConverged {
        achieved,
        requested: tol,
        evaluations,
    })
}

fn folded_kernel(b: f64, gamma: f64, delta: f64, period: f64, folds: usize, s: f64) -> Complex64 {
    let rate = Complex64::new(-gamma, delta);
    (0..folds)
        .map(|p| {
            let tau = s + p as f64 * period;
            green_kernel_j1(b, tau) * (rate * tau).exp()
        })
        .sum()
}

/// Agreement between the time-domain and comb-domain routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceReport {
    /// `max_t |E_exact − E_spectral|`.
    pub envelope: f64,
    /// `max_t |I_exact − I_spectral|`.
    pub intensity: f64,
}

impl EquivalenceReport {
    pub fn discrepancy(&self) -> f64 {
        self.envelope.max(self.intensity)
    }
}

pub fn spectral_equivalence_check(
    modulation: &ModulationSpec,
    resonance: ScenarioResonance,
    filter: &LorentzianFilter,
    grid: TimeGrid,
) -> Result<EquivalenceReport> {
    let exact = exact_field(modulation, resonance, filter, grid)?;
    let spectral = spectral_field(modulation, resonance, &FilterModel::Lorentzian(*filter), grid)?;
    Ok(EquivalenceReport {
        envelope: exact.sup_distance(&spectral),
        intensity: exact.intensity().sup_distance(&spectral.intensity()),
    })
}
