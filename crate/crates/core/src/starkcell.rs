//! Resonant filtering inside a cell whose transition frequency is swept by
//! an rf Stark field `Δ(t) = Δ_b + Δ_rf cos Ωt`.
//!
//! In the frame co-moving with the swept transition the incident CW field
//! becomes a comb `J_n(m)` with `m = Δ_rf/Ω`, and harmonic `n` sits at
//! detuning `Δ_b − nΩ` from the line. The steady state multiplies each
//! harmonic by the line transmission there; returning to the laboratory
//! frame undoes the phase program.

use num_complex::Complex64;

use crate::comb::{comb_amplitudes, default_truncation, FrequencyComb, ModulationSpec};
use crate::error::{Error, Result};
use crate::filterbank::{DopplerFilter, FilterModel, LorentzianFilter};
use crate::synthesis::{FieldTrace, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarkCellSpec {
    /// Coherence decay rate γ (rad/s).
    pub gamma: f64,
    /// Resonant optical depth at the cell exit.
    pub depth: f64,
    /// Static bias detuning Δ_b (rad/s).
    pub bias: f64,
    /// rf sweep amplitude Δ_rf (rad/s).
    pub rf_amplitude: f64,
    /// rf angular frequency Ω (rad/s).
    pub rf_omega: f64,
    /// Optional Doppler FWHM (rad/s) of the transition.
    pub doppler_fwhm: Option<f64>,
}

impl StarkCellSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rf_omega.is_finite() && self.rf_omega > 0.0) {
            return Err(Error::invalid("rf_frequency", "must be > 0"));
        }
        if !(self.rf_amplitude.is_finite() && self.rf_amplitude >= 0.0) {
            return Err(Error::invalid("rf_amplitude", "must be >= 0"));
        }
        if !self.bias.is_finite() {
            return Err(Error::invalid("bias", "must be finite"));
        }
        self.line().map(|_| ())
    }

    /// `m = Δ_rf / Ω`.
    pub fn index(&self) -> f64 {
        self.rf_amplitude / self.rf_omega
    }

    pub fn modulation(&self) -> Result<ModulationSpec> {
        ModulationSpec::new(self.rf_omega, self.index())
    }

    /// The transition's lineshape as a filter.
    pub fn line(&self) -> Result<FilterModel> {
        Ok(match self.doppler_fwhm {
            None => LorentzianFilter::new(self.gamma, self.depth)?.into(),
            Some(w) => DopplerFilter::new(self.gamma, w, self.depth)?.into(),
        })
    }
}

/// Co-moving comb at the exit: `c_n = J_n(m)·T(Δ_b − nΩ)`.
pub fn stark_steady_comb(cell: &StarkCellSpec, index_override: Option<f64>) -> Result<FrequencyComb> {
    cell.validate()?;
    let index = index_override.unwrap_or_else(|| cell.index());
    let modulation = ModulationSpec::new(cell.rf_omega, index)?;
    let line = cell.line()?;
    let n_max = default_truncation(index);
    let comb = comb_amplitudes(&modulation, n_max)?;
    let mut amplitudes = Vec::with_capacity(2 * n_max + 1);
    for (n, c) in comb.iter() {
        let t = line.transmission(cell.bias - f64::from(n) * cell.rf_omega)?;
        amplitudes.push(c * t);
    }
    Ok(FrequencyComb::from_amplitudes(n_max, amplitudes))
}

/// Laboratory-frame exit envelope `e^{−im sin Ωt}·Σ c_n e^{inΩt}`.
pub fn stark_output_field(cell: &StarkCellSpec, grid: TimeGrid) -> Result<FieldTrace> {
    let comb = stark_steady_comb(cell, None)?;
    let omega = cell.rf_omega;
    let m = cell.index();
    Ok(FieldTrace::from_fn(grid, |t| {
        Complex64::from_polar(1.0, -m * (omega * t).sin()) * comb.synthesize(omega, t)
    }))
}
