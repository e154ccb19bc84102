//! Chirp compensation by a far-detuned, optically thick absorber.
//!
//! Each comb line `n` sees the line wing at detuning `Δ_c − nΩ` and is
//! delayed by `τ_d = (αLγ/2)/(Δ_c − nΩ)²`. Expanding the wing phase in `n`
//! gives a linear delay, group-delay dispersion and a third-order term.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::bessel::bessel_j_symmetric;
use crate::comb::{default_comb, default_truncation, ModulationSpec};
use crate::error::{Error, Result};
use crate::filterbank::LorentzianFilter;
use crate::synthesis::{FieldTrace, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersiveSpec {
    filter: LorentzianFilter,
    carrier_detuning: f64,
    modulation: ModulationSpec,
}

impl DispersiveSpec {
    /// Requires `|Δ_c| > 100γ`.
    pub fn new(gamma: f64, depth: f64, carrier_detuning: f64, modulation: ModulationSpec) -> Result<Self> {
        let filter = LorentzianFilter::new(gamma, depth)?;
        if !(carrier_detuning.is_finite() && carrier_detuning.abs() > 100.0 * gamma) {
            return Err(Error::invalid(
                "carrier_detuning",
                format!("|Δ_c| must exceed 100·gamma = {:e} rad/s", 100.0 * gamma),
            ));
        }
        Ok(Self {
            filter,
            carrier_detuning,
            modulation,
        })
    }

    pub fn filter(&self) -> &LorentzianFilter {
        &self.filter
    }

    pub fn carrier_detuning(&self) -> f64 {
        self.carrier_detuning
    }

    pub fn modulation(&self) -> &ModulationSpec {
        &self.modulation
    }

    pub fn with_depth(&self, depth: f64) -> Result<Self> {
        Self::new(self.filter.gamma(), depth, self.carrier_detuning, self.modulation)
    }
}

/// Full wing response: `Σ J_n(m) e^{inΩt} T(Δ_c − nΩ)`.
pub fn dispersive_field(spec: &DispersiveSpec, grid: TimeGrid) -> FieldTrace {
    let omega = spec.modulation.omega();
    let comb = default_comb(&spec.modulation)
        .map(|n, c| c * spec.filter.transmission(spec.carrier_detuning - f64::from(n) * omega));
    FieldTrace::from_fn(grid, |t| comb.synthesize(omega, t))
}

/// Wing phase `−(αLγ/2)/(Δ_c − nΩ) ≈ φ_d − a n − ε₁ n² − ε₂ n³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaylorCoeffs {
    /// Common phase `φ_d = −(αLγ/2)/Δ_c`.
    pub phase: f64,
    /// Linear delay in units of the modulation phase, `a`.
    pub delay: f64,
    /// Quadratic (group-delay dispersion) coefficient `ε₁`.
    pub gvd: f64,
    /// Cubic coefficient `ε₂`.
    pub tod: f64,
}

pub fn taylor_coeffs(spec: &DispersiveSpec) -> TaylorCoeffs {
    let b = spec.filter.b();
    let d = spec.carrier_detuning;
    let x = spec.modulation.omega() / d;
    TaylorCoeffs {
        phase: -b / d,
        delay: b / d * x,
        gvd: b / d * x * x,
        tod: b / d * x * x * x,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    Gvd,
    GvdTod,
}

/// `e^{iφ_d} Σ J_n(m) e^{in(Ωt − a − ε₁n [− ε₂n²])}`.
pub fn truncated_field(spec: &DispersiveSpec, order: Truncation, grid: TimeGrid) -> FieldTrace {
    truncated_with(spec.modulation, taylor_coeffs(spec), order, grid)
}

fn truncated_with(modulation: ModulationSpec, coeffs: TaylorCoeffs, order: Truncation, grid: TimeGrid) -> FieldTrace {
    let comb = default_comb(&modulation).map(|n, c| {
        let n = f64::from(n);
        let cubic = match order {
            Truncation::Gvd => 0.0,
            Truncation::GvdTod => coeffs.tod * n * n * n,
        };
        c * Complex64::from_polar(1.0, coeffs.phase - coeffs.delay * n - coeffs.gvd * n * n - cubic)
    });
    let omega = modulation.omega();
    FieldTrace::from_fn(grid, |t| comb.synthesize(omega, t))
}

/// `Σ iⁿ J_n(m) e^{−iε₁n²}`, the GVD-only amplitude at `Ωt − a = π/2`.
pub fn peak_sum(spec: &DispersiveSpec) -> Complex64 {
    peak_sum_for(spec.modulation.index(), taylor_coeffs(spec).gvd)
}

pub fn peak_sum_for(index: f64, gvd: f64) -> Complex64 {
    let n_max = default_truncation(index);
    let table = bessel_j_symmetric(index, n_max);
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, &j) in table.iter().enumerate() {
        let n = k as i64 - n_max as i64;
        let quarter = Complex64::from_polar(1.0, FRAC_PI_2 * (n.rem_euclid(4)) as f64);
        let nf = n as f64;
        sum += j * quarter * Complex64::from_polar(1.0, -gvd * nf * nf);
    }
    sum
}

/// Edge detunings `Δ_c ∓ mΩ` of the comb.
pub fn comb_edges(carrier_detuning: f64, modulation: &ModulationSpec) -> (f64, f64) {
    let span = modulation.index() * modulation.omega();
    (carrier_detuning - span, carrier_detuning + span)
}

/// Optical depth at which the delay difference between the comb edges is
/// half a modulation period: `(αLγ/2)(1/Δ_min² − 1/Δ_max²) = π/Ω`.
pub fn depth_for_compression(gamma: f64, carrier_detuning: f64, modulation: &ModulationSpec) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be > 0"));
    }
    let (lo, hi) = comb_edges(carrier_detuning, modulation);
    if lo <= 0.0 {
        return Err(Error::invalid(
            "carrier_detuning",
            format!("comb edge Δ_c − mΩ = {lo:e} rad/s reaches the line"),
        ));
    }
    let spread = 1.0 / (lo * lo) - 1.0 / (hi * hi);
    Ok(2.0 * PI / (modulation.omega() * gamma * spread))
}

/// Peak of the GVD-only intensity, reported as `Ωt_p − a` wrapped to
/// `(−π, π]`.
pub fn locate_gvd_peak(spec: &DispersiveSpec, samples: usize) -> f64 {
    let modulation = spec.modulation;
    let coeffs = taylor_coeffs(spec);
    let omega = modulation.omega();
    let comb = default_comb(&modulation).map(|n, c| {
        let n = f64::from(n);
        c * Complex64::from_polar(1.0, -coeffs.gvd * n * n)
    });
    // intensity as a function of the local phase θ = Ωt − a
    let intensity = |theta: f64| comb.synthesize(omega, theta / omega).norm_sqr();
    let step = TAU / samples as f64;
    let (best, _) = (0..samples)
        .map(|i| -PI + (i as f64 + 0.5) * step)
        .map(|theta| (theta, intensity(theta)))
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let refined = golden_max(intensity, best - step, best + step, 1e-10);
    (refined + PI).rem_euclid(TAU) - PI
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
