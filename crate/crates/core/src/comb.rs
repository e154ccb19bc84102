//! Spectral representation of a sinusoidally phase-modulated CW field.
//!
//! A field `E₀ e^{im sin Ωt}` is an equidistant comb with amplitudes `J_n(m)`
//! at offsets `nΩ` from the carrier (Jacobi–Anger expansion).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_j_symmetric};
use crate::error::{Error, Result};

/// Required spectral mass of a truncated comb.
pub const MASS_DEFICIT: f64 = 1e-12;

/// Phase program of the modulated field: angular frequency Ω and index m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    omega: f64,
    index: f64,
}

impl ModulationSpec {
    pub fn new(omega: f64, index: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid("omega_mod", format!("must be > 0, got {omega}")));
        }
        if !(index.is_finite() && index >= 0.0) {
            return Err(Error::invalid("index_m", format!("must be >= 0, got {index}")));
        }
        Ok(Self { omega, index })
    }

    pub fn from_hz(frequency_hz: f64, index: f64) -> Result<Self> {
        Self::new(TAU * frequency_hz, index)
    }

    /// Angular modulation frequency Ω (rad/s).
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / TAU
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    /// Modulation period `2π/Ω`.
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn with_index(&self, index: f64) -> Result<Self> {
        Self::new(self.omega, index)
    }

    /// The unfiltered field envelope `e^{im sin Ωt}`.
    pub fn envelope(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.index * (self.omega * t).sin())
    }
}

/// Complex amplitudes `c_n` for `|n| <= n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyComb {
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

impl FrequencyComb {
    /// Builds a comb from amplitudes ordered from `-n_max` to `n_max`.
    pub fn from_amplitudes(n_max: usize, amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(amplitudes.len(), 2 * n_max + 1);
        Self { n_max, amplitudes }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, n: i32) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes[(n + self.n_max as i32) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let offset = self.n_max as i32;
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i32 - offset, c))
    }

    /// `Σ |c_n|²`, the time-averaged intensity of the synthesized field.
    pub fn spectral_mass(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Applies a per-harmonic transfer factor.
    pub fn map<F: FnMut(i32, Complex64) -> Complex64>(&self, mut f: F) -> Self {
        let amplitudes = self.iter().map(|(n, c)| f(n, c)).collect();
        Self {
            n_max: self.n_max,
            amplitudes,
        }
    }

    /// `Σ_n c_n e^{inΩt}`.
    pub fn synthesize(&self, omega: f64, t: f64) -> Complex64 {
        // Rotate a unit phasor instead of calling exp per harmonic.
        let step = Complex64::from_polar(1.0, omega * t);
        let mut phasor = Complex64::from_polar(1.0, -(self.n_max as f64) * omega * t);
        let mut sum = Complex64::new(0.0, 0.0);
        for (i, &c) in self.amplitudes.iter().enumerate() {
            if i > 0 && i % 64 == 0 {
                // resync rounding drift along long combs
                phasor = Complex64::from_polar(1.0, (i as f64 - self.n_max as f64) * omega * t);
            }
            sum += c * phasor;
            phasor *= step;
        }
        sum
    }
}

/// Default truncation order `ceil(m + 12 m^{1/3} + 15)`.
pub fn default_truncation(index: f64) -> usize {
    (index + 12.0 * index.cbrt() + 15.0).ceil() as usize
}

/// Smallest order `N` with `Σ_{|n|<=N} J_n(m)² >= 1 - 1e-12`.
pub fn required_truncation(index: f64) -> usize {
    let probe = default_truncation(index).max(8) * 2;
    let table = bessel_j_symmetric(index, probe);
    let mut mass = table[probe] * table[probe];
    for n in 1..=probe {
        mass += 2.0 * table[probe + n] * table[probe + n];
        if 1.0 - mass <= MASS_DEFICIT {
            return n;
        }
    }
    probe
}

/// Unfiltered comb `c_n = J_n(m)` for `|n| <= n_max`.
pub fn comb_amplitudes(modulation: &ModulationSpec, n_max: usize) -> Result<FrequencyComb> {
    if n_max < 1 {
        return Err(Error::invalid("n_max", "must be >= 1"));
    }
    let table = bessel_j_symmetric(modulation.index(), n_max);
    let mass: f64 = table.iter().map(|v| v * v).sum();
    if 1.0 - mass > MASS_DEFICIT {
        return Err(Error::TruncationTooSmall {
            requested: n_max,
            required: required_truncation(modulation.index()),
        });
    }
    let amplitudes = table.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    Ok(FrequencyComb { n_max, amplitudes })
}

/// Comb at the default truncation order for its index.
pub fn default_comb(modulation: &ModulationSpec) -> FrequencyComb {
    comb_amplitudes(modulation, default_truncation(modulation.index()))
        .expect("default truncation order satisfies the mass invariant")
}

/// Location of the first maximum of `J_n(m)` over `m > 0`.
///
/// The maximum lies just above `m = n`. The bracket
/// `[n, n + 2n^{1/3} + 5]` is scanned upward until `J_n` starts to
/// decrease, and the isolated peak is refined by golden-section search.
pub fn optimal_index(n: u32) -> f64 {
    assert!(n >= 1, "optimal_index is defined for n >= 1");
    let order = n as i32;
    let lo = f64::from(n);
    let hi = lo + 2.0 * lo.cbrt() + 5.0;
    let step = 0.02;
    let f = |m: f64| bessel_j(order, m);

    let mut prev = lo;
    let mut prev_val = f(lo);
    let mut m = lo + step;
    let (mut a, mut b) = (lo, hi);
    while m <= hi {
        let val = f(m);
        if val < prev_val {
            a = (prev - step).max(lo);
            b = m;
            break;
        }
        prev = m;
        prev_val = val;
        m += step;
    }
    golden_max(f, a, b, 1e-6)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Phase difference `ψ_n(t) = nΩt − m sin Ωt` between the comb and the
/// coherently scattered n-th component.
pub fn phase_psi(n: i32, modulation: &ModulationSpec, t: f64) -> f64 {
    let x = modulation.omega() * t;
    f64::from(n) * x - modulation.index() * x.sin()
}

/// Times within `[t0, t0 + period)` where `ψ_n(t) = (2k+1)π`.
pub fn odd_pi_crossings(n: i32, modulation: &ModulationSpec, t0: f64, samples: usize) -> Vec<f64> {
    let period = modulation.period();
    let dt = period / samples as f64;
    let g = |t: f64| {
        // distance of ψ from the nearest odd multiple of π, in (-π, π]
        let psi = phase_psi(n, modulation, t) - PI;
        psi - TAU * (psi / TAU).round()
    };
    let mut roots = Vec::new();
    for i in 0..samples {
        let (ta, tb) = (t0 + i as f64 * dt, t0 + (i + 1) as f64 * dt);
        let (ga, gb) = (g(ta), g(tb));
        // sign change not caused by the ±π wrap
        if ga == 0.0 {
            roots.push(ta);
        } else if ga * gb < 0.0 && (ga - gb).abs() < PI {
            let (mut lo, mut hi, mut glo) = (ta, tb, ga);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm * glo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn modulation(index: f64) -> ModulationSpec {
        ModulationSpec::from_hz(30e6, index).unwrap()
    }

    #[test]
    fn rejects_bad_modulation() {
        assert!(ModulationSpec::new(0.0, 1.0).is_err());
        assert!(ModulationSpec::new(1.0, -0.1).is_err());
        assert!(ModulationSpec::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn unmodulated_comb_is_single_line() {
        let comb = comb_amplitudes(&modulation(0.0), 3).unwrap();
        assert_eq!(comb.get(0), Complex64::new(1.0, 0.0));
        for n in [-3, -2, -1, 1, 2, 3] {
            assert_eq!(comb.get(n), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn completeness_at_m_1_8() {
        let comb = comb_amplitudes(&modulation(1.8), 12).unwrap();
        assert_abs_diff_eq!(comb.spectral_mass(), 1.0, epsilon = 1e-10);
        assert_eq!(comb.get(1).re, bessel_j(1, 1.8));
    }

    #[test]
    fn rejects_short_truncation_with_required_order() {
        let err = comb_amplitudes(&modulation(1.8), 3).unwrap_err();
        match err {
            Error::TruncationTooSmall { requested, required } => {
                assert_eq!(requested, 3);
                assert!(required > 3 && required <= default_truncation(1.8));
                assert!(comb_amplitudes(&modulation(1.8), required).is_ok());
                assert!(comb_amplitudes(&modulation(1.8), required - 1).is_err());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn default_truncation_for_two_pi() {
        assert_eq!(default_truncation(TAU), 44);
        let comb = default_comb(&modulation(TAU));
        assert!(1.0 - comb.spectral_mass() <= MASS_DEFICIT);
    }

    #[test]
    fn optimal_indices() {
        assert_abs_diff_eq!(optimal_index(1), 1.8, epsilon = 0.05);
        assert_abs_diff_eq!(optimal_index(2), 3.1, epsilon = 0.05);
        assert_abs_diff_eq!(optimal_index(3), 4.2, epsilon = 0.05);
        assert_abs_diff_eq!(optimal_index(5), 6.4, epsilon = 0.05);
        assert_abs_diff_eq!(optimal_index(10), 11.8, epsilon = 0.05);
        assert_abs_diff_eq!(optimal_index(100), 104.0, epsilon = 0.5);
        // first zero of J_n' (tabulated)
        assert_abs_diff_eq!(optimal_index(1), 1.841_183_781, epsilon = 2e-6);
        assert_abs_diff_eq!(optimal_index(5), 6.415_616_376, epsilon = 2e-6);
    }

    #[test]
    fn psi_values() {
        let m = modulation(1.8);
        for n in [-3, 0, 1, 7] {
            assert_eq!(phase_psi(n, &m, 0.0), 0.0);
        }
        let t = PI / m.omega();
        assert_abs_diff_eq!(phase_psi(1, &m, t), PI, epsilon = 1e-12);
        let t = 0.37e-8;
        assert_abs_diff_eq!(
            phase_psi(3, &m, t + m.period()),
            phase_psi(3, &m, t) + 3.0 * TAU,
            epsilon = 1e-9
        );
    }

    #[test]
    fn one_odd_pi_crossing_per_period_for_n1() {
        let m = modulation(1.8);
        let roots = odd_pi_crossings(1, &m, 0.0, 4000);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0] * m.omega(), PI, epsilon = 1e-9);
    }

    #[test]
    fn synthesize_matches_direct_sum() {
        let m = modulation(4.2);
        let comb = default_comb(&m);
        let t = 1.234e-8;
        let direct: Complex64 = comb
            .iter()
            .map(|(n, c)| c * Complex64::from_polar(1.0, f64::from(n) * m.omega() * t))
            .sum();
        assert!((comb.synthesize(m.omega(), t) - direct).norm() < 1e-13);
    }
}
