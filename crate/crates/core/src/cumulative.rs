//! Removal of several comb lines at once and pedestal suppression.

use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::comb::ModulationSpec;
use crate::error::{Error, Result};
use crate::synthesis::{FieldTrace, TimeGrid};

/// A comb line passed with transmission `transmission` (0 removes it).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemovedLine {
    pub harmonic: i32,
    pub transmission: Complex64,
}

impl RemovedLine {
    pub fn opaque(harmonic: i32) -> Self {
        Self {
            harmonic,
            transmission: Complex64::new(0.0, 0.0),
        }
    }

    pub fn partial(harmonic: i32, transmission: Complex64) -> Self {
        Self { harmonic, transmission }
    }
}

/// `e^{im sin Ωt} − Σ_j (1 − T_j) J_{n_j}(m) e^{i n_j Ωt}`.
pub fn multi_removal_field(modulation: &ModulationSpec, removed: &[RemovedLine], grid: TimeGrid) -> Result<FieldTrace> {
    for (i, line) in removed.iter().enumerate() {
        if removed[..i].iter().any(|o| o.harmonic == line.harmonic) {
            return Err(Error::invalid(
                "removed",
                format!("harmonic {} listed twice", line.harmonic),
            ));
        }
        if line.transmission.norm() > 1.0 + 1e-12 {
            return Err(Error::invalid(
                "removed.transmission",
                format!("|T| must be <= 1 at harmonic {}", line.harmonic),
            ));
        }
    }
    let m = modulation.index();
    let omega = modulation.omega();
    let weights: Vec<(f64, Complex64)> = removed
        .iter()
        .map(|l| {
            (
                f64::from(l.harmonic) * omega,
                (1.0 - l.transmission) * bessel_j(l.harmonic, m),
            )
        })
        .collect();
    Ok(FieldTrace::from_fn(grid, |t| {
        let removed: Complex64 = weights
            .iter()
            .map(|&(w, a)| a * Complex64::from_polar(1.0, w * t))
            .sum();
        modulation.envelope(t) - removed
    }))
}

/// Subtracts `R·e^{im sin Ωt}` from `base`, as from interference with an
/// attenuated, phase-flipped copy of the input.
pub fn pedestal_reduced_field(base: &FieldTrace, modulation: &ModulationSpec, reduction: f64) -> Result<FieldTrace> {
    if !(0.0..=1.0).contains(&reduction) {
        return Err(Error::invalid(
            "reduction",
            format!("must lie in [0, 1], got {reduction}"),
        ));
    }
    if reduction == 0.0 {
        return Ok(base.clone());
    }
    Ok(base.map(|t, e| e - reduction * modulation.envelope(t)))
}

/// `R = 1 − Σ_j J_{n_j}(m)`, which cancels the field at the center of the
/// bunch when the lines `n_j` are removed.
pub fn reduction_factor(index: f64, harmonics: &[i32]) -> f64 {
    1.0 - harmonics.iter().map(|&n| bessel_j(n, index)).sum::<f64>()
}

/// Candidate closed forms for the doublet's reduced peak amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubletPeak {
    /// `2[J_a(m) + J_b(m)]`
    pub sum: f64,
    /// `2[J_a(m) − J_b(m)]`
    pub difference: f64,
}

pub fn doublet_peak_amplitude(index: f64, first: i32, second: i32) -> DoubletPeak {
    let a = bessel_j(first, index);
    let b = bessel_j(second, index);
    DoubletPeak {
        sum: 2.0 * (a + b),
        difference: 2.0 * (a - b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{approx_field, ScenarioResonance};
    use proptest::prelude::*;

    fn grid(modulation: &ModulationSpec, periods: usize, spp: usize) -> TimeGrid {
        TimeGrid::periodic(0.0, modulation.period(), periods, spp).unwrap()
    }

    fn femto(index: f64, hz: f64) -> ModulationSpec {
        ModulationSpec::from_hz(hz, index).unwrap()
    }

    #[test]
    fn nothing_removed_is_identity() {
        let m = femto(104.0, 10e9);
        let trace = multi_removal_field(&m, &[], grid(&m, 1, 500)).unwrap();
        assert!(trace.intensity().values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let unity = [RemovedLine::partial(100, Complex64::new(1.0, 0.0))];
        let trace = multi_removal_field(&m, &unity, grid(&m, 1, 500)).unwrap();
        assert!(trace.intensity().values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn single_removal_equals_approx() {
        let m = femto(104.0, 10e9);
        let g = grid(&m, 1, 2000);
        let removed = multi_removal_field(&m, &[RemovedLine::opaque(100)], g).unwrap();
        let approx = approx_field(&m, ScenarioResonance::exact(100), Complex64::new(0.0, 0.0), g).unwrap();
        assert!(removed.sup_distance(&approx) < 1e-13);
    }

    #[test]
    fn rejects_duplicates_and_gain() {
        let m = femto(104.0, 10e9);
        let g = grid(&m, 1, 10);
        let dup = [RemovedLine::opaque(100), RemovedLine::opaque(100)];
        assert!(multi_removal_field(&m, &dup, g).is_err());
        let gain = [RemovedLine::partial(100, Complex64::new(1.5, 0.0))];
        assert!(multi_removal_field(&m, &gain, g).is_err());
    }

    #[test]
    fn single_removal_peak() {
        let m = femto(104.0, 10e9);
        let trace = multi_removal_field(&m, &[RemovedLine::opaque(100)], grid(&m, 1, 20000))
            .unwrap()
            .intensity();
        let j = bessel_j(100, 104.0);
        assert!((1.0 + 2.0 * j - 1.29).abs() < 0.005);
        assert!(trace.max() >= 1.25);
        assert!((trace.max() - (1.0 + j) * (1.0 + j)).abs() < 1e-4);
    }

    #[test]
    fn five_lines_beat_one() {
        let one = femto(104.0, 10e9);
        let single = multi_removal_field(&one, &[RemovedLine::opaque(100)], grid(&one, 1, 20000))
            .unwrap()
            .intensity();
        let five = femto(103.0, 10e9);
        let lines: Vec<_> = [96, 98, 100, 102, 104].map(RemovedLine::opaque).to_vec();
        let multi = multi_removal_field(&five, &lines, grid(&five, 1, 20000))
            .unwrap()
            .intensity();
        assert!(multi.max() / multi.min() > single.max() / single.min());
    }

    #[test]
    fn doublet_pedestal_reduction() {
        let m = femto(103.0, 4.6e9);
        let g = grid(&m, 1, 20000);
        let base = multi_removal_field(&m, &[RemovedLine::opaque(100), RemovedLine::opaque(98)], g).unwrap();
        let r = reduction_factor(103.0, &[100, 98]);
        let reduced = pedestal_reduced_field(&base, &m, r).unwrap().intensity();
        // bunch center of the doublet sits at t = T/2
        let center = g.len() / 2;
        let window = &reduced.values()[center - 200..center + 200];
        let central_min = window.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(central_min < 0.02);

        let forms = doublet_peak_amplitude(103.0, 100, 98);
        assert!((forms.sum - 0.55).abs() < 0.01);
        assert!(forms.difference.abs() < 0.02);
        assert!((reduced.max().sqrt() - forms.sum).abs() < 1e-3);
    }

    #[test]
    fn zero_reduction_is_identity() {
        let m = femto(103.0, 4.6e9);
        let base = multi_removal_field(&m, &[RemovedLine::opaque(100)], grid(&m, 1, 50)).unwrap();
        assert_eq!(pedestal_reduced_field(&base, &m, 0.0).unwrap(), base);
        assert!(pedestal_reduced_field(&base, &m, 1.2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn removal_is_linear(
            a in proptest::collection::btree_set(-8i32..8, 0..4),
            b in proptest::collection::btree_set(9i32..16, 0..4),
            t_re in 0.0f64..0.7,
        ) {
            let m = femto(6.4, 300e6);
            let g = grid(&m, 1, 128);
            let t = Complex64::new(t_re, 0.2);
            let lines = |set: &std::collections::BTreeSet<i32>| -> Vec<RemovedLine> {
                set.iter().map(|&n| RemovedLine::partial(n, t)).collect()
            };
            let both: Vec<_> = lines(&a).into_iter().chain(lines(&b)).collect();
            let ea = multi_removal_field(&m, &lines(&a), g).unwrap();
            let eb = multi_removal_field(&m, &lines(&b), g).unwrap();
            let eab = multi_removal_field(&m, &both, g).unwrap();
            for (i, tt) in g.times().enumerate() {
                let carrier = m.envelope(tt);
                let sum = carrier + (ea.envelope()[i] - carrier) + (eb.envelope()[i] - carrier);
                prop_assert!((eab.envelope()[i] - sum).norm() < 1e-13);
            }

            let mass: f64 = (-40..=40)
                .map(|n: i32| {
                    let j = bessel_j(n, m.index());
                    if a.contains(&n) || b.contains(&n) { (j * t).norm_sqr() } else { j * j }
                })
                .sum();
            let mean = eab.intensity().period_mean(m.period());
            prop_assert!((mean - mass).abs() < 1e-6);
        }
    }
}
