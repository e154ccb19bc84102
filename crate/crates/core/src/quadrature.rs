//! Gauss–Kronrod (7, 15) quadrature for complex-valued integrands.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1]; odd entries are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const NODES_PER_PANEL: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Node offsets on [-1, 1] in the storage order used by [`panel_sum`].
fn unit_nodes() -> [f64; NODES_PER_PANEL] {
    let mut nodes = [0.0; NODES_PER_PANEL];
    for j in 0..7 {
        nodes[2 * j] = -XGK[j];
        nodes[2 * j + 1] = XGK[j];
    }
    nodes[14] = 0.0;
    nodes
}

/// Kronrod value and |Kronrod − Gauss| from the 15 samples of one panel
/// of half-width `half`, ordered as in [`unit_nodes`].
fn panel_sum(values: &[Complex64], half: f64) -> (Complex64, f64) {
    let center = values[14];
    let mut kronrod = center * WGK[7];
    let mut gauss = center * WG[3];
    for j in 0..7 {
        let pair = values[2 * j] + values[2 * j + 1];
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// One 15-point Gauss–Kronrod panel on `[a, b]`.
pub fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut values = [Complex64::new(0.0, 0.0); NODES_PER_PANEL];
    for (v, x) in values.iter_mut().zip(unit_nodes()) {
        *v = f(center + half * x);
    }
    panel_sum(&values, half)
}

#[derive(Clone, Copy, Debug)]
struct Interval {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Tolerance `max(abs, rel·|I|)` on the summed error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

/// Globally adaptive integration: repeatedly bisects the interval with the
/// largest error estimate. `breakpoints` inside `(a, b)` seed the partition.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
    max_intervals: usize,
) -> Result<Estimate> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        evaluations += NODES_PER_PANEL;
        heap.push(Interval {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    loop {
        let total: Complex64 = heap.iter().map(|iv| iv.value).sum();
        let error: f64 = heap.iter().map(|iv| iv.error).sum();
        let target = tol.abs.max(tol.rel * total.norm());
        if error <= target {
            return Ok(Estimate {
                value: total,
                error,
                evaluations,
            });
        }
        if heap.len() >= max_intervals {
            return Err(Error::NotConverged {
                achieved: error / total.norm().max(f64::MIN_POSITIVE),
                requested: tol.rel,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, lo, hi);
            evaluations += NODES_PER_PANEL;
            heap.push(Interval {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

/// A fixed partition of `[a, b]` into equal Gauss–Kronrod panels.
///
/// Useful when many integrals share the same nodes: sample the integrand
/// once per node with [`PanelRule::nodes`] and reduce with
/// [`PanelRule::integrate`].
#[derive(Clone, Debug)]
pub struct PanelRule {
    a: f64,
    half: f64,
    panels: usize,
    nodes: Vec<f64>,
}

impl PanelRule {
    pub fn uniform(a: f64, b: f64, panels: usize) -> Self {
        assert!(panels >= 1 && b > a);
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let unit = unit_nodes();
        let nodes = (0..panels)
            .flat_map(|p| {
                let center = a + (p as f64 + 0.5) * width;
                unit.into_iter().map(move |x| center + half * x)
            })
            .collect();
        Self { a, half, panels, nodes }
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Integral and summed |Kronrod − Gauss| estimate from values sampled at
    /// [`PanelRule::nodes`].
    pub fn integrate(&self, values: &[Complex64]) -> (Complex64, f64) {
        assert_eq!(values.len(), self.nodes.len());
        self.integrate_by(|j| values[j])
    }

    /// As [`PanelRule::integrate`], with the value at node `j` produced on
    /// demand.
    pub fn integrate_by<F: FnMut(usize) -> Complex64>(&self, mut value: F) -> (Complex64, f64) {
        let mut buf = [Complex64::new(0.0, 0.0); NODES_PER_PANEL];
        let mut total = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for p in 0..self.panels {
            let offset = p * NODES_PER_PANEL;
            for (i, v) in buf.iter_mut().enumerate() {
                *v = value(offset + i);
            }
            let (v, e) = panel_sum(&buf, self.half);
            total += v;
            error += e;
        }
        (total, error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TIGHT: Tolerance = Tolerance { abs: 1e-14, rel: 1e-12 };

    #[test]
    fn exact_for_low_degree_polynomials() {
        let f = |x: f64| Complex64::new(x.powi(9) - 3.0 * x.powi(4) + 1.0, x * x);
        let (v, _) = gk15(&f, -1.0, 2.0);
        let re = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        let im = (8.0 + 1.0) / 3.0;
        assert_abs_diff_eq!(v.re, re, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, im, epsilon = 1e-12);
    }

    #[test]
    fn oscillatory_exponential() {
        // ∫_0^10 e^{i 7x} dx = (e^{70i} - 1) / 7i
        let f = |x: f64| Complex64::from_polar(1.0, 7.0 * x);
        let got = integrate_adaptive(f, 0.0, 10.0, &[], TIGHT, 500).unwrap();
        let expected = (Complex64::from_polar(1.0, 70.0) - 1.0) / Complex64::new(0.0, 7.0);
        assert!((got.value - expected).norm() < 1e-11);
    }

    #[test]
    fn sharp_lorentzian_with_breakpoint() {
        // ∫_{-1}^{1} 1/(g - i x) dx = 2i·atan(1/g)·(-i)… real part 2 atan(1/g)
        let g = 1e-4;
        let f = |x: f64| Complex64::new(1.0, 0.0) / Complex64::new(g, -x);
        let got = integrate_adaptive(f, -1.0, 1.0, &[0.0], TIGHT, 2000).unwrap();
        assert_abs_diff_eq!(got.value.re, 2.0 * (1.0 / g).atan(), epsilon = 1e-9);
        assert_abs_diff_eq!(got.value.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        let f = |x: f64| Complex64::new((1.0 / x).sin(), 0.0);
        let err = integrate_adaptive(f, 1e-9, 1.0, &[], TIGHT, 20).unwrap_err();
        assert!(matches!(err, Error::NotConverged { achieved, .. } if achieved > 1e-12));
    }

    #[test]
    fn panel_rule_matches_adaptive() {
        let f = |x: f64| Complex64::from_polar((-x).exp(), 3.0 * x);
        let rule = PanelRule::uniform(0.0, 5.0, 40);
        let values: Vec<_> = rule.nodes().iter().map(|&x| f(x)).collect();
        let (v, err) = rule.integrate(&values);
        let exact = (Complex64::new(-1.0, 3.0) * 5.0).exp() - 1.0;
        let exact = exact / Complex64::new(-1.0, 3.0);
        assert!((v - exact).norm() < 1e-13);
        assert!(err < 1e-8);
    }
}
