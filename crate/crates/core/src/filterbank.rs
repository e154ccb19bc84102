//! Complex amplitude transmission `T(Δ)` of resonant filters.
//!
//! Detunings are angular (rad/s) and measured from the line center.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, Tolerance};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Homogeneously broadened absorption line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianFilter {
    gamma: f64,
    depth: f64,
}

impl LorentzianFilter {
    /// `gamma` is the HWHM (rad/s), `depth` the optical depth αL.
    pub fn new(gamma: f64, depth: f64) -> Result<Self> {
        check_gamma(gamma)?;
        check_depth(depth)?;
        Ok(Self { gamma, depth })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Spectral broadening scale `b = αLγ/2` (rad/s).
    pub fn b(&self) -> f64 {
        self.depth * self.gamma / 2.0
    }

    /// `exp(−b / (γ − iΔ))`.
    pub fn transmission(&self, delta: f64) -> Complex64 {
        if self.depth == 0.0 {
            return ONE;
        }
        (-self.b() / Complex64::new(self.gamma, -delta)).exp()
    }
}

/// Gaussian inhomogeneous distribution of Lorentzian lines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DopplerFilter {
    gamma: f64,
    doppler_fwhm: f64,
    depth: f64,
}

/// Gaussian support in units of the Doppler FWHM.
const DOPPLER_SPAN: f64 = 6.0;
const LINESHAPE_TOL: Tolerance = Tolerance { abs: 1e-15, rel: 1e-9 };
const LINESHAPE_MAX_INTERVALS: usize = 4000;

impl DopplerFilter {
    /// `gamma` is the homogeneous HWHM, `doppler_fwhm` the Doppler FWHM
    /// (both rad/s) and `depth` the optical depth of the unbroadened line.
    pub fn new(gamma: f64, doppler_fwhm: f64, depth: f64) -> Result<Self> {
        check_gamma(gamma)?;
        check_depth(depth)?;
        if !(doppler_fwhm.is_finite() && doppler_fwhm > 2.0 * gamma) {
            return Err(Error::invalid(
                "doppler_width",
                format!("must exceed 2·gamma = {:e}, got {doppler_fwhm:e}", 2.0 * gamma),
            ));
        }
        Ok(Self {
            gamma,
            doppler_fwhm,
            depth,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn doppler_fwhm(&self) -> f64 {
        self.doppler_fwhm
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Normalized complex lineshape `F_D(Δ)`: the Gaussian-weighted average
    /// of `γ/(γ − i(Δ + x))` over Doppler shifts `x`.
    pub fn lineshape(&self, delta: f64) -> Result<Complex64> {
        let g = self.gamma;
        let w = self.doppler_fwhm;
        let scale = 4.0 * LN_2 / (w * w);
        let integrand = |x: f64| {
            let weight = (-scale * x * x).exp();
            Complex64::new(weight * g, 0.0) / Complex64::new(g, -(delta + x))
        };
        let span = DOPPLER_SPAN * w;
        let pole = -delta;
        let breakpoints = [pole - 20.0 * g, pole - g, pole, pole + g, pole + 20.0 * g, 0.0];
        let estimate = integrate_adaptive(
            integrand,
            -span,
            span,
            &breakpoints,
            LINESHAPE_TOL,
            LINESHAPE_MAX_INTERVALS,
        )?;
        Ok(estimate.value * ((LN_2 / PI).sqrt() * 2.0 / w))
    }

    /// `exp(−αL·F_D(Δ)/2)`.
    pub fn transmission(&self, delta: f64) -> Result<Complex64> {
        if self.depth == 0.0 {
            return Ok(ONE);
        }
        Ok((-0.5 * self.depth * self.lineshape(delta)?).exp())
    }

    /// Effective resonant optical depth `αL·Re F_D(0)`.
    pub fn effective_depth(&self) -> Result<f64> {
        Ok(self.depth * self.lineshape(0.0)?.re)
    }
}

/// A single absorption line usable inside a [`MultiLineFilter`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Line {
    Lorentzian(LorentzianFilter),
    Doppler(DopplerFilter),
}

impl Line {
    pub fn transmission(&self, delta: f64) -> Result<Complex64> {
        match self {
            Line::Lorentzian(f) => Ok(f.transmission(delta)),
            Line::Doppler(f) => f.transmission(delta),
        }
    }
}

/// Product of independent lines at distinct center offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLineFilter {
    lines: Vec<(f64, Line)>,
}

impl MultiLineFilter {
    /// `lines` holds `(center offset in rad/s, line)` pairs.
    pub fn new(lines: Vec<(f64, Line)>) -> Result<Self> {
        for (i, (c, _)) in lines.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::invalid("lines.center", "must be finite"));
            }
            if lines[..i].iter().any(|(other, _)| other == c) {
                return Err(Error::invalid(
                    "lines.center",
                    format!("duplicate line center {c:e} rad/s"),
                ));
            }
        }
        Ok(Self { lines })
    }

    pub fn lines(&self) -> &[(f64, Line)] {
        &self.lines
    }

    pub fn transmission(&self, delta: f64) -> Result<Complex64> {
        self.lines
            .iter()
            .try_fold(ONE, |acc, (center, line)| Ok(acc * line.transmission(delta - center)?))
    }
}

/// Every filter class, evaluated through one interface.
#[derive(Clone, Debug, PartialEq)]
pub enum FilterModel {
    Transparent,
    /// Idealized removal: fixed transmission within `|Δ| <= half_width`,
    /// unity elsewhere.
    Notch {
        transmission: Complex64,
        half_width: f64,
    },
    Lorentzian(LorentzianFilter),
    Doppler(DopplerFilter),
    MultiLine(MultiLineFilter),
}

impl FilterModel {
    pub fn notch(transmission: Complex64, half_width: f64) -> Result<Self> {
        if transmission.norm().is_nan() || transmission.norm() > 1.0 {
            return Err(Error::invalid(
                "transmission",
                format!("|T| must be <= 1, got {}", transmission.norm()),
            ));
        }
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(Error::invalid("half_width", "must be finite and >= 0"));
        }
        Ok(FilterModel::Notch {
            transmission,
            half_width,
        })
    }

    pub fn transmission(&self, delta: f64) -> Result<Complex64> {
        match self {
            FilterModel::Transparent => Ok(ONE),
            FilterModel::Notch {
                transmission,
                half_width,
            } => Ok(if delta.abs() <= *half_width { *transmission } else { ONE }),
            FilterModel::Lorentzian(f) => Ok(f.transmission(delta)),
            FilterModel::Doppler(f) => f.transmission(delta),
            FilterModel::MultiLine(f) => f.transmission(delta),
        }
    }
}

impl From<LorentzianFilter> for FilterModel {
    fn from(f: LorentzianFilter) -> Self {
        FilterModel::Lorentzian(f)
    }
}

impl From<DopplerFilter> for FilterModel {
    fn from(f: DopplerFilter) -> Self {
        FilterModel::Doppler(f)
    }
}

impl From<MultiLineFilter> for FilterModel {
    fn from(f: MultiLineFilter) -> Self {
        FilterModel::MultiLine(f)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")))
    }
}

fn check_depth(depth: f64) -> Result<()> {
    if depth.is_finite() && depth >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("alpha_l", format!("must be >= 0, got {depth}")))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn rb_vapor(depth: f64) -> DopplerFilter {
        DopplerFilter::new(TAU * 2.7e6, TAU * 500e6, depth).unwrap()
    }

    #[test]
    fn lorentzian_values() {
        let g = TAU * 3e6;
        let f = LorentzianFilter::new(g, 0.0).unwrap();
        assert_eq!(f.transmission(1e8), ONE);

        let f = LorentzianFilter::new(g, 5.0).unwrap();
        assert_eq!(f.b(), 5.0 * g / 2.0);
        assert_relative_eq!(f.transmission(0.0).re, (-2.5f64).exp(), max_relative = 1e-15);
        assert_eq!(f.transmission(0.0).im, 0.0);

        // Δ = 10γ: exponent −2.5/(1 − 10i) = −2.5(1 + 10i)/101
        let t = f.transmission(10.0 * g);
        let expected = Complex64::from_polar((-2.5f64 / 101.0).exp(), -25.0 / 101.0);
        assert_relative_eq!(t.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(t.im, expected.im, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LorentzianFilter::new(-1.0, 5.0).is_err());
        assert!(LorentzianFilter::new(1.0, -5.0).is_err());
        let err = DopplerFilter::new(1.0, 2.0, 1.0).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParameter {
                field: "doppler_width",
                ..
            }
        ));
        let dup = MultiLineFilter::new(vec![
            (0.0, Line::Lorentzian(LorentzianFilter::new(1.0, 1.0).unwrap())),
            (0.0, Line::Lorentzian(LorentzianFilter::new(1.0, 2.0).unwrap())),
        ]);
        assert!(dup.is_err());
    }

    // Faddeeva-function evaluation at 20 digits for γ/2π = 2.7 MHz,
    // Δω_D/2π = 500 MHz.
    const RB_LINESHAPE: &[(f64, f64, f64)] = &[
        (0.0, 0.015_776_760_429_758_291, 0.0),
        (
            6.283_185_307_179_586_5e8,
            0.014_136_696_555_865_567,
            0.005_480_444_157_264_809_5,
        ),
        (
            -2.199_114_857_512_855_3e9,
            0.004_127_965_422_301_816,
            -0.009_166_051_459_305_584_8,
        ),
        (
            1.570_796_326_794_896_6e10,
            1.192_599_532_185_359_7e-6,
            0.001_087_964_236_060_281_9,
        ),
        (
            6.283_185_307_179_586_5e10,
            7.299_881_681_839_484_5e-8,
            0.000_270_121_872_669_498_92,
        ),
    ];

    #[test]
    fn doppler_lineshape_matches_reference() {
        let f = rb_vapor(1.0);
        for &(delta, re, im) in RB_LINESHAPE {
            let got = f.lineshape(delta).unwrap();
            assert_relative_eq!(got.re, re, max_relative = 1e-7);
            assert_abs_diff_eq!(got.im, im, epsilon = 1e-9 * re.abs().max(im.abs()));
        }
    }

    #[test]
    fn doppler_resonant_approximation() {
        // F_D(0) = √(π ln2)·(2γ/Δω_D)·erfcx(2√ln2·γ/Δω_D), so the
        // Gaussian-only estimate overshoots by ≈ 4√(ln2/π)·γ/Δω_D.
        for ratio in [50.0, 185.185, 1000.0] {
            let f = DopplerFilter::new(1e7, ratio * 1e7, 1.0).unwrap();
            let approx = (PI * LN_2).sqrt() * 2.0 / ratio;
            let exact = f.lineshape(0.0).unwrap().re;
            let deficit = 1.0 - exact / approx;
            let leading = 4.0 * (LN_2 / PI).sqrt() / ratio;
            assert!((deficit / leading - 1.0).abs() < 0.05, "{ratio}: {deficit}");
        }
    }

    #[test]
    fn doppler_wings_are_lorentzian() {
        let f = rb_vapor(1.0);
        let g = f.gamma();
        for &delta in &[5.0 * f.doppler_fwhm(), -5.0 * f.doppler_fwhm()] {
            let got = f.lineshape(delta).unwrap();
            let wing = Complex64::new(g, 0.0) / Complex64::new(g, -delta);
            assert!((got - wing).norm() / wing.norm() < 0.01);
        }
    }

    #[test]
    fn rb_effective_depth() {
        let depth = rb_vapor(905.0).effective_depth().unwrap();
        assert!((depth - 14.4).abs() <= 0.2, "{depth}");
        assert_eq!(rb_vapor(0.0).transmission(0.0).unwrap(), ONE);
    }

    #[test]
    fn thick_vapor_phase_at_ten_gigahertz() {
        // far from resonance the phase of T approaches −(αLγ/2)/Δ
        let f = rb_vapor(9053.0);
        let omega = TAU * 10e9;
        let t = f.transmission(omega).unwrap();
        let b2 = 9053.0 * f.gamma() / 2.0;
        let wing_phase = -b2 / omega;
        assert!((t.arg() - wing_phase).abs() < 0.05 * wing_phase.abs());
        assert!((b2 / TAU / 1e9 - 12.2).abs() < 0.1);
    }

    #[test]
    fn multiline_composition() {
        let empty = MultiLineFilter::new(vec![]).unwrap();
        assert_eq!(empty.transmission(3.0).unwrap(), ONE);

        let line = LorentzianFilter::new(TAU * 3e6, 7.0).unwrap();
        let single = MultiLineFilter::new(vec![(0.0, Line::Lorentzian(line))]).unwrap();
        for &d in &[0.0, 1e7, -3e8] {
            assert_eq!(single.transmission(d).unwrap(), line.transmission(d));
        }

        let omega = TAU * 4.6e9;
        let opaque = LorentzianFilter::new(TAU * 3e6, 60.0).unwrap();
        let doublet = MultiLineFilter::new(vec![
            (-omega, Line::Lorentzian(opaque)),
            (omega, Line::Lorentzian(opaque)),
        ])
        .unwrap();
        assert!(doublet.transmission(omega).unwrap().norm() < 1e-12);
        assert!(doublet.transmission(-omega).unwrap().norm() < 1e-12);
        assert!((doublet.transmission(0.0).unwrap().norm() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn lorentzian_far_wing_transparency() {
        for depth in [0.5, 5.0, 10.0] {
            let f = LorentzianFilter::new(2.0, depth).unwrap();
            for sign in [-1.0, 1.0] {
                let t = f.transmission(sign * 1e4 * f.gamma());
                assert!((t.norm() - 1.0).abs() < 1e-3);
            }
        }
    }

    proptest! {
        #[test]
        fn lorentzian_passive_and_hermitian(
            gamma in 1e3f64..1e9,
            depth in 0.0f64..1e5,
            delta in -1e11f64..1e11,
        ) {
            let f = LorentzianFilter::new(gamma, depth).unwrap();
            let t = f.transmission(delta);
            prop_assert!(t.norm() <= 1.0 + 1e-15);
            let mirrored = f.transmission(-delta);
            prop_assert!((mirrored - t.conj()).norm() <= 1e-14);
        }

        #[test]
        fn doppler_passive_and_hermitian(
            ratio in 3.0f64..300.0,
            depth in 0.0f64..1e4,
            delta_in_widths in -8.0f64..8.0,
        ) {
            let gamma = 1e7;
            let f = DopplerFilter::new(gamma, ratio * gamma, depth).unwrap();
            let delta = delta_in_widths * ratio * gamma;
            let shape = f.lineshape(delta).unwrap();
            prop_assert!(shape.re > 0.0);
            let mirrored = f.lineshape(-delta).unwrap();
            prop_assert!((mirrored - shape.conj()).norm() <= 1e-8 * shape.norm());
            prop_assert!(f.transmission(delta).unwrap().norm() <= 1.0 + 1e-15);
        }
    }
}
