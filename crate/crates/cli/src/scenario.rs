//! Scenario files.
//!
//! Frequencies are ordinary frequencies in Hz and are converted to angular
//! units only when a scenario is turned into library inputs. Unknown fields
//! are rejected everywhere.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::path::PathBuf;

use combpulse_core::comb::{optimal_index, ModulationSpec};
use combpulse_core::filterbank::{DopplerFilter, FilterModel, Line, LorentzianFilter, MultiLineFilter};
use combpulse_core::synthesis::{ScenarioResonance, ShellCount, TimeGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Lower bound on grid density, matching the library's resolution check.
pub const MIN_SAMPLES_PER_PERIOD: usize = 200;
pub const MAX_SAMPLES: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub summary: String,
    pub modulation: ModulationConfig,
    pub route: Route,
    pub grid: GridConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Extra traces computed on the same grid and written next to the main
    /// one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compare: Vec<Companion>,
    /// Also write the phase `ψ_n(t)` of the resonant harmonic.
    #[serde(default, skip_serializing_if = "is_false")]
    pub emit_phase: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    pub frequency_hz: f64,
    pub index: IndexConfig,
}

/// Either a literal modulation index or the one maximizing `J_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexConfig {
    Value(f64),
    Optimal(OptimalFor),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalFor {
    pub optimal_for: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexConfig {
    pub re: f64,
    pub im: f64,
}

impl ComplexConfig {
    pub const ZERO: Self = Self { re: 0.0, im: 0.0 };

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn opaque() -> ComplexConfig {
    ComplexConfig::ZERO
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    /// Harmonic `n` brought to the line.
    pub harmonic: i32,
    /// Residual detuning `Δ_n` (Hz).
    #[serde(default)]
    pub detuning_hz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterConfig {
    Transparent,
    Notch {
        transmission: ComplexConfig,
        half_width_hz: f64,
    },
    Lorentzian {
        gamma_hz: f64,
        alpha_l: f64,
    },
    Doppler {
        gamma_hz: f64,
        doppler_fwhm_hz: f64,
        alpha_l: f64,
    },
    MultiLine {
        lines: Vec<LineConfig>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    /// Line center relative to the filter reference (Hz).
    pub center_hz: f64,
    pub gamma_hz: f64,
    pub alpha_l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler_fwhm_hz: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzianConfig {
    pub gamma_hz: f64,
    pub alpha_l: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShellsConfig {
    Auto { tolerance: f64 },
    Fixed(usize),
}

impl Default for ShellsConfig {
    fn default() -> Self {
        ShellsConfig::Auto { tolerance: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_refinements")]
    pub max_refinements: u32,
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_refinements() -> u32 {
    8
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_refinements: default_refinements(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DepthConfig {
    Value(f64),
    Named(DepthKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthKeyword {
    /// Depth at which the comb edges' group delays differ by half a period.
    Optimal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationConfig {
    #[default]
    Full,
    Gvd,
    GvdTod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemovedConfig {
    pub harmonic: i32,
    #[serde(default = "opaque")]
    pub transmission: ComplexConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PedestalConfig {
    Factor(f64),
    Named(PedestalKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PedestalKeyword {
    /// `R = 1 − Σ J_{n_j}(m)`.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Route {
    /// Only the resonant harmonic is multiplied by `transmission`.
    Approx {
        resonance: ResonanceConfig,
        #[serde(default = "opaque")]
        transmission: ComplexConfig,
    },
    Sideband {
        resonance: ResonanceConfig,
        filter: FilterConfig,
        #[serde(default)]
        shells: ShellsConfig,
    },
    Spectral {
        resonance: ResonanceConfig,
        filter: FilterConfig,
    },
    Exact {
        resonance: ResonanceConfig,
        filter: LorentzianConfig,
        #[serde(default)]
        convergence: ConvergenceConfig,
    },
    Stark {
        gamma_hz: f64,
        alpha_l: f64,
        bias_hz: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        doppler_fwhm_hz: Option<f64>,
    },
    Dispersive {
        gamma_hz: f64,
        alpha_l: DepthConfig,
        carrier_detuning_hz: f64,
        #[serde(default)]
        truncation: TruncationConfig,
    },
    Cumulative {
        removed: Vec<RemovedConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pedestal_reduction: Option<PedestalConfig>,
    },
}

impl Route {
    pub fn kind(&self) -> &'static str {
        match self {
            Route::Approx { .. } => "approx",
            Route::Sideband { .. } => "sideband",
            Route::Spectral { .. } => "spectral",
            Route::Exact { .. } => "exact",
            Route::Stark { .. } => "stark",
            Route::Dispersive { .. } => "dispersive",
            Route::Cumulative { .. } => "cumulative",
        }
    }

    pub fn resonance(&self) -> Option<ResonanceConfig> {
        match self {
            Route::Approx { resonance, .. }
            | Route::Sideband { resonance, .. }
            | Route::Spectral { resonance, .. }
            | Route::Exact { resonance, .. } => Some(*resonance),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub periods: usize,
    pub samples_per_period: usize,
    /// Grid start in units of the modulation period.
    #[serde(default)]
    pub start_periods: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_prominence")]
    pub min_prominence: f64,
}

fn default_threshold() -> f64 {
    1.0
}

fn default_prominence() -> f64 {
    0.01
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            threshold: default_threshold(),
            min_prominence: default_prominence(),
        }
    }
}

/// Output paths, relative to the output directory. Defaults are
/// `<name>.csv` and `<name>.json`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Companion {
    pub label: String,
    /// Overrides the scenario's modulation for this trace only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationConfig>,
    pub route: Route,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Schema {
                path: if path == "." { "<root>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn trace_path(&self) -> PathBuf {
        self.outputs
            .trace
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.name)))
    }

    pub fn report_path(&self) -> PathBuf {
        self.outputs
            .report
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.json", self.name)))
    }

    /// Checks every value that the schema alone cannot, naming the offending
    /// field by its path.
    pub fn validate(&self) -> Result<(), CliError> {
        check_label("name", &self.name)?;
        if self.summary.contains('\n') {
            return Err(CliError::invalid("summary", "must be a single line"));
        }
        check_modulation("modulation", &self.modulation)?;
        check_route("route", &self.route, &self.modulation)?;
        check_grid(&self.grid)?;
        finite("detection.threshold", self.detection.threshold)?;
        non_negative("detection.min_prominence", self.detection.min_prominence)?;

        let mut labels = HashSet::new();
        for (i, c) in self.compare.iter().enumerate() {
            let base = format!("compare[{i}]");
            check_label(&format!("{base}.label"), &c.label)?;
            if matches!(c.label.as_str(), "phase") || !labels.insert(c.label.as_str()) {
                return Err(CliError::invalid(
                    format!("{base}.label"),
                    format!("`{}` is reserved or used twice", c.label),
                ));
            }
            let modulation = c.modulation.unwrap_or(self.modulation);
            if let Some(m) = &c.modulation {
                check_modulation(&format!("{base}.modulation"), m)?;
            }
            check_route(&format!("{base}.route"), &c.route, &modulation)?;
        }

        if self.emit_phase && self.route.resonance().is_none() {
            return Err(CliError::invalid(
                "emit_phase",
                format!("needs a route with a resonance, not `{}`", self.route.kind()),
            ));
        }
        for (field, path) in [
            ("outputs.trace", self.trace_path()),
            ("outputs.report", self.report_path()),
        ] {
            if path.is_absolute() || path.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                return Err(CliError::invalid(
                    field,
                    "must be a relative path inside the output directory",
                ));
            }
        }
        if self.trace_path() == self.report_path() {
            return Err(CliError::invalid("outputs.report", "must differ from outputs.trace"));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        let period = resolve_modulation(&self.modulation)?.period();
        TimeGrid::periodic(
            self.grid.start_periods * period,
            period,
            self.grid.periods,
            self.grid.samples_per_period,
        )
        .map_err(|e| CliError::from_core("grid", e))
    }
}

pub fn resolve_modulation(config: &ModulationConfig) -> Result<ModulationSpec, CliError> {
    let index = match config.index {
        IndexConfig::Value(m) => m,
        IndexConfig::Optimal(OptimalFor { optimal_for }) => optimal_index(optimal_for),
    };
    ModulationSpec::from_hz(config.frequency_hz, index).map_err(|e| CliError::from_core("modulation", e))
}

pub fn resolve_resonance(config: &ResonanceConfig) -> ScenarioResonance {
    ScenarioResonance::new(config.harmonic, TAU * config.detuning_hz)
}

pub fn resolve_shells(config: &ShellsConfig) -> ShellCount {
    match *config {
        ShellsConfig::Auto { tolerance } => ShellCount::Auto { tol: tolerance },
        ShellsConfig::Fixed(k) => ShellCount::Fixed(k),
    }
}

pub fn resolve_filter(path: &str, config: &FilterConfig) -> Result<FilterModel, CliError> {
    let wrap = |e| CliError::from_core(path, e);
    Ok(match config {
        FilterConfig::Transparent => FilterModel::Transparent,
        FilterConfig::Notch {
            transmission,
            half_width_hz,
        } => FilterModel::notch(transmission.value(), TAU * half_width_hz).map_err(wrap)?,
        FilterConfig::Lorentzian { gamma_hz, alpha_l } => {
            LorentzianFilter::new(TAU * gamma_hz, *alpha_l).map_err(wrap)?.into()
        }
        FilterConfig::Doppler {
            gamma_hz,
            doppler_fwhm_hz,
            alpha_l,
        } => DopplerFilter::new(TAU * gamma_hz, TAU * doppler_fwhm_hz, *alpha_l)
            .map_err(wrap)?
            .into(),
        FilterConfig::MultiLine { lines } => {
            let mut built = Vec::with_capacity(lines.len());
            for (i, l) in lines.iter().enumerate() {
                let wrap = |e| CliError::from_core(&format!("{path}.lines[{i}]"), e);
                let line = match l.doppler_fwhm_hz {
                    None => Line::Lorentzian(LorentzianFilter::new(TAU * l.gamma_hz, l.alpha_l).map_err(wrap)?),
                    Some(w) => Line::Doppler(DopplerFilter::new(TAU * l.gamma_hz, TAU * w, l.alpha_l).map_err(wrap)?),
                };
                built.push((TAU * l.center_hz, line));
            }
            MultiLineFilter::new(built).map_err(wrap)?.into()
        }
    })
}

fn check_label(field: &str, label: &str) -> Result<(), CliError> {
    let ok = !label.is_empty()
        && label.len() <= 64
        && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid(field, "must be 1-64 characters from [A-Za-z0-9_-]"))
    }
}

fn finite(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(field, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::invalid(field, format!("must be > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::invalid(field, format!("must be >= 0, got {v}")))
    }
}

fn passive(field: &str, t: &ComplexConfig) -> Result<(), CliError> {
    finite(&format!("{field}.re"), t.re)?;
    finite(&format!("{field}.im"), t.im)?;
    if t.value().norm() > 1.0 + 1e-12 {
        return Err(CliError::invalid(
            field,
            format!("|T| must be <= 1, got {}", t.value().norm()),
        ));
    }
    Ok(())
}

fn check_modulation(path: &str, m: &ModulationConfig) -> Result<(), CliError> {
    positive(&format!("{path}.frequency_hz"), m.frequency_hz)?;
    match m.index {
        IndexConfig::Value(v) => non_negative(&format!("{path}.index"), v),
        IndexConfig::Optimal(OptimalFor { optimal_for: 0 }) => Err(CliError::invalid(
            format!("{path}.index.optimal_for"),
            "harmonic must be >= 1",
        )),
        IndexConfig::Optimal(_) => Ok(()),
    }
}

fn check_resonance(path: &str, r: &ResonanceConfig) -> Result<(), CliError> {
    finite(&format!("{path}.detuning_hz"), r.detuning_hz)
}

fn check_line(path: &str, gamma_hz: f64, alpha_l: f64, doppler: Option<f64>) -> Result<(), CliError> {
    positive(&format!("{path}.gamma_hz"), gamma_hz)?;
    non_negative(&format!("{path}.alpha_l"), alpha_l)?;
    if let Some(w) = doppler {
        positive(&format!("{path}.doppler_fwhm_hz"), w)?;
        if w <= 2.0 * gamma_hz {
            return Err(CliError::invalid(
                format!("{path}.doppler_fwhm_hz"),
                format!("must exceed the homogeneous width 2*gamma_hz = {}", 2.0 * gamma_hz),
            ));
        }
    }
    Ok(())
}

fn check_filter(path: &str, f: &FilterConfig) -> Result<(), CliError> {
    match f {
        FilterConfig::Transparent => Ok(()),
        FilterConfig::Notch {
            transmission,
            half_width_hz,
        } => {
            passive(&format!("{path}.transmission"), transmission)?;
            positive(&format!("{path}.half_width_hz"), *half_width_hz)
        }
        FilterConfig::Lorentzian { gamma_hz, alpha_l } => check_line(path, *gamma_hz, *alpha_l, None),
        FilterConfig::Doppler {
            gamma_hz,
            doppler_fwhm_hz,
            alpha_l,
        } => check_line(path, *gamma_hz, *alpha_l, Some(*doppler_fwhm_hz)),
        FilterConfig::MultiLine { lines } => {
            if lines.is_empty() {
                return Err(CliError::invalid(format!("{path}.lines"), "must not be empty"));
            }
            for (i, l) in lines.iter().enumerate() {
                let p = format!("{path}.lines[{i}]");
                finite(&format!("{p}.center_hz"), l.center_hz)?;
                check_line(&p, l.gamma_hz, l.alpha_l, l.doppler_fwhm_hz)?;
                if lines[..i].iter().any(|o| o.center_hz == l.center_hz) {
                    return Err(CliError::invalid(format!("{p}.center_hz"), "duplicate line center"));
                }
            }
            Ok(())
        }
    }
}

fn check_route(path: &str, route: &Route, modulation: &ModulationConfig) -> Result<(), CliError> {
    match route {
        Route::Approx {
            resonance,
            transmission,
        } => {
            check_resonance(&format!("{path}.resonance"), resonance)?;
            passive(&format!("{path}.transmission"), transmission)
        }
        Route::Sideband {
            resonance,
            filter,
            shells,
        } => {
            check_resonance(&format!("{path}.resonance"), resonance)?;
            check_filter(&format!("{path}.filter"), filter)?;
            match shells {
                ShellsConfig::Auto { tolerance } => positive(&format!("{path}.shells.auto.tolerance"), *tolerance),
                ShellsConfig::Fixed(_) => Ok(()),
            }
        }
        Route::Spectral { resonance, filter } => {
            check_resonance(&format!("{path}.resonance"), resonance)?;
            check_filter(&format!("{path}.filter"), filter)
        }
        Route::Exact {
            resonance,
            filter,
            convergence,
        } => {
            check_resonance(&format!("{path}.resonance"), resonance)?;
            check_line(&format!("{path}.filter"), filter.gamma_hz, filter.alpha_l, None)?;
            positive(&format!("{path}.convergence.tolerance"), convergence.tolerance)?;
            if convergence.max_refinements > 20 {
                return Err(CliError::invalid(
                    format!("{path}.convergence.max_refinements"),
                    "must be <= 20",
                ));
            }
            Ok(())
        }
        Route::Stark {
            gamma_hz,
            alpha_l,
            bias_hz,
            doppler_fwhm_hz,
        } => {
            check_line(path, *gamma_hz, *alpha_l, *doppler_fwhm_hz)?;
            finite(&format!("{path}.bias_hz"), *bias_hz)
        }
        Route::Dispersive {
            gamma_hz,
            alpha_l,
            carrier_detuning_hz,
            ..
        } => {
            positive(&format!("{path}.gamma_hz"), *gamma_hz)?;
            if let DepthConfig::Value(v) = alpha_l {
                positive(&format!("{path}.alpha_l"), *v)?;
            }
            finite(&format!("{path}.carrier_detuning_hz"), *carrier_detuning_hz)?;
            if carrier_detuning_hz.abs() <= 100.0 * gamma_hz {
                return Err(CliError::invalid(
                    format!("{path}.carrier_detuning_hz"),
                    "must exceed 100*gamma_hz in magnitude for the far-wing description",
                ));
            }
            if matches!(alpha_l, DepthConfig::Named(DepthKeyword::Optimal)) {
                let m = resolve_modulation(modulation)?;
                if carrier_detuning_hz.abs() <= m.index() * modulation.frequency_hz {
                    return Err(CliError::invalid(
                        format!("{path}.alpha_l"),
                        "`optimal` needs |carrier_detuning_hz| > index * frequency_hz",
                    ));
                }
            }
            Ok(())
        }
        Route::Cumulative {
            removed,
            pedestal_reduction,
        } => {
            for (i, r) in removed.iter().enumerate() {
                let p = format!("{path}.removed[{i}]");
                passive(&format!("{p}.transmission"), &r.transmission)?;
                if removed[..i].iter().any(|o| o.harmonic == r.harmonic) {
                    return Err(CliError::invalid(format!("{p}.harmonic"), "listed twice"));
                }
            }
            let auto = matches!(pedestal_reduction, Some(PedestalConfig::Named(PedestalKeyword::Auto)));
            if auto && removed.iter().any(|r| r.transmission != ComplexConfig::ZERO) {
                return Err(CliError::invalid(
                    format!("{path}.pedestal_reduction"),
                    "`auto` assumes fully removed lines; give a number instead",
                ));
            }
            if let Some(PedestalConfig::Factor(r)) = pedestal_reduction {
                if !(0.0..=1.0).contains(r) {
                    return Err(CliError::invalid(
                        format!("{path}.pedestal_reduction"),
                        format!("must lie in [0, 1], got {r}"),
                    ));
                }
            }
            Ok(())
        }
    }
}

fn check_grid(g: &GridConfig) -> Result<(), CliError> {
    if g.periods == 0 {
        return Err(CliError::invalid("grid.periods", "must be >= 1"));
    }
    if g.samples_per_period < MIN_SAMPLES_PER_PERIOD {
        return Err(CliError::invalid(
            "grid.samples_per_period",
            format!("must be >= {MIN_SAMPLES_PER_PERIOD}"),
        ));
    }
    if g.periods.saturating_mul(g.samples_per_period) > MAX_SAMPLES {
        return Err(CliError::invalid(
            "grid",
            format!("periods * samples_per_period must not exceed {MAX_SAMPLES}"),
        ));
    }
    finite("grid.start_periods", g.start_periods)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "demo",
        "modulation": {"frequency_hz": 30e6, "index": {"optimal_for": 1}},
        "route": {"kind": "exact", "resonance": {"harmonic": 1},
                  "filter": {"gamma_hz": 3e6, "alpha_l": 5}},
        "grid": {"periods": 2, "samples_per_period": 400}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        s.validate().unwrap();
        assert_eq!(s.detection, DetectionConfig::default());
        assert_eq!(s.trace_path(), PathBuf::from("demo.csv"));
        match s.route {
            Route::Exact { convergence, .. } => assert_eq!(convergence, ConvergenceConfig::default()),
            _ => panic!("wrong route"),
        }
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn unknown_field_is_named() {
        let text = MINIMAL.replace("\"alpha_l\": 5", "\"alpha_l\": 5, \"colour\": 1");
        match Scenario::from_json(&text) {
            Err(CliError::Schema { path, message }) => {
                // tagged sections are buffered, so the path stops at the tag owner
                assert_eq!(path, "route");
                assert!(message.contains("unknown field `colour`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_is_located() {
        let text = MINIMAL.replace("\"periods\": 2", "\"periods\": \"two\"");
        match Scenario::from_json(&text) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "grid.periods"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_gamma_names_field() {
        let text = MINIMAL.replace("3e6", "-3e6");
        let s = Scenario::from_json(&text).unwrap();
        match s.validate() {
            Err(CliError::Invalid { field, .. }) => assert_eq!(field, "route.filter.gamma_hz"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn keyword_and_numeric_forms() {
        let depth: DepthConfig = serde_json::from_str("\"optimal\"").unwrap();
        assert_eq!(depth, DepthConfig::Named(DepthKeyword::Optimal));
        let depth: DepthConfig = serde_json::from_str("6.5e4").unwrap();
        assert_eq!(depth, DepthConfig::Value(6.5e4));
        let shells: ShellsConfig = serde_json::from_str(r#"{"fixed": 3}"#).unwrap();
        assert_eq!(shells, ShellsConfig::Fixed(3));
        let shells: ShellsConfig = serde_json::from_str(r#"{"auto": {"tolerance": 1e-7}}"#).unwrap();
        assert_eq!(shells, ShellsConfig::Auto { tolerance: 1e-7 });
        assert!(serde_json::from_str::<ShellsConfig>(r#"{"auto": {"tolerance": 1e-7, "x": 1}}"#).is_err());
        assert!(serde_json::from_str::<PedestalConfig>("\"manual\"").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let base = Scenario::from_json(MINIMAL).unwrap();
        let field_of = |s: &Scenario| match s.validate() {
            Err(CliError::Invalid { field, .. }) => field,
            other => panic!("{other:?}"),
        };

        let mut s = base.clone();
        s.grid.samples_per_period = 10;
        assert_eq!(field_of(&s), "grid.samples_per_period");

        let mut s = base.clone();
        s.name = "../x".into();
        assert_eq!(field_of(&s), "name");

        let mut s = base.clone();
        s.route = Route::Cumulative {
            removed: vec![
                RemovedConfig {
                    harmonic: 3,
                    transmission: ComplexConfig::ZERO,
                },
                RemovedConfig {
                    harmonic: 3,
                    transmission: ComplexConfig::ZERO,
                },
            ],
            pedestal_reduction: None,
        };
        assert_eq!(field_of(&s), "route.removed[1].harmonic");

        let mut s = base.clone();
        s.route = Route::Stark {
            gamma_hz: 3e6,
            alpha_l: 5.0,
            bias_hz: 0.0,
            doppler_fwhm_hz: Some(4e6),
        };
        assert_eq!(field_of(&s), "route.doppler_fwhm_hz");

        let mut s = base.clone();
        s.emit_phase = true;
        s.route = Route::Cumulative {
            removed: vec![],
            pedestal_reduction: None,
        };
        assert_eq!(field_of(&s), "emit_phase");

        let mut s = base;
        s.outputs.trace = Some(PathBuf::from("../escape.csv"));
        assert_eq!(field_of(&s), "outputs.trace");
    }

    #[test]
    fn frequencies_become_angular_once() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        let m = resolve_modulation(&s.modulation).unwrap();
        assert_eq!(m.omega(), TAU * 30e6);
        let grid = s.time_grid().unwrap();
        assert_eq!(grid.len(), 801);
        assert!((grid.end() - 2.0 / 30e6).abs() < 1e-20);
    }
}
