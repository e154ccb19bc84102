//! Scenario evaluation and artifact rendering.
//!
//! Every trace and report is computed and rendered in memory before the
//! first file is created, so a failing scenario leaves nothing behind.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use combpulse_core::comb::{default_truncation, phase_psi, ModulationSpec};
use combpulse_core::cumulative::{
    doublet_peak_amplitude, multi_removal_field, pedestal_reduced_field, reduction_factor, RemovedLine,
};
use combpulse_core::dispersive::{
    comb_edges, depth_for_compression, dispersive_field, locate_gvd_peak, peak_sum, taylor_coeffs, truncated_field,
    DispersiveSpec, Truncation,
};
use combpulse_core::filterbank::{FilterModel, LorentzianFilter};
use combpulse_core::metrics::{bunch_stats, detect_pulses, BunchSummary, Pulse, PulseDetector, PulseReport};
use combpulse_core::starkcell::{stark_output_field, StarkCellSpec};
use combpulse_core::synthesis::{
    approx_field, exact_field_with, sideband_field, spectral_field, ConvolutionSettings, FieldTrace, TimeGrid,
};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::*;

pub const CODE_VERSION: &str = concat!("combpulse ", env!("CARGO_PKG_VERSION"));

/// Reference values quoted for the dispersive compressor. Their modulus
/// squared (10.04) does not equal the quoted peak intensity (9.62).
pub const REFERENCE_PEAK_SUM: (f64, f64) = (2.22, -2.26);
pub const REFERENCE_PEAK_INTENSITY: f64 = 9.62;

/// Grid overrides from the command line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub samples_per_period: Option<usize>,
    pub periods: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) {
        if let Some(n) = self.samples_per_period {
            scenario.grid.samples_per_period = n;
        }
        if let Some(n) = self.periods {
            scenario.grid.periods = n;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModulationInfo {
    pub frequency_hz: f64,
    pub index: f64,
    pub period_s: f64,
}

impl From<&ModulationSpec> for ModulationInfo {
    fn from(m: &ModulationSpec) -> Self {
        Self {
            frequency_hz: m.frequency_hz(),
            index: m.index(),
            period_s: m.period(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    pub samples: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub spacing_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSummary {
    pub file: PathBuf,
    pub max_intensity: f64,
    pub min_intensity: f64,
    /// Intensity averaged over the first modulation period.
    pub mean_intensity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaylorInfo {
    pub phase: f64,
    pub delay: f64,
    pub gvd: f64,
    pub tod: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeakSumInfo {
    /// `Σ iⁿ J_n(m) e^{−iε₁n²}`.
    pub computed: ComplexValue,
    pub computed_intensity: f64,
    pub reference: ComplexValue,
    pub reference_modulus_squared: f64,
    pub reference_peak_intensity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoubletForms {
    /// `2[J_a(m) + J_b(m)]`
    pub sum: f64,
    /// `2[J_a(m) − J_b(m)]`
    pub difference: f64,
}

/// Route-specific diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RouteInfo {
    Approx {
        transmission: ComplexValue,
    },
    Sideband {
        shells: usize,
        auto_tolerance: Option<f64>,
        effective_depth: Option<f64>,
    },
    Spectral {
        comb_order: usize,
        effective_depth: Option<f64>,
    },
    Exact {
        b_hz: f64,
        tolerance: f64,
    },
    Stark {
        index: f64,
        rf_amplitude_hz: f64,
        effective_depth: Option<f64>,
    },
    Dispersive {
        alpha_l: f64,
        optimal_alpha_l: f64,
        comb_edges_hz: (f64, f64),
        taylor: TaylorInfo,
        /// `Ωt_p − a` of the GVD-only peak.
        gvd_peak_phase: f64,
        peak_sum: PeakSumInfo,
        note: &'static str,
    },
    Cumulative {
        reduction_factor: Option<f64>,
        doublet: Option<DoubletForms>,
    },
}

const PEAK_SUM_NOTE: &str = "computed_intensity equals the GVD-only trace maximum; \
the reference sum's modulus squared and the reference peak intensity disagree with each other and with the computed sum";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompanionReport {
    pub label: String,
    pub modulation: ModulationInfo,
    pub trace: TraceSummary,
    pub route: RouteInfo,
    /// `max_t |I_companion − I_main|`.
    pub max_intensity_difference: f64,
    pub report: PulseReport,
    pub bunch_summary: BunchSummary,
    pub tallest_pulse: Option<Pulse>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub code_version: &'static str,
    pub scenario: Scenario,
    pub modulation: ModulationInfo,
    pub grid: GridInfo,
    pub trace: TraceSummary,
    pub route: RouteInfo,
    pub report: PulseReport,
    pub bunch_summary: BunchSummary,
    pub tallest_pulse: Option<Pulse>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub companions: Vec<CompanionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_file: Option<PathBuf>,
}

/// A fully evaluated scenario, ready to be written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub trace: FieldTrace,
    pub companions: Vec<FieldTrace>,
    /// Relative paths and contents, in writing order.
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn summary_line(&self) -> String {
        let r = &self.report;
        let per_bunch = match r.bunch_summary.pulses_per_bunch {
            Some(c) => c.to_string(),
            None => "-".into(),
        };
        let central = r
            .bunch_summary
            .central
            .map_or("-".into(), |c| format!("{:.4e} s", c.fwhm));
        let contrast = r.report.contrast.map_or("-".into(), |c| format!("{c:.4}"));
        format!(
            "{}: {} pulses, {} per bunch, central FWHM {}, max {:.4}, contrast {}",
            r.scenario.name,
            r.report.pulses.len(),
            per_bunch,
            central,
            r.trace.max_intensity,
            contrast,
        )
    }

    pub fn write(&self, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(out_dir).map_err(|source| CliError::Write {
            path: out_dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::with_capacity(self.files.len());
        for (rel, contents) in &self.files {
            let path = out_dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|source| CliError::Write {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            fs::write(&path, contents).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_json(&text)
}

/// Validates and evaluates `scenario` without touching the filesystem.
pub fn compute(scenario: &Scenario) -> Result<Outcome, CliError> {
    scenario.validate()?;
    let modulation = resolve_modulation(&scenario.modulation)?;
    let grid = scenario.time_grid()?;
    let detector = PulseDetector {
        threshold: scenario.detection.threshold,
        min_prominence: scenario.detection.min_prominence,
        ..PulseDetector::default()
    };

    let (trace, route) = evaluate("route", &scenario.route, &modulation, grid)?;
    let trace_path = scenario.trace_path();
    let main = analyse("detection", &trace, &modulation, &detector, trace_path.clone())?;

    let mut files = vec![(trace_path.clone(), render_trace(&trace))];
    let mut companion_reports = Vec::with_capacity(scenario.compare.len());
    let mut companion_traces = Vec::with_capacity(scenario.compare.len());
    for (i, c) in scenario.compare.iter().enumerate() {
        let cmod = match &c.modulation {
            Some(m) => resolve_modulation(m)?,
            None => modulation,
        };
        let (ctrace, croute) = evaluate(&format!("compare[{i}].route"), &c.route, &cmod, grid)?;
        let path = sibling(&trace_path, &c.label);
        let analysis = analyse(&format!("compare[{i}]"), &ctrace, &cmod, &detector, path.clone())?;
        companion_reports.push(CompanionReport {
            label: c.label.clone(),
            modulation: ModulationInfo::from(&cmod),
            trace: analysis.summary,
            route: croute,
            max_intensity_difference: ctrace.intensity().sup_distance(&trace.intensity()),
            report: analysis.report,
            bunch_summary: analysis.bunches,
            tallest_pulse: analysis.tallest,
        });
        files.push((path, render_trace(&ctrace)));
        companion_traces.push(ctrace);
    }

    let phase_file = match scenario.route.resonance() {
        Some(r) if scenario.emit_phase => {
            let path = sibling(&trace_path, "phase");
            files.push((path.clone(), render_phase(r.harmonic, &modulation, grid)));
            Some(path)
        }
        _ => None,
    };

    let report = RunReport {
        code_version: CODE_VERSION,
        scenario: scenario.clone(),
        modulation: ModulationInfo::from(&modulation),
        grid: GridInfo {
            samples: grid.len(),
            start_s: grid.start(),
            end_s: grid.end(),
            spacing_s: grid.spacing(),
        },
        trace: main.summary,
        route,
        report: main.report,
        bunch_summary: main.bunches,
        tallest_pulse: main.tallest,
        companions: companion_reports,
        phase_file,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    files.push((scenario.report_path(), json));

    Ok(Outcome {
        report,
        trace,
        companions: companion_traces,
        files,
    })
}

/// `fig2a.csv` with label `ideal` becomes `fig2a.ideal.csv`.
fn sibling(trace_path: &Path, label: &str) -> PathBuf {
    let stem = trace_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    trace_path.with_file_name(format!("{stem}.{label}.csv"))
}

struct Analysis {
    summary: TraceSummary,
    report: PulseReport,
    bunches: BunchSummary,
    tallest: Option<Pulse>,
}

fn analyse(
    context: &str,
    trace: &FieldTrace,
    modulation: &ModulationSpec,
    detector: &PulseDetector,
    file: PathBuf,
) -> Result<Analysis, CliError> {
    let intensity = trace.intensity();
    let report =
        detect_pulses(&intensity, modulation.period(), detector).map_err(|e| CliError::from_core(context, e))?;
    let bunches = bunch_stats(&report);
    let tallest = report
        .pulses
        .iter()
        .copied()
        .reduce(|a, b| if b.peak > a.peak { b } else { a });
    Ok(Analysis {
        summary: TraceSummary {
            file,
            max_intensity: intensity.max(),
            min_intensity: intensity.min(),
            mean_intensity: intensity.period_mean(modulation.period()),
        },
        report,
        bunches,
        tallest,
    })
}

fn effective_depth(path: &str, filter: &FilterModel) -> Result<Option<f64>, CliError> {
    match filter {
        FilterModel::Doppler(d) => d.effective_depth().map(Some).map_err(|e| CliError::from_core(path, e)),
        _ => Ok(None),
    }
}

fn evaluate(
    path: &str,
    route: &Route,
    modulation: &ModulationSpec,
    grid: TimeGrid,
) -> Result<(FieldTrace, RouteInfo), CliError> {
    let wrap = |e| CliError::from_core(path, e);
    match route {
        Route::Approx {
            resonance,
            transmission,
        } => {
            let trace =
                approx_field(modulation, resolve_resonance(resonance), transmission.value(), grid).map_err(wrap)?;
            Ok((
                trace,
                RouteInfo::Approx {
                    transmission: ComplexValue {
                        re: transmission.re,
                        im: transmission.im,
                    },
                },
            ))
        }
        Route::Sideband {
            resonance,
            filter,
            shells,
        } => {
            let filter_path = format!("{path}.filter");
            let model = resolve_filter(&filter_path, filter)?;
            let series = sideband_field(
                modulation,
                resolve_resonance(resonance),
                &model,
                grid,
                resolve_shells(shells),
            )
            .map_err(wrap)?;
            let auto_tolerance = match shells {
                ShellsConfig::Auto { tolerance } => Some(*tolerance),
                ShellsConfig::Fixed(_) => None,
            };
            Ok((
                series.trace,
                RouteInfo::Sideband {
                    shells: series.shells,
                    auto_tolerance,
                    effective_depth: effective_depth(&filter_path, &model)?,
                },
            ))
        }
        Route::Spectral { resonance, filter } => {
            let filter_path = format!("{path}.filter");
            let model = resolve_filter(&filter_path, filter)?;
            let trace = spectral_field(modulation, resolve_resonance(resonance), &model, grid).map_err(wrap)?;
            Ok((
                trace,
                RouteInfo::Spectral {
                    comb_order: default_truncation(modulation.index()),
                    effective_depth: effective_depth(&filter_path, &model)?,
                },
            ))
        }
        Route::Exact {
            resonance,
            filter,
            convergence,
        } => {
            let line = LorentzianFilter::new(TAU * filter.gamma_hz, filter.alpha_l)
                .map_err(|e| CliError::from_core(&format!("{path}.filter"), e))?;
            let settings = ConvolutionSettings {
                tolerance: convergence.tolerance,
                max_refinements: convergence.max_refinements,
            };
            let trace =
                exact_field_with(modulation, resolve_resonance(resonance), &line, grid, settings).map_err(wrap)?;
            Ok((
                trace,
                RouteInfo::Exact {
                    b_hz: line.b() / TAU,
                    tolerance: convergence.tolerance,
                },
            ))
        }
        Route::Stark {
            gamma_hz,
            alpha_l,
            bias_hz,
            doppler_fwhm_hz,
        } => {
            let cell = StarkCellSpec {
                gamma: TAU * gamma_hz,
                depth: *alpha_l,
                bias: TAU * bias_hz,
                rf_amplitude: modulation.index() * modulation.omega(),
                rf_omega: modulation.omega(),
                doppler_fwhm: doppler_fwhm_hz.map(|w| TAU * w),
            };
            let trace = stark_output_field(&cell, grid).map_err(wrap)?;
            let line = cell.line().map_err(wrap)?;
            Ok((
                trace,
                RouteInfo::Stark {
                    index: cell.index(),
                    rf_amplitude_hz: cell.rf_amplitude / TAU,
                    effective_depth: effective_depth(path, &line)?,
                },
            ))
        }
        Route::Dispersive {
            gamma_hz,
            alpha_l,
            carrier_detuning_hz,
            truncation,
        } => {
            let gamma = TAU * gamma_hz;
            let detuning = TAU * carrier_detuning_hz;
            let optimal = depth_for_compression(gamma, detuning, modulation);
            let depth = match alpha_l {
                DepthConfig::Value(v) => *v,
                DepthConfig::Named(DepthKeyword::Optimal) => optimal
                    .clone()
                    .map_err(|e| CliError::from_core(&format!("{path}.alpha_l"), e))?,
            };
            let spec = DispersiveSpec::new(gamma, depth, detuning, *modulation).map_err(wrap)?;
            let trace = match truncation {
                TruncationConfig::Full => dispersive_field(&spec, grid),
                TruncationConfig::Gvd => truncated_field(&spec, Truncation::Gvd, grid),
                TruncationConfig::GvdTod => truncated_field(&spec, Truncation::GvdTod, grid),
            };
            let coeffs = taylor_coeffs(&spec);
            let sum = peak_sum(&spec);
            let (lo, hi) = comb_edges(detuning, modulation);
            let (ref_re, ref_im) = REFERENCE_PEAK_SUM;
            Ok((
                trace,
                RouteInfo::Dispersive {
                    alpha_l: depth,
                    optimal_alpha_l: optimal.unwrap_or(f64::NAN),
                    comb_edges_hz: (lo / TAU, hi / TAU),
                    taylor: TaylorInfo {
                        phase: coeffs.phase,
                        delay: coeffs.delay,
                        gvd: coeffs.gvd,
                        tod: coeffs.tod,
                    },
                    gvd_peak_phase: locate_gvd_peak(&spec, 4096),
                    peak_sum: PeakSumInfo {
                        computed: ComplexValue { re: sum.re, im: sum.im },
                        computed_intensity: sum.norm_sqr(),
                        reference: ComplexValue { re: ref_re, im: ref_im },
                        reference_modulus_squared: ref_re * ref_re + ref_im * ref_im,
                        reference_peak_intensity: REFERENCE_PEAK_INTENSITY,
                    },
                    note: PEAK_SUM_NOTE,
                },
            ))
        }
        Route::Cumulative {
            removed,
            pedestal_reduction,
        } => {
            let lines: Vec<RemovedLine> = removed
                .iter()
                .map(|r| RemovedLine::partial(r.harmonic, r.transmission.value()))
                .collect();
            let base = multi_removal_field(modulation, &lines, grid).map_err(wrap)?;
            let harmonics: Vec<i32> = removed.iter().map(|r| r.harmonic).collect();
            let factor = match pedestal_reduction {
                None => None,
                Some(PedestalConfig::Factor(r)) => Some(*r),
                Some(PedestalConfig::Named(PedestalKeyword::Auto)) => {
                    Some(reduction_factor(modulation.index(), &harmonics))
                }
            };
            let trace = match factor {
                Some(r) => pedestal_reduced_field(&base, modulation, r)
                    .map_err(|e| CliError::from_core(&format!("{path}.pedestal_reduction"), e))?,
                None => base,
            };
            let doublet = match harmonics.as_slice() {
                &[a, b] => {
                    let forms = doublet_peak_amplitude(modulation.index(), a, b);
                    Some(DoubletForms {
                        sum: forms.sum,
                        difference: forms.difference,
                    })
                }
                _ => None,
            };
            Ok((
                trace,
                RouteInfo::Cumulative {
                    reduction_factor: factor,
                    doublet,
                },
            ))
        }
    }
}

pub const TRACE_HEADER: &str = "t_seconds,intensity_norm,re_envelope,im_envelope";

/// One row per sample, 17 significant digits.
pub fn render_trace(trace: &FieldTrace) -> String {
    let mut out = String::with_capacity(96 * (trace.grid().len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (t, e) in trace.grid().times().zip(trace.envelope()) {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", t, e.norm_sqr(), e.re, e.im).expect("string write");
    }
    out
}

fn render_phase(harmonic: i32, modulation: &ModulationSpec, grid: TimeGrid) -> String {
    let mut out = String::with_capacity(48 * (grid.len() + 1));
    out.push_str("t_seconds,psi_rad\n");
    for t in grid.times() {
        writeln!(out, "{:.16e},{:.16e}", t, phase_psi(harmonic, modulation, t)).expect("string write");
    }
    out
}
