//! Named scenarios reproducing the published figures.

use crate::scenario::*;

const COLD_GAMMA_HZ: f64 = 3e6;
const COLD_DEPTH: f64 = 5.0;
const RB_GAMMA_HZ: f64 = 2.7e6;
const RB_DOPPLER_HZ: f64 = 500e6;
const RB_OMEGA_HZ: f64 = 10e9;
const RB_DEPTH_1: f64 = 905.0;
const RB_DEPTH_2: f64 = 9053.0;
/// Doppler broadening cuts the line-center depth by about ten.
const STARK_DEPTH: f64 = 50.0;
const PEARSON_OMEGA_HZ: f64 = 200e6;
const PEARSON_GAMMA_HZ: f64 = 5e6;
const PEARSON_DETUNING_HZ: f64 = 4e9;
const PEARSON_DEPTH: f64 = 6.5e4;

fn optimal(frequency_hz: f64, n: u32) -> ModulationConfig {
    ModulationConfig {
        frequency_hz,
        index: IndexConfig::Optimal(OptimalFor { optimal_for: n }),
    }
}

fn fixed(frequency_hz: f64, index: f64) -> ModulationConfig {
    ModulationConfig {
        frequency_hz,
        index: IndexConfig::Value(index),
    }
}

fn resonant(harmonic: i32) -> ResonanceConfig {
    ResonanceConfig {
        harmonic,
        detuning_hz: 0.0,
    }
}

fn grid(periods: usize, samples_per_period: usize) -> GridConfig {
    GridConfig {
        periods,
        samples_per_period,
        start_periods: 0.0,
    }
}

fn scenario(name: &str, summary: String, modulation: ModulationConfig, route: Route, grid: GridConfig) -> Scenario {
    Scenario {
        name: name.to_string(),
        summary,
        modulation,
        route,
        grid,
        detection: DetectionConfig::default(),
        outputs: OutputConfig::default(),
        compare: Vec::new(),
        emit_phase: false,
    }
}

fn companion(label: &str, modulation: Option<ModulationConfig>, route: Route) -> Companion {
    Companion {
        label: label.to_string(),
        modulation,
        route,
    }
}

fn cold_exact(n: i32, depth: f64) -> Route {
    Route::Exact {
        resonance: resonant(n),
        filter: LorentzianConfig {
            gamma_hz: COLD_GAMMA_HZ,
            alpha_l: depth,
        },
        convergence: ConvergenceConfig::default(),
    }
}

fn cold_series(n: i32, depth: f64) -> Route {
    Route::Sideband {
        resonance: resonant(n),
        filter: FilterConfig::Lorentzian {
            gamma_hz: COLD_GAMMA_HZ,
            alpha_l: depth,
        },
        shells: ShellsConfig::default(),
    }
}

fn ideal(n: i32) -> Route {
    Route::Approx {
        resonance: resonant(n),
        transmission: ComplexConfig::ZERO,
    }
}

fn rb_filter(depth: f64) -> FilterConfig {
    FilterConfig::Doppler {
        gamma_hz: RB_GAMMA_HZ,
        doppler_fwhm_hz: RB_DOPPLER_HZ,
        alpha_l: depth,
    }
}

fn removal(harmonics: &[i32], pedestal: Option<PedestalConfig>) -> Route {
    Route::Cumulative {
        removed: harmonics
            .iter()
            .map(|&harmonic| RemovedConfig {
                harmonic,
                transmission: ComplexConfig::ZERO,
            })
            .collect(),
        pedestal_reduction: pedestal,
    }
}

fn pearson(depth: f64, truncation: TruncationConfig) -> Route {
    Route::Dispersive {
        gamma_hz: PEARSON_GAMMA_HZ,
        alpha_l: DepthConfig::Value(depth),
        carrier_detuning_hz: PEARSON_DETUNING_HZ,
        truncation,
    }
}

/// Ideal removal of harmonic `n`, with the phase `ψ_n(t)` written alongside.
fn phase_portrait(name: &str, n: u32) -> Scenario {
    let mut s = scenario(
        name,
        format!("phase ψ_n(t) and ideal-removal intensity, n={n}, m=m_{n}, Ω/2π=30 MHz"),
        optimal(30e6, n),
        ideal(n as i32),
        grid(2, 2000),
    );
    s.emit_phase = true;
    s
}

/// Exact convolution through the cold-atom cloud, with the ideal-removal
/// and sideband-series traces for comparison.
fn cold_cloud(name: &str, n: u32, frequency_hz: f64, depth: f64, spp: usize) -> Scenario {
    let mut s = scenario(
        name,
        format!(
            "cold atoms γ/2π=3 MHz, αL={depth}, Ω/2π={} MHz, n={n}, m=m_{n}, exact convolution",
            frequency_hz / 1e6
        ),
        optimal(frequency_hz, n),
        cold_exact(n as i32, depth),
        grid(2, spp),
    );
    s.compare = vec![
        companion("ideal", None, ideal(n as i32)),
        companion("series", None, cold_series(n as i32, depth)),
    ];
    s
}

fn rb_vapor(name: &str, n: u32, index: Option<f64>, depth: f64, spp: usize) -> Scenario {
    let modulation = match index {
        Some(m) => fixed(RB_OMEGA_HZ, m),
        None => optimal(RB_OMEGA_HZ, n),
    };
    let m_text = index.map_or(format!("m_{n}"), |m| m.to_string());
    let mut s = scenario(
        name,
        format!("Rb vapor γ/2π=2.7 MHz, Doppler FWHM 500 MHz, αL={depth}, Ω/2π=10 GHz, n={n}, m={m_text}, full comb"),
        modulation,
        Route::Spectral {
            resonance: resonant(n as i32),
            filter: rb_filter(depth),
        },
        grid(2, spp),
    );
    s.compare = vec![companion("ideal", None, ideal(n as i32))];
    s
}

pub fn all() -> Vec<Scenario> {
    let mut presets = Vec::new();

    for (name, n) in [("fig1a", 1), ("fig1b", 2), ("fig1c", 3)] {
        presets.push(phase_portrait(name, n));
    }
    for (name, n) in [("fig2a", 1), ("fig2b", 2), ("fig2c", 3)] {
        presets.push(cold_cloud(name, n, 30e6, COLD_DEPTH, 2000));
    }

    let mut fig3 = scenario(
        "fig3",
        "cold atoms γ/2π=3 MHz, αL=33, Ω/2π=30 MHz, n=1, m=m_1, sideband series (auto shells)".into(),
        optimal(30e6, 1),
        cold_series(1, 33.0),
        grid(2, 2000),
    );
    fig3.compare = vec![
        companion("exact", None, cold_exact(1, 33.0)),
        companion("ideal", None, ideal(1)),
    ];
    presets.push(fig3);

    for (name, n) in [("fig4a", 1), ("fig4b", 2), ("fig4c", 3)] {
        presets.push(cold_cloud(name, n, 300e6, COLD_DEPTH, 2000));
    }
    let mut fig5 = scenario(
        "fig5",
        "cold atoms γ/2π=3 MHz, αL=5, Ω/2π=300 MHz, n=5, m=6.4, exact convolution".into(),
        fixed(300e6, 6.4),
        cold_exact(5, COLD_DEPTH),
        grid(2, 4000),
    );
    fig5.compare = vec![companion("ideal", None, ideal(5))];
    presets.push(fig5);

    for (name, n) in [("fig6a", 1), ("fig6b", 2), ("fig6c", 3)] {
        presets.push(rb_vapor(name, n, None, RB_DEPTH_1, 2000));
    }

    let mut fig7 = scenario(
        "fig7",
        format!(
            "Rb vapor γ/2π=2.7 MHz, Doppler FWHM 500 MHz, αL={RB_DEPTH_2}, Ω/2π=10 GHz, n=2, m=m_2, sideband series (auto shells)"
        ),
        optimal(RB_OMEGA_HZ, 2),
        Route::Sideband {
            resonance: resonant(2),
            filter: rb_filter(RB_DEPTH_2),
            shells: ShellsConfig::default(),
        },
        grid(2, 2000),
    );
    fig7.compare = vec![
        companion(
            "full_comb",
            None,
            Route::Spectral {
                resonance: resonant(2),
                filter: rb_filter(RB_DEPTH_2),
            },
        ),
        companion("ideal", None, ideal(2)),
    ];
    presets.push(fig7);

    presets.push(rb_vapor("fig8", 10, Some(11.8), 453.0, 4000));

    let single = fixed(10e9, 104.0);
    let five = fixed(10e9, 103.0);
    presets.push(scenario(
        "fig9a",
        "ideal removal of n=100, m=104, Ω/2π=10 GHz".into(),
        single,
        removal(&[100], None),
        grid(2, 20000),
    ));
    presets.push(scenario(
        "fig9b",
        "cumulative removal of n=96,98,100,102,104, m=103, Ω/2π=10 GHz".into(),
        five,
        removal(&[96, 98, 100, 102, 104], None),
        grid(2, 20000),
    ));
    let mut fig9c = scenario(
        "fig9c",
        "removal of n=96..104 (m=103) overlaid with removal of n=100 alone (m=104), Ω/2π=10 GHz".into(),
        five,
        removal(&[96, 98, 100, 102, 104], None),
        grid(2, 20000),
    );
    fig9c.compare = vec![companion("single", Some(single), removal(&[100], None))];
    presets.push(fig9c);

    let single = fixed(4.6e9, 104.0);
    let doublet = fixed(4.6e9, 103.0);
    let reduced = Some(PedestalConfig::Named(PedestalKeyword::Auto));
    presets.push(scenario(
        "fig10a",
        "ideal removal of n=100, m=104, Ω/2π=4.6 GHz".into(),
        single,
        removal(&[100], None),
        grid(2, 20000),
    ));
    presets.push(scenario(
        "fig10b",
        "doublet removal of n=100,98, m=103, Ω/2π=4.6 GHz".into(),
        doublet,
        removal(&[100, 98], None),
        grid(2, 20000),
    ));
    let mut fig10c = scenario(
        "fig10c",
        "doublet removal of n=100,98 (m=103) overlaid with removal of n=100 alone (m=104), Ω/2π=4.6 GHz".into(),
        doublet,
        removal(&[100, 98], None),
        grid(2, 20000),
    );
    fig10c.compare = vec![companion("single", Some(single), removal(&[100], None))];
    presets.push(fig10c);
    for (name, extra) in [("fig10d", ""), ("fig10e", ", overlaid with the unreduced doublet")] {
        let mut s = scenario(
            name,
            format!("doublet removal of n=100,98, m=103, Ω/2π=4.6 GHz, pedestal reduction R=1-J100-J98{extra}"),
            doublet,
            removal(&[100, 98], reduced),
            grid(2, 20000),
        );
        s.detection.threshold = 0.1;
        if !extra.is_empty() {
            s.compare = vec![companion("unreduced", None, removal(&[100, 98], None))];
        }
        presets.push(s);
    }

    let pearson_mod = fixed(PEARSON_OMEGA_HZ, std::f64::consts::TAU);
    let pearson_summary = |extra: &str| {
        format!("dispersive vapor γ/2π=5 MHz, carrier detuning 4 GHz, Ω/2π=200 MHz, m=2π, αL=6.5e4{extra}")
    };
    let full = pearson(PEARSON_DEPTH, TruncationConfig::Full);
    let panels = [
        (
            "fig11a",
            ", overlaid with αL=3.25e4 (half)",
            "half_depth",
            pearson(PEARSON_DEPTH / 2.0, TruncationConfig::Full),
        ),
        (
            "fig11b",
            ", overlaid with αL=1.3e5 (double)",
            "double_depth",
            pearson(PEARSON_DEPTH * 2.0, TruncationConfig::Full),
        ),
        (
            "fig11c",
            ", overlaid with the GVD-only truncation",
            "gvd",
            pearson(PEARSON_DEPTH, TruncationConfig::Gvd),
        ),
        (
            "fig11d",
            ", overlaid with the GVD+TOD truncation",
            "gvd_tod",
            pearson(PEARSON_DEPTH, TruncationConfig::GvdTod),
        ),
    ];
    for (name, extra, label, route) in panels {
        let mut s = scenario(name, pearson_summary(extra), pearson_mod, full.clone(), grid(2, 4000));
        s.compare = vec![companion(label, None, route)];
        presets.push(s);
    }

    let mut stark = scenario(
        "stark300",
        "Stark-swept cell γ/2π=3 MHz, Doppler FWHM 87 MHz, αL=50, rf 300 MHz, bias 3Ω, m=m_3".into(),
        optimal(300e6, 3),
        Route::Stark {
            gamma_hz: COLD_GAMMA_HZ,
            alpha_l: STARK_DEPTH,
            bias_hz: 900e6,
            doppler_fwhm_hz: Some(87e6),
        },
        grid(2, 2000),
    );
    stark.compare = vec![companion("ideal", None, ideal(3))];
    presets.push(stark);

    presets.sort_by(|a, b| natural_key(&a.name).cmp(&natural_key(&b.name)));
    presets
}

/// Orders `fig2b` before `fig10a`.
fn natural_key(name: &str) -> (&str, u64, &str) {
    let head_end = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    let (head, rest) = name.split_at(head_end);
    let digits_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let (digits, tail) = rest.split_at(digits_end);
    (head, digits.parse().unwrap_or(0), tail)
}

pub fn find(name: &str) -> Option<Scenario> {
    all().into_iter().find(|s| s.name == name)
}
