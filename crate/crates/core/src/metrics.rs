//! Pulse detection and bunch statistics on intensity traces.
//!
//! A pulse is a local maximum above `threshold` whose topographic prominence
//! is at least `min_prominence`. Its width is measured at half the
//! prominence above the higher of its two bases, with linear interpolation
//! between samples. The dark window is the longest run of samples below the
//! threshold, and bunches are period-long windows starting at dark-window
//! centers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::synthesis::IntensityTrace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PulseDetector {
    pub threshold: f64,
    pub min_prominence: f64,
    pub min_samples_per_fwhm: usize,
}

impl Default for PulseDetector {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            min_prominence: 0.01,
            min_samples_per_fwhm: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pulse {
    pub time: f64,
    pub peak: f64,
    pub fwhm: f64,
    pub prominence: f64,
    /// Index into [`PulseReport::bunches`], if the pulse lies in a complete
    /// period window.
    pub bunch: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DarkWindow {
    pub start: f64,
    pub end: f64,
    pub duration: f64,
    pub min_intensity: f64,
    /// Highest intensity over the middle half of the window.
    pub level: f64,
}

impl DarkWindow {
    pub fn center(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bunch {
    pub start: f64,
    pub end: f64,
    /// Indices into [`PulseReport::pulses`], in time order.
    pub pulses: Vec<usize>,
}

impl Bunch {
    pub fn center(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseReport {
    pub pulses: Vec<Pulse>,
    pub bunches: Vec<Bunch>,
    pub dark_window: Option<DarkWindow>,
    /// Highest pulse peak over the dark-window level.
    pub contrast: Option<f64>,
}

/// Finds pulses in `trace` and groups them into windows of length `period`.
pub fn detect_pulses(trace: &IntensityTrace, period: f64, detector: &PulseDetector) -> Result<PulseReport> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid("period", "must be > 0"));
    }
    let v = trace.values();
    let grid = trace.grid();
    let dt = grid.spacing();
    let time = |x: f64| grid.start() + x * dt;

    let mut pulses = Vec::new();
    for i in 1..v.len() - 1 {
        if !(v[i] > detector.threshold && v[i] > v[i - 1] && v[i] >= v[i + 1]) {
            continue;
        }
        let prominence = prominence(v, i);
        if prominence < detector.min_prominence {
            continue;
        }
        let level = v[i] - 0.5 * prominence;
        let (Some(left), Some(right)) = (crossing(v, i, level, -1), crossing(v, i, level, 1)) else {
            continue;
        };
        let fwhm = (right - left) * dt;
        let samples = fwhm / dt;
        if samples < detector.min_samples_per_fwhm as f64 {
            return Err(Error::GridTooCoarse {
                time: time(i as f64),
                samples,
                required: detector.min_samples_per_fwhm,
            });
        }
        pulses.push(Pulse {
            time: grid.time(i),
            peak: v[i],
            fwhm,
            prominence,
            bunch: None,
        });
    }

    let dark_window = dark_window(v, detector.threshold).map(|(a, b)| {
        let start = time(a);
        let end = time(b);
        let lo = a.ceil() as usize;
        let hi = (b.floor() as usize).min(v.len() - 1).max(lo);
        let run = &v[lo..=hi];
        let quarter = run.len() / 4;
        let middle = &run[quarter..run.len() - quarter];
        DarkWindow {
            start,
            end,
            duration: end - start,
            min_intensity: run.iter().copied().fold(f64::INFINITY, f64::min),
            level: middle.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    });

    let anchor = dark_window.map_or(grid.start(), |d| d.center());
    let slack = 1e-9 * period;
    let first = ((grid.start() - anchor - slack) / period).ceil() as i64;
    let mut bunches = Vec::new();
    let mut k = first;
    loop {
        let start = anchor + k as f64 * period;
        let end = start + period;
        if end > grid.end() + slack {
            break;
        }
        let members: Vec<usize> = (0..pulses.len())
            .filter(|&p| pulses[p].time >= start && pulses[p].time < end)
            .collect();
        if !members.is_empty() {
            for &p in &members {
                pulses[p].bunch = Some(bunches.len());
            }
            bunches.push(Bunch {
                start,
                end,
                pulses: members,
            });
        }
        k += 1;
    }

    let highest = pulses.iter().map(|p| p.peak).fold(f64::NEG_INFINITY, f64::max);
    let contrast = dark_window
        .filter(|d| d.level > 0.0 && !pulses.is_empty())
        .map(|d| highest / d.level);

    Ok(PulseReport {
        pulses,
        bunches,
        dark_window,
        contrast,
    })
}

/// Peak height above the higher of the two lowest points reached before
/// climbing above the peak on either side.
fn prominence(v: &[f64], i: usize) -> f64 {
    let peak = v[i];
    let mut left_min = peak;
    for &x in v[..i].iter().rev() {
        if x > peak {
            break;
        }
        left_min = left_min.min(x);
    }
    let mut right_min = peak;
    for &x in &v[i + 1..] {
        if x > peak {
            break;
        }
        right_min = right_min.min(x);
    }
    peak - left_min.max(right_min)
}

/// Fractional sample index where the trace first drops to `level` walking
/// from `i` in direction `step`.
fn crossing(v: &[f64], i: usize, level: f64, step: isize) -> Option<f64> {
    let mut j = i as isize;
    loop {
        let next = j + step;
        if next < 0 || next as usize >= v.len() {
            return None;
        }
        let (a, b) = (v[j as usize], v[next as usize]);
        if b <= level {
            let frac = (a - level) / (a - b);
            return Some(j as f64 + step as f64 * frac);
        }
        j = next;
    }
}

/// Fractional endpoints of the longest run strictly below `threshold`,
/// interpolated at the threshold level.
fn dark_window(v: &[f64], threshold: f64) -> Option<(f64, f64)> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < v.len() {
        if v[i] < threshold {
            let start = i;
            while i + 1 < v.len() && v[i + 1] < threshold {
                i += 1;
            }
            if best.is_none_or(|(a, b)| i - start > b - a) {
                best = Some((start, i));
            }
        }
        i += 1;
    }
    let (a, b) = best?;
    let left = if a == 0 {
        0.0
    } else {
        a as f64 - (threshold - v[a]) / (v[a - 1] - v[a])
    };
    let right = if b + 1 == v.len() {
        b as f64
    } else {
        b as f64 + (threshold - v[b]) / (v[b + 1] - v[b])
    };
    Some((left, right))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CentralPulse {
    /// Index into [`PulseReport::pulses`].
    pub index: usize,
    pub time: f64,
    pub peak: f64,
    pub fwhm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BunchSummary {
    /// Pulse count of every complete bunch.
    pub counts: Vec<usize>,
    /// The common count, when all bunches agree.
    pub pulses_per_bunch: Option<usize>,
    /// Largest relative height mismatch between mirror-image pulses of a
    /// bunch.
    pub mirror_mismatch: f64,
    /// Set when `mirror_mismatch` exceeds 5%.
    pub asymmetric: bool,
    /// Pulse nearest the center of the first bunch.
    pub central: Option<CentralPulse>,
    /// Median FWHM within the first bunch.
    pub median_fwhm: Option<f64>,
}

pub const ASYMMETRY_LIMIT: f64 = 0.05;

pub fn bunch_stats(report: &PulseReport) -> BunchSummary {
    let counts: Vec<usize> = report.bunches.iter().map(|b| b.pulses.len()).collect();
    let pulses_per_bunch = match counts.first() {
        Some(&c) if counts.iter().all(|&x| x == c) => Some(c),
        _ => None,
    };

    let mut mirror_mismatch: f64 = 0.0;
    for bunch in &report.bunches {
        let heights: Vec<f64> = bunch.pulses.iter().map(|&p| report.pulses[p].peak).collect();
        let top = heights.iter().copied().fold(0.0, f64::max);
        let c = heights.len();
        for j in 0..c / 2 {
            mirror_mismatch = mirror_mismatch.max((heights[j] - heights[c - 1 - j]).abs() / top);
        }
    }

    let first = report.bunches.first();
    let central_index = first.and_then(|b| {
        let mid = b.center();
        b.pulses.iter().copied().min_by(|&x, &y| {
            let dx = (report.pulses[x].time - mid).abs();
            let dy = (report.pulses[y].time - mid).abs();
            dx.total_cmp(&dy)
        })
    });
    let central = central_index.map(|p| {
        let pulse = report.pulses[p];
        CentralPulse {
            index: p,
            time: pulse.time,
            peak: pulse.peak,
            fwhm: pulse.fwhm,
        }
    });
    let median_fwhm = first.map(|b| {
        let mut widths: Vec<f64> = b.pulses.iter().map(|&p| report.pulses[p].fwhm).collect();
        widths.sort_by(f64::total_cmp);
        let n = widths.len();
        if n % 2 == 1 {
            widths[n / 2]
        } else {
            0.5 * (widths[n / 2 - 1] + widths[n / 2])
        }
    });
    BunchSummary {
        counts,
        pulses_per_bunch,
        mirror_mismatch,
        asymmetric: mirror_mismatch > ASYMMETRY_LIMIT,
        central,
        median_fwhm,
    }
}

/// Lowest trace values between pulse `index` and its neighbours on the left
/// and right (or the trace ends).
pub fn flanking_minima(trace: &IntensityTrace, report: &PulseReport, index: usize) -> (f64, f64) {
    let grid = trace.grid();
    let at = |t: f64| ((t - grid.start()) / grid.spacing()).round() as usize;
    let here = at(report.pulses[index].time);
    let lo = index.checked_sub(1).map_or(0, |p| at(report.pulses[p].time));
    let hi = report
        .pulses
        .get(index + 1)
        .map_or(trace.values().len() - 1, |p| at(p.time));
    let v = trace.values();
    let min = |s: &[f64]| s.iter().copied().fold(f64::INFINITY, f64::min);
    (min(&v[lo..=here]), min(&v[here..=hi]))
}
