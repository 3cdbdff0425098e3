//! Plateau detection, regime labels and the combined diffusion report.

use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, segment_phases_in, PowerLawFit, Segment};
use super::tail::{tail_exponent, DEFAULT_TAIL_FRACTION};
use super::{msd_to, step_lengths, MsdCurve, Trajectory};
use crate::error::{Error, Result};

/// Plateau thresholds over the last decade of the fit window.
const PLATEAU_MAX_SLOPE: f64 = 0.1;
const PLATEAU_MAX_RISE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Ballistic,
    Superdiffusive,
    Diffusive,
    Subdiffusive,
    Confined,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Ballistic => "ballistic",
            Regime::Superdiffusive => "superdiffusive",
            Regime::Diffusive => "diffusive",
            Regime::Subdiffusive => "subdiffusive",
            Regime::Confined => "confined",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionReport {
    pub fit: PowerLawFit,
    pub segments: Vec<Segment>,
    pub regime: Regime,
    pub plateau_level: Option<f64>,
    pub tail_exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    /// Mean MSD over the terminal decade.
    pub level: f64,
    pub slope: f64,
    pub relative_rise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Fit window `(lo, hi)` in delays; `None` picks [`default_fit_window`].
    pub window: Option<(usize, usize)>,
    pub max_breakpoints: usize,
    pub tail_fraction: f64,
    /// Largest delay to evaluate; `None` computes the full curve.
    pub max_delay: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            window: None,
            max_breakpoints: 2,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            max_delay: None,
        }
    }
}

/// Whole curve for up to 100 delays, otherwise delays `1..N/4`, where the
/// per-delay sample count `N - n` is still large.
pub fn default_fit_window(n_points: usize) -> (usize, usize) {
    let delays = n_points.saturating_sub(1);
    if delays <= 100 {
        (1, delays)
    } else {
        (1, n_points / 4)
    }
}

fn log_slope(pts: &[(usize, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(d, _)| (*d as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Checks the last decade `[hi/10, hi]` of `window` for a plateau: log-log
/// slope below 0.1 and a relative rise below 10%. The rise compares the
/// mean of the last quarter of points against the first quarter.
///
/// Returns `None` when no plateau is found or the decade holds fewer than
/// three positive values.
pub fn detect_plateau(curve: &MsdCurve, window: [usize; 2]) -> Option<Plateau> {
    let [lo, hi] = window;
    let start = lo.max(hi.div_ceil(10));
    let pts: Vec<(usize, f64)> = curve
        .delays()
        .iter()
        .zip(curve.values())
        .filter(|(d, v)| (start..=hi).contains(*d) && **v > 0.0)
        .map(|(d, v)| (*d, *v))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let slope = log_slope(&pts);
    let quarter = pts.len().div_ceil(4);
    let mean = |s: &[(usize, f64)]| s.iter().map(|(_, v)| v).sum::<f64>() / s.len() as f64;
    let head = mean(&pts[..quarter]);
    let tail = mean(&pts[pts.len() - quarter..]);
    let relative_rise = (tail - head) / head;
    (slope < PLATEAU_MAX_SLOPE && relative_rise < PLATEAU_MAX_RISE).then(|| Plateau {
        level: mean(&pts),
        slope,
        relative_rise,
    })
}

/// Confined when a plateau was detected, otherwise banded by exponent:
/// `>= 1.8` ballistic, `(1.1, 1.8)` superdiffusive, `[0.9, 1.1]` diffusive,
/// `< 0.9` subdiffusive.
pub fn classify_regime(fit: &PowerLawFit, plateau: bool) -> Regime {
    let a = fit.alpha;
    if plateau {
        Regime::Confined
    } else if a >= 1.8 {
        Regime::Ballistic
    } else if a > 1.1 {
        Regime::Superdiffusive
    } else if a >= 0.9 {
        Regime::Diffusive
    } else {
        Regime::Subdiffusive
    }
}

/// Fits, segments and classifies an MSD curve. `step_lengths`, when given,
/// feed the tail-exponent estimate.
pub fn analyze_curve(
    curve: &MsdCurve,
    step_lengths: Option<&[f64]>,
    opts: &AnalysisOptions,
) -> Result<DiffusionReport> {
    let (lo, hi) = opts.window.unwrap_or_else(|| default_fit_window(curve.n_points()));
    let hi = hi.min(curve.len());
    if lo == 0 || lo >= hi {
        return Err(Error::InvalidParam(format!(
            "fit window [{lo}, {hi}] is empty for a curve of {} delays",
            curve.len()
        )));
    }
    let in_window = &curve.values()[lo - 1..hi];
    if in_window.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateTrajectory(
            "every MSD value in the fit window is zero (constant trajectory)".into(),
        ));
    }
    let fit = fit_power_law(curve, (lo, hi))?;

    let mut segments = None;
    for bp in (0..=opts.max_breakpoints).rev() {
        match segment_phases_in(curve, (lo, hi), bp) {
            Ok(s) => {
                segments = Some(s.segments);
                break;
            }
            Err(Error::InsufficientData(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let segments = segments.unwrap_or_else(|| {
        vec![Segment {
            window: fit.window,
            alpha: fit.alpha,
        }]
    });

    let plateau = detect_plateau(curve, fit.window);
    let regime = classify_regime(&fit, plateau.is_some());
    let tail_exponent = step_lengths.and_then(|l| tail_exponent(l, opts.tail_fraction).ok());
    Ok(DiffusionReport {
        fit,
        segments,
        regime,
        plateau_level: plateau.map(|p| p.level),
        tail_exponent,
    })
}

/// MSD followed by [`analyze_curve`]. Returns the report and the curve.
pub fn analyze(traj: &Trajectory, opts: &AnalysisOptions) -> Result<(DiffusionReport, MsdCurve)> {
    let curve = msd_to(traj, opts.max_delay.unwrap_or(traj.len() - 1));
    let lengths = step_lengths(traj);
    let report = analyze_curve(&curve, Some(&lengths), opts)?;
    Ok((report, curve))
}
