//! Power-law fits and piecewise phase segmentation in log-log space.

use serde::{Deserialize, Serialize};

use super::MsdCurve;
use crate::error::{Error, Result};

/// Upper bound on the log-spaced delay grid used by [`segment_phases_in`].
pub const MAX_GRID_POINTS: usize = 50;
const MIN_SEGMENT_POINTS: usize = 3;
const MAX_BREAKPOINTS: usize = 2;
/// Floor on the per-point residual variance inside the BIC score, so that
/// exact fits compare by parameter count alone.
const VARIANCE_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub log_amplitude: f64,
    pub r2: f64,
    pub window: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub window: [usize; 2],
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSegmentation {
    pub segments: Vec<Segment>,
    /// Log-log SSE of the chosen segmentation.
    pub sse: f64,
    /// Delays of the grid the search ran on.
    pub grid: Vec<usize>,
    /// Lowest unpenalized SSE for 0, 1, .. breakpoints.
    pub best_sse_by_count: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Ols {
    slope: f64,
    intercept: f64,
    sse: f64,
    sst: f64,
}

fn ols(xs: &[f64], ys: &[f64]) -> Ols {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ols {
        slope,
        intercept,
        sse,
        sst: syy,
    }
}

fn usable_points(curve: &MsdCurve, window: (usize, usize)) -> Result<Vec<(usize, f64)>> {
    let (lo, hi) = window;
    if lo == 0 || lo >= hi {
        return Err(Error::InvalidParam(format!(
            "fit window [{lo}, {hi}] must satisfy 1 <= lo < hi"
        )));
    }
    Ok(curve
        .delays()
        .iter()
        .zip(curve.values())
        .filter(|(d, v)| (lo..=hi).contains(*d) && **v > 0.0)
        .map(|(d, v)| (*d, *v))
        .collect())
}

/// Least squares of `ln MSD` on `ln Δ` over the delays in `window`
/// (inclusive), ignoring zero values.
pub fn fit_power_law(curve: &MsdCurve, window: (usize, usize)) -> Result<PowerLawFit> {
    let pts = usable_points(curve, window)?;
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} positive MSD values in [{}, {}], need 2",
            pts.len(),
            window.0,
            window.1
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|(d, _)| (*d as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let fit = ols(&xs, &ys);
    let r2 = if fit.sst > 0.0 { 1.0 - fit.sse / fit.sst } else { 1.0 };
    Ok(PowerLawFit {
        alpha: fit.slope,
        log_amplitude: fit.intercept,
        r2,
        window: [pts[0].0, pts[pts.len() - 1].0],
    })
}

/// Picks up to [`MAX_GRID_POINTS`] of `pts`, evenly spaced in log delay.
fn log_grid(pts: &[(usize, f64)]) -> Vec<(usize, f64)> {
    if pts.len() <= MAX_GRID_POINTS {
        return pts.to_vec();
    }
    let first = (pts[0].0 as f64).ln();
    let last = (pts[pts.len() - 1].0 as f64).ln();
    let step = (last - first) / (MAX_GRID_POINTS - 1) as f64;
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(MAX_GRID_POINTS);
    for j in 0..MAX_GRID_POINTS {
        let target = first + step * j as f64;
        let pos = pts.partition_point(|(d, _)| (*d as f64).ln() < target);
        let pick = match pos {
            0 => 0,
            p if p >= pts.len() => pts.len() - 1,
            p => {
                let below = target - (pts[p - 1].0 as f64).ln();
                let above = (pts[p].0 as f64).ln() - target;
                if below <= above {
                    p - 1
                } else {
                    p
                }
            }
        };
        if out.last().map(|(d, _)| *d) != Some(pts[pick].0) {
            out.push(pts[pick]);
        }
    }
    out
}

pub fn segment_phases(curve: &MsdCurve, max_breakpoints: usize) -> Result<Vec<Segment>> {
    segment_phases_in(curve, (1, curve.len()), max_breakpoints).map(|s| s.segments)
}

/// Exhaustive piecewise log-log regression with up to `max_breakpoints`
/// breaks placed on a log-spaced delay grid. Each segment carries its own
/// line and holds at least three grid points. The number of breaks is chosen
/// by BIC, `m·ln(SSE/m) + p·ln(m)` with `p = 3·breaks + 2`.
///
/// Segment windows share their boundary delays: segment `i` ends at the delay
/// where segment `i + 1` starts.
pub fn segment_phases_in(
    curve: &MsdCurve,
    window: (usize, usize),
    max_breakpoints: usize,
) -> Result<PhaseSegmentation> {
    if max_breakpoints > MAX_BREAKPOINTS {
        return Err(Error::InvalidParam(format!(
            "at most {MAX_BREAKPOINTS} breakpoints, got {max_breakpoints}"
        )));
    }
    let grid = log_grid(&usable_points(curve, window)?);
    let m = grid.len();
    let need = (max_breakpoints + 1) * MIN_SEGMENT_POINTS;
    if m < need {
        return Err(Error::InsufficientData(format!(
            "{m} usable grid points, {need} needed for {max_breakpoints} breakpoints"
        )));
    }
    let xs: Vec<f64> = grid.iter().map(|(d, _)| (*d as f64).ln()).collect();
    let ys: Vec<f64> = grid.iter().map(|(_, v)| v.ln()).collect();
    let fit = |s: usize, e: usize| ols(&xs[s..e], &ys[s..e]);

    // (total sse, interior cut positions) for each breakpoint count
    let mut best: Vec<(f64, Vec<usize>)> = vec![(fit(0, m).sse, vec![])];
    let min = MIN_SEGMENT_POINTS;
    if max_breakpoints >= 1 {
        let mut b1 = (f64::INFINITY, vec![]);
        for c in min..=m - min {
            let sse = fit(0, c).sse + fit(c, m).sse;
            if sse < b1.0 {
                b1 = (sse, vec![c]);
            }
        }
        best.push(b1);
    }
    if max_breakpoints >= 2 {
        let mut b2 = (f64::INFINITY, vec![]);
        for c1 in min..=m - 2 * min {
            let head = fit(0, c1).sse;
            for c2 in c1 + min..=m - min {
                let sse = head + fit(c1, c2).sse + fit(c2, m).sse;
                if sse < b2.0 {
                    b2 = (sse, vec![c1, c2]);
                }
            }
        }
        best.push(b2);
    }

    let mf = m as f64;
    let score = |k: usize, sse: f64| {
        mf * (sse / mf).max(VARIANCE_FLOOR).ln() + (3 * k + 2) as f64 * mf.ln()
    };
    let mut chosen = 0;
    for k in 1..best.len() {
        if score(k, best[k].0) < score(chosen, best[chosen].0) {
            chosen = k;
        }
    }

    let cuts = &best[chosen].1;
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(m);
    let segments = bounds
        .windows(2)
        .map(|w| {
            let end_delay = if w[1] == m { grid[m - 1].0 } else { grid[w[1]].0 };
            Segment {
                window: [grid[w[0]].0, end_delay],
                alpha: fit(w[0], w[1]).slope,
            }
        })
        .collect();

    Ok(PhaseSegmentation {
        segments,
        sse: best[chosen].0,
        grid: grid.iter().map(|(d, _)| *d).collect(),
        best_sse_by_count: best.iter().map(|(s, _)| *s).collect(),
    })
}
