//! Mean squared displacement of trajectories through embedding space.
//!
//! For a trajectory `e_1 .. e_N`, the time-averaged MSD at delay `n` is
//! `(1/(N-n)) Σ_{i=1}^{N-n} ‖e_{i+n} − e_i‖²` for `n = 1 .. N-1`.

mod fit;
mod regime;
mod tail;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fit::{
    fit_power_law, segment_phases, segment_phases_in, PhaseSegmentation, PowerLawFit, Segment,
    MAX_GRID_POINTS,
};
pub use regime::{
    analyze, analyze_curve, classify_regime, default_fit_window, detect_plateau, AnalysisOptions,
    DiffusionReport, Plateau, Regime,
};
pub use tail::{tail_exponent, DEFAULT_TAIL_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Walk,
    Document,
    Synthetic,
}

/// Ordered points of a common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    data: Vec<f64>,
    dim: usize,
    provenance: Provenance,
}

impl Trajectory {
    pub fn from_flat(data: Vec<f64>, dim: usize, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invariant("trajectory dimension is zero".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Invariant(format!(
                "{} values do not divide into points of dimension {dim}",
                data.len()
            )));
        }
        let n = data.len() / dim;
        if n < 2 {
            return Err(Error::TooShort { have: n, need: 2 });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Invariant(format!("non-finite coordinate in point {}", pos / dim)));
        }
        Ok(Trajectory {
            data,
            dim,
            provenance,
        })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P], provenance: Provenance) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.as_ref().len());
        if let Some(bad) = points.iter().position(|p| p.as_ref().len() != dim) {
            return Err(Error::Invariant(format!(
                "point {bad} has dimension {}, expected {dim}",
                points[bad].as_ref().len()
            )));
        }
        let data = points.iter().flat_map(|p| p.as_ref().iter().copied()).collect();
        Self::from_flat(data, dim, provenance)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Writes `t,x0,x1,...` CSV, one row per point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_owned()];
        header.extend((0..self.dim).map(|k| format!("x{k}")));
        out.write_record(&header)?;
        for (t, p) in self.points().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(p.iter().map(f64::to_string));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `e_i − e_j` for 0-based indices `i < j`.
pub fn displacement(traj: &Trajectory, i: usize, j: usize) -> Result<Vec<f64>> {
    if i >= j || j >= traj.len() {
        return Err(Error::OutOfRange(format!(
            "displacement needs i < j < {}, got i={i} j={j}",
            traj.len()
        )));
    }
    Ok(traj
        .point(i)
        .iter()
        .zip(traj.point(j))
        .map(|(a, b)| a - b)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdCurve {
    delays: Vec<usize>,
    values: Vec<f64>,
    counts: Vec<usize>,
}

impl MsdCurve {
    /// Curve over delays `1..=values.len()` of a trajectory with
    /// `values.len() + 1` points.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let n_points = values.len() + 1;
        Self::from_values_truncated(values, n_points)
    }

    /// Curve over delays `1..=values.len()` of a trajectory with `n_points`
    /// points (`values.len() < n_points`).
    pub fn from_values_truncated(values: Vec<f64>, n_points: usize) -> Result<Self> {
        if values.is_empty() || values.len() >= n_points {
            return Err(Error::Invariant(format!(
                "{} delays for a trajectory of {n_points} points",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Invariant(format!("MSD value {v} is not finite and non-negative")));
        }
        let delays: Vec<usize> = (1..=values.len()).collect();
        let counts = delays.iter().map(|n| n_points - n).collect();
        Ok(MsdCurve {
            delays,
            values,
            counts,
        })
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Number of points in the trajectory the curve came from.
    pub fn n_points(&self) -> usize {
        self.counts[0] + 1
    }

    /// Value at delay `n` (1-based), if present.
    pub fn at(&self, delay: usize) -> Option<f64> {
        delay.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// Point-wise mean of curves sharing one delay grid. Counts stay the
    /// per-trajectory `N - n`.
    pub fn ensemble_mean(curves: &[MsdCurve]) -> Result<MsdCurve> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InsufficientData("no curves to average".into()))?;
        if curves.iter().any(|c| c.delays != first.delays || c.counts != first.counts) {
            return Err(Error::InvalidParam("curves have different delay grids".into()));
        }
        let k = curves.len() as f64;
        let values = (0..first.len())
            .map(|i| curves.iter().map(|c| c.values[i]).sum::<f64>() / k)
            .collect();
        Ok(MsdCurve {
            delays: first.delays.clone(),
            values,
            counts: first.counts.clone(),
        })
    }

    /// `delay,msd,count` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["delay", "msd", "count"])?;
        for ((d, v), c) in self.delays.iter().zip(&self.values).zip(&self.counts) {
            out.write_record([d.to_string(), v.to_string(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn msd_at(traj: &Trajectory, n: usize) -> f64 {
    let count = traj.len() - n;
    let mut sum = 0.0;
    for i in 0..count {
        sum += traj
            .point(i + n)
            .iter()
            .zip(traj.point(i))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    sum / count as f64
}

/// Full MSD curve over delays `1..N-1`.
pub fn msd(traj: &Trajectory) -> MsdCurve {
    msd_to(traj, traj.len() - 1)
}

/// MSD curve over delays `1..=max_delay` (clamped to `N-1`).
///
/// Delays are evaluated in parallel; each delay's sum runs in a fixed
/// order, so the result is bit-identical for any thread count.
pub fn msd_to(traj: &Trajectory, max_delay: usize) -> MsdCurve {
    let max_delay = max_delay.clamp(1, traj.len() - 1);
    let values: Vec<f64> = (1..=max_delay)
        .into_par_iter()
        .map(|n| msd_at(traj, n))
        .collect();
    MsdCurve::from_values_truncated(values, traj.len()).expect("finite trajectory gives a valid curve")
}

/// Euclidean length of each consecutive step.
pub fn step_lengths(traj: &Trajectory) -> Vec<f64> {
    (0..traj.len() - 1)
        .map(|i| {
            traj.point(i + 1)
                .iter()
                .zip(traj.point(i))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use proptest::prelude::*;

    fn random_traj(n: usize, d: usize, seed: u64) -> Trajectory {
        let mut rng = SimRng::new(seed);
        let data = (0..n * d).map(|_| rng.standard_normal() * 2.0).collect();
        Trajectory::from_flat(data, d, Provenance::Synthetic).unwrap()
    }

    /// Every ordered pair i < j, bucketed by delay.
    fn brute_force_msd(traj: &Trajectory) -> Vec<f64> {
        let n = traj.len();
        let mut sums = vec![0.0; n];
        let mut counts = vec![0usize; n];
        for j in 0..n {
            for i in 0..j {
                let d = displacement(traj, i, j).unwrap();
                sums[j - i] += d.iter().map(|x| x * x).sum::<f64>();
                counts[j - i] += 1;
            }
        }
        (1..n).map(|k| sums[k] / counts[k] as f64).collect()
    }

    #[test]
    fn displacement_examples() {
        let t = Trajectory::from_points(&[[0.0, 0.0], [1.0, 1.0]], Provenance::Synthetic).unwrap();
        assert_eq!(displacement(&t, 0, 1).unwrap(), vec![-1.0, -1.0]);
        assert!(matches!(displacement(&t, 1, 1), Err(Error::OutOfRange(_))));
        assert!(matches!(displacement(&t, 0, 2), Err(Error::OutOfRange(_))));

        let r = random_traj(5, 3, 9);
        for j in 0..5 {
            for i in 0..j {
                let d = displacement(&r, i, j).unwrap();
                for (k, dk) in d.iter().enumerate() {
                    assert_eq!(*dk, r.point(i)[k] - r.point(j)[k]);
                }
            }
        }
    }

    #[test]
    fn trajectory_invariants() {
        assert!(matches!(
            Trajectory::from_points(&[[1.0]], Provenance::Walk),
            Err(Error::TooShort { have: 1, need: 2 })
        ));
        assert!(Trajectory::from_points(&[vec![1.0], vec![1.0, 2.0]], Provenance::Walk).is_err());
        assert!(Trajectory::from_points(&[[1.0], [f64::INFINITY]], Provenance::Walk).is_err());
    }

    #[test]
    fn constant_trajectory_has_zero_msd() {
        let t = Trajectory::from_points(&[[3.0, -1.0]; 12], Provenance::Synthetic).unwrap();
        let c = msd(&t);
        assert_eq!(c.len(), 11);
        assert!(c.values().iter().all(|&v| v == 0.0));
        assert!(step_lengths(&t).iter().all(|&l| l == 0.0));
    }

    #[test]
    fn ballistic_line_is_quadratic() {
        let v = [0.5, -2.0, 1.0];
        let v2: f64 = v.iter().map(|x| x * x).sum();
        let pts: Vec<Vec<f64>> = (0..40).map(|i| v.iter().map(|x| x * i as f64).collect()).collect();
        let c = msd(&Trajectory::from_points(&pts, Provenance::Synthetic).unwrap());
        for (d, val) in c.delays().iter().zip(c.values()) {
            let expected = (*d * *d) as f64 * v2;
            assert!((val - expected).abs() <= 1e-12 * expected);
        }
        assert_eq!(c.counts()[0], 39);
        assert_eq!(*c.counts().last().unwrap(), 1);
    }

    #[test]
    fn matches_brute_force_50_by_5() {
        let t = random_traj(50, 5, 1);
        let fast = msd(&t);
        for (a, b) in fast.values().iter().zip(brute_force_msd(&t)) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn staircase_steps_are_unit() {
        let pts: Vec<[f64; 2]> = (0..10)
            .map(|i| [((i + 1) / 2) as f64, (i / 2) as f64])
            .collect();
        let t = Trajectory::from_points(&pts, Provenance::Synthetic).unwrap();
        assert!(step_lengths(&t).iter().all(|&l| l == 1.0));
    }

    #[test]
    fn step_lengths_match_per_step_norm() {
        let t = random_traj(30, 4, 3);
        let lengths = step_lengths(&t);
        assert_eq!(lengths.len(), 29);
        for (i, l) in lengths.iter().enumerate() {
            let d = displacement(&t, i, i + 1).unwrap();
            assert_eq!(*l, d.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
    }

    #[test]
    fn truncated_curve_and_csv() {
        let t = random_traj(20, 2, 4);
        let full = msd(&t);
        let part = msd_to(&t, 5);
        assert_eq!(part.len(), 5);
        assert_eq!(part.values(), &full.values()[..5]);
        assert_eq!(part.n_points(), 20);

        let mut buf = Vec::new();
        part.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("delay,msd,count"));
        assert!(lines.next().unwrap().starts_with("1,"));
        assert!(text.lines().last().unwrap().ends_with(",15"));
    }

    #[test]
    fn ensemble_mean_averages_pointwise() {
        let a = MsdCurve::from_values(vec![1.0, 2.0]).unwrap();
        let b = MsdCurve::from_values(vec![3.0, 6.0]).unwrap();
        let m = MsdCurve::ensemble_mean(&[a, b]).unwrap();
        assert_eq!(m.values(), &[2.0, 4.0]);
        assert_eq!(m.counts(), &[2, 1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn oracle_translation_and_scaling(
            n in 2usize..100,
            d in 1usize..16,
            seed in any::<u64>(),
            shift in -50.0f64..50.0,
            scale in 0.01f64..100.0,
        ) {
            let t = random_traj(n, d, seed);
            let base = msd(&t);
            for (a, b) in base.values().iter().zip(brute_force_msd(&t)) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs());
            }

            let shifted = Trajectory::from_flat(
                t.points().flat_map(|p| p.iter().enumerate().map(|(k, x)| x + shift * (k as f64 + 1.0)).collect::<Vec<_>>()).collect(),
                d,
                Provenance::Synthetic,
            ).unwrap();
            for (a, b) in msd(&shifted).values().iter().zip(base.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }

            let scaled = Trajectory::from_flat(
                t.points().flat_map(|p| p.iter().map(|x| x * scale).collect::<Vec<_>>()).collect(),
                d,
                Provenance::Synthetic,
            ).unwrap();
            for (a, b) in msd(&scaled).values().iter().zip(base.values()) {
                prop_assert!((a - b * scale * scale).abs() <= 1e-9 * a.abs());
            }
        }
    }
}
