//! Two-dimensional PCA coordinates for plotting walks and trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::embedding::{dot, norm};
use crate::error::{Error, Result};

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 1000;
/// Second component variance below this fraction of the first counts as rank 1.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub coords: Vec<[f64; 2]>,
    /// Fraction of total variance along each axis.
    pub explained_variance: [f64; 2],
    /// Sample variance along each axis.
    pub variances: [f64; 2],
    pub degenerate: bool,
}

impl Projection2D {
    /// CSV with header `idx,x,y`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["idx", "x", "y"])?;
        for (i, [x, y]) in self.coords.iter().enumerate() {
            out.write_record([i.to_string(), x.to_string(), y.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Projects centered points onto the top two covariance eigenvectors,
/// found by power iteration with deflation. Each axis is signed so its
/// largest-magnitude loading is positive.
pub fn pca_2d<P: AsRef<[f64]>>(points: &[P]) -> Result<Projection2D> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("PCA needs at least 3 points, got {n}")));
    }
    let d = points[0].as_ref().len();
    if d < 2 {
        return Err(Error::InvalidParam(format!("PCA needs dimension >= 2, got {d}")));
    }
    if points.iter().any(|p| p.as_ref().len() != d) {
        return Err(Error::Invariant("points have mixed dimensions".into()));
    }

    let mut mean = vec![0.0; d];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.as_ref().iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = vec![0.0; d * d];
    for c in &centered {
        for i in 0..d {
            let ci = c[i];
            for j in i..d {
                cov[i * d + j] += ci * c[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    let total: f64 = (0..d).map(|i| cov[i * d + i]).sum();

    let (l1, v1) = top_eigenpair(&cov, d);
    let (mut l2, mut v2) = (0.0, vec![0.0; d]);
    let mut degenerate = l1.is_nan() || l1 <= 0.0;
    if !degenerate {
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] -= l1 * v1[i] * v1[j];
            }
        }
        let (l, v) = top_eigenpair(&cov, d);
        if l > RANK_TOLERANCE * l1 {
            (l2, v2) = (l, v);
        } else {
            degenerate = true;
        }
    }
    let v1 = if l1 > 0.0 { v1 } else { vec![0.0; d] };

    let coords = centered.iter().map(|c| [dot(c, &v1), dot(c, &v2)]).collect();
    let ratio = |l: f64| if total > 0.0 { (l / total).clamp(0.0, 1.0) } else { 0.0 };
    Ok(Projection2D {
        coords,
        explained_variance: [ratio(l1), ratio(l2)],
        variances: [l1.max(0.0), l2],
        degenerate,
    })
}

fn mat_vec(m: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    m.chunks_exact(d).map(|row| dot(row, v)).collect()
}

/// Dominant eigenpair of a symmetric matrix, starting from its
/// largest-norm column. Returns `(0, zeros)` for a zero matrix.
fn top_eigenpair(m: &[f64], d: usize) -> (f64, Vec<f64>) {
    let start = m
        .chunks_exact(d)
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .expect("d >= 1");
    let s = norm(start);
    if s.is_nan() || s <= 0.0 {
        return (0.0, vec![0.0; d]);
    }
    let mut v: Vec<f64> = start.iter().map(|x| x / s).collect();
    for _ in 0..POWER_MAX_ITERS {
        let w = mat_vec(m, d, &v);
        let wn = norm(&w);
        if wn.is_nan() || wn <= 0.0 {
            return (0.0, vec![0.0; d]);
        }
        let mut next: Vec<f64> = w.iter().map(|x| x / wn).collect();
        // a negative eigenvalue flips the sign each round
        if dot(&next, &v) < 0.0 {
            next.iter_mut().for_each(|x| *x = -*x);
        }
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        v = next;
        if delta < POWER_TOLERANCE {
            break;
        }
    }
    let lambda = dot(&v, &mat_vec(m, d, &v));
    orient(&mut v);
    (lambda, v)
}

fn orient(v: &mut [f64]) {
    let lead = v
        .iter()
        .copied()
        .reduce(|a, b| if b.abs() > a.abs() { b } else { a })
        .unwrap_or(0.0);
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
