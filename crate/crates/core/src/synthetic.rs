//! Reference trajectories with known diffusion laws.
//!
//! Four generators cover the standard regimes: Brownian (MSD ∝ Δ),
//! ballistic (∝ Δ²), confined Ornstein-Uhlenbeck (saturating) and a Pareto
//! step-length flight with no finite-variance closed form. All randomness
//! comes from [`SimRng`], so a spec and seed pin the output exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::msd::{Provenance, Trajectory};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticKind {
    /// `x_{t+1} = x_t + step_std · ξ_t`, starting at the origin.
    Brownian { step_std: f64 },
    /// `x_t = t · velocity`.
    Ballistic { velocity: Vec<f64> },
    /// Exact OU discretization with unit time step, started from the
    /// stationary law `N(0, sigma²)` per axis.
    OuConfined { theta: f64, sigma: f64 },
    /// Step lengths Pareto with density ∝ x^-(mu+1) on `[x_min, ∞)`,
    /// directions uniform on the sphere.
    Levy { mu: f64, x_min: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub dims: usize,
    pub steps: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        if self.dims == 0 {
            return bad("dims must be at least 1".into());
        }
        if self.steps < 2 {
            return bad(format!("steps must be at least 2, got {}", self.steps));
        }
        match &self.kind {
            SyntheticKind::Brownian { step_std } if !(*step_std >= 0.0 && step_std.is_finite()) => {
                bad(format!("step_std must be finite and >= 0, got {step_std}"))
            }
            SyntheticKind::Ballistic { velocity } if velocity.len() != self.dims => bad(format!(
                "velocity has {} components for {} dims",
                velocity.len(),
                self.dims
            )),
            SyntheticKind::Ballistic { velocity } if velocity.iter().any(|v| !v.is_finite()) => {
                bad("velocity must be finite".into())
            }
            SyntheticKind::OuConfined { theta, sigma }
                if !(*theta > 0.0 && theta.is_finite() && *sigma >= 0.0 && sigma.is_finite()) =>
            {
                bad(format!("OU needs theta > 0 and sigma >= 0, got {theta}, {sigma}"))
            }
            SyntheticKind::Levy { mu, x_min }
                if !(*mu > 0.0 && *mu <= 3.0 && *x_min > 0.0 && x_min.is_finite()) =>
            {
                bad(format!("Levy needs mu in (0, 3] and x_min > 0, got {mu}, {x_min}"))
            }
            _ => Ok(()),
        }
    }
}

/// `steps + 1` points, deterministic in `spec.seed`.
pub fn generate(spec: &SyntheticSpec) -> Result<Trajectory> {
    spec.validate()?;
    let d = spec.dims;
    let n = spec.steps + 1;
    let mut rng = SimRng::new(spec.seed);
    let mut data = Vec::with_capacity(n * d);

    match &spec.kind {
        SyntheticKind::Brownian { step_std } => {
            let mut x = vec![0.0; d];
            data.extend_from_slice(&x);
            for _ in 1..n {
                for xi in x.iter_mut() {
                    *xi += step_std * rng.standard_normal();
                }
                data.extend_from_slice(&x);
            }
        }
        SyntheticKind::Ballistic { velocity } => {
            for t in 0..n {
                data.extend(velocity.iter().map(|v| t as f64 * v));
            }
        }
        SyntheticKind::OuConfined { theta, sigma } => {
            let decay = (-theta).exp();
            let kick = sigma * (1.0 - (-2.0 * theta).exp()).sqrt();
            let mut x: Vec<f64> = (0..d).map(|_| sigma * rng.standard_normal()).collect();
            data.extend_from_slice(&x);
            for _ in 1..n {
                for xi in x.iter_mut() {
                    *xi = *xi * decay + kick * rng.standard_normal();
                }
                data.extend_from_slice(&x);
            }
        }
        SyntheticKind::Levy { mu, x_min } => {
            let mut x = vec![0.0; d];
            data.extend_from_slice(&x);
            let mut dir = vec![0.0; d];
            for _ in 1..n {
                let length = x_min * rng.uniform_open_closed().powf(-1.0 / mu);
                let norm = loop {
                    dir.iter_mut().for_each(|c| *c = rng.standard_normal());
                    let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        break norm;
                    }
                };
                for (xi, c) in x.iter_mut().zip(&dir) {
                    *xi += length * c / norm;
                }
                data.extend_from_slice(&x);
            }
        }
    }
    Trajectory::from_flat(data, d, Provenance::Synthetic)
}

/// Closed-form MSD at each delay: `dims·step_std²·Δ` (Brownian),
/// `‖v‖²·Δ²` (ballistic), `2·dims·sigma²·(1 − e^{−θΔ})` (OU).
pub fn expected_msd(spec: &SyntheticSpec, delays: &[usize]) -> Result<Vec<f64>> {
    spec.validate()?;
    let d = spec.dims as f64;
    let f: Box<dyn Fn(f64) -> f64> = match &spec.kind {
        SyntheticKind::Brownian { step_std } => {
            let s2 = step_std * step_std;
            Box::new(move |t| d * s2 * t)
        }
        SyntheticKind::Ballistic { velocity } => {
            let v2: f64 = velocity.iter().map(|v| v * v).sum();
            Box::new(move |t| v2 * t * t)
        }
        SyntheticKind::OuConfined { theta, sigma } => {
            let (theta, s2) = (*theta, sigma * sigma);
            Box::new(move |t| 2.0 * d * s2 * (1.0 - (-theta * t).exp()))
        }
        SyntheticKind::Levy { .. } => {
            return Err(Error::Unsupported(
                "Levy flights have no finite-variance closed-form MSD".into(),
            ))
        }
    };
    Ok(delays.iter().map(|&n| f(n as f64)).collect())
}
