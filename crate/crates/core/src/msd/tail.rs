use crate::error::{Error, Result};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;
const MIN_POSITIVE: usize = 20;

/// Hill estimate of the power-law tail exponent of `lengths`.
///
/// With the positive values sorted descending as `x_(1) >= x_(2) >= ...` and
/// `k = ⌈tail_fraction · M⌉`, returns `k / Σ_{i=1..k} ln(x_(i) / x_(k+1))`.
/// Non-positive values are ignored.
pub fn tail_exponent(lengths: &[f64], tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::InvalidParam(format!(
            "tail fraction {tail_fraction} outside (0, 0.5]"
        )));
    }
    let mut xs: Vec<f64> = lengths
        .iter()
        .copied()
        .filter(|x| *x > 0.0 && x.is_finite())
        .collect();
    let m = xs.len();
    if m < MIN_POSITIVE {
        return Err(Error::InsufficientData(format!(
            "{m} positive lengths, need {MIN_POSITIVE}"
        )));
    }
    xs.sort_unstable_by(|a, b| b.total_cmp(a));
    // guard against 0.1 * 100 landing a hair above 10
    let k = ((tail_fraction * m as f64) * (1.0 - 1e-12)).ceil() as usize;
    let k = k.clamp(1, m - 1);
    let threshold = xs[k];
    let log_sum: f64 = xs[..k].iter().map(|x| (x / threshold).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::InsufficientData(
            "tail order statistics are all equal".into(),
        ));
    }
    Ok(k as f64 / log_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;

    #[test]
    fn pareto_sample_recovers_exponent() {
        let mu = 1.5;
        let mut rng = SimRng::new(2024);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| rng.uniform_open_closed().powf(-1.0 / mu))
            .collect();
        let est = tail_exponent(&xs, 0.1).unwrap();
        assert!((1.2..=1.8).contains(&est), "estimate {est}");
    }

    #[test]
    fn exponential_sample_is_light_tailed() {
        let mut rng = SimRng::new(77);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| -rng.uniform_open_closed().ln())
            .collect();
        let est = tail_exponent(&xs, 0.1).unwrap();
        assert!(est > 3.0, "estimate {est}");
    }

    #[test]
    fn hand_computed_small_case() {
        // 20 values 1..=20, fraction 0.1 -> k = 2, threshold 18
        let xs: Vec<f64> = (1..=20).map(f64::from).collect();
        let expected = 2.0 / ((20.0f64 / 18.0).ln() + (19.0f64 / 18.0).ln());
        assert!((tail_exponent(&xs, 0.1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            tail_exponent(&[2.0; 100], 0.1),
            Err(Error::InsufficientData(_))
        ));
        let mut few = vec![0.0; 50];
        few.extend((1..=10).map(f64::from));
        assert!(matches!(tail_exponent(&few, 0.1), Err(Error::InsufficientData(_))));
        assert!(matches!(tail_exponent(&[1.0; 30], 0.0), Err(Error::InvalidParam(_))));
        assert!(matches!(tail_exponent(&[1.0; 30], 0.6), Err(Error::InvalidParam(_))));
    }
}
