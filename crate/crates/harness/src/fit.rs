//! Least-squares growth exponents of regret curves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points used after dropping nonpositive values.
    pub points: usize,
}

/// Ordinary least squares of `ln regret` on `ln T`. Nonpositive regrets are
/// dropped with a warning; at least four points must remain.
pub fn fit_slope(horizons: &[u64], regrets: &[f64]) -> Result<SlopeFit> {
    if horizons.len() != regrets.len() {
        return Err(HarnessError::Fit(format!(
            "{} horizons but {} regret values",
            horizons.len(),
            regrets.len()
        )));
    }
    let mut xs = Vec::with_capacity(horizons.len());
    let mut ys = Vec::with_capacity(horizons.len());
    for (&t, &r) in horizons.iter().zip(regrets) {
        if !(r.is_finite() && r > 0.0) || t == 0 {
            log::warn!("dropping point T={t}, regret={r} from the log-log fit");
            continue;
        }
        xs.push((t as f64).ln());
        ys.push(r.ln());
    }
    if xs.len() < 4 {
        return Err(HarnessError::Fit(format!(
            "need at least 4 positive points, have {}",
            xs.len()
        )));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Fit("all horizons are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum();
    // A flat curve is fitted exactly; guard the 0/0 of rounding-level spread.
    let r_squared = if syy <= 1e-24 * k * my.abs().max(1.0).powi(2) {
        1.0
    } else {
        (1.0 - residual / syy).max(0.0)
    };
    Ok(SlopeFit {
        exponent,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// Averages values sharing a horizon, sorted by horizon.
pub fn mean_by_horizon(pairs: impl IntoIterator<Item = (u64, f64)>) -> (Vec<u64>, Vec<f64>) {
    let mut acc: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for (t, r) in pairs {
        let e = acc.entry(t).or_insert((0.0, 0));
        e.0 += r;
        e.1 += 1;
    }
    acc.into_iter().map(|(t, (s, c))| (t, s / c as f64)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts() -> Vec<u64> {
        (10..=17).map(|k| 1u64 << k).collect()
    }

    #[test]
    fn recovers_power_laws() {
        for p in [2.0 / 3.0, 0.75, 0.0, 1.0] {
            let r: Vec<f64> = ts().iter().map(|&t| 5.0 * (t as f64).powf(p)).collect();
            let fit = fit_slope(&ts(), &r).unwrap();
            assert!((fit.exponent - p).abs() < 1e-9, "{p}: {fit:?}");
            assert!((fit.intercept - 5f64.ln()).abs() < 1e-8);
            assert!((fit.r_squared - 1.0).abs() < 1e-12);
            assert_eq!(fit.points, 8);
        }
    }

    #[test]
    fn drops_nonpositive_points() {
        let t = ts();
        let mut r: Vec<f64> = t.iter().map(|&t| (t as f64).sqrt()).collect();
        r[0] = -1.0;
        r[1] = 0.0;
        let fit = fit_slope(&t, &r).unwrap();
        assert_eq!(fit.points, 6);
        assert!((fit.exponent - 0.5).abs() < 1e-9);
        r[2] = f64::NAN;
        r[3] = -2.0;
        r[4] = f64::INFINITY;
        assert!(fit_slope(&t, &r).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fit_slope(&[1, 2, 3], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_slope(&[1, 2, 3, 4], &[1.0, 2.0]).is_err());
        assert!(fit_slope(&[5, 5, 5, 5], &[1.0, 2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn averages_by_horizon() {
        let (t, r) = mean_by_horizon([(20, 1.0), (10, 2.0), (20, 3.0), (10, 4.0)]);
        assert_eq!(t, vec![10, 20]);
        assert_eq!(r, vec![3.0, 2.0]);
    }
}
