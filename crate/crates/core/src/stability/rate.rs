//! Empirical exponential rate of `|X(t, s)|` from grid samples.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::FundamentalMatrix;
use crate::linalg::mat_norm;

pub const MIN_SAMPLES: usize = 20;

/// Fit of `ln |X(t, s)| ~ ln N - nu (t - s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    #[serde(rename = "N")]
    pub amplitude: f64,
    pub nu: f64,
    pub window: [f64; 2],
    /// Largest absolute deviation of a sample from the fitted line (log scale).
    pub residual: f64,
    pub n_samples: usize,
    /// Every sample obeys `|X| <= N e^{-nu (t - s)} (1 + fit_slack)`.
    pub fit_slack: f64,
}

impl RateEstimate {
    pub fn is_decaying(&self) -> bool {
        self.nu > 0.0
    }
}

/// Least-squares fit of `(t - s, ln |X|)` pairs.
pub fn fit_log_linear(samples: &[(f64, f64)], window: [f64; 2]) -> Result<RateEstimate> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(d, norm)| *d >= window[0] && *d <= window[1] && *norm > 0.0)
        .map(|&(d, norm)| (d, norm.ln()))
        .collect();
    let in_window = samples
        .iter()
        .filter(|(d, _)| *d >= window[0] && *d <= window[1])
        .count();
    if in_window > 0 && pts.is_empty() {
        return Err(Error::Numerical(
            "all sampled norms in the window are zero".into(),
        ));
    }
    if pts.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            found: pts.len(),
            needed: MIN_SAMPLES,
        });
    }
    let m = pts.len() as f64;
    let mean_d = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_d).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Argument(
            "all samples share one value of t - s".into(),
        ));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_d) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_d;
    let devs = pts.iter().map(|p| p.1 - (intercept + slope * p.0));
    let (mut residual, mut above) = (0.0f64, 0.0f64);
    for dev in devs {
        residual = residual.max(dev.abs());
        above = above.max(dev);
    }
    let nu = -slope;
    if nu <= 0.0 {
        log::warn!("fitted rate nu = {nu} is not positive: |X(t, s)| does not decay on the window");
    }
    Ok(RateEstimate {
        amplitude: intercept.exp(),
        nu,
        window,
        residual,
        n_samples: pts.len(),
        fit_slack: above.exp_m1(),
    })
}

/// Fit over all grid pairs with `t - s` in `window`.
pub fn estimate_rate(fm: &FundamentalMatrix, window: [f64; 2]) -> Result<RateEstimate> {
    if !(window[0] <= window[1]) {
        return Err(Error::Argument(format!(
            "empty window [{}, {}]",
            window[0], window[1]
        )));
    }
    let samples: Vec<(f64, f64)> = fm
        .pairs()
        .filter(|(t, s, _)| t >= s)
        .map(|(t, s, x)| (t - s, mat_norm(x)))
        .collect();
    fit_log_linear(&samples, window)
}

/// `[2 rho, largest t - s]`, the default fit window.
pub fn default_window(fm: &FundamentalMatrix, rho: Option<f64>) -> [f64; 2] {
    let span = fm.pairs().map(|(t, s, _)| t - s).fold(0.0, f64::max);
    [(2.0 * rho.unwrap_or(0.0)).min(span), span]
}
