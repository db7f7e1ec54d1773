//! Small statistics helpers: moments, two-sample Kolmogorov-Smirnov,
//! least-squares slope fits.

use crate::error::CoreError;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Sample mean and its standard error.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Unbiased sample variance and the standard error of the variance
/// estimate (moment-based, valid for non-Gaussian samples).
pub fn variance_and_se(samples: &[f64]) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    let mu4 = samples
        .iter()
        .map(|x| (x - mean).powi(4))
        .sum::<f64>()
        / m;
    let se = ((mu4 - var * var * (m - 3.0) / (m - 1.0)) / m).abs().sqrt();
    (var, se)
}

/// Pearson correlation coefficient.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let m = a.len() as f64;
    let ma = a.iter().sum::<f64>() / m;
    let mb = b.iter().sum::<f64>() / m;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Two-sample Kolmogorov-Smirnov result.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²} at the effective sample size
/// corrected λ (Numerical-Recipes form).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(CoreError::InsufficientData {
            needed: 1,
            have: 0,
        });
    }
    let mut sa: Vec<f64> = a.to_vec();
    let mut sb: Vec<f64> = b.to_vec();
    sa.sort_by(|x, y| x.total_cmp(y));
    sb.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (sa.len(), sb.len());
    let mut ia = 0usize;
    let mut ib = 0usize;
    let mut d: f64 = 0.0;
    while ia < na && ib < nb {
        let va = sa[ia];
        let vb = sb[ib];
        let v = va.min(vb);
        while ia < na && sa[ia] <= v {
            ia += 1;
        }
        while ib < nb && sb[ib] <= v {
            ib += 1;
        }
        d = d.max((ia as f64 / na as f64 - ib as f64 / nb as f64).abs());
    }
    let en = ((na as f64 * nb as f64) / (na as f64 + nb as f64)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    Ok(KsResult {
        statistic: d,
        p_value: ks_q(lambda),
        n_a: na,
        n_b: nb,
    })
}

fn ks_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = sign * (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += term;
        sign = -sign;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Ordinary least squares y = slope·x + intercept with the slope's
/// standard error.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(CoreError::InsufficientData {
            needed: 2,
            have: x.len().min(y.len()),
        });
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for (a, b) in x.iter().zip(y) {
        let r = b - (slope * a + intercept);
        sse += r * r;
    }
    let dof = (m - 2.0).max(1.0);
    let slope_se = (sse / dof / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_se,
    })
}

/// Self-normalized importance-sampling estimate of E_π[O] from prior
/// draws with weights ∝ dπ/dprior, with a delta-method standard error.
pub fn self_normalized_mean(values: &[f64], weights: &[f64]) -> (f64, f64) {
    assert_eq!(values.len(), weights.len());
    let wsum: f64 = weights.iter().sum();
    let est = values
        .iter()
        .zip(weights)
        .map(|(v, w)| v * w)
        .sum::<f64>()
        / wsum;
    let mut var = 0.0;
    for (v, w) in values.iter().zip(weights) {
        let d = w * (v - est);
        var += d * d;
    }
    (est, var.sqrt() / wsum)
}
