//! Two-sample Kolmogorov-Smirnov test, paired Student t-test, and
//! percent-error summary statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::student_t_cdf;

/// Result of a two-sample KS test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsOutcome {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// D is computed exactly by sweeping the merged sorted samples and reading
/// the ECDF gap after all values tied at each point have been consumed. The
/// p-value uses the asymptotic Kolmogorov distribution
/// Q(lambda) = 2 * sum_j (-1)^(j-1) exp(-2 j^2 lambda^2)
/// with the Stephens small-sample correction
/// lambda = D * (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)), ne = n1*n2/(n1+n2).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);

    let n = xs.len();
    let m = ys.len();
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] == v {
            i += 1;
        }
        while j < m && ys[j] == v {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if gap > d {
            d = gap;
        }
    }
    // Once one sample is exhausted its ECDF is 1 and the gap only shrinks.

    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let lambda = d * (ne.sqrt() + 0.12 + 0.11 / ne.sqrt());
    Ok(KsOutcome {
        d_statistic: d,
        p_value: kolmogorov_q(lambda),
        n1: n,
        n2: m,
    })
}

/// Survival function of the Kolmogorov distribution, truncated when a term
/// drops below 1e-10.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-12 {
        return 1.0;
    }
    let neg2l2 = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = 2.0 * (neg2l2 * jf * jf).exp();
        if j % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term < 1e-10 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Result of a paired t-test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TtestOutcome {
    pub t_statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub df: usize,
    pub mean_diff: f64,
}

impl TtestOutcome {
    /// One-sided p-value for the alternative mean(a - b) > 0.
    pub fn p_one_sided(&self) -> f64 {
        if self.t_statistic.is_infinite() {
            return if self.t_statistic > 0.0 { 0.0 } else { 1.0 };
        }
        1.0 - student_t_cdf(self.t_statistic, self.df)
    }
}

/// Paired Student t-test on matched samples. Differences d = a - b; the
/// statistic uses the sample standard deviation (divisor n-1) and the
/// two-sided p comes from the Student-t CDF.
///
/// Degenerate conventions: all differences equal and nonzero gives p = 0
/// (infinite t); all differences exactly zero gives t = 0, p = 1.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TtestOutcome> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let ss = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    let df = n - 1;
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            TtestOutcome {
                t_statistic: 0.0,
                p_value: 1.0,
                df,
                mean_diff: 0.0,
            }
        } else {
            TtestOutcome {
                t_statistic: f64::INFINITY.copysign(mean),
                p_value: 0.0,
                df,
                mean_diff: mean,
            }
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    let p = (2.0 * (1.0 - student_t_cdf(t.abs(), df))).clamp(0.0, 1.0);
    Ok(TtestOutcome {
        t_statistic: t,
        p_value: p,
        df,
        mean_diff: mean,
    })
}

/// Mean, median, and sample standard deviation (divisor n-1) of a
/// percent-error vector. A single observation has zero spread.
pub fn percent_error_stats(pe: &[f64]) -> Result<(f64, f64, f64)> {
    if pe.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = pe.len();
    let mean = pe.iter().sum::<f64>() / n as f64;
    let med = crate::preprocess::median(pe);
    let std = if n < 2 {
        0.0
    } else {
        let ss = pe.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        (ss / (n as f64 - 1.0)).sqrt()
    };
    Ok((mean, med, std))
}
