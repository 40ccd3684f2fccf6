//! Ridge regression: closed-form L2-regularized least squares on centered
//! data, with an unpenalized intercept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_spd;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
}

/// Solves (Xc' Xc + alpha I) w = Xc' yc on column-centered X and centered y;
/// the intercept is mean(y) - w . mean(X). At alpha = 0 this is ordinary
/// least squares and fails with `SingularSystem` when X'X is singular.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], alpha: f64) -> Result<RidgeModel> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "ridge alpha must be >= 0, got {alpha}"
        )));
    }
    let n = y.len();
    for col in x {
        if col.len() != n {
            return Err(Error::LengthMismatch {
                left: col.len(),
                right: n,
            });
        }
    }
    let f = x.len();
    let x_means: Vec<f64> = x.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let mut gram = vec![vec![0.0; f]; f];
    let mut rhs = vec![0.0; f];
    for i in 0..f {
        for j in i..f {
            let mut s = 0.0;
            for r in 0..n {
                s += (x[i][r] - x_means[i]) * (x[j][r] - x_means[j]);
            }
            gram[i][j] = s;
            gram[j][i] = s;
        }
        gram[i][i] += alpha;
        rhs[i] = x[i]
            .iter()
            .zip(y)
            .map(|(&xv, &yv)| (xv - x_means[i]) * (yv - y_mean))
            .sum();
    }

    let weights = solve_spd(&gram, &rhs).ok_or(Error::SingularSystem)?;
    let intercept = y_mean
        - weights
            .iter()
            .zip(&x_means)
            .map(|(w, m)| w * m)
            .sum::<f64>();
    Ok(RidgeModel {
        weights,
        intercept,
        alpha,
    })
}

impl RidgeModel {
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        let n = x.first().map_or(0, Vec::len);
        let mut out = vec![self.intercept; n];
        for (w, col) in self.weights.iter().zip(x) {
            for (o, &v) in out.iter_mut().zip(col) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_exact_linear_data() {
        let x = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = vec![1.0, 3.0, 5.0, 7.0];
        let m = fit_ridge(&x, &y, 0.0).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-9);
        assert!((m.intercept - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infinite_regularization_shrinks_to_mean() {
        let x = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = vec![1.0, 3.0, 5.0, 7.0];
        let m = fit_ridge(&x, &y, 1e12).unwrap();
        assert!(m.weights[0].abs() < 1e-9);
        assert!((m.intercept - 4.0).abs() < 1e-6);
    }

    #[test]
    fn hand_solved_one_dimensional_case() {
        // Centered: Sxx = 2, Sxy = 2; w = 2/(2+1) = 2/3; b = 2 - (2/3)*2.
        let x = vec![vec![1.0, 2.0, 3.0]];
        let y = vec![1.0, 2.0, 3.0];
        let m = fit_ridge(&x, &y, 1.0).unwrap();
        assert!((m.weights[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.intercept - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn matches_ols_at_zero_alpha() {
        // y = 2 + 3a - b with two well-conditioned features.
        let a = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let b = vec![1.0, -1.0, 2.0, 0.0, 1.5, -0.5];
        let y: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(&av, &bv)| 2.0 + 3.0 * av - bv)
            .collect();
        let m = fit_ridge(&[a, b], &y, 0.0).unwrap();
        assert!((m.weights[0] - 3.0).abs() < 1e-8);
        assert!((m.weights[1] + 1.0).abs() < 1e-8);
        assert!((m.intercept - 2.0).abs() < 1e-8);
    }

    #[test]
    fn singular_without_regularization() {
        // Duplicated column makes X'X singular at alpha = 0.
        let col = vec![1.0, 2.0, 3.0, 4.0];
        let y = vec![1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            fit_ridge(&[col.clone(), col.clone()], &y, 0.0).unwrap_err(),
            Error::SingularSystem
        ));
        // Any positive alpha regularizes it.
        assert!(fit_ridge(&[col.clone(), col], &y, 1e-6).is_ok());
    }

    #[test]
    fn zero_weights_predict_intercept() {
        let m = RidgeModel {
            weights: vec![0.0, 0.0],
            intercept: 7.0,
            alpha: 1.0,
        };
        let x = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(m.predict(&x).unwrap(), vec![7.0, 7.0]);
    }
}
