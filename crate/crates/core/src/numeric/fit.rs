//! Small dense least-squares fits used by the limit estimators.

/// Solve `min ||A c - y||` where `A` is given column-wise, via modified
/// Gram-Schmidt QR. Returns `None` when the system is degenerate.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let k = columns.len();
    let m = y.len();
    if k == 0 || m < k || columns.iter().any(|c| c.len() != m) {
        return None;
    }
    let mut q: Vec<Vec<f64>> = columns.to_vec();
    let mut r = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..i {
            let dot: f64 = q[j].iter().zip(&q[i]).map(|(a, b)| a * b).sum();
            r[j][i] = dot;
            for t in 0..m {
                q[i][t] -= dot * q[j][t];
            }
        }
        let norm: f64 = q[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        r[i][i] = norm;
        for t in 0..m {
            q[i][t] /= norm;
        }
    }
    // c = R^{-1} Q^T y by back-substitution.
    let mut rhs: Vec<f64> = (0..k)
        .map(|i| q[i].iter().zip(y).map(|(a, b)| a * b).sum())
        .collect();
    for i in (0..k).rev() {
        for j in (i + 1)..k {
            rhs[i] -= r[i][j] * rhs[j];
        }
        rhs[i] /= r[i][i];
    }
    Some(rhs)
}

/// Coefficients of the tail model `y ~ slope * x + log_coeff * ln(x) + offset`.
#[derive(Clone, Copy, Debug)]
pub struct LogLinearFit {
    pub slope: f64,
    pub log_coeff: f64,
    pub offset: f64,
}

pub fn fit_linear_log(xs: &[f64], ys: &[f64]) -> Option<LogLinearFit> {
    if xs.len() < 3 || xs.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let cols = vec![
        xs.to_vec(),
        xs.iter().map(|&x| x.ln()).collect(),
        vec![1.0; xs.len()],
    ];
    let c = least_squares(&cols, ys)?;
    Some(LogLinearFit { slope: c[0], log_coeff: c[1], offset: c[2] })
}

/// Fit `y ~ limit + coeff / x`; returns `(limit, coeff)`.
pub fn fit_inverse(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 || xs.iter().any(|&x| x == 0.0) {
        return None;
    }
    let cols = vec![vec![1.0; xs.len()], xs.iter().map(|&x| 1.0 / x).collect()];
    let c = least_squares(&cols, ys)?;
    Some((c[0], c[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_log_model() {
        let xs: Vec<f64> = (4..14).map(|k| f64::powi(2.0, k)).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 2.5 * x + 0.75 * x.ln() - 1.25).collect();
        let fit = fit_linear_log(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.log_coeff - 0.75).abs() < 1e-9);
        assert!((fit.offset + 1.25).abs() < 1e-8);
    }

    #[test]
    fn recovers_inverse_model() {
        let xs: Vec<f64> = (1..40).map(|k| k as f64 * 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| -0.7 + 3.0 / x).collect();
        let (limit, coeff) = fit_inverse(&xs, &ys).unwrap();
        assert!((limit + 0.7).abs() < 1e-13);
        assert!((coeff - 3.0).abs() < 1e-11);
    }

    #[test]
    fn degenerate_inputs_return_none() {
        assert!(least_squares(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).is_none());
        assert!(fit_linear_log(&[1.0, 2.0], &[0.0, 1.0]).is_none());
    }
}
