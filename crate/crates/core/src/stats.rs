//! Ordinary least squares helpers shared by the rate probe and the
//! convergence harness.

/// OLS line fit y ≈ a + b·x. Returns (slope, intercept, slope standard
/// error); the standard error is 0 when only two points are given.
pub fn ols_line(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| {
                let r = b - (intercept + slope * a);
                r * r
            })
            .sum();
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some((slope, intercept, stderr))
}

/// Slope of ln(y) against ln(x), skipping nonpositive samples. `None`
/// when fewer than two usable samples remain.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|&(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    ols_line(&xs, &ys).map(|(slope, _, _)| slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_recovered() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let (slope, intercept, stderr) = ols_line(&x, &y).unwrap();
        assert_relative_eq!(slope, -2.0, epsilon = 1e-14);
        assert_relative_eq!(intercept, 3.0, epsilon = 1e-13);
        assert!(stderr < 1e-13);
    }

    #[test]
    fn log_slope_of_power_law() {
        let x = [0.1f64, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v| v.powf(1.5)).collect();
        assert_relative_eq!(log_log_slope(&x, &y).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(ols_line(&[1.0], &[2.0]).is_none());
        assert!(log_log_slope(&[0.1, 0.2], &[0.0, -1.0]).is_none());
    }
}
