//! Order-insensitive estimators used by the Monte Carlo drivers.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

pub fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Bernoulli standard error `sqrt(p(1 − p)/n)`.
pub fn bernoulli_std_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Delete-one jackknife standard error of the sample mean.
pub fn jackknife_std_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let total = compensated_sum(values.iter().copied());
    let nf = n as f64;
    let leave_one_out: Vec<f64> = values.iter().map(|&x| (total - x) / (nf - 1.0)).collect();
    let center = mean(&leave_one_out);
    let spread = compensated_sum(leave_one_out.iter().map(|&m| (m - center).powi(2)));
    ((nf - 1.0) / nf * spread).sqrt()
}
