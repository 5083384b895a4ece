//! Least-squares line fits used for rate estimation.

/// Result of an ordinary least-squares line fit.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit `y = slope * x + intercept`. Needs at least two distinct x values.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len(), "fit inputs must have equal length");
    assert!(xs.len() >= 2, "fit needs at least two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    assert!(sxx > 0.0, "fit needs at least two distinct x values");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // R^2 = explained / total; a constant y gives a perfect horizontal fit.
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LinearFit { slope, intercept, r_squared }
}

/// Fit `log y = slope * log x + c`. Asserts positivity; filtering is the
/// caller's job.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let lx: Vec<f64> = xs.iter().map(|&x| { assert!(x > 0.0); x.ln() }).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| { assert!(y > 0.0); y.ln() }).collect();
    linear_fit(&lx, &ly)
}

/// Fit `log y = slope * x + c` (exponential rate in x).
pub fn semilog_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let ly: Vec<f64> = ys.iter().map(|&y| { assert!(y > 0.0); y.ln() }).collect();
    linear_fit(xs, &ly)
}
