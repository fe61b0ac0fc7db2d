//! Shared scalar helpers: log-factorials and Poisson tail masses.
//!
//! Factorial-bearing coefficients are handled in log space everywhere in this
//! crate; n! itself overflows f64 near n = 171 while the coefficients it
//! appears in stay tame.

/// Cumulative table of ln(n!) for n = 0..=n_max.
pub(crate) fn ln_factorial_table(n_max: usize) -> Vec<f64> {
    let mut table = vec![0.0; n_max + 1];
    for k in 1..=n_max {
        table[k] = table[k - 1] + (k as f64).ln();
    }
    table
}

/// Poisson(lambda) probability mass strictly above `n_max`.
///
/// Summed upward from n_max + 1 so small tails are not lost to cancellation
/// against 1. For `lambda = 0` the tail is exactly zero.
pub(crate) fn poisson_tail(lambda: f64, n_max: usize) -> f64 {
    assert!(lambda >= 0.0 && lambda.is_finite());
    if lambda == 0.0 {
        return 0.0;
    }
    let start = n_max + 1;
    let ln_lambda = lambda.ln();
    // ln pmf(start), built from the cumulative log-factorial
    let mut ln_fact = 0.0;
    for k in 1..=start {
        ln_fact += (k as f64).ln();
    }
    let mut term = (-lambda + start as f64 * ln_lambda - ln_fact).exp();
    let mut sum = term;
    let mut k = start;
    loop {
        k += 1;
        term *= lambda / k as f64;
        sum += term;
        if term < sum * 1e-18 || term < 1e-320 {
            break;
        }
    }
    sum
}
