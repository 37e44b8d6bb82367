//! Goodness-of-fit statistics.

use statrs::function::gamma::gamma_ur;

/// One-sample Kolmogorov–Smirnov distance between the empirical law of
/// `sorted` and a CDF, which may have atoms.
pub fn ks_against_cdf(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        // Left limit taken one ulp down so atoms of `cdf` are handled.
        let f = cdf(x);
        let f_left = cdf(x.next_down());
        d = d.max((j as f64 / n - f).abs()).max((f_left - i as f64 / n).abs());
        i = j;
    }
    d
}

/// Asymptotic two-sided KS critical value at level `alpha` for effective
/// sample size `n`.
pub fn ks_critical(n: f64, alpha: f64) -> f64 {
    (-(0.5 * alpha).ln() / (2.0 * n)).sqrt()
}

/// Pearson chi-square test of uniformity over the cells of `counts`.
/// Returns the statistic and its upper-tail p-value.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let df = (counts.len() - 1) as f64;
    let p = if stat > 0.0 { gamma_ur(0.5 * df, 0.5 * stat) } else { 1.0 };
    (stat, p)
}
