//! Freezing thresholds and the reference curves around them.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, ReconError, Result};
use crate::numerics::golden_min;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeModel {
    Poisson,
    Dary,
}

impl fmt::Display for TreeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Poisson => "poisson",
            Self::Dary => "d-ary",
        })
    }
}

/// `(1 - e^{-x})^k`, evaluated in log space.
fn all_colours_hit(k: f64, x: f64) -> f64 {
    (k * (-(-x).exp()).ln_1p()).exp()
}

/// Quantity whose infimum over `x > 0` is the freezing threshold.
///
/// The d-ary form divides by the absolute value of a negative logarithm;
/// the sign convention is inferred so that the threshold is positive.
pub fn objective(model: TreeModel, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let h = all_colours_hit(kf, x);
    match model {
        TreeModel::Poisson => (kf - 1.0) * x / h,
        TreeModel::Dary => x / (-h / (kf - 1.0)).ln_1p().abs(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub k: usize,
    pub model: TreeModel,
    pub d_f: f64,
    pub x_star: f64,
    pub asymptotic: f64,
}

/// Minimise the objective: log-spaced scan over `[1e-3, 10 log k]`, then
/// golden section around the best grid point. The result must also beat
/// the objective at `x* (1 +- 1e-4)`.
pub fn freezing_threshold(k: usize, model: TreeModel) -> Result<ThresholdReport> {
    if k < 3 {
        return invalid(format!("k = {k} < 3"));
    }
    let f = |x: f64| objective(model, k, x);
    let (lo, hi) = (1e-3f64, 10.0 * (k as f64).ln());
    let n = 2000;
    let grid: Vec<f64> = (0..=n).map(|i| lo * (hi / lo).powf(i as f64 / n as f64)).collect();
    let best = (0..=n)
        .min_by(|&a, &b| f(grid[a]).total_cmp(&f(grid[b])))
        .expect("non-empty grid");
    if best == 0 || best == n {
        return Err(ReconError::Numerical(format!("minimum of the {model} objective not bracketed for k = {k}")));
    }
    let (a, b) = (grid[best - 1], grid[best + 1]);
    let x_star = golden_min(f, a, b, 1e-10 * b);
    let d_f = f(x_star);
    if !(d_f <= f(x_star * (1.0 + 1e-4)) && d_f <= f(x_star * (1.0 - 1e-4))) {
        return Err(ReconError::Numerical(format!("minimiser certificate failed at x = {x_star}")));
    }
    Ok(ThresholdReport { k, model, d_f, x_star, asymptotic: regime_bounds(k, 1.0).freezing_asymptotic })
}

/// Reference curves with the vanishing corrections dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeBounds {
    pub non_reconstruction: f64,
    pub freezing_asymptotic: f64,
    pub main_theorem_form: f64,
}

pub fn regime_bounds(k: usize, beta: f64) -> RegimeBounds {
    let kf = k as f64;
    let l = kf.ln();
    let base = l + l.ln();
    RegimeBounds {
        non_reconstruction: kf * (base + 1.0 - std::f64::consts::LN_2),
        freezing_asymptotic: kf * (base + 1.0),
        main_theorem_form: kf * (base + beta),
    }
}

/// CSV sweep over `ks` for both tree models.
pub fn write_sweep<W: Write>(ks: &[usize], beta: f64, mut w: W) -> Result<()> {
    writeln!(w, "k,model,d_f,x_star,freezing_asymptotic,non_reconstruction,main_theorem_form")?;
    for &k in ks {
        let b = regime_bounds(k, beta);
        for model in [TreeModel::Poisson, TreeModel::Dary] {
            let r = freezing_threshold(k, model)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                k, model, r.d_f, r.x_star, b.freezing_asymptotic, b.non_reconstruction, b.main_theorem_form
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_minima() {
        // Independent high-precision minimisation.
        let cases = [
            (1_000, TreeModel::Poisson, 9.118_129_644_833_788, 10_164.790_134_702_317),
            (1_000, TreeModel::Dary, 9.118_633_636_694_419, 10_160.230_261_946_378),
            (1_000_000, TreeModel::Poisson, 16.626_508_965_366_29, 17_657_175.812_042_46),
            (1_000_000, TreeModel::Dary, 16.626_509_466_310_27, 17_657_167.498_786_545),
        ];
        for (k, m, x, d) in cases {
            let r = freezing_threshold(k, m).unwrap();
            assert!(rel(r.d_f, d) < 1e-12, "{k} {m}: {}", r.d_f);
            assert!(rel(r.x_star, x) < 1e-6, "{k} {m}: {}", r.x_star);
        }
    }

    #[test]
    fn poisson_threshold_near_asymptotic_form() {
        let r = freezing_threshold(1_000_000, TreeModel::Poisson).unwrap();
        assert!(rel(r.d_f, r.asymptotic) < 0.02);
    }

    #[test]
    fn ratio_approaches_one() {
        let ratios: Vec<f64> = [1_000usize, 10_000, 100_000, 1_000_000, 10_000_000]
            .iter()
            .map(|&k| {
                let r = freezing_threshold(k, TreeModel::Poisson).unwrap();
                (r.d_f / r.asymptotic - 1.0).abs()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    }

    #[test]
    fn infimum_is_below_any_evaluation() {
        for &k in &[10usize, 1000, 10_000] {
            let r = freezing_threshold(k, TreeModel::Poisson).unwrap();
            let l = (k as f64).ln();
            assert!(r.d_f <= objective(TreeModel::Poisson, k, l + l.ln()));
            let hi = 10.0 * l;
            for i in 1..=1000 {
                assert!(r.d_f <= objective(TreeModel::Poisson, k, hi * i as f64 / 1000.0) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn bounds_at_k_100() {
        let b = regime_bounds(100, 0.99);
        assert!(rel(b.non_reconstruction, 643.920_263_123_604_7) < 1e-10);
        assert!(rel(b.freezing_asymptotic, 713.234_981_179_599_2) < 1e-10);
        assert!(rel(b.main_theorem_form, 712.234_981_179_599_2) < 1e-10);
        assert_eq!(regime_bounds(100, 1.0).main_theorem_form, b.freezing_asymptotic);
    }

    #[test]
    fn gap_is_k_log_2() {
        for &k in &[3usize, 100, 1_000_000] {
            let b = regime_bounds(k, 1.0);
            assert!(rel(b.freezing_asymptotic - b.non_reconstruction, k as f64 * std::f64::consts::LN_2) < 1e-12);
        }
    }

    #[test]
    fn sweep_csv_shape() {
        let mut buf = Vec::new();
        write_sweep(&[10, 100], 0.99, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().nth(1).unwrap().starts_with("10,poisson,"));
    }
}
