use super::empirical::EmpiricalMeasure;

const CDF_TOLERANCE: f64 = 1e-12;

fn merged_support(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Vec<f64> {
    let mut pts: Vec<f64> = a.points().iter().chain(b.points()).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Whether `mu` is stochastically dominated by `nu`, i.e. its CDF lies
/// above that of `nu` everywhere. Both are compared after normalisation.
pub fn dominated(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> bool {
    let (mm, nm) = (mu.mass(), nu.mass());
    merged_support(mu, nu)
        .into_iter()
        .all(|x| mu.cdf(x) / mm >= nu.cdf(x) / nm - CDF_TOLERANCE)
}

/// Dominance with margin `eps`: at every point either `mu`'s CDF is
/// already 1, `nu`'s CDF is still 0, or `mu`'s CDF exceeds `nu`'s by `eps`.
pub fn dominated_with_margin(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, eps: f64) -> bool {
    let (mm, nm) = (mu.mass(), nu.mass());
    merged_support(mu, nu).into_iter().all(|x| {
        let f = mu.cdf(x) / mm;
        let g = nu.cdf(x) / nm;
        f >= 1.0 - CDF_TOLERANCE || g <= CDF_TOLERANCE || f - eps >= g - CDF_TOLERANCE
    })
}

/// Kolmogorov–Smirnov distance between two normalised discrete measures.
pub fn ks_distance(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let (am, bm) = (a.mass(), b.mass());
    merged_support(a, b)
        .into_iter()
        .map(|x| (a.cdf(x) / am - b.cdf(x) / bm).abs())
        .fold(0.0, f64::max)
}
