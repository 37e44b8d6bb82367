use serde::Serialize;

use super::engine::{atomic_engine, candidate_engine};
use super::family::{CandidateSummary, NuFamily};
use super::params::CandidateParams;
use crate::error::{invalid, Result};
use crate::rng::{RngStream, StreamRng};
use crate::star_measures::EmpiricalMeasure;

/// Number of points in the archived gap profile.
pub const PROFILE_POINTS: usize = 512;
const CDF_TOLERANCE: f64 = 1e-12;

/// Result of comparing the law of `W` with the candidate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    pub params: CandidateParams,
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    /// Margin tested is `c_target / scale`.
    pub c_target: f64,
    pub scale: f64,
    pub summary: Option<CandidateSummary>,
    pub grid: Vec<f64>,
    pub target_cdf: Vec<f64>,
    pub w_cdf: Vec<f64>,
    /// `target_cdf - w_cdf` on the grid, `null` where the comparison is exempt.
    pub gap: Vec<Option<f64>>,
    /// Smallest gap over every non-exempt support point, `null` if none.
    pub worst_gap: Option<f64>,
    pub holds: bool,
    /// Largest `c` with dominance by `c / scale`; 0 if none or vacuous.
    pub max_c: f64,
}

/// Gap statistics of `w` against a target CDF. Points checked: every atom of
/// `w` plus `target_points`; the target must be continuous elsewhere, which
/// makes the check exact.
pub struct Comparison {
    pub worst_gap: Option<f64>,
    pub holds: bool,
    pub max_c: f64,
}

pub fn compare(
    target_cdf: &dyn Fn(f64) -> f64,
    target_points: &[f64],
    w: &EmpiricalMeasure,
    c_target: f64,
    scale: f64,
) -> Comparison {
    let mass = w.mass();
    let mut pts: Vec<f64> = w.points().iter().chain(target_points).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut worst: Option<f64> = None;
    for &x in &pts {
        let f = target_cdf(x);
        let g = w.cdf(x) / mass;
        if f >= 1.0 - CDF_TOLERANCE || g <= CDF_TOLERANCE {
            continue;
        }
        let gap = f - g;
        worst = Some(worst.map_or(gap, |v: f64| v.min(gap)));
    }
    let margin = c_target / scale;
    let holds = match worst {
        None => true,
        Some(g) => g >= margin - CDF_TOLERANCE,
    };
    let max_c = worst.map_or(0.0, |g| (g * scale).max(0.0));
    Comparison { worst_gap: worst, holds, max_c }
}

/// Attach a profile on `grid` to a comparison.
#[allow(clippy::too_many_arguments)]
pub fn assemble_report(
    params: CandidateParams,
    seed: u64,
    k: usize,
    summary: Option<CandidateSummary>,
    target_cdf: &dyn Fn(f64) -> f64,
    target_points: &[f64],
    w: &EmpiricalMeasure,
    c_target: f64,
    scale: f64,
    grid: Vec<f64>,
) -> DominanceReport {
    let cmp = compare(target_cdf, target_points, w, c_target, scale);
    let mass = w.mass();
    let tc: Vec<f64> = grid.iter().map(|&x| target_cdf(x)).collect();
    let wc: Vec<f64> = grid.iter().map(|&x| w.cdf(x) / mass).collect();
    let gap = tc
        .iter()
        .zip(&wc)
        .map(|(&f, &g)| if f >= 1.0 - CDF_TOLERANCE || g <= CDF_TOLERANCE { None } else { Some(f - g) })
        .collect();
    DominanceReport {
        params,
        seed,
        k,
        n: mass.round() as usize,
        c_target,
        scale,
        summary,
        grid,
        target_cdf: tc,
        w_cdf: wc,
        gap,
        worst_gap: cmp.worst_gap,
        holds: cmp.holds,
        max_c: cmp.max_c,
    }
}

fn profile_grid(hi: f64) -> Vec<f64> {
    (0..PROFILE_POINTS).map(|i| hi * i as f64 / (PROFILE_POINTS - 1) as f64).collect()
}

fn counts_measure(ws: Vec<f64>) -> Result<EmpiricalMeasure> {
    // Keep raw counts as weights so the mass equals the sample size.
    let n = ws.len() as f64;
    EmpiricalMeasure::from_samples(ws)?.scaled(n)
}

/// Draw `n` samples of `W` with the candidate as the population law and test
/// dominance of the candidate by `c_target / log k`.
pub fn verify_dominance(family: &NuFamily, n: usize, c_target: f64, seed: u64) -> Result<DominanceReport> {
    if n == 0 {
        return invalid("dominance check needs at least one sample");
    }
    let p = *family.params();
    let k = family.colours();
    let rt = |r: &mut StreamRng| family.sample_root_tail(r);
    let ot = |r: &mut StreamRng| family.sample_other_tail(r);
    let engine = candidate_engine(family, p.scaled_degree(k), &rt, &ot);
    let ws = engine.sample_many(n, RngStream::new(seed).labelled("dominance"));
    let w = counts_measure(ws)?;
    let atoms = [0.0, family.alpha(), p.big_m, family.a_k()];
    let cdf = |y: f64| family.cdf(y);
    Ok(assemble_report(
        p,
        seed,
        k,
        Some(family.summary()),
        &cdf,
        &atoms,
        &w,
        c_target,
        family.log_k(),
        profile_grid(family.a_k() * 1.05),
    ))
}

/// The same check with the candidate replaced by a point mass at 0.
pub fn verify_dominance_point_mass(params: &CandidateParams, k: usize, n: usize, seed: u64) -> Result<DominanceReport> {
    if n == 0 {
        return invalid("dominance check needs at least one sample");
    }
    params.validate()?;
    let engine = atomic_engine(k, params.scaled_degree(k), &[(0.0, 1.0)]);
    let w = counts_measure(engine.sample_many(n, RngStream::new(seed).labelled("dominance")))?;
    let cdf = |y: f64| if y >= 0.0 { 1.0 } else { 0.0 };
    Ok(assemble_report(*params, seed, k, None, &cdf, &[0.0], &w, 0.0, (k as f64).ln(), profile_grid(1.0)))
}
