//! One driver per subcommand. Each returns its report text plus the checks
//! that `--check` turns into the exit status.

use std::fmt::Write as _;
use std::path::Path;

use broadcast_recon::alice_bob::{
    equivariance_check, find_dominated, root_top_values, run_alice, sample_instance, BobArray, Reductions,
    RootExperiment,
};
use broadcast_recon::belief_recursion::{brute_force_posterior, exact_posterior};
use broadcast_recon::candidate_measure::{build_candidate, stable_law_test, verify_dominance, StableLawReport};
use broadcast_recon::par::try_map_indexed;
use broadcast_recon::population_dynamics::{gamma_full_step, iterate, reduced_step_sample_with, EmpiricalSource};
use broadcast_recon::rng::RngStream;
use broadcast_recon::star_measures::{ks_distance, lambda_project, EmpiricalMeasure, StarMeasure};
use broadcast_recon::thresholds::{freezing_threshold, regime_bounds, write_sweep, TreeModel};
use broadcast_recon::tree_model::{broadcast_colouring, sample_tree, OffspringLaw};
use broadcast_recon::ReconError;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// A named pass/fail outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

/// Report text and checks of one run, plus any side files.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub report: String,
    pub checks: Vec<Check>,
    pub side_files: Vec<(std::path::PathBuf, String)>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    report: T,
    checks: &'a [Check],
}

fn json_report<T: Serialize>(cfg: &RunConfig, report: T, checks: Vec<Check>) -> Result<Outcome, CliError> {
    let mut s = serde_json::to_string_pretty(&Envelope { config: cfg, report, checks: &checks })
        .map_err(|e| CliError::Run(e.into()))?;
    s.push('\n');
    Ok(Outcome { report: s, checks, side_files: Vec::new() })
}

/// `# config {...}` line heading every CSV report.
pub fn config_line(cfg: &RunConfig) -> String {
    format!("# config {}\n", serde_json::to_string(cfg).expect("config serialises"))
}

fn csv_checks(checks: &[Check]) -> String {
    checks.iter().map(|c| format!("# check {} {} {}\n", c.name, if c.passed { "pass" } else { "fail" }, c.detail)).collect()
}

pub fn thresholds(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut body = Vec::new();
    write_sweep(&cfg.ks, cfg.params.beta, &mut body)?;
    let mut ratios = Vec::new();
    for &k in &cfg.ks {
        let r = freezing_threshold(k, TreeModel::Poisson)?;
        ratios.push(r.d_f / regime_bounds(k, 1.0).freezing_asymptotic);
    }
    let last = *ratios.last().expect("non-empty ks");
    let towards_one = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    let checks = vec![
        Check::new("largest_k_within_2pct", (last - 1.0).abs() <= 0.02, format!("ratio={last}")),
        Check::new("ratio_moves_towards_one", towards_one, format!("ratios={ratios:?}")),
    ];
    let mut s = config_line(cfg);
    s.push_str(&csv_checks(&checks));
    s.push_str(std::str::from_utf8(&body).expect("utf8 csv"));
    Ok(Outcome { report: s, checks, side_files: Vec::new() })
}

/// `k` equally weighted values spread over `[1/k, 1]`.
fn grid_measure(k: usize) -> Result<StarMeasure, ReconError> {
    let lo = 1.0 / k as f64;
    let xs = (0..8).map(|i| lo + (1.0 - lo) * (i as f64 + 0.5) / 8.0).collect();
    StarMeasure::from_samples(k, xs)
}

fn initial_measure(cfg: &RunConfig) -> Result<StarMeasure, CliError> {
    Ok(match cfg.init.as_str() {
        "frozen" => StarMeasure::frozen(cfg.k),
        "uniform" => StarMeasure::uniform(cfg.k),
        "grid" => grid_measure(cfg.k)?,
        path => {
            let file = std::fs::File::open(Path::new(path))
                .map_err(|e| CliError::Config(format!("--init {path}: {e}")))?;
            let (m, k) = EmpiricalMeasure::read_csv(std::io::BufReader::new(file))?;
            if let Some(k) = k {
                if k != cfg.k {
                    return Err(CliError::Config(format!("--init {path} was written for k = {k}, not {}", cfg.k)));
                }
            }
            StarMeasure::new(cfg.k, m)?
        }
    })
}

pub fn population(cfg: &RunConfig, measure_out: Option<&Path>) -> Result<Outcome, CliError> {
    let pop0 = initial_measure(cfg)?;
    let traj = iterate(&pop0, &cfg.offspring, cfg.gens, cfg.pop, RngStream::new(cfg.seed).labelled("population"))?;
    let finite = traj.generations.iter().all(|g| {
        g.mean.is_finite() && g.gap.is_finite() && (0.0..=1.0).contains(&g.p_frozen) && g.quantiles.iter().all(|q| q.is_finite())
    });
    let checks = vec![Check::new("finite_statistics", finite, format!("generations={}", traj.generations.len()))];
    let mut body = Vec::new();
    traj.write_csv(&mut body)?;
    let mut s = config_line(cfg);
    s.push_str(&csv_checks(&checks));
    s.push_str(std::str::from_utf8(&body).expect("utf8 csv"));
    let mut side_files = Vec::new();
    if let Some(p) = measure_out {
        let mut m = Vec::new();
        traj.last.values().write_csv(&mut m, Some(cfg.k))?;
        side_files.push((p.to_path_buf(), config_line(cfg) + std::str::from_utf8(&m).expect("utf8 csv")));
    }
    Ok(Outcome { report: s, checks, side_files })
}

/// Values closer than this are the same number computed by two routes.
fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Serialize)]
struct FullVsReduced {
    n: usize,
    ks: f64,
    tolerance: f64,
    top_at_root_full: f64,
    top_at_root_reduced: f64,
}

pub fn full_vs_reduced(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let pop = initial_measure(cfg)?;
    let n = cfg.pop;
    let base = RngStream::new(cfg.seed);
    let full = try_map_indexed(n, |i| {
        let mut rng = base.labelled("full").substream(i as u64).rng();
        let v = gamma_full_step(&pop, &cfg.offspring, 0, &mut rng)?;
        let s = lambda_project(&v.0, &mut rng);
        Ok::<_, ReconError>((snap(s.value), s.colour))
    })?;
    let src = EmpiricalSource::new(&pop)?;
    let red = reduced_step_sample_with(&src, &cfg.offspring, n, base.labelled("reduced"));
    let a = EmpiricalMeasure::from_samples(full.iter().map(|p| p.0).collect())?;
    let b = EmpiricalMeasure::from_samples(red.iter().map(|s| snap(s.value)).collect())?;
    let ks = ks_distance(&a, &b);
    let tolerance = 3.0 / (n as f64).sqrt();
    let r = FullVsReduced {
        n,
        ks,
        tolerance,
        top_at_root_full: full.iter().filter(|p| p.1 == 0).count() as f64 / n as f64,
        top_at_root_reduced: red.iter().filter(|s| s.colour == 0).count() as f64 / n as f64,
    };
    let checks = vec![Check::new("ks_within_3_over_sqrt_n", ks <= tolerance, format!("ks={ks} tolerance={tolerance}"))];
    json_report(cfg, r, checks)
}

#[derive(Serialize)]
struct BpOracle {
    instances: usize,
    max_deviation: f64,
    worst_instance: usize,
    mean_nodes: f64,
    max_nodes: usize,
    tolerance: f64,
}

const ORACLE_MAX_NODES: usize = 8;
const ORACLE_ATTEMPTS: u64 = 10_000;

pub fn bp_oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let base = RngStream::new(cfg.seed).labelled("bp-oracle");
    let rows = try_map_indexed(cfg.instances, |i| {
        let s = base.substream(i as u64);
        let k = cfg.ks[i % cfg.ks.len()];
        for a in 0..ORACLE_ATTEMPTS {
            let tree = match sample_tree(&cfg.offspring, cfg.depth, s.labelled("tree").substream(a), ORACLE_MAX_NODES) {
                Ok(t) => t,
                Err(ReconError::NodeCeiling(_)) => continue,
                Err(e) => return Err(CliError::Run(e)),
            };
            let colours = broadcast_colouring(&tree, k, None, s.labelled("colour"))?;
            let exact = exact_posterior(&tree, &colours, k)?;
            let brute = brute_force_posterior(&tree, &colours, k, ORACLE_MAX_NODES)?;
            return Ok((exact.max_abs_diff(&brute), tree.len()));
        }
        Err(CliError::Config(format!(
            "law {} rarely gives trees of at most {ORACLE_MAX_NODES} nodes; lower the mean or --depth",
            cfg.law
        )))
    })?;
    let (worst_instance, max_deviation) =
        rows.iter().enumerate().map(|(i, r)| (i, r.0)).fold((0, 0.0), |b, c| if c.1 > b.1 { c } else { b });
    let r = BpOracle {
        instances: rows.len(),
        max_deviation,
        worst_instance,
        mean_nodes: rows.iter().map(|r| r.1 as f64).sum::<f64>() / rows.len().max(1) as f64,
        max_nodes: rows.iter().map(|r| r.1).max().unwrap_or(0),
        tolerance: 1e-10,
    };
    let checks = vec![Check::new("max_deviation_1e-10", max_deviation <= 1e-10, format!("max_deviation={max_deviation}"))];
    json_report(cfg, r, checks)
}

#[derive(Serialize)]
struct StableLaw {
    rows: Vec<StableLawReport>,
    monotone: bool,
    last_ks: f64,
}

pub fn stable_law(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let base = RngStream::new(cfg.seed).labelled("stable-law");
    let mut rows = Vec::new();
    for &k in &cfg.ks {
        rows.push(stable_law_test(&cfg.params, k as u64, cfg.pop, base.substream(k as u64))?);
    }
    let monotone = rows.windows(2).all(|w| w[1].ks < w[0].ks);
    let last_ks = rows.last().map_or(f64::NAN, |r| r.ks);
    let checks = vec![
        Check::new("last_ks_at_most_0.05", last_ks <= 0.05, format!("ks={last_ks}")),
        Check::new("ks_decreasing_in_k", monotone, rows.iter().map(|r| format!("{}:{}", r.k, r.ks)).collect::<Vec<_>>().join(" ")),
    ];
    json_report(cfg, StableLaw { rows, monotone, last_ks }, checks)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let fam = build_candidate(&cfg.params, cfg.k)?;
    let r = verify_dominance(&fam, cfg.pop, cfg.c_target, cfg.seed)?;
    let checks = vec![Check::new(
        "dominance_holds",
        r.holds,
        format!("worst_gap={:?} max_c={}", r.worst_gap, r.max_c),
    )];
    json_report(cfg, r, checks)
}

#[derive(Serialize)]
struct DepthRow {
    depth: u32,
    runs: usize,
    ks: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct AliceBobReport {
    target_size: usize,
    target_mean: f64,
    target_frozen_fraction: f64,
    image_excess: f64,
    depths: Vec<DepthRow>,
    records: usize,
    record_depth: u32,
    equivariance_max_deviation: f64,
    bob_mismatches: usize,
}

/// Tree law, kept-children law and the law behind the reductions.
fn alice_laws(law: OffspringLaw) -> (OffspringLaw, Option<OffspringLaw>, OffspringLaw) {
    match law {
        OffspringLaw::TruncatedPoisson { cap, .. } => (OffspringLaw::Deterministic { arity: cap }, Some(law), law),
        other => (other, None, other),
    }
}

pub fn alice_bob(cfg: &RunConfig, board_out: Option<&Path>, tree_out: Option<&Path>) -> Result<Outcome, CliError> {
    let (tree_law, keep, red_law) = alice_laws(cfg.offspring);
    if matches!(tree_law, OffspringLaw::Deterministic { arity: 0 }) {
        return Err(CliError::Config("tpois cap must be positive".into()));
    }
    let base = RngStream::new(cfg.seed).labelled("alice-bob");
    let mu = find_dominated(cfg.k, &red_law, cfg.theta, cfg.gens, cfg.ndom, base.labelled("target"))?;
    let slack = 3.0 / (cfg.ndom as f64).sqrt();
    let red = Reductions::new(&mu, &red_law, cfg.ndom, slack, base.labelled("image"))?;
    let tolerance = 4.0 / (cfg.pop as f64).sqrt();
    let depths: Vec<u32> = if cfg.depth == 0 { vec![0] } else { (1..=cfg.depth).collect() };
    let mut rows = Vec::new();
    for &depth in &depths {
        let exp = RootExperiment { k: cfg.k, law: tree_law, keep, depth, runs: cfg.pop };
        let tops = root_top_values(&exp, &red, base.labelled("runs").substream(depth as u64))?;
        let ks = ks_distance(&EmpiricalMeasure::from_samples(tops)?, mu.values());
        rows.push(DepthRow { depth, runs: cfg.pop, ks, tolerance });
    }
    let rec_stream = base.labelled("records");
    let per_record = try_map_indexed(cfg.records, |r| {
        let s = rec_stream.substream(r as u64);
        let inst = sample_instance(cfg.k, &tree_law, cfg.depth, keep.as_ref(), s.labelled("instance"))?;
        let out = run_alice(&inst, &red, true)?;
        let board = out.record.expect("recorded").board;
        let json = board.to_json()?;
        let same = BobArray::from_json(&json)?.belief()? == out.belief;
        let dev = equivariance_check(&board, 1, &mut s.labelled("relabel").rng())?;
        let side = (r == 0).then(|| {
            let mut dump = Vec::new();
            inst.tree.dump(&inst.colours, &mut dump).map(|_| (json, String::from_utf8(dump).expect("utf8 dump")))
        });
        Ok::<_, ReconError>((dev, same, side.transpose()?))
    })?;
    let dev = per_record.iter().map(|r| r.0).fold(0.0, f64::max);
    let mismatches = per_record.iter().filter(|r| !r.1).count();
    let mut side_files = Vec::new();
    if let Some((json, dump)) = per_record.into_iter().next().and_then(|r| r.2) {
        if let Some(p) = board_out {
            side_files.push((p.to_path_buf(), json + "\n"));
        }
        if let Some(p) = tree_out {
            side_files.push((p.to_path_buf(), dump));
        }
    }
    let v = mu.values();
    let report = AliceBobReport {
        target_size: cfg.ndom,
        target_mean: v.mean(),
        target_frozen_fraction: (v.mass() - v.cdf_left(1.0)) / v.mass(),
        image_excess: red.excess(),
        depths: rows,
        records: cfg.records,
        record_depth: cfg.depth,
        equivariance_max_deviation: dev,
        bob_mismatches: mismatches,
    };
    let mut checks: Vec<Check> = report
        .depths
        .iter()
        .map(|r| Check::new(&format!("ks_depth_{}", r.depth), r.ks <= r.tolerance, format!("ks={} tolerance={}", r.ks, r.tolerance)))
        .collect();
    checks.push(Check::new("equivariance_1e-9", dev <= 1e-9, format!("max_deviation={dev}")));
    checks.push(Check::new("bob_bit_identical", mismatches == 0, format!("mismatches={mismatches}")));
    let mut o = json_report(cfg, report, checks)?;
    o.side_files = side_files;
    Ok(o)
}

/// Summary line for a finished run, used by the binary on standard error.
pub fn summary(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    s
}
