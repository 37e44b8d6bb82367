//! Flags, the key=value config file, and per-subcommand defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use broadcast_recon::candidate_measure::CandidateParams;
use broadcast_recon::population_dynamics::MAX_FULL_K;
use broadcast_recon::tree_model::OffspringLaw;
use clap::{Args, Subcommand};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Freezing-threshold sweep over `ks` (CSV).
    Thresholds,
    /// Population dynamics trajectory (CSV).
    Population,
    /// KS distance between the full and the reduced one-step image (JSON).
    FullVsReduced,
    /// Exact recursion against brute-force enumeration on small trees (JSON).
    BpOracle,
    /// Normalised small-value sums against the stable limit (JSON).
    StableLaw,
    /// Dominance of the candidate by the law of its score (JSON).
    VerifyDominance,
    /// Root-belief law and equivariance of the manipulated recursion (JSON).
    AliceBob,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Thresholds => "thresholds",
            Self::Population => "population",
            Self::FullVsReduced => "full-vs-reduced",
            Self::BpOracle => "bp-oracle",
            Self::StableLaw => "stable-law",
            Self::VerifyDominance => "verify-dominance",
            Self::AliceBob => "alice-bob",
        }
    }

    pub const ALL: [Command; 7] = [
        Self::Thresholds,
        Self::Population,
        Self::FullVsReduced,
        Self::BpOracle,
        Self::StableLaw,
        Self::VerifyDominance,
        Self::AliceBob,
    ];
}

/// Offspring law as written on the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LawSpec(pub OffspringLaw);

impl FromStr for LawSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        OffspringLaw::from_str(s).map(Self).map_err(|e| format!("{e} (expected poisson:d, dary:d or tpois:d',d)"))
    }
}

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Comma-separated list of colour counts; `1e6` style entries are accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct KList(pub Vec<usize>);

impl FromStr for KList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| {
                let x = x.trim();
                x.parse::<usize>()
                    .ok()
                    .or_else(|| x.parse::<f64>().ok().filter(|v| v.fract() == 0.0 && *v >= 0.0).map(|v| v as usize))
                    .ok_or_else(|| format!("'{x}' is not a colour count"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(KList)
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    KList::from_str(s).and_then(|l| match l.0.as_slice() {
        [n] => Ok(*n),
        _ => Err(format!("'{s}' is not a single count")),
    })
}

/// Every setting, from flags or the config file. Unset means default.
#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// Flat key=value file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Number of colours.
    #[arg(long, global = true, value_parser = parse_count)]
    pub k: Option<usize>,
    /// Offspring law: poisson:d, dary:d or tpois:d',d.
    #[arg(long, global = true)]
    pub law: Option<LawSpec>,
    /// Tree depth
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Population size or number of samples / runs.
    #[arg(long, global = true, value_parser = parse_count)]
    pub pop: Option<usize>,
    /// Generations of population dynamics (iterations of the target builder for alice-bob).
    #[arg(long, global = true)]
    pub gens: Option<usize>,
    /// Master seed; the same config and seed give the same bytes
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; never changes the output.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Report path; standard output if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Growth rate of the candidate's tail density
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Weight of the candidate's atom at zero
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Offset of the candidate's mid atom below one half
    #[arg(long, global = true)]
    pub alpha0: Option<f64>,
    /// Lower end of the candidate's tail
    #[arg(long, global = true)]
    pub bigm: Option<f64>,
    /// Shift of the atomic part of the score sum
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Scale of the candidate's tail density
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Slack mass sent to minus infinity
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Mean degree offset: d = (k-1)(log k + log log k + beta)
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Colour counts for sweeps, comma separated.
    #[arg(long, global = true)]
    pub ks: Option<KList>,
    /// Weight of the iterated part of the alice-bob target.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Records checked for equivariance by alice-bob.
    #[arg(long, global = true)]
    pub records: Option<usize>,
    /// Random trees checked by bp-oracle.
    #[arg(long, global = true)]
    pub instances: Option<usize>,
    /// Starting population: frozen, uniform, grid, or a measure CSV path.
    #[arg(long, global = true)]
    pub init: Option<String>,
    /// Samples for the alice-bob target and its one-step image.
    #[arg(long, global = true, value_parser = parse_count)]
    pub ndom: Option<usize>,
    /// Dominance margin is c-target / log k.
    #[arg(long = "c-target", global = true)]
    pub c_target: Option<f64>,
    /// Exit nonzero when an assertion of the subcommand fails.
    #[arg(long, global = true)]
    pub check: bool,
    /// alice-bob: write one manipulated array as JSON here.
    #[arg(long = "board-out", global = true)]
    pub board_out: Option<PathBuf>,
    /// alice-bob: write the tree of that array as a dump here.
    #[arg(long = "tree-out", global = true)]
    pub tree_out: Option<PathBuf>,
    /// population: write the final population as a measure CSV here.
    #[arg(long = "measure-out", global = true)]
    pub measure_out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| CliError::Config(format!("config key '{key}': {e}")))
}

impl Flags {
    /// Read a config file: one `key = value` per line, `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_pairs(&map)
    }

    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut f = Self::default();
        for (key, v) in map {
            let v = v.as_str();
            match key.as_str() {
                "k" => f.k = Some(parse_count(v).map_err(CliError::Config)?),
                "law" => f.law = Some(parse_value(key, v)?),
                "depth" => f.depth = Some(parse_value(key, v)?),
                "pop" => f.pop = Some(parse_count(v).map_err(CliError::Config)?),
                "gens" => f.gens = Some(parse_value(key, v)?),
                "seed" => f.seed = Some(parse_value(key, v)?),
                "workers" => f.workers = Some(parse_value(key, v)?),
                "out" => f.out = Some(PathBuf::from(v)),
                "delta" => f.delta = Some(parse_value(key, v)?),
                "kappa" => f.kappa = Some(parse_value(key, v)?),
                "alpha0" => f.alpha0 = Some(parse_value(key, v)?),
                "bigm" => f.bigm = Some(parse_value(key, v)?),
                "sigma" => f.sigma = Some(parse_value(key, v)?),
                "gamma" => f.gamma = Some(parse_value(key, v)?),
                "eps" => f.eps = Some(parse_value(key, v)?),
                "beta" => f.beta = Some(parse_value(key, v)?),
                "ks" => f.ks = Some(parse_value(key, v)?),
                "theta" => f.theta = Some(parse_value(key, v)?),
                "records" => f.records = Some(parse_value(key, v)?),
                "instances" => f.instances = Some(parse_value(key, v)?),
                "init" => f.init = Some(v.to_string()),
                "ndom" => f.ndom = Some(parse_count(v).map_err(CliError::Config)?),
                "c-target" => f.c_target = Some(parse_value(key, v)?),
                "check" => f.check = parse_value(key, v)?,
                "board-out" => f.board_out = Some(PathBuf::from(v)),
                "tree-out" => f.tree_out = Some(PathBuf::from(v)),
                "measure-out" => f.measure_out = Some(PathBuf::from(v)),
                other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
            }
        }
        Ok(f)
    }

    /// `self` with every unset field taken from `file`.
    pub fn over(self, file: Self) -> Self {
        Self {
            config: self.config,
            k: self.k.or(file.k),
            law: self.law.or(file.law),
            depth: self.depth.or(file.depth),
            pop: self.pop.or(file.pop),
            gens: self.gens.or(file.gens),
            seed: self.seed.or(file.seed),
            workers: self.workers.or(file.workers),
            out: self.out.or(file.out),
            delta: self.delta.or(file.delta),
            kappa: self.kappa.or(file.kappa),
            alpha0: self.alpha0.or(file.alpha0),
            bigm: self.bigm.or(file.bigm),
            sigma: self.sigma.or(file.sigma),
            gamma: self.gamma.or(file.gamma),
            eps: self.eps.or(file.eps),
            beta: self.beta.or(file.beta),
            ks: self.ks.or(file.ks),
            theta: self.theta.or(file.theta),
            records: self.records.or(file.records),
            instances: self.instances.or(file.instances),
            init: self.init.or(file.init),
            ndom: self.ndom.or(file.ndom),
            c_target: self.c_target.or(file.c_target),
            check: self.check || file.check,
            board_out: self.board_out.or(file.board_out),
            tree_out: self.tree_out.or(file.tree_out),
            measure_out: self.measure_out.or(file.measure_out),
        }
    }

    /// Merge with the config file named by `--config`, if any.
    pub fn with_file(self) -> Result<Self, CliError> {
        match self.config.clone() {
            Some(p) => Ok(self.over(Self::from_file(&p)?)),
            None => Ok(self),
        }
    }
}

/// Fully resolved settings of one run. Everything here is echoed in the
/// report; worker count and output paths are left out because they never
/// change the numbers.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub seed: u64,
    pub k: usize,
    pub law: String,
    pub depth: u32,
    pub pop: usize,
    pub gens: usize,
    pub ks: Vec<usize>,
    pub theta: f64,
    pub records: usize,
    pub instances: usize,
    pub init: String,
    pub ndom: usize,
    pub c_target: f64,
    pub check: bool,
    pub params: CandidateParams,
    #[serde(skip)]
    pub offspring: OffspringLaw,
}

fn law(s: &str) -> OffspringLaw {
    LawSpec::from_str(s).expect("built-in law").0
}

impl RunConfig {
    pub fn resolve(cmd: Command, f: &Flags) -> Result<Self, CliError> {
        use Command::*;
        let d = CandidateParams::default();
        let params = CandidateParams {
            delta: f.delta.unwrap_or(d.delta),
            kappa: f.kappa.unwrap_or(d.kappa),
            alpha0: f.alpha0.unwrap_or(d.alpha0),
            big_m: f.bigm.unwrap_or(d.big_m),
            sigma: f.sigma.unwrap_or(d.sigma),
            gamma: f.gamma.unwrap_or(d.gamma),
            eps: f.eps.unwrap_or(d.eps),
            beta: f.beta.unwrap_or(d.beta),
        };
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let offspring = f.law.map(|l| l.0).unwrap_or_else(|| match cmd {
            FullVsReduced => law("poisson:6"),
            BpOracle => law("poisson:1.5"),
            _ => law("poisson:20"),
        });
        let k = f.k.unwrap_or(match cmd {
            FullVsReduced => 5,
            VerifyDominance => 10_000,
            _ => 3,
        });
        let pop = f.pop.unwrap_or(match cmd {
            Population => 10_000,
            FullVsReduced => 100_000,
            _ => 20_000,
        });
        let ks = f.ks.clone().map(|l| l.0).unwrap_or_else(|| match cmd {
            Thresholds => vec![1_000, 10_000, 100_000, 1_000_000, 10_000_000],
            StableLaw => vec![1_000, 10_000, 100_000, 1_000_000],
            BpOracle => vec![3, 4, 5],
            _ => Vec::new(),
        });
        let c = Self {
            command: cmd.name(),
            seed: f.seed.unwrap_or(1),
            k,
            law: LawSpec(offspring).to_string(),
            depth: f.depth.unwrap_or(match cmd {
                AliceBob => 4,
                _ => 3,
            }),
            pop,
            gens: f.gens.unwrap_or(match cmd {
                AliceBob => 30,
                _ => 20,
            }),
            ks,
            theta: f.theta.unwrap_or(1.0),
            records: f.records.unwrap_or(100),
            instances: f.instances.unwrap_or(100),
            init: f.init.clone().unwrap_or_else(|| match cmd {
                FullVsReduced => "grid".into(),
                _ => "frozen".into(),
            }),
            ndom: f.ndom.unwrap_or(100_000),
            c_target: f.c_target.unwrap_or(0.0),
            check: f.check,
            params,
            offspring,
        };
        c.validate(cmd)?;
        Ok(c)
    }

    fn validate(&self, cmd: Command) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        let uses_k = !matches!(cmd, Command::Thresholds | Command::StableLaw | Command::BpOracle);
        if uses_k && self.k < 3 {
            return fail(format!("--k must be at least 3, got {}", self.k));
        }
        if let Some(&bad) = self.ks.iter().find(|&&k| k < 3) {
            return fail(format!("--ks entries must be at least 3, got {bad}"));
        }
        if matches!(cmd, Command::Thresholds | Command::StableLaw | Command::BpOracle) && self.ks.is_empty() {
            return fail("--ks is empty".into());
        }
        if self.pop == 0 {
            return fail("--pop must be positive".into());
        }
        match cmd {
            Command::FullVsReduced if self.k > MAX_FULL_K => {
                fail(format!("full-vs-reduced stores full vectors; --k must be at most {MAX_FULL_K}"))
            }
            Command::BpOracle if self.ks.iter().any(|&k| k > 8) => {
                fail("bp-oracle enumerates colourings; keep --ks at most 8".into())
            }
            Command::StableLaw if self.params.delta != 0.5 => {
                fail(format!("stable-law compares with the closed-form limit, which needs --delta 0.5 (got {})", self.params.delta))
            }
            Command::AliceBob if !(0.0..=1.0).contains(&self.theta) => {
                fail(format!("--theta must lie in [0, 1], got {}", self.theta))
            }
            Command::AliceBob if self.ndom == 0 => fail("--ndom must be positive".into()),
            _ => Ok(()),
        }
    }
}
