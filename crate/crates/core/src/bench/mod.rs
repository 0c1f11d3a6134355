//! Benchmark harness: generated instances, heuristic diminutions and the
//! guard, ground, solve pipeline with timing.

pub mod generators;
mod heuristics;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use heuristics::build_diminution;

use crate::ast::{Program, Signature, Symbol};
use crate::error::{Error, Result};
use crate::grounder::{ground_with, GroundOptions, GroundProgram};
use crate::semantics::{answer_sets_with, SolveConfig};
use crate::transform::{guard, strip_dom, GuardPlacement};
use generators::Preferences;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Coloring,
    Hamiltonian,
    StableMarriage,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Coloring => "coloring",
            Family::Hamiltonian => "hc",
            Family::StableMarriage => "sm",
        }
    }

    /// Predicates whose projection must survive the diminution.
    pub fn remain(self) -> BTreeSet<Signature> {
        let sig = match self {
            Family::Coloring => Signature::new("color", 2),
            Family::Hamiltonian => Signature::new("hc", 2),
            Family::StableMarriage => Signature::new("match", 2),
        };
        [sig].into_iter().collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coloring" => Ok(Family::Coloring),
            "hc" | "hamiltonian" => Ok(Family::Hamiltonian),
            "sm" | "stable_marriage" => Ok(Family::StableMarriage),
            _ => Err(Error::InvalidArgument(format!("unknown family {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeuristicMode {
    F1Partial,
    F2ValueSubset,
    F3Neighborhood,
}

impl HeuristicMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicMode::F1Partial => "f1",
            HeuristicMode::F2ValueSubset => "f2",
            HeuristicMode::F3Neighborhood => "f3",
        }
    }
}

impl FromStr for HeuristicMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(HeuristicMode::F1Partial),
            "f2" => Ok(HeuristicMode::F2ValueSubset),
            "f3" => Ok(HeuristicMode::F3Neighborhood),
            _ => Err(Error::InvalidArgument(format!("unknown heuristic {s:?}"))),
        }
    }
}

/// `param` is the kept-vertex fraction (f1), the value window width (f2) or
/// the neighborhood radius (f3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicSpec {
    pub mode: HeuristicMode,
    pub param: f64,
}

impl HeuristicSpec {
    pub fn new(mode: HeuristicMode, param: f64) -> Self {
        HeuristicSpec { mode, param }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    /// Edge probability for coloring, chord density for HC.
    pub density: f64,
}

impl InstanceSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        let density = match family {
            Family::Coloring => 0.3,
            _ => generators::CHORD_DENSITY,
        };
        InstanceSpec {
            family,
            n,
            seed,
            density,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub program: Program,
    pub preferences: Option<Preferences>,
}

impl Instance {
    /// Generates the instance. Marriage preferences are redrawn until the
    /// paired heuristic keeps the man-optimal stable matching.
    pub fn generate(spec: InstanceSpec, h: &HeuristicSpec) -> Result<Self> {
        let min = if spec.family == Family::Hamiltonian {
            3
        } else {
            1
        };
        if spec.n < min {
            return Err(Error::InvalidArgument(format!(
                "{} needs n >= {min}",
                spec.family
            )));
        }
        let (program, preferences) = match spec.family {
            Family::Coloring => (
                generators::gen_coloring(spec.n as u32, spec.density, spec.seed),
                None,
            ),
            Family::Hamiltonian => (
                generators::gen_hamiltonian_with(spec.n as u32, spec.density, spec.seed),
                None,
            ),
            Family::StableMarriage => {
                let depth = match h.mode {
                    HeuristicMode::F2ValueSubset => h.param.max(1.0) as usize,
                    _ => spec.n,
                };
                let prefs = generators::marriage_preferences(spec.n, depth, spec.seed);
                let p = crate::parser::parse_program(&generators::marriage_text(&prefs))?;
                (p, Some(prefs))
            }
        };
        Ok(Instance {
            spec,
            program,
            preferences,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunMode {
    Diminished,
    Full,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Diminished => "diminished",
            RunMode::Full => "full",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub heuristic: HeuristicSpec,
    pub mode: RunMode,
    pub ground_time_s: f64,
    pub ground_rules: usize,
    pub ground_bytes: usize,
    pub solve_time_s: Option<f64>,
    /// `None` when solving was skipped or ran out of budget.
    pub found: Option<bool>,
    /// Full ground bytes over this run's ground bytes.
    pub reduction_ratio: f64,
    pub timed_out: bool,
}

pub const TSV_HEADER: &str =
    "family\tn\tseed\tmode\tground_time_s\tground_rules\tground_bytes\tsolve_time_s\tfound\treduction_ratio";

impl RunStats {
    pub fn tsv_row(&self) -> String {
        let found = match self.found {
            Some(true) => "true",
            Some(false) => "false",
            None if self.timed_out => "timeout",
            None => "unknown",
        };
        format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{}\t{}\t{}\t{}\t{:.4}",
            self.family,
            self.n,
            self.seed,
            self.mode.as_str(),
            self.ground_time_s,
            self.ground_rules,
            self.ground_bytes,
            self.solve_time_s
                .map_or("-".to_string(), |t| format!("{t:.6}")),
            found,
            self.reduction_ratio,
        )
    }
}

pub fn to_tsv(rows: &[RunStats]) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.tsv_row());
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// Wall-clock limit per pipeline run.
    pub budget: Option<Duration>,
    pub solve: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            budget: Some(Duration::from_secs(120)),
            solve: true,
        }
    }
}

/// Ground output of one pipeline run.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub ground: GroundProgram,
    pub ground_time: Duration,
}

/// `strip_dom(ground(guard(P, D)))` with timing.
pub fn ground_pipeline(
    p: &Program,
    d: &BTreeSet<Symbol>,
    deadline: Option<Instant>,
) -> Result<PipelineOutput> {
    let start = Instant::now();
    let g = guard(p, d, &GuardPlacement::AllVariables)?;
    let raw = ground_with(&g.program, None, &GroundOptions { deadline });
    let mut ground = strip_dom(&raw, &g.dom_fact_atoms(), &g.dom_predicate);
    ground.complete = raw.complete;
    Ok(PipelineOutput {
        ground,
        ground_time: start.elapsed(),
    })
}

fn run_one(
    inst: &Instance,
    h: &HeuristicSpec,
    d: &BTreeSet<Symbol>,
    mode: RunMode,
    cfg: &BenchConfig,
) -> Result<RunStats> {
    let deadline = cfg.budget.map(|b| Instant::now() + b);
    let out = ground_pipeline(&inst.program, d, deadline)?;
    let mut timed_out = !out.ground.complete;
    let (solve_time_s, found) = if cfg.solve && !timed_out {
        let start = Instant::now();
        let solve = SolveConfig {
            max_atoms: usize::MAX,
            max_models: Some(1),
            deadline,
            ..SolveConfig::default()
        };
        let res = answer_sets_with(&out.ground, &solve);
        let t = start.elapsed().as_secs_f64();
        match res {
            Ok(o) if !o.answer_sets.is_empty() => (Some(t), Some(true)),
            Ok(o) if o.complete => (Some(t), Some(false)),
            Ok(_) => {
                timed_out = true;
                (Some(t), None)
            }
            Err(_) => (Some(t), None),
        }
    } else {
        (None, None)
    };
    Ok(RunStats {
        family: inst.spec.family,
        n: inst.spec.n,
        seed: inst.spec.seed,
        heuristic: *h,
        mode,
        ground_time_s: out.ground_time.as_secs_f64(),
        ground_rules: out.ground.rules.len(),
        ground_bytes: out.ground.byte_size(),
        solve_time_s,
        found,
        reduction_ratio: 1.0,
        timed_out,
    })
}

/// Runs one instance under its heuristic diminution and under `HU(P)`.
/// Rows come back diminished first; ratios are relative to the full run.
pub fn run_pair(spec: InstanceSpec, h: HeuristicSpec, cfg: &BenchConfig) -> Result<Vec<RunStats>> {
    let inst = Instance::generate(spec, &h)?;
    let d = build_diminution(&inst, &h)?;
    let hu = inst.program.herbrand_universe();
    let mut dim = run_one(&inst, &h, &d, RunMode::Diminished, cfg)?;
    let full = run_one(&inst, &h, &hu, RunMode::Full, cfg)?;
    dim.reduction_ratio = full.ground_bytes as f64 / dim.ground_bytes.max(1) as f64;
    Ok(vec![dim, full])
}

/// Runs every pair concurrently. Failed configurations are skipped and
/// reported in the second component; rows are sorted deterministically.
pub fn run_benchmark(
    jobs: &[(InstanceSpec, HeuristicSpec)],
    cfg: &BenchConfig,
) -> (Vec<RunStats>, Vec<(InstanceSpec, Error)>) {
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(s, h)| (*s, run_pair(*s, *h, cfg)))
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (s, r) in results {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(e) => errors.push((s, e)),
        }
    }
    rows.sort_by(|a, b| {
        (a.family, a.n, a.seed, a.heuristic.mode, a.mode)
            .cmp(&(b.family, b.n, b.seed, b.heuristic.mode, b.mode))
            .then(a.heuristic.param.total_cmp(&b.heuristic.param))
    });
    (rows, errors)
}

/// Mean ground time and bytes plus the timeout rate for one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub mean_ground_time_s: f64,
    pub mean_ground_bytes: f64,
    pub timeout_rate: f64,
}

pub fn summarize(rows: &[RunStats], mode: RunMode) -> Summary {
    let sel: Vec<&RunStats> = rows.iter().filter(|r| r.mode == mode).collect();
    let k = sel.len().max(1) as f64;
    Summary {
        runs: sel.len(),
        mean_ground_time_s: sel.iter().map(|r| r.ground_time_s).sum::<f64>() / k,
        mean_ground_bytes: sel.iter().map(|r| r.ground_bytes as f64).sum::<f64>() / k,
        timeout_rate: sel.iter().filter(|r| r.timed_out).count() as f64 / k,
    }
}
