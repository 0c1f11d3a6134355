use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use aspdim::bench::{self, BenchConfig, Family, HeuristicMode, HeuristicSpec, InstanceSpec};
use aspdim::diminution::{
    self, CheckConfig, Diminution, DiminutionReport, LoopVerdict, PreservedMode, SplittingVerdict,
    TriState, Verdict,
};
use aspdim::grounder::{ground, restrict_ground};
use aspdim::semantics::{answer_sets_with, format_interpretation, SolveConfig};
use aspdim::transform::{dom_lift, guard, parse_diminution, GuardPlacement};
use aspdim::{parse_program, Program, Signature, Symbol};

#[derive(Parser)]
#[command(
    name = "aspdim",
    version,
    about = "Diminution-aware grounding and checking for ASP programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground a program, optionally over a diminution.
    Ground {
        file: PathBuf,
        /// Diminution file, or a comma-separated constant list.
        #[arg(long)]
        dim: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the answer sets. Exits 10 if one exists, 20 otherwise.
    Solve {
        file: PathBuf,
        #[arg(long)]
        dim: Option<String>,
        #[arg(long, default_value_t = aspdim::semantics::DEFAULT_SEARCH_LIMIT)]
        max_atoms: usize,
        /// Stop after this many answer sets.
        #[arg(long)]
        models: Option<usize>,
    },
    /// Decide the diminution properties of a constant subset.
    Check {
        file: PathBuf,
        #[arg(long)]
        dim: String,
        /// Predicates to preserve, e.g. `p/2,q/1`.
        #[arg(long)]
        preserve: Option<String>,
        #[arg(long, value_enum, default_value_t = CheckMode::All)]
        mode: CheckMode,
        #[arg(long)]
        json: bool,
    },
    /// Replace constants by guarded variables.
    Lift { file: PathBuf },
    /// Emit the guarded program for a diminution.
    Guard {
        file: PathBuf,
        #[arg(long)]
        dim: String,
    },
    /// Run one generated instance under a heuristic and under the full universe.
    Bench {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        heuristic: String,
        #[arg(long)]
        param: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds per pipeline run.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        stats_out: Option<PathBuf>,
        /// Skip solving; report grounding only.
        #[arg(long)]
        no_solve: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckMode {
    All,
    Admissible,
    Safe,
    Splitting,
    Loop,
    Eloop,
}

fn read_program(path: &Path) -> Result<Program> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A path to a diminution file or an inline comma-separated list.
fn read_dim(arg: &str) -> Result<BTreeSet<Symbol>> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        return Ok(parse_diminution(&text)?);
    }
    Ok(parse_diminution(&arg.replace(',', "\n"))?)
}

fn parse_signatures(arg: &str) -> Result<BTreeSet<Signature>> {
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (name, arity) = s
                .rsplit_once('/')
                .with_context(|| format!("expected name/arity, got {s:?}"))?;
            let arity: usize = arity
                .parse()
                .with_context(|| format!("bad arity in {s:?}"))?;
            Ok(Signature::new(name, arity))
        })
        .collect()
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "holds": v.holds,
        "witness": v.witness.as_ref().map(format_interpretation),
    })
}

fn loop_json(v: &LoopVerdict) -> Value {
    json!({
        "status": v.status.as_str(),
        "evidence": v.evidence,
        "witness": v.witness.as_ref().map(format_interpretation),
    })
}

fn check(p: &Program, d: Diminution, mode: CheckMode, as_json: bool) -> Result<()> {
    let cfg = CheckConfig::default();
    let a = diminution::Analysis::new(p, &d, &cfg)?;
    let want = |m: CheckMode| mode == CheckMode::All || mode == m;
    let preserved =
        |m| (!d.preserved.is_empty()).then(|| diminution::preserved_in(&a, &d.preserved, m));
    let report = DiminutionReport {
        admissible: diminution::admissible_in(&a),
        safe: diminution::safe_in(&a),
        preserved_admissible: preserved(PreservedMode::Admissible),
        preserved_safe: preserved(PreservedMode::Safe),
        splitting_safe: diminution::splitting_in(&a),
        loop_admissible: if want(CheckMode::Loop) {
            diminution::loop_admissible_in(&a, false, &cfg)
        } else {
            skipped()
        },
        elementary_loop_admissible: if want(CheckMode::Eloop) {
            diminution::loop_admissible_in(&a, true, &cfg)
        } else {
            skipped()
        },
        reduced_answer_sets: a.reduced_sets.len(),
        full_answer_sets: a.full_sets.len(),
        lattice_violations: Vec::new(),
    };
    let lattice = if mode == CheckMode::All {
        diminution::lattice_violations(&report)
    } else {
        Vec::new()
    };

    let mut kv: Vec<(String, String)> = Vec::new();
    let mut js = serde_json::Map::new();
    let mut verdict = |key: &str, v: &Verdict| {
        kv.push((key.to_string(), v.holds.to_string()));
        if let Some(w) = &v.witness {
            kv.push((format!("{key}_witness"), format_interpretation(w)));
        }
        js.insert(key.to_string(), verdict_json(v));
    };
    if want(CheckMode::Admissible) {
        verdict("admissible", &report.admissible);
        if let Some(v) = &report.preserved_admissible {
            verdict("preserved_admissible", v);
        }
    }
    if want(CheckMode::Safe) {
        verdict("safe", &report.safe);
        if let Some(v) = &report.preserved_safe {
            verdict("preserved_safe", v);
        }
    }
    if want(CheckMode::Splitting) {
        let s = &report.splitting_safe;
        kv.push(("splitting_safe".into(), s.as_str().into()));
        let rule = match s {
            SplittingVerdict::Fails { rule } => Some(rule.to_string()),
            _ => None,
        };
        if let Some(r) = &rule {
            kv.push(("splitting_safe_rule".into(), r.clone()));
        }
        js.insert(
            "splitting_safe".into(),
            json!({"status": s.as_str(), "rule": rule}),
        );
    }
    let mut loop_verdict = |key: &str, v: &LoopVerdict| {
        kv.push((key.to_string(), v.status.to_string()));
        for e in &v.evidence {
            kv.push((format!("{key}_evidence"), e.clone()));
        }
        js.insert(key.to_string(), loop_json(v));
    };
    if want(CheckMode::Loop) {
        loop_verdict("loop_admissible", &report.loop_admissible);
    }
    if want(CheckMode::Eloop) {
        loop_verdict(
            "elementary_loop_admissible",
            &report.elementary_loop_admissible,
        );
    }
    kv.push((
        "answer_sets_reduced".into(),
        report.reduced_answer_sets.to_string(),
    ));
    kv.push((
        "answer_sets_full".into(),
        report.full_answer_sets.to_string(),
    ));
    js.insert(
        "answer_sets_reduced".into(),
        json!(report.reduced_answer_sets),
    );
    js.insert("answer_sets_full".into(), json!(report.full_answer_sets));
    for v in &lattice {
        kv.push(("lattice_violation".into(), v.clone()));
    }
    if mode == CheckMode::All {
        js.insert("lattice_violations".into(), json!(lattice));
    }
    if as_json {
        println!("{}", serde_json::to_string_pretty(&Value::Object(js))?);
    } else {
        for (k, v) in kv {
            println!("{k}={v}");
        }
    }
    Ok(())
}

fn skipped() -> LoopVerdict {
    LoopVerdict {
        status: TriState::Unknown,
        evidence: Vec::new(),
        witness: None,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ground { file, dim, out } => {
            let p = read_program(&file)?;
            let g = match dim {
                Some(d) => restrict_ground(&p, &read_dim(&d)?)?,
                None => ground(&p),
            };
            emit(&g.to_text(), out.as_deref())?;
        }
        Command::Solve {
            file,
            dim,
            max_atoms,
            models,
        } => {
            let p = read_program(&file)?;
            let g = match dim {
                Some(d) => restrict_ground(&p, &read_dim(&d)?)?,
                None => ground(&p),
            };
            let cfg = SolveConfig {
                max_atoms,
                max_models: models,
                ..SolveConfig::default()
            };
            let out = answer_sets_with(&g, &cfg)?;
            for (i, s) in out.answer_sets.iter().enumerate() {
                println!("Answer {}: {}", i + 1, format_interpretation(s));
            }
            return Ok(if out.answer_sets.is_empty() {
                println!("UNSATISFIABLE");
                ExitCode::from(20)
            } else {
                println!("SATISFIABLE");
                ExitCode::from(10)
            });
        }
        Command::Check {
            file,
            dim,
            preserve,
            mode,
            json,
        } => {
            let p = read_program(&file)?;
            let mut d = Diminution::new(read_dim(&dim)?);
            if let Some(s) = preserve {
                d = d.preserving(parse_signatures(&s)?);
            }
            check(&p, d, mode, json)?;
        }
        Command::Lift { file } => {
            let p = read_program(&file)?;
            print!("{}", dom_lift(&p).lifted);
        }
        Command::Guard { file, dim } => {
            let p = read_program(&file)?;
            let g = guard(&p, &read_dim(&dim)?, &GuardPlacement::AllVariables)?;
            print!("{}", g.program);
        }
        Command::Bench {
            family,
            n,
            heuristic,
            param,
            seed,
            budget,
            stats_out,
            no_solve,
        } => {
            let family: Family = family.parse()?;
            let mode: HeuristicMode = heuristic.parse()?;
            if budget.is_some_and(|b| b.is_nan() || b <= 0.0) {
                bail!("--budget must be positive");
            }
            let cfg = BenchConfig {
                budget: budget.map(Duration::from_secs_f64),
                solve: !no_solve,
            };
            let rows = bench::run_pair(
                InstanceSpec::new(family, n, seed),
                HeuristicSpec::new(mode, param),
                &cfg,
            )?;
            emit(&bench::to_tsv(&rows), stats_out.as_deref())?;
            if stats_out.is_some() {
                print!("{}", bench::to_tsv(&rows));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
