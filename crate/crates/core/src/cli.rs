//! Command-line front end.
//!
//! Every command returns an [`Outcome`] instead of printing, so the binary
//! is a thin wrapper and tests can drive commands in-process. Exit codes are
//! uniform: 0 for a positive answer, 1 for a negative one, 2 for usage or
//! input errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::decide::{self, Verdict, Witness};
use crate::formula::{parse, Formula};
use crate::generate::{self, Corpus, GenConfig};
use crate::modelcheck::{converged_at, round_bound, run_fixpoint};
use crate::oracle::{self, Oracle, Property, PropertyOutcome};
use crate::team::{self, parse_team_file, Domain, Team};

/// Oracle comparisons in `bench` are limited to teams this small...
pub const BENCH_ORACLE_MAX_TEAM: usize = 8;
/// ...and formulas over at most this many variables.
pub const BENCH_ORACLE_MAX_VARS: usize = 3;

/// Five variables already give 2^32 teams, too many to tabulate.
pub const MAX_GUARD: usize = 4;

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "plne",
    version,
    about = "Team semantics toolkit for propositional logic with the nonemptiness atom"
)]
pub struct Cli {
    /// Emit line-oriented `key: value` output.
    #[arg(long, global = true)]
    pub machine: bool,

    /// Largest domain enumerated exhaustively by the oracle.
    #[arg(long, global = true, default_value_t = team::DEFAULT_GUARD, value_parser = parse_guard)]
    pub guard: usize,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_guard(text: &str) -> Result<usize, String> {
    let n: usize = text.parse().map_err(|e| format!("{e}"))?;
    if (1..=MAX_GUARD).contains(&n) {
        Ok(n)
    } else {
        Err(format!("guard must be between 1 and {MAX_GUARD}"))
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check whether a team satisfies a formula.
    Mc {
        #[command(flatten)]
        formula: FormulaArg,
        /// Team file.
        #[arg(short = 't', long = "team")]
        team: PathBuf,
        /// Print the final labelling of every occurrence.
        #[arg(long)]
        labels: bool,
    },
    /// Decide whether some nonempty team satisfies a formula.
    Sat {
        #[command(flatten)]
        formula: FormulaArg,
        /// Use exhaustive search instead of the small model search.
        #[arg(long)]
        brute: bool,
    },
    /// Decide whether every nonempty team satisfies a formula.
    Valid {
        #[command(flatten)]
        formula: FormulaArg,
        /// Use exhaustive search instead of the flattening check.
        #[arg(long)]
        brute: bool,
    },
    /// Audit closure properties over all teams of a domain.
    Props {
        #[command(flatten)]
        formula: FormulaArg,
        /// Comma-separated domain; defaults to the formula's variables.
        #[arg(long, value_delimiter = ',')]
        domain: Option<Vec<String>>,
    },
    /// Generate a reproducible corpus of formulas and teams.
    Gen(GenArgs),
    /// Compare the model checker against the oracle on a corpus.
    Bench {
        #[command(flatten)]
        gen: GenArgs,
        /// Read the corpus produced by `gen --machine` instead of generating one.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Include wall-clock timings (output is then not reproducible).
        #[arg(long)]
        timings: bool,
        /// Also time the model checker on growing teams over 10 variables.
        #[arg(long)]
        scaling: bool,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct FormulaArg {
    /// Formula text.
    #[arg(short = 'f', long = "formula")]
    pub text: Option<String>,
    /// File holding the formula text.
    #[arg(long = "formula-file")]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub vars: usize,
    #[arg(long = "ne-prob", default_value_t = 0.2)]
    pub ne_prob: f64,
    #[arg(long = "max-team", default_value_t = 8)]
    pub max_team: usize,
}

impl From<&GenArgs> for GenConfig {
    fn from(a: &GenArgs) -> Self {
        GenConfig {
            seed: a.seed,
            count: a.count,
            depth: a.depth,
            vars: a.vars,
            ne_prob: a.ne_prob,
            max_team: a.max_team,
        }
    }
}

/// Exit status plus captured output of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn answer(yes: bool, stdout: String) -> Self {
        Outcome {
            code: if yes { EXIT_YES } else { EXIT_NO },
            stdout,
            stderr: String::new(),
        }
    }

    fn error(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_YES };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Mc {
            formula,
            team,
            labels,
        } => cmd_mc(cli, formula, team, *labels),
        Command::Sat { formula, brute } => cmd_sat(cli, formula, *brute),
        Command::Valid { formula, brute } => cmd_valid(cli, formula, *brute),
        Command::Props { formula, domain } => cmd_props(cli, formula, domain.as_deref()),
        Command::Gen(args) => cmd_gen(cli, args),
        Command::Bench {
            gen,
            corpus,
            timings,
            scaling,
        } => cmd_bench(cli, gen, corpus.as_ref(), *timings, *scaling),
    };
    result.unwrap_or_else(Outcome::error)
}

fn load_formula(arg: &FormulaArg) -> Result<Formula, String> {
    let text = match (&arg.text, &arg.file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        (None, None) => return Err("no formula given".into()),
    };
    parse(text.trim()).map_err(|e| format!("formula: {e}"))
}

fn load_team(path: &PathBuf) -> Result<Team, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_team_file(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_mc(
    cli: &Cli,
    arg: &FormulaArg,
    team_path: &PathBuf,
    labels: bool,
) -> Result<Outcome, String> {
    let f = load_formula(arg)?;
    let team = load_team(team_path)?;
    if let Some(v) = f.vars().into_iter().find(|v| !team.domain().contains(v)) {
        return Err(format!(
            "variable {v:?} is not in the team domain ({})",
            team.domain()
        ));
    }
    let report = run_fixpoint(&team, &f).map_err(|e| e.to_string())?;
    let mut out = String::new();
    if cli.machine {
        let _ = writeln!(out, "command: mc");
        let _ = writeln!(out, "formula: {f}");
        let _ = writeln!(out, "team_size: {}", team.len());
        let _ = writeln!(out, "verdict: {}", report.accepted);
        let _ = writeln!(out, "rounds: {}", report.rounds);
        let _ = writeln!(out, "converged_at: {}", report.converged_at);
        let _ = writeln!(out, "bound: {}", report.bound);
        if labels {
            for (path, label) in &report.labelling.labels {
                let _ = writeln!(out, "label.{path}: {label}");
            }
        }
    } else {
        let verb = if report.accepted {
            "satisfies"
        } else {
            "does not satisfy"
        };
        let _ = writeln!(out, "the team {verb} {f}");
        let _ = writeln!(
            out,
            "labelling stable from round {} (bound {}), {} rounds computed",
            report.converged_at, report.bound, report.rounds
        );
        if labels {
            let occurrences = f.occurrences();
            for (path, sub) in occurrences {
                let label = report.labelling.get(&path).expect("total labelling");
                let (path, label) = (path.to_string(), label.to_string());
                let _ = writeln!(out, "  {path:<16} {label:<24} {sub}");
            }
        }
    }
    Ok(Outcome::answer(report.accepted, out))
}

fn write_team_block(out: &mut String, key: &str, team: &Team) {
    let _ = writeln!(out, "{key}_size: {}", team.len());
    let _ = writeln!(out, "{key}:");
    out.push_str(&team.to_file_string());
}

fn report_verdict(cli: &Cli, command: &str, f: &Formula, verdict: &Verdict) -> Outcome {
    let mut out = String::new();
    let witness = verdict.witness.as_ref().map(Witness::to_team);
    if cli.machine {
        let _ = writeln!(out, "command: {command}");
        let _ = writeln!(out, "formula: {f}");
        let _ = writeln!(out, "answer: {}", if verdict.answer { "yes" } else { "no" });
        let _ = writeln!(out, "method: {}", verdict.method);
        if let Some(path) = &verdict.refuted_occurrence {
            let _ = writeln!(out, "refuted_occurrence: {path}");
        }
        if let Some(t) = &witness {
            write_team_block(&mut out, "witness", t);
        }
        if let Some(t) = &verdict.counterexample {
            write_team_block(&mut out, "counterexample", t);
        }
    } else {
        let claim = match (command, verdict.answer) {
            ("sat", true) => "satisfiable",
            ("sat", false) => "unsatisfiable",
            (_, true) => "valid",
            (_, false) => "not valid",
        };
        let _ = writeln!(out, "{f} is {claim} (method: {})", verdict.method);
        if let Some(path) = &verdict.refuted_occurrence {
            let sub = f.at(path).expect("path from this formula");
            let _ = writeln!(out, "flattening of {sub} at {path} is not a tautology");
        }
        if let Some(t) = &witness {
            let _ = writeln!(out, "witness over ({}): {t}", t.domain());
        }
        if let Some(t) = &verdict.counterexample {
            let _ = writeln!(out, "counterexample over ({}): {t}", t.domain());
        }
    }
    Outcome::answer(verdict.answer, out)
}

fn cmd_sat(cli: &Cli, arg: &FormulaArg, brute: bool) -> Result<Outcome, String> {
    let f = load_formula(arg)?;
    let verdict = if brute {
        let witness = Oracle::with_guard(cli.guard)
            .brute_sat(&f)
            .map_err(|e| e.to_string())?;
        Verdict::brute_sat(witness)
    } else {
        decide::sat(&f)
    };
    Ok(report_verdict(cli, "sat", &f, &verdict))
}

fn cmd_valid(cli: &Cli, arg: &FormulaArg, brute: bool) -> Result<Outcome, String> {
    let f = load_formula(arg)?;
    let verdict = if brute {
        let cx = Oracle::with_guard(cli.guard)
            .brute_counterexample(&f)
            .map_err(|e| e.to_string())?;
        Verdict::brute_valid(cx)
    } else {
        decide::valid(&f)
    };
    Ok(report_verdict(cli, "valid", &f, &verdict))
}

fn cmd_props(cli: &Cli, arg: &FormulaArg, domain: Option<&[String]>) -> Result<Outcome, String> {
    let f = load_formula(arg)?;
    let domain = match domain {
        Some(names) => Domain::new(names.iter().map(|n| n.trim())).map_err(|e| e.to_string())?,
        None => Domain::new(f.vars()).expect("distinct"),
    };
    let oracle = Oracle::with_guard(cli.guard);
    let table = oracle
        .satisfaction_table(&f, &domain)
        .map_err(|e| e.to_string())?;
    let mut out = String::new();
    if cli.machine {
        let _ = writeln!(out, "command: props");
        let _ = writeln!(out, "formula: {f}");
        let _ = writeln!(out, "domain: {domain}");
    } else {
        let _ = writeln!(out, "closure properties of {f} over ({domain}):");
    }
    let mut all_pass = true;
    for property in Property::ALL {
        let outcome = oracle::property_on_table(&table, property);
        all_pass &= outcome.passed();
        let text = match &outcome {
            PropertyOutcome::Pass => "pass".to_string(),
            PropertyOutcome::Fail(cx) => format!("fail {cx}"),
        };
        if cli.machine {
            let _ = writeln!(out, "{property}: {text}");
        } else {
            let _ = writeln!(out, "  {:<10} {text}", property.name());
        }
    }
    Ok(Outcome::answer(all_pass, out))
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<Outcome, String> {
    let corpus = generate::generate(&args.into()).map_err(|e| e.to_string())?;
    let out = if cli.machine {
        corpus.to_text()
    } else {
        let mut out = format!(
            "{} instances over ({}), seed {}\n",
            corpus.items.len(),
            corpus.domain,
            corpus.seed
        );
        for (i, item) in corpus.items.iter().enumerate() {
            let _ = writeln!(out, "#{i:<4} {}   on {}", item.formula, item.team);
        }
        out
    };
    Ok(Outcome::answer(true, out))
}

/// Per-instance result of the bench comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub symbols: usize,
    pub ne: usize,
    pub vars: usize,
    pub team: usize,
    pub accepted: bool,
    pub converged_at: usize,
    pub bound: usize,
    /// Oracle verdict, when the instance is small enough to compare.
    pub oracle: Option<bool>,
}

/// Aggregate of a bench run. Everything except the timings is reproducible.
#[derive(Clone, Debug, Default)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub compared: usize,
    pub agreement: usize,
    pub max_converged_at: usize,
    pub bound_violations: usize,
    pub mc_micros: u128,
    pub oracle_micros: u128,
}

pub fn bench_corpus(corpus: &Corpus) -> BenchSummary {
    let mut summary = BenchSummary::default();
    for item in &corpus.items {
        let f = &item.formula;
        let t = &item.team;
        let start = Instant::now();
        let (accepted, j) = converged_at(t, f).expect("corpus teams cover their formulas");
        summary.mc_micros += start.elapsed().as_micros();
        let bound = round_bound(t.len(), f.size());
        let vars = f.vars().len();
        let oracle = if t.len() <= BENCH_ORACLE_MAX_TEAM && vars <= BENCH_ORACLE_MAX_VARS {
            let start = Instant::now();
            let truth = oracle::satisfies(t, f).expect("small instance");
            summary.oracle_micros += start.elapsed().as_micros();
            summary.compared += 1;
            if truth == accepted {
                summary.agreement += 1;
            }
            Some(truth)
        } else {
            None
        };
        summary.max_converged_at = summary.max_converged_at.max(j);
        if j > bound {
            summary.bound_violations += 1;
        }
        summary.rows.push(BenchRow {
            symbols: f.size(),
            ne: f.ne_count(),
            vars,
            team: t.len(),
            accepted,
            converged_at: j,
            bound,
            oracle,
        });
    }
    summary
}

/// Mean model-checking time per call, in microseconds, for teams of the
/// given sizes over 10 variables and one fixed formula of 200+ symbols.
pub fn scaling_series(seed: u64, sizes: &[usize]) -> Vec<(usize, f64)> {
    let names = generate::var_names(10);
    let domain = Domain::new(names.clone()).expect("distinct");
    let mut rng = generate::rng(seed);
    let f = generate::large_formula(&mut rng, &names, 0.1, 200);
    sizes
        .iter()
        .map(|&size| {
            let team = generate::random_team_of_size(&mut rng, &domain, size);
            let mut calls = 0u32;
            let start = Instant::now();
            while calls < 3 || start.elapsed().as_millis() < 50 {
                let _ = converged_at(&team, &f).expect("domain covers formula");
                calls += 1;
            }
            (size, start.elapsed().as_secs_f64() * 1e6 / f64::from(calls))
        })
        .collect()
}

fn cmd_bench(
    cli: &Cli,
    args: &GenArgs,
    corpus_path: Option<&PathBuf>,
    timings: bool,
    scaling: bool,
) -> Result<Outcome, String> {
    let corpus = match corpus_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            Corpus::parse(&text).map_err(|e| e.to_string())?
        }
        None => generate::generate(&args.into()).map_err(|e| e.to_string())?,
    };
    let summary = bench_corpus(&corpus);
    let mut histogram = std::collections::BTreeMap::new();
    for row in &summary.rows {
        *histogram.entry(row.converged_at).or_insert(0usize) += 1;
    }
    let histogram: Vec<String> = histogram.iter().map(|(j, n)| format!("{j}:{n}")).collect();
    let ok = summary.agreement == summary.compared && summary.bound_violations == 0;
    let mut out = String::new();
    if cli.machine {
        let _ = writeln!(out, "command: bench");
        let _ = writeln!(out, "seed: {}", corpus.seed);
        let _ = writeln!(out, "items: {}", summary.rows.len());
        for (i, r) in summary.rows.iter().enumerate() {
            let oracle = r.oracle.map_or("-".to_string(), |b| b.to_string());
            let _ = writeln!(
                out,
                "row: {i} symbols={} ne={} vars={} team={} accepted={} converged_at={} bound={} oracle={oracle}",
                r.symbols, r.ne, r.vars, r.team, r.accepted, r.converged_at, r.bound
            );
        }
        let _ = writeln!(out, "compared: {}", summary.compared);
        let _ = writeln!(out, "agreement: {}", summary.agreement);
        let _ = writeln!(out, "max_converged_at: {}", summary.max_converged_at);
        let _ = writeln!(out, "converged_at_histogram: {}", histogram.join(" "));
        let _ = writeln!(out, "bound_violations: {}", summary.bound_violations);
        if timings {
            let _ = writeln!(out, "mc_total_us: {}", summary.mc_micros);
            let _ = writeln!(out, "oracle_total_us: {}", summary.oracle_micros);
        }
    } else {
        let _ = writeln!(
            out,
            "{} instances (seed {})",
            summary.rows.len(),
            corpus.seed
        );
        let _ = writeln!(
            out,
            "oracle agreement: {}/{} compared",
            summary.agreement, summary.compared
        );
        let _ = writeln!(
            out,
            "fixpoint: max stable round {}, bound violations {}",
            summary.max_converged_at, summary.bound_violations
        );
        let _ = writeln!(out, "stable-round histogram: {}", histogram.join(" "));
        let _ = writeln!(
            out,
            "time: model checker {} us, oracle {} us",
            summary.mc_micros, summary.oracle_micros
        );
    }
    if scaling {
        for (size, micros) in scaling_series(corpus.seed, &[10, 100, 1000]) {
            if cli.machine {
                let _ = writeln!(out, "scaling: team={size} us={micros:.1}");
            } else {
                let _ = writeln!(out, "scaling: |t| = {size:<5} {micros:>10.1} us per check");
            }
        }
    }
    Ok(Outcome::answer(ok, out))
}
