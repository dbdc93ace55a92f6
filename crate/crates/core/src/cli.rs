//! `mdfrule` command line: solve, gen, fit, rule, plot.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input. Results go to
//! standard output; progress and diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::datagen::{self, GenConfig};
use crate::error::Error;
use crate::game::{DecisionPoint, GameSpec, GameTree, Node, Player};
use crate::metrics;
use crate::plot;
use crate::regress::{self, Table};
use crate::solver::{self, SolveReport, SolverConfig};

#[derive(Debug, Parser)]
#[command(
    name = "mdfrule",
    version,
    about = "Toy poker solver, defense-frequency datasets and the 100-50-25 MIN rule"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one game described by a JSON spec file.
    Solve(SolveArgs),
    /// Sample and solve random games, writing a dataset CSV.
    Gen(GenArgs),
    /// Fit the regression model zoo to a dataset.
    Fit(FitArgs),
    /// Evaluate the 100-50-25 MIN calling rule.
    Rule(RuleArgs),
    /// Range advantage vs. optimal defense frequency scatter.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    /// Iteration cap per game.
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: u32,
    /// Exploitability target in chips [default: 0.001 * pot].
    #[arg(long)]
    pub target: Option<f64>,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            target_exploitability: self.target,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Game spec JSON: {n, p, q, pot, stack, p1_bets, p2_bets}.
    pub spec: PathBuf,
    /// Also write the full report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Games per bet size.
    #[arg(long, default_value_t = 5_000)]
    pub games: usize,
    /// Bet sizes as fractions of the pot, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1.0")]
    pub bet_sizes: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Deck size.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub pot: f64,
    #[arg(long, default_value_t = 1.0)]
    pub stack: f64,
    /// Worker threads [default: available cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Reuse the same (p, q) pairs for every bet size.
    #[arg(long)]
    pub reuse_distributions: bool,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// 1: single bet size models, 2: multi-size models [default: by bet sizes present].
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub table: Option<u8>,
    /// Write the report as CSV (model,formula,train_mse,cv_mse).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Fold shuffling seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    #[arg(long, conflicts_with_all = ["pot", "bet"], required_unless_present = "pot")]
    pub mdf: Option<f64>,
    #[arg(long, requires = "bet")]
    pub pot: Option<f64>,
    #[arg(long, requires = "pot")]
    pub bet: Option<f64>,
    /// Range advantage in [0, 1], or [-1, 1] with --signed.
    #[arg(long, allow_negative_numbers = true)]
    pub ra: f64,
    #[arg(long)]
    pub signed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotFormat {
    Svg,
    Csv,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PlotFormat::Svg)]
    pub format: PlotFormat,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_validation() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Rule(a) => cmd_rule(&a, out),
        Command::Plot(a) => cmd_plot(&a, out),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes()).map_err(|e| CliError {
        code: 1,
        message: format!("stdout: {e}"),
    })
}

/// Trimmed fixed-point probability, e.g. `0.5`, `1`, `0.333`.
fn prob_label(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn point_title(tree: &GameTree, point: DecisionPoint) -> String {
    match point {
        DecisionPoint::Root => "P1 first action".into(),
        DecisionPoint::FacingBet(k) => {
            format!("P2 facing bet {}", tree.bet_size(DecisionPoint::Root, k))
        }
        DecisionPoint::FacingCheck => "P2 facing check".into(),
        DecisionPoint::FacingCheckBet(k) => format!(
            "P1 facing bet {} after checking",
            tree.bet_size(DecisionPoint::FacingCheck, k)
        ),
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Strategy listing in the `Card 9: Bet 1 pr. 1` style. Cards the acting
/// player is never dealt and actions below 0.0005 are omitted.
pub fn format_listing(tree: &GameTree, report: &SolveReport) -> String {
    let mut s = String::new();
    for node in tree.nodes() {
        let Node::Decision(d) = node else { continue };
        s.push_str(&point_title(tree, d.point));
        s.push_str(":\n");
        let dist = match d.player() {
            Player::P1 => &tree.spec().p,
            Player::P2 => &tree.spec().q,
        };
        for card in 1..=tree.n() {
            if dist.weight(card) == 0.0 {
                continue;
            }
            let probs = report.profile.of(d.player()).get(d.infoset(card));
            let parts: Vec<String> = d
                .actions
                .iter()
                .zip(probs)
                .filter(|(_, &pr)| pr >= 0.0005)
                .map(|(&a, &pr)| {
                    format!(
                        "{} pr. {}",
                        capitalize(&tree.action_label(d.point, a)),
                        prob_label(pr)
                    )
                })
                .collect();
            s.push_str(&format!("  Card {card}: {}\n", parts.join(", ")));
        }
    }
    s
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CliResult {
    let text = fs::read_to_string(&a.spec).map_err(|e| io_err(&a.spec, e))?;
    let spec = GameSpec::from_json(&text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", a.spec.display())))?;
    let tree = GameTree::new(spec)?;
    let report = solver::solve(&tree, &a.solver.config())?;
    let mut s = format!(
        "exploitability: {}\ngame_value: {}\niterations: {}\nconverged: {}\n",
        report.exploitability, report.game_value, report.iterations, report.converged
    );
    s.push_str(&format_listing(&tree, &report));
    if let Some(path) = &a.out {
        fs::write(path, report.to_json(&tree)).map_err(|e| io_err(path, e))?;
    }
    emit(out, &s)
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CliResult {
    let config = GenConfig {
        games_per_bet_size: a.games,
        bet_sizes: a.bet_sizes.clone(),
        n: a.n,
        pot: a.pot,
        stack: a.stack,
        master_seed: a.seed,
        solver: a.solver.config(),
        reuse_distributions: a.reuse_distributions,
    };
    config.validate()?;
    if let Some(t) = a.solver.target {
        if !(t > 0.0) {
            return Err(CliError::invalid(format!(
                "invalid target: {t} must be > 0"
            )));
        }
    }
    if a.workers == Some(0) {
        return Err(CliError::invalid("invalid workers: must be > 0"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError {
            code: 1,
            message: format!("thread pool: {e}"),
        })?;

    let total = config.total_games();
    let step = (total / 20).max(1);
    let start = Instant::now();
    let rows = pool.install(|| {
        datagen::generate_dataset_with_progress(&config, |done| {
            if done % step == 0 || done == total {
                eprintln!("gen: {done}/{total}");
            }
        })
    })?;

    let tmp = partial_path(&a.out);
    let written = datagen::write_csv(&rows, &tmp)
        .map_err(CliError::from)
        .and_then(|()| fs::rename(&tmp, &a.out).map_err(|e| io_err(&a.out, e)));
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }

    let mean_expl = rows.iter().map(|r| r.exploitability).sum::<f64>() / rows.len() as f64;
    let target = config
        .solver
        .target_exploitability
        .unwrap_or(1e-3 * config.pot);
    let unconverged = rows.iter().filter(|r| r.exploitability > target).count();
    emit(
        out,
        &format!(
            "rows={} mean_exploitability={:.6e} unconverged={} wall_time_s={:.3}\n",
            rows.len(),
            mean_expl,
            unconverged,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn partial_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".partial");
    out.with_file_name(name)
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> CliResult {
    let rows = datagen::read_csv(&a.data)?;
    if rows.is_empty() {
        return Err(CliError::invalid(format!("{}: no rows", a.data.display())));
    }
    let sizes = regress::bet_sizes(&rows);
    let table = match a.table {
        Some(1) => Table::PotOnly,
        Some(_) => Table::MultiSize,
        None if sizes.len() == 1 => Table::PotOnly,
        None => Table::MultiSize,
    };
    if table == Table::PotOnly && sizes.len() != 1 {
        return Err(CliError::invalid(format!(
            "table 1 treats MDF as a constant and needs a single bet size; {} has {} ({}). Use --table 2",
            a.data.display(),
            sizes.len(),
            sizes.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
        )));
    }
    let report = regress::run_model_zoo(&rows, table, a.folds, a.seed)?;
    if let Some(path) = &a.out {
        fs::write(path, report.to_csv()).map_err(|e| io_err(path, e))?;
    }
    emit(out, &report.to_text())
}

fn cmd_rule(a: &RuleArgs, out: &mut dyn Write) -> CliResult {
    let mdf = match (a.mdf, a.pot, a.bet) {
        (Some(m), None, None) => m,
        (None, Some(pot), Some(bet)) => metrics::mdf(pot, bet)?,
        _ => {
            return Err(CliError::invalid(
                "give either --mdf or both --pot and --bet",
            ))
        }
    };
    let v = if a.signed {
        regress::rule_signed(mdf, a.ra)?
    } else {
        regress::rule_100_50_25(mdf, a.ra)?
    };
    emit(out, &format!("{}\n", datagen::format_decimal(v)))
}

fn cmd_plot(a: &PlotArgs, out: &mut dyn Write) -> CliResult {
    let rows = datagen::read_csv(&a.data)?;
    let doc = match a.format {
        PlotFormat::Svg => plot::scatter_svg(&rows)?,
        PlotFormat::Csv => plot::scatter_csv(&rows)?,
    };
    fs::write(&a.out, doc).map_err(|e| io_err(&a.out, e))?;
    emit(
        out,
        &format!("points={} out={}\n", rows.len(), a.out.display()),
    )
}
