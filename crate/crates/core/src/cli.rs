//! Command-line front end: argument parsing, grid expansion and CSV / JSON
//! output.
//!
//! Every subcommand accepts `--n` and `--m` either as a single value, an
//! inclusive range `a..b`, or a comma list, and emits one row per grid cell.
//! Single-run subcommands write the columns `n,m,method,value,stderr,reps,seed`;
//! `compare` writes one [`ComparisonRow`] per cell.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value as Json};

use crate::asymptotics::{self, Admissibility};
use crate::birthday;
use crate::error::Error;
use crate::exact::{self, ExactOptions, Precision};
use crate::game::DeckSpec;
use crate::indep::{self, SurrogateMode};
use crate::mc;
use crate::rng::RngStream;
use crate::strategy::{Strategy, Tiebreak};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

pub const SINGLE_HEADER: [&str; 7] = ["n", "m", "method", "value", "stderr", "reps", "seed"];
pub const COMPARE_HEADER: [&str; 10] = [
    "n",
    "m",
    "s_exact",
    "s_mc",
    "s_mc_stderr",
    "s_tilde",
    "dg",
    "ho",
    "main",
    "admissible",
];

/// A non-empty list of grid values: `7`, `2..6` (inclusive) or `2,4,8`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid(pub Vec<u64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |part: &str| format!("`{part}` is not a positive integer");
        let mut values = Vec::new();
        for part in s.split(',').map(str::trim) {
            if let Some((a, b)) = part.split_once("..") {
                let a: u64 = a.trim().parse().map_err(|_| bad(a))?;
                let b: u64 = b
                    .trim_start_matches('=')
                    .trim()
                    .parse()
                    .map_err(|_| bad(b))?;
                if a > b {
                    return Err(format!("empty range {part}"));
                }
                values.extend(a..=b);
            } else {
                values.push(part.parse().map_err(|_| bad(part))?);
            }
        }
        if values.is_empty() {
            return Err("empty grid".into());
        }
        Ok(Grid(values))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Fixed,
    Greedy,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TiebreakArg {
    Lowest,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExactMethodArg {
    Dp,
    Linearity,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IndepModeArg {
    Exact,
    Quadrature,
}

/// Options shared by all subcommands.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Number of distinct types: value, inclusive range `a..b`, or list `a,b`.
    #[arg(long, global = true, default_value = "5")]
    pub n: Grid,
    /// Copies per type: value, inclusive range `a..b`, or list `a,b`.
    #[arg(long, global = true, default_value = "5")]
    pub m: Grid,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "CARDGUESS_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Greedy)]
    pub strategy: StrategyArg,
    #[arg(long, global = true, value_enum, default_value_t = TiebreakArg::Lowest)]
    pub tiebreak: TiebreakArg,
    /// Exact rational arithmetic for the exact engine.
    #[arg(long, global = true)]
    pub rational: bool,
    /// Quadrature nodes per stratum for the surrogate.
    #[arg(long, global = true, default_value_t = 512)]
    pub grid_size: usize,
    /// Admissibility constant c in (ln n)^(3 + epsilon) <= c m.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, global = true, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Largest number of canonical states for the exact DP.
    #[arg(long, global = true, default_value_t = exact::DEFAULT_STATE_CAP)]
    pub state_cap: u128,
    /// Largest deck size for exact surrogate sums.
    #[arg(long, global = true, default_value_t = indep::DEFAULT_EXACT_CAP)]
    pub sum_cap: u64,
}

#[derive(Subcommand, Clone, Debug)]
pub enum Command {
    /// Monte Carlo estimate of the expected score.
    Simulate,
    /// Exact expected optimal score.
    Exact {
        #[arg(long, value_enum, default_value_t = ExactMethodArg::Dp)]
        method: ExactMethodArg,
        /// Write the per-t profile t,p,emax,emax_over_t (single cell only).
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Independent-binomial surrogate score.
    Indep {
        #[arg(long, value_enum, default_value_t = IndepModeArg::Exact)]
        mode: IndepModeArg,
        /// Write the per-t profile t,p,emax_indep,term (single cell only).
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Closed-form estimates and the admissibility flag.
    Asympt,
    /// Return-time moments of the reset chain on {1..n}.
    Markov {
        /// Simulated steps for the excursion count; 0 skips simulation.
        #[arg(long, default_value_t = 0)]
        steps: u64,
    },
    /// All methods side by side on a grid.
    Compare,
}

#[derive(Parser, Clone, Debug)]
#[command(
    name = "cardguess",
    version,
    about = "Card guessing with complete feedback"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug)]
enum RunError {
    Invalid(String),
    Capacity(Error),
    Other(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } => RunError::Capacity(e),
            Error::InvalidSpec { .. } | Error::DeckTooLarge { .. } | Error::InvalidParameter(_) => {
                RunError::Invalid(e.to_string())
            }
            other => RunError::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Other(e.to_string())
    }
}

/// A table cell value as written to CSV and JSON.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Empty => Json::Null,
            Cell::Int(v) => json!(v),
            Cell::Num(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// One row of a single-method run.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleRow {
    pub n: u64,
    pub m: Option<u64>,
    pub method: String,
    pub value: Cell,
    pub stderr: Option<f64>,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
}

impl SingleRow {
    fn plain(spec: DeckSpec, method: impl Into<String>, value: Cell) -> Self {
        Self {
            n: spec.n(),
            m: Some(spec.m()),
            method: method.into(),
            value,
            stderr: None,
            reps: None,
            seed: None,
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n),
            self.m.map_or(Cell::Empty, Cell::Int),
            Cell::Text(self.method.clone()),
            self.value.clone(),
            self.stderr.into(),
            self.reps.map_or(Cell::Empty, Cell::Int),
            self.seed.map_or(Cell::Empty, Cell::Int),
        ]
    }
}

/// All estimates for one `(n, m)`; methods that exceed their caps are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub n: u64,
    pub m: u64,
    pub s_exact: Option<Cell>,
    pub s_mc: Option<(f64, f64)>,
    pub s_tilde: Option<f64>,
    pub dg: f64,
    pub ho: f64,
    pub main: f64,
    pub admissible: bool,
}

impl ComparisonRow {
    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n),
            Cell::Int(self.m),
            self.s_exact.clone().unwrap_or(Cell::Empty),
            self.s_mc.map(|x| x.0).into(),
            self.s_mc.map(|x| x.1).into(),
            self.s_tilde.into(),
            Cell::Num(self.dg),
            Cell::Num(self.ho),
            Cell::Num(self.main),
            Cell::Flag(self.admissible),
        ]
    }

    /// `|mean - exact| <= 4 stderr` whenever both are present.
    pub fn consistent(&self) -> bool {
        match (&self.s_exact, self.s_mc) {
            (Some(exact), Some((mean, se))) => {
                let v = match exact {
                    Cell::Num(v) => *v,
                    Cell::Text(s) => parse_rational(s).unwrap_or(f64::NAN),
                    _ => return true,
                };
                (mean - v).abs() <= 4.0 * se
            }
            _ => true,
        }
    }
}

fn parse_rational(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => {
            use num_traits::ToPrimitive;
            let r = num_rational::BigRational::new(p.parse().ok()?, q.parse().ok()?);
            r.to_f64()
        }
        None => s.parse().ok(),
    }
}

fn write_table(
    out: &mut dyn Write,
    format: Format,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()
        }
        Format::Json => {
            for row in rows {
                let obj: Map<String, Json> = header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect();
                serde_json::to_writer(&mut *out, &Json::Object(obj))?;
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

impl Common {
    fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyArg::Fixed => Strategy::Fixed,
            StrategyArg::Uniform => Strategy::Uniform,
            StrategyArg::Greedy => Strategy::Greedy(match self.tiebreak {
                TiebreakArg::Lowest => Tiebreak::LowestIndex,
                TiebreakArg::Random => Tiebreak::Random,
            }),
        }
    }

    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }

    fn exact_options(&self) -> ExactOptions {
        ExactOptions {
            precision: if self.rational {
                Precision::Rational
            } else {
                Precision::Float
            },
            state_cap: self.state_cap,
            ..ExactOptions::default()
        }
    }

    fn admissibility(&self) -> Admissibility {
        Admissibility {
            c: self.c,
            epsilon: self.epsilon,
        }
    }

    fn cells(&self) -> Result<Vec<DeckSpec>, RunError> {
        let mut specs = Vec::new();
        for &n in &self.n.0 {
            for &m in &self.m.0 {
                specs.push(DeckSpec::new(n, m)?);
            }
        }
        Ok(specs)
    }

    fn single_cell(&self, flag: &str) -> Result<DeckSpec, RunError> {
        match self.cells()?.as_slice() {
            [one] => Ok(*one),
            _ => Err(RunError::Invalid(format!(
                "{flag} needs a single (n, m) cell"
            ))),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, RunError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers())
            .build()
            .map_err(|e| RunError::Other(e.to_string()))
    }
}

fn simulate_rows(c: &Common) -> Result<Vec<SingleRow>, RunError> {
    if c.reps < 2 {
        return Err(RunError::Invalid(format!(
            "--reps must be at least 2, got {}",
            c.reps
        )));
    }
    let strategy = c.strategy();
    c.cells()?
        .into_iter()
        .map(|spec| {
            let s = mc::estimate_score(spec, strategy, c.reps, c.seed, c.workers())?;
            Ok(SingleRow {
                stderr: Some(s.stderr),
                reps: Some(s.reps),
                seed: Some(s.seed),
                ..SingleRow::plain(spec, format!("mc-{}", strategy.id()), Cell::Num(s.mean))
            })
        })
        .collect()
}

fn exact_cell(v: &exact::ExactValue) -> Cell {
    match &v.rational {
        Some(r) => Cell::Text(r.to_string()),
        None => Cell::Num(v.value),
    }
}

fn exact_rows(
    c: &Common,
    method: ExactMethodArg,
    profile: Option<&PathBuf>,
) -> Result<Vec<SingleRow>, RunError> {
    let opts = c.exact_options();
    if let Some(path) = profile {
        let spec = c.single_cell("--profile")?;
        let (prof, _) = exact::score_decomposition(spec, &opts)?;
        let mut w = csv::Writer::from_path(path).map_err(|e| RunError::Other(e.to_string()))?;
        w.write_record(["t", "p", "emax", "emax_over_t"])
            .map_err(|e| RunError::Other(e.to_string()))?;
        for (t, p, e, r) in prof.rows() {
            w.write_record([
                t.to_string(),
                format!("{p}"),
                format!("{e}"),
                format!("{r}"),
            ])
            .map_err(|e| RunError::Other(e.to_string()))?;
        }
        w.flush()?;
    }
    let mut rows = Vec::new();
    for spec in c.cells()? {
        if matches!(method, ExactMethodArg::Dp | ExactMethodArg::Both) {
            let v = exact::exact_value_dp(spec, &opts)?;
            rows.push(SingleRow::plain(spec, "dp", exact_cell(&v)));
        }
        if matches!(method, ExactMethodArg::Linearity | ExactMethodArg::Both) {
            let (_, v) = exact::score_decomposition(spec, &opts)?;
            rows.push(SingleRow::plain(spec, "linearity", exact_cell(&v)));
        }
    }
    Ok(rows)
}

fn indep_rows(
    c: &Common,
    mode: IndepModeArg,
    profile: Option<&PathBuf>,
) -> Result<Vec<SingleRow>, RunError> {
    if let Some(path) = profile {
        let spec = c.single_cell("--profile")?;
        let rows = indep::surrogate_profile(spec, c.sum_cap)?;
        let mut w = csv::Writer::from_path(path).map_err(|e| RunError::Other(e.to_string()))?;
        w.write_record(["t", "p", "emax_indep", "term"])
            .map_err(|e| RunError::Other(e.to_string()))?;
        for (t, p, e, r) in rows {
            w.write_record([
                t.to_string(),
                format!("{p}"),
                format!("{e}"),
                format!("{r}"),
            ])
            .map_err(|e| RunError::Other(e.to_string()))?;
        }
        w.flush()?;
    }
    let mode = match mode {
        IndepModeArg::Exact => SurrogateMode::ExactSum,
        IndepModeArg::Quadrature => SurrogateMode::Quadrature,
    };
    c.cells()?
        .into_iter()
        .map(|spec| {
            let v = indep::s_tilde(spec, mode, c.grid_size, c.sum_cap)?;
            let name = match mode {
                SurrogateMode::ExactSum => "s_tilde-exact",
                SurrogateMode::Quadrature => "s_tilde-quadrature",
            };
            Ok(SingleRow {
                stderr: v.refinement_error,
                ..SingleRow::plain(spec, name, Cell::Num(v.value))
            })
        })
        .collect()
}

fn asympt_rows(c: &Common) -> Result<Vec<SingleRow>, RunError> {
    let adm = c.admissibility();
    let mut rows = Vec::new();
    for spec in c.cells()? {
        let [dg, ho, main] = asymptotics::all_estimates(spec, &adm);
        for e in [dg, ho, main] {
            rows.push(SingleRow::plain(spec, e.formula.id(), Cell::Num(e.value)));
        }
        rows.push(SingleRow::plain(
            spec,
            "main-admissible",
            Cell::Flag(main.admissible.unwrap_or(false)),
        ));
    }
    Ok(rows)
}

fn markov_rows(c: &Common, steps: u64) -> Result<Vec<SingleRow>, RunError> {
    let mut rows = Vec::new();
    for &n in &c.n.0 {
        let row = |method: &str, value: Cell| SingleRow {
            n,
            m: None,
            method: method.into(),
            value,
            stderr: None,
            reps: None,
            seed: None,
        };
        let stats = if steps > 0 {
            let mut rng = RngStream::new(c.seed, 0);
            birthday::simulate_excursions(n, steps, &mut rng)?
        } else {
            birthday::return_time_moments(n)?
        };
        rows.push(row("ET", Cell::Num(stats.et)));
        rows.push(row("ET2", Cell::Num(stats.et2)));
        if let (Some(exc), Some(ratio)) = (stats.excursions, stats.renewal_ratio()) {
            rows.push(SingleRow {
                reps: Some(steps),
                seed: Some(c.seed),
                ..row("excursions", Cell::Int(exc))
            });
            rows.push(SingleRow {
                reps: Some(steps),
                seed: Some(c.seed),
                ..row("renewal-ratio", Cell::Num(ratio))
            });
        }
    }
    Ok(rows)
}

fn comparison_row(c: &Common, spec: DeckSpec) -> Result<ComparisonRow, Error> {
    let absent_on_capacity = |r: Result<Cell, Error>| match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_capacity() => Ok(None),
        Err(e) => Err(e),
    };
    let s_exact = absent_on_capacity(
        exact::exact_value_dp(spec, &c.exact_options()).map(|v| exact_cell(&v)),
    )?;
    let s_mc = if c.reps >= 2 {
        let s = mc::estimate_score(spec, c.strategy(), c.reps, c.seed, 1)?;
        Some((s.mean, s.stderr))
    } else {
        None
    };
    let s_tilde = if spec.total() <= c.sum_cap {
        indep::s_tilde_exact(spec, c.sum_cap)?.value
    } else {
        indep::s_tilde_quadrature(spec, c.grid_size)?.value
    };
    let [dg, ho, main] = asymptotics::all_estimates(spec, &c.admissibility());
    Ok(ComparisonRow {
        n: spec.n(),
        m: spec.m(),
        s_exact,
        s_mc,
        s_tilde: Some(s_tilde),
        dg: dg.value,
        ho: ho.value,
        main: main.value,
        admissible: main.admissible.unwrap_or(false),
    })
}

/// One row per grid cell, in grid order, computed in parallel.
pub fn compare(c: &Common) -> Result<Vec<ComparisonRow>, Error> {
    let cells: Vec<DeckSpec> =
        c.n.0
            .iter()
            .flat_map(|&n| c.m.0.iter().map(move |&m| DeckSpec::new(n, m)))
            .collect::<Result<_, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.workers())
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let rows: Vec<ComparisonRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&s| comparison_row(c, s))
            .collect::<Result<_, _>>()
    })?;
    for row in rows.iter().filter(|r| !r.consistent()) {
        eprintln!(
            "warning: n={} m={}: Monte Carlo mean is more than 4 standard errors from the exact value",
            row.n, row.m
        );
    }
    Ok(rows)
}

fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let c = &cfg.common;
    if let Command::Compare = cfg.command {
        let rows = compare(c)?;
        let cells: Vec<Vec<Cell>> = rows.iter().map(ComparisonRow::cells).collect();
        write_table(out, c.format, &COMPARE_HEADER, &cells)?;
        return Ok(());
    }
    let rows = match &cfg.command {
        Command::Simulate => simulate_rows(c)?,
        Command::Exact { method, profile } => c
            .pool()?
            .install(|| exact_rows(c, *method, profile.as_ref()))?,
        Command::Indep { mode, profile } => c
            .pool()?
            .install(|| indep_rows(c, *mode, profile.as_ref()))?,
        Command::Asympt => asympt_rows(c)?,
        Command::Markov { steps } => markov_rows(c, *steps)?,
        Command::Compare => unreachable!(),
    };
    let cells: Vec<Vec<Cell>> = rows.iter().map(SingleRow::cells).collect();
    write_table(out, c.format, &SINGLE_HEADER, &cells)?;
    Ok(())
}

/// Runs a parsed configuration, writing to `--output` or standard output,
/// and returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = match &cfg.common.output {
        Some(path) => File::create(path).map_err(RunError::from).and_then(|f| {
            let mut w = io::BufWriter::new(f);
            execute(cfg, &mut w)?;
            w.flush().map_err(RunError::from)
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            execute(cfg, &mut lock)
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(RunError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
        Err(RunError::Capacity(e)) => {
            eprintln!("error: {e}");
            EXIT_CAPACITY
        }
        Err(RunError::Other(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

/// Parses `args` (including the program name) and runs, capturing output in
/// memory. Returns the exit code and the bytes written.
pub fn run_captured<I, T>(args: I) -> (i32, Vec<u8>)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => return (e.exit_code(), e.to_string().into_bytes()),
    };
    let mut buf = Vec::new();
    let code = match execute(&cfg, &mut buf) {
        Ok(()) => EXIT_OK,
        Err(RunError::Invalid(_)) => EXIT_INVALID,
        Err(RunError::Capacity(_)) => EXIT_CAPACITY,
        Err(RunError::Other(_)) => EXIT_FAILURE,
    };
    (code, buf)
}
