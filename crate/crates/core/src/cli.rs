//! The `kep` command line.
//!
//! Exit codes: 0 on success (an infeasible-floors result is a success), 1 on
//! usage errors, 2 on data, parse or I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compat::build_compat;
use crate::domain::{Instance, ModelConfig, ObjectiveMode};
use crate::error::Error;
use crate::format::{self, count_rows, COUNTS_HEADER};
use crate::generator::{generate, GenConfig, DEFAULT_HLA_VALUES};
use crate::harness::{run_base_scenario, sweep_lhla, sweep_pool_size, PoolSizing};
use crate::models::{build_model1, build_model2, build_model3, compute_fairness_floors};
use crate::solver::{solve, SolveStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kep", version, about = "Exact pairwise kidney exchange models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance file.
    Generate(GenerateArgs),
    /// Solve one model on an instance file.
    Solve(SolveArgs),
    /// Run a threshold or pool-size sweep.
    Sweep(SweepArgs),
    /// Run the three cases of the base scenario.
    Base(BaseArgs),
}

#[derive(Debug, Args)]
pub struct GenFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub agents: u32,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub pairs: u32,
    /// Comma-separated HLA score values.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HLA_VALUES)]
    pub hla_values: Vec<i64>,
    /// Comma-separated weights for O,A,B,AB.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.25, 0.25, 0.25, 0.25])]
    pub blood_dist: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub pra_prob: f64,
}

impl GenFlags {
    fn config(&self) -> Result<GenConfig, CliError> {
        let blood_distribution: [f64; 4] = self
            .blood_dist
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Usage("--blood-dist needs exactly four weights".into()))?;
        let cfg = GenConfig {
            seed: self.seed,
            num_agents: self.agents as usize,
            pairs_per_agent: self.pairs as usize,
            hla_values: self.hla_values.clone(),
            blood_distribution,
            pra_compat_probability: self.pra_prob,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub gen: GenFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    AsWritten,
    CountOnly,
}

impl From<Objective> for ObjectiveMode {
    fn from(o: Objective) -> Self {
        match o {
            Objective::AsWritten => ObjectiveMode::AsWritten,
            Objective::CountOnly => ObjectiveMode::CountOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub model: u8,
    #[arg(long, default_value_t = 210)]
    pub l_hla: i64,
    #[arg(long, value_enum, default_value_t = Objective::AsWritten)]
    pub objective: Objective,
    /// `auto` (standalone count optimum per agent), `none`, or a
    /// comma-separated list with one value per agent.
    #[arg(long, default_value = "auto")]
    pub floors: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Lhla,
    Pairs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    #[command(flatten)]
    pub gen: GenFlags,
    /// `start:end:step` (inclusive) or a comma-separated list.
    #[arg(long)]
    pub range: String,
    /// Threshold used by the pool-size sweep.
    #[arg(long, default_value_t = 210)]
    pub l_hla: i64,
    #[arg(long, value_enum, default_value_t = Objective::AsWritten)]
    pub objective: Objective,
    /// Pool-size sweep on nested prefixes of one instance.
    #[arg(long)]
    pub nested: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaseArgs {
    #[command(flatten)]
    pub gen: GenFlags,
    #[arg(long, default_value_t = 210)]
    pub l_hla: i64,
    #[arg(long, value_enum, default_value_t = Objective::AsWritten)]
    pub objective: Objective,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(Error::Io(e))
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// the human-readable summary to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Base(a) => cmd_base(a, out),
    }
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.gen.config()?;
    let inst = generate(&cfg)?;
    format::write_instance(&args.out, &inst)?;
    writeln!(
        out,
        "wrote {} pairs across {} agents to {}",
        inst.len(),
        inst.num_agents(),
        args.out.display()
    )?;
    Ok(())
}

fn parse_floors(spec: &str, inst: &Instance) -> Result<Option<Vec<u32>>, CliError> {
    match spec {
        "auto" => Ok(None),
        "none" => Ok(Some(vec![0; inst.num_agents()])),
        list => {
            let floors = list
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("--floors: {e}")))?;
            if floors.len() != inst.num_agents() {
                return Err(CliError::Usage(format!(
                    "--floors lists {} values for {} agents",
                    floors.len(),
                    inst.num_agents()
                )));
            }
            Ok(Some(floors))
        }
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Models 1 and 2 are solved on each agent's own pool; Model 3 on the merged
/// pool.
pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.l_hla < 0 {
        return Err(CliError::Usage("--l-hla must be nonnegative".into()));
    }
    let inst = format::read_instance(&args.instance)?;
    let compat = build_compat(&inst)?;
    let mode = ObjectiveMode::from(args.objective);
    let label = format!("model{}", args.model);
    let mut csv = format!("{COUNTS_HEADER}\n");

    writeln!(
        out,
        "{label} on {} pairs, {} agents",
        inst.len(),
        inst.num_agents()
    )?;
    if args.model == 3 {
        let floors = match parse_floors(&args.floors, &inst)? {
            Some(f) => f,
            None => compute_fairness_floors(&inst, &compat)?,
        };
        writeln!(out, "l_hla: {}", args.l_hla)?;
        writeln!(out, "floors: {}", join(&floors))?;
        let spec = build_model3(&inst, &compat, &ModelConfig::model3(args.l_hla, floors, mode))?;
        let report = solve(&spec)?;
        writeln!(out, "status: {}", report.status.as_str())?;
        if report.status == SolveStatus::Optimal {
            let s = &report.solution;
            count_rows(&mut csv, &label, &s.transplants_per_agent);
            writeln!(out, "objective: {}", s.objective_value)?;
            writeln!(out, "matches: {}", join_matches(&s.matches))?;
            writeln!(
                out,
                "assigned kidneys per agent: {}",
                join(&s.transplants_per_agent)
            )?;
            writeln!(out, "total: {}", s.transplants_total)?;
        }
        writeln!(out, "nodes: {}", report.nodes_explored)?;
    } else {
        if args.model == 2 {
            writeln!(out, "l_hla: {}", args.l_hla)?;
        }
        let mut per_agent = Vec::with_capacity(inst.num_agents());
        let mut objective = 0;
        let mut matches = Vec::new();
        for agent in 0..inst.num_agents() {
            let pool = inst.agent_pool(agent);
            let spec = if args.model == 1 {
                build_model1(&inst, &compat, &pool)?
            } else {
                build_model2(&inst, &compat, &ModelConfig::model2(args.l_hla, mode), &pool)?
            };
            let report = solve(&spec)?;
            per_agent.push(report.solution.transplants_total);
            objective += report.solution.objective_value;
            matches.extend(report.solution.matches);
        }
        matches.sort_unstable();
        count_rows(&mut csv, &label, &per_agent);
        writeln!(out, "status: optimal")?;
        writeln!(out, "objective: {objective}")?;
        writeln!(out, "matches: {}", join_matches(&matches))?;
        writeln!(out, "assigned kidneys per agent: {}", join(&per_agent))?;
        writeln!(out, "total: {}", per_agent.iter().sum::<u32>())?;
    }
    if let Some(path) = &args.out {
        std::fs::write(path, csv)?;
    }
    Ok(())
}

fn join_matches(matches: &[(usize, usize)]) -> String {
    matches
        .iter()
        .map(|(i, j)| format!("{i}-{j}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses `start:end:step` (inclusive) or a comma-separated list.
pub fn parse_range(spec: &str) -> Result<Vec<i64>, CliError> {
    let usage = |msg: &str| CliError::Usage(format!("--range {spec:?}: {msg}"));
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(usage("empty range"));
    }
    let num = |s: &str| s.trim().parse::<i64>().map_err(|_| usage("not an integer"));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            return Err(usage("expected start:end:step"));
        };
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if step <= 0 || start > end {
            return Err(usage("need step > 0 and start <= end"));
        }
        (start..=end).step_by(step as usize).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("values must be strictly ascending"));
    }
    Ok(values)
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.gen.config()?;
    let values = parse_range(&args.range)?;
    let mode = ObjectiveMode::from(args.objective);
    let result = match args.mode {
        SweepMode::Lhla => {
            if values[0] < 0 {
                return Err(CliError::Usage("thresholds must be nonnegative".into()));
            }
            sweep_lhla(&cfg, &values, mode)?
        }
        SweepMode::Pairs => {
            if values[0] < 1 {
                return Err(CliError::Usage("pool sizes must be positive".into()));
            }
            let sizes: Vec<usize> = values.iter().map(|&v| v as usize).collect();
            let sizing = if args.nested {
                PoolSizing::Nested
            } else {
                PoolSizing::Fresh
            };
            sweep_pool_size(&cfg, &sizes, args.l_hla, mode, sizing)?
        }
    };
    let csv = format::sweep_csv(&result);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            writeln!(out, "wrote {} rows to {}", result.rows.len(), path.display())?;
        }
        None => write!(out, "{csv}")?,
    }
    Ok(())
}

pub fn cmd_base(args: &BaseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.gen.config()?;
    if args.l_hla < 0 {
        return Err(CliError::Usage("--l-hla must be nonnegative".into()));
    }
    let base = run_base_scenario(&cfg, args.l_hla, args.objective.into())?;
    writeln!(out, "floors: {}", join(&base.floors))?;
    writeln!(out, "model3 status: {}", base.model3.status.as_str())?;
    let csv = format::base_scenario_csv(&base);
    match &args.out {
        Some(path) => std::fs::write(path, &csv)?,
        None => write!(out, "{csv}")?,
    }
    Ok(())
}
