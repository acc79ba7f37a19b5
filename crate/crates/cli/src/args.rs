use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oam_distill::protocols::AcceptanceRule;

#[derive(Debug, Parser)]
#[command(
    name = "oam-distill",
    version,
    about = "Exact simulator and analytic calculator for qudit entanglement distillation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the built-in invariant suite
    Verify,
    /// Qudit BBPSSW recurrence (bilateral CNOT, coincident targets)
    Bbpssw(RunArgs),
    /// Single-step distillation with generalized beam splitters
    Oambs(RunArgs),
    /// Bilateral-CNOT distillation of angular-momentum conserving pairs
    Conserving(RunArgs),
    /// Evaluate protocols over a grid of dimensions and input fidelities
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Protocol {
    Bbpssw,
    Oambs,
    Conserving,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Bbpssw => "bbpssw",
            Protocol::Oambs => "oambs",
            Protocol::Conserving => "conserving",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Engine {
    Enumerate,
    #[default]
    Analytic,
    Both,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Enumerate => "enumerate",
            Engine::Analytic => "analytic",
            Engine::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Rule {
    SumZero,
    #[default]
    Corrected,
    Literal,
}

impl From<Rule> for AcceptanceRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::SumZero => AcceptanceRule::SumZero,
            Rule::Corrected => AcceptanceRule::Corrected,
            Rule::Literal => AcceptanceRule::LiteralCoincidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every protocol command.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Number of successive rounds, each fed the previous output
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub steps: u32,
    /// Acceptance rule for the beam-splitter protocol
    #[arg(long, value_enum)]
    pub rule: Option<Rule>,
    #[arg(long, value_enum, default_value_t = Engine::Analytic)]
    pub engine: Engine,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub dim: usize,
    /// Input fidelity; Bell-diagonal inputs are taken isotropic
    #[arg(long, conflicts_with = "weights")]
    pub fidelity: Option<f64>,
    /// Explicit Bell-diagonal weights q0,q1,... (shift labels 0,1,...)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub weights: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Restrict to one protocol (default: all three)
    #[arg(long, value_enum)]
    pub protocol: Option<Protocol>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub dims: Vec<usize>,
    /// Fidelity grid start:stop:step, both ends inclusive
    #[arg(long = "f-grid", value_parser = parse_grid)]
    pub f_grid: Grid,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) {
        return Err("grid ends must lie in [0, 1]".into());
    }
    if !(step > 0.0) || stop < start {
        return Err("need step > 0 and start <= stop".into());
    }
    // index-based so the points do not drift; 1e-9 slack keeps `stop`
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok(Grid(
        (0..=n)
            .map(|i| (start + i as f64 * step).min(1.0))
            .collect(),
    ))
}
