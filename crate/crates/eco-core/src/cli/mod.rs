//! The `eco` command line: trade quoting, curve plotting, scenario
//! simulation, journal replay, and transaction-log analytics.
//!
//! Exit codes: 0 on success, 1 on domain or data errors, 2 on usage errors
//! (clap's default). All numeric output is printed as full-precision decimal
//! strings so journals and CSV outputs replay bit-exactly.

pub mod plot;

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::agents;
use crate::analytics;
use crate::curves::AllocativeParams;
use crate::exchange::{self, Exactness, Quote};
use crate::numeric::Dec;
use crate::organization;
use plot::{CurveSelection, PlotSpec};

#[derive(Debug, Parser)]
#[command(
    name = "eco",
    about = "Equitable continuous organizations: quoting, plotting, simulation, replay, analytics",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quote a mint or burn against an allocative curve
    Quote {
        #[command(subcommand)]
        side: QuoteSide,
    },
    /// Sample curves to CSV and render an SVG overlay
    Plot(PlotArgs),
    /// Run a scenario file (or packaged scenario) and export its trace
    Sim(SimArgs),
    /// Replay a receipt journal and print the final state
    Replay {
        /// Journal file produced by `sim` (or any writer of the format)
        journal: PathBuf,
    },
    /// Classify a transaction log and print the payment/reward flow table
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Bonding-curve slope k > 0
    #[arg(long)]
    pub k: Dec,
    /// Tax rate τ, strictly inside (0, 1)
    #[arg(long)]
    pub tau: Dec,
    /// Assessment a ≥ 0
    #[arg(long)]
    pub a: Dec,
    /// Current share supply s ≥ 0
    #[arg(long)]
    pub s: Dec,
}

#[derive(Debug, Subcommand)]
pub enum QuoteSide {
    /// Tokens received for a payment
    Mint {
        #[command(flatten)]
        curve: CurveArgs,
        /// Payment amount m > 0
        #[arg(long)]
        m: Dec,
        /// Inversion tolerance in tokens (≥ 1e-18)
        #[arg(long, default_value = "0.000000000000000001")]
        tol: Dec,
    },
    /// Reward received for burning tokens
    Burn {
        #[command(flatten)]
        curve: CurveArgs,
        /// Tokens to burn, negative, with −s ≤ x
        #[arg(long, allow_hyphen_values = true)]
        x: Dec,
    },
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Bonding-curve slope k > 0
    #[arg(long)]
    pub k: Dec,
    /// Curve family: "bonding" or "allocative"
    #[arg(long, default_value = "allocative")]
    pub curve: String,
    /// Assessments for the allocative overlay (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub a: Vec<Dec>,
    /// Tax rates for the allocative overlay (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<Dec>,
    /// Supply horizon S > 0, plotted over [0, S]
    #[arg(long = "s-max")]
    pub s_max: Dec,
    /// Number of samples (≥ 2)
    #[arg(long, default_value_t = 200)]
    pub samples: u32,
    /// Output path prefix; writes <out>.csv and <out>.svg
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Scenario TOML file, or a packaged scenario name
    /// (fig4_sandwich, fig4_sandwich_plain_curve, fig5_scalper)
    pub scenario: String,
    /// Directory for trace/PnL/journal outputs
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Transaction CSV: timestamp,org_id,account,kind,money,tokens
    #[arg(long)]
    pub tx: PathBuf,
    /// Organization CSV: org_id,publication_time
    #[arg(long)]
    pub orgs: PathBuf,
    /// Speculation window in seconds (first mint at or inside it)
    #[arg(long, default_value_t = analytics::DEFAULT_WINDOW_SECS)]
    pub window: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Message(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn msg(e: impl std::fmt::Display) -> CliError {
        CliError::Message(e.to_string())
    }
}

/// Runs a parsed command, printing to stdout. Errors map to exit code 1.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Quote { side } => cmd_quote(side),
        Command::Plot(args) => cmd_plot(args),
        Command::Sim(args) => cmd_sim(args),
        Command::Replay { journal } => cmd_replay(&journal),
        Command::Analyze(args) => cmd_analyze(args),
    }
}

fn quote_line(tag: &str, q: &Quote) -> String {
    let kind = match q.exactness {
        Exactness::Exact => "exact",
        Exactness::GuaranteedLowerBound => "lower bound",
    };
    format!("{tag} ({kind}): x={} m={}", q.tokens, q.money)
}

fn cmd_quote(side: QuoteSide) -> Result<(), CliError> {
    match side {
        QuoteSide::Mint { curve, m, tol } => {
            let params = AllocativeParams::new(curve.a, curve.tau).map_err(CliError::msg)?;
            let tokens = exchange::mint_tokens_exact(curve.k, &params, curve.s, m, tol)
                .map_err(CliError::msg)?;
            let charged = if tokens.is_positive() {
                exchange::mint_cost_exact(curve.k, &params, curve.s, tokens)
                    .map_err(CliError::msg)?
            } else {
                Dec::ZERO
            };
            let remainder = m.checked_sub(charged).map_err(CliError::msg)?;
            let bound =
                exchange::mint_tokens_lower(curve.k, &params, curve.s, m).map_err(CliError::msg)?;
            let exact = Quote::new(tokens, charged, Exactness::Exact).map_err(CliError::msg)?;
            let lower =
                Quote::new(bound, charged, Exactness::GuaranteedLowerBound).map_err(CliError::msg)?;
            println!("{}", quote_line("mint", &exact));
            println!("{}", quote_line("mint", &lower));
            println!("remainder (refundable): {remainder}");
        }
        QuoteSide::Burn { curve, x } => {
            let params = AllocativeParams::new(curve.a, curve.tau).map_err(CliError::msg)?;
            let m =
                exchange::burn_reward_exact(curve.k, &params, curve.s, x).map_err(CliError::msg)?;
            let bound =
                exchange::burn_reward_lower(curve.k, &params, curve.s, x).map_err(CliError::msg)?;
            let exact = Quote::new(x, m, Exactness::Exact).map_err(CliError::msg)?;
            println!("{}", quote_line("burn", &exact));
            println!("burn (lower bound): x={x} reward>={bound}");
            println!("reward (exact): {}", -m);
        }
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let curve = match args.curve.as_str() {
        "bonding" => CurveSelection::Bonding,
        "allocative" => {
            if args.a.is_empty() || args.tau.is_empty() {
                return Err(CliError::Message(
                    "allocative plots need --a and --tau lists".to_string(),
                ));
            }
            CurveSelection::Allocative { assessments: args.a.clone(), taus: args.tau.clone() }
        }
        other => return Err(CliError::Message(format!("unknown curve family {other:?}"))),
    };
    let spec = PlotSpec { k: args.k, curve, s_max: args.s_max, samples: args.samples, out: args.out };
    let data = plot::sample_curves(&spec).map_err(CliError::msg)?;

    let csv_path = spec.out.with_extension("csv");
    let svg_path = spec.out.with_extension("svg");
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(&csv_path, plot::plot_csv(&data))?;
    let title = format!("price curves over [0, {}]", spec.s_max);
    fs::write(&svg_path, plot::plot_svg(&data, &title))?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    Ok(())
}

fn cmd_sim(args: SimArgs) -> Result<(), CliError> {
    let path = PathBuf::from(&args.scenario);
    let scenario = if path.is_file() {
        let text = fs::read_to_string(&path)?;
        agents::Scenario::from_toml_str(&text).map_err(CliError::msg)?
    } else if let Some(builtin) = agents::builtin_scenario(&args.scenario) {
        builtin
    } else {
        return Err(CliError::Message(format!(
            "no scenario file or packaged scenario named {:?}",
            args.scenario
        )));
    };

    let log = agents::run(&scenario).map_err(CliError::msg)?;
    fs::create_dir_all(&args.out_dir)?;
    let trace_path = args.out_dir.join(format!("{}_trace.csv", scenario.name));
    let pnl_path = args.out_dir.join(format!("{}_pnl.csv", scenario.name));
    let journal_path = args.out_dir.join(format!("{}.journal", scenario.name));
    fs::write(&trace_path, log.trace_csv())?;
    fs::write(&pnl_path, log.pnl_csv())?;
    fs::write(&journal_path, log.journal_string())?;

    println!("scenario: {}", scenario.name);
    println!(
        "final state: s={} r={} a_bar={} spot={}",
        log.final_state.supply(),
        log.final_state.reserve(),
        log.final_state.aggregate_assessment(),
        log.final_state.spot_price(),
    );
    println!("agent PnL:");
    for (id, pnl) in &log.pnl {
        println!(
            "  {id}: realized={} unrealized={} mark_to_market={} holdings={}",
            pnl.realized, pnl.unrealized, pnl.mark_to_market, pnl.holdings,
        );
    }
    println!("wrote {}", trace_path.display());
    println!("wrote {}", pnl_path.display());
    println!("wrote {}", journal_path.display());
    Ok(())
}

fn cmd_replay(journal: &PathBuf) -> Result<(), CliError> {
    let file = fs::File::open(journal)?;
    let (state, receipts) =
        organization::replay(BufReader::new(file)).map_err(CliError::msg)?;
    println!("replayed {} transactions", receipts.len());
    println!("supply (s):     {}", state.supply());
    println!("reserve (r):    {}", state.reserve());
    println!("assessment (a): {}", state.aggregate_assessment());
    println!("spot price:     {}", state.spot_price());
    println!(
        "solvency ratio: {}",
        state.solvency_ratio().map_err(CliError::msg)?
    );
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let (records, tx_rejects) = analytics::load_tx_csv(&args.tx).map_err(CliError::msg)?;
    let (metas, org_rejects) = analytics::load_org_csv(&args.orgs).map_err(CliError::msg)?;
    let (summary, rejects) =
        analytics::summarize(&records, &metas, args.window).map_err(CliError::msg)?;

    println!("{}", flow_table(&summary));
    let total_rejects = tx_rejects.len() + org_rejects.len() + rejects.len();
    if total_rejects > 0 {
        eprintln!("rejected {total_rejects} rows:");
        for r in tx_rejects.iter().chain(rejects.iter()) {
            eprintln!("  tx line {}: {}", r.line, r.reason);
        }
        for r in &org_rejects {
            eprintln!("  org line {}: {}", r.line, r.reason);
        }
    }
    Ok(())
}

/// The payment/reward table split by trader class.
pub fn flow_table(summary: &analytics::FlowSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>42} {:>42}\n",
        "", "Investor", "Speculator"
    ));
    out.push_str(&format!(
        "{:<10} {:>42} {:>42}\n",
        "Payments",
        summary.payments.investor.to_string(),
        summary.payments.speculator.to_string(),
    ));
    out.push_str(&format!(
        "{:<10} {:>42} {:>42}",
        "Rewards",
        summary.rewards.investor.to_string(),
        summary.rewards.speculator.to_string(),
    ));
    out
}
