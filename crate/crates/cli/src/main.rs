use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use radiosync::oracle::Mode;
use radiosync::radionet::{gen_network, NetworkModel};
use radiosync::synchronizer::FamilyKind;
use radiosync_cli::bench::{parse_config, rows_csv, run_bench};
use radiosync_cli::formats::{read_family, FamilyFile, read_graph, read_wake, write_family, write_graph, write_trace};
use radiosync_cli::{default_mode, generate, simulate, verdict_record, verify, CliError, GenKind, GenRequest, SimRequest};

#[derive(Parser)]
#[command(name = "radiosync", version, about = "Synchronizers and selective families for radio networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a verified family.
    Gen {
        #[command(subcommand)]
        kind: GenCommand,
    },
    /// Re-verify a family file. Exit 0 if it holds, 1 if falsified, 2 if over budget.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the stored in-degree bound of a block family.
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Simulate a protocol and write its trace CSV.
    Sim {
        #[arg(value_enum)]
        protocol: SimProtocol,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        wake: Option<PathBuf>,
        #[arg(long)]
        max_steps: Option<u64>,
        /// Baseline selective constant.
        #[arg(long, default_value_t = 3.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Baseline with the single threshold delta instead of doubling.
        #[arg(long)]
        no_doubling: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a TOML-configured sweep and write summary.csv.
    Bench {
        config: PathBuf,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// Write a generated network in graph format.
    Graph {
        #[command(subcommand)]
        model: GraphCommand,
        #[arg(short, long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct GenCommon {
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    max_attempts: u32,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
}

#[derive(Subcommand)]
enum GenCommand {
    Selective {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: GenCommon,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    Urs {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: GenCommon,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    UpperBlock {
        #[arg(long)]
        n: usize,
        #[arg(long = "ecc", short = 'D')]
        ecc: usize,
        #[arg(long)]
        delta: usize,
        #[command(flatten)]
        common: GenCommon,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    Block {
        #[arg(long)]
        n: usize,
        #[arg(long = "ecc", short = 'D')]
        ecc: usize,
        #[arg(long)]
        delta: usize,
        #[arg(long, default_value_t = 3.0)]
        c_sel: f64,
        #[command(flatten)]
        common: GenCommon,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    Path {
        #[arg(long)]
        n: usize,
    },
    Star {
        #[arg(long)]
        leaves: usize,
    },
    StarIn {
        #[arg(long)]
        leaves: usize,
    },
    LayeredRandom {
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    RandomDag {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    BoundedIndeg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimProtocol {
    Broadcast,
    Wakeup,
    Baseline,
}

fn pick_mode(arg: Option<ModeArg>, trials: u64, seed: u64) -> Option<Mode> {
    arg.map(|m| match m {
        ModeArg::Exhaustive => Mode::Exhaustive,
        ModeArg::Sampled => Mode::Sampled { trials, seed },
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(CliError::from)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen { kind } => {
            let (kind, common, out) = match kind {
                GenCommand::Selective { n, k, common, out } => (GenKind::Selective { n, k }, common, out),
                GenCommand::Urs { n, common, out } => (GenKind::Urs { n }, common, out),
                GenCommand::UpperBlock { n, ecc, delta, common, out } => (GenKind::UpperBlock { n, ecc, delta }, common, out),
                GenCommand::Block { n, ecc, delta, c_sel, common, out } => {
                    (GenKind::Block { n, ecc, delta, c_sel }, common, out)
                }
            };
            let req = GenRequest {
                kind,
                c: common.c,
                seed: common.seed,
                max_attempts: common.max_attempts,
                mode: pick_mode(common.mode, common.trials, common.seed),
                trials: common.trials,
            };
            let file = generate(&req)?;
            info!("generated {} family with n={}", file.kind_str(), file.n());
            emit(out.as_deref(), &write_family(&file))?;
            Ok(0)
        }
        Command::Verify { file, mode, trials, seed, delta } => {
            let family = read_family(&read(&file)?)?;
            let mode = pick_mode(mode, trials, seed).unwrap_or_else(|| {
                let kind = match &family {
                    FamilyFile::Selective { family, .. } => {
                        GenKind::Selective { n: family.n(), k: family.k() }
                    }
                    FamilyFile::Sync { family, .. } => match family.kind {
                        FamilyKind::Urs => GenKind::Urs { n: family.n() },
                        _ => GenKind::UpperBlock { n: family.n(), ecc: family.params.ecc, delta: family.params.delta },
                    },
                };
                default_mode(&kind, trials, seed)
            });
            let verdict = verify(&family, mode, delta)?;
            print!("{}", verdict_record(&verdict));
            Ok(if verdict.holds() { 0 } else { 1 })
        }
        Command::Sim { protocol, graph, family, wake, max_steps, c, seed, no_doubling, out } => {
            let net = read_graph(&read(&graph)?)?;
            let family = family.map(|p| read(&p).and_then(|t| read_family(&t))).transpose()?;
            let req = match protocol {
                SimProtocol::Broadcast => SimRequest::Broadcast,
                SimProtocol::Wakeup => {
                    let path = wake.context("wakeup needs --wake")?;
                    SimRequest::Wakeup { wake: read_wake(&read(&path)?, net.n())? }
                }
                SimProtocol::Baseline => SimRequest::Baseline { k_doubling: !no_doubling, c, seed },
            };
            let (trace, seed) = simulate(&net, family.as_ref(), &req, max_steps)?;
            emit(out.as_deref(), &write_trace(&trace, &net, seed))?;
            Ok(if trace.is_complete() { 0 } else { 1 })
        }
        Command::Bench { config, out } => {
            let cfg = parse_config(&read(&config)?)?;
            let rows = run_bench(&cfg, &out)?;
            let path = out.join("summary.csv");
            std::fs::write(&path, rows_csv(&rows))?;
            info!("wrote {} rows to {}", rows.len(), path.display());
            Ok(0)
        }
        Command::Graph { model, out } => {
            let model = match model {
                GraphCommand::Path { n } => NetworkModel::Path { n },
                GraphCommand::Star { leaves } => NetworkModel::Star { leaves },
                GraphCommand::StarIn { leaves } => NetworkModel::StarIn { leaves },
                GraphCommand::LayeredRandom { layers, width, seed } => NetworkModel::LayeredRandom { layers, width, seed },
                GraphCommand::RandomDag { n, p, seed } => NetworkModel::RandomDag { n, p, seed },
                GraphCommand::BoundedIndeg { n, cap, seed } => NetworkModel::BoundedIndeg { n, cap, seed },
            };
            let net = gen_network(model).map_err(CliError::from)?;
            emit(out.as_deref(), &write_graph(&net))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(3, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
