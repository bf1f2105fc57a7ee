use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use blpinn_core::config::{ExperimentConfig, ForcingSelector};
use blpinn_core::experiment::{self, sci, TableOptions, TABLE_COLUMNS, TABLE_N};
use blpinn_core::reference::{oracle_solve, DEFAULT_ORACLE_MESH};
use blpinn_core::training::TrainConfig;
use blpinn_core::{Error, Forcing, ProblemKind, ProblemSpec};
use clap::{Parser, Subcommand};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NEWTON: u8 = 3;
const EXIT_NON_FINITE: u8 = 4;
const EXIT_IO: u8 = 5;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "blpinn", version, about = "Corrector-enriched two-layer PINNs for 1D boundary-layer problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration (best of n_seeds) and write solution.csv and report.csv.
    Train { config: PathBuf },
    /// Train over the config's eps_list and write sweep.csv plus one curve per eps.
    Sweep { config: PathBuf },
    /// Reproduce the full error table into table.csv and report.csv.
    Table {
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "table_out")]
        out: PathBuf,
        #[arg(long, default_value_t = blpinn_core::config::DEFAULT_N_SEEDS)]
        seeds: usize,
        /// Override the iteration budget of every cell.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Dump the oracle reference curve as `x,u` CSV.
    Reference {
        problem: String,
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_ORACLE_MESH)]
        mesh: usize,
        /// const:<c>, cos or file:<path>; defaults to const:-1 for burgers and const:1 otherwise.
        #[arg(long)]
        forcing: Option<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        Error::NewtonDivergence { .. } => EXIT_NEWTON,
        Error::NonFiniteLoss { .. } => EXIT_NON_FINITE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_OTHER,
    }
}

fn run(cli: Cli) -> blpinn_core::Result<()> {
    match cli.command {
        Command::Train { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let offset = experiment::seed_offset_from_env()?;
            let summary = experiment::cmd_train(&cfg, offset)?;
            for o in &summary.outcomes {
                println!(
                    "seed {}: rel_l2 {} loss {} after {} iterations",
                    o.record.seed,
                    sci(o.record.rel_l2),
                    sci(o.record.final_loss),
                    o.record.iterations
                );
            }
            let best = summary.best();
            println!("best seed {} rel_l2 {}; wrote {}", best.record.seed, sci(best.record.rel_l2), cfg.output_dir.display());
        }
        Command::Sweep { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let offset = experiment::seed_offset_from_env()?;
            for p in experiment::cmd_sweep(&cfg, offset)? {
                println!("eps {}: best rel_l2 {}", sci(p.eps), sci(p.best_rel_l2));
            }
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::Table { jobs, out, seeds, max_iters } => {
            let mut train = TrainConfig::default();
            if let Some(m) = max_iters {
                train.max_iters = m;
            }
            let opts = TableOptions {
                jobs,
                n_seeds: seeds,
                seed_offset: experiment::seed_offset_from_env()?,
                train,
                ..TableOptions::default()
            };
            let result = experiment::cmd_table(&opts, &out)?;
            let labels: Vec<&str> = TABLE_COLUMNS.iter().map(|c| c.label).collect();
            println!("{:>5} {}", "N", labels.iter().map(|l| format!("{l:>11}")).collect::<String>());
            for n in TABLE_N {
                let vals: String = TABLE_COLUMNS
                    .iter()
                    .map(|c| match result.cell(c.label, n).and_then(|cell| cell.best_rel_l2) {
                        Some(v) => format!("{v:>11.3e}"),
                        None => format!("{:>11}", "-"),
                    })
                    .collect();
                println!("{n:>5} {vals}  {}", if result.row_passes(n) { "pass" } else { "fail" });
            }
            println!("wrote {}", out.display());
        }
        Command::Reference { problem, eps, mesh, forcing, out } => {
            let kind: ProblemKind = problem.parse()?;
            let forcing = match forcing {
                None => Forcing::Const(if kind == ProblemKind::Burgers { -1.0 } else { 1.0 }),
                Some(s) => match s.parse::<ForcingSelector>().map_err(Error::InvalidArgument)? {
                    ForcingSelector::Const(c) => Forcing::Const(c),
                    ForcingSelector::Cos => Forcing::Cos,
                    ForcingSelector::File(p) => {
                        let text = std::fs::read_to_string(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                        Forcing::parse_table(&text)?
                    }
                },
            };
            let spec = ProblemSpec::new(kind, eps, forcing)?;
            let reference = oracle_solve(&spec, mesh)?;
            match out {
                Some(path) => {
                    let f = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    let mut w = BufWriter::new(f);
                    reference.write_csv(&mut w)?;
                    w.flush()?;
                }
                None => {
                    let stdout = io::stdout();
                    let mut w = BufWriter::new(stdout.lock());
                    reference.write_csv(&mut w)?;
                    w.flush()?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
