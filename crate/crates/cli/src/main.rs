use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use priming_core::experiments::{Condition, Overlap};
use priming_core::io::Records;
use priming_core::{cmd_prior, cmd_sim1, cmd_sim2, parse_corpus, Construction, CountTable, Error, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "priming", version, about = "Hierarchical Bayesian model of syntactic priming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Global bias and per-verb DO probabilities under the prior corpus.
    Prior(CommonArgs),
    /// Lexical boost and inverse frequency: one prime per item.
    Sim1(CommonArgs),
    /// Decay of the priming effect under additional post-priming batches.
    Sim2(CommonArgs),
    /// Run Simulation 2 over a range of concentrations and report decay ratios.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated concentration values.
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0])]
        alphas: Vec<f64>,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Concentration of verb biases around the global bias.
    #[arg(long, default_value_t = RunConfig::default().alpha)]
    alpha: f64,
    /// Grid cells over the global bias.
    #[arg(long, default_value_t = RunConfig::default().grid_size)]
    grid: usize,
    #[arg(long, default_value_t = RunConfig::default().seed)]
    seed: u64,
    /// Replications of the batch-sampling process.
    #[arg(long, default_value_t = RunConfig::default().replications)]
    reps: usize,
    /// Number of experimental items.
    #[arg(long, default_value_t = RunConfig::default().n_items)]
    items: usize,
    /// Maximum number of post-priming batches.
    #[arg(long, default_value_t = RunConfig::default().max_batches)]
    batches: usize,
    #[arg(long, default_value_t = RunConfig::default().batch_size)]
    batch_size: u64,
    /// Prior corpus as `verb,do,po` CSV; defaults to the built-in table.
    #[arg(long, value_name = "PATH")]
    corpus: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write the decay chart here (sim2 only).
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// Worker threads for replications; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl CommonArgs {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            alpha: self.alpha,
            grid_size: self.grid,
            seed: self.seed,
            replications: self.reps,
            n_items: self.items,
            max_batches: self.batches,
            batch_size: self.batch_size,
        }
    }

    fn corpus(&self) -> Result<Option<CountTable>, Error> {
        self.corpus
            .as_deref()
            .map(|p| parse_corpus(&read(p)?))
            .transpose()
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn init_threads(n: usize) {
    if n > 0 {
        // Only fails if the global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Prior(args) => {
            let report = cmd_prior(args.corpus()?.as_ref(), &args.run_config())?;
            println!("{}", report.to_json());
        }
        Command::Sim1(args) => {
            init_threads(args.threads);
            let (report, csv) = cmd_sim1(args.corpus()?.as_ref(), &args.run_config())?;
            if let Some(out) = &args.out {
                write(out, &csv)?;
            }
            println!("{}", report.to_json());
        }
        Command::Sim2(args) => {
            init_threads(args.threads);
            let (report, csv, svg) = cmd_sim2(args.corpus()?.as_ref(), &args.run_config())?;
            if let Some(out) = &args.out {
                write(out, &csv)?;
            }
            if let Some(path) = &args.svg {
                write(path, &svg)?;
            }
            println!("{}", report.to_json());
        }
        Command::Sweep { common, alphas } => {
            init_threads(common.threads);
            let corpus = common.corpus()?;
            let csv = sweep(corpus.as_ref(), &common.run_config(), &alphas)?;
            if let Some(out) = &common.out {
                write(out, &csv)?;
            }
            print!("{csv}");
        }
    }
    Ok(())
}

/// Decay (effect at 0 batches minus effect at the last batch) per condition
/// and the Same/Different ratio per prime structure, for each alpha.
fn sweep(corpus: Option<&CountTable>, base: &RunConfig, alphas: &[f64]) -> Result<String, Error> {
    let mut out = String::from(
        "alpha,prior_theta_mean,decay_do_same,decay_do_different,ratio_do,decay_po_same,decay_po_different,ratio_po\n",
    );
    for &alpha in alphas {
        let cfg = RunConfig { alpha, ..base.clone() };
        let (report, _, _) = cmd_sim2(corpus, &cfg)?;
        let Records::Sim2(recs) = &report.records else {
            unreachable!("sim2 returns decay records")
        };
        let decay = |cond: Condition| {
            let at = |b: usize| {
                recs.iter()
                    .find(|r| r.condition == cond && r.n_batches == b)
                    .map(|r| r.effect)
                    .unwrap_or(f64::NAN)
            };
            at(0) - at(cfg.max_batches)
        };
        let mut row = format!("{alpha},{:.6}", report.prior_theta_mean);
        for prime in Construction::ALL {
            let same = decay(Condition { prime_structure: prime, overlap: Overlap::Same });
            let diff = decay(Condition { prime_structure: prime, overlap: Overlap::Different });
            row.push_str(&format!(",{same:.6},{diff:.6},{:.6}", same / diff));
        }
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
