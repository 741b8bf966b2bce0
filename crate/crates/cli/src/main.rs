use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpsim::experiment::{
    cmd_run, cmd_verify, dump_partition, dump_sparsified, parse_runs_csv, summary_table, ConfigError,
    ExperimentConfig, ExperimentError, Fault, RawConfig,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_PROPERTY: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "lpsim", version, about = "Partitioned link-prediction training simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured variants and sweeps and write all artifacts.
    Run(ConfigArgs),
    /// Run the built-in property suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inject a known defect; the suite should then fail.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
        /// Directory for serialized counterexamples.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the training-graph partition as `node_id,part_id`.
    Partition {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "partition.csv")]
        out: PathBuf,
    },
    /// Write each partition's sparsified edges and retention statistics.
    Sparsify {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "sparsified")]
        out: PathBuf,
    },
    /// Regenerate summary.txt from a runs.csv.
    Report {
        runs: PathBuf,
        /// Defaults to summary.txt beside the runs file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    /// Repeated edge draws keep a single draw's weight.
    DuplicateDraws,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file of `[section]` headers and `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override any key, e.g. `--set train.epochs=5`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated variant names.
    #[arg(long)]
    variants: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    parts: Option<String>,
    #[arg(long)]
    fanouts: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        let flags = [
            ("experiment.seed", self.seed.map(|s| s.to_string())),
            ("experiment.output", self.output.as_ref().map(|p| p.display().to_string())),
            ("experiment.variants", self.variants.clone()),
            ("train.epochs", self.epochs.map(|e| e.to_string())),
            ("experiment.alpha_sweep", self.alpha.clone()),
            ("experiment.parts_sweep", self.parts.clone()),
            ("train.fanouts", self.fanouts.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(&format!("{key}={v}"))?;
            }
        }
        for s in &self.sets {
            raw.set(s)?;
        }
        raw.resolve()
    }
}

fn fail(e: &ExperimentError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME })
}

fn config_or_exit(args: &ConfigArgs) -> Result<ExperimentConfig, ExitCode> {
    args.resolve().map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn verify(seed: u64, fault: Option<FaultArg>, output: Option<&Path>) -> ExitCode {
    let fault = fault.map(|FaultArg::DuplicateDraws| Fault::DuplicateDrawsNotAccumulated);
    let report = cmd_verify(seed, fault);
    for r in &report.results {
        println!("[{}] {} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        if let Some(instance) = &r.instance {
            match output {
                Some(dir) => {
                    let path = dir.join(format!("{}.txt", r.name));
                    if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(&path, instance)) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                    } else {
                        println!("  instance written to {}", path.display());
                    }
                }
                None => {
                    for line in instance.lines() {
                        println!("  | {line}");
                    }
                }
            }
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PROPERTY)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let cfg = match config_or_exit(&args) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match cmd_run(&cfg) {
                Ok(a) => {
                    println!("config_hash {}", cfg.hash());
                    println!("{} runs written to {}", a.records.len(), cfg.output.display());
                    match fs::read_to_string(&a.summary) {
                        Ok(s) => print!("{s}"),
                        Err(e) => eprintln!("warning: cannot read summary: {e}"),
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Verify {
            seed,
            inject_fault,
            output,
        } => verify(seed, inject_fault, output.as_deref()),
        Command::Partition { config, out } => {
            let cfg = match config_or_exit(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match dump_partition(&cfg, &out) {
                Ok((g, plan)) => {
                    println!(
                        "parts={} sizes={:?} edge_cut={} of {} edges -> {}",
                        plan.num_parts(),
                        plan.part_sizes(),
                        plan.edge_cut(&g),
                        g.num_edges(),
                        out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Sparsify { config, out } => {
            let cfg = match config_or_exit(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match dump_sparsified(&cfg, &out) {
                Ok(d) => {
                    for p in &d.parts {
                        println!("{}", p.summary());
                    }
                    println!("overall retention={:.4} -> {}", d.overall_retention(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Report { runs, out } => {
            let parsed = fs::File::open(&runs)
                .map_err(|e| ExperimentError::Io {
                    path: runs.clone(),
                    source: e,
                })
                .and_then(|f| parse_runs_csv(std::io::BufReader::new(f)));
            let (hash, seed, records) = match parsed {
                Ok(p) => p,
                Err(e) => return fail(&e),
            };
            let table = summary_table(&records, &hash, seed);
            let out = out.unwrap_or_else(|| runs.with_file_name("summary.txt"));
            if let Err(e) = fs::write(&out, &table) {
                eprintln!("error: cannot write {}: {e}", out.display());
                return ExitCode::from(EXIT_RUNTIME);
            }
            print!("{table}");
            ExitCode::SUCCESS
        }
    }
}
