use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use robust_gnn::attack::AttackKind;
use robust_gnn::config::{to_toml, validate_config, AttackConfig, DatasetKind, ExperimentConfig};
use robust_gnn::eval::{parse_series, render_series, EvalReport, VariantAxis};
use robust_gnn::pipeline::{
    attack_seed, evaluate_seed, mean_sweep, run_pipeline, summarize, summary_to_csv, sweep_seed, train_seed,
    SummaryRow,
};
use robust_gnn::train::TrainMode;
use robust_gnn::Error;

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "robust-gnn",
    version,
    about = "Train, attack and evaluate graph encoders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every configured defense and save checkpoints and logs.
    Train(Common),
    /// Select targets and write one perturbation trace per attack.
    Attack(Common),
    /// Score saved checkpoints against saved traces.
    Evaluate(Common),
    /// Encoder variant study: mean target margin per budget.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Budgets to evaluate.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8")]
        budgets: Vec<usize>,
        /// Variant axes to sweep.
        #[arg(long, value_delimiter = ',', default_value = "intra,inter,dim")]
        axes: Vec<VariantAxis>,
    },
    /// Train, attack and evaluate in one go, then summarize over seeds.
    Pipeline(Common),
    /// Draw a sweep series file as a text chart.
    Render {
        file: PathBuf,
        #[arg(long, default_value_t = 60)]
        width: usize,
        #[arg(long, default_value_t = 16)]
        height: usize,
    },
}

/// Flags override the config file, and environment variables stand in
/// for absent flags.
#[derive(Args)]
struct Common {
    /// TOML experiment file; built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(short, long, env = "ROBUST_GNN_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(short = 'j', long, env = "ROBUST_GNN_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    dataset: Option<DatasetKind>,
    /// Directory holding edges.txt, labels.txt and features.txt.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Training mode of the single default defense.
    #[arg(long)]
    defense: Option<TrainMode>,
    /// Replaces the configured attack list.
    #[arg(long, value_delimiter = ',')]
    attacks: Vec<AttackKind>,
    /// Fixed flip budget instead of degree + slack.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Weight of the contrastive term.
    #[arg(long)]
    lambda: Option<f64>,
}

impl Common {
    fn load(&self) -> robust_gnn::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => validate_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(k) = self.dataset {
            cfg.dataset.kind = k;
        }
        if let Some(d) = &self.data_dir {
            cfg.dataset.dir = Some(d.clone());
        }
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if let Some(m) = self.defense {
            cfg.defense = m;
        }
        if !self.attacks.is_empty() {
            let template = cfg.attacks.first().cloned().unwrap_or_default();
            cfg.attacks = self
                .attacks
                .iter()
                .map(|&kind| AttackConfig {
                    kind,
                    ..template.clone()
                })
                .collect();
        }
        if let Some(b) = self.budget {
            cfg.attacks.iter_mut().for_each(|a| a.budget = Some(b));
        }
        if let Some(e) = self.epochs {
            cfg.training.epochs = e;
        }
        if let Some(lr) = self.lr {
            cfg.training.lr = lr;
        }
        if let Some(l) = self.lambda {
            cfg.training.lambda_acl = l;
        }
        let errs = cfg.violations();
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(vec![format!("threads: {e}")]))?;
        }
        Ok(cfg)
    }
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

fn runtime<T>(r: robust_gnn::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Runtime)
}

fn prepare(common: &Common) -> Result<ExperimentConfig, Failure> {
    let cfg = common.load().map_err(Failure::Config)?;
    runtime(fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::Io {
        path: cfg.output_dir.clone(),
        source: e,
    }))?;
    runtime(write(
        &cfg.output_dir.join("config.toml"),
        &to_toml(&cfg).map_err(Failure::Runtime)?,
    ))?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> robust_gnn::Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<16} {:<8} {:>7} {:>9} {:>7} {:>7}",
        "defense", "attack", "seeds", "accuracy", "std", "clean"
    );
    for r in rows {
        println!(
            "{:<16} {:<8} {:>7} {:>9.3} {:>7.3} {:>7.3}",
            r.defense,
            r.attack.as_str(),
            r.reports,
            r.mean_accuracy,
            r.std_accuracy,
            r.mean_clean_accuracy
        );
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train(common) => {
            let cfg = prepare(&common)?;
            runtime(
                cfg.seeds
                    .par_iter()
                    .try_for_each(|&s| train_seed(&cfg, s, &cfg.output_dir)),
            )?;
            println!(
                "trained {} defense(s) x {} seed(s) into {}",
                cfg.resolved_defenses().len(),
                cfg.seeds.len(),
                cfg.output_dir.display()
            );
        }
        Command::Attack(common) => {
            let cfg = prepare(&common)?;
            let traces = runtime(
                cfg.seeds
                    .par_iter()
                    .map(|&s| attack_seed(&cfg, s, &cfg.output_dir))
                    .collect::<robust_gnn::Result<Vec<_>>>(),
            )?;
            for (s, per_attack) in cfg.seeds.iter().zip(&traces) {
                for (a, ps) in cfg.attacks.iter().zip(per_attack) {
                    let flips: usize = ps.iter().map(|p| p.ops.len()).sum();
                    println!(
                        "seed {s}: {} flipped {flips} edges around {} targets",
                        a.kind.as_str(),
                        ps.len()
                    );
                }
            }
        }
        Command::Evaluate(common) => {
            let cfg = prepare(&common)?;
            let reports: Vec<EvalReport> = runtime(
                cfg.seeds
                    .par_iter()
                    .map(|&s| evaluate_seed(&cfg, s, &cfg.output_dir))
                    .collect::<robust_gnn::Result<Vec<_>>>(),
            )?
            .into_iter()
            .flatten()
            .collect();
            let rows = summarize(&reports);
            runtime(write(&cfg.output_dir.join("summary.csv"), &summary_to_csv(&rows)))?;
            print_summary(&rows);
        }
        Command::Sweep {
            common,
            budgets,
            axes,
        } => {
            let cfg = prepare(&common)?;
            let results = runtime(
                cfg.seeds
                    .iter()
                    .map(|&s| sweep_seed(&cfg, s, &axes, &budgets))
                    .collect::<robust_gnn::Result<Vec<_>>>(),
            )?;
            for (s, r) in cfg.seeds.iter().zip(&results) {
                let dir = cfg.output_dir.join(format!("seed-{s}"));
                runtime(fs::create_dir_all(&dir).map_err(|e| Error::Io {
                    path: dir.clone(),
                    source: e,
                }))?;
                runtime(write(&dir.join("sweep.csv"), &r.to_csv()))?;
            }
            let mean = runtime(mean_sweep(&results))?;
            let path = cfg.output_dir.join("sweep.csv");
            runtime(write(&path, &mean.to_csv()))?;
            print!("{}", render_series(&mean.points, 60, 12));
            println!("series written to {}", path.display());
        }
        Command::Pipeline(common) => {
            let cfg = common.load().map_err(Failure::Config)?;
            let outcome = runtime(run_pipeline(&cfg, &cfg.output_dir))?;
            print_summary(&outcome.summary);
            println!("artifacts in {}", outcome.output_dir.display());
        }
        Command::Render { file, width, height } => {
            let text = runtime(fs::read_to_string(&file).map_err(|e| Error::Io {
                path: file.clone(),
                source: e,
            }))?;
            let points = parse_series(&text).map_err(Failure::Config)?;
            print!("{}", render_series(&points, width, height));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}
