//! `multiris`: generate channel data, label it, train the learned phase
//! configuration policies and evaluate them.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use multiris_core::harness::{
    emit_results, read_rates, Approach, Experiment, ExperimentConfig, Metrics, TrainedApproach, RATES_FILE,
};
use multiris_core::learning::io::{read_dataset, read_predictor, read_realizations, write_dataset, write_predictor, write_realizations};
use multiris_core::learning::{EncoderKind, Split};

const CONFIG_FILE: &str = "config.txt";

#[derive(Parser)]
#[command(name = "multiris", version, about = "Multi-RIS phase configuration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the train and test channel realizations.
    GenData(Common),
    /// Run the exhaustive oracle on stored realizations and write training sets.
    Label(Common),
    /// Train the learned approaches on the labeled training sets.
    Train(Common),
    /// Evaluate every approach on the stored test split.
    Eval(Common),
    /// Generate, label, train and evaluate in one go.
    RunSetup(Common),
    /// Summarize the results of one or more runs.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Output (and working) directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Flat key=value config file. Defaults to `<out>/config.txt` when present.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Setup preset: 1, 2, 3 or custom.
    #[arg(long)]
    setup: Option<String>,
    /// Comma-separated approaches, or `all`.
    #[arg(long, default_value = "all")]
    approach: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// Hidden layer widths: `table`, `formula` or a comma-separated list.
    #[arg(long)]
    nn_dims: Option<String>,
    /// Largest number of candidates an exhaustive search may score.
    #[arg(long)]
    oracle_budget: Option<u64>,
    /// Extra config overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Result directories to summarize.
    #[arg(long = "out", required = true)]
    out: Vec<PathBuf>,
    /// Also write `cdf_<N>.csv` with N evenly spaced thresholds.
    #[arg(long)]
    cdf_points: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut o = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        push("setup", self.setup.clone());
        push("seed", self.seed.map(|v| v.to_string()));
        push("n_train", self.n_train.map(|v| v.to_string()));
        push("n_test", self.n_test.map(|v| v.to_string()));
        push("nn_dims", self.nn_dims.clone());
        push("oracle_budget", self.oracle_budget.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
            o.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(o)
    }

    fn config(&self) -> Result<ExperimentConfig> {
        let stored = self.out.join(CONFIG_FILE);
        let path = self.config.clone().or_else(|| stored.exists().then_some(stored));
        let text = match &path {
            Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            None => String::new(),
        };
        ExperimentConfig::parse_with_overrides(&text, &self.overrides()?)
            .with_context(|| format!("config {}", path.as_deref().map_or("<defaults>".into(), |p| p.display().to_string())))
    }

    fn experiment(&self) -> Result<Experiment> {
        Ok(Experiment::new(self.config()?)?)
    }

    fn approaches(&self) -> Result<Vec<Approach>> {
        Ok(Approach::parse_list(&self.approach)?)
    }

    fn learned(&self) -> Result<Vec<Approach>> {
        Ok(self.approaches()?.into_iter().filter(|a| a.is_learned()).collect())
    }

    fn save_config(&self, cfg: &ExperimentConfig) -> Result<()> {
        fs::create_dir_all(&self.out)?;
        fs::write(self.out.join(CONFIG_FILE), cfg.to_text())?;
        Ok(())
    }
}

fn split_name(split: Split) -> &'static str {
    match split {
        Split::Train => "train",
        Split::Test => "test",
    }
}

fn realization_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("{}.real", split_name(split)))
}

fn dataset_path(dir: &Path, kind: EncoderKind) -> PathBuf {
    dir.join(format!("train_{}.ds", kind.to_string().replace(':', "_")))
}

fn predictor_path(dir: &Path, approach: Approach, net: usize) -> PathBuf {
    dir.join(format!("model_{approach}_{net}.pred"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn gen_data(args: &Common) -> Result<()> {
    let exp = args.experiment()?;
    args.save_config(&exp.config)?;
    for split in [Split::Train, Split::Test] {
        let records = exp.draw(split)?;
        let path = realization_path(&args.out, split);
        let mut out = create(&path)?;
        write_realizations(&records, &mut out)?;
        out.flush()?;
        eprintln!("wrote {} realizations to {}", records.len(), path.display());
    }
    Ok(())
}

fn label(args: &Common) -> Result<()> {
    let exp = args.experiment()?;
    let records = read_realizations(open(&realization_path(&args.out, Split::Train))?)?;
    let labeled = exp.label_records(records)?;
    let mut kinds: Vec<EncoderKind> = Vec::new();
    for a in args.learned()? {
        for k in a.encoders(exp.problem.num_ris()) {
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
    }
    for kind in kinds {
        let ds = multiris_core::learning::build_dataset(&exp.problem, kind, &labeled)?;
        let path = dataset_path(&args.out, kind);
        let mut out = create(&path)?;
        write_dataset(&ds, &mut out)?;
        out.flush()?;
        eprintln!("wrote {} {kind} samples to {}", ds.len(), path.display());
    }
    Ok(())
}

fn train(args: &Common) -> Result<()> {
    let exp = args.experiment()?;
    for approach in args.learned()? {
        let datasets = approach
            .encoders(exp.problem.num_ris())
            .into_iter()
            .map(|k| Ok(read_dataset(open(&dataset_path(&args.out, k))?)?))
            .collect::<Result<Vec<_>>>()?;
        let trained = exp.train_on(approach, &datasets)?;
        for (i, p) in trained.predictors.iter().enumerate() {
            let mut out = create(&predictor_path(&args.out, approach, i))?;
            write_predictor(p, &mut out)?;
            out.flush()?;
        }
        let last: Vec<String> = trained.loss_curves.iter().filter_map(|c| c.last()).map(|l| format!("{l:.4}")).collect();
        eprintln!("trained {approach}: final mse {}", last.join(" "));
    }
    Ok(())
}

fn load_trained(exp: &Experiment, dir: &Path, approach: Approach) -> Result<TrainedApproach> {
    let n = approach.encoders(exp.problem.num_ris()).len();
    let predictors = (0..n)
        .map(|i| {
            let path = predictor_path(dir, approach, i);
            read_predictor(open(&path)?).with_context(|| format!("reading {}", path.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainedApproach { approach, predictors, loss_curves: Vec::new() })
}

fn eval(args: &Common) -> Result<()> {
    let exp = args.experiment()?;
    let test = exp.label_records(read_realizations(open(&realization_path(&args.out, Split::Test))?)?)?;
    let trained = args
        .learned()?
        .into_iter()
        .map(|a| load_trained(&exp, &args.out, a))
        .collect::<Result<Vec<_>>>()?;
    let metrics = exp.evaluate(&test, &trained)?;
    finish(args, &exp.config, &metrics, &trained)
}

fn run_setup(args: &Common) -> Result<()> {
    let cfg = args.config()?;
    args.save_config(&cfg)?;
    let out = multiris_core::harness::run_experiment(&cfg, &args.approaches()?)?;
    finish(args, &cfg, &out.metrics, &out.trained)
}

fn finish(args: &Common, cfg: &ExperimentConfig, metrics: &Metrics, trained: &[TrainedApproach]) -> Result<()> {
    emit_results(&args.out, cfg, metrics, trained)?;
    print_table(&[(args.out.display().to_string(), metrics.clone())]);
    Ok(())
}

fn print_table(runs: &[(String, Metrics)]) {
    let mut approaches: Vec<Approach> = runs.iter().flat_map(|(_, m)| m.approaches.iter().map(|a| a.approach)).collect();
    approaches.sort();
    approaches.dedup();
    print!("{:<12}", "approach");
    for (name, _) in runs {
        print!(" {:>24}", name);
    }
    println!();
    for a in approaches {
        print!("{:<12}", a.name());
        for (_, m) in runs {
            match m.get(a) {
                Some(am) => print!(" {:>24}", format!("{:.4} ({:.3} b/s/Hz)", am.normalized, am.mean_rate)),
                None => print!(" {:>24}", "-"),
            }
        }
        println!();
    }
}

fn report(args: &ReportArgs) -> Result<()> {
    let mut runs = Vec::new();
    for dir in &args.out {
        let path = dir.join(RATES_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let (indices, rates) = read_rates(&text)?;
        let metrics = Metrics::from_rates(indices, rates, args.cdf_points.unwrap_or(101))?;
        if let Some(points) = args.cdf_points {
            let cdf = dir.join(format!("cdf_{points}.csv"));
            fs::write(&cdf, multiris_core::harness::cdf_csv(&metrics))?;
            eprintln!("wrote {}", cdf.display());
        }
        runs.push((dir.display().to_string(), metrics));
    }
    if runs.is_empty() {
        bail!("nothing to report");
    }
    print_table(&runs);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Label(a) => label(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::RunSetup(a) => run_setup(a),
        Command::Report(a) => report(a),
    }
}
