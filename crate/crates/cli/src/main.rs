use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grnet::dataset::{
    generate_test_instances, generate_training_pairs, peek_domain, read_dataset, write_instances,
    write_pairs, Dataset, TestSetConfig, TrainingSetConfig,
};
use grnet::eval::report::{bucket_csv, size_csv, summary_text};
use grnet::eval::{run_bucket_study, run_experiment, run_size_study, summary_path};
use grnet::model::train::train_with_progress;
use grnet::model::{load_checkpoint, save_checkpoint, Checkpoint, ModelConfig};
use grnet::planning::{domain_from_id, Blocksworld};
use grnet::recognizer::{recognize_with, ScoreMode};
use grnet::{Error, Result};

/// Goal recognition from observed action labels.
#[derive(Parser)]
#[command(name = "grnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate training pairs and/or test instances for Blocksworld.
    GenData(GenData),
    /// Train a model on a training-pair file.
    Train(Train),
    /// Evaluate a model on a test-instance file.
    Eval(Eval),
    /// Print goal scores and the selected goal for every instance in a file.
    Recognize(Recognize),
    /// Accuracy per recognizability class (C1..C9).
    Buckets(Buckets),
    /// Retrain on growing fractions of the training set and evaluate each.
    SizeStudy(SizeStudy),
}

#[derive(Args)]
struct GenData {
    /// Number of blocks.
    #[arg(long, default_value_t = 7)]
    blocks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write this many training pairs to --train-out.
    #[arg(long, default_value_t = 5000)]
    pairs: usize,
    #[arg(long)]
    train_out: Option<PathBuf>,
    /// Training observability range, as min,max.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.3, 0.7])]
    train_observability: Vec<f64>,
    /// Candidate-set groups for the test set.
    #[arg(long, default_value_t = 200)]
    groups: usize,
    /// Hidden goals drawn from each candidate set.
    #[arg(long, default_value_t = 3)]
    hidden_per_group: usize,
    #[arg(long)]
    test_out: Option<PathBuf>,
    /// Test observability levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7])]
    observability: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    goal_size_min: usize,
    #[arg(long, default_value_t = 4)]
    goal_size_max: usize,
    #[arg(long, default_value_t = 5)]
    goal_set_min: usize,
    #[arg(long, default_value_t = 10)]
    goal_set_max: usize,
    /// Largest size difference between a distractor and the hidden goal.
    #[arg(long, default_value_t = 1)]
    size_jitter: usize,
    /// Also write the vocabulary manifest here.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// TOML model configuration; unset keys take the desk defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the published network size instead of the desk defaults.
    #[arg(long, conflicts_with = "config")]
    published_size: bool,
    /// Override the configured epoch count.
    #[arg(long)]
    epochs: Option<usize>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelConfig> {
        let mut cfg = match (&self.config, self.published_size) {
            (Some(p), _) => ModelConfig::load(p)?,
            (None, true) => ModelConfig::published(),
            (None, false) => ModelConfig::default(),
        };
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if let Some(s) = self.seed {
            cfg.rng_seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct Train {
    /// Training-pair file.
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct Eval {
    /// Test-instance file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Per-instance records (JSON Lines); the CSV summary goes next to it.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct Recognize {
    /// File with one or more instances.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Score goals by mean instead of sum of fluent predictions.
    #[arg(long)]
    mean: bool,
}

#[derive(Args)]
struct Buckets {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SizeStudy {
    /// Training-pair file.
    #[arg(long)]
    train: PathBuf,
    /// Test-instance file.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.4, 0.6, 0.8, 1.0])]
    fractions: Vec<f64>,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

/// Reads a dataset file against the domain named in its first record.
fn load_dataset(path: &Path) -> Result<(Blocksworld, Dataset)> {
    let id = peek_domain(path)?.ok_or(Error::EmptyInput("dataset file has no records"))?;
    let domain = domain_from_id(&id)?;
    let data = read_dataset(path, domain.vocabulary())?;
    Ok((domain, data))
}

fn load_model(path: &Path, domain: &Blocksworld) -> Result<Checkpoint> {
    load_checkpoint(path, Some(domain.vocabulary()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text)?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn gen_data(a: &GenData) -> Result<()> {
    let domain = Blocksworld::new(a.blocks)?;
    let vocab = domain.vocabulary();
    if a.train_out.is_none() && a.test_out.is_none() && a.vocab_out.is_none() {
        return Err(Error::InvalidConfig(
            "nothing to do: give --train-out, --test-out or --vocab-out".into(),
        ));
    }
    if let Some(path) = &a.vocab_out {
        vocab.write_manifest(path)?;
        eprintln!("wrote {} ({} fluents, {} actions)", path.display(), vocab.num_fluents(), vocab.num_actions());
    }
    if let Some(path) = &a.train_out {
        let cfg = TrainingSetConfig {
            goal_size_min: a.goal_size_min,
            goal_size_max: a.goal_size_max,
            observability_min: a.train_observability[0],
            observability_max: a.train_observability[1],
        };
        let pairs = generate_training_pairs(&domain, a.pairs, &cfg, grnet::rng::derive(a.seed, 0))?;
        write_pairs(path, &pairs, vocab)?;
        eprintln!("wrote {} ({} training pairs)", path.display(), pairs.len());
    }
    if let Some(path) = &a.test_out {
        let cfg = TestSetConfig {
            groups: a.groups,
            hidden_per_group: a.hidden_per_group,
            goal_size_min: a.goal_size_min,
            goal_size_max: a.goal_size_max,
            goal_set_min: a.goal_set_min,
            goal_set_max: a.goal_set_max,
            size_jitter: a.size_jitter,
            observabilities: a.observability.clone(),
            ..TestSetConfig::default()
        };
        let instances = generate_test_instances(&domain, &cfg, grnet::rng::derive(a.seed, 1))?;
        write_instances(path, &instances, vocab)?;
        eprintln!("wrote {} ({} test instances)", path.display(), instances.len());
    }
    Ok(())
}

fn train(a: &Train) -> Result<()> {
    let cfg = a.model.resolve()?;
    let (domain, data) = load_dataset(&a.data)?;
    eprintln!(
        "training |E|={} |LSTM|={} on {} pairs for {} epochs",
        cfg.embedding_dim,
        cfg.hidden_size,
        data.pairs.len(),
        cfg.epochs
    );
    let (params, report) = train_with_progress(&data.pairs, &cfg, domain.vocabulary(), |e| {
        eprintln!(
            "epoch {:>3}  train {:.5}  validation {:.5}",
            e.epoch, e.train_loss, e.validation_loss
        );
    })?;
    let ckpt = Checkpoint::new(cfg, domain.vocabulary(), params, report.history.clone());
    save_checkpoint(&a.out, &ckpt)?;
    println!(
        "kept epoch {} (validation loss {:.5}) after {:.1}s; wrote {}",
        report.best_epoch,
        report.final_validation_loss,
        report.seconds,
        a.out.display()
    );
    Ok(())
}

fn eval(a: &Eval) -> Result<()> {
    let table = run_experiment(&a.data, &a.model, &a.report)?;
    print!("{}", summary_text(&table));
    eprintln!(
        "wrote {} and {}",
        a.report.display(),
        summary_path(&a.report).display()
    );
    Ok(())
}

fn recognize(a: &Recognize) -> Result<()> {
    let (domain, data) = load_dataset(&a.instance)?;
    let ckpt = load_model(&a.model, &domain)?;
    if data.instances.is_empty() {
        return Err(Error::EmptyInput("file contains no recognition instances"));
    }
    let mode = if a.mean { ScoreMode::Mean } else { ScoreMode::Sum };
    for inst in &data.instances {
        let r = recognize_with(inst, &ckpt.params, domain.vocabulary(), mode)?;
        println!("instance {} ({} observations)", inst.id, inst.trace.labels.len());
        for (i, (goal, score)) in inst.goal_set.iter().zip(&r.scores).enumerate() {
            let labels: Vec<String> = goal.iter().map(|f| f.label()).collect();
            let mark = match (i == r.selected_index, i == inst.hidden_goal_index) {
                (true, true) => "selected, hidden",
                (true, false) => "selected",
                (false, true) => "hidden",
                (false, false) => "",
            };
            println!("  G{i:<2} {score:>8.4}  {}  {mark}", labels.join(" "));
        }
        println!("  latency {:.3} ms", r.latency * 1e3);
    }
    Ok(())
}

fn buckets(a: &Buckets) -> Result<()> {
    let (domain, data) = load_dataset(&a.data)?;
    let ckpt = load_model(&a.model, &domain)?;
    let rows = run_bucket_study(&data.instances, &ckpt.params, domain.vocabulary())?;
    write_or_print(a.out.as_deref(), &bucket_csv(&rows))
}

fn size_study(a: &SizeStudy) -> Result<()> {
    let cfg = a.model.resolve()?;
    let (domain, train) = load_dataset(&a.train)?;
    let test = read_dataset(&a.test, domain.vocabulary())?;
    let rows = run_size_study(
        &train.pairs,
        &a.fractions,
        &test.instances,
        &cfg,
        domain.vocabulary(),
        |row| eprintln!("fraction {} ({} pairs): accuracy {:.2}", row.fraction, row.train_pairs, row.accuracy),
    )?;
    write_or_print(a.out.as_deref(), &size_csv(&rows))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Recognize(a) => recognize(a),
        Command::Buckets(a) => buckets(a),
        Command::SizeStudy(a) => size_study(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_incompatibility() { 2 } else { 3 })
        }
    }
}
