//! `eegtda`: the study pipeline as one binary.
//!
//! Exit codes: 0 ok, 2 invalid configuration, 3 input error, 4 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eegtda::learning::{Grouping, Protocol};
use eegtda::pipeline::{cmd_run, cmd_stage, InputSource, PipelineConfig, PipelineError, RecordingsInput, StageName};
use eegtda::signal_io::CohortSpec;

#[derive(Parser)]
#[command(name = "eegtda", version, about = "Topological features of EEG point clouds for stress classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every stage in memory, writing the full output tree.
    Run(Common),
    /// Synthetic recordings, questionnaire scores and ground truth.
    Synth(Common),
    /// Band-pass and notch filter raw recordings.
    Preprocess(StageArgs),
    /// Cut filtered recordings into trials and embed each as a point cloud.
    Embed(StageArgs),
    /// Rips persistence diagrams of the point clouds.
    Persist(StageArgs),
    /// Labels, questionnaire t-tests and the feature matrix.
    Features(StageArgs),
    /// Cross-validated classifier report.
    Evaluate(StageArgs),
    /// Per-segment t-SNE of the feature matrix.
    Tsne(StageArgs),
    /// SVG diagrams, barcodes and t-SNE scatters.
    Plot(StageArgs),
    /// Print the fully defaulted config for a seed.
    Config(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Cv5,
    Holdout,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupingArg {
    Subject,
    Trial,
}

#[derive(Args)]
struct Common {
    /// JSON config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON cohort spec replacing the input section.
    #[arg(long, conflicts_with = "recordings")]
    cohort: Option<PathBuf>,
    /// Directory of recording CSVs replacing the input section.
    #[arg(long, requires = "forms")]
    recordings: Option<PathBuf>,
    /// Questionnaire CSV for `--recordings`.
    #[arg(long)]
    forms: Option<PathBuf>,
    #[arg(long)]
    f_low: Option<f64>,
    #[arg(long)]
    f_high: Option<f64>,
    /// Notch centre frequency, Hz.
    #[arg(long)]
    notch: Option<f64>,
    #[arg(long)]
    notch_q: Option<f64>,
    /// Band-pass prototype order (even).
    #[arg(long)]
    order: Option<usize>,
    /// Forward-only filtering instead of forward-backward.
    #[arg(long)]
    single_pass: bool,
    #[arg(long)]
    window_s: Option<f64>,
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    #[arg(long, value_enum)]
    grouping: Option<GroupingArg>,
}

#[derive(Args)]
struct StageArgs {
    #[command(flatten)]
    common: Common,
    /// Directory holding the previous stage's files (default: output directory).
    #[arg(long)]
    input: Option<PathBuf>,
}

fn read_cohort(path: &Path) -> Result<CohortSpec, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::config(format!("cannot read cohort spec {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::config(format!("cohort spec {}: {e}", path.display())))
}

impl Common {
    fn resolve(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = match (&self.config, self.seed) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| PipelineError::config(format!("cannot read config {}: {e}", path.display())))?;
                PipelineConfig::from_json(&text)?
            }
            (None, Some(seed)) => PipelineConfig::with_seed(seed),
            (None, None) => return Err(PipelineError::config("give --config or --seed; there is no implicit seed")),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = Some(out.clone());
        }
        if let Some(path) = &self.cohort {
            cfg.input = InputSource::Cohort(read_cohort(path)?);
        }
        if let (Some(dir), Some(forms)) = (&self.recordings, &self.forms) {
            cfg.input = InputSource::Recordings(RecordingsInput { dir: dir.clone(), forms: forms.clone() });
        }
        let f = &mut cfg.filter;
        if let Some(v) = self.f_low {
            f.f_low_hz = v;
        }
        if let Some(v) = self.f_high {
            f.f_high_hz = v;
        }
        if let Some(v) = self.notch {
            f.notch_hz = v;
        }
        if let Some(v) = self.notch_q {
            f.notch_q = v;
        }
        if let Some(v) = self.order {
            f.order = v;
        }
        if self.single_pass {
            f.zero_phase = false;
        }
        if let Some(v) = self.window_s {
            cfg.window_s = v;
        }
        if let Some(p) = self.protocol {
            cfg.evaluation.protocol = match p {
                ProtocolArg::Cv5 => Protocol::Cv5,
                ProtocolArg::Holdout => Protocol::Holdout,
            };
        }
        if let Some(g) = self.grouping {
            cfg.evaluation.grouping = match g {
                GroupingArg::Subject => Grouping::BySubject,
                GroupingArg::Trial => Grouping::ByTrial,
            };
        }
        Ok(cfg)
    }
}

fn stage(name: StageName, args: &StageArgs) -> Result<(), PipelineError> {
    let cfg = args.common.resolve()?;
    cmd_stage(name, &cfg, args.input.as_deref(), None)?;
    eprintln!("{name}: wrote {}", cfg.output_dir()?.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let summary = cmd_run(&cfg)?;
            println!(
                "{} subjects, {} trials, config {}",
                summary.n_subjects,
                summary.n_trials,
                &summary.config_hash[..12]
            );
            println!("{:<5} {:<10} {:>9} {:>7} {:>7} {:>7}", "model", "segment", "accuracy", "sd", "f1", "kappa");
            for e in &summary.report.entries {
                println!(
                    "{:<5} {:<10} {:>9.3} {:>7.3} {:>7.3} {:>7.3}",
                    e.model.as_str(),
                    e.segment.as_str(),
                    e.accuracy_mean,
                    e.accuracy_sd,
                    e.f1,
                    e.kappa
                );
            }
            println!("outputs in {}", cfg.output_dir()?.display());
            Ok(())
        }
        Command::Synth(common) => {
            let cfg = common.resolve()?;
            cmd_stage(StageName::Synth, &cfg, None, None)?;
            eprintln!("synth: wrote {}", cfg.output_dir()?.display());
            Ok(())
        }
        Command::Preprocess(a) => stage(StageName::Preprocess, &a),
        Command::Embed(a) => stage(StageName::Embed, &a),
        Command::Persist(a) => stage(StageName::Persist, &a),
        Command::Features(a) => stage(StageName::Features, &a),
        Command::Evaluate(a) => stage(StageName::Evaluate, &a),
        Command::Tsne(a) => stage(StageName::Tsne, &a),
        Command::Plot(a) => stage(StageName::Plot, &a),
        Command::Config(common) => {
            println!("{}", common.resolve()?.to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
