use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use panelscope::audio::{accuracy, train_shout_model, MfccConfig, MfccExtractor, ShoutDataset, ShoutTrainParams};
use panelscope::bias::{train_classifier, BiasTrainParams, CorpusSentence};
use panelscope::pipeline::{self, AnalyzeOptions, PipelineConfig, PipelineError};

const EXIT_PARTIAL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "panelscope", version, about = "Incivility and bias analytics for televised panel debates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyse every admitted video of the corpus into the result store.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; overrides the configuration.
        #[arg(long)]
        jobs: Option<usize>,
        /// Seed for every randomised step; overrides the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Restrict the run to these video ids.
        #[arg(long, num_args = 1..)]
        videos: Option<Vec<String>>,
    },
    /// Build the report tables from a result store.
    Report {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the shouting classifier on a directory of labelled WAV clips.
    TrainShout {
        /// Directory with WAV files and `labels.csv` (`file,labels`).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional JSON file with training parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Optional JSON file with MFCC settings.
        #[arg(long)]
        mfcc: Option<PathBuf>,
        /// Fraction of clips held out for evaluation.
        #[arg(long, default_value_t = 0.2)]
        test_fraction: f64,
    },
    /// Train the bias classifier on a `bias_corpus.jsonl` file.
    TrainBias {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional JSON file with training parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Dry-run ingest: load the configuration and parse every artifact.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Fatal(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Fatal(e.to_string())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("summary serializes"));
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Analyze {
            config,
            jobs,
            seed,
            videos,
        } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let options = AnalyzeOptions {
                videos: videos.map(|v| v.into_iter().collect::<BTreeSet<_>>()),
            };
            let summary = pipeline::analyze(&cfg, &options)?;
            print_json(&summary);
            Ok(!summary.has_failures())
        }
        Command::Report { store, out } => {
            let summary = pipeline::report(&store, &out)?;
            print_json(&summary);
            Ok(true)
        }
        Command::TrainShout {
            data,
            out,
            seed,
            params,
            mfcc,
            test_fraction,
        } => {
            let params: ShoutTrainParams = params.map(|p| read_json(&p)).transpose()?.unwrap_or_default();
            let mfcc: MfccConfig = mfcc.map(|p| read_json(&p)).transpose()?.unwrap_or_default();
            let extractor = MfccExtractor::new(mfcc).map_err(|e| CliError::Input(e.to_string()))?;
            let dataset = ShoutDataset::load(&data, &extractor).map_err(|e| CliError::Input(e.to_string()))?;
            let (train, test) = dataset.split(test_fraction, seed);
            let (blocks, labels) = train.flatten();
            let model = train_shout_model(&blocks, &labels, &params, seed).map_err(|e| CliError::Input(e.to_string()))?;
            let (test_blocks, test_labels) = test.flatten();
            let test_accuracy = if test_blocks.is_empty() {
                None
            } else {
                Some(accuracy(&model, &test_blocks, &test_labels).map_err(|e| CliError::Fatal(e.to_string()))?)
            };
            model.save(&out).map_err(|e| CliError::Fatal(e.to_string()))?;
            print_json(&serde_json::json!({
                "seed": seed,
                "train_clips": train.clips.len(),
                "test_clips": test.clips.len(),
                "train_blocks": blocks.len(),
                "test_blocks": test_blocks.len(),
                "test_accuracy": test_accuracy,
                "model": out,
            }));
            Ok(true)
        }
        Command::TrainBias {
            corpus,
            out,
            seed,
            params,
        } => {
            let params: BiasTrainParams = params.map(|p| read_json(&p)).transpose()?.unwrap_or_default();
            let text = std::fs::read_to_string(&corpus).map_err(|e| CliError::Input(format!("{}: {e}", corpus.display())))?;
            let sentences = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    serde_json::from_str::<CorpusSentence>(l)
                        .map_err(|e| CliError::Input(format!("{}:{}: {e}", corpus.display(), i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (model, report) = train_classifier(&sentences, &params, seed).map_err(|e| CliError::Input(e.to_string()))?;
            model.save(&out).map_err(|e| CliError::Fatal(e.to_string()))?;
            print_json(&report);
            Ok(true)
        }
        Command::Validate { config } => {
            let report = pipeline::validate_file(&config)?;
            print_json(&report);
            Ok(report.is_clean())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_PARTIAL),
        Err(CliError::Input(msg)) | Err(CliError::Fatal(msg)) => {
            log::error!("{msg}");
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
