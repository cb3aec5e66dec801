//! Command-line harness over the library: simulate scenarios, train and run
//! classifiers, check policies over event logs, and replay recorded runs.
//!
//! Exit codes: 0 on success, 1 on any input error, 2 on an internal
//! invariant failure (a replay that does not reproduce its transcript).

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use toykit::checker::{Checker, CheckerOutput};
use toykit::config::RunConfig;
use toykit::event::EmotionLabel;
use toykit::policy;
use toykit::predict::{
    self, train, FeatureKind, MlpModel, TrainingConfig, FACE_FEATURE_COUNT, VOICE_FEATURE_COUNT,
};
use toykit::sim::{self, recorded_transcript, replay, run_pipeline, Scenario};
use toykit::store;
use toykit::synth;

#[derive(Parser)]
#[command(
    name = "toysim",
    about = "Smart-toy behavioural pipeline simulator",
    version
)]
struct Cli {
    /// Override the seed used by the command (scenario seed, dataset seed,
    /// or training seed, depending on the command).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario end to end and write all artifacts to --out.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train a classifier on a labelled dataset file and save the model.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 16)]
        hidden: usize,
        #[arg(long, default_value_t = 0.03)]
        learning_rate: f64,
        #[arg(long, default_value_t = 200)]
        epochs: u32,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
    },
    /// Assess the matching frames of an event log with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Run the checker over an event log and print directives and patterns.
    Check {
        #[arg(long)]
        policies: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Parse a policy file and print its canonical form.
    ParsePolicy { file: PathBuf },
    /// Reproduce the transcript of a recorded run from its event log.
    Replay {
        #[arg(long)]
        data: PathBuf,
    },
    /// Generate a labelled synthetic feature dataset.
    GenDataset {
        #[arg(long, value_enum)]
        kind: DatasetKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        per_label: usize,
        /// Use all six labels instead of the five expressive ones.
        #[arg(long)]
        all_labels: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetKind {
    Face,
    Voice,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            config,
        } => {
            let mut scenario = Scenario::load(&scenario).map_err(|e| e.to_string())?;
            if let Some(seed) = cli.seed {
                scenario.seed = seed;
            }
            let config = load_config(config)?;
            let result = run_pipeline(&scenario, &config, &out).map_err(|e| e.to_string())?;
            println!(
                "simulated {} -> {} ({} transcript lines, {} directives, {} switches, {} alerts)",
                scenario.child,
                out.display(),
                result.transcript.lines().len(),
                result.directives.len(),
                result.switches.len(),
                result.alerts.len()
            );
            for score in &result.scores {
                println!(
                    "segment {} ({}): top-1 {:.3} over {} frames",
                    score.segment,
                    score.true_emotion,
                    score.fraction(),
                    score.frames
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Train {
            dataset,
            model,
            hidden,
            learning_rate,
            epochs,
            batch_size,
        } => {
            let data = store::load_dataset(&dataset).map_err(|e| e.to_string())?;
            if data.is_empty() {
                return Err("dataset is empty".into());
            }
            let input = data[0].0.values.len();
            if let Some((i, _)) = data
                .iter()
                .enumerate()
                .find(|(_, (fv, _))| fv.values.len() != input)
            {
                return Err(format!("dataset record {i} has inconsistent dimensions"));
            }
            let seed = cli.seed.unwrap_or(0);
            let raw: Vec<(Vec<f64>, EmotionLabel)> =
                data.into_iter().map(|(fv, l)| (fv.values, l)).collect();
            let init = MlpModel::new(input, hidden, seed);
            let cfg = TrainingConfig {
                learning_rate,
                epochs,
                batch_size,
                seed,
            };
            let (trained, curve) = train(&init, &raw, &cfg).map_err(|e| e.to_string())?;
            store::save_model(&model, &trained).map_err(|e| e.to_string())?;
            println!(
                "trained {}-{}-6 on {} samples: loss {:.6} -> {:.6}, saved to {}",
                input,
                hidden,
                raw.len(),
                curve.first().copied().unwrap_or(0.0),
                curve.last().copied().unwrap_or(0.0),
                model.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict { model, events } => {
            let model = store::load_model(&model).map_err(|e| e.to_string())?;
            let events = store::read_event_log(&events).map_err(|e| e.to_string())?;
            // Route through whichever pipeline matches the model's input
            // width; a zeroed stand-in fills the unused side.
            let wanted = match model.input_size() {
                FACE_FEATURE_COUNT => FeatureKind::Face,
                VOICE_FEATURE_COUNT => FeatureKind::Voice,
                other => {
                    return Err(format!(
                        "model input width {other} matches neither face ({FACE_FEATURE_COUNT}) nor voice ({VOICE_FEATURE_COUNT}) features"
                    ))
                }
            };
            let (face_model, voice_model) = match wanted {
                FeatureKind::Face => (model, MlpModel::zeroed(VOICE_FEATURE_COUNT, 1)),
                FeatureKind::Voice => (MlpModel::zeroed(FACE_FEATURE_COUNT, 1), model),
            };
            let mut printed = 0;
            for e in &events {
                if let Some(a) = predict::predict_event(&face_model, &voice_model, e, None)
                    .map_err(|e| e.to_string())?
                {
                    if a.kind == wanted {
                        println!("{}", a.transcript_line());
                        printed += 1;
                    }
                }
            }
            eprintln!("assessed {printed} of {} events", events.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            policies,
            events,
            config,
        } => {
            let text = std::fs::read_to_string(&policies)
                .map_err(|e| format!("cannot read {}: {e}", policies.display()))?;
            let set = policy::parse_policy_set(&text).map_err(|e| e.to_string())?;
            let violations = policy::validate_policy_set(&set);
            if !violations.is_empty() {
                for v in &violations {
                    eprintln!("policy validation: {v}");
                }
                return Err(format!(
                    "{} policy validation violation(s)",
                    violations.len()
                ));
            }
            let checker_config = load_config(config)?.checker;
            let mut checker = Checker::new(set, checker_config).map_err(|e| e.to_string())?;
            let events = store::read_event_log(&events).map_err(|e| e.to_string())?;
            for e in &events {
                for output in checker.ingest(e).map_err(|e| e.to_string())? {
                    match output {
                        CheckerOutput::Directive(d) => println!("{}", d.transcript_line()),
                        CheckerOutput::Pattern(p) => println!("{p}"),
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ParsePolicy { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
            let set = policy::parse_policy_set(&text).map_err(|e| e.to_string())?;
            let violations = policy::validate_policy_set(&set);
            if !violations.is_empty() {
                for v in &violations {
                    eprintln!("policy validation: {v}");
                }
                return Err(format!(
                    "{} policy validation violation(s)",
                    violations.len()
                ));
            }
            print!("{}", policy::render_policy_set(&set));
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { data } => {
            let result = replay(&data).map_err(|e| e.to_string())?;
            let regenerated = result.transcript.to_text();
            print!("{regenerated}");
            let recorded = recorded_transcript(&data).map_err(|e| e.to_string())?;
            if regenerated != recorded {
                eprintln!(
                    "replay diverged from {}: regenerated {} lines, recorded {} lines",
                    data.join(sim::TRANSCRIPT_FILE).display(),
                    result.transcript.lines().len(),
                    recorded.lines().count()
                );
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GenDataset {
            kind,
            out,
            per_label,
            all_labels,
        } => {
            let labels: &[EmotionLabel] = if all_labels {
                &EmotionLabel::ALL
            } else {
                &synth::EXPRESSIVE
            };
            let seed = cli.seed.unwrap_or(synth::DATASET_SEED);
            let dataset = match kind {
                DatasetKind::Face => synth::synthetic_face_dataset(labels, per_label, seed),
                DatasetKind::Voice => synth::synthetic_voice_dataset(labels, per_label, seed),
            };
            store::save_dataset(&out, &dataset).map_err(|e| e.to_string())?;
            println!("wrote {} samples to {}", dataset.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(path: Option<PathBuf>) -> Result<RunConfig, String> {
    match path {
        Some(p) => RunConfig::load(&p).map_err(|e| e.to_string()),
        None => Ok(RunConfig::default()),
    }
}
