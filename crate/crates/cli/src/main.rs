use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hybridaug::Registry;

mod commands;

#[derive(Debug, Parser)]
#[command(name = "hybridaug", version, about = "Frequency-band data augmentation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split one image into low- and high-frequency parts.
    Decompose(DecomposeArgs),
    /// Augment a directory of labeled images.
    Augment(AugmentArgs),
    /// Corruption error and mean corruption error from prediction files.
    MetricsMce(MceArgs),
    /// AUROC of in-distribution versus out-of-distribution scores.
    MetricsAuroc(AurocArgs),
    /// Train the toy classifier with and without augmentation.
    ToyTrain(ToyTrainArgs),
}

fn odd_kernel_size(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|e| format!("{e}"))?;
    if k % 2 == 1 {
        Ok(k)
    } else {
        Err(format!("kernel size must be odd, got {k}"))
    }
}

fn positive_sigma(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("sigma must be positive, got {v}"))
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("probability must lie in [0, 1], got {v}"))
    }
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Input image (.png or .hat).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_lf: PathBuf,
    /// High-frequency output. PNG output is shifted by +0.5 for display.
    #[arg(long)]
    out_hf: PathBuf,
    #[arg(long, default_value = "3", value_parser = odd_kernel_size)]
    kernel_size: usize,
    #[arg(long, default_value = "0.5", value_parser = positive_sigma)]
    sigma: f64,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[arg(long, value_parser = mode_names())]
    mode: String,
    #[arg(long)]
    input_dir: PathBuf,
    /// CSV with header `image_id,label`; ids are file stems.
    #[arg(long)]
    labels: PathBuf,
    /// Must not exist yet, or be empty.
    #[arg(long)]
    output_dir: PathBuf,
    /// JSON file with augmentation settings. Flags given explicitly win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// [default: 0.6]
    #[arg(long, value_parser = probability)]
    p_paired: Option<f64>,
    /// [default: 0.5]
    #[arg(long, value_parser = probability)]
    p_single: Option<f64>,
    /// [default: 0.6]
    #[arg(long, value_parser = probability)]
    p_inner: Option<f64>,
    /// [default: 3]
    #[arg(long, value_parser = odd_kernel_size)]
    kernel_size: Option<usize>,
    /// [default: 0.5]
    #[arg(long, value_parser = positive_sigma)]
    sigma: Option<f64>,
    #[arg(long, default_value = "128", value_parser = clap::value_parser!(u64).range(1..))]
    batch: u64,
}

fn mode_names() -> clap::builder::PossibleValuesParser {
    let names: Vec<String> = Registry::with_builtins().names().map(str::to_owned).collect();
    clap::builder::PossibleValuesParser::new(names)
}

#[derive(Debug, Args)]
struct MceArgs {
    /// Holds `<corruption>/<severity>.csv` prediction files.
    #[arg(long)]
    pred_dir: PathBuf,
    /// CSV with header `image_id,label`.
    #[arg(long)]
    truth: PathBuf,
    /// Reference model error table, header `corruption,severity,error`.
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, default_value = "mce_report.json")]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct AurocArgs {
    #[arg(long)]
    id_scores: PathBuf,
    #[arg(long)]
    ood_scores: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ToyAugment {
    None,
    #[value(name = "ha_p")]
    HaP,
    #[value(name = "ha_pp_p")]
    HaPpP,
}

impl ToyAugment {
    fn mode(self) -> Option<&'static str> {
        match self {
            ToyAugment::None => None,
            ToyAugment::HaP => Some("ha_p"),
            ToyAugment::HaPpP => Some("ha_pp_p"),
        }
    }
}

#[derive(Debug, Args)]
struct ToyTrainArgs {
    #[arg(long, value_enum, default_value = "ha_p")]
    augment: ToyAugment,
    /// Runs seeds `0..seeds`.
    #[arg(long, default_value = "5", value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    #[arg(long, default_value = "toy_train_report.json")]
    report: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match cli.command {
        Command::Decompose(a) => commands::decompose(&a),
        Command::Augment(a) => commands::augment(&a),
        Command::MetricsMce(a) => commands::metrics_mce(&a),
        Command::MetricsAuroc(a) => commands::metrics_auroc(&a),
        Command::ToyTrain(a) => commands::toy_train(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
