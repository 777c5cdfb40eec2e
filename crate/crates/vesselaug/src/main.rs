//! Thin command-line front end; all logic lives in the library's `cli`
//! module.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vesselaug::cli::{
    self, AugmentCmd, EvalCmd, JitterCmd, PreviewCmd, TophatCmd,
};

#[derive(Parser)]
#[command(
    name = "vesselaug",
    version,
    about = "Vessel-aware augmentation, jitter sweeps and evaluation for retinal fundus images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate augmented copies of a dataset.
    Augment {
        /// Dataset manifest to augment.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Shared TOML configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed override (default comes from the config, fixed at 42).
        #[arg(long)]
        seed: Option<u64>,
        /// Draw the seed from OS entropy; it is still logged for
        /// reproducibility.
        #[arg(long)]
        entropy_seed: bool,
        /// Worker threads (0 = automatic). Never changes output bytes.
        #[arg(long)]
        threads: Option<usize>,
        /// Augmented samples per input image.
        #[arg(long)]
        samples: Option<u32>,
    },
    /// Write normalized multi-angle top-hat vessel maps.
    Tophat {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Apply one brightness/contrast/saturation jitter, or build the full
    /// 30-dataset robustness sweep.
    Jitter {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Build the full sweep instead of a single jitter.
        #[arg(long)]
        sweep: bool,
        /// Jitter kind: brightness, contrast or saturation.
        #[arg(long)]
        kind: Option<String>,
        /// Jitter ratio in [-1, 1].
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate probability maps against ground truth.
    Eval {
        /// Prediction manifest (image paths point at probability maps).
        #[arg(long)]
        manifest: PathBuf,
        /// Separate truth manifest joined by id.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Binarization threshold for ACC/SP/SE/F1 (default 0.5).
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Sweep manifest: evaluate every sweep dataset and emit curve data.
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Root of per-dataset prediction manifests for sweep evaluation.
        #[arg(long)]
        pred_root: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a four-panel inspection montage for one image.
    Preview {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        entropy_seed: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Augment {
            manifest,
            out,
            config,
            seed,
            entropy_seed,
            threads,
            samples,
        } => cli::cmd_augment(&AugmentCmd {
            manifest,
            out,
            config,
            seed,
            entropy_seed,
            threads,
            samples,
        }),
        Command::Tophat {
            manifest,
            out,
            config,
            threads,
        } => cli::cmd_tophat(&TophatCmd {
            manifest,
            out,
            config,
            threads,
        }),
        Command::Jitter {
            manifest,
            out,
            sweep,
            kind,
            ratio,
            config,
            threads,
        } => cli::cmd_jitter(&JitterCmd {
            manifest,
            out,
            sweep,
            kind,
            ratio,
            config,
            threads,
        }),
        Command::Eval {
            manifest,
            truth,
            threshold,
            out,
            sweep,
            pred_root,
            config,
            threads,
        } => cli::cmd_eval(&EvalCmd {
            manifest,
            truth,
            threshold,
            out,
            sweep,
            pred_root,
            config,
            threads,
        }),
        Command::Preview {
            image,
            out,
            config,
            seed,
            entropy_seed,
        } => cli::cmd_preview(&PreviewCmd {
            image,
            out,
            config,
            seed,
            entropy_seed,
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
