use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cry_cli::{
    cmd_extract, cmd_report, cmd_segment, cmd_select, cmd_synth, cmd_train_eval, load_config, resolve_profile,
    to_json, CliError, FeatureSet,
};
use cry_core::audio_io::Site;

#[derive(Parser)]
#[command(name = "cry", version, about = "Neonatal cry analysis for encephalopathy screening")]
struct Cli {
    /// Flat `group.key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment one recording into expirations and pauses (JSON on stdout).
    Segment { wav: PathBuf },
    /// Extract the 38-column feature table from a manifest.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Site-consistent feature selection.
    Select {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_site)]
        sites: Option<Vec<Site>>,
        /// Restrict selection to the train and val rows of this split.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit on train+val, evaluate on test.
    TrainEval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        feature_set: FeatureSet,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        metrics_out: PathBuf,
    },
    /// Render a synthetic labelled corpus.
    Synth {
        /// Preset name (reported, separated, identical) or JSON profile.
        #[arg(long, default_value = "reported")]
        profile: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n_per_class: Option<usize>,
        #[arg(long)]
        short_per_class: Option<usize>,
    },
    /// Text summary of metrics and selection outputs.
    Report {
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        selection: Option<PathBuf>,
    },
    /// Print the effective configuration.
    Config,
}

fn parse_site(s: &str) -> Result<Site, String> {
    match Site::parse_lenient(s) {
        Site::Other if !s.trim().eq_ignore_ascii_case("other") => Err(format!("unknown site `{s}`")),
        site => Ok(site),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Segment { wav } => print!("{}", to_json(&cmd_segment(&wav, &config)?)),
        Command::Extract { manifest, out } => {
            let s = cmd_extract(&manifest, &config, &out)?;
            eprintln!(
                "{} rows written to {}, {} skipped (see {})",
                s.rows,
                out.display(),
                s.skipped.len(),
                s.skip_report.display()
            );
        }
        Command::Select {
            features,
            sites,
            split,
            out,
        } => {
            let sites = sites.unwrap_or_else(|| config.selection.sites.clone());
            let report = cmd_select(&features, &sites, split.as_deref(), &out)?;
            eprintln!("{} features selected", report.selected().len());
        }
        Command::TrainEval {
            features,
            split,
            feature_set,
            model_out,
            metrics_out,
        } => {
            let m = cmd_train_eval(&features, &split, feature_set, &config, &model_out, &metrics_out)?;
            eprintln!("test AUC {:.3} over {} rows", m.auc, m.n_test);
        }
        Command::Synth {
            profile,
            out,
            seed,
            n_per_class,
            short_per_class,
        } => {
            let mut p = resolve_profile(&profile)?;
            if let Some(n) = n_per_class {
                p.n_per_class = n;
            }
            if let Some(n) = short_per_class {
                p.short_per_class = n;
            }
            let s = cmd_synth(&p, &out, seed)?;
            eprintln!("{} recordings written, manifest {}", s.items.len(), s.manifest.display());
        }
        Command::Report { metrics, selection } => {
            print!("{}", cmd_report(metrics.as_deref(), selection.as_deref())?)
        }
        Command::Config => print!("{}", config.to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
