use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use credal::pipeline::{self, RunConfig, Stage};

#[derive(Parser)]
#[command(name = "credal", version, about = "Credal-set calibration of model diversity against human writing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Deduplicate, length-filter and select prompts
    Ingest,
    /// Build vocabulary and POS-bigram features and validate sidecars
    Features,
    /// Per-prompt semantic, lexical and syntactic diversity
    Diversity,
    /// Shared PCA space and convex hulls per source
    Credal,
    /// Score model credal sets against the human one
    Calibrate,
    /// Epistemic/aleatoric split per model
    Decompose,
    /// Hypothesis tests over the calibration table
    Stats,
    /// Summary report and plot tables
    Report,
    /// Every stage in order
    All,
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args)]
struct RunArgs {
    /// key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<String>,
    #[arg(long, global = true)]
    embeddings: Option<String>,
    #[arg(long, global = true)]
    pos_tags: Option<String>,
    #[arg(long, global = true)]
    token_counts: Option<String>,
    /// Calibration CSV for `stats` (defaults to the pipeline's own)
    #[arg(long, global = true)]
    calibration: Option<String>,
    /// Output directory [default: $CREDAL_OUT_DIR or credal-out]
    #[arg(long, global = true)]
    out_dir: Option<String>,
    #[arg(long, global = true)]
    min_prompt_chars: Option<String>,
    #[arg(long, global = true)]
    max_prompt_chars: Option<String>,
    #[arg(long, global = true)]
    min_tokens: Option<String>,
    #[arg(long, global = true)]
    max_tokens: Option<String>,
    #[arg(long, global = true)]
    group_size: Option<String>,
    #[arg(long, global = true)]
    select_n: Option<String>,
    /// 2 or 3
    #[arg(long, global = true)]
    pca_dims: Option<String>,
    /// Composite weights, e.g. 0.5,0.25,0.25
    #[arg(long, global = true)]
    weights: Option<String>,
    /// half_mean_std | half_mean_variance
    #[arg(long, global = true)]
    threshold_rule: Option<String>,
    /// standardized | raw
    #[arg(long, global = true)]
    decomposition_space: Option<String>,
    /// raw | standardized
    #[arg(long, global = true)]
    wasserstein_space: Option<String>,
    /// pooled | welch
    #[arg(long, global = true)]
    t_test: Option<String>,
    #[arg(long, global = true)]
    vocab_char_cap: Option<String>,
    /// NAME=BILLIONS, repeatable
    #[arg(long, global = true, value_name = "NAME=SIZE")]
    model_size: Vec<String>,
    /// NAME=base|instruct, repeatable
    #[arg(long, global = true, value_name = "NAME=KIND")]
    model_kind: Vec<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> anyhow::Result<Vec<(String, String)>> {
        let scalar = [
            ("corpus", &self.corpus),
            ("embeddings", &self.embeddings),
            ("pos_tags", &self.pos_tags),
            ("token_counts", &self.token_counts),
            ("calibration", &self.calibration),
            ("out_dir", &self.out_dir),
            ("min_prompt_chars", &self.min_prompt_chars),
            ("max_prompt_chars", &self.max_prompt_chars),
            ("min_tokens", &self.min_tokens),
            ("max_tokens", &self.max_tokens),
            ("group_size", &self.group_size),
            ("select_n", &self.select_n),
            ("pca_dims", &self.pca_dims),
            ("weights", &self.weights),
            ("threshold_rule", &self.threshold_rule),
            ("decomposition_space", &self.decomposition_space),
            ("wasserstein_space", &self.wasserstein_space),
            ("t_test", &self.t_test),
            ("vocab_char_cap", &self.vocab_char_cap),
            ("threads", &self.threads),
        ];
        let mut out: Vec<(String, String)> = scalar
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        for (prefix, list) in [("model_size", &self.model_size), ("model_kind", &self.model_kind)] {
            for item in list {
                let (name, value) = item
                    .split_once('=')
                    .ok_or_else(|| anyhow::anyhow!("--{} expects NAME=VALUE, got {item:?}", prefix.replace('_', "-")))?;
                out.push((format!("{prefix}.{name}"), value.to_string()));
            }
        }
        Ok(out)
    }

    fn to_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::from_env();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (k, v) in self.pairs()? {
            cfg.set(&k, &v, Path::new(""))?;
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.run.to_config()?;
    let stages: Vec<Stage> = match cli.command {
        Command::Ingest => vec![Stage::Ingest],
        Command::Features => vec![Stage::Features],
        Command::Diversity => vec![Stage::Diversity],
        Command::Credal => vec![Stage::Credal],
        Command::Calibrate => vec![Stage::Calibrate],
        Command::Decompose => vec![Stage::Decompose],
        Command::Stats => vec![Stage::Stats],
        Command::Report => vec![Stage::Report],
        Command::All => Stage::ALL.to_vec(),
    };
    let written = pipeline::run_stages(&cfg, &stages)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
