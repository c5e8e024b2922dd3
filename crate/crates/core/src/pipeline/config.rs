use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::calibration::{CompositeWeights, WassersteinSpace};
use crate::corpus::LengthBounds;
use crate::decomposition::DecompositionSpace;
use crate::features::DEFAULT_CHAR_CAP;
use crate::geometry::ThresholdRule;
use crate::stats::{ModelKind, ModelMeta, TTestVariant};
use crate::{Error, Result};

/// Environment variable consulted for the output directory when neither the
/// config file nor a flag sets one.
pub const OUT_DIR_ENV: &str = "CREDAL_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "credal-out";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub pos_tags: Option<PathBuf>,
    /// Optional `{story_id, tokens}` sidecar overriding whitespace token counts.
    pub token_counts: Option<PathBuf>,
    /// Calibration table read by the stats stage instead of the pipeline's own.
    pub calibration: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub params: Params,
    /// Worker threads for the data-parallel stages; results do not depend on it.
    pub threads: Option<usize>,
}

/// Everything that can change an analysis result. Hashed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub bounds: LengthBounds,
    pub group_size: usize,
    pub select_n: usize,
    pub pca_dims: usize,
    pub weights: CompositeWeights,
    pub threshold_rule: ThresholdRule,
    pub decomposition_space: DecompositionSpace,
    pub wasserstein_space: WassersteinSpace,
    pub t_test: TTestVariant,
    pub vocab_char_cap: usize,
    pub models: ModelMeta,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            bounds: LengthBounds::default(),
            group_size: 10,
            select_n: 500,
            pca_dims: 3,
            weights: CompositeWeights::default(),
            threshold_rule: ThresholdRule::default(),
            decomposition_space: DecompositionSpace::default(),
            wasserstein_space: WassersteinSpace::default(),
            t_test: TTestVariant::default(),
            vocab_char_cap: DEFAULT_CHAR_CAP,
            models: ModelMeta::reference(),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            embeddings: None,
            pos_tags: None,
            token_counts: None,
            calibration: None,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            params: Params::default(),
            threads: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Defaults, with the output directory taken from the environment if set.
    pub fn from_env() -> Self {
        let mut cfg = RunConfig::default();
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            cfg.out_dir = PathBuf::from(dir);
        }
        cfg
    }

    /// Set one key. Relative paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || base.join(value);
        let p = &mut self.params;
        match key {
            "corpus" => self.corpus = Some(path()),
            "embeddings" => self.embeddings = Some(path()),
            "pos_tags" => self.pos_tags = Some(path()),
            "token_counts" => self.token_counts = Some(path()),
            "calibration" => self.calibration = Some(path()),
            "out_dir" => self.out_dir = path(),
            "threads" => self.threads = Some(parse(key, value)?),
            "min_prompt_chars" => p.bounds.min_prompt_chars = parse(key, value)?,
            "max_prompt_chars" => p.bounds.max_prompt_chars = parse(key, value)?,
            "min_tokens" => p.bounds.min_tokens = parse(key, value)?,
            "max_tokens" => p.bounds.max_tokens = parse(key, value)?,
            "group_size" => p.group_size = parse(key, value)?,
            "select_n" => p.select_n = parse(key, value)?,
            "pca_dims" => p.pca_dims = parse(key, value)?,
            "weights" => {
                let w: Vec<f64> = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<_>>()?;
                let w: [f64; 3] = w
                    .try_into()
                    .map_err(|_| Error::invalid("weights takes three comma-separated numbers"))?;
                p.weights = CompositeWeights::new(w)?;
            }
            "threshold_rule" => p.threshold_rule = value.parse()?,
            "decomposition_space" => p.decomposition_space = value.parse()?,
            "wasserstein_space" => p.wasserstein_space = value.parse()?,
            "t_test" => {
                p.t_test = match value {
                    "pooled" => TTestVariant::Pooled,
                    "welch" => TTestVariant::Welch,
                    _ => return Err(Error::invalid(format!("unknown t_test variant {value:?}"))),
                }
            }
            "vocab_char_cap" => p.vocab_char_cap = parse(key, value)?,
            "clear_model_sizes" => {
                if parse::<bool>(key, value)? {
                    p.models.sizes.clear();
                }
            }
            _ => {
                if let Some(model) = key.strip_prefix("model_size.") {
                    p.models.sizes.insert(model.to_string(), parse(key, value)?);
                } else if let Some(model) = key.strip_prefix("model_kind.") {
                    let kind = match value {
                        "base" => ModelKind::Base,
                        "instruct" => ModelKind::Instruct,
                        _ => return Err(Error::invalid(format!("unknown model kind {value:?}"))),
                    };
                    p.models.kinds.insert(model.to_string(), kind);
                } else {
                    return Err(Error::invalid(format!("unknown config key {key:?}")));
                }
            }
        }
        Ok(())
    }

    /// Apply a `key = value` text; `#` starts a comment line.
    pub fn apply_kv(&mut self, text: &str, base: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim(), base)
                .map_err(|e| Error::invalid(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Apply a config file; relative paths inside it are relative to the file.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        self.apply_kv(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if !(p.pca_dims == 2 || p.pca_dims == 3) {
            return Err(Error::invalid(format!("pca_dims must be 2 or 3, got {}", p.pca_dims)));
        }
        if p.group_size < 2 {
            return Err(Error::invalid("group_size must be at least 2"));
        }
        if p.select_n == 0 {
            return Err(Error::invalid("select_n must be positive"));
        }
        CompositeWeights::new(p.weights.0)?;
        if p.bounds.min_prompt_chars > p.bounds.max_prompt_chars || p.bounds.min_tokens > p.bounds.max_tokens {
            return Err(Error::invalid("length bounds have min above max"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the analysis parameters; paths and thread count are excluded.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(&self.params).expect("params serialize");
        hex::encode(Sha256::digest(json))
    }
}
