//! End-to-end orchestration: ingest → features → diversity → credal →
//! calibrate → decompose → stats → report.
//!
//! Every stage reads its inputs from the output directory (or from the
//! in-memory state of an earlier stage in the same run) and writes its
//! artifacts to a staging directory. Artifacts are moved into place only when
//! every requested stage succeeds, so a failed run leaves no partial output.
//!
//! JSON-lines and CSV artifacts start with a `#` line carrying the tool
//! version, config hash and input digests; JSON artifacts carry the same data
//! in a `meta` object. No stage draws random numbers and parallel steps merge
//! in input order, so identical inputs and config give byte-identical output
//! regardless of thread count.

mod config;
mod plots;

pub use config::{Params, RunConfig, DEFAULT_OUT_DIR, OUT_DIR_ENV};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::{self, CalibrationCsvRow, CalibrationReport, WassersteinRow};
use crate::corpus::{self, StoryRecord, TokenCounter};
use crate::decomposition::{self, DecompositionResult, DecompositionRow};
use crate::diversity::{self, DiversityCsvRow, DiversityVector};
use crate::features::{self, FeatureMap, FeatureRow};
use crate::geometry::{self, CredalSet, CredalSetExport, CredalTransform, TransformExport};
use crate::stats::{self, StatsSummary};
use crate::{io, Error, Result, VERSION};

pub mod files {
    pub const CORPUS: &str = "corpus.jsonl";
    pub const SELECTION: &str = "selection.csv";
    pub const INGEST: &str = "ingest.json";
    pub const FEATURES: &str = "features.jsonl";
    pub const FEATURES_SUMMARY: &str = "features.json";
    pub const DIVERSITY: &str = "diversity.jsonl";
    pub const DIVERSITY_CSV: &str = "diversity.csv";
    pub const CREDAL: &str = "credal_sets.json";
    pub const CALIBRATION: &str = "calibration.csv";
    pub const CALIBRATION_JSON: &str = "calibration.json";
    pub const WASSERSTEIN: &str = "wasserstein.csv";
    pub const DECOMPOSITION: &str = "decomposition.json";
    pub const DECOMPOSITION_CSV: &str = "decomposition.csv";
    pub const STATS: &str = "stats.json";
    pub const REPORT: &str = "report.json";
    pub const PLOTS: &str = "plots";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Features,
    Diversity,
    Credal,
    Calibrate,
    Decompose,
    Stats,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Features,
        Stage::Diversity,
        Stage::Credal,
        Stage::Calibrate,
        Stage::Decompose,
        Stage::Stats,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Features => "features",
            Stage::Diversity => "diversity",
            Stage::Credal => "credal",
            Stage::Calibrate => "calibrate",
            Stage::Decompose => "decompose",
            Stage::Stats => "stats",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown stage {s:?}")))
    }
}

/// Provenance stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    /// Input name to the first 16 hex digits of its SHA-256 (`-` when unset).
    pub inputs: BTreeMap<String, String>,
}

impl Meta {
    pub fn for_config(cfg: &RunConfig) -> Self {
        let digest = |p: &Option<PathBuf>| match p {
            None => "-".to_string(),
            Some(p) => match fs::read(p) {
                Ok(bytes) => hex::encode(&Sha256::digest(bytes)[..8]),
                Err(_) => "missing".to_string(),
            },
        };
        let inputs = [
            ("corpus", &cfg.corpus),
            ("embeddings", &cfg.embeddings),
            ("pos_tags", &cfg.pos_tags),
            ("token_counts", &cfg.token_counts),
            ("calibration", &cfg.calibration),
        ]
        .into_iter()
        .map(|(k, p)| (k.to_string(), digest(p)))
        .collect();
        Meta {
            tool: "credal".into(),
            version: VERSION.into(),
            config_hash: cfg.config_hash(),
            inputs,
        }
    }

    pub fn header_line(&self) -> String {
        let inputs: Vec<String> = self.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "# {} {} config={} {}",
            self.tool,
            self.version,
            &self.config_hash[..16],
            inputs.join(" ")
        )
    }
}

/// A JSON artifact: `meta` followed by the body's fields.
#[derive(Debug, Serialize, Deserialize)]
struct Stamped<T> {
    meta: Meta,
    #[serde(flatten)]
    body: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub input_records: usize,
    pub duplicates_dropped: usize,
    pub groups_before_filter: usize,
    pub groups_after_filter: usize,
    pub prompts_scored: usize,
    pub prompts_selected: usize,
    pub stories_selected: usize,
    /// Source label to number of selected prompt groups.
    pub groups_by_source: BTreeMap<String, usize>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub stories: usize,
    pub embedding_dim: usize,
    pub mean_vocab_size: f64,
    pub mean_pos_bigrams: f64,
}

/// Shared PCA space, one credal set per source, and the overlap threshold.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub transform: CredalTransform,
    pub sets: Vec<CredalSet>,
    /// Label to hull volume in the other PCA dimensionality.
    pub alt_volumes: BTreeMap<String, f64>,
    pub theta: f64,
}

impl Geometry {
    pub fn build(vectors: &[DiversityVector], params: &Params) -> Result<Self> {
        let transform = CredalTransform::fit(vectors, params.pca_dims)?;
        let alt = CredalTransform {
            dims: 5 - params.pca_dims,
            ..transform.clone()
        };
        let mut by_source: BTreeMap<_, Vec<&DiversityVector>> = BTreeMap::new();
        for v in vectors {
            by_source.entry(v.source.clone()).or_default().push(v);
        }
        let mut sets = Vec::new();
        let mut alt_volumes = BTreeMap::new();
        for (source, vs) in &by_source {
            let set = CredalSet::build(vs, &transform)?;
            let alt_set = CredalSet::build(vs, &alt)?;
            alt_volumes.insert(source.to_string(), alt_set.volume);
            sets.push(set);
        }
        let pool: Vec<Vec<f64>> = sets.iter().flat_map(|s| s.points.iter().cloned()).collect();
        let theta = geometry::adaptive_threshold(&pool, params.threshold_rule)?;
        Ok(Geometry {
            transform,
            sets,
            alt_volumes,
            theta,
        })
    }

    pub fn human(&self) -> Result<&CredalSet> {
        self.sets
            .iter()
            .find(|s| s.source.is_human())
            .ok_or_else(|| Error::invalid("no human diversity vectors; calibration needs a human credal set"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalEntry {
    #[serde(flatten)]
    pub set: CredalSetExport,
    pub affine_dim: usize,
    pub volume_2d: f64,
    pub volume_3d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalArtifact {
    pub dims: usize,
    pub theta: f64,
    pub transform: TransformExport,
    pub explained_variance: [f64; 3],
    pub sets: Vec<CredalEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationArtifact {
    pub theta: f64,
    pub human_volume: f64,
    /// Ranked, best composite first.
    pub reports: Vec<CalibrationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WassersteinCsvRow {
    pub model: String,
    pub strategy: String,
    pub value: f64,
    pub semantic: f64,
    pub lexical: f64,
    pub syntactic: f64,
    pub mean: f64,
}

impl From<&WassersteinRow> for WassersteinCsvRow {
    fn from(w: &WassersteinRow) -> Self {
        WassersteinCsvRow {
            model: w.source.model_name.clone(),
            strategy: w.source.strategy.clone(),
            value: w.source.strategy_value.unwrap_or_default(),
            semantic: w.semantic,
            lexical: w.lexical,
            syntactic: w.syntactic,
            mean: w.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionArtifact {
    pub space: decomposition::DecompositionSpace,
    pub results: Vec<DecompositionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsArtifact {
    pub source: String,
    pub summary: StatsSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfiguration {
    pub rank: usize,
    pub label: String,
    pub composite: f64,
    pub overlap: f64,
    pub centroid_distance: f64,
    pub volume_ratio: f64,
    pub hausdorff: f64,
    pub model_volume: f64,
    pub wasserstein_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub corpus: IngestSummary,
    pub pca_dims: usize,
    pub explained_variance: [f64; 3],
    pub theta: f64,
    pub human_volume: f64,
    pub human_volume_2d: f64,
    pub human_volume_3d: f64,
    pub configurations: Vec<ReportConfiguration>,
    pub decomposition: Vec<DecompositionRow>,
    pub stats: StatsSummary,
}

/// Intermediate results; stages fill what they produce and load what they
/// need from artifacts when running on their own.
#[derive(Default)]
struct State {
    records: Option<Vec<StoryRecord>>,
    features: Option<FeatureMap>,
    vectors: Option<Vec<DiversityVector>>,
    geometry: Option<Geometry>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    meta: Meta,
    staging: PathBuf,
}

impl Ctx<'_> {
    /// Resolve an input artifact: this run's staging area first, then the output directory.
    fn input(&self, name: &str) -> Result<PathBuf> {
        let staged = self.staging.join(name);
        if staged.exists() {
            return Ok(staged);
        }
        let existing = self.cfg.out_dir.join(name);
        if existing.exists() {
            Ok(existing)
        } else {
            Err(Error::MissingArtifact(existing))
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.staging.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        io::write_file(&path, contents)
    }

    fn write_jsonl<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        self.write(name, &io::jsonl_string(Some(&self.meta.header_line()), rows)?)
    }

    fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        self.write(name, &io::csv_string(Some(&self.meta.header_line()), rows)?)
    }

    fn write_table(&self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
        self.write(name, &io::csv_table(Some(&self.meta.header_line()), columns, rows)?)
    }

    fn write_json<T: Serialize>(&self, name: &str, body: &T) -> Result<()> {
        let stamped = Stamped {
            meta: self.meta.clone(),
            body,
        };
        let mut text = serde_json::to_string_pretty(&stamped)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&self, name: &str) -> Result<T> {
        let path = self.input(name)?;
        let text = io::read_to_string(&path)?;
        let stamped: Stamped<T> = serde_json::from_str(&text)?;
        Ok(stamped.body)
    }

    fn records<'s>(&self, state: &'s mut State) -> Result<&'s Vec<StoryRecord>> {
        if state.records.is_none() {
            state.records = Some(io::read_jsonl(&self.input(files::CORPUS)?)?);
        }
        Ok(state.records.as_ref().expect("just set"))
    }

    fn vectors<'s>(&self, state: &'s mut State) -> Result<&'s Vec<DiversityVector>> {
        if state.vectors.is_none() {
            state.vectors = Some(io::read_jsonl(&self.input(files::DIVERSITY)?)?);
        }
        Ok(state.vectors.as_ref().expect("just set"))
    }

    fn geometry<'s>(&self, state: &'s mut State) -> Result<&'s Geometry> {
        if state.geometry.is_none() {
            let g = Geometry::build(self.vectors(state)?, &self.cfg.params)?;
            state.geometry = Some(g);
        }
        Ok(state.geometry.as_ref().expect("just set"))
    }

    fn token_counter(&self) -> Result<TokenCounter> {
        match &self.cfg.token_counts {
            Some(p) => TokenCounter::from_sidecar(p),
            None => Ok(TokenCounter::default()),
        }
    }
}

fn ingest(ctx: &Ctx, state: &mut State) -> Result<()> {
    let params = &ctx.cfg.params;
    let path = ctx
        .cfg
        .corpus
        .as_ref()
        .ok_or_else(|| Error::invalid("no corpus configured"))?;
    let records = corpus::load_records(path)?;
    let input_records = records.len();
    let deduped = corpus::dedup(records);
    let tokens = ctx.token_counter()?;
    let groups = corpus::group_records(deduped.kept);
    let groups_before_filter = groups.len();
    let filtered = corpus::filter_lengths(groups, &params.bounds, params.group_size, &tokens);
    let groups_after_filter = filtered.len();

    // Prompts are ranked on their human continuations.
    let human: Vec<_> = filtered.iter().filter(|g| g.source.is_human()).cloned().collect();
    if human.is_empty() {
        return Err(Error::invalid("no human prompt group survived length filtering"));
    }
    let prompts_scored = human.len();
    let selection = corpus::score_and_select(human, params.select_n, &tokens)?;
    if let Some(w) = &selection.warning {
        warn!("{w}");
    }
    let keep: BTreeSet<&str> = selection.selected.iter().map(|g| g.prompt_id.as_str()).collect();
    let chosen: Vec<_> = filtered
        .into_iter()
        .filter(|g| keep.contains(g.prompt_id.as_str()))
        .collect();
    let mut groups_by_source: BTreeMap<String, usize> = BTreeMap::new();
    for g in &chosen {
        *groups_by_source.entry(g.source.to_string()).or_default() += 1;
    }
    let records: Vec<StoryRecord> = chosen.into_iter().flat_map(|g| g.records).collect();

    let summary = IngestSummary {
        input_records,
        duplicates_dropped: deduped.dropped,
        groups_before_filter,
        groups_after_filter,
        prompts_scored,
        prompts_selected: keep.len(),
        stories_selected: records.len(),
        groups_by_source,
        warning: selection.warning.clone(),
    };
    info!(
        "ingest: {input_records} records, {} duplicates, {} prompts selected",
        deduped.dropped,
        keep.len()
    );
    ctx.write_jsonl(files::CORPUS, &records)?;
    ctx.write_csv(files::SELECTION, &selection.manifest)?;
    ctx.write_json(files::INGEST, &summary)?;
    state.records = Some(records);
    Ok(())
}

fn load_features(ctx: &Ctx, records: &[StoryRecord]) -> Result<FeatureMap> {
    let emb_path = ctx
        .cfg
        .embeddings
        .as_ref()
        .ok_or_else(|| Error::invalid("no embeddings sidecar configured"))?;
    let pos_path = ctx
        .cfg
        .pos_tags
        .as_ref()
        .ok_or_else(|| Error::invalid("no POS-tag sidecar configured"))?;
    for p in [emb_path, pos_path] {
        if !p.exists() {
            return Err(Error::MissingArtifact(p.clone()));
        }
    }
    let embeddings = features::load_embeddings(emb_path, records)?;
    let pos = features::load_pos_bigrams(pos_path, records)?;
    Ok(features::build_feature_map(
        records,
        &embeddings,
        &pos,
        ctx.cfg.params.vocab_char_cap,
    ))
}

fn features_stage(ctx: &Ctx, state: &mut State) -> Result<()> {
    let records = ctx.records(state)?.clone();
    let fm = load_features(ctx, &records)?;
    let mut rows: Vec<FeatureRow> = fm.stories.values().map(FeatureRow::from).collect();
    rows.sort_by(|a, b| a.story_id.cmp(&b.story_id));
    let n = rows.len().max(1) as f64;
    let summary = FeatureSummary {
        stories: rows.len(),
        embedding_dim: fm.dim.unwrap_or(0),
        mean_vocab_size: rows.iter().map(|r| r.vocab.len()).sum::<usize>() as f64 / n,
        mean_pos_bigrams: rows.iter().map(|r| r.pos_bigrams.len()).sum::<usize>() as f64 / n,
    };
    info!("features: {} stories, embedding dim {}", summary.stories, summary.embedding_dim);
    ctx.write_jsonl(files::FEATURES, &rows)?;
    ctx.write_json(files::FEATURES_SUMMARY, &summary)?;
    state.features = Some(fm);
    Ok(())
}

fn diversity_stage(ctx: &Ctx, state: &mut State) -> Result<()> {
    let records = ctx.records(state)?.clone();
    if state.features.is_none() {
        state.features = Some(load_features(ctx, &records)?);
    }
    let fm = state.features.as_ref().expect("just set");
    let groups = corpus::group_records(records);
    let vectors: Vec<DiversityVector> = groups
        .par_iter()
        .map(|g| diversity::diversity_vector(g, fm))
        .collect::<Result<_>>()?;
    info!("diversity: {} prompt groups", vectors.len());
    let csv: Vec<DiversityCsvRow> = vectors.iter().map(DiversityCsvRow::from).collect();
    ctx.write_jsonl(files::DIVERSITY, &vectors)?;
    ctx.write_csv(files::DIVERSITY_CSV, &csv)?;
    state.vectors = Some(vectors);
    Ok(())
}

fn credal_stage(ctx: &Ctx, state: &mut State) -> Result<()> {
    let dims = ctx.cfg.params.pca_dims;
    let g = ctx.geometry(state)?;
    let sets = g
        .sets
        .iter()
        .map(|s| {
            let alt = g.alt_volumes[&s.label];
            let (volume_2d, volume_3d) = if dims == 2 { (s.volume, alt) } else { (alt, s.volume) };
            CredalEntry {
                set: s.export(&g.transform),
                affine_dim: s.hull.affine_dim,
                volume_2d,
                volume_3d,
            }
        })
        .collect();
    let artifact = CredalArtifact {
        dims,
        theta: g.theta,
        transform: g.transform.export(),
        explained_variance: g.transform.pca.explained_variance,
        sets,
    };
    info!("credal: {} sets in {dims}D, theta {:.4}", artifact.sets.len(), g.theta);
    ctx.write_json(files::CREDAL, &artifact)
}

/// Calibration reports for every model set, with Wasserstein rows attached, ranked.
pub fn calibrate_all(geometry: &Geometry, vectors: &[DiversityVector], params: &Params) -> Result<Vec<CalibrationReport>> {
    let human = geometry.human()?;
    let models: Vec<&CredalSet> = geometry.sets.iter().filter(|s| !s.source.is_human()).collect();
    let mut reports: Vec<CalibrationReport> = models
        .par_iter()
        .map(|m| calibration::calibrate(m, human, geometry.theta, params.weights))
        .collect::<Result<_>>()?;
    let wasserstein = calibration::wasserstein_report(vectors, params.wasserstein_space, Some(&geometry.transform))?;
    for r in &mut reports {
        let source = r.source();
        r.wasserstein = wasserstein.iter().find(|w| w.source == source).cloned();
    }
    Ok(calibration::rank_configurations(reports))
}

fn calibrate_stage(ctx: &Ctx, state: &mut State) -> Result<()> {
    let vectors = ctx.vectors(state)?.clone();
    let g = ctx.geometry(state)?;
    let reports = calibrate_all(g, &vectors, &ctx.cfg.params)?;
    let rows: Vec<CalibrationCsvRow> = reports.iter().map(CalibrationCsvRow::from).collect();
    let w_rows: Vec<WassersteinCsvRow> = reports
        .iter()
        .filter_map(|r| r.wasserstein.as_ref().map(WassersteinCsvRow::from))
        .collect();
    if let Some(best) = reports.first() {
        info!("calibrate: best {} composite {:.3}", best.source(), best.composite);
    }
    ctx.write_csv(files::CALIBRATION, &rows)?;
    ctx.write_csv(files::WASSERSTEIN, &w_rows)?;
    ctx.write_json(
        files::CALIBRATION_JSON,
        &CalibrationArtifact {
            theta: g.theta,
            human_volume: g.human()?.volume,
            reports,
        },
    )
}

fn decompose_stage(ctx: &Ctx, state: &mut State) -> Result<()> {
    let space = ctx.cfg.params.decomposition_space;
    let vectors = ctx.vectors(state)?.clone();
    let transform = match space {
        decomposition::DecompositionSpace::Raw => None,
        decomposition::DecompositionSpace::Standardized => Some(ctx.geometry(state)?.transform.clone()),
    };
    let results = decomposition::decompose_all(&vectors, space, transform.as_ref())?;
    let rows = decomposition::decomposition_table(&results);
    info!("decompose: {} models", rows.len());
    ctx.write_csv(files::DECOMPOSITION_CSV, &rows)?;
    ctx.write_json(files::DECOMPOSITION, &DecompositionArtifact { space, results })
}

fn stats_stage(ctx: &Ctx) -> Result<()> {
    let (path, source) = match &ctx.cfg.calibration {
        Some(p) => {
            if !p.exists() {
                return Err(Error::MissingArtifact(p.clone()));
            }
            (p.clone(), "external")
        }
        None => (ctx.input(files::CALIBRATION)?, "pipeline"),
    };
    let rows: Vec<CalibrationCsvRow> = io::read_csv(&path)?;
    let summary = stats::stats_summary(&rows, &ctx.cfg.params.models, ctx.cfg.params.t_test);
    for (item, why) in &summary.skipped {
        info!("stats: skipped {item}: {why}");
    }
    ctx.write_json(
        files::STATS,
        &StatsArtifact {
            source: source.to_string(),
            summary,
        },
    )
}

fn report_stage(ctx: &Ctx, state: &mut State) -> Result<()> {
    let corpus: IngestSummary = ctx.read_json(files::INGEST)?;
    // the credal artifact is not parsed, but it must exist
    ctx.input(files::CREDAL)?;
    let calibration: CalibrationArtifact = ctx.read_json(files::CALIBRATION_JSON)?;
    let decomposition: DecompositionArtifact = ctx.read_json(files::DECOMPOSITION)?;
    let stats: StatsArtifact = ctx.read_json(files::STATS)?;
    let dims = ctx.cfg.params.pca_dims;
    let g = ctx.geometry(state)?;
    let human = g.human()?;
    let human_alt = g.alt_volumes[&human.label];
    let (human_volume_2d, human_volume_3d) = if dims == 2 {
        (human.volume, human_alt)
    } else {
        (human_alt, human.volume)
    };
    let configurations = calibration
        .reports
        .iter()
        .enumerate()
        .map(|(i, r)| ReportConfiguration {
            rank: i + 1,
            label: r.source().to_string(),
            composite: r.composite,
            overlap: r.overlap,
            centroid_distance: r.centroid_distance,
            volume_ratio: r.volume_ratio,
            hausdorff: r.hausdorff,
            model_volume: r.model_volume,
            wasserstein_mean: r.wasserstein.as_ref().map(|w| w.mean),
        })
        .collect();
    let decomposition_rows = decomposition::decomposition_table(&decomposition.results);
    let report = Report {
        corpus,
        pca_dims: dims,
        explained_variance: g.transform.pca.ratios,
        theta: g.theta,
        human_volume: human.volume,
        human_volume_2d,
        human_volume_3d,
        configurations,
        decomposition: decomposition_rows.clone(),
        stats: stats.summary,
    };
    for (name, table) in plots::plot_tables(g, &calibration.reports, &decomposition_rows)? {
        ctx.write_table(&format!("{}/{name}", files::PLOTS), &table.columns, &table.rows)?;
    }
    ctx.write_json(files::REPORT, &report)
}

fn run_one(stage: Stage, ctx: &Ctx, state: &mut State) -> Result<()> {
    match stage {
        Stage::Ingest => ingest(ctx, state),
        Stage::Features => features_stage(ctx, state),
        Stage::Diversity => diversity_stage(ctx, state),
        Stage::Credal => credal_stage(ctx, state),
        Stage::Calibrate => calibrate_stage(ctx, state),
        Stage::Decompose => decompose_stage(ctx, state),
        Stage::Stats => stats_stage(ctx),
        Stage::Report => report_stage(ctx, state),
    }
}

/// Move every staged file into `out`, keeping the relative layout.
fn promote(staging: &Path, out: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(staging)
        .map_err(|e| Error::io(staging, e))?
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(staging, e))?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let from = entry.path();
        let to = out.join(entry.file_name());
        if from.is_dir() {
            fs::create_dir_all(&to).map_err(|e| Error::io(&to, e))?;
            promote(&from, &to, written)?;
        } else {
            fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
            written.push(to);
        }
    }
    Ok(())
}

/// Run `stages` in order. On success returns the artifact paths written; on
/// failure nothing is written and the error names the failing stage.
pub fn run_stages(cfg: &RunConfig, stages: &[Stage]) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let staging = cfg.out_dir.join(format!(".staging-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    let ctx = Ctx {
        cfg,
        meta: Meta::for_config(cfg),
        staging: staging.clone(),
    };
    let run = || -> Result<()> {
        let mut state = State::default();
        for &stage in stages {
            info!("stage {stage}");
            run_one(stage, &ctx, &mut state).map_err(|e| Error::Stage {
                stage: stage.name(),
                source: Box::new(e),
            })?;
        }
        Ok(())
    };
    let result = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut written = Vec::new();
    let result = result.and_then(|()| promote(&staging, &cfg.out_dir, &mut written));
    let _ = fs::remove_dir_all(&staging);
    result.map(|()| written)
}

pub fn run_stage(cfg: &RunConfig, stage: Stage) -> Result<Vec<PathBuf>> {
    run_stages(cfg, &[stage])
}

/// The full pipeline, every stage in order.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    run_stages(cfg, &Stage::ALL)
}
