//! Acceptance gate. Prints one PASS/FAIL line per criterion, with the checks
//! behind each line indented underneath.
//!
//! Criteria listed in `KNOWN_RED` are expected to fail; the process exits
//! non-zero when any other criterion fails or a known-red one starts passing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use credal::calibration::{composite_score, wasserstein_1d, CalibrationCsvRow, CompositeWeights};
use credal::corpus::{PromptGroup, SourceTag, StoryRecord};
use credal::decomposition::decompose;
use credal::diversity::diversity_vector;
use credal::features::{FeatureMap, StoryFeatures};
use credal::geometry::{fit_pca, hausdorff, overlap, quickhull, Standardizer};
use credal::pipeline::{run_pipeline, RunConfig};
use credal::stats::{stats_summary, two_sample_t_summary, ModelMeta, TTestVariant};
use credal::synthetic::decomposition_fixture;

/// The exact permutation p-value for ρ = 0.4 at n = 4 is 18/24 = 0.75; the
/// printed 0.600 is the t-approximation. Kept red on purpose.
const KNOWN_RED: &[&str] = &["statistics"];

struct Outcome {
    name: &'static str,
    checks: Vec<(bool, String)>,
}

impl Outcome {
    fn new(name: &'static str) -> Self {
        Outcome { name, checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        self.checks.push((ok, msg.into()));
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|(ok, _)| *ok)
    }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn cosine_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    1.0 - dot / (na.sqrt() * nb.sqrt())
}

fn jaccard_oracle<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    1.0 - a.intersection(b).count() as f64 / union as f64
}

fn mean_pairs<T>(items: &[T], f: impl Fn(&T, &T) -> f64) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            total += f(&items[i], &items[j]);
            count += 1;
        }
    }
    total / count as f64
}

fn diversity_oracle() -> Outcome {
    let mut out = Outcome::new("diversity-oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tags = ["DET", "NOUN", "VERB", "ADJ", "ADP"];
    let start = Instant::now();
    let mut max_err: f64 = 0.0;
    let mut failures = 0;
    for g in 0..1000 {
        let n = rng.gen_range(2..=8);
        let dim = rng.gen_range(1..=12);
        let mut records = Vec::new();
        let mut stories = HashMap::new();
        let mut embs = Vec::new();
        let mut vocabs = Vec::new();
        let mut bigrams = Vec::new();
        for i in 0..n {
            let id = format!("g{g}-s{i}");
            let emb: Vec<f64> = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
                    break v;
                }
            };
            let vocab: BTreeSet<String> = (0..rng.gen_range(0..12)).map(|_| format!("w{}", rng.gen_range(0..20))).collect();
            let bg: BTreeSet<(String, String)> = (0..rng.gen_range(0..10))
                .map(|_| (tags[rng.gen_range(0..5)].to_string(), tags[rng.gen_range(0..5)].to_string()))
                .collect();
            records.push(StoryRecord {
                prompt_id: format!("g{g}"),
                prompt_text: "synthetic prompt text".into(),
                story_id: id.clone(),
                text: String::new(),
                source: SourceTag::human(),
            });
            stories.insert(
                id.clone(),
                StoryFeatures {
                    story_id: id,
                    embedding: Some(emb.clone()),
                    vocab: vocab.clone(),
                    pos_bigrams: bg.clone(),
                },
            );
            embs.push(emb);
            vocabs.push(vocab);
            bigrams.push(bg);
        }
        let group = PromptGroup {
            prompt_id: format!("g{g}"),
            prompt_text: "synthetic prompt text".into(),
            source: SourceTag::human(),
            records,
        };
        let fm = FeatureMap { dim: Some(dim), stories };
        match diversity_vector(&group, &fm) {
            Ok(v) => {
                let sem = mean_pairs(&embs, |a, b| cosine_oracle(a, b));
                let lex = mean_pairs(&vocabs, jaccard_oracle);
                let syn = mean_pairs(&bigrams, jaccard_oracle);
                for (got, want) in [(v.d_sem, sem), (v.d_lex, lex), (v.d_syn, syn)] {
                    max_err = max_err.max((got - want).abs());
                }
            }
            Err(_) => failures += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    out.check(failures == 0, format!("{failures} groups errored"));
    out.check(max_err <= 1e-12, format!("max |metric − oracle| = {max_err:.2e} over 1000 groups (tol 1e-12)"));
    out.check(secs < 5.0, format!("runtime {secs:.2} s (limit 5 s)"));
    out
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dims).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn vertex_coords(points: &[Vec<f64>], vertices: &[usize]) -> Vec<Vec<u64>> {
    let mut v: Vec<Vec<u64>> = vertices.iter().map(|&i| points[i].iter().map(|x| x.to_bits()).collect()).collect();
    v.sort();
    v.dedup();
    v
}

fn geometry_fixtures() -> Outcome {
    let mut out = Outcome::new("geometry-fixtures");
    let square = vec![vec![0., 0.], vec![1., 0.], vec![1., 1.], vec![0., 1.]];
    let area = quickhull(&square, 2).map(|h| h.volume).unwrap_or(f64::NAN);
    out.check((area - 1.0).abs() <= 1e-9, format!("unit square area {area}"));

    let cube: Vec<Vec<f64>> = (0..8).map(|i| vec![(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]).collect();
    let vol = quickhull(&cube, 3).map(|h| h.volume).unwrap_or(f64::NAN);
    out.check((vol - 1.0).abs() <= 1e-9, format!("unit cube volume {vol}"));

    let s = 1.0 / 2f64.sqrt();
    let tetra: Vec<Vec<f64>> = [[0., 0., 0.], [1., 1., 0.], [1., 0., 1.], [0., 1., 1.]]
        .iter()
        .map(|p| p.iter().map(|x| x * s).collect())
        .collect();
    let want = 1.0 / (6.0 * 2f64.sqrt());
    let vol = quickhull(&tetra, 3).map(|h| h.volume).unwrap_or(f64::NAN);
    out.check((vol - want).abs() <= 1e-9, format!("regular tetrahedron volume {vol} vs 1/(6√2) = {want}"));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    let mut max_dv: f64 = 0.0;
    for k in 0..200 {
        let dims = 2 + k % 2;
        let n = rng.gen_range(dims + 2..40);
        let pts = random_points(&mut rng, n, dims);
        let mut shuffled = pts.clone();
        for _ in 0..rng.gen_range(1..6) {
            let i = rng.gen_range(0..pts.len());
            shuffled.push(pts[i].clone());
        }
        shuffled.shuffle(&mut rng);
        match (quickhull(&pts, dims), quickhull(&shuffled, dims)) {
            (Ok(a), Ok(b)) => {
                max_dv = max_dv.max((a.volume - b.volume).abs());
                if vertex_coords(&pts, &a.vertices) != vertex_coords(&shuffled, &b.vertices) {
                    bad += 1;
                }
            }
            _ => bad += 1,
        }
    }
    out.check(
        bad == 0 && max_dv <= 1e-9,
        format!("permutation/duplication invariance on 200 sets: {bad} vertex-set mismatches, max |Δvolume| {max_dv:.2e}"),
    );

    let mut max_rel: f64 = 0.0;
    for _ in 0..100 {
        let raw: Vec<[f64; 3]> = (0..rng.gen_range(6..40))
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..0.5)])
            .collect();
        let st = Standardizer::fit(&raw).expect("non-constant");
        let z: Vec<[f64; 3]> = raw.iter().map(|p| st.transform(*p)).collect();
        let pca = fit_pca(&z).expect("full rank");
        let zv: Vec<Vec<f64>> = z.iter().map(|p| p.to_vec()).collect();
        let pv: Vec<Vec<f64>> = z.iter().map(|p| pca.project(*p, 3)).collect();
        let a = quickhull(&zv, 3).map(|h| h.volume).unwrap_or(f64::NAN);
        let b = quickhull(&pv, 3).map(|h| h.volume).unwrap_or(f64::NAN);
        max_rel = max_rel.max((a - b).abs() / a.max(1.0));
    }
    out.check(max_rel <= 1e-9, format!("3D PCA volume preservation, 100 sets: max |Δ| {max_rel:.2e}"));
    out
}

fn overlap_hausdorff() -> Outcome {
    let mut out = Outcome::new("overlap-hausdorff");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_points(&mut rng, 12, 3);
    let theta = 0.3;
    let same = overlap(&a, &a, theta).unwrap_or(f64::NAN);
    let h = hausdorff(&a, &a).unwrap_or(f64::NAN);
    out.check(same == 1.0 && h == 0.0, format!("identical sets: overlap {same}, Hausdorff {h}"));
    let far: Vec<Vec<f64>> = a.iter().map(|p| p.iter().map(|x| x + 10.0).collect()).collect();
    let sep = overlap(&a, &far, theta).unwrap_or(f64::NAN);
    out.check(sep == 0.0, format!("separated sets: overlap {sep}"));
    let vm = vec![vec![0.0, 0.0]];
    let vh = vec![vec![0.0, 0.0], vec![10.0, 0.0]];
    let asym = overlap(&vm, &vh, 1.0).unwrap_or(f64::NAN);
    out.check(asym == 0.75, format!("asymmetric case: overlap {asym} (want 0.75 exactly)"));
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// ∫₀¹ |F_a⁻¹(u) − F_b⁻¹(u)| du over the merged quantile breakpoints.
fn quantile_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let mut cuts: Vec<(usize, usize)> = (0..=n).map(|i| (i * m, n * m)).chain((0..=m).map(|j| (j * n, n * m))).collect();
    cuts.sort();
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0].0, w[1].0);
        if hi == lo {
            continue;
        }
        let ia = lo / m;
        let ib = lo / n;
        total += (a[ia] - b[ib]).abs() * (hi - lo) as f64 / (n * m) as f64;
    }
    total
}

fn wasserstein_checks() -> Outcome {
    let mut out = Outcome::new("wasserstein");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut max_err: f64 = 0.0;
    let mut instances = 0;
    for n in 1..=6 {
        let perms = permutations(n);
        for _ in 0..60 {
            // small integer grid so ties are common
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0..5) as f64 * 0.25).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let brute = perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).abs()).sum::<f64>() / n as f64)
                .fold(f64::INFINITY, f64::min);
            max_err = max_err.max((wasserstein_1d(&a, &b).unwrap_or(f64::NAN) - brute).abs());
            instances += 1;
        }
        for m in 1..=6 {
            if m == n {
                continue;
            }
            for _ in 0..10 {
                let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0..4) as f64 * 0.5).collect();
                let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..2.0)).collect();
                max_err = max_err.max((wasserstein_1d(&a, &b).unwrap_or(f64::NAN) - quantile_oracle(&a, &b)).abs());
                instances += 1;
            }
        }
    }
    out.check(
        max_err <= 1e-9,
        format!("{instances} instances with n, m ≤ 6 vs exhaustive pairing / quantile oracle: max |Δ| {max_err:.2e}"),
    );

    let (mut shift_err, mut sym_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let n = rng.gen_range(1..20);
        let m = rng.gen_range(1..20);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = rng.gen_range(-3.0..3.0);
        let w = wasserstein_1d(&a, &b).unwrap_or(f64::NAN);
        let shifted: Vec<f64> = a.iter().map(|x| x + c).collect();
        let ws = wasserstein_1d(&shifted, &b.iter().map(|x| x + c).collect::<Vec<_>>()).unwrap_or(f64::NAN);
        shift_err = shift_err.max((ws - w).abs());
        shift_err = shift_err.max((wasserstein_1d(&a, &shifted).unwrap_or(f64::NAN) - c.abs()).abs());
        sym_err = sym_err.max((wasserstein_1d(&b, &a).unwrap_or(f64::NAN) - w).abs());
    }
    out.check(shift_err <= 1e-9, format!("shift invariance and W(a, a+c) = |c| on 500 pairs: max |Δ| {shift_err:.2e}"));
    out.check(sym_err <= 1e-12, format!("symmetry on 500 pairs: max |Δ| {sym_err:.2e}"));
    out
}

fn decomposition_truth() -> Outcome {
    let mut out = Outcome::new("decomposition");
    let fixture = decomposition_fixture(23, 5, 1000, 0.75, 0.25);
    match decompose("synthetic", &fixture) {
        Ok(r) => {
            out.check(
                (r.epistemic_ratio - 0.75).abs() <= 0.05,
                format!("3:1 ground truth at 1000 prompts: epistemic ratio {:.4}", r.epistemic_ratio),
            );
            out.check(r.total == r.between_var + r.within_var, "total = between + within exactly");
        }
        Err(e) => out.check(false, format!("decompose failed: {e}")),
    }
    let shared: Vec<[f64; 3]> = (0..10).map(|i| [0.1 * i as f64, 0.3, 0.7 - 0.05 * i as f64]).collect();
    let same: BTreeMap<String, Vec<[f64; 3]>> = (0..4).map(|k| (format!("s{k}"), shared.clone())).collect();
    let zero = decompose("m", &same).map(|r| r.epistemic_ratio).unwrap_or(f64::NAN);
    out.check(zero == 0.0, format!("identical strategies → ratio {zero}"));
    let points: BTreeMap<String, Vec<[f64; 3]>> =
        (0..4).map(|k| (format!("s{k}"), vec![[0.1 * k as f64, 0.2, 0.3]; 10])).collect();
    let one = decompose("m", &points).map(|r| r.epistemic_ratio).unwrap_or(f64::NAN);
    out.check(one == 1.0, format!("no within-strategy spread → ratio {one}"));
    out
}

fn read_table(name: &str) -> Vec<CalibrationCsvRow> {
    let mut rdr = csv::Reader::from_path(data(name)).expect("fixture present");
    rdr.deserialize().collect::<Result<_, _>>().expect("fixture parses")
}

fn statistics() -> Outcome {
    let mut out = Outcome::new("statistics");
    let rows = read_table("reference_calibration.csv");
    let s = stats_summary(&rows, &ModelMeta::reference(), TTestVariant::Pooled);
    match &s.size_vs_calibration {
        Some(c) => {
            out.check(
                (c.test.statistic - 0.4).abs() < 1e-12,
                format!("Spearman ρ = {} on sizes {:?} vs best {:?}", c.test.statistic, c.sizes, c.best_composite),
            );
            out.check(
                (c.test.p_value - 0.600).abs() < 5e-4,
                format!(
                    "exact-permutation p = {} (target 0.600; t-approximation gives {:.3})",
                    c.test.p_value, c.p_asymptotic
                ),
            );
        }
        None => out.check(false, "Spearman item missing"),
    }
    match &s.strategy_anova {
        Some(a) => {
            out.check(a.test.df == vec![3.0, 16.0], format!("ANOVA df {:?}", a.test.df));
            out.check(
                a.test.statistic < 1.0 && a.test.p_value > 0.5,
                format!("ANOVA F = {:.4} (printed 0.200), p = {:.4}", a.test.statistic, a.test.p_value),
            );
        }
        None => out.check(false, "ANOVA item missing"),
    }
    match two_sample_t_summary((0.274, 0.095, 10), (0.305, 0.093, 10), TTestVariant::Pooled) {
        Ok(t) => {
            let d = t.effect_size.unwrap_or(f64::NAN);
            out.check(
                (0.71..=0.74).contains(&t.statistic.abs()) && (d + 0.33).abs() <= 0.01,
                format!("t from printed summaries = {:.4}, Cohen's d = {:.4}", t.statistic, d),
            );
        }
        Err(e) => out.check(false, format!("t-test failed: {e}")),
    }
    match &s.base_vs_instruct {
        Some(k) => out.check(
            (k.base.mean - 0.289).abs() < 5e-4 && (k.base.mean - 0.274).abs() > 0.01,
            format!(
                "base mean recomputed from the table = {:.4} vs printed 0.274 (known inconsistency)",
                k.base.mean
            ),
        ),
        None => out.check(false, "base-vs-instruct item missing"),
    }
    out
}

fn composite_reconstruction() -> Outcome {
    let mut out = Outcome::new("composite-reconstruction");
    let rows = read_table("reference_components.csv");
    let mut worst: f64 = 0.0;
    for (i, r) in rows.iter().enumerate() {
        let got = composite_score(
            r.overlap.unwrap_or(f64::NAN),
            r.centroid_distance.unwrap_or(f64::NAN),
            r.volume_ratio.unwrap_or(f64::NAN),
            CompositeWeights::default(),
        )
        .unwrap_or(f64::NAN);
        let res = got - r.composite;
        if res.abs() > worst.abs() {
            worst = res;
        }
        out.check(res.abs() <= 0.04, format!("row {:>2}: {got:.3} vs printed {:.3}", i + 1, r.composite));
    }
    out.check(rows.len() == 10, format!("{} rows, worst residual {worst:+.4}", rows.len()));
    out
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("readable") {
            let p = e.expect("entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("prefix").to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).expect("readable"));
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let mut out = Outcome::new("end-to-end-determinism");
    let tmp = tempfile::tempdir().expect("tempdir");
    let mut trees = Vec::new();
    let mut slowest: f64 = 0.0;
    for (i, threads) in [None, None, Some(1), Some(8)].into_iter().enumerate() {
        let mut cfg = RunConfig::default();
        cfg.apply_file(&data("synthetic/credal.conf")).expect("config");
        cfg.out_dir = tmp.path().join(format!("run{i}"));
        cfg.threads = threads;
        let start = Instant::now();
        if let Err(e) = run_pipeline(&cfg) {
            out.check(false, format!("run {i} failed: {e}"));
            return out;
        }
        slowest = slowest.max(start.elapsed().as_secs_f64());
        trees.push(read_tree(&cfg.out_dir));
    }
    let stories = trees[0]
        .get("corpus.jsonl")
        .map_or(0, |b| b.split(|&c| c == b'\n').filter(|l| l.first() == Some(&b'{')).count());
    out.check(stories == 1500, format!("bundled corpus: {stories} stories selected (50 prompts × 10 × 3 sources)"));
    out.check(trees[0] == trees[1], format!("two runs byte-identical across {} artifacts", trees[0].len()));
    out.check(trees[2] == trees[3], "threads 1 vs 8 byte-identical");
    out.check(trees[0] == trees[2], "default pool vs 1 thread byte-identical");
    out.check(slowest < 60.0, format!("slowest run {slowest:.2} s (limit 60 s)"));
    out
}

fn headline_recipe() -> Outcome {
    let mut out = Outcome::new("headline-numbers");
    let readme = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = std::fs::read_to_string(&readme).unwrap_or_default();
    let section = text.split("## Reproducing the reference study").nth(1);
    out.check(section.is_some(), "README documents the reproduction recipe");
    let block = section
        .and_then(|s| s.split("```text").nth(1))
        .and_then(|s| s.split("```").next())
        .unwrap_or("");
    let mut cfg = RunConfig::default();
    let parsed = cfg.apply_kv(block, Path::new(".")).and_then(|()| cfg.validate());
    out.check(
        !block.trim().is_empty() && parsed.is_ok(),
        format!("recipe config parses: {}", parsed.err().map_or("ok".into(), |e| e.to_string())),
    );
    out.check(
        true,
        "best 0.434, human volume 2.25, per-dimension human baselines and mean Wasserstein 0.065 need the external corpus; not asserted",
    );
    out
}

fn main() {
    let outcomes = vec![
        diversity_oracle(),
        geometry_fixtures(),
        overlap_hausdorff(),
        wasserstein_checks(),
        decomposition_truth(),
        statistics(),
        composite_reconstruction(),
        determinism(),
        headline_recipe(),
    ];
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let known = KNOWN_RED.contains(&o.name);
        let tag = match (o.pass(), known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{tag:<13}{}", o.name);
        for (ok, msg) in &o.checks {
            println!("    {} {msg}", if *ok { "ok " } else { "red" });
        }
        if o.pass() == known {
            unexpected.push(o.name);
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass()).count();
    println!("{passed}/{} criteria pass", outcomes.len());
    if !unexpected.is_empty() {
        println!("unexpected outcome for: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
