//! Hypothesis tests used to compare calibration across models and strategies.
//!
//! Exact permutation distributions are enumerated exhaustively (never sampled),
//! so every p-value is deterministic. The exact/asymptotic switch-over points
//! are fixed constants and each [`TestResult`] records which route was taken.

mod special;
mod summary;

pub use special::{f_upper_tail, ln_gamma, normal_two_sided, reg_inc_beta, t_two_sided};
pub use summary::{stats_summary, ModelKind, ModelMeta, StatsSummary};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest n for which Spearman's p-value is enumerated over all permutations.
pub const SPEARMAN_EXACT_MAX_N: usize = 8;
/// Largest combined size for the exact Mann-Whitney distribution (untied data only).
pub const MANN_WHITNEY_EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactPermutation,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    /// Degrees of freedom (one entry for t, two for F).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub df: Vec<f64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_size: Option<f64>,
}

/// Which route a test should take for its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PValueMode {
    /// Exact when the sample is small enough, asymptotic otherwise.
    #[default]
    Auto,
    Exact,
    Asymptotic,
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn rank_average(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn has_ties(xs: &[f64]) -> bool {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    s.windows(2).any(|w| w[0] == w[1])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (divisor n − 1).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Visit every permutation of `items` (Heap's algorithm).
fn for_each_permutation(items: &mut [f64], mut visit: impl FnMut(&[f64])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Spearman rank correlation with a two-sided p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult> {
    spearman_with(x, y, PValueMode::Auto)
}

pub fn spearman_with(x: &[f64], y: &[f64], mode: PValueMode) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::invalid("spearman needs samples of equal length"));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!("spearman needs n ≥ 3, got {n}")));
    }
    let rx = rank_average(x);
    let ry = rank_average(y);
    if rx.iter().all(|&r| r == rx[0]) || ry.iter().all(|&r| r == ry[0]) {
        return Err(Error::Degenerate("spearman on a constant sample".into()));
    }
    let rho = pearson(&rx, &ry).clamp(-1.0, 1.0);
    let exact = match mode {
        PValueMode::Auto => n <= SPEARMAN_EXACT_MAX_N,
        PValueMode::Exact => true,
        PValueMode::Asymptotic => false,
    };
    let p_value = if exact {
        let mut perm = ry.clone();
        let (mut hits, mut total) = (0u64, 0u64);
        let threshold = rho.abs() - 1e-12;
        for_each_permutation(&mut perm, |p| {
            total += 1;
            if pearson(&rx, p).abs() >= threshold {
                hits += 1;
            }
        });
        hits as f64 / total as f64
    } else {
        let df = n as f64 - 2.0;
        if rho.abs() >= 1.0 {
            0.0
        } else {
            t_two_sided(rho * (df / (1.0 - rho * rho)).sqrt(), df)
        }
    };
    Ok(TestResult {
        statistic: rho,
        p_value,
        method: if exact { Method::ExactPermutation } else { Method::Asymptotic },
        df: if exact { Vec::new() } else { vec![n as f64 - 2.0] },
        n,
        effect_size: None,
    })
}

/// Number of ways each value of U arises for sample sizes (m, n) without ties.
fn mann_whitney_counts(m: usize, n: usize) -> Vec<f64> {
    // counts[j][u]: arrangements of i first-sample and j second-sample items
    let max_u = m * n;
    let mut prev: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; n + 1];
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for i in 1..=m {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; n + 1];
        cur[0][0] = 1.0;
        for j in 1..=n {
            for u in 0..=i * j {
                // largest item from sample 1 beats all j of sample 2, or comes from sample 2
                let from_first = if u >= j { prev[j][u - j] } else { 0.0 };
                cur[j][u] = from_first + cur[j - 1][u];
            }
        }
        prev = cur;
    }
    prev[n].clone()
}

/// Mann-Whitney U test; the statistic is `min(U_a, U_b)`.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("mann-whitney needs two non-empty samples"));
    }
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = rank_average(&pooled);
    let ra: f64 = ranks[..na].iter().sum();
    let ua = ra - (na * (na + 1)) as f64 / 2.0;
    let ub = (na * nb) as f64 - ua;
    let u = ua.min(ub);
    let ties = has_ties(&pooled);
    let exact = !ties && na + nb <= MANN_WHITNEY_EXACT_MAX_N;

    let p_value = if exact {
        let counts = mann_whitney_counts(na, nb);
        let total: f64 = counts.iter().sum();
        let u_int = u.round() as usize;
        let below: f64 = counts[..=u_int].iter().sum();
        (2.0 * below / total).min(1.0)
    } else {
        let big_n = (na + nb) as f64;
        let mu = (na * nb) as f64 / 2.0;
        let mut tie_term = 0.0;
        let mut sorted = pooled.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let var = (na * nb) as f64 / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            // continuity-corrected
            let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
            normal_two_sided(z)
        }
    };
    Ok(TestResult {
        statistic: u,
        p_value,
        method: if exact { Method::ExactPermutation } else { Method::Asymptotic },
        df: Vec::new(),
        n: na + nb,
        effect_size: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    #[default]
    Pooled,
    Welch,
}

/// Two-sample t-test computed from summary statistics (sample standard deviations).
pub fn two_sample_t_summary(
    (mean_a, sd_a, n_a): (f64, f64, usize),
    (mean_b, sd_b, n_b): (f64, f64, usize),
    variant: TTestVariant,
) -> Result<TestResult> {
    if n_a < 2 || n_b < 2 {
        return Err(Error::invalid("t-test needs at least 2 values per sample"));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let (va, vb) = (sd_a * sd_a, sd_b * sd_b);
    let pooled_var = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if !(pooled_var > 0.0) {
        return Err(Error::Degenerate("t-test with zero pooled variance".into()));
    }
    let diff = mean_a - mean_b;
    let (t, df) = match variant {
        TTestVariant::Pooled => (
            diff / (pooled_var * (1.0 / na + 1.0 / nb)).sqrt(),
            na + nb - 2.0,
        ),
        TTestVariant::Welch => {
            let (sa, sb) = (va / na, vb / nb);
            let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
            (diff / (sa + sb).sqrt(), df)
        }
    };
    Ok(TestResult {
        statistic: t,
        p_value: t_two_sided(t, df),
        method: Method::Asymptotic,
        df: vec![df],
        n: n_a + n_b,
        effect_size: Some(diff / pooled_var.sqrt()),
    })
}

/// Two-sample t-test with Cohen's d (pooled standard deviation).
pub fn two_sample_t(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("t-test needs at least 2 values per sample"));
    }
    two_sample_t_summary(
        (mean(a), sample_variance(a).sqrt(), a.len()),
        (mean(b), sample_variance(b).sqrt(), b.len()),
        variant,
    )
}

/// One-way ANOVA F test.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::invalid("ANOVA needs at least 2 groups"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("ANOVA needs at least 2 values per group"));
    }
    let k = groups.len() as f64;
    let big_n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / big_n as f64;
    let ss_between: f64 = groups
        .iter()
        .map(|g| g.len() as f64 * (mean(g) - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    if !(ss_within > 0.0) {
        return Err(Error::Degenerate("ANOVA with zero within-group variance".into()));
    }
    let (df1, df2) = (k - 1.0, big_n as f64 - k);
    let f = (ss_between / df1) / (ss_within / df2);
    Ok(TestResult {
        statistic: f,
        p_value: f_upper_tail(f, df1, df2),
        method: Method::Asymptotic,
        df: vec![df1, df2],
        n: big_n,
        effect_size: None,
    })
}
