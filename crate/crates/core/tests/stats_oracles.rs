//! Hypothesis tests against an independent distribution library and
//! brute-force enumeration.

use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};
use statrs::function::beta::beta_reg;

use credal::stats::{
    f_upper_tail, mann_whitney_u, one_way_anova, rank_average, reg_inc_beta, spearman_with, t_two_sided, Method,
    PValueMode,
};

#[test]
fn incomplete_beta_matches_statrs() {
    for &a in &[0.5, 1.0, 2.5, 7.0, 30.0] {
        for &b in &[0.5, 1.0, 3.0, 12.0, 40.0] {
            for k in 0..=20 {
                let x = k as f64 / 20.0;
                let got = reg_inc_beta(a, b, x).unwrap();
                let want = beta_reg(a, b, x);
                assert!((got - want).abs() < 1e-10, "I_{x}({a},{b}) = {got} vs {want}");
            }
        }
    }
}

#[test]
fn t_and_f_tails_match_statrs() {
    for &df in &[1.0, 2.0, 5.0, 16.0, 18.0, 120.0] {
        let dist = StudentsT::new(0.0, 1.0, df).unwrap();
        for &t in &[0.0, 0.3, 0.7374, 1.5, 2.1, 4.0, 9.0] {
            let want = 2.0 * dist.sf(t);
            assert!((t_two_sided(t, df) - want).abs() < 1e-10, "t={t} df={df}");
            assert!((t_two_sided(-t, df) - want).abs() < 1e-10);
        }
    }
    for &(d1, d2) in &[(1.0, 1.0), (3.0, 16.0), (2.0, 30.0), (10.0, 4.0)] {
        let dist = FisherSnedecor::new(d1, d2).unwrap();
        for &f in &[0.05, 0.3636, 1.0, 2.5, 8.0] {
            assert!((f_upper_tail(f, d1, d2) - dist.sf(f)).abs() < 1e-10, "F={f} ({d1},{d2})");
        }
    }
}

fn brute_spearman_p(x: &[f64], y: &[f64]) -> f64 {
    fn rho(rx: &[f64], ry: &[f64]) -> f64 {
        let n = rx.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for i in 0..rx.len() {
            sxy += (rx[i] - mx) * (ry[i] - my);
            sxx += (rx[i] - mx).powi(2);
            syy += (ry[i] - my).powi(2);
        }
        sxy / (sxx * syy).sqrt()
    }
    fn perms(items: Vec<f64>) -> Vec<Vec<f64>> {
        if items.len() <= 1 {
            return vec![items];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let head = rest.remove(i);
            for mut p in perms(rest) {
                p.insert(0, head);
                out.push(p);
            }
        }
        out
    }
    let rx = rank_average(x);
    let ry = rank_average(y);
    let observed = rho(&rx, &ry).abs();
    let all = perms(ry);
    let hits = all.iter().filter(|p| rho(&rx, p).abs() >= observed - 1e-12).count();
    hits as f64 / all.len() as f64
}

/// U statistic by direct pair counting; ties count one half.
fn pair_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Exact two-sided p by enumerating every split of the pooled sample.
fn brute_mann_whitney_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let m = a.len();
    let observed = pair_u(a, b).min(pair_u(b, a));
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let (ga, gb): (Vec<f64>, Vec<f64>) = {
            let mut ga = Vec::new();
            let mut gb = Vec::new();
            for (i, v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    ga.push(*v)
                } else {
                    gb.push(*v)
                }
            }
            (ga, gb)
        };
        total += 1;
        if pair_u(&ga, &gb) <= observed + 1e-12 {
            hits += 1;
        }
    }
    (2.0 * hits as f64 / total as f64).min(1.0)
}

#[test]
fn spearman_reference_sizes() {
    let r = spearman_with(&[1.5, 2.0, 8.0, 7.0], &[0.333, 0.434, 0.409, 0.403], PValueMode::Exact).unwrap();
    assert_eq!(r.statistic, 0.4);
    assert_eq!(r.p_value, 0.75);
    assert_eq!(r.method, Method::ExactPermutation);
    let a = spearman_with(&[1.5, 2.0, 8.0, 7.0], &[0.333, 0.434, 0.409, 0.403], PValueMode::Asymptotic).unwrap();
    assert!((a.p_value - 0.6).abs() < 1e-12);
}

#[test]
fn anova_by_hand() {
    // grand mean 3, SSB = 3·(1 + 0 + 1) = 6, SSW = 2+2+2 = 6, F = (6/2)/(6/6) = 3
    let r = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0], vec![3.0, 4.0, 5.0]]).unwrap();
    assert!((r.statistic - 3.0).abs() < 1e-12);
    assert_eq!(r.df, vec![2.0, 6.0]);
}

proptest! {
    #[test]
    fn spearman_exact_matches_enumeration(
        pairs in prop::collection::vec((0u8..5, -3.0f64..3.0), 3..=6)
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(x.iter().any(|v| *v != x[0]));
        let r = spearman_with(&x, &y, PValueMode::Exact).unwrap();
        prop_assert!((r.p_value - brute_spearman_p(&x, &y)).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&r.statistic));
    }

    #[test]
    fn mann_whitney_exact_matches_enumeration(
        a in prop::collection::vec(-5.0f64..5.0, 1..=6),
        b in prop::collection::vec(-5.0f64..5.0, 1..=6),
    ) {
        let r = mann_whitney_u(&a, &b).unwrap();
        prop_assert_eq!(r.method, Method::ExactPermutation);
        prop_assert_eq!(r.statistic, pair_u(&a, &b).min(pair_u(&b, &a)));
        prop_assert!((r.p_value - brute_mann_whitney_p(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn ranks_sum_to_triangle(xs in prop::collection::vec(0u8..6, 1..30)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let n = xs.len() as f64;
        prop_assert!((rank_average(&xs).iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }
}
