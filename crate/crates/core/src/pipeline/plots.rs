//! Plot-ready CSV tables. Rendering lives elsewhere; these are plain data.

use crate::calibration::CalibrationReport;
use crate::decomposition::DecompositionRow;
use crate::geometry::quickhull;
use crate::Result;

use super::Geometry;

pub(super) struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Scatter points per source in PC space; `pc3` is empty in 2D.
fn points(g: &Geometry) -> Table {
    let mut rows = Vec::new();
    for s in &g.sets {
        for (pid, p) in s.prompt_ids.iter().zip(&s.points) {
            rows.push(vec![
                s.label.clone(),
                pid.clone(),
                num(p[0]),
                num(p[1]),
                p.get(2).map_or(String::new(), |z| num(*z)),
            ]);
        }
    }
    Table {
        columns: vec!["source", "prompt_id", "pc1", "pc2", "pc3"],
        rows,
    }
}

/// Closed hull outline of each source in the PC1–PC2 plane.
fn hulls(g: &Geometry) -> Result<Table> {
    let mut rows = Vec::new();
    for s in &g.sets {
        let plane: Vec<Vec<f64>> = s.points.iter().map(|p| vec![p[0], p[1]]).collect();
        if plane.len() < 3 {
            continue;
        }
        let hull = quickhull(&plane, 2)?;
        let mut ring = hull.vertices.clone();
        if let Some(&first) = ring.first() {
            ring.push(first);
        }
        for (order, &i) in ring.iter().enumerate() {
            rows.push(vec![
                s.label.clone(),
                order.to_string(),
                s.prompt_ids[i].clone(),
                num(plane[i][0]),
                num(plane[i][1]),
            ]);
        }
    }
    Ok(Table {
        columns: vec!["source", "order", "prompt_id", "pc1", "pc2"],
        rows,
    })
}

fn loadings(g: &Geometry) -> Table {
    let pca = &g.transform.pca;
    let rows = (0..3)
        .map(|k| {
            vec![
                format!("PC{}", k + 1),
                num(pca.ratios[k]),
                num(pca.explained_variance[k]),
                num(pca.components[k][0]),
                num(pca.components[k][1]),
                num(pca.components[k][2]),
            ]
        })
        .collect();
    Table {
        columns: vec!["component", "explained_ratio", "explained_variance", "semantic", "lexical", "syntactic"],
        rows,
    }
}

fn calibration(reports: &[CalibrationReport]) -> Table {
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.model_name.clone(),
                r.strategy.clone(),
                num(r.strategy_value),
                r.source().config_label(),
                num(r.composite),
                num(r.overlap),
                num(r.centroid_distance),
                num(r.volume_ratio),
                num(r.hausdorff),
            ]
        })
        .collect();
    Table {
        columns: vec![
            "model",
            "strategy",
            "value",
            "config",
            "composite",
            "overlap",
            "centroid_distance",
            "volume_ratio",
            "hausdorff",
        ],
        rows,
    }
}

fn decomposition(rows: &[DecompositionRow]) -> Table {
    Table {
        columns: vec!["model", "epistemic", "aleatoric", "total", "epistemic_ratio"],
        rows: rows
            .iter()
            .map(|r| vec![r.model.clone(), num(r.epistemic), num(r.aleatoric), num(r.total), num(r.ratio)])
            .collect(),
    }
}

/// Volume per source; human rows have no composite.
fn volume(g: &Geometry, reports: &[CalibrationReport]) -> Table {
    let rows = g
        .sets
        .iter()
        .map(|s| {
            let composite = reports
                .iter()
                .find(|r| r.source() == s.source)
                .map_or(String::new(), |r| num(r.composite));
            vec![
                s.label.clone(),
                if s.source.is_human() { "human".into() } else { s.source.model_name.clone() },
                num(s.volume),
                s.degenerate.to_string(),
                composite,
            ]
        })
        .collect();
    Table {
        columns: vec!["source", "model", "volume", "degenerate", "composite"],
        rows,
    }
}

fn wasserstein(reports: &[CalibrationReport]) -> Table {
    let rows = reports
        .iter()
        .filter_map(|r| {
            let w = r.wasserstein.as_ref()?;
            Some(vec![
                r.model_name.clone(),
                r.source().config_label(),
                num(w.semantic),
                num(w.lexical),
                num(w.syntactic),
                num(w.mean),
                num(r.composite),
            ])
        })
        .collect();
    Table {
        columns: vec!["model", "config", "semantic", "lexical", "syntactic", "mean", "composite"],
        rows,
    }
}

pub(super) fn plot_tables(
    g: &Geometry,
    reports: &[CalibrationReport],
    decomposition_rows: &[DecompositionRow],
) -> Result<Vec<(&'static str, Table)>> {
    Ok(vec![
        ("fig2_points.csv", points(g)),
        ("fig2_hulls.csv", hulls(g)?),
        ("fig3_loadings.csv", loadings(g)),
        ("fig4_calibration.csv", calibration(reports)),
        ("fig5_decomposition.csv", decomposition(decomposition_rows)),
        ("fig6_volume.csv", volume(g, reports)),
        ("fig7_wasserstein.csv", wasserstein(reports)),
    ])
}
