//! Column-wise comparison of a model field against a reference field,
//! aggregates and report files.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::opt;
use crate::problems::ReferenceGrid;

use super::divergence::{entropy, js_divergence, kl_divergence, l2_distance};
use super::hpd::{hpd_set, jaccard};
use super::modes::{
    allocation_error, allocation_vector, detect_modes, location_error, match_modes,
    mode_count_error, voronoi_basins, ModeSet,
};
use super::peel::peel_and_renormalize;
use super::sampling::density_iqr;

/// Evaluation settings, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub rho_ref: f64,
    pub rho_model: f64,
    pub gammas: Vec<f64>,
    pub peel: f64,
    pub smooth: bool,
    pub lambda_kappa: f64,
    pub quantiles: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            rho_ref: 1e-4,
            rho_model: 0.4,
            gammas: vec![0.5, 0.8, 0.95],
            peel: 0.0,
            smooth: false,
            lambda_kappa: 0.0,
            quantiles: vec![0.5, 0.95],
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_ref > 0.0 && self.rho_model > 0.0) {
            return Err(Error::Validation("prominence thresholds must be positive".into()));
        }
        if self.gammas.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return Err(Error::Validation("HPD levels must lie in (0, 1)".into()));
        }
        if self.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::Validation("quantiles must lie in [0, 1]".into()));
        }
        if !(0.0..0.5).contains(&self.peel) || !(self.lambda_kappa >= 0.0) {
            return Err(Error::Validation("peel must be in [0, 0.5) and λ_κ ≥ 0".into()));
        }
        Ok(())
    }
}

/// Metrics of one input column. Missing values are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnMetrics {
    pub x: f64,
    pub valid: bool,
    pub modes_ref: usize,
    pub modes_model: usize,
    pub e_count: Option<f64>,
    pub e_loc: Option<f64>,
    pub e_alloc: Option<f64>,
    /// `s` per unmatched mode on either side.
    pub unmatched_penalty: Option<f64>,
    pub scale: Option<f64>,
    pub h_ref: Option<f64>,
    pub h_model: Option<f64>,
    pub js: Option<f64>,
    /// JS on the unpeeled grid.
    pub js_full: Option<f64>,
    pub kl: Option<f64>,
    pub l2: Option<f64>,
    pub jaccard: Vec<Option<f64>>,
    #[serde(skip)]
    pub mode_sets: (ModeSet, ModeSet),
}

impl ColumnMetrics {
    fn missing(x: f64, n_gamma: usize) -> Self {
        Self {
            x,
            valid: false,
            modes_ref: 0,
            modes_model: 0,
            e_count: None,
            e_loc: None,
            e_alloc: None,
            unmatched_penalty: None,
            scale: None,
            h_ref: None,
            h_model: None,
            js: None,
            js_full: None,
            kl: None,
            l2: None,
            jaccard: vec![None; n_gamma],
            mode_sets: Default::default(),
        }
    }
}

/// Mean and quantiles of one metric over the valid columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub missing: usize,
    pub mean: Option<f64>,
    pub quantiles: Vec<(f64, f64)>,
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[Option<f64>], quantiles: &[f64]) -> Summary {
    let mut present: Vec<f64> = values.iter().flatten().copied().collect();
    present.sort_by(f64::total_cmp);
    let count = present.len();
    let mean = (count > 0).then(|| present.iter().sum::<f64>() / count as f64);
    let quantiles = if count > 0 {
        quantiles.iter().map(|&q| (q, quantile_sorted(&present, q))).collect()
    } else {
        Vec::new()
    };
    Summary {
        count,
        missing: values.len() - count,
        mean,
        quantiles,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub valid_columns: usize,
    pub e_count: Summary,
    pub e_loc: Summary,
    pub e_alloc: Summary,
    pub unmatched_penalty: Summary,
    pub h_ref: Summary,
    pub h_model: Summary,
    pub js: Summary,
    pub js_full: Summary,
    pub kl: Summary,
    pub l2: Summary,
    /// One summary per HPD level, in config order.
    pub jaccard: Vec<Summary>,
}

pub fn aggregate(rows: &[ColumnMetrics], config: &EvalConfig) -> Result<Aggregates> {
    let valid: Vec<&ColumnMetrics> = rows.iter().filter(|r| r.valid).collect();
    if valid.is_empty() {
        return Err(Error::NoValidColumns);
    }
    let q = &config.quantiles;
    let pick = |f: &dyn Fn(&ColumnMetrics) -> Option<f64>| -> Summary {
        let v: Vec<Option<f64>> = valid.iter().map(|r| f(r)).collect();
        summarize(&v, q)
    };
    Ok(Aggregates {
        valid_columns: valid.len(),
        e_count: pick(&|r| r.e_count),
        e_loc: pick(&|r| r.e_loc),
        e_alloc: pick(&|r| r.e_alloc),
        unmatched_penalty: pick(&|r| r.unmatched_penalty),
        h_ref: pick(&|r| r.h_ref),
        h_model: pick(&|r| r.h_model),
        js: pick(&|r| r.js),
        js_full: pick(&|r| r.js_full),
        kl: pick(&|r| r.kl),
        l2: pick(&|r| r.l2),
        jaccard: (0..config.gammas.len())
            .map(|g| pick(&|r| r.jaccard[g]))
            .collect(),
    })
}

/// Branch table: `branches[b][j]` is the `b`-th most prominent mode of
/// column `j`, or `None`.
pub fn mode_tracks(sets: &[ModeSet]) -> Vec<Vec<Option<f64>>> {
    let depth = sets.iter().map(ModeSet::len).max().unwrap_or(0);
    let mut branches = vec![vec![None; sets.len()]; depth];
    for (j, set) in sets.iter().enumerate() {
        let mut order: Vec<usize> = (0..set.len()).collect();
        order.sort_by(|&a, &b| set.prominences[b].total_cmp(&set.prominences[a]).then(a.cmp(&b)));
        for (b, &k) in order.iter().enumerate() {
            branches[b][j] = Some(set.locations[k]);
        }
    }
    branches
}

/// Median spacing between true modes, else the reference IQR.
fn local_scale(truth: &ModeSet, column: &crate::amplitude::DensityColumn) -> Result<f64> {
    if truth.len() >= 2 {
        let gaps: Vec<Option<f64>> = truth.locations.windows(2).map(|w| Some(w[1] - w[0])).collect();
        let s = summarize(&gaps, &[0.5]).quantiles[0].1;
        if s > 0.0 {
            return Ok(s);
        }
    }
    let iqr = density_iqr(column)?;
    if iqr > 0.0 {
        Ok(iqr)
    } else {
        // degenerate single-cell support
        let g = &column.grid;
        Ok((g[g.len() - 1] - g[0]) / g.len() as f64)
    }
}

fn column_metrics(
    reference: &ReferenceGrid,
    model: &ReferenceGrid,
    peeled: (&ReferenceGrid, &ReferenceGrid),
    j: usize,
    config: &EvalConfig,
) -> Result<ColumnMetrics> {
    let x = reference.grid.x_grid[j];
    let mut out = ColumnMetrics::missing(x, config.gammas.len());
    if !(reference.is_valid(j) && model.is_valid(j) && peeled.0.is_valid(j) && peeled.1.is_valid(j)) {
        return Ok(out);
    }
    out.valid = true;
    let p_ref = reference.column(j);
    let p_model = model.column(j);
    let truth = detect_modes(&p_ref, config.rho_ref);
    let pred = detect_modes(&p_model, config.rho_model);
    out.modes_ref = truth.len();
    out.modes_model = pred.len();
    out.e_count = Some(mode_count_error(&truth, &pred) as f64);
    let w = &reference.grid.weights;
    out.js_full = Some(js_divergence(&p_ref.values, &p_model.values, w)?);

    if !truth.is_empty() {
        let s = local_scale(&truth, &p_ref)?;
        out.scale = Some(s);
        let assignment = match_modes(&pred, &truth, s, config.lambda_kappa)?;
        out.e_loc = location_error(&assignment, &pred, &truth);
        let unmatched = assignment.unmatched_pred.len() + assignment.unmatched_true.len();
        out.unmatched_penalty = Some(s * unmatched as f64);
        let basins = voronoi_basins(&truth, &reference.grid.y_grid)?;
        let a_ref = allocation_vector(&p_ref, &basins, truth.len())?;
        let a_model = allocation_vector(&p_model, &basins, truth.len())?;
        out.e_alloc = Some(allocation_error(&a_model, &a_ref)?.clamp(0.0, 1.0));
    }

    let (pr, pm) = (peeled.0.column(j), peeled.1.column(j));
    let pw = &peeled.0.grid.weights;
    out.h_ref = Some(entropy(&pr.values, pw));
    out.h_model = Some(entropy(&pm.values, pw));
    out.js = Some(js_divergence(&pr.values, &pm.values, pw)?);
    out.kl = Some(kl_divergence(&pr.values, &pm.values, pw)?);
    out.l2 = Some(l2_distance(&pr.values, &pm.values, pw)?);
    for (g, &gamma) in config.gammas.iter().enumerate() {
        let a = hpd_set(&pr.values, pw, gamma)?;
        let b = hpd_set(&pm.values, pw, gamma)?;
        out.jaccard[g] = jaccard(&a.mask, &b.mask, pw)?;
    }
    out.mode_sets = (truth, pred);
    Ok(out)
}

/// Per-column metrics, aggregates and the settings that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub measure: crate::spectral_basis::Measure,
    pub n_x: usize,
    pub n_y: usize,
    pub n_y_peeled: usize,
    pub reference: serde_json::Value,
    pub model: serde_json::Value,
    pub aggregates: Aggregates,
    #[serde(skip)]
    pub columns: Vec<ColumnMetrics>,
}

fn same_grid(a: &ReferenceGrid, b: &ReferenceGrid) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Validation(
            "reference and model fields are on different grids".into(),
        ));
    }
    Ok(())
}

/// Compares `model` to `reference` column by column. Mode metrics use the
/// full grid; distributional metrics use the peeled grid. Columns are
/// processed in parallel on the current rayon pool and reduced in order.
pub fn evaluate_fields(reference: &ReferenceGrid, model: &ReferenceGrid, config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    same_grid(reference, model)?;
    let peeled_ref = peel_and_renormalize(reference, config.peel, config.smooth)?;
    let peeled_model = peel_and_renormalize(model, config.peel, config.smooth)?;
    let columns = (0..reference.n_x())
        .into_par_iter()
        .map(|j| column_metrics(reference, model, (&peeled_ref, &peeled_model), j, config))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = aggregate(&columns, config)?;
    Ok(EvalReport {
        config: config.clone(),
        measure: reference.grid.measure,
        n_x: reference.n_x(),
        n_y: reference.n_y(),
        n_y_peeled: peeled_ref.n_y(),
        reference: reference.provenance.clone(),
        model: model.provenance.clone(),
        aggregates,
        columns,
    })
}

impl EvalReport {
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec![
            "x", "valid", "modes_ref", "modes_model", "e_count", "e_loc", "e_alloc",
            "unmatched_penalty", "scale", "h_ref", "h_model", "js", "js_full", "kl", "l2",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        header.extend(self.config.gammas.iter().map(|g| format!("jaccard_{g}")));
        writeln!(out, "{}", header.join(","))?;
        for r in &self.columns {
            let mut row = vec![
                format!("{:.16e}", r.x),
                (r.valid as u8).to_string(),
                r.modes_ref.to_string(),
                r.modes_model.to_string(),
            ];
            row.extend(
                [
                    r.e_count, r.e_loc, r.e_alloc, r.unmatched_penalty, r.scale, r.h_ref,
                    r.h_model, r.js, r.js_full, r.kl, r.l2,
                ]
                .into_iter()
                .map(opt),
            );
            row.extend(r.jaccard.iter().map(|v| opt(*v)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Writes `report.json`, `columns.csv`, `tracks.csv` and SVG charts.
    pub fn save(&self, dir: &Path, reference: &ReferenceGrid, model: &ReferenceGrid) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = std::io::BufWriter::new(std::fs::File::create(dir.join("report.json"))?);
        self.write_json(&mut json)?;
        json.flush()?;
        let mut csv = std::io::BufWriter::new(std::fs::File::create(dir.join("columns.csv"))?);
        self.write_csv(&mut csv)?;
        csv.flush()?;
        self.write_tracks(&dir.join("tracks.csv"))?;
        self.write_charts(dir, reference, model)
    }

    fn write_tracks(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let refs: Vec<ModeSet> = self.columns.iter().map(|c| c.mode_sets.0.clone()).collect();
        let models: Vec<ModeSet> = self.columns.iter().map(|c| c.mode_sets.1.clone()).collect();
        let (tr, tm) = (mode_tracks(&refs), mode_tracks(&models));
        let mut header = vec!["x".to_string()];
        header.extend((0..tr.len()).map(|b| format!("ref_{b}")));
        header.extend((0..tm.len()).map(|b| format!("model_{b}")));
        writeln!(out, "{}", header.join(","))?;
        for (j, c) in self.columns.iter().enumerate() {
            let mut row = vec![format!("{:.16e}", c.x)];
            row.extend(tr.iter().map(|b| opt(b[j])));
            row.extend(tm.iter().map(|b| opt(b[j])));
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    fn write_charts(&self, dir: &Path, reference: &ReferenceGrid, model: &ReferenceGrid) -> Result<()> {
        use super::svg::{heatmap_pair, line_chart};
        let x: Vec<f64> = self.columns.iter().map(|c| c.x).collect();
        let series = |f: &dyn Fn(&ColumnMetrics) -> Option<f64>| -> Vec<Option<f64>> {
            self.columns.iter().map(f).collect()
        };
        std::fs::write(
            dir.join("mode_errors.svg"),
            line_chart(
                "mode errors",
                &x,
                &[
                    ("E_count", series(&|c| c.e_count)),
                    ("E_loc", series(&|c| c.e_loc)),
                    ("E_alloc", series(&|c| c.e_alloc)),
                ],
            ),
        )?;
        std::fs::write(
            dir.join("divergences.svg"),
            line_chart(
                "divergences",
                &x,
                &[
                    ("JS", series(&|c| c.js)),
                    ("H ref", series(&|c| c.h_ref)),
                    ("H model", series(&|c| c.h_model)),
                ],
            ),
        )?;
        let jac: Vec<(String, Vec<Option<f64>>)> = self
            .config
            .gammas
            .iter()
            .enumerate()
            .map(|(g, gamma)| (format!("J {gamma}"), series(&|c| c.jaccard[g])))
            .collect();
        let jac_ref: Vec<(&str, Vec<Option<f64>>)> =
            jac.iter().map(|(l, v)| (l.as_str(), v.clone())).collect();
        std::fs::write(dir.join("jaccard.svg"), line_chart("HPD Jaccard", &x, &jac_ref))?;
        std::fs::write(dir.join("heatmaps.svg"), heatmap_pair(reference, model))?;
        Ok(())
    }
}
