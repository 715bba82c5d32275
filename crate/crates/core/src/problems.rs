//! Synthetic non-invertible forward maps, seeded datasets and reference
//! posteriors on evaluation grids.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplitude::DensityColumn;
use crate::error::{Error, Result};
use crate::spectral_basis::{gauss_chebyshev_rule, interior_y_rule, Measure, OutputDomain};

/// Columns with fewer accepted Monte Carlo draws than this are flagged.
pub const MIN_ACCEPTED: usize = 50;

/// `amplitude · sin(frequency · π · t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineTerm {
    pub amplitude: f64,
    /// Angular frequency in units of π.
    pub frequency: f64,
}

/// Forward map `x = g(t) + ε` with `g(t) = t + ∑ a sin(f π t)` and uniform noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardProblem {
    pub name: String,
    pub terms: Vec<SineTerm>,
    pub t_domain: OutputDomain,
    pub noise_halfwidth: f64,
}

impl ForwardProblem {
    pub fn new(name: &str, terms: &[(f64, f64)]) -> Self {
        Self {
            name: name.to_string(),
            terms: terms
                .iter()
                .map(|&(amplitude, frequency)| SineTerm {
                    amplitude,
                    frequency,
                })
                .collect(),
            t_domain: OutputDomain::new(-2.0, 2.0).expect("valid bounds"),
            noise_halfwidth: 0.1,
        }
    }

    /// `g(t)` without a domain check.
    pub fn g(&self, t: f64) -> f64 {
        t + self
            .terms
            .iter()
            .map(|s| s.amplitude * (s.frequency * PI * t).sin())
            .sum::<f64>()
    }

    /// Human-readable formula.
    pub fn formula(&self) -> String {
        let mut s = String::from("x = t");
        for term in &self.terms {
            s.push_str(&format!(" + {:.2} sin({}πt)", term.amplitude, term.frequency));
        }
        s
    }

    fn validate(&self) -> Result<()> {
        if !(self.noise_halfwidth > 0.0) {
            return Err(Error::Validation("noise half-width must be positive".into()));
        }
        Ok(())
    }
}

/// The five benchmark problems: `eq21`, `p1`..`p4`.
pub fn builtin_problems() -> Vec<ForwardProblem> {
    vec![
        ForwardProblem::new("eq21", &[(0.30, 2.0)]),
        ForwardProblem::new("p1", &[(0.60, 2.0), (0.25, 6.0)]),
        ForwardProblem::new("p2", &[(0.45, 3.0)]),
        ForwardProblem::new("p3", &[(0.35, 2.0), (0.15, 4.0)]),
        ForwardProblem::new("p4", &[(0.50, 5.0), (0.20, 1.0)]),
    ]
}

pub fn find_problem(name: &str) -> Result<ForwardProblem> {
    builtin_problems()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| {
            let known: Vec<_> = builtin_problems().into_iter().map(|p| p.name).collect();
            Error::Validation(format!("unknown problem {name:?}; known: {}", known.join(", ")))
        })
}

/// Noiseless `g(t)`; `t` must lie in the problem's domain.
pub fn forward_eval(problem: &ForwardProblem, t: f64) -> Result<f64> {
    if !problem.t_domain.contains(t) {
        return Err(Error::Domain {
            value: t,
            lower: problem.t_domain.lower(),
            upper: problem.t_domain.upper(),
        });
    }
    Ok(problem.g(t))
}

/// Supervised pairs `(x_i, t_i)` with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub problem: String,
    pub seed: u64,
    pub domain: OutputDomain,
    pub noise_halfwidth: f64,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

/// JSON provenance written next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetProvenance {
    pub problem: String,
    pub formula: String,
    pub n: usize,
    pub seed: u64,
    pub domain: OutputDomain,
    pub noise_halfwidth: f64,
    pub generator: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,t")?;
        for (x, t) in self.x.iter().zip(&self.t) {
            writeln!(out, "{x:.16e},{t:.16e}")?;
        }
        Ok(())
    }

    /// Reads `x,t` rows; the provenance fields come from `meta`.
    pub fn read_csv<R: BufRead>(reader: R, meta: &DatasetProvenance) -> Result<Self> {
        let mut x = Vec::new();
        let mut t = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Malformed(format!("dataset line {}: {line:?}", i + 1)))
            };
            x.push(next()?);
            t.push(next()?);
        }
        Ok(Self {
            problem: meta.problem.clone(),
            seed: meta.seed,
            domain: meta.domain,
            noise_halfwidth: meta.noise_halfwidth,
            x,
            t,
        })
    }

    pub fn provenance(&self, problem: &ForwardProblem) -> DatasetProvenance {
        DatasetProvenance {
            problem: self.problem.clone(),
            formula: problem.formula(),
            n: self.len(),
            seed: self.seed,
            domain: self.domain,
            noise_halfwidth: self.noise_halfwidth,
            generator: "chacha8".into(),
        }
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn save(&self, problem: &ForwardProblem, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut csv = std::io::BufWriter::new(fs::File::create(dir.join(format!("{stem}.csv")))?);
        self.write_csv(&mut csv)?;
        csv.flush()?;
        let meta = serde_json::to_string_pretty(&self.provenance(problem))?;
        fs::write(dir.join(format!("{stem}.json")), meta + "\n")?;
        Ok(())
    }

    /// Loads a CSV whose provenance sits next to it with a `.json` extension.
    pub fn load(csv_path: &Path) -> Result<Self> {
        let meta: DatasetProvenance =
            serde_json::from_str(&fs::read_to_string(csv_path.with_extension("json"))?)?;
        let reader = BufReader::new(fs::File::open(csv_path)?);
        let data = Self::read_csv(reader, &meta)?;
        if data.len() != meta.n {
            return Err(Error::Malformed(format!(
                "dataset has {} rows, provenance says {}",
                data.len(),
                meta.n
            )));
        }
        Ok(data)
    }
}

/// `t ~ U(domain)`, `ε ~ U(±h)`, `x = g(t) + ε`, from one seeded stream.
pub fn generate_dataset(problem: &ForwardProblem, n: usize, seed: u64) -> Result<Dataset> {
    problem.validate()?;
    if n == 0 {
        return Err(Error::Validation("dataset size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (problem.t_domain.lower(), problem.t_domain.upper());
    let h = problem.noise_halfwidth;
    let mut x = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    for _ in 0..n {
        let ti = a + (b - a) * rng.gen::<f64>();
        let eps = h * (2.0 * rng.gen::<f64>() - 1.0);
        t.push(ti);
        x.push(problem.g(ti) + eps);
    }
    Ok(Dataset {
        problem: problem.name.clone(),
        seed,
        domain: problem.t_domain,
        noise_halfwidth: h,
        x,
        t,
    })
}

/// Evaluation grid: `N_x` input columns by `N_y` output rows with weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub measure: Measure,
}

impl EvalGrid {
    /// Gauss–Chebyshev rows mapped to `y` (weights `π/N`) or interior
    /// trapezoid rows (Lebesgue weights).
    pub fn new(x_grid: Vec<f64>, n_y: usize, domain: &OutputDomain, measure: Measure) -> Result<Self> {
        if x_grid.is_empty() {
            return Err(Error::Validation("x grid is empty".into()));
        }
        let rule = match measure {
            Measure::ChebyshevMu => gauss_chebyshev_rule(n_y)?,
            Measure::LebesgueY => interior_y_rule(n_y, domain)?,
        };
        Ok(Self {
            x_grid,
            y_grid: rule.physical_nodes(domain),
            weights: rule.weights,
            measure,
        })
    }

    pub fn n_x(&self) -> usize {
        self.x_grid.len()
    }

    pub fn n_y(&self) -> usize {
        self.y_grid.len()
    }
}

/// `n` uniform points spanning the central `fraction` of `xs`.
pub fn central_x_grid(xs: &[f64], n: usize, fraction: f64) -> Result<Vec<f64>> {
    if xs.is_empty() || n == 0 {
        return Err(Error::Validation("need data and at least one column".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Validation(format!("central fraction {fraction} not in (0, 1]")));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - fraction);
    let lo = crate::evaluation::quantile_sorted(&sorted, tail);
    let hi = crate::evaluation::quantile_sorted(&sorted, 1.0 - tail);
    if n == 1 {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    Ok((0..n)
        .map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64)
        .collect())
}

/// Per-column status of a density field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnStatus {
    Valid,
    /// `x` lies outside the forward image; the column is zero.
    EmptySupport,
    /// Fewer than [`MIN_ACCEPTED`] Monte Carlo draws.
    LowFidelity,
}

/// Column-normalized densities `P[i, j]` on an [`EvalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGrid {
    pub grid: EvalGrid,
    /// `N_y × N_x`.
    pub values: Array2<f64>,
    pub status: Vec<ColumnStatus>,
    pub provenance: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    x_grid: Vec<f64>,
    y_grid: Vec<f64>,
    weights: Vec<f64>,
    measure: Measure,
    status: Vec<ColumnStatus>,
    provenance: serde_json::Value,
}

impl ReferenceGrid {
    pub fn n_x(&self) -> usize {
        self.grid.n_x()
    }

    pub fn n_y(&self) -> usize {
        self.grid.n_y()
    }

    pub fn is_valid(&self, j: usize) -> bool {
        self.status[j] == ColumnStatus::Valid
    }

    pub fn column(&self, j: usize) -> DensityColumn {
        DensityColumn {
            grid: self.grid.y_grid.clone(),
            values: self.values.column(j).to_vec(),
            weights: self.grid.weights.clone(),
            measure: self.grid.measure,
            clipped: 0,
        }
    }

    /// `∑_i P[i, j] ω_i`.
    pub fn column_mass(&self, j: usize) -> f64 {
        self.values
            .column(j)
            .iter()
            .zip(&self.grid.weights)
            .map(|(p, w)| p * w)
            .sum()
    }

    /// Builds a field from per-column densities; zero-mass columns are
    /// flagged empty, the rest renormalized under the grid weights.
    pub fn from_columns(
        grid: EvalGrid,
        columns: Vec<Vec<f64>>,
        provenance: serde_json::Value,
    ) -> Result<Self> {
        if columns.len() != grid.n_x() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_x(),
                actual: columns.len(),
            });
        }
        let (n_y, n_x) = (grid.n_y(), grid.n_x());
        let mut values = Array2::zeros((n_y, n_x));
        let mut status = vec![ColumnStatus::Valid; n_x];
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != n_y {
                return Err(Error::DimensionMismatch {
                    expected: n_y,
                    actual: col.len(),
                });
            }
            let mass: f64 = col.iter().zip(&grid.weights).map(|(p, w)| p * w).sum();
            if mass > 0.0 && mass.is_finite() {
                for (i, p) in col.into_iter().enumerate() {
                    values[[i, j]] = p / mass;
                }
            } else {
                status[j] = ColumnStatus::EmptySupport;
            }
        }
        Ok(Self {
            grid,
            values,
            status,
            provenance,
        })
    }

    /// Writes the matrix as CSV (one row per `y`) and a JSON sidecar.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        if let Some(dir) = csv_path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut out = std::io::BufWriter::new(fs::File::create(csv_path)?);
        crate::io::write_matrix_csv(&mut out, &self.values)?;
        out.flush()?;
        let sidecar = Sidecar {
            x_grid: self.grid.x_grid.clone(),
            y_grid: self.grid.y_grid.clone(),
            weights: self.grid.weights.clone(),
            measure: self.grid.measure,
            status: self.status.clone(),
            provenance: self.provenance.clone(),
        };
        fs::write(
            csv_path.with_extension("json"),
            serde_json::to_string_pretty(&sidecar)? + "\n",
        )?;
        Ok(())
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(csv_path.with_extension("json"))?)?;
        let reader = BufReader::new(fs::File::open(csv_path)?);
        let values = crate::io::read_matrix_csv(reader)?;
        if values.dim() != (side.y_grid.len(), side.x_grid.len()) {
            return Err(Error::Malformed(format!(
                "matrix is {:?}, sidecar grids are {} × {}",
                values.dim(),
                side.y_grid.len(),
                side.x_grid.len()
            )));
        }
        Ok(Self {
            grid: EvalGrid {
                x_grid: side.x_grid,
                y_grid: side.y_grid,
                weights: side.weights,
                measure: side.measure,
            },
            values,
            status: side.status,
            provenance: side.provenance,
        })
    }
}

/// Bayes posterior under the uniform prior and uniform noise:
/// `P[i, j] ∝ 1{|x_j - g(y_i)| ≤ h}`, normalized with the grid weights.
pub fn reference_posterior(problem: &ForwardProblem, grid: &EvalGrid) -> Result<ReferenceGrid> {
    problem.validate()?;
    let h = problem.noise_halfwidth;
    let gy: Vec<f64> = grid.y_grid.iter().map(|&y| problem.g(y)).collect();
    let columns = grid
        .x_grid
        .iter()
        .map(|&x| {
            gy.iter()
                .map(|&g| if (x - g).abs() <= h { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let provenance = serde_json::json!({
        "kind": "analytic",
        "problem": problem.name,
        "formula": problem.formula(),
        "noise_halfwidth": h,
    });
    ReferenceGrid::from_columns(grid.clone(), columns, provenance)
}

/// Cell edges around each grid node: midpoints between neighbours, clamped
/// to the domain at the ends.
pub fn cell_edges(y_grid: &[f64], domain: &OutputDomain) -> Vec<f64> {
    let n = y_grid.len();
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(domain.lower());
    for i in 1..n {
        edges.push(0.5 * (y_grid[i - 1] + y_grid[i]));
    }
    edges.push(domain.upper());
    edges
}

/// Kernel-conditioned Monte Carlo posterior: `M` forward draws, accepted for
/// column `j` when `|x - x_j| ≤ bandwidth`, histogrammed into the grid cells.
pub fn monte_carlo_posterior(
    problem: &ForwardProblem,
    grid: &EvalGrid,
    draws: usize,
    bandwidth: f64,
    seed: u64,
) -> Result<ReferenceGrid> {
    if draws < 10_000 {
        return Err(Error::Validation(format!("need at least 10000 draws, got {draws}")));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::Validation("bandwidth must be positive".into()));
    }
    let data = generate_dataset(problem, draws, seed)?;
    let mut pairs: Vec<(f64, f64)> = data.x.into_iter().zip(data.t).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let edges = cell_edges(&grid.y_grid, &problem.t_domain);
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();

    let mut accepted = Vec::with_capacity(grid.n_x());
    let columns: Vec<Vec<f64>> = grid
        .x_grid
        .iter()
        .map(|&xj| {
            let start = pairs.partition_point(|p| p.0 < xj - bandwidth);
            let end = pairs.partition_point(|p| p.0 <= xj + bandwidth);
            let mut counts = vec![0.0; grid.n_y()];
            for &(_, t) in &pairs[start..end] {
                let cell = edges.partition_point(|&e| e <= t).clamp(1, grid.n_y()) - 1;
                counts[cell] += 1.0;
            }
            accepted.push(end - start);
            counts.iter().zip(&widths).map(|(c, w)| c / w).collect()
        })
        .collect();
    let provenance = serde_json::json!({
        "kind": "monte_carlo",
        "problem": problem.name,
        "draws": draws,
        "bandwidth": bandwidth,
        "seed": seed,
        "accepted": accepted,
    });
    let mut field = ReferenceGrid::from_columns(grid.clone(), columns, provenance)?;
    for (j, &n) in accepted.iter().enumerate() {
        if n == 0 {
            field.status[j] = ColumnStatus::EmptySupport;
        } else if n < MIN_ACCEPTED {
            field.status[j] = ColumnStatus::LowFidelity;
        }
    }
    Ok(field)
}

/// `½ ∑ |p_i - q_i| ω_i` for column `j` of two fields on the same grid.
pub fn column_total_variation(a: &ReferenceGrid, b: &ReferenceGrid, j: usize) -> f64 {
    0.5 * a
        .values
        .column(j)
        .iter()
        .zip(b.values.column(j))
        .zip(&a.grid.weights)
        .map(|((p, q), w)| (p - q).abs() * w)
        .sum::<f64>()
}
