//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=2,5` restricts the run to the listed criteria.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use born_density::amplitude::{chebyshev_weight, norm_quadrature_check, CoefficientVector};
use born_density::coeffnet::{
    backward, nll_loss, total_loss, train, Checkpoint, MlpParams, Model, Normalization, Objective, OperatorPenalty,
    PenaltyObservable, TrainConfig,
};
use born_density::evaluation::{evaluate_fields, match_modes, solve_rectangular, EvalConfig, ModeSet};
use born_density::operators::{
    expectation, kinetic_energy, potential_energy, project_function, uncertainty_product, ObservableSet,
};
use born_density::problems::{
    central_x_grid, find_problem, generate_dataset, reference_posterior, Dataset, EvalGrid, ReferenceGrid,
};
use born_density::spectral_basis::{
    basis_values, default_mu_nodes, gauss_chebyshev_rule, gram_matrix, BasisOperators, BasisSpec, Measure,
    OutputDomain, Potential,
};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn domain() -> OutputDomain {
    OutputDomain::new(-2.0, 2.0).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, size: usize) -> CoefficientVector {
    let re = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let im = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CoefficientVector::new(re, im).unwrap()
}

fn within(elapsed: Duration, secs: f64) -> bool {
    elapsed.as_secs_f64() < secs
}

// 1
fn orthonormality() -> Outcome {
    let start = Instant::now();
    let mut gram_dev = 0.0f64;
    for order in 0..=35 {
        let spec = BasisSpec::new(order, domain());
        let rule = gauss_chebyshev_rule(default_mu_nodes(order)).unwrap();
        let g = gram_matrix(&spec, &rule);
        for ((j, k), v) in g.indexed_iter() {
            gram_dev = gram_dev.max((v - if j == k { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut norm_dev = 0.0f64;
    for i in 0..1000 {
        let order = [6, 24, 35][i % 3];
        let rule = gauss_chebyshev_rule(default_mu_nodes(order)).unwrap();
        let c = random_state(&mut rng, order + 1);
        norm_dev = norm_dev.max(norm_quadrature_check(&c, &rule).unwrap());
    }
    let t = start.elapsed();
    outcome(
        gram_dev < 1e-10 && norm_dev < 1e-10 && within(t, 5.0),
        format!("max |G - I| {gram_dev:.1e}, max norm gap {norm_dev:.1e} over 1000 states"),
    )
}

// 2
fn gradients() -> Outcome {
    let start = Instant::now();
    let order = 6;
    let config = TrainConfig {
        order,
        l2_coeff: 1e-3,
        lambda_kin: 1e-3,
        lambda_pot: 0.1,
        operator_penalties: vec![OperatorPenalty {
            weight: 0.05,
            observable: PenaltyObservable::Interval { lo: -0.5, hi: 1.0 },
        }],
        ..Default::default()
    };
    let spec = BasisSpec::new(order, domain());
    let ops = BasisOperators::new(spec, config.potential).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = Array2::from_shape_fn((4, 1), |_| rng.gen_range(-2.0..2.0));
    let mut phi = Array2::zeros((4, spec.size()));
    for i in 0..4 {
        let t: f64 = rng.gen_range(-1.9..1.9);
        phi.row_mut(i)
            .assign(&Array1::from(basis_values(spec.domain.to_canonical(t).unwrap(), spec.size())));
    }

    let mut worst = 0.0f64;
    let mut checked = 0;
    for normalization in [Normalization::Analytic, Normalization::Trapezoid] {
        let config = TrainConfig {
            normalization,
            ..config.clone()
        };
        let obj = Objective::new(&ops, &config).unwrap();
        let params = MlpParams::init(1, &config.hidden, 2 * spec.size(), 9);
        let (_, grads) = backward(&obj, &params, &x, &phi).unwrap();
        let analytic = grads.tensors();
        let n_tensors = params.tensors().len();
        for t in 0..n_tensors {
            let len = params.tensors()[t].len();
            let picks: Vec<usize> = if len <= 50 {
                (0..len).collect()
            } else {
                rand::seq::index::sample(&mut rng, len, 50).into_vec()
            };
            for i in picks {
                let value = params.tensors()[t][i];
                let h = 1e-5 * value.abs().max(1.0);
                let mut p = params.clone();
                p.tensors_mut()[t][i] = value + h;
                let up = total_loss(&obj, &p, &x, &phi).unwrap().total;
                p.tensors_mut()[t][i] = value - h;
                let down = total_loss(&obj, &p, &x, &phi).unwrap().total;
                let fd = (up - down) / (2.0 * h);
                let an = analytic[t][i];
                let err = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-6);
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-4 && within(t, 30.0),
        format!("{checked} coordinates, max relative error {worst:.1e}"),
    )
}

// 3
fn gauge() -> Outcome {
    let spec = BasisSpec::new(24, domain());
    let ops = BasisOperators::new(spec, Potential::default()).unwrap();
    let mut set = ObservableSet::from_operators(&ops);
    set.insert_exceedance(0.3).unwrap();
    set.insert_interval(-1.0, 0.5).unwrap();
    set.insert_function("cos", f64::cos);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xi: Vec<f64> = (0..16).map(|_| rng.gen_range(-0.99..0.99)).collect();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let raw = random_state(&mut rng, spec.size());
        let c = raw.scale(1.0 / raw.norm_sq().sqrt(), 0.0);
        let r = c.rotate(rng.gen_range(0.0..2.0 * PI));
        let cs = vec![c.clone(); xi.len()];
        let rs = vec![r.clone(); xi.len()];
        let mut gaps = vec![
            (nll_loss(&cs, &xi) - nll_loss(&rs, &xi)).abs(),
            (kinetic_energy(&c, &ops.stiffness) - kinetic_energy(&r, &ops.stiffness)).abs(),
            (potential_energy(&c, &ops.potential) - potential_energy(&r, &ops.potential)).abs(),
            (expectation(&c, &ops.moment_y) - expectation(&r, &ops.moment_y)).abs(),
        ];
        for ((_, a), (_, b)) in set.evaluate(&c).into_iter().zip(set.evaluate(&r)) {
            gaps.push((a - b).abs());
        }
        let (uc, ur) = (uncertainty_product(&c, &ops).unwrap(), uncertainty_product(&r, &ops).unwrap());
        gaps.push((uc.product - ur.product).abs());
        worst = gaps.into_iter().fold(worst, f64::max);
    }
    outcome(worst < 1e-9, format!("max change under rotation {worst:.1e} over 200 states"))
}

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(cost, row + 1, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let (n, m) = (cost.len(), cost[0].len());
    let transposed;
    let cost = if n > m {
        transposed = (0..m).map(|j| (0..n).map(|i| cost[i][j]).collect()).collect::<Vec<Vec<f64>>>();
        &transposed[..]
    } else {
        cost
    };
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost[0].len()], 0.0, &mut best);
    best
}

// 4
fn hungarian() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let modes = |rng: &mut ChaCha8Rng, n: usize| ModeSet {
        indices: (0..n).collect(),
        locations: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        prominences: vec![1.0; n],
        curvatures: (0..n).map(|_| rng.gen_range(0.0..5.0)).collect(),
    };
    let mut worst = 0.0f64;
    for i in 0..500 {
        let (n, m) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let (pred, truth) = (modes(&mut rng, n), modes(&mut rng, m));
        let (scale, lk) = (rng.gen_range(0.1..2.0), if i % 2 == 0 { 0.0 } else { 0.3 });
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                (0..m)
                    .map(|s| {
                        (pred.locations[r] - truth.locations[s]).abs() / scale
                            + lk * (pred.curvatures[r] - truth.curvatures[s]).abs()
                    })
                    .collect()
            })
            .collect();
        let a = match_modes(&pred, &truth, scale, lk).unwrap();
        let exact = brute_force(&cost);
        worst = worst.max((a.total_cost - exact).abs());
        assert_eq!(a.pairs.len(), n.min(m));
        let rows = solve_rectangular(&cost);
        let direct: f64 = rows
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| cost[r][c]))
            .sum();
        worst = worst.max((direct - exact).abs());
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-9 && within(t, 5.0),
        format!("500 instances, max gap to brute force {worst:.1e}"),
    )
}

fn eq21_setup(n_x: usize) -> (Dataset, EvalGrid, ReferenceGrid) {
    let problem = find_problem("eq21").unwrap();
    let data = generate_dataset(&problem, 10_000, 7).unwrap();
    let xs = central_x_grid(&data.x, n_x, 0.98).unwrap();
    let grid = EvalGrid::new(xs, 401, &problem.t_domain, Measure::ChebyshevMu).unwrap();
    let reference = reference_posterior(&problem, &grid).unwrap();
    (data, grid, reference)
}

// 5
fn self_consistency() -> Outcome {
    let start = Instant::now();
    let (_, _, reference) = eq21_setup(121);
    let mut lines = Vec::new();
    let mut pass = true;
    for peel in [0.0, 0.05] {
        // the reference plays both roles, so both sides use its threshold
        let config = EvalConfig {
            rho_model: 1e-4,
            peel,
            ..Default::default()
        };
        let report = evaluate_fields(&reference, &reference, &config).unwrap();
        let a = &report.aggregates;
        let zero = |v: Option<f64>| v.is_some_and(|v| v.abs() <= 1e-9);
        let ok = zero(a.e_count.mean)
            && zero(a.e_loc.mean)
            && zero(a.e_alloc.mean)
            && zero(a.js.mean)
            && a.jaccard.iter().all(|s| s.mean.is_some_and(|v| (v - 1.0).abs() <= 1e-9));
        pass &= ok;
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.1e}"));
        lines.push(format!(
            "peel {peel}: {} columns, E_count {} E_loc {} E_alloc {} JS {}",
            a.valid_columns,
            show(a.e_count.mean),
            show(a.e_loc.mean),
            show(a.e_alloc.mean),
            show(a.js.mean)
        ));
    }
    let t = start.elapsed();
    outcome(pass && within(t, 10.0), lines.join("; "))
}

/// Builds a field on `grid` from a Lebesgue density `f(y)` per column.
fn field_from(grid: &EvalGrid, reference: &ReferenceGrid, f: impl Fn(usize, f64) -> f64) -> ReferenceGrid {
    let d = domain();
    let columns = (0..grid.n_x())
        .map(|j| {
            grid.y_grid
                .iter()
                .map(|&y| {
                    let to_measure = match grid.measure {
                        Measure::LebesgueY => 1.0,
                        Measure::ChebyshevMu => 1.0 / (chebyshev_weight(d.to_canonical(y).unwrap()) * d.jacobian()),
                    };
                    f(j, y) * to_measure
                })
                .collect()
        })
        .collect();
    ReferenceGrid::from_columns(grid.clone(), columns, reference.provenance.clone()).unwrap()
}

// 6
fn desk_training() -> Outcome {
    let (data, grid, reference) = eq21_setup(121);
    let ckpt: Checkpoint = train(&data, TrainConfig::default()).unwrap();
    let first = ckpt.history[0].val_nll;
    let best = ckpt.best_val_nll().unwrap();
    let model = Model::new(ckpt.clone()).unwrap();
    let field = model.density_field(&grid).unwrap();

    let config = EvalConfig {
        peel: 0.05,
        ..Default::default()
    };
    let trained = evaluate_fields(&reference, &field, &config).unwrap();

    let d = domain();
    let uniform = field_from(&grid, &reference, |_, y| chebyshev_weight(d.to_canonical(y).unwrap()) * d.jacobian());
    let js_bar = evaluate_fields(&reference, &uniform, &config).unwrap().aggregates.js.mean.unwrap();

    let means: Vec<f64> = (0..grid.n_x())
        .map(|j| {
            let col = reference.column(j);
            col.grid.iter().zip(&col.values).zip(&col.weights).map(|((y, p), w)| y * p * w).sum()
        })
        .collect();
    let bump = field_from(&grid, &reference, |j, y| (-(y - means[j]).powi(2) / (2.0 * 0.25 * 0.25)).exp());
    let count_bar = evaluate_fields(&reference, &bump, &config).unwrap().aggregates.e_count.mean.unwrap();

    let js = trained.aggregates.js.mean.unwrap();
    let e_count = trained.aggregates.e_count.mean.unwrap();
    let a = first - best >= 0.5;
    let b = js < js_bar;
    let c = e_count <= 0.7 * count_bar;

    // diagnostic only: the same comparison on Lebesgue-measure columns
    let y_grid = EvalGrid::new(grid.x_grid.clone(), 401, &d, Measure::LebesgueY).unwrap();
    let y_reference = reference_posterior(&find_problem("eq21").unwrap(), &y_grid).unwrap();
    let y_field = model.density_field(&y_grid).unwrap();
    let y_count = evaluate_fields(&y_reference, &y_field, &config).unwrap().aggregates.e_count.mean.unwrap();
    outcome(
        a && b && c,
        format!(
            "(a) val NLL {first:.3} → {best:.3} at epoch {}/{} [{}]; (b) JS {js:.4} vs uniform {js_bar:.4} [{}]; \
             (c) E_count {e_count:.3} vs bar {:.3} (unimodal {count_bar:.3}) [{}]; under dy E_count {y_count:.3}",
            ckpt.best_epoch,
            ckpt.history.len(),
            ok(a),
            ok(b),
            0.7 * count_bar,
            ok(c)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "miss"
    }
}

fn probe_xs(data: &Dataset, n: usize) -> Vec<f64> {
    central_x_grid(&data.x, n, 0.98).unwrap()
}

// 7
fn normalization_contrast() -> Outcome {
    let problem = find_problem("eq21").unwrap();
    let data = generate_dataset(&problem, 10_000, 7).unwrap();
    let probes = probe_xs(&data, 41);
    let mut results = Vec::new();
    for normalization in [Normalization::Analytic, Normalization::Trapezoid] {
        let config = TrainConfig {
            hidden: vec![128, 128, 128],
            epochs: 40,
            normalization,
            ..Default::default()
        };
        let model = Model::new(train(&data, config).unwrap()).unwrap();
        let mut errors: Vec<f64> = probes
            .iter()
            .map(|&x| model.normalization_error(&model.coefficients(x).unwrap()).unwrap())
            .collect();
        errors.sort_by(f64::total_cmp);
        results.push((errors, model.checkpoint.best_val_nll().unwrap()));
    }
    let (ea, na) = (results[0].0[probes.len() - 1], results[0].1);
    let (errs, nt) = (&results[1].0, results[1].1);
    let et = errs[errs.len() - 1];
    let over = errs.iter().filter(|e| **e >= 2e-3).count();
    let pass = ea < 1e-8 && et < 2e-3 && na <= nt + 0.05;
    outcome(
        pass,
        format!(
            "analytic max |mass-1| {ea:.1e}, NLL {na:.4}; trapezoid max |mass-1| {et:.1e} (median {:.1e}, \
             {over}/{} probes at or above 2e-3), NLL {nt:.4}",
            errs[errs.len() / 2],
            errs.len()
        ),
    )
}

// 8
fn regularizer_monotonicity() -> Outcome {
    let problem = find_problem("eq21").unwrap();
    let data = generate_dataset(&problem, 4000, 7).unwrap();
    let probes = probe_xs(&data, 41);
    let base = TrainConfig {
        hidden: vec![64, 64],
        epochs: 25,
        potential: Potential::Harmonic {
            center: 0.0,
            strength: 1.0,
        },
        ..Default::default()
    };
    let mean_energies = |config: TrainConfig| -> (f64, f64) {
        let model = Model::new(train(&data, config).unwrap()).unwrap();
        let (mut kin, mut pot) = (0.0, 0.0);
        for &x in &probes {
            let c = model.coefficients(x).unwrap();
            kin += kinetic_energy(&c, &model.ops.stiffness);
            pot += potential_energy(&c, &model.ops.potential);
        }
        let n = probes.len() as f64;
        (kin / n, pot / n)
    };
    let pot: Vec<f64> = [0.0, 0.1, 1.0]
        .iter()
        .map(|&lambda_pot| {
            mean_energies(TrainConfig {
                lambda_pot,
                lambda_kin: 1e-3,
                ..base.clone()
            })
            .1
        })
        .collect();
    let kin: Vec<f64> = [0.0, 1e-3, 1e-1]
        .iter()
        .map(|&lambda_kin| {
            mean_energies(TrainConfig {
                lambda_kin,
                ..base.clone()
            })
            .0
        })
        .collect();
    let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        nonincreasing(&pot) && nonincreasing(&kin),
        format!("⟨M⟩ over λ_pot {{0, 0.1, 1}}: {pot:.4?}; ⟨K⟩ over λ_kin {{0, 1e-3, 1e-1}}: {kin:.2?}"),
    )
}

// 9
fn uncertainty() -> Outcome {
    let spec = BasisSpec::new(35, domain());
    let ops = BasisOperators::new(spec, Potential::default()).unwrap();
    let gaussian = project_function(|xi| (-16.0 * xi * xi).exp(), spec.order);
    let g = uncertainty_product(&gaussian, &ops).unwrap();
    let e0 = uncertainty_product(&CoefficientVector::basis(spec.size(), 0), &ops).unwrap();
    let pass = g.boundary_mass < 1e-3 && !g.boundary_flag && g.product >= 0.475 && e0.product == 0.0 && e0.boundary_flag;
    outcome(
        pass,
        format!(
            "Gaussian ΔYΔP {:.4} (boundary mass {:.1e}); e_0 product {} with boundary mass {:.3} flagged {}",
            g.product, g.boundary_mass, e0.product, e0.boundary_mass, e0.boundary_flag
        ),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("orthonormality and normalization", orthonormality),
        ("gradient check", gradients),
        ("gauge invariance", gauge),
        ("assignment oracle", hungarian),
        ("evaluation self-consistency", self_consistency),
        ("desk-scale training", desk_training),
        ("normalization-mode contrast", normalization_contrast),
        ("regularizer monotonicity", regularizer_monotonicity),
        ("uncertainty diagnostic", uncertainty),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failures += 1;
        }
        println!(
            "criterion {n} ({name}): {} [{:.1}s] {}",
            if result.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
