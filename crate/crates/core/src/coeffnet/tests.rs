use std::f64::consts::PI;

use ndarray::{Array1, Array2};

use super::*;
use crate::amplitude::CoefficientVector;
use crate::problems::{find_problem, generate_dataset, EvalGrid};
use crate::spectral_basis::{basis_values, BasisOperators, BasisSpec, Measure, OutputDomain, Potential};

fn domain() -> OutputDomain {
    OutputDomain::new(-2.0, 2.0).unwrap()
}

fn small_config(order: usize) -> TrainConfig {
    TrainConfig {
        order,
        hidden: vec![12, 10],
        ..Default::default()
    }
}

fn objective_for(config: &TrainConfig) -> Objective {
    let ops = BasisOperators::new(BasisSpec::new(config.order, domain()), config.potential).unwrap();
    Objective::new(&ops, config).unwrap()
}

fn batch(order: usize) -> (Array2<f64>, Array2<f64>) {
    let x = Array2::from_shape_vec((4, 1), vec![-1.3, -0.2, 0.4, 1.7]).unwrap();
    let spec = BasisSpec::new(order, domain());
    let ts = [-1.1, 0.3, 0.9, 1.6];
    let mut phi = Array2::zeros((4, spec.size()));
    for (i, &t) in ts.iter().enumerate() {
        let row = basis_values(spec.domain.to_canonical(t).unwrap(), spec.size());
        phi.row_mut(i).assign(&Array1::from(row));
    }
    (x, phi)
}

fn check_gradient(config: TrainConfig) {
    let obj = objective_for(&config);
    let params = MlpParams::init(1, &config.hidden, 2 * obj.size(), 5);
    let (x, phi) = batch(config.order);
    let (_, grads) = backward(&obj, &params, &x, &phi).unwrap();
    let analytic = grads.tensors();
    for (t, tensor) in params.tensors().iter().enumerate() {
        let stride = (tensor.len() / 50).max(1);
        for i in (0..tensor.len()).step_by(stride).take(50) {
            let h = 1e-5 * tensor[i].abs().max(1.0);
            let mut plus = params.clone();
            plus.tensors_mut()[t][i] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][i] -= h;
            let fd = (total_loss(&obj, &plus, &x, &phi).unwrap().total
                - total_loss(&obj, &minus, &x, &phi).unwrap().total)
                / (2.0 * h);
            let an = analytic[t][i];
            let err = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-3);
            assert!(err < 1e-4, "tensor {t} entry {i}: fd {fd} vs {an}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    check_gradient(TrainConfig {
        l2_coeff: 1e-2,
        ..small_config(6)
    });
}

#[test]
fn gradient_with_energy_penalties() {
    check_gradient(TrainConfig {
        l2_coeff: 1e-3,
        lambda_kin: 1e-3,
        lambda_pot: 0.05,
        operator_penalties: vec![OperatorPenalty {
            weight: 0.1,
            observable: PenaltyObservable::Exceedance { threshold: 0.5 },
        }],
        ..small_config(6)
    });
}

#[test]
fn gradient_in_trapezoid_and_real_modes() {
    check_gradient(TrainConfig {
        normalization: Normalization::Trapezoid,
        ..small_config(6)
    });
    check_gradient(TrainConfig {
        real_only: true,
        coeff_penalty: CoefficientPenalty::Projected,
        ..small_config(6)
    });
}

#[test]
fn zero_network_has_zero_gradient() {
    let config = TrainConfig {
        l2_coeff: 0.0,
        ..small_config(6)
    };
    let obj = objective_for(&config);
    let params = MlpParams::init(1, &config.hidden, 2 * obj.size(), 1).zeros_like();
    let (x, phi) = batch(6);
    let (parts, grads) = backward(&obj, &params, &x, &phi).unwrap();
    assert!(parts.total.is_finite());
    assert!(grads.tensors().iter().all(|t| t.iter().all(|v| *v == 0.0)));
}

#[test]
fn projected_penalty_is_constant_under_exact_normalization() {
    let config = TrainConfig {
        l2_coeff: 0.5,
        coeff_penalty: CoefficientPenalty::Projected,
        ..small_config(6)
    };
    let obj = objective_for(&config);
    let z = Array2::from_shape_fn((3, 14), |(i, j)| ((i * 7 + j) as f64 * 0.37).sin());
    // only the penalty: zero likelihood rows are replaced by a constant target
    let phi = Array2::zeros((3, 7));
    let (parts, grad) = obj.loss_and_grad(z.view(), &phi);
    let nll = -(NLL_EPS).ln();
    assert!((parts.total - nll - 0.5).abs() < 1e-9);
    assert!(grad.iter().all(|g| g.abs() < 1e-9));
}

#[test]
fn loss_is_gauge_and_scale_invariant() {
    let config = TrainConfig {
        l2_coeff: 0.0,
        ..small_config(6)
    };
    let obj = objective_for(&config);
    let (_, phi) = batch(6);
    let z = Array2::from_shape_fn((4, 14), |(i, j)| ((3 * i + j) as f64 * 0.61).cos());
    let base = obj.loss(z.view(), &phi).total;
    let theta = 0.83_f64;
    let mut rotated = z.clone();
    for i in 0..4 {
        for k in 0..7 {
            let (a, b) = (z[[i, k]], z[[i, k + 7]]);
            rotated[[i, k]] = a * theta.cos() - b * theta.sin();
            rotated[[i, k + 7]] = a * theta.sin() + b * theta.cos();
        }
    }
    assert!((obj.loss(rotated.view(), &phi).total - base).abs() < 1e-9);
    let scaled = &z * 3.0;
    let (c1, c3) = (obj.project(z.view()), obj.project(scaled.view()));
    assert!((&c1.re - &c3.re).iter().all(|d| d.abs() < 1e-12));
    assert!((&c1.im - &c3.im).iter().all(|d| d.abs() < 1e-12));
}

#[test]
fn ground_state_nll_and_potential() {
    let c = CoefficientVector::basis(7, 0);
    for xi in [-0.9, 0.0, 0.4] {
        assert!((nll_loss(&[c.clone()], &[xi]) - PI.ln()).abs() < 1e-10);
    }
    let config = TrainConfig {
        l2_coeff: 0.0,
        lambda_pot: 1.0,
        potential: Potential::Harmonic {
            center: 0.0,
            strength: 1.0,
        },
        ..small_config(6)
    };
    let obj = objective_for(&config);
    let mut z = Array2::zeros((1, 14));
    z[[0, 0]] = 2.5;
    let phi = Array2::from_elem((1, 7), 0.0);
    let parts = obj.loss(z.view(), &phi);
    assert!((parts.penalty - 16.0 / (3.0 * PI)).abs() < 1e-9, "{}", parts.penalty);
}

#[test]
fn zero_epochs_are_rejected() {
    let problem = find_problem("eq21").unwrap();
    let data = generate_dataset(&problem, 40, 3).unwrap();
    let config = TrainConfig {
        epochs: 0,
        ..small_config(4)
    };
    assert!(Trainer::new(&data, config).is_err());
}

#[test]
fn training_is_deterministic_and_improves() {
    let problem = find_problem("eq21").unwrap();
    let data = generate_dataset(&problem, 600, 11).unwrap();
    let config = TrainConfig {
        epochs: 12,
        batch_train: 64,
        learning_rate: 3e-3,
        hidden: vec![32, 32],
        ..small_config(10)
    };
    let a = train(&data, config.clone()).unwrap();
    let b = train(&data, config).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.params, b.params);
    let first = a.history[0].val_nll;
    assert!(a.best_val_nll().unwrap() < first);
    // uniform density under dμ has NLL = ln π
    assert!(a.best_val_nll().unwrap() < PI.ln());
}

#[test]
fn checkpoint_round_trip() {
    let problem = find_problem("p1").unwrap();
    let data = generate_dataset(&problem, 200, 2).unwrap();
    let config = TrainConfig {
        epochs: 3,
        hidden: vec![16],
        ..small_config(8)
    };
    let ckpt = train(&data, config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_checkpoint(&ckpt, &path).unwrap();
    let loaded = load_checkpoint(&path).unwrap();
    assert_eq!(loaded, ckpt);
    let (m1, m2) = (Model::new(ckpt).unwrap(), Model::new(loaded).unwrap());
    for i in 0..10 {
        let x = -1.5 + 0.3 * i as f64;
        let (a, b) = (m1.coefficients(x).unwrap(), m2.coefficients(x).unwrap());
        assert_eq!(a, b);
        assert!(m1.normalization_error(&a).unwrap() < 1e-6);
    }

    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_checkpoint(&path), Err(crate::Error::Malformed(_))));
    std::fs::write(&path, text.replacen("\"version\":1", "\"version\":9", 1)).unwrap();
    assert!(matches!(
        load_checkpoint(&path),
        Err(crate::Error::CheckpointVersion { found: 9, .. })
    ));
}

#[test]
fn model_field_is_normalized_in_both_measures() {
    let problem = find_problem("eq21").unwrap();
    let data = generate_dataset(&problem, 100, 4).unwrap();
    for normalization in [Normalization::Analytic, Normalization::Trapezoid] {
        let config = TrainConfig {
            epochs: 2,
            hidden: vec![8],
            normalization,
            ..small_config(8)
        };
        let model = Model::new(train(&data, config).unwrap()).unwrap();
        for measure in [Measure::ChebyshevMu, Measure::LebesgueY] {
            let grid = EvalGrid::new(vec![-1.0, 0.0, 1.0], 201, &domain(), measure).unwrap();
            let field = model.density_field(&grid).unwrap();
            for j in 0..3 {
                assert!(field.is_valid(j));
                assert!((field.column_mass(j) - 1.0).abs() < 1e-9);
            }
        }
    }
}
