use choquet_probit_core::dataset::ChoiceDataset;
use choquet_probit_core::estimator::{
    estimate_model, fd_gradient, max_violation, GradientScheme, Likelihood, OptimizerConfig,
};
use choquet_probit_core::fuzzy::random_capacity;
use choquet_probit_core::membership::{Direction, MembershipShape};
use choquet_probit_core::mnp::{CovParameterization, ErrorKind, ErrorStructure, HaltonPlan};
use choquet_probit_core::simulation::{generate_dataset, DgpConfig, DgpVariant};
use choquet_probit_core::utility::{CiAttribute, CiScale, Model, ModelParams, Normalization, UtilitySpec, WsTerm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_problem() -> (DgpConfig, ChoiceDataset, Vec<f64>) {
    let dgp = DgpConfig::preset(4, DgpVariant::CiIid, 250, 1, 99).unwrap();
    let (data, truth) = generate_dataset(&dgp, 0).unwrap();
    (dgp, data, truth.values)
}

fn config() -> OptimizerConfig {
    OptimizerConfig {
        draws: HaltonPlan::new(50, 100),
        ..OptimizerConfig::default()
    }
}

#[test]
fn estimate_is_feasible_monotone_and_reproducible() {
    let (dgp, data, _) = small_problem();
    let model = dgp.model().unwrap();
    let start = model.feasible_start(&data).unwrap();
    let a = estimate_model(&model, &data, &start, &config()).unwrap();
    let (eq, ineq) = model.constraints().unwrap();
    assert!(max_violation(&eq, &ineq, &a.theta) < 1e-8);
    assert!(a.max_violation < 1e-8);
    for w in a.loglik_trace.windows(2) {
        assert!(w[1] >= w[0], "loglik decreased: {} -> {}", w[0], w[1]);
    }
    assert!(a.loglik >= a.loglik_start);
    let b = estimate_model(&model, &data, &start, &config()).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.loglik_trace), bits(&b.loglik_trace));
    assert_eq!(bits(&a.theta), bits(&b.theta));
}

#[test]
fn central_gradient_is_richardson_consistent() {
    let (dgp, data, truth) = small_problem();
    let model = dgp.model().unwrap();
    let lik = Likelihood::new(&model, &data, &HaltonPlan::new(50, 100)).unwrap();
    let n = data.len() as f64;
    let f = |t: &[f64]| lik.loglik(t).map(|l| -l / n);
    let fx = f(&truth).unwrap();
    let h = 0.02;
    let g1 = fd_gradient(&f, &truth, fx, h, GradientScheme::Central).unwrap();
    let g2 = fd_gradient(&f, &truth, fx, h / 2.0, GradientScheme::Central).unwrap();
    let g3 = fd_gradient(&f, &truth, fx, h / 4.0, GradientScheme::Central).unwrap();
    for k in 0..truth.len() {
        let d1 = (g1[k] - g2[k]).abs();
        let d2 = (g2[k] - g3[k]).abs();
        // second-order scheme: halving h cuts the difference by about 4
        assert!(d2 <= 0.5 * d1 + 1e-9, "component {k}: {d1:e} then {d2:e}");
    }
}

fn rich_model() -> Model {
    let n = 4;
    let spec = UtilitySpec {
        n_alternatives: n,
        asc: true,
        ws_terms: vec![WsTerm {
            name: "cost".into(),
            column: "w".into(),
            alternatives: None,
        }],
        ci_attributes: vec![
            CiAttribute {
                name: "x1".into(),
                column: "x1".into(),
                normalization: Normalization::MinMax { direction: Direction::Positive },
            },
            CiAttribute {
                name: "x2".into(),
                column: "x2".into(),
                normalization: Normalization::Cutoff {
                    shape: MembershipShape::HalfTriangularDecreasing,
                    covariates: vec!["z".into()],
                    vary_first_point: false,
                    groups: None,
                },
            },
            CiAttribute {
                name: "x3".into(),
                column: "x3".into(),
                normalization: Normalization::Cutoff {
                    shape: MembershipShape::Trapezoidal,
                    covariates: Vec::new(),
                    vary_first_point: false,
                    groups: None,
                },
            },
        ],
        capacity_mode: Default::default(),
        ci_scale: CiScale::Estimated,
    };
    let err = ErrorStructure::new(ErrorKind::Full, CovParameterization::FreeCholeskyTopLeftFixed, n).unwrap();
    let cols: Vec<String> = ["x1", "x2", "x3", "z", "w"].iter().map(|s| s.to_string()).collect();
    Model::compile(&spec, err, &cols).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pack_unpack_round_trip(seed: u64, raw in prop::collection::vec(-2.0f64..2.0, 20), scale in 0.1f64..5.0) {
        let model = rich_model();
        let n_err = model.error_structure().n_free();
        let params = ModelParams {
            mobius: vec![random_capacity(3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().to_mobius()],
            cutoffs: vec![
                Vec::new(),
                vec![vec![vec![raw[0]], vec![raw[1], raw[2]]]],
                vec![vec![vec![raw[3]], vec![raw[4]], vec![raw[5]], vec![raw[6]]]],
            ],
            betas: vec![raw[7]],
            ascs: vec![0.0, raw[8], raw[9], raw[10]],
            error: raw[11..11 + n_err].to_vec(),
            scale,
        };
        let theta = model.pack(&params).unwrap();
        let back = model.unpack(&theta).unwrap();
        prop_assert_eq!(back.cutoffs.clone(), params.cutoffs.clone());
        prop_assert_eq!(back.betas.clone(), params.betas.clone());
        prop_assert_eq!(back.ascs.clone(), params.ascs.clone());
        prop_assert_eq!(back.error.clone(), params.error.clone());
        prop_assert!((back.scale - scale).abs() <= 1e-12 * scale);
        for (a, b) in back.mobius[0].values().iter().zip(params.mobius[0].values()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        // ln λ passes through exp and back
        for (a, b) in model.pack(&back).unwrap().iter().zip(&theta) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}
