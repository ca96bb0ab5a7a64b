use choquet_probit_core::estimator::{estimate_model, OptimizerConfig};
use choquet_probit_core::mnp::{choice_probabilities, ErrorStructure, HaltonPlan, ProbitKernel};
use choquet_probit_core::simulation::{
    apb, generate_dataset, sdmae, DgpConfig, DgpVariant, MarginalEffects, TrueParameters,
};
use choquet_probit_core::utility::{CiScale, UtilitySpec, WsTerm};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metrics_vanish_exactly_at_truth(
        truth in prop::collection::vec(prop_oneof![-2.0f64..-0.1, 0.1f64..2.0], 2..6),
        reps in 1usize..5,
        slot in 0usize..30,
        delta in prop_oneof![Just(0.0), -0.5f64..-1e-6, 1e-6f64..0.5],
    ) {
        let mut estimates = vec![truth.clone(); reps];
        let r = slot % reps;
        let k = slot % truth.len();
        estimates[r][k] += delta;
        let s = sdmae(&truth, &estimates).unwrap();
        let a = apb(&truth, &estimates).unwrap().unwrap();
        prop_assert_eq!(s == 0.0, delta == 0.0);
        prop_assert_eq!(a == 0.0, delta == 0.0);
    }

    #[test]
    fn quantile_tables_are_monotone(
        changes in prop::collection::vec(prop::collection::vec(-0.5f64..0.5, 1..40), 2..5),
    ) {
        let me = MarginalEffects {
            column: "x".into(),
            pct_change: 0.1,
            changed_alternatives: vec![0],
            changes,
        };
        for row in me.quantile_table() {
            for w in row.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}

#[test]
fn choice_shares_match_average_probabilities() {
    let dgp = DgpConfig::preset(4, DgpVariant::CiIid, 10_000, 1, 5).unwrap();
    let (data, truth) = generate_dataset(&dgp, 0).unwrap();
    let model = dgp.model().unwrap();
    let ev = model.evaluator(&truth.values).unwrap();
    let kernel = ProbitKernel::from_params(model.error_structure(), &ev.params().error).unwrap();
    let n = data.n_alternatives;
    let draws = HaltonPlan::new(500, 100).block(n - 2, 0).unwrap();
    let mut avg = vec![0.0; n];
    let mut v = vec![0.0; n];
    for task in &data.tasks {
        ev.utilities(task, &mut v).unwrap();
        for (a, p) in avg.iter_mut().zip(choice_probabilities(&kernel, &v, None, &draws).unwrap()) {
            *a += p / data.len() as f64;
        }
    }
    for (s, p) in data.choice_shares().iter().zip(&avg) {
        assert!((s - p).abs() < 0.01, "share {s} vs probability {p}");
    }
}

#[test]
fn weighted_sum_betas_are_recovered() {
    let n = 3;
    let dgp = DgpConfig {
        n_individuals: 600,
        n_tasks: 1,
        attribute_low: 0.0,
        attribute_high: 2.0,
        spec: UtilitySpec {
            n_alternatives: n,
            asc: true,
            ws_terms: vec![
                WsTerm { name: "b1".into(), column: "w1".into(), alternatives: None },
                WsTerm { name: "b2".into(), column: "w2".into(), alternatives: None },
            ],
            ci_attributes: Vec::new(),
            capacity_mode: Default::default(),
            ci_scale: CiScale::Fixed(1.0),
        },
        error: ErrorStructure::iid(n).unwrap(),
        truth: TrueParameters {
            capacities: Vec::new(),
            cutoff_points: Vec::new(),
            betas: vec![1.0, -0.6],
            ascs: vec![0.0, 0.3, -0.2],
            error_covariance: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            scale: 1.0,
        },
        replications: 8,
        seed: 17,
    };
    let model = dgp.model().unwrap();
    let cfg = OptimizerConfig {
        draws: HaltonPlan::new(100, 100),
        compute_std_errors: false,
        ..OptimizerConfig::default()
    };
    let truth = dgp.true_parameters().unwrap();
    let idx: Vec<usize> = ["b1", "b2"]
        .iter()
        .map(|name| truth.names.iter().position(|n| n == name).unwrap())
        .collect();
    let mut est = vec![Vec::new(); idx.len()];
    for rep in 0..dgp.replications {
        let (data, _) = generate_dataset(&dgp, rep).unwrap();
        let start = model.feasible_start(&data).unwrap();
        let fit = estimate_model(&model, &data, &start, &cfg).unwrap();
        for (e, &k) in est.iter_mut().zip(&idx) {
            e.push(fit.theta[k]);
        }
    }
    for (e, &k) in est.iter().zip(&idx) {
        let r = e.len() as f64;
        let mean = e.iter().sum::<f64>() / r;
        let sd = (e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
        let mcse = sd / r.sqrt();
        assert!((mean - truth.values[k]).abs() <= 3.0 * mcse, "{}: mean {mean} truth {} mcse {mcse}", truth.names[k], truth.values[k]);
    }
}
