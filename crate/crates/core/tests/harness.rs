use std::sync::Arc;

use cmab_core::environments::Environment;
use cmab_core::harness::{
    aggregate, csv_string, diagnostic_concentration, emit_csv, emit_timing_csv, run_experiment,
    simulate, timing_report, ExperimentConfig,
};
use cmab_core::numerics::{stream_rng, Matrix};
use cmab_core::policies::{PolicyKind, PolicySpec};
use cmab_core::{Action, ActionSpace, BanditInstance, CmabError};

const SMALL: &str = r#"
horizon = 200
repetitions = 4
seed = 7

[instance]
family = "matching-gaussian"
q = 3
c = 0.2

[[policies]]
kind = "cts-gaussian"
[[policies]]
kind = "clip-cts-gaussian"
[[policies]]
kind = "cucb"
[[policies]]
kind = "escb"
"#;

fn two_action_instance() -> Arc<BanditInstance> {
    let good = Action::new(vec![0], 2).unwrap();
    let bad = Action::new(vec![1], 2).unwrap();
    let space = ActionSpace::enumerated(2, vec![good, bad]).unwrap();
    let env = Environment::independent_bernoulli(vec![0.8, 0.5], 1.0).unwrap();
    Arc::new(BanditInstance::new(space, env, Some((0.0, 1.0)), None).unwrap())
}

#[test]
fn single_action_has_no_regret() {
    let only = Action::new(vec![0, 2], 3).unwrap();
    let space = ActionSpace::enumerated(3, vec![only]).unwrap();
    let env = Environment::gaussian(vec![0.1, 0.2, 0.3], &Matrix::identity(3)).unwrap();
    let inst = Arc::new(
        BanditInstance::new(space, env, Some((0.0, 1.0)), None)
            .unwrap()
            .with_covariance(Matrix::identity(3))
            .unwrap(),
    );
    for kind in [PolicyKind::CtsGaussian, PolicyKind::Cucb, PolicyKind::Escb] {
        let mut pol = PolicySpec::new(kind).build(&inst).unwrap();
        let trace = simulate(
            &inst,
            pol.as_mut(),
            1,
            &mut stream_rng(1, &[1]),
            &mut stream_rng(1, &[2]),
            false,
        )
        .unwrap();
        assert_eq!(trace.total(), 0.0);
    }
}

#[test]
fn always_bad_action_accrues_the_gap() {
    let inst = two_action_instance();
    let mut spec = PolicySpec::new(PolicyKind::Fixed);
    spec.arms = Some(vec![1]);
    let curves: Vec<Vec<f64>> = (0..3)
        .map(|r| {
            let mut pol = spec.build(&inst).unwrap();
            simulate(
                &inst,
                pol.as_mut(),
                50,
                &mut stream_rng(r, &[1]),
                &mut stream_rng(r, &[2]),
                false,
            )
            .unwrap()
            .cumulative()
        })
        .collect();
    let (mean, std) = aggregate(&curves.iter().map(Vec::as_slice).collect::<Vec<_>>());
    for (t, (m, s)) in mean.iter().zip(&std).enumerate() {
        assert!((m - 0.3 * (t + 1) as f64).abs() < 1e-12);
        assert!(s.abs() < 1e-12);
    }
}

#[test]
fn aggregation_is_the_pointwise_mean() {
    let curves = [
        vec![1.0, 2.0, 4.0],
        vec![0.0, 3.0, 3.0],
        vec![2.0, 2.5, 8.0],
    ];
    let refs: Vec<&[f64]> = curves.iter().map(Vec::as_slice).collect();
    let (mean, std) = aggregate(&refs);
    for t in 0..3 {
        let m = curves.iter().map(|c| c[t]).sum::<f64>() / 3.0;
        assert!((mean[t] - m).abs() < 1e-12);
        let v = curves.iter().map(|c| (c[t] - m).powi(2)).sum::<f64>() / 2.0;
        assert!((std[t] - v.sqrt()).abs() < 1e-12);
    }
    let (_, single) = aggregate(&refs[..1]);
    assert_eq!(single, vec![0.0; 3]);
}

#[test]
fn experiment_output_shape_and_invariants() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let result = run_experiment(&cfg).unwrap();
    assert_eq!(result.curves.len(), 4);
    for c in &result.curves {
        assert_eq!(c.mean.len(), 200);
        assert_eq!(c.finals.len(), 4);
        assert!(c.mean.windows(2).all(|w| w[1] >= w[0]));
        let m = c.finals.iter().sum::<f64>() / 4.0;
        assert!((m - c.final_mean()).abs() < 1e-9);
    }
    let text = csv_string(&result).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 200 * 4 + 1);
    assert_eq!(lines[0], "t,policy,mean_cum_regret,std_cum_regret");
    assert!(lines[1].starts_with("1,cts-gaussian,"));
    assert!(lines[201].starts_with("1,clip-cts-gaussian,"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("regret.csv");
    emit_csv(&result, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    emit_csv(&result, &path).unwrap();
    assert_eq!(first, std::fs::read(&path).unwrap());
    assert_eq!(first, text.as_bytes());

    let missing = dir.path().join("no/such/dir/regret.csv");
    assert!(matches!(
        emit_csv(&result, &missing),
        Err(CmabError::Io { .. })
    ));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let parallel = csv_string(&run_experiment(&cfg).unwrap()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let serial = pool.install(|| csv_string(&run_experiment(&cfg).unwrap()).unwrap());
    assert_eq!(parallel, serial);

    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(
        parallel,
        csv_string(&run_experiment(&other).unwrap()).unwrap()
    );
}

#[test]
fn coupled_streams_share_outcomes() {
    // Two copies of the same policy see the same outcomes when coupled.
    let text = SMALL.replace(
        "[[policies]]\nkind = \"cts-gaussian\"",
        "[[policies]]\nkind = \"cucb\"\nlabel = \"twin\"",
    );
    let mut cfg = ExperimentConfig::from_toml(&text).unwrap();
    cfg.couple_streams = true;
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(
        r.curve("", "twin").unwrap().mean,
        r.curve("", "cucb").unwrap().mean
    );
    cfg.couple_streams = false;
    let r = run_experiment(&cfg).unwrap();
    assert_ne!(
        r.curve("", "twin").unwrap().mean,
        r.curve("", "cucb").unwrap().mean
    );
}

#[test]
fn timing_mode_reports_selection_time() {
    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.timing = true;
    cfg.horizon = 20;
    let result = run_experiment(&cfg).unwrap();
    let text = csv_string(&result).unwrap();
    assert!(text.starts_with("t,policy,mean_cum_regret,std_cum_regret,mean_select_ms\n"));
    let report = timing_report(&result);
    assert_eq!(report.len(), 4);
    assert!(report.iter().all(|(_, _, ms)| *ms >= 0.0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("timing.csv");
    emit_timing_csv(&result, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 5);

    cfg.horizon = 0;
    assert_eq!(run_experiment(&cfg).unwrap_err().kind(), "config");
}

#[test]
fn incompatible_policy_is_named() {
    let text = SMALL.replace("kind = \"escb\"", "kind = \"cts-beta\"");
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    let err = run_experiment(&cfg).unwrap_err();
    assert_eq!(err.kind(), "capability");
    assert!(err.to_string().contains("cts-beta"), "{err}");
}

#[test]
fn redrawn_means_differ_between_repetitions() {
    let fixed = ExperimentConfig::from_toml(SMALL).unwrap();
    let redraw =
        ExperimentConfig::from_toml(&SMALL.replace("c = 0.2", "c = 0.2\nredraw_means = true"))
            .unwrap();
    let f = run_experiment(&fixed).unwrap();
    let r = run_experiment(&redraw).unwrap();
    assert_ne!(f.curves[0].finals, r.curves[0].finals);
}

#[test]
fn concentration_diagnostic_edges() {
    let mut cfg = ExperimentConfig::load("concentration_msets").unwrap();
    let inflated = diagnostic_concentration(&cfg, 10.0).unwrap();
    assert_eq!(inflated.per_run.len(), 20);
    assert_eq!(inflated.total(), 0);
    assert_eq!((inflated.num_actions, inflated.max_action_size), (15, 2));

    cfg.horizon = 1;
    let one = diagnostic_concentration(&cfg, 1.0).unwrap();
    assert!(one.per_run.iter().all(|&c| c <= 1));

    let matching = ExperimentConfig::from_toml(SMALL).unwrap();
    assert_eq!(
        diagnostic_concentration(&matching, 1.0).unwrap_err().kind(),
        "capability"
    );
}

#[test]
fn every_preset_runs_briefly() {
    for (name, _) in cmab_core::harness::PRESETS {
        let mut cfg = ExperimentConfig::load(name).unwrap();
        cfg.horizon = 30;
        cfg.repetitions = 2;
        cfg.variants.truncate(2);
        let result = run_experiment(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(
            result.curves.len(),
            cfg.variants.len() * cfg.policies.len(),
            "{name}"
        );
    }
}
