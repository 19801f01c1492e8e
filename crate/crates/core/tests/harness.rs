use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortex_core::dynamics::{integrate, IntegrateOptions, Record};
use vortex_core::harness::{
    degenerate_invariant, degenerate_run, exit_time, sample_disc, sample_initial_pairs, sweep,
    GENERATOR,
};
use vortex_core::{
    Builtin, Complex64 as C, Error, ExitReason, ExperimentConfig, Strengths, VortexState,
};

fn degenerate_config(epsilon: f64, samples: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new("disc", Strengths::new(1.0, -1.0), epsilon, samples, 11);
    c.beta = 0.8;
    c
}

#[test]
fn uniform_disc_second_moment() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let eps = 0.03;
    let n = 100_000;
    let mean = (0..n)
        .map(|_| sample_disc(&mut rng, eps).norm_sqr())
        .sum::<f64>()
        / (n as f64 * eps * eps);
    assert!((mean - 0.5).abs() <= 0.01, "{mean}");
    let pairs = sample_initial_pairs(eps, n / 2, 3);
    let mean = pairs
        .iter()
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .sum::<f64>()
        / (n as f64 * eps * eps);
    assert!((mean - 0.5).abs() <= 0.01, "{mean}");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let c = degenerate_config(0.05, 6);
    let a = exit_time(&c).unwrap().to_json_lines().unwrap();
    let b = exit_time(&c).unwrap().to_json_lines().unwrap();
    assert_eq!(a, b);
    let header: serde_json::Value = serde_json::from_str(a.lines().next().unwrap()).unwrap();
    assert_eq!(header["header"]["generator"], GENERATOR);
    assert_eq!(header["header"]["seed"], 11);
    let mut other = c.clone();
    other.seed = 12;
    assert_ne!(a, exit_time(&other).unwrap().to_json_lines().unwrap());
}

#[test]
fn degenerate_samples_all_exit_quickly() {
    let run = exit_time(&degenerate_config(0.05, 8)).unwrap();
    let horizon = run.header.horizon;
    for r in &run.records {
        assert_eq!(r.reason, ExitReason::Exit, "{r:?}");
        let t = r.t_exit.unwrap();
        assert!(t > 0.0 && t < 0.1 * horizon, "{t}");
        assert_eq!(r.t_end, t);
    }
}

#[test]
fn censoring_is_consistent() {
    let mut c = degenerate_config(0.05, 8);
    c.horizon = Some(0.02);
    let run = exit_time(&c).unwrap();
    let horizon = run.header.horizon;
    let mut kinds = [0usize; 2];
    for r in &run.records {
        match r.reason {
            ExitReason::Exit => {
                kinds[0] += 1;
                assert!(r.t_exit.unwrap() < horizon);
            }
            ExitReason::Horizon => {
                kinds[1] += 1;
                assert!(r.t_exit.is_none() && r.is_censored());
                assert_eq!(r.t_end, horizon);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
    assert!(kinds[0] > 0 && kinds[1] > 0, "{kinds:?}");
    assert_eq!(run.censored_fraction(), kinds[1] as f64 / 8.0);
}

#[test]
fn degenerate_invariant_holds_along_run() {
    let d = Builtin::Disc.domain().unwrap();
    let z = C::new(0.02, 0.01);
    let rep = degenerate_run(&d, 1.0, z, 50.0, 1e-10, Some(z.norm().powf(0.8))).unwrap();
    assert!(rep.invariant_drift <= 1e-6, "{}", rep.invariant_drift);
    assert!(rep.ansatz_error <= 1e-8);
    assert_eq!(rep.invariant0, degenerate_invariant(z));
    assert!(rep.t_exit.is_some());
}

#[test]
fn degenerate_pair_leaves_the_exit_disc() {
    let d = Builtin::Disc.domain().unwrap();
    for eps in [0.05, 0.02] {
        for angle in [0.3, 1.2, 2.5] {
            let z = C::from_polar(eps, angle);
            let rep = degenerate_run(&d, 1.0, z, 100.0, 1e-10, Some(eps.powf(0.8))).unwrap();
            let t = rep
                .t_exit
                .unwrap_or_else(|| panic!("eps {eps}, angle {angle}: no exit"));
            assert!(t.is_finite() && t < 100.0);
            assert!(rep.invariant_drift <= 1e-6);
        }
    }
}

#[test]
fn conjugate_data_gives_conjugate_trajectory() {
    // Reflection reverses orientation, so the strengths change sign.
    let d = Builtin::Disc.domain().unwrap();
    let (z1, z2) = (C::new(0.03, 0.01), C::new(-0.01, 0.02));
    let mut opts = IntegrateOptions::new(2.0, 1e-10);
    opts.record = Record::None;
    opts.sample_times = vec![0.5, 1.0, 1.5, 2.0];
    let a = integrate(
        &d,
        &VortexState::new(0.0, z1, z2, Strengths::new(1.0, -1.0)),
        &opts,
    )
    .unwrap();
    let b = integrate(
        &d,
        &VortexState::new(0.0, z1.conj(), z2.conj(), Strengths::new(-1.0, 1.0)),
        &opts,
    )
    .unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (p, q) in a.samples.iter().zip(&b.samples) {
        assert!((p.z1.conj() - q.z1).norm() <= 1e-12 && (p.z2.conj() - q.z2).norm() <= 1e-12);
    }
    let z = C::new(0.02, 0.01);
    let r1 = degenerate_run(&d, 1.0, z, 5.0, 1e-10, None).unwrap();
    let r2 = degenerate_run(&d, -1.0, z.conj(), 5.0, 1e-10, None).unwrap();
    let (f1, f2) = (r1.trajectory.final_state, r2.trajectory.final_state);
    assert!((f1.z1.conj() - f2.z1).norm() <= 1e-12);
}

#[test]
fn degenerate_sweep_is_finite_and_monotone() {
    let result = sweep(&degenerate_config(0.08, 6), &[0.08, 0.04, 0.02]).unwrap();
    let times: Vec<f64> = result.points.iter().map(|p| p.min_exit.unwrap()).collect();
    assert!(times.iter().all(|t| t.is_finite() && *t > 0.0));
    assert!(times[0] > times[1] && times[1] > times[2], "{times:?}");
    for p in &result.points {
        assert_eq!(p.exits, p.samples);
        assert_eq!(p.censored_fraction, 0.0);
    }
    let fit = result.fit.unwrap();
    assert!(fit.slope > 0.0);
    assert!(result.to_csv().contains("slope,intercept,r2"));
}

#[test]
fn all_censored_sweep_has_no_fit() {
    let mut c = degenerate_config(0.04, 2);
    c.horizon = Some(1e-9);
    let result = sweep(&c, &[0.04, 0.02]).unwrap();
    assert!(result.fit.is_none());
    assert!(result.to_csv().contains("unavailable"));
}

#[test]
fn strip_pairs_stay_inside_before_critical_horizon() {
    let mut c = ExperimentConfig::new("strip", Strengths::new(1.0, 1.0), 0.04, 6, 5);
    c.beta = 0.8;
    let run = exit_time(&c).unwrap();
    assert!((run.header.horizon - 0.04f64.powf(-0.1)).abs() <= 1e-12);
    assert_eq!(run.exits(), 0);
    assert_eq!(run.censored_fraction(), 1.0);
}

fn quantiles(mut v: Vec<f64>) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
    [q(0.25), q(0.5), q(0.9)]
}

#[test]
fn disc_statistics_are_scale_invariant() {
    // The pair term dominates: positions scaled by 2 slow the motion by 4.
    let run = |eps: f64, horizon: f64| {
        let mut c = ExperimentConfig::new("disc", Strengths::new(1.0, 1.0), eps, 12, 9);
        c.horizon = Some(horizon);
        exit_time(&c).unwrap()
    };
    let small = run(0.005, 0.05);
    let large = run(0.01, 0.2);
    assert_eq!(small.exits() + large.exits(), 0);
    let qs = quantiles(small.records.iter().map(|r| r.max_excursion).collect());
    let ql = quantiles(large.records.iter().map(|r| r.max_excursion).collect());
    for (a, b) in qs.iter().zip(&ql) {
        assert!((a / b - 1.0).abs() <= 0.05, "{qs:?} vs {ql:?}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let base = ExperimentConfig::new("disc", Strengths::new(1.0, 1.0), 0.02, 4, 1);
    let check = |f: &dyn Fn(&mut ExperimentConfig)| {
        let mut c = base.clone();
        f(&mut c);
        let e = exit_time(&c).unwrap_err();
        assert!(e.is_configuration(), "{e}");
    };
    check(&|c| c.epsilon = 0.2);
    check(&|c| c.epsilon = 0.0);
    check(&|c| c.beta = 0.0);
    check(&|c| c.beta = 1.5);
    check(&|c| c.mu = 1.0);
    check(&|c| c.samples = 0);
    check(&|c| c.tol = 1e-3);
    check(&|c| c.horizon = Some(-1.0));
    check(&|c| c.strengths = Strengths::new(1.0, 0.0));
    check(&|c| c.map = "z+".into());
    check(&|c| c.map = "a*z".into());
    let mut c = base.clone();
    c.map = "z+z^2/4".into();
    c.inradius = Some(0.5);
    assert!(matches!(exit_time(&c), Err(Error::NotStationary(_))));
    assert!(ExperimentConfig::from_json(r#"{"map":"disc","bogus":1}"#).is_err());
}

#[test]
fn config_round_trips_through_json() {
    let mut c = degenerate_config(0.05, 3);
    c.params.insert("a".into(), 0.8);
    c.horizon = Some(2.0);
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
}
