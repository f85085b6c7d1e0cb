#![allow(clippy::needless_range_loop)]

use scenario_cert::lp::{solve_lp, verify_solution, RowTag};
use scenario_cert::problems::input_design::{BASE_STD, NOMINAL_A, OUTLIER_PROBABILITY};
use scenario_cert::problems::{
    build_input_design_lp, build_pole_placement_lp, ControllerDecision, InputDesign,
    InputDesignSpec, InputMatrixSampler, PendulumSampler, PolePlacement, PolePlacementSpec,
};
use scenario_cert::scenario::{certify_full, CertifyOptions, DecisionProblem, ScenarioSampler};

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn pendulum_sampler_moments() {
    let set = PendulumSampler.sample_set(100_000, 3).unwrap();
    let col = |f: fn(&scenario_cert::problems::PendulumScenario) -> f64| -> Vec<f64> {
        set.payloads().map(f).collect()
    };
    let (m, sm) = mean_std(&col(|s| s.mass));
    let (l, sl) = mean_std(&col(|s| s.length));
    let (a, _) = mean_std(&col(|s| s.alpha));
    assert!((m - 9.5).abs() < 5e-3, "{m}");
    assert!((sm - 1.0 / 12f64.sqrt()).abs() < 5e-3, "{sm}");
    assert!((l - 0.95).abs() < 5e-4, "{l}");
    assert!((sl - 0.1 / 12f64.sqrt()).abs() < 5e-4, "{sl}");
    assert!((a - 1.05 * 9.5).abs() < 6e-3, "{a}");
    assert!(set
        .payloads()
        .all(|s| s.alpha >= s.mass && s.alpha <= 1.1 * s.mass));
}

#[test]
fn input_sampler_moments() {
    let set = InputMatrixSampler::default()
        .sample_set(100_000, 5)
        .unwrap();
    let expected_std = ((1.0 - OUTLIER_PROBABILITY) * BASE_STD.powi(2)
        + OUTLIER_PROBABILITY * (3.0 * BASE_STD).powi(2))
    .sqrt();
    for i in 0..2 {
        for j in 0..2 {
            let xs: Vec<f64> = set.payloads().map(|s| s.a[i][j]).collect();
            let (m, s) = mean_std(&xs);
            assert!((m - NOMINAL_A[i][j]).abs() < 1e-3, "mean[{i}][{j}] = {m}");
            assert!((s - expected_std).abs() < 1e-3, "std[{i}][{j}] = {s}");
        }
    }
}

#[test]
fn baseline_predicate_is_row_feasibility() {
    let problem = PolePlacement::new(PolePlacementSpec::default());
    let set = PendulumSampler.sample_set(300, 8).unwrap();
    let d = problem.solve(&set.all()).unwrap();
    let lp = build_pole_placement_lp(&set.all(), &problem.spec).unwrap();
    for (id, s) in set.iter() {
        let rows_ok = lp
            .rows
            .iter()
            .filter(|r| r.tag == RowTag::Scenario(id))
            .all(|r| r.violation(&d.variables) <= 1e-8 * (1.0 + r.rhs.abs()));
        assert!(rows_ok, "training scenario {id} violates its rows");
        assert_eq!(problem.baseline_ok(&d, s).unwrap(), rows_ok);
    }
    // a decision with h = 0 is appropriate only for scenarios matching the
    // reference exactly
    let mut tight = ControllerDecision::from_decision(&d).unwrap();
    tight.h = [0.0; 4];
    let tight = tight.to_decision();
    for (id, s) in set.iter().take(50) {
        let row_ok = build_pole_placement_lp(&[(id, s)], &problem.spec)
            .unwrap()
            .rows
            .iter()
            .all(|r| r.violation(&tight.variables) <= 1e-8 * (1.0 + r.rhs.abs()));
        assert_eq!(problem.baseline_ok(&tight, s).unwrap(), row_ok);
    }
}

#[test]
fn bundled_solves_pass_verification() {
    let pole = PolePlacement::new(PolePlacementSpec::default());
    let set = PendulumSampler.sample_set(500, 2).unwrap();
    let lp = build_pole_placement_lp(&set.all(), &pole.spec).unwrap();
    let rep = verify_solution(&lp, &solve_lp(&lp).unwrap()).unwrap();
    assert!(rep.max_residual <= 1e-8, "{rep:?}");

    let spec = InputDesignSpec::new(0.05).unwrap();
    let set = InputMatrixSampler::default().sample_set(500, 2).unwrap();
    let lp = build_input_design_lp(&set.all(), &spec).unwrap();
    let rep = verify_solution(&lp, &solve_lp(&lp).unwrap()).unwrap();
    assert!(rep.max_residual <= 1e-8, "{rep:?}");
    assert!(rep.duality_gap <= 1e-7, "{rep:?}");
}

#[test]
fn large_penalty_reproduces_the_robust_program() {
    for seed in [1, 2, 3] {
        let set = InputMatrixSampler::default().sample_set(300, seed).unwrap();
        let spec = InputDesignSpec::new(1e6).unwrap();
        let relaxed = InputDesign::new(spec.clone()).solve(&set.all()).unwrap();
        let robust = InputDesign::robust(spec).solve(&set.all()).unwrap();
        let diff = relaxed
            .variables
            .iter()
            .zip(&robust.variables)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-6, "seed {seed}: {diff}");
        assert!(relaxed.extra.iter().all(|&x| x <= 1e-9));
    }
}

#[test]
fn smaller_penalty_relaxes_more_scenarios() {
    let set = InputMatrixSampler::default().sample_set(1000, 1).unwrap();
    let count = |rho: f64| {
        let d = InputDesign::new(InputDesignSpec::new(rho).unwrap())
            .solve(&set.all())
            .unwrap();
        assert_eq!(d.extra.len(), set.len());
        d.extra.iter().filter(|&&x| x > 1e-9).count()
    };
    let (loose, firm) = (count(0.05), count(1.0));
    assert!(loose > firm, "rho=0.05: {loose}, rho=1: {firm}");
}

#[test]
fn slacks_follow_input_order() {
    let set = InputMatrixSampler::default().sample_set(200, 4).unwrap();
    let problem = InputDesign::new(InputDesignSpec::new(0.05).unwrap());
    let d = problem.solve(&set.all()).unwrap();
    for ((_, s), &xi) in set.iter().zip(&d.extra) {
        // a positive slack is exactly the scenario's excess cost
        let cost = problem.cost(&d, s).unwrap();
        assert!(
            (cost.max(0.0) - xi).abs() <= 1e-7,
            "cost {cost}, slack {xi}"
        );
    }
}

#[test]
fn nesting_follows_the_post_design_level() {
    let mut problem = InputDesign::new(InputDesignSpec::new(1.0).unwrap());
    assert!(problem.is_nested());
    problem.postdesign_level = -0.05;
    assert!(problem.is_nested());
    problem.postdesign_level = 0.01;
    assert!(!problem.is_nested());
}

#[test]
fn pole_placement_report_structure() {
    let mut problem = PolePlacement::new(PolePlacementSpec::default());
    let set = PendulumSampler.sample_set(2000, 11).unwrap();
    let cert = certify_full(&problem, &set, 1e-5, CertifyOptions::default()).unwrap();
    let r = &cert.report;
    assert!(r.theorem2_interval.is_none() && r.theorem3_interval.is_none());
    assert_eq!(r.baseline_complexity, cert.support.cardinality);
    assert!(r.baseline_complexity <= 8);

    problem.nondegenerate = true;
    let cert = certify_full(&problem, &set, 1e-5, CertifyOptions { prune: true }).unwrap();
    let r = &cert.report;
    assert!(r.theorem2_interval.is_none());
    let t3 = r.theorem3_interval.unwrap();
    assert!(0.0 <= t3.lower && t3.lower <= t3.upper && t3.upper <= 1.0);
    assert!((r.total_confidence - (1.0 - 2e-5)).abs() < 1e-15);
    assert!(r.instrumental_complexity <= r.baseline_complexity + r.violator_ids.len());
}
