//! Statistical properties of the fixed-gain estimator and the attacked
//! filter, checked on the toy scenario.

mod common;

use ici_core::attack::{deviation_response, solve_max_ced, AttackInjection, ImpactMatrices};
use ici_core::estimator::{
    empirical_alarm_rates, kalman_gain, simulate, solve_riccati, InputSchedule,
};
use ici_core::scenario::build_scenario;
use nalgebra::{DMatrix, DVector};

struct Setup {
    built: ici_core::scenario::BuiltScenario,
    bundle: ici_core::estimator::EstimatorBundle,
}

fn setup() -> Setup {
    let cfg = common::toy_scenario();
    let built = build_scenario(&cfg).unwrap();
    let p = solve_riccati(&built.discrete, &built.sensors, &built.noise).unwrap();
    let bundle = kalman_gain(&p, &built.discrete, &built.sensors, &built.noise).unwrap();
    Setup { built, bundle }
}

#[test]
fn riccati_residual_below_1e9() {
    let s = setup();
    let a = &s.built.discrete.a;
    let c = &s.built.sensors.c;
    let p = &s.bundle.p;
    let phi = DMatrix::from_diagonal(&s.built.noise.phi);
    let omega = DMatrix::from_diagonal(&s.built.noise.omega);
    let innov = c * p * c.transpose() + omega;
    let gain = innov.lu().solve(&(c * p * a.transpose())).unwrap();
    let next = a * p * a.transpose() + phi - a * p * c.transpose() * gain;
    assert!((&next - p).amax() < 1e-9, "residual {}", (&next - p).amax());
}

#[test]
fn innovations_are_white_at_lag_one() {
    let s = setup();
    let horizon = 10_000;
    let zero = InputSchedule::zero(s.built.discrete.input_count());
    let t = simulate(
        &s.built.discrete,
        &s.built.sensors,
        &s.bundle,
        &s.built.noise,
        &zero,
        horizon,
        None,
        0,
    )
    .unwrap();
    let m = s.built.sensors.sensor_count();
    let bound = 4.0 / (horizon as f64).sqrt();
    for i in 0..m {
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 1..horizon {
            num += t.z[k][i] * t.z[k + 1][i];
            den += t.z[k][i] * t.z[k][i];
        }
        let r1 = num / den;
        assert!(r1.abs() < bound, "sensor {i}: lag-1 autocorrelation {r1}");
    }
}

#[test]
fn false_alarm_rate_matches_the_chi_square_quantile() {
    let s = setup();
    let horizon = 10_000;
    let zero = InputSchedule::zero(s.built.discrete.input_count());
    let t = simulate(
        &s.built.discrete,
        &s.built.sensors,
        &s.bundle,
        &s.built.noise,
        &zero,
        horizon,
        None,
        3,
    )
    .unwrap();
    let alarms = t.alarm.iter().filter(|&&a| a).count() as f64;
    let rate = alarms / horizon as f64;
    assert!((rate - 0.05).abs() < 0.01, "false-alarm rate {rate}");
}

#[test]
fn estimator_is_unbiased_without_attack() {
    let s = setup();
    let replicas = 1000;
    let horizon = 40;
    let n = s.built.discrete.state_count();
    let mut mean_err = DVector::zeros(n);
    for r in 0..replicas {
        let t = simulate(
            &s.built.discrete,
            &s.built.sensors,
            &s.bundle,
            &s.built.noise,
            &s.built.inputs,
            horizon,
            None,
            r,
        )
        .unwrap();
        mean_err += t.error(horizon);
    }
    mean_err /= replicas as f64;
    // 5 sigma / sqrt(replicas) with sigma bounded by the prior covariance
    let sigma = s.bundle.p.diagonal().map(f64::sqrt).max();
    let bound = 5.0 * sigma / (replicas as f64).sqrt();
    assert!(mean_err.amax() < bound, "bias {} vs bound {bound}", mean_err.amax());
}

#[test]
fn attack_superposition_matches_deviation_response() {
    let s = setup();
    let m = s.built.sensors.sensor_count();
    let horizon = 60;
    let rows = s.built.sensors.clusters.union(&[1, 2]);
    let im = ImpactMatrices::new(&s.built.discrete, &s.built.sensors, &s.bundle, &s.built.noise.cost);
    let sol = solve_max_ced(&im, &rows, s.built.alpha, m).unwrap();
    let attack =
        AttackInjection::new(vec![1, 2], sol.argmax.clone(), s.built.alpha, &s.built.sensors.clusters)
            .unwrap();
    let t = simulate(
        &s.built.discrete,
        &s.built.sensors,
        &s.bundle,
        &s.built.noise,
        &s.built.inputs,
        horizon,
        Some(&attack),
        11,
    )
    .unwrap();
    let attacked = t.attacked.as_ref().unwrap();
    let resp = deviation_response(
        &s.built.discrete,
        &s.built.sensors,
        &s.bundle,
        &s.built.noise.cost,
        &sol.argmax,
        horizon,
    );
    for k in 0..=horizon {
        // de(k) = xhat - xhat_bar and dz(k) = z_bar - z, noise cancels
        let de = &t.xhat[k] - &attacked.xhat_bar[k];
        assert!(
            (&de - &resp.delta_e[k]).amax() < 1e-9,
            "k = {k}: error deviation mismatch {}",
            (&de - &resp.delta_e[k]).amax()
        );
        let dz = &attacked.z_bar[k] - &t.z[k];
        assert!(
            (&dz - &resp.delta_z[k]).amax() < 1e-9,
            "k = {k}: residue deviation mismatch"
        );
    }
}

#[test]
fn alarm_rates_converge_as_alpha_shrinks() {
    // the empirical consequence of the feasibility definition: smaller KL
    // budgets push the attacked alarm rate onto the nominal one
    let s = setup();
    let m = s.built.sensors.sensor_count();
    let im = ImpactMatrices::new(&s.built.discrete, &s.built.sensors, &s.bundle, &s.built.noise.cost);
    let rows = s.built.sensors.clusters.union(&[0, 1, 2, 3]);
    let replicas = 400;
    let horizon = 30;

    let max_gap = |alpha: f64| -> f64 {
        let sol = solve_max_ced(&im, &rows, alpha, m).unwrap();
        let attack =
            AttackInjection::new(vec![0, 1, 2, 3], sol.argmax, alpha, &s.built.sensors.clusters)
                .unwrap();
        let runs: Vec<_> = (0..replicas)
            .map(|r| {
                simulate(
                    &s.built.discrete,
                    &s.built.sensors,
                    &s.bundle,
                    &s.built.noise,
                    &s.built.inputs,
                    horizon,
                    Some(&attack),
                    r,
                )
                .unwrap()
            })
            .collect();
        let (beta, beta_bar) = empirical_alarm_rates(&runs).unwrap();
        beta.iter()
            .zip(beta_bar.iter())
            .map(|(b, bb)| bb - b)
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let gaps: Vec<f64> = [2.0, 0.5, 0.05].iter().map(|&a| max_gap(a)).collect();
    // shrinking alpha shrinks the worst alarm-rate excess to sampling noise
    assert!(
        gaps[2] <= gaps[0] + 1e-12,
        "gap did not shrink: {gaps:?}"
    );
    assert!(gaps[2] < 0.03, "residual gap {} at alpha = 0.05", gaps[2]);
}

#[test]
fn gross_attacks_trip_the_detector_early() {
    let s = setup();
    let m = s.built.sensors.sensor_count();
    let im = ImpactMatrices::new(&s.built.discrete, &s.built.sensors, &s.bundle, &s.built.noise.cost);
    let rows = s.built.sensors.clusters.union(&[0, 1, 2, 3]);
    // ignore the feasibility budget: alpha multiplied by 100
    let sol = solve_max_ced(&im, &rows, s.built.alpha * 100.0, m).unwrap();
    let attack = AttackInjection::new(
        vec![0, 1, 2, 3],
        sol.argmax,
        s.built.alpha * 100.0,
        &s.built.sensors.clusters,
    )
    .unwrap();
    let replicas = 200;
    let runs: Vec<_> = (0..replicas)
        .map(|r| {
            simulate(
                &s.built.discrete,
                &s.built.sensors,
                &s.bundle,
                &s.built.noise,
                &s.built.inputs,
                20,
                Some(&attack),
                r,
            )
            .unwrap()
        })
        .collect();
    let (beta, beta_bar) = empirical_alarm_rates(&runs).unwrap();
    let excess_early: f64 = (1..=3).map(|k| beta_bar[k] - beta[k]).fold(f64::NEG_INFINITY, f64::max);
    assert!(excess_early > 0.5, "gross attack excess {excess_early}");
}
