//! Print stability, valuation, detector, and game diagnostics for a
//! scenario file.
//!
//! ```text
//! cargo run --release -p ici-core --example diagnose -- scenarios/ici32.json
//! ```

use std::collections::BTreeMap;

use ici_core::attack::deviation_response;
use ici_core::blotto::{best_response, check_blotto_applicability, match_payoff, solve_symmetric_msne};
use ici_core::estimator::{simulate, InputSchedule};
use ici_core::labels::Infrastructure;
use ici_core::scenario::ScenarioConfig;
use ici_core::sim::prepare;
use nalgebra::DVector;
use rand::RngExt;
use rand_chacha::rand_core::SeedableRng;

fn main() {
    let path = std::env::args().nth(1).expect("usage: diagnose <scenario.json>");
    let text = std::fs::read_to_string(&path).expect("read scenario");
    let cfg = ScenarioConfig::from_json(&text).expect("parse scenario");
    let prepared = prepare(&cfg).expect("prepare scenario");
    let built = &prepared.built;

    let max_re = ici_core::linalg::max_real_part(&built.continuous.a).unwrap();
    let q_rho = ici_core::linalg::spectral_radius(&prepared.bundle.q).unwrap();
    println!("states: {}  sensors: {}  clusters: {}", built.discrete.state_count(), built.sensors.sensor_count(), built.sensors.clusters.cluster_count());
    println!("continuous max Re(eig): {max_re:.6}");
    println!("discrete spectral radius: {:.6}", built.discrete.spectral_radius().unwrap());
    println!("closed-loop Q radius: {q_rho:.6}");

    // cluster values grouped by infrastructure
    let mut by_infra: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, &v) in prepared.valuation.normalized.iter().enumerate() {
        let infra = prepared.cluster_infra[i]
            .map(|k| k.to_string())
            .unwrap_or_else(|| "mixed".to_string());
        by_infra.entry(infra).or_default().push((i, v));
    }
    println!("total raw value: {:.6e}", prepared.valuation.total_raw());
    for (infra, entries) in &by_infra {
        let total: f64 = entries.iter().map(|(_, v)| v).sum();
        let min = entries.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
        let max = entries.iter().map(|(_, v)| *v).fold(0.0, f64::max);
        println!("  {infra}: kappa = {total:.4}  n = {}  phi in [{min:.5}, {max:.5}]", entries.len());
    }
    let mut sorted = prepared.valuation.normalized.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.reverse();
    println!("  top values: {:?}", sorted[..sorted.len().min(8)].iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("  phi per cluster:");
    for (i, &v) in prepared.valuation.normalized.iter().enumerate() {
        print!("    {i}: {v:.5}");
        if (i + 1) % 4 == 0 {
            println!();
        }
    }
    println!();

    let verdict = check_blotto_applicability(&prepared.valuation.normalized, built.r_a, built.r_d);
    println!("blotto verdict at {}/{}: {verdict:?}", built.r_a, built.r_d);

    // false-alarm rate with zero input over 10^4 steps
    let zero_inputs = InputSchedule::zero(built.discrete.input_count());
    let t = simulate(
        &built.discrete,
        &built.sensors,
        &prepared.bundle,
        &built.noise,
        &zero_inputs,
        10_000,
        None,
        1234,
    )
    .expect("simulate");
    let alarms = t.alarm.iter().filter(|&&a| a).count();
    println!("false-alarm rate (u=0, 1e4 steps): {:.4}", alarms as f64 / 10_000.0);

    // peak steps of q(k), D(k) for random impulse attacks on this scenario
    let m = built.sensors.sensor_count();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut bad_q = 0;
    let mut bad_d = 0;
    for _ in 0..200 {
        let y = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let resp = deviation_response(&built.discrete, &built.sensors, &prepared.bundle, &built.noise.cost, &y, 200);
        if resp.peak_q_step() > 2 {
            bad_q += 1;
        }
        if resp.peak_d_step() > 3 {
            bad_d += 1;
        }
    }
    println!("peak-step violations over 200 random attacks: q {bad_q}, D {bad_d}");

    // attacker best response against a proportional defender at the scenario budgets
    let phi = &prepared.valuation.normalized;
    let prop = DVector::from_iterator(phi.len(), phi.iter().map(|&v| v * built.r_d));
    let br = best_response(&prop, phi, built.r_a);
    let outcome = match_payoff(&br, &prop, phi, phi);
    let won = outcome.winners.iter().filter(|w| matches!(w, ici_core::blotto::ScWinner::Attacker)).count();
    println!(
        "attacker BR vs proportional defender: wins {won}/{} clusters (fraction {:.4}), value {:.4}",
        phi.len(),
        won as f64 / phi.len() as f64,
        outcome.u_a
    );
    let msne = solve_symmetric_msne(phi, built.r_a, built.r_d, prepared.valuation.total_raw()).unwrap();
    println!("MSNE U^a = {:.4}; BR fraction / U^a... ratio vs 10% = {:.2}", msne.u_a, (won as f64 / phi.len() as f64) / msne.u_a);

    // kappa of the gas-only defense
    for infra in [Infrastructure::Power, Infrastructure::Gas, Infrastructure::Water] {
        if let Ok(clusters) = prepared.clusters_of(&[infra]) {
            let kappa: f64 = clusters.iter().map(|&c| prepared.valuation.normalized[c]).sum();
            println!("kappa({infra}) = {kappa:.4} over {} clusters", clusters.len());
        }
    }
}
