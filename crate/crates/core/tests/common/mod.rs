#![allow(dead_code)] // each integration test binary uses a different subset

//! Shared fixtures and independent oracles for the integration tests.
//!
//! Everything here deliberately recomputes results through a different path
//! than the library (literal output substitution, boundary rejection
//! sampling) so the tests check the implementation against independent
//! arithmetic rather than against itself.

use ici_core::attack::ImpactMatrices;
use ici_core::model::{CouplingMap, GasCi, PowerCi, WaterCi};
use ici_core::scenario::ScenarioConfig;
use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn toy_scenario() -> ScenarioConfig {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/toy.json");
    ScenarioConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn bundled_scenario_text() -> String {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/ici32.json");
    std::fs::read_to_string(path).unwrap()
}

pub fn bundled_scenario() -> ScenarioConfig {
    ScenarioConfig::from_json(&bundled_scenario_text()).unwrap()
}

/// Substitution oracle for the interconnection: evaluate the coupled ODE
/// right-hand side literally, one unit vector at a time, and read off the
/// assembled matrices column by column.
pub fn substitution_oracle(
    power: &PowerCi,
    gas: &GasCi,
    water: &WaterCi,
    coupling: &CouplingMap,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (ne, ng, nw) = (power.a.nrows(), gas.a.nrows(), water.a.nrows());
    let (pe, pg, pw) = (power.b.ncols(), gas.b.ncols(), water.b.ncols());
    let n = ne + ng + nw;
    let p = pe + pg + pw;

    let rhs = |x: &DVector<f64>, u: &DVector<f64>| -> DVector<f64> {
        let xe = x.rows(0, ne).clone_owned();
        let xg = x.rows(ne, ng).clone_owned();
        let xw = x.rows(ne + ng, nw).clone_owned();
        let ue = u.rows(0, pe).clone_owned();
        let ug = u.rows(pe, pg).clone_owned();
        let uw = u.rows(pe + pg, pw).clone_owned();

        let y_eg = &power.c_eg * &xe;
        let y_ew = &power.c_ew * &xe;
        let y_ge = &gas.c_ge * &xg + &gas.d_ge * (&ug + &coupling.t_eg * &y_eg);
        let y_we = &water.c_we * &xw + &water.d_we * (&uw + &coupling.t_ew * &y_ew);

        let dxe = &power.a * &xe + &power.b * (&ue + &coupling.t_ge * &y_ge + &coupling.t_we * &y_we);
        let dxg = &gas.a * &xg + &gas.b * (&ug + &coupling.t_eg * &y_eg);
        let dxw = &water.a * &xw + &water.b * (&uw + &coupling.t_ew * &y_ew);

        let mut out = DVector::zeros(n);
        out.rows_mut(0, ne).copy_from(&dxe);
        out.rows_mut(ne, ng).copy_from(&dxg);
        out.rows_mut(ne + ng, nw).copy_from(&dxw);
        out
    };

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        a.set_column(i, &rhs(&e, &DVector::zeros(p)));
    }
    let mut b = DMatrix::zeros(n, p);
    for j in 0..p {
        let mut e = DVector::zeros(p);
        e[j] = 1.0;
        b.set_column(j, &rhs(&DVector::zeros(n), &e));
    }
    (a, b)
}

/// Best objective value over `samples` random points on the constraint
/// boundary; the rejection-sampling oracle for the QCQP solver.
pub fn boundary_sampling_oracle(
    im: &ImpactMatrices,
    coords: &[usize],
    alpha: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    use rayon::prelude::*;
    let d = coords.len();
    let gather = |mat: &DMatrix<f64>| DMatrix::from_fn(d, d, |r, c| mat[(coords[r], coords[c])]);
    let rs = [gather(&im.r1), gather(&im.r2)];
    let ps = [gather(&im.p1), gather(&im.p2), gather(&im.p3)];
    let quad = |mat: &DMatrix<f64>, y: &DVector<f64>| (y.transpose() * mat * y)[(0, 0)];

    const CHUNK: usize = 100_000;
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(chunk as u64));
            let todo = CHUNK.min(samples - chunk * CHUNK);
            let mut best = 0.0_f64;
            for _ in 0..todo {
                let y = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                let worst = ps.iter().map(|p| quad(p, &y)).fold(0.0_f64, f64::max);
                if worst == 0.0 {
                    continue;
                }
                let y = y * (alpha / worst.sqrt());
                best = best.max(quad(&rs[0], &y).max(quad(&rs[1], &y)));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// A small random-but-stable ICI scenario: 2-3 generators, 1-2 gas
/// pipelines, 1-2 water pipelines, randomized parameters inside the bundled
/// scenario's ranges, random couplings.
pub fn random_scenario(seed: u64) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = toy_scenario();

    let n_gens = rng.random_range(2..4usize);
    cfg.generators.truncate(1);
    let template = cfg.generators[0].clone();
    cfg.generators.clear();
    for i in 0..n_gens {
        let mut g = template.clone();
        g.id = format!("g{}", i + 1);
        g.inertia = rng.random_range(8.0..15.0);
        g.damping = rng.random_range(6.0..10.0);
        g.turbine_time_constant = rng.random_range(1.2..2.0);
        g.operating_angle = rng.random_range(0.0..0.3);
        g.fuel = if i % 2 == 0 {
            ici_core::model::FuelSource::Gas { efficiency: rng.random_range(0.8..0.95) }
        } else {
            ici_core::model::FuelSource::Water { efficiency: rng.random_range(0.8..0.95) }
        };
        g.demand = vec![ici_core::scenario::DemandSegment {
            from_step: 0,
            value: rng.random_range(0.2..0.4),
        }];
        cfg.generators.push(g);
    }
    cfg.lines.clear();
    for i in 1..n_gens {
        cfg.lines.push(ici_core::scenario::LineConfig {
            from: format!("g{i}"),
            to: format!("g{}", i + 1),
            reactance: rng.random_range(1.2..2.5),
        });
    }

    for p in &mut cfg.gas_pipelines {
        p.tau1 = rng.random_range(0.8..1.2);
        p.tau2 = rng.random_range(0.5..0.9);
        p.tau3 = rng.random_range(1.2..2.4);
        p.tau_hat1 = rng.random_range(0.4..0.8);
        p.tau_hat2 = rng.random_range(0.4..0.8);
        p.rho1 = rng.random_range(1.8..3.2);
        p.rho_hat1 = rng.random_range(2.0..3.4);
    }
    for p in &mut cfg.water_pipelines {
        p.viscosity = rng.random_range(0.8..1.5);
        p.friction = rng.random_range(1.5..2.5);
    }
    for j in &mut cfg.junctions {
        j.setpoint = rng.random_range(0.9..1.2);
        j.efficiency = rng.random_range(0.02..0.05);
    }

    // rewire couplings to the surviving generators
    cfg.coupling.gas_to_power = vec![("j2".into(), "g1".into())];
    cfg.coupling.water_to_power = vec![("w2".into(), format!("g{}", 2.min(n_gens)))];
    cfg.coupling.power_to_gas = vec![("g1".into(), "j2".into())];
    cfg.coupling.power_to_water = if n_gens >= 2 {
        vec![("g2".into(), "w2".into())]
    } else {
        vec![]
    };

    // sensors: one per state of the surviving topology, one cluster per
    // physical unit
    cfg.sensors.clear();
    let mut cluster = 0;
    for i in 0..n_gens {
        cfg.sensors.push(ici_core::scenario::SensorConfig {
            state: format!("omega:g{}", i + 1),
            cluster,
            gain: 1.0,
        });
        cfg.sensors.push(ici_core::scenario::SensorConfig {
            state: format!("pmech:g{}", i + 1),
            cluster,
            gain: 1.0,
        });
        cluster += 1;
    }
    for i in 1..n_gens {
        cfg.sensors.push(ici_core::scenario::SensorConfig {
            state: format!("line:g{i}-g{}", i + 1),
            cluster: i - 1,
            gain: 1.0,
        });
    }
    for comp in 1..=4 {
        cfg.sensors.push(ici_core::scenario::SensorConfig {
            state: format!("gas:j1-j2:{comp}"),
            cluster,
            gain: 1.0,
        });
    }
    cluster += 1;
    cfg.sensors.push(ici_core::scenario::SensorConfig {
        state: "water:w1-w2".into(),
        cluster,
        gain: 1.0,
    });

    cfg.noise.psi = ici_core::scenario::Diagonal::Uniform(rng.random_range(0.005..0.02));
    cfg.noise.phi = ici_core::scenario::Diagonal::Uniform(rng.random_range(1e-5..1e-4));
    cfg.noise.omega = ici_core::scenario::Diagonal::Uniform(rng.random_range(0.005..0.05));
    cfg.game.seed = seed;
    cfg
}
