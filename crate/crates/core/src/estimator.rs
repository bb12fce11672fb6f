//! Steady-state Kalman estimation and chi-square failure detection.
//!
//! The filter uses the fixed gain from the discrete Riccati fixed point:
//!
//! ```text
//! P = A P A' + Phi - A P C' (C P C' + Omega)^-1 C P A'
//! K = P C' (C P C' + Omega)^-1
//! ```
//!
//! and the recursion `xhat(k|k) = (I - KC)(A xhat(k-1|k-1) + B u(k-1)) +
//! K y(k)` with `xhat(0|0) = x(0)`. The residue is `z(k) = y(k) - C A
//! xhat(k-1|k-1)` and the detector fires when `g(k) = z' Z^-1 z` exceeds the
//! threshold; `Z` is the diagonal of the steady-state innovation covariance
//! `C P C' + Omega`.
//!
//! A simulation carries the attacked filter alongside the nominal one with
//! the same noise draws, so attacked-minus-nominal quantities are exactly
//! the noise-free linear response to the injected attack.

use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use statrs::distribution::ContinuousCDF;

use crate::attack::AttackInjection;
use crate::error::EstimatorError;
use crate::model::{SensorNetwork, StateSpaceModel};
use crate::rng::{self, Stream};

/// Noise covariances (diagonals), state-error cost, detector threshold.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    /// Initial-state covariance diag(Psi), length n.
    pub psi: DVector<f64>,
    /// Process covariance diag(Phi), length n.
    pub phi: DVector<f64>,
    /// Measurement covariance diag(Omega), length m; strictly positive.
    pub omega: DVector<f64>,
    /// State-error cost diag(E), length n.
    pub cost: DVector<f64>,
    /// Detector threshold g^t; `None` selects the chi-square 0.95 quantile
    /// with m degrees of freedom.
    pub threshold: Option<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        for (name, v) in [("psi", &self.psi), ("phi", &self.phi), ("cost", &self.cost)] {
            if let Some((i, &x)) = v.iter().enumerate().find(|(_, &x)| x < 0.0) {
                return Err(EstimatorError::NegativeNoise(
                    match name {
                        "psi" => "psi",
                        "phi" => "phi",
                        _ => "cost",
                    },
                    i,
                    x,
                ));
            }
        }
        if let Some((i, &x)) = self.omega.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(EstimatorError::SingularMeasurementNoise(i, x));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return Err(EstimatorError::BadThreshold(t));
            }
        }
        Ok(())
    }
}

/// Chi-square quantile used for the default detector threshold.
pub fn chi_square_threshold(dof: usize, quantile: f64) -> f64 {
    statrs::distribution::ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(quantile)
}

/// Fixed-gain estimator derived from one (model, sensors, noise) triple.
#[derive(Debug, Clone)]
pub struct EstimatorBundle {
    /// Riccati fixed point (a priori error covariance).
    pub p: DMatrix<f64>,
    /// Fixed Kalman gain.
    pub k: DMatrix<f64>,
    /// Closed-loop deviation matrix Q = A - KCA.
    pub q: DMatrix<f64>,
    /// Diagonal residue covariance Z = diag(C P C' + Omega).
    pub z_diag: DVector<f64>,
    /// S = Z^-1 / 2.
    pub s_diag: DVector<f64>,
    /// Detector threshold g^t.
    pub threshold: f64,
}

/// Iterate the Riccati map to its fixed point, starting from Psi.
///
/// Each iterate is symmetrized; convergence is max-abs-entry change below
/// 1e-10 within 1e5 iterations.
pub fn solve_riccati(
    model: &StateSpaceModel,
    sensors: &SensorNetwork,
    noise: &NoiseSpec,
) -> Result<DMatrix<f64>, EstimatorError> {
    noise.validate()?;
    let n = model.state_count();
    let c = &sensors.c;
    if noise.psi.len() != n || noise.phi.len() != n {
        return Err(EstimatorError::Dimension(format!(
            "noise diagonals have length {}/{}, model has {n} states",
            noise.psi.len(),
            noise.phi.len()
        )));
    }
    if noise.omega.len() != c.nrows() {
        return Err(EstimatorError::Dimension(format!(
            "omega has length {}, sensor matrix has {} rows",
            noise.omega.len(),
            c.nrows()
        )));
    }

    let a = &model.a;
    let phi = DMatrix::from_diagonal(&noise.phi);
    let omega = DMatrix::from_diagonal(&noise.omega);
    let mut p = DMatrix::from_diagonal(&noise.psi);

    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 100_000;
    let mut delta = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let ap = a * &p;
        let mut next = &ap * a.transpose() + &phi;
        if c.nrows() > 0 {
            let apct = &ap * c.transpose();
            let innov = c * &p * c.transpose() + &omega;
            let gain = innov
                .clone()
                .lu()
                .solve(&apct.transpose())
                .ok_or(EstimatorError::SingularMeasurementNoise(0, 0.0))?;
            next -= &apct * gain;
        }
        // keep the iterate symmetric against rounding drift
        next = (&next + next.transpose()) * 0.5;
        delta = (&next - &p).amax();
        p = next;
        if delta < TOL {
            return Ok(p);
        }
    }
    Err(EstimatorError::RiccatiDiverged(MAX_ITER, delta))
}

/// Fixed gain, closed loop, residue covariance, and threshold from P.
pub fn kalman_gain(
    p: &DMatrix<f64>,
    model: &StateSpaceModel,
    sensors: &SensorNetwork,
    noise: &NoiseSpec,
) -> Result<EstimatorBundle, EstimatorError> {
    let c = &sensors.c;
    let m = c.nrows();
    let n = model.state_count();
    let innov = c * p * c.transpose() + DMatrix::from_diagonal(&noise.omega);
    // K = P C' (C P C' + Omega)^-1, via solve on the transposed system
    let k = if m == 0 {
        DMatrix::zeros(n, 0)
    } else {
        innov
            .clone()
            .lu()
            .solve(&(c * p))
            .ok_or(EstimatorError::SingularMeasurementNoise(0, 0.0))?
            .transpose()
    };
    let q = &model.a - &k * c * &model.a;
    let rho = crate::linalg::spectral_radius(&q)
        .map_err(|e| EstimatorError::Dimension(e.to_string()))?;
    if rho >= 1.0 {
        return Err(EstimatorError::UnstableClosedLoop(rho));
    }
    let z_diag = DVector::from_fn(m, |i, _| innov[(i, i)]);
    let s_diag = z_diag.map(|z| 0.5 / z);
    let threshold = match noise.threshold {
        Some(t) => t,
        None if m == 0 => f64::INFINITY,
        None => chi_square_threshold(m, 0.95),
    };
    Ok(EstimatorBundle { p: p.clone(), k, q, z_diag, s_diag, threshold })
}

/// Piecewise-constant input schedule: per channel, (from_step, value)
/// segments; the value of the latest segment at or before k applies.
#[derive(Debug, Clone)]
pub struct InputSchedule {
    channels: usize,
    base: DVector<f64>,
    /// (channel, from_step, value), sorted by (channel, from_step).
    steps: Vec<(usize, usize, f64)>,
}

impl InputSchedule {
    pub fn zero(channels: usize) -> InputSchedule {
        InputSchedule { channels, base: DVector::zeros(channels), steps: Vec::new() }
    }

    pub fn constant(base: DVector<f64>) -> InputSchedule {
        InputSchedule { channels: base.len(), base, steps: Vec::new() }
    }

    /// Override `channel` to `value` from step `from_step` on.
    pub fn with_step(mut self, channel: usize, from_step: usize, value: f64) -> InputSchedule {
        self.steps.push((channel, from_step, value));
        self.steps.sort_by_key(|&(c, s, _)| (c, s));
        self
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Input vector at step k.
    pub fn at(&self, k: usize) -> DVector<f64> {
        let mut u = self.base.clone();
        for &(c, s, v) in &self.steps {
            if s <= k {
                u[c] = v;
            }
        }
        u
    }
}

/// One simulated run: truth, measurements, estimates, residues, detector
/// values, and (when attacked) the attacked counterparts computed with the
/// same noise.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub xhat: Vec<DVector<f64>>,
    pub z: Vec<DVector<f64>>,
    pub g: Vec<f64>,
    pub alarm: Vec<bool>,
    pub attacked: Option<AttackedTrajectory>,
    pub threshold: f64,
}

/// Attacked-side series of a paired run.
#[derive(Debug, Clone)]
pub struct AttackedTrajectory {
    pub y_bar: Vec<DVector<f64>>,
    pub xhat_bar: Vec<DVector<f64>>,
    pub z_bar: Vec<DVector<f64>>,
    pub g_bar: Vec<f64>,
    pub alarm_bar: Vec<bool>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.g.len() - 1
    }

    /// Estimation error e(k) = x(k) - xhat(k|k).
    pub fn error(&self, k: usize) -> DVector<f64> {
        &self.x[k] - &self.xhat[k]
    }
}

/// Simulate `horizon` steps of the closed-loop estimator.
///
/// Noise draws depend only on (noise.seed, replica); an attacked run draws
/// identically to its unattacked pair. The attack, when given, is an impulse
/// added to the measurement at k = 1.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    model: &StateSpaceModel,
    sensors: &SensorNetwork,
    bundle: &EstimatorBundle,
    noise: &NoiseSpec,
    inputs: &InputSchedule,
    horizon: usize,
    attack: Option<&AttackInjection>,
    replica: u64,
) -> Result<Trajectory, EstimatorError> {
    if horizon == 0 {
        return Err(EstimatorError::ZeroHorizon);
    }
    let m = sensors.sensor_count();
    if inputs.channels() != model.input_count() {
        return Err(EstimatorError::Dimension(format!(
            "input schedule has {} channels, model expects {}",
            inputs.channels(),
            model.input_count()
        )));
    }
    if let Some(atk) = attack {
        if atk.vector.len() != m {
            return Err(EstimatorError::Dimension(format!(
                "attack vector has length {}, sensor count is {m}",
                atk.vector.len()
            )));
        }
    }

    let mut rng = rng::rng_for(noise.seed, Stream::Noise(replica));
    let gauss = {
        let normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
        move |rng: &mut rand_chacha::ChaCha8Rng, sd: &DVector<f64>| {
            DVector::from_fn(sd.len(), |i, _| sd[i] * rng.sample::<f64, _>(normal))
        }
    };
    let psi_sd = noise.psi.map(f64::sqrt);
    let phi_sd = noise.phi.map(f64::sqrt);
    let omega_sd = noise.omega.map(f64::sqrt);

    let a = &model.a;
    let b = &model.b;
    let c = &sensors.c;
    let k_gain = &bundle.k;

    let x0 = gauss(&mut rng, &psi_sd);
    let l0 = gauss(&mut rng, &omega_sd);

    let mut x = Vec::with_capacity(horizon + 1);
    let mut y = Vec::with_capacity(horizon + 1);
    let mut xhat = Vec::with_capacity(horizon + 1);
    let mut z = Vec::with_capacity(horizon + 1);
    let mut g = Vec::with_capacity(horizon + 1);
    let mut alarm = Vec::with_capacity(horizon + 1);

    y.push(c * &x0 + &l0);
    xhat.push(x0.clone());
    x.push(x0);
    z.push(DVector::zeros(m));
    g.push(0.0);
    alarm.push(false);

    let mut attacked = attack.map(|_| AttackedTrajectory {
        y_bar: vec![y[0].clone()],
        xhat_bar: vec![xhat[0].clone()],
        z_bar: vec![DVector::zeros(m)],
        g_bar: vec![0.0],
        alarm_bar: vec![false],
    });

    for k in 1..=horizon {
        // u(k-1); the startup convention is u(-1) = u(0), irrelevant here
        // because truth propagation starts at k = 1 using u(0).
        let u_prev = inputs.at(k - 1);
        let w = gauss(&mut rng, &phi_sd);
        let l = gauss(&mut rng, &omega_sd);

        let x_next = a * x.last().unwrap() + b * &u_prev + w;
        let y_next = c * &x_next + l;

        let predict = a * xhat.last().unwrap() + b * &u_prev;
        let residue = &y_next - c * a * xhat.last().unwrap();
        let update = &predict - k_gain * c * &predict + k_gain * &y_next;
        let g_k: f64 = residue
            .iter()
            .zip(bundle.z_diag.iter())
            .map(|(zi, di)| zi * zi / di)
            .sum();

        if let (Some(att), Some(atk)) = (attacked.as_mut(), attack) {
            let mut y_bar = y_next.clone();
            if k == 1 {
                y_bar += &atk.vector;
            }
            let predict_bar = a * att.xhat_bar.last().unwrap() + b * &u_prev;
            let residue_bar = &y_bar - c * a * att.xhat_bar.last().unwrap();
            let update_bar = &predict_bar - k_gain * c * &predict_bar + k_gain * &y_bar;
            let g_bar: f64 = residue_bar
                .iter()
                .zip(bundle.z_diag.iter())
                .map(|(zi, di)| zi * zi / di)
                .sum();
            att.y_bar.push(y_bar);
            att.xhat_bar.push(update_bar);
            att.z_bar.push(residue_bar);
            att.alarm_bar.push(g_bar > bundle.threshold);
            att.g_bar.push(g_bar);
        }

        x.push(x_next);
        y.push(y_next);
        xhat.push(update);
        alarm.push(g_k > bundle.threshold);
        g.push(g_k);
        z.push(residue);
    }

    Ok(Trajectory { x, y, xhat, z, g, alarm, attacked, threshold: bundle.threshold })
}

/// Per-step alarm frequencies across replicas: (beta, beta_bar).
///
/// Every trajectory must carry an attacked side produced with the same
/// seeds, so the pair is directly comparable step by step.
pub fn empirical_alarm_rates(
    replicas: &[Trajectory],
) -> Result<(Vec<f64>, Vec<f64>), EstimatorError> {
    if replicas.is_empty() {
        return Err(EstimatorError::NoReplicas);
    }
    let horizon = replicas[0].horizon();
    let count = replicas.len() as f64;
    let mut beta = vec![0.0; horizon + 1];
    let mut beta_bar = vec![0.0; horizon + 1];
    for t in replicas {
        for k in 0..=horizon {
            if t.alarm[k] {
                beta[k] += 1.0;
            }
            let attacked = t.attacked.as_ref().map_or(t.alarm[k], |a| a.alarm_bar[k]);
            if attacked {
                beta_bar[k] += 1.0;
            }
        }
    }
    for k in 0..=horizon {
        beta[k] /= count;
        beta_bar[k] /= count;
    }
    Ok((beta, beta_bar))
}
