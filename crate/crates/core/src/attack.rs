//! Worst-case impact of alpha-feasible impulse attacks.
//!
//! An impulse attack y^a at k = 1 drives the error/residue deviations
//!
//! ```text
//! de(k+1) = Q de(k) - K y^a(k+1)        de(1) = -K y^a
//! dz(k+1) = C A de(k) + y^a(k+1)        dz(1) = y^a
//! ```
//!
//! so the cumulative error difference q(k) = de' E de peaks at k in {1, 2}
//! and the residue KL distance D(k) = sqrt(dz' S dz) peaks at k in {1, 2, 3}.
//! The worst alpha-feasible attack on a sensor set solves
//!
//! ```text
//! max  max(y' R1 y, y' R2 y)   s.t.  max_i y' P_i y <= alpha^2,  y = 0 off the set
//! ```
//!
//! with R1 = K'EK, R2 = K'Q'EQK, P1 = S, P2 = K'A'C'SCAK, P3 = K'Q'A'C'SCAQK.
//! Maximizing a convex quadratic over an intersection of ellipsoids is
//! globally hard; the solver combines generalized-eigenvector candidates for
//! every (objective, constraint) pair, axis candidates, a dense angle scan in
//! two dimensions, and projected gradient ascent on the constraint boundary.
//! Solutions are computed at alpha = 1 and scaled, so alpha-homogeneity
//! q(c alpha) = c^2 q(alpha) holds by construction.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::AttackError;
use crate::estimator::EstimatorBundle;
use crate::model::{ClusterIndex, SensorNetwork, StateSpaceModel};

/// An impulse attack on a set of sensor clusters.
#[derive(Debug, Clone)]
pub struct AttackInjection {
    /// Attacked cluster ids.
    pub clusters: Vec<usize>,
    /// Attack vector over all m sensors; zero outside the attacked clusters.
    pub vector: DVector<f64>,
    /// KL feasibility budget.
    pub alpha: f64,
}

impl AttackInjection {
    pub fn new(
        clusters: Vec<usize>,
        vector: DVector<f64>,
        alpha: f64,
        index: &ClusterIndex,
    ) -> Result<AttackInjection, AttackError> {
        if !(alpha > 0.0) {
            return Err(AttackError::BadAlpha(alpha));
        }
        for &c in &clusters {
            if c >= index.cluster_count() {
                return Err(AttackError::UnknownCluster(c, index.cluster_count()));
            }
        }
        let allowed = index.union(&clusters);
        for (i, &v) in vector.iter().enumerate() {
            if v != 0.0 && allowed.binary_search(&i).is_err() {
                return Err(AttackError::SupportViolation(i));
            }
        }
        Ok(AttackInjection { clusters, vector, alpha })
    }
}

/// The five quadratic forms of the boundary QCQP.
#[derive(Debug, Clone)]
pub struct ImpactMatrices {
    pub r1: DMatrix<f64>,
    pub r2: DMatrix<f64>,
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    pub p3: DMatrix<f64>,
}

impl ImpactMatrices {
    pub fn new(
        model: &StateSpaceModel,
        sensors: &SensorNetwork,
        bundle: &EstimatorBundle,
        cost: &DVector<f64>,
    ) -> ImpactMatrices {
        let k = &bundle.k;
        let q = &bundle.q;
        let a = &model.a;
        let c = &sensors.c;
        let e = DMatrix::from_diagonal(cost);
        let s = DMatrix::from_diagonal(&bundle.s_diag);

        let ek = &e * k;
        let r1 = k.transpose() * &ek;
        let qk = q * k;
        let r2 = qk.transpose() * &e * &qk;
        let cak = c * a * k;
        let p2 = cak.transpose() * &s * &cak;
        let caqk = c * a * &qk;
        let p3 = caqk.transpose() * &s * &caqk;
        ImpactMatrices { r1, r2, p1: s, p2, p3 }
    }

    fn constraints(&self) -> [&DMatrix<f64>; 3] {
        [&self.p1, &self.p2, &self.p3]
    }
}

/// Deviation sequences of one impulse attack over a horizon.
#[derive(Debug, Clone)]
pub struct DeviationResponse {
    /// de(k), index 0 holds the zero pre-attack state.
    pub delta_e: Vec<DVector<f64>>,
    /// dz(k).
    pub delta_z: Vec<DVector<f64>>,
    /// q(k) = de(k)' E de(k).
    pub q: Vec<f64>,
    /// D(k) = sqrt(dz(k)' S dz(k)).
    pub d: Vec<f64>,
}

impl DeviationResponse {
    /// argmax over k >= 1 of q(k).
    pub fn peak_q_step(&self) -> usize {
        peak(&self.q)
    }

    /// argmax over k >= 1 of D(k).
    pub fn peak_d_step(&self) -> usize {
        peak(&self.d)
    }
}

fn peak(series: &[f64]) -> usize {
    let mut best = 1;
    for k in 1..series.len() {
        if series[k] > series[best] {
            best = k;
        }
    }
    best
}

/// Propagate the deviation dynamics for an impulse attack y^a at k = 1.
pub fn deviation_response(
    model: &StateSpaceModel,
    sensors: &SensorNetwork,
    bundle: &EstimatorBundle,
    cost: &DVector<f64>,
    y_attack: &DVector<f64>,
    horizon: usize,
) -> DeviationResponse {
    let n = model.state_count();
    let m = sensors.sensor_count();
    let ca = &sensors.c * &model.a;
    let mut delta_e = vec![DVector::zeros(n)];
    let mut delta_z = vec![DVector::zeros(m)];
    let mut q = vec![0.0];
    let mut d = vec![0.0];
    for k in 1..=horizon {
        let impulse = if k == 1 { y_attack.clone() } else { DVector::zeros(m) };
        let prev = delta_e.last().unwrap();
        let dz = &ca * prev + &impulse;
        let de = &bundle.q * prev - &bundle.k * &impulse;
        q.push(de.iter().zip(cost.iter()).map(|(e, c)| c * e * e).sum());
        d.push(
            dz.iter()
                .zip(bundle.s_diag.iter())
                .map(|(z, s)| s * z * z)
                .sum::<f64>()
                .sqrt(),
        );
        delta_e.push(de);
        delta_z.push(dz);
    }
    DeviationResponse { delta_e, delta_z, q, d }
}

/// Closed-form maximum CED of an impulse attack: max(y'R1y, y'R2y).
pub fn max_ced_impulse(im: &ImpactMatrices, y_attack: &DVector<f64>) -> f64 {
    let q1 = quad(&im.r1, y_attack);
    let q2 = quad(&im.r2, y_attack);
    q1.max(q2)
}

/// Closed-form maximum KL distance of an impulse attack:
/// max over the three boundary expressions sqrt(y' P_i y).
pub fn max_kl_impulse(im: &ImpactMatrices, y_attack: &DVector<f64>) -> f64 {
    im.constraints()
        .iter()
        .map(|p| quad(p, y_attack))
        .fold(0.0_f64, f64::max)
        .sqrt()
}

fn quad(mat: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    (y.transpose() * mat * y)[(0, 0)]
}

/// Certificate of one QCQP solve.
#[derive(Debug, Clone)]
pub struct CedCertificate {
    /// Index (1-based: P1..P3) of the active constraint at the argmax.
    pub active_constraint: usize,
    /// Index (1-based: R1/R2) of the attaining objective; ties go to R1.
    pub objective: usize,
    /// max_i y' P_i y at the argmax; boundary activity means ~alpha^2.
    pub boundary_value: f64,
}

/// Solution of the worst-case alpha-feasible attack QCQP.
#[derive(Debug, Clone)]
pub struct CedSolution {
    /// Objective value q^m_alpha.
    pub value: f64,
    /// Maximizing attack vector over all m sensors (zero off the set).
    pub argmax: DVector<f64>,
    pub certificate: CedCertificate,
}

/// Maximize max(y'R1y, y'R2y) over the alpha-ball intersection restricted to
/// `coords` (sensor rows of the attacked set).
pub fn solve_max_ced(
    im: &ImpactMatrices,
    coords: &[usize],
    alpha: f64,
    m: usize,
) -> Result<CedSolution, AttackError> {
    if !(alpha > 0.0) {
        return Err(AttackError::BadAlpha(alpha));
    }
    if coords.is_empty() {
        return Ok(CedSolution {
            value: 0.0,
            argmax: DVector::zeros(m),
            certificate: CedCertificate { active_constraint: 1, objective: 1, boundary_value: 0.0 },
        });
    }
    let d = coords.len();
    let gather = |mat: &DMatrix<f64>| DMatrix::from_fn(d, d, |r, c| mat[(coords[r], coords[c])]);
    let rs = [gather(&im.r1), gather(&im.r2)];
    let ps = [gather(&im.p1), gather(&im.p2), gather(&im.p3)];

    // Solve at alpha = 1; scale the argmax by alpha and the value by alpha^2
    // afterwards so homogeneity is exact.
    let mut best: Option<(f64, DVector<f64>, usize)> = None;
    for (oi, r) in rs.iter().enumerate() {
        let mut starts: Vec<DVector<f64>> = Vec::new();
        for p in &ps {
            if let Some(v) = top_generalized_eigenvector(r, p) {
                starts.push(v);
            }
        }
        for axis in 0..d {
            let mut e = DVector::zeros(d);
            e[axis] = 1.0;
            starts.push(e);
        }
        if d == 2 {
            // dense boundary scan; the 2-D optimum is a global polish start
            let mut best_angle = (f64::NEG_INFINITY, DVector::zeros(d));
            for step in 0..4096 {
                let theta = std::f64::consts::PI * step as f64 / 4096.0;
                let dir = DVector::from_vec(vec![theta.cos(), theta.sin()]);
                let y = project_to_boundary(&dir, &ps);
                let val = quad(r, &y);
                if val > best_angle.0 {
                    best_angle = (val, y);
                }
            }
            starts.push(best_angle.1);
        }

        for start in starts {
            let y = ascend(r, &ps, &start);
            let val = quad(r, &y);
            let better = match &best {
                None => true,
                Some((b, _, _)) => val > *b,
            };
            if better {
                best = Some((val, y, oi));
            }
        }
    }
    let (value_unit, y_unit, _) = best.expect("at least one candidate");

    // Tie-break toward R1 at the final argmax.
    let q1 = quad(&rs[0], &y_unit);
    let q2 = quad(&rs[1], &y_unit);
    let objective = if q1 >= q2 { 1 } else { 2 };
    let boundary: Vec<f64> = ps.iter().map(|p| quad(p, &y_unit)).collect();
    let active = boundary
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i + 1)
        .unwrap();
    let boundary_value = boundary.into_iter().fold(0.0_f64, f64::max) * alpha * alpha;

    let mut argmax = DVector::zeros(m);
    for (i, &c) in coords.iter().enumerate() {
        argmax[c] = alpha * y_unit[i];
    }
    Ok(CedSolution {
        value: alpha * alpha * value_unit,
        argmax,
        certificate: CedCertificate { active_constraint: active, objective, boundary_value },
    })
}

/// Radially project onto the boundary max_i y'P_iy = 1. P1 is positive
/// definite on every coordinate set, so the scaling factor always exists.
fn project_to_boundary(y: &DVector<f64>, ps: &[DMatrix<f64>; 3]) -> DVector<f64> {
    let worst = ps.iter().map(|p| quad(p, y)).fold(0.0_f64, f64::max);
    y * (1.0 / worst.sqrt())
}

/// Projected gradient ascent of y'Ry on the constraint boundary with step
/// halving; 500 iterations.
fn ascend(r: &DMatrix<f64>, ps: &[DMatrix<f64>; 3], start: &DVector<f64>) -> DVector<f64> {
    let mut y = project_to_boundary(start, ps);
    let mut value = quad(r, &y);
    let mut step = 0.5;
    for _ in 0..500 {
        let grad = r * &y * 2.0;
        let norm = grad.norm();
        if norm == 0.0 || step < 1e-16 {
            break;
        }
        let trial = project_to_boundary(&(&y + grad * (step / norm)), ps);
        let trial_value = quad(r, &trial);
        if trial_value > value {
            y = trial;
            value = trial_value;
            step *= 1.5;
        } else {
            step *= 0.5;
        }
    }
    y
}

/// Top generalized eigenvector of (R, P + ridge), via Cholesky whitening.
/// The 1e-12 ridge guards against PSD-singular constraint restrictions.
fn top_generalized_eigenvector(r: &DMatrix<f64>, p: &DMatrix<f64>) -> Option<DVector<f64>> {
    let d = r.nrows();
    let mut ridge = 1e-12 * (1.0 + p.amax());
    for _ in 0..8 {
        let shifted = p + DMatrix::identity(d, d) * ridge;
        if let Some(chol) = shifted.clone().cholesky() {
            let l_inv = chol.l().try_inverse()?;
            let whitened = &l_inv * r * l_inv.transpose();
            let sym = (&whitened + whitened.transpose()) * 0.5;
            let eig = sym.symmetric_eigen();
            let mut top = 0;
            for i in 1..d {
                if eig.eigenvalues[i] > eig.eigenvalues[top] {
                    top = i;
                }
            }
            let u = eig.eigenvectors.column(top).clone_owned();
            return Some(l_inv.transpose() * u);
        }
        ridge *= 100.0;
    }
    None
}

/// Per-cluster worst-case values and their normalization.
#[derive(Debug, Clone)]
pub struct ClusterValuation {
    /// Raw values phi_i = q^m_alpha(N_i).
    pub raw: Vec<f64>,
    /// Normalized values, summing to one.
    pub normalized: Vec<f64>,
    /// Per-cluster solver certificates and argmax vectors.
    pub solutions: Vec<CedSolution>,
    pub alpha: f64,
}

impl ClusterValuation {
    pub fn total_raw(&self) -> f64 {
        self.raw.iter().sum()
    }
}

/// Solve the QCQP for every cluster and normalize. Clusters solve in
/// parallel; rejection of all-zero valuations keeps the game well posed.
pub fn value_clusters(
    im: &ImpactMatrices,
    index: &ClusterIndex,
    alpha: f64,
    m: usize,
) -> Result<ClusterValuation, AttackError> {
    let solutions: Vec<CedSolution> = (0..index.cluster_count())
        .into_par_iter()
        .map(|i| solve_max_ced(im, index.sensors_of(i), alpha, m))
        .collect::<Result<_, _>>()?;
    let raw: Vec<f64> = solutions.iter().map(|s| s.value).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(AttackError::AllValuesZero);
    }
    let normalized: Vec<f64> = raw.iter().map(|v| v / total).collect();
    Ok(ClusterValuation { raw, normalized, solutions, alpha })
}
