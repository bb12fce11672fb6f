//! Error types, tagged by the module that raised them.

use thiserror::Error;

/// Top-level error. Every variant message is prefixed with the module it
/// originated from so CLI diagnostics can be traced back to a pipeline stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("estimator: {0}")]
    Estimator(#[from] EstimatorError),
    #[error("attack: {0}")]
    Attack(#[from] AttackError),
    #[error("blotto: {0}")]
    Blotto(#[from] BlottoError),
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("sim: {0}")]
    Sim(#[from] SimError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("generator list is empty")]
    NoGenerators,
    #[error("generator `{0}`: {1}")]
    BadGenerator(String, String),
    #[error("transmission line {0}-{1}: {2}")]
    BadLine(String, String, String),
    #[error("line endpoint `{0}` does not reference a declared generator")]
    DanglingLineEndpoint(String),
    #[error("pipeline {0}-{1}: {2}")]
    BadPipeline(String, String, String),
    #[error("pipeline endpoint `{0}` does not reference a declared junction")]
    DanglingPipelineEndpoint(String),
    #[error("junction `{0}`: {1}")]
    BadJunction(String, String),
    #[error("pipeline graph has a cycle through junction `{0}`")]
    PipelineCycle(String),
    #[error("junction `{0}` has zero inbound sector area sum")]
    ZeroSectorAreaSum(String),
    #[error("coupling matrix {0} has shape {1}x{2}, expected {3}x{4}")]
    CouplingShape(&'static str, usize, usize, usize, usize),
    #[error("coupling matrix {0} column {1} sums to {2}; an output may feed at most one input")]
    CouplingColumnSum(&'static str, usize, f64),
    #[error("coupling matrix {0} has entry {1} outside {{0,1}}")]
    CouplingEntry(&'static str, f64),
    #[error("assembled A is not Hurwitz; unstable eigenvalues: {0}")]
    NotHurwitz(String),
    #[error("discrete A has spectral radius {0} >= 1")]
    NotSchur(f64),
    #[error("discretization requires a continuous-time model")]
    AlreadyDiscrete,
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("time step {dt} exceeds the Nyquist bound 2/|lambda_max| = {bound}")]
    DtTooLarge { dt: f64, bound: f64 },
    #[error("(I - A*dt/2) is singular; bilinear transform undefined at dt = {0}")]
    SingularTustin(f64),
    #[error("sensor {0} references unknown state `{1}`")]
    UnknownSensorState(usize, String),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("sensor {0} is not assigned to any cluster")]
    UnclusteredSensor(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("Riccati iteration did not converge within {0} iterations (last delta {1:.3e})")]
    RiccatiDiverged(usize, f64),
    #[error("measurement covariance must have a strictly positive diagonal (entry {0} = {1})")]
    SingularMeasurementNoise(usize, f64),
    #[error("closed-loop matrix A - KCA has spectral radius {0} >= 1; scenario rejected")]
    UnstableClosedLoop(f64),
    #[error("noise diagonal `{0}` has negative entry {1} = {2}")]
    NegativeNoise(&'static str, usize, f64),
    #[error("detector threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("alarm rates need at least one replica")]
    NoReplicas,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("attack vector has nonzero entry {0} outside the attacked clusters")]
    SupportViolation(usize),
    #[error("feasibility budget alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("attack must be an impulse: nonzero only at step 1")]
    NotImpulse,
    #[error("every cluster valuation is zero; scenario is degenerate")]
    AllValuesZero,
    #[error("cluster {0} is out of range (have {1} clusters)")]
    UnknownCluster(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Error)]
pub enum BlottoError {
    #[error("need at least one sensor cluster")]
    NoClusters,
    #[error("budgets must satisfy 0 < R^a <= R^d, got R^a = {0}, R^d = {1}")]
    BadBudgets(f64, f64),
    #[error("value vector has negative entry {0} = {1}")]
    NegativeValue(usize, f64),
    #[error("general Lotto solve needs strictly positive values (entry {0} = {1})")]
    NonPositiveValue(usize, f64),
    #[error("value vectors have mismatched lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("no multiplier ratio solves the budget system; closest pieces: {0}")]
    NoConsistentPiece(String),
    #[error("defended subset must be a nonempty proper subset of the clusters")]
    BadDefenseSubset,
    #[error("best response is defined against one pure opponent; both players are best-responders")]
    BestResponseCycle,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to parse scenario JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown {0} id `{1}` referenced by {2}")]
    UnknownId(&'static str, String, String),
    #[error("generator `{0}` is not fed by {1}; it cannot anchor this coupling")]
    WrongFuel(String, &'static str),
    #[error("junction `{0}` declares inbound count {1} but topology has {2}")]
    InboundCountMismatch(String, usize, usize),
    #[error("noise diagonal `{0}` has length {1}, expected {2}")]
    NoiseLength(&'static str, usize, usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("replicas must be at least 1")]
    ZeroReplicas,
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("cluster {0} mixes sensors from different infrastructures; single-CI defense undefined")]
    MixedCluster(usize),
    #[error("defense subset `{0}` selects no clusters")]
    EmptyDefense(String),
    #[error("monitored state `{0}` not found")]
    UnknownMonitor(String),
}
