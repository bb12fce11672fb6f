//! The scenario document: one JSON file describing topology, sensing,
//! noise, and game parameters.
//!
//! Sections: `generators`, `lines`, `gas_pipelines`, `water_pipelines`,
//! `junctions`, `coupling`, `sensors`, `noise`, `game`. Couplings are given
//! as label pairs and materialized into the four 0/1 incidence matrices.
//! Demand profiles are piecewise-constant: a list of `{from_step, value}`
//! segments per channel.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ScenarioError};
use crate::estimator::{InputSchedule, NoiseSpec};
use crate::labels::{Infrastructure, InputLabel, StateLabel};
use crate::model::{
    assemble_ici, build_gas_ci, build_power_ci, build_sensor_matrix, build_water_ci, discretize,
    CouplingMap, FuelSource, GasPipelineSpec, GeneratorSpec, JunctionSpec, SensorNetwork,
    SensorSpec, StateSpaceModel, TransmissionLineSpec, WaterPipelineSpec,
};

/// One piecewise-constant demand segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemandSegment {
    pub from_step: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub id: String,
    pub inertia: f64,
    pub damping: f64,
    pub turbine_time_constant: f64,
    pub operating_power: f64,
    pub voltage: f64,
    pub operating_angle: f64,
    pub fuel: FuelSource,
    #[serde(default)]
    pub demand: Vec<DemandSegment>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineConfig {
    pub from: String,
    pub to: String,
    pub reactance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JunctionConfig {
    pub id: String,
    pub infrastructure: Infrastructure,
    pub setpoint: f64,
    pub efficiency: f64,
    pub inbound_count: usize,
    #[serde(default)]
    pub demand: Vec<DemandSegment>,
}

/// Coupling section: lists of (output id, input id) pairs by label.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CouplingConfig {
    /// Compressor power of a gas junction -> demand input of a generator.
    #[serde(default)]
    pub gas_to_power: Vec<(String, String)>,
    /// Pump power of a water junction -> demand input of a generator.
    #[serde(default)]
    pub water_to_power: Vec<(String, String)>,
    /// Gas fuel demand of a generator -> demand input of a gas junction.
    #[serde(default)]
    pub power_to_gas: Vec<(String, String)>,
    /// Water fuel demand of a generator -> demand input of a water junction.
    #[serde(default)]
    pub power_to_water: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensorConfig {
    /// State label, e.g. `omega:g1`, `gas:j1-j2:3`, `water:w2-w3`.
    pub state: String,
    pub cluster: usize,
    #[serde(default = "default_gain")]
    pub gain: f64,
}

fn default_gain() -> f64 {
    1.0
}

/// Uniform or per-entry diagonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diagonal {
    Uniform(f64),
    PerEntry(Vec<f64>),
}

impl Diagonal {
    fn to_vector(&self, len: usize, name: &'static str) -> Result<DVector<f64>, ScenarioError> {
        match self {
            Diagonal::Uniform(v) => Ok(DVector::from_element(len, *v)),
            Diagonal::PerEntry(vs) => {
                if vs.len() != len {
                    return Err(ScenarioError::NoiseLength(name, vs.len(), len));
                }
                Ok(DVector::from_vec(vs.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub psi: Diagonal,
    pub phi: Diagonal,
    pub omega: Diagonal,
    #[serde(default = "default_cost")]
    pub cost: Diagonal,
    /// Detector threshold; omitted selects the chi-square 0.95 quantile.
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_cost() -> Diagonal {
    Diagonal::Uniform(1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub attacker_budget: f64,
    pub defender_budget: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_strategy")]
    pub attacker_strategy: String,
    #[serde(default = "default_strategy")]
    pub defender_strategy: String,
    /// State labels whose estimation-error trajectories are reported.
    #[serde(default)]
    pub monitors: Vec<String>,
}

fn default_alpha() -> f64 {
    0.5
}
fn default_dt() -> f64 {
    0.1
}
fn default_horizon() -> usize {
    200
}
fn default_replicas() -> usize {
    50
}
fn default_seed() -> u64 {
    0
}
fn default_strategy() -> String {
    "msne".to_string()
}

/// The whole scenario document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub generators: Vec<GeneratorConfig>,
    #[serde(default)]
    pub lines: Vec<LineConfig>,
    #[serde(default)]
    pub gas_pipelines: Vec<GasPipelineSpec>,
    #[serde(default)]
    pub water_pipelines: Vec<WaterPipelineSpec>,
    #[serde(default)]
    pub junctions: Vec<JunctionConfig>,
    #[serde(default)]
    pub coupling: CouplingConfig,
    pub sensors: Vec<SensorConfig>,
    pub noise: NoiseConfig,
    pub game: GameConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<ScenarioConfig, Error> {
        let text = std::fs::read_to_string(path)?;
        ScenarioConfig::from_json(&text).map_err(Error::Scenario)
    }
}

/// Everything the pipeline needs, built once from a scenario.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub continuous: StateSpaceModel,
    pub discrete: StateSpaceModel,
    pub sensors: SensorNetwork,
    pub noise: NoiseSpec,
    pub inputs: InputSchedule,
    pub alpha: f64,
    pub r_a: f64,
    pub r_d: f64,
    pub horizon: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Resolved monitor state labels for trajectory reports.
    pub monitors: Vec<StateLabel>,
}

/// The three partial models and the materialized coupling of a scenario.
pub fn build_partials(
    cfg: &ScenarioConfig,
) -> Result<(crate::model::PowerCi, crate::model::GasCi, crate::model::WaterCi, CouplingMap), Error> {
    check_unique_ids(cfg)?;

    let generators: Vec<GeneratorSpec> = cfg
        .generators
        .iter()
        .map(|g| GeneratorSpec {
            id: g.id.clone(),
            inertia: g.inertia,
            damping: g.damping,
            turbine_time_constant: g.turbine_time_constant,
            operating_power: g.operating_power,
            voltage: g.voltage,
            operating_angle: g.operating_angle,
            fuel: g.fuel,
        })
        .collect();
    let lines: Vec<TransmissionLineSpec> = cfg
        .lines
        .iter()
        .map(|l| TransmissionLineSpec { from: l.from.clone(), to: l.to.clone(), reactance: l.reactance })
        .collect();
    let power = build_power_ci(&generators, &lines).map_err(Error::Model)?;

    let gas_junctions: Vec<JunctionSpec> = cfg
        .junctions
        .iter()
        .filter(|j| j.infrastructure == Infrastructure::Gas)
        .map(junction_spec)
        .collect();
    let water_junctions: Vec<JunctionSpec> = cfg
        .junctions
        .iter()
        .filter(|j| j.infrastructure == Infrastructure::Water)
        .map(junction_spec)
        .collect();
    let gas = build_gas_ci(&cfg.gas_pipelines, &gas_junctions).map_err(Error::Model)?;
    let water = build_water_ci(&cfg.water_pipelines, &water_junctions).map_err(Error::Model)?;

    let coupling = materialize_coupling(cfg, &power, &gas, &water)?;
    Ok((power, gas, water, coupling))
}

/// Build and validate the models described by a scenario.
pub fn build_scenario(cfg: &ScenarioConfig) -> Result<BuiltScenario, Error> {
    let (power, gas, water, coupling) = build_partials(cfg)?;
    let continuous = assemble_ici(&power, &gas, &water, &coupling).map_err(Error::Model)?;
    let discrete = discretize(&continuous, cfg.game.dt).map_err(Error::Model)?;
    discrete.validate_stability().map_err(Error::Model)?;

    let sensor_specs: Vec<SensorSpec> = cfg
        .sensors
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let state = StateLabel::parse(&s.state).ok_or_else(|| {
                Error::Scenario(ScenarioError::Invalid(format!(
                    "sensor {i}: unparseable state label `{}`",
                    s.state
                )))
            })?;
            Ok(SensorSpec { state, cluster: s.cluster, gain: s.gain })
        })
        .collect::<Result<_, Error>>()?;
    let sensors = build_sensor_matrix(&discrete, &sensor_specs).map_err(Error::Model)?;

    let n = discrete.state_count();
    let m = sensors.sensor_count();
    let noise = NoiseSpec {
        psi: cfg.noise.psi.to_vector(n, "psi").map_err(Error::Scenario)?,
        phi: cfg.noise.phi.to_vector(n, "phi").map_err(Error::Scenario)?,
        omega: cfg.noise.omega.to_vector(m, "omega").map_err(Error::Scenario)?,
        cost: cfg.noise.cost.to_vector(n, "cost").map_err(Error::Scenario)?,
        threshold: cfg.noise.threshold,
        seed: cfg.game.seed,
    };

    let inputs = demand_schedule(cfg, &discrete)?;

    let monitors: Vec<StateLabel> = cfg
        .game
        .monitors
        .iter()
        .map(|s| {
            let label = StateLabel::parse(s).ok_or_else(|| {
                Error::Scenario(ScenarioError::Invalid(format!("unparseable monitor label `{s}`")))
            })?;
            if discrete.state_index(&label).is_none() {
                return Err(Error::Sim(crate::error::SimError::UnknownMonitor(s.clone())));
            }
            Ok(label)
        })
        .collect::<Result<_, Error>>()?;

    Ok(BuiltScenario {
        continuous,
        discrete,
        sensors,
        noise,
        inputs,
        alpha: cfg.game.alpha,
        r_a: cfg.game.attacker_budget,
        r_d: cfg.game.defender_budget,
        horizon: cfg.game.horizon,
        replicas: cfg.game.replicas,
        seed: cfg.game.seed,
        monitors,
    })
}

fn junction_spec(j: &JunctionConfig) -> JunctionSpec {
    JunctionSpec {
        id: j.id.clone(),
        infrastructure: j.infrastructure,
        setpoint: j.setpoint,
        efficiency: j.efficiency,
        inbound_count: j.inbound_count,
    }
}

fn check_unique_ids(cfg: &ScenarioConfig) -> Result<(), Error> {
    let mut seen = HashSet::new();
    for id in cfg
        .generators
        .iter()
        .map(|g| &g.id)
        .chain(cfg.junctions.iter().map(|j| &j.id))
    {
        if !seen.insert(id.clone()) {
            return Err(Error::Scenario(ScenarioError::DuplicateId(id.clone())));
        }
    }
    Ok(())
}

/// The demand schedule over the assembled input vector: junction setpoints
/// are constant, generator and junction demands follow their segment lists.
fn demand_schedule(cfg: &ScenarioConfig, model: &StateSpaceModel) -> Result<InputSchedule, Error> {
    let p = model.input_count();
    let mut base = DVector::zeros(p);
    let mut schedule_steps: Vec<(usize, usize, f64)> = Vec::new();

    let mut apply = |label: InputLabel, segments: &[DemandSegment], base: &mut DVector<f64>| {
        if let Some(idx) = model.input_index(&label) {
            for (si, seg) in segments.iter().enumerate() {
                if si == 0 && seg.from_step == 0 {
                    base[idx] = seg.value;
                } else {
                    schedule_steps.push((idx, seg.from_step, seg.value));
                }
            }
        }
    };

    for g in &cfg.generators {
        apply(InputLabel::PowerDemand { gen: g.id.clone() }, &g.demand, &mut base);
    }
    for j in &cfg.junctions {
        let (set_label, dem_label) = match j.infrastructure {
            Infrastructure::Gas => (
                InputLabel::GasSetpoint { junction: j.id.clone() },
                InputLabel::GasDemand { junction: j.id.clone() },
            ),
            Infrastructure::Water => (
                InputLabel::WaterSetpoint { junction: j.id.clone() },
                InputLabel::WaterDemand { junction: j.id.clone() },
            ),
            Infrastructure::Power => {
                return Err(Error::Scenario(ScenarioError::Invalid(format!(
                    "junction `{}` cannot belong to the power infrastructure",
                    j.id
                ))))
            }
        };
        if let Some(idx) = model.input_index(&set_label) {
            base[idx] = j.setpoint;
        }
        apply(dem_label, &j.demand, &mut base);
    }

    let mut schedule = InputSchedule::constant(base);
    for (idx, step, value) in schedule_steps {
        schedule = schedule.with_step(idx, step, value);
    }
    Ok(schedule)
}

fn materialize_coupling(
    cfg: &ScenarioConfig,
    power: &crate::model::PowerCi,
    gas: &crate::model::GasCi,
    water: &crate::model::WaterCi,
) -> Result<CouplingMap, Error> {
    use crate::labels::OutputLabel;

    let mut map = CouplingMap::zero(power, gas, water);

    let gen_input = |id: &str| {
        power
            .inputs
            .iter()
            .position(|l| matches!(l, InputLabel::PowerDemand { gen } if gen == id))
    };
    let find_output = |outputs: &[OutputLabel], id: &str| {
        outputs.iter().position(|l| match l {
            OutputLabel::CompressorPower { junction }
            | OutputLabel::PumpPower { junction } => junction == id,
            OutputLabel::GasFuelDemand { gen } | OutputLabel::WaterFuelDemand { gen } => gen == id,
        })
    };

    for (junction, gen) in &cfg.coupling.gas_to_power {
        let col = find_output(&gas.outputs, junction).ok_or_else(|| {
            ScenarioError::UnknownId("gas compressor output", junction.clone(), "gas_to_power".into())
        })?;
        let row = gen_input(gen).ok_or_else(|| {
            ScenarioError::UnknownId("generator", gen.clone(), "gas_to_power".into())
        })?;
        map.t_ge[(row, col)] = 1.0;
    }
    for (junction, gen) in &cfg.coupling.water_to_power {
        let col = find_output(&water.outputs, junction).ok_or_else(|| {
            ScenarioError::UnknownId("water pump output", junction.clone(), "water_to_power".into())
        })?;
        let row = gen_input(gen).ok_or_else(|| {
            ScenarioError::UnknownId("generator", gen.clone(), "water_to_power".into())
        })?;
        map.t_we[(row, col)] = 1.0;
    }
    for (gen, junction) in &cfg.coupling.power_to_gas {
        let col = find_output(&power.gas_outputs, gen).ok_or_else(|| {
            Error::Scenario(ScenarioError::WrongFuel(gen.clone(), "gas"))
        })?;
        let row = gas
            .inputs
            .iter()
            .position(|l| matches!(l, InputLabel::GasDemand { junction: j } if j == junction))
            .ok_or_else(|| {
                ScenarioError::UnknownId("gas junction", junction.clone(), "power_to_gas".into())
            })?;
        map.t_eg[(row, col)] = 1.0;
    }
    for (gen, junction) in &cfg.coupling.power_to_water {
        let col = find_output(&power.water_outputs, gen).ok_or_else(|| {
            Error::Scenario(ScenarioError::WrongFuel(gen.clone(), "water"))
        })?;
        let row = water
            .inputs
            .iter()
            .position(|l| matches!(l, InputLabel::WaterDemand { junction: j } if j == junction))
            .ok_or_else(|| {
                ScenarioError::UnknownId("water junction", junction.clone(), "power_to_water".into())
            })?;
        map.t_ew[(row, col)] = 1.0;
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal well-formed scenario used across the crate's tests.
    pub(crate) fn toy_scenario_json() -> String {
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/toy.json"))
            .expect("scenarios/toy.json")
    }

    #[test]
    fn builds_the_toy_scenario() {
        let cfg = ScenarioConfig::from_json(&toy_scenario_json()).unwrap();
        let built = build_scenario(&cfg).unwrap();
        // 5 power states + 4 gas + 1 water
        assert_eq!(built.discrete.state_count(), 10);
        assert_eq!(built.sensors.sensor_count(), 10);
        assert_eq!(built.sensors.clusters.cluster_count(), 4);
        assert!(built.discrete.spectral_radius().unwrap() < 1.0);
        // junction setpoints land in the base input
        let set = built
            .discrete
            .input_index(&InputLabel::GasSetpoint { junction: "j1".into() })
            .unwrap();
        assert_eq!(built.inputs.at(0)[set], 1.0);
    }

    #[test]
    fn rejects_duplicate_ids_and_unknown_references() {
        let mut cfg = ScenarioConfig::from_json(&toy_scenario_json()).unwrap();
        cfg.junctions[1].id = "j1".into();
        assert!(build_scenario(&cfg).is_err());

        let mut cfg = ScenarioConfig::from_json(&toy_scenario_json()).unwrap();
        cfg.coupling.power_to_gas.push(("g2".into(), "j2".into()));
        // g2 is water-fed; it has no gas fuel output
        assert!(matches!(
            build_scenario(&cfg),
            Err(Error::Scenario(ScenarioError::WrongFuel(..)))
        ));
    }

    #[test]
    fn demand_steps_change_the_schedule() {
        let mut cfg = ScenarioConfig::from_json(&toy_scenario_json()).unwrap();
        cfg.generators[0]
            .demand
            .push(DemandSegment { from_step: 30, value: 0.9 });
        let built = build_scenario(&cfg).unwrap();
        let idx = built
            .discrete
            .input_index(&InputLabel::PowerDemand { gen: "g1".into() })
            .unwrap();
        assert_eq!(built.inputs.at(29)[idx], 0.2);
        assert_eq!(built.inputs.at(30)[idx], 0.9);
    }
}
