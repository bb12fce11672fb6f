//! Power infrastructure: swing dynamics, turbine feedback, and line flows.
//!
//! Per generator i the states are [omega_i, P_m_i] with
//!
//! ```text
//! omega_i' = -(D_i/J_i) omega_i + (1/J_i)(P_m_i - P_e_i - sum_j P_ij)
//! P_m_i'   = -(1/(P^o_i T_t_i)) omega_i - (1/T_t_i) P_m_i
//! ```
//!
//! and per line (i,j) the linearized flow state `P_ij' = P^o_ij (omega_i -
//! omega_j)` with `P^o_ij = E_i E_j cos(d_i - d_j) / x_l`. Gas-fed generators
//! expose fuel demand `P_m_i / eta^g_i` through `C^eg`, water-fed ones through
//! `C^ew`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::labels::{InputLabel, OutputLabel, StateLabel};

/// What drives a generator's mechanical input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum FuelSource {
    Gas { efficiency: f64 },
    Water { efficiency: f64 },
    External,
}

/// Synchronous generator parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub id: String,
    /// Rotor inertia J_i.
    pub inertia: f64,
    /// Damping factor D_i.
    pub damping: f64,
    /// Turbine time constant T_t_i.
    pub turbine_time_constant: f64,
    /// Operating power P^o_i.
    pub operating_power: f64,
    /// Constant voltage magnitude E_i.
    pub voltage: f64,
    /// Operating power angle delta^o_i in radians.
    pub operating_angle: f64,
    pub fuel: FuelSource,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::BadGenerator(self.id.clone(), msg));
        if !(self.inertia > 0.0) {
            return bad(format!("inertia must be positive, got {}", self.inertia));
        }
        if !(self.turbine_time_constant > 0.0) {
            return bad(format!(
                "turbine time constant must be positive, got {}",
                self.turbine_time_constant
            ));
        }
        if !(self.damping >= 0.0) {
            return bad(format!("damping must be nonnegative, got {}", self.damping));
        }
        match self.fuel {
            FuelSource::Gas { efficiency } | FuelSource::Water { efficiency } => {
                if !(efficiency > 0.0) {
                    return bad(format!("fuel efficiency must be positive, got {efficiency}"));
                }
            }
            FuelSource::External => {}
        }
        Ok(())
    }
}

/// Transmission line between two generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmissionLineSpec {
    pub from: String,
    pub to: String,
    /// Equivalent reactance x_l.
    pub reactance: f64,
}

/// Partial model of the power infrastructure.
#[derive(Debug, Clone)]
pub struct PowerCi {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Gas fuel demand map (one row per gas-fed generator).
    pub c_eg: DMatrix<f64>,
    /// Water fuel demand map (one row per water-fed generator).
    pub c_ew: DMatrix<f64>,
    pub states: Vec<StateLabel>,
    pub inputs: Vec<InputLabel>,
    pub gas_outputs: Vec<OutputLabel>,
    pub water_outputs: Vec<OutputLabel>,
}

/// Build the power partial model from generators and lines.
///
/// State ordering is [omega_1, P_m_1, ..., omega_ne, P_m_ne, lines...], one
/// demand input per generator.
pub fn build_power_ci(
    generators: &[GeneratorSpec],
    lines: &[TransmissionLineSpec],
) -> Result<PowerCi, ModelError> {
    if generators.is_empty() {
        return Err(ModelError::NoGenerators);
    }
    for g in generators {
        g.validate()?;
    }
    let gen_index: HashMap<&str, usize> = generators
        .iter()
        .enumerate()
        .map(|(i, g)| (g.id.as_str(), i))
        .collect();

    let ne = generators.len();
    let nl = lines.len();
    let n = 2 * ne + nl;

    let mut states = Vec::with_capacity(n);
    for g in generators {
        states.push(StateLabel::GeneratorSpeed { gen: g.id.clone() });
        states.push(StateLabel::GeneratorMechPower { gen: g.id.clone() });
    }
    for l in lines {
        states.push(StateLabel::LineFlow { from: l.from.clone(), to: l.to.clone() });
    }
    let inputs: Vec<InputLabel> = generators
        .iter()
        .map(|g| InputLabel::PowerDemand { gen: g.id.clone() })
        .collect();

    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, ne);

    for (i, g) in generators.iter().enumerate() {
        let omega = 2 * i;
        let pmech = 2 * i + 1;
        a[(omega, omega)] = -g.damping / g.inertia;
        a[(omega, pmech)] = 1.0 / g.inertia;
        a[(pmech, omega)] = -1.0 / (g.operating_power * g.turbine_time_constant);
        a[(pmech, pmech)] = -1.0 / g.turbine_time_constant;
        b[(omega, i)] = -1.0 / g.inertia;
    }

    for (li, line) in lines.iter().enumerate() {
        let from = *gen_index
            .get(line.from.as_str())
            .ok_or_else(|| ModelError::DanglingLineEndpoint(line.from.clone()))?;
        let to = *gen_index
            .get(line.to.as_str())
            .ok_or_else(|| ModelError::DanglingLineEndpoint(line.to.clone()))?;
        if from == to {
            return Err(ModelError::BadLine(
                line.from.clone(),
                line.to.clone(),
                "endpoints must differ".to_string(),
            ));
        }
        if !(line.reactance > 0.0) {
            return Err(ModelError::BadLine(
                line.from.clone(),
                line.to.clone(),
                format!("reactance must be positive, got {}", line.reactance),
            ));
        }
        let gi = &generators[from];
        let gj = &generators[to];
        let p_line = gi.voltage * gj.voltage * (gi.operating_angle - gj.operating_angle).cos()
            / line.reactance;
        let row = 2 * ne + li;
        // P_ij' = P^o_ij (omega_i - omega_j)
        a[(row, 2 * from)] = p_line;
        a[(row, 2 * to)] = -p_line;
        // The flow leaves generator i's power balance and enters j's.
        a[(2 * from, row)] = -1.0 / gi.inertia;
        a[(2 * to, row)] = 1.0 / gj.inertia;
    }

    let mut c_eg_rows = Vec::new();
    let mut c_ew_rows = Vec::new();
    let mut gas_outputs = Vec::new();
    let mut water_outputs = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        match g.fuel {
            FuelSource::Gas { efficiency } => {
                let mut row = vec![0.0; n];
                row[2 * i + 1] = 1.0 / efficiency;
                c_eg_rows.push(row);
                gas_outputs.push(OutputLabel::GasFuelDemand { gen: g.id.clone() });
            }
            FuelSource::Water { efficiency } => {
                let mut row = vec![0.0; n];
                row[2 * i + 1] = 1.0 / efficiency;
                c_ew_rows.push(row);
                water_outputs.push(OutputLabel::WaterFuelDemand { gen: g.id.clone() });
            }
            FuelSource::External => {}
        }
    }
    let c_eg = DMatrix::from_fn(c_eg_rows.len(), n, |r, c| c_eg_rows[r][c]);
    let c_ew = DMatrix::from_fn(c_ew_rows.len(), n, |r, c| c_ew_rows[r][c]);

    Ok(PowerCi { a, b, c_eg, c_ew, states, inputs, gas_outputs, water_outputs })
}
