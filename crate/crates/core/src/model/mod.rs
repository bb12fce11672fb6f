//! Construction of the interdependent infrastructure state-space model.
//!
//! The three infrastructures are built separately ([`build_power_ci`],
//! [`build_gas_ci`], [`build_water_ci`]) and joined by [`assemble_ici`],
//! which substitutes the coupling outputs into the inputs and produces the
//! block matrices
//!
//! ```text
//!     [ A^e + B^e (T^ge D^g T^eg C^eg + T^we D^w T^ew C^ew)   B^e T^ge C^ge   B^e T^we C^we ]
//! A = [ B^g T^eg C^eg                                         A^g             0             ]
//!     [ B^w T^ew C^ew                                         0               A^w           ]
//!
//!     [ B^e   B^e T^ge D^g   B^e T^we D^w ]
//! B = [ 0     B^g            0            ]
//!     [ 0     0              B^w          ]
//! ```
//!
//! The continuous model is then discretized by the bilinear transform and
//! instrumented with a sensor matrix partitioned into sensor clusters.

mod assemble;
mod discretize;
mod gas;
mod network;
mod power;
mod sensors;
mod water;

pub use assemble::{assemble_ici, CouplingMap};
pub use discretize::discretize;
pub use gas::{build_gas_ci, GasCi, GasPipelineSpec};
pub use power::{build_power_ci, FuelSource, GeneratorSpec, PowerCi, TransmissionLineSpec};
pub use sensors::{build_sensor_matrix, ClusterIndex, SensorNetwork, SensorSpec};
pub use water::{build_water_ci, WaterCi, WaterPipelineSpec};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::labels::{Infrastructure, InputLabel, StateLabel};

/// Continuous- or discrete-time basis of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeBasis {
    Continuous,
    /// Zero-order-hold step length in seconds.
    Discrete { dt: f64 },
}

/// The assembled interdependent infrastructure model.
///
/// `state_labels` and `input_labels` name the rows of `a` and the columns of
/// `b`; all downstream stages (sensors, demand schedules, monitors) resolve
/// channels through them.
#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub time: TimeBasis,
    pub state_labels: Vec<StateLabel>,
    pub input_labels: Vec<InputLabel>,
}

impl StateSpaceModel {
    pub fn state_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_count(&self) -> usize {
        self.b.ncols()
    }

    pub fn state_index(&self, label: &StateLabel) -> Option<usize> {
        self.state_labels.iter().position(|l| l == label)
    }

    pub fn input_index(&self, label: &InputLabel) -> Option<usize> {
        self.input_labels.iter().position(|l| l == label)
    }

    /// Largest eigenvalue magnitude of A.
    pub fn spectral_radius(&self) -> Result<f64, ModelError> {
        crate::linalg::spectral_radius(&self.a)
    }

    /// Check asymptotic stability in the model's own time basis.
    pub fn validate_stability(&self) -> Result<(), ModelError> {
        match self.time {
            TimeBasis::Continuous => {
                let unstable: Vec<String> = crate::linalg::eigenvalues(&self.a)?
                    .iter()
                    .filter(|l| l.re >= 0.0)
                    .map(|l| format!("{:.6}{:+.6}i", l.re, l.im))
                    .collect();
                if unstable.is_empty() {
                    Ok(())
                } else {
                    Err(ModelError::NotHurwitz(unstable.join(", ")))
                }
            }
            TimeBasis::Discrete { .. } => {
                let rho = self.spectral_radius()?;
                if rho < 1.0 {
                    Ok(())
                } else {
                    Err(ModelError::NotSchur(rho))
                }
            }
        }
    }
}

/// Junction of a gas or water distribution network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JunctionSpec {
    pub id: String,
    pub infrastructure: Infrastructure,
    /// Setpoint pressure g^def or w^def held by the junction's compressor/pump.
    pub setpoint: f64,
    /// Compressor (gas) or pump (water) power-per-pressure efficiency.
    pub efficiency: f64,
    /// Declared inbound pipeline count; validated against the topology.
    pub inbound_count: usize,
}

impl JunctionSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.setpoint > 0.0) {
            return Err(ModelError::BadJunction(
                self.id.clone(),
                format!("setpoint must be positive, got {}", self.setpoint),
            ));
        }
        if !(self.efficiency >= 0.0) {
            return Err(ModelError::BadJunction(
                self.id.clone(),
                format!("efficiency must be nonnegative, got {}", self.efficiency),
            ));
        }
        Ok(())
    }
}
