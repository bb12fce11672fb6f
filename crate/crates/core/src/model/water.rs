//! Water infrastructure: one friction state per pipeline.
//!
//! Flow is constant along a pipeline, so the network flow pattern is purely
//! demand-driven: each pipeline carries its sector share of the downstream
//! junction's demand plus the flows of the pipelines leaving that junction,
//! resolved leaf-first through the DAG. The friction state obeys
//!
//! ```text
//! r' = -r + (1/nu) xi - (1/theta) w_in,    w_out = -theta r + w_in
//! ```
//!
//! with w_in pinned to the upstream setpoint by the junction pumps. Pump
//! power demand eta^p (w^def - mean inbound w_out) is exposed through
//! C^we / D^we.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::labels::{InputLabel, OutputLabel, StateLabel};
use crate::model::network::{self, Edge};
use crate::model::JunctionSpec;

/// Water pipeline parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaterPipelineSpec {
    pub from: String,
    pub to: String,
    /// Kinematic viscosity nu.
    pub viscosity: f64,
    /// Friction coefficient theta.
    pub friction: f64,
    /// Sector area gamma, drives the junction flow split.
    pub sector_area: f64,
}

impl WaterPipelineSpec {
    fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| {
            Err(ModelError::BadPipeline(self.from.clone(), self.to.clone(), msg))
        };
        if !(self.viscosity > 0.0) {
            return bad(format!("viscosity must be positive, got {}", self.viscosity));
        }
        if !(self.friction > 0.0) {
            return bad(format!("friction must be positive, got {}", self.friction));
        }
        if !(self.sector_area > 0.0) {
            return bad(format!("sector area must be positive, got {}", self.sector_area));
        }
        Ok(())
    }
}

/// Partial model of the water infrastructure.
#[derive(Debug, Clone)]
pub struct WaterCi {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Pump power demand: state part.
    pub c_we: DMatrix<f64>,
    /// Pump power demand: input feedthrough.
    pub d_we: DMatrix<f64>,
    pub states: Vec<StateLabel>,
    pub inputs: Vec<InputLabel>,
    pub outputs: Vec<OutputLabel>,
}

/// Build the water partial model. Inputs are ordered
/// [setpoints per junction..., demands per junction...].
pub fn build_water_ci(
    pipelines: &[WaterPipelineSpec],
    junctions: &[JunctionSpec],
) -> Result<WaterCi, ModelError> {
    for p in pipelines {
        p.validate()?;
    }
    let edges: Vec<Edge<'_>> = pipelines
        .iter()
        .map(|p| Edge { from: &p.from, to: &p.to, gamma: p.sector_area })
        .collect();
    let net = network::resolve(junctions, &edges)?;

    let np = pipelines.len();
    let nj = junctions.len();
    let p_in = 2 * nj;
    let set_col = |j: usize| j;
    let dem_col = |j: usize| nj + j;

    let states: Vec<StateLabel> = pipelines
        .iter()
        .map(|p| StateLabel::WaterFriction { from: p.from.clone(), to: p.to.clone() })
        .collect();
    let mut inputs = Vec::with_capacity(p_in);
    for j in junctions {
        inputs.push(InputLabel::WaterSetpoint { junction: j.id.clone() });
    }
    for j in junctions {
        inputs.push(InputLabel::WaterDemand { junction: j.id.clone() });
    }

    // Per-pipeline flow as a linear map of the demand inputs, resolved
    // downstream-first.
    let mut flow: Vec<DVector<f64>> = vec![DVector::zeros(p_in); np];
    for &p in &net.elimination_order {
        let downstream = net.junction_index[&pipelines[p].to];
        let mut f = DVector::zeros(p_in);
        f[dem_col(downstream)] = 1.0;
        for &q in &net.outbound[downstream] {
            f += &flow[q];
        }
        flow[p] = f * net.share[p];
    }

    let mut a = DMatrix::zeros(np, np);
    let mut b = DMatrix::zeros(np, p_in);
    for (p, spec) in pipelines.iter().enumerate() {
        a[(p, p)] = -1.0;
        let upstream = net.junction_index[&spec.from];
        b[(p, set_col(upstream))] -= 1.0 / spec.friction;
        for u in 0..p_in {
            b[(p, u)] += flow[p][u] / spec.viscosity;
        }
    }

    // Pump power demand at junctions with inbound pipelines.
    let mut c_rows: Vec<DVector<f64>> = Vec::new();
    let mut d_rows: Vec<DVector<f64>> = Vec::new();
    let mut outputs = Vec::new();
    for (j, junction) in junctions.iter().enumerate() {
        let inbound = &net.inbound[j];
        if inbound.is_empty() {
            continue;
        }
        let eta = junction.efficiency;
        let mean = 1.0 / inbound.len() as f64;
        let mut state = DVector::zeros(np);
        let mut input = DVector::zeros(p_in);
        input[set_col(j)] += eta;
        for &p in inbound {
            let spec = &pipelines[p];
            let upstream = net.junction_index[&spec.from];
            // w_out = -theta r + w_in
            state[p] += eta * mean * spec.friction;
            input[set_col(upstream)] -= eta * mean;
        }
        c_rows.push(state);
        d_rows.push(input);
        outputs.push(OutputLabel::PumpPower { junction: junction.id.clone() });
    }

    let c_we = DMatrix::from_fn(c_rows.len(), np, |r, c| c_rows[r][c]);
    let d_we = DMatrix::from_fn(d_rows.len(), p_in, |r, c| d_rows[r][c]);

    Ok(WaterCi { a, b, c_we, d_we, states, inputs, outputs })
}
