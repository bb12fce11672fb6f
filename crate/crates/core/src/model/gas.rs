//! Natural gas infrastructure: four-state pipeline transients on a junction
//! DAG.
//!
//! Pipeline (i,j) has states [x1..x4] with poles -1/rho1, -1/rhohat1 (twice),
//! -1/tau3 and the internal coupling x1' <- x2. Its inputs are the upstream
//! setpoint pressure g_i^def (compressors hold junction pressure at the
//! setpoint) and its outlet flow rate, which junction flow balance ties to
//! the downstream junction's demand plus the inlet flows of the pipelines
//! leaving it, split by sector area. Outlet pressure and inlet flow are
//!
//! ```text
//! g_out  = x1 + (1 - tauhat1/rhohat1) x3 - (tauhat1 tau2 / rhohat1) theta_out
//! th_in  = -(tauhat2/rhohat1) x2 + x4 - (tauhat2/rhohat1) g_in
//! ```
//!
//! and each junction with inbound pipelines carries a compressor whose power
//! demand eta^c (g^def - mean inbound g_out) is exposed through C^ge / D^ge.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::labels::{InputLabel, OutputLabel, StateLabel};
use crate::model::network::{self, Edge};
use crate::model::JunctionSpec;

/// Linearized gas pipeline coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GasPipelineSpec {
    pub from: String,
    pub to: String,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub tau_hat1: f64,
    pub tau_hat2: f64,
    pub rho1: f64,
    pub rho_hat1: f64,
    /// Sector area gamma, drives the junction flow split.
    pub sector_area: f64,
}

impl GasPipelineSpec {
    fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| {
            Err(ModelError::BadPipeline(self.from.clone(), self.to.clone(), msg))
        };
        if !(self.rho1 > 0.0 && self.rho_hat1 > 0.0 && self.tau3 > 0.0) {
            return bad(format!(
                "rho1, rho_hat1, tau3 must be positive for stable poles, got {}, {}, {}",
                self.rho1, self.rho_hat1, self.tau3
            ));
        }
        if !(self.sector_area > 0.0) {
            return bad(format!("sector area must be positive, got {}", self.sector_area));
        }
        Ok(())
    }
}

/// Partial model of the gas infrastructure.
#[derive(Debug, Clone)]
pub struct GasCi {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Compressor power demand: state part.
    pub c_ge: DMatrix<f64>,
    /// Compressor power demand: input feedthrough.
    pub d_ge: DMatrix<f64>,
    pub states: Vec<StateLabel>,
    pub inputs: Vec<InputLabel>,
    pub outputs: Vec<OutputLabel>,
}

/// Affine functional over (states, inputs).
struct Affine {
    state: DVector<f64>,
    input: DVector<f64>,
}

/// Build the gas partial model.
///
/// Inputs are ordered [setpoints per junction..., demands per junction...].
pub fn build_gas_ci(
    pipelines: &[GasPipelineSpec],
    junctions: &[JunctionSpec],
) -> Result<GasCi, ModelError> {
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
    let n = 4 * np;
    let p_in = 2 * nj;

    let mut states = Vec::with_capacity(n);
    for p in pipelines {
        for comp in 1..=4u8 {
            states.push(StateLabel::GasPipeline { from: p.from.clone(), to: p.to.clone(), comp });
        }
    }
    let mut inputs = Vec::with_capacity(p_in);
    for j in junctions {
        inputs.push(InputLabel::GasSetpoint { junction: j.id.clone() });
    }
    for j in junctions {
        inputs.push(InputLabel::GasDemand { junction: j.id.clone() });
    }
    let set_col = |j: usize| j;
    let dem_col = |j: usize| nj + j;

    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, p_in);

    // Inlet flow of each pipeline as an affine functional of its own states
    // and its upstream setpoint: th_in = -(t2h/r1h) x2 + x4 - (t2h/r1h) g_in.
    let inlet_flow: Vec<Affine> = pipelines
        .iter()
        .enumerate()
        .map(|(p, spec)| {
            let upstream = net.junction_index[&spec.from];
            let ratio = spec.tau_hat2 / spec.rho_hat1;
            let mut state = DVector::zeros(n);
            let mut input = DVector::zeros(p_in);
            state[4 * p + 1] = -ratio;
            state[4 * p + 3] = 1.0;
            input[set_col(upstream)] = -ratio;
            Affine { state, input }
        })
        .collect();

    // Outlet flow of pipeline (i,j): its sector share of junction j's demand
    // plus the inlet flows of the pipelines leaving j.
    let outlet_flow: Vec<Affine> = pipelines
        .iter()
        .enumerate()
        .map(|(p, spec)| {
            let downstream = net.junction_index[&spec.to];
            let mut state = DVector::zeros(n);
            let mut input = DVector::zeros(p_in);
            input[dem_col(downstream)] = 1.0;
            for &q in &net.outbound[downstream] {
                state += &inlet_flow[q].state;
                input += &inlet_flow[q].input;
            }
            Affine { state: state * net.share[p], input: input * net.share[p] }
        })
        .collect();

    for (p, spec) in pipelines.iter().enumerate() {
        let (x1, x2, x3, x4) = (4 * p, 4 * p + 1, 4 * p + 2, 4 * p + 3);
        a[(x1, x1)] = -1.0 / spec.rho1;
        a[(x1, x2)] = 1.0;
        a[(x2, x2)] = -1.0 / spec.rho_hat1;
        a[(x3, x3)] = -1.0 / spec.rho_hat1;
        a[(x4, x4)] = -1.0 / spec.tau3;

        let upstream = net.junction_index[&spec.from];
        b[(x1, set_col(upstream))] += spec.tau1 / spec.rho1;
        b[(x2, set_col(upstream))] += 1.0 / spec.rho_hat1;

        let out = &outlet_flow[p];
        let k3 = -spec.tau2 / spec.rho_hat1;
        let k4 = 1.0 / spec.tau3;
        for s in 0..n {
            a[(x3, s)] += k3 * out.state[s];
            a[(x4, s)] += k4 * out.state[s];
        }
        for u in 0..p_in {
            b[(x3, u)] += k3 * out.input[u];
            b[(x4, u)] += k4 * out.input[u];
        }
    }

    // Compressor power demand at junctions with inbound pipelines.
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
        let mut state = DVector::zeros(n);
        let mut input = DVector::zeros(p_in);
        input[set_col(j)] += eta;
        for &p in inbound {
            let spec = &pipelines[p];
            let (x1, x3) = (4 * p, 4 * p + 2);
            // g_out of the inbound pipeline
            let mut g_state = DVector::zeros(n);
            let mut g_input = DVector::zeros(p_in);
            g_state[x1] = 1.0;
            g_state[x3] = 1.0 - spec.tau_hat1 / spec.rho_hat1;
            let k = -spec.tau_hat1 * spec.tau2 / spec.rho_hat1;
            g_state += &outlet_flow[p].state * k;
            g_input += &outlet_flow[p].input * k;
            state -= g_state * (eta * mean);
            input -= g_input * (eta * mean);
        }
        c_rows.push(state);
        d_rows.push(input);
        outputs.push(OutputLabel::CompressorPower { junction: junction.id.clone() });
    }

    let c_ge = DMatrix::from_fn(c_rows.len(), n, |r, c| c_rows[r][c]);
    let d_ge = DMatrix::from_fn(d_rows.len(), p_in, |r, c| d_rows[r][c]);

    Ok(GasCi { a, b, c_ge, d_ge, states, inputs, outputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Infrastructure;
    use approx::assert_abs_diff_eq;

    fn junction(id: &str, inbound: usize) -> JunctionSpec {
        JunctionSpec {
            id: id.to_string(),
            infrastructure: Infrastructure::Gas,
            setpoint: 1.0,
            efficiency: 1.0,
            inbound_count: inbound,
        }
    }

    fn unit_pipe(from: &str, to: &str) -> GasPipelineSpec {
        GasPipelineSpec {
            from: from.to_string(),
            to: to.to_string(),
            tau1: 1.0,
            tau2: 1.0,
            tau3: 1.0,
            tau_hat1: 1.0,
            tau_hat2: 1.0,
            rho1: 1.0,
            rho_hat1: 1.0,
            sector_area: 1.0,
        }
    }

    #[test]
    fn single_pipeline_with_unit_coefficients() {
        let gas = build_gas_ci(&[unit_pipe("a", "b")], &[junction("a", 0), junction("b", 1)])
            .unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0, 1.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, -1.0,
            ],
        );
        assert_eq!(gas.a, expected);
        // inputs: [set_a, set_b, dem_a, dem_b]
        assert_abs_diff_eq!(gas.b[(0, 0)], 1.0); // tau1/rho1 g_in
        assert_abs_diff_eq!(gas.b[(1, 0)], 1.0);
        assert_abs_diff_eq!(gas.b[(2, 3)], -1.0); // -tau2/rhohat1 * demand share
        assert_abs_diff_eq!(gas.b[(3, 3)], 1.0);
    }

    #[test]
    fn eleven_pipelines_give_44_states() {
        let mut pipes = Vec::new();
        let mut junctions = vec![junction("j1", 0)];
        for i in 2..=12 {
            pipes.push(unit_pipe(&format!("j{}", i - 1), &format!("j{i}")));
            junctions.push(junction(&format!("j{i}"), 1));
        }
        let gas = build_gas_ci(&pipes, &junctions).unwrap();
        assert_eq!(gas.a.nrows(), 44);
        assert_eq!(gas.states.len(), 44);
    }

    #[test]
    fn chained_pipelines_match_hand_elimination() {
        // a -> b -> c with unit coefficients; the downstream inlet flow
        // (-x2 + x4 - g_b^def) enters the upstream outlet-flow rows.
        let gas = build_gas_ci(
            &[unit_pipe("a", "b"), unit_pipe("b", "c")],
            &[junction("a", 0), junction("b", 1), junction("c", 1)],
        )
        .unwrap();
        #[rustfmt::skip]
        let expected_a = DMatrix::from_row_slice(8, 8, &[
            -1.0,  1.0,  0.0,  0.0,   0.0,  0.0,  0.0,  0.0,
             0.0, -1.0,  0.0,  0.0,   0.0,  0.0,  0.0,  0.0,
             0.0,  0.0, -1.0,  0.0,   0.0,  1.0,  0.0, -1.0,
             0.0,  0.0,  0.0, -1.0,   0.0, -1.0,  0.0,  1.0,
             0.0,  0.0,  0.0,  0.0,  -1.0,  1.0,  0.0,  0.0,
             0.0,  0.0,  0.0,  0.0,   0.0, -1.0,  0.0,  0.0,
             0.0,  0.0,  0.0,  0.0,   0.0,  0.0, -1.0,  0.0,
             0.0,  0.0,  0.0,  0.0,   0.0,  0.0,  0.0, -1.0,
        ]);
        assert_abs_diff_eq!(gas.a, expected_a, epsilon = 1e-14);
        // inputs: [set_a, set_b, set_c, dem_a, dem_b, dem_c]
        #[rustfmt::skip]
        let expected_b = DMatrix::from_row_slice(8, 6, &[
            1.0,  0.0, 0.0,  0.0,  0.0,  0.0,
            1.0,  0.0, 0.0,  0.0,  0.0,  0.0,
            0.0,  1.0, 0.0,  0.0, -1.0,  0.0,
            0.0, -1.0, 0.0,  0.0,  1.0,  0.0,
            0.0,  1.0, 0.0,  0.0,  0.0,  0.0,
            0.0,  1.0, 0.0,  0.0,  0.0,  0.0,
            0.0,  0.0, 0.0,  0.0,  0.0, -1.0,
            0.0,  0.0, 0.0,  0.0,  0.0,  1.0,
        ]);
        assert_abs_diff_eq!(gas.b, expected_b, epsilon = 1e-14);
    }

    #[test]
    fn rejects_cycles_and_bad_coefficients() {
        let err = build_gas_ci(
            &[unit_pipe("a", "b"), unit_pipe("b", "a")],
            &[junction("a", 1), junction("b", 1)],
        );
        assert!(matches!(err, Err(ModelError::PipelineCycle(_))));

        let mut bad = unit_pipe("a", "b");
        bad.rho1 = 0.0;
        assert!(build_gas_ci(&[bad], &[junction("a", 0), junction("b", 1)]).is_err());
    }
}
