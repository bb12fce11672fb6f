//! Interconnection of the three partial models.

use nalgebra::DMatrix;

use crate::error::ModelError;
use crate::model::{GasCi, PowerCi, StateSpaceModel, TimeBasis, WaterCi};

/// 0/1 incidence matrices wiring CI outputs to CI inputs.
///
/// Orientation: `t_ge` maps gas outputs (compressor power demands) into
/// power demand inputs, `t_we` water outputs into power inputs, `t_eg` power
/// gas-fuel outputs into gas inputs, `t_ew` power water-fuel outputs into
/// water inputs. Each column has at most one unit entry: an output feeds at
/// most one input port.
#[derive(Debug, Clone)]
pub struct CouplingMap {
    pub t_ge: DMatrix<f64>,
    pub t_we: DMatrix<f64>,
    pub t_eg: DMatrix<f64>,
    pub t_ew: DMatrix<f64>,
}

impl CouplingMap {
    /// All-zero coupling with the right shapes for the given partial models.
    pub fn zero(power: &PowerCi, gas: &GasCi, water: &WaterCi) -> CouplingMap {
        CouplingMap {
            t_ge: DMatrix::zeros(power.b.ncols(), gas.c_ge.nrows()),
            t_we: DMatrix::zeros(power.b.ncols(), water.c_we.nrows()),
            t_eg: DMatrix::zeros(gas.b.ncols(), power.c_eg.nrows()),
            t_ew: DMatrix::zeros(water.b.ncols(), power.c_ew.nrows()),
        }
    }

    fn validate_one(
        name: &'static str,
        t: &DMatrix<f64>,
        rows: usize,
        cols: usize,
    ) -> Result<(), ModelError> {
        if t.nrows() != rows || t.ncols() != cols {
            return Err(ModelError::CouplingShape(name, t.nrows(), t.ncols(), rows, cols));
        }
        for v in t.iter() {
            if *v != 0.0 && *v != 1.0 {
                return Err(ModelError::CouplingEntry(name, *v));
            }
        }
        for c in 0..t.ncols() {
            let sum: f64 = t.column(c).iter().sum();
            if sum > 1.0 {
                return Err(ModelError::CouplingColumnSum(name, c, sum));
            }
        }
        Ok(())
    }

    pub fn validate(
        &self,
        power: &PowerCi,
        gas: &GasCi,
        water: &WaterCi,
    ) -> Result<(), ModelError> {
        Self::validate_one("T^ge", &self.t_ge, power.b.ncols(), gas.c_ge.nrows())?;
        Self::validate_one("T^we", &self.t_we, power.b.ncols(), water.c_we.nrows())?;
        Self::validate_one("T^eg", &self.t_eg, gas.b.ncols(), power.c_eg.nrows())?;
        Self::validate_one("T^ew", &self.t_ew, water.b.ncols(), power.c_ew.nrows())?;
        Ok(())
    }
}

/// Substitute the coupling outputs into the inputs and build the joint
/// continuous model. Rejects assemblies whose A is not Hurwitz.
pub fn assemble_ici(
    power: &PowerCi,
    gas: &GasCi,
    water: &WaterCi,
    coupling: &CouplingMap,
) -> Result<StateSpaceModel, ModelError> {
    coupling.validate(power, gas, water)?;

    let ne = power.a.nrows();
    let ng = gas.a.nrows();
    let nw = water.a.nrows();
    let n = ne + ng + nw;
    let pe = power.b.ncols();
    let pg = gas.b.ncols();
    let pw = water.b.ncols();
    let p = pe + pg + pw;

    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, p);

    // Power block with the feedthrough correction from gas and water power
    // demands reacting to the power CI's own fuel demands.
    let correction = &power.b
        * (&coupling.t_ge * &gas.d_ge * &coupling.t_eg * &power.c_eg
            + &coupling.t_we * &water.d_we * &coupling.t_ew * &power.c_ew);
    a.view_mut((0, 0), (ne, ne)).copy_from(&(&power.a + correction));
    a.view_mut((0, ne), (ne, ng))
        .copy_from(&(&power.b * &coupling.t_ge * &gas.c_ge));
    a.view_mut((0, ne + ng), (ne, nw))
        .copy_from(&(&power.b * &coupling.t_we * &water.c_we));
    a.view_mut((ne, 0), (ng, ne))
        .copy_from(&(&gas.b * &coupling.t_eg * &power.c_eg));
    a.view_mut((ne, ne), (ng, ng)).copy_from(&gas.a);
    a.view_mut((ne + ng, 0), (nw, ne))
        .copy_from(&(&water.b * &coupling.t_ew * &power.c_ew));
    a.view_mut((ne + ng, ne + ng), (nw, nw)).copy_from(&water.a);

    b.view_mut((0, 0), (ne, pe)).copy_from(&power.b);
    b.view_mut((0, pe), (ne, pg))
        .copy_from(&(&power.b * &coupling.t_ge * &gas.d_ge));
    b.view_mut((0, pe + pg), (ne, pw))
        .copy_from(&(&power.b * &coupling.t_we * &water.d_we));
    b.view_mut((ne, pe), (ng, pg)).copy_from(&gas.b);
    b.view_mut((ne + ng, pe + pg), (nw, pw)).copy_from(&water.b);

    let mut state_labels = power.states.clone();
    state_labels.extend(gas.states.iter().cloned());
    state_labels.extend(water.states.iter().cloned());
    let mut input_labels = power.inputs.clone();
    input_labels.extend(gas.inputs.iter().cloned());
    input_labels.extend(water.inputs.iter().cloned());

    let model = StateSpaceModel {
        a,
        b,
        time: TimeBasis::Continuous,
        state_labels,
        input_labels,
    };
    model.validate_stability()?;
    Ok(model)
}
