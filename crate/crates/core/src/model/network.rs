//! Shared junction-graph machinery for the gas and water builders.
//!
//! Both distribution networks are DAGs of pipelines between junctions. Flow
//! conservation at a junction splits the served flow (local demand plus the
//! inlet flows of departing pipelines) across the inbound pipelines in
//! proportion to their sector areas.

use std::collections::HashMap;

use crate::error::ModelError;
use crate::model::JunctionSpec;

/// Resolved junction network: index maps, adjacency, split shares, and a
/// reverse topological order for back-to-front elimination.
pub struct JunctionNetwork {
    pub junction_index: HashMap<String, usize>,
    /// Pipelines entering each junction (pipeline indices).
    pub inbound: Vec<Vec<usize>>,
    /// Pipelines leaving each junction (pipeline indices).
    pub outbound: Vec<Vec<usize>>,
    /// Per pipeline: share of the downstream junction's served flow carried
    /// by this pipeline (gamma_ij / sum of inbound gammas at j).
    pub share: Vec<f64>,
    /// Pipeline order such that every pipeline appears after all pipelines
    /// leaving its downstream junction ("start from the last pipelines").
    pub elimination_order: Vec<usize>,
}

/// One pipeline edge viewed abstractly: endpoints and sector area.
pub struct Edge<'a> {
    pub from: &'a str,
    pub to: &'a str,
    pub gamma: f64,
}

pub fn resolve(junctions: &[JunctionSpec], edges: &[Edge<'_>]) -> Result<JunctionNetwork, ModelError> {
    let junction_ids: Vec<String> = junctions.iter().map(|j| j.id.clone()).collect();
    let junction_index: HashMap<String, usize> = junction_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();

    let nj = junctions.len();
    let mut inbound: Vec<Vec<usize>> = vec![Vec::new(); nj];
    let mut outbound: Vec<Vec<usize>> = vec![Vec::new(); nj];
    for (p, e) in edges.iter().enumerate() {
        let from = *junction_index
            .get(e.from)
            .ok_or_else(|| ModelError::DanglingPipelineEndpoint(e.from.to_string()))?;
        let to = *junction_index
            .get(e.to)
            .ok_or_else(|| ModelError::DanglingPipelineEndpoint(e.to.to_string()))?;
        if from == to {
            return Err(ModelError::BadPipeline(
                e.from.to_string(),
                e.to.to_string(),
                "endpoints must differ".to_string(),
            ));
        }
        outbound[from].push(p);
        inbound[to].push(p);
    }

    // Kahn's algorithm on junctions; leftover in-degree means a cycle.
    let mut indeg: Vec<usize> = inbound.iter().map(Vec::len).collect();
    let mut queue: Vec<usize> = (0..nj).filter(|&j| indeg[j] == 0).collect();
    let mut topo = Vec::with_capacity(nj);
    while let Some(j) = queue.pop() {
        topo.push(j);
        for &p in &outbound[j] {
            let to = junction_index[edges[p].to];
            indeg[to] -= 1;
            if indeg[to] == 0 {
                queue.push(to);
            }
        }
    }
    if topo.len() != nj {
        let stuck = (0..nj).find(|&j| indeg[j] > 0).unwrap();
        return Err(ModelError::PipelineCycle(junction_ids[stuck].clone()));
    }

    // Sector-area split shares among the pipelines entering each junction.
    let mut share = vec![0.0; edges.len()];
    for j in 0..nj {
        if inbound[j].is_empty() {
            continue;
        }
        let total: f64 = inbound[j].iter().map(|&p| edges[p].gamma).sum();
        if !(total > 0.0) {
            return Err(ModelError::ZeroSectorAreaSum(junction_ids[j].clone()));
        }
        for &p in &inbound[j] {
            share[p] = edges[p].gamma / total;
        }
    }

    // Eliminate pipelines from the network's leaves backwards: process
    // junctions in reverse topological order and emit their inbound
    // pipelines; a pipeline's downstream outputs are then already resolved.
    let mut elimination_order = Vec::with_capacity(edges.len());
    for &j in topo.iter().rev() {
        for &p in &inbound[j] {
            elimination_order.push(p);
        }
    }

    for junction in junctions {
        junction.validate()?;
        let idx = junction_index[&junction.id];
        if junction.inbound_count != inbound[idx].len() {
            return Err(ModelError::BadJunction(
                junction.id.clone(),
                format!(
                    "declared inbound count {} but topology has {}",
                    junction.inbound_count,
                    inbound[idx].len()
                ),
            ));
        }
    }

    Ok(JunctionNetwork {
        junction_index,
        inbound,
        outbound,
        share,
        elimination_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Infrastructure;

    fn junction(id: &str, inbound: usize) -> JunctionSpec {
        JunctionSpec {
            id: id.to_string(),
            infrastructure: Infrastructure::Gas,
            setpoint: 1.0,
            efficiency: 0.1,
            inbound_count: inbound,
        }
    }

    #[test]
    fn detects_cycles() {
        let junctions = vec![junction("a", 1), junction("b", 1)];
        let edges = vec![
            Edge { from: "a", to: "b", gamma: 1.0 },
            Edge { from: "b", to: "a", gamma: 1.0 },
        ];
        assert!(matches!(
            resolve(&junctions, &edges),
            Err(ModelError::PipelineCycle(_))
        ));
    }

    #[test]
    fn shares_sum_to_one_per_junction() {
        let junctions = vec![junction("a", 0), junction("b", 0), junction("c", 2)];
        let edges = vec![
            Edge { from: "a", to: "c", gamma: 1.0 },
            Edge { from: "b", to: "c", gamma: 3.0 },
        ];
        let net = resolve(&junctions, &edges).unwrap();
        assert!((net.share[0] - 0.25).abs() < 1e-15);
        assert!((net.share[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn elimination_order_puts_downstream_first() {
        // a -> b -> c: pipeline (b,c) must be eliminated before (a,b).
        let junctions = vec![junction("a", 0), junction("b", 1), junction("c", 1)];
        let edges = vec![
            Edge { from: "a", to: "b", gamma: 1.0 },
            Edge { from: "b", to: "c", gamma: 1.0 },
        ];
        let net = resolve(&junctions, &edges).unwrap();
        let pos0 = net.elimination_order.iter().position(|&p| p == 0).unwrap();
        let pos1 = net.elimination_order.iter().position(|&p| p == 1).unwrap();
        assert!(pos1 < pos0);
    }
}
