//! Sensor matrix and cluster index.

use nalgebra::DMatrix;

use crate::error::ModelError;
use crate::labels::{Infrastructure, StateLabel};
use crate::model::StateSpaceModel;

/// One sensor: a gain on a single state, reporting to one cluster.
#[derive(Debug, Clone)]
pub struct SensorSpec {
    pub state: StateLabel,
    pub cluster: usize,
    pub gain: f64,
}

/// Sensor-cluster partition: cluster id -> sensor row indices.
#[derive(Debug, Clone)]
pub struct ClusterIndex {
    sets: Vec<Vec<usize>>,
}

impl ClusterIndex {
    pub fn cluster_count(&self) -> usize {
        self.sets.len()
    }

    pub fn sensors_of(&self, cluster: usize) -> &[usize] {
        &self.sets[cluster]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.sets.iter().enumerate().map(|(i, s)| (i, s.as_slice()))
    }

    /// Sensor rows of a union of clusters, sorted.
    pub fn union(&self, clusters: &[usize]) -> Vec<usize> {
        let mut rows: Vec<usize> = clusters
            .iter()
            .flat_map(|&c| self.sets[c].iter().copied())
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }
}

/// The measurement side of a scenario: C matrix, resolved sensors, clusters.
#[derive(Debug, Clone)]
pub struct SensorNetwork {
    pub c: DMatrix<f64>,
    pub sensors: Vec<SensorSpec>,
    pub clusters: ClusterIndex,
    /// State index measured by each sensor row.
    pub sensor_states: Vec<usize>,
}

impl SensorNetwork {
    pub fn sensor_count(&self) -> usize {
        self.c.nrows()
    }

    /// The infrastructure a cluster's sensors belong to, or `None` if mixed.
    pub fn cluster_infrastructure(&self, model: &StateSpaceModel, cluster: usize) -> Option<Infrastructure> {
        let mut kind = None;
        for &s in self.clusters.sensors_of(cluster) {
            let infra = model.state_labels[self.sensor_states[s]].infrastructure();
            match kind {
                None => kind = Some(infra),
                Some(k) if k == infra => {}
                Some(_) => return None,
            }
        }
        kind
    }
}

/// Build the m x n sensor matrix (one nonzero per sensor row) and the
/// cluster index. Cluster ids must cover 0..max contiguously and every
/// cluster must be nonempty; each sensor belongs to exactly one cluster, so
/// the clusters partition the sensor set.
pub fn build_sensor_matrix(
    model: &StateSpaceModel,
    sensors: &[SensorSpec],
) -> Result<SensorNetwork, ModelError> {
    let n = model.state_count();
    let m = sensors.len();
    let mut c = DMatrix::zeros(m, n);
    let mut sensor_states = Vec::with_capacity(m);
    let mut max_cluster = 0usize;
    for (row, sensor) in sensors.iter().enumerate() {
        let idx = model
            .state_index(&sensor.state)
            .ok_or_else(|| ModelError::UnknownSensorState(row, sensor.state.to_string()))?;
        c[(row, idx)] = sensor.gain;
        sensor_states.push(idx);
        max_cluster = max_cluster.max(sensor.cluster);
    }
    let cluster_count = if m == 0 { 0 } else { max_cluster + 1 };
    let mut sets = vec![Vec::new(); cluster_count];
    for (row, sensor) in sensors.iter().enumerate() {
        sets[sensor.cluster].push(row);
    }
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(ModelError::EmptyCluster(i));
        }
    }
    Ok(SensorNetwork {
        c,
        sensors: sensors.to_vec(),
        clusters: ClusterIndex { sets },
        sensor_states,
    })
}
