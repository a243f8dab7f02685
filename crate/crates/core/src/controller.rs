//! Per-access-point control input: separation/load gradient term, velocity
//! consensus and navigational feedback toward the nearest cluster center.

use crate::clustering::{nearest_center, ClusterSet};
use crate::error::Result;
use crate::graph::ProximityGraph;
use crate::kernels::{
    psi, sigma_gradient, sigma_norm, CutoffParams, InteractionParams, SigmaNormParams,
    SigmoidParams,
};
use crate::model::{MapState, ScenarioConfig};
use crate::scalar::Scalar;
use crate::vector::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlParams<T> {
    pub norm: SigmaNormParams<T>,
    pub interaction: InteractionParams<T>,
    /// `{0, 1}` cutoffs applied to the normalized overload.
    pub overload: CutoffParams<T>,
    pub capacity: usize,
    /// Sigma-norm of the capacity, the overload normalizer.
    pub capacity_sigma: T,
    /// Amplitude of the overload attraction; the same `a` as the sigmoid.
    pub load_gain: T,
    pub goal_gain: T,
    pub damping_gain: T,
    pub limit: Option<T>,
}

impl<T: Scalar> ControlParams<T> {
    pub fn from_config(cfg: &ScenarioConfig<T>) -> Result<Self> {
        let norm = SigmaNormParams::new(cfg.epsilon)?;
        let sigmoid = SigmoidParams::new(cfg.sigmoid_a, cfg.sigmoid_b)?;
        let interaction = InteractionParams::from_distances(
            cfg.range,
            cfg.separation,
            cfg.gamma,
            sigmoid,
            &norm,
        )?;
        Ok(Self {
            norm,
            interaction,
            overload: CutoffParams::new(T::zero(), T::one())?,
            capacity: cfg.capacity,
            capacity_sigma: sigma_norm(T::from_count(cfg.capacity), &norm),
            load_gain: cfg.sigmoid_a,
            goal_gain: cfg.goal_gain,
            damping_gain: cfg.damping_gain,
            limit: cfg.run.control_limit,
        })
    }

    /// `a (1 - bump(|(load - capacity)^+|_sigma / |capacity|_sigma; {0, 1}))`:
    /// zero at or under capacity, rising to `a` with the overload.
    pub fn overload_pull(&self, load: usize) -> T {
        let excess = T::from_count(load.saturating_sub(self.capacity));
        let ratio = (sigma_norm(excess, &self.norm) / self.capacity_sigma).min(T::one());
        self.load_gain * (T::one() - self.overload.eval(ratio))
    }
}

/// Accelerations indexed by access point id; zero for dead ones.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlInput<T> {
    pub accel: Vec<Vec2<T>>,
}

/// Gradient term of graph node `i`: separation force plus attraction toward
/// overloaded neighbors, each along `sigma_gradient(q_j - q_i)`.
///
/// `loads` is indexed by access point id.
pub fn gradient_term<T: Scalar>(
    i: usize,
    maps: &[MapState<T>],
    graph: &ProximityGraph<T>,
    loads: &[usize],
    params: &ControlParams<T>,
) -> Result<Vec2<T>> {
    let qi = maps[graph.ids[i]].position;
    let mut force = Vec2::zero();
    for &j in &graph.neighbors[i] {
        let id = graph.ids[j];
        let offset = maps[id].position - qi;
        let weight = psi(sigma_norm(offset, &params.norm), &params.interaction)?
            + params.overload_pull(loads[id]);
        force += sigma_gradient(offset, &params.norm) * weight;
    }
    Ok(force)
}

/// Velocity consensus `sum_j a_ij (p_j - p_i)` of graph node `i`.
pub fn consensus_term<T: Scalar>(
    i: usize,
    maps: &[MapState<T>],
    graph: &ProximityGraph<T>,
) -> Vec2<T> {
    let pi = maps[graph.ids[i]].velocity;
    graph.neighbors[i]
        .iter()
        .map(|&j| (maps[graph.ids[j]].velocity - pi) * graph.adjacency[(i, j)])
        .sum()
}

/// Navigational feedback `c1 (C* - q) + c2 (0 - p)` toward the nearest center.
pub fn goal_term<T: Scalar>(
    map: &MapState<T>,
    clusters: &ClusterSet<T>,
    params: &ControlParams<T>,
) -> Result<Vec2<T>> {
    let goal = nearest_center(map.position, clusters)?;
    Ok((goal - map.position) * params.goal_gain - map.velocity * params.damping_gain)
}

/// Sum of the three terms for every alive access point.
pub fn control_input<T: Scalar>(
    maps: &[MapState<T>],
    graph: &ProximityGraph<T>,
    loads: &[usize],
    clusters: &ClusterSet<T>,
    params: &ControlParams<T>,
) -> Result<ControlInput<T>> {
    let mut accel = vec![Vec2::zero(); maps.len()];
    for (i, &id) in graph.ids.iter().enumerate() {
        let mut u = gradient_term(i, maps, graph, loads, params)?
            + consensus_term(i, maps, graph)
            + goal_term(&maps[id], clusters, params)?;
        if let Some(limit) = params.limit {
            let norm = u.norm();
            if norm > limit {
                u = u * (limit / norm);
            }
        }
        accel[id] = u;
    }
    Ok(ControlInput { accel })
}
