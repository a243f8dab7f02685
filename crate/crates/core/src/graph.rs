//! Overlay proximity graph over the alive access points.

use crate::error::Result;
use crate::kernels::{sigma_norm, CutoffParams, SigmaNormParams};
use crate::matrix::Matrix;
use crate::model::MapState;
use crate::scalar::Scalar;

/// Link model: strength `bump(|q_i - q_j|_sigma / |r|_sigma; {gamma, 1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkParams<T> {
    pub range: T,
    pub norm: SigmaNormParams<T>,
    pub cutoff: CutoffParams<T>,
}

impl<T: Scalar> LinkParams<T> {
    pub fn new(range: T, epsilon: T, gamma: T) -> Result<Self> {
        let cutoff = CutoffParams::unit(gamma.min(T::one() - T::epsilon()))?;
        Ok(Self {
            range,
            norm: SigmaNormParams::new(epsilon)?,
            cutoff,
        })
    }

    #[inline]
    pub fn strength(&self, distance: T) -> T {
        self.cutoff
            .eval(sigma_norm(distance, &self.norm) / sigma_norm(self.range, &self.norm))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProximityGraph<T> {
    /// Access point id of each graph node.
    pub ids: Vec<usize>,
    /// Graph node of each access point id; `None` for dead ones.
    pub index_of: Vec<Option<usize>>,
    pub adjacency: Matrix<T>,
    /// Nodes within communication range (inclusive), ascending.
    pub neighbors: Vec<Vec<usize>>,
    /// Number of nodes with strictly positive link strength.
    pub count_degree: Vec<usize>,
    pub weighted_degree: Vec<T>,
}

impl<T: Scalar> ProximityGraph<T> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Builds the graph over the alive access points; dead ones are left out entirely.
pub fn build_graph<T: Scalar>(maps: &[MapState<T>], params: &LinkParams<T>) -> ProximityGraph<T> {
    let ids: Vec<usize> = maps.iter().filter(|m| m.alive).map(|m| m.id).collect();
    let mut index_of = vec![None; maps.len()];
    let pos: Vec<_> = maps
        .iter()
        .filter(|m| m.alive)
        .map(|m| m.position)
        .collect();
    for (k, m) in maps.iter().filter(|m| m.alive).enumerate() {
        if m.id >= index_of.len() {
            index_of.resize(m.id + 1, None);
        }
        index_of[m.id] = Some(k);
    }
    let n = ids.len();
    let range_sigma = sigma_norm(params.range, &params.norm);
    let mut adjacency = Matrix::zeros(n);
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let dist = pos[i].distance(pos[j]);
            if dist <= params.range {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
            let a = params
                .cutoff
                .eval(sigma_norm(dist, &params.norm) / range_sigma);
            adjacency[(i, j)] = a;
            adjacency[(j, i)] = a;
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    let count_degree = (0..n)
        .map(|i| adjacency.row(i).iter().filter(|&&a| a > T::zero()).count())
        .collect();
    let weighted_degree = (0..n)
        .map(|i| adjacency.row(i).iter().copied().sum())
        .collect();
    ProximityGraph {
        ids,
        index_of,
        adjacency,
        neighbors,
        count_degree,
        weighted_degree,
    }
}

/// Weighted Laplacian `diag(weighted_degree) - adjacency`.
pub fn laplacian<T: Scalar>(graph: &ProximityGraph<T>) -> Matrix<T> {
    let n = graph.len();
    let mut l = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = if i == j {
                graph.weighted_degree[i]
            } else {
                -graph.adjacency[(i, j)]
            };
        }
    }
    l
}
