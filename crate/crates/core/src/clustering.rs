//! Lloyd's algorithm over device positions and nearest-center goal lookup.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::Vec2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClusterSet<T> {
    pub centers: Vec<Vec2<T>>,
    /// Cluster index of every input point.
    pub membership: Vec<usize>,
    /// Within-cluster sum of squares after each assignment pass.
    pub objective_trace: Vec<T>,
    pub iterations: usize,
}

impl<T: Scalar> ClusterSet<T> {
    pub fn from_centers(centers: Vec<Vec2<T>>) -> Self {
        Self {
            centers,
            membership: Vec::new(),
            objective_trace: Vec::new(),
            iterations: 0,
        }
    }

    pub fn objective(&self) -> Option<T> {
        self.objective_trace.last().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LloydSettings<T> {
    pub max_iters: usize,
    /// Stop once no center moves by more than this (m).
    pub tol: T,
}

impl<T: Scalar> Default for LloydSettings<T> {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: T::lit(1e-3),
        }
    }
}

/// Index of the nearest center, ties to the lowest index.
#[inline]
pub(crate) fn nearest_index<T: Scalar>(p: Vec2<T>, centers: &[Vec2<T>]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (k, c) in centers.iter().enumerate() {
        let d = p.distance_squared(*c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// Distance-weighted probabilistic seeding (k-means++).
///
/// Once every point coincides with a chosen center the remaining centers
/// are drawn uniformly.
pub fn seed_centers<T: Scalar, R: Rng + ?Sized>(
    points: &[Vec2<T>],
    k: usize,
    rng: &mut R,
) -> Vec<Vec2<T>> {
    let mut centers = Vec::with_capacity(k);
    if points.is_empty() {
        return centers;
    }
    centers.push(points[rng.random_range(0..points.len())]);
    let mut weight: Vec<f64> = points
        .iter()
        .map(|p| p.distance_squared(centers[0]).as_f64())
        .collect();
    while centers.len() < k {
        let total: f64 = weight.iter().sum();
        let idx = if total > 0.0 {
            let mut pick = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, w) in weight.iter().enumerate() {
                if pick < *w {
                    chosen = i;
                    break;
                }
                pick -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[idx];
        centers.push(c);
        for (w, p) in weight.iter_mut().zip(points) {
            *w = w.min(p.distance_squared(c).as_f64());
        }
    }
    centers
}

/// Lloyd iterations from `init` (or k-means++ seeding when absent) until no
/// center moves by more than `tol` or `max_iters` passes have run.
///
/// A cluster left empty is re-seeded at the point farthest from its own center.
pub fn lloyd<T: Scalar, R: Rng + ?Sized>(
    points: &[Vec2<T>],
    k: usize,
    init: Option<&[Vec2<T>]>,
    rng: &mut R,
    settings: &LloydSettings<T>,
) -> Result<ClusterSet<T>> {
    if k == 0 {
        return Err(Error::Parameter("cluster count must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::Input("cannot cluster an empty point set".into()));
    }
    let mut centers = match init {
        Some(c) if c.len() == k => c.to_vec(),
        Some(c) => {
            return Err(Error::Parameter(format!(
                "expected {k} initial centers, got {}",
                c.len()
            )));
        }
        None => seed_centers(points, k, rng),
    };

    let mut membership = vec![0usize; points.len()];
    let mut trace = Vec::new();
    let mut sums = vec![Vec2::zero(); k];
    let mut counts = vec![0usize; k];
    let mut iterations = 0;

    while iterations < settings.max_iters.max(1) {
        iterations += 1;
        let mut objective = T::zero();
        sums.iter_mut().for_each(|s| *s = Vec2::zero());
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest_index(*p, &centers);
            membership[i] = c;
            objective = objective + d;
            sums[c] += *p;
            counts[c] += 1;
        }
        trace.push(objective);

        let mut shift = T::zero();
        for c in 0..k {
            let next = if counts[c] > 0 {
                sums[c] / T::from_count(counts[c])
            } else {
                farthest_point(points, &membership, &centers)
            };
            shift = shift.max(next.distance(centers[c]));
            centers[c] = next;
        }
        if shift <= settings.tol {
            break;
        }
    }

    Ok(ClusterSet {
        centers,
        membership,
        objective_trace: trace,
        iterations,
    })
}

fn farthest_point<T: Scalar>(
    points: &[Vec2<T>],
    membership: &[usize],
    centers: &[Vec2<T>],
) -> Vec2<T> {
    let mut best = (points[0], T::neg_infinity());
    for (p, &m) in points.iter().zip(membership) {
        let d = p.distance_squared(centers[m]);
        if d > best.1 {
            best = (*p, d);
        }
    }
    best.0
}

/// Center closest to `pos`, ties to the lowest cluster index.
pub fn nearest_center<T: Scalar>(pos: Vec2<T>, clusters: &ClusterSet<T>) -> Result<Vec2<T>> {
    if clusters.centers.is_empty() {
        return Err(Error::EmptyClusters);
    }
    Ok(clusters.centers[nearest_index(pos, &clusters.centers).0])
}
