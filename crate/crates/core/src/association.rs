//! Device-to-access-point matching and capacity-limited coverage.

use serde::{Deserialize, Serialize};

use crate::model::{MapState, MsdState};
use crate::scalar::Scalar;
use crate::vector::Vec2;

/// Distances below this are clamped before the power-law utility (m).
pub const DISTANCE_FLOOR: f64 = 1e-6;

/// Parameters of the matching step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchParams<T> {
    pub range: T,
    pub capacity: usize,
    pub kappa: T,
    pub eta: T,
}

/// Outcome of one matching pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Access point each device is matched to, indexed by device.
    pub pairs: Vec<Option<usize>>,
    /// Matched device count per access point, indexed by access point id.
    /// May exceed capacity.
    pub loads: Vec<usize>,
    /// Whether each device is within its access point's served share.
    pub covered: Vec<bool>,
}

impl Assignment {
    pub fn matched_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_some()).count()
    }

    pub fn covered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }

    /// Writes the assignment back onto the entity states.
    pub fn apply<T: Scalar>(&self, msds: &mut [MsdState<T>], maps: &mut [MapState<T>]) {
        for (i, msd) in msds.iter_mut().enumerate() {
            msd.assigned_map = self.pairs[i];
            msd.covered = self.covered[i];
        }
        for (j, map) in maps.iter_mut().enumerate() {
            map.load = self.loads[j];
        }
    }
}

/// Link utility `kappa * dist^-eta`, strictly decreasing in distance.
#[inline]
pub fn utility<T: Scalar>(msd_pos: Vec2<T>, map_pos: Vec2<T>, kappa: T, eta: T) -> T {
    let dist = msd_pos.distance(map_pos).max(T::lit(DISTANCE_FLOOR));
    kappa * dist.powf(-eta)
}

/// Matches every device to the alive access point of highest utility among
/// those strictly within range; devices with none stay unmatched.
///
/// Each access point then covers its `capacity` matched devices of highest
/// utility. Utility ties go to the lower access point id, and capacity ties
/// to the lower device id.
pub fn match_devices<T: Scalar>(
    msds: &[MsdState<T>],
    maps: &[MapState<T>],
    params: &MatchParams<T>,
) -> Assignment {
    let range_sq = params.range * params.range;
    let mut pairs = vec![None; msds.len()];
    let mut best_utility = vec![T::zero(); msds.len()];
    let mut loads = vec![0usize; maps.len()];

    let floor_sq = T::lit(DISTANCE_FLOOR * DISTANCE_FLOOR);
    for (i, msd) in msds.iter().enumerate() {
        // utility falls strictly with the floored distance, so the nearest wins
        let mut best: Option<(usize, T)> = None;
        for (j, map) in maps.iter().enumerate() {
            let d_sq = msd.position.distance_squared(map.position);
            if !map.alive || d_sq >= range_sq {
                continue;
            }
            let d_sq = d_sq.max(floor_sq);
            if best.is_none_or(|(_, b)| d_sq < b) {
                best = Some((j, d_sq));
            }
        }
        if let Some((j, _)) = best {
            pairs[i] = Some(j);
            best_utility[i] = utility(msd.position, maps[j].position, params.kappa, params.eta);
            loads[j] += 1;
        }
    }

    let mut members: Vec<Vec<usize>> = loads.iter().map(|&n| Vec::with_capacity(n)).collect();
    for (i, p) in pairs.iter().enumerate() {
        if let Some(j) = *p {
            members[j].push(i);
        }
    }
    let mut covered = vec![false; msds.len()];
    for list in &mut members {
        if list.len() > params.capacity {
            // list is in ascending device order, so a stable sort keeps id order on ties
            list.sort_by(|&x, &y| {
                best_utility[y]
                    .partial_cmp(&best_utility[x])
                    .expect("finite utility")
            });
        }
        for &i in list.iter().take(params.capacity) {
            covered[i] = true;
        }
    }

    Assignment {
        pairs,
        loads,
        covered,
    }
}
