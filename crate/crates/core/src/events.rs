//! Ground-device random walk and scheduled access-point failures.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{FailureEvent, MapState, MsdState};
use crate::scalar::Scalar;
use crate::vector::Vec2;

/// Displaces every device by `scale * xi`, `xi` uniform on `[-1, 1]^2`.
pub fn step_mobility<T: Scalar, R: Rng + ?Sized>(
    msds: &mut [MsdState<T>],
    scale: T,
    rng: &mut R,
) -> Result<()> {
    if !(scale >= T::zero() && scale.is_finite()) {
        return Err(Error::Parameter(format!(
            "mobility scale must be non-negative, got {scale}"
        )));
    }
    if scale == T::zero() {
        return Ok(());
    }
    for m in msds {
        let xi = Vec2::new(
            T::lit(rng.random_range(-1.0..=1.0)),
            T::lit(rng.random_range(-1.0..=1.0)),
        );
        m.position += xi * scale;
    }
    Ok(())
}

/// Disables `floor(fraction * alive)` alive access points chosen uniformly
/// without replacement and returns their ids in ascending order.
pub fn apply_failure<T: Scalar, R: Rng + ?Sized>(
    maps: &mut [MapState<T>],
    event: &FailureEvent<T>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if !(event.fraction >= T::zero() && event.fraction < T::one()) {
        return Err(Error::Config(format!(
            "failure fraction must lie in [0, 1), got {}",
            event.fraction
        )));
    }
    let alive: Vec<usize> = maps
        .iter()
        .enumerate()
        .filter(|(_, m)| m.alive)
        .map(|(i, _)| i)
        .collect();
    let count = (event.fraction * T::from_count(alive.len()))
        .floor()
        .to_usize()
        .unwrap_or(0);
    let mut killed: Vec<usize> = rand::seq::index::sample(rng, alive.len(), count)
        .into_iter()
        .map(|k| alive[k])
        .collect();
    killed.sort_unstable();
    for &i in &killed {
        maps[i].alive = false;
        maps[i].load = 0;
    }
    Ok(killed.into_iter().map(|i| maps[i].id).collect())
}
