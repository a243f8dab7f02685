//! Sampled double-integrator update of the access points.

use serde::{Deserialize, Serialize};

use crate::controller::ControlInput;
use crate::error::{Error, Result};
use crate::model::MapState;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Zero-order hold on the input: exact at sample instants.
    #[default]
    ExactHold,
    ForwardDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discretization<T> {
    ts: T,
    scheme: Scheme,
}

impl<T: Scalar> Discretization<T> {
    pub fn new(ts: T, scheme: Scheme) -> Result<Self> {
        if !(ts > T::zero() && ts.is_finite()) {
            return Err(Error::Parameter(format!(
                "sampling interval must be positive, got {ts}"
            )));
        }
        Ok(Self { ts, scheme })
    }

    pub fn ts(&self) -> T {
        self.ts
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Per-axis transition `(A, B)` of the state `(q, p)`.
    pub fn matrices(&self) -> ([[T; 2]; 2], [T; 2]) {
        let ts = self.ts;
        let a = [[T::one(), ts], [T::zero(), T::one()]];
        let b = match self.scheme {
            Scheme::ExactHold => [ts * ts / T::lit(2.0), ts],
            Scheme::ForwardDifference => [T::zero(), ts],
        };
        (a, b)
    }
}

/// Advances every alive access point by one sample. Dead ones are untouched.
///
/// Nothing is written if any alive input is non-finite.
pub fn step_dynamics<T: Scalar>(
    maps: &mut [MapState<T>],
    u: &ControlInput<T>,
    disc: &Discretization<T>,
) -> Result<()> {
    if let Some(m) = maps.iter().find(|m| m.alive && !u.accel[m.id].is_finite()) {
        return Err(Error::Integration { map: m.id });
    }
    let ts = disc.ts;
    let half_ts_sq = ts * ts / T::lit(2.0);
    for m in maps.iter_mut().filter(|m| m.alive) {
        let a = u.accel[m.id];
        match disc.scheme {
            Scheme::ExactHold => m.position += m.velocity * ts + a * half_ts_sq,
            Scheme::ForwardDifference => m.position += m.velocity * ts,
        }
        m.velocity += a * ts;
        if !(m.position.is_finite() && m.velocity.is_finite()) {
            return Err(Error::Integration { map: m.id });
        }
    }
    Ok(())
}
