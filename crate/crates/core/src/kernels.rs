//! Smooth scalar kernels behind the overlay controller and the link model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::Vec2;

/// Plateau limits of the cosine bump: value 1 below `lower`, 0 from `upper` on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CutoffParams<T> {
    lower: T,
    upper: T,
}

impl<T: Scalar> CutoffParams<T> {
    pub fn new(lower: T, upper: T) -> Result<Self> {
        if !(lower >= T::zero() && lower < upper && upper.is_finite()) {
            return Err(Error::Parameter(format!(
                "cutoffs must satisfy 0 <= lower < upper, got lower={lower}, upper={upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Cutoffs `{lower, 1}` used for link strength over normalized distances.
    pub fn unit(lower: T) -> Result<Self> {
        Self::new(lower, T::one())
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    #[inline]
    pub(crate) fn eval(&self, z: T) -> T {
        if z < self.lower {
            T::one()
        } else if z < self.upper {
            let phase = T::PI() * (z - self.lower) / (self.upper - self.lower);
            T::lit(0.5) * (T::one() + phase.cos())
        } else {
            T::zero()
        }
    }
}

/// Cosine bump: 1 on `[0, lower)`, a half cosine down to 0 on `[lower, upper)`,
/// and 0 beyond. Continuous and non-increasing.
pub fn bump<T: Scalar>(z: T, params: &CutoffParams<T>) -> Result<T> {
    if !(z >= T::zero()) {
        return Err(Error::Parameter(format!(
            "bump argument must be non-negative, got {z}"
        )));
    }
    Ok(params.eval(z))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SigmaNormParams<T> {
    epsilon: T,
}

impl<T: Scalar> SigmaNormParams<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "sigma-norm epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }
}

/// Anything with a Euclidean length. Scalars count as one-dimensional vectors.
pub trait SquaredNorm<T> {
    fn squared_norm(&self) -> T;
}

impl<T: Scalar> SquaredNorm<T> for Vec2<T> {
    #[inline]
    fn squared_norm(&self) -> T {
        self.norm_squared()
    }
}

impl<T: Scalar> SquaredNorm<T> for T {
    #[inline]
    fn squared_norm(&self) -> T {
        *self * *self
    }
}

/// Smooth surrogate `(sqrt(1 + eps |x|^2) - 1) / eps` of the Euclidean norm,
/// differentiable at the origin.
#[inline]
pub fn sigma_norm<T: Scalar, X: SquaredNorm<T>>(x: X, params: &SigmaNormParams<T>) -> T {
    let eps = params.epsilon;
    ((T::one() + eps * x.squared_norm()).sqrt() - T::one()) / eps
}

/// Gradient of [`sigma_norm`] at `x`, i.e. `x / sqrt(1 + eps |x|^2)`.
///
/// Evaluated at `q_j - q_i` it points from agent `i` toward agent `j`. Its
/// length is strictly below `1 / sqrt(eps)`.
#[inline]
pub fn sigma_gradient<T: Scalar>(x: Vec2<T>, params: &SigmaNormParams<T>) -> Vec2<T> {
    x / (T::one() + params.epsilon * x.norm_squared()).sqrt()
}

/// Amplitudes of the uneven sigmoid. The shift `c = |a - b| / sqrt(4ab)` is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmoidParams<T> {
    a: T,
    b: T,
    c: T,
}

impl<T: Scalar> SigmoidParams<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter(format!(
                "sigmoid amplitudes must be positive, got a={a}, b={b}"
            )));
        }
        let c = (a - b).abs() / (T::lit(4.0) * a * b).sqrt();
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn c(&self) -> T {
        self.c
    }
}

/// `0.5 [ (a+b)(z+c)/sqrt(1+(z+c)^2) + (a-b) ]`.
///
/// Strictly increasing with range `(-b, a)`. With `a == b` it is odd.
#[inline]
pub fn uneven_sigmoid<T: Scalar>(z: T, params: &SigmoidParams<T>) -> T {
    let s = z + params.c;
    T::lit(0.5) * ((params.a + params.b) * s / (T::one() + s * s).sqrt() + (params.a - params.b))
}

/// Everything the pairwise interaction function needs, with the distances
/// already mapped through the sigma-norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractionParams<T> {
    range_sigma: T,
    separation_sigma: T,
    adjacency: CutoffParams<T>,
    sigmoid: SigmoidParams<T>,
}

impl<T: Scalar> InteractionParams<T> {
    pub fn new(
        range_sigma: T,
        separation_sigma: T,
        gamma: T,
        sigmoid: SigmoidParams<T>,
    ) -> Result<Self> {
        if !(range_sigma > T::zero() && range_sigma.is_finite()) {
            return Err(Error::Parameter(format!(
                "range must be positive, got {range_sigma}"
            )));
        }
        if !(separation_sigma >= T::zero() && separation_sigma.is_finite()) {
            return Err(Error::Parameter(format!(
                "separation must be non-negative, got {separation_sigma}"
            )));
        }
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::Parameter(format!(
                "gamma must lie in [0, 1], got {gamma}"
            )));
        }
        // gamma == 1 would collapse the bump to a step; keep the decay band non-empty.
        let adjacency = CutoffParams::unit(gamma.min(T::one() - T::epsilon()))?;
        Ok(Self {
            range_sigma,
            separation_sigma,
            adjacency,
            sigmoid,
        })
    }

    /// Builds the parameters from plain range `r` and separation `d` in meters.
    pub fn from_distances(
        range: T,
        separation: T,
        gamma: T,
        sigmoid: SigmoidParams<T>,
        norm: &SigmaNormParams<T>,
    ) -> Result<Self> {
        Self::new(
            sigma_norm(range, norm),
            sigma_norm(separation, norm),
            gamma,
            sigmoid,
        )
    }

    pub fn range_sigma(&self) -> T {
        self.range_sigma
    }

    pub fn separation_sigma(&self) -> T {
        self.separation_sigma
    }

    pub fn adjacency(&self) -> &CutoffParams<T> {
        &self.adjacency
    }

    pub fn sigmoid(&self) -> &SigmoidParams<T> {
        &self.sigmoid
    }
}

/// Pairwise interaction `bump(z / r_sigma; {gamma, 1}) * sigmoid(z - d_sigma)`
/// on a sigma-normed distance `z`.
///
/// Repulsive (negative) below the separation, attractive between the
/// separation and the range, and zero from the range on.
pub fn psi<T: Scalar>(z: T, params: &InteractionParams<T>) -> Result<T> {
    let weight = bump(z / params.range_sigma, &params.adjacency)?;
    Ok(weight * uneven_sigmoid(z - params.separation_sigma, &params.sigmoid))
}
