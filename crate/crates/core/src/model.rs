//! Entities, scenario configuration and initial-state sampling.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::Scheme;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::Vec2;

/// A ground device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MsdState<T> {
    pub id: usize,
    pub position: Vec2<T>,
    pub assigned_map: Option<usize>,
    pub covered: bool,
}

/// An aerial access point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MapState<T> {
    pub id: usize,
    pub position: Vec2<T>,
    pub velocity: Vec2<T>,
    pub alive: bool,
    pub load: usize,
}

impl<T: Scalar> MapState<T> {
    pub fn at_rest(id: usize, position: Vec2<T>) -> Self {
        Self {
            id,
            position,
            velocity: Vec2::zero(),
            alive: true,
            load: 0,
        }
    }
}

/// One component of the ground-device Gaussian mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct GaussianComponent<T> {
    pub weight: T,
    pub mean: Vec2<T>,
    /// Row-major 2x2 covariance (m^2).
    pub covariance: [[T; 2]; 2],
}

impl<T: Scalar> GaussianComponent<T> {
    /// Lower-triangular factor `L` with `L L^T = covariance`.
    ///
    /// Semi-definite covariances are accepted (a zero variance collapses the
    /// axis onto the mean); asymmetric or indefinite ones are rejected.
    pub fn cholesky(&self) -> Result<[[T; 2]; 2]> {
        let [[s11, s12], [s21, s22]] = self.covariance;
        let scale = s11.abs().max(s22.abs()).max(T::one());
        let tol = T::lit(1e-12) * scale;
        if (s12 - s21).abs() > tol {
            return Err(Error::Config(format!(
                "covariance {:?} is not symmetric",
                self.covariance
            )));
        }
        if !(s11 >= T::zero() && s22 >= T::zero()) {
            return Err(Error::Config(format!(
                "covariance {:?} is not positive semi-definite",
                self.covariance
            )));
        }
        let l11 = s11.sqrt();
        let l21 = if l11 > T::zero() {
            s21 / l11
        } else if s21.abs() <= tol {
            T::zero()
        } else {
            return Err(Error::Config(format!(
                "covariance {:?} is not positive semi-definite",
                self.covariance
            )));
        };
        let rest = s22 - l21 * l21;
        if rest < -tol {
            return Err(Error::Config(format!(
                "covariance {:?} is not positive semi-definite",
                self.covariance
            )));
        }
        Ok([[l11, T::zero()], [l21, rest.max(T::zero()).sqrt()]])
    }

    fn std_dev(&self) -> Vec2<T> {
        Vec2::new(
            self.covariance[0][0].max(T::zero()).sqrt(),
            self.covariance[1][1].max(T::zero()).sqrt(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Region<T> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Interval<T> {
    pub min: T,
    pub max: T,
}

/// Where and how fast the access points start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct MapInit<T> {
    /// Uniform placement box. When absent, the union of the mixture
    /// components' two-sigma boxes is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region<T>>,
    /// Each velocity component is drawn uniformly from this interval (m/s).
    pub velocity: Interval<T>,
}

/// Random removal of a share of the currently alive access points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct FailureEvent<T> {
    /// Seconds; applied at the first step whose time reaches it.
    pub time: T,
    /// Share of alive access points to disable, in `[0, 1)`.
    pub fraction: T,
}

/// Solver and bookkeeping knobs that are not part of the physical scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct RunSettings<T> {
    pub scheme: Scheme,
    /// Steps between stored state snapshots; 0 disables snapshots.
    pub snapshot_every: usize,
    /// Seconds averaged on either side of a failure for recovery reports.
    pub recovery_window: T,
    /// Optional bound on the norm of each control input (m/s^2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_limit: Option<T>,
    pub cluster_tol: T,
    pub cluster_max_iters: usize,
    pub p_median_restarts: usize,
}

impl<T: Scalar> Default for RunSettings<T> {
    fn default() -> Self {
        Self {
            scheme: Scheme::ExactHold,
            snapshot_every: 100,
            recovery_window: T::lit(2.0),
            control_limit: None,
            cluster_tol: T::lit(1e-3),
            cluster_max_iters: 100,
            p_median_restarts: 10,
        }
    }
}

/// Complete description of one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct ScenarioConfig<T> {
    pub seed: u64,
    /// Number of ground devices (M).
    pub msd_count: usize,
    /// Number of access points (L).
    pub map_count: usize,
    /// Communication range r (m).
    pub range: T,
    /// Minimum desired separation d between access points (m).
    pub separation: T,
    /// Sigma-norm smoothing constant.
    pub epsilon: T,
    /// Serving capacity per access point.
    pub capacity: usize,
    /// Flight altitude (m). Stored for rendering only; distances are planar.
    pub elevation: T,
    /// Number of device clusters (K).
    pub clusters: usize,
    /// Lower cutoff of the link-strength bump.
    pub gamma: T,
    pub sigmoid_a: T,
    pub sigmoid_b: T,
    /// Position gain toward the nearest cluster center.
    pub goal_gain: T,
    /// Velocity damping gain.
    pub damping_gain: T,
    /// Random-walk step scale of the ground devices (m).
    pub mobility_scale: T,
    /// Effective information spreading rate.
    pub spreading_rate: T,
    /// Sampling interval Ts (s).
    pub sampling_interval: T,
    /// Simulated horizon (s).
    pub horizon: T,
    /// Link utility is `kappa * dist^-eta`.
    pub kappa: T,
    pub eta: T,
    pub mixture: Vec<GaussianComponent<T>>,
    pub map_init: MapInit<T>,
    #[serde(default)]
    pub failure_events: Vec<FailureEvent<T>>,
    #[serde(default)]
    pub run: RunSettings<T>,
}

impl<T: Scalar> ScenarioConfig<T> {
    /// The default scenario: 2000 devices in a three-component mixture, 80
    /// access points, 25 s at 10 ms steps.
    pub fn table_one() -> Self {
        let component = |mx: f64, my: f64, vx: f64, vy: f64| GaussianComponent {
            weight: T::one(),
            mean: Vec2::new(T::lit(mx), T::lit(my)),
            covariance: [[T::lit(vx), T::zero()], [T::zero(), T::lit(vy)]],
        };
        Self {
            seed: 1,
            msd_count: 2000,
            map_count: 80,
            range: T::lit(24.0),
            separation: T::lit(20.0),
            epsilon: T::lit(0.1),
            capacity: 80,
            elevation: T::lit(20.0),
            clusters: 3,
            gamma: T::lit(0.2),
            sigmoid_a: T::lit(5.0),
            sigmoid_b: T::lit(5.0),
            goal_gain: T::lit(0.2),
            damping_gain: T::lit(0.1),
            mobility_scale: T::lit(0.2),
            spreading_rate: T::one(),
            sampling_interval: T::lit(0.01),
            horizon: T::lit(25.0),
            kappa: T::one(),
            eta: T::lit(4.0),
            mixture: vec![
                component(50.0, 20.0, 200.0, 100.0),
                component(0.0, -50.0, 500.0, 200.0),
                component(-40.0, 40.0, 150.0, 300.0),
            ],
            map_init: MapInit {
                region: None,
                velocity: Interval {
                    min: T::lit(-2.0),
                    max: T::lit(-1.0),
                },
            },
            failure_events: Vec::new(),
            run: RunSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let positive = |name: &str, v: T| -> Result<()> {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        let non_negative = |name: &str, v: T| -> Result<()> {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be non-negative and finite, got {v}"
                )))
            }
        };
        positive("range", self.range)?;
        non_negative("separation", self.separation)?;
        if self.separation >= self.range {
            return fail(format!(
                "separation {} must be below range {}",
                self.separation, self.range
            ));
        }
        positive("epsilon", self.epsilon)?;
        if self.capacity == 0 {
            return fail("capacity must be at least 1".into());
        }
        if self.clusters == 0 {
            return fail("clusters must be at least 1".into());
        }
        if !(self.gamma >= T::zero() && self.gamma <= T::one()) {
            return fail(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        positive("sigmoid_a", self.sigmoid_a)?;
        positive("sigmoid_b", self.sigmoid_b)?;
        non_negative("goal_gain", self.goal_gain)?;
        non_negative("damping_gain", self.damping_gain)?;
        non_negative("mobility_scale", self.mobility_scale)?;
        non_negative("spreading_rate", self.spreading_rate)?;
        positive("sampling_interval", self.sampling_interval)?;
        non_negative("horizon", self.horizon)?;
        positive("kappa", self.kappa)?;
        positive("eta", self.eta)?;
        non_negative("elevation", self.elevation.abs())?;
        if self.mixture.is_empty() {
            return fail("mixture needs at least one component".into());
        }
        for c in &self.mixture {
            positive("mixture weight", c.weight)?;
            if !c.mean.is_finite() {
                return fail(format!("mixture mean {:?} is not finite", c.mean));
            }
            c.cholesky()?;
        }
        let v = &self.map_init.velocity;
        if !(v.min <= v.max && v.min.is_finite() && v.max.is_finite()) {
            return fail(format!("velocity interval [{}, {}] is empty", v.min, v.max));
        }
        if let Some(r) = &self.map_init.region {
            if !(r.min.is_finite() && r.max.is_finite() && r.min.x <= r.max.x && r.min.y <= r.max.y)
            {
                return fail(format!("placement region {r:?} is empty"));
            }
        }
        for e in &self.failure_events {
            non_negative("failure time", e.time)?;
            if !(e.fraction >= T::zero() && e.fraction < T::one()) {
                return fail(format!(
                    "failure fraction must lie in [0, 1), got {}",
                    e.fraction
                ));
            }
        }
        non_negative("recovery_window", self.run.recovery_window)?;
        if let Some(limit) = self.run.control_limit {
            positive("control_limit", limit)?;
        }
        positive("cluster_tol", self.run.cluster_tol)?;
        if self.run.p_median_restarts == 0 {
            return fail("p_median_restarts must be at least 1".into());
        }
        Ok(())
    }

    /// Number of integration steps covering the horizon.
    pub fn step_count(&self) -> usize {
        (self.horizon / self.sampling_interval)
            .round()
            .to_usize()
            .unwrap_or(0)
    }

    /// Placement box for the access points, explicit or derived from the mixture.
    pub fn placement_region(&self) -> Region<T> {
        if let Some(r) = self.map_init.region {
            return r;
        }
        let two = T::lit(2.0);
        let mut min = Vec2::new(T::infinity(), T::infinity());
        let mut max = Vec2::new(T::neg_infinity(), T::neg_infinity());
        for c in &self.mixture {
            let sd = c.std_dev() * two;
            min.x = min.x.min(c.mean.x - sd.x);
            min.y = min.y.min(c.mean.y - sd.y);
            max.x = max.x.max(c.mean.x + sd.x);
            max.y = max.y.max(c.mean.y + sd.y);
        }
        if self.mixture.is_empty() {
            min = Vec2::zero();
            max = Vec2::zero();
        }
        Region { min, max }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

/// Complete state at one sample instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SimulationState<T> {
    pub t: T,
    pub step_index: usize,
    pub msds: Vec<MsdState<T>>,
    pub maps: Vec<MapState<T>>,
    /// Device cluster centers; empty until the first clustering pass.
    pub cluster_centers: Vec<Vec2<T>>,
}

impl<T: Scalar> SimulationState<T> {
    pub fn alive_count(&self) -> usize {
        self.maps.iter().filter(|m| m.alive).count()
    }

    pub fn msd_positions(&self) -> Vec<Vec2<T>> {
        self.msds.iter().map(|m| m.position).collect()
    }
}

/// Draws device positions from the mixture and access points uniformly over
/// the placement region with velocities from the configured box.
pub fn sample_initial_state<T: Scalar, R: Rng + ?Sized>(
    config: &ScenarioConfig<T>,
    rng: &mut R,
) -> Result<SimulationState<T>> {
    let factors = config
        .mixture
        .iter()
        .map(|c| c.cholesky())
        .collect::<Result<Vec<_>>>()?;
    let total_weight: f64 = config.mixture.iter().map(|c| c.weight.as_f64()).sum();

    let mut msds = Vec::with_capacity(config.msd_count);
    for id in 0..config.msd_count {
        let mut pick = rng.random::<f64>() * total_weight;
        let mut k = config.mixture.len() - 1;
        for (i, c) in config.mixture.iter().enumerate() {
            let w = c.weight.as_f64();
            if pick < w {
                k = i;
                break;
            }
            pick -= w;
        }
        let z0 = T::lit(rng.sample::<f64, _>(StandardNormal));
        let z1 = T::lit(rng.sample::<f64, _>(StandardNormal));
        let l = &factors[k];
        let offset = Vec2::new(l[0][0] * z0, l[1][0] * z0 + l[1][1] * z1);
        msds.push(MsdState {
            id,
            position: config.mixture[k].mean + offset,
            assigned_map: None,
            covered: false,
        });
    }

    let region = config.placement_region();
    let vel = config.map_init.velocity;
    let uniform = |rng: &mut R, lo: T, hi: T| lo + (hi - lo) * T::lit(rng.random::<f64>());
    let maps = (0..config.map_count)
        .map(|id| {
            let position = Vec2::new(
                uniform(rng, region.min.x, region.max.x),
                uniform(rng, region.min.y, region.max.y),
            );
            let velocity = Vec2::new(
                uniform(rng, vel.min, vel.max),
                uniform(rng, vel.min, vel.max),
            );
            MapState {
                id,
                position,
                velocity,
                alive: true,
                load: 0,
            }
        })
        .collect();

    Ok(SimulationState {
        t: T::zero(),
        step_index: 0,
        msds,
        maps,
        cluster_centers: Vec::new(),
    })
}
