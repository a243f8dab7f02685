//! Coverage, information penetration, algebraic connectivity and
//! post-failure recovery.

use serde::{Deserialize, Serialize};

use crate::association::Assignment;
use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::graph::ProximityGraph;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Symmetry tolerance for Laplacians handed to [`fiedler_value`].
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Eigenvalues down to this negative value are treated as round-off.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricsRecord<T> {
    pub t: T,
    pub coverage: T,
    pub fiedler: T,
    pub info_penetration: T,
    pub alive_maps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Coverage,
    Fiedler,
    InfoPenetration,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Coverage, Metric::Fiedler, Metric::InfoPenetration];

    pub fn of<T: Scalar>(self, r: &MetricsRecord<T>) -> T {
        match self {
            Metric::Coverage => r.coverage,
            Metric::Fiedler => r.fiedler,
            Metric::InfoPenetration => r.info_penetration,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RecoveryReport<T> {
    pub metric: Metric,
    pub event_time: T,
    /// Mean over the window just before the event.
    pub pre: T,
    /// Mean over the final window of the run.
    pub post: T,
    /// `post / pre`; `None` when `pre` is zero.
    pub ratio: Option<T>,
}

/// Share of devices served within capacity.
pub fn coverage_fraction<T: Scalar>(assignment: &Assignment, msd_count: usize) -> Result<T> {
    if msd_count == 0 {
        return Err(Error::UndefinedMetric(
            "coverage of an empty device set".into(),
        ));
    }
    Ok(T::from_count(assignment.covered_count()) / T::from_count(msd_count))
}

/// Mean over nodes of the steady-state infection bound `1 - 1/(1 + tau d_i)`
/// with `d_i` the neighbor count. Zero for an empty graph.
pub fn info_penetration<T: Scalar>(graph: &ProximityGraph<T>, tau: T) -> T {
    if graph.is_empty() {
        return T::zero();
    }
    let total: T = graph
        .count_degree
        .iter()
        .map(|&d| T::one() - T::one() / (T::one() + tau * T::from_count(d)))
        .sum();
    total / T::from_count(graph.len())
}

/// Second-smallest Laplacian eigenvalue; zero for one node or none.
pub fn fiedler_value<T: Scalar>(laplacian: &Matrix<T>) -> Result<T> {
    let n = laplacian.dim();
    if n <= 1 {
        return Ok(T::zero());
    }
    let asym = laplacian.max_asymmetry();
    if asym > T::lit(SYMMETRY_TOL) {
        return Err(Error::Input(format!(
            "laplacian is not symmetric (max deviation {asym})"
        )));
    }
    let values = symmetric_eigenvalues(laplacian)?;
    let lambda2 = values[1];
    if lambda2 < T::lit(-PSD_TOL) {
        return Err(Error::Input(format!(
            "laplacian is not positive semi-definite (lambda2 = {lambda2})"
        )));
    }
    Ok(lambda2.max(T::zero()))
}

fn window_mean<T: Scalar>(
    series: &[MetricsRecord<T>],
    metric: Metric,
    keep: impl Fn(T) -> bool,
) -> Option<T> {
    let picked: Vec<T> = series
        .iter()
        .filter(|r| keep(r.t))
        .map(|r| metric.of(r))
        .collect();
    if picked.is_empty() {
        None
    } else {
        Some(picked.iter().copied().sum::<T>() / T::from_count(picked.len()))
    }
}

/// Compares each metric's mean over `[event_time - window, event_time)`
/// with its mean over the final `window` seconds of the series.
pub fn recovery_report<T: Scalar>(
    series: &[MetricsRecord<T>],
    event_time: T,
    window: T,
) -> Result<Vec<RecoveryReport<T>>> {
    let end = series
        .last()
        .ok_or_else(|| Error::UndefinedMetric("empty metric series".into()))?
        .t;
    // half-step slack so sampled times that should land on a boundary do
    let slack = if series.len() > 1 {
        (series[1].t - series[0].t).abs() * T::lit(1e-6)
    } else {
        T::zero()
    };
    let lo = event_time - window - slack;
    let hi = event_time - slack;
    let tail = end - window - slack;
    Metric::ALL
        .iter()
        .map(|&metric| {
            let pre = window_mean(series, metric, |t| t >= lo && t < hi).ok_or_else(|| {
                Error::UndefinedMetric(format!("no samples before event at t = {event_time}"))
            })?;
            let post = window_mean(series, metric, |t| t >= tail)
                .ok_or_else(|| Error::UndefinedMetric("no samples in final window".into()))?;
            let ratio = if pre > T::zero() {
                Some(post / pre)
            } else {
                None
            };
            Ok(RecoveryReport {
                metric,
                event_time,
                pre,
                post,
                ratio,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, LinkParams};
    use crate::model::MapState;
    use crate::vector::Vec2;
    use approx::assert_abs_diff_eq;

    fn rec(t: f64, v: f64) -> MetricsRecord<f64> {
        MetricsRecord {
            t,
            coverage: v,
            fiedler: v,
            info_penetration: v,
            alive_maps: 1,
        }
    }

    fn graph_with_degrees(degrees: &[usize]) -> ProximityGraph<f64> {
        let maps: Vec<_> = (0..degrees.len())
            .map(|i| MapState::at_rest(i, Vec2::new(1000.0 * i as f64, 0.0)))
            .collect();
        let mut g = build_graph(&maps, &LinkParams::new(24.0, 0.1, 0.2).unwrap());
        g.count_degree = degrees.to_vec();
        g
    }

    #[test]
    fn coverage_examples() {
        let none = Assignment {
            pairs: vec![None; 4],
            loads: vec![],
            covered: vec![false; 4],
        };
        assert_eq!(coverage_fraction::<f64>(&none, 4).unwrap(), 0.0);
        let all = Assignment {
            pairs: vec![Some(0); 3],
            loads: vec![3],
            covered: vec![true; 3],
        };
        assert_eq!(coverage_fraction::<f64>(&all, 3).unwrap(), 1.0);
        let capped = Assignment {
            pairs: vec![Some(0); 3],
            loads: vec![3],
            covered: vec![true, true, false],
        };
        assert_abs_diff_eq!(coverage_fraction::<f64>(&capped, 3).unwrap(), 2.0 / 3.0);
        assert!(matches!(
            coverage_fraction::<f64>(&none, 0),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn penetration_examples() {
        assert_eq!(info_penetration(&graph_with_degrees(&[0, 0, 0]), 1.0), 0.0);
        assert_abs_diff_eq!(
            info_penetration(&graph_with_degrees(&[4, 4, 4, 4, 4]), 1.0),
            0.8,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            info_penetration(&graph_with_degrees(&[0, 1, 3]), 1.0),
            1.25 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(info_penetration(&graph_with_degrees(&[]), 1.0), 0.0);
    }

    #[test]
    fn fiedler_examples() {
        let two = Matrix::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]);
        assert_abs_diff_eq!(fiedler_value(&two).unwrap(), 1.0, epsilon = 1e-12);
        let split = Matrix::from_rows(&[
            vec![1.0, -1.0, 0.0, 0.0],
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, -2.0],
            vec![0.0, 0.0, -2.0, 2.0],
        ]);
        assert_abs_diff_eq!(fiedler_value(&split).unwrap(), 0.0, epsilon = 1e-9);
        let path = Matrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ]);
        assert_abs_diff_eq!(fiedler_value(&path).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(fiedler_value::<f64>(&Matrix::zeros(1)).unwrap(), 0.0);
        assert_eq!(fiedler_value::<f64>(&Matrix::zeros(0)).unwrap(), 0.0);
    }

    #[test]
    fn fiedler_rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[vec![1.0, -1.0], vec![-0.9, 1.0]]);
        assert!(matches!(fiedler_value(&m), Err(Error::Input(_))));
    }

    #[test]
    fn recovery_examples() {
        let flat: Vec<_> = (0..=250).map(|k| rec(k as f64 * 0.1, 0.6)).collect();
        for r in recovery_report(&flat, 10.0, 2.0).unwrap() {
            assert_abs_diff_eq!(r.ratio.unwrap(), 1.0, epsilon = 1e-12);
        }
        let step: Vec<_> = (0..=250)
            .map(|k| rec(k as f64 * 0.1, if k < 100 { 0.8 } else { 0.776 }))
            .collect();
        let r = recovery_report(&step, 10.0, 2.0).unwrap();
        assert_abs_diff_eq!(r[0].pre, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r[0].ratio.unwrap(), 0.97, epsilon = 1e-12);
        let zero: Vec<_> = (0..=250)
            .map(|k| rec(k as f64 * 0.1, if k < 100 { 0.0 } else { 0.5 }))
            .collect();
        assert_eq!(recovery_report(&zero, 10.0, 2.0).unwrap()[1].ratio, None);
    }

    #[test]
    fn recovery_needs_samples() {
        assert!(recovery_report::<f64>(&[], 10.0, 2.0).is_err());
        let late: Vec<_> = (100..=250).map(|k| rec(k as f64 * 0.1, 1.0)).collect();
        assert!(recovery_report(&late, 10.0, 2.0).is_err());
    }
}
