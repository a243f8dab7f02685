//! Static placement baselines scored with the same pipeline as the dynamic run.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{nearest_index, seed_centers};
use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::model::{MapState, MsdState, ScenarioConfig};
use crate::runner::Pipeline;
use crate::scalar::Scalar;
use crate::vector::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dynamic,
    PMedian,
    CirclePacking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Placement<T> {
    pub positions: Vec<Vec2<T>>,
    pub method: Method,
}

/// Sum of distances from every point to its nearest facility.
pub fn median_objective<T: Scalar>(points: &[Vec2<T>], facilities: &[Vec2<T>]) -> T {
    points
        .iter()
        .map(|p| nearest_index(*p, facilities).1.sqrt())
        .sum()
}

fn total_distance<T: Scalar>(points: &[Vec2<T>], c: Vec2<T>) -> T {
    points.iter().map(|p| p.distance(c)).sum()
}

/// Descends the sum of distances from `start` with backtracking line search.
/// Every accepted step strictly lowers the objective.
fn descend_median<T: Scalar>(points: &[Vec2<T>], start: Vec2<T>, max_iters: usize) -> Vec2<T> {
    let mut c = start;
    let mut fc = total_distance(points, c);
    let mut step = T::one();
    let tiny = T::lit(1e-12);
    for _ in 0..max_iters {
        let mut g = Vec2::zero();
        for p in points {
            let d = c.distance(*p);
            if d > tiny {
                g += (c - *p) / d;
            }
        }
        let gn_sq = g.norm_squared();
        if gn_sq <= tiny {
            break;
        }
        let mut t = step;
        let accepted = loop {
            let cand = c - g * t;
            let fcand = total_distance(points, cand);
            if fcand <= fc - T::lit(1e-4) * t * gn_sq {
                break Some((cand, fcand));
            }
            t = t * T::lit(0.5);
            if t < T::lit(1e-14) {
                break None;
            }
        };
        let Some((cand, fcand)) = accepted else { break };
        let moved = cand.distance(c);
        c = cand;
        fc = fcand;
        step = t * T::lit(2.0);
        if moved < T::lit(1e-10) {
            break;
        }
    }
    c
}

/// One alternating run from the given facilities; returns the final
/// facilities and the objective after every assignment pass. Stops when an
/// assignment pass changes nothing and the facilities have settled.
pub fn p_median_from<T: Scalar>(
    points: &[Vec2<T>],
    init: Vec<Vec2<T>>,
    max_rounds: usize,
) -> (Vec<Vec2<T>>, Vec<T>) {
    let mut facilities = init;
    let mut membership = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();
    let mut groups: Vec<Vec<Vec2<T>>> = vec![Vec::new(); facilities.len()];
    let mut shift = T::infinity();
    for _ in 0..max_rounds {
        let mut changed = false;
        let mut objective = T::zero();
        groups.iter_mut().for_each(Vec::clear);
        for (i, p) in points.iter().enumerate() {
            let (k, d) = nearest_index(*p, &facilities);
            changed |= membership[i] != k;
            membership[i] = k;
            objective = objective + d.sqrt();
            groups[k].push(*p);
        }
        trace.push(objective);
        if !changed && shift < T::lit(1e-9) {
            break;
        }
        shift = T::zero();
        for (f, group) in facilities.iter_mut().zip(&groups) {
            if !group.is_empty() {
                let next = descend_median(group, *f, 200);
                shift = shift.max(next.distance(*f));
                *f = next;
            }
        }
    }
    (facilities, trace)
}

/// Multi-restart alternating heuristic for the uncapacitated p-median
/// problem: assign every point to its nearest facility, move each facility
/// toward the geometric median of its points, repeat. The best restart is
/// kept, ties to the earliest.
pub fn p_median<T: Scalar, R: Rng + ?Sized>(
    points: &[Vec2<T>],
    facilities: usize,
    rng: &mut R,
    restarts: usize,
) -> Result<Placement<T>> {
    if facilities == 0 {
        return Err(Error::Parameter(
            "p-median needs at least one facility".into(),
        ));
    }
    if points.is_empty() {
        return Err(Error::Input("p-median needs at least one point".into()));
    }
    let mut best: Option<(T, Vec<Vec2<T>>)> = None;
    for _ in 0..restarts.max(1) {
        let init = seed_centers(points, facilities, rng);
        let (sites, _) = p_median_from(points, init, 100);
        let objective = median_objective(points, &sites);
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, sites));
        }
    }
    let (_, positions) = best.expect("at least one restart");
    Ok(Placement {
        positions,
        method: Method::PMedian,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle<T> {
    pub center: Vec2<T>,
    pub radius: T,
}

impl<T: Scalar> Circle<T> {
    fn contains(&self, p: Vec2<T>) -> bool {
        p.distance(self.center) <= self.radius * (T::one() + T::lit(1e-12)) + T::lit(1e-9)
    }

    fn diameter(a: Vec2<T>, b: Vec2<T>) -> Self {
        let center = (a + b) / T::lit(2.0);
        Self {
            center,
            radius: a.distance(center).max(b.distance(center)),
        }
    }

    fn through(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> Self {
        let ab = b - a;
        let ac = c - a;
        let det = T::lit(2.0) * (ab.x * ac.y - ab.y * ac.x);
        if det.abs() <= T::epsilon() * (ab.norm_squared() + ac.norm_squared()) {
            // collinear: the widest pair spans the others
            let cands = [
                Self::diameter(a, b),
                Self::diameter(a, c),
                Self::diameter(b, c),
            ];
            return cands
                .into_iter()
                .fold(cands[0], |m, x| if x.radius > m.radius { x } else { m });
        }
        let (b2, c2) = (ab.norm_squared(), ac.norm_squared());
        let ux = (ac.y * b2 - ab.y * c2) / det;
        let uy = (ab.x * c2 - ac.x * b2) / det;
        let center = a + Vec2::new(ux, uy);
        let radius = center
            .distance(a)
            .max(center.distance(b))
            .max(center.distance(c));
        Self { center, radius }
    }
}

/// Smallest circle enclosing every point, by randomized incremental
/// construction (expected linear time).
pub fn min_enclosing_circle<T: Scalar, R: Rng + ?Sized>(
    points: &[Vec2<T>],
    rng: &mut R,
) -> Result<Circle<T>> {
    if points.is_empty() {
        return Err(Error::Input(
            "enclosing circle of an empty point set".into(),
        ));
    }
    let mut pts = points.to_vec();
    pts.shuffle(rng);
    let mut c = Circle {
        center: pts[0],
        radius: T::zero(),
    };
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: T::zero(),
        };
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = Circle::diameter(pts[i], pts[j]);
            for k in 0..j {
                if !c.contains(pts[k]) {
                    c = Circle::through(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    Ok(c)
}

/// Hexagonal lattice of the given pitch centered on the minimum enclosing
/// circle of the points. Sites inside the circle are used closest-first;
/// when the circle holds fewer than `count` sites the next lattice rings
/// outside it supply the rest.
pub fn circle_packing<T: Scalar, R: Rng + ?Sized>(
    points: &[Vec2<T>],
    count: usize,
    pitch: T,
    influence_radius: T,
    rng: &mut R,
) -> Result<Placement<T>> {
    if count == 0 {
        return Err(Error::Parameter(
            "circle packing needs at least one site".into(),
        ));
    }
    if !(influence_radius > T::zero()) {
        return Err(Error::Parameter(format!(
            "influence radius must be positive, got {influence_radius}"
        )));
    }
    if !(pitch >= T::zero() && pitch.is_finite()) {
        return Err(Error::Parameter(format!(
            "lattice pitch must be non-negative, got {pitch}"
        )));
    }
    let mec = min_enclosing_circle(points, rng)?;
    if mec.radius == T::zero() || pitch == T::zero() {
        return Ok(Placement {
            positions: vec![mec.center; count],
            method: Method::CirclePacking,
        });
    }

    let inside_rings = (mec.radius / pitch).ceil().to_i64().unwrap_or(0);
    // ring n of a hex lattice holds 6n sites
    let mut rings = 0i64;
    while 1 + 3 * rings * (rings + 1) < count as i64 {
        rings += 1;
    }
    let rings = rings.max(inside_rings) + 1;
    let mut sites: Vec<(i64, T, i64, i64)> = Vec::new();
    for i in -2 * rings..=2 * rings {
        for j in -2 * rings..=2 * rings {
            // squared length in pitch units for basis (1, 0), (1/2, sqrt(3)/2)
            let norm = i * i + i * j + j * j;
            if norm > rings * rings {
                continue;
            }
            let x = T::from_i64(i).unwrap() + T::from_i64(j).unwrap() * T::lit(0.5);
            let y = T::from_i64(j).unwrap() * T::lit(3f64.sqrt() / 2.0);
            sites.push((norm, y.atan2(x), i, j));
        }
    }
    sites.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).expect("finite angle"))
    });
    let positions = sites
        .iter()
        .take(count)
        .map(|&(_, _, i, j)| {
            let x = T::from_i64(i).unwrap() + T::from_i64(j).unwrap() * T::lit(0.5);
            let y = T::from_i64(j).unwrap() * T::lit(3f64.sqrt() / 2.0);
            mec.center + Vec2::new(x, y) * pitch
        })
        .collect();
    Ok(Placement {
        positions,
        method: Method::CirclePacking,
    })
}

/// Scores a fixed placement: every site becomes an alive access point at
/// rest, then matching, graph and metrics run as in a dynamic step.
pub fn score_placement<T: Scalar>(
    placement: &Placement<T>,
    msds: &[MsdState<T>],
    config: &ScenarioConfig<T>,
) -> Result<MetricsRecord<T>> {
    let maps: Vec<_> = placement
        .positions
        .iter()
        .enumerate()
        .map(|(i, &p)| MapState::at_rest(i, p))
        .collect();
    let pipeline = Pipeline::from_config(config)?;
    Ok(pipeline.observe(T::zero(), msds, &maps)?.record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngStreams, Stream};

    fn rng() -> rand_chacha::ChaCha8Rng {
        RngStreams::new(21).stream(Stream::Baselines)
    }

    fn v(x: f64, y: f64) -> Vec2<f64> {
        Vec2::new(x, y)
    }

    #[test]
    fn saturated_facilities_reach_zero_cost() {
        let pts = [v(0.0, 0.0), v(5.0, 1.0), v(-3.0, 7.0), v(2.0, 2.0)];
        let p = p_median(&pts, 6, &mut rng(), 3).unwrap();
        assert_eq!(p.positions.len(), 6);
        assert!(median_objective(&pts, &p.positions) < 1e-9);
    }

    #[test]
    fn two_clusters_get_one_facility_each() {
        let pts = [
            v(0.0, 0.0),
            v(1.0, 0.0),
            v(0.0, 1.0),
            v(100.0, 0.0),
            v(101.0, 0.0),
            v(100.0, 1.0),
        ];
        let p = p_median(&pts, 2, &mut rng(), 5).unwrap();
        let left = p.positions.iter().filter(|q| q.x < 50.0).count();
        assert_eq!(left, 1);
    }

    #[test]
    fn p_median_errors() {
        assert!(p_median(&[v(0.0, 0.0)], 0, &mut rng(), 1).is_err());
        assert!(p_median::<f64, _>(&[], 1, &mut rng(), 1).is_err());
    }

    #[test]
    fn enclosing_circle_cases() {
        let c = min_enclosing_circle(&[v(1.0, 1.0)], &mut rng()).unwrap();
        assert_eq!(c.radius, 0.0);
        let c =
            min_enclosing_circle(&[v(-1.0, 0.0), v(1.0, 0.0), v(0.0, 0.5)], &mut rng()).unwrap();
        assert!((c.radius - 1.0).abs() < 1e-12 && c.center.norm() < 1e-12);
        let tri = [v(0.0, 0.0), v(2.0, 0.0), v(1.0, 3f64.sqrt())];
        let c = min_enclosing_circle(&tri, &mut rng()).unwrap();
        assert!((c.radius - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        let line = [v(0.0, 0.0), v(1.0, 1.0), v(2.0, 2.0), v(3.0, 3.0)];
        let c = min_enclosing_circle(&line, &mut rng()).unwrap();
        assert!((c.radius - 18f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn packing_single_site_is_circle_center() {
        let pts = [v(-10.0, 0.0), v(10.0, 0.0), v(0.0, 3.0)];
        let p = circle_packing(&pts, 1, 20.0, 24.0, &mut rng()).unwrap();
        assert!(p.positions[0].distance(v(0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn packing_flower() {
        let pts = [v(-100.0, 0.0), v(100.0, 0.0)];
        let p = circle_packing(&pts, 7, 20.0, 24.0, &mut rng()).unwrap();
        let center = p.positions[0];
        assert!(center.norm() < 1e-12);
        for q in &p.positions[1..] {
            assert!((q.distance(center) - 20.0).abs() < 1e-9);
        }
        for (i, a) in p.positions.iter().enumerate() {
            for b in &p.positions[i + 1..] {
                assert!(a.distance(*b) >= 20.0 - 1e-9);
            }
        }
    }

    #[test]
    fn packing_spills_beyond_small_circle() {
        let pts = [v(-5.0, 0.0), v(5.0, 0.0)];
        let p = circle_packing(&pts, 30, 20.0, 24.0, &mut rng()).unwrap();
        assert_eq!(p.positions.len(), 30);
        for (i, a) in p.positions.iter().enumerate() {
            for b in &p.positions[i + 1..] {
                assert!(a.distance(*b) >= 20.0 - 1e-9);
            }
        }
    }

    #[test]
    fn packing_degenerate_point_set() {
        let p = circle_packing(&[v(3.0, 4.0); 4], 5, 20.0, 24.0, &mut rng()).unwrap();
        assert!(p.positions.iter().all(|q| *q == v(3.0, 4.0)));
        assert!(circle_packing(&[v(3.0, 4.0)], 5, 20.0, 0.0, &mut rng()).is_err());
    }
}
