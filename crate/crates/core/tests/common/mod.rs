//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use skylink::association::{utility, Assignment, MatchParams};
use skylink::model::{MapState, MsdState};
use skylink::{SymMatrix, Vec2};

pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[i] = r;
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }

    pub fn components(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

pub fn weighted_laplacian(n: usize, edges: &[(usize, usize, f64)]) -> SymMatrix {
    let mut l = SymMatrix::zeros(n);
    for &(i, j, w) in edges {
        if i == j {
            continue;
        }
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    l
}

/// Highest utility each device can get from any alive in-range access point.
pub fn best_utility(
    msd: &MsdState<f64>,
    maps: &[MapState<f64>],
    p: &MatchParams<f64>,
) -> Option<f64> {
    maps.iter()
        .filter(|m| m.alive && msd.position.distance(m.position) < p.range)
        .map(|m| utility(msd.position, m.position, p.kappa, p.eta))
        .fold(None, |acc, u| Some(acc.map_or(u, |a: f64| a.max(u))))
}

/// Among all subsets of `members` of size `min(len, cap)`, the one with the
/// largest total utility.
fn best_subset(members: &[usize], utilities: &[f64], cap: usize) -> Vec<usize> {
    let keep = members.len().min(cap);
    let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, Vec::new());
    for mask in 0u32..(1 << members.len()) {
        if mask.count_ones() as usize != keep {
            continue;
        }
        let pick: Vec<usize> = (0..members.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| members[b])
            .collect();
        let total: f64 = pick.iter().map(|&i| utilities[i]).sum();
        if total > best.0 {
            best = (total, pick);
        }
    }
    best.1
}

pub fn brute_force_match(
    msds: &[MsdState<f64>],
    maps: &[MapState<f64>],
    p: &MatchParams<f64>,
) -> Assignment {
    let mut pairs = vec![None; msds.len()];
    let mut utilities = vec![0.0; msds.len()];
    for (i, d) in msds.iter().enumerate() {
        if let Some(u) = best_utility(d, maps, p) {
            let j = maps
                .iter()
                .position(|m| {
                    m.alive
                        && d.position.distance(m.position) < p.range
                        && utility(d.position, m.position, p.kappa, p.eta) == u
                })
                .unwrap();
            pairs[i] = Some(j);
            utilities[i] = u;
        }
    }
    let mut loads = vec![0; maps.len()];
    let mut covered = vec![false; msds.len()];
    for j in 0..maps.len() {
        let members: Vec<usize> = (0..msds.len()).filter(|&i| pairs[i] == Some(j)).collect();
        loads[j] = members.len();
        for i in best_subset(&members, &utilities, p.capacity) {
            covered[i] = true;
        }
    }
    Assignment {
        pairs,
        loads,
        covered,
    }
}

/// Trigonometric solution of det(A - x I) = 0 for a real symmetric 3x3.
pub fn symmetric_cubic_roots(m: &SymMatrix) -> [f64; 3] {
    let a = |i, j| m[(i, j)];
    let p1 = a(0, 1).powi(2) + a(0, 2).powi(2) + a(1, 2).powi(2);
    let q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    let p2 = (a(0, 0) - q).powi(2) + (a(1, 1) - q).powi(2) + (a(2, 2) - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let b = |i, j| (a(i, j) - if i == j { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [lo, 3.0 * q - hi - lo, hi]
}

/// Weiszfeld iteration for the geometric median, started at the centroid.
pub fn weiszfeld(points: &[Vec2<f64>]) -> Vec2<f64> {
    let mut y = points.iter().copied().sum::<Vec2<f64>>() / points.len() as f64;
    for _ in 0..100_000 {
        let mut num = Vec2::zero();
        let mut den = 0.0;
        for &p in points {
            let d = p.distance(y).max(1e-12);
            num += p / d;
            den += 1.0 / d;
        }
        let next = num / den;
        if next.distance(y) < 1e-12 {
            return next;
        }
        y = next;
    }
    y
}
