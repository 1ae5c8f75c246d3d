//! Closed convex sets of edge flows that the solvers project onto.

use crate::error::{Error, Result};
use crate::graph::{CartesianLayout, OrientedGraph};
use crate::scalar::Scalar;

/// A closed convex set of edge fields with a cheap Euclidean projection.
pub trait FlowSet<T: Scalar> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Projects `h` onto the set in place.
    fn project(&self, h: &mut [T]);

    /// Largest magnitude any member can take on edge `e`.
    fn edge_bound(&self, e: usize) -> T;

    fn contains(&self, h: &[T], slack: T) -> bool;

    /// The set as a box, when it is one. Boxes admit exact active-set polishing.
    fn as_box(&self) -> Option<&BoxSpec<T>> {
        None
    }
}

/// Per-edge interval constraints `lower ≤ H ≤ upper`. Equal bounds pin an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> BoxSpec<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch {
                what: "box bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (edge, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidBox {
                    edge,
                    lower: lo.to_f64_lossy(),
                    upper: hi.to_f64_lossy(),
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub(crate) fn new_unchecked(lower: Vec<T>, upper: Vec<T>) -> Self {
        debug_assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u));
        Self { lower, upper }
    }

    /// The ℓ∞ ball `B_α = [−α, α]^E`.
    pub fn ball(edge_count: usize, radius: T) -> Result<Self> {
        if !(radius >= T::zero() && radius.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: radius.to_f64_lossy(),
                reason: "must be nonnegative and finite",
            });
        }
        Ok(Self::new_unchecked(vec![-radius; edge_count], vec![radius; edge_count]))
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn is_fixed(&self, e: usize) -> bool {
        self.lower[e] == self.upper[e]
    }

    /// Copy with every bound multiplied by `s ≥ 0`.
    pub fn scaled(&self, s: T) -> Self {
        Self::new_unchecked(
            self.lower.iter().map(|&v| v * s).collect(),
            self.upper.iter().map(|&v| v * s).collect(),
        )
    }
}

impl<T: Scalar> FlowSet<T> for BoxSpec<T> {
    fn len(&self) -> usize {
        self.lower.len()
    }

    fn project(&self, h: &mut [T]) {
        for ((v, &lo), &hi) in h.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(lo).min(hi);
        }
    }

    fn edge_bound(&self, e: usize) -> T {
        self.lower[e].abs().max(self.upper[e].abs())
    }

    fn contains(&self, h: &[T], slack: T) -> bool {
        h.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo - slack && v <= hi + slack)
    }

    fn as_box(&self) -> Option<&BoxSpec<T>> {
        Some(self)
    }
}

/// Grouped Euclidean constraints of the isotropic total variation on a
/// Cartesian graph: for each interior cell the pair (vertical, horizontal)
/// edge leaving it has norm ≤ radius; on the last column and last row the
/// single remaining edge has magnitude ≤ radius.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicBall<T> {
    edge_count: usize,
    groups: Vec<Vec<usize>>,
    radius: T,
}

impl<T: Scalar> IsotropicBall<T> {
    pub fn new(g: &OrientedGraph, radius: T) -> Result<Self> {
        let layout = g.cartesian_layout().ok_or(Error::NotCartesian)?;
        if !(radius >= T::zero() && radius.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: radius.to_f64_lossy(),
                reason: "must be nonnegative and finite",
            });
        }
        Ok(Self {
            edge_count: g.edge_count(),
            groups: Self::groups(layout),
            radius,
        })
    }

    fn groups(layout: &CartesianLayout) -> Vec<Vec<usize>> {
        let (m, n) = (layout.rows(), layout.cols());
        let mut groups = Vec::new();
        for i in 0..m {
            for j in 0..n {
                match (i + 1 < m, j + 1 < n) {
                    (true, true) => {
                        groups.push(vec![layout.vertical_edge(i, j), layout.horizontal_edge(i, j)])
                    }
                    (true, false) => groups.push(vec![layout.vertical_edge(i, j)]),
                    (false, true) => groups.push(vec![layout.horizontal_edge(i, j)]),
                    (false, false) => {}
                }
            }
        }
        groups
    }

    pub fn groups_ref(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    fn group_norm(h: &[T], group: &[usize]) -> T {
        group.iter().map(|&e| h[e] * h[e]).sum::<T>().sqrt()
    }
}

impl<T: Scalar> FlowSet<T> for IsotropicBall<T> {
    fn len(&self) -> usize {
        self.edge_count
    }

    fn project(&self, h: &mut [T]) {
        for group in &self.groups {
            let norm = Self::group_norm(h, group);
            if norm > self.radius {
                let s = self.radius / norm;
                for &e in group {
                    h[e] = h[e] * s;
                }
            }
        }
    }

    fn edge_bound(&self, _e: usize) -> T {
        self.radius
    }

    fn contains(&self, h: &[T], slack: T) -> bool {
        self.groups
            .iter()
            .all(|group| Self::group_norm(h, group) <= self.radius + slack)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rejects_inverted_bounds() {
        assert!(BoxSpec::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxSpec::new(vec![0.0, f64::NAN], vec![1.0, 1.0]).is_err());
        assert!(BoxSpec::<f64>::ball(3, -1.0).is_err());
    }

    #[test]
    fn box_projection_clamps() {
        let b = BoxSpec::new(vec![-1.0, 0.5], vec![1.0, 0.5]).unwrap();
        let mut h = [3.0, -2.0];
        b.project(&mut h);
        assert_eq!(h, [1.0, 0.5]);
        assert!(b.contains(&h, 0.0));
    }

    #[test]
    fn isotropic_groups_cover_every_edge_once() {
        let g = OrientedGraph::cartesian(3, 4).unwrap();
        let ball = IsotropicBall::new(&g, 1.0).unwrap();
        let mut count = vec![0; g.edge_count()];
        for group in ball.groups_ref() {
            for &e in group {
                count[e] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 1));
        // (M−1)(N−1) pairs plus (M−1) + (N−1) singles.
        assert_eq!(ball.groups_ref().len(), 2 * 3 + 2 + 3);
    }

    #[test]
    fn isotropic_projection_scales_radially() {
        let g = OrientedGraph::cartesian(2, 2).unwrap();
        let ball = IsotropicBall::new(&g, 1.0).unwrap();
        let mut h: Vec<f64> = vec![3.0, 4.0, 0.5, -2.0];
        ball.project(&mut h);
        assert!(ball.contains(&h, 1e-12));
        let pair = &ball.groups_ref()[0];
        let norm = IsotropicBall::group_norm(&h, pair);
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_requires_cartesian_tag() {
        let g = OrientedGraph::path(4).unwrap();
        assert_eq!(IsotropicBall::<f64>::new(&g, 1.0), Err(Error::NotCartesian));
    }
}
