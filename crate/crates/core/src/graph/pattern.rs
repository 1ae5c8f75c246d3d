use crate::engine::BoxSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{OrientedGraph, VertexField};

/// Numerical thresholds shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Relative threshold below which a vertex difference counts as zero;
    /// scaled by the data range when that range is nonzero.
    pub flat_tol: T,
    /// Convergence target for projection solvers.
    pub solve_tol: T,
    /// Breakpoint localization width.
    pub event_tol: T,
    /// Relative objective tolerance for generic convex objectives.
    pub objective_tol: T,
    /// Iteration cap for every first-order solver.
    pub max_iterations: usize,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            flat_tol: T::of(T::DEFAULT_FLAT_TOL),
            solve_tol: T::of(T::DEFAULT_SOLVE_TOL),
            event_tol: T::of(T::DEFAULT_EVENT_TOL),
            objective_tol: T::of(T::DEFAULT_OBJECTIVE_TOL),
            max_iterations: 1_000_000,
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("flat_tol", self.flat_tol),
            ("solve_tol", self.solve_tol),
            ("event_tol", self.event_tol),
            ("objective_tol", self.objective_tol),
        ];
        for (name, value) in fields {
            if !(value > T::zero() && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: value.to_f64_lossy(),
                    reason: "must be positive and finite",
                });
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    /// Absolute flatness threshold for data spanning `range`.
    pub fn flat_threshold(&self, range: T) -> T {
        if range > T::zero() {
            self.flat_tol * range
        } else {
            self.flat_tol
        }
    }
}

/// Per-edge label `sgn(u(tail) − u(head))` with small differences read as 0.
///
/// Two fields with the same pattern have the same subdifferential.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        if let Some(index) = labels.iter().position(|l| !(-1..=1).contains(l)) {
            return Err(Error::InvalidParameter {
                name: "sign label",
                value: labels[index] as f64,
                reason: "labels must lie in {-1, 0, 1}",
            });
        }
        Ok(Self(labels))
    }

    pub fn labels(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_all_flat(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    /// Indices of edges with a nonzero label.
    pub fn jump_edges(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k] != 0).collect()
    }

    pub(crate) fn set(&mut self, edge: usize, label: i8) {
        self.0[edge] = label;
    }

    /// Box encoding `radius · B_{1,u}`: nonflat edges pinned to
    /// `−radius · label`, flat edges free in `[−radius, radius]`.
    pub fn subgradient_box<T: Scalar>(&self, radius: T) -> BoxSpec<T> {
        let (lower, upper) = self
            .0
            .iter()
            .map(|&l| match l {
                0 => (-radius, radius),
                _ => {
                    let v = -radius * T::of(l as f64);
                    (v, v)
                }
            })
            .unzip();
        BoxSpec::new_unchecked(lower, upper)
    }
}

/// Sign pattern of `u`, flattening differences at or below
/// `flat_tol · range(u)`.
pub fn sign_pattern<T: Scalar>(
    g: &OrientedGraph,
    u: &VertexField<T>,
    tol: &Tolerances<T>,
) -> Result<SignPattern> {
    g.check_vertex_field("vertex field", u)?;
    let threshold = tol.flat_threshold(u.range());
    Ok(pattern_with_threshold(g, u, threshold))
}

pub(crate) fn pattern_with_threshold<T: Scalar>(
    g: &OrientedGraph,
    u: &VertexField<T>,
    threshold: T,
) -> SignPattern {
    SignPattern(
        g.edges()
            .iter()
            .map(|&(t, h)| {
                let diff = u[t] - u[h];
                if diff.abs() <= threshold {
                    0
                } else if diff > T::zero() {
                    1
                } else {
                    -1
                }
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn constant_field_has_flat_pattern() {
        let g = OrientedGraph::cartesian(3, 4).unwrap();
        let u = VertexField::constant(12, 7.0);
        let p = sign_pattern(&g, &u, &Tolerances::default()).unwrap();
        assert!(p.is_all_flat());
    }

    #[test]
    fn counterexample_datum_pattern() {
        let (g, f) = instances::counterexample::<f64>();
        let p = sign_pattern(&g, &f, &Tolerances::default()).unwrap();
        let v22 = g.vertex_index("v22").unwrap();
        let v32 = g.vertex_index("v32").unwrap();
        let special = g.edges().iter().position(|&e| e == (v32, v22)).unwrap();
        assert_eq!(p.labels()[special], 1);
        assert_eq!(p.jump_edges().len(), 12);
        let shifted = f.map(|v| v + 1234.5);
        assert_eq!(sign_pattern(&g, &shifted, &Tolerances::default()).unwrap(), p);
    }

    #[test]
    fn tolerances_validate() {
        let mut tol = Tolerances::<f64>::default();
        assert!(tol.validate().is_ok());
        tol.solve_tol = 0.0;
        assert!(tol.validate().is_err());
        assert!((Tolerances::<f64>::default().flat_threshold(200.0) - 2e-5).abs() < 1e-18);
        assert_eq!(Tolerances::<f64>::default().flat_threshold(0.0), 1e-7);
    }

    #[test]
    fn labels_outside_range_rejected() {
        assert!(SignPattern::new(vec![0, 2]).is_err());
        assert!(SignPattern::new(vec![-1, 0, 1]).is_ok());
    }
}
