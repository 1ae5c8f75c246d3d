//! Universal φ-minimality: a catalog of convex functions, verification that
//! the ROF minimizer minimizes every `Σ φ(u(v))` over `f − α ∂J(0)`, and the
//! search for counterexamples with the isotropic dual set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{
    min_separable_convex_over_polytope, project_onto_div_set, BoxSpec, ConvexScalar, FlowSet, IsotropicBall,
    SolveReport,
};
use crate::error::{Error, Result};
use crate::graph::{OrientedGraph, Tolerances, VertexField};
use crate::rof::{isotropic_rof_solve, rof_solve};
use crate::scalar::Scalar;

/// `|x|^p`, `p ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power<T> {
    p: T,
}

impl<T: Scalar> Power<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p >= T::one() && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p.to_f64_lossy(),
                reason: "power must be at least 1",
            });
        }
        Ok(Self { p })
    }

    pub fn exponent(&self) -> T {
        self.p
    }
}

impl<T: Scalar> ConvexScalar<T> for Power<T> {
    fn evaluate(&self, x: T) -> T {
        x.abs().powf(self.p)
    }

    fn subgradient(&self, x: T) -> T {
        if x == T::zero() {
            return T::zero();
        }
        self.p * x.abs().powf(self.p - T::one()) * x.signum()
    }

    fn descriptor(&self) -> String {
        format!("power(p={})", self.p)
    }

    fn curvature_bound(&self, lo: T, hi: T) -> Option<T> {
        let (p, two) = (self.p, T::of(2.0));
        let far = lo.abs().max(hi.abs());
        if p == T::one() {
            None
        } else if p >= two {
            Some(p * (p - T::one()) * far.powf(p - two))
        } else if lo > T::zero() || hi < T::zero() {
            let near = lo.abs().min(hi.abs());
            Some(p * (p - T::one()) * near.powf(p - two))
        } else {
            None
        }
    }

    fn prox(&self, v: T, step: T) -> T {
        let (a, s) = (v.abs(), v.signum());
        let p = self.p;
        if p == T::one() {
            (a - step).max(T::zero()) * s
        } else if p == T::of(2.0) {
            v / (T::one() + T::of(2.0) * step)
        } else if p == T::of(3.0) {
            // x + 3 step x² = |v| on x ≥ 0
            let c = T::of(3.0) * step;
            s * (T::of(2.0) * a / (T::one() + (T::one() + T::of(4.0) * c * a).sqrt()))
        } else if p == T::of(1.5) {
            // y² + 1.5 step y = |v| with x = y²
            let b = T::of(1.5) * step;
            let y = T::of(2.0) * a / (b + (b * b + T::of(4.0) * a).sqrt());
            s * y * y
        } else {
            crate::engine::prox_by_bisection(self, v, step)
        }
    }
}

/// `√(1 + x²)`, the length element of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Arclength;

impl<T: Scalar> ConvexScalar<T> for Arclength {
    fn evaluate(&self, x: T) -> T {
        (T::one() + x * x).sqrt()
    }

    fn subgradient(&self, x: T) -> T {
        x / (T::one() + x * x).sqrt()
    }

    fn descriptor(&self) -> String {
        "arclength".into()
    }

    fn curvature_bound(&self, _lo: T, _hi: T) -> Option<T> {
        Some(T::one())
    }
}

/// Huber function: `x²/(2δ)` for `|x| ≤ δ`, `|x| − δ/2` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Huber<T> {
    delta: T,
}

impl<T: Scalar> Huber<T> {
    pub fn new(delta: T) -> Result<Self> {
        if !(delta > T::zero() && delta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta.to_f64_lossy(),
                reason: "must be positive and finite",
            });
        }
        Ok(Self { delta })
    }
}

impl<T: Scalar> ConvexScalar<T> for Huber<T> {
    fn evaluate(&self, x: T) -> T {
        if x.abs() <= self.delta {
            x * x / (T::of(2.0) * self.delta)
        } else {
            x.abs() - self.delta * T::of(0.5)
        }
    }

    fn subgradient(&self, x: T) -> T {
        (x / self.delta).max(-T::one()).min(T::one())
    }

    fn descriptor(&self) -> String {
        format!("huber(delta={})", self.delta)
    }

    fn curvature_bound(&self, _lo: T, _hi: T) -> Option<T> {
        Some(T::one() / self.delta)
    }

    fn prox(&self, v: T, step: T) -> T {
        if v.abs() <= self.delta + step {
            v * self.delta / (self.delta + step)
        } else {
            v - step * v.signum()
        }
    }
}

/// `exp((x − shift)/scale)`, shifted so that it stays finite on the data range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedExp<T> {
    shift: T,
    scale: T,
}

impl<T: Scalar> ShiftedExp<T> {
    pub fn new(shift: T, scale: T) -> Result<Self> {
        if !(scale > T::zero() && scale.is_finite() && shift.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale.to_f64_lossy(),
                reason: "must be positive and finite",
            });
        }
        Ok(Self { shift, scale })
    }
}

impl<T: Scalar> ConvexScalar<T> for ShiftedExp<T> {
    fn evaluate(&self, x: T) -> T {
        ((x - self.shift) / self.scale).exp()
    }

    fn subgradient(&self, x: T) -> T {
        self.evaluate(x) / self.scale
    }

    fn descriptor(&self) -> String {
        format!("exp(shift={}, scale={})", self.shift, self.scale)
    }

    fn curvature_bound(&self, _lo: T, hi: T) -> Option<T> {
        Some(self.evaluate(hi) / (self.scale * self.scale))
    }
}

/// Convex piecewise-linear function: slope `slopes[k]` between
/// `knots[k − 1]` and `knots[k]`, value `intercept` at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    knots: Vec<T>,
    slopes: Vec<T>,
    intercept: T,
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn new(knots: Vec<T>, slopes: Vec<T>, intercept: T) -> Result<Self> {
        if slopes.len() != knots.len() + 1 {
            return Err(Error::LengthMismatch {
                what: "piecewise-linear slopes",
                expected: knots.len() + 1,
                found: slopes.len(),
            });
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) || slopes.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter {
                name: "piecewise-linear",
                value: f64::NAN,
                reason: "knots must increase strictly and slopes must not decrease",
            });
        }
        Ok(Self {
            knots,
            slopes,
            intercept,
        })
    }

    /// Random convex function with `pieces` linear pieces, knots uniform in
    /// `[lo, hi]` and sorted slopes uniform in `[−max_slope, max_slope]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, pieces: usize, lo: f64, hi: f64, max_slope: f64) -> Self {
        let pieces = pieces.max(2);
        let mut knots: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(lo..=hi)).collect();
        knots.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        knots.dedup();
        let mut slopes: Vec<f64> = (0..knots.len() + 1).map(|_| rng.gen_range(-max_slope..=max_slope)).collect();
        slopes.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Self {
            knots: knots.into_iter().map(T::of).collect(),
            slopes: slopes.into_iter().map(T::of).collect(),
            intercept: T::zero(),
        }
    }
}

impl<T: Scalar> ConvexScalar<T> for PiecewiseLinear<T> {
    fn evaluate(&self, x: T) -> T {
        let mut value = self.intercept + self.slopes[0] * x;
        for (k, &knot) in self.knots.iter().enumerate() {
            value = value + (self.slopes[k + 1] - self.slopes[k]) * (x - knot).max(T::zero());
        }
        value
    }

    fn subgradient(&self, x: T) -> T {
        self.slopes[self.knots.partition_point(|&k| k < x)]
    }

    fn descriptor(&self) -> String {
        let fmt = |v: &[T]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        format!("piecewise_linear(knots=[{}], slopes=[{}])", fmt(&self.knots), fmt(&self.slopes))
    }
}

/// Named convex function in a catalog.
pub struct CatalogEntry<T> {
    pub name: String,
    pub phi: Box<dyn ConvexScalar<T>>,
    /// `x²`, for which ROF minimality holds by construction.
    pub quadratic: bool,
}

/// Finite stand-in for "every convex φ".
pub struct PhiCatalog<T> {
    entries: Vec<CatalogEntry<T>>,
}

impl<T: Scalar> PhiCatalog<T> {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Powers 1, 1.5, 2, 3, arclength, Huber and a shifted exponential, with
    /// parameters adapted to arguments in `[lo, hi]`.
    pub fn standard(lo: T, hi: T) -> Self {
        let width = (hi - lo).max(T::epsilon().sqrt());
        let mut catalog = Self::empty();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let phi = Power::new(T::of(p)).expect("valid exponent");
            catalog.push(Box::new(phi), p == 2.0);
        }
        catalog.push(Box::new(Arclength), false);
        catalog.push(Box::new(Huber::new(width * T::of(0.1)).expect("positive width")), false);
        let exp = ShiftedExp::new(hi, width * T::of(0.25)).expect("positive width");
        catalog.push(Box::new(exp), false);
        catalog
    }

    /// Adds `count` random piecewise-linear functions with knots in `[lo, hi]`.
    pub fn with_random_piecewise_linear(mut self, seed: u64, count: usize, lo: f64, hi: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let pieces = rng.gen_range(2..=6);
            self.push(Box::new(PiecewiseLinear::random(&mut rng, pieces, lo, hi, 1.0)), false);
        }
        self
    }

    pub fn push(&mut self, phi: Box<dyn ConvexScalar<T>>, quadratic: bool) {
        self.entries.push(CatalogEntry {
            name: phi.descriptor(),
            phi,
            quadratic,
        });
    }

    pub fn entries(&self) -> &[CatalogEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }
}

/// Which total variation, and hence which dual ball, a check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvModel {
    Anisotropic,
    Isotropic,
}

fn dual_set<T: Scalar>(g: &OrientedGraph, alpha: T, model: TvModel) -> Result<Box<dyn FlowSet<T>>> {
    Ok(match model {
        TvModel::Anisotropic => Box::new(BoxSpec::ball(g.edge_count(), alpha)?),
        TvModel::Isotropic => Box::new(IsotropicBall::new(g, alpha)?),
    })
}

/// `Σ φ(candidate)` against an independent minimization of `Σ φ` over the
/// same polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiGap<T> {
    pub at_candidate: T,
    pub minimum: T,
    /// `at_candidate − minimum`.
    pub gap: T,
    /// `gap / (1 + |minimum|)`.
    pub relative_gap: T,
    pub report: SolveReport<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiOutcome<T> {
    pub phi: String,
    pub result: Result<PhiGap<T>>,
}

fn phi_gap<T: Scalar>(
    g: &OrientedGraph,
    base: &VertexField<T>,
    set: &dyn FlowSet<T>,
    candidate: &VertexField<T>,
    entry: &CatalogEntry<T>,
    tol: &Tolerances<T>,
) -> PhiOutcome<T> {
    let at_candidate: T = candidate.iter().map(|&x| entry.phi.evaluate(x)).sum();
    let result = min_separable_convex_over_polytope(g, base, set, entry.phi.as_ref(), tol).map(|(_, report)| {
        let minimum = report.objective;
        let gap = at_candidate - minimum;
        PhiGap {
            at_candidate,
            minimum,
            gap,
            relative_gap: gap / (T::one() + minimum.abs()),
            report,
        }
    });
    PhiOutcome {
        phi: entry.name.clone(),
        result,
    }
}

/// Per-φ comparison of the ROF minimizer with the φ-optimal value.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport<T> {
    pub alpha: T,
    pub outcomes: Vec<PhiOutcome<T>>,
}

impl<T: Scalar> MinimalityReport<T> {
    /// Largest `|relative gap|`, or `None` if some φ failed to solve.
    pub fn worst_relative_gap(&self) -> Option<T> {
        self.outcomes.iter().try_fold(T::zero(), |worst, o| {
            o.result.as_ref().ok().map(|r| worst.max(r.relative_gap.abs()))
        })
    }

    /// Every φ solved and has `|relative gap| ≤ limit`.
    pub fn all_within(&self, limit: T) -> bool {
        self.worst_relative_gap().is_some_and(|w| w <= limit)
    }
}

/// Compares `Σ φ(u_α)` with `min Σ φ(u)` over `u ∈ f − div B_α` for every
/// catalog member.
pub fn verify_universal_minimality<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    alpha: T,
    catalog: &PhiCatalog<T>,
    tol: &Tolerances<T>,
) -> Result<MinimalityReport<T>> {
    let solution = rof_solve(g, f, alpha, tol)?;
    let ball = BoxSpec::ball(g.edge_count(), alpha)?;
    let outcomes = catalog
        .entries()
        .iter()
        .map(|entry| phi_gap(g, f, &ball, &solution.u, entry, tol))
        .collect();
    Ok(MinimalityReport { alpha, outcomes })
}

/// A datum and φ for which the ℓ²-minimizer is not φ-minimal.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiWitness<T> {
    pub field_index: usize,
    pub phi: String,
    pub margin: T,
    pub relative_margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSearch<T> {
    pub witness: Option<PhiWitness<T>>,
    pub fields_tried: usize,
    /// Largest margin seen over all pairs tried.
    pub largest_margin: T,
}

/// Searches `fields × catalog` (without `x²`) for a pair whose φ-gap at the
/// ROF minimizer of `model` exceeds `max(min_margin, 10 · objective_tol ·
/// (1 + |min|))`. Stops at the first witness.
pub fn search_phi_witness<T: Scalar>(
    g: &OrientedGraph,
    fields: &[VertexField<T>],
    alpha: T,
    catalog: &PhiCatalog<T>,
    model: TvModel,
    min_margin: T,
    tol: &Tolerances<T>,
) -> Result<WitnessSearch<T>> {
    let set = dual_set(g, alpha, model)?;
    let mut largest = T::neg_infinity();
    for (index, f) in fields.iter().enumerate() {
        let u = match model {
            TvModel::Anisotropic => rof_solve(g, f, alpha, tol)?.u,
            TvModel::Isotropic => isotropic_rof_solve(g, f, alpha, tol)?.u,
        };
        for entry in catalog.entries().iter().filter(|e| !e.quadratic) {
            let gap = phi_gap(g, f, set.as_ref(), &u, entry, tol).result?;
            largest = largest.max(gap.gap);
            let needed = min_margin.max(T::of(10.0) * tol.objective_tol * (T::one() + gap.minimum.abs()));
            if gap.gap > needed {
                return Ok(WitnessSearch {
                    witness: Some(PhiWitness {
                        field_index: index,
                        phi: entry.name.clone(),
                        margin: gap.gap,
                        relative_margin: gap.relative_gap,
                    }),
                    fields_tried: index + 1,
                    largest_margin: largest,
                });
            }
        }
    }
    Ok(WitnessSearch {
        witness: None,
        fields_tried: fields.len(),
        largest_margin: largest,
    })
}

/// [`search_phi_witness`] with the isotropic model.
pub fn demonstrate_isotropic_failure<T: Scalar>(
    g: &OrientedGraph,
    fields: &[VertexField<T>],
    alpha: T,
    catalog: &PhiCatalog<T>,
    min_margin: T,
    tol: &Tolerances<T>,
) -> Result<WitnessSearch<T>> {
    search_phi_witness(g, fields, alpha, catalog, TvModel::Isotropic, min_margin, tol)
}

/// Outcome for one anchor `a`: how far the projection `x_a` of `a` onto
/// `div S` is from minimizing each `Σ φ(x − a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorTrial<T> {
    pub anchor: VertexField<T>,
    pub projection: VertexField<T>,
    pub outcomes: Vec<PhiOutcome<T>>,
    pub passed: bool,
}

impl<T: Scalar> AnchorTrial<T> {
    pub fn worst_relative_gap(&self) -> Option<T> {
        self.outcomes.iter().try_fold(T::zero(), |worst, o| {
            o.result.as_ref().ok().map(|r| worst.max(r.relative_gap.abs()))
        })
    }
}

/// Checks whether the ℓ²-projection of `anchor` onto `div S` also minimizes
/// `Σ φ(x − anchor)` for every catalog member, within
/// `10 · objective_tol` relative.
pub fn invariant_phi_min_trial<T: Scalar>(
    g: &OrientedGraph,
    alpha: T,
    anchor: &VertexField<T>,
    catalog: &PhiCatalog<T>,
    model: TvModel,
    tol: &Tolerances<T>,
) -> Result<AnchorTrial<T>> {
    let set = dual_set(g, alpha, model)?;
    let projection = project_onto_div_set(g, anchor, set.as_ref(), tol, None)?;
    let x = projection.divergence;
    let shifted = x.sub(anchor);
    let base = anchor.scaled(-T::one());
    let outcomes: Vec<_> = catalog
        .entries()
        .iter()
        .map(|entry| phi_gap(g, &base, set.as_ref(), &shifted, entry, tol))
        .collect();
    let limit = T::of(10.0) * tol.objective_tol;
    let passed = outcomes
        .iter()
        .all(|o| o.result.as_ref().is_ok_and(|r| r.relative_gap.abs() <= limit));
    Ok(AnchorTrial {
        anchor: anchor.clone(),
        projection: x,
        outcomes,
        passed,
    })
}

/// Runs [`invariant_phi_min_trial`] on `trial_count` anchors drawn uniformly
/// from `[−2α·maxdeg, 2α·maxdeg]`, so that most anchors lie outside `div S`.
pub fn empirical_invariant_phi_min_check<T: Scalar>(
    g: &OrientedGraph,
    alpha: T,
    trial_count: usize,
    catalog: &PhiCatalog<T>,
    model: TvModel,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<Vec<AnchorTrial<T>>> {
    if trial_count == 0 {
        return Err(Error::InvalidParameter {
            name: "trial_count",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 2.0 * alpha.to_f64_lossy() * g.max_degree() as f64;
    (0..trial_count)
        .map(|_| {
            let anchor = crate::random::uniform_field(&mut rng, g.vertex_count(), -spread, spread.max(f64::MIN_POSITIVE));
            invariant_phi_min_trial(g, alpha, &anchor, catalog, model, tol)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn spot_check_convexity(phi: &dyn ConvexScalar<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let (x, y) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let mid = phi.evaluate(0.5 * (x + y));
            let avg = 0.5 * (phi.evaluate(x) + phi.evaluate(y));
            assert!(mid <= avg + 1e-9 * (1.0 + avg.abs()), "{}", phi.descriptor());
            let lin = phi.evaluate(x) + phi.subgradient(x) * (y - x);
            assert!(lin <= phi.evaluate(y) + 1e-9 * (1.0 + phi.evaluate(y).abs()), "{}", phi.descriptor());
        }
    }

    #[test]
    fn catalog_members_are_convex() {
        let catalog = PhiCatalog::<f64>::standard(-50.0, 50.0).with_random_piecewise_linear(1, 5, -50.0, 50.0);
        assert_eq!(catalog.len(), 12);
        for entry in catalog.entries() {
            spot_check_convexity(entry.phi.as_ref());
        }
    }

    #[test]
    fn closed_form_proxes_match_bisection() {
        let catalog = PhiCatalog::<f64>::standard(-10.0, 10.0);
        for entry in catalog.entries() {
            for v in [-7.5, -0.3, 0.0, 0.01, 2.0, 9.0] {
                for step in [0.01, 0.5, 3.0] {
                    let closed = entry.phi.prox(v, step);
                    let bisected = crate::engine::prox_by_bisection(entry.phi.as_ref(), v, step);
                    assert!((closed - bisected).abs() < 1e-9, "{} v={v} step={step}", entry.name);
                }
            }
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(Power::new(0.5).is_err());
        assert!(Huber::new(0.0).is_err());
        assert!(ShiftedExp::new(0.0, -1.0).is_err());
        assert!(PiecewiseLinear::new(vec![1.0, 0.0], vec![0.0, 1.0, 2.0], 0.0).is_err());
        assert!(PiecewiseLinear::new(vec![0.0], vec![1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn two_vertex_absolute_value() {
        let g = OrientedGraph::new(2, vec![(0, 1)]).unwrap();
        let f = VertexField::<f64>::from_f64(&[1.0, -1.0]).unwrap();
        let mut catalog = PhiCatalog::empty();
        catalog.push(Box::new(Power::new(1.0).unwrap()), false);
        let report = verify_universal_minimality(&g, &f, 1.0, &catalog, &Tolerances::default()).unwrap();
        let gap = report.outcomes[0].result.as_ref().unwrap();
        assert!(gap.at_candidate.abs() < 1e-12);
        assert!(gap.minimum.abs() < 1e-5);
    }

    #[test]
    fn zero_anchor_projects_to_zero() {
        let (g, _) = instances::counterexample::<f64>();
        let catalog = PhiCatalog::standard(-10.0, 10.0);
        let trial = invariant_phi_min_trial(&g, 1.0, &VertexField::zeros(9), &catalog, TvModel::Anisotropic, &Tolerances::default()).unwrap();
        assert!(trial.projection.norm_inf() < 1e-12);
        assert!(trial.passed);
    }
}
