//! Continuous piecewise affine vertex fields of one real parameter.

use crate::error::{Error, Result};
use crate::graph::VertexField;
use crate::scalar::Scalar;

/// Affine piece `value + (s − start) · slope` on `[start, next knot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSegment<T> {
    pub start: T,
    pub value: VertexField<T>,
    pub slope: VertexField<T>,
}

impl<T: Scalar> AffineSegment<T> {
    pub fn evaluate(&self, s: T) -> VertexField<T> {
        self.value.add_scaled(s - self.start, &self.slope)
    }
}

/// Piecewise affine path in a parameter `s ≥ 0`.
///
/// Knots are `0 = s_0 < s_1 < … < s_N`; segment `k` covers `[s_k, s_{k+1}]`
/// and the path equals the terminal value from `s_N` on.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffinePath<T> {
    knots: Vec<T>,
    segments: Vec<AffineSegment<T>>,
    terminal: VertexField<T>,
}

impl<T: Scalar> PiecewiseAffinePath<T> {
    pub fn new(knots: Vec<T>, segments: Vec<AffineSegment<T>>, terminal: VertexField<T>) -> Result<Self> {
        if knots.first() != Some(&T::zero()) {
            return Err(Error::InvalidParameter {
                name: "knots",
                value: knots.first().map_or(f64::NAN, |k| k.to_f64_lossy()),
                reason: "the first knot must be 0",
            });
        }
        if let Some(w) = knots.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter {
                name: "knots",
                value: w[1].to_f64_lossy(),
                reason: "knots must be strictly increasing",
            });
        }
        if segments.len() + 1 != knots.len() {
            return Err(Error::LengthMismatch {
                what: "path segments",
                expected: knots.len() - 1,
                found: segments.len(),
            });
        }
        let n = terminal.len();
        for seg in &segments {
            if seg.value.len() != n || seg.slope.len() != n {
                return Err(Error::LengthMismatch {
                    what: "segment field",
                    expected: n,
                    found: seg.value.len().min(seg.slope.len()),
                });
            }
        }
        Ok(Self {
            knots,
            segments,
            terminal,
        })
    }

    /// Constant path.
    pub fn constant(value: VertexField<T>) -> Self {
        Self {
            knots: vec![T::zero()],
            segments: Vec::new(),
            terminal: value,
        }
    }

    /// All knots, starting with 0.
    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Knots after 0: the parameters where the slope changes.
    pub fn breakpoints(&self) -> &[T] {
        &self.knots[1..]
    }

    /// Last knot, after which the path is constant.
    pub fn stationary_from(&self) -> T {
        *self.knots.last().expect("at least one knot")
    }

    pub fn segments(&self) -> &[AffineSegment<T>] {
        &self.segments
    }

    pub fn terminal_value(&self) -> &VertexField<T> {
        &self.terminal
    }

    /// Index of the segment containing `s`, or `None` past the last knot.
    pub fn segment_index(&self, s: T) -> Option<usize> {
        if s >= self.stationary_from() {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= s).saturating_sub(1))
    }

    pub fn evaluate(&self, s: T) -> VertexField<T> {
        match self.segment_index(s) {
            Some(k) => self.segments[k].evaluate(s),
            None => self.terminal.clone(),
        }
    }

    /// Largest jump at any knot between the adjacent pieces.
    pub fn max_discontinuity(&self) -> T {
        let mut worst = T::zero();
        for (k, seg) in self.segments.iter().enumerate() {
            let end = self.knots[k + 1];
            let next = match self.segments.get(k + 1) {
                Some(s) => s.value.clone(),
                None => self.terminal.clone(),
            };
            worst = worst.max(seg.evaluate(end).dist_inf(&next));
        }
        worst
    }
}
