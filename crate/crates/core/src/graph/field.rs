//! Real-valued fields on vertices and edges.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_finite<T: Scalar>(what: &'static str, values: &[T]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

macro_rules! field_type {
    ($name:ident, $what:literal) => {
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name<T>(Vec<T>);

        impl<T: Scalar> $name<T> {
            /// Wraps `values`, rejecting NaN and infinities.
            pub fn new(values: Vec<T>) -> Result<Self> {
                check_finite($what, &values)?;
                Ok(Self(values))
            }

            pub fn zeros(len: usize) -> Self {
                Self(vec![T::zero(); len])
            }

            pub fn constant(len: usize, value: T) -> Self {
                Self(vec![value; len])
            }

            pub fn from_f64(values: &[f64]) -> Result<Self> {
                Self::new(values.iter().map(|&v| T::of(v)).collect())
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[T] {
                &self.0
            }

            pub fn as_mut_slice(&mut self) -> &mut [T] {
                &mut self.0
            }

            pub fn into_vec(self) -> Vec<T> {
                self.0
            }

            pub fn iter(&self) -> std::slice::Iter<'_, T> {
                self.0.iter()
            }

            pub fn to_f64_vec(&self) -> Vec<f64> {
                self.0.iter().map(|v| v.to_f64_lossy()).collect()
            }

            pub fn sum(&self) -> T {
                self.0.iter().copied().sum()
            }

            pub fn norm1(&self) -> T {
                self.0.iter().map(|v| v.abs()).sum()
            }

            pub fn norm2(&self) -> T {
                self.dot(self).sqrt()
            }

            pub fn norm_inf(&self) -> T {
                self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
            }

            pub fn max_value(&self) -> T {
                self.0.iter().copied().fold(T::neg_infinity(), T::max)
            }

            pub fn min_value(&self) -> T {
                self.0.iter().copied().fold(T::infinity(), T::min)
            }

            /// `max − min`, zero for an empty field.
            pub fn range(&self) -> T {
                if self.0.is_empty() {
                    T::zero()
                } else {
                    self.max_value() - self.min_value()
                }
            }

            pub fn dot(&self, other: &Self) -> T {
                self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
            }

            pub fn scaled(&self, s: T) -> Self {
                Self(self.0.iter().map(|&v| v * s).collect())
            }

            /// `self + s · other`.
            pub fn add_scaled(&self, s: T, other: &Self) -> Self {
                Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a + s * b).collect())
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.add_scaled(-T::one(), other)
            }

            pub fn add(&self, other: &Self) -> Self {
                self.add_scaled(T::one(), other)
            }

            pub fn dist_inf(&self, other: &Self) -> T {
                self.sub(other).norm_inf()
            }

            pub fn dist2(&self, other: &Self) -> T {
                self.sub(other).norm2()
            }

            pub fn map(&self, f: impl Fn(T) -> T) -> Self {
                Self(self.0.iter().map(|&v| f(v)).collect())
            }
        }

        impl<T> Index<usize> for $name<T> {
            type Output = T;
            fn index(&self, i: usize) -> &T {
                &self.0[i]
            }
        }

        impl<T> IndexMut<usize> for $name<T> {
            fn index_mut(&mut self, i: usize) -> &mut T {
                &mut self.0[i]
            }
        }

        impl<T> AsRef<[T]> for $name<T> {
            fn as_ref(&self) -> &[T] {
                &self.0
            }
        }
    };
}

field_type!(VertexField, "vertex field");
field_type!(EdgeField, "edge field");

impl<T: Scalar> VertexField<T> {
    pub fn mean(&self) -> T {
        if self.0.is_empty() {
            T::zero()
        } else {
            self.sum() / T::of_usize(self.0.len())
        }
    }

    /// The constant field equal to the average of `self`.
    pub fn mean_field(&self) -> Self {
        Self::constant(self.0.len(), self.mean())
    }
}
