//! Dense real vectors used for iterates, solutions and measurements.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// A dense real vector.
///
/// Entries may transiently hold NaN/Inf (e.g. after a diverging operator
/// evaluation); [`Signal::all_finite`] makes that state detectable, and
/// operations that require finite data check it explicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signal {
    entries: Vec<f64>,
}

impl Signal {
    pub fn from_vec(entries: Vec<f64>) -> Self {
        Signal { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Signal {
            entries: vec![0.0; dim],
        }
    }

    /// Vector with every entry equal to `value`.
    pub fn constant(dim: usize, value: f64) -> Self {
        Signal {
            entries: vec![value; dim],
        }
    }

    /// Basis vector e_i: one at `index`, zero elsewhere.
    pub fn one_hot(dim: usize, index: usize) -> Self {
        assert!(index < dim, "one_hot index {index} out of range {dim}");
        let mut entries = vec![0.0; dim];
        entries[index] = 1.0;
        Signal { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// True iff every entry is exactly 0.0.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    /// Number of entries that are exactly nonzero.
    pub fn support_size(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn norm_l1(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn dot(&self, other: &Signal) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn add(&self, other: &Signal) -> Signal {
        debug_assert_eq!(self.dim(), other.dim());
        Signal {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        debug_assert_eq!(self.dim(), other.dim());
        Signal {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Signal {
        Signal {
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// self + factor * other.
    pub fn add_scaled(&self, factor: f64, other: &Signal) -> Signal {
        debug_assert_eq!(self.dim(), other.dim());
        Signal {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + factor * b)
                .collect(),
        }
    }

    /// Componentwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Signal {
        Signal {
            entries: self.entries.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl Index<usize> for Signal {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for Signal {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.entries[i]
    }
}

impl From<Vec<f64>> for Signal {
    fn from(entries: Vec<f64>) -> Self {
        Signal { entries }
    }
}
