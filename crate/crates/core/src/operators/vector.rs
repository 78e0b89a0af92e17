use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::dot;

/// Sizes of the even and odd blocks.
///
/// Even entries are angular-major: `even[k·n_vertices + i]` for pair k and
/// vertex i. Odd entries are `odd[(k·n_local + a)·n_elements + j]` for pair
/// k, local odd function a and element j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout {
    pub n_vertices: usize,
    pub n_elements: usize,
    pub n_pairs: usize,
    pub n_local: usize,
}

impl Layout {
    pub fn even_len(&self) -> usize {
        self.n_vertices * self.n_pairs
    }

    pub fn odd_len(&self) -> usize {
        self.n_elements * self.n_pairs * self.n_local
    }

    pub fn total(&self) -> usize {
        self.even_len() + self.odd_len()
    }

    pub fn n_odd_angular(&self) -> usize {
        self.n_pairs * self.n_local
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    layout: Layout,
    even: Vec<f64>,
    odd: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(layout: Layout) -> Self {
        Self { layout, even: vec![0.0; layout.even_len()], odd: vec![0.0; layout.odd_len()] }
    }

    pub fn from_parts(layout: Layout, even: Vec<f64>, odd: Vec<f64>) -> Result<Self> {
        if even.len() != layout.even_len() || odd.len() != layout.odd_len() {
            return Err(Error::LayoutMismatch);
        }
        Ok(Self { layout, even, odd })
    }

    /// Concatenated [even; odd] coordinates.
    pub fn from_flat(layout: Layout, flat: &[f64]) -> Result<Self> {
        if flat.len() != layout.total() {
            return Err(Error::LayoutMismatch);
        }
        let (e, o) = flat.split_at(layout.even_len());
        Ok(Self { layout, even: e.to_vec(), odd: o.to_vec() })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.even.clone();
        v.extend_from_slice(&self.odd);
        v
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn even(&self) -> &[f64] {
        &self.even
    }

    pub fn odd(&self) -> &[f64] {
        &self.odd
    }

    pub fn even_mut(&mut self) -> &mut [f64] {
        &mut self.even
    }

    pub fn odd_mut(&mut self) -> &mut [f64] {
        &mut self.odd
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.even, self.odd)
    }

    /// Copy with the odd block zeroed.
    pub fn even_part(&self) -> Self {
        Self { layout: self.layout, even: self.even.clone(), odd: vec![0.0; self.odd.len()] }
    }

    /// Copy with the even block zeroed.
    pub fn odd_part(&self) -> Self {
        Self { layout: self.layout, even: vec![0.0; self.even.len()], odd: self.odd.clone() }
    }

    pub fn check(&self, layout: Layout) -> Result<()> {
        if self.layout != layout || self.even.len() != layout.even_len() || self.odd.len() != layout.odd_len() {
            Err(Error::LayoutMismatch)
        } else {
            Ok(())
        }
    }

    /// self += alpha · x
    pub fn axpy(&mut self, alpha: f64, x: &BlockVector) {
        assert_eq!(self.layout, x.layout);
        for (a, b) in self.even.iter_mut().zip(&x.even) {
            *a += alpha * b;
        }
        for (a, b) in self.odd.iter_mut().zip(&x.odd) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.even.iter_mut().chain(self.odd.iter_mut()).for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut s = self.clone();
        s.scale(alpha);
        s
    }

    pub fn add(&self, x: &BlockVector) -> Self {
        let mut s = self.clone();
        s.axpy(1.0, x);
        s
    }

    pub fn sub(&self, x: &BlockVector) -> Self {
        let mut s = self.clone();
        s.axpy(-1.0, x);
        s
    }

    /// Euclidean inner product of the coordinate vectors.
    pub fn dot(&self, x: &BlockVector) -> f64 {
        dot(&self.even, &x.even) + dot(&self.odd, &x.odd)
    }

    pub fn norm_inf(&self) -> f64 {
        self.even.iter().chain(&self.odd).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.even.iter().chain(&self.odd).all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.even.iter().chain(&self.odd).all(|v| v.is_finite())
    }
}
