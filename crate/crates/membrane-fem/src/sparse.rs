//! Symmetric sparse matrices stored as the upper triangle in CSR form with
//! sorted, deduplicated entries. Symmetry is exact by construction: only one
//! triangle is ever stored.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from (row, col, value) triplets. Entries are folded onto the
    /// upper triangle, duplicates are summed, and the result is sorted, so
    /// the stored form is independent of triplet order up to rounding.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut folded: Vec<(usize, usize, f64)> = triplets
            .iter()
            .map(|&(i, j, v)| {
                assert!(i < dim && j < dim, "triplet ({i}, {j}) out of bounds");
                (i.min(j), i.max(j), v)
            })
            .collect();
        folded.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(folded.len());
        let mut values: Vec<f64> = Vec::with_capacity(folded.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in folded {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz_upper(&self) -> usize {
        self.values.len()
    }

    /// Upper-triangle CSR views: (row_ptr, col_idx, values).
    pub fn upper_csr(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.row_ptr, &self.col_idx, &self.values)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = (i.min(j), i.max(j));
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// y = A x with the full symmetric matrix.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.fill(0.0);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let v = self.values[k];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
    }

    /// x^T A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim];
        self.mul_vec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// alpha * self + beta * other, over the union sparsity pattern.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "linear combination of dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let mut triplets =
            Vec::with_capacity(self.values.len() + other.values.len());
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                triplets.push((i, self.col_idx[k], alpha * self.values[k]));
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                triplets.push((i, other.col_idx[k], beta * other.values[k]));
            }
        }
        Ok(Self::from_triplets(self.dim, &triplets))
    }

    /// Returns a copy with rows and columns of masked indices zeroed
    /// (entries dropped). Used for Dirichlet elimination.
    pub fn eliminate(&self, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), self.dim);
        let mut triplets = Vec::with_capacity(self.values.len());
        for i in 0..self.dim {
            if mask[i] {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if !mask[j] {
                    triplets.push((i, j, self.values[k]));
                }
            }
        }
        Self::from_triplets(self.dim, &triplets)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut dense = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                dense[(i, j)] = self.values[k];
                dense[(j, i)] = self.values[k];
            }
        }
        dense
    }

    /// Iterates stored upper-triangle entries as (i, j, value) with i <= j.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }
}
