//! Compressed sparse row form of a real symmetric term list on a sector.

use num_complex::Complex64;

use crate::basis::{Amplitude, FermionTerm, SectorBasis};
use crate::error::Result;

/// Real symmetric matrix of a Hermitian term list restricted to one sector.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Assembles the matrix row by row. Every term is Hermitian with real
    /// matrix elements, so the image of basis state `i` is row `i`.
    pub fn from_terms(terms: &[FermionTerm], basis: &SectorBasis) -> Result<Self> {
        for t in terms {
            t.op.validate(basis.n_sites())?;
        }
        let dim = basis.dim();
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut row: Vec<(u32, f64)> = Vec::new();
        row_start.push(0);
        for i in 0..dim {
            let c = basis.config(i);
            row.clear();
            let mut diag = 0.0;
            for t in terms {
                if t.op.is_diagonal() {
                    diag += t.coefficient * t.op.diagonal_value(c);
                } else if let Some((img, sign)) = t.op.off_diagonal(c) {
                    let j = basis
                        .index(img)
                        .expect("number-conserving term leaves the sector");
                    row.push((j as u32, t.coefficient * sign));
                }
            }
            if diag != 0.0 {
                row.push((i as u32, diag));
            }
            row.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == col {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    cols.push(col);
                    values.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Ok(Self {
            dim,
            row_start,
            cols,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `out = self * input`.
    pub fn apply<T: Amplitude>(&self, input: &[T], out: &mut [T]) {
        assert_eq!(input.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = T::default();
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += input[self.cols[k] as usize] * self.values[k];
            }
            *o = acc;
        }
    }

    pub fn apply_new<T: Amplitude>(&self, input: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); self.dim];
        self.apply(input, &mut out);
        out
    }

    /// `<psi|A|psi>` for a complex vector; the imaginary part vanishes for
    /// symmetric real matrices and is dropped.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for (i, a) in psi.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for k in self.row_start[i]..self.row_start[i + 1] {
                row += psi[self.cols[k] as usize] * self.values[k];
            }
            acc += (a.conj() * row).re;
        }
        acc
    }

    /// `(<psi|A|psi>, <psi|A^2|psi>)`, the second computed as `|A psi|^2`.
    pub fn first_two_moments(&self, psi: &[Complex64]) -> (f64, f64) {
        let mut mean = 0.0;
        let mut second = 0.0;
        for (i, a) in psi.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for k in self.row_start[i]..self.row_start[i + 1] {
                row += psi[self.cols[k] as usize] * self.values[k];
            }
            mean += (a.conj() * row).re;
            second += row.norm_sqr();
        }
        (mean, second)
    }

    /// Real-vector expectation value.
    pub fn expectation_real(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, a) in v.iter().enumerate() {
            let mut row = 0.0;
            for k in self.row_start[i]..self.row_start[i + 1] {
                row += v[self.cols[k] as usize] * self.values[k];
            }
            acc += a * row;
        }
        acc
    }

    /// Diagonal entries, or `None` if the matrix has off-diagonal entries.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        let mut d = vec![0.0; self.dim];
        for (i, di) in d.iter_mut().enumerate() {
            for k in self.row_start[i]..self.row_start[i + 1] {
                if self.cols[k] as usize != i {
                    return None;
                }
                *di = self.values[k];
            }
        }
        Some(d)
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                self.values[self.row_start[i]..self.row_start[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Dense copy, for small-sector checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in m.iter_mut().enumerate() {
            for k in self.row_start[i]..self.row_start[i + 1] {
                row[self.cols[k] as usize] += self.values[k];
            }
        }
        m
    }

    /// Sum of two operators on the same sector, `self + scale * other`.
    pub fn add_scaled(&self, other: &SparseOperator, scale: f64) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut row_start = vec![0];
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.dim {
            let (mut a, ae) = (self.row_start[i], self.row_start[i + 1]);
            let (mut b, be) = (other.row_start[i], other.row_start[i + 1]);
            while a < ae || b < be {
                let ca = if a < ae { self.cols[a] } else { u32::MAX };
                let cb = if b < be { other.cols[b] } else { u32::MAX };
                let (c, v) = if ca < cb {
                    a += 1;
                    (ca, self.values[a - 1])
                } else if cb < ca {
                    b += 1;
                    (cb, scale * other.values[b - 1])
                } else {
                    a += 1;
                    b += 1;
                    (ca, self.values[a - 1] + scale * other.values[b - 1])
                };
                if v != 0.0 {
                    cols.push(c);
                    values.push(v);
                }
            }
            row_start.push(cols.len());
        }
        SparseOperator {
            dim: self.dim,
            row_start,
            cols,
            values,
        }
    }
}
