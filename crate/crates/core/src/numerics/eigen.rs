//! Dense symmetric eigensolver (cyclic Jacobi rotations).

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must form a square"));
        }
        Ok(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Symmetric permutation `P C Pᵀ` with `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(perm[i], perm[j]));
            }
        }
        out
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(Error::invalid(format!("non-finite entry at ({i},{j})")));
                }
                if j > i && (v - self.get(j, i)).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i},{j}): {v} vs {}",
                        self.get(j, i)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How to pick the sign of each eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub enum SignConvention {
    /// First component with `|v| > 1e-12` is positive.
    FirstNonzero,
    /// Mean over the given index range is positive; falls back to
    /// `FirstNonzero` when that mean is within 1e-12 of zero.
    BlockMean(std::ops::Range<usize>),
}

/// Eigenvalues sorted descending; `vectors[n]` is the unit eigenvector of `values[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl SymmetricEigenResult {
    pub fn vector(&self, n: usize) -> &[f64] {
        &self.vectors[n]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ λ_n V_n V_nᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n);
        for (lam, v) in self.values.iter().zip(&self.vectors) {
            for i in 0..n {
                for j in 0..n {
                    out.data[i * n + j] += lam * v[i] * v[j];
                }
            }
        }
        out
    }
}

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

fn off_norm(a: &Matrix) -> f64 {
    let n = a.n;
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a.data[i * n + j];
            s += 2.0 * v * v;
        }
    }
    s.sqrt()
}

/// Runs cyclic Jacobi sweeps in place. Returns the sweep count.
fn jacobi_in_place(a: &mut Matrix, mut v: Option<&mut Matrix>) -> Result<usize> {
    let n = a.n;
    let threshold = JACOBI_TOLERANCE * a.frobenius().max(1.0);
    for sweep in 0..=JACOBI_MAX_SWEEPS {
        let off = off_norm(a);
        if off <= threshold {
            return Ok(sweep);
        }
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::NotConverged {
                sweeps: sweep,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.data[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a.data[p * n + p];
                let aqq = a.data[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a.data[k * n + p];
                    let akq = a.data[k * n + q];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    a.data[k * n + p] = nkp;
                    a.data[p * n + k] = nkp;
                    a.data[k * n + q] = nkq;
                    a.data[q * n + k] = nkq;
                }
                a.data[p * n + p] = app - t * apq;
                a.data[q * n + q] = aqq + t * apq;
                a.data[p * n + q] = 0.0;
                a.data[q * n + p] = 0.0;

                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v.data[k * n + p];
                        let vkq = v.data[k * n + q];
                        v.data[k * n + p] = c * vkp - s * vkq;
                        v.data[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    unreachable!("loop returns on the final sweep")
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx
}

fn fix_sign(v: &mut [f64], convention: &SignConvention) {
    let first_nonzero = |v: &[f64]| v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(0.0);
    let flip = match convention {
        SignConvention::FirstNonzero => first_nonzero(v) < 0.0,
        SignConvention::BlockMean(range) => {
            let block = &v[range.clone()];
            let mean = block.iter().sum::<f64>() / block.len().max(1) as f64;
            if mean.abs() > 1e-12 {
                mean < 0.0
            } else {
                first_nonzero(v) < 0.0
            }
        }
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn eig_symmetric(c: &Matrix, convention: &SignConvention) -> Result<SymmetricEigenResult> {
    c.check_symmetric()?;
    if let SignConvention::BlockMean(r) = convention {
        if r.end > c.n || r.is_empty() {
            return Err(Error::invalid(format!(
                "sign block {r:?} outside matrix of dimension {}",
                c.n
            )));
        }
    }
    let n = c.n;
    let mut a = c.clone();
    let mut v = Matrix::identity(n);
    let sweeps = jacobi_in_place(&mut a, Some(&mut v))?;
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let order = descending_order(&diag);
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..n).map(|row| v.get(row, col)).collect();
            fix_sign(&mut vec, convention);
            vec
        })
        .collect();
    Ok(SymmetricEigenResult {
        values,
        vectors,
        sweeps,
    })
}

/// Eigenvalues only, sorted descending.
pub fn eigenvalues_symmetric(c: &Matrix) -> Result<Vec<f64>> {
    c.check_symmetric()?;
    let mut a = c.clone();
    jacobi_in_place(&mut a, None)?;
    let mut values: Vec<f64> = (0..a.n).map(|i| a.get(i, i)).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}
