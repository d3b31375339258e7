//! Fixed transform bases: 1D/2D DCT and ADST, zigzag frequency ordering, and
//! the KLT of an empirical covariance.
//!
//! Vectorization of 2D blocks is raster (row-major) everywhere; bases,
//! residuals and covariances all share that one convention.

use crate::error::{Error, Result};
use crate::spectral::{eig_sym, SymMatrix};

const ORTHO_TOL: f64 = 1e-10;

/// Square analysis transform: `rows` are orthonormal analysis vectors,
/// ordered low-frequency (or high-energy) first.
#[derive(Debug, Clone)]
pub struct TransformMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl TransformMatrix {
    /// Wraps a full set of analysis rows, rejecting non-orthonormal input.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("transform must have at least one row"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "transform rows must form a square matrix".into(),
            ));
        }
        let t = Self { n, rows };
        if t.orthonormality_error() > ORTHO_TOL {
            return Err(Error::NotOrthonormal);
        }
        Ok(t)
    }

    /// Signal length (number of rows).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Analysis: `α = T x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "transform of size {} applied to vector of length {}",
                self.n,
                x.len()
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `‖T·Tᵀ − I‖∞`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let dot: f64 = self.rows[i].iter().zip(&self.rows[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((dot - target).abs());
            }
        }
        err
    }
}

/// The `K` fixed orthonormal prior eigenvectors of a hybrid transform.
#[derive(Debug, Clone)]
pub struct ModelBasis {
    n: usize,
    vectors: Vec<Vec<f64>>,
}

impl ModelBasis {
    /// Wraps `k <= n` orthonormal length-`n` vectors. `k = 0` is the pure
    /// data-driven regime.
    pub fn new(n: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("basis dimension must be >= 1".into()));
        }
        if vectors.len() > n {
            return Err(Error::InvalidArgument(format!(
                "cannot fix {} vectors in dimension {n}",
                vectors.len()
            )));
        }
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(
                "model vectors must all have the basis dimension".into(),
            ));
        }
        for i in 0..vectors.len() {
            for j in i..vectors.len() {
                let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > ORTHO_TOL {
                    return Err(Error::NotOrthonormal);
                }
            }
        }
        Ok(Self { n, vectors })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, vectors: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of fixed vectors `K`.
    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

/// Orthonormal DCT-II: row `k` is
/// `c_k √(2/n) cos(π(2m+1)k / 2n)` with `c₀ = 1/√2`, `c_k = 1` otherwise.
pub fn dct_basis_1d(n: usize) -> Result<TransformMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("basis size must be >= 1".into()));
    }
    let scale = (2.0 / n as f64).sqrt();
    let rows = (0..n)
        .map(|k| {
            let ck = if k == 0 { 1.0 / 2.0_f64.sqrt() } else { 1.0 };
            (0..n)
                .map(|m| {
                    ck * scale
                        * (std::f64::consts::PI * (2 * m + 1) as f64 * k as f64 / (2 * n) as f64)
                            .cos()
                })
                .collect()
        })
        .collect();
    TransformMatrix::from_rows(rows)
}

/// Orthonormal ADST (DST-VII form): row `k` (1-based) is
/// `(2/√(2n+1)) sin((2k−1) m π / (2n+1))` for `m = 1..n`.
///
/// Every basis function vanishes at the `m = 0` boundary, matching the
/// one-sided prediction context of intra residuals.
pub fn adst_basis_1d(n: usize) -> Result<TransformMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("basis size must be >= 1".into()));
    }
    let denom = (2 * n + 1) as f64;
    let scale = 2.0 / denom.sqrt();
    let rows = (1..=n)
        .map(|k| {
            (1..=n)
                .map(|m| {
                    scale * (std::f64::consts::PI * (2 * k - 1) as f64 * m as f64 / denom).sin()
                })
                .collect()
        })
        .collect();
    TransformMatrix::from_rows(rows)
}

/// Standard JPEG-style zigzag scan over `(row, col)` frequency pairs of an
/// `n x n` grid. For n = 4:
/// (0,0),(0,1),(1,0),(2,0),(1,1),(0,2),(0,3),(1,2),(2,1),(3,0),
/// (3,1),(2,2),(1,3),(2,3),(3,2),(3,3).
pub fn zigzag_order(n: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(n * n);
    for d in 0..(2 * n).saturating_sub(1) {
        let lo = d.saturating_sub(n - 1);
        let hi = d.min(n - 1);
        if d % 2 == 1 {
            for r in lo..=hi {
                order.push((r, d - r));
            }
        } else {
            for r in (lo..=hi).rev() {
                order.push((r, d - r));
            }
        }
    }
    order
}

/// Separable 2D basis: rows are raster-vectorized outer products
/// `φ_r φ_cᵀ` (vertical frequency `r`, horizontal frequency `c`), ordered by
/// the zigzag scan over `(r, c)`.
pub fn separable_2d_basis(t: &TransformMatrix) -> TransformMatrix {
    let n = t.n();
    let rows = zigzag_order(n)
        .into_iter()
        .map(|(r, c)| {
            let mut row = vec![0.0; n * n];
            for y in 0..n {
                for x in 0..n {
                    row[y * n + x] = t.rows[r][y] * t.rows[c][x];
                }
            }
            row
        })
        .collect();
    TransformMatrix::from_rows(rows).expect("kronecker product of orthonormal bases is orthonormal")
}

/// KLT: eigenvectors of a covariance as analysis rows, ordered by descending
/// eigenvalue. Rejects matrices that are not PSD within tolerance.
pub fn klt_from_covariance(c: &SymMatrix) -> Result<TransformMatrix> {
    let tol = 1e-8 * c.max_abs().max(1.0);
    let d = eig_sym(c)?;
    if *d.values.last().expect("n >= 1") < -tol {
        return Err(Error::NotPsd);
    }
    TransformMatrix::from_rows(d.vectors)
}

/// First `k` rows of a zigzag-ordered 2D basis as fixed model vectors.
pub fn first_k_model_vectors(t2d: &TransformMatrix, k: usize) -> Result<ModelBasis> {
    if k > t2d.n() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds basis dimension {}",
            t2d.n()
        )));
    }
    ModelBasis::new(t2d.n(), t2d.rows[..k].to_vec())
}
