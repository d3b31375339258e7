//! Symmetric-matrix algebra: the Hilbert-space substrate of the transform
//! learning problem.
//!
//! Everything here is dense and sized for small blocks (N = 16 in the codec
//! pipeline). The eigensolver is a cyclic Jacobi sweep: at this size it is
//! exact to near machine precision and fully deterministic, which matters for
//! reproducible transform dumps.

use crate::error::{Error, Result};

/// Dense real symmetric matrix with row-major storage.
///
/// Construction symmetrizes its input as `(A + Aᵀ)/2`, so `get(i, j)` and
/// `get(j, i)` are bit-identical on every instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds an `n x n` symmetric matrix from row-major entries,
    /// symmetrizing via `(A + Aᵀ)/2`.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be >= 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        let mut data = entries;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from an entry generator; `f(i, j)` and `f(j, i)` are averaged.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(n >= 1, "matrix dimension must be >= 1");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = if i == j { f(i, i) } else { 0.5 * (f(i, j) + f(j, i)) };
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be >= 1");
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = v;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets entry `(i, j)` and its mirror `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Elementwise max-abs norm.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.n);
        let av = self.matvec(v);
        av.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `A += c * v vᵀ`. The update is exactly symmetric since
    /// `v[i] * v[j]` is computed once per unordered pair.
    pub fn add_scaled_outer(&mut self, c: f64, v: &[f64]) {
        assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let upd = c * v[i] * v[j];
                self.data[i * self.n + j] += upd;
                if j != i {
                    self.data[j * self.n + i] += upd;
                }
            }
        }
    }

    pub fn scale_mut(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }
}

/// Elementwise max-abs difference between two same-sized matrices.
pub fn max_abs_diff(a: &SymMatrix, b: &SymMatrix) -> f64 {
    assert_eq!(a.n, b.n, "max_abs_diff requires equal dimensions");
    a.data
        .iter()
        .zip(&b.data)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Hilbert-space inner product `tr(Bᵀ A) = Σᵢⱼ Aᵢⱼ Bᵢⱼ`.
pub fn inner_product(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(format!(
            "inner product of {}x{} and {}x{} matrices",
            a.n, a.n, b.n, b.n
        )));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum())
}

/// Ordered eigen-pairs of a symmetric matrix.
///
/// `values` are sorted descending (covariance-domain convention: the leading
/// slot is the largest eigenvalue `μ₁`); `vectors[i]` is the unit eigenvector
/// paired with `values[i]`.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SpectralDecomp {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `Σ values[i] · vectors[i] vectors[i]ᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_map(|v| v)
    }

    /// Reconstruction with remapped eigenvalues, e.g. `|μ| 1.0 / μ` to invert
    /// a covariance without forming an explicit inverse.
    pub fn reconstruct_map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.n();
        let mut m = SymMatrix::zeros(n);
        for (val, vec) in self.values.iter().zip(&self.vectors) {
            m.add_scaled_outer(f(*val), vec);
        }
        m
    }

    /// Max-abs deviation of `VᵀV` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..self.vectors.len() {
            for j in i..self.vectors.len() {
                let dot: f64 = self.vectors[i].iter().zip(&self.vectors[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((dot - target).abs());
            }
        }
        err
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned descending. Each eigenvector is normalized so
/// that its entry of largest magnitude is non-negative, which makes dumps of
/// derived transforms reproducible.
pub fn eig_sym(a: &SymMatrix) -> Result<SpectralDecomp> {
    let n = a.n;
    let mut m = a.data.clone();
    // Eigenvector accumulator, column q of `vecs` pairs with eigenvalue q.
    let mut vecs = SymMatrix::identity(n).data;
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let stop = 1e-15 * scale * (n * n) as f64;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].abs();
            }
        }
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                // Rotation angle annihilating entry (p, q).
                let theta = 0.5 * (m[q * n + q] - m[p * n + p]) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = vecs[k * n + p];
                    let vkq = vecs[k * n + q];
                    vecs[k * n + p] = c * vkp - s * vkq;
                    vecs[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenNonConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].partial_cmp(&m[i * n + i]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &idx in &order {
        values.push(m[idx * n + idx]);
        let mut v: Vec<f64> = (0..n).map(|k| vecs[k * n + idx]).collect();
        sign_normalize(&mut v);
        vectors.push(v);
    }
    Ok(SpectralDecomp { values, vectors })
}

/// Flips the vector's sign so its entry of largest magnitude is non-negative.
pub(crate) fn sign_normalize(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Dominant eigen-pair: the unit vector attaining the maximum Rayleigh
/// quotient together with its eigenvalue.
pub fn top_eigenvector(a: &SymMatrix) -> Result<(Vec<f64>, f64)> {
    let d = eig_sym(a)?;
    Ok((d.vectors[0].clone(), d.values[0]))
}

/// True iff the minimum eigenvalue is `>= -tol`.
pub fn is_psd(a: &SymMatrix, tol: f64) -> bool {
    let d = eig_sym(a).expect("jacobi converges for symmetric input");
    *d.values.last().expect("n >= 1") >= -tol
}
