//! Constrained graphical lasso: minimize `Tr(L·C̄) − log det L + ρ‖L‖₁` over
//! Laplacians sharing a fixed set of leading eigenvectors.
//!
//! The l1 term is dualized into the box constraint `‖C − C̄‖∞ ≤ ρ` on the
//! estimated covariance `C = L⁻¹`. One round alternates a block coordinate
//! descent sweep over the rows/columns of `C` with a projection onto the
//! constraint cone; both steps work on the covariance directly and the
//! Laplacian is only assembled spectrally at the end.

use crate::bases::{ModelBasis, TransformMatrix};
use crate::cone::{project_to_cone, PgOptions, ProjectionResult};
use crate::error::{Error, Result};
use crate::spectral::{eig_sym, inner_product, max_abs_diff, SymMatrix};

/// Solver configuration for [`learn_hybrid_laplacian`].
#[derive(Debug, Clone)]
pub struct GlassoConfig {
    /// Shrinkage parameter `ρ >= 0`; the half-width of the dual box.
    pub rho: f64,
    /// Cap on alternation rounds (the combined loop has no convergence
    /// guarantee; the best iterate by objective is returned).
    pub outer_max: usize,
    pub bcd_sweeps_per_round: usize,
    /// Stop when the max-abs change of `C` across a full round drops below
    /// this.
    pub conv_tol: f64,
    pub pg: PgOptions,
}

impl GlassoConfig {
    /// Defaults with the shrinkage heuristic `ρ = 0.01 · mean(diag C̄)`.
    pub fn for_covariance(c_bar: &SymMatrix) -> Self {
        let mean_diag = c_bar.trace() / c_bar.n() as f64;
        Self {
            rho: 0.01 * mean_diag,
            outer_max: 50,
            bcd_sweeps_per_round: 1,
            conv_tol: 1e-6,
            pg: PgOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho < 0.0 {
            return Err(Error::InvalidArgument("rho must be >= 0".into()));
        }
        if self.outer_max < 1 || self.bcd_sweeps_per_round < 1 {
            return Err(Error::InvalidArgument("iteration caps must be >= 1".into()));
        }
        if !(self.conv_tol > 0.0) {
            return Err(Error::InvalidArgument("conv_tol must be > 0".into()));
        }
        self.pg.validate()
    }
}

/// Learned hybrid transform: the Laplacian, its covariance inverse, and the
/// eigenvector rows with the model vectors first.
#[derive(Debug, Clone)]
pub struct HybridTransform {
    pub laplacian: SymMatrix,
    pub covariance: SymMatrix,
    pub basis_rows: TransformMatrix,
    pub model_count: usize,
    /// Objective value after each alternation round.
    pub objective_trace: Vec<f64>,
}

/// `Tr(L·C̄) − log det L + ρ·Σ|Lᵢⱼ|`, log-determinant via eigenvalues.
pub fn glasso_objective(l: &SymMatrix, c_bar: &SymMatrix, rho: f64) -> Result<f64> {
    let tr = inner_product(l, c_bar)?;
    let d = eig_sym(l)?;
    if *d.values.last().expect("n >= 1") <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let log_det: f64 = d.values.iter().map(|v| v.ln()).sum();
    let l1: f64 = l.data().iter().map(|v| v.abs()).sum();
    Ok(tr - log_det + rho * l1)
}

/// In-place Cholesky `A = G·Gᵀ` on a flat row-major buffer. Returns `None`
/// when the matrix is not positive definite.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= g[i * n + k] * g[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                g[i * n + i] = s.sqrt();
            } else {
                g[i * n + j] = s / g[j * n + j];
            }
        }
    }
    Some(g)
}

/// Dense inverse of a PD matrix via Cholesky solves.
fn invert_pd(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let g = cholesky(a, n)?;
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for rhs in 0..n {
        // Forward substitution G·y = e_rhs.
        for i in 0..n {
            let mut s = if i == rhs { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= g[i * n + k] * col[k];
            }
            col[i] = s / g[i * n + i];
        }
        // Back substitution Gᵀ·x = y.
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= g[k * n + i] * col[k];
            }
            col[i] = s / g[i * n + i];
        }
        for i in 0..n {
            inv[i * n + rhs] = col[i];
        }
    }
    Some(inv)
}

const CD_MAX_SWEEPS: usize = 200;

/// Exact minimization of one row/column of `−log det C` under the dual box
/// constraint.
///
/// With row/column `j` removed, the subproblem is the box-constrained QP
/// `min_y yᵀ(C₁₁)⁻¹y` over `‖y − c̄₁₂‖∞ ≤ ρ`, solved by cyclic coordinate
/// descent with exact 1D minimization and box clipping; the diagonal entry
/// becomes `C̄ⱼⱼ + ρ`. The update can only grow the determinant when the
/// current column is box-feasible, so `−log det C` is non-increasing across
/// consecutive calls.
pub fn dual_column_update(
    c: &SymMatrix,
    c_bar: &SymMatrix,
    j: usize,
    rho: f64,
) -> Result<SymMatrix> {
    let n = c.n();
    if c_bar.n() != n {
        return Err(Error::DimensionMismatch(
            "covariance and target dimensions differ".into(),
        ));
    }
    if j >= n {
        return Err(Error::InvalidArgument(format!("column {j} out of range for n = {n}")));
    }
    if rho < 0.0 {
        return Err(Error::InvalidArgument("rho must be >= 0".into()));
    }
    if cholesky(c.data(), n).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    if n == 1 {
        return Ok(SymMatrix::diag(&[c_bar.get(0, 0) + rho]));
    }

    let m = n - 1;
    // C with row/column j deleted, plus the j-th column of C̄ and of C.
    let keep: Vec<usize> = (0..n).filter(|&i| i != j).collect();
    let mut c11 = vec![0.0; m * m];
    for (a, &ia) in keep.iter().enumerate() {
        for (b, &ib) in keep.iter().enumerate() {
            c11[a * m + b] = c.get(ia, ib);
        }
    }
    let q = invert_pd(&c11, m).ok_or(Error::NotPositiveDefinite)?;
    let target: Vec<f64> = keep.iter().map(|&i| c_bar.get(i, j)).collect();

    let mut y: Vec<f64> = keep
        .iter()
        .zip(&target)
        .map(|(&i, t)| c.get(i, j).clamp(t - rho, t + rho))
        .collect();

    if rho == 0.0 {
        y.copy_from_slice(&target);
    } else {
        let scale = target.iter().fold(rho, |acc, t| acc.max(t.abs()));
        let tol = 1e-8 * scale.max(1.0);
        for _ in 0..CD_MAX_SWEEPS {
            let mut max_delta: f64 = 0.0;
            for i in 0..m {
                let mut s = 0.0;
                for k in 0..m {
                    if k != i {
                        s += q[i * m + k] * y[k];
                    }
                }
                let unconstrained = -s / q[i * m + i];
                let clipped = unconstrained.clamp(target[i] - rho, target[i] + rho);
                max_delta = max_delta.max((clipped - y[i]).abs());
                y[i] = clipped;
            }
            if max_delta <= tol {
                break;
            }
        }
    }

    // Schur complement of the updated column; positive keeps C PD.
    let mut quad = 0.0;
    for a in 0..m {
        for b in 0..m {
            quad += y[a] * q[a * m + b] * y[b];
        }
    }
    let new_diag = c_bar.get(j, j) + rho;
    if new_diag - quad <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }

    let mut out = c.clone();
    for (a, &i) in keep.iter().enumerate() {
        out.set_sym(i, j, y[a]);
    }
    out.set_sym(j, j, new_diag);
    Ok(out)
}

/// Learns a hybrid graph Laplacian from an empirical covariance.
///
/// Starts from the dual-feasible `C⁰ = C̄ + ρI`, alternates BCD sweeps of
/// [`dual_column_update`] with cone projection, and assembles the final
/// Laplacian spectrally as `Σ (1/μᵢ)·wᵢwᵢᵀ` from the best-objective round,
/// with no explicit matrix inversion.
pub fn learn_hybrid_laplacian(
    c_bar: &SymMatrix,
    basis: &ModelBasis,
    cfg: &GlassoConfig,
) -> Result<HybridTransform> {
    cfg.validate()?;
    let n = c_bar.n();
    if basis.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} does not match covariance dimension {n}",
            basis.n()
        )));
    }
    if c_bar.max_abs() == 0.0 {
        return Err(Error::Empty("covariance is all-zero"));
    }

    let mut c = c_bar.clone();
    for i in 0..n {
        c.set_sym(i, i, c.get(i, i) + cfg.rho);
    }

    let mut best: Option<(f64, ProjectionResult)> = None;
    let mut objective_trace = Vec::new();
    for _ in 0..cfg.outer_max {
        let round_start = c.clone();
        for _ in 0..cfg.bcd_sweeps_per_round {
            for j in 0..n {
                c = dual_column_update(&c, c_bar, j, cfg.rho)?;
            }
        }
        let proj = project_to_cone(&c, basis, &cfg.pg)?;
        let next = proj.decomp.reconstruct();
        let laplacian = proj.decomp.reconstruct_map(|mu| 1.0 / mu);
        let objective = glasso_objective(&laplacian, c_bar, cfg.rho)?;
        objective_trace.push(objective);
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, proj));
        }
        let delta = max_abs_diff(&next, &round_start);
        c = next;
        if delta <= cfg.conv_tol {
            break;
        }
    }

    let (_, proj) = best.expect("outer_max >= 1 guarantees at least one round");
    let covariance = proj.decomp.reconstruct();
    let laplacian = proj.decomp.reconstruct_map(|mu| 1.0 / mu);
    let basis_rows = TransformMatrix::from_rows(proj.decomp.vectors.clone())?;
    Ok(HybridTransform {
        laplacian,
        covariance,
        basis_rows,
        model_count: basis.k(),
        objective_trace,
    })
}
