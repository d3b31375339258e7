//! Projection onto the convex cone of PSD matrices sharing a prescribed set
//! of leading eigenvectors.
//!
//! The operator extracts one eigen-pair at a time from a covariance: the
//! first `K` vectors are the fixed model basis, the remaining `N - K` are
//! data-driven. Each data vector maximizes the preserved residual energy and
//! is approximated by a rank-1 relaxation solved with augmented-Lagrangian
//! proximal gradient, the non-smooth part being the indicator of the unit
//! ℓ₂ ball.

use crate::bases::ModelBasis;
use crate::error::{Error, Result};
use crate::spectral::{sign_normalize, SpectralDecomp, SymMatrix, top_eigenvector};

/// Proximal-gradient solver options.
///
/// `gamma` weights the quadratic orthogonality penalty, `step` is the
/// gradient step size, `tol` is the stopping threshold on `‖v⁺ − v‖₂`.
#[derive(Debug, Clone)]
pub struct PgOptions {
    pub gamma: f64,
    pub step: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl PgOptions {
    /// Defaults with a descent-guaranteeing step `0.5 / (1 + 2γ)`: the
    /// smooth part is `2γ`-smooth when the prior columns are orthonormal.
    pub fn with_gamma(gamma: f64) -> Self {
        Self {
            gamma,
            step: 0.5 / (1.0 + 2.0 * gamma),
            max_iters: 1000,
            tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.step > 0.0 && self.tol > 0.0) || self.max_iters < 1 {
            return Err(Error::InvalidArgument(
                "pg options must be positive with max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for PgOptions {
    fn default() -> Self {
        Self::with_gamma(10.0)
    }
}

/// Result of one proximal-gradient eigenvector solve.
#[derive(Debug, Clone)]
pub struct PgOutcome {
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Set when the target direction lies entirely in the span of the
    /// priors; the returned vector is then an arbitrary unit vector
    /// orthogonal to that span.
    pub degenerate: bool,
}

/// Output of [`project_to_cone`]: covariance-domain eigen-pairs with the
/// model vectors occupying the top slots.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub decomp: SpectralDecomp,
    pub model_count: usize,
    /// Frobenius norm of the final residual, a deflation diagnostic.
    pub residual_trace: f64,
}

/// Strictly positive eigenvalue floor: keeps the learned Laplacian and its
/// log-determinant finite on rank-deficient covariances.
pub(crate) fn eigenvalue_floor(c: &SymMatrix) -> f64 {
    1e-8 * (c.trace() / c.n() as f64).max(1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Smooth part of the augmented Lagrangian:
/// `Θ(v) = −eᵀv + ζᵀYᵀv + γ vᵀYYᵀv`.
pub fn pg_objective(v: &[f64], e: &[f64], priors: &[Vec<f64>], zeta: &[f64], gamma: f64) -> f64 {
    let mut obj = -dot(e, v);
    for (u, z) in priors.iter().zip(zeta) {
        let uv = dot(u, v);
        obj += z * uv + gamma * uv * uv;
    }
    obj
}

/// One proximal-gradient step: gradient descent on `Θ` followed by the
/// proximal map of the unit-ball indicator (radial clipping).
pub fn pg_step(
    v: &[f64],
    e: &[f64],
    priors: &[Vec<f64>],
    zeta: &[f64],
    opts: &PgOptions,
) -> Vec<f64> {
    let n = v.len();
    // ∇Θ(v) = −e + Yζ + 2γ·Y(Yᵀv)
    let mut grad: Vec<f64> = e.iter().map(|x| -x).collect();
    for (u, z) in priors.iter().zip(zeta) {
        let coeff = z + 2.0 * opts.gamma * dot(u, v);
        for i in 0..n {
            grad[i] += coeff * u[i];
        }
    }
    let mut next: Vec<f64> = v.iter().zip(&grad).map(|(x, g)| x - opts.step * g).collect();
    let len = norm(&next);
    if len > 1.0 {
        for x in &mut next {
            *x /= len;
        }
    }
    next
}

/// Approximates `argmax eᵀv` over unit vectors orthogonal to the prior
/// columns by interleaved proximal-gradient / multiplier updates.
///
/// The iterate starts at `v⁰ = e/‖e‖₂²` with `ζ⁰ = 0`; each iteration takes
/// one PG step and then one multiplier update `ζ += γ·Yᵀv`. The final vector
/// is renormalized to unit length and satisfies `e·v >= 0`.
pub fn pg_eigenvector(e: &[f64], priors: &[Vec<f64>], opts: &PgOptions) -> Result<PgOutcome> {
    opts.validate()?;
    let n = e.len();
    let e_norm = norm(e);
    if (e_norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "target direction must be unit norm, got ‖e‖ = {e_norm}"
        )));
    }
    if priors.len() >= n {
        return Err(Error::InvalidArgument(format!(
            "{} priors leave no free direction in dimension {n}",
            priors.len()
        )));
    }
    for (i, u) in priors.iter().enumerate() {
        if u.len() != n {
            return Err(Error::DimensionMismatch(
                "prior vectors must match the target dimension".into(),
            ));
        }
        for w in &priors[i + 1..] {
            if dot(u, w).abs() > 1e-8 {
                return Err(Error::NotOrthonormal);
            }
        }
        if (dot(u, u) - 1.0).abs() > 1e-8 {
            return Err(Error::NotOrthonormal);
        }
    }

    if priors.is_empty() {
        // Maximum of e·v over the unit ball is e itself.
        return Ok(PgOutcome { vector: e.to_vec(), iterations: 0, degenerate: false });
    }

    // Degenerate target: e has no component outside span(Y).
    let mut residual = e.to_vec();
    for u in priors {
        let c = dot(u, &residual);
        for i in 0..n {
            residual[i] -= c * u[i];
        }
    }
    if norm(&residual) < 1e-9 {
        let vector = orthonormal_complement_vector(n, priors);
        return Ok(PgOutcome { vector, iterations: 0, degenerate: true });
    }

    let mut v: Vec<f64> = e.iter().map(|x| x / (e_norm * e_norm)).collect();
    let mut zeta = vec![0.0; priors.len()];
    let mut iterations = 0;
    for t in 0..opts.max_iters {
        let next = pg_step(&v, e, priors, &zeta, opts);
        for (z, u) in zeta.iter_mut().zip(priors) {
            *z += opts.gamma * dot(u, &next);
        }
        let delta = v.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        v = next;
        iterations = t + 1;
        if delta <= opts.tol {
            break;
        }
    }

    let len = norm(&v);
    if len < 1e-12 {
        let vector = orthonormal_complement_vector(n, priors);
        return Ok(PgOutcome { vector, iterations, degenerate: true });
    }
    for x in &mut v {
        *x /= len;
    }
    if dot(e, &v) < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    Ok(PgOutcome { vector: v, iterations, degenerate: false })
}

/// Deterministic unit vector orthogonal to all priors: Gram-Schmidt over the
/// standard basis, first direction with a usable residual wins.
fn orthonormal_complement_vector(n: usize, priors: &[Vec<f64>]) -> Vec<f64> {
    for axis in 0..n {
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        for u in priors {
            let c = dot(u, &v);
            for i in 0..n {
                v[i] -= c * u[i];
            }
        }
        let len = norm(&v);
        if len > 1e-6 {
            for x in &mut v {
                *x /= len;
            }
            return v;
        }
    }
    unreachable!("fewer priors than dimensions always leave a free axis")
}

/// Re-orthogonalizes `v` against `priors` (two Gram-Schmidt passes) and
/// renormalizes. The PG output is orthogonal to within its tolerance; this
/// trims it to machine precision so spectral reconstructions stay exact.
fn orthonormalize_against(v: &mut Vec<f64>, priors: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in priors {
            let c = dot(u, v);
            for i in 0..v.len() {
                v[i] -= c * u[i];
            }
        }
    }
    let len = norm(v);
    if len > 0.0 {
        for x in v.iter_mut() {
            *x /= len;
        }
    }
}

/// Projects a covariance onto the cone of PSD matrices whose first
/// `basis.k()` covariance-domain eigenvectors (largest eigenvalues) are the
/// model basis.
///
/// Sequential extraction: the model vectors take `μ = ⟨E, u uᵀ⟩` clamped to
/// keep the sequence non-increasing and above the eigenvalue floor; the data
/// vectors come from [`pg_eigenvector`] applied to the dominant residual
/// eigenvector, with all previously accepted vectors as priors. Each accepted
/// pair is deflated from the residual.
pub fn project_to_cone(
    c: &SymMatrix,
    basis: &ModelBasis,
    opts: &PgOptions,
) -> Result<ProjectionResult> {
    let n = c.n();
    if basis.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} does not match matrix dimension {n}",
            basis.n()
        )));
    }
    opts.validate()?;
    let floor = eigenvalue_floor(c);
    let mut residual = c.clone();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut values: Vec<f64> = Vec::with_capacity(n);
    let mut mu_prev = f64::INFINITY;

    for u in basis.vectors() {
        let mu = residual.quad_form(u).min(mu_prev).max(floor);
        residual.add_scaled_outer(-mu, u);
        vectors.push(u.clone());
        values.push(mu);
        mu_prev = mu;
    }

    for _ in basis.k()..n {
        let (top, _) = top_eigenvector(&residual)?;
        let outcome = pg_eigenvector(&top, &vectors, opts)?;
        let mut v = outcome.vector;
        orthonormalize_against(&mut v, &vectors);
        sign_normalize(&mut v);
        let mu = residual.quad_form(&v).min(mu_prev).max(floor);
        residual.add_scaled_outer(-mu, &v);
        vectors.push(v);
        values.push(mu);
        mu_prev = mu;
    }

    Ok(ProjectionResult {
        decomp: SpectralDecomp { values, vectors },
        model_count: basis.k(),
        residual_trace: residual.frobenius(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{adst_basis_1d, first_k_model_vectors, separable_2d_basis};
    use crate::spectral::eig_sym;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {a} ~ {b} within {tol}");
    }

    /// Splitmix-style deterministic test RNG.
    struct TestRng(u64);

    impl TestRng {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (self.0 >> 11) as f64 / (1u64 << 53) as f64;
            2.0 * x - 1.0
        }

        fn unit_vector(&mut self, n: usize) -> Vec<f64> {
            loop {
                let v: Vec<f64> = (0..n).map(|_| self.next_f64()).collect();
                let len = norm(&v);
                if len > 1e-3 {
                    return v.into_iter().map(|x| x / len).collect();
                }
            }
        }

        /// Random PSD matrix with eigenvalues spread over [lo, hi].
        fn psd_matrix(&mut self, n: usize, lo: f64, hi: f64) -> SymMatrix {
            let basis = self.orthonormal_set(n, n);
            let mut m = SymMatrix::zeros(n);
            for (i, v) in basis.iter().enumerate() {
                let lam = lo + (hi - lo) * (i as f64 + self.next_f64().abs()) / n as f64;
                m.add_scaled_outer(lam, v);
            }
            m
        }

        fn orthonormal_set(&mut self, n: usize, k: usize) -> Vec<Vec<f64>> {
            let mut set: Vec<Vec<f64>> = Vec::new();
            while set.len() < k {
                let mut v = self.unit_vector(n);
                for u in &set {
                    let c = dot(u, &v);
                    for i in 0..n {
                        v[i] -= c * u[i];
                    }
                }
                let len = norm(&v);
                if len > 1e-3 {
                    for x in &mut v {
                        *x /= len;
                    }
                    set.push(v);
                }
            }
            set
        }
    }

    #[test]
    fn pg_empty_priors_returns_target() {
        let e = vec![0.0, 1.0, 0.0];
        let out = pg_eigenvector(&e, &[], &PgOptions::default()).unwrap();
        assert_eq!(out.vector, e);
        assert!(!out.degenerate);
    }

    #[test]
    fn pg_orthogonal_target_is_fixed_point() {
        let e = vec![0.0, 0.0, 1.0];
        let priors = vec![vec![1.0, 0.0, 0.0]];
        let out = pg_eigenvector(&e, &priors, &PgOptions::default()).unwrap();
        assert_close(dot(&out.vector, &e), 1.0, 1e-9);
    }

    #[test]
    fn pg_degenerate_target_flagged() {
        let e = vec![1.0, 0.0, 0.0];
        let priors = vec![vec![1.0, 0.0, 0.0]];
        let out = pg_eigenvector(&e, &priors, &PgOptions::default()).unwrap();
        assert!(out.degenerate);
        assert_close(norm(&out.vector), 1.0, 1e-12);
        assert_close(dot(&out.vector, &priors[0]), 0.0, 1e-9);
    }

    #[test]
    fn pg_rejects_bad_input() {
        let opts = PgOptions::default();
        assert!(pg_eigenvector(&[0.5, 0.0], &[], &opts).is_err());
        let skewed = vec![vec![1.0, 0.0], vec![0.9, 0.1]];
        assert!(pg_eigenvector(&[1.0, 0.0], &skewed[..1], &opts).is_ok());
        let e = vec![1.0, 0.0, 0.0];
        let not_ortho = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.8, 0.6]];
        assert!(matches!(
            pg_eigenvector(&e, &not_ortho, &opts),
            Err(Error::NotOrthonormal)
        ));
    }

    #[test]
    fn pg_matches_closed_form_projection() {
        // Oracle for the relaxed problem: v* = P·e / ‖P·e‖ with P = I − YYᵀ.
        let mut rng = TestRng(0x5eed);
        let opts = PgOptions::default();
        for trial in 0..100 {
            let n = 16;
            let k = trial % 9;
            let priors = rng.orthonormal_set(n, k);
            let e = rng.unit_vector(n);
            let mut proj = e.clone();
            for u in &priors {
                let c = dot(u, &proj);
                for i in 0..n {
                    proj[i] -= c * u[i];
                }
            }
            let plen = norm(&proj);
            if plen < 0.05 {
                continue;
            }
            let oracle: Vec<f64> = proj.iter().map(|x| x / plen).collect();
            let out = pg_eigenvector(&e, &priors, &opts).unwrap();
            let cos = dot(&out.vector, &oracle);
            assert!(1.0 - cos <= 1e-4, "trial {trial}: cosine distance {}", 1.0 - cos);
            for u in &priors {
                assert!(dot(u, &out.vector).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn pg_step_descends_objective() {
        // Each prox-gradient step is non-increasing in Θ + Φ₁ when
        // step <= 1/(2γ), ζ held fixed during the step.
        let mut rng = TestRng(42);
        let n = 16;
        let priors = rng.orthonormal_set(n, 5);
        let e = rng.unit_vector(n);
        let opts = PgOptions::default();
        assert!(opts.step <= 1.0 / (2.0 * opts.gamma));
        let mut v: Vec<f64> = e.clone();
        let mut zeta = vec![0.0; priors.len()];
        for _ in 0..50 {
            let before = pg_objective(&v, &e, &priors, &zeta, opts.gamma);
            let next = pg_step(&v, &e, &priors, &zeta, &opts);
            let after = pg_objective(&next, &e, &priors, &zeta, opts.gamma);
            assert!(after <= before + 1e-12);
            for (z, u) in zeta.iter_mut().zip(&priors) {
                *z += opts.gamma * dot(u, &next);
            }
            v = next;
        }
    }

    #[test]
    fn project_all_model_vectors_uses_no_pg() {
        // K = N: output vectors are exactly the basis, values are clamped
        // inner products.
        let t2 = separable_2d_basis(&adst_basis_1d(4).unwrap());
        let basis = first_k_model_vectors(&t2, 16).unwrap();
        let mut rng = TestRng(7);
        let c = rng.psd_matrix(16, 0.5, 8.0);
        let res = project_to_cone(&c, &basis, &PgOptions::default()).unwrap();
        for (got, want) in res.decomp.vectors.iter().zip(basis.vectors()) {
            assert_eq!(got, want);
        }
        for w in res.decomp.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn project_without_model_matches_eigensolver() {
        let mut rng = TestRng(11);
        let c = rng.psd_matrix(16, 0.5, 12.0);
        let res = project_to_cone(&c, &ModelBasis::empty(16), &PgOptions::default()).unwrap();
        let eig = eig_sym(&c).unwrap();
        for (got, want) in res.decomp.values.iter().zip(&eig.values) {
            assert!((got - want).abs() <= 1e-4 * want.abs().max(1.0), "{got} vs {want}");
        }
        assert!(crate::spectral::max_abs_diff(&res.decomp.reconstruct(), &c) < 1e-6);
    }

    #[test]
    fn project_isotropic_covariance() {
        // c = I₄ with one arbitrary fixed vector: all μ = 1, reconstruction
        // returns I₄.
        let c = SymMatrix::identity(4);
        let u = vec![0.5, 0.5, 0.5, 0.5];
        let basis = ModelBasis::new(4, vec![u]).unwrap();
        let res = project_to_cone(&c, &basis, &PgOptions::default()).unwrap();
        for v in &res.decomp.values {
            assert_close(*v, 1.0, 1e-9);
        }
        assert!(crate::spectral::max_abs_diff(&res.decomp.reconstruct(), &c) <= 1e-8);
    }

    #[test]
    fn project_dimension_mismatch() {
        let c = SymMatrix::identity(4);
        let basis = ModelBasis::empty(5);
        assert!(project_to_cone(&c, &basis, &PgOptions::default()).is_err());
    }

    #[test]
    fn projection_is_idempotent() {
        let t2 = separable_2d_basis(&adst_basis_1d(4).unwrap());
        let mut rng = TestRng(0xA11CE);
        for k in [0usize, 1, 4, 7, 16] {
            let basis = first_k_model_vectors(&t2, k).unwrap();
            let c = rng.psd_matrix(16, 0.4, 10.0);
            let first = project_to_cone(&c, &basis, &PgOptions::default()).unwrap();
            let again =
                project_to_cone(&first.decomp.reconstruct(), &basis, &PgOptions::default())
                    .unwrap();
            for (a, b) in first.decomp.values.iter().zip(&again.decomp.values) {
                assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
            }
            for (va, vb) in first.decomp.vectors.iter().zip(&again.decomp.vectors) {
                let cos = dot(va, vb).abs();
                assert!(1.0 - cos <= 1e-6, "k={k}: cosine distance {}", 1.0 - cos);
            }
        }
    }

    #[test]
    fn intermediate_residuals_stay_psd() {
        // Deflation is linear, so the residual after step j is recoverable
        // from the output: E_j = c − Σ_{i<j} μᵢ vᵢ vᵢᵀ. Each one must be PSD.
        let t2 = separable_2d_basis(&adst_basis_1d(4).unwrap());
        let basis = first_k_model_vectors(&t2, 4).unwrap();
        let mut rng = TestRng(99);
        let c = rng.psd_matrix(16, 0.2, 6.0);
        let res = project_to_cone(&c, &basis, &PgOptions::default()).unwrap();
        assert!(res.decomp.orthonormality_error() <= 1e-6);
        for w in res.decomp.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let floor = eigenvalue_floor(&c);
        assert!(res.decomp.values.iter().all(|v| *v >= floor));
        assert!(crate::spectral::is_psd(&res.decomp.reconstruct(), 1e-8));

        let tol = 1e-6 * c.max_abs().max(1.0);
        let mut residual = c.clone();
        for (mu, v) in res.decomp.values.iter().zip(&res.decomp.vectors) {
            residual.add_scaled_outer(-mu, v);
            assert!(crate::spectral::is_psd(&residual, tol));
        }
    }
}
