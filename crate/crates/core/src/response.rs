//! Linear response `(u̇, λ̇)` of an eigenpair of `(K, M)` to a perturbation
//! with stiffness derivative `L = dK/dε`.
//!
//! Differentiating `K_ε u_ε = λ_ε M u_ε` and fixing the normalization by
//! `uᵀM u̇ = 0` gives the bordered system
//!
//! ```text
//! [ K − λM   −Mu ] [ u̇ ]   [ −Lu ]
//! [ uᵀM       0  ] [ λ̇ ] = [  0  ]
//! ```
//!
//! When the eigenvalue belongs to a cluster of numerically equal eigenvalues
//! the matrix above is singular. The cluster is then bordered as a whole,
//! `[K − λM, −MU; UᵀM, 0]`, which fixes `u̇` to be `M`-orthogonal to the
//! whole eigenspace. The solution exists when the perturbation keeps the
//! eigenspace intact (`U_jᵀ L u = 0` for the other cluster members), as is the
//! case for symmetry-induced multiplicities.

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::Serialize;

use crate::sparse::{dot, SparseSymMatrix};
use crate::spectral::EigenPair;
use crate::{Error, Result};

/// Relative spread below which eigenvalues are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Preconditioner shift relative to `1 + |λ|`.
const SHIFT_FRACTION: f64 = 1e-4;
const MAX_SWEEPS: usize = 60;
const SWEEP_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct ResponsePair {
    pub u_dot: Vec<f64>,
    pub lambda_dot: f64,
    /// Relative residual `‖Ax − b‖ / ‖b‖` of the bordered system.
    pub residual: f64,
    /// Size of the eigenvalue cluster that was bordered.
    pub multiplicity: usize,
}

/// Indices of `pairs` whose eigenvalues coincide with `pairs[target]` to
/// `rel_tol`, in ascending order.
pub fn cluster(pairs: &[EigenPair], target: usize, rel_tol: f64) -> Vec<usize> {
    let lam = pairs[target].lambda;
    let scale = lam.abs().max(f64::MIN_POSITIVE);
    (0..pairs.len())
        .filter(|&i| (pairs[i].lambda - lam).abs() <= rel_tol * scale)
        .collect()
}

/// Response of a simple eigenpair.
pub fn solve_response(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    l: &SparseSymMatrix,
    pair: &EigenPair,
) -> Result<ResponsePair> {
    solve_response_cluster(k, m, l, pair, &[])
}

/// Response of `pair` with the other members of its eigenvalue cluster
/// passed in `others` (`M`-orthonormal to `pair.u` and each other).
pub fn solve_response_cluster(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    l: &SparseSymMatrix,
    pair: &EigenPair,
    others: &[&[f64]],
) -> Result<ResponsePair> {
    let n = k.dim();
    if m.dim() != n || l.dim() != n || pair.u.len() != n || others.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidArgument("dimension mismatch in response system".into()));
    }
    let lambda = pair.lambda;
    let mut basis: Vec<&[f64]> = vec![&pair.u];
    basis.extend_from_slice(others);
    let border: Vec<Vec<f64>> = basis.iter().map(|v| m.mul_vec(v)).collect();
    let c = basis.len();

    // The bordered matrix has dense rows, so rather than factoring it the
    // system is solved on the M-orthogonal complement of the cluster with
    // K − (λ + δ)M as a preconditioner; each sweep contracts the error by
    // about δ / gap.
    let shifted = SparseSymMatrix::linear_combination(&[(1.0, k), (-lambda, m)])?;
    let delta = SHIFT_FRACTION * (1.0 + lambda.abs());
    let precond = SparseSymMatrix::linear_combination(&[(1.0, k), (-(lambda + delta), m)])?
        .to_faer()?
        .sp_lu()
        .map_err(|_| Error::SingularBordered { lambda })?;
    // x ← x − U Uᵀ M x
    let project = |x: &mut [f64]| {
        for (u, mu) in basis.iter().zip(&border) {
            let a = dot(mu, x);
            x.iter_mut().zip(u.iter()).for_each(|(xi, ui)| *xi -= a * ui);
        }
    };
    // r ← r − M U Uᵀ r
    let project_dual = |r: &mut [f64]| {
        for (u, mu) in basis.iter().zip(&border) {
            let a = dot(u, r);
            r.iter_mut().zip(mu).for_each(|(ri, mi)| *ri -= a * mi);
        }
    };

    let lu_vec = l.mul_vec(&pair.u);
    let b_norm = dot(&lu_vec, &lu_vec).sqrt();
    let mut x = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        // r = −(I − MUUᵀ)(A x + L u)
        let mut r = shifted.mul_vec(&x);
        r.iter_mut().zip(&lu_vec).for_each(|(ri, li)| *ri = -(*ri + li));
        project_dual(&mut r);
        let r_norm = dot(&r, &r).sqrt();
        residual = if b_norm > 0.0 { r_norm / b_norm } else { r_norm };
        if residual <= SWEEP_TOL || residual >= best {
            break;
        }
        best = residual;
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
        precond.solve_in_place(rhs.as_mut());
        let mut dx: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        project(&mut dx);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularBordered { lambda });
        }
    }
    if residual > 1e-6 {
        return Err(Error::SingularBordered { lambda });
    }
    // border multipliers μ = Uᵀ(A x + L u)
    let ax = shifted.mul_vec(&x);
    let mu: Vec<f64> = basis
        .iter()
        .map(|u| u.iter().zip(ax.iter().zip(&lu_vec)).map(|(ui, (a, l))| ui * (a + l)).sum())
        .collect();
    if c > 1 {
        let coupling = mu[1..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if coupling > 1e-6 * (1.0 + mu[0].abs()) {
            log::warn!("perturbation couples the degenerate eigenspace (max coupling {coupling:e}); the eigenvalue may split");
        }
    }
    Ok(ResponsePair {
        lambda_dot: mu[0],
        u_dot: x,
        residual,
        multiplicity: c,
    })
}

/// Response of `pairs[target]`, bordering its whole eigenvalue cluster when
/// the eigenvalue is not simple.
pub fn solve_response_auto(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    l: &SparseSymMatrix,
    pairs: &[EigenPair],
    target: usize,
) -> Result<ResponsePair> {
    let members = cluster(pairs, target, CLUSTER_TOL);
    if members.last() == Some(&(pairs.len() - 1)) && pairs.len() < k.dim() {
        log::warn!("eigenvalue cluster at index {target} may extend beyond the computed pairs");
    }
    let others: Vec<&[f64]> = members
        .iter()
        .filter(|&&i| i != target)
        .map(|&i| pairs[i].u.as_slice())
        .collect();
    if !others.is_empty() {
        log::info!(
            "eigenvalue {} has multiplicity {}; bordering the whole eigenspace",
            pairs[target].lambda,
            members.len()
        );
    }
    solve_response_cluster(k, m, l, &pairs[target], &others)
}

/// First-order prediction `(λ + ελ̇, u + εu̇)`; the vector is not re-normalized.
pub fn predict(pair: &EigenPair, resp: &ResponsePair, eps: f64) -> (f64, Vec<f64>) {
    let u = pair.u.iter().zip(&resp.u_dot).map(|(a, b)| a + eps * b).collect();
    (pair.lambda + eps * resp.lambda_dot, u)
}

/// `√(vᵀMv)`.
pub fn m_norm(v: &[f64], m: &SparseSymMatrix) -> f64 {
    m.bilinear(v, v).max(0.0).sqrt()
}

/// `‖a − b‖_M / ‖reference‖_M`.
pub fn relative_error(a: &[f64], b: &[f64], reference: &[f64], m: &SparseSymMatrix) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    m_norm(&d, m) / m_norm(reference, m)
}

/// A perturbed eigenpair matched to a reference vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Tracked {
    pub lambda: f64,
    /// `M`-normalized, sign-aligned with the reference.
    pub u: Vec<f64>,
    pub index: usize,
    /// `M`-norm of the projection of the normalized reference onto the matched eigenspace.
    pub overlap: f64,
    pub multiplicity: usize,
}

/// Picks the eigenpair with the largest `|uᵀM·reference|`. If its eigenvalue
/// is part of a cluster, the reference is projected onto the cluster's
/// eigenspace instead, which reduces to sign alignment for simple
/// eigenvalues.
pub fn track(reference: &[f64], pairs: &[EigenPair], m: &SparseSymMatrix) -> Result<Tracked> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no eigenpairs to track".into()));
    }
    let mref = m.mul_vec(reference);
    let ref_norm = dot(reference, &mref).sqrt();
    let overlaps: Vec<f64> = pairs.iter().map(|p| dot(&p.u, &mref) / ref_norm).collect();
    let best = (0..pairs.len())
        .max_by(|&a, &b| overlaps[a].abs().total_cmp(&overlaps[b].abs()))
        .unwrap();
    let members = cluster(pairs, best, CLUSTER_TOL);
    let mut u = vec![0.0; reference.len()];
    let mut overlap2 = 0.0;
    for &i in &members {
        overlap2 += overlaps[i] * overlaps[i];
        u.iter_mut().zip(&pairs[i].u).for_each(|(a, b)| *a += overlaps[i] * b);
    }
    let overlap = overlap2.sqrt();
    if overlap < std::f64::consts::FRAC_1_SQRT_2 {
        return Err(Error::Tracking {
            eps: f64::NAN,
            reason: format!("best eigenspace overlap {overlap:.3} is below 1/√2"),
        });
    }
    let norm = m_norm(&u, m);
    u.iter_mut().for_each(|x| *x /= norm);
    Ok(Tracked {
        lambda: pairs[best].lambda,
        u,
        index: best,
        overlap,
        multiplicity: members.len(),
    })
}

/// One row of a finite-difference check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdRow {
    pub eps: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// `(λ_ε − λ_{−ε}) / 2ε`.
    pub lambda_dot_fd: f64,
    pub lambda_dot: f64,
    /// `|λ̇ − λ̇_fd| / |λ̇|`.
    pub lambda_rel_error: f64,
    /// `‖u̇ − u̇_fd‖_M`.
    pub u_dot_error: f64,
    /// `‖u̇ − u̇_fd‖_M / ‖u̇‖_M`.
    pub u_dot_rel_error: f64,
}

/// Compares a response against central differences of re-solved
/// eigenproblems. `solve(ε)` must return the leading eigenpairs at `ε` for
/// the same mass matrix `m`.
pub fn validate_fd<F>(
    base: &EigenPair,
    resp: &ResponsePair,
    m: &SparseSymMatrix,
    eps_list: &[f64],
    solve: F,
) -> Result<Vec<FdRow>>
where
    F: Fn(f64) -> Result<Vec<EigenPair>> + Sync,
{
    let mut rows = Vec::with_capacity(eps_list.len());
    let u_dot_norm = m_norm(&resp.u_dot, m);
    for &eps in eps_list {
        let tracked = |e: f64| -> Result<Tracked> {
            track(&base.u, &solve(e)?, m).map_err(|err| match err {
                Error::Tracking { reason, .. } => Error::Tracking { eps: e, reason },
                other => other,
            })
        };
        let plus = tracked(eps)?;
        let minus = tracked(-eps)?;
        let lambda_dot_fd = (plus.lambda - minus.lambda) / (2.0 * eps);
        let u_fd: Vec<f64> = plus
            .u
            .iter()
            .zip(&minus.u)
            .map(|(a, b)| (a - b) / (2.0 * eps))
            .collect();
        let diff: Vec<f64> = u_fd.iter().zip(&resp.u_dot).map(|(a, b)| a - b).collect();
        let u_dot_error = m_norm(&diff, m);
        rows.push(FdRow {
            eps,
            lambda_minus: minus.lambda,
            lambda_plus: plus.lambda,
            lambda_dot_fd,
            lambda_dot: resp.lambda_dot,
            lambda_rel_error: (resp.lambda_dot - lambda_dot_fd).abs() / resp.lambda_dot.abs(),
            u_dot_error,
            u_dot_rel_error: if u_dot_norm > 0.0 { u_dot_error / u_dot_norm } else { u_dot_error },
        });
    }
    Ok(rows)
}
