//! Dynamic Laplacian eigenproblems on triangulated domains and their linear
//! response to perturbations of the underlying dynamics.
//!
//! The crate discretizes the dynamic Laplacian of a map `T` with linear
//! (P1) Lagrange elements, computes the leading eigenpairs of the resulting
//! pencil `K u = λ M u`, and solves the bordered linear system that yields
//! the derivatives `(u̇, λ̇)` of an eigenpair with respect to a scalar
//! parameter of the dynamics. Level sets of the eigenvectors give
//! finite-time coherent sets; [`coherent`] extracts them, scores them with the
//! dynamic Cheeger value and computes the normal velocity of the level sets.
//!
//! Two discretizations of the stiffness and response matrices are provided:
//!
//! * the Cauchy-Green route ([`assembly::assemble_cg`]), which evaluates the
//!   averaged diffusion tensor at quadrature points and needs Jacobians of
//!   the map, and
//! * the transfer-operator route ([`assembly::assemble_to`]), which only uses
//!   node images and the parameter derivative of the map at nodes.
//!
//! [`experiment`] wires everything into a configurable pipeline that is also
//! exposed through the `dynlap` command line tool.

pub mod assembly;
pub mod coherent;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod export;
pub mod mesh;
pub mod response;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};

/// A point or vector in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
/// A 2×2 real matrix.
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order always follows the index order.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
