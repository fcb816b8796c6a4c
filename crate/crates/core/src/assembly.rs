//! Assembly of the mass matrix `M`, stiffness matrix `K` and response
//! matrix `L = dK/dε` for P1 elements.
//!
//! Element loops run in parallel; element matrices are collected in element
//! order and scattered sequentially, so results are bitwise reproducible.

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsModel;
use crate::mesh::{delaunay, BoundaryCondition, Domain, ElementGeometry, QuadratureRule, TriMesh};
use crate::sparse::SparseSymMatrix;
use crate::{par_map, Error, Mat2, Result, Vec2};

/// Largest admissible condition number of `DT`, the matrix actually inverted.
/// `DTᵀDT` is never formed, so its condition number (the square) may exceed it.
pub const MAX_CONDITION: f64 = 1e12;

/// A symmetric-matrix-valued coefficient `x ↦ A(x)`.
pub trait CoeffField: Sync {
    fn eval(&self, x: Vec2) -> Result<Mat2>;
}

/// Coefficient given by a closure.
pub struct FnField<F>(pub F);

impl<F> CoeffField for FnField<F>
where
    F: Fn(Vec2) -> Mat2 + Sync,
{
    fn eval(&self, x: Vec2) -> Result<Mat2> {
        Ok((self.0)(x))
    }
}

/// `A₀ = ½(I + (DT₀ᵀDT₀)⁻¹)`.
pub struct A0Field<'a> {
    model: &'a dyn DynamicsModel,
}

/// `Ȧ₀ = −(DT₀⁻¹ DṪ₀ DT₀⁻¹ DT₀⁻ᵀ)^sym`.
pub struct A0DotField<'a> {
    model: &'a dyn DynamicsModel,
}

pub fn coeff_a0(model: &dyn DynamicsModel) -> A0Field<'_> {
    A0Field { model }
}

pub fn coeff_a0dot(model: &dyn DynamicsModel) -> A0DotField<'_> {
    A0DotField { model }
}

impl CoeffField for A0Field<'_> {
    fn eval(&self, x: Vec2) -> Result<Mat2> {
        a0_from_jacobian(&self.model.jacobian(x)?, x)
    }
}

impl CoeffField for A0DotField<'_> {
    fn eval(&self, x: Vec2) -> Result<Mat2> {
        let l = self.model.linearize(x)?;
        a0dot_from_jacobians(&l.jacobian, &l.jacobian_dot, x)
    }
}

fn symmetric_part(q: &Mat2) -> Mat2 {
    (q + q.transpose()) * 0.5
}

fn checked_inverse(j: &Mat2, at: Vec2) -> Result<Mat2> {
    // σ₁/σ₂ = σ₁²/|det J| with σ₁² the top eigenvalue of JᵀJ
    let c = j.transpose() * j;
    let tr = c.trace();
    let top = 0.5 * tr + (0.25 * tr * tr - c.determinant()).max(0.0).sqrt();
    let det = j.determinant().abs();
    let cond = if det > 0.0 { top / det } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularJacobian {
            point: [at.x, at.y],
            cond,
        });
    }
    j.try_inverse().ok_or(Error::SingularJacobian {
        point: [at.x, at.y],
        cond,
    })
}

/// `½(I + (JᵀJ)⁻¹)` for a Jacobian `J` evaluated at `at`.
pub fn a0_from_jacobian(j: &Mat2, at: Vec2) -> Result<Mat2> {
    let inv = checked_inverse(j, at)?;
    Ok((Mat2::identity() + inv * inv.transpose()) * 0.5)
}

/// `−(J⁻¹ J̇ J⁻¹ J⁻ᵀ)^sym`.
pub fn a0dot_from_jacobians(j: &Mat2, jdot: &Mat2, at: Vec2) -> Result<Mat2> {
    let inv = checked_inverse(j, at)?;
    Ok(-symmetric_part(&(inv * jdot * inv * inv.transpose())))
}

fn element_geometries(mesh: &TriMesh) -> Result<Vec<ElementGeometry>> {
    par_map(mesh.triangles().len(), |t| mesh.element_geometry(t))
        .into_iter()
        .collect()
}

fn scatter(mesh: &TriMesh, elems: &[[[f64; 3]; 3]]) -> SparseSymMatrix {
    let mut trip = Vec::with_capacity(9 * elems.len());
    for (t, e) in elems.iter().enumerate() {
        let dofs = mesh.dofs_of(t);
        for i in 0..3 {
            for j in 0..3 {
                trip.push((dofs[i], dofs[j], e[i][j]));
            }
        }
    }
    SparseSymMatrix::from_triplets(mesh.n_dofs(), trip)
}

/// `(∫ A ∇φ_j · ∇φ_i)` for a constant `A` on one element, scaled by `scale`.
fn element_stiffness(g: &ElementGeometry, a: &Mat2, scale: f64) -> [[f64; 3]; 3] {
    let mut e = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = scale * (a * g.grad[j]).dot(&g.grad[i]);
            e[i][j] = v;
            e[j][i] = v;
        }
    }
    e
}

/// Consistent P1 mass matrix, `(area/12)·[[2,1,1],[1,2,1],[1,1,2]]` per element.
pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseSymMatrix> {
    let geo = element_geometries(mesh)?;
    let elems: Vec<[[f64; 3]; 3]> = geo
        .iter()
        .map(|g| {
            let d = g.area / 6.0;
            let o = g.area / 12.0;
            [[d, o, o], [o, d, o], [o, o, d]]
        })
        .collect();
    Ok(scatter(mesh, &elems))
}

/// Positive semi-definite Laplace stiffness `(∫ ∇φ_j · ∇φ_k)`.
pub fn assemble_laplacian(mesh: &TriMesh) -> Result<SparseSymMatrix> {
    let geo = element_geometries(mesh)?;
    let id = Mat2::identity();
    let elems: Vec<_> = geo.iter().map(|g| element_stiffness(g, &id, g.area)).collect();
    Ok(scatter(mesh, &elems))
}

/// `−(∫ A ∇φ_j · ∇φ_k)` with `A` sampled at the physical quadrature points.
///
/// With `field = A₀` this is `K`; with `field = Ȧ₀` it is `L`.
pub fn assemble_stiffness_cg(
    mesh: &TriMesh,
    field: &dyn CoeffField,
    rule: &QuadratureRule,
) -> Result<SparseSymMatrix> {
    let elems: Vec<Result<[[f64; 3]; 3]>> = par_map(mesh.triangles().len(), |t| {
        let g = mesh.element_geometry(t)?;
        let pts = rule.map_points(&mesh.vertex_coords(t));
        let mut a = Mat2::zeros();
        for (x, w) in pts.iter().zip(&rule.weights) {
            let v = field.eval(*x).map_err(|e| Error::Element {
                element: t,
                source: Box::new(e),
            })?;
            a += v * *w;
        }
        // P1 gradients are constant, so the quadrature only averages A
        Ok(element_stiffness(&g, &a, -g.area))
    });
    let elems: Vec<_> = elems.into_iter().collect::<Result<_>>()?;
    Ok(scatter(mesh, &elems))
}

/// Stiffness and response matrices from the Cauchy-Green route.
#[derive(Clone, Debug)]
pub struct CgOperators {
    pub stiffness: SparseSymMatrix,
    pub response: SparseSymMatrix,
}

/// Assembles `K` and `L` together, linearizing the dynamics once per
/// (element, quadrature point).
pub fn assemble_cg(
    mesh: &TriMesh,
    model: &dyn DynamicsModel,
    rule: &QuadratureRule,
) -> Result<CgOperators> {
    let elems: Vec<Result<([[f64; 3]; 3], [[f64; 3]; 3])>> = par_map(mesh.triangles().len(), |t| {
        let g = mesh.element_geometry(t)?;
        let pts = rule.map_points(&mesh.vertex_coords(t));
        let mut a = Mat2::zeros();
        let mut adot = Mat2::zeros();
        for (x, w) in pts.iter().zip(&rule.weights) {
            let wrap = |e: Error| Error::Element {
                element: t,
                source: Box::new(e),
            };
            let l = model.linearize(*x).map_err(wrap)?;
            a += a0_from_jacobian(&l.jacobian, *x).map_err(wrap)? * *w;
            adot += a0dot_from_jacobians(&l.jacobian, &l.jacobian_dot, *x).map_err(wrap)? * *w;
        }
        Ok((
            element_stiffness(&g, &a, -g.area),
            element_stiffness(&g, &adot, -g.area),
        ))
    });
    let elems: Vec<_> = elems.into_iter().collect::<Result<_>>()?;
    let k: Vec<_> = elems.iter().map(|e| e.0).collect();
    let l: Vec<_> = elems.iter().map(|e| e.1).collect();
    Ok(CgOperators {
        stiffness: scatter(mesh, &k),
        response: scatter(mesh, &l),
    })
}

/// Stiffness and response matrices from the transfer-operator route.
#[derive(Clone, Debug)]
pub struct ToOperators {
    pub stiffness: SparseSymMatrix,
    pub response: SparseSymMatrix,
    /// Triangulation of the node images `T₀(xᵢ)`; node `i` is the image of DOF `i`.
    pub image_mesh: TriMesh,
}

/// Snaps images of boundary nodes onto the side of an invariant rectangle
/// their preimage lies on and clamps all images into it, so the image
/// triangulation has no slivers along the boundary. Only the coordinate normal
/// to the side is touched: images contracted towards a corner stay distinct.
fn snap_to_rectangle(mesh: &TriMesh, images: &mut [Vec2], min: [f64; 2], max: [f64; 2]) {
    let tol = 1e-6 * (max[0] - min[0]).max(max[1] - min[1]);
    let coords = mesh.dof_coords();
    for &b in mesh.boundary_nodes() {
        let x = coords[b];
        let p = &mut images[b];
        for k in 0..2 {
            if (x[k] - min[k]).abs() <= tol {
                p[k] = min[k];
            } else if (x[k] - max[k]).abs() <= tol {
                p[k] = max[k];
            }
        }
    }
    for p in images.iter_mut() {
        for k in 0..2 {
            p[k] = p[k].clamp(min[k], max[k]);
        }
    }
}

/// Triangulates the node images `T₀(xᵢ)`.
pub fn image_mesh(mesh: &TriMesh, images: &[Vec2], model_domain: Option<Domain>) -> Result<TriMesh> {
    match (*mesh.domain(), model_domain) {
        (Domain::Torus { .. }, _) => delaunay(images, Some(*mesh.domain())),
        (Domain::Rectangle { .. }, Some(Domain::Rectangle { min, max })) => {
            let mut snapped = images.to_vec();
            snap_to_rectangle(mesh, &mut snapped, min, max);
            delaunay(&snapped, None)
        }
        (Domain::Rectangle { .. }, _) => delaunay(images, None),
    }
}

/// Adaptive transfer-operator discretization.
///
/// `K = −½(K⁰ + K¹)` with `K⁰` the Laplace stiffness on `mesh` and `K¹` the
/// Laplace stiffness on the triangulated node images. On each image element
/// the pushed-forward derivative `D(T₀,* Ṫ₀)` is approximated by the constant
/// `G = Σₛ Ṫ₀(xₛ) ⊗ ∇φₛ¹` and `L_jk = ∫ G^sym ∇φ_j¹ · ∇φ_k¹`.
pub fn assemble_to(mesh: &TriMesh, model: &dyn DynamicsModel) -> Result<ToOperators> {
    let n = mesh.n_dofs();
    let evals: Vec<Result<(Vec2, Vec2)>> = par_map(n, |i| model.map_with_dot(mesh.dof_coords()[i]));
    let evals: Vec<(Vec2, Vec2)> = evals.into_iter().collect::<Result<_>>()?;
    let images: Vec<Vec2> = evals.iter().map(|e| e.0).collect();
    let tdot: Vec<Vec2> = evals.iter().map(|e| e.1).collect();
    to_from_images(mesh, &images, &tdot, model.domain())
}

/// Transfer-operator assembly from precomputed node images and `Ṫ₀` values.
pub fn to_from_images(
    mesh: &TriMesh,
    images: &[Vec2],
    tdot: &[Vec2],
    model_domain: Option<Domain>,
) -> Result<ToOperators> {
    let n = mesh.n_dofs();
    if images.len() != n || tdot.len() != n {
        return Err(Error::InvalidArgument("one image and one Ṫ₀ value per node".into()));
    }
    let image = image_mesh(mesh, images, model_domain)?;
    let k0 = assemble_laplacian(mesh)?;
    let k1 = assemble_laplacian(&image)?;
    let stiffness = SparseSymMatrix::linear_combination(&[(-0.5, &k0), (-0.5, &k1)])?;

    let geo = element_geometries(&image)?;
    let elems: Vec<[[f64; 3]; 3]> = geo
        .iter()
        .enumerate()
        .map(|(t, g)| {
            let dofs = image.dofs_of(t);
            let mut gm = Mat2::zeros();
            for s in 0..3 {
                gm += tdot[dofs[s]] * g.grad[s].transpose();
            }
            element_stiffness(g, &symmetric_part(&gm), g.area)
        })
        .collect();
    let response = scatter(&image, &elems);
    Ok(ToOperators {
        stiffness,
        response,
        image_mesh: image,
    })
}

/// Discretization route for `K` and `L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Cauchy-Green: quadrature of `A₀` and `Ȧ₀`.
    #[default]
    Cg,
    /// Transfer operator: stiffness on the image triangulation.
    To,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cg" => Ok(Method::Cg),
            "to" => Ok(Method::To),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Which degrees of freedom survive the boundary condition.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    keep: Vec<usize>,
    n_full: usize,
}

impl DofMap {
    /// Neumann keeps everything; Dirichlet drops boundary nodes.
    pub fn new(mesh: &TriMesh, bc: BoundaryCondition) -> Result<Self> {
        bc.check(mesh)?;
        let n_full = mesh.n_dofs();
        let keep = match bc {
            BoundaryCondition::Neumann => (0..n_full).collect(),
            BoundaryCondition::Dirichlet => {
                let mut on_boundary = vec![false; n_full];
                for &b in mesh.boundary_nodes() {
                    on_boundary[b] = true;
                }
                (0..n_full).filter(|&i| !on_boundary[i]).collect()
            }
        };
        Ok(DofMap { keep, n_full })
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.keep.len() == self.n_full
    }

    pub fn restrict_matrix(&self, a: &SparseSymMatrix) -> SparseSymMatrix {
        if self.is_identity() {
            a.clone()
        } else {
            a.restrict(&self.keep)
        }
    }

    /// Reduced vector to full nodal vector, zero on removed nodes.
    pub fn expand(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_full];
        for (k, &i) in self.keep.iter().enumerate() {
            out[i] = v[k];
        }
        out
    }

    pub fn reduce(&self, v: &[f64]) -> Vec<f64> {
        self.keep.iter().map(|&i| v[i]).collect()
    }
}

/// Reduced operators of one discretized problem.
#[derive(Clone, Debug)]
pub struct Operators {
    pub mass: SparseSymMatrix,
    pub stiffness: SparseSymMatrix,
    pub response: SparseSymMatrix,
    pub dofs: DofMap,
    pub image_mesh: Option<TriMesh>,
}

/// Assembles `M`, `K`, `L` for `model` and applies the boundary condition.
pub fn discretize(
    mesh: &TriMesh,
    model: &dyn DynamicsModel,
    method: Method,
    rule: &QuadratureRule,
    bc: BoundaryCondition,
) -> Result<Operators> {
    let dofs = DofMap::new(mesh, bc)?;
    let mass = assemble_mass(mesh)?;
    let (k, l, image) = match method {
        Method::Cg => {
            let ops = assemble_cg(mesh, model, rule)?;
            (ops.stiffness, ops.response, None)
        }
        Method::To => {
            let ops = assemble_to(mesh, model)?;
            (ops.stiffness, ops.response, Some(ops.image_mesh))
        }
    };
    Ok(Operators {
        mass: dofs.restrict_matrix(&mass),
        stiffness: dofs.restrict_matrix(&k),
        response: dofs.restrict_matrix(&l),
        dofs,
        image_mesh: image,
    })
}
