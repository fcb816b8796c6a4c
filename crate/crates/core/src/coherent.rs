//! Level sets of eigenvectors, dynamic Cheeger values and the normal velocity
//! of level sets under the linear response.

use crate::dynamics::DynamicsModel;
use crate::mesh::{Domain, TriMesh};
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{par_map, Error, Result, Vec2};

/// Subdivisions per segment when measuring the image length.
pub const DEFAULT_SUBDIVISIONS: usize = 8;
/// Default number of levels in the line search.
pub const DEFAULT_GRID_SIZE: usize = 100;

/// A polygonal level set `{u = c}` of a P1 field.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetCurve {
    pub c: f64,
    /// Segment endpoints in the local (unwrapped) chart of their element.
    pub segments: Vec<[Vec2; 2]>,
    /// Element of each segment.
    pub elements: Vec<usize>,
    /// DOF pair (sorted) of the mesh edge each endpoint lies on.
    pub edges: Vec<[[usize; 2]; 2]>,
    pub length: f64,
    /// Length of the image curve under `T₀`; equals `length` until
    /// [`LevelSetCurve::measure_image`] is called.
    pub image_length: f64,
    /// Areas of `{u < c}` and `{u > c}`.
    pub areas: [f64; 2],
}

fn value_range(u: &[f64]) -> (f64, f64) {
    u.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Marching-triangles extraction of `{u = c}`.
///
/// Vertex values exactly equal to `c` are raised by `1e−14·(max u − min u)`
/// so that every crossing lies strictly inside an edge and each element
/// contributes at most one segment. Side areas come from clipping each
/// triangle against the linear level line.
pub fn extract_level_set(mesh: &TriMesh, u: &[f64], c: f64) -> Result<LevelSetCurve> {
    if u.len() != mesh.n_dofs() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values, mesh has {} DOFs",
            u.len(),
            mesh.n_dofs()
        )));
    }
    let (lo, hi) = value_range(u);
    if !(hi > lo) {
        return Err(Error::DegenerateField("field is constant".into()));
    }
    let bump = 1e-14 * (hi - lo);
    type Piece = (Option<([Vec2; 2], [[usize; 2]; 2])>, [f64; 2]);
    let pieces: Vec<Result<Piece>> = par_map(mesh.triangles().len(), |t| {
        let area = mesh.element_geometry(t)?.area;
        let dofs = mesh.dofs_of(t);
        let x = mesh.vertex_coords(t);
        let f: [f64; 3] = std::array::from_fn(|i| {
            let v = u[dofs[i]];
            if v == c {
                bump
            } else {
                v - c
            }
        });
        let above: [bool; 3] = std::array::from_fn(|i| f[i] > 0.0);
        let n_above = above.iter().filter(|&&a| a).count();
        if n_above == 0 {
            return Ok((None, [area, 0.0]));
        }
        if n_above == 3 {
            return Ok((None, [0.0, area]));
        }
        // the vertex alone on its side
        let lone_above = n_above == 1;
        let a = (0..3).find(|&i| above[i] == lone_above).unwrap();
        let b = (a + 1) % 3;
        let d = (a + 2) % 3;
        let tb = f[a] / (f[a] - f[b]);
        let td = f[a] / (f[a] - f[d]);
        let p = x[a] + (x[b] - x[a]) * tb;
        let q = x[a] + (x[d] - x[a]) * td;
        let corner = area * tb * td;
        let areas = if lone_above {
            [area - corner, corner]
        } else {
            [corner, area - corner]
        };
        let edge = |i: usize, j: usize| {
            let (a, b) = (dofs[i], dofs[j]);
            [a.min(b), a.max(b)]
        };
        Ok((Some(([p, q], [edge(a, b), edge(a, d)])), areas))
    });
    let mut segments = Vec::new();
    let mut elements = Vec::new();
    let mut edges = Vec::new();
    let mut areas = [0.0; 2];
    for (t, piece) in pieces.into_iter().enumerate() {
        let (seg, a) = piece?;
        areas[0] += a[0];
        areas[1] += a[1];
        if let Some((s, e)) = seg {
            segments.push(s);
            elements.push(t);
            edges.push(e);
        }
    }
    let length = segments.iter().map(|s| (s[1] - s[0]).norm()).sum();
    Ok(LevelSetCurve {
        c,
        segments,
        elements,
        edges,
        length,
        image_length: length,
        areas,
    })
}

/// Length of the image of a polyline segment list under `model`, with each
/// segment subdivided into `subdivisions` pieces. Differences are taken as
/// minimal images when the model lives on a torus.
pub fn image_length(
    segments: &[[Vec2; 2]],
    model: &dyn DynamicsModel,
    subdivisions: usize,
) -> Result<f64> {
    let sub = subdivisions.max(1);
    let torus = model.domain().filter(Domain::is_periodic);
    let lens: Vec<Result<f64>> = par_map(segments.len(), |k| {
        let [p, q] = segments[k];
        let mut prev = model.map(p)?;
        let mut len = 0.0;
        for j in 1..=sub {
            let x = p + (q - p) * (j as f64 / sub as f64);
            let img = model.map(x)?;
            let d = img - prev;
            len += match &torus {
                Some(dom) => dom.min_image(d).norm(),
                None => d.norm(),
            };
            prev = img;
        }
        Ok(len)
    });
    lens.into_iter().sum()
}

impl LevelSetCurve {
    /// Sets `image_length` from the images of the segments under `model`.
    pub fn measure_image(&mut self, model: &dyn DynamicsModel, subdivisions: usize) -> Result<()> {
        self.image_length = image_length(&self.segments, model, subdivisions)?;
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Whether some closed component winds around a periodic direction.
    ///
    /// Segments are chained through shared mesh edges and the local
    /// displacements summed; a closed loop with nonzero net displacement is
    /// not contractible. Open components (ending on a boundary) never wrap.
    pub fn wraps(&self, domain: &Domain) -> bool {
        if !domain.is_periodic() {
            return false;
        }
        let mut by_edge: HashMap<[usize; 2], Vec<(usize, usize)>> = HashMap::new();
        for (s, e) in self.edges.iter().enumerate() {
            by_edge.entry(e[0]).or_default().push((s, 0));
            by_edge.entry(e[1]).or_default().push((s, 1));
        }
        let tol = 1e-6 * domain.extent()[0].max(domain.extent()[1]);
        let mut seen = vec![false; self.segments.len()];
        for start in 0..self.segments.len() {
            if seen[start] {
                continue;
            }
            let (mut s, mut entry) = (start, 0);
            let mut disp = Vec2::zeros();
            let closed = loop {
                seen[s] = true;
                let exit = 1 - entry;
                disp += self.segments[s][exit] - self.segments[s][entry];
                let key = self.edges[s][exit];
                match by_edge[&key].iter().find(|&&(o, _)| o != s) {
                    Some(&(next, end)) if next == start => break end == 0,
                    Some(&(next, end)) if !seen[next] => {
                        s = next;
                        entry = end;
                    }
                    _ => break false,
                }
            };
            if closed && disp.norm() > tol {
                return true;
            }
        }
        false
    }
}

/// Dynamic Cheeger value `½(ℓ(Γ) + ℓ(T₀Γ)) / min(|Ω₁|, |Ω₂|)`.
pub fn cheeger_value(curve: &LevelSetCurve) -> Result<f64> {
    let min_area = curve.areas[0].min(curve.areas[1]);
    if !(min_area > 0.0) {
        return Err(Error::DegenerateField(format!(
            "level {} does not split the domain",
            curve.c
        )));
    }
    Ok(0.5 * (curve.length + curve.image_length) / min_area)
}

/// Levels scanned by [`line_search_c`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelRange {
    /// `(0, max u)`.
    #[default]
    Positive,
    /// `(min u, max u)`.
    Full,
}

/// Result of [`line_search_c`].
#[derive(Clone, Debug)]
pub struct LineSearch {
    pub c_star: f64,
    pub h_star: f64,
    /// `(c, h)` for every level that produced a valid split.
    pub scan: Vec<(f64, f64)>,
    pub curve: LevelSetCurve,
}

/// Which level curves the line search accepts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveTopology {
    /// Every level that splits the domain.
    #[default]
    Any,
    /// Only levels whose curve has no component winding around a periodic
    /// direction, i.e. the coherent set is a patch rather than a band.
    Contractible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSearchOptions {
    pub grid_size: usize,
    pub range: LevelRange,
    /// Subdivisions per segment for the image length.
    pub subdivisions: usize,
    pub topology: CurveTopology,
}

impl Default for LineSearchOptions {
    fn default() -> Self {
        LineSearchOptions {
            grid_size: DEFAULT_GRID_SIZE,
            range: LevelRange::Positive,
            subdivisions: DEFAULT_SUBDIVISIONS,
            topology: CurveTopology::Any,
        }
    }
}

/// Minimizes the dynamic Cheeger value over `grid_size` equally spaced
/// interior levels `start + (max u − start)·k/(grid_size + 1)` of the
/// requested range.
pub fn line_search_c(
    mesh: &TriMesh,
    u: &[f64],
    model: &dyn DynamicsModel,
    opts: &LineSearchOptions,
) -> Result<LineSearch> {
    let LineSearchOptions {
        grid_size,
        range,
        subdivisions,
        topology,
    } = *opts;
    let (lo, hi) = value_range(u);
    if !(hi > lo) {
        return Err(Error::DegenerateField("field is constant".into()));
    }
    let start = match range {
        LevelRange::Positive => 0.0,
        LevelRange::Full => lo,
    };
    if !(hi > start) {
        return Err(Error::DegenerateField("field has no positive values".into()));
    }
    let n = grid_size.max(1);
    let mut best: Option<(f64, LevelSetCurve)> = None;
    let mut scan = Vec::new();
    for k in 1..=n {
        let c = start + (hi - start) * k as f64 / (n + 1) as f64;
        let mut curve = extract_level_set(mesh, u, c)?;
        if curve.is_empty() || (topology == CurveTopology::Contractible && curve.wraps(mesh.domain())) {
            continue;
        }
        curve.measure_image(model, subdivisions)?;
        let h = match cheeger_value(&curve) {
            Ok(h) => h,
            Err(_) => continue,
        };
        scan.push((c, h));
        if best.as_ref().map_or(true, |(hb, _)| h < *hb) {
            best = Some((h, curve));
        }
    }
    let (h_star, curve) =
        best.ok_or_else(|| Error::DegenerateField("every level of the line search is degenerate".into()))?;
    Ok(LineSearch {
        c_star: curve.c,
        h_star,
        scan,
        curve,
    })
}

/// Normal velocity of the level sets of `u₀` under the response `u̇₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelVelocityField {
    /// One vector per DOF; zero where masked.
    pub v: Vec<Vec2>,
    pub masked: Vec<bool>,
    /// Recovered nodal gradient of `u₀`.
    pub grad: Vec<Vec2>,
    pub grad_floor: f64,
}

/// Nodal gradients by area-weighted averaging of the element gradients.
pub fn recover_gradient(mesh: &TriMesh, u: &[f64]) -> Result<Vec<Vec2>> {
    let n = mesh.n_dofs();
    if u.len() != n {
        return Err(Error::InvalidArgument("field length does not match the mesh".into()));
    }
    let elems: Vec<Result<(f64, Vec2)>> = par_map(mesh.triangles().len(), |t| {
        let g = mesh.element_geometry(t)?;
        let dofs = mesh.dofs_of(t);
        let grad = (0..3).fold(Vec2::zeros(), |acc, i| acc + g.grad[i] * u[dofs[i]]);
        Ok((g.area, grad))
    });
    let mut sum = vec![Vec2::zeros(); n];
    let mut weight = vec![0.0; n];
    for (t, e) in elems.into_iter().enumerate() {
        let (area, grad) = e?;
        for d in mesh.dofs_of(t) {
            sum[d] += grad * area;
            weight[d] += area;
        }
    }
    Ok(sum
        .into_iter()
        .zip(weight)
        .map(|(s, w)| if w > 0.0 { s / w } else { s })
        .collect())
}

/// `v = −u̇₀ ∇u₀ / |∇u₀|²`, the velocity normal to the level sets of `u₀`
/// that keeps `u₀ + εu̇₀` constant along moving level sets to first order.
///
/// Nodes with `|∇u₀|` below `grad_floor` (default `1e−3·max|∇u₀|`) are
/// masked and get a zero vector.
pub fn level_velocity(
    mesh: &TriMesh,
    u0: &[f64],
    u_dot: &[f64],
    grad_floor: Option<f64>,
) -> Result<LevelVelocityField> {
    if u_dot.len() != u0.len() {
        return Err(Error::InvalidArgument("u0 and u_dot differ in length".into()));
    }
    let grad = recover_gradient(mesh, u0)?;
    let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.norm()));
    let floor = grad_floor.unwrap_or(1e-3 * gmax);
    let mut masked = vec![false; grad.len()];
    let v = grad
        .iter()
        .zip(u_dot)
        .enumerate()
        .map(|(i, (g, &ud))| {
            let n2 = g.norm_squared();
            if g.norm() < floor || n2 == 0.0 {
                masked[i] = true;
                Vec2::zeros()
            } else {
                g * (-ud / n2)
            }
        })
        .collect();
    Ok(LevelVelocityField {
        v,
        masked,
        grad,
        grad_floor: floor,
    })
}

/// Mean over segment midpoints of `a` of the distance to the nearest segment
/// of `b`; distances use minimal images on a torus.
pub fn mean_curve_distance(a: &LevelSetCurve, b: &LevelSetCurve, domain: &Domain) -> f64 {
    if a.segments.is_empty() || b.segments.is_empty() {
        return f64::INFINITY;
    }
    let dists = par_map(a.segments.len(), |k| {
        let m = (a.segments[k][0] + a.segments[k][1]) * 0.5;
        b.segments
            .iter()
            .map(|s| {
                // shift the segment next to m
                let p = m + domain.min_image(s[0] - m);
                let q = p + (s[1] - s[0]);
                point_segment_distance(m, p, q)
            })
            .fold(f64::INFINITY, f64::min)
    });
    dists.iter().sum::<f64>() / dists.len() as f64
}

fn point_segment_distance(x: Vec2, p: Vec2, q: Vec2) -> f64 {
    let d = q - p;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 { ((x - p).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (x - (p + d * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{standard_map, Identity};
    use crate::mesh::grid_mesh;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_square(n: usize) -> TriMesh {
        grid_mesh(n, n, Domain::rectangle([0.0, 0.0], [1.0, 1.0]), false).unwrap()
    }

    fn field(mesh: &TriMesh, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        mesh.dof_coords().iter().map(|&p| f(p)).collect()
    }

    fn opts(grid_size: usize, range: LevelRange) -> LineSearchOptions {
        LineSearchOptions {
            grid_size,
            range,
            subdivisions: 1,
            topology: CurveTopology::Any,
        }
    }

    #[test]
    fn band_wraps_and_patch_does_not() {
        let dom = Domain::torus(2.0 * PI, 2.0 * PI);
        let mesh = grid_mesh(40, 40, dom, true).unwrap();
        let band = field(&mesh, |p| p.y.cos());
        assert!(extract_level_set(&mesh, &band, 0.3).unwrap().wraps(&dom));
        // a bump centred on the seam still gives a contractible curve
        let bump = field(&mesh, |p| p.x.cos() + p.y.cos());
        let c = extract_level_set(&mesh, &bump, 1.0).unwrap();
        assert!(!c.is_empty() && !c.wraps(&dom));
        // the band is excluded when patches are required
        let mixed = field(&mesh, |p| p.y.cos() + 0.6 * p.x.cos());
        let any = line_search_c(&mesh, &mixed, &Identity, &opts(50, LevelRange::Positive)).unwrap();
        let patch = line_search_c(
            &mesh,
            &mixed,
            &Identity,
            &LineSearchOptions {
                topology: CurveTopology::Contractible,
                ..opts(50, LevelRange::Positive)
            },
        )
        .unwrap();
        assert!(any.curve.wraps(&dom));
        assert!(!patch.curve.wraps(&dom));
        assert!(patch.c_star > any.c_star && patch.h_star >= any.h_star);
        let rect = unit_square(10);
        let u = field(&rect, |p| p.x);
        assert!(!extract_level_set(&rect, &u, 0.5).unwrap().wraps(rect.domain()));
    }

    #[test]
    fn linear_field_level_set() {
        let mesh = unit_square(10);
        let u = field(&mesh, |p| p.x);
        let curve = extract_level_set(&mesh, &u, 0.5).unwrap();
        assert_relative_eq!(curve.length, 1.0, epsilon = 1e-12);
        assert_relative_eq!(curve.areas[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(curve.areas[1], 0.5, epsilon = 1e-12);
        for s in &curve.segments {
            assert!((s[0].x - 0.5).abs() < 1e-12 && (s[1].x - 0.5).abs() < 1e-12);
        }
        // level through a grid line of vertices
        let at_nodes = extract_level_set(&mesh, &u, 0.3).unwrap();
        assert_relative_eq!(at_nodes.length, 1.0, epsilon = 1e-10);
        assert_relative_eq!(at_nodes.areas[0], 0.3, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        let mesh = unit_square(4);
        let u = vec![1.0; mesh.n_dofs()];
        assert!(matches!(extract_level_set(&mesh, &u, 1.0), Err(Error::DegenerateField(_))));
        let x = field(&mesh, |p| p.x);
        let empty = extract_level_set(&mesh, &x, 2.0).unwrap();
        assert!(empty.is_empty());
        assert_relative_eq!(empty.areas[0], 1.0, epsilon = 1e-12);
        assert!(cheeger_value(&empty).is_err());
    }

    #[test]
    fn endpoints_interpolate_the_level() {
        let mesh = unit_square(12);
        let u = field(&mesh, |p| (3.0 * p.x).sin() * (2.0 * p.y).cos() + p.x * p.y);
        let c = 0.31;
        let curve = extract_level_set(&mesh, &u, c).unwrap();
        for (s, &t) in curve.segments.iter().zip(&curve.elements) {
            let g = mesh.element_geometry(t).unwrap();
            let x = mesh.vertex_coords(t);
            let dofs = mesh.dofs_of(t);
            for p in s {
                // evaluate the P1 interpolant at p
                let val: f64 = (0..3)
                    .map(|i| u[dofs[i]] * (1.0 / 3.0 + g.grad[i].dot(&(p - (x[0] + x[1] + x[2]) / 3.0))))
                    .sum();
                assert!((val - c).abs() < 1e-12);
            }
        }
        assert_relative_eq!(curve.areas[0] + curve.areas[1], 1.0, max_relative = 1e-8);
    }

    #[test]
    fn circle_cheeger_value() {
        let mesh = unit_square(200);
        let u = field(&mesh, |p| 1.0 - ((p.x - 0.5).powi(2) + (p.y - 0.5).powi(2)).sqrt());
        let mut curve = extract_level_set(&mesh, &u, 0.75).unwrap();
        curve.measure_image(&Identity, DEFAULT_SUBDIVISIONS).unwrap();
        assert_relative_eq!(curve.image_length, curve.length, max_relative = 1e-12);
        let h = cheeger_value(&curve).unwrap();
        assert!((h - 8.0).abs() < 0.08, "{h}");
    }

    #[test]
    fn cheeger_scale_invariance() {
        let mesh = grid_mesh(30, 30, Domain::torus(2.0 * PI, 2.0 * PI), true).unwrap();
        let u = field(&mesh, |p| p.x.sin() + 0.3 * p.y.cos());
        let m = standard_map(0.98);
        let h = |alpha: f64| {
            let v: Vec<f64> = u.iter().map(|x| alpha * x).collect();
            let mut curve = extract_level_set(&mesh, &v, alpha * 0.2).unwrap();
            curve.measure_image(&m, 8).unwrap();
            cheeger_value(&curve).unwrap()
        };
        assert_relative_eq!(h(1.0), h(3.7), max_relative = 1e-12);
    }

    #[test]
    fn image_length_converges() {
        let mesh = grid_mesh(40, 40, Domain::torus(2.0 * PI, 2.0 * PI), true).unwrap();
        let u = field(&mesh, |p| p.x.cos() + p.y.cos());
        let curve = extract_level_set(&mesh, &u, 0.5).unwrap();
        let m = standard_map(0.98);
        let l: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&s| image_length(&curve.segments, &m, s).unwrap())
            .collect();
        assert!((l[2] - l[1]).abs() / l[2] < 1e-3);
        assert!((l[2] - l[1]).abs() <= (l[1] - l[0]).abs());
    }

    #[test]
    fn line_search_matches_brute_force() {
        let mesh = grid_mesh(20, 40, Domain::rectangle([0.0, 0.0], [1.0, 2.0]), false).unwrap();
        let u = field(&mesh, |p| (PI * p.y / 2.0).cos());
        let coarse = line_search_c(&mesh, &u, &Identity, &opts(100, LevelRange::Full)).unwrap();
        let fine = line_search_c(&mesh, &u, &Identity, &opts(1000, LevelRange::Full)).unwrap();
        // horizontal cuts all have length 1, so the best level bisects the area
        assert!(coarse.c_star.abs() < 0.03, "{}", coarse.c_star);
        assert!((coarse.h_star - fine.h_star).abs() / fine.h_star < 1e-2);
        let positive = line_search_c(&mesh, &u, &Identity, &opts(100, LevelRange::Positive)).unwrap();
        assert!(positive.c_star > 0.0);
    }

    #[test]
    fn velocity_examples() {
        let mesh = unit_square(8);
        let u0 = field(&mesh, |p| p.x);
        let zero = level_velocity(&mesh, &u0, &vec![0.0; u0.len()], None).unwrap();
        assert!(zero.v.iter().all(|v| v.norm() == 0.0));
        let one = level_velocity(&mesh, &u0, &vec![1.0; u0.len()], None).unwrap();
        for v in &one.v {
            assert!((v - Vec2::new(-1.0, 0.0)).norm() < 1e-12);
        }
        let u2 = field(&mesh, |p| 2.0 * p.x + p.y);
        let ud = field(&mesh, |p| p.y - 0.3);
        let f = level_velocity(&mesh, &u2, &ud, None).unwrap();
        for (v, g) in f.v.iter().zip(&f.grad) {
            assert!((v.x * g.y - v.y * g.x).abs() < 1e-10);
        }
        assert!(level_velocity(&mesh, &u0, &[1.0], None).is_err());
    }

    #[test]
    fn velocity_masks_critical_points() {
        let mesh = unit_square(10);
        let u0 = field(&mesh, |p| (p.x - 0.5).powi(2) + (p.y - 0.5).powi(2));
        let f = level_velocity(&mesh, &u0, &vec![1.0; u0.len()], Some(0.05)).unwrap();
        let centre = mesh
            .dof_coords()
            .iter()
            .position(|p| (p - Vec2::new(0.5, 0.5)).norm() < 1e-12)
            .unwrap();
        assert!(f.masked[centre]);
        assert_eq!(f.v[centre], Vec2::zeros());
    }

    #[test]
    fn curve_distance_on_torus() {
        let mesh = grid_mesh(40, 40, Domain::torus(1.0, 1.0), true).unwrap();
        let u = field(&mesh, |p| (2.0 * PI * p.x).cos());
        let a = extract_level_set(&mesh, &u, 0.0).unwrap();
        assert!(mean_curve_distance(&a, &a, mesh.domain()) < 1e-12);
    }
}
