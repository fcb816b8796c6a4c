//! Triangulated domains, element geometry and quadrature.
//!
//! A [`TriMesh`] stores linear triangles over either an axis-aligned
//! rectangle or a flat 2-torus. On a torus every triangle is stored in a
//! consistent local chart: vertices that lie across the seam reference
//! *ghost* nodes, which are translated copies of canonical nodes. The
//! periodic map folds each ghost back to its canonical node, and only
//! canonical nodes carry degrees of freedom.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use crate::{Error, Result, Vec2};

/// Points closer than this are rejected as duplicates by [`delaunay`].
pub const DUPLICATE_TOL: f64 = 1e-12;
/// Triangles with area below this fraction of the bounding-box area are degenerate.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-14;
const COVER_RTOL: f64 = 1e-10;

/// The region a mesh discretizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Torus { origin: [f64; 2], periods: [f64; 2] },
}

impl Domain {
    pub fn rectangle(min: [f64; 2], max: [f64; 2]) -> Self {
        Domain::Rectangle { min, max }
    }

    /// The flat torus `[0, px) × [0, py)`.
    pub fn torus(px: f64, py: f64) -> Self {
        Domain::Torus {
            origin: [0.0, 0.0],
            periods: [px, py],
        }
    }

    pub fn area(&self) -> f64 {
        let [w, h] = self.extent();
        w * h
    }

    pub fn extent(&self) -> [f64; 2] {
        match *self {
            Domain::Rectangle { min, max } => [max[0] - min[0], max[1] - min[1]],
            Domain::Torus { periods, .. } => periods,
        }
    }

    pub fn origin(&self) -> [f64; 2] {
        match *self {
            Domain::Rectangle { min, .. } => min,
            Domain::Torus { origin, .. } => origin,
        }
    }

    pub fn periods(&self) -> Option<[f64; 2]> {
        match *self {
            Domain::Torus { periods, .. } => Some(periods),
            Domain::Rectangle { .. } => None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Domain::Torus { .. })
    }

    /// Reduces a point into the fundamental domain (identity on rectangles).
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        match *self {
            Domain::Torus { origin, periods } => Vec2::new(
                wrap_coord(p.x, origin[0], periods[0]),
                wrap_coord(p.y, origin[1], periods[1]),
            ),
            Domain::Rectangle { .. } => p,
        }
    }

    /// Shortest representative of a displacement (identity on rectangles).
    pub fn min_image(&self, d: Vec2) -> Vec2 {
        match *self {
            Domain::Torus { periods, .. } => Vec2::new(
                d.x - periods[0] * (d.x / periods[0]).round(),
                d.y - periods[1] * (d.y / periods[1]).round(),
            ),
            Domain::Rectangle { .. } => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [w, h] = self.extent();
        let o = self.origin();
        if !(w.is_finite() && h.is_finite() && o[0].is_finite() && o[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite domain extents".into()));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidMesh(format!(
                "non-positive domain extents {w} x {h}"
            )));
        }
        Ok(())
    }
}

fn wrap_coord(x: f64, origin: f64, period: f64) -> f64 {
    let r = (x - origin).rem_euclid(period);
    // rem_euclid can round up to exactly `period`
    if r >= period {
        origin
    } else {
        origin + r
    }
}

/// Boundary condition for the eigenproblem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    #[default]
    Neumann,
    Dirichlet,
}

impl BoundaryCondition {
    /// Dirichlet conditions need a boundary to act on.
    pub fn check(&self, mesh: &TriMesh) -> Result<()> {
        if *self == BoundaryCondition::Dirichlet && mesh.boundary_nodes().is_empty() {
            return Err(Error::BoundaryCondition(
                "Dirichlet conditions require a mesh with boundary nodes".into(),
            ));
        }
        Ok(())
    }
}

/// Area and constant P1 basis gradients of one element.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub area: f64,
    pub grad: [Vec2; 3],
}

/// A conforming linear triangulation.
#[derive(Clone, Debug)]
pub struct TriMesh {
    nodes: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    canonical: Vec<usize>,
    n_canonical: usize,
    boundary: Vec<usize>,
    domain: Domain,
    /// Smallest admissible element area.
    area_threshold: f64,
}

impl TriMesh {
    /// Builds a mesh from raw parts and checks its invariants.
    ///
    /// `canonical[i]` is the canonical node of node `i`; the first
    /// `n_canonical` nodes must be canonical themselves.
    pub fn from_parts(
        nodes: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        canonical: Vec<usize>,
        n_canonical: usize,
        boundary: Vec<usize>,
        domain: Domain,
    ) -> Result<Self> {
        domain.validate()?;
        if canonical.len() != nodes.len() || n_canonical > nodes.len() {
            return Err(Error::InvalidMesh("periodic map has wrong length".into()));
        }
        for (i, &c) in canonical.iter().enumerate() {
            if c >= n_canonical || (i < n_canonical && c != i) {
                return Err(Error::InvalidMesh(format!(
                    "node {i} folds to {c}, outside the canonical set"
                )));
            }
        }
        if domain.is_periodic() && !boundary.is_empty() {
            return Err(Error::InvalidMesh("torus meshes have no boundary".into()));
        }
        if !domain.is_periodic() && n_canonical != nodes.len() {
            return Err(Error::InvalidMesh("ghost nodes on a planar mesh".into()));
        }
        if let Some(&b) = boundary.iter().find(|&&b| b >= n_canonical) {
            return Err(Error::InvalidMesh(format!("boundary node {b} out of range")));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&v| v >= nodes.len())) {
            return Err(Error::InvalidMesh(format!("triangle {t:?} out of range")));
        }
        let mut mesh = TriMesh {
            nodes,
            triangles,
            canonical,
            n_canonical,
            boundary,
            domain,
            area_threshold: 0.0,
        };
        mesh.area_threshold = DEGENERATE_AREA_FRACTION * mesh.bounding_box_area();
        for t in 0..mesh.triangles.len() {
            let a = mesh.signed_area(t);
            if a <= mesh.area_threshold {
                return Err(Error::DegenerateTriangle { index: t, area: a });
            }
        }
        Ok(mesh)
    }

    /// All node coordinates, canonical nodes first, then ghosts.
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Number of degrees of freedom (canonical nodes).
    pub fn n_dofs(&self) -> usize {
        self.n_canonical
    }

    /// Coordinates of the canonical nodes.
    pub fn dof_coords(&self) -> &[Vec2] {
        &self.nodes[..self.n_canonical]
    }

    /// Folds a node index through the periodic map.
    pub fn canonical(&self, node: usize) -> usize {
        self.canonical[node]
    }

    pub fn periodic_map(&self) -> &[usize] {
        &self.canonical
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Triangle `t` with vertices folded to degrees of freedom.
    pub fn dofs_of(&self, t: usize) -> [usize; 3] {
        self.triangles[t].map(|v| self.canonical[v])
    }

    /// Vertex coordinates of triangle `t` in one consistent chart.
    pub fn vertex_coords(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        let p0 = self.nodes[a];
        let p1 = p0 + self.domain.min_image(self.nodes[b] - p0);
        let p2 = p0 + self.domain.min_image(self.nodes[c] - p0);
        [p0, p1, p2]
    }

    fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.vertex_coords(t);
        0.5 * cross(p1 - p0, p2 - p0)
    }

    fn bounding_box_area(&self) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let (mut lo, mut hi) = (self.nodes[0], self.nodes[0]);
        for p in &self.nodes {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        ((hi.x - lo.x) * (hi.y - lo.y)).max(self.domain.area())
    }

    /// Area and P1 basis gradients of triangle `t`.
    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        let p = self.vertex_coords(t);
        let twice_area = cross(p[1] - p[0], p[2] - p[0]);
        let area = 0.5 * twice_area;
        if area <= self.area_threshold {
            return Err(Error::DegenerateTriangle { index: t, area });
        }
        let grad = std::array::from_fn(|i| {
            let pj = p[(i + 1) % 3];
            let pk = p[(i + 2) % 3];
            Vec2::new(pj.y - pk.y, pk.x - pj.x) / twice_area
        });
        Ok(ElementGeometry { area, grad })
    }

    /// Sum of all element areas.
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Whether the elements tile the domain (areas sum to |Ω|).
    pub fn covers_domain(&self) -> bool {
        let a = self.domain.area();
        (self.total_area() - a).abs() <= COVER_RTOL * a
    }

    /// Smallest edge length, a proxy for the mesh width.
    pub fn min_edge_length(&self) -> f64 {
        let mut h = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let p = self.vertex_coords(t);
            for i in 0..3 {
                h = h.min((p[(i + 1) % 3] - p[i]).norm());
            }
        }
        h
    }

    /// Largest edge length.
    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let p = self.vertex_coords(t);
            for i in 0..3 {
                h = h.max((p[(i + 1) % 3] - p[i]).norm());
            }
        }
        h
    }

    /// Extends a vector indexed by degrees of freedom to all nodes (ghosts included).
    pub fn expand_to_nodes(&self, values: &[f64]) -> Vec<f64> {
        self.canonical.iter().map(|&c| values[c]).collect()
    }
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Regular grid mesh with every cell split along the same diagonal.
///
/// `extents` gives the rectangle (or fundamental domain of the torus when
/// `periodic` is set). A planar grid has `(nx+1)(ny+1)` nodes; a periodic one
/// has `nx·ny` degrees of freedom plus ghost nodes along the seams.
pub fn grid_mesh(nx: usize, ny: usize, extents: Domain, periodic: bool) -> Result<TriMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidMesh(format!(
            "grid needs at least 2x2 cells, got {nx}x{ny}"
        )));
    }
    extents.validate()?;
    if periodic && (nx < 3 || ny < 3) {
        return Err(Error::InvalidMesh(
            "periodic grids need at least 3 cells per direction".into(),
        ));
    }
    let origin = extents.origin();
    let [w, h] = extents.extent();
    let (dx, dy) = (w / nx as f64, h / ny as f64);
    let lattice = |i: usize, j: usize| Vec2::new(origin[0] + i as f64 * dx, origin[1] + j as f64 * dy);

    if !periodic {
        let stride = nx + 1;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut boundary = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                if i == 0 || j == 0 || i == nx || j == ny {
                    boundary.push(nodes.len());
                }
                // pin the far edges exactly to the extents
                let mut p = lattice(i, j);
                if i == nx {
                    p.x = origin[0] + w;
                }
                if j == ny {
                    p.y = origin[1] + h;
                }
                nodes.push(p);
            }
        }
        let id = |i: usize, j: usize| j * stride + i;
        let triangles = grid_triangles(nx, ny, id);
        let n = nodes.len();
        let domain = Domain::Rectangle {
            min: origin,
            max: [origin[0] + w, origin[1] + h],
        };
        return TriMesh::from_parts(nodes, triangles, (0..n).collect(), n, boundary, domain);
    }

    let n_canonical = nx * ny;
    let mut nodes: Vec<Vec2> = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut canonical: Vec<usize> = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..ny {
        for i in 0..nx {
            nodes.push(lattice(i, j));
            canonical.push(j * nx + i);
        }
    }
    let mut ghost = HashMap::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if i == nx || j == ny {
                ghost.insert((i, j), nodes.len());
                nodes.push(lattice(i, j));
                canonical.push((j % ny) * nx + i % nx);
            }
        }
    }
    let id = |i: usize, j: usize| {
        if i < nx && j < ny {
            j * nx + i
        } else {
            ghost[&(i, j)]
        }
    };
    let triangles = grid_triangles(nx, ny, id);
    let domain = Domain::Torus {
        origin,
        periods: [w, h],
    };
    TriMesh::from_parts(nodes, triangles, canonical, n_canonical, Vec::new(), domain)
}

fn grid_triangles(nx: usize, ny: usize, id: impl Fn(usize, usize) -> usize) -> Vec<[usize; 3]> {
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = id(i, j);
            let b = id(i + 1, j);
            let c = id(i + 1, j + 1);
            let d = id(i, j + 1);
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    tris
}

#[derive(Clone, Copy)]
struct Site {
    pos: Point2<f64>,
    index: usize,
    tile: (i8, i8),
}

impl HasPosition for Site {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

// Torus sites are triangulated in fixed-point coordinates so that tile
// translations are exact and every tile sees identical predicate results.
const QUANT_BITS: i32 = 40;
const JITTER: i64 = 1 << 10;

/// Delaunay triangulation of `points`.
///
/// With `torus = Some(domain)` the points are reduced into the fundamental
/// domain, triangulated together with their 8 translated copies, and the
/// triangles whose centroid falls in the central copy are kept; vertices in
/// neighbouring copies become ghost nodes.
pub fn delaunay(points: &[Vec2], torus: Option<Domain>) -> Result<TriMesh> {
    if points.len() < 3 {
        return Err(Error::Triangulation(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::Triangulation("non-finite point".into()));
    }
    match torus {
        None => delaunay_planar(points),
        Some(d @ Domain::Torus { .. }) => delaunay_torus(points, d),
        Some(Domain::Rectangle { .. }) => Err(Error::InvalidArgument(
            "torus triangulation requested with a rectangular domain".into(),
        )),
    }
}

fn check_duplicates(points: &[(Vec2, bool)]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.x.total_cmp(&points[b].0.x));
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            let (pa, ca) = points[a];
            let (pb, cb) = points[b];
            if pb.x - pa.x > DUPLICATE_TOL {
                break;
            }
            if (ca || cb) && (pb - pa).norm() <= DUPLICATE_TOL {
                return Err(Error::Triangulation(format!(
                    "duplicate points at ({}, {})",
                    pa.x, pa.y
                )));
            }
        }
    }
    Ok(())
}

fn delaunay_planar(points: &[Vec2]) -> Result<TriMesh> {
    let tagged: Vec<(Vec2, bool)> = points.iter().map(|&p| (p, true)).collect();
    check_duplicates(&tagged)?;
    let sites: Vec<Site> = points
        .iter()
        .enumerate()
        .map(|(index, p)| Site {
            pos: Point2::new(p.x, p.y),
            index,
            tile: (0, 0),
        })
        .collect();
    let tri: DelaunayTriangulation<Site> = DelaunayTriangulation::bulk_load(sites)
        .map_err(|e| Error::Triangulation(format!("{e:?}")))?;
    if tri.num_inner_faces() == 0 {
        return Err(Error::Triangulation("all points are collinear".into()));
    }
    let triangles: Vec<[usize; 3]> = tri
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.data().index))
        .collect();
    let mut boundary: Vec<usize> = tri.convex_hull().map(|e| e.from().data().index).collect();
    boundary.sort_unstable();
    boundary.dedup();

    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let n = points.len();
    let domain = Domain::Rectangle {
        min: [lo.x, lo.y],
        max: [hi.x, hi.y],
    };
    TriMesh::from_parts(points.to_vec(), triangles, (0..n).collect(), n, boundary, domain)
}

fn delaunay_torus(points: &[Vec2], domain: Domain) -> Result<TriMesh> {
    domain.validate()?;
    let periods = domain.extent();
    let origin = domain.origin();
    let n = points.len();
    let wrapped: Vec<Vec2> = points.iter().map(|&p| domain.wrap(p)).collect();

    let mut tagged = Vec::with_capacity(9 * n);
    for dy in -1..=1 {
        for dx in -1..=1 {
            let shift = Vec2::new(dx as f64 * periods[0], dy as f64 * periods[1]);
            tagged.extend(wrapped.iter().map(|&p| (p + shift, dx == 0 && dy == 0)));
        }
    }
    check_duplicates(&tagged)?;

    let q = (1i64 << QUANT_BITS) as f64;
    let qi = 1i64 << QUANT_BITS;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1a9);
    let fixed: Vec<[i64; 2]> = wrapped
        .iter()
        .map(|p| {
            let mut c = [0i64; 2];
            for k in 0..2 {
                let t = ((p[k] - origin[k]) / periods[k] * q).round() as i64;
                c[k] = (t + rng.random_range(-JITTER..=JITTER)).rem_euclid(qi);
            }
            c
        })
        .collect();

    let mut sites = Vec::with_capacity(9 * n);
    for dy in -1i8..=1 {
        for dx in -1i8..=1 {
            for (index, c) in fixed.iter().enumerate() {
                let x = c[0] + dx as i64 * qi;
                let y = c[1] + dy as i64 * qi;
                sites.push(Site {
                    pos: Point2::new(x as f64, y as f64),
                    index,
                    tile: (dx, dy),
                });
            }
        }
    }
    let tri: DelaunayTriangulation<Site> = DelaunayTriangulation::bulk_load(sites)
        .map_err(|e| Error::Triangulation(format!("{e:?}")))?;
    if tri.num_inner_faces() == 0 {
        return Err(Error::Triangulation("all points are collinear".into()));
    }

    let mut nodes = wrapped.clone();
    let mut canonical: Vec<usize> = (0..n).collect();
    let mut ghosts: HashMap<(usize, i8, i8), usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(2 * n);
    let lo = 0i64;
    let hi = 3 * qi;
    for face in tri.inner_faces() {
        let vs = face.vertices().map(|v| *v.data());
        let sx: i64 = vs.iter().map(|s| s.pos.x as i64).sum();
        let sy: i64 = vs.iter().map(|s| s.pos.y as i64).sum();
        if !(lo..hi).contains(&sx) || !(lo..hi).contains(&sy) {
            continue;
        }
        let tri_nodes = vs.map(|s| {
            if s.tile == (0, 0) {
                return s.index;
            }
            *ghosts.entry((s.index, s.tile.0, s.tile.1)).or_insert_with(|| {
                let shift = Vec2::new(
                    s.tile.0 as f64 * periods[0],
                    s.tile.1 as f64 * periods[1],
                );
                nodes.push(wrapped[s.index] + shift);
                canonical.push(s.index);
                nodes.len() - 1
            })
        });
        triangles.push(tri_nodes);
    }

    let mesh = TriMesh::from_parts(nodes, triangles, canonical, n, Vec::new(), domain)
        .map_err(|e| Error::Triangulation(format!("folded torus mesh is invalid: {e}")))?;
    check_torus_manifold(&mesh)?;
    if !mesh.covers_domain() {
        return Err(Error::Triangulation(format!(
            "folded torus mesh covers area {} instead of {}",
            mesh.total_area(),
            domain.area()
        )));
    }
    Ok(mesh)
}

/// Every oriented edge of a closed surface must be matched by its reverse.
fn check_torus_manifold(mesh: &TriMesh) -> Result<()> {
    let [px, py] = mesh.domain().extent();
    let mut edges: HashMap<(usize, usize, i64, i64), i32> = HashMap::new();
    for t in 0..mesh.triangles().len() {
        let tri = mesh.triangles()[t];
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            let (ca, cb) = (mesh.canonical(a), mesh.canonical(b));
            // lattice offset between the two charts, invariant under translation
            let d = (mesh.nodes()[b] - mesh.nodes()[cb]) - (mesh.nodes()[a] - mesh.nodes()[ca]);
            let ox = (d.x / px).round() as i64;
            let oy = (d.y / py).round() as i64;
            let key = if ca < cb || (ca == cb && (ox, oy) > (0, 0)) {
                (ca, cb, ox, oy)
            } else {
                (cb, ca, -ox, -oy)
            };
            let sign = if key.0 == ca && (key.2, key.3) == (ox, oy) { 1 } else { -1 };
            *edges.entry(key).or_default() += sign;
        }
    }
    if let Some((k, _)) = edges.iter().find(|(_, &v)| v != 0) {
        return Err(Error::Triangulation(format!(
            "folded torus mesh is not a closed manifold near edge {}-{}",
            k.0, k.1
        )));
    }
    Ok(())
}

/// A symmetric quadrature rule on the reference triangle.
///
/// Points are barycentric coordinates; weights sum to one, so the integral
/// over a physical element is `area · Σ w_q f(x_q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub degree: u32,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Physical quadrature points of an element with vertices `p`.
    pub fn map_points(&self, p: &[Vec2; 3]) -> Vec<Vec2> {
        self.points
            .iter()
            .map(|b| p[0] * b[0] + p[1] * b[1] + p[2] * b[2])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn orbit3(a: f64, b: f64, c: f64) -> Vec<[f64; 3]> {
    vec![[a, b, c], [c, a, b], [b, c, a]]
}

fn orbit6(a: f64, b: f64, c: f64) -> Vec<[f64; 3]> {
    vec![
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ]
}

/// Gauss rule on triangles exact to the requested polynomial degree.
///
/// Supported degrees are 1, 2, 3 and 5; degree 0 maps to 1 and degree 4 is
/// rounded up to 5 with a warning. Higher degrees are rejected.
pub fn gauss_rule(degree: u32) -> Result<QuadratureRule> {
    let rule = match degree {
        0 | 1 => QuadratureRule {
            degree: 1,
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
        },
        2 => QuadratureRule {
            degree: 2,
            points: orbit3(2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0),
            weights: vec![1.0 / 3.0; 3],
        },
        3 => QuadratureRule {
            degree: 3,
            // Strang-Fix six point rule
            points: orbit6(0.659_027_622_374_092, 0.231_933_368_553_031, 0.109_039_009_072_877),
            weights: vec![1.0 / 6.0; 6],
        },
        4 | 5 => {
            if degree == 4 {
                log::warn!("no degree-4 triangle rule, using the degree-5 rule");
            }
            let s = 15f64.sqrt();
            let a = (6.0 - s) / 21.0;
            let b = (6.0 + s) / 21.0;
            let wa = (155.0 - s) / 1200.0;
            let wb = (155.0 + s) / 1200.0;
            let mut points = vec![[1.0 / 3.0; 3]];
            points.extend(orbit3(1.0 - 2.0 * a, a, a));
            points.extend(orbit3(1.0 - 2.0 * b, b, b));
            QuadratureRule {
                degree: 5,
                points,
                weights: vec![0.225, wa, wa, wa, wb, wb, wb],
            }
        }
        d => return Err(Error::UnsupportedDegree(d)),
    };
    Ok(rule)
}
