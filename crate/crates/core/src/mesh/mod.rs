//! Simplicial meshes for d ∈ {1, 2}: topology, stars, face jumps, the
//! jump-form discrete Laplacian, point location and boundary ray clipping.

mod acuteness;
mod generate;
mod io;

pub use acuteness::AcutenessReport;
pub use generate::BoxDomain;

use crate::geom::{self, Point};
use crate::{Error, Result};

/// A (d−1)-simplex of the mesh: a vertex in 1D, an edge in 2D.
#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex ids; only the first `dim` entries are meaningful.
    pub vertices: [usize; 2],
    /// Adjacent element ids. Interior faces have two, boundary faces one.
    pub elements: (usize, Option<usize>),
    /// Unit normal pointing out of `elements.0` (outward for boundary faces).
    pub normal: Point,
    /// (d−1)-measure: 1 for a vertex, edge length in 2D.
    pub measure: f64,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.elements.1.is_none()
    }
}

/// Result of point location.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Inside { element: usize, bary: [f64; 3] },
    Outside,
}

/// Immutable simplicial mesh. All queries are read-only and safe to use
/// concurrently; construction derives the full topology once.
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    /// Flattened connectivity, stride dim + 1, positively oriented.
    elements: Vec<usize>,
    n_elements: usize,
    faces: Vec<Face>,
    boundary_vertex: Vec<bool>,
    /// Per vertex: ids of elements containing it (the star ω_i), sorted.
    stars: Vec<Vec<usize>>,
    /// Per vertex: ids of faces containing it, sorted.
    vertex_faces: Vec<Vec<usize>>,
    star_volume: Vec<f64>,
    element_volume: Vec<f64>,
    interior: Vec<usize>,
    /// Max element diameter.
    h: f64,
    min_diameter: f64,
    /// Max diameter/inradius ratio over elements.
    shape_constant: f64,
    /// Uniform background grid for point location.
    grid: BucketGrid,
    /// Set when generated from an axis-aligned box; enables exact
    /// slab-based boundary clipping.
    box_domain: Option<BoxDomain>,
}

struct BucketGrid {
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl BucketGrid {
    fn build(dim: usize, vertices: &[Point], elements: &[usize], n_elements: usize, h: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let cell = h.max(1e-300);
        let span = |k: usize| ((hi[k] - lo[k]) / cell).ceil().max(1.0) as usize;
        let nx = span(0);
        let ny = if dim == 2 { span(1) } else { 1 };
        let mut buckets = vec![Vec::new(); nx * ny];
        let stride = dim + 1;
        let pad = 1e-9 * cell;
        for e in 0..n_elements {
            let vs = &elements[e * stride..(e + 1) * stride];
            let mut elo = [f64::INFINITY; 2];
            let mut ehi = [f64::NEG_INFINITY; 2];
            for &v in vs {
                for k in 0..2 {
                    elo[k] = elo[k].min(vertices[v][k]);
                    ehi[k] = ehi[k].max(vertices[v][k]);
                }
            }
            let bin = |x: f64, n: usize, l: f64| -> usize {
                (((x - l) / cell).floor().max(0.0) as usize).min(n - 1)
            };
            let (i0, i1) = (bin(elo[0] - pad, nx, lo[0]), bin(ehi[0] + pad, nx, lo[0]));
            let (j0, j1) = if dim == 2 {
                (bin(elo[1] - pad, ny, lo[1]), bin(ehi[1] + pad, ny, lo[1]))
            } else {
                (0, 0)
            };
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(e);
                }
            }
        }
        BucketGrid { lo, cell, nx, ny, buckets }
    }

    fn candidates(&self, x: Point) -> &[usize] {
        let bin = |v: f64, l: f64, n: usize| -> Option<usize> {
            let i = ((v - l) / self.cell).floor();
            if i < -1.0 {
                return None;
            }
            Some((i.max(0.0) as usize).min(n - 1))
        };
        match (bin(x[0], self.lo[0], self.nx), bin(x[1], self.lo[1], self.ny)) {
            (Some(i), Some(j)) => &self.buckets[j * self.nx + i],
            _ => &[],
        }
    }
}

impl Mesh {
    /// Builds a mesh from raw vertices and element connectivity
    /// (flattened, stride d + 1). Elements are reoriented positively;
    /// faces, stars and the location grid are derived.
    pub fn from_parts(dim: usize, vertices: Vec<Point>, mut elements: Vec<usize>) -> Result<Mesh> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let stride = dim + 1;
        if elements.is_empty() || elements.len() % stride != 0 {
            return Err(Error::InvalidMesh("element list empty or wrong stride".into()));
        }
        let n_elements = elements.len() / stride;
        if vertices.len() < stride {
            return Err(Error::InvalidMesh("too few vertices".into()));
        }
        for &v in &elements {
            if v >= vertices.len() {
                return Err(Error::InvalidMesh(format!("vertex index {v} out of range")));
            }
        }

        // Positive orientation and element measures.
        let mut element_volume = vec![0.0; n_elements];
        let mut h: f64 = 0.0;
        let mut min_diameter = f64::INFINITY;
        let mut shape_constant: f64 = 0.0;
        for e in 0..n_elements {
            let vs = &mut elements[e * stride..(e + 1) * stride];
            let pts: Vec<Point> = vs.iter().map(|&v| vertices[v]).collect();
            let mut vol = geom::simplex_signed_measure(dim, &pts);
            if vol < 0.0 {
                vs.swap(stride - 2, stride - 1);
                vol = -vol;
            }
            let diam = match dim {
                1 => vol,
                2 => {
                    let pts: Vec<Point> = vs.iter().map(|&v| vertices[v]).collect();
                    let mut d: f64 = 0.0;
                    for a in 0..3 {
                        for b in (a + 1)..3 {
                            d = d.max(geom::dist(pts[a], pts[b]));
                        }
                    }
                    d
                }
                _ => unreachable!(),
            };
            if !(vol > 0.0) || !diam.is_finite() {
                return Err(Error::InvalidMesh(format!("element {e} is degenerate")));
            }
            let inradius = match dim {
                1 => 0.5 * vol,
                2 => {
                    let pts: Vec<Point> = vs.iter().map(|&v| vertices[v]).collect();
                    let perim = geom::dist(pts[0], pts[1])
                        + geom::dist(pts[1], pts[2])
                        + geom::dist(pts[2], pts[0]);
                    2.0 * vol / perim
                }
                _ => unreachable!(),
            };
            element_volume[e] = vol;
            h = h.max(diam);
            min_diameter = min_diameter.min(diam);
            shape_constant = shape_constant.max(diam / inradius);
        }

        // Faces keyed by sorted vertex tuple.
        use std::collections::HashMap;
        let mut face_map: HashMap<[usize; 2], (usize, Option<usize>, [usize; 2])> = HashMap::new();
        for e in 0..n_elements {
            let vs = &elements[e * stride..(e + 1) * stride];
            for skip in 0..stride {
                let mut fv = [0usize; 2];
                let mut n = 0;
                for (k, &v) in vs.iter().enumerate() {
                    if k != skip {
                        fv[n] = v;
                        n += 1;
                    }
                }
                let raw = fv;
                if dim == 2 && fv[0] > fv[1] {
                    fv.swap(0, 1);
                }
                match face_map.get_mut(&fv) {
                    None => {
                        face_map.insert(fv, (e, None, raw));
                    }
                    Some((_, second @ None, _)) => {
                        *second = Some(e);
                    }
                    Some(_) => {
                        return Err(Error::InvalidMesh(format!(
                            "face {fv:?} shared by more than two elements"
                        )));
                    }
                }
            }
        }

        let mut keys: Vec<[usize; 2]> = face_map.keys().copied().collect();
        keys.sort();
        let mut faces = Vec::with_capacity(keys.len());
        let mut boundary_vertex = vec![false; vertices.len()];
        for key in keys {
            let (e0, e1, _) = face_map[&key];
            let (normal, measure) = match dim {
                1 => {
                    // Outward from e0 along the axis.
                    let p = vertices[key[0]][0];
                    let vs = &elements[e0 * 2..e0 * 2 + 2];
                    let mid = 0.5 * (vertices[vs[0]][0] + vertices[vs[1]][0]);
                    let sign = if p >= mid { 1.0 } else { -1.0 };
                    ([sign, 0.0], 1.0)
                }
                2 => {
                    let a = vertices[key[0]];
                    let b = vertices[key[1]];
                    let t = geom::sub(b, a);
                    let len = geom::norm(t);
                    let mut n = [t[1] / len, -t[0] / len];
                    // Orient out of e0.
                    let vs = &elements[e0 * 3..e0 * 3 + 3];
                    let c = centroid(&[vertices[vs[0]], vertices[vs[1]], vertices[vs[2]]]);
                    let midpoint = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                    if geom::dot(n, geom::sub(c, midpoint)) > 0.0 {
                        n = [-n[0], -n[1]];
                    }
                    (n, len)
                }
                _ => unreachable!(),
            };
            if e1.is_none() {
                for k in 0..dim {
                    boundary_vertex[key[k]] = true;
                }
            }
            faces.push(Face { vertices: key, elements: (e0, e1), normal, measure });
        }

        // Stars and per-vertex face lists.
        let mut stars = vec![Vec::new(); vertices.len()];
        for e in 0..n_elements {
            for &v in &elements[e * stride..(e + 1) * stride] {
                stars[v].push(e);
            }
        }
        for s in &mut stars {
            s.sort_unstable();
        }
        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..dim {
                vertex_faces[f.vertices[k]].push(fi);
            }
        }
        let star_volume: Vec<f64> = stars
            .iter()
            .map(|s| s.iter().map(|&e| element_volume[e]).sum())
            .collect();
        let interior: Vec<usize> =
            (0..vertices.len()).filter(|&v| !boundary_vertex[v]).collect();

        let grid = BucketGrid::build(dim, &vertices, &elements, n_elements, h);
        Ok(Mesh {
            dim,
            vertices,
            elements,
            n_elements,
            faces,
            boundary_vertex,
            stars,
            vertex_faces,
            star_volume,
            element_volume,
            interior,
            h,
            min_diameter,
            shape_constant,
            grid,
            box_domain: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e * (self.dim + 1)..(e + 1) * (self.dim + 1)]
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.element(e).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_volume(&self, e: usize) -> f64 {
        self.element_volume[e]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Interior vertex ids, ascending.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior
    }

    /// Element ids of the star ω_i.
    pub fn star(&self, v: usize) -> &[usize] {
        &self.stars[v]
    }

    pub fn star_volume(&self, v: usize) -> f64 {
        self.star_volume[v]
    }

    /// ∫_Ω φ_i = |ω_i| / (d+1).
    pub fn hat_integral(&self, v: usize) -> f64 {
        self.star_volume[v] / (self.dim as f64 + 1.0)
    }

    /// Face ids containing vertex v.
    pub fn faces_of_vertex(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn min_diameter(&self) -> f64 {
        self.min_diameter
    }

    pub fn shape_constant(&self) -> f64 {
        self.shape_constant
    }

    pub fn box_domain(&self) -> Option<&BoxDomain> {
        self.box_domain.as_ref()
    }

    pub(crate) fn set_box_domain(&mut self, b: BoxDomain) {
        self.box_domain = Some(b);
    }

    /// Gradient of the piecewise linear interpolant of nodal values `v`
    /// restricted to element `e`.
    pub fn element_gradient(&self, v: &[f64], e: usize) -> Point {
        let verts = self.element(e);
        let pts = self.element_points(e);
        let grads = geom::hat_gradients(self.dim, &pts);
        let mut g = [0.0, 0.0];
        for (k, &vertex) in verts.iter().enumerate() {
            g = geom::add(g, geom::scale(v[vertex], grads[k]));
        }
        g
    }

    /// Point location with deterministic lowest-element-index tie break.
    pub fn locate(&self, x: Point) -> Location {
        let tol = 1e-12;
        let mut best: Option<(usize, [f64; 3])> = None;
        for &e in self.grid.candidates(x) {
            let pts = self.element_points(e);
            let b = geom::barycentric(self.dim, &pts, x);
            let min_b = b.iter().take(self.dim + 1).cloned().fold(f64::INFINITY, f64::min);
            if min_b >= -tol {
                match best {
                    Some((be, _)) if be <= e => {}
                    _ => best = Some((e, b)),
                }
            }
        }
        match best {
            Some((element, bary)) => Location::Inside { element, bary },
            None => Location::Outside,
        }
    }

    /// Evaluates the piecewise linear interpolant of nodal values at `x`.
    pub fn interpolate(&self, v: &[f64], x: Point) -> Option<f64> {
        match self.locate(x) {
            Location::Outside => None,
            Location::Inside { element, bary } => {
                let verts = self.element(element);
                let mut val = 0.0;
                for (k, &vertex) in verts.iter().enumerate() {
                    val += bary[k] * v[vertex];
                }
                Some(val)
            }
        }
    }

    /// Distance from a point to the boundary ∂Ω.
    pub fn distance_to_boundary(&self, x: Point) -> f64 {
        if let Some(b) = &self.box_domain {
            return b.distance_to_boundary(x);
        }
        let mut d = f64::INFINITY;
        for f in &self.faces {
            if !f.is_boundary() {
                continue;
            }
            let fd = match self.dim {
                1 => (x[0] - self.vertices[f.vertices[0]][0]).abs(),
                2 => geom::point_segment_distance(
                    x,
                    self.vertices[f.vertices[0]],
                    self.vertices[f.vertices[1]],
                ),
                _ => unreachable!(),
            };
            d = d.min(fd);
        }
        d
    }

    /// Clipping parameters (θ₁, θ₂) of the segment family x ± t·y against
    /// ∂Ω: θ = 1 when the endpoint stays in the closed domain, otherwise
    /// the first boundary crossing. `x` must be interior.
    pub fn boundary_clip(&self, x: Point, y: Point) -> (f64, f64) {
        (self.clip_one_side(x, y), self.clip_one_side(x, geom::scale(-1.0, y)))
    }

    fn clip_one_side(&self, x: Point, y: Point) -> f64 {
        if let Some(b) = &self.box_domain {
            return b.exit_time(x, y).min(1.0).max(1e-14 * self.h);
        }
        if matches!(self.locate(geom::add(x, y)), Location::Inside { .. }) {
            return 1.0;
        }
        let mut theta = f64::INFINITY;
        let grazing = 1e-14 * self.h;
        for f in &self.faces {
            if !f.is_boundary() {
                continue;
            }
            let t = match self.dim {
                1 => {
                    let p = self.vertices[f.vertices[0]][0];
                    if y[0] == 0.0 {
                        continue;
                    }
                    let t = (p - x[0]) / y[0];
                    if t <= grazing {
                        continue;
                    }
                    t
                }
                2 => {
                    let a = self.vertices[f.vertices[0]];
                    let b = self.vertices[f.vertices[1]];
                    let ab = geom::sub(b, a);
                    let denom = geom::cross(y, ab);
                    if denom.abs() < 1e-300 {
                        continue;
                    }
                    let t = geom::cross(geom::sub(a, x), ab) / denom;
                    let s = geom::cross(geom::sub(a, x), y) / denom;
                    let s_tol = 1e-12;
                    if !(-s_tol..=1.0 + s_tol).contains(&s) || t <= grazing {
                        continue;
                    }
                    t
                }
                _ => unreachable!(),
            };
            theta = theta.min(t);
        }
        if !theta.is_finite() {
            // The endpoint is outside but no crossing resolved; treat the
            // full segment as admissible and let locate() tolerances absorb it.
            return 1.0;
        }
        theta.min(1.0).max(grazing)
    }

    /// Jump of the normal derivative of the interpolant of `v` across an
    /// interior face, signed so that convex functions give J_F ≥ 0.
    pub fn face_jump(&self, v: &[f64], face: usize) -> Result<f64> {
        let f = &self.faces[face];
        let plus = f.elements.0;
        let minus = f.elements.1.ok_or(Error::BoundaryFace(face))?;
        let g_plus = self.element_gradient(v, plus);
        let g_minus = self.element_gradient(v, minus);
        Ok(geom::dot(f.normal, geom::sub(g_minus, g_plus)))
    }

    /// Jump-form discrete Laplacian Δ_h v at an interior vertex:
    /// ((d+1)/d) Σ_{F ∋ x_i} (|F|/|ω_i|) J_F(v).
    pub fn discrete_laplacian(&self, v: &[f64], vertex: usize) -> Result<f64> {
        if self.boundary_vertex[vertex] {
            return Err(Error::NotInteriorVertex(vertex));
        }
        let factor = (self.dim as f64 + 1.0) / self.dim as f64 / self.star_volume[vertex];
        let mut sum = 0.0;
        for &fi in &self.vertex_faces[vertex] {
            let f = &self.faces[fi];
            sum += f.measure * self.face_jump(v, fi)?;
        }
        Ok(factor * sum)
    }

    /// Nodal coefficients of the jump-form discrete Laplacian at an
    /// interior vertex, merged in ascending vertex order.
    pub fn laplacian_row(&self, vertex: usize) -> Result<Vec<(usize, f64)>> {
        if self.boundary_vertex[vertex] {
            return Err(Error::NotInteriorVertex(vertex));
        }
        let factor = (self.dim as f64 + 1.0) / self.dim as f64 / self.star_volume[vertex];
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(4 * (self.dim + 1) * 4);
        for &fi in &self.vertex_faces[vertex] {
            let f = &self.faces[fi];
            let minus = f.elements.1.expect("interior vertex has interior faces");
            let scale = factor * f.measure;
            for (e, sign) in [(f.elements.0, -1.0), (minus, 1.0)] {
                let verts = self.element(e);
                let pts = self.element_points(e);
                let grads = geom::hat_gradients(self.dim, &pts);
                for (k, &vtx) in verts.iter().enumerate() {
                    entries.push((vtx, sign * scale * geom::dot(f.normal, grads[k])));
                }
            }
        }
        Ok(merge_entries(entries))
    }

    /// Stiffness pairings k_ij = (∇φ_i, ∇φ_j)_Ω for the row of vertex i,
    /// including the diagonal; the independent route to the discrete
    /// Laplacian, Δ_h v(x_i) = −(∫φ_i)⁻¹ Σ_j k_ij v_j.
    pub fn stiffness_row(&self, vertex: usize) -> Vec<(usize, f64)> {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for &e in &self.stars[vertex] {
            let verts = self.element(e);
            let pts = self.element_points(e);
            let grads = geom::hat_gradients(self.dim, &pts);
            let local_i = verts.iter().position(|&v| v == vertex).unwrap();
            for (k, &vtx) in verts.iter().enumerate() {
                entries.push((
                    vtx,
                    self.element_volume[e] * geom::dot(grads[local_i], grads[k]),
                ));
            }
        }
        merge_entries(entries)
    }

    /// Weak acuteness report: all stiffness pairings k_ij with i ≠ j,
    /// flagged when positive beyond tolerance.
    pub fn weak_acuteness_report(&self) -> AcutenessReport {
        acuteness::report(self)
    }
}

pub(crate) fn centroid(pts: &[Point]) -> Point {
    let mut c = [0.0, 0.0];
    for p in pts {
        c = geom::add(c, *p);
    }
    geom::scale(1.0 / pts.len() as f64, c)
}

/// Sorts sparse (index, value) pairs and sums duplicates; accumulation
/// order is index-sorted and therefore reproducible.
pub(crate) fn merge_entries(mut entries: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    entries.sort_by_key(|&(i, _)| i);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (i, v) in entries {
        match out.last_mut() {
            Some((j, acc)) if *j == i => *acc += v,
            _ => out.push((i, v)),
        }
    }
    out
}

#[cfg(test)]
mod tests;
