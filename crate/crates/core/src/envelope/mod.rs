//! Convex-envelope machinery: global nodal envelopes over an enclosing
//! ball, nodal contact sets, local envelopes on stars, sub-differential
//! polytopes with their measures and jump identities, and the discrete
//! Alexandroff-Bakelman-Pucci report.

mod hull;
mod lp;

pub use hull::{convex_hull, polygon_area, polygon_perimeter};
pub use lp::{DenseLp, LpSolution};

use crate::geom::{self, Point};
use crate::mesh::Mesh;
use crate::{Error, Result};
use rayon::prelude::*;

/// Which function the envelope is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeMode {
    /// Envelope of −v⁻ over the enclosing ball; the mode the ABP
    /// estimate uses. Requires v ≥ 0 on ∂Ω.
    Abp,
    /// Envelope of v itself over the convex hull of the nodes; reproduces
    /// the textbook piecewise-linear illustration.
    Illustration,
}

#[derive(Clone, Copy, Debug)]
pub struct EnvelopeBall {
    pub center: Point,
    pub radius: f64,
}

/// Default enclosing ball: the circumscribed ball of the vertex set,
/// scaled by two.
pub fn default_ball(mesh: &Mesh) -> EnvelopeBall {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for v in mesh.vertices() {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let radius = mesh
        .vertices()
        .iter()
        .map(|&v| geom::dist(center, v))
        .fold(0.0, f64::max);
    EnvelopeBall { center, radius: 2.0 * radius }
}

#[derive(Clone, Debug)]
pub struct EnvelopeResult {
    pub mode: EnvelopeMode,
    pub ball: Option<EnvelopeBall>,
    /// Envelope values Γ(v)(x_i) at every mesh vertex.
    pub values: Vec<f64>,
    /// Contact flags; set only for interior vertices.
    pub contact: Vec<bool>,
    /// Contact tolerance that was applied.
    pub tolerance: f64,
}

impl EnvelopeResult {
    pub fn contact_vertices(&self) -> Vec<usize> {
        self.contact
            .iter()
            .enumerate()
            .filter_map(|(v, &c)| c.then_some(v))
            .collect()
    }
}

/// The per-point linear program: maximize b + w·x over affine functions
/// L(x) = w·x + b below the targets, with the ∂B_R condition
/// polyhedralized by sampled directions and refined by exact tangent
/// cuts at the optimum.
struct EnvelopeLp {
    dim: usize,
    base: DenseLp,
    ball: Option<EnvelopeBall>,
    scale: f64,
}

impl EnvelopeLp {
    fn build(mesh: &Mesh, targets: &[f64], ball: Option<EnvelopeBall>) -> EnvelopeLp {
        let dim = mesh.dim();
        let n = dim + 1;
        let mut base = DenseLp::new(n);
        let mut scale = 1.0f64;
        for (j, &t) in targets.iter().enumerate() {
            let z = mesh.vertex(j);
            let mut row = [0.0; 3];
            row[..dim].copy_from_slice(&z[..dim]);
            row[dim] = 1.0;
            base.push(&row[..n], t);
            scale = scale.max(t.abs());
        }
        if let Some(ball) = ball {
            let m_dirs = if dim == 1 { 2 } else { 64 };
            for k in 0..m_dirs {
                let u = if dim == 1 {
                    [if k == 0 { 1.0 } else { -1.0 }, 0.0]
                } else {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / m_dirs as f64;
                    [t.cos(), t.sin()]
                };
                let p = geom::add(ball.center, geom::scale(ball.radius, u));
                let mut row = [0.0; 3];
                row[..dim].copy_from_slice(&p[..dim]);
                row[dim] = 1.0;
                base.push(&row[..n], 0.0);
            }
            scale = scale.max(ball.radius);
        }
        EnvelopeLp { dim, base, ball, scale }
    }

    /// Envelope value at an arbitrary point. The sampled-direction LP is
    /// an outer relaxation of the exact ∂B_R condition; tangent cuts at
    /// the running optimum close the gap. Because shifting the optimal
    /// plane down by its cone violation makes it exactly feasible, the
    /// true value is bracketed within `violation`, which also terminates
    /// degenerate cases where the optimal face is parallel to the
    /// objective.
    fn value_at(&self, x: Point) -> Result<f64> {
        let n = self.dim + 1;
        let mut c = [0.0; 3];
        c[..self.dim].copy_from_slice(&x[..self.dim]);
        c[self.dim] = 1.0;
        let mut lp = self.base.clone();
        let cut_tol = 1e-11 * (1.0 + self.scale);
        // Cuts stop helping once the violation reaches the simplex's own
        // feasibility resolution; the bracket argument still certifies the
        // value there.
        let stall_ceiling = 1e-8 * (1.0 + self.scale);
        let mut last_violation = f64::INFINITY;
        for _ in 0..80 {
            let sol = lp.maximize(&c[..n])?;
            let Some(ball) = self.ball else { return Ok(sol.value) };
            // In 1D the two directions are the exact cone; no cuts needed.
            if self.dim == 1 {
                return Ok(sol.value);
            }
            let w = [sol.x[0], sol.x[1]];
            let b = sol.x[2];
            let wn = geom::norm(w);
            let violation = b + geom::dot(w, ball.center) + ball.radius * wn;
            let stalled = violation >= 0.9 * last_violation && violation <= stall_ceiling;
            if violation <= cut_tol || wn == 0.0 || stalled {
                return Ok(sol.value - 0.5 * violation.max(0.0));
            }
            last_violation = violation;
            let u = geom::scale(1.0 / wn, w);
            let p = geom::add(ball.center, geom::scale(ball.radius, u));
            lp.push(&[p[0], p[1], 1.0], 0.0);
        }
        Err(Error::LinearProgram("tangent cuts did not converge".into()))
    }
}

fn targets_for(mode: EnvelopeMode, v: &[f64]) -> Vec<f64> {
    match mode {
        EnvelopeMode::Abp => v.iter().map(|&x| x.min(0.0)).collect(),
        EnvelopeMode::Illustration => v.to_vec(),
    }
}

fn check_abp_preconditions(mesh: &Mesh, v: &[f64], ball: &EnvelopeBall) -> Result<()> {
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * (1.0 + norm);
    for vtx in 0..mesh.n_vertices() {
        if mesh.is_boundary_vertex(vtx) && v[vtx] < -tol {
            return Err(Error::InvalidConfig(format!(
                "ABP mode requires v ≥ 0 on the boundary; vertex {vtx} has {}",
                v[vtx]
            )));
        }
    }
    for vtx in mesh.vertices() {
        if geom::dist(*vtx, ball.center) >= ball.radius - tol {
            return Err(Error::InvalidConfig(
                "enclosing ball must contain the domain with positive margin".into(),
            ));
        }
    }
    Ok(())
}

/// Envelope value at an arbitrary point of the ball (or of the node hull
/// in illustration mode).
pub fn envelope_value(
    mesh: &Mesh,
    v: &[f64],
    mode: EnvelopeMode,
    ball: Option<EnvelopeBall>,
    x: Point,
) -> Result<f64> {
    let ball = resolve_ball(mesh, v, mode, ball)?;
    let lp = EnvelopeLp::build(mesh, &targets_for(mode, v), ball);
    lp.value_at(x)
}

fn resolve_ball(
    mesh: &Mesh,
    v: &[f64],
    mode: EnvelopeMode,
    ball: Option<EnvelopeBall>,
) -> Result<Option<EnvelopeBall>> {
    match mode {
        EnvelopeMode::Abp => {
            let ball = ball.unwrap_or_else(|| default_ball(mesh));
            check_abp_preconditions(mesh, v, &ball)?;
            Ok(Some(ball))
        }
        EnvelopeMode::Illustration => Ok(None),
    }
}

/// Nodal convex envelope: per node, the optimum of the supporting-plane
/// linear program, with contact flags on interior nodes where the
/// envelope touches v.
pub fn nodal_convex_envelope(
    mesh: &Mesh,
    v: &[f64],
    ball: Option<EnvelopeBall>,
    mode: EnvelopeMode,
) -> Result<EnvelopeResult> {
    assert_eq!(v.len(), mesh.n_vertices());
    let ball = resolve_ball(mesh, v, mode, ball)?;
    let lp = EnvelopeLp::build(mesh, &targets_for(mode, v), ball);
    let values: Vec<f64> = (0..mesh.n_vertices())
        .into_par_iter()
        .map(|i| lp.value_at(mesh.vertex(i)))
        .collect::<Result<_>>()?;
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tolerance = 1e-9 * (1.0 + norm);
    let contact: Vec<bool> = (0..mesh.n_vertices())
        .map(|i| {
            if mesh.is_boundary_vertex(i) {
                return false;
            }
            let touches = (values[i] - v[i]).abs() <= tolerance;
            match mode {
                EnvelopeMode::Abp => touches && v[i] <= tolerance,
                EnvelopeMode::Illustration => touches,
            }
        })
        .collect();
    Ok(EnvelopeResult { mode, ball, values, contact, tolerance })
}

/// Concave counterpart by sign flip: envelope of −v with negated values.
pub fn nodal_concave_envelope(
    mesh: &Mesh,
    v: &[f64],
    ball: Option<EnvelopeBall>,
) -> Result<EnvelopeResult> {
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let mut result = nodal_convex_envelope(mesh, &neg, ball, EnvelopeMode::Abp)?;
    for val in &mut result.values {
        *val = -*val;
    }
    Ok(result)
}

/// Piecewise linear local convex envelope on a star: the supremum of
/// affine functions pinned to v at the center and below v at the ring
/// nodes. Its gradients are constant per star element.
#[derive(Clone, Debug)]
pub struct LocalEnvelope {
    pub vertex: usize,
    pub center_value: f64,
    /// Ring vertex ids (star vertices other than the center), ascending.
    pub ring: Vec<usize>,
    /// Envelope values at the ring nodes, aligned with `ring`.
    pub ring_values: Vec<f64>,
    /// (element id, ∇γ on that element) for every star element.
    pub element_gradients: Vec<(usize, Point)>,
}

impl LocalEnvelope {
    pub fn gradient_on(&self, element: usize) -> Option<Point> {
        self.element_gradients
            .iter()
            .find(|&&(e, _)| e == element)
            .map(|&(_, g)| g)
    }
}

pub fn local_envelope(mesh: &Mesh, v: &[f64], vertex: usize) -> Result<LocalEnvelope> {
    if mesh.is_boundary_vertex(vertex) {
        return Err(Error::NotInteriorVertex(vertex));
    }
    let x0 = mesh.vertex(vertex);
    let v0 = v[vertex];
    let mut ring: Vec<usize> = mesh
        .star(vertex)
        .iter()
        .flat_map(|&e| mesh.element(e).iter().copied())
        .filter(|&w| w != vertex)
        .collect();
    ring.sort_unstable();
    ring.dedup();
    let dirs: Vec<Point> = ring.iter().map(|&j| geom::sub(mesh.vertex(j), x0)).collect();
    let gaps: Vec<f64> = ring.iter().map(|&j| v[j] - v0).collect();

    match mesh.dim() {
        1 => {
            // Two neighbors; the slope interval is [lo, hi].
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (d, g) in dirs.iter().zip(&gaps) {
                if d[0] > 0.0 {
                    hi = hi.min(g / d[0]);
                } else {
                    lo = lo.max(g / d[0]);
                }
            }
            let scale = gaps.iter().fold(1.0f64, |m, g| m.max(g.abs()));
            if lo > hi + 1e-12 * scale {
                return Err(Error::NotSupportable(vertex));
            }
            let hi = hi.max(lo);
            let mut element_gradients = Vec::with_capacity(2);
            for &e in mesh.star(vertex) {
                let pts = mesh.element_points(e);
                let mid = 0.5 * (pts[0][0] + pts[1][0]);
                let slope = if mid < x0[0] { lo } else { hi };
                element_gradients.push((e, [slope, 0.0]));
            }
            let ring_values: Vec<f64> = dirs
                .iter()
                .map(|d| v0 + if d[0] < 0.0 { lo * d[0] } else { hi * d[0] })
                .collect();
            Ok(LocalEnvelope { vertex, center_value: v0, ring, ring_values, element_gradients })
        }
        _ => {
            // Vertices of the gradient polytope W = {w : w·d_j ≤ g_j} from
            // all constraint pairs, kept when feasible.
            let m = ring.len();
            let scale = gaps
                .iter()
                .zip(&dirs)
                .fold(1.0f64, |s, (g, d)| s.max(g.abs()).max(geom::norm(*d)));
            let ftol = 1e-10 * scale;
            let mut candidates: Vec<Point> = Vec::new();
            for a in 0..m {
                for b in (a + 1)..m {
                    let det = geom::cross(dirs[a], dirs[b]);
                    if det.abs() <= 1e-13 * geom::norm(dirs[a]) * geom::norm(dirs[b]) {
                        continue;
                    }
                    let w = [
                        (gaps[a] * dirs[b][1] - gaps[b] * dirs[a][1]) / det,
                        (gaps[b] * dirs[a][0] - gaps[a] * dirs[b][0]) / det,
                    ];
                    let feasible = dirs
                        .iter()
                        .zip(&gaps)
                        .all(|(d, &g)| geom::dot(w, *d) <= g + ftol * (1.0 + geom::norm(w)));
                    if feasible {
                        candidates.push(w);
                    }
                }
            }
            if candidates.is_empty() {
                return Err(Error::NotSupportable(vertex));
            }
            // Lexicographic order makes the strict-max scan deterministic;
            // ties pick the smallest gradient.
            candidates.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            candidates.dedup_by(|a, b| geom::dist(*a, *b) <= 1e-12 * (1.0 + geom::norm(*b)));
            let mut element_gradients = Vec::with_capacity(mesh.star(vertex).len());
            for &e in mesh.star(vertex) {
                let pts = mesh.element_points(e);
                let c_dir = geom::sub(crate::mesh::centroid(&pts), x0);
                let mut best = candidates[0];
                let mut best_val = geom::dot(best, c_dir);
                for &w in &candidates[1..] {
                    let val = geom::dot(w, c_dir);
                    if val > best_val + 1e-13 * (1.0 + best_val.abs()) {
                        best = w;
                        best_val = val;
                    }
                }
                element_gradients.push((e, best));
            }
            let ring_values: Vec<f64> = dirs
                .iter()
                .map(|d| {
                    v0 + candidates
                        .iter()
                        .map(|&w| geom::dot(w, *d))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            Ok(LocalEnvelope { vertex, center_value: v0, ring, ring_values, element_gradients })
        }
    }
}

/// Sub-differential of a local envelope at its center node: the convex
/// polytope of element gradients, its d-measure, and the independently
/// computed jump sum Σ_F J_F(γ) over the star faces through the node.
#[derive(Clone, Debug)]
pub struct SubdifferentialPolytope {
    pub vertex: usize,
    /// Hull vertices (CCW ring in 2D; the two slopes in 1D).
    pub gradient_vertices: Vec<Point>,
    pub measure: f64,
    /// Closed boundary length of the polytope (2D); equals `measure` in 1D.
    pub perimeter: f64,
    /// Σ_{F ∋ x_i} J_F(γ), computed from the per-element gradients.
    pub jump_sum: f64,
}

pub fn subdifferential(mesh: &Mesh, env: &LocalEnvelope) -> SubdifferentialPolytope {
    let center = env.vertex;
    // Jump sum over interior faces through the node, from γ's gradients.
    let mut jump_sum = 0.0;
    for &fi in mesh.faces_of_vertex(center) {
        let f = &mesh.faces()[fi];
        let Some(minus) = f.elements.1 else { continue };
        let (Some(gp), Some(gm)) = (env.gradient_on(f.elements.0), env.gradient_on(minus)) else {
            continue;
        };
        jump_sum += geom::dot(f.normal, geom::sub(gm, gp));
    }
    match mesh.dim() {
        1 => {
            let lo = env.element_gradients.iter().map(|&(_, g)| g[0]).fold(f64::INFINITY, f64::min);
            let hi =
                env.element_gradients.iter().map(|&(_, g)| g[0]).fold(f64::NEG_INFINITY, f64::max);
            SubdifferentialPolytope {
                vertex: center,
                gradient_vertices: vec![[lo, 0.0], [hi, 0.0]],
                measure: hi - lo,
                perimeter: hi - lo,
                jump_sum,
            }
        }
        _ => {
            let grads: Vec<Point> = env.element_gradients.iter().map(|&(_, g)| g).collect();
            let ring = convex_hull(&grads);
            SubdifferentialPolytope {
                vertex: center,
                measure: polygon_area(&ring),
                perimeter: polygon_perimeter(&ring),
                gradient_vertices: ring,
                jump_sum,
            }
        }
    }
}

/// Isoperimetric bound for convex 2D polytopes: area ≤ perimeter²/(4π),
/// the concrete constant behind the jump estimate of the sub-differential
/// measure.
pub fn jump_bound_check(polytope: &SubdifferentialPolytope) -> bool {
    polytope.measure <= polytope.perimeter.powi(2) / (4.0 * std::f64::consts::PI) + 1e-12
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ContactNodeInfo {
    pub vertex: usize,
    pub subdiff_measure: f64,
    pub jump_sum: f64,
}

/// Discrete ABP diagnostic for a discrete function v with L_h v = f_i.
#[derive(Clone, Debug)]
pub struct AbpReport {
    pub sup_negative: f64,
    pub contact_vertices: Vec<usize>,
    /// (Σ_{contact} |f_i|^d |ω_i|)^{1/d}.
    pub abp_sum: f64,
    /// sup v⁻ / abp_sum; 0 when the negative part vanishes, the empirical
    /// stand-in for the estimate's constant otherwise.
    pub ratio: f64,
    pub per_node: Vec<ContactNodeInfo>,
    /// Mesh constant max_F∋x_i |F|^{-d} |ω_i|^{d-1}.
    pub g_constant: f64,
    /// False when a positive negative part coexists with an empty/zero
    /// contact sum, which contradicts the ABP estimate and flags a
    /// contact-set computation bug.
    pub sound: bool,
}

impl AbpReport {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "sup_negative": self.sup_negative,
            "abp_sum": self.abp_sum,
            "ratio": self.ratio,
            "contact_count": self.contact_vertices.len(),
            "G": self.g_constant,
            "sound": self.sound,
        })
        .to_string()
    }
}

/// Mesh constant of the jump estimate: max over interior nodes and their
/// faces of |F|^{−d} |ω_i|^{d−1}.
pub fn mesh_g_constant(mesh: &Mesh) -> f64 {
    let d = mesh.dim() as i32;
    let mut g = 0.0f64;
    for &i in mesh.interior_vertices() {
        let omega = mesh.star_volume(i);
        for &fi in mesh.faces_of_vertex(i) {
            let f = &mesh.faces()[fi];
            g = g.max(f.measure.powi(-d) * omega.powi(d - 1));
        }
    }
    g
}

/// Assembles the ABP report for nodal values `v` (all vertices, v ≥ 0 on
/// ∂Ω) and lumped loads `f_interior` aligned with
/// `mesh.interior_vertices()`.
pub fn abp_report(
    mesh: &Mesh,
    v: &[f64],
    f_interior: &[f64],
    ball: Option<EnvelopeBall>,
) -> Result<AbpReport> {
    assert_eq!(f_interior.len(), mesh.interior_vertices().len());
    let d = mesh.dim() as f64;
    let g_constant = mesh_g_constant(mesh);
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sup_negative = v.iter().fold(0.0f64, |m, &x| m.max(-x));
    // Below solver precision the negative part is numerically zero and
    // the estimate is vacuous.
    if sup_negative <= 1e-12 * norm.max(1.0) {
        return Ok(AbpReport {
            sup_negative: 0.0,
            contact_vertices: Vec::new(),
            abp_sum: 0.0,
            ratio: 0.0,
            per_node: Vec::new(),
            g_constant,
            sound: true,
        });
    }
    let envelope = nodal_convex_envelope(mesh, v, ball, EnvelopeMode::Abp)?;
    let contact_vertices = envelope.contact_vertices();
    let mut abp_pow = 0.0;
    for (row, &i) in mesh.interior_vertices().iter().enumerate() {
        if envelope.contact[i] {
            abp_pow += f_interior[row].abs().powf(d) * mesh.star_volume(i);
        }
    }
    let abp_sum = abp_pow.powf(1.0 / d);
    let per_node: Vec<ContactNodeInfo> = contact_vertices
        .par_iter()
        .map(|&i| {
            let local = local_envelope(mesh, v, i)?;
            let poly = subdifferential(mesh, &local);
            Ok(ContactNodeInfo {
                vertex: i,
                subdiff_measure: poly.measure,
                jump_sum: poly.jump_sum,
            })
        })
        .collect::<Result<_>>()?;
    let sound = abp_sum > 0.0;
    let ratio = if sound { sup_negative / abp_sum } else { f64::INFINITY };
    Ok(AbpReport {
        sup_negative,
        contact_vertices,
        abp_sum,
        ratio,
        per_node,
        g_constant,
        sound,
    })
}

#[cfg(test)]
mod tests;
