//! Weak acuteness: the stiffness pairings (∇φ_i, ∇φ_j)_Ω must be ≤ 0 for
//! i ≠ j. In 2D this is the classical condition that the two angles
//! opposite an edge sum to at most π.

use super::Mesh;
use crate::geom;

#[derive(Clone, Debug)]
pub struct AcutenessReport {
    pub is_weakly_acute: bool,
    /// (i, j, k_ij) for every off-diagonal pairing above tolerance.
    pub violating_pairs: Vec<(usize, usize, f64)>,
    /// Largest off-diagonal k_ij encountered (≤ 0 on weakly acute meshes
    /// up to round-off).
    pub max_offdiag: f64,
}

pub(super) fn report(mesh: &Mesh) -> AcutenessReport {
    use std::collections::HashMap;
    let mut k: HashMap<(usize, usize), f64> = HashMap::new();
    for e in 0..mesh.n_elements() {
        let verts = mesh.element(e);
        let pts = mesh.element_points(e);
        let grads = geom::hat_gradients(mesh.dim(), &pts);
        let vol = mesh.element_volume(e);
        for a in 0..verts.len() {
            for b in (a + 1)..verts.len() {
                let (i, j) = (verts[a].min(verts[b]), verts[a].max(verts[b]));
                *k.entry((i, j)).or_insert(0.0) += vol * geom::dot(grads[a], grads[b]);
            }
        }
    }
    let scale = k.values().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut violating_pairs: Vec<(usize, usize, f64)> = k
        .iter()
        .filter(|(_, &v)| v > tol)
        .map(|(&(i, j), &v)| (i, j, v))
        .collect();
    violating_pairs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let max_offdiag = k.values().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    AcutenessReport {
        is_weakly_acute: violating_pairs.is_empty(),
        violating_pairs,
        max_offdiag,
    }
}
