use super::*;
use crate::mesh::{BoxDomain, Mesh};
use approx::assert_relative_eq;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn nonnegative_function_has_zero_envelope() {
    let mesh = Mesh::structured(&BoxDomain::unit_square(), 0.25).unwrap();
    let v: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|p| (p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])) * 5.0)
        .collect();
    let result = nodal_convex_envelope(&mesh, &v, None, EnvelopeMode::Abp).unwrap();
    for (i, &val) in result.values.iter().enumerate() {
        assert!(val.abs() <= 1e-10, "Γ at {i} is {val}");
        // Contact exactly where v = 0, i.e. nowhere in the interior here.
        assert!(!result.contact[i] || v[i].abs() <= result.tolerance);
    }
    assert!(result.contact_vertices().is_empty());
}

#[test]
fn illustration_mode_reproduces_absolute_value() {
    // Diamond split along the x-axis, v = 1 at (±1, 0) and 0 at (0, ±1):
    // the envelope of v is |x₁|, which is not piecewise linear on the mesh.
    let mesh = Mesh::diamond();
    let v: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|p| if p[1].abs() > 0.5 { 0.0 } else { 1.0 })
        .collect();
    let result = nodal_convex_envelope(&mesh, &v, None, EnvelopeMode::Illustration).unwrap();
    for i in 0..mesh.n_vertices() {
        assert_relative_eq!(result.values[i], mesh.vertex(i)[0].abs(), epsilon = 1e-9);
    }
    for (x, expect) in [
        ([0.0, 0.0], 0.0),
        ([0.5, 0.0], 0.5),
        ([-0.25, 0.0], 0.25),
        ([0.25, 0.5], 0.25),
    ] {
        let val = envelope_value(&mesh, &v, EnvelopeMode::Illustration, None, x).unwrap();
        assert_relative_eq!(val, expect, epsilon = 1e-9);
    }
}

#[test]
fn cross_mesh_contact_and_sphere_active_values() {
    let mesh = Mesh::cross(1.0);
    let mut v = vec![0.0; 5];
    v[0] = -1.0;
    let result = nodal_convex_envelope(&mesh, &v, None, EnvelopeMode::Abp).unwrap();
    assert_eq!(result.contact_vertices(), vec![0]);
    assert_relative_eq!(result.values[0], -1.0, epsilon = 1e-9);
    // At the boundary vertex (1, 0) the optimal supporting plane leans on
    // the enclosing sphere of radius 2: Γ = −1/2 with w = (1/2, 0).
    assert_relative_eq!(result.values[1], -0.5, epsilon = 1e-8);
    let mid = envelope_value(&mesh, &v, EnvelopeMode::Abp, None, [0.5, 0.0]).unwrap();
    assert_relative_eq!(mid, -0.75, epsilon = 1e-8);
}

#[test]
fn abp_mode_rejects_negative_boundary_values() {
    let mesh = Mesh::cross(1.0);
    let mut v = vec![0.0; 5];
    v[1] = -0.5;
    assert!(nodal_convex_envelope(&mesh, &v, None, EnvelopeMode::Abp).is_err());
}

#[test]
fn envelope_min_equals_negative_part_sup() {
    // sup v⁻ = sup Γ(v)⁻: the horizontal plane at −sup v⁻ is feasible and
    // the global minimizer is a contact node.
    let mesh = Mesh::structured(&BoxDomain::unit_square(), 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v: Vec<f64> = (0..mesh.n_vertices())
        .map(|i| {
            if mesh.is_boundary_vertex(i) {
                0.0
            } else {
                rng.gen::<f64>() - 0.7
            }
        })
        .collect();
    let sup_neg = v.iter().fold(0.0f64, |m, &x| m.max(-x));
    let result = nodal_convex_envelope(&mesh, &v, None, EnvelopeMode::Abp).unwrap();
    let min_env = result.values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_relative_eq!(min_env, -sup_neg, epsilon = 1e-9);
    // The minimizing node is in the contact set.
    let argmin = (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    assert!(result.contact[argmin]);
}

#[test]
fn concave_wrapper_flips_signs() {
    let mesh = Mesh::cross(1.0);
    let mut v = vec![0.0; 5];
    v[0] = 1.0;
    let upper = nodal_concave_envelope(&mesh, &v, None).unwrap();
    assert_relative_eq!(upper.values[0], 1.0, epsilon = 1e-9);
    assert!(upper.contact[0]);
}

#[test]
fn local_envelope_of_convex_values_is_identity() {
    let mesh = Mesh::structured(&BoxDomain::unit_square(), 0.25).unwrap();
    let v: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|p| (p[0] - 0.4).powi(2) + 0.7 * (p[1] - 0.6).powi(2))
        .collect();
    for &i in mesh.interior_vertices() {
        let env = local_envelope(&mesh, &v, i).unwrap();
        for (&j, &gamma_j) in env.ring.iter().zip(&env.ring_values) {
            assert!(gamma_j <= v[j] + 1e-12);
            assert_relative_eq!(gamma_j, v[j], epsilon = 1e-10);
        }
        assert_eq!(env.center_value, v[i]);
    }
}

#[test]
fn local_envelope_of_dip_is_a_cone() {
    // Center below a flat ring: γ is the cone through the neighbor
    // minima, touching every ring node.
    let mesh = Mesh::cross(1.0);
    let v = vec![-1.0, 0.0, 0.0, 0.0, 0.0];
    let env = local_envelope(&mesh, &v, 0).unwrap();
    for &gamma_j in &env.ring_values {
        assert_relative_eq!(gamma_j, 0.0, epsilon = 1e-12);
    }
    // First-quadrant triangle {0, (1,0), (0,1)}: the cone gradient is (1, 1).
    let g = env.gradient_on(0).unwrap();
    assert_relative_eq!(g[0], 1.0, epsilon = 1e-12);
    assert_relative_eq!(g[1], 1.0, epsilon = 1e-12);
    // An inverted cap (center above the ring) has no supporting plane.
    let cap = vec![0.0, -1.0, -1.0, -1.0, -1.0];
    assert!(matches!(local_envelope(&mesh, &cap, 0), Err(crate::Error::NotSupportable(0))));
}

#[test]
fn local_envelope_requires_supporting_plane() {
    // A strict local maximum at the center admits no supporting plane.
    let mesh = Mesh::structured(&BoxDomain::interval(0.0, 1.0), 0.25).unwrap();
    let mut v = vec![0.0; mesh.n_vertices()];
    let i = mesh.interior_vertices()[1];
    v[i] = 1.0;
    assert!(matches!(local_envelope(&mesh, &v, i), Err(crate::Error::NotSupportable(_))));
}

#[test]
fn global_envelope_below_local_envelope() {
    let mesh = Mesh::structured(&BoxDomain::unit_square(), 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v: Vec<f64> = (0..mesh.n_vertices())
        .map(|i| {
            if mesh.is_boundary_vertex(i) {
                0.0
            } else {
                -(rng.gen::<f64>())
            }
        })
        .collect();
    let global = nodal_convex_envelope(&mesh, &v, None, EnvelopeMode::Abp).unwrap();
    for &i in &global.contact_vertices() {
        let local = local_envelope(&mesh, &v, i).unwrap();
        for (&j, &gamma_j) in local.ring.iter().zip(&local.ring_values) {
            assert!(
                global.values[j] <= gamma_j + 1e-9,
                "Γ({j}) = {} exceeds local envelope {gamma_j}",
                global.values[j]
            );
        }
        assert_relative_eq!(global.values[i], local.center_value, epsilon = 1e-8);
    }
}

#[test]
fn subdifferential_degenerate_segment() {
    // γ = |x₁| at the origin of the cross mesh: two distinct gradients,
    // degenerate hull with zero measure.
    let mesh = Mesh::cross(1.0);
    let v: Vec<f64> = mesh.vertices().iter().map(|p| p[0].abs()).collect();
    let env = local_envelope(&mesh, &v, 0).unwrap();
    let poly = subdifferential(&mesh, &env);
    assert_eq!(poly.gradient_vertices.len(), 2);
    let mut xs: Vec<f64> = poly.gradient_vertices.iter().map(|g| g[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert_relative_eq!(xs[0], -1.0, epsilon = 1e-12);
    assert_relative_eq!(xs[1], 1.0, epsilon = 1e-12);
    assert_eq!(poly.measure, 0.0);
    assert!(jump_bound_check(&poly));
}

#[test]
fn subdifferential_of_cone_is_square() {
    // γ = interpolant of |x| on the cross mesh: gradients (±1, ±1), hull
    // a square of area 4 and perimeter 8 = Σ J_F.
    let mesh = Mesh::cross(1.0);
    let v: Vec<f64> = mesh.vertices().iter().map(|p| p[0].abs() + p[1].abs()).collect();
    let env = local_envelope(&mesh, &v, 0).unwrap();
    let poly = subdifferential(&mesh, &env);
    assert_eq!(poly.gradient_vertices.len(), 4);
    assert_relative_eq!(poly.measure, 4.0, epsilon = 1e-12);
    assert_relative_eq!(poly.perimeter, 8.0, epsilon = 1e-12);
    assert_relative_eq!(poly.jump_sum, 8.0, epsilon = 1e-12);
    assert!(jump_bound_check(&poly));
}

#[test]
fn subdifferential_measure_positive_iff_strict_ring_increase() {
    let mesh = Mesh::cross(1.0);
    // Strict increase → 0 in the interior of the gradient polytope.
    let strict = vec![-1.0, 0.0, 0.0, 0.0, 0.0];
    let env = local_envelope(&mesh, &strict, 0).unwrap();
    let poly = subdifferential(&mesh, &env);
    assert!(poly.measure > 0.0);
    // One flat direction → degenerate polytope.
    let flat: Vec<f64> = mesh.vertices().iter().map(|p| p[0].abs()).collect();
    let env = local_envelope(&mesh, &flat, 0).unwrap();
    assert_eq!(subdifferential(&mesh, &env).measure, 0.0);
}

#[test]
fn subdifferential_1d_interval_equals_jump() {
    let mesh = Mesh::from_breakpoints(&[0.0, 0.3, 1.0]).unwrap();
    let v = vec![0.5, 0.0, 0.9];
    let env = local_envelope(&mesh, &v, 1).unwrap();
    let poly = subdifferential(&mesh, &env);
    // Slopes: left = (0 − 0.5)/0.3, right = (0.9 − 0)/0.7.
    let lo = -0.5 / 0.3;
    let hi = 0.9 / 0.7;
    assert_relative_eq!(poly.measure, hi - lo, epsilon = 1e-12);
    assert_relative_eq!(poly.jump_sum, hi - lo, epsilon = 1e-12);
    // The 1D discrete Laplacian at the node sees the same jump scaled by
    // the star: Δ_h γ = 2 J / |ω|.
    let gamma = vec![0.5, 0.0, 0.9];
    let lap = mesh.discrete_laplacian(&gamma, 1).unwrap();
    assert_relative_eq!(lap, 2.0 * poly.jump_sum / mesh.star_volume(1), epsilon = 1e-12);
}

#[test]
fn random_local_envelopes_satisfy_jump_identities() {
    let mesh = Mesh::structured(&BoxDomain::unit_square(), 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut tested = 0;
    for _ in 0..100 {
        let v: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.gen::<f64>()).collect();
        let i = mesh.interior_vertices()[rng.gen_range(0..mesh.interior_vertices().len())];
        let Ok(env) = local_envelope(&mesh, &v, i) else { continue };
        tested += 1;
        let poly = subdifferential(&mesh, &env);
        // Convexity: every spoke jump of γ is nonnegative.
        for &fi in mesh.faces_of_vertex(i) {
            let f = &mesh.faces()[fi];
            let minus = f.elements.1.unwrap();
            let gp = env.gradient_on(f.elements.0).unwrap();
            let gm = env.gradient_on(minus).unwrap();
            let jump = crate::geom::dot(f.normal, crate::geom::sub(gm, gp));
            assert!(jump >= -1e-10, "negative jump {jump}");
        }
        // Perimeter identity and isoperimetric bound.
        assert_relative_eq!(poly.perimeter, poly.jump_sum, epsilon = 1e-10, max_relative = 1e-10);
        assert!(jump_bound_check(&poly));
    }
    assert!(tested > 20, "too few supportable samples: {tested}");
}

#[test]
fn abp_report_trivial_for_nonnegative_solutions() {
    let mesh = Mesh::structured(&BoxDomain::unit_square(), 0.25).unwrap();
    let v: Vec<f64> = mesh.vertices().iter().map(|p| p[0] * (1.0 - p[0])).collect();
    let f = vec![1.0; mesh.interior_vertices().len()];
    let report = abp_report(&mesh, &v, &f, None).unwrap();
    assert_eq!(report.sup_negative, 0.0);
    assert_eq!(report.ratio, 0.0);
    assert!(report.sound);
    assert!(report.contact_vertices.is_empty());
    let json = report.to_json();
    for key in ["sup_negative", "abp_sum", "ratio", "contact_count", "G", "sound"] {
        assert!(json.contains(key), "missing {key} in {json}");
    }
}

#[test]
fn abp_report_on_negative_bump() {
    let mesh = Mesh::structured(&BoxDomain::unit_square(), 0.125).unwrap();
    let v: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|p| -16.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]))
        .collect();
    let f = vec![1.0; mesh.interior_vertices().len()];
    let report = abp_report(&mesh, &v, &f, None).unwrap();
    assert_relative_eq!(report.sup_negative, 1.0, epsilon = 1e-12);
    assert!(!report.contact_vertices.is_empty());
    assert!(report.abp_sum > 0.0);
    assert!(report.ratio.is_finite() && report.ratio > 0.0);
    assert!(report.sound);
    assert_eq!(report.per_node.len(), report.contact_vertices.len());
    for info in &report.per_node {
        assert!(info.subdiff_measure >= 0.0);
        assert!(info.jump_sum >= -1e-10);
    }
    assert!(report.g_constant > 0.0);
}
