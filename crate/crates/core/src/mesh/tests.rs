use super::*;
use crate::geom;
use approx::assert_relative_eq;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn unit_square(h: f64) -> Mesh {
    Mesh::structured(&BoxDomain::unit_square(), h).unwrap()
}

#[test]
fn structured_unit_square_h_half() {
    let mesh = unit_square(0.5);
    assert_eq!(mesh.n_elements(), 8);
    assert_eq!(mesh.interior_vertices(), &[4]);
    // Star volume of the single interior node: 4 triangles of area h²/2.
    assert_relative_eq!(mesh.star_volume(4), 0.5, epsilon = 1e-15);
    assert_eq!(mesh.star(4).len(), 4);
    assert!(mesh.weak_acuteness_report().is_weakly_acute);
}

#[test]
fn structured_interval() {
    let mesh = Mesh::structured(&BoxDomain::interval(-1.0, 1.0), 1.0).unwrap();
    assert_eq!(mesh.n_elements(), 2);
    assert_eq!(mesh.interior_vertices(), &[1]);
    assert_relative_eq!(mesh.vertex(1)[0], 0.0);
    assert!(mesh.weak_acuteness_report().is_weakly_acute);
}

#[test]
fn structured_rejects_bad_input() {
    assert!(Mesh::structured(&BoxDomain::unit_square(), 0.0).is_err());
    let degenerate = BoxDomain::rectangle([0.0, 0.0], [0.0, 1.0]);
    assert!(Mesh::structured(&degenerate, 0.5).is_err());
    let bad = BoxDomain { dim: 3, lo: [0.0, 0.0], hi: [1.0, 1.0] };
    assert!(matches!(
        Mesh::structured(&bad, 0.5),
        Err(crate::Error::UnsupportedDimension(3))
    ));
}

#[test]
fn cross_mesh_shape() {
    for h in [1.0, 0.5, 0.25] {
        let mesh = Mesh::cross(h);
        assert_eq!(mesh.n_elements(), 4);
        assert_eq!(mesh.interior_vertices(), &[0]);
        assert_relative_eq!(mesh.star_volume(0), 2.0 * h * h, epsilon = 1e-15);
    }
}

#[test]
fn acuteness_flags_obtuse_pair() {
    // Two triangles sharing the edge (0,0)-(1,0), apex angles ≈ 100° each.
    let t = 0.5 / (50.0f64.to_radians()).tan();
    let vertices = vec![[0.0, 0.0], [1.0, 0.0], [0.5, t], [0.5, -t]];
    let elements = vec![0, 1, 2, 0, 3, 1];
    let mesh = Mesh::from_parts(2, vertices, elements).unwrap();
    let report = mesh.weak_acuteness_report();
    assert!(!report.is_weakly_acute);
    // Cotangent-formula oracle: k_ij = -(cot α + cot β)/2 across edge (0, 1).
    let alpha = 100.0f64.to_radians();
    let expected = -(alpha.tan().recip() + alpha.tan().recip()) / 2.0;
    let pair = report
        .violating_pairs
        .iter()
        .find(|p| (p.0, p.1) == (0, 1))
        .expect("edge (0,1) must violate");
    assert_relative_eq!(pair.2, expected, max_relative = 1e-12);
    assert!(report.max_offdiag > 0.0);
}

#[test]
fn acuteness_1d_always_holds() {
    let mesh = Mesh::from_breakpoints(&[0.0, 0.3, 0.35, 1.0]).unwrap();
    let report = mesh.weak_acuteness_report();
    assert!(report.is_weakly_acute);
    assert!(report.max_offdiag < 0.0);
}

#[test]
fn locate_centroid_and_vertices() {
    let mesh = unit_square(0.25);
    for e in 0..mesh.n_elements() {
        let c = centroid(&mesh.element_points(e));
        match mesh.locate(c) {
            Location::Inside { element, bary } => {
                assert_eq!(element, e);
                for k in 0..3 {
                    assert_relative_eq!(bary[k], 1.0 / 3.0, epsilon = 1e-12);
                }
            }
            Location::Outside => panic!("centroid of {e} not located"),
        }
    }
    // A shared vertex resolves to the lowest adjacent element index.
    let v = mesh.interior_vertices()[0];
    match mesh.locate(mesh.vertex(v)) {
        Location::Inside { element, bary } => {
            assert_eq!(element, mesh.star(v)[0]);
            let local = mesh.element(element).iter().position(|&w| w == v).unwrap();
            assert_relative_eq!(bary[local], 1.0, epsilon = 1e-12);
        }
        Location::Outside => panic!("vertex not located"),
    }
}

#[test]
fn locate_matches_exhaustive_scan() {
    let mesh = unit_square(1.0 / 7.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let x = [rng.gen::<f64>(), rng.gen::<f64>()];
        // Brute-force point-in-simplex oracle with the same tie-break.
        let mut expect = None;
        for e in 0..mesh.n_elements() {
            let b = geom::barycentric(2, &mesh.element_points(e), x);
            if b.iter().all(|&v| v >= -1e-12) {
                expect = Some(e);
                break;
            }
        }
        match (mesh.locate(x), expect) {
            (Location::Inside { element, .. }, Some(e)) => assert_eq!(element, e),
            (Location::Outside, None) => {}
            (got, want) => panic!("locate mismatch at {x:?}: {got:?} vs {want:?}"),
        }
    }
    assert_eq!(mesh.locate([2.0, 2.0]), Location::Outside);
}

#[test]
fn boundary_clip_square() {
    let mesh = unit_square(0.25);
    // Deep interior, short offset: no clipping.
    assert_eq!(mesh.boundary_clip([0.5, 0.5], [0.1, 0.05]), (1.0, 1.0));
    // Unit offset along x from the center: clipped at the walls.
    let (t1, t2) = mesh.boundary_clip([0.5, 0.5], [1.0, 0.0]);
    assert_relative_eq!(t1, 0.5, epsilon = 1e-14);
    assert_relative_eq!(t2, 0.5, epsilon = 1e-14);
    // Swapping y ↦ −y swaps the parameters.
    let (s1, s2) = mesh.boundary_clip([0.25, 0.5], [1.0, 0.25]);
    let (r1, r2) = mesh.boundary_clip([0.25, 0.5], [-1.0, -0.25]);
    assert_eq!((s1, s2), (r2, r1));
}

#[test]
fn boundary_clip_generic_path_matches_box_path() {
    let box_mesh = unit_square(0.25);
    // Same mesh rebuilt without the box-domain tag exercises the
    // face-intersection path.
    let generic = Mesh::from_parts(
        2,
        box_mesh.vertices().to_vec(),
        (0..box_mesh.n_elements()).flat_map(|e| box_mesh.element(e).to_vec()).collect(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = [0.05 + 0.9 * rng.gen::<f64>(), 0.05 + 0.9 * rng.gen::<f64>()];
        let y = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
        let (a1, a2) = box_mesh.boundary_clip(x, y);
        let (b1, b2) = generic.boundary_clip(x, y);
        assert_relative_eq!(a1, b1, epsilon = 1e-10);
        assert_relative_eq!(a2, b2, epsilon = 1e-10);
    }
}

#[test]
fn face_jump_affine_and_hat() {
    let mesh = unit_square(0.25);
    let affine: Vec<f64> =
        mesh.vertices().iter().map(|p| 1.0 + 2.0 * p[0] - 0.7 * p[1]).collect();
    for (fi, f) in mesh.faces().iter().enumerate() {
        if !f.is_boundary() {
            assert_relative_eq!(mesh.face_jump(&affine, fi).unwrap(), 0.0, epsilon = 1e-12);
        } else {
            assert!(mesh.face_jump(&affine, fi).is_err());
        }
    }

    // 1D hat function: one-sided slopes ±1/h give J = −2/h at the node.
    let h = 0.2;
    let mesh1 = Mesh::structured(&BoxDomain::interval(0.0, 1.0), h).unwrap();
    let i = mesh1.interior_vertices()[1];
    let mut hat = vec![0.0; mesh1.n_vertices()];
    hat[i] = 1.0;
    let face = mesh1
        .faces_of_vertex(i)
        .iter()
        .copied()
        .find(|&fi| !mesh1.faces()[fi].is_boundary())
        .unwrap();
    assert_relative_eq!(mesh1.face_jump(&hat, face).unwrap(), -2.0 / h, max_relative = 1e-12);
}

#[test]
fn discrete_laplacian_cross_mesh_regression() {
    // Interpolant of x² + y² on the cross mesh: the discrete Laplacian is
    // 6 for every h, not the continuum value 4.
    for h in [1.0, 0.5, 0.25] {
        let mesh = Mesh::cross(h);
        let v: Vec<f64> =
            mesh.vertices().iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
        let lap = mesh.discrete_laplacian(&v, 0).unwrap();
        assert_relative_eq!(lap, 6.0, epsilon = 1e-12);
    }
}

#[test]
fn discrete_laplacian_matches_stiffness_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let meshes = [unit_square(1.0 / 5.0), unit_square(1.0 / 9.0), Mesh::cross(0.7)];
    for mesh in &meshes {
        for _ in 0..20 {
            let v: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.gen::<f64>() - 0.5).collect();
            for &i in mesh.interior_vertices() {
                let jump_form = mesh.discrete_laplacian(&v, i).unwrap();
                let k_row = mesh.stiffness_row(i);
                let stiff: f64 = k_row.iter().map(|&(j, k)| k * v[j]).sum();
                let stiffness_form = -stiff / mesh.hat_integral(i);
                let scale = jump_form.abs().max(stiffness_form.abs()).max(1.0);
                assert!(
                    (jump_form - stiffness_form).abs() <= 1e-10 * scale,
                    "jump {jump_form} vs stiffness {stiffness_form}"
                );
            }
        }
    }
}

#[test]
fn laplacian_row_consistent_with_value() {
    let mesh = unit_square(1.0 / 6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.gen::<f64>()).collect();
    for &i in mesh.interior_vertices() {
        let row = mesh.laplacian_row(i).unwrap();
        let from_row: f64 = row.iter().map(|&(j, c)| c * v[j]).sum();
        let direct = mesh.discrete_laplacian(&v, i).unwrap();
        assert_relative_eq!(from_row, direct, epsilon = 1e-11, max_relative = 1e-11);
    }
}

#[test]
fn stiffness_rows_sum_to_zero() {
    let mesh = unit_square(1.0 / 6.0);
    for &i in mesh.interior_vertices() {
        let sum: f64 = mesh.stiffness_row(i).iter().map(|&(_, k)| k).sum();
        assert_relative_eq!(sum, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn hat_integral_identities() {
    // ∫φ_i = |ω_i|/(d+1) and ∫_F φ_i = |F|/d, checked by quadrature.
    let mesh = unit_square(0.5);
    let i = mesh.interior_vertices()[0];
    let mut hat = vec![0.0; mesh.n_vertices()];
    hat[i] = 1.0;
    let mut integral = 0.0;
    for &e in mesh.star(i) {
        let pts = mesh.element_points(e);
        for (q, w) in crate::quad::simplex_rule(2, &pts, mesh.element_volume(e)) {
            integral += w * mesh.interpolate(&hat, q).unwrap();
        }
    }
    assert_relative_eq!(integral, mesh.hat_integral(i), epsilon = 1e-13);
    for &fi in mesh.faces_of_vertex(i) {
        let f = &mesh.faces()[fi];
        // Midpoint value of φ_i on its own face is 1/2, so ∫_F φ_i = |F|/2.
        assert_relative_eq!(f.measure / mesh.dim() as f64, f.measure / 2.0);
    }
}

#[test]
fn monotone_laplacian_on_weakly_acute_mesh() {
    // v ≤ w with equality at x_i implies Δ_h v(x_i) ≤ Δ_h w(x_i).
    let mesh = unit_square(0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let w: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.gen::<f64>()).collect();
        let i = mesh.interior_vertices()[rng.gen_range(0..mesh.interior_vertices().len())];
        let mut v: Vec<f64> = w.iter().map(|&x| x - rng.gen::<f64>()).collect();
        v[i] = w[i];
        let lv = mesh.discrete_laplacian(&v, i).unwrap();
        let lw = mesh.discrete_laplacian(&w, i).unwrap();
        assert!(lv <= lw + 1e-10 * lv.abs().max(lw.abs()).max(1.0));
    }
}

#[test]
fn ascii_round_trip_is_bit_faithful() {
    let mesh = unit_square(1.0 / 3.0);
    let text = mesh.to_ascii();
    let back = Mesh::from_ascii(&text).unwrap();
    assert_eq!(mesh.n_vertices(), back.n_vertices());
    assert_eq!(mesh.n_elements(), back.n_elements());
    for v in 0..mesh.n_vertices() {
        assert_eq!(mesh.vertex(v), back.vertex(v));
        assert_eq!(mesh.is_boundary_vertex(v), back.is_boundary_vertex(v));
    }
    assert_eq!(text, back.to_ascii());

    // Flag mismatch is rejected.
    let tampered = text.replacen("0.0000000000000000e0 0.0000000000000000e0 1", "0.0000000000000000e0 0.0000000000000000e0 0", 1);
    assert!(Mesh::from_ascii(&tampered).is_err());
}

#[test]
fn quasi_uniformity_constants_recorded() {
    let mesh = unit_square(1.0 / 8.0);
    assert!(mesh.min_diameter() >= 0.1 * mesh.h());
    assert!(mesh.shape_constant() >= 2.0 && mesh.shape_constant() < 10.0);
    // Interior face bookkeeping: interior faces have two elements.
    for f in mesh.faces() {
        match f.elements.1 {
            Some(_) => assert!(!f.is_boundary()),
            None => assert!(f.is_boundary()),
        }
    }
}
