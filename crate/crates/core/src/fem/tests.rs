use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::mesh::{generate, refine_uniform, DomainKind, DomainSpec};
use crate::random::rng;
use crate::spectral::{solve_pencil, DensePencil};
use rand::Rng;

fn mesh(kind: DomainKind, k: usize) -> SimplicialMesh {
    generate(&DomainSpec::new(kind, k).unwrap()).unwrap()
}

fn system(m: &SimplicialMesh) -> (FemSpace, FemSystem) {
    let s = build_space(m).unwrap();
    let sys = assemble(&s).unwrap();
    (s, sys)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `∫ x^e₀ y^e₁ (z^e₂)` over the reference simplex: `Π eᵢ! / (Σ eᵢ + dim)!`.
fn monomial_integral(exps: &[usize]) -> f64 {
    let num: f64 = exps.iter().map(|&e| factorial(e)).product();
    num / factorial(exps.iter().sum::<usize>() + exps.len())
}

fn apply_rule(rule: &QuadratureRule, exps: &[usize]) -> f64 {
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(lam, w)| {
            // Cartesian coordinate k of the reference simplex is λ_{k+1}.
            w * exps
                .iter()
                .enumerate()
                .map(|(k, &e)| lam[k + 1].powi(e as i32))
                .product::<f64>()
        })
        .sum()
}

fn exponents(dim: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if dim == 2 {
        for a in 0..=max_degree {
            for b in 0..=(max_degree - a) {
                out.push(vec![a, b]);
            }
        }
    } else {
        for a in 0..=max_degree {
            for b in 0..=(max_degree - a) {
                for c in 0..=(max_degree - a - b) {
                    out.push(vec![a, b, c]);
                }
            }
        }
    }
    out
}

#[test]
fn quadrature_weights_sum_to_reference_volume() {
    for dim in [2, 3] {
        for degree in 0..=4 {
            let rule = quadrature(dim, degree).unwrap();
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 1.0 / factorial(dim)).abs() < 1e-15, "dim {dim} degree {degree}");
            assert!(rule.degree >= degree);
        }
    }
}

#[test]
fn quadrature_exact_on_monomials() {
    for dim in [2, 3] {
        let rule = quadrature(dim, 4).unwrap();
        for e in exponents(dim, 4) {
            let err = (apply_rule(&rule, &e) - monomial_integral(&e)).abs();
            assert!(err < 1e-14, "dim {dim} exponents {e:?}: {err:e}");
        }
        for s in 3..=6 {
            let rule = grundmann_moller(dim, s).unwrap();
            for e in exponents(dim, 2 * s + 1) {
                let exact = monomial_integral(&e);
                let err = (apply_rule(&rule, &e) - exact).abs();
                assert!(err < 1e-13, "GM s={s} dim {dim} {e:?}: {err:e}");
            }
        }
    }
}

#[test]
fn quadrature_examples() {
    let r2 = quadrature(2, 4).unwrap();
    assert!((apply_rule(&r2, &[1, 0]) - 1.0 / 6.0).abs() < 1e-15);
    assert!((apply_rule(&r2, &[2, 2]) - 1.0 / 180.0).abs() < 1e-15);
    let r3 = quadrature(3, 4).unwrap();
    assert!((apply_rule(&r3, &[0, 0, 0]) - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(quadrature(2, 5), Err(FemError::UnsupportedDegree { degree: 5 }));
}

/// Interior node count by position: strictly inside the open unit square.
fn interior_square_nodes(space: &FemSpace) -> usize {
    (0..space.node_count())
        .filter(|&n| {
            let p = space.node_position(n);
            p[0] > 1e-12 && p[0] < 1.0 - 1e-12 && p[1] > 1e-12 && p[1] < 1.0 - 1e-12
        })
        .count()
}

#[test]
fn square_dof_counts() {
    for k in 1..=5 {
        let space = build_space(&mesh(DomainKind::UnitSquare, k)).unwrap();
        assert_eq!(space.node_count(), (2 * k + 1) * (2 * k + 1));
        assert_eq!(space.interior_node_count(), interior_square_nodes(&space));
        assert_eq!(space.interior_node_count(), (2 * k - 1) * (2 * k - 1));
        assert_eq!(space.dof_count(), 2 * space.interior_node_count());
    }
    let s2 = build_space(&mesh(DomainKind::UnitSquare, 2)).unwrap();
    assert_eq!((s2.node_count(), s2.dof_count()), (25, 18));
}

#[test]
fn dof_count_divisible_by_dimension() {
    for (kind, k) in [
        (DomainKind::UnitDisk, 2),
        (DomainKind::UnitCube, 2),
        (DomainKind::LShape, 1),
    ] {
        let s = build_space(&mesh(kind, k)).unwrap();
        assert_eq!(s.dof_count() % s.dim(), 0);
    }
}

#[test]
fn no_interior_dofs_rejected() {
    let single = SimplicialMesh::new(
        2,
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        vec![vec![0, 1, 2]],
    )
    .unwrap();
    assert_eq!(build_space(&single).err(), Some(FemError::NoInteriorDofs));
    // The diagonal midpoint of the two-triangle square is the only interior node.
    assert_eq!(build_space(&mesh(DomainKind::UnitSquare, 1)).unwrap().dof_count(), 2);
}

#[test]
fn reference_stiffness_rows_sum_to_zero() {
    let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let tet = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for (dim, pts) in [(2, &tri[..]), (3, &tet[..])] {
        let k = scalar_element_stiffness(dim, pts).unwrap();
        for i in 0..k.nrows() {
            assert!(k.row(i).sum().abs() < 1e-14, "dim {dim} row {i}");
        }
        assert!((&k - k.transpose()).norm() == 0.0);
    }
}

#[test]
fn reference_triangle_stiffness_closed_form() {
    // Vertex-vertex and edge-edge entries of the quadratic stiffness on the
    // right reference triangle, from exact polynomial integration by hand.
    let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let k = scalar_element_stiffness(2, &tri).unwrap();
    assert!((k[(0, 0)] - 1.0).abs() < 1e-14);
    assert!((k[(1, 1)] - 0.5).abs() < 1e-14);
    assert!((k[(2, 2)] - 0.5).abs() < 1e-14);
    // edge (1,2) opposite the right angle: 8/3
    assert!((k[(5, 5)] - 8.0 / 3.0).abs() < 1e-14);
}

fn identity_meshes() -> Vec<(String, SimplicialMesh)> {
    let mut out = Vec::new();
    let mut sq = mesh(DomainKind::UnitSquare, 2);
    out.push(("square".to_string(), sq.clone()));
    for r in 1..=2 {
        sq = refine_uniform(&sq);
        out.push((format!("square+{r}"), sq.clone()));
    }
    let disk = mesh(DomainKind::UnitDisk, 2);
    out.push(("disk".into(), disk.clone()));
    out.push(("disk+1".into(), refine_uniform(&disk)));
    out.push(("annulus".into(), mesh(DomainKind::Annulus { inner_radius: 0.5 }, 2)));
    out.push(("l_shape".into(), mesh(DomainKind::LShape, 2)));
    out.push(("cube".into(), mesh(DomainKind::UnitCube, 2)));
    out
}

#[test]
fn assembled_forms_sum_exactly() {
    for (name, m) in identity_meshes() {
        let (_, sys) = system(&m);
        let dev = sys.identity_deviation();
        assert!(dev <= 1e-12, "{name}: {dev:e}");
    }
}

#[test]
fn forms_symmetric_and_semidefinite() {
    for (name, m) in identity_meshes().into_iter().take(4) {
        let (_, sys) = system(&m);
        for (label, a) in [("K", &sys.k), ("D", &sys.d_div), ("C", &sys.c_curl)] {
            assert_eq!(a, &a.transpose(), "{name} {label} not bitwise symmetric");
            let eig = a.clone().symmetric_eigen().eigenvalues;
            let min = eig.min();
            assert!(min >= -1e-12 * eig.max(), "{name} {label}: {min:e}");
        }
        assert!(sys.k.clone().cholesky().is_some(), "{name}");
    }
}

#[test]
fn cube_stiffness_factorizes() {
    let (_, sys) = system(&mesh(DomainKind::UnitCube, 2));
    let chol = sys.k.clone().cholesky().expect("K is SPD");
    let recon = chol.l() * chol.l().transpose();
    assert!((recon - &sys.k).norm() <= 1e-13 * sys.k.norm());
}

#[test]
fn pressure_mass_and_coupling() {
    for (name, m) in identity_meshes().into_iter().take(5) {
        let (space, sys) = system(&m);
        let total: f64 = sys.m_pressure.iter().sum();
        assert!((total - m.total_volume()).abs() < 1e-13, "{name}");
        let ones = DVector::from_element(m.vertex_count(), 1.0);
        let via_coupling = &sys.a_pressure * ones;
        let moment = divergence_moment(&space).unwrap();
        assert!((via_coupling - &moment).amax() < 1e-13, "{name}");
    }
}

#[test]
fn divergence_moments_vanish() {
    for (kind, k) in [
        (DomainKind::UnitSquare, 2),
        (DomainKind::UnitDisk, 2),
        (DomainKind::UnitCube, 2),
    ] {
        let space = build_space(&mesh(kind, k)).unwrap();
        let m = divergence_moment(&space).unwrap();
        assert!(m.amax() <= 1e-13, "{kind}: {:e}", m.amax());
    }
}

#[test]
fn assembly_independent_of_cell_order() {
    for (name, m) in identity_meshes().into_iter().take(6) {
        let mut cells: Vec<Vec<usize>> = m.cells().map(|c| c.to_vec()).collect();
        cells.reverse();
        let shift = cells.len() / 3;
        cells.rotate_left(shift);
        let permuted = SimplicialMesh::new(m.dim(), m.vertices().to_vec(), cells).unwrap();
        let (_, a) = system(&m);
        let (_, b) = system(&permuted);
        for (x, y) in [(&a.k, &b.k), (&a.d_div, &b.d_div), (&a.c_curl, &b.c_curl)] {
            assert!((x - y).amax() <= 1e-14, "{name}: {:e}", (x - y).amax());
        }
        assert!((&a.a_pressure - &b.a_pressure).amax() <= 1e-14);
    }
}

fn random_field(n: usize, seed: u64) -> DVector<f64> {
    let mut r = rng(seed);
    DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0))
}

/// Quadratic forms of a field integrated pointwise through the probe with a
/// higher-degree rule, independent of the assembled matrices.
fn probed_forms(space: &FemSpace, u: &DVector<f64>) -> (f64, f64, f64) {
    let mesh = space.mesh();
    let dim = mesh.dim();
    let rule = grundmann_moller(dim, 3).unwrap();
    let (mut k, mut d, mut c) = (0.0, 0.0, 0.0);
    for cell in 0..mesh.cell_count() {
        let pts = mesh.cell_points(cell);
        let scale = mesh.cell_volume(cell) * factorial(dim);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let mut x = [0.0; 3];
            for (l, p) in lam.iter().zip(&pts) {
                for a in 0..3 {
                    x[a] += l * p[a];
                }
            }
            let probe = field_probe(space, u, &x).unwrap();
            let g2: f64 = probe.gradient.iter().flatten().map(|v| v * v).sum();
            k += w * scale * g2;
            d += w * scale * probe.divergence * probe.divergence;
            c += w * scale * probe.curl.iter().map(|v| v * v).sum::<f64>();
        }
    }
    (k, d, c)
}

#[test]
fn assembled_forms_match_pointwise_integration() {
    for (kind, k) in [
        (DomainKind::UnitSquare, 2),
        (DomainKind::UnitDisk, 2),
        (DomainKind::UnitCube, 1),
    ] {
        let (space, sys) = system(&mesh(kind, k));
        let u = random_field(space.dof_count(), 7);
        let (pk, pd, pc) = probed_forms(&space, &u);
        let ak = u.dot(&(&sys.k * &u));
        let ad = u.dot(&(&sys.d_div * &u));
        let ac = u.dot(&(&sys.c_curl * &u));
        assert!((pk - ak).abs() <= 1e-11 * ak, "{kind} K: {pk} vs {ak}");
        assert!((pd - ad).abs() <= 1e-11 * ak, "{kind} D: {pd} vs {ad}");
        assert!((pc - ac).abs() <= 1e-11 * ak, "{kind} C: {pc} vs {ac}");
    }
}

#[test]
fn probe_of_zero_field() {
    let space = build_space(&mesh(DomainKind::UnitCube, 2)).unwrap();
    let p = field_probe(&space, &DVector::zeros(space.dof_count()), &[0.3, 0.4, 0.6]).unwrap();
    assert!(p.value.iter().chain(&p.curl).all(|&v| v == 0.0));
    assert_eq!(p.divergence, 0.0);
}

#[test]
fn probe_lagrange_property() {
    let space = build_space(&mesh(DomainKind::UnitSquare, 2)).unwrap();
    for &node in space.interior_nodes() {
        let dof = space.dof(1, node).unwrap();
        let mut u = DVector::zeros(space.dof_count());
        u[dof] = 1.0;
        for other in 0..space.node_count() {
            let v = field_probe(&space, &u, &space.node_position(other)).unwrap();
            let expected = if other == node { 1.0 } else { 0.0 };
            assert!((v.value[1] - expected).abs() < 1e-14, "node {node} at {other}");
            assert_eq!(v.value[0], 0.0);
        }
    }
}

#[test]
fn probe_derivatives_consistent() {
    for (kind, k, x) in [
        (DomainKind::UnitDisk, 3, [0.21, -0.37, 0.0]),
        (DomainKind::UnitCube, 2, [0.31, 0.62, 0.44]),
    ] {
        let space = build_space(&mesh(kind, k)).unwrap();
        let u = random_field(space.dof_count(), 11);
        let p = field_probe(&space, &u, &x).unwrap();
        let g = &p.gradient;
        let trace: f64 = (0..space.dim()).map(|a| g[a][a]).sum();
        assert!((trace - p.divergence).abs() < 1e-12);
        let curl: Vec<f64> = if space.dim() == 2 {
            vec![g[1][0] - g[0][1]]
        } else {
            vec![g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]]
        };
        for (a, b) in curl.iter().zip(&p.curl) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn probe_outside_mesh() {
    let space = build_space(&mesh(DomainKind::LShape, 2)).unwrap();
    let u = DVector::zeros(space.dof_count());
    assert!(matches!(
        field_probe(&space, &u, &[0.5, -0.5, 0.0]),
        Err(FemError::PointOutsideMesh { .. })
    ));
}

fn max_eigenvalue(a: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let p = DensePencil::new(a.clone(), m.clone()).unwrap();
    solve_pencil(&p).unwrap().largest().unwrap()
}

#[test]
fn prolongation_preserves_forms() {
    for (kind, k) in [
        (DomainKind::UnitSquare, 2),
        (DomainKind::LShape, 1),
        (DomainKind::UnitCube, 1),
    ] {
        let cm = mesh(kind, k);
        let fm = refine_uniform(&cm);
        let (cs, csys) = system(&cm);
        let (fs, fsys) = system(&fm);
        let p = prolongation(&cs, &fs).unwrap();
        for (label, c, f) in [
            ("K", &csys.k, &fsys.k),
            ("D", &csys.d_div, &fsys.d_div),
            ("C", &csys.c_curl, &fsys.c_curl),
        ] {
            let back = p.transpose() * f * &p;
            assert!((back - c).norm() <= 1e-12 * csys.k.norm(), "{kind} {label}");
        }
        // nested spaces: the largest div/grad quotient cannot drop
        let coarse = max_eigenvalue(&csys.d_div, &csys.k);
        let fine = max_eigenvalue(&fsys.d_div, &fsys.k);
        assert!(fine >= coarse - 1e-12, "{kind}: {fine} < {coarse}");
    }
}

#[test]
fn prolongation_rejects_curved_domains() {
    let cm = mesh(DomainKind::UnitDisk, 2);
    let fm = refine_uniform(&cm);
    let (cs, fs) = (build_space(&cm).unwrap(), build_space(&fm).unwrap());
    assert!(matches!(prolongation(&cs, &fs), Err(FemError::NotNested(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identity_survives_affine_maps(
        a in 0.3f64..3.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in 0.3f64..3.0,
        tx in -5.0f64..5.0, ty in -5.0f64..5.0,
    ) {
        prop_assume!((a * d - b * c).abs() > 0.1);
        let m = mesh(DomainKind::LShape, 2)
            .map_vertices(|p| [a * p[0] + b * p[1] + tx, c * p[0] + d * p[1] + ty, 0.0])
            .unwrap();
        let (_, sys) = system(&m);
        prop_assert!(sys.identity_deviation() <= 1e-12);
    }

    #[test]
    fn forms_invariant_under_translation(tx in -10.0f64..10.0, ty in -10.0f64..10.0, tz in -10.0f64..10.0) {
        let m = mesh(DomainKind::UnitCube, 1);
        let shifted = m.map_vertices(|p| [p[0] + tx, p[1] + ty, p[2] + tz]).unwrap();
        let (_, a) = system(&m);
        let (_, b) = system(&shifted);
        prop_assert!((&a.k - &b.k).amax() <= 1e-12);
        prop_assert!((&a.c_curl - &b.c_curl).amax() <= 1e-12);
    }
}

fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.min()
}

#[test]
fn projected_forms_are_dominated() {
    for m in [
        mesh(DomainKind::UnitSquare, 2),
        refine_uniform(&mesh(DomainKind::UnitDisk, 2)),
        mesh(DomainKind::UnitCube, 2),
    ] {
        let (_, sys) = system(&m);
        let pd = sys.projected_div();
        let pc = sys.projected_curl();
        let scale = sys.k.norm();
        assert_eq!(pd, pd.transpose());
        assert!(min_eigenvalue(&pd) >= -1e-12 * scale);
        assert!(min_eigenvalue(&(&sys.d_div - &pd)) >= -1e-12 * scale);
        assert!(min_eigenvalue(&(&sys.c_curl - &pc)) >= -1e-12 * scale);
    }
}

#[test]
fn cell_moments_sum_to_divergence_moment() {
    let m = mesh(DomainKind::LShape, 1);
    let (s, sys) = system(&m);
    let ones = DVector::from_element(m.cell_count(), 1.0);
    let summed = &sys.div_cell * ones;
    let direct = divergence_moment(&s).unwrap();
    assert!((summed - direct).amax() <= 1e-13);
    let vol: f64 = sys.cell_volumes.sum();
    assert!((vol - 3.0).abs() <= 1e-13);
}

#[test]
fn projected_div_sums_squared_cell_means() {
    // ‖Π₀ div u‖² = Σ_T |T| mean_T(div u)²
    let m = mesh(DomainKind::UnitSquare, 2);
    let (s, sys) = system(&m);
    let mut r = rng(5);
    let u = DVector::from_fn(s.dof_count(), |_, _| r.random_range(-1.0..1.0));
    let mut expected = 0.0;
    for c in 0..m.cell_count() {
        let col = sys.div_cell.column(c);
        let mean = col.dot(&u) / sys.cell_volumes[c];
        expected += mean * mean * sys.cell_volumes[c];
    }
    let got = u.dot(&(sys.projected_div() * &u));
    assert!((got - expected).abs() <= 1e-12 * expected.max(1.0));
}
