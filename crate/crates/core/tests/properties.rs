use std::f64::consts::PI;

use dynlap::assembly::{a0_from_jacobian, assemble_cg, assemble_mass};
use dynlap::coherent::{cheeger_value, extract_level_set};
use dynlap::dynamics::{Identity, ModelSpec};
use dynlap::experiment::{preset, run, ExperimentConfig};
use dynlap::mesh::{gauss_rule, grid_mesh, Domain, TriMesh};
use dynlap::spectral::fix_sign;
use dynlap::{Mat2, Vec2};
use proptest::prelude::*;

fn fact(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn unit_square(n: usize) -> TriMesh {
    grid_mesh(n, n, Domain::rectangle([0.0, 0.0], [1.0, 1.0]), false).unwrap()
}

fn small_standard_map(a: f64) -> ExperimentConfig {
    let mut c = preset("standard-map").unwrap();
    c.model = ModelSpec::standard_map(a);
    c.mesh.nx = 14;
    c.mesh.ny = 14;
    c.eps.clear();
    c.line_search.enabled = false;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_integrates_polynomials_exactly(
        degree in prop::sample::select(vec![1u32, 2, 3, 5]),
        coeffs in prop::collection::vec(-5.0f64..5.0, 21),
    ) {
        // random polynomial of total degree ≤ degree on the reference triangle
        let rule = gauss_rule(degree).unwrap();
        let terms: Vec<(u32, u32, f64)> = (0..=degree)
            .flat_map(|a| (0..=degree - a).map(move |b| (a, b)))
            .zip(&coeffs)
            .map(|((a, b), c)| (a, b, *c))
            .collect();
        let exact: f64 = terms.iter().map(|(a, b, c)| c * fact(*a) * fact(*b) / fact(a + b + 2)).sum();
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| {
                0.5 * w * terms.iter().map(|(a, b, c)| c * p[1].powi(*a as i32) * p[2].powi(*b as i32)).sum::<f64>()
            })
            .sum();
        prop_assert!((got - exact).abs() < 1e-13, "{got} vs {exact}");
    }

    #[test]
    fn a0_of_area_preserving_jacobian(s in 0.05f64..20.0, th in 0.0f64..PI, ph in 0.0f64..PI) {
        let rot = |t: f64| Mat2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let j = rot(th) * Mat2::new(s, 0.0, 0.0, 1.0 / s) * rot(ph);
        let a = a0_from_jacobian(&j, Vec2::zeros()).unwrap();
        prop_assert!((a - a.transpose()).norm() < 1e-12 * a.norm());
        // eigenvalues of ½(I + (JᵀJ)⁻¹) are ½(1 + s²) and ½(1 + s⁻²)
        let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut want = [0.5 * (1.0 + s * s), 0.5 * (1.0 + 1.0 / (s * s))];
        want.sort_by(f64::total_cmp);
        prop_assert!(ev[0] > 0.0);
        for (e, w) in ev.iter().zip(want) {
            prop_assert!((e - w).abs() < 1e-9 * w);
        }
    }

    #[test]
    fn wrap_and_min_image(x in -50.0f64..50.0, y in -50.0f64..50.0, px in 0.5f64..10.0, py in 0.5f64..10.0) {
        let d = Domain::torus(px, py);
        let p = Vec2::new(x, y);
        let w = d.wrap(p);
        prop_assert_eq!(d.wrap(w), w);
        prop_assert!((0.0..px).contains(&w.x) && (0.0..py).contains(&w.y));
        let m = d.min_image(p);
        prop_assert!(m.x.abs() <= 0.5 * px + 1e-12 && m.y.abs() <= 0.5 * py + 1e-12);
        prop_assert!((d.min_image(m) - m).norm() < 1e-12);
        // same point of the torus
        let k = (p - m).component_div(&Vec2::new(px, py));
        prop_assert!((k.x - k.x.round()).abs() < 1e-9 && (k.y - k.y.round()).abs() < 1e-9);
    }

    #[test]
    fn fix_sign_ignores_input_sign(u in prop::collection::vec(-1.0f64..1.0, 1..40)) {
        let mut a = u.clone();
        let mut b: Vec<f64> = u.iter().map(|x| -x).collect();
        fix_sign(&mut a);
        fix_sign(&mut b);
        prop_assert_eq!(&a, &b);
        let mut c = a.clone();
        fix_sign(&mut c);
        prop_assert_eq!(a, c);
    }

    #[test]
    fn mass_sums_to_area(nx in 3usize..20, ny in 3usize..20, periodic: bool) {
        let mesh = grid_mesh(nx, ny, Domain::rectangle([-1.0, 0.5], [2.0, 3.0]), periodic).unwrap();
        let m = assemble_mass(&mesh).unwrap();
        let rows = m.row_sums();
        let total: f64 = rows.iter().sum();
        prop_assert!((total - 7.5).abs() < 1e-12);
        prop_assert!(rows.iter().all(|r| *r > 0.0));
    }

    #[test]
    fn cheeger_value_is_scale_and_sign_invariant(
        k in prop::collection::vec(-1.0f64..1.0, 4),
        alpha in 0.1f64..10.0,
        level in -0.3f64..0.3,
    ) {
        let mesh = unit_square(24);
        let u: Vec<f64> = mesh
            .dof_coords()
            .iter()
            .map(|p| k[0] * (PI * p.x).cos() + k[1] * (PI * p.y).cos() + k[2] * (2.0 * PI * p.x).cos() * (PI * p.y).cos() + 0.5 * k[3])
            .collect();
        let h = |v: &[f64], c: f64| {
            let mut curve = extract_level_set(&mesh, v, c).unwrap();
            curve.measure_image(&Identity, 4).unwrap();
            cheeger_value(&curve).ok()
        };
        let base = h(&u, level);
        let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
        let flipped: Vec<f64> = u.iter().map(|x| -x).collect();
        match (base, h(&scaled, alpha * level), h(&flipped, -level)) {
            (Some(a), Some(b), Some(c)) => {
                prop_assert!((a - b).abs() < 1e-9 * a, "{a} vs {b}");
                prop_assert!((a - c).abs() < 1e-9 * a, "{a} vs {c}");
            }
            (None, None, None) => {}
            other => prop_assert!(false, "inconsistent split {other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn stiffness_and_response_annihilate_constants(a in 0.1f64..2.0) {
        let mesh = grid_mesh(16, 16, Domain::torus(2.0 * PI, 2.0 * PI), true).unwrap();
        let model = ModelSpec::standard_map(a).build(0.0);
        let ops = assemble_cg(&mesh, model.as_ref(), &gauss_rule(2).unwrap()).unwrap();
        for m in [&ops.stiffness, &ops.response] {
            let worst = m.row_sums().iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
            prop_assert!(worst < 1e-12 * m.norm_inf());
        }
    }

    #[test]
    fn lambda_dot_is_rayleigh_quotient(a in 0.3f64..1.5) {
        let r = run(&small_standard_map(a)).unwrap();
        prop_assert!((r.lambda_dot - r.lambda_dot_rayleigh).abs() <= 1e-8 * r.lambda_dot_rayleigh.abs().max(1e-12));
        prop_assert!(r.response_residual < 1e-8);
    }
}

#[test]
fn runs_are_bitwise_deterministic() {
    let mut c = preset("double-gyre").unwrap();
    c.mesh.nx = 16;
    c.mesh.ny = 16;
    c.line_search.grid_size = 20;
    let a = run(&c).unwrap();
    let b = run(&c).unwrap();
    assert_eq!(a.lambda0.to_bits(), b.lambda0.to_bits());
    assert_eq!(a.lambda_dot.to_bits(), b.lambda_dot.to_bits());
    assert_eq!(a.spectrum, b.spectrum);
    assert_eq!(a.perturbations, b.perturbations);
    assert_eq!(a.c_star().unwrap().to_bits(), b.c_star().unwrap().to_bits());
}
