mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tandem_core::characteristic::{branch_eigenvalue, hamiltonian, perron_root, char_poly_in, Fixed};
use tandem_core::linalg::c64;
use tandem_core::model::{check_stability, stationary_distribution};
use tandem_core::roots::*;
use tandem_core::{C64, Error, ErrorClass, ModelParams};

fn real_roots_ok(params: &ModelParams, pts: &[&SurfacePoint]) {
    for p in pts {
        let j = p.branch.expect("real catalog points carry a branch");
        let v = branch_eigenvalue(params, p.beta.re, p.alpha.re, j).unwrap();
        assert!((v - 1.0).abs() <= 1e-10, "branch {j} at ({}, {}): {v}", p.beta, p.alpha);
    }
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    // chord between unit vectors; acos loses half the digits near zero
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    a.iter().zip(b).map(|(x, y)| (x / na - y / nb).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn scalar_closed_forms() {
    let p = common::scalar();
    let r1 = find_rho1(&p).unwrap();
    let r2 = find_rho2(&p).unwrap();
    assert!((r1.beta.re - 2.0 / 3.0).abs() < 1e-12);
    assert!((r2.beta.re - 0.4).abs() < 1e-12);
    let (s, ok) = check_conj_assumption(&p, r2.beta.re);
    assert!(ok && (s + 0.1).abs() < 1e-12);
    let a1 = find_alpha_star1(&p, r2.beta.re).unwrap();
    assert!((a1.alpha.re - 2.0 / 3.0).abs() < 1e-12);
    assert!(find_branch_roots(&p, Line::AlphaOne).unwrap().is_empty());
}

#[test]
fn constant_load_ratio_rho2() {
    let params = ModelParams::from_rows(
        &[vec![0.5, 0.5], vec![0.5, 0.5]],
        &[0.2, 0.1],
        &[0.4, 0.7],
        &[0.4, 0.2],
    )
    .unwrap();
    assert!((find_rho2(&params).unwrap().beta.re - 0.5).abs() < 1e-12);
}

#[test]
fn unstable_model_has_no_rho() {
    let hot = ModelParams::from_rows(&[vec![1.0]], &[0.6], &[0.2], &[0.2]).unwrap();
    assert!(find_rho1(&hot).is_err());
    assert!(find_rho2(&hot).is_err());
    assert!(build_root_catalog(&hot, 5, 0.7).is_err());
}

#[test]
fn three_regime_rho_points() {
    let params = common::three_regime();
    let r1 = find_rho1(&params).unwrap();
    let r2 = find_rho2(&params).unwrap();
    assert!(r1.beta.re > 0.0 && r1.beta.re < 1.0);
    assert!((perron_root(&params, r1.beta.re, r1.beta.re) - 1.0).abs() < 1e-10);
    assert!(hamiltonian(&params, [r1.beta.re.ln(); 2]).abs() < 1e-10);
    assert!(r1.d.iter().all(|z| z.re > 0.0) && r2.d.iter().all(|z| z.re > 0.0));
    // rho2 is the largest root of p(beta, 1) in (0, 1) other than 1
    let c = char_poly_in(&params, Fixed::Alpha(c64(1.0))).unwrap();
    let roots = tandem_core::linalg::poly_roots(&c).unwrap();
    let best = roots
        .iter()
        .filter(|z| z.im.abs() < 1e-9 && z.re > 0.0 && z.re < 1.0 - 1e-9)
        .map(|z| z.re)
        .fold(0.0, f64::max);
    assert!((best - r2.beta.re).abs() < 1e-10);
    assert!(r2.residual <= 1e-9);
}

#[test]
fn conjugate_assumption_and_alpha_star() {
    let params = common::three_regime();
    let r1 = find_rho1(&params).unwrap().beta.re;
    let r2 = find_rho2(&params).unwrap().beta.re;
    let (s, ok) = check_conj_assumption(&params, r2);
    assert!(ok && s < 0.0);
    let a = find_alpha_star1(&params, r2).unwrap();
    assert!(a.alpha.re > 0.0 && a.alpha.re < 1.0 && a.residual <= 1e-9);
    assert!(a.d.iter().all(|z| z.re > 0.0));
    assert_eq!((r1 - r2).signum(), (a.alpha.re - r2).signum());
}

#[test]
fn faster_second_queue_implies_conjugate_assumption() {
    let params = ModelParams::from_rows(
        &[vec![0.7, 0.3], vec![0.2, 0.8]],
        &[0.1, 0.15],
        &[0.5, 0.45],
        &[0.4, 0.4],
    )
    .unwrap();
    let r2 = find_rho2(&params).unwrap().beta.re;
    assert!(check_conj_assumption(&params, r2).1);
}

#[test]
fn missing_conjugate_is_unsupported() {
    let params = common::no_conj();
    assert!(check_stability(&params).is_stable());
    let r2 = find_rho2(&params).unwrap().beta.re;
    let (s, ok) = check_conj_assumption(&params, r2);
    assert!(!ok && s > 0.0);
    let e = find_alpha_star1(&params, r2).unwrap_err();
    assert_eq!(e.class(), ErrorClass::Unsupported);
    // analysis still works
    let cat = build_root_catalog(&params, 2, 0.7).unwrap();
    assert!(cat.alpha_star.is_empty() && !cat.flags.conj);
}

#[test]
fn branch_roots_are_ordered() {
    let params = common::three_regime();
    let r1 = find_rho1(&params).unwrap().beta.re;
    let r2 = find_rho2(&params).unwrap().beta.re;
    let a = find_branch_roots(&params, Line::AlphaOne).unwrap();
    let d = find_branch_roots(&params, Line::Diagonal).unwrap();
    assert_eq!(a.len(), 2);
    assert_eq!(d.len(), 2);
    assert!(r2 > a[0].beta.re && a[0].beta.re > a[1].beta.re && a[1].beta.re > 0.0);
    assert!(r1 > d[0].beta.re && d[0].beta.re > d[1].beta.re && d[1].beta.re > 0.0);
    real_roots_ok(&params, &a.iter().chain(d.iter()).collect::<Vec<_>>());
}

#[test]
fn rho1_is_the_only_diagonal_crossing() {
    for params in [common::three_regime(), common::random_stable(3)] {
        let eps = 1e-3;
        let f: Vec<f64> = (0..1000)
            .map(|i| eps + (1.0 - 2.0 * eps) * i as f64 / 999.0)
            .map(|b| perron_root(&params, b, b) - 1.0)
            .collect();
        let changes = f.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
        assert_eq!(changes, 1);
    }
}

#[test]
fn conjugates_of_scalar_points() {
    let p = common::scalar();
    let mut al: Vec<f64> = conjugate_alphas(&p, c64(0.4)).unwrap().iter().map(|s| s.alpha.re).collect();
    al.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((al[0] - 2.0 / 3.0).abs() < 1e-12 && (al[1] - 1.0).abs() < 1e-12);
    let b = betas_for_alpha(&p, c64(1.0)).unwrap();
    assert_eq!(b.len(), 1);
    assert!((b[0] - c64(0.4)).norm() < 1e-12);
}

#[test]
fn conjugates_at_rho2() {
    let params = common::three_regime();
    let r2 = find_rho2(&params).unwrap().beta.re;
    let a1 = find_alpha_star1(&params, r2).unwrap().alpha.re;
    let all = conjugate_alphas(&params, c64(r2)).unwrap();
    assert!(all.iter().any(|s| (s.alpha - c64(1.0)).norm() < 1e-8));
    assert!(all.iter().any(|s| (s.alpha - c64(a1)).norm() < 1e-8));
    let inner = all
        .iter()
        .filter(|s| s.alpha.im.abs() < 1e-9 && s.alpha.re > 0.0 && s.alpha.re < a1 - 1e-8)
        .count();
    assert_eq!(inner, 2);
    for s in &all {
        assert!(s.residual <= 1e-8);
    }
}

#[test]
fn circle_betas() {
    let params = common::three_regime();
    let a0 = C64::from_polar(0.7, std::f64::consts::PI / 3.0);
    let b = betas_for_alpha(&params, a0).unwrap();
    assert_eq!(b.len(), 3);
    let bc = betas_for_alpha(&params, a0.conj()).unwrap();
    for z in &b {
        assert!(bc.iter().any(|w| (w - z.conj()).norm() < 1e-10));
    }
}

#[test]
fn minor_vector_two_state() {
    let (a, b) = (0.3, 0.2);
    let v = minor_determinant_vector(&DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]));
    assert!((v[0] - b).abs() < 1e-15 && (v[1] - a).abs() < 1e-15);
}

#[test]
fn minor_vector_three_regime() {
    let params = common::three_regime();
    let v: Vec<f64> = minor_determinant_vector(params.p()).iter().copied().collect();
    assert!(angle(&v, &[1.0, 4.0, 10.0]) < 1e-10);
}

#[test]
fn three_regime_catalog() {
    let params = common::three_regime();
    let cat = build_root_catalog(&params, 5, 0.7).unwrap();
    assert_eq!(cat.harmonic_function_count(), 1 + 6 * 3);
    assert_eq!(cat.circle_families.len(), 15);
    assert_eq!(cat.alpha_star.len(), 3);
    assert!(cat.flags.conj && cat.flags.rho_distinct && cat.flags.ones_span.ok);
    assert!(cat.flags.branch_spans.iter().chain(&cat.flags.circle_spans).all(|s| s.ok));
    for p in cat.all_points() {
        assert!(p.residual <= 1e-8, "{} {}", p.beta, p.alpha);
    }
    let real: Vec<&SurfacePoint> = std::iter::once(&cat.rho1)
        .chain([&cat.rho2])
        .chain(&cat.alpha_star[..1])
        .chain(&cat.rho2_branches)
        .chain(&cat.rho1_branches)
        .collect();
    real_roots_ok(&params, &real);
    for c in &cat.circle_families {
        assert!(c.family.conjugates.iter().all(|p| p.alpha.norm() < 1.0));
        assert!(c.family.base.beta.norm() < 1.0);
    }
}

#[test]
fn scalar_catalog_without_circles() {
    let cat = build_root_catalog(&common::scalar(), 0, 0.7).unwrap();
    assert_eq!(cat.all_points().len(), 3);
    assert!(cat.circle_families.is_empty());
}

#[test]
fn bad_radius_is_a_domain_error() {
    assert!(matches!(build_root_catalog(&common::scalar(), 1, 1.2), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn minor_vector_is_stationary_and_positive(seed in any::<u64>(), n in 2usize..6, tri in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_stochastic(&mut rng, n, tri);
        prop_assume!(tandem_core::model::is_irreducible(&p));
        let v: Vec<f64> = minor_determinant_vector(&p).iter().copied().collect();
        let pi = stationary_distribution(&p).unwrap().pi;
        prop_assert!(v.iter().all(|&x| x > 0.0));
        prop_assert!(angle(&v, &pi) < 1e-10);
    }

    #[test]
    fn random_catalog_residuals(seed in 0u64..200) {
        let params = common::random_stable(seed);
        let cat = build_root_catalog(&params, 2, 0.7).unwrap();
        for p in cat.all_points() {
            prop_assert!(p.residual <= 1e-8);
        }
        let r1 = cat.rho1_value();
        let r2 = cat.rho2_value();
        prop_assert!(cat.rho2_branches.iter().all(|p| p.beta.re < r2));
        prop_assert!(cat.rho1_branches.iter().all(|p| p.beta.re < r1));
        prop_assert!(cat.rho2_branches.windows(2).all(|w| w[0].beta.re > w[1].beta.re));
        prop_assert!(cat.rho1_branches.windows(2).all(|w| w[0].beta.re > w[1].beta.re));
        if cat.flags.conj {
            prop_assert_eq!((r1 - r2).signum(), (cat.alpha_star[0].alpha.re - r2).signum());
        }
    }
}
