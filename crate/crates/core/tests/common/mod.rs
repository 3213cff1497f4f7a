#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tandem_core::ModelParams;

pub fn three_regime() -> ModelParams {
    ModelParams::from_rows(
        &[vec![0.6, 0.4, 0.0], vec![0.1, 0.4, 0.5], vec![0.0, 0.2, 0.8]],
        &[0.1, 0.12, 0.09],
        &[0.4, 0.41, 0.39],
        &[0.5, 0.47, 0.52],
    )
    .unwrap()
}

pub fn scalar() -> ModelParams {
    ModelParams::from_rows(&[vec![1.0]], &[0.2], &[0.3], &[0.5]).unwrap()
}

/// A stochastic matrix with positive diagonal; strictly tridiagonal when `tri`.
pub fn random_stochastic(rng: &mut ChaCha8Rng, n: usize, tri: bool) -> DMatrix<f64> {
    let mut p = DMatrix::from_fn(n, n, |i, j| {
        let near = (i as i64 - j as i64).abs() <= 1;
        if i == j || (near && tri) || (!tri && rng.gen_bool(0.6)) {
            rng.gen_range(0.05..1.0)
        } else {
            0.0
        }
    });
    for i in 0..n {
        let s: f64 = p.row(i).sum();
        for j in 0..n {
            p[(i, j)] /= s;
        }
    }
    p
}

/// Stable tandem model with strictly tridiagonal modulation, loosely around
/// the three-regime instance.
pub fn random_stable(seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=3);
        let p = random_stochastic(&mut rng, n, true);
        let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.15)).collect();
        let mu1: Vec<f64> = lam.iter().map(|_| rng.gen_range(0.3..0.5)).collect();
        let mu2: Vec<f64> = lam.iter().zip(&mu1).map(|(l, m)| 1.0 - l - m).collect();
        if let Ok(m) = ModelParams::new(p, lam, mu1, mu2) {
            if tandem_core::model::check_stability(&m).is_stable() {
                return m;
            }
        }
    }
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Stable, but the conjugate of `(rho2, 1)` on the Perron branch lies outside
/// the unit disk.
pub fn no_conj() -> ModelParams {
    ModelParams::from_rows(
        &[vec![0.5, 0.5], vec![0.4, 0.6]],
        &[0.48, 0.01],
        &[0.05, 0.31],
        &[0.47, 0.68],
    )
    .unwrap()
}

/// Every harmonic function the approximation is built from, labelled.
pub fn harmonic_family(
    params: &ModelParams,
    cat: &tandem_core::RootCatalog,
) -> Vec<(String, tandem_core::HarmonicFn)> {
    use tandem_core::harmonic::*;
    let mut out = vec![
        ("h_rho1".to_string(), build_h_rho1(cat).unwrap()),
        ("frak_h_rho2".to_string(), build_frak_h_rho2(params, cat).unwrap()),
    ];
    for (i, f) in cat.rho2_branch_families.iter().enumerate() {
        out.push((
            format!("frak_h_rho2_{}", i + 2),
            conjugate_combination(params, f, "branch").unwrap(),
        ));
    }
    for (i, p) in cat.rho1_branches.iter().enumerate() {
        out.push((
            format!("h_rho1_{}", i + 2),
            HarmonicFn::single(p.clone(), HarmonicKind::Harmonic, true).unwrap(),
        ));
    }
    out.push(("frak_h".to_string(), build_frak_h(params, cat).unwrap()));
    for c in &cat.circle_families {
        out.push((
            format!("frak_h_{}_{}", c.k, c.j),
            conjugate_combination(params, &c.family, "circle").unwrap(),
        ));
    }
    out.push(("h_a*K".to_string(), assemble_ha_k(params, cat).unwrap().function));
    out
}

/// Largest `|residual| / (1 + |h|)` over `{0..=side}^2` and all regimes.
pub fn worst_residual(params: &ModelParams, h: &tandem_core::HarmonicFn, side: i64) -> f64 {
    let mut worst = 0.0f64;
    for y1 in 0..=side {
        for y2 in 0..=side {
            for m in 0..params.num_regimes() {
                let r = tandem_core::harmonic::one_step_residual(params, h, y1, y2, m);
                worst = worst.max(r.norm() / (1.0 + h.eval(y1, y2, m).norm()));
            }
        }
    }
    worst
}
