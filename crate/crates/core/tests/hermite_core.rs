use lenscatter::hermite::{evaluate_at, lp_norm, SpectralField, TransformPlan};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_field(m: usize, seed: u64, decay: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::new(
        (0..m)
            .map(|k| {
                let a = (-decay * k as f64).exp();
                c(rng.random_range(-1.0..1.0) * a, rng.random_range(-1.0..1.0) * a)
            })
            .collect(),
    )
}

fn max_rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.distance(b).unwrap() / b.l2_norm().max(1e-300)
}

#[test]
fn basis_functions_analyze_to_unit_vectors() {
    let plan = TransformPlan::new(48).unwrap();
    let g0 = plan
        .project(|x| c(PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0))
        .unwrap();
    assert!(g0.distance(&SpectralField::basis(48, 0)).unwrap() < 1e-12);
    let g1 = plan
        .project(|x| c(2f64.sqrt() * x * PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0))
        .unwrap();
    assert!(g1.distance(&SpectralField::basis(48, 1)).unwrap() < 1e-12);
}

#[test]
fn ground_mode_synthesizes_to_gaussian() {
    let plan = TransformPlan::new(32).unwrap();
    let values = plan.synthesize(&SpectralField::basis(32, 0)).unwrap();
    for (v, &x) in values.iter().zip(plan.nodes()) {
        let expected = PI.powf(-0.25) * (-0.5 * x * x).exp();
        assert!((v.re - expected).abs() < 1e-13 && v.im.abs() < 1e-15);
    }
    let zero = plan.synthesize(&SpectralField::zeros(32)).unwrap();
    assert!(zero.iter().all(|v| *v == c(0.0, 0.0)));
}

#[test]
fn round_trip_recovers_coefficients() {
    for (m, seed) in [(64, 1), (256, 2), (512, 3), (1024, 4)] {
        let plan = TransformPlan::new(m).unwrap();
        let f = random_field(m, seed, 0.0);
        let back = plan.analyze(&plan.synthesize(&f).unwrap()).unwrap();
        let err = max_rel_diff(&back, &f);
        assert!(err < 1e-10, "M={m}: {err:e}");
    }
}

#[test]
fn matrix_free_path_agrees_with_dense_path() {
    let dense = TransformPlan::with_storage(129, true).unwrap();
    let free = TransformPlan::with_storage(129, false).unwrap();
    assert!(dense.is_dense() && !free.is_dense());
    let f = random_field(129, 9, 0.01);
    let a = dense.synthesize(&f).unwrap();
    let b = free.synthesize(&f).unwrap();
    assert_eq!(a, b);
    assert_eq!(dense.analyze(&a).unwrap(), free.analyze(&a).unwrap());
}

#[test]
fn top_mode_matches_high_precision_oracle() {
    // reference values of ψ₁₀₂₃ computed with 60-digit arithmetic
    let oracle = [
        (0.3, -0.100_242_011_179_363_16),
        (5.0, 0.050_363_177_439_551_607),
        (20.0, -0.112_320_950_176_709_63),
        (40.0, 0.034_209_721_174_285_2),
        (44.5, -0.276_783_717_964_340_3),
        (47.0, 3.975_815_379_416_017e-8),
        (52.0, 2.888_236_872_539_001e-51),
    ];
    let f = SpectralField::basis(1024, 1023);
    let xs: Vec<f64> = oracle.iter().map(|p| p.0).collect();
    let values = evaluate_at(&f, &xs);
    for ((x, expected), v) in oracle.iter().zip(&values) {
        let rel = (v.re - expected).abs() / expected.abs();
        assert!(rel < 1e-9, "x={x}: {} vs {expected} (rel {rel:e})", v.re);
    }
    // synthesis at the nodes agrees with pointwise evaluation
    let plan = TransformPlan::new(1024).unwrap();
    let at_nodes = plan.synthesize(&f).unwrap();
    let direct = evaluate_at(&f, plan.nodes());
    for (a, b) in at_nodes.iter().zip(&direct) {
        assert!(a.is_finite());
        assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-3));
    }
}

#[test]
fn fourier_phases_and_period_four() {
    let e1 = SpectralField::basis(8, 1).fourier(false);
    assert_eq!(e1.coeffs()[1], c(0.0, -1.0));
    assert_eq!(SpectralField::basis(8, 0).fourier(false), SpectralField::basis(8, 0));
    let f = random_field(37, 5, 0.0);
    let four = f.fourier(false).fourier(false).fourier(false).fourier(false);
    assert_eq!(four, f);
    assert_eq!(f.fourier(false).fourier(true), f);
}

#[test]
fn reflect_is_parity() {
    assert_eq!(SpectralField::basis(4, 0).reflect(), SpectralField::basis(4, 0));
    assert_eq!(
        SpectralField::basis(4, 1).reflect(),
        SpectralField::basis(4, 1).scaled(c(-1.0, 0.0))
    );
    let f = random_field(21, 6, 0.0);
    assert_eq!(f.reflect().reflect(), f);
}

#[test]
fn derivative_of_ground_mode() {
    let d = SpectralField::basis(16, 0).differentiate();
    let mut expected = SpectralField::zeros(16);
    expected.coeffs_mut()[1] = c(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
    assert!(d.distance(&expected).unwrap() < 1e-15);
    assert_eq!(SpectralField::zeros(5).differentiate(), SpectralField::zeros(5));
}

#[test]
fn derivative_matches_central_differences() {
    // oracle: h = 1e-5 central differences of the pointwise evaluation
    let h = 1e-5;
    let e0 = SpectralField::basis(16, 0);
    let d0 = e0.differentiate();
    for &x in &[-1.7, -0.2, 0.5, 2.1] {
        let fd = (evaluate_at(&e0, &[x + h])[0] - evaluate_at(&e0, &[x - h])[0]) / (2.0 * h);
        let spectral = evaluate_at(&d0, &[x])[0];
        assert!((fd - spectral).norm() < 1e-8);
    }

    let m = 128;
    let f = random_field(m, 7, 0.15);
    let df = SpectralField::new(f.derivative_extended());
    let plan = TransformPlan::new(m).unwrap();
    let interior: Vec<f64> = plan.nodes().iter().copied().filter(|x| x.abs() < 6.0).collect();
    let plus: Vec<f64> = interior.iter().map(|x| x + h).collect();
    let minus: Vec<f64> = interior.iter().map(|x| x - h).collect();
    let fp = evaluate_at(&f, &plus);
    let fm = evaluate_at(&f, &minus);
    let spectral = evaluate_at(&df, &interior);
    for ((a, b), s) in fp.iter().zip(&fm).zip(&spectral) {
        let fd = (a - b) / (2.0 * h);
        assert!((fd - s).norm() < 1e-6, "{fd} vs {s}");
    }
}

#[test]
fn multiply_by_x_of_ground_mode_matches_quadrature() {
    let m = 24;
    let plan = TransformPlan::new(m).unwrap();
    let oracle = plan
        .project(|x| c(x * PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0))
        .unwrap();
    let xe0 = SpectralField::basis(m, 0).multiply_by_x();
    assert!(xe0.distance(&oracle).unwrap() < 1e-13);
    assert!((xe0.coeffs()[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn multiplication_by_x_preserves_parity_flip() {
    let even = SpectralField::new(
        (0..20)
            .map(|k| if k % 2 == 0 { c(1.0 / (k as f64 + 1.0), 0.3) } else { c(0.0, 0.0) })
            .collect(),
    );
    let xf = even.multiply_by_x();
    for (k, v) in xf.coeffs().iter().enumerate() {
        if k % 2 == 0 {
            assert_eq!(*v, c(0.0, 0.0));
        }
    }
}

#[test]
fn commutator_and_oscillator_identities() {
    let m = 40;
    let mut f = random_field(m, 8, 0.05);
    f.coeffs_mut()[m - 1] = c(0.0, 0.0);
    f.coeffs_mut()[m - 2] = c(0.0, 0.0);
    // [∂, x] = 1
    let lhs = f.multiply_by_x().differentiate();
    let rhs = f.differentiate().multiply_by_x();
    for k in 0..m - 2 {
        let comm = lhs.coeffs()[k] - rhs.coeffs()[k];
        assert!((comm - f.coeffs()[k]).norm() < 1e-12);
    }
    // ½(−∂² + x²) ψ_m = (m + ½) ψ_m
    let d2 = f.differentiate().differentiate();
    let x2 = f.multiply_by_x().multiply_by_x();
    for k in 0..m - 2 {
        let h = 0.5 * (x2.coeffs()[k] - d2.coeffs()[k]);
        let expected = f.coeffs()[k] * (k as f64 + 0.5);
        assert!((h - expected).norm() < 1e-12, "mode {k}");
    }
}

#[test]
fn sigma_norm_values() {
    let e0 = SpectralField::basis(8, 0);
    assert!((e0.sigma_norm(1, 1) - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((SpectralField::basis(8, 5).sigma_norm(2, 1) - 5.5).abs() < 1e-15);
    let f = random_field(30, 10, 0.0);
    assert!((f.sigma_norm(0, 1) - f.l2_norm()).abs() < 1e-14);
}

#[test]
fn lp_norms_of_the_gaussian() {
    let plan = TransformPlan::new(64).unwrap();
    let e0 = SpectralField::basis(64, 0);
    assert!((lp_norm(&e0, 2.0, &plan).unwrap() - 1.0).abs() < 1e-12);
    // ∫ π^{-1} e^{-2x²} dx = 1/√(2π)
    let expected = (1.0 / (2.0 * PI).sqrt()).powf(0.25);
    assert!((lp_norm(&e0, 4.0, &plan).unwrap() - expected).abs() < 1e-12);
    assert_eq!(lp_norm(&SpectralField::zeros(64), 3.0, &plan).unwrap(), 0.0);
    assert!(lp_norm(&e0, 0.5, &plan).is_err());
}

#[test]
fn inner_products() {
    let e0 = SpectralField::basis(6, 0);
    let e1 = SpectralField::basis(6, 1);
    assert_eq!(e0.l2_inner(&e0).unwrap(), c(1.0, 0.0));
    assert_eq!(e0.l2_inner(&e1).unwrap(), c(0.0, 0.0));
    assert!(e0.l2_inner(&SpectralField::zeros(5)).is_err());
}

#[test]
fn dimension_and_finiteness_errors() {
    let plan = TransformPlan::new(8).unwrap();
    assert!(plan.analyze(&[c(0.0, 0.0); 7]).is_err());
    let mut bad = vec![c(0.0, 0.0); 8];
    bad[3] = c(f64::NAN, 0.0);
    assert!(plan.analyze(&bad).is_err());
    assert!(plan.synthesize(&SpectralField::zeros(9)).is_err());
}

#[test]
fn transforms_are_deterministic() {
    let plan = TransformPlan::new(100).unwrap();
    let f = random_field(100, 11, 0.02);
    assert_eq!(plan.synthesize(&f).unwrap(), plan.synthesize(&f).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_is_unitary_and_parseval_holds(seed in any::<u64>(), m in 1usize..80) {
        let f = random_field(m, seed, 0.0);
        let g = random_field(m, seed ^ 0xdead_beef, 0.0);
        prop_assert!((f.fourier(false).norm_sqr() - f.norm_sqr()).abs() <= 1e-12 * f.norm_sqr().max(1.0));
        let a = f.l2_inner(&g).unwrap();
        let b = f.fourier(false).l2_inner(&g.fourier(false)).unwrap();
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn multiplication_by_x_is_symmetric(seed in any::<u64>(), m in 2usize..64) {
        let f = random_field(m, seed, 0.0);
        let g = random_field(m, seed.wrapping_add(1), 0.0);
        let a = f.multiply_by_x().l2_inner(&g).unwrap();
        let b = f.l2_inner(&g.multiply_by_x()).unwrap();
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn synthesize_then_analyze_is_identity(seed in any::<u64>(), m in 1usize..160) {
        let plan = TransformPlan::new(m).unwrap();
        let f = random_field(m, seed, 0.0);
        let back = plan.analyze(&plan.synthesize(&f).unwrap()).unwrap();
        prop_assert!(back.distance(&f).unwrap() <= 1e-10 * f.l2_norm().max(1e-300));
    }
}
