use std::f64::consts::{PI, SQRT_2};

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coorbit::bargmann::{beta_shift, fock_inner, fock_norm, fock_rep_coeff, EntireFn, FockGrid};
use coorbit::field::{CoefField, FieldGrid};
use coorbit::norms::{besov_from_field, besov_norm, mixed_norm, modulation_norm, NormSpec, WeightSpec};
use coorbit::signal::{lp_norm, make_signal, normalize, Signal, SignalSpec, TimeGrid};
use coorbit::stft::TFGrid;
use coorbit::wavelet::{cwt, field_l2_hyperbolic, normalize_admissible, ScaleGrid};
use coorbit::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sig(spec: &SignalSpec, grid: TimeGrid) -> Signal {
    make_signal(spec, grid).unwrap()
}

#[test]
fn cwt_dilation_covariance() {
    let time = TimeGrid::new(8.0, 1.0 / 64.0).unwrap();
    // Eight scales per octave, so s → 2s stays on the lattice.
    let grid = ScaleGrid::new(4.0, 0.125, 0.125, 8.0, 49).unwrap();
    let psi = normalize_admissible(&sig(&SignalSpec::MexicanHat, time)).unwrap();
    let base = SignalSpec::GaussianDerivative { n: 1 };
    let f = cwt(&sig(&base, time), &psi, &grid).unwrap();
    // f(2t) = 2^{-1/2} D_{1/2} f(t)
    let f2 = sig(&base.dilate(0.5), time).scaled(c(SQRT_2.recip(), 0.0));
    let w2 = cwt(&f2, &psi, &grid).unwrap();
    let mut checked = 0;
    for j in 0..grid.s_count() {
        for k in 0..grid.x_count() {
            let (x, s) = (grid.x(k), grid.scale(j));
            if let (Some(kk), Some(jj)) = (grid.x_index(2.0 * x), grid.scale_index(2.0 * s)) {
                let lhs = w2.values()[[k, j]];
                let rhs = f.values()[[kk, jj]] / SQRT_2;
                assert!((lhs - rhs).norm() < 1e-6, "x {x} s {s}: {lhs} vs {rhs}");
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn doubling_scale_range_changes_little() {
    let time = TimeGrid::new(16.0, 1.0 / 32.0).unwrap();
    let psi = normalize_admissible(&sig(&SignalSpec::MexicanHat, time)).unwrap();
    // Three vanishing moments keep the spectrum away from the large scales.
    let f = sig(&SignalSpec::GaussianDerivative { n: 3 }, time);
    let a = field_l2_hyperbolic(&cwt(&f, &psi, &ScaleGrid::new(16.0, 0.125, 0.125, 8.0, 49).unwrap()).unwrap());
    let b = field_l2_hyperbolic(&cwt(&f, &psi, &ScaleGrid::new(16.0, 0.125, 0.125, 16.0, 57).unwrap()).unwrap());
    assert!((a - b).abs() < 1e-4 * a, "{a} vs {b}");
}

#[test]
fn wavelet_normalization_is_scale_invariant() {
    let time = TimeGrid::new(8.0, 1.0 / 32.0).unwrap();
    let hat = sig(&SignalSpec::MexicanHat, time);
    let a = normalize_admissible(&hat).unwrap();
    let b = normalize_admissible(&hat.scaled(c(2.0, 0.0))).unwrap();
    for (u, v) in a.values().iter().zip(b.values()) {
        assert!((u - v).norm() < 1e-12);
    }
}

#[test]
fn besov_with_zero_smoothness_is_hyperbolic_l2() {
    let time = TimeGrid::new(16.0, 1.0 / 32.0).unwrap();
    let grid = ScaleGrid::new(16.0, 0.125, 1.0 / 16.0, 32.0, 73).unwrap();
    let psi = normalize_admissible(&sig(&SignalSpec::MexicanHat, time)).unwrap();
    let f = sig(&SignalSpec::GaussianDerivative { n: 1 }, time);
    let field = cwt(&f, &psi, &grid).unwrap();
    let spec = NormSpec::new(2.0, 2.0, WeightSpec::ScalePower { alpha: 0.0, q: 2.0 });
    let besov = besov_from_field(&field, &spec).unwrap();
    assert!((besov - field_l2_hyperbolic(&field)).abs() < 1e-12);
    let zero = sig(&SignalSpec::Zero, time);
    assert_eq!(besov_norm(&zero, &psi, 2.0, 2.0, 0.5, &grid).unwrap(), 0.0);
}

#[test]
fn besov_requires_wide_scale_range_and_admissible_wavelet() {
    let time = TimeGrid::new(8.0, 1.0 / 32.0).unwrap();
    let psi = normalize_admissible(&sig(&SignalSpec::MexicanHat, time)).unwrap();
    let f = sig(&SignalSpec::GaussianDerivative { n: 1 }, time);
    let narrow = ScaleGrid::new(4.0, 0.125, 0.5, 2.0, 16).unwrap();
    assert!(matches!(
        besov_norm(&f, &psi, 2.0, 2.0, 0.5, &narrow),
        Err(Error::ScaleRange { .. })
    ));
    let raw = sig(&SignalSpec::MexicanHat, time);
    let wide = ScaleGrid::new(8.0, 0.125, 0.125, 8.0, 48).unwrap();
    assert!(matches!(
        besov_norm(&f, &raw.scaled(c(3.0, 0.0)), 2.0, 2.0, 0.5, &wide),
        Err(Error::NotAdmissible { .. })
    ));
}

#[test]
fn modulation_norm_examples() {
    let time = TimeGrid::new(8.0, 1.0 / 32.0).unwrap();
    let grid = TFGrid::new(6.0, 0.125, 6.0, 0.125).unwrap();
    let phi = sig(&SignalSpec::Gaussian, time);
    let two = modulation_norm(&phi, &phi, 2.0, 2.0, 0.0, &grid).unwrap();
    assert!((two - 0.5f64.sqrt()).abs() < 1e-6);
    let zero = sig(&SignalSpec::Zero, time);
    assert_eq!(modulation_norm(&zero, &phi, 2.0, 2.0, 1.0, &grid).unwrap(), 0.0);
    // ∬ 2^{-1/2} e^{-π(x²+ω²)/2}, summed on a grid four times finer.
    let h = 1.0 / 32.0;
    let line: f64 = (-256..=256).map(|k| (-PI * (k as f64 * h).powi(2) / 2.0).exp()).sum::<f64>() * h;
    let oracle = 0.5f64.sqrt() * line * line;
    let one = modulation_norm(&phi, &phi, 1.0, 1.0, 0.0, &grid).unwrap();
    assert!((one - oracle).abs() < 1e-4, "{one} vs {oracle}");
}

#[test]
fn mixed_norm_matches_brute_force() {
    let g = TFGrid::new(0.5, 0.125, 0.5, 0.125).unwrap();
    let grid = FieldGrid::Tf(g);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let values = Array2::from_shape_fn(grid.shape(), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let field = CoefField::new(grid, values.clone()).unwrap();
    let spec = NormSpec::new(1.0, 2.0, WeightSpec::TfPolynomial { a: 1.0 });
    let mut outer = 0.0;
    for k in 0..g.omega_count() {
        let mut inner = 0.0;
        for j in 0..g.x_count() {
            let m = 1.0 + (g.x(j).powi(2) + g.omega(k).powi(2)).sqrt();
            inner += values[[j, k]].norm() * m * g.x_step();
        }
        outer += inner * inner * g.omega_step();
    }
    assert!((mixed_norm(&field, &spec).unwrap() - outer.sqrt()).abs() < 1e-12);
}

#[test]
fn fock_basis_is_orthonormal() {
    let grid = FockGrid::default();
    for m in 0..=6 {
        for n in 0..=6 {
            let v = fock_inner(&EntireFn::basis(m), &EntireFn::basis(n), &grid).unwrap();
            let expected = if m == n { 1.0 } else { 0.0 };
            assert!((v - c(expected, 0.0)).norm() < 1e-8, "<e{m}, e{n}> = {v}");
        }
    }
}

#[test]
fn fock_shift_is_unitary_by_quadrature() {
    let grid = FockGrid::default();
    let z = Complex64::from_polar(1.0, 0.7);
    let shifted = beta_shift(&EntireFn::one(), z, Complex64::from_polar(1.0, -0.3), 60).unwrap();
    assert!((fock_norm(&shifted, 2.0, &grid).unwrap() - 1.0).abs() < 1e-6);
    let same = beta_shift(&EntireFn::basis(3), c(0.0, 0.0), c(1.0, 0.0), 3).unwrap();
    assert_eq!(same, EntireFn::basis(3));
}

#[test]
fn rep_coeff_matches_inner_product() {
    let grid = FockGrid::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    assert!((fock_rep_coeff(&EntireFn::one(), c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    assert!((fock_rep_coeff(&EntireFn::one(), c(0.6, 0.8)).unwrap() - (-PI / 2.0).exp()).abs() < 1e-15);
    for _ in 0..4 {
        let f = EntireFn::new((0..5).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).unwrap();
        let z = Complex64::from_polar(rng.random_range(0.0..1.5), rng.random_range(0.0..2.0 * PI));
        let shifted = beta_shift(&EntireFn::one(), z, c(1.0, 0.0), 80).unwrap();
        let oracle = fock_inner(&f, &shifted, &grid).unwrap().norm();
        assert!((fock_rep_coeff(&f, z).unwrap() - oracle).abs() < 1e-6);
    }
}

#[test]
fn hermite_normalization() {
    let time = TimeGrid::new(8.0, 1.0 / 32.0).unwrap();
    let h1 = normalize(&sig(&SignalSpec::Hermite { n: 1 }, time)).unwrap();
    assert!((lp_norm(&h1, 2.0).unwrap() - 1.0).abs() < 1e-10);
}
