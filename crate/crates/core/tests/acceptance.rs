//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coorbit::bargmann::{beta_shift, eval_entire, fock_inner, fock_norm, EntireFn, FockGrid};
use coorbit::benchmarks;
use coorbit::config::diagnose_report;
use coorbit::field::{field_l2, CoefField, FieldGrid};
use coorbit::json::to_json_string;
use coorbit::norms::{besov_norm, mixed_norm, NormSpec, WeightSpec};
use coorbit::region::{restrict, RegionFamily, RegionKind};
use coorbit::signal::{lp_norm, make_signal, normalize, Signal, SignalSpec, TimeGrid};
use coorbit::stft::{heisenberg_compose, stft, stft_direct, tf_shift, HPoint, TFGrid};
use coorbit::tightness::{profile_of_fields, tail_norm};
use coorbit::wavelet::{cwt, cwt_direct, field_l2_hyperbolic, normalize_admissible, ScaleGrid};

type Outcome = (bool, String);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn default_time() -> TimeGrid {
    TimeGrid::new(8.0, 1.0 / 32.0).unwrap()
}

fn default_tf() -> TFGrid {
    TFGrid::new(6.0, 0.125, 6.0, 0.125).unwrap()
}

fn sig(spec: &SignalSpec, grid: TimeGrid) -> Signal {
    make_signal(spec, grid).unwrap()
}

fn battery() -> Vec<(&'static str, SignalSpec)> {
    use SignalSpec::*;
    vec![
        ("gaussian", Gaussian),
        ("hermite1", Hermite { n: 1 }),
        ("hermite3", Hermite { n: 3 }),
        ("translate", Gaussian.translate(1.5)),
        ("modulate", Gaussian.modulate(2.0)),
        ("dilate", Gaussian.dilate(2.0)),
        ("mexican_hat", MexicanHat),
        ("chirp_like", Hermite { n: 2 }.dilate(0.75).modulate(-1.25).translate(-0.5)),
    ]
}

fn c1_stft_isometry() -> Outcome {
    let time = default_time();
    let g = normalize(&sig(&SignalSpec::Gaussian, time)).unwrap();
    let mut worst: f64 = 0.0;
    for (_, spec) in battery() {
        let f = sig(&spec, time);
        let norm = lp_norm(&f, 2.0).unwrap();
        let err = (field_l2(&stft(&f, &g, &default_tf()).unwrap()) - norm).abs() / norm;
        worst = worst.max(err);
    }
    (worst <= 1e-6, format!("max relative error {worst:.3e} over 8 signals (tol 1e-6)"))
}

/// `∫ e^{-πt²} e^{-π(t-x)²} e^{-2πiωt} dt` by a dense trapezoid rule.
fn gaussian_stft_oracle(x: f64, w: f64) -> Complex64 {
    let h = 1.0 / 512.0;
    let n = (24.0 / h) as i64;
    let mut acc = c(0.0, 0.0);
    for k in -n..=n {
        let t = k as f64 * h;
        acc += Complex64::from_polar((-PI * t * t - PI * (t - x) * (t - x)).exp(), -2.0 * PI * w * t);
    }
    acc * h
}

fn c2_gaussian_envelope() -> Outcome {
    let time = default_time();
    let grid = default_tf();
    let phi = sig(&SignalSpec::Gaussian, time);
    let field = stft(&phi, &phi, &grid).unwrap();
    let mut worst: f64 = 0.0;
    for &x in &[-2.0, -0.875, 0.0, 0.5, 1.75] {
        for &w in &[-1.5, -0.25, 0.0, 1.0, 2.125] {
            let (j, k) = (grid.x_index(x).unwrap(), grid.omega_index(w).unwrap());
            let got = field.values()[[j, k]].norm();
            worst = worst.max((got - gaussian_stft_oracle(x, w).norm()).abs());
        }
    }
    (worst <= 1e-6, format!("max |Δ| {worst:.3e} at 25 lattice points (tol 1e-6)"))
}

fn c3_group_law() -> Outcome {
    let time = default_time();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let point = |rng: &mut ChaCha8Rng| {
            let x = rng.random_range(-32i32..=32) as f64 * time.step();
            let w = rng.random_range(-3.0..3.0);
            HPoint::new(x, w, Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).unwrap()
        };
        let (a, b) = (point(&mut rng), point(&mut rng));
        let spec = SignalSpec::Hermite { n: rng.random_range(0..4) }
            .modulate(rng.random_range(-2.0..2.0))
            .translate(rng.random_range(-1.0..1.0));
        let f = sig(&spec, time);
        let lhs = tf_shift(&tf_shift(&f, &b).unwrap(), &a).unwrap();
        let rhs = tf_shift(&f, &heisenberg_compose(&a, &b)).unwrap();
        for (u, v) in lhs.values().iter().zip(rhs.values()) {
            worst = worst.max((u - v).norm());
        }
    }
    (worst <= 1e-10, format!("max pointwise error {worst:.3e} over 20 triples (tol 1e-10)"))
}

fn hyperbolic_error(time: TimeGrid, grid: &ScaleGrid) -> f64 {
    let psi = normalize_admissible(&sig(&SignalSpec::MexicanHat, time)).unwrap();
    let signals = [
        SignalSpec::GaussianDerivative { n: 1 },
        SignalSpec::GaussianDerivative { n: 2 }.translate(0.5),
        SignalSpec::GaussianDerivative { n: 1 }.dilate(1.5),
    ];
    signals
        .iter()
        .map(|spec| {
            let f = sig(spec, time);
            let norm = lp_norm(&f, 2.0).unwrap();
            (field_l2_hyperbolic(&cwt(&f, &psi, grid).unwrap()) - norm).abs() / norm
        })
        .fold(0.0, f64::max)
}

fn c4_wavelet_isometry() -> Outcome {
    let base = hyperbolic_error(default_time(), &ScaleGrid::new(8.0, 0.125, 0.125, 8.0, 48).unwrap());
    let doubled = hyperbolic_error(
        TimeGrid::new(16.0, 1.0 / 32.0).unwrap(),
        &ScaleGrid::new(16.0, 0.125, 1.0 / 16.0, 16.0, 64).unwrap(),
    );
    (
        base <= 1e-2 && doubled <= 3e-3 && doubled < base,
        format!("relative error {base:.3e} at default grid (tol 1e-2), {doubled:.3e} doubled (tol 3e-3)"),
    )
}

fn c5_besov_scaling() -> Outcome {
    // Sampling at 1/64 keeps the smallest dilated wavelet (s = 1/16) resolved.
    let time = TimeGrid::new(16.0, 1.0 / 64.0).unwrap();
    let grid = ScaleGrid::new(16.0, 1.0 / 32.0, 1.0 / 16.0, 32.0, 73).unwrap();
    let psi = normalize_admissible(&sig(&SignalSpec::GaussianDerivative { n: 4 }, time)).unwrap();
    let base = SignalSpec::GaussianDerivative { n: 1 };
    let f = sig(&base, time);
    // f(2t) = 2^{-1/2} D_{1/2} f(t)
    let f2 = sig(&base.clone().dilate(0.5), time).scaled(c(SQRT_2.recip(), 0.0));
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (alpha, p, q) in [(0.5, 2.0, 2.0), (1.0, 1.0, 1.0)] {
        let ratio = besov_norm(&f2, &psi, p, q, alpha, &grid).unwrap() / besov_norm(&f, &psi, p, q, alpha, &grid).unwrap();
        let expected = 2f64.powf(alpha - 1.0 / p);
        let err = (ratio / expected - 1.0).abs();
        worst = worst.max(err);
        parts.push(format!("({alpha},{p},{q}) ratio {ratio:.6}"));
    }
    (worst <= 1e-2, format!("{}; max relative error {worst:.3e} (tol 1e-2)", parts.join(", ")))
}

fn c6_fock() -> Outcome {
    let grid = FockGrid::default();
    let one = EntireFn::one();
    let norm_err = (fock_norm(&one, 2.0, &grid).unwrap() - 1.0).abs();
    let mut shift_err: f64 = 0.0;
    for (r, angle, phase) in [(0.5, 0.3, 1.1), (1.0, 2.0, -0.4), (2.0, -1.2, 2.9)] {
        let z = Complex64::from_polar(r, angle);
        let shifted = beta_shift(&one, z, Complex64::from_polar(1.0, phase), 80).unwrap();
        let got = fock_inner(&one, &shifted, &grid).unwrap().norm();
        shift_err = shift_err.max((got - (-PI * r * r / 2.0).exp()).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = EntireFn::new((0..6).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).unwrap();
    let mut rep_err: f64 = 0.0;
    for _ in 0..5 {
        let w = Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..2.0 * PI));
        let kernel = EntireFn::kernel(w, 90);
        let lhs = fock_inner(&f, &kernel, &grid).unwrap();
        let rhs = eval_entire(&f, w).unwrap();
        rep_err = rep_err.max((lhs - rhs).norm() / rhs.norm().max(1.0));
    }
    (
        norm_err <= 1e-8 && shift_err <= 1e-8 && rep_err <= 1e-6,
        format!("‖1‖ error {norm_err:.2e}, shift error {shift_err:.2e} (tol 1e-8), reproducing error {rep_err:.2e} (tol 1e-6)"),
    )
}

/// `(½ ∫_r^R e^{-πρ²} 2πρ dρ)^{1/2}` by composite Simpson.
fn radial_tail_oracle(r: f64) -> f64 {
    let (big, n) = (12.0, 20_000);
    let h = (big - r) / n as f64;
    let g = |rho: f64| 0.5 * (-PI * rho * rho).exp() * 2.0 * PI * rho;
    let mut s = g(r) + g(big);
    for i in 1..n {
        s += g(r + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (s * h / 3.0).sqrt()
}

fn c7_tail_oracle() -> Outcome {
    let time = default_time();
    let phi = sig(&SignalSpec::Gaussian, time);
    let field = stft(&phi, &phi, &default_tf()).unwrap();
    let spec = NormSpec::l2();
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 1.5, 2.0] {
        let got = tail_norm(&field, &spec, RegionKind::TfBall, r).unwrap();
        worst = worst.max((got - radial_tail_oracle(r)).abs());
    }
    let radii: Vec<f64> = (1..=12).map(|i| 0.25 * i as f64).collect();
    let region = RegionFamily::new(RegionKind::TfBall, radii).unwrap();
    let profile = profile_of_fields(&[field], &spec, &region).unwrap();
    let decreasing = profile.eps.windows(2).all(|w| w[1] < w[0]);
    (
        worst <= 1e-4 && decreasing,
        format!("max |Δ| {worst:.3e} at r ∈ {{0.5,1,1.5,2}} (tol 1e-4); profile strictly decreasing: {decreasing}"),
    )
}

fn c8_benchmarks() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, expected) in [("hermite", true), ("translates", false), ("modulates", false), ("dilates", false)] {
        let report = diagnose_report(&benchmarks::by_name(name).unwrap()).unwrap();
        let f = report.flags;
        ok &= f.stft_tight == expected && f.weil_ok == Some(expected) && f.criteria_agree == Some(true);
        parts.push(format!("{name} {}/{}", f.stft_tight, f.weil_ok.unwrap()));
    }
    let radii: Vec<f64> = (1..=10)
        .map(|k| {
            let report = diagnose_report(&benchmarks::translates_with(k).unwrap()).unwrap();
            report.tight_radius[0].radius.expect("translate family is tight on its own grid")
        })
        .collect();
    // With a single centred member both x tails count, so growth is measured
    // once the outermost translate dominates (two or more members).
    let steps: Vec<f64> = radii[1..].windows(2).map(|w| w[1] - w[0]).collect();
    let growth_ok = steps.iter().all(|d| (d - 2.0).abs() <= 0.125);
    ok &= growth_ok;
    (
        ok,
        format!(
            "{}; translate tight_radius steps {:?} (first step {:.3})",
            parts.join(", "),
            steps,
            radii[1] - radii[0]
        ),
    )
}

fn random_field(rng: &mut ChaCha8Rng, grid: FieldGrid) -> CoefField {
    let (n0, n1) = grid.shape();
    let v = Array2::from_shape_fn((n0, n1), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    CoefField::new(grid, v).unwrap()
}

fn c9_solidity() -> Outcome {
    let tf = FieldGrid::Tf(TFGrid::new(1.0, 0.125, 1.0, 0.125).unwrap());
    let scale = FieldGrid::Scale(ScaleGrid::new(1.0, 0.125, 0.25, 4.0, 16).unwrap());
    let matrix: Vec<(FieldGrid, NormSpec)> = [1.0, 2.0, 3.5]
        .iter()
        .flat_map(|&p| [1.0, 2.0, 4.0].map(|q| (p, q)))
        .flat_map(|(p, q)| {
            [
                (tf.clone(), NormSpec::new(p, q, WeightSpec::Constant)),
                (tf.clone(), NormSpec::new(p, q, WeightSpec::TfPolynomial { a: 1.5 })),
                (scale.clone(), NormSpec::new(p, q, WeightSpec::ScalePower { alpha: 0.75, q })),
            ]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    for i in 0..500 {
        let (grid, spec) = &matrix[i % matrix.len()];
        let f = random_field(&mut rng, grid.clone());
        let g = f.values().mapv(|v| v * Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..2.0 * PI)));
        let g = CoefField::new(grid.clone(), g).unwrap();
        if mixed_norm(&g, spec).unwrap() > mixed_norm(&f, spec).unwrap() * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    let f = random_field(&mut rng, tf.clone());
    let spec = NormSpec::new(2.0, 1.0, WeightSpec::TfPolynomial { a: 1.0 });
    let profile: Vec<f64> = (0..=12)
        .map(|i| mixed_norm(&restrict(&f, RegionKind::TfBall, 0.125 * i as f64 + 1e-9, false).unwrap(), &spec).unwrap())
        .collect();
    let monotone = profile.windows(2).all(|w| w[1] <= w[0]);
    let ends_zero = *profile.last().unwrap() == 0.0;
    (
        violations == 0 && monotone && ends_zero,
        format!("{violations} solidity violations in 500 pairs; restriction profile monotone: {monotone}, ends at 0: {ends_zero}"),
    )
}

fn max_rel(a: &CoefField, b: &CoefField) -> f64 {
    let scale = b.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.values().iter().zip(b.values()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max) / scale
}

fn c10_fast_paths() -> Outcome {
    let time = TimeGrid::new(4.0, 1.0 / 16.0).unwrap();
    let f = sig(&SignalSpec::Hermite { n: 2 }.modulate(0.75).translate(0.5), time);
    let g = normalize(&sig(&SignalSpec::Gaussian, time)).unwrap();
    let tf = TFGrid::new(4.0, 0.125, 4.0, 0.125).unwrap();
    let stft_err = max_rel(&stft(&f, &g, &tf).unwrap(), &stft_direct(&f, &g, &tf).unwrap());
    let psi = normalize_admissible(&sig(&SignalSpec::MexicanHat, time)).unwrap();
    let sg = ScaleGrid::new(4.0, 0.125, 0.125, 8.0, 64).unwrap();
    let cwt_err = max_rel(&cwt(&f, &psi, &sg).unwrap(), &cwt_direct(&f, &psi, &sg).unwrap());

    let run = |threads: usize| -> Vec<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            ["hermite", "fock"]
                .iter()
                .map(|name| {
                    let report = diagnose_report(&benchmarks::by_name(name).unwrap()).unwrap();
                    let mut csv = Vec::new();
                    report.profile_data.write_csv(&mut csv).unwrap();
                    to_json_string(&report) + &String::from_utf8(csv).unwrap()
                })
                .collect()
        })
    };
    let reference = run(1);
    let identical = [2, 8].iter().all(|&n| run(n) == reference);
    (
        stft_err <= 1e-10 && cwt_err <= 1e-10 && identical,
        format!("stft {stft_err:.2e}, cwt {cwt_err:.2e} relative (tol 1e-10); reports byte-identical across 1/2/8 threads: {identical}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("STFT isometry", c1_stft_isometry),
        ("Gaussian STFT envelope", c2_gaussian_envelope),
        ("Heisenberg group law", c3_group_law),
        ("wavelet isometry", c4_wavelet_isometry),
        ("Besov scaling law", c5_besov_scaling),
        ("Fock closed forms", c6_fock),
        ("tail-norm oracle", c7_tail_oracle),
        ("tightness criteria agree", c8_benchmarks),
        ("solidity and absolute continuity", c9_solidity),
        ("fast paths and determinism", c10_fast_paths),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!("{} [{:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
