//! Sampled signals on a symmetric interval, the analytic families used to
//! build them, and elementary L^p functionals.
//!
//! Signals are zero outside `[-T, T)`. Sums are left-endpoint Riemann sums
//! with the uniform grid step, reduced over a fixed pairwise tree.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Relative tolerance for deciding that a real number sits on a lattice.
pub(crate) const LATTICE_TOL: f64 = 1e-9;

/// Uniform sampling of `[-half_width, half_width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimeGridDef", into = "TimeGridDef")]
pub struct TimeGrid {
    half_width: f64,
    step: f64,
    count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeGridDef {
    half_width: f64,
    step: f64,
}

impl TryFrom<TimeGridDef> for TimeGrid {
    type Error = Error;
    fn try_from(d: TimeGridDef) -> Result<Self> {
        TimeGrid::new(d.half_width, d.step)
    }
}

impl From<TimeGrid> for TimeGridDef {
    fn from(g: TimeGrid) -> Self {
        TimeGridDef {
            half_width: g.half_width,
            step: g.step,
        }
    }
}

/// Number of cells of width `step` in an interval of length `2 * half_width`,
/// which must be even and at least 8.
pub(crate) fn even_count(what: &str, half_width: f64, step: f64) -> Result<usize> {
    if !(half_width.is_finite() && half_width > 0.0 && step.is_finite() && step > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "{what}: half width and step must be positive (got {half_width}, {step})"
        )));
    }
    let exact = 2.0 * half_width / step;
    let count = exact.round();
    if (exact - count).abs() > LATTICE_TOL * exact.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "{what}: step {step} does not divide the interval length {}",
            2.0 * half_width
        )));
    }
    let count = count as usize;
    if count < 8 || !count.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "{what}: sample count {count} must be even and at least 8"
        )));
    }
    Ok(count)
}

/// `value / step` as an integer, or an error if `value` is off the lattice.
pub(crate) fn lattice_multiple(value: f64, step: f64) -> Result<isize> {
    let m = value / step;
    let r = m.round();
    if (m - r).abs() > LATTICE_TOL * r.abs().max(1.0) {
        return Err(Error::OffLattice { value, step });
    }
    Ok(r as isize)
}

impl TimeGrid {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        let count = even_count("time grid", half_width, step)?;
        Ok(TimeGrid {
            half_width,
            step,
            count,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Sample location `t_k = -T + k * step`.
    pub fn t(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.step
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.step
    }

    /// Number of grid steps in `h`; errors if `h` is not on the lattice.
    pub fn steps_in(&self, h: f64) -> Result<isize> {
        lattice_multiple(h, self.step)
    }

    /// Same sampling up to floating-point noise in the parameters.
    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }

    pub(crate) fn require_match(&self, other: &TimeGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "time grids differ: [{}, step {}] vs [{}, step {}]",
                self.half_width, self.step, other.half_width, other.step
            )))
        }
    }
}

/// Samples of a complex function on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.count()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("signal values"));
        }
        Ok(Signal { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Signal {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.count()],
        }
    }

    pub fn from_real(grid: TimeGrid, values: &[f64]) -> Result<Self> {
        Signal::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scaled(&self, c: Complex64) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `self - other`, sample by sample.
    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.grid.require_match(&other.grid)?;
        Ok(Signal {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.grid.require_match(&other.grid)?;
        Ok(Signal {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Value of the band-limited (Whittaker–Shannon) interpolant at `y`.
    ///
    /// Exact at sample points; between them it is the unique function with
    /// spectrum inside the Nyquist band that matches the samples.
    pub fn interpolate(&self, y: f64) -> Complex64 {
        bandlimited(&self.values, self.grid.t(0), self.grid.step, y)
    }

    /// Discrete inner product `Σ f(t) conj(g(t)) step`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        self.grid.require_match(&other.grid)?;
        let n = self.values.len();
        let re = par::tree_sum(n, |k| (self.values[k] * other.values[k].conj()).re);
        let im = par::tree_sum(n, |k| (self.values[k] * other.values[k].conj()).im);
        Ok(Complex64::new(re, im) * self.grid.step)
    }
}

/// Whittaker–Shannon interpolation of samples `values[n]` at `t0 + n*step`.
pub(crate) fn bandlimited(values: &[Complex64], t0: f64, step: f64, y: f64) -> Complex64 {
    let u = (y - t0) / step;
    let nearest = u.round();
    if (u - nearest).abs() < 1e-12 {
        let k = nearest as isize;
        return if k >= 0 && (k as usize) < values.len() {
            values[k as usize]
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    // sinc(u - n) = sin(pi u) (-1)^n / (pi (u - n))
    let fl = u.floor();
    let parity = if (fl as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sin_pi_u = parity * (PI * (u - fl)).sin();
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, v) in values.iter().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += v * (sign / (u - n as f64));
    }
    acc * (sin_pi_u / PI)
}

/// Closed-form signal families.
///
/// `translate`, `modulate` and `dilate` act analytically on their base:
/// `T_x f(t) = f(t - x)`, `M_ω f(t) = e^{2πiωt} f(t)`,
/// `D_s f(t) = s^{-1/2} f(t / s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    /// The zero function.
    Zero,
    /// `e^{-πt²}`
    Gaussian,
    /// `H_n(√(2π) t) e^{-πt²}` with physicists' Hermite polynomials
    /// (orthogonal, not normalized).
    Hermite { n: u32 },
    Translate { base: Box<SignalSpec>, x0: f64 },
    Modulate { base: Box<SignalSpec>, omega0: f64 },
    Dilate { base: Box<SignalSpec>, s0: f64 },
    /// L²-normalized `(1 - 2πt²) e^{-πt²}`, a negative multiple of the
    /// second derivative of the Gaussian.
    MexicanHat,
    /// n-th derivative of `e^{-πt²}`, not normalized.
    GaussianDerivative { n: u32 },
    /// Samples read from a CSV file (`t,re[,im]`).
    Samples { file: PathBuf },
}

impl SignalSpec {
    pub fn translate(self, x0: f64) -> Self {
        SignalSpec::Translate {
            base: Box::new(self),
            x0,
        }
    }

    pub fn modulate(self, omega0: f64) -> Self {
        SignalSpec::Modulate {
            base: Box::new(self),
            omega0,
        }
    }

    pub fn dilate(self, s0: f64) -> Self {
        SignalSpec::Dilate {
            base: Box::new(self),
            s0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SignalSpec::Translate { base, x0 } => {
                if !x0.is_finite() {
                    return Err(Error::param("x0", "must be finite"));
                }
                base.validate()
            }
            SignalSpec::Modulate { base, omega0 } => {
                if !omega0.is_finite() {
                    return Err(Error::param("omega0", "must be finite"));
                }
                base.validate()
            }
            SignalSpec::Dilate { base, s0 } => {
                if !(s0.is_finite() && *s0 > 0.0) {
                    return Err(Error::param("s0", format!("dilation must be positive, got {s0}")));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Rewrites relative sample-file paths against `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        match self {
            SignalSpec::Samples { file } if file.is_relative() => *file = dir.join(&*file),
            SignalSpec::Translate { base, .. }
            | SignalSpec::Modulate { base, .. }
            | SignalSpec::Dilate { base, .. } => base.resolve_paths(dir),
            _ => {}
        }
    }

    fn load(&self, grid: &TimeGrid) -> Result<Evaluator> {
        Ok(match self {
            SignalSpec::Zero => Evaluator::Zero,
            SignalSpec::Gaussian => Evaluator::Gaussian,
            SignalSpec::Hermite { n } => Evaluator::Hermite(*n),
            SignalSpec::MexicanHat => Evaluator::MexicanHat,
            SignalSpec::GaussianDerivative { n } => Evaluator::GaussianDerivative(*n),
            SignalSpec::Translate { base, x0 } => {
                Evaluator::Translate(Box::new(base.load(grid)?), *x0)
            }
            SignalSpec::Modulate { base, omega0 } => {
                Evaluator::Modulate(Box::new(base.load(grid)?), *omega0)
            }
            SignalSpec::Dilate { base, s0 } => Evaluator::Dilate(Box::new(base.load(grid)?), *s0),
            SignalSpec::Samples { file } => {
                let reader = std::io::BufReader::new(std::fs::File::open(file).map_err(|e| {
                    Error::Samples(format!("cannot open {}: {e}", file.display()))
                })?);
                Evaluator::Samples(read_signal_csv(reader, *grid)?)
            }
        })
    }
}

enum Evaluator {
    Zero,
    Gaussian,
    Hermite(u32),
    MexicanHat,
    GaussianDerivative(u32),
    Translate(Box<Evaluator>, f64),
    Modulate(Box<Evaluator>, f64),
    Dilate(Box<Evaluator>, f64),
    Samples(Signal),
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub(crate) fn hermite_poly(n: u32, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * y);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * y * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl Evaluator {
    fn eval(&self, t: f64) -> Complex64 {
        let re = |v: f64| Complex64::new(v, 0.0);
        match self {
            Evaluator::Zero => re(0.0),
            Evaluator::Gaussian => re((-PI * t * t).exp()),
            Evaluator::Hermite(n) => re(hermite_poly(*n, (2.0 * PI).sqrt() * t) * (-PI * t * t).exp()),
            Evaluator::MexicanHat => {
                // ‖(1 - 2πt²) e^{-πt²}‖² = 3 / (4√2)
                let norm = (4.0 * std::f64::consts::SQRT_2 / 3.0).sqrt();
                re(norm * (1.0 - 2.0 * PI * t * t) * (-PI * t * t).exp())
            }
            Evaluator::GaussianDerivative(n) => {
                // d^n/dt^n e^{-πt²} = (-√π)^n H_n(√π t) e^{-πt²}
                let c = (-PI.sqrt()).powi(*n as i32);
                re(c * hermite_poly(*n, PI.sqrt() * t) * (-PI * t * t).exp())
            }
            Evaluator::Translate(base, x0) => base.eval(t - x0),
            Evaluator::Modulate(base, w) => Complex64::from_polar(1.0, 2.0 * PI * w * t) * base.eval(t),
            Evaluator::Dilate(base, s) => base.eval(t / s) / s.sqrt(),
            Evaluator::Samples(sig) => sig.interpolate(t),
        }
    }
}

/// Exact samples of `spec` on `grid`.
///
/// Translations, modulations and dilations are applied to the analytic
/// formula. A sampled base is evaluated through its band-limited
/// interpolant, which reproduces the stored values at lattice points.
pub fn make_signal(spec: &SignalSpec, grid: TimeGrid) -> Result<Signal> {
    spec.validate()?;
    let eval = spec.load(&grid)?;
    let values = (0..grid.count()).map(|k| eval.eval(grid.t(k))).collect();
    Signal::new(grid, values)
}

/// `(Σ |f_k|^p · step)^{1/p}`.
pub fn lp_norm(f: &Signal, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let v = f.values();
    let s = if p == 2.0 {
        par::tree_sum(v.len(), |k| v[k].norm_sqr())
    } else {
        par::tree_sum(v.len(), |k| v[k].norm().powf(p))
    };
    Ok((s * f.grid().step()).powf(1.0 / p))
}

pub(crate) fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param(name, format!("exponent must be finite and ≥ 1, got {p}")));
    }
    Ok(())
}

/// Divides by the discrete L² norm.
pub fn normalize(f: &Signal) -> Result<Signal> {
    let n = lp_norm(f, 2.0)?;
    if n == 0.0 {
        return Err(Error::param("signal", "cannot normalize the zero signal"));
    }
    Ok(f.scaled(Complex64::new(1.0 / n, 0.0)))
}

/// `f(· - h)` for a lattice shift `h`, zero-filled at the exposed edge.
pub fn translate_samples(f: &Signal, h: f64) -> Result<Signal> {
    let m = f.grid().steps_in(h)?;
    Ok(shift_samples(f, m))
}

pub(crate) fn shift_samples(f: &Signal, m: isize) -> Signal {
    let n = f.values.len() as isize;
    let values = (0..n)
        .map(|k| {
            let src = k - m;
            if (0..n).contains(&src) {
                f.values[src as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Signal {
        grid: f.grid,
        values,
    }
}

/// Reads `t,re[,im]` rows; a non-numeric first line is taken as a header.
pub fn read_signal_csv<R: BufRead>(reader: R, grid: TimeGrid) -> Result<Signal> {
    let mut values = Vec::with_capacity(grid.count());
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        let nums = match parsed {
            Ok(n) => n,
            Err(_) if values.is_empty() && lineno == 0 => continue,
            Err(e) => return Err(Error::Samples(format!("line {}: {e}", lineno + 1))),
        };
        if !(2..=3).contains(&nums.len()) {
            return Err(Error::Samples(format!(
                "line {}: expected 2 or 3 columns, found {}",
                lineno + 1,
                nums.len()
            )));
        }
        let k = values.len();
        if k < grid.count() {
            let expected = grid.t(k);
            if (nums[0] - expected).abs() > 1e-6 * grid.step() {
                return Err(Error::Samples(format!(
                    "line {}: t = {} does not match grid point {expected}",
                    lineno + 1,
                    nums[0]
                )));
            }
        }
        values.push(Complex64::new(nums[1], nums.get(2).copied().unwrap_or(0.0)));
    }
    if values.len() != grid.count() {
        return Err(Error::Samples(format!(
            "{} rows for a grid of {} samples",
            values.len(),
            grid.count()
        )));
    }
    Signal::new(grid, values)
}

pub fn write_signal_csv<W: Write>(mut w: W, f: &Signal) -> Result<()> {
    writeln!(w, "t,re,im")?;
    for (k, v) in f.values().iter().enumerate() {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", f.grid().t(k), v.re, v.im)?;
    }
    Ok(())
}
