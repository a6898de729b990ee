//! Time–frequency shifts, the reduced Heisenberg group, and the short-time
//! Fourier transform `S_g f(x, ω) = ⟨f, M_ω T_x g⟩` with its adjoint.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoefField, FieldGrid};
use crate::par;
use crate::signal::{even_count, lattice_multiple, lp_norm, Signal, TimeGrid};

/// Element `(x, ω, τ)` of the reduced Heisenberg group, `|τ| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    pub x: f64,
    pub omega: f64,
    pub tau: Complex64,
}

impl HPoint {
    pub fn new(x: f64, omega: f64, tau: Complex64) -> Result<Self> {
        if !(x.is_finite() && omega.is_finite()) {
            return Err(Error::NonFinite("Heisenberg point"));
        }
        if (tau.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::param("tau", format!("must be unimodular, |tau| = {}", tau.norm())));
        }
        Ok(HPoint { x, omega, tau })
    }

    /// `(x, ω, 1)`.
    pub fn at(x: f64, omega: f64) -> Self {
        HPoint {
            x,
            omega,
            tau: Complex64::new(1.0, 0.0),
        }
    }

    pub fn identity() -> Self {
        HPoint::at(0.0, 0.0)
    }
}

/// `τ M_ω T_x f`, i.e. `t ↦ τ e^{2πiω(t-x)} f(t - x)`, zero-filled at the edge.
///
/// The phase is referenced to the shifted origin, so that
/// `tf_shift(a) ∘ tf_shift(b) = tf_shift(heisenberg_compose(a, b))` holds
/// exactly on the lattice.
pub fn tf_shift(f: &Signal, p: &HPoint) -> Result<Signal> {
    let grid = *f.grid();
    let m = grid.steps_in(p.x)?;
    let n = grid.count() as isize;
    let src = f.values();
    let values = (0..n)
        .map(|k| {
            let from = k - m;
            if (0..n).contains(&from) {
                let u = grid.t(from as usize);
                p.tau * Complex64::from_polar(1.0, 2.0 * PI * p.omega * u) * src[from as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Signal::new(grid, values)
}

/// Group law matching [`tf_shift`]:
/// `(x₁+x₂, ω₁+ω₂, τ₁τ₂ e^{2πi x₂ω₁})`.
pub fn heisenberg_compose(a: &HPoint, b: &HPoint) -> HPoint {
    let tau = a.tau * b.tau * Complex64::from_polar(1.0, 2.0 * PI * b.x * a.omega);
    HPoint {
        x: a.x + b.x,
        omega: a.omega + b.omega,
        tau: tau / tau.norm(),
    }
}

/// Uniform lattice on `[-X, X) × [-Ω, Ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TFGridDef", into = "TFGridDef")]
pub struct TFGrid {
    x_half_width: f64,
    x_step: f64,
    omega_half_width: f64,
    omega_step: f64,
    x_count: usize,
    omega_count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TFGridDef {
    x_half_width: f64,
    x_step: f64,
    omega_half_width: f64,
    omega_step: f64,
}

impl TryFrom<TFGridDef> for TFGrid {
    type Error = Error;
    fn try_from(d: TFGridDef) -> Result<Self> {
        TFGrid::new(d.x_half_width, d.x_step, d.omega_half_width, d.omega_step)
    }
}

impl From<TFGrid> for TFGridDef {
    fn from(g: TFGrid) -> Self {
        TFGridDef {
            x_half_width: g.x_half_width,
            x_step: g.x_step,
            omega_half_width: g.omega_half_width,
            omega_step: g.omega_step,
        }
    }
}

impl TFGrid {
    pub fn new(x_half_width: f64, x_step: f64, omega_half_width: f64, omega_step: f64) -> Result<Self> {
        let x_count = even_count("TF grid (x)", x_half_width, x_step)?;
        let omega_count = even_count("TF grid (omega)", omega_half_width, omega_step)?;
        Ok(TFGrid {
            x_half_width,
            x_step,
            omega_half_width,
            omega_step,
            x_count,
            omega_count,
        })
    }

    pub fn x_half_width(&self) -> f64 {
        self.x_half_width
    }
    pub fn x_step(&self) -> f64 {
        self.x_step
    }
    pub fn omega_half_width(&self) -> f64 {
        self.omega_half_width
    }
    pub fn omega_step(&self) -> f64 {
        self.omega_step
    }
    pub fn x_count(&self) -> usize {
        self.x_count
    }
    pub fn omega_count(&self) -> usize {
        self.omega_count
    }
    pub fn x(&self, j: usize) -> f64 {
        -self.x_half_width + j as f64 * self.x_step
    }
    pub fn omega(&self, k: usize) -> f64 {
        -self.omega_half_width + k as f64 * self.omega_step
    }
    pub fn cell_measure(&self) -> f64 {
        self.x_step * self.omega_step
    }

    /// Index of the lattice point at `x`, if it is one.
    pub fn x_index(&self, x: f64) -> Option<usize> {
        index_of(x + self.x_half_width, self.x_step, self.x_count)
    }

    pub fn omega_index(&self, omega: f64) -> Option<usize> {
        index_of(omega + self.omega_half_width, self.omega_step, self.omega_count)
    }
}

fn index_of(offset: f64, step: f64, count: usize) -> Option<usize> {
    let m = lattice_multiple(offset, step).ok()?;
    (0..count as isize).contains(&m).then_some(m as usize)
}

/// Lattice bookkeeping shared by the fast analysis and synthesis paths.
struct TfPlan {
    /// Time-lattice offset of each x row.
    x_shift: Vec<isize>,
    /// Signed FFT bin of each ω column.
    bins: Vec<isize>,
}

fn plan(time: &TimeGrid, grid: &TFGrid) -> Result<TfPlan> {
    let nyquist = time.nyquist();
    if grid.omega_half_width > nyquist * (1.0 + 1e-12) {
        return Err(Error::Nyquist {
            requested: grid.omega_half_width,
            nyquist,
        });
    }
    let x_shift = (0..grid.x_count)
        .map(|j| time.steps_in(grid.x(j)))
        .collect::<Result<Vec<_>>>()?;
    // ω_k · 2T must be an integer: ω lies on the DFT frequency lattice.
    let df = 1.0 / (2.0 * time.half_width());
    let bins = (0..grid.omega_count)
        .map(|k| lattice_multiple(grid.omega(k), df))
        .collect::<Result<Vec<_>>>()?;
    Ok(TfPlan { x_shift, bins })
}

fn sign(b: isize) -> f64 {
    if b.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `S_g f(x_j, ω_k) = Σ_t f(t) conj(g(t - x_j)) e^{-2πiω_k t} · step`.
///
/// One FFT per x row: with `ω_k = b/(2T)` the exponential at
/// `t_n = -T + n·step` equals `(-1)^b e^{-2πi b n / N}`.
pub fn stft(f: &Signal, g: &Signal, grid: &TFGrid) -> Result<CoefField> {
    f.grid().require_match(g.grid())?;
    let time = *f.grid();
    let plan = plan(&time, grid)?;
    let n = time.count();
    let fft: std::sync::Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
    let step = time.step();
    let (fv, gv) = (f.values(), g.values());

    let rows = par::map_indexed(grid.x_count, |j| {
        let m = plan.x_shift[j];
        let mut buf: Vec<Complex64> = (0..n as isize)
            .map(|k| {
                let src = k - m;
                if (0..n as isize).contains(&src) {
                    fv[k as usize] * gv[src as usize].conj()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        fft.process(&mut buf);
        plan.bins
            .iter()
            .map(|&b| buf[b.rem_euclid(n as isize) as usize] * (sign(b) * step))
            .collect::<Vec<_>>()
    });
    let values = Array2::from_shape_vec(
        (grid.x_count, grid.omega_count),
        rows.into_iter().flatten().collect(),
    )
    .expect("row lengths match the grid");
    CoefField::new(FieldGrid::Tf(*grid), values)
}

/// The defining double sum, evaluated term by term.
pub fn stft_direct(f: &Signal, g: &Signal, grid: &TFGrid) -> Result<CoefField> {
    f.grid().require_match(g.grid())?;
    let time = *f.grid();
    let plan = plan(&time, grid)?;
    let n = time.count() as isize;
    let (fv, gv) = (f.values(), g.values());
    let mut values = Array2::zeros((grid.x_count, grid.omega_count));
    for j in 0..grid.x_count {
        let m = plan.x_shift[j];
        for k in 0..grid.omega_count {
            let w = grid.omega(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let src = i - m;
                if !(0..n).contains(&src) {
                    continue;
                }
                let t = time.t(i as usize);
                acc += fv[i as usize]
                    * gv[src as usize].conj()
                    * Complex64::from_polar(1.0, -2.0 * PI * w * t);
            }
            values[[j, k]] = acc * time.step();
        }
    }
    CoefField::new(FieldGrid::Tf(*grid), values)
}

/// Adjoint synthesis `f(t) = Σ_j Σ_k C(x_j, ω_k) e^{2πiω_k t} g(t - x_j) dx dω`.
///
/// For a normalized window this inverts [`stft`] on grids that capture the
/// coefficient energy and resolve both the window and the signal.
pub fn istft(c: &CoefField, g: &Signal) -> Result<Signal> {
    let grid = match c.grid() {
        FieldGrid::Tf(grid) => *grid,
        other => {
            return Err(Error::GridMismatch(format!(
                "istft needs a time-frequency field, got a {} field",
                other.name()
            )))
        }
    };
    let norm = lp_norm(g, 2.0)?;
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    let time = *g.grid();
    let plan = plan(&time, &grid)?;
    let n = time.count();
    let ifft: std::sync::Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(n);
    let gv = g.values();
    let cv = c.values();
    let measure = grid.cell_measure();

    let rows = par::map_indexed(grid.x_count, |j| {
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for (k, &b) in plan.bins.iter().enumerate() {
            spec[b.rem_euclid(n as isize) as usize] += cv[[j, k]] * sign(b);
        }
        ifft.process(&mut spec);
        let m = plan.x_shift[j];
        for (i, v) in spec.iter_mut().enumerate() {
            let src = i as isize - m;
            *v = if (0..n as isize).contains(&src) {
                *v * gv[src as usize] * measure
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        spec
    });
    let values = par::map_indexed(n, |i| {
        let re = par::tree_sum(rows.len(), |j| rows[j][i].re);
        let im = par::tree_sum(rows.len(), |j| rows[j][i].im);
        Complex64::new(re, im)
    });
    Signal::new(time, values)
}
