//! Continuous wavelet transform `W_g f(x, s) = ⟨f, T_x D_s g⟩` on a
//! log-uniform scale grid, with the hyperbolic measure `dx ds / s²`.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{field_l2, CoefField, FieldGrid};
use crate::par;
use crate::signal::{bandlimited, even_count, lp_norm, Signal, TimeGrid};

/// Translations on `[-X, X)` with step `x_step`, and `s_count` scales
/// `s_j = s_min ρ^j` from `s_min` to `s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScaleGridDef", into = "ScaleGridDef")]
pub struct ScaleGrid {
    x_half_width: f64,
    x_step: f64,
    s_min: f64,
    s_max: f64,
    s_count: usize,
    x_count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleGridDef {
    x_half_width: f64,
    x_step: f64,
    s_min: f64,
    s_max: f64,
    s_count: usize,
}

impl TryFrom<ScaleGridDef> for ScaleGrid {
    type Error = Error;
    fn try_from(d: ScaleGridDef) -> Result<Self> {
        ScaleGrid::new(d.x_half_width, d.x_step, d.s_min, d.s_max, d.s_count)
    }
}

impl From<ScaleGrid> for ScaleGridDef {
    fn from(g: ScaleGrid) -> Self {
        ScaleGridDef {
            x_half_width: g.x_half_width,
            x_step: g.x_step,
            s_min: g.s_min,
            s_max: g.s_max,
            s_count: g.s_count,
        }
    }
}

impl ScaleGrid {
    pub fn new(x_half_width: f64, x_step: f64, s_min: f64, s_max: f64, s_count: usize) -> Result<Self> {
        let x_count = even_count("scale grid (x)", x_half_width, x_step)?;
        if !(s_min > 0.0 && s_min < 1.0 && s_max > 1.0 && s_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "scale grid needs 0 < s_min < 1 < s_max (got {s_min}, {s_max})"
            )));
        }
        if s_count < 8 {
            return Err(Error::InvalidGrid(format!("scale grid needs at least 8 scales, got {s_count}")));
        }
        Ok(ScaleGrid {
            x_half_width,
            x_step,
            s_min,
            s_max,
            s_count,
            x_count,
        })
    }

    pub fn x_half_width(&self) -> f64 {
        self.x_half_width
    }
    pub fn x_step(&self) -> f64 {
        self.x_step
    }
    pub fn x_count(&self) -> usize {
        self.x_count
    }
    pub fn s_min(&self) -> f64 {
        self.s_min
    }
    pub fn s_max(&self) -> f64 {
        self.s_max
    }
    pub fn s_count(&self) -> usize {
        self.s_count
    }
    pub fn x(&self, k: usize) -> f64 {
        -self.x_half_width + k as f64 * self.x_step
    }

    /// `ln ρ`, the spacing of the scales in `ln s`.
    pub fn log_ratio(&self) -> f64 {
        (self.s_max / self.s_min).ln() / (self.s_count - 1) as f64
    }

    pub fn scale(&self, j: usize) -> f64 {
        (self.s_min.ln() + j as f64 * self.log_ratio()).exp()
    }

    pub fn x_index(&self, x: f64) -> Option<usize> {
        let m = crate::signal::lattice_multiple(x + self.x_half_width, self.x_step).ok()?;
        (0..self.x_count as isize).contains(&m).then_some(m as usize)
    }

    /// Index of the level equal to `s` (relative tolerance 1e-9).
    pub fn scale_index(&self, s: f64) -> Option<usize> {
        let u = (s / self.s_min).ln() / self.log_ratio();
        let j = u.round();
        ((u - j).abs() < 1e-9 && j >= 0.0 && (j as usize) < self.s_count).then_some(j as usize)
    }
}

/// Oversampling factor of the zero-padded spectrum used for admissibility.
const PAD: usize = 8;

/// `∫₀^∞ |ĝ(ξ)|² dξ / ξ`, the admissibility constant of `g`.
///
/// The spectrum is taken from a zero-padded DFT of the samples and
/// integrated by the trapezoid rule up to the Nyquist frequency; the ξ = 0
/// node contributes nothing because the mean vanishes. The same integral
/// over ξ < 0 must agree to 1e-6 relative.
pub fn admissibility_constant(g: &Signal) -> Result<f64> {
    let grid = g.grid();
    let step = grid.step();
    let l1 = lp_norm(g, 1.0)?;
    if l1 == 0.0 {
        return Err(Error::param("wavelet", "the zero signal is not a wavelet"));
    }
    let v = g.values();
    let mean = Complex64::new(
        par::tree_sum(v.len(), |k| v[k].re),
        par::tree_sum(v.len(), |k| v[k].im),
    ) * step;
    if mean.norm() > 1e-8 * l1 {
        return Err(Error::NonZeroMean { value: mean.norm() });
    }

    let m = PAD * grid.count();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..v.len()].copy_from_slice(v);
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let dxi = 1.0 / (m as f64 * step);
    let half = m / 2;
    let term = |b: usize, xi: f64| (buf[b] * step).norm_sqr() / xi;
    let side = |negative: bool| {
        let bin = |b: usize| if negative { (m - b) % m } else { b };
        let interior = par::tree_sum(half - 1, |i| {
            let b = i + 1;
            term(bin(b), b as f64 * dxi)
        });
        (interior + 0.5 * term(half, half as f64 * dxi)) * dxi
    };
    let (plus, minus) = (side(false), side(true));
    if (plus - minus).abs() > 1e-6 * plus.max(minus) {
        return Err(Error::NotEven { plus, minus });
    }
    if !(plus.is_finite() && plus > 0.0) {
        return Err(Error::NotAdmissible { constant: plus });
    }
    Ok(plus)
}

/// `g / sqrt(C_g)`, so that the transform is an isometry for `dx ds / s²`.
pub fn normalize_admissible(g: &Signal) -> Result<Signal> {
    let c = admissibility_constant(g)?;
    Ok(g.scaled(Complex64::new(1.0 / c.sqrt(), 0.0)))
}

struct CwtPlan {
    /// Sample index of the first translation and the x stride.
    m0: isize,
    stride: isize,
}

fn plan(time: &TimeGrid, grid: &ScaleGrid) -> Result<CwtPlan> {
    let limit = 2.0 * time.step();
    if grid.s_min < limit * (1.0 - 1e-12) {
        return Err(Error::UnresolvableScale {
            scale: grid.s_min,
            limit,
        });
    }
    // Sample index of the first translation: t_{m0} = x_0.
    let m0 = time.steps_in(grid.x(0))? + (time.count() / 2) as isize;
    let stride = time.steps_in(grid.x_step)?;
    Ok(CwtPlan { m0, stride })
}

/// `conj(g̃(d·step/s))` for `d` in `lo..=hi`, with `g̃` the band-limited
/// interpolant of the window samples.
fn dilated_table(g: &Signal, s: f64, lo: isize, hi: isize) -> Vec<Complex64> {
    let grid = g.grid();
    let (t0, step) = (grid.t(0), grid.step());
    (lo..=hi)
        .map(|d| bandlimited(g.values(), t0, step, d as f64 * step / s).conj())
        .collect()
}

/// `W_g f(x_k, s_j) = s_j^{-1/2} Σ_t f(t) conj(g((t - x_k)/s_j)) · step`.
///
/// Each scale is one linear correlation, evaluated by FFT. Window values
/// between samples come from band-limited interpolation.
pub fn cwt(f: &Signal, g: &Signal, grid: &ScaleGrid) -> Result<CoefField> {
    f.grid().require_match(g.grid())?;
    let time = *f.grid();
    let plan = plan(&time, grid)?;
    let n = time.count() as isize;
    let m_last = plan.m0 + plan.stride * (grid.x_count as isize - 1);
    // W(x_k) = Σ_n f_n h[n - m_k] with h[d] = conj(g̃(d·step/s)); as a
    // convolution with the reversed table indexed by e = m - n ∈ [e_lo, m_last].
    let e_lo = plan.m0 - (n - 1);
    let len = (m_last - e_lo + 1) as usize;
    let size = (n as usize + len - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(size);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(size);

    let mut fhat = vec![Complex64::new(0.0, 0.0); size];
    fhat[..n as usize].copy_from_slice(f.values());
    fwd.process(&mut fhat);

    let cols = par::map_indexed(grid.s_count, |j| {
        let s = grid.scale(j);
        // table[i] = conj(g̃((e_lo + i)·(-step)/s)) = h[-(e_lo + i)]
        let table = dilated_table(g, s, -m_last, -e_lo);
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (i, slot) in buf.iter_mut().take(len).enumerate() {
            *slot = table[len - 1 - i];
        }
        fwd.process(&mut buf);
        for (b, fh) in buf.iter_mut().zip(&fhat) {
            *b *= fh;
        }
        inv.process(&mut buf);
        let scale = time.step() / (s.sqrt() * size as f64);
        (0..grid.x_count)
            .map(|k| {
                let m = plan.m0 + plan.stride * k as isize;
                buf[(m - e_lo) as usize] * scale
            })
            .collect::<Vec<_>>()
    });
    let values = Array2::from_shape_fn((grid.x_count, grid.s_count), |(k, j)| cols[j][k]);
    CoefField::new(FieldGrid::Scale(*grid), values)
}

/// The defining double sum, one window evaluation per term.
pub fn cwt_direct(f: &Signal, g: &Signal, grid: &ScaleGrid) -> Result<CoefField> {
    f.grid().require_match(g.grid())?;
    let time = *f.grid();
    plan(&time, grid)?;
    let (t0, step) = (time.t(0), time.step());
    let mut values = Array2::zeros((grid.x_count, grid.s_count));
    for k in 0..grid.x_count {
        let x = grid.x(k);
        for j in 0..grid.s_count {
            let s = grid.scale(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, fv) in f.values().iter().enumerate() {
                let y = (time.t(i) - x) / s;
                acc += fv * bandlimited(g.values(), t0, step, y).conj();
            }
            values[[k, j]] = acc * (step / s.sqrt());
        }
    }
    CoefField::new(FieldGrid::Scale(*grid), values)
}

/// `(Σ |W|² · dx · ln ρ / s)^{1/2}`, the discrete `L²(dx ds / s²)` norm.
pub fn field_l2_hyperbolic(c: &CoefField) -> f64 {
    field_l2(c)
}
