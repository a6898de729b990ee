//! Coefficient fields: complex samples on a product grid with a product
//! quadrature measure.
//!
//! Axis 0 is the inner integration axis of mixed norms (x for the
//! time–frequency and scale planes, θ for the Fock plane) and axis 1 the
//! outer one (ω, s, r).

use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64;

use crate::bargmann::FockGrid;
use crate::error::{Error, Result};
use crate::par;
use crate::stft::TFGrid;
use crate::wavelet::ScaleGrid;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldGrid {
    Tf(TFGrid),
    Scale(ScaleGrid),
    Fock(FockGrid),
}

impl FieldGrid {
    pub fn name(&self) -> &'static str {
        match self {
            FieldGrid::Tf(_) => "time-frequency",
            FieldGrid::Scale(_) => "scale",
            FieldGrid::Fock(_) => "Fock",
        }
    }

    /// `(inner, outer)` sample counts.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            FieldGrid::Tf(g) => (g.x_count(), g.omega_count()),
            FieldGrid::Scale(g) => (g.x_count(), g.s_count()),
            FieldGrid::Fock(g) => (g.theta_count(), g.r_count()),
        }
    }

    pub fn coord0(&self, i: usize) -> f64 {
        match self {
            FieldGrid::Tf(g) => g.x(i),
            FieldGrid::Scale(g) => g.x(i),
            FieldGrid::Fock(g) => g.theta(i),
        }
    }

    pub fn coord1(&self, i: usize) -> f64 {
        match self {
            FieldGrid::Tf(g) => g.omega(i),
            FieldGrid::Scale(g) => g.scale(i),
            FieldGrid::Fock(g) => g.r(i),
        }
    }

    pub fn measure0(&self, _i: usize) -> f64 {
        match self {
            FieldGrid::Tf(g) => g.x_step(),
            FieldGrid::Scale(g) => g.x_step(),
            FieldGrid::Fock(g) => g.dtheta(),
        }
    }

    pub fn measure1(&self, i: usize) -> f64 {
        match self {
            FieldGrid::Tf(g) => g.omega_step(),
            FieldGrid::Scale(g) => g.log_ratio() / g.scale(i),
            FieldGrid::Fock(g) => g.r(i) * g.r_weight(i),
        }
    }

    pub fn cell_measure(&self, i0: usize, i1: usize) -> f64 {
        self.measure0(i0) * self.measure1(i1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefField {
    grid: FieldGrid,
    values: Array2<Complex64>,
}

impl CoefField {
    pub fn new(grid: FieldGrid, values: Array2<Complex64>) -> Result<Self> {
        let (n0, n1) = grid.shape();
        if values.dim() != (n0, n1) {
            return Err(Error::GridMismatch(format!(
                "field of shape {:?} on a {} grid of shape ({n0}, {n1})",
                values.dim(),
                grid.name()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("coefficient field"));
        }
        Ok(CoefField { grid, values })
    }

    pub fn zeros(grid: FieldGrid) -> Self {
        let values = Array2::zeros(grid.shape());
        CoefField { grid, values }
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn magnitudes(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm())
    }

    /// CSV rows `c0,c1,re,im,measure` in lexicographic coordinate order.
    ///
    /// Column names follow the grid: `x,omega`, `x,s` or `r,theta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (n0, n1) = self.grid.shape();
        let row = |w: &mut W, i0: usize, i1: usize, a: f64, b: f64| -> Result<()> {
            let v = self.values[[i0, i1]];
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                a,
                b,
                v.re,
                v.im,
                self.grid.cell_measure(i0, i1)
            )?;
            Ok(())
        };
        match self.grid {
            FieldGrid::Tf(_) | FieldGrid::Scale(_) => {
                let header = if matches!(self.grid, FieldGrid::Tf(_)) {
                    "x,omega,re,im,measure"
                } else {
                    "x,s,re,im,measure"
                };
                writeln!(w, "{header}")?;
                for i0 in 0..n0 {
                    for i1 in 0..n1 {
                        row(&mut w, i0, i1, self.grid.coord0(i0), self.grid.coord1(i1))?;
                    }
                }
            }
            FieldGrid::Fock(_) => {
                writeln!(w, "r,theta,re,im,measure")?;
                for i1 in 0..n1 {
                    for i0 in 0..n0 {
                        row(&mut w, i0, i1, self.grid.coord1(i1), self.grid.coord0(i0))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(Σ |C|² · cell_measure)^{1/2}`.
pub fn field_l2(c: &CoefField) -> f64 {
    let (n0, n1) = c.grid.shape();
    let v = &c.values;
    let g = &c.grid;
    par::tree_sum(n0 * n1, |i| {
        let (i0, i1) = (i / n1, i % n1);
        v[[i0, i1]].norm_sqr() * g.cell_measure(i0, i1)
    })
    .sqrt()
}
