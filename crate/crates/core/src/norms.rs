//! Weighted mixed norms `L^{p,q}_m` on coefficient fields, and the
//! modulation and Besov norms built from them.
//!
//! The inner integral runs over axis 0 (x, or θ on the Fock plane) and the
//! outer one over axis 1 (ω, s or r), each with its own quadrature measure:
//! `(Σ_1 μ₁ (Σ_0 μ₀ |C|^p m^p)^{q/p})^{1/q}`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoefField, FieldGrid};
use crate::par;
use crate::signal::{check_exponent, Signal};
use crate::stft::{stft, TFGrid};
use crate::wavelet::{admissibility_constant, cwt, ScaleGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    #[default]
    Constant,
    /// `m(x, ω) = (1 + |(x, ω)|)^a`.
    TfPolynomial { a: f64 },
    /// `m(x, s) = s^{-(α + 1/2 - 1/q)}`.
    ScalePower { alpha: f64, q: f64 },
}

impl WeightSpec {
    /// Weight at the node `(c0, c1)` of `grid`.
    pub fn eval(&self, grid: &FieldGrid, c0: f64, c1: f64) -> Result<f64> {
        let v = match (self, grid) {
            (WeightSpec::Constant, _) => 1.0,
            (WeightSpec::TfPolynomial { a }, FieldGrid::Tf(_)) => (1.0 + c0.hypot(c1)).powf(*a),
            (WeightSpec::ScalePower { alpha, q }, FieldGrid::Scale(_)) => c1.powf(-(alpha + 0.5 - 1.0 / q)),
            (w, g) => {
                return Err(Error::param(
                    "weight",
                    format!("{} is not defined on a {} field", w.name(), g.name()),
                ))
            }
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidWeight { at0: c0, at1: c1 });
        }
        Ok(v)
    }

    fn name(&self) -> &'static str {
        match self {
            WeightSpec::Constant => "constant",
            WeightSpec::TfPolynomial { .. } => "tf_polynomial",
            WeightSpec::ScalePower { .. } => "scale_power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub weight: WeightSpec,
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec::l2()
    }
}

impl NormSpec {
    pub fn new(p: f64, q: f64, weight: WeightSpec) -> Self {
        NormSpec { p, q, weight }
    }

    pub fn l2() -> Self {
        NormSpec::new(2.0, 2.0, WeightSpec::Constant)
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent("p", self.p)?;
        check_exponent("q", self.q)
    }
}

/// Per-cell inner terms `μ₀ |C|^p m^p`, laid out like the field.
pub(crate) fn inner_terms(c: &CoefField, spec: &NormSpec) -> Result<Array2<f64>> {
    spec.validate()?;
    let grid = c.grid();
    let (n0, n1) = grid.shape();
    let weights1: Vec<f64> = (0..n1).map(|i| grid.coord1(i)).collect();
    let mut out = Array2::zeros((n0, n1));
    for i0 in 0..n0 {
        let c0 = grid.coord0(i0);
        let mu0 = grid.measure0(i0);
        for i1 in 0..n1 {
            let m = spec.weight.eval(grid, c0, weights1[i1])?;
            let v = c.values()[[i0, i1]].norm() * m;
            out[[i0, i1]] = if spec.p == 2.0 { v * v } else { v.powf(spec.p) } * mu0;
        }
    }
    Ok(out)
}

/// Outer-row contributions `μ₁ (Σ_0 terms·mask)^{q/p}` with inner sums
/// clamped at zero. `mask = None` means all ones.
pub(crate) fn row_contributions(
    grid: &FieldGrid,
    terms: &Array2<f64>,
    mask: Option<&Array2<f64>>,
    spec: &NormSpec,
) -> Vec<f64> {
    let (n0, n1) = grid.shape();
    let ratio = spec.q / spec.p;
    par::map_indexed(n1, |i1| {
        let inner = match mask {
            Some(m) => par::tree_sum(n0, |i0| terms[[i0, i1]] * m[[i0, i1]]),
            None => par::tree_sum(n0, |i0| terms[[i0, i1]]),
        }
        .max(0.0);
        let powed = if ratio == 1.0 { inner } else { inner.powf(ratio) };
        grid.measure1(i1) * powed
    })
}

pub(crate) fn finish(rows: &[f64], q: f64) -> f64 {
    let total = par::sum(rows);
    if q == 1.0 {
        total
    } else {
        total.powf(1.0 / q)
    }
}

/// `‖C‖_{L^{p,q}_m}` on the field's grid.
pub fn mixed_norm(c: &CoefField, spec: &NormSpec) -> Result<f64> {
    let terms = inner_terms(c, spec)?;
    Ok(finish(&row_contributions(c.grid(), &terms, None, spec), spec.q))
}

/// `‖S_g f‖_{L^{p,q}_m}` with `m(x, ω) = (1 + |(x, ω)|)^a`.
pub fn modulation_norm(f: &Signal, g: &Signal, p: f64, q: f64, a: f64, grid: &TFGrid) -> Result<f64> {
    let spec = NormSpec::new(p, q, WeightSpec::TfPolynomial { a });
    spec.validate()?;
    mixed_norm(&stft(f, g, grid)?, &spec)
}

/// Largest share of the Besov sum carried by the two extreme scale rows.
pub const SCALE_BOUNDARY_LIMIT: f64 = 1e-3;

/// Homogeneous Besov norm from wavelet coefficients:
/// `(∫ (∫ |W_g f(x,s)|^p dx)^{q/p} s^{-q(α + 1/2 - 1/q)} ds/s²)^{1/q}`.
///
/// Errors when the first and last scale rows together carry more than
/// [`SCALE_BOUNDARY_LIMIT`] of the sum, i.e. when the scale range truncates
/// the integral noticeably.
pub fn besov_norm(f: &Signal, g: &Signal, p: f64, q: f64, alpha: f64, grid: &ScaleGrid) -> Result<f64> {
    let spec = NormSpec::new(p, q, WeightSpec::ScalePower { alpha, q });
    spec.validate()?;
    if !alpha.is_finite() {
        return Err(Error::param("alpha", "must be finite"));
    }
    let constant = admissibility_constant(g)?;
    if (constant - 1.0).abs() > 1e-6 {
        return Err(Error::NotAdmissible { constant });
    }
    besov_from_field(&cwt(f, g, grid)?, &spec)
}

/// Besov sum over an existing wavelet field, with the scale-range check.
pub fn besov_from_field(c: &CoefField, spec: &NormSpec) -> Result<f64> {
    let terms = inner_terms(c, spec)?;
    let rows = row_contributions(c.grid(), &terms, None, spec);
    let total = par::sum(&rows);
    if total == 0.0 {
        return Ok(0.0);
    }
    let fraction = (rows[0] + rows[rows.len() - 1]) / total;
    if fraction > SCALE_BOUNDARY_LIMIT {
        return Err(Error::ScaleRange { fraction });
    }
    Ok(finish(&rows, spec.q))
}
