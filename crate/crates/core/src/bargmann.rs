//! Entire functions in the Bargmann–Fock space, stored as truncated
//! expansions in the orthonormal basis `e_n(z) = (π^n / n!)^{1/2} z^n`.
//!
//! The Heisenberg action used here is
//! `β(z, τ) F(w) = τ e^{π w z̄} F(w - z) e^{-π|z|²/2}`, which maps the
//! constant function to the normalized reproducing kernel at `z`, so that
//! `⟨F, β(z, τ) 1⟩ = τ̄ F(z) e^{-π|z|²/2}`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoefField, FieldGrid};
use crate::par;
use crate::quad::gauss_legendre;

/// Largest admissible `ln |c_n a_n z^n|` before evaluation is refused.
const LOG_OVERFLOW: f64 = 600.0;

/// Gauss–Legendre points per radial panel.
const PANEL: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EntireFn {
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct EntireFnDef {
    degree: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for EntireFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EntireFnDef {
            degree: self.degree(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EntireFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let def = EntireFnDef::deserialize(d)?;
        if def.coeffs.len() != def.degree + 1 {
            return Err(serde::de::Error::custom(format!(
                "degree {} needs {} coefficients, found {}",
                def.degree,
                def.degree + 1,
                def.coeffs.len()
            )));
        }
        EntireFn::new(def.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// `(π^n / n!)^{1/2}` for `n = 0..=degree`.
fn basis_scales(degree: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(degree + 1);
    let mut cur = 1.0;
    a.push(cur);
    for n in 1..=degree {
        cur *= (PI / n as f64).sqrt();
        a.push(cur);
    }
    a
}

impl EntireFn {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("coeffs", "need at least one coefficient"));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("entire function coefficients"));
        }
        Ok(EntireFn { coeffs })
    }

    /// The constant function 1.
    pub fn one() -> Self {
        EntireFn {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// The basis function `e_n`.
    pub fn basis(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        EntireFn { coeffs }
    }

    /// `e^{π w ξ̄}` truncated to `degree`; its coefficients are
    /// `(√π ξ̄)^n / √(n!)`.
    pub fn kernel(xi: Complex64, degree: usize) -> Self {
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut cur = Complex64::new(1.0, 0.0);
        let base = xi.conj() * PI.sqrt();
        coeffs.push(cur);
        for n in 1..=degree {
            cur = cur * base / (n as f64).sqrt();
            coeffs.push(cur);
        }
        EntireFn { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `‖F‖_{F²}` from the coefficients (the basis is orthonormal).
    pub fn l2_norm(&self) -> f64 {
        par::tree_sum(self.coeffs.len(), |n| self.coeffs[n].norm_sqr()).sqrt()
    }

    /// Upper bound of `|F|` on the circle `|z| = r`.
    fn majorant(&self, a: &[f64], r: f64) -> f64 {
        let mut acc = 0.0;
        for (c, an) in self.coeffs.iter().zip(a).rev() {
            acc = acc * r + c.norm() * an;
        }
        acc
    }
}

/// `Σ c_n (π^n/n!)^{1/2} z^n`, by Horner's rule.
pub fn eval_entire(f: &EntireFn, z: Complex64) -> Result<Complex64> {
    let a = basis_scales(f.degree());
    eval_with(f, &a, z)
}

fn eval_with(f: &EntireFn, a: &[f64], z: Complex64) -> Result<Complex64> {
    let lz = z.norm().ln();
    for (n, (c, an)) in f.coeffs.iter().zip(a).enumerate() {
        let cn = c.norm();
        if cn > 0.0 && n > 0 && (cn * an).ln() + n as f64 * lz > LOG_OVERFLOW {
            return Err(Error::Overflow { modulus: z.norm() });
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, an) in f.coeffs.iter().zip(a).rev() {
        acc = acc * z + c * an;
    }
    Ok(acc)
}

/// Polar product grid: composite Gauss–Legendre in `r` on `[0, r_max]`
/// (panels of 8 nodes) and uniform `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FockGridDef", into = "FockGridDef")]
pub struct FockGrid {
    r_max: f64,
    r_count: usize,
    theta_count: usize,
    r_nodes: Vec<f64>,
    r_weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FockGridDef {
    #[serde(default = "default_r_max")]
    r_max: f64,
    #[serde(default = "default_r_count")]
    r_count: usize,
    #[serde(default = "default_theta_count")]
    theta_count: usize,
}

fn default_r_max() -> f64 {
    4.0
}
fn default_r_count() -> usize {
    512
}
fn default_theta_count() -> usize {
    256
}

impl TryFrom<FockGridDef> for FockGrid {
    type Error = Error;
    fn try_from(d: FockGridDef) -> Result<Self> {
        FockGrid::new(d.r_max, d.r_count, d.theta_count)
    }
}

impl From<FockGrid> for FockGridDef {
    fn from(g: FockGrid) -> Self {
        FockGridDef {
            r_max: g.r_max,
            r_count: g.r_count,
            theta_count: g.theta_count,
        }
    }
}

impl Default for FockGrid {
    fn default() -> Self {
        FockGrid::new(default_r_max(), default_r_count(), default_theta_count()).expect("valid defaults")
    }
}

/// Composite Gauss–Legendre nodes and weights on `[lo, hi]`.
fn panels(lo: f64, hi: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(PANEL);
    let h = (hi - lo) / count as f64;
    let mut nodes = Vec::with_capacity(count * PANEL);
    let mut weights = Vec::with_capacity(count * PANEL);
    for p in 0..count {
        let a = lo + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(a + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

impl FockGrid {
    pub fn new(r_max: f64, r_count: usize, theta_count: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("Fock grid radius must be positive, got {r_max}")));
        }
        if r_count < PANEL || !r_count.is_multiple_of(PANEL) || theta_count < 8 {
            return Err(Error::InvalidGrid(format!(
                "Fock grid needs r_count a positive multiple of {PANEL} and theta_count ≥ 8 \
                 (got {r_count}, {theta_count})"
            )));
        }
        let (r_nodes, r_weights) = panels(0.0, r_max, r_count / PANEL);
        Ok(FockGrid {
            r_max,
            r_count,
            theta_count,
            r_nodes,
            r_weights,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn r_count(&self) -> usize {
        self.r_count
    }
    pub fn theta_count(&self) -> usize {
        self.theta_count
    }
    pub fn r(&self, i: usize) -> f64 {
        self.r_nodes[i]
    }
    /// Quadrature weight of the radial node (without the Jacobian `r`).
    pub fn r_weight(&self, i: usize) -> f64 {
        self.r_weights[i]
    }
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.theta_count as f64
    }
    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }
    pub fn z(&self, j: usize, i: usize) -> Complex64 {
        Complex64::from_polar(self.r(i), self.theta(j))
    }
}

/// Samples of `F(z) e^{-π|z|²/2}` on the polar grid (axis 0 = θ, axis 1 = r).
///
/// Up to a unimodular factor these are the representation coefficients
/// `⟨F, β(z, τ) 1⟩`, and their flat `L^p` norm is the Fock `p`-norm.
pub fn fock_field(f: &EntireFn, grid: &FockGrid) -> Result<CoefField> {
    let a = basis_scales(f.degree());
    let (nt, nr) = (grid.theta_count, grid.r_count);
    let flat = par::try_map_indexed(nt * nr, |idx| {
        let (j, i) = (idx / nr, idx % nr);
        let r = grid.r(i);
        Ok::<_, Error>(eval_with(f, &a, grid.z(j, i))? * (-PI * r * r / 2.0).exp())
    })?;
    let values = Array2::from_shape_vec((nt, nr), flat).expect("shape matches grid");
    CoefField::new(FieldGrid::Fock(grid.clone()), values)
}

/// Relative size of `∫_{|z|>r_max} |F|^p e^{-pπ|z|²/2}` with respect to the
/// full integral, bounded through the radial majorant of `|F|`.
fn tail_ratio(f: &EntireFn, p: f64, grid: &FockGrid, total: f64) -> f64 {
    let a = basis_scales(f.degree());
    let integrand = |r: f64| 2.0 * PI * r * (f.majorant(&a, r).ln() * p - p * PI * r * r / 2.0).exp();
    let peak = (f.degree() as f64 / PI).sqrt();
    let mut tail = 0.0;
    let mut lo = grid.r_max;
    loop {
        let hi = lo + 0.5;
        let (nodes, weights) = panels(lo, hi, 1);
        tail += nodes.iter().zip(&weights).map(|(r, w)| w * integrand(*r)).sum::<f64>();
        lo = hi;
        if lo > peak + 1.0 && integrand(lo) * 0.5 <= 1e-18 * (total + tail) {
            break;
        }
        if lo > grid.r_max + 200.0 {
            break;
        }
    }
    if total == 0.0 {
        if tail == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        tail / total
    }
}

/// `(∫ |F(z)|^p e^{-pπ|z|²/2} dz)^{1/p}` by polar quadrature.
pub fn fock_norm(f: &EntireFn, p: f64, grid: &FockGrid) -> Result<f64> {
    crate::signal::check_exponent("p", p)?;
    if f.coeffs.iter().all(|c| c.norm() == 0.0) {
        return Ok(0.0);
    }
    let field = fock_field(f, grid)?;
    let total = lp_field(&field, p);
    let tail = tail_ratio(f, p, grid, total);
    if tail > 1e-9 {
        return Err(Error::QuadratureTail { tail, tolerance: 1e-9 });
    }
    Ok(total.powf(1.0 / p))
}

/// `Σ |C|^p · cell_measure` (no root).
fn lp_field(c: &CoefField, p: f64) -> f64 {
    let (n0, n1) = c.grid().shape();
    let v = c.values();
    let g = c.grid();
    par::tree_sum(n0 * n1, |idx| {
        let (i0, i1) = (idx / n1, idx % n1);
        v[[i0, i1]].norm().powf(p) * g.cell_measure(i0, i1)
    })
}

/// `⟨F, G⟩ = ∫ F(z) conj(G(z)) e^{-π|z|²} dz` by polar quadrature.
pub fn fock_inner(f: &EntireFn, g: &EntireFn, grid: &FockGrid) -> Result<Complex64> {
    let a = fock_field(f, grid)?;
    let b = fock_field(g, grid)?;
    let (n0, n1) = grid_shape(grid);
    let (av, bv) = (a.values(), b.values());
    let term = |idx: usize| {
        let (i0, i1) = (idx / n1, idx % n1);
        av[[i0, i1]] * bv[[i0, i1]].conj() * a.grid().cell_measure(i0, i1)
    };
    Ok(Complex64::new(
        par::tree_sum(n0 * n1, |i| term(i).re),
        par::tree_sum(n0 * n1, |i| term(i).im),
    ))
}

fn grid_shape(grid: &FockGrid) -> (usize, usize) {
    (grid.theta_count, grid.r_count)
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// Basis coefficients of `β(z, τ) F` for indices `0..=degree`.
fn beta_coeffs(f: &EntireFn, z: Complex64, tau: Complex64, degree: usize) -> Vec<Complex64> {
    let a = basis_scales(degree.max(f.degree()));
    // Monomial coefficients of F(w - z).
    let nf = f.degree();
    let mut shifted = vec![Complex64::new(0.0, 0.0); nf + 1];
    for (n, c) in f.coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let binom = binomial_row(n);
        let cn = c * a[n];
        let mut pow = Complex64::new(1.0, 0.0);
        for m in (0..=n).rev() {
            shifted[m] += cn * binom[m] * pow;
            pow *= -z;
        }
    }
    // Multiply by e^{π w z̄} and convert monomials back to the basis,
    // keeping the factor 1/a_m folded into the exponential series:
    // (π z̄)^k / k! / a_m with m = k + l.
    let scale = tau * (-PI * z.norm_sqr() / 2.0).exp();
    let w = z.conj() * PI;
    let mut out = Vec::with_capacity(degree + 1);
    for m in 0..=degree {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, p) in shifted.iter().enumerate().take(m + 1) {
            let k = m - l;
            // (π z̄)^k / (k! a_m), computed in logs for stability.
            let mag = if w.norm() == 0.0 {
                if k == 0 {
                    1.0 / a[m]
                } else {
                    0.0
                }
            } else {
                (k as f64 * w.norm().ln() - ln_factorial(k) - 0.5 * (m as f64 * PI.ln() - ln_factorial(m))).exp()
            };
            acc += p * Complex64::from_polar(mag, k as f64 * w.arg());
        }
        out.push(acc * scale);
    }
    out
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `β(z, τ) F` truncated to `degree`.
///
/// Errors when the discarded coefficients carry more than 1e-6 of the
/// F² norm of the result.
pub fn beta_shift(f: &EntireFn, z: Complex64, tau: Complex64, degree: usize) -> Result<EntireFn> {
    if degree < f.degree() {
        return Err(Error::param(
            "degree",
            format!("must be at least the input degree {}", f.degree()),
        ));
    }
    if (tau.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::param("tau", "must be unimodular"));
    }
    let extra = degree.max(32);
    let all = beta_coeffs(f, z, tau, degree + extra);
    let kept = &all[..=degree];
    let dropped = &all[degree + 1..];
    let mut tail: f64 = dropped.iter().map(|c| c.norm_sqr()).sum();
    // Geometric bound for what lies beyond the extended window.
    let (p, q) = (dropped[dropped.len() - 2].norm(), dropped[dropped.len() - 1].norm());
    if p > 0.0 {
        let ratio = q / p;
        tail += if ratio < 1.0 {
            q * q * ratio * ratio / (1.0 - ratio * ratio)
        } else {
            f64::INFINITY
        };
    }
    let norm = f.l2_norm().max(f64::MIN_POSITIVE);
    let estimate = tail.sqrt() / norm;
    if estimate > 1e-6 {
        return Err(Error::Truncation {
            estimate,
            tolerance: 1e-6,
        });
    }
    EntireFn::new(kept.to_vec())
}

/// `|⟨F, β(z, τ) 1⟩| = |F(z)| e^{-π|z|²/2}`.
pub fn fock_rep_coeff(f: &EntireFn, z: Complex64) -> Result<f64> {
    Ok(eval_entire(f, z)?.norm() * (-PI * z.norm_sqr() / 2.0).exp())
}
