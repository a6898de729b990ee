//! Nested compact regions `U_r` and their discrete indicator functions.
//!
//! Two indicators are provided. [`contains`] is the pointwise cell-center
//! test, used for genuine restrictions `χ_U · C`. [`inside_weights`] is a
//! quadrature-consistent indicator: the weight of node `j` is
//! `(1/h) ∫_U ℓ_j`, where `ℓ_j` is the local 8-point Lagrange cardinal
//! function of the lattice, so that `Σ_j w_j F(x_j) h` integrates the
//! interpolant of `F` over `U` exactly. This removes the O(h) error of
//! counting cells by their centers at a curved boundary.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoefField, FieldGrid};
use crate::quad::gauss_legendre;
use crate::signal::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Disk `x² + ω² ≤ r²` in the time–frequency plane.
    TfBall,
    /// Square `[-r, r]²` in the time–frequency plane.
    TfBox,
    /// `|x| ≤ r` and `1/r ≤ s ≤ r` (needs `r > 1`).
    ScaleWindow,
    /// `|z| ≤ r` in the Fock plane.
    FockDisk,
    /// `[-r, r]` on the time axis.
    TimeInterval,
}

impl RegionKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::TfBall => "tf_ball",
            RegionKind::TfBox => "tf_box",
            RegionKind::ScaleWindow => "scale_window",
            RegionKind::FockDisk => "fock_disk",
            RegionKind::TimeInterval => "time_interval",
        }
    }

    pub fn check_field(&self, grid: &FieldGrid) -> Result<()> {
        let ok = matches!(
            (self, grid),
            (RegionKind::TfBall | RegionKind::TfBox, FieldGrid::Tf(_))
                | (RegionKind::ScaleWindow, FieldGrid::Scale(_))
                | (RegionKind::FockDisk, FieldGrid::Fock(_))
        );
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleRegion {
                region: self.name(),
                field: grid.name(),
            })
        }
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        let min = if *self == RegionKind::ScaleWindow { 1.0 } else { 0.0 };
        if !(r.is_finite() && r > min) {
            return Err(Error::param(
                "radius",
                format!("{} needs a finite radius above {min}, got {r}", self.name()),
            ));
        }
        Ok(())
    }
}

/// Radii given as an explicit list or as an arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radii {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Radii {
    pub fn expand(&self) -> Result<Vec<f64>> {
        match self {
            Radii::List(v) => Ok(v.clone()),
            Radii::Range { start, stop, step } => {
                if !(step.is_finite() && *step > 0.0 && start.is_finite() && stop.is_finite()) {
                    return Err(Error::param("radii", "range needs finite bounds and a positive step"));
                }
                let n = ((stop - start) / step + 1e-9).floor();
                if !(0.0..=1e6).contains(&n) {
                    return Err(Error::param("radii", "range is empty or too long"));
                }
                Ok((0..=n as usize).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionFamilyDef", into = "RegionFamilyDef")]
pub struct RegionFamily {
    kind: RegionKind,
    radii: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionFamilyDef {
    kind: RegionKind,
    radii: Radii,
}

impl TryFrom<RegionFamilyDef> for RegionFamily {
    type Error = Error;
    fn try_from(d: RegionFamilyDef) -> Result<Self> {
        RegionFamily::new(d.kind, d.radii.expand()?)
    }
}

impl From<RegionFamily> for RegionFamilyDef {
    fn from(r: RegionFamily) -> Self {
        RegionFamilyDef {
            kind: r.kind,
            radii: Radii::List(r.radii),
        }
    }
}

impl RegionFamily {
    pub fn new(kind: RegionKind, radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::param("radii", "need at least one radius"));
        }
        for r in &radii {
            kind.check_radius(*r)?;
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("radii", "must be strictly increasing"));
        }
        Ok(RegionFamily { kind, radii })
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Cell-center membership of the node with field coordinates `(c0, c1)`.
pub fn contains(kind: RegionKind, c0: f64, c1: f64, r: f64) -> bool {
    match kind {
        RegionKind::TfBall => c0 * c0 + c1 * c1 <= r * r,
        RegionKind::TfBox => c0.abs() <= r && c1.abs() <= r,
        RegionKind::ScaleWindow => c0.abs() <= r && c1 >= 1.0 / r && c1 <= r,
        RegionKind::FockDisk => c1 <= r,
        RegionKind::TimeInterval => c0.abs() <= r,
    }
}

/// Whether every node of the grid lies in `U_r`.
pub fn covers_all(kind: RegionKind, grid: &FieldGrid, r: f64) -> bool {
    let (n0, n1) = grid.shape();
    (0..n0).all(|i0| (0..n1).all(|i1| contains(kind, grid.coord0(i0), grid.coord1(i1), r)))
}

/// `χ_{U_r} · C` (keep = true) or `χ_{U_r^c} · C`, by cell centers.
pub fn restrict(c: &CoefField, kind: RegionKind, r: f64, keep_inside: bool) -> Result<CoefField> {
    kind.check_field(c.grid())?;
    let grid = c.grid();
    let mut values = c.values().clone();
    for ((i0, i1), v) in values.indexed_iter_mut() {
        if contains(kind, grid.coord0(i0), grid.coord1(i1), r) != keep_inside {
            *v = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    CoefField::new(grid.clone(), values)
}

/// Node offsets of the local interpolation stencil on `[x_i, x_{i+1}]`.
const OFFSETS: [i32; 8] = [-3, -2, -1, 0, 1, 2, 3, 4];

struct Cardinals {
    /// Monomial coefficients of `L_o(t)`, `t ∈ [0, 1]` the position within a cell.
    poly: [[f64; 8]; 8],
    /// Coefficients of `∫_0^τ L_o(t) dt`.
    anti: [[f64; 9]; 8],
}

fn cardinals() -> &'static Cardinals {
    static C: OnceLock<Cardinals> = OnceLock::new();
    C.get_or_init(|| {
        let mut poly = [[0.0; 8]; 8];
        let mut anti = [[0.0; 9]; 8];
        for (a, &o) in OFFSETS.iter().enumerate() {
            let mut p = vec![1.0];
            let mut denom = 1.0;
            for &q in OFFSETS.iter().filter(|&&q| q != o) {
                // p(t) *= (t - q)
                let mut next = vec![0.0; p.len() + 1];
                for (k, c) in p.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * q as f64;
                }
                p = next;
                denom *= (o - q) as f64;
            }
            for k in 0..8 {
                poly[a][k] = p[k] / denom;
                anti[a][k + 1] = poly[a][k] / (k + 1) as f64;
            }
        }
        Cardinals { poly, anti }
    })
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * t + k)
}

/// Uniform lattice `origin + j·step`, `j = 0..count`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct UniformAxis {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformAxis {
    fn locate(&self, x: f64) -> (isize, f64) {
        let u = (x - self.origin) / self.step;
        let i = u.floor();
        (i as isize, u - i)
    }

    /// Cardinal values `ℓ_j(x)` as `(j, value)` pairs for in-range nodes.
    fn cardinal_values(&self, x: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (i, t) = self.locate(x);
        let c = cardinals();
        OFFSETS.iter().enumerate().filter_map(move |(a, &o)| {
            let j = i + o as isize;
            (0..self.count as isize)
                .contains(&j)
                .then(|| (j as usize, horner(&c.poly[a], t)))
        })
    }

    /// `(1/h) ∫_a^b ℓ_j(x) dx` for every node `j`.
    pub fn interval_weights(&self, a: f64, b: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.count];
        if !(b > a) {
            return w;
        }
        let c = cardinals();
        let (ia, ta) = self.locate(a);
        let (ib, tb) = self.locate(b);
        let lo = ia.max(-5);
        let hi = ib.min(self.count as isize + 4);
        for i in lo..=hi {
            let t0 = if i == ia { ta } else { 0.0 };
            let t1 = if i == ib { tb } else { 1.0 };
            if t1 <= t0 {
                continue;
            }
            for (k, &o) in OFFSETS.iter().enumerate() {
                let j = i + o as isize;
                if (0..self.count as isize).contains(&j) {
                    w[j as usize] += horner(&c.anti[k], t1) - horner(&c.anti[k], t0);
                }
            }
        }
        w
    }

    fn node(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }
}

fn outer(a: &[f64], b: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j])
}

/// Gauss–Legendre points per smooth piece of the disk integral.
const DISK_POINTS: usize = 12;

/// `(1/(h_x h_y)) ∫∫_{x²+y²≤r²} ℓ_j(x) ℓ_k(y)`.
///
/// With `x = r sin θ` the inner integral over `|y| ≤ r cos θ` is a
/// piecewise polynomial in `cos θ`; the θ range is split wherever `x` or
/// `±r cos θ` crosses a lattice node, and each piece is integrated by
/// Gauss–Legendre.
fn disk_weights(ax: &UniformAxis, ay: &UniformAxis, r: f64) -> Array2<f64> {
    let mut breaks = vec![-FRAC_PI_2, FRAC_PI_2];
    for j in 0..ax.count {
        let x = ax.node(j);
        if x.abs() < r {
            breaks.push((x / r).asin());
        }
    }
    for k in 0..ay.count {
        let y = ay.node(k).abs();
        if y < r && y > 0.0 {
            let t = (y / r).acos();
            breaks.push(t);
            breaks.push(-t);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let (gx, gw) = gauss_legendre(DISK_POINTS);
    let mut w = Array2::zeros((ax.count, ay.count));
    for piece in breaks.windows(2) {
        let (t0, t1) = (piece[0], piece[1]);
        let half = 0.5 * (t1 - t0);
        for (u, wq) in gx.iter().zip(&gw) {
            let theta = t0 + half * (u + 1.0);
            let (s, c) = theta.sin_cos();
            let (x, a) = (r * s, r * c);
            let jac = wq * half * a / ax.step;
            let inner = ay.interval_weights(-a, a);
            for (j, lj) in ax.cardinal_values(x) {
                let f = jac * lj;
                for (k, v) in inner.iter().enumerate() {
                    if *v != 0.0 {
                        w[[j, k]] += f * v;
                    }
                }
            }
        }
    }
    w
}

/// Radial inside-weights for composite Gauss–Legendre nodes on `[0, r_max]`.
fn radial_weights(grid: &crate::bargmann::FockGrid, radius: f64) -> Vec<f64> {
    const PANEL: usize = 8;
    let n = grid.r_count();
    let panels = n / PANEL;
    let h = grid.r_max() / panels as f64;
    let (gx, gw) = gauss_legendre(PANEL);
    let mut w = vec![0.0; n];
    for p in 0..panels {
        let (lo, hi) = (p as f64 * h, (p + 1) as f64 * h);
        let idx = p * PANEL..(p + 1) * PANEL;
        if radius >= hi {
            w[idx].iter_mut().for_each(|v| *v = 1.0);
        } else if radius > lo {
            let nodes: Vec<f64> = idx.clone().map(|i| grid.r(i)).collect();
            let half = 0.5 * (radius - lo);
            for (a, i) in idx.enumerate() {
                // ∫_lo^radius ℓ_a, exact for the degree-7 cardinal polynomial.
                let integral: f64 = gx
                    .iter()
                    .zip(&gw)
                    .map(|(u, wq)| {
                        let y = lo + half * (u + 1.0);
                        let l: f64 = (0..PANEL)
                            .filter(|&b| b != a)
                            .map(|b| (y - nodes[b]) / (nodes[a] - nodes[b]))
                            .product();
                        wq * half * l
                    })
                    .sum();
                w[i] = integral / grid.r_weight(i);
            }
        }
    }
    w
}

/// Quadrature-consistent indicator of `U_r` on the field grid.
pub fn inside_weights(kind: RegionKind, grid: &FieldGrid, r: f64) -> Result<Array2<f64>> {
    kind.check_field(grid)?;
    kind.check_radius(r)?;
    Ok(match grid {
        FieldGrid::Tf(g) => {
            let ax = UniformAxis {
                origin: g.x(0),
                step: g.x_step(),
                count: g.x_count(),
            };
            let ay = UniformAxis {
                origin: g.omega(0),
                step: g.omega_step(),
                count: g.omega_count(),
            };
            match kind {
                RegionKind::TfBox => outer(&ax.interval_weights(-r, r), &ay.interval_weights(-r, r)),
                _ => disk_weights(&ax, &ay, r),
            }
        }
        FieldGrid::Scale(g) => {
            let ax = UniformAxis {
                origin: g.x(0),
                step: g.x_step(),
                count: g.x_count(),
            };
            // Scales are uniform in u = ln s.
            let au = UniformAxis {
                origin: g.s_min().ln(),
                step: g.log_ratio(),
                count: g.s_count(),
            };
            outer(&ax.interval_weights(-r, r), &au.interval_weights(-r.ln(), r.ln()))
        }
        FieldGrid::Fock(g) => {
            let radial = radial_weights(g, r);
            Array2::from_shape_fn((g.theta_count(), g.r_count()), |(_, i)| radial[i])
        }
    })
}

/// Quadrature-consistent indicator of `[-r, r]` on the time lattice.
pub fn time_inside_weights(grid: &TimeGrid, r: f64) -> Vec<f64> {
    let axis = UniformAxis {
        origin: grid.t(0),
        step: grid.step(),
        count: grid.count(),
    };
    axis.interval_weights(-r, r)
}
