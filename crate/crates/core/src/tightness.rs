//! Tail norms over complements of nested regions, tightness profiles of
//! finite families, the classical Weil moduli, greedy ε-nets, and a report
//! that cross-checks the coefficient criterion against the Weil criterion.
//!
//! Every verdict here is a finite-scale diagnostic: it says whether the
//! sampled family is tight at a given `(ε, r_max)`, not whether an infinite
//! set is compact.

use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{member_difference, Family, MemberData, Transform, TransformSpec};
use crate::field::CoefField;
use crate::norms::{finish, inner_terms, modulation_norm, row_contributions, NormSpec, WeightSpec};
use crate::par;
use crate::region::{covers_all, inside_weights, time_inside_weights, Radii, RegionFamily, RegionKind};
use crate::signal::{check_exponent, lp_norm, shift_samples, Signal};

/// `1 - inside_weights`, or `None` when `U_r` covers every node.
fn complement_mask(kind: RegionKind, c: &CoefField, r: f64) -> Result<Option<Array2<f64>>> {
    let w = inside_weights(kind, c.grid(), r)?;
    if covers_all(kind, c.grid(), r) {
        return Ok(None);
    }
    Ok(Some(w.mapv(|v| 1.0 - v)))
}

/// `‖χ_{U_r^c} C‖` in the mixed norm `spec`.
///
/// The indicator is the quadrature-consistent one of
/// [`crate::region::inside_weights`]; inner sums are clamped at zero. The
/// result is exactly 0 once `U_r` contains every node of the grid.
pub fn tail_norm(c: &CoefField, spec: &NormSpec, kind: RegionKind, r: f64) -> Result<f64> {
    let terms = inner_terms(c, spec)?;
    match complement_mask(kind, c, r)? {
        None => Ok(0.0),
        Some(mask) => Ok(finish(&row_contributions(c.grid(), &terms, Some(&mask), spec), spec.q)),
    }
}

/// `ε(r) = max_f tail_norm(f, r)` at the listed radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub radii: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Profile {
    pub fn pairs(&self) -> Vec<[f64; 2]> {
        self.radii.iter().zip(&self.eps).map(|(r, e)| [*r, *e]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,eps")?;
        for (r, e) in self.radii.iter().zip(&self.eps) {
            writeln!(w, "{r:.16e},{e:.16e}")?;
        }
        Ok(())
    }
}

/// Profile over precomputed member fields (all on the same grid).
///
/// Discretization can make a member's tail wiggle by rounding-level
/// amounts; the reported profile is made non-increasing by taking running
/// maxima from the outermost radius inwards, which only ever enlarges it.
pub fn profile_of_fields(fields: &[CoefField], spec: &NormSpec, region: &RegionFamily) -> Result<Profile> {
    let radii = region.radii().to_vec();
    let mut eps = vec![0.0; radii.len()];
    if let Some(first) = fields.first() {
        let grid = first.grid();
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch("family members have different coefficient grids".into()));
        }
        let terms = fields.iter().map(|f| inner_terms(f, spec)).collect::<Result<Vec<_>>>()?;
        let masks = par::try_map_indexed(radii.len(), |i| complement_mask(region.kind(), first, radii[i]))?;
        let jobs = radii.len() * fields.len();
        let tails = par::map_indexed(jobs, |idx| {
            let (i, m) = (idx / fields.len(), idx % fields.len());
            match &masks[i] {
                None => 0.0,
                Some(mask) => finish(&row_contributions(grid, &terms[m], Some(mask), spec), spec.q),
            }
        });
        for (i, e) in eps.iter_mut().enumerate() {
            *e = tails[i * fields.len()..(i + 1) * fields.len()].iter().fold(0.0, |a: f64, b| a.max(*b));
        }
    }
    for i in (0..eps.len().saturating_sub(1)).rev() {
        eps[i] = eps[i].max(eps[i + 1]);
    }
    Ok(Profile { radii, eps })
}

/// Transforms every member and computes its tightness profile.
pub fn tightness_profile(
    family: &Family,
    transform: &Transform,
    spec: &NormSpec,
    region: &RegionFamily,
) -> Result<Profile> {
    let fields = par::try_map_indexed(family.members.len(), |i| transform.apply(&family.members[i]))?;
    profile_of_fields(&fields, spec, region)
}

/// Smallest listed radius with `ε(r) < eps`.
///
/// `eps = 0` can never be met strictly and yields `None`.
pub fn tight_radius(profile: &Profile, eps: f64) -> Result<Option<f64>> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::param("epsilon", format!("must be finite and non-negative, got {eps}")));
    }
    Ok(profile
        .radii
        .iter()
        .zip(&profile.eps)
        .find(|(_, e)| **e < eps)
        .map(|(r, _)| *r))
}

/// `‖f(· - m·step) - f‖_p` with zero fill.
fn shift_distance(f: &Signal, m: isize, p: f64) -> f64 {
    let v = f.values();
    let n = v.len() as isize;
    let s = par::tree_sum(n as usize, |k| {
        let k = k as isize;
        let src = k - m;
        let shifted = if (0..n).contains(&src) {
            v[src as usize]
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        };
        let d = (shifted - v[k as usize]).norm();
        if p == 2.0 {
            d * d
        } else {
            d.powf(p)
        }
    });
    (s * f.grid().step()).powf(1.0 / p)
}

/// `δ ↦ max_f max_{|h| ≤ δ} ‖f(· - h) - f‖_p` over lattice shifts `h`.
pub fn weil_equicontinuity(signals: &[&Signal], p: f64, deltas: &[f64]) -> Result<Vec<[f64; 2]>> {
    check_exponent("p", p)?;
    let Some(first) = signals.first() else {
        return Ok(deltas.iter().map(|d| [*d, 0.0]).collect());
    };
    let grid = *first.grid();
    for s in signals {
        grid.require_match(s.grid())?;
    }
    let steps = deltas
        .iter()
        .map(|d| {
            if *d < 0.0 {
                return Err(Error::param("deltas", format!("must be non-negative, got {d}")));
            }
            grid.steps_in(*d)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_m = steps.iter().copied().max().unwrap_or(0);
    // d[m] = max over members of the distance at shifts ±m.
    let per_shift = par::map_indexed(max_m as usize, |i| {
        let m = i as isize + 1;
        signals
            .iter()
            .map(|f| shift_distance(f, m, p).max(shift_distance(f, -m, p)))
            .fold(0.0, f64::max)
    });
    let mut running = vec![0.0f64; max_m as usize + 1];
    for m in 1..=max_m as usize {
        running[m] = running[m - 1].max(per_shift[m - 1]);
    }
    Ok(deltas.iter().zip(&steps).map(|(d, m)| [*d, running[*m as usize]]).collect())
}

/// `r ↦ max_f ‖f χ_{[-r,r]^c}‖_p`, with the quadrature-consistent indicator.
pub fn weil_tightness(signals: &[&Signal], p: f64, radii: &[f64]) -> Result<Vec<[f64; 2]>> {
    check_exponent("p", p)?;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("radius", format!("must be positive, got {r}")));
        }
        let mut worst: f64 = 0.0;
        for f in signals {
            let grid = f.grid();
            let all_inside = (0..grid.count()).all(|k| grid.t(k).abs() <= r);
            if all_inside {
                continue;
            }
            let w = time_inside_weights(grid, r);
            let v = f.values();
            let s = par::tree_sum(v.len(), |k| v[k].norm().powf(p) * (1.0 - w[k])).max(0.0);
            worst = worst.max((s * grid.step()).powf(1.0 / p));
        }
        out.push([r, worst]);
    }
    Ok(out)
}

/// Distance used by [`epsilon_net`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Metric {
    /// L² distance of signals, F² distance of entire functions.
    #[default]
    L2,
    /// Modulation-space distance `‖S_g(f - h)‖_{L^{p,q}_m}`; needs an STFT.
    Modulation { p: f64, q: f64, a: f64 },
}

/// Greedy ε-net: scan members in index order and keep a member iff it is
/// at distance ≥ ε from every member kept so far.
pub fn epsilon_net(family: &Family, eps: f64, metric: &Metric, transform: Option<&Transform>) -> Result<Vec<usize>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("epsilon", format!("must be positive, got {eps}")));
    }
    let distance = |i: usize, j: usize| -> Result<f64> {
        let diff = member_difference(&family.members[i].data, &family.members[j].data)?;
        match (metric, diff) {
            (Metric::L2, MemberData::Signal(s)) => lp_norm(&s, 2.0),
            (Metric::L2, MemberData::Entire(f)) => Ok(f.l2_norm()),
            (Metric::Modulation { p, q, a }, MemberData::Signal(s)) => match transform.map(|t| (t.spec(), t.window())) {
                Some((TransformSpec::Stft { grid, .. }, Some(g))) => modulation_norm(&s, g, *p, *q, *a, grid),
                _ => Err(Error::param("metric", "the modulation metric needs an STFT transform")),
            },
            (Metric::Modulation { .. }, MemberData::Entire(_)) => {
                Err(Error::param("metric", "the modulation metric applies to signals only"))
            }
        }
    };
    let mut net: Vec<usize> = Vec::new();
    for i in 0..family.members.len() {
        let dists = par::try_map_indexed(net.len(), |k| distance(i, net[k]))?;
        if dists.iter().all(|d| *d >= eps) {
            net.push(i);
        }
    }
    Ok(net)
}

fn default_epsilon() -> f64 {
    1e-2
}
fn default_p() -> f64 {
    2.0
}
fn default_net_epsilon() -> f64 {
    0.5
}
fn default_net_size() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeilSettings {
    #[serde(default = "default_p")]
    pub p: f64,
    /// Shift bounds δ (lattice multiples).
    pub deltas: Vec<f64>,
    /// Radii of the spatial tightness table.
    pub radii: Radii,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSettings {
    #[serde(default = "default_net_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_net_size")]
    pub max_size: usize,
}

impl Default for NetSettings {
    fn default() -> Self {
        NetSettings {
            epsilon: default_net_epsilon(),
            metric: Metric::L2,
            max_size: default_net_size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSettings {
    /// Tolerance ε₀ for the verdict flags.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Largest radius at which the family still counts as tight; defaults
    /// to the last region radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Further tolerances at which to report tight radii.
    #[serde(default)]
    pub tolerances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weil: Option<WeilSettings>,
    #[serde(default)]
    pub net: NetSettings,
}

impl Default for DiagnoseSettings {
    fn default() -> Self {
        DiagnoseSettings {
            epsilon: default_epsilon(),
            r_max: None,
            tolerances: Vec::new(),
            weil: None,
            net: NetSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightEntry {
    pub epsilon: f64,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeilReport {
    pub p: f64,
    pub equicontinuity: Vec<[f64; 2]>,
    pub tightness: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetReport {
    pub epsilon: f64,
    pub metric: Metric,
    pub members: Vec<usize>,
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flags {
    /// Coefficient tails drop below ε₀ within `r_max`.
    #[serde(rename = "STFT_TIGHT")]
    pub stft_tight: bool,
    /// Equicontinuity at the smallest positive δ and spatial tightness
    /// within `r_max`, both below ε₀. Absent for entire-function families.
    #[serde(rename = "WEIL_OK")]
    pub weil_ok: Option<bool>,
    #[serde(rename = "NET_SMALL")]
    pub net_small: bool,
    #[serde(rename = "CRITERIA_AGREE")]
    pub criteria_agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub family: String,
    pub members: usize,
    pub transform: &'static str,
    pub norm: NormSpec,
    pub region: RegionKind,
    pub epsilon: f64,
    pub r_max: f64,
    pub profile: Vec<[f64; 2]>,
    pub tight_radius: Vec<TightEntry>,
    pub weil: Option<WeilReport>,
    pub net: NetReport,
    pub flags: Flags,
    pub verdict: String,
    #[serde(skip)]
    pub profile_data: Profile,
}

/// Runs every diagnostic on a family and assembles the report.
pub fn diagnose(
    family: &Family,
    transform: &TransformSpec,
    norm: &NormSpec,
    region: &RegionFamily,
    settings: &DiagnoseSettings,
) -> Result<TightnessReport> {
    if family.members.is_empty() {
        return Err(Error::param("members", "diagnose needs at least one member"));
    }
    norm.validate()?;
    if matches!(norm.weight, WeightSpec::ScalePower { .. }) && !matches!(transform, TransformSpec::Cwt { .. }) {
        return Err(Error::param("weight", "scale_power weights need the cwt transform"));
    }
    let eps0 = settings.epsilon;
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::param("epsilon", format!("must be positive, got {eps0}")));
    }
    let r_max = settings.r_max.unwrap_or(*region.radii().last().expect("non-empty radii"));

    let prepared = transform.prepare()?;
    let profile = tightness_profile(family, &prepared, norm, region)?;

    let mut tols = vec![eps0];
    tols.extend(settings.tolerances.iter().copied().filter(|t| *t != eps0));
    let tight = tols
        .iter()
        .map(|&e| Ok(TightEntry { epsilon: e, radius: tight_radius(&profile, e)? }))
        .collect::<Result<Vec<_>>>()?;
    let stft_tight = matches!(tight[0].radius, Some(r) if r <= r_max);

    let (weil, weil_ok) = match (&settings.weil, transform) {
        (Some(w), TransformSpec::Stft { .. } | TransformSpec::Cwt { .. }) => {
            let signals = family.signals()?;
            let radii = w.radii.expand()?;
            let eq = weil_equicontinuity(&signals, w.p, &w.deltas)?;
            let sp = weil_tightness(&signals, w.p, &radii)?;
            let smallest = eq
                .iter()
                .filter(|e| e[0] > 0.0)
                .min_by(|a, b| a[0].total_cmp(&b[0]))
                .ok_or_else(|| Error::param("deltas", "need at least one positive shift bound"))?;
            let equi = smallest[1] < eps0;
            let spatial = sp.iter().any(|e| e[0] <= r_max && e[1] < eps0);
            (
                Some(WeilReport {
                    p: w.p,
                    equicontinuity: eq,
                    tightness: sp,
                }),
                Some(equi && spatial),
            )
        }
        _ => (None, None),
    };

    let net_members = epsilon_net(family, settings.net.epsilon, &settings.net.metric, Some(&prepared))?;
    let net = NetReport {
        epsilon: settings.net.epsilon,
        metric: settings.net.metric,
        size: net_members.len(),
        members: net_members,
    };
    let flags = Flags {
        stft_tight,
        weil_ok,
        net_small: net.size <= settings.net.max_size,
        criteria_agree: weil_ok.map(|w| w == stft_tight),
    };
    let verdict = format!(
        "{} at (eps = {eps0}, r_max = {r_max}) by {} coefficients{}",
        if stft_tight { "tight" } else { "not tight" },
        transform.name(),
        match flags.criteria_agree {
            Some(true) => "; Weil criteria agree",
            Some(false) => "; Weil criteria disagree",
            None => "",
        }
    );
    Ok(TightnessReport {
        family: family.label.clone(),
        members: family.members.len(),
        transform: transform.name(),
        norm: *norm,
        region: region.kind(),
        epsilon: eps0,
        r_max,
        profile: profile.pairs(),
        tight_radius: tight,
        weil,
        net,
        flags,
        verdict,
        profile_data: profile,
    })
}

/// Translates a signal by `m` lattice steps (used by covariance tests).
pub fn shift_by_steps(f: &Signal, m: isize) -> Signal {
    shift_samples(f, m)
}
