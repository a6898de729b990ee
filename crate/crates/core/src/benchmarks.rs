//! Built-in benchmark families.
//!
//! Each benchmark is a complete [`RunConfig`] whose grids are chosen so
//! that the Weil moduli are resolved at the default tolerance `ε₀ = 1e-2`:
//! the smallest shift must be fine enough that a fixed Schwartz function
//! moves by less than ε₀, and the time and coefficient grids must hold
//! every member.

use num_complex::Complex64;

use crate::bargmann::{beta_shift, EntireFn, FockGrid};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::family::{FamilySpec, MemberSpec, TransformSpec};
use crate::norms::NormSpec;
use crate::region::{RegionFamily, RegionKind, Radii};
use crate::signal::{SignalSpec, TimeGrid};
use crate::stft::TFGrid;
use crate::tightness::{DiagnoseSettings, NetSettings, WeilSettings};

pub const NAMES: [&str; 5] = ["hermite", "translates", "modulates", "dilates", "fock"];

/// Tolerance of the verdict flags.
pub const EPSILON: f64 = 1e-2;
/// Largest radius at which a benchmark family still counts as tight.
pub const R_MAX: f64 = 6.0;

/// Coefficient degree of the Fock benchmark members.
pub const FOCK_DEGREE: usize = 80;

fn radii(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    Radii::Range { start, stop, step }.expand()
}

fn settings(step: f64, half_width: f64) -> DiagnoseSettings {
    DiagnoseSettings {
        epsilon: EPSILON,
        r_max: Some(R_MAX),
        tolerances: vec![1e-1, 1e-3],
        weil: Some(WeilSettings {
            p: 2.0,
            deltas: [0.0, 1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|m| m * step).collect(),
            radii: Radii::Range {
                start: 0.5,
                stop: half_width,
                step: 0.5,
            },
        }),
        net: NetSettings::default(),
    }
}

fn tf_config(label: &str, members: Vec<MemberSpec>, time: TimeGrid, grid: TFGrid) -> Result<RunConfig> {
    let reach = grid.x_half_width().max(grid.omega_half_width());
    Ok(RunConfig {
        family: FamilySpec::new(label, members),
        transform: TransformSpec::Stft {
            time,
            grid,
            window: SignalSpec::Gaussian,
            normalize_window: true,
        },
        norm: NormSpec::l2(),
        region: Some(RegionFamily::new(RegionKind::TfBox, radii(0.125, reach, 0.125)?)?),
        diagnose: settings(time.step(), time.half_width()),
    })
}

/// `{h_0, …, h_4}`, normalized Hermite functions: tight, and Weil-compact.
pub fn hermite() -> Result<RunConfig> {
    let members = (0..5)
        .map(|n| MemberSpec::signal(SignalSpec::Hermite { n }, true).labeled(format!("h{n}")))
        .collect();
    tf_config(
        "hermite",
        members,
        TimeGrid::new(8.0, 1.0 / 1024.0)?,
        TFGrid::new(6.0, 0.125, 6.0, 0.125)?,
    )
}

/// Normalized Gaussians translated by `0, 2, …, 2(count - 1)`.
pub fn translates_with(count: usize) -> Result<RunConfig> {
    let members = (0..count)
        .map(|k| {
            let x0 = 2.0 * k as f64;
            MemberSpec::signal(SignalSpec::Gaussian.translate(x0), true).labeled(format!("T{x0}"))
        })
        .collect();
    tf_config(
        "translates",
        members,
        TimeGrid::new(32.0, 1.0 / 256.0)?,
        TFGrid::new(24.0, 0.125, 8.0, 0.125)?,
    )
}

/// Ten translates `T_{2k} φ`: coefficient mass escapes along x.
pub fn translates() -> Result<RunConfig> {
    translates_with(10)
}

/// Ten modulates `M_{2k} φ`: coefficient mass escapes along ω.
pub fn modulates() -> Result<RunConfig> {
    let members = (0..10)
        .map(|k| {
            let w = 2.0 * k as f64;
            MemberSpec::signal(SignalSpec::Gaussian.modulate(w), true).labeled(format!("M{w}"))
        })
        .collect();
    tf_config(
        "modulates",
        members,
        TimeGrid::new(8.0, 1.0 / 64.0)?,
        TFGrid::new(6.0, 0.125, 24.0, 0.125)?,
    )
}

/// Dilates `D_{2^k} φ`, `k = -3..3`: mass escapes along both axes.
pub fn dilates() -> Result<RunConfig> {
    let members = (-3..=3)
        .map(|k| {
            let s = 2f64.powi(k);
            MemberSpec::signal(SignalSpec::Gaussian.dilate(s), true).labeled(format!("D{s}"))
        })
        .collect();
    tf_config(
        "dilates",
        members,
        TimeGrid::new(32.0, 1.0 / 64.0)?,
        TFGrid::new(24.0, 0.125, 24.0, 0.125)?,
    )
}

/// `β(x_k) 𝟏` for `x_k = 0, 0.5, …, 2.5`: shifted normalized kernels.
pub fn fock() -> Result<RunConfig> {
    let members = (0..6)
        .map(|k| {
            let x = 0.5 * k as f64;
            let f = beta_shift(&EntireFn::one(), Complex64::new(x, 0.0), Complex64::new(1.0, 0.0), FOCK_DEGREE)?;
            Ok(MemberSpec::entire(f).labeled(format!("beta{x}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunConfig {
        family: FamilySpec::new("fock", members),
        transform: TransformSpec::Fock {
            grid: FockGrid::new(8.0, 512, 256)?,
        },
        norm: NormSpec::l2(),
        region: Some(RegionFamily::new(RegionKind::FockDisk, radii(0.125, 8.0, 0.125)?)?),
        diagnose: DiagnoseSettings {
            epsilon: EPSILON,
            r_max: Some(R_MAX),
            tolerances: vec![1e-1, 1e-3],
            weil: None,
            net: NetSettings::default(),
        },
    })
}

pub fn by_name(name: &str) -> Result<RunConfig> {
    match name {
        "hermite" => hermite(),
        "translates" => translates(),
        "modulates" => modulates(),
        "dilates" => dilates(),
        "fock" => fock(),
        other => Err(Error::param(
            "benchmark",
            format!("unknown benchmark `{other}` (expected one of {})", NAMES.join(", ")),
        )),
    }
}
