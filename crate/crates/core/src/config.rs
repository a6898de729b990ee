//! Run configuration and the artifact writers shared by the command-line
//! front end and the tests.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::bargmann::fock_norm;
use crate::error::{Error, Result};
use crate::family::{Family, FamilySpec, MemberData, TransformSpec};
use crate::json::write_json;
use crate::norms::{besov_from_field, mixed_norm, NormSpec, WeightSpec};
use crate::par;
use crate::region::RegionFamily;
use crate::tightness::{diagnose, DiagnoseSettings, TightnessReport};

/// Everything one command needs.
///
/// ```json
/// {
///   "family": {"label": "g", "members": [{"signal": {"kind": "gaussian"}}]},
///   "transform": {"kind": "stft",
///                 "time": {"half_width": 8, "step": 0.03125},
///                 "grid": {"x_half_width": 6, "x_step": 0.125,
///                          "omega_half_width": 6, "omega_step": 0.125}},
///   "norm": {"p": 2, "q": 2},
///   "region": {"kind": "tf_ball", "radii": {"start": 0.25, "stop": 6, "step": 0.25}},
///   "diagnose": {"epsilon": 0.01}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    pub transform: TransformSpec,
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionFamily>,
    #[serde(default)]
    pub diagnose: DiagnoseSettings,
}

impl RunConfig {
    /// Makes relative sample-file paths relative to `dir` (the config's directory).
    pub fn resolve_paths(&mut self, dir: &Path) {
        self.family.resolve_paths(dir);
        self.transform.resolve_paths(dir);
    }

    pub fn build_family(&self) -> Result<Family> {
        self.family.build(self.transform.time_grid())
    }
}

/// Member labels paired with their norms, serialized as an ordered map.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTable(pub Vec<(String, f64)>);

impl Serialize for NormTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// Norm of every member in the configured norm.
///
/// STFT fields give modulation norms, wavelet fields with a `scale_power`
/// weight give Besov norms (with the scale-range check), and Fock members
/// with a constant weight and `p = q` give the Fock-space norm.
pub fn norm_table(cfg: &RunConfig) -> Result<NormTable> {
    cfg.norm.validate()?;
    let family = cfg.build_family()?;
    if family.members.is_empty() {
        return Ok(NormTable(Vec::new()));
    }
    let transform = cfg.transform.prepare()?;
    let norm = cfg.norm;
    let values = par::try_map_indexed(family.members.len(), |i| {
        let member = &family.members[i];
        match (&cfg.transform, &member.data, norm.weight) {
            (TransformSpec::Fock { grid }, MemberData::Entire(f), WeightSpec::Constant) if norm.p == norm.q => {
                fock_norm(f, norm.p, grid)
            }
            (TransformSpec::Cwt { .. }, _, WeightSpec::ScalePower { .. }) => {
                besov_from_field(&transform.apply(member)?, &norm)
            }
            _ => mixed_norm(&transform.apply(member)?, &norm),
        }
    })?;
    Ok(NormTable(
        family.members.iter().map(|m| m.label.clone()).zip(values).collect(),
    ))
}

/// Runs [`diagnose`] with the configured region.
pub fn diagnose_report(cfg: &RunConfig) -> Result<TightnessReport> {
    let region = cfg
        .region
        .as_ref()
        .ok_or_else(|| Error::param("region", "diagnose needs a region family"))?;
    let family = cfg.build_family()?;
    diagnose(&family, &cfg.transform, &cfg.norm, region, &cfg.diagnose)
}

/// File-name-safe version of a member label.
fn file_stem(i: usize, label: &str) -> String {
    let clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{i:03}_{}", clean.trim_matches('_'))
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

/// Writes one coefficient CSV per member; returns the paths in member order.
pub fn run_transform(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let family = cfg.build_family()?;
    let transform = cfg.transform.prepare()?;
    let fields = par::try_map_indexed(family.members.len(), |i| transform.apply(&family.members[i]))?;
    std::fs::create_dir_all(out)?;
    let mut paths = Vec::with_capacity(fields.len());
    for (i, (m, field)) in family.members.iter().zip(&fields).enumerate() {
        let (path, mut w) = create(out, &format!("{}.csv", file_stem(i, &m.label)))?;
        field.write_csv(&mut w)?;
        std::io::Write::flush(&mut w)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes `norms.json`.
pub fn run_norm(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let table = norm_table(cfg)?;
    let (path, mut w) = create(out, "norms.json")?;
    write_json(&mut w, &table)?;
    std::io::Write::flush(&mut w)?;
    Ok(path)
}

/// Writes `report.json` and `profile.csv`.
pub fn run_diagnose(cfg: &RunConfig, out: &Path) -> Result<(PathBuf, PathBuf)> {
    let report = diagnose_report(cfg)?;
    let (rpath, mut w) = create(out, "report.json")?;
    write_json(&mut w, &report)?;
    std::io::Write::flush(&mut w)?;
    let (ppath, mut w) = create(out, "profile.csv")?;
    report.profile_data.write_csv(&mut w)?;
    std::io::Write::flush(&mut w)?;
    Ok((rpath, ppath))
}
