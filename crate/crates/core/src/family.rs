//! Finite function families and the transforms applied to them.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bargmann::{fock_field, EntireFn, FockGrid};
use crate::error::{Error, Result};
use crate::field::CoefField;
use crate::signal::{make_signal, normalize, Signal, SignalSpec, TimeGrid};
use crate::stft::{stft, TFGrid};
use crate::wavelet::{cwt, normalize_admissible, ScaleGrid};

/// One family member: a signal or an entire function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entire: Option<EntireFn>,
    /// Divide by the L² (or F²) norm after construction.
    #[serde(default)]
    pub normalize: bool,
}

impl MemberSpec {
    pub fn signal(spec: SignalSpec, normalize: bool) -> Self {
        MemberSpec {
            label: None,
            signal: Some(spec),
            entire: None,
            normalize,
        }
    }

    pub fn entire(f: EntireFn) -> Self {
        MemberSpec {
            label: None,
            signal: None,
            entire: Some(f),
            normalize: false,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub label: String,
    #[serde(default)]
    pub members: Vec<MemberSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MemberData {
    Signal(Signal),
    Entire(EntireFn),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub data: MemberData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub label: String,
    pub members: Vec<Member>,
}

impl Family {
    /// Member signals; errors if any member is an entire function.
    pub fn signals(&self) -> Result<Vec<&Signal>> {
        self.members
            .iter()
            .map(|m| match &m.data {
                MemberData::Signal(s) => Ok(s),
                MemberData::Entire(_) => Err(Error::param(
                    "members",
                    format!("member `{}` is an entire function, not a signal", m.label),
                )),
            })
            .collect()
    }
}

impl FamilySpec {
    pub fn new(label: impl Into<String>, members: Vec<MemberSpec>) -> Self {
        FamilySpec {
            label: label.into(),
            members,
        }
    }

    pub fn resolve_paths(&mut self, dir: &Path) {
        for m in &mut self.members {
            if let Some(s) = &mut m.signal {
                s.resolve_paths(dir);
            }
        }
    }

    /// Evaluates every member; signals need `time`.
    pub fn build(&self, time: Option<TimeGrid>) -> Result<Family> {
        let mut seen = BTreeSet::new();
        let mut members = Vec::with_capacity(self.members.len());
        for (i, m) in self.members.iter().enumerate() {
            let label = m.label.clone().unwrap_or_else(|| format!("{}[{i}]", self.label));
            if !seen.insert(label.clone()) {
                return Err(Error::param("label", format!("duplicate member label `{label}`")));
            }
            let data = match (&m.signal, &m.entire) {
                (Some(spec), None) => {
                    let grid = time.ok_or_else(|| {
                        Error::param("members", format!("signal member `{label}` needs a time grid"))
                    })?;
                    let s = make_signal(spec, grid)?;
                    MemberData::Signal(if m.normalize { normalize(&s)? } else { s })
                }
                (None, Some(f)) => {
                    let f = if m.normalize {
                        let n = f.l2_norm();
                        if n == 0.0 {
                            return Err(Error::param("entire", "cannot normalize the zero function"));
                        }
                        EntireFn::new(f.coeffs().iter().map(|c| c / n).collect())?
                    } else {
                        f.clone()
                    };
                    MemberData::Entire(f)
                }
                _ => {
                    return Err(Error::param(
                        "members",
                        format!("member `{label}` needs exactly one of `signal` and `entire`"),
                    ))
                }
            };
            members.push(Member { label, data });
        }
        Ok(Family {
            label: self.label.clone(),
            members,
        })
    }
}

fn gaussian() -> SignalSpec {
    SignalSpec::Gaussian
}

fn mexican_hat() -> SignalSpec {
    SignalSpec::MexicanHat
}

/// Which coefficient map to apply, with its grids and analyzing function.
///
/// The STFT window is used as given unless `normalize_window` is set; the
/// wavelet is always admissibility-normalized before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    Stft {
        time: TimeGrid,
        grid: TFGrid,
        #[serde(default = "gaussian")]
        window: SignalSpec,
        #[serde(default)]
        normalize_window: bool,
    },
    Cwt {
        time: TimeGrid,
        grid: ScaleGrid,
        #[serde(default = "mexican_hat")]
        wavelet: SignalSpec,
    },
    Fock {
        #[serde(default)]
        grid: FockGrid,
    },
}

impl TransformSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TransformSpec::Stft { .. } => "stft",
            TransformSpec::Cwt { .. } => "cwt",
            TransformSpec::Fock { .. } => "fock",
        }
    }

    pub fn time_grid(&self) -> Option<TimeGrid> {
        match self {
            TransformSpec::Stft { time, .. } | TransformSpec::Cwt { time, .. } => Some(*time),
            TransformSpec::Fock { .. } => None,
        }
    }

    pub fn resolve_paths(&mut self, dir: &Path) {
        match self {
            TransformSpec::Stft { window: s, .. } | TransformSpec::Cwt { wavelet: s, .. } => s.resolve_paths(dir),
            TransformSpec::Fock { .. } => {}
        }
    }

    /// Builds the analyzing function once.
    pub fn prepare(&self) -> Result<Transform> {
        let window = match self {
            TransformSpec::Stft {
                time,
                window,
                normalize_window,
                ..
            } => {
                let g = make_signal(window, *time)?;
                Some(if *normalize_window { normalize(&g)? } else { g })
            }
            TransformSpec::Cwt { time, wavelet, .. } => Some(normalize_admissible(&make_signal(wavelet, *time)?)?),
            TransformSpec::Fock { .. } => None,
        };
        Ok(Transform {
            spec: self.clone(),
            window,
        })
    }
}

/// A prepared transform.
#[derive(Debug, Clone)]
pub struct Transform {
    spec: TransformSpec,
    window: Option<Signal>,
}

impl Transform {
    pub fn spec(&self) -> &TransformSpec {
        &self.spec
    }

    /// The prepared window or wavelet (none for the Fock transform).
    pub fn window(&self) -> Option<&Signal> {
        self.window.as_ref()
    }

    pub fn apply(&self, member: &Member) -> Result<CoefField> {
        match (&self.spec, &member.data) {
            (TransformSpec::Stft { grid, .. }, MemberData::Signal(f)) => {
                stft(f, self.window.as_ref().expect("prepared window"), grid)
            }
            (TransformSpec::Cwt { grid, .. }, MemberData::Signal(f)) => {
                cwt(f, self.window.as_ref().expect("prepared wavelet"), grid)
            }
            (TransformSpec::Fock { grid }, MemberData::Entire(f)) => fock_field(f, grid),
            (spec, _) => Err(Error::param(
                "members",
                format!("member `{}` does not match the {} transform", member.label, spec.name()),
            )),
        }
    }
}

/// `a - b` for two members of the same kind (entire functions are padded
/// to the larger degree).
pub fn member_difference(a: &MemberData, b: &MemberData) -> Result<MemberData> {
    Ok(match (a, b) {
        (MemberData::Signal(x), MemberData::Signal(y)) => MemberData::Signal(x.sub(y)?),
        (MemberData::Entire(x), MemberData::Entire(y)) => {
            let n = x.coeffs().len().max(y.coeffs().len());
            let zero = Complex64::new(0.0, 0.0);
            let c = (0..n)
                .map(|i| x.coeffs().get(i).copied().unwrap_or(zero) - y.coeffs().get(i).copied().unwrap_or(zero))
                .collect();
            MemberData::Entire(EntireFn::new(c)?)
        }
        _ => return Err(Error::param("members", "cannot compare a signal with an entire function")),
    })
}
