//! Run configuration: the curve, the grid, the twist `ℓ` and the test forms.
//!
//! ```
//! use hodge_curves::config::RunConfig;
//!
//! let text = r#"{
//!   "schema": 1,
//!   "curve": { "polynomial": [[3,0,0,1,0],[0,3,0,1,0],[0,0,3,1,0]] },
//!   "forms": ["omega_bar 1", "dbar_of bump(0.3+0.2i, 0.4)"]
//! }"#;
//! let cfg = RunConfig::from_json(text).unwrap();
//! assert_eq!(cfg.forms.len(), 2);
//! assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
//! ```

use crate::curve::{Chart, CurvePoint, CurveSpec};
use crate::error::{Error, Result};
use crate::fields::{bump_profile, reframe, ChartBump, ConjAdjoint, DbarOf, FormRef, FormSum, FsForm, FsRational, Global, Local, Twisted};
use crate::hodge::{hol_basis, HolBasis};
use crate::poly::{cpow, Exponent};
use crate::quad::GridSpec;
use crate::{CurveContext, C64};
use serde::{Deserialize, Deserializer, Serialize};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

pub const CONFIG_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub curve: CurveSpec,
    #[serde(default)]
    pub grid: GridSpec,
    /// Twist of the data for `solve-dbar`.
    #[serde(default)]
    pub ell: i32,
    #[serde(default, deserialize_with = "forms_from_entries")]
    pub forms: Vec<FormSpec>,
    #[serde(default)]
    pub options: RunOptions,
}

/// Which solver `solve-dbar` runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    Affine,
    Compact,
    /// Both, with their agreement reported.
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Finite-difference probe count.
    pub probes: usize,
    pub fd_step: f64,
    /// Probes stay this far from branch points and nodes.
    pub probe_margin: f64,
    pub seed: u64,
    pub solver: Solver,
    /// Threshold on `‖L[φ]‖/‖φ‖` below which a form counts as exact.
    pub exactness_threshold: f64,
    /// Threshold on the finite-difference residuals.
    pub residual_threshold: f64,
    /// Threshold on the relative change of pairing vectors in `cech`.
    pub round_trip_threshold: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            probes: 16,
            fd_step: 0.01,
            probe_margin: 0.15,
            seed: 1,
            solver: Solver::Affine,
            exactness_threshold: 1e-2,
            residual_threshold: 3e-2,
            round_trip_threshold: 1e-2,
        }
    }
}

/// `c · w₁^a w̄₁^b w₂^c w̄₂^d` with `powers = [a, b, c, d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialTerm {
    pub powers: [u32; 4],
    pub coeff: C64,
}

/// A test form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FormSpec {
    /// `β(|w₁ − c|/r) Σ terms · dw̄₁` in one chart, with `w₁ = x` and `w₂ = v`.
    Monomial { chart: Chart, center: C64, radius: f64, terms: Vec<MonomialTerm> },
    /// `β(|w₁ − c|/r) dw̄₁` in one chart.
    Bump { chart: Chart, center: C64, radius: f64 },
    /// Conjugate of the `j`-th orthonormal holomorphic form, counted from 1.
    OmegaBar { j: usize },
    DbarOf { function: FunctionSpec },
    /// `h (ζ̄_i dζ̄_j − ζ̄_j dζ̄_i)/|ζ|⁴` with `h = Σ c ζ^a ζ̄^b / |ζ|^{2k}`.
    Basic { k: u32, terms: Vec<(Exponent, Exponent, C64)>, i: usize, j: usize },
    /// The form times `ζ_index^m`.
    Twisted { form: Box<FormSpec>, m: i32, index: usize },
    Sum { parts: Vec<(C64, FormSpec)> },
}

/// A function whose `∂̄` is taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Bump(ChartBump),
    /// `Σ c ζ^a ζ̄^b / |ζ|^{2k}`.
    Rational { k: u32, terms: Vec<(Exponent, Exponent, C64)> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FormEntry {
    Text(String),
    Spec(FormSpec),
}

fn forms_from_entries<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<FormSpec>, D::Error> {
    let entries = Vec::<FormEntry>::deserialize(d)?;
    entries
        .into_iter()
        .map(|e| match e {
            FormEntry::Text(s) => s.parse().map_err(serde::de::Error::custom),
            FormEntry::Spec(f) => Ok(f),
        })
        .collect()
}

fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    C64::from_str(&t).map_err(|_| Error::Config(format!("bad complex number '{s}'")))
}

fn parse_bump(s: &str) -> Result<(C64, f64)> {
    let inner = s
        .trim()
        .strip_prefix("bump(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Config(format!("expected bump(center, radius), got '{s}'")))?;
    let (c, r) = inner.split_once(',').ok_or_else(|| Error::Config(format!("expected two arguments in '{s}'")))?;
    let radius: f64 = r.trim().parse().map_err(|_| Error::Config(format!("bad radius '{r}'")))?;
    Ok((parse_complex(c)?, radius))
}

/// The short forms `omega_bar j`, `bump(c, r)` and `dbar_of bump(c, r)`, all in chart A.
impl FromStr for FormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(j) = s.strip_prefix("omega_bar") {
            let j = j.trim().parse().map_err(|_| Error::Config(format!("bad index in '{s}'")))?;
            return Ok(FormSpec::OmegaBar { j });
        }
        if let Some(rest) = s.strip_prefix("dbar_of") {
            let (center, radius) = parse_bump(rest)?;
            return Ok(FormSpec::DbarOf { function: FunctionSpec::Bump(ChartBump::new(Chart::A, center, radius)) });
        }
        if s.starts_with("bump(") {
            let (center, radius) = parse_bump(s)?;
            return Ok(FormSpec::Bump { chart: Chart::A, center, radius });
        }
        Err(Error::Config(format!("unknown form '{s}'")))
    }
}

impl RunConfig {
    pub fn new(curve: CurveSpec) -> Self {
        Self {
            schema: CONFIG_SCHEMA,
            curve,
            grid: GridSpec::default(),
            ell: 0,
            forms: Vec::new(),
            options: RunOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!("unsupported schema {}", self.schema)));
        }
        self.grid.validate()?;
        let o = &self.options;
        let pos = [o.fd_step, o.probe_margin, o.exactness_threshold, o.residual_threshold, o.round_trip_threshold];
        if pos.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Config("option tolerances must be positive".into()));
        }
        if o.probes == 0 {
            return Err(Error::Config("at least one probe is needed".into()));
        }
        self.forms.iter().try_for_each(FormSpec::validate)
    }

    /// Twist-degree pairs needing calibration constants.
    pub fn degree_ells(&self) -> Vec<(u32, i32)> {
        let d = self.curve.polynomial.degree();
        let mut out = vec![(d, 0)];
        if self.ell != 0 {
            out.push((d, self.ell));
        }
        out
    }
}

impl FormSpec {
    fn validate(&self) -> Result<()> {
        let radius_ok = |r: f64| {
            if r > 0.0 && r.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("radius {r} must be positive")))
            }
        };
        match self {
            FormSpec::Monomial { radius, .. } | FormSpec::Bump { radius, .. } => radius_ok(*radius),
            FormSpec::OmegaBar { j } if *j == 0 => Err(Error::Config("omega_bar counts from 1".into())),
            FormSpec::OmegaBar { .. } => Ok(()),
            FormSpec::DbarOf { function: FunctionSpec::Bump(b) } => radius_ok(b.radius),
            FormSpec::DbarOf { .. } => Ok(()),
            FormSpec::Basic { i, j, .. } if *i > 2 || *j > 2 || i == j => {
                Err(Error::Config(format!("basic form indices ({i}, {j})")))
            }
            FormSpec::Basic { .. } => Ok(()),
            FormSpec::Twisted { form, index, .. } => {
                if *index > 2 {
                    return Err(Error::Config(format!("coordinate index {index}")));
                }
                form.validate()
            }
            FormSpec::Sum { parts } => parts.iter().try_for_each(|(_, f)| f.validate()),
        }
    }

    fn needs_basis(&self) -> bool {
        match self {
            FormSpec::OmegaBar { .. } => true,
            FormSpec::Twisted { form, .. } => form.needs_basis(),
            FormSpec::Sum { parts } => parts.iter().any(|(_, f)| f.needs_basis()),
            _ => false,
        }
    }

    fn build_with(&self, basis: Option<&HolBasis>) -> Result<FormRef> {
        Ok(match self {
            FormSpec::Monomial { chart, center, radius, terms } => Arc::new(ChartForm {
                chart: *chart,
                center: *center,
                radius: *radius,
                terms: terms.clone(),
            }),
            FormSpec::Bump { chart, center, radius } => Arc::new(ChartForm {
                chart: *chart,
                center: *center,
                radius: *radius,
                terms: vec![MonomialTerm { powers: [0; 4], coeff: C64::new(1.0, 0.0) }],
            }),
            FormSpec::OmegaBar { j } => {
                let basis = basis.expect("basis built for omega_bar");
                let q = basis
                    .q
                    .get(j - 1)
                    .ok_or_else(|| Error::Config(format!("omega_bar {j} but the basis has {} forms", basis.len())))?;
                Arc::new(ConjAdjoint { q: q.clone(), scale: C64::new(1.0, 0.0) })
            }
            FormSpec::DbarOf { function } => match function {
                FunctionSpec::Bump(b) => Arc::new(DbarOf(Arc::new(Local(b.clone())))),
                FunctionSpec::Rational { k, terms } => {
                    Arc::new(DbarOf(Arc::new(Global(FsRational::new(*k, terms.clone())?))))
                }
            },
            FormSpec::Basic { k, terms, i, j } => {
                Arc::new(FsForm { h: FsRational::new(*k, terms.clone())?, i: *i, j: *j })
            }
            FormSpec::Twisted { form, m, index } => {
                Arc::new(Twisted { form: form.build_with(basis)?, m: *m, index: *index })
            }
            FormSpec::Sum { parts } => Arc::new(FormSum::new(
                parts.iter().map(|(c, f)| Ok((*c, f.build_with(basis)?))).collect::<Result<_>>()?,
            )?),
        })
    }
}

/// Builds the forms of a configuration on a curve.
pub fn build_forms(ctx: &CurveContext, specs: &[FormSpec]) -> Result<Vec<FormRef>> {
    let basis = if specs.iter().any(FormSpec::needs_basis) { Some(hol_basis(ctx)?) } else { None };
    specs.iter().map(|s| s.build_with(basis.as_ref())).collect()
}

/// A chart-local form `β(|x − c|/r) m(x, x̄, v, v̄) dx̄`, carried to the
/// other chart by the transition rule.
#[derive(Clone, Debug)]
struct ChartForm {
    chart: Chart,
    center: C64,
    radius: f64,
    terms: Vec<MonomialTerm>,
}

impl crate::fields::CurveForm for ChartForm {
    fn ell(&self) -> i32 {
        0
    }

    fn coeff(&self, p: &CurvePoint) -> C64 {
        let Some((q, dx)) = reframe(p, self.chart) else {
            return C64::default();
        };
        let rho = (q.x - self.center).norm() / self.radius;
        if rho >= 1.0 {
            return C64::default();
        }
        let b = bump_profile(rho).0;
        let m: C64 = self
            .terms
            .iter()
            .map(|t| {
                let [a, ab, c, cb] = t.powers;
                t.coeff * cpow(q.x, a) * cpow(q.x.conj(), ab) * cpow(q.v, c) * cpow(q.v.conj(), cb)
            })
            .sum();
        // φ_P dx̄_P = φ_O dx̄_O.
        b * m * dx.conj()
    }
}
