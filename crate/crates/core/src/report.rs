//! JSON reports and CSV dumps written by the command line tool.

use crate::affine::{AffineProbe, AffineSolveResult};
use crate::calibration::KernelCalibration;
use crate::curve::Chart;
use crate::error::{Error, Result};
use crate::hodge::{HodgeDecomposition, ProbeRow};
use crate::validate::ValidationReport;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ValidationFailure,
    AcceptanceBreach,
    CalibrationInconsistent,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Error => 1,
            Status::ValidationFailure => 2,
            Status::AcceptanceBreach => 3,
            Status::CalibrationInconsistent => 4,
        }
    }

    /// The status an error leads to.
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::InvalidPolynomial(_)
            | Error::NodeCheckFailed(_)
            | Error::UndeclaredSingularity(_)
            | Error::MultiplicityMismatch { .. }
            | Error::Config(_)
            | Error::Json(_) => Status::ValidationFailure,
            Error::CalibrationInconsistent(_) => Status::CalibrationInconsistent,
            _ => Status::Error,
        }
    }
}

/// Machine-readable form of an [`Error`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string();
        Self { kind, message: e.to_string() }
    }
}

/// A report field outside its acceptance threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breach {
    pub field: String,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    pub curve_hash: String,
    pub grid_hash: String,
    pub seed: u64,
    pub error: Option<ErrorRecord>,
    pub breaches: Vec<Breach>,
    pub result: Option<CommandResult>,
    /// Wall time; the only field that differs between identical runs.
    pub runtime_seconds: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The report without its runtime, for comparing runs.
    pub fn numerics(&self) -> Self {
        Self { runtime_seconds: 0.0, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandResult {
    Validate(ValidationReport),
    Basis(BasisReport),
    Decompose(DecompositionReport),
    SolveDbar(SolveDbarReport),
    Cech(CechReport),
    Calibrate(KernelCalibration),
    Report(Box<FullReport>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub degree: u32,
    pub arithmetic_genus: usize,
    pub geometric_genus: usize,
    pub node_count: usize,
    /// Number of orthonormal holomorphic forms.
    pub basis_size: usize,
    pub gram_condition: f64,
    /// Dualizing sections of twist 0.
    pub dualizing_sections: usize,
    /// Pairing-matrix rank of the standard residual family.
    pub pairing_rank: usize,
    pub family_size: usize,
}

/// Calibration constants a run relied on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub c_i: C64,
    pub c_i_spread: f64,
    /// Largest `C_L` cross-validation residual for this degree.
    pub c_l_cross_validation: f64,
}

impl CalibrationSummary {
    pub fn of(cal: &KernelCalibration, degree: u32) -> Result<Self> {
        use crate::calibration::ConstantKind;
        let ci = cal
            .records
            .iter()
            .find(|r| r.kind == ConstantKind::I)
            .ok_or(Error::CalibrationMissing { degree, ell: 0 })?;
        let c_l_cross_validation = cal
            .records
            .iter()
            .filter(|r| r.kind == ConstantKind::L && r.degree == degree)
            .map(|r| r.cross_validation)
            .fold(0.0, f64::max);
        Ok(Self { c_i: ci.value, c_i_spread: ci.cross_validation, c_l_cross_validation })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormDecomposition {
    pub form: usize,
    pub ell: i32,
    pub phi_norm: f64,
    pub dbar_i_norm: f64,
    pub l_norm: f64,
    pub h1_norm: f64,
    /// `‖𝓛[φ]‖/‖φ‖`.
    pub l_ratio: f64,
    pub h1_coefficients: Vec<C64>,
    pub node_coefficients: Vec<C64>,
    /// `‖φ − ∂̄𝓘[φ] − 𝓛[φ]‖/‖φ‖` at the probes.
    pub homotopy_residual: f64,
    /// `‖∂̄R₁[φ] − (φ − H₁[φ])‖/‖φ‖` at the probes.
    pub green_residual: f64,
    /// Whether `‖L[φ]‖/‖φ‖` is below the exactness threshold.
    pub exact: bool,
    pub exactness_residual: f64,
}

impl FormDecomposition {
    pub fn new(form: usize, d: &HodgeDecomposition, exactness_residual: f64, threshold: f64) -> Self {
        Self {
            form,
            ell: d.ell,
            phi_norm: d.phi_norm,
            dbar_i_norm: d.dbar_i_norm,
            l_norm: d.l_norm,
            h1_norm: d.h1_norm,
            l_ratio: if d.phi_norm > 0.0 { d.l_norm / d.phi_norm } else { 0.0 },
            h1_coefficients: d.h1_coefficients.clone(),
            node_coefficients: d.a.clone(),
            homotopy_residual: d.homotopy_residual,
            green_residual: d.green_residual,
            exact: exactness_residual <= threshold,
            exactness_residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub forms: Vec<FormDecomposition>,
    /// Pairing-matrix rank of the twist-0 forms.
    pub class_rank: usize,
    pub arithmetic_genus: usize,
    pub node_count: usize,
    /// `dim Im 𝓛 = p_a − r`.
    pub image_dimension: usize,
    pub calibration: CalibrationSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDbarReport {
    pub ell: i32,
    pub affine: Vec<AffineSolveResult>,
    pub compact: Vec<AffineSolveResult>,
    /// Spread of `g_affine − g_compact` around its mean, relative to `max |g|`.
    pub agreement: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CechRoundTrip {
    pub form: usize,
    pub terms: usize,
    pub pairing: Vec<C64>,
    pub pairing_back: Vec<C64>,
    /// `|p − p'|/|p|`, or `|p'|` scaled by the pairing bound when `p = 0`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CechReport {
    pub transitions: Vec<(f64, f64)>,
    pub round_trips: Vec<CechRoundTrip>,
    pub rank: usize,
    pub rank_back: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub validate: ValidationReport,
    pub basis: BasisReport,
    pub decompose: Option<DecompositionReport>,
    pub cech: Option<CechReport>,
    pub solve_dbar: Option<SolveDbarReport>,
}

/// Writes a report atomically.
pub fn write_report(dir: &Path, report: &Report) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.json", report.command));
    let tmp = dir.join(format!(".{}.json.tmp", report.command));
    std::fs::write(&tmp, report.to_json())?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

fn chart_name(c: Chart) -> &'static str {
    match c {
        Chart::A => "A",
        Chart::B => "B",
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Probe rows of one decomposition.
pub fn dump_probes(path: &Path, rows: &[ProbeRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "chart", "x_re", "x_im", "v_re", "v_im", "phi_re", "phi_im", "primitive_re", "primitive_im", "dbar_primitive_re",
        "dbar_primitive_im", "l_re", "l_im", "h1_re", "h1_im", "green_re", "green_im", "dbar_green_re", "dbar_green_im",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![chart_name(r.chart).to_string()];
        for z in [r.x, r.v, r.phi, r.primitive, r.dbar_primitive, r.cal_l, r.h1, r.green, r.dbar_green] {
            rec.push(z.re.to_string());
            rec.push(z.im.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Probe rows of one affine solve.
pub fn dump_affine(path: &Path, rows: &[AffineProbe]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["chart", "x_re", "x_im", "v_re", "v_im", "g_re", "g_im", "dbar_g_re", "dbar_g_im", "phi_re", "phi_im"])
        .map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![chart_name(r.chart).to_string()];
        for z in [r.x, r.v, r.g, r.dbar_g, r.phi] {
            rec.push(z.re.to_string());
            rec.push(z.im.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Quadrature samples: chart, base coordinate, sheet, fiber coordinate, weight.
pub fn dump_samples(path: &Path, set: &crate::quad::SampleSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["chart", "w1_re", "w1_im", "sheet", "w2_re", "w2_im", "weight"]).map_err(csv_err)?;
    for s in &set.samples {
        let p = &s.point;
        w.write_record([
            chart_name(p.chart).to_string(),
            p.x.re.to_string(),
            p.x.im.to_string(),
            s.sheet.to_string(),
            p.v.re.to_string(),
            p.v.im.to_string(),
            s.weight.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
