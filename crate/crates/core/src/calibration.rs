//! Least-squares fits of the kernel normalizations and their on-disk cache.
//!
//! `C_I` is fitted on the line and the conic from `I[∂̄g] = g + const`.
//! `C_L(d, r)` is fitted on the Fermat curve of degree `d` from
//! `L[φ] = φ − ∂̄I[φ]`, with `∂̄` taken by finite differences.

use crate::context::CurveContext;
use crate::curve::{examples, Chart, CurvePoint};
use crate::dbar::Stencil;
use crate::error::{Error, Result};
use crate::fields::{ConjAdjoint, CurveForm, DbarOf, FsForm, FsRational, Global};
use crate::kernels::{apply_i, apply_l};
use crate::poly::HomogeneousPolynomial;
use crate::quad::GridSpec;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    I,
    L,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub kind: ConstantKind,
    pub degree: u32,
    pub ell: i32,
    pub r: u32,
    pub value: C64,
    /// Relative residual of the fit.
    pub residual: f64,
    /// Largest relative residual when one test family predicts the other.
    pub cross_validation: f64,
    pub curve_hash: String,
    pub grid_hash: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelCalibration {
    pub schema: u32,
    pub records: Vec<CalibrationRecord>,
}

/// Tolerance on the relative spread between independent `C_I` estimates.
pub const CI_CONSISTENCY: f64 = 1e-3;
/// Tolerance on the cross-validated `C_L` residual.
pub const CL_CONSISTENCY: f64 = 1e-2;

impl KernelCalibration {
    /// Unit constants, for tests of structure that do not depend on normalization.
    pub fn unit(degree_ells: &[(u32, i32)]) -> Self {
        let mut records = vec![record(ConstantKind::I, 1, 0, 0, C64::new(1.0, 0.0))];
        for &(d, ell) in degree_ells {
            for r in 0..=(d as i32 - 3 - ell).max(-1) {
                records.push(record(ConstantKind::L, d, ell, r as u32, C64::new(1.0, 0.0)));
            }
        }
        Self { schema: 1, records }
    }

    pub fn c_i(&self, degree: u32, ell: i32) -> Result<C64> {
        self.records
            .iter()
            .find(|r| r.kind == ConstantKind::I)
            .map(|r| r.value)
            .ok_or(Error::CalibrationMissing { degree, ell })
    }

    pub fn c_l(&self, degree: u32, ell: i32, r: u32) -> Result<C64> {
        self.records
            .iter()
            .find(|x| x.kind == ConstantKind::L && x.degree == degree && x.ell == ell && x.r == r)
            .map(|x| x.value)
            .ok_or(Error::CalibrationMissing { degree, ell })
    }

    pub fn has_l(&self, degree: u32, ell: i32) -> bool {
        let top = degree as i32 - 3 - ell;
        top < 0 || (0..=top as u32).all(|r| self.c_l(degree, ell, r).is_ok())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cal: Self = serde_json::from_str(&text)?;
        if cal.schema != 1 {
            return Err(Error::Config(format!("unsupported calibration schema {}", cal.schema)));
        }
        Ok(cal)
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    fn merge(&mut self, rec: CalibrationRecord) {
        self.records.retain(|r| !(r.kind == rec.kind && r.degree == rec.degree && r.ell == rec.ell && r.r == rec.r));
        self.records.push(rec);
    }
}

fn record(kind: ConstantKind, degree: u32, ell: i32, r: u32, value: C64) -> CalibrationRecord {
    CalibrationRecord {
        kind,
        degree,
        ell,
        r,
        value,
        residual: 0.0,
        cross_validation: 0.0,
        curve_hash: String::new(),
        grid_hash: String::new(),
    }
}

/// Complex least squares `A c ≈ b` by normal equations.
fn lstsq(cols: &[Vec<C64>], b: &[C64]) -> (Vec<C64>, f64) {
    let n = cols.len();
    let a = nalgebra::DMatrix::from_fn(b.len(), n, |i, j| cols[j][i]);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-14).unwrap_or_else(|_| nalgebra::DVector::zeros(n));
    let res = (&a * &x - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    (x.iter().copied().collect(), res)
}

fn centered(v: &[C64]) -> Vec<C64> {
    let m: C64 = v.iter().sum::<C64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}

fn points_on(ctx: &CurveContext, chart: Chart, xs: &[C64]) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    for &x in xs {
        out.extend(ctx.model.fiber(chart, x)?);
    }
    Ok(out)
}

fn ci_targets(ctx: &CurveContext) -> Result<Vec<CurvePoint>> {
    let mut t = points_on(
        ctx,
        Chart::A,
        &[C64::new(0.2, 0.1), C64::new(-0.5, 0.4), C64::new(0.8, -0.3), C64::new(1.3, 0.6), C64::new(-0.1, -1.1)],
    )?;
    t.extend(points_on(ctx, Chart::B, &[C64::new(0.1, 0.25)])?);
    Ok(t)
}

/// Fits `C_I` on one curve; returns per-function estimates and the common fit.
fn fit_ci_on(ctx: &CurveContext) -> Result<(Vec<C64>, C64, f64)> {
    let targets = ci_targets(ctx)?;
    let unit = KernelCalibration::unit(&[]);
    let gs = [
        FsRational::new(1, vec![([1, 0, 0], [1, 0, 0], C64::new(1.0, 0.0))])?,
        FsRational::new(1, vec![([0, 1, 0], [1, 0, 0], C64::new(1.0, 0.0))])?,
        FsRational::new(1, vec![([0, 1, 0], [0, 1, 0], C64::new(0.5, 0.5))])?,
    ];
    let mut estimates = Vec::new();
    let (mut all_i, mut all_g) = (Vec::new(), Vec::new());
    for g in gs {
        let gf = Arc::new(Global(g));
        let vals: Vec<C64> = apply_i(ctx, &unit, &DbarOf(gf.clone()), &targets)?.iter().map(|r| r.value).collect();
        let gv: Vec<C64> = targets.iter().map(|p| crate::fields::CurveFunction::value(gf.as_ref(), p)).collect();
        let (ci, cg) = (centered(&vals), centered(&gv));
        let (c, _) = lstsq(std::slice::from_ref(&ci), &cg);
        estimates.push(c[0]);
        all_i.extend(ci);
        all_g.extend(cg);
    }
    let (c, res) = lstsq(&[all_i], &all_g);
    Ok((estimates, c[0], res))
}

/// Fits `C_I` on the line and the conic.
pub fn calibrate_ci(grid: &GridSpec) -> Result<CalibrationRecord> {
    let mut estimates = Vec::new();
    let mut worst = 0.0f64;
    let mut hashes = Vec::new();
    for spec in [examples::line(), examples::conic()] {
        let ctx = CurveContext::new(spec, grid)?;
        let (e, _, res) = fit_ci_on(&ctx)?;
        estimates.extend(e);
        worst = worst.max(res);
        hashes.push(ctx.curve_hash());
    }
    let mean: C64 = estimates.iter().sum::<C64>() / estimates.len() as f64;
    let spread = estimates.iter().map(|e| (e - mean).norm() / mean.norm()).fold(0.0, f64::max);
    if spread > CI_CONSISTENCY {
        return Err(Error::CalibrationInconsistent(spread));
    }
    Ok(CalibrationRecord {
        kind: ConstantKind::I,
        degree: 0,
        ell: 0,
        r: 0,
        value: mean,
        residual: worst,
        cross_validation: spread,
        curve_hash: hashes.join("+"),
        grid_hash: grid.hash_hex(),
    })
}

/// Test forms of twist `ℓ`, split into two families for cross-validation.
fn cl_families(d: u32, ell: i32) -> Result<[Vec<Arc<dyn CurveForm>>; 2]> {
    let mut conj: Vec<Arc<dyn CurveForm>> = Vec::new();
    if ell == 0 && d >= 3 {
        for a in 0..=d - 3 {
            for b in 0..=d - 3 - a {
                let q = HomogeneousPolynomial::from_real(&[([a, b, d - 3 - a - b], 1.0)])?;
                conj.push(Arc::new(ConjAdjoint { q, scale: C64::new(1.0, 0.0) }));
            }
        }
    }
    let hd = (ell + 2).max(0) as u32;
    let mut basic: Vec<Arc<dyn CurveForm>> = Vec::new();
    for (a, i, j) in [([hd, 0, 0], 0, 1), ([0, hd, 0], 1, 2), ([0, 0, hd], 0, 2), ([hd, 0, 0], 1, 2)] {
        let h = FsRational::new(0, vec![(a, [0, 0, 0], C64::new(1.0, 0.0))])?;
        basic.push(Arc::new(FsForm { h, i, j }));
    }
    if conj.is_empty() {
        let tail = basic.split_off(2);
        return Ok([basic, tail]);
    }
    Ok([conj, basic])
}

fn cl_targets(ctx: &CurveContext) -> Result<Vec<CurvePoint>> {
    let mut t = points_on(ctx, Chart::A, &[C64::new(0.25, 0.15), C64::new(-0.45, -0.3), C64::new(0.1, 0.6)])?;
    t.extend(points_on(ctx, Chart::B, &[C64::new(0.2, -0.1)])?);
    Ok(t)
}

/// Rows `(φ − C_I ∂̄Î[φ], L̂_r[φ] for each r)` at targets.
fn cl_rows(
    ctx: &CurveContext,
    c_i: C64,
    form: &dyn CurveForm,
    targets: &[CurvePoint],
    h: f64,
) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let d = ctx.degree();
    let ell = form.ell();
    let top = d as i32 - 3 - ell;
    let unit = KernelCalibration::unit(&[(d, ell)]);
    let mut stencils = Vec::new();
    let mut pts = Vec::new();
    for t in targets {
        let st = Stencil::new(&ctx.model, t, h)?;
        pts.extend(st.points.iter().copied());
        stencils.push(st);
    }
    let vals = apply_i(ctx, &unit, form, &pts)?;
    let lhs: Vec<C64> = stencils
        .iter()
        .enumerate()
        .map(|(k, st)| {
            let v: Vec<C64> = vals[8 * k..8 * k + 8].iter().map(|r| r.value).collect();
            form.coeff(&st.center) - c_i * st.dbar(&v)
        })
        .collect();
    let mut cols = Vec::new();
    for r in 0..=top.max(-1) {
        let mut only = unit.clone();
        for rec in only.records.iter_mut() {
            if rec.kind == ConstantKind::L && rec.r != r as u32 {
                rec.value = C64::default();
            }
        }
        let l = apply_l(ctx, &only, form)?;
        cols.push(targets.iter().map(|p| l.coeff(p)).collect());
    }
    Ok((lhs, cols))
}

/// Fits `C_L(d, r)` for twist `ℓ` on the Fermat curve of degree `d`.
pub fn calibrate_cl(grid: &GridSpec, c_i: C64, d: u32, ell: i32) -> Result<Vec<CalibrationRecord>> {
    let top = d as i32 - 3 - ell;
    if top < 0 {
        return Ok(Vec::new());
    }
    let ctx = CurveContext::new(examples::fermat(d), grid)?;
    let targets = cl_targets(&ctx)?;
    let h = 0.01;
    let fams = cl_families(d, ell)?;
    let mut fam_rows: Vec<(Vec<C64>, Vec<Vec<C64>>)> = Vec::new();
    for fam in &fams {
        let mut b = Vec::new();
        let mut cols: Vec<Vec<C64>> = vec![Vec::new(); top as usize + 1];
        for f in fam {
            let (lhs, c) = cl_rows(&ctx, c_i, f.as_ref(), &targets, h)?;
            b.extend(lhs);
            for (acc, col) in cols.iter_mut().zip(c) {
                acc.extend(col);
            }
        }
        fam_rows.push((b, cols));
    }
    let predict = |fit: &[C64], rows: &(Vec<C64>, Vec<Vec<C64>>)| {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, b) in rows.0.iter().enumerate() {
            let m: C64 = fit.iter().zip(&rows.1).map(|(c, col)| c * col[i]).sum();
            num += (m - b).norm_sqr();
            den += b.norm_sqr();
        }
        (num / den).sqrt()
    };
    let (fit0, _) = lstsq(&fam_rows[0].1, &fam_rows[0].0);
    let (fit1, _) = lstsq(&fam_rows[1].1, &fam_rows[1].0);
    let cross = predict(&fit0, &fam_rows[1]).max(predict(&fit1, &fam_rows[0]));
    let mut b = fam_rows[0].0.clone();
    b.extend(fam_rows[1].0.iter().copied());
    let cols: Vec<Vec<C64>> =
        (0..=top as usize).map(|r| fam_rows[0].1[r].iter().chain(&fam_rows[1].1[r]).copied().collect()).collect();
    let (fit, res) = lstsq(&cols, &b);
    if cross > CL_CONSISTENCY {
        return Err(Error::CalibrationInconsistent(cross));
    }
    Ok(fit
        .into_iter()
        .enumerate()
        .map(|(r, value)| CalibrationRecord {
            kind: ConstantKind::L,
            degree: d,
            ell,
            r: r as u32,
            value,
            residual: res,
            cross_validation: cross,
            curve_hash: ctx.curve_hash(),
            grid_hash: ctx.grid_hash(),
        })
        .collect())
}

/// Full calibration for the listed `(degree, ℓ)` pairs.
pub fn calibrate(grid: &GridSpec, degree_ells: &[(u32, i32)]) -> Result<KernelCalibration> {
    let mut cal = KernelCalibration { schema: 1, records: Vec::new() };
    extend(&mut cal, grid, degree_ells)?;
    Ok(cal)
}

/// Adds missing constants to `cal`.
pub fn extend(cal: &mut KernelCalibration, grid: &GridSpec, degree_ells: &[(u32, i32)]) -> Result<()> {
    let ci = match cal.c_i(0, 0) {
        Ok(c) => c,
        Err(_) => {
            let rec = calibrate_ci(grid)?;
            let c = rec.value;
            cal.merge(rec);
            c
        }
    };
    for &(d, ell) in degree_ells {
        if !cal.has_l(d, ell) {
            for rec in calibrate_cl(grid, ci, d, ell)? {
                cal.merge(rec);
            }
        }
    }
    Ok(())
}

/// Loads a cache if it matches `grid`, extends it, and writes it back.
pub fn cached(path: &Path, grid: &GridSpec, degree_ells: &[(u32, i32)]) -> Result<KernelCalibration> {
    let gh = grid.hash_hex();
    let mut cal = match KernelCalibration::load(path) {
        Ok(c) if c.records.iter().all(|r| r.grid_hash == gh) => c,
        _ => KernelCalibration { schema: 1, records: Vec::new() },
    };
    let before = cal.records.len();
    extend(&mut cal, grid, degree_ells)?;
    if cal.records.len() != before {
        cal.save(path)?;
    }
    Ok(cal)
}
/// Per-grid cache location under the system temporary directory.
pub fn default_cache_path(grid: &GridSpec) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("hodge-curves");
    let _ = std::fs::create_dir_all(&dir);
    dir.join(format!("calibration-{}.json", &grid.hash_hex()[..16]))
}

/// Shared calibration for unit tests on the default grid.
#[cfg(test)]
pub(crate) fn test_calibration() -> &'static KernelCalibration {
    static CAL: std::sync::OnceLock<KernelCalibration> = std::sync::OnceLock::new();
    CAL.get_or_init(|| {
        let g = GridSpec::default();
        cached(&default_cache_path(&g), &g, &[(3, 0), (4, 0)]).unwrap()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ci_is_inverse_four_pi_squared() {
        let rec = calibrate_ci(&GridSpec::default()).unwrap();
        let target = 1.0 / (4.0 * PI * PI);
        assert!((rec.value - target).norm() / target < 2e-3, "{}", rec.value);
        assert!(rec.cross_validation < CI_CONSISTENCY);
    }

    #[test]
    fn cl_on_cubic_is_minus_ci() {
        let g = GridSpec::default();
        let cal = cached(&default_cache_path(&g), &g, &[(3, 0)]).unwrap();
        let ci = cal.c_i(3, 0).unwrap();
        let cl = cal.c_l(3, 0, 0).unwrap();
        assert!((cl + ci).norm() / ci.norm() < 1e-2, "{cl} {ci}");
        let rec = cal.records.iter().find(|r| r.kind == ConstantKind::L).unwrap();
        assert!(rec.cross_validation < CL_CONSISTENCY);
    }

    #[test]
    fn cache_round_trip_and_missing_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cal.json");
        let cal = KernelCalibration::unit(&[(4, 0)]);
        cal.save(&path).unwrap();
        assert!(!path.with_extension("json.tmp").exists());
        let back = KernelCalibration::load(&path).unwrap();
        assert_eq!(back, cal);
        assert_eq!(back.c_l(4, 0, 1).unwrap(), C64::new(1.0, 0.0));
        assert!(matches!(back.c_l(5, 0, 0), Err(Error::CalibrationMissing { degree: 5, ell: 0 })));
        assert!(matches!(KernelCalibration::default().c_i(3, 0), Err(Error::CalibrationMissing { .. })));
    }
}
