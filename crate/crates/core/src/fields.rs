//! Functions and (0,1)-forms on the curve with a twist `ℓ`.
//!
//! A function of homogeneity `ℓ` is stored chart-wise as `G = ζ_α^ℓ g_α`; a
//! (0,1)-form as `Φ = ζ_α^ℓ φ_α dx̄` with `x` the base coordinate of the chart.

use crate::curve::{Chart, CurvePoint, PlaneCurveModel};
use crate::error::{Error, Result};
use crate::poly::{cpow, Exponent};
use crate::quad::{smooth_step, smooth_step_deriv, SampleSet};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub trait CurveFunction: Send + Sync {
    fn ell(&self) -> i32;
    /// Chart value `g_α`.
    fn value(&self, p: &CurvePoint) -> C64;
    /// Chart coefficient of `dx̄` in `∂̄g_α`.
    fn dbar(&self, p: &CurvePoint) -> C64;
    /// Chart coefficient of `dx` in `∂g_α`.
    fn d(&self, p: &CurvePoint) -> C64;
}

pub trait CurveForm: Send + Sync {
    fn ell(&self) -> i32;
    /// Chart coefficient `φ_α` of `dx̄`.
    fn coeff(&self, p: &CurvePoint) -> C64;
}

pub type FormRef = Arc<dyn CurveForm>;
pub type FunctionRef = Arc<dyn CurveFunction>;

/// Reexpresses a point in another chart, returning the point and `dx_to/dx_from`.
///
/// The partials `F_x, F_v` of the result are correct only up to a common
/// factor; use [`PlaneCurveModel::point`](crate::curve::PlaneCurveModel::point)
/// when the Leray weight is needed.
pub fn reframe(p: &CurvePoint, to: Chart) -> Option<(CurvePoint, C64)> {
    if p.chart == to {
        return Some((*p, C64::new(1.0, 0.0)));
    }
    let a = to.alpha();
    let b = to.base_index();
    let ea = p.e[a];
    if ea.norm() == 0.0 {
        return None;
    }
    let e = p.e.map(|z| z / ea);
    let dx = (p.de[b] * ea - p.e[b] * p.de[a]) / (ea * ea);
    let de: [C64; 3] = [0, 1, 2].map(|k| (p.de[k] * ea - p.e[k] * p.de[a]) / (ea * ea) / dx);
    let f_v = p.f_v;
    let f_x = -de[2] * f_v;
    Some((CurvePoint { chart: to, x: e[b], v: e[2], e, de, f_x, f_v }, dx))
}

/// Homogeneous function on `C³ \ 0` with derivatives.
pub trait HomFunction: Send + Sync {
    fn ell(&self) -> i32;
    /// `(h, ∂h/∂ζ̄, ∂h/∂ζ)`.
    fn eval(&self, z: &[C64; 3]) -> (C64, [C64; 3], [C64; 3]);
}

/// Wraps a homogeneous function as a curve function.
#[derive(Clone, Debug)]
pub struct Global<H>(pub H);

impl<H: HomFunction> CurveFunction for Global<H> {
    fn ell(&self) -> i32 {
        self.0.ell()
    }
    fn value(&self, p: &CurvePoint) -> C64 {
        self.0.eval(&p.e).0
    }
    fn dbar(&self, p: &CurvePoint) -> C64 {
        let (_, db, _) = self.0.eval(&p.e);
        (0..3).map(|j| db[j] * p.de[j].conj()).sum()
    }
    fn d(&self, p: &CurvePoint) -> C64 {
        let (_, _, dh) = self.0.eval(&p.e);
        (0..3).map(|j| dh[j] * p.de[j]).sum()
    }
}

/// `Σ c ζ^a ζ̄^b / |ζ|^{2k}` with `|b| = k`, homogeneous of degree `|a| − k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsRational {
    pub k: u32,
    pub terms: Vec<(Exponent, Exponent, C64)>,
}

impl FsRational {
    pub fn new(k: u32, terms: Vec<(Exponent, Exponent, C64)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::Config("empty function".into()));
        };
        let na = first.0.iter().sum::<u32>();
        for (a, b, _) in &terms {
            if b.iter().sum::<u32>() != k || a.iter().sum::<u32>() != na {
                return Err(Error::HomogeneityMismatch("terms of unequal bidegree".into()));
            }
        }
        Ok(Self { k, terms })
    }
}

fn monomial(z: &[C64; 3], e: &Exponent) -> C64 {
    cpow(z[0], e[0]) * cpow(z[1], e[1]) * cpow(z[2], e[2])
}

fn lowered(e: &Exponent, j: usize) -> Exponent {
    let mut f = *e;
    f[j] -= 1;
    f
}

impl HomFunction for FsRational {
    fn ell(&self) -> i32 {
        self.terms[0].0.iter().sum::<u32>() as i32 - self.k as i32
    }

    fn eval(&self, z: &[C64; 3]) -> (C64, [C64; 3], [C64; 3]) {
        let zb = z.map(|c| c.conj());
        let n: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let nk = n.powi(self.k as i32);
        let k = self.k as f64;
        let mut h = C64::default();
        let mut db = [C64::default(); 3];
        let mut dh = [C64::default(); 3];
        for (a, b, c) in &self.terms {
            let ma = monomial(z, a);
            let mb = monomial(&zb, b);
            let t = c * ma * mb / nk;
            h += t;
            for j in 0..3 {
                if b[j] > 0 {
                    db[j] += c * ma * b[j] as f64 * monomial(&zb, &lowered(b, j)) / nk;
                }
                db[j] -= t * k * z[j] / n;
                if a[j] > 0 {
                    dh[j] += c * a[j] as f64 * monomial(z, &lowered(a, j)) * mb / nk;
                }
                dh[j] -= t * k * zb[j] / n;
            }
        }
        (h, db, dh)
    }
}

/// Function owned by one chart; evaluated elsewhere through the twist rule.
pub trait ChartLocal: Send + Sync {
    fn chart(&self) -> Chart;
    fn ell(&self) -> i32;
    /// `(g, ∂g/∂x̄, ∂g/∂x)` at a point of the owning chart.
    fn local(&self, p: &CurvePoint) -> (C64, C64, C64);
}

/// Adapter turning a [`ChartLocal`] into a [`CurveFunction`].
#[derive(Clone, Debug)]
pub struct Local<L>(pub L);

impl<L: ChartLocal> Local<L> {
    fn eval(&self, p: &CurvePoint) -> (C64, C64, C64) {
        let Some((q, dx)) = reframe(p, self.0.chart()) else {
            return Default::default();
        };
        let (g, gb, gd) = self.0.local(&q);
        // g_P = e_O[α_P]^{-ℓ} g_O with e_O the owning-chart vector.
        let s = cpow_i(q.e[p.chart.alpha()], -self.0.ell());
        (s * g, s * gb * dx.conj(), s * gd * dx)
    }
}

fn cpow_i(z: C64, n: i32) -> C64 {
    if n >= 0 {
        cpow(z, n as u32)
    } else {
        cpow(1.0 / z, (-n) as u32)
    }
}

impl<L: ChartLocal> CurveFunction for Local<L> {
    fn ell(&self) -> i32 {
        self.0.ell()
    }
    fn value(&self, p: &CurvePoint) -> C64 {
        self.eval(p).0
    }
    fn dbar(&self, p: &CurvePoint) -> C64 {
        self.eval(p).1
    }
    fn d(&self, p: &CurvePoint) -> C64 {
        self.eval(p).2
    }
}

/// `β(|x − c|/r) · Σ m_ij x^i v^j` in one chart, `β ≡ 1` on `[0, ½]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartBump {
    pub chart: Chart,
    pub center: C64,
    pub radius: f64,
    #[serde(default)]
    pub ell: i32,
    /// `([i, j], coefficient)` of the holomorphic multiplier; empty means 1.
    #[serde(default)]
    pub multiplier: Vec<([u32; 2], C64)>,
}

impl ChartBump {
    pub fn new(chart: Chart, center: C64, radius: f64) -> Self {
        Self { chart, center, radius, ell: 0, multiplier: Vec::new() }
    }
}

/// Radial profile `β(ρ) = S(2(1 − ρ))` and `β'`.
pub fn bump_profile(rho: f64) -> (f64, f64) {
    (smooth_step(2.0 * (1.0 - rho)), -2.0 * smooth_step_deriv(2.0 * (1.0 - rho)))
}

impl ChartLocal for ChartBump {
    fn chart(&self) -> Chart {
        self.chart
    }
    fn ell(&self) -> i32 {
        self.ell
    }
    fn local(&self, p: &CurvePoint) -> (C64, C64, C64) {
        let z = p.x - self.center;
        let r = z.norm();
        let rho = r / self.radius;
        if rho >= 1.0 {
            return Default::default();
        }
        let (b, db) = bump_profile(rho);
        let (m, dm) = if self.multiplier.is_empty() {
            (C64::new(1.0, 0.0), C64::default())
        } else {
            let slope = p.slope();
            let mut m = C64::default();
            let mut dm = C64::default();
            for (e, c) in &self.multiplier {
                let xi = cpow(p.x, e[0]);
                let vj = cpow(p.v, e[1]);
                m += c * xi * vj;
                if e[0] > 0 {
                    dm += c * e[0] as f64 * cpow(p.x, e[0] - 1) * vj;
                }
                if e[1] > 0 {
                    dm += c * xi * e[1] as f64 * cpow(p.v, e[1] - 1) * slope;
                }
            }
            (m, dm)
        };
        if r == 0.0 {
            return (b * m, C64::default(), b * dm);
        }
        // ∂|z|/∂z̄ = z/(2|z|), ∂|z|/∂z = z̄/(2|z|).
        let gb = db / self.radius * z / (2.0 * r) * m;
        let gd = db / self.radius * z.conj() / (2.0 * r) * m + b * dm;
        (b * m, gb, gd)
    }
}

/// `∂̄g` as a form.
pub struct DbarOf(pub FunctionRef);

impl CurveForm for DbarOf {
    fn ell(&self) -> i32 {
        self.0.ell()
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        self.0.dbar(p)
    }
}

/// `h(ζ, ζ̄) (ζ̄_i dζ̄_j − ζ̄_j dζ̄_i)/|ζ|⁴`, a basic form of twist `ℓ_h − 2`.
#[derive(Clone, Debug)]
pub struct FsForm<H> {
    pub h: H,
    pub i: usize,
    pub j: usize,
}

impl<H: HomFunction> CurveForm for FsForm<H> {
    fn ell(&self) -> i32 {
        self.h.ell() - 2
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        let n2: f64 = p.e.iter().map(|z| z.norm_sqr()).sum();
        let (h, _, _) = self.h.eval(&p.e);
        let (i, j) = (self.i, self.j);
        h * (p.e[i].conj() * p.de[j].conj() - p.e[j].conj() * p.de[i].conj()) / (n2 * n2)
    }
}

/// Conjugate of the holomorphic form `ω = σ_α q(e) dx / F_v`.
#[derive(Clone, Debug)]
pub struct ConjAdjoint {
    pub q: crate::poly::HomogeneousPolynomial,
    pub scale: C64,
}

impl ConjAdjoint {
    pub fn omega(&self, p: &CurvePoint) -> C64 {
        self.scale * p.chart.sigma() * self.q.eval(&p.e) / p.f_v
    }
}

impl CurveForm for ConjAdjoint {
    fn ell(&self) -> i32 {
        0
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        self.omega(p).conj()
    }
}

/// Linear combination of forms of equal twist.
pub struct FormSum {
    pub ell: i32,
    pub parts: Vec<(C64, FormRef)>,
}

impl FormSum {
    pub fn new(parts: Vec<(C64, FormRef)>) -> Result<Self> {
        let ell = parts.first().map(|p| p.1.ell()).unwrap_or(0);
        if parts.iter().any(|p| p.1.ell() != ell) {
            return Err(Error::HomogeneityMismatch("summands with different twists".into()));
        }
        Ok(Self { ell, parts })
    }
}

impl CurveForm for FormSum {
    fn ell(&self) -> i32 {
        self.ell
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        self.parts.iter().map(|(c, f)| c * f.coeff(p)).sum()
    }
}

/// The zero form of a given twist.
pub struct ZeroForm(pub i32);

impl CurveForm for ZeroForm {
    fn ell(&self) -> i32 {
        self.0
    }
    fn coeff(&self, _: &CurvePoint) -> C64 {
        C64::default()
    }
}

/// Multiplies a form by `ζ_k^m` of the working frame, raising the twist by `m`.
pub struct Twisted {
    pub form: FormRef,
    pub m: i32,
    /// The coordinate `k`.
    pub index: usize,
}

impl CurveForm for Twisted {
    fn ell(&self) -> i32 {
        self.form.ell() + self.m
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        // ζ_α^{ℓ+m} φ' = ζ_k^m ζ_α^ℓ φ, so φ' = (ζ_k/ζ_α)^m φ = e_k^m φ.
        cpow_i(p.e[self.index], self.m) * self.form.coeff(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Function,
    Form,
}

/// Values of a function or form on a sample set, in each sample's chart frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveFormSamples {
    pub role: Role,
    pub ell: i32,
    pub values: Vec<C64>,
}

impl CurveFormSamples {
    pub fn of_form(form: &dyn CurveForm, set: &SampleSet) -> Self {
        let values = set.samples.par_iter().map(|s| form.coeff(&s.point)).collect();
        Self { role: Role::Form, ell: form.ell(), values }
    }

    pub fn of_function(f: &dyn CurveFunction, set: &SampleSet) -> Self {
        let values = set.samples.par_iter().map(|s| f.value(&s.point)).collect();
        Self { role: Role::Function, ell: f.ell(), values }
    }
}

/// Extends chart-frame values to unit-sphere representatives.
///
/// Functions scale by `ρ₀^ℓ`; (0,1)-coefficients, taken against `dζ̄_b`,
/// scale by `ρ₀^ℓ / ρ̄₀`.
pub fn lift_form(values: &CurveFormSamples, set: &SampleSet) -> Vec<C64> {
    values
        .values
        .iter()
        .zip(&set.samples)
        .map(|(v, s)| {
            let rho = s.point.rho();
            let f = rho.powi(values.ell);
            match values.role {
                Role::Function => v * f,
                Role::Form => v * f / rho,
            }
        })
        .collect()
}

/// Maximum relative mismatch of a form's two chart representations on points
/// visible in both charts.
pub fn overlap_residual(form: &dyn CurveForm, model: &PlaneCurveModel, points: &[CurvePoint]) -> f64 {
    let mut worst = 0.0f64;
    for p in points {
        let Some((q, dx)) = reframe(p, p.chart.other()) else { continue };
        let q = model.point(q.chart, q.x, q.v);
        // φ_P = (ζ_Q/ζ_P)^ℓ φ_Q conj(dx_Q/dx_P); e_P has e_P[α_P] = 1.
        let want = cpow_i(p.e[q.chart.alpha()], form.ell()) * form.coeff(&q) * dx.conj();
        let got = form.coeff(p);
        let scale = got.norm().max(want.norm()).max(1e-300);
        worst = worst.max((got - want).norm() / scale);
    }
    worst
}

/// Checks chart compatibility, failing with `HomogeneityMismatch`.
pub fn check_overlap(form: &dyn CurveForm, model: &PlaneCurveModel, points: &[CurvePoint], tol: f64) -> Result<f64> {
    let r = overlap_residual(form, model, points);
    if r > 10.0 * tol {
        return Err(Error::HomogeneityMismatch(format!("overlap residual {r:e}")));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::examples::*;
    use crate::quad::GridSpec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn overlap_points(m: &PlaneCurveModel) -> Vec<CurvePoint> {
        let mut out = Vec::new();
        for k in 0..12 {
            let x = C64::from_polar(1.9 + 0.02 * k as f64, 0.37 + 0.5 * k as f64);
            out.extend(m.fiber(Chart::A, x).unwrap());
        }
        out
    }

    #[test]
    fn reframe_round_trip() {
        let m = PlaneCurveModel::new(fermat(3)).unwrap();
        let p = m.fiber(Chart::A, c(1.7, 0.9)).unwrap()[1];
        let (q, dx) = reframe(&p, Chart::B).unwrap();
        let direct = m.point(Chart::B, q.x, q.v);
        assert!((q.slope() - direct.slope()).norm() < 1e-12);
        assert!((dx + 1.0 / (p.x * p.x)).norm() < 1e-12);
        let (back, _) = reframe(&q, Chart::A).unwrap();
        assert!((back.x - p.x).norm() < 1e-12 && (back.v - p.v).norm() < 1e-12);
    }

    #[test]
    fn fs_rational_derivatives_match_differences() {
        let f = FsRational::new(1, vec![([1, 1, 0], [0, 0, 1], c(1.0, 0.5)), ([0, 2, 0], [1, 0, 0], c(-0.3, 0.0))])
            .unwrap();
        let z = [c(0.4, 0.1), c(-0.2, 0.7), c(0.9, -0.3)];
        let (_, db, dh) = f.eval(&z);
        let h = 1e-6;
        for j in 0..3 {
            let mut zp = z;
            let mut zm = z;
            let mut zi = z;
            let mut zmi = z;
            zp[j] += h;
            zm[j] -= h;
            zi[j] += C64::new(0.0, h);
            zmi[j] -= C64::new(0.0, h);
            let fx = (f.eval(&zp).0 - f.eval(&zm).0) / (2.0 * h);
            let fy = (f.eval(&zi).0 - f.eval(&zmi).0) / (2.0 * h);
            let dbar = 0.5 * (fx + C64::i() * fy);
            let d = 0.5 * (fx - C64::i() * fy);
            assert!((dbar - db[j]).norm() < 1e-8);
            assert!((d - dh[j]).norm() < 1e-8);
        }
    }

    #[test]
    fn forms_are_chart_compatible() {
        let m = PlaneCurveModel::new(fermat(3)).unwrap();
        let pts = overlap_points(&m);
        let g = Global(FsRational::new(1, vec![([1, 0, 0], [0, 1, 0], c(1.0, 0.0))]).unwrap());
        assert!(overlap_residual(&DbarOf(Arc::new(g)), &m, &pts) < 1e-10);
        let w = ConjAdjoint { q: crate::poly::HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap(), scale: c(1.0, 0.0) };
        assert!(overlap_residual(&w, &m, &pts) < 1e-10);
        let fs = FsForm { h: FsRational::new(0, vec![([1, 1, 0], [0, 0, 0], c(1.0, 0.0))]).unwrap(), i: 0, j: 1 };
        assert!(overlap_residual(&fs, &m, &pts) < 1e-10);
        let bump = Local(ChartBump { ell: 1, ..ChartBump::new(Chart::A, c(2.0, 0.0), 0.5) });
        assert!(overlap_residual(&DbarOf(Arc::new(bump)), &m, &pts) < 1e-10);
    }

    #[test]
    fn twist_mismatch_is_reported() {
        let m = PlaneCurveModel::new(fermat(3)).unwrap();
        let pts = overlap_points(&m);
        let w = ConjAdjoint { q: crate::poly::HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap(), scale: c(1.0, 0.0) };
        // Declaring twist 1 for an untwisted form breaks compatibility.
        struct Wrong(ConjAdjoint);
        impl CurveForm for Wrong {
            fn ell(&self) -> i32 {
                1
            }
            fn coeff(&self, p: &CurvePoint) -> C64 {
                self.0.coeff(p)
            }
        }
        assert!(matches!(check_overlap(&Wrong(w), &m, &pts, 1e-6), Err(Error::HomogeneityMismatch(_))));
    }

    #[test]
    fn bump_dbar_matches_differences() {
        let m = PlaneCurveModel::new(fermat(3)).unwrap();
        let b = Local(ChartBump {
            multiplier: vec![([1, 0], c(1.0, 0.0)), ([0, 1], c(0.0, 1.0))],
            ..ChartBump::new(Chart::A, c(0.2, 0.1), 0.5)
        });
        let p = m.fiber(Chart::A, c(0.45, 0.2)).unwrap()[0];
        let h = 1e-5;
        let val = |x: C64| b.value(&m.nearest_on_fiber(Chart::A, x, p.v).unwrap());
        let fx = (val(p.x + h) - val(p.x - h)) / (2.0 * h);
        let fy = (val(p.x + C64::new(0.0, h)) - val(p.x - C64::new(0.0, h))) / (2.0 * h);
        assert!((0.5 * (fx + C64::i() * fy) - b.dbar(&p)).norm() < 1e-7);
        assert!((0.5 * (fx - C64::i() * fy) - b.d(&p)).norm() < 1e-7);
    }

    #[test]
    fn lift_scales_by_rho() {
        let m = PlaneCurveModel::new(line()).unwrap();
        let set = SampleSet::build(&m, &GridSpec::default().scaled(0.25)).unwrap();
        let ones = CurveFormSamples { role: Role::Function, ell: 0, values: vec![c(1.0, 0.0); set.len()] };
        assert!(lift_form(&ones, &set).iter().all(|v| *v == c(1.0, 0.0)));
        let tw = CurveFormSamples { ell: 1, ..ones };
        for (v, s) in lift_form(&tw, &set).iter().zip(&set.samples) {
            assert!((v.re - s.point.rho()).abs() < 1e-15);
        }
    }
}
