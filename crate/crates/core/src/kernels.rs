//! The homotopy operator `I` and the finite-rank projector `L` with
//! `φ = ∂̄ I[φ] + L[φ]` on `(0,1)`-forms.
//!
//! Both act on a form through its Leray density `D = 2σ φ/F_v` at the
//! quadrature samples. The fiber integral over the Hopf circle is done in
//! closed form: with `ζ = e^{iθ} ζ'` every term is a Fourier mode in `θ`, and
//! the Cauchy denominator `|1 − ⟨ζ, z̄⟩|²` is a Poisson kernel.

use crate::calibration::KernelCalibration;
use crate::context::CurveContext;
use crate::curve::CurvePoint;
use crate::error::{Error, Result};
use crate::fields::CurveForm;
use crate::poly::{power_table, Exponent, GradedHefer, HeferMatrix};
use crate::quad::{QuadratureResult, TargetRule};
use crate::C64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// `a^m` for `m ≥ 0` and `ā^{−m}` otherwise.
#[inline]
fn pow_signed(a: C64, m: i32) -> C64 {
    if m >= 0 {
        a.powi(m)
    } else {
        a.conj().powi(-m)
    }
}

#[inline]
fn cross(u: &[C64; 3], v: &[C64; 3]) -> [C64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

#[inline]
fn dot(u: &[C64; 3], v: &[C64; 3]) -> C64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn conj3(u: &[C64; 3]) -> [C64; 3] {
    u.map(|c| c.conj())
}

/// Leray density `2σ φ / F_v` of a form at a point.
#[inline]
pub fn leray_density(form: &dyn CurveForm, p: &CurvePoint) -> C64 {
    2.0 * p.chart.sigma() * form.coeff(p) / p.f_v
}

/// Per-target data for the `I` kernel.
struct ITarget {
    z: [C64; 3],
    zc: [C64; 3],
    graded: GradedHefer,
    p: i32,
    degree: usize,
}

impl ITarget {
    fn new(hefer: &HeferMatrix, z: [C64; 3], ell: i32) -> Self {
        let degree = hefer.degree() as usize;
        Self { z, zc: conj3(&z), graded: hefer.graded_at(&z), p: ell + 3 - degree as i32, degree }
    }

    /// Closed-form fiber integral for a source sample `ζ' = ρ e`.
    #[inline]
    fn fiber(&self, s: &[C64; 3], rho: f64) -> C64 {
        let z = &self.z;
        let a = s[0].conj() * z[0] + s[1].conj() * z[1] + s[2].conj() * z[2];
        // 1 − |a|² through the Lagrange identity, exact near the diagonal.
        let om = (s[0] * z[1] - s[1] * z[0]).norm_sqr()
            + (s[0] * z[2] - s[2] * z[0]).norm_sqr()
            + (s[1] * z[2] - s[2] * z[1]).norm_sqr();
        if om == 0.0 {
            return C64::default();
        }
        let w = cross(&self.zc, &conj3(s));
        let pw = power_table(s, self.degree - 1);
        let mut acc = C64::default();
        for k in 0..self.degree {
            let q = self.graded.level_at(k, &pw);
            acc += dot(&q, &w) * pow_signed(a, self.p - 1 + k as i32);
        }
        -2.0 * PI * rho.powi(self.p) * acc / om
    }
}

/// The same fiber integral by adaptive Simpson quadrature in `θ`.
pub fn fiber_integral_adaptive(hefer: &HeferMatrix, s: &[C64; 3], z: &[C64; 3], alpha: usize, ell: i32, tol: f64) -> C64 {
    let p = ell + 3 - hefer.degree() as i32;
    let zc = conj3(z);
    let f = |th: f64| {
        let ph = C64::from_polar(1.0, th);
        let zeta = s.map(|c| c * ph);
        let q = hefer.eval(&zeta, z);
        let den = (C64::new(1.0, 0.0) - dot(&zeta, &zc)).norm_sqr();
        let det = dot(&cross(&zc, &conj3(&zeta)), &q);
        -zeta[alpha].powi(p) * det / den
    };
    fn simpson<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, fa: C64, fm: C64, fb: C64, whole: C64, tol: f64, depth: u32) -> C64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.norm() < 15.0 * tol {
            return left + right + diff / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let n = 16;
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|i| {
            let (a, b) = (h * i as f64, h * (i + 1) as f64);
            let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(&f, a, b, fa, fm, fb, whole, tol / n as f64, 40)
        })
        .sum()
}

/// Densities of a form at the base samples.
pub fn densities(ctx: &CurveContext, form: &dyn CurveForm) -> Vec<C64> {
    ctx.set.samples.par_iter().map(|s| leray_density(form, &s.point)).collect()
}

/// Uncalibrated `I` at a unit vector `z` over a target rule.
fn i_raw_with_rule(
    ctx: &CurveContext,
    form: &dyn CurveForm,
    dens: &[C64],
    rule: &TargetRule,
    z: [C64; 3],
) -> QuadratureResult {
    let t = ITarget::new(&ctx.hefer, z, form.ell());
    let base: Vec<C64> = ctx
        .set
        .samples
        .par_iter()
        .zip(dens)
        .zip(&rule.weights)
        .map(|((s, d), w)| if *w == 0.0 { C64::default() } else { d * t.fiber(&s.point.sphere(), s.point.rho()) })
        .collect();
    let extra: Vec<C64> = rule
        .extra
        .par_iter()
        .map(|s| leray_density(form, &s.point) * t.fiber(&s.point.sphere(), s.point.rho()))
        .collect();
    rule.integrate(&base, &extra)
}

/// Uncalibrated `I[φ](z)` at an arbitrary nonzero multiple `z` of a curve point.
pub fn apply_i_raw(ctx: &CurveContext, form: &dyn CurveForm, target: &CurvePoint, z: [C64; 3]) -> Result<QuadratureResult> {
    let rule = ctx.set.target_rule(&ctx.model, target)?;
    let dens = densities(ctx, form);
    Ok(i_raw_with_rule(ctx, form, &dens, &rule, z))
}

/// Chart values `I[φ]_α` at the targets.
pub fn apply_i(
    ctx: &CurveContext,
    cal: &KernelCalibration,
    form: &dyn CurveForm,
    targets: &[CurvePoint],
) -> Result<Vec<QuadratureResult>> {
    let c = cal.c_i(ctx.degree(), form.ell())?;
    let dens = densities(ctx, form);
    let ell = form.ell();
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let rule = ctx.set.target_rule(&ctx.model, t)?;
        let r = i_raw_with_rule(ctx, form, &dens, &rule, t.sphere());
        let s = c / t.rho().powi(ell);
        out.push(QuadratureResult { value: r.value * s, error: r.error * s.norm(), dropped: r.dropped });
    }
    Ok(out)
}

/// `⟨z̄·ζ⟩^r` expanded into ζ-monomials.
fn pairing_power(zc: &[C64; 3], r: u32) -> Vec<(Exponent, C64)> {
    let mut acc: Vec<(Exponent, C64)> = vec![([0, 0, 0], C64::new(1.0, 0.0))];
    for _ in 0..r {
        let mut next: Vec<(Exponent, C64)> = Vec::new();
        for (e, c) in &acc {
            for (v, zv) in zc.iter().enumerate() {
                let mut f = *e;
                f[v] += 1;
                match next.iter_mut().find(|(g, _)| *g == f) {
                    Some((_, x)) => *x += c * zv,
                    None => next.push((f, c * zv)),
                }
            }
        }
        acc = next;
    }
    acc
}

fn monomials(n: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for a in (0..=n).rev() {
        for b in (0..=n - a).rev() {
            out.push([a, b, n - a - b]);
        }
    }
    out
}

fn monomial(e: &[C64; 3], k: &Exponent) -> C64 {
    e[0].powu(k[0]) * e[1].powu(k[1]) * e[2].powu(k[2])
}

/// The finite-rank output of `L`: `L_j(z) = 2π Σ_r C_r Σ_κ c^{(r)}_{κ,j}(z) M_κ`.
#[derive(Clone, Debug)]
pub struct LForm {
    pub ell: i32,
    hefer: HeferMatrix,
    /// `(r, C_r)` for `r = 0..=d−3−ℓ`.
    pub constants: Vec<(u32, C64)>,
    /// Moments `M_κ = Σ w D e^κ`, `|κ| = d − 3 − ℓ`.
    pub moments: Vec<(Exponent, C64)>,
}

impl LForm {
    pub fn is_zero(&self) -> bool {
        self.moments.is_empty()
    }

    /// Components `L_j(z)` at an arbitrary vector `z`.
    pub fn raw(&self, z: &[C64; 3]) -> [C64; 3] {
        let mut out = [C64::default(); 3];
        if self.is_zero() {
            return out;
        }
        let d = self.hefer.degree() as i32;
        let top = (d - 3 - self.ell) as u32;
        let zc = conj3(z);
        let graded = self.hefer.graded_at(z);
        for &(r, c) in &self.constants {
            let k = (top - r) as usize;
            if k >= graded.levels.len() {
                continue;
            }
            let pp = pairing_power(&zc, r);
            for (e1, q) in &graded.levels[k] {
                let w = cross(&zc, q);
                for (e2, c2) in &pp {
                    let kappa = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                    if let Some((_, m)) = self.moments.iter().find(|(k, _)| *k == kappa) {
                        let f = 2.0 * PI * c * c2 * m;
                        for j in 0..3 {
                            out[j] += f * w[j];
                        }
                    }
                }
            }
        }
        out
    }
}

impl LForm {
    /// `Σ c_k L_k` for outputs on the same curve with the same twist.
    pub fn combine(parts: &[(C64, &LForm)]) -> Option<LForm> {
        let (_, first) = parts.first()?;
        let mut out = (*first).clone();
        for (_, m) in out.moments.iter_mut() {
            *m = C64::default();
        }
        for (c, f) in parts {
            if f.ell != out.ell || f.moments.len() != out.moments.len() {
                return None;
            }
            for ((k, m), (k2, m2)) in out.moments.iter_mut().zip(&f.moments) {
                if k != k2 {
                    return None;
                }
                *m += c * m2;
            }
        }
        Some(out)
    }
}

impl CurveForm for LForm {
    fn ell(&self) -> i32 {
        self.ell
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        let rho = p.rho();
        let l = self.raw(&p.sphere());
        rho.powi(1 - self.ell) * (l[0] * p.de[0].conj() + l[1] * p.de[1].conj() + l[2] * p.de[2].conj())
    }
}

/// `L[φ]` by moment factorization.
pub fn apply_l(ctx: &CurveContext, cal: &KernelCalibration, form: &dyn CurveForm) -> Result<LForm> {
    let d = ctx.degree() as i32;
    let ell = form.ell();
    let top = d - 3 - ell;
    if top < 0 {
        return Ok(LForm { ell, hefer: ctx.hefer.clone(), constants: Vec::new(), moments: Vec::new() });
    }
    let mut constants = Vec::new();
    for r in 0..=top as u32 {
        constants.push((r, cal.c_l(d as u32, ell, r)?));
    }
    let dens = densities(ctx, form);
    let moments = monomials(top as u32)
        .into_iter()
        .map(|k| {
            let v: Vec<C64> = ctx
                .set
                .samples
                .par_iter()
                .zip(&dens)
                .map(|(s, dv)| dv * s.weight * monomial(&s.point.e, &k))
                .collect();
            (k, crate::quad::pairwise_sum(&v))
        })
        .collect();
    Ok(LForm { ell, hefer: ctx.hefer.clone(), constants, moments })
}

/// Threshold on `‖L[φ]‖/‖φ‖` below which a form is declared exact.
pub const EXACTNESS_THRESHOLD: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exactness {
    pub exact: bool,
    /// `‖L[φ]‖/‖φ‖`, zero for the zero form.
    pub residual: f64,
}

/// Decides `∂̄`-exactness by the vanishing of `L[φ]`.
///
/// The closedness precondition is checked as chart compatibility on samples
/// seen by both charts; a mismatch reports `NotClosed`.
pub fn exactness_test(ctx: &CurveContext, cal: &KernelCalibration, form: &dyn CurveForm) -> Result<Exactness> {
    let r = ctx.switch_radius();
    let overlap: Vec<CurvePoint> = ctx
        .set
        .samples
        .iter()
        .map(|s| s.point)
        .filter(|p| p.x.norm() > 0.8 / r && p.x.norm() < 0.8 * r)
        .step_by(97)
        .take(64)
        .collect();
    let mismatch = crate::fields::overlap_residual(form, &ctx.model, &overlap);
    if mismatch > 1e-6 {
        return Err(Error::NotClosed(mismatch));
    }
    let norm = ctx.norm(form);
    if norm == 0.0 {
        return Ok(Exactness { exact: true, residual: 0.0 });
    }
    let l = apply_l(ctx, cal, form)?;
    let residual = ctx.norm(&l) / norm;
    Ok(Exactness { exact: residual <= EXACTNESS_THRESHOLD, residual })
}

/// `L[φ]` chart coefficients at targets by an `M`-point fiber rule on the full
/// Hefer matrix, without the degree split.
pub fn apply_l_direct(
    ctx: &CurveContext,
    cal: &KernelCalibration,
    form: &dyn CurveForm,
    targets: &[CurvePoint],
) -> Result<Vec<C64>> {
    let d = ctx.degree() as i32;
    let ell = form.ell();
    let top = d - 3 - ell;
    if top < 0 {
        return Ok(vec![C64::default(); targets.len()]);
    }
    let consts: Vec<(u32, C64)> =
        (0..=top as u32).map(|r| cal.c_l(d as u32, ell, r).map(|c| (r, c))).collect::<Result<_>>()?;
    let dens = densities(ctx, form);
    let p = ell + 3 - d;
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let z = t.sphere();
        let zc = conj3(&z);
        let vals: Vec<[C64; 3]> = ctx
            .set
            .samples
            .par_iter()
            .zip(&dens)
            .map(|(s, dv)| {
                let sp = s.point.sphere();
                let alpha = s.point.chart.alpha();
                let mut acc = [C64::default(); 3];
                for &(r, c) in &consts {
                    let m = 2 * (d as usize + r as usize + 5);
                    for i in 0..m {
                        let ph = C64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64);
                        let zeta = sp.map(|x| x * ph);
                        let w = cross(&zc, &ctx.hefer.eval(&zeta, &z));
                        let f = c * dot(&zc, &zeta).powu(r) * zeta[alpha].powi(p) * dv * s.weight / m as f64;
                        for j in 0..3 {
                            acc[j] += f * w[j];
                        }
                    }
                }
                acc
            })
            .collect();
        let mut l = [C64::default(); 3];
        for j in 0..3 {
            let col: Vec<C64> = vals.iter().map(|v| v[j]).collect();
            l[j] = 2.0 * PI * crate::quad::pairwise_sum(&col);
        }
        let rho = t.rho();
        out.push(rho.powi(1 - ell) * (l[0] * t.de[0].conj() + l[1] * t.de[1].conj() + l[2] * t.de[2].conj()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{examples::*, Chart};
    use crate::fields::{ConjAdjoint, DbarOf, FsRational, Global};
    use crate::poly::HomogeneousPolynomial;
    use crate::quad::GridSpec;
    use std::sync::Arc;

    fn unit(v: [C64; 3]) -> [C64; 3] {
        let n = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
        v.map(|c| c / n)
    }

    #[test]
    fn closed_form_fiber_matches_adaptive() {
        let m = crate::curve::PlaneCurveModel::new(fermat(3)).unwrap();
        let h = crate::poly::hefer_decompose(m.working_polynomial()).unwrap();
        let t = ITarget::new(&h, unit([C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(0.1, 0.5)]), 0);
        for (k, x) in [C64::new(0.4, 0.1), C64::new(-0.7, 0.6), C64::new(0.05, -0.2)].into_iter().enumerate() {
            let p = m.fiber(Chart::A, x).unwrap()[k % 3];
            for ell in [0, 1, -1] {
                let t = ITarget::new(&h, t.z, ell);
                let a = t.fiber(&p.sphere(), p.rho());
                let b = fiber_integral_adaptive(&h, &p.sphere(), &t.z, 0, ell, 1e-12);
                assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()), "{a} {b}");
            }
        }
    }

    #[test]
    fn l_routes_agree_and_vanish_above_range() {
        let ctx = CurveContext::new(fermat(3), &GridSpec::default().scaled(0.5)).unwrap();
        let cal = KernelCalibration::unit(&[(3, 0)]);
        let q = HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap();
        let w = ConjAdjoint { q, scale: C64::new(1.0, 0.0) };
        let l = apply_l(&ctx, &cal, &w).unwrap();
        let pts: Vec<CurvePoint> =
            [C64::new(0.3, 0.4), C64::new(-1.1, 0.2)].iter().map(|&x| ctx.model.fiber(Chart::A, x).unwrap()[1]).collect();
        let direct = apply_l_direct(&ctx, &cal, &w, &pts).unwrap();
        for (p, d) in pts.iter().zip(&direct) {
            let f = l.coeff(p);
            assert!((f - d).norm() < 1e-10 * f.norm(), "{f} {d}");
        }
        let g = Global(FsRational::new(1, vec![([1, 0, 0], [0, 1, 0], C64::new(1.0, 0.0))]).unwrap());
        let tw = crate::fields::Twisted { form: Arc::new(DbarOf(Arc::new(g))), m: 1, index: 0 };
        assert!(apply_l(&ctx, &cal, &tw).unwrap().is_zero());
    }

    fn fermat_ctx() -> &'static CurveContext {
        crate::context::fixtures::fermat3()
    }

    fn basic_form() -> crate::fields::FsForm<FsRational> {
        let h = FsRational::new(0, vec![([1, 1, 0], [0, 0, 0], C64::new(1.0, 0.0)), ([0, 0, 2], [0, 0, 0], C64::new(0.0, 0.5))])
            .unwrap();
        crate::fields::FsForm { h, i: 0, j: 2 }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(6))]
        #[test]
        fn phase_homogeneity(theta in 0.0..std::f64::consts::TAU, x_re in -1.2..1.2f64, x_im in -0.4..0.4f64, ell in -1i32..2) {
            let ctx = fermat_ctx();
            let g = Global(FsRational::new(1, vec![([1, 0, 0], [0, 1, 0], C64::new(1.0, 0.0))]).unwrap());
            let tw = crate::fields::Twisted { form: Arc::new(DbarOf(Arc::new(g))), m: ell, index: 0 };
            let p = ctx.model.fiber(Chart::A, C64::new(x_re, x_im)).unwrap()[0];
            let lam = C64::from_polar(1.0, theta);
            let z = p.sphere();
            let a = apply_i_raw(ctx, &tw, &p, z).unwrap().value;
            let b = apply_i_raw(ctx, &tw, &p, z.map(|c| c * lam)).unwrap().value;
            proptest::prop_assert!((b - lam.powi(ell) * a).norm() <= 1e-12 * (1.0 + a.norm()));
            let cal = KernelCalibration::unit(&[(3, -1), (3, 0)]);
            if ell <= 0 {
                let l = apply_l(ctx, &cal, &tw).unwrap();
                let (u, v) = (l.raw(&z), l.raw(&z.map(|c| c * lam)));
                for j in 0..3 {
                    proptest::prop_assert!((v[j] - lam.powi(ell + 1) * u[j]).norm() <= 1e-12 * (1.0 + u[j].norm()));
                }
            }
        }
    }

    #[test]
    fn l_vanishes_on_exact_forms() {
        let ctx = fermat_ctx();
        let cal = crate::calibration::test_calibration();
        let g = Global(FsRational::new(1, vec![([1, 0, 0], [0, 1, 0], C64::new(1.0, 0.0))]).unwrap());
        let f = DbarOf(Arc::new(g));
        let l = apply_l(ctx, cal, &f).unwrap();
        assert!(ctx.norm(&l) < 1e-3 * ctx.norm(&f), "{}", ctx.norm(&l) / ctx.norm(&f));
    }

    #[test]
    fn exactness_decisions() {
        let ctx = fermat_ctx();
        let cal = crate::calibration::test_calibration();
        let bump = crate::fields::Local(crate::fields::ChartBump::new(Chart::A, C64::new(0.4, 0.3), 0.5));
        let t = exactness_test(ctx, cal, &DbarOf(Arc::new(bump))).unwrap();
        assert!(t.exact, "{}", t.residual);
        let q = HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap();
        let w = crate::fields::ConjAdjoint { q, scale: C64::new(1.0, 0.0) };
        let t = exactness_test(ctx, cal, &w).unwrap();
        assert!(!t.exact && t.residual >= 0.1, "{}", t.residual);
        let z = exactness_test(ctx, cal, &crate::fields::ZeroForm(0)).unwrap();
        assert_eq!(z, Exactness { exact: true, residual: 0.0 });
    }

    #[test]
    fn combined_outputs_are_linear() {
        let ctx = fermat_ctx();
        let cal = crate::calibration::test_calibration();
        let f = basic_form();
        let q = HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap();
        let w = crate::fields::ConjAdjoint { q, scale: C64::new(0.5, 1.0) };
        let (a, b) = (apply_l(ctx, cal, &f).unwrap(), apply_l(ctx, cal, &w).unwrap());
        let c = LForm::combine(&[(C64::new(2.0, -1.0), &a), (C64::new(0.0, 3.0), &b)]).unwrap();
        let p = ctx.model.fiber(Chart::A, C64::new(0.7, 0.1)).unwrap()[2];
        let want = C64::new(2.0, -1.0) * a.coeff(&p) + C64::new(0.0, 3.0) * b.coeff(&p);
        assert!((c.coeff(&p) - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn homotopy_formula_holds_pointwise() {
        let ctx = fermat_ctx();
        let cal = crate::calibration::test_calibration();
        let f = basic_form();
        let l = apply_l(ctx, cal, &f).unwrap();
        for (chart, x) in [(Chart::A, C64::new(0.35, -0.2)), (Chart::A, C64::new(-1.3, 0.4)), (Chart::B, C64::new(0.1, 0.2))] {
            for p in ctx.model.fiber(chart, x).unwrap() {
                let st = crate::dbar::Stencil::new(&ctx.model, &p, 0.01).unwrap();
                let v: Vec<C64> = apply_i(ctx, cal, &f, &st.points).unwrap().iter().map(|r| r.value).collect();
                let lhs = f.coeff(&p);
                let rhs = st.dbar(&v) + l.coeff(&p);
                assert!((lhs - rhs).norm() < 5e-3 * lhs.norm(), "{chart:?} {x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn l_output_has_rank_one_on_cubic() {
        let ctx = fermat_ctx();
        let cal = crate::calibration::test_calibration();
        let q = HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap();
        let a = apply_l(ctx, cal, &basic_form()).unwrap();
        let b = apply_l(ctx, cal, &ConjAdjoint { q, scale: C64::new(1.0, 0.0) }).unwrap();
        assert_eq!(b.moments.len(), 1);
        let ratio = |p: &CurvePoint| a.coeff(p) / b.coeff(p);
        let p0 = ctx.model.fiber(Chart::A, C64::new(0.2, 0.5)).unwrap()[2];
        for x in [C64::new(-0.6, 0.1), C64::new(1.5, 1.0)] {
            for p in ctx.model.fiber(Chart::A, x).unwrap() {
                assert!((ratio(&p) - ratio(&p0)).norm() < 1e-9 * ratio(&p0).norm().max(1e-12));
            }
        }
    }
}
