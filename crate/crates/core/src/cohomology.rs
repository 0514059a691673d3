//! Čech cocycles and residual (0,1)-classes, in both directions.
//!
//! The cover is radial in `s = ζ₁/ζ₀` of the working frame: a disk, two
//! annuli and a neighborhood of the infinity points. Consecutive sets overlap
//! and there are no triple overlaps.

use crate::calibration::KernelCalibration;
use crate::context::CurveContext;
use crate::curve::{base_distance, Chart, CurvePoint};
use crate::dbar::Stencil;
use crate::error::{Error, Result};
use crate::fields::{reframe, CurveForm, FormRef, Twisted};
use crate::kernels::apply_i;
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `35y⁴ − 84y⁵ + 70y⁶ − 20y⁷` clamped to `[0, 1]`, and its derivative.
fn smoothstep(y: f64) -> (f64, f64) {
    if y <= 0.0 {
        (0.0, 0.0)
    } else if y >= 1.0 {
        (1.0, 0.0)
    } else {
        let y4 = y.powi(4);
        (y4 * (35.0 - 84.0 * y + 70.0 * y * y - 20.0 * y.powi(3)), 140.0 * y.powi(3) * (1.0 - y).powi(3))
    }
}

/// `|w|²` and `∂̄|w|²` as a chart coefficient, for `w = ζ_b/ζ_a`; `None` at `ζ_a = 0`.
fn radial(p: &CurvePoint, a: usize, b: usize) -> Option<(f64, C64)> {
    let ea = p.e[a];
    if ea.norm() == 0.0 {
        return None;
    }
    let w = p.e[b] / ea;
    let dw = (p.de[b] * ea - p.e[b] * p.de[a]) / (ea * ea);
    Some((w.norm_sqr(), w * dw.conj()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CechCover {
    /// Transition annuli `a_k < |s| < b_k`, increasing; set `k` lives
    /// between transitions `k − 1` and `k`.
    pub transitions: Vec<(f64, f64)>,
}

impl Default for CechCover {
    fn default() -> Self {
        Self { transitions: vec![(0.6, 0.8), (1.3, 1.5), (2.4, 3.6)] }
    }
}

impl CechCover {
    pub fn len(&self) -> usize {
        self.transitions.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, i: usize, j: usize) -> bool {
        i.abs_diff(j) == 1 && i.max(j) < self.len()
    }

    /// Step `T_k` across transition `k` with its `∂̄`, a smoothstep in
    /// `|s|²` inside the unit disk and in `|1/s|²` outside it.
    fn step(&self, k: usize, p: &CurvePoint) -> (f64, C64) {
        let (a, b) = self.transitions[k];
        let zero = C64::default();
        if a < 1.0 {
            let Some((r2, dr2)) = radial(p, 0, 1) else { return (1.0, zero) };
            let w = b * b - a * a;
            let (t, dt) = smoothstep((r2 - a * a) / w);
            (t, dr2 * (dt / w))
        } else {
            let Some((r2, dr2)) = radial(p, 1, 0) else { return (0.0, zero) };
            let (ia, ib) = (1.0 / (a * a), 1.0 / (b * b));
            let w = ia - ib;
            let (t, dt) = smoothstep((ia - r2) / w);
            (t, dr2 * (-dt / w))
        }
    }

    /// `(ϑ_i, ∂̄ϑ_i)` for every set: `ϑ_i = T_{i−1} − T_i` with `T_{−1} = 1`
    /// and `T_N = 0`, so the sum telescopes to one.
    pub fn partition(&self, p: &CurvePoint) -> Vec<(f64, C64)> {
        let steps: Vec<(f64, C64)> = (0..self.transitions.len()).map(|k| self.step(k, p)).collect();
        (0..self.len())
            .map(|i| {
                let (hi, dhi) = if i == 0 { (1.0, C64::default()) } else { steps[i - 1] };
                let (lo, dlo) = steps.get(i).copied().unwrap_or((0.0, C64::default()));
                (hi - lo, dhi - dlo)
            })
            .collect()
    }

    /// `|s|` range of set `i` (open).
    pub fn range(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { 0.0 } else { self.transitions[i - 1].0 };
        let hi = self.transitions.get(i).map_or(f64::INFINITY, |t| t.1);
        (lo, hi)
    }
}

/// `Σ c s^a v^b` on an overlap, with `s, v` the chart-A coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapFunction {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<(i32, u32, C64)>,
}

impl OverlapFunction {
    pub fn eval(&self, p: &CurvePoint) -> C64 {
        let e0 = p.e[0];
        let (s, v) = (p.e[1] / e0, p.e[2] / e0);
        self.terms.iter().map(|&(a, b, c)| c * s.powi(a) * v.powu(b)).sum()
    }
}

/// Cocycle on [`CechCover`]; absent pairs are zero, `Θ_ji = −Θ_ij`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CechCocycle {
    pub entries: Vec<OverlapFunction>,
}

impl CechCocycle {
    /// Rejects entries on non-overlapping pairs and repeated pairs. With no
    /// triple overlaps the cocycle relation holds once these pass.
    pub fn check(&self, cover: &CechCover) -> Result<()> {
        let mut seen = Vec::new();
        for e in &self.entries {
            let key = (e.i.min(e.j), e.i.max(e.j));
            if !cover.overlaps(e.i, e.j) || seen.contains(&key) {
                let mass: f64 = e.terms.iter().map(|t| t.2.norm()).sum();
                return Err(Error::CocycleViolation(mass));
            }
            seen.push(key);
        }
        Ok(())
    }

    pub fn theta(&self, i: usize, j: usize, p: &CurvePoint) -> C64 {
        for e in &self.entries {
            if (e.i, e.j) == (i, j) {
                return e.eval(p);
            }
            if (e.j, e.i) == (i, j) {
                return -e.eval(p);
            }
        }
        C64::default()
    }
}

/// `Φ = Σ_k Θ_ik ∂̄ϑ_k` on `U_i`, with `i` the set of largest weight.
pub struct CechForm {
    pub cover: CechCover,
    pub cocycle: CechCocycle,
}

impl CurveForm for CechForm {
    fn ell(&self) -> i32 {
        0
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        let part = self.cover.partition(p);
        let i = (0..part.len()).max_by(|&a, &b| part[a].0.total_cmp(&part[b].0)).unwrap_or(0);
        part.iter()
            .enumerate()
            .filter(|(k, (_, d))| *k != i && *d != C64::default())
            .map(|(k, (_, d))| self.cocycle.theta(i, k, p) * d)
            .sum()
    }
}

pub fn cech_to_residual(cover: &CechCover, cocycle: &CechCocycle) -> Result<CechForm> {
    cocycle.check(cover)?;
    Ok(CechForm { cover: cover.clone(), cocycle: cocycle.clone() })
}

/// Tolerance on the overlap fit and the Cauchy–Riemann check.
pub const HOLOMORPHY_TOL: f64 = 1e-2;

/// Overlap differences below this fraction of the local primitives count as noise.
pub const NOISE_FLOOR: f64 = 1e-3;

/// Settings for [`residual_to_cech`].
#[derive(Clone, Debug)]
pub struct CechFit {
    /// Laurent range `|a| ≤ laurent` in `s`.
    pub laurent: i32,
    pub radii: Vec<f64>,
    pub angles: usize,
}

impl Default for CechFit {
    fn default() -> Self {
        Self { laurent: 5, radii: vec![2.7, 3.3], angles: 20 }
    }
}

/// Curve point over chart-A coordinate `s`, expressed in the chart that owns it.
fn owned(ctx: &CurveContext, p: CurvePoint) -> CurvePoint {
    if p.x.norm() <= ctx.switch_radius() {
        return p;
    }
    let (q, _) = reframe(&p, Chart::B).expect("finite point");
    ctx.model.point(Chart::B, q.x, q.v)
}

/// The cocycle `Θ_i − Θ_j` of local primitives.
///
/// On the three bounded sets `Θ = ζ₀^{−m} I[ζ₀^m φ]`, on the set at infinity
/// `Θ = ζ₁^{−m} I[ζ₁^m φ]`, with `m = d − 2` so that `L` vanishes and each is
/// an exact primitive where its divisor is nonzero. Only the outer overlap
/// carries a nonzero difference, which is fitted by a Laurent polynomial.
pub fn residual_to_cech(
    ctx: &CurveContext,
    cal: &KernelCalibration,
    cover: &CechCover,
    form: FormRef,
    fit: &CechFit,
) -> Result<CechCocycle> {
    if form.ell() != 0 {
        return Err(Error::HomogeneityMismatch(format!("Čech map of a twist-{} form", form.ell())));
    }
    let n = cover.len();
    let (lo, hi) = (cover.transitions[n - 2].0, cover.transitions[n - 2].1);
    let d = ctx.degree();
    let m = (d as i32 - 2).max(1);
    let mut points = Vec::new();
    for &r in &fit.radii {
        if r <= lo || r >= hi {
            return Err(Error::Config(format!("fit radius {r} outside the overlap ({lo}, {hi})")));
        }
        for k in 0..fit.angles {
            let s = C64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.5) / fit.angles as f64);
            for p in ctx.model.fiber(Chart::A, s)? {
                points.push(owned(ctx, p));
            }
        }
    }
    // Differences Θ_A − Θ_B and the size of the primitives themselves.
    let diff = |pts: &[CurvePoint]| -> Result<(Vec<C64>, f64)> {
        let ta = Twisted { form: form.clone(), m, index: 0 };
        let tb = Twisted { form: form.clone(), m, index: 1 };
        let ga = apply_i(ctx, cal, &ta, pts)?;
        let gb = apply_i(ctx, cal, &tb, pts)?;
        let mut size = 0.0;
        let values = pts
            .iter()
            .zip(ga.iter().zip(&gb))
            .map(|(p, (a, b))| {
                let (a, b) = (a.value * p.e[0].powi(-m), b.value * p.e[1].powi(-m));
                size += a.norm_sqr() + b.norm_sqr();
                a - b
            })
            .collect();
        Ok((values, size.sqrt()))
    };
    let (values, primitives) = diff(&points)?;
    let scale_v = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if scale_v == 0.0 {
        return Ok(CechCocycle::default());
    }
    // A difference far below the primitives is quadrature noise of an exact
    // form; its misfit is measured against that floor.
    let floor = scale_v.max(NOISE_FLOOR * primitives);

    // Least squares in the scaled basis (s/r₀)^a v^b.
    let r0 = 0.5 * (lo + hi);
    let basis: Vec<(i32, u32)> = (-fit.laurent..=fit.laurent).flat_map(|a| (0..d).map(move |b| (a, b))).collect();
    let coords = |p: &CurvePoint| (p.e[1] / p.e[0], p.e[2] / p.e[0]);
    let a_mat = DMatrix::from_fn(points.len(), basis.len(), |i, j| {
        let (s, v) = coords(&points[i]);
        let (a, b) = basis[j];
        (s / r0).powi(a) * (v / r0).powu(b)
    });
    let rhs = DVector::from_vec(values.clone());
    let svd = a_mat.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).map_err(|e| Error::Config(e.to_string()))?;
    let resid = (&a_mat * &sol - &rhs).norm() / floor;
    if resid > HOLOMORPHY_TOL {
        return Err(Error::OverlapNotHolomorphic(resid));
    }
    let terms: Vec<(i32, u32, C64)> = basis
        .iter()
        .zip(sol.iter())
        .map(|(&(a, b), c)| (a, b, c / r0.powi(a) / r0.powi(b as i32)))
        .collect();

    // Cauchy–Riemann check at two overlap points away from specials.
    for (k, r) in [(0usize, 0.5 * (lo + hi)), (1, 0.5 * (lo + hi))] {
        let s = C64::from_polar(r, 0.9 + 2.0 * k as f64);
        let p = owned(ctx, ctx.model.fiber(Chart::A, s)?[k % d as usize]);
        if ctx.model.specials.iter().any(|sp| base_distance(p.chart, p.x, sp.chart, sp.x) < 0.1) {
            continue;
        }
        let st = Stencil::new(&ctx.model, &p, 0.01)?;
        let (vals, _) = diff(&st.points)?;
        let (db, dd) = (st.dbar(&vals), st.d(&vals));
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let size = dd.norm() + peak.max(floor / (points.len() as f64).sqrt()) / r;
        if db.norm() > HOLOMORPHY_TOL * size {
            return Err(Error::OverlapNotHolomorphic(db.norm() / size));
        }
    }
    Ok(CechCocycle { entries: vec![OverlapFunction { i: n - 2, j: n - 1, terms }] })
}

/// The pairing-matrix rank of a family of residual forms.
pub fn class_rank(ctx: &CurveContext, forms: &[FormRef]) -> Result<usize> {
    let refs: Vec<&dyn CurveForm> = forms.iter().map(|f| f.as_ref()).collect();
    crate::residue::class_rank(ctx, &refs)
}

/// Convenience: the form of a cocycle as a shared reference.
pub fn cech_form_ref(cover: &CechCover, cocycle: &CechCocycle) -> Result<FormRef> {
    Ok(Arc::new(cech_to_residual(cover, cocycle)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::test_calibration;
    use crate::context::fixtures::{fermat3, nodal};
    use crate::curve::examples::fermat;
    use crate::fields::{ChartBump, ConjAdjoint, DbarOf, Local};
    use crate::poly::HomogeneousPolynomial;
    use crate::quad::GridSpec;
    use crate::residue::{dualizing_sections, residual_pairing};

    fn abs_s(p: &CurvePoint) -> f64 {
        radial(p, 0, 1).map_or(f64::INFINITY, |r| r.0.sqrt())
    }

    fn pairings(ctx: &CurveContext, f: &dyn CurveForm) -> Vec<C64> {
        dualizing_sections(&ctx.model, 0).iter().map(|s| residual_pairing(ctx, f, s).unwrap()).collect()
    }

    fn nontrivial(i: usize) -> CechCocycle {
        CechCocycle { entries: vec![OverlapFunction { i, j: i + 1, terms: vec![(-1, 2, C64::new(1.0, 0.0))] }] }
    }

    #[test]
    fn partition_sums_to_one() {
        let cover = CechCover::default();
        let ctx = fermat3();
        for s in ctx.set.samples.iter().step_by(37) {
            let part = cover.partition(&s.point);
            let sum: f64 = part.iter().map(|p| p.0).sum();
            let dsum: C64 = part.iter().map(|p| p.1).sum();
            assert!((sum - 1.0).abs() < 1e-12 && dsum.norm() < 1e-12);
            let r = abs_s(&s.point);
            for (i, (w, _)) in part.iter().enumerate() {
                let (lo, hi) = cover.range(i);
                if *w > 0.0 {
                    assert!(r > lo && r < hi, "set {i} weight {w} at |s| = {r}");
                }
            }
        }
    }

    #[test]
    fn partition_derivative_matches_differences() {
        let cover = CechCover::default();
        let ctx = fermat3();
        let p = ctx.model.fiber(Chart::A, C64::new(0.5, 0.45)).unwrap()[0];
        for i in 0..cover.len() {
            let d = crate::dbar::numerical_dbar(&ctx.model, &p, 1e-3, |q| C64::new(cover.partition(q)[i].0, 0.0)).unwrap();
            let exact = cover.partition(&p)[i].1;
            assert!((d - exact).norm() < 1e-7 * (1.0 + exact.norm()), "{i}: {d} vs {exact}");
        }
    }

    #[test]
    fn invalid_cocycles_are_rejected() {
        let cover = CechCover::default();
        let bad = CechCocycle { entries: vec![OverlapFunction { i: 0, j: 2, terms: vec![(0, 0, C64::new(1.0, 0.0))] }] };
        assert!(matches!(cech_to_residual(&cover, &bad), Err(Error::CocycleViolation(_))));
        let twice = CechCocycle { entries: vec![nontrivial(2).entries[0].clone(), nontrivial(2).entries[0].clone()] };
        assert!(matches!(cech_to_residual(&cover, &twice), Err(Error::CocycleViolation(_))));
        let zero = cech_to_residual(&cover, &CechCocycle::default()).unwrap();
        let p = fermat3().model.fiber(Chart::A, C64::new(0.7, 0.0)).unwrap()[0];
        assert_eq!(zero.coeff(&p), C64::default());
    }

    #[test]
    fn coboundaries_pair_to_zero() {
        let ctx = fermat3();
        let cover = CechCover::default();
        // θ₀ = s, θ₁ = v, θ₂ = s², θ₃ = v/s on their sets.
        let theta: [Vec<(i32, u32, C64)>; 4] = [
            vec![(1, 0, C64::new(1.0, 0.0))],
            vec![(0, 1, C64::new(1.0, 0.0))],
            vec![(2, 0, C64::new(0.0, 1.0))],
            vec![(-1, 1, C64::new(0.5, 0.0))],
        ];
        let entries = (0..3)
            .map(|i| {
                let mut terms = theta[i].clone();
                terms.extend(theta[i + 1].iter().map(|&(a, b, c)| (a, b, -c)));
                OverlapFunction { i, j: i + 1, terms }
            })
            .collect();
        let form = cech_to_residual(&cover, &CechCocycle { entries }).unwrap();
        let s = &dualizing_sections(&ctx.model, 0)[0];
        let bound = 4.0 * std::f64::consts::PI * ctx.norm(&form) * crate::residue::section_norm(ctx, s);
        let p = residual_pairing(ctx, &form, s).unwrap();
        assert!(p.norm() <= 1e-3 * bound, "{p} vs {bound}");
        assert_eq!(class_rank(ctx, &[Arc::new(form)]).unwrap(), 0);
    }

    #[test]
    fn nontrivial_cocycle_is_stable() {
        let cover = CechCover { transitions: vec![(0.8, 1.2), (2.4, 3.6)] };
        let form = cech_to_residual(&cover, &nontrivial(1)).unwrap();
        let fine = pairings(fermat3(), &form)[0];
        let coarse_ctx = CurveContext::new(fermat(3), &GridSpec::default().scaled(0.75)).unwrap();
        let coarse = pairings(&coarse_ctx, &form)[0];
        // Stokes on the outer annulus: Σ_sheets ∮ (v²/s)/(3v²) ds = 2πi.
        let exact = 4.0 * std::f64::consts::PI.powi(2);
        for v in [fine, coarse] {
            assert!((v.norm() - exact).abs() < 1e-3 * exact, "{v} vs {exact}");
        }
        assert!((fine - coarse).norm() < 1e-3 * fine.norm(), "{fine} {coarse}");
        let form: FormRef = Arc::new(form);
        assert_eq!(class_rank(fermat3(), std::slice::from_ref(&form)).unwrap(), 1);
        // Arithmetic genus one survives the node.
        assert_eq!(class_rank(nodal(), &[form]).unwrap(), 1);
    }

    #[test]
    fn round_trip_preserves_pairings() {
        let cal = test_calibration();
        let cover = CechCover::default();
        for ctx in [fermat3(), nodal()] {
            let q = HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap();
            let w: FormRef = Arc::new(ConjAdjoint { q, scale: C64::new(1.0, 0.0) });
            let cocycle = residual_to_cech(ctx, cal, &cover, w.clone(), &CechFit::default()).unwrap();
            let back = cech_to_residual(&cover, &cocycle).unwrap();
            let (a, b) = (pairings(ctx, w.as_ref())[0], pairings(ctx, &back)[0]);
            assert!((a - b).norm() < 1e-2 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn exact_forms_give_trivial_cocycles() {
        let ctx = fermat3();
        let cal = test_calibration();
        let cover = CechCover::default();
        let g: FormRef = Arc::new(DbarOf(Arc::new(Local(ChartBump::new(Chart::A, C64::new(0.2, 0.5), 0.6)))));
        let cocycle = residual_to_cech(ctx, cal, &cover, g, &CechFit::default()).unwrap();
        let back: FormRef = Arc::new(cech_to_residual(&cover, &cocycle).unwrap());
        assert_eq!(class_rank(ctx, &[back]).unwrap(), 0);
        let zero = residual_to_cech(ctx, cal, &cover, Arc::new(crate::fields::ZeroForm(0)), &CechFit::default()).unwrap();
        assert!(zero.entries.is_empty());
    }

    #[test]
    fn noise_level_differences_are_accepted() {
        // ζ₀ζ₁ (ζ̄₀dζ̄₂ − ζ̄₂dζ̄₀)/|ζ|⁴ is exact on the Fermat cubic; its overlap
        // difference is quadrature noise, a few 1e-6 of the primitives.
        let ctx = fermat3();
        let cal = test_calibration();
        let cover = CechCover::default();
        let h = crate::fields::FsRational::new(0, vec![([1, 1, 0], [0, 0, 0], C64::new(1.0, 0.0))]).unwrap();
        let f: FormRef = Arc::new(crate::fields::FsForm { h, i: 0, j: 2 });
        let cocycle = residual_to_cech(ctx, cal, &cover, f.clone(), &CechFit::default()).unwrap();
        let back = cech_form_ref(&cover, &cocycle).unwrap();
        let sec = &dualizing_sections(&ctx.model, 0)[0];
        let bound = 4.0 * std::f64::consts::PI * ctx.norm(f.as_ref()) * crate::residue::section_norm(ctx, sec);
        let (p, q) = (residual_pairing(ctx, f.as_ref(), sec).unwrap(), residual_pairing(ctx, back.as_ref(), sec).unwrap());
        assert!(p.norm() < 1e-6 * bound && (p - q).norm() < 1e-6 * bound, "{p} {q} {bound}");
        assert_eq!(class_rank(ctx, &[f]).unwrap(), 0);
    }
}
