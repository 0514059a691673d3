//! `∂̄g = φ` on the affine curve `ζ₀ ≠ 0`, with growth `|g| ≤ C|ζ₀|^{−ℓ}`.

use crate::calibration::KernelCalibration;
use crate::context::CurveContext;
use crate::curve::{base_distance, Chart, CurvePoint, PlaneCurveModel};
use crate::dbar::{probe_points, Stencil};
use crate::error::{Error, Result};
use crate::fields::{bump_profile, reframe, CurveForm, CurveFunction, DbarOf, FormRef, FormSum, Twisted};
use crate::kernels::apply_i;
use crate::quad::{gauss_legendre, CauchyGreenDisk};
use crate::residue::{dualizing_sections, residual_pairing};
use crate::C64;
use serde::{Deserialize, Serialize};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::TAU;
use std::sync::Arc;

/// One cycle of sheets over `x_B = 0`, uniformized by `x_B = u^c`.
#[derive(Clone, Debug)]
pub struct InfinityBranch {
    pub cycle: usize,
    /// Taylor coefficients of `v(u)`.
    pub coeffs: Vec<C64>,
    /// Radius of the `u`-disk.
    pub radius: f64,
}

impl InfinityBranch {
    pub fn series(&self, u: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::default(), |acc, c| acc * u + c)
    }

    /// The curve point at `u`, taking the fiber root nearest the series.
    ///
    /// Right at infinity the roots coalesce and the series itself is used.
    pub fn point(&self, model: &PlaneCurveModel, u: C64) -> CurvePoint {
        let x = u.powu(self.cycle as u32);
        let guess = self.series(u);
        let v = match model.fiber_values(Chart::B, x) {
            Ok(roots) => roots
                .into_iter()
                .min_by(|a, b| (a - guess).norm().total_cmp(&(b - guess).norm()))
                .unwrap_or(guess),
            Err(_) => guess,
        };
        model.point(Chart::B, x, v)
    }

    /// `u` with `point(u) = p`, if `p` lies on this branch inside its disk.
    pub fn locate(&self, p: &CurvePoint) -> Option<(C64, f64)> {
        if p.chart != Chart::B || p.x.norm() >= self.radius.powi(self.cycle as i32) {
            return None;
        }
        let c = self.cycle as u32;
        let root = if p.x.norm() == 0.0 { C64::default() } else { p.x.powf(1.0 / c as f64) };
        (0..c)
            .map(|k| {
                let u = root * C64::from_polar(1.0, TAU * k as f64 / c as f64);
                (u, (self.series(u) - p.v).norm())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Disk radius in `x_B` around infinity, clear of the other special points.
pub fn infinity_radius(model: &PlaneCurveModel) -> f64 {
    let zero = C64::default();
    model
        .specials
        .iter()
        .map(|s| base_distance(Chart::B, zero, s.chart, s.x))
        .filter(|&d| d > 1e-9)
        .fold(0.35f64, |r, d| r.min(0.5 * d))
}

/// Branches of the curve at its points at infinity.
pub fn infinity_branches(model: &PlaneCurveModel) -> Result<Vec<InfinityBranch>> {
    let rho = infinity_radius(model);
    let circle = |turns: usize, steps: usize| -> Vec<C64> {
        (0..=steps).map(|k| C64::from_polar(rho, TAU * turns as f64 * k as f64 / steps as f64)).collect()
    };
    let roots = model.fiber_values(Chart::B, C64::new(rho, 0.0))?;
    let nearest = |v: C64| {
        (0..roots.len()).min_by(|&a, &b| (roots[a] - v).norm().total_cmp(&(roots[b] - v).norm())).unwrap()
    };
    let one_turn = circle(1, 512);
    let perm: Vec<usize> = roots
        .iter()
        .map(|&v| Ok(nearest(model.continue_sheet(Chart::B, &one_turn, v)?.last().unwrap().v)))
        .collect::<Result<_>>()?;
    let mut seen = vec![false; roots.len()];
    let mut out = Vec::new();
    for start in 0..roots.len() {
        if seen[start] {
            continue;
        }
        let mut c = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            c += 1;
        }
        // Sample v on |u| = ρ^{1/c}: c turns in x.
        let m = 64 * c;
        let path = circle(c, 8 * m);
        let track = model.continue_sheet(Chart::B, &path, roots[start])?;
        let vals: Vec<C64> = (0..m).map(|j| track[8 * j].v).collect();
        let radius = rho.powf(1.0 / c as f64);
        let coeffs = (0..m / 2)
            .map(|k| {
                let s: C64 = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -TAU * (k * j) as f64 / m as f64))
                    .sum();
                s / m as f64 / radius.powi(k as i32)
            })
            .collect();
        out.push(InfinityBranch { cycle: c, coeffs, radius });
    }
    Ok(out)
}

/// Total degree of the polynomial carrying a local solution.
const LOCAL_DEGREE: u32 = 16;

/// `χ(|u|/a)·P(u, ū)` on one branch, with `P` a least-squares fit of the
/// Cauchy–Green solution of `∂̄h = ψ` on the branch disk, in chart B.
struct BranchSolve {
    branch: InfinityBranch,
    ell: i32,
    /// Support radius `a` in `u`.
    support: f64,
    /// `(j, k, c)` of `c (u/a)^j (ū/a)^k`.
    poly: Vec<(u32, u32, C64)>,
    /// Relative misfit of `P` at the fit nodes.
    fit_residual: f64,
}

impl BranchSolve {
    fn new(model: &PlaneCurveModel, branch: InfinityBranch, psi: FormRef) -> Result<Self> {
        let support = 0.85 * branch.radius;
        let f = |u: C64| source(model, &branch, psi.as_ref(), u);
        let prepared = CauchyGreenDisk::new(C64::default(), branch.radius).prepare(&f);
        let (gx, _) = gauss_legendre(14);
        let nodes: Vec<C64> = gx
            .iter()
            .flat_map(|&x| {
                let r = 0.5 * support * (x + 1.0);
                (0..48).map(move |k| C64::from_polar(r, TAU * (k as f64 + 0.5) / 48.0))
            })
            .collect();
        let h: Vec<C64> = nodes.iter().map(|&u| prepared.eval(&f, u)).collect();
        let terms: Vec<(u32, u32)> =
            (0..=LOCAL_DEGREE).flat_map(|n| (0..=n).map(move |k| (n - k, k))).collect();
        let a = DMatrix::from_fn(nodes.len(), terms.len(), |i, t| {
            let w = nodes[i] / support;
            w.powu(terms[t].0) * w.conj().powu(terms[t].1)
        });
        let rhs = DVector::from_vec(h);
        let sol = a.clone().svd(true, true).solve(&rhs, 1e-13).map_err(|e| Error::Config(e.to_string()))?;
        let scale = rhs.norm().max(1e-300);
        let fit_residual = (&a * &sol - &rhs).norm() / scale;
        let poly = terms.iter().zip(sol.iter()).map(|(&(j, k), &c)| (j, k, c)).collect();
        Ok(Self { branch, ell: psi.ell(), support, poly, fit_residual })
    }

    /// `(P, ∂P/∂ū, ∂P/∂u)` at `u`.
    fn p(&self, u: C64) -> (C64, C64, C64) {
        let w = u / self.support;
        let wb = w.conj();
        let (mut v, mut db, mut d) = (C64::default(), C64::default(), C64::default());
        for &(j, k, c) in &self.poly {
            v += c * w.powu(j) * wb.powu(k);
            if k > 0 {
                db += c * k as f64 * w.powu(j) * wb.powu(k - 1);
            }
            if j > 0 {
                d += c * j as f64 * w.powu(j - 1) * wb.powu(k);
            }
        }
        (v, db / self.support, d / self.support)
    }

    /// `(χP, ∂̄(χP), ∂(χP))` in chart B.
    fn local(&self, p: &CurvePoint) -> (C64, C64, C64) {
        let zero = Default::default();
        let Some((u, miss)) = self.branch.locate(p) else { return zero };
        if miss > 1e-6 * (1.0 + p.v.norm()) || u.norm() >= self.support {
            return zero;
        }
        let a = self.support;
        let (chi, dchi) = bump_profile(u.norm() / a);
        let c = self.branch.cycle as u32;
        let dudx = 1.0 / (c as f64 * u.powu(c - 1));
        let (h, hb, hd) = self.p(u);
        // ∂χ/∂ū = β'/a · u/(2|u|), ∂χ/∂u its conjugate.
        let radial = if u.norm() > 0.0 { dchi / (2.0 * a * u.norm()) } else { 0.0 };
        let dbar = (chi * hb + h * radial * u) * dudx.conj();
        let d = (chi * hd + h * radial * u.conj()) * dudx;
        (chi * h, dbar, d)
    }

    /// Same triple at any point, through the twist rule.
    fn eval(&self, p: &CurvePoint) -> (C64, C64, C64) {
        let Some((q, dx)) = reframe(p, Chart::B) else { return Default::default() };
        let (g, gb, gd) = self.local(&q);
        let s = q.e[p.chart.alpha()].powi(-self.ell);
        (s * g, s * gb * dx.conj(), s * gd * dx)
    }
}

/// `ψ_B · conj(dx/du)`, the right-hand side in the uniformizer.
fn source(model: &PlaneCurveModel, branch: &InfinityBranch, psi: &dyn CurveForm, u: C64) -> C64 {
    let c = branch.cycle as u32;
    let dxdu = c as f64 * u.powu(c - 1);
    psi.coeff(&branch.point(model, u)) * dxdu.conj()
}

impl CurveFunction for BranchSolve {
    fn ell(&self) -> i32 {
        self.ell
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

/// Growth of `|g|·|ζ₀|^ℓ` over samples with `|ζ₀|/|ζ| ∈ [1e−3, 1e−1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub sup: f64,
    pub median: f64,
    pub samples: usize,
    /// `sup ≤ 10·median`.
    pub bounded: bool,
}

/// Finite-difference comparison of `∂̄g` with `φ` at one probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineProbe {
    pub chart: Chart,
    pub x: C64,
    pub v: C64,
    pub g: C64,
    pub dbar_g: C64,
    pub phi: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineSolveResult {
    pub ell: i32,
    pub probes: Vec<AffineProbe>,
    /// RMS of `∂̄g − φ` over the probes relative to the RMS of `φ`.
    pub residual: f64,
    pub growth: Option<Growth>,
    /// Norm of the twisted pairing vector that is subtracted; zero when
    /// `ℓ > d − 3`.
    pub h1_norm: f64,
}

/// Where to check a solution.
#[derive(Clone, Debug)]
pub struct AffineCheck {
    pub probes: Vec<CurvePoint>,
    pub h: f64,
    pub growth: bool,
}

impl AffineCheck {
    pub fn seeded(ctx: &CurveContext, n: usize, seed: u64) -> Result<Self> {
        let probes = probe_points(&ctx.model, n, seed, 0.15)?
            .into_iter()
            .filter(|p| p.chart == Chart::A)
            .collect();
        Ok(Self { probes, h: 0.01, growth: true })
    }
}

/// A solution `g = ζ₀^{−ℓ}(I[ψ̃] + Σ g^{(j)})` ready for evaluation.
pub struct AffineSolution {
    pub ell: i32,
    pub form: FormRef,
    corrected: FormRef,
    locals: Vec<Arc<BranchSolve>>,
}

impl AffineSolution {
    /// Worst relative misfit of the polynomial local solutions.
    pub fn local_fit_residual(&self) -> f64 {
        self.locals.iter().map(|l| l.fit_residual).fold(0.0, f64::max)
    }

    /// Values of `g` at points with `ζ₀ ≠ 0`.
    pub fn values(&self, ctx: &CurveContext, cal: &KernelCalibration, targets: &[CurvePoint]) -> Result<Vec<C64>> {
        let gt = apply_i(ctx, cal, self.corrected.as_ref(), targets)?;
        Ok(targets
            .iter()
            .zip(gt)
            .map(|(p, g)| {
                let local: C64 = self.locals.iter().map(|l| l.value(p)).sum();
                (g.value + local) * p.e[0].powi(-self.ell)
            })
            .collect())
    }
}

fn check_homogeneity(ctx: &CurveContext, form: &dyn CurveForm, ell: i32) -> Result<()> {
    if form.ell() != 0 {
        return Err(Error::HomogeneityMismatch(format!("affine solve of a twist-{} form", form.ell())));
    }
    let d = ctx.degree();
    if ell <= d as i32 - 3 {
        return Err(Error::HomogeneityTooLow { ell, degree: d });
    }
    Ok(())
}

/// Bound ratio below which `ζ₀^ℓφ` counts as extending over infinity.
pub const EXTENSION_RATIO: f64 = 1e2;

/// `max |ψ|` close to infinity against `max |ψ|` on the outer half of the
/// branch disks.
fn extension_ratio(ctx: &CurveContext, branches: &[InfinityBranch], psi: &dyn CurveForm) -> Result<f64> {
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for b in branches {
        for scale in [1e-2, 3e-2, 0.6, 0.9] {
            for k in 0..16 {
                let u = C64::from_polar(b.radius * scale, TAU * (k as f64 + 0.5) / 16.0);
                let m = psi.coeff(&b.point(&ctx.model, u)).norm();
                if scale < 0.5 {
                    inner = inner.max(m);
                } else {
                    outer = outer.max(m);
                }
            }
        }
    }
    Ok(inner / outer.max(1e-300))
}

/// The growth-controlled affine solver.
///
/// Requires `ℓ > d − 3` and `ζ₀^ℓφ` bounded near infinity.
pub fn affine_solution(ctx: &CurveContext, form: FormRef, ell: i32) -> Result<AffineSolution> {
    check_homogeneity(ctx, form.as_ref(), ell)?;
    let psi: FormRef = Arc::new(Twisted { form: form.clone(), m: ell, index: 0 });
    let branches = infinity_branches(&ctx.model)?;
    let ratio = extension_ratio(ctx, &branches, psi.as_ref())?;
    if ratio > EXTENSION_RATIO {
        return Err(Error::ExtensionUnbounded(ratio));
    }
    let locals: Vec<Arc<BranchSolve>> = branches
        .into_iter()
        .map(|b| BranchSolve::new(&ctx.model, b, psi.clone()).map(Arc::new))
        .collect::<Result<_>>()?;
    let mut parts = vec![(C64::new(1.0, 0.0), psi)];
    for l in &locals {
        parts.push((C64::new(-1.0, 0.0), Arc::new(DbarOf(l.clone())) as FormRef));
    }
    let corrected: FormRef = Arc::new(FormSum::new(parts)?);
    Ok(AffineSolution { ell, form, corrected, locals })
}

/// The compact-support solver `g = ζ₀^{−ℓ}·I[ζ₀^ℓφ − H₁[ζ₀^ℓφ]]`.
///
/// `H₁` is the component detected by dualizing sections at twist `ℓ`, of
/// which there are none for `ℓ > d − 3`; its size is reported.
pub fn compact_solution(ctx: &CurveContext, form: FormRef, ell: i32) -> Result<(AffineSolution, f64)> {
    check_homogeneity(ctx, form.as_ref(), ell)?;
    let rho = infinity_radius(&ctx.model);
    let near = ctx
        .set
        .samples
        .iter()
        .filter(|s| s.point.chart == Chart::B && s.point.x.norm() < 0.5 * rho)
        .map(|s| form.coeff(&s.point).norm())
        .fold(0.0, f64::max);
    if near > 0.0 {
        return Err(Error::SupportTouchesInfinity);
    }
    let psi: FormRef = Arc::new(Twisted { form: form.clone(), m: ell, index: 0 });
    let sections = dualizing_sections(&ctx.model, ell);
    let h1_norm = sections
        .iter()
        .map(|s| residual_pairing(ctx, psi.as_ref(), s).map(|p| p.norm_sqr()))
        .sum::<Result<f64>>()?
        .sqrt()
        // An empty float sum is −0.
        .abs();
    Ok((AffineSolution { ell, form, corrected: psi, locals: Vec::new() }, h1_norm))
}

/// Checks a solution by finite differences and, optionally, its growth.
pub fn check_solution(
    ctx: &CurveContext,
    cal: &KernelCalibration,
    sol: &AffineSolution,
    check: &AffineCheck,
    h1_norm: f64,
) -> Result<AffineSolveResult> {
    let stencils: Vec<Stencil> =
        check.probes.iter().map(|p| Stencil::new(&ctx.model, p, check.h)).collect::<Result<_>>()?;
    let mut targets = Vec::with_capacity(9 * stencils.len());
    for st in &stencils {
        targets.push(st.center);
        targets.extend_from_slice(&st.points);
    }
    let vals = sol.values(ctx, cal, &targets)?;
    let (mut num, mut den) = (0.0, 0.0);
    let mut probes = Vec::with_capacity(stencils.len());
    for (k, st) in stencils.iter().enumerate() {
        let p = &st.center;
        let phi = sol.form.coeff(p);
        let dbar_g = st.dbar(&vals[9 * k + 1..9 * k + 9]);
        num += (dbar_g - phi).norm_sqr();
        den += phi.norm_sqr();
        probes.push(AffineProbe { chart: p.chart, x: p.x, v: p.v, g: vals[9 * k], dbar_g, phi });
    }
    let residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    let growth = if check.growth { Some(growth(ctx, cal, sol)?) } else { None };
    Ok(AffineSolveResult { ell: sol.ell, probes, residual, growth, h1_norm })
}

/// Growth statistic on each infinity branch.
pub fn growth(ctx: &CurveContext, cal: &KernelCalibration, sol: &AffineSolution) -> Result<Growth> {
    let mut targets = Vec::new();
    for b in infinity_branches(&ctx.model)? {
        for j in 0..5 {
            // |x_B| from 1e-3 to 1e-1, so that |ζ₀|/|ζ| spans the same decades.
            let x = 10f64.powf(-3.0 + 0.5 * j as f64);
            for k in 0..6 {
                let u = C64::from_polar(x.powf(1.0 / b.cycle as f64), TAU * (k as f64 + 0.3) / 6.0);
                let p = b.point(&ctx.model, u);
                let ratio = p.e[0].norm() * p.rho();
                if (1e-3..=1e-1).contains(&ratio) {
                    targets.push(p);
                }
            }
        }
    }
    let vals = sol.values(ctx, cal, &targets)?;
    let mut stat: Vec<f64> = targets
        .iter()
        .zip(&vals)
        .map(|(p, g)| g.norm() * (p.e[0].norm() * p.rho()).powi(sol.ell))
        .collect();
    stat.sort_by(f64::total_cmp);
    let sup = stat.last().copied().unwrap_or(0.0);
    let median = stat.get(stat.len() / 2).copied().unwrap_or(0.0);
    Ok(Growth { sup, median, samples: stat.len(), bounded: sup <= 10.0 * median || sup == 0.0 })
}

/// Spread of `g_a − g_b` about its mean over the targets, relative to `max |g_b|`.
pub fn agreement(
    ctx: &CurveContext,
    cal: &KernelCalibration,
    a: &AffineSolution,
    b: &AffineSolution,
    targets: &[CurvePoint],
) -> Result<f64> {
    let ga = a.values(ctx, cal, targets)?;
    let gb = b.values(ctx, cal, targets)?;
    let gap: Vec<C64> = ga.iter().zip(&gb).map(|(x, y)| x - y).collect();
    let mean = gap.iter().sum::<C64>() / gap.len().max(1) as f64;
    let spread = gap.iter().map(|g| (g - mean).norm()).fold(0.0, f64::max);
    let scale = gb.iter().map(|g| g.norm()).fold(0.0, f64::max);
    Ok(if scale > 0.0 { spread / scale } else { spread })
}

/// [`affine_solution`] followed by [`check_solution`].
pub fn solve_affine(
    ctx: &CurveContext,
    cal: &KernelCalibration,
    form: FormRef,
    ell: i32,
    check: &AffineCheck,
) -> Result<AffineSolveResult> {
    let sol = affine_solution(ctx, form, ell)?;
    check_solution(ctx, cal, &sol, check, 0.0)
}

/// [`compact_solution`] followed by [`check_solution`].
pub fn solve_compact(
    ctx: &CurveContext,
    cal: &KernelCalibration,
    form: FormRef,
    ell: i32,
    check: &AffineCheck,
) -> Result<AffineSolveResult> {
    let (sol, h1) = compact_solution(ctx, form, ell)?;
    check_solution(ctx, cal, &sol, check, h1)
}

#[cfg(test)]
mod tests;
