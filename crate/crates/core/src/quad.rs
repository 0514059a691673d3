//! Quadrature on the curve: ambient polar rules on the two base charts, smooth
//! partition-of-unity patches around special points and targets, and the
//! planar Cauchy–Green solver.

use crate::curve::{base_distance, Chart, CurvePoint, PlaneCurveModel, SpecialKind};
use crate::error::{Error, Result};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    x.reverse();
    w.reverse();
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// `C^∞` step: 0 for `y ≤ 0`, 1 for `y ≥ 1`.
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / y).exp();
        let b = (-1.0 / (1.0 - y)).exp();
        a / (a + b)
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / y).exp();
        let b = (-1.0 / (1.0 - y)).exp();
        let da = a / (y * y);
        let db = -b / ((1.0 - y) * (1.0 - y));
        (da * b - a * db) / ((a + b) * (a + b))
    }
}

/// Patch cutoff: 1 for `r ≤ ρ/2`, 0 for `r ≥ ρ`.
#[inline]
pub fn cutoff(r: f64, rho: f64) -> f64 {
    smooth_step(2.0 * (rho - r) / rho)
}

/// Discretization parameters shared by all integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub switch_radius: f64,
    pub radial_panels: usize,
    pub outer_panels: usize,
    pub panel_order: usize,
    pub angular: usize,
    /// Radius past which the angular count grows in proportion.
    pub angular_radius: f64,
    pub patch_order: usize,
    pub patch_angular: usize,
    pub patch_radius: f64,
    pub target_radius: f64,
    /// Targets closer than this to a branch point or node are rejected.
    pub branch_exclusion: f64,
    /// Kept for reporting; the polar patches drop no mass.
    pub delta_min: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            switch_radius: 2.0,
            radial_panels: 16,
            outer_panels: 6,
            panel_order: 8,
            angular: 128,
            angular_radius: 2.0 / 3.0,
            patch_order: 20,
            patch_angular: 48,
            patch_radius: 0.5,
            target_radius: 0.3,
            branch_exclusion: 1e-6,
            delta_min: 1e-4,
        }
    }
}

impl GridSpec {
    /// Uniformly refined or coarsened copy.
    pub fn scaled(&self, s: f64) -> Self {
        let sc = |n: usize| ((n as f64 * s).round() as usize).max(2);
        let even = |n: usize| sc(n).div_ceil(2) * 2;
        Self {
            radial_panels: sc(self.radial_panels),
            outer_panels: sc(self.outer_panels),
            angular: even(self.angular),
            patch_order: sc(self.patch_order),
            patch_angular: even(self.patch_angular),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [self.switch_radius, self.angular_radius, self.patch_radius, self.target_radius, self.branch_exclusion, self.delta_min];
        if pos.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Config("grid tolerances must be positive".into()));
        }
        if !self.angular.is_multiple_of(2) || !self.patch_angular.is_multiple_of(2) {
            return Err(Error::Config("angular counts must be even".into()));
        }
        if self.radial_panels == 0 || self.outer_panels == 0 || self.panel_order == 0 || self.patch_order == 0 {
            return Err(Error::Config("grid counts must be positive".into()));
        }
        Ok(())
    }

    pub fn hash_hex(&self) -> String {
        let s = serde_json::to_string(self).expect("grid spec serializes");
        crate::poly::hex_string(&Sha256::digest(s.as_bytes()))
    }
}

/// One quadrature node on the curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub point: CurvePoint,
    /// Area weight for `dA` in the sample's base coordinate.
    pub weight: f64,
    /// Weight of the half-resolution angular rule.
    pub coarse: f64,
    pub sheet: usize,
}

impl CurveSample {
    /// `|ζ| = 1` representative.
    pub fn sphere(&self) -> [C64; 3] {
        self.point.sphere()
    }

    pub fn leray(&self) -> C64 {
        1.0 / self.point.f_v
    }
}

#[derive(Clone, Copy, Debug)]
struct BaseNode {
    chart: Chart,
    x: C64,
    w_raw: f64,
    wc_raw: f64,
    /// Weight fraction left by the special-point patches.
    keep: f64,
    /// Index of the first sample of this node, if its weight was nonzero.
    first: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub chart: Chart,
    pub center: C64,
    pub radius: f64,
    pub power: usize,
    pub kind: SpecialKind,
    pub start: usize,
    pub end: usize,
}

/// A full quadrature rule for the curve.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub samples: Vec<CurveSample>,
    pub patches: Vec<Patch>,
    nodes: Vec<BaseNode>,
    pub grid: GridSpec,
    degree: usize,
    cache: Arc<Mutex<RuleCache>>,
}

/// Rebuilt patches and fibers of skipped nodes, shared between target rules.
#[derive(Debug, Default)]
struct RuleCache {
    patches: HashMap<(usize, u32), Arc<Vec<CurveSample>>>,
    fibers: HashMap<usize, Arc<Vec<CurvePoint>>>,
}

/// Shrunken patch radii are rounded down to `r₀·2^{−k/4}` so that nearby
/// targets share rebuilt patches.
fn radius_step(r0: f64, limit: f64) -> u32 {
    if r0 <= limit {
        return 0;
    }
    (4.0 * (r0 / limit).log2()).ceil().max(1.0) as u32
}

/// Result of a quadrature with its resolution-difference error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: C64,
    pub error: f64,
    pub dropped: f64,
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[C64]) -> C64 {
    if v.len() <= 32 {
        let mut s = C64::default();
        for x in v {
            s += x;
        }
        s
    } else {
        let m = v.len() / 2;
        pairwise_sum(&v[..m]) + pairwise_sum(&v[m..])
    }
}

pub fn pairwise_sum_real(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let m = v.len() / 2;
        pairwise_sum_real(&v[..m]) + pairwise_sum_real(&v[m..])
    }
}

fn polar_nodes(panels: usize, order: usize, radius: f64) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let h = radius / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        for (x, w) in gx.iter().zip(&gw) {
            out.push((h * (p as f64 + 0.5 * (x + 1.0)), 0.5 * h * w));
        }
    }
    out
}

struct PatchSpec {
    chart: Chart,
    center: C64,
    radius: f64,
    power: usize,
    kind: SpecialKind,
}

impl SampleSet {
    /// Ambient grid plus one patch per special point.
    pub fn build(model: &PlaneCurveModel, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let specs = special_patches(model, grid);
        let mut nodes = Vec::new();
        let mut rays = Vec::new();
        let r = grid.switch_radius;
        for (chart, panels, radius) in [(Chart::A, grid.radial_panels, r), (Chart::B, grid.outer_panels, 1.0 / r)] {
            let radial = polar_nodes(panels, grid.panel_order, radius);
            let h = radius / panels as f64;
            // Panels are grouped by angular count, which grows linearly past
            // `angular_radius` to keep the node spacing roughly uniform.
            let counts: Vec<usize> = (0..panels)
                .map(|p| {
                    let grow = (h * (p + 1) as f64 / grid.angular_radius).max(1.0);
                    ((grid.angular as f64 * grow / 2.0).ceil() as usize) * 2
                })
                .collect();
            let mut p0 = 0;
            while p0 < panels {
                let n = counts[p0];
                let p1 = (p0..panels).find(|&p| counts[p] != n).unwrap_or(panels);
                let group = &radial[p0 * grid.panel_order..p1 * grid.panel_order];
                let dth = 2.0 * PI / n as f64;
                for j in 0..n {
                    let th = dth * (j as f64 + 0.5);
                    let coarse_factor = if j % 2 == 0 { 2.0 } else { 0.0 };
                    let start = nodes.len();
                    for &(rr, wr) in group {
                        let x = C64::from_polar(rr, th);
                        let mut keep = 1.0;
                        for s in &specs {
                            keep -= cutoff(base_distance(chart, x, s.chart, s.center), s.radius);
                        }
                        let w = wr * rr * dth;
                        nodes.push(BaseNode {
                            chart,
                            x,
                            w_raw: w,
                            wc_raw: w * coarse_factor,
                            keep: keep.max(0.0),
                            first: None,
                        });
                    }
                    rays.push(start..nodes.len());
                }
                p0 = p1;
            }
        }
        let fibers: Vec<Result<Vec<CurvePoint>>> = nodes
            .par_iter()
            .map(|n| if n.keep > 0.0 { model.fiber(n.chart, n.x) } else { Ok(Vec::new()) })
            .collect();
        let mut samples = Vec::new();
        for (n, f) in nodes.iter_mut().zip(fibers) {
            let pts = f?;
            if pts.is_empty() {
                continue;
            }
            n.first = Some(samples.len());
            for (sheet, p) in pts.into_iter().enumerate() {
                samples.push(CurveSample { point: p, weight: n.w_raw * n.keep, coarse: n.wc_raw * n.keep, sheet });
            }
        }
        let degree = model.degree() as usize;
        let mut patches = Vec::new();
        for s in &specs {
            let start = samples.len();
            samples.extend(patch_samples(model, grid, s)?);
            patches.push(Patch {
                chart: s.chart,
                center: s.center,
                radius: s.radius,
                power: s.power,
                kind: s.kind,
                start,
                end: samples.len(),
            });
        }
        let mut set = Self { samples, patches, nodes, grid: grid.clone(), degree, cache: Default::default() };
        set.track_sheets(rays);
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Relabels ambient sheets along each angular ray by nearest continuation.
    fn track_sheets(&mut self, rays: Vec<std::ops::Range<usize>>) {
        let d = self.degree;
        for ray in rays {
            let mut prev: Option<Vec<C64>> = None;
            for k in ray {
                let Some(first) = self.nodes[k].first else {
                    prev = None;
                    continue;
                };
                let fiber = &mut self.samples[first..first + d];
                if let Some(pv) = &prev {
                    let mut assign = vec![usize::MAX; d];
                    let mut ok = true;
                    for (s, smp) in fiber.iter().enumerate() {
                        let j = (0..d)
                            .min_by(|&a, &b| (pv[a] - smp.point.v).norm().total_cmp(&(pv[b] - smp.point.v).norm()))
                            .unwrap();
                        if assign.contains(&j) {
                            ok = false;
                        }
                        assign[s] = j;
                    }
                    if ok {
                        for (s, smp) in fiber.iter_mut().enumerate() {
                            smp.sheet = assign[s];
                        }
                    }
                }
                let mut v = vec![C64::default(); d];
                for smp in fiber.iter() {
                    v[smp.sheet] = smp.point.v;
                }
                prev = Some(v);
            }
        }
    }

    /// `Σ f·w` over the rule, with the coarse-rule difference as error.
    pub fn integrate_area<F: Fn(&CurvePoint) -> C64 + Sync>(&self, f: F) -> QuadratureResult {
        let vals: Vec<C64> = self.samples.par_iter().map(|s| f(&s.point)).collect();
        self.integrate_values(&vals)
    }

    /// Integrates per-sample area densities.
    pub fn integrate_values(&self, vals: &[C64]) -> QuadratureResult {
        let fine: Vec<C64> = vals.iter().zip(&self.samples).map(|(v, s)| v * s.weight).collect();
        let coarse: Vec<C64> = vals.iter().zip(&self.samples).map(|(v, s)| v * s.coarse).collect();
        let value = pairwise_sum(&fine);
        QuadratureResult { value, error: (value - pairwise_sum(&coarse)).norm(), dropped: 0.0 }
    }

    /// Weighted rule specialized to a singular target.
    pub fn target_rule(&self, model: &PlaneCurveModel, target: &CurvePoint) -> Result<TargetRule> {
        let g = &self.grid;
        let mut dmin = f64::INFINITY;
        let mut dists = Vec::with_capacity(self.patches.len());
        for p in &self.patches {
            let d = base_distance(target.chart, target.x, p.chart, p.center);
            dmin = dmin.min(d);
            dists.push(d);
        }
        if dmin < g.branch_exclusion {
            return Err(Error::TargetOnBranchLocus(format!("{:?} {} (distance {dmin:e})", target.chart, target.x)));
        }
        let rho_t = g.target_radius.min(0.45 * dmin);
        let steps: Vec<u32> =
            self.patches.iter().zip(&dists).map(|(p, &d)| radius_step(p.radius, 0.45 * d)).collect();
        let radii: Vec<f64> =
            self.patches.iter().zip(&steps).map(|(p, &k)| p.radius * (-(k as f64) / 4.0).exp2()).collect();
        let mut weights: Vec<f64> = self.samples.iter().map(|s| s.weight).collect();
        let mut coarse: Vec<f64> = self.samples.iter().map(|s| s.coarse).collect();
        let mut extra = Vec::new();
        let changed: Vec<usize> = (0..self.patches.len()).filter(|&i| steps[i] > 0).collect();
        for &i in &changed {
            let p = &self.patches[i];
            weights[p.start..p.end].iter_mut().for_each(|w| *w = 0.0);
            coarse[p.start..p.end].iter_mut().for_each(|w| *w = 0.0);
            let cached = self.cache.lock().unwrap().patches.get(&(i, steps[i])).cloned();
            let rebuilt = match cached {
                Some(v) => v,
                None => {
                    let spec =
                        PatchSpec { chart: p.chart, center: p.center, radius: radii[i], power: p.power, kind: p.kind };
                    let v = Arc::new(patch_samples(model, g, &spec)?);
                    self.cache.lock().unwrap().patches.insert((i, steps[i]), v.clone());
                    v
                }
            };
            extra.extend(rebuilt.iter().copied());
        }
        let d = self.degree;
        for (ni, n) in self.nodes.iter().enumerate() {
            let dt = base_distance(n.chart, n.x, target.chart, target.x);
            let near_changed = changed.iter().any(|&i| {
                let p = &self.patches[i];
                base_distance(n.chart, n.x, p.chart, p.center) < p.radius
            });
            if dt >= rho_t && !near_changed {
                continue;
            }
            let mut keep = 1.0 - cutoff(dt, rho_t);
            for (pi, p) in self.patches.iter().enumerate() {
                keep -= cutoff(base_distance(n.chart, n.x, p.chart, p.center), radii[pi]);
            }
            let keep = keep.max(0.0);
            match n.first {
                Some(first) => {
                    for s in first..first + d {
                        weights[s] = n.w_raw * keep;
                        coarse[s] = n.wc_raw * keep;
                    }
                }
                None if keep > 0.0 => {
                    // Skipped by the base rule but uncovered by a shrunken patch.
                    let cached = self.cache.lock().unwrap().fibers.get(&ni).cloned();
                    let fiber = match cached {
                        Some(f) => f,
                        None => {
                            let f = Arc::new(model.fiber(n.chart, n.x)?);
                            self.cache.lock().unwrap().fibers.insert(ni, f.clone());
                            f
                        }
                    };
                    for (sheet, p) in fiber.iter().enumerate() {
                        extra.push(CurveSample { point: *p, weight: n.w_raw * keep, coarse: n.wc_raw * keep, sheet });
                    }
                }
                None => {}
            }
        }
        let tspec = PatchSpec { chart: target.chart, center: target.x, radius: rho_t, power: 1, kind: SpecialKind::Branch };
        let start = extra.len();
        extra.extend(patch_samples(model, g, &tspec)?);
        Ok(TargetRule { weights, coarse, extra, target_patch: start, radius: rho_t })
    }

    /// Samples whose base point lies within `radius` of `(chart, x)`.
    pub fn near(&self, chart: Chart, x: C64, radius: f64) -> Vec<usize> {
        (0..self.samples.len())
            .filter(|&i| {
                let p = &self.samples[i].point;
                base_distance(p.chart, p.x, chart, x) < radius
            })
            .collect()
    }
}

/// A rule for integrands singular at one target.
#[derive(Clone, Debug)]
pub struct TargetRule {
    /// Replacement weights for the base samples.
    pub weights: Vec<f64>,
    pub coarse: Vec<f64>,
    /// Additional samples (rebuilt patches, uncovered nodes, target patch).
    pub extra: Vec<CurveSample>,
    pub target_patch: usize,
    pub radius: f64,
}

impl TargetRule {
    /// Combines base-sample and extra-sample integrand values.
    pub fn integrate(&self, base: &[C64], extra: &[C64]) -> QuadratureResult {
        let mut fine: Vec<C64> = base.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        let mut coarse: Vec<C64> = base.iter().zip(&self.coarse).map(|(v, w)| v * w).collect();
        fine.extend(extra.iter().zip(&self.extra).map(|(v, s)| v * s.weight));
        coarse.extend(extra.iter().zip(&self.extra).map(|(v, s)| v * s.coarse));
        let value = pairwise_sum(&fine);
        QuadratureResult { value, error: (value - pairwise_sum(&coarse)).norm(), dropped: 0.0 }
    }
}

fn special_patches(model: &PlaneCurveModel, grid: &GridSpec) -> Vec<PatchSpec> {
    let sp = &model.specials;
    let mut out = Vec::new();
    for (i, s) in sp.iter().enumerate() {
        let mut rad = grid.patch_radius;
        for (j, t) in sp.iter().enumerate() {
            if i != j {
                rad = rad.min(0.45 * base_distance(s.chart, s.x, t.chart, t.x));
            }
        }
        if s.chart == Chart::B {
            rad = rad.min(0.5 / grid.switch_radius);
        }
        out.push(PatchSpec { chart: s.chart, center: s.x, radius: rad, power: s.ramification, kind: s.kind });
    }
    out
}

/// Polar rule in `u` with `x = c + u^e`, carrying the cutoff weight.
fn patch_samples(model: &PlaneCurveModel, grid: &GridSpec, s: &PatchSpec) -> Result<Vec<CurveSample>> {
    let e = s.power.max(1);
    let umax = s.radius.powf(1.0 / e as f64);
    let radial = polar_nodes(1, grid.patch_order, umax);
    let n = grid.patch_angular;
    let dth = 2.0 * PI / n as f64;
    let mut nodes = Vec::with_capacity(n * radial.len());
    for j in 0..n {
        let th = dth * (j as f64 + 0.5);
        let cf = if j % 2 == 0 { 2.0 } else { 0.0 };
        for &(r, wr) in &radial {
            let u = C64::from_polar(r, th);
            let du = u.powu(e as u32);
            let w = wr * r * dth * e as f64 * r.powi(2 * (e as i32 - 1)) * cutoff(du.norm(), s.radius);
            nodes.push((s.center + du, w, w * cf));
        }
    }
    // Each ray is solved outward, seeding Newton with the previous node's roots.
    let per_ray = radial.len();
    let rays: Vec<Result<Vec<Vec<CurvePoint>>>> = nodes
        .par_chunks(per_ray)
        .map(|ray| {
            let mut prev: Vec<CurvePoint> = Vec::new();
            let mut out = Vec::with_capacity(ray.len());
            for &(x, w, _) in ray {
                if w > 0.0 {
                    let seeds: Vec<C64> = prev.iter().map(|p| p.v + p.slope() * (x - p.x)).collect();
                    let f = model.fiber_seeded(s.chart, x, &seeds)?;
                    prev = f.clone();
                    out.push(f);
                } else {
                    out.push(Vec::new());
                }
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    let mut k = 0;
    for ray in rays {
        for f in ray? {
            let (_, w, wc) = nodes[k];
            k += 1;
            for (sheet, p) in f.into_iter().enumerate() {
                out.push(CurveSample { point: p, weight: w, coarse: wc, sheet });
            }
        }
    }
    Ok(out)
}

/// Planar Cauchy–Green transform `g(w) = −(1/π)∬_D f(ζ)/(ζ − w) dA(ζ)` on a disk.
#[derive(Clone, Debug)]
pub struct CauchyGreenDisk {
    pub center: C64,
    pub radius: f64,
    pub panels: usize,
    pub order: usize,
    pub angular: usize,
}

impl CauchyGreenDisk {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius, panels: 8, order: 8, angular: 96 }
    }

    /// Evaluates `g` at interior points; `f` must be evaluable on the closed disk.
    pub fn solve<F: Fn(C64) -> C64 + Sync>(&self, f: F, points: &[C64]) -> Vec<C64> {
        let prepared = self.prepare(&f);
        points.par_iter().map(|&w| prepared.eval(&f, w)).collect()
    }

    /// Samples `f` on the ambient polar grid once for repeated evaluation.
    pub fn prepare<F: Fn(C64) -> C64 + Sync>(&self, f: &F) -> PreparedCauchyGreen {
        let radial = polar_nodes(self.panels, self.order, self.radius);
        let dth = 2.0 * PI / self.angular as f64;
        let nodes: Vec<(C64, f64)> = (0..self.angular)
            .flat_map(|j| {
                let th = dth * (j as f64 + 0.5);
                radial.iter().map(move |&(r, wr)| (self.center + C64::from_polar(r, th), wr * r * dth))
            })
            .collect();
        let amb = nodes.par_iter().map(|&(z, wt)| (z, wt, f(z))).collect();
        PreparedCauchyGreen { center: self.center, radius: self.radius, amb }
    }
}

/// [`CauchyGreenDisk`] with its ambient samples in place.
#[derive(Clone, Debug)]
pub struct PreparedCauchyGreen {
    pub center: C64,
    pub radius: f64,
    amb: Vec<(C64, f64, C64)>,
}

impl PreparedCauchyGreen {
    /// `g(w)`; `f` must be the function given to [`CauchyGreenDisk::prepare`].
    pub fn eval<F: Fn(C64) -> C64>(&self, f: &F, w: C64) -> C64 {
        let dist = self.radius - (w - self.center).norm();
        let rho = (0.45 * dist).min(0.5 * self.radius);
        if rho <= 0.0 {
            return C64::new(f64::NAN, f64::NAN);
        }
        let mut terms: Vec<C64> = self
            .amb
            .iter()
            .map(|&(z, wt, fz)| {
                let k = 1.0 - cutoff((z - w).norm(), rho);
                if k == 0.0 {
                    C64::default()
                } else {
                    fz * wt * k / (z - w)
                }
            })
            .collect();
        let (px, pw) = gauss_legendre(24);
        let na = 64;
        let dphi = 2.0 * PI / na as f64;
        for j in 0..na {
            let ph = dphi * (j as f64 + 0.5);
            let dir = C64::from_polar(1.0, ph);
            for (x, wx) in px.iter().zip(&pw) {
                let r = 0.5 * rho * (x + 1.0);
                let z = w + r * dir;
                // r dr dφ / (r e^{iφ}) is smooth.
                terms.push(f(z) * cutoff(r, rho) * 0.5 * rho * wx * dphi / dir);
            }
        }
        -pairwise_sum(&terms) / PI
    }
}
