//! Plane curve model: working frame, two base charts, fibers, special points
//! (branch points and nodes), infinity points and the optional normalization.

use crate::error::{Error, Result};
use crate::poly::HomogeneousPolynomial;
use crate::roots::{horner, poly_roots};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Base chart of the working frame.
///
/// Chart `A` is `ζ₀ = 1` with base `s = ζ₁/ζ₀`; chart `B` is `ζ₁ = 1` with
/// base `t = ζ₀/ζ₁`. The fiber coordinate is always `v = ζ₂/ζ_α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chart {
    A,
    B,
}

impl Chart {
    pub fn alpha(self) -> usize {
        match self {
            Chart::A => 0,
            Chart::B => 1,
        }
    }

    pub fn base_index(self) -> usize {
        1 - self.alpha()
    }

    /// Orientation sign of `dζ_α ∧ dx ∧ dv` relative to `dζ₀ ∧ dζ₁ ∧ dζ₂`.
    pub fn sigma(self) -> f64 {
        match self {
            Chart::A => 1.0,
            Chart::B => -1.0,
        }
    }

    pub fn other(self) -> Chart {
        match self {
            Chart::A => Chart::B,
            Chart::B => Chart::A,
        }
    }
}

/// A point of the curve in a chart, with the first-order data every kernel needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub chart: Chart,
    pub x: C64,
    pub v: C64,
    /// Working-frame homogeneous coordinates with `e[α] = 1`.
    pub e: [C64; 3],
    /// `∂e/∂x` along the curve.
    pub de: [C64; 3],
    pub f_x: C64,
    pub f_v: C64,
}

impl CurvePoint {
    pub fn norm(&self) -> f64 {
        (self.e[0].norm_sqr() + self.e[1].norm_sqr() + self.e[2].norm_sqr()).sqrt()
    }

    /// Unit-sphere representative `e/|e|`.
    pub fn sphere(&self) -> [C64; 3] {
        let n = self.norm();
        [self.e[0] / n, self.e[1] / n, self.e[2] / n]
    }

    /// `ρ₀ = 1/|e|`, the scale taking the chart point to the sphere.
    pub fn rho(&self) -> f64 {
        1.0 / self.norm()
    }

    pub fn slope(&self) -> C64 {
        -self.f_x / self.f_v
    }

    /// Base coordinate of this point in `chart`, if finite there.
    pub fn base_in(&self, chart: Chart) -> Option<C64> {
        if chart == self.chart {
            Some(self.x)
        } else if self.x.norm() > 0.0 {
            Some(1.0 / self.x)
        } else {
            None
        }
    }
}

/// Distance from a chart point to a center expressed in another chart.
pub fn base_distance(chart: Chart, x: C64, center_chart: Chart, c: C64) -> f64 {
    if chart == center_chart {
        (x - c).norm()
    } else if x.norm() == 0.0 {
        f64::INFINITY
    } else {
        (1.0 / x - c).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialKind {
    Branch,
    Node,
}

/// A zero of the discriminant of `F(x, ·)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub chart: Chart,
    pub x: C64,
    pub kind: SpecialKind,
    /// Least common multiple of the monodromy cycle lengths around `x`.
    pub ramification: usize,
    /// Multiplicity of the discriminant root.
    pub cluster: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodePoint {
    /// Location in the input frame.
    pub location: [C64; 3],
    /// Two branch tangent directions in the affine chart where the node is
    /// largest, normalized to unit length.
    pub tangents: [[C64; 2]; 2],
    pub tangent_det: f64,
    /// Normalization parameters of the two preimages, when a parametrization is known.
    pub preimages: Option<[C64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfinityPoint {
    pub point: [C64; 3],
    pub multiplicity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub arithmetic_genus: usize,
    pub node_count: usize,
    pub geometric_genus: usize,
}

/// Rational parametrization `t ↦ [ζ₀(t) : ζ₁(t) : ζ₂(t)]` of the normalization,
/// in the input frame. `components[k][j]` is the coefficient of `t^j` in `ζ_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub components: [Vec<C64>; 3],
}

impl Normalization {
    pub fn point(&self, t: C64) -> [C64; 3] {
        [0, 1, 2].map(|k| horner(&self.components[k], t).0)
    }

    pub fn derivative(&self, t: C64) -> [C64; 3] {
        [0, 1, 2].map(|k| horner(&self.components[k], t).1)
    }

    fn top(&self) -> [C64; 3] {
        let n = self.components.iter().map(|c| c.len()).max().unwrap_or(0);
        [0, 1, 2].map(|k| self.components[k].get(n.saturating_sub(1)).copied().unwrap_or_default())
    }

    /// Parameter of an input-frame point, `None` for `t = ∞`.
    pub fn parameter_of(&self, u: &[C64; 3]) -> Option<C64> {
        let a = (0..3).max_by(|&i, &j| u[i].norm().total_cmp(&u[j].norm())).unwrap();
        let mismatch = |p: &[C64; 3]| -> f64 {
            let np = (p[0].norm_sqr() + p[1].norm_sqr() + p[2].norm_sqr()).sqrt();
            let nu = (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr()).sqrt();
            (0..3).map(|b| (p[b] * u[a] - p[a] * u[b]).norm()).sum::<f64>() / (np * nu).max(1e-300)
        };
        let mut best: Option<(f64, Option<C64>)> = None;
        for b in (0..3).filter(|&b| b != a) {
            let n = self.components[a].len().max(self.components[b].len());
            let g: Vec<C64> = (0..n)
                .map(|j| {
                    let cb = self.components[b].get(j).copied().unwrap_or_default();
                    let ca = self.components[a].get(j).copied().unwrap_or_default();
                    cb * u[a] - ca * u[b]
                })
                .collect();
            for t in poly_roots(&g) {
                let m = mismatch(&self.point(t));
                if best.is_none_or(|(bm, _)| m < bm) {
                    best = Some((m, Some(t)));
                }
            }
        }
        let m = mismatch(&self.top());
        if best.is_none_or(|(bm, _)| m < bm) {
            best = Some((m, None));
        }
        best.and_then(|(_, t)| t)
    }
}

/// Dense coefficient table of `F(x, v) = Σ c[k][j] x^j v^k` for one chart.
#[derive(Clone, Debug)]
struct FiberTable {
    c: Vec<Vec<C64>>,
}

impl FiberTable {
    fn new(p: &HomogeneousPolynomial, chart: Chart) -> Self {
        let d = p.degree() as usize;
        let mut c = vec![vec![C64::default(); d + 1]; d + 1];
        for (e, coef) in p.terms() {
            let j = e[chart.base_index()] as usize;
            let k = e[2] as usize;
            c[k][j] += coef;
        }
        Self { c }
    }

    /// Coefficients in `v` at fixed `x`.
    fn at(&self, x: C64) -> Vec<C64> {
        self.c.iter().map(|row| horner(row, x).0).collect()
    }

    /// `(F, F_x, F_v)`.
    fn eval(&self, x: C64, v: C64) -> (C64, C64, C64) {
        let mut a = Vec::with_capacity(self.c.len());
        let mut da = Vec::with_capacity(self.c.len());
        for row in &self.c {
            let (p, dp) = horner(row, x);
            a.push(p);
            da.push(dp);
        }
        let (f, f_v) = horner(&a, v);
        let (f_x, _) = horner(&da, v);
        (f, f_x, f_v)
    }

    /// Second derivatives `(F_xx, F_xv, F_vv)`.
    fn hessian(&self, x: C64, v: C64) -> (C64, C64, C64) {
        let h = 1e-4;
        let (_, fx_p, fv_p) = self.eval(x + h, v);
        let (_, fx_m, fv_m) = self.eval(x - h, v);
        let (_, _, fv_vp) = self.eval(x, v + h);
        let (_, _, fv_vm) = self.eval(x, v - h);
        ((fx_p - fx_m) / (2.0 * h), (fv_p - fv_m) / (2.0 * h), (fv_vp - fv_vm) / (2.0 * h))
    }

    fn magnitude(&self, x: C64, v: C64) -> f64 {
        let mut m = 0.0;
        let xn = x.norm();
        let vn = v.norm();
        for (k, row) in self.c.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                m += c.norm() * xn.powi(j as i32) * vn.powi(k as i32);
            }
        }
        m
    }
}

/// Input data for a curve: polynomial, declared nodes and optional normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub polynomial: HomogeneousPolynomial,
    #[serde(default)]
    pub nodes: Vec<[C64; 3]>,
    #[serde(default)]
    pub normalization: Option<Normalization>,
    #[serde(default)]
    pub infinity_multiplicities: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct PlaneCurveModel {
    spec: CurveSpec,
    /// Working-frame polynomial `P_w(w) = P(T w)`.
    poly: HomogeneousPolynomial,
    frame: [[C64; 3]; 3],
    frame_inv: [[C64; 3]; 3],
    tables: [FiberTable; 2],
    scale: f64,
    pub switch_radius: f64,
    pub nodes: Vec<NodePoint>,
    pub infinity_points: Vec<InfinityPoint>,
    pub topology: Topology,
    pub specials: Vec<SpecialPoint>,
}

fn mat_vec(m: &[[C64; 3]; 3], v: &[C64; 3]) -> [C64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn inverse3(m: &[[C64; 3]; 3]) -> [[C64; 3]; 3] {
    let a = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let inv = a.try_inverse().expect("frame change is invertible");
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| inv[(i, j)]))
}

/// Candidate frame changes fixing `ζ₀`; the first whose projection center
/// `T e₂` is off the curve wins.
fn frame_candidates() -> Vec<[[C64; 3]; 3]> {
    let o = C64::new(1.0, 0.0);
    let z = C64::default();
    let mut out = vec![[[o, z, z], [z, o, z], [z, z, o]], [[o, z, z], [z, z, o], [z, o, z]]];
    for k in 1..8 {
        let c = C64::new(k as f64 * 0.5, 0.25 * k as f64);
        out.push([[o, z, z], [z, o, c], [z, z, o]]);
    }
    out
}

impl PlaneCurveModel {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        Self::with_switch_radius(spec, 2.0)
    }

    pub fn with_switch_radius(spec: CurveSpec, switch_radius: f64) -> Result<Self> {
        let p = &spec.polynomial;
        let d = p.degree();
        if d == 0 {
            return Err(Error::InvalidPolynomial("degree 0 defines no curve".into()));
        }
        let scale0 = p.coefficient_scale();
        let (frame, poly) = frame_candidates()
            .into_iter()
            .map(|t| {
                let q = p.substitute_linear(&t);
                (t, q)
            })
            .find(|(_, q)| q.coefficient([0, 0, d]).norm() > 1e-8 * scale0)
            .ok_or_else(|| Error::InvalidPolynomial("line at infinity is a component".into()))?;
        let frame_inv = inverse3(&frame);
        let tables = [FiberTable::new(&poly, Chart::A), FiberTable::new(&poly, Chart::B)];
        let pa = ((d - 1) * d.saturating_sub(2) / 2) as usize;
        let node_count = spec.nodes.len();
        let mut model = Self {
            scale: poly.coefficient_scale(),
            poly,
            frame,
            frame_inv,
            tables,
            switch_radius,
            nodes: Vec::new(),
            infinity_points: Vec::new(),
            topology: Topology {
                arithmetic_genus: pa,
                node_count,
                geometric_genus: pa.saturating_sub(node_count),
            },
            specials: Vec::new(),
            spec,
        };
        model.infinity_points = model.compute_infinity_points();
        model.nodes = model.spec.nodes.iter().map(|n| model.node_geometry(n)).collect();
        model.specials = model.find_specials();
        Ok(model)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn polynomial(&self) -> &HomogeneousPolynomial {
        &self.spec.polynomial
    }

    pub fn working_polynomial(&self) -> &HomogeneousPolynomial {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn normalization(&self) -> Option<&Normalization> {
        self.spec.normalization.as_ref()
    }

    /// Working-frame coordinates of an input-frame point.
    pub fn to_working(&self, u: &[C64; 3]) -> [C64; 3] {
        mat_vec(&self.frame_inv, u)
    }

    /// Input-frame coordinates of a working-frame point.
    pub fn to_input(&self, w: &[C64; 3]) -> [C64; 3] {
        mat_vec(&self.frame, w)
    }

    pub fn fiber_coefficients(&self, chart: Chart, x: C64) -> Vec<C64> {
        self.tables[chart.alpha()].at(x)
    }

    /// Builds the point data at `(x, v)` without checking `F = 0`.
    pub fn point(&self, chart: Chart, x: C64, v: C64) -> CurvePoint {
        let (_, f_x, f_v) = self.tables[chart.alpha()].eval(x, v);
        let slope = -f_x / f_v;
        let one = C64::new(1.0, 0.0);
        let zero = C64::default();
        let (e, de) = match chart {
            Chart::A => ([one, x, v], [zero, one, slope]),
            Chart::B => ([x, one, v], [one, zero, slope]),
        };
        CurvePoint { chart, x, v, e, de, f_x, f_v }
    }

    pub fn residual(&self, chart: Chart, x: C64, v: C64) -> f64 {
        let t = &self.tables[chart.alpha()];
        t.eval(x, v).0.norm() / t.magnitude(x, v).max(1e-300)
    }

    /// All fiber roots above `x`, polished, sorted by `(re, im)`.
    pub fn fiber_values(&self, chart: Chart, x: C64) -> Result<Vec<C64>> {
        let c = self.fiber_coefficients(chart, x);
        let roots = poly_roots(&c);
        if roots.len() != self.degree() as usize {
            return Err(Error::ResidualRootError { residual: f64::INFINITY, at: format!("{chart:?} {x}") });
        }
        for &v in &roots {
            let r = self.residual(chart, x, v);
            if r > 1e-10 {
                return Err(Error::ResidualRootError { residual: r, at: format!("{chart:?} {x}") });
            }
        }
        Ok(roots)
    }

    pub fn fiber(&self, chart: Chart, x: C64) -> Result<Vec<CurvePoint>> {
        Ok(self.fiber_values(chart, x)?.into_iter().map(|v| self.point(chart, x, v)).collect())
    }

    /// Fiber roots by Newton from `seeds` (the roots at a nearby base point),
    /// falling back to [`PlaneCurveModel::fiber`] when the seeds do not
    /// converge to distinct roots.
    pub fn fiber_seeded(&self, chart: Chart, x: C64, seeds: &[C64]) -> Result<Vec<CurvePoint>> {
        let d = self.degree() as usize;
        if seeds.len() != d {
            return self.fiber(chart, x);
        }
        let c = self.fiber_coefficients(chart, x);
        let mut vs = Vec::with_capacity(d);
        let mut moved = 0.0f64;
        for &s in seeds {
            let v = crate::roots::polish(&c, s);
            if self.residual(chart, x, v) > 1e-12 {
                return self.fiber(chart, x);
            }
            moved = moved.max((v - s).norm());
            vs.push(v);
        }
        let mut sep = f64::INFINITY;
        for i in 0..d {
            for j in 0..i {
                sep = sep.min((vs[i] - vs[j]).norm());
            }
        }
        if !(sep > 4.0 * moved) {
            return self.fiber(chart, x);
        }
        Ok(vs.into_iter().map(|v| self.point(chart, x, v)).collect())
    }

    /// The curve point nearest `(x, v_guess)` on the fiber above `x`.
    pub fn nearest_on_fiber(&self, chart: Chart, x: C64, v_guess: C64) -> Result<CurvePoint> {
        let roots = self.fiber_values(chart, x)?;
        let v = roots
            .into_iter()
            .min_by(|a, b| (a - v_guess).norm().total_cmp(&(b - v_guess).norm()))
            .unwrap();
        Ok(self.point(chart, x, v))
    }

    /// Follows one sheet from `(path[0], v0)` along `path`.
    ///
    /// Steps are bisected when the nearest root is not clearly separated from
    /// the next one; failure after repeated bisection is reported as ambiguity.
    pub fn continue_sheet(&self, chart: Chart, path: &[C64], v0: C64) -> Result<Vec<CurvePoint>> {
        let mut out = Vec::with_capacity(path.len());
        let mut cur = self.nearest_on_fiber(chart, path[0], v0)?;
        out.push(cur);
        for w in path.windows(2) {
            cur = self.step_sheet(chart, cur, w[1], 0)?;
            out.push(cur);
        }
        Ok(out)
    }

    fn step_sheet(&self, chart: Chart, from: CurvePoint, to: C64, depth: usize) -> Result<CurvePoint> {
        let predicted = from.v + from.slope() * (to - from.x);
        let roots = self.fiber_values(chart, to)?;
        let mut dist: Vec<(f64, C64)> = roots.iter().map(|&r| ((r - predicted).norm(), r)).collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let clear = dist.len() < 2 || dist[1].0 > 4.0 * dist[0].0 + 1e-12;
        if clear {
            return Ok(self.point(chart, to, dist[0].1));
        }
        if depth >= 12 {
            return Err(Error::SheetContinuationAmbiguity(format!("{chart:?} {to}")));
        }
        let mid = 0.5 * (from.x + to);
        let m = self.step_sheet(chart, from, mid, depth + 1)?;
        self.step_sheet(chart, m, to, depth + 1)
    }

    fn compute_infinity_points(&self) -> Vec<InfinityPoint> {
        // P(0, 1, y) in the input frame; missing top degree means [0:0:1].
        let p = &self.spec.polynomial;
        let d = p.degree() as usize;
        let mut c = vec![C64::default(); d + 1];
        for (e, coef) in p.terms() {
            if e[0] == 0 {
                c[e[2] as usize] += coef;
            }
        }
        let roots = poly_roots(&c);
        let mut pts: Vec<InfinityPoint> = Vec::new();
        for y in roots {
            match pts.iter_mut().find(|q| (q.point[2] - y).norm() < 1e-4 && q.point[1].norm() > 0.0) {
                Some(q) => q.multiplicity += 1,
                None => pts.push(InfinityPoint {
                    point: [C64::default(), C64::new(1.0, 0.0), y],
                    multiplicity: 1,
                }),
            }
        }
        let finite: usize = pts.iter().map(|q| q.multiplicity).sum();
        if finite < d {
            pts.push(InfinityPoint {
                point: [C64::default(), C64::default(), C64::new(1.0, 0.0)],
                multiplicity: d - finite,
            });
        }
        pts
    }

    fn node_geometry(&self, loc: &[C64; 3]) -> NodePoint {
        let a = (0..3).max_by(|&i, &j| loc[i].norm().total_cmp(&loc[j].norm())).unwrap();
        let [b1, b2] = crate::poly::other_indices(a);
        let f = crate::poly::dehomogenize(&self.spec.polynomial, a).expect("valid chart");
        let w = [loc[b1] / loc[a], loc[b2] / loc[a]];
        let h = 1e-4;
        let g = |w: [C64; 2]| f.eval_grad(w).1;
        let gp0 = g([w[0] + h, w[1]]);
        let gm0 = g([w[0] - h, w[1]]);
        let gp1 = g([w[0], w[1] + h]);
        let gm1 = g([w[0], w[1] - h]);
        let f11 = (gp0[0] - gm0[0]) / (2.0 * h);
        let f12 = (gp1[0] - gm1[0]) / (2.0 * h);
        let f22 = (gp1[1] - gm1[1]) / (2.0 * h);
        // Tangent directions (a, b) solve f11 a² + 2 f12 a b + f22 b² = 0.
        let disc = (f12 * f12 - f11 * f22).sqrt();
        let dirs = if f22.norm() > f11.norm() {
            [[C64::new(1.0, 0.0), (-f12 + disc) / f22], [C64::new(1.0, 0.0), (-f12 - disc) / f22]]
        } else if f11.norm() > 0.0 {
            [[(-f12 + disc) / f11, C64::new(1.0, 0.0)], [(-f12 - disc) / f11, C64::new(1.0, 0.0)]]
        } else {
            [[C64::new(1.0, 0.0), C64::default()], [C64::default(), C64::new(1.0, 0.0)]]
        };
        let unit = |d: [C64; 2]| {
            let n = (d[0].norm_sqr() + d[1].norm_sqr()).sqrt();
            [d[0] / n, d[1] / n]
        };
        let t = [unit(dirs[0]), unit(dirs[1])];
        let det = (t[0][0] * t[1][1] - t[0][1] * t[1][0]).norm();
        let preimages = self.spec.normalization.as_ref().and_then(|n| node_preimages(n, loc));
        NodePoint { location: *loc, tangents: t, tangent_det: det, preimages }
    }

    /// Discriminant `lc^(2d−2) Π_{i<j}(v_i − v_j)²` at base point `x`.
    fn discriminant(&self, chart: Chart, x: C64) -> C64 {
        let c = self.fiber_coefficients(chart, x);
        let d = c.len() - 1;
        let r = poly_roots(&c);
        let mut prod = c[d].powu(2 * d as u32 - 2);
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                prod *= (r[i] - r[j]) * (r[i] - r[j]);
            }
        }
        prod
    }

    fn discriminant_roots(&self, chart: Chart) -> Vec<C64> {
        let d = self.degree() as usize;
        if d < 2 {
            return Vec::new();
        }
        let deg = d * (d - 1);
        let n = (2 * deg + 2).next_power_of_two().max(16);
        let radius = 1.0;
        let vals: Vec<C64> = (0..n)
            .map(|k| self.discriminant(chart, C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)))
            .collect();
        let coeffs: Vec<C64> = (0..=deg)
            .map(|m| {
                let s: C64 = vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * PI * (m * k) as f64 / n as f64))
                    .sum();
                s / (n as f64 * radius.powi(m as i32))
            })
            .collect();
        let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cleaned: Vec<C64> =
            coeffs.iter().map(|&c| if c.norm() < 1e-13 * top { C64::default() } else { c }).collect();
        poly_roots(&cleaned)
    }

    fn find_specials(&self) -> Vec<SpecialPoint> {
        let r = self.switch_radius;
        let mut raw: Vec<(Chart, C64)> = Vec::new();
        for x in self.discriminant_roots(Chart::A) {
            if x.norm() <= r {
                raw.push((Chart::A, x));
            }
        }
        for x in self.discriminant_roots(Chart::B) {
            if x.norm() < 1.0 / r && (x.norm() == 0.0 || 1.0 / x.norm() > r + 1e-9) {
                raw.push((Chart::B, x));
            }
        }
        // Cluster multiple roots; the mean of a perturbed multiple root is accurate.
        let mut clusters: Vec<(Chart, Vec<C64>)> = Vec::new();
        for (chart, x) in raw {
            match clusters
                .iter_mut()
                .find(|(c, xs)| *c == chart && (xs[0] - x).norm() < 1e-3 * (1.0 + x.norm()))
            {
                Some((_, xs)) => xs.push(x),
                None => clusters.push((chart, vec![x])),
            }
        }
        let centers: Vec<(Chart, C64, usize)> = clusters
            .iter()
            .map(|(c, xs)| (*c, xs.iter().sum::<C64>() / xs.len() as f64, xs.len()))
            .collect();
        let mut out = Vec::new();
        for (i, &(chart, x, cluster)) in centers.iter().enumerate() {
            let mut sep = 0.2f64;
            for (j, &(c2, x2, _)) in centers.iter().enumerate() {
                if j != i {
                    sep = sep.min(base_distance(chart, x, c2, x2));
                }
            }
            let x = if cluster == 1 { self.polish_branch(chart, x) } else { x };
            let e = self.monodromy_order(chart, x, 0.25 * sep);
            let kind = if e >= 2 { SpecialKind::Branch } else { SpecialKind::Node };
            out.push(SpecialPoint { chart, x, kind, ramification: e, cluster });
        }
        out.sort_by(|a, b| {
            (a.chart, a.x.re, a.x.im).partial_cmp(&(b.chart, b.x.re, b.x.im)).unwrap()
        });
        out
    }

    /// Newton on `(F, F_v) = 0` for a simple branch point.
    fn polish_branch(&self, chart: Chart, x0: C64) -> C64 {
        let t = &self.tables[chart.alpha()];
        let roots = match self.fiber_values(chart, x0) {
            Ok(r) => r,
            Err(_) => return x0,
        };
        // Start from the closest pair of roots.
        let mut best = (f64::INFINITY, C64::default());
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                let dd = (roots[i] - roots[j]).norm();
                if dd < best.0 {
                    best = (dd, 0.5 * (roots[i] + roots[j]));
                }
            }
        }
        let (mut x, mut v) = (x0, best.1);
        for _ in 0..20 {
            let (f, f_x, f_v) = t.eval(x, v);
            let (_, f_xv, f_vv) = t.hessian(x, v);
            let det = f_x * f_vv - f_v * f_xv;
            if det.norm() < 1e-14 {
                return x0;
            }
            let dx = (f * f_vv - f_v * f_v) / det;
            let dv = (f_x * f_v - f_xv * f) / det;
            x -= dx;
            v -= dv;
            if dx.norm() + dv.norm() < 1e-15 {
                break;
            }
        }
        if (x - x0).norm() < 1e-6 {
            x
        } else {
            x0
        }
    }

    /// Lcm of the cycle lengths of fiber monodromy around a small circle.
    fn monodromy_order(&self, chart: Chart, x: C64, radius: f64) -> usize {
        let steps = 256;
        let start = x + radius;
        let Ok(roots0) = self.fiber_values(chart, start) else {
            return 1;
        };
        let mut perm = Vec::with_capacity(roots0.len());
        let path: Vec<C64> =
            (0..=steps).map(|k| x + C64::from_polar(radius, 2.0 * PI * k as f64 / steps as f64)).collect();
        for &v0 in &roots0 {
            let end = match self.continue_sheet(chart, &path, v0) {
                Ok(p) => p.last().unwrap().v,
                Err(_) => return 1,
            };
            let idx = (0..roots0.len())
                .min_by(|&i, &j| (roots0[i] - end).norm().total_cmp(&(roots0[j] - end).norm()))
                .unwrap();
            perm.push(idx);
        }
        let mut seen = vec![false; perm.len()];
        let mut order = 1usize;
        for i in 0..perm.len() {
            if seen[i] {
                continue;
            }
            let mut len = 0;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = perm[j];
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }

    /// Gradient magnitude of the normalized polynomial at a unit representative.
    pub fn gradient_norm(&self, p: &CurvePoint) -> f64 {
        let (_, g) = self.poly.eval_grad(&p.sphere());
        (g[0].norm_sqr() + g[1].norm_sqr() + g[2].norm_sqr()).sqrt() / self.scale
    }

    /// Working-frame location of each declared node as a chart point on the
    /// base plane (chart and base coordinate).
    pub fn node_bases(&self) -> Vec<(Chart, C64)> {
        self.spec
            .nodes
            .iter()
            .map(|u| {
                let w = self.to_working(u);
                if w[0].norm() >= w[1].norm() {
                    (Chart::A, w[1] / w[0])
                } else {
                    (Chart::B, w[0] / w[1])
                }
            })
            .collect()
    }

    /// `ζ₀` of the input frame at a curve point, for the unit representative.
    pub fn input_zeta0(&self, p: &CurvePoint) -> C64 {
        self.to_input(&p.sphere())[0]
    }

    /// Input-frame homogeneous coordinates of a chart point (not normalized).
    pub fn input_point(&self, p: &CurvePoint) -> [C64; 3] {
        self.to_input(&p.e)
    }
}

fn node_preimages(n: &Normalization, loc: &[C64; 3]) -> Option<[C64; 2]> {
    // Parameters where the parametrization passes through `loc`: common roots
    // of the cross products with the largest coordinate.
    let a = (0..3).max_by(|&i, &j| loc[i].norm().total_cmp(&loc[j].norm())).unwrap();
    let mut cands: Vec<C64> = Vec::new();
    for b in (0..3).filter(|&b| b != a) {
        let len = n.components[a].len().max(n.components[b].len());
        let g: Vec<C64> = (0..len)
            .map(|j| {
                let cb = n.components[b].get(j).copied().unwrap_or_default();
                let ca = n.components[a].get(j).copied().unwrap_or_default();
                cb * loc[a] - ca * loc[b]
            })
            .collect();
        cands.extend(poly_roots(&g));
    }
    let mut good: Vec<C64> = Vec::new();
    for t in cands {
        let p = n.point(t);
        let ok = (0..3).all(|b| (p[b] * loc[a] - p[a] * loc[b]).norm() < 1e-8 * (1.0 + p[a].norm()));
        if ok && !good.iter().any(|g| (g - t).norm() < 1e-6) {
            good.push(t);
        }
    }
    good.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    (good.len() == 2).then(|| [good[0], good[1]])
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Standard test curves.
pub mod examples {
    use super::*;

    pub fn line() -> CurveSpec {
        CurveSpec {
            polynomial: HomogeneousPolynomial::from_real(&[([0, 0, 1], 1.0)]).unwrap(),
            nodes: vec![],
            normalization: None,
            infinity_multiplicities: None,
        }
    }

    /// The smooth conic `ζ₀² + ζ₁² − ζ₂²`.
    pub fn conic() -> CurveSpec {
        CurveSpec {
            polynomial: HomogeneousPolynomial::from_real(&[([2, 0, 0], 1.0), ([0, 2, 0], 1.0), ([0, 0, 2], -1.0)])
                .unwrap(),
            nodes: vec![],
            normalization: None,
            infinity_multiplicities: None,
        }
    }

    pub fn fermat(d: u32) -> CurveSpec {
        CurveSpec {
            polynomial: HomogeneousPolynomial::from_real(&[([d, 0, 0], 1.0), ([0, d, 0], 1.0), ([0, 0, d], 1.0)])
                .unwrap(),
            nodes: vec![],
            normalization: None,
            infinity_multiplicities: None,
        }
    }

    /// `ζ₀ζ₂² − ζ₁³ − ζ₀ζ₁²` with its node at `[1:0:0]` and the
    /// parametrization `t ↦ [1 : t² − 1 : t(t² − 1)]`.
    pub fn nodal_cubic() -> CurveSpec {
        let c = |x: f64| C64::new(x, 0.0);
        CurveSpec {
            polynomial: HomogeneousPolynomial::from_real(&[([1, 0, 2], 1.0), ([0, 3, 0], -1.0), ([1, 2, 0], -1.0)])
                .unwrap(),
            nodes: vec![[c(1.0), c(0.0), c(0.0)]],
            normalization: Some(Normalization {
                components: [vec![c(1.0)], vec![c(-1.0), c(0.0), c(1.0)], vec![c(0.0), c(-1.0), c(0.0), c(1.0)]],
            }),
            infinity_multiplicities: None,
        }
    }
}
