//! Holomorphic basis, the harmonic projection `H₁`, node corrections and the
//! explicit decomposition `φ = ∂̄𝓘[φ] + 𝓛[φ]`.
//!
//! Holomorphic forms are `ω = σ_α q(e) dx / F_v` with `q` adjoint of degree
//! `d − 3`. The Hermitian product is `h(α, β) = (i/2) ∫ α ∧ β̄ = ∫ a b̄ dA` on
//! chart coefficients.

use crate::calibration::KernelCalibration;
use crate::context::CurveContext;
use crate::curve::{base_distance, Chart, CurvePoint, Normalization, PlaneCurveModel, SpecialKind};
use crate::dbar::Stencil;
use crate::error::{Error, Result};
use crate::fields::{CurveForm, CurveFunction, DbarOf, FormRef, FormSum, FunctionRef};
use crate::kernels::{apply_i, apply_l, LForm};
use crate::poly::HomogeneousPolynomial;
use crate::quad::{gauss_legendre, pairwise_sum, smooth_step, smooth_step_deriv};
use crate::residue::monomials;
use crate::C64;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::Arc;

/// Largest accepted condition number of the adjoint Gram matrix.
pub const GRAM_CONDITION_LIMIT: f64 = 1e6;

/// Orthonormal holomorphic forms.
#[derive(Clone, Debug)]
pub struct HolBasis {
    pub q: Vec<HomogeneousPolynomial>,
    /// Gram matrix of `q` after orthonormalization.
    pub gram: DMatrix<C64>,
    /// Condition number of the Gram matrix before orthonormalization.
    pub condition: f64,
}

impl HolBasis {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Chart coefficient of `dx` in `ω_j`.
    pub fn omega(&self, j: usize, p: &CurvePoint) -> C64 {
        p.chart.sigma() * self.q[j].eval(&p.e) / p.f_v
    }
}

/// Adjoint polynomials of degree `d − 3` vanishing at the nodes.
pub fn adjoint_polynomials(model: &PlaneCurveModel) -> Vec<HomogeneousPolynomial> {
    let d = model.degree() as i32;
    if d < 3 {
        return Vec::new();
    }
    let mons = monomials((d - 3) as u32);
    let unit = |e| HomogeneousPolynomial::new([(e, C64::new(1.0, 0.0))]).expect("monomial");
    if model.nodes.is_empty() {
        return mons.into_iter().map(unit).collect();
    }
    let n = mons.len();
    let rows: Vec<[C64; 3]> = model
        .nodes
        .iter()
        .map(|node| {
            let w = model.to_working(&node.location);
            let s = (w[0].norm_sqr() + w[1].norm_sqr() + w[2].norm_sqr()).sqrt();
            w.map(|z| z / s)
        })
        .collect();
    let a = DMatrix::from_fn(rows.len(), n, |i, j| {
        let e = mons[j];
        rows[i][0].powu(e[0]) * rows[i][1].powu(e[1]) * rows[i][2].powu(e[2])
    });
    let eig = (a.adjoint() * &a).symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let mut out = Vec::new();
    for k in 0..n {
        if eig.eigenvalues[k] <= 1e-10 * top {
            let v = eig.eigenvectors.column(k);
            let terms: Vec<_> = mons.iter().zip(v.iter()).filter(|(_, c)| c.norm() > 1e-13).map(|(e, c)| (*e, *c)).collect();
            out.push(HomogeneousPolynomial::new(terms).expect("nonzero null vector"));
        }
    }
    out
}

/// `G_jk = ∫ q_j q̄_k / |F_v|² dA`.
pub fn adjoint_gram(ctx: &CurveContext, q: &[HomogeneousPolynomial]) -> DMatrix<C64> {
    let n = q.len();
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v: Vec<C64> = ctx
                .set
                .samples
                .par_iter()
                .map(|s| {
                    let p = &s.point;
                    q[j].eval(&p.e) * q[k].eval(&p.e).conj() / p.f_v.norm_sqr() * s.weight
                })
                .collect();
            let x = pairwise_sum(&v);
            g[(j, k)] = x;
            g[(k, j)] = x.conj();
        }
    }
    g
}

fn combine_polys(coeffs: &[C64], q: &[HomogeneousPolynomial]) -> Option<HomogeneousPolynomial> {
    let terms = coeffs.iter().zip(q).flat_map(|(c, p)| p.terms().iter().map(move |(e, a)| (*e, c * a)));
    HomogeneousPolynomial::new(terms).ok()
}

pub fn hol_basis(ctx: &CurveContext) -> Result<HolBasis> {
    let raw = adjoint_polynomials(&ctx.model);
    if raw.is_empty() {
        return Ok(HolBasis { q: Vec::new(), gram: DMatrix::zeros(0, 0), condition: 1.0 });
    }
    let g = adjoint_gram(ctx, &raw);
    let ev = g.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > GRAM_CONDITION_LIMIT {
        return Err(Error::GramIllConditioned(condition));
    }
    let chol = g.cholesky().ok_or(Error::GramIllConditioned(f64::INFINITY))?;
    let linv = chol.l().try_inverse().ok_or(Error::GramIllConditioned(f64::INFINITY))?;
    let q: Vec<HomogeneousPolynomial> = (0..raw.len())
        .map(|i| {
            let row: Vec<C64> = (0..raw.len()).map(|k| linv[(i, k)]).collect();
            combine_polys(&row, &raw).expect("independent adjoints")
        })
        .collect();
    let gram = adjoint_gram(ctx, &q);
    Ok(HolBasis { q, gram, condition })
}

/// `Σ c_j ω̄_j`, the output of [`h1_project`].
#[derive(Clone, Debug)]
pub struct HarmonicForm {
    pub coefficients: Vec<C64>,
    /// `Σ c̄_j q_j`, absent when all coefficients vanish.
    q: Option<HomogeneousPolynomial>,
}

impl CurveForm for HarmonicForm {
    fn ell(&self) -> i32 {
        0
    }
    fn coeff(&self, p: &CurvePoint) -> C64 {
        match &self.q {
            Some(q) => (p.chart.sigma() * q.eval(&p.e) / p.f_v).conj(),
            None => C64::default(),
        }
    }
}

/// `H₁[φ] = Σ_j c_j ω̄_j` with `c_j = (1/2i) ∫ φ ∧ ω_j = ∫ φ ω_j dA`.
///
/// Forms of twist `ℓ > d − 3` pair with nothing and project to zero.
pub fn h1_project(ctx: &CurveContext, basis: &HolBasis, form: &dyn CurveForm) -> Result<HarmonicForm> {
    let ell = form.ell();
    if ell != 0 {
        if ell > ctx.degree() as i32 - 3 {
            return Ok(HarmonicForm { coefficients: Vec::new(), q: None });
        }
        return Err(Error::HomogeneityMismatch(format!("H1 of a twist-{ell} form")));
    }
    let vals: Vec<C64> = ctx.set.samples.par_iter().map(|s| form.coeff(&s.point) * s.weight).collect();
    let coefficients: Vec<C64> = (0..basis.len())
        .map(|j| {
            let v: Vec<C64> = ctx.set.samples.par_iter().zip(&vals).map(|(s, f)| f * basis.omega(j, &s.point)).collect();
            pairwise_sum(&v)
        })
        .collect();
    let conj: Vec<C64> = coefficients.iter().map(|c| c.conj()).collect();
    let q = combine_polys(&conj, &basis.q);
    Ok(HarmonicForm { coefficients, q })
}

/// Branch-wise data near nodes: each sample value with the branch it lies on
/// (`None` away from nodes). Branch `k` is the one through preimage `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectImage {
    pub values: Vec<C64>,
    pub branch: Vec<Option<(usize, u8)>>,
}

/// Radius in base coordinates inside which samples get a branch label.
pub const NODE_LABEL_RADIUS: f64 = 0.25;

pub fn direct_image(ctx: &CurveContext, form: &dyn CurveForm) -> DirectImage {
    let bases = ctx.model.node_bases();
    let norm = ctx.model.normalization();
    let values: Vec<C64> = ctx.set.samples.par_iter().map(|s| form.coeff(&s.point)).collect();
    let branch = ctx
        .set
        .samples
        .par_iter()
        .map(|s| {
            let p = &s.point;
            let (i, _) = bases
                .iter()
                .enumerate()
                .find(|(_, (c, x))| base_distance(p.chart, p.x, *c, *x) < NODE_LABEL_RADIUS)?;
            let pre = ctx.model.nodes[i].preimages?;
            let t = norm?.parameter_of(&ctx.model.input_point(p))?;
            let k = if (t - pre[0]).norm() <= (t - pre[1]).norm() { 0 } else { 1 };
            Some((i, k))
        })
        .collect();
    DirectImage { values, branch }
}

/// The smooth locus of the curve and of its normalization carry the same
/// samples, so the pullback drops the branch labels.
pub fn pullback(image: &DirectImage) -> Vec<C64> {
    image.values.clone()
}

/// `f = χ(|t − m|) · conj((t − p₁)/(p₂ − p₁))` on the normalization, with
/// `χ ≡ 1` for `|t − m| ≤ inner` and `χ = 0` beyond `outer`.
#[derive(Clone, Debug)]
pub struct NodeFunction {
    model: Arc<PlaneCurveModel>,
    normalization: Normalization,
    pub p1: C64,
    pub p2: C64,
    pub center: C64,
    pub inner: f64,
    pub outer: f64,
}

impl NodeFunction {
    pub fn parameter(&self, p: &CurvePoint) -> Option<C64> {
        self.normalization.parameter_of(&self.model.input_point(p))
    }

    /// Curve point over parameter `t` in the chart where it is best seen.
    pub fn point_at(&self, t: C64) -> (CurvePoint, C64) {
        let w = self.model.to_working(&self.normalization.point(t));
        let chart = if w[0].norm() >= w[1].norm() { Chart::A } else { Chart::B };
        let p = self.model.point(chart, w[chart.base_index()] / w[chart.alpha()], w[2] / w[chart.alpha()]);
        (p, self.dx_dt(chart, t))
    }

    fn dx_dt(&self, chart: Chart, t: C64) -> C64 {
        let w = self.model.to_working(&self.normalization.point(t));
        let dw = self.model.to_working(&self.normalization.derivative(t));
        let (a, b) = (chart.alpha(), chart.base_index());
        (dw[b] * w[a] - w[b] * dw[a]) / (w[a] * w[a])
    }

    fn interpolant(&self, t: C64) -> C64 {
        ((t - self.p1) / (self.p2 - self.p1)).conj()
    }

    /// `(f, ∂f/∂t, ∂f/∂t̄)`.
    pub fn in_parameter(&self, t: C64) -> (C64, C64, C64) {
        let r = (t - self.center).norm();
        let width = self.outer - self.inner;
        let y = (self.outer - r) / width;
        let chi = smooth_step(y);
        let h = self.interpolant(t);
        let slope = (1.0 / (self.p2 - self.p1)).conj();
        if r == 0.0 {
            return (chi * h, C64::default(), chi * slope);
        }
        let dchi = -smooth_step_deriv(y) / width;
        let dt = dchi * (t - self.center).conj() / (2.0 * r) * h;
        let dtb = dchi * (t - self.center) / (2.0 * r) * h + chi * slope;
        (chi * h, dt, dtb)
    }
}

impl CurveFunction for NodeFunction {
    fn ell(&self) -> i32 {
        0
    }
    fn value(&self, p: &CurvePoint) -> C64 {
        self.parameter(p).map_or(C64::default(), |t| self.in_parameter(t).0)
    }
    fn dbar(&self, p: &CurvePoint) -> C64 {
        let Some(t) = self.parameter(p) else { return C64::default() };
        let (_, _, dtb) = self.in_parameter(t);
        if dtb == C64::default() {
            return dtb;
        }
        dtb * (1.0 / self.dx_dt(p.chart, t)).conj()
    }
    fn d(&self, p: &CurvePoint) -> C64 {
        let Some(t) = self.parameter(p) else { return C64::default() };
        let (_, dt, _) = self.in_parameter(t);
        if dt == C64::default() {
            return dt;
        }
        dt / self.dx_dt(p.chart, t)
    }
}

/// Minimum base-plane distance between a node path and any branch point.
pub const PATH_CLEARANCE: f64 = 0.05;

/// Node functions, their paths, and the orthonormalized kernels.
pub struct NodeData {
    pub functions: Vec<Arc<NodeFunction>>,
    /// Path parameters on the normalization, `p₁` to `p₂`.
    pub paths: Vec<Vec<C64>>,
    /// `∫_γ ∂̄f` per node.
    pub path_integrals: Vec<C64>,
    /// `K_i = L[∂̄f_i]`.
    pub kernels: Vec<LForm>,
    /// `K̂ = T K`, orthonormal under `⟨φ, ψ⟩ = ∫ φ ψ̄ dA`.
    pub transform: DMatrix<C64>,
    pub orthonormal: Vec<LForm>,
}

impl NodeData {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn empty() -> Self {
        Self {
            functions: Vec::new(),
            paths: Vec::new(),
            path_integrals: Vec::new(),
            kernels: Vec::new(),
            transform: DMatrix::zeros(0, 0),
            orthonormal: Vec::new(),
        }
    }
}

/// Builds `f_i` for each node with a known parametrization; paths are the
/// half circles from `p₁` to `p₂` through `m + i(p₁ − m)`-side.
pub fn node_functions(ctx: &CurveContext) -> Result<Vec<(Arc<NodeFunction>, Vec<C64>)>> {
    let model = Arc::new(ctx.model.clone());
    let mut out = Vec::new();
    let all_pre: Vec<[C64; 2]> = model.nodes.iter().filter_map(|n| n.preimages).collect();
    for node in &model.nodes {
        let (Some(norm), Some([p1, p2])) = (model.normalization(), node.preimages) else {
            return Err(Error::PathThroughExclusion("node without normalization preimages".into()));
        };
        let center = 0.5 * (p1 + p2);
        let half = 0.5 * (p2 - p1).norm();
        let f = NodeFunction {
            model: model.clone(),
            normalization: norm.clone(),
            p1,
            p2,
            center,
            inner: 1.2 * half,
            outer: 1.6 * half,
        };
        for pre in &all_pre {
            for q in pre {
                if *q != p1 && *q != p2 && (q - center).norm() < f.outer {
                    return Err(Error::PathThroughExclusion(format!("another node preimage at t = {q}")));
                }
            }
        }
        let path: Vec<C64> = (0..=64)
            .map(|k| center + (p1 - center) * C64::from_polar(1.0, -std::f64::consts::PI * k as f64 / 64.0))
            .collect();
        check_path(&f, &path, PATH_CLEARANCE.max(ctx.set.grid.branch_exclusion))?;
        out.push((Arc::new(f), path));
    }
    Ok(out)
}

/// Fails if an interior path point comes within `clearance` of a branch point.
pub fn check_path(f: &NodeFunction, path: &[C64], clearance: f64) -> Result<()> {
    for &t in path.iter().skip(1).take(path.len().saturating_sub(2)) {
        let (p, _) = f.point_at(t);
        for s in f.model.specials.iter().filter(|s| s.kind == SpecialKind::Branch) {
            if base_distance(p.chart, p.x, s.chart, s.x) < clearance {
                return Err(Error::PathThroughExclusion(format!("path point t = {t}")));
            }
        }
    }
    Ok(())
}

/// `∫_γ ∂̄f` along the half circle, evaluated through the curve's charts.
pub fn path_integral(f: &NodeFunction) -> C64 {
    let (x, w) = gauss_legendre(32);
    let mut total = C64::default();
    for (xi, wi) in x.iter().zip(&w) {
        let th = 0.5 * std::f64::consts::PI * (xi + 1.0);
        let rot = C64::from_polar(1.0, -th);
        let t = f.center + (f.p1 - f.center) * rot;
        let dt = (f.p1 - f.center) * rot * C64::new(0.0, -1.0);
        let (p, dxdt) = f.point_at(t);
        let dx = dxdt * dt;
        total += (f.dbar(&p) * dx.conj() + f.d(&p) * dx) * wi * 0.5 * std::f64::consts::PI;
    }
    total
}

pub fn node_data(ctx: &CurveContext, cal: &KernelCalibration) -> Result<NodeData> {
    let built = node_functions(ctx)?;
    if built.is_empty() {
        return Ok(NodeData::empty());
    }
    let mut functions = Vec::new();
    let mut paths = Vec::new();
    let mut path_integrals = Vec::new();
    let mut kernels = Vec::new();
    for (f, path) in built {
        path_integrals.push(path_integral(&f));
        let form = DbarOf(f.clone() as FunctionRef);
        kernels.push(apply_l(ctx, cal, &form)?);
        functions.push(f);
        paths.push(path);
    }
    let r = kernels.len();
    let mut g = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            g[(i, j)] = ctx.inner(&kernels[i], &kernels[j]);
        }
    }
    let transform = match g.clone().cholesky().and_then(|c| c.l().try_inverse()) {
        Some(t) => t,
        None => return Err(Error::GramIllConditioned(f64::INFINITY)),
    };
    let orthonormal = (0..r)
        .map(|i| {
            let parts: Vec<(C64, &LForm)> = (0..r).map(|k| (transform[(i, k)], &kernels[k])).collect();
            LForm::combine(&parts).expect("kernels share twist")
        })
        .collect();
    Ok(NodeData { functions, paths, path_integrals, kernels, transform, orthonormal })
}

/// `a_i[φ] = ⟨L[φ], K̂_i⟩`, the coordinates of `L[φ]` along the orthonormal
/// node kernels.
pub fn a_coefficients(ctx: &CurveContext, nodes: &NodeData, l_phi: &LForm) -> Vec<C64> {
    nodes.orthonormal.iter().map(|k| ctx.inner(l_phi, k)).collect()
}

/// `𝓛[φ]` with its node coefficients.
#[derive(Clone, Debug)]
pub struct CalL {
    pub form: LForm,
    /// Coefficients along the orthonormal kernels `K̂_i`.
    pub a: Vec<C64>,
    /// The same subtraction along the raw kernels `K_k = L[∂̄f_k]`.
    pub b: Vec<C64>,
}

/// The operators of the decomposition on one curve.
pub struct Hodge<'a> {
    pub ctx: &'a CurveContext,
    pub cal: &'a KernelCalibration,
    pub basis: HolBasis,
    pub nodes: NodeData,
}

impl<'a> Hodge<'a> {
    pub fn new(ctx: &'a CurveContext, cal: &'a KernelCalibration) -> Result<Self> {
        Ok(Self { ctx, cal, basis: hol_basis(ctx)?, nodes: node_data(ctx, cal)? })
    }

    pub fn h1(&self, form: &dyn CurveForm) -> Result<HarmonicForm> {
        h1_project(self.ctx, &self.basis, form)
    }

    pub fn cal_l(&self, form: &dyn CurveForm) -> Result<CalL> {
        let l = apply_l(self.ctx, self.cal, form)?;
        if self.nodes.is_empty() || l.is_zero() {
            return Ok(CalL { form: l, a: Vec::new(), b: Vec::new() });
        }
        let a = a_coefficients(self.ctx, &self.nodes, &l);
        let r = a.len();
        let b: Vec<C64> = (0..r).map(|k| (0..r).map(|i| a[i] * self.nodes.transform[(i, k)]).sum()).collect();
        let mut parts: Vec<(C64, &LForm)> = vec![(C64::new(1.0, 0.0), &l)];
        parts.extend(b.iter().zip(&self.nodes.kernels).map(|(c, k)| (-c, k)));
        let form = LForm::combine(&parts).expect("same twist");
        Ok(CalL { form, a, b })
    }

    /// `𝓘[φ] = I[φ − Σ b_k ∂̄f_k] + Σ b_k f_k` at the targets, given the
    /// coefficients `b` of [`CalL`].
    pub fn cal_i(&self, form: FormRef, b: &[C64], targets: &[CurvePoint]) -> Result<Vec<C64>> {
        let mut parts: Vec<(C64, FormRef)> = vec![(C64::new(1.0, 0.0), form)];
        for (c, f) in b.iter().zip(&self.nodes.functions) {
            parts.push((-c, Arc::new(DbarOf(f.clone() as FunctionRef))));
        }
        let corrected = FormSum::new(parts)?;
        let vals = apply_i(self.ctx, self.cal, &corrected, targets)?;
        Ok(targets
            .iter()
            .zip(vals)
            .map(|(p, v)| v.value + b.iter().zip(&self.nodes.functions).map(|(c, f)| c * f.value(p)).sum::<C64>())
            .collect())
    }

    /// Full decomposition, with residuals measured by finite differences at
    /// the probe points.
    pub fn decompose(&self, form: FormRef, probes: &[CurvePoint], h: f64) -> Result<HodgeDecomposition> {
        let ell = form.ell();
        let l = self.cal_l(form.as_ref())?;
        let h1 = self.h1(form.as_ref())?;
        let phi_norm = self.ctx.norm(form.as_ref());
        let l_norm = self.ctx.norm(&l.form);
        // ∂̄𝓘[φ] = φ − 𝓛[φ] on the whole curve.
        let dbar_i_norm = self.ctx.distance(form.as_ref(), &l.form);
        let h1_norm = self.ctx.norm(&h1);

        // R₁ = 𝓘[ψ] with ψ = φ + 𝓛[φ] − H₁[φ].
        let psi: FormRef = Arc::new(FormSum::new(vec![
            (C64::new(1.0, 0.0), form.clone()),
            (C64::new(1.0, 0.0), Arc::new(l.form.clone())),
            (C64::new(-1.0, 0.0), Arc::new(h1.clone())),
        ])?);
        let l_psi = self.cal_l(psi.as_ref())?;

        let stencils: Vec<Stencil> = probes.iter().map(|p| Stencil::new(&self.ctx.model, p, h)).collect::<Result<_>>()?;
        let mut targets = Vec::with_capacity(9 * probes.len());
        for st in &stencils {
            targets.push(st.center);
            targets.extend_from_slice(&st.points);
        }
        let prim = self.cal_i(form.clone(), &l.b, &targets)?;
        let green = self.cal_i(psi, &l_psi.b, &targets)?;

        let mut probe_rows = Vec::with_capacity(probes.len());
        let (mut hom, mut grn) = (0.0, 0.0);
        for (k, st) in stencils.iter().enumerate() {
            let p = &st.center;
            let phi = form.coeff(p);
            let d_prim = st.dbar(&prim[9 * k + 1..9 * k + 9]);
            let d_green = st.dbar(&green[9 * k + 1..9 * k + 9]);
            let lv = l.form.coeff(p);
            let hv = h1.coeff(p);
            hom += (phi - d_prim - lv).norm_sqr();
            grn += (phi - hv - d_green).norm_sqr();
            probe_rows.push(ProbeRow {
                chart: p.chart,
                x: p.x,
                v: p.v,
                phi,
                primitive: prim[9 * k],
                dbar_primitive: d_prim,
                cal_l: lv,
                h1: hv,
                green: green[9 * k],
                dbar_green: d_green,
            });
        }
        // Probe RMS against the curve-wide RMS of φ.
        let area: f64 = self.ctx.set.samples.iter().map(|s| s.weight).sum();
        let n = probes.len().max(1) as f64;
        let base = (phi_norm / area.sqrt()).max(1e-300);
        Ok(HodgeDecomposition {
            ell,
            phi_norm,
            dbar_i_norm,
            l_norm,
            h1_norm,
            a: l.a,
            h1_coefficients: h1.coefficients,
            homotopy_residual: (hom / n).sqrt() / base,
            green_residual: (grn / n).sqrt() / base,
            probes: probe_rows,
        })
    }
}

/// Values at one probe point.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub chart: Chart,
    pub x: C64,
    pub v: C64,
    pub phi: C64,
    pub primitive: C64,
    pub dbar_primitive: C64,
    pub cal_l: C64,
    pub h1: C64,
    pub green: C64,
    pub dbar_green: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HodgeDecomposition {
    pub ell: i32,
    pub phi_norm: f64,
    /// `‖∂̄𝓘[φ]‖`, computed as `‖φ − 𝓛[φ]‖`.
    pub dbar_i_norm: f64,
    /// `‖𝓛[φ]‖`.
    pub l_norm: f64,
    pub h1_norm: f64,
    pub a: Vec<C64>,
    pub h1_coefficients: Vec<C64>,
    /// Root-mean-square of `φ − ∂̄𝓘[φ] − 𝓛[φ]` over the probes, relative to
    /// the root-mean-square of `φ` over the curve.
    pub homotopy_residual: f64,
    /// `|φ − H₁[φ] − ∂̄R₁[φ]| / |φ|` over the same probes.
    pub green_residual: f64,
    pub probes: Vec<ProbeRow>,
}

#[cfg(test)]
mod tests;
