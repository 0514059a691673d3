//! A curve together with its quadrature rule and Hefer data.

use crate::curve::{CurveSpec, PlaneCurveModel};
use crate::error::Result;
use crate::fields::CurveForm;
use crate::poly::{hefer_decompose, HeferMatrix};
use crate::quad::{pairwise_sum, pairwise_sum_real, GridSpec, SampleSet};
use crate::C64;
use rayon::prelude::*;

pub struct CurveContext {
    pub model: PlaneCurveModel,
    pub set: SampleSet,
    pub hefer: HeferMatrix,
}

impl CurveContext {
    pub fn new(spec: CurveSpec, grid: &GridSpec) -> Result<Self> {
        let model = PlaneCurveModel::with_switch_radius(spec, grid.switch_radius)?;
        let set = SampleSet::build(&model, grid)?;
        let hefer = hefer_decompose(model.working_polynomial())?;
        Ok(Self { model, set, hefer })
    }

    pub fn degree(&self) -> u32 {
        self.model.degree()
    }

    pub fn switch_radius(&self) -> f64 {
        self.model.switch_radius
    }

    pub fn curve_hash(&self) -> String {
        self.model.polynomial().hash_hex()
    }

    pub fn grid_hash(&self) -> String {
        self.set.grid.hash_hex()
    }

    /// Pointwise norm weight `|e|^{-2ℓ}` for a twist-`ℓ` coefficient.
    fn twist_weight(ell: i32, norm: f64) -> f64 {
        norm.powi(-2 * ell)
    }

    /// `⟨φ, ψ⟩ = ∫ φ ψ̄ dA` with the Fubini–Study twist weight.
    pub fn inner(&self, a: &dyn CurveForm, b: &dyn CurveForm) -> C64 {
        let ell = a.ell();
        let v: Vec<C64> = self
            .set
            .samples
            .par_iter()
            .map(|s| {
                let p = &s.point;
                a.coeff(p) * b.coeff(p).conj() * s.weight * Self::twist_weight(ell, p.norm())
            })
            .collect();
        pairwise_sum(&v)
    }

    pub fn norm(&self, a: &dyn CurveForm) -> f64 {
        let ell = a.ell();
        let v: Vec<f64> = self
            .set
            .samples
            .par_iter()
            .map(|s| a.coeff(&s.point).norm_sqr() * s.weight * Self::twist_weight(ell, s.point.norm()))
            .collect();
        pairwise_sum_real(&v).sqrt()
    }

    /// Norm of `a − b`.
    pub fn distance(&self, a: &dyn CurveForm, b: &dyn CurveForm) -> f64 {
        let ell = a.ell();
        let v: Vec<f64> = self
            .set
            .samples
            .par_iter()
            .map(|s| {
                let p = &s.point;
                (a.coeff(p) - b.coeff(p)).norm_sqr() * s.weight * Self::twist_weight(ell, p.norm())
            })
            .collect();
        pairwise_sum_real(&v).sqrt()
    }
}
