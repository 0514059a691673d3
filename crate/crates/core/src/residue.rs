//! Residue pairings of (0,1)-forms against dualizing sections.
//!
//! A section `γ_q = σ_α q(e) dx / F_v` of twist `−ℓ` pairs with a twist-`ℓ`
//! form through `2πi ∫ γ ∧ φ`. With `dx ∧ dx̄ = −2i dA` this is
//! `4π ∫ σ_α q(e) φ_α / F_v dA`. At a node both branches carry their own
//! samples, so the two-branch sum needs no special handling.

use crate::context::CurveContext;
use crate::curve::{CurvePoint, PlaneCurveModel};
use crate::error::{Error, Result};
use crate::fields::CurveForm;
use crate::poly::{Exponent, HomogeneousPolynomial};
use crate::quad::{pairwise_sum, pairwise_sum_real};
use crate::C64;
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Adjoint polynomial `q` (working frame, degree `d − 3 − ℓ`) and its twist `−ℓ`.
#[derive(Clone, Debug)]
pub struct DualizingSection {
    pub q: HomogeneousPolynomial,
    pub twist: i32,
}

impl DualizingSection {
    /// Chart coefficient of `dx`.
    pub fn gamma(&self, p: &CurvePoint) -> C64 {
        p.chart.sigma() * self.q.eval(&p.e) / p.f_v
    }
}

/// Monomials of degree `d − 3 − ℓ` in the working frame.
pub fn monomials(degree: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for a in (0..=degree).rev() {
        for b in (0..=degree - a).rev() {
            out.push([a, b, degree - a - b]);
        }
    }
    out
}

/// Sections pairing with forms of twist `ell`; `p_a` of them for `ell = 0`.
pub fn dualizing_sections(model: &PlaneCurveModel, ell: i32) -> Vec<DualizingSection> {
    let m = model.degree() as i32 - 3 - ell;
    if m < 0 {
        return Vec::new();
    }
    monomials(m as u32)
        .into_iter()
        .map(|e| DualizingSection {
            q: HomogeneousPolynomial::new([(e, C64::new(1.0, 0.0))]).expect("monomial"),
            twist: -ell,
        })
        .collect()
}

pub fn residual_pairing(ctx: &CurveContext, form: &dyn CurveForm, section: &DualizingSection) -> Result<C64> {
    if form.ell() + section.twist != 0 {
        return Err(Error::HomogeneityMismatch(format!(
            "form twist {} against section twist {}",
            form.ell(),
            section.twist
        )));
    }
    let v: Vec<C64> = ctx
        .set
        .samples
        .par_iter()
        .map(|s| section.gamma(&s.point) * form.coeff(&s.point) * s.weight)
        .collect();
    Ok(4.0 * std::f64::consts::PI * pairwise_sum(&v))
}

/// Twist-weighted L² norm of a section.
pub fn section_norm(ctx: &CurveContext, section: &DualizingSection) -> f64 {
    let v: Vec<f64> = ctx
        .set
        .samples
        .par_iter()
        .map(|s| s.point.norm().powi(-2 * section.twist) * section.gamma(&s.point).norm_sqr() * s.weight)
        .collect();
    pairwise_sum_real(&v).sqrt()
}

/// `P[i][j] = ⟨φ_i, γ_j⟩`.
pub fn pairing_matrix(
    ctx: &CurveContext,
    forms: &[&dyn CurveForm],
    sections: &[DualizingSection],
) -> Result<DMatrix<C64>> {
    let mut m = DMatrix::zeros(forms.len(), sections.len());
    for (i, f) in forms.iter().enumerate() {
        for (j, s) in sections.iter().enumerate() {
            m[(i, j)] = residual_pairing(ctx, *f, s)?;
        }
    }
    Ok(m)
}

/// Relative singular-value cut for [`class_rank`].
pub const RANK_CUT: f64 = 1e-3;

/// Number of independent classes among twist-0 forms.
///
/// Entries are divided by their Cauchy–Schwarz bound `4π‖φ_i‖‖γ_j‖`, so they
/// lie in the unit disk. A singular value counts if it is at least
/// [`RANK_CUT`] in absolute terms and relative to the largest.
pub fn class_rank(ctx: &CurveContext, forms: &[&dyn CurveForm]) -> Result<usize> {
    let sections = dualizing_sections(&ctx.model, 0);
    if sections.is_empty() || forms.is_empty() {
        return Ok(0);
    }
    let mut m = pairing_matrix(ctx, forms, &sections)?;
    let bound = 4.0 * std::f64::consts::PI;
    for (i, f) in forms.iter().enumerate() {
        let nf = ctx.norm(*f);
        for (j, s) in sections.iter().enumerate() {
            let scale = bound * nf * section_norm(ctx, s);
            m[(i, j)] = if scale > 0.0 { m[(i, j)] / scale } else { C64::default() };
        }
    }
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    Ok(sv.iter().filter(|&&s| s >= RANK_CUT && s >= RANK_CUT * top).count())
}
