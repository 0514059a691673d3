//! Checks of the curve data: declared nodes, hidden singularities and the
//! points at infinity.

use crate::curve::{base_distance, InfinityPoint, PlaneCurveModel, Topology};
use crate::error::{Error, Result};
use crate::roots::poly_roots;
use crate::C64;
use serde::{Deserialize, Serialize};

/// Bound on `|P|` and `|∇P|` at a declared node, relative to the coefficient scale.
pub const NODE_TOL: f64 = 1e-9;
/// Minimum `|det|` of the unit tangent directions at a node.
pub const TANGENT_TOL: f64 = 1e-6;
/// Gradient below which a curve point counts as singular.
pub const SINGULAR_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeCheck {
    pub location: [C64; 3],
    pub value: f64,
    pub gradient: f64,
    pub tangent_det: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub degree: u32,
    pub topology: Topology,
    pub nodes: Vec<NodeCheck>,
    pub infinity_points: Vec<InfinityPoint>,
    pub multiplicity_sum: usize,
    /// Multiplicities declared in the curve data, if any.
    pub declared_multiplicities: Option<Vec<usize>>,
    /// Smallest `|∇P|` over the fibers above special points, away from nodes.
    pub min_gradient: f64,
    /// Working-frame chart points with vanishing gradient that are not declared.
    pub undeclared: Vec<[C64; 3]>,
    pub branch_points: usize,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.check().is_ok()
    }

    /// The first failed condition as an error.
    pub fn check(&self) -> Result<()> {
        if let Some(n) = self.nodes.iter().find(|n| !n.ok) {
            return Err(Error::NodeCheckFailed(format!(
                "|P| = {:e}, |∇P| = {:e}, tangent det = {:e}",
                n.value, n.gradient, n.tangent_det
            )));
        }
        if let Some(u) = self.undeclared.first() {
            return Err(Error::UndeclaredSingularity(format!("[{} : {} : {}]", u[0], u[1], u[2])));
        }
        let mut found: Vec<usize> = self.infinity_points.iter().map(|i| i.multiplicity).collect();
        found.sort_unstable();
        let expected = match &self.declared_multiplicities {
            Some(d) => {
                let mut d = d.clone();
                d.sort_unstable();
                d
            }
            None => found.clone(),
        };
        if self.multiplicity_sum != self.degree as usize || found != expected {
            return Err(Error::MultiplicityMismatch { found, expected });
        }
        Ok(())
    }
}

fn normalized(z: &[C64; 3]) -> [C64; 3] {
    let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    z.map(|c| c / n)
}

/// Runs every check and collects the findings; see [`ValidationReport::check`].
pub fn validate_curve(model: &PlaneCurveModel) -> ValidationReport {
    let p = model.polynomial();
    let scale = p.coefficient_scale();
    let nodes: Vec<NodeCheck> = model
        .nodes
        .iter()
        .map(|n| {
            let z = normalized(&n.location);
            let (v, g) = p.eval_grad(&z);
            let value = v.norm() / scale;
            let gradient = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / scale;
            let ok = value <= NODE_TOL && gradient <= NODE_TOL && n.tangent_det >= TANGENT_TOL;
            NodeCheck { location: n.location, value, gradient, tangent_det: n.tangent_det, ok }
        })
        .collect();

    let node_bases = model.node_bases();
    let mut min_gradient = f64::INFINITY;
    let mut undeclared = Vec::new();
    for s in &model.specials {
        let near_node = node_bases.iter().any(|&(c, x)| base_distance(c, x, s.chart, s.x) < 1e-6);
        // Raw roots: the polished fiber rejects the coalescing roots here.
        let roots = poly_roots(&model.fiber_coefficients(s.chart, s.x));
        for q in roots.into_iter().map(|v| model.point(s.chart, s.x, v)) {
            let g = model.gradient_norm(&q);
            let declared = near_node
                && model.spec().nodes.iter().any(|n| {
                    let a = normalized(&model.input_point(&q));
                    let b = normalized(n);
                    // Same projective point: |a ∧ b| small.
                    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
                    cross.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() < 1e-4
                });
            if declared {
                continue;
            }
            min_gradient = min_gradient.min(g);
            if g < SINGULAR_TOL && !undeclared.iter().any(|u: &[C64; 3]| (u[1] - q.e[1]).norm() < 1e-6) {
                undeclared.push(q.e);
            }
        }
    }
    let branch_points = model.specials.iter().filter(|s| s.ramification >= 2).count();
    let multiplicity_sum = model.infinity_points.iter().map(|i| i.multiplicity).sum();
    ValidationReport {
        degree: model.degree(),
        topology: model.topology,
        nodes,
        infinity_points: model.infinity_points.clone(),
        multiplicity_sum,
        declared_multiplicities: model.spec().infinity_multiplicities.clone(),
        min_gradient,
        undeclared,
        branch_points,
    }
}
