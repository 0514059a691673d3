//! Fourth-order finite-difference `∂̄` and `∂` in the chart base coordinate.

use crate::curve::{base_distance, Chart, CurvePoint, PlaneCurveModel};
use crate::error::{Error, Result};
use crate::C64;

/// Offsets `±h, ±2h` along the real and imaginary axes around a center.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub center: CurvePoint,
    pub h: f64,
    /// Order: `+h, −h, +2h, −2h, +ih, −ih, +2ih, −2ih`.
    pub points: Vec<CurvePoint>,
}

const OFFSETS: [(f64, f64); 8] =
    [(1.0, 0.0), (-1.0, 0.0), (2.0, 0.0), (-2.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.0, 2.0), (0.0, -2.0)];

impl Stencil {
    /// Builds the stencil, following the center's sheet to each offset.
    pub fn new(model: &PlaneCurveModel, center: &CurvePoint, h: f64) -> Result<Self> {
        let reach = 2.0 * h;
        for s in &model.specials {
            let d = base_distance(center.chart, center.x, s.chart, s.x);
            if d < 4.0 * reach {
                return Err(Error::GridTooCoarse(format!(
                    "stencil of reach {reach:e} at {} is {d:e} from a special point",
                    center.x
                )));
            }
        }
        let mut points = Vec::with_capacity(8);
        for (a, b) in OFFSETS {
            let to = center.x + C64::new(a * h, b * h);
            let path: Vec<C64> = (0..=4).map(|k| center.x + (to - center.x) * (k as f64 / 4.0)).collect();
            let tr = model.continue_sheet(center.chart, &path, center.v)?;
            points.push(*tr.last().unwrap());
        }
        Ok(Self { center: *center, h, points })
    }

    fn partials(&self, f: &[C64]) -> (C64, C64) {
        let h12 = 12.0 * self.h;
        let dx = (8.0 * (f[0] - f[1]) - (f[2] - f[3])) / h12;
        let dy = (8.0 * (f[4] - f[5]) - (f[6] - f[7])) / h12;
        (dx, dy)
    }

    /// `∂f/∂x̄ = ½(∂_x + i∂_y) f` from values at [`Stencil::points`].
    pub fn dbar(&self, f: &[C64]) -> C64 {
        let (dx, dy) = self.partials(f);
        0.5 * (dx + C64::i() * dy)
    }

    /// `∂f/∂x = ½(∂_x − i∂_y) f`.
    pub fn d(&self, f: &[C64]) -> C64 {
        let (dx, dy) = self.partials(f);
        0.5 * (dx - C64::i() * dy)
    }
}

/// `∂̄` of a function given by a callback, at one center.
pub fn numerical_dbar<F: Fn(&CurvePoint) -> C64>(
    model: &PlaneCurveModel,
    center: &CurvePoint,
    h: f64,
    f: F,
) -> Result<C64> {
    let st = Stencil::new(model, center, h)?;
    let vals: Vec<C64> = st.points.iter().map(&f).collect();
    Ok(st.dbar(&vals))
}

/// Seeded random points for finite-difference diagnostics.
///
/// Three quarters fall in chart A with `|x| ≤ 0.9R`, the rest in chart B with
/// `|x| ≤ 0.9/R`; points within `margin` of a special point are redrawn.
pub fn probe_points(model: &PlaneCurveModel, n: usize, seed: u64, margin: f64) -> Result<Vec<CurvePoint>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let r = model.switch_radius;
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        if tries > 1000 * n.max(1) {
            return Err(Error::GridTooCoarse("no room for probe points".into()));
        }
        let (chart, reach) = if out.len() % 4 == 3 { (Chart::B, 0.9 / r) } else { (Chart::A, 0.9 * r) };
        let x = C64::from_polar(reach * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>());
        let sheet = rng.gen_range(0..model.degree() as usize);
        if model.specials.iter().any(|s| base_distance(chart, x, s.chart, s.x) < margin) {
            continue;
        }
        let fiber = model.fiber(chart, x)?;
        out.push(fiber[sheet % fiber.len()]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::examples::*;
    use crate::fields::{bump_profile, CurveFunction, Global, FsRational};

    #[test]
    fn conjugate_square_is_exact() {
        let m = PlaneCurveModel::new(line()).unwrap();
        for x in [C64::new(0.3, 0.2), C64::new(-0.8, 0.5)] {
            let p = m.fiber(Chart::A, x).unwrap()[0];
            let d = numerical_dbar(&m, &p, 1e-2, |q| q.x.conj() * q.x.conj()).unwrap();
            assert!((d - 2.0 * x.conj()).norm() < 1e-8);
            let hol = numerical_dbar(&m, &p, 1e-2, |q| q.x * q.x * q.x).unwrap();
            assert!(hol.norm() < 1e-10);
        }
    }

    #[test]
    fn fourth_order_convergence_on_bump() {
        let m = PlaneCurveModel::new(line()).unwrap();
        let p = m.fiber(Chart::A, C64::new(0.55, 0.25)).unwrap()[0];
        let f = |q: &CurvePoint| C64::new(bump_profile(q.x.norm() / 0.8).0, 0.0);
        let exact = {
            let r = p.x.norm();
            let (_, db) = bump_profile(r / 0.8);
            db / 0.8 * p.x / (2.0 * r)
        };
        let e1 = (numerical_dbar(&m, &p, 0.02, f).unwrap() - exact).norm();
        let e2 = (numerical_dbar(&m, &p, 0.01, f).unwrap() - exact).norm();
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn follows_sheets_on_cubic() {
        let m = PlaneCurveModel::new(fermat(3)).unwrap();
        let g = Global(FsRational::new(1, vec![([1, 0, 0], [0, 0, 1], C64::new(1.0, 0.0))]).unwrap());
        for p in m.fiber(Chart::A, C64::new(0.2, -0.3)).unwrap() {
            let d = numerical_dbar(&m, &p, 1e-2, |q| g.value(q)).unwrap();
            assert!((d - g.dbar(&p)).norm() < 1e-7);
        }
    }

    #[test]
    fn probes_are_seeded_and_clear_of_specials() {
        let m = PlaneCurveModel::new(nodal_cubic()).unwrap();
        let a = probe_points(&m, 12, 7, 0.1).unwrap();
        let b = probe_points(&m, 12, 7, 0.1).unwrap();
        assert_eq!(a.iter().map(|p| p.x).collect::<Vec<_>>(), b.iter().map(|p| p.x).collect::<Vec<_>>());
        for p in &a {
            assert!(Stencil::new(&m, p, 0.01).is_ok());
        }
    }

    #[test]
    fn refuses_stencils_near_branch_points() {
        let m = PlaneCurveModel::new(fermat(3)).unwrap();
        let b = m.specials[0].x;
        let p = m.fiber(Chart::A, b * 0.98).unwrap()[0];
        assert!(matches!(Stencil::new(&m, &p, 0.01), Err(Error::GridTooCoarse(_))));
    }
}
