use super::*;
use crate::calibration::test_calibration;
use crate::context::fixtures::{fermat3, nodal};
use crate::fields::{ChartBump, FsForm, FsRational, Local, ZeroForm};

/// `ζ₀^m` times the basic form of `ζ^a`, twist `|a| − 2 + m`.
fn basic_twisted(a: [u32; 3], m: i32) -> FormRef {
    let h = FsRational::new(0, vec![(a, [0, 0, 0], C64::new(1.0, 0.0))]).unwrap();
    Arc::new(Twisted { form: Arc::new(FsForm { h, i: 1, j: 2 }), m, index: 0 })
}

/// Twist zero with `ζ₀φ` smooth at infinity.
fn affine_form() -> FormRef {
    basic_twisted([1, 1, 1], -1)
}

fn bump(chart: Chart, center: C64) -> Arc<Local<ChartBump>> {
    Arc::new(Local(ChartBump::new(chart, center, 0.3)))
}

fn check(ctx: &CurveContext, n: usize) -> AffineCheck {
    AffineCheck::seeded(ctx, n, 7).unwrap()
}

#[test]
fn branches_match_ramification() {
    for (ctx, cycles) in [(fermat3(), vec![1, 1, 1]), (nodal(), vec![3])] {
        let br = infinity_branches(&ctx.model).unwrap();
        assert_eq!(br.iter().map(|b| b.cycle).collect::<Vec<_>>(), cycles);
        for b in &br {
            for k in 0..7 {
                let u = C64::from_polar(b.radius * (0.1 + 0.12 * k as f64), 0.7 * k as f64);
                let p = b.point(&ctx.model, u);
                assert!((b.series(u) - p.v).norm() < 1e-8, "{}", (b.series(u) - p.v).norm());
                let (back, miss) = b.locate(&p).unwrap();
                assert!((back - u).norm() < 1e-9 && miss < 1e-8);
            }
        }
    }
}

#[test]
fn homogeneity_and_extension_errors() {
    let ctx = nodal();
    assert!(matches!(affine_solution(ctx, affine_form(), 0), Err(Error::HomogeneityTooLow { .. })));
    assert!(matches!(affine_solution(ctx, basic_twisted([1, 1, 1], 0), 1), Err(Error::HomogeneityMismatch(_))));
    // ζ₀φ still has a pole of order two at infinity.
    assert!(matches!(affine_solution(ctx, basic_twisted([0, 5, 0], -3), 1), Err(Error::ExtensionUnbounded(_))));
    let far = Arc::new(DbarOf(bump(Chart::B, C64::default())));
    assert!(matches!(compact_solution(ctx, far, 1), Err(Error::SupportTouchesInfinity)));
}

#[test]
fn zero_form_gives_zero() {
    let ctx = nodal();
    let cal = test_calibration();
    let probes = check(ctx, 4).probes;
    for sol in [affine_solution(ctx, Arc::new(ZeroForm(0)), 1).unwrap(), compact_solution(ctx, Arc::new(ZeroForm(0)), 1).unwrap().0] {
        for g in sol.values(ctx, cal, &probes).unwrap() {
            assert!(g.norm() < 1e-14);
        }
    }
}

#[test]
fn nodal_affine_solve() {
    let ctx = nodal();
    let cal = test_calibration();
    let sol = affine_solution(ctx, affine_form(), 1).unwrap();
    assert!(sol.local_fit_residual() < 1e-2);
    let r = check_solution(ctx, cal, &sol, &check(ctx, 8), 0.0).unwrap();
    assert!(r.residual < 3e-2, "{}", r.residual);
    let g = r.growth.unwrap();
    assert!(g.bounded && g.samples > 10, "{g:?}");
}

#[test]
fn compact_solve_and_agreement() {
    let ctx = nodal();
    let cal = test_calibration();
    let f = bump(Chart::A, C64::new(1.0, 0.6));
    let phi: FormRef = Arc::new(DbarOf(f.clone()));
    let mut chk = check(ctx, 6);
    chk.growth = false;
    let pts: Vec<CurvePoint> = (0..6)
        .map(|k| ctx.model.fiber(Chart::A, C64::new(1.0, 0.6) + C64::from_polar(0.12, k as f64)).unwrap()[0])
        .collect();
    chk.probes = pts.clone();
    let r = solve_compact(ctx, cal, phi.clone(), 1, &chk).unwrap();
    assert!(r.residual < 3e-2, "{}", r.residual);
    assert_eq!(r.h1_norm, 0.0);

    // g − bump is constant on the support; both solvers agree.
    let (cs, _) = compact_solution(ctx, phi.clone(), 1).unwrap();
    let a = affine_solution(ctx, phi, 1).unwrap();
    let gc = cs.values(ctx, cal, &pts).unwrap();
    let ga = a.values(ctx, cal, &pts).unwrap();
    let diff: Vec<C64> = pts.iter().zip(&gc).map(|(p, g)| g - f.value(p)).collect();
    let scale = f.value(&pts[0]).norm();
    for d in &diff {
        assert!((d - diff[0]).norm() < 3e-2 * scale, "{d} {}", diff[0]);
    }
    let gap: Vec<C64> = gc.iter().zip(&ga).map(|(c, a)| c - a).collect();
    for d in &gap {
        assert!((d - gap[0]).norm() < 3e-2 * scale);
    }
}


