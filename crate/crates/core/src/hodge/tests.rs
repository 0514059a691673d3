use super::*;
use crate::calibration::test_calibration;
use crate::context::fixtures::{fermat3, nodal};
use crate::curve::examples::*;
use crate::fields::{ChartBump, CurveFormSamples, ConjAdjoint, FsForm, FsRational, Local, ZeroForm};
use crate::quad::{CauchyGreenDisk, GridSpec};

fn one() -> HomogeneousPolynomial {
    HomogeneousPolynomial::from_real(&[([0, 0, 0], 1.0)]).unwrap()
}

fn basic() -> FsForm<FsRational> {
    let h = FsRational::new(0, vec![([1, 1, 0], [0, 0, 0], C64::new(1.0, 0.0)), ([0, 0, 2], [0, 0, 0], C64::new(0.0, 0.5))])
        .unwrap();
    FsForm { h, i: 0, j: 2 }
}

fn bump_form(chart: Chart, c: C64, r: f64) -> FormRef {
    Arc::new(DbarOf(Arc::new(Local(ChartBump::new(chart, c, r)))))
}

#[test]
fn basis_sizes_and_orthonormality() {
    let quarter = GridSpec::default().scaled(0.75);
    let conic_ctx = CurveContext::new(conic(), &quarter).unwrap();
    assert!(hol_basis(&conic_ctx).unwrap().is_empty());
    assert!(hol_basis(nodal()).unwrap().is_empty());
    let b = hol_basis(fermat3()).unwrap();
    assert_eq!(b.len(), 1);
    let quartic = CurveContext::new(fermat(4), &quarter).unwrap();
    let b4 = hol_basis(&quartic).unwrap();
    assert_eq!(b4.len(), 3);
    let eye = DMatrix::<C64>::identity(3, 3);
    assert!((&b4.gram - eye).norm() < 1e-3);
}

/// Periods `∫_{b_i}^{b_j} (ω_a − ω_b)` of `ω = dx / (3v²)` on `x³ + v³ + 1 = 0`
/// by tanh–sinh quadrature, with sheets followed by phase from the midpoint.
fn fermat_periods() -> Vec<C64> {
    let b: Vec<C64> = (0..3).map(|k| C64::from_polar(1.0, std::f64::consts::PI * (2 * k + 1) as f64 / 3.0)).collect();
    let roots = |x: C64| -> [C64; 3] {
        let r = (-(1.0 + x * x * x)).powf(1.0 / 3.0);
        [0, 1, 2].map(|k| r * C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 3.0))
    };
    let h = 1.0 / 64.0;
    let mut out = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, c) = (b[i], b[j]);
            let mid = 0.5 * (a + c);
            let start = roots(mid);
            let mut sums = [C64::default(); 3];
            for dir in [1.0, -1.0] {
                let mut prev = start;
                for k in 0..400 {
                    let s = h * k as f64;
                    let u = 0.5 * std::f64::consts::PI * s.sinh();
                    let tau = dir * u.tanh();
                    let w = h * 0.5 * std::f64::consts::PI * s.cosh() / u.cosh().powi(2);
                    if w < 1e-300 || 1.0 - tau.abs() < 1e-15 {
                        break;
                    }
                    let x = mid + 0.5 * (c - a) * tau;
                    let vs = roots(x);
                    let mut next = prev;
                    for (n, p) in prev.iter().enumerate() {
                        next[n] = *vs.iter().min_by(|y, z| (*y / p).arg().abs().total_cmp(&(*z / p).arg().abs())).unwrap();
                    }
                    prev = next;
                    let weight = if k == 0 { 0.5 * w } else { w };
                    for n in 0..3 {
                        sums[n] += 0.5 * (c - a) * weight / (3.0 * next[n] * next[n]);
                    }
                }
            }
            for m in 0..3 {
                for n in m + 1..3 {
                    out.push(sums[m] - sums[n]);
                }
            }
        }
    }
    out
}

#[test]
fn gram_matches_period_lattice_area() {
    let ctx = fermat3();
    let ps: Vec<C64> = fermat_periods().into_iter().filter(|p| p.norm() > 1e-6).collect();
    let a = *ps.iter().min_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
    let b = *ps
        .iter()
        .filter(|p| (a.conj() * *p).im.abs() > 1e-6 * a.norm_sqr())
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap();
    let area = (a.conj() * b).im.abs();
    let g = adjoint_gram(ctx, &[one()])[(0, 0)].re;
    assert!((g - area).abs() < 1e-3 * area, "gram {g} lattice {area}");
}

#[test]
fn h1_is_a_projection() {
    let ctx = fermat3();
    let b = hol_basis(ctx).unwrap();
    let w = ConjAdjoint { q: b.q[0].clone(), scale: C64::new(1.0, 0.0) };
    let hw = h1_project(ctx, &b, &w).unwrap();
    assert!(ctx.distance(&hw, &w) < 1e-3 * ctx.norm(&w));
    let exact = bump_form(Chart::A, C64::new(0.3, -0.4), 0.6);
    let he = h1_project(ctx, &b, exact.as_ref()).unwrap();
    assert!(ctx.norm(&he) < 1e-3 * ctx.norm(exact.as_ref()));
    let f = basic();
    let once = h1_project(ctx, &b, &f).unwrap();
    let twice = h1_project(ctx, &b, &once).unwrap();
    assert!(ctx.distance(&once, &twice) < 1e-3 * ctx.norm(&once).max(1e-12));
    let twisted = h1_project(ctx, &b, &ZeroForm(1)).unwrap();
    assert!(twisted.coefficients.is_empty());
}

#[test]
fn direct_image_round_trip() {
    let f = basic();
    let smooth = direct_image(fermat3(), &f);
    assert!(smooth.branch.iter().all(|b| b.is_none()));
    let ctx = nodal();
    let img = direct_image(ctx, &f);
    assert_eq!(pullback(&img), CurveFormSamples::of_form(&f, &ctx.set).values);
    let labelled: Vec<u8> = img.branch.iter().flatten().map(|(_, k)| *k).collect();
    assert!(labelled.contains(&0) && labelled.contains(&1));
}

#[test]
fn node_local_solves_reproduce_the_form() {
    let ctx = nodal();
    let nf = &node_functions(ctx).unwrap()[0].0;
    let f = basic();
    // Coefficient of dt̄ on the normalization.
    let on_t = |t: C64| {
        let (p, dxdt) = nf.point_at(t);
        f.coeff(&p) * dxdt.conj()
    };
    for (k, pre) in [nf.p1, nf.p2].into_iter().enumerate() {
        let disk = CauchyGreenDisk::new(pre, 0.3);
        let other = if k == 0 { nf.p2 } else { nf.p1 };
        let constant = CauchyGreenDisk::new(other, 0.3).solve(on_t, &[other])[0];
        for probe in [pre + C64::new(0.08, 0.05), pre + C64::new(-0.04, -0.1)] {
            let h = 1e-3;
            let offs = [h, -h, 2.0 * h, -2.0 * h];
            let mut pts = Vec::new();
            for o in offs {
                pts.push(probe + o);
            }
            for o in offs {
                pts.push(probe + C64::new(0.0, o));
            }
            let g: Vec<C64> = disk.solve(on_t, &pts).into_iter().map(|v| v + constant).collect();
            let dx = (8.0 * (g[0] - g[1]) - (g[2] - g[3])) / (12.0 * h);
            let dy = (8.0 * (g[4] - g[5]) - (g[6] - g[7])) / (12.0 * h);
            let dbar = 0.5 * (dx + C64::i() * dy);
            let want = on_t(probe);
            assert!((dbar - want).norm() < 1e-2 * want.norm(), "{dbar} vs {want}");
        }
    }
}

#[test]
fn node_function_properties() {
    let ctx = nodal();
    let built = node_functions(ctx).unwrap();
    assert_eq!(built.len(), 1);
    let f = &built[0].0;
    assert_eq!(f.in_parameter(f.p1).0, C64::default());
    assert_eq!(f.in_parameter(f.p2).0, C64::new(1.0, 0.0));
    assert!((path_integral(f) - 1.0).norm() < 1e-3);
    for t in [C64::new(0.3, 0.9), C64::new(-0.7, -0.4), C64::new(1.2, 0.1)] {
        let (p, _) = f.point_at(t);
        let st = Stencil::new(&ctx.model, &p, 1e-3).unwrap();
        let vals: Vec<C64> = st.points.iter().map(|q| f.value(q)).collect();
        assert!(st.d(&vals).norm() < 1e-6, "{}", st.d(&vals).norm());
    }
}

#[test]
fn straight_path_hits_ramification() {
    // The real segment between the preimages crosses the ramification points ±1/√3.
    let ctx = nodal();
    let (f, arc) = &node_functions(ctx).unwrap()[0];
    assert!(check_path(f, arc, PATH_CLEARANCE).is_ok());
    let segment: Vec<C64> = (0..=64).map(|k| f.p1 + (f.p2 - f.p1) * (k as f64 / 64.0)).collect();
    assert!(matches!(check_path(f, &segment, PATH_CLEARANCE), Err(Error::PathThroughExclusion(_))));
}

#[test]
fn node_kernels_and_cal_l() {
    let ctx = nodal();
    let cal = test_calibration();
    let hodge = Hodge::new(ctx, cal).unwrap();
    let nd = &hodge.nodes;
    assert_eq!(nd.len(), 1);
    let a = a_coefficients(ctx, nd, &nd.orthonormal[0]);
    assert!((a[0] - 1.0).norm() < 1e-3);
    let df = DbarOf(nd.functions[0].clone() as FunctionRef);
    let l = hodge.cal_l(&df).unwrap();
    assert!(ctx.norm(&l.form) < 1e-2 * ctx.norm(&nd.kernels[0]));
    for form in [Arc::new(basic()) as FormRef, bump_form(Chart::A, C64::new(0.8, 0.6), 0.4)] {
        let l = hodge.cal_l(form.as_ref()).unwrap();
        assert!(ctx.norm(&l.form) <= 1e-2 * ctx.norm(form.as_ref()));
    }
    let smooth = Hodge::new(fermat3(), cal).unwrap();
    assert!(smooth.nodes.is_empty());
    let w = ConjAdjoint { q: one(), scale: C64::new(1.0, 0.0) };
    let lw = smooth.cal_l(&w).unwrap();
    assert!(lw.a.is_empty());
    assert!(fermat3().norm(&lw.form) >= 0.1 * fermat3().norm(&w));
}

#[test]
fn a_coefficients_are_grid_stable() {
    let cal = test_calibration();
    let coarse = CurveContext::new(nodal_cubic(), &GridSpec::default().scaled(0.75)).unwrap();
    let f = basic();
    let mut vals = Vec::new();
    for ctx in [nodal(), &coarse] {
        let h = Hodge::new(ctx, cal).unwrap();
        let l = apply_l(ctx, cal, &f).unwrap();
        // Fix the phase of K̂ by its value at a reference point.
        let p = ctx.model.fiber(Chart::A, C64::new(0.9, 0.3)).unwrap()[0];
        let phase = h.nodes.orthonormal[0].coeff(&p);
        vals.push(a_coefficients(ctx, &h.nodes, &l)[0] * phase / phase.norm());
    }
    assert!((vals[0] - vals[1]).norm() <= 1e-2 * vals[0].norm(), "{vals:?}");
}

#[test]
fn decomposition_of_harmonic_and_exact_forms() {
    let ctx = fermat3();
    let cal = test_calibration();
    let hodge = Hodge::new(ctx, cal).unwrap();
    let probes = crate::dbar::probe_points(&ctx.model, 8, 11, 0.12).unwrap();
    let w: FormRef = Arc::new(ConjAdjoint { q: hodge.basis.q[0].clone(), scale: C64::new(1.0, 0.0) });
    let dw = hodge.decompose(w, &probes, 0.01).unwrap();
    assert!(dw.green_residual <= 1e-2, "{}", dw.green_residual);
    assert!(dw.homotopy_residual <= 3e-2, "{}", dw.homotopy_residual);
    let c = C64::new(-0.4, 0.5);
    let g = bump_form(Chart::A, c, 0.7);
    let inside: Vec<CurvePoint> = [0.2, -0.3]
        .iter()
        .flat_map(|&o| ctx.model.fiber(Chart::A, c + C64::new(o, 0.5 * o)).unwrap())
        .collect();
    let dg = hodge.decompose(g, &inside, 0.01).unwrap();
    assert!(dg.h1_norm <= 1e-3 * dg.phi_norm);
    assert!(dg.green_residual <= 3e-2, "{}", dg.green_residual);
}

#[test]
fn nodal_forms_are_exact() {
    let ctx = nodal();
    let cal = test_calibration();
    let hodge = Hodge::new(ctx, cal).unwrap();
    let probes = crate::dbar::probe_points(&ctx.model, 8, 5, 0.12).unwrap();
    let d = hodge.decompose(Arc::new(basic()), &probes, 0.01).unwrap();
    assert!(d.l_norm <= 1e-2 * d.phi_norm);
    assert!(d.homotopy_residual <= 3e-2, "{}", d.homotopy_residual);
}

