//! Univariate polynomial roots: companion-matrix eigenvalues plus Newton polish.

use crate::C64;
use nalgebra::DMatrix;

/// Horner evaluation of `Σ c[k] x^k` and its derivative.
#[inline]
pub fn horner(c: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::default();
    let mut dp = C64::default();
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

/// All roots of `Σ c[k] x^k`, with trailing (near-)zero leading coefficients
/// dropped. Roots are returned sorted by (re, im) for reproducibility.
pub fn poly_roots(c: &[C64]) -> Vec<C64> {
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut n = c.len();
    while n > 0 && c[n - 1].norm() <= 1e-14 * scale {
        n -= 1;
    }
    if n <= 1 {
        return Vec::new();
    }
    let deg = n - 1;
    let lead = c[deg];
    let mut roots = if deg == 1 {
        vec![-c[0] / lead]
    } else if deg == 2 {
        let (a, b, cc) = (lead, c[1], c[0]);
        let disc = (b * b - 4.0 * a * cc).sqrt();
        // Pick the sign that avoids cancellation.
        let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
        if q.norm() == 0.0 {
            vec![C64::default(), C64::default()]
        } else {
            vec![q / a, cc / q]
        }
    } else {
        companion_eigenvalues(&c[..n])
    };
    for r in roots.iter_mut() {
        *r = polish(&c[..n], *r);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

fn companion_eigenvalues(c: &[C64]) -> Vec<C64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let mut m = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -c[i] / lead;
    }
    match nalgebra::linalg::Schur::try_new(m, 1e-15, 500) {
        Some(s) => {
            let (_, t) = s.unpack();
            (0..deg).map(|i| t[(i, i)]).collect()
        }
        None => aberth(c),
    }
}

/// Aberth–Ehrlich iteration, used when the Schur iteration fails to converge.
fn aberth(c: &[C64]) -> Vec<C64> {
    let deg = c.len() - 1;
    let rad = 1.0 + c[..deg].iter().map(|z| (z / c[deg]).norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(0.5 * rad, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: C64 = (0..deg).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Newton steps until the update stalls below `1e-15` relative.
pub fn polish(c: &[C64], mut x: C64) -> C64 {
    for _ in 0..8 {
        let (p, dp) = horner(c, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let candidate = x - step;
        if horner(c, candidate).0.norm() > p.norm() {
            break;
        }
        x = candidate;
        if step.norm() <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}
