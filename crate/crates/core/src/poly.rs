//! Homogeneous polynomials in three variables, chart restrictions and Hefer decompositions.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Exponent triple `(i, j, k)` of the monomial `ζ₀^i ζ₁^j ζ₂^k`.
pub type Exponent = [u32; 3];

/// Integer power by repeated squaring, exact for small exponents.
#[inline]
pub fn cpow(z: C64, n: u32) -> C64 {
    match n {
        0 => C64::new(1.0, 0.0),
        1 => z,
        2 => z * z,
        3 => z * z * z,
        _ => z.powu(n),
    }
}

#[inline]
fn monomial(p: &[C64; 3], e: &Exponent) -> C64 {
    cpow(p[0], e[0]) * cpow(p[1], e[1]) * cpow(p[2], e[2])
}

/// A nonzero complex form of degree `d` in `ζ₀, ζ₁, ζ₂`.
///
/// Terms are kept sorted lexicographically by exponent with duplicate
/// exponents merged, so equal polynomials have equal hashes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 5]>", into = "Vec<[f64; 5]>")]
pub struct HomogeneousPolynomial {
    degree: u32,
    terms: Vec<(Exponent, C64)>,
}

impl HomogeneousPolynomial {
    pub fn new(terms: impl IntoIterator<Item = (Exponent, C64)>) -> Result<Self> {
        let mut terms: Vec<(Exponent, C64)> = terms.into_iter().collect();
        terms.sort_by_key(|a| a.0);
        let mut merged: Vec<(Exponent, C64)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| c.norm() > 0.0);
        let Some(first) = merged.first() else {
            return Err(Error::InvalidPolynomial("all coefficients vanish".into()));
        };
        let degree = first.0.iter().sum::<u32>();
        if let Some((e, _)) = merged.iter().find(|(e, _)| e.iter().sum::<u32>() != degree) {
            return Err(Error::InvalidPolynomial(format!(
                "monomial {e:?} does not have degree {degree}"
            )));
        }
        Ok(Self { degree, terms: merged })
    }

    /// Builds from real integer-like coefficients, handy for tests and examples.
    pub fn from_real(terms: &[(Exponent, f64)]) -> Result<Self> {
        Self::new(terms.iter().map(|&(e, c)| (e, C64::new(c, 0.0))))
    }

    /// Parses `[i, j, k, re, im]` records.
    pub fn from_records(records: &[[f64; 5]]) -> Result<Self> {
        let mut terms = Vec::with_capacity(records.len());
        for r in records {
            let mut e = [0u32; 3];
            for (slot, &x) in e.iter_mut().zip(&r[..3]) {
                if x < 0.0 || x.fract() != 0.0 || x > 64.0 {
                    return Err(Error::InvalidPolynomial(format!("bad exponent record {r:?}")));
                }
                *slot = x as u32;
            }
            terms.push((e, C64::new(r[3], r[4])));
        }
        Self::new(terms)
    }

    pub fn to_records(&self) -> Vec<[f64; 5]> {
        self.terms
            .iter()
            .map(|(e, c)| [e[0] as f64, e[1] as f64, e[2] as f64, c.re, c.im])
            .collect()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[(Exponent, C64)] {
        &self.terms
    }

    pub fn coefficient(&self, e: Exponent) -> C64 {
        self.terms
            .binary_search_by(|t| t.0.cmp(&e))
            .map(|i| self.terms[i].1)
            .unwrap_or_default()
    }

    pub fn eval(&self, p: &[C64; 3]) -> C64 {
        self.terms.iter().map(|(e, c)| c * monomial(p, e)).sum()
    }

    /// Value and gradient at `p`.
    pub fn eval_grad(&self, p: &[C64; 3]) -> (C64, [C64; 3]) {
        let d = self.degree as usize;
        let mut pw = [[C64::new(1.0, 0.0); 16]; 3];
        for v in 0..3 {
            for n in 1..=d.min(15) {
                pw[v][n] = pw[v][n - 1] * p[v];
            }
        }
        let pow = |v: usize, n: u32| -> C64 {
            if (n as usize) < 16 {
                pw[v][n as usize]
            } else {
                cpow(p[v], n)
            }
        };
        let mut val = C64::default();
        let mut grad = [C64::default(); 3];
        for (e, c) in &self.terms {
            let m = [pow(0, e[0]), pow(1, e[1]), pow(2, e[2])];
            val += c * m[0] * m[1] * m[2];
            for v in 0..3 {
                if e[v] > 0 {
                    let mut t = c * e[v] as f64 * pow(v, e[v] - 1);
                    for (u, mu) in m.iter().enumerate() {
                        if u != v {
                            t *= mu;
                        }
                    }
                    grad[v] += t;
                }
            }
        }
        (val, grad)
    }

    /// Renames variables: the result `R` satisfies `R(ζ) = P(ζ ∘ perm)`, i.e.
    /// `R(ζ₀, ζ₁, ζ₂) = P(ζ_{perm[0]}, ζ_{perm[1]}, ζ_{perm[2]})`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let terms = self.terms.iter().map(|(e, c)| {
            let mut f = [0u32; 3];
            for (k, &pk) in perm.iter().enumerate() {
                f[pk] += e[k];
            }
            (f, *c)
        });
        Self::new(terms).expect("permutation preserves a valid polynomial")
    }

    /// Linear substitution: the result `R` satisfies `R(w) = P(T w)`.
    pub fn substitute_linear(&self, t: &[[C64; 3]; 3]) -> Self {
        use std::collections::BTreeMap;
        let mut out: BTreeMap<Exponent, C64> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut acc: BTreeMap<Exponent, C64> = BTreeMap::from([([0, 0, 0], *c)]);
            for (j, &ej) in e.iter().enumerate() {
                for _ in 0..ej {
                    let mut next: BTreeMap<Exponent, C64> = BTreeMap::new();
                    for (m, v) in &acc {
                        for k in 0..3 {
                            if t[j][k].norm() == 0.0 {
                                continue;
                            }
                            let mut m2 = *m;
                            m2[k] += 1;
                            *next.entry(m2).or_default() += v * t[j][k];
                        }
                    }
                    acc = next;
                }
            }
            for (m, v) in acc {
                *out.entry(m).or_default() += v;
            }
        }
        let scale = self.coefficient_scale();
        Self::new(out.into_iter().filter(|(_, v)| v.norm() > 1e-15 * scale))
            .expect("invertible substitution keeps the polynomial nonzero")
    }

    /// Scales all coefficients so the largest has modulus one.
    pub fn normalized(&self) -> Self {
        let m = self.coefficient_scale();
        Self { degree: self.degree, terms: self.terms.iter().map(|(e, c)| (*e, c / m)).collect() }
    }

    pub fn coefficient_scale(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Stable hex digest of the coefficient list.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for r in self.to_records() {
            for x in r {
                h.update(x.to_le_bytes());
            }
        }
        hex_string(&h.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl TryFrom<Vec<[f64; 5]>> for HomogeneousPolynomial {
    type Error = Error;
    fn try_from(r: Vec<[f64; 5]>) -> Result<Self> {
        Self::from_records(&r)
    }
}

impl From<HomogeneousPolynomial> for Vec<[f64; 5]> {
    fn from(p: HomogeneousPolynomial) -> Self {
        p.to_records()
    }
}

/// Value and gradient of `p` at `point`.
pub fn evaluate_and_gradient(p: &HomogeneousPolynomial, point: &[C64; 3]) -> (C64, [C64; 3]) {
    p.eval_grad(point)
}

/// Restriction `F(w) = P(ζ)/ζ_α^d` to the chart `ζ_α = 1`.
///
/// `w = (w₁, w₂)` are the two remaining coordinates in increasing index order.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePolynomial {
    chart: usize,
    degree: u32,
    terms: Vec<([u32; 2], C64)>,
}

pub fn other_indices(alpha: usize) -> [usize; 2] {
    match alpha {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

pub fn dehomogenize(p: &HomogeneousPolynomial, alpha: usize) -> Result<AffinePolynomial> {
    if alpha > 2 {
        return Err(Error::InvalidChart(alpha));
    }
    let [a, b] = other_indices(alpha);
    let mut terms: Vec<([u32; 2], C64)> =
        p.terms.iter().map(|(e, c)| ([e[a], e[b]], *c)).collect();
    terms.sort_by_key(|x| x.0);
    Ok(AffinePolynomial { chart: alpha, degree: p.degree, terms })
}

impl AffinePolynomial {
    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn terms(&self) -> &[([u32; 2], C64)] {
        &self.terms
    }

    pub fn eval(&self, w: [C64; 2]) -> C64 {
        self.terms.iter().map(|(e, c)| c * cpow(w[0], e[0]) * cpow(w[1], e[1])).sum()
    }

    /// Value and the two partial derivatives.
    pub fn eval_grad(&self, w: [C64; 2]) -> (C64, [C64; 2]) {
        let mut v = C64::default();
        let mut g = [C64::default(); 2];
        for (e, c) in &self.terms {
            let a = cpow(w[0], e[0]);
            let b = cpow(w[1], e[1]);
            v += c * a * b;
            if e[0] > 0 {
                g[0] += c * e[0] as f64 * cpow(w[0], e[0] - 1) * b;
            }
            if e[1] > 0 {
                g[1] += c * e[1] as f64 * a * cpow(w[1], e[1] - 1);
            }
        }
        (v, g)
    }

    /// Inverse of [`dehomogenize`] for the original degree.
    pub fn rehomogenize(&self) -> Result<HomogeneousPolynomial> {
        let [a, b] = other_indices(self.chart);
        HomogeneousPolynomial::new(self.terms.iter().map(|(e, c)| {
            let mut f = [0u32; 3];
            f[a] = e[0];
            f[b] = e[1];
            f[self.chart] = self.degree - e[0] - e[1];
            (f, *c)
        }))
    }
}

/// One term `c · ζ^a · z^b` of a Hefer entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiTerm {
    pub zeta: Exponent,
    pub z: Exponent,
    pub coef: C64,
}

/// Hefer functions with `Σ Qⁱ(ζ,z)(ζᵢ − zᵢ) = P(ζ) − P(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeferMatrix {
    degree: u32,
    entries: [Vec<BiTerm>; 3],
}

pub fn hefer_decompose(p: &HomogeneousPolynomial) -> Result<HeferMatrix> {
    if p.degree == 0 {
        return Err(Error::InvalidPolynomial("constant polynomial has no Hefer decomposition".into()));
    }
    let mut entries: [Vec<BiTerm>; 3] = Default::default();
    for (e, c) in &p.terms {
        // Telescoping step i: variables < i sit at z, variables > i at ζ, and
        // (ζᵢ^a − zᵢ^a)/(ζᵢ − zᵢ) = Σ_m ζᵢ^m zᵢ^(a−1−m).
        for i in 0..3 {
            let a = e[i];
            for m in 0..a {
                let mut zeta = [0u32; 3];
                let mut z = [0u32; 3];
                for j in 0..3 {
                    if j < i {
                        z[j] = e[j];
                    } else if j > i {
                        zeta[j] = e[j];
                    }
                }
                zeta[i] = m;
                z[i] = a - 1 - m;
                entries[i].push(BiTerm { zeta, z, coef: *c });
            }
        }
    }
    for list in entries.iter_mut() {
        list.sort_by_key(|x| (x.zeta, x.z));
        let mut merged: Vec<BiTerm> = Vec::with_capacity(list.len());
        for t in list.drain(..) {
            match merged.last_mut() {
                Some(l) if l.zeta == t.zeta && l.z == t.z => l.coef += t.coef,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coef.norm() > 0.0);
        *list = merged;
    }
    Ok(HeferMatrix { degree: p.degree, entries })
}

impl HeferMatrix {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn entry(&self, i: usize) -> &[BiTerm] {
        &self.entries[i]
    }

    pub fn eval(&self, zeta: &[C64; 3], z: &[C64; 3]) -> [C64; 3] {
        let mut out = [C64::default(); 3];
        for (o, list) in out.iter_mut().zip(&self.entries) {
            *o = list.iter().map(|t| t.coef * monomial(zeta, &t.zeta) * monomial(z, &t.z)).sum();
        }
        out
    }

    /// Freezes `z` and splits `Q(·, z)` by ζ-degree: entry `k` of the result
    /// lists the ζ-monomials of degree `k` with their coefficients (one
    /// coefficient per component i).
    pub fn graded_at(&self, z: &[C64; 3]) -> GradedHefer {
        let top = self.degree as usize;
        let mut levels: Vec<Vec<(Exponent, [C64; 3])>> = vec![Vec::new(); top];
        for (i, list) in self.entries.iter().enumerate() {
            for t in list {
                let k = t.zeta.iter().sum::<u32>() as usize;
                let c = t.coef * monomial(z, &t.z);
                let level = &mut levels[k];
                match level.iter_mut().find(|(e, _)| *e == t.zeta) {
                    Some((_, v)) => v[i] += c,
                    None => {
                        let mut v = [C64::default(); 3];
                        v[i] = c;
                        level.push((t.zeta, v));
                    }
                }
            }
        }
        GradedHefer { levels }
    }
}

/// `Q(ζ, z)` at fixed `z`, grouped by homogeneous degree in ζ.
#[derive(Clone, Debug)]
pub struct GradedHefer {
    pub levels: Vec<Vec<(Exponent, [C64; 3])>>,
}

impl GradedHefer {
    /// Degree-`k` part evaluated at ζ given precomputed powers `pw[v][n] = ζ_v^n`.
    #[inline]
    pub fn level_at(&self, k: usize, pw: &[[C64; 8]; 3]) -> [C64; 3] {
        let mut out = [C64::default(); 3];
        for (e, c) in &self.levels[k] {
            let m = pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize];
            out[0] += c[0] * m;
            out[1] += c[1] * m;
            out[2] += c[2] * m;
        }
        out
    }
}

/// Power table `pw[v][n] = p_v^n` for `n < 8`.
#[inline]
pub fn power_table(p: &[C64; 3], top: usize) -> [[C64; 8]; 3] {
    let mut pw = [[C64::new(1.0, 0.0); 8]; 3];
    for v in 0..3 {
        for n in 1..=top.min(7) {
            pw[v][n] = pw[v][n - 1] * p[v];
        }
    }
    pw
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_c(r: &mut ChaCha8Rng) -> C64 {
        c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    }

    fn random_poly(r: &mut ChaCha8Rng, d: u32) -> HomogeneousPolynomial {
        let mut terms = Vec::new();
        for i in 0..=d {
            for j in 0..=d - i {
                terms.push(([i, j, d - i - j], rand_c(r)));
            }
        }
        HomogeneousPolynomial::new(terms).unwrap()
    }

    #[test]
    fn product_value_and_gradient() {
        let p = HomogeneousPolynomial::from_real(&[([1, 1, 1], 1.0)]).unwrap();
        let (v, g) = evaluate_and_gradient(&p, &[c(1., 0.), c(2., 0.), c(3., 0.)]);
        assert_eq!(v, c(6., 0.));
        assert_eq!(g, [c(6., 0.), c(3., 0.), c(2., 0.)]);
    }

    #[test]
    fn fermat_gradient_at_vertex() {
        let p = HomogeneousPolynomial::from_real(&[([3, 0, 0], 1.), ([0, 3, 0], 1.), ([0, 0, 3], 1.)])
            .unwrap();
        let (v, g) = p.eval_grad(&[c(1., 0.), C64::default(), C64::default()]);
        assert_eq!(v, c(1., 0.));
        assert_eq!(g, [c(3., 0.), c(0., 0.), c(0., 0.)]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut r = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_poly(&mut r, 3);
            let z = [rand_c(&mut r), rand_c(&mut r), rand_c(&mut r)];
            let (_, g) = p.eval_grad(&z);
            let h = 1e-5;
            for v in 0..3 {
                let mut zp = z;
                let mut zm = z;
                zp[v] += h;
                zm[v] -= h;
                let fd = (p.eval(&zp) - p.eval(&zm)) / (2.0 * h);
                assert!((fd - g[v]).norm() < 1e-7, "{fd} vs {}", g[v]);
            }
        }
    }

    #[test]
    fn nodal_cubic_chart_zero() {
        let p = HomogeneousPolynomial::from_real(&[([1, 0, 2], 1.), ([0, 3, 0], -1.), ([1, 2, 0], -1.)])
            .unwrap();
        let f = dehomogenize(&p, 0).unwrap();
        let mut t = f.terms().to_vec();
        t.sort_by_key(|a| a.0);
        assert_eq!(t, vec![([0, 2], c(1., 0.)), ([2, 0], c(-1., 0.)), ([3, 0], c(-1., 0.))]);
    }

    #[test]
    fn linear_form_dehomogenizes_to_one() {
        let p = HomogeneousPolynomial::from_real(&[([1, 0, 0], 1.)]).unwrap();
        let f = dehomogenize(&p, 0).unwrap();
        assert_eq!(f.terms(), &[([0, 0], c(1., 0.))]);
    }

    #[test]
    fn chart_transition_identity() {
        let mut r = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = random_poly(&mut r, 4);
            let z = [rand_c(&mut r), rand_c(&mut r), rand_c(&mut r)];
            for a in 0..3 {
                for b in 0..3 {
                    let fa = dehomogenize(&p, a).unwrap();
                    let fb = dehomogenize(&p, b).unwrap();
                    let [a1, a2] = other_indices(a);
                    let [b1, b2] = other_indices(b);
                    let va = fa.eval([z[a1] / z[a], z[a2] / z[a]]);
                    let vb = fb.eval([z[b1] / z[b], z[b2] / z[b]]);
                    let rhs = (z[b] / z[a]).powu(4) * vb;
                    assert!((va - rhs).norm() <= 1e-12 * (1.0 + va.norm()));
                }
            }
        }
    }

    #[test]
    fn dehomogenize_round_trip() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let p = random_poly(&mut r, 5);
        for a in 0..3 {
            assert_eq!(dehomogenize(&p, a).unwrap().rehomogenize().unwrap(), p);
        }
    }

    #[test]
    fn hefer_of_linear_and_square() {
        let p = HomogeneousPolynomial::from_real(&[([1, 0, 0], 1.)]).unwrap();
        let q = hefer_decompose(&p).unwrap();
        assert_eq!(q.entry(0), &[BiTerm { zeta: [0; 3], z: [0; 3], coef: c(1., 0.) }]);
        assert!(q.entry(1).is_empty() && q.entry(2).is_empty());

        let p = HomogeneousPolynomial::from_real(&[([0, 2, 0], 1.)]).unwrap();
        let q = hefer_decompose(&p).unwrap();
        assert!(q.entry(0).is_empty() && q.entry(2).is_empty());
        assert_eq!(
            q.entry(1),
            &[
                BiTerm { zeta: [0, 0, 0], z: [0, 1, 0], coef: c(1., 0.) },
                BiTerm { zeta: [0, 1, 0], z: [0, 0, 0], coef: c(1., 0.) },
            ]
        );
    }

    #[test]
    fn hefer_of_fermat_is_symmetric_sum() {
        let p = HomogeneousPolynomial::from_real(&[([3, 0, 0], 1.), ([0, 3, 0], 1.), ([0, 0, 3], 1.)])
            .unwrap();
        let q = hefer_decompose(&p).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let zeta = [rand_c(&mut r), rand_c(&mut r), rand_c(&mut r)];
            let z = [rand_c(&mut r), rand_c(&mut r), rand_c(&mut r)];
            let v = q.eval(&zeta, &z);
            for i in 0..3 {
                let want = zeta[i] * zeta[i] + zeta[i] * z[i] + z[i] * z[i];
                assert!((v[i] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn degree_zero_has_no_hefer() {
        let p = HomogeneousPolynomial::from_real(&[([0, 0, 0], 2.)]).unwrap();
        assert!(hefer_decompose(&p).is_err());
    }

    #[test]
    fn records_round_trip_through_json() {
        let mut r = ChaCha8Rng::seed_from_u64(9);
        let p = random_poly(&mut r, 3);
        let s = serde_json::to_string(&p).unwrap();
        let back: HomogeneousPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.hash_hex(), p.hash_hex());
    }

    #[test]
    fn rejects_inhomogeneous_terms() {
        assert!(HomogeneousPolynomial::from_real(&[([1, 0, 0], 1.), ([1, 1, 0], 1.)]).is_err());
        assert!(HomogeneousPolynomial::from_real(&[([1, 0, 0], 0.)]).is_err());
    }

    #[test]
    fn graded_split_recombines() {
        let mut r = ChaCha8Rng::seed_from_u64(21);
        let p = random_poly(&mut r, 4);
        let q = hefer_decompose(&p).unwrap();
        let zeta = [rand_c(&mut r), rand_c(&mut r), rand_c(&mut r)];
        let z = [rand_c(&mut r), rand_c(&mut r), rand_c(&mut r)];
        let g = q.graded_at(&z);
        let pw = power_table(&zeta, 4);
        let mut sum = [C64::default(); 3];
        for k in 0..4 {
            let l = g.level_at(k, &pw);
            for i in 0..3 {
                sum[i] += l[i];
            }
        }
        let direct = q.eval(&zeta, &z);
        for i in 0..3 {
            assert!((sum[i] - direct[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn linear_substitution_composes() {
        let mut r = ChaCha8Rng::seed_from_u64(33);
        let p = random_poly(&mut r, 3);
        let t = [
            [c(1., 0.), C64::default(), C64::default()],
            [C64::default(), c(0.5, 0.2), c(1., 0.)],
            [C64::default(), c(1., 0.), c(-0.3, 0.)],
        ];
        let q = p.substitute_linear(&t);
        let w = [rand_c(&mut r), rand_c(&mut r), rand_c(&mut r)];
        let mut u = [C64::default(); 3];
        for j in 0..3 {
            for k in 0..3 {
                u[j] += t[j][k] * w[k];
            }
        }
        assert!((q.eval(&w) - p.eval(&u)).norm() < 1e-13);
    }

    #[test]
    fn permutation_renames_variables() {
        let p = HomogeneousPolynomial::from_real(&[([1, 0, 2], 1.), ([0, 3, 0], -1.)]).unwrap();
        let q = p.permuted([0, 2, 1]);
        let z = [c(0.3, 0.1), c(-0.7, 0.2), c(0.5, -0.4)];
        assert!((q.eval(&z) - p.eval(&[z[0], z[2], z[1]])).norm() < 1e-14);
    }
}
