//! Cohomology of E^n, E = C/O_k, polarized by the diagonal Hermitian form
//! h = Σ a_ℓ |z_ℓ|². Classes are harmonic forms c·dz_I∧dz̄_J (all dz first,
//! both index sets increasing) with coefficients in k(i), so that the
//! normalizing constant κ = i/√d_k is exact.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use itertools::Itertools;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fpoly::{members, subsets, Sl2Module};
use crate::linalg::{self, Mat, Scalar};
use crate::qfield::{FieldElem, KElem, QuadField, Q};

pub type Monomial = (u32, u32);

/// Number of pairs (x, y), x ∈ a, y ∈ b, with x > y.
fn inversions(a: u32, b: u32) -> u32 {
    members(b).iter().map(|&y| (a >> (y + 1)).count_ones()).sum()
}

/// Sign of dz_{I1}dz̄_{J1} ∧ dz_{I2}dz̄_{J2} relative to dz_{I1∪I2}dz̄_{J1∪J2};
/// None when an index repeats.
pub fn wedge_sign(m1: Monomial, m2: Monomial) -> Option<bool> {
    let ((i1, j1), (i2, j2)) = (m1, m2);
    if i1 & i2 != 0 || j1 & j2 != 0 {
        return None;
    }
    let swaps = j1.count_ones() * i2.count_ones() + inversions(i1, i2) + inversions(j1, j2);
    Some(swaps % 2 == 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohClass<T = KElem> {
    pub n: usize,
    pub terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> CohClass<T> {
    pub fn zero(n: usize) -> Self {
        CohClass { n, terms: BTreeMap::new() }
    }

    pub fn monomial(n: usize, m: Monomial, c: T) -> Self {
        let mut x = Self::zero(n);
        x.add_term(m, c);
        x
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: T) {
        if c.is_zero_s() {
            return;
        }
        match self.terms.get_mut(&m) {
            None => {
                self.terms.insert(m, c);
            }
            Some(x) => {
                let s = x.plus(&c);
                if s.is_zero_s() {
                    self.terms.remove(&m);
                } else {
                    *x = s;
                }
            }
        }
    }

    pub fn get(&self, m: Monomial) -> Option<&T> {
        self.terms.get(&m)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        CohClass { n: self.n, terms: self.terms.iter().map(|(m, c)| (*m, c.negate())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut r = Self::zero(self.n);
        for (m, x) in &self.terms {
            r.add_term(*m, x.times(c));
        }
        r
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::Validation(format!("ring mismatch: rank {} vs {}", self.n, o.n)));
        }
        let mut r = Self::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                if let Some(neg) = wedge_sign(*m1, *m2) {
                    let c = c1.times(c2);
                    r.add_term((m1.0 | m2.0, m1.1 | m2.1), if neg { c.negate() } else { c });
                }
            }
        }
        Ok(r)
    }

    /// Bidegrees present.
    pub fn bidegrees(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.terms.keys().map(|(i, j)| (i.count_ones() as usize, j.count_ones() as usize)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn is_homogeneous(&self) -> bool {
        self.bidegrees().len() <= 1
    }

    pub fn component(&self, p: usize, q: usize) -> Self {
        CohClass {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i.count_ones() as usize == p && j.count_ones() as usize == q)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn degree(&self) -> Option<usize> {
        let d: Vec<usize> = self.bidegrees().iter().map(|(p, q)| p + q).unique().collect();
        match d.as_slice() {
            [] => Some(0),
            [x] => Some(*x),
            _ => None,
        }
    }
}

impl CohClass<KElem> {
    /// The semilinear involution c·dz_I dz̄_J ↦ conj(c)(−1)^{|I||J|} dz_J dz̄_I.
    pub fn sigma(&self) -> Self {
        let mut r = Self::zero(self.n);
        for ((i, j), c) in &self.terms {
            let c = c.conj();
            let neg = (i.count_ones() * j.count_ones()) % 2 == 1;
            r.add_term((*j, *i), if neg { -c } else { c });
        }
        r
    }

    pub fn is_rational(&self) -> bool {
        self.sigma() == *self
    }

    pub fn to_c64(&self) -> CohClass<num_complex::Complex64> {
        CohClass { n: self.n, terms: self.terms.iter().map(|(m, c)| (*m, c.to_c64())).collect() }
    }
}

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

#[derive(Debug)]
pub struct CohRing {
    pub k: QuadField,
    pub n: usize,
    pub a: Vec<i64>,
    kappa: KElem,
    modules: OnceLock<Vec<Sl2Module<KElem>>>,
}

impl Clone for CohRing {
    fn clone(&self) -> Self {
        CohRing { k: self.k, n: self.n, a: self.a.clone(), kappa: self.kappa.clone(), modules: self.modules.clone() }
    }
}

impl CohRing {
    pub fn new(k: QuadField, a: Vec<i64>) -> Result<Self> {
        if a.is_empty() || a.len() > 8 {
            return Err(Error::Validation(format!("rank {} outside 1..=8", a.len())));
        }
        if a.iter().any(|&x| x <= 0) {
            return Err(Error::Validation("diagonal entries must be positive".into()));
        }
        let kappa = KElem::i_over_sqrt_dk(&k);
        Ok(CohRing { k, n: a.len(), a, kappa, modules: OnceLock::new() })
    }

    pub fn d(&self) -> u64 {
        self.k.d
    }

    pub fn kappa(&self) -> &KElem {
        &self.kappa
    }

    fn kq(&self, x: Q) -> KElem {
        KElem::from_q(self.d(), x)
    }

    pub fn zero(&self) -> CohClass {
        CohClass::zero(self.n)
    }

    pub fn one(&self) -> CohClass {
        CohClass::monomial(self.n, (0, 0), KElem::one(self.d()))
    }

    pub fn dim(&self, p: usize, q: usize) -> usize {
        crate::fpoly::binom(self.n, p) * crate::fpoly::binom(self.n, q)
    }

    /// Monomials of bidegree (p,q) in basis order.
    pub fn monomials(&self, p: usize, q: usize) -> Vec<Monomial> {
        let js = subsets(self.n, q);
        subsets(self.n, p).into_iter().flat_map(|i| js.iter().map(move |&j| (i, j))).collect()
    }

    fn check_len(&self, v: usize) -> Result<()> {
        if v != self.n {
            return Err(Error::Validation(format!("vector of length {v} in rank {} ring", self.n)));
        }
        Ok(())
    }

    /// κ Σ a_ℓ a_j λ_ℓ conj(μ_j) dz_ℓ∧dz̄_j, coordinates in k(i).
    pub fn f_sesq_k(&self, lam: &[KElem], mu: &[KElem]) -> Result<CohClass> {
        self.check_len(lam.len())?;
        self.check_len(mu.len())?;
        let mut r = self.zero();
        for l in 0..self.n {
            for j in 0..self.n {
                let c = &(&lam[l] * &mu[j].conj()) * &self.kappa;
                r.add_term((1 << l, 1 << j), c.scale(&qi(self.a[l] * self.a[j])));
            }
        }
        Ok(r)
    }

    pub fn f_sesq(&self, lam: &[FieldElem], mu: &[FieldElem]) -> Result<CohClass> {
        let ext = |v: &[FieldElem]| v.iter().map(|x| x.to_ext()).collect::<Vec<_>>();
        self.f_sesq_k(&ext(lam), &ext(mu))
    }

    pub fn f_quad_k(&self, lam: &[KElem]) -> Result<CohClass> {
        self.f_sesq_k(lam, lam)
    }

    pub fn f_quad(&self, lam: &[FieldElem]) -> Result<CohClass> {
        self.f_sesq(lam, lam)
    }

    fn unit(&self, l: usize) -> Vec<FieldElem> {
        (0..self.n).map(|i| if i == l { self.k.one() } else { self.k.zero() }).collect()
    }

    pub fn y(&self, l: usize) -> CohClass {
        self.f_quad(&self.unit(l)).expect("length n")
    }

    /// f(e_ℓ − e_j) − Y_ℓ − Y_j.
    pub fn y_plus(&self, l: usize, j: usize) -> CohClass {
        let mut v = self.unit(l);
        v[j] = -&self.k.one();
        self.f_quad(&v).expect("length n").sub(&self.y(l)).sub(&self.y(j))
    }

    /// f(e_ℓ − δ e_j) − Y_ℓ − d_k Y_j.
    pub fn y_minus(&self, l: usize, j: usize) -> CohClass {
        let mut v = self.unit(l);
        v[j] = -&self.k.delta();
        let dk = self.kq(qi(self.k.disc as i64));
        self.f_quad(&v).expect("length n").sub(&self.y(l)).sub(&self.y(j).scale(&dk))
    }

    /// f(λ) as a rational combination of Y_ℓ, Y⁺, Y⁻:
    /// Σ|λ_ℓ|²Y_ℓ − Σ_{ℓ<j} (Re(c) Y⁺_{ℓj} − Im(c)/√d_k Y⁻_{ℓj}), c = λ_ℓ conj(λ_j).
    pub fn f_quad_expansion(&self, lam: &[FieldElem]) -> Result<CohClass> {
        self.check_len(lam.len())?;
        let mut r = self.zero();
        for l in 0..self.n {
            r = r.add(&self.y(l).scale(&self.kq(lam[l].norm())));
        }
        for l in 0..self.n {
            for j in l + 1..self.n {
                let c = &lam[l] * &lam[j].conj();
                // Im(c)/√d_k
                let im_over = c.delta_part();
                r = r.sub(&self.y_plus(l, j).scale(&self.kq(c.re())));
                r = r.add(&self.y_minus(l, j).scale(&self.kq(im_over)));
            }
        }
        Ok(r)
    }

    pub fn class_d(&self) -> CohClass {
        let mut r = self.zero();
        for l in 0..self.n {
            r = r.add(&self.y(l).scale(&self.kq(Q::new(1.into(), self.a[l].into()))));
        }
        r
    }

    pub fn d_power(&self, r: usize) -> CohClass {
        let d = self.class_d();
        (0..r).fold(self.one(), |acc, _| acc.wedge(&d).expect("same ring"))
    }

    pub fn wedge(&self, x: &CohClass, y: &CohClass) -> Result<CohClass> {
        self.check_len(x.n)?;
        x.wedge(y)
    }

    fn volume_coeff(&self) -> KElem {
        let mut v = self.one();
        for l in 0..self.n {
            v = v.wedge(&CohClass::monomial(self.n, (1 << l, 1 << l), self.kappa.clone())).expect("same ring");
        }
        let full = (1u32 << self.n) - 1;
        v.get((full, full)).cloned().expect("volume form is nonzero")
    }

    /// Coefficient of the normalized volume form Π_ℓ κ dz_ℓ∧dz̄_ℓ.
    pub fn integrate(&self, x: &CohClass) -> Result<KElem> {
        self.check_len(x.n)?;
        let full = (1u32 << self.n) - 1;
        Ok(match x.get((full, full)) {
            Some(c) => c * &self.volume_coeff().inv().expect("nonzero"),
            None => KElem::zero(self.d()),
        })
    }

    pub fn integrate_c(&self, x: &CohClass<num_complex::Complex64>) -> num_complex::Complex64 {
        let full = (1u32 << self.n) - 1;
        match x.get((full, full)) {
            Some(c) => c / self.volume_coeff().to_c64(),
            None => num_complex::Complex64::zero(),
        }
    }

    fn piece_range(&self, s: i64) -> (usize, usize) {
        let lo = s.max(0) as usize;
        let hi = (self.n as i64 + s).min(self.n as i64) as usize;
        (lo, hi)
    }

    /// Lefschetz modules, one per s = p − q, in the scaled basis
    /// κ^p dz_I∧dz̄_J where ∧D and its dual are rational.
    pub fn lefschetz_sl2(&self) -> &[Sl2Module<KElem>] {
        self.modules.get_or_init(|| {
            let n = self.n as i64;
            (-n..=n)
                .map(|s| {
                    let (lo, hi) = self.piece_range(s);
                    let dims: Vec<usize> = (lo..=hi).map(|p| self.dim(p, (p as i64 - s) as usize)).collect();
                    let e: Vec<Mat<Q>> = (lo..hi)
                        .map(|p| {
                            let q = (p as i64 - s) as usize;
                            let src = self.monomials(p, q);
                            let dst = self.monomials(p + 1, q + 1);
                            let pos: BTreeMap<Monomial, usize> = dst.iter().enumerate().map(|(i, m)| (*m, i)).collect();
                            let mut m = linalg::zeros(dst.len(), src.len(), &Q::zero());
                            for (c, mono) in src.iter().enumerate() {
                                for l in 0..self.n {
                                    if let Some(neg) = wedge_sign((1 << l, 1 << l), *mono) {
                                        let r = pos[&(mono.0 | 1 << l, mono.1 | 1 << l)];
                                        m[r][c] = qi(if neg { -self.a[l] } else { self.a[l] });
                                    }
                                }
                            }
                            m
                        })
                        .collect();
                    let lw = 2 * lo as i64 - s - n;
                    let m = Sl2Module::complete(lw, dims, e, Q::zero()).expect("∧D is a Lefschetz operator");
                    let d = self.d();
                    m.map(|x| KElem::from_q(d, x.clone()), KElem::zero(d))
                })
                .collect()
        })
    }

    /// The module containing bidegree (p,q) and the piece index there.
    pub fn piece(&self, p: usize, q: usize) -> (&Sl2Module<KElem>, usize) {
        let s = p as i64 - q as i64;
        let (lo, _) = self.piece_range(s);
        (&self.lefschetz_sl2()[(s + self.n as i64) as usize], p - lo)
    }

    pub fn to_scaled(&self, x: &CohClass, p: usize, q: usize) -> Vec<KElem> {
        let inv = self.kappa.pow(p as u32).inv().expect("nonzero");
        self.monomials(p, q)
            .iter()
            .map(|m| x.get(*m).map(|c| c * &inv).unwrap_or_else(|| KElem::zero(self.d())))
            .collect()
    }

    pub fn from_scaled(&self, v: &[KElem], p: usize, q: usize) -> CohClass {
        let kp = self.kappa.pow(p as u32);
        let mut r = self.zero();
        for (m, c) in self.monomials(p, q).into_iter().zip(v) {
            r.add_term(m, c * &kp);
        }
        r
    }

    pub fn weight(&self, p: usize, q: usize) -> i64 {
        (p + q) as i64 - self.n as i64
    }

    /// The lowering operator of the Lefschetz triple.
    pub fn dual_lefschetz(&self, x: &CohClass) -> CohClass {
        let mut r = self.zero();
        for (p, q) in x.bidegrees() {
            let (m, j) = self.piece(p, q);
            if j == 0 {
                continue;
            }
            let v = self.to_scaled(&x.component(p, q), p, q);
            r = r.add(&self.from_scaled(&m.lower(j, &v), p - 1, q - 1));
        }
        r
    }

    /// Rank of D^{n−2g}· : H^{g,g} → H^{n−g,n−g}.
    pub fn hard_lefschetz_rank(&self, g: usize) -> usize {
        let (m, j) = self.piece(g, g);
        let steps = self.n - 2 * g;
        let cols: Vec<Vec<KElem>> = linalg::identity(m.dims[j], &KElem::zero(self.d()))
            .into_iter()
            .map(|v| m.raise_to(j, &v, j + steps))
            .collect();
        linalg::rank(&cols)
    }

    /// The n² rational classes Y_ℓ, Y⁺_{ℓj}, Y⁻_{ℓj} (ℓ < j).
    pub fn degree_two_generators(&self) -> Vec<CohClass> {
        let mut v: Vec<CohClass> = (0..self.n).map(|l| self.y(l)).collect();
        for l in 0..self.n {
            for j in l + 1..self.n {
                v.push(self.y_plus(l, j));
                v.push(self.y_minus(l, j));
            }
        }
        v
    }

    /// Rational basis of H^{ℓ,ℓ} from ℓ-fold products of the degree-two
    /// generators, chosen greedily in lexicographic order of index sets.
    pub fn rational_hodge_basis(&self, l: usize) -> Result<Vec<CohClass>> {
        if l > self.n {
            return Err(Error::Validation(format!("no H^{{{l},{l}}} in rank {}", self.n)));
        }
        if l == 0 {
            return Ok(vec![self.one()]);
        }
        let gens = self.degree_two_generators();
        let target = self.dim(l, l);
        let mut echelon = Echelon::new(KElem::zero(self.d()));
        let mut out = vec![];
        let strict = (0..gens.len()).combinations(l);
        let multi = (0..gens.len()).combinations_with_replacement(l);
        for idx in strict.chain(multi) {
            if out.len() == target {
                break;
            }
            let x = idx.iter().fold(self.one(), |acc, &i| acc.wedge(&gens[i]).expect("same ring"));
            if x.is_zero() {
                continue;
            }
            if echelon.insert(self.to_scaled(&x, l, l)) {
                out.push(x);
            }
        }
        if out.len() < target {
            return Err(Error::Degenerate(format!("products span only {} of {target} dimensions", out.len())));
        }
        Ok(out)
    }

    /// Rational basis of primitive H^{ℓ,ℓ} (2ℓ ≤ n): the primitive projector
    /// applied to the rational basis, then reduced.
    pub fn primitive_hodge_basis(&self, l: usize) -> Result<Vec<CohClass>> {
        if 2 * l > self.n {
            return Ok(vec![]);
        }
        let (m, j) = self.piece(l, l);
        let mm = (self.n - 2 * l) as i64;
        let target = self.dim(l, l) - if l > 0 { self.dim(l - 1, l - 1) } else { 0 };
        let mut echelon = Echelon::new(KElem::zero(self.d()));
        let mut out = vec![];
        for x in self.rational_hodge_basis(l)? {
            let v = m.project(j, mm, &self.to_scaled(&x, l, l))?;
            if echelon.insert(v.clone()) {
                out.push(self.from_scaled(&v, l, l));
            }
        }
        debug_assert_eq!(out.len(), target);
        Ok(out)
    }

    pub fn descriptor(&self) -> Value {
        json!({"d": self.k.d, "n": self.n, "a": self.a})
    }

    pub fn class_to_json(&self, x: &CohClass) -> Value {
        let terms: Vec<Value> = x
            .terms
            .iter()
            .map(|((i, j), c)| {
                let one = |m: u32| members(m).iter().map(|t| t + 1).collect::<Vec<_>>();
                json!({"I": one(*i), "J": one(*j), "c": c.to_json()})
            })
            .collect();
        json!({"ring": self.descriptor(), "terms": terms})
    }

    pub fn class_from_json(&self, v: &Value) -> Result<CohClass> {
        let terms = v["terms"].as_array().ok_or_else(|| Error::Parse("class needs a terms array".into()))?;
        let mut r = self.zero();
        for t in terms {
            let mask = |key: &str| -> Result<u32> {
                let arr = t[key].as_array().ok_or_else(|| Error::Parse(format!("term needs {key}")))?;
                let mut m = 0u32;
                for x in arr {
                    let i = x.as_u64().filter(|&i| i >= 1 && i as usize <= self.n);
                    let i = i.ok_or_else(|| Error::Parse(format!("bad index in {key}")))?;
                    m |= 1 << (i - 1);
                }
                Ok(m)
            };
            r.add_term((mask("I")?, mask("J")?), KElem::from_json(&t["c"], self.d())?);
        }
        Ok(r)
    }
}

/// Incremental row echelon form for greedy independence tests.
pub struct Echelon<T> {
    rows: Vec<(usize, Vec<T>)>,
    zero: T,
}

impl<T: Scalar> Echelon<T> {
    pub fn new(zero: T) -> Self {
        Echelon { rows: vec![], zero }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds v if independent of the rows so far.
    pub fn insert(&mut self, mut v: Vec<T>) -> bool {
        for (p, r) in &self.rows {
            if !v[*p].is_zero_s() {
                let f = v[*p].clone();
                for (x, y) in v.iter_mut().zip(r) {
                    if !y.is_zero_s() {
                        *x = x.minus(&f.times(y));
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero_s()) else {
            return false;
        };
        let inv = v[p].recip();
        let v: Vec<T> = v.iter().map(|x| if x.is_zero_s() { self.zero.zero_like() } else { x.times(&inv) }).collect();
        self.rows.push((p, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::make_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_elem(k: &QuadField, rng: &mut ChaCha8Rng) -> FieldElem {
        k.elem_i(rng.gen_range(-3..=3), rng.gen_range(-3..=3))
    }

    fn rand_vec(k: &QuadField, n: usize, rng: &mut ChaCha8Rng) -> Vec<FieldElem> {
        (0..n).map(|_| rand_elem(k, rng)).collect()
    }

    fn rings() -> Vec<CohRing> {
        vec![
            CohRing::new(make_field(1).unwrap(), vec![1, 1]).unwrap(),
            CohRing::new(make_field(3).unwrap(), vec![1, 2, 1]).unwrap(),
            CohRing::new(make_field(2).unwrap(), vec![2, 1, 3]).unwrap(),
            CohRing::new(make_field(7).unwrap(), vec![1, 1, 1, 1]).unwrap(),
        ]
    }

    #[test]
    fn integrals_of_d_and_y() {
        for r in rings() {
            let n = r.n;
            let fact: i64 = (1..=n as i64).product();
            let pa: i64 = r.a.iter().product();
            assert_eq!(r.integrate(&r.d_power(n)).unwrap(), r.kq(qi(fact * pa)));
            let ys = (0..n).fold(r.one(), |acc, l| acc.wedge(&r.y(l)).unwrap());
            assert_eq!(r.integrate(&ys).unwrap(), r.kq(qi(pa * pa)));
            // D = κ Σ a_ℓ dz_ℓ dz̄_ℓ
            let mut d = r.zero();
            for l in 0..n {
                d.add_term((1 << l, 1 << l), r.kappa().scale(&qi(r.a[l])));
            }
            assert_eq!(d, r.class_d());
            assert!(r.integrate(&r.class_d()).unwrap().is_zero() || n == 1);
        }
        let r = CohRing::new(make_field(1).unwrap(), vec![1, 1]).unwrap();
        assert_eq!(r.integrate(&r.d_power(2)).unwrap(), r.kq(qi(2)));
    }

    #[test]
    fn ring_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in rings() {
            for _ in 0..4 {
                let l = rand_vec(&r.k, r.n, &mut rng);
                let m = rand_vec(&r.k, r.n, &mut rng);
                let f = r.f_quad(&l).unwrap();
                assert!(f.wedge(&f).unwrap().is_zero());
                assert_eq!(r.f_sesq(&l, &l).unwrap(), f);
                // graded commutativity on odd classes
                let x = CohClass::monomial(r.n, (1, 0), KElem::one(r.d()));
                let y = CohClass::monomial(r.n, (0, 2), KElem::one(r.d()));
                assert_eq!(x.wedge(&y).unwrap(), y.wedge(&x).unwrap().neg());
                // norms and sesquilinearity
                let u = rand_elem(&r.k, &mut rng);
                let ul: Vec<FieldElem> = l.iter().map(|x| &u * x).collect();
                assert_eq!(r.f_quad(&ul).unwrap(), f.scale(&r.kq(u.norm())));
                assert_eq!(r.f_sesq(&ul, &m).unwrap(), r.f_sesq(&l, &m).unwrap().scale(&u.to_ext()));
                assert_eq!(r.f_sesq(&m, &ul).unwrap(), r.f_sesq(&m, &l).unwrap().scale(&u.conj().to_ext()));
                assert_eq!(r.f_quad_expansion(&l).unwrap(), f);
                assert!(f.is_rational());
            }
        }
    }

    #[test]
    fn y_plus_example_and_rationality() {
        let r = CohRing::new(make_field(1).unwrap(), vec![1, 1]).unwrap();
        let k = r.k;
        let f = r.f_quad(&[k.one(), k.one()]).unwrap();
        // Re(λ1 conj λ2) = 1 enters with a minus sign
        assert_eq!(f, r.y(0).add(&r.y(1)).sub(&r.y_plus(0, 1)));
        for r in rings() {
            for g in r.degree_two_generators() {
                assert!(g.is_rational());
            }
            assert!(r.class_d().is_rational());
            let e1 = r.unit(0);
            let e2 = r.unit(1);
            let lhs = r.f_sesq(&e1, &e2).unwrap().wedge(&r.f_sesq(&e2, &e1).unwrap()).unwrap();
            assert_eq!(lhs, r.y(0).wedge(&r.y(1)).unwrap().neg());
        }
    }

    #[test]
    fn gl2_and_cycle_product_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for r in rings() {
            for _ in 0..3 {
                let l1 = rand_vec(&r.k, r.n, &mut rng);
                let l2 = rand_vec(&r.k, r.n, &mut rng);
                let (u, v, s, t) = (rand_elem(&r.k, &mut rng), rand_elem(&r.k, &mut rng), rand_elem(&r.k, &mut rng), rand_elem(&r.k, &mut rng));
                let comb = |x: &FieldElem, y: &FieldElem| -> Vec<FieldElem> { l1.iter().zip(&l2).map(|(a, b)| &(x * a) + &(y * b)).collect() };
                let lhs = r.f_quad(&comb(&u, &v)).unwrap().wedge(&r.f_quad(&comb(&s, &t)).unwrap()).unwrap();
                let det = &(&u * &t) - &(&v * &s);
                let base = r.f_quad(&l1).unwrap().wedge(&r.f_quad(&l2).unwrap()).unwrap();
                assert_eq!(lhs, base.scale(&r.kq(det.norm())));
                if r.n >= 3 {
                    let l3 = rand_vec(&r.k, r.n, &mut rng);
                    let ls = [&l1, &l2, &l3];
                    let cyc = (0..3).fold(r.one(), |acc, i| acc.wedge(&r.f_sesq(ls[i], ls[(i + 1) % 3]).unwrap()).unwrap());
                    let prod = (0..3).fold(r.one(), |acc, i| acc.wedge(&r.f_quad(ls[i]).unwrap()).unwrap());
                    assert_eq!(cyc, prod);
                }
            }
        }
    }

    #[test]
    fn lefschetz_triple() {
        for r in rings() {
            for m in r.lefschetz_sl2() {
                assert!(m.relations_report().is_empty());
            }
            for g in 0..=r.n / 2 {
                assert_eq!(r.hard_lefschetz_rank(g), r.dim(g, g));
            }
            // F(D) = n · 1 and weights
            assert_eq!(r.dual_lefschetz(&r.class_d()), r.one().scale(&r.kq(qi(r.n as i64))));
            let (m, j) = r.piece(1, 1);
            assert_eq!(m.weights[j], 2 - r.n as i64);
        }
    }

    #[test]
    fn hodge_bases() {
        let r = CohRing::new(make_field(1).unwrap(), vec![1, 1]).unwrap();
        assert_eq!(r.rational_hodge_basis(0).unwrap(), vec![r.one()]);
        assert_eq!(r.rational_hodge_basis(1).unwrap().len(), 4);
        assert_eq!(r.primitive_hodge_basis(1).unwrap().len(), 3);
        assert!(r.primitive_hodge_basis(2).unwrap().is_empty());
        for r in rings() {
            for l in 0..=r.n {
                let b = r.rational_hodge_basis(l).unwrap();
                assert_eq!(b.len(), r.dim(l, l));
                assert!(b.iter().all(|x| x.is_rational()));
            }
            for l in 0..=r.n / 2 {
                let w = r.primitive_hodge_basis(l).unwrap();
                let expect = r.dim(l, l) - if l > 0 { r.dim(l - 1, l - 1) } else { 0 };
                assert_eq!(w.len(), expect);
                for x in &w {
                    assert!(x.is_rational());
                    assert!(r.dual_lefschetz(x).is_zero());
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let r = rings().remove(1);
        let x = r.y_minus(0, 2).add(&r.d_power(2));
        let v = r.class_to_json(&x);
        assert_eq!(r.class_from_json(&v).unwrap(), x);
    }
}
