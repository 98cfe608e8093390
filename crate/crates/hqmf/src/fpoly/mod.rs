//! The spaces F_{n,g} of polynomials P(U) on n×g matrices with
//! P(UA) = |det A|² P(U), in the basis det(U_I)·conj(det(U_J)) of pairs of
//! g-subsets of rows, together with the sl2-triple (Λ, Δ, H) built from a
//! Hermitian form H on C^n.
//!
//! Subsets are bitmasks over {0..n-1}; JSON uses 1-based row lists.

pub mod mpoly;
pub mod sl2;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Scalar};
use crate::qfield::{make_field, FieldElem, KElem, QuadField, Q};

pub use mpoly::{MPoly, Side};
pub use sl2::Sl2Module;

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// g-subsets of {0..n-1} as bitmasks, lexicographic in their sorted lists.
pub fn subsets(n: usize, g: usize) -> Vec<u32> {
    fn rec(start: usize, n: usize, left: usize, cur: u32, out: &mut Vec<u32>) {
        if left == 0 {
            out.push(cur);
            return;
        }
        for a in start..n {
            if n - a < left {
                break;
            }
            rec(a + 1, n, left - 1, cur | 1 << a, out);
        }
    }
    let mut out = vec![];
    rec(0, n, g, 0, &mut out);
    out
}

pub fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|a| mask >> a & 1 == 1).collect()
}

/// #{x ∈ mask : x < a}
pub fn count_below(mask: u32, a: usize) -> usize {
    (mask & ((1u32 << a) - 1)).count_ones() as usize
}

fn sign(e: usize) -> Q {
    if e % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Description of one F_{n,g}.
#[derive(Clone, Debug, PartialEq)]
pub struct FSpace {
    pub n: usize,
    pub g: usize,
    pub basis: Vec<(Vec<usize>, Vec<usize>)>,
}

impl FSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FPoly {
    pub n: usize,
    pub g: usize,
    pub coeffs: Vec<KElem>,
}

impl FPoly {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &FPoly) -> FPoly {
        assert_eq!((self.n, self.g), (o.n, o.g));
        FPoly { n: self.n, g: self.g, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &FPoly) -> FPoly {
        assert_eq!((self.n, self.g), (o.n, o.g));
        FPoly { n: self.n, g: self.g, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &KElem) -> FPoly {
        FPoly { n: self.n, g: self.g, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn scale_q(&self, c: &Q) -> FPoly {
        FPoly { n: self.n, g: self.g, coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect() }
    }
}

/// F_{n,•} for a fixed Hermitian positive definite H, with its operator
/// matrices. Λ raises g, Δ lowers it; as an sl2-module E = Λ, F = Δ.
#[derive(Clone, Debug)]
pub struct FFamily {
    pub k: QuadField,
    pub n: usize,
    pub gram: Mat<FieldElem>,
    pub gram_inv: Mat<FieldElem>,
    pub subsets: Vec<Vec<u32>>,
    index: Vec<HashMap<u32, usize>>,
    pub module: Sl2Module<KElem>,
}

impl FFamily {
    pub fn new(k: QuadField, gram: Mat<FieldElem>) -> Result<Self> {
        let n = gram.len();
        if n == 0 || n > 12 || gram.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("gram must be square of size 1..=12".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if gram[i][j] != gram[j][i].conj() {
                    return Err(Error::Validation("gram is not Hermitian".into()));
                }
            }
        }
        let z = k.zero();
        for s in 1..=n {
            let sub: Mat<FieldElem> = gram[..s].iter().map(|r| r[..s].to_vec()).collect();
            let dt = linalg::det(&sub, &z);
            if !dt.is_rational() || dt.a <= Q::zero() {
                return Err(Error::Validation("gram is not positive definite".into()));
            }
        }
        let gram_inv = linalg::inverse(&gram, &z).expect("positive definite");
        let subsets: Vec<Vec<u32>> = (0..=n).map(|g| subsets(n, g)).collect();
        let index = subsets.iter().map(|s| s.iter().enumerate().map(|(i, &m)| (m, i)).collect()).collect();
        let mut fam = FFamily {
            k,
            n,
            gram,
            gram_inv,
            subsets,
            index,
            module: Sl2Module { weights: vec![], dims: vec![], e: vec![], f: vec![], zero: KElem::zero(k.d) },
        };
        let dims: Vec<usize> = (0..=n).map(|g| fam.dim(g)).collect();
        let e = (0..n).map(|g| fam.build_raise(g)).collect();
        let f = (1..=n).map(|g| fam.build_lower(g)).collect();
        fam.module = Sl2Module::new(-(n as i64), dims, e, f, KElem::zero(k.d))?;
        Ok(fam)
    }

    pub fn identity(k: QuadField, n: usize) -> Result<Self> {
        Self::diagonal(k, &vec![1; n])
    }

    pub fn diagonal(k: QuadField, a: &[i64]) -> Result<Self> {
        let n = a.len();
        let gram = (0..n)
            .map(|i| (0..n).map(|j| if i == j { k.from_int(a[i]) } else { k.zero() }).collect())
            .collect();
        Self::new(k, gram)
    }

    pub fn dim(&self, g: usize) -> usize {
        let c = binom(self.n, g);
        c * c
    }

    pub fn pair(&self, g: usize, idx: usize) -> (u32, u32) {
        let c = self.subsets[g].len();
        (self.subsets[g][idx / c], self.subsets[g][idx % c])
    }

    pub fn pair_index(&self, g: usize, i: u32, j: u32) -> usize {
        let c = self.subsets[g].len();
        self.index[g][&i] * c + self.index[g][&j]
    }

    pub fn space(&self, g: usize) -> FSpace {
        let basis = (0..self.dim(g))
            .map(|t| {
                let (i, j) = self.pair(g, t);
                (members(i), members(j))
            })
            .collect();
        FSpace { n: self.n, g, basis }
    }

    fn ext(&self, x: &FieldElem) -> KElem {
        x.to_ext()
    }

    /// Λ(I,J) = Σ_{a∉I, b∉J} H_ab (-1)^{#I<a + #J<b} (I∪a, J∪b)
    fn build_raise(&self, g: usize) -> Mat<KElem> {
        let z = KElem::zero(self.k.d);
        let mut m = linalg::zeros(self.dim(g + 1), self.dim(g), &z);
        for col in 0..self.dim(g) {
            let (i, j) = self.pair(g, col);
            for a in (0..self.n).filter(|a| i >> a & 1 == 0) {
                for b in (0..self.n).filter(|b| j >> b & 1 == 0) {
                    if self.gram[a][b].is_zero() {
                        continue;
                    }
                    let row = self.pair_index(g + 1, i | 1 << a, j | 1 << b);
                    let s = sign(count_below(i, a) + count_below(j, b));
                    m[row][col] = &m[row][col] + self.ext(&self.gram[a][b]).scale(&s);
                }
            }
        }
        m
    }

    /// Δ(I,J) = Σ_{a∈I, b∈J} (H^{-1})_{ba} (-1)^{pos(a,I) + pos(b,J)} (I∖a, J∖b)
    fn build_lower(&self, g: usize) -> Mat<KElem> {
        let z = KElem::zero(self.k.d);
        let mut m = linalg::zeros(self.dim(g - 1), self.dim(g), &z);
        for col in 0..self.dim(g) {
            let (i, j) = self.pair(g, col);
            for a in members(i) {
                for b in members(j) {
                    if self.gram_inv[b][a].is_zero() {
                        continue;
                    }
                    let row = self.pair_index(g - 1, i & !(1 << a), j & !(1 << b));
                    let s = sign(count_below(i, a) + count_below(j, b));
                    m[row][col] = &m[row][col] + self.ext(&self.gram_inv[b][a]).scale(&s);
                }
            }
        }
        m
    }

    pub fn zero_poly(&self, g: usize) -> FPoly {
        FPoly { n: self.n, g, coeffs: vec![KElem::zero(self.k.d); self.dim(g)] }
    }

    pub fn constant(&self, c: KElem) -> FPoly {
        FPoly { n: self.n, g: 0, coeffs: vec![c] }
    }

    /// The basis element det(U_I)·conj(det(U_J)) (0-based rows).
    pub fn basis_poly(&self, i: &[usize], j: &[usize]) -> FPoly {
        let g = i.len();
        let mut p = self.zero_poly(g);
        let mi = i.iter().fold(0u32, |m, &a| m | 1 << a);
        let mj = j.iter().fold(0u32, |m, &a| m | 1 << a);
        p.coeffs[self.pair_index(g, mi, mj)] = KElem::one(self.k.d);
        p
    }

    pub fn weight(&self, g: usize) -> i64 {
        2 * g as i64 - self.n as i64
    }

    pub fn lower(&self, p: &FPoly) -> FPoly {
        if p.g == 0 {
            return p.scale(&KElem::zero(self.k.d));
        }
        FPoly { n: self.n, g: p.g - 1, coeffs: self.module.lower(p.g, &p.coeffs) }
    }

    pub fn raise(&self, p: &FPoly) -> FPoly {
        assert!(p.g < self.n, "raise out of range");
        FPoly { n: self.n, g: p.g + 1, coeffs: self.module.raise(p.g, &p.coeffs) }
    }

    pub fn raise_pow(&self, p: &FPoly, r: usize) -> FPoly {
        (0..r).fold(p.clone(), |acc, _| self.raise(&acc))
    }

    pub fn lower_pow(&self, p: &FPoly, r: usize) -> FPoly {
        (0..r).fold(p.clone(), |acc, _| self.lower(&acc))
    }

    /// h(λ, λ) = Λ(1)
    pub fn h_poly(&self) -> FPoly {
        self.raise(&self.constant(KElem::one(self.k.d)))
    }

    /// Every per-column Laplacian Δ_i kills P (checked symbolically).
    pub fn is_pluriharmonic(&self, p: &FPoly) -> bool {
        let hinv: Vec<Vec<KElem>> = self.gram_inv.iter().map(|r| r.iter().map(|x| x.to_ext()).collect()).collect();
        let m = self.to_mpoly(p);
        (0..p.g).all(|i| m.laplacian(i, &hinv).is_zero())
    }

    pub fn is_primitive(&self, p: &FPoly) -> bool {
        self.lower(p).is_zero()
    }

    pub fn primitive_basis(&self, g: usize) -> Vec<FPoly> {
        self.module
            .primitive_basis(g)
            .into_iter()
            .map(|c| FPoly { n: self.n, g, coeffs: c })
            .collect()
    }

    pub fn sl2_report(&self) -> Vec<String> {
        self.module.relations_report()
    }

    /// Matrix of Π_{m,k} on F_{n,g} (weight ±m = 2g - n).
    pub fn isotypic_projector(&self, g: usize, k: i64) -> Result<Mat<KElem>> {
        self.module.projector_matrix(g, k)
    }

    /// P = Σ_ℓ Λ^{g-ℓ} Q_ℓ with Q_ℓ primitive in F_{n,ℓ}; returns (ℓ, Q_ℓ).
    pub fn lefschetz_decompose(&self, p: &FPoly) -> Vec<(usize, FPoly)> {
        self.module
            .lefschetz_decompose(p.g, &p.coeffs)
            .into_iter()
            .map(|(l, c)| (l, FPoly { n: self.n, g: l, coeffs: c }))
            .collect()
    }

    /// Minors det(U_I) for all subsets of size ≤ g built column by column.
    fn minors<T: Scalar>(&self, cols: &[Vec<T>], zero: &T) -> HashMap<u32, T> {
        let mut dets: HashMap<u32, T> = HashMap::new();
        dets.insert(0, zero.one_like());
        for s in 1..=cols.len() {
            for &mask in &self.subsets[s] {
                // expand along column s-1
                let mut acc = zero.zero_like();
                for (t, a) in members(mask).into_iter().enumerate() {
                    let x = &cols[s - 1][a];
                    if x.is_zero_s() {
                        continue;
                    }
                    let sub = &dets[&(mask & !(1 << a))];
                    let term = x.times(sub);
                    acc = if (t + s - 1) % 2 == 0 { acc.plus(&term) } else { acc.minus(&term) };
                }
                dets.insert(mask, acc);
            }
        }
        dets
    }

    pub fn evaluate_k(&self, p: &FPoly, tuple: &[Vec<KElem>]) -> Result<KElem> {
        self.check_tuple(p, tuple.len(), tuple.iter().map(|v| v.len()))?;
        let z = KElem::zero(self.k.d);
        let dets = self.minors(tuple, &z);
        let mut acc = z.clone();
        for (t, c) in p.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (i, j) = self.pair(p.g, t);
            acc = acc + c * &dets[&i] * dets[&j].conj();
        }
        Ok(acc)
    }

    /// Values of every basis element of F_{n,g} at one tuple, in basis order.
    pub fn basis_values(&self, g: usize, tuple: &[Vec<FieldElem>]) -> Result<Vec<KElem>> {
        self.check_tuple(&self.zero_poly(g), tuple.len(), tuple.iter().map(|v| v.len()))?;
        let t: Vec<Vec<KElem>> = tuple.iter().map(|v| v.iter().map(|x| x.to_ext()).collect()).collect();
        let dets = self.minors(&t, &KElem::zero(self.k.d));
        Ok((0..self.dim(g))
            .map(|c| {
                let (i, j) = self.pair(g, c);
                &dets[&i] * &dets[&j].conj()
            })
            .collect())
    }

    pub fn evaluate(&self, p: &FPoly, tuple: &[Vec<FieldElem>]) -> Result<KElem> {
        let t: Vec<Vec<KElem>> = tuple.iter().map(|v| v.iter().map(|x| x.to_ext()).collect()).collect();
        self.evaluate_k(p, &t)
    }

    pub fn evaluate_c(&self, p: &FPoly, tuple: &[Vec<Complex64>]) -> Result<Complex64> {
        self.check_tuple(p, tuple.len(), tuple.iter().map(|v| v.len()))?;
        let z = Complex64::new(0.0, 0.0);
        let dets = self.minors(tuple, &z);
        let mut acc = z;
        for (t, c) in p.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (i, j) = self.pair(p.g, t);
            acc += c.to_c64() * dets[&i] * dets[&j].conj();
        }
        Ok(acc)
    }

    fn check_tuple(&self, p: &FPoly, g: usize, lens: impl Iterator<Item = usize>) -> Result<()> {
        if g != p.g {
            return Err(Error::Validation(format!("expected {} vectors, got {g}", p.g)));
        }
        for l in lens {
            if l != self.n {
                return Err(Error::Validation(format!("vectors must have length {}", self.n)));
            }
        }
        Ok(())
    }

    /// Terms of exp(tΔ)P for the full Laplacian Δ = Σ_i Δ_i: the r-th term
    /// is t^r Σ_{|S| = g-r} (Δ^r P)(λ_S), with Δ^r the iterated lowering.
    pub fn exp_laplacian(&self, p: &FPoly, t: &Q) -> Vec<ExpTerm> {
        let mut out = vec![];
        let mut cur = p.clone();
        let mut tr = Q::one();
        for r in 0..=p.g {
            if !cur.is_zero() {
                out.push(ExpTerm { r, coeff: tr.clone(), poly: cur.clone() });
            }
            if r < p.g {
                cur = self.lower(&cur);
                tr = &tr * t;
            }
        }
        out
    }

    /// Σ_r coeff_r Σ_{|S| = g-r} poly_r(λ_S) with a numeric scalar t^r.
    pub fn evaluate_exp_c(&self, terms: &[ExpTerm], t: f64, tuple: &[Vec<Complex64>]) -> Result<Complex64> {
        let g = tuple.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for term in terms {
            let sz = g - term.r;
            let mut s = Complex64::new(0.0, 0.0);
            for mask in subsets(g, sz) {
                let sub: Vec<Vec<Complex64>> = members(mask).into_iter().map(|i| tuple[i].clone()).collect();
                s += self.evaluate_c(&term.poly, &sub)?;
            }
            acc += s * t.powi(term.r as i32);
        }
        Ok(acc)
    }

    pub fn to_mpoly(&self, p: &FPoly) -> MPoly {
        let (n, g, d) = (self.n, p.g, self.k.d);
        let mut cache: HashMap<(u32, bool), MPoly> = HashMap::new();
        let mut out = MPoly::zero(n, g, d);
        for (t, c) in p.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (i, j) = self.pair(g, t);
            let mi = cache.entry((i, false)).or_insert_with(|| MPoly::minor(n, g, d, Side::X, &members(i))).clone();
            let mj = cache.entry((j, true)).or_insert_with(|| MPoly::minor(n, g, d, Side::Y, &members(j))).clone();
            out = out.add(&mi.mul(&mj).scale(c));
        }
        out
    }

    /// Reads coefficients off the monomials Π_t x_{I_t,t} y_{J_t,t}, then
    /// checks the re-expansion; None if the polynomial is not in F_{n,g}.
    pub fn from_mpoly(&self, m: &MPoly) -> Option<FPoly> {
        let g = m.g;
        let mut p = self.zero_poly(g);
        for t in 0..self.dim(g) {
            let (i, j) = self.pair(g, t);
            let mut e = vec![0u8; 2 * self.n * g];
            for (col, a) in members(i).into_iter().enumerate() {
                e[col * self.n + a] = 1;
            }
            for (col, b) in members(j).into_iter().enumerate() {
                e[self.n * g + col * self.n + b] = 1;
            }
            if let Some(c) = m.terms.get(&e) {
                p.coeffs[t] = c.clone();
            }
        }
        (self.to_mpoly(&p) == *m).then_some(p)
    }

    pub fn poly_to_json(&self, p: &FPoly) -> Value {
        let coeffs: Vec<Value> = p
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(t, c)| {
                let (i, j) = self.pair(p.g, t);
                let one_based = |m: u32| members(m).into_iter().map(|a| a + 1).collect::<Vec<_>>();
                json!({"I": one_based(i), "J": one_based(j), "c": c.to_json()})
            })
            .collect();
        json!({
            "n": self.n,
            "g": p.g,
            "d": self.k.d,
            "gram": self.gram.iter().map(|r| r.iter().map(|x| x.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "coeffs": coeffs,
        })
    }

    pub fn poly_from_json(&self, v: &Value) -> Result<FPoly> {
        let g = v.get("g").and_then(|x| x.as_u64()).ok_or_else(|| Error::Parse("FPoly needs \"g\"".into()))? as usize;
        if g > self.n {
            return Err(Error::Validation("g out of range".into()));
        }
        let mut p = self.zero_poly(g);
        let terms = v.get("coeffs").and_then(|x| x.as_array()).ok_or_else(|| Error::Parse("FPoly needs \"coeffs\"".into()))?;
        for t in terms {
            let rows = |key: &str| -> Result<u32> {
                let arr = t.get(key).and_then(|x| x.as_array()).ok_or_else(|| Error::Parse(format!("term needs {key:?}")))?;
                let mut m = 0u32;
                for a in arr {
                    let a = a.as_u64().filter(|&a| a >= 1 && a as usize <= self.n).ok_or_else(|| Error::Parse("row index out of range".into()))?;
                    m |= 1 << (a - 1);
                }
                if m.count_ones() as usize != g || arr.len() != g {
                    return Err(Error::Parse("row subsets must have g distinct entries".into()));
                }
                Ok(m)
            };
            let (i, j) = (rows("I")?, rows("J")?);
            let c = KElem::from_json(t.get("c").ok_or_else(|| Error::Parse("term needs \"c\"".into()))?, self.k.d)?;
            let idx = self.pair_index(g, i, j);
            p.coeffs[idx] = &p.coeffs[idx] + &c;
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub r: usize,
    pub coeff: Q,
    pub poly: FPoly,
}

/// F_{n,g} for (n, g, gram); `gram` None means the identity.
pub fn basis(n: usize, g: usize, k: QuadField, gram: Option<Mat<FieldElem>>) -> Result<FSpace> {
    if g > n {
        return Err(Error::Validation(format!("g = {g} exceeds n = {n}")));
    }
    let fam = match gram {
        Some(gm) => FFamily::new(k, gm)?,
        None => FFamily::identity(k, n)?,
    };
    Ok(fam.space(g))
}

/// Default field for callers that only need rational grams.
pub fn gaussian() -> QuadField {
    make_field(1).expect("d = 1 is squarefree")
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, x| a * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{q, qi};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ke(d: u64, x: i64) -> KElem {
        KElem::from_q(d, qi(x))
    }

    fn rand_tuple(k: QuadField, n: usize, g: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<FieldElem>> {
        (0..g).map(|_| (0..n).map(|_| k.elem_i(rng.gen_range(-3..=3), rng.gen_range(-3..=3))).collect()).collect()
    }

    #[test]
    fn dimensions() {
        let k = gaussian();
        assert_eq!(basis(2, 1, k, None).unwrap().dim(), 4);
        assert_eq!(basis(3, 2, k, None).unwrap().dim(), 9);
        assert_eq!(basis(2, 0, k, None).unwrap().dim(), 1);
        assert!(basis(2, 3, k, None).is_err());
        let f = FFamily::identity(k, 4).unwrap();
        assert_eq!(f.weight(1), -2);
        assert_eq!(FFamily::identity(k, 2).unwrap().weight(2), 2);
    }

    #[test]
    fn lowering_examples() {
        let k = gaussian();
        let f = FFamily::identity(k, 2).unwrap();
        assert!(f.lower(&f.basis_poly(&[0], &[1])).is_zero());
        assert_eq!(f.lower(&f.basis_poly(&[0], &[0])), f.constant(ke(1, 1)));
        let f2 = FFamily::diagonal(k, &[3, 2]).unwrap();
        assert_eq!(f2.lower(&f2.basis_poly(&[0], &[0])), f2.constant(KElem::from_q(1, q(1, 3))));
    }

    #[test]
    fn h_poly_and_laplacian() {
        let k = gaussian();
        let f = FFamily::diagonal(k, &[1, 2, 5]).unwrap();
        let h = f.h_poly();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lam = rand_tuple(k, 3, 1, &mut rng);
        let lat = crate::hlattice::HermLattice::diagonal(k, &[1, 2, 5]).unwrap();
        assert_eq!(f.evaluate(&h, &lam).unwrap(), lat.h(&lam[0], &lam[0]).to_ext());
        assert_eq!(f.lower(&h), f.constant(ke(1, 3)));
        let terms = f.exp_laplacian(&h, &q(-1, 7));
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[1].poly, f.constant(ke(1, 3)));
        assert_eq!(terms[1].coeff, q(-1, 7));
    }

    #[test]
    fn evaluation_example() {
        let k = gaussian();
        let f = FFamily::identity(k, 2).unwrap();
        let p = f.basis_poly(&[0], &[0]);
        let v = f.evaluate(&p, &[vec![k.elem_i(1, 1), k.zero()]]).unwrap();
        assert_eq!(v, ke(1, 2));
        assert_eq!(f.evaluate(&f.constant(ke(1, 1)), &[]).unwrap(), ke(1, 1));
    }

    #[test]
    fn sl2_relations_small() {
        let k = gaussian();
        assert!(FFamily::identity(k, 1).unwrap().sl2_report().is_empty());
        assert!(FFamily::identity(k, 3).unwrap().sl2_report().is_empty());
        assert!(FFamily::diagonal(k, &[1, 2]).unwrap().sl2_report().is_empty());
        let k3 = make_field(3).unwrap();
        let gram = vec![vec![k3.from_int(2), k3.omega()], vec![k3.omega().conj(), k3.from_int(2)]];
        assert!(FFamily::new(k3, gram).unwrap().sl2_report().is_empty());
    }

    fn drop_last_column(m: &MPoly) -> MPoly {
        let g = m.g;
        let n = m.n;
        let mut out = MPoly::zero(n, g - 1, m.d);
        for (e, c) in &m.terms {
            assert!(e[(g - 1) * n..g * n].iter().all(|&x| x == 0));
            assert!(e[n * g + (g - 1) * n..].iter().all(|&x| x == 0));
            let mut e2 = e[..(g - 1) * n].to_vec();
            e2.extend_from_slice(&e[n * g..n * g + (g - 1) * n]);
            out.terms.insert(e2, c.clone());
        }
        out
    }

    // Λ(P) = Σ_{s,ℓ} h(λ_s, λ_ℓ) (-1)^{s+ℓ} P(λ without s, conj λ without ℓ)
    fn raise_oracle(f: &FFamily, m: &MPoly) -> MPoly {
        let (n, g, d) = (m.n, m.g, m.d);
        let mut out = MPoly::zero(n, g + 1, d);
        for s in 0..=g {
            for l in 0..=g {
                let xmap: Vec<usize> = (0..=g).filter(|&c| c != s).collect();
                let ymap: Vec<usize> = (0..=g).filter(|&c| c != l).collect();
                let moved = m.relabel(g + 1, &xmap, &ymap);
                let mut h = MPoly::zero(n, g + 1, d);
                for a in 0..n {
                    for b in 0..n {
                        let xa = MPoly::var(n, g + 1, d, Side::X, a, s);
                        let yb = MPoly::var(n, g + 1, d, Side::Y, b, l);
                        h = h.add(&xa.mul(&yb).scale(&f.gram[a][b].to_ext()));
                    }
                }
                let mut t = moved.mul(&h);
                if (s + l) % 2 == 1 {
                    t = t.scale(&ke(d, -1));
                }
                out = out.add(&t);
            }
        }
        out
    }

    fn unit(f: &FFamily, g: usize, t: usize) -> FPoly {
        let mut p = f.zero_poly(g);
        p.coeffs[t] = KElem::one(f.k.d);
        p
    }

    #[test]
    fn operators_match_symbolic_oracle() {
        let k = make_field(3).unwrap();
        let gram = vec![
            vec![k.from_int(2), k.omega(), k.zero()],
            vec![k.omega().conj(), k.from_int(3), k.zero()],
            vec![k.zero(), k.zero(), k.from_int(1)],
        ];
        let f = FFamily::new(k, gram).unwrap();
        let hinv: Vec<Vec<KElem>> = f.gram_inv.iter().map(|r| r.iter().map(|x| x.to_ext()).collect()).collect();
        for g in 0..=3 {
            for t in 0..f.dim(g) {
                let p = unit(&f, g, t);
                let m = f.to_mpoly(&p);
                assert_eq!(f.from_mpoly(&m).unwrap(), p);
                if g > 0 {
                    let lowered = drop_last_column(&m.laplacian(g - 1, &hinv));
                    assert_eq!(f.to_mpoly(&f.lower(&p)), lowered, "Δ at g={g}, t={t}");
                }
                if g < 3 {
                    assert_eq!(f.to_mpoly(&f.raise(&p)), raise_oracle(&f, &m), "Λ at g={g}, t={t}");
                }
            }
        }
    }

    #[test]
    fn minor_polys_satisfy_euler_conditions() {
        // Σ_a x_{a,j} ∂/∂x_{a,i} P = δ_ij P for P in F_{n,g}
        let k = gaussian();
        let f = FFamily::identity(k, 3).unwrap();
        for t in 0..f.dim(2) {
            let m = f.to_mpoly(&unit(&f, 2, t));
            for side in [Side::X, Side::Y] {
                for i in 0..2 {
                    for j in 0..2 {
                        let e = m.euler(side, j, i);
                        if i == j {
                            assert_eq!(e, m);
                        } else {
                            assert!(e.is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn numeric_and_exact_evaluation_agree() {
        let k = make_field(2).unwrap();
        let f = FFamily::diagonal(k, &[1, 1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = f.raise(&f.raise(&f.basis_poly(&[], &[])));
        let lam = rand_tuple(k, 3, 2, &mut rng);
        let exact = f.evaluate(&p, &lam).unwrap().to_c64();
        let c: Vec<Vec<Complex64>> = lam.iter().map(|v| v.iter().map(|x| x.to_ext().to_c64()).collect()).collect();
        let num = f.evaluate_c(&p, &c).unwrap();
        assert!((exact - num).norm() < 1e-9);
        let xs: Vec<Vec<KElem>> = lam.iter().map(|v| v.iter().map(|x| x.to_ext()).collect()).collect();
        assert_eq!(f.to_mpoly(&p).eval(&xs), f.evaluate(&p, &lam).unwrap());
    }

    #[test]
    fn lefschetz_reassembles() {
        let k = gaussian();
        let f = FFamily::diagonal(k, &[1, 2, 3, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coeffs = (0..f.dim(2)).map(|_| ke(1, rng.gen_range(-4..=4))).collect();
        let p = FPoly { n: 4, g: 2, coeffs };
        let parts = f.lefschetz_decompose(&p);
        let mut sum = f.zero_poly(2);
        for (l, qp) in &parts {
            assert!(f.is_primitive(qp));
            sum = sum.add(&f.raise_pow(qp, 2 - l));
        }
        assert_eq!(sum, p);
        assert_eq!(f.primitive_basis(2).len(), f.dim(2) - f.dim(1));
    }

    #[test]
    fn json_round_trip() {
        let k = make_field(7).unwrap();
        let f = FFamily::identity(k, 3).unwrap();
        let p = f.raise(&f.basis_poly(&[0], &[2]));
        let v = f.poly_to_json(&p);
        assert_eq!(f.poly_from_json(&v).unwrap(), p);
        assert!(f.poly_from_json(&json!({"g": 1, "coeffs": [{"I": [4], "J": [1], "c": 1}]})).is_err());
    }

    fn column_laplacian(m: &MPoly, i: usize, hinv: &[Vec<KElem>]) -> MPoly {
        // move column i to the end, apply the Laplacian there, drop it
        let g = m.g;
        let perm: Vec<usize> = (0..g).map(|c| if c == i { g - 1 } else if c > i { c - 1 } else { c }).collect();
        drop_last_column(&m.relabel(g, &perm, &perm).laplacian(g - 1, hinv))
    }

    #[test]
    fn column_choice_and_pluriharmonicity() {
        let k = gaussian();
        let f = FFamily::diagonal(k, &[1, 2, 1, 3]).unwrap();
        let hinv: Vec<Vec<KElem>> = f.gram_inv.iter().map(|r| r.iter().map(|x| x.to_ext()).collect()).collect();
        for t in 0..f.dim(2) {
            let m = f.to_mpoly(&unit(&f, 2, t));
            // Δ_s P = Δ_ℓ P after identifying the remaining columns in order
            assert_eq!(column_laplacian(&m, 0, &hinv), column_laplacian(&m, 1, &hinv));
        }
        for p in f.primitive_basis(2) {
            let m = f.to_mpoly(&p);
            for i in 0..2 {
                assert!(column_laplacian(&m, i, &hinv).is_zero());
            }
        }
        // the non-primitive h(λ, λ) is not harmonic
        let h = f.to_mpoly(&f.h_poly());
        assert!(!h.laplacian(0, &hinv).is_zero());
    }

    #[test]
    fn kashiwara_vergne_generator_is_primitive() {
        let k = gaussian();
        let f = FFamily::identity(k, 2).unwrap();
        let i = KElem::i(1);
        let mut p = f.zero_poly(1);
        p.coeffs[f.pair_index(1, 1, 1)] = KElem::one(1);
        p.coeffs[f.pair_index(1, 1, 2)] = i.clone();
        p.coeffs[f.pair_index(1, 2, 1)] = i.clone();
        p.coeffs[f.pair_index(1, 2, 2)] = &i * &i;
        assert!(f.is_primitive(&p));
        assert_eq!(f.lefschetz_decompose(&p), vec![(1, p.clone())]);
    }

    #[test]
    fn basis_is_independent_by_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = make_field(3).unwrap();
        for n in 1..=5 {
            let f = FFamily::identity(k, n).unwrap();
            for g in 0..=n {
                let dim = f.dim(g);
                let rows = dim + 4;
                let pts: Vec<Vec<Vec<Complex64>>> = (0..rows)
                    .map(|_| (0..g).map(|_| (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect())
                    .collect();
                let m = nalgebra::DMatrix::<Complex64>::from_fn(rows, dim, |r, t| f.evaluate_c(&unit(&f, g, t), &pts[r]).unwrap());
                let sv = m.singular_values();
                let rank = sv.iter().filter(|&&x| x > 1e-8 * sv[0]).count();
                assert_eq!(rank, dim, "n={n} g={g}");
            }
        }
    }

    #[test]
    fn decomposition_of_h_poly() {
        let k = gaussian();
        let f = FFamily::identity(k, 3).unwrap();
        let h = f.h_poly();
        let parts = f.lefschetz_decompose(&h);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0], (0, f.constant(ke(1, 1))));
        let f2 = FFamily::identity(k, 2).unwrap();
        for t in 0..f2.dim(2) {
            assert!(f2.lefschetz_decompose(&unit(&f2, 2, t)).iter().all(|(l, _)| *l < 2));
        }
    }

    #[test]
    fn projector_coefficients_on_f() {
        let k = gaussian();
        let f = FFamily::identity(k, 2).unwrap();
        let p = f.isotypic_projector(1, 0).unwrap();
        let z = KElem::zero(1);
        assert_eq!(linalg::matmul(&p, &p, &z), p);
    }
}
