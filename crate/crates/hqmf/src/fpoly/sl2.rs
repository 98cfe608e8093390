//! Finite-dimensional sl2-modules given by their weight pieces and the
//! raising/lowering maps between neighbouring pieces, with the isotypic
//! projectors Π_{m,k} and Lefschetz decomposition.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Scalar};
use crate::qfield::Q;

/// Pieces are ordered by weight, weights[j] = weights[0] + 2j. `e[j]` maps
/// piece j to piece j+1 and `f[j]` maps piece j+1 to piece j (matrices act
/// on column vectors).
#[derive(Clone, Debug)]
pub struct Sl2Module<T> {
    pub weights: Vec<i64>,
    pub dims: Vec<usize>,
    pub e: Vec<Mat<T>>,
    pub f: Vec<Mat<T>>,
    pub zero: T,
}

fn fact(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, x| a * x)
}

/// (M^{-1})_{ij} = (-1)^{i+j} (m+i)! (m+2i+1) / (i! (j-i)! (m+i+j+1)!), j ≥ i.
pub fn projector_coeff(m: i64, i: i64, j: i64) -> Q {
    if j < i {
        return Q::zero();
    }
    let num = fact(m + i) * BigInt::from(m + 2 * i + 1);
    let den = fact(i) * fact(j - i) * fact(m + i + j + 1);
    let v = Q::new(num, den);
    if (i + j) % 2 == 0 {
        v
    } else {
        -v
    }
}

impl<T: Scalar> Sl2Module<T> {
    pub fn new(lowest_weight: i64, dims: Vec<usize>, e: Vec<Mat<T>>, f: Vec<Mat<T>>, zero: T) -> Result<Self> {
        let p = dims.len();
        if e.len() + 1 != p.max(1) || f.len() + 1 != p.max(1) {
            return Err(Error::Validation("need one raising and one lowering map between neighbouring pieces".into()));
        }
        for j in 0..p.saturating_sub(1) {
            let ok_e = e[j].len() == dims[j + 1] && e[j].iter().all(|r| r.len() == dims[j]);
            let ok_f = f[j].len() == dims[j] && f[j].iter().all(|r| r.len() == dims[j + 1]);
            if !ok_e || !ok_f {
                return Err(Error::Validation(format!("map shapes do not match piece dimensions at {j}")));
            }
        }
        let weights = (0..p as i64).map(|j| lowest_weight + 2 * j).collect();
        Ok(Sl2Module { weights, dims, e, f, zero })
    }

    pub fn piece_of_weight(&self, w: i64) -> Option<usize> {
        self.weights.iter().position(|&x| x == w)
    }

    pub fn raise(&self, j: usize, v: &[T]) -> Vec<T> {
        if j + 1 >= self.dims.len() {
            return vec![];
        }
        linalg::matvec(&self.e[j], v, &self.zero)
    }

    pub fn lower(&self, j: usize, v: &[T]) -> Vec<T> {
        if j == 0 {
            return vec![];
        }
        linalg::matvec(&self.f[j - 1], v, &self.zero)
    }

    fn raise_pow(&self, j: usize, v: &[T], r: usize) -> Option<Vec<T>> {
        let mut cur = v.to_vec();
        for t in 0..r {
            if j + t + 1 >= self.dims.len() {
                return None;
            }
            cur = self.raise(j + t, &cur);
        }
        Some(cur)
    }

    fn lower_pow(&self, j: usize, v: &[T], r: usize) -> Option<Vec<T>> {
        let mut cur = v.to_vec();
        for t in 0..r {
            if j < t + 1 {
                return None;
            }
            cur = self.lower(j - t, &cur);
        }
        Some(cur)
    }

    /// Matrix of the operator H on piece j.
    pub fn h_matrix(&self, j: usize) -> Mat<T> {
        let w = self.zero.from_q(&Q::from_integer(BigInt::from(self.weights[j])));
        linalg::mat_scale(&linalg::identity(self.dims[j], &self.zero), &w)
    }

    /// Checks [E,F]=H, [H,E]=2E, [H,F]=-2F piece by piece; returns the
    /// failures (empty when the triple is an sl2-triple).
    pub fn relations_report(&self) -> Vec<String> {
        let mut bad = vec![];
        let p = self.dims.len();
        let z = &self.zero;
        for j in 0..p {
            let n = self.dims[j];
            let mut ef = linalg::zeros(n, n, z);
            if j > 0 {
                ef = linalg::matmul(&self.e[j - 1], &self.f[j - 1], z);
            }
            let mut fe = linalg::zeros(n, n, z);
            if j + 1 < p {
                fe = linalg::matmul(&self.f[j], &self.e[j], z);
            }
            let comm = linalg::mat_sub(&ef, &fe);
            if comm != self.h_matrix(j) {
                bad.push(format!("[E,F] != H on weight {}", self.weights[j]));
            }
            if j + 1 < p {
                let two = z.from_q(&Q::from_integer(BigInt::from(2)));
                let he = linalg::mat_sub(
                    &linalg::matmul(&self.h_matrix(j + 1), &self.e[j], z),
                    &linalg::matmul(&self.e[j], &self.h_matrix(j), z),
                );
                if he != linalg::mat_scale(&self.e[j], &two) {
                    bad.push(format!("[H,E] != 2E from weight {}", self.weights[j]));
                }
                let hf = linalg::mat_sub(
                    &linalg::matmul(&self.h_matrix(j), &self.f[j], z),
                    &linalg::matmul(&self.f[j], &self.h_matrix(j + 1), z),
                );
                if hf != linalg::mat_scale(&self.f[j], &two.negate()) {
                    bad.push(format!("[H,F] != -2F from weight {}", self.weights[j + 1]));
                }
            }
        }
        bad
    }

    /// Π_{m,k} applied to v in piece j (weight ±m). On weight -m this is
    /// Σ_s (M^{-1})_{is} E^s F^s with k = m + 2i; on weight +m the same
    /// coefficients multiply F^s E^s.
    pub fn project(&self, j: usize, k: i64, v: &[T]) -> Result<Vec<T>> {
        let w = self.weights[j];
        let m = w.abs();
        if k < m || (k - m) % 2 != 0 {
            return Err(Error::Validation(format!("no π_{k} component on weight {w}")));
        }
        let i = (k - m) / 2;
        let mut acc = vec![self.zero.zero_like(); self.dims[j]];
        let mut s = i;
        loop {
            let term = if w <= 0 {
                self.lower_pow(j, v, s as usize).and_then(|u| self.raise_pow(j - s as usize, &u, s as usize))
            } else {
                self.raise_pow(j, v, s as usize).and_then(|u| self.lower_pow(j + s as usize, &u, s as usize))
            };
            let Some(term) = term else { break };
            let c = self.zero.from_q(&projector_coeff(m, i, s));
            for (a, t) in acc.iter_mut().zip(&term) {
                if !t.is_zero_s() {
                    *a = a.plus(&t.times(&c));
                }
            }
            s += 1;
        }
        Ok(acc)
    }

    /// Matrix of Π_{m,k} on piece j.
    pub fn projector_matrix(&self, j: usize, k: i64) -> Result<Mat<T>> {
        let n = self.dims[j];
        let id = linalg::identity(n, &self.zero);
        let cols = id.iter().map(|v| self.project(j, k, v)).collect::<Result<Vec<_>>>()?;
        Ok(linalg::transpose(&cols))
    }

    /// The k with possibly nonzero π_k component on piece j.
    pub fn isotypes(&self, j: usize) -> Vec<i64> {
        let w = self.weights[j];
        let top = self.weights.iter().map(|x| x.abs()).max().unwrap_or(0);
        (w.abs()..=top).step_by(2).collect()
    }

    pub fn isotypic_components(&self, j: usize, v: &[T]) -> Vec<(i64, Vec<T>)> {
        self.isotypes(j)
            .into_iter()
            .map(|k| (k, self.project(j, k, v).expect("valid isotype")))
            .collect()
    }

    /// v = Σ E^r u with u primitive (F u = 0); returns (piece of u, u).
    pub fn lefschetz_decompose(&self, j: usize, v: &[T]) -> Vec<(usize, Vec<T>)> {
        let w = self.weights[j];
        let mut out = vec![];
        for (k, vk) in self.isotypic_components(j, v) {
            if vk.iter().all(|x| x.is_zero_s()) {
                continue;
            }
            // vk = E^r u with u of weight -k; F^r E^r u = Π_{t≤r} t(k-t+1) u
            let r = ((k + w) / 2) as usize;
            let u = self.lower_pow(j, &vk, r).expect("piece exists");
            let c: Q = (1..=r as i64).map(|t| Q::from_integer(BigInt::from(t * (k - t + 1)))).product();
            let ci = self.zero.from_q(&(Q::one() / c));
            out.push((j - r, u.iter().map(|x| x.times(&ci)).collect()));
        }
        out
    }

    /// Basis of ker F on piece j.
    pub fn primitive_basis(&self, j: usize) -> Vec<Vec<T>> {
        if j == 0 {
            return linalg::identity(self.dims[0], &self.zero);
        }
        linalg::nullspace(&self.f[j - 1], self.dims[j], &self.zero)
    }

    pub fn raise_to(&self, from: usize, v: &[T], to: usize) -> Vec<T> {
        self.raise_pow(from, v, to - from).expect("target piece exists")
    }

    /// Completes raising maps to an sl2-triple. On a primitive u of weight
    /// -m the lowering map is forced: F(E^r u) = r(m-r+1) E^{r-1} u. Fails if
    /// the E-strings from primitives do not span a piece (E is then not a
    /// Lefschetz operator).
    pub fn complete(lowest_weight: i64, dims: Vec<usize>, e: Vec<Mat<T>>, zero: T) -> Result<Self> {
        let p = dims.len();
        let weight = |j: usize| lowest_weight + 2 * j as i64;
        let mut prim: Vec<Vec<Vec<T>>> = vec![vec![]; p];
        for j in 0..p {
            let w = weight(j);
            if w > 0 {
                continue;
            }
            let steps = (-w + 1) as usize;
            if j + steps >= p {
                prim[j] = linalg::identity(dims[j], &zero);
                continue;
            }
            let mut m = linalg::identity(dims[j], &zero);
            for t in 0..steps {
                m = linalg::matmul(&e[j + t], &m, &zero);
            }
            prim[j] = linalg::nullspace(&m, dims[j], &zero);
        }
        let mut f = vec![];
        for j in 1..p {
            // basis of piece j from E-strings, and the images under F
            let mut cols = vec![];
            let mut images = vec![];
            for (i, us) in prim.iter().enumerate().take(j + 1) {
                let r = j - i;
                let m = -weight(i);
                if us.is_empty() || (r as i64) > m {
                    continue;
                }
                for u in us {
                    let mut v = u.clone();
                    let mut below = None;
                    for t in 0..r {
                        if t + 1 == r {
                            below = Some(v.clone());
                        }
                        v = linalg::matvec(&e[i + t], &v, &zero);
                    }
                    let img = match below {
                        Some(b) => {
                            let c = zero.from_q(&Q::from_integer(BigInt::from(r as i64 * (m - r as i64 + 1))));
                            b.iter().map(|x| x.times(&c)).collect()
                        }
                        None => vec![zero.zero_like(); dims[j - 1]],
                    };
                    cols.push(v);
                    images.push(img);
                }
            }
            if dims[j] == 0 {
                f.push(vec![vec![]; dims[j - 1]]);
                continue;
            }
            if cols.len() != dims[j] {
                return Err(Error::Validation(format!("E-strings span {} of {} dimensions at weight {}", cols.len(), dims[j], weight(j))));
            }
            let b = linalg::transpose(&cols);
            let binv = linalg::inverse(&b, &zero)
                .ok_or_else(|| Error::Validation(format!("E-strings dependent at weight {}", weight(j))))?;
            let fb = if dims[j - 1] == 0 { vec![] } else { linalg::transpose(&images) };
            let fj = if dims[j - 1] == 0 {
                vec![]
            } else {
                linalg::matmul(&fb, &binv, &zero)
            };
            f.push(fj);
        }
        Self::new(lowest_weight, dims, e, f, zero)
    }

    pub fn map<U: Scalar>(&self, conv: impl Fn(&T) -> U, zero: U) -> Sl2Module<U> {
        let cm = |m: &Mat<T>| m.iter().map(|r| r.iter().map(&conv).collect()).collect();
        Sl2Module {
            weights: self.weights.clone(),
            dims: self.dims.clone(),
            e: self.e.iter().map(cm).collect(),
            f: self.f.iter().map(cm).collect(),
            zero,
        }
    }
}
