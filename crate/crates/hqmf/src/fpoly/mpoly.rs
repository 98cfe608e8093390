//! Plain multivariate polynomials in the entries x_{a,i} = λ_i^{(a)} and
//! y_{a,i} = conj(λ_i^{(a)}) of an n×g matrix, treated as independent
//! variables. Used as a symbolic reference for the minor-basis operators.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::linalg::Scalar;
use crate::qfield::{KElem, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MPoly {
    pub n: usize,
    pub g: usize,
    pub d: u64,
    pub terms: BTreeMap<Vec<u8>, KElem>,
}

impl MPoly {
    pub fn zero(n: usize, g: usize, d: u64) -> Self {
        MPoly { n, g, d, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, g: usize, c: KElem) -> Self {
        let mut p = Self::zero(n, g, c.d);
        if !c.is_zero() {
            p.terms.insert(vec![0; 2 * n * g], c);
        }
        p
    }

    pub fn var_index(&self, side: Side, a: usize, i: usize) -> usize {
        let s = if side == Side::X { 0 } else { 1 };
        s * self.n * self.g + i * self.n + a
    }

    pub fn var(n: usize, g: usize, d: u64, side: Side, a: usize, i: usize) -> Self {
        let mut p = Self::zero(n, g, d);
        let mut e = vec![0u8; 2 * n * g];
        e[p.var_index(side, a, i)] = 1;
        p.terms.insert(e, KElem::one(d));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u8>, c: KElem) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.scale(&KElem::from_q(self.d, Q::from_integer((-1).into()))))
    }

    pub fn scale(&self, c: &KElem) -> MPoly {
        let mut r = Self::zero(self.n, self.g, self.d);
        for (e, x) in &self.terms {
            r.add_term(e.clone(), x * c);
        }
        r
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        let mut r = Self::zero(self.n, self.g, self.d);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u8> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn deriv(&self, v: usize) -> MPoly {
        let mut r = Self::zero(self.n, self.g, self.d);
        for (e, c) in &self.terms {
            if e[v] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[v] -= 1;
            r.add_term(e2, c.scale(&Q::from_integer(e[v].into())));
        }
        r
    }

    /// Σ_{a,b} c_{ab} ∂²/∂x_{a,i}∂y_{b,i} with c_{ab} = (H^{-1})_{ba}.
    pub fn laplacian(&self, i: usize, hinv: &[Vec<KElem>]) -> MPoly {
        let mut r = Self::zero(self.n, self.g, self.d);
        for a in 0..self.n {
            let dx = self.deriv(self.var_index(Side::X, a, i));
            if dx.is_zero() {
                continue;
            }
            for b in 0..self.n {
                if hinv[b][a].is_zero() {
                    continue;
                }
                r = r.add(&dx.deriv(self.var_index(Side::Y, b, i)).scale(&hinv[b][a]));
            }
        }
        r
    }

    /// Σ_a x_{a,j} ∂/∂x_{a,i} (or the y analogue).
    pub fn euler(&self, side: Side, j: usize, i: usize) -> MPoly {
        let mut r = Self::zero(self.n, self.g, self.d);
        for a in 0..self.n {
            let dv = self.deriv(self.var_index(side, a, i));
            let xv = Self::var(self.n, self.g, self.d, side, a, j);
            r = r.add(&dv.mul(&xv));
        }
        r
    }

    /// Re-embed into g2 columns, sending column c on each side through the
    /// given maps.
    pub fn relabel(&self, g2: usize, xmap: &[usize], ymap: &[usize]) -> MPoly {
        let mut r = Self::zero(self.n, g2, self.d);
        let n = self.n;
        for (e, c) in &self.terms {
            let mut e2 = vec![0u8; 2 * n * g2];
            for i in 0..self.g {
                for a in 0..n {
                    e2[xmap[i] * n + a] += e[i * n + a];
                    e2[n * g2 + ymap[i] * n + a] += e[n * self.g + i * n + a];
                }
            }
            r.add_term(e2, c.clone());
        }
        r
    }

    /// det of the g×g minor with rows `rows` of the x (or y) matrix, columns
    /// 0..rows.len().
    pub fn minor(n: usize, g: usize, d: u64, side: Side, rows: &[usize]) -> MPoly {
        let s = rows.len();
        let mut r = Self::constant(n, g, KElem::zero(d));
        if s == 0 {
            return Self::constant(n, g, KElem::one(d));
        }
        for perm in (0..s).permutations(s) {
            let inv = (0..s).flat_map(|i| (i + 1..s).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
            let mut t = Self::constant(n, g, KElem::one(d));
            for (col, &p) in perm.iter().enumerate() {
                t = t.mul(&Self::var(n, g, d, side, rows[p], col));
            }
            if inv % 2 == 1 {
                t = t.scale(&KElem::one(d).negate());
            }
            r = r.add(&t);
        }
        r
    }

    pub fn eval(&self, x: &[Vec<KElem>]) -> KElem {
        // x[i][a] = λ_i^{(a)}; y values are conjugates
        let mut acc = KElem::zero(self.d);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..self.g {
                for a in 0..self.n {
                    let ex = e[i * self.n + a];
                    let ey = e[self.n * self.g + i * self.n + a];
                    if ex > 0 {
                        t = &t * &x[i][a].pow(ex as u32);
                    }
                    if ey > 0 {
                        t = &t * &x[i][a].conj().pow(ey as u32);
                    }
                }
            }
            acc = &acc + &t;
        }
        acc
    }
}
