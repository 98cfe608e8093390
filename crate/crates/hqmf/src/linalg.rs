//! Dense exact linear algebra over Q, k and k(i), and Smith normal form
//! over Z. Pivoting is always "first nonzero in scan order" so results are
//! reproducible.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use num_complex::Complex64;

use crate::qfield::{q_to_f64, FieldElem, KElem, Q};

pub trait Scalar: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_s(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn recip(&self) -> Self;
    fn from_q(&self, r: &Q) -> Self;
}

impl Scalar for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn one_like(&self) -> Self {
        Q::one()
    }
    fn is_zero_s(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Self {
        Q::one() / self
    }
    fn from_q(&self, r: &Q) -> Self {
        r.clone()
    }
}

impl Scalar for FieldElem {
    fn zero_like(&self) -> Self {
        self.k.zero()
    }
    fn one_like(&self) -> Self {
        self.k.one()
    }
    fn is_zero_s(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Self {
        self.inv().expect("inverse of zero")
    }
    fn from_q(&self, r: &Q) -> Self {
        self.k.from_q(r.clone())
    }
}

impl Scalar for KElem {
    fn zero_like(&self) -> Self {
        KElem::zero(self.d)
    }
    fn one_like(&self) -> Self {
        KElem::one(self.d)
    }
    fn is_zero_s(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Self {
        self.inv().expect("inverse of zero")
    }
    fn from_q(&self, r: &Q) -> Self {
        KElem::from_q(self.d, r.clone())
    }
}

impl Scalar for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero_s(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Self {
        self.inv()
    }
    fn from_q(&self, r: &Q) -> Self {
        Complex64::new(q_to_f64(r), 0.0)
    }
}

pub type Mat<T> = Vec<Vec<T>>;

pub fn identity<T: Scalar>(n: usize, z: &T) -> Mat<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { z.one_like() } else { z.zero_like() }).collect())
        .collect()
}

pub fn zeros<T: Scalar>(r: usize, c: usize, z: &T) -> Mat<T> {
    vec![vec![z.zero_like(); c]; r]
}

pub fn transpose<T: Clone>(m: &Mat<T>) -> Mat<T> {
    if m.is_empty() {
        return vec![];
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn matmul<T: Scalar>(a: &Mat<T>, b: &Mat<T>, z: &T) -> Mat<T> {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = z.zero_like();
                    for t in 0..inner {
                        if !row[t].is_zero_s() && !b[t][j].is_zero_s() {
                            acc = acc.plus(&row[t].times(&b[t][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn matvec<T: Scalar>(a: &Mat<T>, v: &[T], z: &T) -> Vec<T> {
    a.iter()
        .map(|row| {
            let mut acc = z.zero_like();
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero_s() && !y.is_zero_s() {
                    acc = acc.plus(&x.times(y));
                }
            }
            acc
        })
        .collect()
}

pub fn mat_add<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.plus(y)).collect()).collect()
}

pub fn mat_sub<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.minus(y)).collect()).collect()
}

pub fn mat_scale<T: Scalar>(a: &Mat<T>, c: &T) -> Mat<T> {
    a.iter().map(|r| r.iter().map(|x| x.times(c)).collect()).collect()
}

pub fn is_zero_mat<T: Scalar>(a: &Mat<T>) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero_s()))
}

/// In-place reduced row echelon form; returns pivot columns.
pub fn rref<T: Scalar>(m: &mut Mat<T>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero_s()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            if !x.is_zero_s() {
                *x = x.times(&inv);
            }
        }
        let pivot_row = m[r].clone();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero_s() {
                let f = m[i][c].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    if !y.is_zero_s() {
                        *x = x.minus(&f.times(y));
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Scalar>(m: &Mat<T>) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of {x : m x = 0}.
pub fn nullspace<T: Scalar>(m: &Mat<T>, cols: usize, z: &T) -> Vec<Vec<T>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![z.zero_like(); cols];
            v[f] = z.one_like();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = a[i][f].negate();
            }
            v
        })
        .collect()
}

/// Some solution of a x = b, or None if inconsistent. Free variables are 0.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &[T], cols: usize, z: &T) -> Option<Vec<T>> {
    let mut aug: Mat<T> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![z.zero_like(); cols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = aug[i][cols].clone();
    }
    Some(x)
}

pub fn inverse<T: Scalar>(a: &Mat<T>, z: &T) -> Option<Mat<T>> {
    let n = a.len();
    let mut aug: Mat<T> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            for j in 0..n {
                r.push(if i == j { z.one_like() } else { z.zero_like() });
            }
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn det<T: Scalar>(a: &Mat<T>, z: &T) -> T {
    let n = a.len();
    let mut m = a.clone();
    let mut acc = z.one_like();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero_s()) else {
            return z.zero_like();
        };
        if p != c {
            m.swap(p, c);
            acc = acc.negate();
        }
        acc = acc.times(&m[c][c]);
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if !m[i][c].is_zero_s() {
                let f = m[i][c].times(&inv);
                let pr = m[c].clone();
                for (x, y) in m[i].iter_mut().zip(&pr).skip(c) {
                    *x = x.minus(&f.times(y));
                }
            }
        }
    }
    acc
}

/// Greedy selection of linearly independent vectors, in input order.
pub fn independent_subset<T: Scalar>(vs: &[Vec<T>]) -> Vec<usize> {
    let mut chosen = vec![];
    let mut basis: Mat<T> = vec![];
    let mut r = 0;
    for (i, v) in vs.iter().enumerate() {
        basis.push(v.clone());
        let nr = rank(&basis);
        if nr > r {
            r = nr;
            chosen.push(i);
        } else {
            basis.pop();
        }
    }
    chosen
}

// ---- integer matrices ----

pub type ZMat = Vec<Vec<BigInt>>;

fn zidentity(n: usize) -> ZMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Smith normal form: returns (U, S, V) with U·A·V = S, U and V unimodular,
/// S diagonal with nonnegative entries s_1 | s_2 | ...
pub fn smith(a: &ZMat) -> (ZMat, ZMat, ZMat) {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut s = a.clone();
    let mut u = zidentity(m);
    let mut v = zidentity(n);
    let mut t = 0;
    while t < m.min(n) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !s[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| s[i][j].abs() < s[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        s.swap(t, pi);
        u.swap(t, pi);
        for row in s.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let mut done = true;
        for i in t + 1..m {
            if !s[i][t].is_zero() {
                let f = s[i][t].div_floor(&s[t][t]);
                for j in 0..n {
                    let x = &s[t][j] * &f;
                    s[i][j] -= x;
                }
                for j in 0..m {
                    let x = &u[t][j] * &f;
                    u[i][j] -= x;
                }
                if !s[i][t].is_zero() {
                    done = false;
                }
            }
        }
        for j in t + 1..n {
            if !s[t][j].is_zero() {
                let f = s[t][j].div_floor(&s[t][t]);
                for i in 0..m {
                    let x = &s[i][t] * &f;
                    s[i][j] -= x;
                }
                for i in 0..n {
                    let x = &v[i][t] * &f;
                    v[i][j] -= x;
                }
                if !s[t][j].is_zero() {
                    done = false;
                }
            }
        }
        if !done {
            continue;
        }
        // divisibility: s_t must divide every remaining entry
        let mut fixed = true;
        'outer: for i in t + 1..m {
            for j in t + 1..n {
                if !(&s[i][j] % &s[t][t]).is_zero() {
                    for c in 0..n {
                        let x = s[i][c].clone();
                        s[t][c] += x;
                    }
                    for c in 0..m {
                        let x = u[i][c].clone();
                        u[t][c] += x;
                    }
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if !fixed {
            continue;
        }
        if s[t][t].is_negative() {
            for c in 0..n {
                s[t][c] = -&s[t][c];
            }
            for c in 0..m {
                u[t][c] = -&u[t][c];
            }
        }
        t += 1;
    }
    (u, s, v)
}

pub fn zmatvec(a: &ZMat, x: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// An integer solution of A x = b (A given by rows), if one exists.
pub fn solve_integer(a: &ZMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let (u, s, v) = smith(a);
    let ub = zmatvec(&u, b);
    let mut y = vec![BigInt::zero(); n];
    for i in 0..m {
        let si = if i < n { s[i][i].clone() } else { BigInt::zero() };
        if si.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            let (qt, r) = ub[i].div_rem(&si);
            if !r.is_zero() {
                return None;
            }
            y[i] = qt;
        }
    }
    Some(zmatvec(&v, &y))
}

/// Integer determinant via exact rational elimination.
pub fn zdet(a: &ZMat) -> BigInt {
    let m: Mat<Q> = a.iter().map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect()).collect();
    let d = det(&m, &Q::zero());
    d.to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{make_field, q, qi};

    fn z(rows: &[&[i64]]) -> ZMat {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn zmul(a: &ZMat, b: &ZMat) -> ZMat {
        a.iter()
            .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, row)| x * &row[j]).sum()).collect())
            .collect()
    }

    #[test]
    fn smith_examples() {
        for a in [
            z(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]),
            z(&[&[2, 0], &[0, 2]]),
            z(&[&[0, 0], &[0, 3]]),
            z(&[&[4, 6], &[6, 9], &[2, 3]]),
        ] {
            let (u, s, v) = smith(&a);
            assert_eq!(zmul(&zmul(&u, &a), &v), s);
            assert_eq!(zdet(&u).abs(), BigInt::one());
            assert_eq!(zdet(&v).abs(), BigInt::one());
            let diag: Vec<BigInt> = (0..s.len().min(s[0].len())).map(|i| s[i][i].clone()).collect();
            for w in diag.windows(2) {
                if !w[1].is_zero() {
                    assert!((&w[1] % &w[0]).is_zero());
                }
            }
        }
        let (_, s, _) = smith(&z(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]));
        assert_eq!((s[0][0].clone(), s[1][1].clone(), s[2][2].clone()), (2.into(), 6.into(), 12.into()));
    }

    #[test]
    fn integer_solve() {
        let a = z(&[&[2, 4], &[0, 6]]);
        assert_eq!(solve_integer(&a, &[BigInt::from(6), BigInt::from(6)]), Some(vec![1.into(), 1.into()]));
        assert_eq!(solve_integer(&a, &[BigInt::from(1), BigInt::from(0)]), None);
    }

    #[test]
    fn rational_linear_algebra() {
        let a: Mat<Q> = vec![vec![qi(1), qi(2)], vec![qi(3), qi(4)]];
        let inv = inverse(&a, &Q::zero()).unwrap();
        assert_eq!(matmul(&a, &inv, &Q::zero()), identity(2, &Q::zero()));
        assert_eq!(det(&a, &Q::zero()), qi(-2));
        let sing: Mat<Q> = vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]];
        assert!(inverse(&sing, &Q::zero()).is_none());
        let ns = nullspace(&sing, 2, &Q::zero());
        assert_eq!(ns, vec![vec![qi(-2), qi(1)]]);
        let x = solve(&a, &[qi(5), qi(6)], 2, &Q::zero()).unwrap();
        assert_eq!(matvec(&a, &x, &Q::zero()), vec![qi(5), qi(6)]);
        assert_eq!(independent_subset(&[vec![qi(1), qi(2)], vec![q(1, 2), qi(1)], vec![qi(0), qi(1)]]), vec![0, 2]);
    }

    #[test]
    fn field_linear_algebra() {
        let k = make_field(3).unwrap();
        let a = vec![vec![k.omega(), k.one()], vec![k.from_int(2), k.omega().conj()]];
        let inv = inverse(&a, &k.zero()).unwrap();
        assert_eq!(matmul(&a, &inv, &k.zero()), identity(2, &k.zero()));
    }
}
