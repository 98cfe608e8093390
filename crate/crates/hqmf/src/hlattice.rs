//! Free Hermitian O_k-lattices L = O_k^n with Gram matrix G, so that
//! h(x, y) = x^T G conj(y). Everything metric goes through the rank-2n trace
//! lattice with Z-basis (e_1, ω e_1, e_2, ω e_2, ...) and bilinear form
//! Tr_{k/Q} h; then h(x, x) = ½ x^T G_tr x and L^∨ = G_tr^{-1} Z^{2n}.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, ZMat};
use crate::par;
use crate::qfield::{frac_q, make_field, q_json, q_to_f64, qi, FieldElem, QuadField, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    /// signature (n-1, 1) over C; the boundary module calls this (n+1, 1)
    /// with n the rank of the quotient
    Lorentzian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermLattice {
    pub k: QuadField,
    pub gram: Mat<FieldElem>,
    pub definiteness: Definiteness,
}

pub type Vector = Vec<FieldElem>;

impl HermLattice {
    pub fn new(k: QuadField, gram: Mat<FieldElem>, definiteness: Definiteness) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("gram must be square".into()));
        }
        for i in 0..n {
            if !gram[i][i].is_rational() {
                return Err(Error::Validation(format!("gram[{i}][{i}] is not rational")));
            }
            for j in 0..n {
                if gram[i][j] != gram[j][i].conj() {
                    return Err(Error::Validation("gram is not Hermitian".into()));
                }
            }
        }
        let l = HermLattice { k, gram, definiteness };
        let gt = l.trace_gram();
        if gt.iter().flatten().any(|x| !x.is_integer()) {
            return Err(Error::Validation("trace form is not integral (L is not inside L^∨)".into()));
        }
        let (pos, neg, zero) = inertia(&gt);
        match definiteness {
            Definiteness::Positive if neg > 0 || zero > 0 => {
                Err(Error::Validation("gram is not positive definite".into()))
            }
            Definiteness::Lorentzian if neg != 2 || zero > 0 || pos == 0 => {
                Err(Error::Validation("gram does not have signature (n-1, 1)".into()))
            }
            _ => Ok(l),
        }
    }

    pub fn positive(k: QuadField, gram: Mat<FieldElem>) -> Result<Self> {
        Self::new(k, gram, Definiteness::Positive)
    }

    pub fn diagonal(k: QuadField, a: &[i64]) -> Result<Self> {
        let n = a.len();
        let gram = (0..n)
            .map(|i| (0..n).map(|j| if i == j { k.from_int(a[i]) } else { k.zero() }).collect())
            .collect();
        Self::positive(k, gram)
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn h(&self, x: &[FieldElem], y: &[FieldElem]) -> FieldElem {
        let mut acc = self.k.zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if !yj.is_zero() && !self.gram[i][j].is_zero() {
                    acc = acc + xi * &self.gram[i][j] * yj.conj();
                }
            }
        }
        acc
    }

    pub fn norm(&self, x: &[FieldElem]) -> Q {
        self.h(x, x).a
    }

    pub fn gram_of(&self, xs: &[Vector]) -> Mat<FieldElem> {
        xs.iter().map(|x| xs.iter().map(|y| self.h(x, y)).collect()).collect()
    }

    fn basis_elem(&self, p: usize) -> FieldElem {
        if p % 2 == 0 {
            self.k.one()
        } else {
            self.k.omega()
        }
    }

    /// Gram matrix of Tr_{k/Q} h on the Z-basis (e_1, ω e_1, ...).
    pub fn trace_gram(&self) -> Mat<Q> {
        let m = 2 * self.rank();
        (0..m)
            .map(|p| {
                (0..m)
                    .map(|r| {
                        let v = self.basis_elem(p) * &self.gram[p / 2][r / 2] * self.basis_elem(r).conj();
                        v.trace()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn trace_gram_z(&self) -> ZMat {
        self.trace_gram().iter().map(|r| r.iter().map(|x| x.to_integer()).collect()).collect()
    }

    pub fn to_trace_coords(x: &[FieldElem]) -> Vec<Q> {
        x.iter().flat_map(|c| [c.a.clone(), c.b.clone()]).collect()
    }

    pub fn from_trace_coords(&self, c: &[Q]) -> Vector {
        c.chunks(2).map(|p| self.k.elem(p[0].clone(), p[1].clone())).collect()
    }

    pub fn contains(&self, x: &[FieldElem]) -> bool {
        x.iter().all(|c| c.is_integral())
    }

    pub fn in_dual(&self, x: &[FieldElem]) -> bool {
        let gt = self.trace_gram();
        let c = Self::to_trace_coords(x);
        linalg::matvec(&gt, &c, &Q::zero()).iter().all(|v| v.is_integer())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.k.d,
            "gram": self.gram.iter().map(|r| r.iter().map(|x| x.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "signature": match self.definiteness {
                Definiteness::Positive => "positive",
                Definiteness::Lorentzian => "lorentzian",
            },
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let d = v
            .get("d")
            .and_then(|x| x.as_i64())
            .ok_or_else(|| Error::Parse("lattice needs integer field \"d\"".into()))?;
        let k = make_field(d)?;
        let rows = v
            .get("gram")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse("lattice needs \"gram\" array".into()))?;
        let gram = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("gram rows must be arrays".into()))?
                    .iter()
                    .map(|x| FieldElem::from_json(x, k))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Mat<_>>>()?;
        let def = match v.get("signature").and_then(|x| x.as_str()) {
            None | Some("positive") => Definiteness::Positive,
            Some("lorentzian") => Definiteness::Lorentzian,
            Some(other) => return Err(Error::Parse(format!("unknown signature {other:?}"))),
        };
        Self::new(k, gram, def)
    }
}

/// Inertia (positive, negative, zero) of a rational symmetric matrix via
/// floating eigenvalues; entries here are small integers so this is safe.
fn inertia(a: &Mat<Q>) -> (usize, usize, usize) {
    let n = a.len();
    if n == 0 {
        return (0, 0, 0);
    }
    let m = DMatrix::from_fn(n, n, |i, j| q_to_f64(&a[i][j]));
    let ev = m.symmetric_eigenvalues();
    let scale = ev.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let eps = 1e-9 * scale;
    let pos = ev.iter().filter(|&&x| x > eps).count();
    let neg = ev.iter().filter(|&&x| x < -eps).count();
    (pos, neg, n - pos - neg)
}

/// A basis of L^∨ written in L-coordinates (rows).
#[derive(Clone, Debug, PartialEq)]
pub struct DualLattice {
    pub basis_matrix: Mat<FieldElem>,
}

/// L^∨ = {x : h(x, L) ⊂ δ_k^{-1} O_k}; the rows δ_k^{-1}·(G^{-1})_j form an
/// O_k-basis.
pub fn dual_basis(l: &HermLattice) -> Result<DualLattice> {
    let z = l.k.zero();
    let inv = linalg::inverse(&l.gram, &z).ok_or_else(|| Error::Degenerate("singular gram".into()))?;
    let di = l.k.delta().inv().expect("δ_k is nonzero");
    Ok(DualLattice { basis_matrix: linalg::mat_scale(&inv, &di) })
}

#[derive(Clone, Debug)]
pub struct DiscGroup {
    pub lattice: HermLattice,
    pub invariant_factors: Vec<u64>,
    /// canonical lifts: trace coordinates in [0, 1), sorted, identity first
    pub reps: Vec<Vec<Q>>,
    pub vectors: Vec<Vector>,
    /// h(ν, ν) mod 1
    pub qform: Vec<Q>,
    index: HashMap<Vec<Q>, usize>,
}

pub fn disc_group(l: &HermLattice) -> Result<DiscGroup> {
    let g = l.trace_gram_z();
    if linalg::zdet(&g).is_zero() {
        return Err(Error::Degenerate("trace form is degenerate".into()));
    }
    let (_, s, v) = linalg::smith(&g);
    let m = g.len();
    let factors: Vec<u64> = (0..m).map(|i| s[i][i].to_u64().expect("small invariant factor")).collect();
    // L^∨/L = V·S^{-1}Z^m / Z^m, coordinates c_i mod s_i
    let mut reps: Vec<Vec<Q>> = vec![vec![Q::zero(); m]];
    for i in 0..m {
        if factors[i] == 1 {
            continue;
        }
        let col: Vec<Q> = (0..m).map(|r| Q::new(v[r][i].clone(), BigInt::from(factors[i]))).collect();
        let mut next = Vec::with_capacity(reps.len() * factors[i] as usize);
        for r in &reps {
            for c in 0..factors[i] {
                let w: Vec<Q> = r.iter().zip(&col).map(|(x, y)| frac_q(&(x + y * qi(c as i64)))).collect();
                next.push(w);
            }
        }
        reps = next;
    }
    reps.sort();
    reps.dedup();
    let vectors: Vec<Vector> = reps.iter().map(|r| l.from_trace_coords(r)).collect();
    let qform = vectors.iter().map(|x| frac_q(&l.norm(x))).collect();
    let index = reps.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
    let invariant_factors = factors.into_iter().filter(|&f| f > 1).collect();
    Ok(DiscGroup { lattice: l.clone(), invariant_factors, reps, vectors, qform, index })
}

impl DiscGroup {
    pub fn order(&self) -> usize {
        self.reps.len()
    }

    /// Canonical coset index of x ∈ L^∨.
    pub fn coset_of(&self, x: &[FieldElem]) -> Result<usize> {
        let c: Vec<Q> = HermLattice::to_trace_coords(x).iter().map(frac_q).collect();
        self.index
            .get(&c)
            .copied()
            .ok_or_else(|| Error::Validation("vector is not in the dual lattice".into()))
    }

    pub fn add(&self, i: usize, j: usize) -> usize {
        let c: Vec<Q> = self.reps[i].iter().zip(&self.reps[j]).map(|(x, y)| frac_q(&(x + y))).collect();
        self.index[&c]
    }

    pub fn neg(&self, i: usize) -> usize {
        let c: Vec<Q> = self.reps[i].iter().map(|x| frac_q(&-x)).collect();
        self.index[&c]
    }

    /// Coset of α·ν for α ∈ O_k.
    pub fn scale(&self, alpha: &FieldElem, i: usize) -> usize {
        let x: Vector = self.vectors[i].iter().map(|c| alpha * c).collect();
        self.coset_of(&x).expect("O_k preserves L^∨")
    }

    /// Tr_{k/Q} h(ν, μ) mod 1
    pub fn pairing(&self, i: usize, j: usize) -> Q {
        frac_q(&self.lattice.h(&self.vectors[i], &self.vectors[j]).trace())
    }

    /// Order of the coset as a group element.
    pub fn element_order(&self, i: usize) -> usize {
        let mut acc = i;
        let mut n = 1;
        while acc != 0 {
            acc = self.add(acc, i);
            n += 1;
        }
        n
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order(),
            "invariant_factors": self.invariant_factors,
            "cosets": self.vectors.iter().zip(&self.qform).map(|(v, q)| json!({
                "rep": v.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
                "q": q_json(q),
            })).collect::<Vec<_>>(),
        })
    }
}

// ---- enumeration ----

/// All z ∈ Z^m with (z + c)^T A (z + c) ≤ bound for a positive definite
/// rational A, in lexicographic order. Fincke–Pohst in f64 with a widened
/// search window, followed by an exact integer filter.
pub fn short_vectors(a: &Mat<Q>, center: &[Q], bound: &Q) -> Vec<Vec<i64>> {
    let m = a.len();
    if bound.is_negative() {
        return vec![];
    }
    if m == 0 {
        return vec![vec![]];
    }
    let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(q_to_f64).collect()).collect();
    // q[i][i] and q[i][j] (j > i) with Q(x) = Σ_i q_ii (x_i + Σ_{j>i} q_ij x_j)^2
    let mut qm = af.clone();
    for i in 0..m {
        for j in i + 1..m {
            qm[j][i] = qm[i][j];
            qm[i][j] /= qm[i][i];
        }
        for kk in i + 1..m {
            for l in kk..m {
                qm[kk][l] -= qm[kk][i] * qm[i][l];
            }
        }
    }
    let cf: Vec<f64> = center.iter().map(q_to_f64).collect();
    let bf = q_to_f64(bound) * (1.0 + 1e-9) + 1e-9;
    let filt = ExactForm::new(a, center, bound);

    let top = m - 1;
    let r = (bf / qm[top][top]).max(0.0).sqrt() + 1e-6;
    let lo = (-r - cf[top]).ceil() as i64;
    let hi = (r - cf[top]).floor() as i64;
    let outer: Vec<i64> = (lo..=hi).collect();
    let mut out = par::flat_map(&outer, |&zt| {
        let mut x = vec![0.0f64; m];
        let mut z = vec![0i64; m];
        z[top] = zt;
        x[top] = zt as f64 + cf[top];
        let used = qm[top][top] * x[top] * x[top];
        let mut found = vec![];
        descend(&qm, &cf, bf, top, used, &mut x, &mut z, &mut found, &filt);
        found
    });
    out.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn descend(
    qm: &[Vec<f64>],
    cf: &[f64],
    bf: f64,
    level: usize,
    used: f64,
    x: &mut [f64],
    z: &mut [i64],
    found: &mut Vec<Vec<i64>>,
    filt: &ExactForm,
) {
    if used > bf {
        return;
    }
    if level == 0 {
        if filt.accepts(z) {
            found.push(z.to_vec());
        }
        return;
    }
    let i = level - 1;
    let s: f64 = (i + 1..x.len()).map(|j| qm[i][j] * x[j]).sum();
    let r = ((bf - used) / qm[i][i]).max(0.0).sqrt() + 1e-6;
    let lo = (-s - r - cf[i]).ceil() as i64;
    let hi = (-s + r - cf[i]).floor() as i64;
    for zi in lo..=hi {
        z[i] = zi;
        x[i] = zi as f64 + cf[i];
        let t = x[i] + s;
        descend(qm, cf, bf, i, used + qm[i][i] * t * t, x, z, found, filt);
    }
    z[i] = 0;
    x[i] = 0.0;
}

/// (z + c)^T A (z + c) ≤ B checked in integers after clearing denominators.
struct ExactForm {
    a: Vec<Vec<BigInt>>,
    cd: BigInt,
    cn: Vec<BigInt>,
    rhs: BigInt,
}

impl ExactForm {
    fn new(a: &Mat<Q>, c: &[Q], bound: &Q) -> Self {
        let da = a.iter().flatten().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let cd = c.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let ai = a.iter().map(|r| r.iter().map(|x| (x * Q::from_integer(da.clone())).to_integer()).collect()).collect();
        let cn = c.iter().map(|x| (x * Q::from_integer(cd.clone())).to_integer()).collect();
        // w^T A_int w ≤ B·da·cd^2
        let rhs = (bound * Q::from_integer(&da * &cd * &cd)).floor().to_integer();
        ExactForm { a: ai, cd, cn, rhs }
    }

    fn accepts(&self, z: &[i64]) -> bool {
        let w: Vec<BigInt> = z.iter().zip(&self.cn).map(|(&zi, c)| &self.cd * zi + c).collect();
        let mut acc = BigInt::zero();
        for (i, wi) in w.iter().enumerate() {
            if wi.is_zero() {
                continue;
            }
            let row: BigInt = self.a[i].iter().zip(&w).map(|(x, y)| x * y).sum();
            acc += wi * row;
        }
        acc <= self.rhs
    }
}

/// Naive reference: scan the box |x_i| ≤ sqrt(bound·(A^{-1})_ii) and keep
/// the points inside the ellipsoid.
pub fn box_search(a: &Mat<Q>, center: &[Q], bound: &Q) -> Vec<Vec<i64>> {
    let m = a.len();
    let inv = linalg::inverse(a, &Q::zero()).expect("positive definite");
    let cf: Vec<f64> = center.iter().map(q_to_f64).collect();
    let ranges: Vec<(i64, i64)> = (0..m)
        .map(|i| {
            let r = (q_to_f64(bound) * q_to_f64(&inv[i][i])).max(0.0).sqrt() + 1.0;
            ((-r - cf[i]).floor() as i64, (r - cf[i]).ceil() as i64)
        })
        .collect();
    let mut out = vec![];
    let mut z: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if m == 0 {
        return if bound.is_negative() { vec![] } else { vec![vec![]] };
    }
    loop {
        let x: Vec<Q> = z.iter().zip(center).map(|(&zi, c)| qi(zi) + c).collect();
        let ax = linalg::matvec(a, &x, &Q::zero());
        let v: Q = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
        if &v <= bound {
            out.push(z.clone());
        }
        let mut i = m;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if z[i] < ranges[i].1 {
                z[i] += 1;
                break;
            }
            z[i] = ranges[i].0;
        }
    }
}

/// Where vectors are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Dual,
    Coset(usize),
}

/// Quadratic data (A, center, map to trace coords) for enumerating a domain
/// with h(x, x) = z^T A z-type forms.
fn domain_form(l: &HermLattice, dg: Option<&DiscGroup>, dom: Domain) -> (Mat<Q>, Vec<Q>, Box<dyn Fn(&[i64]) -> Vector + Sync + Send>) {
    let gt = l.trace_gram();
    let m = gt.len();
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    match dom {
        Domain::Dual => {
            // x = G^{-1} y, h(x,x) = ½ y^T G^{-1} y
            let inv = linalg::inverse(&gt, &Q::zero()).expect("nondegenerate");
            let a = linalg::mat_scale(&inv, &half);
            let l2 = l.clone();
            let f = move |y: &[i64]| {
                let yq: Vec<Q> = y.iter().map(|&v| qi(v)).collect();
                l2.from_trace_coords(&linalg::matvec(&inv, &yq, &Q::zero()))
            };
            (a, vec![Q::zero(); m], Box::new(f))
        }
        Domain::Coset(c) => {
            let dg = dg.expect("coset enumeration needs the discriminant group");
            let rep = dg.reps[c].clone();
            let a = linalg::mat_scale(&gt, &half);
            let l2 = l.clone();
            let r2 = rep.clone();
            let f = move |z: &[i64]| {
                let x: Vec<Q> = z.iter().zip(&r2).map(|(&zi, c)| qi(zi) + c).collect();
                l2.from_trace_coords(&x)
            };
            (a, rep, Box::new(f))
        }
    }
}

/// All λ with h(λ, λ) ≤ bound, in L^∨ or in one coset of L^∨/L. Ordered
/// lexicographically by integer coordinates (L^∨-coordinates for the whole
/// dual, L-coordinates relative to the coset representative otherwise).
pub fn enumerate_in(l: &HermLattice, dg: Option<&DiscGroup>, dom: Domain, bound: &Q) -> Result<Vec<Vector>> {
    if l.definiteness != Definiteness::Positive {
        return Err(Error::Validation("enumeration needs a positive definite lattice".into()));
    }
    let (a, c, f) = domain_form(l, dg, dom);
    let zs = short_vectors(&a, &c, bound);
    Ok(par::map(&zs, |z| f(z)))
}

pub fn enumerate_vectors(l: &HermLattice, bound: &Q) -> Result<Vec<Vector>> {
    enumerate_in(l, None, Domain::Dual, bound)
}

/// Hermitian target N, validated.
#[derive(Clone, Debug, PartialEq)]
pub struct GramTarget {
    pub n: Mat<FieldElem>,
}

impl GramTarget {
    pub fn new(n: Mat<FieldElem>) -> Result<Self> {
        let g = n.len();
        if n.iter().any(|r| r.len() != g) {
            return Err(Error::Validation("N must be square".into()));
        }
        for i in 0..g {
            if !n[i][i].is_rational() || n[i][i].a.is_negative() {
                return Err(Error::Validation("diagonal of N must be rational and ≥ 0".into()));
            }
            for j in 0..g {
                if n[i][j] != n[j][i].conj() {
                    return Err(Error::Validation("N is not Hermitian".into()));
                }
            }
        }
        // positive semidefinite iff every principal minor is ≥ 0
        if g > 0 {
            let z = n[0][0].k.zero();
            for mask in 1u32..(1 << g) {
                let idx: Vec<usize> = (0..g).filter(|i| mask >> i & 1 == 1).collect();
                let sub: Mat<FieldElem> = idx.iter().map(|&i| idx.iter().map(|&j| n[i][j].clone()).collect()).collect();
                if linalg::det(&sub, &z).a.is_negative() {
                    return Err(Error::Validation("N is not positive semidefinite".into()));
                }
            }
        }
        Ok(GramTarget { n })
    }

    pub fn genus(&self) -> usize {
        self.n.len()
    }

    pub fn trace(&self) -> Q {
        (0..self.genus()).map(|i| self.n[i][i].a.clone()).sum()
    }
}

/// All tuples (λ_1..λ_g) in (L^∨)^g with Gram matrix N, optionally with λ_i
/// in the coset ν_i. Lexicographic in the per-slot enumeration order.
pub fn enumerate_tuples(l: &HermLattice, dg: &DiscGroup, target: &GramTarget, cosets: Option<&[usize]>) -> Result<Vec<Vec<Vector>>> {
    let g = target.genus();
    if let Some(c) = cosets {
        if c.len() != g {
            return Err(Error::Validation("coset tuple length differs from genus".into()));
        }
    }
    let mut slots = Vec::with_capacity(g);
    for i in 0..g {
        let dom = cosets.map_or(Domain::Dual, |c| Domain::Coset(c[i]));
        let nii = target.n[i][i].a.clone();
        let vs: Vec<Vector> = enumerate_in(l, Some(dg), dom, &nii)?.into_iter().filter(|v| l.norm(v) == nii).collect();
        slots.push(vs);
    }
    let mut out = vec![];
    let mut cur: Vec<Vector> = vec![];
    extend_tuples(l, &target.n, &slots, &mut cur, &mut out);
    Ok(out)
}

fn extend_tuples(l: &HermLattice, n: &Mat<FieldElem>, slots: &[Vec<Vector>], cur: &mut Vec<Vector>, out: &mut Vec<Vec<Vector>>) {
    let i = cur.len();
    if i == slots.len() {
        out.push(cur.clone());
        return;
    }
    for v in &slots[i] {
        if (0..i).all(|j| l.h(v, &cur[j]) == n[i][j]) {
            cur.push(v.clone());
            extend_tuples(l, n, slots, cur, out);
            cur.pop();
        }
    }
}

pub fn vector_json(v: &[FieldElem]) -> Value {
    Value::Array(v.iter().map(|x| x.to_json()).collect())
}
