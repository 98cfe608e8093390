//! Boundary data of a Lorentzian Hermitian lattice at a primitive isotropic
//! line J = O_k·e: the positive definite quotient M = J⊥/J, the central
//! translation constant r_J, the subgroup H_J ⊂ L^∨/L and the arrow map
//! H_J⊥ → M^∨/M, plus the boundary corrections of special cycles.
//!
//! All elimination over O_k assumes class number one; gcds are computed as
//! minimal-norm generators of the ideal they span.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::hlattice::{disc_group, dual_basis, enumerate_in, enumerate_tuples, vector_json, Definiteness, Domain, DiscGroup, GramTarget, HermLattice, Vector};
use crate::linalg::{self, Mat, ZMat};
use crate::qfield::{q_json, qi, FieldElem, QuadField, CLASS_NUMBER_ONE, Q};
use crate::thetagen::diagonal_entries;
use crate::torcoh::CohRing;

fn check_field(k: &QuadField) -> Result<()> {
    if CLASS_NUMBER_ONE.contains(&k.d) {
        Ok(())
    } else {
        Err(Error::Validation("class number > 1 unsupported".into()))
    }
}

fn check_lorentzian(l: &HermLattice) -> Result<()> {
    if l.definiteness != Definiteness::Lorentzian {
        return Err(Error::Validation("boundary data need a lattice of signature (n+1, 1)".into()));
    }
    Ok(())
}

fn zi(x: &Q) -> BigInt {
    x.to_integer()
}

/// Lagrange reduction of a rank-2 sublattice of O_k under the norm form;
/// returns a shortest nonzero element.
fn shortest_in(mut b1: FieldElem, mut b2: FieldElem) -> FieldElem {
    if b1.is_zero() {
        return b2;
    }
    if b2.is_zero() {
        return b1;
    }
    if b2.norm() < b1.norm() {
        std::mem::swap(&mut b1, &mut b2);
    }
    loop {
        // Re(b2·conj(b1)) / N(b1), rounded
        let mu = ((&b2 * &b1.conj()).re() / b1.norm()).round();
        b2 = &b2 - &b1.scale(&mu);
        if b2.norm() >= b1.norm() {
            return b1;
        }
        std::mem::swap(&mut b1, &mut b2);
    }
}

/// A generator of the ideal spanned by integral elements (zero if all are).
pub fn ideal_generator(k: &QuadField, gens: &[FieldElem]) -> FieldElem {
    let w = k.omega();
    let rows: ZMat = gens
        .iter()
        .flat_map(|g| [g.clone(), g * &w])
        .map(|x| vec![zi(&x.a), zi(&x.b)])
        .collect();
    if rows.is_empty() {
        return k.zero();
    }
    let (_, s, v) = linalg::smith(&rows);
    // row space of A is spanned by s_i·(V^{-1})_i
    let vinv = {
        let det = &v[0][0] * &v[1][1] - &v[0][1] * &v[1][0];
        vec![vec![&v[1][1] * &det, -&v[0][1] * &det], vec![-&v[1][0] * &det, &v[0][0] * &det]]
    };
    let basis: Vec<FieldElem> = (0..2)
        .map(|i| {
            let si = if i < s.len() { s[i][i].clone() } else { BigInt::zero() };
            k.elem(Q::from_integer(&si * &vinv[i][0]), Q::from_integer(&si * &vinv[i][1]))
        })
        .collect();
    shortest_in(basis[0].clone(), basis[1].clone())
}

/// (g, x, y) with g = x·a + y·b generating (a, b).
pub fn bezout(k: &QuadField, a: &FieldElem, b: &FieldElem) -> Result<(FieldElem, FieldElem, FieldElem)> {
    let g = ideal_generator(k, &[a.clone(), b.clone()]);
    let w = k.omega();
    let cols = [a.clone(), a * &w, b.clone(), b * &w];
    let m: ZMat = vec![cols.iter().map(|c| zi(&c.a)).collect(), cols.iter().map(|c| zi(&c.b)).collect()];
    let sol = linalg::solve_integer(&m, &[zi(&g.a), zi(&g.b)])
        .ok_or_else(|| Error::Degenerate("ideal generator is not a combination; the field is not a PID".into()))?;
    let q = |i: usize| Q::from_integer(sol[i].clone());
    Ok((g, k.elem(q(0), q(1)), k.elem(q(2), q(3))))
}

/// Unimodular U ∈ GL_m(O_k) with c·U = (g, 0, …, 0), c integral.
pub fn column_reduce(k: &QuadField, c: &[FieldElem]) -> Result<(FieldElem, Mat<FieldElem>)> {
    let m = c.len();
    let mut c = c.to_vec();
    let mut u = linalg::identity(m, &k.zero());
    for j in 1..m {
        if c[j].is_zero() {
            continue;
        }
        if c[0].is_zero() {
            c.swap(0, j);
            for row in u.iter_mut() {
                row.swap(0, j);
            }
            continue;
        }
        let (g, x, y) = bezout(k, &c[0], &c[j])?;
        let gi = g.inv().expect("nonzero gcd");
        let p = -(&c[j] * &gi);
        let q = &c[0] * &gi;
        for row in u.iter_mut() {
            let (a, b) = (row[0].clone(), row[j].clone());
            row[0] = &(&a * &x) + &(&b * &y);
            row[j] = &(&a * &p) + &(&b * &q);
        }
        c[0] = g;
        c[j] = k.zero();
    }
    Ok((c[0].clone(), u))
}

fn is_unit(x: &FieldElem) -> bool {
    x.norm().is_one()
}

fn col(m: &Mat<FieldElem>, j: usize) -> Vector {
    m.iter().map(|r| r[j].clone()).collect()
}

/// Content of a vector is a unit.
pub fn is_primitive(k: &QuadField, v: &[FieldElem]) -> bool {
    v.iter().all(|x| x.is_integral()) && is_unit(&ideal_generator(k, v))
}

/// Representative of v up to units: the largest of u·v in a fixed order.
fn unit_normal(k: &QuadField, v: &[FieldElem]) -> Vector {
    k.units()
        .iter()
        .map(|(u, _)| v.iter().map(|x| u * x).collect::<Vector>())
        .max_by(|a, b| HermLattice::to_trace_coords(a).cmp(&HermLattice::to_trace_coords(b)))
        .expect("units are nonempty")
}

/// Primitive isotropic vectors with coordinates a + bω, |a|, |b| ≤ bound,
/// one per unit class, sorted.
pub fn find_isotropic(l: &HermLattice, bound: i64) -> Result<Vec<Vector>> {
    check_lorentzian(l)?;
    check_field(&l.k)?;
    let k = l.k;
    let m = l.rank();
    let side = (2 * bound + 1) as usize;
    let total = side.checked_pow(2 * m as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| Error::Validation("search box too large".into()))?;
    let found: BTreeSet<Vec<Q>> = (0..total)
        .filter_map(|mut idx| {
            let mut v = Vec::with_capacity(m);
            for _ in 0..m {
                let a = (idx % side) as i64 - bound;
                idx /= side;
                let b = (idx % side) as i64 - bound;
                idx /= side;
                v.push(k.elem_i(a, b));
            }
            if v.iter().all(|x| x.is_zero()) || !l.norm(&v).is_zero() || !is_primitive(&k, &v) {
                return None;
            }
            Some(HermLattice::to_trace_coords(&unit_normal(&k, &v)))
        })
        .collect();
    Ok(found.into_iter().map(|c| l.from_trace_coords(&c)).collect())
}

/// hyperbolic(δ_k) ⊕ diag(a): basis e, M-block, e′ with h(e, e′) = δ_k.
pub fn hyperbolic_plus(k: QuadField, a: &[i64]) -> Result<HermLattice> {
    let m = a.len() + 2;
    let mut g = linalg::zeros(m, m, &k.zero());
    g[0][m - 1] = k.delta();
    g[m - 1][0] = k.delta().conj();
    for (i, &x) in a.iter().enumerate() {
        g[i + 1][i + 1] = k.from_int(x);
    }
    HermLattice::new(k, g, Definiteness::Lorentzian)
}

#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub l: HermLattice,
    pub e: Vector,
    /// lifts in L of the chosen O_k-basis of M
    pub m_lifts: Vec<Vector>,
    pub m: HermLattice,
    pub r_j: Q,
    pub dg_l: DiscGroup,
    pub dg_m: DiscGroup,
    /// subgroup of L^∨/L, sorted coset indices
    pub h_j: Vec<usize>,
}

fn check_isotropic(l: &HermLattice, e: &[FieldElem]) -> Result<()> {
    if e.len() != l.rank() {
        return Err(Error::Validation("e has the wrong length".into()));
    }
    if !l.norm(e).is_zero() || e.iter().all(|x| x.is_zero()) {
        return Err(Error::Validation("e is not a nonzero isotropic vector".into()));
    }
    if !is_primitive(&l.k, e) {
        return Err(Error::Validation("e is not primitive in L".into()));
    }
    Ok(())
}

/// The linear form x ↦ h(x, e) as coefficients c with h(x,e) = Σ x_i c_i.
fn form_coeffs(l: &HermLattice, e: &[FieldElem]) -> Vector {
    (0..l.rank())
        .map(|i| (0..l.rank()).fold(l.k.zero(), |acc, j| &acc + &(&l.gram[i][j] * &e[j].conj())))
        .collect()
}

/// O_k-basis of J⊥ with e first, then lifts of an O_k-basis of M; also
/// returns M.
pub fn quotient_lattice(l: &HermLattice, e: &[FieldElem]) -> Result<(HermLattice, Vec<Vector>)> {
    check_lorentzian(l)?;
    check_field(&l.k)?;
    check_isotropic(l, e)?;
    let k = l.k;
    let m = l.rank();
    let z = k.zero();
    // clear denominators of the form, then reduce it to (g, 0, …)
    let c = form_coeffs(l, e);
    let den = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.a.denom()).lcm(x.b.denom()));
    let ci: Vector = c.iter().map(|x| x.scale(&Q::from_integer(den.clone()))).collect();
    let (_, u) = column_reduce(&k, &ci)?;
    let perp: Vec<Vector> = (1..m).map(|j| col(&u, j)).collect();
    // e in the J⊥ basis, then complete e to a basis
    let a: Mat<FieldElem> = (0..m).map(|r| perp.iter().map(|v| v[r].clone()).collect()).collect();
    let t = linalg::solve(&a, e, m - 1, &z).ok_or_else(|| Error::Degenerate("e is not orthogonal to itself".into()))?;
    let (unit, w) = column_reduce(&k, &t)?;
    if !is_unit(&unit) {
        return Err(Error::Degenerate("e is not primitive in J⊥".into()));
    }
    // new basis B·(Wᵀ)^{-1}: its first vector is e/unit
    let wt_inv = linalg::inverse(&linalg::transpose(&w), &z).expect("unimodular");
    let b = linalg::matmul(&a, &wt_inv, &z);
    let lifts: Vec<Vector> = (1..m - 1).map(|j| col(&b, j)).collect();
    let gram: Mat<FieldElem> = lifts.iter().map(|x| lifts.iter().map(|y| l.h(x, y)).collect()).collect();
    let raw = HermLattice::positive(k, gram)?;
    let (mlat, lifts) = orthogonalize(l, &raw, lifts)?;
    Ok((mlat, lifts))
}

/// Greedy orthogonal O_k-basis of M from its shortest vectors, when one
/// exists among vectors no longer than the current basis.
fn orthogonalize(l: &HermLattice, raw: &HermLattice, lifts: Vec<Vector>) -> Result<(HermLattice, Vec<Vector>)> {
    let n = raw.rank();
    if n == 0 {
        return Ok((raw.clone(), lifts));
    }
    let z = raw.k.zero();
    let bound = (0..n).map(|i| raw.gram[i][i].a.clone()).max().expect("n > 0");
    if bound > qi(6) && n > 3 {
        return Ok((raw.clone(), lifts));
    }
    let mut vs = enumerate_in(raw, Some(&disc_group(raw)?), Domain::Coset(0), &bound)?;
    vs.retain(|v| !v.iter().all(|x| x.is_zero()));
    vs.sort_by(|a, b| raw.norm(a).cmp(&raw.norm(b)).then_with(|| HermLattice::to_trace_coords(b).cmp(&HermLattice::to_trace_coords(a))));
    let mut chosen: Vec<Vector> = vec![];
    for v in vs {
        if chosen.iter().all(|c| raw.h(&v, c).is_zero()) {
            let mut trial = chosen.clone();
            trial.push(v);
            if linalg::rank(&trial) == trial.len() {
                chosen = trial;
            }
        }
        if chosen.len() == n {
            break;
        }
    }
    if chosen.len() < n || !is_unit(&linalg::det(&chosen, &z)) {
        return Ok((raw.clone(), lifts));
    }
    let new_lifts: Vec<Vector> = chosen
        .iter()
        .map(|c| (0..l.rank()).map(|r| c.iter().zip(&lifts).fold(z.clone(), |acc, (ci, lv)| &acc + &(ci * &lv[r]))).collect())
        .collect();
    let gram: Mat<FieldElem> = new_lifts.iter().map(|x| new_lifts.iter().map(|y| l.h(x, y)).collect()).collect();
    Ok((HermLattice::positive(raw.k, gram)?, new_lifts))
}

/// Z-basis of L^∨: the O_k-basis rows times {1, ω}.
fn dual_z_basis(l: &HermLattice) -> Result<Vec<Vector>> {
    let w = l.k.omega();
    Ok(dual_basis(l)?
        .basis_matrix
        .iter()
        .flat_map(|r| [r.clone(), r.iter().map(|x| x * &w).collect()])
        .collect())
}

/// Smallest r > 0 with (r/δ_k)·h(L^∨, e)·e ⊂ L, i.e. r·S ⊂ O_k for
/// S = δ_k^{-1} h(L^∨, e): lcm of denominators over gcd of numerators of
/// the coordinates of generators of S.
pub fn compute_rj(l: &HermLattice, e: &[FieldElem]) -> Result<Q> {
    check_isotropic(l, e)?;
    let di = l.k.delta().inv().expect("δ_k ≠ 0");
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for x in dual_z_basis(l)? {
        let s = &l.h(&x, e) * &di;
        for c in [&s.a, &s.b] {
            if !c.is_zero() {
                num = num.gcd(c.numer());
                den = den.lcm(c.denom());
            }
        }
    }
    if num.is_zero() {
        return Err(Error::Degenerate("h(L^∨, e) = 0".into()));
    }
    Ok(Q::new(den, num))
}

/// Brute force: the least p/q (q ≤ max_den, p ≤ max_num) such that
/// γ_r(x) − x = (r/δ_k)h(x,e)e lies in L for every x on a Z-basis of L^∨
/// and every coset representative.
pub fn rj_bruteforce(l: &HermLattice, e: &[FieldElem], max_den: i64, max_num: i64) -> Result<Option<Q>> {
    let di = l.k.delta().inv().expect("δ_k ≠ 0");
    let image = |x: &[FieldElem]| -> Vector {
        let t = &l.h(x, e) * &di;
        e.iter().map(|y| &t * y).collect()
    };
    let ok = |r: &Q, v: &Vector| v.iter().all(|c| c.scale(r).is_integral());
    let basis: Vec<Vector> = dual_z_basis(l)?.iter().map(|x| image(x)).collect();
    let mut cands: Vec<Q> = (1..=max_den).flat_map(|q| (1..=max_num).map(move |p| Q::new(p.into(), q.into()))).collect();
    cands.sort();
    cands.dedup();
    let mut reps: Option<Vec<Vector>> = None;
    for r in cands {
        if !basis.iter().all(|v| ok(&r, v)) {
            continue;
        }
        let reps = match &mut reps {
            Some(v) => v,
            None => reps.insert(disc_group(l)?.vectors.iter().map(|x| image(x)).collect()),
        };
        if reps.iter().all(|v| ok(&r, v)) {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Cosets t·e with t·e ∈ L^∨, as a subgroup of L^∨/L.
fn h_j_subgroup(l: &HermLattice, dg: &DiscGroup, e: &[FieldElem]) -> Result<Vec<usize>> {
    let w = l.k.omega();
    let gt = l.trace_gram_z();
    let ce = HermLattice::to_trace_coords(e);
    let cwe = HermLattice::to_trace_coords(&e.iter().map(|x| x * &w).collect::<Vec<_>>());
    let apply = |c: &[Q]| -> Vec<BigInt> { gt.iter().map(|r| r.iter().zip(c).map(|(a, b)| Q::from_integer(a.clone()) * b).sum::<Q>().to_integer()).collect() };
    let (a0, a1) = (apply(&ce), apply(&cwe));
    let a: ZMat = (0..a0.len()).map(|i| vec![a0[i].clone(), a1[i].clone()]).collect();
    let (_, s, v) = linalg::smith(&a);
    // {t : A t ∈ Z} is spanned by the columns of V·diag(1/s)
    let mut gens = vec![];
    for j in 0..2 {
        let sj = &s[j][j];
        if sj.is_zero() {
            return Err(Error::Degenerate("e is zero".into()));
        }
        let t = l.k.elem(Q::new(v[0][j].clone(), sj.clone()), Q::new(v[1][j].clone(), sj.clone()));
        let te: Vector = e.iter().map(|x| &t * x).collect();
        gens.push(dg.coset_of(&te)?);
    }
    let mut seen = BTreeSet::from([0usize]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for &g in &gens {
            let y = dg.add(x, g);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

impl BoundaryData {
    pub fn new(l: &HermLattice, e: &[FieldElem]) -> Result<Self> {
        let (m, m_lifts) = quotient_lattice(l, e)?;
        let r_j = compute_rj(l, e)?;
        let dg_l = disc_group(l)?;
        let dg_m = disc_group(&m)?;
        let h_j = h_j_subgroup(l, &dg_l, e)?;
        Ok(BoundaryData { l: l.clone(), e: e.to_vec(), m_lifts, m, r_j, dg_l, dg_m, h_j })
    }

    pub fn n(&self) -> usize {
        self.m.rank()
    }

    /// Coset in M^∨/M of x ∈ L^∨ after moving x into J⊥ by an element of L.
    pub fn arrow_of_lift(&self, x: &[FieldElem]) -> Result<usize> {
        let l = &self.l;
        let k = l.k;
        let z = k.zero();
        let c = form_coeffs(l, &self.e);
        let w = k.omega();
        // h(y, e) for y on the Z-basis {ε_i, ω ε_i} of L, in (1, ω) coordinates
        let cols: Vec<FieldElem> = c.iter().flat_map(|ci| [ci.clone(), &w * ci]).collect();
        let target = -l.h(x, &self.e);
        let den = cols.iter().chain([&target]).fold(BigInt::one(), |acc, v| acc.lcm(v.a.denom()).lcm(v.b.denom()));
        let dq = Q::from_integer(den);
        let a: ZMat = vec![
            cols.iter().map(|v| (&v.a * &dq).to_integer()).collect(),
            cols.iter().map(|v| (&v.b * &dq).to_integer()).collect(),
        ];
        let b = [(&target.a * &dq).to_integer(), (&target.b * &dq).to_integer()];
        let y = linalg::solve_integer(&a, &b).ok_or_else(|| Error::Degenerate("coset has no lift orthogonal to e".into()))?;
        let shift: Vector = y.chunks(2).map(|p| k.elem(Q::from_integer(p[0].clone()), Q::from_integer(p[1].clone()))).collect();
        let xp: Vector = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        // coordinates in (e, lifts) over k, dropping e
        let m = l.rank();
        let basis: Vec<&Vector> = std::iter::once(&self.e).chain(self.m_lifts.iter()).collect();
        let mat: Mat<FieldElem> = (0..m).map(|r| basis.iter().map(|v| v[r].clone()).collect()).collect();
        let coords = linalg::solve(&mat, &xp, basis.len(), &z).ok_or_else(|| Error::Degenerate("lift is not in J⊥".into()))?;
        self.dg_m.coset_of(&coords[1..])
    }

    pub fn in_support(&self, nu: usize) -> bool {
        self.h_j.iter().all(|&h| self.dg_l.pairing(nu, h).is_zero())
    }

    /// Image of ν in M^∨/M, or None when ν is not orthogonal to H_J.
    pub fn arrow_up(&self, nu: usize) -> Result<Option<usize>> {
        if nu >= self.dg_l.order() {
            return Err(Error::Validation(format!("coset index {nu} out of range")));
        }
        if !self.in_support(nu) {
            return Ok(None);
        }
        self.arrow_of_lift(&self.dg_l.vectors[nu]).map(Some)
    }

    /// (ν, ↑ν) for the first `limit` cosets.
    pub fn arrow_table(&self, limit: usize) -> Result<Vec<(usize, Option<usize>)>> {
        (0..self.dg_l.order().min(limit)).map(|nu| Ok((nu, self.arrow_up(nu)?))).collect()
    }

    pub fn to_json(&self, arrow_limit: usize) -> Result<Value> {
        let arrow = self.arrow_table(arrow_limit)?;
        Ok(json!({
            "L": self.l.to_json(),
            "e": vector_json(&self.e),
            "M": self.m.to_json(),
            "M_lifts": self.m_lifts.iter().map(|v| vector_json(v)).collect::<Vec<_>>(),
            "r_J": q_json(&self.r_j),
            "H_J": self.h_j,
            "H_J_order": self.h_j.len(),
            "disc_order": self.dg_l.order(),
            "arrow": arrow.iter().map(|(nu, a)| json!({"nu": nu, "image": a})).collect::<Vec<_>>(),
            "arrow_truncated": arrow.len() < self.dg_l.order(),
        }))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionTerm {
    pub l: usize,
    pub i: usize,
    /// exponent g − ℓ − 1 of the Lefschetz class paired with W^ℓ_i
    pub power: usize,
    pub coefficient: FieldElem,
}

#[derive(Clone, Debug)]
pub struct Correction {
    pub g: usize,
    pub image: Option<Vec<usize>>,
    pub tuples: usize,
    pub terms: Vec<CorrectionTerm>,
}

pub fn boundary_cycles(bd: &BoundaryData) -> Result<Cycles> {
    let a = diagonal_entries(&bd.m).ok_or_else(|| Error::Validation("boundary corrections need a diagonal M".into()))?;
    Cycles::new(CohRing::new(bd.m.k, a)?)
}

/// c_{ℓ,i} = (r_J/d_k)·Σ (Λ^{g−ℓ}P^{ℓ,ℓ}_i)(λ̲) over λ̲ ∈ (M^∨)^g with Gram N
/// in the coset ↑(ν̲), for ℓ < g.
pub fn assemble_correction(bd: &BoundaryData, cyc: &Cycles, g: usize, nu: &[usize], n: &Mat<FieldElem>) -> Result<Correction> {
    let dim = bd.n();
    if g == 0 || 2 * g > dim {
        return Err(Error::Validation(format!("need 1 ≤ g and 2g ≤ n = {dim}")));
    }
    if nu.len() != g || nu.iter().any(|&x| x >= bd.dg_l.order()) {
        return Err(Error::Validation("ν̲ must list g cosets of L^∨/L".into()));
    }
    let target = GramTarget::new(n.clone())?;
    if target.genus() != g {
        return Err(Error::Validation("N must be g×g".into()));
    }
    let image: Option<Vec<usize>> = nu.iter().map(|&x| bd.arrow_up(x)).collect::<Result<_>>()?;
    let Some(mu) = image else {
        return Ok(Correction { g, image: None, tuples: 0, terms: vec![] });
    };
    let tuples = enumerate_tuples(&bd.m, &bd.dg_m, &target, Some(&mu))?;
    let table = cyc.decompose_cycle_function(g)?;
    let k = bd.m.k;
    let scale = &bd.r_j / qi(k.disc as i64);
    let mut terms = vec![];
    for entry in table.entries.iter().filter(|e| e.l < g) {
        let mut acc = crate::qfield::KElem::zero(k.d);
        for t in &tuples {
            acc = &acc + &cyc.fam.evaluate(&entry.p_raised, t)?;
        }
        let c = FieldElem::from_ext(&acc, k).ok_or_else(|| Error::Degenerate("correction coefficient is not in k".into()))?;
        terms.push(CorrectionTerm { l: entry.l, i: entry.i, power: g - entry.l - 1, coefficient: c.scale(&scale) });
    }
    Ok(Correction { g, image: Some(mu), tuples: tuples.len(), terms })
}

/// The corrected boundary function keeps only the top primitive part of
/// u_g; every coefficient must be killed by each Δ_i.
pub fn top_residual_pluriharmonic(cyc: &Cycles, g: usize) -> Result<bool> {
    let f = cyc.corrected_fn(g)?;
    Ok(f.terms.values().all(|p| cyc.fam.is_pluriharmonic(p)))
}

impl Correction {
    pub fn to_json(&self, cyc: &Cycles) -> Result<Value> {
        let table = cyc.decompose_cycle_function(self.g)?;
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                let w = table.entries.iter().find(|e| e.l == t.l && e.i == t.i).map(|e| cyc.ring.class_to_json(&e.w));
                json!({"l": t.l, "i": t.i, "power": t.power, "coefficient": t.coefficient.to_json(), "W": w})
            })
            .collect();
        Ok(json!({"g": self.g, "image": self.image, "tuples": self.tuples, "terms": terms}))
    }
}

/// |H_J⊥| / |H_J|, to compare with |M^∨/M|.
pub fn support_ratio(bd: &BoundaryData) -> Option<usize> {
    let perp = (0..bd.dg_l.order()).filter(|&nu| bd.in_support(nu)).count();
    let hj = bd.h_j.len();
    (perp % hj == 0).then(|| perp / hj)
}
