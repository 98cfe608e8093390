//! Generating series Σ value(λ̲) q^N e_ν̲ over tuples λ̲ ∈ (L^∨)^g, with
//! N = (h(λ_i, λ_j)) and q^N = e(Tr τN): exact q-expansions, numeric
//! evaluation of the completed theta series
//!   ϑ_P(τ) = det(Y)^{-1} Σ exp(−Δ/4π)(P)(λ̲·Y^{1/2}) q^N e_ν̲
//! with a rigorous truncation bound, and functional-equation reports.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::fpoly::{binom, factorial, members, subsets, ExpTerm, FFamily, FPoly};
use crate::hlattice::{disc_group, dual_basis, enumerate_in, DiscGroup, Domain, HermLattice, Vector};
use crate::linalg::{self, Mat};
use crate::par;
use crate::qfield::{q_to_f64, FieldElem, KElem, Q};
use crate::torcoh::{CohClass, CohRing};
use crate::weilrep::{cmatvec, CMat, GroupGen, WeilRep};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesKind {
    Cycles,
    Corrected,
    Weighted(FPoly),
    Completed(FPoly),
}

impl SeriesKind {
    pub fn name(&self) -> &'static str {
        match self {
            SeriesKind::Cycles => "cycles",
            SeriesKind::Corrected => "corrected",
            SeriesKind::Weighted(_) => "weighted",
            SeriesKind::Completed(_) => "completed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub lattice: HermLattice,
    pub g: usize,
}

/// Diagonal entries of a diagonal integral Gram matrix.
pub fn diagonal_entries(l: &HermLattice) -> Option<Vec<i64>> {
    let n = l.rank();
    let mut a = vec![];
    for i in 0..n {
        for j in 0..n {
            if i != j && !l.gram[i][j].is_zero() {
                return None;
            }
        }
        let x = &l.gram[i][i];
        if !x.is_rational() || !x.a.is_integer() {
            return None;
        }
        a.push(x.a.to_integer().to_i64()?);
    }
    Some(a)
}

impl SeriesSpec {
    pub fn new(kind: SeriesKind, lattice: HermLattice, g: usize) -> Result<Self> {
        if g == 0 || g > lattice.rank() {
            return Err(Error::Validation(format!("genus must lie in 1..={}", lattice.rank())));
        }
        if lattice.definiteness != crate::hlattice::Definiteness::Positive {
            return Err(Error::Validation("series need a positive definite lattice".into()));
        }
        if let SeriesKind::Weighted(p) | SeriesKind::Completed(p) = &kind {
            if p.n != lattice.rank() || (p.g != g && p.g != 0) {
                return Err(Error::Validation(format!("weight polynomial must lie in F_{{{},{g}}} or be constant", lattice.rank())));
            }
        }
        if matches!(kind, SeriesKind::Cycles | SeriesKind::Corrected) && diagonal_entries(&lattice).is_none() {
            return Err(Error::Validation("cycle series need a diagonal integral Gram matrix".into()));
        }
        Ok(SeriesSpec { kind, lattice, g })
    }

    pub fn n(&self) -> usize {
        self.lattice.rank()
    }

    pub fn weight(&self) -> usize {
        match &self.kind {
            SeriesKind::Weighted(p) | SeriesKind::Completed(p) if p.g == 0 => self.n(),
            _ => self.n() + 2,
        }
    }

    pub fn cycles(&self) -> Result<Cycles> {
        let a = diagonal_entries(&self.lattice).ok_or_else(|| Error::Validation("diagonal Gram required".into()))?;
        Cycles::new(CohRing::new(self.lattice.k, a)?)
    }

    pub fn family(&self) -> Result<FFamily> {
        FFamily::new(self.lattice.k, self.lattice.gram.clone())
    }
}

// ---------------------------------------------------------------- exact

#[derive(Clone, Debug, PartialEq)]
pub enum CoeffValue {
    Scalar(KElem),
    Class(CohClass),
}

#[derive(Clone, Debug)]
pub struct QCoeff {
    pub nu: Vec<usize>,
    pub n: Mat<FieldElem>,
    pub value: CoeffValue,
}

#[derive(Clone, Debug)]
pub struct QExpansion {
    pub d: u64,
    pub g: usize,
    pub weight: usize,
    pub truncation: Q,
    pub kind: String,
    pub gram: Value,
    pub coefficients: Vec<QCoeff>,
}

/// Tuples in (L^∨)^g with Tr N ≤ T, with their coset indices.
pub fn tuples_by_trace(l: &HermLattice, dg: &DiscGroup, g: usize, t: &Q) -> Result<Vec<Vec<Vector>>> {
    let mut vecs = enumerate_in(l, Some(dg), Domain::Dual, t)?;
    let norms: Vec<Q> = vecs.iter().map(|v| l.norm(v)).collect();
    let mut idx: Vec<usize> = (0..vecs.len()).collect();
    idx.sort_by(|&a, &b| norms[a].cmp(&norms[b]).then(a.cmp(&b)));
    let sorted: Vec<(Vector, Q)> = idx.iter().map(|&i| (std::mem::take(&mut vecs[i]), norms[i].clone())).collect();
    let mut out = vec![];
    let mut stack: Vec<usize> = vec![];
    fn rec(sorted: &[(Vector, Q)], g: usize, budget: &Q, stack: &mut Vec<usize>, out: &mut Vec<Vec<Vector>>) {
        if stack.len() == g {
            out.push(stack.iter().map(|&i| sorted[i].0.clone()).collect());
            return;
        }
        for (i, (_, h)) in sorted.iter().enumerate() {
            if h > budget {
                break;
            }
            stack.push(i);
            rec(sorted, g, &(budget - h), stack, out);
            stack.pop();
        }
    }
    rec(&sorted, g, t, &mut stack, &mut out);
    Ok(out)
}

fn key_of(n: &Mat<FieldElem>) -> Vec<Q> {
    n.iter().flatten().flat_map(|x| [x.a.clone(), x.b.clone()]).collect()
}

/// Exact coefficients for Tr N ≤ T, ordered by (Tr N, ν̲, N).
pub fn qexp(spec: &SeriesSpec, t: &Q) -> Result<QExpansion> {
    if t < &Q::zero() {
        return Err(Error::Validation("truncation must be nonnegative".into()));
    }
    let l = &spec.lattice;
    let dg = disc_group(l)?;
    let tuples = tuples_by_trace(l, &dg, spec.g, t)?;
    let cyc = match spec.kind {
        SeriesKind::Cycles | SeriesKind::Corrected => Some(spec.cycles()?),
        _ => None,
    };
    if let (SeriesKind::Corrected, Some(c)) = (&spec.kind, &cyc) {
        c.decompose_cycle_function(spec.g)?;
    }
    let fam = match &spec.kind {
        SeriesKind::Weighted(_) | SeriesKind::Completed(_) => Some(spec.family()?),
        _ => None,
    };
    let d = l.k.d;
    let values: Vec<Result<(Vec<usize>, Mat<FieldElem>, CoeffValue)>> = par::map(&tuples, |tuple| {
        let nu = tuple.iter().map(|v| dg.coset_of(v)).collect::<Result<Vec<_>>>()?;
        let n = l.gram_of(tuple);
        let value = match &spec.kind {
            SeriesKind::Weighted(p) | SeriesKind::Completed(p) => {
                let fam = fam.as_ref().expect("family");
                CoeffValue::Scalar(if p.g == 0 { p.coeffs[0].clone() } else { fam.evaluate(p, tuple)? })
            }
            SeriesKind::Cycles => CoeffValue::Class(cyc.as_ref().expect("cycles").cycle_class(tuple)?),
            SeriesKind::Corrected => CoeffValue::Class(cyc.as_ref().expect("cycles").corrected_class(tuple)?),
        };
        Ok((nu, n, value))
    });
    let mut cells: BTreeMap<(Q, Vec<usize>, Vec<Q>), (Mat<FieldElem>, CoeffValue)> = BTreeMap::new();
    for v in values {
        let (nu, n, value) = v?;
        let tr: Q = (0..spec.g).map(|i| n[i][i].a.clone()).sum();
        let key = (tr, nu, key_of(&n));
        match cells.get_mut(&key) {
            None => {
                cells.insert(key, (n, value));
            }
            Some((_, acc)) => {
                *acc = match (&*acc, value) {
                    (CoeffValue::Scalar(a), CoeffValue::Scalar(b)) => CoeffValue::Scalar(a + &b),
                    (CoeffValue::Class(a), CoeffValue::Class(b)) => CoeffValue::Class(a.add(&b)),
                    _ => unreachable!("one kind per series"),
                }
            }
        }
    }
    let coefficients = cells
        .into_iter()
        .map(|((_, nu, _), (n, value))| QCoeff { nu, n, value })
        .filter(|c| match &c.value {
            CoeffValue::Scalar(x) => !x.is_zero(),
            CoeffValue::Class(x) => !x.is_zero(),
        })
        .collect();
    let _ = d;
    Ok(QExpansion {
        d: l.k.d,
        g: spec.g,
        weight: spec.weight(),
        truncation: t.clone(),
        kind: spec.kind.name().into(),
        gram: l.to_json()["gram"].clone(),
        coefficients,
    })
}

impl QExpansion {
    pub fn get(&self, nu: &[usize], n: &Mat<FieldElem>) -> Option<&CoeffValue> {
        self.coefficients.iter().find(|c| c.nu == nu && &c.n == n).map(|c| &c.value)
    }

    /// e(Tr((N − N_ν̲)B)) = 1 on the support, checked exactly.
    pub fn phase_compatible(&self, dg: &DiscGroup, b: &Mat<FieldElem>) -> bool {
        self.coefficients.iter().all(|c| {
            let g = self.g;
            let mut acc = dg.lattice.k.zero();
            for i in 0..g {
                for j in 0..g {
                    let nv = dg.lattice.h(&dg.vectors[c.nu[i]], &dg.vectors[c.nu[j]]);
                    acc = &acc + &(&(&c.n[i][j] - &nv) * &b[j][i]);
                }
            }
            acc.is_rational() && acc.a.is_integer()
        })
    }

    pub fn to_json(&self, ring: Option<&CohRing>) -> Value {
        let coeffs: Vec<Value> = self
            .coefficients
            .iter()
            .map(|c| {
                let value = match &c.value {
                    CoeffValue::Scalar(x) => x.to_json(),
                    CoeffValue::Class(x) => match ring {
                        Some(r) => r.class_to_json(x),
                        None => Value::Null,
                    },
                };
                json!({
                    "nu": c.nu,
                    "N": c.n.iter().map(|r| r.iter().map(|x| x.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "value": value,
                })
            })
            .collect();
        json!({
            "meta": {
                "d": self.d, "gram": self.gram, "g": self.g, "weight": self.weight,
                "T": crate::qfield::q_json(&self.truncation), "kind": self.kind,
            },
            "coefficients": coeffs,
        })
    }
}

// ---------------------------------------------------------------- points

fn to_dm(m: &CMat) -> DMatrix<Complex64> {
    let g = m.len();
    DMatrix::from_fn(g, g, |i, j| m[i][j])
}

fn from_dm(m: &DMatrix<Complex64>) -> CMat {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// A point of the Hermitian upper half-space with the derived data the
/// series need.
#[derive(Clone, Debug)]
pub struct Point {
    pub tau: CMat,
    pub y: CMat,
    pub y_sqrt: CMat,
    pub det_y: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Point {
    pub fn new(tau: CMat) -> Result<Self> {
        let g = tau.len();
        if g == 0 || tau.iter().any(|r| r.len() != g) {
            return Err(Error::Validation("τ must be a nonempty square matrix".into()));
        }
        let t = to_dm(&tau);
        let y = (&t - t.adjoint()) / Complex64::new(0.0, 2.0);
        let y = (&y + y.adjoint()) / Complex64::new(2.0, 0.0);
        let eig = y.clone().symmetric_eigen();
        let ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let y_min = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if y_min <= 0.0 {
            return Err(Error::Validation("Im τ is not positive definite".into()));
        }
        let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(x.sqrt(), 0.0)));
        let s = &eig.eigenvectors * sq * eig.eigenvectors.adjoint();
        let s = (&s + s.adjoint()) / Complex64::new(2.0, 0.0);
        Ok(Point { det_y: ev.iter().product(), tau, y: from_dm(&y), y_sqrt: from_dm(&s), y_min, y_max })
    }

    /// i·t·I_g
    pub fn scalar(g: usize, t: f64) -> Self {
        let tau = (0..g).map(|i| (0..g).map(|j| if i == j { Complex64::new(0.0, t) } else { Complex64::zero() }).collect()).collect();
        Self::new(tau).expect("positive imaginary part")
    }

    /// T·τ and det(Cτ + D).
    pub fn act(&self, gen: &GroupGen) -> Result<(Point, Complex64)> {
        let t = to_dm(&self.tau);
        let g = self.tau.len();
        let c = |m: &Mat<FieldElem>| -> Result<DMatrix<Complex64>> {
            if m.len() != g || m.iter().any(|r| r.len() != g) {
                return Err(Error::Validation(format!("generator matrix must be {g}×{g}")));
            }
            Ok(DMatrix::from_fn(g, g, |i, j| m[i][j].to_c64()))
        };
        match gen {
            GroupGen::N(b) => Ok((Point::new(from_dm(&(t + c(b)?)))?, Complex64::one())),
            GroupGen::W => {
                let inv = t.clone().try_inverse().ok_or_else(|| Error::Degenerate("τ is singular".into()))?;
                Ok((Point::new(from_dm(&(-inv)))?, t.determinant()))
            }
            GroupGen::M(a) => {
                let a = c(a)?;
                let ad = a.adjoint();
                let f = ad.determinant().inv();
                Ok((Point::new(from_dm(&(&a * t * &ad)))?, f))
            }
        }
    }
}

// ---------------------------------------------------------------- numeric

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Holomorphic,
    Completed,
}

/// A dual vector with its coset, complex embedding and exact norm.
pub struct NumVec {
    pub coset: usize,
    pub x: Vec<Complex64>,
    pub norm: Q,
    pub exact: Vector,
}

/// Per coset tuple (in `WeilRep` basis order), one value per component.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub values: Vec<Vec<Complex64>>,
    pub tail: f64,
    pub tuples: usize,
}

/// Numeric evaluator of Σ_λ̲ P_c(λ̲) q^N e_ν̲ for a list of components P_c.
pub struct Evaluator {
    pub lattice: HermLattice,
    pub dg: DiscGroup,
    pub g: usize,
    pub fam: FFamily,
    pub components: Vec<FPoly>,
    pub mode: EvalMode,
    terms: Vec<Vec<ExpTerm>>,
    gram_c: Vec<Vec<Complex64>>,
    mu_dual: f64,
    mu_h: f64,
    /// covolume of L^∨ and circumradius of its centred basis cell, both in the metric h(x, x)
    covol_dual: f64,
    rho_dual: f64,
}

fn min_eig_sym(m: &Mat<Q>) -> f64 {
    let n = m.len();
    let d = DMatrix::from_fn(n, n, |i, j| q_to_f64(&m[i][j]));
    d.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Z-basis {b_j, ω b_j} of L^∨ with Gram matrix Re h: returns (√det, max over
/// cell corners of |½ Σ ±u_a|).
fn dual_cell(lattice: &HermLattice) -> Result<(f64, f64)> {
    let k = lattice.k;
    let db = dual_basis(lattice)?.basis_matrix;
    let w = k.omega();
    let us: Vec<Vector> = db.iter().flat_map(|b| [b.clone(), b.iter().map(|c| &w * c).collect()]).collect();
    let r: Mat<Q> = us.iter().map(|u| us.iter().map(|v| lattice.h(u, v).re()).collect()).collect();
    let covol = q_to_f64(&linalg::det(&r, &Q::zero())).sqrt();
    let m = us.len();
    let rf: Vec<Vec<f64>> = r.iter().map(|row| row.iter().map(q_to_f64).collect()).collect();
    let rho2 = if m <= 16 {
        (0u32..1 << m)
            .map(|mask| {
                let sg = |a: usize| if mask >> a & 1 == 1 { 1.0 } else { -1.0 };
                (0..m).map(|a| (0..m).map(|b| sg(a) * sg(b) * rf[a][b]).sum::<f64>()).sum::<f64>() / 4.0
            })
            .fold(0.0, f64::max)
    } else {
        (0..m).map(|a| rf[a][a].sqrt()).sum::<f64>().powi(2) / 4.0
    };
    Ok((covol, rho2.sqrt()))
}

fn l1(p: &FPoly) -> f64 {
    p.coeffs.iter().map(|c| c.to_c64().norm()).sum()
}

impl Evaluator {
    pub fn new(lattice: HermLattice, g: usize, components: Vec<FPoly>, mode: EvalMode) -> Result<Self> {
        let dg = disc_group(&lattice)?;
        let fam = FFamily::new(lattice.k, lattice.gram.clone())?;
        for p in &components {
            if p.n != lattice.rank() || (p.g != g && p.g != 0) {
                return Err(Error::Validation("component polynomial has the wrong shape".into()));
            }
        }
        let terms = components
            .iter()
            .map(|p| {
                let t = fam.exp_laplacian(p, &Q::one());
                match mode {
                    EvalMode::Holomorphic => t.into_iter().filter(|x| x.r == 0).collect(),
                    EvalMode::Completed => t,
                }
            })
            .collect();
        let gram_c = lattice.gram.iter().map(|r| r.iter().map(|x| x.to_c64()).collect()).collect();
        let gt = lattice.trace_gram();
        let inv = linalg::inverse(&gt, &Q::zero()).ok_or_else(|| Error::Degenerate("singular trace form".into()))?;
        let half = Q::new(1.into(), 2.into());
        let mu_dual = min_eig_sym(&linalg::mat_scale(&inv, &half));
        // h(x,x) = ½ xᵀ G_tr x in real coordinates of C^n scaled by the embedding
        let n = lattice.rank();
        let gc = DMatrix::from_fn(n, n, |i, j| lattice.gram[i][j].to_c64());
        let mu_h = gc.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        let (covol_dual, rho_dual) = dual_cell(&lattice)?;
        Ok(Evaluator { lattice, dg, g, fam, components, mode, terms, gram_c, mu_dual, mu_h, covol_dual, rho_dual })
    }

    pub fn dim(&self) -> usize {
        self.dg.order().pow(self.g as u32)
    }

    fn tuple_index(&self, cosets: &[usize]) -> usize {
        cosets.iter().fold(0, |acc, &c| acc * self.dg.order() + c)
    }

    fn vectors(&self, t: &Q) -> Result<Vec<NumVec>> {
        let mut vs: Vec<NumVec> = enumerate_in(&self.lattice, Some(&self.dg), Domain::Dual, t)?
            .into_iter()
            .map(|v| {
                let coset = self.dg.coset_of(&v).expect("dual vector");
                NumVec { coset, x: v.iter().map(|c| c.to_c64()).collect(), norm: self.lattice.norm(&v), exact: v }
            })
            .collect();
        vs.sort_by(|a, b| a.norm.cmp(&b.norm));
        Ok(vs)
    }

    fn h_c(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::zero();
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                acc += xi * self.gram_c[i][j] * yj.conj();
            }
        }
        acc
    }

    /// Visit every tuple with Tr N ≤ T; `f` receives the tuple and q^N.
    /// Work is split over the first vector; partial results are combined
    /// in a fixed order.
    fn fold_tuples<A, F>(&self, pt: &Point, t: &Q, init: impl Fn() -> A + Sync + Send, f: F, merge: impl Fn(&mut A, A)) -> Result<(A, usize)>
    where
        A: Send,
        F: Fn(&mut A, &[&NumVec], Complex64) + Sync + Send,
    {
        let vs = self.vectors(t)?;
        let chunks: Vec<std::ops::Range<usize>> = (0..vs.len()).step_by(64).map(|s| s..(s + 64).min(vs.len())).collect();
        let tau = &pt.tau;
        let g = self.g;
        let parts = par::map(&chunks, |range| {
            let mut acc = init();
            let mut count = 0usize;
            let mut stack: Vec<&NumVec> = Vec::with_capacity(g);
            for first in range.clone() {
                stack.clear();
                stack.push(&vs[first]);
                let budget = t - &vs[first].norm;
                if budget < Q::zero() {
                    continue;
                }
                self.rec(&vs, &mut stack, &budget, tau, &mut acc, &f, &mut count);
            }
            (acc, count)
        });
        let mut total = init();
        let mut count = 0;
        for (a, c) in parts {
            merge(&mut total, a);
            count += c;
        }
        Ok((total, count))
    }

    #[allow(clippy::too_many_arguments)]
    fn rec<'a, A, F>(&self, vs: &'a [NumVec], stack: &mut Vec<&'a NumVec>, budget: &Q, tau: &CMat, acc: &mut A, f: &F, count: &mut usize)
    where
        F: Fn(&mut A, &[&NumVec], Complex64),
    {
        if stack.len() == self.g {
            let mut tr = Complex64::zero();
            for i in 0..self.g {
                for j in 0..self.g {
                    tr += tau[i][j] * self.h_c(&stack[j].x, &stack[i].x);
                }
            }
            let q = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tr).exp();
            f(acc, stack, q);
            *count += 1;
            return;
        }
        for v in vs {
            if &v.norm > budget {
                break;
            }
            stack.push(v);
            self.rec(vs, stack, &(budget - &v.norm), tau, acc, f, count);
            stack.pop();
        }
    }

    /// Column j of λ̲·Y^{1/2} is Σ_i λ_i (Y^{1/2})_{ji}.
    fn twisted(&self, pt: &Point, tuple: &[&NumVec]) -> Vec<Vec<Complex64>> {
        let g = self.g;
        let n = self.lattice.rank();
        (0..g)
            .map(|j| (0..n).map(|a| (0..g).map(|i| tuple[i].x[a] * pt.y_sqrt[j][i]).sum()).collect())
            .collect()
    }

    pub fn component_values(&self, pt: &Point, tuple: &[&NumVec]) -> Vec<Complex64> {
        let plain: Vec<Vec<Complex64>> = tuple.iter().map(|v| v.x.clone()).collect();
        let tw = match self.mode {
            EvalMode::Completed => Some(self.twisted(pt, tuple)),
            EvalMode::Holomorphic => None,
        };
        self.components
            .iter()
            .zip(&self.terms)
            .map(|(p, terms)| {
                if p.g == 0 {
                    return p.coeffs[0].to_c64();
                }
                match &tw {
                    None => self.fam.evaluate_c(p, &plain).expect("shape checked"),
                    Some(u) => {
                        let v = self.fam.evaluate_exp_c(terms, -1.0 / FOUR_PI, u).expect("shape checked");
                        v / pt.det_y
                    }
                }
            })
            .collect()
    }

    pub fn evaluate(&self, pt: &Point, t: &Q) -> Result<SeriesValue> {
        if pt.tau.len() != self.g {
            return Err(Error::Validation(format!("τ must be {0}×{0}", self.g)));
        }
        let dim = self.dim();
        let nc = self.components.len();
        let (acc, count) = self.fold_tuples(
            pt,
            t,
            || vec![vec![Complex64::zero(); nc]; dim],
            |acc, tuple, q| {
                let idx = self.tuple_index(&tuple.iter().map(|v| v.coset).collect::<Vec<_>>());
                for (slot, v) in acc[idx].iter_mut().zip(self.component_values(pt, tuple)) {
                    *slot += v * q;
                }
            },
            |total, part| {
                for (a, b) in total.iter_mut().zip(part) {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                }
            },
        )?;
        Ok(SeriesValue { values: acc, tail: self.tail_bound(pt, t), tuples: count })
    }

    /// Upper bound for #{λ̲ ∈ (L^∨)^g : Tr N ≤ s}: the smaller of the box
    /// count (2√(s/μ)+1)^{2ng} and vol B(√s + √g·ρ)/covol^g (the cells x + P
    /// around the points are disjoint and fit inside the larger ball).
    pub fn point_count(&self, s: f64) -> f64 {
        let g = self.g as i32;
        let m = 2 * self.lattice.rank() * self.g;
        let boxed = (2.0 * (s / self.mu_dual).sqrt() + 1.0).powi(m as i32);
        let r = s.sqrt() + (self.g as f64).sqrt() * self.rho_dual;
        let half = m / 2;
        let unit_ball = std::f64::consts::PI.powi(half as i32) / (1..=half).map(|i| i as f64).product::<f64>();
        let ball = unit_ball * r.powi(m as i32) / self.covol_dual.powi(g);
        boxed.min(ball)
    }

    /// Bound on |Σ_{Tr N > T} value·q^N| per component, from the point count,
    /// Hadamard's inequality for the minors and |q^N| ≤ e^{−2π y_min Tr N}.
    pub fn tail_bound(&self, pt: &Point, t: &Q) -> f64 {
        let g = self.g;
        let tf = q_to_f64(t);
        let t_abs = 1.0 / FOUR_PI;
        let poly_bound = |s: f64| -> f64 {
            let mut worst = 0.0f64;
            for (p, terms) in self.components.iter().zip(&self.terms) {
                if p.g == 0 {
                    worst = worst.max(p.coeffs[0].to_c64().norm());
                    continue;
                }
                let b = match self.mode {
                    EvalMode::Holomorphic => l1(p) * (s / self.mu_h).max(1.0).powi(g as i32),
                    EvalMode::Completed => {
                        let x = (pt.y_max * s / self.mu_h).max(1.0);
                        let sum: f64 = terms
                            .iter()
                            .map(|tm| t_abs.powi(tm.r as i32) * binom(g, g - tm.r) as f64 * l1(&tm.poly) * x.powi((g - tm.r) as i32))
                            .sum();
                        sum / pt.det_y
                    }
                };
                worst = worst.max(b);
            }
            worst
        };
        let mut total = 0.0f64;
        let mut s = tf.floor() + 1.0;
        let mut prev = f64::INFINITY;
        for _ in 0..200_000 {
            let count = self.point_count(s);
            let decay = (-2.0 * std::f64::consts::PI * pt.y_min * (s - 1.0).max(tf)).exp();
            let term = count * poly_bound(s) * decay;
            total += term;
            if term < 1e-40 && term < prev {
                break;
            }
            prev = term;
            s += 1.0;
        }
        total
    }
}

/// Smallest integer T ≤ cap with tail bound ≤ target (or cap).
pub fn auto_truncation(ev: &Evaluator, pt: &Point, target: f64, cap: i64) -> Q {
    for t in 1..=cap {
        let tq = Q::from_integer(t.into());
        if ev.tail_bound(pt, &tq) <= target {
            return tq;
        }
    }
    Q::from_integer(cap.into())
}

// ---------------------------------------------------------------- φ

fn cdet(m: &[Vec<Complex64>]) -> Complex64 {
    let g = m.len();
    if g == 0 {
        return Complex64::one();
    }
    DMatrix::from_fn(g, g, |i, j| m[i][j]).determinant()
}

fn sub_c(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    rows.iter().map(|&i| cols.iter().map(|&j| m[i][j]).collect()).collect()
}

/// Determinant of a matrix of commuting (even) classes.
fn class_det(ring: &CohRing, m: &[Vec<CohClass<Complex64>>]) -> CohClass<Complex64> {
    use itertools::Itertools;
    let g = m.len();
    let mut acc = CohClass::zero(ring.n);
    let one = ring.one().to_c64();
    for p in (0..g).permutations(g) {
        let inv = (0..g).flat_map(|i| (i + 1..g).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
        let mut t = one.clone();
        for (i, &j) in p.iter().enumerate() {
            t = t.wedge(&m[i][j]).expect("same ring");
        }
        acc = if inv % 2 == 1 { acc.sub(&t) } else { acc.add(&t) };
    }
    acc
}

pub fn f_sesq_c(ring: &CohRing, x: &[Complex64], y: &[Complex64]) -> CohClass<Complex64> {
    let kappa = ring.kappa().to_c64();
    let mut r = CohClass::zero(ring.n);
    for l in 0..ring.n {
        for j in 0..ring.n {
            r.add_term((1 << l, 1 << j), kappa * x[l] * y[j].conj() * (ring.a[l] * ring.a[j]) as f64);
        }
    }
    r
}

/// Non-holomorphic part of the completed cycle series at one tuple:
/// Σ_{r≥1} (−1)^r/((4π)^r (g−r)!) Σ_{|K|=|K'|=g−r} (−1)^{ΣK+ΣK'}
///   det((Y^{−1})_{K'^c,K^c}) det(F_{K',K}) ∧ D^r,  F_ij = f(λ_i, λ_j).
pub fn phi_class(ring: &CohRing, pt: &Point, tuple: &[Vec<Complex64>]) -> Result<CohClass<Complex64>> {
    let g = tuple.len();
    let yinv = from_dm(&to_dm(&pt.y).try_inverse().ok_or_else(|| Error::Degenerate("Y is singular".into()))?);
    let f: Vec<Vec<CohClass<Complex64>>> = (0..g).map(|i| (0..g).map(|j| f_sesq_c(ring, &tuple[i], &tuple[j])).collect()).collect();
    let mut out = CohClass::zero(ring.n);
    for r in 1..=g {
        let m = g - r;
        let c = (-1.0f64).powi(r as i32) / (FOUR_PI.powi(r as i32) * factorial(m).to_f64().expect("small"));
        let dr = ring.d_power(r).to_c64();
        let mut inner = CohClass::zero(ring.n);
        for kmask in subsets(g, m) {
            for kpmask in subsets(g, m) {
                let k = members(kmask);
                let kp = members(kpmask);
                let kc: Vec<usize> = (0..g).filter(|i| !k.contains(i)).collect();
                let kpc: Vec<usize> = (0..g).filter(|i| !kp.contains(i)).collect();
                let sign = if (k.iter().sum::<usize>() + kp.iter().sum::<usize>()) % 2 == 0 { 1.0 } else { -1.0 };
                let y = cdet(&sub_c(&yinv, &kpc, &kc)) * sign;
                let fm: Vec<Vec<CohClass<Complex64>>> = kp.iter().map(|&i| k.iter().map(|&j| f[i][j].clone()).collect()).collect();
                inner = inner.add(&class_det(ring, &fm).scale(&y));
            }
        }
        out = out.add(&inner.wedge(&dr)?.scale(&Complex64::new(c, 0.0)));
    }
    Ok(out)
}

/// Same as `phi_class` written with det(Y)^{-1} Tr(Λ^{g−r}(Y) Λ^{g−r}(F)).
pub fn phi_class_direct(ring: &CohRing, pt: &Point, tuple: &[Vec<Complex64>]) -> Result<CohClass<Complex64>> {
    let g = tuple.len();
    let f: Vec<Vec<CohClass<Complex64>>> = (0..g).map(|i| (0..g).map(|j| f_sesq_c(ring, &tuple[i], &tuple[j])).collect()).collect();
    let mut out = CohClass::zero(ring.n);
    for r in 1..=g {
        let m = g - r;
        let c = (-1.0f64).powi(r as i32) / (FOUR_PI.powi(r as i32) * factorial(m).to_f64().expect("small") * pt.det_y);
        let mut inner = CohClass::zero(ring.n);
        for kmask in subsets(g, m) {
            for kpmask in subsets(g, m) {
                let k = members(kmask);
                let kp = members(kpmask);
                let y = cdet(&sub_c(&pt.y, &k, &kp));
                let fm: Vec<Vec<CohClass<Complex64>>> = kp.iter().map(|&i| k.iter().map(|&j| f[i][j].clone()).collect()).collect();
                inner = inner.add(&class_det(ring, &fm).scale(&y));
            }
        }
        out = out.add(&inner.wedge(&ring.d_power(r).to_c64())?.scale(&Complex64::new(c, 0.0)));
    }
    Ok(out)
}

/// Σ φ(λ̲) q^N over the tuples in coset tuple ν̲ with Gram N (N exact).
pub fn eval_phi_completion(ring: &CohRing, lattice: &HermLattice, pt: &Point, nu: &[usize], n: &Mat<FieldElem>) -> Result<CohClass<Complex64>> {
    let g = nu.len();
    let dg = disc_group(lattice)?;
    let target = crate::hlattice::GramTarget::new(n.clone())?;
    let tuples = crate::hlattice::enumerate_tuples(lattice, &dg, &target, Some(nu))?;
    let mut out = CohClass::zero(ring.n);
    let mut tr = Complex64::zero();
    for i in 0..g {
        for j in 0..g {
            tr += pt.tau[i][j] * n[j][i].to_c64();
        }
    }
    let q = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tr).exp();
    for t in tuples {
        let tc: Vec<Vec<Complex64>> = t.iter().map(|v| v.iter().map(|x| x.to_c64()).collect()).collect();
        out = out.add(&phi_class(ring, pt, &tc)?.scale(&q));
    }
    Ok(out)
}

/// Completed cycle series split into holomorphic and φ parts, summed per
/// coset tuple and monomial (in `ring.monomials(g, g)` order).
pub struct Split {
    pub completed: SeriesValue,
    pub holomorphic: Vec<Vec<Complex64>>,
    pub phi: Vec<Vec<Complex64>>,
}

pub fn completion_split(spec: &SeriesSpec, pt: &Point, t: &Q) -> Result<Split> {
    let cyc = spec.cycles()?;
    let g = spec.g;
    let ug = cyc.cycle_fn(g);
    let monos = cyc.ring.monomials(g, g);
    let comps: Vec<FPoly> = monos.iter().map(|m| ug.terms[m].clone()).collect();
    let ev = Evaluator::new(spec.lattice.clone(), g, comps, EvalMode::Completed)?;
    let completed = ev.evaluate(pt, t)?;
    let dim = ev.dim();
    let nm = monos.len();
    let ring = &cyc.ring;
    let (parts, _) = ev.fold_tuples(
        pt,
        t,
        || (vec![vec![Complex64::zero(); nm]; dim], vec![vec![Complex64::zero(); nm]; dim]),
        |acc, tuple, q| {
            let idx = ev.tuple_index(&tuple.iter().map(|v| v.coset).collect::<Vec<_>>());
            let xs: Vec<Vec<Complex64>> = tuple.iter().map(|v| v.x.clone()).collect();
            // u_g(λ̲) holds the coefficients of Z(λ̲)
            let phi = phi_class(ring, pt, &xs).expect("Y invertible");
            for (c, m) in monos.iter().enumerate() {
                acc.0[idx][c] += ev.fam.evaluate_c(&ev.components[c], &xs).expect("shape checked") * q;
                if let Some(x) = phi.get(*m) {
                    acc.1[idx][c] += x * q;
                }
            }
        },
        |total, part| {
            for (a, b) in total.0.iter_mut().zip(part.0) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            for (a, b) in total.1.iter_mut().zip(part.1) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
        },
    )?;
    Ok(Split { completed, holomorphic: parts.0, phi: parts.1 })
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Debug)]
pub struct ModularityReport {
    pub generator: String,
    pub tau: CMat,
    pub weight: usize,
    pub truncation: Q,
    pub residual: f64,
    pub tail_bound: f64,
    pub tolerance: f64,
    pub gamma_branch: u32,
    pub mode: EvalMode,
    pub pass: bool,
}

impl ModularityReport {
    pub fn to_json(&self) -> Value {
        let tau: Vec<Vec<Value>> = self.tau.iter().map(|r| r.iter().map(|z| json!({"re": z.re, "im": z.im})).collect()).collect();
        json!({
            "generator": self.generator,
            "tau": tau,
            "weight": self.weight,
            "T": crate::qfield::q_json(&self.truncation),
            "residual": self.residual,
            "tail_bound": self.tail_bound,
            "tolerance": self.tolerance,
            "gamma_branch": self.gamma_branch,
            "mode": match self.mode { EvalMode::Holomorphic => "holomorphic", EvalMode::Completed => "completed" },
            "pass": self.pass,
        })
    }
}

pub fn generator_name(gen: &GroupGen) -> String {
    let m = |x: &Mat<FieldElem>| x.iter().map(|r| r.iter().map(|e| format!("{e}")).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join(";");
    match gen {
        GroupGen::M(a) => format!("m([{}])", m(a)),
        GroupGen::N(b) => format!("n([{}])", m(b)),
        GroupGen::W => "w".into(),
    }
}

/// Components and evaluation mode of the series whose modularity is tested.
pub fn test_components(spec: &SeriesSpec, holomorphic_only: bool) -> Result<(Vec<FPoly>, EvalMode)> {
    let mode = |m: EvalMode| if holomorphic_only { EvalMode::Holomorphic } else { m };
    Ok(match &spec.kind {
        SeriesKind::Weighted(p) => (vec![p.clone()], EvalMode::Holomorphic),
        SeriesKind::Completed(p) => (vec![p.clone()], mode(EvalMode::Completed)),
        SeriesKind::Cycles => {
            let c = spec.cycles()?;
            let u = c.cycle_fn(spec.g);
            (c.ring.monomials(spec.g, spec.g).iter().map(|m| u.terms[m].clone()).collect(), mode(EvalMode::Completed))
        }
        SeriesKind::Corrected => (spec.cycles()?.corrected_pairing_polys(spec.g)?, EvalMode::Holomorphic),
    })
}

/// Compares f(T·τ) with det(Cτ+D)^k ρ(T) f(τ) componentwise.
pub fn check_functional_equation(spec: &SeriesSpec, gen: &GroupGen, pt: &Point, t: &Q, tol: f64, holomorphic_only: bool) -> Result<ModularityReport> {
    let (comps, mode) = test_components(spec, holomorphic_only)?;
    let k = spec.weight();
    let rep = WeilRep::new(spec.lattice.clone(), spec.g)?;
    let ev = Evaluator::new(spec.lattice.clone(), spec.g, comps, mode)?;
    let (pt2, factor) = pt.act(gen)?;
    let f1 = ev.evaluate(pt, t)?;
    let f2 = ev.evaluate(&pt2, t)?;
    let rho = rep.rho(gen)?;
    let fk = factor.powi(k as i32);
    let nc = ev.components.len();
    let mut residual = 0.0f64;
    for c in 0..nc {
        let col: Vec<Complex64> = f1.values.iter().map(|v| v[c]).collect();
        let rhs = cmatvec(&rho, &col);
        for (i, r) in rhs.iter().enumerate() {
            residual = residual.max((f2.values[i][c] - fk * r).norm());
        }
    }
    let tail = f2.tail + fk.norm() * (rep.dim() as f64).sqrt() * f1.tail;
    let gamma_branch = rep.gamma()?.1;
    Ok(ModularityReport {
        generator: generator_name(gen),
        tau: pt.tau.clone(),
        weight: k,
        truncation: t.clone(),
        residual,
        tail_bound: tail,
        tolerance: tol,
        gamma_branch,
        mode,
        pass: residual <= tol + tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{make_field, qi};

    fn lattice(d: i64, a: &[i64]) -> HermLattice {
        HermLattice::diagonal(make_field(d).unwrap(), a).unwrap()
    }

    fn h_poly(l: &HermLattice) -> FPoly {
        FFamily::new(l.k, l.gram.clone()).unwrap().h_poly()
    }

    #[test]
    fn point_count_bounds_enumeration() {
        for (d, a, g) in [(1, vec![1, 1], 1), (1, vec![1, 1], 2), (3, vec![1, 2], 1), (2, vec![1], 2), (7, vec![1, 1, 1], 1)] {
            let l = lattice(d, &a);
            let ev = Evaluator::new(l.clone(), g, vec![FFamily::new(l.k, l.gram.clone()).unwrap().constant(KElem::one(l.k.d))], EvalMode::Holomorphic).unwrap();
            for s in 1..=4 {
                let (_, count) = ev.fold_tuples(&Point::scalar(g, 1.0), &qi(s), || (), |_, _, _| {}, |_, _| {}).unwrap();
                assert!(count as f64 <= ev.point_count(s as f64), "d={d} {a:?} g={g} s={s}: {count} > {}", ev.point_count(s as f64));
            }
        }
    }

    #[test]
    fn weighted_counts() {
        let l = lattice(1, &[1]);
        let fam = FFamily::new(l.k, l.gram.clone()).unwrap();
        let one = fam.constant(KElem::one(1));
        let spec = SeriesSpec::new(SeriesKind::Weighted(one), l.clone(), 1).unwrap();
        assert_eq!(spec.weight(), 1);
        let qe = qexp(&spec, &qi(3)).unwrap();
        let n1 = vec![vec![l.k.one()]];
        assert_eq!(qe.get(&[0], &n1), Some(&CoeffValue::Scalar(KElem::one(1).scale(&qi(4)))));
        let dg = disc_group(&l).unwrap();
        assert!(qe.phase_compatible(&dg, &vec![vec![l.k.one()]]));
        // ordered by trace, then coset
        let traces: Vec<Q> = qe.coefficients.iter().map(|c| c.n[0][0].a.clone()).collect();
        assert!(traces.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn cycle_and_corrected_coefficients() {
        let l = lattice(1, &[1, 1]);
        let t = qi(2);
        let cyc = SeriesSpec::new(SeriesKind::Cycles, l.clone(), 1).unwrap();
        let cor = SeriesSpec::new(SeriesKind::Corrected, l.clone(), 1).unwrap();
        let wh = SeriesSpec::new(SeriesKind::Weighted(h_poly(&l)), l.clone(), 1).unwrap();
        let (a, b, c) = (qexp(&cyc, &t).unwrap(), qexp(&cor, &t).unwrap(), qexp(&wh, &t).unwrap());
        let ring = cyc.cycles().unwrap().ring;
        let zero = vec![vec![l.k.zero()]];
        assert!(a.get(&[0], &zero).is_none());
        let half = KElem::from_q(1, Q::new(1.into(), 2.into()));
        let mut seen = 0;
        for coeff in &a.coefficients {
            let CoeffValue::Class(z) = &coeff.value else { panic!() };
            let Some(CoeffValue::Scalar(hs)) = c.get(&coeff.nu, &coeff.n) else { panic!() };
            let expect = z.sub(&ring.class_d().scale(&(hs * &half)));
            match b.get(&coeff.nu, &coeff.n) {
                Some(CoeffValue::Class(x)) => assert_eq!(x, &expect),
                None => assert!(expect.is_zero()),
                _ => panic!(),
            }
            seen += 1;
        }
        assert!(seen > 10);
        let dg = disc_group(&l).unwrap();
        let b1 = vec![vec![l.k.from_int(3)]];
        assert!(a.phase_compatible(&dg, &b1));
    }

    #[test]
    fn coefficient_symmetry() {
        let l = lattice(3, &[1, 2]);
        let spec = SeriesSpec::new(SeriesKind::Cycles, l.clone(), 1).unwrap();
        let qe = qexp(&spec, &qi(2)).unwrap();
        let dg = disc_group(&l).unwrap();
        for c in &qe.coefficients {
            let neg: Vec<usize> = c.nu.iter().map(|&x| dg.neg(x)).collect();
            assert_eq!(qe.get(&neg, &c.n), Some(&c.value));
        }
    }

    #[test]
    fn large_y_limit() {
        let l = lattice(1, &[1, 1]);
        let fam = FFamily::new(l.k, l.gram.clone()).unwrap();
        let ev = Evaluator::new(l, 1, vec![fam.constant(KElem::one(1))], EvalMode::Completed).unwrap();
        let pt = Point::scalar(1, 12.0);
        let v = ev.evaluate(&pt, &qi(2)).unwrap();
        assert!((v.values[0][0] - 1.0).norm() < 1e-6);
        assert!(v.values[1..].iter().all(|x| x[0].norm() < 1e-6));
    }

    #[test]
    fn tail_bound_is_sound() {
        let l = lattice(1, &[1]);
        let p = h_poly(&l);
        let ev = Evaluator::new(l, 1, vec![p], EvalMode::Completed).unwrap();
        let pt = Point::new(vec![vec![Complex64::new(0.3, 0.8)]]).unwrap();
        let a = ev.evaluate(&pt, &qi(4)).unwrap();
        let b = ev.evaluate(&pt, &qi(8)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x[0] - y[0]).norm() <= a.tail);
        }
        assert!(a.tail > b.tail);
    }

    #[test]
    fn phi_forms_agree() {
        let ring = CohRing::new(make_field(1).unwrap(), vec![1, 2, 1]).unwrap();
        let tau = vec![
            vec![Complex64::new(0.1, 1.3), Complex64::new(0.2, 0.3)],
            vec![Complex64::new(0.4, 0.3), Complex64::new(-0.2, 0.9)],
        ];
        let pt = Point::new(tau).unwrap();
        let tuple = vec![
            vec![Complex64::new(1.0, 0.5), Complex64::new(0.0, -1.0), Complex64::new(0.5, 0.5)],
            vec![Complex64::new(-0.5, 0.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.5)],
        ];
        let a = phi_class(&ring, &pt, &tuple).unwrap();
        let b = phi_class_direct(&ring, &pt, &tuple).unwrap();
        for (m, x) in &a.terms {
            assert!((x - b.get(*m).copied().unwrap_or_default()).norm() < 1e-12);
        }
        // genus one: −D/(4πy)
        let pt1 = Point::scalar(1, 2.0);
        let p1 = phi_class(&ring, &pt1, &tuple[..1]).unwrap();
        let d = ring.class_d().to_c64().scale(&Complex64::new(-1.0 / (FOUR_PI * 2.0), 0.0));
        for (m, x) in &d.terms {
            assert!((x - p1.get(*m).copied().unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn completed_tuple_identity() {
        // exp(−Δ/4π)u_g(λ̲Y^{1/2})/det Y = Z(λ̲) + φ(λ̲) at each tuple
        let l = lattice(1, &[1, 1]);
        let spec = SeriesSpec::new(SeriesKind::Cycles, l.clone(), 2).unwrap();
        let cyc = spec.cycles().unwrap();
        let (comps, mode) = test_components(&spec, false).unwrap();
        let ev = Evaluator::new(l.clone(), 2, comps, mode).unwrap();
        let tau = vec![
            vec![Complex64::new(0.1, 1.3), Complex64::new(0.2, 0.3)],
            vec![Complex64::new(0.4, 0.3), Complex64::new(-0.2, 0.9)],
        ];
        let pt = Point::new(tau).unwrap();
        let k = l.k;
        let exact = vec![vec![k.elem_i(1, 1), k.elem_i(0, -1)], vec![k.elem_i(2, 0), k.elem_i(1, -1)]];
        let nv: Vec<NumVec> = exact
            .iter()
            .map(|v| NumVec { coset: 0, x: v.iter().map(|c| c.to_c64()).collect(), norm: l.norm(v), exact: v.clone() })
            .collect();
        let refs: Vec<&NumVec> = nv.iter().collect();
        let vals = ev.component_values(&pt, &refs);
        let z = cyc.cycle_class(&exact).unwrap().to_c64();
        let xs: Vec<Vec<Complex64>> = nv.iter().map(|v| v.x.clone()).collect();
        let phi = phi_class(&cyc.ring, &pt, &xs).unwrap();
        for (c, m) in cyc.ring.monomials(2, 2).iter().enumerate() {
            let expect = z.get(*m).copied().unwrap_or_default() + phi.get(*m).copied().unwrap_or_default();
            assert!((vals[c] - expect).norm() < 1e-10, "{} vs {}", vals[c], expect);
        }
    }

    #[test]
    fn n_generator_is_exact() {
        let l = lattice(1, &[1, 1]);
        let spec = SeriesSpec::new(SeriesKind::Completed(h_poly(&l)), l.clone(), 1).unwrap();
        let pt = Point::new(vec![vec![Complex64::new(0.2, 0.9)]]).unwrap();
        let b = GroupGen::N(vec![vec![l.k.from_int(1)]]);
        let r = check_functional_equation(&spec, &b, &pt, &qi(6), 1e-8, false).unwrap();
        assert!(r.residual < 1e-10, "{}", r.residual);
    }

    #[test]
    fn w_generator_small() {
        let l = lattice(1, &[1]);
        let p = h_poly(&l);
        let spec = SeriesSpec::new(SeriesKind::Completed(p), l, 1).unwrap();
        let pt = Point::new(vec![vec![Complex64::new(0.1, 1.1)]]).unwrap();
        let r = check_functional_equation(&spec, &GroupGen::W, &pt, &qi(10), 1e-8, false).unwrap();
        assert!(r.pass, "{:?}", r);
        let h = check_functional_equation(&spec, &GroupGen::W, &pt, &qi(10), 1e-8, true).unwrap();
        assert!(!h.pass && h.residual > 1e-2);
        // m(−1)
        let k = spec.lattice.k;
        let m = GroupGen::M(vec![vec![k.from_int(-1)]]);
        assert!(check_functional_equation(&spec, &m, &pt, &qi(10), 1e-8, false).unwrap().pass);
    }
}
