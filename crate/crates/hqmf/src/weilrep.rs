//! The Weil representation of U(g,g)(Z) on C[(L^∨/L)^g], on the generators
//! m(A), n(B) and w_g. Phases of the monomial generators are kept as exact
//! rationals mod 1.

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hlattice::{disc_group, DiscGroup, HermLattice};
use crate::linalg::{self, Mat};
use crate::par;
use crate::qfield::{frac_q, q_to_f64, FieldElem, Q};

pub type CMat = Vec<Vec<Complex64>>;

/// Which Gram matrix indexes the Fourier expansion (and hence the n(B)
/// phase and the w kernel). `FullGram` is the one the theta functional
/// equation accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FourierConvention {
    #[default]
    FullGram,
    HalfGram,
}

impl FourierConvention {
    fn factor(&self) -> Q {
        match self {
            FourierConvention::FullGram => Q::one(),
            FourierConvention::HalfGram => Q::new(1.into(), 2.into()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FourierConvention::FullGram => "full-gram",
            FourierConvention::HalfGram => "half-gram",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupGen {
    M(Mat<FieldElem>),
    N(Mat<FieldElem>),
    W,
}

/// Column j is sent to row perm[j] with phase e(phase[j]).
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialMatrix {
    pub perm: Vec<usize>,
    pub phase: Vec<Q>,
}

impl MonomialMatrix {
    pub fn identity(n: usize) -> Self {
        MonomialMatrix { perm: (0..n).collect(), phase: vec![Q::zero(); n] }
    }

    /// self · other
    pub fn compose(&self, other: &MonomialMatrix) -> MonomialMatrix {
        let perm = other.perm.iter().map(|&r| self.perm[r]).collect();
        let phase = other.perm.iter().zip(&other.phase).map(|(&r, p)| frac_q(&(p + &self.phase[r]))).collect();
        MonomialMatrix { perm, phase }
    }

    pub fn to_complex(&self) -> CMat {
        let n = self.perm.len();
        let mut m = vec![vec![Complex64::zero(); n]; n];
        for (j, (&r, p)) in self.perm.iter().zip(&self.phase).enumerate() {
            m[r][j] = e(p);
        }
        m
    }
}

pub fn e(x: &Q) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * q_to_f64(&frac_q(x)))
}

pub fn cmatmul(a: &CMat, b: &CMat) -> CMat {
    let n = b.first().map_or(0, |r| r.len());
    par::map(a, |row| {
        (0..n)
            .map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum())
            .collect()
    })
}

pub fn cmatvec(a: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn cidentity(n: usize) -> CMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Complex64::one() } else { Complex64::zero() }).collect()).collect()
}

/// max |(M M^*)_{ij} − δ_ij|
pub fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let s: Complex64 = (0..n).map(|t| m[i][t] * m[j][t].conj()).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct WeilRep {
    pub lattice: HermLattice,
    pub dg: DiscGroup,
    pub g: usize,
    /// complex signature (p, q); p + q is the rank
    pub signature: (usize, usize),
    pub basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    pub convention: FourierConvention,
}

impl WeilRep {
    pub fn new(lattice: HermLattice, g: usize) -> Result<Self> {
        Self::with_convention(lattice, g, FourierConvention::FullGram)
    }

    pub fn with_convention(lattice: HermLattice, g: usize, convention: FourierConvention) -> Result<Self> {
        if g == 0 {
            return Err(Error::Validation("genus must be positive".into()));
        }
        let dg = disc_group(&lattice)?;
        let order = dg.order();
        if order.checked_pow(g as u32).map_or(true, |d| d > 4096) {
            return Err(Error::Validation(format!("dimension {order}^{g} is too large")));
        }
        let mut basis: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..g {
            basis = basis.into_iter().flat_map(|t| (0..order).map(move |c| [t.clone(), vec![c]].concat())).collect();
        }
        let index = basis.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let n = lattice.rank();
        let signature = match lattice.definiteness {
            crate::hlattice::Definiteness::Positive => (n, 0),
            crate::hlattice::Definiteness::Lorentzian => (n - 1, 1),
        };
        Ok(WeilRep { lattice, dg, g, signature, basis, index, convention })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, t: &[usize]) -> usize {
        self.index[t]
    }

    fn check_square(&self, a: &Mat<FieldElem>, what: &str) -> Result<()> {
        if a.len() != self.g || a.iter().any(|r| r.len() != self.g) {
            return Err(Error::Validation(format!("{what} must be {0}×{0}", self.g)));
        }
        if a.iter().flatten().any(|x| !x.is_integral()) {
            return Err(Error::Validation(format!("{what} must have entries in O_k")));
        }
        Ok(())
    }

    /// e_ν ↦ det(A)^{−p−q} e_{νA^{−1}}.
    pub fn rho_m(&self, a: &Mat<FieldElem>) -> Result<MonomialMatrix> {
        self.check_square(a, "A")?;
        let k = self.lattice.k;
        let det = linalg::det(a, &k.zero());
        let ph = k
            .unit_phase(&det)
            .ok_or_else(|| Error::Validation("det(A) is not a unit of O_k".into()))?;
        let ainv = linalg::inverse(a, &k.zero()).expect("unit determinant");
        let (p, q) = self.signature;
        let phase = frac_q(&(-ph * Q::from_integer(((p + q) as i64).into())));
        let perm = self
            .basis
            .iter()
            .map(|nu| {
                let mu: Vec<usize> = (0..self.g)
                    .map(|j| (0..self.g).fold(0, |acc, i| self.dg.add(acc, self.dg.scale(&ainv[i][j], nu[i]))))
                    .collect();
                self.index[&mu]
            })
            .collect();
        Ok(MonomialMatrix { perm, phase: vec![phase; self.dim()] })
    }

    /// Exact phase Tr(h(ν̲) B) mod 1 (times ½ under `HalfGram`).
    pub fn n_phase(&self, nu: &[usize], b: &Mat<FieldElem>) -> Q {
        let k = self.lattice.k;
        let mut acc = k.zero();
        for i in 0..self.g {
            for j in 0..self.g {
                let h = self.lattice.h(&self.dg.vectors[nu[i]], &self.dg.vectors[nu[j]]);
                acc = &acc + &(&h * &b[j][i]);
            }
        }
        frac_q(&(acc.re() * self.convention.factor()))
    }

    pub fn rho_n(&self, b: &Mat<FieldElem>) -> Result<MonomialMatrix> {
        self.check_square(b, "B")?;
        for i in 0..self.g {
            for j in 0..self.g {
                if b[i][j] != b[j][i].conj() {
                    return Err(Error::Validation("B is not Hermitian".into()));
                }
            }
        }
        let phase = self.basis.iter().map(|nu| self.n_phase(nu, b)).collect();
        Ok(MonomialMatrix { perm: (0..self.dim()).collect(), phase })
    }

    /// Genus-1 index Σ_ν e(−c·h(ν,ν)) / √|D| with c = 1 (or ½), and the
    /// exponent j with value e(j/8).
    pub fn weil_index_genus1(&self) -> Result<(Complex64, u32)> {
        let c = self.convention.factor();
        let s: Complex64 = self.dg.vectors.iter().map(|v| e(&-(self.lattice.norm(v) * &c))).sum();
        let g1 = s / (self.dg.order() as f64).sqrt();
        let j = (g1.arg() / (std::f64::consts::PI / 4.0)).round().rem_euclid(8.0) as u32;
        let root = Complex64::from_polar(1.0, j as f64 * std::f64::consts::PI / 4.0);
        if (g1 - root).norm() > 1e-12 {
            return Err(Error::Degenerate(format!("Gauss sum {g1} is not an 8th root of unity")));
        }
        Ok((root, j))
    }

    /// γ = G^g and its branch exponent. Polynomial weights of even real
    /// degree do not change it: the Fourier eigenvalue (−i)^d cancels
    /// against i^{−d} from (τ/i)^d.
    pub fn gamma(&self) -> Result<(Complex64, u32)> {
        let (_, j) = self.weil_index_genus1()?;
        let b = ((j as u64 * self.g as u64) % 8) as u32;
        Ok((Complex64::from_polar(1.0, b as f64 * std::f64::consts::PI / 4.0), b))
    }

    /// e_ν ↦ γ |D|^{−g/2} Σ_μ e(−c Σ_i Tr h(ν_i, μ_i)) e_μ.
    pub fn rho_w(&self) -> Result<CMat> {
        let (gamma, _) = self.gamma()?;
        let scale = gamma / (self.dg.order() as f64).powf(self.g as f64 / 2.0);
        let c = self.convention.factor();
        let ord = self.dg.order();
        let kernel: Vec<Vec<Complex64>> =
            (0..ord).map(|a| (0..ord).map(|b| e(&-(self.dg.pairing(a, b) * &c))).collect()).collect();
        let dim = self.dim();
        let rows: Vec<usize> = (0..dim).collect();
        Ok(par::map(&rows, |&r| {
            let mu = &self.basis[r];
            (0..dim)
                .map(|col| {
                    let nu = &self.basis[col];
                    (0..self.g).fold(scale, |acc, i| acc * kernel[nu[i]][mu[i]])
                })
                .collect()
        }))
    }

    pub fn rho(&self, gen: &GroupGen) -> Result<CMat> {
        match gen {
            GroupGen::M(a) => Ok(self.rho_m(a)?.to_complex()),
            GroupGen::N(b) => Ok(self.rho_n(b)?.to_complex()),
            GroupGen::W => self.rho_w(),
        }
    }

    /// ρ(g_1) ρ(g_2) ⋯
    pub fn rho_word(&self, gens: &[GroupGen]) -> Result<CMat> {
        if gens.is_empty() {
            return Err(Error::Validation("empty word".into()));
        }
        let mut acc = self.rho(&gens[0])?;
        for g in &gens[1..] {
            acc = cmatmul(&acc, &self.rho(g)?);
        }
        Ok(acc)
    }

    pub fn meta(&self) -> Result<Value> {
        Ok(json!({
            "d": self.lattice.k.d,
            "gram": self.lattice.to_json()["gram"],
            "g": self.g,
            "gamma_branch": self.gamma()?.1,
            "convention": self.convention.name(),
            "basis": self.basis,
        }))
    }

    pub fn matrix_json(&self, m: &CMat) -> Result<Value> {
        let rows: Vec<Value> = m
            .iter()
            .map(|r| Value::Array(r.iter().map(|z| json!({"re": z.re, "im": z.im})).collect()))
            .collect();
        Ok(json!({"meta": self.meta()?, "matrix": rows}))
    }
}

pub fn cmat_from_json(v: &Value) -> Result<CMat> {
    let rows = v["matrix"].as_array().ok_or_else(|| Error::Parse("missing matrix".into()))?;
    rows.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                .iter()
                .map(|z| match (z["re"].as_f64(), z["im"].as_f64()) {
                    (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                    _ => Err(Error::Parse("entry needs re and im".into())),
                })
                .collect()
        })
        .collect()
}
