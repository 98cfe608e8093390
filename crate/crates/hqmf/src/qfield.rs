//! Imaginary quadratic fields Q(sqrt(-d)) with exact coordinates over the
//! integral basis {1, ω}, and the compositum k(i) used for cohomology
//! coefficients.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator beyond f64 range: scale down both
        let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
        let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (x.denom() >> shift).to_f64().unwrap_or(1.0);
        n / d
    })
}

fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn int_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("integer expected, got {n}"))),
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("integer expected, got {s:?}"))),
        other => Err(Error::Parse(format!("integer expected, got {other}"))),
    }
}

pub fn q_json(x: &Q) -> Value {
    json!([int_json(x.numer()), int_json(x.denom())])
}

/// Accepts `[num, den]`, a bare integer, or a string "p" / "p/q".
pub fn q_from_json(v: &Value) -> Result<Q> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let n = int_from_json(&a[0])?;
            let d = int_from_json(&a[1])?;
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Q::new(n, d))
        }
        Value::Number(_) => Ok(Q::from_integer(int_from_json(v)?)),
        Value::String(s) => parse_q(s),
        other => Err(Error::Parse(format!("rational expected, got {other}"))),
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("rational expected, got {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OmegaKind {
    /// ω = sqrt(-d), used when d ≡ 1, 2 (mod 4)
    Sqrt,
    /// ω = (1 + sqrt(-d))/2, used when d ≡ 3 (mod 4)
    Half,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadField {
    pub d: u64,
    pub disc: u64,
    pub omega_kind: OmegaKind,
}

pub fn is_squarefree(n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

pub fn make_field(d: i64) -> Result<QuadField> {
    if d <= 0 {
        return Err(Error::Validation(format!("d must be positive, got {d}")));
    }
    let d = d as u64;
    if !is_squarefree(d) {
        return Err(Error::Validation(format!("d = {d} is not squarefree")));
    }
    Ok(if d % 4 == 3 {
        QuadField { d, disc: d, omega_kind: OmegaKind::Half }
    } else {
        QuadField { d, disc: 4 * d, omega_kind: OmegaKind::Sqrt }
    })
}

/// Fields of class number one; boundary elimination is limited to these.
pub const CLASS_NUMBER_ONE: [u64; 9] = [1, 2, 3, 7, 11, 19, 43, 67, 163];

impl QuadField {
    /// ω + conj(ω)
    pub fn trace_omega(&self) -> Q {
        match self.omega_kind {
            OmegaKind::Sqrt => Q::zero(),
            OmegaKind::Half => Q::one(),
        }
    }

    /// ω·conj(ω)
    pub fn norm_omega(&self) -> Q {
        match self.omega_kind {
            OmegaKind::Sqrt => qi(self.d as i64),
            OmegaKind::Half => q(1 + self.d as i64, 4),
        }
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { k: *self, a: Q::zero(), b: Q::zero() }
    }

    pub fn one(&self) -> FieldElem {
        self.from_q(Q::one())
    }

    pub fn omega(&self) -> FieldElem {
        FieldElem { k: *self, a: Q::zero(), b: Q::one() }
    }

    pub fn from_q(&self, a: Q) -> FieldElem {
        FieldElem { k: *self, a, b: Q::zero() }
    }

    pub fn from_int(&self, a: i64) -> FieldElem {
        self.from_q(qi(a))
    }

    pub fn elem(&self, a: Q, b: Q) -> FieldElem {
        FieldElem { k: *self, a, b }
    }

    pub fn elem_i(&self, a: i64, b: i64) -> FieldElem {
        self.elem(qi(a), qi(b))
    }

    /// δ_k = sqrt(-d_k), the generator of the different.
    pub fn delta(&self) -> FieldElem {
        match self.omega_kind {
            OmegaKind::Sqrt => self.elem_i(0, 2),
            OmegaKind::Half => self.elem_i(-1, 2),
        }
    }

    /// sqrt(-d) as an element
    pub fn sqrt_minus_d(&self) -> FieldElem {
        match self.omega_kind {
            OmegaKind::Sqrt => self.omega(),
            OmegaKind::Half => self.elem_i(-1, 2),
        }
    }

    /// Units of O_k in a fixed order, together with their phase r (u = e(r)).
    pub fn units(&self) -> Vec<(FieldElem, Q)> {
        let mut out = vec![(self.one(), Q::zero()), (self.from_int(-1), q(1, 2))];
        if self.d == 1 {
            out.push((self.omega(), q(1, 4)));
            out.push((-self.omega(), q(3, 4)));
        } else if self.d == 3 {
            // ω = e(1/6)
            let w = self.omega();
            let w2 = &w * &w;
            out.push((w.clone(), q(1, 6)));
            out.push((w2.clone(), q(1, 3)));
            out.push((-&w, q(2, 3)));
            out.push((-&w2, q(5, 6)));
        }
        out
    }

    pub fn unit_phase(&self, u: &FieldElem) -> Option<Q> {
        self.units().into_iter().find(|(v, _)| v == u).map(|(_, r)| r)
    }

    pub fn to_json(&self) -> Value {
        json!({"d": self.d, "disc": self.disc})
    }
}

/// An element a + b·ω of an imaginary quadratic field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub k: QuadField,
    pub a: Q,
    pub b: Q,
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}w", self.b)
        } else {
            write!(f, "{}+{}w", self.a, self.b)
        }
    }
}

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> FieldElem {
        FieldElem {
            k: self.k,
            a: &self.a + &self.b * self.k.trace_omega(),
            b: -&self.b,
        }
    }

    pub fn norm(&self) -> Q {
        &self.a * &self.a
            + &self.a * &self.b * self.k.trace_omega()
            + &self.b * &self.b * self.k.norm_omega()
    }

    pub fn trace(&self) -> Q {
        &self.a * qi(2) + &self.b * self.k.trace_omega()
    }

    /// Real part as an exact rational.
    pub fn re(&self) -> Q {
        self.trace() / qi(2)
    }

    /// The rational y with x = re(x) + y·δ_k (since x - conj(x) = b·δ_k).
    pub fn delta_part(&self) -> Q {
        &self.b / qi(2)
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    pub fn inv(&self) -> Option<FieldElem> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(FieldElem { k: self.k, a: &c.a / &n, b: &c.b / &n })
    }

    pub fn scale(&self, r: &Q) -> FieldElem {
        FieldElem { k: self.k, a: &self.a * r, b: &self.b * r }
    }

    pub fn pow(&self, e: u32) -> FieldElem {
        let mut acc = self.k.one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        let s = (self.k.d as f64).sqrt();
        let a = q_to_f64(&self.a);
        let b = q_to_f64(&self.b);
        match self.k.omega_kind {
            OmegaKind::Sqrt => Complex64::new(a, b * s),
            OmegaKind::Half => Complex64::new(a + b / 2.0, b * s / 2.0),
        }
    }

    /// Coordinates in the embedding field k(i).
    pub fn to_ext(&self) -> KElem {
        let d = self.k.d;
        match self.k.omega_kind {
            OmegaKind::Sqrt => KElem::new(d, [self.a.clone(), Q::zero(), Q::zero(), self.b.clone()]),
            OmegaKind::Half => {
                let half = q(1, 2);
                KElem::new(
                    d,
                    [&self.a + &self.b * &half, Q::zero(), Q::zero(), &self.b * &half],
                )
            }
        }
    }

    /// Inverse of `to_ext` on the image of k.
    pub fn from_ext(x: &KElem, k: QuadField) -> Option<FieldElem> {
        let [c0, c1, c2, c3] = &x.c;
        if !c1.is_zero() || !c2.is_zero() {
            return None;
        }
        Some(match k.omega_kind {
            OmegaKind::Sqrt => k.elem(c0.clone(), c3.clone()),
            OmegaKind::Half => k.elem(c0 - c3, c3 * qi(2)),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({"a": q_json(&self.a), "b": q_json(&self.b)})
    }

    pub fn from_json(v: &Value, k: QuadField) -> Result<FieldElem> {
        match v {
            Value::Object(m) => {
                let a = m.get("a").map(q_from_json).transpose()?.unwrap_or_else(Q::zero);
                let b = m.get("b").map(q_from_json).transpose()?.unwrap_or_else(Q::zero);
                Ok(k.elem(a, b))
            }
            _ => Ok(k.from_q(q_from_json(v)?)),
        }
    }
}

/// Exact complex embedding: real part exact, imaginary part a dyadic
/// approximation carrying `bits` fractional bits of sqrt(d).
#[derive(Clone, Debug, PartialEq)]
pub struct Embedded {
    pub re: Q,
    pub im: Q,
    pub bits: u32,
}

impl Embedded {
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
}

/// floor(sqrt(d)·2^bits) / 2^bits
pub fn sqrt_dyadic(d: u64, bits: u32) -> Q {
    let scaled = BigInt::from(d) << (2 * bits as usize);
    let r = scaled.sqrt();
    Q::new(r, BigInt::one() << bits as usize)
}

pub fn embed(x: &FieldElem, precision: u32) -> Result<Embedded> {
    if precision < 53 {
        return Err(Error::Validation(format!("precision must be at least 53 bits, got {precision}")));
    }
    let s = sqrt_dyadic(x.k.d, precision);
    let (re, im) = match x.k.omega_kind {
        OmegaKind::Sqrt => (x.a.clone(), &x.b * &s),
        OmegaKind::Half => (&x.a + &x.b * q(1, 2), &x.b * &s * q(1, 2)),
    };
    Ok(Embedded { re, im, bits: precision })
}

/// The a-priori error bound 2^(1-p)(|a| + |b||ω|), with |ω| replaced by an
/// upper bound.
pub fn embed_error_bound(x: &FieldElem, precision: u32) -> Q {
    let w_bound = Q::from_integer(BigInt::from(x.k.d).sqrt() + 1);
    (x.a.abs() + x.b.abs() * w_bound) * Q::new(BigInt::from(2), BigInt::one() << precision as usize)
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $t:ty, $body:expr) => {
        impl<'a> $tr<&'a $t> for &'a $t {
            type Output = $t;
            fn $m(self, o: &'a $t) -> $t {
                let f: fn(&$t, &$t) -> $t = $body;
                f(self, o)
            }
        }
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a $t> for $t {
            type Output = $t;
            fn $m(self, o: &'a $t) -> $t {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<$t> for &'a $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t {
                self.$m(&o)
            }
        }
    };
}

fn same_field(x: &FieldElem, y: &FieldElem) {
    assert_eq!(x.k, y.k, "field mismatch: d={} vs d={}", x.k.d, y.k.d);
}

forward_binop!(Add, add, FieldElem, |x, y| {
    same_field(x, y);
    FieldElem { k: x.k, a: &x.a + &y.a, b: &x.b + &y.b }
});
forward_binop!(Sub, sub, FieldElem, |x, y| {
    same_field(x, y);
    FieldElem { k: x.k, a: &x.a - &y.a, b: &x.b - &y.b }
});
forward_binop!(Mul, mul, FieldElem, |x, y| {
    same_field(x, y);
    let bb = &x.b * &y.b;
    FieldElem {
        k: x.k,
        a: &x.a * &y.a - &bb * x.k.norm_omega(),
        b: &x.a * &y.b + &x.b * &y.a + &bb * x.k.trace_omega(),
    }
});
forward_binop!(Div, div, FieldElem, |x, y| x * &y.inv().expect("division by zero in k"));

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { k: self.k, a: -self.a, b: -self.b }
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { k: self.k, a: -&self.a, b: -&self.b }
    }
}

/// An element p + q·sqrt(d) of k(i) = Q(i, sqrt(d)), with p = c0 + c1·i and
/// q = c2 + c3·i. For d = 1 the sqrt(d) part is folded into p.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KElem {
    pub d: u64,
    pub c: [Q; 4],
}

impl fmt::Debug for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} + {}i) + ({} + {}i)√{}",
            self.c[0], self.c[1], self.c[2], self.c[3], self.d
        )
    }
}

// Gaussian rationals, the coefficient ring of KElem over sqrt(d)
fn gmul(a: (&Q, &Q), b: (&Q, &Q)) -> (Q, Q) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

impl KElem {
    pub fn new(d: u64, c: [Q; 4]) -> KElem {
        let mut x = KElem { d, c };
        if d == 1 {
            let [c0, c1, c2, c3] = std::mem::replace(&mut x.c, Default::default());
            x.c = [c0 + c2, c1 + c3, Q::zero(), Q::zero()];
        }
        x
    }

    pub fn zero(d: u64) -> KElem {
        KElem { d, c: [Q::zero(), Q::zero(), Q::zero(), Q::zero()] }
    }

    pub fn one(d: u64) -> KElem {
        Self::from_q(d, Q::one())
    }

    pub fn from_q(d: u64, r: Q) -> KElem {
        KElem { d, c: [r, Q::zero(), Q::zero(), Q::zero()] }
    }

    pub fn i(d: u64) -> KElem {
        KElem { d, c: [Q::zero(), Q::one(), Q::zero(), Q::zero()] }
    }

    pub fn sqrt_d(d: u64) -> KElem {
        KElem::new(d, [Q::zero(), Q::zero(), Q::one(), Q::zero()])
    }

    /// i / sqrt(d_k), the normalising factor of the volume form.
    pub fn i_over_sqrt_dk(k: &QuadField) -> KElem {
        // sqrt(d_k) = c·sqrt(d) with c in {1, 2}; i/sqrt(d_k) = i·c·sqrt(d)/d_k
        let c = if k.disc == k.d { 1 } else { 2 };
        let s = KElem::new(k.d, [Q::zero(), Q::zero(), Q::zero(), Q::one()]);
        s.scale(&q(c, k.disc as i64))
    }

    /// 1 / sqrt(d_k) (real)
    pub fn inv_sqrt_dk(k: &QuadField) -> KElem {
        let c = if k.disc == k.d { 1 } else { 2 };
        KElem::new(k.d, [Q::zero(), Q::zero(), Q::one(), Q::zero()]).scale(&q(c, k.disc as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(|x| x.is_zero())
    }

    pub fn as_rational(&self) -> Option<Q> {
        self.is_rational().then(|| self.c[0].clone())
    }

    pub fn is_real(&self) -> bool {
        self.c[1].is_zero() && self.c[3].is_zero()
    }

    /// Complex conjugation (i ↦ -i, sqrt(d) fixed); restricts to the
    /// nontrivial automorphism of k.
    pub fn conj(&self) -> KElem {
        KElem {
            d: self.d,
            c: [self.c[0].clone(), -&self.c[1], self.c[2].clone(), -&self.c[3]],
        }
    }

    pub fn scale(&self, r: &Q) -> KElem {
        KElem { d: self.d, c: [&self.c[0] * r, &self.c[1] * r, &self.c[2] * r, &self.c[3] * r] }
    }

    pub fn inv(&self) -> Option<KElem> {
        if self.is_zero() {
            return None;
        }
        let d = qi(self.d as i64);
        // (p + q s)^{-1} = (p - q s)/(p^2 - d q^2)
        let p = (&self.c[0], &self.c[1]);
        let qq = (&self.c[2], &self.c[3]);
        let p2 = gmul(p, p);
        let q2 = gmul(qq, qq);
        let n = (&p2.0 - &q2.0 * &d, &p2.1 - &q2.1 * &d);
        let nn = &n.0 * &n.0 + &n.1 * &n.1;
        let ninv = (&n.0 / &nn, -&n.1 / &nn);
        let a = gmul(p, (&ninv.0, &ninv.1));
        let b = gmul(qq, (&ninv.0, &ninv.1));
        Some(KElem { d: self.d, c: [a.0, a.1, -b.0, -b.1] })
    }

    pub fn pow(&self, e: u32) -> KElem {
        let mut acc = KElem::one(self.d);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        let s = (self.d as f64).sqrt();
        Complex64::new(
            q_to_f64(&self.c[0]) + s * q_to_f64(&self.c[2]),
            q_to_f64(&self.c[1]) + s * q_to_f64(&self.c[3]),
        )
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.c.iter().map(q_json).collect())
    }

    pub fn from_json(v: &Value, d: u64) -> Result<KElem> {
        match v {
            Value::Array(a) if a.len() == 4 => {
                let c: Vec<Q> = a.iter().map(q_from_json).collect::<Result<_>>()?;
                Ok(KElem::new(d, [c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()]))
            }
            _ => Ok(KElem::from_q(d, q_from_json(v)?)),
        }
    }
}

fn same_ext(x: &KElem, y: &KElem) {
    assert_eq!(x.d, y.d, "extension field mismatch");
}

forward_binop!(Add, add, KElem, |x, y| {
    same_ext(x, y);
    KElem {
        d: x.d,
        c: [&x.c[0] + &y.c[0], &x.c[1] + &y.c[1], &x.c[2] + &y.c[2], &x.c[3] + &y.c[3]],
    }
});
forward_binop!(Sub, sub, KElem, |x, y| {
    same_ext(x, y);
    KElem {
        d: x.d,
        c: [&x.c[0] - &y.c[0], &x.c[1] - &y.c[1], &x.c[2] - &y.c[2], &x.c[3] - &y.c[3]],
    }
});
forward_binop!(Mul, mul, KElem, |x, y| {
    same_ext(x, y);
    let d = qi(x.d as i64);
    let (p1, q1) = ((&x.c[0], &x.c[1]), (&x.c[2], &x.c[3]));
    let (p2, q2) = ((&y.c[0], &y.c[1]), (&y.c[2], &y.c[3]));
    let pp = gmul(p1, p2);
    let qq = gmul(q1, q2);
    let pq = gmul(p1, q2);
    let qp = gmul(q1, p2);
    KElem::new(
        x.d,
        [pp.0 + &qq.0 * &d, pp.1 + &qq.1 * &d, pq.0 + qp.0, pq.1 + qp.1],
    )
});
forward_binop!(Div, div, KElem, |x, y| x * &y.inv().expect("division by zero in k(i)"));

impl Neg for KElem {
    type Output = KElem;
    fn neg(self) -> KElem {
        let [a, b, c, d] = self.c;
        KElem { d: self.d, c: [-a, -b, -c, -d] }
    }
}

impl Neg for &KElem {
    type Output = KElem;
    fn neg(self) -> KElem {
        self.clone().neg()
    }
}

/// Rounds a positive rational r to (floor, ceil) integers.
pub fn floor_q(r: &Q) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Fractional part in [0, 1).
pub fn frac_q(r: &Q) -> Q {
    r - Q::from_integer(floor_q(r))
}
