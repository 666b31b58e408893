//! Exact arithmetic over Q, Q(√f), Q(√f)(i) and the wedge spaces used by SAF and J.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational literal `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let digits = num.strip_prefix('-').unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if den.is_empty() || !den.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

/// K = Q(√f); f = 1 stands for Q itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadField {
    f: u64,
}

impl QuadField {
    pub const Q: QuadField = QuadField { f: 1 };

    pub fn new(f: u64) -> Result<Self, Error> {
        if f == 0 || !is_squarefree(f) {
            return Err(Error::Domain(format!("{f} is not a square-free positive integer")));
        }
        Ok(QuadField { f })
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    pub fn is_rational(&self) -> bool {
        self.f == 1
    }

    pub fn sqrt(&self) -> KNum {
        KNum::new(Rat::zero(), Rat::one(), *self)
    }

    /// Common field of two operands; Q embeds in every K.
    pub fn join(self, other: QuadField) -> Result<QuadField, Error> {
        if self.f == other.f || other.f == 1 {
            Ok(self)
        } else if self.f == 1 {
            Ok(other)
        } else {
            Err(Error::FieldMismatch(self.f, other.f))
        }
    }
}

fn is_squarefree(n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

fn join_or_panic(x: QuadField, y: QuadField) -> QuadField {
    match x.join(y) {
        Ok(k) => k,
        Err(e) => panic!("{e}"),
    }
}

/// a + b√f
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KNum {
    pub a: Rat,
    pub b: Rat,
    field: QuadField,
}

impl KNum {
    pub fn new(a: Rat, b: Rat, field: QuadField) -> Self {
        if field.is_rational() {
            // √1 = 1
            return KNum { a: a + b, b: Rat::zero(), field };
        }
        let field = if b.is_zero() { QuadField::Q } else { field };
        KNum { a, b, field }
    }

    pub fn from_rat(a: Rat) -> Self {
        KNum { a, b: Rat::zero(), field: QuadField::Q }
    }

    pub fn int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_rat(rat(n, d))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// Field the value lives in; rational values report Q.
    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> KNum {
        KNum::new(self.a.clone(), -self.b.clone(), self.field)
    }

    pub fn norm(&self) -> Rat {
        &self.a * &self.a - &self.b * &self.b * Rat::from_integer(BigInt::from(self.field.f))
    }

    pub fn sign(&self) -> i8 {
        sign_k(self)
    }

    pub fn abs(&self) -> KNum {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> KNum {
        assert!(!self.is_zero(), "division by zero in K");
        let n = self.norm();
        KNum::new(&self.a / &n, -&self.b / &n, self.field)
    }

    pub fn scale(&self, q: &Rat) -> KNum {
        KNum::new(&self.a * q, &self.b * q, self.field)
    }

    /// √n for a non-negative integer, written as s·√f with f square-free.
    pub fn sqrt_int(n: i64) -> Result<KNum, Error> {
        if n < 0 {
            return Err(Error::Domain(format!("square root of negative {n}")));
        }
        let (mut s, mut f, mut p) = (1i64, n, 2i64);
        while p * p <= f {
            while f % (p * p) == 0 {
                f /= p * p;
                s *= p;
            }
            p += 1;
        }
        if f <= 1 {
            return Ok(KNum::int(s * f));
        }
        Ok(KNum::new(Rat::zero(), rat_int(s), QuadField::new(f as u64)?))
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.field.f as f64).sqrt()
    }

    pub fn min(self, other: KNum) -> KNum {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: KNum) -> KNum {
        if other > self {
            other
        } else {
            self
        }
    }
}

fn sgn(q: &Rat) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// Exact sign of a + b√f without floating point.
pub fn sign_k(x: &KNum) -> i8 {
    let (sa, sb) = (sgn(&x.a), sgn(&x.b));
    if sb == 0 || sa == sb {
        return if sa == 0 { sb } else { sa };
    }
    if sa == 0 {
        return sb;
    }
    // opposite signs: compare a² with b²f
    let lhs = &x.a * &x.a;
    let rhs = &x.b * &x.b * Rat::from_integer(BigInt::from(x.field.f));
    match lhs.cmp(&rhs) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => 0,
    }
}

impl PartialOrd for KNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KNum {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self - other).sign() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

macro_rules! forward_binop {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $m(self, rhs: &$t) -> $t {
                (&self).$m(rhs)
            }
        }
        impl $tr<$t> for &$t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                self.$m(&rhs)
            }
        }
    };
}

impl Add<&KNum> for &KNum {
    type Output = KNum;
    fn add(self, rhs: &KNum) -> KNum {
        let k = join_or_panic(self.field, rhs.field);
        KNum::new(&self.a + &rhs.a, &self.b + &rhs.b, k)
    }
}

impl Sub<&KNum> for &KNum {
    type Output = KNum;
    fn sub(self, rhs: &KNum) -> KNum {
        let k = join_or_panic(self.field, rhs.field);
        KNum::new(&self.a - &rhs.a, &self.b - &rhs.b, k)
    }
}

impl Mul<&KNum> for &KNum {
    type Output = KNum;
    fn mul(self, rhs: &KNum) -> KNum {
        let k = join_or_panic(self.field, rhs.field);
        let f = Rat::from_integer(BigInt::from(k.f));
        KNum::new(
            &self.a * &rhs.a + &self.b * &rhs.b * f,
            &self.a * &rhs.b + &self.b * &rhs.a,
            k,
        )
    }
}

impl Div<&KNum> for &KNum {
    type Output = KNum;
    fn div(self, rhs: &KNum) -> KNum {
        if rhs.is_rational() {
            assert!(!rhs.a.is_zero(), "division by zero in K");
            return KNum::new(&self.a / &rhs.a, &self.b / &rhs.a, self.field);
        }
        self * &rhs.inv()
    }
}

forward_binop!(KNum, Add, add);
forward_binop!(KNum, Sub, sub);
forward_binop!(KNum, Mul, mul);
forward_binop!(KNum, Div, div);

impl Neg for &KNum {
    type Output = KNum;
    fn neg(self) -> KNum {
        KNum::new(-self.a.clone(), -self.b.clone(), self.field)
    }
}

impl Neg for KNum {
    type Output = KNum;
    fn neg(self) -> KNum {
        -&self
    }
}

impl AddAssign<&KNum> for KNum {
    fn add_assign(&mut self, rhs: &KNum) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&KNum> for KNum {
    fn sub_assign(&mut self, rhs: &KNum) {
        *self = &*self - rhs;
    }
}

impl std::iter::Sum for KNum {
    fn sum<I: Iterator<Item = KNum>>(iter: I) -> KNum {
        iter.fold(KNum::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for KNum {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(fm, "{}", self.a);
        }
        let sign = if self.b.is_negative() { '-' } else { '+' };
        write!(fm, "{}{}{}*sqrt({})", self.a, sign, self.b.abs(), self.field.f)
    }
}

impl FromStr for KNum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        parse_knum(s)
    }
}

/// Grammar: RAT | RAT ('+'|'-') RAT '*sqrt(' digits ')' | RAT '*sqrt(' digits ')'
/// plus the parenthesized form '(' KNUM ')' '/' digits.
pub fn parse_knum(s: &str) -> Result<KNum, Error> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(rest) = s.strip_prefix('(') {
        let close = rest
            .rfind(')')
            .ok_or_else(|| Error::Parse(format!("unbalanced parenthesis in `{s}`")))?;
        let inner = parse_knum(&rest[..close])?;
        let tail = &rest[close + 1..];
        if tail.is_empty() {
            return Ok(inner);
        }
        let den = tail
            .strip_prefix('/')
            .ok_or_else(|| Error::Parse(format!("expected `/` after `)` in `{s}`")))?;
        let d = parse_rat(den)?;
        return Ok(inner.scale(&d.recip()));
    }
    let Some(sq) = s.find("*sqrt(") else {
        return Ok(KNum::from_rat(parse_rat(&s)?));
    };
    let inside = s[sq + 6..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Parse(format!("expected `)` closing sqrt in `{s}`")))?;
    let f: u64 = inside
        .parse()
        .map_err(|_| Error::Parse(format!("bad radicand `{inside}`")))?;
    let field = QuadField::new(f)?;
    let head = &s[..sq];
    // split head into rational part and signed coefficient at the last +/- that is not leading
    let split = head
        .char_indices()
        .skip(1)
        .filter(|(i, c)| (*c == '+' || *c == '-') && !head[..*i].ends_with('/'))
        .map(|(i, _)| i)
        .last();
    let (a, b) = match split {
        Some(i) => {
            let a = parse_rat(&head[..i])?;
            let (neg, coef) = head[i..].split_at(1);
            let mut b = parse_rat(coef)?;
            if neg == "-" {
                b = -b;
            }
            (a, b)
        }
        None => (Rat::zero(), parse_rat(head)?),
    };
    Ok(KNum::new(a, b, field))
}

#[derive(Serialize, Deserialize)]
struct KNumJson {
    a: String,
    b: String,
    f: u64,
}

impl Serialize for KNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<KNum, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Obj(KNumJson),
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => parse_knum(&s).map_err(serde::de::Error::custom),
            Repr::Int(n) => Ok(KNum::int(n)),
            Repr::Obj(o) => {
                let field = QuadField::new(o.f).map_err(serde::de::Error::custom)?;
                let a = parse_rat(&o.a).map_err(serde::de::Error::custom)?;
                let b = parse_rat(&o.b).map_err(serde::de::Error::custom)?;
                Ok(KNum::new(a, b, field))
            }
        }
    }
}

impl KNum {
    /// JSON object form {"a":..,"b":..,"f":..}.
    pub fn to_json_object(&self) -> serde_json::Value {
        serde_json::json!({"a": self.a.to_string(), "b": self.b.to_string(), "f": self.field.f})
    }
}

/// re + i·im
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KiNum {
    pub re: KNum,
    pub im: KNum,
}

impl KiNum {
    pub fn new(re: KNum, im: KNum) -> Self {
        join_or_panic(re.field(), im.field());
        KiNum { re, im }
    }

    pub fn zero() -> Self {
        KiNum::new(KNum::zero(), KNum::zero())
    }

    pub fn real(x: KNum) -> Self {
        KiNum::new(x, KNum::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Complex conjugate.
    pub fn bar(&self) -> KiNum {
        KiNum::new(self.re.clone(), -&self.im)
    }

    /// Galois conjugate, coefficientwise.
    pub fn conj(&self) -> KiNum {
        KiNum::new(self.re.conj(), self.im.conj())
    }

    pub fn scale(&self, q: &Rat) -> KiNum {
        KiNum::new(self.re.scale(q), self.im.scale(q))
    }
}

impl Add<&KiNum> for &KiNum {
    type Output = KiNum;
    fn add(self, r: &KiNum) -> KiNum {
        KiNum::new(&self.re + &r.re, &self.im + &r.im)
    }
}

impl Sub<&KiNum> for &KiNum {
    type Output = KiNum;
    fn sub(self, r: &KiNum) -> KiNum {
        KiNum::new(&self.re - &r.re, &self.im - &r.im)
    }
}

impl Mul<&KiNum> for &KiNum {
    type Output = KiNum;
    fn mul(self, r: &KiNum) -> KiNum {
        KiNum::new(&self.re * &r.re - &self.im * &r.im, &self.re * &r.im + &self.im * &r.re)
    }
}

forward_binop!(KiNum, Add, add);
forward_binop!(KiNum, Sub, sub);
forward_binop!(KiNum, Mul, mul);

impl Neg for &KiNum {
    type Output = KiNum;
    fn neg(self) -> KiNum {
        KiNum::new(-&self.re, -&self.im)
    }
}

impl fmt::Display for KiNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})+i*({})", self.re, self.im)
    }
}

impl Serialize for KiNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("re", &self.re)?;
        m.serialize_entry("im", &self.im)?;
        m.end()
    }
}

/// c·(1∧√f) in K ∧_Q K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeNum {
    pub c: Rat,
    field: QuadField,
}

impl WedgeNum {
    pub fn new(c: Rat, field: QuadField) -> Self {
        if field.is_rational() {
            return WedgeNum { c: Rat::zero(), field };
        }
        WedgeNum { c, field }
    }

    pub fn zero() -> Self {
        WedgeNum { c: Rat::zero(), field: QuadField::Q }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn scale(&self, q: &Rat) -> WedgeNum {
        WedgeNum::new(&self.c * q, self.field)
    }
}

impl Add<&WedgeNum> for &WedgeNum {
    type Output = WedgeNum;
    fn add(self, r: &WedgeNum) -> WedgeNum {
        let k = join_or_panic(self.field, r.field);
        WedgeNum::new(&self.c + &r.c, k)
    }
}

impl Sub<&WedgeNum> for &WedgeNum {
    type Output = WedgeNum;
    fn sub(self, r: &WedgeNum) -> WedgeNum {
        let k = join_or_panic(self.field, r.field);
        WedgeNum::new(&self.c - &r.c, k)
    }
}

forward_binop!(WedgeNum, Add, add);
forward_binop!(WedgeNum, Sub, sub);

impl Neg for WedgeNum {
    type Output = WedgeNum;
    fn neg(self) -> WedgeNum {
        WedgeNum::new(-self.c, self.field)
    }
}

impl AddAssign<&WedgeNum> for WedgeNum {
    fn add_assign(&mut self, r: &WedgeNum) {
        *self = &*self + r;
    }
}

impl std::iter::Sum for WedgeNum {
    fn sum<I: Iterator<Item = WedgeNum>>(iter: I) -> WedgeNum {
        iter.fold(WedgeNum::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for WedgeNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "{}*(1^sqrt({}))", self.c, self.field.f)
        }
    }
}

impl Serialize for WedgeNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn wedge_k(x: &KNum, y: &KNum) -> Result<WedgeNum, Error> {
    let k = x.field().join(y.field())?;
    Ok(WedgeNum::new(&x.a * &y.b - &x.b * &y.a, k))
}

/// Panicking variant for internal use where the field is known to be shared.
pub(crate) fn wedge(x: &KNum, y: &KNum) -> WedgeNum {
    wedge_k(x, y).unwrap_or_else(|e| panic!("{e}"))
}

pub type KVec2 = [KNum; 2];

/// Element of Λ²_Q(K²) over u1∧u2, u1∧u3, u1∧u4, u2∧u3, u2∧u4, u3∧u4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JNum {
    pub c: [Rat; 6],
    field: QuadField,
}

impl JNum {
    pub fn zero() -> Self {
        JNum { c: std::array::from_fn(|_| Rat::zero()), field: QuadField::Q }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn scale(&self, q: &Rat) -> JNum {
        JNum { c: std::array::from_fn(|i| &self.c[i] * q), field: self.field }
    }
}

fn coords(v: &KVec2) -> [Rat; 4] {
    [v[0].a.clone(), v[0].b.clone(), v[1].a.clone(), v[1].b.clone()]
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn j_wedge(v: &KVec2, w: &KVec2) -> Result<JNum, Error> {
    let k = v[0]
        .field()
        .join(v[1].field())?
        .join(w[0].field())?
        .join(w[1].field())?;
    let (p, q) = (coords(v), coords(w));
    let c = std::array::from_fn(|n| {
        let (i, j) = PAIRS[n];
        &p[i] * &q[j] - &p[j] * &q[i]
    });
    Ok(JNum { c, field: k })
}

pub fn jxx(j: &JNum) -> WedgeNum {
    WedgeNum::new(j.c[0].clone(), j.field)
}

impl Add<&JNum> for &JNum {
    type Output = JNum;
    fn add(self, r: &JNum) -> JNum {
        let k = join_or_panic(self.field, r.field);
        JNum { c: std::array::from_fn(|i| &self.c[i] + &r.c[i]), field: k }
    }
}

forward_binop!(JNum, Add, add);

impl fmt::Display for JNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 6] = ["u1^u2", "u1^u3", "u1^u4", "u2^u3", "u2^u4", "u3^u4"];
        let terms: Vec<String> = self
            .c
            .iter()
            .zip(NAMES)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, n)| format!("{c}*{n}"))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// 2×2 matrix over K, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KMat2 {
    pub m: [[KNum; 2]; 2],
}

impl KMat2 {
    pub fn new(a: KNum, b: KNum, c: KNum, d: KNum) -> Self {
        KMat2 { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Self::new(KNum::one(), KNum::zero(), KNum::zero(), KNum::one())
    }

    pub fn det(&self) -> KNum {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn inverse(&self) -> Result<KMat2, Error> {
        let d = self.det();
        if d.is_zero() {
            return Err(Error::Domain("singular matrix".into()));
        }
        Ok(KMat2::new(
            &self.m[1][1] / &d,
            -&self.m[0][1] / &d,
            -&self.m[1][0] / &d,
            &self.m[0][0] / &d,
        ))
    }

    pub fn apply(&self, v: &KVec2) -> KVec2 {
        [
            &self.m[0][0] * &v[0] + &self.m[0][1] * &v[1],
            &self.m[1][0] * &v[0] + &self.m[1][1] * &v[1],
        ]
    }
}

/// Integer square root helper shared with tests and the decimal oracle.
pub fn isqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

/// Reduced p/q with q > 0 as (p, q).
pub fn rat_parts(q: &Rat) -> (BigInt, BigInt) {
    let g = q.numer().gcd(q.denom());
    (q.numer() / &g, q.denom() / &g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(s: &str) -> KNum {
        s.parse().unwrap()
    }

    #[test]
    fn wedge_hand_expansion() {
        let w = wedge_k(&k("2+3*sqrt(5)"), &k("7-1*sqrt(5)")).unwrap();
        assert_eq!(w.c, rat_int(-23));
        assert_eq!(wedge_k(&KNum::one(), &QuadField::new(5).unwrap().sqrt()).unwrap().c, rat_int(1));
        let x = k("3/2-2/7*sqrt(5)");
        assert!(wedge_k(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn wedge_rejects_mixed_fields() {
        assert!(matches!(
            wedge_k(&k("1+1*sqrt(2)"), &k("1+1*sqrt(3)")),
            Err(Error::FieldMismatch(2, 3))
        ));
    }

    #[test]
    fn conj_and_norm() {
        assert_eq!(k("3").conj(), k("3"));
        assert_eq!(k("2+1*sqrt(5)").norm(), rat_int(-1));
        let x = k("-4/3+5/2*sqrt(7)");
        assert_eq!(x.conj().conj(), x);
    }

    #[test]
    fn sign_examples() {
        assert_eq!(k("2-1*sqrt(5)").sign(), -1);
        assert_eq!(KNum::zero().sign(), 0);
        assert_eq!(k("(-1+1*sqrt(17))/2").sign(), 1);
        assert!("-3+1*sqrt(9)".parse::<KNum>().is_err());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0", "-7/3", "1+1*sqrt(5)", "-1/2-3/4*sqrt(17)", "0+2*sqrt(3)"] {
            let x = k(s);
            assert_eq!(k(&x.to_string()), x);
        }
        assert_eq!(k("(-1+1*sqrt(17))/6"), k("-1/6+1/6*sqrt(17)"));
        assert_eq!(k("2*sqrt(5)"), k("0+2*sqrt(5)"));
        assert!("1+sqrt(4)".parse::<KNum>().is_err());
        assert!("1/0".parse::<KNum>().is_err());
    }

    #[test]
    fn json_forms() {
        let x: KNum = serde_json::from_str(r#"{"a":"1/2","b":"-3","f":17}"#).unwrap();
        assert_eq!(x, k("1/2-3*sqrt(17)"));
        let y: KNum = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(x, y);
        let z: KNum = serde_json::from_value(x.to_json_object()).unwrap();
        assert_eq!(x, z);
    }

    #[test]
    fn j_examples() {
        let one = KNum::one();
        let zero = KNum::zero();
        let j = j_wedge(&[one.clone(), zero.clone()], &[zero.clone(), one.clone()]).unwrap();
        assert_eq!(j.c[1], rat_int(1));
        assert!(j.c.iter().enumerate().all(|(i, c)| i == 1 || c.is_zero()));
        let s5 = QuadField::new(5).unwrap().sqrt();
        let j = j_wedge(&[s5, zero.clone()], &[one.clone(), zero.clone()]).unwrap();
        assert_eq!(jxx(&j).c, rat_int(-1));
        let j = j_wedge(&[k("3/2"), k("-1")], &[k("2"), k("5/3")]).unwrap();
        assert!(jxx(&j).is_zero());
    }

    #[test]
    fn rational_field_collapses() {
        assert!(QuadField::new(4).is_err());
        assert!(WedgeNum::new(rat_int(3), QuadField::Q).is_zero());
        assert_eq!(KNum::new(rat_int(1), rat_int(2), QuadField::Q), KNum::int(3));
    }

    #[test]
    fn matrix_inverse() {
        let m = KMat2::new(k("1"), k("-1/3+1*sqrt(5)"), k("0"), k("2"));
        let inv = m.inverse().unwrap();
        let v = [k("1+1*sqrt(5)"), k("-2")];
        assert_eq!(inv.apply(&m.apply(&v)), v);
    }
}
