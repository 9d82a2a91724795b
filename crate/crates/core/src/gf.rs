//! Arithmetic in `F_{q^2}`, built as a single degree-`2e` extension of `F_p`.
//!
//! Elements are stored as their canonical index: the coefficient vector
//! `(c_0, ..., c_{2e-1})` with respect to the power basis of the modulus,
//! read as the base-`p` number `sum c_i p^i`. Comparing indices is therefore
//! the canonical element ordering. Small fields (`q^2 <= 2^16`) additionally
//! get log/antilog tables for multiplication.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::numth;

/// Largest supported `q`.
pub const MAX_Q: u64 = 1 << 16;

const MAX_DEGREE: usize = 32;
const LOG_TABLE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Position in the canonical element ordering.
    pub fn index(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone)]
struct LogTables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// The field `F_{q^2}` with `q = p^e`.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    p: u64,
    e: u32,
    degree: usize,
    modulus: Vec<u64>,
    q: u64,
    q2: u64,
    order_primes: Vec<u64>,
    primitive: FieldElement,
    tables: Option<LogTables>,
}

/// Serialized form of a [`FieldSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDoc {
    pub p: u64,
    pub e: u32,
    pub modulus: Vec<u64>,
}

impl FieldSpec {
    /// `F_{q^2}` for a prime power `q <= 2^16`, defined by the lexicographically
    /// smallest (low degree first) monic irreducible of degree `2e` over `F_p`.
    pub fn new(q: u64) -> Result<Self> {
        let (p, e) = Self::check_q(q)?;
        let modulus = smallest_irreducible(p, 2 * e as usize);
        Self::build(p, e, modulus)
    }

    pub fn with_modulus(p: u64, e: u32, modulus: Vec<u64>) -> Result<Self> {
        if !numth::is_prime(p) {
            return Err(HullError::DomainError(format!("p = {p} is not prime")));
        }
        let q = numth::checked_pow(p, e, "q")?;
        Self::check_q(q)?;
        let degree = 2 * e as usize;
        if modulus.len() != degree + 1 || modulus[degree] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(HullError::DomainError(format!(
                "modulus must be a monic degree-{degree} polynomial over F_{p}"
            )));
        }
        if !fp::is_irreducible(&modulus, p) {
            return Err(HullError::DomainError(
                "modulus is reducible over F_p".into(),
            ));
        }
        Self::build(p, e, modulus)
    }

    pub fn from_doc(doc: &FieldDoc) -> Result<Self> {
        Self::with_modulus(doc.p, doc.e, doc.modulus.clone())
    }

    pub fn to_doc(&self) -> FieldDoc {
        FieldDoc {
            p: self.p,
            e: self.e,
            modulus: self.modulus.clone(),
        }
    }

    fn check_q(q: u64) -> Result<(u64, u32)> {
        if q > MAX_Q {
            return Err(HullError::ScaleLimit {
                what: "field size q",
                count: q as u128,
                limit: MAX_Q as u128,
            });
        }
        match numth::prime_power(q) {
            Some(pe) if q >= 2 => Ok(pe),
            _ => Err(HullError::DomainError(format!(
                "q = {q} is not a prime power"
            ))),
        }
    }

    fn build(p: u64, e: u32, modulus: Vec<u64>) -> Result<Self> {
        let q = p.pow(e);
        let q2 = q * q;
        let mut spec = FieldSpec {
            p,
            e,
            degree: 2 * e as usize,
            modulus,
            q,
            q2,
            order_primes: numth::factorize(q2 - 1)
                .into_iter()
                .map(|(l, _)| l)
                .collect(),
            primitive: FieldElement::ONE,
            tables: None,
        };
        spec.primitive = (1..q2)
            .map(FieldElement)
            .find(|&a| spec.is_primitive(a))
            .ok_or_else(|| HullError::InternalInvariantViolation("no primitive element".into()))?;
        if q2 <= LOG_TABLE_LIMIT {
            spec.tables = Some(spec.log_tables());
        }
        Ok(spec)
    }

    fn log_tables(&self) -> LogTables {
        let order = (self.q2 - 1) as usize;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0u32; self.q2 as usize];
        let mut cur = FieldElement::ONE;
        for k in 0..order {
            exp[k] = cur.0 as u32;
            exp[k + order] = cur.0 as u32;
            log[cur.0 as usize] = k as u32;
            cur = self.mul_generic(cur, self.primitive);
        }
        LogTables { exp, log }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn q2(&self) -> u64 {
        self.q2
    }

    /// Monic modulus over `F_p`, low degree first (length `2e + 1`).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Smallest primitive element in the canonical ordering.
    pub fn primitive(&self) -> FieldElement {
        self.primitive
    }

    /// The element with the given canonical index.
    pub fn element(&self, index: u64) -> Result<FieldElement> {
        if index >= self.q2 {
            return Err(HullError::SpecMismatch(format!(
                "index {index} outside F_{}",
                self.q2
            )));
        }
        Ok(FieldElement(index))
    }

    /// The image of an integer under `Z -> F_p`.
    pub fn from_int(&self, k: i64) -> FieldElement {
        FieldElement(k.rem_euclid(self.p as i64) as u64)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.degree {
            return Err(HullError::SpecMismatch(format!(
                "{} coefficients for a degree-{} extension",
                coeffs.len(),
                self.degree
            )));
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.p) {
            return Err(HullError::SpecMismatch(format!(
                "coefficient {c} not in F_{}",
                self.p
            )));
        }
        Ok(self.pack_digits(coeffs))
    }

    /// Coordinates of `a`, always `2e` entries, low degree first.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u64> {
        self.digits(a)[..self.degree].to_vec()
    }

    /// Text form `[c_0,...,c_{2e-1}]`.
    pub fn format_element(&self, a: FieldElement) -> String {
        let parts: Vec<String> = self.coeffs(a).iter().map(u64::to_string).collect();
        format!("[{}]", parts.join(","))
    }

    /// Parses the bracketed text form. Missing trailing coordinates are zero.
    pub fn parse_element(&self, text: &str) -> Result<FieldElement> {
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| HullError::Parse(format!("expected [c0,c1,...], got {text:?}")))?;
        let coeffs = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<u64>()
                        .map_err(|err| HullError::Parse(err.to_string()))
                })
                .collect::<Result<Vec<_>>>()?
        };
        self.from_coeffs(&coeffs)
    }

    fn check(&self, a: FieldElement) -> Result<()> {
        if a.0 >= self.q2 {
            return Err(HullError::SpecMismatch(format!(
                "element index {} outside F_{}",
                a.0, self.q2
            )));
        }
        Ok(())
    }

    fn digits(&self, a: FieldElement) -> [u64; MAX_DEGREE] {
        let mut out = [0u64; MAX_DEGREE];
        let mut v = a.0;
        for d in out.iter_mut().take(self.degree) {
            *d = v % self.p;
            v /= self.p;
        }
        out
    }

    fn pack_digits(&self, digits: &[u64]) -> FieldElement {
        FieldElement(digits.iter().rev().fold(0, |acc, &d| acc * self.p + d))
    }

    /// Checked arithmetic; rejects elements outside the field and division by zero.
    pub fn apply(&self, op: FieldOp, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match op {
            FieldOp::Add => self.add(a, b),
            FieldOp::Sub => self.sub(a, b),
            FieldOp::Mul => self.mul(a, b),
            FieldOp::Div => self.div(a, b)?,
        })
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let mut out = [0u64; MAX_DEGREE];
        for i in 0..self.degree {
            out[i] = (x[i] + y[i]) % self.p;
        }
        self.pack_digits(&out[..self.degree])
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.p == 2 {
            return a;
        }
        let x = self.digits(a);
        let mut out = [0u64; MAX_DEGREE];
        for i in 0..self.degree {
            out[i] = (self.p - x[i]) % self.p;
        }
        self.pack_digits(&out[..self.degree])
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let k = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
                FieldElement(t.exp[k] as u64)
            }
            None => self.mul_generic(a, b),
        }
    }

    fn mul_generic(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (x, y) = (self.digits(a), self.digits(b));
        let k = self.degree;
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + x[i] * y[j]) % self.p;
            }
        }
        for top in (k..2 * k - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            // x^k = -(m_0 + ... + m_{k-1} x^{k-1})
            for i in 0..k {
                let sub = c * self.modulus[i] % self.p;
                prod[top - k + i] = (prod[top - k + i] + self.p - sub) % self.p;
            }
            prod[top] = 0;
        }
        self.pack_digits(&prod[..k])
    }

    pub fn pow(&self, a: FieldElement, exp: u64) -> FieldElement {
        if exp == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        if let Some(t) = &self.tables {
            let order = self.q2 - 1;
            let k = (t.log[a.0 as usize] as u128 * exp as u128 % order as u128) as usize;
            return FieldElement(t.exp[k] as u64);
        }
        let mut base = a;
        let mut acc = FieldElement::ONE;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_generic(acc, base);
            }
            base = self.mul_generic(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(HullError::DivisionByZero);
        }
        Ok(self.pow(a, self.q2 - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// The conjugate `a^q`.
    pub fn conjugate(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.q)
    }

    fn is_primitive(&self, a: FieldElement) -> bool {
        let order = self.q2 - 1;
        !a.is_zero()
            && self
                .order_primes
                .iter()
                .all(|&l| self.pow(a, order / l) != FieldElement::ONE)
    }

    /// Least `r >= 1` with `a^r = 1`.
    pub fn element_order(&self, a: FieldElement) -> Result<u64> {
        self.check(a)?;
        if a.is_zero() {
            return Err(HullError::ZeroHasNoOrder);
        }
        let mut r = self.q2 - 1;
        for &l in &self.order_primes {
            while r.is_multiple_of(l) && self.pow(a, r / l) == FieldElement::ONE {
                r /= l;
            }
        }
        Ok(r)
    }

    /// The canonical element of order `r`: `g^((q^2-1)/r)` for the smallest
    /// primitive `g`. Requires `r | q + 1`.
    pub fn find_element_of_order(&self, r: u64) -> Result<FieldElement> {
        if r == 0 || !(self.q + 1).is_multiple_of(r) {
            return Err(HullError::UnsupportedOrder {
                r,
                q_plus_one: self.q + 1,
            });
        }
        Ok(self.pow(self.primitive, (self.q2 - 1) / r))
    }

    /// `Lambda = lambda^a` with `a = pnu^{-1} mod r`, so that `Lambda^pnu = lambda`
    /// and `Lambda` keeps order `r`.
    pub fn lift_lambda(&self, lambda: FieldElement, pnu: u64, r: u64) -> Result<FieldElement> {
        let a = numth::inv_mod(pnu % r.max(1), r.max(1)).ok_or(HullError::NotCoprime(pnu, r))?;
        Ok(self.pow(lambda, a))
    }

    /// Iterator over all field elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q2).map(FieldElement)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F_{} (p = {}, modulus {:?})",
            self.q2, self.p, self.modulus
        )
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let doc = FieldDoc::deserialize(deserializer)?;
        FieldSpec::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

/// Smallest monic irreducible of the given degree over `F_p`, comparing
/// coefficient vectors from the constant term upward.
fn smallest_irreducible(p: u64, degree: usize) -> Vec<u64> {
    // Odometer over (c_0, ..., c_{degree-1}) with c_0 the most significant digit.
    let mut coeffs = vec![0u64; degree + 1];
    coeffs[degree] = 1;
    coeffs[0] = 1;
    loop {
        if fp::is_irreducible(&coeffs, p) {
            return coeffs;
        }
        let mut i = degree - 1;
        loop {
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            // c_0 = 0 is divisible by x, so the constant term never wraps.
            i -= 1;
        }
    }
}

/// Dense polynomials over the prime field, used only to pick and validate moduli.
mod fp {
    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv(a: u64, p: u64) -> u64 {
        crate::numth::pow_mod(a, p - 2, p)
    }

    fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv(m[dm], p);
        while r.len() > dm {
            let top = r.len() - 1;
            let c = r[top] * lead_inv % p;
            for i in 0..=dm {
                r[top - dm + i] = (r[top - dm + i] + p - c * m[i] % p) % p;
            }
            r = trim(r);
        }
        r
    }

    fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        rem(&prod, m, p)
    }

    fn powmod(a: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut base = rem(a, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base, m, p);
            }
            base = mulmod(&base, &base, m, p);
            e >>= 1;
        }
        acc
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    fn minus_x(a: &[u64], p: u64) -> Vec<u64> {
        let mut out = a.to_vec();
        if out.len() < 2 {
            out.resize(2, 0);
        }
        out[1] = (out[1] + p - 1) % p;
        trim(out)
    }

    /// Rabin's test: `x^(p^k) = x mod f` and `gcd(x^(p^(k/l)) - x, f) = 1`
    /// for every prime `l | k`.
    pub(super) fn is_irreducible(f: &[u64], p: u64) -> bool {
        let f = trim(f.to_vec());
        let k = f.len() - 1;
        if k == 0 {
            return false;
        }
        if k == 1 {
            return true;
        }
        let mut frob = vec![vec![0u64, 1]];
        for _ in 0..k {
            let next = powmod(frob.last().unwrap(), p, &f, p);
            frob.push(next);
        }
        if !minus_x(&frob[k], p).is_empty() {
            return false;
        }
        crate::numth::factorize(k as u64)
            .into_iter()
            .all(|(l, _)| gcd(&minus_x(&frob[k / l as usize], p), &f, p).len() == 1)
    }
}
