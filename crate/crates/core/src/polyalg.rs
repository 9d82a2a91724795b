//! Polynomials over `F_{q^2}`, the conjugate-reciprocal map `f -> f†`, and
//! the factorization of `x^n - lambda` into self-conjugate-reciprocal (SCR)
//! irreducibles and conjugate-reciprocal pairs.

use std::cmp::Ordering;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::gf::{FieldDoc, FieldElement, FieldSpec};
use crate::numth;

/// `nbar * r` must stay at or below this for factorization.
pub const MAX_NBAR_TIMES_R: u64 = 10_000;
/// Largest admissible degree of the splitting field of `x^nbar - Lambda` over `F_{q^2}`.
pub const MAX_SPLITTING_DEGREE: u64 = 32;

const SPLIT_SEED: u64 = 0x6875_6c6c_6469_6d00;

/// Dense polynomial, low degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(FieldElement::ONE)
    }

    pub fn x() -> Self {
        Poly {
            coeffs: vec![FieldElement::ZERO, FieldElement::ONE],
        }
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> FieldElement {
        self.coeffs.last().copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn constant_term(&self) -> FieldElement {
        self.coeffs.first().copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == FieldElement::ONE
    }
}

/// Degree first, then coefficients compared from the constant term upward.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ring operations on [`Poly`] over a fixed field.
#[derive(Debug, Clone, Copy)]
pub struct PolyRing<'a> {
    field: &'a FieldSpec,
}

impl<'a> PolyRing<'a> {
    pub fn new(field: &'a FieldSpec) -> Self {
        PolyRing { field }
    }

    pub fn field(&self) -> &'a FieldSpec {
        self.field
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let f = self.field;
        let len = a.coeffs.len().max(b.coeffs.len());
        Poly::from_coeffs((0..len).map(|i| f.add(a.coeff(i), b.coeff(i))).collect())
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        Poly::from_coeffs(a.coeffs.iter().map(|&c| self.field.neg(c)).collect())
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &Poly, c: FieldElement) -> Poly {
        Poly::from_coeffs(a.coeffs.iter().map(|&x| self.field.mul(x, c)).collect())
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let f = self.field;
        let mut out = vec![FieldElement::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn pow(&self, a: &Poly, mut exp: u64) -> Poly {
        let mut acc = Poly::one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Euclidean division `a = quot * b + rem`, `deg rem < deg b`.
    pub fn divmod(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        if b.is_zero() {
            return Err(HullError::DivisionByZero);
        }
        let f = self.field;
        let db = b.deg();
        let lead_inv = f.inv(b.lead())?;
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return Ok((Poly::zero(), a.clone()));
        }
        let mut quot = vec![FieldElement::ZERO; rem.len() - db];
        for top in (db..rem.len()).rev() {
            let c = f.mul(rem[top], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[top - db] = c;
            for (i, &bc) in b.coeffs.iter().enumerate() {
                rem[top - db + i] = f.sub(rem[top - db + i], f.mul(c, bc));
            }
        }
        rem.truncate(db);
        Ok((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    pub fn rem(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        Ok(self.divmod(a, b)?.1)
    }

    /// Exact quotient; errors if `b` does not divide `a`.
    pub fn div_exact(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        let (quot, rem) = self.divmod(a, b)?;
        if !rem.is_zero() {
            return Err(HullError::InternalInvariantViolation(
                "inexact polynomial division".into(),
            ));
        }
        Ok(quot)
    }

    pub fn divides(&self, d: &Poly, a: &Poly) -> Result<bool> {
        Ok(self.rem(a, d)?.is_zero())
    }

    /// Scales to leading coefficient one; zero stays zero.
    pub fn monic(&self, a: &Poly) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        let inv = self
            .field
            .inv(a.lead())
            .expect("nonzero leading coefficient");
        self.scale(a, inv)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = self.rem(&a, &b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    /// Monic least common multiple `a * b / gcd(a, b)`.
    pub fn lcm(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(a, b);
        let prod = self.mul(a, b);
        self.monic(&self.div_exact(&prod, &g).expect("gcd divides the product"))
    }

    pub fn mulmod(&self, a: &Poly, b: &Poly, m: &Poly) -> Poly {
        self.rem(&self.mul(a, b), m).expect("nonzero modulus")
    }

    pub fn powmod(&self, a: &Poly, mut exp: u64, m: &Poly) -> Poly {
        let mut acc = self.rem(&Poly::one(), m).expect("nonzero modulus");
        let mut base = self.rem(a, m).expect("nonzero modulus");
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mulmod(&acc, &base, m);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mulmod(&base, &base, m);
            }
        }
        acc
    }

    pub fn eval(&self, a: &Poly, at: FieldElement) -> FieldElement {
        let f = self.field;
        a.coeffs
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &c| f.add(f.mul(acc, at), c))
    }

    /// `x^n - c`.
    pub fn binomial(&self, n: u64, c: FieldElement) -> Poly {
        let mut coeffs = vec![FieldElement::ZERO; n as usize + 1];
        coeffs[0] = self.field.neg(c);
        coeffs[n as usize] = self.field.add(coeffs[n as usize], FieldElement::ONE);
        Poly::from_coeffs(coeffs)
    }

    /// Conjugate-reciprocal polynomial: for `f = a_0 + ... + a_k x^k` with
    /// `a_0 != 0`, `f† = a_0^{-q} sum a_i^q x^{k-i}`. The result is always monic.
    pub fn dagger(&self, a: &Poly) -> Result<Poly> {
        let f = self.field;
        if a.constant_term().is_zero() {
            return Err(HullError::ZeroConstantTerm);
        }
        let scale = f.inv(f.conjugate(a.constant_term()))?;
        let out = Poly::from_coeffs(
            a.coeffs
                .iter()
                .rev()
                .map(|&c| f.mul(scale, f.conjugate(c)))
                .collect(),
        );
        if !out.is_monic() || out.degree() != a.degree() {
            return Err(HullError::InternalInvariantViolation(
                "conjugate-reciprocal must be monic of the same degree".into(),
            ));
        }
        Ok(out)
    }

    /// Whether `a = a†` (self-conjugate-reciprocal).
    pub fn is_scr(&self, a: &Poly) -> Result<bool> {
        Ok(&self.dagger(a)? == a)
    }

    /// Rabin's irreducibility test over `F_{q^2}`.
    pub fn is_irreducible(&self, a: &Poly) -> Result<bool> {
        let k = match a.degree() {
            None | Some(0) => return Err(HullError::ConstantPolynomial),
            Some(1) => return Ok(true),
            Some(k) => k,
        };
        let m = self.monic(a);
        let big_q = self.field.q2();
        let mut frob = vec![self.rem(&Poly::x(), &m)?];
        for _ in 0..k {
            let next = self.powmod(frob.last().unwrap(), big_q, &m);
            frob.push(next);
        }
        if self.sub(&frob[k], &Poly::x()) != Poly::zero() {
            return Ok(false);
        }
        Ok(numth::factorize(k as u64).into_iter().all(|(l, _)| {
            let h = self.sub(&frob[k / l as usize], &Poly::x());
            self.gcd(&h, &m).deg() == 0
        }))
    }

    /// Monic irreducible factors of a squarefree polynomial, sorted.
    pub(crate) fn factor_squarefree(&self, a: &Poly) -> Vec<Poly> {
        let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
        let mut out = Vec::new();
        for (part, d) in self.distinct_degree(&self.monic(a)) {
            self.equal_degree(&part, d, &mut rng, &mut out);
        }
        out.sort();
        out
    }

    /// Splits a monic squarefree polynomial into products of irreducibles of one degree.
    fn distinct_degree(&self, a: &Poly) -> Vec<(Poly, usize)> {
        let big_q = self.field.q2();
        let mut out = Vec::new();
        let mut rest = a.clone();
        let mut h = self.rem(&Poly::x(), &rest).expect("nonzero");
        let mut d = 0usize;
        while rest.deg() >= 2 * (d + 1) {
            d += 1;
            h = self.powmod(&h, big_q, &rest);
            let g = self.gcd(&rest, &self.sub(&h, &Poly::x()));
            if g.deg() > 0 {
                rest = self.div_exact(&rest, &g).expect("gcd divides");
                h = self.rem(&h, &rest).expect("nonzero");
                out.push((g, d));
            }
        }
        if rest.deg() > 0 {
            let d = rest.deg();
            out.push((rest, d));
        }
        out
    }

    /// Cantor–Zassenhaus equal-degree splitting with a fixed-seed generator.
    fn equal_degree(&self, a: &Poly, d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Poly>) {
        let n = a.deg();
        if n == d {
            out.push(a.clone());
            return;
        }
        let f = self.field;
        loop {
            let probe = Poly::from_coeffs(
                (0..n)
                    .map(|_| f.element(rng.gen_range(0..f.q2())).expect("in range"))
                    .collect(),
            );
            if probe.deg() == 0 {
                continue;
            }
            let witness = if f.p() == 2 {
                self.trace_map(&probe, d, a)
            } else {
                let power = self.half_norm_power(&probe, d, a);
                self.sub(&power, &Poly::one())
            };
            let g = self.gcd(&witness, a);
            if g.deg() > 0 && g.deg() < n {
                let cofactor = self.div_exact(a, &g).expect("gcd divides");
                self.equal_degree(&g, d, rng, out);
                self.equal_degree(&cofactor, d, rng, out);
                return;
            }
        }
    }

    /// `probe^((Q^d - 1) / 2) mod m` for odd `Q = q^2`.
    fn half_norm_power(&self, probe: &Poly, d: usize, m: &Poly) -> Poly {
        let big_q = self.field.q2();
        let base = self.powmod(probe, (big_q - 1) / 2, m);
        let mut cur = base.clone();
        let mut acc = base;
        for _ in 1..d {
            cur = self.powmod(&cur, big_q, m);
            acc = self.mulmod(&acc, &cur, m);
        }
        acc
    }

    /// Absolute trace `sum_{i < k d} probe^(2^i) mod m` for `Q = 2^k`.
    fn trace_map(&self, probe: &Poly, d: usize, m: &Poly) -> Poly {
        let k = 2 * self.field.e() as usize;
        let mut cur = self.rem(probe, m).expect("nonzero modulus");
        let mut acc = cur.clone();
        for _ in 1..k * d {
            cur = self.mulmod(&cur, &cur, m);
            acc = self.add(&acc, &cur);
        }
        acc
    }

    /// Text form: bracketed list of element text forms, low degree first.
    pub fn format(&self, a: &Poly) -> String {
        let parts: Vec<String> = a
            .coeffs
            .iter()
            .map(|&c| self.field.format_element(c))
            .collect();
        format!("[{}]", parts.join(","))
    }

    pub fn parse(&self, text: &str) -> Result<Poly> {
        let t = text.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| HullError::Parse(format!("expected [[..],[..]], got {text:?}")))?
            .trim();
        let mut coeffs = Vec::new();
        let mut rest = inner;
        while !rest.is_empty() {
            let end = rest
                .find(']')
                .ok_or_else(|| HullError::Parse(format!("unterminated coefficient in {text:?}")))?;
            coeffs.push(self.field.parse_element(&rest[..=end])?);
            rest = rest[end + 1..].trim_start();
            rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        }
        Ok(Poly::from_coeffs(coeffs))
    }
}

/// The decomposition `x^n - lambda = (x^nbar - Lambda)^(p^nu)` with
/// `x^nbar - Lambda = prod g_i * prod f_j f_j†`.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub field: Arc<FieldSpec>,
    pub n: u64,
    pub lambda: FieldElement,
    pub r: u64,
    pub nbar: u64,
    pub nu: u32,
    pub pnu: u64,
    pub big_lambda: FieldElement,
    /// SCR irreducibles, sorted.
    pub scr_factors: Vec<Poly>,
    /// `(f_j, f_j†)` with `f_j < f_j†`, sorted by `f_j`.
    pub cr_pairs: Vec<(Poly, Poly)>,
}

impl FactorizationReport {
    pub fn s(&self) -> usize {
        self.scr_factors.len()
    }

    pub fn t(&self) -> usize {
        self.cr_pairs.len()
    }

    /// Sum of SCR factor degrees.
    pub fn scr_degree(&self) -> u64 {
        self.scr_factors.iter().map(|g| g.deg() as u64).sum()
    }

    pub fn ring(&self) -> PolyRing<'_> {
        PolyRing::new(&self.field)
    }

    /// `x^n - lambda`.
    pub fn target(&self) -> Poly {
        self.ring().binomial(self.n, self.lambda)
    }

    /// Product of every reported factor raised to `p^nu`.
    pub fn reassemble(&self) -> Poly {
        let ring = self.ring();
        let mut acc = Poly::one();
        for g in &self.scr_factors {
            acc = ring.mul(&acc, g);
        }
        for (f, fd) in &self.cr_pairs {
            acc = ring.mul(&acc, &ring.mul(f, fd));
        }
        ring.pow(&acc, self.pnu)
    }

    pub fn to_doc(&self) -> FactorizationDoc {
        let ring = self.ring();
        let field = &self.field;
        FactorizationDoc {
            field: field.to_doc(),
            n: self.n,
            r: self.r,
            lambda: field.format_element(self.lambda),
            nbar: self.nbar,
            nu: self.nu,
            pnu: self.pnu,
            big_lambda: field.format_element(self.big_lambda),
            s: self.s(),
            t: self.t(),
            scr: self.scr_factors.iter().map(|g| ring.format(g)).collect(),
            pairs: self
                .cr_pairs
                .iter()
                .map(|(f, fd)| [ring.format(f), ring.format(fd)])
                .collect(),
        }
    }
}

/// Serialized [`FactorizationReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationDoc {
    pub field: FieldDoc,
    pub n: u64,
    pub r: u64,
    pub lambda: String,
    pub nbar: u64,
    pub nu: u32,
    pub pnu: u64,
    #[serde(rename = "Lambda")]
    pub big_lambda: String,
    pub s: usize,
    pub t: usize,
    pub scr: Vec<String>,
    pub pairs: Vec<[String; 2]>,
}

/// Factors `x^n - lambda` over `F_{q^2}` for `lambda` of order `r | q + 1`.
pub fn factor_xn_minus_lambda(
    field: &Arc<FieldSpec>,
    n: u64,
    lambda: FieldElement,
) -> Result<FactorizationReport> {
    if n == 0 {
        return Err(HullError::DomainError("length n must be >= 1".into()));
    }
    let r = field.element_order(lambda)?;
    if !(field.q() + 1).is_multiple_of(r) {
        return Err(HullError::UnsupportedOrder {
            r,
            q_plus_one: field.q() + 1,
        });
    }
    let (nbar, nu, pnu) = numth::split_p_part(n, field.p());
    let nbar_r = nbar * r;
    if nbar_r > MAX_NBAR_TIMES_R {
        return Err(HullError::ScaleLimit {
            what: "nbar * r",
            count: nbar_r as u128,
            limit: MAX_NBAR_TIMES_R as u128,
        });
    }
    let split_degree = numth::mult_order(field.q2() % nbar_r, nbar_r)?;
    if split_degree > MAX_SPLITTING_DEGREE {
        return Err(HullError::ScaleLimit {
            what: "splitting field degree",
            count: split_degree as u128,
            limit: MAX_SPLITTING_DEGREE as u128,
        });
    }
    let big_lambda = field.lift_lambda(lambda, pnu, r)?;
    let ring = PolyRing::new(field);
    let factors = ring.factor_squarefree(&ring.binomial(nbar, big_lambda));

    let mut scr_factors = Vec::new();
    let mut partners = Vec::new();
    for f in &factors {
        let fd = ring.dagger(f)?;
        if &fd == f {
            scr_factors.push(f.clone());
        } else {
            partners.push((f.clone(), fd));
        }
    }
    let mut cr_pairs: Vec<(Poly, Poly)> =
        partners.iter().filter(|(f, fd)| f < fd).cloned().collect();
    if cr_pairs.len() * 2 != partners.len() || cr_pairs.iter().any(|(_, fd)| !factors.contains(fd))
    {
        return Err(HullError::InternalInvariantViolation(
            "non-SCR factors do not close up into conjugate-reciprocal pairs".into(),
        ));
    }
    cr_pairs.sort();
    Ok(FactorizationReport {
        field: Arc::clone(field),
        n,
        lambda,
        r,
        nbar,
        nu,
        pnu,
        big_lambda,
        scr_factors,
        cr_pairs,
    })
}
