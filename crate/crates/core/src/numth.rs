//! Integer-theoretic layer: totients, multiplicative orders, the set `M_q`
//! of divisors of `q^i + 1` with `i` odd, the root-order set `chi`, and the
//! counting formulas for the self-conjugate-reciprocal part of `x^nbar - Lambda`.
//!
//! All arithmetic is on `u64` with checked operations; anything that would
//! overflow surfaces as [`HullError::Overflow`].

use std::fmt;

use num::integer::gcd;
use serde::Serialize;

use crate::error::{HullError, Result};

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if m < 2 {
        return out;
    }
    let mut d = 2u64;
    while d <= m / d {
        if m.is_multiple_of(d) {
            let mut k = 0;
            while m.is_multiple_of(d) {
                m /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

pub fn is_prime(m: u64) -> bool {
    m >= 2 && factorize(m) == [(m, 1)]
}

/// Splits `q = p^e`; `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factorize(q).as_slice() {
        [(p, e)] => Some((*p, *e)),
        _ => None,
    }
}

/// 2-adic valuation. `v2(0)` is treated as 0.
pub fn v2(m: u64) -> u32 {
    if m == 0 {
        0
    } else {
        m.trailing_zeros()
    }
}

/// `n = nbar * p^nu` with `p` not dividing `nbar`. Returns `(nbar, nu, p^nu)`.
pub fn split_p_part(n: u64, p: u64) -> (u64, u32, u64) {
    let (mut nbar, mut nu, mut pnu) = (n, 0u32, 1u64);
    while nbar > 0 && nbar % p == 0 {
        nbar /= p;
        nu += 1;
        pnu *= p;
    }
    (nbar, nu, pnu)
}

pub fn checked_pow(base: u64, exp: u32, what: &'static str) -> Result<u64> {
    base.checked_pow(exp).ok_or(HullError::Overflow(what))
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Modular inverse of `a` modulo `m` (`m >= 1`), if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

pub fn divisors(m: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, k) in factorize(m) {
        let mut next = Vec::with_capacity(divs.len() * (k as usize + 1));
        for &d in &divs {
            let mut pk = 1u64;
            for _ in 0..=k {
                next.push(d * pk);
                pk *= p;
            }
        }
        divs = next;
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(m: u64) -> Result<u64> {
    if m < 1 {
        return Err(HullError::DomainError("euler_phi needs m >= 1".into()));
    }
    Ok(factorize(m)
        .into_iter()
        .fold(m, |acc, (p, _)| acc / p * (p - 1)))
}

/// Least `d >= 1` with `a^d = 1 (mod m)`.
pub fn mult_order(a: u64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(HullError::DomainError("mult_order needs m >= 1".into()));
    }
    if m == 1 {
        return Ok(1);
    }
    if gcd(a % m, m) != 1 {
        return Err(HullError::NotCoprime(a, m));
    }
    let mut d = euler_phi(m)?;
    for (p, _) in factorize(d) {
        while d % p == 0 && pow_mod(a, d / p, m) == 1 {
            d /= p;
        }
    }
    Ok(d)
}

/// Whether `l` divides `q^i + 1` for some odd `i >= 1`.
///
/// `l > 2` is decided through `d = ord_l(q)`: such an `i` exists exactly
/// when `d` is twice an odd number and `q^(d/2) = -1 (mod l)`.
pub fn in_mq(l: u64, q: u64) -> Result<bool> {
    if l == 0 {
        return Err(HullError::DomainError("M_q membership needs l >= 1".into()));
    }
    if gcd(l, q) != 1 {
        return Err(HullError::NotCoprime(l, q));
    }
    match l {
        1 => Ok(true),
        2 => Ok(q % 2 == 1),
        _ => {
            let d = mult_order(q, l)?;
            Ok(d % 4 == 2 && pow_mod(q, d / 2, l) == l - 1)
        }
    }
}

/// Like [`in_mq`], but integers sharing a factor with `q` are simply not members.
pub fn in_mq_or_false(l: u64, q: u64) -> bool {
    in_mq(l, q).unwrap_or(false)
}

/// The exponent `gamma` with `2^gamma || q + 1`.
pub fn gamma_of_q(q: u64) -> u32 {
    v2(q + 1)
}

/// `chi = { j : j | nbar*r, gcd(nbar*r / j, r) = 1 }`, computed from the definition.
pub fn chi_set_by_definition(nbar: u64, r: u64) -> Result<Vec<u64>> {
    let m = nbar.checked_mul(r).ok_or(HullError::Overflow("nbar * r"))?;
    Ok(divisors(m)
        .into_iter()
        .filter(|&j| gcd(m / j, r) == 1)
        .collect())
}

/// `chi` in structured form: `r` times the part of `nbar` supported on the
/// primes of `r`, times any divisor of the part of `nbar` coprime to `r`.
pub fn chi_set_structured(nbar: u64, r: u64) -> Result<Vec<u64>> {
    let r_primes: Vec<u64> = factorize(r).into_iter().map(|(p, _)| p).collect();
    let mut shared = 1u64;
    let mut rest = nbar;
    for p in &r_primes {
        while rest.is_multiple_of(*p) {
            rest /= p;
            shared *= p;
        }
    }
    let base = r
        .checked_mul(shared)
        .ok_or(HullError::Overflow("chi base"))?;
    let mut out: Vec<u64> = divisors(rest).into_iter().map(|k| base * k).collect();
    out.sort_unstable();
    Ok(out)
}

/// The set `chi` (ascending). Both forms are computed and must agree.
pub fn chi_set(nbar: u64, r: u64) -> Result<Vec<u64>> {
    if nbar == 0 || r == 0 {
        return Err(HullError::DomainError("chi needs nbar, r >= 1".into()));
    }
    let by_def = chi_set_by_definition(nbar, r)?;
    let structured = chi_set_structured(nbar, r)?;
    if by_def != structured {
        return Err(HullError::InternalInvariantViolation(format!(
            "chi({nbar}, {r}): definition {by_def:?} != structured {structured:?}"
        )));
    }
    Ok(by_def)
}

/// `l = 2^beta * dprime * d1`, odd primes split by membership in `M_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MqFactorization {
    pub beta: u32,
    pub dprime: u64,
    pub d1: u64,
}

pub fn mq_factorization(l: u64, q: u64) -> Result<MqFactorization> {
    if l == 0 {
        return Err(HullError::DomainError(
            "M_q-factorization needs l >= 1".into(),
        ));
    }
    // Only the odd part is classified, so only it needs to be coprime to q.
    let odd = l >> v2(l);
    if gcd(odd, q) != 1 {
        return Err(HullError::NotCoprime(l, q));
    }
    let mut out = MqFactorization {
        beta: v2(l),
        dprime: 1,
        d1: 1,
    };
    for (p, k) in factorize(l) {
        if p == 2 {
            continue;
        }
        let pk = p.pow(k);
        if in_mq(p, q)? {
            out.d1 *= pk;
        } else {
            out.dprime *= pk;
        }
    }
    Ok(out)
}

/// Factor-structure prediction for one `j` in `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChiRecord {
    pub j: u64,
    pub in_mq: bool,
    /// Number of SCR factors (if `in_mq`) or of conjugate-reciprocal pairs.
    pub count: u64,
    /// Common degree `ord_j(q^2)` of those factors.
    pub degree: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureCounts {
    pub records: Vec<ChiRecord>,
    pub s: u64,
    pub t: u64,
}

impl StructureCounts {
    /// Degrees of the SCR factors, ascending, with multiplicity.
    pub fn scr_degrees(&self) -> Vec<u64> {
        self.degrees_where(true)
    }

    /// Degree of each pair member (one entry per pair), ascending.
    pub fn pair_degrees(&self) -> Vec<u64> {
        self.degrees_where(false)
    }

    fn degrees_where(&self, scr: bool) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .records
            .iter()
            .filter(|rec| rec.in_mq == scr)
            .flat_map(|rec| std::iter::repeat_n(rec.degree, rec.count as usize))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn total_degree(&self) -> u64 {
        self.records
            .iter()
            .map(|rec| rec.count * rec.degree * if rec.in_mq { 1 } else { 2 })
            .sum()
    }
}

/// Checks `q` is a prime power and `r | q + 1`.
pub(crate) fn check_order_params(r: u64, q: u64) -> Result<()> {
    if q < 2 || prime_power(q).is_none() {
        return Err(HullError::DomainError(format!(
            "q = {q} is not a prime power"
        )));
    }
    if r == 0 || !(q + 1).is_multiple_of(r) {
        return Err(HullError::UnsupportedOrder {
            r,
            q_plus_one: q + 1,
        });
    }
    Ok(())
}

fn check_hull_params(nbar: u64, r: u64, q: u64) -> Result<()> {
    check_order_params(r, q)?;
    if nbar == 0 {
        return Err(HullError::DomainError("nbar must be >= 1".into()));
    }
    if gcd(nbar, q) != 1 {
        return Err(HullError::NotCoprime(nbar, q));
    }
    Ok(())
}

/// Predicted irreducible-factor structure of `x^nbar - Lambda` over `F_{q^2}`
/// for `Lambda` of order `r`.
pub fn structure_counts(nbar: u64, r: u64, q: u64) -> Result<StructureCounts> {
    check_hull_params(nbar, r, q)?;
    let phi_r = euler_phi(r)?;
    let q2 = q.checked_mul(q).ok_or(HullError::Overflow("q^2"))?;
    let mut records = Vec::new();
    let (mut s, mut t) = (0u64, 0u64);
    for j in chi_set(nbar, r)? {
        let degree = mult_order(q2, j)?;
        let member = in_mq(j, q)?;
        let den = phi_r * degree * if member { 1 } else { 2 };
        let phi_j = euler_phi(j)?;
        if phi_j % den != 0 {
            return Err(HullError::InternalInvariantViolation(format!(
                "phi({j}) = {phi_j} not divisible by {den}"
            )));
        }
        let count = phi_j / den;
        if member {
            s += count;
        } else {
            t += count;
        }
        records.push(ChiRecord {
            j,
            in_mq: member,
            count,
            degree,
        });
    }
    let out = StructureCounts { records, s, t };
    if out.total_degree() != nbar {
        return Err(HullError::InternalInvariantViolation(format!(
            "structure degrees sum to {} instead of {nbar}",
            out.total_degree()
        )));
    }
    Ok(out)
}

/// Sum of `phi(j) / phi(r)` over `j` in `chi` that lie in `M_q`, without cross-checks.
pub fn b_hull_sum(nbar: u64, r: u64, q: u64) -> Result<u64> {
    check_hull_params(nbar, r, q)?;
    let phi_r = euler_phi(r)?;
    let mut total = 0u64;
    for j in chi_set(nbar, r)? {
        if in_mq(j, q)? {
            let phi_j = euler_phi(j)?;
            if phi_j % phi_r != 0 {
                return Err(HullError::InternalInvariantViolation(format!(
                    "phi(r) = {phi_r} does not divide phi({j}) = {phi_j}"
                )));
            }
            total += phi_j / phi_r;
        }
    }
    Ok(total)
}

/// The closed form for `B` when `r` is in `M_q` (and, for even `r`, the
/// 2-adic valuations fit under `gamma`); `None` when those hypotheses fail.
pub fn b_hull_closed_form(nbar: u64, r: u64, q: u64) -> Result<Option<u64>> {
    check_hull_params(nbar, r, q)?;
    if !in_mq(r, q)? {
        return Ok(None);
    }
    let gamma = gamma_of_q(q);
    let fact = mq_factorization(nbar, q)?;
    let two_part = if r.is_multiple_of(2) {
        if fact.beta + v2(r) > gamma {
            return Ok(None);
        }
        fact.beta
    } else {
        fact.beta.min(gamma)
    };
    let b = checked_pow(2, two_part, "2^beta")?
        .checked_mul(fact.d1)
        .ok_or(HullError::Overflow("closed-form B"))?;
    Ok(Some(b))
}

/// Which condition decided whether `B` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "clause")]
pub enum ZeroClause {
    /// `v2(nbar) + v2(r) > gamma` (even `r` only).
    ValuationExceedsGamma { v2_nbar: u32, v2_r: u32, gamma: u32 },
    /// `r` is not in `M_q`.
    OrderNotInMq { r: u64 },
    /// Neither vanishing condition holds.
    Nonvanishing,
}

impl fmt::Display for ZeroClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroClause::ValuationExceedsGamma {
                v2_nbar,
                v2_r,
                gamma,
            } => write!(f, "v2(nbar)+v2(r) = {} > gamma = {gamma}", v2_nbar + v2_r),
            ZeroClause::OrderNotInMq { r } => write!(f, "r = {r} not in M_q"),
            ZeroClause::Nonvanishing => write!(f, "r in M_q and valuations within gamma"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZeroVerdict {
    pub is_zero: bool,
    pub clause: ZeroClause,
}

/// Vanishing criterion for `B` evaluated from its branch conditions alone.
pub fn b_is_zero(nbar: u64, r: u64, q: u64) -> Result<ZeroVerdict> {
    check_hull_params(nbar, r, q)?;
    let gamma = gamma_of_q(q);
    let (v2_nbar, v2_r) = (v2(nbar), v2(r));
    if r.is_multiple_of(2) && v2_nbar + v2_r > gamma {
        return Ok(ZeroVerdict {
            is_zero: true,
            clause: ZeroClause::ValuationExceedsGamma {
                v2_nbar,
                v2_r,
                gamma,
            },
        });
    }
    if !in_mq(r, q)? {
        return Ok(ZeroVerdict {
            is_zero: true,
            clause: ZeroClause::OrderNotInMq { r },
        });
    }
    Ok(ZeroVerdict {
        is_zero: false,
        clause: ZeroClause::Nonvanishing,
    })
}

/// Whether every irreducible factor of `x^nbar - Lambda` is SCR (`B = nbar`),
/// decided from `r, nbar in M_q` and `v2(nbar) + v2(r) <= gamma`.
pub fn b_is_full(nbar: u64, r: u64, q: u64) -> Result<bool> {
    check_hull_params(nbar, r, q)?;
    Ok(in_mq(r, q)? && in_mq(nbar, q)? && v2(nbar) + v2(r) <= gamma_of_q(q))
}

/// Total degree `B` of the SCR irreducible factors of `x^nbar - Lambda`.
///
/// Evaluates the totient sum and cross-checks it against the closed form,
/// the vanishing criterion and the `B = nbar` criterion.
pub fn b_hull(nbar: u64, r: u64, q: u64) -> Result<u64> {
    let b = b_hull_sum(nbar, r, q)?;
    let violation = |msg: String| Err(HullError::InternalInvariantViolation(msg));
    if let Some(closed) = b_hull_closed_form(nbar, r, q)? {
        if closed != b {
            return violation(format!(
                "B({nbar},{r},{q}): sum {b} != closed form {closed}"
            ));
        }
    }
    let zero = b_is_zero(nbar, r, q)?;
    if zero.is_zero != (b == 0) {
        return violation(format!(
            "B({nbar},{r},{q}) = {b} but vanishing test says {zero:?}"
        ));
    }
    if b_is_full(nbar, r, q)? != (b == nbar) {
        return violation(format!(
            "B({nbar},{r},{q}) = {b} disagrees with the B = nbar test"
        ));
    }
    if b > nbar || !(nbar - b).is_multiple_of(2) {
        return violation(format!(
            "B({nbar},{r},{q}) = {b} is not a valid SCR degree total"
        ));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_mq_by_search(l: u64, q: u64) -> bool {
        (1..=2 * l)
            .step_by(2)
            .any(|i| (pow_mod(q, i, l) + 1).is_multiple_of(l))
    }

    #[test]
    fn totient_examples() {
        assert_eq!(euler_phi(1).unwrap(), 1);
        assert_eq!(euler_phi(12).unwrap(), 4);
        assert_eq!(euler_phi(97).unwrap(), 96);
        assert!(matches!(euler_phi(0), Err(HullError::DomainError(_))));
        for m in 1..200u64 {
            let units = (1..=m).filter(|&k| gcd(k, m) == 1).count() as u64;
            assert_eq!(euler_phi(m).unwrap(), units, "phi({m})");
        }
    }

    #[test]
    fn order_examples() {
        assert_eq!(mult_order(7, 1).unwrap(), 1);
        assert_eq!(mult_order(4, 5).unwrap(), 2);
        assert_eq!(mult_order(2, 3).unwrap(), 2);
        assert_eq!(mult_order(2, 4), Err(HullError::NotCoprime(2, 4)));
    }

    #[test]
    fn mq_examples() {
        assert!(in_mq(1, 2).unwrap());
        assert!(in_mq(3, 2).unwrap());
        assert!(!in_mq(5, 2).unwrap());
        assert!(!in_mq(8, 3).unwrap());
        assert!(in_mq(4, 3).unwrap());
        assert!(in_mq(2, 3).unwrap());
        assert_eq!(in_mq(2, 4), Err(HullError::NotCoprime(2, 4)));
    }

    #[test]
    fn mq_characterization_matches_search() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            for l in (1..=2000).filter(|&l| gcd(l, q) == 1) {
                assert_eq!(in_mq(l, q).unwrap(), in_mq_by_search(l, q), "l={l} q={q}");
            }
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_of_q(2), 0);
        assert_eq!(gamma_of_q(3), 2);
        assert_eq!(gamma_of_q(7), 3);
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_set(5, 1).unwrap(), vec![1, 5]);
        assert_eq!(chi_set(4, 2).unwrap(), vec![8]);
        assert_eq!(chi_set(1, 1).unwrap(), vec![1]);
        for nbar in 1..60 {
            for r in 1..30 {
                chi_set(nbar, r).unwrap();
            }
        }
    }

    #[test]
    fn mq_factorization_examples() {
        assert_eq!(
            mq_factorization(12, 2).unwrap(),
            MqFactorization {
                beta: 2,
                dprime: 1,
                d1: 3
            }
        );
        assert_eq!(mq_factorization(15, 5), Err(HullError::NotCoprime(15, 5)));
        assert_eq!(
            mq_factorization(12, 5).unwrap(),
            MqFactorization {
                beta: 2,
                dprime: 1,
                d1: 3
            }
        );
        assert_eq!(
            mq_factorization(5, 2).unwrap(),
            MqFactorization {
                beta: 0,
                dprime: 5,
                d1: 1
            }
        );
        assert_eq!(
            mq_factorization(1, 2).unwrap(),
            MqFactorization {
                beta: 0,
                dprime: 1,
                d1: 1
            }
        );
    }

    #[test]
    fn structure_examples() {
        let sc = structure_counts(5, 1, 2).unwrap();
        assert_eq!((sc.s, sc.t), (1, 1));
        assert_eq!(sc.pair_degrees(), vec![2]);
        let sc = structure_counts(3, 1, 2).unwrap();
        assert_eq!((sc.s, sc.t), (3, 0));
        assert_eq!(sc.scr_degrees(), vec![1, 1, 1]);
        let sc = structure_counts(1, 1, 7).unwrap();
        assert_eq!((sc.s, sc.t), (1, 0));
    }

    #[test]
    fn b_examples() {
        assert_eq!(b_hull(4, 2, 3).unwrap(), 0);
        assert_eq!(b_hull(5, 1, 2).unwrap(), 1);
        assert_eq!(b_hull(3, 1, 2).unwrap(), 3);
        assert_eq!(b_hull(1, 1, 2).unwrap(), 1);
        assert!(matches!(
            b_hull(1, 2, 2),
            Err(HullError::UnsupportedOrder { .. })
        ));
    }

    #[test]
    fn vanishing_examples() {
        let v = b_is_zero(4, 2, 3).unwrap();
        assert!(v.is_zero);
        assert_eq!(v.clause.to_string(), "v2(nbar)+v2(r) = 3 > gamma = 2");
        for nbar in [1u64, 3, 5, 7, 9, 15, 21] {
            assert!(!b_is_zero(nbar, 1, 2).unwrap().is_zero);
        }
        assert!(!b_is_zero(1, 3, 2).unwrap().is_zero);
    }

    #[test]
    fn full_examples() {
        assert!(b_is_full(3, 1, 2).unwrap());
        assert!(!b_is_full(5, 1, 2).unwrap());
        assert!(b_is_full(1, 1, 2).unwrap());
    }

    #[test]
    fn b_cross_checks_over_grid() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27] {
            let (p, _) = prime_power(q).unwrap();
            for r in divisors(q + 1) {
                for nbar in (1..=120).filter(|n| n % p != 0) {
                    b_hull(nbar, r, q).unwrap();
                }
            }
        }
    }

    #[test]
    fn mq_members_have_singly_even_orders() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            for l in (3..=2000).filter(|&l| gcd(l, q) == 1) {
                if in_mq(l, q).unwrap() {
                    for (p, _) in factorize(l).into_iter().filter(|&(p, _)| p != 2) {
                        assert_eq!(mult_order(q, p).unwrap() % 4, 2, "l={l} p={p} q={q}");
                    }
                }
            }
        }
    }
}
