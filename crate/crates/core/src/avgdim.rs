//! Average Hermitian hull dimension `E_H(n, lambda, q^2)`.
//!
//! The closed form only needs `(n, r, q)`: it combines the per-factor
//! expectations with the SCR degree total `B` from [`numth::b_hull`]. The
//! brute-force oracle instead factors `x^n - lambda` and averages the hull
//! dimension over every exponent vector.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codes::hull_dimension_from_exponents;
use crate::error::{HullError, Result};
use crate::gf::{FieldElement, FieldSpec};
use crate::numth;
use crate::polyalg::{factor_xn_minus_lambda, FactorizationReport};
use crate::rational::Rational;

/// Default cap on the number of codes the oracle will enumerate.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 10_000_000;

/// Splits a prime power `p^nu` into `(p, nu)`; `1` maps to `(1, 0)`.
fn prime_power_parts(pnu: u64) -> Result<(u64, u32)> {
    match pnu {
        0 => Err(HullError::DomainError("p^nu must be >= 1".into())),
        1 => Ok((1, 0)),
        _ => numth::prime_power(pnu)
            .ok_or_else(|| HullError::DomainError(format!("{pnu} is not a prime power"))),
    }
}

/// 1 exactly when `p^nu` is even, i.e. `p = 2` and `nu >= 1`.
fn delta(p: u64, nu: u32) -> i64 {
    i64::from(p == 2 && nu >= 1)
}

/// `E(max{u, p^nu - u})` for `u` uniform on `[0, p^nu]`:
/// `(3 p^nu + 1) / 4 - delta / (4 (p^nu + 1))`.
pub fn expectation_max_self(pnu: u64) -> Result<Rational> {
    let (p, nu) = prime_power_parts(pnu)?;
    let m = pnu as i64;
    Ok(Rational::new(3 * m + 1, 4) - Rational::new(delta(p, nu), 4 * (m + 1)))
}

/// `E(max{z, p^nu - w})` for independent `z, w` uniform on `[0, p^nu]`:
/// `p^nu (4 p^nu + 5) / (6 (p^nu + 1))`.
pub fn expectation_max_pair(pnu: u64) -> Result<Rational> {
    prime_power_parts(pnu)?;
    let m = pnu as i64;
    Ok(Rational::new(m * (4 * m + 5), 6 * (m + 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundClass {
    Zero,
    LowerEighth,
    LowerSixth,
    LowerQuarter,
}

impl BoundClass {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundClass::Zero => "Zero",
            BoundClass::LowerEighth => "LowerEighth",
            BoundClass::LowerSixth => "LowerSixth",
            BoundClass::LowerQuarter => "LowerQuarter",
        }
    }

    /// Lower bound as a fraction of `n`.
    pub fn lower_fraction(self) -> Rational {
        match self {
            BoundClass::Zero => Rational::zero(),
            BoundClass::LowerEighth => Rational::new(1, 8),
            BoundClass::LowerSixth => Rational::new(1, 6),
            BoundClass::LowerQuarter => Rational::new(1, 4),
        }
    }
}

impl fmt::Display for BoundClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundClass {
    type Err = HullError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Zero" => Ok(BoundClass::Zero),
            "LowerEighth" => Ok(BoundClass::LowerEighth),
            "LowerSixth" => Ok(BoundClass::LowerSixth),
            "LowerQuarter" => Ok(BoundClass::LowerQuarter),
            other => Err(HullError::Parse(format!("unknown bound class {other:?}"))),
        }
    }
}

/// The condition that selected a [`BoundClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundClause {
    /// `v2(nbar) + v2(r) <= gamma` and `r, n` in `M_q`.
    BothInMq,
    /// `r` even, valuations within `gamma`, `r` in `M_q`, `n` not in `M_q`.
    EvenOrderLengthOutside,
    /// `r` even and `v2(nbar) + v2(r) > gamma`.
    ValuationExceedsGamma,
    /// `r` odd, `r` in `M_q`, `n` not in `M_q`.
    OddOrderLengthOutside,
    /// `r` not in `M_q`.
    OrderOutside,
}

impl fmt::Display for BoundClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundClause::BothInMq => "v2(nbar)+v2(r) <= gamma and r, n in M_q",
            BoundClause::EvenOrderLengthOutside => {
                "r even, v2(nbar)+v2(r) <= gamma, r in M_q, n not in M_q"
            }
            BoundClause::ValuationExceedsGamma => "r even, v2(nbar)+v2(r) > gamma",
            BoundClause::OddOrderLengthOutside => "r odd, r in M_q, n not in M_q",
            BoundClause::OrderOutside => "r not in M_q",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundClassification {
    pub class: BoundClass,
    pub clause: BoundClause,
    pub gamma: u32,
    pub v2_nbar: u32,
    pub v2_r: u32,
    pub r_in_mq: bool,
    /// Membership of `n` itself; false whenever `p | n`.
    pub n_in_mq: bool,
    pub lower: Rational,
    pub upper: Rational,
}

/// Lower/upper bound class for `E_H(n, lambda, q^2)` with `ord(lambda) = r`.
pub fn classify_bounds(n: u64, r: u64, q: u64) -> Result<BoundClassification> {
    numth::check_order_params(r, q)?;
    if n == 0 {
        return Err(HullError::DomainError("length n must be >= 1".into()));
    }
    let (p, _) = numth::prime_power(q).expect("checked above");
    let (nbar, _, _) = numth::split_p_part(n, p);
    let gamma = numth::gamma_of_q(q);
    let (v2_nbar, v2_r) = (numth::v2(nbar), numth::v2(r));
    let r_in_mq = numth::in_mq(r, q)?;
    let n_in_mq = numth::in_mq_or_false(n, q);
    let within = v2_nbar + v2_r <= gamma;

    let (class, clause) = if within && r_in_mq && n_in_mq {
        (BoundClass::Zero, BoundClause::BothInMq)
    } else if !r_in_mq {
        (BoundClass::LowerQuarter, BoundClause::OrderOutside)
    } else if r.is_multiple_of(2) {
        if within {
            (BoundClass::LowerSixth, BoundClause::EvenOrderLengthOutside)
        } else {
            (BoundClass::LowerQuarter, BoundClause::ValuationExceedsGamma)
        }
    } else {
        (BoundClass::LowerEighth, BoundClause::OddOrderLengthOutside)
    };
    let n_rat = Rational::from(n);
    Ok(BoundClassification {
        class,
        clause,
        gamma,
        v2_nbar,
        v2_r,
        r_in_mq,
        n_in_mq,
        lower: &n_rat * &class.lower_fraction(),
        upper: &n_rat * &Rational::new(1, 3),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AvgDimReport {
    pub n: u64,
    pub q: u64,
    pub r: u64,
    pub p: u64,
    pub nu: u32,
    pub pnu: u64,
    pub nbar: u64,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "EH")]
    pub eh: Rational,
    pub bound_class: BoundClass,
    pub clause: String,
    pub lower: Rational,
    pub upper: Rational,
    #[serde(rename = "oracle_EH", skip_serializing_if = "Option::is_none")]
    pub oracle_eh: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_agrees: Option<bool>,
}

/// `n (1/3 - 1/(6(p^nu+1))) - B ((p^nu+1)/12 + (2 - 3 delta)/(12 (p^nu+1)))`.
pub fn closed_form_value(n: u64, p: u64, nu: u32, pnu: u64, b: u64) -> Rational {
    let m = pnu as i64;
    let d = delta(p, nu);
    let per_symbol = Rational::new(1, 3) - Rational::new(1, 6 * (m + 1));
    let per_scr = Rational::new(m + 1, 12) + Rational::new(2 - 3 * d, 12 * (m + 1));
    &Rational::from(n) * &per_symbol - &Rational::from(b) * &per_scr
}

/// Exact `E_H(n, lambda, q^2)` for `lambda` of order `r | q + 1`.
pub fn avg_hull_dim_closed(n: u64, r: u64, q: u64) -> Result<AvgDimReport> {
    let bounds = classify_bounds(n, r, q)?;
    let (p, _) = numth::prime_power(q).expect("classify_bounds checked q");
    let (nbar, nu, pnu) = numth::split_p_part(n, p);
    let b = numth::b_hull(nbar, r, q)?;
    let eh = closed_form_value(n, p, nu, pnu, b);

    let violation = |msg: String| Err(HullError::InternalInvariantViolation(msg));
    if eh >= bounds.upper {
        return violation(format!("E_H = {eh} is not below n/3 for n = {n}"));
    }
    if nu == 0 && eh != &Rational::from(nbar - b) / &Rational::from_int(4) {
        return violation(format!("E_H = {eh} != (nbar - B)/4 for coprime n = {n}"));
    }
    if b == 0 {
        let m = pnu as i64;
        let no_scr = &Rational::from(n) * &(Rational::new(1, 3) - Rational::new(1, 6 * (m + 1)));
        if eh != no_scr {
            return violation(format!("E_H = {eh} but B = 0 predicts {no_scr}"));
        }
    }
    Ok(AvgDimReport {
        n,
        q,
        r,
        p,
        nu,
        pnu,
        nbar,
        b,
        eh,
        bound_class: bounds.class,
        clause: bounds.clause.to_string(),
        lower: bounds.lower,
        upper: bounds.upper,
        oracle_eh: None,
        oracle_agrees: None,
    })
}

impl AvgDimReport {
    /// Attaches an oracle value and whether it matches the closed form.
    pub fn with_oracle(mut self, oracle: Rational) -> Self {
        self.oracle_agrees = Some(oracle == self.eh);
        self.oracle_eh = Some(oracle);
        self
    }
}

/// Number of λ-constacyclic codes, `(p^nu + 1)^(s + 2t)`; `None` on overflow.
pub fn code_count(report: &FactorizationReport) -> Option<u128> {
    let len = (report.s() + 2 * report.t()) as u32;
    (report.pnu as u128 + 1).checked_pow(len)
}

/// Mean hull dimension over every exponent vector, enumerated one code at a time.
pub fn bruteforce_full(report: &FactorizationReport, limit: u128) -> Result<Rational> {
    let count = code_count(report).unwrap_or(u128::MAX);
    if count > limit {
        return Err(HullError::ScaleLimit {
            what: "code count",
            count,
            limit,
        });
    }
    let len = report.s() + 2 * report.t();
    let mut exps = vec![0u64; len];
    let mut total: u128 = 0;
    loop {
        total += hull_dimension_from_exponents(report, &exps) as u128;
        let mut i = 0;
        while i < len && exps[i] == report.pnu {
            exps[i] = 0;
            i += 1;
        }
        if i == len {
            break;
        }
        exps[i] += 1;
    }
    let total = i64::try_from(total).map_err(|_| HullError::Overflow("hull dimension total"))?;
    let count = i64::try_from(count).map_err(|_| HullError::Overflow("code count"))?;
    Ok(Rational::new(total, count))
}

/// Mean hull dimension using independence across factors: each SCR factor
/// and each pair is averaged by enumerating its own exponents.
pub fn bruteforce_factored(report: &FactorizationReport) -> Rational {
    let pnu = report.pnu;
    let values = pnu + 1;
    let self_sum: u64 = (0..=pnu).map(|u| u.max(pnu - u)).sum();
    let pair_sum: u64 = (0..=pnu)
        .flat_map(|z| (0..=pnu).map(move |w| z.max(pnu - w) + w.max(pnu - z)))
        .sum();
    let mean_self = Rational::new(self_sum as i64, values as i64);
    let mean_pair = Rational::new(pair_sum as i64, (values * values) as i64);
    let scr_deg = Rational::from(report.scr_degree());
    let pair_deg = Rational::from(
        report
            .cr_pairs
            .iter()
            .map(|(f, _)| f.deg() as u64)
            .sum::<u64>(),
    );
    Rational::from(report.n) - &scr_deg * &mean_self - &pair_deg * &mean_pair
}

/// Oracle value of `E_H(n, lambda, q^2)` by full enumeration of all codes.
pub fn avg_hull_dim_bruteforce(
    field: &Arc<FieldSpec>,
    n: u64,
    lambda: FieldElement,
    limit: u128,
) -> Result<Rational> {
    let report = factor_xn_minus_lambda(field, n, lambda)?;
    bruteforce_full(&report, limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_self(pnu: u64) -> Rational {
        let sum: u64 = (0..=pnu).map(|u| u.max(pnu - u)).sum();
        Rational::new(sum as i64, (pnu + 1) as i64)
    }

    fn brute_pair(pnu: u64) -> Rational {
        let sum: u64 = (0..=pnu)
            .flat_map(|z| (0..=pnu).map(move |w| z.max(pnu - w)))
            .sum();
        Rational::new(sum as i64, ((pnu + 1) * (pnu + 1)) as i64)
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(expectation_max_self(1).unwrap(), Rational::from_int(1));
        assert_eq!(expectation_max_self(2).unwrap(), Rational::new(5, 3));
        assert_eq!(expectation_max_self(3).unwrap(), Rational::new(5, 2));
        assert_eq!(expectation_max_pair(1).unwrap(), Rational::new(3, 4));
        assert_eq!(expectation_max_pair(2).unwrap(), Rational::new(13, 9));
        assert_eq!(expectation_max_pair(4).unwrap(), Rational::new(14, 5));
        assert!(expectation_max_self(0).is_err());
        assert!(expectation_max_pair(6).is_err());
    }

    #[test]
    fn expectations_match_enumeration() {
        for pnu in [1u64, 2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64] {
            assert_eq!(
                expectation_max_self(pnu).unwrap(),
                brute_self(pnu),
                "pnu={pnu}"
            );
            assert_eq!(
                expectation_max_pair(pnu).unwrap(),
                brute_pair(pnu),
                "pnu={pnu}"
            );
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(avg_hull_dim_closed(3, 1, 2).unwrap().eh, Rational::zero());
        assert_eq!(
            avg_hull_dim_closed(5, 1, 2).unwrap().eh,
            Rational::from_int(1)
        );
        assert_eq!(
            avg_hull_dim_closed(6, 1, 2).unwrap().eh,
            Rational::from_int(1)
        );
        let rep = avg_hull_dim_closed(4, 2, 3).unwrap();
        assert_eq!(rep.b, 0);
        assert_eq!(rep.eh, Rational::from_int(1));
        assert_eq!(rep.bound_class, BoundClass::LowerQuarter);
        assert!(matches!(
            avg_hull_dim_closed(4, 3, 3),
            Err(HullError::UnsupportedOrder { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let c = classify_bounds(3, 1, 2).unwrap();
        assert_eq!(c.class, BoundClass::Zero);
        let c = classify_bounds(5, 1, 2).unwrap();
        assert_eq!(c.class, BoundClass::LowerEighth);
        assert!(c.lower <= Rational::from_int(1) && Rational::from_int(1) < c.upper);
        let c = classify_bounds(4, 2, 3).unwrap();
        assert_eq!(c.class, BoundClass::LowerQuarter);
        assert_eq!(c.clause, BoundClause::ValuationExceedsGamma);
        assert_eq!(c.lower, Rational::from_int(1));
    }

    #[test]
    fn oracle_examples() {
        let f4 = Arc::new(FieldSpec::new(2).unwrap());
        let one = FieldElement::ONE;
        let limit = DEFAULT_ENUMERATION_LIMIT;
        assert_eq!(
            avg_hull_dim_bruteforce(&f4, 3, one, limit).unwrap(),
            Rational::zero()
        );
        assert_eq!(
            avg_hull_dim_bruteforce(&f4, 5, one, limit).unwrap(),
            Rational::from_int(1)
        );
        assert_eq!(
            avg_hull_dim_bruteforce(&f4, 1, one, limit).unwrap(),
            Rational::zero()
        );
        let err = avg_hull_dim_bruteforce(&f4, 15, one, 100).unwrap_err();
        assert_eq!(
            err,
            HullError::ScaleLimit {
                what: "code count",
                count: 512,
                limit: 100
            }
        );
    }

    #[test]
    fn factored_oracle_matches_full() {
        for q in [2u64, 3, 4] {
            let field = Arc::new(FieldSpec::new(q).unwrap());
            for r in numth::divisors(q + 1) {
                let lambda = field.find_element_of_order(r).unwrap();
                for n in 1..=12 {
                    let rep = factor_xn_minus_lambda(&field, n, lambda).unwrap();
                    let full = bruteforce_full(&rep, DEFAULT_ENUMERATION_LIMIT).unwrap();
                    assert_eq!(bruteforce_factored(&rep), full, "q={q} r={r} n={n}");
                }
            }
        }
    }

    #[test]
    fn report_serializes_rationals() {
        let rep = avg_hull_dim_closed(6, 1, 2)
            .unwrap()
            .with_oracle(Rational::from_int(1));
        let json = serde_json::to_value(&rep).unwrap();
        assert_eq!(json["EH"]["num"], 1);
        assert_eq!(json["EH"]["den"], 1);
        assert_eq!(json["EH"]["decimal"], "1.000000");
        assert_eq!(json["oracle_agrees"], true);
        assert_eq!(json["bound_class"], "LowerEighth");
    }
}
