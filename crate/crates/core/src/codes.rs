//! λ-constacyclic codes described by exponent vectors over a shared
//! factorization of `x^n - lambda`, with their Hermitian duals and hulls.
//!
//! Exponents are laid out as `(u_1..u_s, z_1..z_t, w_1..w_t)`: `u_i` for the
//! SCR factors `g_i`, `z_j` for `f_j` and `w_j` for `f_j†`. Every entry lies
//! in `[0, p^nu]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::polyalg::{FactorizationReport, Poly, PolyRing};

#[derive(Debug, Clone)]
pub struct ConstacyclicCode {
    report: Arc<FactorizationReport>,
    exponents: Vec<u64>,
    generator: Poly,
}

/// Serialized code with its dimension data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDoc {
    pub n: u64,
    pub lambda: String,
    pub exponents: Vec<u64>,
    pub g: String,
    pub dim: u64,
    pub hull_dim: u64,
}

fn check_exponents(report: &FactorizationReport, exponents: &[u64]) -> Result<()> {
    let want = report.s() + 2 * report.t();
    if exponents.len() != want {
        return Err(HullError::DomainError(format!(
            "expected {want} exponents (s = {}, t = {}), got {}",
            report.s(),
            report.t(),
            exponents.len()
        )));
    }
    if let Some((index, &value)) = exponents.iter().enumerate().find(|(_, &e)| e > report.pnu) {
        return Err(HullError::ExponentRange {
            index,
            value,
            max: report.pnu,
        });
    }
    Ok(())
}

/// `prod g_i^{e_i} prod f_j^{e_{s+j}} prod (f_j†)^{e_{s+t+j}}`.
fn product_of_factors(report: &FactorizationReport, exponents: &[u64]) -> Poly {
    let ring = report.ring();
    let (s, t) = (report.s(), report.t());
    let factors = report
        .scr_factors
        .iter()
        .chain(report.cr_pairs.iter().map(|(f, _)| f))
        .chain(report.cr_pairs.iter().map(|(_, fd)| fd));
    debug_assert_eq!(exponents.len(), s + 2 * t);
    factors
        .zip(exponents)
        .filter(|(_, &e)| e > 0)
        .fold(Poly::one(), |acc, (f, &e)| ring.mul(&acc, &ring.pow(f, e)))
}

/// Exponent vector of the Hermitian dual: `(p^nu - u, p^nu - w, p^nu - z)`.
pub fn dual_exponents(report: &FactorizationReport, exponents: &[u64]) -> Vec<u64> {
    let (s, t, pnu) = (report.s(), report.t(), report.pnu);
    let (u, rest) = exponents.split_at(s);
    let (z, w) = rest.split_at(t);
    u.iter().chain(w).chain(z).map(|&e| pnu - e).collect()
}

/// Exponent vector of the hull generator `lcm(g, h†)`.
pub fn hull_exponents(report: &FactorizationReport, exponents: &[u64]) -> Vec<u64> {
    let (s, t, pnu) = (report.s(), report.t(), report.pnu);
    let (u, rest) = exponents.split_at(s);
    let (z, w) = rest.split_at(t);
    let scr = u.iter().map(|&u| u.max(pnu - u));
    let first = z.iter().zip(w).map(|(&z, &w)| z.max(pnu - w));
    let second = z.iter().zip(w).map(|(&z, &w)| w.max(pnu - z));
    scr.chain(first).chain(second).collect()
}

/// Hull dimension read directly off the exponents:
/// `n - sum deg(g_i) max(u_i, p^nu - u_i)
///    - sum deg(f_j) (max(z_j, p^nu - w_j) + max(w_j, p^nu - z_j))`.
pub fn hull_dimension_from_exponents(report: &FactorizationReport, exponents: &[u64]) -> u64 {
    let (s, t, pnu) = (report.s(), report.t(), report.pnu);
    let mut removed = 0u64;
    for (g, &u) in report.scr_factors.iter().zip(&exponents[..s]) {
        removed += g.deg() as u64 * u.max(pnu - u);
    }
    for (j, (f, _)) in report.cr_pairs.iter().enumerate() {
        let (z, w) = (exponents[s + j], exponents[s + t + j]);
        removed += f.deg() as u64 * (z.max(pnu - w) + w.max(pnu - z));
    }
    report.n - removed
}

impl ConstacyclicCode {
    /// Builds the code generated by the product of factors with the given exponents.
    pub fn new(report: Arc<FactorizationReport>, exponents: Vec<u64>) -> Result<Self> {
        check_exponents(&report, &exponents)?;
        let order = report.field.element_order(report.lambda)?;
        if order != report.r || !(report.field.q() + 1).is_multiple_of(order) {
            return Err(HullError::UnsupportedOrder {
                r: order,
                q_plus_one: report.field.q() + 1,
            });
        }
        let generator = product_of_factors(&report, &exponents);
        Ok(ConstacyclicCode {
            report,
            exponents,
            generator,
        })
    }

    pub fn report(&self) -> &Arc<FactorizationReport> {
        &self.report
    }

    pub fn n(&self) -> u64 {
        self.report.n
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn generator(&self) -> &Poly {
        &self.generator
    }

    pub fn dimension(&self) -> u64 {
        self.n() - self.generator.deg() as u64
    }

    fn ring(&self) -> PolyRing<'_> {
        self.report.ring()
    }

    /// The Hermitian dual as a code over the same factorization.
    pub fn dual_code(&self) -> ConstacyclicCode {
        let exponents = dual_exponents(&self.report, &self.exponents);
        let generator = product_of_factors(&self.report, &exponents);
        ConstacyclicCode {
            report: Arc::clone(&self.report),
            exponents,
            generator,
        }
    }

    pub fn dual_generator_by_exponents(&self) -> Poly {
        product_of_factors(&self.report, &dual_exponents(&self.report, &self.exponents))
    }

    /// `h†` for `h = (x^n - lambda) / g`.
    pub fn dual_generator_by_dagger(&self) -> Result<Poly> {
        let ring = self.ring();
        let h = ring.div_exact(&self.report.target(), &self.generator)?;
        Ok(ring.monic(&ring.dagger(&h)?))
    }

    /// Generator of the Hermitian dual; both routes must agree.
    pub fn dual_generator(&self) -> Result<Poly> {
        let by_exponents = self.dual_generator_by_exponents();
        let by_dagger = self.dual_generator_by_dagger()?;
        if by_exponents != by_dagger {
            return Err(HullError::InternalInvariantViolation(format!(
                "dual generator mismatch for exponents {:?}",
                self.exponents
            )));
        }
        Ok(by_exponents)
    }

    pub fn hull_generator_by_exponents(&self) -> Poly {
        product_of_factors(&self.report, &hull_exponents(&self.report, &self.exponents))
    }

    /// `lcm(g, h†)` computed with polynomial arithmetic only.
    pub fn hull_generator_by_lcm(&self) -> Result<Poly> {
        Ok(self
            .ring()
            .lcm(&self.generator, &self.dual_generator_by_dagger()?))
    }

    /// Generator of the Hermitian hull; both routes must agree.
    pub fn hull_generator(&self) -> Result<Poly> {
        let by_exponents = self.hull_generator_by_exponents();
        let by_lcm = self.hull_generator_by_lcm()?;
        if by_exponents != by_lcm {
            return Err(HullError::InternalInvariantViolation(format!(
                "hull generator mismatch for exponents {:?}",
                self.exponents
            )));
        }
        Ok(by_exponents)
    }

    pub fn hull_dimension(&self) -> u64 {
        hull_dimension_from_exponents(&self.report, &self.exponents)
    }

    pub fn to_doc(&self) -> CodeDoc {
        let field = &self.report.field;
        CodeDoc {
            n: self.n(),
            lambda: field.format_element(self.report.lambda),
            exponents: self.exponents.clone(),
            g: self.ring().format(&self.generator),
            dim: self.dimension(),
            hull_dim: self.hull_dimension(),
        }
    }
}
