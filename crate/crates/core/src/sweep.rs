//! Grid sweeps over `(q, r | q + 1, n)` producing one [`SweepRow`] per point.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::avgdim::{self, AvgDimReport, BoundClass};
use crate::error::{HullError, Result};
use crate::gf::{FieldElement, FieldSpec};
use crate::numth;
use crate::polyalg::factor_xn_minus_lambda;
use crate::rational::Rational;

/// One CSV row; column order is the field order below.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub q: u64,
    pub p: u64,
    pub nu: u32,
    pub nbar: u64,
    pub r: u64,
    pub gamma: u32,
    pub v2_nbar: u32,
    pub v2_r: u32,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "EH_num")]
    pub eh_num: i64,
    #[serde(rename = "EH_den")]
    pub eh_den: i64,
    pub class: BoundClass,
    pub lower_num: i64,
    pub lower_den: i64,
    #[serde(rename = "r_in_Mq")]
    pub r_in_mq: bool,
    #[serde(rename = "n_in_Mq")]
    pub n_in_mq: bool,
}

fn small_pair(x: &Rational, what: &'static str) -> Result<(i64, i64)> {
    x.to_i64_pair().ok_or(HullError::Overflow(what))
}

impl SweepRow {
    /// Builds the row for one grid point from the closed form.
    pub fn compute(n: u64, r: u64, q: u64) -> Result<Self> {
        let report = avgdim::avg_hull_dim_closed(n, r, q)?;
        let bounds = avgdim::classify_bounds(n, r, q)?;
        Self::from_parts(&report, &bounds)
    }

    fn from_parts(report: &AvgDimReport, bounds: &avgdim::BoundClassification) -> Result<Self> {
        let (eh_num, eh_den) = small_pair(&report.eh, "E_H")?;
        let (lower_num, lower_den) = small_pair(&report.lower, "lower bound")?;
        Ok(SweepRow {
            n: report.n,
            q: report.q,
            p: report.p,
            nu: report.nu,
            nbar: report.nbar,
            r: report.r,
            gamma: bounds.gamma,
            v2_nbar: bounds.v2_nbar,
            v2_r: bounds.v2_r,
            b: report.b,
            eh_num,
            eh_den,
            class: report.bound_class,
            lower_num,
            lower_den,
            r_in_mq: bounds.r_in_mq,
            n_in_mq: bounds.n_in_mq,
        })
    }

    pub fn eh(&self) -> Rational {
        Rational::new(self.eh_num, self.eh_den)
    }

    /// Recomputes this row from its `(n, r, q)` key.
    pub fn recompute(&self) -> Result<Self> {
        Self::compute(self.n, self.r, self.q)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Oracle-check every point whose code count is at most this.
    pub verify_max: Option<u128>,
    /// Worker threads; `None` lets rayon decide.
    pub workers: Option<usize>,
}

/// Grid points `(q, r, n)` in output order.
pub fn grid(qs: &[u64], n_max: u64) -> Result<Vec<(u64, u64, u64)>> {
    let mut qs = qs.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let mut points = Vec::new();
    for &q in &qs {
        if q > crate::gf::MAX_Q || numth::prime_power(q).is_none() {
            return Err(HullError::DomainError(format!(
                "q = {q} is not a supported prime power"
            )));
        }
        for r in numth::divisors(q + 1) {
            points.extend((1..=n_max).map(|n| (q, r, n)));
        }
    }
    if points.is_empty() {
        return Err(HullError::DomainError("sweep grid is empty".into()));
    }
    Ok(points)
}

/// Code count for `(n, r, q)` predicted from the cyclotomic structure.
pub fn predicted_code_count(n: u64, r: u64, q: u64) -> Result<Option<u128>> {
    let (p, _) = numth::prime_power(q).ok_or_else(|| HullError::DomainError(format!("q = {q}")))?;
    let (nbar, _, pnu) = numth::split_p_part(n, p);
    let sc = numth::structure_counts(nbar, r, q)?;
    let len = u32::try_from(sc.s + 2 * sc.t).map_err(|_| HullError::Overflow("factor count"))?;
    Ok((pnu as u128 + 1).checked_pow(len))
}

struct FieldCache {
    fields: HashMap<u64, Arc<FieldSpec>>,
    lambdas: HashMap<(u64, u64), FieldElement>,
}

impl FieldCache {
    fn build(points: &[(u64, u64, u64)]) -> Result<Self> {
        let mut fields = HashMap::new();
        let mut lambdas = HashMap::new();
        for &(q, r, _) in points {
            if let std::collections::hash_map::Entry::Vacant(e) = fields.entry(q) {
                e.insert(Arc::new(FieldSpec::new(q)?));
            }
            if let std::collections::hash_map::Entry::Vacant(e) = lambdas.entry((q, r)) {
                e.insert(fields[&q].find_element_of_order(r)?);
            }
        }
        Ok(FieldCache { fields, lambdas })
    }
}

fn verify_point(row: &SweepRow, cache: &FieldCache, max: u128) -> Result<()> {
    match predicted_code_count(row.n, row.r, row.q)? {
        Some(count) if count <= max => {}
        _ => return Ok(()),
    }
    let field = &cache.fields[&row.q];
    let lambda = cache.lambdas[&(row.q, row.r)];
    let report = match factor_xn_minus_lambda(field, row.n, lambda) {
        Ok(rep) => rep,
        Err(HullError::ScaleLimit { .. }) => return Ok(()),
        Err(e) => return Err(e),
    };
    let oracle = avgdim::bruteforce_full(&report, max)?;
    if oracle != row.eh() {
        return Err(HullError::VerificationMismatch(format!(
            "n={} q={} r={}: closed form {} vs oracle {}",
            row.n,
            row.q,
            row.r,
            row.eh(),
            oracle
        )));
    }
    Ok(())
}

/// Runs the sweep; rows come back ordered by `(q, r, n)`.
pub fn run_sweep(qs: &[u64], n_max: u64, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let points = grid(qs, n_max)?;
    let cache = match opts.verify_max {
        Some(_) => Some(FieldCache::build(&points)?),
        None => None,
    };
    let work = || -> Result<Vec<SweepRow>> {
        points
            .par_iter()
            .map(|&(q, r, n)| {
                let row = SweepRow::compute(n, r, q)?;
                if let (Some(max), Some(cache)) = (opts.verify_max, cache.as_ref()) {
                    verify_point(&row, cache, max)?;
                }
                Ok(row)
            })
            .collect()
    };
    match opts.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| HullError::DomainError(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| HullError::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| HullError::Parse(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|row| row.map_err(|e| HullError::Parse(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_order() {
        let rows = run_sweep(&[2], 8, &SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 16);
        let keys: Vec<_> = rows.iter().map(|r| (r.q, r.r, r.n)).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);

        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "n,q,p,nu,nbar,r,gamma,v2_nbar,v2_r,B,EH_num,EH_den,class,lower_num,lower_den,r_in_Mq,n_in_Mq"
        );
        assert_eq!(
            text.lines().nth(3).unwrap(),
            "3,2,2,0,3,1,0,0,0,3,0,1,Zero,0,1,true,true"
        );
    }

    #[test]
    fn anchor_row() {
        let rows = run_sweep(&[3], 4, &SweepOptions::default()).unwrap();
        let row = rows.iter().find(|r| r.n == 4 && r.r == 2).unwrap();
        assert_eq!((row.b, row.eh_num, row.eh_den), (0, 1, 1));
        assert_eq!(row.class, BoundClass::LowerQuarter);
    }

    #[test]
    fn csv_round_trip_recomputes() {
        let opts = SweepOptions {
            verify_max: Some(10_000),
            workers: Some(2),
        };
        let rows = run_sweep(&[2, 3, 4], 12, &opts).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        for row in &back {
            assert_eq!(&row.recompute().unwrap(), row);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let one = run_sweep(
            &[5, 4],
            10,
            &SweepOptions {
                verify_max: None,
                workers: Some(1),
            },
        );
        let many = run_sweep(
            &[4, 5],
            10,
            &SweepOptions {
                verify_max: None,
                workers: Some(4),
            },
        );
        assert_eq!(one.unwrap(), many.unwrap());
    }

    #[test]
    fn empty_or_bad_grid() {
        assert!(matches!(
            run_sweep(&[], 5, &SweepOptions::default()),
            Err(HullError::DomainError(_))
        ));
        assert!(matches!(
            run_sweep(&[2], 0, &SweepOptions::default()),
            Err(HullError::DomainError(_))
        ));
        assert!(matches!(
            run_sweep(&[6], 3, &SweepOptions::default()),
            Err(HullError::DomainError(_))
        ));
    }

    #[test]
    fn predicted_count_matches_factorization() {
        let field = Arc::new(FieldSpec::new(3).unwrap());
        for r in [1u64, 2, 4] {
            let lambda = field.find_element_of_order(r).unwrap();
            for n in 1..=15 {
                let rep = factor_xn_minus_lambda(&field, n, lambda).unwrap();
                assert_eq!(
                    predicted_code_count(n, r, 3).unwrap(),
                    avgdim::code_count(&rep)
                );
            }
        }
    }
}
