//! Sweeps of the inequality checkers over every enumerated form of a family.

use serde::Serialize;

use crate::char_search::{check_conjecture_covec, check_conjecture_vec, check_det3, check_rank2_strong, ConjectureReport};
use crate::error::{Error, Result};
use crate::form::QuadraticForm;
use crate::par::{self, Execution};
use crate::reduction::{enumerate_forms_with, MAX_ENUM_RANK};
use crate::report::{Status, Subject, VerdictRecord};
use crate::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Characteristic vectors of negative forms, every coset.
    Vec,
    /// Characteristic covectors of negative forms.
    Covec,
    /// All four mod-2 cosets of negative rank-2 forms.
    Rank2,
    /// Positive determinant-3 forms.
    Det3,
}

impl Check {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vec" => Ok(Self::Vec),
            "covec" => Ok(Self::Covec),
            "rank2" => Ok(Self::Rank2),
            "det3" => Ok(Self::Det3),
            _ => Err(Error::Parse(format!("unknown check '{s}' (vec, covec, rank2, det3)"))),
        }
    }

    pub fn operation(self) -> &'static str {
        match self {
            Self::Vec => "check-conjecture-vec",
            Self::Covec => "check-conjecture-covec",
            Self::Rank2 => "check-rank2",
            Self::Det3 => "check-det3",
        }
    }

    fn sign(self) -> Sign {
        match self {
            Self::Det3 => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignSpec {
    pub check: Check,
    pub ranks: Vec<usize>,
    pub dets: Vec<i64>,
}

impl CampaignSpec {
    /// Ranks `1..=max_rank`, determinants `1..=det_max` (`3` only for det3).
    pub fn up_to(check: Check, max_rank: usize, det_max: i64) -> Self {
        let dets = match check {
            Check::Det3 => vec![3],
            _ => (1..=det_max).collect(),
        };
        let ranks = match check {
            Check::Rank2 => vec![2],
            _ => (1..=max_rank).collect(),
        };
        Self { check, ranks, dets }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignSummary {
    pub forms: usize,
    pub violations: usize,
    pub equalities: usize,
}

pub fn aggregate_status(reports: &[ConjectureReport]) -> Status {
    if reports.iter().any(|r| !r.consistent()) {
        Status::Violated
    } else if reports.iter().all(|r| r.strict) {
        Status::Strict
    } else {
        Status::Equality
    }
}

fn status_of(s: &str) -> Status {
    Status::parse(s).unwrap_or(Status::Error)
}

/// Runs one checker on one form.
pub fn check_form(check: Check, q: &QuadraticForm) -> Result<VerdictRecord> {
    let subject = Subject::form(q);
    let op = check.operation();
    Ok(match check {
        Check::Vec => {
            let r = check_conjecture_vec(q)?;
            VerdictRecord::new(subject, op, aggregate_status(&r), &r)
        }
        Check::Covec => {
            let r = check_conjecture_covec(q)?;
            VerdictRecord::new(subject, op, status_of(r.status()), &r)
        }
        Check::Rank2 => {
            let r = check_rank2_strong(q)?;
            VerdictRecord::new(subject, op, aggregate_status(&r), &r)
        }
        Check::Det3 => {
            let r = check_det3(q)?;
            VerdictRecord::new(subject, op, status_of(r.status()), &r)
        }
    })
}

/// Every enumerated form of the family, checked in order of (rank, δ,
/// canonical member). Output order does not depend on the execution mode.
pub fn run_campaign(spec: &CampaignSpec, exec: Execution) -> Result<(Vec<VerdictRecord>, CampaignSummary)> {
    for &r in &spec.ranks {
        if r == 0 || r > MAX_ENUM_RANK {
            return Err(Error::Unsupported(format!("rank {r}: enumeration supports ranks 1..={MAX_ENUM_RANK}")));
        }
    }
    let mut forms = Vec::new();
    for &rank in &spec.ranks {
        for &d in &spec.dets {
            forms.extend(enumerate_forms_with(rank, d, spec.check.sign(), exec)?.members);
        }
    }
    let records = par::map(exec, &forms, |q| check_form(spec.check, q)).into_iter().collect::<Result<Vec<_>>>()?;
    let summary = CampaignSummary {
        forms: records.len(),
        violations: records.iter().filter(|r| r.is_violation()).count(),
        equalities: records.iter().filter(|r| r.status == Status::Equality).count(),
    };
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_vec_sweep() {
        let (recs, s) = run_campaign(&CampaignSpec::up_to(Check::Vec, 2, 6), Execution::Sequential).unwrap();
        assert_eq!(s.violations, 0);
        assert_eq!(recs.len(), s.forms);
        assert!(s.equalities >= 6);
    }

    #[test]
    fn modes_agree() {
        let spec = CampaignSpec::up_to(Check::Covec, 2, 8);
        let (a, _) = run_campaign(&spec, Execution::Sequential).unwrap();
        let (b, _) = run_campaign(&spec, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rank_limit() {
        let spec = CampaignSpec { check: Check::Vec, ranks: vec![5], dets: vec![1] };
        assert!(run_campaign(&spec, Execution::Sequential).is_err());
    }
}
