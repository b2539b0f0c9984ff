//! Isometry search between definite forms.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fincke_pohst::Enumerator;
use crate::form::{QuadraticForm, UnimodularMap};

/// Norm bound used for the representation-number fingerprint.
pub const FINGERPRINT_NORM: i64 = 6;

fn enumerator(q: &QuadraticForm) -> Result<Enumerator> {
    let n = q.rank();
    let g: Vec<i128> = q.flat().iter().map(|&v| v as i128).collect();
    Enumerator::new(n, &g, &vec![0; n], 0)
}

/// Number of vectors of each norm `0..=max_norm` for the positive part of `q`.
pub fn representation_counts(q: &QuadraticForm, max_norm: i64) -> Result<Vec<u64>> {
    let p = q.positive_part()?;
    let mut counts = vec![0u64; max_norm.max(0) as usize + 1];
    enumerator(&p)?.search(max_norm as i128, |_, v| {
        counts[v as usize] += 1;
        None
    })?;
    Ok(counts)
}

/// Vectors of the positive part of `q` grouped by norm, up to `max_norm`.
pub fn short_vectors(q: &QuadraticForm, max_norm: i64) -> Result<BTreeMap<i64, Vec<Vec<i64>>>> {
    let p = q.positive_part()?;
    let mut out: BTreeMap<i64, Vec<Vec<i64>>> = BTreeMap::new();
    let mut overflow = false;
    enumerator(&p)?.search(max_norm as i128, |z, v| {
        let mut vec = Vec::with_capacity(z.len());
        for &c in z {
            match i64::try_from(c) {
                Ok(c) => vec.push(c),
                Err(_) => overflow = true,
            }
        }
        out.entry(v as i64).or_default().push(vec);
        None
    })?;
    if overflow {
        return Err(Error::Overflow);
    }
    for list in out.values_mut() {
        list.sort();
    }
    Ok(out)
}

/// Cheap invariants that must agree for equivalent forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    pub rank: usize,
    pub det: String,
    pub sign: i8,
    pub counts: Vec<u64>,
}

pub fn fingerprint(q: &QuadraticForm) -> Result<Fingerprint> {
    let sign = match q.definiteness() {
        crate::form::Definiteness::Positive => 1,
        crate::form::Definiteness::Negative => -1,
        crate::form::Definiteness::Other => return Err(Error::Definiteness("definite")),
    };
    Ok(Fingerprint {
        rank: q.rank(),
        det: q.determinant().to_string(),
        sign,
        counts: representation_counts(q, FINGERPRINT_NORM)?,
    })
}

/// Finds `P` with `Pᵀ Q2 P = Q1`, or `None` when the forms are inequivalent.
pub fn equivalence(q1: &QuadraticForm, q2: &QuadraticForm) -> Result<Option<UnimodularMap>> {
    if q1.rank() != q2.rank() {
        return Err(Error::Dimension { expected: q1.rank(), found: q2.rank() });
    }
    if !q1.is_definite() || !q2.is_definite() {
        return Err(Error::Definiteness("definite"));
    }
    if q1.definiteness() != q2.definiteness() || q1.determinant() != q2.determinant() {
        return Ok(None);
    }
    if representation_counts(q1, FINGERPRINT_NORM)? != representation_counts(q2, FINGERPRINT_NORM)? {
        return Ok(None);
    }
    equivalence_unchecked(q1, q2)
}

/// Backtracking search without the fingerprint pre-filter.
pub(crate) fn equivalence_unchecked(
    q1: &QuadraticForm,
    q2: &QuadraticForm,
) -> Result<Option<UnimodularMap>> {
    let n = q1.rank();
    let a1 = q1.positive_part()?;
    let a2 = q2.positive_part()?;
    let max_norm = (0..n).map(|i| a1.entry(i, i)).max().unwrap_or(0);
    let vectors = short_vectors(&a2, max_norm)?;
    // images A2·v alongside each candidate for fast inner products
    let mut candidates: Vec<Vec<(Vec<i64>, Vec<i128>)>> = Vec::with_capacity(n);
    for j in 0..n {
        let list = vectors.get(&a1.entry(j, j)).cloned().unwrap_or_default();
        if list.is_empty() {
            return Ok(None);
        }
        candidates.push(list.into_iter().map(|v| { let av = a2.apply(&v); (v, av) }).collect());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (candidates[j].len(), j));

    let mut chosen: Vec<Option<usize>> = vec![None; n];
    if !backtrack(&a1, &candidates, &order, 0, &mut chosen) {
        return Ok(None);
    }
    let mut p = vec![0i64; n * n];
    for j in 0..n {
        let v = &candidates[j][chosen[j].unwrap()].0;
        for i in 0..n {
            p[i * n + j] = v[i];
        }
    }
    let map = UnimodularMap::new(n, p)?;
    debug_assert_eq!(&q2.transform(&map)?, q1);
    Ok(Some(map))
}

fn backtrack(
    a1: &QuadraticForm,
    cands: &[Vec<(Vec<i64>, Vec<i128>)>],
    order: &[usize],
    depth: usize,
    chosen: &mut Vec<Option<usize>>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let j = order[depth];
    'next: for (idx, (v, _)) in cands[j].iter().enumerate() {
        for &prev in &order[..depth] {
            let (_, aw) = &cands[prev][chosen[prev].unwrap()];
            let ip: i128 = aw.iter().zip(v).map(|(a, &b)| a * b as i128).sum();
            if ip != a1.entry(prev, j) as i128 {
                continue 'next;
            }
        }
        chosen[j] = Some(idx);
        if backtrack(a1, cands, order, depth + 1, chosen) {
            return true;
        }
        chosen[j] = None;
    }
    false
}

pub fn are_equivalent(q1: &QuadraticForm, q2: &QuadraticForm) -> Result<bool> {
    Ok(equivalence(q1, q2)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{diagonal_delta, Sign};

    fn q(rows: &[&[i64]]) -> QuadraticForm {
        QuadraticForm::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn reflexive_gives_a_witness() {
        let a = q(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let p = equivalence(&a, &a).unwrap().unwrap();
        assert_eq!(a.transform(&p).unwrap(), a);
    }

    #[test]
    fn identity_map_for_diagonal_unit_form() {
        let i2 = q(&[&[1, 0], &[0, 1]]);
        let p = equivalence(&i2, &i2).unwrap().unwrap();
        assert_eq!(i2.transform(&p).unwrap(), i2);
    }

    #[test]
    fn det3_binary_forms_are_distinct() {
        let d = q(&[&[-1, 0], &[0, -3]]);
        let a2 = q(&[&[-2, -1], &[-1, -2]]);
        assert!(equivalence(&d, &a2).unwrap().is_none());
        assert!(equivalence_unchecked(&d, &a2).unwrap().is_none());
    }

    #[test]
    fn example_matrix_represents_diagonal() {
        let m = q(&[&[-1, 1, 1, 1], &[1, -2, 0, 0], &[1, 0, -3, 0], &[1, 0, 0, -7]]);
        let delta = diagonal_delta(4, 1, Sign::Negative).unwrap();
        let p = equivalence(&m, &delta).unwrap().expect("equivalent");
        assert_eq!(delta.transform(&p).unwrap(), m);
    }

    #[test]
    fn rank_mismatch_is_an_error() {
        let a = q(&[&[1]]);
        let b = q(&[&[1, 0], &[0, 1]]);
        assert!(matches!(equivalence(&a, &b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn counts_of_a2() {
        let a2 = q(&[&[2, 1], &[1, 2]]);
        assert_eq!(representation_counts(&a2, 2).unwrap(), vec![1, 0, 6]);
    }
}
