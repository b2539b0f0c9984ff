//! Reduced representatives and complete enumeration of definite forms of a
//! given rank and determinant (ranks 1 to 4).
//!
//! Rank 2 uses Lagrange–Gauss reduction. Ranks 3 and 4 scan Gram matrices
//! satisfying necessary conditions for Minkowski reduction:
//!
//! * `a_11 <= a_22 <= ... <= a_nn` and `|2 a_ij| <= a_ii` for `i < j`;
//! * `Q(x) >= a_kk` for every `x ∈ {-1,0,1}ⁿ` with `x_k = 1`;
//! * `a_11 ⋯ a_nn <= λ_n δ` with `λ_3 = 2`, `λ_4 = 4`.
//!
//! Every class has a Minkowski-reduced member, so the scan is complete;
//! duplicates are then merged by the isometry test.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::equivalence::{equivalence_unchecked, fingerprint, Fingerprint};
use crate::error::{Error, Result};
use crate::form::{QuadraticForm, Sign, UnimodularMap};
use crate::par::{self, Execution};

/// `[[a, b], [b, c]]` in the sign-appropriate reduced convention:
/// negative forms satisfy `0 >= 2b >= a >= c`, `a <= -1`; positive forms
/// satisfy `0 <= 2b <= a <= c`, `a >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ReducedForm2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub sign: Sign,
}

impl ReducedForm2 {
    pub fn to_form(&self) -> QuadraticForm {
        QuadraticForm::from_flat(2, vec![self.a, self.b, self.b, self.c])
            .expect("reduced forms are definite")
    }

    pub fn satisfies_convention(&self) -> bool {
        let s = self.sign.factor();
        let (a, b, c) = (s * self.a, s * self.b, s * self.c);
        0 <= 2 * b && 2 * b <= a && a <= c && a >= 1
    }
}

/// Lagrange–Gauss reduction; the returned map satisfies `Pᵀ Q P = reduced`.
pub fn reduce_rank2(q: &QuadraticForm) -> Result<(ReducedForm2, UnimodularMap)> {
    if q.rank() != 2 {
        return Err(Error::Dimension { expected: 2, found: q.rank() });
    }
    let sign = match q.definiteness() {
        crate::Definiteness::Positive => Sign::Positive,
        crate::Definiteness::Negative => Sign::Negative,
        crate::Definiteness::Other => return Err(Error::Definiteness("definite")),
    };
    let s = sign.factor() as i128;
    let (mut a, mut b, mut c) = (s * q.entry(0, 0) as i128, s * q.entry(0, 1) as i128, s * q.entry(1, 1) as i128);
    // basis vectors as columns: e1 = (p[0], p[2]), e2 = (p[1], p[3])
    let mut p: [i128; 4] = [1, 0, 0, 1];
    loop {
        if a > c {
            std::mem::swap(&mut a, &mut c);
            p.swap(0, 1);
            p.swap(2, 3);
        }
        // e2 <- e2 - m e1 with -a < 2b' <= a
        let m = (2 * b + a - 1).div_euclid(2 * a);
        if m != 0 {
            c = c - 2 * m * b + m * m * a;
            b -= m * a;
            p[1] -= m * p[0];
            p[3] -= m * p[2];
        }
        if a <= c {
            break;
        }
    }
    if b < 0 {
        b = -b;
        p[1] = -p[1];
        p[3] = -p[3];
    }
    let to64 = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow);
    let f = sign.factor();
    let red = ReducedForm2 { a: f * to64(a)?, b: f * to64(b)?, c: f * to64(c)?, sign };
    let map = UnimodularMap::new(2, p.iter().map(|&v| to64(v)).collect::<Result<_>>()?)?;
    debug_assert!(red.satisfies_convention());
    Ok((red, map))
}

/// A complete list of pairwise inequivalent forms with the same rank, `|det|` and sign.
#[derive(Debug, Clone, Serialize)]
pub struct FormFamily {
    pub rank: usize,
    pub delta: i64,
    pub sign: Sign,
    pub members: Vec<QuadraticForm>,
}

pub const MAX_ENUM_RANK: usize = 4;

/// Hermite-type constant bounding `a_11 ⋯ a_nn / δ` for Minkowski-reduced forms.
fn product_constant(rank: usize) -> (i64, i64) {
    match rank {
        1 => (1, 1),
        2 => (4, 3),
        3 => (2, 1),
        4 => (4, 1),
        _ => unreachable!(),
    }
}

/// Entry bounds implied by reduction: `(max diagonal product, max a_11)`.
pub fn entry_bounds(rank: usize, delta: i64) -> (i64, i64) {
    let (num, den) = product_constant(rank);
    let prod = num * delta / den;
    let mut a11 = 1;
    while (a11 + 1_i64).pow(rank as u32) <= prod {
        a11 += 1;
    }
    (prod, a11)
}

/// The necessary reduction conditions used by the scan (positive Gram).
pub fn passes_reduction_filter(g: &QuadraticForm) -> bool {
    let n = g.rank();
    for i in 0..n {
        if i + 1 < n && g.entry(i, i) > g.entry(i + 1, i + 1) {
            return false;
        }
        for j in i + 1..n {
            if 2 * g.entry(i, j).abs() > g.entry(i, i) {
                return false;
            }
        }
    }
    let mut x = vec![0i64; n];
    for k in 0..n {
        let total = 3usize.pow(n as u32 - 1);
        for code in 0..total {
            let mut c = code;
            for (i, xi) in x.iter_mut().enumerate() {
                if i == k {
                    *xi = 1;
                } else {
                    *xi = (c % 3) as i64 - 1;
                    c /= 3;
                }
            }
            if g.norm(&x) < g.entry(k, k) as i128 {
                return false;
            }
        }
    }
    true
}

fn diag_choices(rank: usize, delta: i64) -> Vec<Vec<i64>> {
    let (prod, _) = entry_bounds(rank, delta);
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rank: usize, prod: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == rank {
            out.push(cur.clone());
            return;
        }
        let used: i64 = cur.iter().product();
        let lo = cur.last().copied().unwrap_or(1);
        let left = (rank - cur.len()) as u32;
        let mut d = lo;
        // remaining diagonals are all >= d
        while used * d.pow(left) <= prod {
            cur.push(d);
            rec(rank, prod, cur, out);
            cur.pop();
            d += 1;
        }
    }
    rec(rank, prod, &mut cur, &mut out);
    out
}

fn candidates_for_diag(diag: &[i64], delta: i64) -> Vec<QuadraticForm> {
    let n = diag.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut gram = vec![0i64; n * n];
    for i in 0..n {
        gram[i * n + i] = diag[i];
    }
    let mut out = Vec::new();
    fn rec(
        n: usize,
        k: usize,
        pairs: &[(usize, usize)],
        diag: &[i64],
        gram: &mut Vec<i64>,
        delta: i64,
        out: &mut Vec<QuadraticForm>,
    ) {
        if k == pairs.len() {
            if let Ok(f) = QuadraticForm::from_flat(n, gram.clone()) {
                if f.definiteness() == crate::Definiteness::Positive
                    && f.determinant() == &num_bigint::BigInt::from(delta)
                    && passes_reduction_filter(&f)
                {
                    out.push(f);
                }
            }
            return;
        }
        let (i, j) = pairs[k];
        let lim = diag[i] / 2;
        for v in -lim..=lim {
            gram[i * n + j] = v;
            gram[j * n + i] = v;
            rec(n, k + 1, pairs, diag, gram, delta, out);
        }
        gram[i * n + j] = 0;
        gram[j * n + i] = 0;
    }
    rec(n, 0, &pairs, diag, &mut gram, delta, &mut out);
    out
}

fn rank2_reduced(delta: i64) -> Vec<QuadraticForm> {
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= 4 * delta {
        for b in 0..=a / 2 {
            let num = delta + b * b;
            if num % a == 0 && num / a >= a {
                out.push(QuadraticForm::from_flat(2, vec![a, b, b, num / a]).unwrap());
            }
        }
        a += 1;
    }
    out
}

pub fn enumerate_forms(rank: usize, delta: i64, sign: Sign) -> Result<FormFamily> {
    enumerate_forms_with(rank, delta, sign, Execution::default())
}

pub fn enumerate_forms_with(rank: usize, delta: i64, sign: Sign, exec: Execution) -> Result<FormFamily> {
    if rank == 0 || delta < 1 {
        return Err(Error::Precondition("rank >= 1 and δ >= 1 required".into()));
    }
    if rank > MAX_ENUM_RANK {
        return Err(Error::Unsupported(format!("enumeration at rank {rank} (maximum {MAX_ENUM_RANK})")));
    }
    let mut candidates = match rank {
        1 => vec![QuadraticForm::diagonal(&[delta])?],
        2 => rank2_reduced(delta),
        _ => par::map(exec, &diag_choices(rank, delta), |d| candidates_for_diag(d, delta))
            .into_iter()
            .flatten()
            .collect(),
    };
    candidates.sort_by(|x, y| x.flat().cmp(y.flat()));
    candidates.dedup();

    let prints: Vec<Result<Fingerprint>> = par::map(exec, &candidates, fingerprint);
    let mut buckets: BTreeMap<Fingerprint, Vec<QuadraticForm>> = BTreeMap::new();
    for (f, p) in candidates.into_iter().zip(prints) {
        buckets.entry(p?).or_default().push(f);
    }
    let groups: Vec<Vec<QuadraticForm>> = buckets.into_values().collect();
    let reps = par::map(exec, &groups, |group| -> Result<Vec<QuadraticForm>> {
        // group is in lexicographic order, so the first member of each class is canonical
        let mut reps: Vec<QuadraticForm> = Vec::new();
        for f in group {
            let mut seen = false;
            for r in &reps {
                if equivalence_unchecked(f, r)?.is_some() {
                    seen = true;
                    break;
                }
            }
            if !seen {
                reps.push(f.clone());
            }
        }
        Ok(reps)
    });
    let mut members = Vec::new();
    for r in reps {
        members.extend(r?);
    }
    members.sort_by(|x, y| x.flat().cmp(y.flat()));
    for m in &members {
        assert_eq!(m.delta(), num_bigint::BigInt::from(delta));
    }
    if sign == Sign::Negative {
        members = members.iter().map(QuadraticForm::negated).collect();
    }
    Ok(FormFamily { rank, delta, sign, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::are_equivalent;

    fn q(rows: &[&[i64]]) -> QuadraticForm {
        QuadraticForm::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn reduced(f: &QuadraticForm) -> QuadraticForm {
        let (r, p) = reduce_rank2(f).unwrap();
        assert!(r.satisfies_convention());
        assert_eq!(f.transform(&p).unwrap(), r.to_form());
        r.to_form()
    }

    #[test]
    fn rank2_reduction_examples() {
        assert_eq!(reduced(&q(&[&[-1, 0], &[0, -3]])), q(&[&[-1, 0], &[0, -3]]));
        assert_eq!(reduced(&q(&[&[-5, -3], &[-3, -2]])), q(&[&[-1, 0], &[0, -1]]));
        assert_eq!(reduced(&q(&[&[-2, 1], &[1, -2]])), q(&[&[-2, -1], &[-1, -2]]));
        assert_eq!(reduced(&q(&[&[10, 7], &[7, 5]])), q(&[&[1, 0], &[0, 1]]));
    }

    #[test]
    fn rank2_reduction_wrong_rank() {
        assert!(matches!(reduce_rank2(&q(&[&[1]])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn small_families() {
        let f = enumerate_forms(2, 3, Sign::Negative).unwrap();
        assert_eq!(f.members, vec![q(&[&[-1, 0], &[0, -3]]), q(&[&[-2, -1], &[-1, -2]])]);
        let f = enumerate_forms(1, 5, Sign::Negative).unwrap();
        assert_eq!(f.members, vec![q(&[&[-5]])]);
        let f = enumerate_forms(3, 1, Sign::Negative).unwrap();
        assert_eq!(f.members, vec![q(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]])]);
    }

    #[test]
    fn rank5_is_rejected() {
        assert!(matches!(enumerate_forms(5, 1, Sign::Positive), Err(Error::Unsupported(_))));
    }

    #[test]
    fn unimodular_rank4_is_diagonal() {
        let f = enumerate_forms(4, 1, Sign::Positive).unwrap();
        assert_eq!(f.members.len(), 1);
        assert_eq!(f.members[0], QuadraticForm::diagonal(&[1, 1, 1, 1]).unwrap());
    }

    #[test]
    fn members_pairwise_inequivalent() {
        for (rank, delta) in [(3, 7), (3, 12), (4, 3), (4, 4)] {
            let f = enumerate_forms(rank, delta, Sign::Positive).unwrap();
            for (i, a) in f.members.iter().enumerate() {
                for b in &f.members[i + 1..] {
                    assert!(!are_equivalent(a, b).unwrap(), "{a:?} ~ {b:?}");
                }
            }
        }
    }

    #[test]
    fn forms_outside_bounds_fail_the_filter() {
        // scan a box wider than the derived bounds; anything outside must be non-reduced
        for delta in [2, 3, 5] {
            let (prod, a11_max) = entry_bounds(3, delta);
            for d in 1..=6i64 {
                for e in d..=9 {
                    for f in e..=12 {
                        for (x, y, z) in [(0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 1), (-1, 1, 0)] {
                            let g = vec![d, x, y, x, e, z, y, z, f];
                            let Ok(form) = QuadraticForm::from_flat(3, g) else { continue };
                            if form.definiteness() != crate::Definiteness::Positive
                                || form.delta() != num_bigint::BigInt::from(delta)
                            {
                                continue;
                            }
                            if d * e * f > prod || d > a11_max {
                                assert!(!passes_reduction_filter(&form), "{form:?}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn even_unimodular_absent_and_d4_found() {
        // rank 4, det 4: D4 must appear
        let f = enumerate_forms(4, 4, Sign::Positive).unwrap();
        let d4 = q(&[&[2, -1, 0, 0], &[-1, 2, -1, -1], &[0, -1, 2, 0], &[0, -1, 0, 2]]);
        assert!(f.members.iter().any(|m| are_equivalent(m, &d4).unwrap()));
    }
}
