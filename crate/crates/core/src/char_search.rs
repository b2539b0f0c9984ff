//! Exact extremization of a positive-definite objective over cosets, and the
//! characteristic vector/covector inequality checkers built on it.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::{self, rat, rat_int, Rational};
use crate::equivalence::are_equivalent;
use crate::error::{Error, Result};
use crate::fincke_pohst::Enumerator;
use crate::form::{diagonal_delta, is_char_covector, is_char_vector, Definiteness, QuadraticForm, Sign};

/// Lattice whose translate by the offset forms the coset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulus {
    /// `c + 2 Zⁿ`
    TwoZ,
    /// `c + 2 M Zⁿ` for a nonsingular integer matrix `M`.
    TwoImage(QuadraticForm),
}

#[derive(Debug, Clone, Serialize)]
pub struct CosetProblem {
    pub objective: QuadraticForm,
    pub offset: Vec<i64>,
    pub modulus: Modulus,
}

impl CosetProblem {
    pub fn mod2(objective: QuadraticForm, offset: Vec<i64>) -> Self {
        Self { objective, offset, modulus: Modulus::TwoZ }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetExtremum {
    /// Minimum of the objective, in objective units.
    pub value: i128,
    pub witness: Vec<i64>,
    pub exhaustive: bool,
    /// Objective value of the offset, which bounds the searched ellipsoid.
    pub search_radius: i128,
}

/// Witness order: lexicographic with coordinates ranked `0, 1, -1, 2, -2, …`.
pub fn witness_cmp(a: &[i64], b: &[i64]) -> Ordering {
    let key = |v: i64| (v.unsigned_abs(), v < 0);
    a.iter().map(|&v| key(v)).cmp(b.iter().map(|&v| key(v)))
}

fn basis(p: &CosetProblem) -> Vec<i128> {
    let n = p.offset.len();
    match &p.modulus {
        Modulus::TwoZ => {
            let mut b = vec![0; n * n];
            for i in 0..n {
                b[i * n + i] = 2;
            }
            b
        }
        Modulus::TwoImage(m) => m.flat().iter().map(|&v| 2 * v as i128).collect(),
    }
}

pub(crate) struct CosetSearch {
    n: usize,
    basis: Vec<i128>,
    offset: Vec<i128>,
    pub(crate) engine: Enumerator,
}

impl CosetSearch {
    pub(crate) fn new(p: &CosetProblem) -> Result<Self> {
        let n = p.objective.rank();
        p.objective.check_len(&p.offset)?;
        if let Modulus::TwoImage(m) = &p.modulus {
            if m.rank() != n {
                return Err(Error::Dimension { expected: n, found: m.rank() });
            }
        }
        p.objective.require(Definiteness::Positive)?;
        let a: Vec<i128> = p.objective.flat().iter().map(|&v| v as i128).collect();
        let b = basis(p);
        let c: Vec<i128> = p.offset.iter().map(|&v| v as i128).collect();
        let bt = arith::transpose(n, n, &b);
        let ab = arith::mat_mul(n, n, n, &a, &b)?;
        let gram = arith::mat_mul(n, n, n, &bt, &ab)?;
        let ac = arith::mat_mul(n, n, 1, &a, &c)?;
        let linear = arith::mat_mul(n, n, 1, &bt, &ac)?;
        let constant = arith::mat_mul(1, n, 1, &c, &ac)?[0];
        Ok(Self { n, basis: b, offset: c, engine: Enumerator::new(n, &gram, &linear, constant)? })
    }

    pub(crate) fn point(&self, z: &[i128]) -> Result<Vec<i64>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = self.offset[i];
                for j in 0..n {
                    s += self.basis[i * n + j] * z[j];
                }
                i64::try_from(s).map_err(|_| Error::Overflow)
            })
            .collect()
    }

    pub(crate) fn offset_value(&self) -> Result<i128> {
        self.engine.value(&vec![0; self.n])
    }

    /// All coset points with objective `<= bound`.
    pub(crate) fn points_within(&self, bound: i128) -> Result<Vec<(Vec<i64>, i128)>> {
        let mut out = Vec::new();
        let mut err = None;
        self.engine.search(bound, |z, v| {
            match self.point(z) {
                Ok(x) => out.push((x, v)),
                Err(e) => err = Some(e),
            }
            None
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

/// Exact minimum of `A(x, x)` over the coset, by branch and bound from the offset.
pub fn coset_minimize(p: &CosetProblem) -> Result<CosetExtremum> {
    let s = CosetSearch::new(p)?;
    let radius = s.offset_value()?;
    let mut best: Option<(i128, Vec<i64>)> = None;
    let mut err = None;
    s.engine.search(radius, |z, v| {
        let x = match s.point(z) {
            Ok(x) => x,
            Err(e) => {
                err = Some(e);
                return None;
            }
        };
        let better = match &best {
            None => true,
            Some((bv, bx)) => v < *bv || (v == *bv && witness_cmp(&x, bx) == Ordering::Less),
        };
        if better {
            best = Some((v, x));
        }
        best.as_ref().map(|b| b.0)
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let (value, witness) = best.expect("the offset itself lies in the searched ellipsoid");
    debug_assert_eq!(p.objective.norm(&witness), value);
    Ok(CosetExtremum { value, witness, exhaustive: true, search_radius: radius })
}

/// Verdict for one coset against a conjectured lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub form: QuadraticForm,
    pub coset: Vec<i64>,
    #[serde(with = "arith::serde_rational")]
    pub bound: Rational,
    #[serde(with = "arith::serde_rational")]
    pub achieved: Rational,
    pub holds: bool,
    pub strict: bool,
    pub witness: Vec<i64>,
    /// Whether the form is equivalent to `Δ_δ`.
    pub equality_is_delta: bool,
}

impl ConjectureReport {
    fn new(
        form: &QuadraticForm,
        coset: Vec<i64>,
        bound: Rational,
        achieved: Rational,
        witness: Vec<i64>,
        is_delta: bool,
    ) -> Self {
        Self {
            form: form.clone(),
            coset,
            holds: achieved >= bound,
            strict: achieved > bound,
            bound,
            achieved,
            witness,
            equality_is_delta: is_delta,
        }
    }

    /// The inequality holds, and equality only occurs on `Δ_δ`.
    pub fn consistent(&self) -> bool {
        self.holds && (self.strict || self.equality_is_delta)
    }

    pub fn status(&self) -> &'static str {
        if !self.consistent() {
            "violated"
        } else if self.strict {
            "strict"
        } else {
            "equality"
        }
    }
}

fn is_delta(q: &QuadraticForm, sign: Sign) -> Result<bool> {
    let d = diagonal_delta(q.rank(), q.delta_i64()?, sign)?;
    are_equivalent(q, &d)
}

/// Representatives in `{0,1}ⁿ` of every characteristic-vector coset mod 2.
pub fn char_vector_cosets(q: &QuadraticForm) -> Vec<Vec<i64>> {
    let n = q.rank();
    let a: Vec<u8> = q.flat().iter().map(|v| v.rem_euclid(2) as u8).collect();
    let b: Vec<u8> = q.diag().iter().map(|v| v.rem_euclid(2) as u8).collect();
    let Some((part, kernel)) = arith::gf2_solve(n, &a, &b) else { return Vec::new() };
    let mut out = Vec::with_capacity(1 << kernel.len());
    for mask in 0u64..(1 << kernel.len()) {
        let mut v = part.clone();
        for (i, k) in kernel.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for (x, y) in v.iter_mut().zip(k) {
                    *x ^= y;
                }
            }
        }
        out.push(v.into_iter().map(i64::from).collect());
    }
    out.sort();
    out
}

/// For each characteristic coset: `max Q(x,x) + n` against `1 - δ`.
pub fn check_conjecture_vec(q: &QuadraticForm) -> Result<Vec<ConjectureReport>> {
    q.require(Definiteness::Negative)?;
    let n = q.rank() as i128;
    let delta = q.delta_i64()?;
    let bound = rat_int(1 - delta as i128);
    let neg = q.negated();
    let delta_form = is_delta(q, Sign::Negative)?;
    char_vector_cosets(q)
        .into_iter()
        .map(|coset| {
            let ext = coset_minimize(&CosetProblem::mod2(neg.clone(), coset.clone()))?;
            debug_assert!(is_char_vector(q, &ext.witness)?);
            let achieved = rat_int(n - ext.value);
            Ok(ConjectureReport::new(q, coset, bound.clone(), achieved, ext.witness, delta_form))
        })
        .collect()
}

/// `max Q'(y,y) + n` over characteristic covectors against the parity bound.
pub fn check_conjecture_covec(q: &QuadraticForm) -> Result<ConjectureReport> {
    q.require(Definiteness::Negative)?;
    let n = q.rank() as i64;
    let delta = q.delta_i64()?;
    let bound = if delta % 2 == 1 { rat(delta - 1, delta) } else { rat(1, 1) };
    let coset: Vec<i64> = q.diag().iter().map(|v| v.rem_euclid(2)).collect();
    let objective = q.scaled_dual_objective()?;
    let ext = coset_minimize(&CosetProblem::mod2(objective, coset.clone()))?;
    debug_assert!(is_char_covector(q, &ext.witness)?);
    // Q'(y,y) = -value/δ
    let achieved = rat(n, 1) - Rational::new(BigInt::from(ext.value), BigInt::from(delta));
    Ok(ConjectureReport::new(q, coset, bound, achieved, ext.witness, is_delta(q, Sign::Negative)?))
}

/// The four cosets of `Z²/2Z²`: `max Q(x,x)` against `-1 - δ`.
pub fn check_rank2_strong(q: &QuadraticForm) -> Result<Vec<ConjectureReport>> {
    if q.rank() != 2 {
        return Err(Error::Dimension { expected: 2, found: q.rank() });
    }
    q.require(Definiteness::Negative)?;
    let delta = q.delta_i64()?;
    let bound = rat_int(-1 - delta as i128);
    let neg = q.negated();
    let delta_form = is_delta(q, Sign::Negative)?;
    [[0, 0], [1, 0], [0, 1], [1, 1]]
        .into_iter()
        .map(|c| {
            let ext = coset_minimize(&CosetProblem::mod2(neg.clone(), c.to_vec()))?;
            Ok(ConjectureReport::new(q, c.to_vec(), bound.clone(), rat_int(-ext.value), ext.witness, delta_form))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Det3Report {
    pub form: QuadraticForm,
    pub rank: usize,
    pub char_vec_min: i128,
    pub char_vec_witness: Vec<i64>,
    #[serde(with = "arith::serde_rational")]
    pub char_covec_min: Rational,
    pub char_covec_witness: Vec<i64>,
    /// `vec_min <= n + 2` or `covec_min <= n - 2/3`.
    pub dichotomy_holds: bool,
    /// Both inequalities are equalities.
    pub equality_case: bool,
    /// At least one inequality is strict.
    pub some_strict: bool,
    /// Equivalent to `(n-1)<1> ⊕ <3>`.
    pub diagonal: bool,
}

impl Det3Report {
    /// The inequality holds, and if neither side is strict the form is diagonal.
    pub fn consistent(&self) -> bool {
        self.dichotomy_holds && (self.some_strict || self.diagonal)
    }

    pub fn status(&self) -> &'static str {
        if !self.consistent() {
            "violated"
        } else if self.equality_case {
            "equality"
        } else {
            "strict"
        }
    }
}

pub fn check_det3(q: &QuadraticForm) -> Result<Det3Report> {
    q.require(Definiteness::Positive)?;
    if q.determinant() != &BigInt::from(3) {
        return Err(Error::Precondition(format!("determinant is {}, not 3", q.determinant())));
    }
    let n = q.rank();
    let cosets = char_vector_cosets(q);
    debug_assert_eq!(cosets.len(), 1);
    let vec = coset_minimize(&CosetProblem::mod2(q.clone(), cosets[0].clone()))?;
    let offset: Vec<i64> = q.diag().iter().map(|v| v.rem_euclid(2)).collect();
    let covec = coset_minimize(&CosetProblem::mod2(q.scaled_dual_objective()?, offset))?;
    let covec_min = Rational::new(BigInt::from(covec.value), BigInt::from(3));
    let vec_bound = n as i128 + 2;
    let covec_bound = rat(3 * n as i64 - 2, 3);
    Ok(Det3Report {
        form: q.clone(),
        rank: n,
        dichotomy_holds: vec.value <= vec_bound || covec_min <= covec_bound,
        equality_case: vec.value == vec_bound && covec_min == covec_bound,
        some_strict: vec.value < vec_bound || covec_min < covec_bound,
        diagonal: is_delta(q, Sign::Positive)?,
        char_vec_min: vec.value,
        char_vec_witness: vec.witness,
        char_covec_min: covec_min,
        char_covec_witness: covec.witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> QuadraticForm {
        QuadraticForm::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn coset_minimize_examples() {
        let e = coset_minimize(&CosetProblem::mod2(q(&[&[1, 0], &[0, 1]]), vec![1, 1])).unwrap();
        assert_eq!(e.value, 2);
        assert!(e.witness.iter().all(|v| v.abs() == 1));
        let e = coset_minimize(&CosetProblem::mod2(q(&[&[1, 0], &[0, 3]]), vec![1, 1])).unwrap();
        assert_eq!(e.value, 4);
        let e = coset_minimize(&CosetProblem::mod2(q(&[&[2, 1], &[1, 2]]), vec![0, 0])).unwrap();
        assert_eq!((e.value, e.witness), (0, vec![0, 0]));
        assert!(e.exhaustive);
    }

    #[test]
    fn coset_minimize_far_offset() {
        let e = coset_minimize(&CosetProblem::mod2(q(&[&[1, 0], &[0, 3]]), vec![17, -9])).unwrap();
        assert_eq!((e.value, e.witness), (4, vec![1, 1]));
    }

    #[test]
    fn coset_minimize_dimension_error() {
        let p = CosetProblem::mod2(q(&[&[1, 0], &[0, 1]]), vec![1]);
        assert!(matches!(coset_minimize(&p), Err(Error::Dimension { .. })));
    }

    #[test]
    fn conjecture_vec_examples() {
        let r = check_conjecture_vec(&q(&[&[-1, 0], &[0, -3]])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].achieved, rat(-2, 1));
        assert_eq!(r[0].witness, vec![1, 1]);
        assert!(r[0].holds && !r[0].strict && r[0].equality_is_delta);

        let r = check_conjecture_vec(&q(&[&[-2, -1], &[-1, -2]])).unwrap();
        assert_eq!(r[0].achieved, rat(2, 1));
        assert!(r[0].strict);

        let r = check_conjecture_vec(&q(&[&[-5]])).unwrap();
        assert_eq!(r[0].achieved, rat(-4, 1));
        assert_eq!(r[0].status(), "equality");
    }

    #[test]
    fn even_determinant_has_several_cosets() {
        let r = check_conjecture_vec(&q(&[&[-2]])).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().any(|c| !c.strict) && r.iter().any(|c| c.strict));
    }

    #[test]
    fn conjecture_covec_examples() {
        let r = check_conjecture_covec(&q(&[&[-1, 0], &[0, -3]])).unwrap();
        assert_eq!(r.achieved, rat(2, 3));
        assert_eq!(r.status(), "equality");
        let r = check_conjecture_covec(&q(&[&[-2, -1], &[-1, -2]])).unwrap();
        assert_eq!(r.achieved, rat(2, 1));
        assert!(r.strict);
        let r = check_conjecture_covec(&q(&[&[-2]])).unwrap();
        assert_eq!((r.achieved.clone(), r.bound.clone()), (rat(1, 1), rat(1, 1)));
        assert!(r.equality_is_delta);
    }

    #[test]
    fn rank2_strong_examples() {
        let r = check_rank2_strong(&q(&[&[-1, 0], &[0, -3]])).unwrap();
        assert_eq!(r[3].achieved, rat(-4, 1));
        assert!(!r[3].strict);
        let r = check_rank2_strong(&q(&[&[-2, -1], &[-1, -2]])).unwrap();
        assert_eq!(r[1].achieved, rat(-2, 1));
        assert_eq!(r[1].witness, vec![1, 0]);
        assert!(r.iter().all(|c| c.strict));
        let r = check_rank2_strong(&q(&[&[-1, 0], &[0, -1]])).unwrap();
        assert_eq!(r[3].achieved, rat(-2, 1));
        assert!(check_rank2_strong(&q(&[&[-1]])).is_err());
    }

    #[test]
    fn det3_examples() {
        let r = check_det3(&q(&[&[1, 0], &[0, 3]])).unwrap();
        assert_eq!((r.char_vec_min, r.char_covec_min.clone()), (4, rat(4, 3)));
        assert!(r.equality_case && r.diagonal && r.consistent());
        let r = check_det3(&q(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!(r.char_vec_min, 0);
        assert!(r.some_strict && !r.equality_case);
        let r = check_det3(&QuadraticForm::diagonal(&[1, 1, 3]).unwrap()).unwrap();
        assert_eq!((r.char_vec_min, r.char_covec_min.clone()), (5, rat(7, 3)));
        assert!(r.equality_case && r.diagonal);
        assert!(check_det3(&q(&[&[1, 0], &[0, 1]])).is_err());
    }
}
