//! Integral quadratic forms: Gram matrices, determinants, definiteness,
//! the induced dual form, and characteristic (co)vectors.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Definiteness {
    Positive,
    Negative,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn factor(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn definiteness(self) -> Definiteness {
        match self {
            Sign::Positive => Definiteness::Positive,
            Sign::Negative => Definiteness::Negative,
        }
    }
}

/// A nondegenerate symmetric integer Gram matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticForm {
    n: usize,
    gram: Vec<i64>,
    det: BigInt,
    definiteness: Definiteness,
}

impl QuadraticForm {
    /// Builds a form from a row-major `n x n` matrix.
    pub fn from_flat(n: usize, gram: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if gram.len() != n * n {
            return Err(Error::NotSquare);
        }
        for i in 0..n {
            for j in i + 1..n {
                if gram[i * n + j] != gram[j * n + i] {
                    return Err(Error::Asymmetric(i, j));
                }
            }
        }
        let big = arith::to_big(&gram);
        let det = arith::bareiss_det(n, &big);
        if det.is_zero() {
            return Err(Error::Degenerate);
        }
        let definiteness = classify(&arith::leading_minors(n, &big));
        Ok(Self { n, gram, det, definiteness })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare);
        }
        Self::from_flat(n, rows.concat())
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self> {
        let n = entries.len();
        let mut gram = vec![0; n * n];
        for (i, &v) in entries.iter().enumerate() {
            gram[i * n + i] = v;
        }
        Self::from_flat(n, gram)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.n + j]
    }

    pub fn flat(&self) -> &[i64] {
        &self.gram
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.gram.chunks(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn diag(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.entry(i, i)).collect()
    }

    pub fn determinant(&self) -> &BigInt {
        &self.det
    }

    /// `|det|`, the order of the discriminant group.
    pub fn delta(&self) -> BigInt {
        self.det.abs()
    }

    pub fn delta_i64(&self) -> Result<i64> {
        arith::big_to_i64(&self.delta())
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    pub fn is_definite(&self) -> bool {
        self.definiteness != Definiteness::Other
    }

    pub fn require(&self, d: Definiteness) -> Result<()> {
        if self.definiteness == d {
            Ok(())
        } else {
            Err(Error::Definiteness(match d {
                Definiteness::Positive => "positive definite",
                Definiteness::Negative => "negative definite",
                Definiteness::Other => "indefinite",
            }))
        }
    }

    pub fn check_len(&self, v: &[i64]) -> Result<()> {
        if v.len() == self.n {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.n, found: v.len() })
        }
    }

    pub fn negated(&self) -> Self {
        let definiteness = match self.definiteness {
            Definiteness::Positive => Definiteness::Negative,
            Definiteness::Negative => Definiteness::Positive,
            Definiteness::Other => Definiteness::Other,
        };
        let det = if self.n.is_multiple_of(2) { self.det.clone() } else { -&self.det };
        Self { n: self.n, gram: self.gram.iter().map(|v| -v).collect(), det, definiteness }
    }

    /// The positive-definite member of `{Q, -Q}`.
    pub fn positive_part(&self) -> Result<Self> {
        match self.definiteness {
            Definiteness::Positive => Ok(self.clone()),
            Definiteness::Negative => Ok(self.negated()),
            Definiteness::Other => Err(Error::Definiteness("definite")),
        }
    }

    /// `Q · x` as exact integers.
    pub fn apply(&self, x: &[i64]) -> Vec<i128> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j) as i128 * x[j] as i128).sum())
            .collect()
    }

    pub fn pair(&self, x: &[i64], y: &[i64]) -> i128 {
        self.apply(x).iter().zip(y).map(|(a, &b)| a * b as i128).sum()
    }

    /// `Q(x, x)`.
    pub fn norm(&self, x: &[i64]) -> i128 {
        self.pair(x, x)
    }

    pub fn adjugate(&self) -> Vec<BigInt> {
        arith::adjugate(self.n, &arith::to_big(&self.gram))
    }

    /// Positive-definite integer matrix `δ · (±Q)^{-1}` used to extremize the
    /// dual form without rationals.
    pub fn scaled_dual_objective(&self) -> Result<Self> {
        let sign = match self.definiteness {
            Definiteness::Positive => BigInt::from(1),
            Definiteness::Negative => BigInt::from(-1),
            Definiteness::Other => return Err(Error::Definiteness("definite")),
        };
        // δ Q^{-1} = sgn(det) adj(Q)
        let s = if self.det.is_negative() { -&sign } else { sign };
        let gram = self
            .adjugate()
            .iter()
            .map(|v| arith::big_to_i64(&(v * &s)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_flat(self.n, gram)
    }

    /// `P^T Q P`.
    pub fn transform(&self, p: &UnimodularMap) -> Result<Self> {
        let n = self.n;
        if p.n != n {
            return Err(Error::Dimension { expected: n, found: p.n });
        }
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for a in 0..n {
                    for b in 0..n {
                        s += p.get(a, i) as i128 * self.entry(a, b) as i128 * p.get(b, j) as i128;
                    }
                }
                out[i * n + j] = i64::try_from(s).map_err(|_| Error::Overflow)?;
            }
        }
        Self::from_flat(n, out)
    }

    /// Parses either the text format (`n` then `n` rows) or a JSON array of arrays.
    pub fn parse(input: &str) -> Result<Self> {
        let t = input.trim_start();
        if t.starts_with('[') {
            Self::parse_json(t)
        } else {
            Self::parse_text(t)
        }
    }

    pub fn parse_text(input: &str) -> Result<Self> {
        let mut lines = input.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be the rank".into()))?;
        let mut rows = Vec::with_capacity(n);
        for line in lines {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("bad entry {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::Parse(format!("expected {n} rows, found {}", rows.len())));
        }
        Self::from_rows(&rows)
    }

    pub fn parse_json(input: &str) -> Result<Self> {
        let rows: Vec<Vec<i64>> =
            serde_json::from_str(input).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadraticForm({:?})", self.rows())
    }
}

impl Serialize for QuadraticForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadraticForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        Self::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

fn classify(minors: &[BigInt]) -> Definiteness {
    if minors.iter().all(|m| m.is_positive()) {
        Definiteness::Positive
    } else if minors
        .iter()
        .enumerate()
        .all(|(k, m)| if k % 2 == 0 { m.is_negative() } else { m.is_positive() })
    {
        Definiteness::Negative
    } else {
        Definiteness::Other
    }
}

pub fn determinant(q: &QuadraticForm) -> BigInt {
    q.det.clone()
}

pub fn definiteness(q: &QuadraticForm) -> Definiteness {
    q.definiteness
}

/// The exact value `y^T Q^{-1} y`, always in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualValue(#[serde(with = "arith::serde_rational")] pub Rational);

impl DualValue {
    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }
}

pub fn dual_value(q: &QuadraticForm, y: &[i64]) -> Result<DualValue> {
    q.check_len(y)?;
    if !q.is_definite() {
        return Err(Error::Definiteness("definite"));
    }
    let adj = q.adjugate();
    let n = q.n;
    let mut num = BigInt::zero();
    for i in 0..n {
        for j in 0..n {
            num += &adj[i * n + j] * y[i] * y[j];
        }
    }
    Ok(DualValue(Rational::new(num, q.det.clone())))
}

/// `Q(x, ξ) ≡ Q(ξ, ξ) (mod 2)` for all ξ, checked on basis vectors.
pub fn is_char_vector(q: &QuadraticForm, x: &[i64]) -> Result<bool> {
    q.check_len(x)?;
    let qx = q.apply(x);
    Ok((0..q.n).all(|i| (qx[i] - q.entry(i, i) as i128).rem_euclid(2) == 0))
}

/// `y_i ≡ Q_ii (mod 2)`.
pub fn is_char_covector(q: &QuadraticForm, y: &[i64]) -> Result<bool> {
    q.check_len(y)?;
    Ok((0..q.n).all(|i| (y[i] - q.entry(i, i)).rem_euclid(2) == 0))
}

/// `Δ_δ = (n-1)<±1> ⊕ <±δ>`.
pub fn diagonal_delta(n: usize, delta: i64, sign: Sign) -> Result<QuadraticForm> {
    if n == 0 || delta < 1 {
        return Err(Error::Precondition("diagonal_delta needs n >= 1 and δ >= 1".into()));
    }
    let mut d = vec![sign.factor(); n];
    d[n - 1] = sign.factor() * delta;
    QuadraticForm::diagonal(&d)
}

/// An integer change of basis `P` with `det P = ±1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct UnimodularMap {
    n: usize,
    matrix: Vec<i64>,
}

impl UnimodularMap {
    pub fn new(n: usize, matrix: Vec<i64>) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::NotSquare);
        }
        let det = arith::bareiss_det(n, &arith::to_big(&matrix));
        if det.abs() != BigInt::from(1) {
            return Err(Error::Precondition(format!("map has determinant {det}, not ±1")));
        }
        Ok(Self { n, matrix })
    }

    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![0; n * n];
        for i in 0..n {
            matrix[i * n + i] = 1;
        }
        Self { n, matrix }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.matrix[i * self.n + j]
    }

    pub fn flat(&self) -> &[i64] {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.matrix.chunks(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn compose(&self, other: &UnimodularMap) -> Result<Self> {
        let n = self.n;
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let s: i128 = (0..n).map(|k| self.get(i, k) as i128 * other.get(k, j) as i128).sum();
                out[i * n + j] = i64::try_from(s).map_err(|_| Error::Overflow)?;
            }
        }
        Ok(Self { n, matrix: out })
    }

    /// Exact inverse via the adjugate (the determinant is ±1).
    pub fn inverse(&self) -> Result<Self> {
        let big = arith::to_big(&self.matrix);
        let det = arith::bareiss_det(self.n, &big);
        let matrix = arith::adjugate(self.n, &big)
            .iter()
            .map(|v| arith::big_to_i64(&(v * &det)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: self.n, matrix })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn q(rows: &[&[i64]]) -> QuadraticForm {
        QuadraticForm::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    pub(crate) fn example_411(a: i64) -> QuadraticForm {
        q(&[&[-1, 1, 1, 1], &[1, -2, 0, 0], &[1, 0, -3, 0], &[1, 0, 0, -a]])
    }

    #[test]
    fn determinants() {
        assert_eq!(determinant(&q(&[&[-1, 0], &[0, -3]])), BigInt::from(3));
        assert_eq!(determinant(&example_411(9)), BigInt::from(3));
        assert_eq!(determinant(&q(&[&[1, 0], &[0, 1]])), BigInt::from(1));
    }

    #[test]
    fn definiteness_tags() {
        assert_eq!(q(&[&[-1, 0], &[0, -3]]).definiteness(), Definiteness::Negative);
        assert_eq!(q(&[&[-2, -1], &[-1, -2]]).definiteness(), Definiteness::Negative);
        assert_eq!(q(&[&[0, 1], &[1, 0]]).definiteness(), Definiteness::Other);
        assert_eq!(q(&[&[2, 1], &[1, 2]]).definiteness(), Definiteness::Positive);
    }

    #[test]
    fn dual_values() {
        let d = q(&[&[-1, 0], &[0, -3]]);
        assert_eq!(dual_value(&d, &[1, 1]).unwrap().0, rat(-4, 3));
        assert_eq!(dual_value(&d, &[0, 0]).unwrap().0, rat(0, 1));
        let a2 = q(&[&[-2, -1], &[-1, -2]]);
        let v = dual_value(&a2, &[1, 0]).unwrap();
        assert_eq!(v.0, rat(-2, 3));
        assert_eq!(v.denominator(), &BigInt::from(3));
    }

    #[test]
    fn characteristic_predicates() {
        let d = q(&[&[-1, 0], &[0, -3]]);
        assert!(is_char_vector(&d, &[1, 1]).unwrap());
        let a2 = q(&[&[-2, -1], &[-1, -2]]);
        assert!(!is_char_vector(&a2, &[1, 0]).unwrap());
        assert!(is_char_covector(&a2, &[0, 0]).unwrap());
        assert_eq!(is_char_vector(&a2, &[1]), Err(Error::Dimension { expected: 2, found: 1 }));
    }

    #[test]
    fn delta_forms() {
        assert_eq!(diagonal_delta(2, 3, Sign::Negative).unwrap(), q(&[&[-1, 0], &[0, -3]]));
        assert_eq!(diagonal_delta(1, 5, Sign::Negative).unwrap(), q(&[&[-5]]));
        assert_eq!(diagonal_delta(3, 1, Sign::Positive).unwrap(), q(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(QuadraticForm::from_rows(&[vec![1, 2], vec![3, 4]]), Err(Error::Asymmetric(0, 1)));
        assert_eq!(QuadraticForm::from_rows(&[vec![1, 2], vec![2, 4]]), Err(Error::Degenerate));
        assert_eq!(QuadraticForm::from_rows(&[]), Err(Error::Empty));
    }

    #[test]
    fn parsers_agree() {
        let a = QuadraticForm::parse("2\n2 1\n1 2\n").unwrap();
        let b = QuadraticForm::parse("[[2,1],[1,2]]").unwrap();
        assert_eq!(a, b);
        assert_eq!(QuadraticForm::parse(&a.to_text()).unwrap(), a);
        assert!(matches!(QuadraticForm::parse("2\n2 1\n0 2\n"), Err(Error::Asymmetric(0, 1))));
        assert!(matches!(QuadraticForm::parse("[[2,1],[0,2]]"), Err(Error::Asymmetric(0, 1))));
    }

    #[test]
    fn scaled_dual_is_positive() {
        let neg = example_411(9);
        let a = neg.scaled_dual_objective().unwrap();
        assert_eq!(a.definiteness(), Definiteness::Positive);
        // δ · (-Q^{-1}) evaluated at y equals -δ · dual_value
        let y = [1, 0, 1, 1];
        let dv = dual_value(&neg, &y).unwrap().0;
        assert_eq!(rat_from(a.norm(&y)), -dv * rat(3, 1));
    }

    fn rat_from(v: i128) -> Rational {
        crate::arith::rat_int(v)
    }
}
