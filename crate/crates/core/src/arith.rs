//! Exact integer linear algebra: fraction-free determinants, adjugates,
//! Smith normal form, and GF(2) linear systems.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Row-major square matrix of big integers.
pub(crate) fn to_big(entries: &[i64]) -> Vec<BigInt> {
    entries.iter().map(|&v| BigInt::from(v)).collect()
}

/// Determinant by Bareiss fraction-free elimination with row pivoting.
pub fn bareiss_det(n: usize, entries: &[BigInt]) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut a = entries.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for j in 0..n {
                a.swap(k * n + j, swap * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[k * n + k] * &a[i * n + j] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = v / &prev;
            }
            a[i * n + k] = BigInt::zero();
        }
        prev = a[k * n + k].clone();
    }
    sign * &a[n * n - 1]
}

fn submatrix(n: usize, entries: &[BigInt], rows: &[usize], cols: &[usize]) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for &i in rows {
        for &j in cols {
            out.push(entries[i * n + j].clone());
        }
    }
    out
}

/// Leading principal minors `det(A[..k, ..k])` for `k = 1..=n`.
pub fn leading_minors(n: usize, entries: &[BigInt]) -> Vec<BigInt> {
    (1..=n)
        .map(|k| {
            let idx: Vec<usize> = (0..k).collect();
            bareiss_det(k, &submatrix(n, entries, &idx, &idx))
        })
        .collect()
}

/// Classical adjugate, so that `A * adj(A) = det(A) * I`.
pub fn adjugate(n: usize, entries: &[BigInt]) -> Vec<BigInt> {
    if n == 1 {
        return vec![BigInt::one()];
    }
    let mut adj = vec![BigInt::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = bareiss_det(n - 1, &submatrix(n, entries, &rows, &cols));
            // cofactor C_ij lands at adj[j][i]
            adj[j * n + i] = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    adj
}

pub(crate) fn big_to_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or(Error::Overflow)
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let q: BigInt = q.parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if q.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(p, q))
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i128) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::{fmt_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Smith normal form `U * A * V = D` of an `m x n` integer matrix.
#[derive(Debug, Clone)]
pub struct Smith {
    pub rows: usize,
    pub cols: usize,
    pub u: Vec<i128>,
    pub u_inv: Vec<i128>,
    pub v: Vec<i128>,
    /// Nonzero invariant factors, each dividing the next.
    pub invariants: Vec<i128>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }
}

fn ck(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::Overflow)
}

pub fn smith_normal_form(m: usize, n: usize, entries: &[i128]) -> Result<Smith> {
    let mut a = entries.to_vec();
    let mut u = identity(m);
    let mut u_inv = identity(m);
    let mut v = identity(n);
    let at = |i: usize, j: usize| i * n + j;

    let mut invariants = Vec::new();
    for t in 0..m.min(n) {
        // smallest nonzero pivot in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                let x = a[at(i, j)];
                if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < a[at(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        swap_rows(&mut a, n, t, pi);
        swap_rows(&mut u, m, t, pi);
        swap_cols(&mut u_inv, m, t, pi);
        swap_cols(&mut a, n, t, pj);
        swap_cols(&mut v, n, t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..m {
                let q = Integer::div_floor(&a[at(i, t)], &a[at(t, t)]);
                if q != 0 {
                    row_axpy(&mut a, n, i, t, -q)?;
                    row_axpy(&mut u, m, i, t, -q)?;
                    col_axpy(&mut u_inv, m, t, i, q)?;
                }
                if a[at(i, t)] != 0 {
                    swap_rows(&mut a, n, t, i);
                    swap_rows(&mut u, m, t, i);
                    swap_cols(&mut u_inv, m, t, i);
                    dirty = true;
                }
            }
            for j in t + 1..n {
                let q = Integer::div_floor(&a[at(t, j)], &a[at(t, t)]);
                if q != 0 {
                    col_axpy(&mut a, n, j, t, -q)?;
                    col_axpy(&mut v, n, j, t, -q)?;
                }
                if a[at(t, j)] != 0 {
                    swap_cols(&mut a, n, t, j);
                    swap_cols(&mut v, n, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            let p = a[at(t, t)];
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| a[at(i, j)] % p != 0));
            match bad {
                Some(i) => {
                    row_axpy(&mut a, n, t, i, 1)?;
                    row_axpy(&mut u, m, t, i, 1)?;
                    col_axpy(&mut u_inv, m, i, t, -1)?;
                }
                None => break,
            }
        }
        if a[at(t, t)] < 0 {
            for j in 0..n {
                a[at(t, j)] = -a[at(t, j)];
            }
            for j in 0..m {
                u[j + t * m] = -u[j + t * m];
            }
            for i in 0..m {
                u_inv[i * m + t] = -u_inv[i * m + t];
            }
        }
        invariants.push(a[at(t, t)]);
    }
    Ok(Smith { rows: m, cols: n, u, u_inv, v, invariants })
}

fn identity(n: usize) -> Vec<i128> {
    let mut m = vec![0; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    m
}

fn swap_rows(a: &mut [i128], n: usize, i: usize, j: usize) {
    if i != j {
        for c in 0..n {
            a.swap(i * n + c, j * n + c);
        }
    }
}

fn swap_cols(a: &mut [i128], n: usize, i: usize, j: usize) {
    if i != j {
        for r in 0..a.len() / n {
            a.swap(r * n + i, r * n + j);
        }
    }
}

/// row_dst += k * row_src
fn row_axpy(a: &mut [i128], n: usize, dst: usize, src: usize, k: i128) -> Result<()> {
    for c in 0..n {
        let add = ck(a[src * n + c].checked_mul(k))?;
        a[dst * n + c] = ck(a[dst * n + c].checked_add(add))?;
    }
    Ok(())
}

/// col_dst += k * col_src
fn col_axpy(a: &mut [i128], n: usize, dst: usize, src: usize, k: i128) -> Result<()> {
    for r in 0..a.len() / n {
        let add = ck(a[r * n + src].checked_mul(k))?;
        a[r * n + dst] = ck(a[r * n + dst].checked_add(add))?;
    }
    Ok(())
}

/// Row-major matrix product of `a` (m x k) and `b` (k x n).
pub(crate) fn mat_mul(m: usize, k: usize, n: usize, a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    let mut out = vec![0i128; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut s: i128 = 0;
            for t in 0..k {
                s = ck(s.checked_add(ck(a[i * k + t].checked_mul(b[t * n + j]))?))?;
            }
            out[i * n + j] = s;
        }
    }
    Ok(out)
}

pub(crate) fn transpose(m: usize, n: usize, a: &[i128]) -> Vec<i128> {
    let mut out = vec![0; m * n];
    for i in 0..m {
        for j in 0..n {
            out[j * m + i] = a[i * n + j];
        }
    }
    out
}

/// Solves `A x = b` over GF(2). Returns a particular solution and a basis
/// of the null space, or `None` when inconsistent.
pub fn gf2_solve(n: usize, a: &[u8], b: &[u8]) -> Option<(Vec<u8>, Vec<Vec<u8>>)> {
    let mut rows: Vec<Vec<u8>> = (0..n)
        .map(|i| {
            let mut r: Vec<u8> = a[i * n..(i + 1) * n].iter().map(|v| v & 1).collect();
            r.push(b[i] & 1);
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..n).find(|&i| rows[i][c] == 1) else { continue };
        rows.swap(r, p);
        for i in 0..n {
            if i != r && rows[i][c] == 1 {
                let src = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(src) {
                    *x ^= y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[n] == 1) {
        return None;
    }
    let mut particular = vec![0u8; n];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = rows[i][n];
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![0u8; n];
            v[f] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = rows[i][f];
            }
            v
        })
        .collect();
    Some((particular, kernel))
}

/// Largest `s` with `s * s <= v`.
pub(crate) fn isqrt(v: i128) -> i128 {
    if v <= 0 {
        return 0;
    }
    let mut s = (v as f64).sqrt() as i128;
    while s * s > v {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= v {
        s += 1;
    }
    s
}

pub(crate) fn is_square(v: &BigInt) -> bool {
    if v.is_negative() {
        return false;
    }
    let s = v.sqrt();
    &s * &s == *v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        to_big(v)
    }

    #[test]
    fn bareiss_handles_zero_pivot() {
        assert_eq!(bareiss_det(2, &big(&[0, 1, 1, 0])), BigInt::from(-1));
        assert_eq!(bareiss_det(3, &big(&[0, 2, 1, 1, 0, 0, 0, 0, 3])), BigInt::from(-6));
        assert_eq!(bareiss_det(2, &big(&[1, 2, 2, 4])), BigInt::zero());
    }

    #[test]
    fn adjugate_identity() {
        let a = big(&[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let adj = adjugate(3, &a);
        let det = bareiss_det(3, &a);
        for i in 0..3 {
            for j in 0..3 {
                let s: BigInt = (0..3).map(|k| &a[i * 3 + k] * &adj[k * 3 + j]).sum();
                assert_eq!(s, if i == j { det.clone() } else { BigInt::zero() });
            }
        }
    }

    #[test]
    fn smith_of_small_matrices() {
        let a = [2, 4, 4, -6, 6, 12, 10, -4, -16];
        let s = smith_normal_form(3, 3, &a).unwrap();
        assert_eq!(s.invariants, vec![2, 6, 12]);
        let d = mat_mul(3, 3, 3, &mat_mul(3, 3, 3, &s.u, &a).unwrap(), &s.v).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[i * 3 + j], if i == j { s.invariants[i] } else { 0 });
            }
        }
        let id = mat_mul(3, 3, 3, &s.u, &s.u_inv).unwrap();
        assert_eq!(id, identity(3));

        let rect = [1, -1, 0, 0, 1, -1];
        let s = smith_normal_form(2, 3, &rect).unwrap();
        assert_eq!(s.invariants, vec![1, 1]);
    }

    #[test]
    fn gf2_systems() {
        // x + y = 1, x + y = 1 -> one free variable
        let (p, k) = gf2_solve(2, &[1, 1, 1, 1], &[1, 1]).unwrap();
        assert_eq!(p[0] ^ p[1], 1);
        assert_eq!(k, vec![vec![1, 1]]);
        assert!(gf2_solve(2, &[1, 1, 1, 1], &[1, 0]).is_none());
    }

    #[test]
    fn rational_format_roundtrip() {
        let r = rat(-4, 6);
        assert_eq!(fmt_rational(&r), "-2/3");
        assert_eq!(parse_rational("-2/3").unwrap(), r);
        assert_eq!(parse_rational("5").unwrap(), rat(5, 1));
        assert_eq!(fmt_rational(&rat(0, 7)), "0/1");
    }

    #[test]
    fn integer_sqrt() {
        for v in 0..2000i128 {
            let s = isqrt(v);
            assert!(s * s <= v && (s + 1) * (s + 1) > v);
        }
    }
}
