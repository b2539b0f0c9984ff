#![allow(dead_code)]

use proptest::prelude::*;
use quadform::{Definiteness, QuadraticForm, UnimodularMap};

pub fn form(rows: &[&[i64]]) -> QuadraticForm {
    QuadraticForm::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Product of `steps` elementary operations, each adding `±1` times one
/// column to another or negating a column.
pub fn unimodular(n: usize, steps: &[(usize, usize, bool)]) -> UnimodularMap {
    let mut m = vec![0i64; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    for &(i, j, plus) in steps {
        let (i, j) = (i % n, j % n);
        if i == j {
            for r in 0..n {
                m[r * n + i] = -m[r * n + i];
            }
        } else {
            let s = if plus { 1 } else { -1 };
            for r in 0..n {
                m[r * n + j] += s * m[r * n + i];
            }
        }
    }
    UnimodularMap::new(n, m).unwrap()
}

pub fn steps() -> impl Strategy<Value = Vec<(usize, usize, bool)>> {
    prop::collection::vec((0usize..4, 0usize..4, any::<bool>()), 0..6)
}

/// Positive-definite Gram matrices of rank `1..=max_n` with small entries.
pub fn positive_form(max_n: usize) -> impl Strategy<Value = QuadraticForm> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(-3i64..=3, n * n), prop::collection::vec(1i64..=8, n)))
        .prop_filter_map("positive definite", |(n, off, diag)| {
            let mut g = vec![0i64; n * n];
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] = if i == j { diag[i] } else { off[i.min(j) * n + i.max(j)] };
                }
            }
            QuadraticForm::from_flat(n, g).ok().filter(|q| q.definiteness() == Definiteness::Positive)
        })
}
