mod common;

use common::{form, positive_form, steps, unimodular};
use proptest::prelude::*;
use quadform::arith::{rat, smith_normal_form};
use quadform::char_search::{char_vector_cosets, coset_minimize, CosetProblem};
use quadform::equivalence::{are_equivalent, equivalence, fingerprint};
use quadform::form::{dual_value, is_char_covector, is_char_vector};
use quadform::par::Execution;
use quadform::reduction::{enumerate_forms, enumerate_forms_with, reduce_rank2};
use quadform::{QuadraticForm, Sign};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn change_of_basis_preserves_invariants(q in positive_form(4), s in steps()) {
        let p = unimodular(q.rank(), &s);
        let q2 = q.transform(&p).unwrap();
        prop_assert_eq!(q.determinant(), q2.determinant());
        prop_assert_eq!(fingerprint(&q).unwrap(), fingerprint(&q2).unwrap());
        let map = equivalence(&q2, &q).unwrap().expect("equivalent by construction");
        prop_assert_eq!(q.transform(&map).unwrap(), q2);
    }

    #[test]
    fn negation_round_trips(q in positive_form(4)) {
        prop_assert_eq!(q.negated().negated(), q.clone());
        prop_assert_eq!(q.negated().positive_part().unwrap(), q);
    }

    #[test]
    fn rank2_reduction(q in positive_form(2), neg in any::<bool>()) {
        prop_assume!(q.rank() == 2);
        let q = if neg { q.negated() } else { q };
        let (r, p) = reduce_rank2(&q).unwrap();
        prop_assert!(r.satisfies_convention());
        prop_assert_eq!(q.transform(&p).unwrap(), r.to_form());
    }

    #[test]
    fn char_cosets_are_characteristic(q in positive_form(4)) {
        for c in char_vector_cosets(&q) {
            prop_assert!(is_char_vector(&q, &c).unwrap());
            let e = coset_minimize(&CosetProblem::mod2(q.clone(), c.clone())).unwrap();
            prop_assert!(is_char_vector(&q, &e.witness).unwrap());
            prop_assert_eq!(q.norm(&e.witness), e.value);
        }
    }

    #[test]
    fn dual_value_matches_scaled_objective(q in positive_form(3), y in prop::collection::vec(-5i64..=5, 3)) {
        let y = &y[..q.rank()];
        let a = q.scaled_dual_objective().unwrap();
        let d = q.delta_i64().unwrap();
        let v = dual_value(&q, y).unwrap();
        prop_assert_eq!(v.0, quadform::Rational::new(a.norm(y).into(), d.into()));
        let diag_parity: Vec<i64> = q.diag().iter().map(|v| v.rem_euclid(2)).collect();
        prop_assert!(is_char_covector(&q, &diag_parity).unwrap());
    }

    #[test]
    fn smith_form_factors(m in prop::collection::vec(-6i128..=6, 9), rows in 1usize..=3) {
        let cols = 3;
        let a = &m[..rows * cols];
        let s = smith_normal_form(rows, cols, a).unwrap();
        let mul = |x: &[i128], r: usize, k: usize, y: &[i128], c: usize| -> Vec<i128> {
            (0..r * c).map(|idx| (0..k).map(|t| x[idx / c * k + t] * y[t * c + idx % c]).sum()).collect()
        };
        let d = mul(&mul(&s.u, rows, rows, a, cols), rows, cols, &s.v, cols);
        for i in 0..rows {
            for j in 0..cols {
                let want = if i == j && i < s.rank() { s.invariants[i] } else { 0 };
                prop_assert_eq!(d[i * cols + j], want);
            }
        }
        for w in s.invariants.windows(2) {
            prop_assert_eq!(w[1] % w[0], 0);
        }
        let id = mul(&s.u, rows, rows, &s.u_inv, rows);
        for i in 0..rows {
            for j in 0..rows {
                prop_assert_eq!(id[i * rows + j], i128::from(i == j));
            }
        }
    }
}

#[test]
fn enumeration_members_pairwise_inequivalent() {
    for rank in 1..=3 {
        for d in 1..=12 {
            let fam = enumerate_forms(rank, d, Sign::Positive).unwrap();
            for (i, a) in fam.members.iter().enumerate() {
                assert_eq!(a.delta(), d.into());
                for b in &fam.members[i + 1..] {
                    assert!(!are_equivalent(a, b).unwrap());
                }
            }
        }
    }
}

#[test]
fn enumeration_is_mode_independent() {
    for d in [1, 2, 3, 7, 12] {
        for rank in 3..=4 {
            let a = enumerate_forms_with(rank, d, Sign::Negative, Execution::Parallel).unwrap();
            let b = enumerate_forms_with(rank, d, Sign::Negative, Execution::Sequential).unwrap();
            assert_eq!(a.members, b.members);
        }
    }
}

#[test]
fn every_random_form_lands_in_its_family() {
    // positive forms of rank 3 with det <= 10, manufactured and then located
    let seeds: Vec<QuadraticForm> = vec![
        form(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]),
        form(&[&[1, 0, 0], &[0, 2, 1], &[0, 1, 3]]),
        form(&[&[3, 1, 1], &[1, 3, 1], &[1, 1, 3]]),
    ];
    for q in seeds {
        let d = q.delta_i64().unwrap();
        let fam = enumerate_forms(3, d, Sign::Positive).unwrap();
        assert_eq!(fam.members.iter().filter(|m| are_equivalent(m, &q).unwrap()).count(), 1);
    }
}

#[test]
fn delta_rational_formatting() {
    assert_eq!(quadform::arith::fmt_rational(&rat(0, 5)), "0/1");
    assert_eq!(quadform::arith::parse_rational("-6/4").unwrap(), rat(-3, 2));
}
