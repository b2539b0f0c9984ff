mod common;

use common::{form, positive_form, steps, unimodular};
use proptest::prelude::*;
use quadform::equivalence::are_equivalent;
use quadform::reduction::enumerate_forms;
use quadform::theta::{check_identity, dual_rep_series, has_even_symmetry, rep_series, Identity, ModularWord, UpperHalfPoint};
use quadform::Sign;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_are_even_off_zero(q in positive_form(3)) {
        let s = rep_series(&q, None, 30).unwrap();
        prop_assert_eq!(s.count(&quadform::Rational::from_integer(0.into())), 1);
        prop_assert!(has_even_symmetry(&s));
        let d = dual_rep_series(&q, None, 30).unwrap();
        prop_assert!(has_even_symmetry(&d));
    }

    #[test]
    fn series_are_class_invariants(q in positive_form(3), s in steps()) {
        let q2 = q.transform(&unimodular(q.rank(), &s)).unwrap();
        prop_assert_eq!(rep_series(&q, None, 25).unwrap().counts, rep_series(&q2, None, 25).unwrap().counts);
        prop_assert_eq!(dual_rep_series(&q, None, 25).unwrap().counts, dual_rep_series(&q2, None, 25).unwrap().counts);
    }

    #[test]
    fn poisson_identity_is_stable_under_small_shifts(q in positive_form(3), re in -0.4f64..0.4, im in 0.9f64..1.6) {
        for dy in [0.0, 0.01] {
            let z = UpperHalfPoint::new(re, im + dy).unwrap();
            let c = check_identity(Identity::P1, &q, z, 400, 1e-6).unwrap();
            prop_assert!(c.verified, "residual {} tail {} at {:?}", c.residual, c.tail, z);
        }
    }

    #[test]
    fn word_parsing_round_trips(w in prop::collection::vec((any::<bool>(), -4i64..=4), 1..6)) {
        let mut word = ModularWord::t_pow(0);
        for (s, k) in w {
            word = if s { word.then(&ModularWord::s()) } else { word.then(&ModularWord::t_pow(k)) };
        }
        let back = ModularWord::parse(&word.to_string()).unwrap();
        prop_assert_eq!(back.matrix(), word.matrix());
    }
}

#[test]
fn det3_series_to_twenty_separate_classes() {
    for rank in 1..=4usize {
        let fam = enumerate_forms(rank, 3, Sign::Positive).unwrap();
        let mut diag = vec![vec![0i64; rank]; rank];
        for (i, row) in diag.iter_mut().enumerate() {
            row[i] = if i + 1 == rank { 3 } else { 1 };
        }
        let diag = form(&diag.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
        let target = rep_series(&diag, None, 20).unwrap();
        for m in &fam.members {
            let same = rep_series(m, None, 20).unwrap().counts == target.counts;
            assert_eq!(same, are_equivalent(m, &diag).unwrap(), "rank {rank}: {m:?}");
        }
    }
}

#[test]
fn odd_determinant_shifted_identities() {
    let z = UpperHalfPoint::new(0.1, 1.3).unwrap();
    for g in [form(&[&[1, 0], &[0, 3]]), form(&[&[2, 1], &[1, 2]]), form(&[&[1, 0, 0], &[0, 2, 1], &[0, 1, 3]])] {
        for id in [Identity::P1, Identity::P2, Identity::P2Prime] {
            let c = check_identity(id, &g, z, 400, 1e-6).unwrap();
            assert!(c.verified, "{id:?} on {g:?}: residual {}", c.residual);
        }
    }
}
