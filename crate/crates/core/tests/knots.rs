use std::collections::BTreeSet;

use proptest::prelude::*;
use quadform::knots::{
    algebraically_slice_genus1, double_branched_cover, kqr_genus_report, pretzel_genus_report, pretzel_seifert_matrix, signature_from_seifert,
    GenusOptions, KqrKnot, Matrix2, PretzelKnot,
};
use quadform::plumbing::k_invariant;

fn pretzel() -> impl Strategy<Value = PretzelKnot> {
    (0i64..6, 1i64..10, 1i64..10).prop_map(|(a, b, c)| {
        let p = 2 * a + 1;
        PretzelKnot::new(p, p + 2 * b, p + 2 * c).unwrap()
    })
}

fn primitive(x: i64, y: i64) -> bool {
    num_integer::gcd(x, y) == 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pretzel_cover_order(k in pretzel()) {
        let cover = double_branched_cover(&k.montesinos()).unwrap();
        let kk = k_invariant(&cover).unwrap();
        prop_assert_eq!(kk, -i128::from(k.l_squared()));
        let m = pretzel_seifert_matrix(&k).0;
        let s = [[2 * m[0][0], m[0][1] + m[1][0]], [m[0][1] + m[1][0], 2 * m[1][1]]];
        prop_assert_eq!((s[0][0] * s[1][1] - s[0][1] * s[1][0]).abs(), k.l_squared().abs());
        prop_assert!(signature_from_seifert(&m).unwrap().abs() <= 2);
    }

    #[test]
    fn slice_witness_matches_scan(m in prop::array::uniform2(prop::array::uniform2(-6i64..=6))) {
        let m: Matrix2 = m;
        let norm = |x: i64, y: i64| m[0][0] * x * x + (m[0][1] + m[1][0]) * x * y + m[1][1] * y * y;
        let mut found = BTreeSet::new();
        for x in 0..=50i64 {
            for y in -50..=50i64 {
                if (x > 0 || y > 0) && primitive(x, y) && norm(x, y) == 0 {
                    found.insert([x, y]);
                }
            }
        }
        match algebraically_slice_genus1(&m) {
            Some(w) => {
                prop_assert_eq!(norm(w[0], w[1]), 0);
                prop_assert_eq!(Some(&w), found.iter().next_back());
            }
            None => prop_assert!(found.is_empty(), "{m:?}: scan found {found:?}"),
        }
    }

    #[test]
    fn kqr_covers_are_negative(q in 1i64..20, r in 1i64..20) {
        let k = KqrKnot::new(2 * q + 1, 2 * r).unwrap();
        let cover = double_branched_cover(&k.montesinos()).unwrap();
        prop_assert_eq!(k_invariant(&cover).unwrap(), i128::from(k.cover_k()));
        prop_assert!(k.cover_k() < 0);
    }
}

#[test]
fn genus_certificates_replay() {
    let opts = GenusOptions { embedding_check: false };
    let mut reports = 0;
    for p in (1..=7).step_by(2) {
        for q in (p + 2..=15).step_by(2) {
            for r in (q..=15).step_by(2) {
                let k = PretzelKnot::new(p, q, r).unwrap();
                let l2 = k.l_squared();
                let square = l2 >= 0 && (0..=l2).any(|l| l * l == l2);
                let rep = pretzel_genus_report(&k, opts);
                assert_eq!(rep.is_ok(), square, "{}", k.name());
                let Ok(rep) = rep else { continue };
                reports += 1;
                assert!(rep.lower <= rep.upper, "{}", rep.knot);
                assert!(rep.chain_valid(), "{}", rep.knot);
                for c in &rep.certificates {
                    assert!(c.replay().unwrap(), "{}: {}", rep.knot, c.name());
                }
            }
        }
    }
    assert!(reports >= 2);
    for (q, r) in [(3, 2), (5, 2), (3, 4), (7, 6)] {
        let rep = kqr_genus_report(&KqrKnot::new(q, r).unwrap(), opts).unwrap();
        assert!(rep.chain_valid(), "{}", rep.knot);
        assert!(rep.certificates.iter().all(|c| c.replay().unwrap()));
    }
}
