use sigmalax::catalog::{builtin, representative_models};
use sigmalax::flatness::flatness_series;
use sigmalax::integrability::{check, check_general, Verdict};
use sigmalax::lax::{build_lax, DEFAULT_SERIES_ORDER};
use sigmalax::par::Exec;

#[test]
fn verdicts_match_expectations_on_both_paths() {
    for name in representative_models() {
        let m = builtin(&name).unwrap();
        let fast = check(&m.algebra, &m.pair, Exec::Auto).unwrap();
        let general = check_general(&m.algebra, &m.pair, Exec::Auto).unwrap();
        assert_eq!(fast.verdict, m.expected_verdict, "{name}: primary path");
        assert_eq!(general.verdict, m.expected_verdict, "{name}: expanded path");
    }
}

#[test]
fn built_connections_match_transcriptions() {
    for name in representative_models() {
        let m = builtin(&name).unwrap();
        if let Ok(expected) = m.expected_lax() {
            let built = build_lax(&m.algebra, &m.pair, DEFAULT_SERIES_ORDER);
            assert_eq!(&built, expected, "{name}");
        }
    }
}

#[test]
fn integrable_models_are_flat_through_order_eight() {
    for name in representative_models() {
        let m = builtin(&name).unwrap();
        let report = flatness_series(&m.algebra, &m.pair, &m.projectors, 8, Exec::Auto).unwrap();
        if m.expected_verdict == Verdict::NotIntegrable {
            assert_eq!(report.first_nonzero_order, Some(2), "{name}");
        } else {
            assert!(report.is_flat(), "{name}: first residual at order {:?}", report.first_nonzero_order);
        }
    }
}

#[test]
fn zn_two_equals_z2() {
    let a = builtin("zn_coset(2)").unwrap();
    let b = builtin("z2_symmetric").unwrap();
    assert_eq!(a.pair, b.pair);
    assert_eq!(a.expected_lax().unwrap(), b.expected_lax().unwrap());
    assert_eq!(
        check(&a.algebra, &a.pair, Exec::Auto).unwrap(),
        check(&b.algebra, &b.pair, Exec::Auto).unwrap()
    );
}
