use proptest::prelude::*;
use serde_json::json;

use qsp_core::coideal::{lambda_of_t, t_of_lambda};
use qsp_core::harness::{self, Report};
use qsp_core::kzmono::{psi, MonodromyProblem};
use qsp_core::linalg::{cr, eye, fro};
use qsp_core::uqrep::{build_irrep, QParams};
use qsp_core::vogan10::build_mr;
use qsp_core::{build_root_datum, parse_type, CMat, Weight, C64};

fn skew2(v: [f64; 4], scale: f64) -> CMat {
    // [[i a, b + i c], [-b + i c, i d]]
    CMat::from_row_slice(
        2,
        2,
        &[C64::new(0.0, v[0]), C64::new(v[1], v[2]), C64::new(-v[1], v[2]), C64::new(0.0, v[3])],
    ) * cr(scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lambda_t_round_trip(q in 0.2f64..0.95, lam in -3.0f64..3.0) {
        let back = lambda_of_t(q, t_of_lambda(q, lam));
        prop_assert!((back - lam).abs() < 1e-9 * (1.0 + lam.abs()));
    }

    #[test]
    fn trace_recovers_lambda(q in 0.3f64..0.9, t in 0.2f64..3.0, sign in prop::bool::ANY) {
        let t = if sign { t } else { -t };
        let c = harness::coideal_braid(t, q).unwrap();
        let [lam, neg] = harness::lambda_from_trace(&c, q).unwrap();
        prop_assert_eq!(lam, -neg);
        prop_assert!((lam - lambda_of_t(q, t).abs()).abs() < 1e-7, "{} vs {}", lam, lambda_of_t(q, t));
    }

    #[test]
    fn psi_is_unitary_for_skew_hermitian_data(
        a in prop::array::uniform4(-1.0f64..1.0),
        bp in prop::array::uniform4(-1.0f64..1.0),
        bm in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let r = psi(&MonodromyProblem::new(skew2(a, 0.3), skew2(bp, 0.3), skew2(bm, 0.3))).unwrap();
        prop_assert!(fro(&(r.psi.adjoint() * &r.psi - eye(2))) < 1e-8);
        prop_assert!(r.spread < 1e-6);
    }

    #[test]
    fn truncated_module_relations(r in 0.05f64..3.0, q in 0.4f64..0.9) {
        let m = build_mr(r, q, 8).unwrap();
        let worst = m.relation_residuals().into_iter().fold(0.0, f64::max);
        prop_assert!(worst < 1e-10, "{}", worst);
    }

    #[test]
    fn su2_irreps_satisfy_relations(n in 0i64..7, q in 0.2f64..0.98) {
        let d = std::sync::Arc::new(build_root_datum(&parse_type("A1").unwrap()).unwrap());
        let qp = QParams::new(q, &d).unwrap();
        let m = build_irrep(&d, &Weight::from_ints(&[n]), &qp).unwrap();
        prop_assert!(m.relation_residuals().max() < 1e-9);
    }

    #[test]
    fn report_json_ignores_insertion_order(keys in prop::collection::btree_set("[a-z]{1,6}", 1..8)) {
        let keys: Vec<String> = keys.into_iter().collect();
        let mut fwd = Report::new("x");
        let mut rev = Report::new("x");
        for (i, k) in keys.iter().enumerate() {
            fwd.residual(k.as_str(), i as f64, 1.0).info(k.as_str(), json!({"b": i, "a": k}));
        }
        for (i, k) in keys.iter().enumerate().rev() {
            rev.residual(k.as_str(), i as f64, 1.0).info(k.as_str(), json!({"a": k, "b": i}));
        }
        let a = serde_json::to_string(&fwd.to_json()).unwrap();
        let b = serde_json::to_string(&rev.to_json()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn sorted_orders_nested_keys() {
    let v = harness::sorted(json!({"b": {"z": 1, "a": [ {"y": 0, "c": 1} ]}, "a": 0}));
    assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":0,"b":{"a":[{"c":1,"y":0}],"z":1}}"#);
}
