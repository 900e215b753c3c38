use hydrodef_core::catalog::{self, Def3Variant, Payload, VerifyOptions, NAMES};
use hydrodef_core::schouten::schouten;
use hydrodef_core::Caps;

fn opts() -> VerifyOptions {
    VerifyOptions { seeds: 0..20, ..Default::default() }
}

#[test]
fn every_entry_verifies() {
    for name in NAMES {
        let r = catalog::verify(name, &opts()).unwrap();
        assert!(r.pass(), "{}: {:?}", name, r.failed().map(|c| &c.name).collect::<Vec<_>>());
        assert!(r.oracle_agrees());
    }
}

#[test]
fn drivers_verify() {
    let m = catalog::verify_miura_reductions(&opts()).unwrap();
    assert!(m.pass(), "{:?}", m.failed().map(|c| &c.name).collect::<Vec<_>>());
    let e = catalog::verify_equivalences(&opts()).unwrap();
    assert!(e.pass(), "{:?}", e.failed().map(|c| &c.name).collect::<Vec<_>>());
}

#[test]
fn aliases_share_operators() {
    for (alias, name) in [("P3_0", "RANK0"), ("P4_0", "RANK1_1"), ("P5_0", "RANK2_COMPLEX_1")] {
        assert_eq!(catalog::operator(alias).unwrap(), catalog::operator(name).unwrap());
    }
}

#[test]
fn printed_third_derivative_fails() {
    let (s, _) = catalog::def3_p1_series(Def3Variant::Third).unwrap();
    assert!(!schouten(&s.p0, s.p1.as_ref().unwrap(), &Caps::default()).unwrap().is_zero());
    let (s, _) = catalog::def3_p1_series(Def3Variant::Second).unwrap();
    assert!(schouten(&s.p0, s.p1.as_ref().unwrap(), &Caps::default()).unwrap().is_zero());
}

#[test]
fn payload_kinds() {
    assert!(matches!(catalog::build("GAS_DYNAMICS").unwrap().payload, Payload::Operator(_)));
    let e = catalog::build("DEF2_P2").unwrap();
    assert!(e.series().unwrap().p2.is_some());
    assert_eq!(e.expected_checks().len(), 5);
    assert!(catalog::build("DEF1_P1").unwrap().operator().is_none());
}
