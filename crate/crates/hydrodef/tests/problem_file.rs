use hydrodef::ProblemFile;
use hydrodef_core::bivectors::Deformation;

fn read(name: &str) -> String {
    std::fs::read_to_string(format!("{}/examples/{}", env!("CARGO_MANIFEST_DIR"), name)).unwrap()
}

#[test]
fn examples_round_trip() {
    for name in [
        "p1_0.hop",
        "p2_0.hop",
        "bad_const_b.hop",
        "empty.hop",
        "metricEx.hop",
        "example1.map",
        "gas_dynamics.hop",
        "def1_p1.hop",
        "symmetry_y.vf",
    ] {
        let f = ProblemFile::parse(&read(name), false).unwrap();
        let printed = f.to_string();
        let g = ProblemFile::parse(&printed, false).unwrap_or_else(|e| panic!("{}: {}\n{}", name, e, printed));
        assert_eq!(f, g, "{}", name);
        assert_eq!(printed, g.to_string());
    }
}

#[test]
fn rules_and_second_order_tensors_round_trip() {
    let src = "n = 3\nfunc E(u3) rule exp; func S(u3) rule sin(C); func C(u3) rule cos(S); func w(u1, u2)\n\
               deform2\nE[1][2] = E*S\nH[1][2][1][3] = C^2\nN[2][1][1][2][3] = D(w,u1,u2)\nM[1][1][2][3] = w/u1\n\
               deform1\nD[3][3][2][3] = E'\n";
    let f = ProblemFile::parse(src, false).unwrap();
    let g = ProblemFile::parse(&f.to_string(), false).unwrap();
    assert_eq!(f, g);
    match f.deform2.as_ref().unwrap() {
        Deformation::Second { h, nn, .. } => {
            assert_eq!(h.get(&[1, 2, 1, 3]), h.get(&[1, 2, 3, 1]));
            assert_eq!(nn.get(&[2, 1, 3, 1, 2]), nn.get(&[2, 1, 1, 2, 3]));
            assert!(!nn.get(&[2, 1, 2, 3, 1]).is_zero());
        }
        _ => panic!("second-order tensors expected"),
    }
}

#[test]
fn map_sections_use_v_variables() {
    let f = ProblemFile::parse(&read("example1.map"), false).unwrap();
    assert_eq!(f.map.as_ref().unwrap().len(), 3);
    assert!(f.to_string().contains("u1 = v1/v3"));
    assert!(f.change().unwrap().is_ok());
    let bad = ProblemFile::parse("n = 2\nmap\nu1 = u1\nu2 = v2\n", false).unwrap_err();
    assert_eq!((bad.line, bad.col), (3, 6));
    let partial = ProblemFile::parse("n = 2\nmap: u1 = v2\n", false).unwrap_err();
    assert!(partial.msg.contains("u2"));
}

#[test]
fn structural_errors() {
    let cases = [
        ("metric\ng[1][1] = 1\n", "header"),
        ("n = 2\ng[1][1] = 1\n", "outside a section"),
        ("n = 2\nmetric\ng[1][3] = 1\n", "outside 1..2"),
        ("n = 2\nmetric\ng[1][1] = 1; g[1][1] = 2\n", "twice"),
        ("n = 2\nmetric\nb[1][1][1] = 1\n", "not an entry"),
        ("n = 2\nb\nb[1][1] = 1\n", "takes 3 indices"),
        ("n = 2\nfunc p(u3)\n", "dependency"),
        ("n = 2\nfunc p(u1, u2) rule exp\n", "one variable"),
        ("n = 2\nfunc u1(u2)\n", "reserved"),
        ("n = 2\nfunc p(u1); func p(u2)\n", "twice"),
        ("n = 2\nmetric\ng[1][1] = q\n", ""),
        ("n = 2\nwhat\n", "unrecognised"),
    ];
    for (src, needle) in cases {
        let e = ProblemFile::parse(src, false).expect_err(src);
        assert!(e.msg.contains(needle), "{}: {}", src, e.msg);
    }
}

#[test]
fn inline_section_entries() {
    let f = ProblemFile::parse("n = 2\nvfield: X[1] = u1_x  # comment\nX[2] = u2_xx\n", false).unwrap();
    let x = f.vfield.unwrap();
    assert_eq!(x.comps[0].to_string(), "u1_x");
    assert_eq!(x.comps[1].to_string(), "u2_xx");
}
