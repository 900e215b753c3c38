//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use hydrodef_core::bivectors::{coefficient_count, free_coefficient_count, HydroOp};
use hydrodef_core::catalog::{self, Report, VerifyOptions};
use hydrodef_core::grinberg::{grinberg_equiv_jacobi, grinberg_residuals};
use hydrodef_core::schouten::schouten;
use hydrodef_core::{Caps, Expr, Scalar};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

const TWO_COMPONENT: [&str; 2] = ["P1_0", "P2_0"];
const THREE_COMPONENT: [&str; 11] = [
    "RANK0",
    "RANK1_1",
    "RANK1_2",
    "RANK1_3",
    "RANK1_4",
    "RANK2_1",
    "RANK2_2",
    "RANK2_3",
    "RANK2_COMPLEX_1",
    "RANK2_COMPLEX_2",
    "RANK2_COMPLEX_3",
];
const FIRST_ORDER: [&str; 5] = ["DEF1_P1", "DEF2_P1", "DEF3_P1", "DEF4_P1", "DEF5_P1"];
const SECOND_ORDER: [&str; 2] = ["DEF1_P2", "DEF2_P2"];

/// Time limits per criterion.
const CLASSIFICATION_LIMIT: Duration = Duration::from_secs(60);
const GAS_LIMIT: Duration = Duration::from_secs(5);
const FIRST_ORDER_LIMIT: Duration = Duration::from_secs(300);
const SECOND_ORDER_LIMIT: Duration = Duration::from_secs(1800);
/// Oracle points per residual.
const SEEDS: u64 = 50;
/// Random cases per (n, degree) for the skew comparison, and pairs for the bracket.
const SKEW_CASES: usize = 20;
const BRACKET_PAIRS: usize = 10;

type Criterion = Box<dyn FnOnce(&mut Collected) -> Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn opts() -> VerifyOptions {
    VerifyOptions { caps: Caps::default(), seeds: 0..SEEDS }
}

fn failed_checks(r: &Report) -> Vec<String> {
    r.failed().map(|c| format!("{}: {}", r.case, c.name)).collect()
}

/// Every report produced by criteria 1 to 7, for the oracle criterion.
struct Collected(Vec<Report>);

impl Collected {
    fn verify(&mut self, name: &str) -> Report {
        let r = catalog::verify(name, &opts()).expect("catalog entry verifies");
        self.0.push(r.clone());
        r
    }
}

fn criterion_1(all: &mut Collected) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for name in TWO_COMPONENT.iter().chain(&THREE_COMPONENT) {
        let r = all.verify(name);
        for needed in ["grinberg", "skew", "jacobi", "engines agree"] {
            if !r.checks.iter().any(|c| c.name == needed) {
                bad.push(format!("{}: {} missing", name, needed));
            }
        }
        bad.extend(failed_checks(&r));
    }
    let t = start.elapsed();
    Outcome {
        pass: bad.is_empty() && t < CLASSIFICATION_LIMIT,
        detail: format!("2 + 11 forms, {:.2?} (limit {:?}) {}", t, CLASSIFICATION_LIMIT, bad.join("; ")),
    }
}

fn criterion_2(all: &mut Collected) -> Outcome {
    let start = Instant::now();
    let r = all.verify("GAS_DYNAMICS");
    let t = start.elapsed();
    let bad = failed_checks(&r);
    Outcome { pass: bad.is_empty() && t < GAS_LIMIT, detail: format!("{:.2?} (limit {:?}) {}", t, GAS_LIMIT, bad.join("; ")) }
}

fn criterion_3() -> Outcome {
    let got = [
        coefficient_count(2, 1) + coefficient_count(2, 2),
        coefficient_count(3, 1) + coefficient_count(3, 2),
        free_coefficient_count(2, 1) as u64,
        free_coefficient_count(2, 2) as u64,
    ];
    Outcome { pass: got == [104, 432, 12, 30], detail: format!("unknowns {} and {}, free {} + {}", got[0], got[1], got[2], got[3]) }
}

fn timed_family(all: &mut Collected, names: &[&str], check: &str, limit: Duration) -> Outcome {
    let mut bad = Vec::new();
    let mut times = Vec::new();
    for name in names {
        let start = Instant::now();
        let r = all.verify(name);
        let t = start.elapsed();
        times.push(format!("{} {:.2?}", name, t));
        match r.checks.iter().find(|c| c.name == check) {
            Some(c) if c.pass && c.oracle_agrees => {}
            Some(_) => bad.push(format!("{} {}", name, check)),
            None => bad.push(format!("{} has no {}", name, check)),
        }
        bad.extend(failed_checks(&r));
        if t >= limit {
            bad.push(format!("{} over {:?}", name, limit));
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{} {}", times.join(", "), bad.join("; ")) }
}

fn driver(all: &mut Collected, r: Report) -> Outcome {
    let bad = failed_checks(&r);
    let detail = format!("{} identities {}", r.checks.len(), bad.join("; "));
    let pass = bad.is_empty();
    all.0.push(r);
    Outcome { pass, detail }
}

fn criterion_7(all: &mut Collected) -> Outcome {
    let r = catalog::verify_equivalences(&opts()).expect("equivalences run");
    let example = r.checks.iter().any(|c| c.name.contains("1/u3") && c.pass);
    let mut out = driver(all, r);
    out.pass &= example;
    out
}

fn picks(runner: &mut TestRunner, len: usize, range: std::ops::Range<usize>) -> Vec<usize> {
    proptest::collection::vec(range, len).new_tree(runner).unwrap().current()
}

fn criterion_8(all: &Collected) -> Outcome {
    let caps = Caps::default();
    let mut runner = TestRunner::deterministic();
    let mut skew_ok = 0;
    for n in [2, 3] {
        for degree in [1, 2] {
            for _ in 0..SKEW_CASES {
                let p = picks(&mut runner, 64, 0..30);
                skew_ok += lemma_case(n, degree, &p) as usize;
            }
        }
    }
    let mut bracket_ok = 0;
    for k in 0..BRACKET_PAIRS {
        let p = random_hydro(2, &picks(&mut runner, 24, 0..30)).to_bivector();
        let q = random_hydro(2, &picks(&mut runner, 24, 0..30)).to_bivector();
        let r = random_hydro(2, &picks(&mut runner, 24, 0..30)).to_bivector();
        let c = Scalar::int(k as i64 - 4);
        let pq = schouten(&p, &q, &caps).unwrap();
        let sym = tri_diff(&pq, &schouten(&q, &p, &caps).unwrap()).is_zero();
        let sum = schouten(&p.add(&q).unwrap(), &r, &caps).unwrap();
        let split = schouten(&p, &r, &caps).unwrap().add(&schouten(&q, &r, &caps).unwrap()).unwrap();
        let scaled = schouten(&p.scale_scalar(&c), &r, &caps).unwrap();
        let lin = tri_diff(&sum, &split).is_zero() && tri_diff(&scaled, &schouten(&p, &r, &caps).unwrap().scale_scalar(&c)).is_zero();
        bracket_ok += (sym && lin) as usize;
    }
    let oracle_bad: Vec<String> =
        all.0.iter().flat_map(|r| r.checks.iter().filter(|c| !c.oracle_agrees).map(move |c| format!("{}: {}", r.case, c.name))).collect();
    let total_skew = 4 * SKEW_CASES;
    Outcome {
        pass: skew_ok == total_skew && bracket_ok == BRACKET_PAIRS && oracle_bad.is_empty(),
        detail: format!(
            "skew {}/{}, bracket {}/{}, oracle on {} reports with {} seeds {}",
            skew_ok,
            total_skew,
            bracket_ok,
            BRACKET_PAIRS,
            all.0.len(),
            SEEDS,
            oracle_bad.join("; ")
        ),
    }
}

fn criterion_9() -> Outcome {
    let caps = Caps::default();
    let mut bad = Vec::new();
    for (num, den) in [(1, 1), (2, 1), (-3, 2)] {
        let c = Expr::ratio(num, den);
        let mut op = HydroOp::zero(2);
        op.set_g(1, 1, Expr::one());
        op.set_b(1, 2, 2, c.clone());
        op.set_b(2, 1, 2, -&c);
        let rep = grinberg_residuals(&op);
        let g4 = rep.residuals.iter().find(|r| r.condition == 4 && r.indices == [1, 2, 1, 2]).map(|r| r.residual.clone());
        if g4 != Some(-(&c * &c)) {
            bad.push(format!("c = {}: G4 residual {:?}", c, g4.map(|e| e.to_string())));
        }
        if rep.failures().any(|r| r.condition != 4) {
            bad.push(format!("c = {}: conditions other than G4 fail", c));
        }
        if grinberg_equiv_jacobi(&op, &caps) != Ok(false) {
            bad.push(format!("c = {}: Jacobi does not fail consistently", c));
        }
    }
    let mut ctx = hydrodef_core::symcore::ParseContext::new(2);
    ctx.declare(hydrodef_core::FuncSym::new("p", &[2]));
    let entry = catalog::build_with("DEF1_P1", &[("p", ctx.parse("p*u1").unwrap())]).unwrap();
    let r = catalog::verify_entry(&entry, &opts()).unwrap();
    let p0p1 = r.checks.iter().find(|c| c.name == "[p0,p1]").unwrap();
    if p0p1.pass || !p0p1.oracle_agrees {
        bad.push("u1-dependent p passes [P0,P1]".into());
    }
    Outcome { pass: bad.is_empty(), detail: format!("G4 = -c^2 for c in 1, 2, -3/2; [P0,P1] fails for p(u2) u1 {}", bad.join("; ")) }
}

fn main() {
    let mut all = Collected(Vec::new());
    let mut results: Vec<(u8, &str, Criterion)> = vec![
        (1, "classification suite", Box::new(criterion_1)),
        (2, "gas dynamics", Box::new(criterion_2)),
        (3, "coefficient counts", Box::new(|_| criterion_3())),
        (4, "first-order families [P0,P1] = 0", Box::new(|a| timed_family(a, &FIRST_ORDER, "[p0,p1]", FIRST_ORDER_LIMIT))),
        (5, "second-order families 2[P0,P2] + [P1,P1] = 0", Box::new(|a| timed_family(a, &SECOND_ORDER, "order 2", SECOND_ORDER_LIMIT))),
        (6, "Miura reductions", Box::new(|a| driver(a, catalog::verify_miura_reductions(&opts()).expect("reductions run")))),
        (7, "equivalence maps", Box::new(criterion_7)),
        (8, "cross-engine properties", Box::new(|a| criterion_8(a))),
        (9, "negative controls", Box::new(|_| criterion_9())),
    ];
    let mut failures = 0;
    for (k, name, run) in results.drain(..) {
        let start = Instant::now();
        let out = run(&mut all);
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        failures += !out.pass as usize;
        println!("criterion {}: {} {} [{:.2?}] {}", k, verdict, name, start.elapsed(), out.detail.trim_end());
    }
    if failures > 0 {
        println!("{} acceptance criteria failed", failures);
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria pass");
}
