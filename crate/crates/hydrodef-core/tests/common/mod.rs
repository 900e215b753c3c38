//! Random operators shared by the property and acceptance targets.
#![allow(dead_code)]

use hydrodef_core::bivectors::{Bivector, Deformation, HydroOp, Tensor};
use hydrodef_core::schouten::Trivector;
use hydrodef_core::symcore::ParseContext;
use hydrodef_core::{Caps, Expr, FuncSym, Scalar};

pub fn ctx(n: u8) -> ParseContext {
    let mut c = ParseContext::new(n);
    c.declare(FuncSym::new("p", &[2]));
    c.declare(FuncSym::new("q", &[1, 2]));
    c
}

pub fn e(n: u8, s: &str) -> Expr {
    ctx(n).parse(s).unwrap()
}

/// Coefficient pool for random tensors; indices past the end mean zero.
pub const POOL: [&str; 10] = ["1", "u1", "u2", "u1*u2", "p", "p'", "u1^2", "-2", "3/2*u2", "p*u1"];

pub fn coeff(n: u8, k: usize) -> Option<Expr> {
    POOL.get(k).map(|s| e(n, s))
}

pub fn random_deformation(n: usize, degree: u8, picks: &[usize]) -> Deformation {
    let mut d = Deformation::zero(n, degree);
    let mut it = picks.iter().cycle();
    let tensors: Vec<&mut Tensor> = match &mut d {
        Deformation::First { a, b, c, d } => vec![a, b, c, d],
        Deformation::Second { e, f, g, h, l, m, nn } => vec![e, f, g, h, l, m, nn],
    };
    for t in tensors {
        for idx in t.indices() {
            if let Some(c) = coeff(n as u8, *it.next().unwrap()) {
                t.set(&idx, c);
            }
        }
    }
    d
}

/// `(B - B*)/2`, the skew part of `b`.
pub fn skew_part(b: &Bivector, caps: &Caps) -> Bivector {
    let mut half = Bivector::zero(b.n());
    for ((i, j), d) in b.skew_defect(caps).unwrap() {
        half.set(i, j, d.scale_scalar(&Scalar::ratio(1, 2)));
    }
    b.sub(&half).unwrap()
}

pub fn closed_form_skew(d: &Deformation) -> bool {
    d.skew_conditions_closed().iter().all(|r| r.residual.is_zero())
}

pub fn random_hydro(n: usize, picks: &[usize]) -> HydroOp {
    let mut op = HydroOp::zero(n);
    let mut it = picks.iter().cycle();
    for i in 1..=n {
        for j in i..=n {
            if let Some(c) = coeff(n as u8, *it.next().unwrap()) {
                op.set_g(i, j, c.clone());
                op.set_g(j, i, c);
            }
        }
    }
    for idx in op.b.indices() {
        if let Some(c) = coeff(n as u8, *it.next().unwrap()) {
            op.b.set(&idx, c);
        }
    }
    op
}

pub fn tri_diff(a: &Trivector, b: &Trivector) -> Trivector {
    a.add(&b.scale_scalar(&Scalar::int(-1))).unwrap()
}

/// Closed-form and δ-flip skew tests agree on a random deformation and on
/// its skew part, and the skew part passes both.
pub fn lemma_case(n: usize, degree: u8, picks: &[usize]) -> bool {
    let caps = Caps::default();
    let d = random_deformation(n, degree, picks);
    let b = d.to_bivector();
    if closed_form_skew(&d) != b.is_skew(&caps).unwrap() {
        return false;
    }
    let s = skew_part(&b, &caps);
    let ds = Deformation::from_bivector(&s, degree).unwrap();
    s.is_skew(&caps).unwrap() && closed_form_skew(&ds)
}
