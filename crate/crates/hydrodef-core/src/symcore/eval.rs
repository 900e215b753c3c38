//! Evaluation at pseudo-random rational points, the independent zero oracle.

use alloc::format;
use alloc::string::String;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::atom::{Atom, Rule};
use super::expr::Expr;
use super::poly::Poly;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn draw(seed: u64, salt: u64, key: &str) -> (i64, i64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(key) ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = (rng.next_u32() % 97) as i64 - 48;
    let d = (rng.next_u32() % 23) as i64 + 1;
    (n, d)
}

/// Value assigned to an atom; depends only on `(seed, salt, atom)` so the
/// assignment is consistent across expressions.
fn atom_value(a: &Atom, seed: u64, salt: u64) -> Scalar {
    if let Atom::Func(f) = a {
        if let Some(rule) = &f.sym.rule {
            if let Rule::Sin { .. } | Rule::Cos { .. } = rule {
                // A rational point on the unit circle keyed by the pair.
                let (sin, cos) = match rule {
                    Rule::Sin { cos } => (String::from(&*f.sym.name), String::from(&**cos)),
                    Rule::Cos { sin } => (String::from(&**sin), String::from(&*f.sym.name)),
                    Rule::Exp => unreachable!(),
                };
                let args = match &f.args {
                    Some(a) => format!("{:?}", a),
                    None => String::new(),
                };
                let (n, d) = draw(seed, salt, &format!("trig:{}:{}:{}", sin, cos, args));
                let t = BigRational::new(BigInt::from(n), BigInt::from(d));
                let one = BigRational::from_integer(BigInt::from(1));
                let denom = &one + &t * &t;
                let s = BigRational::from_integer(BigInt::from(2)) * &t / &denom;
                let c = (&one - &t * &t) / &denom;
                return Scalar::from_rational(if matches!(rule, Rule::Sin { .. }) { s } else { c });
            }
        }
    }
    let (n, d) = draw(seed, salt, &format!("{:?}", a));
    Scalar::ratio(n, d)
}

fn eval_poly(p: &Poly, seed: u64, salt: u64) -> Scalar {
    let mut acc = Scalar::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for (a, e) in m.factors() {
            let v = atom_value(a, seed, salt);
            for _ in 0..*e {
                t = &t * &v;
            }
        }
        acc = &acc + &t;
    }
    acc
}

impl Expr {
    /// Evaluate with every atom replaced by a seeded pseudo-random rational.
    /// Points where the denominator vanishes are skipped deterministically.
    pub fn eval_random(&self, seed: u64) -> Result<Scalar> {
        for salt in 0..32u64 {
            let mut den = Scalar::one();
            for (f, e) in &self.den {
                let v = eval_poly(f, seed, salt);
                for _ in 0..*e {
                    den = &den * &v;
                }
            }
            if den.is_zero() {
                continue;
            }
            let num = eval_poly(&self.num, seed, salt);
            return Ok(&num * &den.inv().expect("nonzero"));
        }
        Err(Error::Evaluation("denominator vanished at every sample".into()))
    }

    /// `true` iff `eval_random` returns zero for every seed in `seeds`.
    pub fn vanishes_at(&self, seeds: core::ops::Range<u64>) -> Result<bool> {
        for s in seeds {
            if !self.eval_random(s)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::atom::FuncSym;

    #[test]
    fn evaluation_is_a_homomorphism() {
        let f = FuncSym::new("p", &[2]);
        let a = &Expr::func(&f) + &Expr::jet(1, 1);
        let b = Expr::jet(2, 0).div_expr(&(&Expr::jet(1, 0) - &Expr::int(3))).unwrap();
        for seed in 0..10 {
            let lhs = (&a * &b).eval_random(seed).unwrap();
            let rhs = &a.eval_random(seed).unwrap() * &b.eval_random(seed).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn trig_values_lie_on_circle() {
        let (s, c) = FuncSym::trig_pair("s", "c", 3);
        let e = &(&Expr::func(&s) * &Expr::func(&s)) + &(&Expr::func(&c) * &Expr::func(&c));
        let v = Expr { num: e.num.clone(), den: alloc::vec::Vec::new() };
        assert!(v.eval_random(7).unwrap().is_one());
    }
}
