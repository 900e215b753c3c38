//! Tensor conditions on `(g, b)` equivalent to the Poisson property of a
//! hydrodynamic operator.

use alloc::format;
use alloc::vec::Vec;

use crate::bivectors::HydroOp;
use crate::error::{Caps, Error, Result};
use crate::schouten::jacobi_residual;
use crate::symcore::{Expr, JetVar};

/// One residual `LHS - RHS` of a labelled condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    /// Condition number, 1 to 5.
    pub condition: u8,
    pub indices: Vec<usize>,
    pub residual: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrinbergReport {
    /// Every residual, zero or not, in index order.
    pub residuals: Vec<Residual>,
}

impl GrinbergReport {
    pub fn pass(&self) -> bool {
        self.residuals.iter().all(|r| r.residual.is_zero())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !r.residual.is_zero())
    }

    pub fn condition_passes(&self, condition: u8) -> bool {
        self.residuals.iter().filter(|r| r.condition == condition).all(|r| r.residual.is_zero())
    }
}

fn d(e: &Expr, k: usize) -> Expr {
    e.partial(JetVar::new(k as u8, 0))
}

pub fn grinberg_residuals(op: &HydroOp) -> GrinbergReport {
    let n = op.n();
    let g = |i, j| op.g(i, j);
    let b = |i, j, k| op.b(i, j, k);
    let mut out = Vec::new();
    let mut push = |condition: u8, indices: Vec<usize>, residual: Expr| out.push(Residual { condition, indices, residual });
    let r = 1..=n;
    for i in r.clone() {
        for j in r.clone() {
            push(1, alloc::vec![i, j], g(i, j) - g(j, i));
        }
    }
    for i in r.clone() {
        for j in r.clone() {
            for k in r.clone() {
                push(2, alloc::vec![i, j, k], &(&d(g(i, j), k) - b(i, j, k)) - b(j, i, k));
            }
        }
    }
    for i in r.clone() {
        for j in r.clone() {
            for k in r.clone() {
                let mut acc = Expr::zero();
                for t in r.clone() {
                    acc = &(&acc + &(g(t, k) * b(j, i, t))) - &(g(t, j) * b(k, i, t));
                }
                push(3, alloc::vec![i, j, k], acc);
            }
        }
    }
    for i in r.clone() {
        for j in r.clone() {
            for k in r.clone() {
                for rr in r.clone() {
                    let mut acc = Expr::zero();
                    for t in r.clone() {
                        acc = &(&acc + &(b(i, j, t) * b(t, k, rr))) - &(b(i, k, t) * b(t, j, rr));
                        let curl = &d(b(j, k, rr), t) - &d(b(j, k, t), rr);
                        acc = &acc - &(g(t, i) * &curl);
                    }
                    push(4, alloc::vec![i, j, k, rr], acc);
                }
            }
        }
    }
    for i in r.clone() {
        for j in r.clone() {
            for k in r.clone() {
                for q in r.clone() {
                    for rr in r.clone() {
                        let mut acc = Expr::zero();
                        for (a, bb, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                            for t in r.clone() {
                                let c1 = &d(b(a, bb, t), q) - &d(b(a, bb, q), t);
                                let c2 = &d(b(a, bb, t), rr) - &d(b(a, bb, rr), t);
                                acc = &(&acc + &(&c1 * b(t, c, rr))) + &(&c2 * b(t, c, q));
                            }
                        }
                        push(5, alloc::vec![i, j, k, q, rr], acc);
                    }
                }
            }
        }
    }
    GrinbergReport { residuals: out }
}

/// Runs both the tensor conditions and the δ-level skew and Jacobi tests;
/// returns the shared verdict or an error if they disagree.
pub fn grinberg_equiv_jacobi(op: &HydroOp, caps: &Caps) -> Result<bool> {
    let tensor = grinberg_residuals(op).pass();
    let p = op.to_bivector();
    let delta = p.is_skew(caps)? && jacobi_residual(&p, caps)?.is_zero();
    if tensor != delta {
        return Err(Error::Inconsistent(format!("tensor conditions say {}, Schouten bracket says {}", tensor, delta)));
    }
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_b_fails_g4() {
        let mut op = HydroOp::zero(2);
        op.set_g(1, 1, Expr::one());
        op.set_b(1, 2, 2, Expr::one());
        op.set_b(2, 1, 2, Expr::int(-1));
        let rep = grinberg_residuals(&op);
        assert!(rep.condition_passes(2));
        assert!(!rep.condition_passes(4));
        let r = rep.residuals.iter().find(|r| r.condition == 4 && r.indices == [1, 2, 1, 2]).unwrap();
        assert_eq!(r.residual, Expr::int(-1));
        assert!(!grinberg_equiv_jacobi(&op, &Caps::default()).unwrap());
    }
}
