//! Point transformations of the dependent variables and their action on
//! metrics, `b` symbols and full bivectors.
//!
//! A change is given by its forward map `u = φ(v)`, written in jet variables
//! that stand for `v`. The Jacobian `J = ∂v/∂u` is obtained by inverting
//! `∂φ/∂v`. An optional backward map `v = ψ(u)` is only used as a
//! consistency check.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::bivectors::{Bivector, HydroOp, Tensor};
use crate::deltadist::BiDist;
use crate::error::{Caps, Error, Result};
use crate::symcore::{Atom, Expr, JetVar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordChange {
    n: usize,
    forward: Vec<Expr>,
    backward: Option<Vec<Expr>>,
    /// `J^i_j = ∂v^i/∂u^j` in `v`, row-major.
    j: Vec<Expr>,
    /// `K^i_j = ∂u^i/∂v^j` in `v`, row-major.
    k: Vec<Expr>,
}

fn d0(e: &Expr, c: usize) -> Expr {
    e.partial(JetVar::new(c as u8, 0))
}

/// Inverse of a square matrix of expressions by Gauss-Jordan elimination.
pub fn invert(m: &[Expr], n: usize) -> Result<Vec<Expr>> {
    let mut a: Vec<Vec<Expr>> = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
    let mut inv: Vec<Vec<Expr>> = (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .min_by_key(|&r| a[r][col].term_count())
            .ok_or_else(|| Error::NotInvertible("singular Jacobian".into()))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].inv()?;
        for c in 0..n {
            a[col][c] = a[col][c].mul_expr(&p);
            inv[col][c] = inv[col][c].mul_expr(&p);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let x = a[col][c].mul_expr(&f);
                a[r][c] = a[r][c].sub_expr(&x);
                let y = inv[col][c].mul_expr(&f);
                inv[r][c] = inv[r][c].sub_expr(&y);
            }
        }
    }
    Ok(inv.into_iter().flatten().collect())
}

impl CoordChange {
    /// Build from `u^i = forward[i-1](v)` and an optional `v^i = backward[i-1](u)`.
    pub fn new(forward: Vec<Expr>, backward: Option<Vec<Expr>>) -> Result<Self> {
        let n = forward.len();
        if let Some(b) = &backward {
            if b.len() != n {
                return Err(Error::Dimension(format!("forward map has {} entries, backward {}", n, b.len())));
            }
        }
        for f in forward.iter().chain(backward.iter().flatten()) {
            if f.max_jet_order().unwrap_or(0) > 0 {
                return Err(Error::Precondition("point transformations cannot involve derivatives".into()));
            }
            if let Some(v) = f.dependencies().iter().find(|v| v.comp as usize > n) {
                return Err(Error::Dimension(format!("u{} in a {}-component change", v.comp, n)));
            }
        }
        let mut k = Vec::with_capacity(n * n);
        for f in &forward {
            for c in 1..=n {
                k.push(d0(f, c));
            }
        }
        let j = invert(&k, n)?;
        let ch = CoordChange { n, forward, backward, j, k };
        ch.check_backward()?;
        Ok(ch)
    }

    pub fn identity(n: usize) -> Self {
        let id: Vec<Expr> = (1..=n).map(|i| Expr::jet(i as u8, 0)).collect();
        CoordChange::new(id.clone(), Some(id)).expect("identity is invertible")
    }

    fn check_backward(&self) -> Result<()> {
        let b = match &self.backward {
            Some(b) => b,
            None => return Ok(()),
        };
        for (i, psi) in b.iter().enumerate() {
            if !(&self.substitute(psi, &Caps::default())? - &Expr::jet(i as u8 + 1, 0)).is_zero() {
                return Err(Error::NotInvertible(format!("backward map entry v{} does not invert the forward map", i + 1)));
            }
            for c in 1..=self.n {
                let dj = self.substitute(&d0(psi, c), &Caps::default())?;
                if !(&dj - &self.jac(i + 1, c)).is_zero() {
                    return Err(Error::NotInvertible(format!("Jacobian entry ({},{}) disagrees with the backward map", i + 1, c)));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn backward(&self) -> Option<&[Expr]> {
        self.backward.as_deref()
    }

    /// `J^i_j = ∂v^i/∂u^j`, written in `v`.
    pub fn jac(&self, i: usize, j: usize) -> Expr {
        self.j[(i - 1) * self.n + (j - 1)].clone()
    }

    /// `∂u^i/∂v^j`, written in `v`.
    pub fn inv_jac(&self, i: usize, j: usize) -> Expr {
        self.k[(i - 1) * self.n + (j - 1)].clone()
    }

    /// Rewrite an expression in `u` (jets and formal functions) in terms of `v`.
    pub fn substitute(&self, e: &Expr, caps: &Caps) -> Result<Expr> {
        let mut jets: BTreeMap<JetVar, Expr> = BTreeMap::new();
        self.subst_inner(e, caps, &mut jets)
    }

    fn subst_inner(&self, e: &Expr, caps: &Caps, jets: &mut BTreeMap<JetVar, Expr>) -> Result<Expr> {
        e.substitute(&mut |a| match a {
            Atom::Jet(v) => {
                if v.comp as usize > self.n {
                    return Err(Error::Dimension(format!("u{} in a {}-component change", v.comp, self.n)));
                }
                if let Some(x) = jets.get(v) {
                    return Ok(x.clone());
                }
                let x = self.forward[v.comp as usize - 1].total_x_n(v.order as u32, caps)?;
                jets.insert(*v, x.clone());
                Ok(x)
            }
            Atom::Func(f) => {
                let mut args = Vec::with_capacity(f.sym.deps.len());
                for d in 0..f.sym.deps.len() {
                    let a = f.arg(d);
                    args.push(self.subst_inner(&a, caps, &mut BTreeMap::new())?);
                }
                Ok(Expr::atom(Atom::Func(f.with_args(args))))
            }
        })
    }

    /// `J G J^t` in `v`.
    pub fn push_metric(&self, g: &Tensor, caps: &Caps) -> Result<Tensor> {
        self.check_n(g.n())?;
        let n = self.n;
        let mut gs = Tensor::zero(n, 2);
        for idx in g.indices() {
            gs.set(&idx, self.substitute(g.get(&idx), caps)?);
        }
        let mut out = Tensor::zero(n, 2);
        for l in 1..=n {
            for r in 1..=n {
                let mut acc = Expr::zero();
                for i in 1..=n {
                    for j in 1..=n {
                        let gij = gs.get(&[i, j]);
                        if gij.is_zero() {
                            continue;
                        }
                        acc = &acc + &(&(&self.jac(l, i) * &self.jac(r, j)) * gij);
                    }
                }
                out.set(&[l, r], acc);
            }
        }
        Ok(out)
    }

    /// `J^l_i g^{ij} ∂J^r_j/∂v^s`, the coefficient of `v^s_x` in `J G (J^t)_x`.
    pub fn nontensorial_part(&self, g: &Tensor, caps: &Caps) -> Result<Tensor> {
        self.check_n(g.n())?;
        let n = self.n;
        let mut out = Tensor::zero(n, 3);
        for l in 1..=n {
            for r in 1..=n {
                for s in 1..=n {
                    let mut acc = Expr::zero();
                    for i in 1..=n {
                        for j in 1..=n {
                            let gij = g.get(&[i, j]);
                            if gij.is_zero() {
                                continue;
                            }
                            let dj = d0(&self.jac(r, j), s);
                            if dj.is_zero() {
                                continue;
                            }
                            acc = &acc + &(&(&self.jac(l, i) * &self.substitute(gij, caps)?) * &dj);
                        }
                    }
                    out.set(&[l, r, s], acc);
                }
            }
        }
        Ok(out)
    }

    /// Transformed `b^{lr}_s`: the tensorial part plus `J^l_i g^{ij} ∂J^r_j/∂v^s`.
    pub fn push_b(&self, g: &Tensor, b: &Tensor, caps: &Caps) -> Result<Tensor> {
        self.check_n(b.n())?;
        let n = self.n;
        let mut bs = Tensor::zero(n, 3);
        for idx in b.indices() {
            let e = b.get(&idx);
            if !e.is_zero() {
                bs.set(&idx, self.substitute(e, caps)?);
            }
        }
        let mut out = self.nontensorial_part(g, caps)?;
        for l in 1..=n {
            for r in 1..=n {
                for s in 1..=n {
                    let mut acc = out.get(&[l, r, s]).clone();
                    for (i, j, k) in triples(n) {
                        let bijk = bs.get(&[i, j, k]);
                        if bijk.is_zero() {
                            continue;
                        }
                        let t = &(&(&self.jac(l, i) * &self.jac(r, j)) * &self.inv_jac(k, s)) * bijk;
                        acc = &acc + &t;
                    }
                    out.set(&[l, r, s], acc);
                }
            }
        }
        Ok(out)
    }

    /// The operator `(g, b)` in the new coordinates.
    pub fn push_hydro(&self, op: &HydroOp, caps: &Caps) -> Result<HydroOp> {
        Ok(HydroOp { g: self.push_metric(&op.g, caps)?, b: self.push_b(&op.g, &op.b, caps)? })
    }

    /// `P̃^{ij}_{x,y} = J^i_a(x) P^{ab}_{x,y} J^j_b(y)` in `v`.
    pub fn push_bivector(&self, p: &Bivector, caps: &Caps) -> Result<Bivector> {
        self.check_n(p.n())?;
        let n = self.n;
        let mut ps: Vec<BiDist> = Vec::with_capacity(n * n);
        for a in 1..=n {
            for b in 1..=n {
                let mut d = BiDist::zero();
                for (m, c) in p.get(a, b).terms() {
                    d.add_term(m, self.substitute(c, caps)?);
                }
                ps.push(d);
            }
        }
        let mut out = Bivector::zero(n);
        for i in 1..=n {
            for j in 1..=n {
                let mut acc = BiDist::zero();
                for b in 1..=n {
                    let mut row = BiDist::zero();
                    for a in 1..=n {
                        let pab = &ps[(a - 1) * n + (b - 1)];
                        if !pab.is_zero() {
                            row = row.add(&pab.scale(&self.jac(i, a)));
                        }
                    }
                    if !row.is_zero() {
                        acc = acc.add(&row.mul_at_y(&self.jac(j, b), caps)?);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `self` then `next`: with `u = φ(v)` and `v = χ(w)`, the change `u = φ(χ(w))`.
    pub fn then(&self, next: &CoordChange) -> Result<CoordChange> {
        self.check_n(next.n)?;
        let caps = Caps::default();
        let fwd = self.forward.iter().map(|f| next.substitute(f, &caps)).collect::<Result<Vec<_>>>()?;
        CoordChange::new(fwd, None)
    }

    /// Preserves the metric.
    pub fn is_admissible(&self, g: &Tensor, caps: &Caps) -> Result<bool> {
        let mut gs = Tensor::zero(self.n, 2);
        for idx in g.indices() {
            gs.set(&idx, self.substitute(g.get(&idx), caps)?);
        }
        Ok(self.push_metric(g, caps)? == gs)
    }

    /// Admissible and `b` transforms as a tensor.
    pub fn is_restricted(&self, g: &Tensor, caps: &Caps) -> Result<bool> {
        if !self.is_admissible(g, caps)? {
            return Ok(false);
        }
        let t = self.nontensorial_part(g, caps)?;
        Ok(t.indices().iter().all(|i| t.get(i).is_zero()))
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::Dimension(format!("{}-component change applied to {} components", self.n, n)));
        }
        Ok(())
    }
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (1..=n).flat_map(move |i| (1..=n).flat_map(move |j| (1..=n).map(move |k| (i, j, k))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    #[test]
    fn example_map_is_admissible_not_restricted() {
        // u1 = v1/v3, u2 = v2 v3, u3 = v3
        let fwd = alloc::vec![parse("u1/u3", 3, &[]).unwrap(), parse("u2*u3", 3, &[]).unwrap(), Expr::jet(3, 0),];
        let bwd = alloc::vec![parse("u3*u1", 3, &[]).unwrap(), parse("u2/u3", 3, &[]).unwrap(), Expr::jet(3, 0),];
        let ch = CoordChange::new(fwd, Some(bwd)).unwrap();
        let mut g = Tensor::zero(3, 2);
        g.set(&[1, 2], Expr::one());
        g.set(&[2, 1], Expr::one());
        let caps = Caps::default();
        assert!(ch.is_admissible(&g, &caps).unwrap());
        assert!(!ch.is_restricted(&g, &caps).unwrap());
        let nt = ch.nontensorial_part(&g, &caps).unwrap();
        assert_eq!(nt.get(&[2, 1, 3]), &Expr::jet(3, 0).inv().unwrap());
    }
}
