//! Partial derivatives in jet variables and the total derivative `d/dx`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::atom::{Atom, FuncAtom, JetVar, Rule};
use super::expr::Expr;
use super::poly::Poly;
use crate::error::{Caps, Error, Result};

/// Apply a derivation to a polynomial given its values on atoms.
fn derive_poly(p: &Poly, d_atom: &mut dyn FnMut(&Atom) -> Result<Expr>, memo: &mut BTreeMap<Atom, Expr>) -> Result<Expr> {
    // Group the Leibniz expansion by atom so each D(a) is used once.
    let mut by_atom: BTreeMap<Atom, Vec<(super::poly::Monomial, crate::scalar::Scalar)>> = BTreeMap::new();
    for (m, c) in p.terms() {
        for (a, e) in m.factors() {
            let coef = c * &crate::scalar::Scalar::int(*e as i64);
            by_atom.entry(a.clone()).or_default().push((m.without_one(a), coef));
        }
    }
    let mut acc = Expr::zero();
    for (a, terms) in by_atom {
        let da = match memo.get(&a) {
            Some(v) => v.clone(),
            None => {
                let v = d_atom(&a)?;
                memo.insert(a.clone(), v.clone());
                v
            }
        };
        if da.is_zero() {
            continue;
        }
        let q = Expr::from_poly(Poly::from_unsorted(terms));
        acc = acc.add_expr(&q.mul_expr(&da));
    }
    Ok(acc)
}

/// Quotient rule over a factored denominator.
fn derive_expr(e: &Expr, d_atom: &mut dyn FnMut(&Atom) -> Result<Expr>) -> Result<Expr> {
    let mut memo = BTreeMap::new();
    let dn = derive_poly(&e.num, d_atom, &mut memo)?;
    if e.den.is_empty() {
        return Ok(dn);
    }
    let inv_den = Expr { num: Poly::one(), den: e.den.clone() };
    let mut out = dn.mul_expr(&inv_den);
    let base = e.clone();
    for (f, k) in &e.den {
        let df = derive_poly(f, d_atom, &mut memo)?;
        if df.is_zero() {
            continue;
        }
        let ratio = df.div_expr(&Expr::from_poly(f.clone()))?;
        let term = base.mul_expr(&ratio).scale(&crate::scalar::Scalar::int(*k as i64));
        out = out.sub_expr(&term);
    }
    Ok(out)
}

/// Derivative of a formal function atom with respect to its argument slot `d`.
pub(crate) fn slot_derivative(f: &FuncAtom, d: usize) -> Expr {
    match &f.sym.rule {
        None => {
            let mut g = f.clone();
            g.deriv[d] += 1;
            Expr::atom(Atom::Func(g))
        }
        Some(Rule::Exp) => Expr::atom(Atom::Func(f.clone())),
        Some(Rule::Sin { .. }) => {
            let g = FuncAtom { sym: f.sym.partner().expect("partner"), deriv: f.deriv.clone(), args: f.args.clone() };
            Expr::atom(Atom::Func(g))
        }
        Some(Rule::Cos { .. }) => {
            let g = FuncAtom { sym: f.sym.partner().expect("partner"), deriv: f.deriv.clone(), args: f.args.clone() };
            Expr::atom(Atom::Func(g)).neg_expr()
        }
    }
}

fn atom_partial(a: &Atom, v: JetVar) -> Result<Expr> {
    match a {
        Atom::Jet(j) => Ok(if *j == v { Expr::one() } else { Expr::zero() }),
        Atom::Func(f) => {
            if v.order > 0 {
                return Ok(Expr::zero());
            }
            let mut acc = Expr::zero();
            for d in 0..f.sym.deps.len() {
                let inner = match &f.args {
                    None => {
                        if f.sym.deps[d] == v.comp {
                            Expr::one()
                        } else {
                            Expr::zero()
                        }
                    }
                    Some(args) => args[d].partial(v),
                };
                if inner.is_zero() {
                    continue;
                }
                acc = acc.add_expr(&slot_derivative(f, d).mul_expr(&inner));
            }
            Ok(acc)
        }
    }
}

/// Order-0 components a function atom depends on.
fn func_components(f: &FuncAtom) -> Vec<u8> {
    match &f.args {
        None => f.sym.deps.clone(),
        Some(args) => {
            let mut out: Vec<u8> = Vec::new();
            for e in args.iter() {
                for a in e.atoms() {
                    match a {
                        Atom::Jet(j) => out.push(j.comp),
                        Atom::Func(g) => out.extend(func_components(&g)),
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        }
    }
}

impl Expr {
    /// `∂/∂u^comp_(order)`.
    pub fn partial(&self, v: JetVar) -> Expr {
        derive_expr(self, &mut |a| atom_partial(a, v)).expect("partials cannot fail")
    }

    /// Total derivative `d/dx`, raising jet orders by one.
    pub fn total_x(&self, caps: &Caps) -> Result<Expr> {
        let out = derive_expr(self, &mut |a| match a {
            Atom::Jet(j) => {
                let order = j.order as u32 + 1;
                if order > caps.max_jet as u32 {
                    return Err(Error::JetOrder { order, cap: caps.max_jet });
                }
                Ok(Expr::jet(j.comp, j.order + 1))
            }
            Atom::Func(f) => {
                let mut acc = Expr::zero();
                for c in func_components(f) {
                    let p = atom_partial(a, JetVar::new(c, 0))?;
                    acc = acc.add_expr(&p.mul_expr(&Expr::jet(c, 1)));
                }
                Ok(acc)
            }
        })?;
        caps.check_terms(out.term_count())?;
        Ok(out)
    }

    /// `d^n/dx^n`.
    pub fn total_x_n(&self, n: u32, caps: &Caps) -> Result<Expr> {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.total_x(caps)?;
        }
        Ok(e)
    }

    /// Highest jet order per component among atoms of order >= 0.
    pub fn jet_vars(&self) -> Vec<JetVar> {
        self.atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Jet(j) => Some(j),
                Atom::Func(_) => None,
            })
            .collect()
    }

    /// Jet variables this expression can depend on, including the order-0
    /// variables hidden inside formal functions.
    pub fn dependencies(&self) -> Vec<JetVar> {
        let mut out = Vec::new();
        for a in self.atoms() {
            match a {
                Atom::Jet(j) => out.push(j),
                Atom::Func(f) => out.extend(func_components(&f).into_iter().map(|c| JetVar::new(c, 0))),
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::atom::FuncSym;

    #[test]
    fn total_derivative_of_function() {
        let caps = Caps::default();
        let f = FuncSym::new("F", &[2, 3]);
        let e = Expr::func(&f);
        let d = e.total_x(&caps).unwrap();
        let expect = &(&Expr::func_deriv(&f, &[1, 0]) * &Expr::jet(2, 1)) + &(&Expr::func_deriv(&f, &[0, 1]) * &Expr::jet(3, 1));
        assert_eq!(d, expect);
    }

    #[test]
    fn quotient_rule() {
        let caps = Caps::default();
        let e = Expr::jet(2, 1).div_expr(&Expr::jet(1, 0)).unwrap();
        let d = e.total_x(&caps).unwrap();
        let expect = &Expr::jet(2, 2).div_expr(&Expr::jet(1, 0)).unwrap()
            - &(&Expr::jet(2, 1) * &Expr::jet(1, 1)).div_expr(&Expr::jet(1, 0).pow(2).unwrap()).unwrap();
        assert!((&d - &expect).is_zero());
    }

    #[test]
    fn trig_rules() {
        let caps = Caps::default();
        let (s, c) = FuncSym::trig_pair("s", "c", 3);
        let e = &(&Expr::func(&s) * &Expr::func(&s)) + &(&Expr::func(&c) * &Expr::func(&c));
        assert!(e.sub_expr(&Expr::one()).is_zero());
        let d = Expr::func(&s).total_x(&caps).unwrap();
        assert_eq!(d, &Expr::func(&c) * &Expr::jet(3, 1));
    }

    #[test]
    fn jet_cap_enforced() {
        let caps = Caps { max_jet: 2, ..Caps::default() };
        assert!(matches!(Expr::jet(1, 2).total_x(&caps), Err(Error::JetOrder { order: 3, cap: 2 })));
    }
}
