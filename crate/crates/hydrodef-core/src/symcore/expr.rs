//! Rational differential functions `N / (f1^e1 * ... * fk^ek)`.
//!
//! Denominators are kept as a product of monic factors. Every operation cancels
//! factors that divide the numerator exactly, so `N == 0` is the zero test and
//! the representation is canonical over the factor base in use.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use super::atom::{Atom, FuncAtom, FuncSym, JetVar};
use super::poly::{Monomial, Poly};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Expr {
    pub(crate) num: Poly,
    /// Sorted, monic, non-constant, pairwise distinct.
    pub(crate) den: Vec<(Poly, u32)>,
}

/// A monomial in positive-order jet variables, as `(variable, exponent)` pairs.
pub type JetKey = Vec<(JetVar, u32)>;

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(Scalar::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::constant(Scalar::ratio(n, d))
    }

    pub fn constant(c: Scalar) -> Self {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn from_poly(p: Poly) -> Self {
        Expr { num: p, den: Vec::new() }
    }

    pub fn atom(a: Atom) -> Self {
        Expr::from_poly(Poly::atom(a))
    }

    /// `u^comp_(order)`.
    pub fn jet(comp: u8, order: u8) -> Self {
        Expr::atom(Atom::jet(comp, order))
    }

    /// The undifferentiated formal function at its declared arguments.
    pub fn func(sym: &alloc::sync::Arc<FuncSym>) -> Self {
        Expr::atom(Atom::Func(FuncAtom::new(sym.clone())))
    }

    /// A partial derivative of a formal function; `deriv` lists slot multiplicities.
    pub fn func_deriv(sym: &alloc::sync::Arc<FuncSym>, deriv: &[u8]) -> Self {
        let mut f = FuncAtom::new(sym.clone());
        f.deriv = deriv.to_vec();
        Expr::atom(Atom::Func(f))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom_factors(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.is_one()
    }

    pub fn term_count(&self) -> usize {
        self.num.len() + self.den.iter().map(|(f, _)| f.len()).sum::<usize>()
    }

    /// Product of the denominator factors, expanded.
    pub fn denominator(&self) -> Poly {
        let mut d = Poly::one();
        for (f, e) in &self.den {
            d = d.mul(&f.pow(*e));
        }
        d
    }

    fn build(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        cancel(num, den)
    }

    pub fn scale(&self, c: &Scalar) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn add_expr(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Expr::build(self.num.add(&other.num), self.den.clone());
        }
        let (den, ma, mb) = lcm(&self.den, &other.den);
        let num = self.num.mul(&ma).add(&other.num.mul(&mb));
        Expr::build(num, den)
    }

    pub fn sub_expr(&self, other: &Expr) -> Expr {
        self.add_expr(&other.neg_expr())
    }

    pub fn neg_expr(&self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul_expr(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.den.is_empty() && other.den.is_empty() {
            return Expr::from_poly(self.num.mul(&other.num));
        }
        // Cancel crosswise first so the product stays small.
        let a = cancel(self.num.clone(), other.den.clone());
        let b = cancel(other.num.clone(), self.den.clone());
        let mut den = a.den;
        for (f, e) in b.den {
            push_factor(&mut den, f, e);
        }
        Expr { num: a.num.mul(&b.num), den: sorted(den) }
    }

    pub fn pow(&self, e: i32) -> Result<Expr> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Expr::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul_expr(&base);
        }
        Ok(acc)
    }

    pub fn inv(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut num = Poly::one();
        for (f, e) in &self.den {
            num = num.mul(&f.pow(*e));
        }
        let known: Vec<&Poly> = self.den.iter().map(|(f, _)| f).collect();
        let (c, fs) = factor_against(&self.num, &known);
        let num = num.scale(&c.inv().expect("nonzero"));
        Ok(Expr::build(num, sorted(fs)))
    }

    pub fn div_expr(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Expr::zero());
        }
        let mut known: Vec<&Poly> = self.den.iter().map(|(f, _)| f).collect();
        known.extend(other.den.iter().map(|(f, _)| f));
        let (c, fs) = factor_against(&other.num, &known);
        let mut inv_den_num = Poly::one();
        for (f, e) in &other.den {
            inv_den_num = inv_den_num.mul(&f.pow(*e));
        }
        let recip = Expr::build(inv_den_num.scale(&c.inv().expect("nonzero")), sorted(fs));
        Ok(self.mul_expr(&recip))
    }

    /// Every atom occurring in the numerator or denominator.
    pub fn atoms(&self) -> alloc::collections::BTreeSet<Atom> {
        let mut s = alloc::collections::BTreeSet::new();
        for a in self.num.atoms() {
            s.insert(a.clone());
        }
        for (f, _) in &self.den {
            for a in f.atoms() {
                s.insert(a.clone());
            }
        }
        s
    }

    /// Highest jet order appearing, or `None` for jet-free expressions.
    pub fn max_jet_order(&self) -> Option<u8> {
        self.atoms()
            .iter()
            .filter_map(|a| match a {
                Atom::Jet(j) => Some(j.order),
                Atom::Func(_) => None,
            })
            .max()
    }

    /// Degree in the differential grading, or an error if inhomogeneous.
    pub fn degree(&self) -> Result<i64> {
        if self.is_zero() {
            return Ok(0);
        }
        let num = homogeneous_weight(&self.num)?;
        let mut d = num as i64;
        for (f, e) in &self.den {
            d -= homogeneous_weight(f)? as i64 * *e as i64;
        }
        Ok(d)
    }

    /// Coefficients with respect to monomials in jets of order >= 1.
    ///
    /// Fails if a denominator involves such jets.
    pub fn jet_coefficients(&self) -> Result<alloc::collections::BTreeMap<JetKey, Expr>> {
        for (f, _) in &self.den {
            if f.atoms().any(|a| matches!(a, Atom::Jet(j) if j.order > 0)) {
                return Err(Error::Precondition("denominator depends on derivatives".into()));
            }
        }
        let mut parts: alloc::collections::BTreeMap<JetKey, Vec<(Monomial, Scalar)>> = alloc::collections::BTreeMap::new();
        for (m, c) in self.num.terms() {
            let mut key = Vec::new();
            let mut rest = Vec::new();
            for (a, e) in m.factors() {
                match a {
                    Atom::Jet(j) if j.order > 0 => key.push((*j, *e)),
                    _ => rest.push((a.clone(), *e)),
                }
            }
            parts.entry(key).or_default().push((Monomial(rest), c.clone()));
        }
        Ok(parts.into_iter().map(|(k, v)| (k, Expr::build(Poly::from_unsorted(v), self.den.clone()))).collect())
    }

    /// Replace the formal function `sym`, with all its derivatives and
    /// composites, by `value`, an expression in its dependency variables.
    pub fn replace_function(&self, sym: &FuncSym, value: &Expr) -> Result<Expr> {
        self.substitute(&mut |a| {
            let f = match a {
                Atom::Func(f) => f,
                _ => return Ok(Expr::atom(a.clone())),
            };
            let args = match &f.args {
                Some(args) => Some(args.iter().map(|x| x.replace_function(sym, value)).collect::<Result<Vec<_>>>()?),
                None => None,
            };
            if *f.sym != *sym {
                return Ok(match args {
                    Some(args) => Expr::atom(Atom::Func(f.with_args(args))),
                    None => Expr::atom(a.clone()),
                });
            }
            let mut e = value.clone();
            for (slot, &k) in f.deriv.iter().enumerate() {
                for _ in 0..k {
                    e = e.partial(JetVar::new(sym.deps[slot], 0));
                }
            }
            match args {
                None => Ok(e),
                Some(args) => e.substitute(&mut |b| {
                    if let Atom::Jet(j) = b {
                        if let Some(p) = sym.deps.iter().position(|&d| j.order == 0 && d == j.comp) {
                            return Ok(args[p].clone());
                        }
                    }
                    Ok(Expr::atom(b.clone()))
                }),
            }
        })
    }

    /// Substitute `a -> value(a)` for every atom (a ring homomorphism).
    pub fn substitute(&self, value: &mut dyn FnMut(&Atom) -> Result<Expr>) -> Result<Expr> {
        let mut memo = alloc::collections::BTreeMap::new();
        let num = subst_poly(&self.num, value, &mut memo)?;
        let mut den = Expr::one();
        for (f, e) in &self.den {
            den = den.mul_expr(&subst_poly(f, value, &mut memo)?.pow(*e as i32)?);
        }
        num.div_expr(&den)
    }
}

fn subst_poly(p: &Poly, value: &mut dyn FnMut(&Atom) -> Result<Expr>, memo: &mut alloc::collections::BTreeMap<Atom, Expr>) -> Result<Expr> {
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut t = Expr::constant(c.clone());
        for (a, e) in m.factors() {
            let v = match memo.get(a) {
                Some(v) => v.clone(),
                None => {
                    let v = value(a)?;
                    memo.insert(a.clone(), v.clone());
                    v
                }
            };
            t = t.mul_expr(&v.pow(*e as i32)?);
        }
        acc = acc.add_expr(&t);
    }
    Ok(acc)
}

fn homogeneous_weight(p: &Poly) -> Result<u32> {
    let mut w = None;
    for (m, _) in p.terms() {
        let x = m.weight();
        match w {
            None => w = Some(x),
            Some(y) if y != x => return Err(Error::Inhomogeneous),
            _ => {}
        }
    }
    Ok(w.unwrap_or(0))
}

fn sorted(mut den: Vec<(Poly, u32)>) -> Vec<(Poly, u32)> {
    den.sort_by(|a, b| a.0.cmp(&b.0));
    den
}

fn push_factor(den: &mut Vec<(Poly, u32)>, f: Poly, e: u32) {
    if e == 0 {
        return;
    }
    match den.iter_mut().find(|(g, _)| *g == f) {
        Some(slot) => slot.1 += e,
        None => den.push((f, e)),
    }
}

/// Least common multiple of two factored denominators plus the cofactors.
fn lcm(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> (Vec<(Poly, u32)>, Poly, Poly) {
    let mut den: Vec<(Poly, u32)> = a.to_vec();
    let mut ma = Poly::one();
    let mut mb = Poly::one();
    for (f, eb) in b {
        match den.iter_mut().find(|(g, _)| g == f) {
            Some(slot) => {
                if *eb > slot.1 {
                    ma = ma.mul(&f.pow(eb - slot.1));
                    slot.1 = *eb;
                }
            }
            None => {
                den.push((f.clone(), *eb));
                ma = ma.mul(&f.pow(*eb));
            }
        }
    }
    for (f, ea) in a {
        let eb = b.iter().find(|(g, _)| g == f).map(|x| x.1).unwrap_or(0);
        if *ea > eb {
            mb = mb.mul(&f.pow(ea - eb));
        }
    }
    (sorted(den), ma, mb)
}

/// Split `p` into a scalar times monic factors: single atoms from the monomial
/// content, known factors by trial division, and one remaining cofactor.
fn factor_against(p: &Poly, known: &[&Poly]) -> (Scalar, Vec<(Poly, u32)>) {
    let mut out = Vec::new();
    let content = p.monomial_content();
    let mut rest = p.div_exact(&Poly::term(content.clone(), Scalar::one())).expect("content divides");
    for (a, e) in content.factors() {
        push_factor(&mut out, Poly::atom(a.clone()), *e);
    }
    for f in known {
        if f.len() < 2 {
            continue;
        }
        while rest.len() >= f.len() {
            match rest.div_exact(f) {
                Some(q) => {
                    rest = q;
                    push_factor(&mut out, (*f).clone(), 1);
                }
                None => break,
            }
        }
    }
    let (c, monic) = rest.monic();
    if monic.as_constant().is_none() {
        push_factor(&mut out, monic, 1);
    }
    (c, out)
}

/// Remove every denominator factor that divides the numerator and fold
/// constant factors into the numerator.
fn cancel(mut num: Poly, den: Vec<(Poly, u32)>) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    let mut out = Vec::with_capacity(den.len());
    for (f, mut e) in den {
        if let Some(a) = f.as_atom() {
            let have = num.terms().iter().map(|(m, _)| m.exponent(a)).min().unwrap_or(0);
            let k = have.min(e);
            if k > 0 {
                num = num.div_exact(&Poly::term(Monomial::atom(a.clone(), k), Scalar::one())).expect("atom divides");
                e -= k;
            }
        } else {
            while e > 0 {
                match num.div_exact(&f) {
                    Some(q) => {
                        num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
        }
        if e > 0 {
            out.push((f, e));
        }
    }
    Expr { num, den: sorted(out) }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.add_expr(rhs)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.sub_expr(rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.mul_expr(rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_expr()
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        self.add_expr(&rhs)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self.sub_expr(&rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        self.mul_expr(&rhs)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_expr()
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl core::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a.add_expr(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(k: u8) -> Expr {
        Expr::jet(k, 0)
    }

    #[test]
    fn fractions_cancel() {
        let d = &(&u(3) * &u(1)) - &u(2);
        let a = Expr::one().div_expr(&d).unwrap();
        let b = &a * &d;
        assert!(b.is_one());
        let s = &a.div_expr(&u(1)).unwrap() + &a;
        let back = &(&s * &d) * &u(1);
        assert_eq!(back, &u(1) + &Expr::one());
    }

    #[test]
    fn sign_normalised_factors() {
        let a = Expr::one().div_expr(&(&u(1) - &u(2))).unwrap();
        let b = Expr::one().div_expr(&(&u(2) - &u(1))).unwrap();
        assert!((&a + &b).is_zero());
        assert_eq!(a.denom_factors(), b.denom_factors());
    }

    #[test]
    fn degree_grading() {
        let e = &Expr::jet(1, 2) * &Expr::jet(2, 1);
        assert_eq!(e.degree().unwrap(), 3);
        assert!((&Expr::jet(1, 1) + &Expr::one()).degree().is_err());
    }
}
