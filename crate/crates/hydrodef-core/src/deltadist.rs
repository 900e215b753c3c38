//! Finite δ-series on the diagonal.
//!
//! A [`BiDist`] is `Σ_m A_m(x) δ^(m)(x-y)` and a [`TriDist`] is
//! `Σ_{a,b} C_ab(x) δ^(a)(x-y) δ^(b)(x-z)`; coefficients always sit at `x`.
//! Terms produced at other points are brought back with
//! `f(y) δ^(s)(x-y) = Σ_m C(s,m) f^(m)(x) δ^(s-m)(x-y)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Caps, Error, Result};
use crate::scalar::{binom, Scalar};
use crate::symcore::{Expr, JetVar};

fn sign(k: u32) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn binom_i(n: u32, k: u32) -> i64 {
    i64::try_from(binom(n, k)).expect("small binomial")
}

/// `Σ_m A_m(x) δ^(m)(x-y)`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BiDist {
    terms: BTreeMap<u8, Expr>,
}

impl BiDist {
    pub fn zero() -> Self {
        BiDist::default()
    }

    /// `coeff * δ^(order)(x-y)`.
    pub fn delta(order: u8, coeff: Expr) -> Self {
        let mut d = BiDist::zero();
        d.add_term(order, coeff);
        d
    }

    pub fn from_terms<I: IntoIterator<Item = (u8, Expr)>>(it: I) -> Self {
        let mut d = BiDist::zero();
        for (m, e) in it {
            d.add_term(m, e);
        }
        d
    }

    pub fn add_term(&mut self, order: u8, coeff: Expr) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(order).or_default();
        *slot = slot.add_expr(&coeff);
        if slot.is_zero() {
            self.terms.remove(&order);
        }
    }

    pub fn coeff(&self, order: u8) -> Expr {
        self.terms.get(&order).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &Expr)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> Option<u8> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, other: &BiDist) -> BiDist {
        let mut out = self.clone();
        for (m, e) in &other.terms {
            out.add_term(*m, e.clone());
        }
        out
    }

    pub fn sub(&self, other: &BiDist) -> BiDist {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> BiDist {
        BiDist { terms: self.terms.iter().map(|(m, e)| (*m, e.neg_expr())).collect() }
    }

    /// Multiply by a function of `x`.
    pub fn scale(&self, f: &Expr) -> BiDist {
        BiDist::from_terms(self.terms.iter().map(|(m, e)| (*m, e.mul_expr(f))))
    }

    pub fn scale_scalar(&self, c: &Scalar) -> BiDist {
        BiDist::from_terms(self.terms.iter().map(|(m, e)| (*m, e.scale(c))))
    }

    /// Multiply by `f(y)` and re-expand with coefficients at `x`.
    pub fn mul_at_y(&self, f: &Expr, caps: &Caps) -> Result<BiDist> {
        let top = match self.max_order() {
            Some(t) => t,
            None => return Ok(BiDist::zero()),
        };
        let mut ders = Vec::with_capacity(top as usize + 1);
        ders.push(f.clone());
        for k in 1..=top as usize {
            let d = ders[k - 1].total_x(caps)?;
            ders.push(d);
        }
        let mut out = BiDist::zero();
        for (s, a) in &self.terms {
            for m in 0..=*s {
                if ders[m as usize].is_zero() {
                    continue;
                }
                let c = Scalar::int(binom_i(*s as u32, m as u32));
                out.add_term(s - m, a.mul_expr(&ders[m as usize]).scale(&c));
            }
        }
        Ok(out)
    }

    /// The series of `P(y,x)` written in the `x` basis.
    pub fn flip(&self, caps: &Caps) -> Result<BiDist> {
        let mut out = BiDist::zero();
        for (m, a) in &self.terms {
            let single = BiDist::delta(*m, Expr::int(sign(*m as u32)));
            out = out.add(&single.mul_at_y(a, caps)?);
        }
        Ok(out)
    }

    /// Derivative with respect to the first point.
    pub fn dx(&self, caps: &Caps) -> Result<BiDist> {
        let mut out = BiDist::zero();
        for (m, a) in &self.terms {
            caps.check_delta(*m as u32 + 1)?;
            out.add_term(*m, a.total_x(caps)?);
            out.add_term(m + 1, a.clone());
        }
        Ok(out)
    }

    /// Derivative with respect to the second point: `∂_y δ^(m)(x-y) = -δ^(m+1)(x-y)`.
    pub fn dy(&self, caps: &Caps) -> Result<BiDist> {
        let mut out = BiDist::zero();
        for (m, a) in &self.terms {
            caps.check_delta(*m as u32 + 1)?;
            out.add_term(m + 1, a.neg_expr());
        }
        Ok(out)
    }

    /// `∂_y` computed by flipping, differentiating in the first point and flipping back.
    pub fn dy_via_flip(&self, caps: &Caps) -> Result<BiDist> {
        self.flip(caps)?.dx(caps)?.flip(caps)
    }

    pub fn dx_n(&self, n: u32, caps: &Caps) -> Result<BiDist> {
        let mut d = self.clone();
        for _ in 0..n {
            d = d.dx(caps)?;
        }
        Ok(d)
    }

    pub fn dy_n(&self, n: u32, caps: &Caps) -> Result<BiDist> {
        let mut d = self.clone();
        for _ in 0..n {
            d = d.dy(caps)?;
        }
        Ok(d)
    }

    /// Partial derivative of every coefficient.
    pub fn partial(&self, v: JetVar) -> BiDist {
        BiDist::from_terms(self.terms.iter().map(|(m, e)| (*m, e.partial(v))))
    }

    /// Highest jet order among the coefficients.
    pub fn max_jet_order(&self) -> Option<u8> {
        self.terms.values().filter_map(|e| e.max_jet_order()).max()
    }

    /// Jet variables any coefficient depends on.
    pub fn dependencies(&self) -> Vec<JetVar> {
        let mut v: Vec<JetVar> = self.terms.values().flat_map(|e| e.dependencies()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Zero test cross-checked against evaluation on `seeds`.
    pub fn vanishes_at(&self, seeds: core::ops::Range<u64>) -> Result<bool> {
        for e in self.terms.values() {
            if !e.vanishes_at(seeds.clone())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for BiDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, e)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})*delta^({})", e, m)?;
        }
        Ok(())
    }
}

/// `Σ C_ab(x) δ^(a)(x-y) δ^(b)(x-z)`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TriDist {
    terms: BTreeMap<(u8, u8), Expr>,
}

impl TriDist {
    pub fn zero() -> Self {
        TriDist::default()
    }

    pub fn add_term(&mut self, a: u8, b: u8, coeff: Expr) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry((a, b)).or_default();
        *slot = slot.add_expr(&coeff);
        if slot.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn coeff(&self, a: u8, b: u8) -> Expr {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u8, u8), &Expr)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &TriDist) -> TriDist {
        let mut out = self.clone();
        for ((a, b), e) in &other.terms {
            out.add_term(*a, *b, e.clone());
        }
        out
    }

    pub fn scale_scalar(&self, c: &Scalar) -> TriDist {
        let mut out = TriDist::zero();
        for ((a, b), e) in &self.terms {
            out.add_term(*a, *b, e.scale(c));
        }
        out
    }

    pub fn vanishes_at(&self, seeds: core::ops::Range<u64>) -> Result<bool> {
        for e in self.terms.values() {
            if !e.vanishes_at(seeds.clone())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for TriDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, ((a, b), e)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})*delta^({})(x-y)*delta^({})(x-z)", e, a, b)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Point {
    X,
    Y,
    Z,
}

/// `δ^(order)(from - to)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DeltaFactor {
    pub from: Point,
    pub to: Point,
    pub order: u8,
}

impl DeltaFactor {
    pub fn new(from: Point, to: Point, order: u8) -> Self {
        DeltaFactor { from, to, order }
    }
}

/// A coefficient evaluated at one point times two δ-factors.
#[derive(Clone, Debug)]
pub struct RawTerm {
    pub coeff: Expr,
    pub at: Point,
    pub factors: Vec<DeltaFactor>,
}

/// Which rewrite to prefer when both apply; results must agree.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Elimination {
    /// Remove a `δ(y-z)` factor before moving the coefficient.
    PairFirst,
    /// Move the coefficient to `x` whenever a connecting factor exists.
    CoefficientFirst,
}

// Canonical pair index: 0 = (x,y), 1 = (x,z), 2 = (y,z).
#[derive(Clone, Copy, Debug)]
struct Item {
    at: Point,
    deriv: u8,
    mult: i64,
    orders: [Option<u8>; 3],
}

fn pair_index(f: &DeltaFactor) -> Result<(usize, i64)> {
    use Point::*;
    let o = f.order as u32;
    Ok(match (f.from, f.to) {
        (X, Y) => (0, 1),
        (Y, X) => (0, sign(o)),
        (X, Z) => (1, 1),
        (Z, X) => (1, sign(o)),
        (Y, Z) => (2, 1),
        (Z, Y) => (2, sign(o)),
        _ => return Err(Error::Malformed(format!("degenerate factor {:?}", f))),
    })
}

fn step(it: Item, strategy: Elimination, out: &mut Vec<Item>) -> bool {
    let [xy, xz, yz] = it.orders;
    let move_coeff = |it: Item, via: usize, out: &mut Vec<Item>| {
        let m = it.orders[via].unwrap();
        for p in 0..=m {
            let mut n = it;
            n.at = Point::X;
            n.deriv += p;
            n.mult *= binom_i(m as u32, p as u32);
            n.orders[via] = Some(m - p);
            out.push(n);
        }
    };
    let eliminate = |it: Item, out: &mut Vec<Item>| {
        let a = it.orders[2].unwrap();
        if let Some(m) = it.orders[0] {
            // δ^(a)(y-z) δ^(m)(x-y) = Σ_k C(m,k) δ^(a+k)(x-z) δ^(m-k)(x-y)
            for k in 0..=m {
                let mut n = it;
                n.mult *= binom_i(m as u32, k as u32);
                n.orders = [Some(m - k), Some(a + k), None];
                out.push(n);
            }
        } else {
            // δ^(a)(y-z) δ^(q)(x-z) = (-1)^a Σ_k C(q,k) δ^(a+k)(x-y) δ^(q-k)(x-z)
            let q = it.orders[1].unwrap();
            for k in 0..=q {
                let mut n = it;
                n.mult *= sign(a as u32) * binom_i(q as u32, k as u32);
                n.orders = [Some(a + k), Some(q - k), None];
                out.push(n);
            }
        }
    };
    if it.at == Point::X && yz.is_none() {
        return false;
    }
    let can_move = match it.at {
        Point::X => None,
        Point::Y => xy.map(|_| 0),
        Point::Z => xz.map(|_| 1),
    };
    match (strategy, can_move, yz) {
        (Elimination::CoefficientFirst, Some(via), _) => move_coeff(it, via, out),
        (_, _, Some(_)) => eliminate(it, out),
        (_, Some(via), None) => move_coeff(it, via, out),
        (_, None, None) => unreachable!("two canonical factors always connect"),
    }
    true
}

/// Bring raw three-point terms to the canonical `x` basis.
pub fn assemble_tri(terms: &[RawTerm], caps: &Caps) -> Result<TriDist> {
    assemble_tri_with(terms, Elimination::PairFirst, caps)
}

pub fn assemble_tri_with(terms: &[RawTerm], strategy: Elimination, caps: &Caps) -> Result<TriDist> {
    let mut out = TriDist::zero();
    for t in terms {
        if t.factors.len() != 2 {
            return Err(Error::Malformed(format!("expected two δ-factors, got {}", t.factors.len())));
        }
        let mut orders = [None; 3];
        let mut mult = 1;
        for f in &t.factors {
            let (idx, s) = pair_index(f)?;
            if orders[idx].is_some() {
                return Err(Error::Malformed("repeated δ-factor".into()));
            }
            orders[idx] = Some(f.order);
            mult *= s;
        }
        let mut todo = alloc::vec![Item { at: t.at, deriv: 0, mult, orders }];
        let mut done: BTreeMap<(u8, u8, u8), i64> = BTreeMap::new();
        while let Some(it) = todo.pop() {
            if !step(it, strategy, &mut todo) {
                let a = it.orders[0].unwrap();
                let b = it.orders[1].unwrap();
                *done.entry((a, b, it.deriv)).or_insert(0) += it.mult;
            }
        }
        let mut ders: Vec<Expr> = alloc::vec![t.coeff.clone()];
        for ((a, b, d), mult) in done {
            if mult == 0 {
                continue;
            }
            caps.check_delta(a.max(b) as u32)?;
            while ders.len() <= d as usize {
                let next = ders.last().unwrap().total_x(caps)?;
                ders.push(next);
            }
            out.add_term(a, b, ders[d as usize].scale(&Scalar::int(mult)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::FuncSym;

    #[test]
    fn flip_second_derivative() {
        let caps = Caps::default();
        let a = FuncSym::new("A", &[1]);
        let ax = Expr::func(&a);
        let d = BiDist::delta(2, ax.clone());
        let f = d.flip(&caps).unwrap();
        let a1 = ax.total_x(&caps).unwrap();
        let a2 = a1.total_x(&caps).unwrap();
        let expect = BiDist::from_terms([(2, ax.clone()), (1, a1.scale(&Scalar::int(2))), (0, a2)]);
        assert_eq!(f, expect);
        assert_eq!(f.flip(&caps).unwrap(), d);
    }

    #[test]
    fn dy_routes_agree() {
        let caps = Caps::default();
        let d = BiDist::from_terms([(1, Expr::jet(1, 0)), (0, Expr::jet(2, 1))]);
        assert_eq!(d.dy(&caps).unwrap(), d.dy_via_flip(&caps).unwrap());
    }

    #[test]
    fn malformed_terms_rejected() {
        let caps = Caps::default();
        let t = RawTerm {
            coeff: Expr::one(),
            at: Point::X,
            factors: alloc::vec![
                DeltaFactor::new(Point::X, Point::Y, 0),
                DeltaFactor::new(Point::X, Point::Z, 0),
                DeltaFactor::new(Point::Y, Point::Z, 0)
            ],
        };
        assert!(matches!(assemble_tri(&[t], &caps), Err(Error::Malformed(_))));
    }
}
