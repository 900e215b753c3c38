//! Sparse multivariate polynomials over [`Scalar`] in [`Atom`] indeterminates.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::atom::{Atom, FuncAtom};
use crate::scalar::Scalar;

/// A power product, atoms sorted ascending, exponents positive.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(pub(crate) Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(alloc::vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    /// Differential weight (sum of jet orders).
    pub fn weight(&self) -> u32 {
        self.0.iter().map(|(a, e)| a.weight() * e).sum()
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        match self.0.binary_search_by(|(b, _)| b.cmp(a)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if self.0.is_empty() {
            return other.clone();
        }
        if other.0.is_empty() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when it divides exactly.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < other.0.len() && &other.0[j].0 < a {
                return None;
            }
            if j < other.0.len() && &other.0[j].0 == a {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((a.clone(), e - f)),
                }
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (a, e) in &self.0 {
            let f = other.exponent(a);
            if f > 0 {
                out.push((a.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }

    /// Remove one power of `a`; the atom must be present.
    pub(crate) fn without_one(&self, a: &Atom) -> Monomial {
        let mut out = self.0.clone();
        let i = out.binary_search_by(|(b, _)| b.cmp(a)).expect("atom present");
        if out[i].1 == 1 {
            out.remove(i);
        } else {
            out[i].1 -= 1;
        }
        Monomial(out)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic order; smaller atoms have higher priority.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.total_degree().cmp(&other.total_degree());
        if d != Ordering::Equal {
            return d;
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if a[i].1 != b[j].1 {
                        return a[i].1.cmp(&b[j].1);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        (a.len() - i).cmp(&(b.len() - j))
    }
}

/// Terms sorted by descending monomial; no zero coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly(pub(crate) Vec<(Monomial, Scalar)>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Scalar) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly(alloc::vec![(Monomial::one(), c)])
        }
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn atom(a: Atom) -> Self {
        Poly(alloc::vec![(Monomial::atom(a, 1), Scalar::one())])
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly(alloc::vec![(m, c)])
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.0
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self.0.len() {
            0 => Some(Scalar::zero()),
            1 if self.0[0].0.is_one() => Some(self.0[0].1.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].0.is_one() && self.0[0].1.is_one()
    }

    /// The single atom if this polynomial is exactly `1 * a`.
    pub fn as_atom(&self) -> Option<&Atom> {
        if self.0.len() == 1 && self.0[0].1.is_one() && self.0[0].0 .0.len() == 1 && self.0[0].0 .0[0].1 == 1 {
            Some(&self.0[0].0 .0[0].0)
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Scalar)> {
        self.0.first()
    }

    fn merge(&self, other: &Poly, negate_other: bool) -> Poly {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate_other { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate_other { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            let c = if negate_other { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Poly(self.0.iter().map(|(m, d)| (m.clone(), d * c)).collect())
    }

    /// Multiply by a single term; order is preserved by admissibility.
    pub fn mul_term(&self, m: &Monomial, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let p = Poly(self.0.iter().map(|(n, d)| (n.mul(m), d * c)).collect());
        p.reduce_relations()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.0.len() == 1 {
            return self.mul_term(&other.0[0].0, &other.0[0].1);
        }
        if self.0.len() == 1 {
            return other.mul_term(&self.0[0].0, &self.0[0].1);
        }
        let mut raw: Vec<(Monomial, Scalar)> = Vec::with_capacity(self.0.len() * other.0.len());
        for (m, c) in &self.0 {
            for (n, d) in &other.0 {
                raw.push((m.mul(n), c * d));
            }
        }
        Poly::from_unsorted(raw).reduce_relations()
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub(crate) fn from_unsorted(mut raw: Vec<(Monomial, Scalar)>) -> Poly {
        raw.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, Scalar)> = Vec::with_capacity(raw.len());
        for (m, c) in raw {
            match out.last_mut() {
                Some(last) if last.0 == m => {
                    last.1 = &last.1 + &c;
                    if last.1.is_zero() {
                        out.pop();
                    }
                }
                _ => {
                    if !c.is_zero() {
                        out.push((m, c));
                    }
                }
            }
        }
        Poly(out)
    }

    /// Rewrite `cos^2 -> 1 - sin^2` for every declared sin/cos pair.
    pub(crate) fn reduce_relations(self) -> Poly {
        let needs = self.0.iter().any(|(m, _)| m.0.iter().any(|(a, e)| *e >= 2 && a.is_cos()));
        if !needs {
            return self;
        }
        let mut keep = Vec::new();
        let mut todo = self.0;
        loop {
            let mut next = Vec::new();
            for (m, c) in todo {
                let hit = m.0.iter().position(|(a, e)| *e >= 2 && a.is_cos());
                match hit {
                    None => keep.push((m, c)),
                    Some(i) => {
                        let cos = m.0[i].0.clone();
                        let sin = match &cos {
                            Atom::Func(f) => Atom::Func(FuncAtom {
                                sym: f.sym.partner().expect("cos has a partner"),
                                deriv: f.deriv.clone(),
                                args: f.args.clone(),
                            }),
                            Atom::Jet(_) => unreachable!(),
                        };
                        let rest = m.div(&Monomial::atom(cos, 2)).expect("cos^2 divides");
                        next.push((rest.clone(), c.clone()));
                        next.push((rest.mul(&Monomial::atom(sin, 2)), -&c));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            todo = next;
        }
        Poly::from_unsorted(keep)
    }

    /// Exact quotient `self / f`, or `None` if `f` does not divide.
    pub fn div_exact(&self, f: &Poly) -> Option<Poly> {
        let (lm, lc) = f.leading()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let inv = lc.inv()?;
        if f.0.len() == 1 {
            let mut out = Vec::with_capacity(self.0.len());
            for (m, c) in &self.0 {
                out.push((m.div(lm)?, c * &inv));
            }
            return Some(Poly(out));
        }
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.leading() {
            let qm = m.div(lm)?;
            let qc = c * &inv;
            rem = rem.sub(&f.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Poly(quot))
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.0.iter();
        let mut g = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Monomial::one(),
        };
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Split off the leading coefficient: `self = lc * monic`.
    pub fn monic(&self) -> (Scalar, Poly) {
        match self.leading() {
            None => (Scalar::zero(), Poly::zero()),
            Some((_, lc)) => {
                let lc = lc.clone();
                let inv = lc.inv().expect("nonzero");
                (lc, self.scale(&inv))
            }
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter().flat_map(|(m, _)| m.0.iter().map(|(a, _)| a))
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        self.0.iter().any(|(m, _)| m.exponent(a) > 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: u8) -> Poly {
        Poly::atom(Atom::jet(k, 0))
    }

    #[test]
    fn exact_division() {
        let f = x(3).mul(&x(1)).sub(&x(2));
        let g = x(1).add(&Poly::constant(Scalar::int(2)));
        let p = f.mul(&g).mul(&g);
        assert_eq!(p.div_exact(&f).unwrap(), g.mul(&g));
        assert!(p.add(&Poly::one()).div_exact(&f).is_none());
    }

    #[test]
    fn order_is_multiplicative() {
        let a = Monomial::atom(Atom::jet(1, 0), 2);
        let b = Monomial::atom(Atom::jet(1, 0), 1).mul(&Monomial::atom(Atom::jet(2, 0), 1));
        let c = Monomial::atom(Atom::jet(2, 1), 3);
        assert_eq!(a.cmp(&b), a.mul(&c).cmp(&b.mul(&c)));
    }
}
