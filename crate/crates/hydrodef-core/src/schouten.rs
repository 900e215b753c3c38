//! Schouten bracket of local bivectors and Lie derivatives along
//! evolutionary vector fields, computed on δ-series.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::bivectors::Bivector;
use crate::deltadist::{assemble_tri, BiDist, DeltaFactor, Point, RawTerm, TriDist};
use crate::error::{Caps, Error, Result};
use crate::scalar::Scalar;
use crate::symcore::Expr;

/// `[P,Q]^{ijk}` for all `i, j, k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trivector {
    n: usize,
    comps: Vec<TriDist>,
}

impl Trivector {
    pub fn zero(n: usize) -> Self {
        Trivector { n, comps: alloc::vec![TriDist::zero(); n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        ((i - 1) * self.n + (j - 1)) * self.n + (k - 1)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &TriDist {
        &self.comps[self.index(i, j, k)]
    }

    pub fn components(&self) -> impl Iterator<Item = ((usize, usize, usize), &TriDist)> {
        let n = self.n;
        self.comps.iter().enumerate().map(move |(t, d)| ((t / (n * n) + 1, (t / n) % n + 1, t % n + 1), d))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|t| t.is_zero())
    }

    pub fn add(&self, other: &Trivector) -> Result<Trivector> {
        check_dim(self.n, other.n)?;
        Ok(Trivector { n: self.n, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn scale_scalar(&self, c: &Scalar) -> Trivector {
        Trivector { n: self.n, comps: self.comps.iter().map(|t| t.scale_scalar(c)).collect() }
    }

    pub fn vanishes_at(&self, seeds: core::ops::Range<u64>) -> Result<bool> {
        for t in &self.comps {
            if !t.vanishes_at(seeds.clone())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Trivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((i, j, k), t) in self.components() {
            if !t.is_zero() {
                writeln!(f, "[{}][{}][{}] = {}", i, j, k, t)?;
            }
        }
        Ok(())
    }
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{} vs {} components", a, b)));
    }
    Ok(())
}

/// `Σ_{l,s} ∂P^{ij}/∂u^l_(s) · ∂_x^s Q^{lk}(x,z)` as coefficients of
/// `δ^(m)(x-y) δ^(n)(x-z)`, one table entry per `(i,j,k)`.
fn half_table(p: &Bivector, q: &Bivector, caps: &Caps, out: &mut [TriDist]) -> Result<()> {
    let n = p.n();
    let mut dq: BTreeMap<(usize, usize, u8), BiDist> = BTreeMap::new();
    for i in 1..=n {
        for j in 1..=n {
            for (m, a) in p.get(i, j).terms() {
                for v in a.dependencies() {
                    let da = a.partial(v);
                    if da.is_zero() {
                        continue;
                    }
                    let l = v.comp as usize;
                    if l > n {
                        return Err(Error::Dimension(format!("u{} in a {}-component bivector", l, n)));
                    }
                    for k in 1..=n {
                        let key = (l, k, v.order);
                        if let Entry::Vacant(slot) = dq.entry(key) {
                            slot.insert(q.get(l, k).dx_n(v.order as u32, caps)?);
                        }
                        let slot = &mut out[((i - 1) * n + (j - 1)) * n + (k - 1)];
                        for (nn, b) in dq[&key].terms() {
                            slot.add_term(m, nn, da.mul_expr(b));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// The Schouten bracket `[P,Q]` in the canonical basis
/// `δ^(m)(x-y) δ^(n)(x-z)` with coefficients at `x`.
pub fn schouten(p: &Bivector, q: &Bivector, caps: &Caps) -> Result<Trivector> {
    check_dim(p.n(), q.n())?;
    let n = p.n();
    let mut w = alloc::vec![TriDist::zero(); n * n * n];
    half_table(p, q, caps, &mut w)?;
    half_table(q, p, caps, &mut w)?;
    let wt = |i: usize, j: usize, k: usize| &w[((i - 1) * n + (j - 1)) * n + (k - 1)];
    let mut out = Trivector::zero(n);
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                let mut raw = Vec::new();
                // Cyclic blocks (i,x),(j,y),(k,z); each W(a;b,c) has its coefficient at a.
                let blocks = [
                    (wt(i, j, k), Point::X, Point::Y, Point::Z),
                    (wt(k, i, j), Point::Z, Point::X, Point::Y),
                    (wt(j, k, i), Point::Y, Point::Z, Point::X),
                ];
                for (t, a, b, c) in blocks {
                    for ((m, nn), coeff) in t.terms() {
                        raw.push(RawTerm {
                            coeff: coeff.clone(),
                            at: a,
                            factors: alloc::vec![DeltaFactor::new(a, b, m), DeltaFactor::new(a, c, nn)],
                        });
                    }
                }
                let idx = out.index(i, j, k);
                out.comps[idx] = assemble_tri(&raw, caps)?;
            }
        }
    }
    Ok(out)
}

/// `[P,P]`; zero iff the skew bivector `P` is Poisson.
pub fn jacobi_residual(p: &Bivector, caps: &Caps) -> Result<Trivector> {
    schouten(p, p, caps)
}

/// `P_0 + ε P_1 + ε² P_2`; absent orders are `None`.
#[derive(Clone, Debug)]
pub struct DeformationSeries {
    pub p0: Bivector,
    pub p1: Option<Bivector>,
    pub p2: Option<Bivector>,
}

/// `2[P_0,P_2] + [P_1,P_1]`.
pub fn order2_residual(series: &DeformationSeries, caps: &Caps) -> Result<Trivector> {
    let (p1, p2) = match (&series.p1, &series.p2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Precondition("series needs both first and second orders".into())),
    };
    let a = schouten(&series.p0, p2, caps)?.scale_scalar(&Scalar::int(2));
    a.add(&schouten(p1, p1, caps)?)
}

/// Evolutionary vector field `ξ^i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VectorField {
    pub comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(comps: Vec<Expr>) -> Self {
        VectorField { comps }
    }

    pub fn zero(n: usize) -> Self {
        VectorField { comps: alloc::vec![Expr::zero(); n] }
    }

    pub fn n(&self) -> usize {
        self.comps.len()
    }

    /// Common degree of the nonzero components.
    pub fn degree(&self) -> Result<Option<i64>> {
        let mut deg = None;
        for c in self.comps.iter().filter(|c| !c.is_zero()) {
            let d = c.degree()?;
            match deg {
                None => deg = Some(d),
                Some(x) if x != d => return Err(Error::Inhomogeneous),
                _ => {}
            }
        }
        Ok(deg)
    }
}

/// Lie derivative of a bivector along `ξ`:
/// `Σ ∂^s ξ^k ∂P/∂u^k_(s) - ∂ξ^i/∂u^k_(s) ∂_x^s P^{kj} - ∂ξ^j/∂u^k_(s)(y) ∂_y^s P^{ik}`.
pub fn lie(xi: &VectorField, p: &Bivector, caps: &Caps) -> Result<Bivector> {
    check_dim(xi.n(), p.n())?;
    let n = p.n();
    let mut xi_jets: BTreeMap<(usize, u8), Expr> = BTreeMap::new();
    let mut out = Bivector::zero(n);
    for i in 1..=n {
        for j in 1..=n {
            let pij = p.get(i, j);
            let mut vars = Vec::new();
            for (_, a) in pij.terms() {
                vars.extend(a.dependencies());
            }
            vars.sort_unstable();
            vars.dedup();
            let mut acc = BiDist::zero();
            for v in vars {
                let k = v.comp as usize;
                if k > n {
                    return Err(Error::Dimension(format!("u{} in a {}-component bivector", k, n)));
                }
                if let Entry::Vacant(slot) = xi_jets.entry((k, v.order)) {
                    slot.insert(xi.comps[k - 1].total_x_n(v.order as u32, caps)?);
                }
                let d = &xi_jets[&(k, v.order)];
                if !d.is_zero() {
                    acc = acc.add(&pij.partial(v).scale(d));
                }
            }
            for v in xi.comps[i - 1].dependencies() {
                let c = xi.comps[i - 1].partial(v);
                let k = v.comp as usize;
                acc = acc.sub(&p.get(k, j).dx_n(v.order as u32, caps)?.scale(&c));
            }
            for v in xi.comps[j - 1].dependencies() {
                let c = xi.comps[j - 1].partial(v);
                let k = v.comp as usize;
                acc = acc.sub(&p.get(i, k).dy_n(v.order as u32, caps)?.mul_at_y(&c, caps)?);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// `Lie_Y P_1 + Lie_Z P_0`, the second-order action of the infinitesimal
/// Miura transformation generated by `Y` and `Z`; requires `Lie_Y P_0 = 0`.
pub fn miura_order2_action(y: &VectorField, z: &VectorField, series: &DeformationSeries, caps: &Caps) -> Result<Bivector> {
    if !lie(y, &series.p0, caps)?.is_zero() {
        return Err(Error::Precondition("Y is not a symmetry of P_0".into()));
    }
    let p1 = series.p1.clone().unwrap_or_else(|| Bivector::zero(series.p0.n()));
    lie(y, &p1, caps)?.add(&lie(z, &series.p0, caps)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bivectors::HydroOp;

    fn p2_0() -> Bivector {
        let mut op = HydroOp::zero(2);
        op.set_g(1, 1, Expr::one());
        let inv = Expr::jet(1, 0).inv().unwrap();
        op.set_b(1, 2, 2, inv.neg_expr());
        op.set_b(2, 1, 2, inv);
        op.to_bivector()
    }

    #[test]
    fn p2_0_is_poisson() {
        assert!(jacobi_residual(&p2_0(), &Caps::default()).unwrap().is_zero());
    }

    #[test]
    fn constant_b_fails() {
        let mut op = HydroOp::zero(2);
        op.set_g(1, 1, Expr::one());
        op.set_b(1, 2, 2, Expr::one());
        op.set_b(2, 1, 2, Expr::int(-1));
        assert!(!jacobi_residual(&op.to_bivector(), &Caps::default()).unwrap().is_zero());
    }

    #[test]
    fn zero_field_has_zero_lie() {
        let l = lie(&VectorField::zero(2), &p2_0(), &Caps::default()).unwrap();
        assert!(l.is_zero());
    }
}
