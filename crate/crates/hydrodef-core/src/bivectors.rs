//! Local bivectors: hydrodynamic operators, their deformations, and skew-symmetry.
//!
//! Indices are 1-based in every public accessor.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::deltadist::BiDist;
use crate::error::{Caps, Error, Result};
use crate::scalar::Scalar;
use crate::symcore::{Expr, FuncSym, JetVar};

/// Dense tensor of expressions with every index in `1..=n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tensor {
    n: usize,
    rank: usize,
    data: Vec<Expr>,
}

impl Tensor {
    pub fn zero(n: usize, rank: usize) -> Self {
        Tensor { n, rank, data: alloc::vec![Expr::zero(); n.pow(rank as u32)] }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank, "tensor rank");
        idx.iter().fold(0, |acc, &i| {
            assert!(i >= 1 && i <= self.n, "index {} out of 1..={}", i, self.n);
            acc * self.n + (i - 1)
        })
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        let o = self.offset(idx);
        self.data[o] = e;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Every index tuple in lexicographic order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        index_tuples(self.n, self.rank)
    }
}

pub(crate) fn index_tuples(n: usize, rank: usize) -> Vec<Vec<usize>> {
    let mut out = alloc::vec![Vec::new()];
    for _ in 0..rank {
        let mut next = Vec::new();
        for t in &out {
            for i in 1..=n {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// `P^{ij}_{x,y}` for all `i, j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Bivector {
    n: usize,
    comps: Vec<BiDist>,
}

impl Bivector {
    pub fn zero(n: usize) -> Self {
        Bivector { n, comps: alloc::vec![BiDist::zero(); n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BiDist {
        &self.comps[(i - 1) * self.n + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, d: BiDist) {
        let n = self.n;
        self.comps[(i - 1) * n + (j - 1)] = d;
    }

    /// Add `coeff * δ^(order)` to component `(i, j)`.
    pub fn add_term(&mut self, i: usize, j: usize, order: u8, coeff: Expr) {
        let n = self.n;
        self.comps[(i - 1) * n + (j - 1)].add_term(order, coeff);
    }

    fn zip(&self, other: &Bivector, f: impl Fn(&BiDist, &BiDist) -> BiDist) -> Result<Bivector> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("{} vs {} components", self.n, other.n)));
        }
        Ok(Bivector { n: self.n, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn add(&self, other: &Bivector) -> Result<Bivector> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Bivector) -> Result<Bivector> {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale_scalar(&self, c: &Scalar) -> Bivector {
        Bivector { n: self.n, comps: self.comps.iter().map(|d| d.scale_scalar(c)).collect() }
    }

    /// Apply `f` to every coefficient.
    pub fn map_coeffs(&self, f: &mut dyn FnMut(&Expr) -> Result<Expr>) -> Result<Bivector> {
        let mut out = Bivector::zero(self.n);
        for ((i, j), d) in self.components() {
            for (m, c) in d.terms() {
                out.add_term(i, j, m, f(c)?);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|d| d.is_zero())
    }

    pub fn vanishes_at(&self, seeds: core::ops::Range<u64>) -> Result<bool> {
        for d in &self.comps {
            if !d.vanishes_at(seeds.clone())? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Nonzero components with their indices.
    pub fn components(&self) -> impl Iterator<Item = ((usize, usize), &BiDist)> {
        let n = self.n;
        self.comps.iter().enumerate().map(move |(k, d)| ((k / n + 1, k % n + 1), d))
    }

    /// Highest jet order among all coefficients.
    pub fn max_jet_order(&self) -> u8 {
        self.comps.iter().filter_map(|d| d.max_jet_order()).max().unwrap_or(0)
    }

    /// `P^{ij}_{x,y} + P^{ji}_{y,x}` for every `(i, j)`; all zero iff skew.
    pub fn skew_defect(&self, caps: &Caps) -> Result<Vec<((usize, usize), BiDist)>> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            for j in 1..=self.n {
                let d = self.get(i, j).add(&self.get(j, i).flip(caps)?);
                out.push(((i, j), d));
            }
        }
        Ok(out)
    }

    pub fn is_skew(&self, caps: &Caps) -> Result<bool> {
        Ok(self.skew_defect(caps)?.iter().all(|(_, d)| d.is_zero()))
    }

    /// Homogeneous degree, taking `deg δ^(m) = m`; `None` if mixed.
    pub fn degree(&self) -> Option<i64> {
        let mut deg = None;
        for d in &self.comps {
            for (m, e) in d.terms() {
                let k = e.degree().ok()? + m as i64;
                match deg {
                    None => deg = Some(k),
                    Some(x) if x != k => return None,
                    _ => {}
                }
            }
        }
        deg
    }
}

impl fmt::Display for Bivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((i, j), d) in self.components() {
            if !d.is_zero() {
                writeln!(f, "P[{}][{}] = {}", i, j, d)?;
            }
        }
        Ok(())
    }
}

/// `P^{ij} = g^{ij} d/dx + b^{ij}_k u^k_x`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HydroOp {
    pub g: Tensor,
    pub b: Tensor,
}

impl HydroOp {
    pub fn zero(n: usize) -> Self {
        HydroOp { g: Tensor::zero(n, 2), b: Tensor::zero(n, 3) }
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn g(&self, i: usize, j: usize) -> &Expr {
        self.g.get(&[i, j])
    }

    pub fn b(&self, i: usize, j: usize, k: usize) -> &Expr {
        self.b.get(&[i, j, k])
    }

    pub fn set_g(&mut self, i: usize, j: usize, e: Expr) {
        self.g.set(&[i, j], e);
    }

    pub fn set_b(&mut self, i: usize, j: usize, k: usize, e: Expr) {
        self.b.set(&[i, j, k], e);
    }

    /// `g δ'(x-y) + b^{ij}_k u^k_x δ(x-y)`.
    pub fn to_bivector(&self) -> Bivector {
        let n = self.n();
        let mut p = Bivector::zero(n);
        for i in 1..=n {
            for j in 1..=n {
                p.add_term(i, j, 1, self.g(i, j).clone());
                let mut c = Expr::zero();
                for k in 1..=n {
                    c = c.add_expr(&self.b(i, j, k).mul_expr(&Expr::jet(k as u8, 1)));
                }
                p.add_term(i, j, 0, c);
            }
        }
        p
    }

    /// Read `g` and `b` back from a degree-one bivector.
    pub fn from_bivector(p: &Bivector) -> Result<HydroOp> {
        let n = p.n();
        let mut op = HydroOp::zero(n);
        for ((i, j), d) in p.components() {
            for (m, e) in d.terms() {
                match m {
                    1 => {
                        if e.max_jet_order().unwrap_or(0) > 0 {
                            return Err(Error::Precondition("metric depends on derivatives".into()));
                        }
                        op.set_g(i, j, e.clone());
                    }
                    0 => {
                        for (k, c) in linear_part(e, 1, n)? {
                            op.set_b(i, j, k, c);
                        }
                    }
                    _ => return Err(Error::Precondition(format!("δ^({}) term in a hydrodynamic operator", m))),
                }
            }
        }
        Ok(op)
    }
}

/// Coefficients of `u^k_(order)` in an expression linear in those jets.
fn linear_part(e: &Expr, order: u8, n: usize) -> Result<Vec<(usize, Expr)>> {
    let mut out = Vec::new();
    for (key, c) in e.jet_coefficients()? {
        match key.as_slice() {
            [(v, 1)] if v.order == order && (v.comp as usize) <= n => out.push((v.comp as usize, c)),
            _ => return Err(Error::Precondition("unexpected jet monomial".into())),
        }
    }
    Ok(out)
}

/// A homogeneous deformation term in tensor form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Deformation {
    /// `A δ'' + B_k u^k_x δ' + (C_k u^k_xx + D_rk u^r_x u^k_x) δ`, `D` symmetric.
    First { a: Tensor, b: Tensor, c: Tensor, d: Tensor },
    /// `E δ''' + F_k u^k_x δ'' + (G_k u^k_xx + H_rk u^r_x u^k_x) δ'
    ///  + (L_k u^k_xxx + M_kr u^k_xx u^r_x + N_srk u^s_x u^r_x u^k_x) δ`,
    /// `H` and `N` symmetric in their lower indices.
    Second { e: Tensor, f: Tensor, g: Tensor, h: Tensor, l: Tensor, m: Tensor, nn: Tensor },
}

fn jx(k: usize, order: u8) -> Expr {
    Expr::jet(k as u8, order)
}

fn sorted3(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut v = [a, b, c];
    v.sort_unstable();
    v
}

/// Number of distinct orderings of a multiset, used by the symmetric convention.
fn multiplicity(idx: &[usize]) -> i64 {
    let mut counts = BTreeMap::new();
    for i in idx {
        *counts.entry(*i).or_insert(0i64) += 1;
    }
    let fact = |k: i64| (1..=k).product::<i64>();
    fact(idx.len() as i64) / counts.values().map(|&c| fact(c)).product::<i64>()
}

impl Deformation {
    pub fn zero(n: usize, degree: u8) -> Self {
        match degree {
            1 => Deformation::First { a: Tensor::zero(n, 2), b: Tensor::zero(n, 3), c: Tensor::zero(n, 3), d: Tensor::zero(n, 4) },
            2 => Deformation::Second {
                e: Tensor::zero(n, 2),
                f: Tensor::zero(n, 3),
                g: Tensor::zero(n, 3),
                h: Tensor::zero(n, 4),
                l: Tensor::zero(n, 3),
                m: Tensor::zero(n, 4),
                nn: Tensor::zero(n, 5),
            },
            _ => panic!("deformation degree must be 1 or 2"),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Deformation::First { a, .. } => a.n(),
            Deformation::Second { e, .. } => e.n(),
        }
    }

    pub fn degree(&self) -> u8 {
        match self {
            Deformation::First { .. } => 1,
            Deformation::Second { .. } => 2,
        }
    }

    pub fn to_bivector(&self) -> Bivector {
        let n = self.n();
        let mut p = Bivector::zero(n);
        for i in 1..=n {
            for j in 1..=n {
                match self {
                    Deformation::First { a, b, c, d } => {
                        p.add_term(i, j, 2, a.get(&[i, j]).clone());
                        let mut c1 = Expr::zero();
                        let mut c0 = Expr::zero();
                        for k in 1..=n {
                            c1 = c1 + b.get(&[i, j, k]) * &jx(k, 1);
                            c0 = c0 + c.get(&[i, j, k]) * &jx(k, 2);
                            for r in 1..=n {
                                c0 = c0 + &(d.get(&[i, j, r, k]) * &jx(r, 1)) * &jx(k, 1);
                            }
                        }
                        p.add_term(i, j, 1, c1);
                        p.add_term(i, j, 0, c0);
                    }
                    Deformation::Second { e, f, g, h, l, m, nn } => {
                        p.add_term(i, j, 3, e.get(&[i, j]).clone());
                        let (mut c2, mut c1, mut c0) = (Expr::zero(), Expr::zero(), Expr::zero());
                        for k in 1..=n {
                            c2 = c2 + f.get(&[i, j, k]) * &jx(k, 1);
                            c1 = c1 + g.get(&[i, j, k]) * &jx(k, 2);
                            c0 = c0 + l.get(&[i, j, k]) * &jx(k, 3);
                            for r in 1..=n {
                                c1 = c1 + &(h.get(&[i, j, r, k]) * &jx(r, 1)) * &jx(k, 1);
                                c0 = c0 + &(m.get(&[i, j, k, r]) * &jx(k, 2)) * &jx(r, 1);
                                for s in 1..=n {
                                    c0 = c0 + &(&(nn.get(&[i, j, s, r, k]) * &jx(s, 1)) * &jx(r, 1)) * &jx(k, 1);
                                }
                            }
                        }
                        p.add_term(i, j, 2, c2);
                        p.add_term(i, j, 1, c1);
                        p.add_term(i, j, 0, c0);
                    }
                }
            }
        }
        p
    }

    /// Read the tensors from a homogeneous bivector of degree `degree + 1`.
    pub fn from_bivector(p: &Bivector, degree: u8) -> Result<Deformation> {
        let n = p.n();
        let mut out = Deformation::zero(n, degree);
        let bad = || Error::Precondition("bivector does not have the deformation shape".into());
        for ((i, j), dist) in p.components() {
            for (order, coeff) in dist.terms() {
                for (key, c) in coeff.jet_coefficients()? {
                    let mut jets: Vec<(usize, u8)> = Vec::new();
                    for (v, e) in &key {
                        for _ in 0..*e {
                            jets.push((v.comp as usize, v.order));
                        }
                    }
                    let shape: Vec<u8> = jets.iter().map(|x| x.1).collect();
                    let comps: Vec<usize> = jets.iter().map(|x| x.0).collect();
                    let sym = |idx: &[usize]| c.scale(&Scalar::ratio(1, multiplicity(idx)));
                    match &mut out {
                        Deformation::First { a, b, c: cc, d } => match (order, shape.as_slice()) {
                            (2, []) => a.set(&[i, j], c.clone()),
                            (1, [1]) => b.set(&[i, j, comps[0]], c.clone()),
                            (0, [2]) => cc.set(&[i, j, comps[0]], c.clone()),
                            (0, [1, 1]) => {
                                let (r, k) = (comps[0], comps[1]);
                                let v = sym(&[r, k]);
                                d.set(&[i, j, r, k], v.clone());
                                d.set(&[i, j, k, r], v);
                            }
                            _ => return Err(bad()),
                        },
                        Deformation::Second { e, f, g, h, l, m, nn } => match (order, shape.as_slice()) {
                            (3, []) => e.set(&[i, j], c.clone()),
                            (2, [1]) => f.set(&[i, j, comps[0]], c.clone()),
                            (1, [2]) => g.set(&[i, j, comps[0]], c.clone()),
                            (1, [1, 1]) => {
                                let (r, k) = (comps[0], comps[1]);
                                let v = sym(&[r, k]);
                                h.set(&[i, j, r, k], v.clone());
                                h.set(&[i, j, k, r], v);
                            }
                            (0, [3]) => l.set(&[i, j, comps[0]], c.clone()),
                            // Jet keys sort by (component, order); find which is the xx slot.
                            (0, [1, 2]) => m.set(&[i, j, comps[1], comps[0]], c.clone()),
                            (0, [2, 1]) => m.set(&[i, j, comps[0], comps[1]], c.clone()),
                            (0, [1, 1, 1]) => {
                                let v = sym(&comps);
                                let [s, r, k] = sorted3(comps[0], comps[1], comps[2]);
                                for perm in permutations3(s, r, k) {
                                    nn.set(&[i, j, perm[0], perm[1], perm[2]], v.clone());
                                }
                            }
                            _ => return Err(bad()),
                        },
                    }
                }
            }
        }
        Ok(out)
    }

    /// Residuals of the closed-form skew-symmetry conditions; all vanish iff
    /// the deformation is skew.
    pub fn skew_conditions_closed(&self) -> Vec<SkewResidual> {
        let n = self.n();
        let mut out = Vec::new();
        let d = |e: &Expr, k: usize| e.partial(JetVar::new(k as u8, 0));
        let half = Scalar::ratio(1, 2);
        let third = Scalar::ratio(1, 3);
        let mut push = |family: &'static str, idx: Vec<usize>, r: Expr| out.push(SkewResidual { family, indices: idx, residual: r });
        match self {
            Deformation::First { a, b, c, d: dd } => {
                for i in 1..=n {
                    for j in 1..=n {
                        push("A", alloc::vec![i, j], a.get(&[i, j]) + a.get(&[j, i]));
                        for k in 1..=n {
                            let aji = a.get(&[j, i]);
                            let rb = &d(aji, k).scale(&Scalar::int(-2)) + b.get(&[j, i, k]);
                            push("B", alloc::vec![i, j, k], b.get(&[i, j, k]) - &rb);
                            let rc = &(&d(aji, k).neg_expr() + b.get(&[j, i, k])) - c.get(&[j, i, k]);
                            push("C", alloc::vec![i, j, k], c.get(&[i, j, k]) - &rc);
                            for r in 1..=n {
                                let rd = &(&d(&d(aji, r), k).neg_expr()
                                    + &(&d(b.get(&[j, i, k]), r) + &d(b.get(&[j, i, r]), k)).scale(&half))
                                    - dd.get(&[j, i, r, k]);
                                push("D", alloc::vec![i, j, r, k], dd.get(&[i, j, r, k]) - &rd);
                            }
                        }
                    }
                }
            }
            Deformation::Second { e, f, g, h, l, m, nn } => {
                let s3 = Scalar::int(3);
                for i in 1..=n {
                    for j in 1..=n {
                        let eji = e.get(&[j, i]);
                        push("E", alloc::vec![i, j], e.get(&[i, j]) - eji);
                        for k in 1..=n {
                            let fk = f.get(&[j, i, k]);
                            let rf = &d(eji, k).scale(&s3) - fk;
                            push("F", alloc::vec![i, j, k], f.get(&[i, j, k]) - &rf);
                            let rg = &(&d(eji, k).scale(&s3) - &fk.scale(&Scalar::int(2))) + g.get(&[j, i, k]);
                            push("G", alloc::vec![i, j, k], g.get(&[i, j, k]) - &rg);
                            let rl = &(&(&d(eji, k) - fk) + g.get(&[j, i, k])) - l.get(&[j, i, k]);
                            push("L", alloc::vec![i, j, k], l.get(&[i, j, k]) - &rl);
                            for r in 1..=n {
                                let rh = &(&(&d(&d(eji, r), k).scale(&s3) - &d(f.get(&[j, i, k]), r)) - &d(f.get(&[j, i, r]), k))
                                    + h.get(&[j, i, r, k]);
                                push("H", alloc::vec![i, j, r, k], h.get(&[i, j, r, k]) - &rh);
                                // M_rk multiplies u^r_xx u^k_x.
                                let rm = &(&(&(&(&d(&d(eji, r), k).scale(&s3) - &d(f.get(&[j, i, r]), k).scale(&Scalar::int(2)))
                                    - &d(f.get(&[j, i, k]), r))
                                    + &d(g.get(&[j, i, r]), k))
                                    + &h.get(&[j, i, r, k]).scale(&Scalar::int(2)))
                                    - m.get(&[j, i, r, k]);
                                push("M", alloc::vec![i, j, r, k], m.get(&[i, j, r, k]) - &rm);
                                for s in 1..=n {
                                    let fd = &(&d(&d(f.get(&[j, i, k]), r), s) + &d(&d(f.get(&[j, i, s]), k), r))
                                        + &d(&d(f.get(&[j, i, r]), s), k);
                                    let hd = &(&d(h.get(&[j, i, r, k]), s) + &d(h.get(&[j, i, k, s]), r)) + &d(h.get(&[j, i, s, r]), k);
                                    let rn =
                                        &(&(&d(&d(&d(eji, s), r), k) - &fd.scale(&third)) + &hd.scale(&third)) - nn.get(&[j, i, s, r, k]);
                                    push("N", alloc::vec![i, j, s, r, k], nn.get(&[i, j, s, r, k]) - &rn);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn permutations3(a: usize, b: usize, c: usize) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

/// One closed-form skew condition evaluated on concrete tensors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewResidual {
    pub family: &'static str,
    pub indices: Vec<usize>,
    pub residual: Expr,
}

/// Number of coefficient functions in a homogeneous deformation term.
pub fn coefficient_count(n: u64, degree: u8) -> u64 {
    match degree {
        1 => n * n * (n * n + 5 * n + 2) / 2,
        2 => n * n * (n + 2) * (n * n + 10 * n + 3) / 6,
        _ => panic!("deformation degree must be 1 or 2"),
    }
}

/// Number of coefficient functions left free by skew-symmetry.
pub fn free_coefficient_count(n: usize, degree: u8) -> usize {
    general_skew(n, degree).1.len()
}

struct Generators<'a> {
    n: usize,
    made: Vec<Arc<FuncSym>>,
    value: &'a mut dyn FnMut(&str) -> Option<Expr>,
}

impl Generators<'_> {
    fn get(&mut self, name: String) -> Expr {
        if let Some(e) = (self.value)(&name) {
            return e;
        }
        let deps: Vec<u8> = (1..=self.n as u8).collect();
        let s = FuncSym::new(&name, &deps);
        self.made.push(s.clone());
        Expr::func(&s)
    }
}

fn idx_name(prefix: &str, upper: &[usize], lower: &[usize]) -> String {
    let mut s = String::from(prefix);
    for i in upper {
        s.push_str(&format!("{}", i));
    }
    if !lower.is_empty() {
        s.push('_');
        for i in lower {
            s.push_str(&format!("{}", i));
        }
    }
    s
}

/// The general skew-symmetric deformation, parametrised by independent
/// generator functions of all variables; the remaining coefficients are
/// solved from the skew conditions.
pub fn general_skew(n: usize, degree: u8) -> (Deformation, Vec<Arc<FuncSym>>) {
    general_skew_with(n, degree, &mut |_| None)
}

/// [`general_skew`] with some generators fixed: `value(name)` returns the
/// expression for a generator such as `"B21_2"` or `"D21_12"`, or `None`
/// for a fresh function. `D`, `H` and `N` values use the symmetric
/// convention. Only fresh generators are returned.
pub fn general_skew_with(n: usize, degree: u8, value: &mut dyn FnMut(&str) -> Option<Expr>) -> (Deformation, Vec<Arc<FuncSym>>) {
    let mut gens = Generators { n, made: Vec::new(), value };
    let mut def = Deformation::zero(n, degree);
    let d = |e: &Expr, k: usize| e.partial(JetVar::new(k as u8, 0));
    let half = Scalar::ratio(1, 2);
    let third = Scalar::ratio(1, 3);
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    match &mut def {
        Deformation::First { a, b, c, d: dd } => {
            for &(i, j) in &pairs {
                if i > j {
                    let v = gens.get(idx_name("A", &[i, j], &[]));
                    a.set(&[j, i], v.neg_expr());
                    a.set(&[i, j], v);
                }
            }
            for &(i, j) in &pairs {
                if i >= j {
                    for k in 1..=n {
                        b.set(&[i, j, k], gens.get(idx_name("B", &[i, j], &[k])));
                    }
                }
            }
            for &(i, j) in &pairs {
                if i < j {
                    for k in 1..=n {
                        let v = &d(a.get(&[j, i]), k).scale(&Scalar::int(-2)) + b.get(&[j, i, k]);
                        b.set(&[i, j, k], v);
                    }
                }
            }
            for &(i, j) in &pairs {
                for k in 1..=n {
                    if i > j {
                        c.set(&[i, j, k], gens.get(idx_name("C", &[i, j], &[k])));
                    } else if i == j {
                        c.set(&[i, j, k], b.get(&[i, i, k]).scale(&half));
                    }
                }
            }
            for &(i, j) in &pairs {
                if i < j {
                    for k in 1..=n {
                        let v = &(&d(a.get(&[j, i]), k).neg_expr() + b.get(&[j, i, k])) - c.get(&[j, i, k]);
                        c.set(&[i, j, k], v);
                    }
                }
            }
            for &(i, j) in &pairs {
                for r in 1..=n {
                    for k in r..=n {
                        let v = if i > j {
                            gens.get(idx_name("D", &[i, j], &[r, k]))
                        } else if i == j {
                            (&d(b.get(&[i, i, k]), r) + &d(b.get(&[i, i, r]), k)).scale(&Scalar::ratio(1, 4))
                        } else {
                            continue;
                        };
                        dd.set(&[i, j, r, k], v.clone());
                        dd.set(&[i, j, k, r], v);
                    }
                }
            }
            for &(i, j) in &pairs {
                if i < j {
                    for r in 1..=n {
                        for k in 1..=n {
                            let v = &(&d(&d(a.get(&[j, i]), r), k).neg_expr()
                                + &(&d(b.get(&[j, i, k]), r) + &d(b.get(&[j, i, r]), k)).scale(&half))
                                - dd.get(&[j, i, r, k]);
                            dd.set(&[i, j, r, k], v);
                        }
                    }
                }
            }
        }
        Deformation::Second { e, f, g, h, l, m, nn } => {
            let s3 = Scalar::int(3);
            for &(i, j) in &pairs {
                if i >= j {
                    let v = gens.get(idx_name("E", &[i, j], &[]));
                    e.set(&[j, i], v.clone());
                    e.set(&[i, j], v);
                }
            }
            for &(i, j) in &pairs {
                for k in 1..=n {
                    if i > j {
                        f.set(&[i, j, k], gens.get(idx_name("F", &[i, j], &[k])));
                    } else if i == j {
                        f.set(&[i, j, k], d(e.get(&[i, i]), k).scale(&Scalar::ratio(3, 2)));
                    }
                }
            }
            for &(i, j) in &pairs {
                if i < j {
                    for k in 1..=n {
                        let v = &d(e.get(&[j, i]), k).scale(&s3) - f.get(&[j, i, k]);
                        f.set(&[i, j, k], v);
                    }
                }
            }
            for &(i, j) in &pairs {
                if i >= j {
                    for k in 1..=n {
                        g.set(&[i, j, k], gens.get(idx_name("G", &[i, j], &[k])));
                    }
                    for r in 1..=n {
                        for k in r..=n {
                            let v = gens.get(idx_name("H", &[i, j], &[r, k]));
                            h.set(&[i, j, r, k], v.clone());
                            h.set(&[i, j, k, r], v);
                        }
                    }
                }
            }
            for &(i, j) in &pairs {
                if i < j {
                    for k in 1..=n {
                        let v = &(&d(e.get(&[j, i]), k).scale(&s3) - &f.get(&[j, i, k]).scale(&Scalar::int(2))) + g.get(&[j, i, k]);
                        g.set(&[i, j, k], v);
                        for r in 1..=n {
                            let v = &(&(&d(&d(e.get(&[j, i]), r), k).scale(&s3) - &d(f.get(&[j, i, k]), r)) - &d(f.get(&[j, i, r]), k))
                                + h.get(&[j, i, r, k]);
                            h.set(&[i, j, r, k], v);
                        }
                    }
                }
            }
            // L, M, N: generators below the diagonal, halves on it, solved above.
            let l_rhs = |e: &Tensor, f: &Tensor, g: &Tensor, i: usize, j: usize, k: usize| {
                &(&d(e.get(&[j, i]), k) - f.get(&[j, i, k])) + g.get(&[j, i, k])
            };
            let m_rhs = |e: &Tensor, f: &Tensor, g: &Tensor, h: &Tensor, i: usize, j: usize, r: usize, k: usize| {
                &(&(&(&d(&d(e.get(&[j, i]), r), k).scale(&s3) - &d(f.get(&[j, i, r]), k).scale(&Scalar::int(2)))
                    - &d(f.get(&[j, i, k]), r))
                    + &d(g.get(&[j, i, r]), k))
                    + &h.get(&[j, i, r, k]).scale(&Scalar::int(2))
            };
            let n_rhs = |e: &Tensor, f: &Tensor, h: &Tensor, i: usize, j: usize, s: usize, r: usize, k: usize| {
                let fd = &(&d(&d(f.get(&[j, i, k]), r), s) + &d(&d(f.get(&[j, i, s]), k), r)) + &d(&d(f.get(&[j, i, r]), s), k);
                let hd = &(&d(h.get(&[j, i, r, k]), s) + &d(h.get(&[j, i, k, s]), r)) + &d(h.get(&[j, i, s, r]), k);
                &(&d(&d(&d(e.get(&[j, i]), s), r), k) - &fd.scale(&third)) + &hd.scale(&third)
            };
            for &(i, j) in &pairs {
                if i < j {
                    continue;
                }
                for k in 1..=n {
                    let v = if i > j { gens.get(idx_name("L", &[i, j], &[k])) } else { l_rhs(e, f, g, i, j, k).scale(&half) };
                    l.set(&[i, j, k], v);
                    for r in 1..=n {
                        let v = if i > j { gens.get(idx_name("M", &[i, j], &[r, k])) } else { m_rhs(e, f, g, h, i, j, r, k).scale(&half) };
                        m.set(&[i, j, r, k], v);
                    }
                }
                for s in 1..=n {
                    for r in s..=n {
                        for k in r..=n {
                            let v = if i > j {
                                gens.get(idx_name("N", &[i, j], &[s, r, k]))
                            } else {
                                n_rhs(e, f, h, i, j, s, r, k).scale(&half)
                            };
                            for p in permutations3(s, r, k) {
                                nn.set(&[i, j, p[0], p[1], p[2]], v.clone());
                            }
                        }
                    }
                }
            }
            for &(i, j) in &pairs {
                if i < j {
                    for k in 1..=n {
                        let v = &l_rhs(e, f, g, i, j, k) - l.get(&[j, i, k]);
                        l.set(&[i, j, k], v);
                        for r in 1..=n {
                            let v = &m_rhs(e, f, g, h, i, j, r, k) - m.get(&[j, i, r, k]);
                            m.set(&[i, j, r, k], v);
                            for s in 1..=n {
                                let v = &n_rhs(e, f, h, i, j, s, r, k) - nn.get(&[j, i, s, r, k]);
                                nn.set(&[i, j, s, r, k], v);
                            }
                        }
                    }
                }
            }
        }
    }
    (def, gens.made)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(coefficient_count(2, 1) + coefficient_count(2, 2), 104);
        assert_eq!(coefficient_count(3, 1) + coefficient_count(3, 2), 432);
        assert_eq!(coefficient_count(1, 1), 4);
        assert_eq!(coefficient_count(1, 2), 7);
    }

    #[test]
    fn hydro_roundtrip() {
        let mut op = HydroOp::zero(2);
        op.set_g(1, 1, Expr::one());
        op.set_b(1, 2, 2, Expr::jet(1, 0).inv().unwrap().neg_expr());
        op.set_b(2, 1, 2, Expr::jet(1, 0).inv().unwrap());
        let p = op.to_bivector();
        assert_eq!(HydroOp::from_bivector(&p).unwrap(), op);
        assert!(p.is_skew(&Caps::default()).unwrap());
    }
}
