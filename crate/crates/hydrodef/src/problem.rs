//! The `.hop` problem file: a dimension header, function declarations and
//! sections of tensor entries.
//!
//! ```text
//! n = 2
//! func p(u2); func E(u2) rule exp
//! metric
//! g[1][1] = 1
//! b
//! b[1][2][2] = -1/u1
//! b[2][1][2] = 1/u1
//! ```
//!
//! Statements end at a newline or `;`, `#` starts a comment. A section name
//! may be followed by `:` and an entry on the same line (`map: u1 = v1/v3`).
//! Symmetric slots (`g`, the last two of `D` and `H`, the last three of `N`)
//! are written with ascending indices and mirrored. Map entries give the old
//! variables through `v1..vn`; `inv` entries give `v` through `u`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use hydrodef_core::bivectors::{Bivector, Deformation, HydroOp, Tensor};
use hydrodef_core::schouten::{DeformationSeries, VectorField};
use hydrodef_core::symcore::{ParseContext, Rule};
use hydrodef_core::transforms::CoordChange;
use hydrodef_core::{Expr, FuncSym};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Metric,
    B,
    Deform1,
    Deform2,
    Bivector,
    Vfield,
    Map,
    Inv,
}

impl Section {
    const ALL: [(Section, &'static str); 8] = [
        (Section::Metric, "metric"),
        (Section::B, "b"),
        (Section::Deform1, "deform1"),
        (Section::Deform2, "deform2"),
        (Section::Bivector, "bivector"),
        (Section::Vfield, "vfield"),
        (Section::Map, "map"),
        (Section::Inv, "inv"),
    ];

    fn from_name(s: &str) -> Option<Section> {
        Self::ALL.iter().find(|(_, n)| *n == s).map(|(s, _)| *s)
    }

    /// Entry letters allowed in the section with their index counts.
    fn letters(self) -> &'static [(char, usize)] {
        match self {
            Section::Metric => &[('g', 2)],
            Section::B => &[('b', 3)],
            Section::Deform1 => &[('A', 2), ('B', 3), ('C', 3), ('D', 4)],
            Section::Deform2 => &[('E', 2), ('F', 3), ('G', 3), ('H', 4), ('L', 3), ('M', 4), ('N', 5)],
            Section::Bivector => &[('P', 3)],
            Section::Vfield => &[('X', 1)],
            Section::Map => &[('u', 1)],
            Section::Inv => &[('v', 1)],
        }
    }
}

/// Number of trailing indices that must be ascending for an entry letter.
fn symmetric_tail(letter: char) -> usize {
    match letter {
        'g' => 2,
        'D' | 'H' => 2,
        'N' => 3,
        _ => 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub n: usize,
    pub funcs: Vec<Arc<FuncSym>>,
    pub hydro: Option<HydroOp>,
    pub bivector: Option<Bivector>,
    pub deform1: Option<Deformation>,
    pub deform2: Option<Deformation>,
    pub vfield: Option<VectorField>,
    /// `u^i` in terms of `v`.
    pub map: Option<Vec<Expr>>,
    /// `v^i` in terms of `u`.
    pub inv: Option<Vec<Expr>>,
}

struct Stmt<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn statements(src: &str) -> Vec<Stmt<'_>> {
    let mut out = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut start = 0;
        for piece in line.split(';') {
            let lead = piece.len() - piece.trim_start().len();
            let text = piece.trim();
            if !text.is_empty() {
                out.push(Stmt { text, line: ln + 1, col: start + lead + 1 });
            }
            start += piece.len() + 1;
        }
    }
    out
}

struct Parser {
    n: Option<usize>,
    ctx: ParseContext,
    vctx: ParseContext,
    file: Option<ProblemFile>,
    section: Option<Section>,
    seen: BTreeSet<(char, Vec<usize>)>,
}

impl ProblemFile {
    pub fn parse(src: &str, complex: bool) -> Result<ProblemFile, SyntaxError> {
        let mut p =
            Parser { n: None, ctx: ParseContext::new(0), vctx: ParseContext::new(0), file: None, section: None, seen: BTreeSet::new() };
        p.ctx.complex = complex;
        p.vctx.complex = complex;
        p.vctx.var_prefix = 'v';
        for st in statements(src) {
            p.statement(&st)?;
        }
        let file = p.file.ok_or(SyntaxError { line: 1, col: 1, msg: "missing header `n = k`".into() })?;
        file.check_complete()?;
        Ok(file)
    }

    fn check_complete(&self) -> Result<(), SyntaxError> {
        for (name, m) in [("map", &self.map), ("inv", &self.inv)] {
            if let Some(m) = m {
                if let Some(i) = m.iter().position(|e| e.is_zero()) {
                    let v = if name == "map" { 'u' } else { 'v' };
                    return Err(SyntaxError { line: 0, col: 0, msg: format!("{} section does not define {}{}", name, v, i + 1) });
                }
            }
        }
        Ok(())
    }

    /// `p0`: the hydrodynamic operator plus the `bivector` section.
    pub fn principal(&self) -> Option<Bivector> {
        let mut out: Option<Bivector> = self.hydro.as_ref().map(|h| h.to_bivector());
        if let Some(b) = &self.bivector {
            out = Some(match out {
                Some(p) => p.add(b).expect("same dimension"),
                None => b.clone(),
            });
        }
        out
    }

    /// Every bivector in the file summed.
    pub fn total(&self) -> Bivector {
        let mut p = self.principal().unwrap_or_else(|| Bivector::zero(self.n));
        for d in [&self.deform1, &self.deform2].into_iter().flatten() {
            p = p.add(&d.to_bivector()).expect("same dimension");
        }
        p
    }

    pub fn has_deformation(&self) -> bool {
        self.deform1.is_some() || self.deform2.is_some()
    }

    pub fn series(&self) -> DeformationSeries {
        DeformationSeries {
            p0: self.principal().unwrap_or_else(|| Bivector::zero(self.n)),
            p1: self.deform1.as_ref().map(|d| d.to_bivector()),
            p2: self.deform2.as_ref().map(|d| d.to_bivector()),
        }
    }

    pub fn change(&self) -> Option<hydrodef_core::Result<CoordChange>> {
        self.map.as_ref().map(|m| CoordChange::new(m.clone(), self.inv.clone()))
    }
}

impl Parser {
    fn err(st: &Stmt, offset: usize, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { line: st.line, col: st.col + offset, msg: msg.into() }
    }

    fn file(&mut self, st: &Stmt) -> Result<&mut ProblemFile, SyntaxError> {
        self.file.as_mut().ok_or_else(|| Self::err(st, 0, "the header `n = k` must come first"))
    }

    fn statement(&mut self, st: &Stmt) -> Result<(), SyntaxError> {
        let t = st.text;
        if let Some(rest) = t.strip_prefix("func ") {
            return self.func(st, rest, t.len() - rest.len());
        }
        let (head, tail) = match t.split_once(':') {
            Some((h, r)) if Section::from_name(h.trim()).is_some() => (h.trim(), Some((r, h.len() + 1))),
            _ => (t, None),
        };
        if let Some(s) = Section::from_name(head) {
            self.file(st)?;
            self.section = Some(s);
            if let Some((rest, off)) = tail {
                let lead = rest.len() - rest.trim_start().len();
                let rest = rest.trim();
                if !rest.is_empty() {
                    let sub = Stmt { text: rest, line: st.line, col: st.col + off + lead };
                    return self.entry(&sub);
                }
            }
            return Ok(());
        }
        let (lhs, _) = t.split_once('=').ok_or_else(|| Self::err(st, 0, format!("unrecognised statement `{}`", t)))?;
        if lhs.trim() == "n" {
            return self.header(st);
        }
        self.entry(st)
    }

    fn header(&mut self, st: &Stmt) -> Result<(), SyntaxError> {
        if self.n.is_some() {
            return Err(Self::err(st, 0, "dimension declared twice"));
        }
        let (_, rhs) = st.text.split_once('=').unwrap();
        let n: usize = rhs.trim().parse().map_err(|_| Self::err(st, 2, "dimension must be a positive integer"))?;
        if !(1..=9).contains(&n) {
            return Err(Self::err(st, 2, "dimension must be between 1 and 9"));
        }
        self.n = Some(n);
        self.ctx.n = n as u8;
        self.vctx.n = n as u8;
        self.file = Some(ProblemFile {
            n,
            funcs: Vec::new(),
            hydro: None,
            bivector: None,
            deform1: None,
            deform2: None,
            vfield: None,
            map: None,
            inv: None,
        });
        Ok(())
    }

    fn func(&mut self, st: &Stmt, rest: &str, off: usize) -> Result<(), SyntaxError> {
        let n = self.n.ok_or_else(|| Self::err(st, 0, "the header `n = k` must come first"))?;
        let open = rest.find('(').ok_or_else(|| Self::err(st, off, "expected `func name(u..)`"))?;
        let close = rest.find(')').ok_or_else(|| Self::err(st, off + open, "unclosed argument list"))?;
        let name = rest[..open].trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) || !name.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(Self::err(st, off, format!("bad function name `{}`", name)));
        }
        if name == "i" || name == "D" || name == "dx" || name.starts_with(['u', 'v']) && name[1..].chars().all(|c| c.is_ascii_digit()) {
            return Err(Self::err(st, off, format!("`{}` is reserved", name)));
        }
        if self.ctx.funcs.contains_key(name) {
            return Err(Self::err(st, off, format!("function {} declared twice", name)));
        }
        let mut deps = Vec::new();
        for a in rest[open + 1..close].split(',') {
            let a = a.trim();
            let k: usize = a
                .strip_prefix('u')
                .and_then(|d| d.parse().ok())
                .filter(|k| (1..=n).contains(k))
                .ok_or_else(|| Self::err(st, off + open + 1, format!("bad dependency `{}`", a)))?;
            if deps.contains(&(k as u8)) {
                return Err(Self::err(st, off + open + 1, format!("repeated dependency u{}", k)));
            }
            deps.push(k as u8);
        }
        let tail = rest[close + 1..].trim();
        let rule = if tail.is_empty() {
            None
        } else {
            let r = tail.strip_prefix("rule").map(str::trim).ok_or_else(|| Self::err(st, off + close + 1, "expected `rule`"))?;
            let partner = |p: &str| p.trim().strip_prefix('(').and_then(|p| p.strip_suffix(')')).map(|p| Arc::<str>::from(p.trim()));
            let rule = if r == "exp" {
                Rule::Exp
            } else if let Some(p) = r.strip_prefix("sin").and_then(partner) {
                Rule::Sin { cos: p }
            } else if let Some(p) = r.strip_prefix("cos").and_then(partner) {
                Rule::Cos { sin: p }
            } else {
                return Err(Self::err(st, off + close + 1, format!("unknown rule `{}`; use exp, sin(C) or cos(S)", r)));
            };
            if deps.len() != 1 {
                return Err(Self::err(st, off, "rules apply to functions of one variable"));
            }
            Some(rule)
        };
        let f = match rule {
            Some(r) => FuncSym::with_rule(name, deps[0], r),
            None => FuncSym::new(name, &deps),
        };
        self.ctx.declare(f.clone());
        self.vctx.declare(f.clone());
        self.file(st)?.funcs.push(f);
        Ok(())
    }

    fn entry(&mut self, st: &Stmt) -> Result<(), SyntaxError> {
        let n = self.n.ok_or_else(|| Self::err(st, 0, "the header `n = k` must come first"))?;
        let section = self.section.ok_or_else(|| Self::err(st, 0, "entry outside a section"))?;
        let (lhs, rhs) = st.text.split_once('=').ok_or_else(|| Self::err(st, 0, "expected `=`"))?;
        let rhs_off = lhs.len() + 1 + (rhs.len() - rhs.trim_start().len());
        let lhs = lhs.trim();
        let letter = lhs.chars().next().unwrap_or(' ');
        let count = section
            .letters()
            .iter()
            .find(|(c, _)| *c == letter)
            .map(|x| x.1)
            .ok_or_else(|| Self::err(st, 0, format!("`{}` is not an entry of this section", lhs)))?;
        let idx = if matches!(section, Section::Map | Section::Inv) {
            let k: usize = lhs[1..].parse().map_err(|_| Self::err(st, 0, format!("bad left side `{}`", lhs)))?;
            vec![k]
        } else {
            parse_indices(&lhs[1..]).ok_or_else(|| Self::err(st, 1, format!("bad indices in `{}`", lhs)))?
        };
        if idx.len() != count {
            return Err(Self::err(st, 1, format!("{} takes {} indices", letter, count)));
        }
        // The order index of a `P` entry is unbounded by n.
        let bounded = if letter == 'P' { &idx[..2] } else { &idx[..] };
        if bounded.iter().any(|&i| i == 0 || i > n) {
            return Err(Self::err(st, 1, format!("index outside 1..{}", n)));
        }
        let tail = symmetric_tail(letter);
        if tail > 0 && idx[idx.len() - tail..].windows(2).any(|w| w[0] > w[1]) {
            return Err(Self::err(st, 1, "symmetric indices must be ascending"));
        }
        if !self.seen.insert((letter, idx.clone())) {
            return Err(Self::err(st, 0, format!("{} given twice", lhs)));
        }
        let ctx = if section == Section::Map { &self.vctx } else { &self.ctx };
        let value = ctx.parse(rhs.trim()).map_err(|e| match e {
            hydrodef_core::Error::Parse { pos, msg } => Self::err(st, rhs_off + pos, msg),
            other => Self::err(st, rhs_off, other.to_string()),
        })?;
        let file = self.file.as_mut().expect("header seen");
        match letter {
            'g' => {
                let h = file.hydro.get_or_insert_with(|| HydroOp::zero(n));
                h.set_g(idx[0], idx[1], value.clone());
                h.set_g(idx[1], idx[0], value);
            }
            'b' => file.hydro.get_or_insert_with(|| HydroOp::zero(n)).set_b(idx[0], idx[1], idx[2], value),
            'P' => {
                let order = u8::try_from(idx[2]).map_err(|_| Self::err(st, 1, "delta order too large"))?;
                file.bivector.get_or_insert_with(|| Bivector::zero(n)).add_term(idx[0], idx[1], order, value);
            }
            'X' => file.vfield.get_or_insert_with(|| VectorField::zero(n)).comps[idx[0] - 1] = value,
            'u' => file.map.get_or_insert_with(|| vec![Expr::zero(); n])[idx[0] - 1] = value,
            'v' => file.inv.get_or_insert_with(|| vec![Expr::zero(); n])[idx[0] - 1] = value,
            _ => {
                let degree = if section == Section::Deform1 { 1 } else { 2 };
                let slot = if degree == 1 { &mut file.deform1 } else { &mut file.deform2 };
                let d = slot.get_or_insert_with(|| Deformation::zero(n, degree));
                let t = deform_tensor(d, letter);
                for perm in permutations_of_tail(&idx, symmetric_tail(letter)) {
                    t.set(&perm, value.clone());
                }
            }
        }
        Ok(())
    }
}

fn parse_indices(s: &str) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('[')?;
        let close = inner.find(']')?;
        out.push(inner[..close].trim().parse().ok()?);
        rest = inner[close + 1..].trim_start();
    }
    Some(out)
}

fn deform_tensor(d: &mut Deformation, letter: char) -> &mut Tensor {
    match (d, letter) {
        (Deformation::First { a, .. }, 'A') => a,
        (Deformation::First { b, .. }, 'B') => b,
        (Deformation::First { c, .. }, 'C') => c,
        (Deformation::First { d, .. }, 'D') => d,
        (Deformation::Second { e, .. }, 'E') => e,
        (Deformation::Second { f, .. }, 'F') => f,
        (Deformation::Second { g, .. }, 'G') => g,
        (Deformation::Second { h, .. }, 'H') => h,
        (Deformation::Second { l, .. }, 'L') => l,
        (Deformation::Second { m, .. }, 'M') => m,
        (Deformation::Second { nn, .. }, 'N') => nn,
        _ => unreachable!("letter checked against the section"),
    }
}

/// `idx` with its last `tail` slots permuted in every distinct way.
fn permutations_of_tail(idx: &[usize], tail: usize) -> Vec<Vec<usize>> {
    let split = idx.len() - tail;
    let mut out: Vec<Vec<usize>> = vec![idx[..split].to_vec()];
    let mut pool: Vec<usize> = idx[split..].to_vec();
    fn rec(prefix: Vec<usize>, pool: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if pool.is_empty() {
            out.insert(prefix);
            return;
        }
        for i in 0..pool.len() {
            let x = pool.remove(i);
            let mut p = prefix.clone();
            p.push(x);
            rec(p, pool, out);
            pool.insert(i, x);
        }
    }
    let mut set = BTreeSet::new();
    rec(out.pop().unwrap(), &mut pool, &mut set);
    out.extend(set);
    out
}

/// Printed expression with the variables renamed from `u` to `v`.
fn in_v(e: &Expr) -> String {
    let s = e.to_string();
    let b = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    for (i, ch) in s.char_indices() {
        let var = ch == 'u'
            && b.get(i + 1).is_some_and(u8::is_ascii_digit)
            && (i == 0 || !(b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_'));
        out.push(if var { 'v' } else { ch });
    }
    out
}

fn write_tensor(f: &mut fmt::Formatter<'_>, letter: char, t: &Tensor) -> fmt::Result {
    let tail = symmetric_tail(letter);
    for idx in t.indices() {
        let e = t.get(&idx);
        if e.is_zero() || (tail > 0 && idx[idx.len() - tail..].windows(2).any(|w| w[0] > w[1])) {
            continue;
        }
        write!(f, "{}", letter)?;
        for i in &idx {
            write!(f, "[{}]", i)?;
        }
        writeln!(f, " = {}", e)?;
    }
    Ok(())
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        for s in &self.funcs {
            let deps: Vec<String> = s.deps.iter().map(|d| format!("u{}", d)).collect();
            write!(f, "func {}({})", s.name, deps.join(", "))?;
            match &s.rule {
                Some(Rule::Exp) => write!(f, " rule exp")?,
                Some(Rule::Sin { cos }) => write!(f, " rule sin({})", cos)?,
                Some(Rule::Cos { sin }) => write!(f, " rule cos({})", sin)?,
                None => {}
            }
            writeln!(f)?;
        }
        if let Some(h) = &self.hydro {
            writeln!(f, "metric")?;
            write_tensor(f, 'g', &h.g)?;
            writeln!(f, "b")?;
            write_tensor(f, 'b', &h.b)?;
        }
        if let Some(p) = &self.bivector {
            writeln!(f, "bivector")?;
            for ((i, j), d) in p.components() {
                for (m, c) in d.terms() {
                    writeln!(f, "P[{}][{}][{}] = {}", i, j, m, c)?;
                }
            }
        }
        for d in [&self.deform1, &self.deform2].into_iter().flatten() {
            match d {
                Deformation::First { a, b, c, d } => {
                    writeln!(f, "deform1")?;
                    for (l, t) in [('A', a), ('B', b), ('C', c), ('D', d)] {
                        write_tensor(f, l, t)?;
                    }
                }
                Deformation::Second { e, f: ff, g, h, l, m, nn } => {
                    writeln!(f, "deform2")?;
                    for (k, t) in [('E', e), ('F', ff), ('G', g), ('H', h), ('L', l), ('M', m), ('N', nn)] {
                        write_tensor(f, k, t)?;
                    }
                }
            }
        }
        if let Some(x) = &self.vfield {
            writeln!(f, "vfield")?;
            for (i, c) in x.comps.iter().enumerate() {
                if !c.is_zero() {
                    writeln!(f, "X[{}] = {}", i + 1, c)?;
                }
            }
        }
        if let Some(m) = &self.map {
            writeln!(f, "map")?;
            for (i, c) in m.iter().enumerate() {
                writeln!(f, "u{} = {}", i + 1, in_v(c))?;
            }
        }
        if let Some(m) = &self.inv {
            writeln!(f, "inv")?;
            for (i, c) in m.iter().enumerate() {
                writeln!(f, "v{} = {}", i + 1, c)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statement_positions() {
        let s = statements("n = 2\n  metric; g[1][1] = 1 # c\n");
        let v: Vec<_> = s.iter().map(|s| (s.text, s.line, s.col)).collect();
        assert_eq!(v, [("n = 2", 1, 1), ("metric", 2, 3), ("g[1][1] = 1", 2, 11)]);
    }

    #[test]
    fn tail_permutations() {
        assert_eq!(permutations_of_tail(&[1, 2, 1, 2], 2), vec![vec![1, 2, 1, 2], vec![1, 2, 2, 1]]);
        assert_eq!(permutations_of_tail(&[1, 1, 1, 1, 2], 3).len(), 3);
        assert_eq!(permutations_of_tail(&[2, 1, 3], 0), vec![vec![2, 1, 3]]);
    }

    #[test]
    fn v_renaming_skips_names() {
        let mut ctx = ParseContext::new(2);
        ctx.declare(FuncSym::new("mu1", &[2]));
        let e = ctx.parse("u1*mu1 + u2_x").unwrap();
        assert!(in_v(&e).contains("v1") && in_v(&e).contains("mu1") && in_v(&e).contains("v2_x"));
    }
}
