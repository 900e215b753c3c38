//! Parser for the expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" "-"? int)?
//! primary := int | "(" expr ")" | "i" | var | func
//! var     := "u" digit ("_x" | "_xx" | "_xxx" | "_{" int "}")?
//! func    := name "'"* args? | "D(" name ("," var)+ ")" args? | "dx(" expr ")"
//! args    := "(" expr ("," expr)* ")"
//! ```
//!
//! Division by a product keeps the product's factors apart, so printed
//! denominators parse back to the same factored form.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::atom::{Atom, FuncSym, JetVar};
use super::expr::Expr;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Names and switches the parser needs.
#[derive(Clone, Debug)]
pub struct ParseContext {
    /// Number of components; variables `u1..un` are accepted.
    pub n: u8,
    pub funcs: BTreeMap<String, Arc<FuncSym>>,
    /// Accept the imaginary unit `i`.
    pub complex: bool,
    /// Letter used for variables, `u` by default.
    pub var_prefix: char,
}

impl ParseContext {
    pub fn new(n: u8) -> Self {
        ParseContext { n, funcs: BTreeMap::new(), complex: false, var_prefix: 'u' }
    }

    pub fn with_funcs(mut self, funcs: &[Arc<FuncSym>]) -> Self {
        for f in funcs {
            self.funcs.insert(f.name.to_string(), f.clone());
        }
        self
    }

    pub fn declare(&mut self, f: Arc<FuncSym>) {
        self.funcs.insert(f.name.to_string(), f);
    }

    pub fn parse(&self, src: &str) -> Result<Expr> {
        let mut p = Parser { src: src.as_bytes(), pos: 0, ctx: self };
        let ast = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        ast.eval()
    }
}

/// Parse with a context that knows `funcs` and `n` components.
pub fn parse(src: &str, n: u8, funcs: &[Arc<FuncSym>]) -> Result<Expr> {
    ParseContext::new(n).with_funcs(funcs).parse(src)
}

enum Ast {
    Leaf(Expr),
    Add(Vec<(bool, Ast)>),
    Neg(alloc::boxed::Box<Ast>),
    Mul(alloc::boxed::Box<Ast>, alloc::boxed::Box<Ast>),
    Div(alloc::boxed::Box<Ast>, alloc::boxed::Box<Ast>),
    Pow(alloc::boxed::Box<Ast>, i32),
}

impl Ast {
    fn eval(&self) -> Result<Expr> {
        Ok(match self {
            Ast::Leaf(e) => e.clone(),
            Ast::Add(terms) => {
                let mut acc = Expr::zero();
                for (neg, t) in terms {
                    let v = t.eval()?;
                    acc = if *neg { acc.sub_expr(&v) } else { acc.add_expr(&v) };
                }
                acc
            }
            Ast::Neg(a) => a.eval()?.neg_expr(),
            Ast::Mul(a, b) => a.eval()?.mul_expr(&b.eval()?),
            Ast::Div(a, b) => a.eval()?.mul_expr(&b.eval_inverse()?),
            Ast::Pow(a, k) => a.eval()?.pow(*k)?,
        })
    }

    fn eval_inverse(&self) -> Result<Expr> {
        match self {
            Ast::Mul(a, b) => Ok(a.eval_inverse()?.mul_expr(&b.eval_inverse()?)),
            Ast::Div(a, b) => Ok(a.eval_inverse()?.mul_expr(&b.eval()?)),
            Ast::Neg(a) => Ok(a.eval_inverse()?.neg_expr()),
            Ast::Pow(a, k) => a.eval_inverse()?.pow(*k),
            _ => self.eval()?.inv(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a ParseContext,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut terms = alloc::vec![(false, self.term()?)];
        loop {
            if self.eat(b'+') {
                terms.push((false, self.term()?));
            } else if self.eat(b'-') {
                terms.push((true, self.term()?));
            } else {
                break;
            }
        }
        if terms.len() == 1 && !terms[0].0 {
            return Ok(terms.pop().unwrap().1);
        }
        Ok(Ast::Add(terms))
    }

    fn term(&mut self) -> Result<Ast> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Ast::Mul(acc.into(), self.unary()?.into());
            } else if self.eat(b'/') {
                acc = Ast::Div(acc.into(), self.unary()?.into());
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.eat(b'-') {
            return Ok(Ast::Neg(self.unary()?.into()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let k = self.int()?;
            let k = i32::try_from(k).map_err(|_| self.err("exponent too large"))?;
            return Ok(Ast::Pow(base.into(), if neg { -k } else { k }));
        }
        Ok(base)
    }

    fn int(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        core::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().map_err(|_| self.err("integer out of range"))
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            if self.src[self.pos] == b'_' && self.pos > start && self.src.get(self.pos + 1) == Some(&b'{') {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            Some(String::from(core::str::from_utf8(&self.src[start..self.pos]).unwrap()))
        }
    }

    fn primary(&mut self) -> Result<Ast> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                self.skip_ws();
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: BigInt = digits.parse().map_err(|_| self.err("bad integer"))?;
                Ok(Ast::Leaf(Expr::constant(Scalar::from_rational(BigRational::from_integer(n)))))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident().unwrap();
                self.named(name, start)
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn variable(&self, name: &str) -> Option<Result<JetVar>> {
        let mut chars = name.chars();
        if chars.next()? != self.ctx.var_prefix {
            return None;
        }
        let rest = chars.as_str();
        let digit_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if digit_end == 0 {
            return None;
        }
        let comp: u8 = rest[..digit_end].parse().ok()?;
        let suffix = &rest[digit_end..];
        let order = match suffix {
            "" => 0,
            "_x" => 1,
            "_xx" => 2,
            "_xxx" => 3,
            _ => return None,
        };
        if comp == 0 || comp > self.ctx.n {
            return Some(Err(Error::Parse { pos: self.pos, msg: format!("variable {} outside 1..{}", name, self.ctx.n) }));
        }
        Some(Ok(JetVar::new(comp, order)))
    }

    fn named(&mut self, name: String, start: usize) -> Result<Ast> {
        if let Some(v) = self.variable(&name) {
            let mut v = v?;
            // `u1_{4}` style jet orders.
            if self.src.get(self.pos) == Some(&b'_') && self.src.get(self.pos + 1) == Some(&b'{') {
                if v.order != 0 {
                    return Err(self.err("double jet suffix"));
                }
                self.pos += 2;
                let k = self.int()?;
                self.expect(b'}')?;
                v.order = u8::try_from(k).map_err(|_| self.err("jet order too large"))?;
            }
            return Ok(Ast::Leaf(Expr::atom(Atom::Jet(v))));
        }
        if name == "i" && !self.ctx.funcs.contains_key("i") {
            if !self.ctx.complex {
                return Err(Error::ComplexDisabled);
            }
            return Ok(Ast::Leaf(Expr::constant(Scalar::i())));
        }
        if name == "dx" && !self.ctx.funcs.contains_key("dx") && self.src.get(self.pos) == Some(&b'(') {
            self.pos += 1;
            let inner = self.expr()?.eval()?;
            self.expect(b')')?;
            return Ok(Ast::Leaf(inner.total_x(&crate::error::Caps::default())?));
        }
        if name == "D" && self.src.get(self.pos) == Some(&b'(') {
            self.pos += 1;
            let fname = self.ident().ok_or_else(|| self.err("expected function name"))?;
            let sym = self.lookup(&fname)?;
            let mut e = Expr::func(&sym);
            while self.eat(b',') {
                let vname = self.ident().ok_or_else(|| self.err("expected variable"))?;
                let v = match self.variable(&vname) {
                    Some(Ok(v)) if v.order == 0 => v,
                    _ => return Err(self.err("expected an order-0 variable")),
                };
                let slot =
                    sym.deps.iter().position(|&d| d == v.comp).ok_or_else(|| self.err("function does not depend on this variable"))?;
                e = self.slot_partial(&e, &sym, slot);
            }
            self.expect(b')')?;
            return self.maybe_args(e, &sym);
        }
        let sym = match self.ctx.funcs.get(&name) {
            Some(s) => s.clone(),
            None => {
                self.pos = start;
                return Err(self.err(&format!("unknown identifier '{}'", name)));
            }
        };
        let mut e = Expr::func(&sym);
        while self.src.get(self.pos) == Some(&b'\'') {
            self.pos += 1;
            if sym.deps.len() != 1 {
                return Err(self.err("primes need a function of one variable; use D(...)"));
            }
            e = self.slot_partial(&e, &sym, 0);
        }
        self.maybe_args(e, &sym)
    }

    fn lookup(&self, name: &str) -> Result<Arc<FuncSym>> {
        self.ctx.funcs.get(name).cloned().ok_or_else(|| Error::Unknown(name.to_string()))
    }

    fn slot_partial(&self, e: &Expr, sym: &Arc<FuncSym>, slot: usize) -> Expr {
        e.partial(JetVar::new(sym.deps[slot], 0))
    }

    fn maybe_args(&mut self, e: Expr, sym: &Arc<FuncSym>) -> Result<Ast> {
        if self.src.get(self.pos) != Some(&b'(') {
            return Ok(Ast::Leaf(e));
        }
        self.pos += 1;
        let mut args = alloc::vec![self.expr()?.eval()?];
        while self.eat(b',') {
            args.push(self.expr()?.eval()?);
        }
        self.expect(b')')?;
        if args.len() != sym.deps.len() {
            return Err(self.err("wrong number of arguments"));
        }
        Ok(Ast::Leaf(apply_args(&e, sym, &args)?))
    }
}

/// Evaluate every occurrence of `sym` (at its default arguments) at `args`.
pub(crate) fn apply_args(e: &Expr, sym: &Arc<FuncSym>, args: &[Expr]) -> Result<Expr> {
    e.substitute(&mut |a| {
        Ok(match a {
            Atom::Func(f)
                if f.args.is_none()
                    && (f.sym == *sym || f.sym.partner().as_ref() == Some(sym) || sym.partner().as_ref() == Some(&f.sym)) =>
            {
                Expr::atom(Atom::Func(f.with_args(args.to_vec())))
            }
            _ => Expr::atom(a.clone()),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        let f = FuncSym::new("F", &[2, 3]);
        let p = FuncSym::new("p", &[2]);
        let ctx = ParseContext::new(3).with_funcs(&[f.clone(), p.clone()]);
        let e = ctx.parse("3/2*u1_xx - p'' * u2_x^2 + D(F,u2,u3)/(u1 - u2)^2").unwrap();
        let back = ctx.parse(&alloc::format!("{}", e)).unwrap();
        assert_eq!(e, back);
        assert!(ctx.parse("u4").is_err());
        assert!(ctx.parse("q").is_err());
        assert_eq!(ctx.parse("u1_{4}").unwrap(), Expr::jet(1, 4));
        assert_eq!(ctx.parse("dx(p*u2_x)").unwrap(), ctx.parse("p'*u2_x^2 + p*u2_xx").unwrap());
    }

    #[test]
    fn complex_requires_mode() {
        let mut ctx = ParseContext::new(2);
        assert_eq!(ctx.parse("i*u1"), Err(Error::ComplexDisabled));
        ctx.complex = true;
        let e = ctx.parse("i*i").unwrap();
        assert_eq!(e, Expr::int(-1));
    }
}
