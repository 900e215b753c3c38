//! Indeterminates of the differential ring: jet variables and formal functions.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::expr::Expr;

/// The jet variable `u^comp_(order)`; components are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JetVar {
    pub comp: u8,
    pub order: u8,
}

impl JetVar {
    pub fn new(comp: u8, order: u8) -> Self {
        JetVar { comp, order }
    }
}

/// Closed derivative families for functions of one variable.
///
/// `Sin`/`Cos` name their partner so that `sin' = cos` and `cos' = -sin` can be
/// built without a symbol table, and `sin^2 + cos^2 = 1` can be reduced.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rule {
    Exp,
    Sin { cos: Arc<str> },
    Cos { sin: Arc<str> },
}

/// A declared formal function symbol together with its dependency list.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FuncSym {
    pub name: Arc<str>,
    /// Components of the order-0 variables the function depends on.
    pub deps: Vec<u8>,
    pub rule: Option<Rule>,
}

impl FuncSym {
    pub fn new(name: &str, deps: &[u8]) -> Arc<FuncSym> {
        Arc::new(FuncSym { name: Arc::from(name), deps: deps.to_vec(), rule: None })
    }

    pub fn with_rule(name: &str, dep: u8, rule: Rule) -> Arc<FuncSym> {
        Arc::new(FuncSym { name: Arc::from(name), deps: alloc::vec![dep], rule: Some(rule) })
    }

    /// A `sin`/`cos` pair of one variable.
    pub fn trig_pair(sin: &str, cos: &str, dep: u8) -> (Arc<FuncSym>, Arc<FuncSym>) {
        (FuncSym::with_rule(sin, dep, Rule::Sin { cos: Arc::from(cos) }), FuncSym::with_rule(cos, dep, Rule::Cos { sin: Arc::from(sin) }))
    }

    pub(crate) fn partner(&self) -> Option<Arc<FuncSym>> {
        let (name, rule) = match &self.rule {
            Some(Rule::Sin { cos }) => (cos.clone(), Rule::Cos { sin: self.name.clone() }),
            Some(Rule::Cos { sin }) => (sin.clone(), Rule::Sin { cos: self.name.clone() }),
            _ => return None,
        };
        Some(Arc::new(FuncSym { name, deps: self.deps.clone(), rule: Some(rule) }))
    }
}

/// A partial derivative of a formal function, optionally evaluated at argument
/// expressions (a composite such as `r(w(u2))`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FuncAtom {
    pub sym: Arc<FuncSym>,
    /// Derivative multiplicity per dependency slot.
    pub deriv: Vec<u8>,
    /// `None` means the declared dependencies themselves.
    pub args: Option<Arc<Vec<Expr>>>,
}

impl FuncAtom {
    pub fn new(sym: Arc<FuncSym>) -> Self {
        let k = sym.deps.len();
        FuncAtom { sym, deriv: alloc::vec![0; k], args: None }
    }

    pub fn deriv_order(&self) -> u32 {
        self.deriv.iter().map(|&d| d as u32).sum()
    }

    /// Argument in slot `d`, as an expression.
    pub fn arg(&self, d: usize) -> Expr {
        match &self.args {
            Some(a) => a[d].clone(),
            None => Expr::jet(self.sym.deps[d], 0),
        }
    }

    /// Replace the arguments, dropping them again when they are the plain
    /// dependency variables.
    pub fn with_args(&self, args: Vec<Expr>) -> FuncAtom {
        let trivial = args.iter().zip(self.sym.deps.iter()).all(|(a, &d)| a == &Expr::jet(d, 0));
        FuncAtom { sym: self.sym.clone(), deriv: self.deriv.clone(), args: if trivial { None } else { Some(Arc::new(args)) } }
    }
}

/// Ordered by (kind, component, jet order, name, multi-index, arguments).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Jet(JetVar),
    Func(FuncAtom),
}

impl Atom {
    pub fn jet(comp: u8, order: u8) -> Atom {
        Atom::Jet(JetVar::new(comp, order))
    }

    /// Weight in the differential grading: `deg u_(k) = k`, functions weigh 0.
    pub fn weight(&self) -> u32 {
        match self {
            Atom::Jet(j) => j.order as u32,
            Atom::Func(_) => 0,
        }
    }

    pub(crate) fn is_cos(&self) -> bool {
        matches!(self, Atom::Func(f) if matches!(f.sym.rule, Some(Rule::Cos { .. })))
    }
}
