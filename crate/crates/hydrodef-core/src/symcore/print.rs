//! Text form accepted back by [`super::parse`].

use core::fmt::{self, Write};

use super::atom::{Atom, JetVar};
use super::expr::Expr;
use super::poly::{Monomial, Poly};
use crate::scalar::Scalar;

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.comp)?;
        match self.order {
            0 => Ok(()),
            1 => f.write_str("_x"),
            2 => f.write_str("_xx"),
            3 => f.write_str("_xxx"),
            k => write!(f, "_{{{}}}", k),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Jet(j) => write!(f, "{}", j),
            Atom::Func(g) => {
                let order = g.deriv_order();
                if order == 0 {
                    f.write_str(&g.sym.name)?;
                } else if g.sym.deps.len() == 1 && order <= 3 {
                    f.write_str(&g.sym.name)?;
                    for _ in 0..order {
                        f.write_char('\'')?;
                    }
                } else {
                    write!(f, "D({}", g.sym.name)?;
                    for (slot, &k) in g.deriv.iter().enumerate() {
                        for _ in 0..k {
                            write!(f, ",u{}", g.sym.deps[slot])?;
                        }
                    }
                    f.write_char(')')?;
                }
                if let Some(args) = &g.args {
                    f.write_char('(')?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_char(',')?;
                        }
                        write!(f, "{}", a)?;
                    }
                    f.write_char(')')?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, e)) in self.factors().iter().enumerate() {
            if i > 0 {
                f.write_char('*')?;
            }
            write!(f, "{}", a)?;
            if *e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        Ok(())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, c: &Scalar, first: bool) -> fmt::Result {
    let negative = c.is_real() && c.re() < &num_rational::BigRational::from_integer(0.into());
    let mag = if negative { -c } else { c.clone() };
    if first {
        if negative {
            f.write_char('-')?;
        }
    } else {
        f.write_str(if negative { " - " } else { " + " })?;
    }
    if m.is_one() {
        write!(f, "{}", mag)
    } else if mag.is_one() {
        write!(f, "{}", m)
    } else {
        write!(f, "{}*{}", mag, m)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_char('0');
        }
        for (i, (m, c)) in self.terms().iter().enumerate() {
            write_term(f, m, c, i == 0)?;
        }
        Ok(())
    }
}

/// A factor that prints without parentheses: a single atom.
fn is_bare(p: &Poly) -> bool {
    match p.terms() {
        [(m, c)] => c.is_one() && matches!(m.factors(), [(_, 1)]),
        _ => false,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        if self.num.terms().len() == 1 {
            write!(f, "{}/", self.num)?;
        } else {
            write!(f, "({})/", self.num)?;
        }
        let grouped = self.den.len() > 1;
        if grouped {
            f.write_char('(')?;
        }
        for (i, (g, e)) in self.den.iter().enumerate() {
            if i > 0 {
                f.write_char('*')?;
            }
            if is_bare(g) {
                write!(f, "{}", g)?;
            } else {
                write!(f, "({})", g)?;
            }
            if *e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        if grouped {
            f.write_char(')')?;
        }
        Ok(())
    }
}
