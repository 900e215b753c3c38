//! Reports printed by every command.

use std::fmt::Write;

use serde::Serialize;

use hydrodef_core::bivectors::Bivector;
use hydrodef_core::schouten::Trivector;
use hydrodef_core::Expr;

/// Random points tried by the evaluation oracle for each nonzero residual.
pub const ORACLE_POINTS: u64 = 50;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Component {
    pub indices: Vec<usize>,
    /// Which coefficient of the object the residual belongs to.
    pub coefficient: String,
    pub residual: String,
    pub zero: bool,
}

/// Data shown alongside the residuals; does not affect `pass`.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Value {
    pub indices: Vec<usize>,
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Report {
    pub check: String,
    pub case: String,
    pub components: Vec<Component>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub pass: bool,
    /// Random evaluation found no nonzero residual to vanish everywhere.
    pub oracle_agrees: bool,
    pub seed: u64,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn new(check: &str, case: &str, seed: u64) -> Report {
        Report {
            check: check.into(),
            case: case.into(),
            components: Vec::new(),
            values: Vec::new(),
            notes: Vec::new(),
            pass: true,
            oracle_agrees: true,
            seed,
            elapsed_ms: 0,
        }
    }

    pub fn push(&mut self, indices: Vec<usize>, coefficient: String, e: &Expr) -> hydrodef_core::Result<()> {
        let zero = e.is_zero();
        if !zero && e.vanishes_at(self.seed..self.seed + ORACLE_POINTS)? {
            self.oracle_agrees = false;
        }
        self.components.push(Component { indices, coefficient, residual: e.to_string(), zero });
        Ok(())
    }

    /// A component decided without an expression, such as a catalog check.
    pub fn push_flag(&mut self, coefficient: String, residual: String, zero: bool) {
        self.components.push(Component { indices: Vec::new(), coefficient, residual, zero });
    }

    pub fn push_bivector(&mut self, prefix: &str, p: &Bivector) -> hydrodef_core::Result<()> {
        for ((i, j), d) in p.components() {
            for (m, c) in d.terms() {
                self.push(vec![i, j], format!("{}d^{}", prefix, m), c)?;
            }
        }
        Ok(())
    }

    pub fn push_trivector(&mut self, prefix: &str, t: &Trivector) -> hydrodef_core::Result<()> {
        for ((i, j, k), d) in t.components() {
            for ((a, b), c) in d.terms() {
                self.push(vec![i, j, k], format!("{}d^({},{})", prefix, a, b), c)?;
            }
        }
        Ok(())
    }

    pub fn value(&mut self, indices: Vec<usize>, name: &str, value: impl ToString) {
        self.values.push(Value { indices, name: name.into(), value: value.to_string() });
    }

    pub fn finish(&mut self) {
        self.pass = self.oracle_agrees && self.components.iter().all(|c| c.zero);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Nonzero residuals, values and the verdict.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.check, self.case);
        let bad: Vec<&Component> = self.components.iter().filter(|c| !c.zero).collect();
        for c in &bad {
            let _ = writeln!(s, "  {}{}: {}", c.coefficient, fmt_indices(&c.indices), c.residual);
        }
        for v in &self.values {
            let _ = writeln!(s, "  {}{} = {}", v.name, fmt_indices(&v.indices), v.value);
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {}", n);
        }
        if !self.oracle_agrees {
            let _ = writeln!(s, "  random evaluation disagrees with the exact zero test");
        }
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = match (bad.len(), self.components.len()) {
            (_, 0) => writeln!(s, "{}: residual is identically zero ({} ms)", verdict, self.elapsed_ms),
            (0, total) => writeln!(s, "{}: all {} residuals vanish ({} ms)", verdict, total, self.elapsed_ms),
            (k, total) => writeln!(s, "{}: {} of {} residuals nonzero ({} ms)", verdict, k, total, self.elapsed_ms),
        };
        s
    }
}

fn fmt_indices(idx: &[usize]) -> String {
    idx.iter().map(|i| format!("[{}]", i)).collect()
}
