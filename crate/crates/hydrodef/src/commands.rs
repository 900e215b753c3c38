//! One function per subcommand; each returns a finished [`Report`].

use std::path::Path;
use std::time::Instant;

use hydrodef_core::bivectors::{coefficient_count, free_coefficient_count, HydroOp};
use hydrodef_core::catalog::{self, VerifyOptions, NAMES};
use hydrodef_core::grinberg::grinberg_residuals;
use hydrodef_core::schouten::{jacobi_residual, lie, order2_residual, schouten};
use hydrodef_core::Caps;

use crate::problem::{ProblemFile, SyntaxError};
use crate::report::{Report, ORACLE_POINTS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{err}")]
    Syntax { path: String, err: SyntaxError },
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("{0}")]
    Engine(#[from] hydrodef_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub caps: Caps,
    pub seed: u64,
    pub complex: bool,
}

/// Catalog drivers that are not single entries.
pub const DRIVERS: [(&str, &str); 2] = [
    ("MIURA_REDUCTIONS", "eliminations by infinitesimal Miura transformations"),
    ("EQUIVALENCES", "coordinate changes between forms and parameter transport"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckKind {
    Grinberg,
    Jacobi,
    Skew,
}

pub fn load(path: &Path, opts: &Options) -> Result<ProblemFile> {
    let name = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|err| CliError::Io { path: name.clone(), err })?;
    ProblemFile::parse(&src, opts.complex).map_err(|err| CliError::Syntax { path: name, err })
}

fn timed(mut r: Report, start: Instant) -> Report {
    r.elapsed_ms = start.elapsed().as_millis() as u64;
    r.finish();
    r
}

fn need_hydro<'a>(f: &'a ProblemFile, path: &Path) -> Result<&'a HydroOp> {
    f.hydro.as_ref().ok_or_else(|| CliError::Usage(format!("{}: no metric or b section", path.display())))
}

pub fn check(kind: CheckKind, path: &Path, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let f = load(path, opts)?;
    let case = path.display().to_string();
    let caps = &opts.caps;
    let mut r;
    match kind {
        CheckKind::Grinberg => {
            r = Report::new("grinberg", &case, opts.seed);
            let op = need_hydro(&f, path)?;
            for res in grinberg_residuals(op).residuals {
                r.push(res.indices, format!("G{}", res.condition), &res.residual)?;
            }
        }
        CheckKind::Jacobi => {
            r = Report::new("jacobi", &case, opts.seed);
            let s = f.series();
            if f.principal().is_none() && !f.has_deformation() {
                return Err(CliError::Usage(format!("{}: no bivector to check", case)));
            }
            r.push_trivector("[p0,p0] ", &jacobi_residual(&s.p0, caps)?)?;
            if let Some(p1) = &s.p1 {
                r.push_trivector("[p0,p1] ", &schouten(&s.p0, p1, caps)?)?;
            }
            if s.p2.is_some() {
                r.push_trivector("2[p0,p2]+[p1,p1] ", &order2_residual(&s, caps)?)?;
            }
        }
        CheckKind::Skew => {
            r = Report::new("skew", &case, opts.seed);
            let s = f.series();
            for (label, p) in [("p0 ", Some(&s.p0)), ("p1 ", s.p1.as_ref()), ("p2 ", s.p2.as_ref())] {
                if let Some(p) = p {
                    for ((i, j), d) in p.skew_defect(caps)? {
                        for (m, c) in d.terms() {
                            r.push(vec![i, j], format!("{}d^{}", label, m), c)?;
                        }
                    }
                }
            }
        }
    }
    Ok(timed(r, start))
}

fn same_n(a: &ProblemFile, b: &ProblemFile) -> Result<()> {
    if a.n != b.n {
        return Err(CliError::Engine(hydrodef_core::Error::Dimension(format!("{} components against {}", a.n, b.n))));
    }
    Ok(())
}

/// Schouten bracket of the two files' total bivectors.
pub fn bracket(p: &Path, q: &Path, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let (fp, fq) = (load(p, opts)?, load(q, opts)?);
    same_n(&fp, &fq)?;
    let mut r = Report::new("bracket", &format!("{} {}", p.display(), q.display()), opts.seed);
    r.push_trivector("", &schouten(&fp.total(), &fq.total(), &opts.caps)?)?;
    Ok(timed(r, start))
}

/// Lie derivative of the operator along the field; passes when it vanishes.
pub fn lie_derivative(field: &Path, op: &Path, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let (ff, fo) = (load(field, opts)?, load(op, opts)?);
    same_n(&ff, &fo)?;
    let x = ff.vfield.as_ref().ok_or_else(|| CliError::Usage(format!("{}: no vfield section", field.display())))?;
    let mut r = Report::new("lie", &format!("{} {}", field.display(), op.display()), opts.seed);
    r.push_bivector("", &lie(x, &fo.total(), &opts.caps)?)?;
    Ok(timed(r, start))
}

/// Push the operator along the change. The residuals are the tensor
/// conditions of the image; the image and the non-tensorial part are values.
pub fn transform(map: &Path, op: &Path, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let (fm, fo) = (load(map, opts)?, load(op, opts)?);
    same_n(&fm, &fo)?;
    let ch = fm.change().ok_or_else(|| CliError::Usage(format!("{}: no map section", map.display())))??;
    let h = need_hydro(&fo, op)?;
    let caps = &opts.caps;
    let mut r = Report::new("transform", &format!("{} {}", map.display(), op.display()), opts.seed);
    let nt = ch.nontensorial_part(&h.g, caps)?;
    for idx in nt.indices() {
        if !nt.get(&idx).is_zero() {
            r.value(idx.clone(), "non-tensorial", nt.get(&idx));
        }
    }
    let image = ch.push_hydro(h, caps)?;
    for idx in image.g.indices() {
        if !image.g.get(&idx).is_zero() {
            r.value(idx.clone(), "g", image.g.get(&idx));
        }
    }
    for idx in image.b.indices() {
        if !image.b.get(&idx).is_zero() {
            r.value(idx.clone(), "b", image.b.get(&idx));
        }
    }
    r.value(Vec::new(), "admissible", ch.is_admissible(&h.g, caps)?);
    r.value(Vec::new(), "restricted", ch.is_restricted(&h.g, caps)?);
    for res in grinberg_residuals(&image).residuals {
        r.push(res.indices, format!("G{}", res.condition), &res.residual)?;
    }
    Ok(timed(r, start))
}

pub fn catalog_list(opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let mut r = Report::new("catalog list", "", opts.seed);
    for name in NAMES {
        let e = catalog::build(name)?;
        r.value(Vec::new(), name, format!("n = {}, {}", e.n, e.source));
    }
    for (name, source) in DRIVERS {
        r.value(Vec::new(), name, source);
    }
    Ok(timed(r, start))
}

/// Verify one case, or every entry and driver when `case` is `None`.
pub fn catalog_verify(case: Option<&str>, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let vo = VerifyOptions { caps: opts.caps, seeds: opts.seed..opts.seed + ORACLE_POINTS };
    let cases: Vec<&str> = match case {
        Some(c) => vec![c],
        None => NAMES.iter().copied().chain(DRIVERS.iter().map(|d| d.0)).collect(),
    };
    let mut r = Report::new("catalog verify", case.unwrap_or("all"), opts.seed);
    for c in cases {
        let rep = match c {
            "MIURA_REDUCTIONS" => catalog::verify_miura_reductions(&vo)?,
            "EQUIVALENCES" => catalog::verify_equivalences(&vo)?,
            _ => catalog::verify(c, &vo).map_err(|e| match e {
                hydrodef_core::Error::Unknown(_) => CliError::Usage(format!("unknown catalog case {}; see `catalog list`", c)),
                other => other.into(),
            })?,
        };
        for check in &rep.checks {
            let residual = check.failures.first().map_or_else(|| "0".to_string(), |f| format!("{}: {}", f.label, f.residual));
            r.push_flag(format!("{}: {}", rep.case, check.name), residual, check.pass);
            r.oracle_agrees &= check.oracle_agrees;
        }
        r.notes.extend(rep.notes.iter().map(|n| format!("{}: {}", rep.case, n)));
    }
    Ok(timed(r, start))
}

/// Coefficient counts of the general homogeneous deformations up to `degree`.
pub fn count(n: usize, degree: u8, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    if !(1..=2).contains(&degree) || n == 0 || n > 9 {
        return Err(CliError::Usage("count needs 1 <= n <= 9 and degree 1 or 2".into()));
    }
    let mut r = Report::new("count", &format!("n = {}, degree {}", n, degree), opts.seed);
    let mut total = 0;
    for d in 1..=degree {
        let c = coefficient_count(n as u64, d);
        total += c;
        r.value(vec![d as usize], "coefficients", c);
        r.value(vec![d as usize], "free after skew-symmetry", free_coefficient_count(n, d));
    }
    r.value(Vec::new(), "cumulative", total);
    Ok(timed(r, start))
}
