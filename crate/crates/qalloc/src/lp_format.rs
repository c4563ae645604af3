//! CPLEX LP text format, for handing problems to external solvers.
//!
//! The writer lists every variable in the objective (zero coefficients
//! included) so a reader that orders variables by first appearance
//! restores the original column order. Reals carry 17 significant digits.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use qalloc_core::lp::{Constraint, LinearProgram, MilpProgram, Problem, Relation, Sense, VarId};

use crate::error::{AppError, Result};

const KEYWORDS: &[&str] = &[
    "max", "maximize", "maximum", "maximise", "min", "minimize", "minimum", "minimise", "st", "s.t.", "subject",
    "such", "bounds", "bound", "binaries", "binary", "bin", "generals", "general", "gen", "end", "free", "inf",
    "infinity",
];

fn valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    let first_ok = matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    first_ok
        && s.len() <= 255
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "_.[]".contains(c))
        && !KEYWORDS.contains(&s.to_ascii_lowercase().as_str())
}

/// Original names where they are legal and unique, `v<i>` / `r<i>` otherwise.
fn names(given: &[String], prefix: char) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out: Vec<String> =
        given.iter().map(|n| if valid_name(n) && seen.insert(n.clone()) { n.clone() } else { String::new() }).collect();
    for (i, n) in out.iter_mut().enumerate() {
        if n.is_empty() {
            let mut k = i;
            loop {
                let c = format!("{prefix}{k}");
                if seen.insert(c.clone()) {
                    *n = c;
                    break;
                }
                k += given.len();
            }
        }
    }
    out
}

fn num(v: f64) -> String {
    format!("{v:+.16e}")
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        num(v)
    }
}

pub fn write_lp(lp: &LinearProgram, binaries: &[usize]) -> String {
    let vn = names(&lp.names, 'v');
    let cn = names(&lp.constraints.iter().map(|c| c.name.clone()).collect::<Vec<_>>(), 'r');
    let mut s = String::from("\\ written by qalloc\n");
    s.push_str(match lp.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    s.push_str(" obj:");
    for (j, c) in lp.objective.iter().enumerate() {
        let _ = write!(s, " {} {}", num(*c), vn[j]);
    }
    s.push_str("\nSubject To\n");
    for (c, name) in lp.constraints.iter().zip(&cn) {
        let _ = write!(s, " {name}:");
        if c.terms.is_empty() {
            let _ = write!(s, " {} {}", num(0.0), vn[0]);
        }
        for &(j, a) in &c.terms {
            let _ = write!(s, " {} {}", num(a), vn[j]);
        }
        let _ = writeln!(s, " {} {}", c.relation.symbol(), num(c.rhs));
    }
    s.push_str("Bounds\n");
    let is_bin: HashSet<usize> = binaries.iter().copied().collect();
    for (j, name) in vn.iter().enumerate() {
        if is_bin.contains(&j) {
            continue;
        }
        let (l, u) = (lp.lower[j], lp.upper[j]);
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            let _ = writeln!(s, " {name} free");
        } else {
            let _ = writeln!(s, " {} <= {name} <= {}", bound(l), bound(u));
        }
    }
    if !binaries.is_empty() {
        s.push_str("Binaries\n");
        for &b in binaries {
            let _ = writeln!(s, " {}", vn[b]);
        }
    }
    s.push_str("End\n");
    s
}

pub fn write_problem(p: &Problem) -> String {
    match p {
        Problem::Lp(lp) => write_lp(lp, &[]),
        Problem::Milp(m) => write_lp(&m.base, &m.binaries),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sign(f64),
    Colon,
    Rel(Relation),
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let b: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == ':' {
            out.push(Tok::Colon);
            i += 1;
        } else if c == '+' || c == '-' {
            out.push(Tok::Sign(if c == '+' { 1.0 } else { -1.0 }));
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            while j < b.len() && matches!(b[j], '<' | '>' | '=') {
                j += 1;
            }
            let op: String = b[i..j].iter().collect();
            let rel = match op.as_str() {
                "<" | "<=" | "=<" => Relation::Le,
                ">" | ">=" | "=>" => Relation::Ge,
                "=" | "==" => Relation::Eq,
                _ => return Err(AppError::Format(format!("unknown relation '{op}'"))),
            };
            out.push(Tok::Rel(rel));
            i = j;
        } else if c.is_ascii_digit() || c == '.' && b.get(i + 1).is_some_and(char::is_ascii_digit) {
            let mut j = i;
            while j < b.len() && (b[j].is_ascii_digit() || b[j] == '.') {
                j += 1;
            }
            if j < b.len() && (b[j] == 'e' || b[j] == 'E') {
                let mut k = j + 1;
                if k < b.len() && (b[k] == '+' || b[k] == '-') {
                    k += 1;
                }
                if k < b.len() && b[k].is_ascii_digit() {
                    while k < b.len() && b[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let s: String = b[i..j].iter().collect();
            out.push(Tok::Num(s.parse().map_err(|_| AppError::Format(format!("bad number '{s}'")))?));
            i = j;
        } else {
            let mut j = i;
            while j < b.len() && !b[j].is_whitespace() && !matches!(b[j], ':' | '+' | '-' | '<' | '>' | '=') {
                j += 1;
            }
            out.push(Tok::Name(b[i..j].iter().collect()));
            i = j;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Objective(Sense),
    Rows,
    Bounds,
    Binaries,
}

fn section_of(line: &str) -> Option<Option<Section>> {
    let l = line.trim().to_ascii_lowercase();
    let l = l.split_whitespace().collect::<Vec<_>>().join(" ");
    Some(Some(match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" => Section::Objective(Sense::Maximize),
        "minimize" | "minimise" | "minimum" | "min" => Section::Objective(Sense::Minimize),
        "subject to" | "such that" | "st" | "s.t." => Section::Rows,
        "bounds" | "bound" => Section::Bounds,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "end" => return Some(None),
        _ => return None,
    }))
}

struct Reader {
    lp: LinearProgram,
    index: HashMap<String, usize>,
    binaries: Vec<usize>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.lp.add_var(name, 0.0, f64::INFINITY, 0.0).0;
        self.index.insert(name.to_string(), j);
        j
    }
}

fn is_inf(name: &str) -> bool {
    matches!(name.to_ascii_lowercase().as_str(), "inf" | "infinity")
}

/// `[sign] number|inf` at `toks[*k]`.
fn signed_value(toks: &[Tok], k: &mut usize) -> Option<f64> {
    let mut s = 1.0;
    while let Some(Tok::Sign(v)) = toks.get(*k) {
        s *= v;
        *k += 1;
    }
    let v = match toks.get(*k)? {
        Tok::Num(v) => *v,
        Tok::Name(n) if is_inf(n) => f64::INFINITY,
        _ => return None,
    };
    *k += 1;
    Some(s * v)
}

/// Linear expression up to a relation or the end of `toks`.
fn expression(r: &mut Reader, toks: &[Tok], k: &mut usize) -> Result<Vec<(usize, f64)>> {
    let mut terms = Vec::new();
    loop {
        let mut s = 1.0;
        let mut coef = None;
        while let Some(Tok::Sign(v)) = toks.get(*k) {
            s *= v;
            *k += 1;
        }
        if let Some(Tok::Num(v)) = toks.get(*k) {
            coef = Some(*v);
            *k += 1;
        }
        match toks.get(*k) {
            Some(Tok::Name(n)) if toks.get(*k + 1) != Some(&Tok::Colon) => {
                let j = r.var(n);
                terms.push((j, s * coef.unwrap_or(1.0)));
                *k += 1;
            }
            _ if coef.is_some() => {
                return Err(AppError::Format("constant terms in expressions are not supported".into()));
            }
            _ => return Ok(terms),
        }
    }
}

pub fn parse_lp(text: &str) -> Result<Problem> {
    let mut sections: Vec<(Section, String)> = Vec::new();
    let mut current: Option<Section> = None;
    let mut ended = false;
    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let head = line.trim().to_ascii_lowercase();
        if matches!(head.as_str(), "generals" | "general" | "gen" | "semi-continuous" | "semis" | "sos") {
            return Err(AppError::Format(format!("section '{}' is not supported", line.trim())));
        }
        match section_of(line) {
            Some(Some(s)) => {
                current = Some(s);
                sections.push((s, String::new()));
            }
            Some(None) => {
                ended = true;
                break;
            }
            None => match (current, sections.last_mut()) {
                (Some(_), Some((_, body))) => {
                    body.push_str(line);
                    body.push('\n');
                }
                _ => return Err(AppError::Format(format!("text before the objective section: '{}'", line.trim()))),
            },
        }
    }
    if !ended {
        return Err(AppError::Format("missing End".into()));
    }
    let sense = match sections.first() {
        Some((Section::Objective(s), _)) => *s,
        _ => return Err(AppError::Format("the file must start with Maximize or Minimize".into())),
    };
    let mut r = Reader { lp: LinearProgram::new(sense), index: HashMap::new(), binaries: Vec::new() };
    let mut objective: Vec<(usize, f64)> = Vec::new();
    for (sec, body) in &sections {
        let toks = tokenize(body)?;
        let mut k = 0;
        match sec {
            Section::Objective(_) => {
                if let (Some(Tok::Name(_)), Some(Tok::Colon)) = (toks.first(), toks.get(1)) {
                    k = 2;
                }
                objective.extend(expression(&mut r, &toks, &mut k)?);
                if k != toks.len() {
                    return Err(AppError::Format("unexpected tokens in the objective".into()));
                }
            }
            Section::Rows => {
                let mut anon = 0;
                while k < toks.len() {
                    let name = match (toks.get(k), toks.get(k + 1)) {
                        (Some(Tok::Name(n)), Some(Tok::Colon)) => {
                            k += 2;
                            n.clone()
                        }
                        _ => {
                            anon += 1;
                            format!("r{anon}")
                        }
                    };
                    let terms = expression(&mut r, &toks, &mut k)?;
                    let rel = match toks.get(k) {
                        Some(Tok::Rel(rel)) => *rel,
                        t => return Err(AppError::Format(format!("row {name}: expected a relation, found {t:?}"))),
                    };
                    k += 1;
                    let rhs = signed_value(&toks, &mut k)
                        .ok_or_else(|| AppError::Format(format!("row {name}: expected a right-hand side")))?;
                    let terms = terms.into_iter().map(|(j, a)| (VarId(j), a));
                    r.lp.constraints.push(Constraint::new(name, terms, rel, rhs));
                }
            }
            Section::Bounds => {
                for line in body.lines() {
                    bound_line(&mut r, &tokenize(line)?, line)?;
                }
            }
            Section::Binaries => {
                for t in toks {
                    match t {
                        Tok::Name(n) => {
                            let j = r.var(&n);
                            r.lp.lower[j] = 0.0;
                            r.lp.upper[j] = 1.0;
                            r.binaries.push(j);
                        }
                        t => return Err(AppError::Format(format!("unexpected {t:?} among binaries"))),
                    }
                }
            }
        }
    }
    for (j, c) in objective {
        r.lp.objective[j] += c;
    }
    r.lp.validate()?;
    Ok(if r.binaries.is_empty() {
        Problem::Lp(r.lp)
    } else {
        Problem::Milp(MilpProgram { base: r.lp, binaries: r.binaries })
    })
}

fn bound_line(r: &mut Reader, toks: &[Tok], line: &str) -> Result<()> {
    let bad = || AppError::Format(format!("cannot read bound '{}'", line.trim()));
    match toks {
        [] => Ok(()),
        [Tok::Name(n), Tok::Name(f)] if f.eq_ignore_ascii_case("free") => {
            let j = r.var(n);
            r.lp.lower[j] = f64::NEG_INFINITY;
            r.lp.upper[j] = f64::INFINITY;
            Ok(())
        }
        _ => {
            // value rel name [rel value]  |  name rel value
            let mut k = 0;
            if let Some(v) = signed_value(toks, &mut k) {
                let Some(Tok::Rel(r1)) = toks.get(k) else { return Err(bad()) };
                let Some(Tok::Name(n)) = toks.get(k + 1) else { return Err(bad()) };
                let j = r.var(n);
                set_bound(r, j, flip(*r1), v);
                k += 2;
                if k < toks.len() {
                    let Some(Tok::Rel(r2)) = toks.get(k) else { return Err(bad()) };
                    k += 1;
                    let u = signed_value(toks, &mut k).ok_or_else(bad)?;
                    set_bound(r, j, *r2, u);
                }
                (k == toks.len()).then_some(()).ok_or_else(bad)
            } else if let [Tok::Name(n), Tok::Rel(rel), ..] = toks {
                let j = r.var(n);
                k = 2;
                let v = signed_value(toks, &mut k).ok_or_else(bad)?;
                set_bound(r, j, *rel, v);
                (k == toks.len()).then_some(()).ok_or_else(bad)
            } else {
                Err(bad())
            }
        }
    }
}

fn flip(r: Relation) -> Relation {
    match r {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        Relation::Eq => Relation::Eq,
    }
}

/// Applies `x rel v`.
fn set_bound(r: &mut Reader, j: usize, rel: Relation, v: f64) {
    match rel {
        Relation::Le => r.lp.upper[j] = v,
        Relation::Ge => r.lp.lower[j] = v,
        Relation::Eq => {
            r.lp.lower[j] = v;
            r.lp.upper[j] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MilpProgram {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 5.0, 1.0 / 3.0);
        let y = lp.add_var("y", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let z = lp.add_var("2bad name", -1.5, f64::INFINITY, -2.0);
        lp.add_constraint("cap", [(x, 1.0), (y, 0.1)], Relation::Le, 4.0);
        lp.add_constraint("cap", [(y, -1.0), (z, 1e-300)], Relation::Ge, -7.25);
        lp.add_constraint("", [(x, 2.0)], Relation::Eq, 1.0);
        let mut m = MilpProgram::new(lp);
        let b = m.add_binary("b", 0.7);
        m.base.add_constraint("link", [(x, 1.0), (b, -5.0)], Relation::Le, 0.0);
        m
    }

    #[test]
    fn round_trip_keeps_every_coefficient() {
        let m = sample();
        let text = write_problem(&Problem::Milp(m.clone()));
        let Problem::Milp(back) = parse_lp(&text).unwrap() else { panic!("expected a MILP") };
        assert_eq!(back.base.objective, m.base.objective);
        assert_eq!(back.base.lower, m.base.lower);
        assert_eq!(back.base.upper, m.base.upper);
        assert_eq!(back.binaries, m.binaries);
        for (a, b) in back.base.constraints.iter().zip(&m.base.constraints) {
            assert_eq!((&a.terms, a.relation, a.rhs), (&b.terms, b.relation, b.rhs));
        }
        // legal unique names survive, the rest are replaced
        assert_eq!(back.base.names[0], "x");
        assert_eq!(back.base.names[2], "v2");
        assert_eq!(back.base.constraints[0].name, "cap");
        assert_eq!(back.base.constraints[1].name, "r1");
    }

    #[test]
    fn reads_hand_written_files() {
        let text = "\\ toy\nMINIMIZE\n cost: 2 a + 3b\n - c\nsubject to\n c1: a + b >= 2\n -a + c <= 1\nbounds\n c <= 4\n 1 <= b\n a = 0.5\nEND\n";
        let Problem::Lp(lp) = parse_lp(text).unwrap() else { panic!("expected an LP") };
        assert_eq!(lp.sense, Sense::Minimize);
        assert_eq!(lp.objective, [2.0, 3.0, -1.0]);
        assert_eq!(lp.constraints[1].terms, [(0, -1.0), (2, 1.0)]);
        assert_eq!(lp.constraints[1].name, "r1");
        assert_eq!((lp.lower[2], lp.upper[2]), (0.0, 4.0));
        assert_eq!((lp.lower[1], lp.upper[1]), (1.0, f64::INFINITY));
        assert_eq!((lp.lower[0], lp.upper[0]), (0.5, 0.5));
    }

    #[test]
    fn rejects_general_integers_and_missing_end() {
        assert!(parse_lp("Maximize\n x\nGenerals\n x\nEnd\n").is_err());
        assert!(parse_lp("Maximize\n x\nSubject To\n c: x <= 1\n").is_err());
    }
}
