//! MILP-TXT v1: a small line-oriented LP-style format.
//!
//! ```text
//! # comment
//! minimize
//! obj: 3 x + 2 y
//! subject to
//! c1: 2 x + 3 y <= 6
//! bounds
//! 0 <= x <= 4
//! integers
//! x
//! end
//! ```
//!
//! `<=` rows are negated and `=` rows split into `name_ge`/`name_le` on
//! reading, so every stored row has sense `>=`. Writing emits only `>=` rows,
//! every variable in the objective (zero coefficients included, which fixes
//! column order), and explicit bounds for every variable.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Milp, MilpBuilder, MilpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Objective,
    Constraints,
    Bounds,
    Integers,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sense {
    Le,
    Ge,
    Eq,
}

struct Vars {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl Vars {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

fn perr(line: usize, message: impl Into<String>) -> MilpError {
    MilpError::Parse {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64, MilpError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("expected a number, found `{tok}`")))?;
    if v.is_nan() {
        return Err(perr(line, "NaN is not a valid coefficient"));
    }
    Ok(v)
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok()
}

/// Names start with a letter or `_`; later characters may also be digits
/// or one of `_.[]`.
fn valid_name(tok: &str) -> bool {
    let mut chars = tok.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '[' | ']'))
}

/// Parses `[sign] coeff var [sign coeff var ...]` into column terms.
fn linear_terms(
    tokens: &[&str],
    vars: &mut Vars,
    line: usize,
) -> Result<Vec<(usize, f64)>, MilpError> {
    let mut terms = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut sign = 1.0;
        let first = tokens[i];
        // A sign glued to a variable, as in `-x1`.
        if let Some(var) = first.strip_prefix('-').or_else(|| first.strip_prefix('+')) {
            if valid_name(var) {
                let sign = if first.starts_with('-') { -1.0 } else { 1.0 };
                terms.push((vars.get(var), sign));
                i += 1;
                continue;
            }
        }
        if matches!(first, "+" | "-") {
            if first == "-" {
                sign = -1.0;
            }
            i += 1;
        } else if !terms.is_empty() {
            return Err(perr(line, format!("expected `+` or `-` before `{first}`")));
        }
        let tok = tokens
            .get(i)
            .ok_or_else(|| perr(line, "dangling sign at end of expression"))?;
        let coeff = if is_number(tok) {
            i += 1;
            number(tok, line)?
        } else {
            1.0
        };
        if !coeff.is_finite() {
            return Err(perr(line, "coefficients must be finite"));
        }
        let var = tokens
            .get(i)
            .ok_or_else(|| perr(line, "coefficient without a variable"))?;
        if !valid_name(var) {
            return Err(perr(line, format!("invalid variable name `{var}`")));
        }
        terms.push((vars.get(var), sign * coeff));
        i += 1;
    }
    Ok(terms)
}

/// Splits `name: rest` off a line; lines without a label get `default`.
fn split_label(text: &str, default: String, line: usize) -> Result<(String, &str), MilpError> {
    match text.split_once(':') {
        Some((label, rest)) => {
            let label = label.trim();
            if !valid_name(label) {
                return Err(perr(line, format!("invalid label `{label}`")));
            }
            Ok((label.to_string(), rest))
        }
        None => Ok((default, text)),
    }
}

/// Parses MILP-TXT text into a model called `name`.
pub fn parse_milp(text: &str, name: &str) -> Result<Milp, MilpError> {
    let mut vars = Vars {
        index: HashMap::new(),
        names: Vec::new(),
    };
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut rows: Vec<(String, Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    let mut bounds: Vec<(usize, f64, f64, usize)> = Vec::new();
    let mut integers: Vec<(usize, usize)> = Vec::new();
    let mut section = Section::Start;
    let mut seen_objective = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let lower = content.to_ascii_lowercase();
        let header = match lower.as_str() {
            "minimize" => Some(Section::Objective),
            "subject to" => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "integers" => Some(Section::Integers),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(next) = header {
            if section == Section::End {
                return Err(perr(line, "content after `end`"));
            }
            if next != Section::End && next as u8 <= section as u8 {
                return Err(perr(line, format!("section `{content}` out of order")));
            }
            if next != Section::Objective && section == Section::Start {
                return Err(perr(line, "file must start with `minimize`"));
            }
            section = next;
            continue;
        }
        match section {
            Section::Start => return Err(perr(line, "expected `minimize`")),
            Section::End => return Err(perr(line, "content after `end`")),
            Section::Objective => {
                if seen_objective {
                    return Err(perr(line, "objective already given"));
                }
                seen_objective = true;
                let (_, body) = split_label(content, "obj".into(), line)?;
                let tokens: Vec<&str> = body.split_whitespace().collect();
                objective = linear_terms(&tokens, &mut vars, line)?;
            }
            Section::Constraints => {
                let (label, body) = split_label(content, format!("r{}", rows.len()), line)?;
                let tokens: Vec<&str> = body.split_whitespace().collect();
                let pos = tokens
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "="))
                    .ok_or_else(|| perr(line, "constraint without `<=`, `>=` or `=`"))?;
                let sense = match tokens[pos] {
                    "<=" => Sense::Le,
                    ">=" => Sense::Ge,
                    _ => Sense::Eq,
                };
                if tokens.len() != pos + 2 {
                    return Err(perr(line, "expected exactly one right-hand side after the sense"));
                }
                let rhs = number(tokens[pos + 1], line)?;
                if !rhs.is_finite() {
                    return Err(perr(line, "right-hand side must be finite"));
                }
                let terms = linear_terms(&tokens[..pos], &mut vars, line)?;
                rows.push((label, terms, sense, rhs));
            }
            Section::Bounds => {
                let tokens: Vec<&str> = content.split_whitespace().collect();
                let (var, lo, hi) = match tokens.as_slice() {
                    [lo, "<=", v, "<=", hi] => (*v, number(lo, line)?, number(hi, line)?),
                    [v, ">=", lo] => (*v, number(lo, line)?, f64::INFINITY),
                    [v, "<=", hi] => (*v, 0.0, number(hi, line)?),
                    [v, "=", val] => (*v, number(val, line)?, number(val, line)?),
                    [v, "free"] => (*v, f64::NEG_INFINITY, f64::INFINITY),
                    _ => return Err(perr(line, "expected `lo <= var <= hi`")),
                };
                if !valid_name(var) {
                    return Err(perr(line, format!("invalid variable name `{var}`")));
                }
                if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                    return Err(perr(line, format!("empty bound interval [{lo}, {hi}]")));
                }
                bounds.push((vars.get(var), lo, hi, line));
            }
            Section::Integers => {
                for v in content.split_whitespace() {
                    if !valid_name(v) {
                        return Err(perr(line, format!("invalid variable name `{v}`")));
                    }
                    integers.push((vars.get(v), line));
                }
            }
        }
    }
    if section != Section::End {
        return Err(perr(text.lines().count().max(1), "missing `end`"));
    }
    if !seen_objective {
        return Err(perr(1, "missing objective line"));
    }

    let n = vars.names.len();
    let mut cost = vec![0.0; n];
    for (j, c) in objective {
        cost[j] += c;
    }
    let mut lo = vec![0.0; n];
    let mut hi = vec![f64::INFINITY; n];
    for (j, l, h, _) in bounds {
        lo[j] = l;
        hi[j] = h;
    }
    let mut int = vec![false; n];
    for (j, line) in integers {
        if !(lo[j].is_finite() && hi[j].is_finite()) {
            return Err(perr(
                line,
                format!("integer variable `{}` has infinite bounds", vars.names[j]),
            ));
        }
        int[j] = true;
    }

    let mut b = MilpBuilder::new();
    for j in 0..n {
        b.add_var(vars.names[j].clone(), lo[j], hi[j], int[j], cost[j]);
    }
    for (label, terms, sense, rhs) in rows {
        match sense {
            Sense::Ge => b.add_ge(label, &terms, rhs),
            Sense::Le => b.add_le(label, &terms, rhs),
            Sense::Eq => b.add_eq(&label, &terms, rhs),
        }
    }
    b.build(name)
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    for (k, (coeff, var)) in terms.enumerate() {
        if k == 0 {
            let _ = write!(out, " {coeff} {var}");
        } else if coeff.is_sign_negative() {
            let _ = write!(out, " - {} {var}", -coeff);
        } else {
            let _ = write!(out, " + {coeff} {var}");
        }
    }
}

/// Renders a model as MILP-TXT.
pub fn to_milp_txt(m: &Milp) -> String {
    let mut out = String::new();
    out.push_str("# MILP-TXT v1\n");
    let _ = writeln!(out, "# {}: {} variables, {} rows", m.name, m.num_vars(), m.num_rows());
    out.push_str("minimize\nobj:");
    write_terms(
        &mut out,
        m.lp.objective.iter().zip(&m.var_names).map(|(c, v)| (*c, v.clone())),
    );
    out.push_str("\nsubject to\n");
    for (i, row) in m.lp.matrix.iter().enumerate() {
        let _ = write!(out, "{}:", m.row_names[i]);
        let nz: Vec<(f64, String)> = row
            .iter()
            .zip(&m.var_names)
            .filter(|(a, _)| **a != 0.0)
            .map(|(a, v)| (*a, v.clone()))
            .collect();
        if nz.is_empty() {
            let _ = write!(out, " 0 {}", m.var_names[0]);
        } else {
            write_terms(&mut out, nz.into_iter());
        }
        let _ = writeln!(out, " >= {}", m.lp.rhs[i]);
    }
    out.push_str("bounds\n");
    for j in 0..m.num_vars() {
        let _ = writeln!(out, "{} <= {} <= {}", m.lp.lower[j], m.var_names[j], m.lp.upper[j]);
    }
    out.push_str("integers\n");
    let ints: Vec<&str> = m
        .var_names
        .iter()
        .zip(&m.integer_mask)
        .filter(|(_, i)| **i)
        .map(|(v, _)| v.as_str())
        .collect();
    for chunk in ints.chunks(16) {
        out.push_str(&chunk.join(" "));
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

/// Reads a MILP-TXT file; the model is named after the file stem.
pub fn read_instance(path: impl AsRef<Path>) -> Result<Milp, MilpError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MilpError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_milp(&text, &name)
}

pub fn write_instance(m: &Milp, path: impl AsRef<Path>) -> Result<(), MilpError> {
    let path = path.as_ref();
    std::fs::write(path, to_milp_txt(m)).map_err(|source| MilpError::Io {
        path: path.display().to_string(),
        source,
    })
}
