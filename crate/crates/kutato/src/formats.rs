//! Plain-text file formats: network files (`.bn`), case files (CSV), and
//! learning traces (TSV).
//!
//! Network files are line oriented. `#` starts a comment, sections must
//! appear as vars, then parents, then cpts, and within a section line order
//! is free:
//!
//! ```text
//! network sprinkler
//! var rain f t
//! var wet f t
//! parents wet rain
//! cpt rain : 0.8 0.2
//! cpt wet | rain=f : 0.95 0.05
//! cpt wet | rain=t : 0.1 0.9
//! ```
//!
//! Variable names and value labels are whitespace-free tokens. Probabilities
//! are decimal literals whose rows must sum to 1 within 1e-6; they are
//! written back with full precision so that a write/read round trip is
//! exact.
//!
//! Case files are CSV with a header of variable names, one row per case,
//! `?` for a missing cell, and an optional trailing `__weight` column.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::learner::LearnTrace;
use crate::model::{
    config_from_index, BeliefNetwork, CaseDatabase, Cpt, ValidationReport, Variable,
};

/// Column name reserved for per-row weights in case files.
pub const WEIGHT_COLUMN: &str = "__weight";
/// Cell marker for a missing value in case files.
pub const MISSING_MARKER: &str = "?";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Validation(#[from] ValidationReport),
    #[error("token {token:?} cannot be written (whitespace or reserved characters)")]
    Token { token: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Network files
// ---------------------------------------------------------------------------

#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Section {
    Preamble,
    Vars,
    Parents,
    Cpts,
}

pub fn parse_network(text: &str) -> Result<BeliefNetwork, FormatError> {
    let mut name: Option<String> = None;
    let mut variables: Vec<Variable> = Vec::new();
    let mut parents: Vec<Vec<usize>> = Vec::new();
    let mut parents_seen: Vec<bool> = Vec::new();
    let mut cpt_rows: Vec<Vec<Option<Vec<f64>>>> = Vec::new();
    let mut section = Section::Preamble;

    let var_index = |variables: &[Variable], token: &str, line: usize| {
        variables
            .iter()
            .position(|v| v.name() == token)
            .ok_or_else(|| parse_err(line, format!("unknown variable {token:?}")))
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "network" => {
                if name.is_some() {
                    return Err(parse_err(line, "duplicate network line"));
                }
                if section > Section::Preamble {
                    return Err(parse_err(line, "network line must come first"));
                }
                if tokens.len() < 2 {
                    return Err(parse_err(line, "network line needs a name"));
                }
                name = Some(tokens[1..].join(" "));
            }
            "var" => {
                if name.is_none() {
                    return Err(parse_err(line, "var before network line"));
                }
                if section > Section::Vars {
                    return Err(parse_err(line, "var lines must precede parents and cpt lines"));
                }
                section = Section::Vars;
                if tokens.len() < 3 {
                    return Err(parse_err(line, "var needs a name and at least one value"));
                }
                if variables.iter().any(|v| v.name() == tokens[1]) {
                    return Err(parse_err(line, format!("duplicate variable {:?}", tokens[1])));
                }
                variables.push(Variable::new(tokens[1], tokens[2..].iter().copied()));
                parents.push(Vec::new());
                parents_seen.push(false);
                cpt_rows.push(Vec::new());
            }
            "parents" => {
                if section > Section::Parents {
                    return Err(parse_err(line, "parents lines must precede cpt lines"));
                }
                section = Section::Parents;
                if tokens.len() < 2 {
                    return Err(parse_err(line, "parents needs a variable name"));
                }
                let child = var_index(&variables, tokens[1], line)?;
                if parents_seen[child] {
                    return Err(parse_err(
                        line,
                        format!("duplicate parents line for {:?}", tokens[1]),
                    ));
                }
                parents_seen[child] = true;
                for token in &tokens[2..] {
                    parents[child].push(var_index(&variables, token, line)?);
                }
            }
            "cpt" => {
                section = Section::Cpts;
                let colon = tokens
                    .iter()
                    .position(|&t| t == ":")
                    .ok_or_else(|| parse_err(line, "cpt line needs a ':'"))?;
                if colon < 2 {
                    return Err(parse_err(line, "cpt needs a variable name before ':'"));
                }
                let child = var_index(&variables, tokens[1], line)?;
                let ps = &parents[child];

                // Fix the row count on first sight of this variable's cpts.
                if cpt_rows[child].is_empty() {
                    let rows: usize = ps.iter().map(|&p| variables[p].arity()).product();
                    cpt_rows[child] = vec![None; rows];
                }

                let config = if colon == 2 {
                    if !ps.is_empty() {
                        return Err(parse_err(
                            line,
                            format!("cpt for {:?} needs parent conditions", tokens[1]),
                        ));
                    }
                    0
                } else {
                    if tokens[2] != "|" {
                        return Err(parse_err(line, "expected '|' after the variable name"));
                    }
                    let mut digits: Vec<Option<usize>> = vec![None; ps.len()];
                    for token in &tokens[3..colon] {
                        let (pname, label) = token.split_once('=').ok_or_else(|| {
                            parse_err(line, format!("condition {token:?} is not parent=label"))
                        })?;
                        let p = var_index(&variables, pname, line)?;
                        let slot = ps.iter().position(|&q| q == p).ok_or_else(|| {
                            parse_err(line, format!("{pname:?} is not a parent of {:?}", tokens[1]))
                        })?;
                        if digits[slot].is_some() {
                            return Err(parse_err(line, format!("parent {pname:?} repeated")));
                        }
                        let value = variables[p].value_index(label).ok_or_else(|| {
                            parse_err(line, format!("unknown value {label:?} for {pname:?}"))
                        })?;
                        digits[slot] = Some(value);
                    }
                    let mut config = 0usize;
                    for (slot, digit) in digits.iter().enumerate() {
                        let d = digit.ok_or_else(|| {
                            parse_err(
                                line,
                                format!(
                                    "condition for parent {:?} missing",
                                    variables[ps[slot]].name()
                                ),
                            )
                        })?;
                        config = config * variables[ps[slot]].arity() + d;
                    }
                    config
                };

                let mut probs = Vec::with_capacity(tokens.len() - colon - 1);
                for token in &tokens[colon + 1..] {
                    let p: f64 = token
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad probability {token:?}")))?;
                    probs.push(p);
                }
                if probs.len() != variables[child].arity() {
                    return Err(parse_err(
                        line,
                        format!(
                            "{} probabilities for {:?}, expected {}",
                            probs.len(),
                            tokens[1],
                            variables[child].arity()
                        ),
                    ));
                }
                if cpt_rows[child][config].is_some() {
                    return Err(parse_err(
                        line,
                        format!("duplicate cpt row for {:?}", tokens[1]),
                    ));
                }
                cpt_rows[child][config] = Some(probs);
            }
            other => {
                return Err(parse_err(line, format!("unknown directive {other:?}")));
            }
        }
    }

    let name = name.ok_or_else(|| parse_err(0, "missing network line"))?;
    let mut cpts = Vec::with_capacity(variables.len());
    for (x, rows) in cpt_rows.into_iter().enumerate() {
        let expected: usize = parents[x].iter().map(|&p| variables[p].arity()).product();
        if rows.is_empty() && expected > 0 && variables[x].arity() > 0 {
            return Err(parse_err(0, format!("no cpt for {:?}", variables[x].name())));
        }
        let mut table = Vec::with_capacity(rows.len());
        for (config, row) in rows.into_iter().enumerate() {
            match row {
                Some(r) => table.push(r),
                None => {
                    let arities: Vec<usize> =
                        parents[x].iter().map(|&p| variables[p].arity()).collect();
                    let digits = config_from_index(config, &arities);
                    let described: Vec<String> = parents[x]
                        .iter()
                        .zip(&digits)
                        .map(|(&p, &d)| {
                            format!("{}={}", variables[p].name(), variables[p].values()[d])
                        })
                        .collect();
                    return Err(parse_err(
                        0,
                        format!(
                            "missing cpt row for {:?} at {}",
                            variables[x].name(),
                            described.join(" ")
                        ),
                    ));
                }
            }
        }
        cpts.push(Cpt::new(table));
    }

    Ok(BeliefNetwork::new(name, variables, parents, cpts)?)
}

fn check_token(token: &str) -> Result<(), FormatError> {
    let reserved = token.is_empty()
        || token.chars().any(char::is_whitespace)
        || token.contains(':')
        || token.contains('|')
        || token.contains('#')
        || token == MISSING_MARKER;
    if reserved {
        return Err(FormatError::Token {
            token: token.to_string(),
        });
    }
    Ok(())
}

/// Serializes a network; the output parses back to an identical network.
pub fn write_network(net: &BeliefNetwork) -> Result<String, FormatError> {
    let mut out = String::new();
    writeln!(out, "network {}", net.name()).unwrap();
    for var in net.variables() {
        check_token(var.name())?;
        for label in var.values() {
            check_token(label)?;
        }
        writeln!(out, "var {} {}", var.name(), var.values().join(" ")).unwrap();
    }
    for x in 0..net.num_variables() {
        if net.parents(x).is_empty() {
            continue;
        }
        let names: Vec<&str> = net
            .parents(x)
            .iter()
            .map(|&p| net.variable(p).name())
            .collect();
        writeln!(out, "parents {} {}", net.variable(x).name(), names.join(" ")).unwrap();
    }
    for x in 0..net.num_variables() {
        let ps = net.parents(x);
        let arities: Vec<usize> = ps.iter().map(|&p| net.arity(p)).collect();
        for (config, row) in net.cpt(x).rows().iter().enumerate() {
            let probs: Vec<String> = row.iter().map(f64::to_string).collect();
            if ps.is_empty() {
                writeln!(out, "cpt {} : {}", net.variable(x).name(), probs.join(" ")).unwrap();
            } else {
                let digits = config_from_index(config, &arities);
                let conds: Vec<String> = ps
                    .iter()
                    .zip(&digits)
                    .map(|(&p, &d)| {
                        format!("{}={}", net.variable(p).name(), net.variable(p).values()[d])
                    })
                    .collect();
                writeln!(
                    out,
                    "cpt {} | {} : {}",
                    net.variable(x).name(),
                    conds.join(" "),
                    probs.join(" ")
                )
                .unwrap();
            }
        }
    }
    Ok(out)
}

pub fn read_network(path: impl AsRef<Path>) -> Result<BeliefNetwork, FormatError> {
    parse_network(&std::fs::read_to_string(path)?)
}

pub fn write_network_file(path: impl AsRef<Path>, net: &BeliefNetwork) -> Result<(), FormatError> {
    let text = write_network(net)?;
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Case files
// ---------------------------------------------------------------------------

/// Reads a case CSV, collecting each column's vocabulary in order of first
/// appearance. `?` cells are missing; a trailing `__weight` column carries
/// nonnegative row weights.
pub fn parse_cases(text: &str) -> Result<CaseDatabase, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let mut names: Vec<String> = headers.iter().map(str::to_string).collect();
    let weighted = names.last().map(String::as_str) == Some(WEIGHT_COLUMN);
    if weighted {
        names.pop();
    }
    if names.is_empty() {
        return Err(parse_err(1, "case file has no variable columns"));
    }
    for (k, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(parse_err(1, format!("empty variable name in column {k}")));
        }
        if names[..k].contains(name) {
            return Err(parse_err(1, format!("duplicate column {name:?}")));
        }
    }

    let mut vocabularies: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    let mut rows: Vec<Vec<Option<usize>>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let expected = names.len() + usize::from(weighted);
        if record.len() != expected {
            return Err(parse_err(
                line,
                format!("{} cells, expected {expected}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(names.len());
        for (v, cell) in record.iter().take(names.len()).enumerate() {
            if cell == MISSING_MARKER {
                row.push(None);
            } else {
                let idx = match vocabularies[v].iter().position(|l| l == cell) {
                    Some(idx) => idx,
                    None => {
                        vocabularies[v].push(cell.to_string());
                        vocabularies[v].len() - 1
                    }
                };
                row.push(Some(idx));
            }
        }
        let weight = if weighted {
            let cell = &record[names.len()];
            let w: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("bad weight {cell:?}")))?;
            if !(w >= 0.0) || !w.is_finite() {
                return Err(parse_err(line, format!("negative weight {cell:?}")));
            }
            w
        } else {
            1.0
        };
        rows.push(row);
        weights.push(weight);
    }

    let variables: Vec<Variable> = names
        .into_iter()
        .zip(vocabularies)
        .map(|(name, vocab)| Variable::new(name, vocab))
        .collect();
    Ok(CaseDatabase::new(variables, rows, weights)?)
}

/// Serializes a database as CSV. The weight column is emitted only when
/// some row weight differs from one.
pub fn write_cases(db: &CaseDatabase) -> Result<String, FormatError> {
    for var in db.variables() {
        for label in var.values() {
            if label == MISSING_MARKER {
                return Err(FormatError::Token {
                    token: label.clone(),
                });
            }
        }
    }
    let weighted = db.weights().iter().any(|&w| w != 1.0);
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = db.variables().iter().map(|v| v.name().to_string()).collect();
    if weighted {
        header.push(WEIGHT_COLUMN.to_string());
    }
    writer.write_record(&header)?;
    for r in 0..db.num_rows() {
        let mut record: Vec<String> = db
            .row(r)
            .iter()
            .enumerate()
            .map(|(v, cell)| match cell {
                Some(idx) => db.variables()[v].values()[*idx].clone(),
                None => MISSING_MARKER.to_string(),
            })
            .collect();
        if weighted {
            record.push(db.weight(r).to_string());
        }
        writer.write_record(&record)?;
    }
    let bytes = writer.into_inner().expect("in-memory csv flush");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_cases(path: impl AsRef<Path>) -> Result<CaseDatabase, FormatError> {
    parse_cases(&std::fs::read_to_string(path)?)
}

pub fn write_cases_file(path: impl AsRef<Path>, db: &CaseDatabase) -> Result<(), FormatError> {
    let text = write_cases(db)?;
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Trace files
// ---------------------------------------------------------------------------

/// Renders a learning trace as TSV: one row per accepted arc, a final
/// comment line with the halt reason, all numbers with six decimals.
pub fn write_trace(trace: &LearnTrace, variables: &[Variable]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "step\tfrom\tto\tdelta_h\tdf\tstatistic\tp_value\tentropy_after"
    )
    .unwrap();
    for step in &trace.steps {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}\t{:.6}\t{:.6}\t{:.6}",
            step.step,
            variables[step.eval.from].name(),
            variables[step.eval.to].name(),
            step.eval.delta_h,
            step.eval.df,
            step.eval.statistic,
            step.eval.p_value,
            step.entropy_after,
        )
        .unwrap();
    }
    writeln!(out, "# halt: {}", trace.halt_reason).unwrap();
    out
}

pub fn write_trace_file(
    path: impl AsRef<Path>,
    trace: &LearnTrace,
    variables: &[Variable],
) -> Result<(), FormatError> {
    std::fs::write(path, write_trace(trace, variables))?;
    Ok(())
}
