use std::fmt::Write as _;

use super::ScoreError;

/// Complete categorical data, stored column-wise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    arities: Vec<usize>,
    columns: Vec<Vec<u32>>,
    rows: usize,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        arities: Vec<usize>,
        rows: &[Vec<u32>],
    ) -> Result<Self, ScoreError> {
        let n = names.len();
        if arities.len() != n {
            return Err(ScoreError::InvalidData(format!(
                "{n} names but {} arities",
                arities.len()
            )));
        }
        if let Some(v) = arities.iter().position(|&r| r == 0) {
            return Err(ScoreError::InvalidData(format!("variable {v} has arity 0")));
        }
        if rows.is_empty() {
            return Err(ScoreError::InvalidData("dataset has no rows".into()));
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ScoreError::InvalidData(format!(
                    "row {i} has {} values, expected {n}",
                    row.len()
                )));
            }
            for (v, &x) in row.iter().enumerate() {
                if x as usize >= arities[v] {
                    return Err(ScoreError::InvalidData(format!(
                        "row {i}: value {x} of variable {v} exceeds arity {}",
                        arities[v]
                    )));
                }
                columns[v].push(x);
            }
        }
        Ok(Self {
            names,
            arities,
            columns,
            rows: rows.len(),
        })
    }

    /// Unnamed variables `x0, x1, …`.
    pub fn from_rows(arities: Vec<usize>, rows: &[Vec<u32>]) -> Result<Self, ScoreError> {
        let names = (0..arities.len()).map(|v| format!("x{v}")).collect();
        Self::new(names, arities, rows)
    }

    /// Line 1: names, line 2: arities, then one whitespace-separated row per
    /// sample.
    pub fn parse(text: &str) -> Result<Self, ScoreError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| ScoreError::InvalidData("empty data file".into()))?;
        let names: Vec<String> = header.split_whitespace().map(str::to_string).collect();
        let (idx, arity_line) = lines
            .next()
            .ok_or_else(|| ScoreError::InvalidData("missing arity line".into()))?;
        let arities = parse_numbers::<usize>(arity_line, idx + 1)?;
        let rows = lines
            .map(|(idx, l)| parse_numbers::<u32>(l, idx + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(names, arities, &rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = self.names.join(" ");
        out.push('\n');
        let arities: Vec<String> = self.arities.iter().map(usize::to_string).collect();
        out.push_str(&arities.join(" "));
        out.push('\n');
        for i in 0..self.rows {
            for v in 0..self.columns.len() {
                if v > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", self.columns[v][i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arity(&self, v: usize) -> usize {
        self.arities[v]
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn column(&self, v: usize) -> &[u32] {
        &self.columns[v]
    }
}

fn parse_numbers<T: std::str::FromStr>(line: &str, lineno: usize) -> Result<Vec<T>, ScoreError> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<T>().map_err(|_| {
                ScoreError::InvalidData(format!("line {lineno}: invalid value `{t}`"))
            })
        })
        .collect()
}
