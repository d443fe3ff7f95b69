//! Jaakkola / BLIP `.jkl` score files: first line `n`, then for every
//! variable a line `<var> <#sets>` followed by `<score> <k> <p1> … <pk>`
//! lines. Vertices are 0-indexed.

use std::fmt::Write as _;

use super::{prune, ParentSetScore, ScoreCache, ScoreError};

/// Variables ascending, sets by descending score.
pub fn write_jkl(cache: &ScoreCache) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", cache.var_count());
    for v in 0..cache.var_count() {
        let entries = cache.entries(v);
        let _ = writeln!(out, "{v} {}", entries.len());
        for e in entries {
            let _ = write!(out, "{} {}", e.score, e.parents.len());
            for p in &e.parents {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
    }
    out
}

/// Reads a cache in any variable order and prunes it.
pub fn parse_jkl(text: &str) -> Result<ScoreCache, ScoreError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let bad = |line: usize, msg: &str| ScoreError::Format {
        line,
        message: msg.to_string(),
    };
    let (line, first) = lines.next().ok_or_else(|| bad(0, "empty score file"))?;
    let n: usize = first
        .parse()
        .map_err(|_| bad(line, "expected variable count"))?;
    let mut raw: Vec<Option<Vec<ParentSetScore>>> = vec![None; n];
    while let Some((line, header)) = lines.next() {
        let mut t = header.split_whitespace();
        let (Some(var), Some(count), None) = (t.next(), t.next(), t.next()) else {
            return Err(bad(line, "expected `<var> <#sets>`"));
        };
        let var: usize = var.parse().map_err(|_| bad(line, "invalid variable id"))?;
        let count: usize = count.parse().map_err(|_| bad(line, "invalid set count"))?;
        if var >= n {
            return Err(bad(line, "variable id out of range"));
        }
        if raw[var].is_some() {
            return Err(bad(line, "variable listed twice"));
        }
        let mut sets = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, l) = lines
                .next()
                .ok_or_else(|| bad(line, "file ends inside a variable block"))?;
            let mut t = l.split_whitespace();
            let score: f64 = t
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(line, "invalid score"))?;
            let k: usize = t
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(line, "invalid parent count"))?;
            let parents = t
                .map(|s| s.parse::<usize>().map_err(|_| bad(line, "invalid parent id")))
                .collect::<Result<Vec<_>, _>>()?;
            if parents.len() != k {
                return Err(bad(line, "parent count does not match listed parents"));
            }
            sets.push(ParentSetScore::new(parents, score));
        }
        raw[var] = Some(sets);
    }
    let raw = raw
        .into_iter()
        .enumerate()
        .map(|(v, s)| s.ok_or(ScoreError::MissingEmptySet(v)))
        .collect::<Result<Vec<_>, _>>()?;
    prune(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_variables_in_any_order() {
        let text = "2\n1 2\n-3.5 1 0\n-4 0\n0 1\n-2.25 0\n";
        let c = parse_jkl(text).unwrap();
        assert_eq!(c.score(1, &[0]), Some(-3.5));
        assert_eq!(c.empty_score(0), -2.25);
        assert_eq!(write_jkl(&c), "2\n0 1\n-2.25 0\n1 2\n-3.5 1 0\n-4 0\n");
    }

    #[test]
    fn round_trips_exactly() {
        let text = "3\n0 1\n-10.123456789012345 0\n1 2\n-1.5 2 0 2\n-7 0\n2 1\n-0.1 0\n";
        let c = parse_jkl(text).unwrap();
        assert_eq!(parse_jkl(&write_jkl(&c)).unwrap(), c);
    }

    #[test]
    fn rejects_broken_files() {
        assert!(parse_jkl("").is_err());
        assert!(parse_jkl("1\n0 2\n-1 0\n").is_err());
        assert!(parse_jkl("1\n0 1\n-1 1\n").is_err());
        assert!(parse_jkl("2\n0 1\n-1 0\n").is_err());
        assert!(parse_jkl("1\n3 1\n-1 0\n").is_err());
    }
}
