//! PACE 2017 `.td` files: `s td <#bags> <max-bag-size> <#vertices>`, then
//! `b <id> <v…>` lines and `<id> <id>` tree edges, all 1-indexed. Lines
//! starting with `c` are comments.

use std::fmt::Write as _;

use super::{ModelError, TreeDecomposition};

pub fn write_pace_td(td: &TreeDecomposition) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "s td {} {} {}",
        td.bag_count(),
        td.max_bag_size(),
        td.vertex_count()
    );
    for (id, bag) in td.bags().iter().enumerate() {
        let _ = write!(out, "b {}", id + 1);
        for v in bag {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    for &(a, b) in td.edges() {
        let _ = writeln!(out, "{} {}", a + 1, b + 1);
    }
    out
}

pub fn parse_pace_td(text: &str) -> Result<TreeDecomposition, ModelError> {
    let err = |line: usize, message: &str| ModelError::Parse {
        line,
        message: message.to_string(),
    };
    let mut header: Option<(usize, usize)> = None;
    let mut bags: Vec<Option<Vec<usize>>> = Vec::new();
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(first) = tokens.next() else { continue };
        match first {
            "c" => continue,
            "s" => {
                if header.is_some() {
                    return Err(err(line, "duplicate solution line"));
                }
                if tokens.next() != Some("td") {
                    return Err(err(line, "expected `s td`"));
                }
                let nums = parse_usizes(tokens, line)?;
                let [n_bags, _max_bag, n_vertices] = nums[..] else {
                    return Err(err(line, "expected `s td <bags> <max-bag> <vertices>`"));
                };
                header = Some((n_bags, n_vertices));
                bags = vec![None; n_bags];
            }
            "b" => {
                let Some((_, n_vertices)) = header else {
                    return Err(err(line, "bag before solution line"));
                };
                let nums = parse_usizes(tokens, line)?;
                let Some((&id, members)) = nums.split_first() else {
                    return Err(err(line, "bag line without id"));
                };
                if id == 0 || id > bags.len() {
                    return Err(err(line, "bag id out of range"));
                }
                if bags[id - 1].is_some() {
                    return Err(err(line, "duplicate bag id"));
                }
                let mut bag = Vec::with_capacity(members.len());
                for &v in members {
                    if v == 0 || v > n_vertices {
                        return Err(err(line, "vertex out of range"));
                    }
                    bag.push(v - 1);
                }
                bags[id - 1] = Some(bag);
            }
            _ => {
                if header.is_none() {
                    return Err(err(line, "edge before solution line"));
                }
                let nums = parse_usizes(std::iter::once(first).chain(tokens), line)?;
                let [a, b] = nums[..] else {
                    return Err(err(line, "tree edge needs two bag ids"));
                };
                if a == 0 || b == 0 || a > bags.len() || b > bags.len() {
                    return Err(err(line, "tree edge references a missing bag"));
                }
                edges.push((a - 1, b - 1));
            }
        }
    }
    let Some((_, n_vertices)) = header else {
        return Err(err(0, "missing `s td` line"));
    };
    let bags = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| err(0, &format!("bag {} missing", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    TreeDecomposition::new(n_vertices, bags, edges)
}

fn parse_usizes<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<Vec<usize>, ModelError> {
    tokens
        .map(|t| {
            t.parse::<usize>().map_err(|_| ModelError::Parse {
                line,
                message: format!("invalid integer `{t}`"),
            })
        })
        .collect()
}
