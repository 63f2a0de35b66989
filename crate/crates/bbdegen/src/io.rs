//! Text formats for partitions and heights, and the embedded example corpus.

use std::fmt::Write as _;

use crate::geometry::linalg::*;
use crate::nef::{from_vertices, NefError, NefPartition};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown example {0}")]
    UnknownExample(String),
    #[error(transparent)]
    Nef(#[from] NefError),
}

fn perr(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line: line + 1, msg: msg.into() }
}

fn parse_ints(line: usize, s: &str) -> Result<ZVec, IoError> {
    s.split_whitespace()
        .map(|t| t.parse::<Int>().map_err(|_| perr(line, format!("bad integer {:?}", t))))
        .collect()
}

/// Vertex lists of delta and its parts, in the order they appear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionData {
    pub delta: Vec<ZVec>,
    pub parts: Vec<Vec<ZVec>>,
}

impl PartitionData {
    pub fn build(&self) -> Result<NefPartition, IoError> {
        Ok(from_vertices(&self.delta, &self.parts)?)
    }
}

/// Reads `delta` followed by one or more `part` sections of integer vertex lines.
pub fn parse_partition(src: &str) -> Result<PartitionData, IoError> {
    let mut delta: Option<Vec<ZVec>> = None;
    let mut parts: Vec<Vec<ZVec>> = Vec::new();
    let mut current: Option<&mut Vec<ZVec>> = None;
    let mut dim: Option<usize> = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "delta" => {
                if delta.is_some() {
                    return Err(perr(i, "second delta section"));
                }
                delta = Some(Vec::new());
                current = None;
            }
            "part" => {
                if delta.is_none() {
                    return Err(perr(i, "part before delta"));
                }
                parts.push(Vec::new());
                current = None;
            }
            _ => {
                let v = parse_ints(i, line)?;
                if *dim.get_or_insert(v.len()) != v.len() || v.is_empty() {
                    return Err(perr(i, "inconsistent dimension"));
                }
                let target = match current.take() {
                    Some(t) => t,
                    None => match parts.last_mut() {
                        Some(p) => p,
                        None => delta.as_mut().ok_or_else(|| perr(i, "vertex outside a section"))?,
                    },
                };
                target.push(v);
                current = Some(target);
            }
        }
    }
    let delta = delta.ok_or_else(|| perr(0, "missing delta section"))?;
    if delta.is_empty() || parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(perr(0, "empty section"));
    }
    Ok(PartitionData { delta, parts })
}

pub fn write_partition(np: &NefPartition) -> String {
    let mut out = String::from("delta\n");
    let line = |v: &QVec| v.iter().map(fmt_rat).collect::<Vec<_>>().join(" ");
    for v in &np.delta.vertices {
        let _ = writeln!(out, "{}", line(v));
    }
    for p in &np.parts {
        out.push_str("part\n");
        for v in &p.vertices {
            let _ = writeln!(out, "{}", line(v));
        }
    }
    out
}

/// One `ray n_1 ... n_k : value` entry.
pub type HeightEntry = (ZVec, Rat);

/// Heights for either side; a missing side means the anticanonical choice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeightFile {
    /// On rays in `N`, refining the normal fan of delta.
    pub h: Option<Vec<HeightEntry>>,
    /// On rays in `M`, refining the normal fan of nabla.
    pub check_h: Option<Vec<HeightEntry>>,
}

/// Lines are `ray n_1 ... n_k : value`, grouped under the section headers
/// `h` and `check_h`; lines before any header belong to `h`.
pub fn parse_heights(src: &str) -> Result<HeightFile, IoError> {
    let mut out = HeightFile::default();
    let mut current_is_h = true;
    let mut dim = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let section = if current_is_h { &mut out.h } else { &mut out.check_h };
        match line {
            "h" | "check_h" => {
                current_is_h = line == "h";
                let section = if current_is_h { &mut out.h } else { &mut out.check_h };
                if section.is_some() {
                    return Err(perr(i, format!("repeated section {}", line)));
                }
                *section = Some(Vec::new());
                continue;
            }
            _ => {}
        }
        let rest = line.strip_prefix("ray").ok_or_else(|| perr(i, "expected `ray`, `h` or `check_h`"))?;
        let (lhs, rhs) = rest.split_once(':').ok_or_else(|| perr(i, "expected `:`"))?;
        let v = parse_ints(i, lhs)?;
        let h = parse_rat(rhs.trim()).ok_or_else(|| perr(i, format!("bad value {:?}", rhs.trim())))?;
        if *dim.get_or_insert(v.len()) != v.len() {
            return Err(perr(i, "inconsistent dimension"));
        }
        section.get_or_insert_with(Vec::new).push((v, h));
    }
    Ok(out)
}

pub fn write_heights(file: &HeightFile) -> String {
    let mut out = String::new();
    for (name, entries) in [("h", &file.h), ("check_h", &file.check_h)] {
        let Some(entries) = entries else { continue };
        let _ = writeln!(out, "{}", name);
        for (v, h) in entries {
            let _ = writeln!(out, "ray {} : {}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "), fmt_rat(h));
        }
    }
    out
}

pub const EXAMPLES: &[&str] = &["quintic", "quadric", "schoen", "square", "cube"];

pub fn example_source(name: &str) -> Result<&'static str, IoError> {
    Ok(match name {
        "quintic" => include_str!("../data/quintic.nef"),
        "quadric" => include_str!("../data/quadric.nef"),
        "schoen" => include_str!("../data/schoen.nef"),
        "square" => include_str!("../data/square.nef"),
        "cube" => include_str!("../data/cube.nef"),
        _ => return Err(IoError::UnknownExample(name.into())),
    })
}

/// Shipped MPCP heights of a corpus example, if any.
pub fn mpcp_source(name: &str) -> Result<&'static str, IoError> {
    Ok(match name {
        "schoen" => include_str!("../data/schoen_mpcp.heights"),
        "cube" => include_str!("../data/cube_mpcp.heights"),
        _ => return Err(IoError::UnknownExample(format!("{} (no MPCP heights)", name))),
    })
}

pub fn mpcp_heights(name: &str) -> Result<HeightFile, IoError> {
    parse_heights(mpcp_source(name)?)
}

pub fn example(name: &str) -> Result<NefPartition, IoError> {
    parse_partition(example_source(name)?)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights_round_trip() {
        let e = vec![(zvec(&[1, 0, -2]), Rat::new(zi(3), zi(2))), (zvec(&[0, 0, 1]), qi(-4))];
        let f = HeightFile { h: None, check_h: Some(e.clone()) };
        assert_eq!(parse_heights(&write_heights(&f)).unwrap(), f);
        let bare = parse_heights("ray 1 0 -2 : 3/2\nray 0 0 1 : -4\n").unwrap();
        assert_eq!(bare.h, Some(e));
        assert!(parse_heights("check_h\nray 1 : 1\ncheck_h\n").is_err());
        assert!(parse_heights("ray 1 0 : 1\nray 1 : 1\n").is_err());
    }

    #[test]
    fn malformed_partition() {
        assert!(matches!(parse_partition("delta\n1 2\n1\n"), Err(IoError::Parse { line: 3, .. })));
        assert!(matches!(parse_partition("part\n1 2\n"), Err(IoError::Parse { .. })));
        assert!(matches!(parse_partition("delta\n1 x\n"), Err(IoError::Parse { .. })));
    }

    #[test]
    fn partition_round_trip() {
        let np = example("quadric").unwrap();
        let again = parse_partition(&write_partition(&np)).unwrap().build().unwrap();
        assert_eq!(again.delta, np.delta);
        assert_eq!(again.parts, np.parts);
    }
}
