//! Plain-text polytope files: a `dim d` header, one vertex per line,
//! optional `ray` lines. `#` starts a comment.

use super::linalg::{fmt_rat, parse_rat, Int, QVec, ZVec};
use super::{convex_hull, GeometryError, LatticeSpace, Polyhedron, Side};

pub fn parse_polytope(src: &str, side: Side) -> Result<Polyhedron, GeometryError> {
    let (d, pts, rays) = parse_generators(src)?;
    convex_hull(LatticeSpace::new(d, side), &pts, &rays)
}

pub fn parse_generators(src: &str) -> Result<(usize, Vec<QVec>, Vec<ZVec>), GeometryError> {
    let err = |l: usize, m: &str| GeometryError::Parse(format!("line {}: {}", l + 1, m));
    let mut dim = None;
    let mut pts = Vec::new();
    let mut rays = Vec::new();
    for (l, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace().peekable();
        if toks.peek() == Some(&"dim") {
            toks.next();
            let d = toks.next().and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| err(l, "bad dim"))?;
            dim = Some(d);
            continue;
        }
        let d = dim.ok_or_else(|| err(l, "missing dim header"))?;
        let is_ray = toks.peek() == Some(&"ray");
        if is_ray {
            toks.next();
        }
        let coords: Vec<&str> = toks.collect();
        if coords.len() != d {
            return Err(err(l, &format!("expected {} coordinates", d)));
        }
        if is_ray {
            let r: Option<ZVec> = coords.iter().map(|t| t.parse::<Int>().ok()).collect();
            rays.push(r.ok_or_else(|| err(l, "ray entries must be integers"))?);
        } else {
            let p: Option<QVec> = coords.iter().map(|t| parse_rat(t)).collect();
            pts.push(p.ok_or_else(|| err(l, "bad coordinate"))?);
        }
    }
    let d = dim.ok_or(GeometryError::Parse("missing dim header".into()))?;
    if pts.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    Ok((d, pts, rays))
}

pub fn write_polytope(p: &Polyhedron) -> String {
    let mut s = format!("dim {}\n", p.space.rank);
    for v in &p.vertices {
        s += &v.iter().map(fmt_rat).collect::<Vec<_>>().join(" ");
        s.push('\n');
    }
    for r in &p.rays {
        s += "ray ";
        s += &r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_rational_and_ray() {
        let src = "dim 2\n0 0\n1/2 0\nray 0 1\n";
        let p = parse_polytope(src, Side::M).unwrap();
        let again = parse_polytope(&write_polytope(&p), Side::M).unwrap();
        assert_eq!(p, again);
        assert_eq!(write_polytope(&p), src);
    }

    #[test]
    fn rejects_wrong_arity() {
        assert!(parse_polytope("dim 2\n1 2 3\n", Side::M).is_err());
    }
}
