//! Brute-force oracles written with plain machine integers, shared by the
//! randomized suites.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::OnceLock;

use bbdegen::complex::{transport, AffineComplex, ComplexSide};
use bbdegen::complex_basic::build_complex;
use bbdegen::complex_general::{GeneralSetup, HeightData};
use bbdegen::geometry::linalg::*;
use bbdegen::geometry::*;
use bbdegen::io::{example, mpcp_heights};

pub type Pt = Vec<i64>;

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut total = 0;
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let minor: Vec<Vec<i128>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
        let s = if j % 2 == 0 { 1 } else { -1 };
        total += s * m[0][j] * det_i128(&minor);
    }
    total
}

/// Rank by fraction-free elimination.
fn rank_i128(rows: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            let (a, b) = (m[r][c], m[i][c]);
            for k in 0..ncols {
                m[i][k] = m[i][k] * a - m[r][k] * b;
            }
            let g = m[i].iter().fold(0i128, |g, x| gcd(g, x.abs()));
            if g > 1 {
                m[i].iter_mut().for_each(|x| *x /= g);
            }
        }
        r += 1;
    }
    r
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn affine_dim(pts: &[&Pt]) -> isize {
    if pts.is_empty() {
        return -1;
    }
    let diffs: Vec<Vec<i128>> =
        pts[1..].iter().map(|p| p.iter().zip(pts[0]).map(|(a, b)| (*a - *b) as i128).collect()).collect();
    rank_i128(&diffs) as isize
}

/// All nonempty faces of a full-dimensional point configuration, as sets of
/// point indices: facets from every affinely independent `d`-subset whose
/// hyperplane leaves all points on one side, then intersections.
pub fn brute_faces(pts: &[Pt]) -> BTreeSet<BTreeSet<usize>> {
    let d = pts[0].len();
    let n = pts.len();
    let mut facets: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        let base = &pts[subset[0]];
        let diffs: Vec<Vec<i128>> =
            subset[1..].iter().map(|&i| pts[i].iter().zip(base).map(|(a, b)| (*a - *b) as i128).collect()).collect();
        // normal by cofactors of the (d-1) x d difference matrix
        let normal: Vec<i128> = (0..d)
            .map(|j| {
                let minor: Vec<Vec<i128>> =
                    diffs.iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
                if j % 2 == 0 {
                    det_i128(&minor)
                } else {
                    -det_i128(&minor)
                }
            })
            .collect();
        if normal.iter().any(|&x| x != 0) {
            let value = |p: &Pt| -> i128 { p.iter().zip(base).zip(&normal).map(|((a, b), c)| (*a - *b) as i128 * c).sum() };
            let vals: Vec<i128> = pts.iter().map(value).collect();
            if vals.iter().all(|&v| v >= 0) || vals.iter().all(|&v| v <= 0) {
                facets.insert((0..n).filter(|&i| vals[i] == 0).collect());
            }
        }
        // next d-subset
        let mut k = d;
        loop {
            if k == 0 {
                let mut faces: BTreeSet<BTreeSet<usize>> = facets.clone();
                faces.insert((0..n).collect());
                let mut frontier: Vec<BTreeSet<usize>> = facets.iter().cloned().collect();
                while let Some(f) = frontier.pop() {
                    for g in &facets {
                        let h: BTreeSet<usize> = f.intersection(g).copied().collect();
                        if !h.is_empty() && faces.insert(h.clone()) {
                            frontier.push(h);
                        }
                    }
                }
                return faces;
            }
            k -= 1;
            if subset[k] < n - d + k {
                subset[k] += 1;
                for j in k + 1..d {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn zv(p: &Pt) -> ZVec {
    p.iter().map(|&x| Int::from(x)).collect()
}

/// Faces of `p` as (dimension, sorted vertex coordinates).
pub fn library_faces(p: &Polyhedron) -> BTreeSet<(isize, Vec<QVec>)> {
    let fl = face_lattice(p);
    fl.faces
        .iter()
        .filter(|f| !f.is_empty())
        .map(|f| {
            let mut vs: Vec<QVec> = f.vertices.iter().map(|&i| p.vertices[i].clone()).collect();
            vs.sort();
            (f.dim, vs)
        })
        .collect()
}

pub fn full_dimensional(pts: &[Pt]) -> bool {
    !pts.is_empty() && affine_dim(&pts.iter().collect::<Vec<_>>()) == pts[0].len() as isize
}

pub fn corpus_complexes() -> &'static Vec<AffineComplex> {
    static CELL: OnceLock<Vec<AffineComplex>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = Vec::new();
        for name in ["quintic", "quadric", "schoen", "square"] {
            let np = example(name).unwrap();
            for side in [ComplexSide::Nabla, ComplexSide::Delta] {
                out.push(build_complex(&np, side).unwrap());
            }
        }
        let np = example("cube").unwrap();
        let file = mpcp_heights("cube").unwrap();
        let hd = HeightData::new(&np, file.h.as_deref(), file.check_h.as_deref()).unwrap();
        let setup = GeneralSetup::new(&np, hd, None).unwrap();
        for side in [ComplexSide::Nabla, ComplexSide::Delta] {
            out.push(setup.complex(side).unwrap());
        }
        out
    })
}

/// Projection of `x` to the chart at `v`, in its quotient coordinates.
fn chart(ac: &AffineComplex, v: usize, x: &[Rat]) -> QVec {
    ac.charts[&v].quotient.map.iter().map(|row| dot_zq(row, x)).collect()
}

/// The tangent vector of cell `c` whose image in the chart at `v` is `y`.
fn lift(ac: &AffineComplex, v: usize, c: usize, y: &[Rat]) -> QVec {
    let poly = &ac.cells[c].polytope;
    let base = &poly.vertices[0];
    let mut dirs: Vec<QVec> = Vec::new();
    for w in &poly.vertices[1..] {
        let cand = sub_q(w, base);
        let mut trial = dirs.clone();
        trial.push(cand.clone());
        if rank_q(&trial, ac.ambient) == trial.len() {
            dirs = trial;
        }
    }
    let images: Vec<QVec> = dirs.iter().map(|t| chart(ac, v, t)).collect();
    let k = y.len();
    let rows: Vec<QVec> = (0..k).map(|i| images.iter().map(|im| im[i].clone()).collect()).collect();
    let coeffs = solve(&rows, y, dirs.len()).expect("chart restricted to the cell is onto");
    let mut t = vec![Rat::from_integer(Int::from(0)); ac.ambient];
    for (a, dvec) in coeffs.iter().zip(&dirs) {
        t = add_q(&t, &scale_q(a, dvec));
    }
    t
}

/// Four-projection chain: chart at `v`, into `c`, chart at `v2`, into `c2`,
/// back to the chart at `v`.
pub fn oracle_transport(ac: &AffineComplex, v: usize, c: usize, v2: usize, c2: usize) -> Vec<QVec> {
    let k = ac.dim();
    let mut cols = Vec::new();
    for i in 0..k {
        let mut e = vec![Rat::from_integer(Int::from(0)); k];
        e[i] = Rat::from_integer(Int::from(1));
        let t1 = lift(ac, v, c, &e);
        let t2 = lift(ac, v2, c2, &chart(ac, v2, &t1));
        cols.push(chart(ac, v, &t2));
    }
    (0..k).map(|i| (0..k).map(|j| cols[j][i].clone()).collect()).collect()
}


/// Compares the library face lattice of `conv(pts)` with the brute-force one.
pub fn check_face_lattice(pts: &[Pt]) -> Result<(), String> {
    let d = pts[0].len();
    let zs: Vec<ZVec> = pts.iter().map(zv).collect();
    let p = Polyhedron::from_integral(LatticeSpace::new(d, Side::M), &zs).map_err(|e| e.to_string())?;
    let faces = brute_faces(pts);
    // the vertices are the faces with a single point
    let vertices: BTreeSet<usize> = faces.iter().filter(|f| f.len() == 1).map(|f| *f.iter().next().unwrap()).collect();
    let oracle: BTreeSet<(isize, Vec<QVec>)> = faces
        .iter()
        .map(|f| {
            let members: Vec<&Pt> = f.iter().map(|&i| &pts[i]).collect();
            let mut vs: Vec<QVec> = f.iter().filter(|i| vertices.contains(i)).map(|&i| to_q(&zs[i])).collect();
            vs.sort();
            (affine_dim(&members), vs)
        })
        .collect();
    let lib = library_faces(&p);
    if lib == oracle {
        Ok(())
    } else {
        Err(format!("{} library faces vs {} brute-force faces for {:?}", lib.len(), oracle.len(), pts))
    }
}

/// Checks `face_minkowski_decompose` on every proper face of `P + Q` against
/// the unique pair of faces summing to it. Returns the number of faces checked.
pub fn check_minkowski(a: &[Pt], b: &[Pt]) -> Result<usize, String> {
    let d = a[0].len();
    let space = LatticeSpace::new(d, Side::M);
    let p = Polyhedron::from_integral(space, &a.iter().map(zv).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let q = Polyhedron::from_integral(space, &b.iter().map(zv).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let sum = minkowski_sum(&p, &q).map_err(|e| e.to_string())?;
    let faces_of = |x: &Polyhedron| -> Vec<Polyhedron> {
        let fl = face_lattice(x);
        fl.faces.iter().filter(|f| !f.is_empty()).map(|f| x.face_polyhedron(f)).collect()
    };
    let (pf, qf) = (faces_of(&p), faces_of(&q));
    let fl = face_lattice(&sum);
    let mut checked = 0;
    for f in fl.faces.iter().filter(|f| !f.is_empty() && f.dim < sum.dim as isize) {
        let target = sum.face_polyhedron(f);
        // F_P + F_Q = F iff every pairwise sum lies in F and every vertex of F is one
        let matches = |x: &Polyhedron, y: &Polyhedron| {
            let sums: Vec<QVec> = x.vertices.iter().flat_map(|u| y.vertices.iter().map(move |v| add_q(u, v))).collect();
            sums.iter().all(|s| target.contains(s)) && target.vertices.iter().all(|v| sums.contains(v))
        };
        let pairs: Vec<(usize, usize)> = (0..pf.len())
            .flat_map(|i| (0..qf.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| matches(&pf[i], &qf[j]))
            .collect();
        if pairs.len() != 1 {
            return Err(format!("{} summand pairs for a face of {:?} + {:?}", pairs.len(), a, b));
        }
        let (fp, fq) = face_minkowski_decompose(&p, &q, &sum, f).map_err(|e| e.to_string())?;
        if p.face_polyhedron(&fp) != pf[pairs[0].0] || q.face_polyhedron(&fq) != qf[pairs[0].1] {
            return Err(format!("wrong decomposition of a face of {:?} + {:?}", a, b));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Library transport against the four-projection oracle; also requires det 1.
pub fn check_transport(ac: &AffineComplex, v: usize, c: usize, v2: usize, c2: usize) -> Result<bool, String> {
    let t = transport(ac, v, c, v2, c2).map_err(|e| e.to_string())?;
    if t.det() != Int::from(1) {
        return Err(format!("det {} for ({}, {}, {}, {})", t.det(), v, c, v2, c2));
    }
    let expected: Vec<QVec> = t.matrix.iter().map(|r| to_q(r)).collect();
    if oracle_transport(ac, v, c, v2, c2) != expected {
        return Err(format!("oracle disagrees on ({}, {}, {}, {})", v, c, v2, c2));
    }
    Ok(!t.is_identity())
}

/// A random loop `(v, c, v2, c2)` through two maximal cells sharing `v` and `v2`.
pub fn pick_loop(ac: &AffineComplex, a: u64, b: u64, c: u64, e: u64) -> (usize, usize, usize, usize) {
    let maxi = ac.maximal_cells();
    let cell = maxi[(a % maxi.len() as u64) as usize];
    let vs = &ac.cells[cell].vertices;
    let v = vs[(b % vs.len() as u64) as usize];
    let v2 = vs[(c % vs.len() as u64) as usize];
    let others: Vec<usize> = maxi
        .iter()
        .copied()
        .filter(|&m| ac.cells[m].vertices.contains(&v) && ac.cells[m].vertices.contains(&v2))
        .collect();
    (v, cell, v2, others[(e % others.len() as u64) as usize])
}
