//! Regenerates the shipped height files under `data/`.
//!
//! Schoen: the coarse heights are `phi + g` on the boundary of nabla*, with
//! `g(x, y, z) = max(0, -x) + t(y) + t(z)` and `t` the convex function on
//! the fan over the nine boundary points of the plane cubic triangle,
//! taking value 3 on its corners and 2 on the other boundary points. The
//! MPCP heights add a positive definite quadratic form to a multiple of the
//! coarse ones.
//!
//! Cube: `phi + |x| + |y| + |z| + |x+y+z| + |x+y-z| + |x-y+z| + |-x+y+z|`.
//!
//! Usage: `cargo run --release --example heights_gen -- [DIR]`

use std::path::PathBuf;

use bbdegen::complex_general::SideHeights;
use bbdegen::geometry::{from_halfspaces, lattice_points, Halfspace};
use bbdegen::geometry::linalg::*;
use bbdegen::io::{example, write_heights, HeightEntry, HeightFile};
use bbdegen::nef::NefPartition;
use num_traits::{Signed, Zero};

fn boundary_points(np: &NefPartition) -> Vec<ZVec> {
    lattice_points(&np.delta_star).unwrap().into_iter().filter(|p| !is_zero(p)).collect()
}

/// Value on a nonzero point of the plane: 3 on the corner rays, 2 on the
/// others, linear on the cones between consecutive boundary points.
fn cubic_triangle(y: &[Int]) -> Rat {
    let ring: [(i64, i64, i64); 9] =
        [(-1, -1, 3), (0, -1, 2), (1, -1, 2), (2, -1, 3), (1, 0, 2), (0, 1, 2), (-1, 2, 3), (-1, 1, 2), (-1, 0, 2)];
    if y.iter().all(|c| c.is_zero()) {
        return Rat::zero();
    }
    let y = [Rat::from_integer(y[0].clone()), Rat::from_integer(y[1].clone())];
    for k in 0..9 {
        let (a, b) = (ring[k], ring[(k + 1) % 9]);
        let d = Rat::from_integer(Int::from(a.0 * b.1 - a.1 * b.0));
        // y = s a + t b
        let s = (&y[0] * Rat::from(Int::from(b.1)) - &y[1] * Rat::from(Int::from(b.0))) / &d;
        let t = (&y[1] * Rat::from(Int::from(a.0)) - &y[0] * Rat::from(Int::from(a.1))) / &d;
        if !s.is_negative() && !t.is_negative() {
            return s * Rat::from(Int::from(a.2)) + t * Rat::from(Int::from(b.2));
        }
    }
    unreachable!("the ring covers the plane")
}

fn schoen_coarse(p: &ZVec) -> Rat {
    let x = Rat::from_integer(p[0].clone());
    let g = if x.is_negative() { -x } else { Rat::zero() };
    qi(1) + g + cubic_triangle(&p[1..3]) + cubic_triangle(&p[3..5])
}

/// `sum w_i p_i^2 + sum_{i<j} c_ij p_i p_j` with distinct cross weights, so
/// that no four coplanar points tie.
fn quadratic(p: &ZVec, diagonal: i64) -> Rat {
    let cross = [1i64, 2, 3, 5, 7, 11, 13, 17, 19, 23];
    let mut s = Int::zero();
    let mut k = 0;
    for i in 0..p.len() {
        s += Int::from(diagonal) * &p[i] * &p[i];
        for j in i + 1..p.len() {
            s += Int::from(cross[k % cross.len()]) * &p[i] * &p[j];
            k += 1;
        }
    }
    Rat::from_integer(s)
}

/// Keeps only the points that are rays of the induced fan.
fn facets_only(np: &NefPartition, entries: &[HeightEntry]) -> Vec<HeightEntry> {
    let ineqs: Vec<Halfspace> =
        entries.iter().map(|(n, v)| Halfspace { normal: n.clone(), offset: v.clone() }).collect();
    let poly = from_halfspaces(np.delta.space, &ineqs, &[]).unwrap();
    entries.iter().filter(|(n, _)| poly.facets.iter().any(|f| f.normal == *n)).cloned().collect()
}

const SCHOEN_NOTE: &str = "\
# Schoen example, heights on the boundary of nabla*. On the facets dual to
# R- + T_j and S_i + R+ the triangle is cut into nine unimodular triangles
# coning from its centre and the segment into thirds; on the
# facets dual to S_i + T_j the cells are the joins of the thirds of the two
# rectangles. The first two choices are a reconstruction, not given by
# formulas. Regenerate with `cargo run --release --example heights_gen`.
";

const CUBE_NOTE: &str = "\
# Quartic-type K3 in P1 x P1 x P1, heights on the boundary of the cube
# cutting every square face into eight unimodular triangles.
";

fn save(dir: &std::path::Path, name: &str, note: &str, entries: &[HeightEntry]) {
    let body = write_heights(&HeightFile { h: None, check_h: Some(entries.to_vec()) });
    std::fs::write(dir.join(name), format!("{}{}", note, body)).unwrap();
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/bbdegen/data".into()));

    let schoen = example("schoen").unwrap().swap_sides().unwrap();
    let pts = boundary_points(&schoen);
    let coarse: Vec<HeightEntry> = pts.iter().map(|p| (p.clone(), schoen_coarse(p))).collect();
    let coarse = facets_only(&schoen, &coarse);
    let sh = SideHeights::new(&schoen, &coarse).expect("coarse heights");
    eprintln!("schoen coarse: {} rays, {} maximal cones", coarse.len(), sh.fan.maximal.len());
    save(&dir, "schoen_coarse.heights", SCHOEN_NOTE, &sh.entries);

    let mut big = 1024i64;
    let mpcp = loop {
        let entries: Vec<HeightEntry> =
            pts.iter().map(|p| (p.clone(), schoen_coarse(p) * qi(big) + quadratic(p, 100))).collect();
        match SideHeights::new(&schoen, &entries) {
            Ok(sh) if sh.is_mpcp(&schoen) && sh.fan.refines(&SideHeights::new(&schoen, &coarse).unwrap().fan) => {
                break sh
            }
            Ok(_) => eprintln!("K = {}: not MPCP", big),
            Err(e) => eprintln!("K = {}: {}", big, e),
        }
        big *= 2;
        assert!(big < 1 << 20, "no MPCP heights found");
    };
    eprintln!("schoen mpcp: K = {}, {} rays, {} maximal cones", big, mpcp.entries.len(), mpcp.fan.maximal.len());
    save(&dir, "schoen_mpcp.heights", SCHOEN_NOTE, &mpcp.entries);

    let cube = example("cube").unwrap().swap_sides().unwrap();
    let forms: [[i64; 3]; 7] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [1, 1, -1], [1, -1, 1], [-1, 1, 1]];
    let entries: Vec<HeightEntry> = boundary_points(&cube)
        .into_iter()
        .map(|p| {
            let s: Int = forms.iter().map(|f| dot(&zvec(f), &p).abs()).sum();
            let v = Rat::from_integer(s) + qi(1);
            (p, v)
        })
        .collect();
    let sh = SideHeights::new(&cube, &entries).expect("cube heights");
    assert!(sh.is_mpcp(&cube), "cube heights are not MPCP");
    eprintln!("cube mpcp: {} rays, {} maximal cones", sh.entries.len(), sh.fan.maximal.len());
    save(&dir, "cube_mpcp.heights", CUBE_NOTE, &sh.entries);
}
