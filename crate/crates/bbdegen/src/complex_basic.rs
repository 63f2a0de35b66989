//! The unsubdivided complexes: cells are Minkowski sums of the parts of
//! faces of delta* (nabla side) or of nabla* (delta side).

use std::collections::BTreeMap;

use num_traits::One;

use crate::complex::{chart_cone, chart_fan, project_rays, AffineComplex, ComplexError, ComplexSide, VertexChart};
use crate::fans::{descend_pl, newton_polytope, Descended};
use crate::geometry::linalg::*;
use crate::geometry::{convex_hull, face_lattice, is_sorted_subset, minkowski_sum_all, LatticeQuotient, LatticeSpace, Polyhedron};
use crate::nef::NefPartition;

/// The four faces attached to a face `sigma*` of delta*.
#[derive(Clone, Debug)]
pub struct FaceQuartet {
    /// Face of delta dual to `sigma*`.
    pub sigma: Polyhedron,
    pub sigma_star: Polyhedron,
    /// `sigma^vee = sum_i beta_i^*(sigma*)`, a face of nabla.
    pub check: Polyhedron,
    /// Face of nabla* dual to `check`.
    pub check_star: Polyhedron,
    pub parts_star: Vec<Polyhedron>,
    /// Faces of the parts `delta_i` minimizing on the cone over `sigma*`.
    pub check_parts: Vec<Polyhedron>,
}

fn dual_face_points(points: &[QVec], of: &[QVec]) -> Vec<QVec> {
    points.iter().filter(|m| of.iter().all(|n| dot_q(m, n) == -Rat::one())).cloned().collect()
}

/// Computes the quartet of a face `sigma*` of delta* and checks the
/// identities relating them. Fails when some `beta_i^*(sigma*)` is empty.
pub fn face_quartet(np: &NefPartition, sigma_star: &Polyhedron) -> Result<FaceQuartet, ComplexError> {
    let n = np.rank();
    let mut parts_star = Vec::new();
    for i in 0..np.r() {
        match np.beta_star(sigma_star, i)? {
            Some(b) => parts_star.push(b),
            None => return Err(ComplexError::Other(format!("beta_{}^* of the face is empty", i))),
        }
    }
    let check = minkowski_sum_all(&parts_star)?;
    let sp_m = np.delta.space;
    let sigma = convex_hull(sp_m, &dual_face_points(&np.delta.vertices, &sigma_star.vertices), &[])?;
    let check_star = convex_hull(sp_m, &dual_face_points(&np.nabla_star.vertices, &check.vertices), &[])?;
    let witness = sigma_star.face_interior_point(&sigma_star.face_from_sets((0..sigma_star.vertices.len()).collect(), vec![]));
    let (_, w) = homogenize(&witness);
    let mut check_parts = Vec::new();
    for p in &np.parts {
        let f = p.minimizing_face(&w).expect("bounded part");
        check_parts.push(p.face_polyhedron(&f));
    }
    let hull_pts: Vec<QVec> = check_parts.iter().flat_map(|p| p.vertices.iter().cloned()).collect();
    if convex_hull(sp_m, &hull_pts, &[])? != check_star {
        return Err(ComplexError::Other("dual face of nabla is not the hull of the part faces".into()));
    }
    if minkowski_sum_all(&check_parts)? != sigma {
        return Err(ComplexError::Other("face of delta is not the sum of the part faces".into()));
    }
    let r = np.r();
    if check.dim + r != sigma_star.dim + 1 || sigma.dim + r != check_star.dim + 1 || check.dim + sigma.dim != n - r {
        return Err(ComplexError::Other("dimension relations fail".into()));
    }
    Ok(FaceQuartet { sigma, sigma_star: sigma_star.clone(), check, check_star, parts_star, check_parts })
}

/// The partition whose nabla side realizes the requested side.
pub fn side_partition(np: &NefPartition, side: ComplexSide) -> Result<NefPartition, ComplexError> {
    Ok(match side {
        ComplexSide::Nabla => np.clone(),
        ComplexSide::Delta => np.swap_sides()?,
    })
}

pub fn build_complex(np: &NefPartition, side: ComplexSide) -> Result<AffineComplex, ComplexError> {
    let sp = side_partition(np, side)?;
    build_nabla(&sp, side)
}

/// Sigma cone over a face of delta*, given by vertex indices of delta*.
fn face_cone(np: &NefPartition, vertices: &[usize]) -> usize {
    let mut rays: Vec<usize> = vertices
        .iter()
        .map(|&k| np.sigma.ray_index(&to_z(&np.delta_star.vertices[k]).unwrap()).expect("vertex of delta* is a ray"))
        .collect();
    rays.sort();
    np.sigma.find(&rays).expect("face cone")
}

fn build_nabla(np: &NefPartition, side: ComplexSide) -> Result<AffineComplex, ComplexError> {
    let ds = &np.delta_star;
    let fl = face_lattice(ds);
    let part_of: Vec<usize> = ds
        .vertices
        .iter()
        .map(|v| np.ray_part[np.sigma.ray_index(&to_z(v).unwrap()).unwrap()])
        .collect();
    let nspace: LatticeSpace = ds.space;
    let mut raw = Vec::new();
    for (fi, f) in fl.faces.iter().enumerate() {
        if f.is_empty() || fi == fl.top() {
            continue;
        }
        let mut groups: Vec<Vec<QVec>> = vec![Vec::new(); np.r()];
        for &k in &f.vertices {
            groups[part_of[k]].push(ds.vertices[k].clone());
        }
        if groups.iter().any(|g| g.is_empty()) {
            continue;
        }
        let parts: Vec<Polyhedron> =
            groups.iter().map(|g| convex_hull(nspace, g, &[])).collect::<Result<_, _>>()?;
        raw.push((minkowski_sum_all(&parts)?, fi));
    }
    let faces = fl.faces.clone();
    let mut ac = AffineComplex::assemble(side, nspace.rank, np.r(), raw, |a, b| {
        is_sorted_subset(&faces[a].vertices, &faces[b].vertices)
    });
    for &v in &ac.by_dim[0].clone() {
        let f = &faces[ac.cells[v].origin];
        let mut decomposition = vec![Vec::new(); np.r()];
        for &k in &f.vertices {
            decomposition[part_of[k]] = to_z(&ds.vertices[k]).unwrap();
        }
        let q = LatticeQuotient::new(nspace.rank, &decomposition);
        let images = |c: usize| -> Vec<ZVec> {
            let rays: Vec<ZVec> = faces[ac.cells[c].origin].vertices.iter().map(|&k| to_z(&ds.vertices[k]).unwrap()).collect();
            project_rays(&q, &rays)
        };
        let star = ac.star(v);
        let maximal: Vec<Vec<ZVec>> = star.iter().map(|&c| images(c)).collect();
        let fan = chart_fan(&q, nspace.side, &maximal);
        let mut cell_cone = BTreeMap::new();
        for (c, cell) in ac.cells.iter().enumerate() {
            if cell.vertices.binary_search(&v).is_ok() && ac.is_face(v, c) {
                let k = chart_cone(&fan, &images(c)).ok_or_else(|| ComplexError::Chart(format!("cell {} at vertex {}", c, v)))?;
                cell_cone.insert(c, k);
            }
        }
        let chart = VertexChart {
            point: ac.vertex_point(v),
            decomposition,
            w: vec![Int::from(0); nspace.rank],
            quotient: q,
            fan,
            cell_cone,
        };
        ac.charts.insert(v, chart);
    }
    for &c in &ac.maximal_cells().to_vec() {
        let f = &faces[ac.cells[c].origin];
        let tau = face_cone(np, &f.vertices);
        let ms = (0..np.r()).map(|j| np.phi_parts[j].slope_of(tau).iter().map(|x| -x).collect()).collect();
        ac.covectors.insert(c, ms);
    }
    Ok(ac)
}

/// Local representatives of the multi-valued PL function: `phi` descended
/// along the cone of each cell.
#[derive(Clone, Debug)]
pub struct MultiPl {
    pub locals: BTreeMap<usize, Descended>,
}

/// Descends `phi` to the quotient fan of every cell and checks that the
/// representatives are integral and differ by integral linear functions on
/// overlaps.
pub fn attach_mpl(np: &NefPartition, ac: &AffineComplex) -> Result<MultiPl, ComplexError> {
    let sp = side_partition(np, ac.side)?;
    let fl = face_lattice(&sp.delta_star);
    let mut locals = BTreeMap::new();
    for (c, cell) in ac.cells.iter().enumerate() {
        let tau = face_cone(&sp, &fl.faces[cell.origin].vertices);
        let d = descend_pl(&sp.phi, tau)?;
        if !d.function.is_integral() {
            return Err(ComplexError::Other(format!("representative on cell {} is not integral", c)));
        }
        locals.insert(c, d);
    }
    for (c, cell) in ac.cells.iter().enumerate() {
        for &f in &cell.facets {
            let diff = sub_q(&locals[&c].shift, &locals[&f].shift);
            if to_z(&diff).is_none() {
                return Err(ComplexError::Other(format!("cells {} and {} differ by a non-integral function", f, c)));
            }
        }
    }
    Ok(MultiPl { locals })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DltReport {
    pub nabla_vertices: usize,
    pub delta_vertices: usize,
}

/// At every vertex of either complex the Newton polytope of the local
/// representative of `phi` is the matching maximal cell of the other side.
pub fn dlt_verify(np: &NefPartition) -> Result<DltReport, ComplexError> {
    let nabla = build_complex(np, ComplexSide::Nabla)?;
    let delta = build_complex(np, ComplexSide::Delta)?;
    let a = check_vertices(np, &nabla, &delta)?;
    let b = check_vertices(&np.swap_sides()?, &delta, &nabla)?;
    Ok(DltReport { nabla_vertices: a, delta_vertices: b })
}

fn check_vertices(np: &NefPartition, here: &AffineComplex, there: &AffineComplex) -> Result<usize, ComplexError> {
    let fl = face_lattice(&np.delta_star);
    let mut count = 0;
    for &v in here.vertex_cells() {
        let f = &fl.faces[here.cells[v].origin];
        let tau = face_cone(np, &f.vertices);
        let d = descend_pl(&np.phi, tau)?;
        let newton = newton_polytope(&d.function)?;
        let sstar: Vec<QVec> = f.vertices.iter().map(|&k| np.delta_star.vertices[k].clone()).collect();
        let sigma = dual_face_points(&np.delta.vertices, &sstar);
        let image: Vec<QVec> = sigma
            .iter()
            .map(|x| {
                let y = add_q(x, &d.shift);
                d.quotient.quotient.basis.iter().map(|b| dot_zq(b, &y)).collect()
            })
            .collect();
        let expected = convex_hull(newton.space, &image, &[])?;
        if expected != newton {
            return Err(ComplexError::Other(format!("Newton polytope at vertex {} is not the dual cell", v)));
        }
        let target = convex_hull(np.delta.space, &sigma, &[])?;
        if !there.maximal_cells().iter().any(|&c| there.cells[c].polytope == target) {
            return Err(ComplexError::Other(format!("dual face of vertex {} is not a maximal cell", v)));
        }
        count += 1;
    }
    Ok(count)
}
