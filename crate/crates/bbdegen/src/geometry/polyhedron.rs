use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::dd::{dd_cone, Bits};
use super::linalg::*;
use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    M,
    N,
}

impl Side {
    pub fn dual(self) -> Side {
        match self {
            Side::M => Side::N,
            Side::N => Side::M,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeSpace {
    pub rank: usize,
    pub side: Side,
}

impl LatticeSpace {
    pub fn new(rank: usize, side: Side) -> Self {
        LatticeSpace { rank, side }
    }

    pub fn dual(self) -> Self {
        LatticeSpace { rank: self.rank, side: self.side.dual() }
    }

    /// The standard pairing between this space and its dual.
    pub fn pairing(&self, a: &[Int], b: &[Int]) -> Int {
        dot(a, b)
    }
}

/// A facet or equation `normal . x + offset >= 0` (resp. `= 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfspace {
    pub normal: ZVec,
    pub offset: Rat,
}

impl Halfspace {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        dot_zq(&self.normal, x) + &self.offset
    }
}

#[derive(Clone, Debug)]
pub struct Polyhedron {
    pub space: LatticeSpace,
    pub vertices: Vec<QVec>,
    pub rays: Vec<ZVec>,
    pub facets: Vec<Halfspace>,
    pub equations: Vec<Halfspace>,
    pub dim: usize,
    /// Per facet, the incident generators: vertices first, then rays.
    pub incidence: Vec<Bits>,
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.rays == other.rays
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub rays: Vec<usize>,
    pub dim: isize,
}

impl Face {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct FaceLattice {
    /// Sorted by dimension, the empty face first and the polyhedron last.
    pub faces: Vec<Face>,
    pub by_dim: Vec<Vec<usize>>,
    /// `covers[i]` lists the faces of codimension one in face `i`.
    pub covers: Vec<Vec<usize>>,
    index: HashMap<(Vec<usize>, Vec<usize>), usize>,
}

impl FaceLattice {
    /// Face counts for dimensions `0..dim` (the proper nonempty faces).
    pub fn f_vector(&self) -> Vec<usize> {
        let top = self.by_dim.len() - 2;
        (0..top).map(|d| self.by_dim[d + 1].len()).collect()
    }

    pub fn of_dim(&self, d: isize) -> &[usize] {
        &self.by_dim[(d + 1) as usize]
    }

    pub fn find(&self, vertices: &[usize], rays: &[usize]) -> Option<usize> {
        self.index.get(&(vertices.to_vec(), rays.to_vec())).copied()
    }

    pub fn top(&self) -> usize {
        self.faces.len() - 1
    }

    /// Indices of all faces contained in face `i`, including `i`.
    pub fn subfaces(&self, i: usize) -> Vec<usize> {
        let f = &self.faces[i];
        (0..self.faces.len())
            .filter(|&j| {
                let g = &self.faces[j];
                g.dim <= f.dim && is_sorted_subset(&g.vertices, &f.vertices) && is_sorted_subset(&g.rays, &f.rays)
            })
            .collect()
    }
}

pub fn is_sorted_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

fn homog_point(p: &[Rat]) -> ZVec {
    let (d, w) = homogenize(p);
    let mut v = vec![d];
    v.extend(w);
    primitive(v)
}

fn homog_ray(r: &[Int]) -> ZVec {
    let mut v = vec![Int::zero()];
    v.extend(r.iter().cloned());
    primitive(v)
}

/// Canonical integral basis of a rational row space, sign fixed by the
/// first nonzero entry.
fn canonical_rows(rows: &[QVec], ncols: usize) -> Vec<ZVec> {
    let (red, _) = rref(rows, ncols);
    red.iter().map(|r| primitive_q(r)).collect()
}

/// Orthogonal projection of `a` onto the complement of the row span of `eqs`.
fn project_out(a: &[Int], eqs: &[ZVec]) -> QVec {
    let mut v = to_q(a);
    if eqs.is_empty() {
        return v;
    }
    let e: Vec<QVec> = eqs.iter().map(|x| to_q(x)).collect();
    let gram: Vec<QVec> = e.iter().map(|x| e.iter().map(|y| dot_q(x, y)).collect()).collect();
    let rhs: Vec<Rat> = e.iter().map(|x| dot_q(x, &v)).collect();
    let t = solve(&gram, &rhs, e.len()).expect("equation rows are independent");
    for (ti, ei) in t.iter().zip(&e) {
        v = sub_q(&v, &scale_q(ti, ei));
    }
    v
}

impl Polyhedron {
    pub fn ambient_dim(&self) -> usize {
        self.space.rank
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn is_full_dim(&self) -> bool {
        self.dim == self.space.rank
    }

    pub fn n_generators(&self) -> usize {
        self.vertices.len() + self.rays.len()
    }

    /// Integral vertices, if all of them are.
    pub fn integral_vertices(&self) -> Option<Vec<ZVec>> {
        self.vertices.iter().map(|v| to_z(v)).collect()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.equations.iter().all(|e| e.eval(x).is_zero())
            && self.facets.iter().all(|f| !f.eval(x).is_negative())
    }

    pub fn contains_z(&self, x: &[Int]) -> bool {
        self.contains(&to_q(x))
    }

    /// Strict interior relative to the affine hull.
    pub fn relint_contains(&self, x: &[Rat]) -> bool {
        self.equations.iter().all(|e| e.eval(x).is_zero())
            && self.facets.iter().all(|f| f.eval(x).is_positive())
    }

    /// Minimum of `<c, x>` over the polyhedron, `None` if unbounded below.
    pub fn min_value(&self, c: &[Int]) -> Option<Rat> {
        if self.rays.iter().any(|r| dot(c, r).is_negative()) {
            return None;
        }
        self.vertices.iter().map(|v| dot_zq(c, v)).min()
    }

    /// Face of generators minimizing `<c, x>`.
    pub fn minimizing_face(&self, c: &[Int]) -> Option<Face> {
        let m = self.min_value(c)?;
        let vs: Vec<usize> = (0..self.vertices.len()).filter(|&i| dot_zq(c, &self.vertices[i]) == m).collect();
        let rs: Vec<usize> = (0..self.rays.len()).filter(|&i| dot(c, &self.rays[i]).is_zero()).collect();
        Some(self.face_from_sets(vs, rs))
    }

    pub fn face_from_sets(&self, vertices: Vec<usize>, rays: Vec<usize>) -> Face {
        let dim = self.generator_rank(&vertices, &rays) as isize - 1;
        Face { vertices, rays, dim }
    }

    fn generator_rank(&self, vertices: &[usize], rays: &[usize]) -> usize {
        let mut rows: Vec<ZVec> = vertices.iter().map(|&i| homog_point(&self.vertices[i])).collect();
        rows.extend(rays.iter().map(|&i| homog_ray(&self.rays[i])));
        rank(&rows)
    }

    /// Barycenter of a face's vertices plus the sum of its rays.
    pub fn face_interior_point(&self, f: &Face) -> QVec {
        let d = self.space.rank;
        let mut s = vec![Rat::zero(); d];
        for &i in &f.vertices {
            s = add_q(&s, &self.vertices[i]);
        }
        let k = Rat::from_integer(Int::from(f.vertices.len().max(1)));
        s = s.iter().map(|x| x / &k).collect();
        for &i in &f.rays {
            s = add_q(&s, &to_q(&self.rays[i]));
        }
        s
    }

    /// Polyhedron spanned by a face's generators.
    pub fn face_polyhedron(&self, f: &Face) -> Polyhedron {
        let pts: Vec<QVec> = f.vertices.iter().map(|&i| self.vertices[i].clone()).collect();
        let rays: Vec<ZVec> = f.rays.iter().map(|&i| self.rays[i].clone()).collect();
        convex_hull_unchecked(self.space, &pts, &rays)
    }

    /// Facets containing every listed generator.
    pub fn facets_containing(&self, vertices: &[usize], rays: &[usize]) -> Vec<usize> {
        let nv = self.vertices.len();
        (0..self.facets.len())
            .filter(|&j| {
                vertices.iter().all(|&i| self.incidence[j].contains(i))
                    && rays.iter().all(|&i| self.incidence[j].contains(nv + i))
            })
            .collect()
    }

    pub fn translate(&self, t: &[Rat]) -> Polyhedron {
        let pts: Vec<QVec> = self.vertices.iter().map(|v| add_q(v, t)).collect();
        convex_hull_unchecked(self.space, &pts, &self.rays)
    }

    pub fn scale(&self, c: &Rat) -> Polyhedron {
        let pts: Vec<QVec> = self.vertices.iter().map(|v| scale_q(c, v)).collect();
        convex_hull_unchecked(self.space, &pts, &self.rays)
    }

    pub fn from_integral(space: LatticeSpace, points: &[ZVec]) -> Result<Polyhedron, GeometryError> {
        let pts: Vec<QVec> = points.iter().map(|p| to_q(p)).collect();
        convex_hull(space, &pts, &[])
    }
}

pub fn convex_hull(space: LatticeSpace, points: &[QVec], rays: &[ZVec]) -> Result<Polyhedron, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let d = space.rank;
    if points.iter().any(|p| p.len() != d) || rays.iter().any(|r| r.len() != d) {
        return Err(GeometryError::DimensionMismatch);
    }
    hull_impl(space, points, rays)
}

pub(crate) fn convex_hull_unchecked(space: LatticeSpace, points: &[QVec], rays: &[ZVec]) -> Polyhedron {
    hull_impl(space, points, rays).expect("hull of valid generators")
}

fn hull_impl(space: LatticeSpace, points: &[QVec], rays: &[ZVec]) -> Result<Polyhedron, GeometryError> {
    let d = space.rank;
    let big_d = d + 1;
    let mut seen = BTreeSet::new();
    let mut gens: Vec<(ZVec, bool)> = Vec::new();
    for p in points {
        let g = homog_point(p);
        if seen.insert(g.clone()) {
            gens.push((g, true));
        }
    }
    for r in rays {
        if is_zero(r) {
            continue;
        }
        let g = homog_ray(r);
        if seen.insert(g.clone()) {
            gens.push((g, false));
        }
    }
    let cons: Vec<ZVec> = gens.iter().map(|(g, _)| g.clone()).collect();
    let dual = dd_cone(big_d, &cons);
    let eq_full = canonical_rows(&dual.lineality.iter().map(|l| to_q(l)).collect::<Vec<_>>(), big_d);

    let mut all_rows: Vec<ZVec> = dual.rays.clone();
    all_rows.extend(eq_full.iter().cloned());
    if rank(&all_rows) < big_d {
        return Err(GeometryError::NotPointed);
    }

    // extreme generators
    let mut verts: Vec<QVec> = Vec::new();
    let mut out_rays: Vec<ZVec> = Vec::new();
    for (g, is_point) in &gens {
        let mut rows: Vec<ZVec> = dual.rays.iter().filter(|y| dot(y, g).is_zero()).cloned().collect();
        rows.extend(eq_full.iter().cloned());
        if rank(&rows) != big_d - 1 {
            continue;
        }
        if *is_point {
            let t = Rat::from_integer(g[0].clone());
            verts.push(g[1..].iter().map(|x| Rat::from_integer(x.clone()) / &t).collect());
        } else {
            out_rays.push(g[1..].to_vec());
        }
    }
    verts.sort();
    out_rays.sort();

    let eq_normals: Vec<ZVec> = eq_full.iter().map(|e| e[1..].to_vec()).collect();
    let eq_normals = canonical_rows(&eq_normals.iter().map(|e| to_q(e)).collect::<Vec<_>>(), d);
    let equations: Vec<Halfspace> = eq_normals
        .iter()
        .map(|n| {
            let offset = -dot_zq(n, &verts[0]);
            Halfspace { normal: n.clone(), offset }
        })
        .collect();

    let mut facets: Vec<Halfspace> = Vec::new();
    for y in &dual.rays {
        let a = project_out(&y[1..], &eq_normals);
        if a.iter().all(|x| x.is_zero()) {
            continue;
        }
        let normal = primitive_q(&a);
        let offset = -verts.iter().map(|v| dot_zq(&normal, v)).min().expect("nonempty");
        facets.push(Halfspace { normal, offset });
    }
    facets.sort();
    facets.dedup();

    let nv = verts.len();
    let incidence = facets
        .iter()
        .map(|f| {
            let mut b = Bits::new(nv + out_rays.len());
            for (i, v) in verts.iter().enumerate() {
                if f.eval(v).is_zero() {
                    b.insert(i);
                }
            }
            for (i, r) in out_rays.iter().enumerate() {
                if dot(&f.normal, r).is_zero() {
                    b.insert(nv + i);
                }
            }
            b
        })
        .collect();
    Ok(Polyhedron { space, vertices: verts, rays: out_rays, facets, equations, dim: d - eq_normals.len(), incidence })
}

/// Solution set of `normal . x + offset >= 0` for the given halfspaces plus
/// the equations; must be nonempty and pointed.
pub fn from_halfspaces(
    space: LatticeSpace,
    ineqs: &[Halfspace],
    eqs: &[Halfspace],
) -> Result<Polyhedron, GeometryError> {
    let d = space.rank;
    let lift = |h: &Halfspace| -> ZVec {
        let q = h.offset.denom().clone();
        let mut v = vec![h.offset.numer().clone()];
        v.extend(h.normal.iter().map(|x| x * &q));
        v
    };
    let mut cons: Vec<ZVec> = Vec::new();
    let mut t = vec![Int::zero(); d + 1];
    t[0] = Int::one();
    cons.push(t);
    for h in eqs {
        let v = lift(h);
        cons.push(neg(&v));
        cons.push(v);
    }
    cons.extend(ineqs.iter().map(lift));
    let c = dd_cone(d + 1, &cons);
    if !c.lineality.is_empty() {
        return Err(GeometryError::NotPointed);
    }
    let mut pts = Vec::new();
    let mut rays = Vec::new();
    for r in &c.rays {
        if r[0].is_zero() {
            rays.push(r[1..].to_vec());
        } else {
            let t = Rat::from_integer(r[0].clone());
            pts.push(r[1..].iter().map(|x| Rat::from_integer(x.clone()) / &t).collect::<QVec>());
        }
    }
    if pts.is_empty() {
        return Err(GeometryError::Infeasible);
    }
    convex_hull(space, &pts, &rays)
}

pub fn face_lattice(p: &Polyhedron) -> FaceLattice {
    let nv = p.vertices.len();
    let ng = p.n_generators();
    let top = Bits::full(ng);
    let mut seen: HashMap<Bits, ()> = HashMap::new();
    let mut queue = vec![top.clone()];
    seen.insert(top, ());
    let mut all = Vec::new();
    while let Some(g) = queue.pop() {
        for inc in &p.incidence {
            let h = g.and(inc);
            if h == g || h.iter().next().is_none_or(|i| i >= nv) {
                continue;
            }
            if seen.insert(h.clone(), ()).is_none() {
                queue.push(h);
            }
        }
        all.push(g);
    }
    let mut faces: Vec<Face> = all
        .iter()
        .map(|g| {
            let vs: Vec<usize> = g.iter().filter(|&i| i < nv).collect();
            let rs: Vec<usize> = g.iter().filter(|&i| i >= nv).map(|i| i - nv).collect();
            p.face_from_sets(vs, rs)
        })
        .collect();
    faces.push(Face { vertices: vec![], rays: vec![], dim: -1 });
    faces.sort_by(|a, b| (a.dim, &a.vertices, &a.rays).cmp(&(b.dim, &b.vertices, &b.rays)));
    let top_dim = p.dim as isize;
    let mut by_dim = vec![Vec::new(); (top_dim + 2) as usize];
    for (i, f) in faces.iter().enumerate() {
        by_dim[(f.dim + 1) as usize].push(i);
    }
    let mut covers = vec![Vec::new(); faces.len()];
    for (i, f) in faces.iter().enumerate() {
        if f.dim < 0 {
            continue;
        }
        for &j in &by_dim[f.dim as usize] {
            let g = &faces[j];
            if is_sorted_subset(&g.vertices, &f.vertices) && is_sorted_subset(&g.rays, &f.rays) {
                covers[i].push(j);
            }
        }
    }
    let index = faces.iter().enumerate().map(|(i, f)| ((f.vertices.clone(), f.rays.clone()), i)).collect();
    FaceLattice { faces, by_dim, covers, index }
}

pub fn polar_dual(p: &Polyhedron) -> Result<Polyhedron, GeometryError> {
    if !p.is_bounded() {
        return Err(GeometryError::Unbounded);
    }
    if !p.is_full_dim() || p.facets.iter().any(|f| !f.offset.is_positive()) {
        return Err(GeometryError::OriginNotInterior);
    }
    let pts: Vec<QVec> = p
        .facets
        .iter()
        .map(|f| f.normal.iter().map(|x| Rat::from_integer(x.clone()) / &f.offset).collect())
        .collect();
    convex_hull(p.space.dual(), &pts, &[])
}

pub fn is_reflexive(p: &Polyhedron) -> bool {
    p.is_bounded()
        && p.is_full_dim()
        && p.integral_vertices().is_some()
        && p.facets.iter().all(|f| f.offset.is_one())
}

pub fn minkowski_sum(p: &Polyhedron, q: &Polyhedron) -> Result<Polyhedron, GeometryError> {
    if p.space != q.space {
        return Err(GeometryError::DimensionMismatch);
    }
    let mut pts = Vec::with_capacity(p.vertices.len() * q.vertices.len());
    for a in &p.vertices {
        for b in &q.vertices {
            pts.push(add_q(a, b));
        }
    }
    let mut rays = p.rays.clone();
    rays.extend(q.rays.iter().cloned());
    convex_hull(p.space, &pts, &rays)
}

pub fn minkowski_sum_all(parts: &[Polyhedron]) -> Result<Polyhedron, GeometryError> {
    let mut it = parts.iter();
    let mut acc = it.next().ok_or(GeometryError::EmptyInput)?.clone();
    for q in it {
        acc = minkowski_sum(&acc, q)?;
    }
    Ok(acc)
}

/// A functional whose minimizing face on `p` is exactly `f`.
pub fn supporting_functional(p: &Polyhedron, f: &Face) -> ZVec {
    let mut c = vec![Int::zero(); p.space.rank];
    for j in p.facets_containing(&f.vertices, &f.rays) {
        c = add(&c, &p.facets[j].normal);
    }
    c
}

/// Splits a face of `sum = p + q` into its unique summands.
pub fn face_minkowski_decompose(
    p: &Polyhedron,
    q: &Polyhedron,
    sum: &Polyhedron,
    f: &Face,
) -> Result<(Face, Face), GeometryError> {
    let check = sum.minimizing_face(&supporting_functional(sum, f));
    if f.is_empty() || check.as_ref().map(|g| (&g.vertices, &g.rays)) != Some((&f.vertices, &f.rays)) {
        return Err(GeometryError::NotAFace);
    }
    let c = supporting_functional(sum, f);
    let fp = p.minimizing_face(&c).ok_or(GeometryError::NotAFace)?;
    let fq = q.minimizing_face(&c).ok_or(GeometryError::NotAFace)?;
    Ok((fp, fq))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub space: LatticeSpace,
    /// Irredundant primitive generators, sorted.
    pub rays: Vec<ZVec>,
    pub lineality: Vec<ZVec>,
    /// Inner facet normals, primitive and sorted.
    pub facets: Vec<ZVec>,
    /// Normals of the linear span's defining equations.
    pub equations: Vec<ZVec>,
    pub dim: usize,
}

impl Cone {
    pub fn new(space: LatticeSpace, gens: &[ZVec], lineality: &[ZVec]) -> Cone {
        let d = space.rank;
        let mut cons: Vec<ZVec> = gens.iter().filter(|g| !is_zero(g)).cloned().collect();
        for l in lineality {
            cons.push(l.clone());
            cons.push(neg(l));
        }
        let dual = dd_cone(d, &cons);
        let equations = canonical_rows(&dual.lineality.iter().map(|l| to_q(l)).collect::<Vec<_>>(), d);
        let lin_basis: Vec<ZVec> = {
            let mut rows: Vec<ZVec> = dual.rays.clone();
            rows.extend(equations.iter().cloned());
            let ns = nullspace_z(&rows, d);
            canonical_rows(&ns.iter().map(|v| to_q(v)).collect::<Vec<_>>(), d)
        };
        let facets: Vec<ZVec> = {
            let mut f: Vec<ZVec> = dual
                .rays
                .iter()
                .map(|y| primitive_q(&project_out(y, &equations)))
                .filter(|y| !is_zero(y))
                .collect();
            f.sort();
            f.dedup();
            f
        };
        let l = lin_basis.len();
        let mut rays: Vec<ZVec> = Vec::new();
        for g in gens {
            if is_zero(g) {
                continue;
            }
            let mut rows: Vec<ZVec> = facets.iter().filter(|y| dot(y, g).is_zero()).cloned().collect();
            if rows.len() == facets.len() {
                continue; // inside the lineality space
            }
            rows.extend(equations.iter().cloned());
            if rank(&rows) == d - l - 1 {
                let g = if l == 0 { primitive(g.clone()) } else { primitive_q(&project_out(g, &lin_basis)) };
                if !rays.contains(&g) {
                    rays.push(g);
                }
            }
        }
        rays.sort();
        let dim = d - equations.len();
        Cone { space, rays, lineality: lin_basis, facets, equations, dim }
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        self.equations.iter().all(|e| dot(e, x).is_zero()) && self.facets.iter().all(|f| !dot(f, x).is_negative())
    }

    pub fn contains_q(&self, x: &[Rat]) -> bool {
        self.contains(&primitive_q(x))
    }

    pub fn relint_contains(&self, x: &[Int]) -> bool {
        self.equations.iter().all(|e| dot(e, x).is_zero()) && self.facets.iter().all(|f| dot(f, x).is_positive())
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    /// Sum of the generators; lies in the relative interior.
    pub fn interior_point(&self) -> ZVec {
        let mut s = vec![Int::zero(); self.space.rank];
        for r in &self.rays {
            s = add(&s, r);
        }
        s
    }

    pub fn is_simplicial(&self) -> bool {
        self.rays.len() + self.lineality.len() == self.dim
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rs: Vec<String> = self
            .rays
            .iter()
            .map(|r| format!("({})", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "cone<{}>", rs.join(" "))
    }
}

/// Inner normal cone of `p` along the generators of `f`.
pub fn normal_cone(p: &Polyhedron, f: &Face) -> Result<Cone, GeometryError> {
    if f.is_empty() {
        return Err(GeometryError::EmptyFace);
    }
    let gens: Vec<ZVec> =
        p.facets_containing(&f.vertices, &f.rays).into_iter().map(|j| p.facets[j].normal.clone()).collect();
    let lin: Vec<ZVec> = p.equations.iter().map(|e| e.normal.clone()).collect();
    Ok(Cone::new(p.space.dual(), &gens, &lin))
}

fn floor(x: &Rat) -> Int {
    x.floor().to_integer()
}

fn ceil(x: &Rat) -> Int {
    x.ceil().to_integer()
}

/// Integer points of a bounded polyhedron, in lexicographic order.
pub fn lattice_points(p: &Polyhedron) -> Result<Vec<ZVec>, GeometryError> {
    if !p.is_bounded() {
        return Err(GeometryError::Unbounded);
    }
    let d = p.space.rank;
    let lo: Vec<Int> = (0..d).map(|i| ceil(p.vertices.iter().map(|v| &v[i]).min().unwrap())).collect();
    let hi: Vec<Int> = (0..d).map(|i| floor(p.vertices.iter().map(|v| &v[i]).max().unwrap())).collect();
    let mut out = Vec::new();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Ok(out);
    }
    // Scaled integer constraints for a cheap membership test.
    let mut rows: Vec<(ZVec, Int, bool)> = Vec::new();
    for h in &p.facets {
        let q = h.offset.denom().clone();
        rows.push((scale(&q, &h.normal), h.offset.numer().clone(), false));
    }
    for h in &p.equations {
        let q = h.offset.denom().clone();
        rows.push((scale(&q, &h.normal), h.offset.numer().clone(), true));
    }
    let mut x = lo.clone();
    loop {
        if rows.iter().all(|(n, c, eq)| {
            let v = dot(n, &x) + c;
            if *eq {
                v.is_zero()
            } else {
                !v.is_negative()
            }
        }) {
            out.push(x.clone());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if x[i] < hi[i] {
                x[i] += 1;
                for j in i + 1..d {
                    x[j] = lo[j].clone();
                }
                break;
            }
        }
    }
}

pub fn is_elementary_simplex(p: &Polyhedron) -> Result<bool, GeometryError> {
    let verts = p.integral_vertices().ok_or(GeometryError::NonIntegral)?;
    if !p.is_bounded() {
        return Err(GeometryError::Unbounded);
    }
    if verts.len() != p.dim + 1 {
        return Ok(false);
    }
    Ok(lattice_points(p)?.len() == verts.len())
}

/// The face of reflexive `p` pairing to -1 with every vertex of the face `f`
/// of `dual = polar_dual(p)`.
pub fn dual_face(p: &Polyhedron, dual: &Polyhedron, f: &Face) -> Result<Face, GeometryError> {
    if f.is_empty() || f.dim as usize >= dual.dim {
        return Err(GeometryError::ImproperFace);
    }
    let fv: Vec<&QVec> = f.vertices.iter().map(|&i| &dual.vertices[i]).collect();
    let vs: Vec<usize> = (0..p.vertices.len())
        .filter(|&i| fv.iter().all(|n| dot_q(&p.vertices[i], n) == -Rat::one()))
        .collect();
    Ok(p.face_from_sets(vs, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<QVec> {
        v.iter().map(|p| to_q(&zvec(p))).collect()
    }

    fn sp(d: usize) -> LatticeSpace {
        LatticeSpace::new(d, Side::M)
    }

    #[test]
    fn square_hull_and_lattice() {
        let sq = convex_hull(sp(2), &pts(&[&[1, 1], &[-1, 1], &[1, -1], &[-1, -1], &[0, 0]]), &[]).unwrap();
        assert_eq!(sq.vertices.len(), 4);
        assert_eq!(sq.facets.len(), 4);
        assert_eq!(face_lattice(&sq).f_vector(), vec![4, 4]);
        assert_eq!(lattice_points(&sq).unwrap().len(), 9);
        let d = polar_dual(&sq).unwrap();
        assert_eq!(d.vertices, pts(&[&[-1, 0], &[0, -1], &[0, 1], &[1, 0]]));
        assert!(is_reflexive(&sq));
    }

    #[test]
    fn triangle_facets() {
        let t = convex_hull(sp(2), &pts(&[&[-1, -1], &[2, -1], &[-1, 2]]), &[]).unwrap();
        let normals: Vec<ZVec> = t.facets.iter().map(|f| f.normal.clone()).collect();
        assert_eq!(normals, vec![zvec(&[-1, -1]), zvec(&[0, 1]), zvec(&[1, 0])]);
        assert!(t.facets.iter().all(|f| f.offset.is_one()));
        assert_eq!(lattice_points(&t).unwrap().len(), 10);
        let d = polar_dual(&t).unwrap();
        assert_eq!(d.vertices, pts(&[&[-1, -1], &[0, 1], &[1, 0]]));
        assert_eq!(polar_dual(&d).unwrap(), t);
    }

    #[test]
    fn not_reflexive_diamond() {
        let p = convex_hull(sp(2), &pts(&[&[1, 0], &[-1, 0], &[0, 2], &[0, -2]]), &[]).unwrap();
        assert!(!is_reflexive(&p));
    }

    #[test]
    fn segment_in_plane() {
        let s = convex_hull(sp(2), &pts(&[&[0, 0], &[2, 2], &[1, 1]]), &[]).unwrap();
        assert_eq!(s.dim, 1);
        assert_eq!(s.vertices.len(), 2);
        assert_eq!(s.equations.len(), 1);
        assert_eq!(s.facets.len(), 2);
        assert_eq!(lattice_points(&s).unwrap().len(), 3);
    }

    #[test]
    fn unbounded_halfstrip() {
        let p = convex_hull(sp(2), &pts(&[&[0, 0], &[1, 0]]), &[zvec(&[0, 1])]).unwrap();
        assert_eq!(p.rays, vec![zvec(&[0, 1])]);
        assert_eq!(p.facets.len(), 3);
        let fl = face_lattice(&p);
        assert_eq!(fl.f_vector(), vec![2, 3]);
    }

    #[test]
    fn halfspace_roundtrip() {
        let sq = convex_hull(sp(2), &pts(&[&[1, 1], &[-1, 1], &[1, -1], &[-1, -1]]), &[]).unwrap();
        let back = from_halfspaces(sp(2), &sq.facets, &sq.equations).unwrap();
        assert_eq!(back, sq);
    }

    #[test]
    fn elementary_simplices() {
        let s = |v: &[&[i64]]| convex_hull(sp(2), &pts(v), &[]).unwrap();
        assert!(is_elementary_simplex(&s(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap());
        assert!(!is_elementary_simplex(&s(&[&[0, 0], &[2, 1], &[1, 2]])).unwrap());
        assert!(!is_elementary_simplex(&s(&[&[0, 0], &[1, 0], &[1, 3]])).unwrap());
    }

    #[test]
    fn minkowski_segments() {
        let a = convex_hull(sp(1), &pts(&[&[0], &[1]]), &[]).unwrap();
        let b = convex_hull(sp(1), &pts(&[&[-1], &[0]]), &[]).unwrap();
        let s = minkowski_sum(&a, &b).unwrap();
        assert_eq!(s.vertices, pts(&[&[-1], &[1]]));
        let f = s.face_from_sets(vec![0], vec![]);
        let (fa, fb) = face_minkowski_decompose(&a, &b, &s, &f).unwrap();
        assert_eq!(a.vertices[fa.vertices[0]], pts(&[&[0]])[0]);
        assert_eq!(b.vertices[fb.vertices[0]], pts(&[&[-1]])[0]);
    }

    #[test]
    fn normal_cone_of_corner() {
        let sq = convex_hull(sp(2), &pts(&[&[1, 1], &[-1, 1], &[1, -1], &[-1, -1]]), &[]).unwrap();
        let f = sq.face_from_sets(vec![0], vec![]);
        assert_eq!(sq.vertices[0], pts(&[&[-1, -1]])[0]);
        let c = normal_cone(&sq, &f).unwrap();
        assert_eq!(c.rays, vec![zvec(&[0, 1]), zvec(&[1, 0])]);
        let whole = sq.face_from_sets(vec![0, 1, 2, 3], vec![]);
        assert_eq!(normal_cone(&sq, &whole).unwrap().dim, 0);
    }

    #[test]
    fn dual_face_of_vertex() {
        let sq = convex_hull(sp(2), &pts(&[&[1, 1], &[-1, 1], &[1, -1], &[-1, -1]]), &[]).unwrap();
        let d = polar_dual(&sq).unwrap();
        let v = d.face_from_sets(vec![0], vec![]);
        let e = dual_face(&sq, &d, &v).unwrap();
        assert_eq!(e.dim, 1);
    }
}
