//! Fans, piecewise linear functions, Newton polytopes and regular
//! subdivisions of cones.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};

use crate::geometry::dd::dd_cone;
use crate::geometry::linalg::*;
use crate::geometry::{
    convex_hull, face_lattice, Cone, Face, GeometryError, LatticeQuotient, LatticeSpace, Polyhedron,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FanError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("polyhedron is not full-dimensional")]
    NotFullDim,
    #[error("fan does not refine the normal fan")]
    NotRefining,
    #[error("function is not linear on cone {0}")]
    NotLinear(usize),
    #[error("function is not convex")]
    NotConvex,
    #[error("cone is not in the fan")]
    NotInFan,
    #[error("missing height for generator {0}")]
    MissingHeight(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    Complete,
    /// `{x : <u, x> >= 0}`
    HalfSpace(ZVec),
    Cone(Cone),
}

#[derive(Debug)]
pub struct FanCone {
    /// Sorted indices into the fan's ray table.
    pub rays: Vec<usize>,
    pub dim: usize,
    cone: OnceLock<Cone>,
}

impl Clone for FanCone {
    fn clone(&self) -> Self {
        let cone = OnceLock::new();
        if let Some(c) = self.cone.get() {
            let _ = cone.set(c.clone());
        }
        FanCone { rays: self.rays.clone(), dim: self.dim, cone }
    }
}

#[derive(Clone, Debug)]
pub struct Fan {
    pub space: LatticeSpace,
    pub rays: Vec<ZVec>,
    /// Common lineality space of all cones (empty for pointed fans).
    pub lineality: Vec<ZVec>,
    /// All cones, closed under taking faces, sorted by (dim, rays).
    pub cones: Vec<FanCone>,
    pub maximal: Vec<usize>,
    pub support: Support,
    /// For normal fans: the face of the polyhedron each cone is normal to.
    pub dual_faces: Option<Vec<Face>>,
    index: HashMap<Vec<usize>, usize>,
    walls: OnceLock<Vec<Wall>>,
}

/// A codimension-one cone together with the maximal cones on either side.
#[derive(Clone, Debug)]
pub struct Wall {
    pub cone: usize,
    pub sides: (usize, usize),
    pub interior_point: ZVec,
}

fn cone_faces(c: &Cone, ray_ids: &[usize], rays: &[ZVec]) -> Vec<Vec<usize>> {
    let tight: Vec<Vec<usize>> = c
        .facets
        .iter()
        .map(|f| ray_ids.iter().copied().filter(|&i| dot(f, &rays[i]).is_zero()).collect())
        .collect();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stack = vec![ray_ids.to_vec()];
    seen.insert(ray_ids.to_vec());
    while let Some(s) = stack.pop() {
        for t in &tight {
            let i: Vec<usize> = s.iter().copied().filter(|x| t.contains(x)).collect();
            if i.len() < s.len() && seen.insert(i.clone()) {
                stack.push(i);
            }
        }
    }
    seen.insert(vec![]);
    seen.into_iter().collect()
}

impl Fan {
    /// Builds the fan generated by the given maximal cones and all their faces.
    pub fn from_maximal(
        space: LatticeSpace,
        maximal: &[Vec<ZVec>],
        lineality: &[ZVec],
        support: Support,
    ) -> Fan {
        let mut rays: Vec<ZVec> = Vec::new();
        let mut ray_idx: HashMap<ZVec, usize> = HashMap::new();
        let mut max_sets = Vec::new();
        let mut max_cones = Vec::new();
        for gens in maximal {
            let c = Cone::new(space, gens, lineality);
            let mut ids: Vec<usize> = c
                .rays
                .iter()
                .map(|r| {
                    *ray_idx.entry(r.clone()).or_insert_with(|| {
                        rays.push(r.clone());
                        rays.len() - 1
                    })
                })
                .collect();
            ids.sort();
            max_sets.push(ids);
            max_cones.push(c);
        }
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (ids, c) in max_sets.iter().zip(&max_cones) {
            all.extend(cone_faces(c, ids, &rays));
        }
        let mut known: HashMap<Vec<usize>, Cone> = HashMap::new();
        for (ids, c) in max_sets.iter().zip(max_cones) {
            known.insert(ids.clone(), c);
        }
        Fan::assemble(space, rays, lineality.to_vec(), all.into_iter().collect(), Some(max_sets), known, support)
    }

    fn assemble(
        space: LatticeSpace,
        rays: Vec<ZVec>,
        lineality: Vec<ZVec>,
        sets: Vec<Vec<usize>>,
        max_sets: Option<Vec<Vec<usize>>>,
        mut known: HashMap<Vec<usize>, Cone>,
        support: Support,
    ) -> Fan {
        let mut cones: Vec<FanCone> = sets
            .into_iter()
            .map(|ids| {
                let mut rows: Vec<ZVec> = ids.iter().map(|&i| rays[i].clone()).collect();
                rows.extend(lineality.iter().cloned());
                let dim = rank(&rows);
                let cone = OnceLock::new();
                if let Some(c) = known.remove(&ids) {
                    let _ = cone.set(c);
                }
                FanCone { rays: ids, dim, cone }
            })
            .collect();
        cones.sort_by(|a, b| (a.dim, &a.rays).cmp(&(b.dim, &b.rays)));
        let index: HashMap<Vec<usize>, usize> = cones.iter().enumerate().map(|(i, c)| (c.rays.clone(), i)).collect();
        let maximal: Vec<usize> = match max_sets {
            Some(ms) => {
                let mut m: Vec<usize> = ms.iter().map(|s| index[s]).collect();
                m.sort();
                m.dedup();
                // drop listed cones that are faces of other listed cones
                let keep: Vec<usize> = m
                    .iter()
                    .copied()
                    .filter(|&i| {
                        !m.iter().any(|&j| {
                            j != i && cones[j].rays.len() > cones[i].rays.len() && is_subset(&cones[i].rays, &cones[j].rays)
                        })
                    })
                    .collect();
                keep
            }
            None => (0..cones.len())
                .filter(|&i| {
                    !cones.iter().any(|c| c.rays.len() > cones[i].rays.len() && is_subset(&cones[i].rays, &c.rays))
                })
                .collect(),
        };
        Fan { space, rays, lineality, cones, maximal, support, dual_faces: None, index, walls: OnceLock::new() }
    }

    pub fn cone(&self, i: usize) -> &Cone {
        let c = &self.cones[i];
        c.cone.get_or_init(|| {
            let gens: Vec<ZVec> = c.rays.iter().map(|&r| self.rays[r].clone()).collect();
            Cone::new(self.space, &gens, &self.lineality)
        })
    }

    pub fn find(&self, ray_set: &[usize]) -> Option<usize> {
        self.index.get(ray_set).copied()
    }

    /// Cone index for a set of generators given as vectors.
    pub fn find_by_rays(&self, gens: &[ZVec]) -> Option<usize> {
        let mut ids: Vec<usize> = gens
            .iter()
            .map(|g| self.rays.iter().position(|r| r == g))
            .collect::<Option<Vec<_>>>()?;
        ids.sort();
        ids.dedup();
        self.find(&ids)
    }

    pub fn ray_index(&self, r: &[Int]) -> Option<usize> {
        self.rays.iter().position(|x| x.as_slice() == r)
    }

    pub fn dim(&self) -> usize {
        self.maximal.iter().map(|&i| self.cones[i].dim).max().unwrap_or(0)
    }

    pub fn is_face_of(&self, a: usize, b: usize) -> bool {
        is_subset(&self.cones[a].rays, &self.cones[b].rays)
    }

    /// Maximal cones containing cone `i`.
    pub fn star(&self, i: usize) -> Vec<usize> {
        self.maximal.iter().copied().filter(|&m| self.is_face_of(i, m)).collect()
    }

    /// Cones containing cone `i`.
    pub fn containing(&self, i: usize) -> Vec<usize> {
        (0..self.cones.len()).filter(|&j| self.is_face_of(i, j)).collect()
    }

    pub fn cones_of_dim(&self, d: usize) -> Vec<usize> {
        (0..self.cones.len()).filter(|&i| self.cones[i].dim == d).collect()
    }

    /// Some maximal cone containing `x`.
    pub fn locate(&self, x: &[Int]) -> Option<usize> {
        self.maximal.iter().copied().find(|&m| self.cone(m).contains(x))
    }

    /// Smallest cone containing `x` in its relative interior.
    pub fn carrier(&self, x: &[Int]) -> Option<usize> {
        self.carrier_in(self.locate(x)?, x)
    }

    /// Smallest face of the maximal cone `m` containing `x`, which must lie in it.
    pub fn carrier_in(&self, m: usize, x: &[Int]) -> Option<usize> {
        let tight: Vec<&ZVec> = self.cone(m).facets.iter().filter(|f| dot(f, x).is_zero()).collect();
        let ids: Vec<usize> = self.cones[m]
            .rays
            .iter()
            .copied()
            .filter(|&r| tight.iter().all(|f| dot(f, &self.rays[r]).is_zero()))
            .collect();
        if let Some(c) = self.find(&ids) {
            return Some(c);
        }
        let mut best = m;
        for i in 0..self.cones.len() {
            if self.cones[i].dim < self.cones[best].dim && self.is_face_of(i, m) && self.cone(i).contains(x) {
                best = i;
            }
        }
        Some(best)
    }

    pub fn walls(&self) -> &[Wall] {
        self.walls.get_or_init(|| {
            let top = self.dim();
            let mut out = Vec::new();
            for w in 0..self.cones.len() {
                if self.cones[w].dim + 1 != top {
                    continue;
                }
                let st = self.star(w);
                if st.len() == 2 {
                    let mut p = vec![Int::zero(); self.space.rank];
                    for &r in &self.cones[w].rays {
                        p = add(&p, &self.rays[r]);
                    }
                    out.push(Wall { cone: w, sides: (st[0], st[1]), interior_point: p });
                }
            }
            out
        })
    }

    /// Codimension-one cones lying in a single maximal cone.
    pub fn boundary_walls(&self) -> Vec<usize> {
        let top = self.dim();
        (0..self.cones.len()).filter(|&w| self.cones[w].dim + 1 == top && self.star(w).len() == 1).collect()
    }

    /// Checks the pseudo-manifold condition relative to the support.
    pub fn covers_support(&self) -> bool {
        let d = self.space.rank;
        if self.maximal.iter().any(|&m| self.cones[m].dim != d) {
            return false;
        }
        let top = d;
        for w in 0..self.cones.len() {
            if self.cones[w].dim + 1 != top {
                continue;
            }
            let n = self.star(w).len();
            let on_boundary = match &self.support {
                Support::Complete => false,
                Support::HalfSpace(u) => self.cones[w].rays.iter().all(|&r| dot(u, &self.rays[r]).is_zero()),
                Support::Cone(c) => {
                    let p = self.cone(w).interior_point();
                    !c.relint_contains(&p)
                }
            };
            if n != if on_boundary { 1 } else { 2 } {
                return false;
            }
        }
        true
    }

    /// Every cone of `self` lies in a cone of `coarse`.
    pub fn refines(&self, coarse: &Fan) -> bool {
        (0..self.cones.len()).all(|i| {
            let p = self.cone(i).interior_point();
            let p = add(&p, &vec![Int::zero(); self.space.rank]);
            match coarse.carrier(&p) {
                Some(c) => self.cones[i].rays.iter().all(|&r| coarse.cone(c).contains(&self.rays[r])),
                None => false,
            }
        })
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "rays {}", self.rays.len()).unwrap();
        for (i, r) in self.rays.iter().enumerate() {
            writeln!(s, "{}: {}", i, fmt_vec(r)).unwrap();
        }
        writeln!(s, "cones {}", self.maximal.len()).unwrap();
        for &m in &self.maximal {
            writeln!(s, "{}", self.cones[m].rays.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
        }
        s
    }
}

pub fn fmt_vec(v: &[Int]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn fmt_qvec(v: &[Rat]) -> String {
    v.iter().map(fmt_rat).collect::<Vec<_>>().join(" ")
}

pub fn is_subset(a: &[usize], b: &[usize]) -> bool {
    crate::geometry::is_sorted_subset(a, b)
}

/// Normal fan of a polyhedron; cones record the face they are normal to.
pub fn normal_fan(p: &Polyhedron) -> Result<Fan, FanError> {
    let fl = face_lattice(p);
    let space = p.space.dual();
    let lineality: Vec<ZVec> = p.equations.iter().map(|e| e.normal.clone()).collect();
    let rays: Vec<ZVec> = p.facets.iter().map(|f| f.normal.clone()).collect();
    let mut sets = Vec::new();
    let mut faces = Vec::new();
    for f in fl.faces.iter().filter(|f| !f.is_empty()) {
        sets.push(p.facets_containing(&f.vertices, &f.rays));
        faces.push(f.clone());
    }
    let support = if p.is_bounded() {
        Support::Complete
    } else {
        let rec = Cone::new(p.space, &p.rays, &[]);
        let dual_gens = dd_cone(p.space.rank, &rec.rays).rays;
        Support::Cone(Cone::new(space, &dual_gens, &lineality))
    };
    let support = match support {
        Support::Cone(c) if c.facets.len() == 1 && c.rays.is_empty() => Support::HalfSpace(c.facets[0].clone()),
        s => s,
    };
    let vertex_sets: Vec<Vec<usize>> = fl.of_dim(0).iter().map(|&i| p.facets_containing(&fl.faces[i].vertices, &[])).collect();
    let mut fan = Fan::assemble(space, rays, lineality, sets.clone(), Some(vertex_sets), HashMap::new(), support);
    let mut dual = vec![Face { vertices: vec![], rays: vec![], dim: -1 }; fan.cones.len()];
    for (s, f) in sets.iter().zip(faces) {
        dual[fan.index[s]] = f;
    }
    fan.dual_faces = Some(dual);
    Ok(fan)
}

/// A function linear on each maximal cone of its fan.
#[derive(Clone, Debug)]
pub struct PlFunction {
    pub fan: Arc<Fan>,
    /// Slope per maximal cone, in the order of `fan.maximal`.
    pub slopes: Vec<QVec>,
}

impl PlFunction {
    pub fn from_slopes(fan: Arc<Fan>, slopes: Vec<QVec>) -> PlFunction {
        PlFunction { fan, slopes }
    }

    /// Solves for the slope on every maximal cone from values on the rays;
    /// the function is taken to vanish on the lineality space.
    pub fn from_ray_values(fan: Arc<Fan>, values: &[Rat]) -> Result<PlFunction, FanError> {
        let d = fan.space.rank;
        let mut slopes = Vec::new();
        for &m in &fan.maximal {
            let mut rows: Vec<QVec> = fan.cones[m].rays.iter().map(|&r| to_q(&fan.rays[r])).collect();
            let mut rhs: Vec<Rat> = fan.cones[m].rays.iter().map(|&r| values[r].clone()).collect();
            for l in &fan.lineality {
                rows.push(to_q(l));
                rhs.push(Rat::zero());
            }
            let s = solve(&rows, &rhs, d).ok_or(FanError::NotLinear(m))?;
            slopes.push(minimal_norm_solution(&rows, s, d));
        }
        Ok(PlFunction { fan, slopes })
    }

    pub fn zero(fan: Arc<Fan>) -> PlFunction {
        let d = fan.space.rank;
        let slopes = vec![vec![Rat::zero(); d]; fan.maximal.len()];
        PlFunction { fan, slopes }
    }

    pub fn slope_of(&self, max_cone: usize) -> &QVec {
        let k = self.fan.maximal.iter().position(|&m| m == max_cone).expect("maximal cone");
        &self.slopes[k]
    }

    pub fn value(&self, x: &[Int]) -> Option<Rat> {
        let m = self.fan.locate(x)?;
        Some(dot_zq(x, self.slope_of(m)))
    }

    pub fn value_q(&self, x: &[Rat]) -> Option<Rat> {
        let (den, w) = homogenize(x);
        Some(self.value(&w)? / Rat::from_integer(den))
    }

    pub fn ray_values(&self) -> Vec<Rat> {
        (0..self.fan.rays.len())
            .map(|r| {
                let k = self.fan.maximal.iter().position(|&m| self.fan.cones[m].rays.contains(&r)).unwrap();
                dot_zq(&self.fan.rays[r], &self.slopes[k])
            })
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.slopes.iter().all(|s| s.iter().all(|x| x.is_integer()))
            && self.ray_values().iter().all(|x| x.is_integer())
    }

    /// Slope differences across every interior wall in the order of
    /// `fan.walls()`, signed so that convexity means all are nonnegative.
    pub fn wall_jumps(&self) -> Vec<Rat> {
        self.fan
            .walls()
            .iter()
            .map(|w| {
                let (a, b) = w.sides;
                let ka = self.fan.maximal.iter().position(|&m| m == a).unwrap();
                let kb = self.fan.maximal.iter().position(|&m| m == b).unwrap();
                // a point of b off the wall
                let off = self.fan.cones[b]
                    .rays
                    .iter()
                    .find(|r| !self.fan.cones[w.cone].rays.contains(r))
                    .map(|&r| self.fan.rays[r].clone())
                    .expect("maximal cone has a ray off the wall");
                dot_zq(&off, &self.slopes[kb]) - dot_zq(&off, &self.slopes[ka])
            })
            .collect()
    }

    pub fn is_convex(&self) -> bool {
        self.wall_jumps().iter().all(|j| !j.is_negative())
    }

    /// First wall across which the function bends the wrong way.
    pub fn nonconvex_wall(&self) -> Option<&Wall> {
        let jumps = self.wall_jumps();
        self.fan.walls().iter().zip(jumps).find(|(_, j)| j.is_negative()).map(|(w, _)| w)
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.wall_jumps().iter().all(|j| j.is_positive())
    }

    pub fn add(&self, other: &PlFunction) -> Option<PlFunction> {
        if !Arc::ptr_eq(&self.fan, &other.fan) && self.fan.rays != other.fan.rays {
            return None;
        }
        let slopes = self.slopes.iter().zip(&other.slopes).map(|(a, b)| add_q(a, b)).collect();
        Some(PlFunction { fan: self.fan.clone(), slopes })
    }

    pub fn scaled(&self, c: &Rat) -> PlFunction {
        PlFunction { fan: self.fan.clone(), slopes: self.slopes.iter().map(|s| scale_q(c, s)).collect() }
    }

    /// Same function on a refinement of its fan.
    pub fn pullback(&self, fine: Arc<Fan>) -> Result<PlFunction, FanError> {
        let mut slopes = Vec::new();
        for &m in &fine.maximal {
            let p = fine.cone(m).interior_point();
            let c = self.fan.locate(&p).ok_or(FanError::NotRefining)?;
            slopes.push(self.slope_of(c).clone());
        }
        Ok(PlFunction { fan: fine, slopes })
    }

    /// Whether two functions agree everywhere on the common support.
    pub fn same_function(&self, other: &PlFunction) -> bool {
        let check = |a: &PlFunction, b: &PlFunction| {
            a.fan.rays.iter().all(|r| a.value(r) == b.value(r))
                && a.fan.maximal.iter().all(|&m| {
                    let p = a.fan.cone(m).interior_point();
                    a.value(&p) == b.value(&p)
                })
        };
        check(self, other) && check(other, self)
    }

    pub fn dump(&self) -> String {
        let mut s = self.fan.dump();
        for (i, v) in self.ray_values().iter().enumerate() {
            writeln!(s, "ray {}: {}", i, fmt_rat(v)).unwrap();
        }
        s
    }
}

/// Picks the solution orthogonal to the kernel so slopes are canonical on
/// lower-dimensional cones.
fn minimal_norm_solution(rows: &[QVec], s: QVec, d: usize) -> QVec {
    let ker = nullspace(rows, d);
    if ker.is_empty() {
        return s;
    }
    let gram: Vec<QVec> = ker.iter().map(|x| ker.iter().map(|y| dot_q(x, y)).collect()).collect();
    let rhs: Vec<Rat> = ker.iter().map(|x| dot_q(x, &s)).collect();
    let t = solve(&gram, &rhs, ker.len()).unwrap();
    let mut s = s;
    for (ti, k) in t.iter().zip(&ker) {
        s = sub_q(&s, &scale_q(ti, k));
    }
    s
}

/// `g(n) = -min_{x in P} <x, n>` as a function on `fan`.
pub fn support_function(p: &Polyhedron, fan: Arc<Fan>) -> Result<PlFunction, FanError> {
    let mut slopes = Vec::new();
    let ray_min: Vec<Option<Rat>> = fan.rays.iter().map(|r| p.min_value(r)).collect();
    for &m in &fan.maximal {
        let x = fan.cone(m).interior_point();
        let best = p.min_value(&x).ok_or(FanError::NotRefining)?;
        let v = p.vertices.iter().find(|v| dot_zq(&x, v) == best).ok_or(FanError::NotRefining)?;
        for &r in &fan.cones[m].rays {
            if Some(dot_zq(&fan.rays[r], v)) != ray_min[r] {
                return Err(FanError::NotRefining);
            }
        }
        slopes.push(v.iter().map(|x| -x).collect());
    }
    Ok(PlFunction { fan, slopes })
}

fn support_dual_rays(fan: &Fan) -> Vec<ZVec> {
    match &fan.support {
        Support::Complete => vec![],
        Support::HalfSpace(u) => vec![u.clone()],
        Support::Cone(c) => {
            let mut cons: Vec<ZVec> = c.rays.clone();
            for l in &c.lineality {
                cons.push(l.clone());
                cons.push(neg(l));
            }
            dd_cone(fan.space.rank, &cons).rays
        }
    }
}

/// `{m : <m, n> >= -g(n) for all n in the support}`.
pub fn newton_polytope(g: &PlFunction) -> Result<Polyhedron, FanError> {
    if !g.is_convex() {
        return Err(FanError::NotConvex);
    }
    let pts: Vec<QVec> = g.slopes.iter().map(|s| s.iter().map(|x| -x).collect()).collect();
    let rays = support_dual_rays(&g.fan);
    Ok(convex_hull(g.fan.space.dual(), &pts, &rays)?)
}

/// Coarsest fan on whose cones `g` is linear.
pub fn linearity_fan(g: &PlFunction) -> Result<Fan, FanError> {
    normal_fan(&newton_polytope(g)?)
}

/// Fan of a quotient by the span of one of its cones.
#[derive(Clone, Debug)]
pub struct QuotientFan {
    pub fan: Arc<Fan>,
    pub quotient: LatticeQuotient,
    /// The cone of the original fan each quotient cone comes from.
    pub source: Vec<usize>,
}

pub fn quotient_fan(f: &Fan, tau: usize) -> Result<QuotientFan, FanError> {
    if tau >= f.cones.len() {
        return Err(FanError::NotInFan);
    }
    let mut span: Vec<ZVec> = f.cones[tau].rays.iter().map(|&r| f.rays[r].clone()).collect();
    span.extend(f.lineality.iter().cloned());
    let q = LatticeQuotient::new(f.space.rank, &span);
    let space = LatticeSpace::new(q.rank(), f.space.side);
    let mut rays: Vec<ZVec> = Vec::new();
    let mut sets = Vec::new();
    let mut source = Vec::new();
    for i in f.containing(tau) {
        let mut ids = Vec::new();
        for &r in &f.cones[i].rays {
            if f.cones[tau].rays.contains(&r) {
                continue;
            }
            let img = primitive(q.project(&f.rays[r]));
            let k = match rays.iter().position(|x| *x == img) {
                Some(k) => k,
                None => {
                    rays.push(img);
                    rays.len() - 1
                }
            };
            ids.push(k);
        }
        ids.sort();
        sets.push(ids);
        source.push(i);
    }
    let support = match f.support {
        Support::Complete => Support::Complete,
        _ => {
            let gens: Vec<ZVec> = rays.clone();
            Support::Cone(Cone::new(space, &gens, &[]))
        }
    };
    let fan = Fan::assemble(space, rays, vec![], sets.clone(), None, HashMap::new(), support);
    let source = (0..fan.cones.len()).map(|i| source[sets.iter().position(|s| *s == fan.cones[i].rays).unwrap()]).collect();
    Ok(QuotientFan { fan: Arc::new(fan), quotient: q, source })
}

/// Result of descending a PL function along a cone it is linear on.
#[derive(Clone, Debug)]
pub struct Descended {
    pub function: PlFunction,
    pub quotient: QuotientFan,
    /// The linear function subtracted before descending.
    pub shift: QVec,
}

/// The linear functional agreeing with `g` on cone `tau`, normalized to have
/// zero coordinates along the quotient directions of the Hermite basis.
pub fn canonical_shift(g: &PlFunction, tau: usize, q: &LatticeQuotient) -> Result<QVec, FanError> {
    let f = &g.fan;
    let st = f.star(tau);
    let s0 = g.slope_of(st[0]);
    let mut span: Vec<ZVec> = f.cones[tau].rays.iter().map(|&r| f.rays[r].clone()).collect();
    span.extend(f.lineality.iter().cloned());
    for &m in &st[1..] {
        let s = g.slope_of(m);
        if span.iter().any(|v| dot_zq(v, s) != dot_zq(v, s0)) {
            return Err(FanError::NotLinear(tau));
        }
    }
    // coordinates in the dual of the basis (span lattice basis, quotient lifts)
    let d = f.space.rank;
    let cols = complete_basis(q, d);
    let mut coeffs: Vec<Rat> = cols.iter().map(|c| dot_zq(c, s0)).collect();
    for c in coeffs.iter_mut().skip(q.span_rank) {
        *c = Rat::zero();
    }
    // m with <m, cols[k]> = coeffs[k]
    let rows: Vec<QVec> = cols.iter().map(|c| to_q(c)).collect();
    Ok(solve(&rows, &coeffs, d).expect("basis is invertible"))
}

/// Lattice basis whose first vectors span the saturated sublattice and the
/// rest lift the quotient basis.
fn complete_basis(q: &LatticeQuotient, d: usize) -> Vec<ZVec> {
    let mut m: Vec<ZVec> = Vec::new();
    let u_rest = &q.map;
    // Columns of U^{-1}: the first r span the sublattice.
    let full = {
        let mut rows: Vec<ZVec> = Vec::new();
        let sub = nullspace_z(u_rest, d);
        rows.extend(sub);
        rows
    };
    // reduce the sublattice part to a lattice basis
    let sat = saturated_basis(&full, d);
    m.extend(sat);
    m.extend(q.basis.iter().cloned());
    m
}

/// Lattice basis of `span(v) ∩ Z^d`.
pub fn saturated_basis(v: &[ZVec], d: usize) -> Vec<ZVec> {
    if v.is_empty() {
        return vec![];
    }
    let q = LatticeQuotient::new(d, v);
    let cols: Vec<ZVec> = (0..d).map(|i| v.iter().map(|g| g[i].clone()).collect()).collect();
    let (u, _) = crate::geometry::hnf_with_transform(&cols);
    let uinv = inverse_q(&u.iter().map(|x| to_q(x)).collect::<Vec<_>>()).unwrap();
    (0..q.span_rank).map(|k| (0..d).map(|i| uinv[i][k].to_integer()).collect()).collect()
}

pub fn descend_pl(g: &PlFunction, tau: usize) -> Result<Descended, FanError> {
    let quotient = quotient_fan(&g.fan, tau)?;
    let shift = canonical_shift(g, tau, &quotient.quotient)?;
    let qf = &quotient.fan;
    let mut slopes = Vec::new();
    for &m in &qf.maximal {
        let src = quotient.source[m];
        let big = g.fan.star(src)[0];
        let s = sub_q(g.slope_of(big), &shift);
        slopes.push(quotient.quotient.basis.iter().map(|b| dot_zq(b, &s)).collect());
    }
    Ok(Descended { function: PlFunction { fan: qf.clone(), slopes }, quotient, shift })
}

/// Coarse and fine fan with the smallest coarse cone containing each fine cone.
#[derive(Clone, Debug)]
pub struct SubdivisionCertificate {
    pub coarse: Arc<Fan>,
    pub fine: Arc<Fan>,
    pub containment: Vec<usize>,
}

pub fn certify_subdivision(coarse: Arc<Fan>, fine: Arc<Fan>) -> Option<SubdivisionCertificate> {
    let mut containment = Vec::new();
    let interior = |i: usize| -> ZVec {
        fine.cones[i].rays.iter().fold(vec![Int::zero(); fine.space.rank], |acc, &r| add(&acc, &fine.rays[r]))
    };
    let mut coarse_of_max: HashMap<usize, usize> = HashMap::new();
    for &m in &fine.maximal {
        coarse_of_max.insert(m, coarse.locate(&interior(m))?);
    }
    for i in 0..fine.cones.len() {
        let p = interior(i);
        let m = fine.maximal.iter().find(|&&m| fine.is_face_of(i, m))?;
        let big = coarse.cone(coarse_of_max[m]);
        let c = if big.contains(&p) {
            // the carrier is the face of `big` cut out by the facets through p
            let tight: Vec<&ZVec> = big.facets.iter().filter(|f| dot(f, &p).is_zero()).collect();
            let inside = fine.cones[i].rays.iter().all(|&r| {
                let x = &fine.rays[r];
                big.contains(x) && tight.iter().all(|f| dot(f, x).is_zero())
            });
            if !inside {
                return None;
            }
            coarse.carrier_in(coarse_of_max[m], &p)?
        } else {
            let c = coarse.carrier(&p)?;
            if !fine.cones[i].rays.iter().all(|&r| coarse.cone(c).contains(&fine.rays[r])) {
                return None;
            }
            c
        };
        containment.push(c);
    }
    // each coarse maximal cone is filled: interior walls of the fine fan
    // inside it have two sides, and fine boundary walls lie on coarse walls
    for w in 0..fine.cones.len() {
        if fine.cones[w].dim + 1 != fine.space.rank {
            continue;
        }
        let n = fine.star(w).len();
        let inside_coarse_max = coarse.cones[containment[w]].dim == coarse.space.rank;
        if inside_coarse_max && n != 2 {
            return None;
        }
    }
    Some(SubdivisionCertificate { coarse, fine, containment })
}

/// Lower hull of lifted generators over a cone.
#[derive(Clone, Debug)]
pub struct RegularSubdivision {
    pub certificate: SubdivisionCertificate,
    pub function: PlFunction,
    /// Indices (generators first, then interior points) not used as rays.
    pub unused: Vec<usize>,
}

pub fn regular_subdivision(
    rho: &Cone,
    boundary_heights: &BTreeMap<ZVec, Rat>,
    interior_points: &[(ZVec, Rat)],
) -> Result<RegularSubdivision, FanError> {
    let d = rho.space.rank;
    let mut gens: Vec<(ZVec, Rat)> = Vec::new();
    for (i, r) in rho.rays.iter().enumerate() {
        let h = boundary_heights.get(r).ok_or(FanError::MissingHeight(i))?;
        gens.push((r.clone(), h.clone()));
    }
    for (p, h) in interior_points {
        gens.push((primitive(p.clone()), h.clone()));
    }
    let lifted: Vec<ZVec> = gens
        .iter()
        .map(|(g, h)| {
            let den = h.denom().clone();
            let mut v = scale(&den, g);
            v.push(h.numer().clone());
            v
        })
        .collect();
    let mut up = vec![Int::zero(); d + 1];
    up[d] = Int::one();
    let mut all = lifted.clone();
    all.push(up);
    let lin: Vec<ZVec> = rho.lineality.iter().map(|l| {
        let mut v = l.clone();
        v.push(Int::zero());
        v
    }).collect();
    let lifted_space = LatticeSpace::new(d + 1, rho.space.side);
    let big = Cone::new(lifted_space, &all, &lin);
    let mut used = BTreeSet::new();
    let mut cells: Vec<Vec<ZVec>> = Vec::new();
    for f in &big.facets {
        if !f[d].is_positive() {
            continue;
        }
        let tight: Vec<usize> = (0..gens.len()).filter(|&i| dot(f, &lifted[i]).is_zero()).collect();
        let extreme: Vec<usize> = tight
            .iter()
            .copied()
            .filter(|&i| big.rays.contains(&primitive(lifted[i].clone())))
            .collect();
        used.extend(extreme.iter().copied());
        cells.push(extreme.iter().map(|&i| gens[i].0.clone()).collect());
    }
    let unused: Vec<usize> = (0..gens.len()).filter(|i| !used.contains(i)).collect();
    let support = Support::Cone(rho.clone());
    let fine = Arc::new(Fan::from_maximal(rho.space, &cells, &rho.lineality, support.clone()));
    let mut values = vec![Rat::zero(); fine.rays.len()];
    for (i, r) in fine.rays.iter().enumerate() {
        let k = (0..gens.len()).find(|&k| gens[k].0 == *r && used.contains(&k)).expect("fine ray is a used generator");
        values[i] = gens[k].1.clone();
    }
    let function = PlFunction::from_ray_values(fine.clone(), &values)?;
    let coarse = Arc::new(Fan::from_maximal(rho.space, &[rho.rays.clone()], &rho.lineality, support));
    let certificate = certify_subdivision(coarse, fine).ok_or(FanError::NotRefining)?;
    Ok(RegularSubdivision { certificate, function, unused })
}

/// Parses `ray i: value` lines into values indexed by ray.
pub fn parse_ray_values(src: &str, n: usize) -> Result<Vec<Rat>, FanError> {
    let mut out = vec![None; n];
    for line in src.lines() {
        let line = line.split('#').next().unwrap().trim();
        let Some(rest) = line.strip_prefix("ray ") else { continue };
        let (i, v) = rest.split_once(':').ok_or_else(|| FanError::Parse(line.into()))?;
        let i: usize = i.trim().parse().map_err(|_| FanError::Parse(line.into()))?;
        let v = parse_rat(v).ok_or_else(|| FanError::Parse(line.into()))?;
        if i >= n {
            return Err(FanError::Parse(format!("ray index {} out of range", i)));
        }
        out[i] = Some(v);
    }
    out.into_iter().enumerate().map(|(i, v)| v.ok_or(FanError::MissingHeight(i))).collect()
}
