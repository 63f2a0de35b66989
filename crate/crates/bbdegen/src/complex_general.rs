//! Complexes subdivided by heights: lifted polytopes and fans, good
//! subdivisions, the dual good data and the checks tying the two sides
//! together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::complex::{chart_cone, chart_fan, project_rays, AffineComplex, ComplexError, ComplexSide, VertexChart};
use crate::fans::{
    certify_subdivision, descend_pl, fmt_vec, newton_polytope, normal_fan, regular_subdivision, support_function, Fan,
    FanError, PlFunction, Support,
};
use crate::geometry::linalg::*;
use crate::geometry::{
    convex_hull, from_halfspaces, is_elementary_simplex, lattice_points, minkowski_sum, minkowski_sum_all,
    GeometryError, Halfspace, LatticeQuotient, LatticeSpace, Polyhedron,
};
use crate::io::HeightEntry;
use crate::nef::NefPartition;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HeightError {
    #[error("ray ({0}) is not primitive")]
    NotPrimitive(String),
    #[error("ray ({0}) does not cut out a facet")]
    UnusedRay(String),
    #[error("value on ray ({0}) is not attained")]
    ValueMismatch(String),
    #[error("height polytope is not a lattice polytope")]
    NonIntegral,
    #[error("height fan does not refine the normal fan")]
    NotRefining,
    #[error("h - phi is not convex across the wall spanned by {0}")]
    NotConvex(String),
    #[error("no convex placing heights found")]
    PlacingFailed,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// A strictly convex function `h` on a refinement of the normal fan of
/// delta, given by its values on rays.
#[derive(Clone, Debug)]
pub struct SideHeights {
    pub entries: Vec<HeightEntry>,
    /// `delta^h = {m : <m, n> >= -h(n)}`.
    pub polytope: Polyhedron,
    pub fan: Arc<Fan>,
    pub function: PlFunction,
    /// `h - phi` on the same fan.
    pub prime: PlFunction,
    pub prime_polytope: Polyhedron,
}

fn wall_name(fan: &Fan, w: usize) -> String {
    fan.cones[w].rays.iter().map(|&r| format!("({})", fmt_vec(&fan.rays[r]))).collect::<Vec<_>>().join(" ")
}

impl SideHeights {
    pub fn new(np: &NefPartition, entries: &[HeightEntry]) -> Result<SideHeights, HeightError> {
        let mut ineqs = Vec::new();
        for (n, v) in entries {
            if primitive(n.clone()) != *n || is_zero(n) {
                return Err(HeightError::NotPrimitive(fmt_vec(n)));
            }
            ineqs.push(Halfspace { normal: n.clone(), offset: v.clone() });
        }
        let polytope = from_halfspaces(np.delta.space, &ineqs, &[])?;
        for (n, v) in entries {
            match polytope.facets.iter().find(|f| f.normal == *n) {
                None => return Err(HeightError::UnusedRay(fmt_vec(n))),
                Some(f) if f.offset != *v => return Err(HeightError::ValueMismatch(fmt_vec(n))),
                _ => {}
            }
        }
        if polytope.integral_vertices().is_none() {
            return Err(HeightError::NonIntegral);
        }
        let fan = Arc::new(normal_fan(&polytope)?);
        if !fan.refines(&np.sigma) {
            return Err(HeightError::NotRefining);
        }
        let function = support_function(&polytope, fan.clone())?;
        let phi = np.phi.pullback(fan.clone())?;
        let prime = function.add(&phi.scaled(&-Rat::one())).expect("same fan");
        if let Some(w) = prime.nonconvex_wall() {
            return Err(HeightError::NotConvex(wall_name(&fan, w.cone)));
        }
        let prime_polytope = newton_polytope(&prime)?;
        let mut entries = entries.to_vec();
        entries.sort();
        Ok(SideHeights { entries, polytope, fan, function, prime, prime_polytope })
    }

    /// `h = phi`.
    pub fn anticanonical(np: &NefPartition) -> Result<SideHeights, HeightError> {
        let entries: Vec<HeightEntry> =
            np.delta_star.vertices.iter().map(|v| (to_z(v).expect("lattice polytope"), Rat::one())).collect();
        SideHeights::new(np, &entries)
    }

    pub fn is_anticanonical(&self) -> bool {
        self.prime.slopes.iter().all(|s| s.iter().all(|x| x.is_zero()))
    }

    /// Linearity fan of `h'`.
    pub fn prime_fan(&self) -> Result<Fan, FanError> {
        normal_fan(&self.prime_polytope)
    }

    /// Every maximal cone is spanned by points of the boundary of delta*
    /// forming an elementary simplex.
    pub fn is_mpcp(&self, np: &NefPartition) -> bool {
        self.fan.maximal.iter().all(|&m| {
            let c = &self.fan.cones[m];
            if c.rays.len() != c.dim {
                return false;
            }
            let pts: Vec<QVec> = c.rays.iter().map(|&r| to_q(&self.fan.rays[r])).collect();
            if pts.iter().any(|p| !np.phi_value(p).is_one()) {
                return false;
            }
            convex_hull(np.delta_star.space, &pts, &[]).ok().and_then(|s| is_elementary_simplex(&s).ok()) == Some(true)
        })
    }
}

/// Pulling heights `K - 2^(N - 1 - k)` on the nonzero lattice points of
/// delta*, in lexicographic order unless an order is given; `K` is doubled
/// until the heights are accepted.
pub fn placing_heights(np: &NefPartition, order: Option<&[ZVec]>) -> Result<SideHeights, HeightError> {
    let pts: Vec<ZVec> = match order {
        Some(o) => o.to_vec(),
        None => lattice_points(&np.delta_star)?.into_iter().filter(|p| !is_zero(p)).collect(),
    };
    let count = pts.len();
    let two = Int::from(2);
    let lowering: Vec<Int> = (0..count).map(|k| num_traits::pow(two.clone(), count - 1 - k)).collect();
    let mut big = num_traits::pow(two.clone(), count + 1);
    for _ in 0..64 {
        let entries: Vec<HeightEntry> =
            pts.iter().zip(&lowering).map(|(p, c)| (p.clone(), Rat::from_integer(&big - c))).collect();
        match SideHeights::new(np, &entries) {
            Ok(s) => return Ok(s),
            Err(HeightError::NotConvex(_)) | Err(HeightError::NotRefining) => big *= &two,
            Err(e) => return Err(e),
        }
    }
    Err(HeightError::PlacingFailed)
}

/// Heights on both sides: `h` on the `N` side, `check_h` on the `M` side.
#[derive(Clone, Debug)]
pub struct HeightData {
    pub h: SideHeights,
    pub check_h: SideHeights,
}

impl HeightData {
    /// `None` on a side stands for the anticanonical choice.
    pub fn new(
        np: &NefPartition,
        h: Option<&[HeightEntry]>,
        check_h: Option<&[HeightEntry]>,
    ) -> Result<HeightData, ComplexError> {
        let dual = np.swap_sides()?;
        let h = match h {
            Some(e) => SideHeights::new(np, e)?,
            None => SideHeights::anticanonical(np)?,
        };
        let check_h = match check_h {
            Some(e) => SideHeights::new(&dual, e)?,
            None => SideHeights::anticanonical(&dual)?,
        };
        Ok(HeightData { h, check_h })
    }

    pub fn anticanonical(np: &NefPartition) -> Result<HeightData, ComplexError> {
        HeightData::new(np, None, None)
    }

    /// The same data seen from the dual partition.
    pub fn swapped(&self) -> HeightData {
        HeightData { h: self.check_h.clone(), check_h: self.h.clone() }
    }
}

fn lift_halfspace(h: &Halfspace) -> Halfspace {
    let mut normal = h.normal.clone();
    normal.push(Int::zero());
    Halfspace { normal, offset: h.offset.clone() }
}

fn lift_point(x: &[Int], level: i64) -> ZVec {
    let mut v = x.to_vec();
    v.push(Int::from(level));
    v
}

fn level_of(v: &[Int]) -> &Int {
    v.last().expect("lifted vector")
}

fn lifted_space(p: &Polyhedron) -> LatticeSpace {
    LatticeSpace::new(p.space.rank + 1, p.space.side)
}

/// `{(x, l) : x in base, <(x, l), (v, 1)> >= 0 for v in upper}`.
fn lift_over(base: &Polyhedron, upper: &[Halfspace]) -> Result<Polyhedron, GeometryError> {
    let mut ineqs: Vec<Halfspace> = base.facets.iter().map(lift_halfspace).collect();
    ineqs.extend(upper.iter().cloned());
    let eqs: Vec<Halfspace> = base.equations.iter().map(lift_halfspace).collect();
    from_halfspaces(lifted_space(base), &ineqs, &eqs)
}

/// `{(x, l) : x in base, l >= g(x, 1)}` for a convex `g` on the lifted space.
pub fn epigraph(base: &Polyhedron, g: &PlFunction) -> Result<Polyhedron, GeometryError> {
    let d = base.space.rank;
    let mut upper = Vec::new();
    for s in &g.slopes {
        let mut row: QVec = s[..d].iter().map(|x| -x).collect();
        row.push(Rat::one());
        let (den, normal) = homogenize(&row);
        upper.push(Halfspace { normal, offset: -&s[d] * Rat::from_integer(den) });
    }
    upper.sort();
    upper.dedup();
    lift_over(base, &upper)
}

/// Lifted parts `{(m, l) : m in delta_i, l >= check_h'(m)}`, their sum and
/// its normal fan with the lifted support functions.
#[derive(Clone, Debug)]
pub struct LiftedData {
    pub parts: Vec<Polyhedron>,
    pub total: Polyhedron,
    pub fan: Arc<Fan>,
    pub phi: PlFunction,
    pub phi_parts: Vec<PlFunction>,
}

impl LiftedData {
    pub fn new(np: &NefPartition, hd: &HeightData) -> Result<LiftedData, ComplexError> {
        let upper: Vec<Halfspace> = hd
            .check_h
            .prime_polytope
            .vertices
            .iter()
            .map(|v| {
                let (den, mut normal) = homogenize(v);
                normal.push(den);
                Halfspace { normal, offset: Rat::zero() }
            })
            .collect();
        let parts: Vec<Polyhedron> = np.parts.iter().map(|p| lift_over(p, &upper)).collect::<Result<_, _>>()?;
        let total = lift_over(&np.delta, &upper)?;
        if minkowski_sum_all(&parts)? != total {
            return Err(ComplexError::Other("lifted delta is not the sum of the lifted parts".into()));
        }
        let fan = Arc::new(normal_fan(&total)?);
        let phi = support_function(&total, fan.clone())?;
        let phi_parts: Vec<PlFunction> =
            parts.iter().map(|p| support_function(p, fan.clone())).collect::<Result<_, _>>()?;
        let mut sum = PlFunction::zero(fan.clone());
        for f in &phi_parts {
            sum = sum.add(f).expect("same fan");
        }
        if !sum.same_function(&phi) {
            return Err(ComplexError::Other("lifted phi is not the sum of its parts".into()));
        }
        for (r, v) in fan.rays.iter().zip(phi.ray_values()) {
            let expected = if level_of(r).is_zero() { Rat::one() } else { Rat::zero() };
            if !level_of(r).is_zero() && !level_of(r).is_one() || v != expected {
                return Err(ComplexError::Other(format!("lifted phi takes {} on ray ({})", fmt_rat(&v), fmt_vec(r))));
            }
        }
        Ok(LiftedData { parts, total, fan, phi, phi_parts })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    /// Inside the level-zero hyperplane (type I).
    Horizontal,
    /// Rays on both levels (type II).
    Mixed,
    /// Only rays of positive level (type III).
    Upper,
}

impl ConeKind {
    pub fn label(self) -> &'static str {
        match self {
            ConeKind::Horizontal => "I",
            ConeKind::Mixed => "II",
            ConeKind::Upper => "III",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConeClass {
    pub kind: ConeKind,
    pub relevant: bool,
    /// Rays at level zero.
    pub base: Vec<usize>,
    /// Rays at positive level.
    pub upper: Vec<usize>,
}

/// A subdivision of the lifted fan with a function on it.
#[derive(Clone, Debug)]
pub struct GoodData {
    pub fan: Arc<Fan>,
    pub h: PlFunction,
    pub h_prime: PlFunction,
    pub phi: PlFunction,
    pub phi_parts: Vec<PlFunction>,
    pub classes: Vec<ConeClass>,
}

fn base_point(r: &[Int]) -> QVec {
    to_q(&r[..r.len() - 1])
}

impl GoodData {
    pub fn new(np: &NefPartition, ld: &LiftedData, fan: Arc<Fan>, h: PlFunction) -> Result<GoodData, ComplexError> {
        let phi = ld.phi.pullback(fan.clone())?;
        let phi_parts: Vec<PlFunction> =
            ld.phi_parts.iter().map(|f| f.pullback(fan.clone())).collect::<Result<_, _>>()?;
        let h_prime = h.add(&phi.scaled(&-Rat::one())).ok_or_else(|| ComplexError::Other("h is on another fan".into()))?;
        let mut classes = Vec::with_capacity(fan.cones.len());
        for c in &fan.cones {
            let (base, upper): (Vec<usize>, Vec<usize>) = c.rays.iter().partition(|&&r| level_of(&fan.rays[r]).is_zero());
            let kind = match (base.is_empty(), upper.is_empty()) {
                (_, true) => ConeKind::Horizontal,
                (true, false) => ConeKind::Upper,
                (false, false) => ConeKind::Mixed,
            };
            let relevant = kind == ConeKind::Mixed
                && (0..np.r()).all(|i| {
                    base.iter().any(|&r| {
                        let n = base_point(&fan.rays[r]);
                        let f = np.phi_value(&n);
                        f.is_positive() && np.phi_i(i, &n) == f
                    })
                });
            classes.push(ConeClass { kind, relevant, base, upper });
        }
        Ok(GoodData { fan, h, h_prime, phi, phi_parts, classes })
    }

    /// `(lifted fan, lifted phi)`, good for `h = phi`.
    pub fn trivial(np: &NefPartition, ld: &LiftedData) -> Result<GoodData, ComplexError> {
        GoodData::new(np, ld, ld.fan.clone(), ld.phi.clone())
    }

    pub fn relevant(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&i| self.classes[i].relevant).collect()
    }

    pub fn dump(&self) -> String {
        let mut s = self.h.dump();
        writeln!(s, "classes {}", self.classes.len()).unwrap();
        for (i, c) in self.classes.iter().enumerate() {
            let rays = self.fan.cones[i].rays.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            writeln!(s, "cone {} [{}] type {}{}", i, rays, c.kind.label(), if c.relevant { " relevant" } else { "" })
                .unwrap();
        }
        s
    }
}

#[derive(Clone, Debug, Default)]
pub struct GoodReport {
    pub problems: Vec<String>,
}

impl GoodReport {
    pub fn is_good(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks the conditions for `gd` to be good for the heights `hd.h`.
pub fn is_good(hd: &HeightData, ld: &LiftedData, gd: &GoodData) -> GoodReport {
    let mut problems = Vec::new();
    let fan = &gd.fan;
    if certify_subdivision(ld.fan.clone(), fan.clone()).is_none() {
        problems.push("fan does not subdivide the lifted fan".into());
    }
    for r in &fan.rays {
        let l = level_of(r);
        if l.is_zero() {
            continue;
        }
        if !l.is_one() {
            problems.push(format!("new ray ({}) not at level 1", fmt_vec(r)));
        } else if !hd.check_h.prime_polytope.contains(&base_point(r)) {
            problems.push(format!("new ray ({}) outside the upper polytope", fmt_vec(r)));
        }
    }
    let n = fan.space.rank - 1;
    let slice: BTreeSet<Vec<ZVec>> = (0..fan.cones.len())
        .filter(|&c| gd.classes[c].kind == ConeKind::Horizontal && fan.cones[c].dim == n)
        .map(|c| {
            let mut v: Vec<ZVec> = fan.cones[c].rays.iter().map(|&r| fan.rays[r][..n].to_vec()).collect();
            v.sort();
            v
        })
        .collect();
    let expected: BTreeSet<Vec<ZVec>> = hd
        .h
        .fan
        .maximal
        .iter()
        .map(|&m| {
            let mut v: Vec<ZVec> = hd.h.fan.cones[m].rays.iter().map(|&r| hd.h.fan.rays[r].clone()).collect();
            v.sort();
            v
        })
        .collect();
    if slice != expected {
        problems.push("level-zero slice differs from the height fan".into());
    }
    for (r, v) in fan.rays.iter().zip(gd.h.ray_values()) {
        if level_of(r).is_zero() && hd.h.function.value(&r[..n]) != Some(v.clone()) {
            problems.push(format!("value {} on ray ({}) differs from h", fmt_rat(&v), fmt_vec(r)));
        }
    }
    if !gd.h.is_integral() {
        problems.push("function is not integral".into());
    }
    if !gd.h.is_strictly_convex() {
        problems.push("function is not strictly convex".into());
    }
    if let Some(w) = gd.h_prime.nonconvex_wall() {
        problems.push(format!("h - phi is not convex across {}", wall_name(fan, w.cone)));
    }
    GoodReport { problems }
}

/// `beta(sigma) + tau` for a relevant cone `C(sigma) x {0} + C(tau x {1})`.
pub fn cell_of(np: &NefPartition, gd: &GoodData, rho: usize) -> Result<Polyhedron, ComplexError> {
    Ok(minkowski_sum_all(&cell_summands(np, gd, rho)?)?)
}

/// The summands `beta_1(sigma), ..., beta_r(sigma), tau` of the cell of a
/// relevant cone.
pub fn cell_summands(np: &NefPartition, gd: &GoodData, rho: usize) -> Result<Vec<Polyhedron>, ComplexError> {
    let class = &gd.classes[rho];
    if !class.relevant {
        return Err(ComplexError::Other(format!("cone {} is not relevant", rho)));
    }
    let space = np.delta_star.space;
    let mut groups: Vec<Vec<QVec>> = vec![Vec::new(); np.r()];
    for &k in &class.base {
        let n = base_point(&gd.fan.rays[k]);
        let f = np.phi_value(&n);
        for (i, g) in groups.iter_mut().enumerate() {
            if np.phi_i(i, &n) == f {
                g.push(scale_q(&f.recip(), &n));
            }
        }
    }
    let tau: Vec<QVec> = class
        .upper
        .iter()
        .map(|&k| {
            let r = &gd.fan.rays[k];
            scale_q(&Rat::from_integer(level_of(r).clone()).recip(), &base_point(r))
        })
        .collect();
    groups.push(tau);
    Ok(groups.iter().map(|g| convex_hull(space, g, &[])).collect::<Result<_, _>>()?)
}

/// The complex of cells of all relevant cones, with charts and covectors.
/// All arguments are for the side being built.
pub fn build_complex_general(
    np: &NefPartition,
    hd: &HeightData,
    gd: &GoodData,
    side: ComplexSide,
) -> Result<AffineComplex, ComplexError> {
    let n = np.rank();
    let r = np.r();
    let raw: Vec<(Polyhedron, usize)> =
        gd.relevant().into_iter().map(|rho| Ok((cell_of(np, gd, rho)?, rho))).collect::<Result<_, ComplexError>>()?;
    let fan = gd.fan.clone();
    let mut ac = AffineComplex::assemble(side, n, r, raw, |a, b| fan.is_face_of(a, b));
    let outer = &hd.check_h.polytope;
    for (c, cell) in ac.cells.iter().enumerate() {
        if !outer.facets.iter().any(|f| cell.polytope.vertices.iter().all(|v| f.eval(v).is_zero())) {
            return Err(ComplexError::Other(format!("cell {} is not on the boundary", c)));
        }
    }
    for &v in &ac.by_dim[0].clone() {
        let class = &gd.classes[ac.cells[v].origin];
        let mut decomposition = vec![Vec::new(); r];
        for &k in &class.base {
            let x = gd.fan.rays[k][..n].to_vec();
            let i = (0..r).find(|&i| np.phi_i(i, &to_q(&x)).is_one()).expect("relevant ray");
            decomposition[i] = x;
        }
        if class.base.len() != r || class.upper.len() != 1 || decomposition.iter().any(|d| d.is_empty()) {
            return Err(ComplexError::Chart(format!("vertex {} is not of the form n_1 + ... + n_r + w", v)));
        }
        let wray = &gd.fan.rays[class.upper[0]];
        if !level_of(wray).is_one() {
            return Err(ComplexError::Chart(format!("vertex {} has a ray above level one", v)));
        }
        let w = wray[..n].to_vec();
        let point = ac.vertex_point(v);
        if decomposition.iter().fold(w.clone(), |acc, d| add(&acc, d)) != point {
            return Err(ComplexError::Chart(format!("decomposition of vertex {}", v)));
        }
        let q = LatticeQuotient::new(n, &decomposition);
        let images = |c: usize| -> Vec<ZVec> {
            let rays: Vec<ZVec> = gd.fan.cones[ac.cells[c].origin]
                .rays
                .iter()
                .map(|&k| {
                    let y = &gd.fan.rays[k];
                    sub(&y[..n], &scale(level_of(y), &w))
                })
                .collect();
            project_rays(&q, &rays)
        };
        let maximal: Vec<Vec<ZVec>> = ac.star(v).iter().map(|&c| images(c)).collect();
        let cfan = chart_fan(&q, np.delta_star.space.side, &maximal);
        let mut cell_cone = BTreeMap::new();
        for (c, cell) in ac.cells.iter().enumerate() {
            if cell.vertices.binary_search(&v).is_ok() && ac.is_face(v, c) {
                let k = chart_cone(&cfan, &images(c))
                    .ok_or_else(|| ComplexError::Chart(format!("cell {} at vertex {}", c, v)))?;
                cell_cone.insert(c, k);
            }
        }
        ac.charts.insert(v, VertexChart { point, decomposition, w, quotient: q, fan: cfan, cell_cone });
    }
    for &c in &ac.maximal_cells().to_vec() {
        let rho = ac.cells[c].origin;
        if !gd.fan.maximal.contains(&rho) {
            return Err(ComplexError::Other(format!("maximal cell {} comes from a non-maximal cone", c)));
        }
        let ms = (0..r).map(|j| gd.phi_parts[j].slope_of(rho)[..n].iter().map(|x| -x).collect()).collect();
        ac.covectors.insert(c, ms);
    }
    Ok(ac)
}

/// The dual side: lifted nabla, the upper polytope built from `h~'`, the
/// normal fan of their sum and the lifted polytope delta~'.
#[derive(Clone, Debug)]
pub struct DualGoodData {
    pub np: NefPartition,
    pub heights: HeightData,
    pub lifted: LiftedData,
    /// `{(n, l) : n in nabla^{check h'}, l >= h~'(n, 1)}`.
    pub nabla_prime: Polyhedron,
    /// `nabla~ + nabla~'`, equal to the epigraph of `h~'(., 1)` over `nabla^{check h}`.
    pub nabla_sum: Polyhedron,
    pub good: GoodData,
    /// `{(m, l) : m in delta^{h'}, l >= check h~'(m, 1)}`.
    pub delta_prime: Polyhedron,
    /// `delta~ + delta~'`.
    pub delta_sum: Polyhedron,
}

pub fn dual_good_data(
    np: &NefPartition,
    hd: &HeightData,
    ld: &LiftedData,
    gd: &GoodData,
) -> Result<DualGoodData, ComplexError> {
    let dual_np = np.swap_sides()?;
    let dual_hd = hd.swapped();
    let dual_ld = LiftedData::new(&dual_np, &dual_hd)?;
    let nabla_prime = epigraph(&hd.check_h.prime_polytope, &gd.h_prime)?;
    let nabla_sum = minkowski_sum(&dual_ld.total, &nabla_prime)?;
    if nabla_sum != epigraph(&hd.check_h.polytope, &gd.h_prime)? {
        return Err(ComplexError::Other("lifted sum differs from the epigraph over nabla^{check h}".into()));
    }
    let fan = Arc::new(normal_fan(&nabla_sum)?);
    let h = support_function(&nabla_sum, fan.clone())?;
    let good = GoodData::new(&dual_np, &dual_ld, fan, h)?;
    let report = is_good(&dual_hd, &dual_ld, &good);
    if !report.is_good() {
        return Err(ComplexError::Other(format!("dual data is not good: {}", report.problems.join("; "))));
    }
    let delta_prime = epigraph(&hd.h.prime_polytope, &good.h_prime)?;
    let delta_sum = minkowski_sum(&ld.total, &delta_prime)?;
    Ok(DualGoodData { np: dual_np, heights: dual_hd, lifted: dual_ld, nabla_prime, nabla_sum, good, delta_prime, delta_sum })
}

/// Partition, heights, lifted fan, good data and its dual.
#[derive(Clone, Debug)]
pub struct GeneralSetup {
    pub np: NefPartition,
    pub heights: HeightData,
    pub lifted: LiftedData,
    pub good: GoodData,
    pub dual: DualGoodData,
}

impl GeneralSetup {
    /// Uses the trivial good data when none is given; this needs `h = phi`.
    pub fn new(np: &NefPartition, heights: HeightData, good: Option<GoodData>) -> Result<GeneralSetup, ComplexError> {
        let lifted = LiftedData::new(np, &heights)?;
        let good = match good {
            Some(g) => g,
            None => GoodData::trivial(np, &lifted)?,
        };
        let report = is_good(&heights, &lifted, &good);
        if !report.is_good() {
            return Err(ComplexError::Other(format!("data is not good: {}", report.problems.join("; "))));
        }
        let dual = dual_good_data(np, &heights, &lifted, &good)?;
        Ok(GeneralSetup { np: np.clone(), heights, lifted, good, dual })
    }

    pub fn complex(&self, side: ComplexSide) -> Result<AffineComplex, ComplexError> {
        match side {
            ComplexSide::Nabla => build_complex_general(&self.np, &self.heights, &self.good, side),
            ComplexSide::Delta => build_complex_general(&self.dual.np, &self.dual.heights, &self.dual.good, side),
        }
    }

    /// Dimensions of the summands `beta_1, ..., beta_r, tau` of a cell of
    /// the complex on `side`.
    pub fn summand_dims(&self, side: ComplexSide, ac: &AffineComplex, c: usize) -> Result<Vec<usize>, ComplexError> {
        let (np, gd) = match side {
            ComplexSide::Nabla => (&self.np, &self.good),
            ComplexSide::Delta => (&self.dual.np, &self.dual.good),
        };
        Ok(cell_summands(np, gd, ac.cells[c].origin)?.iter().map(|p| p.dim).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutionReport {
    pub checked: usize,
    pub discrepancy: Option<String>,
}

/// Recovers `h~` from `delta~ + delta~'` and `h~'` from `delta~'` on every
/// maximal cone.
pub fn verify_involution(setup: &GeneralSetup) -> InvolutionReport {
    let gd = &setup.good;
    let fan = &gd.fan;
    let mut checked = 0;
    for &m in &fan.maximal {
        let x = fan.cone(m).interior_point();
        for (poly, g, what) in [(&setup.dual.delta_sum, &gd.h, "h"), (&setup.dual.delta_prime, &gd.h_prime, "h'")] {
            let slope: Option<QVec> = poly.minimizing_face(&x).and_then(|f| {
                (f.vertices.len() == 1 && f.rays.is_empty()).then(|| poly.vertices[f.vertices[0]].iter().map(|c| -c).collect())
            });
            if slope.as_ref() != Some(g.slope_of(m)) {
                return InvolutionReport {
                    checked,
                    discrepancy: Some(format!("{} differs on cone {} (interior point {})", what, m, fmt_vec(&x))),
                };
            }
        }
        checked += 1;
    }
    InvolutionReport { checked, discrepancy: None }
}

/// Normal cone in `target` of `sum` along the graph of `g'(., 1)` over the
/// cell of `rho`.
fn lifted_normal_cone(
    np: &NefPartition,
    gd: &GoodData,
    rho: usize,
    sum: &Polyhedron,
    target: &Fan,
) -> Result<usize, String> {
    let cell = cell_of(np, gd, rho).map_err(|e| e.to_string())?;
    let pts: Vec<QVec> = cell
        .vertices
        .iter()
        .map(|p| {
            let mut x = p.clone();
            x.push(Rat::one());
            let mut y = p.clone();
            y.push(gd.h_prime.value_q(&x).expect("in support"));
            y
        })
        .collect();
    let tight: Vec<usize> = (0..sum.facets.len()).filter(|&j| pts.iter().all(|p| sum.facets[j].eval(p).is_zero())).collect();
    if tight.is_empty() {
        return Err(format!("graph over the cell of cone {} is not a proper face", rho));
    }
    let on_face: BTreeSet<&QVec> =
        sum.vertices.iter().filter(|v| tight.iter().all(|&j| sum.facets[j].eval(v).is_zero())).collect();
    let expected: BTreeSet<&QVec> = pts.iter().collect();
    let bounded = sum.rays.iter().all(|r| tight.iter().any(|&j| !dot(&sum.facets[j].normal, r).is_zero()));
    if on_face != expected || !bounded {
        return Err(format!("graph over the cell of cone {} is not a face", rho));
    }
    let normals: Vec<ZVec> = tight.iter().map(|&j| sum.facets[j].normal.clone()).collect();
    target.find_by_rays(&normals).ok_or_else(|| format!("normal cone of the face of cone {} is not in the fan", rho))
}

#[derive(Clone, Debug, Default)]
pub struct AlphaReport {
    pub alpha: BTreeMap<usize, usize>,
    pub alpha_check: BTreeMap<usize, usize>,
    pub problems: Vec<String>,
}

impl AlphaReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Builds both correspondences between relevant cones and checks that they
/// are mutually inverse, reverse inclusions and satisfy the dimension
/// identity.
pub fn alpha_check(setup: &GeneralSetup) -> AlphaReport {
    let gd = &setup.good;
    let dg = &setup.dual.good;
    let n = setup.np.rank();
    let r = setup.np.r();
    let mut rep = AlphaReport::default();
    for rho in gd.relevant() {
        match lifted_normal_cone(&setup.np, gd, rho, &setup.dual.nabla_sum, &dg.fan) {
            Ok(a) => {
                if !dg.classes[a].relevant {
                    rep.problems.push(format!("alpha of cone {} is not relevant", rho));
                }
                if dg.fan.cones[a].dim + gd.fan.cones[rho].dim != n + r + 2 {
                    rep.problems.push(format!("dimension identity fails for cone {}", rho));
                }
                rep.alpha.insert(rho, a);
            }
            Err(e) => rep.problems.push(e),
        }
    }
    for rho in dg.relevant() {
        match lifted_normal_cone(&setup.dual.np, dg, rho, &setup.dual.delta_sum, &gd.fan) {
            Ok(a) => {
                rep.alpha_check.insert(rho, a);
            }
            Err(e) => rep.problems.push(e),
        }
    }
    if rep.alpha.len() != rep.alpha_check.len() {
        rep.problems.push(format!("{} relevant cones against {} on the dual side", rep.alpha.len(), rep.alpha_check.len()));
    }
    for (&rho, &a) in &rep.alpha {
        if rep.alpha_check.get(&a) != Some(&rho) {
            rep.problems.push(format!("alpha is not inverted on cone {}", rho));
        }
    }
    for (&rho, &a) in &rep.alpha_check {
        if rep.alpha.get(&a) != Some(&rho) {
            rep.problems.push(format!("dual alpha is not inverted on cone {}", rho));
        }
    }
    let keys: Vec<usize> = rep.alpha.keys().copied().collect();
    for &a in &keys {
        for &b in &keys {
            if a != b && gd.fan.is_face_of(a, b) && !dg.fan.is_face_of(rep.alpha[&b], rep.alpha[&a]) {
                rep.problems.push(format!("alpha does not reverse the inclusion of cone {} in cone {}", a, b));
            }
        }
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DltGeneralReport {
    pub nabla_checked: usize,
    pub delta_checked: usize,
}

/// For every relevant cone, the Newton polytope of the descended `h~` is the
/// shifted image of the dual face of the lifted sum, and that face projects
/// to the cell of the corresponding cone on the other side.
pub fn dlt_general_verify(setup: &GeneralSetup) -> Result<DltGeneralReport, ComplexError> {
    let alpha = alpha_check(setup);
    if !alpha.is_ok() {
        return Err(ComplexError::Other(alpha.problems[0].clone()));
    }
    let a = check_dlt(&setup.good, &setup.dual.delta_sum, &setup.dual.np, &setup.dual.good, &alpha.alpha)?;
    let b = check_dlt(&setup.dual.good, &setup.dual.nabla_sum, &setup.np, &setup.good, &alpha.alpha_check)?;
    Ok(DltGeneralReport { nabla_checked: a, delta_checked: b })
}

fn check_dlt(
    gd: &GoodData,
    sum: &Polyhedron,
    other_np: &NefPartition,
    other_gd: &GoodData,
    alpha: &BTreeMap<usize, usize>,
) -> Result<usize, ComplexError> {
    let d = sum.space.rank - 1;
    let base_space = LatticeSpace::new(d, sum.space.side);
    let mut count = 0;
    for (&rho, &a) in alpha {
        let x = gd.fan.cone(rho).interior_point();
        let face = sum.minimizing_face(&x).ok_or_else(|| ComplexError::Other(format!("no face dual to cone {}", rho)))?;
        let verts: Vec<QVec> = face.vertices.iter().map(|&k| sum.vertices[k].clone()).collect();
        let projected: Vec<QVec> = verts.iter().map(|v| v[..d].to_vec()).collect();
        if !face.rays.is_empty() || convex_hull(base_space, &projected, &[])? != cell_of(other_np, other_gd, a)? {
            return Err(ComplexError::Other(format!("face dual to cone {} does not project to its dual cell", rho)));
        }
        let desc = descend_pl(&gd.h, rho)?;
        let q = &desc.quotient.quotient;
        if q.rank() == 0 {
            if verts.len() != 1 {
                return Err(ComplexError::Other(format!("maximal cone {} has a non-vertex dual face", rho)));
            }
        } else {
            let newton = newton_polytope(&desc.function)?;
            let image: Vec<QVec> = verts
                .iter()
                .map(|v| {
                    let y = add_q(v, &desc.shift);
                    q.basis.iter().map(|b| dot_zq(b, &y)).collect()
                })
                .collect();
            if convex_hull(newton.space, &image, &[])? != newton {
                return Err(ComplexError::Other(format!("Newton polytope on cone {} is not the dual face", rho)));
            }
        }
        count += 1;
    }
    Ok(count)
}

/// Result of the construction of good data for `m0 h + n0 phi`.
#[derive(Clone, Debug)]
pub struct Existence {
    pub m0: Int,
    pub n0: Int,
    pub heights: HeightData,
    pub good: GoodData,
    pub report: GoodReport,
}

/// Sets `h~ = h` at level zero and `h~ = 0` on the upper cone, subdivides
/// every maximal lifted cone by the lower hull of these values, clears
/// denominators and adds the least multiple of `phi~` that makes the data
/// good.
pub fn existence_construction(np: &NefPartition, hd: &HeightData, ld: &LiftedData) -> Result<Existence, ComplexError> {
    let n = np.rank();
    let hf = &hd.h.function;
    let mut heights: BTreeMap<ZVec, Rat> = BTreeMap::new();
    for r in &ld.fan.rays {
        let v = if level_of(r).is_zero() { hf.value(&r[..n]).expect("complete fan") } else { Rat::zero() };
        heights.insert(r.clone(), v);
    }
    let extra: Vec<(ZVec, Rat)> = hd
        .h
        .fan
        .rays
        .iter()
        .map(|r| (lift_point(r, 0), hf.value(r).expect("ray of the fan")))
        .filter(|(r, _)| !heights.contains_key(r))
        .collect();
    let mut cells: Vec<Vec<ZVec>> = Vec::new();
    for &m in &ld.fan.maximal {
        let cone = ld.fan.cone(m);
        let inside: Vec<(ZVec, Rat)> = extra.iter().filter(|(r, _)| cone.contains(r)).cloned().collect();
        let sub = regular_subdivision(cone, &heights, &inside)?;
        let fine = &sub.certificate.fine;
        for &k in &fine.maximal {
            cells.push(fine.cones[k].rays.iter().map(|&i| fine.rays[i].clone()).collect());
        }
    }
    let mut up = vec![Int::zero(); n + 1];
    up[n] = Int::one();
    let fan = Arc::new(Fan::from_maximal(ld.fan.space, &cells, &[], Support::HalfSpace(up)));
    if !fan.covers_support() {
        return Err(ComplexError::Other("subdivisions of adjacent cones are not compatible".into()));
    }
    heights.extend(extra);
    let values: Vec<Rat> = fan.rays.iter().map(|r| heights[r].clone()).collect();
    let ht = PlFunction::from_ray_values(fan.clone(), &values)?;
    let mut m0 = Int::one();
    for x in ht.slopes.iter().flatten().chain(values.iter()) {
        m0 = m0.lcm(x.denom());
    }
    let phi = ld.phi.pullback(fan.clone())?;
    let mut n0 = Int::one();
    let m0q = Rat::from_integer(m0.clone());
    for ((w, jh), jp) in fan.walls().iter().zip(ht.wall_jumps()).zip(phi.wall_jumps()) {
        if jp.is_positive() {
            let x = -(&m0q * jh) / &jp;
            n0 = n0.max(x.ceil().to_integer() + Int::one());
        } else if !jh.is_positive() {
            return Err(ComplexError::Other(format!("lower hull is flat across {}", wall_name(&fan, w.cone))));
        }
    }
    let n0q = Rat::from_integer(n0.clone());
    let entries: Vec<HeightEntry> = hd
        .h
        .fan
        .rays
        .iter()
        .map(|r| (r.clone(), &m0q * hf.value(r).unwrap() + &n0q * np.phi_value(&to_q(r))))
        .collect();
    let heights = HeightData { h: SideHeights::new(np, &entries)?, check_h: hd.check_h.clone() };
    let h = ht.scaled(&m0q).add(&phi.scaled(&n0q)).expect("same fan");
    let good = GoodData::new(np, ld, fan, h)?;
    let report = is_good(&heights, ld, &good);
    Ok(Existence { m0, n0, heights, good, report })
}

/// Simplicity data at one cell `tau`.
#[derive(Clone, Debug)]
pub struct CellSimplicity {
    pub cell: usize,
    /// Edges of `tau` with the part carrying two generators, if any.
    pub edges: Vec<(usize, Option<usize>)>,
    /// Cells of codimension one containing `tau` with the part whose
    /// covector changes across them, if any.
    pub facets: Vec<(usize, Option<usize>)>,
    pub primal_elementary: bool,
    pub dual_elementary: bool,
}

#[derive(Clone, Debug)]
pub struct SimplicityReport {
    pub cells: Vec<CellSimplicity>,
    pub mpcp_h: bool,
    pub mpcp_check_h: bool,
    pub anomalies: Vec<String>,
}

impl SimplicityReport {
    pub fn is_simple(&self) -> bool {
        self.anomalies.is_empty() && self.cells.iter().all(|c| c.primal_elementary && c.dual_elementary)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !(c.primal_elementary && c.dual_elementary)).count()
    }
}

/// `Conv(P_1 x {e_1}, ..., P_k x {e_k})` is an elementary simplex.
fn elementary_assembly(space_rank: usize, side: crate::geometry::Side, parts: &[Vec<QVec>]) -> bool {
    let k = parts.len();
    if k == 0 {
        return true;
    }
    let mut pts = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        for x in p {
            let mut y = x.clone();
            y.extend((0..k).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            pts.push(y);
        }
    }
    let space = LatticeSpace::new(space_rank + k, side);
    match convex_hull(space, &pts, &[]) {
        Ok(p) => is_elementary_simplex(&p).unwrap_or(false),
        Err(_) => false,
    }
}

/// For each cell of dimension between 1 and `dim B - 1`, assembles the
/// covector hulls along edges and the part faces along codimension-one
/// cells and tests both for being elementary simplices.
pub fn simplicity_check(np: &NefPartition, hd: &HeightData, gd: &GoodData, ac: &AffineComplex) -> SimplicityReport {
    let n = np.rank();
    let r = np.r();
    let top = ac.dim();
    let mut anomalies = Vec::new();
    let dual = np.swap_sides();
    let mpcp_h = hd.h.is_mpcp(np);
    let mpcp_check_h = dual.as_ref().map(|d| hd.check_h.is_mpcp(d)).unwrap_or(false);
    let part_of = |k: usize| -> Option<usize> {
        let x = base_point(&gd.fan.rays[k]);
        (0..r).find(|&i| np.phi_i(i, &x).is_one())
    };
    let mut cells = Vec::new();
    for d in 1..top {
        for &t in &ac.by_dim[d] {
            let star = ac.star(t);
            let mut deltas: Vec<BTreeSet<QVec>> = vec![BTreeSet::new(); r];
            for &s in &star {
                for (j, m) in ac.covectors[&s].iter().enumerate() {
                    deltas[j].insert(m.clone());
                }
            }
            let mut edges = Vec::new();
            let mut omega = vec![false; r];
            for &e in &ac.by_dim[1] {
                if !ac.is_face(e, t) {
                    continue;
                }
                let class = &gd.classes[ac.cells[e].origin];
                let mut count = vec![0usize; r];
                for &k in &class.base {
                    match part_of(k) {
                        Some(i) => count[i] += 1,
                        None => anomalies.push(format!("edge {} has a ray off the boundary", e)),
                    }
                }
                let p = match class.base.len() {
                    x if x == r => None,
                    x if x == r + 1 => count.iter().position(|&c| c == 2),
                    _ => {
                        anomalies.push(format!("edge {} has {} level-zero rays", e, class.base.len()));
                        None
                    }
                };
                if let Some(i) = p {
                    omega[i] = true;
                }
                edges.push((e, p));
            }
            let primal: Vec<Vec<QVec>> =
                (0..r).filter(|&i| omega[i]).map(|i| deltas[i].iter().cloned().collect()).collect();
            let primal_elementary = elementary_assembly(n, np.delta.space.side, &primal);

            let mut facets = Vec::new();
            let mut bent = vec![false; r];
            for &f in &ac.by_dim[top - 1] {
                if !ac.is_face(t, f) {
                    continue;
                }
                let sides = ac.star(f);
                let i = if sides.len() == 2 {
                    let (a, b) = (&ac.covectors[&sides[0]], &ac.covectors[&sides[1]]);
                    let diff: Vec<usize> = (0..r).filter(|&j| a[j] != b[j]).collect();
                    if diff.len() > 1 {
                        anomalies.push(format!("covectors of {} parts change across cell {}", diff.len(), f));
                    }
                    diff.first().copied()
                } else {
                    anomalies.push(format!("cell {} lies in {} maximal cells", f, sides.len()));
                    None
                };
                if let Some(i) = i {
                    bent[i] = true;
                }
                facets.push((f, i));
            }
            let class = &gd.classes[ac.cells[t].origin];
            let mut betas: Vec<Vec<QVec>> = vec![Vec::new(); r];
            for &k in &class.base {
                if let Some(i) = part_of(k) {
                    betas[i].push(base_point(&gd.fan.rays[k]));
                }
            }
            let dual_parts: Vec<Vec<QVec>> = (0..r).filter(|&i| bent[i]).map(|i| betas[i].clone()).collect();
            let dual_elementary = elementary_assembly(n, np.delta_star.space.side, &dual_parts);
            cells.push(CellSimplicity { cell: t, edges, facets, primal_elementary, dual_elementary });
        }
    }
    SimplicityReport { cells, mpcp_h, mpcp_check_h, anomalies }
}
