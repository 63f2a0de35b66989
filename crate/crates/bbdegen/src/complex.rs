//! Polyhedral cell complexes with per-vertex fan charts, shared by the
//! unsubdivided and the height-subdivided constructions.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::fans::{Fan, Support};
use crate::geometry::dd::Bits;
use crate::geometry::lattice::is_unimodular;
use crate::geometry::linalg::*;
use crate::geometry::{LatticeQuotient, LatticeSpace, Polyhedron, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComplexSide {
    Nabla,
    Delta,
}

impl ComplexSide {
    pub fn name(self) -> &'static str {
        match self {
            ComplexSide::Nabla => "nabla",
            ComplexSide::Delta => "delta",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub polytope: Polyhedron,
    pub dim: usize,
    /// Indices of vertex cells lying in this cell, sorted.
    pub vertices: Vec<usize>,
    /// Cells of dimension one less contained in this cell.
    pub facets: Vec<usize>,
    /// Index of the face or cone this cell comes from.
    pub origin: usize,
}

/// Chart data at a vertex `v = n_1 + ... + n_r + w`.
#[derive(Clone, Debug)]
pub struct VertexChart {
    pub point: ZVec,
    pub decomposition: Vec<ZVec>,
    pub w: ZVec,
    /// `N -> N / (N ∩ Span(n_1, ..., n_r))` in a Hermite basis.
    pub quotient: LatticeQuotient,
    /// The fan structure at the vertex, in quotient coordinates.
    pub fan: Arc<Fan>,
    /// For each cell containing the vertex, the cone of `fan` it maps to.
    pub cell_cone: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug)]
pub struct AffineComplex {
    pub side: ComplexSide,
    pub ambient: usize,
    pub r: usize,
    pub cells: Vec<Cell>,
    pub by_dim: Vec<Vec<usize>>,
    pub charts: BTreeMap<usize, VertexChart>,
    /// Covectors `m_j` with `-phi_j = <m_j, .>` on the cone of each maximal cell.
    pub covectors: BTreeMap<usize, Vec<QVec>>,
}

impl AffineComplex {
    /// Assembles cells sorted by dimension and fills in vertex and facet lists.
    /// `is_face` decides whether cell `a` is a face of cell `b` by their origins.
    pub fn assemble(
        side: ComplexSide,
        ambient: usize,
        r: usize,
        mut raw: Vec<(Polyhedron, usize)>,
        is_face: impl Fn(usize, usize) -> bool,
    ) -> AffineComplex {
        raw.sort_by(|a, b| (a.0.dim, &a.0.vertices).cmp(&(b.0.dim, &b.0.vertices)));
        let top = raw.iter().map(|c| c.0.dim).max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); top + 1];
        let mut vertex_id: HashMap<QVec, usize> = HashMap::new();
        for (i, (p, _)) in raw.iter().enumerate() {
            by_dim[p.dim].push(i);
            if p.dim == 0 {
                vertex_id.insert(p.vertices[0].clone(), i);
            }
        }
        let n = raw.len();
        let mut cells: Vec<Cell> = raw
            .into_iter()
            .map(|(p, origin)| {
                let mut vs: Vec<usize> = p.vertices.iter().map(|v| vertex_id[v]).collect();
                vs.sort();
                Cell { dim: p.dim, polytope: p, vertices: vs, facets: vec![], origin }
            })
            .collect();
        // candidate facets share all vertices; confirm with the origin order
        let vsets: Vec<Bits> = cells.iter().map(|c| Bits::from_iter(n, c.vertices.iter().copied())).collect();
        let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, c) in cells.iter().enumerate() {
            for &v in &c.vertices {
                containing[v].push(i);
            }
        }
        for b in 0..n {
            if cells[b].dim == 0 {
                continue;
            }
            let mut cands: Vec<usize> = Vec::new();
            for &v in &cells[b].vertices {
                for &a in &containing[v] {
                    if cells[a].dim + 1 == cells[b].dim {
                        cands.push(a);
                    }
                }
            }
            cands.sort();
            cands.dedup();
            let facets: Vec<usize> = cands
                .into_iter()
                .filter(|&a| vsets[a].is_subset(&vsets[b]) && is_face(cells[a].origin, cells[b].origin))
                .collect();
            cells[b].facets = facets;
        }
        AffineComplex { side, ambient, r, cells, by_dim, charts: BTreeMap::new(), covectors: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.by_dim.len() - 1
    }

    pub fn maximal_cells(&self) -> &[usize] {
        &self.by_dim[self.dim()]
    }

    pub fn vertex_cells(&self) -> &[usize] {
        &self.by_dim[0]
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.by_dim.iter().map(|v| v.len()).collect()
    }

    pub fn vertex_point(&self, v: usize) -> ZVec {
        to_z(&self.cells[v].polytope.vertices[0]).expect("integral vertex")
    }

    /// Whether cell `a` is contained in cell `b`.
    pub fn is_face(&self, a: usize, b: usize) -> bool {
        if a == b {
            return true;
        }
        if self.cells[a].dim >= self.cells[b].dim {
            return false;
        }
        let mut frontier = vec![b];
        while let Some(c) = frontier.pop() {
            for &f in &self.cells[c].facets {
                if f == a {
                    return true;
                }
                if self.cells[f].dim > self.cells[a].dim && !frontier.contains(&f) {
                    frontier.push(f);
                }
            }
        }
        false
    }

    /// Maximal cells containing cell `a`.
    pub fn star(&self, a: usize) -> Vec<usize> {
        self.maximal_cells()
            .iter()
            .copied()
            .filter(|&m| crate::geometry::is_sorted_subset(&self.cells[a].vertices, &self.cells[m].vertices) && self.is_face(a, m))
            .collect()
    }

    /// Lattice basis of the direction space of a cell.
    pub fn tangent_basis(&self, c: usize) -> Vec<ZVec> {
        let p = &self.cells[c].polytope;
        let v0 = &p.vertices[0];
        let diffs: Vec<ZVec> = p.vertices[1..].iter().map(|v| to_z(&sub_q(v, v0)).expect("integral cell")).collect();
        crate::fans::saturated_basis(&diffs, self.ambient)
    }

    pub fn summary(&self) -> String {
        format!(
            "side {} dim {} f-vector ({})",
            self.side.name(),
            self.dim(),
            self.f_vector().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        )
    }
}

/// Integer matrix of parallel transport in the chart basis at a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyMatrix {
    pub basis: Vec<ZVec>,
    pub matrix: Vec<ZVec>,
}

impl MonodromyMatrix {
    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == identity(self.size())
    }

    pub fn det(&self) -> Int {
        if self.size() == 0 {
            return Int::one();
        }
        det(&self.matrix)
    }

    pub fn trace(&self) -> Int {
        (0..self.size()).map(|i| self.matrix[i][i].clone()).sum()
    }

    pub fn minus_identity(&self) -> Vec<ZVec> {
        let id = identity(self.size());
        self.matrix.iter().zip(&id).map(|(a, b)| sub(a, b)).collect()
    }

    /// `T - I` has rank one, squares to zero and has content one.
    pub fn is_primitive_transvection(&self) -> bool {
        let n = self.minus_identity();
        if rank(&n) != 1 || !mat_mul(&n, &n).iter().all(|r| is_zero(r)) {
            return false;
        }
        let all: ZVec = n.iter().flatten().cloned().collect();
        gcd_all(&all).is_one()
    }
}

/// `T(n) = n + sum_j <m_j' - m_j, n> (n_j' - n_j)` in the Hermite basis at `v`.
pub fn transport(
    ac: &AffineComplex,
    v: usize,
    cell: usize,
    v2: usize,
    cell2: usize,
) -> Result<MonodromyMatrix, ComplexError> {
    for (a, b) in [(v, cell), (v2, cell), (v, cell2), (v2, cell2)] {
        if !ac.is_face(a, b) {
            return Err(ComplexError::Incidence(a, b));
        }
    }
    let cv = ac.charts.get(&v).ok_or(ComplexError::NotAVertex(v))?;
    let cv2 = ac.charts.get(&v2).ok_or(ComplexError::NotAVertex(v2))?;
    let m = ac.covectors.get(&cell).ok_or(ComplexError::NotMaximal(cell))?;
    let m2 = ac.covectors.get(&cell2).ok_or(ComplexError::NotMaximal(cell2))?;
    let q = &cv.quotient;
    let mut cols = Vec::new();
    for b in &q.basis {
        let mut t = to_q(b);
        for j in 0..ac.r {
            let c = dot_zq(b, &sub_q(&m2[j], &m[j]));
            let dn = to_q(&sub(&cv2.decomposition[j], &cv.decomposition[j]));
            t = add_q(&t, &scale_q(&c, &dn));
        }
        let t = to_z(&t).ok_or(ComplexError::NonIntegral)?;
        cols.push(q.project(&t));
    }
    let k = q.rank();
    let matrix: Vec<ZVec> = (0..k).map(|i| (0..k).map(|j| cols[j][i].clone()).collect()).collect();
    Ok(MonodromyMatrix { basis: q.basis.clone(), matrix })
}

/// Checks the chart at a vertex: each incident maximal cell maps
/// isomorphically onto the quotient, meets the span of the decomposition
/// only in `v`, and its tangent wedge is the stored cone.
pub fn vertex_chart(ac: &AffineComplex, v: usize) -> Result<&VertexChart, ComplexError> {
    let chart = ac.charts.get(&v).ok_or(ComplexError::NotAVertex(v))?;
    let q = &chart.quotient;
    if q.rank() != ac.dim() {
        return Err(ComplexError::Chart(format!("quotient rank {} at vertex {}", q.rank(), v)));
    }
    for (&c, &cone) in &chart.cell_cone {
        let cell = &ac.cells[c];
        let p = to_q(&chart.point);
        let wedge: Vec<ZVec> = cell
            .polytope
            .vertices
            .iter()
            .filter(|x| **x != p)
            .map(|x| primitive(q.project(&to_z(&sub_q(x, &p)).unwrap())))
            .collect();
        let image = crate::geometry::Cone::new(chart.fan.space, &wedge, &[]);
        if image != *chart.fan.cone(cone) {
            return Err(ComplexError::Chart(format!("tangent wedge of cell {} at vertex {}", c, v)));
        }
        if cell.dim == ac.dim() {
            let tb = ac.tangent_basis(c);
            let img: Vec<ZVec> = tb.iter().map(|t| q.project(t)).collect();
            if !is_unimodular(&img) {
                return Err(ComplexError::Chart(format!("cell {} not mapped isomorphically at {}", c, v)));
            }
        }
    }
    Ok(chart)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("cell {0} is not a face of cell {1}")]
    Incidence(usize, usize),
    #[error("cell {0} is not a vertex")]
    NotAVertex(usize),
    #[error("cell {0} is not maximal")]
    NotMaximal(usize),
    #[error("non-integral transport")]
    NonIntegral,
    #[error("chart check failed: {0}")]
    Chart(String),
    #[error("{0}")]
    Other(String),
    #[error(transparent)]
    Nef(#[from] crate::nef::NefError),
    #[error(transparent)]
    Fan(#[from] crate::fans::FanError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Height(#[from] crate::complex_general::HeightError),
}

/// Primitive images in the quotient of the generators outside the span.
pub fn project_rays<'a>(q: &LatticeQuotient, rays: impl IntoIterator<Item = &'a ZVec>) -> Vec<ZVec> {
    rays.into_iter().map(|r| q.project(r)).filter(|x| !is_zero(x)).map(primitive).collect()
}

/// Complete fan in the quotient generated by the projected maximal cones
/// around a vertex.
pub fn chart_fan(q: &LatticeQuotient, side: Side, maximal: &[Vec<ZVec>]) -> Arc<Fan> {
    let space = LatticeSpace::new(q.rank(), side);
    Arc::new(Fan::from_maximal(space, maximal, &[], Support::Complete))
}

/// Cone of a chart fan generated by projected rays.
pub fn chart_cone(fan: &Fan, images: &[ZVec]) -> Option<usize> {
    let c = crate::geometry::Cone::new(fan.space, images, &[]);
    fan.find_by_rays(&c.rays)
}

pub fn zero_vec(n: usize) -> ZVec {
    vec![Int::zero(); n]
}
