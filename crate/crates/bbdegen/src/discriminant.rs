//! Discriminant loci in the first barycentric subdivision: the initial
//! codimension-two locus, pruning by loop monodromy and components.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::complex::{transport, AffineComplex, ComplexError, MonodromyMatrix};
use crate::geometry::linalg::Int;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DiscriminantError {
    #[error("cell {cell} lies in {count} maximal cells")]
    NonManifold { cell: usize, count: usize },
    #[error("chain does not start at an edge")]
    BadChain,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A simplex of the barycentric subdivision: a chain of cells, strictly
/// increasing under inclusion. Its carrier is the last cell.
pub type Chain = Vec<usize>;

#[derive(Clone, Debug)]
pub struct Barycentric {
    /// Simplices by dimension; a `k`-simplex is a chain of `k + 1` cells.
    pub simplices: Vec<Vec<Chain>>,
}

impl Barycentric {
    pub fn top(&self) -> &[Chain] {
        self.simplices.last().map_or(&[], |v| v.as_slice())
    }

    pub fn carrier(chain: &Chain) -> usize {
        *chain.last().expect("nonempty chain")
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(|s| s.len()).collect()
    }
}

fn proper_faces(ac: &AffineComplex) -> Vec<BTreeSet<usize>> {
    let mut faces: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ac.cells.len()];
    for cells in &ac.by_dim {
        for &c in cells {
            let mut all = BTreeSet::new();
            for &f in &ac.cells[c].facets {
                all.insert(f);
                all.extend(faces[f].iter().copied());
            }
            faces[c] = all;
        }
    }
    faces
}

/// All chains of cells, by length.
pub fn barycentric(ac: &AffineComplex) -> Barycentric {
    let faces = proper_faces(ac);
    let mut ending: Vec<Vec<Chain>> = vec![Vec::new(); ac.cells.len()];
    let mut simplices: Vec<Vec<Chain>> = vec![Vec::new(); ac.by_dim.len()];
    for cells in &ac.by_dim {
        for &c in cells {
            let mut here = vec![vec![c]];
            for &f in &faces[c] {
                for ch in &ending[f] {
                    let mut x = ch.clone();
                    x.push(c);
                    here.push(x);
                }
            }
            for ch in &here {
                simplices[ch.len() - 1].push(ch.clone());
            }
            ending[c] = here;
        }
    }
    for s in &mut simplices {
        s.sort();
    }
    Barycentric { simplices }
}

/// Top-dimensional simplices of a discriminant locus, closed under faces
/// implicitly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscriminantLocus {
    pub dim_b: usize,
    pub simplices: BTreeSet<Chain>,
}

impl DiscriminantLocus {
    /// Every face of every simplex.
    pub fn closure(&self) -> BTreeSet<Chain> {
        let mut out = BTreeSet::new();
        for s in &self.simplices {
            let k = s.len();
            for mask in 1u32..(1 << k) {
                out.insert((0..k).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect());
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }
}

/// Codimension-two simplices of the subdivision using neither a vertex
/// nor a maximal cell.
pub fn initial_gamma(ac: &AffineComplex, bar: &Barycentric) -> DiscriminantLocus {
    let d = ac.dim();
    let mut simplices = BTreeSet::new();
    if d >= 2 {
        for ch in &bar.simplices[d - 2] {
            if ch.iter().all(|&c| ac.cells[c].dim != 0 && ac.cells[c].dim != d) {
                simplices.insert(ch.clone());
            }
        }
    }
    DiscriminantLocus { dim_b: d, simplices }
}

/// The small loop around a codimension-two chain `e < ... < f`: the two
/// vertices of the edge `e` and the two maximal cells containing `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopTransport {
    pub vertices: (usize, usize),
    pub cells: (usize, usize),
    pub matrix: MonodromyMatrix,
}

pub fn loop_transport(ac: &AffineComplex, chain: &Chain) -> Result<LoopTransport, DiscriminantError> {
    let e = chain[0];
    if ac.cells[e].dim != 1 {
        return Err(DiscriminantError::BadChain);
    }
    let f = Barycentric::carrier(chain);
    let star = ac.star(f);
    if star.len() != 2 {
        return Err(DiscriminantError::NonManifold { cell: f, count: star.len() });
    }
    let (v1, v2) = (ac.cells[e].vertices[0], ac.cells[e].vertices[1]);
    let matrix = transport(ac, v1, star[0], v2, star[1])?;
    Ok(LoopTransport { vertices: (v1, v2), cells: (star[0], star[1]), matrix })
}

#[derive(Clone, Debug)]
pub struct PrunedLocus {
    pub locus: DiscriminantLocus,
    /// Loop transport of every surviving simplex.
    pub transports: BTreeMap<Chain, LoopTransport>,
    pub removed: usize,
}

/// Drops every simplex whose small loop has trivial transport. Transport
/// does not depend on the locus, so one pass reaches the fixpoint.
pub fn prune(dl: &DiscriminantLocus, ac: &AffineComplex) -> Result<PrunedLocus, DiscriminantError> {
    let mut transports = BTreeMap::new();
    let mut simplices = BTreeSet::new();
    let mut removed = 0;
    for s in &dl.simplices {
        let t = loop_transport(ac, s)?;
        if t.matrix.is_identity() {
            removed += 1;
        } else {
            simplices.insert(s.clone());
            transports.insert(s.clone(), t);
        }
    }
    Ok(PrunedLocus { locus: DiscriminantLocus { dim_b: dl.dim_b, simplices }, transports, removed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentShape {
    Point,
    Circle,
    /// A 1-dimensional component with a vertex of degree other than two.
    Graph,
    Higher,
}

impl ComponentShape {
    pub fn name(self) -> &'static str {
        match self {
            ComponentShape::Point => "point",
            ComponentShape::Circle => "circle",
            ComponentShape::Graph => "graph",
            ComponentShape::Higher => "complex",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Component {
    pub simplices: Vec<Chain>,
    /// Cells whose barycentres are vertices of the component.
    pub nodes: Vec<usize>,
    pub shape: ComponentShape,
    /// Transport of the first simplex.
    pub monodromy: MonodromyMatrix,
    pub trace: Int,
    pub rank: usize,
    /// Every simplex has a primitive transvection as loop transport.
    pub primitive_transvection: bool,
    /// Maximal cells met by the small loops of the component.
    pub loop_cells: BTreeSet<usize>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Connected components of the pruned locus through shared cells.
pub fn components(pl: &PrunedLocus) -> Vec<Component> {
    let simplices: Vec<&Chain> = pl.locus.simplices.iter().collect();
    let mut parent: Vec<usize> = (0..simplices.len()).collect();
    let mut by_node: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, s) in simplices.iter().enumerate() {
        for &c in s.iter() {
            match by_node.get(&c) {
                Some(&other) => {
                    let (a, b) = (find(&mut parent, k), find(&mut parent, other));
                    parent[a] = b;
                }
                None => {
                    by_node.insert(c, k);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..simplices.len() {
        groups.entry(find(&mut parent, k)).or_default().push(k);
    }
    let mut out: Vec<Component> = groups
        .into_values()
        .map(|members| {
            let chains: Vec<Chain> = members.iter().map(|&k| simplices[k].clone()).collect();
            let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
            for ch in &chains {
                for &c in ch {
                    *degree.entry(c).or_default() += 1;
                }
            }
            let shape = match chains[0].len() {
                1 => ComponentShape::Point,
                2 if degree.values().all(|&d| d == 2) => ComponentShape::Circle,
                2 => ComponentShape::Graph,
                _ => ComponentShape::Higher,
            };
            let transports: Vec<&LoopTransport> = chains.iter().map(|c| &pl.transports[c]).collect();
            let monodromy = transports[0].matrix.clone();
            let trace = monodromy.trace();
            let rank = crate::geometry::linalg::rank(&monodromy.minus_identity());
            let primitive_transvection = transports.iter().all(|t| t.matrix.is_primitive_transvection());
            let loop_cells = transports.iter().flat_map(|t| [t.cells.0, t.cells.1]).collect();
            Component {
                simplices: chains,
                nodes: degree.keys().copied().collect(),
                shape,
                monodromy,
                trace,
                rank,
                primitive_transvection,
                loop_cells,
            }
        })
        .collect();
    out.sort_by(|a, b| a.simplices.cmp(&b.simplices));
    out
}

/// Groups components by the set of keys of the maximal cells their small
/// loops pass through. Largest families first.
pub fn families<K: Ord>(comps: &[Component], key: impl Fn(usize) -> K) -> Vec<Vec<usize>> {
    let mut by_key: BTreeMap<BTreeSet<K>, Vec<usize>> = BTreeMap::new();
    for (k, c) in comps.iter().enumerate() {
        by_key.entry(c.loop_cells.iter().map(|&m| key(m)).collect()).or_default().push(k);
    }
    let mut out: Vec<Vec<usize>> = by_key.into_values().collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    out
}

#[derive(Clone, Debug)]
pub struct DiscriminantReport {
    pub bar_counts: Vec<usize>,
    pub initial: usize,
    pub removed: usize,
    pub components: Vec<Component>,
    pub families: Vec<Vec<usize>>,
}

impl DiscriminantReport {
    pub fn family_sizes(&self) -> Vec<usize> {
        self.families.iter().map(|f| f.len()).collect()
    }

    pub fn all_primitive(&self) -> bool {
        self.components.iter().all(|c| c.primitive_transvection)
    }
}

impl fmt::Display for DiscriminantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.family_sizes().iter().map(|s| s.to_string()).collect();
        writeln!(f, "{} components ({})", self.components.len(), sizes.join(" + "))?;
        writeln!(f, "initial simplices {}, pruned {}", self.initial, self.removed)?;
        for (k, fam) in self.families.iter().enumerate() {
            for &i in fam {
                let c = &self.components[i];
                writeln!(
                    f,
                    "family {} component {}: {} with {} simplices, trace {}, rank(T - I) {}, primitive transvection {}",
                    k,
                    i,
                    c.shape.name(),
                    c.simplices.len(),
                    c.trace,
                    c.rank,
                    c.primitive_transvection
                )?;
            }
        }
        Ok(())
    }
}

/// Full pipeline; components are grouped into families by `key` on
/// maximal cells.
pub fn discriminant<K: Ord>(ac: &AffineComplex, key: impl Fn(usize) -> K) -> Result<DiscriminantReport, DiscriminantError> {
    let bar = barycentric(ac);
    let gamma = initial_gamma(ac, &bar);
    let pruned = prune(&gamma, ac)?;
    let comps = components(&pruned);
    let families = families(&comps, key);
    Ok(DiscriminantReport {
        bar_counts: bar.counts(),
        initial: gamma.simplices.len(),
        removed: pruned.removed,
        components: comps,
        families,
    })
}
