//! Integral cellular homology of polyhedral complexes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::complex::AffineComplex;
use crate::geometry::lattice::smith_invariants;
use crate::geometry::linalg::*;

/// Sparse integer matrix stored by rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<BTreeMap<usize, Int>>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> SparseMatrix {
        SparseMatrix { nrows, ncols, rows: vec![BTreeMap::new(); nrows] }
    }

    pub fn get(&self, i: usize, j: usize) -> Int {
        self.rows[i].get(&j).cloned().unwrap_or_else(Int::zero)
    }

    pub fn to_dense(&self) -> Vec<ZVec> {
        (0..self.nrows).map(|i| (0..self.ncols).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = SparseMatrix::new(self.nrows, other.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for (k, a) in row {
                for (j, b) in &other.rows[*k] {
                    let e = out.rows[i].entry(*j).or_insert_with(Int::zero);
                    *e += a * b;
                }
            }
            out.rows[i].retain(|_, v| !v.is_zero());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    /// Nonzero Smith invariants: unit pivots are eliminated sparsely, the
    /// remaining block goes through the dense Smith form.
    pub fn smith(&self) -> Vec<Int> {
        let mut rows: BTreeMap<usize, BTreeMap<usize, Int>> =
            self.rows.iter().cloned().enumerate().filter(|(_, r)| !r.is_empty()).collect();
        let mut cols: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (i, r) in &rows {
            for j in r.keys() {
                cols.entry(*j).or_default().insert(*i);
            }
        }
        let mut units = 0;
        loop {
            let pivot = rows
                .iter()
                .filter_map(|(i, r)| r.iter().find(|(_, v)| v.abs().is_one()).map(|(j, v)| (*i, *j, v.clone())))
                .min_by_key(|(i, j, _)| rows[i].len() * cols[j].len());
            let Some((pi, pj, pv)) = pivot else { break };
            let prow = rows.remove(&pi).unwrap();
            for j in prow.keys() {
                cols.get_mut(j).unwrap().remove(&pi);
            }
            let others: Vec<usize> = cols.remove(&pj).unwrap_or_default().into_iter().collect();
            for i in others {
                let row = rows.get_mut(&i).unwrap();
                let factor = row[&pj].clone() * &pv;
                for (j, v) in &prow {
                    let e = row.entry(*j).or_insert_with(Int::zero);
                    *e -= &factor * v;
                    if e.is_zero() {
                        row.remove(j);
                        if *j != pj {
                            cols.get_mut(j).unwrap().remove(&i);
                        }
                    } else {
                        cols.entry(*j).or_default().insert(i);
                    }
                }
                if row.is_empty() {
                    rows.remove(&i);
                }
            }
            for j in prow.keys() {
                if cols.get(j).is_some_and(|c| c.is_empty()) {
                    cols.remove(j);
                }
            }
            units += 1;
        }
        let col_ids: Vec<usize> = cols.keys().copied().collect();
        let dense: Vec<ZVec> =
            rows.values().map(|r| col_ids.iter().map(|j| r.get(j).cloned().unwrap_or_else(Int::zero)).collect()).collect();
        let mut out = vec![Int::one(); units];
        if !dense.is_empty() && !col_ids.is_empty() {
            out.extend(smith_invariants(&dense).into_iter().map(|x| x.abs()));
        }
        out.sort();
        out
    }
}

/// A finitely generated abelian group `Z^rank + sum Z/t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyGroup {
    pub rank: usize,
    pub torsion: Vec<Int>,
}

impl HomologyGroup {
    pub fn free(rank: usize) -> HomologyGroup {
        HomologyGroup { rank, torsion: Vec::new() }
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        match self.rank {
            0 => {}
            1 => terms.push("Z".to_string()),
            k => terms.push(format!("Z^{}", k)),
        }
        terms.extend(self.torsion.iter().map(|t| format!("Z/{}", t)));
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Coordinates of `x` in the basis `basis` of a subspace containing it.
fn coordinates(basis: &[ZVec], x: &[Rat], ambient: usize) -> QVec {
    let rows: Vec<QVec> =
        (0..ambient).map(|i| basis.iter().map(|b| Rat::from_integer(b[i].clone())).collect()).collect();
    solve(&rows, x, basis.len()).expect("vector in the span")
}

fn centroid(vs: &[QVec]) -> QVec {
    let n = Rat::from_integer(Int::from(vs.len()));
    let mut s = vec![Rat::zero(); vs[0].len()];
    for v in vs {
        s = add_q(&s, v);
    }
    scale_q(&n.recip(), &s)
}

/// Boundary maps `d_k : C_k -> C_{k-1}` for `k = 1..=dim`, with rows
/// indexed by `by_dim[k - 1]` and columns by `by_dim[k]`. Each cell is
/// oriented by its tangent basis; the facet `f` of `c` enters with the
/// sign of `(outward normal, basis of f)` in the basis of `c`.
pub fn boundary_matrices(ac: &AffineComplex) -> Vec<SparseMatrix> {
    let mut position = vec![0usize; ac.cells.len()];
    for cells in &ac.by_dim {
        for (k, &c) in cells.iter().enumerate() {
            position[c] = k;
        }
    }
    let bases: Vec<Vec<ZVec>> = (0..ac.cells.len()).map(|c| ac.tangent_basis(c)).collect();
    let centres: Vec<QVec> = ac.cells.iter().map(|c| centroid(&c.polytope.vertices)).collect();
    let mut out = vec![SparseMatrix::default()];
    for k in 1..ac.by_dim.len() {
        let mut d = SparseMatrix::new(ac.by_dim[k - 1].len(), ac.by_dim[k].len());
        for &c in &ac.by_dim[k] {
            for &f in &ac.cells[c].facets {
                let outward = sub_q(&centres[f], &centres[c]);
                let mut m = vec![coordinates(&bases[c], &outward, ac.ambient)];
                for b in &bases[f] {
                    m.push(coordinates(&bases[c], &to_q(b), ac.ambient));
                }
                let s = det_q(&m);
                debug_assert!(!s.is_zero());
                let v = if s.is_positive() { Int::one() } else { -Int::one() };
                d.rows[position[f]].insert(position[c], v);
            }
        }
        out.push(d);
    }
    out.remove(0);
    out
}

/// `H_0, ..., H_dim` of the complex.
pub fn cellular_homology(ac: &AffineComplex) -> Vec<HomologyGroup> {
    homology_of(&ac.f_vector(), &boundary_matrices(ac))
}

/// Homology of `C_dim -> ... -> C_0` given `d_1, ..., d_dim`.
pub fn homology_of(sizes: &[usize], boundaries: &[SparseMatrix]) -> Vec<HomologyGroup> {
    let invariants: Vec<Vec<Int>> = boundaries.iter().map(|d| d.smith()).collect();
    (0..sizes.len())
        .map(|k| {
            let out_rank = if k == 0 { 0 } else { invariants[k - 1].len() };
            let incoming = invariants.get(k);
            let in_rank = incoming.map_or(0, |v| v.len());
            let torsion = incoming.map_or(Vec::new(), |v| v.iter().filter(|x| !x.is_one()).cloned().collect());
            HomologyGroup { rank: sizes[k] - out_rank - in_rank, torsion }
        })
        .collect()
}

/// Euler characteristic from the cell counts.
pub fn euler_characteristic(ac: &AffineComplex) -> i64 {
    ac.f_vector().iter().enumerate().map(|(k, &n)| if k.is_even() { n as i64 } else { -(n as i64) }).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(rows: &[&[i64]]) -> SparseMatrix {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut m = SparseMatrix::new(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0 {
                    m.rows[i].insert(j, zi(v));
                }
            }
        }
        m
    }

    #[test]
    fn smith_matches_dense() {
        let m = sparse(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        assert_eq!(m.smith(), vec![zi(2), zi(6), zi(12)]);
        let m = sparse(&[&[1, 2, 0], &[0, 2, 4], &[1, 4, 4]]);
        assert_eq!(m.smith(), smith_invariants(&m.to_dense()));
    }

    #[test]
    fn projective_plane_chain_complex() {
        // one cell in each degree, d_2 = 2, d_1 = 0
        let d1 = SparseMatrix::new(1, 1);
        let d2 = sparse(&[&[2]]);
        let h = homology_of(&[1, 1, 1], &[d1, d2]);
        assert_eq!(h[0], HomologyGroup::free(1));
        assert_eq!(h[1], HomologyGroup { rank: 0, torsion: vec![zi(2)] });
        assert_eq!(h[2], HomologyGroup::free(0));
        assert_eq!(h[1].to_string(), "Z/2");
    }
}
