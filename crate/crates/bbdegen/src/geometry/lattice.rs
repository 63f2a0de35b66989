//! Hermite and Smith normal forms, sublattice quotients.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linalg::*;

/// Returns `(u, h)` with `u` unimodular and `u * a = h` in row Hermite form.
pub fn hnf_with_transform(a: &[ZVec]) -> (Vec<ZVec>, Vec<ZVec>) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut h: Vec<ZVec> = a.to_vec();
    let mut u = identity(m);
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        // gcd-combine everything below into the pivot row
        for i in row + 1..m {
            if h[i][col].is_zero() {
                continue;
            }
            let (a0, b0) = (h[row][col].clone(), h[i][col].clone());
            let e = a0.extended_gcd(&b0);
            let (g, x, y) = (e.gcd, e.x, e.y);
            let (p, q) = (&a0 / &g, &b0 / &g);
            let new_r: ZVec = (0..n).map(|j| &x * &h[row][j] + &y * &h[i][j]).collect();
            let new_i: ZVec = (0..n).map(|j| -&q * &h[row][j] + &p * &h[i][j]).collect();
            h[row] = new_r;
            h[i] = new_i;
            let new_ur: ZVec = (0..m).map(|j| &x * &u[row][j] + &y * &u[i][j]).collect();
            let new_ui: ZVec = (0..m).map(|j| -&q * &u[row][j] + &p * &u[i][j]).collect();
            u[row] = new_ur;
            u[i] = new_ui;
        }
        if h[row][col].is_zero() {
            continue;
        }
        if h[row][col].is_negative() {
            h[row] = neg(&h[row]);
            u[row] = neg(&u[row]);
        }
        let piv = h[row][col].clone();
        for i in 0..row {
            let f = h[i][col].div_floor(&piv);
            if !f.is_zero() {
                h[i] = sub(&h[i], &scale(&f, &h[row]));
                u[i] = sub(&u[i], &scale(&f, &u[row]));
            }
        }
        row += 1;
    }
    (u, h)
}

/// Diagonal of the Smith normal form (nonzero invariant factors, ascending).
pub fn smith_invariants(a: &[ZVec]) -> Vec<Int> {
    let mut m: Vec<ZVec> = a.iter().filter(|r| !is_zero(r)).cloned().collect();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < m.len() && t < ncols {
        // pick smallest nonzero in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m.len() {
            for j in t..ncols {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        for r in m.iter_mut() {
            r.swap(t, bj);
        }
        loop {
            let piv = m[t][t].clone();
            let mut dirty = false;
            for i in t + 1..m.len() {
                if m[i][t].is_zero() {
                    continue;
                }
                let f = m[i][t].div_floor(&piv);
                let rt = m[t].clone();
                for j in t..ncols {
                    let d = &f * &rt[j];
                    m[i][j] -= d;
                }
                if !m[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..ncols {
                if m[t][j].is_zero() {
                    continue;
                }
                let f = m[t][j].div_floor(&piv);
                for i in t..m.len() {
                    let d = &f * &m[i][t];
                    m[i][j] -= d;
                }
                if !m[t][j].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // divisibility condition on the rest of the block
                let bad = (t + 1..m.len()).find_map(|i| {
                    (t + 1..ncols).find(|&j| !(&m[i][j] % &piv).is_zero()).map(|_| i)
                });
                match bad {
                    Some(i) => {
                        let ri = m[i].clone();
                        m[t] = add(&m[t], &ri);
                        continue;
                    }
                    None => break,
                }
            }
            // move the smallest entry of row/col t into the pivot
            let mut bi = (t, t);
            for i in t..m.len() {
                if !m[i][t].is_zero() && m[i][t].abs() < m[bi.0][bi.1].abs() {
                    bi = (i, t);
                }
            }
            for j in t..ncols {
                if !m[t][j].is_zero() && m[t][j].abs() < m[bi.0][bi.1].abs() {
                    bi = (t, j);
                }
            }
            m.swap(t, bi.0);
            for r in m.iter_mut() {
                r.swap(t, bi.1);
            }
        }
        out.push(m[t][t].abs());
        t += 1;
    }
    out.sort();
    out
}

/// The quotient `Z^d / (span(gens) ∩ Z^d)` as an explicit map and basis.
#[derive(Clone, Debug)]
pub struct LatticeQuotient {
    pub ambient: usize,
    pub span_rank: usize,
    /// Rows of the surjection onto `Z^(d - r)`.
    pub map: Vec<ZVec>,
    /// Lifts of the standard basis of the quotient.
    pub basis: Vec<ZVec>,
}

impl LatticeQuotient {
    pub fn new(ambient: usize, gens: &[ZVec]) -> Self {
        let cols: Vec<ZVec> = (0..ambient).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect();
        let (u, h) = if gens.is_empty() { (identity(ambient), vec![]) } else { hnf_with_transform(&cols) };
        let r = if gens.is_empty() { 0 } else { h.iter().filter(|row| !is_zero(row)).count() };
        let uinv = inverse_q(&u.iter().map(|x| to_q(x)).collect::<Vec<_>>()).expect("unimodular");
        let basis = (r..ambient)
            .map(|k| (0..ambient).map(|i| uinv[i][k].to_integer()).collect())
            .collect();
        LatticeQuotient { ambient, span_rank: r, map: u[r..].to_vec(), basis }
    }

    pub fn rank(&self) -> usize {
        self.ambient - self.span_rank
    }

    pub fn project(&self, x: &[Int]) -> ZVec {
        mat_vec(&self.map, x)
    }

    pub fn contains_in_span(&self, x: &[Int]) -> bool {
        is_zero(&self.project(x))
    }
}

pub fn is_unimodular(m: &[ZVec]) -> bool {
    m.len() == m.first().map_or(0, |r| r.len()) && det(m).abs().is_one()
}
