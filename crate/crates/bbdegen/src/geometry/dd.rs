//! Double description over the integers: from `a . y >= 0` constraints to
//! a lineality basis plus extreme rays.

use num_traits::{Signed, Zero};

use super::linalg::{dot, primitive, Int, ZVec};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<u64>);

impl Bits {
    pub fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    pub fn full(n: usize) -> Self {
        let mut b = Bits::new(n);
        for i in 0..n {
            b.insert(i);
        }
        b
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut b = Bits::new(n);
        for i in it {
            b.insert(i);
        }
        b
    }

    pub fn insert(&mut self, i: usize) {
        if i / 64 >= self.0.len() {
            self.0.resize(i / 64 + 1, 0);
        }
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    pub fn and(&self, o: &Bits) -> Bits {
        let n = self.0.len().max(o.0.len());
        Bits((0..n)
            .map(|i| self.0.get(i).copied().unwrap_or(0) & o.0.get(i).copied().unwrap_or(0))
            .collect())
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset(&self, o: &Bits) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, w)| w & !o.0.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConeRep {
    pub lineality: Vec<ZVec>,
    pub rays: Vec<ZVec>,
}

/// Computes generators of `{y : a_k . y >= 0 for all k}` in `dim` variables.
pub fn dd_cone(dim: usize, constraints: &[ZVec]) -> ConeRep {
    let mut lin: Vec<ZVec> = (0..dim)
        .map(|i| (0..dim).map(|j| Int::from((i == j) as i64)).collect())
        .collect();
    let mut rays: Vec<ZVec> = Vec::new();
    let mut tight: Vec<Bits> = Vec::new();
    let m = constraints.len();

    for (k, a) in constraints.iter().enumerate() {
        if a.iter().all(|x| x.is_zero()) {
            for t in tight.iter_mut() {
                t.insert(k);
            }
            continue;
        }
        if let Some(li) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = lin.swap_remove(li);
            let mut al = dot(a, &l);
            if al.is_negative() {
                l = l.iter().map(|x| -x).collect();
                al = -al;
            }
            for v in lin.iter_mut().chain(rays.iter_mut()) {
                let av = dot(a, v);
                if !av.is_zero() {
                    let w: ZVec = v.iter().zip(&l).map(|(x, y)| x * &al - y * &av).collect();
                    *v = primitive(w);
                }
            }
            for t in tight.iter_mut() {
                t.insert(k);
            }
            rays.push(l);
            tight.push(Bits::from_iter(m, 0..k));
            continue;
        }

        let vals: Vec<Int> = rays.iter().map(|r| dot(a, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            for i in 0..rays.len() {
                if vals[i].is_zero() {
                    tight[i].insert(k);
                }
            }
            continue;
        }
        let pointed = dim - lin.len();
        let mut new_rays = Vec::new();
        let mut new_tight = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let s = tight[p].and(&tight[n]);
                if s.count() + 2 < pointed {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|r| r == p || r == n || !s.is_subset(&tight[r]));
                if !adjacent {
                    continue;
                }
                let w: ZVec = rays[n]
                    .iter()
                    .zip(&rays[p])
                    .map(|(x, y)| x * &vals[p] - y * &vals[n])
                    .collect();
                let mut s = s;
                s.insert(k);
                new_rays.push(primitive(w));
                new_tight.push(s);
            }
        }
        let mut kept_rays = Vec::new();
        let mut kept_tight = Vec::new();
        for i in 0..rays.len() {
            if vals[i].is_negative() {
                continue;
            }
            let mut t = tight[i].clone();
            if vals[i].is_zero() {
                t.insert(k);
            }
            kept_rays.push(rays[i].clone());
            kept_tight.push(t);
        }
        kept_rays.extend(new_rays);
        kept_tight.extend(new_tight);
        rays = kept_rays;
        tight = kept_tight;
    }
    ConeRep { lineality: lin, rays }
}
