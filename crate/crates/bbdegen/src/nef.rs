//! Nef-partitions of reflexive polytopes and their dual data.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::fans::{normal_fan, support_function, Fan, FanError, PlFunction};
use crate::geometry::linalg::*;
use crate::geometry::{
    convex_hull, is_reflexive, minkowski_sum_all, polar_dual, GeometryError, Polyhedron, Side,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NefError {
    #[error("delta is not reflexive")]
    NotReflexive,
    #[error("part {0} is not a lattice polytope")]
    NonLatticePart(usize),
    #[error("part {0} does not contain the origin")]
    PartMissingOrigin(usize),
    #[error("parts do not live in the ambient space of delta")]
    AmbientMismatch,
    #[error("Minkowski sum of the parts differs from delta")]
    MinkowskiMismatch,
    #[error("phi_{part} takes value {value} on ray {ray}, expected 0 or 1")]
    PhiNotZeroOne { part: usize, ray: usize, value: String },
    #[error("identity failed: {0}")]
    Identity(String),
    #[error("polytope is not contained in the boundary of delta*")]
    NotOnBoundary,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

#[derive(Clone, Debug)]
pub struct NefPartition {
    pub delta: Polyhedron,
    pub parts: Vec<Polyhedron>,
    pub delta_star: Polyhedron,
    /// Normal fan of delta; its rays are the vertices of delta*.
    pub sigma: Arc<Fan>,
    pub phi: PlFunction,
    pub phi_parts: Vec<PlFunction>,
    /// For each ray of `sigma`, the part on which it has value 1.
    pub ray_part: Vec<usize>,
    pub nabla_parts: Vec<Polyhedron>,
    pub nabla: Polyhedron,
    pub nabla_star: Polyhedron,
    /// Parts whose dual part is the single point 0.
    pub degenerate: Vec<usize>,
}

impl NefPartition {
    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn rank(&self) -> usize {
        self.delta.space.rank
    }

    /// `phi_i(n) = -min over delta_i of <m, n>`.
    pub fn phi_i(&self, i: usize, n: &[Rat]) -> Rat {
        let (den, w) = homogenize(n);
        -self.parts[i].min_value(&w).expect("bounded") / Rat::from_integer(den)
    }

    pub fn phi_value(&self, n: &[Rat]) -> Rat {
        (0..self.r()).map(|i| self.phi_i(i, n)).sum()
    }

    /// Facet of delta* containing all the points, as a vertex of delta.
    pub fn common_facet(&self, pts: &[QVec]) -> Option<usize> {
        (0..self.delta.vertices.len())
            .find(|&k| pts.iter().all(|p| dot_q(&self.delta.vertices[k], p) == -Rat::one()))
    }

    /// `beta_i^*(sigma)`: the part of sigma where `phi_i = 1`.
    pub fn beta_star(&self, sigma: &Polyhedron, i: usize) -> Result<Option<Polyhedron>, NefError> {
        self.check_boundary(sigma)?;
        let pts: Vec<QVec> =
            sigma.vertices.iter().filter(|v| self.phi_i(i, v).is_one()).cloned().collect();
        if pts.is_empty() {
            return Ok(None);
        }
        Ok(Some(convex_hull(sigma.space, &pts, &[])?))
    }

    /// Minkowski sum of all `beta_i^*(sigma)`, `None` if one is empty.
    pub fn mbeta(&self, sigma: &Polyhedron) -> Result<Option<Polyhedron>, NefError> {
        let mut parts = Vec::new();
        for i in 0..self.r() {
            match self.beta_star(sigma, i)? {
                Some(b) => parts.push(b),
                None => return Ok(None),
            }
        }
        Ok(Some(minkowski_sum_all(&parts)?))
    }

    fn check_boundary(&self, sigma: &Polyhedron) -> Result<(), NefError> {
        if sigma.space != self.delta_star.space || self.common_facet(&sigma.vertices).is_none() {
            return Err(NefError::NotOnBoundary);
        }
        Ok(())
    }

    /// The dual nef-partition with parts `nabla_i`.
    pub fn swap_sides(&self) -> Result<NefPartition, NefError> {
        validate(&self.nabla, &self.nabla_parts)
    }
}

pub fn validate(delta: &Polyhedron, parts: &[Polyhedron]) -> Result<NefPartition, NefError> {
    if !is_reflexive(delta) {
        return Err(NefError::NotReflexive);
    }
    for (i, p) in parts.iter().enumerate() {
        if p.space.rank != delta.space.rank {
            return Err(NefError::AmbientMismatch);
        }
        if p.integral_vertices().is_none() || !p.is_bounded() {
            return Err(NefError::NonLatticePart(i));
        }
        if !p.contains(&vec![Rat::zero(); p.space.rank]) {
            return Err(NefError::PartMissingOrigin(i));
        }
    }
    let parts: Vec<Polyhedron> = parts
        .iter()
        .map(|p| convex_hull(delta.space, &p.vertices, &[]))
        .collect::<Result<_, _>>()?;
    if parts.is_empty() || minkowski_sum_all(&parts)? != *delta {
        return Err(NefError::MinkowskiMismatch);
    }
    let delta_star = polar_dual(delta)?;
    let sigma = Arc::new(normal_fan(delta)?);
    let phi = support_function(delta, sigma.clone())?;
    let phi_parts: Vec<PlFunction> =
        parts.iter().map(|p| support_function(p, sigma.clone())).collect::<Result<_, _>>()?;
    let mut ray_part = Vec::new();
    for (j, _) in sigma.rays.iter().enumerate() {
        let mut owner = None;
        for (i, f) in phi_parts.iter().enumerate() {
            let v = &f.ray_values()[j];
            if v.is_one() {
                owner = Some(i);
            } else if !v.is_zero() {
                return Err(NefError::PhiNotZeroOne { part: i, ray: j, value: fmt_rat(v) });
            }
        }
        match owner {
            Some(i) => ray_part.push(i),
            None => return Err(NefError::Identity(format!("phi vanishes on ray {}", j))),
        }
    }
    if !phi.ray_values().iter().all(|v| v.is_one()) {
        return Err(NefError::Identity("phi is not 1 on every ray".into()));
    }
    let nspace = delta.space.dual();
    let mut nabla_parts = Vec::new();
    let mut degenerate = Vec::new();
    for i in 0..parts.len() {
        let mut pts = vec![vec![Rat::zero(); nspace.rank]];
        for (j, r) in sigma.rays.iter().enumerate() {
            if ray_part[j] == i {
                pts.push(to_q(r));
            }
        }
        if pts.len() == 1 {
            degenerate.push(i);
        }
        nabla_parts.push(convex_hull(nspace, &pts, &[])?);
    }
    let nabla = minkowski_sum_all(&nabla_parts)?;
    let nabla_star = polar_dual(&nabla)?;
    let np = NefPartition {
        delta: delta.clone(),
        parts,
        delta_star,
        sigma,
        phi,
        phi_parts,
        ray_part,
        nabla_parts,
        nabla,
        nabla_star,
        degenerate,
    };
    check_identities(&np)?;
    Ok(np)
}

fn check_identities(np: &NefPartition) -> Result<(), NefError> {
    let conv = |ps: &[Polyhedron]| -> Result<Polyhedron, NefError> {
        let pts: Vec<QVec> = ps.iter().flat_map(|p| p.vertices.iter().cloned()).collect();
        Ok(convex_hull(ps[0].space, &pts, &[])?)
    };
    if conv(&np.parts)? != np.nabla_star {
        return Err(NefError::Identity("nabla* is not the hull of the parts".into()));
    }
    if conv(&np.nabla_parts)? != np.delta_star {
        return Err(NefError::Identity("delta* is not the hull of the dual parts".into()));
    }
    for (j, dj) in np.parts.iter().enumerate() {
        for (i, ni) in np.nabla_parts.iter().enumerate() {
            let bound = if i == j { -Rat::one() } else { Rat::zero() };
            for m in &dj.vertices {
                for n in &ni.vertices {
                    if dot_q(m, n) < bound {
                        return Err(NefError::Identity(format!("pairing bound fails for parts {} and {}", j, i)));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Builds a partition from integer vertex lists.
pub fn from_vertices(delta: &[ZVec], parts: &[Vec<ZVec>]) -> Result<NefPartition, NefError> {
    let d = delta.first().map_or(0, |v| v.len());
    let space = crate::geometry::LatticeSpace::new(d, Side::M);
    let dp = Polyhedron::from_integral(space, delta)?;
    let ps: Vec<Polyhedron> =
        parts.iter().map(|p| Polyhedron::from_integral(space, p)).collect::<Result<_, _>>()?;
    validate(&dp, &ps)
}

/// True when every value in the list is a nonnegative integer at most one.
pub fn zero_one(values: &[Rat]) -> bool {
    values.iter().all(|v| v.is_zero() || v.is_one()) && !values.iter().any(|v| v.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadric() -> NefPartition {
        from_vertices(
            &[zvec(&[1, 1]), zvec(&[-1, 1]), zvec(&[1, -1]), zvec(&[-1, -1])],
            &[vec![zvec(&[-1, 0]), zvec(&[1, 0])], vec![zvec(&[0, -1]), zvec(&[0, 1])]],
        )
        .unwrap()
    }

    #[test]
    fn quadric_dual_parts() {
        let np = quadric();
        let a: Vec<QVec> = vec![to_q(&zvec(&[-1, 0])), to_q(&zvec(&[1, 0]))];
        let b: Vec<QVec> = vec![to_q(&zvec(&[0, -1])), to_q(&zvec(&[0, 1]))];
        assert_eq!(np.nabla_parts[0].vertices, a);
        assert_eq!(np.nabla_parts[1].vertices, b);
        let back = np.swap_sides().unwrap().swap_sides().unwrap();
        assert_eq!(back.parts, np.parts);
    }

    #[test]
    fn single_part_is_anticanonical() {
        let sq = [zvec(&[1, 1]), zvec(&[-1, 1]), zvec(&[1, -1]), zvec(&[-1, -1])];
        let np = from_vertices(&sq, &[sq.to_vec()]).unwrap();
        assert_eq!(np.nabla_parts[0].vertices.len(), 5 - 1); // origin is interior
        assert_eq!(np.nabla, np.delta_star);
        let sw = np.swap_sides().unwrap();
        assert_eq!(sw.delta, np.delta_star);
    }

    #[test]
    fn rejects_non_lattice_and_non_reflexive() {
        let sq = [zvec(&[1, 1]), zvec(&[-1, 1]), zvec(&[1, -1]), zvec(&[-1, -1])];
        let sp = crate::geometry::LatticeSpace::new(2, Side::M);
        let delta = Polyhedron::from_integral(sp, &sq).unwrap();
        let half = convex_hull(sp, &[vec![Rat::new(zi(1), zi(2)), Rat::zero()], vec![Rat::zero(); 2]], &[]).unwrap();
        assert_eq!(validate(&delta, &[half]).unwrap_err(), NefError::NonLatticePart(0));
        let diamond = Polyhedron::from_integral(sp, &[zvec(&[1, 0]), zvec(&[-1, 0]), zvec(&[0, 2]), zvec(&[0, -2])]).unwrap();
        assert_eq!(validate(&diamond, &[diamond.clone()]).unwrap_err(), NefError::NotReflexive);
    }

    #[test]
    fn wrong_sum_is_rejected() {
        let sq = [zvec(&[1, 1]), zvec(&[-1, 1]), zvec(&[1, -1]), zvec(&[-1, -1])];
        let p1 = vec![zvec(&[0, 0]), zvec(&[1, 0])];
        let p2 = vec![zvec(&[0, 0]), zvec(&[0, 1])];
        assert_eq!(from_vertices(&sq, &[p1, p2]).unwrap_err(), NefError::MinkowskiMismatch);
    }
}
