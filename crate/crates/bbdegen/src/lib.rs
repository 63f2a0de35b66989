//! Combinatorics of toric degenerations of Calabi-Yau complete intersections
//! given by nef-partitions: affine complexes with singularities, monodromy,
//! discrete Legendre transforms and discriminant loci, in exact arithmetic.

pub mod geometry;
pub mod fans;
pub mod nef;
pub mod complex;
pub mod complex_basic;
pub mod complex_general;
pub mod homology;
pub mod discriminant;
pub mod io;
