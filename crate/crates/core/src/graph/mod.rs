//! Lazily generated infinite graphs with canonical vertex encodings.
//!
//! A graph is presented by a family tag plus parameters; vertices are
//! family-specific integer tuples and neighbor lists are computed on
//! demand, so the infinite graph is never materialized.

mod ball;
mod embedding;
mod family;

pub use ball::{ball, boundary_ratio, sphere_ball_ratio, Ball, RatioSequence};
pub use embedding::{embedding_for, GraphEmbedding, SubgraphTag};
pub use family::{ntd_branch_depths, nongeom_branch_depths, Family, GraphSpec};

pub(crate) use family::{fnv_push, fnv_seed, tdp_gap};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Orbit canonicalization under automorphisms fixing a center.
pub type SymmetryReduction = Box<dyn Fn(&Vertex) -> Vertex + Send + Sync>;

/// A vertex, encoded as a finite integer tuple in the family's canonical
/// coordinates. Equality of encodings is equality of vertices; the
/// lexicographic order gives deterministic iteration everywhere.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex(pub Vec<i64>);

impl Vertex {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Vertex(coords.into())
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An infinite, locally finite, connected graph given by a neighbor oracle.
///
/// The oracle is pure: repeated calls return identical sorted lists, and
/// `y ∈ neighbors(x)` iff `x ∈ neighbors(y)`. A `LazyGraph` may be queried
/// concurrently without coordination.
#[derive(Clone, Debug)]
pub struct LazyGraph {
    family: Family,
}

impl LazyGraph {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(LazyGraph { family })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// The family's distinguished origin.
    pub fn root(&self) -> Vertex {
        self.family.root()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.family.contains(v)
    }

    /// Sorted, deduplicated neighbor list.
    pub fn neighbors(&self, v: &Vertex) -> Vec<Vertex> {
        let mut ns = self.family.raw_neighbors(v);
        ns.sort();
        ns.dedup();
        ns
    }

    pub fn degree(&self, v: &Vertex) -> usize {
        self.neighbors(v).len()
    }

    pub fn check_vertex(&self, v: &Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v.to_string()))
        }
    }

    /// Canonical key of the vertex's orbit under the family's automorphism
    /// group. Two vertices with equal keys see isomorphic rooted graphs, so
    /// their return series coincide; this backs the series caches and the
    /// aggregated averaging weights.
    pub fn vertex_class(&self, v: &Vertex) -> Vertex {
        self.family.vertex_class(v)
    }

    /// A concrete vertex whose class key is `class`.
    pub fn class_representative(&self, class: &Vertex) -> Vertex {
        self.family.class_representative(class)
    }

    /// Orbit representatives when the family has finitely many orbits
    /// (quasi-transitive families); `None` otherwise.
    pub fn orbit_representatives(&self) -> Option<Vec<Vertex>> {
        self.family.orbit_representatives()
    }

    /// Canonicalization of vertices under a subgroup of automorphisms
    /// fixing `center`, used to lump dynamic-programming states. The map
    /// sends each vertex to a canonical vertex in the same orbit (so
    /// `reduce(center) = center`). `None` when the family offers no
    /// reduction about this center.
    pub fn symmetry_reduction(&self, center: &Vertex) -> Option<SymmetryReduction> {
        self.family.symmetry_reduction(center)
    }

    /// Forward branching count at `level` for graphs that are radially
    /// symmetric about `center` (every vertex on the sphere of radius
    /// `level` has the same number of children and one parent). `None`
    /// when the reduction does not apply.
    pub fn radial_children(&self, center: &Vertex, level: u64) -> Option<u64> {
        self.family.radial_children(center, level)
    }

    /// Closed-form sphere cardinality |S(root, k)|, when the family has one.
    pub fn sphere_size(&self, k: u64) -> Option<u128> {
        self.family.sphere_size(k)
    }
}
