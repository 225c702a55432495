//! Injective, adjacency-preserving maps of self-similar subgraphs into
//! themselves, used to transport flows from a base point to arbitrary
//! target vertices.

use super::{ball, Family, LazyGraph, Vertex};
use crate::error::{Error, Result};

/// Which self-similar subgraph an embedding acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubgraphTag {
    /// The identity on the whole graph.
    Identity,
    /// Whole-lattice translation (`zd`).
    Translation,
    /// The height-`<= 0` part of the hair graph, translated horizontally
    /// and downward.
    LowerHalfspace,
    /// Tree automorphism moving the root to any vertex of the same class,
    /// built by matching sorted neighbor menus step by step.
    TreeClass,
}

/// A verified injective map of a subgraph into itself with a designated
/// base point; `map(base_point) = target`.
#[derive(Clone, Debug)]
pub struct GraphEmbedding {
    graph: LazyGraph,
    tag: SubgraphTag,
    base_point: Vertex,
    target: Vertex,
}

impl GraphEmbedding {
    pub fn base_point(&self) -> &Vertex {
        &self.base_point
    }

    pub fn target(&self) -> &Vertex {
        &self.target
    }

    pub fn tag(&self) -> SubgraphTag {
        self.tag
    }

    /// Is `v` in the embedding's source subgraph?
    pub fn in_domain(&self, v: &Vertex) -> bool {
        match self.tag {
            SubgraphTag::Identity | SubgraphTag::Translation | SubgraphTag::TreeClass => true,
            SubgraphTag::LowerHalfspace => v.coords()[2] <= 0,
        }
    }

    /// Image of `v`; `None` outside the domain.
    pub fn map(&self, v: &Vertex) -> Option<Vertex> {
        if !self.in_domain(v) {
            return None;
        }
        match self.tag {
            SubgraphTag::Identity => Some(v.clone()),
            SubgraphTag::Translation | SubgraphTag::LowerHalfspace => {
                let delta: Vec<i64> = self
                    .target
                    .coords()
                    .iter()
                    .zip(self.base_point.coords())
                    .map(|(t, b)| t - b)
                    .collect();
                Some(Vertex(
                    v.coords().iter().zip(&delta).map(|(c, d)| c + d).collect(),
                ))
            }
            SubgraphTag::TreeClass => Some(self.tree_map(v)),
        }
    }

    /// Tree automorphism by menu matching: walk the geodesic from the base
    /// point to `v` and mirror each step from the target, pairing the
    /// sorted neighbor lists (minus the arrival edges) rank by rank.
    /// Degrees depend only on the vertex class, and base and target share
    /// a class, so the menus always have equal sizes.
    fn tree_map(&self, v: &Vertex) -> Vertex {
        let path = tree_geodesic(&self.graph, &self.base_point, v);
        let mut cur_src = self.base_point.clone();
        let mut cur_img = self.target.clone();
        let mut prev_src: Option<Vertex> = None;
        let mut prev_img: Option<Vertex> = None;
        for step in path {
            let menu_src: Vec<Vertex> = self
                .graph
                .neighbors(&cur_src)
                .into_iter()
                .filter(|w| Some(w) != prev_src.as_ref())
                .collect();
            let menu_img: Vec<Vertex> = self
                .graph
                .neighbors(&cur_img)
                .into_iter()
                .filter(|w| Some(w) != prev_img.as_ref())
                .collect();
            debug_assert_eq!(menu_src.len(), menu_img.len(), "menu size mismatch");
            let rank = menu_src
                .iter()
                .position(|w| *w == step)
                .expect("geodesic step is a neighbor");
            prev_src = Some(std::mem::replace(&mut cur_src, step));
            prev_img = Some(std::mem::replace(&mut cur_img, menu_img[rank].clone()));
        }
        cur_img
    }

    /// Spot-check on the radius-`r` ball around the base point: adjacency
    /// preservation for all inside edges, and injectivity.
    pub fn verify(&self, radius: u64) -> Result<()> {
        let b = ball(&self.graph, &self.base_point, radius)?;
        let inside: Vec<&Vertex> = b.vertices().filter(|v| self.in_domain(v)).collect();
        let mut images = std::collections::HashSet::new();
        for v in &inside {
            let img = self.map(v).expect("in domain");
            self.graph.check_vertex(&img)?;
            if !images.insert(img) {
                return Err(Error::EmbeddingViolation {
                    from: v.to_string(),
                    to: "duplicate image (injectivity)".into(),
                });
            }
        }
        let members = b.member_set();
        for v in &inside {
            let iv = self.map(v).expect("in domain");
            for w in self.graph.neighbors(v) {
                if self.in_domain(&w) && members.contains(&w) {
                    let iw = self.map(&w).expect("in domain");
                    if !self.graph.neighbors(&iv).contains(&iw) {
                        return Err(Error::EmbeddingViolation {
                            from: v.to_string(),
                            to: w.to_string(),
                        });
                    }
                }
            }
        }
        if self.map(&self.base_point).as_ref() != Some(&self.target) {
            return Err(Error::EmbeddingViolation {
                from: self.base_point.to_string(),
                to: format!("base point does not map to {}", self.target),
            });
        }
        Ok(())
    }
}

/// Geodesic from `a` to `b` in a tree: up from `a` to the deepest common
/// ancestor, then down to `b`. Returns the vertices visited after each
/// step (excluding `a` itself).
fn tree_geodesic(graph: &LazyGraph, a: &Vertex, b: &Vertex) -> Vec<Vertex> {
    // root path: v, parent(v), .., root
    let chain = |v: &Vertex| -> Vec<Vertex> {
        let mut out = vec![v.clone()];
        let mut cur = v.clone();
        while cur.coords()[0] > 0 {
            let parent = graph
                .neighbors(&cur)
                .into_iter()
                .find(|w| w.coords()[0] < cur.coords()[0])
                .expect("non-root tree vertex has a parent");
            out.push(parent.clone());
            cur = out.last().unwrap().clone();
        }
        out
    };
    let up_a = chain(a);
    let up_b = chain(b);
    // Longest common suffix = path through the deepest common ancestor.
    let mut common = 0;
    while common < up_a.len()
        && common < up_b.len()
        && up_a[up_a.len() - 1 - common] == up_b[up_b.len() - 1 - common]
    {
        common += 1;
    }
    let mut path: Vec<Vertex> = if common < up_a.len() {
        up_a[1..=up_a.len() - common].to_vec()
    } else {
        Vec::new()
    };
    path.extend(up_b[..up_b.len() - common + 1].iter().rev().skip(1).cloned());
    path
}

/// Builds an embedding for the tagged subgraph moving the family's base
/// point to `target`. Verification (adjacency spot-check on a radius-`r`
/// ball) runs before the embedding is returned.
pub fn embedding_for(
    graph: &LazyGraph,
    tag: SubgraphTag,
    target: &Vertex,
    verify_radius: u64,
) -> Result<GraphEmbedding> {
    graph.check_vertex(target)?;
    let base_point = graph.root();
    let emb = match (tag, graph.family()) {
        (SubgraphTag::Identity, _) => {
            if target != &base_point {
                return Err(Error::UnsupportedEmbedding(
                    "identity embedding requires target = base point".into(),
                ));
            }
            GraphEmbedding {
                graph: graph.clone(),
                tag,
                base_point,
                target: target.clone(),
            }
        }
        (SubgraphTag::Translation, Family::Zd { .. }) => GraphEmbedding {
            graph: graph.clone(),
            tag,
            base_point,
            target: target.clone(),
        },
        (SubgraphTag::LowerHalfspace, Family::Hair) => {
            if target.coords()[2] > 0 {
                return Err(Error::UnsupportedEmbedding(
                    "lower-halfspace embedding needs a target of height <= 0".into(),
                ));
            }
            GraphEmbedding {
                graph: graph.clone(),
                tag,
                base_point,
                target: target.clone(),
            }
        }
        (
            SubgraphTag::TreeClass,
            Family::HomTree { .. } | Family::BihomTree { .. } | Family::TreePrime { .. },
        ) => {
            if graph.vertex_class(target) != graph.vertex_class(&base_point) {
                return Err(Error::UnsupportedEmbedding(format!(
                    "target {} is not in the base point's vertex class",
                    target
                )));
            }
            GraphEmbedding {
                graph: graph.clone(),
                tag,
                base_point,
                target: target.clone(),
            }
        }
        (tag, fam) => {
            return Err(Error::UnsupportedEmbedding(format!(
                "{tag:?} on family {}",
                fam.tag()
            )))
        }
    };
    emb.verify(verify_radius)?;
    Ok(emb)
}
