//! Graph family constructors.
//!
//! Every family fixes a canonical vertex encoding:
//!
//! * `zd` — lattice point `[x_1, .., x_d]`;
//! * trees (`homogeneous_tree`, `bihomogeneous_tree`, `tree_prime`,
//!   `tree_doubleprime`, `ntd`, `nongeomlim`) — `[depth, c_1, .., c_j]`
//!   where the `c_i` are the child choices made at the branch points
//!   crossed on the way down from the root (single-child steps record
//!   nothing, which keeps deep chain vertices compact);
//! * `trt` — `[n, p]`, the vertex `p` of the cycle attached at spine
//!   position `n` (cycle length `n+1`);
//! * `hair` — `[x, y, z]` in the ambient lattice; horizontal edges exist
//!   only at height `z ≤ 0`;
//! * `cubes` — `[i, a, b, c]`, position `(a,b,c)` inside the side-`i`
//!   cube attached at spine vertex `i`; the all-zeros corner is the spine
//!   vertex itself.

use super::Vertex;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Family tag plus parameters, as read from a graph spec document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphSpec {
    pub family: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// The lattice Z^d with nearest-neighbor edges.
    Zd { d: usize },
    /// Homogeneous tree where every vertex has degree `q`.
    HomTree { q: u64 },
    /// Bihomogeneous tree: degrees alternate `m`, `n` along every edge.
    /// The root has degree `m`.
    BihomTree { m: u64, n: u64 },
    /// Tree with degrees 2 and `k`; ramifications exactly every `n` levels.
    TreePrime { k: u64, n: u64 },
    /// Tree with degrees 2 and `k`; the gap between consecutive
    /// ramifications is between 1 and `n`, drawn from a seeded hash so the
    /// instance is reproducible.
    TreeDoublePrime { k: u64, n: u64, seed: u64 },
    /// Spine of cycles: cycle of length `n+1` attached at spine position `n`.
    Trt,
    /// Tree branching `alpha`-fold at depths s_j = beta + beta^2 + .. + beta^j
    /// (and at the root), chains of single children in between.
    Ntd { alpha: u64, beta: u64 },
    /// Tree branching `j`-fold at depth s_j (s_1 = 1, s_{j+1} = s_j + j + 1),
    /// so the branching numbers are unbounded while the sphere/ball growth
    /// ratio stays bounded.
    NonGeomLim,
    /// Z^3 with every horizontal edge at positive height removed.
    Hair,
    /// Half-line spine with a side-`i` cube lattice attached by a corner at
    /// spine vertex `i`.
    Cubes,
}

impl Family {
    pub fn from_spec(spec: &GraphSpec) -> Result<Family> {
        fn want_u64(params: &serde_json::Value, key: &str) -> Result<u64> {
            params
                .get(key)
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::SpecParse(format!("missing integer param `{key}`")))
        }
        let fam = match spec.family.as_str() {
            "zd" => Family::Zd {
                d: want_u64(&spec.params, "d")? as usize,
            },
            "homogeneous_tree" => Family::HomTree {
                q: want_u64(&spec.params, "q")?,
            },
            "bihomogeneous_tree" => Family::BihomTree {
                m: want_u64(&spec.params, "m")?,
                n: want_u64(&spec.params, "n")?,
            },
            "tree_prime" => Family::TreePrime {
                k: want_u64(&spec.params, "k")?,
                n: want_u64(&spec.params, "n")?,
            },
            "tree_doubleprime" => Family::TreeDoublePrime {
                k: want_u64(&spec.params, "k")?,
                n: want_u64(&spec.params, "n")?,
                seed: want_u64(&spec.params, "seed")?,
            },
            "trt" => Family::Trt,
            "ntd" => Family::Ntd {
                alpha: want_u64(&spec.params, "alpha")?,
                beta: want_u64(&spec.params, "beta")?,
            },
            "nongeomlim" => Family::NonGeomLim,
            "hair" => Family::Hair,
            "cubes" => Family::Cubes,
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Family::Zd { .. } => "zd",
            Family::HomTree { .. } => "homogeneous_tree",
            Family::BihomTree { .. } => "bihomogeneous_tree",
            Family::TreePrime { .. } => "tree_prime",
            Family::TreeDoublePrime { .. } => "tree_doubleprime",
            Family::Trt => "trt",
            Family::Ntd { .. } => "ntd",
            Family::NonGeomLim => "nongeomlim",
            Family::Hair => "hair",
            Family::Cubes => "cubes",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |param: &str, constraint: &str| {
            Err(Error::ParamOutOfRange {
                param: param.into(),
                constraint: constraint.into(),
            })
        };
        match *self {
            Family::Zd { d } => {
                if d == 0 || d > 8 {
                    return bad("d", "1 <= d <= 8");
                }
            }
            Family::HomTree { q } => {
                if q < 2 {
                    return bad("q", "q >= 2");
                }
            }
            Family::BihomTree { m, n } => {
                if m < 2 || n < 2 {
                    return bad("m, n", "m >= 2 and n >= 2");
                }
            }
            Family::TreePrime { k, n } | Family::TreeDoublePrime { k, n, .. } => {
                if k < 3 {
                    return bad("k", "k >= 3");
                }
                if n < 2 {
                    return bad("n", "n >= 2");
                }
            }
            Family::Ntd { alpha, beta } => {
                if alpha < 1 {
                    return bad("alpha", "alpha >= 1");
                }
                if beta < 2 {
                    return bad("beta", "beta >= 2 (integer)");
                }
            }
            Family::Trt | Family::NonGeomLim | Family::Hair | Family::Cubes => {}
        }
        Ok(())
    }

    pub fn root(&self) -> Vertex {
        match self {
            Family::Zd { d } => Vertex(vec![0; *d]),
            Family::Trt => Vertex(vec![0, 0]),
            Family::Hair => Vertex(vec![0, 0, 0]),
            Family::Cubes => Vertex(vec![0, 0, 0, 0]),
            // All trees: the root at depth 0 with no choices.
            _ => Vertex(vec![0]),
        }
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        let c = v.coords();
        match *self {
            Family::Zd { d } => c.len() == d,
            Family::Trt => {
                c.len() == 2 && c[0] >= 0 && c[1] >= 0 && c[1] <= c[0]
            }
            Family::Hair => c.len() == 3,
            Family::Cubes => {
                c.len() == 4
                    && c[0] >= 0
                    && c[1..].iter().all(|&x| x >= 0 && x <= c[0])
            }
            _ => self.tree_contains(c),
        }
    }

    pub(super) fn raw_neighbors(&self, v: &Vertex) -> Vec<Vertex> {
        debug_assert!(self.contains(v), "neighbor query outside graph: {v}");
        let c = v.coords();
        match *self {
            Family::Zd { d } => {
                let mut out = Vec::with_capacity(2 * d);
                for i in 0..d {
                    for s in [-1i64, 1] {
                        let mut w = c.to_vec();
                        w[i] += s;
                        out.push(Vertex(w));
                    }
                }
                out
            }
            Family::Hair => {
                let (x, y, z) = (c[0], c[1], c[2]);
                let mut out = vec![
                    Vertex(vec![x, y, z + 1]),
                    Vertex(vec![x, y, z - 1]),
                ];
                if z <= 0 {
                    out.push(Vertex(vec![x + 1, y, z]));
                    out.push(Vertex(vec![x - 1, y, z]));
                    out.push(Vertex(vec![x, y + 1, z]));
                    out.push(Vertex(vec![x, y - 1, z]));
                }
                out
            }
            Family::Trt => {
                let (n, p) = (c[0], c[1]);
                let len = n + 1; // cycle Z_{n+1}
                let mut out = Vec::with_capacity(4);
                if p == 0 {
                    if n >= 1 {
                        out.push(Vertex(vec![n - 1, 0]));
                    }
                    out.push(Vertex(vec![n + 1, 0]));
                }
                if len >= 2 {
                    out.push(Vertex(vec![n, (p + 1).rem_euclid(len)]));
                    out.push(Vertex(vec![n, (p - 1).rem_euclid(len)]));
                }
                out
            }
            Family::Cubes => {
                let (i, a, b, cc) = (c[0], c[1], c[2], c[3]);
                let side = i;
                let mut out = Vec::with_capacity(8);
                for (idx, val) in [(1usize, a), (2, b), (3, cc)] {
                    for s in [-1i64, 1] {
                        let nv = val + s;
                        if nv >= 0 && nv <= side {
                            let mut w = vec![i, a, b, cc];
                            w[idx] = nv;
                            out.push(Vertex(w));
                        }
                    }
                }
                if (a, b, cc) == (0, 0, 0) {
                    if i >= 1 {
                        out.push(Vertex(vec![i - 1, 0, 0, 0]));
                    }
                    out.push(Vertex(vec![i + 1, 0, 0, 0]));
                }
                out
            }
            _ => self.tree_neighbors(c),
        }
    }

    // ---- tree machinery (compact [depth, choices..] encoding) ----

    /// Number of children of a vertex at `depth` on the given root path.
    /// For all families but `tree_doubleprime` this depends on the depth
    /// alone; the seeded family replays the path to locate ramifications.
    pub(crate) fn tree_child_count(&self, depth: u64, choices: &[i64]) -> u64 {
        match *self {
            Family::HomTree { q } => {
                if depth == 0 {
                    q
                } else {
                    q - 1
                }
            }
            Family::BihomTree { m, n } => {
                if depth == 0 {
                    m
                } else if depth % 2 == 0 {
                    m - 1
                } else {
                    n - 1
                }
            }
            Family::TreePrime { k, n } => {
                if depth == 0 {
                    k
                } else if depth % n == 0 {
                    k - 1
                } else {
                    1
                }
            }
            Family::TreeDoublePrime { k, n, seed } => {
                // Replay ramification gaps along the path. The root is a
                // ramification; the gap below a ramification depends on the
                // seed and on the branch choices taken down to and
                // including it, so distinct branches get independent gaps.
                let mut ram = 0u64;
                let mut crossings = 0usize;
                let mut h = fnv_seed(seed);
                while ram < depth {
                    if crossings < choices.len() {
                        h = fnv_push(h, choices[crossings] as u64);
                    }
                    let gap = tdp_gap(n, h, ram);
                    crossings += 1;
                    ram += gap;
                }
                if ram == depth {
                    if depth == 0 {
                        k
                    } else {
                        k - 1
                    }
                } else {
                    1
                }
            }
            Family::Ntd { alpha, beta } => {
                if ntd_is_branch_depth(depth, beta) {
                    alpha
                } else {
                    1
                }
            }
            Family::NonGeomLim => nongeom_branch_count(depth),
            _ => unreachable!("not a tree family"),
        }
    }

    fn tree_contains(&self, c: &[i64]) -> bool {
        if c.is_empty() || c[0] < 0 {
            return false;
        }
        let depth = c[0] as u64;
        let choices = &c[1..];
        let mut used = 0usize;
        for d in 0..depth {
            let cnt = self.tree_child_count(d, &choices[..used]);
            if cnt > 1 {
                if used >= choices.len() {
                    return false;
                }
                if choices[used] < 0 || (choices[used] as u64) >= cnt {
                    return false;
                }
                used += 1;
            }
        }
        used == choices.len()
    }

    fn tree_neighbors(&self, c: &[i64]) -> Vec<Vertex> {
        let depth = c[0] as u64;
        let choices = &c[1..];
        let mut out = Vec::new();
        // Parent: drop the recorded choice when the step up to depth-1
        // re-crosses a branch point.
        if depth > 0 {
            let parent_choices: Vec<i64> =
                if self.tree_child_count_on(depth - 1, c) > 1 {
                    choices[..choices.len() - 1].to_vec()
                } else {
                    choices.to_vec()
                };
            let mut w = Vec::with_capacity(1 + parent_choices.len());
            w.push(depth as i64 - 1);
            w.extend_from_slice(&parent_choices);
            out.push(Vertex(w));
        }
        // Children.
        let cnt = self.tree_child_count_on(depth, c);
        if cnt == 1 {
            let mut w = c.to_vec();
            w[0] += 1;
            out.push(Vertex(w));
        } else {
            for ch in 0..cnt {
                let mut w = c.to_vec();
                w[0] += 1;
                w.push(ch as i64);
                out.push(Vertex(w));
            }
        }
        out
    }

    /// Child count at `depth` for the vertex encoded by `c` (the choices
    /// above `depth` are a prefix of `c`'s choices).
    fn tree_child_count_on(&self, depth: u64, c: &[i64]) -> u64 {
        self.tree_child_count(depth, &c[1..])
    }

    // ---- symmetry structure ----

    pub(super) fn vertex_class(&self, v: &Vertex) -> Vertex {
        let c = v.coords();
        match *self {
            Family::Zd { .. } | Family::HomTree { .. } => Vertex(vec![]),
            Family::BihomTree { .. } => Vertex(vec![c[0] % 2]),
            Family::TreePrime { n, .. } => Vertex(vec![c[0] % n as i64]),
            Family::TreeDoublePrime { .. } => v.clone(),
            Family::Trt => {
                let (n, p) = (c[0], c[1]);
                Vertex(vec![n, p.min(n + 1 - p)])
            }
            Family::Ntd { .. } | Family::NonGeomLim => Vertex(vec![c[0]]),
            Family::Hair => Vertex(vec![c[2]]),
            Family::Cubes => {
                let mut pos = [c[1], c[2], c[3]];
                pos.sort_unstable();
                Vertex(vec![c[0], pos[0], pos[1], pos[2]])
            }
        }
    }

    pub(super) fn class_representative(&self, class: &Vertex) -> Vertex {
        let c = class.coords();
        match *self {
            Family::Zd { d } => Vertex(vec![0; d]),
            Family::HomTree { .. } => Vertex(vec![0]),
            Family::BihomTree { .. } | Family::TreePrime { .. } => self.chain_of_zeros(c[0] as u64),
            Family::TreeDoublePrime { .. } => class.clone(),
            Family::Trt => Vertex(vec![c[0], c[1]]),
            Family::Ntd { .. } | Family::NonGeomLim => self.chain_of_zeros(c[0] as u64),
            Family::Hair => Vertex(vec![0, 0, c[0]]),
            Family::Cubes => Vertex(vec![c[0], c[1], c[2], c[3]]),
        }
    }

    /// The depth-`d` vertex reached from the root by always taking child 0.
    fn chain_of_zeros(&self, d: u64) -> Vertex {
        let mut cur = self.root();
        for step in 0..d {
            let cnt = self.tree_child_count_on(step, cur.coords());
            let mut w = cur.0;
            w[0] += 1;
            if cnt > 1 {
                w.push(0);
            }
            cur = Vertex(w);
        }
        cur
    }

    pub(super) fn orbit_representatives(&self) -> Option<Vec<Vertex>> {
        match *self {
            Family::Zd { .. } | Family::HomTree { .. } => Some(vec![self.root()]),
            Family::BihomTree { .. } => Some(vec![self.root(), self.chain_of_zeros(1)]),
            Family::TreePrime { n, .. } => {
                Some((0..n).map(|d| self.chain_of_zeros(d)).collect())
            }
            _ => None,
        }
    }

    pub(super) fn symmetry_reduction(
        &self,
        center: &Vertex,
    ) -> Option<super::SymmetryReduction> {
        match *self {
            // Octahedral reduction about any point: sort |v - center| and
            // re-anchor at the center.
            Family::Zd { .. } => {
                let c = center.coords().to_vec();
                Some(Box::new(move |v: &Vertex| {
                    let mut w: Vec<i64> = v
                        .coords()
                        .iter()
                        .zip(&c)
                        .map(|(x, cx)| (x - cx).abs())
                        .collect();
                    w.sort_unstable();
                    Vertex(w.iter().zip(&c).map(|(d, cx)| cx + d).collect())
                }))
            }
            // Horizontal dihedral reduction about the center's column.
            Family::Hair => {
                let (x0, y0) = (center.coords()[0], center.coords()[1]);
                Some(Box::new(move |v: &Vertex| {
                    let (a, b) = ((v.coords()[0] - x0).abs(), (v.coords()[1] - y0).abs());
                    Vertex(vec![x0 + a.max(b), y0 + a.min(b), v.coords()[2]])
                }))
            }
            // Cycle reflection fixing the whole spine; valid only for
            // spine centers.
            Family::Trt => {
                if center.coords()[1] == 0 {
                    Some(Box::new(|v: &Vertex| {
                        let (n, p) = (v.coords()[0], v.coords()[1]);
                        Vertex(vec![n, p.min(n + 1 - p)])
                    }))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub(super) fn radial_children(&self, center: &Vertex, level: u64) -> Option<u64> {
        match *self {
            Family::HomTree { q } => {
                Some(if level == 0 { q } else { q - 1 })
            }
            Family::BihomTree { m, n } => {
                // Valid from any vertex; the class of the center decides
                // which degree alternates first.
                let start_even = center.coords()[0] % 2 == 0;
                let (d0, d1) = if start_even { (m, n) } else { (n, m) };
                Some(match (level == 0, level % 2 == 0) {
                    (true, _) => d0,
                    (false, true) => d0 - 1,
                    (false, false) => d1 - 1,
                })
            }
            Family::TreePrime { .. } | Family::Ntd { .. } | Family::NonGeomLim => {
                if center == &self.root() {
                    Some(self.tree_child_count(level, &[]))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub(super) fn sphere_size(&self, k: u64) -> Option<u128> {
        match *self {
            Family::Zd { d } => Some(match d {
                1 => {
                    if k == 0 {
                        1
                    } else {
                        2
                    }
                }
                2 => {
                    if k == 0 {
                        1
                    } else {
                        4 * k as u128
                    }
                }
                3 => {
                    if k == 0 {
                        1
                    } else {
                        4 * (k as u128) * (k as u128) + 2
                    }
                }
                _ => return None,
            }),
            Family::HomTree { .. }
            | Family::BihomTree { .. }
            | Family::TreePrime { .. }
            | Family::Ntd { .. }
            | Family::NonGeomLim => {
                let mut size: u128 = 1;
                for lvl in 0..k {
                    size = size.checked_mul(self.tree_child_count(lvl, &[]) as u128)?;
                }
                Some(size)
            }
            _ => None,
        }
    }
}

/// Branch depths of the `ntd` family: 0 and s_j = beta + .. + beta^j.
fn ntd_is_branch_depth(depth: u64, beta: u64) -> bool {
    let mut s = 0u64;
    let mut term = beta;
    loop {
        if s == depth {
            return true;
        }
        if s > depth {
            return false;
        }
        s = match s.checked_add(term) {
            Some(v) => v,
            None => return false,
        };
        term = match term.checked_mul(beta) {
            Some(v) => v,
            None => u64::MAX,
        };
    }
}

/// NTD branch depths as an explicit list up to `max_depth`.
pub fn ntd_branch_depths(beta: u64, max_depth: u64) -> Vec<u64> {
    let mut out = vec![0];
    let mut s = 0u64;
    let mut term = beta;
    while s.saturating_add(term) <= max_depth {
        s += term;
        term = term.saturating_mul(beta);
        out.push(s);
    }
    out
}

/// Branch count at `depth` for `nongeomlim`: j at s_j = j(j+1)/2, else 1
/// (the j = 1 point is a formal branch of multiplicity 1).
fn nongeom_branch_count(depth: u64) -> u64 {
    if depth == 0 {
        return 1;
    }
    // depth = j(j+1)/2 for integer j?
    let j = ((((8 * depth + 1) as f64).sqrt() - 1.0) / 2.0).round() as u64;
    if j * (j + 1) / 2 == depth {
        j.max(1)
    } else {
        1
    }
}

/// `nongeomlim` branch depths s_j (j >= 2) up to `max_depth`.
pub fn nongeom_branch_depths(max_depth: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut j = 2u64;
    while j * (j + 1) / 2 <= max_depth {
        out.push((j * (j + 1) / 2, j));
        j += 1;
    }
    out
}

/// Incremental FNV-1a over u64 words; the walk samplers keep a stack of
/// intermediate states so gap lookups stay O(1) per step.
pub(crate) fn fnv_seed(seed: u64) -> u64 {
    fnv_push(0xcbf29ce484222325, seed)
}

pub(crate) fn fnv_push(mut h: u64, x: u64) -> u64 {
    for b in x.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Gap below the ramification at `ram` whose choice-path hash is `h`.
pub(crate) fn tdp_gap(n: u64, h: u64, ram: u64) -> u64 {
    1 + fnv_push(h, ram) % n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LazyGraph;

    fn graph(f: Family) -> LazyGraph {
        LazyGraph::new(f).unwrap()
    }

    #[test]
    fn zd_neighbors() {
        let g = graph(Family::Zd { d: 1 });
        assert_eq!(
            g.neighbors(&Vertex(vec![0])),
            vec![Vertex(vec![-1]), Vertex(vec![1])]
        );
        let g2 = graph(Family::Zd { d: 2 });
        assert_eq!(g2.degree(&Vertex(vec![3, -4])), 4);
    }

    #[test]
    fn trt_degrees_follow_the_adjacency_rules() {
        let g = graph(Family::Trt);
        // (n,p) with p != 0 has exactly 2 neighbors (n >= 2).
        for n in 2..10 {
            for p in 1..=n {
                assert_eq!(g.degree(&Vertex(vec![n, p])), 2, "({n},{p})");
            }
            // (n,0) has 4 neighbors: spine +-1, cycle +-1.
            assert_eq!(g.degree(&Vertex(vec![n, 0])), 4, "({n},0)");
        }
        // Small cases: (0,0) -- only the spine; (1,*) -- one cycle edge.
        assert_eq!(g.neighbors(&Vertex(vec![0, 0])), vec![Vertex(vec![1, 0])]);
        assert_eq!(
            g.neighbors(&Vertex(vec![1, 1])),
            vec![Vertex(vec![1, 0])]
        );
        assert_eq!(g.degree(&Vertex(vec![1, 0])), 3);
    }

    #[test]
    fn hair_vertical_only_above() {
        let g = graph(Family::Hair);
        assert_eq!(g.degree(&Vertex(vec![5, -2, 2])), 2);
        assert_eq!(g.degree(&Vertex(vec![5, -2, 0])), 6);
        assert_eq!(g.degree(&Vertex(vec![5, -2, -3])), 6);
    }

    #[test]
    fn cubes_degrees() {
        let g = graph(Family::Cubes);
        // Interior spine vertex: 2 spine + 3 cube corner edges.
        assert_eq!(g.degree(&Vertex(vec![4, 0, 0, 0])), 5);
        // Cube interior vertex of a big cube: degree 6.
        assert_eq!(g.degree(&Vertex(vec![6, 3, 2, 4])), 6);
        // Spine end.
        assert_eq!(g.degree(&Vertex(vec![0, 0, 0, 0])), 1);
    }

    #[test]
    fn tree_roundtrip_parent_child() {
        for f in [
            Family::HomTree { q: 3 },
            Family::BihomTree { m: 2, n: 3 },
            Family::TreePrime { k: 3, n: 2 },
            Family::TreeDoublePrime {
                k: 3,
                n: 2,
                seed: 11,
            },
            Family::Ntd { alpha: 3, beta: 2 },
            Family::NonGeomLim,
        ] {
            let g = graph(f);
            // Walk down a few levels, checking parent/child symmetry.
            let mut frontier = vec![g.root()];
            for _ in 0..6 {
                let mut next = Vec::new();
                for v in &frontier {
                    for w in g.neighbors(v) {
                        assert!(g.contains(&w), "{w} not in graph");
                        assert!(
                            g.neighbors(&w).contains(v),
                            "asymmetric edge {v} ~ {w}"
                        );
                        if w.coords()[0] > v.coords()[0] {
                            next.push(w);
                        }
                    }
                }
                frontier = next;
            }
        }
    }

    #[test]
    fn ntd_branch_depth_schedule() {
        assert_eq!(ntd_branch_depths(2, 30), vec![0, 2, 6, 14, 30]);
        assert_eq!(ntd_branch_depths(3, 39), vec![0, 3, 12, 39]);
    }

    #[test]
    fn nongeom_schedule_is_triangular() {
        assert_eq!(
            nongeom_branch_depths(21),
            vec![(3, 2), (6, 3), (10, 4), (15, 5), (21, 6)]
        );
    }

    #[test]
    fn class_representative_roundtrip() {
        for f in [
            Family::Zd { d: 2 },
            Family::Trt,
            Family::Hair,
            Family::Cubes,
            Family::Ntd { alpha: 3, beta: 2 },
            Family::BihomTree { m: 2, n: 3 },
        ] {
            let g = graph(f);
            let mut seen = vec![g.root()];
            for _ in 0..4 {
                let mut next = Vec::new();
                for v in &seen {
                    next.extend(g.neighbors(v));
                }
                seen = next;
                for v in &seen {
                    let class = g.vertex_class(v);
                    let rep = g.class_representative(&class);
                    assert!(g.contains(&rep));
                    assert_eq!(g.vertex_class(&rep), class);
                }
            }
        }
    }
}
