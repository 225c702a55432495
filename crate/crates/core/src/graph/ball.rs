//! Exact BFS balls, spheres and the growth-ratio diagnostics.

use super::{LazyGraph, Vertex};
use crate::error::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::HashMap;

/// The closed ball B(origin, radius) with per-vertex distances, the inner
/// boundary (members with a neighbor outside the ball) and sphere counts.
#[derive(Clone, Debug)]
pub struct Ball {
    pub origin: Vertex,
    pub radius: u64,
    /// Members sorted by (distance, vertex).
    pub members: Vec<(Vertex, u64)>,
    /// Subset of members having at least one neighbor outside the ball.
    pub boundary: Vec<Vertex>,
    /// sphere_sizes[k] = |S(origin, k)| for k = 0..=radius.
    pub sphere_sizes: Vec<u64>,
}

impl Ball {
    pub fn len(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.members.iter().map(|(v, _)| v)
    }

    /// Membership set for repeated lookups.
    pub fn member_set(&self) -> std::collections::HashSet<Vertex> {
        self.vertices().cloned().collect()
    }
}

/// Exact BFS ball. Members come out sorted by (distance, vertex); the
/// boundary is found with one extra neighbor probe per member.
pub fn ball(graph: &LazyGraph, origin: &Vertex, radius: u64) -> Result<Ball> {
    graph.check_vertex(origin)?;
    let mut dist: HashMap<Vertex, u64> = HashMap::new();
    dist.insert(origin.clone(), 0);
    let mut frontier = vec![origin.clone()];
    let mut sphere_sizes = vec![1u64];
    for d in 1..=radius {
        let mut next = Vec::new();
        for v in &frontier {
            for w in graph.neighbors(v) {
                if !dist.contains_key(&w) {
                    dist.insert(w.clone(), d);
                    next.push(w);
                }
            }
        }
        sphere_sizes.push(next.len() as u64);
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    while sphere_sizes.len() < (radius + 1) as usize {
        sphere_sizes.push(0);
    }
    let mut members: Vec<(Vertex, u64)> = dist.iter().map(|(v, &d)| (v.clone(), d)).collect();
    members.sort_by(|(v1, d1), (v2, d2)| (d1, v1).cmp(&(d2, v2)));
    let mut boundary = Vec::new();
    for (v, _) in &members {
        if graph.neighbors(v).iter().any(|w| !dist.contains_key(w)) {
            boundary.push(v.clone());
        }
    }
    Ok(Ball {
        origin: origin.clone(),
        radius,
        members,
        boundary,
        sphere_sizes,
    })
}

/// A sequence of exact rational ratios together with its running supremum.
/// The supremum is a finite-range witness over the computed range, not a
/// proof about the full sequence.
#[derive(Clone, Debug)]
pub struct RatioSequence {
    /// (n, ratio) pairs.
    pub ratios: Vec<(u64, BigRational)>,
    pub running_sup: BigRational,
}

fn big(n: u128) -> BigInt {
    BigInt::from(n)
}

/// |S(origin, n+1)| / |B(origin, n)| for n = 1..=n_max, with the running
/// supremum over the computed range. Uses the family's closed-form sphere
/// sizes when available (trees grow too fast to enumerate), BFS otherwise.
pub fn sphere_ball_ratio(graph: &LazyGraph, origin: &Vertex, n_max: u64) -> Result<RatioSequence> {
    let from_root = origin == &graph.root();
    let sizes: Vec<u128> = if from_root && graph.sphere_size(0).is_some() {
        (0..=n_max + 1)
            .map(|k| graph.sphere_size(k).expect("closed-form sphere size"))
            .collect()
    } else {
        ball(graph, origin, n_max + 1)?
            .sphere_sizes
            .iter()
            .map(|&s| s as u128)
            .collect()
    };
    let mut ratios = Vec::new();
    let mut ball_size: u128 = sizes[0];
    let mut sup: Option<BigRational> = None;
    for n in 1..=n_max {
        ball_size += sizes[n as usize];
        let r = BigRational::new(big(sizes[n as usize + 1]), big(ball_size));
        sup = Some(match sup {
            None => r.clone(),
            Some(s) => s.max(r.clone()),
        });
        ratios.push((n, r));
    }
    Ok(RatioSequence {
        ratios,
        running_sup: sup.expect("n_max >= 1"),
    })
}

/// |∂B(o,n)| / |B(o,n)| as an exact rational.
pub fn boundary_ratio(graph: &LazyGraph, origin: &Vertex, n: u64) -> Result<BigRational> {
    let b = ball(graph, origin, n)?;
    Ok(BigRational::new(
        BigInt::from(b.boundary.len()),
        BigInt::from(b.members.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn g(f: Family) -> LazyGraph {
        LazyGraph::new(f).unwrap()
    }

    #[test]
    fn z_ball_sizes() {
        let z = g(Family::Zd { d: 1 });
        let b = ball(&z, &z.root(), 3).unwrap();
        assert_eq!(b.len(), 7);
        let z2 = g(Family::Zd { d: 2 });
        assert_eq!(ball(&z2, &z2.root(), 2).unwrap().len(), 13);
    }

    #[test]
    fn radius_zero_ball_is_its_own_boundary() {
        let z2 = g(Family::Zd { d: 2 });
        let b = ball(&z2, &z2.root(), 0).unwrap();
        assert_eq!(b.members, vec![(z2.root(), 0)]);
        assert_eq!(b.boundary, vec![z2.root()]);
    }

    #[test]
    fn t3_sphere_two() {
        let t3 = g(Family::HomTree { q: 3 });
        let b = ball(&t3, &t3.root(), 2).unwrap();
        assert_eq!(b.sphere_sizes, vec![1, 3, 6]);
        // Closed form agrees with BFS.
        for k in 0..=2 {
            assert_eq!(t3.sphere_size(k).unwrap(), b.sphere_sizes[k as usize] as u128);
        }
    }

    #[test]
    fn z_ratio_and_sup() {
        let z = g(Family::Zd { d: 1 });
        let rs = sphere_ball_ratio(&z, &z.root(), 6).unwrap();
        for (n, r) in &rs.ratios {
            assert_eq!(
                r,
                &BigRational::new(BigInt::from(2), BigInt::from(2 * n + 1))
            );
        }
        assert_eq!(
            rs.running_sup,
            BigRational::new(BigInt::from(2), BigInt::from(3))
        );
    }

    #[test]
    fn boundary_ratios() {
        let z2 = g(Family::Zd { d: 2 });
        assert_eq!(
            boundary_ratio(&z2, &z2.root(), 10).unwrap(),
            BigRational::new(BigInt::from(40), BigInt::from(221))
        );
        let z = g(Family::Zd { d: 1 });
        assert_eq!(
            boundary_ratio(&z, &z.root(), 5).unwrap(),
            BigRational::new(BigInt::from(2), BigInt::from(11))
        );
        // Homogeneous trees do not satisfy the vanishing-boundary condition.
        let t3 = g(Family::HomTree { q: 3 });
        let r = boundary_ratio(&t3, &t3.root(), 5).unwrap();
        assert!(r > BigRational::new(BigInt::from(1), BigInt::from(2)));
    }

    #[test]
    fn ntd_sphere_growth_at_branch_depth() {
        // alpha = 3, beta = 2: s_1 = 2, so |S(3)| = 3 |S(2)|.
        let ntd = g(Family::Ntd { alpha: 3, beta: 2 });
        let b = ball(&ntd, &ntd.root(), 3).unwrap();
        assert_eq!(b.sphere_sizes[3], 3 * b.sphere_sizes[2]);
        assert_eq!(b.sphere_sizes, vec![1, 3, 3, 9]);
    }

    #[test]
    fn nongeomlim_ratio_stays_bounded() {
        let t = g(Family::NonGeomLim);
        let rs = sphere_ball_ratio(&t, &t.root(), 21).unwrap();
        let bound = BigRational::new(BigInt::from(2), BigInt::from(1));
        for (_, r) in &rs.ratios {
            assert!(r <= &bound, "ratio {r} exceeds bound");
        }
    }
}
