//! Electrical-network machinery for reversible kernels.
//!
//! A reversible kernel with measure m turns each edge into a resistor
//! r(e) = (m(e-)p(e-,e+))^-1; the simple random walk gives unit
//! resistances. Effective resistance to a grounded sphere comes from a
//! Dirichlet solve in node potentials (symmetric positive definite), and
//! capacity estimates track R_eff across growing truncation radii with a
//! heuristic divergence call.

mod solve;

pub use solve::{effective_resistance, thomson_perturbation_check, FlowSolution};

use crate::error::{Error, Result};
use crate::graph::{GraphEmbedding, LazyGraph, Vertex};
use crate::kernel::WalkKernel;
use std::collections::HashMap;

/// Increment decay factor below which R_eff growth is treated as
/// non-convergent (log/linear growth rather than a finite limit).
pub const DIVERGENCE_DECAY_FACTOR: f64 = 1.1;

/// An electric network on a truncation ball: oriented edges (lex-smaller
/// endpoint first) with conductances, the sphere marked as ground.
pub struct Network {
    pub center: Vertex,
    pub radius: u64,
    pub nodes: Vec<Vertex>,
    pub index: HashMap<Vertex, u32>,
    /// ground[i] iff nodes[i] lies on the sphere S(center, radius).
    pub ground: Vec<bool>,
    /// Oriented edges (i, j), nodes[i] < nodes[j] lexicographically.
    pub edges: Vec<(u32, u32)>,
    /// a(e) = m(e-) p(e-, e+); resistance is 1/a.
    pub conductance: Vec<f64>,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn resistance(&self, e: usize) -> f64 {
        1.0 / self.conductance[e]
    }
}

/// Network on B(center, R) with S(center, R) grounded. Fails with the
/// violating edge if the kernel is not reversible (detailed balance is
/// checked on every edge of the truncation).
pub fn build_network(kernel: &WalkKernel, center: &Vertex, radius: u64) -> Result<Network> {
    build_network_restricted(kernel, center, radius, |_| true)
}

/// Network on the ball of the subgraph induced by `domain` (radius in the
/// induced metric), with its sphere grounded. This is the network of the
/// induced walk; with the simple random walk the conductances stay 1 on
/// every kept edge.
pub fn build_network_restricted(
    kernel: &WalkKernel,
    center: &Vertex,
    radius: u64,
    domain: impl Fn(&Vertex) -> bool,
) -> Result<Network> {
    let graph = kernel.graph();
    if !domain(center) {
        return Err(Error::InvalidVertex(center.to_string()));
    }
    // BFS inside the domain.
    let mut dist: HashMap<Vertex, u64> = HashMap::new();
    dist.insert(center.clone(), 0);
    let mut frontier = vec![center.clone()];
    for d in 1..=radius {
        let mut next = Vec::new();
        for v in &frontier {
            for w in graph.neighbors(v) {
                if domain(&w) && !dist.contains_key(&w) {
                    dist.insert(w.clone(), d);
                    next.push(w);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let mut members: Vec<(Vertex, u64)> = dist.iter().map(|(v, &d)| (v.clone(), d)).collect();
    members.sort_by(|(v1, d1), (v2, d2)| (d1, v1).cmp(&(d2, v2)));
    let nodes: Vec<Vertex> = members.iter().map(|(v, _)| v.clone()).collect();
    let index: HashMap<Vertex, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i as u32))
        .collect();
    let mut ground = vec![false; nodes.len()];
    for (v, d) in &members {
        if *d == radius {
            ground[index[v] as usize] = true;
        }
    }
    let mut edges = Vec::new();
    let mut conductance = Vec::new();
    for (i, v) in nodes.iter().enumerate() {
        let mv = kernel
            .reversibility_measure(v)
            .ok_or_else(|| Error::NonReversible {
                from: v.to_string(),
                to: "-".into(),
                violation: f64::NAN,
            })?;
        for (w, pvw) in kernel.row(v) {
            if w <= *v {
                continue; // one orientation per edge
            }
            let Some(&j) = index.get(&w) else { continue };
            let mw = kernel.reversibility_measure(&w).unwrap_or(f64::NAN);
            let pwv = kernel
                .row(&w)
                .into_iter()
                .find(|(u, _)| u == v)
                .map(|(_, p)| p)
                .unwrap_or(0.0);
            let (avw, awv) = (mv * pvw, mw * pwv);
            if (avw - awv).abs() > 1e-12 * (1.0 + avw.abs() + awv.abs()) {
                return Err(Error::NonReversible {
                    from: v.to_string(),
                    to: w.to_string(),
                    violation: avw - awv,
                });
            }
            edges.push((i as u32, j));
            conductance.push(0.5 * (avw + awv));
        }
    }
    Ok(Network {
        center: center.clone(),
        radius,
        nodes,
        index,
        ground,
        edges,
        conductance,
    })
}

/// Effective resistance per level for graphs radially symmetric about the
/// root under the simple random walk: the spheres are equipotential, so
/// the network reduces to a series chain whose stage k carries
/// |S(k)| * children(k) parallel unit resistors. Returns R_eff(r) for
/// r = 1..=radius.
pub fn radial_effective_resistance(graph: &LazyGraph, radius: u64) -> Option<Vec<f64>> {
    graph.radial_children(&graph.root(), 0)?;
    let mut out = Vec::with_capacity(radius as usize);
    let mut sphere: u128 = 1;
    let mut total = 0.0f64;
    for k in 0..radius {
        let children = graph.radial_children(&graph.root(), k)? as u128;
        let parallel_edges = sphere.checked_mul(children)?;
        total += 1.0 / parallel_edges as f64;
        out.push(total);
        sphere = parallel_edges; // |S(k+1)| = |S(k)| * children(k)
    }
    Some(out)
}

/// R_eff across a radii schedule with the Rayleigh monotonicity check, a
/// heuristic divergence flag (increments failing to decay by the factor
/// 1.1), and the capacity estimate cap = 1/R_eff(limit).
#[derive(Clone, Debug, serde::Serialize)]
pub struct CapacityEstimate {
    pub vertex: String,
    /// (radius, R_eff).
    pub r_eff: Vec<(u64, f64)>,
    pub monotone: bool,
    /// Set when the last increments fail to decay by the required factor;
    /// a heuristic read of log/linear growth, not a proof.
    pub divergent: bool,
    /// Geometric extrapolation of the R_eff limit when converging.
    pub extrapolated_r_eff: Option<f64>,
    /// 1 / (extrapolated or last) R_eff; tends to 0 on recurrent graphs.
    pub cap_estimate: f64,
    /// m(x), for the G <= m/cap cross-check.
    pub vertex_measure: f64,
}

pub fn capacity_estimate(
    kernel: &WalkKernel,
    x: &Vertex,
    radii: &[u64],
) -> Result<CapacityEstimate> {
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Refused("radii schedule must be increasing".into()));
    }
    let mut r_eff = Vec::with_capacity(radii.len());
    let radial = if kernel.is_srw() && *x == kernel.graph().root() {
        radial_effective_resistance(kernel.graph(), *radii.last().unwrap())
    } else {
        None
    };
    match radial {
        Some(all) => {
            for &r in radii {
                r_eff.push((r, all[r as usize - 1]));
            }
        }
        None => {
            for &r in radii {
                let net = build_network(kernel, x, r)?;
                let flow = effective_resistance(&net, x)?;
                r_eff.push((r, flow.effective_resistance));
            }
        }
    }
    Ok(capacity_from_r_eff(
        kernel,
        x,
        r_eff,
    ))
}

pub(crate) fn capacity_from_r_eff(
    kernel: &WalkKernel,
    x: &Vertex,
    r_eff: Vec<(u64, f64)>,
) -> CapacityEstimate {
    let monotone = r_eff.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    let incs: Vec<f64> = r_eff.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let tail = incs.len().min(3);
    let mut converging = incs.len() >= 2;
    for w in incs[incs.len() - tail..].windows(2) {
        if w[1] > w[0] / DIVERGENCE_DECAY_FACTOR {
            converging = false;
        }
    }
    let last = r_eff.last().expect("nonempty schedule").1;
    let extrapolated = if converging {
        let (i_prev, i_last) = (incs[incs.len() - 2], incs[incs.len() - 1]);
        let rho = if i_prev > 0.0 { (i_last / i_prev).min(0.95) } else { 0.0 };
        Some(last + i_last * rho / (1.0 - rho))
    } else {
        None
    };
    CapacityEstimate {
        vertex: x.to_string(),
        monotone,
        divergent: !converging,
        cap_estimate: 1.0 / extrapolated.unwrap_or(last),
        extrapolated_r_eff: extrapolated,
        r_eff,
        vertex_measure: kernel.reversibility_measure(x).unwrap_or(f64::NAN),
    }
}

/// Transport a flow along an embedding: u'(gamma(a), gamma(b)) = +-u(a,b)
/// with the sign fixed by the canonical orientation of the image edge.
/// Valid for unit conductances (the simple walk); the result keeps the
/// input and the energy, and the divergence pattern maps node for node,
/// which is re-verified exactly.
pub fn translate_flow(
    graph: &LazyGraph,
    flow: &FlowSolution,
    emb: &GraphEmbedding,
) -> Result<FlowSolution> {
    let mut edges = Vec::with_capacity(flow.edges.len());
    let mut energy = 0.0f64;
    for (a, b, u) in &flow.edges {
        if !emb.in_domain(a) || !emb.in_domain(b) {
            return Err(Error::Refused(format!(
                "flow edge ({a}, {b}) leaves the embedding domain"
            )));
        }
        let (ia, ib) = (emb.map(a).unwrap(), emb.map(b).unwrap());
        if !graph.neighbors(&ia).contains(&ib) {
            return Err(Error::EmbeddingViolation {
                from: a.to_string(),
                to: b.to_string(),
            });
        }
        let (e_minus, e_plus, val) = if ia < ib {
            (ia, ib, *u)
        } else {
            (ib, ia, -*u)
        };
        energy += val * val; // unit resistances
        edges.push((e_minus, e_plus, val));
    }
    let source = emb
        .map(&flow.source)
        .ok_or_else(|| Error::Refused("flow source outside embedding domain".into()))?;
    let translated = FlowSolution {
        source,
        radius: flow.radius,
        input: flow.input,
        edges,
        energy,
        effective_resistance: energy / (flow.input * flow.input),
        max_node_residual: flow.max_node_residual,
    };
    if (translated.energy - flow.energy).abs() > 1e-9 * (1.0 + flow.energy) {
        return Err(Error::EnergyMismatch(translated.energy - flow.energy));
    }
    // Node-for-node divergence match: the image of the template's
    // divergence pattern is the translated flow's divergence pattern.
    let orig = flow.divergence();
    let mut expect: HashMap<Vertex, f64> = HashMap::new();
    for (v, d) in orig {
        expect.insert(emb.map(&v).expect("flow support in domain"), d);
    }
    for (v, d) in translated.divergence() {
        let want = expect.get(&v).copied().unwrap_or(0.0);
        if (d - want).abs() > 1e-9 {
            return Err(Error::EnergyMismatch(d - want));
        }
    }
    Ok(translated)
}

/// Evidence report for the averaged flow criterion: a family of flows
/// with one template per base class, transported to every sampled vertex
/// of the candidate set, with the energy budget and capacity floor
/// checked per vertex.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ToaFlowWitness {
    pub energies: Vec<(String, f64)>,
    pub energy_budget: f64,
    pub cap_floor: f64,
    pub sup_energy: f64,
    pub witness: bool,
    pub failing_vertex: Option<String>,
}

/// Checks sup-energy over the sampled candidate vertices against the
/// budget; capacities are bounded below by 1/sup-energy.
pub fn toa_flow_witness(
    flows: &[(Vertex, FlowSolution)],
    energy_budget: f64,
    cap_floor: f64,
) -> ToaFlowWitness {
    let mut sup = 0.0f64;
    let mut failing = None;
    let mut energies = Vec::new();
    for (v, f) in flows {
        let e = f.energy / (f.input * f.input);
        energies.push((v.to_string(), e));
        if e > sup {
            sup = e;
        }
        if (e > energy_budget || 1.0 / e < cap_floor) && failing.is_none() {
            failing = Some(v.to_string());
        }
    }
    ToaFlowWitness {
        energies,
        energy_budget,
        cap_floor,
        sup_energy: sup,
        witness: failing.is_none() && !flows.is_empty(),
        failing_vertex: failing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{embedding_for, Family, SubgraphTag};

    fn srw(f: Family) -> WalkKernel {
        WalkKernel::simple(LazyGraph::new(f).unwrap())
    }

    #[test]
    fn srw_network_has_unit_resistances() {
        let k = srw(Family::Zd { d: 2 });
        let net = build_network(&k, &k.graph().root(), 4).unwrap();
        for e in 0..net.edges.len() {
            assert!((net.resistance(e) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_chain_resistance_is_r_over_2() {
        let k = srw(Family::Zd { d: 1 });
        for r in [2u64, 5, 16, 64] {
            let net = build_network(&k, &k.graph().root(), r).unwrap();
            let flow = effective_resistance(&net, &k.graph().root()).unwrap();
            assert!(
                (flow.effective_resistance - r as f64 / 2.0).abs() < 1e-10,
                "R_eff({r}) = {}",
                flow.effective_resistance
            );
        }
    }

    #[test]
    fn t3_radial_resistance_approaches_two_thirds() {
        let g = LazyGraph::new(Family::HomTree { q: 3 }).unwrap();
        let rs = radial_effective_resistance(&g, 30).unwrap();
        assert!((rs[29] - 2.0 / 3.0).abs() < 1e-6);
        // And the generic solver agrees at small radius.
        let k = WalkKernel::simple(g);
        let net = build_network(&k, &k.graph().root(), 6).unwrap();
        let flow = effective_resistance(&net, &k.graph().root()).unwrap();
        assert!((flow.effective_resistance - rs[5]).abs() < 1e-10);
    }

    #[test]
    fn ntd_radial_resistance_matches_transience_criterion() {
        // alpha > beta converges, alpha = beta grows without bound.
        let g32 = LazyGraph::new(Family::Ntd { alpha: 3, beta: 2 }).unwrap();
        let r32 = radial_effective_resistance(&g32, 62).unwrap();
        assert!(r32[61] < 2.2, "bounded for alpha > beta: {}", r32[61]);
        let g22 = LazyGraph::new(Family::Ntd { alpha: 2, beta: 2 }).unwrap();
        let r22 = radial_effective_resistance(&g22, 62).unwrap();
        assert!(r22[61] > 2.5, "divergent for alpha = beta: {}", r22[61]);
    }

    #[test]
    fn capacity_divergence_flags() {
        let kz = srw(Family::Zd { d: 1 });
        let est = capacity_estimate(&kz, &kz.graph().root(), &[4, 8, 16, 32]).unwrap();
        assert!(est.divergent);
        assert!(est.monotone);
        let kt = srw(Family::HomTree { q: 3 });
        let est = capacity_estimate(&kt, &kt.graph().root(), &[4, 8, 16, 24]).unwrap();
        assert!(!est.divergent);
        // cap = 1/R_eff -> 3/2 on the degree-3 tree.
        assert!((est.cap_estimate - 1.5).abs() < 1e-3);
    }

    #[test]
    fn translated_flow_keeps_energy_hair() {
        let g = LazyGraph::new(Family::Hair).unwrap();
        let k = WalkKernel::simple(g.clone());
        // Template flow inside the lower halfspace only, so it can ride
        // the halfspace translations.
        let net =
            build_network_restricted(&k, &g.root(), 8, |v: &Vertex| v.coords()[2] <= 0).unwrap();
        let template = effective_resistance(&net, &g.root()).unwrap();
        let emb =
            embedding_for(&g, SubgraphTag::LowerHalfspace, &Vertex::new([3, -2, -1]), 4).unwrap();
        let moved = translate_flow(&g, &template, &emb).unwrap();
        assert!((moved.energy - template.energy).abs() < 1e-12);
        assert_eq!(moved.source, Vertex::new([3, -2, -1]));
        // The whole-graph flow from the origin leaves the halfspace (it
        // pushes current into the hairs), so translation refuses it.
        let whole = effective_resistance(&build_network(&k, &g.root(), 6).unwrap(), &g.root())
            .unwrap();
        assert!(translate_flow(&g, &whole, &emb).is_err());
    }

    #[test]
    fn translated_flow_keeps_energy_bihom() {
        let g = LazyGraph::new(Family::BihomTree { m: 3, n: 2 }).unwrap();
        let k = WalkKernel::simple(g.clone());
        let net = build_network(&k, &g.root(), 8).unwrap();
        let template = effective_resistance(&net, &g.root()).unwrap();
        // Another degree-3 vertex: even depth.
        let target = Vertex::new([2, 0]);
        assert_eq!(g.vertex_class(&target), g.vertex_class(&g.root()));
        let emb = embedding_for(&g, SubgraphTag::TreeClass, &target, 6).unwrap();
        let moved = translate_flow(&g, &template, &emb).unwrap();
        assert!((moved.energy - template.energy).abs() < 1e-12);
    }

    #[test]
    fn identity_translation_is_identity() {
        let g = LazyGraph::new(Family::Zd { d: 2 }).unwrap();
        let k = WalkKernel::simple(g.clone());
        let net = build_network(&k, &g.root(), 5).unwrap();
        let template = effective_resistance(&net, &g.root()).unwrap();
        let emb = embedding_for(&g, SubgraphTag::Identity, &g.root(), 3).unwrap();
        let moved = translate_flow(&g, &template, &emb).unwrap();
        assert_eq!(moved.edges.len(), template.edges.len());
        assert!((moved.energy - template.energy).abs() == 0.0);
    }
}
