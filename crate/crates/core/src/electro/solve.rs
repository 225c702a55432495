//! Dirichlet solves in node potentials on a grounded truncation.
//!
//! The system is the graph Laplacian restricted to non-ground nodes:
//! symmetric positive definite, solved by Jacobi-preconditioned conjugate
//! gradients to a relative residual of 1e-13, then re-verified node by
//! node against Kirchhoff's law at 1e-10 * i_0.

use super::Network;
use crate::error::{Error, Result};
use crate::graph::Vertex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

const CG_TOL: f64 = 1e-13;
const NODE_LAW_TOL: f64 = 1e-10;

/// A unit-input flow on a truncation, as signed values on canonically
/// oriented edges, with its energy and effective-resistance readout.
#[derive(Clone, Debug)]
pub struct FlowSolution {
    pub source: Vertex,
    pub radius: u64,
    pub input: f64,
    /// (e-, e+, u(e)) with e- < e+ lexicographically.
    pub edges: Vec<(Vertex, Vertex, f64)>,
    /// sum of u(e)^2 r(e).
    pub energy: f64,
    /// energy / input^2 = potential(source) / input.
    pub effective_resistance: f64,
    pub max_node_residual: f64,
}

impl FlowSolution {
    /// Net outflow per node: + input at the source, negative on the
    /// ground sphere, zero at interior nodes (up to solver tolerance).
    pub fn divergence(&self) -> HashMap<Vertex, f64> {
        let mut div: HashMap<Vertex, f64> = HashMap::new();
        for (a, b, u) in &self.edges {
            *div.entry(a.clone()).or_insert(0.0) += u;
            *div.entry(b.clone()).or_insert(0.0) -= u;
        }
        div
    }
}

/// Minimum-energy unit flow from `source` to the grounded sphere: solve
/// the Dirichlet problem for node potentials and read the flow off the
/// conductance-weighted potential differences.
pub fn effective_resistance(net: &Network, source: &Vertex) -> Result<FlowSolution> {
    let src = *net
        .index
        .get(source)
        .ok_or_else(|| Error::InvalidVertex(source.to_string()))?;
    if net.ground[src as usize] {
        return Err(Error::SourceOnBoundary);
    }
    let n = net.node_count();
    // interior indexing
    let mut interior_id = vec![u32::MAX; n];
    let mut interior = Vec::new();
    for i in 0..n {
        if !net.ground[i] {
            interior_id[i] = interior.len() as u32;
            interior.push(i as u32);
        }
    }
    let m = interior.len();
    if m == 0 {
        return Err(Error::SingularSystem);
    }
    // CSR Laplacian over interior nodes; ground columns drop out (their
    // potential is 0) but still contribute to the diagonal.
    let mut diag = vec![0.0f64; m];
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
    for (e, &(i, j)) in net.edges.iter().enumerate() {
        let a = net.conductance[e];
        let (ii, jj) = (interior_id[i as usize], interior_id[j as usize]);
        if ii != u32::MAX {
            diag[ii as usize] += a;
            if jj != u32::MAX {
                adj[ii as usize].push((jj, a));
            }
        }
        if jj != u32::MAX {
            diag[jj as usize] += a;
            if ii != u32::MAX {
                adj[jj as usize].push((ii, a));
            }
        }
    }
    let mut b = vec![0.0f64; m];
    let input = 1.0f64;
    b[interior_id[src as usize] as usize] = input;

    let apply = |x: &[f64], y: &mut [f64]| {
        for r in 0..m {
            let mut acc = diag[r] * x[r];
            for &(c, a) in &adj[r] {
                acc -= a * x[c as usize];
            }
            y[r] = acc;
        }
    };

    // Jacobi-preconditioned CG.
    let mut x = vec![0.0f64; m];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0f64; m];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let b_norm = input;
    let max_iters = 200 + 40 * (m as f64).sqrt() as usize;
    let mut converged = false;
    for _ in 0..max_iters {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= CG_TOL * b_norm {
            converged = true;
            break;
        }
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    if !converged {
        return Err(Error::SingularSystem);
    }

    // Flow off the potentials; ground potential is 0.
    let potential = |node: u32| -> f64 {
        let ii = interior_id[node as usize];
        if ii == u32::MAX {
            0.0
        } else {
            x[ii as usize]
        }
    };
    let mut edges = Vec::with_capacity(net.edges.len());
    let mut energy = 0.0f64;
    for (e, &(i, j)) in net.edges.iter().enumerate() {
        let a = net.conductance[e];
        let u = a * (potential(i) - potential(j));
        energy += u * u / a;
        edges.push((
            net.nodes[i as usize].clone(),
            net.nodes[j as usize].clone(),
            u,
        ));
    }
    let flow = FlowSolution {
        source: source.clone(),
        radius: net.radius,
        input,
        edges,
        energy,
        effective_resistance: potential(src) / input,
        max_node_residual: 0.0,
    };
    let flow = verify_node_law(net, flow, src)?;
    Ok(flow)
}

fn verify_node_law(net: &Network, mut flow: FlowSolution, src: u32) -> Result<FlowSolution> {
    let div = flow.divergence();
    let mut worst = 0.0f64;
    for (i, v) in net.nodes.iter().enumerate() {
        if net.ground[i] {
            continue;
        }
        let want = if i as u32 == src { flow.input } else { 0.0 };
        let got = div.get(v).copied().unwrap_or(0.0);
        worst = worst.max((got - want).abs());
    }
    if worst > NODE_LAW_TOL * flow.input {
        return Err(Error::SingularSystem);
    }
    flow.max_node_residual = worst;
    Ok(flow)
}

/// Thomson optimality spot-check: adding any cycle flow to the harmonic
/// flow must increase the energy (the harmonic flow is orthogonal to
/// circulations in the resistance inner product). Cycles are fundamental
/// cycles of random non-tree edges over a BFS tree.
pub fn thomson_perturbation_check(
    net: &Network,
    flow: &FlowSolution,
    cycles: usize,
    seed: u64,
) -> Result<()> {
    let n = net.node_count();
    // BFS tree from the center.
    let mut parent_edge: Vec<Option<(usize, bool)>> = vec![None; n]; // (edge id, direction i->j?)
    let mut visited = vec![false; n];
    let mut adj: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n]; // (edge id, other endpoint)
    for (e, &(i, j)) in net.edges.iter().enumerate() {
        adj[i as usize].push((e, j));
        adj[j as usize].push((e, i));
    }
    let root = 0usize;
    visited[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut order = vec![root];
    while let Some(v) = queue.pop_front() {
        for &(e, w) in &adj[v] {
            if !visited[w as usize] {
                visited[w as usize] = true;
                parent_edge[w as usize] = Some((e, net.edges[e].0 as usize == v));
                queue.push_back(w as usize);
                order.push(w as usize);
            }
        }
    }
    let depth_of = |mut v: usize| -> usize {
        let mut d = 0;
        while let Some((e, down)) = parent_edge[v] {
            let (i, j) = net.edges[e];
            v = if down { i as usize } else { j as usize };
            d += 1;
        }
        d
    };
    let non_tree: Vec<usize> = (0..net.edges.len())
        .filter(|&e| {
            let (i, j) = net.edges[e];
            parent_edge[i as usize].map(|(pe, _)| pe) != Some(e)
                && parent_edge[j as usize].map(|(pe, _)| pe) != Some(e)
        })
        .collect();
    if non_tree.is_empty() {
        return Ok(()); // tree network: no cycles to test
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cycles {
        let e0 = non_tree[rng.gen_range(0..non_tree.len())];
        // Fundamental cycle: e0 plus tree paths to the common ancestor.
        let mut delta = vec![0.0f64; net.edges.len()];
        delta[e0] = 1.0; // circulate i -> j through e0
        let (mut a, mut b) = (net.edges[e0].1 as usize, net.edges[e0].0 as usize);
        // walk up to equal depth, then in lockstep
        let (mut da, mut db) = (depth_of(a), depth_of(b));
        let mut step_up = |v: &mut usize, sign: f64, delta: &mut [f64]| {
            let (e, down) = parent_edge[*v].expect("non-root");
            // `down` means the edge is oriented parent -> v, so stepping
            // v -> parent goes against the orientation.
            delta[e] += if down { -sign } else { sign };
            let (i, j) = net.edges[e];
            *v = if down { i as usize } else { j as usize };
        };
        while da > db {
            step_up(&mut a, 1.0, &mut delta);
            da -= 1;
        }
        while db > da {
            step_up(&mut b, -1.0, &mut delta);
            db -= 1;
        }
        while a != b {
            step_up(&mut a, 1.0, &mut delta);
            step_up(&mut b, -1.0, &mut delta);
        }
        // Energy comparison: E(u + c) - E(u) = 2 <u, c>_r + E(c) >= E(c) > 0
        // within tolerance, since <u, c>_r vanishes for the harmonic flow.
        let mut cross = 0.0f64;
        let mut cycle_energy = 0.0f64;
        for e in 0..net.edges.len() {
            if delta[e] != 0.0 {
                let r = net.resistance(e);
                cross += flow.edges[e].2 * delta[e] * r;
                cycle_energy += delta[e] * delta[e] * r;
            }
        }
        let increase = 2.0 * cross + cycle_energy;
        if cycle_energy <= 0.0 || increase < cycle_energy - 1e-9 * (1.0 + flow.energy) {
            return Err(Error::Refused(format!(
                "cycle perturbation lowered the energy: <u,c> = {cross:e}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electro::build_network;
    use crate::graph::{Family, LazyGraph};
    use crate::kernel::WalkKernel;

    #[test]
    fn z2_flow_satisfies_node_law_and_grows_logarithmically() {
        let k = WalkKernel::simple(LazyGraph::new(Family::Zd { d: 2 }).unwrap());
        let o = k.graph().root();
        let mut r_effs = Vec::new();
        for r in [8u64, 16, 32] {
            let net = build_network(&k, &o, r).unwrap();
            let flow = effective_resistance(&net, &o).unwrap();
            assert!(flow.max_node_residual <= 1e-10);
            r_effs.push(flow.effective_resistance);
        }
        let inc1 = r_effs[1] - r_effs[0];
        let inc2 = r_effs[2] - r_effs[1];
        // log growth: increments roughly ln(2)/(2 pi) ~ 0.11 each
        for inc in [inc1, inc2] {
            assert!(inc > 0.08 && inc < 0.14, "increment {inc}");
        }
    }

    #[test]
    fn energy_equals_reff_for_unit_input() {
        let k = WalkKernel::simple(LazyGraph::new(Family::Zd { d: 1 }).unwrap());
        let net = build_network(&k, &k.graph().root(), 10).unwrap();
        let flow = effective_resistance(&net, &k.graph().root()).unwrap();
        assert!((flow.energy - flow.effective_resistance).abs() < 1e-12);
        assert!((flow.effective_resistance - 5.0).abs() < 1e-10);
    }

    #[test]
    fn thomson_check_passes_on_lattices() {
        for fam in [Family::Zd { d: 2 }, Family::Hair, Family::Cubes] {
            let k = WalkKernel::simple(LazyGraph::new(fam).unwrap());
            let net = build_network(&k, &k.graph().root(), 8).unwrap();
            let flow = effective_resistance(&net, &k.graph().root()).unwrap();
            thomson_perturbation_check(&net, &flow, 20, 11).unwrap();
        }
    }

    #[test]
    fn source_on_boundary_rejected() {
        let k = WalkKernel::simple(LazyGraph::new(Family::Zd { d: 1 }).unwrap());
        let net = build_network(&k, &k.graph().root(), 3).unwrap();
        assert!(matches!(
            effective_resistance(&net, &Vertex::new([3])),
            Err(Error::SourceOnBoundary)
        ));
    }
}
