//! Exact dynamic programming for n-step and first-return probabilities.
//!
//! A closed walk of length n from x never leaves B(x, floor(n/2)), so the
//! forward evolution of the distribution restricted to B(x, ceil(N/2)) is
//! exact for every p^(n)(x,x) with n <= N. Three engines share this fact:
//!
//! * `direct` — evolve over the BFS ball, states = vertices;
//! * `reduced` — evolve over orbits of automorphisms fixing x (valid for
//!   the simple random walk, where orbit lumping is exact);
//! * `radial` — evolve over distance levels when the graph is radially
//!   symmetric about x (trees with level-uniform branching).
//!
//! First-return probabilities come out of the n-step ones through the
//! renewal convolution p^(n) = sum_{k=1..n} f^(k) p^(n-k).

use super::{McConfig, McReturnEstimate, WalkKernel};
use crate::error::{Error, Result};
use crate::graph::Vertex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithmeticMode {
    Float,
    ExactRational,
}

/// Engine and resource limits for a series computation.
#[derive(Clone, Copy, Debug)]
pub struct SeriesConfig {
    /// Hard cap on dynamic-programming states.
    pub state_guard: usize,
    /// Hard cap on the horizon in exact-rational mode.
    pub exact_horizon_cap: usize,
    /// Disable orbit/radial lumping (cross-check path).
    pub force_direct: bool,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            state_guard: 4_000_000,
            exact_horizon_cap: 64,
            force_direct: false,
        }
    }
}

/// Per-vertex arrays p^(0..N)(x,x) and f^(1..N)(x,x).
#[derive(Clone, Debug)]
pub struct ReturnSeries {
    pub vertex: Vertex,
    pub horizon: usize,
    /// p[n] = p^(n)(x,x); p[0] = 1.
    pub p: Vec<f64>,
    /// f[n] = f^(n)(x,x); f[0] = 0.
    pub f: Vec<f64>,
    pub mode: ArithmeticMode,
    /// Which engine produced the arrays.
    pub engine: &'static str,
}

impl ReturnSeries {
    /// sum_{n<=N} f^(n)(x,x), the deterministic lower bound on F(x,x|1).
    pub fn f_partial_sum(&self) -> f64 {
        neumaier_sum(&self.f)
    }

    /// sum_{n<=N} p^(n)(x,x) z^n evaluated by Horner-free accumulation.
    pub fn g_partial(&self, z: f64) -> f64 {
        power_sum(&self.p, z)
    }

    pub fn f_partial(&self, z: f64) -> f64 {
        power_sum(&self.f, z)
    }
}

#[derive(Clone, Debug)]
pub struct ReturnSeriesExact {
    pub vertex: Vertex,
    pub horizon: usize,
    pub p: Vec<BigRational>,
    pub f: Vec<BigRational>,
}

impl ReturnSeriesExact {
    pub fn to_float(&self) -> ReturnSeries {
        ReturnSeries {
            vertex: self.vertex.clone(),
            horizon: self.horizon,
            p: self.p.iter().map(|q| q.to_f64().unwrap()).collect(),
            f: self.f.iter().map(|q| q.to_f64().unwrap()).collect(),
            mode: ArithmeticMode::ExactRational,
            engine: "exact",
        }
    }
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn power_sum(coeffs: &[f64], z: f64) -> f64 {
    let mut zp = 1.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (n, &c) in coeffs.iter().enumerate() {
        if n > 0 {
            zp *= z;
        }
        let x = c * zp;
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// f from p by the renewal recursion, with compensated summation; the
/// convolution subtracts nearly equal quantities, and f^(n) >= 0 gives the
/// built-in sanity check (a materially negative value is an error).
fn renewal_invert(p: &[f64]) -> Result<Vec<f64>> {
    let n_max = p.len() - 1;
    let mut f = vec![0.0f64; n_max + 1];
    for n in 1..=n_max {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for k in 1..n {
            let term = f[k] * p[n - k];
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        let val = p[n] - (sum + comp);
        if val < -1e-9 {
            return Err(Error::NegativeFirstReturn { n, value: val });
        }
        f[n] = val.max(0.0);
    }
    Ok(f)
}

fn renewal_invert_exact(p: &[BigRational]) -> Vec<BigRational> {
    let n_max = p.len() - 1;
    let mut f = vec![BigRational::zero(); n_max + 1];
    for n in 1..=n_max {
        let mut conv = BigRational::zero();
        for k in 1..n {
            if !f[k].is_zero() && !p[n - k].is_zero() {
                conv += &f[k] * &p[n - k];
            }
        }
        let val = &p[n] - conv;
        assert!(!val.is_negative(), "exact renewal produced f^({n}) < 0");
        f[n] = val;
    }
    f
}

// ---- state space construction ----

struct StateSpace {
    start: u32,
    /// CSR transitions.
    offsets: Vec<u32>,
    targets: Vec<u32>,
    probs: Vec<f64>,
    probs_exact: Option<Vec<BigRational>>,
    states: usize,
}

fn build_state_space(
    kernel: &WalkKernel,
    x: &Vertex,
    radius: u64,
    reduce: Option<&(dyn Fn(&Vertex) -> Vertex + Send + Sync)>,
    guard: usize,
    exact: bool,
) -> Result<StateSpace> {
    let canon = |v: &Vertex| -> Vertex {
        match reduce {
            Some(r) => r(v),
            None => v.clone(),
        }
    };
    let start_v = canon(x);
    debug_assert_eq!(start_v, *x, "reduction must fix the center");
    let mut index: HashMap<Vertex, u32> = HashMap::new();
    let mut reps: Vec<Vertex> = Vec::new();
    index.insert(start_v.clone(), 0);
    reps.push(start_v);
    let mut frontier: Vec<u32> = vec![0];
    for _d in 1..=radius {
        let mut next = Vec::new();
        for &i in &frontier {
            let v = reps[i as usize].clone();
            for (w, _) in kernel.row(&v) {
                let cw = canon(&w);
                if !index.contains_key(&cw) {
                    let id = reps.len() as u32;
                    if reps.len() >= guard {
                        return Err(Error::BallGuardExceeded {
                            states: reps.len() + 1,
                            guard,
                        });
                    }
                    index.insert(cw.clone(), id);
                    reps.push(cw);
                    next.push(id);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let n_states = reps.len();
    let mut offsets = Vec::with_capacity(n_states + 1);
    let mut targets = Vec::new();
    let mut probs = Vec::new();
    let mut probs_exact = if exact { Some(Vec::new()) } else { None };
    offsets.push(0u32);
    for rep in &reps {
        if exact {
            let row = kernel
                .row_rational(rep)
                .ok_or_else(|| Error::Refused("kernel has no exact-rational rows".into()))?;
            let mut agg: HashMap<u32, BigRational> = HashMap::new();
            for (w, q) in row {
                if let Some(&j) = index.get(&canon(&w)) {
                    *agg.entry(j).or_insert_with(BigRational::zero) += q;
                }
            }
            let mut entries: Vec<(u32, BigRational)> = agg.into_iter().collect();
            entries.sort_by_key(|(j, _)| *j);
            for (j, q) in entries {
                targets.push(j);
                probs.push(q.to_f64().unwrap());
                probs_exact.as_mut().unwrap().push(q);
            }
        } else {
            let mut agg: HashMap<u32, f64> = HashMap::new();
            for (w, pr) in kernel.row(rep) {
                if let Some(&j) = index.get(&canon(&w)) {
                    *agg.entry(j).or_insert(0.0) += pr;
                }
            }
            let mut entries: Vec<(u32, f64)> = agg.into_iter().collect();
            entries.sort_by_key(|(j, _)| *j);
            for (j, pr) in entries {
                targets.push(j);
                probs.push(pr);
            }
        }
        offsets.push(targets.len() as u32);
    }
    Ok(StateSpace {
        start: 0,
        offsets,
        targets,
        probs,
        probs_exact,
        states: n_states,
    })
}

fn evolve_float(space: &StateSpace, n_steps: usize) -> Vec<f64> {
    let mut cur = vec![0.0f64; space.states];
    let mut next = vec![0.0f64; space.states];
    cur[space.start as usize] = 1.0;
    let mut p = Vec::with_capacity(n_steps + 1);
    p.push(1.0);
    for _ in 1..=n_steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..space.states {
            let c = cur[i];
            if c == 0.0 {
                continue;
            }
            let (lo, hi) = (space.offsets[i] as usize, space.offsets[i + 1] as usize);
            for k in lo..hi {
                next[space.targets[k] as usize] += c * space.probs[k];
            }
        }
        std::mem::swap(&mut cur, &mut next);
        p.push(cur[space.start as usize]);
    }
    p
}

fn evolve_exact(space: &StateSpace, n_steps: usize) -> Vec<BigRational> {
    let pe = space.probs_exact.as_ref().expect("exact transitions");
    let zero = BigRational::zero;
    let mut cur = vec![zero(); space.states];
    cur[space.start as usize] = BigRational::one();
    let mut p = Vec::with_capacity(n_steps + 1);
    p.push(BigRational::one());
    for _ in 1..=n_steps {
        let mut next = vec![zero(); space.states];
        for i in 0..space.states {
            if cur[i].is_zero() {
                continue;
            }
            let (lo, hi) = (space.offsets[i] as usize, space.offsets[i + 1] as usize);
            for k in lo..hi {
                let t = &cur[i] * &pe[k];
                next[space.targets[k] as usize] += t;
            }
        }
        cur = next;
        p.push(cur[space.start as usize].clone());
    }
    p
}

/// Radial chain evolution: levels 0..=R with `children[k]` forward edges
/// per level-k vertex. The center's mass is p^(n)(x,x).
fn evolve_radial(children: &[u64], n_steps: usize) -> Vec<f64> {
    let levels = children.len();
    let mut cur = vec![0.0f64; levels];
    let mut next = vec![0.0f64; levels];
    cur[0] = 1.0;
    let mut p = Vec::with_capacity(n_steps + 1);
    p.push(1.0);
    for _ in 1..=n_steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..levels {
            let c = cur[k];
            if c == 0.0 {
                continue;
            }
            if k == 0 {
                if levels > 1 {
                    next[1] += c;
                }
            } else {
                let deg = children[k] as f64 + 1.0;
                next[k - 1] += c / deg;
                if k + 1 < levels {
                    next[k + 1] += c * (children[k] as f64) / deg;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        p.push(cur[0]);
    }
    p
}

/// Exact n-step and first-return probabilities at `x` up to horizon
/// `n_steps`, float arithmetic. Picks the cheapest exact engine:
/// radial when the graph is radially symmetric about `x` (simple walk
/// only), orbit-reduced when a symmetry reduction is available, direct
/// otherwise.
pub fn return_series(
    kernel: &WalkKernel,
    x: &Vertex,
    n_steps: usize,
    cfg: &SeriesConfig,
) -> Result<ReturnSeries> {
    kernel.graph().check_vertex(x)?;
    let radius = (n_steps as u64 + 1) / 2;
    let (p, engine): (Vec<f64>, &'static str) = if kernel.is_srw()
        && !cfg.force_direct
        && kernel.graph().radial_children(x, 0).is_some()
    {
        let children: Vec<u64> = (0..=radius)
            .map(|k| kernel.graph().radial_children(x, k).expect("radial level"))
            .collect();
        (evolve_radial(&children, n_steps), "radial")
    } else {
        let reduce = if kernel.is_srw() && !cfg.force_direct {
            kernel.graph().symmetry_reduction(x)
        } else {
            None
        };
        let engine = if reduce.is_some() { "reduced" } else { "direct" };
        let space = build_state_space(
            kernel,
            x,
            radius,
            reduce.as_deref(),
            cfg.state_guard,
            false,
        )?;
        (evolve_float(&space, n_steps), engine)
    };
    let f = renewal_invert(&p)?;
    Ok(ReturnSeries {
        vertex: x.clone(),
        horizon: n_steps,
        p,
        f,
        mode: ArithmeticMode::Float,
        engine,
    })
}

/// Exact-rational return series; capped horizon, rational kernels only.
pub fn return_series_exact(
    kernel: &WalkKernel,
    x: &Vertex,
    n_steps: usize,
    cfg: &SeriesConfig,
) -> Result<ReturnSeriesExact> {
    kernel.graph().check_vertex(x)?;
    if n_steps > cfg.exact_horizon_cap {
        return Err(Error::Refused(format!(
            "exact-rational mode capped at horizon {} (denominator growth); requested {}",
            cfg.exact_horizon_cap, n_steps
        )));
    }
    let radius = (n_steps as u64 + 1) / 2;
    let reduce = if kernel.is_srw() && !cfg.force_direct {
        kernel.graph().symmetry_reduction(x)
    } else {
        None
    };
    let space = build_state_space(kernel, x, radius, reduce.as_deref(), cfg.state_guard, true)?;
    let p = evolve_exact(&space, n_steps);
    let f = renewal_invert_exact(&p);
    Ok(ReturnSeriesExact {
        vertex: x.clone(),
        horizon: n_steps,
        p,
        f,
    })
}

/// Partial sums of F and G at `z`, with the crude geometric tail bound
/// z^(N+1)/(1-z) for z < 1 (f^(n) <= 1). No tail is claimed at z = 1.
#[derive(Clone, Debug)]
pub struct GeneratingFunctionEval {
    pub vertex: Vertex,
    pub z: f64,
    pub f_partial: f64,
    pub g_partial: f64,
    pub tail_bound: Option<f64>,
    pub horizon: usize,
}

pub fn evaluate_f_g(series: &ReturnSeries, z: f64) -> GeneratingFunctionEval {
    assert!((0.0..=1.0).contains(&z), "z must lie in [0,1]");
    let tail_bound = if z < 1.0 {
        Some(z.powi(series.horizon as i32 + 1) / (1.0 - z))
    } else {
        None
    };
    GeneratingFunctionEval {
        vertex: series.vertex.clone(),
        z,
        f_partial: series.f_partial(z),
        g_partial: series.g_partial(z),
        tail_bound,
        horizon: series.horizon,
    }
}

/// Sharper tail from a total-convergence diagnostic: sum_{n>N} k_n z^n up
/// to the diagnostic's horizon plus the geometric remainder.
pub fn evaluate_f_g_with_kn(
    series: &ReturnSeries,
    z: f64,
    diag: &TotalConvergenceDiagnostic,
) -> GeneratingFunctionEval {
    let mut eval = evaluate_f_g(series, z);
    if z < 1.0 && diag.horizon > series.horizon {
        let mut tail = 0.0;
        let mut zp = z.powi(series.horizon as i32);
        for n in series.horizon + 1..=diag.horizon {
            zp *= z;
            tail += diag.k[n] * zp;
        }
        tail += z.powi(diag.horizon as i32 + 1) / (1.0 - z);
        eval.tail_bound = Some(tail.min(eval.tail_bound.unwrap_or(f64::INFINITY)));
    }
    eval
}

/// Deterministic truncation lower bound on F(x,x|1) plus a seeded Monte
/// Carlo estimate of the probability of returning within a horizon. The
/// bracket never claims an upper bound on F(x,x): returns within a finite
/// horizon only bound it from below.
#[derive(Clone, Debug)]
pub struct FAtOneBracket {
    pub vertex: Vertex,
    pub lower_bound: f64,
    pub mc: McReturnEstimate,
}

pub fn f_at_one_bracket(
    kernel: &WalkKernel,
    x: &Vertex,
    n_steps: usize,
    mc_cfg: &McConfig,
    cfg: &SeriesConfig,
) -> Result<FAtOneBracket> {
    if (mc_cfg.horizon as usize) < n_steps {
        return Err(Error::Refused(
            "Monte Carlo horizon must be at least the truncation horizon".into(),
        ));
    }
    let series = return_series(kernel, x, n_steps, cfg)?;
    let mc = super::monte_carlo_return(kernel, x, mc_cfg)?;
    Ok(FAtOneBracket {
        vertex: x.clone(),
        lower_bound: series.f_partial_sum(),
        mc,
    })
}

/// k_n = max over the sample of f^(n)(x,x). When the family declares
/// finitely many vertex orbits and the sample covers them, the max is the
/// true supremum over X; otherwise the diagnostic is heuristic.
#[derive(Clone, Debug)]
pub struct TotalConvergenceDiagnostic {
    pub horizon: usize,
    pub sample: Vec<Vertex>,
    /// k[n], n = 0..=horizon (k[0] unused, kept for alignment).
    pub k: Vec<f64>,
    pub partial_sum: f64,
    pub orbit_complete: bool,
}

pub fn total_convergence(
    kernel: &WalkKernel,
    sample: &[Vertex],
    n_steps: usize,
    cfg: &SeriesConfig,
) -> Result<TotalConvergenceDiagnostic> {
    let graph = kernel.graph();
    let mut k = vec![0.0f64; n_steps + 1];
    let mut seen_classes = std::collections::HashSet::new();
    for v in sample {
        let class = graph.vertex_class(v);
        if !seen_classes.insert(class) {
            continue;
        }
        let series = return_series(kernel, v, n_steps, cfg)?;
        for n in 1..=n_steps {
            k[n] = k[n].max(series.f[n]);
        }
    }
    let orbit_complete = kernel.is_srw()
        && match graph.orbit_representatives() {
            Some(reps) => reps
                .iter()
                .all(|r| seen_classes.contains(&graph.vertex_class(r))),
            None => false,
        };
    Ok(TotalConvergenceDiagnostic {
        horizon: n_steps,
        sample: sample.to_vec(),
        partial_sum: neumaier_sum(&k),
        k,
        orbit_complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, LazyGraph};
    use crate::kernel::TrtSchedule;

    fn srw(f: Family) -> WalkKernel {
        WalkKernel::simple(LazyGraph::new(f).unwrap())
    }

    #[test]
    fn z_first_returns_match_catalan_values() {
        let k = srw(Family::Zd { d: 1 });
        let s = return_series(&k, &Vertex::new([0]), 8, &SeriesConfig::default()).unwrap();
        assert!((s.f[2] - 0.5).abs() < 1e-15);
        assert!((s.f[4] - 0.125).abs() < 1e-15);
        assert!((s.f[6] - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(s.f[1], 0.0);
        assert_eq!(s.f[3], 0.0);
    }

    #[test]
    fn z2_two_step_return() {
        let k = srw(Family::Zd { d: 2 });
        let s = return_series(&k, &Vertex::new([0, 0]), 4, &SeriesConfig::default()).unwrap();
        assert!((s.p[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn t3_radial_series() {
        let k = srw(Family::HomTree { q: 3 });
        let s = return_series(&k, &Vertex::new([0]), 200, &SeriesConfig::default()).unwrap();
        assert_eq!(s.engine, "radial");
        assert!((s.f[2] - 1.0 / 3.0).abs() < 1e-15);
        // F(o,o|1) = 1/2 on the degree-3 tree.
        assert!((s.f_partial_sum() - 0.5).abs() < 0.01);
    }

    #[test]
    fn engines_agree_small_horizon() {
        for fam in [Family::Zd { d: 2 }, Family::Hair] {
            let k = srw(fam);
            let x = k.graph().root();
            let direct = return_series(
                &k,
                &x,
                16,
                &SeriesConfig {
                    force_direct: true,
                    ..Default::default()
                },
            )
            .unwrap();
            let reduced = return_series(&k, &x, 16, &SeriesConfig::default()).unwrap();
            assert_eq!(reduced.engine, "reduced");
            for n in 0..=16 {
                assert!(
                    (direct.p[n] - reduced.p[n]).abs() < 1e-13,
                    "p^({n}) mismatch"
                );
            }
        }
        // Radial vs direct on the degree-3 tree.
        let k = srw(Family::HomTree { q: 3 });
        let x = k.graph().root();
        let direct = return_series(
            &k,
            &x,
            14,
            &SeriesConfig {
                force_direct: true,
                ..Default::default()
            },
        )
        .unwrap();
        let radial = return_series(&k, &x, 14, &SeriesConfig::default()).unwrap();
        for n in 0..=14 {
            assert!((direct.p[n] - radial.p[n]).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_mode_agrees_with_float() {
        let k = srw(Family::Zd { d: 1 });
        let exact = return_series_exact(&k, &Vertex::new([0]), 20, &SeriesConfig::default())
            .unwrap()
            .to_float();
        let float = return_series(&k, &Vertex::new([0]), 20, &SeriesConfig::default()).unwrap();
        for n in 0..=20 {
            assert!((exact.p[n] - float.p[n]).abs() < 1e-14);
            assert!((exact.f[n] - float.f[n]).abs() < 1e-14);
        }
    }

    #[test]
    fn renewal_identity_exact_rational() {
        let k = srw(Family::Zd { d: 2 });
        let s = return_series_exact(&k, &Vertex::new([0, 0]), 16, &SeriesConfig::default())
            .unwrap();
        for n in 1..=16usize {
            let conv: BigRational = (1..=n).map(|j| &s.f[j] * &s.p[n - j]).sum();
            assert_eq!(conv, s.p[n], "renewal identity fails at n = {n}");
        }
    }

    #[test]
    fn guard_rejects_oversized_balls() {
        let k = srw(Family::Zd { d: 3 });
        let cfg = SeriesConfig {
            state_guard: 100,
            force_direct: true,
            ..Default::default()
        };
        match return_series(&k, &Vertex::new([0, 0, 0]), 60, &cfg) {
            Err(Error::BallGuardExceeded { .. }) => {}
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn trt_first_return_concentrates_on_cycle_length() {
        let g = LazyGraph::new(Family::Trt).unwrap();
        let k = WalkKernel::trt(g, (1, 4), TrtSchedule::PowerShaped).unwrap();
        // The cycle at spine position n has n+1 vertices, so the full
        // rotation returns after n+1 steps with probability >= p_n^(n+1):
        // the first-return mass concentrates at lag n+1 as n grows.
        for n in 4..=8i64 {
            let lag = (n + 1) as usize;
            let x = Vertex::new([n, 1 + (n / 2).min(n - 1)]);
            let s = return_series(&k, &x, 2 * lag, &SeriesConfig::default()).unwrap();
            let pn = TrtSchedule::PowerShaped.p_n_f64(n);
            let f_lag = s.f[lag];
            assert!(
                f_lag >= pn.powi(lag as i32) - 1e-12,
                "f^({lag}) = {f_lag} below p_n^(n+1)"
            );
            for m in 1..=2 * lag {
                if m != lag {
                    assert!(s.f[m] <= 1.0 - f_lag + 1e-12);
                }
            }
        }
    }

    #[test]
    fn tail_bound_definition() {
        let k = srw(Family::Zd { d: 1 });
        let s = return_series(&k, &Vertex::new([0]), 40, &SeriesConfig::default()).unwrap();
        let eval = evaluate_f_g(&s, 0.0);
        assert_eq!(eval.f_partial, 0.0);
        assert_eq!(eval.g_partial, 1.0);
        let eval = evaluate_f_g(&s, 0.5);
        let expected = 1.0 - (1.0 - 0.25f64).sqrt();
        assert!((eval.f_partial - expected).abs() < 1e-10);
        assert!(evaluate_f_g(&s, 1.0).tail_bound.is_none());
    }
}
