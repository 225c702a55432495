//! Seeded Monte Carlo estimation of first-return probabilities.
//!
//! Trials partition into fixed-size blocks; block `i` draws from stream
//! `i` of a ChaCha8 generator seeded by the run seed, so results are
//! byte-identical regardless of how the blocks are scheduled across
//! workers.

use super::{KernelKind, TrtSchedule, WalkKernel};
use crate::error::{Error, Result};
use crate::graph::{Family, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const BLOCK: u64 = 8192;
const Z99: f64 = 2.575829303549;

#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub trials: u64,
    pub horizon: u64,
    pub seed: u64,
}

/// Estimate of P(first return <= horizon) with a 99% normal CI, plus the
/// same estimate at two earlier checkpoints (horizon/16 and horizon/4) for
/// plateau detection.
#[derive(Clone, Debug, serde::Serialize)]
pub struct McReturnEstimate {
    pub estimate: f64,
    pub ci99_halfwidth: f64,
    pub trials: u64,
    pub horizon: u64,
    pub seed: u64,
    /// (checkpoint, estimate of P(return <= checkpoint)).
    pub sweep: Vec<(u64, f64)>,
}

/// Heuristic read of the sweep: an escape certificate needs the return
/// estimate to have stopped growing (increment within noise) while the
/// upper confidence limit stays clear of 1.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub enum EscapeCertificate {
    /// Plateaued below 1 - margin: the walk escapes with visible rate.
    Escape { upper_limit: f64, last_increment: f64 },
    /// Still rising beyond noise: compatible with return probability 1.
    Rising { last_increment: f64 },
    /// Neither pattern is clear at this horizon.
    Inconclusive { upper_limit: f64, last_increment: f64 },
}

impl McReturnEstimate {
    pub fn escape_certificate(&self, margin: f64) -> EscapeCertificate {
        let last = self.sweep.last().expect("sweep nonempty").1;
        let prev = if self.sweep.len() >= 2 {
            self.sweep[self.sweep.len() - 2].1
        } else {
            0.0
        };
        let increment = last - prev;
        let se = (last.max(1e-12) * (1.0 - last).max(1e-12) / self.trials as f64).sqrt();
        let noise = (4.0 * se).max(1.5e-3);
        let upper = last + self.ci99_halfwidth;
        if increment <= noise && upper + margin < 1.0 {
            EscapeCertificate::Escape {
                upper_limit: upper,
                last_increment: increment,
            }
        } else if increment > noise {
            EscapeCertificate::Rising {
                last_increment: increment,
            }
        } else {
            EscapeCertificate::Inconclusive {
                upper_limit: upper,
                last_increment: increment,
            }
        }
    }
}

pub fn monte_carlo_return(
    kernel: &WalkKernel,
    x: &Vertex,
    cfg: &McConfig,
) -> Result<McReturnEstimate> {
    if cfg.trials == 0 || cfg.horizon == 0 {
        return Err(Error::Refused("trials and horizon must be positive".into()));
    }
    kernel.graph().check_vertex(x)?;
    let checkpoints = [
        (cfg.horizon / 16).max(1),
        (cfg.horizon / 4).max(1),
        cfg.horizon,
    ];
    let stepper = Stepper::new(kernel, x)?;
    let blocks = cfg.trials.div_ceil(BLOCK);
    let counts: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b + 1);
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(cfg.trials);
            let mut local = [0u64; 3];
            let mut walk = stepper.walk();
            for _ in lo..hi {
                if let Some(t) = walk.run(cfg.horizon, &mut rng) {
                    for (c, cp) in local.iter_mut().zip(checkpoints) {
                        if t <= cp {
                            *c += 1;
                        }
                    }
                }
            }
            local.to_vec()
        })
        .reduce(
            || vec![0u64; 3],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let n = cfg.trials as f64;
    let est = counts[2] as f64 / n;
    let se = (est * (1.0 - est) / n).sqrt();
    Ok(McReturnEstimate {
        estimate: est,
        ci99_halfwidth: Z99 * se,
        trials: cfg.trials,
        horizon: cfg.horizon,
        seed: cfg.seed,
        sweep: checkpoints
            .iter()
            .zip(&counts)
            .map(|(&cp, &c)| (cp, c as f64 / n))
            .collect(),
    })
}

// ---- walk samplers ----

enum Stepper {
    Lattice {
        d: usize,
        start: Vec<i64>,
    },
    Hair {
        start: [i64; 3],
    },
    Cubes {
        start: [i64; 4],
    },
    TrtDrift {
        start: (i64, i64),
        alpha: f64,
        schedule: TrtSchedule,
    },
    Tree {
        family: Family,
        start: Vec<i64>,
    },
    Generic {
        kernel: WalkKernel,
        start: Vertex,
    },
}

impl Stepper {
    fn new(kernel: &WalkKernel, x: &Vertex) -> Result<Stepper> {
        let fam = kernel.graph().family().clone();
        Ok(match (&fam, kernel.kind()) {
            (Family::Zd { d }, KernelKind::Srw) => Stepper::Lattice {
                d: *d,
                start: x.coords().to_vec(),
            },
            (Family::Hair, KernelKind::Srw) => Stepper::Hair {
                start: [x.coords()[0], x.coords()[1], x.coords()[2]],
            },
            (Family::Cubes, KernelKind::Srw) => Stepper::Cubes {
                start: [x.coords()[0], x.coords()[1], x.coords()[2], x.coords()[3]],
            },
            (Family::Trt, KernelKind::Trt { alpha, schedule }) => Stepper::TrtDrift {
                start: (x.coords()[0], x.coords()[1]),
                alpha: alpha.0 as f64 / alpha.1 as f64,
                schedule: *schedule,
            },
            (
                Family::HomTree { .. }
                | Family::BihomTree { .. }
                | Family::TreePrime { .. }
                | Family::TreeDoublePrime { .. }
                | Family::Ntd { .. }
                | Family::NonGeomLim,
                KernelKind::Srw,
            ) => Stepper::Tree {
                family: fam,
                start: x.coords().to_vec(),
            },
            _ => Stepper::Generic {
                kernel: kernel.clone(),
                start: x.clone(),
            },
        })
    }

    fn walk(&self) -> Box<dyn Walk + '_> {
        match self {
            Stepper::Lattice { d, start } => Box::new(LatticeWalk {
                d: *d,
                start,
                pos: start.clone(),
            }),
            Stepper::Hair { start } => Box::new(HairWalk {
                start: *start,
                pos: *start,
            }),
            Stepper::Cubes { start } => Box::new(CubesWalk {
                start: *start,
                pos: *start,
            }),
            Stepper::TrtDrift {
                start,
                alpha,
                schedule,
            } => Box::new(TrtWalk {
                start: *start,
                pos: *start,
                alpha: *alpha,
                schedule: *schedule,
                p_cache: Vec::new(),
            }),
            Stepper::Tree { family, start } => Box::new(TreeWalk::new(family, start)),
            Stepper::Generic { kernel, start } => Box::new(GenericWalk {
                kernel,
                start,
                pos: start.clone(),
            }),
        }
    }
}

/// One reusable trial runner; `run` resets to the start, walks up to
/// `horizon` steps and reports the first-return time if any.
trait Walk {
    fn run(&mut self, horizon: u64, rng: &mut ChaCha8Rng) -> Option<u64>;
}

struct LatticeWalk<'a> {
    d: usize,
    start: &'a [i64],
    pos: Vec<i64>,
}

impl Walk for LatticeWalk<'_> {
    fn run(&mut self, horizon: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
        self.pos.copy_from_slice(self.start);
        for t in 1..=horizon {
            let r = rng.gen_range(0..2 * self.d as u32);
            let axis = (r >> 1) as usize;
            self.pos[axis] += if r & 1 == 0 { 1 } else { -1 };
            if self.pos == self.start {
                return Some(t);
            }
        }
        None
    }
}

struct HairWalk {
    start: [i64; 3],
    pos: [i64; 3],
}

impl Walk for HairWalk {
    fn run(&mut self, horizon: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
        self.pos = self.start;
        for t in 1..=horizon {
            let [x, y, z] = self.pos;
            if z > 0 {
                self.pos[2] += if rng.gen::<bool>() { 1 } else { -1 };
            } else {
                match rng.gen_range(0..6u32) {
                    0 => self.pos[0] = x + 1,
                    1 => self.pos[0] = x - 1,
                    2 => self.pos[1] = y + 1,
                    3 => self.pos[1] = y - 1,
                    4 => self.pos[2] = z + 1,
                    _ => self.pos[2] = z - 1,
                }
            }
            if self.pos == self.start {
                return Some(t);
            }
        }
        None
    }
}

struct CubesWalk {
    start: [i64; 4],
    pos: [i64; 4],
}

impl Walk for CubesWalk {
    fn run(&mut self, horizon: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
        self.pos = self.start;
        for t in 1..=horizon {
            let [i, a, b, c] = self.pos;
            let side = i;
            // Enumerate the <= 8 moves compactly: 6 cube directions plus
            // up to 2 spine moves at the corner.
            let corner = (a, b, c) == (0, 0, 0);
            let mut moves: [[i64; 4]; 8] = [[0; 4]; 8];
            let mut m = 0;
            for (idx, val) in [(1usize, a), (2, b), (3, c)] {
                for s in [-1i64, 1] {
                    let nv = val + s;
                    if nv >= 0 && nv <= side {
                        moves[m] = self.pos;
                        moves[m][idx] = nv;
                        m += 1;
                    }
                }
            }
            if corner {
                if i >= 1 {
                    moves[m] = [i - 1, 0, 0, 0];
                    m += 1;
                }
                moves[m] = [i + 1, 0, 0, 0];
                m += 1;
            }
            self.pos = moves[rng.gen_range(0..m as u32) as usize];
            if self.pos == self.start {
                return Some(t);
            }
        }
        None
    }
}

struct TrtWalk {
    start: (i64, i64),
    pos: (i64, i64),
    alpha: f64,
    schedule: TrtSchedule,
    p_cache: Vec<f64>,
}

impl TrtWalk {
    fn p_n(&mut self, n: i64) -> f64 {
        let idx = n as usize;
        while self.p_cache.len() <= idx {
            let m = self.p_cache.len().max(1) as i64;
            self.p_cache.push(self.schedule.p_n_f64(m));
        }
        self.p_cache[idx]
    }
}

impl Walk for TrtWalk {
    fn run(&mut self, horizon: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
        self.pos = self.start;
        for t in 1..=horizon {
            let (n, p) = self.pos;
            self.pos = if n == 0 {
                (1, 0)
            } else if n == 1 {
                if p == 1 {
                    (1, 0)
                } else {
                    let p1 = self.p_n(1);
                    let u: f64 = rng.gen();
                    let up = p1 + (1.0 - p1) * self.alpha;
                    if u < up {
                        (1, 1)
                    } else if u < up + (1.0 - p1) * self.alpha {
                        (0, 0)
                    } else {
                        (2, 0)
                    }
                }
            } else {
                let pn = self.p_n(n);
                if p == 0 {
                    let u: f64 = rng.gen();
                    let qn = 1.0 - pn;
                    if u < pn {
                        (n, 1)
                    } else if u < pn + qn * self.alpha {
                        (n, n)
                    } else if u < pn + qn * self.alpha * 2.0 {
                        (n - 1, 0)
                    } else {
                        (n + 1, 0)
                    }
                } else if rng.gen::<f64>() < pn {
                    (n, if p == n { 0 } else { p + 1 })
                } else {
                    (n, p - 1)
                }
            };
            if self.pos == self.start {
                return Some(t);
            }
        }
        None
    }
}

/// In-place tree walk over the `[depth, choices..]` encoding. The
/// `tree_doubleprime` family keeps an incremental stack of ramification
/// depths and choice-path hashes so the gap lookups stay O(1).
struct TreeWalk<'a> {
    family: &'a Family,
    start: &'a [i64],
    depth: u64,
    choices: Vec<i64>,
    // tree_doubleprime bookkeeping; rams[i] = (depth, next ram below it).
    tdp: Option<TdpState>,
}

struct TdpState {
    k: u64,
    n: u64,
    /// (ram depth, hash after its choice, next ram depth below it);
    /// entries cover all ramifications strictly above the current vertex.
    rams: Vec<(u64, u64, u64)>,
    h0: u64,
}

impl<'a> TreeWalk<'a> {
    fn new(family: &'a Family, start: &'a [i64]) -> TreeWalk<'a> {
        let tdp = match *family {
            Family::TreeDoublePrime { k, n, seed } => Some(TdpState {
                k,
                n,
                rams: Vec::new(),
                h0: crate::graph::fnv_seed(seed),
            }),
            _ => None,
        };
        TreeWalk {
            family,
            start,
            depth: 0,
            choices: Vec::new(),
            tdp,
        }
    }

    fn reset(&mut self) {
        self.depth = self.start[0] as u64;
        self.choices.clear();
        self.choices.extend_from_slice(&self.start[1..]);
        if let Some(t) = &mut self.tdp {
            // Rebuild the stack of crossed ramifications above the start.
            t.rams.clear();
            let mut ram = 0u64;
            let mut h = t.h0;
            let mut used = 0usize;
            while ram < self.depth {
                let h_choice = crate::graph::fnv_push(h, self.choices[used] as u64);
                let next = ram + crate::graph::tdp_gap(t.n, h_choice, ram);
                t.rams.push((ram, h_choice, next));
                used += 1;
                h = h_choice;
                ram = next;
            }
        }
    }

    fn child_count(&self) -> u64 {
        if let Some(t) = &self.tdp {
            if self.depth == 0 {
                t.k
            } else if t.rams.last().map(|&(_, _, next)| next) == Some(self.depth) {
                t.k - 1
            } else {
                1
            }
        } else {
            self.family.tree_child_count(self.depth, &self.choices)
        }
    }
}

impl Walk for TreeWalk<'_> {
    fn run(&mut self, horizon: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
        self.reset();
        let start_depth = self.start[0] as u64;
        for t in 1..=horizon {
            let children = self.child_count();
            let has_parent = self.depth > 0;
            let deg = children + has_parent as u64;
            let r = rng.gen_range(0..deg as u32) as u64;
            if has_parent && r == 0 {
                // Step to the parent; unwind the choice if the parent is a
                // ramification we crossed on the way down.
                let parent_is_crossed_ram = if let Some(tdp) = &mut self.tdp {
                    match tdp.rams.last() {
                        Some(&(ram, _, _)) if ram == self.depth - 1 => {
                            tdp.rams.pop();
                            true
                        }
                        _ => false,
                    }
                } else {
                    self.family
                        .tree_child_count(self.depth - 1, &self.choices)
                        > 1
                };
                if parent_is_crossed_ram {
                    self.choices.pop();
                }
                self.depth -= 1;
            } else {
                // Step to a child.
                let child = if has_parent { r - 1 } else { r };
                if children > 1 {
                    self.choices.push(child as i64);
                    if let Some(tdp) = &mut self.tdp {
                        let h_prev = match tdp.rams.last() {
                            Some(&(_, h, _)) => h,
                            None => tdp.h0,
                        };
                        let h_choice = crate::graph::fnv_push(h_prev, child as u64);
                        let next =
                            self.depth + crate::graph::tdp_gap(tdp.n, h_choice, self.depth);
                        tdp.rams.push((self.depth, h_choice, next));
                    }
                }
                self.depth += 1;
            }
            if self.depth == start_depth
                && self.choices.len() == self.start.len() - 1
                && self
                    .choices
                    .iter()
                    .zip(&self.start[1..])
                    .all(|(a, b)| a == b)
            {
                return Some(t);
            }
        }
        None
    }
}

struct GenericWalk<'a> {
    kernel: &'a WalkKernel,
    start: &'a Vertex,
    pos: Vertex,
}

impl Walk for GenericWalk<'_> {
    fn run(&mut self, horizon: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
        self.pos = self.start.clone();
        for t in 1..=horizon {
            let row = self.kernel.row(&self.pos);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = row.len() - 1;
            for (i, (_, p)) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            self.pos = row.into_iter().nth(chosen).unwrap().0;
            if self.pos == *self.start {
                return Some(t);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LazyGraph;
    use crate::kernel::WalkKernel;

    fn mc(kernel: &WalkKernel, x: &Vertex, horizon: u64, trials: u64) -> McReturnEstimate {
        monte_carlo_return(
            kernel,
            x,
            &McConfig {
                trials,
                horizon,
                seed: 7,
            },
        )
        .unwrap()
    }

    #[test]
    fn z_two_step_return_is_half() {
        let k = WalkKernel::simple(LazyGraph::new(Family::Zd { d: 1 }).unwrap());
        let e = mc(&k, &Vertex::new([0]), 2, 100_000);
        assert!((e.estimate - 0.5).abs() < 0.01);
    }

    #[test]
    fn t3_two_step_return_is_third() {
        let k = WalkKernel::simple(LazyGraph::new(Family::HomTree { q: 3 }).unwrap());
        let e = mc(&k, &Vertex::new([0]), 2, 100_000);
        assert!((e.estimate - 1.0 / 3.0).abs() < 0.006);
    }

    #[test]
    fn horizon_one_without_self_loops_is_zero() {
        for fam in [Family::Zd { d: 2 }, Family::Hair, Family::Cubes] {
            let k = WalkKernel::simple(LazyGraph::new(fam).unwrap());
            let e = mc(&k, &k.graph().root(), 1, 2_000);
            assert_eq!(e.estimate, 0.0);
        }
    }

    #[test]
    fn reproducible_given_seed() {
        let k = WalkKernel::simple(LazyGraph::new(Family::Zd { d: 2 }).unwrap());
        let a = mc(&k, &Vertex::new([0, 0]), 100, 20_000);
        let b = mc(&k, &Vertex::new([0, 0]), 100, 20_000);
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.sweep, b.sweep);
    }

    #[test]
    fn tree_walk_agrees_with_generic_sampler() {
        // Same distributional target: P(return <= 8) estimated twice.
        let g = LazyGraph::new(Family::TreeDoublePrime {
            k: 3,
            n: 2,
            seed: 5,
        })
        .unwrap();
        let k = WalkKernel::simple(g);
        let fast = mc(&k, &k.graph().root(), 8, 60_000).estimate;
        // Exact value from the series engine.
        let s = crate::kernel::return_series(
            &k,
            &k.graph().root(),
            8,
            &crate::kernel::SeriesConfig::default(),
        )
        .unwrap();
        let exact = s.f_partial_sum();
        assert!(
            (fast - exact).abs() < 0.01,
            "tree sampler {fast} vs exact {exact}"
        );
    }
}
