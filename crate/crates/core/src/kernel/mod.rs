//! Transition kernels and exact return-probability machinery.

mod mc;
mod reference;
mod series;

pub use mc::{monte_carlo_return, EscapeCertificate, McConfig, McReturnEstimate};
pub use reference::{zd_f_series, zd_p_series};
pub use series::{
    evaluate_f_g, evaluate_f_g_with_kn, f_at_one_bracket, return_series, return_series_exact,
    total_convergence, ArithmeticMode, FAtOneBracket, GeneratingFunctionEval, ReturnSeries,
    ReturnSeriesExact, SeriesConfig, TotalConvergenceDiagnostic,
};

use crate::error::{Error, Result};
use crate::graph::{Family, LazyGraph, Vertex};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Row-sum tolerance for float kernels.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// p_n schedule for the spine-of-cycles kernel. Both satisfy p_n^n -> 1
/// increasingly; the rational one keeps exact arithmetic available.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrtSchedule {
    /// p_n = (1 - (n+1)^-2)^(1/n), so p_n^n = 1 - (n+1)^-2 exactly.
    PowerShaped,
    /// p_n = 1 - (n+2)^-3, rational with p_n^n -> 1.
    Rational,
}

#[derive(Clone, Debug)]
pub enum KernelKind {
    /// Simple random walk: uniform on neighbors, reversible with m = degree.
    Srw,
    /// The drifting kernel on the spine-of-cycles graph: cycle `n` rotates
    /// forward with probability p_n, and the spine moves outward with rate
    /// (1-p_n)(1-2*alpha) against (1-p_n)*alpha backward.
    Trt {
        /// alpha as an exact fraction, required < 1/3.
        alpha: (i64, i64),
        schedule: TrtSchedule,
    },
}

/// Transition probabilities adapted to a [`LazyGraph`].
#[derive(Clone, Debug)]
pub struct WalkKernel {
    graph: LazyGraph,
    kind: KernelKind,
}

impl WalkKernel {
    pub fn simple(graph: LazyGraph) -> WalkKernel {
        WalkKernel {
            graph,
            kind: KernelKind::Srw,
        }
    }

    pub fn trt(graph: LazyGraph, alpha: (i64, i64), schedule: TrtSchedule) -> Result<WalkKernel> {
        if graph.family() != &Family::Trt {
            return Err(Error::Refused(
                "the drifting cycle kernel is only defined on the trt family".into(),
            ));
        }
        if alpha.1 <= 0 || alpha.0 <= 0 || 3 * alpha.0 >= alpha.1 {
            return Err(Error::ParamOutOfRange {
                param: "alpha".into(),
                constraint: "0 < alpha < 1/3".into(),
            });
        }
        let k = WalkKernel {
            graph,
            kind: KernelKind::Trt { alpha, schedule },
        };
        k.validate_rows(&k.sample_vertices(40))?;
        Ok(k)
    }

    pub fn graph(&self) -> &LazyGraph {
        &self.graph
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn is_srw(&self) -> bool {
        matches!(self.kind, KernelKind::Srw)
    }

    /// Transition row: (target, probability), sorted by target.
    pub fn row(&self, v: &Vertex) -> Vec<(Vertex, f64)> {
        match &self.kind {
            KernelKind::Srw => {
                let ns = self.graph.neighbors(v);
                let p = 1.0 / ns.len() as f64;
                ns.into_iter().map(|w| (w, p)).collect()
            }
            KernelKind::Trt { alpha, schedule } => {
                let a = alpha.0 as f64 / alpha.1 as f64;
                trt_row(v, a, |n| schedule.p_n_f64(n))
            }
        }
    }

    /// Exact rational row, when the kernel has rational coefficients.
    pub fn row_rational(&self, v: &Vertex) -> Option<Vec<(Vertex, BigRational)>> {
        match &self.kind {
            KernelKind::Srw => {
                let ns = self.graph.neighbors(v);
                let p = BigRational::new(BigInt::one(), BigInt::from(ns.len()));
                Some(ns.into_iter().map(|w| (w, p.clone())).collect())
            }
            KernelKind::Trt { alpha, schedule } => {
                let pn = schedule.p_n_rational()?;
                let a = BigRational::new(BigInt::from(alpha.0), BigInt::from(alpha.1));
                Some(trt_row(v, a, pn))
            }
        }
    }

    /// Reversibility measure m with m(x) p(x,y) = m(y) p(y,x); the simple
    /// random walk is reversible with m = degree. The drifting cycle
    /// kernel is not reversible (the rotation breaks detailed balance),
    /// so it exposes no measure.
    pub fn reversibility_measure(&self, v: &Vertex) -> Option<f64> {
        match self.kind {
            KernelKind::Srw => Some(self.graph.degree(v) as f64),
            KernelKind::Trt { .. } => None,
        }
    }

    pub fn is_reversible(&self) -> bool {
        matches!(self.kind, KernelKind::Srw)
    }

    /// Row sums within tolerance and support adapted to the graph, checked
    /// on the given vertices. Rational rows are checked exactly.
    pub fn validate_rows(&self, sample: &[Vertex]) -> Result<()> {
        for v in sample {
            self.graph.check_vertex(v)?;
            let row = self.row(v);
            let sum: f64 = row.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::RowSumViolation {
                    vertex: v.to_string(),
                    deficit: sum - 1.0,
                    sign: if sum > 1.0 { '+' } else { '-' },
                });
            }
            let neighbors = self.graph.neighbors(v);
            for (w, p) in &row {
                if *p < 0.0 {
                    return Err(Error::RowSumViolation {
                        vertex: v.to_string(),
                        deficit: *p,
                        sign: '-',
                    });
                }
                if w != v && !neighbors.contains(w) {
                    return Err(Error::Refused(format!(
                        "kernel not adapted: row at {v} reaches non-neighbor {w}"
                    )));
                }
            }
            if let Some(row_q) = self.row_rational(v) {
                let sum_q: BigRational = row_q.iter().map(|(_, p)| p.clone()).sum();
                if !sum_q.is_one() {
                    return Err(Error::RowSumViolation {
                        vertex: v.to_string(),
                        deficit: f64::NAN,
                        sign: '?',
                    });
                }
            }
        }
        Ok(())
    }

    /// Detailed balance m(x)p(x,y) = m(y)p(y,x) on all edges out of the
    /// sampled vertices.
    pub fn check_reversibility(&self, sample: &[Vertex]) -> Result<()> {
        for v in sample {
            let mv = self
                .reversibility_measure(v)
                .ok_or_else(|| Error::NonReversible {
                    from: v.to_string(),
                    to: "-".into(),
                    violation: f64::NAN,
                })?;
            for (w, pvw) in self.row(v) {
                let mw = self.reversibility_measure(&w).unwrap_or(f64::NAN);
                let pwv = self
                    .row(&w)
                    .into_iter()
                    .find(|(u, _)| *u == *v)
                    .map(|(_, p)| p)
                    .unwrap_or(0.0);
                let viol = mv * pvw - mw * pwv;
                if !(viol.abs() <= 1e-12 * (1.0 + mv.abs() + mw.abs())) {
                    return Err(Error::NonReversible {
                        from: v.to_string(),
                        to: w.to_string(),
                        violation: viol,
                    });
                }
            }
        }
        Ok(())
    }

    /// A small deterministic vertex sample around the root, for validation.
    pub fn sample_vertices(&self, count: usize) -> Vec<Vertex> {
        let mut out = vec![self.graph.root()];
        let mut frontier = out.clone();
        while out.len() < count {
            let mut next = Vec::new();
            for v in &frontier {
                for w in self.graph.neighbors(v) {
                    if !out.contains(&w) {
                        out.push(w.clone());
                        next.push(w);
                        if out.len() >= count {
                            return out;
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }
}

impl TrtSchedule {
    pub fn p_n_f64(self, n: i64) -> f64 {
        match self {
            TrtSchedule::PowerShaped => {
                let nn = n as f64;
                (1.0 - (nn + 1.0).powi(-2)).powf(1.0 / nn)
            }
            TrtSchedule::Rational => {
                let d = ((n + 2) as f64).powi(3);
                1.0 - 1.0 / d
            }
        }
    }

    fn p_n_rational(self) -> Option<fn(i64) -> BigRational> {
        match self {
            TrtSchedule::PowerShaped => None,
            TrtSchedule::Rational => Some(|n: i64| {
                let d = BigInt::from(n + 2).pow(3);
                BigRational::one() - BigRational::new(BigInt::one(), d)
            }),
        }
    }
}

/// The drifting kernel's row at `v`, generic over the number type so the
/// float and exact paths share one table.
fn trt_row<T>(v: &Vertex, alpha: T, p_n: impl Fn(i64) -> T) -> Vec<(Vertex, T)>
where
    T: Clone
        + One
        + Zero
        + std::ops::Sub<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Add<Output = T>,
{
    let (n, p) = (v.coords()[0], v.coords()[1]);
    let one = T::one;
    let two_alpha = alpha.clone() + alpha.clone();
    let mut out: Vec<(Vertex, T)> = Vec::with_capacity(4);
    if n == 0 {
        out.push((Vertex::new([1, 0]), one()));
    } else if n == 1 {
        if p == 1 {
            out.push((Vertex::new([1, 0]), one()));
        } else {
            let p1 = p_n(1);
            let q1 = one() - p1.clone();
            out.push((Vertex::new([1, 1]), p1 + q1.clone() * alpha.clone()));
            out.push((Vertex::new([0, 0]), q1.clone() * alpha.clone()));
            out.push((Vertex::new([2, 0]), q1 * (one() - two_alpha)));
        }
    } else {
        let pn = p_n(n);
        let qn = one() - pn.clone();
        let len = n + 1;
        if p == 0 {
            out.push((Vertex::new([n - 1, 0]), qn.clone() * alpha.clone()));
            out.push((Vertex::new([n + 1, 0]), qn.clone() * (one() - two_alpha)));
            out.push((Vertex::new([n, 1]), pn));
            out.push((Vertex::new([n, n]), qn * alpha));
        } else {
            out.push((Vertex::new([n, (p + 1).rem_euclid(len)]), pn));
            out.push((Vertex::new([n, p - 1]), qn));
        }
    }
    out.sort_by(|(a, _), (b, _)| a.cmp(b));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn srw_rows_are_uniform() {
        let z = LazyGraph::new(Family::Zd { d: 1 }).unwrap();
        let k = WalkKernel::simple(z);
        let row = k.row(&Vertex::new([0]));
        assert_eq!(row, vec![(Vertex::new([-1]), 0.5), (Vertex::new([1]), 0.5)]);
        let t3 = LazyGraph::new(Family::HomTree { q: 3 }).unwrap();
        let k3 = WalkKernel::simple(t3);
        let row3 = k3.row(&Vertex::new([0]));
        assert_eq!(row3.len(), 3);
        assert!(row3.iter().all(|(_, p)| (*p - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn trt_rows_sum_to_one_exactly() {
        let g = LazyGraph::new(Family::Trt).unwrap();
        let k = WalkKernel::trt(g, (1, 4), TrtSchedule::Rational).unwrap();
        for n in 2..20 {
            let row = k.row_rational(&Vertex::new([n, 0])).unwrap();
            let sum: BigRational = row.iter().map(|(_, p)| p.clone()).sum();
            assert!(sum.is_one(), "row sum at ({n},0) is {sum}");
            assert_eq!(row.len(), 4);
        }
        let row = k.row(&Vertex::new([5, 0]));
        let total: f64 = row.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trt_power_shaped_rows_within_tolerance() {
        let g = LazyGraph::new(Family::Trt).unwrap();
        let k = WalkKernel::trt(g, (1, 4), TrtSchedule::PowerShaped).unwrap();
        k.validate_rows(&k.sample_vertices(60)).unwrap();
        for n in 1..40i64 {
            let pn = TrtSchedule::PowerShaped.p_n_f64(n);
            let target = 1.0 - ((n + 1) as f64).powi(-2);
            assert!((pn.powi(n as i32) - target).abs() < 1e-12);
        }
    }

    #[test]
    fn trt_alpha_range_enforced() {
        let g = LazyGraph::new(Family::Trt).unwrap();
        assert!(WalkKernel::trt(g, (1, 3), TrtSchedule::Rational).is_err());
    }

    #[test]
    fn srw_is_reversible_with_degree_measure() {
        let g = LazyGraph::new(Family::Hair).unwrap();
        let k = WalkKernel::simple(g);
        k.check_reversibility(&k.sample_vertices(30)).unwrap();
        assert_eq!(k.reversibility_measure(&Vertex::new([0, 0, 0])), Some(6.0));
    }

    #[test]
    fn trt_is_not_reversible() {
        let g = LazyGraph::new(Family::Trt).unwrap();
        let k = WalkKernel::trt(g, (1, 4), TrtSchedule::Rational).unwrap();
        assert!(k.check_reversibility(&[Vertex::new([3, 1])]).is_err());
    }

    #[test]
    fn rational_schedule_increases_to_one() {
        let mut last = 0.0;
        for n in 1..200i64 {
            let pn = TrtSchedule::Rational.p_n_rational().unwrap()(n);
            let pn_pow = pn.to_f64().unwrap().powi(n as i32);
            assert!(pn_pow > last, "p_n^n not increasing at n = {n}");
            last = pn_pow;
        }
        assert!(last > 0.99);
    }
}
