//! Closed-form n-step return probabilities for the lattice walks.
//!
//! The ball dynamic programming is exact but its state space in Z^3 at
//! horizon 2000 is out of reach, so the deep lattice references come from
//! the axis-decomposition counts of closed walks:
//!
//!   d = 1:  p^(2n) = C(2n, n) 4^-n
//!   d = 2:  p^(2n) = [C(2n, n) 2^-2n]^2
//!   d = 3:  p^(2n) = C(2n, n) 6^-2n * sum_{a+b+c=n} [n! / (a! b! c!)]^2
//!
//! Cross-checked against the quotient DP at moderate horizons and against
//! Monte Carlo in the test suites.

use super::series::ReturnSeries;
use crate::graph::Vertex;

/// p^(n)(0,0) for the simple random walk on Z^d, n = 0..=n_max.
pub fn zd_p_series(d: usize, n_max: usize) -> Vec<f64> {
    assert!((1..=3).contains(&d), "closed forms cover d = 1, 2, 3");
    let mut p = vec![0.0f64; n_max + 1];
    p[0] = 1.0;
    match d {
        1 => {
            // ratio p^(2n+2)/p^(2n) = (2n+1)/(2n+2)
            let mut cur = 1.0f64;
            let mut n = 0usize;
            while 2 * (n + 1) <= n_max {
                cur *= (2 * n + 1) as f64 / (2 * n + 2) as f64;
                n += 1;
                p[2 * n] = cur;
            }
        }
        2 => {
            let mut cur = 1.0f64;
            let mut n = 0usize;
            while 2 * (n + 1) <= n_max {
                cur *= (2 * n + 1) as f64 / (2 * n + 2) as f64;
                n += 1;
                p[2 * n] = cur * cur;
            }
        }
        3 => {
            // C(2n,n)/6^(2n) via running product; inner trinomial square
            // sum by a multiplicative sweep, O(n^2) per coefficient.
            let mut central = 1.0f64; // C(2n,n) 4^-n
            for n in 1..=n_max / 2 {
                central *= (2 * n - 1) as f64 / (2 * n) as f64;
                // sum over a+b+c = n of (n!/(a!b!c!) / 3^n)^2
                let mut sum = 0.0f64;
                for a in 0..=n {
                    // t = n!/(a! b! c!) 3^-n at b = 0, c = n - a, built
                    // incrementally in b.
                    let mut t = trinomial_start(n, a);
                    for b in 0..=n - a {
                        if b > 0 {
                            let c = (n - a - b + 1) as f64;
                            t *= c / b as f64;
                        }
                        sum += t * t;
                    }
                }
                // p^(2n) = C(2n,n) 4^-n * 4^n 6^-2n * (3^n m)^2 ... folded:
                // C(2n,n) 6^-2n sum m^2 = central * (4/36)^n * ... easier:
                // central = C(2n,n)4^-n, want C(2n,n)6^-2n sum m^2 with
                // m = n!/(a!b!c!); here t = m 3^-n so sum t^2 = sum m^2 9^-n
                // and C(2n,n) 6^-2n m^2 = central 4^n 36^-n m^2
                //                      = central (1/9)^n m^2 = central t^2.
                p[2 * n] = central * sum;
            }
        }
        _ => unreachable!(),
    }
    p
}

/// Start value t = n!/(a! 0! (n-a)!) 3^-n computed in log space once per
/// row; subsequent b-steps are pure multiplications.
fn trinomial_start(n: usize, a: usize) -> f64 {
    // ln C(n, a) - n ln 3 using lgamma-free running sums would drift; a
    // small factorial table keeps it exact enough (n <= ~1100).
    #[allow(non_upper_case_globals)]
    static ln_fact: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    let table = ln_fact.get_or_init(|| {
        let mut t = vec![0.0f64; 4096];
        for i in 1..t.len() {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    let ln = table[n] - table[a] - table[n - a] - n as f64 * 3f64.ln();
    ln.exp()
}

/// f^(n)(0,0) for the simple random walk on Z^d via the renewal recursion
/// applied to the closed-form p series.
pub fn zd_f_series(d: usize, n_max: usize) -> Vec<f64> {
    let p = zd_p_series(d, n_max);
    let mut f = vec![0.0f64; n_max + 1];
    for n in 1..=n_max {
        let mut conv = 0.0;
        let mut comp = 0.0;
        for k in (2..n).step_by(2) {
            let term = f[k] * p[n - k];
            let t = conv + term;
            if conv.abs() >= term.abs() {
                comp += (conv - t) + term;
            } else {
                comp += (term - t) + conv;
            }
            conv = t;
        }
        f[n] = (p[n] - (conv + comp)).max(0.0);
    }
    f
}

/// Reference series packaged as a [`ReturnSeries`] at the lattice origin.
pub fn zd_reference_series(d: usize, n_max: usize) -> ReturnSeries {
    let p = zd_p_series(d, n_max);
    let f = zd_f_series(d, n_max);
    ReturnSeries {
        vertex: Vertex(vec![0; d]),
        horizon: n_max,
        p,
        f,
        mode: super::ArithmeticMode::Float,
        engine: "closed-form",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, LazyGraph};
    use crate::kernel::{return_series, SeriesConfig, WalkKernel};

    #[test]
    fn closed_forms_match_dp() {
        for d in 1..=3usize {
            let k = WalkKernel::simple(LazyGraph::new(Family::Zd { d }).unwrap());
            let dp = return_series(&k, &k.graph().root(), 40, &SeriesConfig::default()).unwrap();
            let p = zd_p_series(d, 40);
            let f = zd_f_series(d, 40);
            for n in 0..=40 {
                assert!(
                    (dp.p[n] - p[n]).abs() < 1e-12,
                    "d={d} p^({n}): dp {} vs closed {}",
                    dp.p[n],
                    p[n]
                );
                assert!((dp.f[n] - f[n]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z3_return_probability_lands_near_034() {
        let f = zd_f_series(3, 4000);
        let total: f64 = f.iter().sum();
        // The full series sums to about 0.34054 from below.
        assert!(total > 0.33 && total < 0.3406, "sum = {total}");
    }

    #[test]
    fn z1_exact_values() {
        let p = zd_p_series(1, 8);
        assert_eq!(p[2], 0.5);
        assert_eq!(p[4], 0.375);
        let f = zd_f_series(1, 8);
        assert!((f[2] - 0.5).abs() < 1e-15);
        assert!((f[4] - 0.125).abs() < 1e-15);
        assert!((f[6] - 0.0625).abs() < 1e-15);
    }
}
