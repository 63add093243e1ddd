//! Derivative-free minimizers used by the fitting routines.
//!
//! A plain Nelder-Mead simplex covers the multi-parameter likelihood and
//! least-squares objectives; golden-section search covers the 1-D fits.
//! Both are deterministic: no randomness, fixed iteration order.

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    /// Best parameter vector found.
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub fx: f64,
    /// Number of objective evaluations used.
    pub evals: usize,
    /// Whether the simplex spread dropped below tolerance before the
    /// evaluation budget ran out.
    pub converged: bool,
}

/// Nelder-Mead simplex minimizer with standard coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Convergence: |f_worst − f_best| < tol over a full cycle.
    pub tol: f64,
    /// Evaluation budget per run.
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_evals: 10_000,
        }
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(
        &self,
        mut f: F,
        x0: &[f64],
        step: &[f64],
    ) -> OptimResult {
        assert_eq!(x0.len(), step.len(), "step size per dimension required");
        let n = x0.len();
        assert!(n >= 1, "empty parameter vector");

        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        // Initial simplex: x0 plus one vertex per dimension offset by step.
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), f0));
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += if step[i] != 0.0 { step[i] } else { 1e-3 };
            let fv = eval(&v, &mut evals);
            simplex.push((v, fv));
        }

        let mut converged = false;
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let f_best = simplex[0].1;
            let f_worst = simplex[n].1;
            if (f_worst - f_best).abs() < self.tol {
                converged = true;
                break;
            }

            // Centroid of all but the worst vertex.
            let mut centroid = vec![0.0; n];
            for (v, _) in simplex.iter().take(n) {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }

            let worst = simplex[n].0.clone();
            let lerp = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = lerp(1.0);
            let f_reflected = eval(&reflected, &mut evals);

            if f_reflected < simplex[0].1 {
                let expanded = lerp(2.0);
                let f_expanded = eval(&expanded, &mut evals);
                simplex[n] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
            } else if f_reflected < simplex[n - 1].1 {
                simplex[n] = (reflected, f_reflected);
            } else {
                let contracted = if f_reflected < simplex[n].1 {
                    lerp(0.5)
                } else {
                    lerp(-0.5)
                };
                let f_contracted = eval(&contracted, &mut evals);
                if f_contracted < simplex[n].1.min(f_reflected) {
                    simplex[n] = (contracted, f_contracted);
                } else {
                    // Shrink toward the best vertex.
                    let best = simplex[0].0.clone();
                    for entry in simplex.iter_mut().skip(1) {
                        for (x, b) in entry.0.iter_mut().zip(&best) {
                            *x = b + 0.5 * (*x - b);
                        }
                        let v = entry.0.clone();
                        entry.1 = eval(&v, &mut evals);
                    }
                }
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        OptimResult {
            x: simplex[0].0.clone(),
            fx: simplex[0].1,
            evals,
            converged,
        }
    }
}

/// Golden-section minimization of a unimodal 1-D function on [lo, hi].
///
/// Returns (argmin, min). Interval endpoints are included in the final
/// candidate set, so boundary minima are reported at the boundary.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iters: usize,
) -> (f64, f64) {
    assert!(lo < hi, "invalid interval");
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);

    for _ in 0..max_iters {
        if (b - a).abs() < tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }

    // Consider endpoints too; boundary minima matter for flagged fits.
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for cand in [lo, hi] {
        let fv = f(cand);
        if fv < best.1 {
            best = (cand, fv);
        }
    }
    best
}
