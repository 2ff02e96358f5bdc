//! Variable-step, variable-order (1-2) BDF integrator for stiff systems
//! `y' = f(t, y)` with a dense Newton solve.
//!
//! Each step solves `y - sum(a_k y_{n-k}) - beta h f(t_{n+1}, y) = 0` by a
//! modified Newton iteration on `I - beta h J`. The Jacobian is evaluated
//! exactly and reused across steps until Newton stalls, the step coefficient
//! drifts, or it ages out. Local errors are estimated from divided differences
//! of the accepted solution and controlled in a weighted RMS norm.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::{Mat, MatMut};

use crate::error::{Error, Result};

/// Right-hand side and Jacobian of an autonomous-or-not ODE system.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()>;

    /// Dense row-major `∂f/∂y`.
    fn jacobian(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()>;

    /// Integrand accumulated along accepted steps with the trapezoid rule.
    fn running_integrand(&self, _t: f64, _y: &[f64], _ydot: &[f64]) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdfOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_order: usize,
    /// Initial step; chosen from the initial slope when `None`.
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    /// Steps after which the Jacobian is re-evaluated.
    pub jacobian_max_age: usize,
}

impl Default for BdfOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-9,
            max_order: 2,
            initial_step: None,
            max_step: f64::INFINITY,
            min_step: 1e-12,
            max_steps: 5_000_000,
            jacobian_max_age: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_iterations: usize,
    pub newton_failures: usize,
    pub jacobian_evaluations: usize,
    pub factorizations: usize,
}

/// State handed to the output callback at each requested time.
#[derive(Debug, Clone, Copy)]
pub struct OutputPoint<'a> {
    pub index: usize,
    pub t: f64,
    pub y: &'a [f64],
    /// `∫ running_integrand dt` from the initial time.
    pub integral: f64,
    pub stats: StepStats,
}

const NEWTON_MAX_ITERS: usize = 4;
const NEWTON_TOL: f64 = 0.05;
const NEWTON_DIVERGENCE_RATE: f64 = 0.9;
const REFACTOR_DRIFT: f64 = 0.3;
const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 2.0;
const MIN_GROWTH: f64 = 1.2;
const MAX_SHRINK: f64 = 0.2;

struct Newton {
    dim: usize,
    jac: Vec<f64>,
    jac_age: usize,
    jac_fresh: bool,
    lu: Option<PartialPivLu<f64>>,
    /// `beta h` the factorization was built with.
    factored_bh: f64,
}

impl Newton {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            jac: vec![0.0; dim * dim],
            jac_age: usize::MAX,
            jac_fresh: false,
            lu: None,
            factored_bh: f64::NAN,
        }
    }

    fn refresh_jacobian<S: OdeSystem>(&mut self, sys: &S, t: f64, y: &[f64], stats: &mut StepStats) -> Result<()> {
        sys.jacobian(t, y, &mut self.jac)?;
        stats.jacobian_evaluations += 1;
        self.jac_age = 0;
        self.jac_fresh = true;
        self.lu = None;
        Ok(())
    }

    fn factor(&mut self, bh: f64, stats: &mut StepStats) {
        let n = self.dim;
        let jac = &self.jac;
        let m = Mat::<f64>::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - bh * jac[i * n + j]
        });
        self.lu = Some(m.partial_piv_lu());
        self.factored_bh = bh;
        stats.factorizations += 1;
    }

    fn needs_factor(&self, bh: f64) -> bool {
        self.lu.is_none() || (bh / self.factored_bh - 1.0).abs() > REFACTOR_DRIFT
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = self.dim;
        self.lu
            .as_ref()
            .expect("factored before solve")
            .solve_in_place(MatMut::from_column_major_slice_mut(rhs, n, 1));
    }
}

/// History of accepted points, newest last, at most four.
struct History {
    t: Vec<f64>,
    y: Vec<Vec<f64>>,
}

impl History {
    fn push(&mut self, t: f64, y: Vec<f64>) {
        if self.t.len() == 4 {
            self.t.remove(0);
            self.y.remove(0);
        }
        self.t.push(t);
        self.y.push(y);
    }

    fn len(&self) -> usize {
        self.t.len()
    }

    fn last(&self, back: usize) -> (f64, &[f64]) {
        let k = self.t.len() - 1 - back;
        (self.t[k], &self.y[k])
    }
}

/// Divided difference of order `points.len() - 1` for component `i`.
fn divided_difference(ts: &[f64], ys: &[&[f64]], i: usize) -> f64 {
    let mut table: Vec<f64> = ys.iter().map(|y| y[i]).collect();
    let n = ts.len();
    for level in 1..n {
        for k in 0..n - level {
            table[k] = (table[k + 1] - table[k]) / (ts[k + level] - ts[k]);
        }
    }
    table[0]
}

fn wrms(v: &[f64], weights: &[f64]) -> f64 {
    let sum: f64 = v.iter().zip(weights).map(|(a, w)| (a * w) * (a * w)).sum();
    (sum / v.len() as f64).sqrt()
}

pub struct Bdf {
    opts: BdfOptions,
}

impl Bdf {
    pub fn new(opts: BdfOptions) -> Self {
        Self { opts }
    }

    fn weights(&self, y: &[f64], out: &mut [f64]) {
        for (w, v) in out.iter_mut().zip(y) {
            *w = 1.0 / (self.opts.rtol * v.abs() + self.opts.atol);
        }
    }

    /// Local error estimates for orders 1 and 2 of a step ending at `(t_new, y_new)`.
    fn error_estimates(&self, hist: &History, t_new: f64, y_new: &[f64], weights: &[f64]) -> (Option<f64>, Option<f64>) {
        let n = y_new.len();
        let h = t_new - hist.last(0).0;
        let mut scratch = vec![0.0; n];
        let est1 = (hist.len() >= 2).then(|| {
            let ts = [hist.last(1).0, hist.last(0).0, t_new];
            let ys = [hist.last(1).1, hist.last(0).1, y_new];
            for (i, s) in scratch.iter_mut().enumerate() {
                *s = h * h * divided_difference(&ts, &ys, i);
            }
            wrms(&scratch, weights)
        });
        let est2 = (hist.len() >= 3).then(|| {
            let (t0, _) = hist.last(0);
            let h_prev = t0 - hist.last(1).0;
            let omega = h / h_prev;
            let beta = (1.0 + omega) / (1.0 + 2.0 * omega);
            let ts = [hist.last(2).0, hist.last(1).0, t0, t_new];
            let ys = [hist.last(2).1, hist.last(1).1, hist.last(0).1, y_new];
            for (i, s) in scratch.iter_mut().enumerate() {
                *s = beta * h * h * (h + h_prev) * divided_difference(&ts, &ys, i);
            }
            wrms(&scratch, weights)
        });
        (est1, est2)
    }

    /// Integrates from `(t0, y0)` through every time in `outputs` (non-decreasing,
    /// `>= t0`), calling `on_output` with the solution at each one.
    pub fn integrate<S, F>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64],
        outputs: &[f64],
        mut on_output: F,
    ) -> Result<(Vec<f64>, StepStats)>
    where
        S: OdeSystem,
        F: FnMut(OutputPoint<'_>) -> Result<()>,
    {
        let n = sys.dim();
        let opts = self.opts;
        let max_order = opts.max_order.clamp(1, 2);
        let mut stats = StepStats::default();
        let mut newton = Newton::new(n);
        let mut hist = History {
            t: Vec::with_capacity(4),
            y: Vec::with_capacity(4),
        };
        hist.push(t0, y0.to_vec());

        let mut f_cur = vec![0.0; n];
        sys.rhs(t0, y0, &mut f_cur)?;
        let mut integrand_cur = sys.running_integrand(t0, y0, &f_cur);
        let mut integral = 0.0;

        let mut weights = vec![0.0; n];
        self.weights(y0, &mut weights);
        let t_end = outputs.last().copied().unwrap_or(t0);
        let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
        let mut h = match opts.initial_step {
            Some(h) => h,
            None => {
                let slope = wrms(&f_cur, &weights);
                if slope > 0.0 {
                    (0.01 / slope).min(0.01 * span)
                } else {
                    0.01 * span
                }
            }
        }
        .min(opts.max_step)
        .max(opts.min_step);

        let mut order = 1;
        let mut out_idx = 0;
        let mut t = t0;
        let mut grow_blocked = false;

        let mut y_new = vec![0.0; n];
        let mut f_new = vec![0.0; n];
        let mut resid = vec![0.0; n];
        let mut base = vec![0.0; n];

        while out_idx < outputs.len() && outputs[out_idx] <= t {
            on_output(OutputPoint {
                index: out_idx,
                t,
                y: hist.last(0).1,
                integral,
                stats,
            })?;
            out_idx += 1;
        }

        while out_idx < outputs.len() {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Integration {
                    t,
                    step: h,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let t_out = outputs[out_idx];
            let h_proposed = h;
            let remaining = t_out - t;
            let mut h_step = h.min(opts.max_step);
            if h_step >= remaining {
                h_step = remaining;
            } else if 2.0 * h_step > remaining {
                h_step = 0.5 * remaining;
            }

            // coefficients: y_new = a0 y_n + a1 y_{n-1} + beta h f(y_new)
            let (t_n, y_n) = hist.last(0);
            let q = if order == 2 && hist.len() >= 3 { 2 } else { 1 };
            let (beta, a0, a1) = if q == 2 {
                let h_prev = t_n - hist.last(1).0;
                let omega = h_step / h_prev;
                let d = 1.0 + 2.0 * omega;
                ((1.0 + omega) / d, (1.0 + omega) * (1.0 + omega) / d, -omega * omega / d)
            } else {
                (1.0, 1.0, 0.0)
            };
            let t_new = t_n + h_step;
            let bh = beta * h_step;

            // predictor: extrapolate the last q + 1 points, or explicit Euler at start
            if hist.len() == 1 {
                for i in 0..n {
                    y_new[i] = y_n[i] + h_step * f_cur[i];
                }
            } else {
                let k = (q + 1).min(hist.len());
                let ts: Vec<f64> = (0..k).rev().map(|b| hist.last(b).0).collect();
                let ys: Vec<&[f64]> = (0..k).rev().map(|b| hist.last(b).1).collect();
                for i in 0..n {
                    // Lagrange extrapolation to t_new
                    let mut acc = 0.0;
                    for a in 0..k {
                        let mut l = 1.0;
                        for c in 0..k {
                            if c != a {
                                l *= (t_new - ts[c]) / (ts[a] - ts[c]);
                            }
                        }
                        acc += l * ys[a][i];
                    }
                    y_new[i] = acc;
                }
            }
            for i in 0..n {
                base[i] = a0 * y_n[i] + if q == 2 { a1 * hist.last(1).1[i] } else { 0.0 };
            }

            if newton.jac_age >= opts.jacobian_max_age {
                newton.refresh_jacobian(sys, t_n, y_n, &mut stats)?;
            }
            if newton.needs_factor(bh) {
                newton.factor(bh, &mut stats);
            }

            // modified Newton
            let mut converged = false;
            let mut prev_norm = f64::INFINITY;
            for iter in 0..NEWTON_MAX_ITERS {
                stats.newton_iterations += 1;
                sys.rhs(t_new, &y_new, &mut f_new)?;
                for i in 0..n {
                    resid[i] = -(y_new[i] - base[i] - bh * f_new[i]);
                }
                newton.solve(&mut resid);
                // correct for a factorization built with a different beta h
                if newton.factored_bh != bh {
                    let scale = 2.0 / (1.0 + bh / newton.factored_bh);
                    resid.iter_mut().for_each(|r| *r *= scale);
                }
                for i in 0..n {
                    y_new[i] += resid[i];
                }
                let norm = wrms(&resid, &weights);
                if !norm.is_finite() {
                    break;
                }
                if iter == 0 {
                    if norm <= 0.2 * NEWTON_TOL {
                        converged = true;
                        break;
                    }
                } else {
                    let rate = norm / prev_norm;
                    if rate > NEWTON_DIVERGENCE_RATE {
                        break;
                    }
                    if norm * rate / (1.0 - rate) <= NEWTON_TOL {
                        converged = true;
                        break;
                    }
                }
                prev_norm = norm;
            }

            if !converged {
                stats.newton_failures += 1;
                if !newton.jac_fresh {
                    newton.refresh_jacobian(sys, t_n, y_n, &mut stats)?;
                } else {
                    h = 0.25 * h_step;
                    grow_blocked = true;
                }
                if h < opts.min_step {
                    let ymax = y_n.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    return Err(Error::Integration {
                        t,
                        step: h,
                        reason: format!("Newton iteration did not converge (max |y| = {ymax:.6e})"),
                    });
                }
                continue;
            }

            // local error test
            let mut w_new = vec![0.0; n];
            for i in 0..n {
                w_new[i] = 1.0 / (opts.rtol * y_new[i].abs().max(y_n[i].abs()) + opts.atol);
            }
            let (e1, e2) = if hist.len() == 1 {
                // explicit-Euler predictor against backward Euler
                let diff: Vec<f64> = (0..n).map(|i| 0.5 * h_step * (f_new[i] - f_cur[i])).collect();
                (Some(wrms(&diff, &w_new)), None)
            } else {
                self.error_estimates(&hist, t_new, &y_new, &w_new)
            };
            let err = if q == 2 { e2 } else { e1 }.expect("estimate available for the active order");

            if err > 1.0 {
                stats.rejected += 1;
                let factor = (SAFETY * err.powf(-1.0 / (q as f64 + 1.0))).clamp(MAX_SHRINK, 0.9);
                h = h_step * factor;
                grow_blocked = true;
                if h < opts.min_step {
                    return Err(Error::Integration {
                        t,
                        step: h,
                        reason: format!("local error test failed (estimate {err:.3e})"),
                    });
                }
                continue;
            }

            // accept
            stats.accepted += 1;
            newton.jac_age = newton.jac_age.saturating_add(1);
            newton.jac_fresh = false;
            sys.rhs(t_new, &y_new, &mut f_new)?;
            let integrand_new = sys.running_integrand(t_new, &y_new, &f_new);
            integral += 0.5 * h_step * (integrand_cur + integrand_new);
            integrand_cur = integrand_new;
            std::mem::swap(&mut f_cur, &mut f_new);
            hist.push(t_new, y_new.clone());
            t = t_new;
            weights.copy_from_slice(&w_new);

            // next order and step
            let factor_for = |e: f64, q: usize| {
                if e <= 0.0 {
                    MAX_GROWTH
                } else {
                    SAFETY * e.powf(-1.0 / (q as f64 + 1.0))
                }
            };
            let f1 = e1.map_or(1.0, |e| factor_for(e, 1));
            let f2 = e2.filter(|_| max_order >= 2).map(|e| factor_for(e, 2));
            let (mut factor, next_order) = match f2 {
                Some(f2) if f2 >= f1 => (f2, 2),
                _ => (f1, 1),
            };
            order = next_order;
            factor = factor.min(MAX_GROWTH);
            if grow_blocked {
                factor = factor.min(1.0);
                grow_blocked = false;
            }
            if (1.0..MIN_GROWTH).contains(&factor) {
                factor = 1.0;
            }
            // a step shortened to land on an output time does not slow the pace
            h = if h_step < h_proposed && factor >= 1.0 {
                h_proposed.min(MAX_GROWTH * h_step)
            } else {
                h_step * factor
            };
            h = h.clamp(opts.min_step, opts.max_step);

            while out_idx < outputs.len() && outputs[out_idx] <= t {
                on_output(OutputPoint {
                    index: out_idx,
                    t: outputs[out_idx],
                    y: hist.last(0).1,
                    integral,
                    stats,
                })?;
                out_idx += 1;
            }
        }
        Ok((hist.last(0).1.to_vec(), stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// y' = lambda (y - cos t) - sin t, exact y = cos t for y(0) = 1.
    struct Prothero {
        lambda: f64,
    }

    impl OdeSystem for Prothero {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = self.lambda * (y[0] - t.cos()) - t.sin();
            Ok(())
        }
        fn jacobian(&self, _t: f64, _y: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = self.lambda;
            Ok(())
        }
    }

    /// Linear decay with a quadratic integrand, to check the running integral.
    struct Decay;

    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = -y[0];
            out[1] = -1000.0 * (y[1] - y[0]);
            Ok(())
        }
        fn jacobian(&self, _t: f64, _y: &[f64], out: &mut [f64]) -> Result<()> {
            out.copy_from_slice(&[-1.0, 0.0, 1000.0, -1000.0]);
            Ok(())
        }
        fn running_integrand(&self, _t: f64, _y: &[f64], ydot: &[f64]) -> f64 {
            ydot[0] * ydot[0]
        }
    }

    #[test]
    fn stiff_scalar_problem_tracks_exact_solution() {
        let bdf = Bdf::new(BdfOptions {
            rtol: 1e-6,
            atol: 1e-9,
            ..Default::default()
        });
        let outputs: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let mut max_err = 0.0f64;
        let (_, stats) = bdf
            .integrate(&Prothero { lambda: -1e5 }, 0.0, &[1.0], &outputs, |p| {
                assert_eq!(p.t, outputs[p.index]);
                max_err = max_err.max((p.y[0] - p.t.cos()).abs());
                Ok(())
            })
            .unwrap();
        assert!(max_err < 1e-5, "max error {max_err}");
        // the stiff mode must not force explicit-size steps
        assert!(stats.accepted < 20_000, "{stats:?}");
    }

    #[test]
    fn error_decreases_with_tolerance() {
        let run = |rtol: f64| {
            let bdf = Bdf::new(BdfOptions {
                rtol,
                atol: rtol * 1e-3,
                ..Default::default()
            });
            let (y, _) = bdf
                .integrate(&Prothero { lambda: -50.0 }, 0.0, &[1.0], &[3.0], |_| Ok(()))
                .unwrap();
            (y[0] - 3.0f64.cos()).abs()
        };
        let coarse = run(1e-4);
        let fine = run(1e-7);
        assert!(fine < coarse / 20.0, "{coarse} vs {fine}");
    }

    #[test]
    fn running_integral_matches_closed_form() {
        let bdf = Bdf::new(BdfOptions::default());
        let mut integral = 0.0;
        bdf.integrate(&Decay, 0.0, &[1.0, 1.0], &[2.0], |p| {
            integral = p.integral;
            Ok(())
        })
        .unwrap();
        // ∫ e^{-2t} dt on [0, 2]
        let exact = 0.5 * (1.0 - (-4.0f64).exp());
        assert!((integral - exact).abs() < 1e-5, "{integral} vs {exact}");
    }

    #[test]
    fn first_output_at_initial_time() {
        let bdf = Bdf::new(BdfOptions::default());
        let mut seen = Vec::new();
        bdf.integrate(&Decay, 0.0, &[1.0, 1.0], &[0.0, 0.5, 1.0], |p| {
            seen.push((p.index, p.t));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![(0, 0.0), (1, 0.5), (2, 1.0)]);
    }

    #[test]
    fn reports_failure_below_minimum_step() {
        struct BlowUp;
        impl OdeSystem for BlowUp {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
                out[0] = y[0] * y[0];
                Ok(())
            }
            fn jacobian(&self, _t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
                out[0] = 2.0 * y[0];
                Ok(())
            }
        }
        let bdf = Bdf::new(BdfOptions::default());
        let res = bdf.integrate(&BlowUp, 0.0, &[1.0], &[2.0], |_| Ok(()));
        assert!(matches!(res, Err(Error::Integration { .. })));
    }
}
