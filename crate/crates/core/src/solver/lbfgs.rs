//! Limited-memory BFGS with a strong Wolfe line search.

use std::collections::VecDeque;

use ndarray::Array1;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsOptions {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop once `‖∇f‖∞` falls below this.
    pub gradient_tolerance: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LbfgsResult {
    pub x: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn inf_norm(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimises a smooth function given as `x -> (f(x), ∇f(x))`.
pub(crate) fn minimize<F>(mut fg: F, x0: Array1<f64>, opts: &LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&Array1<f64>) -> (f64, Array1<f64>),
{
    let mut x = x0;
    let (mut f, mut g) = fg(&x);
    let mut history: VecDeque<(Array1<f64>, Array1<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if inf_norm(&g) <= opts.gradient_tolerance {
            return LbfgsResult {
                x,
                iterations,
                converged: true,
            };
        }
        let mut d = two_loop(&g, &history);
        let mut slope = d.dot(&g);
        if !(slope < 0.0) {
            // curvature pairs went stale; restart from steepest descent
            history.clear();
            d = -&g;
            slope = d.dot(&g);
        }
        let first = if history.is_empty() {
            (1.0 / inf_norm(&g)).min(1.0)
        } else {
            1.0
        };
        let Some(step) = wolfe_search(&mut fg, &x, f, slope, &d, first) else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };
        iterations += 1;
        let s = &step.x - &x;
        let y = &step.gradient - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.dot(&s).sqrt() * y.dot(&y).sqrt() {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let stalled = (f - step.value).abs() <= 4.0 * f64::EPSILON * f.abs().max(1.0);
        x = step.x;
        f = step.value;
        g = step.gradient;
        if stalled && inf_norm(&g) > opts.gradient_tolerance {
            // no measurable decrease left; let the caller judge the gradient
            break;
        }
    }
    let converged = inf_norm(&g) <= opts.gradient_tolerance;
    LbfgsResult {
        x,
        iterations,
        converged,
    }
}

fn two_loop(g: &Array1<f64>, history: &VecDeque<(Array1<f64>, Array1<f64>, f64)>) -> Array1<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * s.dot(&q);
        q.scaled_add(-a, y);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        q *= s.dot(y) / y.dot(y);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.scaled_add(a - b, s);
    }
    -q
}

struct Step {
    x: Array1<f64>,
    value: f64,
    gradient: Array1<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Bracketing strong Wolfe search followed by zoom.
fn wolfe_search<F>(fg: &mut F, x: &Array1<f64>, f0: f64, slope0: f64, d: &Array1<f64>, first: f64) -> Option<Step>
where
    F: FnMut(&Array1<f64>) -> (f64, Array1<f64>),
{
    let mut eval = |alpha: f64| {
        let mut xn = x.clone();
        xn.scaled_add(alpha, d);
        let (v, g) = fg(&xn);
        let slope = g.dot(d);
        (
            Step {
                x: xn,
                value: v,
                gradient: g,
            },
            slope,
        )
    };
    let mut lo = (0.0, f0, slope0);
    let mut alpha = first;
    for i in 0..40 {
        let (step, slope) = eval(alpha);
        if !step.value.is_finite() {
            alpha = 0.5 * (lo.0 + alpha);
            continue;
        }
        if step.value > f0 + C1 * alpha * slope0 || (i > 0 && step.value >= lo.1) {
            return zoom(&mut eval, f0, slope0, lo, (alpha, step.value, slope));
        }
        if slope.abs() <= -C2 * slope0 {
            return Some(step);
        }
        if slope >= 0.0 {
            return zoom(&mut eval, f0, slope0, (alpha, step.value, slope), lo);
        }
        lo = (alpha, step.value, slope);
        alpha *= 2.0;
    }
    None
}

fn zoom<E>(eval: &mut E, f0: f64, slope0: f64, mut lo: (f64, f64, f64), mut hi: (f64, f64, f64)) -> Option<Step>
where
    E: FnMut(f64) -> (Step, f64),
{
    let mut best: Option<Step> = None;
    for _ in 0..60 {
        let alpha = interpolate(lo, hi);
        let (step, slope) = eval(alpha);
        if step.value > f0 + C1 * alpha * slope0 || step.value >= lo.1 {
            hi = (alpha, step.value, slope);
        } else {
            if slope.abs() <= -C2 * slope0 {
                return Some(step);
            }
            if slope * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (alpha, step.value, slope);
            best = Some(step);
        }
        if (hi.0 - lo.0).abs() <= f64::EPSILON * lo.0.abs().max(1e-300) {
            break;
        }
    }
    // a sufficient-decrease point is still progress even without the curvature condition
    best
}

/// Cubic interpolation safeguarded into the middle of the bracket.
fn interpolate(lo: (f64, f64, f64), hi: (f64, f64, f64)) -> f64 {
    let (a0, f0, g0) = lo;
    let (a1, f1, g1) = hi;
    let width = a1 - a0;
    let d1 = g0 + g1 - 3.0 * (f0 - f1) / (a0 - a1);
    let disc = d1 * d1 - g0 * g1;
    let mid = 0.5 * (a0 + a1);
    if disc < 0.0 || !disc.is_finite() {
        return mid;
    }
    let d2 = disc.sqrt() * width.signum();
    let a = a1 - width * (g1 + d2 - d1) / (g1 - g0 + 2.0 * d2);
    let (left, right) = if a0 < a1 { (a0, a1) } else { (a1, a0) };
    let margin = 0.1 * (right - left);
    if a.is_finite() && a > left + margin && a < right - margin {
        a
    } else {
        mid
    }
}
