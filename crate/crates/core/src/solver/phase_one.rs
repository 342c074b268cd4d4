//! Minimum achievable worst-case violation of a set of affine rows.
//!
//! Solves `min_{θ, t} t  s.t.  a_i·θ − b_i ≤ t,  t ≥ −1` with a dense tableau
//! simplex. `θ` is split into nonnegative parts and `s = t + 1 ≥ 0`; the
//! initial dictionary is made feasible with a single pivot on `s`, after which
//! Bland's rule guarantees termination.

use ndarray::Array1;

use crate::constraints::ConstraintSet;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct PhaseOne {
    /// `max(min_θ max_i (a_i·θ − b_i), −1)`.
    pub min_max_violation: f64,
    /// A minimiser of the worst violation.
    pub theta: Array1<f64>,
}

pub(crate) fn min_max_violation(set: &ConstraintSet) -> PhaseOne {
    let d = set.dim();
    let m = set.len();
    if m == 0 {
        return PhaseOne {
            min_max_violation: -1.0,
            theta: Array1::zeros(d),
        };
    }
    let s_col = 2 * d;
    let n_vars = 2 * d + 1 + m;
    let rhs = n_vars;
    let mut t = vec![vec![0.0; n_vars + 1]; m + 1];
    for (i, row) in set.iter().enumerate() {
        for j in 0..d {
            t[i][j] = row.a[j];
            t[i][d + j] = -row.a[j];
        }
        t[i][s_col] = -1.0;
        t[i][s_col + 1 + i] = 1.0;
        t[i][rhs] = row.b - 1.0;
    }
    t[m][s_col] = 1.0;
    let mut basis: Vec<usize> = (0..m).map(|i| s_col + 1 + i).collect();

    let (worst, worst_rhs) = (0..m)
        .map(|i| (i, t[i][rhs]))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if worst_rhs < 0.0 {
        pivot(&mut t, worst, s_col);
        basis[worst] = s_col;
    }

    for _ in 0..50 * (n_vars + m) {
        let Some(enter) = (0..n_vars).find(|&j| t[m][j] < -EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][enter] > EPS {
                let ratio = t[i][rhs] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some((r, best)) => ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // the objective is bounded below by s ≥ 0, so a leaving row always exists
        let Some((r, _)) = leave else { break };
        pivot(&mut t, r, enter);
        basis[r] = enter;
    }

    let mut values = vec![0.0; n_vars];
    for (i, &b) in basis.iter().enumerate() {
        values[b] = t[i][rhs].max(0.0);
    }
    let theta = Array1::from_shape_fn(d, |j| values[j] - values[d + j]);
    // report the violation of the recovered point, which is what callers act on
    let achieved = set
        .iter()
        .map(|r| r.residual(theta.view()))
        .fold(f64::NEG_INFINITY, f64::max);
    PhaseOne {
        min_max_violation: achieved.max(values[s_col] - 1.0).max(-1.0),
        theta,
    }
}

fn pivot(t: &mut [Vec<f64>], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
    }
}
