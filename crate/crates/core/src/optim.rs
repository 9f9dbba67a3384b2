//! BFGS minimizer with central-difference gradients.
//!
//! Objectives return `None` for infeasible points (non-PD matrices, explosive
//! roots); the line search treats those as rejected steps.

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BfgsOptions {
    /// Converged when the gradient max-norm drops below this.
    pub gtol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Cap on the max-norm of a single step.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-6,
            max_iter: 500,
            fd_step: 6e-6,
            max_step: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Central-difference gradient, falling back to one-sided differences when a
/// neighbour is infeasible.
pub fn numerical_gradient<F>(f: &F, x: &[f64], fx: f64, rel_step: f64) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let h = rel_step * x[k].abs().max(1.0);
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        g[k] = match (fp, fm) {
            (Some(a), Some(b)) => (a - b) / (2.0 * h),
            (Some(a), None) => (a - fx) / h,
            (None, Some(b)) => (fx - b) / h,
            (None, None) => return None,
        };
    }
    Some(g)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` from `x0`. Returns `None` if `f(x0)` is infeasible.
pub fn bfgs<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> Option<Minimum>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    let mut g = numerical_gradient(&f, &x, fx, opts.fd_step)?;
    let mut h_inv = identity(n);
    let mut first = true;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if max_norm(&g) < opts.gtol {
            return Some(Minimum {
                grad_norm: max_norm(&g),
                x,
                value: fx,
                iterations,
                converged: true,
            });
        }
        iterations += 1;

        let mut p: Vec<f64> = (0..n).map(|i| -dot(&h_inv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&p, &g);
        if !(slope < 0.0) {
            // lost descent direction: restart from steepest descent
            h_inv = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&p, &g);
        }
        let pn = max_norm(&p);
        let mut step = if first { (1.0 / pn.max(1e-12)).min(1.0) } else { 1.0 };
        if pn * step > opts.max_step {
            step = opts.max_step / pn;
        }

        let mut accepted = None;
        let mut trial = vec![0.0; n];
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = x[i] + step * p[i];
            }
            if let Some(ft) = f(&trial) {
                if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                    accepted = Some(ft);
                    break;
                }
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            // no decrease possible along the search direction: noise floor
            let gn = max_norm(&g);
            return Some(Minimum {
                x,
                value: fx,
                grad_norm: gn,
                iterations,
                converged: gn < opts.gtol.max(1e-4),
            });
        };
        let Some(g_new) = numerical_gradient(&f, &trial, f_new, opts.fd_step) else {
            return Some(Minimum {
                grad_norm: max_norm(&g),
                x,
                value: fx,
                iterations,
                converged: false,
            });
        };

        let s: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if first {
                let scale = sy / dot(&y, &y);
                for v in &mut h_inv {
                    *v *= scale;
                }
            }
            bfgs_update(&mut h_inv, &s, &y, sy, n);
            first = false;
        }

        let stalled = (fx - f_new).abs() <= 1e-15 * fx.abs().max(1.0);
        x.copy_from_slice(&trial);
        fx = f_new;
        g = g_new;
        if stalled && max_norm(&g) < opts.gtol.max(1e-4) {
            return Some(Minimum {
                grad_norm: max_norm(&g),
                x,
                value: fx,
                iterations,
                converged: true,
            });
        }
    }
    Some(Minimum {
        grad_norm: max_norm(&g),
        converged: max_norm(&g) < opts.gtol,
        x,
        value: fx,
        iterations,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Logistic map onto (0, 1).
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Unconstrained pair → (first, second) with first, second > 0 and
/// first + second < 1. The sum is a logistic of `u[0]`, the split a
/// logistic of `u[1]`.
pub fn simplex_pair(u0: f64, u1: f64) -> (f64, f64) {
    let total = logistic(u0);
    let share = logistic(u1);
    (total * share, total * (1.0 - share))
}

pub fn simplex_pair_inverse(first: f64, second: f64) -> (f64, f64) {
    let total = first + second;
    (logit(total), logit(first / total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| Some((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let m = bfgs(f, &[-1.2, 1.0], &BfgsOptions::default()).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-4, "{:?}", m);
    }

    #[test]
    fn respects_infeasible_region() {
        // minimum of (x-2)^2 constrained to x < 1.5 via None
        let f = |x: &[f64]| if x[0] < 1.5 { Some((x[0] - 2.0).powi(2)) } else { None };
        let m = bfgs(f, &[0.0], &BfgsOptions::default()).unwrap();
        assert!(m.x[0] < 1.5 && m.x[0] > 1.4);
    }

    #[test]
    fn simplex_pair_round_trips() {
        let (u0, u1) = simplex_pair_inverse(0.05, 0.9);
        let (a, b) = simplex_pair(u0, u1);
        assert!((a - 0.05).abs() < 1e-14 && (b - 0.9).abs() < 1e-14);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        assert!(bfgs(|_: &[f64]| None, &[0.0], &BfgsOptions::default()).is_none());
    }
}
