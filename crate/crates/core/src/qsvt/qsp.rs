//! Phase fitting for the scalar signal-processing sequence
//! `P(x) = <0| e^{i phi_0 Z} prod_{k=1}^{d} R(x) e^{i phi_k Z} |0>`,
//! with `R(x) = [[x, sqrt(1-x^2)], [sqrt(1-x^2), -x]]`.
//!
//! The target is the Cayley response `f(x) = (1 - i beta x)/(1 + i beta x)`.
//! For even `d`, `P(1) = exp(i sum phi)` and `P(0) = exp(i (sum_even - sum_odd))`,
//! so `phi_0` and `phi_1` are solved from the other phases to make `P(0) = 1`
//! and `P(1) = f(1)` exact. The remaining `d - 1` phases are fitted to
//! minimize `max |Re P(x) - Re f(x)|`.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{mat_mul, Mat2};
use crate::rng::{label, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QspPhases {
    pub degree: usize,
    /// `phi_0 .. phi_d`.
    pub phases: Vec<f64>,
    pub beta: f64,
    /// `max |Re P(x) - Re f(x)|` on the evaluation grid over `[-1, 1]`.
    pub fit_error: f64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn signal(x: f64) -> Mat2 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    [[c(x, 0.0), c(s, 0.0)], [c(s, 0.0), c(-x, 0.0)]]
}

fn z_phase(phi: f64) -> Mat2 {
    [[Complex64::from_polar(1.0, phi), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, -phi)]]
}

/// The full 2x2 sequence matrix at signal value `x`.
pub fn qsp_matrix(phases: &[f64], x: f64) -> Mat2 {
    let r = signal(x);
    phases[1..].iter().fold(z_phase(phases[0]), |m, &phi| mat_mul(&mat_mul(&m, &r), &z_phase(phi)))
}

/// `P(x)`, the top-left entry of [`qsp_matrix`].
pub fn qsp_poly(phases: &[f64], x: f64) -> Complex64 {
    qsp_matrix(phases, x)[0][0]
}

/// `(1 - i beta x)/(1 + i beta x)`.
pub fn cayley_response(beta: f64, x: f64) -> Complex64 {
    c(1.0, -beta * x) / c(1.0, beta * x)
}

fn re_target(beta: f64, x: f64) -> f64 {
    let b2x2 = beta * beta * x * x;
    (1.0 - b2x2) / (1.0 + b2x2)
}

/// Completes `phi_2 .. phi_d` with the `phi_0`, `phi_1` that pin `P(0)` and `P(1)`.
pub fn constrained_phases(beta: f64, d: usize, free: &[f64]) -> Vec<f64> {
    if d == 0 {
        return vec![0.0];
    }
    let half = -(beta.atan());
    let mut phases = vec![0.0; d + 1];
    phases[2..].copy_from_slice(free);
    let even: f64 = (2..=d).step_by(2).map(|k| phases[k]).sum();
    let odd: f64 = (3..=d).step_by(2).map(|k| phases[k]).sum();
    phases[0] = half - even;
    phases[1] = half - odd;
    phases
}

fn residuals(beta: f64, d: usize, grid: &[f64], free: &[f64]) -> Vec<f64> {
    let phases = constrained_phases(beta, d, free);
    grid.iter().map(|&x| qsp_poly(&phases, x).re - re_target(beta, x)).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, r| m.max(r.abs()))
}

/// Levenberg-Marquardt on `sum_i w_i r_i^2` with a central-difference Jacobian.
fn levenberg_marquardt(f: &dyn Fn(&[f64]) -> Vec<f64>, weights: &[f64], p0: &[f64], iters: usize) -> Vec<f64> {
    let m = p0.len();
    let weighted = |p: &[f64]| -> Vec<f64> { f(p).iter().zip(weights).map(|(r, w)| r * w.sqrt()).collect() };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut p = p0.to_vec();
    let mut r = weighted(&p);
    let mut cur = cost(&r);
    let mut mu = 1e-3;
    for _ in 0..iters {
        let h = 1e-6;
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                let mut a = p.clone();
                let mut b = p.clone();
                a[j] += h;
                b[j] -= h;
                weighted(&a).iter().zip(weighted(&b)).map(|(x, y)| (x - y) / (2.0 * h)).collect()
            })
            .collect();
        let jtj = Mat::<f64>::from_fn(m, m, |i, j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum());
        let grad: Vec<f64> = cols.iter().map(|col| col.iter().zip(&r).map(|(a, b)| a * b).sum()).collect();
        let mut accepted = false;
        while mu < 1e12 {
            let damped = Mat::<f64>::from_fn(m, m, |i, j| {
                if i == j {
                    jtj[(i, j)] * (1.0 + mu) + mu * 1e-9
                } else {
                    jtj[(i, j)]
                }
            });
            let inv = damped.partial_piv_lu().inverse();
            let step: Vec<f64> = (0..m).map(|i| -(0..m).map(|j| inv[(i, j)] * grad[j]).sum::<f64>()).collect();
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            let rt = weighted(&trial);
            let ct = cost(&rt);
            if ct.is_finite() && ct < cur {
                let gain = cur - ct;
                p = trial;
                r = rt;
                cur = ct;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if gain <= 1e-16 * cur.max(1e-300) {
                    return p;
                }
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    p
}

/// Derivative-free minimization of `g` from `p0`.
fn nelder_mead(g: &dyn Fn(&[f64]) -> f64, p0: &[f64], scale: f64, iters: usize) -> Vec<f64> {
    let m = p0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=m)
        .map(|i| {
            let mut p = p0.to_vec();
            if i > 0 {
                p[i - 1] += scale;
            }
            let v = g(&p);
            (p, v)
        })
        .collect();
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let centroid: Vec<f64> = (0..m).map(|j| simplex[..m].iter().map(|s| s.0[j]).sum::<f64>() / m as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[m].0).map(|(c, w)| c + t * (w - c)).collect() };
        let refl = along(-1.0);
        let fr = g(&refl);
        if fr < simplex[0].1 {
            let exp = along(-2.0);
            let fe = g(&exp);
            simplex[m] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[m - 1].1 {
            simplex[m] = (refl, fr);
        } else {
            let con = along(if fr < simplex[m].1 { -0.5 } else { 0.5 });
            let fc = g(&con);
            if fc < simplex[m].1.min(fr) {
                simplex[m] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best.iter().zip(&s.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    s.1 = g(&s.0);
                }
            }
        }
        let spread = simplex.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max) - simplex[0].1;
        if spread.abs() < 1e-16 {
            break;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0).0
}

fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// `max |Re P(x) - Re f(x)|` over `points` evenly spaced values in `[-1, 1]`.
pub fn fit_error(phases: &[f64], beta: f64, points: usize) -> f64 {
    uniform_grid(-1.0, 1.0, points.max(2))
        .iter()
        .map(|&x| (qsp_poly(phases, x).re - re_target(beta, x)).abs())
        .fold(0.0, f64::max)
}

/// Fits phases for even `d` and reports the achieved error without judging it.
pub fn fit_qsp_phases(beta: f64, d: usize, grid_size: usize) -> Result<QspPhases> {
    if d % 2 == 1 {
        return Err(invalid(format!("degree must be even, got {d}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    if grid_size < 3 {
        return Err(invalid("evaluation grid needs at least 3 points"));
    }
    if d == 0 || beta == 0.0 {
        let phases = constrained_phases(beta, d, &vec![0.0; d.saturating_sub(1)]);
        let err = fit_error(&phases, beta, grid_size);
        return Ok(QspPhases { degree: d, phases, beta, fit_error: err });
    }
    // Re P is even in x, so fitting on [0, 1] suffices.
    let grid = uniform_grid(0.0, 1.0, grid_size.div_ceil(2).max(3 * d));
    let m = d - 1;
    let f = |p: &[f64]| residuals(beta, d, &grid, p);
    let uniform = vec![1.0; grid.len()];
    let mut rng = stream(beta.to_bits(), &[label::FIT, d as u64]);
    let mut starts = vec![vec![0.0; m]];
    starts.extend((0..23).map(|_| (0..m).map(|_| rng.random_range(-1.6..1.6)).collect::<Vec<f64>>()));
    let mut best = starts
        .iter()
        .map(|s| levenberg_marquardt(&f, &uniform, s, 200))
        .min_by(|a, b| max_abs(&f(a)).total_cmp(&max_abs(&f(b))))
        .expect("at least one start");

    // Lawson iteration toward the minimax solution.
    let mut weights = vec![1.0 / grid.len() as f64; grid.len()];
    let mut p = best.clone();
    for _ in 0..60 {
        p = levenberg_marquardt(&f, &weights, &p, 30);
        let r = f(&p);
        if max_abs(&r) < max_abs(&f(&best)) {
            best = p.clone();
        }
        let total: f64 = weights.iter().zip(&r).map(|(w, v)| w * v.abs()).sum();
        if total <= 0.0 {
            break;
        }
        for (w, v) in weights.iter_mut().zip(&r) {
            *w *= v.abs() / total;
        }
    }
    let g = |p: &[f64]| max_abs(&f(p));
    for scale in [1e-2, 1e-3, 1e-4] {
        let polished = nelder_mead(&g, &best, scale, 4000);
        if g(&polished) < g(&best) {
            best = polished;
        }
    }
    let phases = constrained_phases(beta, d, &best);
    let err = fit_error(&phases, beta, grid_size);
    Ok(QspPhases { degree: d, phases, beta, fit_error: err })
}

/// Fits phases and fails when the error stays above `tol`.
pub fn qsp_angles_for_cayley(beta: f64, d: usize, grid_size: usize, tol: f64) -> Result<QspPhases> {
    let fit = fit_qsp_phases(beta, d, grid_size)?;
    if fit.fit_error > tol {
        return Err(Error::FitStagnated { error: fit.fit_error, tol });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        for &beta in &[0.3, 0.75, 2.0] {
            for d in [2usize, 4, 6] {
                let free: Vec<f64> = (0..d - 1).map(|j| 0.1 * j as f64 - 0.2).collect();
                let phases = constrained_phases(beta, d, &free);
                assert!((qsp_poly(&phases, 0.0) - c(1.0, 0.0)).norm() < 1e-12);
                assert!((qsp_poly(&phases, 1.0) - cayley_response(beta, 1.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_beta_is_exact() {
        let fit = fit_qsp_phases(0.0, 4, 401).unwrap();
        assert!(fit.fit_error <= 1e-12);
    }

    #[test]
    fn odd_degree_is_rejected() {
        assert!(fit_qsp_phases(0.5, 3, 101).is_err());
    }

    #[test]
    fn stagnation_is_an_error() {
        assert!(matches!(qsp_angles_for_cayley(2.0, 2, 201, 1e-9), Err(Error::FitStagnated { .. })));
    }
}
