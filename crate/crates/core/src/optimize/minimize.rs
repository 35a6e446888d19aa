use std::path::Path;

use super::{default_steps, fd_gradient, Objective};
use crate::error::{Error, Result};
use crate::postprocess::write_csv;

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
    /// Finite-difference steps; `None` uses [`default_steps`].
    pub fd_steps: Option<Vec<f64>>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 200, step_tol: 1e-8, grad_tol: 1e-6, fd_steps: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// No decrease along the search direction.
    LineSearch,
    /// The objective returned NaN or infinity; the trace ends there.
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    /// Every accepted iterate, starting with `x0`.
    pub trace: Vec<(Vec<f64>, f64)>,
    pub iterations: usize,
    pub termination: Termination,
}

fn project(x: &mut [f64], bounds: &[[f64; 2]]) {
    for (v, b) in x.iter_mut().zip(bounds) {
        *v = v.clamp(b[0], b[1]);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Variables held at a bound by the gradient.
fn active_set(x: &[f64], g: &[f64], bounds: &[[f64; 2]]) -> Vec<bool> {
    x.iter().zip(g).zip(bounds).map(|((&v, &gi), b)| (v <= b[0] && gi > 0.0) || (v >= b[1] && gi < 0.0)).collect()
}

/// Projected BFGS with finite-difference gradients on a box.
///
/// Stops on a projected-gradient norm below `grad_tol`, a step below
/// `step_tol`, or after `max_iter` iterations. The objective is never
/// evaluated outside `bounds`.
pub fn minimize_bounded(
    obj: &dyn Objective,
    x0: &[f64],
    bounds: &[[f64; 2]],
    opts: &MinimizeOptions,
) -> Result<Minimum> {
    let n = x0.len();
    if bounds.len() != n {
        return Err(Error::validation("one bound pair per variable is required"));
    }
    if let Some(i) = (0..n).find(|&i| !(bounds[i][0] <= x0[i] && x0[i] <= bounds[i][1])) {
        return Err(Error::validation(format!("start value {i} lies outside its bounds")));
    }
    let steps = opts.fd_steps.clone().unwrap_or_else(|| default_steps(bounds));
    let grad = |x: &[f64]| fd_gradient(obj, x, bounds, Some(&steps));
    let mut x = x0.to_vec();
    let mut f = obj.eval(&x)?;
    let mut trace = vec![(x.clone(), f)];
    let done = |x: Vec<f64>, f, trace, iterations, termination| Ok(Minimum { x, f, trace, iterations, termination });
    if !f.is_finite() {
        return done(x, f, trace, 0, Termination::NonFinite);
    }
    let mut g = grad(&x)?;
    let mut h = identity(n);
    for it in 0..opts.max_iter {
        let active = active_set(&x, &g, bounds);
        let pg_norm = g.iter().zip(&active).map(|(gi, &a)| if a { 0.0 } else { gi * gi }).sum::<f64>().sqrt();
        if pg_norm < opts.grad_tol {
            return done(x, f, trace, it, Termination::GradientTolerance);
        }
        let mut d = vec![0.0; n];
        for i in (0..n).filter(|&i| !active[i]) {
            d[i] = -(0..n).filter(|&j| !active[j]).map(|j| h[i][j] * g[j]).sum::<f64>();
        }
        if dot(&d, &g) >= 0.0 {
            h = identity(n);
            d = g.iter().zip(&active).map(|(gi, &a)| if a { 0.0 } else { -gi }).collect();
        }
        // backtracking on the projected path
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(v, di)| v + alpha * di).collect();
            project(&mut trial, bounds);
            let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if s.iter().all(|v| *v == 0.0) {
                break;
            }
            let ft = obj.eval(&trial)?;
            if !ft.is_finite() {
                trace.push((trial, ft));
                return done(x, f, trace, it, Termination::NonFinite);
            }
            if ft <= f + 1e-4 * dot(&g, &s) {
                accepted = Some((trial, ft, s));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_, s)) = accepted else {
            return done(x, f, trace, it, Termination::LineSearch);
        };
        let gn = grad(&xn)?;
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if it == 0 {
                let scale = sy / dot(&y, &y);
                h = identity(n).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        let step = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x = xn;
        f = fn_;
        g = gn;
        trace.push((x.clone(), f));
        if step < opts.step_tol {
            return done(x, f, trace, it + 1, Termination::StepTolerance);
        }
    }
    done(x, f, trace, opts.max_iter, Termination::MaxIterations)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

// Inverse-Hessian update H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}

/// Writes `iteration, x1..xn, f` rows.
pub fn write_trace(path: impl AsRef<Path>, trace: &[(Vec<f64>, f64)]) -> Result<()> {
    let n = trace.first().map_or(0, |(x, _)| x.len());
    let mut header = vec!["iteration".to_owned()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.push("f".into());
    let rows: Vec<Vec<f64>> = trace
        .iter()
        .enumerate()
        .map(|(i, (x, f))| {
            let mut r = vec![i as f64];
            r.extend(x);
            r.push(*f);
            r
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &header, &rows)
}
