//! Limited-memory BFGS with a strong Wolfe line search.
//!
//! Follows Nocedal & Wright: two-loop recursion for the search
//! direction, bracketing plus zoom for the step length, sufficient
//! decrease 1e−4 and curvature 0.9. An objective that fails or returns a
//! non-finite value at a trial point is treated as +∞, so the line
//! search backs away from it; failure at the starting point is an error.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::opt::FitConfig;

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_BRACKET_STEPS: usize = 20;
const MAX_ZOOM_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient norm fell below the tolerance.
    GradientTolerance,
    /// Iteration cap reached.
    IterationCap,
    /// The line search could not find an acceptable step; the best
    /// iterate so far is returned. Not fatal: restart drivers keep it.
    LineSearchFailure,
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

struct HistoryPair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two-loop recursion: applies the implicit inverse Hessian to the
/// gradient, scaled by the most recent curvature pair.
fn search_direction(gradient: &[f64], history: &VecDeque<HistoryPair>) -> Vec<f64> {
    let mut q = gradient.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let a = pair.rho * dot(&pair.s, &q);
        for (qi, yi) in q.iter_mut().zip(&pair.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for (pair, a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = pair.rho * dot(&pair.y, &q);
        for (qi, si) in q.iter_mut().zip(&pair.s) {
            *qi += (a - b) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

/// Minimizes `objective` from `x0`.
///
/// Deterministic in its inputs. Accepted steps satisfy the strong Wolfe
/// conditions, so the objective never increases along the run; the
/// returned value is always ≤ the value at `x0`. An iteration cap of
/// zero returns `x0` unchanged with `converged = false`.
pub fn lbfgs_minimize<F>(mut objective: F, x0: &[f64], cfg: &FitConfig) -> Result<LbfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    cfg.validate()?;
    let (f0, g0) = objective(x0)?;
    if !f0.is_finite() || g0.iter().any(|g| !g.is_finite()) {
        return Err(Error::invalid(
            "objective is not finite at the starting point",
        ));
    }
    if g0.len() != x0.len() {
        return Err(Error::invalid(format!(
            "gradient has {} entries for {} coordinates",
            g0.len(),
            x0.len()
        )));
    }

    let mut x = x0.to_vec();
    let mut f = f0;
    let mut g = g0;
    let mut history: VecDeque<HistoryPair> = VecDeque::with_capacity(cfg.memory_pairs);
    let mut iterations = 0;
    let mut termination = Termination::IterationCap;
    let mut converged = false;

    for iteration in 0..cfg.max_iterations {
        if norm(&g) <= cfg.gradient_tolerance {
            termination = Termination::GradientTolerance;
            converged = true;
            break;
        }
        let mut direction = search_direction(&g, &history);
        let mut slope = dot(&g, &direction);
        if !(slope < 0.0) {
            // Stale curvature can produce a non-descent direction; fall
            // back to steepest descent.
            history.clear();
            direction = g.iter().map(|gi| -gi).collect();
            slope = dot(&g, &direction);
        }
        let initial_step = if history.is_empty() {
            (1.0 / norm(&direction)).min(1.0)
        } else {
            1.0
        };

        match wolfe_line_search(&mut objective, &x, f, &direction, slope, initial_step) {
            Some(accepted) => {
                let s: Vec<f64> = accepted
                    .x
                    .iter()
                    .zip(&x)
                    .map(|(new, old)| new - old)
                    .collect();
                let y: Vec<f64> = accepted
                    .gradient
                    .iter()
                    .zip(&g)
                    .map(|(new, old)| new - old)
                    .collect();
                let sy = dot(&s, &y);
                if sy > 1e-10 * norm(&s) * norm(&y) {
                    if history.len() == cfg.memory_pairs {
                        history.pop_front();
                    }
                    history.push_back(HistoryPair {
                        s,
                        y,
                        rho: 1.0 / sy,
                    });
                }
                x = accepted.x;
                f = accepted.value;
                g = accepted.gradient;
                iterations = iteration + 1;
            }
            None => {
                termination = Termination::LineSearchFailure;
                iterations = iteration;
                break;
            }
        }
    }
    if !converged
        && termination == Termination::IterationCap
        && norm(&g) <= cfg.gradient_tolerance
    {
        // Tolerance reached exactly on the last allowed step.
        termination = Termination::GradientTolerance;
        converged = true;
    }

    Ok(LbfgsOutcome {
        x,
        value: f,
        iterations,
        converged,
        termination,
    })
}

struct AcceptedStep {
    x: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
}

struct Probe {
    x: Vec<f64>,
    value: f64,
    gradient: Option<Vec<f64>>,
    slope: f64,
}

fn probe<F>(
    objective: &mut F,
    x: &[f64],
    direction: &[f64],
    step: f64,
) -> Probe
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let trial: Vec<f64> = x
        .iter()
        .zip(direction)
        .map(|(xi, di)| xi + step * di)
        .collect();
    match objective(&trial) {
        Ok((value, gradient))
            if value.is_finite() && gradient.iter().all(|g| g.is_finite()) =>
        {
            let slope = dot(&gradient, direction);
            Probe {
                x: trial,
                value,
                gradient: Some(gradient),
                slope,
            }
        }
        // A failed or non-finite evaluation acts as +∞: the search
        // retreats toward the current iterate where values are finite.
        _ => Probe {
            x: trial,
            value: f64::INFINITY,
            gradient: None,
            slope: f64::NAN,
        },
    }
}

/// Strong Wolfe line search (bracket then zoom).
fn wolfe_line_search<F>(
    objective: &mut F,
    x: &[f64],
    f0: f64,
    direction: &[f64],
    slope0: f64,
    initial_step: f64,
) -> Option<AcceptedStep>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    debug_assert!(slope0 < 0.0);
    let mut step_prev = 0.0;
    let mut value_prev = f0;
    let mut slope_prev = slope0;
    let mut step = initial_step;

    for i in 0..MAX_BRACKET_STEPS {
        let candidate = probe(objective, x, direction, step);
        let armijo_violated = candidate.value > f0 + C1 * step * slope0
            || (i > 0 && candidate.value >= value_prev);
        if armijo_violated {
            let bracket = Bracket {
                step_lo: step_prev,
                value_lo: value_prev,
                slope_lo: slope_prev,
                step_hi: step,
                value_hi: candidate.value,
            };
            return zoom(objective, x, f0, slope0, direction, bracket);
        }
        // Finite value and Armijo hold, so the gradient is present.
        let slope = candidate.slope;
        if slope.abs() <= -C2 * slope0 {
            return Some(AcceptedStep {
                x: candidate.x,
                value: candidate.value,
                gradient: candidate.gradient.expect("finite probe carries a gradient"),
            });
        }
        if slope >= 0.0 {
            let bracket = Bracket {
                step_lo: step,
                value_lo: candidate.value,
                slope_lo: slope,
                step_hi: step_prev,
                value_hi: value_prev,
            };
            return zoom(objective, x, f0, slope0, direction, bracket);
        }
        step_prev = step;
        value_prev = candidate.value;
        slope_prev = slope;
        step *= 2.0;
    }
    None
}

/// A step interval whose lo end satisfies the sufficient-decrease
/// condition. hi may sit on either side of lo.
struct Bracket {
    step_lo: f64,
    value_lo: f64,
    slope_lo: f64,
    step_hi: f64,
    value_hi: f64,
}

/// Zoom phase: shrinks the bracket with a quadratic-interpolation
/// candidate (safeguarded toward bisection) until the curvature
/// condition holds.
fn zoom<F>(
    objective: &mut F,
    x: &[f64],
    f0: f64,
    slope0: f64,
    direction: &[f64],
    mut bracket: Bracket,
) -> Option<AcceptedStep>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    for _ in 0..MAX_ZOOM_STEPS {
        let width = bracket.step_hi - bracket.step_lo;
        if width.abs() < 1e-16 * bracket.step_lo.abs().max(1.0) {
            return None;
        }
        // Quadratic through (lo, value, slope) and (hi, value).
        let mut step = bracket.step_lo
            - 0.5 * bracket.slope_lo * width * width
                / (bracket.value_hi - bracket.value_lo - bracket.slope_lo * width);
        let lo_bound = bracket.step_lo + 0.1 * width;
        let hi_bound = bracket.step_lo + 0.9 * width;
        if !step.is_finite() || (step - lo_bound) * (step - hi_bound) > 0.0 {
            step = bracket.step_lo + 0.5 * width;
        }

        let candidate = probe(objective, x, direction, step);
        if candidate.value > f0 + C1 * step * slope0 || candidate.value >= bracket.value_lo {
            bracket.step_hi = step;
            bracket.value_hi = candidate.value;
        } else {
            let slope = candidate.slope;
            if slope.abs() <= -C2 * slope0 {
                return Some(AcceptedStep {
                    x: candidate.x,
                    value: candidate.value,
                    gradient: candidate
                        .gradient
                        .expect("finite probe carries a gradient"),
                });
            }
            if slope * width >= 0.0 {
                bracket.step_hi = bracket.step_lo;
                bracket.value_hi = bracket.value_lo;
            }
            bracket.step_lo = step;
            bracket.value_lo = candidate.value;
            bracket.slope_lo = slope;
        }
    }
    None
}
