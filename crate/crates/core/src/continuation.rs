//! Continuation in `λ` from the explicit solution at `λ = 1` down to the
//! original system at `λ = 0`, with damped Newton correction at each step.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{MfgError, Result};
use crate::grid::SpaceTimeField;
use crate::linearized::{LinearMethod, LinearSolveOptions, LinearSolveReport, Linearization};
use crate::system::{pair_to_flat, residual_full, LambdaData, MfgProblem, SolutionPair};

/// How `Δλ` evolves along the path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Halve on Newton failure, grow by 1.5 after a quick success.
    Adaptive,
    /// Keep `dlambda_init`; still halves on failure but never grows.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub dlambda_init: f64,
    pub dlambda_min: f64,
    pub dlambda_max: f64,
    pub m_positivity_margin: f64,
    pub schedule: Schedule,
    /// Stop the path here instead of at 0.
    pub target_lambda: f64,
    /// Horizons above this are reported as outside the short-time regime without solving.
    pub max_horizon: f64,
    pub linear_method: LinearMethod,
    pub memory_budget_mb: usize,
    pub gmres_restart: usize,
    pub gmres_rtol: f64,
    pub gmres_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            newton_max_iters: 12,
            dlambda_init: 0.25,
            dlambda_min: 1e-4,
            dlambda_max: 1.0,
            m_positivity_margin: 1e-6,
            schedule: Schedule::Adaptive,
            target_lambda: 0.0,
            max_horizon: 10.0,
            linear_method: LinearMethod::Auto,
            memory_budget_mb: 1024,
            gmres_restart: 60,
            gmres_rtol: 1e-12,
            gmres_max_iters: 2000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(MfgError::config(format!("solver.{name}"), format!("must be positive, got {v}")))
            }
        };
        positive(self.newton_tol, "newton_tol")?;
        positive(self.dlambda_min, "dlambda_min")?;
        positive(self.m_positivity_margin, "m_positivity_margin")?;
        positive(self.max_horizon, "max_horizon")?;
        positive(self.gmres_rtol, "gmres_rtol")?;
        if self.newton_max_iters == 0 {
            return Err(MfgError::config("solver.newton_max_iters", "must be at least 1"));
        }
        if !(self.dlambda_min <= self.dlambda_init
            && self.dlambda_init <= self.dlambda_max
            && self.dlambda_max <= 1.0)
        {
            return Err(MfgError::config(
                "solver.dlambda_init",
                format!(
                    "need dlambda_min <= dlambda_init <= dlambda_max <= 1, got {} / {} / {}",
                    self.dlambda_min, self.dlambda_init, self.dlambda_max
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.target_lambda) {
            return Err(MfgError::config("solver.target_lambda", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn linear_options(&self) -> LinearSolveOptions {
        LinearSolveOptions {
            method: self.linear_method,
            memory_budget_bytes: self.memory_budget_mb.saturating_mul(1 << 20),
            gmres_restart: self.gmres_restart,
            gmres_rtol: self.gmres_rtol,
            gmres_max_iters: self.gmres_max_iters,
        }
    }
}

/// An accepted point on the path together with its residual certificate.
#[derive(Clone, Debug)]
pub struct ContinuationState {
    pub lambda: f64,
    pub pair: SolutionPair<f64>,
    pub residual_norm: f64,
    pub newton_iters: usize,
    /// `Δλ` that led to this state (0 for the starting point).
    pub step: f64,
}

impl ContinuationState {
    /// Recomputes the residual certificate from scratch.
    pub fn verify(&self, problem: &MfgProblem<f64>, tol: f64) -> Result<bool> {
        let l = problem.at_lambda(self.lambda)?;
        let r = residual_full(problem, &l, &self.pair)?;
        Ok(r.sup_norm() <= tol && self.pair.m.min() > 0.0)
    }

    pub fn min_density(&self) -> f64 {
        self.pair.m.min()
    }
}

/// `u = (1-π/4)(t-T)`, `m ≡ 1` at `λ = 1`.
pub fn trivial_solution(problem: &MfgProblem<f64>) -> Result<ContinuationState> {
    let grid = *problem.grid();
    let time = *problem.time();
    let horizon = time.horizon();
    let c = 1.0 - PI / 4.0;
    let mut u = SpaceTimeField::from_fn(grid, time, |_, t| c * (t - horizon));
    // pin the terminal slice to Ψ₁ = 0 exactly
    u.slice_mut(time.steps()).values_mut().fill(0.0);
    let pair = SolutionPair::new(u, SpaceTimeField::constant(grid, time, 1.0))?;
    let l = problem.at_lambda(1.0)?;
    let residual_norm = residual_full(problem, &l, &pair)?.sup_norm();
    Ok(ContinuationState { lambda: 1.0, pair, residual_norm, newton_iters: 0, step: 0.0 })
}

#[derive(Clone, Debug, Default)]
pub struct NewtonDiagnostics {
    pub iterations: usize,
    /// Residual sup-norm before each iteration and after the last one.
    pub residuals: Vec<f64>,
    pub damping: Vec<f64>,
    pub linear: Vec<LinearSolveReport>,
}

impl NewtonDiagnostics {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn offset_pair(pair: &SolutionPair<f64>, delta: &[f64], t: f64) -> Result<SolutionPair<f64>> {
    let mut flat = pair_to_flat(pair);
    flat.iter_mut().zip(delta).for_each(|(x, d)| *x += t * d);
    crate::system::pair_from_flat(*pair.grid(), *pair.time(), &flat)
}

/// Damped Newton on `M_λ = 0` starting from `pair`.
pub fn newton_correct(
    problem: &MfgProblem<f64>,
    lambda: &LambdaData<f64>,
    pair: &SolutionPair<f64>,
    config: &SolverConfig,
) -> Result<(SolutionPair<f64>, NewtonDiagnostics)> {
    if pair.m.min() < config.m_positivity_margin {
        return Err(MfgError::PositivityLost);
    }
    let opts = config.linear_options();
    let mut diag = NewtonDiagnostics::default();
    let mut current = pair.clone();
    let mut res = residual_full(problem, lambda, &current)?;
    let mut norm = res.sup_norm();
    diag.residuals.push(norm);
    loop {
        if norm <= config.newton_tol {
            return Ok((current, diag));
        }
        if diag.iterations >= config.newton_max_iters {
            return Err(MfgError::NewtonFailed { iterations: diag.iterations, residual: norm });
        }
        let lin = Linearization::new(problem, lambda, &current)?;
        let rhs: Vec<f64> = res.to_flat().iter().map(|v| -v).collect();
        let (delta, report) = lin.solve(&rhs, &opts)?;
        diag.linear.push(report);
        let mut t = 1.0;
        let mut positivity_blocked = true;
        let accepted = loop {
            let cand = offset_pair(&current, &delta, t)?;
            if cand.m.min() >= config.m_positivity_margin {
                positivity_blocked = false;
                let r = residual_full(problem, lambda, &cand)?;
                let n = r.sup_norm();
                if n.is_finite() && n < (1.0 - 1e-4 * t) * norm {
                    break Some((cand, r, n));
                }
            }
            t *= 0.5;
            if t < 1.0 / 1024.0 {
                break None;
            }
        };
        diag.iterations += 1;
        match accepted {
            Some((cand, r, n)) => {
                current = cand;
                res = r;
                norm = n;
                diag.residuals.push(norm);
                diag.damping.push(t);
            }
            None if positivity_blocked => return Err(MfgError::PositivityLost),
            None => return Err(MfgError::NewtonFailed { iterations: diag.iterations, residual: norm }),
        }
    }
}

/// One line of the path log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub lambda: f64,
    pub step: f64,
    pub accepted: bool,
    pub newton_iters: usize,
    pub residual: f64,
    pub min_m: f64,
    pub message: String,
}

/// The path stopped before reaching the target `λ`.
#[derive(Clone, Debug)]
pub struct HorizonFailure {
    pub lambda_reached: f64,
    pub last_step: f64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct ContinuationPath {
    /// Accepted states, starting with the trivial one.
    pub states: Vec<ContinuationState>,
    pub records: Vec<PathRecord>,
    pub failure: Option<HorizonFailure>,
}

impl ContinuationPath {
    pub fn last(&self) -> &ContinuationState {
        self.states.last().expect("a path always holds the starting state")
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Marches `λ` from 1 to `config.target_lambda`.
pub fn solve_path(problem: &MfgProblem<f64>, config: &SolverConfig) -> Result<ContinuationPath> {
    config.validate()?;
    let start = trivial_solution(problem)?;
    let mut records = vec![PathRecord {
        lambda: 1.0,
        step: 0.0,
        accepted: true,
        newton_iters: 0,
        residual: start.residual_norm,
        min_m: start.min_density(),
        message: "trivial solution".into(),
    }];
    let mut path = ContinuationPath { states: vec![start], records: Vec::new(), failure: None };
    if problem.time().horizon() > config.max_horizon {
        path.failure = Some(HorizonFailure {
            lambda_reached: 1.0,
            last_step: 0.0,
            reason: format!("horizon {} exceeds max_horizon {}", problem.time().horizon(), config.max_horizon),
        });
        path.records = records;
        return Ok(path);
    }
    let target = config.target_lambda;
    let mut step = config.dlambda_init;
    loop {
        let prev = path.last();
        if prev.lambda <= target {
            break;
        }
        let mut lambda = (prev.lambda - step).max(target);
        // snap rounding leftovers onto the target
        if lambda - target <= 1e-9 * step {
            lambda = target;
        }
        let taken = prev.lambda - lambda;
        let data = problem.at_lambda(lambda)?;
        let outcome = newton_correct(problem, &data, &prev.pair, config);
        match outcome {
            Ok((pair, diag)) => {
                let state = ContinuationState {
                    lambda,
                    residual_norm: diag.final_residual(),
                    newton_iters: diag.iterations,
                    step: taken,
                    pair,
                };
                let rec = PathRecord {
                    lambda,
                    step: taken,
                    accepted: true,
                    newton_iters: diag.iterations,
                    residual: state.residual_norm,
                    min_m: state.min_density(),
                    message: "accepted".into(),
                };
                log::info!(
                    "lambda={:.6} step={:.3e} iters={} residual={:.3e} min_m={:.6}",
                    rec.lambda, rec.step, rec.newton_iters, rec.residual, rec.min_m
                );
                records.push(rec);
                if config.schedule == Schedule::Adaptive && diag.iterations <= 2 {
                    step = (step * 1.5).min(config.dlambda_max);
                }
                path.states.push(state);
            }
            Err(err @ (MfgError::NewtonFailed { .. } | MfgError::PositivityLost | MfgError::LinearSolver(_) | MfgError::Singular { .. } | MfgError::NonPositiveDensity { .. })) => {
                let residual = match &err {
                    MfgError::NewtonFailed { residual, .. } => *residual,
                    _ => f64::NAN,
                };
                log::info!("lambda={lambda:.6} step={taken:.3e} rejected: {err}");
                records.push(PathRecord {
                    lambda,
                    step: taken,
                    accepted: false,
                    newton_iters: 0,
                    residual,
                    min_m: f64::NAN,
                    message: err.to_string(),
                });
                step *= 0.5;
                if step < config.dlambda_min {
                    let last = path.last();
                    path.failure = Some(HorizonFailure {
                        lambda_reached: last.lambda,
                        last_step: step,
                        reason: format!("step underflow below dlambda_min after: {err}"),
                    });
                    break;
                }
            }
            Err(other) => return Err(other),
        }
    }
    path.records = records;
    Ok(path)
}
