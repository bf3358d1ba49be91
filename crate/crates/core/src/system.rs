//! Problem data and the discrete residual `M_λ[u, m]` of the congestion
//! mean-field game on a space-time grid.
//!
//! Time stepping is implicit Euler in each equation's own direction:
//!
//! ```text
//! FP,  n = 1..N_t :  (m^n - m^{n-1})/dt - Δm^n - div((D_pH_λ(x,Q^n) + b_λ) m^n)
//! HJB, n = 0..N_t-1: (u^n - u^{n+1})/dt - Δu^n + (m^n)^α H_λ(x,Q^n) + b_λ·Du^n - V_λ(x,m^n)
//! FP,  n = 0 :        m^0 - m_λ
//! HJB, n = N_t :      u^{N_t} - Ψ_λ
//! ```
//!
//! with `Q^n = Du^n / max(m^n, m_floor)^α`. The FP flux is in divergence form,
//! so its spatial part integrates to zero on every slice.

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{MfgError, Result};
use crate::grid::{Field, PeriodicGrid, SpaceTimeField, Spectral, TimeGrid, VectorField};
use crate::hamiltonian::HamiltonianModel;
use crate::scalar::Scalar;

/// Density dependence `v₂(z)` of the separable potential `V(x, z) = v₁(x) + v₂(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling<S> {
    Arctan,
    /// `slope · z`
    Linear { slope: S },
    /// `coef · z^exponent`
    Power { coef: S, exponent: S },
}

impl<S: Scalar> Coupling<S> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Coupling::Arctan => Ok(()),
            Coupling::Linear { slope } if slope > S::zero() => Ok(()),
            Coupling::Power { coef, exponent } if coef > S::zero() && exponent > S::zero() => Ok(()),
            _ => Err(MfgError::InvalidArgument(format!("coupling {self:?} is not strictly increasing"))),
        }
    }

    #[inline]
    pub fn eval(&self, z: S) -> S {
        match *self {
            Coupling::Arctan => z.atan(),
            Coupling::Linear { slope } => slope * z,
            Coupling::Power { coef, exponent } => coef * z.max(S::zero()).powf(exponent),
        }
    }

    #[inline]
    pub fn derivative(&self, z: S) -> S {
        match *self {
            Coupling::Arctan => S::one() / (S::one() + z * z),
            Coupling::Linear { slope } => slope,
            Coupling::Power { coef, exponent } => {
                coef * exponent * z.max(S::zero()).powf(exponent - S::one())
            }
        }
    }

    /// `sup |v₂|` over `[0, z_max]` (monotone, so attained at an end point).
    pub fn sup_abs(&self, z_max: S) -> S {
        Float::abs(self.eval(S::zero())).max(Float::abs(self.eval(z_max)))
    }
}

/// `V(x, z) = v₁(x) + v₂(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential<S> {
    pub spatial: Field<S>,
    pub coupling: Coupling<S>,
}

impl<S: Scalar> Potential<S> {
    #[inline]
    pub fn eval(&self, idx: usize, z: S) -> S {
        self.spatial.values()[idx] + self.coupling.eval(z)
    }
}

/// All data of the congestion MFG on a fixed space-time grid.
#[derive(Clone, Debug)]
pub struct MfgProblem<S: Scalar> {
    grid: PeriodicGrid,
    time: TimeGrid<S>,
    alpha: S,
    hamiltonian: HamiltonianModel<S>,
    drift: VectorField<S>,
    potential: Potential<S>,
    terminal: Field<S>,
    initial: Field<S>,
    m_floor: S,
    strict: bool,
    spectral: Spectral<S>,
}

/// Builder-style inputs for [`MfgProblem::new`].
#[derive(Clone, Debug)]
pub struct ProblemData<S> {
    pub time: TimeGrid<S>,
    pub alpha: S,
    pub hamiltonian: HamiltonianModel<S>,
    pub drift: VectorField<S>,
    pub potential: Potential<S>,
    pub terminal: Field<S>,
    pub initial: Field<S>,
    pub m_floor: S,
}

impl<S: Scalar> MfgProblem<S> {
    pub fn new(data: ProblemData<S>) -> Result<Self> {
        let grid = *data.initial.grid();
        for g in [
            data.hamiltonian.weight().grid(),
            data.drift.grid(),
            data.potential.spatial.grid(),
            data.terminal.grid(),
        ] {
            grid.ensure_same(g)?;
        }
        if !(data.alpha >= S::zero()) || !data.alpha.is_finite() {
            return Err(MfgError::InvalidArgument(format!("alpha = {} must be >= 0", data.alpha)));
        }
        if !(data.m_floor > S::zero()) {
            return Err(MfgError::InvalidArgument("m_floor must be positive".into()));
        }
        data.potential.coupling.validate()?;
        for (f, ctx) in [
            (&data.initial, "initial density"),
            (&data.terminal, "terminal cost"),
            (&data.potential.spatial, "potential"),
        ] {
            f.check_finite(ctx)?;
        }
        for c in data.drift.components() {
            c.check_finite("drift")?;
        }
        let mass = data.initial.integrate();
        if Float::abs(mass - S::one()) > S::lit(1e-12) {
            return Err(MfgError::InvalidArgument(format!("initial density has mass {mass}, expected 1")));
        }
        if !(data.initial.min() > S::zero()) {
            return Err(MfgError::InvalidArgument(format!(
                "initial density must be bounded below by a positive constant (min {})",
                data.initial.min()
            )));
        }
        Ok(Self {
            grid,
            time: data.time,
            alpha: data.alpha,
            hamiltonian: data.hamiltonian,
            drift: data.drift,
            potential: data.potential,
            terminal: data.terminal,
            initial: data.initial,
            m_floor: data.m_floor,
            strict: true,
            spectral: Spectral::new(grid),
        })
    }

    /// Same data on a different time grid.
    pub fn with_time(&self, time: TimeGrid<S>) -> Self {
        Self { time, ..self.clone() }
    }

    /// Disables strict positivity checks: densities below the floor are
    /// evaluated with the floor instead of raising an error.
    pub fn floored(mut self) -> Self {
        self.strict = false;
        self
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }
    #[inline]
    pub fn time(&self) -> &TimeGrid<S> {
        &self.time
    }
    #[inline]
    pub fn alpha(&self) -> S {
        self.alpha
    }
    #[inline]
    pub fn hamiltonian(&self) -> &HamiltonianModel<S> {
        &self.hamiltonian
    }
    #[inline]
    pub fn drift(&self) -> &VectorField<S> {
        &self.drift
    }
    #[inline]
    pub fn potential(&self) -> &Potential<S> {
        &self.potential
    }
    #[inline]
    pub fn terminal(&self) -> &Field<S> {
        &self.terminal
    }
    #[inline]
    pub fn initial(&self) -> &Field<S> {
        &self.initial
    }
    /// Lower bound `k₀ = min m₀ > 0`.
    #[inline]
    pub fn k0(&self) -> S {
        self.initial.min()
    }
    #[inline]
    pub fn m_floor(&self) -> S {
        self.m_floor
    }
    #[inline]
    pub fn is_strict(&self) -> bool {
        self.strict
    }
    #[inline]
    pub fn spectral(&self) -> &Spectral<S> {
        &self.spectral
    }

    /// Data of the continuation family at parameter `λ`.
    pub fn at_lambda(&self, lambda: S) -> Result<LambdaData<S>> {
        LambdaData::new(self, lambda)
    }
}

/// `b_λ = (1-λ) b`, `V_λ = (1-λ) V + λ arctan(m)`, `Ψ_λ = (1-λ) Ψ`,
/// `m_λ = (1-λ) m₀ + λ` and `H_λ`.
#[derive(Clone, Debug)]
pub struct LambdaData<S> {
    pub lambda: S,
    pub drift: VectorField<S>,
    pub terminal: Field<S>,
    pub initial: Field<S>,
    pub hamiltonian: HamiltonianModel<S>,
    potential: Potential<S>,
}

impl<S: Scalar> LambdaData<S> {
    pub fn new(problem: &MfgProblem<S>, lambda: S) -> Result<Self> {
        if !(lambda >= S::zero() && lambda <= S::one()) {
            return Err(MfgError::InvalidArgument(format!("lambda = {lambda} outside [0, 1]")));
        }
        let keep = S::one() - lambda;
        Ok(Self {
            lambda,
            drift: problem.drift.scaled(keep),
            terminal: problem.terminal.scaled(keep),
            initial: problem.initial.map(|m| keep * m + lambda),
            hamiltonian: problem.hamiltonian.blended(lambda)?,
            potential: problem.potential.clone(),
        })
    }

    /// `V_λ(x_idx, z)`.
    #[inline]
    pub fn potential(&self, idx: usize, z: S) -> S {
        (S::one() - self.lambda) * self.potential.eval(idx, z) + self.lambda * z.atan()
    }

    /// `∂_z V_λ(x_idx, z)`.
    #[inline]
    pub fn potential_dz(&self, z: S) -> S {
        (S::one() - self.lambda) * self.potential.coupling.derivative(z)
            + self.lambda / (S::one() + z * z)
    }

    /// `sup |V_λ(x, z)|` over all nodes and `z ∈ [0, z_max]`.
    pub fn potential_sup(&self, z_max: S) -> S {
        let keep = S::one() - self.lambda;
        keep * (self.potential.spatial.sup_norm() + self.potential.coupling.sup_abs(z_max))
            + self.lambda * z_max.atan()
    }
}

/// A space-time candidate `(u, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPair<S> {
    pub u: SpaceTimeField<S>,
    pub m: SpaceTimeField<S>,
}

impl<S: Scalar> SolutionPair<S> {
    pub fn new(u: SpaceTimeField<S>, m: SpaceTimeField<S>) -> Result<Self> {
        u.grid().ensure_same(m.grid())?;
        if u.time() != m.time() {
            return Err(MfgError::GridMismatch("u and m on different time grids".into()));
        }
        Ok(Self { u, m })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.u.grid()
    }

    pub fn time(&self) -> &TimeGrid<S> {
        self.u.time()
    }

    /// Largest nodewise difference of either component.
    pub fn distance(&self, other: &Self) -> S {
        let mut d = S::zero();
        for (a, b) in [(&self.u, &other.u), (&self.m, &other.m)] {
            for (sa, sb) in a.slices().iter().zip(b.slices()) {
                d = d.max(sa.zip_map(sb, |x, y| x - y).sup_norm());
            }
        }
        d
    }
}

/// Everything pointwise the residual and its linearization need on one slice.
#[derive(Clone, Debug)]
pub struct SliceState<S> {
    pub du: VectorField<S>,
    /// `max(m, floor)^α`
    pub m_alpha: Vec<S>,
    /// `d/dm max(m, floor)^α` (zero where the floor is active)
    pub dm_alpha: Vec<S>,
    pub q: Vec<[S; 2]>,
    pub h: Vec<S>,
    pub dp_h: Vec<[S; 2]>,
    pub hess: Vec<[[S; 2]; 2]>,
    pub floor_active: bool,
}

/// `Q = Du / max(m, m_floor)^α`.
pub fn congestion_ratio<S: Scalar>(du: &VectorField<S>, m: &Field<S>, alpha: S, m_floor: S) -> VectorField<S> {
    let comps = du
        .components()
        .iter()
        .map(|c| c.zip_map(m, |g, mi| g / mi.max(m_floor).powf(alpha)))
        .collect();
    VectorField::new(comps).expect("components share the grid of du")
}

impl<S: Scalar> SliceState<S> {
    pub fn new(
        problem: &MfgProblem<S>,
        lambda: &LambdaData<S>,
        u: &Field<S>,
        m: &Field<S>,
        slice: usize,
    ) -> Result<Self> {
        let grid = problem.grid();
        grid.ensure_same(u.grid())?;
        grid.ensure_same(m.grid())?;
        m.check_finite("density")?;
        if problem.strict {
            if let Some(node) = m.values().iter().position(|&v| !(v > S::zero())) {
                return Err(MfgError::NonPositiveDensity {
                    node,
                    slice,
                    value: m.values()[node].to_f64_lossy(),
                });
            }
        }
        let du = problem.spectral.gradient(u)?;
        let alpha = problem.alpha;
        let floor = problem.m_floor;
        let len = grid.len();
        let mut st = SliceState {
            du,
            m_alpha: Vec::with_capacity(len),
            dm_alpha: Vec::with_capacity(len),
            q: Vec::with_capacity(len),
            h: Vec::with_capacity(len),
            dp_h: Vec::with_capacity(len),
            hess: Vec::with_capacity(len),
            floor_active: false,
        };
        for i in 0..len {
            let mi = m.values()[i];
            let active = mi < floor;
            st.floor_active |= active;
            let ma = mi.max(floor).powf(alpha);
            let dma = if active { S::zero() } else { alpha * ma / mi };
            let g = st.du.at(i);
            let q = [g[0] / ma, g[1] / ma];
            let jet = lambda.hamiltonian.jet(i, q);
            st.m_alpha.push(ma);
            st.dm_alpha.push(dma);
            st.q.push(q);
            st.h.push(jet.value);
            st.dp_h.push(jet.grad);
            st.hess.push(jet.hess);
        }
        Ok(st)
    }
}

/// `-Δm - div((D_pH_λ + b_λ) m)`.
pub fn fp_spatial<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    state: &SliceState<S>,
    m: &Field<S>,
) -> Result<Field<S>> {
    let sp = &problem.spectral;
    let dim = problem.grid.dim();
    let flux = (0..dim)
        .map(|a| {
            let b = lambda.drift.component(a).values();
            let vals = (0..m.len()).map(|i| (state.dp_h[i][a] + b[i]) * m.values()[i]).collect();
            Field::from_values(problem.grid, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let div = sp.divergence(&VectorField::new(flux)?)?;
    let lap = sp.laplacian(m)?;
    Ok(lap.zip_map(&div, |l, d| -l - d))
}

/// `-Δu + max(m, floor)^α H_λ(x, Q) + b_λ·Du - V_λ(x, m)`.
pub fn hjb_spatial<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    state: &SliceState<S>,
    u: &Field<S>,
    m: &Field<S>,
) -> Result<Field<S>> {
    let lap = problem.spectral.laplacian(u)?;
    let dim = problem.grid.dim();
    let vals = (0..u.len())
        .map(|i| {
            let du = state.du.at(i);
            let b = lambda.drift.at(i);
            let transport = (0..dim).map(|a| b[a] * du[a]).sum::<S>();
            -lap.values()[i] + state.m_alpha[i] * state.h[i] + transport
                - lambda.potential(i, m.values()[i])
        })
        .collect();
    Field::from_values(problem.grid, vals)
}

fn check_pair<S: Scalar>(problem: &MfgProblem<S>, pair: &SolutionPair<S>) -> Result<()> {
    problem.grid.ensure_same(pair.grid())?;
    if pair.time() != &problem.time {
        return Err(MfgError::GridMismatch("pair time grid differs from the problem's".into()));
    }
    Ok(())
}

fn slice_states<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    pair: &SolutionPair<S>,
) -> Result<Vec<SliceState<S>>> {
    (0..problem.time.len())
        .into_par_iter()
        .map(|n| SliceState::new(problem, lambda, pair.u.slice(n), pair.m.slice(n), n))
        .collect()
}

/// Forward equation residual; slice 0 is `m(·,0) - m_λ`.
pub fn residual_fp<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    pair: &SolutionPair<S>,
) -> Result<SpaceTimeField<S>> {
    check_pair(problem, pair)?;
    let states = slice_states(problem, lambda, pair)?;
    residual_fp_with(problem, lambda, pair, &states)
}

fn residual_fp_with<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    pair: &SolutionPair<S>,
    states: &[SliceState<S>],
) -> Result<SpaceTimeField<S>> {
    let dt = problem.time.dt();
    let slices = (0..problem.time.len())
        .into_par_iter()
        .map(|n| {
            let m = pair.m.slice(n);
            if n == 0 {
                return Ok(m.zip_map(&lambda.initial, |a, b| a - b));
            }
            let spatial = fp_spatial(problem, lambda, &states[n], m)?;
            let prev = pair.m.slice(n - 1);
            Field::from_values(
                problem.grid,
                (0..m.len())
                    .map(|i| (m.values()[i] - prev.values()[i]) / dt + spatial.values()[i])
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(problem.time, slices)
}

/// Backward equation residual; slice `N_t` is `u(·,T) - Ψ_λ`.
pub fn residual_hjb<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    pair: &SolutionPair<S>,
) -> Result<SpaceTimeField<S>> {
    check_pair(problem, pair)?;
    let states = slice_states(problem, lambda, pair)?;
    residual_hjb_with(problem, lambda, pair, &states)
}

fn residual_hjb_with<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    pair: &SolutionPair<S>,
    states: &[SliceState<S>],
) -> Result<SpaceTimeField<S>> {
    let dt = problem.time.dt();
    let last = problem.time.steps();
    let slices = (0..problem.time.len())
        .into_par_iter()
        .map(|n| {
            let u = pair.u.slice(n);
            if n == last {
                return Ok(u.zip_map(&lambda.terminal, |a, b| a - b));
            }
            let spatial = hjb_spatial(problem, lambda, &states[n], u, pair.m.slice(n))?;
            let next = pair.u.slice(n + 1);
            Field::from_values(
                problem.grid,
                (0..u.len())
                    .map(|i| (u.values()[i] - next.values()[i]) / dt + spatial.values()[i])
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(problem.time, slices)
}

/// The four rows of `M_λ[u, m]` in operator order: forward equation, backward
/// equation, initial condition, terminal condition.
///
/// `fp.slice(0)` coincides with `initial` and `hjb.slice(N_t)` with `terminal`;
/// the flat residual vector of the solver counts each once.
#[derive(Clone, Debug)]
pub struct FullResidual<S> {
    pub fp: SpaceTimeField<S>,
    pub hjb: SpaceTimeField<S>,
    pub initial: Field<S>,
    pub terminal: Field<S>,
    /// Whether `m < m_floor` occurred anywhere (only possible when not strict).
    pub floor_active: bool,
}

impl<S: Scalar> FullResidual<S> {
    pub fn sup_norm(&self) -> S {
        self.fp.sup_norm().max(self.hjb.sup_norm())
    }

    /// `[fp_n, hjb_n]` per slice, in time order.
    pub fn to_flat(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(2 * self.fp.slices().len() * self.initial.len());
        for (f, h) in self.fp.slices().iter().zip(self.hjb.slices()) {
            out.extend_from_slice(f.values());
            out.extend_from_slice(h.values());
        }
        out
    }
}

pub fn residual_full<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    pair: &SolutionPair<S>,
) -> Result<FullResidual<S>> {
    check_pair(problem, pair)?;
    let states = slice_states(problem, lambda, pair)?;
    let fp = residual_fp_with(problem, lambda, pair, &states)?;
    let hjb = residual_hjb_with(problem, lambda, pair, &states)?;
    let initial = fp.slice(0).clone();
    let terminal = hjb.slice(problem.time.steps()).clone();
    Ok(FullResidual { fp, hjb, initial, terminal, floor_active: states.iter().any(|s| s.floor_active) })
}

/// Flat unknown vector `[m^n, u^n]` per slice, in time order.
pub fn pair_to_flat<S: Scalar>(pair: &SolutionPair<S>) -> Vec<S> {
    let mut out = Vec::with_capacity(2 * pair.time().len() * pair.grid().len());
    for (m, u) in pair.m.slices().iter().zip(pair.u.slices()) {
        out.extend_from_slice(m.values());
        out.extend_from_slice(u.values());
    }
    out
}

pub fn pair_from_flat<S: Scalar>(grid: PeriodicGrid, time: TimeGrid<S>, data: &[S]) -> Result<SolutionPair<S>> {
    let len = grid.len();
    if data.len() != 2 * len * time.len() {
        return Err(MfgError::GridMismatch(format!("flat vector of length {}", data.len())));
    }
    let mut us = Vec::with_capacity(time.len());
    let mut ms = Vec::with_capacity(time.len());
    for chunk in data.chunks(2 * len) {
        ms.push(Field::from_values(grid, chunk[..len].to_vec())?);
        us.push(Field::from_values(grid, chunk[len..].to_vec())?);
    }
    SolutionPair::new(SpaceTimeField::new(time, us)?, SpaceTimeField::new(time, ms)?)
}
