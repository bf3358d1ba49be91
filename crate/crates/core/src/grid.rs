//! Periodic discretization of the flat torus in one or two dimensions, a
//! uniform time grid, Fourier-spectral differential operators and the exact
//! heat propagator.
//!
//! Nodes are `x_i = i / N` along every axis. In two dimensions the flat index
//! is `i0 + N * i1` (axis 0 varies fastest).

use std::fmt;
use std::sync::Arc;

use num_traits::Float;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{MfgError, Result};
use crate::scalar::Scalar;

/// Uniform periodic grid on `[0,1)^d`, `d ∈ {1, 2}`, with `N` (a power of two)
/// nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(MfgError::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(MfgError::InvalidGrid(format!("{n} points per axis is not a power of two >= 2")));
        }
        Ok(Self { dim, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    /// Total node count `N^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing<S: Scalar>(&self) -> S {
        S::one() / S::of_usize(self.n)
    }

    /// Quadrature weight `h^d` of every node.
    pub fn cell_volume<S: Scalar>(&self) -> S {
        S::one() / S::of_usize(self.len())
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        [idx % self.n, idx / self.n]
    }

    #[inline]
    pub fn flat_index(&self, ij: [usize; 2]) -> usize {
        (ij[0] % self.n) + self.n * (ij[1] % self.n)
    }

    /// Coordinates of node `idx`; the second entry is zero when `d = 1`.
    pub fn node<S: Scalar>(&self, idx: usize) -> [S; 2] {
        let h = self.spacing::<S>();
        let [i0, i1] = self.multi_index(idx);
        [S::of_usize(i0) * h, S::of_usize(i1) * h]
    }

    /// Signed wavenumber of FFT bin `i`; the Nyquist bin maps to `+N/2`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wave vector of flat spectral index `idx` (second entry zero when `d = 1`).
    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        let [i0, i1] = self.multi_index(idx);
        if self.dim == 1 {
            [self.wavenumber(i0), 0]
        } else {
            [self.wavenumber(i0), self.wavenumber(i1)]
        }
    }

    fn is_nyquist(&self, k: i64) -> bool {
        k == (self.n / 2) as i64
    }

    pub(crate) fn ensure_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self != other {
            return Err(MfgError::GridMismatch(format!("{self} vs {other}")));
        }
        Ok(())
    }
}

impl fmt::Display for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T^{} with {} points per axis", self.dim, self.n)
    }
}

/// Uniform grid `t_n = n * T / N_t` on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<S> {
    horizon: S,
    steps: usize,
}

impl<S: Scalar> TimeGrid<S> {
    pub fn new(horizon: S, steps: usize) -> Result<Self> {
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return Err(MfgError::InvalidGrid(format!("horizon {horizon} must be positive and finite")));
        }
        if steps == 0 {
            return Err(MfgError::InvalidGrid("time grid needs at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    #[inline]
    pub fn horizon(&self) -> S {
        self.horizon
    }

    #[inline]
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of time slices, `N_t + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dt(&self) -> S {
        self.horizon / S::of_usize(self.steps)
    }

    /// `t_n`, with the last node pinned to `T` exactly.
    pub fn time(&self, n: usize) -> S {
        if n == self.steps {
            self.horizon
        } else {
            S::of_usize(n) * self.dt()
        }
    }
}

/// Samples of a scalar function on a [`PeriodicGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<S> {
    grid: PeriodicGrid,
    values: Vec<S>,
}

impl<S: Scalar> Field<S> {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::constant(grid, S::zero())
    }

    pub fn constant(grid: PeriodicGrid, value: S) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn from_values(grid: PeriodicGrid, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(MfgError::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` at every node; `x[1]` is zero when `d = 1`.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn([S; 2]) -> S) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `h^d Σ f_i`: the rectangle rule, spectrally accurate on the torus.
    pub fn integrate(&self) -> S {
        self.grid.cell_volume::<S>() * self.values.iter().copied().sum::<S>()
    }

    pub fn check_finite(&self, context: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(MfgError::NonFinite { index, context }),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, values }
    }

    /// Maps `(flat index, value)`.
    pub fn map_indexed(&self, f: impl Fn(usize, S) -> S) -> Self {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        Self { grid: self.grid, values }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: S, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, &y) in self.values.iter_mut().zip(&other.values) {
            *x = *x + a * y;
        }
    }

    pub fn scaled(&self, a: S) -> Self {
        self.map(|v| a * v)
    }

    pub fn sup_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |acc, &v| acc.max(Float::abs(v)))
    }

    /// Discrete `L²` norm `(h^d Σ f_i²)^{1/2}`.
    pub fn l2_norm(&self) -> S {
        self.dot(self).sqrt()
    }

    /// Discrete `L²` inner product.
    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.cell_volume::<S>()
            * self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum::<S>()
    }

    pub fn min(&self) -> S {
        self.values.iter().copied().fold(S::infinity(), S::min)
    }

    pub fn max(&self) -> S {
        self.values.iter().copied().fold(S::neg_infinity(), S::max)
    }

    /// Index and value of the smallest entry.
    pub fn argmin(&self) -> (usize, S) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, S::infinity()), |best, (i, v)| if v < best.1 { (i, v) } else { best })
    }
}

/// `d` component fields on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<S> {
    components: Vec<Field<S>>,
}

impl<S: Scalar> VectorField<S> {
    pub fn new(components: Vec<Field<S>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| MfgError::InvalidArgument("vector field without components".into()))?;
        if components.len() != first.grid().dim() {
            return Err(MfgError::GridMismatch(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                first.grid().dim()
            )));
        }
        for c in &components[1..] {
            first.grid().ensure_same(c.grid())?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self { components: vec![Field::zeros(grid); grid.dim()] }
    }

    pub fn constant(grid: PeriodicGrid, value: [S; 2]) -> Self {
        Self { components: (0..grid.dim()).map(|i| Field::constant(grid, value[i])).collect() }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        self.components[0].grid()
    }

    #[inline]
    pub fn components(&self) -> &[Field<S>] {
        &self.components
    }

    #[inline]
    pub fn components_mut(&mut self) -> &mut [Field<S>] {
        &mut self.components
    }

    #[inline]
    pub fn component(&self, axis: usize) -> &Field<S> {
        &self.components[axis]
    }

    /// Vector value at node `idx` (second entry zero when `d = 1`).
    #[inline]
    pub fn at(&self, idx: usize) -> [S; 2] {
        let mut out = [S::zero(); 2];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.values()[idx];
        }
        out
    }

    pub fn scaled(&self, a: S) -> Self {
        Self { components: self.components.iter().map(|c| c.scaled(a)).collect() }
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> Field<S> {
        let grid = *self.grid();
        let values = (0..grid.len())
            .map(|i| self.components.iter().map(|c| c.values()[i] * c.values()[i]).sum::<S>().sqrt())
            .collect();
        Field { grid, values }
    }

    /// Discrete `L²` pairing `∫ F · G`.
    pub fn dot(&self, other: &Self) -> S {
        self.components.iter().zip(&other.components).map(|(a, b)| a.dot(b)).sum()
    }

    pub fn sup_norm(&self) -> S {
        self.magnitude().sup_norm()
    }
}

/// One [`Field`] per node of a [`TimeGrid`], all on the same spatial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField<S> {
    time: TimeGrid<S>,
    slices: Vec<Field<S>>,
}

impl<S: Scalar> SpaceTimeField<S> {
    pub fn new(time: TimeGrid<S>, slices: Vec<Field<S>>) -> Result<Self> {
        if slices.len() != time.len() {
            return Err(MfgError::GridMismatch(format!(
                "{} slices for {} time nodes",
                slices.len(),
                time.len()
            )));
        }
        for s in &slices[1..] {
            slices[0].grid().ensure_same(s.grid())?;
        }
        Ok(Self { time, slices })
    }

    pub fn constant(grid: PeriodicGrid, time: TimeGrid<S>, value: S) -> Self {
        Self { time, slices: vec![Field::constant(grid, value); time.len()] }
    }

    pub fn zeros(grid: PeriodicGrid, time: TimeGrid<S>) -> Self {
        Self::constant(grid, time, S::zero())
    }

    /// Samples `f(x, t)` at every node of the space-time grid.
    pub fn from_fn(grid: PeriodicGrid, time: TimeGrid<S>, f: impl Fn([S; 2], S) -> S) -> Self {
        let slices = (0..time.len())
            .map(|n| {
                let t = time.time(n);
                Field::from_fn(grid, |x| f(x, t))
            })
            .collect();
        Self { time, slices }
    }

    #[inline]
    pub fn time(&self) -> &TimeGrid<S> {
        &self.time
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        self.slices[0].grid()
    }

    #[inline]
    pub fn slices(&self) -> &[Field<S>] {
        &self.slices
    }

    #[inline]
    pub fn slices_mut(&mut self) -> &mut [Field<S>] {
        &mut self.slices
    }

    #[inline]
    pub fn slice(&self, n: usize) -> &Field<S> {
        &self.slices[n]
    }

    #[inline]
    pub fn slice_mut(&mut self, n: usize) -> &mut Field<S> {
        &mut self.slices[n]
    }

    pub fn sup_norm(&self) -> S {
        self.slices.iter().fold(S::zero(), |acc, s| acc.max(s.sup_norm()))
    }

    pub fn min(&self) -> S {
        self.slices.iter().fold(S::infinity(), |acc, s| acc.min(s.min()))
    }

    pub fn max(&self) -> S {
        self.slices.iter().fold(S::neg_infinity(), |acc, s| acc.max(s.max()))
    }

    pub fn axpy(&mut self, a: S, other: &Self) {
        for (x, y) in self.slices.iter_mut().zip(&other.slices) {
            x.axpy(a, y);
        }
    }

    pub fn map(&self, f: impl Fn(S) -> S + Copy) -> Self {
        Self { time: self.time, slices: self.slices.iter().map(|s| s.map(f)).collect() }
    }

    /// Space-time `L²` norm with the rectangle rule in time.
    pub fn l2_norm(&self) -> S {
        let dt = self.time.dt();
        self.slices[1..].iter().map(|s| dt * s.dot(s)).sum::<S>().sqrt()
    }

    /// All slices concatenated in time order.
    pub fn flatten(&self) -> Vec<S> {
        self.slices.iter().flat_map(|s| s.values().iter().copied()).collect()
    }

    pub fn from_flat(grid: PeriodicGrid, time: TimeGrid<S>, data: &[S]) -> Result<Self> {
        let len = grid.len();
        if data.len() != len * time.len() {
            return Err(MfgError::GridMismatch(format!(
                "{} values for {} x {} space-time nodes",
                data.len(),
                time.len(),
                len
            )));
        }
        let slices = data.chunks(len).map(|c| Field { grid, values: c.to_vec() }).collect();
        Ok(Self { time, slices })
    }
}

/// FFT plans and Fourier multipliers for one [`PeriodicGrid`].
///
/// First derivatives zero the Nyquist bin so that `divergence` is exactly the
/// negative adjoint of `gradient`. The Laplacian keeps the full symbol
/// `-4π²|k|²`, so it coincides with `divergence ∘ gradient` on every mode
/// below Nyquist.
#[derive(Clone)]
pub struct Spectral<S: Scalar> {
    grid: PeriodicGrid,
    forward: Arc<dyn Fft<S>>,
    inverse: Arc<dyn Fft<S>>,
}

impl<S: Scalar> fmt::Debug for Spectral<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl<S: Scalar> Spectral<S> {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_dim();
        Self { grid, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn transform(&self, data: &mut [Complex<S>], fft: &Arc<dyn Fft<S>>) {
        let n = self.grid.points_per_dim();
        // rows (axis 0) are contiguous
        fft.process(data);
        if self.grid.dim() == 2 {
            let mut column = vec![Complex::new(S::zero(), S::zero()); n];
            for i0 in 0..n {
                for (i1, c) in column.iter_mut().enumerate() {
                    *c = data[i0 + n * i1];
                }
                fft.process(&mut column);
                for (i1, c) in column.iter().enumerate() {
                    data[i0 + n * i1] = *c;
                }
            }
        }
    }

    /// Unnormalized DFT coefficients of `f`.
    pub fn to_spectrum(&self, f: &Field<S>) -> Result<Vec<Complex<S>>> {
        self.grid.ensure_same(f.grid())?;
        let mut data: Vec<Complex<S>> = f.values().iter().map(|&v| Complex::new(v, S::zero())).collect();
        self.transform(&mut data, &self.forward);
        Ok(data)
    }

    /// Inverse of [`Spectral::to_spectrum`], keeping the real part.
    pub fn from_spectrum(&self, mut spectrum: Vec<Complex<S>>) -> Field<S> {
        self.transform(&mut spectrum, &self.inverse);
        let scale = S::one() / S::of_usize(self.grid.len());
        Field { grid: self.grid, values: spectrum.iter().map(|c| c.re * scale).collect() }
    }

    fn apply_symbol(&self, f: &Field<S>, symbol: impl Fn([i64; 2]) -> Complex<S>) -> Result<Field<S>> {
        let mut spec = self.to_spectrum(f)?;
        for (idx, c) in spec.iter_mut().enumerate() {
            *c = *c * symbol(self.grid.wavevector(idx));
        }
        Ok(self.from_spectrum(spec))
    }

    fn derivative_symbol(&self, k: [i64; 2], axis: usize) -> Complex<S> {
        let ka = k[axis];
        if self.grid.is_nyquist(ka) {
            Complex::new(S::zero(), S::zero())
        } else {
            Complex::new(S::zero(), S::lit(2.0) * S::PI() * S::lit(ka as f64))
        }
    }

    /// `∂f/∂x_axis`.
    pub fn derivative(&self, f: &Field<S>, axis: usize) -> Result<Field<S>> {
        if axis >= self.grid.dim() {
            return Err(MfgError::InvalidArgument(format!("axis {axis} on a {}-d grid", self.grid.dim())));
        }
        f.check_finite("derivative input")?;
        self.apply_symbol(f, |k| self.derivative_symbol(k, axis))
    }

    pub fn gradient(&self, f: &Field<S>) -> Result<VectorField<S>> {
        f.check_finite("gradient input")?;
        let mut spec = self.to_spectrum(f)?;
        let components = (0..self.grid.dim())
            .map(|axis| {
                let s: Vec<_> = spec
                    .iter()
                    .enumerate()
                    .map(|(idx, &c)| c * self.derivative_symbol(self.grid.wavevector(idx), axis))
                    .collect();
                self.from_spectrum(s)
            })
            .collect();
        spec.clear();
        Ok(VectorField { components })
    }

    pub fn divergence(&self, field: &VectorField<S>) -> Result<Field<S>> {
        self.grid.ensure_same(field.grid())?;
        let mut acc = vec![Complex::new(S::zero(), S::zero()); self.grid.len()];
        for (axis, comp) in field.components().iter().enumerate() {
            comp.check_finite("divergence input")?;
            let spec = self.to_spectrum(comp)?;
            for (idx, (a, c)) in acc.iter_mut().zip(spec).enumerate() {
                *a = *a + c * self.derivative_symbol(self.grid.wavevector(idx), axis);
            }
        }
        Ok(self.from_spectrum(acc))
    }

    pub fn laplacian(&self, f: &Field<S>) -> Result<Field<S>> {
        f.check_finite("laplacian input")?;
        let four_pi2 = S::lit(4.0) * S::PI() * S::PI();
        self.apply_symbol(f, |k| {
            let k2 = S::lit((k[0] * k[0] + k[1] * k[1]) as f64);
            Complex::new(-four_pi2 * k2, S::zero())
        })
    }

    /// Exact solution operator of `ρ_t = Δρ` over a time `dt`.
    pub fn heat_step(&self, f: &Field<S>, dt: S) -> Result<Field<S>> {
        if !(dt >= S::zero()) {
            return Err(MfgError::InvalidArgument(format!("negative heat step {dt}")));
        }
        f.check_finite("heat_step input")?;
        let four_pi2 = S::lit(4.0) * S::PI() * S::PI();
        self.apply_symbol(f, |k| {
            let k2 = S::lit((k[0] * k[0] + k[1] * k[1]) as f64);
            Complex::new((-four_pi2 * k2 * dt).exp(), S::zero())
        })
    }

    /// Solves `(shift - Δ) x = f` for `shift > 0`.
    pub fn resolvent(&self, f: &Field<S>, shift: S) -> Result<Field<S>> {
        if !(shift > S::zero()) {
            return Err(MfgError::InvalidArgument(format!("resolvent shift {shift} must be positive")));
        }
        let four_pi2 = S::lit(4.0) * S::PI() * S::PI();
        self.apply_symbol(f, |k| {
            let k2 = S::lit((k[0] * k[0] + k[1] * k[1]) as f64);
            Complex::new(S::one() / (shift + four_pi2 * k2), S::zero())
        })
    }

    /// `∫_τ^T ‖ρ(·,t)‖_{L^q} dt` for the heat flow `ρ` started from `φ`.
    ///
    /// The time integral uses Gauss–Legendre panels graded towards `τ`, where
    /// the integrand is least regular when `τ = 0`.
    pub fn heat_smoothing_norm(&self, phi: &Field<S>, tau: S, horizon: S, q: S) -> Result<S> {
        // d <= 2: every q > 1 is admissible
        if !(q > S::one()) || !q.is_finite() {
            return Err(MfgError::InvalidArgument(format!("exponent q = {q} must exceed 1")));
        }
        if !(tau >= S::zero()) || !(horizon > tau) {
            return Err(MfgError::InvalidArgument(format!("need 0 <= tau < T, got tau={tau}, T={horizon}")));
        }
        phi.check_finite("heat_smoothing_norm input")?;
        let tol = S::lit(1e-12);
        if let Some(i) = phi.values().iter().position(|&v| v < -tol) {
            return Err(MfgError::InvalidArgument(format!("negative initial datum at node {i}")));
        }
        if phi.integrate() > S::one() + tol {
            return Err(MfgError::InvalidArgument(format!("initial mass {} exceeds 1", phi.integrate())));
        }

        let spectrum = self.to_spectrum(phi)?;
        let four_pi2 = S::lit(4.0) * S::PI() * S::PI();
        let inner = |t: S| -> S {
            let s: Vec<_> = spectrum
                .iter()
                .enumerate()
                .map(|(idx, &c)| {
                    let k = self.grid.wavevector(idx);
                    let k2 = S::lit((k[0] * k[0] + k[1] * k[1]) as f64);
                    c * (-four_pi2 * k2 * t).exp()
                })
                .collect();
            let rho = self.from_spectrum(s);
            // spectral undershoot in far tails is clipped, not raised to q
            rho.map(|v| v.max(S::zero()).powf(q)).integrate().powf(q.recip())
        };

        const PANELS: usize = 32;
        let (nodes, weights) = gauss_legendre(8);
        let span = horizon - tau;
        let edge = |j: usize| tau + span * S::lit((j as f64 / PANELS as f64).powi(3));
        let mut total = S::zero();
        for j in 0..PANELS {
            let (a, b) = (edge(j), edge(j + 1));
            let half = (b - a) / S::lit(2.0);
            let mid = (a + b) / S::lit(2.0);
            for (&x, &w) in nodes.iter().zip(&weights) {
                total = total + S::lit(w) * half * inner(mid + half * S::lit(x));
            }
        }
        Ok(total)
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
