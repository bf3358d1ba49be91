//! Exact Jacobian `L_λ` of the discrete residual at a base pair, applied
//! matrix-free or assembled into a block-tridiagonal matrix, plus the linear
//! solvers used by Newton.
//!
//! Unknowns and rows are ordered slice by slice as `[f^n, v^n]` and
//! `[fp_n, hjb_n]`, which matches [`crate::system::pair_to_flat`] and
//! [`crate::system::FullResidual::to_flat`].

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{MfgError, Result};
use crate::grid::{Field, PeriodicGrid, SpaceTimeField, TimeGrid, VectorField};
use crate::scalar::Scalar;
use crate::system::{LambdaData, MfgProblem, SliceState, SolutionPair};

/// A direction `(v, f)`: `v` perturbs `u`, `f` perturbs `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation<S> {
    pub v: SpaceTimeField<S>,
    pub f: SpaceTimeField<S>,
}

fn interleave<S: Scalar>(first: &SpaceTimeField<S>, second: &SpaceTimeField<S>) -> Vec<S> {
    let mut out = Vec::with_capacity(2 * first.slices().len() * first.grid().len());
    for (a, b) in first.slices().iter().zip(second.slices()) {
        out.extend_from_slice(a.values());
        out.extend_from_slice(b.values());
    }
    out
}

fn split<S: Scalar>(
    grid: PeriodicGrid,
    time: TimeGrid<S>,
    data: &[S],
) -> Result<(SpaceTimeField<S>, SpaceTimeField<S>)> {
    let len = grid.len();
    if data.len() != 2 * len * time.len() {
        return Err(MfgError::GridMismatch(format!("flat vector of length {}", data.len())));
    }
    let mut first = Vec::with_capacity(time.len());
    let mut second = Vec::with_capacity(time.len());
    for chunk in data.chunks(2 * len) {
        first.push(Field::from_values(grid, chunk[..len].to_vec())?);
        second.push(Field::from_values(grid, chunk[len..].to_vec())?);
    }
    Ok((SpaceTimeField::new(time, first)?, SpaceTimeField::new(time, second)?))
}

impl<S: Scalar> Perturbation<S> {
    pub fn new(v: SpaceTimeField<S>, f: SpaceTimeField<S>) -> Result<Self> {
        v.grid().ensure_same(f.grid())?;
        if v.time() != f.time() {
            return Err(MfgError::GridMismatch("v and f on different time grids".into()));
        }
        Ok(Self { v, f })
    }

    pub fn zeros(grid: PeriodicGrid, time: TimeGrid<S>) -> Self {
        Self { v: SpaceTimeField::zeros(grid, time), f: SpaceTimeField::zeros(grid, time) }
    }

    /// `[f^n, v^n]` per slice.
    pub fn to_flat(&self) -> Vec<S> {
        interleave(&self.f, &self.v)
    }

    pub fn from_flat(grid: PeriodicGrid, time: TimeGrid<S>, data: &[S]) -> Result<Self> {
        let (f, v) = split(grid, time, data)?;
        Ok(Self { v, f })
    }

    pub fn sup_norm(&self) -> S {
        self.v.sup_norm().max(self.f.sup_norm())
    }

    /// `max_n (‖f^n‖² + ‖v^n‖²)^{1/2}` in discrete `L²`.
    pub fn max_l2_in_time(&self) -> S {
        self.f
            .slices()
            .iter()
            .zip(self.v.slices())
            .map(|(f, v)| (f.dot(f) + v.dot(v)).sqrt())
            .fold(S::zero(), |a, b| a.max(b))
    }
}

/// Right-hand side `[h, g, A, B]` of `L_λ(v, f) = W`.
///
/// `h` drives the forward rows `n ≥ 1` and `g` the backward rows `n < N_t`;
/// `h.slice(0)` and `g.slice(N_t)` are ignored in favour of `a` and `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedRhs<S> {
    pub h: SpaceTimeField<S>,
    pub g: SpaceTimeField<S>,
    pub a: Field<S>,
    pub b: Field<S>,
}

impl<S: Scalar> LinearizedRhs<S> {
    pub fn zeros(grid: PeriodicGrid, time: TimeGrid<S>) -> Self {
        Self {
            h: SpaceTimeField::zeros(grid, time),
            g: SpaceTimeField::zeros(grid, time),
            a: Field::zeros(grid),
            b: Field::zeros(grid),
        }
    }

    pub fn to_flat(&self) -> Vec<S> {
        let last = self.h.time().steps();
        let mut out = interleave(&self.h, &self.g);
        let len = self.a.len();
        out[..len].copy_from_slice(self.a.values());
        let tail = 2 * len * last + len;
        out[tail..tail + len].copy_from_slice(self.b.values());
        out
    }

    pub fn from_flat(grid: PeriodicGrid, time: TimeGrid<S>, data: &[S]) -> Result<Self> {
        let (h, g) = split(grid, time, data)?;
        let a = h.slice(0).clone();
        let b = g.slice(time.steps()).clone();
        Ok(Self { h, g, a, b })
    }

    /// `‖h‖ + ‖g‖ + ‖A‖ + ‖B‖` with space-time `L²` norms on the used rows.
    pub fn norm(&self) -> S {
        let dt = self.h.time().dt();
        let last = self.h.time().steps();
        let hs: S = self.h.slices()[1..].iter().map(|s| s.dot(s)).sum::<S>() * dt;
        let gs: S = self.g.slices()[..last].iter().map(|s| s.dot(s)).sum::<S>() * dt;
        hs.sqrt() + gs.sqrt() + self.a.l2_norm() + self.b.l2_norm()
    }
}

/// Pointwise coefficients of the linearization on one slice.
#[derive(Clone, Debug)]
pub struct SliceCoefficients<S> {
    pub state: SliceState<S>,
    pub m: Vec<S>,
    /// `D_pH + b - α D²_{pp}H·Q`, multiplies `f` in the flux
    pub flux_f: Vec<Vec<S>>,
    /// `m^{1-α} D²_{pp}H`, multiplies `Dv` in the flux
    pub flux_v: Vec<[[S; 2]; 2]>,
    /// `α m^{α-1} (H - Q·D_pH) - ∂_zV`
    pub hjb_f: Vec<S>,
    /// `D_pH + b`, multiplies `Dv`
    pub hjb_v: Vec<Vec<S>>,
}

impl<S: Scalar> SliceCoefficients<S> {
    fn new(problem: &MfgProblem<S>, lambda: &LambdaData<S>, state: SliceState<S>, m: &Field<S>) -> Self {
        let dim = problem.grid().dim();
        let len = m.len();
        let mut flux_f = vec![Vec::with_capacity(len); dim];
        let mut hjb_v = vec![Vec::with_capacity(len); dim];
        let mut flux_v = Vec::with_capacity(len);
        let mut hjb_f = Vec::with_capacity(len);
        for i in 0..len {
            let mi = m.values()[i];
            let ma = state.m_alpha[i];
            let dma = state.dm_alpha[i];
            let q = state.q[i];
            let p = state.dp_h[i];
            let hs = state.hess[i];
            let b = lambda.drift.at(i);
            // δQ = (Dv - Q dmα f) / mα
            let cf = [-q[0] * dma / ma, -q[1] * dma / ma];
            let ratio = mi / ma;
            for a in 0..dim {
                let hc = (0..dim).map(|c| hs[a][c] * cf[c]).sum::<S>();
                flux_f[a].push(p[a] + b[a] + mi * hc);
                hjb_v[a].push(p[a] + b[a]);
            }
            flux_v.push([
                [ratio * hs[0][0], ratio * hs[0][1]],
                [ratio * hs[1][0], ratio * hs[1][1]],
            ]);
            let pq = (0..dim).map(|a| p[a] * q[a]).sum::<S>();
            hjb_f.push(dma * (state.h[i] - pq) - lambda.potential_dz(mi));
        }
        Self { state, m: m.values().to_vec(), flux_f, flux_v, hjb_f, hjb_v }
    }
}

/// `L_λ` frozen at one base pair.
pub struct Linearization<'a, S: Scalar> {
    problem: &'a MfgProblem<S>,
    lambda: &'a LambdaData<S>,
    slices: Vec<SliceCoefficients<S>>,
}

/// The four rows of `L_λ(v, f)`, in the layout of [`LinearizedRhs`].
pub type LinearizedImage<S> = LinearizedRhs<S>;

impl<'a, S: Scalar> Linearization<'a, S> {
    pub fn new(problem: &'a MfgProblem<S>, lambda: &'a LambdaData<S>, base: &SolutionPair<S>) -> Result<Self> {
        problem.grid().ensure_same(base.grid())?;
        if base.time() != problem.time() {
            return Err(MfgError::GridMismatch("base pair time grid differs from the problem's".into()));
        }
        let slices = (0..problem.time().len())
            .into_par_iter()
            .map(|n| {
                let m = base.m.slice(n);
                let st = SliceState::new(problem, lambda, base.u.slice(n), m, n)?;
                Ok(SliceCoefficients::new(problem, lambda, st, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { problem, lambda, slices })
    }

    pub fn problem(&self) -> &MfgProblem<S> {
        self.problem
    }

    pub fn lambda(&self) -> &LambdaData<S> {
        self.lambda
    }

    pub fn slices(&self) -> &[SliceCoefficients<S>] {
        &self.slices
    }

    /// Number of unknowns `2 (N_t+1) N^d`.
    pub fn unknowns(&self) -> usize {
        2 * self.problem.time().len() * self.problem.grid().len()
    }

    /// Spatial part of the forward row: `-Δf - div(flux_f f + flux_v Dv)`.
    pub fn fp_spatial(&self, n: usize, f: &Field<S>, dv: &VectorField<S>) -> Result<Field<S>> {
        let sp = self.problem.spectral();
        let c = &self.slices[n];
        let grid = *self.problem.grid();
        let dim = grid.dim();
        let flux = (0..dim)
            .map(|a| {
                let vals = (0..f.len())
                    .map(|i| {
                        let g = dv.at(i);
                        let cross = (0..dim).map(|b| c.flux_v[i][a][b] * g[b]).sum::<S>();
                        c.flux_f[a][i] * f.values()[i] + cross
                    })
                    .collect();
                Field::from_values(grid, vals)
            })
            .collect::<Result<Vec<_>>>()?;
        let div = sp.divergence(&VectorField::new(flux)?)?;
        let lap = sp.laplacian(f)?;
        Ok(lap.zip_map(&div, |l, d| -l - d))
    }

    /// Spatial part of the backward row: `-Δv + hjb_f f + hjb_v·Dv`.
    pub fn hjb_spatial(&self, n: usize, f: &Field<S>, v: &Field<S>, dv: &VectorField<S>) -> Result<Field<S>> {
        let lap = self.problem.spectral().laplacian(v)?;
        let c = &self.slices[n];
        let dim = self.problem.grid().dim();
        let vals = (0..v.len())
            .map(|i| {
                let g = dv.at(i);
                let tr = (0..dim).map(|a| c.hjb_v[a][i] * g[a]).sum::<S>();
                -lap.values()[i] + c.hjb_f[i] * f.values()[i] + tr
            })
            .collect();
        Field::from_values(*self.problem.grid(), vals)
    }

    pub fn apply(&self, dir: &Perturbation<S>) -> Result<LinearizedImage<S>> {
        let time = *self.problem.time();
        let grid = *self.problem.grid();
        grid.ensure_same(dir.v.grid())?;
        if dir.v.time() != &time || dir.f.time() != &time {
            return Err(MfgError::GridMismatch("direction time grid differs from the problem's".into()));
        }
        let dt = time.dt();
        let last = time.steps();
        let rows = (0..time.len())
            .into_par_iter()
            .map(|n| {
                let f = dir.f.slice(n);
                let v = dir.v.slice(n);
                let dv = self.problem.spectral().gradient(v)?;
                let fp = if n == 0 {
                    f.clone()
                } else {
                    let s = self.fp_spatial(n, f, &dv)?;
                    let prev = dir.f.slice(n - 1);
                    Field::from_values(
                        grid,
                        (0..f.len()).map(|i| (f.values()[i] - prev.values()[i]) / dt + s.values()[i]).collect(),
                    )?
                };
                let hjb = if n == last {
                    v.clone()
                } else {
                    let s = self.hjb_spatial(n, f, v, &dv)?;
                    let next = dir.v.slice(n + 1);
                    Field::from_values(
                        grid,
                        (0..v.len()).map(|i| (v.values()[i] - next.values()[i]) / dt + s.values()[i]).collect(),
                    )?
                };
                Ok((fp, hjb))
            })
            .collect::<Result<Vec<_>>>()?;
        let (h, g): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        let a = h[0].clone();
        let b = g[last].clone();
        Ok(LinearizedRhs { h: SpaceTimeField::new(time, h)?, g: SpaceTimeField::new(time, g)?, a, b })
    }

    pub fn apply_flat(&self, x: &[S]) -> Result<Vec<S>> {
        let dir = Perturbation::from_flat(*self.problem.grid(), *self.problem.time(), x)?;
        Ok(self.apply(&dir)?.to_flat())
    }

    /// The three summands of the uniqueness energy integrand on slice `n`:
    ///
    /// ```text
    /// α m^{α-1} f² (Q·D_pH - H - (α/4) Q·D²H·Q)
    /// m^{α-1} wᵀ D²H w,  w = m^{1-α} Dv - (α/2) f Q
    /// ∂_zV f²
    /// ```
    pub fn uniqueness_integrand(&self, n: usize, f: &Field<S>, v: &Field<S>) -> Result<[Field<S>; 3]> {
        let grid = *self.problem.grid();
        let dim = grid.dim();
        let alpha = self.problem.alpha();
        let c = &self.slices[n];
        let st = &c.state;
        let dv = self.problem.spectral().gradient(v)?;
        let quarter = S::lit(0.25);
        let half = S::lit(0.5);
        let mut first = Vec::with_capacity(f.len());
        let mut second = Vec::with_capacity(f.len());
        let mut third = Vec::with_capacity(f.len());
        for i in 0..f.len() {
            let fi = f.values()[i];
            let q = st.q[i];
            let hs = st.hess[i];
            let quad = |w: [S; 2]| {
                (0..dim).map(|a| (0..dim).map(|b| w[a] * hs[a][b] * w[b]).sum::<S>()).sum::<S>()
            };
            let pq = (0..dim).map(|a| st.dp_h[i][a] * q[a]).sum::<S>();
            first.push(st.dm_alpha[i] * fi * fi * (pq - st.h[i] - alpha * quarter * quad(q)));
            let ratio = c.m[i] / st.m_alpha[i];
            let g = dv.at(i);
            let w = [ratio * g[0] - alpha * half * fi * q[0], ratio * g[1] - alpha * half * fi * q[1]];
            second.push(quad(w) / ratio);
            third.push(self.lambda.potential_dz(c.m[i]) * fi * fi);
        }
        Ok([
            Field::from_values(grid, first)?,
            Field::from_values(grid, second)?,
            Field::from_values(grid, third)?,
        ])
    }
}

/// `L_λ(dir)` at `base`.
pub fn apply_l<S: Scalar>(
    problem: &MfgProblem<S>,
    lambda: &LambdaData<S>,
    base: &SolutionPair<S>,
    dir: &Perturbation<S>,
) -> Result<LinearizedImage<S>> {
    Linearization::new(problem, lambda, base)?.apply(dir)
}

/// Block-tridiagonal matrix of `L_λ` with dense `2N^d × 2N^d` diagonal
/// blocks. The off-diagonal blocks are `-I/dt` on the `f` (below) and `v`
/// (above) unknowns and are not stored.
#[derive(Clone, Debug)]
pub struct BlockTridiagonal {
    block: usize,
    dt: f64,
    diag: Vec<DMatrix<f64>>,
}

/// Dense spectral differentiation matrices of one grid.
struct DiffMatrices {
    grad: Vec<DMatrix<f64>>,
    lap: DMatrix<f64>,
}

impl DiffMatrices {
    fn new(problem: &MfgProblem<f64>) -> Result<Self> {
        let grid = *problem.grid();
        let len = grid.len();
        let sp = problem.spectral();
        let mut grad = vec![DMatrix::zeros(len, len); grid.dim()];
        let mut lap = DMatrix::zeros(len, len);
        for j in 0..len {
            let mut e = Field::zeros(grid);
            e.values_mut()[j] = 1.0;
            let g = sp.gradient(&e)?;
            for (a, m) in grad.iter_mut().enumerate() {
                m.set_column(j, &DVector::from_column_slice(g.component(a).values()));
            }
            lap.set_column(j, &DVector::from_column_slice(sp.laplacian(&e)?.values()));
        }
        Ok(Self { grad, lap })
    }
}

/// Bytes needed by [`BlockTridiagonal`] plus its block-Thomas factorization.
pub fn direct_solve_bytes(grid: &PeriodicGrid, time: &TimeGrid<f64>) -> usize {
    let block = 2 * grid.len();
    2 * time.len() * block * block * std::mem::size_of::<f64>()
}

impl Linearization<'_, f64> {
    /// Explicit matrix; fails with [`MfgError::BudgetExceeded`] when the
    /// dense blocks and their factors would need more than `budget_bytes`.
    pub fn assemble(&self, budget_bytes: usize) -> Result<BlockTridiagonal> {
        let grid = *self.problem.grid();
        let time = *self.problem.time();
        if direct_solve_bytes(&grid, &time) > budget_bytes {
            return Err(MfgError::BudgetExceeded { unknowns: self.unknowns() });
        }
        let len = grid.len();
        let dim = grid.dim();
        let dt = time.dt();
        let last = time.steps();
        let d = DiffMatrices::new(self.problem)?;
        let eye = DMatrix::<f64>::identity(len, len);
        let heat = &eye / dt - &d.lap;
        let diag = (0..time.len())
            .into_par_iter()
            .map(|n| {
                let c = &self.slices[n];
                let mut blk = DMatrix::<f64>::zeros(2 * len, 2 * len);
                if n == 0 {
                    blk.view_mut((0, 0), (len, len)).copy_from(&eye);
                } else {
                    let mut ff = heat.clone();
                    let mut fv = DMatrix::<f64>::zeros(len, len);
                    for a in 0..dim {
                        let mut scaled = d.grad[a].clone();
                        for (j, mut col) in scaled.column_iter_mut().enumerate() {
                            col *= c.flux_f[a][j];
                        }
                        ff -= scaled;
                        for b in 0..dim {
                            let mut inner = d.grad[b].clone();
                            for (i, mut row) in inner.row_iter_mut().enumerate() {
                                row *= c.flux_v[i][a][b];
                            }
                            fv -= &d.grad[a] * inner;
                        }
                    }
                    blk.view_mut((0, 0), (len, len)).copy_from(&ff);
                    blk.view_mut((0, len), (len, len)).copy_from(&fv);
                }
                if n == last {
                    blk.view_mut((len, len), (len, len)).copy_from(&eye);
                } else {
                    let mut vv = heat.clone();
                    for a in 0..dim {
                        let mut scaled = d.grad[a].clone();
                        for (i, mut row) in scaled.row_iter_mut().enumerate() {
                            row *= c.hjb_v[a][i];
                        }
                        vv += scaled;
                    }
                    blk.view_mut((len, len), (len, len)).copy_from(&vv);
                    for i in 0..len {
                        blk[(len + i, i)] = c.hjb_f[i];
                    }
                }
                blk
            })
            .collect();
        Ok(BlockTridiagonal { block: 2 * len, dt, diag })
    }
}

impl BlockTridiagonal {
    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn slices(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.block * self.diag.len()
    }

    pub fn diagonal_block(&self, n: usize) -> &DMatrix<f64> {
        &self.diag[n]
    }

    /// Entry `(row, col)` of the full matrix.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let (bn, br) = (row / self.block, row % self.block);
        let (cn, bc) = (col / self.block, col % self.block);
        let half = self.block / 2;
        if bn == cn {
            self.diag[bn][(br, bc)]
        } else if bc == br && ((cn + 1 == bn && br < half) || (bn + 1 == cn && br >= half)) {
            -1.0 / self.dt
        } else {
            0.0
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let b = self.block;
        let half = b / 2;
        let last = self.diag.len() - 1;
        let mut out = vec![0.0; x.len()];
        out.par_chunks_mut(b).enumerate().for_each(|(n, y)| {
            let xn = DVector::from_column_slice(&x[n * b..(n + 1) * b]);
            let prod = &self.diag[n] * xn;
            y.copy_from_slice(prod.as_slice());
            if n > 0 {
                for i in 0..half {
                    y[i] -= x[(n - 1) * b + i] / self.dt;
                }
            }
            if n < last {
                for i in half..b {
                    y[i] -= x[(n + 1) * b + i] / self.dt;
                }
            }
        });
        out
    }

    /// Largest number of structural nonzeros in a row.
    pub fn max_row_nnz(&self) -> usize {
        let b = self.block;
        let half = b / 2;
        let last = self.diag.len() - 1;
        let mut best = 0;
        for (n, blk) in self.diag.iter().enumerate() {
            for i in 0..b {
                let mut nnz = blk.row(i).iter().filter(|v| **v != 0.0).count();
                if (i < half && n > 0) || (i >= half && n < last) {
                    nnz += 1;
                }
                best = best.max(nnz);
            }
        }
        best
    }

    /// Block-Thomas factorization (block LU without inter-block pivoting).
    pub fn factor(&self) -> Result<BlockThomas> {
        let b = self.block;
        let half = b / 2;
        let inv_dt2 = 1.0 / (self.dt * self.dt);
        let mut lus = Vec::with_capacity(self.diag.len());
        let mut current = self.diag[0].clone();
        for n in 0..self.diag.len() {
            let lu = current.clone().lu();
            if !lu.is_invertible() {
                return Err(MfgError::Singular { smallest_singular_value: 0.0 });
            }
            if n + 1 < self.diag.len() {
                // Schur update touches only the (f-row, v-column) block of the next slice
                let mut rhs = DMatrix::<f64>::zeros(b, half);
                for j in 0..half {
                    rhs[(half + j, j)] = 1.0;
                }
                let z = lu.solve(&rhs).ok_or(MfgError::Singular { smallest_singular_value: 0.0 })?;
                let mut next = self.diag[n + 1].clone();
                for i in 0..half {
                    for j in 0..half {
                        next[(i, half + j)] -= z[(i, j)] * inv_dt2;
                    }
                }
                current = next;
            }
            lus.push(lu);
        }
        Ok(BlockThomas { block: b, dt: self.dt, lus })
    }
}

/// Factorization produced by [`BlockTridiagonal::factor`].
pub struct BlockThomas {
    block: usize,
    dt: f64,
    lus: Vec<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl BlockThomas {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = self.block;
        let half = b / 2;
        let slices = self.lus.len();
        if rhs.len() != b * slices {
            return Err(MfgError::GridMismatch(format!("rhs of length {}", rhs.len())));
        }
        let singular = || MfgError::Singular { smallest_singular_value: 0.0 };
        let mut reduced: Vec<DVector<f64>> = Vec::with_capacity(slices);
        for n in 0..slices {
            let mut r = DVector::from_column_slice(&rhs[n * b..(n + 1) * b]);
            if n > 0 {
                let y = self.lus[n - 1].solve(&reduced[n - 1]).ok_or_else(singular)?;
                for i in 0..half {
                    r[i] += y[i] / self.dt;
                }
            }
            reduced.push(r);
        }
        let mut x = vec![0.0; b * slices];
        for n in (0..slices).rev() {
            let mut r = reduced[n].clone();
            if n + 1 < slices {
                for i in half..b {
                    r[i] += x[(n + 1) * b + i] / self.dt;
                }
            }
            let xn = self.lus[n].solve(&r).ok_or_else(singular)?;
            x[n * b..(n + 1) * b].copy_from_slice(xn.as_slice());
        }
        Ok(x)
    }
}

/// Which linear solver Newton uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearMethod {
    /// Direct when it fits the memory budget, GMRES otherwise.
    Auto,
    Direct,
    Gmres,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSolveOptions {
    pub method: LinearMethod,
    pub memory_budget_bytes: usize,
    pub gmres_restart: usize,
    pub gmres_rtol: f64,
    pub gmres_max_iters: usize,
}

impl Default for LinearSolveOptions {
    fn default() -> Self {
        Self {
            method: LinearMethod::Auto,
            memory_budget_bytes: 1 << 30,
            gmres_restart: 60,
            gmres_rtol: 1e-12,
            gmres_max_iters: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSolveReport {
    pub method: LinearMethod,
    pub iterations: usize,
    pub relative_residual: f64,
}

impl Linearization<'_, f64> {
    /// Block-diagonal preconditioner: implicit heat sweeps, forward in `f`
    /// and backward in `v`, ignoring all couplings.
    pub fn heat_sweeps(&self, r: &[f64]) -> Result<Vec<f64>> {
        let grid = *self.problem.grid();
        let time = *self.problem.time();
        let len = grid.len();
        let b = 2 * len;
        let dt = time.dt();
        let last = time.steps();
        let sp = self.problem.spectral();
        let mut x = vec![0.0; r.len()];
        let mut prev = Field::from_values(grid, r[..len].to_vec())?;
        x[..len].copy_from_slice(prev.values());
        for n in 1..=last {
            let mut src = Field::from_values(grid, r[n * b..n * b + len].to_vec())?;
            src.axpy(1.0 / dt, &prev);
            prev = sp.resolvent(&src, 1.0 / dt)?;
            x[n * b..n * b + len].copy_from_slice(prev.values());
        }
        let mut next = Field::from_values(grid, r[last * b + len..].to_vec())?;
        x[last * b + len..].copy_from_slice(next.values());
        for n in (0..last).rev() {
            let mut src = Field::from_values(grid, r[n * b + len..(n + 1) * b].to_vec())?;
            src.axpy(1.0 / dt, &next);
            next = sp.resolvent(&src, 1.0 / dt)?;
            x[n * b + len..(n + 1) * b].copy_from_slice(next.values());
        }
        Ok(x)
    }

    /// Solves `L_λ x = rhs` on flat vectors.
    pub fn solve(&self, rhs: &[f64], opts: &LinearSolveOptions) -> Result<(Vec<f64>, LinearSolveReport)> {
        let direct = match opts.method {
            LinearMethod::Direct => true,
            LinearMethod::Gmres => false,
            LinearMethod::Auto => {
                direct_solve_bytes(self.problem.grid(), self.problem.time()) <= opts.memory_budget_bytes
            }
        };
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if direct {
            let mat = self.assemble(opts.memory_budget_bytes)?;
            let x = mat.factor()?.solve(rhs)?;
            let res: Vec<f64> = mat.matvec(&x).iter().zip(rhs).map(|(a, b)| a - b).collect();
            let rel = norm(&res) / norm(rhs).max(f64::MIN_POSITIVE);
            return Ok((x, LinearSolveReport { method: LinearMethod::Direct, iterations: 1, relative_residual: rel }));
        }
        let (x, stats) = gmres(
            |v| self.apply_flat(v),
            |v| self.heat_sweeps(v),
            rhs,
            opts.gmres_restart,
            opts.gmres_rtol,
            opts.gmres_max_iters,
        )?;
        Ok((x, LinearSolveReport { method: LinearMethod::Gmres, iterations: stats.0, relative_residual: stats.1 }))
    }
}

/// Restarted GMRES with right preconditioning. Returns the solution and
/// `(iterations, relative residual)`.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Result<Vec<f64>>,
    precond: impl Fn(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    restart: usize,
    rtol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, (usize, f64))> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let norm = |x: &[f64]| dot(x, x).sqrt();
    let bnorm = norm(b);
    let mut x = vec![0.0; b.len()];
    if bnorm == 0.0 {
        return Ok((x, (0, 0.0)));
    }
    let restart = restart.max(1);
    let mut total = 0;
    let mut rel = 1.0;
    while total < max_iters {
        let ax = apply(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= rtol {
            return Ok((x, (total, rel)));
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k = 0;
        while k < restart && total < max_iters {
            let z = precond(&basis[k])?;
            let mut w = apply(&z)?;
            for (j, q) in basis.iter().enumerate() {
                let h = dot(&w, q);
                hess[j][k] = h;
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= h * qi);
            }
            let wn = norm(&w);
            hess[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let d = hess[k][k].hypot(hess[k + 1][k]);
            cs[k] = hess[k][k] / d;
            sn[k] = hess[k + 1][k] / d;
            hess[k][k] = d;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            rel = g[k].abs() / bnorm;
            if rel <= rtol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| hess[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        let mut update = vec![0.0; b.len()];
        for (yi, q) in y.iter().zip(&basis) {
            update.iter_mut().zip(q).for_each(|(u, qi)| *u += yi * qi);
        }
        let dz = precond(&update)?;
        x.iter_mut().zip(&dz).for_each(|(xi, d)| *xi += d);
        if rel <= rtol {
            let ax = apply(&x)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            rel = norm(&r) / bnorm;
            if rel <= rtol * 10.0 {
                return Ok((x, (total, rel)));
            }
        }
    }
    Err(MfgError::LinearSolver(format!("GMRES stalled at relative residual {rel:e} after {total} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::hamiltonian::HamiltonianModel;
    use crate::system::{residual_full, Coupling, Potential, ProblemData};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn problem(dim: usize, n: usize, nt: usize) -> MfgProblem<f64> {
        let g = PeriodicGrid::new(dim, n).unwrap();
        let drift = (0..dim)
            .map(|a| Field::from_fn(g, |x: [f64; 2]| 0.1 * (2.0 * PI * x[a]).sin()))
            .collect();
        MfgProblem::new(ProblemData {
            time: TimeGrid::new(0.05, nt).unwrap(),
            alpha: 0.5,
            hamiltonian: HamiltonianModel::iso_power(1.5, Field::constant(g, 1.0), 3.0).unwrap(),
            drift: VectorField::new(drift).unwrap(),
            potential: Potential {
                spatial: Field::from_fn(g, |x: [f64; 2]| 0.1 * (2.0 * PI * x[0]).cos()),
                coupling: Coupling::Arctan,
            },
            terminal: Field::from_fn(g, |x: [f64; 2]| 0.05 * (2.0 * PI * x[0]).cos()),
            initial: Field::from_fn(g, |x: [f64; 2]| 1.0 + 0.2 * (2.0 * PI * x[0]).cos()),
            m_floor: 1e-10,
        })
        .unwrap()
    }

    /// Smooth random field: a few low Fourier modes with random amplitudes.
    fn smooth(rng: &mut ChaCha8Rng, g: PeriodicGrid, amp: f64) -> Field<f64> {
        let coeffs: Vec<(f64, f64, f64)> =
            (0..4).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0))).collect();
        Field::from_fn(g, |x: [f64; 2]| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b, c))| {
                    let arg = 2.0 * PI * ((k + 1) as f64) * (x[0] + c * x[1]);
                    amp * (a * arg.cos() + b * arg.sin()) / (k + 1) as f64
                })
                .sum()
        })
    }

    fn random_st(rng: &mut ChaCha8Rng, p: &MfgProblem<f64>, amp: f64) -> SpaceTimeField<f64> {
        SpaceTimeField::new(*p.time(), (0..p.time().len()).map(|_| smooth(rng, *p.grid(), amp)).collect()).unwrap()
    }

    fn random_base(rng: &mut ChaCha8Rng, p: &MfgProblem<f64>) -> SolutionPair<f64> {
        let u = random_st(rng, p, 0.3);
        let m = random_st(rng, p, 0.2).map(|v| 1.0 + v);
        SolutionPair::new(u, m).unwrap()
    }

    fn random_dir(rng: &mut ChaCha8Rng, p: &MfgProblem<f64>) -> Perturbation<f64> {
        Perturbation::new(random_st(rng, p, 1.0), random_st(rng, p, 0.5)).unwrap()
    }

    fn trivial(p: &MfgProblem<f64>) -> SolutionPair<f64> {
        let big_t = p.time().horizon();
        SolutionPair::new(
            SpaceTimeField::from_fn(*p.grid(), *p.time(), |_, t| (1.0 - PI / 4.0) * (t - big_t)),
            SpaceTimeField::constant(*p.grid(), *p.time(), 1.0),
        )
        .unwrap()
    }

    fn sup(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    #[test]
    fn zero_direction_maps_to_zero() {
        let p = problem(1, 16, 4);
        let l = p.at_lambda(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let base = random_base(&mut rng, &p);
        let img = apply_l(&p, &l, &base, &Perturbation::zeros(*p.grid(), *p.time())).unwrap();
        assert_eq!(sup(&img.to_flat()), 0.0);
    }

    #[test]
    fn finite_difference_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [1, 2] {
            let p = problem(dim, if dim == 1 { 32 } else { 8 }, 6);
            let l = p.at_lambda(0.4).unwrap();
            let base = random_base(&mut rng, &p);
            let dir = random_dir(&mut rng, &p);
            let lin = Linearization::new(&p, &l, &base).unwrap();
            let exact = lin.apply(&dir).unwrap().to_flat();
            let r0 = residual_full(&p, &l, &base).unwrap().to_flat();
            let mut errs = Vec::new();
            for eps in [1e-3, 1e-4, 1e-5] {
                let mut shifted = base.clone();
                shifted.u.axpy(eps, &dir.v);
                shifted.m.axpy(eps, &dir.f);
                let r1 = residual_full(&p, &l, &shifted).unwrap().to_flat();
                let fd: Vec<f64> = r1.iter().zip(&r0).zip(&exact).map(|((a, b), e)| (a - b) / eps - e).collect();
                errs.push(sup(&fd) / sup(&exact));
            }
            assert!(errs[0] / errs[1] > 5.0 && errs[1] / errs[2] > 5.0, "{dim}: {errs:?}");
        }
    }

    #[test]
    fn linearity() {
        let p = problem(1, 16, 5);
        let l = p.at_lambda(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lin = Linearization::new(&p, &l, &random_base(&mut rng, &p)).unwrap();
        let (d1, d2) = (random_dir(&mut rng, &p), random_dir(&mut rng, &p));
        let (x1, x2) = (d1.to_flat(), d2.to_flat());
        let combo: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a - 0.7 * b).collect();
        let lhs = lin.apply_flat(&combo).unwrap();
        let (y1, y2) = (lin.apply_flat(&x1).unwrap(), lin.apply_flat(&x2).unwrap());
        let diff: Vec<f64> = lhs.iter().zip(y1.iter().zip(&y2)).map(|(a, (b, c))| a - 2.0 * b + 0.7 * c).collect();
        assert!(sup(&diff) <= 1e-10 * sup(&lhs));
    }

    #[test]
    fn fourier_symbol_at_trivial_base() {
        // Q = 0, m = 1, b = 0 and H(x, 0) = 1: the rows reduce to
        // f: (f^n - f^{n-1})/dt + 4π²k² f - γ div Dv
        // v: (v^n - v^{n+1})/dt + 4π²k² v + (α H(0) - 1/2) f
        let p = problem(1, 32, 4);
        let l = p.at_lambda(1.0).unwrap();
        let base = trivial(&p);
        let g = *p.grid();
        let time = *p.time();
        let dt = time.dt();
        let k = 3.0;
        let mode = Field::from_fn(g, |x: [f64; 2]| (2.0 * PI * k * x[0]).cos());
        let f = SpaceTimeField::from_fn(g, time, |x, t| (1.0 + t) * (2.0 * PI * k * x[0]).cos());
        let v = SpaceTimeField::from_fn(g, time, |x, t| t * t * (2.0 * PI * k * x[0]).cos());
        let img = apply_l(&p, &l, &base, &Perturbation::new(v, f).unwrap()).unwrap();
        let lam = 4.0 * PI * PI * k * k;
        let gamma = 1.5;
        let alpha = 0.5;
        for n in 1..=time.steps() {
            let (t, tp) = (time.time(n), time.time(n - 1));
            let coef = ((1.0 + t) - (1.0 + tp)) / dt + lam * (1.0 + t) + gamma * lam * t * t;
            let expect = mode.scaled(coef);
            assert!(img.h.slice(n).zip_map(&expect, |a, b| a - b).sup_norm() < 1e-9 * coef.abs());
        }
        for n in 0..time.steps() {
            let (t, tn) = (time.time(n), time.time(n + 1));
            let coef = (t * t - tn * tn) / dt + lam * t * t + (alpha * 1.0 - 0.5) * (1.0 + t);
            let expect = mode.scaled(coef);
            assert!(img.g.slice(n).zip_map(&expect, |a, b| a - b).sup_norm() < 1e-9 * lam);
        }
    }

    #[test]
    fn assembled_matrix_matches_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [1, 2] {
            let p = problem(dim, if dim == 1 { 16 } else { 8 }, 4);
            let l = p.at_lambda(0.25).unwrap();
            let base = random_base(&mut rng, &p);
            let lin = Linearization::new(&p, &l, &base).unwrap();
            let mat = lin.assemble(1 << 28).unwrap();
            for _ in 0..10 {
                let x = random_dir(&mut rng, &p).to_flat();
                let y = lin.apply_flat(&x).unwrap();
                let z = mat.matvec(&x);
                let diff: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
                assert!(sup(&diff) <= 1e-12 * sup(&y), "{}", sup(&diff) / sup(&y));
            }
            // structural bound: one dense block row plus one time neighbour
            assert!(mat.max_row_nnz() <= mat.block_size() + 1);
            // entry() agrees with matvec on a unit vector
            let mut e = vec![0.0; mat.dim()];
            let col = mat.block_size() + 3;
            e[col] = 1.0;
            let y = mat.matvec(&e);
            for (row, &v) in y.iter().enumerate() {
                assert_eq!(v, mat.entry(row, col));
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = problem(1, 64, 64);
        let l = p.at_lambda(1.0).unwrap();
        let lin = Linearization::new(&p, &l, &trivial(&p)).unwrap();
        assert!(matches!(lin.assemble(1024), Err(MfgError::BudgetExceeded { .. })));
    }

    #[test]
    fn trivial_base_keeps_fourier_modes_separate() {
        let p = problem(1, 16, 3);
        let l = p.at_lambda(1.0).unwrap();
        let lin = Linearization::new(&p, &l, &trivial(&p)).unwrap();
        let mat = lin.assemble(1 << 26).unwrap();
        let g = *p.grid();
        let sp = p.spectral();
        for k in 1..4i64 {
            for slot in 0..2 {
                let mut x = vec![0.0; mat.dim()];
                let mode = Field::from_fn(g, |x: [f64; 2]| (2.0 * PI * k as f64 * x[0]).sin());
                let start = mat.block_size() + slot * g.len();
                x[start..start + g.len()].copy_from_slice(mode.values());
                let y = mat.matvec(&x);
                for chunk in y.chunks(g.len()) {
                    let spec = sp.to_spectrum(&Field::from_values(g, chunk.to_vec()).unwrap()).unwrap();
                    for (idx, c) in spec.iter().enumerate() {
                        if g.wavenumber(idx).abs() != k {
                            assert!(c.norm() < 1e-10, "mode {k} leaked into {}", g.wavenumber(idx));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn direct_and_gmres_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dim in [1, 2] {
            let p = problem(dim, if dim == 1 { 32 } else { 8 }, 8);
            let l = p.at_lambda(0.5).unwrap();
            let base = random_base(&mut rng, &p);
            let lin = Linearization::new(&p, &l, &base).unwrap();
            let rhs: Vec<f64> = (0..lin.unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let direct = LinearSolveOptions { method: LinearMethod::Direct, ..Default::default() };
            let iterative = LinearSolveOptions { method: LinearMethod::Gmres, ..Default::default() };
            let (xd, rd) = lin.solve(&rhs, &direct).unwrap();
            let (xg, rg) = lin.solve(&rhs, &iterative).unwrap();
            assert!(rd.relative_residual < 1e-11, "{rd:?}");
            assert!(rg.relative_residual < 1e-11, "{rg:?}");
            let diff: Vec<f64> = xd.iter().zip(&xg).map(|(a, b)| a - b).collect();
            assert!(sup(&diff) <= 1e-8 * sup(&xd));
        }
    }

    #[test]
    fn uniqueness_energy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = problem(1, 32, 10);
        for lambda in [1.0, 0.5, 0.0] {
            let l = p.at_lambda(lambda).unwrap();
            let base = random_base(&mut rng, &p);
            let lin = Linearization::new(&p, &l, &base).unwrap();
            let mut dir = random_dir(&mut rng, &p);
            let last = p.time().steps();
            dir.f.slice_mut(0).values_mut().fill(0.0);
            dir.v.slice_mut(last).values_mut().fill(0.0);
            let img = lin.apply(&dir).unwrap();
            let dt = p.time().dt();
            let mut lhs = 0.0;
            for n in 1..=last {
                lhs += dt * img.h.slice(n).dot(dir.v.slice(n));
            }
            for n in 0..last {
                lhs -= dt * img.g.slice(n).dot(dir.f.slice(n));
            }
            let mut rhs = 0.0;
            for n in 1..last {
                let parts = lin.uniqueness_integrand(n, dir.f.slice(n), dir.v.slice(n)).unwrap();
                rhs += dt * parts.iter().map(|p| p.integrate()).sum::<f64>();
            }
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "λ={lambda}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn flat_layouts_round_trip() {
        let p = problem(1, 8, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_dir(&mut rng, &p);
        assert_eq!(Perturbation::from_flat(*p.grid(), *p.time(), &d.to_flat()).unwrap(), d);
        let rhs = LinearizedRhs::from_flat(*p.grid(), *p.time(), &d.to_flat()).unwrap();
        assert_eq!(rhs.to_flat(), d.to_flat());
    }
}
