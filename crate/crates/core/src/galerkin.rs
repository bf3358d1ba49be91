//! Fourier–Galerkin projection of the linearized system and its solution by
//! shooting on the split initial/terminal conditions.
//!
//! With `f_N = Σ A_k e_k` and `v_N = Σ B_k e_k`, testing the linearized
//! equations against `e_k` gives
//!
//! ```text
//! Ȧ = -(K + Φ) A - Ψ B + ⟨h, e⟩,        A(0) = ⟨A, e⟩
//! Ḃ = Γ A + (K + Τ) B - ⟨g, e⟩,         B(T) = ⟨B, e⟩
//! ```
//!
//! with `K_kl = ⟨De_l, De_k⟩`, `Φ_kl = ⟨flux_f e_l, De_k⟩`,
//! `Ψ_kl = ⟨flux_v De_l, De_k⟩`, `Γ_kl = ⟨hjb_f e_l, e_k⟩` and
//! `Τ_kl = ⟨hjb_v·De_l, e_k⟩`. Coefficients vary linearly in time between
//! solver slices.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{MfgError, Result};
use crate::grid::{Field, PeriodicGrid, SpaceTimeField, TimeGrid, VectorField};
use crate::linearized::{Linearization, LinearizedRhs, Perturbation};

/// Which real Fourier function a basis element is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeKind {
    Constant,
    Cos,
    Sin,
}

/// The first `n` real Fourier modes `1, √2 cos(2πk·x), √2 sin(2πk·x)`,
/// ordered by `|k|²`, orthonormal in the discrete `L²` product.
#[derive(Clone, Debug)]
pub struct FourierBasis {
    grid: PeriodicGrid,
    modes: Vec<Field<f64>>,
    gradients: Vec<VectorField<f64>>,
    labels: Vec<([i64; 2], ModeKind)>,
}

impl FourierBasis {
    pub fn new(grid: PeriodicGrid, n: usize) -> Result<Self> {
        let half = (grid.points_per_dim() / 2) as i64;
        // half-space representatives below Nyquist
        let mut ks: Vec<[i64; 2]> = Vec::new();
        let k1_range: Vec<i64> = if grid.dim() == 2 { (1 - half..half).collect() } else { vec![0] };
        for k0 in 0..half {
            for &k1 in &k1_range {
                if k0 > 0 || k1 > 0 {
                    ks.push([k0, k1]);
                }
            }
        }
        ks.sort_by_key(|k| (k[0] * k[0] + k[1] * k[1], -k[0], -k[1]));
        let mut labels = vec![([0, 0], ModeKind::Constant)];
        for k in ks {
            labels.push((k, ModeKind::Cos));
            labels.push((k, ModeKind::Sin));
        }
        if n == 0 || n > labels.len() {
            return Err(MfgError::InvalidArgument(format!(
                "{n} modes requested, grid {grid} resolves {}",
                labels.len()
            )));
        }
        labels.truncate(n);
        let sp = crate::grid::Spectral::<f64>::new(grid);
        let two_pi = 2.0 * std::f64::consts::PI;
        let root2 = std::f64::consts::SQRT_2;
        let modes: Vec<Field<f64>> = labels
            .iter()
            .map(|&(k, kind)| {
                Field::from_fn(grid, |x: [f64; 2]| {
                    let arg = two_pi * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                    match kind {
                        ModeKind::Constant => 1.0,
                        ModeKind::Cos => root2 * arg.cos(),
                        ModeKind::Sin => root2 * arg.sin(),
                    }
                })
            })
            .collect();
        let gradients = modes.iter().map(|e| sp.gradient(e)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, modes, gradients, labels })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[Field<f64>] {
        &self.modes
    }

    pub fn label(&self, k: usize) -> ([i64; 2], ModeKind) {
        self.labels[k]
    }

    /// Largest `|k|²` in the basis.
    pub fn max_wavenumber_sq(&self) -> i64 {
        self.labels.iter().map(|(k, _)| k[0] * k[0] + k[1] * k[1]).max().unwrap_or(0)
    }

    /// `⟨f, e_k⟩` for every mode.
    pub fn project(&self, f: &Field<f64>) -> Result<DVector<f64>> {
        self.grid.ensure_same(f.grid())?;
        Ok(DVector::from_iterator(self.len(), self.modes.iter().map(|e| f.dot(e))))
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Field<f64> {
        let mut out = Field::zeros(self.grid);
        for (c, e) in coeffs.iter().zip(&self.modes) {
            out.axpy(*c, e);
        }
        out
    }

    /// Gram matrix in the discrete `L²` product.
    pub fn gram(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.len(), |i, j| self.modes[i].dot(&self.modes[j]))
    }

    /// Gram matrix of the gradients.
    pub fn stiffness(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.len(), |i, j| self.gradients[i].dot(&self.gradients[j]))
    }
}

/// Coupling matrices on one solver slice.
#[derive(Clone, Debug)]
pub struct GalerkinBlocks {
    /// `-(K + Φ)`
    pub aa: DMatrix<f64>,
    /// `-Ψ`
    pub ab: DMatrix<f64>,
    /// `Γ`
    pub ba: DMatrix<f64>,
    /// `K + Τ`
    pub bb: DMatrix<f64>,
}

impl GalerkinBlocks {
    fn system(&self) -> DMatrix<f64> {
        let n = self.aa.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.aa);
        m.view_mut((0, n), (n, n)).copy_from(&self.ab);
        m.view_mut((n, 0), (n, n)).copy_from(&self.ba);
        m.view_mut((n, n), (n, n)).copy_from(&self.bb);
        m
    }
}

/// The projected ODE system, one coefficient set per solver slice.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    basis: FourierBasis,
    time: TimeGrid<f64>,
    blocks: Vec<GalerkinBlocks>,
    matrices: Vec<DMatrix<f64>>,
}

pub fn assemble_galerkin_system(lin: &Linearization<'_, f64>, basis: &FourierBasis) -> Result<GalerkinSystem> {
    let problem = lin.problem();
    let grid = *problem.grid();
    grid.ensure_same(basis.grid())?;
    let dim = grid.dim();
    let n = basis.len();
    let stiffness = basis.stiffness();
    let blocks: Vec<GalerkinBlocks> = lin
        .slices()
        .par_iter()
        .map(|c| {
            // fields of the weak form, one per basis function l
            let flux_f: Vec<VectorField<f64>> = basis
                .modes
                .iter()
                .map(|e| {
                    VectorField::new(
                        (0..dim).map(|a| e.map_indexed(|i, v| c.flux_f[a][i] * v)).collect(),
                    )
                    .expect("same grid")
                })
                .collect();
            let flux_v: Vec<VectorField<f64>> = basis
                .gradients
                .iter()
                .map(|g| {
                    VectorField::new(
                        (0..dim)
                            .map(|a| {
                                Field::from_values(
                                    grid,
                                    (0..grid.len())
                                        .map(|i| {
                                            let d = g.at(i);
                                            (0..dim).map(|b| c.flux_v[i][a][b] * d[b]).sum()
                                        })
                                        .collect(),
                                )
                                .expect("grid length")
                            })
                            .collect(),
                    )
                    .expect("same grid")
                })
                .collect();
            let hjb_f: Vec<Field<f64>> =
                basis.modes.iter().map(|e| e.map_indexed(|i, v| c.hjb_f[i] * v)).collect();
            let hjb_v: Vec<Field<f64>> = basis
                .gradients
                .iter()
                .map(|g| {
                    Field::from_values(
                        grid,
                        (0..grid.len())
                            .map(|i| {
                                let d = g.at(i);
                                (0..dim).map(|a| c.hjb_v[a][i] * d[a]).sum()
                            })
                            .collect(),
                    )
                    .expect("grid length")
                })
                .collect();
            let phi = DMatrix::from_fn(n, n, |k, l| flux_f[l].dot(&basis.gradients[k]));
            let psi = DMatrix::from_fn(n, n, |k, l| flux_v[l].dot(&basis.gradients[k]));
            let gam = DMatrix::from_fn(n, n, |k, l| hjb_f[l].dot(&basis.modes[k]));
            let tau = DMatrix::from_fn(n, n, |k, l| hjb_v[l].dot(&basis.modes[k]));
            GalerkinBlocks { aa: -(&stiffness + phi), ab: -psi, ba: gam, bb: &stiffness + tau }
        })
        .collect();
    let matrices = blocks.iter().map(GalerkinBlocks::system).collect();
    Ok(GalerkinSystem { basis: basis.clone(), time: *problem.time(), blocks, matrices })
}

/// Coefficients `A_k(t_n)`, `B_k(t_n)` as `N × (N_t+1)` arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinTrajectory {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// Projected data `⟨h, e⟩`, `⟨g, e⟩` per slice and `⟨A, e⟩`, `⟨B, e⟩`.
#[derive(Clone, Debug)]
pub struct ProjectedRhs {
    pub h: Vec<DVector<f64>>,
    pub g: Vec<DVector<f64>>,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
}

impl GalerkinSystem {
    pub fn basis(&self) -> &FourierBasis {
        &self.basis
    }

    pub fn blocks(&self) -> &[GalerkinBlocks] {
        &self.blocks
    }

    pub fn time(&self) -> &TimeGrid<f64> {
        &self.time
    }

    /// Projects every slice of `h` and `g`; unlike the monolithic solve the
    /// forcing is used on all slices, including `h(·,0)` and `g(·,T)`.
    pub fn project_rhs(&self, rhs: &LinearizedRhs<f64>) -> Result<ProjectedRhs> {
        Ok(ProjectedRhs {
            h: rhs.h.slices().iter().map(|s| self.basis.project(s)).collect::<Result<_>>()?,
            g: rhs.g.slices().iter().map(|s| self.basis.project(s)).collect::<Result<_>>()?,
            a: self.basis.project(&rhs.a)?,
            b: self.basis.project(&rhs.b)?,
        })
    }

    fn forcing(&self, data: Option<&ProjectedRhs>, n: usize) -> DVector<f64> {
        let k = self.basis.len();
        let mut out = DVector::zeros(2 * k);
        if let Some(d) = data {
            out.rows_mut(0, k).copy_from(&d.h[n]);
            out.rows_mut(k, k).copy_from(&(-&d.g[n]));
        }
        out
    }

    /// Classical RK4 over the solver grid from `x0` at `t = 0`; returns the
    /// state at every slice.
    pub fn propagate(&self, x0: &DVector<f64>, data: Option<&ProjectedRhs>) -> Result<Vec<DVector<f64>>> {
        let dt = self.time.dt();
        let mut out = Vec::with_capacity(self.time.len());
        let mut x = x0.clone();
        out.push(x.clone());
        for n in 0..self.time.steps() {
            let (m0, m1) = (&self.matrices[n], &self.matrices[n + 1]);
            let mid = (m0 + m1) * 0.5;
            let (f0, f1) = (self.forcing(data, n), self.forcing(data, n + 1));
            let fm = (&f0 + &f1) * 0.5;
            let k1 = m0 * &x + &f0;
            let k2 = &mid * (&x + &k1 * (0.5 * dt)) + &fm;
            let k3 = &mid * (&x + &k2 * (0.5 * dt)) + &fm;
            let k4 = m1 * (&x + &k3 * dt) + &f1;
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(MfgError::IntegratorBlowUp(n + 1));
            }
            out.push(x.clone());
        }
        Ok(out)
    }

    fn to_trajectory(&self, states: &[DVector<f64>]) -> GalerkinTrajectory {
        let k = self.basis.len();
        let cols = states.len();
        GalerkinTrajectory {
            a: DMatrix::from_fn(k, cols, |i, j| states[j][i]),
            b: DMatrix::from_fn(k, cols, |i, j| states[j][k + i]),
        }
    }

    pub fn reconstruct(&self, traj: &GalerkinTrajectory) -> Result<Perturbation<f64>> {
        let col = |m: &DMatrix<f64>, j: usize| m.column(j).iter().copied().collect::<Vec<_>>();
        let f = (0..self.time.len()).map(|j| self.basis.reconstruct(&col(&traj.a, j))).collect();
        let v = (0..self.time.len()).map(|j| self.basis.reconstruct(&col(&traj.b, j))).collect();
        Perturbation::new(SpaceTimeField::new(self.time, v)?, SpaceTimeField::new(self.time, f)?)
    }
}

/// The linear map `(A(0), B(0)) ↦ (A(0), B(T))` of the homogeneous system.
#[derive(Clone, Debug)]
pub struct ShootingMatrix {
    pub matrix: DMatrix<f64>,
    pub singular_values: DVector<f64>,
}

impl ShootingMatrix {
    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values.min()
    }

    pub fn condition_number(&self) -> f64 {
        self.singular_values.max() / self.smallest_singular_value()
    }
}

pub fn shooting_matrix(system: &GalerkinSystem) -> Result<ShootingMatrix> {
    let k = system.basis.len();
    let last = system.time.steps();
    let columns = (0..2 * k)
        .into_par_iter()
        .map(|j| {
            let mut e = DVector::zeros(2 * k);
            e[j] = 1.0;
            let states = system.propagate(&e, None)?;
            let mut col = DVector::zeros(2 * k);
            col.rows_mut(0, k).copy_from(&e.rows(0, k));
            col.rows_mut(k, k).copy_from(&states[last].rows(k, k));
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = DMatrix::from_columns(&columns);
    let singular_values = matrix.clone().svd(false, false).singular_values;
    Ok(ShootingMatrix { matrix, singular_values })
}

/// Particular solution from zero initial data plus the homogeneous
/// correction that fixes `A(0)` and `B(T)`.
pub fn solve_galerkin(
    system: &GalerkinSystem,
    shooting: &ShootingMatrix,
    data: &ProjectedRhs,
) -> Result<GalerkinTrajectory> {
    let k = system.basis.len();
    let last = system.time.steps();
    let smallest = shooting.smallest_singular_value();
    if !(smallest > shooting.singular_values.max() * 1e-15) {
        return Err(MfgError::Singular { smallest_singular_value: smallest });
    }
    let particular = system.propagate(&DVector::zeros(2 * k), Some(data))?;
    let mut target = DVector::zeros(2 * k);
    target.rows_mut(0, k).copy_from(&data.a);
    target.rows_mut(k, k).copy_from(&(&data.b - particular[last].rows(k, k)));
    let c = shooting
        .matrix
        .clone()
        .lu()
        .solve(&target)
        .ok_or(MfgError::Singular { smallest_singular_value: smallest })?;
    // the forced system started from c is particular + homogeneous(c)
    let states = system.propagate(&c, Some(data))?;
    Ok(system.to_trajectory(&states))
}

/// Galerkin solve of `L_λ(v, f) = rhs`, reconstructed on the grid.
pub fn solve_linearized_galerkin(
    lin: &Linearization<'_, f64>,
    basis: &FourierBasis,
    rhs: &LinearizedRhs<f64>,
) -> Result<(Perturbation<f64>, GalerkinTrajectory, ShootingMatrix)> {
    let system = assemble_galerkin_system(lin, basis)?;
    let shooting = shooting_matrix(&system)?;
    let data = system.project_rhs(rhs)?;
    let traj = solve_galerkin(&system, &shooting, &data)?;
    Ok((system.reconstruct(&traj)?, traj, shooting))
}

/// `‖h‖ + ‖g‖ + ‖A‖ + ‖B‖` where `h` and `g` are measured on every slice,
/// matching the data the Galerkin system consumes.
pub fn galerkin_data_norm(rhs: &LinearizedRhs<f64>) -> f64 {
    let dt = rhs.h.time().dt();
    let st = |f: &SpaceTimeField<f64>| (f.slices().iter().map(|s| s.dot(s)).sum::<f64>() * dt).sqrt();
    st(&rhs.h) + st(&rhs.g) + rhs.a.l2_norm() + rhs.b.l2_norm()
}

/// A constant `C` with `max_t ‖(f_N, v_N)(t)‖ ≤ C · galerkin_data_norm(rhs)`
/// for every right-hand side: the largest singular value over time slices of
/// the map from weighted projected data to the Galerkin state.
pub fn energy_constant(system: &GalerkinSystem, shooting: &ShootingMatrix) -> Result<f64> {
    let k = system.basis.len();
    let slices = system.time.len();
    let w = 1.0 / system.time.dt().sqrt();
    let data_dim = 2 * k + 2 * k * slices;
    let unit = |j: usize| {
        let mut d = ProjectedRhs {
            h: vec![DVector::zeros(k); slices],
            g: vec![DVector::zeros(k); slices],
            a: DVector::zeros(k),
            b: DVector::zeros(k),
        };
        if j < k {
            d.a[j] = 1.0;
        } else if j < 2 * k {
            d.b[j - k] = 1.0;
        } else {
            let r = j - 2 * k;
            let (n, idx) = (r / (2 * k), r % (2 * k));
            if idx < k {
                d.h[n][idx] = w;
            } else {
                d.g[n][idx - k] = w;
            }
        }
        d
    };
    let responses = (0..data_dim)
        .into_par_iter()
        .map(|j| Ok(system.to_trajectory_states(&solve_galerkin(system, shooting, &unit(j))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..slices)
        .map(|n| DMatrix::from_fn(2 * k, data_dim, |i, j| responses[j][n][i]).svd(false, false).singular_values.max())
        .fold(0.0, f64::max))
}

impl GalerkinSystem {
    fn to_trajectory_states(&self, traj: &GalerkinTrajectory) -> Vec<DVector<f64>> {
        (0..traj.a.ncols())
            .map(|j| {
                let mut v = DVector::zeros(2 * traj.a.nrows());
                v.rows_mut(0, traj.a.nrows()).copy_from(&traj.a.column(j));
                v.rows_mut(traj.a.nrows(), traj.a.nrows()).copy_from(&traj.b.column(j));
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::trivial_solution;
    use crate::hamiltonian::HamiltonianModel;
    use crate::linearized::{LinearSolveOptions, LinearMethod};
    use crate::system::{Coupling, MfgProblem, Potential, ProblemData};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn problem(n: usize, nt: usize) -> MfgProblem<f64> {
        let g = PeriodicGrid::new(1, n).unwrap();
        MfgProblem::new(ProblemData {
            time: TimeGrid::new(0.05, nt).unwrap(),
            alpha: 0.5,
            hamiltonian: HamiltonianModel::iso_power(1.5, Field::constant(g, 1.0), 3.0).unwrap(),
            drift: VectorField::new(vec![Field::from_fn(g, |x: [f64; 2]| 0.1 * (2.0 * PI * x[0]).sin())]).unwrap(),
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

    #[test]
    fn basis_is_orthonormal() {
        for (dim, n, modes) in [(1, 32, 16), (2, 16, 25)] {
            let g = PeriodicGrid::new(dim, n).unwrap();
            let b = FourierBasis::new(g, modes).unwrap();
            let gram = b.gram();
            assert!((gram - DMatrix::identity(modes, modes)).abs().max() < 1e-12);
            let k = b.stiffness();
            for i in 0..modes {
                for j in 0..modes {
                    if i != j {
                        assert!(k[(i, j)].abs() < 1e-9);
                    }
                }
                let (kv, _) = b.label(i);
                let expect = 4.0 * PI * PI * (kv[0] * kv[0] + kv[1] * kv[1]) as f64;
                assert!((k[(i, i)] - expect).abs() < 1e-9 * expect.max(1.0));
            }
        }
        let g = PeriodicGrid::new(1, 8).unwrap();
        assert!(FourierBasis::new(g, 8).is_err());
        assert!(FourierBasis::new(g, 7).is_ok());
    }

    #[test]
    fn parseval() {
        let g = PeriodicGrid::new(1, 32).unwrap();
        let b = FourierBasis::new(g, 9).unwrap();
        let c = [0.3, -1.0, 0.5, 0.0, 2.0, 0.1, -0.7, 0.2, 0.9];
        let f = b.reconstruct(&c);
        let p = b.project(&f).unwrap();
        assert!((f.dot(&f) - c.iter().map(|x| x * x).sum::<f64>()).abs() < 1e-12);
        assert!(p.iter().zip(c).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn trivial_base_blocks_are_diagonal_heat() {
        let p = problem(32, 16);
        let l = p.at_lambda(1.0).unwrap();
        let base = trivial_solution(&p).unwrap().pair;
        let lin = Linearization::new(&p, &l, &base).unwrap();
        let basis = FourierBasis::new(*p.grid(), 8).unwrap();
        let sys = assemble_galerkin_system(&lin, &basis).unwrap();
        for blk in sys.blocks() {
            for k in 0..8 {
                let (kv, _) = basis.label(k);
                let lam = 4.0 * PI * PI * (kv[0] * kv[0]) as f64;
                for l in 0..8 {
                    let d = if k == l { lam } else { 0.0 };
                    assert!((blk.aa[(k, l)] + d).abs() < 1e-9);
                    assert!((blk.bb[(k, l)] - d).abs() < 1e-9);
                    assert!((blk.ab[(k, l)] + 1.5 * d).abs() < 1e-9);
                }
            }
            assert!(blk.ab.clone().transpose().relative_eq(&blk.ab, 1e-12, 1e-12));
        }
        let zero = sys.project_rhs(&LinearizedRhs::zeros(*p.grid(), *p.time())).unwrap();
        assert!(zero.h.iter().chain(&zero.g).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn shooting_matrix_structure_and_homogeneous_problem() {
        let p = problem(32, 64);
        let l = p.at_lambda(1.0).unwrap();
        let base = trivial_solution(&p).unwrap().pair;
        let lin = Linearization::new(&p, &l, &base).unwrap();
        for modes in [2, 4, 8] {
            let basis = FourierBasis::new(*p.grid(), modes).unwrap();
            let sys = assemble_galerkin_system(&lin, &basis).unwrap();
            let sm = shooting_matrix(&sys).unwrap();
            let top = sm.matrix.view((0, 0), (modes, 2 * modes)).clone_owned();
            let mut eye = DMatrix::zeros(modes, 2 * modes);
            eye.view_mut((0, 0), (modes, modes)).fill_with_identity();
            assert_eq!(top, eye);
            assert!(sm.smallest_singular_value() > 0.0);
            let data = sys.project_rhs(&LinearizedRhs::zeros(*p.grid(), *p.time())).unwrap();
            let traj = solve_galerkin(&sys, &sm, &data).unwrap();
            assert!(traj.a.abs().max() <= 1e-10 && traj.b.abs().max() <= 1e-10);
        }
    }

    fn band_limited_rhs(rng: &mut ChaCha8Rng, p: &MfgProblem<f64>, kmax: usize) -> LinearizedRhs<f64> {
        let g = *p.grid();
        let time = *p.time();
        let basis = FourierBasis::new(g, 2 * kmax + 1).unwrap();
        let mut coeff = |scale: f64| -> Vec<(f64, f64)> {
            (0..basis.len()).map(|_| (scale * rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
        };
        let (ch, cg, ca, cb) = (coeff(1.0), coeff(1.0), coeff(1.0), coeff(1.0));
        let field = |c: &[(f64, f64)], t: f64| {
            basis.reconstruct(&c.iter().map(|(a, b)| a + b * (2.0 * PI * t / 0.05).sin()).collect::<Vec<_>>())
        };
        LinearizedRhs {
            h: SpaceTimeField::new(time, (0..time.len()).map(|n| field(&ch, time.time(n))).collect()).unwrap(),
            g: SpaceTimeField::new(time, (0..time.len()).map(|n| field(&cg, time.time(n))).collect()).unwrap(),
            a: field(&ca, 0.0),
            b: field(&cb, 0.0),
        }
    }

    #[test]
    fn agrees_with_monolithic_solve_at_trivial_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut errs = Vec::new();
        let mut rhs0 = None;
        for nt in [64, 128, 256] {
            let p = problem(32, nt);
            let l = p.at_lambda(1.0).unwrap();
            let base = trivial_solution(&p).unwrap().pair;
            let lin = Linearization::new(&p, &l, &base).unwrap();
            let basis = FourierBasis::new(*p.grid(), 8).unwrap();
            // same continuous data on each time grid
            let seed = rhs0.get_or_insert_with(|| rng.random::<u64>());
            let rhs = band_limited_rhs(&mut ChaCha8Rng::seed_from_u64(*seed), &p, 3);
            let (gal, _, _) = solve_linearized_galerkin(&lin, &basis, &rhs).unwrap();
            let opts = LinearSolveOptions { method: LinearMethod::Direct, ..Default::default() };
            let (x, _) = lin.solve(&rhs.to_flat(), &opts).unwrap();
            let mono = Perturbation::from_flat(*p.grid(), *p.time(), &x).unwrap();
            let mut diff = 0.0f64;
            for n in 0..p.time().len() {
                let df = gal.f.slice(n).zip_map(mono.f.slice(n), |a, b| a - b).sup_norm();
                let dv = gal.v.slice(n).zip_map(mono.v.slice(n), |a, b| a - b).sup_norm();
                diff = diff.max(df).max(dv);
            }
            errs.push(diff);
        }
        // implicit Euler in the monolithic path is first order in time
        assert!(errs[0] / errs[1] > 1.6 && errs[1] / errs[2] > 1.6, "{errs:?}");
    }

    #[test]
    fn energy_constant_bounds_random_data() {
        let p = problem(32, 32);
        let l = p.at_lambda(1.0).unwrap();
        let base = trivial_solution(&p).unwrap().pair;
        let lin = Linearization::new(&p, &l, &base).unwrap();
        let basis = FourierBasis::new(*p.grid(), 4).unwrap();
        let sys = assemble_galerkin_system(&lin, &basis).unwrap();
        let sm = shooting_matrix(&sys).unwrap();
        let c = energy_constant(&sys, &sm).unwrap();
        assert!(c.is_finite() && c > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let rhs = band_limited_rhs(&mut rng, &p, 1);
            let (sol, _, _) = solve_linearized_galerkin(&lin, &basis, &rhs).unwrap();
            assert!(sol.max_l2_in_time() <= c * galerkin_data_norm(&rhs) * (1.0 + 1e-9));
        }
    }
}
