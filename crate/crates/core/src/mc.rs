//! Particle simulation of the controlled diffusion
//! `dX = -(D_pH_λ(X, Q) + b_λ(X)) dt + √2 dW` driven by a solved pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MfgError, Result};
use crate::grid::{Field, PeriodicGrid, SpaceTimeField};
use crate::system::{MfgProblem, SliceState, SolutionPair};

/// Paths per independent random stream.
const BATCH: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SDEConfig {
    pub paths: usize,
    pub seed: u64,
    /// SDE step; must divide the solver step. `None` uses the solver step.
    pub dt_sde: Option<f64>,
    /// Pass threshold on the per-slice `L¹` distance.
    pub l1_tolerance: f64,
}

impl Default for SDEConfig {
    fn default() -> Self {
        Self { paths: 100_000, seed: 1, dt_sde: None, l1_tolerance: 5e-2 }
    }
}

impl SDEConfig {
    /// Number of SDE steps per solver step.
    pub fn substeps(&self, solver_dt: f64) -> Result<usize> {
        if self.paths == 0 {
            return Err(MfgError::config("mc.paths", "must be at least 1"));
        }
        if !(self.l1_tolerance > 0.0) {
            return Err(MfgError::config("mc.l1_tolerance", "must be positive"));
        }
        let Some(dt) = self.dt_sde else { return Ok(1) };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(MfgError::config("mc.dt_sde", "must be positive"));
        }
        let ratio = solver_dt / dt;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
            return Err(MfgError::config(
                "mc.dt_sde",
                format!("{dt} does not divide the solver step {solver_dt}"),
            ));
        }
        Ok(k as usize)
    }
}

/// Feedback drift `-(D_pH_λ(x, Q) + b_λ(x))` at every node and slice.
fn drift_fields(problem: &MfgProblem<f64>, lambda: f64, pair: &SolutionPair<f64>) -> Result<Vec<Vec<[f64; 2]>>> {
    let data = problem.at_lambda(lambda)?;
    (0..problem.time().len())
        .map(|n| {
            let st = SliceState::new(problem, &data, pair.u.slice(n), pair.m.slice(n), n)?;
            Ok((0..problem.grid().len())
                .map(|i| {
                    let b = data.drift.at(i);
                    [-(st.dp_h[i][0] + b[0]), -(st.dp_h[i][1] + b[1])]
                })
                .collect())
        })
        .collect()
}

/// Periodic cloud-in-cell stencil: the lower-left node and the weights along
/// each axis.
#[inline]
fn stencil(grid: &PeriodicGrid, x: [f64; 2]) -> ([usize; 2], [f64; 2]) {
    let n = grid.points_per_dim();
    let mut base = [0; 2];
    let mut w = [0.0; 2];
    for a in 0..grid.dim() {
        let s = x[a] * n as f64;
        let fl = s.floor();
        base[a] = (fl as i64).rem_euclid(n as i64) as usize;
        w[a] = s - fl;
    }
    debug_assert!(base.iter().all(|&b| b < n), "position left the torus");
    (base, w)
}

fn corners(grid: &PeriodicGrid, base: [usize; 2], w: [f64; 2]) -> impl Iterator<Item = (usize, f64)> + '_ {
    let d = grid.dim();
    (0..1usize << d).map(move |c| {
        let mut ij = base;
        let mut weight = 1.0;
        for a in 0..d {
            if c >> a & 1 == 1 {
                ij[a] += 1;
                weight *= w[a];
            } else {
                weight *= 1.0 - w[a];
            }
        }
        (grid.flat_index(ij), weight)
    })
}

fn interpolate(grid: &PeriodicGrid, v: &[[f64; 2]], x: [f64; 2]) -> [f64; 2] {
    let (base, w) = stencil(grid, x);
    corners(grid, base, w).fold([0.0; 2], |acc, (i, c)| [acc[0] + c * v[i][0], acc[1] + c * v[i][1]])
}

fn deposit(grid: &PeriodicGrid, acc: &mut [f64], x: [f64; 2]) {
    let (base, w) = stencil(grid, x);
    for (i, c) in corners(grid, base, w) {
        acc[i] += c;
    }
}

/// Draws from the piecewise-linear interpolant of a positive density:
/// inverse CDF in one dimension, rejection from the uniform law in two.
pub struct DensitySampler {
    grid: PeriodicGrid,
    values: Vec<f64>,
    cell_cdf: Vec<f64>,
    max: f64,
}

impl DensitySampler {
    pub fn new(m: &Field<f64>) -> Result<Self> {
        let grid = *m.grid();
        let values = m.values().to_vec();
        if let Some(node) = values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(MfgError::NonPositiveDensity { node, slice: 0, value: values[node] });
        }
        let n = grid.points_per_dim();
        let mut cell_cdf = Vec::new();
        if grid.dim() == 1 {
            let mut total = 0.0;
            for i in 0..n {
                total += 0.5 * (values[i] + values[(i + 1) % n]);
                cell_cdf.push(total);
            }
            for c in &mut cell_cdf {
                *c /= total;
            }
        }
        let max = values.iter().copied().fold(0.0, f64::max);
        Ok(Self { grid, values, cell_cdf, max })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        let n = self.grid.points_per_dim();
        let h = 1.0 / n as f64;
        if self.grid.dim() == 1 {
            let u: f64 = rng.random();
            let cell = self.cell_cdf.partition_point(|&c| c < u).min(n - 1);
            let (a, b) = (self.values[cell], self.values[(cell + 1) % n]);
            // invert ∫_0^s (a + (b-a)t) dt = r (a+b)/2 on the unit cell
            let r: f64 = rng.random();
            let target = r * 0.5 * (a + b);
            let s = if (b - a).abs() < 1e-14 * a {
                r
            } else {
                let disc = a * a + 2.0 * (b - a) * target;
                2.0 * target / (a + disc.max(0.0).sqrt())
            };
            return [((cell as f64 + s) * h).rem_euclid(1.0), 0.0];
        }
        loop {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let (base, w) = stencil(&self.grid, x);
            let v: f64 = corners(&self.grid, base, w).map(|(i, c)| c * self.values[i]).sum();
            if rng.random::<f64>() * self.max <= v {
                return x;
            }
        }
    }
}

/// Empirical densities at every solver slice from `cfg.paths` particles.
pub fn simulate_density(
    problem: &MfgProblem<f64>,
    lambda: f64,
    pair: &SolutionPair<f64>,
    cfg: &SDEConfig,
) -> Result<SpaceTimeField<f64>> {
    let time = *problem.time();
    let grid = *problem.grid();
    let substeps = cfg.substeps(time.dt())?;
    let drift = drift_fields(problem, lambda, pair)?;
    let sampler = DensitySampler::new(&problem.at_lambda(lambda)?.initial)?;
    let dim = grid.dim();
    let h = time.dt() / substeps as f64;
    let noise = (2.0 * h).sqrt();
    let slices = time.len();
    let nodes = grid.len();
    let batches = cfg.paths.div_ceil(BATCH);

    let partial: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let count = BATCH.min(cfg.paths - b * BATCH);
            let mut acc = vec![0.0; slices * nodes];
            let mut xs: Vec<[f64; 2]> = (0..count).map(|_| sampler.sample(&mut rng)).collect();
            for x in &xs {
                deposit(&grid, &mut acc[..nodes], *x);
            }
            for n in 1..slices {
                for x in &mut xs {
                    for k in 0..substeps {
                        let theta = k as f64 / substeps as f64;
                        let d0 = interpolate(&grid, &drift[n - 1], *x);
                        let d1 = interpolate(&grid, &drift[n], *x);
                        for a in 0..dim {
                            let v = (1.0 - theta) * d0[a] + theta * d1[a];
                            let z: f64 = rng.sample(StandardNormal);
                            x[a] = (x[a] + v * h + noise * z).rem_euclid(1.0);
                        }
                    }
                    deposit(&grid, &mut acc[n * nodes..(n + 1) * nodes], *x);
                }
            }
            acc
        })
        .collect();

    let mut total = vec![0.0; slices * nodes];
    for p in &partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let scale = 1.0 / (cfg.paths as f64 * grid.cell_volume::<f64>());
    let fields = total
        .chunks(nodes)
        .map(|c| Field::from_values(grid, c.iter().map(|v| v * scale).collect()))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(time, fields)
}

/// `∫ |a - b|` per slice.
pub fn l1_distance(a: &SpaceTimeField<f64>, b: &SpaceTimeField<f64>) -> Result<Vec<f64>> {
    a.grid().ensure_same(b.grid())?;
    if a.time() != b.time() {
        return Err(MfgError::GridMismatch("different time grids".into()));
    }
    Ok(a.slices()
        .iter()
        .zip(b.slices())
        .map(|(x, y)| x.zip_map(y, |p, q| (p - q).abs()).integrate())
        .collect())
}

/// Expected `L¹` sampling error of a cloud-in-cell estimate of `m` from
/// `paths` particles: `Σ h^d √(2/π) σ_i` with `σ_i² ≈ (2/3)^d m_i / (M h^d)`.
pub fn l1_noise_estimate(m: &Field<f64>, paths: usize) -> f64 {
    let grid = m.grid();
    let vol = grid.cell_volume::<f64>();
    let cic = (2.0f64 / 3.0).powi(grid.dim() as i32);
    let c = (2.0 / std::f64::consts::PI).sqrt();
    m.values().iter().map(|&mi| vol * c * (cic * mi.max(0.0) / (paths as f64 * vol)).sqrt()).sum()
}

/// Result of a closure run.
#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub paths: usize,
    pub seed: u64,
    pub l1: Vec<f64>,
    pub noise: Vec<f64>,
    pub max_l1: f64,
    /// `max_n l1[n] / noise[n]`.
    pub max_noise_ratio: f64,
    pub l1_tolerance: f64,
}

impl McReport {
    pub fn passed(&self) -> bool {
        self.max_l1 <= self.l1_tolerance
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# slice l1 noise_estimate\n");
        for (n, (a, b)) in self.l1.iter().zip(&self.noise).enumerate() {
            out.push_str(&format!("{n} {a:.6e} {b:.6e}\n"));
        }
        out.push_str(&format!(
            "paths={} seed={} max_l1={:.6e} max_noise_ratio={:.3} l1_tolerance={:.1e} passed={}\n",
            self.paths, self.seed, self.max_l1, self.max_noise_ratio, self.l1_tolerance, self.passed()
        ));
        out
    }
}

pub fn compare(
    problem: &MfgProblem<f64>,
    lambda: f64,
    pair: &SolutionPair<f64>,
    cfg: &SDEConfig,
) -> Result<(SpaceTimeField<f64>, McReport)> {
    let emp = simulate_density(problem, lambda, pair, cfg)?;
    let l1 = l1_distance(&emp, &pair.m)?;
    let noise: Vec<f64> = pair.m.slices().iter().map(|m| l1_noise_estimate(m, cfg.paths)).collect();
    let max_l1 = l1.iter().copied().fold(0.0, f64::max);
    let max_noise_ratio = l1.iter().zip(&noise).map(|(a, b)| a / b).fold(0.0, f64::max);
    Ok((emp, McReport { paths: cfg.paths, seed: cfg.seed, l1, noise, max_l1, max_noise_ratio, l1_tolerance: cfg.l1_tolerance }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::trivial_solution;
    use crate::grid::{TimeGrid, VectorField};
    use crate::hamiltonian::HamiltonianModel;
    use crate::system::{Coupling, Potential, ProblemData};
    use std::f64::consts::PI;

    fn problem(dim: usize, n: usize, nt: usize, drift: f64) -> MfgProblem<f64> {
        let g = PeriodicGrid::new(dim, n).unwrap();
        MfgProblem::new(ProblemData {
            time: TimeGrid::new(0.05, nt).unwrap(),
            alpha: 0.5,
            hamiltonian: HamiltonianModel::iso_power(1.5, Field::constant(g, 1.0), 3.0).unwrap(),
            drift: VectorField::new((0..dim).map(|_| Field::constant(g, drift)).collect()).unwrap(),
            potential: Potential { spatial: Field::zeros(g), coupling: Coupling::Arctan },
            terminal: Field::zeros(g),
            initial: Field::from_fn(g, |x: [f64; 2]| 1.0 + 0.2 * (2.0 * PI * x[0]).cos()),
            m_floor: 1e-10,
        })
        .unwrap()
    }

    fn zero_u(p: &MfgProblem<f64>) -> SolutionPair<f64> {
        let m = SpaceTimeField::new(*p.time(), vec![p.initial().clone(); p.time().len()]).unwrap();
        SolutionPair::new(SpaceTimeField::zeros(*p.grid(), *p.time()), m).unwrap()
    }

    #[test]
    fn l1_distance_examples() {
        let g = PeriodicGrid::new(1, 16).unwrap();
        let t = TimeGrid::new(1.0, 1).unwrap();
        let a = SpaceTimeField::from_fn(g, t, |x: [f64; 2], _| (3.0 * x[0]).sin());
        assert_eq!(l1_distance(&a, &a).unwrap(), vec![0.0, 0.0]);
        let delta = 0.3;
        let b = SpaceTimeField::from_fn(g, t, |x: [f64; 2], _| (3.0 * x[0]).sin() + if x[0] < 0.5 { delta } else { -delta });
        for d in l1_distance(&a, &b).unwrap() {
            assert!((d - delta).abs() < 1e-15);
        }
        assert_eq!(l1_distance(&a, &b).unwrap(), l1_distance(&b, &a).unwrap());
        let other = SpaceTimeField::zeros(PeriodicGrid::new(1, 8).unwrap(), t);
        assert!(matches!(l1_distance(&a, &other), Err(MfgError::GridMismatch(_))));
    }

    #[test]
    fn dt_sde_must_divide_solver_step() {
        let mut c = SDEConfig { dt_sde: Some(0.25e-3), ..Default::default() };
        assert_eq!(c.substeps(1e-3).unwrap(), 4);
        c.dt_sde = Some(0.3e-3);
        assert!(matches!(c.substeps(1e-3), Err(MfgError::Config { .. })));
        c.paths = 0;
        assert!(c.substeps(1e-3).is_err());
    }

    #[test]
    fn inverse_cdf_reproduces_first_moment() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        let s = DensitySampler::new(&Field::from_fn(g, |x: [f64; 2]| 1.0 + 0.2 * (2.0 * PI * x[0]).cos())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 200_000;
        let mean: f64 = (0..m).map(|_| (2.0 * PI * s.sample(&mut rng)[0]).cos()).sum::<f64>() / m as f64;
        // ∫ cos(2πx)(1 + 0.2cos(2πx)) dx = 0.1; sd of cos is ≈ 0.71
        assert!((mean - 0.1).abs() < 4.0 * 0.71 / (m as f64).sqrt(), "{mean}");
    }

    #[test]
    fn rejection_reproduces_first_moment_in_2d() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let s = DensitySampler::new(&Field::from_fn(g, |x: [f64; 2]| 1.0 + 0.3 * (2.0 * PI * x[1]).sin())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 200_000;
        let (mut a, mut b) = (0.0, 0.0);
        for _ in 0..m {
            let x = s.sample(&mut rng);
            a += (2.0 * PI * x[1]).sin();
            b += (2.0 * PI * x[0]).cos();
        }
        let tol = 4.0 * 0.72 / (m as f64).sqrt();
        assert!((a / m as f64 - 0.15).abs() < tol);
        assert!((b / m as f64).abs() < tol);
    }

    #[test]
    fn slices_integrate_to_one_and_seed_is_reproducible() {
        let p = problem(1, 32, 8, 0.0);
        let pair = zero_u(&p);
        let cfg = SDEConfig { paths: 10_000, seed: 11, ..Default::default() };
        let a = simulate_density(&p, 0.0, &pair, &cfg).unwrap();
        for s in a.slices() {
            assert!((s.integrate() - 1.0).abs() < 1e-12);
        }
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| simulate_density(&p, 0.0, &pair, &cfg).unwrap());
        assert_eq!(a.flatten(), b.flatten());
        let c = simulate_density(&p, 0.0, &pair, &SDEConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.flatten(), c.flatten());
    }

    #[test]
    fn trivial_pair_stays_uniform() {
        let p = problem(1, 64, 16, 0.1);
        let pair = trivial_solution(&p).unwrap().pair;
        let cfg = SDEConfig { paths: 100_000, seed: 2, ..Default::default() };
        let (_, rep) = compare(&p, 1.0, &pair, &cfg).unwrap();
        assert!(rep.max_noise_ratio <= 3.0, "{rep:?}");
        assert!(rep.max_noise_ratio > 0.3, "suspiciously small error {rep:?}");
    }

    #[test]
    fn constant_drift_transports_first_mode() {
        // X_t = X_0 - b t + √2 W_t, so E e^{2πiX_t} = 0.1 e^{-4π²t} e^{-2πi b t}
        let b = 5.0;
        let p = problem(1, 64, 20, b);
        let pair = zero_u(&p);
        let cfg = SDEConfig { paths: 400_000, seed: 9, dt_sde: Some(0.05 / 80.0), ..Default::default() };
        let emp = simulate_density(&p, 0.0, &pair, &cfg).unwrap();
        let last = emp.slice(20);
        let re = last.map_indexed(|i, v| v * (2.0 * PI * i as f64 / 64.0).cos()).integrate();
        let im = last.map_indexed(|i, v| v * (2.0 * PI * i as f64 / 64.0).sin()).integrate();
        let t = 0.05;
        let amp = 0.1 * (-4.0 * PI * PI * t).exp();
        let (er, ei) = (amp * (2.0 * PI * b * t).cos(), -amp * (2.0 * PI * b * t).sin());
        assert!((re - er).abs() < 4.5e-3 && (im - ei).abs() < 4.5e-3, "{re} {im} vs {er} {ei}");
    }

    #[test]
    fn noise_estimate_scales_like_inverse_sqrt() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        let m = Field::constant(g, 1.0);
        let r = l1_noise_estimate(&m, 10_000) / l1_noise_estimate(&m, 40_000);
        assert!((r - 2.0).abs() < 1e-12);
    }
}
