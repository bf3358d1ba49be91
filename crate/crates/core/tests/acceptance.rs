//! Acceptance criteria at the stated tolerances. Runs without the libtest
//! harness so every `criterion N: PASS|FAIL ...` line reaches stdout.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use mfg_congestion::continuation::{newton_correct, solve_path, trivial_solution, ContinuationPath, SolverConfig};
use mfg_congestion::estimates::{check_inverse_m, check_uniqueness_integrand, run_all, EstimateOptions, Refined};
use mfg_congestion::galerkin::{
    assemble_galerkin_system, energy_constant, galerkin_data_norm, shooting_matrix, solve_galerkin,
    solve_linearized_galerkin, FourierBasis,
};
use mfg_congestion::grid::{Field, SpaceTimeField};
use mfg_congestion::hamiltonian::SampleSpec;
use mfg_congestion::io::{legendre_report, LegendreConfig, ProblemConfig};
use mfg_congestion::linearized::{LinearMethod, LinearSolveOptions, Linearization, LinearizedRhs, Perturbation};
use mfg_congestion::mc::{compare, SDEConfig};
use mfg_congestion::system::{residual_full, MfgProblem, SolutionPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static REPORTED: AtomicUsize = AtomicUsize::new(0);

fn report(n: usize, passed: bool, detail: String) {
    REPORTED.store(n, Ordering::SeqCst);
    println!("criterion {n}: {} {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {n} failed: {detail}");
}

struct Reference {
    problem: MfgProblem<f64>,
    path: ContinuationPath,
    elapsed: Duration,
    refined_problem: MfgProblem<f64>,
    refined_path: ContinuationPath,
}

fn reference() -> &'static Reference {
    static REF: OnceLock<Reference> = OnceLock::new();
    REF.get_or_init(|| {
        let cfg = SolverConfig::default();
        let start = Instant::now();
        let problem = ProblemConfig::reference(64, 64).build().unwrap();
        let path = solve_path(&problem, &cfg).unwrap();
        let elapsed = start.elapsed();
        let refined_problem = ProblemConfig::reference(128, 128).build().unwrap();
        let refined_path = solve_path(&refined_problem, &cfg).unwrap();
        Reference { problem, path, elapsed, refined_problem, refined_path }
    })
}

/// A random smooth space-time field with modes `|k| ≤ 3`.
fn smooth(rng: &mut ChaCha8Rng, p: &MfgProblem<f64>, amp: f64, mean_zero: bool) -> SpaceTimeField<f64> {
    let c: Vec<[f64; 4]> = (0..4).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
    let t_end = p.time().horizon();
    SpaceTimeField::from_fn(*p.grid(), *p.time(), |x, t| {
        let s = t / t_end;
        let mut v = if mean_zero { 0.0 } else { c[0][0] * (1.0 + s) };
        for (k, ck) in c.iter().enumerate().skip(1) {
            let arg = 2.0 * PI * k as f64 * x[0];
            v += (ck[0] + ck[1] * s) * arg.cos() + (ck[2] + ck[3] * s * s) * arg.sin();
        }
        amp * v / 4.0
    })
}

fn criterion_01_trivial_solution() {
    let start = Instant::now();
    let p = ProblemConfig::reference(64, 64).build().unwrap();
    let s = trivial_solution(&p).unwrap();
    let r = residual_full(&p, &p.at_lambda(1.0).unwrap(), &s.pair).unwrap().sup_norm();
    let t = start.elapsed().as_secs_f64();
    report(1, r <= 1e-12 && t < 1.0, format!("residual={r:.3e} (tol 1e-12) runtime={t:.3}s (limit 1s)"));
}

fn criterion_02_end_to_end_continuation() {
    let r = reference();
    let last = r.path.last();
    let residual = residual_full(&r.problem, &r.problem.at_lambda(0.0).unwrap(), &last.pair).unwrap().sup_norm();
    let refined = Refined { problem: &r.refined_problem, pair: &r.refined_path.last().pair };
    let est = run_all(&last.pair, &r.problem, 0.0, Some(refined), &EstimateOptions::default()).unwrap();
    let t = r.elapsed.as_secs_f64();
    let failing: Vec<&str> = est.failures().map(|f| f.name.as_str()).collect();
    report(
        2,
        r.path.completed() && last.lambda == 0.0 && residual <= 1e-8 && t <= 60.0 && est.all_passed(),
        format!(
            "lambda={} residual={residual:.3e} (tol 1e-8) runtime={t:.2}s (limit 60s) steps={} estimate_failures={failing:?}",
            last.lambda,
            r.path.states.len() - 1
        ),
    );
}

fn criterion_03_mass_conservation() {
    let r = reference();
    let worst = r
        .path
        .states
        .iter()
        .chain(&r.refined_path.states)
        .flat_map(|s| s.pair.m.slices().iter().map(|m| (m.integrate() - 1.0).abs()))
        .fold(0.0f64, f64::max);
    let states = r.path.states.len() + r.refined_path.states.len();
    report(3, worst <= 1e-10, format!("max |∫m-1|={worst:.3e} over {states} accepted states (tol 1e-10)"));
}

fn criterion_04_linearization_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let p = ProblemConfig::reference(32, 16).build().unwrap().floored();
    let eps_list = [1e-3, 1e-4, 1e-5];
    let mut ok = true;
    let mut lines = Vec::new();
    for _ in 0..5 {
        let lambda: f64 = rng.random_range(0.0..1.0);
        let l = p.at_lambda(lambda).unwrap();
        let base = SolutionPair::new(smooth(&mut rng, &p, 0.3, false), smooth(&mut rng, &p, 0.3, true).map(|v| 1.0 + v)).unwrap();
        let dir = Perturbation::new(smooth(&mut rng, &p, 1.0, false), smooth(&mut rng, &p, 0.5, false)).unwrap();
        let exact = Linearization::new(&p, &l, &base).unwrap().apply(&dir).unwrap().to_flat();
        let scale = exact.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let r0 = residual_full(&p, &l, &base).unwrap().to_flat();
        let r_scale = r0.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut errs = Vec::new();
        let mut floors = Vec::new();
        for &eps in &eps_list {
            let shift = |s: f64| {
                let mut q = base.clone();
                q.u.axpy(s, &dir.v);
                q.m.axpy(s, &dir.f);
                residual_full(&p, &l, &q).unwrap().to_flat()
            };
            let (plus, minus) = (shift(eps), shift(-eps));
            let e = plus
                .iter()
                .zip(&minus)
                .zip(&exact)
                .map(|((a, b), x)| ((a - b) / (2.0 * eps) - x).abs())
                .fold(0.0f64, f64::max);
            errs.push(e / scale);
            // cancellation error of the difference quotient
            floors.push(1e3 * f64::EPSILON * (r_scale + scale) / (eps * scale));
        }
        for i in 0..2 {
            if errs[i + 1] > floors[i + 1] {
                let order = (errs[i] / errs[i + 1]).log10();
                ok &= order >= 1.0;
            }
            if errs[i] > floors[i] {
                ok &= errs[i + 1] <= errs[i];
            }
        }
        lines.push(format!("lambda={lambda:.3} errs=[{:.2e},{:.2e},{:.2e}]", errs[0], errs[1], errs[2]));
    }
    report(4, ok, format!("central differences, order >= 1 per decade until the roundoff floor; {}", lines.join("; ")));
}

fn band_limited_rhs(seed: u64, p: &MfgProblem<f64>) -> LinearizedRhs<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = FourierBasis::new(*p.grid(), 7).unwrap();
    let time = *p.time();
    let mut coeff = || -> Vec<(f64, f64)> { (0..basis.len()).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect() };
    let (ch, cg, ca, cb) = (coeff(), coeff(), coeff(), coeff());
    let at = |c: &[(f64, f64)], t: f64| {
        basis.reconstruct(&c.iter().map(|(a, b)| a + b * (2.0 * PI * t / time.horizon()).sin()).collect::<Vec<_>>())
    };
    LinearizedRhs {
        h: SpaceTimeField::new(time, (0..time.len()).map(|n| at(&ch, time.time(n))).collect()).unwrap(),
        g: SpaceTimeField::new(time, (0..time.len()).map(|n| at(&cg, time.time(n))).collect()).unwrap(),
        a: at(&ca, 0.0),
        b: at(&cb, 0.0),
    }
}

fn monolithic(p: &MfgProblem<f64>, lin: &Linearization<'_, f64>, rhs: &LinearizedRhs<f64>) -> Perturbation<f64> {
    let opts = LinearSolveOptions { method: LinearMethod::Direct, ..Default::default() };
    let (x, _) = lin.solve(&rhs.to_flat(), &opts).unwrap();
    Perturbation::from_flat(*p.grid(), *p.time(), &x).unwrap()
}

fn sup_diff(a: &Field<f64>, b: &Field<f64>) -> f64 {
    a.zip_map(b, |x, y| x - y).sup_norm()
}

fn criterion_05_galerkin_cross_validation() {
    let coarse = ProblemConfig::reference(32, 64).build().unwrap();
    let fine = ProblemConfig::reference(32, 128).build().unwrap();
    let solve = |p: &MfgProblem<f64>| {
        let l = p.at_lambda(1.0).unwrap();
        let base = trivial_solution(p).unwrap().pair;
        let lin = Linearization::new(p, &l, &base).unwrap();
        let rhs = band_limited_rhs(77, p);
        let basis = FourierBasis::new(*p.grid(), 8).unwrap();
        let (gal, _, _) = solve_linearized_galerkin(&lin, &basis, &rhs).unwrap();
        (gal, monolithic(p, &lin, &rhs))
    };
    let (gal, mono) = solve(&coarse);
    let (_, mono_fine) = solve(&fine);
    let mut agreement = 0.0f64;
    let mut disc = 0.0f64;
    for n in 0..coarse.time().len() {
        agreement = agreement.max(sup_diff(gal.f.slice(n), mono.f.slice(n))).max(sup_diff(gal.v.slice(n), mono.v.slice(n)));
        disc = disc
            .max(sup_diff(mono.f.slice(n), mono_fine.f.slice(2 * n)))
            .max(sup_diff(mono.v.slice(n), mono_fine.v.slice(2 * n)));
    }

    // homogeneous problem with zero split data
    let l = coarse.at_lambda(1.0).unwrap();
    let base = trivial_solution(&coarse).unwrap().pair;
    let lin = Linearization::new(&coarse, &l, &base).unwrap();
    let basis = FourierBasis::new(*coarse.grid(), 8).unwrap();
    let sys = assemble_galerkin_system(&lin, &basis).unwrap();
    let shoot = shooting_matrix(&sys).unwrap();
    let zero = sys.project_rhs(&LinearizedRhs::zeros(*coarse.grid(), *coarse.time())).unwrap();
    let traj = solve_galerkin(&sys, &shoot, &zero).unwrap();
    let homogeneous = traj.a.amax().max(traj.b.amax());

    report(
        5,
        agreement <= 10.0 * disc && homogeneous <= 1e-10,
        format!(
            "N=8 modes: |galerkin-monolithic|={agreement:.3e} <= 10 x discretization {disc:.3e}; homogeneous={homogeneous:.1e} (tol 1e-10); cond={:.2e}",
            shoot.condition_number()
        ),
    );
}

fn criterion_06_energy_estimate() {
    let p = ProblemConfig::reference(32, 32).build().unwrap();
    let l = p.at_lambda(1.0).unwrap();
    let base = trivial_solution(&p).unwrap().pair;
    let lin = Linearization::new(&p, &l, &base).unwrap();
    let basis = FourierBasis::new(*p.grid(), 8).unwrap();
    let sys = assemble_galerkin_system(&lin, &basis).unwrap();
    let shoot = shooting_matrix(&sys).unwrap();
    let c = energy_constant(&sys, &shoot).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut field = || {
            let v: Vec<f64> = (0..p.grid().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            Field::from_values(*p.grid(), v).unwrap()
        };
        let h = SpaceTimeField::new(*p.time(), (0..p.time().len()).map(|_| field()).collect()).unwrap();
        let g = SpaceTimeField::new(*p.time(), (0..p.time().len()).map(|_| field()).collect()).unwrap();
        let rhs = LinearizedRhs { h, g, a: field(), b: field() };
        let (sol, _, _) = solve_linearized_galerkin(&lin, &basis, &rhs).unwrap();
        worst = worst.max(sol.max_l2_in_time() / galerkin_data_norm(&rhs));
    }
    report(6, c.is_finite() && worst <= c, format!("C={c:.4e}, max ratio over 20 random data={worst:.4e}"));
}

fn criterion_07_uniqueness() {
    let r = reference();
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut ok = true;
    let mut lines = Vec::new();
    for target in [0.5, 0.0] {
        let state = r.path.states.iter().find(|s| s.lambda == target).expect("the path visits the target");
        let l = r.problem.at_lambda(target).unwrap();
        let mut results = Vec::new();
        for _ in 0..2 {
            let mut start = state.pair.clone();
            start.u.axpy(1.0, &smooth(&mut rng, &r.problem, 0.05, false));
            start.m.axpy(1.0, &smooth(&mut rng, &r.problem, 0.05, true));
            let (pair, _) = newton_correct(&r.problem, &l, &start, &cfg).unwrap();
            results.push(pair);
        }
        let d = results[0].distance(&results[1]);
        let uc = check_uniqueness_integrand(&results[0], &r.problem, target, &SampleSpec::default()).unwrap();
        ok &= d <= 1e-6 && uc.passed;
        lines.push(format!(
            "lambda={target}: distance={d:.2e} integrand_pass={} min(i)={:.3e} alpha_margin={:.4}",
            uc.passed,
            uc.value("min_i_on_solution").unwrap(),
            uc.value("alpha_margin_4_over_gamma").unwrap()
        ));
    }
    report(7, ok, lines.join("; "));
}

fn criterion_08_positivity() {
    let r = reference();
    let mut min_m = f64::INFINITY;
    let mut floor = false;
    for s in &r.path.states {
        min_m = min_m.min(s.pair.m.min());
        floor |= residual_full(&r.problem, &r.problem.at_lambda(s.lambda).unwrap(), &s.pair).unwrap().floor_active;
    }
    let refined = Refined { problem: &r.refined_problem, pair: &r.refined_path.last().pair };
    let inv = check_inverse_m(&r.path.last().pair, &[1.0, 2.0], Some(refined)).unwrap();
    report(
        8,
        min_m > 0.0 && !floor && inv.passed,
        format!(
            "min m={min_m:.4} floor_active={floor} |1/m|={:.4} refined={:.4}",
            inv.value("inv_m_sup").unwrap(),
            inv.value("inv_m_sup_refined").unwrap()
        ),
    );
}

fn criterion_09_monte_carlo_closure() {
    let r = reference();
    let triv = trivial_solution(&r.problem).unwrap();
    let base = SDEConfig { paths: 100_000, seed: 99, ..Default::default() };
    let (_, uni) = compare(&r.problem, 1.0, &triv.pair, &base).unwrap();
    let (_, m1) = compare(&r.problem, 0.0, &r.path.last().pair, &base).unwrap();
    let (_, m4) = compare(&r.problem, 0.0, &r.path.last().pair, &SDEConfig { paths: 400_000, ..base.clone() }).unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ratio = mean(&m1.l1) / mean(&m4.l1);
    report(
        9,
        uni.max_noise_ratio <= 3.0 && m1.max_l1 <= 5e-2 && (1.4..=2.8).contains(&ratio),
        format!(
            "lambda=1 max L1/noise={:.3} (<= 3); lambda=0 max L1={:.3e} (<= 5e-2); mean L1 ratio M->4M={ratio:.3} (in [1.4, 2.8])",
            uni.max_noise_ratio, m1.max_l1
        ),
    );
}

fn criterion_10_legendre_oracle() {
    let rep = legendre_report(&LegendreConfig::default()).unwrap();
    let ratios = rep.growth.iter().map(|g| g.ratio);
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
    report(
        10,
        rep.passed() && rep.duality.len() == 100 && rep.max_deviation <= 1e-6,
        format!(
            "max double-transform deviation={:.2e} over {} samples (tol 1e-6); growth ratio in [{lo:.4}, {hi:.4}] within [{:.4}, {:.4}] for |p| in [10, 100]",
            rep.max_deviation,
            rep.duality.len(),
            rep.growth[0].lower,
            rep.growth[0].upper
        ),
    );
}

fn main() -> ExitCode {
    let criteria: [fn(); 10] = [
        criterion_01_trivial_solution,
        criterion_02_end_to_end_continuation,
        criterion_03_mass_conservation,
        criterion_04_linearization_consistency,
        criterion_05_galerkin_cross_validation,
        criterion_06_energy_estimate,
        criterion_07_uniqueness,
        criterion_08_positivity,
        criterion_09_monte_carlo_closure,
        criterion_10_legendre_oracle,
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, run) in criteria.iter().enumerate() {
        let n = i + 1;
        if filter.as_deref().is_some_and(|f| !format!("criterion_{n:02}").contains(f)) {
            continue;
        }
        if panic::catch_unwind(AssertUnwindSafe(run)).is_err() {
            failed += 1;
            if REPORTED.load(Ordering::SeqCst) != n {
                println!("criterion {n}: FAIL panicked before reporting");
            }
        }
    }
    println!("acceptance: {failed} failed");
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
