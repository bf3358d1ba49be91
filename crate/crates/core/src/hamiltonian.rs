//! Congestion Hamiltonians, the model Lagrangian, a brute-force Legendre
//! transform and a sampling-based checker for the structural hypotheses the
//! existence and uniqueness theory needs.
//!
//! Every Hamiltonian handled here has the pointwise form
//!
//! ```text
//! H(x, p) = w(x) (1 + |p|²)^{γ/2} - k(x)
//! ```
//!
//! The model `H₀ = c(x) ((1 + |p|²)^{γ/2} - κ)` gives `w = c`, `k = κ c`, and
//! the continuation blend `H_λ = (1-λ) H₀ + λ (1 + |p|²)^{γ/2}` gives
//! `w = (1-λ) c + λ`, `k = (1-λ) κ c`. The offset `κ` only shifts the value;
//! with `κ ≥ 1` the model is the conjugate of a nonnegative Lagrangian.

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MfgError, Result};
use crate::grid::Field;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HamiltonianKind<S> {
    /// `c(x) ((1 + |p|²)^{γ/2} - κ)`
    IsoPower,
    /// `(1-λ) H₀ + λ (1 + |p|²)^{γ/2}` with `H₀` the iso-power model.
    LambdaBlend(S),
}

/// Value, gradient and Hessian in `p` at one point. Unused entries are zero
/// when `d = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianJet<S> {
    pub value: S,
    pub grad: [S; 2],
    pub hess: [[S; 2]; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianModel<S> {
    gamma: S,
    weight: Field<S>,
    offset: S,
    kind: HamiltonianKind<S>,
}

impl<S: Scalar> HamiltonianModel<S> {
    /// The iso-power model `c(x) ((1 + |p|²)^{γ/2} - κ)`.
    pub fn iso_power(gamma: S, weight: Field<S>, offset: S) -> Result<Self> {
        if !(gamma > S::one() && gamma < S::lit(2.0)) {
            return Err(MfgError::InvalidArgument(format!("gamma = {gamma} must lie in (1, 2)")));
        }
        weight.check_finite("hamiltonian weight")?;
        if !(weight.min() > S::zero()) {
            return Err(MfgError::InvalidArgument(format!(
                "hamiltonian weight must be positive (min {})",
                weight.min()
            )));
        }
        if !(offset >= S::zero()) || !offset.is_finite() {
            return Err(MfgError::InvalidArgument(format!("offset {offset} must be finite and >= 0")));
        }
        Ok(Self { gamma, weight, offset, kind: HamiltonianKind::IsoPower })
    }

    /// Same `H₀`, blended towards `(1 + |p|²)^{γ/2}` with parameter `λ ∈ [0, 1]`.
    pub fn blended(&self, lambda: S) -> Result<Self> {
        if !(lambda >= S::zero() && lambda <= S::one()) {
            return Err(MfgError::InvalidArgument(format!("lambda = {lambda} outside [0, 1]")));
        }
        Ok(Self { kind: HamiltonianKind::LambdaBlend(lambda), ..self.clone() })
    }

    #[inline]
    pub fn gamma(&self) -> S {
        self.gamma
    }

    /// Conjugate exponent `γ' = γ / (γ - 1)`.
    #[inline]
    pub fn gamma_conjugate(&self) -> S {
        self.gamma / (self.gamma - S::one())
    }

    #[inline]
    pub fn weight(&self) -> &Field<S> {
        &self.weight
    }

    #[inline]
    pub fn offset(&self) -> S {
        self.offset
    }

    #[inline]
    pub fn kind(&self) -> HamiltonianKind<S> {
        self.kind
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.weight.grid().dim()
    }

    /// `(w, k)` of the pointwise form `w s^{γ/2} - k` at node `idx`.
    #[inline]
    pub fn coefficients(&self, idx: usize) -> (S, S) {
        let c = self.weight.values()[idx];
        match self.kind {
            HamiltonianKind::IsoPower => (c, c * self.offset),
            HamiltonianKind::LambdaBlend(l) => {
                let one = S::one();
                ((one - l) * c + l, (one - l) * c * self.offset)
            }
        }
    }

    #[inline]
    fn norm2(&self, p: [S; 2]) -> S {
        if self.dim() == 1 {
            p[0] * p[0]
        } else {
            p[0] * p[0] + p[1] * p[1]
        }
    }

    pub fn h_eval(&self, idx: usize, p: [S; 2]) -> S {
        let (w, k) = self.coefficients(idx);
        w * (S::one() + self.norm2(p)).powf(self.gamma / S::lit(2.0)) - k
    }

    pub fn h_grad(&self, idx: usize, p: [S; 2]) -> [S; 2] {
        self.jet(idx, p).grad
    }

    pub fn h_hess(&self, idx: usize, p: [S; 2]) -> [[S; 2]; 2] {
        self.jet(idx, p).hess
    }

    /// Value, gradient and Hessian at once.
    pub fn jet(&self, idx: usize, p: [S; 2]) -> HamiltonianJet<S> {
        let (w, k) = self.coefficients(idx);
        let mut p = p;
        if self.dim() == 1 {
            p[1] = S::zero();
        }
        let g = self.gamma;
        let half = g / S::lit(2.0);
        let s = S::one() + p[0] * p[0] + p[1] * p[1];
        let s_pow = s.powf(half);
        let s_m1 = s_pow / s; // s^{γ/2 - 1}
        let s_m2 = s_m1 / s; // s^{γ/2 - 2}
        let a = w * g * s_m1;
        let b = w * g * (g - S::lit(2.0)) * s_m2;
        let mut hess = [[S::zero(); 2]; 2];
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                hess[i][j] = b * p[i] * p[j] + if i == j { a } else { S::zero() };
            }
        }
        HamiltonianJet { value: w * s_pow - k, grad: [a * p[0], a * p[1]], hess }
    }

    /// Smallest eigenvalue of `D²_pp H(x_idx, p)`.
    pub fn min_hess_eigenvalue(&self, idx: usize, p: [S; 2]) -> S {
        let h = self.h_hess(idx, p);
        if self.dim() == 1 {
            return h[0][0];
        }
        let half_tr = (h[0][0] + h[1][1]) / S::lit(2.0);
        let half_diff = (h[0][0] - h[1][1]) / S::lit(2.0);
        half_tr - (half_diff * half_diff + h[0][1] * h[1][0]).sqrt()
    }

    /// The two constituents `(H₀, (1 + |p|²)^{γ/2})` of the blend.
    pub fn blend_constituents(&self, idx: usize, p: [S; 2]) -> (S, S) {
        let c = self.weight.values()[idx];
        let unit = (S::one() + self.norm2(p)).powf(self.gamma / S::lit(2.0));
        (c * (unit - self.offset), unit)
    }
}

/// `L₀(x, v) = a(x) (1 + |v|²)^{γ'/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianModel<S> {
    gamma_prime: S,
    weight: Field<S>,
}

impl<S: Scalar> LagrangianModel<S> {
    pub fn new(gamma_prime: S, weight: Field<S>) -> Result<Self> {
        if !(gamma_prime > S::lit(2.0)) || !gamma_prime.is_finite() {
            return Err(MfgError::InvalidArgument(format!(
                "gamma' = {gamma_prime} must exceed 2 (sub-quadratic Hamiltonian)"
            )));
        }
        weight.check_finite("lagrangian weight")?;
        if !(weight.min() > S::zero()) {
            return Err(MfgError::InvalidArgument("lagrangian weight must be positive".into()));
        }
        Ok(Self { gamma_prime, weight })
    }

    #[inline]
    pub fn gamma_prime(&self) -> S {
        self.gamma_prime
    }

    /// `γ = γ' / (γ' - 1)`.
    #[inline]
    pub fn gamma(&self) -> S {
        self.gamma_prime / (self.gamma_prime - S::one())
    }

    #[inline]
    pub fn weight(&self) -> &Field<S> {
        &self.weight
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.weight.grid().dim()
    }

    pub fn eval(&self, idx: usize, v: [S; 2]) -> S {
        let s = S::one() + v[0] * v[0] + v[1] * v[1];
        self.weight.values()[idx] * s.powf(self.gamma_prime / S::lit(2.0))
    }

    fn grad_hess(&self, idx: usize, v: [S; 2]) -> ([S; 2], [[S; 2]; 2]) {
        let a = self.weight.values()[idx];
        let g = self.gamma_prime;
        let s = S::one() + v[0] * v[0] + v[1] * v[1];
        let s1 = s.powf(g / S::lit(2.0) - S::one());
        let s2 = s1 / s;
        let c1 = a * g * s1;
        let c2 = a * g * (g - S::lit(2.0)) * s2;
        let mut hess = [[S::zero(); 2]; 2];
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                hess[i][j] = c2 * v[i] * v[j] + if i == j { c1 } else { S::zero() };
            }
        }
        ([c1 * v[0], c1 * v[1]], hess)
    }

    /// Growth constants `(C'₁, C'₂)` of `C'₁|p|^γ/γ - c'₁ ≤ H₀ ≤ C'₂|p|^γ/γ + c'₂`
    /// implied by `a|v|^{γ'} ≤ L₀ ≤ 2^{γ'/2-1} a (1 + |v|^{γ'})`.
    pub fn growth_constants(&self) -> (S, S) {
        let gp = self.gamma_prime;
        let g = self.gamma();
        let upper_l = self.weight.max() * gp * S::lit(2.0).powf(gp / S::lit(2.0) - S::one());
        let lower_l = self.weight.min() * gp;
        (upper_l.powf(S::one() - g), lower_l.powf(S::one() - g))
    }
}

fn solve2<S: Scalar>(dim: usize, m: [[S; 2]; 2], r: [S; 2]) -> [S; 2] {
    if dim == 1 {
        return [r[0] / m[0][0], S::zero()];
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [(m[1][1] * r[0] - m[0][1] * r[1]) / det, (m[0][0] * r[1] - m[1][0] * r[0]) / det]
}

fn inverse2<S: Scalar>(dim: usize, m: [[S; 2]; 2]) -> [[S; 2]; 2] {
    if dim == 1 {
        return [[S::one() / m[0][0], S::zero()], [S::zero(), S::zero()]];
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// Samples of a `d`-ball of radius `radius`, `samples` points per axis.
fn ball_samples<S: Scalar>(dim: usize, radius: S, samples: usize) -> Vec<[S; 2]> {
    let n = samples.max(2);
    let step = S::lit(2.0) * radius / S::of_usize(n - 1);
    let axis: Vec<S> = (0..n).map(|i| -radius + S::of_usize(i) * step).collect();
    let mut out = Vec::new();
    if dim == 1 {
        out.extend(axis.iter().map(|&x| [x, S::zero()]));
    } else {
        for &a in &axis {
            for &b in &axis {
                if a * a + b * b <= radius * radius {
                    out.push([a, b]);
                }
            }
        }
    }
    out
}

/// Result of one conjugate evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugatePoint<S> {
    pub value: S,
    pub argmax: [S; 2],
}

/// Maximizes a smooth concave objective: grid search over the sampled ball,
/// then Newton ascent from the best sample.
fn maximize<S: Scalar>(
    dim: usize,
    radius: S,
    samples: usize,
    objective: impl Fn([S; 2]) -> S,
    derivatives: impl Fn([S; 2]) -> ([S; 2], [[S; 2]; 2]),
) -> Result<ConjugatePoint<S>> {
    if !(radius > S::zero()) || samples < 3 {
        return Err(MfgError::InvalidArgument("sampling ball must have radius > 0 and >= 3 samples".into()));
    }
    let pts = ball_samples(dim, radius, samples);
    let (mut best, mut best_val) = (pts[0], objective(pts[0]));
    for &p in &pts[1..] {
        let v = objective(p);
        if v > best_val {
            best = p;
            best_val = v;
        }
    }
    let spacing = S::lit(2.0) * radius / S::of_usize(samples.max(2) - 1);
    let r_best = (best[0] * best[0] + best[1] * best[1]).sqrt();
    if r_best > radius - spacing {
        return Err(MfgError::BoundaryMaximizer { radius: radius.to_f64_lossy() });
    }
    let mut x = best;
    for _ in 0..100 {
        let (g, h) = derivatives(x);
        let step = solve2(dim, h, g);
        x = [x[0] - step[0], x[1] - step[1]];
        let size = Float::abs(step[0]) + Float::abs(step[1]);
        if size <= S::epsilon() * S::lit(4.0) * (S::one() + Float::abs(x[0]) + Float::abs(x[1])) {
            break;
        }
    }
    if (x[0] * x[0] + x[1] * x[1]).sqrt() >= radius {
        return Err(MfgError::BoundaryMaximizer { radius: radius.to_f64_lossy() });
    }
    Ok(ConjugatePoint { value: objective(x), argmax: x })
}

/// `H₀(x, p) = sup_v [-v·p - L₀(x, v)]` by brute force over the `v`-ball of
/// radius `v_radius` (`v_samples` per axis) refined by Newton ascent.
pub fn legendre_transform<S: Scalar>(
    lagrangian: &LagrangianModel<S>,
    idx: usize,
    p: [S; 2],
    v_radius: S,
    v_samples: usize,
) -> Result<S> {
    legendre_point(lagrangian, idx, p, v_radius, v_samples).map(|c| c.value)
}

/// Like [`legendre_transform`] but also returns the maximizing velocity.
pub fn legendre_point<S: Scalar>(
    lagrangian: &LagrangianModel<S>,
    idx: usize,
    p: [S; 2],
    v_radius: S,
    v_samples: usize,
) -> Result<ConjugatePoint<S>> {
    let dim = lagrangian.dim();
    maximize(
        dim,
        v_radius,
        v_samples,
        |v| -(v[0] * p[0] + v[1] * p[1]) - lagrangian.eval(idx, v),
        |v| {
            let (g, h) = lagrangian.grad_hess(idx, v);
            (
                [-p[0] - g[0], -p[1] - g[1]],
                [[-h[0][0], -h[0][1]], [-h[1][0], -h[1][1]]],
            )
        },
    )
}

/// Transform of the numerically transformed `H₀`: `sup_p [-p·v - H₀(x, p)]`.
///
/// The inner transform is differentiated through its maximizer:
/// `D_p H₀ = -v*(p)` and `D²_pp H₀ = (D²_vv L₀(v*))⁻¹`.
pub fn double_legendre_transform<S: Scalar>(
    lagrangian: &LagrangianModel<S>,
    idx: usize,
    v: [S; 2],
    p_radius: S,
    p_samples: usize,
    v_radius: S,
    v_samples: usize,
) -> Result<S> {
    let dim = lagrangian.dim();
    let inner = |p: [S; 2]| legendre_point(lagrangian, idx, p, v_radius, v_samples);
    // Error from the inner maximization is surfaced after the outer search.
    let failed = std::cell::Cell::new(None::<MfgError>);
    let result = maximize(
        dim,
        p_radius,
        p_samples,
        |p| match inner(p) {
            Ok(c) => -(p[0] * v[0] + p[1] * v[1]) - c.value,
            Err(e) => {
                failed.set(Some(e));
                S::nan()
            }
        },
        |p| match inner(p) {
            Ok(c) => {
                let (_, hl) = lagrangian.grad_hess(idx, c.argmax);
                let hh = inverse2(dim, hl);
                (
                    [-v[0] + c.argmax[0], -v[1] + c.argmax[1]],
                    [[-hh[0][0], -hh[0][1]], [-hh[1][0], -hh[1][1]]],
                )
            }
            Err(e) => {
                failed.set(Some(e));
                ([S::nan(); 2], [[S::one(), S::zero()], [S::zero(), S::one()]])
            }
        },
    );
    if let Some(e) = failed.take() {
        return Err(e);
    }
    result.map(|c| c.value)
}

/// Sampling plan for [`check_assumptions`]: every `node_stride`-th node, each
/// paired with `p_per_node` uniform samples of the `p`-ball plus a fixed
/// log-spaced ray from `1e-3` to `p_radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub p_radius: f64,
    pub p_per_node: usize,
    pub node_stride: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { p_radius: 10.0, p_per_node: 64, node_stride: 1, seed: 7 }
    }
}

/// One verified hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Signed slack of the inequality at the worst sample (positive = holds).
    pub margin: f64,
    /// `(node, p)` where the margin was attained.
    pub worst: Option<(usize, [f64; 2])>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    pub samples: usize,
    pub seed: u64,
    /// Sampled minimum of the smallest Hessian eigenvalue.
    pub min_hessian_eigenvalue: f64,
    /// `(c, C)` for the coercivity bound `p·D_pH - H ≥ c|p|^γ - C`.
    pub coercivity: (f64, f64),
    /// `C` for `|D_pH| ≤ C|p|^{γ-1} + C`.
    pub gradient_growth: f64,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Worst {
    margin: f64,
    at: Option<(usize, [f64; 2])>,
}

impl Worst {
    fn new() -> Self {
        Self { margin: f64::INFINITY, at: None }
    }

    fn offer(&mut self, margin: f64, idx: usize, p: [f64; 2]) {
        if margin < self.margin || self.at.is_none() && margin.is_nan() {
            self.margin = margin;
            self.at = Some((idx, p));
        }
    }
}

/// Verifies the structural hypotheses on `model` over a sampled set of `(x, p)`.
pub fn check_assumptions<S: Scalar>(
    model: &HamiltonianModel<S>,
    alpha: f64,
    dim: usize,
    spec: &SampleSpec,
) -> Result<AssumptionReport> {
    let grid = *model.weight().grid();
    if spec.p_per_node == 0 || spec.node_stride == 0 || !(spec.p_radius > 0.0) {
        return Err(MfgError::InvalidArgument("empty sample set".into()));
    }
    if dim != model.dim() {
        return Err(MfgError::InvalidArgument(format!(
            "dimension {dim} does not match the model's {}",
            model.dim()
        )));
    }
    let gamma = model.gamma().to_f64_lossy();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut points: Vec<(usize, [f64; 2])> = Vec::new();
    for idx in (0..grid.len()).step_by(spec.node_stride) {
        for j in 0..24 {
            let r = 1e-3 * (spec.p_radius / 1e-3).powf(j as f64 / 23.0);
            let dir = if dim == 1 { [1.0, 0.0] } else { [0.6, 0.8] };
            points.push((idx, [r * dir[0], r * dir[1]]));
        }
        for _ in 0..spec.p_per_node {
            let p = loop {
                let a: f64 = rng.random_range(-1.0..=1.0);
                let b: f64 = if dim == 2 { rng.random_range(-1.0..=1.0) } else { 0.0 };
                if a * a + b * b <= 1.0 {
                    break [a * spec.p_radius, b * spec.p_radius];
                }
            };
            points.push((idx, p));
        }
    }

    let to_s = |p: [f64; 2]| [S::lit(p[0]), S::lit(p[1])];
    let norm = |p: [f64; 2]| (p[0] * p[0] + p[1] * p[1]).sqrt();

    let mut legendre_sign = Worst::new();
    let mut nonneg_lagrangian = Worst::new();
    let mut convexity = Worst::new();
    let mut uniqueness = Worst::new();
    let mut coercive_ratio = f64::INFINITY;
    let mut growth_lo = f64::INFINITY;
    let mut growth_hi: f64 = 0.0;
    let mut grad_growth: f64 = 0.0;

    for &(idx, p) in &points {
        let jet = model.jet(idx, to_s(p));
        let h = jet.value.to_f64_lossy();
        let gp = [jet.grad[0].to_f64_lossy(), jet.grad[1].to_f64_lossy()];
        let p_dot_g = p[0] * gp[0] + p[1] * gp[1];
        let hess = jet.hess.map(|r| r.map(|v| v.to_f64_lossy()));
        let quad = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| p[i] * hess[i][j] * p[j]).sum::<f64>();
        let h0 = model.h_eval(idx, [S::zero(); 2]).to_f64_lossy();
        let r = norm(p);

        legendre_sign.offer(h0 - (h - p_dot_g), idx, p);
        nonneg_lagrangian.offer(-h0, idx, p);
        convexity.offer(model.min_hess_eigenvalue(idx, to_s(p)).to_f64_lossy(), idx, p);
        if r > 0.0 {
            uniqueness.offer(p_dot_g - h - 0.25 * alpha * quad, idx, p);
        }
        if r >= 0.5 * spec.p_radius {
            coercive_ratio = coercive_ratio.min((p_dot_g - h) / r.powf(gamma));
            let g = h * gamma / r.powf(gamma);
            growth_lo = growth_lo.min(g);
            growth_hi = growth_hi.max(g);
        }
        grad_growth = grad_growth.max(norm(gp) / (r.powf(gamma - 1.0) + 1.0));
    }
    let c_coercive = 0.5 * coercive_ratio;
    let big_c = points
        .iter()
        .map(|&(idx, p)| {
            let jet = model.jet(idx, to_s(p));
            let h = jet.value.to_f64_lossy();
            let pg = p[0] * jet.grad[0].to_f64_lossy() + p[1] * jet.grad[1].to_f64_lossy();
            c_coercive * norm(p).powf(gamma) - (pg - h)
        })
        .fold(0.0_f64, f64::max);

    let mut checks = Vec::new();
    let mut push = |name: &'static str, strict: bool, w: Worst, detail: String| {
        let passed = if strict { w.margin > 0.0 } else { w.margin >= 0.0 };
        checks.push(AssumptionCheck { name, passed, margin: w.margin, worst: w.at, detail });
    };
    push("legendre_sign", false, legendre_sign, "H(x,p) - p·D_pH(x,p) <= H(x,0)".into());
    push("nonnegative_lagrangian", false, nonneg_lagrangian, "H(x,0) <= 0, i.e. L >= 0".into());
    push("strict_convexity", true, convexity, "smallest eigenvalue of D²_pp H > 0".into());
    push(
        "uniqueness_inequality",
        true,
        uniqueness,
        format!("D_pH·p - H > (α/4) pᵀD²H p for p != 0, α = {alpha}"),
    );
    checks.push(AssumptionCheck {
        name: "growth",
        passed: growth_lo > 0.0 && growth_hi.is_finite(),
        margin: growth_lo,
        worst: None,
        detail: format!("H/(|p|^γ/γ) in [{growth_lo:.6}, {growth_hi:.6}] for |p| >= {}", 0.5 * spec.p_radius),
    });
    checks.push(AssumptionCheck {
        name: "coercivity",
        passed: c_coercive > 0.0 && big_c.is_finite(),
        margin: c_coercive,
        worst: None,
        detail: format!("p·D_pH - H >= c|p|^γ - C with c = {c_coercive:.6}, C = {big_c:.6}"),
    });
    checks.push(AssumptionCheck {
        name: "gradient_growth",
        passed: grad_growth.is_finite(),
        margin: grad_growth,
        worst: None,
        detail: format!("|D_pH| <= C|p|^(γ-1) + C with C = {grad_growth:.6}"),
    });
    let alpha_bound = if dim <= 2 { f64::INFINITY } else { 2.0 / (dim as f64 - 2.0) };
    checks.push(AssumptionCheck {
        name: "congestion_exponent",
        passed: alpha >= 0.0 && alpha < alpha_bound,
        margin: alpha_bound - alpha,
        worst: None,
        detail: format!("0 <= α < 2/(d-2) (= {alpha_bound} for d = {dim})"),
    });
    checks.push(AssumptionCheck {
        name: "subquadratic",
        passed: gamma < 2.0,
        margin: 2.0 - gamma,
        worst: None,
        detail: "γ < 2".into(),
    });
    checks.push(AssumptionCheck {
        name: "alpha_below_4_over_gamma",
        passed: alpha < 4.0 / gamma,
        margin: 4.0 / gamma - alpha,
        worst: None,
        detail: format!("α < 4/γ = {:.6}", 4.0 / gamma),
    });

    let min_eig = checks.iter().find(|c| c.name == "strict_convexity").map_or(f64::NAN, |c| c.margin);
    Ok(AssumptionReport {
        checks,
        samples: points.len(),
        seed: spec.seed,
        min_hessian_eigenvalue: min_eig,
        coercivity: (c_coercive, big_c),
        gradient_growth: grad_growth,
    })
}
