//! Run configuration, the binary field format and text exports.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::continuation::SolverConfig;
use crate::error::{MfgError, Result};
use crate::estimates::EstimateOptions;
use crate::grid::{Field, PeriodicGrid, SpaceTimeField, TimeGrid, VectorField};
use crate::hamiltonian::{double_legendre_transform, legendre_transform, HamiltonianModel, LagrangianModel, SampleSpec};
use crate::mc::SDEConfig;
use crate::system::{Coupling, MfgProblem, Potential, ProblemData};

/// One real Fourier term `cos · cos(2π k·x) + sin · sin(2π k·x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: [i64; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Zero,
    One,
    /// `0.1 sin(2πx₁)`
    ReferenceDrift,
    /// `0.1 cos(2πx₁)`
    ReferencePotential,
    /// `0.05 cos(2πx₁)`
    ReferenceTerminal,
    /// `1 + 0.2 cos(2πx₁)`
    ReferenceInitial,
}

impl Preset {
    fn expand(self) -> (f64, Vec<FourierTerm>) {
        let t = |cos: f64, sin: f64| vec![FourierTerm { k: [1, 0], cos, sin }];
        match self {
            Preset::Zero => (0.0, vec![]),
            Preset::One => (1.0, vec![]),
            Preset::ReferenceDrift => (0.0, t(0.0, 0.1)),
            Preset::ReferencePotential => (0.0, t(0.1, 0.0)),
            Preset::ReferenceTerminal => (0.0, t(0.05, 0.0)),
            Preset::ReferenceInitial => (1.0, t(0.2, 0.0)),
        }
    }
}

/// A grid-independent function on the torus: either a named preset or a
/// constant plus a truncated Fourier series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub constant: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<FourierTerm>,
}

impl FunctionSpec {
    pub fn preset(p: Preset) -> Self {
        Self { preset: Some(p), ..Default::default() }
    }

    pub fn constant(c: f64) -> Self {
        Self { constant: c, ..Default::default() }
    }

    pub fn validate(&self, field: &str, dim: usize) -> Result<()> {
        if self.preset.is_some() && (self.constant != 0.0 || !self.terms.is_empty()) {
            return Err(MfgError::config(field, "a preset excludes `constant` and `terms`"));
        }
        if !self.constant.is_finite() {
            return Err(MfgError::config(field, "constant is not finite"));
        }
        for t in &self.terms {
            if !(t.cos.is_finite() && t.sin.is_finite()) {
                return Err(MfgError::config(field, "non-finite Fourier coefficient"));
            }
            if dim == 1 && t.k[1] != 0 {
                return Err(MfgError::config(field, format!("wave vector {:?} has a second component in d = 1", t.k)));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let (c, terms) = match self.preset {
            Some(p) => p.expand(),
            None => (self.constant, self.terms.clone()),
        };
        c + terms
            .iter()
            .map(|t| {
                let arg = 2.0 * PI * (t.k[0] as f64 * x[0] + t.k[1] as f64 * x[1]);
                t.cos * arg.cos() + t.sin * arg.sin()
            })
            .sum::<f64>()
    }

    pub fn sample(&self, grid: PeriodicGrid) -> Field<f64> {
        Field::from_fn(grid, |x: [f64; 2]| self.eval(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSpec {
    Arctan,
    Linear { slope: f64 },
    Power { coef: f64, exponent: f64 },
}

impl From<CouplingSpec> for Coupling<f64> {
    fn from(c: CouplingSpec) -> Self {
        match c {
            CouplingSpec::Arctan => Coupling::Arctan,
            CouplingSpec::Linear { slope } => Coupling::Linear { slope },
            CouplingSpec::Power { coef, exponent } => Coupling::Power { coef, exponent },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    pub n: usize,
    pub nt: usize,
    pub horizon: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Offset `κ` of `c(x)((1+|p|²)^{γ/2} - κ)`.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "one_spec")]
    pub weight: FunctionSpec,
    /// One spec per axis.
    pub drift: Vec<FunctionSpec>,
    pub potential: FunctionSpec,
    #[serde(default = "default_coupling")]
    pub coupling: CouplingSpec,
    pub terminal: FunctionSpec,
    /// Normalized to unit mass on load.
    pub initial: FunctionSpec,
    #[serde(default = "default_floor")]
    pub m_floor: f64,
}

fn default_kappa() -> f64 {
    3.0
}
fn one_spec() -> FunctionSpec {
    FunctionSpec::preset(Preset::One)
}
fn default_coupling() -> CouplingSpec {
    CouplingSpec::Arctan
}
fn default_floor() -> f64 {
    1e-10
}

impl ProblemConfig {
    /// The reference problem: `d = 1`, `γ = 1.5`, `α = 0.5`, `T = 0.05`.
    pub fn reference(n: usize, nt: usize) -> Self {
        Self {
            dim: 1,
            n,
            nt,
            horizon: 0.05,
            gamma: 1.5,
            alpha: 0.5,
            kappa: default_kappa(),
            weight: one_spec(),
            drift: vec![FunctionSpec::preset(Preset::ReferenceDrift)],
            potential: FunctionSpec::preset(Preset::ReferencePotential),
            coupling: CouplingSpec::Arctan,
            terminal: FunctionSpec::preset(Preset::ReferenceTerminal),
            initial: FunctionSpec::preset(Preset::ReferenceInitial),
            m_floor: default_floor(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(MfgError::config("problem.dim", "must be 1 or 2"));
        }
        if self.n < 4 || !self.n.is_power_of_two() {
            return Err(MfgError::config("problem.n", "must be a power of two, at least 4"));
        }
        if self.nt == 0 {
            return Err(MfgError::config("problem.nt", "must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(MfgError::config("problem.horizon", "must be positive"));
        }
        if !(self.gamma > 1.0 && self.gamma < 2.0) {
            return Err(MfgError::config("problem.gamma", "must lie in (1, 2)"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(MfgError::config("problem.alpha", format!("must be nonnegative, got {}", self.alpha)));
        }
        if !self.kappa.is_finite() {
            return Err(MfgError::config("problem.kappa", "must be finite"));
        }
        if !(self.m_floor > 0.0) {
            return Err(MfgError::config("problem.m_floor", "must be positive"));
        }
        if self.drift.len() != self.dim {
            return Err(MfgError::config("problem.drift", format!("needs {} components", self.dim)));
        }
        self.weight.validate("problem.weight", self.dim)?;
        for (a, d) in self.drift.iter().enumerate() {
            d.validate(&format!("problem.drift[{a}]"), self.dim)?;
        }
        self.potential.validate("problem.potential", self.dim)?;
        self.terminal.validate("problem.terminal", self.dim)?;
        self.initial.validate("problem.initial", self.dim)?;
        Coupling::<f64>::from(self.coupling)
            .validate()
            .map_err(|e| MfgError::config("problem.coupling", e.to_string()))?;
        Ok(())
    }

    pub fn build(&self) -> Result<MfgProblem<f64>> {
        self.validate()?;
        let grid = PeriodicGrid::new(self.dim, self.n).map_err(|e| MfgError::config("problem.n", e.to_string()))?;
        let weight = self.weight.sample(grid);
        if !(weight.min() > 0.0) {
            return Err(MfgError::config("problem.weight", "must be positive on the grid"));
        }
        let m0 = self.initial.sample(grid);
        if !(m0.min() > 0.0) {
            return Err(MfgError::config("problem.initial", "must be positive on the grid"));
        }
        let mass = m0.integrate();
        let initial = m0.scaled(1.0 / mass);
        let hamiltonian = HamiltonianModel::iso_power(self.gamma, weight, self.kappa)
            .map_err(|e| MfgError::config("problem.gamma", e.to_string()))?;
        let drift = VectorField::new(self.drift.iter().map(|d| d.sample(grid)).collect())?;
        MfgProblem::new(ProblemData {
            time: TimeGrid::new(self.horizon, self.nt)?,
            alpha: self.alpha,
            hamiltonian,
            drift,
            potential: Potential { spatial: self.potential.sample(grid), coupling: self.coupling.into() },
            terminal: self.terminal.sample(grid),
            initial,
            m_floor: self.m_floor,
        })
    }

    /// The same problem on a grid refined by `factor` in space and time.
    pub fn refined(&self, factor: usize) -> Self {
        Self { n: self.n * factor, nt: self.nt * factor, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<ReportFormat>,
    /// Columnar text per field for plotting.
    pub plot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![ReportFormat::Text, ReportFormat::Json], plot: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatesConfig {
    /// Re-solve on a grid refined by this factor for the stability checks;
    /// 1 disables them.
    pub refine_factor: usize,
    pub r_list: Vec<f64>,
    pub samples: SampleSpec,
}

impl Default for EstimatesConfig {
    fn default() -> Self {
        let d = EstimateOptions::default();
        Self { refine_factor: 2, r_list: d.r_list, samples: d.samples }
    }
}

impl EstimatesConfig {
    pub fn options(&self) -> EstimateOptions {
        EstimateOptions { r_list: self.r_list.clone(), samples: self.samples }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LegendreConfig {
    pub dim: usize,
    pub n: usize,
    pub gamma_prime: f64,
    pub weight: FunctionSpec,
    /// Number of random `(x, v)` duality samples, `|v| ≤ v_max`.
    pub samples: usize,
    pub v_max: f64,
    pub p_radius: f64,
    pub v_radius: f64,
    /// Brute-force grid points per axis.
    pub grid_points: usize,
    /// Momenta `|p| ∈ [10, 100]` of the growth scan.
    pub growth_points: usize,
    pub growth_v_radius: f64,
    pub growth_grid_points: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for LegendreConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 16,
            gamma_prime: 3.0,
            weight: FunctionSpec { preset: None, constant: 1.0, terms: vec![FourierTerm { k: [1, 0], cos: 0.3, sin: 0.0 }] },
            samples: 100,
            v_max: 2.0,
            p_radius: 60.0,
            v_radius: 6.0,
            grid_points: 201,
            growth_points: 10,
            growth_v_radius: 60.0,
            growth_grid_points: 2001,
            tolerance: 1e-6,
            seed: 1,
        }
    }
}

impl LegendreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(MfgError::config("legendre.dim", "must be 1 or 2"));
        }
        if !(self.gamma_prime > 2.0) {
            return Err(MfgError::config("legendre.gamma_prime", "must exceed 2"));
        }
        for (name, v) in [
            ("legendre.v_max", self.v_max),
            ("legendre.p_radius", self.p_radius),
            ("legendre.v_radius", self.v_radius),
            ("legendre.growth_v_radius", self.growth_v_radius),
            ("legendre.tolerance", self.tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MfgError::config(name, "must be positive"));
            }
        }
        if self.samples == 0 || self.grid_points < 3 || self.growth_grid_points < 3 {
            return Err(MfgError::config("legendre.samples", "sample counts too small"));
        }
        self.weight.validate("legendre.weight", self.dim)
    }
}

/// The full configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub mc: SDEConfig,
    #[serde(default)]
    pub estimates: EstimatesConfig,
    #[serde(default)]
    pub legendre: LegendreConfig,
}

impl RunConfig {
    pub fn reference() -> Self {
        Self {
            problem: ProblemConfig::reference(64, 64),
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
            mc: SDEConfig::default(),
            estimates: EstimatesConfig::default(),
            legendre: LegendreConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| format!("bytes {}..{}", s.start, s.end)).unwrap_or_default();
            MfgError::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| MfgError::config(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("the config is representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.solver.validate()?;
        self.mc.substeps(self.problem.horizon / self.problem.nt as f64)?;
        if self.estimates.refine_factor == 0 {
            return Err(MfgError::config("estimates.refine_factor", "must be at least 1"));
        }
        if self.estimates.r_list.iter().any(|r| !(*r > 0.0)) {
            return Err(MfgError::config("estimates.r_list", "exponents must be positive"));
        }
        self.legendre.validate()
    }
}

const MAGIC: &str = "mfgc-field";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub n: usize,
    pub nt: usize,
    pub horizon: f64,
    pub name: String,
    pub endianness: String,
    /// SHA-256 of the payload, hex.
    pub checksum: String,
}

fn checksum(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| MfgError::Io(e.error))?;
    Ok(())
}

/// A JSON header line followed by little-endian `f64`s, slice by slice.
pub fn write_field(path: &Path, name: &str, field: &SpaceTimeField<f64>) -> Result<()> {
    let payload: Vec<u8> = field.flatten().iter().flat_map(|v| v.to_le_bytes()).collect();
    let header = FieldHeader {
        format: MAGIC.into(),
        version: VERSION,
        dim: field.grid().dim(),
        n: field.grid().points_per_dim(),
        nt: field.time().steps(),
        horizon: field.time().horizon(),
        name: name.into(),
        endianness: "le".into(),
        checksum: checksum(&payload),
    };
    let mut bytes = serde_json::to_vec(&header).expect("header serializes");
    bytes.push(b'\n');
    bytes.extend_from_slice(&payload);
    write_atomic(path, &bytes)
}

pub fn read_field(path: &Path) -> Result<(FieldHeader, SpaceTimeField<f64>)> {
    let bad = |m: String| MfgError::FieldFile(format!("{}: {m}", path.display()));
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    let header: FieldHeader = serde_json::from_slice(&line).map_err(|e| bad(format!("header: {e}")))?;
    if header.format != MAGIC || header.version != VERSION {
        return Err(bad(format!("unsupported format {} v{}", header.format, header.version)));
    }
    if header.endianness != "le" {
        return Err(bad(format!("unsupported endianness {}", header.endianness)));
    }
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    let grid = PeriodicGrid::new(header.dim, header.n).map_err(|e| bad(e.to_string()))?;
    let time = TimeGrid::new(header.horizon, header.nt).map_err(|e| bad(e.to_string()))?;
    let expected = 8 * grid.len() * time.len();
    if payload.len() != expected {
        return Err(bad(format!("payload has {} bytes, expected {expected}", payload.len())));
    }
    if checksum(&payload) != header.checksum {
        return Err(bad("checksum mismatch".into()));
    }
    let values: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let field = SpaceTimeField::from_flat(grid, time, &values)?;
    Ok((header, field))
}

/// Columnar text `t x [y] value`, one block per slice separated by a blank line.
pub fn plot_columns(field: &SpaceTimeField<f64>) -> String {
    let grid = *field.grid();
    let mut out = String::new();
    out.push_str(if grid.dim() == 1 { "# t x value\n" } else { "# t x y value\n" });
    for (n, s) in field.slices().iter().enumerate() {
        let t = field.time().time(n);
        for (i, v) in s.values().iter().enumerate() {
            let x: [f64; 2] = grid.node(i);
            if grid.dim() == 1 {
                out.push_str(&format!("{t:.10e} {:.10e} {v:.16e}\n", x[0]));
            } else {
                out.push_str(&format!("{t:.10e} {:.10e} {:.10e} {v:.16e}\n", x[0], x[1]));
            }
        }
        out.push('\n');
    }
    out
}

/// One row of the duality table.
#[derive(Clone, Debug, Serialize)]
pub struct DualityRow {
    pub node: usize,
    pub v: [f64; 2],
    pub lagrangian: f64,
    pub double_transform: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub p: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LegendreReport {
    pub duality: Vec<DualityRow>,
    pub growth: Vec<GrowthRow>,
    pub max_deviation: f64,
    pub growth_passed: bool,
    pub tolerance: f64,
    /// First oracle failure, such as an interior maximizer not found.
    pub error: Option<String>,
}

impl LegendreReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.max_deviation <= self.tolerance && self.growth_passed
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# node v1 v2 L0 double_transform deviation\n");
        for r in &self.duality {
            out.push_str(&format!(
                "{} {:.6} {:.6} {:.12e} {:.12e} {:.3e}\n",
                r.node, r.v[0], r.v[1], r.lagrangian, r.double_transform, r.deviation
            ));
        }
        out.push_str("# |p| H0/(|p|^g/g) lower upper\n");
        for r in &self.growth {
            out.push_str(&format!("{:.6} {:.9} {:.9} {:.9}\n", r.p, r.ratio, r.lower, r.upper));
        }
        out.push_str(&format!(
            "max_deviation={:.3e} tolerance={:.1e} growth_passed={}\n",
            self.max_deviation, self.tolerance, self.growth_passed
        ));
        if let Some(e) = &self.error {
            out.push_str(&format!("error=\"{e}\"\n"));
        }
        out.push_str(&format!("passed={}\n", self.passed()));
        out
    }
}

/// Double-transform and growth scan of the model Lagrangian.
pub fn legendre_report(cfg: &LegendreConfig) -> Result<LegendreReport> {
    cfg.validate()?;
    let grid = PeriodicGrid::new(cfg.dim, cfg.n).map_err(|e| MfgError::config("legendre.n", e.to_string()))?;
    let l = LagrangianModel::new(cfg.gamma_prime, cfg.weight.sample(grid))
        .map_err(|e| MfgError::config("legendre.weight", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = LegendreReport {
        duality: Vec::new(),
        growth: Vec::new(),
        max_deviation: 0.0,
        growth_passed: true,
        tolerance: cfg.tolerance,
        error: None,
    };
    for _ in 0..cfg.samples {
        let node = rng.random_range(0..grid.len());
        let v = loop {
            let mut v = [rng.random_range(-cfg.v_max..cfg.v_max), 0.0];
            if cfg.dim == 2 {
                v[1] = rng.random_range(-cfg.v_max..cfg.v_max);
            }
            if v[0] * v[0] + v[1] * v[1] <= cfg.v_max * cfg.v_max {
                break v;
            }
        };
        match double_legendre_transform(&l, node, v, cfg.p_radius, cfg.grid_points, cfg.v_radius, cfg.grid_points) {
            Ok(back) => {
                let exact = l.eval(node, v);
                let deviation = (back - exact).abs();
                rep.max_deviation = rep.max_deviation.max(deviation);
                rep.duality.push(DualityRow { node, v, lagrangian: exact, double_transform: back, deviation });
            }
            Err(e) => {
                rep.error = Some(e.to_string());
                return Ok(rep);
            }
        }
    }
    let (c1, c2) = l.growth_constants();
    let g = l.gamma();
    let (lower, upper) = (c1 * g / 2.0, 2.0 * c2 * g);
    let count = cfg.growth_points.max(2);
    for j in 0..count {
        let p = 10.0 * 10f64.powf(j as f64 / (count - 1) as f64);
        for node in [0, grid.len() / 2] {
            match legendre_transform(&l, node, [p, 0.0], cfg.growth_v_radius, cfg.growth_grid_points) {
                Ok(h) => {
                    let ratio = h / (p.powf(g) / g);
                    rep.growth_passed &= ratio >= lower && ratio <= upper;
                    rep.growth.push(GrowthRow { p, ratio, lower, upper });
                }
                Err(e) => {
                    rep.error = Some(e.to_string());
                    return Ok(rep);
                }
            }
        }
    }
    Ok(rep)
}
