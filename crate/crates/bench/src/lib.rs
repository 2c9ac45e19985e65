//! Per-step runtime sweeps over the Hilbert-space dimension and log-log
//! scaling fits.
//!
//! Systems are square, `N_c = 2J + 1`, so `D = N_c^2`. Measurements run on
//! the calling thread only.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use tavis_core::basis::ModelParams;
use tavis_core::reference::{dense_propagate, DenseHamiltonian, DENSE_LIMIT};
use tavis_core::{enumerate_basis, Error, Method, OrderedBasis, PropagatorPlan, Result, StepWorkspace};

pub const MIN_REPS: usize = 5;
pub const MIN_WARMUP: usize = 2;
pub const MIN_FIT_SAMPLES: usize = 5;

/// Propagation method under measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchMethod {
    Exp,
    Linear,
    Dense,
}

impl BenchMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchMethod::Exp => "exp",
            BenchMethod::Linear => "linear",
            BenchMethod::Dense => "dense",
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exp" => Ok(BenchMethod::Exp),
            "linear" => Ok(BenchMethod::Linear),
            "dense" => Ok(BenchMethod::Dense),
            other => Err(Error::Usage(format!("unknown bench method `{other}` (expected exp, linear or dense)"))),
        }
    }
}

/// What to sweep and how to time it.
///
/// Text form is `;`-separated `key=value` pairs, e.g.
/// `d=1e3..1e5;points=6;methods=linear,exp`. A single `d=2000` gives a
/// one-point sweep. Optional keys: `reps`, `warmup`, `dt`, `mem_gib`,
/// `min_rep_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
    pub methods: Vec<BenchMethod>,
    pub reps: usize,
    pub warmup: usize,
    /// Step in ns.
    pub dt: f64,
    /// EXP kernels whose estimated storage exceeds this are skipped.
    pub mem_limit_bytes: u64,
    /// Each repetition runs enough steps to last at least this long.
    pub min_rep_time: Duration,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            d_min: 1e3,
            d_max: 1e5,
            points: 6,
            methods: vec![BenchMethod::Linear, BenchMethod::Exp],
            reps: 7,
            warmup: 2,
            dt: 1e-4,
            mem_limit_bytes: 2 << 30,
            min_rep_time: Duration::from_millis(20),
        }
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        let mut saw_d = false;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("sweep entry `{part}` is not key=value")))?;
            let value = value.trim();
            match key.trim() {
                "d" => {
                    saw_d = true;
                    match value.split_once("..") {
                        Some((lo, hi)) => {
                            spec.d_min = parse_num(key, lo)?;
                            spec.d_max = parse_num(key, hi)?;
                        }
                        None => {
                            spec.d_min = parse_num(key, value)?;
                            spec.d_max = spec.d_min;
                            spec.points = 1;
                        }
                    }
                }
                "points" => spec.points = parse_num::<usize>(key, value)?,
                "methods" => {
                    spec.methods = value.split(',').map(str::parse).collect::<Result<Vec<_>>>()?;
                }
                "reps" => spec.reps = parse_num(key, value)?,
                "warmup" => spec.warmup = parse_num(key, value)?,
                "dt" => spec.dt = parse_num(key, value)?,
                "mem_gib" => spec.mem_limit_bytes = (parse_num::<f64>(key, value)? * (1u64 << 30) as f64) as u64,
                "min_rep_ms" => spec.min_rep_time = Duration::from_secs_f64(parse_num::<f64>(key, value)? * 1e-3),
                other => return Err(Error::Usage(format!("unknown sweep key `{other}`"))),
            }
        }
        if !saw_d {
            return Err(Error::Usage("sweep spec needs a `d=` entry".into()));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    let value = value.trim();
    // Accept scientific notation for integer-valued keys as well.
    value
        .parse::<T>()
        .or_else(|_| {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0)
                .and_then(|v| format!("{v}").parse::<T>().ok())
                .ok_or(())
        })
        .map_err(|_| Error::Usage(format!("sweep key `{key}`: cannot parse `{value}`")))
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min >= 1.0 && self.d_max >= self.d_min) {
            return Err(Error::Usage(format!("bad dimension range {}..{}", self.d_min, self.d_max)));
        }
        if self.points == 0 {
            return Err(Error::Usage("sweep needs at least one point".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Usage("sweep needs at least one method".into()));
        }
        if self.reps < MIN_REPS || self.warmup < MIN_WARMUP {
            return Err(Error::Usage(format!(
                "need reps >= {MIN_REPS} and warmup >= {MIN_WARMUP}, got {} and {}",
                self.reps, self.warmup
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Usage(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    /// Distinct spin sizes `2J` whose square systems sit log-evenly between
    /// `d_min` and `d_max`.
    pub fn two_j_values(&self) -> Vec<u32> {
        let mut out: Vec<u32> = (0..self.points)
            .map(|k| {
                let frac = if self.points == 1 { 0.0 } else { k as f64 / (self.points - 1) as f64 };
                let d = self.d_min * (self.d_max / self.d_min).powf(frac);
                (d.sqrt().round() as u32).max(1) - 1
            })
            .collect();
        out.dedup();
        out
    }

    /// Dimensions of the sweep points.
    pub fn sweep_list(&self) -> Vec<usize> {
        self.two_j_values().iter().map(|&tj| square_dim(tj)).collect()
    }
}

pub fn square_dim(two_j: u32) -> usize {
    (two_j as usize + 1).pow(2)
}

/// Resonantly driven weak-coupling parameters on a square system.
pub fn square_params(two_j: u32) -> ModelParams {
    ModelParams::from_ghz(2.4, 3.6, 0.01, 1.0, 6.0, two_j as usize + 1, two_j)
}

/// One timed point.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSample {
    pub method: BenchMethod,
    pub dim: usize,
    pub n_cavity: usize,
    pub two_j: u32,
    /// Median over repetitions of the per-step time.
    pub step_time_ns_median: f64,
    pub precompute_ms: f64,
    pub reps: usize,
    pub warmup: usize,
    pub steps_per_rep: usize,
}

/// A sweep point that was not measured.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub method: BenchMethod,
    pub dim: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub samples: Vec<BenchSample>,
    pub skipped: Vec<SkippedPoint>,
}

impl SweepResult {
    pub fn for_method(&self, method: BenchMethod) -> Vec<BenchSample> {
        self.samples.iter().filter(|s| s.method == method).cloned().collect()
    }
}

/// Bytes of the dense block exponentials for one plan, from block sizes.
pub fn exp_kernel_bytes(params: &ModelParams) -> Result<u64> {
    let states = enumerate_basis(params)?;
    let mut entries = 0u64;
    for basis in [OrderedBasis::for_h0(params, &states)?, OrderedBasis::for_v(params, &states)?] {
        entries += basis.block_sizes().iter().map(|&s| (s as u64).pow(2)).sum::<u64>();
    }
    Ok(entries * std::mem::size_of::<Complex64>() as u64)
}

/// Time one propagation step for every method and size in the sweep.
pub fn time_single_step(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut result = SweepResult::default();
    for &method in &spec.methods {
        for two_j in spec.two_j_values() {
            let params = square_params(two_j);
            let dim = square_dim(two_j);
            match measure(method, &params, spec)? {
                Measured::Sample(s) => result.samples.push(s),
                Measured::Skipped(reason) => result.skipped.push(SkippedPoint { method, dim, reason }),
            }
        }
    }
    Ok(result)
}

enum Measured {
    Sample(BenchSample),
    Skipped(String),
}

fn measure(method: BenchMethod, params: &ModelParams, spec: &SweepSpec) -> Result<Measured> {
    let dim = params.dim()?;
    match method {
        BenchMethod::Exp | BenchMethod::Linear => {
            let core_method = if method == BenchMethod::Exp { Method::Exp } else { Method::Linear };
            if method == BenchMethod::Exp {
                let bytes = exp_kernel_bytes(params)?;
                if bytes > spec.mem_limit_bytes {
                    return Ok(Measured::Skipped(format!(
                        "EXP kernels need {:.2} GiB, limit is {:.2} GiB",
                        bytes as f64 / (1u64 << 30) as f64,
                        spec.mem_limit_bytes as f64 / (1u64 << 30) as f64
                    )));
                }
            }
            let start = Instant::now();
            let plan = PropagatorPlan::new(params, spec.dt, core_method)?;
            let precompute = start.elapsed();
            let mut state = plan.ground_state();
            let mut ws = StepWorkspace::new();
            let mut t = 0.0;
            let (median, steps) = time_steps(spec, |n| {
                for _ in 0..n {
                    black_box(plan.strang_step(&mut state, t, &mut ws)?);
                    t += spec.dt;
                }
                Ok(())
            })?;
            Ok(Measured::Sample(sample(method, params, dim, median, precompute, spec, steps)))
        }
        BenchMethod::Dense => {
            if dim > DENSE_LIMIT {
                return Ok(Measured::Skipped(format!("dense oracle limited to D <= {DENSE_LIMIT}")));
            }
            let start = Instant::now();
            let dense = DenseHamiltonian::build(params)?;
            let precompute = start.elapsed();
            let mut psi = vec![Complex64::new(0.0, 0.0); dim];
            psi[0] = Complex64::new(1.0, 0.0);
            let mut t = 0.0;
            let (median, steps) = time_steps(spec, |n| {
                psi = dense_propagate(&dense, &psi, t, n, spec.dt, None)?;
                t += n as f64 * spec.dt;
                Ok(())
            })?;
            Ok(Measured::Sample(sample(method, params, dim, median, precompute, spec, steps)))
        }
    }
}

fn sample(
    method: BenchMethod,
    params: &ModelParams,
    dim: usize,
    median_ns: f64,
    precompute: Duration,
    spec: &SweepSpec,
    steps_per_rep: usize,
) -> BenchSample {
    BenchSample {
        method,
        dim,
        n_cavity: params.n_cavity,
        two_j: params.two_j,
        step_time_ns_median: median_ns,
        precompute_ms: precompute.as_secs_f64() * 1e3,
        reps: spec.reps,
        warmup: spec.warmup,
        steps_per_rep,
    }
}

/// Median per-step time in ns and the batch size used.
fn time_steps(spec: &SweepSpec, mut run: impl FnMut(usize) -> Result<()>) -> Result<(f64, usize)> {
    let mut single = Duration::MAX;
    for _ in 0..spec.warmup {
        let start = Instant::now();
        run(1)?;
        single = single.min(start.elapsed());
    }
    let single_ns = single.as_nanos().max(1) as f64;
    let batch = ((spec.min_rep_time.as_nanos() as f64 / single_ns).ceil() as usize).max(1);
    let mut per_step = Vec::with_capacity(spec.reps);
    for _ in 0..spec.reps {
        let start = Instant::now();
        run(batch)?;
        per_step.push((start.elapsed().as_nanos().max(1) as f64) / batch as f64);
    }
    Ok((median(&mut per_step), batch))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares line through `(ln D, ln t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_scaling(samples: &[BenchSample]) -> Result<ScalingFit> {
    let mut dims: Vec<usize> = samples.iter().map(|s| s.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    if dims.len() < MIN_FIT_SAMPLES {
        return Err(Error::Usage(format!(
            "scaling fit needs at least {MIN_FIT_SAMPLES} distinct dimensions, got {}",
            dims.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|s| !(s.step_time_ns_median > 0.0)) {
        return Err(Error::Usage(format!("non-positive step time at D = {}", bad.dim)));
    }
    let xs: Vec<f64> = samples.iter().map(|s| (s.dim as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.step_time_ns_median.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(ScalingFit { exponent, intercept, r_squared, points: samples.len() })
}

pub const CSV_HEADER: &str = "method,D,n_cavity,two_J,step_time_ns_median,precompute_ms,reps";

pub fn write_samples_csv(out: &mut impl Write, samples: &[BenchSample]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{:.1},{:.3},{}",
            s.method, s.dim, s.n_cavity, s.two_j, s.step_time_ns_median, s.precompute_ms, s.reps
        )?;
    }
    Ok(())
}

/// Flat JSON object with run metadata and one exponent per fitted method.
pub fn report_json(spec: &SweepSpec, result: &SweepResult) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("threads".into(), 1.into());
    map.insert("dt_ns".into(), spec.dt.into());
    map.insert("reps".into(), spec.reps.into());
    map.insert("warmup".into(), spec.warmup.into());
    let list: Vec<String> = spec.sweep_list().iter().map(usize::to_string).collect();
    map.insert("sweep_d".into(), list.join(",").into());
    let methods: Vec<&str> = spec.methods.iter().map(|m| m.as_str()).collect();
    map.insert("methods".into(), methods.join(",").into());
    for &method in &spec.methods {
        let key = method.as_str();
        match fit_scaling(&result.for_method(method)) {
            Ok(fit) => {
                map.insert(format!("{key}_exponent"), fit.exponent.into());
                map.insert(format!("{key}_intercept"), fit.intercept.into());
                map.insert(format!("{key}_r_squared"), fit.r_squared.into());
                map.insert(format!("{key}_fit_points"), fit.points.into());
            }
            Err(e) => {
                map.insert(format!("{key}_fit"), format!("refused: {e}").into());
            }
        }
        let skipped: Vec<String> = result
            .skipped
            .iter()
            .filter(|s| s.method == method)
            .map(|s| format!("D={} ({})", s.dim, s.reason))
            .collect();
        if !skipped.is_empty() {
            map.insert(format!("{key}_skipped"), skipped.join("; ").into());
        }
    }
    serde_json::Value::Object(map)
}
