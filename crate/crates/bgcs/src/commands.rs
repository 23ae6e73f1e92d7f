//! Command-line schema and command implementations.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use bgcs_core::coherent::{f_series_sum, inner_product, Label, DEFAULT_SHELL_TOL};
use bgcs_core::fock::TruncatedRepSpace;
use bgcs_core::measure::{
    gram_accumulate, gram_quadrature, gram_summarize, moment_check, verify_formula_a, verify_formula_b,
    FormulaAParams, FormulaBParams, MeasureModel, SimplexQuadScheme,
};
use bgcs_core::pathint::{
    exact_kernel_trace_quadrature, exact_spectral_trace, kernel_trace_accumulate, sliced_trace_accumulate,
    sliced_trace_matrix, HamiltonianParams, KernelProposal, SliceWeights, TimeMode, TraceConfig,
};
use bgcs_core::specfun;
use bgcs_core::stats::{MeanAccumulator, VectorAccumulator};
use bgcs_core::Complex64;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dump::write_triplets;
use crate::parallel::{accumulate, run_workers};
use crate::report::{CheckRecord, Report, SampleRecord, TraceRecord, ValueRecord};
use crate::{OutputFormat, RunError};

/// Default seed when neither `--seed` nor `BGCS_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;
/// Default worker count; results depend on it, never on the machine.
pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "bgcs", version, about = "Numerics for extended Barut-Girardello coherent states of U(N,1)")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// RNG seed for stochastic commands
    #[arg(long, global = true, env = "BGCS_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for Monte Carlo; output is a function of (seed, workers)
    #[arg(long, global = true, default_value_t = DEFAULT_WORKERS)]
    pub workers: usize,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Write the report to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Default for Common {
    fn default() -> Self {
        Common { seed: DEFAULT_SEED, workers: DEFAULT_WORKERS, output: OutputFormat::Json, out: None }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate F_N(K; w)
    EvalF(EvalFArgs),
    /// Coherent-state overlap <z|z'>
    Inner(InnerArgs),
    /// Moment identity of the measure for one occupation tuple
    MeasureCheck(MeasureCheckArgs),
    /// Orthant integral of the Bessel-K kernel against its Gamma closed form
    FormulaA(FormulaAArgs),
    /// Mellin integral of K_nu against its Gamma closed form
    FormulaB(FormulaBArgs),
    /// Resolution of unity: Gram matrix of the truncated basis under the measure
    Rou(RouArgs),
    /// Draw points from the measure
    Sample(SampleArgs),
    /// Partition function / time-sliced trace
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMode {
    Quadrature,
    Montecarlo,
}

#[derive(Debug, Clone, Args)]
pub struct EvalFArgs {
    /// Representation label K > 0
    #[arg(long)]
    pub k: f64,
    /// Arguments w_1,...,w_N as complex numbers, e.g. 1,0.5+2i
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, value_parser = parse_complex)]
    pub w: Vec<Complex64>,
    /// Relative shell tolerance
    #[arg(long, default_value_t = DEFAULT_SHELL_TOL)]
    pub tol: f64,
    /// Maximum number of degree shells
    #[arg(long, default_value_t = bgcs_core::coherent::DEFAULT_MAX_SHELLS)]
    pub max_shells: usize,
}

#[derive(Debug, Clone, Args)]
pub struct InnerArgs {
    /// Representation label K > 0
    #[arg(long)]
    pub k: f64,
    /// Bra label z_1,...,z_N
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, value_parser = parse_complex)]
    pub z: Vec<Complex64>,
    /// Ket label z'_1,...,z'_N
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, value_parser = parse_complex)]
    pub zp: Vec<Complex64>,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureCheckArgs {
    /// Number of modes N
    #[arg(long)]
    pub n: usize,
    /// Representation label K > 0
    #[arg(long)]
    pub k: f64,
    /// Occupation tuple n_1,...,n_N (defaults to all zeros)
    #[arg(long, value_delimiter = ',')]
    pub index: Vec<u32>,
    #[arg(long, value_enum, default_value_t = CheckMode::Quadrature)]
    pub mode: CheckMode,
    /// Monte Carlo samples
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Relative tolerance in quadrature mode
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Standard errors allowed in Monte Carlo mode
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FormulaAArgs {
    /// Exponents s_1,...,s_N, each > -1
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub s: Vec<f64>,
    /// K > 0
    #[arg(long)]
    pub k: f64,
    /// Relative tolerance
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FormulaBArgs {
    /// Mellin exponent mu > |nu|
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    /// Bessel order nu
    #[arg(long, allow_hyphen_values = true)]
    pub nu: f64,
    /// Scale a > 0
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    /// Relative tolerance
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RouArgs {
    /// Number of modes N
    #[arg(long)]
    pub n: usize,
    /// Representation label K > 0
    #[arg(long)]
    pub k: f64,
    /// Largest total degree of the truncated basis
    #[arg(long)]
    pub cutoff: u32,
    #[arg(long, value_enum, default_value_t = CheckMode::Quadrature)]
    pub mode: CheckMode,
    /// Monte Carlo samples
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Largest allowed |G - I| in quadrature mode
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Standard errors allowed per entry in Monte Carlo mode
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Number of modes N
    #[arg(long)]
    pub n: usize,
    /// Representation label K > 0
    #[arg(long)]
    pub k: f64,
    /// Number of points
    #[arg(long, default_value_t = 10)]
    pub budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceMode {
    Imaginary,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    /// Trace of the product of slice operators on the truncation
    Matrix,
    /// Sliced product with slice labels drawn from the measure
    Montecarlo,
    /// Integral of the exact diagonal kernel by quadrature
    KernelQuadrature,
    /// Integral of the exact diagonal kernel by importance sampling
    KernelMontecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    /// 1 - dH (imaginary) or 1 - i dH (real), with d = beta/M or T/M
    Linear,
    /// exp(-dH) or exp(-i dH); exact for every M
    Exponential,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    /// Number of modes N
    #[arg(long)]
    pub n: usize,
    /// Representation label K > 0
    #[arg(long)]
    pub k: f64,
    /// Mode frequencies mu_1,...,mu_N
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub mu: Vec<f64>,
    /// Coefficient c_{N+1} of the extra mode
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c_last: f64,
    /// Inverse temperature (imaginary time)
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Time horizon T (real time)
    #[arg(long)]
    pub time: Option<f64>,
    /// Number of slices M
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Imaginary time uses --beta, real time uses --time
    #[arg(long, value_enum, default_value_t = TraceMode::Imaginary)]
    pub mode: TraceMode,
    #[arg(long, value_enum, default_value_t = Backend::Matrix)]
    pub backend: Backend,
    /// Fock cutoff for the sliced backends
    #[arg(long, default_value_t = 40)]
    pub cutoff: u32,
    /// Slice operator of the sliced backends
    #[arg(long, value_enum, default_value_t = Weights::Linear)]
    pub weights: Weights,
    /// Monte Carlo samples
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Relative tolerance against the reference [default: 1e-2 for matrix, 1e-6 for kernel-quadrature]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Standard errors allowed for the Monte Carlo backends
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
    /// Also write the truncated Hamiltonian as sparse triplets to this file
    #[arg(long)]
    pub dump_operator: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    s.trim().parse().map_err(|e| format!("not a complex number `{s}`: {e}"))
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn cjson(z: &Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

/// Runs one command and returns its report.
pub fn run(command: &Command, common: &Common) -> Result<Report, RunError> {
    if common.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    match command {
        Command::EvalF(a) => eval_f(a),
        Command::Inner(a) => inner(a),
        Command::MeasureCheck(a) => measure_check(a, common),
        Command::FormulaA(a) => formula_a(a),
        Command::FormulaB(a) => formula_b(a),
        Command::Rou(a) => rou(a, common),
        Command::Sample(a) => sample(a, common),
        Command::Trace(a) => trace(a, common),
    }
}

fn eval_f(a: &EvalFArgs) -> Result<Report, RunError> {
    let s = f_series_sum(a.k, &a.w, a.tol, a.max_shells)?;
    let rec = ValueRecord {
        quantity: "F_N".into(),
        params: json!({"K": a.k, "w": a.w.iter().map(cjson).collect::<Vec<_>>(), "tol": a.tol}),
        re: s.value.re,
        im: s.value.im,
        shells: Some(s.shells),
    };
    Report::new("eval-f", &[rec])
}

fn inner(a: &InnerArgs) -> Result<Report, RunError> {
    let z = Label::new(a.z.clone());
    let zp = Label::new(a.zp.clone());
    let v = inner_product(&z, &zp, a.k)?;
    let rec = ValueRecord {
        quantity: "inner_product".into(),
        params: json!({
            "K": a.k,
            "z": a.z.iter().map(cjson).collect::<Vec<_>>(),
            "zp": a.zp.iter().map(cjson).collect::<Vec<_>>(),
        }),
        re: v.re,
        im: v.im,
        shells: None,
    };
    Report::new("inner", &[rec])
}

/// `prod n_a! Gamma(K + |n|) / Gamma(K)`, the moment `E[prod r^n]` of the measure.
pub fn sampler_moment(k: f64, n: &[u32]) -> bgcs_core::Result<f64> {
    let total: u32 = n.iter().sum();
    let mut m = specfun::pochhammer(k, total)?;
    for &x in n {
        m *= specfun::gamma(x as f64 + 1.0)?;
    }
    Ok(m)
}

fn measure_check(a: &MeasureCheckArgs, common: &Common) -> Result<Report, RunError> {
    let index = if a.index.is_empty() { vec![0; a.n] } else { a.index.clone() };
    if index.len() != a.n {
        return Err(usage(format!("--index has {} entries, expected N = {}", index.len(), a.n)));
    }
    let model = MeasureModel::new(a.n, a.k)?;
    let params = json!({"N": a.n, "K": a.k, "n": index, "mode": format!("{:?}", a.mode).to_lowercase()});
    let rec = match a.mode {
        CheckMode::Quadrature => {
            let s: Vec<f64> = index.iter().map(|&x| x as f64).collect();
            let c = moment_check(&model, &s, &SimplexQuadScheme::new(a.n))?;
            CheckRecord::identity("moment", params, c.lhs, c.rhs, c.rel_err, a.tol)
        }
        CheckMode::Montecarlo => {
            let acc: MeanAccumulator = accumulate(common.seed, common.workers, a.budget, |rng, count| {
                let mut acc = MeanAccumulator::new();
                for _ in 0..count {
                    let p = model.sample(rng);
                    acc.push(p.r.iter().zip(&index).map(|(r, &e)| r.powi(e as i32)).product());
                }
                Ok(acc)
            })?;
            let est = acc.estimate();
            let want = sampler_moment(a.k, &index)?;
            CheckRecord::statistical(
                "moment",
                params,
                est.mean,
                want,
                est.z_score(want),
                a.sigmas,
                a.budget,
                common.seed,
            )
        }
    };
    Report::new("measure-check", &[rec])
}

fn formula_a(a: &FormulaAArgs) -> Result<Report, RunError> {
    let c = verify_formula_a(&FormulaAParams { s: a.s.clone(), k: a.k })?;
    let rec = CheckRecord::identity("formula-a", json!({"s": a.s, "K": a.k}), c.lhs, c.rhs, c.rel_err, a.tol);
    Report::new("formula-a", &[rec])
}

fn formula_b(a: &FormulaBArgs) -> Result<Report, RunError> {
    let c = verify_formula_b(&FormulaBParams { mu: a.mu, nu: a.nu, a: a.a })?;
    let rec = CheckRecord::identity(
        "formula-b",
        json!({"mu": a.mu, "nu": a.nu, "a": a.a}),
        c.lhs,
        c.rhs,
        c.rel_err,
        a.tol,
    );
    Report::new("formula-b", &[rec])
}

fn rou(a: &RouArgs, common: &Common) -> Result<Report, RunError> {
    let model = MeasureModel::new(a.n, a.k)?;
    let space = TruncatedRepSpace::new(a.n, a.k, a.cutoff)?;
    let mut params = json!({"N": a.n, "K": a.k, "cutoff": a.cutoff, "dim": space.dim()});
    let rec = match a.mode {
        CheckMode::Quadrature => {
            let g = gram_quadrature(&model, a.cutoff, &SimplexQuadScheme::new(a.n))?;
            params["mode"] = json!("quadrature");
            params["max_off_diagonal"] = json!(g.max_off_diagonal);
            CheckRecord {
                check: "resolution-of-unity".into(),
                params,
                lhs: None,
                rhs: None,
                rel_err: None,
                z_score: None,
                max_deviation: Some(g.max_deviation),
                tolerance: a.tol,
                pass: g.max_deviation <= a.tol,
                budget: None,
                seed: None,
            }
        }
        CheckMode::Montecarlo => {
            let acc: VectorAccumulator = accumulate(common.seed, common.workers, a.budget, |rng, count| {
                gram_accumulate(&model, &space, rng, count)
            })?;
            let mc = gram_summarize(space.dim(), &acc);
            params["mode"] = json!("montecarlo");
            CheckRecord {
                check: "resolution-of-unity".into(),
                params,
                lhs: None,
                rhs: None,
                rel_err: None,
                z_score: Some(mc.max_z_score),
                max_deviation: Some(mc.report.max_deviation),
                tolerance: a.sigmas,
                pass: mc.max_z_score <= a.sigmas,
                budget: Some(a.budget),
                seed: Some(common.seed),
            }
        }
    };
    Report::new("rou", &[rec])
}

fn sample(a: &SampleArgs, common: &Common) -> Result<Report, RunError> {
    let model = MeasureModel::new(a.n, a.k)?;
    let parts = run_workers(common.seed, common.workers, a.budget, |_, rng, count| {
        Ok((0..count).map(|_| model.sample(rng)).collect::<Vec<_>>())
    })?;
    let records: Vec<SampleRecord> = parts
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(i, p)| SampleRecord { index: i as u64, r: p.r, theta: p.theta })
        .collect();
    Report::new("sample", &records)
}

fn trace(a: &TraceArgs, common: &Common) -> Result<Report, RunError> {
    if a.mu.len() != a.n {
        return Err(usage(format!("--mu has {} entries, expected N = {}", a.mu.len(), a.n)));
    }
    let hp = HamiltonianParams::from_mu(&a.mu, a.c_last)?;
    let (mode, horizon) = match a.mode {
        TraceMode::Imaginary => (TimeMode::Imaginary, a.beta),
        TraceMode::Real => (TimeMode::Real, a.time.ok_or_else(|| usage("real-time traces need --time"))?),
    };
    if let Some(path) = &a.dump_operator {
        let space = TruncatedRepSpace::new(a.n, a.k, a.cutoff)?;
        write_triplets(&hp.operator(&space)?, BufWriter::new(File::create(path)?))?;
    }
    let weights = match a.weights {
        Weights::Linear => SliceWeights::Linear,
        Weights::Exponential => SliceWeights::Exponential,
    };
    let cfg = TraceConfig { mode, horizon, slices: a.m, cutoff: a.cutoff, weights };
    let sliced = matches!(a.backend, Backend::Matrix | Backend::Montecarlo);
    let mut rec = TraceRecord {
        n: a.n,
        k: a.k,
        c: hp.c().to_vec(),
        mode: format!("{:?}", a.mode).to_lowercase(),
        backend: backend_name(a.backend).into(),
        beta: (mode == TimeMode::Imaginary).then_some(horizon),
        t: (mode == TimeMode::Real).then_some(horizon),
        m: sliced.then_some(a.m),
        cutoff: sliced.then_some(a.cutoff),
        weights: sliced.then(|| format!("{:?}", a.weights).to_lowercase()),
        value: 0.0,
        value_im: None,
        error: 0.0,
        reference: 0.0,
        reference_im: None,
        rel_err: None,
        z_score: None,
        tolerance: 0.0,
        pass: false,
        budget: None,
        seed: None,
    };
    if mode == TimeMode::Real && !sliced {
        return Err(usage("kernel backends are imaginary-time only"));
    }
    match a.backend {
        Backend::Matrix => {
            let v = sliced_trace_matrix(&hp, a.k, &cfg)?;
            let reference = trace_reference(&hp, a.k, &cfg)?;
            let tol = a.tol.unwrap_or(1e-2);
            let rel = (v - reference).norm() / reference.norm();
            rec.value = v.re;
            rec.reference = reference.re;
            if mode == TimeMode::Real {
                rec.value_im = Some(v.im);
                rec.reference_im = Some(reference.im);
            }
            rec.rel_err = Some(rel);
            rec.tolerance = tol;
            rec.pass = rel <= tol;
        }
        Backend::Montecarlo => {
            let acc: VectorAccumulator = accumulate(common.seed, common.workers, a.budget, |rng, count| {
                sliced_trace_accumulate(&hp, a.k, &cfg, rng, count)
            })?;
            let est = acc.estimates();
            let reference = sliced_trace_matrix(&hp, a.k, &cfg)?;
            let z = est[0].z_score(reference.re).max(est[1].z_score(reference.im));
            rec.value = est[0].mean;
            rec.value_im = Some(est[1].mean);
            rec.error = est[0].std_error.hypot(est[1].std_error);
            rec.reference = reference.re;
            rec.reference_im = Some(reference.im);
            rec.z_score = Some(z);
            rec.tolerance = a.sigmas;
            rec.pass = z <= a.sigmas;
            rec.budget = Some(a.budget);
            rec.seed = Some(common.seed);
        }
        Backend::KernelQuadrature => {
            let est = exact_kernel_trace_quadrature(&hp, a.k, horizon, &SimplexQuadScheme::new(a.n))?;
            let reference = exact_spectral_trace(&hp, a.k, horizon, None)?;
            let tol = a.tol.unwrap_or(1e-6);
            let rel = (est.value - reference).abs() / reference;
            rec.value = est.value;
            rec.error = est.error;
            rec.reference = reference;
            rec.rel_err = Some(rel);
            rec.tolerance = tol;
            rec.pass = rel <= tol;
        }
        Backend::KernelMontecarlo => {
            let proposal = KernelProposal::for_trace(&hp, horizon);
            let acc: MeanAccumulator = accumulate(common.seed, common.workers, a.budget, |rng, count| {
                kernel_trace_accumulate(&hp, a.k, horizon, proposal, rng, count)
            })?;
            let est = acc.estimate();
            let reference = exact_spectral_trace(&hp, a.k, horizon, None)?;
            let z = est.z_score(reference);
            rec.value = est.mean;
            rec.error = est.std_error;
            rec.reference = reference;
            rec.z_score = Some(z);
            rec.tolerance = a.sigmas;
            rec.pass = z <= a.sigmas;
            rec.budget = Some(a.budget);
            rec.seed = Some(common.seed);
        }
    }
    Report::new("trace", &[rec])
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Matrix => "matrix",
        Backend::Montecarlo => "montecarlo",
        Backend::KernelQuadrature => "kernel-quadrature",
        Backend::KernelMontecarlo => "kernel-montecarlo",
    }
}

/// Untruncated partition function in imaginary time; in real time the
/// exact `Tr e^{-iTH}` over the same truncation.
fn trace_reference(hp: &HamiltonianParams, k: f64, cfg: &TraceConfig) -> bgcs_core::Result<Complex64> {
    match cfg.mode {
        TimeMode::Imaginary => Ok(Complex64::new(exact_spectral_trace(hp, k, cfg.horizon, None)?, 0.0)),
        TimeMode::Real => Ok(bgcs_core::fock::enumerate_basis(hp.modes(), cfg.cutoff)
            .iter()
            .map(|n| Complex64::from_polar(1.0, -cfg.horizon * hp.energy(n, k)))
            .sum()),
    }
}
