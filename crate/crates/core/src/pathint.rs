//! Path-integral pieces for the diagonal Hamiltonian
//! `H = sum_a c_a E(a, a) = sum_alpha mu_alpha E(alpha, alpha) + K c_N`,
//! `mu_alpha = c_alpha + c_N`: coherent-state matrix elements, exact trace
//! oracles and the time-sliced trace.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::coherent::{f_series, f_series_real, state_vector, Label, DEFAULT_SHELL_TOL};
use crate::fock::{enumerate_basis, MultiIndex, SparseOperator, TruncatedRepSpace};
use crate::math;
use crate::measure::{MeasureModel, SimplexQuadScheme};
use crate::quad::Estimate;
use crate::specfun;
use crate::stats::{MeanAccumulator, VectorAccumulator};
use crate::{Error, Result};

/// Mode coefficients `c_0, ..., c_N` of the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianParams {
    c: Vec<f64>,
}

impl HamiltonianParams {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::domain(format!("need N + 1 >= 2 coefficients, got {}", c.len())));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("Hamiltonian coefficients must be finite"));
        }
        Ok(HamiltonianParams { c })
    }

    /// Builds `c` from the mode frequencies `mu` and the last coefficient.
    pub fn from_mu(mu: &[f64], c_last: f64) -> Result<Self> {
        let mut c: Vec<f64> = mu.iter().map(|&m| m - c_last).collect();
        c.push(c_last);
        Self::new(c)
    }

    pub fn modes(&self) -> usize {
        self.c.len() - 1
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn c_last(&self) -> f64 {
        self.c[self.modes()]
    }

    pub fn mu(&self, alpha: usize) -> f64 {
        self.c[alpha] + self.c_last()
    }

    pub fn mus(&self) -> Vec<f64> {
        (0..self.modes()).map(|a| self.mu(a)).collect()
    }

    /// Eigenvalue on the basis state `n`.
    pub fn energy(&self, n: &MultiIndex, k: f64) -> f64 {
        k * self.c_last() + n.as_slice().iter().enumerate().map(|(a, &m)| self.mu(a) * m as f64).sum::<f64>()
    }

    /// Imaginary-time traces converge only when every `mu_alpha > 0`.
    pub fn check_confining(&self) -> Result<()> {
        if let Some(a) = (0..self.modes()).find(|&a| !(self.mu(a) > 0.0)) {
            return Err(Error::domain(format!(
                "imaginary-time trace needs every mu > 0, got mu[{a}] = {}",
                self.mu(a)
            )));
        }
        Ok(())
    }

    /// `sum_a c_a E(a, a)` on a truncated space.
    pub fn operator(&self, space: &TruncatedRepSpace) -> Result<SparseOperator> {
        if space.modes() != self.modes() {
            return Err(Error::domain("Hamiltonian and space disagree on N"));
        }
        let mut h = SparseOperator::zeros(space.dim());
        for (a, &ca) in self.c.iter().enumerate() {
            h = h.add_scaled(&space.generator(a, a)?, Complex64::new(ca, 0.0));
        }
        Ok(h)
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::domain(format!("K must be positive, got {k}")));
    }
    Ok(())
}

/// `<z|H|zp> = K c_N F_N(K; w) + (1/K) sum_alpha mu_alpha w_alpha F_N(K + 1; w)`
/// with `w_alpha = conj(z_alpha) zp_alpha`.
pub fn h_matrix_element(z: &Label, zp: &Label, hp: &HamiltonianParams, k: f64) -> Result<Complex64> {
    check_k(k)?;
    if z.modes() != hp.modes() || zp.modes() != hp.modes() {
        return Err(Error::domain("labels and Hamiltonian disagree on N"));
    }
    let w = z.overlap_args(zp);
    let f0 = f_series(k, &w, DEFAULT_SHELL_TOL)?;
    let f1 = f_series(k + 1.0, &w, DEFAULT_SHELL_TOL)?;
    let weighted: Complex64 = w.iter().enumerate().map(|(a, &x)| x * hp.mu(a)).sum();
    Ok(f0 * (k * hp.c_last()) + weighted * f1 / k)
}

/// Exponent of one imaginary-time slice in the exponentiated form,
/// `<z|H|zp> / <z|zp> = K c_N + sum mu_alpha w_alpha F_N(K+1; w) / (K F_N(K; w))`.
pub fn slice_exponent(z: &Label, zp: &Label, hp: &HamiltonianParams, k: f64) -> Result<Complex64> {
    let w = z.overlap_args(zp);
    let f0 = f_series(k, &w, DEFAULT_SHELL_TOL)?;
    if f0.norm() == 0.0 {
        return Err(Error::Singular("overlap vanishes".into()));
    }
    Ok(h_matrix_element(z, zp, hp, k)? / f0)
}

/// The frequency part of [`slice_exponent`] for one mode through Bessel
/// functions: `h sqrt(w) I_K(2 sqrt w) / I_{K-1}(2 sqrt w)`.
pub fn slice_exponent_bessel_n1(w: Complex64, h: f64, k: f64) -> Result<Complex64> {
    check_k(k)?;
    let s = w.sqrt();
    Ok(s * specfun::bessel_i_ratio(k, s * 2.0)? * h)
}

/// `Tr e^{-beta H}` summed over the basis up to `cutoff`, or the closed
/// form `e^{-beta K c_N} prod (1 - e^{-beta mu})^{-1}` when `cutoff` is `None`.
pub fn exact_spectral_trace(hp: &HamiltonianParams, k: f64, beta: f64, cutoff: Option<u32>) -> Result<f64> {
    check_k(k)?;
    check_beta(beta)?;
    hp.check_confining()?;
    match cutoff {
        None => Ok(math::exp(-beta * k * hp.c_last())
            * hp.mus().iter().map(|&m| 1.0 / -libm::expm1(-beta * m)).product::<f64>()),
        Some(c) => Ok(enumerate_basis(hp.modes(), c).iter().map(|n| math::exp(-beta * hp.energy(n, k))).sum()),
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// Diagonal kernel `<z|e^{-beta H}|z> = e^{-beta K c_N} F_N(K; |z_alpha|^2 e^{-beta mu_alpha})`.
pub fn heat_kernel_diagonal(r: &[f64], hp: &HamiltonianParams, k: f64, beta: f64) -> Result<f64> {
    let w: Vec<f64> = r.iter().enumerate().map(|(a, &x)| x * math::exp(-beta * hp.mu(a))).collect();
    Ok(math::exp(-beta * k * hp.c_last()) * f_series_real(k, &w)?)
}

/// `\int dmu <z|e^{-beta H}|z>` by simplex quadrature.
pub fn exact_kernel_trace_quadrature(
    hp: &HamiltonianParams,
    k: f64,
    beta: f64,
    scheme: &SimplexQuadScheme,
) -> Result<Estimate> {
    check_beta(beta)?;
    hp.check_confining()?;
    let model = MeasureModel::new(hp.modes(), k)?;
    if scheme.modes() != hp.modes() {
        return Err(Error::domain("quadrature scheme and Hamiltonian disagree on N"));
    }
    let q: Vec<f64> = hp.mus().iter().map(|&m| math::exp(-beta * m)).collect();
    let prefactor = math::exp(-beta * k * hp.c_last());
    let mut err = None;
    let mut w = vec![0.0; hp.modes()];
    let est = scheme.integrate(
        |x| model.ln_density_at(x),
        |r| {
            for ((wa, &ra), &qa) in w.iter_mut().zip(r).zip(&q) {
                *wa = ra * qa;
            }
            match f_series_real(k, &w) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let scale = prefactor * math::powf(PI, hp.modes() as f64);
    Ok(Estimate { value: scale * est.value, error: scale * est.error, evaluations: est.evaluations })
}

/// Monte Carlo proposal for the kernel trace.
///
/// Under the measure itself `<z|e^{-beta H}|z>` has infinite variance once
/// `q = max e^{-beta mu} >= 1/4`: it grows like `e^{2 sqrt(q R)}` against the
/// `e^{-2 sqrt R}` tail. The measure is the `r`-marginal of
/// `x ~ Gamma(K, 1)`, `r_a | x ~ Exponential(mean x)`; the proposal draws
/// `x ~ Gamma(K, s)` and `r_a | x ~ Exponential(mean x / t)` and reweights by
/// the joint density ratio `s^K e^{-x(1 - 1/s)} t^{-N} e^{-(1-t) R / x}`.
/// Every moment of the weighted estimator is finite when
/// `q < (1 - t)(1 - 1/s)`; both factors are set to `q^{2/5}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelProposal {
    /// Gamma scale of the mixing variable.
    pub s: f64,
    /// Rate multiplier of the exponentials.
    pub t: f64,
}

impl KernelProposal {
    /// The measure itself.
    pub const IDENTITY: KernelProposal = KernelProposal { s: 1.0, t: 1.0 };

    pub fn for_trace(hp: &HamiltonianParams, beta: f64) -> Self {
        let q_max = hp.mus().iter().map(|&m| math::exp(-beta * m)).fold(0.0, f64::max);
        let a = math::powf(q_max, 0.4);
        KernelProposal { s: 1.0 / (1.0 - a), t: 1.0 - a }
    }

    fn check(&self) -> Result<()> {
        if !(self.s >= 1.0 && self.s.is_finite() && self.t > 0.0 && self.t <= 1.0) {
            return Err(Error::domain(format!("proposal needs s >= 1 and t in (0, 1], got s = {}, t = {}", self.s, self.t)));
        }
        Ok(())
    }
}

/// Monte Carlo samples of the kernel trace under `proposal`.
pub fn kernel_trace_accumulate<R: Rng + ?Sized>(
    hp: &HamiltonianParams,
    k: f64,
    beta: f64,
    proposal: KernelProposal,
    rng: &mut R,
    samples: u64,
) -> Result<MeanAccumulator> {
    check_k(k)?;
    check_beta(beta)?;
    hp.check_confining()?;
    proposal.check()?;
    let KernelProposal { s, t } = proposal;
    let gamma = Gamma::new(k, s).map_err(|e| Error::domain(format!("{e}")))?;
    let ln_const = k * math::ln(s) - hp.modes() as f64 * math::ln(t);
    let mut acc = MeanAccumulator::new();
    let mut r = vec![0.0; hp.modes()];
    for _ in 0..samples {
        let x: f64 = gamma.sample(rng);
        for ra in r.iter_mut() {
            let e: f64 = Exp1.sample(rng);
            *ra = x * e / t;
        }
        let big_r: f64 = r.iter().sum();
        let ln_w = ln_const - x * (1.0 - 1.0 / s) - (1.0 - t) * big_r / x;
        acc.push(heat_kernel_diagonal(&r, hp, k, beta)? * math::exp(ln_w));
    }
    Ok(acc)
}

/// Real or imaginary time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMode {
    /// `e^{-beta H}`, horizon `beta`.
    Imaginary,
    /// `e^{-i T H}`, horizon `T`.
    Real,
}

/// Short-time factor per slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceWeights {
    /// `1 - Delta H` (or `1 - i Delta H`).
    Linear,
    /// `e^{-Delta H}` (or `e^{-i Delta H}`).
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    pub mode: TimeMode,
    pub horizon: f64,
    pub slices: u32,
    pub cutoff: u32,
    pub weights: SliceWeights,
}

impl TraceConfig {
    pub fn delta(&self) -> f64 {
        self.horizon / self.slices as f64
    }

    fn validate(&self) -> Result<()> {
        if self.slices == 0 {
            return Err(Error::config("slice count M must be at least 1"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::config(format!("horizon must be positive, got {}", self.horizon)));
        }
        Ok(())
    }
}

/// Diagonal of the single-slice operator on the truncated basis, with the
/// stability check for linear weights.
fn slice_factors(hp: &HamiltonianParams, space: &TruncatedRepSpace, cfg: &TraceConfig) -> Result<SparseOperator> {
    cfg.validate()?;
    let h = hp.operator(space)?;
    let delta = cfg.delta();
    let radius = h.max_abs_where(|r, c| r == c);
    let phase = match cfg.mode {
        TimeMode::Imaginary => Complex64::new(-delta, 0.0),
        TimeMode::Real => Complex64::new(0.0, -delta),
    };
    match cfg.weights {
        SliceWeights::Linear => {
            if delta * radius >= 1.0 {
                return Err(Error::config(format!(
                    "linear slice weights are unstable: Delta * spectral radius = {} >= 1 (M = {}, cutoff = {})",
                    delta * radius,
                    cfg.slices,
                    cfg.cutoff
                )));
            }
            Ok(SparseOperator::identity(space.dim()).add_scaled(&h, phase))
        }
        SliceWeights::Exponential => {
            // The truncated Hamiltonian is diagonal in the occupation basis.
            if h.entries().any(|(r, c, _)| r != c) {
                return Err(Error::config("exponential slice weights need a diagonal Hamiltonian"));
            }
            let diag = (0..space.dim()).map(|i| (phase * h.get(i, i)).exp()).collect();
            Ok(SparseOperator::diagonal(diag))
        }
    }
}

fn check_mode(hp: &HamiltonianParams, k: f64, cfg: &TraceConfig) -> Result<()> {
    check_k(k)?;
    if cfg.mode == TimeMode::Imaginary {
        hp.check_confining()?;
    }
    Ok(())
}

/// `Tr T^M` on the truncation, `T` the single-slice operator. Inserting the
/// resolution of unity between slices is exact on the truncated space, so
/// this is the sliced coherent-state product.
pub fn sliced_trace_matrix(hp: &HamiltonianParams, k: f64, cfg: &TraceConfig) -> Result<Complex64> {
    check_mode(hp, k, cfg)?;
    let space = TruncatedRepSpace::new(hp.modes(), k, cfg.cutoff)?;
    let t = slice_factors(hp, &space, cfg)?;
    let mut result = SparseOperator::identity(space.dim());
    let mut base = t;
    let mut m = cfg.slices;
    while m > 0 {
        if m & 1 == 1 {
            result = result.matmul(&base);
        }
        m >>= 1;
        if m > 0 {
            base = base.matmul(&base);
        }
    }
    Ok(result.trace())
}

/// Monte Carlo samples of the sliced product: `M` labels drawn independently
/// from the measure, slice kernels `<z_j|T|z_{j-1}>` with `T` the truncated
/// single-slice operator, cyclic closure `z_0 = z_M`. Accumulates the real
/// and imaginary parts; the expectation is [`sliced_trace_matrix`].
pub fn sliced_trace_accumulate<R: Rng + ?Sized>(
    hp: &HamiltonianParams,
    k: f64,
    cfg: &TraceConfig,
    rng: &mut R,
    samples: u64,
) -> Result<VectorAccumulator> {
    check_mode(hp, k, cfg)?;
    let space = TruncatedRepSpace::new(hp.modes(), k, cfg.cutoff)?;
    let t = slice_factors(hp, &space, cfg)?;
    let model = MeasureModel::new(hp.modes(), k)?;
    let m = cfg.slices as usize;
    let mut acc = VectorAccumulator::new(2);
    let mut states: Vec<Vec<Complex64>> = vec![Vec::new(); m];
    for _ in 0..samples {
        for s in states.iter_mut() {
            let z = model.sample(rng).label();
            *s = state_vector(&z, &space)?.amplitudes().to_vec();
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for j in 0..m {
            let bra = &states[j];
            let ket = t.apply(&states[(j + m - 1) % m]);
            prod *= bra.iter().zip(&ket).map(|(b, k)| b.conj() * k).sum::<Complex64>();
        }
        acc.push(&[prod.re, prod.im]);
    }
    Ok(acc)
}
