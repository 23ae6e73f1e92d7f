//! The radial measure of the coherent states and the integral identities it
//! satisfies.
//!
//! `dmu = sigma(r) (1/2)^N dr_1 dtheta_1 ... dr_N dtheta_N` with
//! `sigma(r) = 2 / (pi^N Gamma(K)) R^{(K-N)/2} K_{K-N}(2 sqrt R)` and
//! `R = r_1 + ... + r_N`, `z_a = sqrt(r_a) e^{i theta_a}`.
//!
//! Integrating out the angles leaves the probability density `pi^N sigma(r)`
//! on the positive orthant. It is the `r`-marginal of
//! `x ~ Gamma(K, 1)`, `r_a | x ~ Exponential(mean x)` independently, which
//! gives an exact sampler for every `K > 0`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::coherent::{coefficient, state_vector, Label};
use crate::fock::{MultiIndex, TruncatedRepSpace};
use crate::math;
use crate::quad::{DoubleExponential, Estimate, GaussLegendre};
use crate::specfun;
use crate::stats::VectorAccumulator;
use crate::{Error, Result};

/// The measure for `N` modes and representation label `K > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureModel {
    modes: usize,
    k: f64,
}

/// A point of label space in radial/angle coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPoint {
    /// `r_a = |z_a|^2`.
    pub r: Vec<f64>,
    /// `theta_a` in `[0, 2 pi)`.
    pub theta: Vec<f64>,
}

impl RadialPoint {
    pub fn label(&self) -> Label {
        Label::from_polar(&self.r, &self.theta)
    }

    pub fn radius_sq(&self) -> f64 {
        self.r.iter().sum()
    }
}

impl MeasureModel {
    pub fn new(modes: usize, k: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::domain("the measure needs N >= 1"));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::domain(format!("K must be positive, got {k}")));
        }
        Ok(MeasureModel { modes, k })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `ln sigma` as a function of `R = sum r_a > 0`.
    pub fn ln_density_at(&self, big_r: f64) -> Result<f64> {
        if !(big_r > 0.0) {
            return Err(Error::domain(format!("ln_density_at needs R > 0, got {big_r}")));
        }
        let n = self.modes as f64;
        let nu = self.k - n;
        Ok(LN_2 - n * math::ln(PI) - specfun::ln_gamma(self.k)?
            + 0.5 * nu * math::ln(big_r)
            + specfun::ln_bessel_k(nu, 2.0 * math::sqrt(big_r))?)
    }

    /// `sigma(r)`. At the origin this is the finite limit
    /// `Gamma(K - N) / (pi^N Gamma(K))` when `K > N`, and a
    /// [`Error::Singular`] otherwise.
    pub fn density(&self, r: &[f64]) -> Result<f64> {
        if r.len() != self.modes {
            return Err(Error::domain(format!("expected {} radial coordinates, got {}", self.modes, r.len())));
        }
        if r.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::domain("radial coordinates must be finite and nonnegative"));
        }
        let big_r: f64 = r.iter().sum();
        if big_r == 0.0 {
            let n = self.modes as f64;
            if self.k > n {
                return Ok(specfun::gamma(self.k - n)? / (math::powf(PI, n) * specfun::gamma(self.k)?));
            }
            return Err(Error::Singular(format!(
                "density diverges at the origin for K = {} <= N = {}",
                self.k, self.modes
            )));
        }
        Ok(math::exp(self.ln_density_at(big_r)?))
    }

    /// Draws one point from the normalized measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RadialPoint {
        let gamma = Gamma::new(self.k, 1.0).expect("K > 0 checked at construction");
        let x: f64 = gamma.sample(rng);
        let r = (0..self.modes)
            .map(|_| {
                let e: f64 = Exp1.sample(rng);
                x * e
            })
            .collect();
        let theta = (0..self.modes).map(|_| rng.random::<f64>() * TAU).collect();
        RadialPoint { r, theta }
    }

    /// Probability density of `R = sum r_a` under the measure:
    /// `pi^N sigma(R) R^{N-1} / (N-1)!`.
    pub fn ln_radius_density(&self, big_r: f64) -> Result<f64> {
        let n = self.modes as f64;
        Ok(n * math::ln(PI) + self.ln_density_at(big_r)? + (n - 1.0) * math::ln(big_r) - specfun::ln_gamma(n)?)
    }

    /// `P(R <= bound)` by quadrature of the radius density.
    pub fn radius_cdf(&self, bound: f64) -> Result<f64> {
        if !(bound > 0.0) {
            return Ok(0.0);
        }
        let de = DoubleExponential::new(1e-12);
        let mut err = None;
        // Integrate over whichever side of the bound is better resolved.
        let value = if bound <= self.k * self.modes as f64 {
            let est = de.unit_interval(|x, _| guard(&mut err, self.ln_radius_density(bound * x).map(math::exp)))?;
            bound * est.value
        } else {
            let est = de.half_line(|t| guard(&mut err, self.ln_radius_density(bound + t).map(math::exp)))?;
            1.0 - est.value
        };
        if let Some(e) = err {
            return Err(e);
        }
        Ok(value.clamp(0.0, 1.0))
    }

    /// Inverse of [`Self::radius_cdf`] by bisection.
    pub fn radius_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let mut hi = self.k * self.modes as f64 + 1.0;
        while self.radius_cdf(hi)? < p {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.radius_cdf(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

// Record the first error raised inside a quadrature closure and feed the
// rule a zero in its place.
fn guard(slot: &mut Option<Error>, v: Result<f64>) -> f64 {
    match v {
        Ok(x) => x,
        Err(e) => {
            if slot.is_none() {
                *slot = Some(e);
            }
            0.0
        }
    }
}

/// Quadrature over the positive orthant in the simplex coordinates
/// `r_1 = xi_1 (1 - xi_2)`, `r_2 = xi_1 xi_2 (1 - xi_3)`, ...,
/// `r_N = xi_1 xi_2 ... xi_N`, with Jacobian
/// `xi_1^{N-1} xi_2^{N-2} ... xi_{N-1}` and `R = xi_1`.
///
/// The half-line `xi_1` integral uses the double-exponential rule; the
/// bounded factors use Gauss-Legendre when the integrand is a polynomial the
/// rule integrates exactly, and tanh-sinh otherwise.
#[derive(Debug, Clone)]
pub struct SimplexQuadScheme {
    modes: usize,
    gl: GaussLegendre,
    de: DoubleExponential,
}

/// Gauss-Legendre nodes per bounded simplex factor.
pub const SIMPLEX_GL_NODES: usize = 64;

/// Outcome of checking an integral identity numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    /// Integrand evaluations spent on the left-hand side.
    pub evaluations: usize,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, evaluations: usize) -> Self {
        IdentityCheck { lhs, rhs, rel_err: math::abs(lhs - rhs) / math::abs(rhs), evaluations }
    }
}

impl SimplexQuadScheme {
    pub fn new(modes: usize) -> Self {
        Self::with_rule(modes, DoubleExponential::new(1e-13))
    }

    pub fn with_rule(modes: usize, de: DoubleExponential) -> Self {
        assert!(modes >= 1);
        SimplexQuadScheme { modes, gl: GaussLegendre::new(SIMPLEX_GL_NODES), de }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `\int_0^1 x^a (1 - x)^b dx` for `a, b > -1`.
    pub fn simplex_factor(&self, a: f64, b: f64) -> Result<f64> {
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::domain(format!("simplex factor needs exponents > -1, got ({a}, {b})")));
        }
        let is_small_int = |v: f64| v == math::round(v) && v >= 0.0;
        if is_small_int(a) && is_small_int(b) && a + b <= (2 * self.gl.len() - 1) as f64 {
            let (ai, bi) = (a as i32, b as i32);
            return Ok(self.gl.integrate(0.0, 1.0, |x| libm::pow(x, ai as f64) * libm::pow(1.0 - x, bi as f64)));
        }
        let est = self.de.unit_interval(|x, c| math::exp(a * math::ln(x) + b * math::ln(c)))?;
        Ok(est.value)
    }

    /// `\int_{R_+^N} prod_a r_a^{s_a} g(R) dr` where `ln_g` gives `ln g(R)`.
    ///
    /// Factorizes into one half-line integral over `R` and `N - 1` Beta-type
    /// integrals over the simplex coordinates.
    pub fn monomial_radial<G>(&self, s: &[f64], ln_g: G) -> Result<Estimate>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        if s.len() != self.modes {
            return Err(Error::domain(format!("expected {} exponents, got {}", self.modes, s.len())));
        }
        if s.iter().any(|&x| !(x > -1.0)) {
            return Err(Error::domain("monomial exponents must exceed -1"));
        }
        let total: f64 = s.iter().sum();
        let radial = self.radial_integral(self.modes as f64 - 1.0 + total, ln_g)?;
        Ok(Estimate { value: radial.value * self.simplex_product(s)?, ..radial })
    }

    /// Product of the bounded factors for exponents `s` (zero-based), i.e.
    /// `prod_{k=2}^N \int_0^1 xi^{N-k+s_k+...+s_N} (1-xi)^{s_{k-1}} dxi`.
    pub fn simplex_product(&self, s: &[f64]) -> Result<f64> {
        let n = self.modes;
        let mut prod = 1.0;
        for k in 2..=n {
            let tail: f64 = s[k - 1..].iter().sum();
            prod *= self.simplex_factor((n - k) as f64 + tail, s[k - 2])?;
        }
        Ok(prod)
    }

    /// `\int_0^inf R^power g(R) dR`.
    pub fn radial_integral<G>(&self, power: f64, mut ln_g: G) -> Result<Estimate>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        let mut err = None;
        let est = self
            .de
            .half_line(|x| guard(&mut err, ln_g(x).map(|l| math::exp(power * math::ln(x) + l))))?;
        match err {
            Some(e) => Err(e),
            None => Ok(est),
        }
    }

    /// `\int_{R_+^N} w(R) f(r) dr` for a radial weight given by `ln_w` and a
    /// smooth `f`; the bounded coordinates use a tensor Gauss-Legendre rule.
    pub fn integrate<W, F>(&self, mut ln_w: W, mut f: F) -> Result<Estimate>
    where
        W: FnMut(f64) -> Result<f64>,
        F: FnMut(&[f64]) -> f64,
    {
        let n = self.modes;
        let nodes: Vec<(f64, f64)> = self.gl.mapped(0.0, 1.0).collect();
        let mut r = vec![0.0; n];
        let mut xi = vec![0.0; n];
        let mut err = None;
        let est = self.de.half_line(|x1| {
            let w = match ln_w(x1) {
                Ok(l) => math::exp((n as f64 - 1.0) * math::ln(x1) + l),
                Err(e) => return guard(&mut err, Err(e)),
            };
            if w == 0.0 {
                return 0.0;
            }
            xi[0] = x1;
            w * inner_tensor(&nodes, &mut xi, &mut r, 1, 1.0, &mut f)
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(est),
        }
    }
}

// Recursive tensor rule over xi_2..xi_N; `jac` carries the Jacobian factors
// of the coordinates fixed so far.
fn inner_tensor<F: FnMut(&[f64]) -> f64>(
    nodes: &[(f64, f64)],
    xi: &mut [f64],
    r: &mut [f64],
    depth: usize,
    jac: f64,
    f: &mut F,
) -> f64 {
    let n = xi.len();
    if depth == n {
        let mut prefix = 1.0;
        for a in 0..n {
            prefix *= xi[a];
            r[a] = if a + 1 < n { prefix * (1.0 - xi[a + 1]) } else { prefix };
        }
        return jac * f(r);
    }
    let power = (n - depth - 1) as i32;
    let mut acc = 0.0;
    for &(x, w) in nodes {
        xi[depth] = x;
        acc += w * inner_tensor(nodes, xi, r, depth + 1, jac * libm::pow(x, power as f64), f);
    }
    acc
}

/// `ln(2 R^{(K-N)/2} K_{K-N}(2 sqrt R))`, the kernel of the orthant identity.
fn ln_bessel_kernel(modes: usize, k: f64, big_r: f64) -> Result<f64> {
    let nu = k - modes as f64;
    Ok(LN_2 + 0.5 * nu * math::ln(big_r) + specfun::ln_bessel_k(nu, 2.0 * math::sqrt(big_r))?)
}

/// Moment identity `pi^N Gamma(K) \int sigma prod r^{s} dr = prod Gamma(s_a + 1) Gamma(K + sum s)`.
/// Integer `s` are the moments of the measure; real `s > -1` are accepted too.
pub fn moment_check(model: &MeasureModel, s: &[f64], scheme: &SimplexQuadScheme) -> Result<IdentityCheck> {
    check_scheme(model, scheme)?;
    let n = model.modes as f64;
    let est = scheme.monomial_radial(s, |x| model.ln_density_at(x))?;
    let lhs = math::powf(PI, n) * specfun::gamma(model.k)? * est.value;
    Ok(IdentityCheck::new(lhs, orthant_rhs(model.k, s)?, est.evaluations))
}

/// [`moment_check`] for an occupation tuple.
pub fn moment_check_index(model: &MeasureModel, n: &MultiIndex, scheme: &SimplexQuadScheme) -> Result<IdentityCheck> {
    let s: Vec<f64> = n.as_slice().iter().map(|&m| m as f64).collect();
    moment_check(model, &s, scheme)
}

fn check_scheme(model: &MeasureModel, scheme: &SimplexQuadScheme) -> Result<()> {
    if scheme.modes != model.modes {
        return Err(Error::domain("quadrature scheme and measure disagree on N"));
    }
    Ok(())
}

fn orthant_rhs(k: f64, s: &[f64]) -> Result<f64> {
    let total: f64 = s.iter().sum();
    let mut rhs = specfun::gamma(k + total)?;
    for &x in s {
        rhs *= specfun::gamma(x + 1.0)?;
    }
    Ok(rhs)
}

/// Parameters of the orthant identity
/// `\int prod dr_a r_a^{s_a} 2 R^{(K-N)/2} K_{K-N}(2 sqrt R) = prod Gamma(s_a + 1) Gamma(K + sum s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaAParams {
    pub s: Vec<f64>,
    pub k: f64,
}

/// Parameters of `\int_0^inf x^{mu-1} K_nu(a x) dx = (1/4)(2/a)^mu Gamma((mu+nu)/2) Gamma((mu-nu)/2)`,
/// valid for `a > 0`, `mu > |nu|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormulaBParams {
    pub mu: f64,
    pub nu: f64,
    pub a: f64,
}

pub fn verify_formula_a(p: &FormulaAParams) -> Result<IdentityCheck> {
    if p.s.is_empty() {
        return Err(Error::domain("orthant identity needs N >= 1"));
    }
    if !(p.k.is_finite() && p.k > 0.0) {
        return Err(Error::domain(format!("K must be positive, got {}", p.k)));
    }
    if p.s.iter().any(|&x| !(x > -1.0)) {
        return Err(Error::domain("orthant identity needs every s_a > -1"));
    }
    let modes = p.s.len();
    let scheme = SimplexQuadScheme::new(modes);
    let est = scheme.monomial_radial(&p.s, |x| ln_bessel_kernel(modes, p.k, x))?;
    Ok(IdentityCheck::new(est.value, orthant_rhs(p.k, &p.s)?, est.evaluations))
}

/// Closed form of the Mellin-type integral of `K_nu`.
pub fn formula_b_closed(p: &FormulaBParams) -> Result<f64> {
    check_formula_b(p)?;
    Ok(0.25
        * math::powf(2.0 / p.a, p.mu)
        * specfun::gamma(0.5 * (p.mu + p.nu))?
        * specfun::gamma(0.5 * (p.mu - p.nu))?)
}

fn check_formula_b(p: &FormulaBParams) -> Result<()> {
    if !(p.a > 0.0 && p.a.is_finite()) {
        return Err(Error::domain(format!("Mellin integral of K_nu needs a > 0, got {}", p.a)));
    }
    if !(p.mu > math::abs(p.nu)) {
        return Err(Error::domain(format!(
            "Mellin integral of K_nu converges only for mu > |nu|, got mu = {}, nu = {}",
            p.mu, p.nu
        )));
    }
    Ok(())
}

pub fn verify_formula_b(p: &FormulaBParams) -> Result<IdentityCheck> {
    check_formula_b(p)?;
    let de = DoubleExponential::new(1e-13);
    let mut err = None;
    let est = de.half_line(|x| {
        guard(
            &mut err,
            specfun::ln_bessel_k(p.nu, p.a * x).map(|l| math::exp((p.mu - 1.0) * math::ln(x) + l)),
        )
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(IdentityCheck::new(est.value, formula_b_closed(p)?, est.evaluations))
}

/// Resolution-of-unity Gram matrix with its deviation from the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub dim: usize,
    /// Row-major `G[m][n] = \int dmu <m|z><z|n>`.
    pub entries: Vec<Complex64>,
    pub max_deviation: f64,
    pub max_diagonal_deviation: f64,
    pub max_off_diagonal: f64,
}

impl GramReport {
    fn from_entries(dim: usize, entries: Vec<Complex64>) -> Self {
        let mut diag: f64 = 0.0;
        let mut off: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let g = entries[i * dim + j];
                if i == j {
                    diag = diag.max((g - Complex64::new(1.0, 0.0)).norm());
                } else {
                    off = off.max(g.norm());
                }
            }
        }
        GramReport { dim, entries, max_deviation: diag.max(off), max_diagonal_deviation: diag, max_off_diagonal: off }
    }
}

/// Gram matrix by quadrature. The angle integrals separate from the radial
/// one; each is evaluated with an equispaced rule that is exact for the
/// trigonometric polynomials that occur, so off-diagonal entries vanish to
/// rounding.
pub fn gram_quadrature(model: &MeasureModel, cutoff: u32, scheme: &SimplexQuadScheme) -> Result<GramReport> {
    check_scheme(model, scheme)?;
    let space = TruncatedRepSpace::new(model.modes, model.k, cutoff)?;
    let dim = space.dim();
    let n = model.modes;
    let coefs = space.basis().iter().map(|m| coefficient(m, model.k)).collect::<Result<Vec<_>>>()?;

    let points = 4 * (cutoff as usize + 1);
    let angular = |d: i64| -> Complex64 {
        let h = TAU / points as f64;
        (0..points)
            .map(|j| Complex64::from_polar(1.0, d as f64 * j as f64 * h))
            .sum::<Complex64>()
            * h
    };

    // Radial half-line integrals depend only on 2 * sum of exponents.
    let mut radial: BTreeMap<u32, f64> = BTreeMap::new();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (i, m) in space.basis().iter().enumerate() {
        for (j, l) in space.basis().iter().enumerate() {
            let s: Vec<f64> = m.as_slice().iter().zip(l.as_slice()).map(|(&a, &b)| 0.5 * (a + b) as f64).collect();
            let key = m.degree() + l.degree();
            let rad = match radial.get(&key) {
                Some(&v) => v,
                None => {
                    let v = scheme.radial_integral(n as f64 - 1.0 + 0.5 * key as f64, |x| model.ln_density_at(x))?.value;
                    radial.insert(key, v);
                    v
                }
            };
            let mut ang = Complex64::new(1.0, 0.0);
            for (&a, &b) in m.as_slice().iter().zip(l.as_slice()) {
                ang *= angular(a as i64 - b as i64);
            }
            let half_pow = math::powf(0.5, n as f64);
            entries[i * dim + j] = ang * (coefs[i] * coefs[j] * half_pow * rad * scheme.simplex_product(&s)?);
        }
    }
    Ok(GramReport::from_entries(dim, entries))
}

/// Monte Carlo accumulator for the Gram matrix: real and imaginary parts of
/// `<m|z><z|n>` for `z` drawn from the measure, row-major.
pub fn gram_accumulate<R: Rng + ?Sized>(
    model: &MeasureModel,
    space: &TruncatedRepSpace,
    rng: &mut R,
    samples: u64,
) -> Result<VectorAccumulator> {
    let dim = space.dim();
    let mut acc = VectorAccumulator::new(2 * dim * dim);
    let mut buf = vec![0.0; 2 * dim * dim];
    for _ in 0..samples {
        let z = model.sample(rng).label();
        let v = state_vector(&z, space)?;
        let a = v.amplitudes();
        for i in 0..dim {
            for j in 0..dim {
                let g = a[i] * a[j].conj();
                buf[2 * (i * dim + j)] = g.re;
                buf[2 * (i * dim + j) + 1] = g.im;
            }
        }
        acc.push(&buf);
    }
    Ok(acc)
}

/// Summary of a Monte Carlo Gram estimate against the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMonteCarlo {
    pub report: GramReport,
    /// Largest `|estimate - target| / std_error` over real and imaginary parts.
    pub max_z_score: f64,
    pub samples: u64,
}

pub fn gram_summarize(dim: usize, acc: &VectorAccumulator) -> GramMonteCarlo {
    let est = acc.estimates();
    let mut entries = Vec::with_capacity(dim * dim);
    let mut z: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let re = est[2 * (i * dim + j)];
            let im = est[2 * (i * dim + j) + 1];
            let target = if i == j { 1.0 } else { 0.0 };
            z = z.max(re.z_score(target)).max(im.z_score(0.0));
            entries.push(Complex64::new(re.mean, im.mean));
        }
    }
    let samples = acc.get(0).count();
    GramMonteCarlo { report: GramReport::from_entries(dim, entries), max_z_score: z, samples }
}
