//! Extended Barut-Girardello coherent states.
//!
//! `|z> = sum_n C_n z_1^{n_1} ... z_N^{n_N} |n>` with
//! `C_n = sqrt(Gamma(K) / (n_1! ... n_N! Gamma(K + |n|)))` and the overall
//! normalization fixed to one, so states are not unit vectors:
//! `<z|z> = F_N(K; |z_1|^2, ..., |z_N|^2)`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fock::{MultiIndex, TruncatedRepSpace};
use crate::math;
use crate::specfun;
use crate::{Error, Result};

/// Relative size of the last degree shell at which `F_N` summation stops.
pub const DEFAULT_SHELL_TOL: f64 = 1e-14;
/// Maximum number of degree shells summed before giving up.
pub const DEFAULT_MAX_SHELLS: usize = 500;

/// Coherent-state label `z` in `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Label(Vec<Complex64>);

impl Label {
    pub fn new(z: Vec<Complex64>) -> Self {
        Label(z)
    }

    pub fn zeros(modes: usize) -> Self {
        Label(alloc::vec![Complex64::new(0.0, 0.0); modes])
    }

    pub fn from_real(z: &[f64]) -> Self {
        Label(z.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `z_a = sqrt(r_a) e^{i theta_a}`.
    pub fn from_polar(r: &[f64], theta: &[f64]) -> Self {
        Label(
            r.iter()
                .zip(theta)
                .map(|(&r, &t)| Complex64::from_polar(math::sqrt(r), t))
                .collect(),
        )
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// Componentwise `conj(z_a) zp_a`, the argument of the overlap series.
    pub fn overlap_args(&self, other: &Label) -> Vec<Complex64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).collect()
    }

    fn check_finite(&self) -> Result<()> {
        if self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("coherent-state label has non-finite entries"))
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::domain(format!("K must be positive, got {k}")));
    }
    Ok(())
}

/// `C_n = 1 / sqrt(n_1! ... n_N! (K)_{|n|})`.
pub fn coefficient(n: &MultiIndex, k: f64) -> Result<f64> {
    check_k(k)?;
    let mut denom = specfun::pochhammer(k, n.degree()).ok();
    if let Some(d) = denom.as_mut() {
        for &m in n.as_slice() {
            *d *= specfun::pochhammer(1.0, m).unwrap_or(f64::INFINITY);
        }
    }
    match denom {
        Some(d) if d.is_finite() => Ok(1.0 / math::sqrt(d)),
        _ => {
            let mut ln_d = specfun::ln_pochhammer(k, n.degree())?;
            for &m in n.as_slice() {
                ln_d += specfun::ln_gamma(m as f64 + 1.0)?;
            }
            Ok(math::exp(-0.5 * ln_d))
        }
    }
}

/// Amplitudes of `|z>` on a truncated basis.
#[derive(Debug, Clone)]
pub struct CoherentVector<'a> {
    space: &'a TruncatedRepSpace,
    amplitudes: Vec<Complex64>,
}

impl<'a> CoherentVector<'a> {
    pub fn space(&self) -> &'a TruncatedRepSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `<self|other> = sum_n conj(a_n) b_n` over the truncated basis.
    pub fn dot(&self, other: &CoherentVector<'_>) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

fn monomial(z: &[Complex64], n: &MultiIndex) -> Complex64 {
    z.iter()
        .zip(n.as_slice())
        .map(|(z, &p)| z.powu(p))
        .product()
}

fn check_label(z: &Label, space: &TruncatedRepSpace) -> Result<()> {
    z.check_finite()?;
    if z.modes() != space.modes() {
        return Err(Error::domain(format!(
            "label has {} components but the space has N = {}",
            z.modes(),
            space.modes()
        )));
    }
    Ok(())
}

/// `|z>` truncated to `space`, from the closed-form coefficients.
pub fn state_vector<'a>(z: &Label, space: &'a TruncatedRepSpace) -> Result<CoherentVector<'a>> {
    check_label(z, space)?;
    let amplitudes = space
        .basis()
        .iter()
        .map(|n| Ok(monomial(z.as_slice(), n) * coefficient(n, space.k())?))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoherentVector { space, amplitudes })
}

/// `|z>` truncated to `space`, built by stepping the one-step relation
/// `C_{n + e_a} sqrt(n_a + 1) sqrt(K + |n|) = C_n` out from the vacuum.
pub fn state_vector_by_recursion<'a>(z: &Label, space: &'a TruncatedRepSpace) -> Result<CoherentVector<'a>> {
    check_label(z, space)?;
    let k = space.k();
    let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); space.dim()];
    // Degree ordering guarantees every predecessor is filled first.
    for (i, n) in space.basis().iter().enumerate() {
        let Some(a) = n.as_slice().iter().position(|&m| m > 0) else {
            amplitudes[i] = Complex64::new(1.0, 0.0);
            continue;
        };
        let prev = n.decremented(a).expect("n_a > 0");
        let j = space.index_of(&prev).expect("predecessor lies in the truncated basis");
        let step = math::sqrt(n.get(a) as f64) * math::sqrt(k + prev.degree() as f64);
        amplitudes[i] = amplitudes[j] * z.as_slice()[a] / step;
    }
    Ok(CoherentVector { space, amplitudes })
}

/// Relative residual of the eigen-equation `E(N, alpha)|z> = z_alpha |z>`
/// (`alpha` zero-based, `< N`) on components of degree at most `cutoff - 1`.
pub fn eigen_residual(z: &Label, space: &TruncatedRepSpace, alpha: usize) -> Result<f64> {
    if space.cutoff() < 1 {
        return Err(Error::config("eigen-residual needs cutoff >= 1"));
    }
    if alpha >= space.modes() {
        return Err(Error::domain(format!("alpha = {alpha} must be below N = {}", space.modes())));
    }
    let v = state_vector(z, space)?;
    let lowered = space.generator(space.modes(), alpha)?.apply(v.amplitudes());
    let za = z.as_slice()[alpha];
    let mut resid = 0.0;
    let mut norm = 0.0;
    for (i, (l, a)) in lowered.iter().zip(v.amplitudes()).enumerate() {
        if space.is_interior(i, 1) {
            resid += (l - za * a).norm_sqr();
            norm += a.norm_sqr();
        }
    }
    Ok(math::sqrt(resid) / math::sqrt(norm))
}

/// Sum of `F_N` with its convergence data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: Complex64,
    pub shells: usize,
}

/// `F_N(K; w) = sum_n Gamma(K) / (n_1! ... n_N! Gamma(K + |n|)) w_1^{n_1} ... w_N^{n_N}`,
/// summed shell by shell in total degree.
///
/// The degree-`d` shell equals `W^d / (d! (K)_d)` with `W = sum w_a` by the
/// multinomial theorem, so `F_N(K; w) = 0F1(K; W)`.
pub fn f_series_sum(k: f64, w: &[Complex64], tol: f64, max_shells: usize) -> Result<SeriesSum> {
    check_k(k)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("series tolerance must be positive, got {tol}")));
    }
    let big_w: Complex64 = w.iter().sum();
    if !(big_w.re.is_finite() && big_w.im.is_finite()) {
        return Err(Error::domain("non-finite series argument"));
    }
    let wabs = big_w.norm();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut biggest: f64 = 1.0;
    for d in 0..max_shells {
        let df = d as f64;
        term *= big_w / ((df + 1.0) * (k + df));
        sum += term;
        let t = term.norm();
        biggest = biggest.max(t);
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::Overflow("F_N series"));
        }
        let decreasing = wabs < (df + 2.0) * (k + df + 1.0);
        if decreasing && t <= tol * sum.norm().max(f64::EPSILON * biggest) {
            return Ok(SeriesSum { value: sum, shells: d + 2 });
        }
    }
    Err(Error::Convergence { limit: max_shells, partial: sum.norm() })
}

/// `F_N(K; w)` with the default shell cap.
pub fn f_series(k: f64, w: &[Complex64], tol: f64) -> Result<Complex64> {
    Ok(f_series_sum(k, w, tol, DEFAULT_MAX_SHELLS)?.value)
}

/// Real `F_N(K; w)` for nonnegative real arguments.
pub fn f_series_real(k: f64, w: &[f64]) -> Result<f64> {
    let w: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(f_series(k, &w, DEFAULT_SHELL_TOL)?.re)
}

/// `F_1(K; x) = Gamma(K) x^{(1-K)/2} I_{K-1}(2 sqrt x)` for `x > 0`, `K >= 1`.
pub fn f1_bessel(k: f64, x: f64) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::domain(format!("Bessel form of F_1 needs K >= 1, got {k}")));
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!("Bessel form of F_1 needs x > 0, got {x}")));
    }
    let g = specfun::gamma(k)?;
    Ok(g * math::powf(x, 0.5 * (1.0 - k)) * specfun::bessel_i(k - 1.0, 2.0 * math::sqrt(x))?)
}

/// `<z|zp> = F_N(K; conj(z_a) zp_a)`.
pub fn inner_product(z: &Label, zp: &Label, k: f64) -> Result<Complex64> {
    if z.modes() != zp.modes() {
        return Err(Error::domain("labels have different lengths"));
    }
    z.check_finite()?;
    zp.check_finite()?;
    f_series(k, &z.overlap_args(zp), DEFAULT_SHELL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_label(rng: &mut ChaCha8Rng, modes: usize, radius: f64) -> Label {
        Label::new(
            (0..modes)
                .map(|_| {
                    let r = radius * rng.random::<f64>().sqrt();
                    Complex64::from_polar(r, rng.random::<f64>() * core::f64::consts::TAU)
                })
                .collect(),
        )
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficient(&MultiIndex::zeros(3), 2.5).unwrap(), 1.0);
        assert!((coefficient(&MultiIndex::new(vec![3]), 2.0).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        let v = coefficient(&MultiIndex::new(vec![1, 1]), 1.0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-10);
        assert!(matches!(coefficient(&MultiIndex::zeros(1), 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn coefficient_large_index_uses_logs() {
        let n = MultiIndex::new(vec![80, 70]);
        let v = coefficient(&n, 3.0).unwrap();
        let ln = -0.5
            * (specfun::ln_gamma(81.0).unwrap()
                + specfun::ln_gamma(71.0).unwrap()
                + specfun::ln_gamma(153.0).unwrap()
                - specfun::ln_gamma(3.0).unwrap());
        assert!(((v.ln() - ln) / ln).abs() < 1e-12);
    }

    #[test]
    fn vacuum_label() {
        let s = TruncatedRepSpace::new(2, 1.5, 3).unwrap();
        let v = state_vector(&Label::zeros(2), &s).unwrap();
        assert_eq!(v.amplitudes()[0], c(1.0, 0.0));
        assert!(v.amplitudes()[1..].iter().all(|a| *a == c(0.0, 0.0)));
    }

    #[test]
    fn amplitudes_n1() {
        let s = TruncatedRepSpace::new(1, 2.0, 3).unwrap();
        let v = state_vector(&Label::from_real(&[1.0]), &s).unwrap();
        let want = [1.0, 1.0 / 2f64.sqrt(), 1.0 / (2.0 * 3f64.sqrt()), 1.0 / 12.0];
        for (a, w) in v.amplitudes().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn recursion_matches_closed_form() {
        let s = TruncatedRepSpace::new(2, 2.5, 6).unwrap();
        let z = Label::new(vec![c(0.3, 0.4), c(-1.1, 0.0)]);
        let a = state_vector(&z, &s).unwrap();
        let b = state_vector_by_recursion(&z, &s).unwrap();
        let dev = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(dev <= 1e-13);
    }

    #[test]
    fn recursion_matches_closed_form_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for modes in 1..=3 {
            for &k in &[0.5, 1.0, 2.5] {
                let s = TruncatedRepSpace::new(modes, k, 6).unwrap();
                let z = random_label(&mut rng, modes, 1.5);
                let a = state_vector(&z, &s).unwrap();
                let b = state_vector_by_recursion(&z, &s).unwrap();
                for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                    assert!((x - y).norm() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn classical_bg_amplitudes_n1() {
        // N = 1 with label 2K: z^n / sqrt(n! (2K)_n).
        let two_k = 1.7;
        let s = TruncatedRepSpace::new(1, two_k, 10).unwrap();
        let z = c(0.4, -0.9);
        let v = state_vector(&Label::new(vec![z]), &s).unwrap();
        for (n, a) in v.amplitudes().iter().enumerate() {
            let n = n as u32;
            let bg = z.powu(n) / (specfun::pochhammer(1.0, n).unwrap() * specfun::pochhammer(two_k, n).unwrap()).sqrt();
            assert!((a - bg).norm() <= 1e-14 * bg.norm().max(1e-300));
        }
    }

    #[test]
    fn eigen_property() {
        let s = TruncatedRepSpace::new(1, 2.0, 8).unwrap();
        assert_eq!(eigen_residual(&Label::zeros(1), &s, 0).unwrap(), 0.0);
        assert!(eigen_residual(&Label::from_real(&[0.7]), &s, 0).unwrap() <= 1e-12);
        let s = TruncatedRepSpace::new(3, 3.5, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z = random_label(&mut rng, 3, 1.0);
            for a in 0..3 {
                assert!(eigen_residual(&z, &s, a).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn eigen_residual_errors() {
        let s = TruncatedRepSpace::new(2, 1.0, 0).unwrap();
        assert!(matches!(eigen_residual(&Label::zeros(2), &s, 0), Err(Error::Config(_))));
        let s = TruncatedRepSpace::new(2, 1.0, 3).unwrap();
        assert!(matches!(eigen_residual(&Label::zeros(2), &s, 2), Err(Error::Domain(_))));
        assert!(matches!(state_vector(&Label::zeros(3), &s), Err(Error::Domain(_))));
    }

    #[test]
    fn f_series_at_zero() {
        assert_eq!(f_series(2.5, &[c(0.0, 0.0); 3], 1e-14).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn f1_bessel_identity() {
        for &k in &[1.0, 2.0, 5.0] {
            for &x in &[0.1, 1.0, 10.0] {
                let series = f_series_real(k, &[x]).unwrap();
                let bessel = f1_bessel(k, x).unwrap();
                assert!(((series - bessel) / bessel).abs() <= 1e-10, "K = {k}, x = {x}");
            }
        }
    }

    #[test]
    fn single_argument_reduction() {
        let w = [c(0.8, -0.3), c(0.0, 0.0), c(0.0, 0.0)];
        let a = f_series(1.5, &w, 1e-15).unwrap();
        let b = f_series(1.5, &w[..1], 1e-15).unwrap();
        assert!((a - b).norm() <= 1e-15);
    }

    // Brute force over n_1, n_2 <= 60 with the term written out directly.
    fn brute_force_f2(k: f64, w: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for n1 in 0..=60u32 {
            for n2 in 0..=60u32 {
                let ln_t = specfun::ln_gamma(k).unwrap() - specfun::ln_gamma(n1 as f64 + 1.0).unwrap()
                    - specfun::ln_gamma(n2 as f64 + 1.0).unwrap()
                    - specfun::ln_gamma(k + (n1 + n2) as f64).unwrap()
                    + n1 as f64 * w[0].ln()
                    + n2 as f64 * w[1].ln();
                s += ln_t.exp();
            }
        }
        s
    }

    #[test]
    fn f2_against_brute_force() {
        // 50-digit reference: 2.46023127869590130159...
        let v = f_series_real(3.0, &[1.0, 2.0]).unwrap();
        assert!((v - 2.460_231_278_695_901_3).abs() < 1e-14);
        assert!(((v - brute_force_f2(3.0, [1.0, 2.0])) / v).abs() < 1e-13);
    }

    #[test]
    fn f_series_cap() {
        let r = f_series_sum(1.0, &[c(1e6, 0.0)], 1e-14, 50);
        assert!(matches!(r, Err(Error::Convergence { limit: 50, .. })));
        assert!(matches!(f_series(0.0, &[c(1.0, 0.0)], 1e-14), Err(Error::Domain(_))));
    }

    #[test]
    fn f_series_negative_argument() {
        // 0F1(1; -x) = J_0(2 sqrt x); J_0(2) = 0.22389077914123567
        let v = f_series(1.0, &[c(-1.0, 0.0)], 1e-15).unwrap();
        assert!((v.re - 0.223_890_779_141_235_67).abs() < 1e-15);
    }

    #[test]
    fn inner_product_properties() {
        let k = 1.7;
        let z = Label::new(vec![c(0.2, 0.5), c(-0.3, 0.1)]);
        assert_eq!(inner_product(&z, &Label::zeros(2), k).unwrap(), c(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = random_label(&mut rng, 2, 2.0);
            let b = random_label(&mut rng, 2, 2.0);
            let ab = inner_product(&a, &b, k).unwrap();
            let ba = inner_product(&b, &a, k).unwrap();
            assert!((ab - ba.conj()).norm() <= 1e-12 * ab.norm().max(1.0));
            let aa = inner_product(&a, &a, k).unwrap();
            assert!(aa.im == 0.0 && aa.re >= 1.0);
        }
    }

    #[test]
    fn inner_product_against_truncated_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for modes in 1..=2 {
            for &k in &[0.5, 2.5] {
                let s = TruncatedRepSpace::new(modes, k, 40).unwrap();
                for _ in 0..5 {
                    let a = random_label(&mut rng, modes, 1.0);
                    let b = random_label(&mut rng, modes, 1.0);
                    let exact = inner_product(&a, &b, k).unwrap();
                    let finite = state_vector(&a, &s).unwrap().dot(&state_vector(&b, &s).unwrap());
                    assert!((exact - finite).norm() <= 1e-10 * exact.norm());
                }
            }
        }
    }
}
