//! Quadrature rules: fixed Gauss-Legendre and the double-exponential
//! (tanh-sinh on `(0, 1)`, exp-sinh on `(0, inf)`) trapezoidal schemes.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::math;
use crate::{Error, Result};

/// Gauss-Legendre rule with `n` nodes, exact for polynomials of degree `2n - 1`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = math::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if math::abs(dx) < 1e-16 {
                    dp = legendre_with_derivative(n, x).1;
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub evaluations: usize,
}

/// Double-exponential trapezoidal quadrature with step halving.
///
/// Endpoint singularities of algebraic type and exponential decay at
/// infinity are both absorbed by the transformation.
#[derive(Debug, Clone, Copy)]
pub struct DoubleExponential {
    pub rel_tol: f64,
    pub max_levels: u32,
}

impl Default for DoubleExponential {
    fn default() -> Self {
        DoubleExponential { rel_tol: 1e-12, max_levels: 9 }
    }
}

const TAIL_TOL: f64 = 1e-18;
const T_LIMIT: f64 = 8.0;

// A node of the transformed rule: abscissa, its complement (unit interval
// only, otherwise unused) and the Jacobian dx/dt. `None` once the abscissa
// leaves the representable range.
type Node = Option<(f64, f64, f64)>;

fn exp_sinh_node(t: f64) -> Node {
    let u = FRAC_PI_2 * math::sinh(t);
    let x = math::exp(u);
    if x == 0.0 || !x.is_finite() {
        return None;
    }
    Some((x, f64::NAN, x * FRAC_PI_2 * math::cosh(t)))
}

fn tanh_sinh_node(t: f64) -> Node {
    let u = FRAC_PI_2 * math::sinh(t);
    let x = 1.0 / (1.0 + math::exp(-2.0 * u));
    let c = 1.0 / (1.0 + math::exp(2.0 * u));
    if x == 0.0 || c == 0.0 {
        return None;
    }
    Some((x, c, PI * math::cosh(t) * x * c))
}

impl DoubleExponential {
    pub fn new(rel_tol: f64) -> Self {
        DoubleExponential { rel_tol, ..Default::default() }
    }

    /// `\int_0^inf f(x) dx`.
    pub fn half_line<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<Estimate> {
        self.run(exp_sinh_node, |x, _| f(x))
    }

    /// `\int_0^1 f(x, 1 - x) dx`; the complement is computed without cancellation.
    pub fn unit_interval<F: FnMut(f64, f64) -> f64>(&self, f: F) -> Result<Estimate> {
        self.run(tanh_sinh_node, f)
    }

    fn run<M, F>(&self, map: M, mut f: F) -> Result<Estimate>
    where
        M: Fn(f64) -> Node,
        F: FnMut(f64, f64) -> f64,
    {
        let mut evaluations = 0usize;
        let mut eval = |t: f64, evaluations: &mut usize| -> Option<f64> {
            let (x, c, w) = map(t)?;
            *evaluations += 1;
            let v = f(x, c) * w;
            Some(if v.is_finite() { v } else { f64::NAN })
        };

        // Level 0 uses h = 1 and all integer t; later levels add odd multiples of h.
        let mut sum = eval(0.0, &mut evaluations).unwrap_or(0.0);
        let mut h = 1.0;
        let (add, mut hi) = self.sweep(1.0, 1.0, 0.0, sum, &mut |t| eval(t, &mut evaluations));
        sum += add;
        let (add, mut lo) = self.sweep(-1.0, 1.0, 0.0, sum, &mut |t| eval(t, &mut evaluations));
        sum += add;
        let mut prev = h * sum;
        if !prev.is_finite() {
            return Err(Error::Quadrature { estimate: prev, error: f64::NAN });
        }
        for level in 1..=self.max_levels {
            h *= 0.5;
            let first = h;
            let step = 2.0 * h;
            // Refinement sweeps may not stop inside the range the coarser
            // levels found significant.
            let (mut add, t_hi) = self.sweep(first, step, hi - 1.0, sum, &mut |t| eval(t, &mut evaluations));
            let (add_lo, t_lo) = self.sweep(-first, step, -lo - 1.0, sum + add, &mut |t| eval(t, &mut evaluations));
            add += add_lo;
            hi = hi.max(t_hi);
            lo = lo.min(t_lo);
            sum += add;
            let current = h * sum;
            if !current.is_finite() {
                return Err(Error::Quadrature { estimate: current, error: f64::NAN });
            }
            let err = math::abs(current - prev);
            if level >= 2 && err <= self.rel_tol * math::abs(current) {
                return Ok(Estimate { value: current, error: err, evaluations });
            }
            prev = current;
        }
        Err(Error::Quadrature { estimate: prev, error: f64::NAN })
    }

    // Sum terms at t = start, start + step·sign, ... outward until they are
    // negligible against the running sum (only once |t| exceeds `keep`) or the
    // map degenerates. Returns the partial sum and the last t visited.
    fn sweep<E: FnMut(f64) -> Option<f64>>(
        &self,
        start: f64,
        step: f64,
        keep: f64,
        base: f64,
        eval: &mut E,
    ) -> (f64, f64) {
        let dir = if start < 0.0 { -1.0 } else { 1.0 };
        let mut t = start;
        let mut acc = 0.0;
        let mut small = 0;
        while math::abs(t) <= T_LIMIT {
            let Some(v) = eval(t) else { break };
            if v.is_nan() {
                return (f64::NAN, t);
            }
            acc += v;
            if math::abs(t) > keep && math::abs(v) <= TAIL_TOL * math::abs(base + acc) {
                small += 1;
                if small >= 2 {
                    break;
                }
            } else {
                small = 0;
            }
            t += dir * step;
        }
        (acc, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{beta, gamma};

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        let gl = GaussLegendre::new(64);
        assert_eq!(gl.len(), 64);
        let w: f64 = gl.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
        assert!((gl.integrate(0.0, 1.0, |x| x.powi(5)) - 1.0 / 6.0).abs() < 1e-15);
        // Degree 127 is the top of the exact range.
        let v = gl.integrate(0.0, 1.0, |x| x.powi(127));
        assert!((v - 1.0 / 128.0).abs() < 1e-15);
        let b = gl.integrate(0.0, 1.0, |x| x.powi(3) * (1.0 - x).powi(7));
        assert!((b - beta(4.0, 8.0).unwrap()).abs() < 1e-17);
    }

    #[test]
    fn small_rules() {
        let gl = GaussLegendre::new(1);
        assert!((gl.integrate(0.0, 2.0, |x| 3.0 * x + 1.0) - 8.0).abs() < 1e-15);
        let gl = GaussLegendre::new(3);
        assert!((gl.integrate(-1.0, 1.0, |x| x.powi(4)) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn half_line_integrals() {
        let de = DoubleExponential::default();
        let e = de.half_line(|x| (-x).exp()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
        let e = de.half_line(|x| x.powf(-0.5) * (-x).exp()).unwrap();
        assert!((e.value - gamma(0.5).unwrap()).abs() < 1e-13);
        let e = de.half_line(|x| x.powf(3.7) * (-2.0 * x.sqrt()).exp()).unwrap();
        // \int x^{a} e^{-2 sqrt x} dx = 2 Gamma(2a + 2) / 2^{2a+2}
        let exact = 2.0 * gamma(9.4).unwrap() / 2f64.powf(9.4);
        assert!(((e.value - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn half_line_peak_far_from_one() {
        // mass concentrated near x ~ 200 while the integrand is tiny at x ~ 1
        let de = DoubleExponential::new(1e-13);
        let e = de.half_line(|x| (14.0 * x.ln() - 2.0 * x.sqrt()).exp()).unwrap();
        let exact = 2.0 * gamma(30.0).unwrap() / 2f64.powi(30);
        assert!(((e.value - exact) / exact).abs() < 1e-12, "{} vs {exact}", e.value);
    }

    #[test]
    fn unit_interval_endpoint_singularities() {
        let de = DoubleExponential::default();
        let e = de.unit_interval(|x, c| x.powf(-0.9) * c.powf(-0.5)).unwrap();
        let exact = beta(0.1, 0.5).unwrap();
        assert!(((e.value - exact) / exact).abs() < 1e-12, "{} vs {}", e.value, exact);
        let e = de.unit_interval(|x, c| x * c).unwrap();
        assert!((e.value - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn zero_integrand() {
        let e = DoubleExponential::default().half_line(|_| 0.0).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = DoubleExponential::default().half_line(|x| if x > 1.0 { f64::INFINITY } else { 1.0 });
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
