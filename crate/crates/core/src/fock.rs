//! Truncated oscillator realization of the `u(N,1)` generators.
//!
//! Basis states are `|n_1, ..., n_N, K - 1 + |n|>` where `|n| = sum n_a`; the
//! last occupation is fixed by the subsidiary condition and never stored.
//! Modes are indexed from zero: `0..N` are the ordinary modes and index `N`
//! is the extra mode with metric sign `-1`. With that convention
//!
//! - `E(a, b) = a_a^+ a_b` for `a, b < N`,
//! - `E(a, N) = a_a^+ a_N^+` raises the degree,
//! - `E(N, b) = a_N a_b` lowers it, with coefficient `sqrt(n_b) sqrt(K - 1 + |n|)`,
//! - `E(N, N) = a_N^+ a_N + 1` is diagonal with entry `K + |n|`.
//!
//! Factorials of the extra mode only ever enter through square roots of
//! `K - 1 + |n|`, so every matrix element is defined for real `K > 0`.
//! Raising operators drop components that would leave the truncated space.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::math;
use crate::{Error, Result};

/// Occupation numbers `(n_1, ..., n_N)` of the ordinary modes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(n: Vec<u32>) -> Self {
        MultiIndex(n)
    }

    pub fn zeros(modes: usize) -> Self {
        MultiIndex(vec![0; modes])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// Total degree `sum n_a`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    pub fn incremented(&self, mode: usize) -> Self {
        let mut n = self.0.clone();
        n[mode] += 1;
        MultiIndex(n)
    }

    pub fn decremented(&self, mode: usize) -> Option<Self> {
        let mut n = self.0.clone();
        n[mode] = n[mode].checked_sub(1)?;
        Some(MultiIndex(n))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(n: Vec<u32>) -> Self {
        MultiIndex(n)
    }
}

/// The `u(N,1)` metric `diag(1, ..., 1, -1)` on `N + 1` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureMetric {
    modes: usize,
}

impl StructureMetric {
    pub fn new(modes: usize) -> Self {
        StructureMetric { modes }
    }

    pub fn eta(&self, a: usize, b: usize) -> f64 {
        match (a == b, a == self.modes) {
            (false, _) => 0.0,
            (true, false) => 1.0,
            (true, true) => -1.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..=self.modes).map(|a| self.eta(a, a)).collect()
    }
}

/// All multi-indices on `modes` modes with degree at most `cutoff`, ordered by
/// degree and then lexicographically descending, e.g. for two modes:
/// `(0,0) (1,0) (0,1) (2,0) (1,1) (0,2)`.
pub fn enumerate_basis(modes: usize, cutoff: u32) -> Vec<MultiIndex> {
    assert!(modes >= 1, "at least one mode is required");
    let mut out = Vec::new();
    let mut cur = vec![0u32; modes];
    for d in 0..=cutoff {
        fill_degree(&mut cur, 0, d, &mut out);
    }
    out
}

fn fill_degree(cur: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v;
        fill_degree(cur, pos + 1, remaining - v, out);
    }
    cur[pos] = 0;
}

/// Sparse complex matrix; entry `(row, col)` maps basis state `col` to `row`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        SparseOperator { dim, entries: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal((0..dim).map(|_| Complex64::new(1.0, 0.0)).collect())
    }

    pub fn diagonal(values: Vec<Complex64>) -> Self {
        let mut op = Self::zeros(values.len());
        for (i, v) in values.into_iter().enumerate() {
            op.insert(i, i, v);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` to entry `(row, col)`; exact zeros are not stored.
    pub fn insert(&mut self, row: usize, col: usize, value: Complex64) {
        assert!(row < self.dim && col < self.dim, "entry ({row}, {col}) outside dimension {}", self.dim);
        let e = self.entries.entry((row, col)).or_insert(Complex64::new(0.0, 0.0));
        *e += value;
        if *e == Complex64::new(0.0, 0.0) {
            self.entries.remove(&(row, col));
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries.get(&(row, col)).copied().unwrap_or_default()
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (&(r, c), &a) in &self.entries {
            out[r] += a * v[c];
        }
        out
    }

    pub fn matmul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); other.dim];
        for (&(r, c), &v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut out = SparseOperator::zeros(self.dim);
        for (&(r, k), &a) in &self.entries {
            for &(c, b) in &by_row[k] {
                out.insert(r, c, a * b);
            }
        }
        out
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SparseOperator, s: Complex64) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (&(r, c), &v) in &other.entries {
            out.insert(r, c, s * v);
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> SparseOperator {
        let mut out = SparseOperator::zeros(self.dim);
        for (&(r, c), &v) in &self.entries {
            out.insert(r, c, s * v);
        }
        out
    }

    /// `[self, other] = self other - other self`.
    pub fn commutator(&self, other: &SparseOperator) -> SparseOperator {
        self.matmul(other).add_scaled(&other.matmul(self), Complex64::new(-1.0, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|entry|` over entries whose row and column pass `keep`.
    pub fn max_abs_where<F: Fn(usize, usize) -> bool>(&self, keep: F) -> f64 {
        self.entries
            .iter()
            .filter(|(&(r, c), _)| keep(r, c))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Constrained representation space truncated at total degree `cutoff`.
#[derive(Debug, Clone)]
pub struct TruncatedRepSpace {
    modes: usize,
    k: f64,
    cutoff: u32,
    basis: Vec<MultiIndex>,
    index: BTreeMap<MultiIndex, usize>,
}

impl TruncatedRepSpace {
    pub fn new(modes: usize, k: f64, cutoff: u32) -> Result<Self> {
        if modes == 0 {
            return Err(Error::domain("the representation needs N >= 1 modes"));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::domain(format!("representation label K must be positive, got {k}")));
        }
        let basis = enumerate_basis(modes, cutoff);
        let index = basis.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        Ok(TruncatedRepSpace { modes, k, cutoff, basis, index })
    }

    /// Number of ordinary modes `N`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn index_of(&self, n: &MultiIndex) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.basis[i].degree()
    }

    pub fn metric(&self) -> StructureMetric {
        StructureMetric::new(self.modes)
    }

    fn check_mode(&self, a: usize) -> Result<()> {
        if a > self.modes {
            return Err(Error::domain(format!(
                "generator index {a} out of range 0..={} for N = {}",
                self.modes, self.modes
            )));
        }
        Ok(())
    }

    /// Matrix of the generator `E(alpha, beta)` (zero-based mode indices).
    pub fn generator(&self, alpha: usize, beta: usize) -> Result<SparseOperator> {
        self.check_mode(alpha)?;
        self.check_mode(beta)?;
        let top = self.modes;
        let k = self.k;
        let mut op = SparseOperator::zeros(self.dim());
        let re = |v: f64| Complex64::new(v, 0.0);
        for (col, n) in self.basis.iter().enumerate() {
            let deg = n.degree() as f64;
            match (alpha == top, beta == top) {
                (false, false) if alpha == beta => {
                    if n.get(alpha) > 0 {
                        op.insert(col, col, re(n.get(alpha) as f64));
                    }
                }
                (false, false) => {
                    let Some(lowered) = n.decremented(beta) else { continue };
                    let target = lowered.incremented(alpha);
                    let coef = math::sqrt(n.get(beta) as f64) * math::sqrt(target.get(alpha) as f64);
                    let row = self.index[&target];
                    op.insert(row, col, re(coef));
                }
                (false, true) => {
                    let target = n.incremented(alpha);
                    let Some(row) = self.index_of(&target) else { continue };
                    let coef = math::sqrt(target.get(alpha) as f64) * math::sqrt(k + deg);
                    op.insert(row, col, re(coef));
                }
                (true, false) => {
                    // n_beta = 0 gives no entry; this also covers K - 1 + |n| < 0 for K < 1.
                    let Some(target) = n.decremented(beta) else { continue };
                    let coef = math::sqrt(n.get(beta) as f64) * math::sqrt(k - 1.0 + deg);
                    let row = self.index[&target];
                    op.insert(row, col, re(coef));
                }
                (true, true) => op.insert(col, col, re(k + deg)),
            }
        }
        Ok(op)
    }

    /// `-sum_a E(a, a) + E(N, N)`, equal to `K` times the identity.
    pub fn subsidiary_operator(&self) -> SparseOperator {
        let mut op = self.generator(self.modes, self.modes).expect("valid index");
        for a in 0..self.modes {
            op = op.add_scaled(&self.generator(a, a).expect("valid index"), Complex64::new(-1.0, 0.0));
        }
        op
    }

    /// True when state `i` lies at least `margin` degrees below the cutoff.
    pub fn is_interior(&self, i: usize, margin: u32) -> bool {
        self.cutoff >= margin && self.degree(i) <= self.cutoff - margin
    }

    /// Largest deviation of `[E(a,b), E(c,d)]` from
    /// `eta(b,c) E(a,d) - eta(d,a) E(c,b)` over interior states (degree at most
    /// `cutoff - 2`), where truncation cannot reach.
    pub fn commutator_residual(&self, (a, b): (usize, usize), (c, d): (usize, usize)) -> Result<f64> {
        if self.cutoff < 2 {
            return Err(Error::config(format!(
                "commutator check needs cutoff >= 2, got {}",
                self.cutoff
            )));
        }
        let eta = self.metric();
        let lhs = self.generator(a, b)?.commutator(&self.generator(c, d)?);
        let rhs = self
            .generator(a, d)?
            .scaled(Complex64::new(eta.eta(b, c), 0.0))
            .add_scaled(&self.generator(c, b)?, Complex64::new(-eta.eta(d, a), 0.0));
        let diff = lhs.add_scaled(&rhs, Complex64::new(-1.0, 0.0));
        Ok(diff.max_abs_where(|r, col| self.is_interior(r, 2) && self.is_interior(col, 2)))
    }
}
