//! Row-compressed operators on the truncated Fock space of the two cavities
//! and the mirror, built by Kronecker lifting of single-mode ladder matrices.

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation of each mode: occupations `0..n` are retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_m: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            n_a: 4,
            n_b: 4,
            n_m: 6,
        }
    }
}

impl FockConfig {
    pub const MIN_LEVELS: usize = 3;

    pub fn new(n_a: usize, n_b: usize, n_m: usize) -> Result<Self> {
        let cfg = Self { n_a, n_b, n_m };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_a < Self::MIN_LEVELS || self.n_b < Self::MIN_LEVELS || self.n_m < Self::MIN_LEVELS
        {
            return Err(Error::Domain(format!(
                "each Fock truncation needs at least {} levels, got ({}, {}, {})",
                Self::MIN_LEVELS,
                self.n_a,
                self.n_b,
                self.n_m
            )));
        }
        Ok(())
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.n_a * self.n_b * self.n_m
    }

    pub fn levels(&self) -> [usize; 3] {
        [self.n_a, self.n_b, self.n_m]
    }

    /// Basis index of |n_a, n_b, n_m⟩ (mirror index fastest).
    pub fn index(&self, n_a: usize, n_b: usize, n_m: usize) -> usize {
        (n_a * self.n_b + n_b) * self.n_m + n_m
    }

    /// Occupations of basis state `idx`.
    pub fn occupations(&self, idx: usize) -> [usize; 3] {
        let n_m = idx % self.n_m;
        let rest = idx / self.n_m;
        [rest / self.n_b, rest % self.n_b, n_m]
    }
}

/// Sparse square operator stored by rows; within a row, entries are sorted
/// by column with no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    rows: Vec<Vec<(usize, c64)>>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            rows: (0..dim).map(|i| vec![(i, c64::new(1.0, 0.0))]).collect(),
        }
    }

    /// Single-mode annihilation operator on `n` levels.
    pub fn destroy(n: usize) -> Self {
        let mut op = Self::zeros(n);
        for k in 1..n {
            op.rows[k - 1].push((k, c64::new((k as f64).sqrt(), 0.0)));
        }
        op
    }

    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, c64)>,
    ) -> Self {
        let mut op = Self::zeros(dim);
        for (r, c, v) in entries {
            op.rows[r].push((c, v));
        }
        op.normalize();
        op
    }

    fn normalize(&mut self) {
        for row in &mut self.rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, c64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != c64::new(0.0, 0.0));
            *row = merged;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> c64 {
        self.rows[r]
            .binary_search_by_key(&c, |e| e.0)
            .map_or(c64::new(0.0, 0.0), |k| self.rows[r][k].1)
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        let dim = self.dim * other.dim;
        let mut rows = vec![Vec::new(); dim];
        for (r1, row1) in self.rows.iter().enumerate() {
            for (r2, row2) in other.rows.iter().enumerate() {
                let row = &mut rows[r1 * other.dim + r2];
                for &(c1, v1) in row1 {
                    for &(c2, v2) in row2 {
                        row.push((c1 * other.dim + c2, v1 * v2));
                    }
                }
            }
        }
        Operator { dim, rows }
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_entries(self.dim, self.entries().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn transpose(&self) -> Operator {
        Operator::from_entries(self.dim, self.entries().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Operator {
        Operator {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|&(c, v)| (c, v.conj())).collect())
                .collect(),
        }
    }

    pub fn scale(&self, s: c64) -> Operator {
        Operator::from_entries(self.dim, self.entries().map(|(r, c, v)| (r, c, s * v)))
    }

    pub fn add(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim, other.dim);
        Operator::from_entries(self.dim, self.entries().chain(other.entries()))
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        self.add(&other.scale(c64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![c64::new(0.0, 0.0); self.dim];
        let mut touched = Vec::new();
        let mut rows = Vec::with_capacity(self.dim);
        for row in &self.rows {
            for &(k, a) in row {
                for &(j, b) in &other.rows[k] {
                    if acc[j] == c64::new(0.0, 0.0) {
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut out = Vec::with_capacity(touched.len());
            for &j in &touched {
                if acc[j] != c64::new(0.0, 0.0) {
                    out.push((j, acc[j]));
                }
                acc[j] = c64::new(0.0, 0.0);
            }
            touched.clear();
            rows.push(out);
        }
        Operator {
            dim: self.dim,
            rows,
        }
    }

    /// Tr(ρ·self) for a dense row-major ρ.
    pub fn expect(&self, rho: &faer::Mat<c64>) -> c64 {
        // Tr(ρ O) = Σ_{r,c} O_rc ρ_cr
        self.entries().map(|(r, c, v)| v * rho[(c, r)]).sum()
    }

    pub fn to_dense(&self) -> faer::Mat<c64> {
        let mut m = faer::Mat::<c64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}

/// Ladder operators of the three modes lifted to the full space.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub a: Operator,
    pub b: Operator,
    pub c: Operator,
}

impl ModeOperators {
    pub fn new(fock: &FockConfig) -> Self {
        let ia = Operator::identity(fock.n_a);
        let ib = Operator::identity(fock.n_b);
        let im = Operator::identity(fock.n_m);
        Self {
            a: Operator::destroy(fock.n_a).kron(&ib).kron(&im),
            b: ia.kron(&Operator::destroy(fock.n_b)).kron(&im),
            c: ia.kron(&ib).kron(&Operator::destroy(fock.n_m)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_validation() {
        assert!(FockConfig::new(2, 4, 4).is_err());
        let f = FockConfig::new(4, 4, 6).unwrap();
        assert_eq!(f.dim(), 96);
        for idx in 0..f.dim() {
            let [a, b, m] = f.occupations(idx);
            assert_eq!(f.index(a, b, m), idx);
        }
    }

    #[test]
    fn ladder_commutator_is_identity_below_the_cutoff() {
        let n = 5;
        let a = Operator::destroy(n);
        let comm = a.mul(&a.adjoint()).sub(&a.adjoint().mul(&a));
        for k in 0..n - 1 {
            assert!((comm.get(k, k) - 1.0).norm() < 1e-14);
        }
        assert!((comm.get(n - 1, n - 1) + (n as f64 - 1.0)).norm() < 1e-14);
        assert_eq!(comm.nnz(), n);
    }

    #[test]
    fn lifted_operators_act_on_their_own_mode() {
        let f = FockConfig::new(3, 4, 5).unwrap();
        let ops = ModeOperators::new(&f);
        let number_b = ops.b.adjoint().mul(&ops.b);
        for idx in 0..f.dim() {
            let [_, nb, _] = f.occupations(idx);
            assert!((number_b.get(idx, idx).re - nb as f64).abs() < 1e-14);
        }
        // distinct modes commute
        let ab = ops.a.mul(&ops.c.adjoint());
        let ba = ops.c.adjoint().mul(&ops.a);
        assert_eq!(ab, ba);
    }
}
