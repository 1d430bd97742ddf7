use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Square complex operator stored as sorted sparse rows.
///
/// Operators on the truncated Fock space are overwhelmingly sparse (ladder
/// operators have one entry per row, smeared number operators are diagonal),
/// so this keeps a few-thousand-dimensional space cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &v)| if v != 0.0 { vec![(i, Complex64::new(v, 0.0))] } else { Vec::new() })
            .collect();
        Self { dim: values.len(), rows }
    }

    /// Sums duplicate `(row, col)` entries.
    pub fn from_triplets(dim: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut rows = vec![Vec::new(); dim];
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry outside operator");
            rows[r].push((c, v));
        }
        let mut op = Self { dim, rows };
        op.compact();
        op
    }

    fn compact(&mut self) {
        for row in &mut self.rows {
            row.sort_by_key(|e| e.0);
            let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match out.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => out.push((c, v)),
                }
            }
            out.retain(|e| e.1 != ZERO);
            *row = out;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, r: usize) -> &[(usize, Complex64)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.rows[r].iter().find(|e| e.0 == c).map_or(ZERO, |e| e.1)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.rows.iter().map(|row| row.iter().map(|&(c, a)| a * v[c]).sum()).collect()
    }

    /// `<v| A |v>` without normalization.
    pub fn sandwich(&self, v: &[Complex64]) -> Complex64 {
        self.rows
            .iter()
            .zip(v)
            .map(|(row, vr)| vr.conj() * row.iter().map(|&(c, a)| a * v[c]).sum::<Complex64>())
            .sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                rows[c].push((r, v.conj()));
            }
        }
        let mut op = Self { dim: self.dim, rows };
        op.compact();
        op
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for e in row.iter_mut() {
                e.1 *= s;
            }
        }
        out.compact();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (row, orow) in out.rows.iter_mut().zip(&other.rows) {
            row.extend(orow.iter().map(|&(c, v)| (c, s * v)));
        }
        out.compact();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![ZERO; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut rows = Vec::with_capacity(self.dim);
        for row in &self.rows {
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    if acc[c] == ZERO {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut out = Vec::with_capacity(touched.len());
            for &c in &touched {
                if acc[c] != ZERO {
                    out.push((c, acc[c]));
                }
                acc[c] = ZERO;
            }
            touched.clear();
            rows.push(out);
        }
        Self { dim: self.dim, rows }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, e| m.max(e.1.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.rows.iter().flatten().map(|e| e.1.norm_sqr()).sum())
    }

    /// Largest entry of `A - A^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// Diagonal entries if the operator is diagonal.
    pub fn real_diagonal(&self) -> Option<Vec<f64>> {
        let mut d = vec![0.0; self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                if c != r || v.im != 0.0 {
                    return None;
                }
                d[r] = v.re;
            }
        }
        Some(d)
    }
}

/// `exp(m)` for a small dense row-major complex matrix, by scaling and
/// squaring a Taylor series.
pub fn expm_small(m: &[Complex64], n: usize) -> Vec<Complex64> {
    assert_eq!(m.len(), n * n);
    let norm: f64 = (0..n)
        .map(|r| (0..n).map(|c| m[r * n + c].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.25 { libm::ceil(libm::log2(norm / 0.25)) as u32 } else { 0 };
    let scale = libm::pow(2.0, -(s as f64));
    let a: Vec<Complex64> = m.iter().map(|v| v * scale).collect();
    let mut result = vec![ZERO; n * n];
    let mut term = vec![ZERO; n * n];
    for i in 0..n {
        result[i * n + i] = Complex64::new(1.0, 0.0);
        term[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = matmul(&term, &a, n).into_iter().map(|v| v / k as f64).collect();
        let mut small = true;
        for (r, t) in result.iter_mut().zip(&term) {
            *r += t;
            if t.norm() > 1e-18 {
                small = false;
            }
        }
        if small {
            break;
        }
    }
    for _ in 0..s {
        result = matmul(&result, &result, n);
    }
    result
}

pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * n];
    for r in 0..n {
        for k in 0..n {
            let x = a[r * n + k];
            if x == ZERO {
                continue;
            }
            for c in 0..n {
                out[r * n + c] += x * b[k * n + c];
            }
        }
    }
    out
}
