//! Complex vectors, triplet/CSR sparse matrices and a preconditioned CG solver.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `<a, b>` antilinear in the first argument.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += s x`.
pub fn axpy(s: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn scale(s: C64, x: &mut [C64]) {
    for xi in x.iter_mut() {
        *xi *= s;
    }
}

/// Normalizes in place and returns the former norm.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(C64::new(1.0 / n, 0.0), x);
    }
    n
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Anything that can apply a square matrix to a vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

/// Square sparse matrix kept as unsorted triplets and compressed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub n: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

/// Compressed sparse rows with duplicates summed.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(n: usize) -> Self {
        Self { n, rows: Vec::new(), cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut op = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            op.push(i, i, C64::new(v, 0.0));
        }
        op
    }

    pub fn push(&mut self, r: usize, c: usize, v: C64) {
        if v != ZERO {
            self.rows.push(r);
            self.cols.push(c);
            self.vals.push(v);
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            vals: self.vals.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Appends the triplets of `s * other`.
    pub fn add_scaled(&mut self, s: C64, other: &SparseOperator) {
        assert_eq!(self.n, other.n);
        for k in 0..other.nnz() {
            self.push(other.rows[k], other.cols[k], s * other.vals[k]);
        }
    }

    pub fn to_csr(&self) -> Csr {
        let mut order: Vec<usize> = (0..self.nnz()).collect();
        order.sort_by_key(|&k| (self.rows[k], self.cols[k]));
        let mut indptr = vec![0usize; self.n + 1];
        let mut indices = Vec::with_capacity(order.len());
        let mut values: Vec<C64> = Vec::with_capacity(order.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let key = (self.rows[k], self.cols[k]);
            if last == Some(key) {
                *values.last_mut().expect("entry exists") += self.vals[k];
            } else {
                indices.push(key.1);
                values.push(self.vals[k]);
                indptr[key.0 + 1] += 1;
                last = Some(key);
            }
        }
        for r in 0..self.n {
            indptr[r + 1] += indptr[r];
        }
        Csr { n: self.n, indptr, indices, values }
    }

    /// Product `self * other` by CSR merging.
    pub fn compose(&self, other: &SparseOperator) -> SparseOperator {
        let a = self.to_csr();
        let b = other.to_csr();
        let mut out = SparseOperator::zeros(self.n);
        for r in 0..a.n {
            for ka in a.indptr[r]..a.indptr[r + 1] {
                let mid = a.indices[ka];
                for kb in b.indptr[mid]..b.indptr[mid + 1] {
                    out.push(r, b.indices[kb], a.values[ka] * b.values[kb]);
                }
            }
        }
        out.to_csr().to_triplets()
    }

    /// Largest `|H_ij - conj(H_ji)|` after summing duplicates.
    pub fn hermiticity_defect(&self) -> f64 {
        let a = self.to_csr();
        let b = self.adjoint().to_csr();
        let diff = a.to_triplets();
        let mut d = diff;
        d.add_scaled(-ONE, &b.to_triplets());
        d.to_csr().values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.n, self.n, ZERO);
        for k in 0..self.nnz() {
            m[(self.rows[k], self.cols[k])] += self.vals[k];
        }
        m
    }

    /// Sparse copy of a dense matrix, dropping entries below `threshold`.
    pub fn from_dense(m: &DMatrix<C64>, threshold: f64) -> Self {
        let mut op = Self::zeros(m.nrows());
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)].norm() > threshold {
                    op.push(r, c, m[(r, c)]);
                }
            }
        }
        op
    }
}

impl Csr {
    pub fn to_triplets(&self) -> SparseOperator {
        let mut op = SparseOperator::zeros(self.n);
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                op.push(r, self.indices[k], self.values[k]);
            }
        }
        op
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .filter(|&k| self.indices[k] == r)
                    .map(|k| self.values[k])
                    .sum()
            })
            .collect()
    }
}

impl LinearOperator for Csr {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr = acc;
        }
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for k in 0..self.nnz() {
            y[self.rows[k]] += self.vals[k] * x[self.cols[k]];
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned conjugate gradients for a Hermitian positive definite `apply`.
///
/// `precond` holds the positive diagonal `d` of a Jacobi preconditioner and the
/// optional `project` keeps iterates inside an invariant subspace.
pub fn conjugate_gradient<A, P>(
    apply: A,
    b: &[C64],
    precond: Option<&[f64]>,
    project: P,
    tol: f64,
    maxit: usize,
) -> Result<CgOutcome>
where
    A: Fn(&[C64], &mut [C64]),
    P: Fn(&mut [C64]),
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![ZERO; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, residual: 0.0 });
    }
    let precondition = |r: &[C64]| -> Vec<C64> {
        let mut z: Vec<C64> = match precond {
            Some(d) => r.iter().zip(d).map(|(v, d)| v / d).collect(),
            None => r.to_vec(),
        };
        project(&mut z);
        z
    };
    let mut r = b.to_vec();
    project(&mut r);
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut ap = vec![ZERO; n];
    let mut res = norm(&r) / bnorm;
    for it in 0..maxit {
        if res <= tol {
            return Ok(CgOutcome { x, iterations: it, residual: res });
        }
        apply(&p, &mut ap);
        project(&mut ap);
        let pap = dot(&p, &ap).re;
        if !(pap > 0.0) {
            return Err(Error::LinearSolve(format!("operator not positive definite (p*Ap = {pap})")));
        }
        let alpha = rz / pap;
        axpy(C64::new(alpha, 0.0), &p, &mut x);
        axpy(C64::new(-alpha, 0.0), &ap, &mut r);
        res = norm(&r) / bnorm;
        z = precondition(&r);
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    if res <= tol {
        return Ok(CgOutcome { x, iterations: maxit, residual: res });
    }
    Err(Error::NoConvergence { what: "conjugate gradient".into(), residual: res })
}
