//! CSR matrices and sparse LU (backed by `faer`) with forward and transposed
//! solves.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::Mat;

use crate::error::{Error, Result};

/// Row offsets and sorted, unique column indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Union of dense couplings inside each group of dofs.
    pub fn from_blocks<'a>(n: usize, blocks: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for block in blocks {
            for &i in block {
                rows[i].extend_from_slice(block);
            }
        }
        Self::from_rows(rows)
    }

    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (i, r) in rows.iter_mut().enumerate() {
            r.push(i); // diagonal always present
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    #[inline]
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].binary_search(&j).ok().map(|k| a + k)
    }
}

/// Square sparse matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub pattern: Arc<SparsityPattern>,
    pub values: Vec<f64>,
}

impl SparseOperator {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in entries {
            rows[i].push(j);
        }
        let mut m = Self::zeros(Arc::new(SparsityPattern::from_rows(rows)));
        for &(i, j, v) in entries {
            m.add(i, j, v);
        }
        m
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let mut t = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.len(), &t)
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &t)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.find(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds to an entry; panics if `(i, j)` is outside the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .pattern
            .find(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn fill_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        (0..p.n)
            .map(|i| {
                (p.row_ptr[i]..p.row_ptr[i + 1])
                    .map(|k| self.values[k] * x[p.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    pub fn matvec_transposed(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        let mut y = vec![0.0; p.n];
        for i in 0..p.n {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                y[p.col_idx[k]] += self.values[k] * x[i];
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let p = &self.pattern;
        let mut a = vec![vec![0.0; p.n]; p.n];
        for (i, row) in a.iter_mut().enumerate() {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                row[p.col_idx[k]] = self.values[k];
            }
        }
        a
    }

    /// Zeroes the rows and columns flagged in `mask` and puts 1 on their
    /// diagonal.
    pub fn eliminate(&mut self, mask: &[bool]) {
        let p = self.pattern.clone();
        for i in 0..p.n {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                let j = p.col_idx[k];
                if mask[i] || mask[j] {
                    self.values[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
    }

    /// Zeroes rows and columns flagged in `mask` without touching the
    /// diagonal (used for cross-step operators).
    pub fn zero_rows_cols(&mut self, mask: &[bool]) {
        let p = self.pattern.clone();
        for i in 0..p.n {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                if mask[i] || mask[p.col_idx[k]] {
                    self.values[k] = 0.0;
                }
            }
        }
    }
}

/// Imposes `x[d] = value` for each pair: constrained rows become identity
/// rows with the value in the right-hand side, and constrained columns are
/// eliminated into the right-hand side of the free rows. Returns the sorted
/// list of constrained dofs.
pub fn apply_constraints(
    a: &mut SparseOperator,
    rhs: &mut [f64],
    values: &[(usize, f64)],
) -> Vec<usize> {
    let n = a.n();
    let mut mask = vec![false; n];
    let mut g = vec![0.0; n];
    for &(d, v) in values {
        mask[d] = true;
        g[d] = v;
    }
    let p = a.pattern.clone();
    for i in 0..n {
        if mask[i] {
            continue;
        }
        for k in p.row_ptr[i]..p.row_ptr[i + 1] {
            let j = p.col_idx[k];
            if mask[j] {
                rhs[i] -= a.values[k] * g[j];
            }
        }
    }
    a.eliminate(&mask);
    let mut dofs: Vec<usize> = values.iter().map(|&(d, _)| d).collect();
    dofs.sort_unstable();
    dofs.dedup();
    for &d in &dofs {
        rhs[d] = g[d];
    }
    dofs
}

/// Sparse LU factorization supporting `A x = b` and `Aᵀ x = b`.
///
/// The CSR arrays of `A` are handed to faer as the CSC arrays of `Aᵀ`, so
/// faer factors `Aᵀ`; a forward solve is therefore faer's transposed solve.
pub struct Factorization {
    n: usize,
    lu: Lu<usize, f64>,
}

/// Caches the symbolic analysis across refactorizations with an
/// unchanged pattern.
#[derive(Default)]
pub struct DirectSolver {
    symbolic: Option<(Arc<SparsityPattern>, SymbolicLu<usize>)>,
}

fn lu_error(e: LuError) -> Error {
    match e {
        LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: Some(index) },
        LuError::Generic(_) => Error::SingularMatrix { pivot: None },
    }
}

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn factorize(&mut self, a: &SparseOperator) -> Result<Factorization> {
        let p = &a.pattern;
        let sym = SymbolicSparseColMat::new_checked(
            p.n,
            p.n,
            p.row_ptr.clone(),
            None,
            p.col_idx.clone(),
        );
        let at = SparseColMat::new(sym, a.values.clone());
        let reuse = matches!(&self.symbolic, Some((q, _)) if Arc::ptr_eq(q, p) || **q == **p);
        if !reuse {
            let s = SymbolicLu::try_new(at.symbolic())
                .map_err(|_| Error::SingularMatrix { pivot: None })?;
            self.symbolic = Some((p.clone(), s));
        }
        let s = self.symbolic.as_ref().map(|(_, s)| s.clone()).expect("symbolic");
        let lu = Lu::try_new_with_symbolic(s, at.as_ref()).map_err(lu_error)?;
        Ok(Factorization { n: p.n, lu })
    }
}

impl Factorization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.run(b, true)
    }

    pub fn solve_transposed(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.run(b, false)
    }

    fn run(&self, b: &[f64], forward: bool) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        if forward {
            self.lu.solve_transpose_in_place(x.as_mut());
        } else {
            self.lu.solve_in_place(x.as_mut());
        }
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { pivot: None });
        }
        Ok(out)
    }
}

/// One-shot solve of `A x = b`.
pub fn solve(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    DirectSolver::new().factorize(a)?.solve(b)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(n: usize, seed: u64) -> SparseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10.0 + rng.gen_range(0.0..1.0)));
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
        SparseOperator::from_triplets(n, &t)
    }

    fn rel_residual(r: Vec<f64>, b: &[f64]) -> f64 {
        let d: Vec<f64> = r.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&d) / norm(b)
    }

    #[test]
    fn identity_returns_rhs() {
        let a = SparseOperator::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(solve(&a, &b).unwrap(), b);
    }

    #[test]
    fn diagonal_two_by_two() {
        let a = SparseOperator::from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        let x = solve(&a, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonsymmetric_three_by_three_against_hand_inverse() {
        // A = [[2,1,0],[0,3,0],[1,0,4]], det = 24
        let a = SparseOperator::from_dense(&[
            vec![2.0, 1.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![1.0, 0.0, 4.0],
        ]);
        let inv = [
            [12.0 / 24.0, -4.0 / 24.0, 0.0],
            [0.0, 8.0 / 24.0, 0.0],
            [-3.0 / 24.0, 1.0 / 24.0, 6.0 / 24.0],
        ];
        let b = [1.0, 2.0, 3.0];
        let f = DirectSolver::new().factorize(&a).unwrap();
        let x = f.solve(&b).unwrap();
        let xt = f.solve_transposed(&b).unwrap();
        for i in 0..3 {
            let e: f64 = (0..3).map(|j| inv[i][j] * b[j]).sum();
            let et: f64 = (0..3).map(|j| inv[j][i] * b[j]).sum();
            assert!((x[i] - e).abs() < 1e-14);
            assert!((xt[i] - et).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_solves_agree() {
        let a = random_system(50, 3);
        let d = a.to_dense();
        let mut s = d.clone();
        for i in 0..50 {
            for j in 0..50 {
                s[i][j] = d[i][j] + d[j][i];
            }
        }
        let a = SparseOperator::from_dense(&s);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let f = DirectSolver::new().factorize(&a).unwrap();
        let (x, y) = (f.solve(&b).unwrap(), f.solve_transposed(&b).unwrap());
        for i in 0..50 {
            assert!((x[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn random_residuals() {
        let a = random_system(200, 11);
        let b: Vec<f64> = (0..200).map(|i| 1.0 + (i % 7) as f64).collect();
        let f = DirectSolver::new().factorize(&a).unwrap();
        let x = f.solve(&b).unwrap();
        assert!(rel_residual(a.matvec(&x), &b) < 1e-10);
        let y = f.solve_transposed(&b).unwrap();
        assert!(rel_residual(a.matvec_transposed(&y), &b) < 1e-10);
    }

    #[test]
    fn refactorization_reuses_symbolic() {
        let a = random_system(30, 5);
        let mut solver = DirectSolver::new();
        solver.factorize(&a).unwrap();
        let mut a2 = a.clone();
        a2.values.iter_mut().for_each(|v| *v *= 2.0);
        let b = vec![1.0; 30];
        let x = solver.factorize(&a2).unwrap().solve(&b).unwrap();
        assert!(rel_residual(a2.matvec(&x), &b) < 1e-12);
    }

    #[test]
    fn singular_and_mismatched() {
        let a = SparseOperator::from_triplets(2, &[(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]);
        let r = DirectSolver::new()
            .factorize(&a)
            .and_then(|f| f.solve(&[1.0, 2.0]));
        assert!(matches!(r, Err(Error::SingularMatrix { .. })));
        let f = DirectSolver::new()
            .factorize(&SparseOperator::identity(3))
            .unwrap();
        assert!(matches!(
            f.solve(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn constraints_are_reproduced() {
        let a = random_system(20, 9);
        let mut m = a.clone();
        let mut b = vec![1.0; 20];
        let fixed = [(0, 2.5), (7, -1.0), (19, 0.0)];
        let dofs = apply_constraints(&mut m, &mut b, &fixed);
        assert_eq!(dofs, vec![0, 7, 19]);
        let x = solve(&m, &b).unwrap();
        for &(d, v) in &fixed {
            assert_eq!(x[d], v);
        }
        // free rows of the original system hold
        let r = a.matvec(&x);
        for i in 0..20 {
            if !dofs.contains(&i) {
                assert!((r[i] - 1.0).abs() < 1e-12);
            }
        }
    }
}
