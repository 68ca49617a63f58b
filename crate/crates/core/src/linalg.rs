//! Dense linear algebra over a finite field: row reduction, kernels and
//! subspaces in canonical (reduced row echelon) form.

use crate::algebra::{FqElem, FqField};

/// Dense row-major matrix over `F_{p^m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<FqElem>,
}

impl FMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FMat { rows, cols, data: vec![FqElem::ZERO; rows * cols] }
    }

    pub fn from_rows(cols: usize, rows: &[Vec<FqElem>]) -> Self {
        let mut m = FMat::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> FqElem {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FqElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[FqElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Reduce in place to reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self, field: &FqField) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, pr);
            let inv = field.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in c..self.cols {
                let x = self.get(r, j);
                self.set(r, j, field.mul(x, inv));
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let x = field.sub(self.get(i, j), field.mul(factor, self.get(r, j)));
                    self.set(i, j, x);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, field: &FqField) -> usize {
        self.clone().rref(field).len()
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn kernel(&self, field: &FqField) -> Vec<Vec<FqElem>> {
        let mut m = self.clone();
        let pivots = m.rref(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![FqElem::ZERO; self.cols];
                v[fc] = FqElem::ONE;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = field.neg(m.get(r, fc));
                }
                v
            })
            .collect()
    }

    /// Some `x` with `self * x = b`, if one exists.
    pub fn solve(&self, field: &FqField, b: &[FqElem]) -> Option<Vec<FqElem>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = FMat::zeros(self.rows, self.cols + 1);
        for (i, &bi) in b.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, bi);
        }
        let pivots = aug.rref(field);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![FqElem::ZERO; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols);
        }
        Some(x)
    }

    pub fn mul_vec(&self, field: &FqField, x: &[FqElem]) -> Vec<FqElem> {
        (0..self.rows).map(|i| self.row(i).iter().zip(x).fold(FqElem::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))).collect()
    }
}

/// A subspace of `F^n`, stored as the nonzero rows of its reduced row echelon
/// basis, so equal subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    n: usize,
    basis: Vec<Vec<FqElem>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn span(field: &FqField, n: usize, vectors: &[Vec<FqElem>]) -> Self {
        let mut m = FMat::from_rows(n, vectors);
        let pivots = m.rref(field);
        let basis = (0..pivots.len()).map(|i| m.row(i).to_vec()).collect();
        Subspace { n, basis, pivots }
    }

    pub fn zero(n: usize) -> Self {
        Subspace { n, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![FqElem::ZERO; n];
                v[i] = FqElem::ONE;
                v
            })
            .collect();
        Subspace { n, basis, pivots: (0..n).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<FqElem>] {
        &self.basis
    }

    /// Pivot columns of the echelon basis.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains(&self, field: &FqField, v: &[FqElem]) -> bool {
        // reduce v against the echelon basis
        let mut w = v.to_vec();
        for (row, &pc) in self.basis.iter().zip(&self.pivots) {
            let c = w[pc];
            if !c.is_zero() {
                for (x, &b) in w.iter_mut().zip(row) {
                    *x = field.sub(*x, field.mul(c, b));
                }
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    pub fn is_subspace_of(&self, field: &FqField, other: &Subspace) -> bool {
        self.basis.iter().all(|v| other.contains(field, v))
    }

    pub fn sum(&self, field: &FqField, other: &Subspace) -> Subspace {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::span(field, self.n, &all)
    }

    /// Vectors of `self` that extend a basis of `smaller` (assumed contained in
    /// `self`) to a basis of `self`.
    pub fn complement_of(&self, field: &FqField, smaller: &Subspace) -> Vec<Vec<FqElem>> {
        let mut current = smaller.clone();
        let mut out = Vec::new();
        for v in &self.basis {
            if !current.contains(field, v) {
                out.push(v.clone());
                current = current.sum(field, &Subspace::span(field, self.n, std::slice::from_ref(v)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_solve() {
        let f = FqField::prime(5).unwrap();
        let e = |x: i64| f.from_int(x);
        let m = FMat::from_rows(3, &[vec![e(1), e(2), e(3)], vec![e(0), e(1), e(1)]]);
        let k = m.kernel(&f);
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&f, &k[0]).iter().all(|x| x.is_zero()));
        let x = m.solve(&f, &[e(1), e(0)]).unwrap();
        assert_eq!(m.mul_vec(&f, &x), vec![e(1), e(0)]);
        assert_eq!(m.rank(&f), 2);
    }

    #[test]
    fn subspaces_are_canonical() {
        let f = FqField::prime(3).unwrap();
        let e = |x: i64| f.from_int(x);
        let a = Subspace::span(&f, 3, &[vec![e(1), e(1), e(0)], vec![e(0), e(1), e(1)]]);
        let b = Subspace::span(&f, 3, &[vec![e(1), e(2), e(1)], vec![e(1), e(0), e(2)], vec![e(2), e(2), e(0)]]);
        assert_eq!(a, b);
        assert!(a.contains(&f, &[e(1), e(2), e(1)]));
        let line = Subspace::span(&f, 3, &[vec![e(1), e(1), e(0)]]);
        let comp = a.complement_of(&f, &line);
        assert_eq!(comp.len(), 1);
        assert_eq!(line.sum(&f, &Subspace::span(&f, 3, &comp)), a);
    }
}
