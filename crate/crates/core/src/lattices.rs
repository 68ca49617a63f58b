//! Matrices over `F((u))`, Smith normal form over `F[[u]]`, lattices in
//! `F((u))^n` and the `u`-adic filtrations they carry.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use crate::algebra::{FqElem, FqField, Series, EXACT};
use crate::error::{Error, Result};
use crate::linalg::{FMat, Subspace};

/// Dense row-major matrix of truncated Laurent series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    field: FqField,
    rows: usize,
    cols: usize,
    data: Vec<Series>,
}

impl SeriesMatrix {
    pub fn from_fn(field: &FqField, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Series) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        SeriesMatrix { field: field.clone(), rows, cols, data }
    }

    pub fn from_rows(field: &FqField, rows: Vec<Vec<Series>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        if rows.iter().flatten().any(|s| s.field() != field) {
            return Err(Error::FieldMismatch);
        }
        let n = rows.len();
        Ok(SeriesMatrix { field: field.clone(), rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    /// Matrix whose columns are the given vectors of length `n`.
    pub fn from_columns(field: &FqField, n: usize, cols: &[Vec<Series>]) -> Self {
        Self::from_fn(field, n, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn zero(field: &FqField, rows: usize, cols: usize, prec: i64) -> Self {
        Self::from_fn(field, rows, cols, |_, _| Series::zero(field, prec))
    }

    pub fn identity(field: &FqField, n: usize) -> Self {
        Self::diagonal_powers(field, &vec![0; n])
    }

    /// `diag(u^{e_1}, ..., u^{e_n})`, exact.
    pub fn diagonal_powers(field: &FqField, exps: &[i64]) -> Self {
        let n = exps.len();
        Self::from_fn(
            field,
            n,
            n,
            |i, j| {
                if i == j {
                    Series::monomial(field, FqElem::ONE, exps[i], EXACT)
                } else {
                    Series::zero(field, EXACT)
                }
            },
        )
    }

    /// Integer matrix of constants, exact.
    pub fn from_constants(field: &FqField, rows: &[Vec<FqElem>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(field, rows.len(), cols, |i, j| Series::constant(field, rows[i][j], EXACT))
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Series {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series) {
        self.data[i * self.cols + j] = s;
    }

    pub fn entries(&self) -> &[Series] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Series> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Series>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Series> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn map(&self, f: impl Fn(&Series) -> Series) -> Self {
        SeriesMatrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn mul(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        SeriesMatrix::from_fn(&self.field, self.rows, other.cols, |i, j| {
            let mut acc = Series::zero(&self.field, EXACT);
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if a.is_zero() && a.is_exact() || b.is_zero() && b.is_exact() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Series]) -> Vec<Series> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Series::zero(&self.field, EXACT), |acc, k| acc.add(&self.get(i, k).mul(&v[k]))))
            .collect()
    }

    pub fn add(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        SeriesMatrix::from_fn(&self.field, self.rows, self.cols, |i, j| self.get(i, j).add(other.get(i, j)))
    }

    pub fn sub(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        SeriesMatrix::from_fn(&self.field, self.rows, self.cols, |i, j| self.get(i, j).sub(other.get(i, j)))
    }

    pub fn scale(&self, s: &Series) -> SeriesMatrix {
        self.map(|x| x.mul(s))
    }

    /// Multiply every entry by `u^k`.
    pub fn shift(&self, k: i64) -> SeriesMatrix {
        self.map(|x| x.shift(k))
    }

    /// Entrywise `u -> u^p`.
    pub fn substitute_u_p(&self) -> SeriesMatrix {
        self.map(|x| x.substitute_u_p())
    }

    pub fn truncate(&self, n: i64) -> SeriesMatrix {
        self.map(|x| x.truncate(n))
    }

    pub fn assume_precision(&self, n: i64) -> SeriesMatrix {
        self.map(|x| x.assume_precision(n))
    }

    pub fn transpose(&self) -> SeriesMatrix {
        SeriesMatrix::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> SeriesMatrix {
        let (r0, c0) = (rows.start, cols.start);
        SeriesMatrix::from_fn(&self.field, rows.len(), cols.len(), |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn hstack(&self, other: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.rows, other.rows);
        SeriesMatrix::from_fn(&self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    /// Smallest precision among the entries (`EXACT` for an empty matrix).
    pub fn precision(&self) -> i64 {
        self.data.iter().map(Series::precision).min().unwrap_or(EXACT)
    }

    /// Smallest valuation among entries that are nonzero to precision.
    pub fn min_valuation(&self) -> Option<i64> {
        self.data.iter().filter_map(Series::valuation).min()
    }

    /// Lower bound on the valuation of every entry.
    pub fn valuation_bound(&self) -> i64 {
        self.data.iter().map(Series::valuation_bound).min().unwrap_or(EXACT)
    }

    /// All entries lie in `F[[u]]`.
    pub fn is_integral(&self) -> bool {
        self.valuation_bound() >= 0
    }

    /// The `F`-matrix of coefficients of `u^t`.
    pub fn coeff_matrix(&self, t: i64) -> Result<FMat> {
        let mut m = FMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).coeff(t)?);
            }
        }
        Ok(m)
    }

    /// Equal modulo the precision of each pair of entries.
    pub fn agrees_with(&self, other: &SeriesMatrix) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.data.iter().zip(&other.data).all(|(a, b)| a.agrees_with(b))
    }

    /// Inverse over `F((u))` of a square matrix.
    pub fn inverse(&self) -> Result<SeriesMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let s = smith_form(self)?;
        if s.exponents.len() < self.rows {
            return Err(Error::Singular);
        }
        let neg: Vec<i64> = s.exponents.iter().map(|e| -e).collect();
        Ok(s.v_inv.mul(&SeriesMatrix::diagonal_powers(&self.field, &neg)).mul(&s.u_inv))
    }

    /// `v_u(det)` of a square matrix of full rank.
    pub fn det_valuation(&self) -> Result<i64> {
        Ok(smith_exponents(self)?.iter().sum())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row `t` -= q * row `s`
    fn row_axpy(&mut self, t: usize, s: usize, q: &Series) {
        for j in 0..self.cols {
            let d = q.mul(self.get(s, j));
            let x = self.get(t, j).sub(&d);
            self.set(t, j, x);
        }
    }

    /// col `t` -= q * col `s`
    fn col_axpy(&mut self, t: usize, s: usize, q: &Series) {
        for i in 0..self.rows {
            let d = self.get(i, s).mul(q);
            let x = self.get(i, t).sub(&d);
            self.set(i, t, x);
        }
    }

    fn scale_row(&mut self, r: usize, s: &Series) {
        for j in 0..self.cols {
            let x = self.get(r, j).mul(s);
            self.set(r, j, x);
        }
    }

    fn scale_col(&mut self, c: usize, s: &Series) {
        for i in 0..self.rows {
            let x = self.get(i, c).mul(s);
            self.set(i, c, x);
        }
    }
}

impl fmt::Display for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|s| s.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Precision used when inverting units of a matrix whose entries are all exact.
fn working_cap(m: &SeriesMatrix) -> i64 {
    let finite = m.data.iter().map(Series::precision).filter(|&p| p < EXACT).min();
    finite.unwrap_or_else(|| 2 * m.data.iter().filter_map(Series::degree).max().unwrap_or(0).max(0) + 32)
}

/// Smith normal form `A = U * D * V` over `F[[u]]` with `U`, `V` invertible and
/// `D` zero except for `u^{exponents[k]}` at `(k, k)`, `k < rank`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub exponents: Vec<i64>,
    pub u: SeriesMatrix,
    pub v: SeriesMatrix,
    pub u_inv: SeriesMatrix,
    pub v_inv: SeriesMatrix,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.exponents.len()
    }
}

/// Pivot on an entry of minimal valuation (ties to the lowest row, then the
/// lowest column), so quotients stay integral.
pub fn smith_form(a: &SeriesMatrix) -> Result<SmithForm> {
    let field = a.field.clone();
    let (m, n) = (a.rows, a.cols);
    let cap = working_cap(a);
    let mut w = a.clone();
    let mut l = SeriesMatrix::identity(&field, m);
    let mut l_inv = SeriesMatrix::identity(&field, m);
    let mut r = SeriesMatrix::identity(&field, n);
    let mut r_inv = SeriesMatrix::identity(&field, n);
    let mut exponents = Vec::new();
    for k in 0..m.min(n) {
        let mut best: Option<(i64, usize, usize)> = None;
        let mut lowest_unknown = i64::MAX;
        for i in k..m {
            for j in k..n {
                let e = w.get(i, j);
                match e.valuation() {
                    Some(v) if best.is_none_or(|(bv, _, _)| v < bv) => best = Some((v, i, j)),
                    Some(_) => {}
                    None => lowest_unknown = lowest_unknown.min(e.precision()),
                }
            }
        }
        let Some((v, pi, pj)) = best else { break };
        if lowest_unknown < v {
            return Err(Error::InsufficientPrecision { needed: v, available: lowest_unknown });
        }
        w.swap_rows(k, pi);
        l.swap_rows(k, pi);
        l_inv.swap_cols(k, pi);
        w.swap_cols(k, pj);
        r.swap_cols(k, pj);
        r_inv.swap_rows(k, pj);

        let unit = w.get(k, k).shift(-v);
        let unit_inv = unit.inverse(unit.precision().min(cap))?;
        w.scale_row(k, &unit_inv);
        l.scale_row(k, &unit_inv);
        l_inv.scale_col(k, &unit);

        for i in k + 1..m {
            let q = w.get(i, k).shift(-v);
            if q.is_zero() {
                continue;
            }
            w.row_axpy(i, k, &q);
            l.row_axpy(i, k, &q);
            l_inv.col_axpy(k, i, &q.neg());
        }
        for j in k + 1..n {
            let q = w.get(k, j).shift(-v);
            if q.is_zero() {
                continue;
            }
            w.col_axpy(j, k, &q);
            r.col_axpy(j, k, &q);
            r_inv.row_axpy(k, j, &q.neg());
        }
        exponents.push(v);
    }
    debug_assert!(exponents.windows(2).all(|p| p[0] <= p[1]));
    Ok(SmithForm { exponents, u: l_inv, v: r_inv, u_inv: l, v_inv: r })
}

/// Sorted exponents `r_i` with `A = U diag(u^{r_i}) V` for a square matrix
/// invertible over `F((u))`.
pub fn smith_exponents(a: &SeriesMatrix) -> Result<Vec<i64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", a.rows, a.cols)));
    }
    let s = smith_form(a)?;
    if s.rank() < a.rows {
        return Err(Error::InsufficientPrecision { needed: EXACT, available: a.precision() });
    }
    Ok(s.exponents)
}

/// A finitely generated `F[[u]]`-submodule of `F((u))^n`, stored in column
/// Hermite form: column `c` ends at row `pivot_rows[c]` with entry `u^{a_c}`,
/// and entries to the right of a pivot have only exponents below `a_c`.
#[derive(Clone, Debug)]
pub struct Lattice {
    basis: SeriesMatrix,
    pivot_rows: Vec<usize>,
    pivot_exps: Vec<i64>,
}

impl Lattice {
    /// `F[[u]]^n`.
    pub fn standard(field: &FqField, n: usize) -> Self {
        Self::scaled_standard(field, n, 0)
    }

    /// `u^i F[[u]]^n`.
    pub fn scaled_standard(field: &FqField, n: usize, i: i64) -> Self {
        Lattice { basis: SeriesMatrix::diagonal_powers(field, &vec![i; n]), pivot_rows: (0..n).collect(), pivot_exps: vec![i; n] }
    }

    /// The lattice spanned by the columns of `gens`. Columns that vanish to
    /// precision after elimination are dropped.
    pub fn from_generators(gens: &SeriesMatrix) -> Result<Self> {
        let field = gens.field.clone();
        let n = gens.rows;
        let cap = working_cap(gens);
        let mut active: Vec<Vec<Series>> = gens.columns();
        let mut done: Vec<(usize, i64, Vec<Series>)> = Vec::new();
        for row in (0..n).rev() {
            let mut best: Option<(i64, usize)> = None;
            let mut lowest_unknown = i64::MAX;
            for (c, col) in active.iter().enumerate() {
                match col[row].valuation() {
                    Some(v) if best.is_none_or(|(bv, _)| v < bv) => best = Some((v, c)),
                    Some(_) => {}
                    None => lowest_unknown = lowest_unknown.min(col[row].precision()),
                }
            }
            let Some((v, c)) = best else { continue };
            if lowest_unknown < v {
                return Err(Error::InsufficientPrecision { needed: v, available: lowest_unknown });
            }
            let mut pivot = active.remove(c);
            let unit = pivot[row].shift(-v);
            let unit_inv = unit.inverse(unit.precision().min(cap))?;
            for x in pivot.iter_mut() {
                *x = x.mul(&unit_inv);
            }
            for col in active.iter_mut() {
                let q = col[row].shift(-v);
                if q.is_zero() {
                    continue;
                }
                for (x, y) in col.iter_mut().zip(&pivot) {
                    *x = x.sub(&q.mul(y));
                }
            }
            done.push((row, v, pivot));
        }
        done.reverse();
        let pivot_rows: Vec<usize> = done.iter().map(|d| d.0).collect();
        let pivot_exps: Vec<i64> = done.iter().map(|d| d.1).collect();
        let mut cols: Vec<Vec<Series>> = done.into_iter().map(|d| d.2).collect();
        // reduce entries right of each pivot, largest pivot row first
        for c in (0..cols.len()).rev() {
            let (row, a) = (pivot_rows[c], pivot_exps[c]);
            for c2 in c + 1..cols.len() {
                let q = integral_part(&cols[c2][row].shift(-a));
                if q.is_zero() {
                    continue;
                }
                let pivot = cols[c].clone();
                for (x, y) in cols[c2].iter_mut().zip(&pivot) {
                    *x = x.sub(&q.mul(y));
                }
            }
        }
        Ok(Lattice { basis: SeriesMatrix::from_columns(&field, n, &cols), pivot_rows, pivot_exps })
    }

    pub fn field(&self) -> &FqField {
        &self.basis.field
    }

    /// Hermite basis, one column per generator.
    pub fn basis(&self) -> &SeriesMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.pivot_rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.ambient_dim()
    }

    pub fn pivot_rows(&self) -> &[usize] {
        &self.pivot_rows
    }

    pub fn pivot_exponents(&self) -> &[i64] {
        &self.pivot_exps
    }

    /// Coordinates of `v` in the Hermite basis, or `None` if `v` is not in the
    /// lattice (to the available precision).
    pub fn coordinates(&self, v: &[Series]) -> Option<Vec<Series>> {
        assert_eq!(v.len(), self.ambient_dim());
        let field = self.field();
        let mut w = v.to_vec();
        let mut x = vec![Series::zero(field, EXACT); self.rank()];
        for c in (0..self.rank()).rev() {
            let row = self.pivot_rows[c];
            let y = w[row].shift(-self.pivot_exps[c]);
            if y.is_zero() {
                continue;
            }
            if y.valuation_bound() < 0 {
                return None;
            }
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = wi.sub(&y.mul(self.basis.get(i, c)));
            }
            x[c] = y;
        }
        w.iter().all(Series::is_zero).then_some(x)
    }

    pub fn contains(&self, v: &[Series]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn is_sublattice_of(&self, other: &Lattice) -> bool {
        self.basis.columns().iter().all(|c| other.contains(c))
    }

    /// Same lattice, tested by mutual containment.
    pub fn same_as(&self, other: &Lattice) -> bool {
        self.rank() == other.rank() && self.is_sublattice_of(other) && other.is_sublattice_of(self)
    }

    /// Image under a linear map given by a matrix.
    pub fn image(&self, map: &SeriesMatrix) -> Result<Lattice> {
        Lattice::from_generators(&map.mul(&self.basis))
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        Lattice::from_generators(&self.basis.hstack(&other.basis))
    }

    /// `L ∩ u^i F[[u]]^n`, read off from a Smith form of the basis.
    pub fn intersect_with_scaled_standard(&self, i: i64) -> Result<Lattice> {
        if self.rank() == 0 {
            return Ok(self.clone());
        }
        let s = smith_form(&self.basis)?;
        if s.rank() < self.rank() {
            return Err(Error::InsufficientPrecision { needed: EXACT, available: self.basis.precision() });
        }
        let scale: Vec<i64> = s.exponents.iter().map(|&d| (i - d).max(0)).collect();
        let gens = self.basis.mul(&s.v_inv).mul(&SeriesMatrix::diagonal_powers(self.field(), &scale));
        Lattice::from_generators(&gens)
    }

    /// Graded dimensions of `L/uL` under the images of `L ∩ u^i F[[u]]^n`,
    /// scanning upwards from the smallest valuation until nothing is left.
    pub fn mod_u_filtration(&self) -> Result<FilteredDims> {
        Ok(scan_filtration(&self.basis, 1)?.0)
    }
}

fn integral_part(s: &Series) -> Series {
    let terms: Vec<(i64, FqElem)> = s.terms().into_iter().filter(|(e, _)| *e >= 0).collect();
    Series::from_terms(s.field(), &terms, s.precision())
}

/// Solutions of `B c(u^stride) ∈ u^i F[[u]]^n` truncated to the coefficients
/// `c_0, ..., c_{blocks-1}` that matter; every later coefficient is free.
#[derive(Clone, Debug)]
pub(crate) struct Preimage {
    field: FqField,
    width: usize,
    blocks: usize,
    kernel: Vec<Vec<FqElem>>,
}

impl Preimage {
    pub(crate) fn compute(b: &SeriesMatrix, i: i64, stride: i64) -> Result<Preimage> {
        let field = b.field.clone();
        let (n, r) = (b.rows, b.cols);
        let lo = b.valuation_bound();
        let blocks = if i <= lo { 0 } else { ((i - lo) + stride - 1) / stride };
        let blocks = blocks as usize;
        if blocks == 0 {
            return Ok(Preimage { field, width: r, blocks, kernel: Vec::new() });
        }
        let eq_rows = n * (i - lo) as usize;
        let mut sys = FMat::zeros(eq_rows, r * blocks);
        for t in lo..i {
            for k in 0..blocks {
                let s = t - stride * k as i64;
                if s < lo {
                    continue;
                }
                let coeffs = b.coeff_matrix(s)?;
                for a in 0..n {
                    for c in 0..r {
                        sys.set(n * (t - lo) as usize + a, r * k + c, coeffs.get(a, c));
                    }
                }
            }
        }
        Ok(Preimage { kernel: sys.kernel(&field), field, width: r, blocks })
    }

    /// The possible constant terms `c_0`.
    pub(crate) fn leading(&self) -> Subspace {
        if self.blocks == 0 {
            return Subspace::full(self.width);
        }
        let heads: Vec<Vec<FqElem>> = self.kernel.iter().map(|v| v[..self.width].to_vec()).collect();
        Subspace::span(&self.field, self.width, &heads)
    }

    /// A polynomial solution with constant term `c0`.
    pub(crate) fn lift(&self, c0: &[FqElem]) -> Option<Vec<Series>> {
        let f = &self.field;
        if self.blocks == 0 {
            return Some(c0.iter().map(|&c| Series::constant(f, c, EXACT)).collect());
        }
        let mut m = FMat::zeros(self.width, self.kernel.len());
        for (k, v) in self.kernel.iter().enumerate() {
            for (a, &x) in v.iter().enumerate().take(self.width) {
                m.set(a, k, x);
            }
        }
        let beta = m.solve(f, c0)?;
        let mut full = vec![FqElem::ZERO; self.width * self.blocks];
        for (b, v) in beta.iter().zip(&self.kernel) {
            for (x, &y) in full.iter_mut().zip(v) {
                *x = f.add(*x, f.mul(*b, y));
            }
        }
        Some(
            (0..self.width)
                .map(|a| {
                    let coeffs: Vec<FqElem> = (0..self.blocks).map(|k| full[k * self.width + a]).collect();
                    Series::from_coeffs(f, 0, coeffs, EXACT)
                })
                .collect(),
        )
    }

    /// Generators of the full preimage lattice `{c : B c(u^stride) ∈ u^i}`.
    pub(crate) fn lattice_generators(&self) -> SeriesMatrix {
        let f = &self.field;
        let r = self.width;
        let mut cols: Vec<Vec<Series>> = self
            .kernel
            .iter()
            .map(|v| (0..r).map(|a| Series::from_coeffs(f, 0, (0..self.blocks).map(|k| v[k * r + a]).collect(), EXACT)).collect())
            .collect();
        for a in 0..r {
            let mut e: Vec<Series> = vec![Series::zero(f, EXACT); r];
            e[a] = Series::monomial(f, FqElem::ONE, self.blocks as i64, EXACT);
            cols.push(e);
        }
        SeriesMatrix::from_columns(f, r, &cols)
    }
}

/// Filtration on the columns' span mod `u` induced by `B c(u^stride) ∈ u^i`,
/// for every `i` from the valuation bound until the filtration reaches zero.
pub(crate) fn scan_filtration(b: &SeriesMatrix, stride: i64) -> Result<(FilteredDims, BTreeMap<i64, Subspace>)> {
    let r = b.cols;
    let mut steps = BTreeMap::new();
    if r == 0 {
        return Ok((FilteredDims::default(), steps));
    }
    let lo = b.valuation_bound();
    if lo >= EXACT / 2 {
        return Err(Error::InsufficientPrecision { needed: EXACT, available: b.precision() });
    }
    let mut i = lo;
    let mut prev = r;
    let mut graded = BTreeMap::new();
    loop {
        let sub = Preimage::compute(b, i + 1, stride)?.leading();
        let d = sub.dim();
        if d < prev {
            graded.insert(i, prev - d);
        }
        steps.insert(i + 1, sub);
        prev = d;
        if d == 0 {
            break;
        }
        i += 1;
    }
    steps.insert(lo, Subspace::full(r));
    Ok((FilteredDims { graded }, steps))
}

/// Dimensions of the graded pieces of a finite filtered vector space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilteredDims {
    graded: BTreeMap<i64, usize>,
}

impl FilteredDims {
    /// Filtration with one basis vector in each listed degree.
    pub fn from_weights(weights: &[i64]) -> Self {
        let mut graded = BTreeMap::new();
        for &w in weights {
            *graded.entry(w).or_insert(0) += 1;
        }
        FilteredDims { graded }
    }

    pub fn graded(&self) -> &BTreeMap<i64, usize> {
        &self.graded
    }

    pub fn total(&self) -> usize {
        self.graded.values().sum()
    }

    /// `sum_i i dim gr^i`.
    pub fn weighted_sum(&self) -> i64 {
        self.graded.iter().map(|(&i, &d)| i * d as i64).sum()
    }

    /// `dim F^i`.
    pub fn dim_at(&self, i: i64) -> usize {
        self.graded.range(i..).map(|(_, &d)| d).sum()
    }

    /// The degrees with multiplicity, ascending.
    pub fn weights(&self) -> Vec<i64> {
        self.graded.iter().flat_map(|(&i, &d)| std::iter::repeat_n(i, d)).collect()
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.graded.keys().next()?, *self.graded.keys().next_back()?))
    }
}

/// Graded dimensions of `L/uL` for degrees in `degrees`; fails if some graded
/// piece lies outside the range.
pub fn quotient_mod_u_filtration(l: &Lattice, degrees: RangeInclusive<i64>) -> Result<FilteredDims> {
    let (lo, hi) = (*degrees.start(), *degrees.end());
    let r = l.rank();
    let dim_at = |i: i64| -> Result<usize> { Ok(Preimage::compute(&l.basis, i, 1)?.leading().dim()) };
    if dim_at(lo)? != r || dim_at(hi + 1)? != 0 {
        return Err(Error::RangeTooSmall { lo, hi });
    }
    let mut graded = BTreeMap::new();
    let mut prev = r;
    for i in lo..=hi {
        let d = dim_at(i + 1)?;
        if d < prev {
            graded.insert(i, prev - d);
        }
        prev = d;
    }
    Ok(FilteredDims { graded })
}

/// Whether `f(F^i S) = f(S) ∩ F^i T` for every `i` in `degrees`, with `F^i` the
/// intersection with `u^i` times the standard lattice on both sides.
pub fn is_strict(map: &SeriesMatrix, source: &Lattice, target: &Lattice, degrees: RangeInclusive<i64>) -> Result<bool> {
    if map.cols() != source.ambient_dim() || map.rows() != target.ambient_dim() {
        return Err(Error::DimensionMismatch("map does not fit source and target".into()));
    }
    let image = source.image(map)?;
    if !image.is_sublattice_of(target) {
        return Err(Error::InvalidInput("map does not send the source into the target".into()));
    }
    let (lo, hi) = (*degrees.start(), *degrees.end());
    for l in [source, &image] {
        if let Some((a, b)) = l.mod_u_filtration()?.support() {
            if a < lo || b + 1 > hi {
                return Err(Error::RangeTooSmall { lo, hi });
            }
        }
    }
    for i in degrees {
        let lhs = source.intersect_with_scaled_standard(i)?.image(map)?;
        let rhs = image.intersect_with_scaled_standard(i)?;
        if !lhs.same_as(&rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A basis `(g_i)` of a lattice `L` with `g_i ∈ u^{r_i} F[[u]]^n`, together
/// with `(u^{-r_i} g_i)`, which is a basis of `F[[u]]^n`.
#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    pub basis: SeriesMatrix,
    pub scaled: SeriesMatrix,
    pub exponents: Vec<i64>,
}

/// Check that the `g_i ∈ L ∩ u^{r_i}` give a basis of the graded pieces of
/// `L/uL`, and return the resulting adapted bases.
pub fn lift_adapted_basis(l: &Lattice, gens: &[(Vec<Series>, i64)]) -> Result<AdaptedBasis> {
    let field = l.field().clone();
    let n = l.ambient_dim();
    if !l.is_full_rank() {
        return Err(Error::NotAGradedBasis("lattice is not of full rank".into()));
    }
    if gens.len() != n {
        return Err(Error::NotAGradedBasis(format!("{} generators for rank {n}", gens.len())));
    }
    let mut heads: BTreeMap<i64, Vec<Vec<FqElem>>> = BTreeMap::new();
    for (g, r) in gens {
        if g.iter().any(|x| x.valuation_bound() < *r) {
            return Err(Error::NotAGradedBasis(format!("generator not divisible by u^{r}")));
        }
        let coords = l.coordinates(g).ok_or_else(|| Error::NotAGradedBasis("generator outside the lattice".into()))?;
        let head = coords.iter().map(|c| c.coeff(0)).collect::<Result<Vec<_>>>()?;
        heads.entry(*r).or_default().push(head);
    }
    for (&r, hs) in &heads {
        let upper = Preimage::compute(&l.basis, r + 1, 1)?.leading();
        let here = Preimage::compute(&l.basis, r, 1)?.leading();
        let spanned = upper.sum(&field, &Subspace::span(&field, n, hs));
        if spanned.dim() != upper.dim() + hs.len() || spanned != here {
            return Err(Error::NotAGradedBasis(format!("degree {r} pieces are not a basis")));
        }
    }
    let basis = SeriesMatrix::from_columns(&field, n, &gens.iter().map(|g| g.0.clone()).collect::<Vec<_>>());
    let exponents: Vec<i64> = gens.iter().map(|g| g.1).collect();
    let neg: Vec<i64> = exponents.iter().map(|e| -e).collect();
    let scaled = basis.mul(&SeriesMatrix::diagonal_powers(&field, &neg));
    if !Lattice::from_generators(&basis)?.same_as(l) {
        return Err(Error::NotAGradedBasis("lift does not span the lattice".into()));
    }
    if !scaled.is_integral() || scaled.det_valuation()? != 0 {
        return Err(Error::NotAGradedBasis("scaled lift is not a basis of the standard lattice".into()));
    }
    let (lo, hi) = (*exponents.iter().min().unwrap_or(&0), *exponents.iter().max().unwrap_or(&0));
    for j in lo..=hi + 1 {
        let scale: Vec<i64> = exponents.iter().map(|&r| (j - r).max(0)).collect();
        let generated = Lattice::from_generators(&basis.mul(&SeriesMatrix::diagonal_powers(&field, &scale)))?;
        if !generated.same_as(&l.intersect_with_scaled_standard(j)?) {
            return Err(Error::NotAGradedBasis(format!("filtration step {j} is not generated")));
        }
    }
    Ok(AdaptedBasis { basis, scaled, exponents })
}

/// Weighted sums `sum_i i dim gr^i` of two filtrations of equal total
/// dimension. When one filtration is contained in the other, equal sums mean
/// equal filtrations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightSumComparison {
    pub first: i64,
    pub second: i64,
    pub ordering: Ordering,
}

pub fn graded_weight_sum_compare(first: &FilteredDims, second: &FilteredDims) -> Result<WeightSumComparison> {
    if first.total() != second.total() {
        return Err(Error::DimensionMismatch(format!("filtrations of dimension {} and {}", first.total(), second.total())));
    }
    let (a, b) = (first.weighted_sum(), second.weighted_sum());
    Ok(WeightSumComparison { first: a, second: b, ordering: a.cmp(&b) })
}
