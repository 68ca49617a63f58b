//! `p`-torsion Breuil-Kisin modules over `k[[u]] ⊗ F`, decomposed along the
//! embeddings `tau_j = tau_0 o phi^j` of `k` into `F`.
//!
//! A module of rank `n` is `f` copies of `F[[u]]^n` with matrices `A_j`
//! describing `phi : M_{tau_{j+1}} -> M_{tau_j}`: the column `l` of `A_j` holds
//! the coordinates of `phi(e_l)`, and `phi(c(u) e) = A_j c(u^p)`.

use std::fmt;

use crate::algebra::{FqElem, FqField, Series};
use crate::error::{Error, Result};
use crate::lattices::{
    graded_weight_sum_compare, lift_adapted_basis, scan_filtration, smith_exponents, smith_form, FilteredDims, Lattice, Preimage,
    SeriesMatrix,
};
use crate::linalg::Subspace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BKModule {
    field: FqField,
    f: usize,
    rank: usize,
    frob: Vec<SeriesMatrix>,
}

impl BKModule {
    /// Module over the residue field of degree `f` with Frobenius matrices
    /// `frob[j]`. Each must be square of the same size and invertible over
    /// `F((u))`; `f` must divide the degree of `F`.
    pub fn new(field: &FqField, f: usize, frob: Vec<SeriesMatrix>) -> Result<Self> {
        if f == 0 || !field.degree().is_multiple_of(f) {
            return Err(Error::FieldTooSmall { f, m: field.degree() });
        }
        if frob.len() != f {
            return Err(Error::InvalidModule(format!("{} Frobenius matrices for f = {f}", frob.len())));
        }
        let rank = frob[0].rows();
        for a in &frob {
            if a.rows() != rank || a.cols() != rank {
                return Err(Error::InvalidModule("Frobenius matrices must be square of equal size".into()));
            }
            if a.field() != field {
                return Err(Error::FieldMismatch);
            }
            if rank > 0 {
                smith_exponents(a)?;
            }
        }
        Ok(BKModule { field: field.clone(), f, rank, frob })
    }

    /// `n p + p + 2`, enough for weights in `[0, p]` and a margin.
    pub fn default_precision(p: u32, rank: usize) -> i64 {
        (rank as i64 + 1) * p as i64 + 2
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// Degree `f` of the residue field `k` over `F_p`.
    pub fn residue_degree(&self) -> usize {
        self.f
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn frob(&self, j: usize) -> &SeriesMatrix {
        &self.frob[j % self.f]
    }

    pub fn frobs(&self) -> &[SeriesMatrix] {
        &self.frob
    }

    /// Smallest precision among the Frobenius entries.
    pub fn precision(&self) -> i64 {
        self.frob.iter().map(SeriesMatrix::precision).min().unwrap_or(crate::algebra::EXACT)
    }

    /// Forget coefficients from `u^n` on.
    pub fn truncate(&self, n: i64) -> Result<Self> {
        BKModule::new(&self.field, self.f, self.frob.iter().map(|a| a.truncate(n)).collect())
    }

    /// `phi(c)` for `c ∈ M_{tau_{j+1}}`, as an element of `M_{tau_j}`.
    pub fn apply_frobenius(&self, j: usize, c: &[Series]) -> Vec<Series> {
        let sub: Vec<Series> = c.iter().map(Series::substitute_u_p).collect();
        self.frob(j).mul_vec(&sub)
    }
}

impl fmt::Display for BKModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {} over F_{}^{}, f = {}", self.rank, self.p(), self.field.degree(), self.f)?;
        for (j, a) in self.frob.iter().enumerate() {
            writeln!(f, "A_{j} =")?;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Sorted weights for each embedding `tau_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightProfile(pub Vec<Vec<i64>>);

impl WeightProfile {
    pub fn all_in(&self, lo: i64, hi: i64) -> bool {
        self.0.iter().flatten().all(|&w| (lo..=hi).contains(&w))
    }

    /// Per-embedding sums, i.e. `v_u(det A_j)`.
    pub fn sums(&self) -> Vec<i64> {
        self.0.iter().map(|w| w.iter().sum()).collect()
    }
}

impl fmt::Display for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .map(|(j, w)| format!("tau_{j}: {{{}}}", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Weights as Smith exponents of the Frobenius matrices.
pub fn weights(m: &BKModule) -> Result<WeightProfile> {
    let mut out = Vec::with_capacity(m.f);
    for a in &m.frob {
        out.push(if m.rank == 0 { Vec::new() } else { smith_exponents(a)? });
    }
    Ok(WeightProfile(out))
}

/// Weights as the graded dimensions of `M^phi/u M^phi` filtered by
/// `M^phi ∩ u^i M`; independent of the Smith form.
pub fn weights_via_filtration(m: &BKModule) -> Result<WeightProfile> {
    let mut out = Vec::with_capacity(m.f);
    for a in &m.frob {
        out.push(scan_filtration(a, 1)?.0.weights());
    }
    Ok(WeightProfile(out))
}

/// `F^i M_{tau_t} = {x : phi(x) ∈ u^i M}` for every embedding `t`.
pub fn filtration_of_m(m: &BKModule, i: i64) -> Result<Vec<Lattice>> {
    let p = m.p() as i64;
    (0..m.f)
        .map(|t| {
            let a = m.frob((t + m.f - 1) % m.f);
            Lattice::from_generators(&Preimage::compute(a, i, p)?.lattice_generators())
        })
        .collect()
}

/// Graded dimensions of `M_k = M/uM` at `tau_{j+1}` under the image of
/// `F^i M`.
pub fn mod_u_filtration(m: &BKModule, j: usize) -> Result<FilteredDims> {
    Ok(scan_filtration(m.frob(j), m.p() as i64)?.0)
}

/// For one `j`: `g` is a basis of `M_{tau_{j+1}}`, `f` a basis of
/// `M_{tau_j}`, and `phi(g_i) = u^{r_i} f_i`.
#[derive(Clone, Debug)]
pub struct AdaptedPair {
    pub source_basis: SeriesMatrix,
    pub target_basis: SeriesMatrix,
    pub exponents: Vec<i64>,
}

/// Bases witnessing that `M_k -> M^phi_k` is a filtered isomorphism.
#[derive(Clone, Debug)]
pub struct SdCertificate {
    pub pairs: Vec<AdaptedPair>,
}

impl SdCertificate {
    /// Recheck the certificate against the module from scratch.
    pub fn verify(&self, m: &BKModule) -> Result<bool> {
        if self.pairs.len() != m.f {
            return Ok(false);
        }
        for (j, pair) in self.pairs.iter().enumerate() {
            for b in [&pair.source_basis, &pair.target_basis] {
                if !b.is_integral() || (m.rank > 0 && b.det_valuation()? != 0) {
                    return Ok(false);
                }
            }
            let lhs = m.frob(j).mul(&pair.source_basis.substitute_u_p());
            let rhs = pair.target_basis.mul(&SeriesMatrix::diagonal_powers(&m.field, &pair.exponents));
            if !lhs.agrees_with(&rhs) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug)]
pub struct SdReport {
    /// Filtered isomorphism and weights in `[0, p]`.
    pub strongly_divisible: bool,
    /// `M_k -> M^phi_k` is an isomorphism of filtered vector spaces.
    pub filtered_iso: bool,
    pub weights_in_range: bool,
    pub weights: WeightProfile,
    /// Per `j`: graded dims of `M_k` at `tau_{j+1}` and of `M^phi_k` at `tau_j`.
    pub m_k_dims: Vec<FilteredDims>,
    pub m_phi_dims: Vec<FilteredDims>,
    pub certificate: Option<SdCertificate>,
}

/// Decide strong divisibility by comparing, degree by degree, the filtration
/// on `M_k` induced by `F^i M` with the one on `M^phi_k` induced by
/// `M^phi ∩ u^i M`. In the bases `(e_l)` and `(phi(e_l))` the comparison map
/// is the identity, so both sides are subspaces of `F^n`.
pub fn is_strongly_divisible(m: &BKModule) -> Result<SdReport> {
    let p = m.p() as i64;
    let w = weights(m)?;
    let mut filtered_iso = true;
    let mut m_k_dims = Vec::new();
    let mut m_phi_dims = Vec::new();
    let mut steps: Vec<Vec<(i64, Subspace)>> = Vec::new();
    for (j, a) in m.frob.iter().enumerate() {
        let ws = &w.0[j];
        let (Some(&lo), Some(&hi)) = (ws.first(), ws.last()) else {
            m_k_dims.push(FilteredDims::default());
            m_phi_dims.push(FilteredDims::default());
            steps.push(Vec::new());
            continue;
        };
        let mut here = Vec::new();
        let mut same = true;
        for i in lo..=hi + 1 {
            let from_m = Preimage::compute(a, i, p)?.leading();
            let from_phi = Preimage::compute(a, i, 1)?.leading();
            debug_assert!(from_m.is_subspace_of(&m.field, &from_phi));
            same &= from_m == from_phi;
            here.push((i, from_m));
        }
        let dims = graded_from_steps(&here);
        let phi_dims = FilteredDims::from_weights(ws);
        let cmp = graded_weight_sum_compare(&dims, &phi_dims)?;
        debug_assert_eq!(same, cmp.ordering.is_eq());
        filtered_iso &= same;
        m_k_dims.push(dims);
        m_phi_dims.push(phi_dims);
        steps.push(here);
    }
    let weights_in_range = w.all_in(0, p);
    let certificate = if filtered_iso { Some(build_certificate(m, &w, &steps)?) } else { None };
    Ok(SdReport {
        strongly_divisible: filtered_iso && weights_in_range,
        filtered_iso,
        weights_in_range,
        weights: w,
        m_k_dims,
        m_phi_dims,
        certificate,
    })
}

fn graded_from_steps(steps: &[(i64, Subspace)]) -> FilteredDims {
    let mut weights = Vec::new();
    for pair in steps.windows(2) {
        let (i, ref a) = pair[0];
        let drop = a.dim() - pair[1].1.dim();
        weights.extend(std::iter::repeat_n(i, drop));
    }
    FilteredDims::from_weights(&weights)
}

fn build_certificate(m: &BKModule, w: &WeightProfile, steps: &[Vec<(i64, Subspace)>]) -> Result<SdCertificate> {
    let p = m.p() as i64;
    let n = m.rank;
    let mut pairs = Vec::new();
    for (j, a) in m.frob.iter().enumerate() {
        if n == 0 {
            let empty = SeriesMatrix::identity(&m.field, 0);
            pairs.push(AdaptedPair { source_basis: empty.clone(), target_basis: empty, exponents: Vec::new() });
            continue;
        }
        let here = &steps[j];
        let mut gs: Vec<(Vec<Series>, i64)> = Vec::new();
        // walk down from the top step, completing bases of F^{i+1} inside F^i
        for k in (0..here.len() - 1).rev() {
            let (i, ref big) = here[k];
            let small = &here[k + 1].1;
            let pre = Preimage::compute(a, i, p)?;
            for c0 in big.complement_of(&m.field, small) {
                let g = pre.lift(&c0).ok_or_else(|| Error::NotAGradedBasis("lift failed".into()))?;
                gs.push((g, i));
            }
        }
        let images: Vec<(Vec<Series>, i64)> = gs.iter().map(|(g, i)| (m.apply_frobenius(j, g), *i)).collect();
        let lattice = Lattice::from_generators(a)?;
        let adapted = lift_adapted_basis(&lattice, &images)?;
        debug_assert_eq!(
            {
                let mut e = adapted.exponents.clone();
                e.sort();
                e
            },
            w.0[j]
        );
        let source = SeriesMatrix::from_columns(&m.field, n, &gs.iter().map(|g| g.0.clone()).collect::<Vec<_>>());
        pairs.push(AdaptedPair { source_basis: source, target_basis: adapted.scaled, exponents: adapted.exponents });
    }
    Ok(SdCertificate { pairs })
}

/// `A_j -> C_j^{-1} A_j phi(C_{j+1})` for `C_j ∈ GL_n(F[[u]])`.
pub fn conjugate(m: &BKModule, c: &[SeriesMatrix]) -> Result<BKModule> {
    if c.len() != m.f {
        return Err(Error::DimensionMismatch(format!("{} basis changes for f = {}", c.len(), m.f)));
    }
    for cj in c {
        if cj.rows() != m.rank || !cj.is_integral() || (m.rank > 0 && cj.det_valuation()? != 0) {
            return Err(Error::InvalidInput("basis change must lie in GL_n(F[[u]])".into()));
        }
    }
    let frob = (0..m.f).map(|j| Ok(c[j].inverse()?.mul(&m.frob[j]).mul(&c[(j + 1) % m.f].substitute_u_p()))).collect::<Result<Vec<_>>>()?;
    BKModule::new(&m.field, m.f, frob)
}

/// `Hom(ur_x, M)`: multiplies `A_0` by `x^{-1}`.
pub fn twist_unramified(m: &BKModule, x: FqElem) -> Result<BKModule> {
    let inv = m.field.inv(x).map_err(|_| Error::ZeroScalar)?;
    let mut frob = m.frob.clone();
    frob[0] = frob[0].scale(&Series::constant(&m.field, inv, crate::algebra::EXACT));
    BKModule::new(&m.field, m.f, frob)
}

/// Generators of a candidate submodule `S_j ⊆ M_{tau_j}` for each `j`.
#[derive(Clone, Debug)]
pub struct SubmoduleSpec {
    pub generators: Vec<SeriesMatrix>,
}

#[derive(Clone, Debug)]
pub struct SubQuotient {
    pub sub: BKModule,
    pub quotient: BKModule,
    /// Per `j`, a basis of `M_{tau_j}` whose first columns span `S_j`.
    pub adapted_bases: Vec<SeriesMatrix>,
}

/// Split `M` along saturated, Frobenius-stable lattices `S_j`.
pub fn sub_quotient(m: &BKModule, s: &SubmoduleSpec) -> Result<SubQuotient> {
    if s.generators.len() != m.f {
        return Err(Error::DimensionMismatch("one generator matrix per embedding".into()));
    }
    let n = m.rank;
    let mut bases = Vec::new();
    let mut r = None;
    for g in &s.generators {
        let l = Lattice::from_generators(g)?;
        if *r.get_or_insert(l.rank()) != l.rank() {
            return Err(Error::InvalidInput("sublattices of different ranks".into()));
        }
        let sm = smith_form(l.basis())?;
        if sm.exponents.iter().any(|&e| e != 0) {
            return Err(Error::NotSaturated);
        }
        let rest = sm.u.submatrix(0..n, l.rank()..n);
        bases.push(l.basis().hstack(&rest));
    }
    let r = r.unwrap_or(0);
    let mut subs = Vec::new();
    let mut quots = Vec::new();
    for j in 0..m.f {
        let a = bases[j].inverse()?.mul(&m.frob[j]).mul(&bases[(j + 1) % m.f].substitute_u_p());
        for i in r..n {
            for k in 0..r {
                if !a.get(i, k).is_zero() {
                    return Err(Error::NotStable);
                }
            }
        }
        subs.push(a.submatrix(0..r, 0..r));
        quots.push(a.submatrix(r..n, r..n));
    }
    Ok(SubQuotient { sub: BKModule::new(&m.field, m.f, subs)?, quotient: BKModule::new(&m.field, m.f, quots)?, adapted_bases: bases })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactSdReport {
    pub sub_sd: bool,
    pub middle_sd: bool,
    pub quot_sd: bool,
    /// `N -> P` is strict, tested through `0 -> M_k -> N_k -> P_k -> 0`.
    pub strict: bool,
    pub weights_additive: bool,
}

/// Examine `0 -> M -> N -> P -> 0`, with `M`, `P` as produced by
/// [`sub_quotient`] from `N`.
pub fn check_exact_sd(sub: &BKModule, middle: &BKModule, quot: &BKModule) -> Result<ExactSdReport> {
    if sub.rank + quot.rank != middle.rank || sub.f != middle.f || quot.f != middle.f {
        return Err(Error::DimensionMismatch("ranks or residue degrees do not add up".into()));
    }
    let (ws, wn, wq) = (weights(sub)?, weights(middle)?, weights(quot)?);
    let weights_additive = (0..middle.f).all(|j| {
        let mut u: Vec<i64> = ws.0[j].iter().chain(&wq.0[j]).copied().collect();
        u.sort();
        u == wn.0[j]
    });
    let mut strict = true;
    for j in 0..middle.f {
        let (a, b, c) = (mod_u_filtration(sub, j)?, mod_u_filtration(middle, j)?, mod_u_filtration(quot, j)?);
        let lo = [&a, &b, &c].iter().filter_map(|d| d.support()).map(|s| s.0).min().unwrap_or(0);
        let hi = [&a, &b, &c].iter().filter_map(|d| d.support()).map(|s| s.1).max().unwrap_or(0);
        strict &= (lo..=hi + 1).all(|i| b.dim_at(i) == a.dim_at(i) + c.dim_at(i));
    }
    Ok(ExactSdReport {
        sub_sd: is_strongly_divisible(sub)?.strongly_divisible,
        middle_sd: is_strongly_divisible(middle)?.strongly_divisible,
        quot_sd: is_strongly_divisible(quot)?.strongly_divisible,
        strict,
        weights_additive,
    })
}

/// Heuristic search for Frobenius-stable lines spanned by constant vectors
/// (one point of `P^{n-1}(F)` per embedding). Finds nothing about lines whose
/// generators genuinely involve `u`.
pub fn find_stable_lines(m: &BKModule, budget: u64) -> Result<Vec<SubmoduleSpec>> {
    let f = &m.field;
    let n = m.rank;
    if n == 0 {
        return Ok(Vec::new());
    }
    let q = f.size() as u64;
    let points = (q.pow(n as u32) - 1) / (q - 1);
    if points.saturating_mul(m.f as u64) > budget {
        return Err(Error::BoxTooLarge(points as u128 * m.f as u128));
    }
    let mut found = Vec::new();
    for start in projective_points(f, n) {
        // v_j is forced by v_{j+1}: it must be the direction of A_j v_{j+1}
        let mut v = start.clone();
        let mut chain = vec![start.clone()];
        let mut ok = true;
        for j in (0..m.f).rev() {
            let consts: Vec<Series> = v.iter().map(|&c| Series::constant(f, c, crate::algebra::EXACT)).collect();
            match constant_direction(f, &m.frob[j].mul_vec(&consts)) {
                Some(d) => {
                    v = d;
                    chain.push(v.clone());
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || v != start {
            continue;
        }
        chain.pop();
        chain.reverse();
        // chain[j] spans S_j
        let generators = chain.iter().map(|c| SeriesMatrix::from_constants(f, &c.iter().map(|&x| vec![x]).collect::<Vec<_>>())).collect();
        found.push(SubmoduleSpec { generators });
    }
    Ok(found)
}

fn projective_points(f: &FqField, n: usize) -> Vec<Vec<FqElem>> {
    let q = f.size();
    let mut out = Vec::new();
    for lead in 0..n {
        let free = n - lead - 1;
        for idx in 0..(q as u64).pow(free as u32) {
            let mut v = vec![FqElem::ZERO; n];
            v[lead] = FqElem::ONE;
            let mut x = idx;
            for slot in v.iter_mut().skip(lead + 1) {
                *slot = FqElem((x % q as u64) as u32);
                x /= q as u64;
            }
            out.push(v);
        }
    }
    out
}

/// If `w = s * c` with `c` a constant vector, the normalised `c`.
fn constant_direction(f: &FqField, w: &[Series]) -> Option<Vec<FqElem>> {
    let (k, v) = w.iter().enumerate().filter_map(|(k, s)| s.valuation().map(|v| (k, v))).min_by_key(|x| (x.1, x.0))?;
    let unit = w[k].shift(-v);
    let inv = unit.inverse(unit.precision()).ok()?;
    let mut c = Vec::with_capacity(w.len());
    for s in w {
        let ratio = s.shift(-v).mul(&inv);
        let c0 = ratio.coeff(0).ok()?;
        if !ratio.sub(&Series::constant(f, c0, crate::algebra::EXACT)).is_zero() {
            return None;
        }
        c.push(c0);
    }
    let lead = c.iter().find(|x| !x.is_zero())?;
    let li = f.inv(*lead).ok()?;
    Some(c.into_iter().map(|x| f.mul(x, li)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::EXACT;

    fn poly(f: &FqField, terms: &[(i64, i64)], prec: i64) -> Series {
        let t: Vec<(i64, FqElem)> = terms.iter().map(|&(e, c)| (e, f.from_int(c))).collect();
        Series::from_terms(f, &t, prec)
    }

    /// Entries as `(exponent, coefficient)` term lists.
    type Entries<'a> = &'a [&'a [&'a [(i64, i64)]]];

    fn module(f: &FqField, mats: &[Entries], prec: i64) -> BKModule {
        let frob = mats
            .iter()
            .map(|m| SeriesMatrix::from_rows(f, m.iter().map(|r| r.iter().map(|e| poly(f, e, prec)).collect()).collect()).unwrap())
            .collect();
        BKModule::new(f, mats.len(), frob).unwrap()
    }

    #[test]
    fn rank_one_filtration() {
        let f = FqField::prime(5).unwrap();
        let m = module(&f, &[&[&[&[(3, 1)]]]], 20);
        assert_eq!(weights(&m).unwrap().0, vec![vec![3]]);
        // F^i M = u^{ceil((i - 3)/5)} for i > 3
        for (i, e) in [(3, 0), (4, 1), (8, 1), (9, 2)] {
            let l = &filtration_of_m(&m, i).unwrap()[0];
            assert_eq!(l.pivot_exponents(), &[e], "i = {i}");
        }
        let r = is_strongly_divisible(&m).unwrap();
        assert!(r.strongly_divisible);
        assert!(r.certificate.unwrap().verify(&m).unwrap());
    }

    #[test]
    fn diagonal_weights_out_of_range() {
        let f = FqField::prime(3).unwrap();
        let m = module(&f, &[&[&[&[(0, 1)], &[]], &[&[], &[(4, 1)]]]], 20);
        let r = is_strongly_divisible(&m).unwrap();
        assert!(r.filtered_iso);
        assert!(!r.weights_in_range);
        assert!(!r.strongly_divisible);
    }

    #[test]
    fn non_sd_example() {
        // A = [[1, u], [0, u^2]] over F_3: u^2 e_2 = phi(e_2) - u phi(e_1) is nonzero in
        // M^phi / u M^phi, but F^2 M lies in uM.
        let f = FqField::prime(3).unwrap();
        let m = module(&f, &[&[&[&[(0, 1)], &[(1, 1)]], &[&[], &[(2, 1)]]]], 20);
        let r = is_strongly_divisible(&m).unwrap();
        assert_eq!(r.weights.0, vec![vec![0, 2]]);
        assert!(!r.filtered_iso);
        assert!(r.certificate.is_none());
        assert_eq!(weights_via_filtration(&m).unwrap(), r.weights);
    }

    #[test]
    fn conjugation_keeps_weights() {
        let f = FqField::new(3, 2).unwrap();
        let m = module(&f, &[&[&[&[(1, 1)], &[(0, 1)]], &[&[], &[(2, 1)]]], &[&[&[(0, 2)], &[]], &[&[(1, 1)], &[(1, 1)]]]], 25);
        let c0 = SeriesMatrix::from_rows(
            &f,
            vec![
                vec![poly(&f, &[(0, 1), (1, 1)], EXACT), poly(&f, &[(0, 2)], EXACT)],
                vec![poly(&f, &[], EXACT), poly(&f, &[(0, 1)], EXACT)],
            ],
        )
        .unwrap();
        let c1 = SeriesMatrix::identity(&f, 2);
        let m2 = conjugate(&m, &[c0, c1]).unwrap();
        assert_eq!(weights(&m).unwrap(), weights(&m2).unwrap());
        assert_eq!(is_strongly_divisible(&m).unwrap().strongly_divisible, is_strongly_divisible(&m2).unwrap().strongly_divisible);
    }

    #[test]
    fn block_triangular_sub_quotient() {
        let f = FqField::prime(5).unwrap();
        let m = module(&f, &[&[&[&[(1, 1)], &[(0, 3)]], &[&[], &[(2, 1)]]]], 25);
        let e1 = SeriesMatrix::from_constants(&f, &[vec![FqElem::ONE], vec![FqElem::ZERO]]);
        let sq = sub_quotient(&m, &SubmoduleSpec { generators: vec![e1] }).unwrap();
        assert_eq!(weights(&sq.sub).unwrap().0, vec![vec![1]]);
        assert_eq!(weights(&sq.quotient).unwrap().0, vec![vec![2]]);
        let rep = check_exact_sd(&sq.sub, &m, &sq.quotient).unwrap();
        // the unit in the corner merges the weights into {0, 3}
        assert_eq!(weights(&m).unwrap().0, vec![vec![0, 3]]);
        assert!(!rep.weights_additive);
        assert!(!rep.strict);
        assert!(rep.sub_sd && rep.quot_sd);

        let split = module(&f, &[&[&[&[(1, 1)], &[]], &[&[], &[(2, 1)]]]], 25);
        let e1 = SeriesMatrix::from_constants(&f, &[vec![FqElem::ONE], vec![FqElem::ZERO]]);
        let sq = sub_quotient(&split, &SubmoduleSpec { generators: vec![e1] }).unwrap();
        let rep = check_exact_sd(&sq.sub, &split, &sq.quotient).unwrap();
        assert!(rep.weights_additive && rep.strict && rep.middle_sd);

        let e2 = SeriesMatrix::from_constants(&f, &[vec![FqElem::ZERO], vec![FqElem::ONE]]);
        assert_eq!(sub_quotient(&m, &SubmoduleSpec { generators: vec![e2] }).unwrap_err(), Error::NotStable);
        let ue1 = SeriesMatrix::diagonal_powers(&f, &[1, 0]).submatrix(0..2, 0..1);
        assert_eq!(sub_quotient(&m, &SubmoduleSpec { generators: vec![ue1] }).unwrap_err(), Error::NotSaturated);
    }

    #[test]
    fn twist_keeps_weights() {
        let f = FqField::prime(7).unwrap();
        let m = module(&f, &[&[&[&[(2, 3)]]]], 20);
        let t = twist_unramified(&m, f.from_int(2)).unwrap();
        assert_eq!(weights(&t).unwrap(), weights(&m).unwrap());
        assert_eq!(twist_unramified(&m, FqElem::ZERO).unwrap_err(), Error::ZeroScalar);
    }

    #[test]
    fn stable_lines_of_triangular_module() {
        let f = FqField::prime(3).unwrap();
        let m = module(&f, &[&[&[&[(1, 1)], &[(0, 1)]], &[&[], &[(0, 1)]]]], 20);
        let lines = find_stable_lines(&m, 1000).unwrap();
        assert!(!lines.is_empty());
        for s in &lines {
            assert!(sub_quotient(&m, s).is_ok());
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let f = FqField::prime(3).unwrap();
        let a = SeriesMatrix::identity(&f, 2);
        assert!(matches!(BKModule::new(&f, 2, vec![a.clone(), a.clone()]), Err(Error::FieldTooSmall { .. })));
        let f9 = FqField::new(3, 2).unwrap();
        assert!(BKModule::new(&f9, 2, vec![SeriesMatrix::identity(&f9, 2), SeriesMatrix::identity(&f9, 2)]).is_ok());
        let empty = BKModule::new(&f, 1, vec![SeriesMatrix::identity(&f, 0)]).unwrap();
        assert!(is_strongly_divisible(&empty).unwrap().strongly_divisible);
    }
}
