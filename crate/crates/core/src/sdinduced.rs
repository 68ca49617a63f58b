//! Submodules `M ⊆ f_*N` of an induced rank-one module with `M[1/u] =
//! (f_*N)[1/u]`: explicit strong-divisibility conditions, the set `X`, and the
//! weights and inertial character they produce.
//!
//! Embeddings of `l` are indexed `θ = 0 .. f_l`; `θ` lives in component
//! `θ mod f_k` at position `θ / f_k`. Frobenius sends `e_{θ+1}` to
//! `u^{r_θ} e_θ`.

use std::collections::BTreeSet;

use crate::algebra::{FqElem, FqField, Series};
use crate::bkmod::{mod_u_filtration, weights, BKModule, WeightProfile};
use crate::error::{Error, Result};
use crate::induct::{character_of_rank_one, induce, RankOneData, UnramifiedExtension};
use crate::inert::{inert_member, is_induction_irreducible, InertDescription, TameCharacter, WeightTuple, Witness};
use crate::lattices::{Lattice, SeriesMatrix};
use crate::linalg::{FMat, Subspace};

/// `f_*N` for `phi_N(1) = sum_θ u^{r_θ} e_θ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedAmbient {
    field: FqField,
    ext: UnramifiedExtension,
    exponents: Vec<i64>,
}

impl InducedAmbient {
    pub fn new(field: &FqField, ext: UnramifiedExtension, exponents: Vec<i64>) -> Result<Self> {
        if exponents.len() != ext.f_l() {
            return Err(Error::DimensionMismatch(format!("{} exponents for f_l = {}", exponents.len(), ext.f_l())));
        }
        if !field.degree().is_multiple_of(ext.f_l()) {
            return Err(Error::FieldTooSmall { f: ext.f_l(), m: field.degree() });
        }
        let p = field.p() as i64;
        if let Some(r) = exponents.iter().find(|r| !(0..=p).contains(*r)) {
            return Err(Error::InvalidInput(format!("exponent {r} outside [0, {p}]")));
        }
        Ok(InducedAmbient { field: field.clone(), ext, exponents })
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    pub fn extension(&self) -> &UnramifiedExtension {
        &self.ext
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    /// Rank of each component, `[l : k]`.
    pub fn rank(&self) -> usize {
        self.ext.degree()
    }

    pub fn num_embeddings(&self) -> usize {
        self.ext.f_l()
    }

    pub fn theta(&self, component: usize, position: usize) -> usize {
        component + position * self.ext.f_k()
    }

    pub fn component(&self, theta: usize) -> usize {
        theta % self.ext.f_k()
    }

    pub fn position(&self, theta: usize) -> usize {
        theta / self.ext.f_k()
    }

    pub fn succ(&self, theta: usize) -> usize {
        (theta + 1) % self.ext.f_l()
    }

    pub fn module(&self) -> Result<BKModule> {
        let n = RankOneData { x: FqElem::ONE, exponents: self.exponents.clone() }.to_module(&self.field)?;
        induce(&self.ext, &n)
    }

    pub fn character(&self) -> Result<TameCharacter> {
        character_of_rank_one(&self.field, &RankOneData { x: FqElem::ONE, exponents: self.exponents.clone() })
    }

    pub fn is_irreducible(&self) -> Result<bool> {
        is_induction_irreducible(&self.character()?, self.ext.f_k())
    }
}

#[derive(Clone, Debug)]
pub struct InducedSubmodule {
    ambient: InducedAmbient,
    lattices: Vec<Lattice>,
}

impl InducedSubmodule {
    /// `generators[t]` spans `M_t` inside component `t` of the ambient.
    pub fn new(ambient: &InducedAmbient, generators: &[SeriesMatrix]) -> Result<Self> {
        let d = ambient.rank();
        if generators.len() != ambient.ext.f_k() {
            return Err(Error::DimensionMismatch("one generator matrix per component".into()));
        }
        let mut lattices = Vec::new();
        for g in generators {
            if g.rows() != d || !g.is_integral() {
                return Err(Error::InvalidInput("generators must be integral vectors of the ambient".into()));
            }
            let l = Lattice::from_generators(g)?;
            if !l.is_full_rank() {
                return Err(Error::InvalidInput("submodule must have full rank".into()));
            }
            lattices.push(l);
        }
        Ok(InducedSubmodule { ambient: ambient.clone(), lattices })
    }

    /// `M = V + u f_*N` with `V` spanned by `vectors` (indexed by θ). Each
    /// vector is split into its components.
    pub fn from_constant_vectors(ambient: &InducedAmbient, vectors: &[Vec<FqElem>], precision: i64) -> Result<Self> {
        let f = &ambient.field;
        let (fk, d) = (ambient.ext.f_k(), ambient.rank());
        let mut cols: Vec<Vec<Vec<Series>>> = vec![Vec::new(); fk];
        for v in vectors {
            if v.len() != ambient.num_embeddings() {
                return Err(Error::DimensionMismatch("constant vectors are indexed by embeddings of l".into()));
            }
            for (t, comp) in cols.iter_mut().enumerate() {
                let col: Vec<Series> = (0..d).map(|b| Series::constant(f, v[ambient.theta(t, b)], precision)).collect();
                if col.iter().any(|s| !s.is_zero()) {
                    comp.push(col);
                }
            }
        }
        for comp in cols.iter_mut() {
            for b in 0..d {
                comp.push((0..d).map(|i| Series::monomial(f, if i == b { FqElem::ONE } else { FqElem::ZERO }, 1, precision)).collect());
            }
        }
        let gens: Vec<SeriesMatrix> = cols.iter().map(|c| SeriesMatrix::from_columns(f, d, c)).collect();
        InducedSubmodule::new(ambient, &gens)
    }

    /// `M = f_*N`.
    pub fn whole(ambient: &InducedAmbient, precision: i64) -> Result<Self> {
        let units: Vec<Vec<FqElem>> = (0..ambient.num_embeddings()).map(|t| unit(ambient.num_embeddings(), t)).collect();
        InducedSubmodule::from_constant_vectors(ambient, &units, precision)
    }

    /// `M = u f_*N`.
    pub fn scaled(ambient: &InducedAmbient, precision: i64) -> Result<Self> {
        InducedSubmodule::from_constant_vectors(ambient, &[], precision)
    }

    pub fn ambient(&self) -> &InducedAmbient {
        &self.ambient
    }

    pub fn lattices(&self) -> &[Lattice] {
        &self.lattices
    }

    /// Constant vectors `sum α_θ e_θ` lying in `M`, as a subspace of `F^{f_l}`.
    pub fn constant_space(&self) -> Result<Subspace> {
        let a = &self.ambient;
        let f = &a.field;
        let (fl, d) = (a.num_embeddings(), a.rank());
        let mut basis = Vec::new();
        for (t, l) in self.lattices.iter().enumerate() {
            // α ∈ M_t iff H^{-1} α has no negative powers of u
            let hinv = l.basis().inverse()?;
            let lowest = hinv.min_valuation().unwrap_or(0).min(0);
            let mut rows = Vec::new();
            for i in 0..d {
                for e in lowest..0 {
                    rows.push((0..d).map(|j| hinv.get(i, j).coeff(e)).collect::<Result<Vec<_>>>()?);
                }
            }
            let local = if rows.is_empty() { full_basis(d) } else { FMat::from_rows(d, &rows).kernel(f) };
            for v in local {
                let mut g = vec![FqElem::ZERO; fl];
                for (b, x) in v.into_iter().enumerate() {
                    g[a.theta(t, b)] = x;
                }
                basis.push(g);
            }
        }
        Ok(Subspace::span(f, fl, &basis))
    }

    /// Smallest `δ_θ` with `u^{δ_θ} e_θ ∈ M`.
    pub fn deltas(&self) -> Vec<i64> {
        let a = &self.ambient;
        (0..a.num_embeddings())
            .map(|theta| {
                let l = &self.lattices[a.component(theta)];
                (0..)
                    .find(|&k| {
                        let v: Vec<Series> = (0..a.rank())
                            .map(|b| {
                                Series::monomial(
                                    &a.field,
                                    if b == a.position(theta) { FqElem::ONE } else { FqElem::ZERO },
                                    k,
                                    crate::algebra::EXACT,
                                )
                            })
                            .collect();
                        l.contains(&v)
                    })
                    .expect("M has full rank")
            })
            .collect()
    }
}

fn unit(n: usize, i: usize) -> Vec<FqElem> {
    let mut v = vec![FqElem::ZERO; n];
    v[i] = FqElem::ONE;
    v
}

fn full_basis(n: usize) -> Vec<Vec<FqElem>> {
    (0..n).map(|i| unit(n, i)).collect()
}

/// `M` as an abstract module: Frobenius in the Hermite bases `H_t`,
/// `A_t = H_t^{-1} Φ_t φ(H_{t+1})`. Fails with `NotStable` unless `φ(M) ⊆ M`.
pub fn extract_module(m: &InducedSubmodule) -> Result<BKModule> {
    let amb = m.ambient.module()?;
    let fk = m.ambient.ext.f_k();
    let mut frob = Vec::with_capacity(fk);
    for t in 0..fk {
        let h = m.lattices[t].basis();
        let next = m.lattices[(t + 1) % fk].basis().substitute_u_p();
        let a = h.inverse()?.mul(amb.frob(t)).mul(&next);
        if !a.is_integral() {
            return Err(Error::NotStable);
        }
        frob.push(a);
    }
    BKModule::new(&m.ambient.field, fk, frob)
}

/// `φ(M) ⊆ M`, and `φ(m) ∈ u^{p+1} M` forces `m ∈ uM`.
pub fn check_condition_1(m: &InducedSubmodule) -> Result<bool> {
    let module = match extract_module(m) {
        Ok(x) => x,
        Err(Error::NotStable) => return Ok(false),
        Err(e) => return Err(e),
    };
    let p = module.p() as i64;
    for j in 0..module.residue_degree() {
        if mod_u_filtration(&module, j)?.dim_at(p + 1) != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Residue class of `r` modulo `p`, with `0` and `p` together.
fn residue_class(r: i64, p: i64) -> i64 {
    r.rem_euclid(p)
}

/// The constant vectors in `M` are stable under projection onto each class
/// `{θ : r_θ ≡ c mod p}`.
pub fn check_condition_2(m: &InducedSubmodule) -> Result<bool> {
    let f = &m.ambient.field;
    let p = f.p() as i64;
    let v = m.constant_space()?;
    let classes: BTreeSet<i64> = m.ambient.exponents.iter().map(|&r| residue_class(r, p)).collect();
    for b in v.basis() {
        for &c in &classes {
            let proj: Vec<FqElem> =
                b.iter().zip(&m.ambient.exponents).map(|(&x, &r)| if residue_class(r, p) == c { x } else { FqElem::ZERO }).collect();
            if !v.contains(f, &proj) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Both explicit conditions; only meaningful when the ambient is irreducible.
pub fn is_sd_via_explicit(m: &InducedSubmodule) -> Result<bool> {
    if !m.ambient.is_irreducible()? {
        return Err(Error::AmbientReducible);
    }
    Ok(check_condition_1(m)? && check_condition_2(m)?)
}

/// `X` for a basepoint `λ`, with the normalised vector `e_θ + sum α_κ e_κ`
/// for each `θ ∉ X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XSet {
    pub lambda: usize,
    pub members: BTreeSet<usize>,
    /// `(θ, vector)` for `θ ∉ X`.
    pub vectors: Vec<(usize, Vec<FqElem>)>,
}

impl XSet {
    pub fn contains(&self, theta: usize) -> bool {
        self.members.contains(&theta)
    }

    /// `s_θ`.
    pub fn indicator(&self, f_l: usize) -> Vec<i64> {
        (0..f_l).map(|t| self.contains(t) as i64).collect()
    }
}

/// Position of `θ` in the order `λ+1 < λ+2 < .. < λ`.
fn order_key(theta: usize, lambda: usize, f_l: usize) -> usize {
    (theta + 2 * f_l - lambda - 1) % f_l
}

pub fn build_x(m: &InducedSubmodule, lambda: usize) -> Result<XSet> {
    let f = &m.ambient.field;
    let fl = m.ambient.num_embeddings();
    let v = m.constant_space()?;
    // columns sorted from the largest embedding down, so echelon pivots are
    // the leading terms
    let mut order: Vec<usize> = (0..fl).collect();
    order.sort_by_key(|&t| std::cmp::Reverse(order_key(t, lambda, fl)));
    let rows: Vec<Vec<FqElem>> = v.basis().iter().map(|b| order.iter().map(|&t| b[t]).collect()).collect();
    let mut mat = FMat::from_rows(fl, &rows);
    let pivots = mat.rref(f);
    let mut members: BTreeSet<usize> = (0..fl).collect();
    let mut vectors = Vec::new();
    for (i, &pc) in pivots.iter().enumerate() {
        let theta = order[pc];
        members.remove(&theta);
        let mut vec = vec![FqElem::ZERO; fl];
        for (c, &t) in order.iter().enumerate() {
            vec[t] = mat.get(i, c);
        }
        vectors.push((theta, vec));
    }
    vectors.sort_by_key(|x| x.0);
    Ok(XSet { lambda, members, vectors })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaChoice {
    Valid(XSet),
    /// `X` is empty or everything for every basepoint.
    AllTrivial(XSet),
}

impl LambdaChoice {
    pub fn x_set(&self) -> &XSet {
        match self {
            LambdaChoice::Valid(x) | LambdaChoice::AllTrivial(x) => x,
        }
    }
}

/// Which of the three basepoint clauses fail for `x`.
pub fn lambda_clause_failures(m: &InducedSubmodule, x: &XSet) -> Result<Vec<u8>> {
    let a = &m.ambient;
    let fl = a.num_embeddings();
    let v = m.constant_space()?;
    let mut failed = BTreeSet::new();
    for theta in 0..fl {
        let next = a.succ(theta);
        let r = a.exponents[theta];
        let (here, there) = (x.contains(theta), x.contains(next));
        if here && !there && r <= 0 {
            failed.insert(1);
        }
        if !here && there && r != 0 {
            failed.insert(2);
        }
        if here && !v.contains(&a.field, &unit(fl, next)) && r > 1 {
            failed.insert(3);
        }
    }
    Ok(failed.into_iter().collect())
}

/// A basepoint satisfying all three clauses, scanning `λ = 0 .. f_l`.
pub fn choose_lambda(m: &InducedSubmodule) -> Result<LambdaChoice> {
    let fl = m.ambient.num_embeddings();
    let dim = m.constant_space()?.dim();
    if dim == 0 || dim == fl {
        return Ok(LambdaChoice::AllTrivial(build_x(m, 0)?));
    }
    for lambda in 0..fl {
        let x = build_x(m, lambda)?;
        if lambda_clause_failures(m, &x)?.is_empty() {
            return Ok(LambdaChoice::Valid(x));
        }
    }
    Err(Error::NoValidLambda)
}

/// `r̃_θ = r_θ + p s_{θ+1} - s_θ`.
pub fn adjusted_exponents(ambient: &InducedAmbient, x: &XSet) -> Vec<i64> {
    let p = ambient.field.p() as i64;
    let s = x.indicator(ambient.num_embeddings());
    (0..ambient.num_embeddings()).map(|t| ambient.exponents[t] + p * s[ambient.succ(t)] - s[t]).collect()
}

/// Weights predicted by `X`: `{r̃_θ : θ|_k = τ}`.
pub fn adapted_weights(m: &InducedSubmodule, x: &XSet) -> WeightProfile {
    let a = &m.ambient;
    let rt = adjusted_exponents(a, x);
    let mut out = vec![Vec::new(); a.ext.f_k()];
    for (theta, r) in rt.into_iter().enumerate() {
        out[a.component(theta)].push(r);
    }
    for w in &mut out {
        w.sort();
    }
    WeightProfile(out)
}

#[derive(Clone, Debug)]
pub struct InertialData {
    pub x_set: XSet,
    pub adjusted: Vec<i64>,
    pub character: TameCharacter,
    pub description: InertDescription,
    pub predicted: WeightProfile,
    pub computed: WeightProfile,
    /// Witness that the computed weights lie in the inertial weight set.
    pub membership: Option<Witness>,
}

impl InertialData {
    pub fn consistent(&self) -> bool {
        self.predicted == self.computed && self.membership.is_some()
    }
}

/// Character `prod ω_θ^{-r̃_θ}` of an SD submodule, with its predicted and
/// directly computed weights.
pub fn inertial_data(m: &InducedSubmodule) -> Result<InertialData> {
    let a = &m.ambient;
    let choice = choose_lambda(m)?;
    let x = choice.x_set().clone();
    let adjusted = adjusted_exponents(a, &x);
    let character = character_of_rank_one(&a.field, &RankOneData { x: FqElem::ONE, exponents: adjusted.clone() })?;
    let description = InertDescription::new(a.field.p(), a.ext.f_k(), vec![character.clone()])?;
    let predicted = adapted_weights(m, &x);
    let computed = weights(&extract_module(m)?)?;
    let membership = inert_member(&description, &WeightTuple::new(computed.0.clone()), None)?;
    Ok(InertialData { x_set: x, adjusted, character, description, predicted, computed, membership })
}

/// Shortest sums `e_ι + sum_{0<j≤I} α_j e_{ι+j}` in `M`, one per `ι` that
/// admits one of the minimal length, as full vectors.
pub fn minimal_sums(m: &InducedSubmodule) -> Result<Vec<(usize, Vec<FqElem>)>> {
    let f = &m.ambient.field;
    let fl = m.ambient.num_embeddings();
    let v = m.constant_space()?;
    if v.dim() == 0 {
        return Ok(Vec::new());
    }
    for len in 0..fl {
        let mut found = Vec::new();
        for iota in 0..fl {
            let support: Vec<usize> = (0..=len).map(|j| (iota + j) % fl).collect();
            // vectors of V vanishing off the support
            let outside: Vec<usize> = (0..fl).filter(|t| !support.contains(t)).collect();
            let rows: Vec<Vec<FqElem>> = outside.iter().map(|&t| v.basis().iter().map(|b| b[t]).collect()).collect();
            let combos = if rows.is_empty() { full_basis(v.dim()) } else { FMat::from_rows(v.dim(), &rows).kernel(f) };
            let cands: Vec<Vec<FqElem>> = combos
                .iter()
                .map(|c| (0..fl).map(|t| c.iter().zip(v.basis()).fold(FqElem::ZERO, |acc, (&ci, b)| f.add(acc, f.mul(ci, b[t])))).collect())
                .collect();
            if let Some(w) = cands.iter().find(|w| !w[iota].is_zero()) {
                let li = f.inv(w[iota])?;
                found.push((iota, w.iter().map(|&x| f.mul(x, li)).collect()));
            }
        }
        if !found.is_empty() {
            return Ok(found);
        }
    }
    Ok(Vec::new())
}

/// `f_k = 1`, `f_l = 5`, `r = (0, n, 0, n, x)` and `M` spanned by `e_4`,
/// `e_3 + e_1`, `e_2`, `u e_1`, `e_0`, over `F_{p^5}`.
pub fn worked_example(p: u32, n: i64, x: i64, precision: Option<i64>) -> Result<InducedSubmodule> {
    if !(1..=p as i64).contains(&n) || !(0..=p as i64).contains(&x) {
        return Err(Error::InvalidInput(format!("need 1 <= n <= {p} and 0 <= x <= {p}")));
    }
    let field = FqField::new(p, 5)?;
    let ambient = InducedAmbient::new(&field, UnramifiedExtension::new(1, 5)?, vec![0, n, 0, n, x])?;
    let e = |ts: &[usize]| {
        let mut v = vec![FqElem::ZERO; 5];
        for &t in ts {
            v[t] = FqElem::ONE;
        }
        v
    };
    let prec = precision.unwrap_or_else(|| BKModule::default_precision(p, 5));
    InducedSubmodule::from_constant_vectors(&ambient, &[e(&[4]), e(&[3, 1]), e(&[2]), e(&[0])], prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bkmod::is_strongly_divisible;

    fn ambient(p: u32, m: usize, f_k: usize, rs: &[i64]) -> InducedAmbient {
        let field = FqField::new(p, m).unwrap();
        InducedAmbient::new(&field, UnramifiedExtension::new(f_k, rs.len()).unwrap(), rs.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_weights() {
        let m = worked_example(5, 2, 3, None).unwrap();
        assert!(m.ambient().is_irreducible().unwrap());
        assert!(check_condition_1(&m).unwrap());
        assert!(check_condition_2(&m).unwrap());
        let module = extract_module(&m).unwrap();
        assert_eq!(weights(&module).unwrap().0, vec![vec![0, 1, 2, 3, 5]]);
        assert!(is_strongly_divisible(&module).unwrap().strongly_divisible);
        let data = inertial_data(&m).unwrap();
        assert!(data.consistent());
    }

    #[test]
    fn worked_example_x_set() {
        let m = worked_example(5, 2, 3, None).unwrap();
        let x = build_x(&m, 0).unwrap();
        assert_eq!(x.members, BTreeSet::from([1]));
        assert!(lambda_clause_failures(&m, &x).unwrap().is_empty());
        // with λ = 1 the embedding 1 is largest, so e_3 + e_1 leads with e_1
        assert_eq!(build_x(&m, 1).unwrap().members, BTreeSet::from([3]));
        let v3 = &x.vectors.iter().find(|v| v.0 == 3).unwrap().1;
        let one = FqElem::ONE;
        assert_eq!(v3, &vec![FqElem::ZERO, one, FqElem::ZERO, one, FqElem::ZERO]);
    }

    #[test]
    fn corrupted_example_fails_condition_2() {
        let base = worked_example(5, 2, 3, None).unwrap();
        let e = |ts: &[usize]| {
            let mut v = vec![FqElem::ZERO; 5];
            for &t in ts {
                v[t] = FqElem::ONE;
            }
            v
        };
        let bad = InducedSubmodule::from_constant_vectors(base.ambient(), &[e(&[4]), e(&[3, 0]), e(&[2])], 40).unwrap();
        assert!(!check_condition_2(&bad).unwrap());
    }

    #[test]
    fn whole_and_scaled() {
        let a = ambient(3, 3, 1, &[1, 2, 3]);
        let prec = 30;
        let whole = InducedSubmodule::whole(&a, prec).unwrap();
        assert!(is_sd_via_explicit(&whole).unwrap());
        assert!(build_x(&whole, 0).unwrap().members.is_empty());
        assert!(matches!(choose_lambda(&whole).unwrap(), LambdaChoice::AllTrivial(_)));
        assert_eq!(weights(&extract_module(&whole).unwrap()).unwrap().0, vec![vec![1, 2, 3]]);

        let b = ambient(3, 3, 1, &[0, 1, 0]);
        let scaled = InducedSubmodule::scaled(&b, prec).unwrap();
        assert_eq!(build_x(&scaled, 0).unwrap().members.len(), 3);
        assert!(check_condition_1(&scaled).unwrap());
        let x = choose_lambda(&scaled).unwrap();
        // r + p - 1
        assert_eq!(adapted_weights(&scaled, x.x_set()).0, vec![vec![2, 2, 3]]);
        assert_eq!(weights(&extract_module(&scaled).unwrap()).unwrap().0, vec![vec![2, 2, 3]]);
    }

    #[test]
    fn reducible_ambient_is_refused() {
        let a = ambient(3, 2, 1, &[1, 1]);
        let m = InducedSubmodule::whole(&a, 20).unwrap();
        assert_eq!(is_sd_via_explicit(&m).unwrap_err(), Error::AmbientReducible);
    }

    #[test]
    fn two_components() {
        // f_k = 2, f_l = 4; M_0 contains e_0 + e_2 only
        let a = ambient(3, 4, 2, &[1, 2, 1, 0]);
        let one = FqElem::ONE;
        let z = FqElem::ZERO;
        let m = InducedSubmodule::from_constant_vectors(&a, &[vec![one, z, one, z], vec![z, one, z, z], vec![z, z, z, one]], 30).unwrap();
        let v = m.constant_space().unwrap();
        assert_eq!(v.dim(), 3);
        assert_eq!(m.deltas(), vec![1, 0, 1, 0]);
        let module = extract_module(&m).unwrap();
        assert_eq!(module.residue_degree(), 2);
        assert_eq!(module.rank(), 2);
    }
}
