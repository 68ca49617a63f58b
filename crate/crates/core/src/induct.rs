//! Restriction and induction along an unramified extension `l/k`, and the
//! normal form of rank-one modules.
//!
//! Embeddings of `l` are indexed by `i mod f_l` (`theta_i = theta_0 o phi^i`);
//! `theta_i` restricts to `tau_{i mod f_k}`.

use crate::algebra::{FqElem, FqField, Series, EXACT};
use crate::bkmod::BKModule;
use crate::error::{Error, Result};
use crate::inert::TameCharacter;
use crate::lattices::SeriesMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnramifiedExtension {
    f_k: usize,
    f_l: usize,
}

impl UnramifiedExtension {
    pub fn new(f_k: usize, f_l: usize) -> Result<Self> {
        if f_k == 0 || f_l == 0 || !f_l.is_multiple_of(f_k) {
            return Err(Error::IncompatibleDegrees { f_k, f_l });
        }
        Ok(UnramifiedExtension { f_k, f_l })
    }

    pub fn f_k(&self) -> usize {
        self.f_k
    }

    pub fn f_l(&self) -> usize {
        self.f_l
    }

    /// `[l : k]`.
    pub fn degree(&self) -> usize {
        self.f_l / self.f_k
    }

    /// Index of `theta_i|_k`.
    pub fn restrict_index(&self, i: usize) -> usize {
        i % self.f_k
    }
}

/// `f^* M`: component `i` is a copy of component `i mod f_k`.
pub fn restrict(ext: &UnramifiedExtension, m: &BKModule) -> Result<BKModule> {
    if m.residue_degree() != ext.f_k {
        return Err(Error::IncompatibleDegrees { f_k: m.residue_degree(), f_l: ext.f_l });
    }
    let frob = (0..ext.f_l).map(|i| m.frob(ext.restrict_index(i)).clone()).collect();
    BKModule::new(m.field(), ext.f_l, frob)
}

/// `f_* N`: component `t` is `⊕_b N_{theta_{t + b f_k}}`, blocks in increasing
/// `b`. Frobenius is block diagonal except on the last component, where it
/// shifts block `b + 1` into block `b`.
pub fn induce(ext: &UnramifiedExtension, n: &BKModule) -> Result<BKModule> {
    if n.residue_degree() != ext.f_l {
        return Err(Error::IncompatibleDegrees { f_k: ext.f_k, f_l: n.residue_degree() });
    }
    let field = n.field();
    let r = n.rank();
    let d = ext.degree();
    let mut frob = Vec::with_capacity(ext.f_k);
    for t in 0..ext.f_k {
        let mut a = SeriesMatrix::zero(field, r * d, r * d, EXACT);
        for b in 0..d {
            let col_block = if t + 1 == ext.f_k { (b + 1) % d } else { b };
            let src = n.frob(t + b * ext.f_k);
            for i in 0..r {
                for j in 0..r {
                    a.set(b * r + i, col_block * r + j, src.get(i, j).clone());
                }
            }
        }
        frob.push(a);
    }
    BKModule::new(field, ext.f_k, frob)
}

/// Rank-one module with `phi(e) = x u^{r_0} e` on component 0 and
/// `u^{r_j}` elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneData {
    pub x: FqElem,
    pub exponents: Vec<i64>,
}

impl RankOneData {
    pub fn to_module(&self, field: &FqField) -> Result<BKModule> {
        if self.x.is_zero() {
            return Err(Error::ZeroScalar);
        }
        let frob = self
            .exponents
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let c = if j == 0 { self.x } else { FqElem::ONE };
                SeriesMatrix::from_fn(field, 1, 1, |_, _| Series::monomial(field, c, r, EXACT))
            })
            .collect();
        BKModule::new(field, self.exponents.len(), frob)
    }
}

/// `(x, (r_j))` with `r_j = v_u(A_j)` and `x` the product of the leading
/// coefficients, which is invariant under change of basis.
pub fn rank_one_normal_form(m: &BKModule) -> Result<RankOneData> {
    if m.rank() != 1 {
        return Err(Error::InvalidModule(format!("expected rank one, got rank {}", m.rank())));
    }
    let field = m.field();
    let mut x = FqElem::ONE;
    let mut exponents = Vec::with_capacity(m.residue_degree());
    for a in m.frobs() {
        let s = a.get(0, 0);
        let r = s.valuation().ok_or(Error::InsufficientPrecision { needed: s.precision() + 1, available: s.precision() })?;
        x = field.mul(x, s.leading().expect("nonzero series"));
        exponents.push(r);
    }
    Ok(RankOneData { x, exponents })
}

/// `psi_x prod_theta omega_theta^{-r_theta} = psi_x omega_{theta_0}^{-e}` with
/// `e = sum_i r_i p^i mod p^f - 1`.
pub fn character_of_rank_one(field: &FqField, d: &RankOneData) -> Result<TameCharacter> {
    let p = field.p();
    let modulus = crate::inert::level_modulus(p, d.exponents.len())?;
    let mut e: i128 = 0;
    let mut pw: i128 = 1;
    for &r in &d.exponents {
        e = (e + (r as i128).rem_euclid(modulus) * pw).rem_euclid(modulus);
        pw = pw * p as i128 % modulus;
    }
    let mut ch = TameCharacter::new(p, d.exponents.len(), e)?;
    ch.unramified = field.coords(d.x);
    Ok(ch)
}
