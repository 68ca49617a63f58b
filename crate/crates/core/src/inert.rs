//! Tame characters of inertia and the sets of weights they predict.
//!
//! A character of level `f` is `omega_{theta_0}^{-e}` with `e` taken modulo
//! `p^f - 1`. A weight family `(r_0, .., r_{f-1})` realises it when
//! `sum_i r_i p^i ≡ e`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// `p^f - 1`, refusing sizes where the arithmetic would overflow.
pub fn level_modulus(p: u32, f: usize) -> Result<i128> {
    let mut m: i128 = 1;
    for _ in 0..f {
        m = m
            .checked_mul(p as i128)
            .filter(|&x| x < 1 << 100)
            .ok_or_else(|| Error::InvalidInput(format!("level {f} is too large for p = {p}")))?;
    }
    Ok(m - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TameCharacter {
    pub p: u32,
    pub level: usize,
    /// In `[0, p^level - 2]`.
    pub exponent: i128,
    /// Coordinates of the unramified scalar `x`; `[1]` when trivial.
    pub unramified: Vec<u32>,
}

impl TameCharacter {
    pub fn new(p: u32, level: usize, exponent: i128) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidInput("level must be positive".into()));
        }
        let m = level_modulus(p, level)?;
        Ok(TameCharacter { p, level, exponent: exponent.rem_euclid(m), unramified: vec![1] })
    }

    pub fn modulus(&self) -> i128 {
        level_modulus(self.p, self.level).expect("checked at construction")
    }
}

impl fmt::Display for TameCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "omega_{}^-{} (mod {})", self.level, self.exponent, self.modulus())
    }
}

/// `{e p^{f_k j} mod p^f - 1}` for `j = 0 .. f/f_k`, first occurrences only.
pub fn character_conjugates(chi: &TameCharacter, f_k: usize) -> Result<Vec<i128>> {
    if f_k == 0 || !chi.level.is_multiple_of(f_k) {
        return Err(Error::IncompatibleDegrees { f_k, f_l: chi.level });
    }
    let m = chi.modulus();
    let step = level_modulus(chi.p, f_k)? + 1;
    let mut out = Vec::new();
    let mut e = chi.exponent;
    for _ in 0..chi.level / f_k {
        if !out.contains(&e) {
            out.push(e);
        }
        e = e * (step % m.max(1)) % m.max(1);
    }
    Ok(out)
}

/// The induction from level `chi.level` down to `f_k` is irreducible iff the
/// conjugates of `chi` are pairwise distinct.
pub fn is_induction_irreducible(chi: &TameCharacter, f_k: usize) -> Result<bool> {
    Ok(character_conjugates(chi, f_k)?.len() == chi.level / f_k)
}

/// Inertial data of `⊕_zeta Ind zeta` over a base of degree `f_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InertDescription {
    pub p: u32,
    pub f_k: usize,
    pub summands: Vec<TameCharacter>,
}

impl InertDescription {
    pub fn new(p: u32, f_k: usize, summands: Vec<TameCharacter>) -> Result<Self> {
        if f_k == 0 {
            return Err(Error::InvalidInput("f_k must be positive".into()));
        }
        for s in &summands {
            if s.p != p {
                return Err(Error::InvalidInput("summands over different primes".into()));
            }
            if s.level % f_k != 0 {
                return Err(Error::IncompatibleDegrees { f_k, f_l: s.level });
            }
        }
        Ok(InertDescription { p, f_k, summands })
    }

    pub fn dimension(&self) -> usize {
        self.summands.iter().map(|s| s.level / self.f_k).sum()
    }

    /// Summands whose induction is reducible; these are accepted but suspect.
    pub fn warnings(&self) -> Vec<String> {
        self.summands
            .iter()
            .enumerate()
            .filter(|(_, s)| !is_induction_irreducible(s, self.f_k).unwrap_or(false))
            .map(|(i, s)| format!("summand {i} ({s}) induces to a reducible representation"))
            .collect()
    }
}

/// One sorted multiset per embedding of `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightTuple(pub Vec<Vec<i64>>);

impl WeightTuple {
    pub fn new(mut parts: Vec<Vec<i64>>) -> Self {
        for v in &mut parts {
            v.sort();
        }
        WeightTuple(parts)
    }

    pub fn shifted(&self, c: i64) -> Self {
        WeightTuple(self.0.iter().map(|v| v.iter().map(|x| x + c).collect()).collect())
    }
}

impl fmt::Display for WeightTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v:?}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// All `r ∈ [lo, hi]^f` with `sum r_i p^i ≡ e`, by meeting in the middle.
fn summand_solutions(chi: &TameCharacter, lo: i64, hi: i64, budget: u128) -> Result<Vec<Vec<i64>>> {
    let f = chi.level;
    let m = chi.modulus();
    let width = (hi - lo + 1) as u128;
    let h = f / 2;
    let half_cost = width.checked_pow((f - h) as u32).unwrap_or(u128::MAX);
    if half_cost > budget {
        return Err(Error::BoxTooLarge(half_cost));
    }
    let powers: Vec<i128> = (0..f)
        .scan(1i128, |acc, _| {
            let v = *acc;
            *acc = *acc * chi.p as i128 % m;
            Some(v)
        })
        .collect();
    let block = |from: usize, to: usize| -> Vec<(i128, Vec<i64>)> {
        let mut out = vec![(0i128, Vec::new())];
        for &pw in &powers[from..to] {
            let mut next = Vec::with_capacity(out.len() * width as usize);
            for (s, v) in &out {
                for r in lo..=hi {
                    let mut w = v.clone();
                    w.push(r);
                    next.push(((s + (r as i128).rem_euclid(m) * pw) % m, w));
                }
            }
            out = next;
        }
        out
    };
    let left = block(0, h);
    let right = block(h, f);
    let mut by_residue: HashMap<i128, Vec<&Vec<i64>>> = HashMap::new();
    for (s, v) in &left {
        by_residue.entry(*s).or_default().push(v);
    }
    let mut out = Vec::new();
    for (s, w) in &right {
        let need = (chi.exponent - s).rem_euclid(m);
        if let Some(vs) = by_residue.get(&need) {
            for v in vs {
                let mut full = (*v).clone();
                full.extend_from_slice(w);
                out.push(full);
            }
            if out.len() as u128 > budget {
                return Err(Error::BoxTooLarge(out.len() as u128));
            }
        }
    }
    Ok(out)
}

/// `r` grouped by the embedding of `k` each slot restricts to.
fn contribution(r: &[i64], f_k: usize) -> Vec<Vec<i64>> {
    let mut parts = vec![Vec::new(); f_k];
    for (i, &x) in r.iter().enumerate() {
        parts[i % f_k].push(x);
    }
    for v in &mut parts {
        v.sort();
    }
    parts
}

/// Every weight tuple in `[lo, hi]` predicted by `desc`.
pub fn inert_enumerate(desc: &InertDescription, lo: i64, hi: i64, budget: u128) -> Result<BTreeSet<WeightTuple>> {
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty box [{lo}, {hi}]")));
    }
    let mut partial: BTreeSet<Vec<Vec<i64>>> = BTreeSet::from([vec![Vec::new(); desc.f_k]]);
    for chi in &desc.summands {
        let pieces: BTreeSet<Vec<Vec<i64>>> = summand_solutions(chi, lo, hi, budget)?.iter().map(|r| contribution(r, desc.f_k)).collect();
        let cost = partial.len() as u128 * pieces.len() as u128;
        if cost > budget {
            return Err(Error::BoxTooLarge(cost));
        }
        let mut next = BTreeSet::new();
        for acc in &partial {
            for piece in &pieces {
                let merged: Vec<Vec<i64>> = acc
                    .iter()
                    .zip(piece)
                    .map(|(a, b)| {
                        let mut v: Vec<i64> = a.iter().chain(b).copied().collect();
                        v.sort();
                        v
                    })
                    .collect();
                next.insert(merged);
            }
        }
        partial = next;
    }
    Ok(partial.into_iter().map(WeightTuple).collect())
}

/// Per summand, the family `(r_0, .., r_{f-1})` used.
pub type Witness = Vec<Vec<i64>>;

/// Whether `lambda` is predicted by `desc` (optionally inside `[lo, hi]`),
/// with a witness assignment.
pub fn inert_member(desc: &InertDescription, lambda: &WeightTuple, bounds: Option<(i64, i64)>) -> Result<Option<Witness>> {
    let n = desc.dimension();
    if lambda.0.len() != desc.f_k || lambda.0.iter().any(|v| v.len() != n) {
        return Err(Error::SizeMismatch(format!("expected {} multisets of size {n}", desc.f_k)));
    }
    if let Some((lo, hi)) = bounds {
        if lambda.0.iter().flatten().any(|x| !(lo..=hi).contains(x)) {
            return Ok(None);
        }
    }
    let mut remaining: Vec<BTreeMap<i64, usize>> = lambda
        .0
        .iter()
        .map(|v| {
            let mut m = BTreeMap::new();
            for &x in v {
                *m.entry(x).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let mut witness = Vec::new();
    if assign(desc, 0, &mut remaining, &mut witness) {
        Ok(Some(witness))
    } else {
        Ok(None)
    }
}

fn assign(desc: &InertDescription, s: usize, remaining: &mut [BTreeMap<i64, usize>], witness: &mut Witness) -> bool {
    let Some(chi) = desc.summands.get(s) else {
        return true;
    };
    let m = chi.modulus();
    let mut r = Vec::with_capacity(chi.level);
    fill(desc, chi, m, 1, 0, &mut r, s, remaining, witness)
}

#[allow(clippy::too_many_arguments)]
fn fill(
    desc: &InertDescription,
    chi: &TameCharacter,
    m: i128,
    pw: i128,
    acc: i128,
    r: &mut Vec<i64>,
    s: usize,
    remaining: &mut [BTreeMap<i64, usize>],
    witness: &mut Witness,
) -> bool {
    let i = r.len();
    if i == chi.level {
        if acc != chi.exponent {
            return false;
        }
        witness.push(r.clone());
        if assign(desc, s + 1, remaining, witness) {
            return true;
        }
        witness.pop();
        return false;
    }
    let tau = i % desc.f_k;
    let last = i + 1 == chi.level;
    let candidates: Vec<i64> = remaining[tau].iter().filter(|(_, &c)| c > 0).map(|(&x, _)| x).collect();
    for x in candidates {
        let next = (acc + (x as i128).rem_euclid(m) * pw) % m;
        if last && next != chi.exponent {
            continue;
        }
        *remaining[tau].get_mut(&x).expect("candidate present") -= 1;
        r.push(x);
        let ok = fill(desc, chi, m, pw * chi.p as i128 % m.max(1), next, r, s, remaining, witness);
        r.pop();
        *remaining[tau].get_mut(&x).expect("candidate present") += 1;
        if ok {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(p: u32, level: usize, e: i128) -> TameCharacter {
        TameCharacter::new(p, level, e).unwrap()
    }

    fn one_dim(p: u32, e: i128) -> InertDescription {
        InertDescription::new(p, 1, vec![ch(p, 1, e)]).unwrap()
    }

    #[test]
    fn conjugates_and_irreducibility() {
        assert_eq!(character_conjugates(&ch(3, 2, 1), 1).unwrap(), vec![1, 3]);
        assert_eq!(character_conjugates(&ch(3, 2, 0), 1).unwrap(), vec![0]);
        assert!(!is_induction_irreducible(&ch(3, 2, 0), 1).unwrap());
        assert!(is_induction_irreducible(&ch(5, 2, 1), 1).unwrap());
        assert!(is_induction_irreducible(&ch(5, 3, 0), 3).unwrap());
        // e = 4 (p + 1) mod 8 is fixed by e -> 3e
        assert!(!is_induction_irreducible(&ch(3, 2, 4), 1).unwrap());
        assert!(matches!(character_conjugates(&ch(3, 3, 1), 2), Err(Error::IncompatibleDegrees { .. })));
    }

    #[test]
    fn level_one_enumeration() {
        let w = |x: i64| WeightTuple(vec![vec![x]]);
        assert_eq!(inert_enumerate(&one_dim(5, 0), 0, 5, DEFAULT_BUDGET).unwrap(), BTreeSet::from([w(0), w(4)]));
        assert_eq!(inert_enumerate(&one_dim(5, 1), 0, 5, DEFAULT_BUDGET).unwrap(), BTreeSet::from([w(1), w(5)]));
        let empty = InertDescription::new(5, 1, vec![]).unwrap();
        assert_eq!(inert_enumerate(&empty, 0, 5, DEFAULT_BUDGET).unwrap(), BTreeSet::from([WeightTuple(vec![vec![]])]));
    }

    #[test]
    fn cyclotomic_pair_membership() {
        // omega = omega^{-e} with e ≡ -1
        let desc = InertDescription::new(5, 1, vec![ch(5, 1, -1), ch(5, 1, -1)]).unwrap();
        assert!(inert_member(&desc, &WeightTuple(vec![vec![-6, 0]]), None).unwrap().is_none());
        let wit = inert_member(&desc, &WeightTuple(vec![vec![-1, -1]]), None).unwrap().unwrap();
        assert_eq!(wit, vec![vec![-1], vec![-1]]);
        assert!(matches!(inert_member(&desc, &WeightTuple(vec![vec![1]]), None), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn member_agrees_with_enumeration() {
        let desc = InertDescription::new(3, 1, vec![ch(3, 2, 5), ch(3, 1, 1)]).unwrap();
        let all = inert_enumerate(&desc, 0, 3, DEFAULT_BUDGET).unwrap();
        for a in 0..=3 {
            for b in a..=3 {
                for c in b..=3 {
                    let t = WeightTuple(vec![vec![a, b, c]]);
                    assert_eq!(inert_member(&desc, &t, Some((0, 3))).unwrap().is_some(), all.contains(&t), "{t}");
                }
            }
        }
    }

    #[test]
    fn twisting_shifts_weights() {
        let p = 5;
        let chi = ch(p, 2, 7);
        let desc = InertDescription::new(p, 1, vec![chi.clone()]).unwrap();
        let shift = (chi.modulus()) / (p as i128 - 1);
        let twisted = InertDescription::new(p, 1, vec![ch(p, 2, 7 + 2 * shift)]).unwrap();
        for t in inert_enumerate(&desc, 0, 5, DEFAULT_BUDGET).unwrap() {
            assert!(inert_member(&twisted, &t.shifted(2), None).unwrap().is_some());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let desc = InertDescription::new(13, 1, vec![ch(13, 20, 1)]).unwrap();
        assert!(matches!(inert_enumerate(&desc, 0, 13, 1000), Err(Error::BoxTooLarge(_))));
    }
}
