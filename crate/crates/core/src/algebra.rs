//! Finite fields `F_{p^m}`, truncated Laurent series over them, and indexing of
//! embeddings along a Frobenius orbit.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, RngExt};

use crate::error::{Error, Result};

/// Lexicographically smallest monic irreducible polynomials, low degree first.
const DEFAULT_MODULI: &[(u32, usize, &[u32])] = &[
    (2, 1, &[0, 1]),
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 0, 0, 0, 1]),
    (3, 1, &[0, 1]),
    (3, 2, &[1, 0, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 1, 0, 0, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (3, 6, &[2, 1, 0, 0, 0, 0, 1]),
    (5, 1, &[0, 1]),
    (5, 2, &[2, 0, 1]),
    (5, 3, &[1, 1, 0, 1]),
    (5, 4, &[2, 0, 0, 0, 1]),
    (5, 5, &[1, 4, 0, 0, 0, 1]),
    (5, 6, &[2, 1, 0, 0, 0, 0, 1]),
    (7, 1, &[0, 1]),
    (7, 2, &[1, 0, 1]),
    (7, 3, &[2, 0, 0, 1]),
    (7, 4, &[1, 1, 0, 0, 1]),
    (7, 5, &[3, 1, 0, 0, 0, 1]),
    (7, 6, &[2, 0, 0, 0, 0, 0, 1]),
    (11, 1, &[0, 1]),
    (11, 2, &[1, 0, 1]),
    (11, 3, &[4, 1, 0, 1]),
    (11, 4, &[2, 1, 0, 0, 1]),
    (11, 5, &[2, 0, 0, 0, 0, 1]),
    (11, 6, &[2, 1, 0, 0, 0, 0, 1]),
    (13, 1, &[0, 1]),
    (13, 2, &[2, 0, 1]),
    (13, 3, &[2, 0, 0, 1]),
    (13, 4, &[2, 0, 0, 0, 1]),
    (13, 5, &[2, 4, 0, 0, 0, 1]),
    (13, 6, &[2, 0, 0, 0, 0, 0, 1]),
];

/// Log/exp tables are built up to this field size.
const TABLE_LIMIT: u64 = 1 << 20;
/// Addition tables are built up to this field size.
const ADD_TABLE_LIMIT: u64 = 256;

/// An element of `F_{p^m}`, stored as the base-`p` integer `sum c_i p^i` of its
/// coordinates in the polynomial basis `1, t, ..., t^{m-1}`.
///
/// Elements carry no field; arithmetic goes through [`FqField`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem(pub(crate) u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct FieldInner {
    p: u32,
    m: usize,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// The finite field `F_p[t]/(modulus)`. Cheap to clone.
#[derive(Clone)]
pub struct FqField(Arc<FieldInner>);

impl PartialEq for FqField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}
impl Eq for FqField {}

impl fmt::Debug for FqField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.0.p, self.0.m, self.0.modulus)
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

// Dense polynomials over F_p, coefficient vectors low degree first.

fn ptrim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn prem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    ptrim(&mut r);
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while r.len() > df {
        let shift = r.len() - 1 - df;
        let c = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &fi) in f.iter().enumerate() {
            let t = (c as u64 * fi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - t) % p;
        }
        ptrim(&mut r);
    }
    r
}

fn pmul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut r: Vec<u32> = r.into_iter().map(|x| x as u32).collect();
    ptrim(&mut r);
    r
}

fn pgcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    ptrim(&mut a);
    ptrim(&mut b);
    while !b.is_empty() {
        let r = prem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn ppow_mod(base: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
    let mut r = vec![1u32];
    let mut b = prem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            r = prem(&pmul(&r, &b, p), f, p);
        }
        b = prem(&pmul(&b, &b, p), f, p);
        e >>= 1;
    }
    r
}

/// Ben-Or irreducibility test: `f` has no factor of degree `d <= m/2`.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let m = f.len() - 1;
    let x = vec![0u32, 1];
    let mut h = x.clone();
    for _ in 1..=m / 2 {
        h = ppow_mod(&h, p as u64, f, p);
        let mut d = h.clone();
        d.resize(d.len().max(2), 0);
        d[1] = (d[1] + p - 1) % p;
        let g = pgcd(&d, f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

type FieldCache = Mutex<HashMap<(u32, Vec<u32>), FqField>>;

fn field_cache() -> &'static FieldCache {
    static CACHE: OnceLock<FieldCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl FqField {
    /// `F_{p^m}` with the built-in modulus.
    pub fn new(p: u32, m: usize) -> Result<Self> {
        let modulus = DEFAULT_MODULI.iter().find(|(pp, mm, _)| *pp == p && *mm == m).map(|(_, _, c)| c.to_vec());
        match modulus {
            Some(c) => Self::with_modulus(p, c),
            None if !is_prime(p) => Err(Error::NotPrime(p)),
            None => Err(Error::NoDefaultModulus { p, m }),
        }
    }

    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Self::with_modulus(p, vec![0, 1])
    }

    /// `F_p[t]/(modulus)`; `modulus` lists coefficients from the constant term up
    /// and must be monic and irreducible.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if modulus.len() < 2 {
            return Err(Error::BadModulus { m: 0 });
        }
        let m = modulus.len() - 1;
        if modulus[m] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::BadModulus { m });
        }
        let size = (p as u64).checked_pow(m as u32).filter(|&q| q < (1 << 31));
        let Some(q) = size else {
            return Err(Error::FieldTooLarge { p, m });
        };
        let key = (p, modulus.clone());
        if let Some(f) = field_cache().lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::ReducibleModulus { p });
        }
        let mut inner = FieldInner { p, m, q: q as u32, modulus, add: Vec::new(), exp: Vec::new(), log: Vec::new() };
        if q <= ADD_TABLE_LIMIT {
            let mut add = vec![0u32; (q * q) as usize];
            for a in 0..q as u32 {
                for b in 0..q as u32 {
                    add[(a * q as u32 + b) as usize] = digit_add(p, m, a, b);
                }
            }
            inner.add = add;
        }
        if q <= TABLE_LIMIT && q > 2 {
            build_log_tables(&mut inner);
        }
        let field = FqField(Arc::new(inner));
        field_cache().lock().unwrap().insert(key, field.clone());
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> usize {
        self.0.m
    }

    pub fn size(&self) -> u32 {
        self.0.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem::ZERO
    }

    pub fn one(&self) -> FqElem {
        FqElem::ONE
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FqElem {
        FqElem(n.rem_euclid(self.0.p as i64) as u32)
    }

    /// Element with the given coordinates (reduced mod `p`).
    pub fn from_coords(&self, coords: &[i64]) -> Result<FqElem> {
        if coords.len() > self.0.m {
            return Err(Error::InvalidInput(format!("{} coordinates for a field of degree {}", coords.len(), self.0.m)));
        }
        let p = self.0.p as i64;
        let mut idx = 0u32;
        for &c in coords.iter().rev() {
            idx = idx * self.0.p + c.rem_euclid(p) as u32;
        }
        Ok(FqElem(idx))
    }

    /// Coordinates in the basis `1, t, ..., t^{m-1}`.
    pub fn coords(&self, x: FqElem) -> Vec<u32> {
        let mut v = x.0;
        (0..self.0.m)
            .map(|_| {
                let d = v % self.0.p;
                v /= self.0.p;
                d
            })
            .collect()
    }

    /// The element `t` generating the polynomial basis.
    pub fn generator(&self) -> FqElem {
        if self.0.m == 1 {
            // the root of t + c
            FqElem((self.0.p - self.0.modulus[0]) % self.0.p)
        } else {
            FqElem(self.0.p)
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.0.q).map(FqElem)
    }

    pub fn random(&self, rng: &mut impl Rng) -> FqElem {
        FqElem(rng.random_range(0..self.0.q))
    }

    pub fn random_nonzero(&self, rng: &mut impl Rng) -> FqElem {
        FqElem(rng.random_range(1..self.0.q))
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        let i = &self.0;
        if i.m == 1 {
            let s = a.0 + b.0;
            return FqElem(if s >= i.p { s - i.p } else { s });
        }
        if !i.add.is_empty() {
            return FqElem(i.add[(a.0 * i.q + b.0) as usize]);
        }
        FqElem(digit_add(i.p, i.m, a.0, b.0))
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        let i = &self.0;
        if i.m == 1 {
            return FqElem(if a.0 == 0 { 0 } else { i.p - a.0 });
        }
        let mut v = a.0;
        let mut r = 0;
        let mut pw = 1;
        for _ in 0..i.m {
            let d = v % i.p;
            v /= i.p;
            r += ((i.p - d) % i.p) * pw;
            pw *= i.p;
        }
        FqElem(r)
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.0 == 0 || b.0 == 0 {
            return FqElem::ZERO;
        }
        let i = &self.0;
        if i.m == 1 {
            return FqElem((a.0 as u64 * b.0 as u64 % i.p as u64) as u32);
        }
        if !i.exp.is_empty() {
            let s = i.log[a.0 as usize] + i.log[b.0 as usize];
            return FqElem(i.exp[s as usize]);
        }
        let pa = self.coords(a);
        let pb = self.coords(b);
        let r = prem(&pmul(&pa, &pb, i.p), &i.modulus, i.p);
        let ri: Vec<i64> = r.iter().map(|&x| x as i64).collect();
        self.from_coords(&ri).expect("reduced product fits")
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let i = &self.0;
        if i.m == 1 {
            return Ok(FqElem(inv_mod(a.0, i.p)));
        }
        if !i.exp.is_empty() {
            let l = i.log[a.0 as usize];
            return Ok(FqElem(i.exp[((i.q - 1 - l) % (i.q - 1)) as usize]));
        }
        Ok(self.pow(a, i.q as u64 - 2))
    }

    pub fn pow(&self, a: FqElem, mut e: u64) -> FqElem {
        let mut r = FqElem::ONE;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// `x^{p^j}`; negative `j` is taken mod `m`.
    pub fn frobenius(&self, x: FqElem, j: i64) -> FqElem {
        let m = self.0.m as i64;
        let j = j.rem_euclid(m);
        let mut r = x;
        for _ in 0..j {
            r = self.pow(r, self.0.p as u64);
        }
        r
    }

    /// Human-readable form, as a polynomial in `t` when `m > 1`.
    pub fn fmt_elem(&self, x: FqElem) -> String {
        if self.0.m == 1 {
            return x.0.to_string();
        }
        let c = self.coords(x);
        let terms: Vec<String> = c
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &d)| d != 0)
            .map(|(k, &d)| match (k, d) {
                (0, d) => d.to_string(),
                (1, 1) => "t".to_string(),
                (1, d) => format!("{d}t"),
                (k, 1) => format!("t^{k}"),
                (k, d) => format!("{d}t^{k}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

fn digit_add(p: u32, m: usize, a: u32, b: u32) -> u32 {
    let (mut x, mut y) = (a, b);
    let mut r = 0;
    let mut pw = 1;
    for _ in 0..m {
        let d = (x % p + y % p) % p;
        r += d * pw;
        pw *= p;
        x /= p;
        y /= p;
    }
    r
}

fn build_log_tables(inner: &mut FieldInner) {
    let (p, m, q) = (inner.p, inner.m, inner.q);
    let to_coords = |x: u32| -> Vec<u32> {
        let mut v = x;
        let mut c: Vec<u32> = (0..m)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect();
        ptrim(&mut c);
        c
    };
    let to_index = |c: &[u32]| -> u32 { c.iter().rev().fold(0, |acc, &d| acc * p + d) };
    let order = (q - 1) as u64;
    let factors = prime_factors(order);
    let generator = (2..q)
        .find(|&g| {
            let c = to_coords(g);
            factors.iter().all(|&l| ppow_mod(&c, order / l, &inner.modulus, p) != vec![1])
        })
        .expect("multiplicative group is cyclic");
    let gc = to_coords(generator);
    // exp has length 2(q-1) so that log a + log b needs no reduction.
    let mut exp = vec![0u32; 2 * (q as usize - 1)];
    let mut log = vec![0u32; q as usize];
    let mut cur = vec![1u32];
    for k in 0..(q - 1) {
        let idx = to_index(&cur);
        exp[k as usize] = idx;
        exp[(k + q - 1) as usize] = idx;
        log[idx as usize] = k;
        cur = prem(&pmul(&cur, &gc, p), &inner.modulus, p);
    }
    inner.exp = exp;
    inner.log = log;
}

/// Precision value used for data known exactly.
pub const EXACT: i64 = 1 << 40;

fn clamp_prec(prec: i64) -> i64 {
    if prec >= EXACT / 2 {
        EXACT
    } else {
        prec
    }
}

/// A Laurent series `sum_k c_k u^k` over `F_{p^m}`, known modulo `u^precision`.
///
/// Normalised so that `coeffs[0]` is nonzero; a series that vanishes to its
/// precision has no coefficients and lowest exponent equal to the precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    field: FqField,
    val: i64,
    coeffs: Vec<FqElem>,
    prec: i64,
}

impl Series {
    fn normalized(mut self) -> Self {
        self.prec = clamp_prec(self.prec);
        let room = self.prec - self.val;
        if room <= 0 {
            self.coeffs.clear();
        } else if (self.coeffs.len() as i64) > room {
            self.coeffs.truncate(room as usize);
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            None => {
                self.coeffs.clear();
                self.val = self.prec;
            }
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
            }
        }
        self
    }

    /// Zero modulo `u^prec`.
    pub fn zero(field: &FqField, prec: i64) -> Self {
        Series { field: field.clone(), val: prec, coeffs: Vec::new(), prec }.normalized()
    }

    pub fn constant(field: &FqField, c: FqElem, prec: i64) -> Self {
        Self::monomial(field, c, 0, prec)
    }

    pub fn one(field: &FqField, prec: i64) -> Self {
        Self::constant(field, FqElem::ONE, prec)
    }

    /// `c u^e` known modulo `u^prec`.
    pub fn monomial(field: &FqField, c: FqElem, e: i64, prec: i64) -> Self {
        Series { field: field.clone(), val: e, coeffs: vec![c], prec }.normalized()
    }

    /// Coefficients `coeffs[k]` of `u^{start+k}`.
    pub fn from_coeffs(field: &FqField, start: i64, coeffs: Vec<FqElem>, prec: i64) -> Self {
        Series { field: field.clone(), val: start, coeffs, prec }.normalized()
    }

    /// Sum of `c u^e` over the given terms; repeated exponents add up.
    pub fn from_terms(field: &FqField, terms: &[(i64, FqElem)], prec: i64) -> Self {
        let live: Vec<&(i64, FqElem)> = terms.iter().filter(|(e, _)| *e < prec).collect();
        let Some(lo) = live.iter().map(|(e, _)| *e).min() else {
            return Self::zero(field, prec);
        };
        let hi = live.iter().map(|(e, _)| *e).max().unwrap();
        let mut coeffs = vec![FqElem::ZERO; (hi - lo + 1) as usize];
        for (e, c) in live {
            let k = (e - lo) as usize;
            coeffs[k] = field.add(coeffs[k], *c);
        }
        Self::from_coeffs(field, lo, coeffs, prec)
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    /// Absolute precision: the series is known modulo `u^precision`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    /// `v_u`, or `None` if the series vanishes to its precision.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.val)
    }

    /// Lower bound for the valuation: the true one, or the precision.
    pub fn valuation_bound(&self) -> i64 {
        self.val
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Leading coefficient, if nonzero to precision.
    pub fn leading(&self) -> Option<FqElem> {
        self.coeffs.first().copied()
    }

    /// Coefficient of `u^e`.
    pub fn coeff(&self, e: i64) -> Result<FqElem> {
        if e >= self.prec {
            return Err(Error::InsufficientPrecision { needed: e + 1, available: self.prec });
        }
        if e < self.val {
            return Ok(FqElem::ZERO);
        }
        Ok(self.coeffs.get((e - self.val) as usize).copied().unwrap_or(FqElem::ZERO))
    }

    /// Nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> Vec<(i64, FqElem)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (self.val + k as i64, *c)).collect()
    }

    /// Highest exponent with a stored nonzero coefficient.
    pub fn degree(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then(|| self.val + self.coeffs.len() as i64 - 1)
    }

    /// Forget everything from `u^n` on (never raises the precision).
    pub fn truncate(&self, n: i64) -> Self {
        let mut s = self.clone();
        s.prec = s.prec.min(n);
        s.normalized()
    }

    /// Declare the stored terms to be correct modulo `u^n`, which may be
    /// higher than the current precision. Only sound for data known exactly.
    pub fn assume_precision(&self, n: i64) -> Self {
        let mut s = self.clone();
        s.prec = n;
        s.normalized()
    }

    pub fn add(&self, other: &Series) -> Series {
        debug_assert!(self.field == other.field);
        let prec = self.prec.min(other.prec);
        if self.is_zero() {
            return other.truncate(prec);
        }
        if other.is_zero() {
            return self.truncate(prec);
        }
        let lo = self.val.min(other.val);
        let hi = (self.val + self.coeffs.len() as i64).max(other.val + other.coeffs.len() as i64);
        let hi = hi.min(prec);
        if hi <= lo {
            return Series::zero(&self.field, prec);
        }
        let mut coeffs = vec![FqElem::ZERO; (hi - lo) as usize];
        for s in [self, other] {
            for (k, &c) in s.coeffs.iter().enumerate() {
                let e = s.val + k as i64;
                if e < hi {
                    let idx = (e - lo) as usize;
                    coeffs[idx] = self.field.add(coeffs[idx], c);
                }
            }
        }
        Series::from_coeffs(&self.field, lo, coeffs, prec)
    }

    pub fn neg(&self) -> Series {
        let mut s = self.clone();
        for c in s.coeffs.iter_mut() {
            *c = self.field.neg(*c);
        }
        s
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Series) -> Series {
        let prec = (self.prec + other.val).min(other.prec + self.val);
        let val = self.val + other.val;
        if self.is_zero() || other.is_zero() || val >= prec {
            return Series::zero(&self.field, prec);
        }
        let len = (self.coeffs.len() + other.coeffs.len() - 1).min((prec - val) as usize);
        let mut coeffs = vec![FqElem::ZERO; len];
        let f = &self.field;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(a, b));
            }
        }
        Series::from_coeffs(f, val, coeffs, prec)
    }

    pub fn scale(&self, c: FqElem) -> Series {
        let mut s = self.clone();
        for x in s.coeffs.iter_mut() {
            *x = self.field.mul(*x, c);
        }
        s.normalized()
    }

    /// Multiply by `u^k`.
    pub fn shift(&self, k: i64) -> Series {
        let mut s = self.clone();
        s.val += k;
        if !s.is_exact() {
            s.prec += k;
        }
        s.normalized()
    }

    /// Inverse `t` with absolute precision at most `target`; the product with
    /// `self` is `1` modulo `u^{t.precision() + v_u(self)}`.
    pub fn inverse(&self, target: i64) -> Result<Series> {
        let v = self.valuation().ok_or(Error::DivisionByZero)?;
        let f = &self.field;
        let c0 = f.inv(self.coeffs[0])?;
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Series::monomial(f, c0, -v, EXACT));
        }
        let prec = target.min(self.prec - 2 * v);
        let rel = (prec + v).max(0) as usize;
        let mut t = vec![FqElem::ZERO; rel];
        for k in 0..rel {
            if k == 0 {
                t[0] = c0;
                continue;
            }
            let mut acc = FqElem::ZERO;
            for i in 1..=k.min(self.coeffs.len() - 1) {
                acc = f.add(acc, f.mul(self.coeffs[i], t[k - i]));
            }
            t[k] = f.neg(f.mul(c0, acc));
        }
        Ok(Series::from_coeffs(f, -v, t, prec))
    }

    /// `s(u^k)`; exponents and precision scale by `k`.
    pub fn substitute_power(&self, k: i64) -> Series {
        assert!(k >= 1);
        let mut coeffs = vec![FqElem::ZERO; (self.coeffs.len().max(1) - 1) * k as usize + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = c;
        }
        let prec = if self.is_exact() { EXACT } else { self.prec * k };
        Series::from_coeffs(&self.field, self.val * k, coeffs, prec)
    }

    /// `s(u^p)`, the Frobenius on `k[[u]]` with coefficients left alone.
    pub fn substitute_u_p(&self) -> Series {
        self.substitute_power(self.field.p() as i64)
    }

    /// Apply `x -> x^{p^j}` to every coefficient.
    pub fn frobenius_coeffs(&self, j: i64) -> Series {
        let mut s = self.clone();
        for c in s.coeffs.iter_mut() {
            *c = self.field.frobenius(*c, j);
        }
        s
    }

    /// Equal modulo the smaller of the two precisions.
    pub fn agrees_with(&self, other: &Series) -> bool {
        self.sub(other).is_zero()
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms()
            .into_iter()
            .map(|(e, c)| {
                let c = self.field.fmt_elem(c);
                let c = if c.contains('+') { format!("({c})") } else { c };
                match (e, c.as_str()) {
                    (0, _) => c,
                    (1, "1") => "u".into(),
                    (1, _) => format!("{c}*u"),
                    (_, "1") => format!("u^{e}"),
                    _ => format!("{c}*u^{e}"),
                }
            })
            .collect();
        if !self.is_exact() {
            parts.push(format!("O(u^{})", self.prec));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Position of an embedding in a Frobenius orbit of length `orbit`; index `i`
/// stands for `tau_0 o phi^i`, so [`FrobIndex::succ`] is precomposition with
/// Frobenius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrobIndex {
    pub index: usize,
    pub orbit: usize,
}

impl FrobIndex {
    pub fn new(index: i64, orbit: usize) -> Self {
        FrobIndex { index: index.rem_euclid(orbit as i64) as usize, orbit }
    }

    pub fn succ(self) -> Self {
        self.advance(1)
    }

    pub fn pred(self) -> Self {
        self.advance(-1)
    }

    pub fn advance(self, k: i64) -> Self {
        FrobIndex::new(self.index as i64 + k, self.orbit)
    }

    /// Restriction to the subfield of degree `f_k` (which must divide the orbit).
    pub fn restrict(self, f_k: usize) -> Self {
        debug_assert_eq!(self.orbit % f_k, 0);
        FrobIndex { index: self.index % f_k, orbit: f_k }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_irreducible(f: &[u32], p: u32) -> bool {
        // no root-free check suffices only for small degree; test all monic divisors
        let m = f.len() - 1;
        for d in 1..=m / 2 {
            let count = (p as u64).pow(d as u32);
            for idx in 0..count {
                let mut g: Vec<u32> = (0..d).map(|k| ((idx / (p as u64).pow(k as u32)) % p as u64) as u32).collect();
                g.push(1);
                if prem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn default_moduli_are_irreducible() {
        for (p, m, c) in DEFAULT_MODULI {
            assert!(brute_irreducible(c, *p), "p={p} m={m}");
            if *m <= 4 {
                FqField::new(*p, *m).unwrap();
            }
        }
    }

    #[test]
    fn rejects_reducible_modulus() {
        // t^2 + 1 = (t+2)(t+3) over F_5
        assert_eq!(FqField::with_modulus(5, vec![1, 0, 1]), Err(Error::ReducibleModulus { p: 5 }));
        assert_eq!(FqField::new(4, 1), Err(Error::NotPrime(4)));
    }

    #[test]
    fn f9_frobenius() {
        let f = FqField::with_modulus(3, vec![1, 0, 1]).unwrap();
        let t = f.generator();
        assert_eq!(f.frobenius(t, 1), f.neg(t));
        assert_eq!(f.frobenius(t, 2), t);
        assert_eq!(f.frobenius(t, -1), f.neg(t));
    }

    #[test]
    fn field_axioms_small() {
        for (p, m) in [(2, 3), (3, 2), (5, 2), (7, 1), (2, 9)] {
            let f =
                if m == 9 { FqField::with_modulus(2, vec![1, 0, 0, 0, 1, 0, 0, 0, 0, 1]).unwrap() } else { FqField::new(p, m).unwrap() };
            let elems: Vec<FqElem> = f.elements().step_by((f.size() as usize / 40).max(1)).collect();
            for &a in &elems {
                assert_eq!(f.add(a, f.neg(a)), FqElem::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FqElem::ONE);
                }
                for &b in &elems {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    let c = f.generator();
                    assert_eq!(f.mul(f.add(a, b), c), f.add(f.mul(a, c), f.mul(b, c)));
                }
                // Frobenius is additive and has order m
                assert_eq!(f.frobenius(a, f.degree() as i64), a);
            }
        }
    }

    #[test]
    fn series_inverse_examples() {
        let f5 = FqField::prime(5).unwrap();
        let s = Series::from_terms(&f5, &[(0, f5.one()), (1, f5.one())], 3);
        let t = s.inverse(3).unwrap();
        let want = Series::from_terms(&f5, &[(0, f5.from_int(1)), (1, f5.from_int(4)), (2, f5.from_int(1))], 3);
        assert_eq!(t, want);

        let f7 = FqField::prime(7).unwrap();
        let s = Series::from_terms(&f7, &[(0, f7.from_int(2)), (1, f7.one()), (2, f7.one())], 3);
        let t = s.inverse(3).unwrap();
        let want = Series::from_terms(&f7, &[(0, f7.from_int(4)), (1, f7.from_int(5)), (2, f7.from_int(6))], 3);
        assert_eq!(t, want);
        assert!(s.mul(&t).agrees_with(&Series::one(&f7, 3)));
    }

    #[test]
    fn inverse_of_non_unit() {
        let f = FqField::prime(3).unwrap();
        let s = Series::from_terms(&f, &[(2, f.one()), (3, f.one())], 10);
        let t = s.inverse(20).unwrap();
        assert_eq!(t.valuation(), Some(-2));
        assert_eq!(t.precision(), 6);
        let prod = s.mul(&t);
        assert!(prod.agrees_with(&Series::one(&f, 100)));
        assert_eq!(prod.precision(), 8);
    }

    #[test]
    fn precision_bookkeeping() {
        let f = FqField::prime(5).unwrap();
        let a = Series::from_terms(&f, &[(1, f.one())], 6);
        let b = Series::from_terms(&f, &[(0, f.one()), (3, f.one())], 4);
        assert_eq!(a.mul(&b).precision(), 5);
        assert_eq!(a.add(&b).precision(), 4);
        let z = Series::zero(&f, 3);
        assert_eq!(z.valuation(), None);
        assert!(z.coeff(3).is_err());
        let s = a.substitute_u_p();
        assert_eq!(s.precision(), 30);
        assert_eq!(s.valuation(), Some(5));
    }

    #[test]
    fn frob_index() {
        let i = FrobIndex::new(-1, 4);
        assert_eq!(i.index, 3);
        assert_eq!(i.succ().index, 0);
        assert_eq!(FrobIndex::new(5, 6).restrict(2).index, 1);
    }
}
