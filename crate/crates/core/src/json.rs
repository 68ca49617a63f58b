//! JSON documents for fields, series, modules and the other CLI inputs.
//!
//! Coefficients are written either as an integer (reduced into the prime
//! field) or as a list of coordinates in the power basis of `F`. A series
//! without `precision` is exact. Integers beyond `2^53` are written as
//! decimal strings and accepted either way.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{FqElem, FqField, Series, EXACT};
use crate::bkmod::BKModule;
use crate::error::{Error, Result};
use crate::induct::{RankOneData, UnramifiedExtension};
use crate::inert::{InertDescription, TameCharacter, WeightTuple};
use crate::lattices::SeriesMatrix;
use crate::sdinduced::{InducedAmbient, InducedSubmodule};

const SAFE_INT: i128 = 1 << 53;

/// Integer that may arrive as a JSON number or a decimal string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BigInt(pub i128);

impl Serialize for BigInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.abs() <= SAFE_INT {
            s.serialize_i64(self.0 as i64)
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for BigInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(BigInt(n as i128)),
            Raw::Str(s) => s.trim().parse().map(BigInt).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub p: u32,
    pub m: usize,
    /// Monic modulus, constant term first, leading 1 included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldDoc {
    pub fn build(&self) -> Result<FqField> {
        match &self.modulus {
            Some(c) => {
                if c.len() != self.m + 1 {
                    return Err(Error::BadModulus { m: self.m });
                }
                FqField::with_modulus(self.p, c.clone())
            }
            None => FqField::new(self.p, self.m),
        }
    }

    pub fn of(field: &FqField) -> Self {
        FieldDoc { p: field.p(), m: field.degree(), modulus: Some(field.modulus().to_vec()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffDoc {
    Int(i64),
    Coords(Vec<i64>),
}

impl CoeffDoc {
    pub fn build(&self, field: &FqField) -> Result<FqElem> {
        match self {
            CoeffDoc::Int(n) => Ok(field.from_int(*n)),
            CoeffDoc::Coords(c) => field.from_coords(c),
        }
    }

    pub fn of(field: &FqField, x: FqElem) -> Self {
        if field.degree() == 1 {
            CoeffDoc::Int(x.index() as i64)
        } else {
            CoeffDoc::Coords(field.coords(x).into_iter().map(i64::from).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesDoc {
    /// `[exponent, coefficient]` pairs.
    pub terms: Vec<(i64, CoeffDoc)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
}

impl SeriesDoc {
    pub fn build(&self, field: &FqField) -> Result<Series> {
        let prec = self.precision.unwrap_or(EXACT);
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            if *e >= prec {
                return Err(Error::InvalidInput(format!("term u^{e} at or beyond precision {prec}")));
            }
            terms.push((*e, c.build(field)?));
        }
        Ok(Series::from_terms(field, &terms, prec))
    }

    pub fn of(s: &Series) -> Self {
        SeriesDoc {
            terms: s.terms().into_iter().map(|(e, c)| (e, CoeffDoc::of(s.field(), c))).collect(),
            precision: (!s.is_exact()).then(|| s.precision()),
        }
    }
}

pub type MatrixDoc = Vec<Vec<SeriesDoc>>;

pub fn build_matrix(field: &FqField, rows: &MatrixDoc) -> Result<SeriesMatrix> {
    let built = rows.iter().map(|r| r.iter().map(|s| s.build(field)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    SeriesMatrix::from_rows(field, built)
}

pub fn matrix_doc(m: &SeriesMatrix) -> MatrixDoc {
    (0..m.rows()).map(|i| m.row(i).iter().map(SeriesDoc::of).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub p: u32,
    pub f: usize,
    pub coeff: FieldDoc,
    pub rank: usize,
    /// Truncate every entry to this precision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
    pub frob: Vec<MatrixDoc>,
}

impl ModuleDoc {
    pub fn build(&self) -> Result<BKModule> {
        if self.coeff.p != self.p {
            return Err(Error::InvalidInput(format!("p = {} but the coefficient field has characteristic {}", self.p, self.coeff.p)));
        }
        let field = self.coeff.build()?;
        let mut frob = Vec::with_capacity(self.frob.len());
        for m in &self.frob {
            let a = build_matrix(&field, m)?;
            if a.rows() != self.rank || a.cols() != self.rank {
                return Err(Error::DimensionMismatch(format!("expected {0}x{0} Frobenius matrices", self.rank)));
            }
            frob.push(match self.precision {
                Some(n) => a.truncate(n),
                None => a,
            });
        }
        BKModule::new(&field, self.f, frob)
    }

    pub fn of(m: &BKModule) -> Self {
        let prec = m.precision();
        ModuleDoc {
            p: m.p(),
            f: m.residue_degree(),
            coeff: FieldDoc::of(m.field()),
            rank: m.rank(),
            precision: (prec < EXACT).then_some(prec),
            frob: m.frobs().iter().map(matrix_doc).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFileDoc {
    pub coeff: FieldDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
    pub matrix: MatrixDoc,
}

impl MatrixFileDoc {
    pub fn build(&self) -> Result<SeriesMatrix> {
        let a = build_matrix(&self.coeff.build()?, &self.matrix)?;
        Ok(match self.precision {
            Some(n) => a.truncate(n),
            None => a,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummandDoc {
    pub f: usize,
    pub exponent: BigInt,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unramified: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertDoc {
    pub p: u32,
    pub f_k: usize,
    pub summands: Vec<SummandDoc>,
}

impl InertDoc {
    pub fn build(&self) -> Result<InertDescription> {
        let summands = self
            .summands
            .iter()
            .map(|s| {
                let mut c = TameCharacter::new(self.p, s.f, s.exponent.0)?;
                if let Some(u) = &s.unramified {
                    c.unramified = u.clone();
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        InertDescription::new(self.p, self.f_k, summands)
    }

    pub fn of(d: &InertDescription) -> Self {
        InertDoc {
            p: d.p,
            f_k: d.f_k,
            summands: d
                .summands
                .iter()
                .map(|s| SummandDoc {
                    f: s.level,
                    exponent: BigInt(s.exponent),
                    unramified: (s.unramified != [1]).then(|| s.unramified.clone()),
                })
                .collect(),
        }
    }
}

pub fn weight_tuple_from_json(v: &[Vec<i64>]) -> WeightTuple {
    WeightTuple::new(v.to_vec())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankOneDoc {
    pub coeff: FieldDoc,
    pub x: CoeffDoc,
    pub exponents: Vec<i64>,
}

impl RankOneDoc {
    pub fn build(&self) -> Result<(FqField, RankOneData)> {
        let field = self.coeff.build()?;
        let x = self.x.build(&field)?;
        Ok((field, RankOneData { x, exponents: self.exponents.clone() }))
    }

    pub fn of(field: &FqField, d: &RankOneData) -> Self {
        RankOneDoc { coeff: FieldDoc::of(field), x: CoeffDoc::of(field, d.x), exponents: d.exponents.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionDoc {
    pub f_k: usize,
    pub f_l: usize,
}

impl ExtensionDoc {
    pub fn build(&self) -> Result<UnramifiedExtension> {
        UnramifiedExtension::new(self.f_k, self.f_l)
    }

    pub fn of(e: &UnramifiedExtension) -> Self {
        ExtensionDoc { f_k: e.f_k(), f_l: e.f_l() }
    }
}

/// A submodule of an induced rank-one module, given either by constant
/// vectors (meaning `V + u f_*N`) or by generator matrices per component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InducedDoc {
    pub coeff: FieldDoc,
    pub f_k: usize,
    /// `r_θ` for every embedding of `l`.
    pub exponents: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_vectors: Option<Vec<Vec<CoeffDoc>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<MatrixDoc>>,
}

impl InducedDoc {
    pub fn build(&self) -> Result<InducedSubmodule> {
        let field = self.coeff.build()?;
        let ext = UnramifiedExtension::new(self.f_k, self.exponents.len())?;
        let ambient = InducedAmbient::new(&field, ext, self.exponents.clone())?;
        let prec = self.precision.unwrap_or_else(|| BKModule::default_precision(field.p(), ambient.rank()));
        match (&self.constant_vectors, &self.generators) {
            (Some(vs), None) => {
                let vs = vs.iter().map(|v| v.iter().map(|c| c.build(&field)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
                InducedSubmodule::from_constant_vectors(&ambient, &vs, prec)
            }
            (None, Some(gs)) => {
                let gs = gs.iter().map(|g| Ok(build_matrix(&field, g)?.truncate(prec))).collect::<Result<Vec<_>>>()?;
                InducedSubmodule::new(&ambient, &gs)
            }
            _ => Err(Error::InvalidInput("give exactly one of constant_vectors and generators".into())),
        }
    }
}

pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("JSON: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let f = FqField::new(3, 2).unwrap();
        let s = Series::from_terms(&f, &[(1, f.generator()), (4, f.from_int(2))], 9);
        let doc = SeriesDoc::of(&s);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SeriesDoc = parse(&text).unwrap();
        assert_eq!(back.build(&f).unwrap(), s);
    }

    #[test]
    fn module_round_trip_and_unknown_fields() {
        let text = r#"{"p": 5, "f": 1, "coeff": {"p": 5, "m": 1}, "rank": 1,
            "frob": [[[{"terms": [[2, 3], [3, 1]], "precision": 12}]]]}"#;
        let m = parse::<ModuleDoc>(text).unwrap().build().unwrap();
        let again = parse::<ModuleDoc>(&serde_json::to_string(&ModuleDoc::of(&m)).unwrap()).unwrap().build().unwrap();
        assert_eq!(m, again);
        let bad = text.replace("\"rank\"", "\"rnak\"");
        assert!(parse::<ModuleDoc>(&bad).is_err());
    }

    #[test]
    fn big_integers_as_strings() {
        let d: InertDoc = parse(r#"{"p": 13, "f_k": 1, "summands": [{"f": 20, "exponent": "19004963774880799438799"}]}"#).unwrap();
        let desc = d.build().unwrap();
        let out = serde_json::to_string(&InertDoc::of(&desc)).unwrap();
        assert!(out.contains("\"19004963774880799438799\""));
        let small: InertDoc = parse(r#"{"p": 5, "f_k": 1, "summands": [{"f": 1, "exponent": -1}]}"#).unwrap();
        assert_eq!(small.build().unwrap().summands[0].exponent, 3);
    }
}
