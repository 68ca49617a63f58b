//! Weights and strong divisibility for `p`-torsion Breuil-Kisin modules over
//! `k[[u]] ⊗ F`, decomposed along the embeddings of `k` into a finite field `F`.

pub mod algebra;
pub mod bkmod;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod induct;
pub mod inert;
pub mod json;
pub mod lattices;
pub mod linalg;
pub mod sdinduced;

pub use error::{Error, Result};
