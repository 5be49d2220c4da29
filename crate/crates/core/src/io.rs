//! File formats tying the pipeline together: JSON descriptions of
//! fields and ideals, relation sets as JSON lines, and matrices as
//! plain-text tables.
//!
//! Every writer emits deterministic bytes — identical inputs give
//! identical files — so end-to-end reproducibility checks can compare
//! artifacts with a plain diff.  Numeric JSON fields use `i64`, which
//! comfortably covers every quantity the desk-scale pipeline writes;
//! matrix files carry arbitrary integers as decimal text.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::Poly;
use crate::field::{
    make_field, make_field_assume_monogenic, make_kummer_field, FieldElement, NumberField,
};
use crate::ideals::{ideal_pow, split_prime, Ideal};
use crate::linalg::IntMatrix;
use crate::relations::Relation;
use crate::{Error, Result};

// ===================================================================
// Field descriptions
// ===================================================================

/// A number field description: monic integer coefficients of the
/// defining polynomial (ascending), or the pure-power shorthand
/// `[n, k]` for `X^n - k`.  Exactly one of the two must be present.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kummer: Option<(u32, u64)>,
    /// Skip the maximal-order certificate and take `Z[theta] = O_K` on
    /// the caller's word.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub assume_monogenic: bool,
}

impl FieldSpec {
    pub fn from_poly(coeffs: &[i64]) -> FieldSpec {
        FieldSpec {
            poly: Some(coeffs.to_vec()),
            kummer: None,
            assume_monogenic: false,
        }
    }

    pub fn from_kummer(n: u32, k: u64) -> FieldSpec {
        FieldSpec {
            poly: None,
            kummer: Some((n, k)),
            assume_monogenic: false,
        }
    }

    pub fn build(&self) -> Result<Arc<NumberField>> {
        match (&self.poly, &self.kummer) {
            (Some(coeffs), None) => {
                let t = Poly::from_i64s(coeffs);
                if self.assume_monogenic {
                    make_field_assume_monogenic(&t)
                } else {
                    make_field(&t)
                }
            }
            (None, Some((n, k))) => make_kummer_field(*n, *k),
            _ => Err(Error::InvalidInput(
                "field spec needs exactly one of `poly` or `kummer`".into(),
            )),
        }
    }
}

pub fn field_spec_from_json(text: &str) -> Result<FieldSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_field(path: &Path) -> Result<Arc<NumberField>> {
    field_spec_from_json(&fs::read_to_string(path)?)?.build()
}

// ===================================================================
// Ideal descriptions
// ===================================================================

/// How a prime ideal is pinned down: the rational prime below it and
/// the coefficients (ascending) of its residual factor of `T` mod `p`.
/// Unknown keys are rejected so that a `power` misplaced inside the
/// prime object errors out instead of silently selecting `q^1`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PrimeSpec {
    pub p: u64,
    pub g: Vec<u64>,
}

/// An integral ideal description: a principal generator, a prime
/// selected by its residual factor, or a full lattice basis in the
/// power basis of `theta`; any form may be raised to `power`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct IdealSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<PrimeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hnf: Option<Vec<Vec<i64>>>,
    #[serde(default = "default_power", skip_serializing_if = "is_one_u64")]
    pub power: u64,
}

fn default_power() -> u64 {
    1
}

fn is_one_u64(v: &u64) -> bool {
    *v == 1
}

impl IdealSpec {
    pub fn from_element(coeffs: &[i64]) -> IdealSpec {
        IdealSpec {
            element: Some(coeffs.to_vec()),
            prime: None,
            hnf: None,
            power: 1,
        }
    }

    pub fn from_prime(p: u64, g: &[u64], power: u64) -> IdealSpec {
        IdealSpec {
            element: None,
            prime: Some(PrimeSpec { p, g: g.to_vec() }),
            hnf: None,
            power,
        }
    }

    pub fn build(&self, field: &Arc<NumberField>) -> Result<Ideal> {
        let set = [
            self.element.is_some(),
            self.prime.is_some(),
            self.hnf.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if set != 1 {
            return Err(Error::InvalidInput(
                "ideal spec needs exactly one of `element`, `prime`, `hnf`".into(),
            ));
        }
        let base = if let Some(coeffs) = &self.element {
            let phi = FieldElement::new(field.clone(), Poly::from_i64s(coeffs));
            Ideal::from_element(&phi)?
        } else if let Some(ps) = &self.prime {
            let q = split_prime(field, ps.p)?
                .into_iter()
                .find(|q| q.g.coeffs == ps.g)
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "no prime above {} has the residual factor {:?}",
                        ps.p, ps.g
                    ))
                })?;
            q.to_ideal(field)
        } else {
            ideal_from_lattice(field, self.hnf.as_ref().expect("checked above"))?
        };
        ideal_pow(&base, self.power)
    }
}

/// Builds an ideal from generating lattice rows, verifying that the
/// lattice is full rank and closed under multiplication by `theta` —
/// without closure the rows span a lattice that is not an ideal and
/// every downstream operation would silently misbehave.
fn ideal_from_lattice(field: &Arc<NumberField>, rows: &[Vec<i64>]) -> Result<Ideal> {
    let n = field.degree;
    if rows.is_empty() || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!(
            "lattice rows must all have length {n}"
        )));
    }
    let basis = IntMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
            .collect(),
    )
    .hnf_basis();
    if basis.rows != n {
        return Err(Error::InvalidInput(
            "lattice does not have full rank".into(),
        ));
    }
    let theta = FieldElement::new(field.clone(), Poly::from_i64s(&[0, 1]));
    for i in 0..n {
        let e = FieldElement::new(field.clone(), Poly::new(basis.row(i).to_vec()));
        let shifted = e.mul(&theta);
        let mut coords = shifted.rep.coeffs.clone();
        coords.resize(n, BigInt::zero());
        if !basis.hnf_contains(&coords) {
            return Err(Error::InvalidInput(
                "lattice is not closed under multiplication by theta".into(),
            ));
        }
    }
    Ok(Ideal {
        field: field.clone(),
        hnf: basis,
        two: None,
    })
}

pub fn ideal_spec_from_json(text: &str) -> Result<IdealSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_ideal(field: &Arc<NumberField>, path: &Path) -> Result<Ideal> {
    ideal_spec_from_json(&fs::read_to_string(path)?)?.build(field)
}

// ===================================================================
// Relation files (JSON lines)
// ===================================================================

#[derive(Serialize, Deserialize)]
struct RelationLine {
    phi: Vec<i64>,
    e: Vec<i64>,
    logs: Vec<f64>,
}

fn coeffs_to_i64(phi: &FieldElement) -> Result<Vec<i64>> {
    phi.rep
        .coeffs
        .iter()
        .map(|c| {
            c.to_i64().ok_or_else(|| {
                Error::InvalidInput("relation coefficient exceeds the file format range".into())
            })
        })
        .collect()
}

/// One relation per line: `{"phi": [...], "e": [...], "logs": [...]}`.
pub fn relations_to_jsonl(relations: &[Relation]) -> Result<String> {
    let mut out = String::new();
    for rel in relations {
        let line = RelationLine {
            phi: coeffs_to_i64(&rel.phi)?,
            e: rel.exponents.clone(),
            logs: rel.logs.clone(),
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn relations_from_jsonl(field: &Arc<NumberField>, text: &str) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RelationLine = serde_json::from_str(line)?;
        out.push(Relation {
            phi: FieldElement::new(field.clone(), Poly::from_i64s(&parsed.phi)),
            exponents: parsed.e,
            logs: parsed.logs,
        });
    }
    Ok(out)
}

pub fn write_relations(path: &Path, relations: &[Relation]) -> Result<()> {
    Ok(fs::write(path, relations_to_jsonl(relations)?)?)
}

pub fn read_relations(field: &Arc<NumberField>, path: &Path) -> Result<Vec<Relation>> {
    relations_from_jsonl(field, &fs::read_to_string(path)?)
}

// ===================================================================
// Matrix files
// ===================================================================

/// `rows cols` header, then one space-separated decimal row per line.
pub fn int_matrix_to_text(m: &IntMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows, m.cols);
    for row in m.rows_iter() {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn int_matrix_from_text(text: &str) -> Result<IntMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidInput("matrix header must be `rows cols`".into()))?;
    let [rows, cols] = dims[..] else {
        return Err(Error::InvalidInput("matrix header must be `rows cols`".into()));
    };
    let mut data = Vec::with_capacity(rows);
    for line in lines.take(rows) {
        let row: Vec<BigInt> = line
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput("matrix entries must be integers".into()))?;
        if row.len() != cols {
            return Err(Error::InvalidInput(format!(
                "matrix row has {} entries, expected {cols}",
                row.len()
            )));
        }
        data.push(row);
    }
    if data.len() != rows {
        return Err(Error::InvalidInput(format!(
            "matrix has {} rows, expected {rows}",
            data.len()
        )));
    }
    Ok(IntMatrix::from_rows(data))
}

/// Same table layout with shortest-round-trip floats.
pub fn real_matrix_to_text(rows: &[Vec<f64>]) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = format!("{} {}\n", rows.len(), cols);
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:?}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn real_matrix_from_text(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty matrix file".into()))?;
    let mut out = Vec::new();
    for line in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput("matrix entries must be floats".into()))?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_int_matrix(path: &Path, m: &IntMatrix) -> Result<()> {
    Ok(fs::write(path, int_matrix_to_text(m))?)
}

pub fn read_int_matrix(path: &Path) -> Result<IntMatrix> {
    int_matrix_from_text(&fs::read_to_string(path)?)
}

pub fn write_real_matrix(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    Ok(fs::write(path, real_matrix_to_text(rows))?)
}

pub fn read_real_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    real_matrix_from_text(&fs::read_to_string(path)?)
}
