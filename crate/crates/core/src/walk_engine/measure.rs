use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_matrix::{matrix_from_strings, matrix_to_strings, relevant_places};
use crate::places::{format_rational, parse_rational};
use crate::{Integer, PlaceSet, Rational, RationalMatrix};

/// A finitely supported probability measure on `GL_d(Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    name: String,
    dim: usize,
    weights: Vec<Rational>,
    atoms: Vec<RationalMatrix>,
    /// `weights[i] = integer_weights[i] / common denominator`, for exact sampling.
    integer_weights: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    weight: String,
    matrix: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureRecord {
    name: String,
    dim: usize,
    atoms: Vec<AtomRecord>,
}

impl MeasureSpec {
    /// Validate and build. Weights must lie in `(0, 1]` and sum to exactly 1.
    pub fn new(
        name: impl Into<String>,
        atoms: impl IntoIterator<Item = (Rational, RationalMatrix)>,
    ) -> Result<Self> {
        let (weights, atoms): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
        let dim = atoms.first().map(|a| a.rows()).unwrap_or(0);
        Self::validated(name.into(), dim, weights, atoms)
    }

    /// The point mass at `g`.
    pub fn dirac(name: impl Into<String>, g: RationalMatrix) -> Result<Self> {
        Self::new(name, [(Rational::one(), g)])
    }

    /// Equal weights on the given atoms.
    pub fn uniform(name: impl Into<String>, atoms: Vec<RationalMatrix>) -> Result<Self> {
        let w = Rational::new(1.into(), Integer::from(atoms.len().max(1)));
        Self::new(name, atoms.into_iter().map(|a| (w.clone(), a)))
    }

    fn validated(
        name: String,
        dim: usize,
        weights: Vec<Rational>,
        atoms: Vec<RationalMatrix>,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::parse("atoms", "at least one atom required"));
        }
        if dim == 0 {
            return Err(Error::parse("dim", "dimension must be positive"));
        }
        for (i, (w, a)) in weights.iter().zip(&atoms).enumerate() {
            if !w.is_positive() || *w > Rational::one() {
                return Err(Error::parse(
                    format!("atoms[{i}].weight"),
                    format!("weight {} not in (0, 1]", format_rational(w)),
                ));
            }
            if a.rows() != dim || a.cols() != dim {
                return Err(Error::parse(
                    format!("atoms[{i}].matrix"),
                    format!("expected {dim}x{dim}, found {}x{}", a.rows(), a.cols()),
                ));
            }
            if !a.is_invertible() {
                return Err(Error::parse(
                    format!("atoms[{i}].matrix"),
                    Error::Singular.to_string(),
                ));
            }
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(Error::WeightSum {
                sum: format_rational(&sum),
            });
        }
        let denom = weights
            .iter()
            .fold(Integer::one(), |acc, w| acc.lcm(w.denom()));
        let integer_weights = weights
            .iter()
            .map(|w| {
                (w * Rational::from_integer(denom.clone()))
                    .to_integer()
                    .to_u64()
            })
            .collect::<Option<Vec<u64>>>()
            .ok_or_else(|| Error::OutOfRange {
                what: "weights",
                detail: "common denominator exceeds 64 bits".into(),
            })?;
        Ok(Self {
            name,
            dim,
            weights,
            atoms,
            integer_weights,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[RationalMatrix] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &RationalMatrix {
        &self.atoms[i]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub(crate) fn integer_weights(&self) -> &[u64] {
        &self.integer_weights
    }

    /// A single atom (weight 1).
    pub fn is_deterministic(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn relevant_places(&self) -> Result<PlaceSet> {
        relevant_places(&self.atoms)
    }

    pub fn to_json(&self) -> String {
        let rec = MeasureRecord {
            name: self.name.clone(),
            dim: self.dim,
            atoms: self
                .weights
                .iter()
                .zip(&self.atoms)
                .map(|(w, a)| AtomRecord {
                    weight: format_rational(w),
                    matrix: matrix_to_strings(a),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&rec).expect("plain data")
    }
}

/// Parse a measure document:
/// `{"name": .., "dim": d, "atoms": [{"weight": "1/2", "matrix": [["1","1"],["0","1"]]}]}`.
pub fn load_measure(text: &str) -> Result<MeasureSpec> {
    if text.trim().is_empty() {
        return Err(Error::parse("line 1, column 1", "empty measure document"));
    }
    let rec: MeasureRecord = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let mut weights = Vec::with_capacity(rec.atoms.len());
    let mut atoms = Vec::with_capacity(rec.atoms.len());
    for (i, atom) in rec.atoms.iter().enumerate() {
        let w =
            parse_rational(&atom.weight).map_err(|e| relocate(e, format!("atoms[{i}].weight")))?;
        let m = matrix_from_strings(&atom.matrix)
            .map_err(|e| relocate(e, format!("atoms[{i}].matrix")))?;
        weights.push(w);
        atoms.push(m);
    }
    MeasureSpec::validated(rec.name, rec.dim, weights, atoms)
}

/// Prefix a nested parse location (`[i][j]` from matrix parsing) with the field path.
fn relocate(e: Error, field: String) -> Error {
    match e {
        Error::Parse { location, message } if location.starts_with('[') => {
            Error::parse(format!("{field}{location}"), message)
        }
        Error::Parse { location, message } => Error::parse(field, format!("{location}: {message}")),
        other => Error::parse(field, other.to_string()),
    }
}

impl std::str::FromStr for MeasureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        load_measure(s)
    }
}
