use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_matrix::{matrix_from_strings, matrix_to_strings};
use crate::places::rational::to_f64;
use crate::places::{valuation, Place};
use crate::{Rational, RationalMatrix};

/// Exponents `λ_1 >= ... >= λ_d` at one place and the block structure they
/// induce: `dims = (j_1 < ... < j_r = d)`, one block per distinct value.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicSpec {
    place: Place,
    exponents: Vec<f64>,
    /// At finite places, the exponents as exact multiples of `ln p`.
    log_p_units: Option<Vec<Rational>>,
    dims: Vec<usize>,
}

fn block_ends<T>(values: &[T], same: impl Fn(&T, &T) -> bool) -> Vec<usize> {
    let mut dims = Vec::new();
    for i in 1..values.len() {
        if !same(&values[i - 1], &values[i]) {
            dims.push(i);
        }
    }
    dims.push(values.len());
    dims
}

impl ParabolicSpec {
    /// Blocks are runs of equal exponents.
    pub fn from_exponents(place: Place, exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::dims("at least one exponent", 0));
        }
        if exponents
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_lt()))
        {
            return Err(Error::OutOfRange {
                what: "exponents",
                detail: format!("{exponents:?} not sorted descending"),
            });
        }
        let dims = block_ends(&exponents, |a, b| a == b);
        Ok(Self {
            place,
            exponents,
            log_p_units: None,
            dims,
        })
    }

    /// Exact exponents `units[i] * ln p` at a finite place.
    pub fn from_log_p_units(place: Place, units: Vec<Rational>) -> Result<Self> {
        let p = place
            .prime()
            .ok_or_else(|| Error::PlaceMismatch("finite place".into(), place.to_string()))?;
        if units.is_empty() {
            return Err(Error::dims("at least one exponent", 0));
        }
        if units.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::OutOfRange {
                what: "exponents",
                detail: "not sorted descending".into(),
            });
        }
        let exponents = units.iter().map(|u| to_f64(u) * p.ln()).collect();
        let dims = block_ends(&units, |a, b| a == b);
        Ok(Self {
            place,
            exponents,
            log_p_units: Some(units),
            dims,
        })
    }

    /// Every exponent equal: `P = GL_d`, a one-point flag manifold.
    pub fn trivial(place: Place, d: usize) -> Self {
        match place {
            Place::Infinity => Self::from_exponents(place, vec![0.0; d]),
            Place::Finite(_) => Self::from_log_p_units(place, vec![Rational::zero(); d]),
        }
        .expect("constant exponents are valid")
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn log_p_units(&self) -> Option<&[Rational]> {
        self.log_p_units.as_deref()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of distinct exponent values.
    pub fn block_count(&self) -> usize {
        self.dims.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.dims.len() == 1
    }

    /// Block containing coordinate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.dims
            .iter()
            .position(|&j| i < j)
            .expect("index below d")
    }
}

/// True iff `u_ij = 0` whenever `λ_i < λ_j` (block upper triangular).
pub fn parabolic_member(u: &RationalMatrix, spec: &ParabolicSpec) -> Result<bool> {
    let d = spec.dim();
    if !u.is_square() || u.rows() != d {
        return Err(Error::dims(
            format!("{d}x{d}"),
            format!("{}x{}", u.rows(), u.cols()),
        ));
    }
    if !u.is_invertible() {
        return Err(Error::Singular);
    }
    Ok((0..d).all(|i| (0..d).all(|j| spec.block_of(i) <= spec.block_of(j) || u[(i, j)].is_zero())))
}

/// A flag `V_1 < ... < V_r = full space` with `dim V_i = dims[i]`, each level
/// held as its unique reduced column-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flag {
    place: Place,
    dims: Vec<usize>,
    subspaces: Vec<RationalMatrix>,
    pivots: Vec<Vec<usize>>,
}

/// Canonicalize nested bases into a [`Flag`].
pub fn flag_canonicalize(raw: &[RationalMatrix], dims: &[usize], place: Place) -> Result<Flag> {
    if raw.len() != dims.len() || dims.is_empty() {
        return Err(Error::dims(format!("{} levels", dims.len()), raw.len()));
    }
    let d = raw[0].rows();
    if dims.windows(2).any(|w| w[0] >= w[1]) || *dims.last().unwrap() != d || dims[0] == 0 {
        return Err(Error::OutOfRange {
            what: "flag dims",
            detail: format!("{dims:?} must increase strictly to {d}"),
        });
    }
    let mut subspaces = Vec::with_capacity(dims.len());
    let mut pivots = Vec::with_capacity(dims.len());
    for (level, (basis, &j)) in raw.iter().zip(dims).enumerate() {
        if basis.rows() != d || basis.cols() != j {
            return Err(Error::FlagLevel {
                level,
                message: format!(
                    "basis is {}x{}, expected {d}x{j}",
                    basis.rows(),
                    basis.cols()
                ),
            });
        }
        let (echelon, piv) = basis.column_echelon();
        if piv.len() != j {
            return Err(Error::FlagLevel {
                level,
                message: format!("rank {} below dimension {j}", piv.len()),
            });
        }
        if let Some(prev) = subspaces.last() {
            let joined: RationalMatrix = echelon.hstack(prev)?;
            if joined.rank() != j {
                return Err(Error::FlagLevel {
                    level,
                    message: "does not contain the previous level".into(),
                });
            }
        }
        subspaces.push(echelon);
        pivots.push(piv);
    }
    Ok(Flag {
        place,
        dims: dims.to_vec(),
        subspaces,
        pivots,
    })
}

fn abs_at_place(x: &Rational, place: Place) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match place {
        Place::Infinity => to_f64(x).abs(),
        Place::Finite(p) => {
            let v = valuation(x, p).expect("nonzero");
            (p.get() as f64).powi(-(v.clamp(-1000, 1000) as i32))
        }
    }
}

/// Chart-local distance: `+inf` if some level's pivot pattern differs,
/// otherwise the largest `|entry difference|_place` over all levels.
pub fn flag_distance(a: &Flag, b: &Flag) -> Result<f64> {
    if a.place != b.place {
        return Err(Error::PlaceMismatch(
            a.place.to_string(),
            b.place.to_string(),
        ));
    }
    if a.dims != b.dims {
        return Err(Error::dims(
            format!("{:?}", a.dims),
            format!("{:?}", b.dims),
        ));
    }
    if a.pivots != b.pivots {
        return Ok(f64::INFINITY);
    }
    let mut worst = 0.0f64;
    for (x, y) in a.subspaces.iter().zip(&b.subspaces) {
        for (p, q) in x.entries().zip(y.entries()) {
            worst = worst.max(abs_at_place(&(p - q), a.place));
        }
    }
    Ok(worst)
}

impl Flag {
    /// The one-level flag `(full space)`.
    pub fn trivial(place: Place, d: usize) -> Self {
        flag_canonicalize(&[RationalMatrix::identity(d)], &[d], place).expect("identity")
    }

    /// Flag whose level `i` is spanned by `e_{order[0]}, ..., e_{order[j_i - 1]}`.
    pub fn coordinate(place: Place, dims: &[usize], order: &[usize]) -> Result<Self> {
        let d = order.len();
        let basis: Vec<RationalMatrix> = dims
            .iter()
            .map(|&j| {
                let mut m = RationalMatrix::zeros(d, j);
                for (c, &r) in order[..j].iter().enumerate() {
                    m[(r, c)] = Rational::from_integer(1.into());
                }
                m
            })
            .collect();
        flag_canonicalize(&basis, dims, place)
    }

    /// Coordinate flag of the reversed standard basis.
    pub fn reversed_coordinate(place: Place, dims: &[usize]) -> Result<Self> {
        let d = *dims.last().unwrap_or(&0);
        let order: Vec<usize> = (0..d).rev().collect();
        Self::coordinate(place, dims, &order)
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn dim(&self) -> usize {
        *self.dims.last().expect("nonempty")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn subspaces(&self) -> &[RationalMatrix] {
        &self.subspaces
    }

    pub fn pivots(&self) -> &[Vec<usize>] {
        &self.pivots
    }

    pub fn is_trivial(&self) -> bool {
        self.dims.len() == 1
    }

    /// `g . F`: the flag of images `g V_i`.
    pub fn act(&self, g: &RationalMatrix) -> Result<Flag> {
        if g.rows() != self.dim() || !g.is_square() {
            return Err(Error::dims(self.dim(), g.rows()));
        }
        let images: Vec<RationalMatrix> = self
            .subspaces
            .iter()
            .map(|v| g.multiply(v))
            .collect::<Result<_>>()?;
        flag_canonicalize(&images, &self.dims, self.place)
    }

    /// An invertible matrix whose first `j_i` columns span `V_i` for every
    /// level: level-1 echelon columns, then for each next level its echelon
    /// columns not already spanned.
    pub fn completion(&self) -> RationalMatrix {
        let d = self.dim();
        let mut cols: Vec<Vec<Rational>> = Vec::with_capacity(d);
        for (level, v) in self.subspaces.iter().enumerate() {
            for c in 0..v.cols() {
                if cols.len() == self.dims[level] {
                    break;
                }
                let candidate = v.column(c);
                let mut trial = cols.clone();
                trial.push(candidate);
                let m = RationalMatrix::from_columns(&trial).expect("same length");
                if m.rank() == trial.len() {
                    cols = trial;
                }
            }
        }
        RationalMatrix::from_columns(&cols).expect("same length")
    }

    /// Completion built by scanning each level's echelon columns last-to-first.
    /// Differs from [`Flag::completion`] by an element of the parabolic group.
    pub fn completion_reversed(&self) -> RationalMatrix {
        let d = self.dim();
        let mut cols: Vec<Vec<Rational>> = Vec::with_capacity(d);
        for (level, v) in self.subspaces.iter().enumerate() {
            for c in (0..v.cols()).rev() {
                if cols.len() == self.dims[level] {
                    break;
                }
                let mut trial = cols.clone();
                trial.push(v.column(c));
                if RationalMatrix::from_columns(&trial)
                    .expect("same length")
                    .rank()
                    == trial.len()
                {
                    cols = trial;
                }
            }
        }
        RationalMatrix::from_columns(&cols).expect("same length")
    }
}

#[derive(Serialize, Deserialize)]
struct FlagRecord {
    place: Place,
    dims: Vec<usize>,
    matrices: Vec<Vec<Vec<String>>>,
    pivots: Vec<Vec<usize>>,
}

impl Serialize for Flag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FlagRecord {
            place: self.place,
            dims: self.dims.clone(),
            matrices: self.subspaces.iter().map(matrix_to_strings).collect(),
            pivots: self.pivots.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Flag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = FlagRecord::deserialize(d)?;
        let raw = rec
            .matrices
            .iter()
            .map(|m| matrix_from_strings(m))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let flag =
            flag_canonicalize(&raw, &rec.dims, rec.place).map_err(serde::de::Error::custom)?;
        if flag.pivots != rec.pivots {
            return Err(serde::de::Error::custom(
                "pivot pattern does not match matrices",
            ));
        }
        Ok(flag)
    }
}
