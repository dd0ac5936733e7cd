//! Standard measures used in examples and tests.

use itertools::Itertools;

use super::MeasureSpec;
use crate::{Rational, RationalMatrix};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Point mass at `diag(entries)`.
pub fn diagonal_dirac(entries: Vec<Rational>) -> MeasureSpec {
    MeasureSpec::dirac("diagonal", RationalMatrix::diagonal(entries)).expect("invertible")
}

/// `δ_{diag(2, 1/2)}`.
pub fn diag_two_half() -> MeasureSpec {
    diagonal_dirac(vec![int(2), r(1, 2)])
}

/// Uniform on the elementary generators `[[1,1],[0,1]]`, `[[1,0],[1,1]]` of `SL_2(Z)`.
pub fn sl2z() -> MeasureSpec {
    let u = RationalMatrix::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]]).unwrap();
    MeasureSpec::uniform("sl2z", vec![u.clone(), u.transpose()]).expect("invertible")
}

/// Affine maps `x -> a x + b` as `[[a, b], [0, 1]]`, with `a = 2` w.p. 1/4,
/// `a = 1/2` w.p. 3/4, and `b` uniform on `{0, 1}`.
pub fn dyadic_affine() -> MeasureSpec {
    let atom = |a: Rational, b: i64| {
        RationalMatrix::from_rows(vec![vec![a, int(b)], vec![int(0), int(1)]]).unwrap()
    };
    MeasureSpec::new(
        "dyadic_affine",
        [
            (r(1, 8), atom(int(2), 0)),
            (r(1, 8), atom(int(2), 1)),
            (r(3, 8), atom(r(1, 2), 0)),
            (r(3, 8), atom(r(1, 2), 1)),
        ],
    )
    .expect("valid")
}

/// Uniform on all `d!` permutation matrices.
pub fn permutations(d: usize) -> MeasureSpec {
    let atoms = (0..d)
        .permutations(d)
        .map(|perm| {
            let mut m = RationalMatrix::zeros(d, d);
            for (c, &row) in perm.iter().enumerate() {
                m[(row, c)] = int(1);
            }
            m
        })
        .collect();
    MeasureSpec::uniform("permutations", atoms).expect("invertible")
}

/// `diag(2, 1)` and `diag(1/2, 1)` with weight 1/2 each (a commuting pair).
pub fn commuting_pair() -> MeasureSpec {
    MeasureSpec::uniform(
        "commuting_pair",
        vec![
            RationalMatrix::diagonal(vec![int(2), int(1)]),
            RationalMatrix::diagonal(vec![r(1, 2), int(1)]),
        ],
    )
    .expect("invertible")
}
