use num_traits::Zero;

use crate::error::{Error, Result};
use crate::places::{valuation, Prime};
use crate::{Rational, RationalMatrix};

/// `g = k1 * d * k2` with `k1`, `k2` in `GL_d(Z_(p))` and `d = diag(p^a_i)`,
/// `a_1 <= ... <= a_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanDecomposition {
    pub prime: Prime,
    pub k1: RationalMatrix,
    pub d: RationalMatrix,
    pub k2: RationalMatrix,
    /// Valuations of the diagonal of `d`, ascending.
    pub valuations: Vec<i64>,
}

impl CartanDecomposition {
    pub fn reconstruct(&self) -> RationalMatrix {
        &(&self.k1 * &self.d) * &self.k2
    }
}

/// True when every entry is a `p`-adic integer and the determinant is a unit.
pub fn is_isometry(k: &RationalMatrix, p: Prime) -> bool {
    let integral = k
        .entries()
        .all(|x| x.is_zero() || valuation(x, p).is_ok_and(|v| v >= 0));
    integral
        && k.determinant()
            .ok()
            .filter(|d| !d.is_zero())
            .is_some_and(|d| valuation(&d, p) == Ok(0))
}

fn pow_p(p: Prime, e: i64) -> Rational {
    let base = Rational::from_integer(p.to_bigint());
    num_traits::pow::Pow::pow(base, e)
}

/// Cartan decomposition by elimination with minimal-valuation pivoting
/// (ties broken row-major). Each elementary step multiplies by a matrix of
/// `GL_d(Z_(p))`, so the accumulated outer factors stay isometries.
pub fn cartan_decompose(g: &RationalMatrix, p: Prime) -> Result<CartanDecomposition> {
    if !g.is_square() {
        return Err(Error::dims("square", format!("{}x{}", g.rows(), g.cols())));
    }
    let n = g.rows();
    let mut a = g.clone();
    let mut left = RationalMatrix::identity(n);
    let mut right = RationalMatrix::identity(n);
    let mut valuations = Vec::with_capacity(n);

    for t in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for r in t..n {
            for c in t..n {
                let x = &a[(r, c)];
                if x.is_zero() {
                    continue;
                }
                let v = valuation(x, p)?;
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, r, c));
                }
            }
        }
        let (v, pr, pc) = best.ok_or(Error::Singular)?;
        if pr != t {
            for c in 0..n {
                let tmp = a[(t, c)].clone();
                a[(t, c)] = a[(pr, c)].clone();
                a[(pr, c)] = tmp;
                let tmp = left[(c, t)].clone();
                left[(c, t)] = left[(c, pr)].clone();
                left[(c, pr)] = tmp;
            }
        }
        if pc != t {
            for r in 0..n {
                let tmp = a[(r, t)].clone();
                a[(r, t)] = a[(r, pc)].clone();
                a[(r, pc)] = tmp;
                let tmp = right[(t, r)].clone();
                right[(t, r)] = right[(pc, r)].clone();
                right[(pc, r)] = tmp;
            }
        }
        let pivot = a[(t, t)].clone();
        for i in t + 1..n {
            if a[(i, t)].is_zero() {
                continue;
            }
            let m = &a[(i, t)] / &pivot;
            for c in t..n {
                let v = &a[(i, c)] - &m * &a[(t, c)];
                a[(i, c)] = v;
            }
            // left <- left * (I + m e_i e_t^T)
            for r in 0..n {
                let v = &left[(r, t)] + &m * &left[(r, i)];
                left[(r, t)] = v;
            }
        }
        for j in t + 1..n {
            if a[(t, j)].is_zero() {
                continue;
            }
            let m = &a[(t, j)] / &pivot;
            a[(t, j)] = Rational::zero();
            // right <- (I + m e_t e_j^T) * right
            for c in 0..n {
                let v = &right[(t, c)] + &m * &right[(j, c)];
                right[(t, c)] = v;
            }
        }
        // pivot = unit * p^v; the unit moves into the left factor
        let unit = &pivot / pow_p(p, v);
        for r in 0..n {
            left[(r, t)] = &left[(r, t)] * &unit;
        }
        a[(t, t)] = pow_p(p, v);
        valuations.push(v);
    }

    Ok(CartanDecomposition {
        prime: p,
        k1: left,
        d: a,
        k2: right,
        valuations,
    })
}

/// Valuations `a_1 <= ... <= a_d` of the elementary divisors of `g` over `Z_(p)`.
pub fn smith_valuations(g: &RationalMatrix, p: Prime) -> Result<Vec<i64>> {
    Ok(cartan_decompose(g, p)?.valuations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::rational::q;

    fn m(rows: &[&[&str]]) -> RationalMatrix {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| q(s)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn two() -> Prime {
        Prime::new(2).unwrap()
    }

    #[test]
    fn smith_examples() {
        assert_eq!(
            smith_valuations(&RationalMatrix::identity(3), two()),
            Ok(vec![0, 0, 0])
        );
        assert_eq!(
            smith_valuations(&m(&[&["2", "1"], &["0", "2"]]), two()),
            Ok(vec![0, 2])
        );
        assert_eq!(
            smith_valuations(&m(&[&["1/2", "0"], &["0", "4"]]), two()),
            Ok(vec![-1, 2])
        );
        assert_eq!(
            smith_valuations(&m(&[&["1", "1"], &["1", "1"]]), two()),
            Err(Error::Singular)
        );
    }

    #[test]
    fn cartan_examples() {
        let id = RationalMatrix::identity(2);
        let c = cartan_decompose(&id, two()).unwrap();
        assert_eq!(
            (c.k1.clone(), c.d.clone(), c.k2.clone()),
            (id.clone(), id.clone(), id)
        );

        let g = m(&[&["4", "0"], &["0", "1"]]);
        let c = cartan_decompose(&g, two()).unwrap();
        let swap = m(&[&["0", "1"], &["1", "0"]]);
        assert_eq!(c.d, m(&[&["1", "0"], &["0", "4"]]));
        assert_eq!(c.k1, swap);
        assert_eq!(c.k2, swap);
        assert_eq!(c.reconstruct(), g);

        let g = m(&[&["2", "1"], &["0", "2"]]);
        let c = cartan_decompose(&g, two()).unwrap();
        assert_eq!(c.d, m(&[&["1", "0"], &["0", "4"]]));
        assert_eq!(c.reconstruct(), g);
        assert!(is_isometry(&c.k1, two()) && is_isometry(&c.k2, two()));
    }

    #[test]
    fn cartan_units_move_left() {
        let g = m(&[&["-3/5", "7"], &["1/3", "2/9"]]);
        for p in [2, 3, 5, 7] {
            let p = Prime::new(p).unwrap();
            let c = cartan_decompose(&g, p).unwrap();
            assert_eq!(c.reconstruct(), g);
            assert!(is_isometry(&c.k1, p), "{p}");
            assert!(is_isometry(&c.k2, p), "{p}");
            assert!(c.valuations.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(!is_isometry(&m(&[&["2", "0"], &["0", "1"]]), two()));
        assert!(!is_isometry(&m(&[&["1/2", "0"], &["0", "1"]]), two()));
    }
}
