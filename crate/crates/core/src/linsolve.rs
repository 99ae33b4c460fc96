//! Exact linear algebra over the rationals via fraction-free (Bareiss)
//! elimination on integer-scaled rows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::polyalg::Rat;

/// Row echelon form computed without fractions.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn integer_row(row: &[Rat]) -> Vec<BigInt> {
    let den = row
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    row.iter()
        .map(|c| c.numer() * (&den / c.denom()))
        .collect()
}

/// Bareiss elimination. Each row is first scaled to integers; every
/// subsequent update divides exactly by the previous pivot.
pub fn echelon(rows: &[Vec<Rat>], cols: usize) -> Echelon {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), cols, "ragged matrix");
            integer_row(r)
        })
        .collect();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut k = 0;
    for col in 0..cols {
        if k == a.len() {
            break;
        }
        let Some(p) = (k..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(k, p);
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pivot = &pivot_row[col];
        for row in tail.iter_mut() {
            let factor = row[col].clone();
            for j in col..cols {
                let num = pivot * &row[j] - &factor * &pivot_row[j];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                row[j] = q;
            }
            for entry in row[..col].iter_mut() {
                *entry = BigInt::zero();
            }
        }
        prev = pivot.clone();
        pivots.push(col);
        k += 1;
    }
    a.truncate(pivots.len());
    Echelon { rows: a, pivots, cols }
}

/// Basis of `{v : A v = 0}`, one vector per free column. The vector for free
/// column `f` has `v[f] = 1` and zeros at the other free columns.
pub fn nullspace(rows: &[Vec<Rat>], cols: usize) -> Vec<Vec<Rat>> {
    let ech = echelon(rows, cols);
    let is_pivot = {
        let mut v = vec![false; cols];
        for &p in &ech.pivots {
            v[p] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![Rat::zero(); cols];
        x[free] = Rat::one();
        for (k, &pc) in ech.pivots.iter().enumerate().rev() {
            let row = &ech.rows[k];
            let mut acc = Rat::zero();
            for j in pc + 1..cols {
                if !row[j].is_zero() && !x[j].is_zero() {
                    acc += Rat::from_integer(row[j].clone()) * &x[j];
                }
            }
            x[pc] = -acc / Rat::from_integer(row[pc].clone());
        }
        basis.push(x);
    }
    basis
}

pub fn rank(rows: &[Vec<Rat>], cols: usize) -> usize {
    echelon(rows, cols).rank()
}

/// Scales a rational vector to coprime integers with a positive first nonzero
/// entry.
pub fn normalize(v: &[Rat]) -> Vec<Rat> {
    let ints = integer_row(v);
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = match ints.iter().find(|c| !c.is_zero()) {
        Some(c) if *c < BigInt::zero() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|c| Rat::from_integer(c / &g * &sign))
        .collect()
}
