use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::matrix::{lcm_u64, IntMatrix, UnimodularMatrix};
use super::polynomial::{char_poly, is_product_of_cyclotomics, CyclotomicVerdict};

/// Multiplicative order of an element of GL(n,Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixOrder {
    Finite(u64),
    Infinite,
}

impl MatrixOrder {
    pub fn is_finite(&self) -> bool {
        matches!(self, MatrixOrder::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            MatrixOrder::Finite(m) => Some(*m),
            MatrixOrder::Infinite => None,
        }
    }
}

/// lcm of the cyclotomic orders of the characteristic polynomial, or
/// `None` when some eigenvalue is not a root of unity.
pub fn cyclotomic_exponent(a: &IntMatrix) -> Option<u64> {
    match is_product_of_cyclotomics(&char_poly(a)) {
        CyclotomicVerdict::Yes { orders } => Some(orders.into_iter().fold(1, lcm_u64)),
        CyclotomicVerdict::No { .. } => None,
    }
}

/// Smallest `m >= 1` with `A^m = Id`, or `Infinite`.
///
/// A finite order forces the characteristic polynomial to be a product of
/// cyclotomics, and then the order divides the lcm `L` of their orders
/// (the matrix is diagonalizable over C with eigenvalues L-th roots of
/// unity). So only `A^L` and its divisor powers need testing.
pub fn order_of(a: &IntMatrix) -> MatrixOrder {
    let Some(l) = cyclotomic_exponent(a) else {
        return MatrixOrder::Infinite;
    };
    if !a.pow(l).is_identity() {
        return MatrixOrder::Infinite;
    }
    MatrixOrder::Finite(minimize_exponent(l, |m| a.pow(m).is_identity()))
}

pub fn matrix_order(t: &UnimodularMatrix) -> MatrixOrder {
    order_of(t.matrix())
}

/// Smallest divisor `m` of `l` with `holds(m)`, given `holds(l)` and that
/// the set of valid exponents is closed under gcd.
pub(crate) fn minimize_exponent(mut l: u64, holds: impl Fn(u64) -> bool) -> u64 {
    let mut primes = Vec::new();
    let mut x = l;
    let mut p = 2;
    while p * p <= x {
        if x % p == 0 {
            primes.push(p);
            while x % p == 0 {
                x /= p;
            }
        }
        p += 1;
    }
    if x > 1 {
        primes.push(x);
    }
    for q in primes {
        while l % q == 0 && holds(l / q) {
            l /= q;
        }
    }
    l
}

/// `(A - Id)^n = 0`.
pub fn is_unipotent(a: &IntMatrix) -> bool {
    let n = a.rows();
    a.sub_scalar(&BigInt::from(1)).pow(n as u64).is_zero()
}

/// Smallest `m >= 1` with `A^m` unipotent, when all eigenvalues are roots
/// of unity.
pub fn unipotent_exponent(a: &IntMatrix) -> Option<u64> {
    let l = cyclotomic_exponent(a)?;
    debug_assert!(is_unipotent(&a.pow(l)));
    Some(minimize_exponent(l, |m| is_unipotent(&a.pow(m))))
}

/// The k-th exterior power `Λ^k A` in the lexicographic basis of k-subsets:
/// entry `(I, J)` is the minor of `A` on rows `I` and columns `J`.
pub fn exterior_power(a: &IntMatrix, k: usize) -> IntMatrix {
    assert!(a.is_square());
    let subsets = k_subsets(a.rows(), k);
    let d = subsets.len();
    let mut out = IntMatrix::zeros(d, d);
    for (i, rows) in subsets.iter().enumerate() {
        for (j, cols) in subsets.iter().enumerate() {
            out.set(i, j, minor(a, rows, cols));
        }
    }
    out
}

/// Plücker coordinates of the row span of `rows` (k x n), lexicographic.
pub fn plucker(rows: &[Vec<BigInt>], n: usize) -> Vec<BigInt> {
    let k = rows.len();
    if k == 0 {
        return vec![BigInt::from(1)];
    }
    let m = IntMatrix::from_rows(rows).expect("nonempty");
    let all: Vec<usize> = (0..k).collect();
    k_subsets(n, k)
        .iter()
        .map(|cols| minor(&m, &all, cols))
        .collect()
}

pub(crate) fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn minor(a: &IntMatrix, rows: &[usize], cols: &[usize]) -> BigInt {
    if rows.is_empty() {
        return BigInt::from(1);
    }
    let sub: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| a.get(i, j).clone()).collect())
        .collect();
    let m = IntMatrix::from_rows(&sub).expect("nonempty minor");
    let d = m.det();
    if d.is_zero() {
        BigInt::zero()
    } else {
        d
    }
}
