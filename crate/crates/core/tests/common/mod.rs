#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use toral::linalg::UnimodularMatrix;

pub fn m(rows: &[Vec<i64>]) -> UnimodularMatrix {
    UnimodularMatrix::from_rows(rows).unwrap()
}

pub fn cat() -> UnimodularMatrix {
    m(&[vec![2, 1], vec![1, 1]])
}

pub fn shear() -> UnimodularMatrix {
    m(&[vec![1, 1], vec![0, 1]])
}

pub fn rotation() -> UnimodularMatrix {
    m(&[vec![0, -1], vec![1, 0]])
}

pub fn swap() -> UnimodularMatrix {
    m(&[vec![0, 1], vec![1, 0]])
}

/// Companion matrix of x^3 - x - 1.
pub fn companion() -> UnimodularMatrix {
    m(&[vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 0]])
}

/// Elementary transvections and their inverses, a coordinate sign flip,
/// and a cyclic coordinate permutation.
pub fn generators(n: usize) -> Vec<UnimodularMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                for s in [1i64, -1] {
                    let mut rows: Vec<Vec<i64>> = (0..n)
                        .map(|r| (0..n).map(|c| i64::from(r == c)).collect())
                        .collect();
                    rows[i][j] = s;
                    out.push(m(&rows));
                }
            }
        }
    }
    let mut flip: Vec<Vec<i64>> = (0..n)
        .map(|r| (0..n).map(|c| i64::from(r == c)).collect())
        .collect();
    flip[0][0] = -1;
    out.push(m(&flip));
    let cycle: Vec<Vec<i64>> = (0..n)
        .map(|r| (0..n).map(|c| i64::from(c == (r + 1) % n)).collect())
        .collect();
    out.push(m(&cycle));
    out
}

pub fn random_word<R: Rng>(rng: &mut R, n: usize, max_len: usize) -> UnimodularMatrix {
    let gens = generators(n);
    let len = rng.gen_range(1..=max_len);
    (0..len).fold(UnimodularMatrix::identity(n), |acc, _| {
        acc.compose(&gens[rng.gen_range(0..gens.len())])
    })
}

pub fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Sign normalization used by the oracles: first nonzero entry positive.
pub fn canon(v: Vec<BigInt>) -> Vec<BigInt> {
    let neg = v
        .iter()
        .find(|x| **x != BigInt::from(0))
        .is_some_and(|x| *x < BigInt::from(0));
    if neg {
        v.into_iter().map(|x| -x).collect()
    } else {
        v
    }
}

/// `T^k = I` for some `1 <= k <= 12`, by repeated multiplication.
/// Finite orders in GL(2,Z) and GL(3,Z) are 1, 2, 3, 4 or 6.
pub fn finite_order_by_powering(t: &UnimodularMatrix) -> Option<u64> {
    let mut p = t.clone();
    for k in 1..=12 {
        if p.is_identity() {
            return Some(k);
        }
        p = p.compose(t);
    }
    None
}

/// `S^k v = ±v` for some `1 <= k <= 12`. Periodic vectors of integer
/// matrices of size at most 3 have period at most 6.
pub fn periodic_by_scan(s: &UnimodularMatrix, v: &[BigInt]) -> bool {
    let start = canon(v.to_vec());
    let mut y = v.to_vec();
    for _ in 0..12 {
        y = s.mul_vec(&y);
        if canon(y.clone()) == start {
            return true;
        }
    }
    false
}

/// All primitive vectors with first nonzero entry positive and squared
/// norm at most `r2`, by direct enumeration.
pub fn primitive_vectors(n: usize, r2: i64) -> Vec<Vec<BigInt>> {
    let b = (r2 as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    let mut cur = vec![-b; n];
    loop {
        let ns: i64 = cur.iter().map(|x| x * x).sum();
        let g = cur.iter().fold(0i64, |g, &x| gcd(g, x.abs()));
        let first_pos = cur.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
        if ns > 0 && ns <= r2 && g == 1 && first_pos {
            out.push(big(&cur));
        }
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < b {
                cur[k] += 1;
                break;
            }
            cur[k] = -b;
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
