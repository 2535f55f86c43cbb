use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{IntMatrix, UnimodularMatrix};
use crate::error::{Error, Result};

/// A sublattice of Z^n, stored by its canonical row-style Hermite normal
/// form basis: echelon rows, positive pivots, and entries above each pivot
/// reduced into `[0, pivot)`. Two lattices are equal as sets iff their
/// stored bases are identical.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    ambient_dim: usize,
    basis: Vec<Vec<BigInt>>,
}

impl Lattice {
    /// The canonical lattice spanned by `rows` (which may be dependent or
    /// empty).
    pub fn from_generators(ambient_dim: usize, rows: &[Vec<BigInt>]) -> Result<Self> {
        for r in rows {
            if r.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: r.len(),
                });
            }
        }
        Ok(Lattice {
            ambient_dim,
            basis: hnf_rows(rows.to_vec(), ambient_dim),
        })
    }

    /// Accepts a basis only if it already is the canonical HNF.
    pub fn from_canonical_basis(ambient_dim: usize, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let l = Self::from_generators(ambient_dim, &rows)?;
        if l.basis != rows {
            return Err(Error::NonCanonicalBasis);
        }
        Ok(l)
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Lattice {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Lattice {
            ambient_dim,
            basis: IntMatrix::identity(ambient_dim).to_rows(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Basis as a matrix; `None` for the rank-0 lattice.
    pub fn basis_matrix(&self) -> Option<IntMatrix> {
        if self.basis.is_empty() {
            None
        } else {
            IntMatrix::from_rows(&self.basis).ok()
        }
    }

    /// Exact membership test by echelon reduction against the basis.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Integer coordinates of `v` in the stored basis, if `v` is a member.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.ambient_dim);
        let mut w = v.to_vec();
        let mut coords = Vec::with_capacity(self.basis.len());
        for row in &self.basis {
            let c = pivot_col(row).expect("basis rows are nonzero");
            if w[..c].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let (q, r) = w[c].div_rem(&row[c]);
            if !r.is_zero() {
                return None;
            }
            if !q.is_zero() {
                axpy(&mut w, &q, row);
            }
            coords.push(q);
        }
        if w.iter().all(Zero::is_zero) {
            Some(coords)
        } else {
            None
        }
    }

    /// `sum_i x_i * basis_i`.
    pub fn combine(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.basis.len());
        let mut out = vec![BigInt::zero(); self.ambient_dim];
        for (xi, row) in x.iter().zip(&self.basis) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += xi * r;
            }
        }
        out
    }

    /// True iff every basis vector of `other` lies in `self`.
    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// Image under the column action `v -> T v`.
    pub fn transform(&self, t: &UnimodularMatrix) -> Lattice {
        assert_eq!(t.n(), self.ambient_dim);
        let rows: Vec<Vec<BigInt>> = self.basis.iter().map(|v| t.mul_vec(v)).collect();
        Lattice {
            ambient_dim: self.ambient_dim,
            basis: hnf_rows(rows, self.ambient_dim),
        }
    }

    /// Largest squared Euclidean norm of a basis row (0 for rank 0).
    pub fn max_basis_norm_sq(&self) -> BigInt {
        self.basis
            .iter()
            .map(|r| r.iter().map(|x| x * x).sum::<BigInt>())
            .max()
            .unwrap_or_default()
    }

    pub fn is_saturated(&self) -> bool {
        saturate(self) == *self
    }
}

/// Canonical HNF of the row span of `m`.
pub fn hnf(m: &IntMatrix) -> Lattice {
    Lattice {
        ambient_dim: m.cols(),
        basis: hnf_rows(m.to_rows(), m.cols()),
    }
}

fn pivot_col(row: &[BigInt]) -> Option<usize> {
    row.iter().position(|x| !x.is_zero())
}

fn axpy(target: &mut [BigInt], q: &BigInt, src: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(src) {
        *t -= q * s;
    }
}

/// Row-style Hermite normal form by Euclidean elimination per column.
pub(crate) fn hnf_rows(mut rows: Vec<Vec<BigInt>>, n: usize) -> Vec<Vec<BigInt>> {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    let m = rows.len();
    let mut r = 0;
    for col in 0..n {
        if r == m {
            break;
        }
        loop {
            // smallest nonzero |entry| in this column at or below r
            let best = (r..m)
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let Some(p) = best else { break };
            rows.swap(r, p);
            let mut done = true;
            for i in r + 1..m {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[r][col]);
                let pivot_row = rows[r].clone();
                axpy(&mut rows[i], &q, &pivot_row);
                if !rows[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m && !rows[r][col].is_zero() {
            if rows[r][col].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -&*x;
                }
            }
            let pivot_row = rows[r].clone();
            for i in 0..r {
                let q = rows[i][col].div_floor(&pivot_row[col]);
                if !q.is_zero() {
                    axpy(&mut rows[i], &q, &pivot_row);
                }
            }
            r += 1;
        }
    }
    rows.truncate(r);
    debug_assert!(rows.iter().all(|row| row.iter().any(|x| !x.is_zero())));
    rows
}

/// `{x in Z^n : row . x = 0 for every row}`, canonical and saturated.
pub fn integer_kernel(rows: &[Vec<BigInt>], n: usize) -> Lattice {
    let k = rows.len();
    if k == 0 {
        return Lattice::full(n);
    }
    let aug: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            let mut v: Vec<BigInt> = rows.iter().map(|r| r[j].clone()).collect();
            v.extend((0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            v
        })
        .collect();
    let h = hnf_rows(aug, k + n);
    let kernel: Vec<Vec<BigInt>> = h
        .into_iter()
        .filter(|r| r[..k].iter().all(Zero::is_zero))
        .map(|r| r[k..].to_vec())
        .collect();
    Lattice {
        ambient_dim: n,
        basis: hnf_rows(kernel, n),
    }
}

/// Integer kernel of the column action of a square matrix: `{x : A x = 0}`.
pub fn matrix_kernel(a: &IntMatrix) -> Lattice {
    integer_kernel(&a.to_rows(), a.cols())
}

/// Saturation `(span_R L) ∩ Z^n`, computed as the kernel of the kernel.
pub fn saturate(l: &Lattice) -> Lattice {
    let n = l.ambient_dim;
    let ann = integer_kernel(&l.basis, n);
    integer_kernel(&ann.basis, n)
}
