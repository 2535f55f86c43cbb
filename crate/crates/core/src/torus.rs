//! Subtori of the n-torus `R^n / Z^n`.
//!
//! A subtorus is the image of a rational subspace `W`, and is stored as the
//! saturated lattice `W ∩ Z^n` in canonical Hermite normal form. Rank 0 is
//! the trivial subgroup and rank n the whole torus; together these are all
//! the closed subgroups reachable as limits of one-parameter subgroups.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{content, dot, integer_kernel, norm_sq, saturate, IntMatrix, Lattice};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subtorus {
    lat: Lattice,
}

impl Subtorus {
    /// Image of the real span of `vectors`: `saturate(hnf(vectors))`.
    pub fn from_generators(ambient_dim: usize, vectors: &[Vec<BigInt>]) -> Result<Self> {
        let l = Lattice::from_generators(ambient_dim, vectors)?;
        Ok(Subtorus { lat: saturate(&l) })
    }

    pub fn from_i64(ambient_dim: usize, vectors: &[Vec<i64>]) -> Result<Self> {
        let v: Vec<Vec<BigInt>> = vectors
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_generators(ambient_dim, &v)
    }

    /// Wraps a lattice that must already be saturated.
    pub fn from_lattice(lat: Lattice) -> Result<Self> {
        if !lat.is_saturated() {
            return Err(Error::NotSaturated);
        }
        Ok(Subtorus { lat })
    }

    pub(crate) fn from_saturated_unchecked(lat: Lattice) -> Self {
        debug_assert!(lat.is_saturated());
        Subtorus { lat }
    }

    pub fn trivial(n: usize) -> Self {
        Subtorus {
            lat: Lattice::zero(n),
        }
    }

    pub fn full(n: usize) -> Self {
        Subtorus {
            lat: Lattice::full(n),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.lat.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.lat.rank()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    pub fn is_hyperplane(&self) -> bool {
        self.dim() + 1 == self.ambient_dim()
    }
}

/// A primitive integer covector (character of the torus) with its first
/// nonzero entry positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveCovector {
    gamma: Vec<BigInt>,
}

impl PrimitiveCovector {
    /// Divides by the content and fixes the sign.
    pub fn canonical(v: Vec<BigInt>) -> Result<Self> {
        let g = content(&v);
        if g.is_zero() {
            return Err(Error::ZeroVector);
        }
        let first_neg = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
        let g = if first_neg { -g } else { g };
        Ok(PrimitiveCovector {
            gamma: v.into_iter().map(|x| x / &g).collect(),
        })
    }

    /// Accepts only vectors that are already primitive and sign-canonical.
    pub fn new(v: Vec<BigInt>) -> Result<Self> {
        let c = Self::canonical(v.clone())?;
        if c.gamma != v {
            return Err(Error::NonCanonicalCovector);
        }
        Ok(c)
    }

    pub fn from_i64(v: &[i64]) -> Result<Self> {
        Self::canonical(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.gamma
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.gamma
    }

    pub fn ambient_dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn norm_sq(&self) -> BigInt {
        norm_sq(&self.gamma)
    }
}

/// Sign-canonical form of a nonzero vector without dividing by content.
pub(crate) fn sign_canonical(mut v: Vec<BigInt>) -> Vec<BigInt> {
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -&*x;
        }
    }
    v
}

/// Characters vanishing on `h`: a saturated lattice of rank `n - dim h`.
pub fn annihilator(h: &Subtorus) -> Lattice {
    integer_kernel(h.lat.basis(), h.ambient_dim())
}

/// The subtorus annihilated by a lattice of characters.
pub fn subtorus_annihilated_by(chars: &Lattice) -> Subtorus {
    Subtorus {
        lat: integer_kernel(chars.basis(), chars.ambient_dim()),
    }
}

pub fn hyperplane_to_covector(h: &Subtorus) -> Result<PrimitiveCovector> {
    let n = h.ambient_dim();
    if !h.is_hyperplane() {
        return Err(Error::WrongSubtorusDimension {
            expected: n.saturating_sub(1),
            got: h.dim(),
        });
    }
    let ann = annihilator(h);
    PrimitiveCovector::canonical(ann.basis()[0].clone())
}

pub fn covector_to_hyperplane(gamma: &PrimitiveCovector) -> Subtorus {
    Subtorus {
        lat: integer_kernel(&[gamma.gamma.clone()], gamma.ambient_dim()),
    }
}

/// `h2 ⊆ h1`.
pub fn contains(h1: &Subtorus, h2: &Subtorus) -> bool {
    assert_eq!(h1.ambient_dim(), h2.ambient_dim());
    // h1 is saturated, so lattice containment is subgroup containment
    h1.lat.contains_lattice(&h2.lat)
}

/// All primitive sign-canonical covectors of squared norm at most
/// `max_norm_sq`, ordered by (squared norm, lexicographic).
pub fn primitive_covectors(n: usize, max_norm_sq: u64) -> Vec<PrimitiveCovector> {
    let b = (max_norm_sq as f64).sqrt().floor() as i64;
    let mut out = Vec::new();
    let mut cur = vec![-b; n];
    loop {
        let ns: i64 = cur.iter().map(|x| x * x).sum();
        if ns as u64 <= max_norm_sq && ns > 0 {
            let first_pos = cur.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
            let g = cur.iter().fold(0i64, |g, &x| g.gcd(&x));
            if first_pos && g == 1 {
                out.push((ns, cur.clone()));
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                out.sort();
                return out
                    .into_iter()
                    .map(|(_, v)| PrimitiveCovector {
                        gamma: v.into_iter().map(BigInt::from).collect(),
                    })
                    .collect();
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

/// All subtori of dimension `n - rank` whose canonical annihilator basis
/// has every row of squared norm at most `max_norm_sq`.
///
/// Every row of a basis of a saturated lattice is primitive, so the HNF
/// rows are among the enumerated covectors and the search is complete.
pub fn subtori_with_annihilator_rank(n: usize, rank: usize, max_norm_sq: u64) -> Vec<Subtorus> {
    if rank == 0 {
        return vec![Subtorus::full(n)];
    }
    let cands = primitive_covectors(n, max_norm_sq);
    let bound = BigInt::from(max_norm_sq);
    let mut seen = BTreeSet::new();
    let mut idx: Vec<usize> = (0..rank).collect();
    if cands.len() < rank {
        return Vec::new();
    }
    loop {
        let rows: Vec<Vec<BigInt>> = idx.iter().map(|&i| cands[i].gamma.clone()).collect();
        let lat = saturate(&Lattice::from_generators(n, &rows).expect("dims"));
        if lat.rank() == rank && lat.max_basis_norm_sq() <= bound {
            seen.insert(lat);
        }
        // next combination
        let mut k = rank;
        loop {
            if k == 0 {
                return seen
                    .into_iter()
                    .map(|a| subtorus_annihilated_by(&a))
                    .collect();
            }
            k -= 1;
            if idx[k] < cands.len() - rank + k {
                idx[k] += 1;
                for j in k + 1..rank {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A distance estimate whose true value lies within
/// `[value - error_bound, value + error_bound]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub resolution: f64,
}

impl MetricEstimate {
    pub fn lower(&self) -> f64 {
        (self.value - self.error_bound).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }
}

/// Slack for floating-point evaluation of the distance function.
const FLOAT_SLACK: f64 = 1e-9;
/// Refuse grids larger than this many sample points.
const MAX_SAMPLES: u128 = 50_000_000;

/// Hausdorff distance between two subtori for the flat metric on
/// `R^n / Z^n` induced by the Euclidean norm.
///
/// Each side's one-sided distance `sup_{x in A} d(x, B)` is sampled on the
/// uniform parameter grid of `A`'s lattice basis. The distance function is
/// 1-Lipschitz, so the sampled maximum is within the grid covering radius
/// of the supremum; the grid is sized so that half of that radius is at
/// most `resolution`. Distances to `B` are exact closest-vector searches in
/// the projected lattice, computed in floating point.
pub fn hausdorff_distance(h1: &Subtorus, h2: &Subtorus, resolution: f64) -> Result<MetricEstimate> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidResolution);
    }
    if h1.ambient_dim() != h2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: h1.ambient_dim(),
            got: h2.ambient_dim(),
        });
    }
    if h1 == h2 {
        return Ok(MetricEstimate {
            value: 0.0,
            error_bound: 0.0,
            resolution,
        });
    }
    let (lo1, hi1) = one_sided(h1, h2, resolution)?;
    let (lo2, hi2) = one_sided(h2, h1, resolution)?;
    let lo = lo1.max(lo2);
    let hi = hi1.max(hi2);
    Ok(MetricEstimate {
        value: (lo + hi) / 2.0,
        error_bound: (hi - lo) / 2.0 + FLOAT_SLACK,
        resolution,
    })
}

/// Interval enclosing `sup_{x in a} d(x, b)`.
fn one_sided(a: &Subtorus, b: &Subtorus, resolution: f64) -> Result<(f64, f64)> {
    if contains(b, a) {
        return Ok((0.0, 0.0));
    }
    let ann = annihilator(b);
    let chars = ann.basis();
    let m = chars.len();
    let basis = a.lattice().basis();
    let k = basis.len();
    // Covector values of the basis of `a` and the Gram inverse of `ann`.
    let pairing: Vec<Vec<BigInt>> = chars
        .iter()
        .map(|g| basis.iter().map(|v| dot(g, v)).collect())
        .collect();
    let gram = IntMatrix::from_rows(
        &chars
            .iter()
            .map(|g| chars.iter().map(|h| dot(g, h)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
    .expect("annihilator is nonzero here");
    let ginv: Vec<Vec<f64>> = gram
        .rational_inverse()
        .expect("annihilator basis is independent")
        .into_iter()
        .map(|r| r.into_iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let gdiag: Vec<f64> = (0..m).map(|i| gram.get(i, i).to_f64().unwrap_or(f64::MAX)).collect();

    let lengths: f64 = basis
        .iter()
        .map(|v| norm_sq(v).to_f64().unwrap_or(f64::MAX).sqrt())
        .sum();
    let steps = ((lengths / (4.0 * resolution)).ceil() as u64).max(1);
    let total = (steps as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > MAX_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "sampling grid of {total} points exceeds the limit; increase resolution"
        )));
    }
    let nb = BigInt::from(steps);
    let residues: Vec<Vec<u128>> = pairing
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x.mod_floor(&nb).to_u128().expect("reduced mod steps"))
                .collect()
        })
        .collect();

    let mut best_max = 0.0f64;
    let mut idx = vec![0u64; k];
    let mut c = vec![0.0f64; m];
    loop {
        for (i, row) in residues.iter().enumerate() {
            let s: u128 = row.iter().zip(&idx).map(|(r, &s)| r * s as u128).sum();
            c[i] = (s % steps as u128) as f64 / steps as f64;
        }
        let d = distance_to_lattice(&c, &ginv, &gdiag);
        if d > best_max {
            best_max = d;
        }
        let mut j = 0;
        loop {
            if j == k {
                let covering = lengths / (2.0 * steps as f64);
                return Ok((best_max, best_max + covering));
            }
            idx[j] += 1;
            if idx[j] < steps {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// `min_z sqrt((c - z)^T G^{-1} (c - z))`: Euclidean distance from a point
/// with coordinates `c` to the projected integer lattice, whose dual is the
/// annihilator with Gram matrix `G`.
fn distance_to_lattice(c: &[f64], ginv: &[Vec<f64>], gdiag: &[f64]) -> f64 {
    let m = c.len();
    let q = |y: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += y[i] * ginv[i][j] * y[j];
            }
        }
        s.max(0.0)
    };
    let center: Vec<f64> = c.iter().map(|x| x.round()).collect();
    let y0: Vec<f64> = c.iter().zip(&center).map(|(a, b)| a - b).collect();
    let mut best = q(&y0);
    let r = best.sqrt();
    // |y_i| <= r * sqrt(G_ii) on the ellipsoid y^T G^{-1} y <= r^2
    let radius: Vec<i64> = gdiag
        .iter()
        .map(|g| (r * g.sqrt() + 1.0).ceil() as i64)
        .collect();
    let mut off: Vec<i64> = radius.iter().map(|r| -r).collect();
    let mut y = vec![0.0; m];
    loop {
        for i in 0..m {
            y[i] = y0[i] - off[i] as f64;
        }
        let v = q(&y);
        if v < best {
            best = v;
        }
        let mut j = 0;
        loop {
            if j == m {
                return best.sqrt();
            }
            off[j] += 1;
            if off[j] <= radius[j] {
                break;
            }
            off[j] = -radius[j];
            j += 1;
        }
    }
}

/// Certified lower bound on the distance from `h` to every other subtorus
/// of dimension at least `dim h` whose annihilator basis rows have norm at
/// most `norm_cap`. The bound is only relative to that enumeration cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationReport {
    pub norm_cap: u64,
    pub resolution: f64,
    pub compared: usize,
    /// Minimum over the compared subtori of `value - error_bound`.
    pub lower_bound: f64,
    /// Largest metric error bound among the comparisons.
    pub max_error_bound: f64,
    pub nearest: Subtorus,
    pub nearest_estimate: MetricEstimate,
}

pub fn isolation_radius_lower_bound(
    h: &Subtorus,
    norm_cap: u64,
    resolution: f64,
) -> Result<IsolationReport> {
    let n = h.ambient_dim();
    if h.is_trivial() || h.is_full() {
        return Err(Error::NotProperSubtorus);
    }
    if norm_cap == 0 {
        return Err(Error::InvalidParameter("norm cap must be positive".into()));
    }
    let cap_sq = norm_cap * norm_cap;
    let mut best: Option<(f64, Subtorus, MetricEstimate)> = None;
    let mut compared = 0;
    let mut max_err: f64 = 0.0;
    for rank in 0..=(n - h.dim()) {
        for other in subtori_with_annihilator_rank(n, rank, cap_sq) {
            if other == *h {
                continue;
            }
            let est = hausdorff_distance(h, &other, resolution)?;
            compared += 1;
            max_err = max_err.max(est.error_bound);
            let lb = est.value - est.error_bound;
            if best.as_ref().map_or(true, |b| lb < b.0) {
                best = Some((lb, other, est));
            }
        }
    }
    let (lower_bound, nearest, nearest_estimate) =
        best.expect("the full torus is always compared");
    Ok(IsolationReport {
        norm_cap,
        resolution,
        compared,
        lower_bound,
        max_error_bound: max_err,
        nearest,
        nearest_estimate,
    })
}

/// One basis covector of the integer kernel, used for tests and defaults.
pub(crate) fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    (0..n)
        .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
        .collect()
}
