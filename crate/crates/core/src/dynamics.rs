//! The action of GL(n,Z) on subtori and the deciders built on it.
//!
//! Codimension-1 subtori are handled on the dual side: if `H = ker(γ)`
//! then `T(H) = ker(Sγ)` with `S = (T^{-1})^T`, so hyperplane orbits are
//! orbits of primitive covectors up to sign.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    char_poly, cyclotomic, cyclotomic_orders_dividing, exterior_power, is_product_of_cyclotomics,
    matrix_kernel, matrix_order, norm_sq, plucker, rational_factors, saturate, IntMatrix,
    IntPolynomial, Lattice, MatrixOrder, UnimodularMatrix,
};
use crate::torus::{
    covector_to_hyperplane, hyperplane_to_covector, primitive_covectors, sign_canonical,
    PrimitiveCovector, Subtorus,
};

fn check_dim(t: &UnimodularMatrix, h: &Subtorus) -> Result<()> {
    if t.n() != h.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: t.n(),
            got: h.ambient_dim(),
        });
    }
    Ok(())
}

/// `T(H)`. A unimodular image of a saturated lattice is saturated, so the
/// image lattice only needs re-canonicalizing.
pub fn act(t: &UnimodularMatrix, h: &Subtorus) -> Result<Subtorus> {
    check_dim(t, h)?;
    Ok(Subtorus::from_saturated_unchecked(h.lattice().transform(t)))
}

/// `S = (T^{-1})^T`, the action on characters.
pub fn dual_matrix(t: &UnimodularMatrix) -> UnimodularMatrix {
    t.inverse().transpose()
}

/// Canonical form of `S γ`.
pub fn dual_act(s: &UnimodularMatrix, gamma: &PrimitiveCovector) -> PrimitiveCovector {
    PrimitiveCovector::new(sign_canonical(s.mul_vec(gamma.coords())))
        .expect("unimodular images of primitive vectors are primitive")
}

/// Product of the distinct cyclotomic factors of the characteristic
/// polynomial. Its kernel is exactly the set of periodic vectors.
pub fn periodic_part_polynomial(a: &IntMatrix) -> IntPolynomial {
    cyclotomic_orders_dividing(&char_poly(a))
        .into_iter()
        .fold(IntPolynomial::one(), |acc, m| acc.mul(&cyclotomic(m)))
}

/// Exact test whether `A^q v = ±v` for some `q >= 1`.
///
/// The minimal polynomial of a periodic `v` divides both `x^q - 1` and the
/// characteristic polynomial; `x^q - 1` is a squarefree product of
/// cyclotomics, so it divides the product of the distinct cyclotomic
/// factors of the characteristic polynomial, and conversely.
pub fn is_periodic_vector(a: &IntMatrix, v: &[BigInt]) -> bool {
    let p = periodic_part_polynomial(a);
    p.eval_matrix(a).mul_vec(v).iter().all(Zero::is_zero)
}

/// Exact periodicity of `H` under `T` via Plücker coordinates: `T^q(H) = H`
/// iff the Plücker vector of `H` is periodic up to sign under `Λ^k T`.
pub fn is_periodic_subtorus(t: &UnimodularMatrix, h: &Subtorus) -> Result<bool> {
    check_dim(t, h)?;
    let k = h.dim();
    let n = t.n();
    if k == 0 || k == n {
        return Ok(true);
    }
    if k + 1 == n {
        let gamma = hyperplane_to_covector(h)?;
        return Ok(is_periodic_vector(dual_matrix(t).matrix(), gamma.coords()));
    }
    let wedge = exterior_power(t.matrix(), k);
    Ok(is_periodic_vector(&wedge, &plucker(h.lattice().basis(), n)))
}

/// A quadratic form `Q` with `C^T Q C - Q` positive definite, searched in
/// the family `Q_K = sum_{j=0}^{K} |C^j x|^2 - sum_{j=1}^{K} |C^{-j} x|^2`,
/// for which `Q_K(Cx) - Q_K(x) = |C^{K+1}x|^2 + |C^{-K}x|^2 - 2|x|^2`.
/// Exists for large `K` iff `C` has no eigenvalue of modulus 1.
pub fn lyapunov_form(c: &UnimodularMatrix, max_steps: u32) -> Option<IntMatrix> {
    let r = c.n();
    let cm = c.matrix();
    let ci = c.inverse();
    let cim = ci.matrix();
    let gram = |m: &IntMatrix| &m.transpose() * m;
    let mut fwd = cm.clone(); // C^{K+1}
    let mut bwd = IntMatrix::identity(r); // C^{-K}
    let mut q = IntMatrix::identity(r); // Q_0
    for _ in 1..=max_steps {
        q = q.add(&gram(&fwd));
        bwd = &bwd * cim;
        q = q.sub(&gram(&bwd));
        fwd = &fwd * cm;
        let d = gram(&fwd)
            .add(&gram(&bwd))
            .sub(&IntMatrix::identity(r).scale(&BigInt::from(2)));
        if d.is_positive_definite() {
            debug_assert!(lyapunov_increment(cm, &q).is_positive_definite());
            return Some(q);
        }
    }
    None
}

/// `C^T Q C - Q`.
pub fn lyapunov_increment(c: &IntMatrix, q: &IntMatrix) -> IntMatrix {
    (&(&c.transpose() * q) * c).sub(q)
}

fn frobenius_sq(q: &IntMatrix) -> BigInt {
    q.to_rows().iter().map(|r| norm_sq(r)).sum()
}

/// Largest `b` with `b^2 * |Q|_F^2 < min(Q(fwd), -Q(bwd))^2`. Since
/// `|Q(x)| <= |Q|_F |x|^2` and `Q` increases strictly along the orbit,
/// every orbit point beyond the window endpoints has `|x|^2 > b`.
/// `None` when no positive `b` exists.
pub fn exterior_norm_bound(q: &IntMatrix, fwd: &[BigInt], bwd: &[BigInt]) -> Option<BigInt> {
    let hi = q.quadratic_form(fwd);
    let lo = -q.quadratic_form(bwd);
    let m = hi.min(lo);
    let f = frobenius_sq(q);
    if !m.is_positive() || f.is_zero() {
        return None;
    }
    let target = &m * &m;
    // largest b with b^2 f < target
    let mut b = (&target / &f).sqrt();
    while &b * &b * &f >= target && b.is_positive() {
        b -= 1;
    }
    if b.is_positive() {
        Some(b)
    } else {
        None
    }
}

/// Independent check of an exterior bound: `Q` symmetric with positive
/// definite increment, and both window endpoints beyond `b`.
pub fn verify_exterior_bound(
    c: &IntMatrix,
    q: &IntMatrix,
    fwd: &[BigInt],
    bwd: &[BigInt],
    b: &BigInt,
) -> bool {
    if !q.is_symmetric() || !lyapunov_increment(c, q).is_positive_definite() {
        return false;
    }
    let hi = q.quadratic_form(fwd);
    let lo = -q.quadratic_form(bwd);
    if !hi.is_positive() || !lo.is_positive() {
        return false;
    }
    let limit = b * b * frobenius_sq(q);
    &hi * &hi > limit && &lo * &lo > limit
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitStatus {
    Periodic { period: u64 },
    Injective,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitEntry {
    pub exponent: i64,
    pub subtorus: Subtorus,
}

/// Certificate that every orbit element outside the window has annihilator
/// norm squared strictly greater than `norm_sq_bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExteriorBound {
    #[serde(with = "crate::io::codec::big")]
    pub norm_sq_bound: BigInt,
    /// Quadratic form strictly increasing along the dual orbit.
    pub lyapunov_form: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub status: OrbitStatus,
    /// The whole orbit for periodic status, otherwise `|m| <= window_radius`.
    pub window: Vec<OrbitEntry>,
    pub window_radius: u64,
    /// Only for injective hyperplane orbits of automorphisms without
    /// eigenvalues of modulus 1 on the relevant dual orbit.
    pub exterior: Option<ExteriorBound>,
}

/// Lyapunov search depth used by orbit reports.
pub const LYAPUNOV_STEPS: u32 = 24;

/// Orbit `{T^m(H)}`: exact periodic/injective decision, the window, and a
/// growth certificate for injective hyperplane orbits when available.
pub fn orbit(t: &UnimodularMatrix, h: &Subtorus, window_radius: u64) -> Result<OrbitReport> {
    check_dim(t, h)?;
    if window_radius == 0 {
        return Err(Error::InvalidParameter("window radius must be at least 1".into()));
    }
    if is_periodic_subtorus(t, h)? {
        let mut window = vec![OrbitEntry {
            exponent: 0,
            subtorus: h.clone(),
        }];
        let mut cur = act(t, h)?;
        let mut m = 1i64;
        while cur != *h {
            window.push(OrbitEntry {
                exponent: m,
                subtorus: cur.clone(),
            });
            cur = act(t, &cur)?;
            m += 1;
        }
        return Ok(OrbitReport {
            status: OrbitStatus::Periodic { period: m as u64 },
            window,
            window_radius,
            exterior: None,
        });
    }
    let w = window_radius as i64;
    let tinv = t.inverse();
    let mut fwd = vec![h.clone()];
    let mut bwd = vec![h.clone()];
    for _ in 0..w {
        fwd.push(act(t, fwd.last().expect("nonempty"))?);
        bwd.push(act(&tinv, bwd.last().expect("nonempty"))?);
    }
    let exterior = if h.is_hyperplane() {
        let s = dual_matrix(t);
        lyapunov_form(&s, LYAPUNOV_STEPS).and_then(|q| {
            let f = hyperplane_to_covector(&fwd[w as usize]).ok()?;
            let b = hyperplane_to_covector(&bwd[w as usize]).ok()?;
            // endpoints must be the actual orbit points, not sign-flipped
            let sw = s.pow(w).mul_vec(hyperplane_to_covector(h).ok()?.coords());
            let sb = s.pow(-w).mul_vec(hyperplane_to_covector(h).ok()?.coords());
            debug_assert_eq!(sign_canonical(sw.clone()), f.coords());
            debug_assert_eq!(sign_canonical(sb.clone()), b.coords());
            exterior_norm_bound(&q, &sw, &sb).map(|nb| ExteriorBound {
                norm_sq_bound: nb,
                lyapunov_form: q,
            })
        })
    } else {
        None
    };
    let mut window: Vec<OrbitEntry> = bwd
        .into_iter()
        .enumerate()
        .skip(1)
        .rev()
        .map(|(i, s)| OrbitEntry {
            exponent: -(i as i64),
            subtorus: s,
        })
        .collect();
    window.extend(fwd.into_iter().enumerate().map(|(i, s)| OrbitEntry {
        exponent: i as i64,
        subtorus: s,
    }));
    Ok(OrbitReport {
        status: OrbitStatus::Injective,
        window,
        window_radius,
        exterior,
    })
}

/// Whether `T^m(H) -> T^n` as `m -> ±∞`, for a codimension-1 `H`.
///
/// By Berend's criterion this fails iff some nonzero character annihilates
/// `T^m(H)` for infinitely many `m`. The annihilator of `T^m(H)` is spanned
/// by `S^m γ`; an injective orbit of integer vectors visits every bounded
/// set finitely often, while a periodic one keeps returning to `γ`.
pub fn converges_to_full(t: &UnimodularMatrix, h: &Subtorus) -> Result<bool> {
    check_dim(t, h)?;
    let gamma = hyperplane_to_covector(h)?;
    Ok(!is_periodic_vector(dual_matrix(t).matrix(), gamma.coords()))
}

/// Proper nonzero T-invariant rational subspaces (as subtori).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantSubspaces {
    pub exists: bool,
    pub witnesses: Vec<Subtorus>,
}

/// Exact existence decision with witnesses: kernels `ker p(T)` and
/// `ker p(T)^e` for the irreducible factors `p^e` of the characteristic
/// polynomial, and a cyclic subspace when the minimal polynomial is an
/// irreducible proper power-free divisor of it.
pub fn invariant_rational_subspaces(t: &UnimodularMatrix) -> InvariantSubspaces {
    let n = t.n();
    let a = t.matrix();
    let factors = rational_factors(&char_poly(a));
    let mut found = BTreeSet::new();
    let proper = |l: &Lattice| l.rank() > 0 && l.rank() < n;
    for (p, e) in &factors {
        let k1 = matrix_kernel(&p.eval_matrix(a));
        if proper(&k1) {
            found.insert(k1);
        }
        if *e > 1 {
            let ke = matrix_kernel(&p.pow(*e).eval_matrix(a));
            if proper(&ke) {
                found.insert(ke);
            }
        }
    }
    if found.is_empty() && factors.len() == 1 && factors[0].1 > 1 {
        // p(T) = 0 with deg p < n: any cyclic subspace is proper
        let d = factors[0].0.degree();
        let mut v: Vec<BigInt> = crate::torus::unit_vector(n, 0);
        let mut gens = Vec::with_capacity(d);
        for _ in 0..d {
            gens.push(v.clone());
            v = a.mul_vec(&v);
        }
        let l = saturate(&Lattice::from_generators(n, &gens).expect("dims"));
        if proper(&l) {
            found.insert(l);
        }
    }
    let mut witnesses: Vec<Subtorus> = found
        .into_iter()
        .map(Subtorus::from_saturated_unchecked)
        .collect();
    witnesses.sort_by(|x, y| x.dim().cmp(&y.dim()).then_with(|| x.cmp(y)));
    InvariantSubspaces {
        exists: !witnesses.is_empty(),
        witnesses,
    }
}

/// Distality of `T` on `R^n`: all eigenvalues of modulus 1, which for an
/// integer matrix means all eigenvalues are roots of unity.
pub fn is_distal_linear(t: &UnimodularMatrix) -> bool {
    is_product_of_cyclotomics(&char_poly(t.matrix())).is_yes()
}

/// No eigenvalue is a root of unity.
pub fn is_ergodic(t: &UnimodularMatrix) -> bool {
    cyclotomic_orders_dividing(&char_poly(t.matrix())).is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonDistalWitness {
    /// A codimension-1 subtorus `H` with `T^m(H) -> T^n` as `m -> ±∞`, so
    /// `(H, T^n)` is a proximal pair.
    pub hyperplane: Subtorus,
    pub covector: PrimitiveCovector,
    pub converges_to_full: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistalityVerdict {
    pub distal: bool,
    pub order: MatrixOrder,
    pub witness: Option<NonDistalWitness>,
}

/// `T` acts distally on the space of subtori iff `T` has finite order.
///
/// For infinite order some standard basis covector has a non-periodic dual
/// orbit (otherwise `S`, hence `T`, would have finite order); the first
/// one in (norm, lexicographic) order is the witness.
pub fn acts_distally_on_subp(t: &UnimodularMatrix) -> DistalityVerdict {
    let order = matrix_order(t);
    if order.is_finite() {
        return DistalityVerdict {
            distal: true,
            order,
            witness: None,
        };
    }
    let s = dual_matrix(t);
    let gamma = primitive_covectors(t.n(), 1)
        .into_iter()
        .find(|g| !is_periodic_vector(s.matrix(), g.coords()))
        .expect("an infinite-order automorphism moves some basis covector aperiodically");
    DistalityVerdict {
        distal: false,
        order,
        witness: Some(NonDistalWitness {
            hyperplane: covector_to_hyperplane(&gamma),
            covector: gamma,
            converges_to_full: true,
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupFiniteness {
    Finite {
        order: usize,
        elements: Vec<UnimodularMatrix>,
    },
    Infinite {
        witness: UnimodularMatrix,
    },
    /// The cap was reached and every element seen so far has finite order.
    Inconclusive {
        explored: usize,
    },
}

/// Breadth-first closure of the generated group, capped at `cap` elements.
pub fn group_is_finite(generators: &[UnimodularMatrix], cap: usize) -> Result<GroupFiniteness> {
    let Some(first) = generators.first() else {
        return Err(Error::InvalidParameter("at least one generator required".into()));
    };
    if cap == 0 {
        return Err(Error::InvalidParameter("cap must be at least 1".into()));
    }
    let n = first.n();
    for g in generators {
        if g.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.n(),
            });
        }
        if !matrix_order(g).is_finite() {
            return Ok(GroupFiniteness::Infinite { witness: g.clone() });
        }
    }
    let id = UnimodularMatrix::identity(n);
    let mut seen: BTreeSet<UnimodularMatrix> = BTreeSet::new();
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in generators {
            let h = g.compose(s);
            if seen.contains(&h) {
                continue;
            }
            if !matrix_order(&h).is_finite() {
                return Ok(GroupFiniteness::Infinite { witness: h });
            }
            seen.insert(h.clone());
            if seen.len() > cap {
                return Ok(GroupFiniteness::Inconclusive {
                    explored: seen.len(),
                });
            }
            queue.push_back(h);
        }
    }
    Ok(GroupFiniteness::Finite {
        order: seen.len(),
        elements: seen.into_iter().collect(),
    })
}

/// Matrix of the dual action restricted to an `S`-invariant sublattice of
/// characters, in the coordinates of its basis: `x -> C x` where
/// `sum x_i λ_i` is the character.
pub fn restrict_to_frame(s: &UnimodularMatrix, frame: &Lattice) -> Result<UnimodularMatrix> {
    let r = frame.rank();
    if r == 0 {
        return Err(Error::InvalidParameter("frame must be nonzero".into()));
    }
    let mut cols = Vec::with_capacity(r);
    for lambda in frame.basis() {
        let img = s.mul_vec(lambda);
        let coords = frame.coordinates(&img).ok_or_else(|| {
            Error::InvalidParameter("frame is not invariant under the dual action".into())
        })?;
        cols.push(coords);
    }
    // cols[i] are the coordinates of S λ_i, i.e. the i-th column of C
    let c = IntMatrix::from_rows(&cols)?.transpose();
    UnimodularMatrix::new(c)
}

/// Squared norm helper re-exported for certificate checks.
pub fn covector_norm_sq(v: &[BigInt]) -> BigInt {
    norm_sq(v)
}
