use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::IntMatrix;

/// Integer polynomial, coefficients in ascending degree order with no
/// trailing zeros. The zero polynomial has an empty coefficient list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `x - a`
    pub fn linear_root(a: BigInt) -> Self {
        Self::new(vec![-a, BigInt::one()])
    }

    /// `x^n - 1`
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = -BigInt::one();
        c[n] = BigInt::one();
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeffs.first().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn neg(&self) -> Self {
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, i: usize| p.coeffs.get(i).cloned().unwrap_or_default();
        Self::new((0..n).map(|i| get(self, i) - get(other, i)).collect())
    }

    /// Exact quotient over Z, `None` when `divisor` does not divide `self`
    /// in Z[x].
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.degree() < divisor.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dl = divisor.leading();
        let dd = divisor.degree();
        let mut quot = vec![BigInt::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let top = &rem[k + dd];
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(&dl);
            if !r.is_zero() {
                return None;
            }
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &q * c;
            }
            quot[k] = q;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(Self::new(quot))
        } else {
            None
        }
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `p(A)` by Horner's rule.
    pub fn eval_matrix(&self, a: &IntMatrix) -> IntMatrix {
        assert!(a.is_square());
        let n = a.rows();
        let mut acc = IntMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = (&acc * a).add(&IntMatrix::identity(n).scale(c));
        }
        acc
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{}", a)?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{}", i)?,
            }
        }
        Ok(())
    }
}

/// Characteristic polynomial `det(x Id - A)` by the Faddeev-LeVerrier
/// recurrence; all divisions are exact over Z.
pub fn char_poly(a: &IntMatrix) -> IntPolynomial {
    assert!(a.is_square());
    let n = a.rows();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = IntMatrix::zeros(n, n);
    for k in 1..=n {
        m = (&(a * &m)).add(&IntMatrix::identity(n).scale(&coeffs[n - k + 1]));
        let am = a * &m;
        let (q, r) = am.trace().div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero());
        coeffs[n - k] = -q;
    }
    IntPolynomial::new(coeffs)
}

/// Euler's totient.
pub fn euler_phi(mut m: u64) -> u64 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// All `m >= 1` with `phi(m) <= d`, ascending. Uses `phi(m) >= sqrt(m/2)`.
pub fn orders_with_phi_at_most(d: usize) -> Vec<u64> {
    let d = d as u64;
    let bound = 2 * d * d + 2;
    (1..=bound).filter(|&m| euler_phi(m) <= d).collect()
}

/// The m-th cyclotomic polynomial.
pub fn cyclotomic(m: u64) -> IntPolynomial {
    assert!(m >= 1);
    let mut p = IntPolynomial::x_pow_minus_one(m as usize);
    for d in 1..m {
        if m % d == 0 {
            p = p
                .exact_div(&cyclotomic(d))
                .expect("x^m - 1 is the product of its cyclotomic divisors");
        }
    }
    p
}

/// Outcome of the cyclotomic-product test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CyclotomicVerdict {
    /// Every irreducible factor is cyclotomic; one order per factor, with
    /// multiplicity, ascending.
    Yes { orders: Vec<u64> },
    /// The cofactor left after removing all cyclotomic factors.
    No { residual: IntPolynomial },
}

impl CyclotomicVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, CyclotomicVerdict::Yes { .. })
    }
}

/// Trial-divides by every cyclotomic polynomial that can occur in degree
/// `deg p`; the input is a product of cyclotomics iff the cofactor is ±1.
pub fn is_product_of_cyclotomics(p: &IntPolynomial) -> CyclotomicVerdict {
    let mut rest = p.clone();
    let mut orders = Vec::new();
    for m in orders_with_phi_at_most(p.degree()) {
        if euler_phi(m) as usize > rest.degree() {
            continue;
        }
        let phi_m = cyclotomic(m);
        while let Some(q) = rest.exact_div(&phi_m) {
            orders.push(m);
            rest = q;
            if rest.degree() < phi_m.degree() {
                break;
            }
        }
    }
    if rest.degree() == 0 && rest.constant_term().abs().is_one() {
        CyclotomicVerdict::Yes { orders }
    } else {
        CyclotomicVerdict::No { residual: rest }
    }
}

/// Distinct orders `m` with `Phi_m | p`.
pub fn cyclotomic_orders_dividing(p: &IntPolynomial) -> Vec<u64> {
    orders_with_phi_at_most(p.degree())
        .into_iter()
        .filter(|&m| p.exact_div(&cyclotomic(m)).is_some())
        .collect()
}

/// Factorization into irreducible factors over Q, each normalized to a
/// primitive integer polynomial with positive leading coefficient, with
/// multiplicities. Sorted by (degree, coefficients).
///
/// Cyclotomic factors are split off by trial division; what remains is
/// factored with Kronecker's method, which is exponential in the degree
/// but adequate for matrices of size at most about 8.
pub fn rational_factors(p: &IntPolynomial) -> Vec<(IntPolynomial, usize)> {
    assert!(!p.is_zero(), "cannot factor the zero polynomial");
    let mut rest = p.primitive_part();
    let mut found: Vec<(IntPolynomial, usize)> = Vec::new();
    let push = |f: IntPolynomial, found: &mut Vec<(IntPolynomial, usize)>| {
        let f = f.primitive_part();
        match found.iter_mut().find(|(g, _)| *g == f) {
            Some(entry) => entry.1 += 1,
            None => found.push((f, 1)),
        }
    };
    if rest.degree() >= 1 {
        for m in orders_with_phi_at_most(rest.degree()) {
            let phi_m = cyclotomic(m);
            while rest.degree() >= phi_m.degree() {
                match rest.exact_div(&phi_m) {
                    Some(q) => {
                        push(phi_m.clone(), &mut found);
                        rest = q;
                    }
                    None => break,
                }
            }
        }
    }
    while rest.degree() >= 1 {
        let f = smallest_factor(&rest);
        while let Some(q) = rest.exact_div(&f) {
            push(f.clone(), &mut found);
            rest = q;
            if rest.degree() < f.degree() {
                break;
            }
        }
    }
    found.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| a.0.coefficients().cmp(b.0.coefficients()))
    });
    found
}

/// A nonconstant factor of minimal degree (hence irreducible) of a
/// primitive polynomial of degree >= 1.
fn smallest_factor(p: &IntPolynomial) -> IntPolynomial {
    let n = p.degree();
    for d in 1..=n / 2 {
        if let Some(g) = kronecker_factor(p, d) {
            return g;
        }
    }
    p.primitive_part()
}

/// Searches for a factor of exact degree `d` by interpolating every
/// admissible choice of values at `d + 1` sample points.
fn kronecker_factor(p: &IntPolynomial, d: usize) -> Option<IntPolynomial> {
    // Candidate points, ordered by how few divisors their value has.
    let mut pts: Vec<(usize, BigInt, BigInt)> = Vec::new();
    for k in 0i64..=(4 * d as i64 + 8) {
        let x = BigInt::from(if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 });
        let v = p.eval(&x);
        if v.is_zero() {
            return Some(IntPolynomial::linear_root(x));
        }
        let nd = divisor_count_hint(&v);
        pts.push((nd, x, v));
    }
    pts.sort_by(|a, b| a.0.cmp(&b.0));
    pts.truncate(d + 1);
    let xs: Vec<BigInt> = pts.iter().map(|t| t.1.clone()).collect();
    let divisor_sets: Vec<Vec<BigInt>> = pts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let pos = positive_divisors(&t.2);
            if i == 0 {
                // Fix the overall sign of the candidate factor.
                pos
            } else {
                pos.iter().flat_map(|q| [q.clone(), -q]).collect()
            }
        })
        .collect();
    let mut idx = vec![0usize; d + 1];
    loop {
        let ys: Vec<BigInt> = idx
            .iter()
            .zip(&divisor_sets)
            .map(|(&i, s)| s[i].clone())
            .collect();
        if let Some(g) = interpolate_integer(&xs, &ys) {
            if g.degree() == d && !g.is_zero() {
                if p.exact_div(&g).is_some() {
                    return Some(g.primitive_part());
                }
            }
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return None;
            }
            idx[k] += 1;
            if idx[k] < divisor_sets[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Lagrange interpolation; `None` unless all coefficients are integers.
fn interpolate_integer(xs: &[BigInt], ys: &[BigInt]) -> Option<IntPolynomial> {
    let n = xs.len();
    let mut acc = vec![BigRational::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * BigRational::from_integer(xs[j].clone());
            }
            basis = next;
            denom *= BigRational::from_integer(&xs[i] - &xs[j]);
        }
        let scale = BigRational::from_integer(ys[i].clone()) / denom;
        for (k, c) in basis.into_iter().enumerate() {
            acc[k] += c * &scale;
        }
    }
    if acc.iter().all(|c| c.is_integer()) {
        Some(IntPolynomial::new(
            acc.into_iter().map(|c| c.to_integer()).collect(),
        ))
    } else {
        None
    }
}

fn divisor_count_hint(v: &BigInt) -> usize {
    match v.abs().to_u64() {
        Some(x) if x < 1 << 40 => positive_divisors(v).len(),
        _ => usize::MAX,
    }
}

/// Positive divisors of a nonzero integer by trial division.
fn positive_divisors(v: &BigInt) -> Vec<BigInt> {
    let a = v.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut q = BigInt::one();
    while &q * &q <= a {
        if (&a % &q).is_zero() {
            small.push(q.clone());
            let other = &a / &q;
            if other != q {
                large.push(other);
            }
        }
        q += 1;
    }
    small.extend(large.into_iter().rev());
    small
}
