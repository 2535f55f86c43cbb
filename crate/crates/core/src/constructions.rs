//! Families of codimension-1 subtori with pairwise disjoint orbits, and
//! certificates that an automorphism cannot act expansively on the space
//! of subtori.
//!
//! Everything happens on the dual side. A hyperplane `ker γ` is moved by
//! `T` to `ker Sγ`, so two hyperplanes have disjoint orbits iff their
//! covectors have disjoint `S`-orbits up to sign. When the dual action
//! keeps a proper sublattice of characters (a *frame*) invariant, members
//! are taken from it and all evidence is expressed in frame coordinates.
//!
//! Certificates are plain data. [`verify_family`] and
//! [`verify_non_expansivity`] recompute every claim from the matrix and
//! the members alone.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    act, converges_to_full, dual_matrix, exterior_norm_bound, is_periodic_vector,
    lyapunov_form, periodic_part_polynomial, restrict_to_frame, verify_exterior_bound,
    OrbitStatus, LYAPUNOV_STEPS,
};
use crate::error::{Error, Result};
use crate::linalg::{
    char_poly, dot, is_product_of_cyclotomics, is_unipotent, matrix_kernel, matrix_order,
    norm_sq, rational_factors, saturate, unipotent_exponent, IntMatrix, Lattice, MatrixOrder,
    UnimodularMatrix,
};
use crate::torus::{
    covector_to_hyperplane, hausdorff_distance, isolation_radius_lower_bound,
    primitive_covectors, sign_canonical, subtori_with_annihilator_rank, IsolationReport,
    MetricEstimate, PrimitiveCovector, Subtorus,
};

/// Limits shared by every search in this module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Candidates are primitive covectors (in frame coordinates) of
    /// Euclidean norm at most this.
    pub max_norm: u64,
    /// Largest orbit window `|m| <= max_window` ever computed.
    pub max_window: u64,
    /// Number of candidates examined before giving up.
    pub max_candidates: usize,
    /// Annihilator norm cap for the isolation report; 0 skips it.
    pub isolation_cap: u64,
    /// Resolution of metric estimates.
    pub resolution: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_norm: 40,
            max_window: 64,
            max_candidates: 50_000,
            isolation_cap: 3,
            resolution: 0.02,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    FiniteOrder,
    Distal,
    InvariantSubspace,
    Irreducible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub covector: PrimitiveCovector,
    pub hyperplane: Subtorus,
    pub status: OrbitStatus,
}

/// Orbit invariant of a vector `x` under a unipotent `M`, for the linear
/// forms `v` fixed by `M^T` and the forms `w` with `(M^T - I)^2 w = 0`:
/// `primary = <v, x>`, `shift = <(M^T - I) w, x>`, and `secondary = <w, x>`
/// reduced modulo `Z * shift`. Normalized over `x ~ -x`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrbitInvariant {
    #[serde(with = "crate::io::codec::big_vec")]
    pub primary: Vec<BigInt>,
    #[serde(with = "crate::io::codec::big_vec")]
    pub shift: Vec<BigInt>,
    #[serde(with = "crate::io::codec::big_vec")]
    pub secondary: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthWindow {
    pub window_radius: u64,
    /// Every orbit point outside the window has squared norm above this.
    #[serde(with = "crate::io::codec::big_opt")]
    pub norm_sq_bound: Option<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyEvidence {
    /// All orbits are finite and are enumerated by the checker.
    Periodic,
    /// `S^power` is unipotent on the frame; per member, the set of
    /// invariants of `S^j x` for `0 <= j < power`.
    Invariants {
        power: u64,
        invariants: Vec<Vec<OrbitInvariant>>,
    },
    /// Windows around each member plus, when a Lyapunov form exists,
    /// bounds on everything outside the windows.
    Growth {
        lyapunov_form: Option<IntMatrix>,
        windows: Vec<GrowthWindow>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointFamilyCertificate {
    pub matrix: UnimodularMatrix,
    pub requested: usize,
    pub branch: Branch,
    /// Invariant lattice of characters the members are drawn from; absent
    /// means all of `Z^n`.
    pub frame: Option<Lattice>,
    pub frame_note: Option<String>,
    pub members: Vec<FamilyMember>,
    pub evidence: FamilyEvidence,
    pub rigorous: bool,
    pub complete: bool,
    pub note: Option<String>,
}

fn canon(v: Vec<BigInt>) -> Vec<BigInt> {
    sign_canonical(v)
}

/// Primitive vectors of `Z^r` of norm at most `max_norm`, in (norm,
/// lexicographic) order, generated in doubling shells.
fn candidates(r: usize, max_norm: u64) -> impl Iterator<Item = Vec<BigInt>> {
    let mut radii = Vec::new();
    let mut k = 2u64;
    while k < max_norm {
        radii.push(k);
        k *= 2;
    }
    radii.push(max_norm.max(1));
    let mut prev = 0u64;
    radii.into_iter().flat_map(move |rad| {
        let lo = BigInt::from(prev);
        prev = rad * rad;
        primitive_covectors(r, rad * rad)
            .into_iter()
            .filter(move |g| g.norm_sq() > lo)
            .map(PrimitiveCovector::into_coords)
    })
}

struct InvariantMap {
    c: IntMatrix,
    power: u64,
    fixed: Vec<Vec<BigInt>>,
    second: Vec<Vec<BigInt>>,
    shifts: Vec<Vec<BigInt>>,
}

impl InvariantMap {
    fn new(c: &IntMatrix, power: u64) -> Result<Self> {
        let m = c.pow(power);
        if power == 0 || !is_unipotent(&m) {
            return Err(Error::NotUnipotent);
        }
        let a = m.transpose().sub(&IntMatrix::identity(c.rows()));
        let fixed = matrix_kernel(&a).basis().to_vec();
        let second = matrix_kernel(&(&a * &a)).basis().to_vec();
        let shifts = second.iter().map(|w| a.mul_vec(w)).collect();
        Ok(InvariantMap {
            c: c.clone(),
            power,
            fixed,
            second,
            shifts,
        })
    }

    fn raw(&self, x: &[BigInt]) -> OrbitInvariant {
        let primary = self.fixed.iter().map(|v| dot(v, x)).collect();
        let shift: Vec<BigInt> = self.shifts.iter().map(|u| dot(u, x)).collect();
        let mut secondary: Vec<BigInt> = self.second.iter().map(|w| dot(w, x)).collect();
        if let Some(i) = shift.iter().position(|d| !d.is_zero()) {
            let q = secondary[i].div_floor(&shift[i]);
            for (s, d) in secondary.iter_mut().zip(&shift) {
                *s -= &q * d;
            }
        }
        OrbitInvariant {
            primary,
            shift,
            secondary,
        }
    }

    fn single(&self, x: &[BigInt]) -> OrbitInvariant {
        let neg: Vec<BigInt> = x.iter().map(|v| -v).collect();
        self.raw(x).min(self.raw(&neg))
    }

    fn of_orbit(&self, x: &[BigInt]) -> Vec<OrbitInvariant> {
        let mut out = BTreeSet::new();
        let mut y = x.to_vec();
        for _ in 0..self.power {
            out.insert(self.single(&y));
            y = self.c.mul_vec(&y);
        }
        out.into_iter().collect()
    }
}

/// Full orbit of a periodic vector, up to sign.
fn finite_orbit(c: &IntMatrix, x: &[BigInt], limit: u64) -> Option<(u64, BTreeSet<Vec<BigInt>>)> {
    let start = canon(x.to_vec());
    let mut set = BTreeSet::from([start.clone()]);
    let mut y = c.mul_vec(x);
    for p in 1..=limit {
        let cy = canon(y.clone());
        if cy == start {
            return Some((p, set));
        }
        set.insert(cy);
        y = c.mul_vec(&y);
    }
    None
}

struct Window {
    radius: u64,
    bound: Option<BigInt>,
    points: BTreeSet<Vec<BigInt>>,
}

/// Grows the window around `x` until the exterior bound covers
/// `target`, or the window cap is reached.
fn grow_window(
    c: &UnimodularMatrix,
    cinv: &UnimodularMatrix,
    q: Option<&IntMatrix>,
    x: &[BigInt],
    target: &BigInt,
    max_window: u64,
) -> Window {
    let mut f = x.to_vec();
    let mut b = x.to_vec();
    let mut points = BTreeSet::from([canon(x.to_vec())]);
    let mut bound = None;
    for w in 1..=max_window {
        f = c.mul_vec(&f);
        b = cinv.mul_vec(&b);
        points.insert(canon(f.clone()));
        points.insert(canon(b.clone()));
        if let Some(q) = q {
            bound = exterior_norm_bound(q, &f, &b);
            if bound.as_ref().is_some_and(|v| v >= target) {
                return Window {
                    radius: w,
                    bound,
                    points,
                };
            }
        }
    }
    Window {
        radius: max_window,
        bound,
        points,
    }
}

/// Window points recomputed by the checker.
fn window_points(c: &UnimodularMatrix, x: &[BigInt], radius: u64) -> (BTreeSet<Vec<BigInt>>, Vec<BigInt>, Vec<BigInt>) {
    let cinv = c.inverse();
    let mut f = x.to_vec();
    let mut b = x.to_vec();
    let mut points = BTreeSet::from([canon(x.to_vec())]);
    for _ in 0..radius {
        f = c.mul_vec(&f);
        b = cinv.mul_vec(&b);
        points.insert(canon(f.clone()));
        points.insert(canon(b.clone()));
    }
    (points, f, b)
}

struct Selection {
    xs: Vec<Vec<BigInt>>,
    statuses: Vec<OrbitStatus>,
    evidence: FamilyEvidence,
    rigorous: bool,
    examined: usize,
}

fn select_periodic(c: &UnimodularMatrix, count: usize, budget: &Budget) -> Result<Selection> {
    let order = matrix_order(c)
        .finite()
        .ok_or_else(|| Error::InvalidParameter("matrix has infinite order".into()))?;
    let mut covered: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let mut sel = Selection {
        xs: Vec::new(),
        statuses: Vec::new(),
        evidence: FamilyEvidence::Periodic,
        rigorous: true,
        examined: 0,
    };
    for x in candidates(c.n(), budget.max_norm) {
        if sel.xs.len() == count || sel.examined == budget.max_candidates {
            break;
        }
        sel.examined += 1;
        if covered.contains(&x) {
            continue;
        }
        let (period, orbit) = finite_orbit(c.matrix(), &x, order).expect("finite order");
        covered.extend(orbit);
        sel.xs.push(x);
        sel.statuses.push(OrbitStatus::Periodic { period });
    }
    Ok(sel)
}

fn select_by_invariants(c: &UnimodularMatrix, power: u64, count: usize, budget: &Budget) -> Result<Selection> {
    let inv = InvariantMap::new(c.matrix(), power)?;
    let filter = periodic_part_polynomial(c.matrix()).eval_matrix(c.matrix());
    let mut seen: BTreeSet<Vec<OrbitInvariant>> = BTreeSet::new();
    let mut xs = Vec::new();
    let mut invariants = Vec::new();
    let mut examined = 0;
    for x in candidates(c.n(), budget.max_norm) {
        if xs.len() == count || examined == budget.max_candidates {
            break;
        }
        examined += 1;
        if filter.mul_vec(&x).iter().all(Zero::is_zero) {
            continue;
        }
        let set = inv.of_orbit(&x);
        if seen.insert(set.clone()) {
            xs.push(x);
            invariants.push(set);
        }
    }
    Ok(Selection {
        statuses: vec![OrbitStatus::Injective; xs.len()],
        xs,
        evidence: FamilyEvidence::Invariants { power, invariants },
        rigorous: true,
        examined,
    })
}

fn select_by_growth(c: &UnimodularMatrix, count: usize, budget: &Budget) -> Selection {
    let q = lyapunov_form(c, LYAPUNOV_STEPS);
    let cinv = c.inverse();
    let filter = periodic_part_polynomial(c.matrix()).eval_matrix(c.matrix());
    let target = BigInt::from(budget.max_norm) * BigInt::from(budget.max_norm);
    let mut kept: Vec<(Vec<BigInt>, Window)> = Vec::new();
    let mut rigorous = q.is_some();
    let mut examined = 0;
    for x in candidates(c.n(), budget.max_norm) {
        if kept.len() == count || examined == budget.max_candidates {
            break;
        }
        examined += 1;
        if filter.mul_vec(&x).iter().all(Zero::is_zero) {
            continue;
        }
        let cx = canon(x.clone());
        if kept.iter().any(|(_, w)| w.points.contains(&cx)) {
            continue;
        }
        let nx = norm_sq(&x);
        if kept
            .iter()
            .any(|(_, w)| w.bound.as_ref().map_or(true, |b| nx > *b))
        {
            rigorous = false;
        }
        let w = grow_window(c, &cinv, q.as_ref(), &x, &target, budget.max_window);
        kept.push((x, w));
    }
    let windows = kept
        .iter()
        .map(|(_, w)| GrowthWindow {
            window_radius: w.radius,
            norm_sq_bound: w.bound.clone(),
        })
        .collect();
    Selection {
        statuses: vec![OrbitStatus::Injective; kept.len()],
        xs: kept.into_iter().map(|(x, _)| x).collect(),
        evidence: FamilyEvidence::Growth {
            lyapunov_form: q,
            windows,
        },
        rigorous,
        examined,
    }
}

/// An invariant lattice of characters on which the dual action has
/// irreducible, non-cyclotomic characteristic polynomial: the saturated
/// cyclic span of the shortest basis character of `ker p(S)`, for the
/// first non-cyclotomic irreducible factor `p`. `None` when that span is
/// everything.
fn invariant_frame(s: &UnimodularMatrix) -> Option<(Lattice, String)> {
    let n = s.n();
    let a = s.matrix();
    for (p, _) in rational_factors(&char_poly(a)) {
        if is_product_of_cyclotomics(&p).is_yes() {
            continue;
        }
        let kernel = matrix_kernel(&p.eval_matrix(a));
        let v = kernel
            .basis()
            .iter()
            .min_by(|x, y| norm_sq(x).cmp(&norm_sq(y)).then_with(|| x.cmp(y)))?
            .clone();
        let mut gens = vec![v];
        for _ in 1..p.degree() {
            gens.push(a.mul_vec(gens.last().expect("nonempty")));
        }
        let frame = saturate(&Lattice::from_generators(n, &gens).ok()?);
        if frame.rank() < n {
            let note = format!(
                "characters of the cyclic span of {} under the dual action, factor {}",
                fmt_vec(&gens[0]),
                p
            );
            return Some((frame, note));
        }
        return None;
    }
    None
}

fn fmt_vec(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn assemble(
    t: &UnimodularMatrix,
    count: usize,
    branch: Branch,
    frame: Option<(Lattice, String)>,
    sel: Selection,
    budget: &Budget,
) -> DisjointFamilyCertificate {
    let members = sel
        .xs
        .iter()
        .zip(sel.statuses)
        .map(|(x, status)| {
            let amb = match &frame {
                Some((f, _)) => f.combine(x),
                None => x.clone(),
            };
            let covector = PrimitiveCovector::new(canon(amb)).expect("frame is saturated");
            FamilyMember {
                hyperplane: covector_to_hyperplane(&covector),
                covector,
                status,
            }
        })
        .collect::<Vec<_>>();
    let complete = members.len() >= count;
    let note = (!complete).then(|| {
        format!(
            "budget exhausted after {} candidates (norm cap {}, window cap {}): {} of {} members certified",
            sel.examined,
            budget.max_norm,
            budget.max_window,
            members.len(),
            count
        )
    });
    let (frame, frame_note) = match frame {
        Some((f, n)) => (Some(f), Some(n)),
        None => (None, None),
    };
    DisjointFamilyCertificate {
        matrix: t.clone(),
        requested: count,
        branch,
        frame,
        frame_note,
        members,
        evidence: sel.evidence,
        rigorous: sel.rigorous,
        complete,
        note,
    }
}

/// `count` hyperplanes whose orbits under a unipotent `T != Id` are
/// pairwise disjoint, separated by exact invariants of the dual action.
pub fn unipotent_family(
    t: &UnimodularMatrix,
    count: usize,
    budget: &Budget,
) -> Result<DisjointFamilyCertificate> {
    if !is_unipotent(t.matrix()) {
        return Err(Error::NotUnipotent);
    }
    if t.is_identity() {
        return Err(Error::InvalidParameter("identity has no moving orbits".into()));
    }
    check_count(count)?;
    let s = dual_matrix(t);
    let sel = select_by_invariants(&s, 1, count, budget)?;
    Ok(assemble(t, count, Branch::Distal, None, sel, budget))
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    Ok(())
}

/// `count` hyperplanes with pairwise disjoint `T`-orbits. Finite order
/// picks distinct finite orbits; distal matrices use invariants of a
/// unipotent power; otherwise members come from an invariant frame when
/// there is one, and are separated by orbit windows with growth bounds.
/// Members of infinite-order families all have injective orbits.
pub fn disjoint_hyperplane_orbits(
    t: &UnimodularMatrix,
    count: usize,
    budget: &Budget,
) -> Result<DisjointFamilyCertificate> {
    if t.n() < 2 {
        return Err(Error::InvalidParameter("ambient dimension must be at least 2".into()));
    }
    check_count(count)?;
    let s = dual_matrix(t);
    if matrix_order(t).is_finite() {
        let sel = select_periodic(&s, count, budget)?;
        return Ok(assemble(t, count, Branch::FiniteOrder, None, sel, budget));
    }
    if let Some(power) = unipotent_exponent(s.matrix()) {
        let sel = select_by_invariants(&s, power, count, budget)?;
        return Ok(assemble(t, count, Branch::Distal, None, sel, budget));
    }
    if let Some((frame, note)) = invariant_frame(&s) {
        let c = restrict_to_frame(&s, &frame)?;
        let sel = select_by_growth(&c, count, budget);
        return Ok(assemble(
            t,
            count,
            Branch::InvariantSubspace,
            Some((frame, note)),
            sel,
            budget,
        ));
    }
    let sel = select_by_growth(&s, count, budget);
    Ok(assemble(t, count, Branch::Irreducible, None, sel, budget))
}

/// Invariants of the orbit of `x` under `C`, given that `C^power` is
/// unipotent: the set of invariants of `C^j x` for `0 <= j < power`.
/// Vectors in one orbit (up to sign) get equal sets.
pub fn orbit_invariants(c: &UnimodularMatrix, power: u64, x: &[BigInt]) -> Result<Vec<OrbitInvariant>> {
    if x.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            got: x.len(),
        });
    }
    Ok(InvariantMap::new(c.matrix(), power)?.of_orbit(x))
}

/// Evidence for a given list of hyperplanes, without any search. Fails if
/// two of them share an orbit or evidence cannot separate them.
pub fn certify_members(
    t: &UnimodularMatrix,
    covectors: &[PrimitiveCovector],
    budget: &Budget,
) -> Result<DisjointFamilyCertificate> {
    let n = t.n();
    if covectors.is_empty() {
        return Err(Error::InvalidParameter("no members given".into()));
    }
    if let Some(g) = covectors.iter().find(|g| g.ambient_dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.ambient_dim(),
        });
    }
    let shared = |i: usize, j: usize| Error::InvalidParameter(format!("members {i} and {j} share an orbit"));
    let s = dual_matrix(t);
    let count = covectors.len();
    if let Some(order) = matrix_order(t).finite() {
        let mut statuses = Vec::new();
        let xs: Vec<Vec<BigInt>> = covectors.iter().map(|g| g.coords().to_vec()).collect();
        for (i, x) in xs.iter().enumerate() {
            let (period, orbit) = finite_orbit(s.matrix(), x, order).expect("finite order");
            if let Some(j) = (i + 1..count).find(|&j| orbit.contains(&canon(xs[j].clone()))) {
                return Err(shared(i, j));
            }
            statuses.push(OrbitStatus::Periodic { period });
        }
        let sel = Selection {
            xs,
            statuses,
            evidence: FamilyEvidence::Periodic,
            rigorous: true,
            examined: count,
        };
        return Ok(assemble(t, count, Branch::FiniteOrder, None, sel, budget));
    }
    let filter = periodic_part_polynomial(s.matrix()).eval_matrix(s.matrix());
    if let Some(i) = covectors
        .iter()
        .position(|g| filter.mul_vec(g.coords()).iter().all(Zero::is_zero))
    {
        return Err(Error::InvalidParameter(format!("member {i} has a periodic orbit")));
    }
    if let Some(power) = unipotent_exponent(s.matrix()) {
        let map = InvariantMap::new(s.matrix(), power)?;
        let invariants: Vec<_> = covectors.iter().map(|g| map.of_orbit(g.coords())).collect();
        for i in 0..count {
            if let Some(j) = (i + 1..count).find(|&j| invariants[i] == invariants[j]) {
                return Err(Error::InvalidParameter(format!(
                    "members {i} and {j} are not separated by invariants"
                )));
            }
        }
        let sel = Selection {
            xs: covectors.iter().map(|g| g.coords().to_vec()).collect(),
            statuses: vec![OrbitStatus::Injective; count],
            evidence: FamilyEvidence::Invariants { power, invariants },
            rigorous: true,
            examined: count,
        };
        return Ok(assemble(t, count, Branch::Distal, None, sel, budget));
    }
    let frame = invariant_frame(&s).filter(|(f, _)| covectors.iter().all(|g| f.contains(g.coords())));
    let (c, xs, branch) = match &frame {
        Some((f, _)) => (
            restrict_to_frame(&s, f)?,
            covectors
                .iter()
                .map(|g| f.coordinates(g.coords()).expect("checked membership"))
                .collect::<Vec<_>>(),
            Branch::InvariantSubspace,
        ),
        None => (
            s.clone(),
            covectors.iter().map(|g| g.coords().to_vec()).collect(),
            if invariant_frame(&s).is_some() {
                Branch::InvariantSubspace
            } else {
                Branch::Irreducible
            },
        ),
    };
    let q = lyapunov_form(&c, LYAPUNOV_STEPS);
    let cinv = c.inverse();
    let target = xs.iter().map(|x| norm_sq(x)).max().expect("nonempty");
    let windows: Vec<Window> = xs
        .iter()
        .map(|x| grow_window(&c, &cinv, q.as_ref(), x, &target, budget.max_window))
        .collect();
    let mut rigorous = q.is_some();
    for i in 0..count {
        for j in i + 1..count {
            if windows[i].points.contains(&canon(xs[j].clone())) {
                return Err(shared(i, j));
            }
            rigorous &= windows[i].bound.as_ref().is_some_and(|b| norm_sq(&xs[j]) <= *b);
        }
    }
    let sel = Selection {
        xs,
        statuses: vec![OrbitStatus::Injective; count],
        evidence: FamilyEvidence::Growth {
            lyapunov_form: q,
            windows: windows
                .iter()
                .map(|w| GrowthWindow {
                    window_radius: w.radius,
                    norm_sq_bound: w.bound.clone(),
                })
                .collect(),
        },
        rigorous,
        examined: count,
    };
    Ok(assemble(t, count, branch, frame, sel, budget))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedSubtori {
    pub dim: usize,
    pub dual_norm_bound: u64,
    pub subtori: Vec<Subtorus>,
    /// True when the list is the complete set of fixed subtori of this
    /// dimension, not only those within the norm bound.
    pub exhaustive: bool,
}

/// `T`-invariant subtori of dimension `k`. For hyperplanes these are the
/// kernels of `S - I` and `S + I`, which is exact; when either kernel has
/// rank at least 2 there are infinitely many and the list is cut at
/// `dual_norm_bound`. Lower dimensions are enumerated within the bound.
pub fn fixed_subtori(t: &UnimodularMatrix, k: usize, dual_norm_bound: u64) -> Result<FixedSubtori> {
    let n = t.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "dimension must lie in 1..={}",
            n.saturating_sub(1)
        )));
    }
    let cap = dual_norm_bound * dual_norm_bound;
    if k + 1 < n {
        let subtori = subtori_with_annihilator_rank(n, n - k, cap)
            .into_iter()
            .filter(|h| act(t, h).as_ref() == Ok(h))
            .collect();
        return Ok(FixedSubtori {
            dim: k,
            dual_norm_bound,
            subtori,
            exhaustive: false,
        });
    }
    let s = dual_matrix(t);
    let one = BigInt::from(1);
    let mut covectors: Vec<PrimitiveCovector> = Vec::new();
    let mut exhaustive = true;
    for shift in [one.clone(), -one] {
        let kernel = matrix_kernel(&s.matrix().sub_scalar(&shift));
        match kernel.rank() {
            0 => {}
            1 => covectors.push(
                PrimitiveCovector::new(canon(kernel.basis()[0].clone()))
                    .expect("saturated rank-1 lattices have primitive generators"),
            ),
            _ => {
                exhaustive = false;
                covectors.extend(
                    primitive_covectors(n, cap)
                        .into_iter()
                        .filter(|g| kernel.contains(g.coords())),
                );
            }
        }
    }
    covectors.sort_by(|a, b| a.norm_sq().cmp(&b.norm_sq()).then_with(|| a.cmp(b)));
    Ok(FixedSubtori {
        dim: k,
        dual_norm_bound,
        subtori: covectors.iter().map(covector_to_hyperplane).collect(),
        exhaustive,
    })
}

/// Evidence that `T^m(H)` comes within 0.1 of the full torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceWitness {
    pub member: usize,
    pub converges_to_full: bool,
    pub exponent: Option<u64>,
    pub distance: Option<MetricEstimate>,
}

/// Distance below which a member counts as close to the full torus.
pub const CONVERGENCE_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum NonExpansivityCertificate {
    /// `T^order = I`, so every subtorus is a fixed point of `T^order`;
    /// `fixed` lists some of them.
    FiniteOrder {
        matrix: UnimodularMatrix,
        order: u64,
        fixed: Vec<Subtorus>,
    },
    /// More pairwise disjoint injective orbits of hyperplanes than
    /// `refuted_orbit_bound`.
    InfinitelyManyOrbits {
        matrix: UnimodularMatrix,
        refuted_orbit_bound: usize,
        family: DisjointFamilyCertificate,
        convergence: Vec<ConvergenceWitness>,
        isolation: Option<IsolationReport>,
    },
    Inconclusive {
        matrix: UnimodularMatrix,
        reason: String,
        partial: Option<DisjointFamilyCertificate>,
    },
}

impl NonExpansivityCertificate {
    pub fn matrix(&self) -> &UnimodularMatrix {
        match self {
            NonExpansivityCertificate::FiniteOrder { matrix, .. }
            | NonExpansivityCertificate::InfinitelyManyOrbits { matrix, .. }
            | NonExpansivityCertificate::Inconclusive { matrix, .. } => matrix,
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, NonExpansivityCertificate::Inconclusive { .. })
    }

    pub fn is_rigorous(&self) -> bool {
        match self {
            NonExpansivityCertificate::FiniteOrder { .. } => true,
            NonExpansivityCertificate::InfinitelyManyOrbits { family, .. } => family.rigorous,
            NonExpansivityCertificate::Inconclusive { .. } => false,
        }
    }
}

fn convergence_witness(
    t: &UnimodularMatrix,
    member: usize,
    h: &Subtorus,
    budget: &Budget,
) -> Result<ConvergenceWitness> {
    let converges = converges_to_full(t, h)?;
    let full = Subtorus::full(t.n());
    let mut cur = h.clone();
    if converges {
        for m in 1..=budget.max_window {
            cur = act(t, &cur)?;
            let est = hausdorff_distance(&cur, &full, budget.resolution)?;
            if est.upper() < CONVERGENCE_THRESHOLD {
                return Ok(ConvergenceWitness {
                    member,
                    converges_to_full: true,
                    exponent: Some(m),
                    distance: Some(est),
                });
            }
        }
    }
    Ok(ConvergenceWitness {
        member,
        converges_to_full: converges,
        exponent: None,
        distance: None,
    })
}

/// Certificate that `T` does not act expansively on the subtori of the
/// torus: either `T` has finite order (and `count.max(2)` fixed points of
/// `T^m` are exhibited), or `count` hyperplanes have pairwise disjoint
/// injective orbits converging to the full torus, refuting any bound of
/// `count - 1` orbits.
pub fn non_expansivity_certificate(
    t: &UnimodularMatrix,
    count: usize,
    budget: &Budget,
) -> Result<NonExpansivityCertificate> {
    let n = t.n();
    if n < 2 {
        return Err(Error::InvalidParameter("ambient dimension must be at least 2".into()));
    }
    check_count(count)?;
    if let MatrixOrder::Finite(order) = matrix_order(t) {
        let want = count.max(2);
        let mut fixed = Vec::with_capacity(want);
        let mut r = 1u64;
        while fixed.len() < want {
            fixed = primitive_covectors(n, r * r)
                .iter()
                .take(want)
                .map(covector_to_hyperplane)
                .collect();
            r += 1;
        }
        return Ok(NonExpansivityCertificate::FiniteOrder {
            matrix: t.clone(),
            order,
            fixed,
        });
    }
    let family = disjoint_hyperplane_orbits(t, count, budget)?;
    if !family.complete {
        return Ok(NonExpansivityCertificate::Inconclusive {
            matrix: t.clone(),
            reason: family
                .note
                .clone()
                .unwrap_or_else(|| "family incomplete".into()),
            partial: Some(family),
        });
    }
    let convergence = family
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| convergence_witness(t, i, &m.hyperplane, budget))
        .collect::<Result<Vec<_>>>()?;
    let isolation = if budget.isolation_cap > 0 {
        Some(isolation_radius_lower_bound(
            &family.members[0].hyperplane,
            budget.isolation_cap,
            budget.resolution,
        )?)
    } else {
        None
    };
    Ok(NonExpansivityCertificate::InfinitelyManyOrbits {
        matrix: t.clone(),
        refuted_orbit_bound: count - 1,
        family,
        convergence,
        isolation,
    })
}

/// Why a certificate was rejected, naming the members involved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationFailure {
    pub reason: String,
    pub member: Option<usize>,
    pub pair: Option<(usize, usize)>,
}

impl VerificationFailure {
    fn general(reason: impl Into<String>) -> Self {
        VerificationFailure {
            reason: reason.into(),
            member: None,
            pair: None,
        }
    }

    fn member(i: usize, reason: impl Into<String>) -> Self {
        VerificationFailure {
            reason: reason.into(),
            member: Some(i),
            pair: None,
        }
    }

    fn pair(i: usize, j: usize, reason: impl Into<String>) -> Self {
        VerificationFailure {
            reason: reason.into(),
            member: None,
            pair: Some((i, j)),
        }
    }
}

impl fmt::Display for VerificationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((i, j)) = self.pair {
            write!(f, "members {i} and {j}: {}", self.reason)
        } else if let Some(i) = self.member {
            write!(f, "member {i}: {}", self.reason)
        } else {
            f.write_str(&self.reason)
        }
    }
}

impl std::error::Error for VerificationFailure {}

pub type Verification = std::result::Result<(), VerificationFailure>;

/// Recheck a family certificate from the matrix, frame and members.
pub fn verify_family(cert: &DisjointFamilyCertificate) -> Verification {
    let t = &cert.matrix;
    let n = t.n();
    let k = cert.members.len();
    if k == 0 {
        return Err(VerificationFailure::general("empty family"));
    }
    if cert.complete != (k >= cert.requested) {
        return Err(VerificationFailure::general(format!(
            "completeness flag disagrees with {k} members for {} requested",
            cert.requested
        )));
    }
    let s = dual_matrix(t);
    let frame = match &cert.frame {
        Some(f) => {
            if f.ambient_dim() != n || f.rank() == 0 || !f.is_saturated() {
                return Err(VerificationFailure::general("frame is not a saturated nonzero lattice"));
            }
            f.clone()
        }
        None => Lattice::full(n),
    };
    let c = restrict_to_frame(&s, &frame)
        .map_err(|_| VerificationFailure::general("frame is not invariant under the dual action"))?;
    let mut xs = Vec::with_capacity(k);
    for (i, m) in cert.members.iter().enumerate() {
        if m.covector.ambient_dim() != n {
            return Err(VerificationFailure::member(i, "dimension mismatch"));
        }
        if covector_to_hyperplane(&m.covector) != m.hyperplane {
            return Err(VerificationFailure::member(i, "hyperplane is not the kernel of its covector"));
        }
        let x = frame
            .coordinates(m.covector.coords())
            .ok_or_else(|| VerificationFailure::member(i, "covector lies outside the frame"))?;
        match m.status {
            OrbitStatus::Injective => {
                if is_periodic_vector(c.matrix(), &x) {
                    return Err(VerificationFailure::member(i, "orbit claimed injective is periodic"));
                }
            }
            OrbitStatus::Periodic { period } => {
                let ok = finite_orbit(c.matrix(), &x, period).is_some_and(|(p, _)| p == period);
                if !ok {
                    return Err(VerificationFailure::member(i, format!("orbit does not have period {period}")));
                }
            }
        }
        xs.push(x);
    }
    for i in 0..k {
        for j in i + 1..k {
            if cert.members[i].covector == cert.members[j].covector {
                return Err(VerificationFailure::pair(i, j, "duplicate member"));
            }
        }
    }
    let rigorous = match &cert.evidence {
        FamilyEvidence::Periodic => {
            for (i, m) in cert.members.iter().enumerate() {
                let OrbitStatus::Periodic { period } = m.status else {
                    return Err(VerificationFailure::member(i, "periodic evidence for an injective orbit"));
                };
                let (_, orbit) = finite_orbit(c.matrix(), &xs[i], period).expect("checked above");
                for (j, y) in xs.iter().enumerate().skip(i + 1) {
                    if orbit.contains(&canon(y.clone())) {
                        return Err(VerificationFailure::pair(i, j, "orbits coincide"));
                    }
                }
            }
            true
        }
        FamilyEvidence::Invariants { power, invariants } => {
            let map = InvariantMap::new(c.matrix(), *power).map_err(|_| {
                VerificationFailure::general(format!("dual action to the power {power} is not unipotent"))
            })?;
            if invariants.len() != k {
                return Err(VerificationFailure::general("one invariant set per member expected"));
            }
            for (i, x) in xs.iter().enumerate() {
                if map.of_orbit(x) != invariants[i] {
                    return Err(VerificationFailure::member(i, "claimed invariant does not match"));
                }
            }
            for i in 0..k {
                for j in i + 1..k {
                    if invariants[i] == invariants[j] {
                        return Err(VerificationFailure::pair(i, j, "invariants coincide"));
                    }
                }
            }
            true
        }
        FamilyEvidence::Growth {
            lyapunov_form,
            windows,
        } => {
            if windows.len() != k {
                return Err(VerificationFailure::general("one window per member expected"));
            }
            if let Some(q) = lyapunov_form {
                if q.rows() != c.n() || q.cols() != c.n() {
                    return Err(VerificationFailure::general("Lyapunov form has the wrong size"));
                }
            }
            let mut all_bounded = true;
            for (i, x) in xs.iter().enumerate() {
                let w = &windows[i];
                let (points, f, b) = window_points(&c, x, w.window_radius);
                if let Some(bound) = &w.norm_sq_bound {
                    let ok = lyapunov_form
                        .as_ref()
                        .is_some_and(|q| verify_exterior_bound(c.matrix(), q, &f, &b, bound));
                    if !ok {
                        return Err(VerificationFailure::member(i, "exterior norm bound does not hold"));
                    }
                }
                for (j, y) in xs.iter().enumerate().skip(i + 1) {
                    if points.contains(&canon(y.clone())) {
                        return Err(VerificationFailure::pair(i, j, "orbits meet inside the window"));
                    }
                    let covered = w.norm_sq_bound.as_ref().is_some_and(|bd| norm_sq(y) <= *bd);
                    all_bounded &= covered;
                }
            }
            all_bounded
        }
    };
    if cert.rigorous && !rigorous {
        return Err(VerificationFailure::general(
            "certificate claims rigor but some pair is only window-verified",
        ));
    }
    Ok(())
}

/// Recheck a non-expansivity certificate. Inconclusive certificates are
/// rejected since they certify nothing.
pub fn verify_non_expansivity(cert: &NonExpansivityCertificate) -> Verification {
    match cert {
        NonExpansivityCertificate::FiniteOrder {
            matrix,
            order,
            fixed,
        } => {
            if matrix_order(matrix) != MatrixOrder::Finite(*order) {
                return Err(VerificationFailure::general(format!("matrix does not have order {order}")));
            }
            if fixed.len() < 2 {
                return Err(VerificationFailure::general("at least two fixed subtori required"));
            }
            let p = matrix.pow(*order as i64);
            for (i, h) in fixed.iter().enumerate() {
                if act(&p, h).as_ref() != Ok(h) {
                    return Err(VerificationFailure::member(i, "not fixed"));
                }
                if let Some(j) = fixed[..i].iter().position(|g| g == h) {
                    return Err(VerificationFailure::pair(j, i, "duplicate fixed subtorus"));
                }
            }
            Ok(())
        }
        NonExpansivityCertificate::InfinitelyManyOrbits {
            matrix,
            refuted_orbit_bound,
            family,
            convergence,
            isolation,
        } => {
            if family.matrix != *matrix {
                return Err(VerificationFailure::general("family belongs to another matrix"));
            }
            verify_family(family)?;
            if family.members.len() <= *refuted_orbit_bound {
                return Err(VerificationFailure::general("family does not exceed the orbit bound"));
            }
            if convergence.len() != family.members.len() {
                return Err(VerificationFailure::general("one convergence witness per member expected"));
            }
            for (i, m) in family.members.iter().enumerate() {
                let w = &convergence[i];
                if w.member != i || !w.converges_to_full {
                    return Err(VerificationFailure::member(i, "missing convergence claim"));
                }
                let ok = converges_to_full(matrix, &m.hyperplane).unwrap_or(false);
                if !ok {
                    return Err(VerificationFailure::member(i, "orbit does not converge to the full torus"));
                }
                if let (Some(e), Some(d)) = (w.exponent, &w.distance) {
                    let img = act(&matrix.pow(e as i64), &m.hyperplane)
                        .map_err(|e| VerificationFailure::member(i, e.to_string()))?;
                    let est = hausdorff_distance(&img, &Subtorus::full(matrix.n()), d.resolution)
                        .map_err(|e| VerificationFailure::member(i, e.to_string()))?;
                    if est != *d || est.upper() >= CONVERGENCE_THRESHOLD {
                        return Err(VerificationFailure::member(i, "metric witness does not reproduce"));
                    }
                }
            }
            if let Some(rep) = isolation {
                let again = isolation_radius_lower_bound(
                    &family.members[0].hyperplane,
                    rep.norm_cap,
                    rep.resolution,
                )
                .map_err(|e| VerificationFailure::general(e.to_string()))?;
                if again != *rep {
                    return Err(VerificationFailure::general("isolation report does not reproduce"));
                }
            }
            Ok(())
        }
        NonExpansivityCertificate::Inconclusive { reason, .. } => Err(VerificationFailure::general(
            format!("inconclusive certificate: {reason}"),
        )),
    }
}
