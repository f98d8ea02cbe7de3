//! Bounds on the smallest alphabets `q'0(t, k, n)` and `q''0(t, k, n)`.
//!
//! `q'0` is the least `q` admitting a code of distance `2k - t + 1` whose
//! supports are the blocks of an `S(t, k, n)`; `q''0` the least `q` for
//! supports equal to block complements and distance `n - t + 1`.
//! Every bound is recorded with the argument that produced it.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::codes::{construct_f5double, construct_f5prime, ConstantWeightCode};
use crate::math::floor;
use crate::steiner::{intersection_profile, intersection_size, system_parameters, SteinerError, SteinerSystem};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Steiner(#[from] SteinerError),
    #[error("closed forms cover t = 2 and t = 3 only, got t = {0}")]
    UnsupportedStrength(usize),
    #[error("incomplete chromatic data: {0}")]
    IncompleteEvidence(String),
    #[error("number too large: {0}")]
    Overflow(String),
    #[error("min_collisions needs at least one colour")]
    NoColors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Qprime0,
    Qdouble0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// All-distinct column symbols.
    Trivial,
    /// The exact value for `t = 2`.
    T2,
    /// Chromatic numbers of derived systems, `t = 3`.
    T3,
    /// Every derived system resolvable, `t = 3`.
    Nw3,
    /// Window colouring construction for `t >= 3`.
    Theorem4,
    /// An explicit verified code.
    Construction,
    /// Chromatic number (or its counting bound) of derived systems.
    Chi,
    /// Counting equal symbols per column.
    Collision,
    /// Exhaustive search.
    Search,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub kind: BoundKind,
    pub value: u64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsCertificate {
    pub target: Target,
    pub t: usize,
    pub k: usize,
    pub n: usize,
    pub bounds: Vec<Bound>,
    pub resolved: Option<u64>,
    pub witness_file: Option<String>,
}

impl BoundsCertificate {
    pub fn new(target: Target, t: usize, k: usize, n: usize) -> Self {
        BoundsCertificate { target, t, k, n, bounds: Vec::new(), resolved: None, witness_file: None }
    }

    pub fn add(&mut self, kind: BoundKind, value: u64, provenance: Provenance) {
        let b = Bound { kind, value, provenance };
        if !self.bounds.contains(&b) {
            self.bounds.push(b);
        }
        self.resolved = self.resolve();
    }

    pub fn lower(&self) -> Option<u64> {
        self.bounds.iter().filter(|b| b.kind == BoundKind::Lower).map(|b| b.value).max()
    }

    pub fn upper(&self) -> Option<u64> {
        self.bounds.iter().filter(|b| b.kind == BoundKind::Upper).map(|b| b.value).min()
    }

    /// Every lower bound is at most every upper bound.
    pub fn consistent(&self) -> bool {
        match (self.lower(), self.upper()) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        }
    }

    fn resolve(&self) -> Option<u64> {
        match (self.lower(), self.upper()) {
            (Some(l), Some(u)) if l == u => Some(l),
            _ => None,
        }
    }
}

fn to_u64(x: &BigUint, what: &str) -> Result<u64, BoundsError> {
    x.to_u64().ok_or_else(|| BoundsError::Overflow(what.to_string()))
}

/// `(r + 1, M - r + 1)`: upper bounds on `q'0` and `q''0`.
pub fn trivial_bounds(t: usize, k: usize, n: usize) -> Result<(u64, u64), BoundsError> {
    let p = system_parameters(t, k, n)?;
    Ok((p.replication + 1, p.blocks - p.replication + 1))
}

/// What is known about chromatic numbers of the `S(2, k-1, n-1)` systems
/// derived (at one point) from an `S(3, k, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChiEvidence {
    /// `chi` of the derived system at each of the `n` points of one system.
    DerivedOfSystem { chis: Vec<usize> },
    /// One derived `chi` of a system whose automorphisms act transitively
    /// on points (so all its derived systems are isomorphic).
    PointTransitive { chi: usize },
    /// `chi` of every isomorphism class of `S(2, k-1, n-1)`; at least one
    /// `S(3, k, n)` is assumed to exist.
    AllDerivedClasses { chis: Vec<usize> },
    /// Some system has every derived system resolvable.
    AllDerivedResolvable,
}

/// Closed-form bounds on `q'0` for `t = 2` and `t = 3`.
pub fn q0_closed_forms(t: usize, k: usize, n: usize, evidence: &[ChiEvidence]) -> Result<BoundsCertificate, BoundsError> {
    if !(2..=3).contains(&t) {
        return Err(BoundsError::UnsupportedStrength(t));
    }
    let (upper, _) = trivial_bounds(t, k, n)?;
    let mut cert = BoundsCertificate::new(Target::Qprime0, t, k, n);
    cert.add(BoundKind::Upper, upper, Provenance::Trivial);
    if t == 2 {
        let exact = ((n - 1) / (k - 1) + 1) as u64;
        cert.add(BoundKind::Lower, exact, Provenance::T2);
        cert.add(BoundKind::Upper, exact, Provenance::T2);
        return Ok(cert);
    }
    // Disjoint blocks of a derived S(2, k-1, n-1) number at most
    // floor((n-1)/(k-1)), which bounds every derived chi from below.
    let derived_blocks = system_parameters(2, k - 1, n - 1)?.blocks;
    let per_class = ((n - 1) / (k - 1)) as u64;
    cert.add(BoundKind::Lower, derived_blocks.div_ceil(per_class) + 1, Provenance::Chi);
    for ev in evidence {
        match ev {
            ChiEvidence::DerivedOfSystem { chis } => {
                if chis.len() != n {
                    return Err(BoundsError::IncompleteEvidence(format!(
                        "{} derived chromatic numbers for {n} points",
                        chis.len()
                    )));
                }
                let max = *chis.iter().max().expect("n > 0");
                cert.add(BoundKind::Upper, max as u64 + 1, Provenance::T3);
            }
            ChiEvidence::PointTransitive { chi } => {
                cert.add(BoundKind::Upper, *chi as u64 + 1, Provenance::T3);
            }
            ChiEvidence::AllDerivedClasses { chis } => {
                let (Some(&min), Some(&max)) = (chis.iter().min(), chis.iter().max()) else {
                    return Err(BoundsError::IncompleteEvidence("no isomorphism classes listed".into()));
                };
                cert.add(BoundKind::Lower, min as u64 + 1, Provenance::T3);
                cert.add(BoundKind::Upper, max as u64 + 1, Provenance::T3);
            }
            ChiEvidence::AllDerivedResolvable => {
                cert.add(BoundKind::Upper, ((n - 2) / (k - 2) + 1) as u64, Provenance::Nw3);
            }
        }
    }
    Ok(cert)
}

/// `q'0` bounds for `t >= 3` from the trivial construction and, when
/// `derived_class_chis` lists `chi` for every isomorphism class of the
/// `S(t-1, k-1, n-1)` derived at a point, the bound `min chi + 1`.
pub fn qprime0_general(t: usize, k: usize, n: usize, derived_class_chis: &[usize]) -> Result<BoundsCertificate, BoundsError> {
    let (upper, _) = trivial_bounds(t, k, n)?;
    let mut cert = BoundsCertificate::new(Target::Qprime0, t, k, n);
    cert.add(BoundKind::Upper, upper, Provenance::Trivial);
    if let Some(&min) = derived_class_chis.iter().min() {
        cert.add(BoundKind::Lower, min as u64 + 1, Provenance::Chi);
    }
    Ok(cert)
}

/// `C(a, 2) * colors + b * a` with `a = R / colors`, `b = R mod colors`:
/// the fewest pairs of equal symbols when `R` cells get `colors` symbols.
pub fn min_collisions(r: u64, colors: u64) -> Result<u64, BoundsError> {
    if colors == 0 {
        return Err(BoundsError::NoColors);
    }
    let (a, b) = r.div_rem(&colors);
    Ok(colors * (a * a.saturating_sub(1) / 2) + b * a)
}

fn min_collisions_big(r: &BigUint, colors: &BigUint) -> BigUint {
    let (a, b) = r.div_rem(colors);
    let pairs = if a.is_zero() { BigUint::zero() } else { &a * (&a - 1u32) / 2u32 };
    colors * pairs + b * a
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionBound {
    /// Nonzeros per column, `M - r`.
    #[serde(rename = "R", serialize_with = "crate::ser::display")]
    pub r: BigUint,
    /// Average allowed collisions per column, exact.
    #[serde(serialize_with = "crate::ser::display")]
    pub ptilde: BigRational,
    #[serde(serialize_with = "crate::ser::display")]
    pub floor_ptilde: BigInt,
    /// Least `q` meeting `(q-1) C(a,2) + b a <= floor(ptilde)`.
    pub lower_bound: u64,
    /// The weaker `R - floor(ptilde) + 1`.
    pub weak_lower_bound: u64,
    /// `a`, `b` and the collision minimum at `q = lower_bound`.
    pub a: u64,
    pub b: u64,
    pub min_collisions: u64,
}

/// `ptilde = (M / 2n) * sum_{i=0}^{t-2} (t-1-i) * Lambda_i`, where
/// `Lambda_i` counts blocks meeting a fixed block in exactly `i` points.
pub fn ptilde(t: usize, k: usize, n: usize) -> Result<BigRational, BoundsError> {
    let params = system_parameters(t, k, n)?;
    let profile = intersection_profile(t, k, n)?;
    let sum: u64 = (0..t.saturating_sub(1)).map(|i| (t - 1 - i) as u64 * profile.counts[i]).sum();
    Ok(BigRational::new(BigInt::from(params.blocks) * BigInt::from(sum), BigInt::from(2 * n as u64)))
}

/// The `t = 2` closed form of [`ptilde`].
pub fn ptilde_t2(k: usize, n: usize) -> BigRational {
    let (k, n) = (BigInt::from(k), BigInt::from(n));
    let one = BigInt::from(1);
    let num = (&n - &one) * ((&n - &k * &k) * (&n - &one) + &k * (&k - &one) * (&k - &one));
    let den = BigInt::from(2) * &k * &k * (&k - &one) * (&k - &one);
    BigRational::new(num, den)
}

/// Lower bounds on `q''0(t, k, n)` from counting collisions.
pub fn collision_lower_bound(t: usize, k: usize, n: usize) -> Result<CollisionBound, BoundsError> {
    let params = system_parameters(t, k, n)?;
    let r = BigUint::from(params.blocks - params.replication);
    let pt = ptilde(t, k, n)?;
    if t == 2 {
        debug_assert_eq!(pt, ptilde_t2(k, n));
    }
    let fl = floor(&pt);
    let allowed = fl.to_biguint().unwrap_or_default();
    // min_collisions is nonincreasing in the number of colours and is 0
    // once colours >= R, so binary search the least q - 1 that fits.
    let (mut lo, mut hi) = (BigUint::from(1u32), r.clone().max(BigUint::from(1u32)));
    while lo < hi {
        let mid = (&lo + &hi) / 2u32;
        if min_collisions_big(&r, &mid) <= allowed {
            hi = mid;
        } else {
            lo = mid + 1u32;
        }
    }
    let colors = lo;
    let weak = if r > allowed { &r - &allowed + 1u32 } else { BigUint::from(1u32) };
    let (a, b) = r.div_rem(&colors);
    Ok(CollisionBound {
        lower_bound: to_u64(&(&colors + 1u32), "collision bound")?,
        weak_lower_bound: to_u64(&weak.max(BigUint::from(2u32)), "collision bound")?,
        a: to_u64(&a, "a")?,
        b: to_u64(&b, "b")?,
        min_collisions: to_u64(&min_collisions_big(&r, &colors), "collisions")?,
        r,
        ptilde: pt,
        floor_ptilde: fl,
    })
}

/// Trivial and collision bounds on `q''0`.
pub fn qdouble0_bounds(t: usize, k: usize, n: usize) -> Result<(BoundsCertificate, CollisionBound), BoundsError> {
    let (_, upper) = trivial_bounds(t, k, n)?;
    let cb = collision_lower_bound(t, k, n)?;
    let mut cert = BoundsCertificate::new(Target::Qdouble0, t, k, n);
    cert.add(BoundKind::Upper, upper, Provenance::Trivial);
    cert.add(BoundKind::Lower, cb.lower_bound, Provenance::Collision);
    Ok((cert, cb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Supports are the blocks.
    F5prime,
    /// Supports are the block complements.
    F5double,
}

impl Family {
    pub fn target(self) -> Target {
        match self {
            Family::F5prime => Target::Qprime0,
            Family::F5double => Target::Qdouble0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Refutation {
    pub q: u32,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub family: Family,
    /// Every `q` below this was refuted.
    pub lower: u32,
    /// A witness exists at this `q`.
    pub upper: u32,
    pub witness: ConstantWeightCode,
    pub refuted: Vec<Refutation>,
    pub nodes: u64,
}

impl SearchOutcome {
    pub fn exact(&self) -> Option<u32> {
        (self.lower == self.upper).then_some(self.upper)
    }

    pub fn certificate(&self, sys: &SteinerSystem) -> BoundsCertificate {
        let mut cert = BoundsCertificate::new(self.family.target(), sys.t(), sys.k(), sys.n());
        cert.add(BoundKind::Lower, self.lower as u64, Provenance::Search);
        let provenance = if self.exact().is_some() { Provenance::Search } else { Provenance::Trivial };
        cert.add(BoundKind::Upper, self.upper as u64, provenance);
        cert
    }
}

/// Least `q` for which the symbols of a code with the family's supports
/// on `sys` can be chosen to reach the family's distance.
///
/// Tries `q = 2, 3, ..` with a backtracking search over the code matrix,
/// column by column; within a column symbols are introduced in first-use
/// order. Each pair of words may agree on at most `|S u T| - d` nonzero
/// positions. If the node budget runs out, the result is the interval
/// from the first unrefuted `q` to the all-distinct construction.
pub fn search_min_q(sys: &SteinerSystem, family: Family, max_nodes: u64) -> Result<SearchOutcome, BoundsError> {
    let n = sys.n();
    let supports: Vec<Vec<usize>> = match family {
        Family::F5prime => sys.blocks().to_vec(),
        Family::F5double => sys.blocks().iter().map(|b| (1..=n).filter(|p| !b.contains(p)).collect()).collect(),
    };
    let d = match family {
        Family::F5prime => 2 * sys.k() - sys.t() + 1,
        Family::F5double => n - sys.t() + 1,
    };
    let (trivial, trivial_code) = match family {
        Family::F5prime => {
            let q = sys.replication() as u32 + 1;
            (q, construct_f5prime(sys, q))
        }
        Family::F5double => {
            let q = (sys.block_count() - sys.replication()) as u32 + 1;
            (q, construct_f5double(sys, q))
        }
    };
    let trivial_code = trivial_code.map_err(|e| BoundsError::IncompleteEvidence(e.to_string()))?;
    let m = supports.len();
    let mut slack = vec![vec![0i64; m]; m];
    for a in 0..m {
        for b in 0..m {
            if a != b {
                let meet = intersection_size(&supports[a], &supports[b]);
                slack[a][b] = (supports[a].len() + supports[b].len() - meet) as i64 - d as i64;
            }
        }
    }
    let columns: Vec<Vec<usize>> = (1..=n).map(|i| (0..m).filter(|&j| supports[j].contains(&i)).collect()).collect();
    let mut refuted = Vec::new();
    let mut total = 0;
    for q in 2..trivial {
        let mut s = MatrixSearch::new(&columns, slack.clone(), q, max_nodes - total.min(max_nodes));
        let found = s.run();
        total += s.nodes;
        match found {
            Some(true) => {
                let mut words = vec![vec![0u32; n]; m];
                for (i, col) in columns.iter().enumerate() {
                    for (pos, &j) in col.iter().enumerate() {
                        words[j][i] = s.symbols[i][pos];
                    }
                }
                let witness = ConstantWeightCode::new(n, q, words).expect("lengths");
                return Ok(SearchOutcome { family, lower: q, upper: q, witness, refuted, nodes: total });
            }
            Some(false) => refuted.push(Refutation { q, nodes: s.nodes }),
            None => {
                return Ok(SearchOutcome { family, lower: q, upper: trivial, witness: trivial_code, refuted, nodes: total })
            }
        }
    }
    Ok(SearchOutcome { family, lower: trivial, upper: trivial, witness: trivial_code, refuted, nodes: total })
}

struct MatrixSearch<'a> {
    columns: &'a [Vec<usize>],
    slack: Vec<Vec<i64>>,
    colors: u32,
    symbols: Vec<Vec<u32>>,
    /// Collisions still needed by columns after index `c`.
    needed_after: Vec<u64>,
    spare: i64,
    nodes: u64,
    max_nodes: u64,
}

impl<'a> MatrixSearch<'a> {
    fn new(columns: &'a [Vec<usize>], slack: Vec<Vec<i64>>, q: u32, max_nodes: u64) -> Self {
        let colors = q - 1;
        let mut needed_after = vec![0; columns.len() + 1];
        for c in (0..columns.len()).rev() {
            needed_after[c] = needed_after[c + 1] + min_collisions(columns[c].len() as u64, colors as u64).unwrap();
        }
        let m = slack.len();
        let spare = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).map(|(a, b)| slack[a][b].max(0)).sum();
        MatrixSearch {
            columns,
            slack,
            colors,
            symbols: columns.iter().map(|c| vec![0; c.len()]).collect(),
            needed_after,
            spare,
            nodes: 0,
            max_nodes,
        }
    }

    fn run(&mut self) -> Option<bool> {
        if self.slack.iter().enumerate().any(|(a, row)| row.iter().enumerate().any(|(b, &s)| a != b && s < 0)) {
            return Some(false);
        }
        self.cell(0, 0, 0)
    }

    fn cell(&mut self, c: usize, pos: usize, used: u32) -> Option<bool> {
        if c == self.columns.len() {
            return Some(true);
        }
        if pos == self.columns[c].len() {
            if (self.spare as u64) < self.needed_after[c + 1] {
                return Some(false);
            }
            return self.cell(c + 1, 0, 0);
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return None;
        }
        let j = self.columns[c][pos];
        for sym in 1..=(used + 1).min(self.colors) {
            let clashes: Vec<usize> =
                (0..pos).filter(|&p| self.symbols[c][p] == sym).map(|p| self.columns[c][p]).collect();
            if clashes.iter().any(|&l| self.slack[j][l] == 0) {
                continue;
            }
            for &l in &clashes {
                self.slack[j][l] -= 1;
                self.slack[l][j] -= 1;
            }
            self.spare -= clashes.len() as i64;
            self.symbols[c][pos] = sym;
            let r = self.cell(c, pos + 1, used.max(sym));
            self.spare += clashes.len() as i64;
            for &l in &clashes {
                self.slack[j][l] += 1;
                self.slack[l][j] += 1;
            }
            match r {
                Some(false) => {}
                other => return other,
            }
        }
        self.symbols[c][pos] = 0;
        Some(false)
    }
}
