//! Anticodes in the space `J_q(n, w)` of length-`n` words of weight `w`.
//!
//! `A'(n, w, t)` holds the words whose first `t` coordinates are all
//! nonzero; `A''(n, w, t)` those whose first `t` coordinates are all zero.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{hamming, support, weight, ConstantWeightCode, Word};
use crate::coloring::{max_clique, Budget, Graph};
use crate::math::binom;
use crate::steiner::{next_subset, Block};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnticodeError {
    #[error("invalid anticode parameters: {0}")]
    Parameters(String),
    #[error("{needed} words exceed the enumeration budget of {budget}")]
    Budget { needed: BigUint, budget: u64 },
    #[error("need q >= 3 to compare against the closed-form diameter, got q = {0}")]
    AlphabetTooSmall(u32),
    #[error("maximum clique search ran out of nodes")]
    SearchExhausted,
    #[error("projection distance {found} is below the guaranteed {guaranteed}")]
    ProjectionBound { found: usize, guaranteed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnticodeKind {
    /// Full-weight prefix: `A'(n, w, t)`.
    Prime,
    /// All-zero prefix: `A''(n, w, t)`.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct AnticodeSpec {
    pub kind: AnticodeKind,
    pub n: usize,
    pub w: usize,
    pub t: usize,
    pub q: u32,
}

impl AnticodeSpec {
    pub fn new(kind: AnticodeKind, n: usize, w: usize, t: usize, q: u32) -> Result<Self, AnticodeError> {
        let ok = q >= 2
            && w <= n
            && match kind {
                AnticodeKind::Prime => t <= w && 2 * w <= n + t,
                AnticodeKind::Double => t + w <= n && 2 * w + t >= n,
            };
        if !ok {
            return Err(AnticodeError::Parameters(format!("{kind:?} with n={n} w={w} t={t} q={q}")));
        }
        Ok(AnticodeSpec { kind, n, w, t, q })
    }

    pub fn prime(n: usize, w: usize, t: usize, q: u32) -> Result<Self, AnticodeError> {
        Self::new(AnticodeKind::Prime, n, w, t, q)
    }

    pub fn double(n: usize, w: usize, t: usize, q: u32) -> Result<Self, AnticodeError> {
        Self::new(AnticodeKind::Double, n, w, t, q)
    }

    pub fn size(&self) -> BigUint {
        let tail = match self.kind {
            AnticodeKind::Prime => binom((self.n - self.t) as u64, (self.w - self.t) as i64),
            AnticodeKind::Double => binom((self.n - self.t) as u64, self.w as i64),
        };
        tail * BigUint::from(self.q - 1).pow(self.w as u32)
    }

    /// The diameter the family is built to have (attained when `q >= 3`).
    pub fn diameter(&self) -> usize {
        match self.kind {
            AnticodeKind::Prime => 2 * self.w - self.t,
            AnticodeKind::Double => self.n - self.t,
        }
    }

    /// Distinct supports of the members, as 1-based point sets.
    pub fn supports(&self) -> Vec<Block> {
        let (free, fixed) = match self.kind {
            AnticodeKind::Prime => (self.w - self.t, (1..=self.t).collect::<Block>()),
            AnticodeKind::Double => (self.w, Vec::new()),
        };
        let tail: Vec<usize> = (self.t + 1..=self.n).collect();
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (1..=free).collect();
        loop {
            let mut s = fixed.clone();
            s.extend(idx.iter().map(|&i| tail[i - 1]));
            out.push(s);
            if !next_subset(&mut idx, tail.len()) {
                return out;
            }
        }
    }

    /// Every member, supports in lexicographic order and symbols varying fastest
    /// at the last support position.
    pub fn members(&self, budget: u64) -> Result<Vec<Word>, AnticodeError> {
        let size = self.size();
        if size > BigUint::from(budget) {
            return Err(AnticodeError::Budget { needed: size, budget });
        }
        let mut out = Vec::new();
        for s in self.supports() {
            fill_words(self.n, self.q, &s, &mut out);
        }
        Ok(out)
    }
}

/// Appends all words with exactly the support `s`.
fn fill_words(n: usize, q: u32, s: &[usize], out: &mut Vec<Word>) {
    let mut word = vec![0u32; n];
    for &p in s {
        word[p - 1] = 1;
    }
    loop {
        out.push(word.clone());
        let mut i = s.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            let pos = s[i] - 1;
            if word[pos] + 1 < q {
                word[pos] += 1;
                break;
            }
            word[pos] = 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiameterReport {
    pub spec: AnticodeSpec,
    pub diameter: usize,
    pub claimed: usize,
    pub witness: Option<(Word, Word)>,
}

impl DiameterReport {
    pub fn matches(&self) -> bool {
        self.diameter == self.claimed
    }
}

/// Largest pairwise distance in a word set, with an attaining pair.
pub fn diameter_of(words: &[Word]) -> (usize, Option<(usize, usize)>) {
    let mut best = (0, None);
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = hamming(&words[i], &words[j]);
            if best.1.is_none() || d > best.0 {
                best = (d, Some((i, j)));
            }
        }
    }
    best
}

/// Exhaustive diameter of the member set (at most `budget` words).
pub fn anticode_diameter_check(spec: &AnticodeSpec, budget: u64) -> Result<DiameterReport, AnticodeError> {
    if spec.q < 3 {
        return Err(AnticodeError::AlphabetTooSmall(spec.q));
    }
    let words = spec.members(budget)?;
    let (diameter, pair) = diameter_of(&words);
    Ok(DiameterReport {
        spec: *spec,
        diameter,
        claimed: spec.diameter(),
        witness: pair.map(|(i, j)| (words[i].clone(), words[j].clone())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EkrVariant {
    /// `n >= (w-s+1)(s+1)`: at most `C(n-s, w-s)`.
    I,
    /// `2w-s <= n <= (w-s+1)(2w-s-1)/(w-s)`: at most `C(2w-s, w)`.
    Ii,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EkrBound {
    pub variant: EkrVariant,
    pub applicable: bool,
    #[serde(serialize_with = "crate::ser::display")]
    pub bound: BigUint,
}

/// Bound on a family of `w`-subsets of an `n`-set pairwise meeting in at
/// least `s` points, with a flag saying whether its hypothesis holds.
pub fn ekr_bound(n: usize, w: usize, s: usize, variant: EkrVariant) -> Result<EkrBound, AnticodeError> {
    if s > w || w > n {
        return Err(AnticodeError::Parameters(format!("need s <= w <= n, got n={n} w={w} s={s}")));
    }
    let (applicable, bound) = match variant {
        EkrVariant::I => (n >= (w - s + 1) * (s + 1), binom((n - s) as u64, (w - s) as i64)),
        EkrVariant::Ii => {
            let upper_ok = if w == s {
                true
            } else {
                let upper = BigRational::new(
                    (((w - s + 1) * (2 * w - s - 1)) as u64).into(),
                    ((w - s) as u64).into(),
                );
                BigRational::from_integer((n as u64).into()) <= upper
            };
            (2 * w - s <= n && upper_ok, binom((2 * w - s) as u64, w as i64))
        }
    };
    Ok(EkrBound { variant, applicable, bound })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxAnticode {
    pub n: usize,
    pub w: usize,
    pub q: u32,
    pub max_diameter: usize,
    pub size: usize,
    pub witness: Vec<Word>,
    pub nodes: u64,
}

/// Largest set of words in `J_q(n, w)` with pairwise distance at most
/// `max_diameter`, found as a maximum clique of the compatibility graph.
pub fn max_anticode_bruteforce(
    n: usize,
    w: usize,
    q: u32,
    max_diameter: usize,
    vertex_budget: u64,
    budget: Budget,
) -> Result<MaxAnticode, AnticodeError> {
    if w > n || q < 2 {
        return Err(AnticodeError::Parameters(format!("n={n} w={w} q={q}")));
    }
    let needed = binom(n as u64, w as i64) * BigUint::from(q - 1).pow(w as u32);
    if needed > BigUint::from(vertex_budget) {
        return Err(AnticodeError::Budget { needed, budget: vertex_budget });
    }
    let mut words = Vec::new();
    let mut idx: Block = (1..=w).collect();
    loop {
        fill_words(n, q, &idx, &mut words);
        if !next_subset(&mut idx, n) {
            break;
        }
    }
    let graph = Graph::from_fn(words.len(), |a, b| hamming(&words[a], &words[b]) <= max_diameter);
    let (clique, nodes) = max_clique(&graph, budget).ok_or(AnticodeError::SearchExhausted)?;
    Ok(MaxAnticode {
        n,
        w,
        q,
        max_diameter,
        size: clique.len(),
        witness: clique.into_iter().map(|v| words[v].clone()).collect(),
        nodes,
    })
}

/// Replaces every nonzero symbol by 1. Words are kept in order, so the
/// result can repeat words.
pub fn binary_projection(code: &ConstantWeightCode) -> ConstantWeightCode {
    let words = code.words().iter().map(|w| w.iter().map(|&s| u32::from(s != 0)).collect()).collect();
    ConstantWeightCode::new(code.n(), 2, words).expect("same length")
}

/// [`binary_projection`], asserting that a weight-`w` code of distance at
/// least `2w - s + 1` projects to distance at least `2w - 2s + 2`. When the
/// hypothesis fails nothing is asserted.
pub fn binary_projection_checked(code: &ConstantWeightCode, s: usize) -> Result<ConstantWeightCode, AnticodeError> {
    let projected = binary_projection(code);
    let Some(w) = code.weight() else {
        return Ok(projected);
    };
    let words = code.words();
    let min_d = |ws: &[Word]| {
        (0..ws.len())
            .flat_map(|i| (i + 1..ws.len()).map(move |j| (i, j)))
            .map(|(i, j)| hamming(&ws[i], &ws[j]))
            .min()
    };
    if let (Some(d), Some(pd)) = (min_d(words), min_d(projected.words())) {
        if d + s > 2 * w {
            let guaranteed = (2 * w + 2).saturating_sub(2 * s);
            if pd < guaranteed {
                return Err(AnticodeError::ProjectionBound { found: pd, guaranteed });
            }
        }
    }
    debug_assert!(projected.words().iter().zip(words).all(|(p, x)| weight(p) == weight(x) && support(p) == support(x)));
    Ok(projected)
}
