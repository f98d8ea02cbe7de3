//! Steiner systems `S(t, k, n)` on the point set `{1, ..., n}`.
//!
//! Blocks are kept sorted ascending and the block family is sorted
//! lexicographically; that canonical order is the "block order" every other
//! module refers to when it talks about block indices.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::math::{binom, binom_u64, exact_div, FieldError, FieldSpec};

pub type Block = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SteinerError {
    #[error("invalid Steiner system: {0}")]
    Invalid(Defect),
    #[error("{0}")]
    Inadmissible(Inadmissible),
    #[error("cannot derive with respect to {alpha:?}: need 0 < |alpha| < t = {t} and points in 1..={n}")]
    BadDerivation { alpha: Vec<usize>, t: usize, n: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown catalog entry {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },
    #[error("no S({t},{k},{n}) exists")]
    Nonexistent { t: usize, k: usize, n: usize },
    #[error("reading {path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// The first reason a candidate block family fails to be a Steiner system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Defect {
    /// Parameters violate `0 < t <= k < n`.
    Parameters { t: usize, k: usize, n: usize },
    MalformedBlock { index: usize, block: Block },
    /// A t-subset contained in no block.
    Uncovered(Vec<usize>),
    /// A t-subset contained in more than one block.
    Overcovered { subset: Vec<usize>, count: usize },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::Parameters { t, k, n } => write!(f, "parameters ({t},{k},{n}) violate 0 < t <= k < n"),
            Defect::MalformedBlock { index, block } => write!(f, "block #{index} {block:?} is malformed"),
            Defect::Uncovered(s) => write!(f, "{s:?} lies in no block"),
            Defect::Overcovered { subset, count } => write!(f, "{subset:?} lies in {count} blocks"),
        }
    }
}

/// A divisibility condition that fails: `C(n-i, t-i) / C(k-i, t-i)` is
/// not an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inadmissible {
    pub t: usize,
    pub k: usize,
    pub n: usize,
    pub level: usize,
}

impl fmt::Display for Inadmissible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (t, k, n, i) = (self.t, self.k, self.n, self.level);
        write!(f, "({t},{k},{n}) is not admissible: C({},{}) / C({},{}) is not an integer", n - i, t - i, k - i, t - i)
    }
}

/// Lexicographic successor of a sorted `size`-subset of `{1..=n}`.
pub(crate) fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let size = subset.len();
    for i in (0..size).rev() {
        if subset[i] < n - (size - 1 - i) {
            subset[i] += 1;
            for j in i + 1..size {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All `size`-subsets of the given sorted points, lexicographically.
pub(crate) fn subsets_of(points: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size > points.len() {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (1..=size).collect();
    let mut out = Vec::new();
    loop {
        out.push(idx.iter().map(|&i| points[i - 1]).collect());
        if !next_subset(&mut idx, points.len()) {
            return out;
        }
    }
}

/// Colex ranking of t-subsets of `{1..=n}`.
struct SubsetRanker {
    table: Vec<Vec<u64>>,
}

impl SubsetRanker {
    fn new(n: usize, t: usize) -> Self {
        let table = (0..=n)
            .map(|m| (0..=t).map(|j| binom(m as u64, j as i64).to_u64().unwrap_or(u64::MAX)).collect())
            .collect();
        SubsetRanker { table }
    }

    fn rank(&self, subset: &[usize]) -> usize {
        subset
            .iter()
            .enumerate()
            .map(|(i, &c)| self.table[c - 1][i + 1] as usize)
            .sum()
    }
}

pub(crate) fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Checks that `blocks` form an `S(t, k, n)` on `{1..=n}`. Blocks may be
/// given in any order, but each must list `k` distinct points ascending.
/// On failure, reports the lexicographically first offending t-subset.
pub fn validate_system(t: usize, k: usize, n: usize, blocks: &[Block]) -> Result<(), Defect> {
    if !(0 < t && t <= k && k < n) {
        return Err(Defect::Parameters { t, k, n });
    }
    for (index, block) in blocks.iter().enumerate() {
        let ascending = block.windows(2).all(|w| w[0] < w[1]);
        let in_range = block.iter().all(|&p| (1..=n).contains(&p));
        if block.len() != k || !ascending || !in_range {
            return Err(Defect::MalformedBlock { index, block: block.clone() });
        }
    }
    let ranker = SubsetRanker::new(n, t);
    let mut counts = vec![0usize; binom_u64(n as u64, t as i64) as usize];
    for block in blocks {
        for sub in subsets_of(block, t) {
            counts[ranker.rank(&sub)] += 1;
        }
    }
    let mut subset: Vec<usize> = (1..=t).collect();
    loop {
        match counts[ranker.rank(&subset)] {
            1 => {}
            0 => return Err(Defect::Uncovered(subset)),
            count => return Err(Defect::Overcovered { subset, count }),
        }
        if !next_subset(&mut subset, n) {
            return Ok(());
        }
    }
}

/// Block count and replication number of an admissible `S(t, k, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParameters {
    pub blocks: u64,
    pub replication: u64,
    /// `C(n-i, t-i) / C(k-i, t-i)` for `i = 0..t`: blocks through a fixed
    /// i-set of points.
    pub derived_counts: Vec<u64>,
}

pub fn system_parameters(t: usize, k: usize, n: usize) -> Result<SystemParameters, SteinerError> {
    if !(0 < t && t <= k && k < n) {
        return Err(SteinerError::Invalid(Defect::Parameters { t, k, n }));
    }
    let mut derived_counts = Vec::with_capacity(t);
    for i in 0..t {
        let num = binom((n - i) as u64, (t - i) as i64);
        let den = binom((k - i) as u64, (t - i) as i64);
        let count = exact_div(&num, &den)
            .ok_or(SteinerError::Inadmissible(Inadmissible { t, k, n, level: i }))?;
        derived_counts.push(count.to_u64().expect("block count fits in u64"));
    }
    Ok(SystemParameters {
        blocks: derived_counts[0],
        replication: if t >= 2 { derived_counts[1] } else { 1 },
        derived_counts,
    })
}

/// `lambda[i][j]`: blocks containing a fixed i-subset of a block and
/// avoiding a fixed disjoint j-subset of it. `counts[i]`: blocks meeting a
/// fixed block in exactly `i` points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionProfile {
    pub lambda: Vec<Vec<BigInt>>,
    pub counts: Vec<u64>,
}

pub fn intersection_profile(t: usize, k: usize, n: usize) -> Result<IntersectionProfile, SteinerError> {
    if !(0 < t && t <= k && k < n) {
        return Err(SteinerError::Invalid(Defect::Parameters { t, k, n }));
    }
    let inadmissible = |level| SteinerError::Inadmissible(Inadmissible { t, k, n, level });
    // table[i][j], i + j <= k, computed with exact rationals.
    let mut table: Vec<Vec<BigRational>> = (0..=k)
        .map(|i| {
            let base = if i <= t {
                crate::math::ratio(
                    &binom((n - i) as u64, (t - i) as i64),
                    &binom((k - i) as u64, (t - i) as i64),
                )
            } else {
                BigRational::one()
            };
            vec![base]
        })
        .collect();
    for j in 1..=k {
        for i in 0..=k - j {
            let value = &table[i][j - 1] - &table[i + 1][j - 1];
            table[i].push(value);
        }
    }
    let mut lambda = Vec::with_capacity(k + 1);
    for (i, row) in table.iter().enumerate() {
        let mut ints = Vec::with_capacity(row.len());
        for value in row {
            if !value.is_integer() {
                return Err(inadmissible(i.min(t.saturating_sub(1))));
            }
            ints.push(value.to_integer());
        }
        lambda.push(ints);
    }
    let mut counts = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let count = BigInt::from(binom(k as u64, i as i64)) * &lambda[i][k - i];
        if count.is_negative() {
            return Err(inadmissible(0));
        }
        counts.push(count.to_u64().expect("intersection count fits in u64"));
    }
    Ok(IntersectionProfile { lambda, counts })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SteinerSystem {
    t: usize,
    k: usize,
    n: usize,
    blocks: Vec<Block>,
}

impl SteinerSystem {
    /// Sorts the blocks into canonical order and validates.
    pub fn new(t: usize, k: usize, n: usize, mut blocks: Vec<Block>) -> Result<Self, SteinerError> {
        for block in blocks.iter_mut() {
            block.sort_unstable();
        }
        blocks.sort();
        validate_system(t, k, n, &blocks).map_err(SteinerError::Invalid)?;
        Ok(SteinerSystem { t, k, n, blocks })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks through a point.
    pub fn replication(&self) -> usize {
        self.blocks.iter().filter(|b| b.contains(&1)).count()
    }

    pub fn index_of(&self, block: &[usize]) -> Option<usize> {
        self.blocks.binary_search_by(|b| b.as_slice().cmp(block)).ok()
    }

    pub fn parameters(&self) -> SystemParameters {
        system_parameters(self.t, self.k, self.n).expect("a valid system has admissible parameters")
    }

    /// Parses the text format: header `t k n`, then one ascending block
    /// per line. Lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self, SteinerError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut blocks = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums = parse_numbers(line, lineno + 1)?;
            if header.is_none() {
                match nums[..] {
                    [t, k, n] => header = Some((t, k, n)),
                    _ => {
                        return Err(SteinerError::Parse {
                            line: lineno + 1,
                            message: "header must be `t k n`".into(),
                        })
                    }
                }
            } else {
                if !nums.windows(2).all(|w| w[0] < w[1]) {
                    return Err(SteinerError::Parse {
                        line: lineno + 1,
                        message: "block points must be strictly ascending".into(),
                    });
                }
                blocks.push(nums);
            }
        }
        let (t, k, n) = header.ok_or(SteinerError::Parse { line: 0, message: "missing header".into() })?;
        SteinerSystem::new(t, k, n, blocks)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.t, self.k, self.n);
        for block in &self.blocks {
            out.push_str(&join(block));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn join(items: &[usize]) -> String {
    items.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>, SteinerError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| SteinerError::Parse {
                line: lineno,
                message: format!("not a nonnegative integer: {tok:?}"),
            })
        })
        .collect()
}

/// A derived system together with the original label of each new point:
/// new point `j` is original point `points[j - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derived {
    pub system: SteinerSystem,
    pub points: Vec<usize>,
}

impl Derived {
    /// Index in the parent system of the block that derived block `index`
    /// came from.
    pub fn parent_block(&self, parent: &SteinerSystem, alpha: &[usize], index: usize) -> usize {
        let mut block: Block = self.system.blocks[index].iter().map(|&p| self.points[p - 1]).collect();
        block.extend_from_slice(alpha);
        block.sort_unstable();
        parent.index_of(&block).expect("derived block comes from a parent block")
    }
}

pub fn derive(sys: &SteinerSystem, alpha: &[usize]) -> Result<Derived, SteinerError> {
    let mut alpha = alpha.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let bad = || SteinerError::BadDerivation { alpha: alpha.clone(), t: sys.t, n: sys.n };
    if alpha.is_empty() || alpha.len() >= sys.t || alpha.iter().any(|&p| p == 0 || p > sys.n) {
        return Err(bad());
    }
    let points: Vec<usize> = (1..=sys.n).filter(|p| !alpha.contains(p)).collect();
    let mut relabel = vec![0usize; sys.n + 1];
    for (j, &p) in points.iter().enumerate() {
        relabel[p] = j + 1;
    }
    let blocks = sys
        .blocks
        .iter()
        .filter(|b| alpha.iter().all(|a| b.contains(a)))
        .map(|b| b.iter().filter(|p| !alpha.contains(p)).map(|&p| relabel[p]).collect())
        .collect();
    let a = alpha.len();
    let system = SteinerSystem::new(sys.t - a, sys.k - a, sys.n - a, blocks)?;
    Ok(Derived { system, points })
}

/// Parallel classes, as lists of block indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub classes: Vec<Vec<usize>>,
}

/// Finds a partition of the blocks into parallel classes, if one exists.
pub fn resolvability_partition(sys: &SteinerSystem) -> Option<Resolution> {
    if !sys.n.is_multiple_of(sys.k) {
        return None;
    }
    let per_class = sys.n / sys.k;
    // Every class holds exactly one block through point 1; fixing class `c`
    // to hold the c-th such block removes the class-order symmetry.
    let anchors: Vec<usize> = (0..sys.blocks.len()).filter(|&i| sys.blocks[i][0] == 1).collect();
    let mut by_point: Vec<Vec<usize>> = vec![Vec::new(); sys.n + 1];
    for (i, b) in sys.blocks.iter().enumerate() {
        for &p in b {
            by_point[p].push(i);
        }
    }
    struct State<'a> {
        sys: &'a SteinerSystem,
        by_point: Vec<Vec<usize>>,
        anchors: Vec<usize>,
        per_class: usize,
        used: Vec<bool>,
        covered: Vec<bool>,
        classes: Vec<Vec<usize>>,
    }
    fn fill(st: &mut State) -> bool {
        let class = st.classes.len() - 1;
        if st.classes[class].len() == st.per_class {
            if st.classes.len() == st.anchors.len() {
                return true;
            }
            let anchor = st.anchors[st.classes.len()];
            st.covered.iter_mut().for_each(|c| *c = false);
            for &p in &st.sys.blocks[anchor] {
                st.covered[p] = true;
            }
            st.used[anchor] = true;
            st.classes.push(vec![anchor]);
            if fill(st) {
                return true;
            }
            st.classes.pop();
            st.used[anchor] = false;
            // Restore coverage of the finished class.
            st.covered.iter_mut().for_each(|c| *c = false);
            let prev = st.classes.last().unwrap().clone();
            for b in prev {
                for &p in &st.sys.blocks[b] {
                    st.covered[p] = true;
                }
            }
            return false;
        }
        let point = (1..=st.sys.n).find(|&p| !st.covered[p]).expect("class incomplete");
        let candidates = st.by_point[point].clone();
        for b in candidates {
            if st.used[b] || st.sys.blocks[b].iter().any(|&p| st.covered[p]) {
                continue;
            }
            st.used[b] = true;
            for &p in &st.sys.blocks[b] {
                st.covered[p] = true;
            }
            st.classes[class].push(b);
            if fill(st) {
                return true;
            }
            st.classes[class].pop();
            for &p in &st.sys.blocks[b] {
                st.covered[p] = false;
            }
            st.used[b] = false;
        }
        false
    }
    let mut st = State {
        sys,
        by_point,
        anchors: anchors.clone(),
        per_class,
        used: vec![false; sys.blocks.len()],
        covered: vec![false; sys.n + 1],
        classes: vec![vec![anchors[0]]],
    };
    st.used[anchors[0]] = true;
    for &p in &sys.blocks[anchors[0]] {
        st.covered[p] = true;
    }
    fill(&mut st).then_some(Resolution { classes: st.classes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_nodes: u64,
    pub deadline: Option<Instant>,
}

impl SearchLimits {
    pub fn nodes(max_nodes: u64) -> Self {
        SearchLimits { max_nodes, deadline: None }
    }
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits::nodes(50_000_000)
    }
}

/// Rotation `i -> (i mod n) + 1` applied `shift` times to a block.
pub fn rotate_block(block: &[usize], shift: usize, n: usize) -> Block {
    let mut out: Block = block.iter().map(|&p| (p - 1 + shift) % n + 1).collect();
    out.sort_unstable();
    out
}

/// The distinct images of a block under all rotations.
pub fn block_orbit(block: &[usize], n: usize) -> Vec<Block> {
    let mut orbit: Vec<Block> = (0..n).map(|s| rotate_block(block, s, n)).collect();
    orbit.sort();
    orbit.dedup();
    orbit
}

/// Exact backtracking search for an `S(t, k, n)`: the lexicographically
/// first uncovered t-subset is extended to a block in every possible way.
/// With `cyclic`, whole rotation orbits are added at once, so the result is
/// invariant under `i -> (i mod n) + 1`.
///
/// `Ok(None)` means proven nonexistence (of a cyclic system, if `cyclic`).
pub fn generate_system(
    t: usize,
    k: usize,
    n: usize,
    cyclic: bool,
    limits: SearchLimits,
) -> Result<Option<SteinerSystem>, SteinerError> {
    match system_parameters(t, k, n) {
        Ok(_) => {}
        Err(SteinerError::Inadmissible(_)) => return Ok(None),
        Err(e) => return Err(e),
    }
    let ranker = SubsetRanker::new(n, t);
    let total = binom_u64(n as u64, t as i64) as usize;
    let mut lex_subsets = Vec::with_capacity(total);
    let mut lex_of_rank = vec![0usize; total];
    let mut s: Vec<usize> = (1..=t).collect();
    loop {
        lex_of_rank[ranker.rank(&s)] = lex_subsets.len();
        lex_subsets.push(s.clone());
        if !next_subset(&mut s, n) {
            break;
        }
    }
    let mut search = Generator {
        n,
        k,
        t,
        cyclic,
        limits,
        nodes: 0,
        ranker,
        lex_subsets,
        lex_of_rank,
        covered: vec![false; total],
        blocks: Vec::new(),
        exhausted: false,
    };
    let found = search.extend(0);
    if search.exhausted {
        return Err(SteinerError::BudgetExhausted { nodes: search.nodes });
    }
    if !found {
        return Ok(None);
    }
    SteinerSystem::new(t, k, n, search.blocks).map(Some)
}

struct Generator {
    n: usize,
    k: usize,
    t: usize,
    cyclic: bool,
    limits: SearchLimits,
    nodes: u64,
    ranker: SubsetRanker,
    lex_subsets: Vec<Vec<usize>>,
    lex_of_rank: Vec<usize>,
    covered: Vec<bool>,
    blocks: Vec<Block>,
    exhausted: bool,
}

impl Generator {
    fn out_of_budget(&mut self) -> bool {
        if self.nodes >= self.limits.max_nodes
            || (self.nodes.is_multiple_of(4096) && self.limits.deadline.is_some_and(|d| Instant::now() >= d))
        {
            self.exhausted = true;
        }
        self.exhausted
    }

    /// Lex indices of the t-subsets covered by the given blocks, or `None`
    /// if one is already covered or repeats.
    fn fresh_subsets(&self, blocks: &[Block]) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        for b in blocks {
            for sub in subsets_of(b, self.t) {
                let idx = self.lex_of_rank[self.ranker.rank(&sub)];
                if self.covered[idx] {
                    return None;
                }
                out.push(idx);
            }
        }
        let mut sorted = out.clone();
        sorted.sort_unstable();
        sorted.dedup();
        (sorted.len() == out.len()).then_some(out)
    }

    fn extend(&mut self, start: usize) -> bool {
        let Some(first) = (start..self.covered.len()).find(|&i| !self.covered[i]) else {
            return true;
        };
        let base = self.lex_subsets[first].clone();
        let rest: Vec<usize> = (1..=self.n).filter(|p| !base.contains(p)).collect();
        let mut candidates: Vec<Block> = subsets_of(&rest, self.k - self.t)
            .into_iter()
            .map(|ext| {
                let mut b = base.clone();
                b.extend(ext);
                b.sort_unstable();
                b
            })
            .collect();
        candidates.sort();
        for cand in candidates {
            self.nodes += 1;
            if self.out_of_budget() {
                return false;
            }
            let group = if self.cyclic { block_orbit(&cand, self.n) } else { vec![cand] };
            let Some(subs) = self.fresh_subsets(&group) else {
                continue;
            };
            for &i in &subs {
                self.covered[i] = true;
            }
            let added = group.len();
            self.blocks.extend(group);
            if self.extend(first + 1) {
                return true;
            }
            if self.exhausted {
                return false;
            }
            self.blocks.truncate(self.blocks.len() - added);
            for &i in &subs {
                self.covered[i] = false;
            }
        }
        false
    }
}

/// Union of the rotation orbits of the given base blocks.
pub fn expand_orbits(base: &[Block], n: usize) -> Vec<Block> {
    let mut blocks: Vec<Block> = base.iter().flat_map(|b| block_orbit(b, n)).collect();
    blocks.sort();
    blocks.dedup();
    blocks
}

/// Points of `AG(2, q)` are `(x, y)` in `GF(q)^2`, numbered `1 + x*q + y`
/// using canonical element encodings.
pub fn affine_point(q: u32, x: u32, y: u32) -> usize {
    (1 + x * q + y) as usize
}

/// Lines of `AG(2, q)`: `x + a*y = b` for all `a, b`, and `y = b`.
pub fn affine_plane(q: u64) -> Result<SteinerSystem, SteinerError> {
    let f = FieldSpec::of_order(q)?;
    let q = f.order();
    let mut lines = Vec::new();
    for a in f.elements() {
        for b in f.elements() {
            lines.push(affine_line(&f, a, b));
        }
    }
    for b in f.elements() {
        lines.push((0..q).map(|x| affine_point(q, x, b)).collect());
    }
    SteinerSystem::new(2, q as usize, (q * q) as usize, lines)
}

/// The line `x + a*y = b` of `AG(2, q)` as a sorted point set.
pub fn affine_line(f: &FieldSpec, a: u32, b: u32) -> Block {
    let mut line: Block = f
        .elements()
        .map(|y| affine_point(f.order(), f.sub(b, f.mul(a, y)), y))
        .collect();
    line.sort_unstable();
    line
}

/// `PG(2, q)`: normalised homogeneous coordinates, points and lines both
/// enumerated as `(0,0,1)`, then `(0,1,c)`, then `(1,a,b)`.
pub fn projective_plane(q: u64) -> Result<SteinerSystem, SteinerError> {
    let f = FieldSpec::of_order(q)?;
    let mut coords = vec![[0, 0, 1]];
    coords.extend(f.elements().map(|c| [0, 1, c]));
    for a in f.elements() {
        for b in f.elements() {
            coords.push([1, a, b]);
        }
    }
    let dot = |u: &[u32; 3], v: &[u32; 3]| {
        (0..3).fold(0, |acc, i| f.add(acc, f.mul(u[i], v[i])))
    };
    let lines = coords
        .iter()
        .map(|line| {
            coords
                .iter()
                .enumerate()
                .filter(|(_, pt)| dot(line, pt) == 0)
                .map(|(i, _)| i + 1)
                .collect()
        })
        .collect();
    let q = q as usize;
    SteinerSystem::new(2, q + 1, q * q + q + 1, lines)
}

/// Blocks of the Fano plane, as listed in the standard 1-based labelling.
pub const FANO_BLOCKS: [[usize; 3]; 7] = [
    [1, 2, 3],
    [1, 4, 5],
    [1, 6, 7],
    [2, 4, 6],
    [2, 5, 7],
    [3, 4, 7],
    [3, 5, 6],
];

pub(crate) const BUNDLED: &[(&str, &str)] = &[
    ("sts13a.txt", include_str!("../data/sts13a.txt")),
    ("sts13b.txt", include_str!("../data/sts13b.txt")),
    ("sqs14.txt", include_str!("../data/sqs14.txt")),
    ("sqs20_base.txt", include_str!("../data/sqs20_base.txt")),
    ("sts19_cells.txt", include_str!("../data/sts19_cells.txt")),
    ("s45_11_cyclic_reps.txt", include_str!("../data/s45_11_cyclic_reps.txt")),
];

/// Source of the bundled data files, optionally overridden by a directory:
/// a file present there replaces the bundled copy of the same name.
#[derive(Debug, Clone, Default)]
pub struct DataDir {
    dir: Option<PathBuf>,
}

impl DataDir {
    pub fn bundled() -> Self {
        DataDir { dir: None }
    }

    pub fn with_override(dir: impl AsRef<Path>) -> Self {
        DataDir { dir: Some(dir.as_ref().to_path_buf()) }
    }

    pub fn read(&self, name: &str) -> Result<String, SteinerError> {
        if let Some(dir) = &self.dir {
            let path = dir.join(name);
            if path.exists() {
                return std::fs::read_to_string(&path).map_err(|e| SteinerError::Io {
                    path,
                    message: e.to_string(),
                });
            }
        }
        BUNDLED
            .iter()
            .find(|(file, _)| *file == name)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| SteinerError::UnknownName(name.to_string()))
    }

    /// The named system: `fano`, `sts9`, `sts13a`, `sts13b`, `sqs8`,
    /// `sqs10`, `s45_11`, `sqs14`, `sqs20_paper`, `ag(2,q)` or `pg(2,q)`.
    ///
    /// `sqs14_cyclic` is recognised but always fails with
    /// [`SteinerError::Nonexistent`]: the exhaustive cyclic search finds no
    /// SQS(14) invariant under `i -> (i mod 14) + 1`.
    pub fn system(&self, name: &str) -> Result<SteinerSystem, SteinerError> {
        let generated = |t, k, n| {
            generate_system(t, k, n, false, SearchLimits::default())?
                .ok_or(SteinerError::Nonexistent { t, k, n })
        };
        match name {
            "fano" => SteinerSystem::new(2, 3, 7, FANO_BLOCKS.iter().map(|b| b.to_vec()).collect()),
            "sts9" => generated(2, 3, 9),
            "sts13a" => SteinerSystem::parse(&self.read("sts13a.txt")?),
            "sts13b" => SteinerSystem::parse(&self.read("sts13b.txt")?),
            "sqs8" => generated(3, 4, 8),
            "sqs10" => generated(3, 4, 10),
            "s45_11" => generated(4, 5, 11),
            "sqs14" => SteinerSystem::parse(&self.read("sqs14.txt")?),
            "sqs14_cyclic" => Err(SteinerError::Nonexistent { t: 3, k: 4, n: 14 }),
            "sqs20_paper" => {
                let base = SteinerSystem::parse_unchecked(&self.read("sqs20_base.txt")?)?;
                SteinerSystem::new(3, 4, 20, expand_orbits(&base.blocks, 20))
            }
            _ => {
                if let Some(q) = plane_order(name, "ag") {
                    affine_plane(q)
                } else if let Some(q) = plane_order(name, "pg") {
                    projective_plane(q)
                } else {
                    Err(SteinerError::UnknownName(name.to_string()))
                }
            }
        }
    }
}

impl SteinerSystem {
    /// Parses a header and block list without checking the Steiner
    /// property (used for base-block files).
    pub(crate) fn parse_unchecked(text: &str) -> Result<SteinerSystem, SteinerError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(SteinerError::Parse { line: 0, message: "missing header".into() })?;
        let [t, k, n] = parse_numbers(header, hl)?[..] else {
            return Err(SteinerError::Parse { line: hl, message: "header must be `t k n`".into() });
        };
        let blocks = lines.map(|(i, l)| parse_numbers(l, i)).collect::<Result<_, _>>()?;
        Ok(SteinerSystem { t, k, n, blocks })
    }
}

/// Parses `ag(2,q)` / `pg(2,q)` style names.
fn plane_order(name: &str, prefix: &str) -> Option<u64> {
    let inner = name.strip_prefix(prefix)?.strip_prefix("(2,")?.strip_suffix(')')?;
    inner.trim().parse().ok()
}

/// Convenience wrapper over [`DataDir::bundled`].
pub fn catalog(name: &str) -> Result<SteinerSystem, SteinerError> {
    DataDir::bundled().system(name)
}

pub const CATALOG_NAMES: &[&str] = &[
    "fano",
    "sts9",
    "sts13a",
    "sts13b",
    "sqs8",
    "sqs10",
    "s45_11",
    "sqs14",
    "sqs20_paper",
    "ag(2,q)",
    "pg(2,q)",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn fano() -> Vec<Block> {
        FANO_BLOCKS.iter().map(|b| b.to_vec()).collect()
    }

    /// Direct count of blocks meeting `blocks[0]` in exactly i points.
    fn direct_profile(sys: &SteinerSystem) -> Vec<u64> {
        let mut counts = vec![0u64; sys.k() + 1];
        let first = &sys.blocks()[0];
        for b in sys.blocks() {
            counts[intersection_size(first, b)] += 1;
        }
        counts
    }

    #[test]
    fn fano_validates() {
        assert_eq!(validate_system(2, 3, 7, &fano()), Ok(()));
    }

    #[test]
    fn missing_block_reports_first_uncovered_pair() {
        let mut blocks = fano();
        blocks.retain(|b| b != &vec![3, 5, 6]);
        assert_eq!(validate_system(2, 3, 7, &blocks), Err(Defect::Uncovered(vec![3, 5])));
    }

    #[test]
    fn duplicate_block_reports_overcovered_pair() {
        let mut blocks = fano();
        blocks.push(vec![2, 4, 6]);
        assert_eq!(
            validate_system(2, 3, 7, &blocks),
            Err(Defect::Overcovered { subset: vec![2, 4], count: 2 })
        );
    }

    #[test]
    fn malformed_blocks_and_parameters() {
        let mut blocks = fano();
        blocks[2] = vec![1, 6, 8];
        assert!(matches!(validate_system(2, 3, 7, &blocks), Err(Defect::MalformedBlock { index: 2, .. })));
        blocks[2] = vec![1, 6];
        assert!(matches!(validate_system(2, 3, 7, &blocks), Err(Defect::MalformedBlock { .. })));
        assert_eq!(validate_system(3, 2, 7, &fano()), Err(Defect::Parameters { t: 3, k: 2, n: 7 }));
    }

    #[test]
    fn parameters() {
        let p = system_parameters(2, 3, 7).unwrap();
        assert_eq!((p.blocks, p.replication), (7, 3));
        let p = system_parameters(3, 4, 20).unwrap();
        assert_eq!((p.blocks, p.replication), (285, 57));
        assert_eq!(
            system_parameters(2, 3, 8),
            Err(SteinerError::Inadmissible(Inadmissible { t: 2, k: 3, n: 8, level: 0 }))
        );
        let p = system_parameters(1, 2, 6).unwrap();
        assert_eq!((p.blocks, p.replication), (3, 1));
    }

    #[test]
    fn profiles() {
        assert_eq!(intersection_profile(2, 3, 7).unwrap().counts, vec![0, 6, 0, 1]);
        assert_eq!(intersection_profile(3, 4, 8).unwrap().counts, vec![1, 0, 12, 0, 1]);
        for (t, k, n) in [(2, 3, 9), (3, 4, 10), (4, 5, 11), (3, 4, 20), (2, 4, 13), (5, 6, 12)] {
            let prof = intersection_profile(t, k, n).unwrap();
            let m = system_parameters(t, k, n).unwrap().blocks;
            assert_eq!(prof.counts[..k].iter().sum::<u64>(), m - 1);
            assert_eq!(prof.counts[k], 1);
        }
    }

    #[test]
    fn profile_matches_direct_count() {
        for name in ["fano", "sts9", "sts13a", "sts13b", "sqs8", "sqs10", "sqs14", "sqs20_paper", "ag(2,4)", "pg(2,3)"] {
            let sys = catalog(name).unwrap();
            let prof = intersection_profile(sys.t(), sys.k(), sys.n()).unwrap();
            assert_eq!(prof.counts, direct_profile(&sys), "{name}");
        }
    }

    #[test]
    fn sqs8_derives_to_fano_sized_sts() {
        let sqs8 = catalog("sqs8").unwrap();
        let d = derive(&sqs8, &[1]).unwrap();
        assert_eq!((d.system.t(), d.system.k(), d.system.n()), (2, 3, 7));
        assert_eq!(d.system.block_count(), 7);
        assert_eq!(d.points, (2..=8).collect::<Vec<_>>());
    }

    #[test]
    fn s45_11_derives_to_sqs10() {
        let s = catalog("s45_11").unwrap();
        assert_eq!(s.block_count(), 66);
        let d = derive(&s, &[5]).unwrap();
        assert_eq!(d.system.block_count(), 30);
        assert_eq!((d.system.t(), d.system.k(), d.system.n()), (3, 4, 10));
    }

    #[test]
    fn derivation_errors() {
        let fano = catalog("fano").unwrap();
        assert!(matches!(derive(&fano, &[1, 2]), Err(SteinerError::BadDerivation { .. })));
        assert!(matches!(derive(&fano, &[]), Err(SteinerError::BadDerivation { .. })));
        assert!(matches!(derive(&fano, &[8]), Err(SteinerError::BadDerivation { .. })));
    }

    #[test]
    fn double_derivation_equals_pair_derivation() {
        let s = catalog("s45_11").unwrap();
        for (a, b) in [(1, 2), (3, 7), (10, 11)] {
            let once = derive(&s, &[a]).unwrap();
            let b_new = once.points.iter().position(|&p| p == b).unwrap() + 1;
            let twice = derive(&once.system, &[b_new]).unwrap();
            let pair = derive(&s, &[a, b]).unwrap();
            assert_eq!(twice.system, pair.system);
            let composed: Vec<usize> = twice.points.iter().map(|&p| once.points[p - 1]).collect();
            assert_eq!(composed, pair.points);
        }
    }

    #[test]
    fn parent_block_roundtrip() {
        let sqs10 = catalog("sqs10").unwrap();
        let d = derive(&sqs10, &[4]).unwrap();
        for i in 0..d.system.block_count() {
            let parent = d.parent_block(&sqs10, &[4], i);
            assert!(sqs10.blocks()[parent].contains(&4));
        }
    }

    #[test]
    fn resolutions() {
        assert_eq!(resolvability_partition(&catalog("fano").unwrap()), None);
        let ag = catalog("ag(2,3)").unwrap();
        let res = resolvability_partition(&ag).unwrap();
        assert_eq!(res.classes.len(), 4);
        assert!(res.classes.iter().all(|c| c.len() == 3));
        let sqs10 = catalog("sqs10").unwrap();
        for p in 1..=10 {
            let d = derive(&sqs10, &[p]).unwrap();
            let res = resolvability_partition(&d.system).expect("derived STS(9) is resolvable");
            assert_eq!(res.classes.len(), 4);
            check_resolution(&d.system, &res);
        }
        // AG(2,4) and AG(2,5) are resolvable by parallel lines.
        for q in [4, 5] {
            let ag = affine_plane(q).unwrap();
            let res = resolvability_partition(&ag).unwrap();
            assert_eq!(res.classes.len() as u64, q + 1);
            check_resolution(&ag, &res);
        }
    }

    fn check_resolution(sys: &SteinerSystem, res: &Resolution) {
        let mut seen = vec![false; sys.block_count()];
        for class in &res.classes {
            let mut points: Vec<usize> = class.iter().flat_map(|&b| sys.blocks()[b].clone()).collect();
            points.sort_unstable();
            assert_eq!(points, (1..=sys.n()).collect::<Vec<_>>());
            for &b in class {
                assert!(!seen[b]);
                seen[b] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn generation() {
        let fano_like = generate_system(2, 3, 7, false, SearchLimits::default()).unwrap().unwrap();
        assert_eq!(fano_like.block_count(), 7);
        assert_eq!(generate_system(2, 3, 8, false, SearchLimits::default()).unwrap(), None);
        let s = generate_system(4, 5, 11, false, SearchLimits::default()).unwrap().unwrap();
        assert_eq!(s.block_count(), 66);
        // STS(7) admits a cyclic form; each block orbit has 7 blocks.
        let cyc = generate_system(2, 3, 7, true, SearchLimits::default()).unwrap().unwrap();
        assert_eq!(expand_orbits(cyc.blocks(), 7), cyc.blocks());
    }

    #[test]
    fn budget_exhaustion_is_not_nonexistence() {
        let res = generate_system(3, 4, 14, false, SearchLimits::nodes(5));
        assert_eq!(res, Err(SteinerError::BudgetExhausted { nodes: 5 }));
    }

    #[test]
    fn sqs14_cache_matches_generator() {
        let generated = generate_system(3, 4, 14, false, SearchLimits::default()).unwrap().unwrap();
        assert_eq!(generated, catalog("sqs14").unwrap());
    }

    #[test]
    fn cyclic_search_existence() {
        for (t, k, n, blocks) in [(2, 3, 13, 26), (3, 4, 10, 30), (4, 5, 11, 66), (3, 4, 20, 285)] {
            let s = generate_system(t, k, n, true, SearchLimits::default()).unwrap().unwrap();
            assert_eq!(s.block_count(), blocks);
            assert_eq!(expand_orbits(s.blocks(), n), s.blocks());
        }
        for n in [8, 14, 16] {
            assert_eq!(generate_system(3, 4, n, true, SearchLimits::default()).unwrap(), None, "cyclic SQS({n})");
        }
        assert_eq!(catalog("sqs14_cyclic"), Err(SteinerError::Nonexistent { t: 3, k: 4, n: 14 }));
    }

    #[test]
    fn orbits_of_sqs20_base_blocks() {
        let base = SteinerSystem::parse_unchecked(&DataDir::bundled().read("sqs20_base.txt").unwrap()).unwrap();
        let sizes: Vec<usize> = base.blocks.iter().map(|b| block_orbit(b, 20).len()).collect();
        let mut expected = vec![5, 10, 10];
        expected.extend([20; 13]);
        assert_eq!(sizes, expected);
        // Orbit dedup is sound: the orbit union has no repeated block.
        let all: usize = sizes.iter().sum();
        assert_eq!(expand_orbits(&base.blocks, 20).len(), all);
        let sqs20 = catalog("sqs20_paper").unwrap();
        assert_eq!(sqs20.block_count(), 285);
        assert!(sqs20.index_of(&[1, 6, 11, 16]).is_some());
        for b in &base.blocks {
            assert!(sqs20.index_of(b).is_some());
        }
        assert_eq!(rotate_block(&[1, 6, 11, 16], 5, 20), vec![1, 6, 11, 16]);
    }

    #[test]
    fn catalog_entries_are_consistent() {
        for name in ["fano", "sts9", "sts13a", "sts13b", "sqs8", "sqs10", "s45_11", "sqs14", "sqs20_paper", "ag(2,3)", "ag(2,4)", "pg(2,2)", "pg(2,4)"] {
            let sys = catalog(name).unwrap();
            let p = sys.parameters();
            assert_eq!(sys.block_count() as u64, p.blocks, "{name}");
            for point in 1..=sys.n() {
                let through = sys.blocks().iter().filter(|b| b.contains(&point)).count();
                assert_eq!(through as u64, p.replication, "{name} point {point}");
            }
        }
        assert_eq!(catalog("ag(2,3)").unwrap().block_count(), 12);
        assert_eq!(catalog("pg(2,3)").unwrap().block_count(), 13);
        assert!(matches!(catalog("ag(2,6)"), Err(SteinerError::Field(_))));
        assert!(matches!(catalog("nope"), Err(SteinerError::UnknownName(_))));
    }

    #[test]
    fn fano_catalog_matches_listed_blocks() {
        assert_eq!(catalog("fano").unwrap().blocks(), fano().as_slice());
    }

    #[test]
    fn text_roundtrip() {
        let sys = catalog("sqs10").unwrap();
        assert_eq!(SteinerSystem::parse(&sys.to_text()).unwrap(), sys);
        let bad = "2 3 7\n1 2 3\n1 4 5\n";
        assert!(matches!(SteinerSystem::parse(bad), Err(SteinerError::Invalid(Defect::Uncovered(_)))));
        assert!(matches!(SteinerSystem::parse("2 3\n"), Err(SteinerError::Parse { line: 1, .. })));
        assert!(matches!(SteinerSystem::parse("2 3 7\n3 2 1\n"), Err(SteinerError::Parse { line: 2, .. })));
    }

    #[test]
    fn data_dir_override() {
        let dir = std::env::temp_dir().join(format!("dpcodes-datadir-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("sts13a.txt"), catalog("sts13b").unwrap().to_text()).unwrap();
        let data = DataDir::with_override(&dir);
        assert_eq!(data.system("sts13a").unwrap(), catalog("sts13b").unwrap());
        assert_eq!(data.system("sts13b").unwrap(), catalog("sts13b").unwrap());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
