//! Constant-weight codes over `{0, .., q-1}` and their constructions from
//! Steiner systems.
//!
//! Codes built from an `S(t, k, n)` come in two shapes: supports equal to
//! the blocks (distance `2k - t + 1`), or supports equal to the block
//! complements (distance `n - t + 1`). Both shapes attain the code-anticode
//! bound with the matching anticode, which [`diameter_perfect_check`]
//! verifies in exact arithmetic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::anticode::{AnticodeError, AnticodeKind, AnticodeSpec};
use crate::coloring::{self, Budget, ColoringError, ColoringResult};
use crate::math::{binom, FieldSpec};
use crate::steiner::{affine_line, affine_point, derive, validate_system, Block, SteinerError, SteinerSystem};

pub type Word = Vec<u32>;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("alphabet size {q} is too small: this construction needs q >= {needed}")]
    AlphabetTooSmall { q: u32, needed: u64 },
    #[error("need at least two words to measure distance")]
    TooFewWords,
    #[error("word {index} has length {len}, expected {n}")]
    Length { index: usize, len: usize, n: usize },
    #[error("symbol {symbol} is out of range for q = {q}")]
    SymbolOutOfRange { symbol: u32, q: u32 },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("this construction needs t >= 3, got t = {0}")]
    StrengthTooSmall(usize),
    #[error("no colouring supplied for window {0:?}")]
    MissingColoring(Block),
    #[error("colouring for window {0:?} is not a proper colouring of the derived system")]
    InvalidColoring(Block),
    #[error("the code does not fit the anticode: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Steiner(#[from] SteinerError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Anticode(#[from] AnticodeError),
}

/// A list of words of common length `n` over `{0, .., q-1}`.
///
/// Nothing beyond the word length is enforced on construction: weights,
/// symbol ranges and distinctness are what [`verify_code`] reports on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantWeightCode {
    n: usize,
    q: u32,
    words: Vec<Word>,
}

impl ConstantWeightCode {
    pub fn new(n: usize, q: u32, words: Vec<Word>) -> Result<Self, CodeError> {
        if let Some((index, w)) = words.iter().enumerate().find(|(_, w)| w.len() != n) {
            return Err(CodeError::Length { index, len: w.len(), n });
        }
        Ok(ConstantWeightCode { n, q, words })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The common weight, if all words share one.
    pub fn weight(&self) -> Option<usize> {
        let mut ws = self.words.iter().map(|w| weight(w));
        let first = ws.next()?;
        ws.all(|w| w == first).then_some(first)
    }

    /// Supports as 1-based point sets, in word order.
    pub fn supports(&self) -> Vec<Block> {
        self.words.iter().map(|w| support(w)).collect()
    }

    /// `"n q M"` header, then one word per line: base-36 digits when
    /// `compact` is set (requires `q <= 36`), else decimal symbols.
    pub fn to_text(&self, compact: bool) -> String {
        let compact = compact && self.q <= 36;
        let mut out = format!("{} {} {}\n", self.n, self.q, self.words.len());
        for w in &self.words {
            if compact {
                out.extend(w.iter().map(|&s| char::from_digit(s, 36).expect("symbol below 36")));
            } else {
                let _ = write!(out, "{}", w.iter().map(u32::to_string).collect::<Vec<_>>().join(" "));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the format written by [`to_text`](Self::to_text). Each word
    /// line may independently use either notation.
    pub fn parse(text: &str) -> Result<Self, CodeError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(CodeError::Parse { line: 1, message: "missing header".into() })?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| CodeError::Parse { line: hline, message: "header must be \"n q M\"".into() })?;
        let [n, q, m] = head[..] else {
            return Err(CodeError::Parse { line: hline, message: "header must be \"n q M\"".into() });
        };
        let q = u32::try_from(q).map_err(|_| CodeError::Parse { line: hline, message: "q too large".into() })?;
        let mut words = Vec::with_capacity(m);
        for (line, l) in lines {
            let word = if l.contains(char::is_whitespace) || n == 1 {
                l.split_whitespace()
                    .map(|t| t.parse::<u32>())
                    .collect::<Result<Word, _>>()
                    .map_err(|_| CodeError::Parse { line, message: format!("bad symbol in {l:?}") })?
            } else {
                parse_compact_word(l).map_err(|message| CodeError::Parse { line, message })?
            };
            if word.len() != n {
                return Err(CodeError::Parse { line, message: format!("word has length {}, expected {n}", word.len()) });
            }
            words.push(word);
        }
        if words.len() != m {
            return Err(CodeError::Parse { line: hline, message: format!("header promises {m} words, found {}", words.len()) });
        }
        Ok(ConstantWeightCode { n, q, words })
    }
}

pub fn weight(word: &[u32]) -> usize {
    word.iter().filter(|&&s| s != 0).count()
}

pub fn support(word: &[u32]) -> Block {
    word.iter().enumerate().filter(|(_, &s)| s != 0).map(|(i, _)| i + 1).collect()
}

pub fn hamming(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Parses a word written as base-36 digits, e.g. `"0000a100615"`.
pub fn parse_compact_word(token: &str) -> Result<Word, String> {
    token
        .chars()
        .map(|c| c.to_digit(36).ok_or_else(|| format!("{c:?} is not a base-36 digit")))
        .collect()
}

/// Minimum pairwise distance and a pair of word indices attaining it.
pub fn code_distance(code: &ConstantWeightCode) -> Result<(usize, (usize, usize)), CodeError> {
    let ws = code.words();
    let mut best: Option<(usize, (usize, usize))> = None;
    for i in 0..ws.len() {
        for j in i + 1..ws.len() {
            let d = hamming(&ws[i], &ws[j]);
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, (i, j)));
            }
        }
    }
    best.ok_or(CodeError::TooFewWords)
}

/// Parameters a code is checked against; `None` fields are not checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Expected {
    pub n: Option<usize>,
    pub w: Option<usize>,
    pub d: Option<usize>,
    pub q: Option<u32>,
    pub m: Option<usize>,
}

/// Which way the supports relate to a Steiner system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportShape {
    /// Supports are the blocks.
    Blocks,
    /// Supports are the complements of the blocks.
    Complements,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeReport {
    pub n: usize,
    pub q: u32,
    #[serde(rename = "M")]
    pub m: usize,
    /// Common weight, `None` if weights differ.
    pub w: Option<usize>,
    pub d_min: Option<usize>,
    pub d_witness: Option<(usize, usize)>,
    pub supports_steiner_t: Option<usize>,
    pub support_shape: Option<SupportShape>,
    pub diameter_perfect_against: Option<AnticodeSpec>,
    pub failures: Vec<String>,
}

impl CodeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks a code against expected parameters. With `steiner_t`, also
/// checks that the supports (or their complements) form an `S(t, ., n)`
/// and, if so, whether the code attains the code-anticode bound.
pub fn verify_code(code: &ConstantWeightCode, expected: Expected, steiner_t: Option<usize>) -> CodeReport {
    let mut failures = Vec::new();
    let n = code.n();
    let q = code.q();
    let w = code.weight();
    if w.is_none() {
        failures.push("words do not share a common weight".to_string());
    }
    if let Some((i, s)) = code
        .words()
        .iter()
        .enumerate()
        .find_map(|(i, wd)| wd.iter().find(|&&s| s >= q).map(|&s| (i, s)))
    {
        failures.push(format!("word {i} uses symbol {s}, not below q = {q}"));
    }
    let distinct: BTreeSet<&Word> = code.words().iter().collect();
    if distinct.len() != code.len() {
        failures.push(format!("{} repeated words", code.len() - distinct.len()));
    }
    let (d_min, d_witness) = match code_distance(code) {
        Ok((d, pair)) => (Some(d), Some(pair)),
        Err(_) => (None, None),
    };
    let mut check = |name: &str, want: Option<usize>, got: Option<usize>| {
        if let Some(want) = want {
            if got != Some(want) {
                failures.push(format!("{name}: expected {want}, found {}", got.map_or("none".into(), |g| g.to_string())));
            }
        }
    };
    check("length", expected.n, Some(n));
    check("weight", expected.w, w);
    check("size", expected.m, Some(code.len()));
    check("alphabet", expected.q.map(|x| x as usize), Some(q as usize));
    if let Some(d) = expected.d {
        match d_min {
            Some(got) if got >= d => {}
            Some(got) => failures.push(format!("distance: expected at least {d}, found {got}")),
            None => failures.push(format!("distance: expected at least {d}, but fewer than two words")),
        }
    }
    let mut report = CodeReport {
        n,
        q,
        m: code.len(),
        w,
        d_min,
        d_witness,
        supports_steiner_t: None,
        support_shape: None,
        diameter_perfect_against: None,
        failures: Vec::new(),
    };
    if let (Some(t), Some(w)) = (steiner_t, w) {
        let mut supports = code.supports();
        supports.sort();
        let mut complements: Vec<Block> =
            supports.iter().map(|s| (1..=n).filter(|p| !s.contains(p)).collect()).collect();
        complements.sort();
        let shape = if validate_system(t, w, n, &supports).is_ok() {
            Some((SupportShape::Blocks, AnticodeKind::Prime))
        } else if w < n && validate_system(t, n - w, n, &complements).is_ok() {
            Some((SupportShape::Complements, AnticodeKind::Double))
        } else {
            failures.push(format!("supports form neither an S({t},{w},{n}) nor its complement"));
            None
        };
        if let Some((shape, kind)) = shape {
            report.supports_steiner_t = Some(t);
            report.support_shape = Some(shape);
            if let Ok(spec) = AnticodeSpec::new(kind, n, w, t, q) {
                if matches!(diameter_perfect_check(code, &spec), Ok(c) if c.holds) {
                    report.diameter_perfect_against = Some(spec);
                }
            }
        }
    }
    report.failures = failures;
    report
}

/// `|C| * |A|` against `|J_q(n, w)|`, in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerfectCertificate {
    pub spec: AnticodeSpec,
    pub code_size: usize,
    #[serde(serialize_with = "crate::ser::display")]
    pub anticode_size: BigUint,
    #[serde(serialize_with = "crate::ser::display")]
    pub product: BigUint,
    #[serde(serialize_with = "crate::ser::display")]
    pub space_size: BigUint,
    pub holds: bool,
}

/// Whether the code attains the code-anticode bound with the given
/// anticode. The anticode's diameter must lie below the code's distance.
pub fn diameter_perfect_check(code: &ConstantWeightCode, spec: &AnticodeSpec) -> Result<PerfectCertificate, CodeError> {
    let w = code.weight().ok_or_else(|| CodeError::Mismatch("code is not constant-weight".into()))?;
    if (code.n(), w, code.q()) != (spec.n, spec.w, spec.q) {
        return Err(CodeError::Mismatch(format!(
            "code has (n, w, q) = ({}, {w}, {}), anticode has ({}, {}, {})",
            code.n(),
            code.q(),
            spec.n,
            spec.w,
            spec.q
        )));
    }
    let (d, _) = code_distance(code)?;
    if spec.diameter() >= d {
        return Err(CodeError::Mismatch(format!("anticode diameter {} is not below distance {d}", spec.diameter())));
    }
    let anticode_size = spec.size();
    let product = anticode_size.clone() * BigUint::from(code.len());
    let space_size = binom(spec.n as u64, spec.w as i64) * BigUint::from(spec.q - 1).pow(spec.w as u32);
    Ok(PerfectCertificate {
        spec: *spec,
        code_size: code.len(),
        holds: product == space_size,
        anticode_size,
        product,
        space_size,
    })
}

fn blocks_through(sys: &SteinerSystem, point: usize) -> impl Iterator<Item = usize> + '_ {
    sys.blocks().iter().enumerate().filter(move |(_, b)| b.contains(&point)).map(|(j, _)| j)
}

/// Supports are the blocks; in each column the blocks through that point
/// get symbols `1, 2, ..` in canonical block order.
pub fn construct_f5prime(sys: &SteinerSystem, q: u32) -> Result<ConstantWeightCode, CodeError> {
    let r = sys.replication();
    if (q as u64) < r as u64 + 1 {
        return Err(CodeError::AlphabetTooSmall { q, needed: r as u64 + 1 });
    }
    let n = sys.n();
    let mut words = vec![vec![0; n]; sys.block_count()];
    for i in 1..=n {
        for (rank, j) in blocks_through(sys, i).enumerate() {
            words[j][i - 1] = rank as u32 + 1;
        }
    }
    ConstantWeightCode::new(n, q, words)
}

/// Supports are the block complements; in each column the blocks missing
/// that point get symbols `1, 2, ..` in canonical block order.
pub fn construct_f5double(sys: &SteinerSystem, q: u32) -> Result<ConstantWeightCode, CodeError> {
    let nonzeros = sys.block_count() - sys.replication();
    if (q as u64) < nonzeros as u64 + 1 {
        return Err(CodeError::AlphabetTooSmall { q, needed: nonzeros as u64 + 1 });
    }
    let n = sys.n();
    let mut words = vec![vec![0; n]; sys.block_count()];
    for i in 1..=n {
        let missing = sys.blocks().iter().enumerate().filter(|(_, b)| !b.contains(&i));
        for (rank, (j, _)) in missing.enumerate() {
            words[j][i - 1] = rank as u32 + 1;
        }
    }
    ConstantWeightCode::new(n, q, words)
}

/// The `t - 2` cyclically consecutive points ending at `i`.
pub fn theorem4_window(t: usize, n: usize, i: usize) -> Block {
    let mut window: Block = (1..=t - 2).map(|j| (i + n + j - t + 1) % n + 1).collect();
    window.sort_unstable();
    window
}

/// Distinct windows used by [`construct_theorem4`], in column order.
pub fn theorem4_windows(sys: &SteinerSystem) -> Result<Vec<Block>, CodeError> {
    if sys.t() < 3 {
        return Err(CodeError::StrengthTooSmall(sys.t()));
    }
    let mut seen = BTreeSet::new();
    Ok((1..=sys.n())
        .map(|i| theorem4_window(sys.t(), sys.n(), i))
        .filter(|w| seen.insert(w.clone()))
        .collect())
}

/// Exact colourings of the derived system at every window.
pub fn theorem4_colorings(sys: &SteinerSystem, budget: Budget) -> Result<BTreeMap<Block, ColoringResult>, CodeError> {
    theorem4_windows(sys)?
        .into_iter()
        .map(|window| {
            let derived = derive(sys, &window)?;
            let g = coloring::min_distance_graph(&derived.system)?;
            Ok((window, coloring::chromatic_number(&g, budget)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem4Code {
    pub code: ConstantWeightCode,
    /// One more than the largest symbol in any column.
    pub q_used: u32,
    /// `r - |B| + (max cells over windows) + 1`, with `|B|` the number of
    /// blocks through a window.
    pub bound: u64,
}

/// Code with supports equal to the blocks of an `S(t, k, n)`, `t >= 3`.
///
/// Column `i` uses the window `G` of `t - 2` consecutive points ending at
/// `i`. Blocks through `G` get the index of their cell in the supplied
/// colouring of the derived system at `G` (cells are indexed from 1 and
/// hold derived block indices). The remaining blocks through `i` get
/// fresh symbols following the cell indices, in canonical block order.
pub fn construct_theorem4(
    sys: &SteinerSystem,
    colorings: &BTreeMap<Block, Vec<Vec<usize>>>,
) -> Result<Theorem4Code, CodeError> {
    let (t, n) = (sys.t(), sys.n());
    if t < 3 {
        return Err(CodeError::StrengthTooSmall(t));
    }
    let mut words = vec![vec![0u32; n]; sys.block_count()];
    let mut max_cells = 0;
    let mut through_window = 0;
    for i in 1..=n {
        let window = theorem4_window(t, n, i);
        let cells = colorings.get(&window).ok_or_else(|| CodeError::MissingColoring(window.clone()))?;
        let derived = derive(sys, &window)?;
        if coloring::verify_block_coloring(&derived.system, cells) != Ok(true) {
            return Err(CodeError::InvalidColoring(window));
        }
        let mut in_window = vec![false; sys.block_count()];
        for (s, cell) in cells.iter().enumerate() {
            for &b in cell {
                let j = derived.parent_block(sys, &window, b);
                in_window[j] = true;
                words[j][i - 1] = s as u32 + 1;
            }
        }
        let mut next = cells.len() as u32;
        for j in blocks_through(sys, i) {
            if !in_window[j] {
                next += 1;
                words[j][i - 1] = next;
            }
        }
        max_cells = max_cells.max(cells.len());
        through_window = derived.system.block_count();
    }
    let q_used = words.iter().flatten().copied().max().unwrap_or(0) + 1;
    let bound = (sys.replication() - through_window + max_cells + 1) as u64;
    Ok(Theorem4Code { code: ConstantWeightCode::new(n, q_used, words)?, q_used, bound })
}

/// Line-complement code of `AG(2, k)` with `k^2 - (k-1)/2` symbols.
///
/// Start from all-distinct nonzeros in each column, then let pairs of
/// parallel lines share a symbol in columns they both miss, with
/// `(k-1)/2` pairwise disjoint merges per column and at most one per pair
/// of lines. Merged symbols are then renumbered per column in order of
/// first appearance.
pub fn construct_affine(k: u32) -> Result<ConstantWeightCode, CodeError> {
    let f = FieldSpec::of_order(k as u64).map_err(SteinerError::from)?;
    let sys = crate::steiner::affine_plane(k as u64)?;
    let n = (k * k) as usize;
    let line_index = |a: u32, b: u32| sys.index_of(&affine_line(&f, a, b)).expect("affine line");
    let one = f.one();
    let shifts = affine_shift_sets(&f);
    // merges[point] lists pairs of block indices that share a symbol there.
    let mut merges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
    for x0 in f.elements() {
        for y0 in f.elements() {
            let point = affine_point(k, x0, y0);
            for &s in &shifts[x0 as usize] {
                let a = f.add(y0, s);
                let b = f.sub(f.add(x0, f.mul(a, y0)), one);
                merges[point].push((line_index(a, b), line_index(a, f.add(b, s))));
            }
        }
    }
    let mut words = vec![vec![0u32; n]; sys.block_count()];
    for (i, pairs) in merges.iter().enumerate().skip(1) {
        let mut partner: BTreeMap<usize, usize> = BTreeMap::new();
        for &(u, v) in pairs {
            partner.insert(u, v);
            partner.insert(v, u);
        }
        let mut next = 0;
        for (j, block) in sys.blocks().iter().enumerate() {
            if block.contains(&i) {
                continue;
            }
            let earlier = partner.get(&j).filter(|&&p| p < j);
            words[j][i - 1] = match earlier {
                Some(&p) => words[p][i - 1],
                None => {
                    next += 1;
                    next
                }
            };
        }
    }
    let q = k * k - (k - 1) / 2;
    ConstantWeightCode::new(n, q, words)
}

/// For each `x0` (by encoding) the set of shifts `s` used in column
/// `(x0, y0)` of the affine construction.
fn affine_shift_sets(f: &FieldSpec) -> Vec<Vec<u32>> {
    let k = f.order();
    let (zero, one) = (f.zero(), f.one());
    if k % 2 == 1 {
        // One element from each pair {s, -s}: never 1, else the smaller.
        let mut s = Vec::new();
        for x in f.elements().filter(|&x| x != zero) {
            let pick = if x == one || f.neg(x) == one {
                f.neg(one)
            } else {
                x.min(f.neg(x))
            };
            if !s.contains(&pick) {
                s.push(pick);
            }
        }
        s.sort_unstable();
        return vec![s; k as usize];
    }
    let mut sets = vec![Vec::new(); k as usize];
    for s in f.elements().filter(|&s| s != zero && s != one) {
        if f.add(s, one) < s {
            continue;
        }
        let s1 = f.add(s, one);
        let quad = |z: u32| [z, f.add(z, one), f.add(z, s), f.add(z, s1)];
        let mut done = vec![false; k as usize];
        for z in f.elements() {
            if done[z as usize] {
                continue;
            }
            let q = quad(z);
            for &m in &q {
                done[m as usize] = true;
            }
            sets[q[0] as usize].push(s);
            sets[q[1] as usize].push(s);
            sets[q[2] as usize].push(s1);
            sets[q[3] as usize].push(s1);
        }
    }
    for s in &mut sets {
        s.sort_unstable();
    }
    sets
}

/// Line-complement code of `PG(2, s)` over `s^2 + 1` symbols.
pub fn construct_projective(s: u32) -> Result<ConstantWeightCode, CodeError> {
    let sys = crate::steiner::projective_plane(s as u64)?;
    construct_f5double(&sys, s * s + 1)
}

/// Closes a set of words under cyclic rotation of coordinates. The result
/// is sorted and free of repeats.
pub fn expand_cyclic(representatives: &[Word], n: usize, q: u32) -> Result<ConstantWeightCode, CodeError> {
    let mut words = BTreeSet::new();
    for (index, rep) in representatives.iter().enumerate() {
        if rep.len() != n {
            return Err(CodeError::Length { index, len: rep.len(), n });
        }
        if let Some(&symbol) = rep.iter().find(|&&s| s >= q) {
            return Err(CodeError::SymbolOutOfRange { symbol, q });
        }
        let mut w = rep.clone();
        for _ in 0..n {
            w.rotate_right(1);
            words.insert(w.clone());
        }
    }
    ConstantWeightCode::new(n, q, words.into_iter().collect())
}
