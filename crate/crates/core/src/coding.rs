//! Symbolic coding of displacement by the increment function
//! `r(x) = L(x) - L(σx)`.
//!
//! `r` is locally constant: past a stabilization depth it depends on a
//! bounded prefix only. [`find_stabilization_depth`] discovers that depth
//! by exhaustive search plus randomized cross-validation and freezes the
//! values on short words into a table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{displacement, Presentation};
use crate::words::{count_words, shift, Letter, Word, WordIndexer};

/// Absolute tolerance for comparing sums of edge lengths.
pub const LENGTH_TOL: f64 = 1e-9;

/// `r(x) = L(x) - L(σx)` on a finite word, with `r(1) = 0`.
pub fn increment_r(pres: &Presentation, x: &Word) -> f64 {
    if x.is_identity() {
        return 0.0;
    }
    displacement(pres, x) - displacement(pres, &shift(x))
}

#[derive(Debug, Clone)]
pub struct StabilizationOptions {
    pub margin: usize,
    pub cap: usize,
    pub samples: usize,
    pub seed: u64,
    /// Upper bound on the number of words held in the exhaustive tables.
    pub max_table_words: usize,
}

impl Default for StabilizationOptions {
    fn default() -> Self {
        StabilizationOptions {
            margin: 3,
            cap: 12,
            samples: 10_000,
            seed: 1,
            max_table_words: 50_000_000,
        }
    }
}

/// Stabilization data: depth `N`, the frozen increment table on words of
/// length at most `N`, and the parameters used to certify it.
///
/// The depth is chosen so that every increment on a word of length at
/// least `N - 1` is already determined by its first `N - 1` letters, i.e.
/// by the transfer state it starts in. `increment_depth` is the smallest
/// prefix length that determines `r`; `N = max(2, increment_depth + 1)`.
#[derive(Debug, Clone)]
pub struct CodingData {
    pres: Presentation,
    depth: usize,
    increment_depth: usize,
    margin: usize,
    seed: u64,
    samples: usize,
    indexer: WordIndexer,
    lengths: Vec<f64>,
    r_table: Vec<f64>,
}

/// Exhaustive search for the stabilization depth.
pub fn find_stabilization_depth(pres: &Presentation, opts: &StabilizationOptions) -> Result<CodingData> {
    if opts.margin < 2 {
        return Err(Error::InvalidInput(format!("margin must be at least 2, got {}", opts.margin)));
    }
    let rank = pres.rank();
    let mut lengths: Vec<f64> = Vec::new();
    let mut computed_len = 0usize;
    // lengths[idx] = L(word) for every reduced word up to computed_len
    let extend_to = |max_len: usize, lengths: &mut Vec<f64>, computed_len: &mut usize| -> Result<WordIndexer> {
        let indexer = WordIndexer::new(rank, max_len);
        if indexer.len() > opts.max_table_words {
            return Err(Error::Resource(format!(
                "stabilization check at word length {max_len} needs {} table entries (cap {})",
                indexer.len(),
                opts.max_table_words
            )));
        }
        let start = if lengths.is_empty() { 0 } else { *computed_len + 1 };
        for j in start..=max_len {
            let level: Vec<f64> = indexer
                .range(j)
                .into_par_iter()
                .map(|i| displacement(pres, &indexer.word_at(i)))
                .collect();
            lengths.extend(level);
        }
        *computed_len = max_len;
        Ok(indexer)
    };

    for depth in 2..=opts.cap {
        let indexer = extend_to(depth + opts.margin, &mut lengths, &mut computed_len)?;
        let r_of = |letters: &[Letter]| -> f64 {
            if letters.is_empty() {
                return 0.0;
            }
            lengths[indexer.index_of(letters)] - lengths[indexer.index_of(&letters[1..])]
        };
        let violation = |dep: usize| -> bool {
            (dep + 1..=depth + opts.margin).any(|j| {
                indexer.range(j).into_par_iter().any(|i| {
                    let u = indexer.word_at(i);
                    (r_of(u.letters()) - r_of(&u.letters()[..dep])).abs() > LENGTH_TOL
                })
            })
        };
        if violation(depth - 1) {
            continue;
        }
        let increment_depth = (1..depth).find(|&d| !violation(d)).unwrap_or(depth - 1);
        let table_indexer = WordIndexer::new(rank, depth);
        let table_len = table_indexer.len();
        let r_table: Vec<f64> = (0..table_len)
            .map(|i| r_of(table_indexer.word_at(i).letters()))
            .collect();
        let data = CodingData {
            pres: pres.clone(),
            depth,
            increment_depth,
            margin: opts.margin,
            seed: opts.seed,
            samples: opts.samples,
            indexer: table_indexer,
            lengths: lengths[..table_len].to_vec(),
            r_table,
        };
        data.cross_validate(opts.samples, depth + opts.margin + 6, opts.seed)?;
        return Ok(data);
    }
    Err(Error::Resource(format!(
        "no stabilization depth N <= {} (search cap) passed the margin-{} check",
        opts.cap, opts.margin
    )))
}

/// Uniformly random reduced word of the given length.
pub fn random_word<R: Rng>(rng: &mut R, rank: usize, len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let code = rng.random_range(0..2 * rank);
        let l = Letter::from_code(code);
        if letters.last().map_or(true, |p| l != p.inverse()) {
            letters.push(l);
        }
    }
    Word::from_reduced_unchecked(letters)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityBlock {
    /// Block length `m₀`.
    pub block: usize,
    /// `δ = min Σ_{t<m₀} r(σ^t u)` over all long-enough reduced `u`.
    pub delta: f64,
}

impl CodingData {
    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn rank(&self) -> usize {
        self.pres.rank()
    }

    /// Stabilization depth `N`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn increment_depth(&self) -> usize {
        self.increment_depth
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Indexer over reduced words of length at most `N`.
    pub fn indexer(&self) -> &WordIndexer {
        &self.indexer
    }

    /// `L` on a word of length at most `N`.
    #[inline]
    pub fn short_length(&self, letters: &[Letter]) -> f64 {
        self.lengths[self.indexer.index_of(letters)]
    }

    /// Increment of an arbitrary reduced word, read from the table.
    #[inline]
    pub fn r(&self, letters: &[Letter]) -> f64 {
        let n = letters.len().min(self.depth);
        self.r_table[self.indexer.index_of(&letters[..n])]
    }

    /// `(word, r)` rows over all words of length at most `N`.
    pub fn r_rows(&self) -> Vec<(Word, f64)> {
        (0..self.indexer.len())
            .map(|i| (self.indexer.word_at(i), self.r_table[i]))
            .collect()
    }

    /// `max |r|` over the table (equals the sup over all reduced words).
    pub fn max_abs_r(&self) -> f64 {
        self.r_table.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `max L(u)` over words of length exactly `N - 1`.
    pub fn max_state_length(&self) -> f64 {
        self.indexer
            .range(self.depth - 1)
            .map(|i| self.lengths[i])
            .fold(0.0, f64::max)
    }

    fn cross_validate(&self, samples: usize, max_len: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let len = rng.random_range(1..=max_len);
            let x = random_word(&mut rng, self.rank(), len);
            let lhs = telescope_sum(self, &x);
            let rhs = displacement(&self.pres, &x);
            if (lhs - rhs).abs() > LENGTH_TOL {
                return Err(Error::Invariant(format!(
                    "telescoping cross-check failed at depth {} for `{x}`: r-sum {lhs} vs L {rhs}",
                    self.depth
                )));
            }
        }
        Ok(())
    }

    /// Smallest block length `m₀ ≤ max_block` whose minimal `r`-sum over
    /// `m₀` consecutive positions of a long word is positive.
    ///
    /// Each position's increment is a function of the `N`-letter window
    /// starting there, so the minimum is a min-plus path problem over
    /// windows of length `N - 1`.
    pub fn eventual_positivity(&self, max_block: usize) -> Option<PositivityBlock> {
        let n = self.depth;
        let rank = self.rank();
        let states = WordIndexer::new(rank, n - 1).range(n - 1);
        let base = states.start;
        let count = states.len();
        let idx = WordIndexer::new(rank, n - 1);
        // arcs: state x -> state σx·z with weight r(x·z)
        let mut arcs: Vec<(usize, usize, f64)> = Vec::with_capacity(count * (2 * rank - 1));
        for s in 0..count {
            let x = idx.word_at(base + s);
            let last = x.last().unwrap();
            for code in 0..2 * rank {
                let z = Letter::from_code(code);
                if z == last.inverse() {
                    continue;
                }
                let mut xz = x.letters().to_vec();
                xz.push(z);
                let y = idx.index_of(&xz[1..]) - base;
                arcs.push((s, y, self.r(&xz)));
            }
        }
        let mut best = vec![0.0f64; count];
        for m in 1..=max_block {
            let mut next = vec![f64::INFINITY; count];
            for &(x, y, w) in &arcs {
                // minimal r-sum of m-step paths ending in y
                next[y] = next[y].min(best[x] + w);
            }
            best = next;
            let delta = best.iter().copied().fold(f64::INFINITY, f64::min);
            if delta > LENGTH_TOL {
                return Some(PositivityBlock { block: m, delta });
            }
        }
        None
    }
}

/// `Σ_j r(σ^j x)` with the tabulated, locally constant `r`; equals `L(x)`.
pub fn telescope_sum(coding: &CodingData, x: &Word) -> f64 {
    let l = x.letters();
    (0..l.len()).map(|j| coding.r(&l[j..])).sum()
}

/// Sum of `r` around the periodic orbit of `g^∞`; equals the length of the
/// closed geodesic of `g`.
pub fn periodic_r_sum(coding: &CodingData, g: &Word) -> Result<f64> {
    if g.is_identity() || !g.is_cyclically_reduced() {
        return Err(Error::InvalidInput(format!("word `{g}` is not a nonempty cyclically reduced word")));
    }
    let l = g.letters();
    let n = coding.depth();
    let mut window = Vec::with_capacity(n);
    let mut total = 0.0;
    for j in 0..l.len() {
        window.clear();
        window.extend((0..n).map(|i| l[(j + i) % l.len()]));
        total += coding.r(&window);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub id: usize,
    pub word: String,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Arithmeticity {
    #[serde(rename = "LATTICE")]
    Lattice { delta: f64 },
    #[serde(rename = "NON_LATTICE")]
    NonLattice {
        /// Ids of the two classes whose length ratio is the witness.
        first: usize,
        second: usize,
        ratio: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthSpectrum {
    pub classes: Vec<SpectrumEntry>,
    pub arithmeticity: Arithmeticity,
}

/// Tolerance of the arithmeticity sweep.
pub const LATTICE_TOL: f64 = 1e-8;
/// Largest denominator accepted for a rational length ratio.
const MAX_DENOMINATOR: u64 = 1000;

/// Closed-geodesic lengths of all rotation classes of cyclically reduced
/// words up to `max_len`, with a lattice/non-lattice heuristic verdict.
pub fn length_spectrum(coding: &CodingData, max_len: usize) -> Result<LengthSpectrum> {
    if max_len < 2 {
        return Err(Error::InvalidInput(format!("spectrum word length must be at least 2, got {max_len}")));
    }
    let rank = coding.rank();
    let mut classes = Vec::new();
    for len in 1..=max_len {
        for g in crate::words::enumerate_words(rank, len, &[]) {
            if !g.is_cyclically_reduced() {
                continue;
            }
            // one representative per rotation class: the least rotation
            if (1..len).any(|j| g.rotate(j) < g) {
                continue;
            }
            let length = periodic_r_sum(coding, &g)?;
            classes.push(SpectrumEntry {
                id: classes.len(),
                word: g.to_string(),
                length,
            });
        }
    }
    let lengths: Vec<f64> = classes.iter().map(|c| c.length).collect();
    let arithmeticity = arithmeticity(&lengths);
    Ok(LengthSpectrum { classes, arithmeticity })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Best continued-fraction approximation `p/q` of `x` with `q ≤ max_q`.
fn rational_approx(x: f64, max_q: u64) -> (u64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut y = x;
    loop {
        let a = y.floor();
        let (p2, q2) = (a as u64 * p1 + p0, a as u64 * q1 + q0);
        if q2 > max_q {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a;
        if frac < 1e-12 {
            break;
        }
        y = 1.0 / frac;
    }
    (p1, q1.max(1))
}

/// Lattice test on a list of positive lengths.
pub fn arithmeticity(lengths: &[f64]) -> Arithmeticity {
    let Some((imin, &lmin)) = lengths
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
    else {
        return Arithmeticity::Lattice { delta: 0.0 };
    };
    let mut denom = 1u64;
    for (i, &l) in lengths.iter().enumerate() {
        let (p, q) = rational_approx(l / lmin, MAX_DENOMINATOR);
        let fits = (l - p as f64 / q as f64 * lmin).abs() <= LATTICE_TOL;
        let lcm = denom / gcd(denom, q) * q;
        if !fits || lcm > MAX_DENOMINATOR {
            return Arithmeticity::NonLattice {
                first: imin,
                second: i,
                ratio: lmin / l,
            };
        }
        denom = lcm;
    }
    let delta = lmin / denom as f64;
    // the generator must reproduce every length
    for (i, &l) in lengths.iter().enumerate() {
        if (l - (l / delta).round() * delta).abs() > LATTICE_TOL {
            return Arithmeticity::NonLattice {
                first: imin,
                second: i,
                ratio: lmin / l,
            };
        }
    }
    Arithmeticity::Lattice { delta }
}

/// Number of reduced words of length `m`; convenience for reports.
pub fn word_count(rank: usize, m: usize) -> u128 {
    count_words(rank, m, 0)
}
