//! Exact orbit counts, residue constants and the fits that compare them.
//!
//! Full counts `N(T) = #{x : L(x) ≤ T}` and class counts `N_C(T)` are
//! produced by depth-first search over reduced words. `L` is carried along
//! incrementally: appending `z` to `p` only changes the increments of the
//! last `N - 1` suffixes, so `L(pz) = L(p) - L(t) + L(tz)` with `t` the last
//! `N - 1` letters of `p`, both read from the short-word table. The same
//! decomposition gives the subtree bound `L(px) ≥ L(p) - L(t)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{arithmeticity, length_spectrum, Arithmeticity, CodingData, LENGTH_TOL};
use crate::error::{Error, Result};
use crate::graph::{displacement, geodesic_length, Presentation};
use crate::transfer::{beta_prime, build_transfer, perron, solve_entropy, EntropySolution, PerronData, TransferSystem, DEFAULT_ENTROPY_TOL};
use crate::words::{class_elements, enumerate_words, ConjClassSpec, Letter, Word};

pub const DEFAULT_BUDGET: u64 = 2_000_000_000;
/// Parallel subtrees are rooted at this word length (or deeper).
const ROOT_LENGTH: usize = 5;
const SPECTRUM_WORD_LENGTH: usize = 4;

/// Constants of the subtree pruning, computed from the coding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pruning {
    /// Block length `m₀` with positive minimal block increment.
    pub block: usize,
    /// Minimal increment sum over `m₀` consecutive full windows.
    pub delta: f64,
    /// `max L(t)` over words of length `N - 1`.
    pub bound: f64,
}

impl Pruning {
    /// Longest word that can survive pruning at radius `t`.
    ///
    /// A word of length `n ≥ N` has `n - N + 1` full windows, hence
    /// `L ≥ δ ⌊(n - N + 1)/m₀⌋`; surviving words have `L ≤ t + B`.
    pub fn depth_cap(&self, depth: usize, t: f64) -> usize {
        let blocks = ((t + self.bound) / self.delta).floor() as usize + 1;
        self.block * blocks + depth - 1
    }
}

/// Everything the counters need, derived once per fixture.
#[derive(Debug, Clone)]
pub struct Counter {
    coding: CodingData,
    transfer: TransferSystem,
    entropy: EntropySolution,
    perron: PerronData,
    pruning: Pruning,
    arithmeticity: Arithmeticity,
    budget: u64,
}

impl Counter {
    pub fn new(coding: CodingData, budget: u64) -> Result<Counter> {
        let transfer = build_transfer(&coding);
        let entropy = solve_entropy(&transfer, DEFAULT_ENTROPY_TOL)?;
        let perron = perron(&transfer, entropy.h)?;
        let depth = coding.depth();
        let block = coding.eventual_positivity(4 * depth).ok_or_else(|| {
            Error::Invariant(format!("no positive increment block of length at most {}", 4 * depth))
        })?;
        let pruning = Pruning {
            block: block.block,
            delta: block.delta,
            bound: coding.max_state_length(),
        };
        let spectrum = length_spectrum(&coding, SPECTRUM_WORD_LENGTH)?;
        let lengths: Vec<f64> = spectrum.classes.iter().map(|c| c.length).collect();
        Ok(Counter {
            arithmeticity: arithmeticity(&lengths),
            coding,
            transfer,
            entropy,
            perron,
            pruning,
            budget,
        })
    }

    pub fn coding(&self) -> &CodingData {
        &self.coding
    }

    pub fn presentation(&self) -> &Presentation {
        self.coding.presentation()
    }

    pub fn transfer(&self) -> &TransferSystem {
        &self.transfer
    }

    pub fn entropy(&self) -> &EntropySolution {
        &self.entropy
    }

    pub fn h(&self) -> f64 {
        self.entropy.h
    }

    pub fn perron(&self) -> &PerronData {
        &self.perron
    }

    pub fn pruning(&self) -> Pruning {
        self.pruning
    }

    pub fn arithmeticity(&self) -> &Arithmeticity {
        &self.arithmeticity
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn with_budget(mut self, budget: u64) -> Counter {
        self.budget = budget;
        self
    }

    /// Leading-order estimate `(c₀/h) e^{h x_max}` of `#{x : L(x) ≤ x_max}`.
    pub fn estimate_ball(&self, x_max: f64) -> f64 {
        let bp = beta_prime(&self.transfer, &self.perron);
        guillope_constant(&self.perron, bp).lead * (self.entropy.h * x_max).exp()
    }

    fn check_budget(&self, estimate: f64, what: &str) -> Result<()> {
        if estimate > self.budget as f64 {
            return Err(Error::Resource(format!(
                "{what} needs an estimated {estimate:.3e} search nodes, over the budget of {}",
                self.budget
            )));
        }
        Ok(())
    }

    /// Exact `#{x : L(x) ≤ t}`.
    pub fn count_all(&self, t: f64) -> Result<u64> {
        Ok(self.count_all_many(&[t])?.counts[0])
    }

    /// Exact full counts at every radius in `radii` from one search.
    pub fn count_all_many(&self, radii: &[f64]) -> Result<Counts> {
        let grid = Grid::new(radii)?;
        let limit = grid.max();
        let bound = self.pruning.bound;
        self.check_budget(self.estimate_ball(limit + bound), "full count")?;
        let cap = self.pruning.depth_cap(self.coding.depth(), limit);
        let rank = self.coding.rank();

        let mut head = Walk::new(&self.coding, &grid, cap);
        head.visit(&mut Vec::new(), 0.0, ROOT_LENGTH - 1);
        let roots: Vec<Word> = enumerate_words(rank, ROOT_LENGTH, &[]).collect();
        let walks: Vec<Result<Walk>> = roots
            .par_iter()
            .map(|w| {
                let mut walk = Walk::new(&self.coding, &grid, cap);
                let l = displacement(self.presentation(), w);
                walk.start(w.letters(), l, 0.0, 1.0)?;
                Ok(walk)
            })
            .collect();
        let mut total = head.finish()?;
        for w in walks {
            total.merge(&w?.finish()?);
        }
        Ok(grid.counts(total))
    }

    /// Exact `#{x ∈ C : L(x) ≤ t}`.
    pub fn count_class(&self, spec: &ConjClassSpec, t: f64) -> Result<u64> {
        Ok(self.count_class_many(spec, &[t], false)?.counts[0])
    }

    /// Exact class counts at every radius in `radii`.
    ///
    /// Elements are `w⁻¹ g′ w` over rotations `g′` and admissible `w`. Once
    /// `|w| ≥ N - 1`, with `y` the first `N - 1` letters of `w`,
    /// `L(w⁻¹g′w) = K + 2L(w)` where `K = L(y⁻¹g′y) - 2L(y)` depends on the
    /// subtree root only. With `verify`, every visited element is also
    /// measured directly and the two values must agree.
    pub fn count_class_many(&self, spec: &ConjClassSpec, radii: &[f64], verify: bool) -> Result<Counts> {
        let grid = Grid::new(radii)?;
        let limit = grid.max();
        let pres = self.presentation();
        let rank = self.coding.rank();
        let depth = self.coding.depth();
        let bound = self.pruning.bound;
        let offset = |g: &Word, y: &Word| displacement(pres, &conjugate(g, y)) - 2.0 * displacement(pres, y);
        let k_min = spec
            .rotations()
            .iter()
            .enumerate()
            .flat_map(|(i, g)| enumerate_words(rank, depth - 1, &spec.forbidden_first(i)).map(move |y| (g, y)))
            .map(|(g, y)| offset(g, &y))
            .fold(f64::INFINITY, f64::min);
        // surviving conjugators have L(w) ≤ (T - K)/2 + B
        let reach = 0.5 * (limit - k_min).max(0.0);
        let rotations = spec.rotations().len() as f64;
        self.check_budget(rotations * self.estimate_ball(reach + bound), "class count")?;
        let cap = self.pruning.depth_cap(depth, reach);
        let root_len = ROOT_LENGTH.max(depth - 1);

        let mut total = Tally::new(grid.len());
        let mut roots = Vec::new();
        for (rotation, g) in spec.rotations().iter().enumerate() {
            let forbidden = spec.forbidden_first(rotation);
            for m in 0..root_len {
                for w in enumerate_words(rank, m, &forbidden) {
                    let l = displacement(pres, &conjugate(g, &w));
                    total.record(&grid, l);
                }
            }
            roots.extend(enumerate_words(rank, root_len, &forbidden).map(|w| (rotation, w)));
        }
        let walks: Vec<Result<Tally>> = roots
            .par_iter()
            .map(|(rotation, w)| {
                let g = &spec.rotations()[*rotation];
                let y = w.prefix(depth - 1);
                let k = offset(g, &y);
                let mut walk = Walk::new(&self.coding, &grid, cap);
                if verify {
                    walk.verify = Some((pres, g));
                }
                let l = displacement(pres, w);
                walk.start(w.letters(), l, k, 2.0)?;
                walk.finish()
            })
            .collect();
        for w in walks {
            total.merge(&w?);
        }
        Ok(grid.counts(total))
    }
}

fn conjugate(g: &Word, w: &Word) -> Word {
    let mut v = w.inverse().letters().to_vec();
    v.extend_from_slice(g.letters());
    v.extend_from_slice(w.letters());
    Word::from_reduced_unchecked(v)
}

/// Sorted radii with the permutation back to caller order.
struct Grid {
    sorted: Vec<f64>,
    order: Vec<usize>,
}

impl Grid {
    fn new(radii: &[f64]) -> Result<Grid> {
        if radii.is_empty() {
            return Err(Error::InvalidInput("no radii given".into()));
        }
        if let Some(t) = radii.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be finite and nonnegative, got {t}")));
        }
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[a].partial_cmp(&radii[b]).unwrap());
        let sorted = order.iter().map(|&i| radii[i]).collect();
        Ok(Grid { sorted, order })
    }

    fn len(&self) -> usize {
        self.sorted.len()
    }

    fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }

    /// Bin of a length: the first radius it does not exceed.
    fn bin(&self, l: f64) -> Option<usize> {
        let i = self.sorted.partition_point(|t| t + LENGTH_TOL < l);
        (i < self.sorted.len()).then_some(i)
    }

    fn counts(&self, tally: Tally) -> Counts {
        let mut cumulative = Vec::with_capacity(self.len());
        let mut acc = 0u64;
        for c in &tally.bins {
            acc += c;
            cumulative.push(acc);
        }
        let mut counts = vec![0; self.len()];
        for (k, &i) in self.order.iter().enumerate() {
            counts[i] = cumulative[k];
        }
        Counts {
            counts,
            nodes: tally.nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counts {
    /// Count at each requested radius, in request order.
    pub counts: Vec<u64>,
    /// Search nodes visited.
    pub nodes: u64,
}

#[derive(Debug, Clone)]
struct Tally {
    bins: Vec<u64>,
    nodes: u64,
}

impl Tally {
    fn new(len: usize) -> Tally {
        Tally { bins: vec![0; len], nodes: 0 }
    }

    fn record(&mut self, grid: &Grid, l: f64) {
        self.nodes += 1;
        if let Some(i) = grid.bin(l) {
            self.bins[i] += 1;
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.nodes += other.nodes;
    }
}

/// One sequential depth-first search. The counted quantity at a node `p`
/// is `offset + scale·L(p)`; `scale` is 1 for full counts and 2 for class
/// counts with `offset = K`.
struct Walk<'a> {
    coding: &'a CodingData,
    grid: &'a Grid,
    limit: f64,
    cap: usize,
    offset: f64,
    scale: f64,
    tally: Tally,
    overflow: bool,
    verify: Option<(&'a Presentation, &'a Word)>,
    mismatch: Option<String>,
}

impl<'a> Walk<'a> {
    fn new(coding: &'a CodingData, grid: &'a Grid, cap: usize) -> Walk<'a> {
        Walk {
            coding,
            grid,
            limit: grid.max() + LENGTH_TOL,
            cap,
            offset: 0.0,
            scale: 1.0,
            tally: Tally::new(grid.len()),
            overflow: false,
            verify: None,
            mismatch: None,
        }
    }

    fn start(&mut self, root: &[Letter], l: f64, offset: f64, scale: f64) -> Result<()> {
        self.offset = offset;
        self.scale = scale;
        let mut word = root.to_vec();
        if self.lower_bound(&word, l) <= self.limit {
            self.visit(&mut word, l, usize::MAX);
        }
        Ok(())
    }

    /// Lower bound on the counted quantity over the subtree below `p`.
    #[inline]
    fn lower_bound(&self, p: &[Letter], l: f64) -> f64 {
        let n = self.coding.depth() - 1;
        let t = &p[p.len().saturating_sub(n)..];
        self.offset + self.scale * (l - self.coding.short_length(t))
    }

    fn visit(&mut self, p: &mut Vec<Letter>, l: f64, stop: usize) {
        let value = self.offset + self.scale * l;
        self.tally.record(self.grid, value);
        if let Some((pres, g)) = self.verify {
            let w = Word::from_reduced_unchecked(p.clone());
            let direct = displacement(pres, &conjugate(g, &w));
            if (direct - value).abs() > LENGTH_TOL && self.mismatch.is_none() {
                self.mismatch = Some(format!("class element with conjugator `{w}`: decomposition {value}, direct {direct}"));
            }
        }
        if p.len() >= stop {
            return;
        }
        let n = self.coding.depth() - 1;
        let rank = self.coding.rank();
        let back = p.last().map(|z| z.inverse());
        let from = p.len().saturating_sub(n);
        let lt = self.coding.short_length(&p[from..]);
        for code in 0..2 * rank {
            let z = Letter::from_code(code);
            if Some(z) == back {
                continue;
            }
            p.push(z);
            let lz = l - lt + self.coding.short_length(&p[from..]);
            if self.lower_bound(p, lz) <= self.limit {
                if p.len() > self.cap {
                    self.overflow = true;
                } else {
                    self.visit(p, lz, stop);
                }
            }
            p.pop();
        }
    }

    fn finish(self) -> Result<Tally> {
        if self.overflow {
            return Err(Error::Invariant(format!(
                "search passed the depth cap {} with an unpruned word",
                self.cap
            )));
        }
        if let Some(m) = self.mismatch {
            return Err(Error::Invariant(m));
        }
        Ok(self.tally)
    }
}

/// Class count by direct displacement of every element with conjugator
/// length at most `m_max`. Independent of the coding; used as an oracle.
pub fn count_class_direct(pres: &Presentation, spec: &ConjClassSpec, t: f64, m_max: usize) -> u64 {
    let rank = pres.rank();
    (0..=m_max)
        .flat_map(|m| class_elements(spec, rank, m))
        .filter(|e| displacement(pres, &e.element(spec)) <= t + LENGTH_TOL)
        .count() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionRow {
    pub m: usize,
    pub checked: u64,
    pub violations: u64,
    pub max_error: f64,
}

/// Exhaustive check of `L(w⁻¹g′w) = L(y⁻¹g′y) - 2L(y) + 2L(w)` over every
/// rotation `g′` and conjugator length `N - 1 ≤ m ≤ m_max`, each side by
/// direct displacement.
pub fn decomposition_check(coding: &CodingData, spec: &ConjClassSpec, m_max: usize) -> Result<Vec<DecompositionRow>> {
    let n = coding.depth() - 1;
    if m_max < n {
        return Err(Error::InvalidInput(format!("m_max = {m_max} is below N - 1 = {n}")));
    }
    let pres = coding.presentation();
    let rank = coding.rank();
    let rows = (n..=m_max)
        .map(|m| {
            let errors: Vec<f64> = class_elements(spec, rank, m)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|e| {
                    let g = &spec.rotations()[e.rotation];
                    let w = &e.conjugator;
                    let y = w.prefix(n);
                    let lhs = displacement(pres, &conjugate(g, w));
                    let rhs = displacement(pres, &conjugate(g, &y)) - 2.0 * displacement(pres, &y) + 2.0 * displacement(pres, w);
                    (lhs - rhs).abs()
                })
                .collect();
            DecompositionRow {
                m,
                checked: errors.len() as u64,
                violations: errors.iter().filter(|e| **e > LENGTH_TOL).count() as u64,
                max_error: errors.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuillopeConstant {
    pub c0: f64,
    /// `c₀/h`, predicting `N(T) ~ (c₀/h) e^{hT}`.
    pub lead: f64,
}

/// `c₀ = (Σ v)/(-β′(h))` from the Perron data at `h`.
pub fn guillope_constant(pd: &PerronData, beta_prime_h: f64) -> GuillopeConstant {
    let c0 = pd.v_full.iter().sum::<f64>() / -beta_prime_h;
    GuillopeConstant { c0, lead: c0 / pd.s }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassConstant {
    /// Residue at `s = h/2`.
    pub residue: f64,
    /// `C = residue/(h/2)`, predicting `N_C(T) ~ C e^{hT/2}`.
    pub c: f64,
}

/// Residue of the class series at `h/2`:
/// `Σ_{g′} Σ_{y ∈ W′_{N-1}(g′)} e^{-(h/2)(L(y⁻¹g′y) - 2L(y))} v_y / (-2β′(h))`.
pub fn class_constant(ts: &TransferSystem, pd: &PerronData, beta_prime_h: f64, spec: &ConjClassSpec, pres: &Presentation) -> ClassConstant {
    let half = 0.5 * pd.s;
    let n = ts.depth() - 1;
    let rank = ts.rank();
    let mut sum = 0.0;
    for (rotation, g) in spec.rotations().iter().enumerate() {
        for y in enumerate_words(rank, n, &spec.forbidden_first(rotation)) {
            let k = displacement(pres, &conjugate(g, &y)) - 2.0 * displacement(pres, &y);
            let idx = ts.state_index(&y).expect("conjugator prefix is a long state");
            sum += (-half * k).exp() * pd.v_full[idx];
        }
    }
    let residue = sum / (-2.0 * beta_prime_h);
    ClassConstant { residue, c: residue / half }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two standard errors of the slope.
    pub half_width: f64,
    pub used: usize,
}

/// Least-squares slope of `log count` against `T` over the top half of the
/// `T`-range of the samples with count at least 10.
pub fn slope_fit(samples: &[(f64, f64)]) -> Result<SlopeFit> {
    let usable: Vec<(f64, f64)> = samples.iter().copied().filter(|&(_, c)| c >= 10.0).collect();
    if usable.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "slope fit needs at least 5 samples with count ≥ 10, got {}",
            usable.len()
        )));
    }
    let lo = usable.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = usable.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let top: Vec<(f64, f64)> = usable.into_iter().filter(|s| s.0 >= mid).map(|(t, c)| (t, c.ln())).collect();
    if top.len() < 3 {
        return Err(Error::InvalidInput("slope fit needs at least 3 samples in the top half".into()));
    }
    let k = top.len() as f64;
    let mx = top.iter().map(|s| s.0).sum::<f64>() / k;
    let my = top.iter().map(|s| s.1).sum::<f64>() / k;
    let sxx: f64 = top.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = top.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput("slope fit needs distinct T values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = top.iter().map(|s| (s.1 - intercept - slope * s.0).powi(2)).sum();
    let se = (rss / (k - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        half_width: 2.0 * se,
        used: top.len(),
    })
}

/// Means of `values` over `windows` consecutive equal-size chunks; the
/// leading remainder is dropped so the last window ends at the last value.
pub fn windowed_means(values: &[f64], windows: usize) -> Vec<f64> {
    if windows == 0 || values.len() < windows {
        return Vec::new();
    }
    let size = values.len() / windows;
    let skip = values.len() - size * windows;
    values[skip..]
        .chunks(size)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoumaRow {
    pub n: usize,
    pub count: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoumaTable {
    pub q: usize,
    pub class_length: usize,
    pub rows: Vec<DoumaRow>,
}

impl DoumaTable {
    /// Largest relative change of the ratio between consecutive rows of one
    /// parity among the last `last` rows of that parity.
    pub fn parity_drift(&self, parity: usize, last: usize) -> f64 {
        let ratios: Vec<f64> = self.rows.iter().filter(|r| r.n % 2 == parity).map(|r| r.ratio).collect();
        let tail = &ratios[ratios.len().saturating_sub(last)..];
        tail.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).fold(0.0, f64::max)
    }
}

/// `N_C(n) / q^{⌊(n - ℓ(C))/2⌋}` for `ℓ(C) ≤ n ≤ n_max` on a unit-length
/// `(q + 1)`-regular graph.
pub fn douma_compare(counter: &Counter, spec: &ConjClassSpec, n_max: usize) -> Result<DoumaTable> {
    let pres = counter.presentation();
    let graph = pres.graph();
    if !graph.is_unit_length() {
        return Err(Error::InvalidInput("regular-graph comparison needs all edge lengths equal to 1".into()));
    }
    let q = graph
        .regular_degree()
        .ok_or_else(|| Error::InvalidInput("regular-graph comparison needs a regular graph".into()))?
        - 1;
    let ell = geodesic_length(pres, spec.core())?.round() as usize;
    let ns: Vec<usize> = (ell..=n_max.max(ell)).collect();
    let radii: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let counts = counter.count_class_many(spec, &radii, false)?.counts;
    let rows = ns
        .iter()
        .zip(counts)
        .map(|(&n, count)| DoumaRow {
            n,
            count,
            ratio: count as f64 / (q as f64).powi(((n - ell) / 2) as i32),
        })
        .collect();
    Ok(DoumaTable {
        q,
        class_length: ell,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub h: f64,
    pub beta_prime: f64,
    pub c0: f64,
    pub lead: f64,
    /// Class constant; absent on full-count reports.
    pub class_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub fixture: String,
    pub depth: usize,
    pub margin: usize,
    pub seed: u64,
    pub pruning: Pruning,
    pub arithmeticity: Arithmeticity,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub kind: String,
    pub word: Option<String>,
    pub t: Vec<f64>,
    pub counts: Vec<u64>,
    pub predicted: Vec<f64>,
    pub ratio: Vec<f64>,
    pub fitted_slope: Option<SlopeFit>,
    pub constants: Constants,
    pub provenance: Provenance,
}

impl Counter {
    fn constants(&self, class_constant: Option<f64>) -> Constants {
        let bp = beta_prime(&self.transfer, &self.perron);
        let g = guillope_constant(&self.perron, bp);
        Constants {
            h: self.entropy.h,
            beta_prime: bp,
            c0: g.c0,
            lead: g.lead,
            class_constant,
        }
    }

    fn provenance(&self, fixture: &str, nodes: u64) -> Provenance {
        Provenance {
            fixture: fixture.to_string(),
            depth: self.coding.depth(),
            margin: self.coding.margin(),
            seed: self.coding.seed(),
            pruning: self.pruning,
            arithmeticity: self.arithmeticity.clone(),
            nodes,
        }
    }

    pub fn class_constant(&self, spec: &ConjClassSpec) -> ClassConstant {
        let bp = beta_prime(&self.transfer, &self.perron);
        class_constant(&self.transfer, &self.perron, bp, spec, self.presentation())
    }

    /// Full counts over `radii` against `(c₀/h) e^{hT}`.
    pub fn full_report(&self, fixture: &str, radii: &[f64]) -> Result<CountReport> {
        let counts = self.count_all_many(radii)?;
        let constants = self.constants(None);
        let predicted: Vec<f64> = radii.iter().map(|t| constants.lead * (constants.h * t).exp()).collect();
        Ok(build_report("full", None, radii, counts.counts, predicted, constants, self.provenance(fixture, counts.nodes)))
    }

    /// Class counts over `radii` against `C e^{hT/2}`.
    pub fn class_report(&self, fixture: &str, word: &Word, radii: &[f64]) -> Result<CountReport> {
        let spec = ConjClassSpec::new(word)?;
        let counts = self.count_class_many(&spec, radii, false)?;
        let cc = self.class_constant(&spec);
        let constants = self.constants(Some(cc.c));
        let predicted: Vec<f64> = radii.iter().map(|t| cc.c * (0.5 * constants.h * t).exp()).collect();
        Ok(build_report(
            "class",
            Some(word.to_string()),
            radii,
            counts.counts,
            predicted,
            constants,
            self.provenance(fixture, counts.nodes),
        ))
    }
}

fn build_report(
    kind: &str,
    word: Option<String>,
    radii: &[f64],
    counts: Vec<u64>,
    predicted: Vec<f64>,
    constants: Constants,
    provenance: Provenance,
) -> CountReport {
    let ratio = counts.iter().zip(&predicted).map(|(&c, &p)| c as f64 / p).collect();
    let samples: Vec<(f64, f64)> = radii.iter().zip(&counts).map(|(&t, &c)| (t, c as f64)).collect();
    CountReport {
        kind: kind.to_string(),
        word,
        t: radii.to_vec(),
        counts,
        predicted,
        ratio,
        fitted_slope: slope_fit(&samples).ok(),
        constants,
        provenance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub t: Vec<f64>,
    /// `|count/predicted - 1|`.
    pub residual: Vec<f64>,
    /// Slope of `log residual` against `log T`.
    pub power_exponent: Option<f64>,
    /// Slope of `log residual` against `T`.
    pub exponential_rate: Option<f64>,
}

/// Decay shape of the relative residuals of a report. Descriptive only.
pub fn residual_report(report: &CountReport) -> ResidualReport {
    let residual: Vec<f64> = report.ratio.iter().map(|r| (r - 1.0).abs()).collect();
    let pts: Vec<(f64, f64)> = report
        .t
        .iter()
        .zip(&residual)
        .zip(&report.counts)
        .filter(|((t, r), c)| **t > 0.0 && **r > 0.0 && **c > 0)
        .map(|((t, r), _)| (*t, r.ln()))
        .collect();
    let fit = |xs: Vec<(f64, f64)>| -> Option<f64> {
        if xs.len() < 3 {
            return None;
        }
        let k = xs.len() as f64;
        let mx = xs.iter().map(|p| p.0).sum::<f64>() / k;
        let my = xs.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    };
    ResidualReport {
        t: report.t.clone(),
        power_exponent: fit(pts.iter().map(|&(t, r)| (t.ln(), r)).collect()),
        exponential_rate: fit(pts.clone()),
        residual,
    }
}
