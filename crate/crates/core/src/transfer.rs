//! Weighted transfer matrices over suffix states.
//!
//! States are the reduced words of length at most `N - 1`, indexed by
//! length and then lexicographically, so the full-length ("long") states
//! form the final contiguous block. Every nonempty state has a shrink arc
//! to its shift; long states additionally have overlap arcs
//! `x -> σx·z`. With this layout `1ᵀ A_s^n e_∅ = Σ_{|x|=n} e^{-sL(x)}`.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coding::CodingData;
use crate::error::{Error, Result};
use crate::words::{Letter, Word, WordIndexer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    /// Weight exponent `R(x, y)`; the matrix entry is `e^{-sR}`.
    pub exponent: f64,
}

#[derive(Debug, Clone)]
pub struct TransferSystem {
    rank: usize,
    depth: usize,
    indexer: WordIndexer,
    long: Range<usize>,
    shrink: Vec<Arc>,
    overlap: Vec<Arc>,
    /// Arcs grouped by source state, for row-wise application.
    rows: Vec<Vec<Arc>>,
}

pub fn build_transfer(coding: &CodingData) -> TransferSystem {
    let rank = coding.rank();
    let depth = coding.depth();
    let indexer = WordIndexer::new(rank, depth - 1);
    let long = indexer.range(depth - 1);
    let mut shrink = Vec::with_capacity(indexer.len() - 1);
    let mut overlap = Vec::with_capacity(long.len() * (2 * rank - 1));
    for i in 1..indexer.len() {
        let x = indexer.word_at(i);
        let l = x.letters();
        shrink.push(Arc {
            from: i,
            to: indexer.index_of(&l[1..]),
            exponent: coding.r(l),
        });
        if l.len() == depth - 1 {
            let last = *l.last().unwrap();
            for code in 0..2 * rank {
                let z = Letter::from_code(code);
                if z == last.inverse() {
                    continue;
                }
                let mut xz = l.to_vec();
                xz.push(z);
                overlap.push(Arc {
                    from: i,
                    to: indexer.index_of(&xz[1..]),
                    exponent: coding.r(&xz),
                });
            }
        }
    }
    let mut rows = vec![Vec::new(); indexer.len()];
    for a in shrink.iter().chain(overlap.iter()) {
        rows[a.from].push(*a);
    }
    TransferSystem {
        rank,
        depth,
        indexer,
        long,
        shrink,
        overlap,
        rows,
    }
}

impl TransferSystem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn state_count(&self) -> usize {
        self.indexer.len()
    }

    pub fn long_count(&self) -> usize {
        self.long.len()
    }

    /// Index range of the long states `W'_{N-1}`.
    pub fn long_range(&self) -> Range<usize> {
        self.long.clone()
    }

    pub fn state(&self, i: usize) -> Word {
        self.indexer.word_at(i)
    }

    pub fn state_index(&self, w: &Word) -> Option<usize> {
        (w.len() < self.depth).then(|| self.indexer.index_of(w.letters()))
    }

    pub fn shrink_arcs(&self) -> &[Arc] {
        &self.shrink
    }

    pub fn overlap_arcs(&self) -> &[Arc] {
        &self.overlap
    }

    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.shrink.iter().chain(self.overlap.iter())
    }

    /// `y ↦ A_s y` for real `s`.
    pub fn apply(&self, s: f64, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|a| (-s * a.exponent).exp() * y[a.to]).sum())
            .collect()
    }

    /// `1ᵀ A_s^n e_∅` for `n = 0..=n_max`.
    pub fn eta_terms(&self, s: f64, n_max: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.state_count()];
        y[0] = 1.0;
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(1.0);
        for _ in 0..n_max {
            y = self.apply(s, &y);
            out.push(y.iter().sum());
        }
        out
    }

    fn long_local(&self, i: usize) -> usize {
        i - self.long.start
    }
}

/// Full matrix `A_s` over all states.
pub fn weighted_matrix(ts: &TransferSystem, s: Complex64) -> DMatrix<Complex64> {
    let n = ts.state_count();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for a in ts.arcs() {
        m[(a.from, a.to)] = (-s * a.exponent).exp();
    }
    m
}

/// Long-state block `B_s`.
pub fn overlap_matrix(ts: &TransferSystem, s: Complex64) -> DMatrix<Complex64> {
    let d = ts.long_count();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for a in &ts.overlap {
        m[(ts.long_local(a.from), ts.long_local(a.to))] = (-s * a.exponent).exp();
    }
    m
}

/// Perron data of `B_s` at real `s`, extended to all states.
#[derive(Debug, Clone, Serialize)]
pub struct PerronData {
    pub s: f64,
    pub beta: f64,
    /// Left eigenvector on long states, a probability vector.
    pub u_tilde: Vec<f64>,
    /// Right eigenvector on long states with `ũ·ṽ = 1`.
    pub v_tilde: Vec<f64>,
    /// Left eigenvector of `A_s` on all states with `u_∅ = 1`.
    pub u_full: Vec<f64>,
    /// Right eigenvector of `A_s`, zero off the long states, `u·v = 1`.
    pub v_full: Vec<f64>,
    /// Estimate of `|λ₂| / β` from the contraction rate of the iteration.
    pub gap: f64,
    pub left_residual: f64,
    pub right_residual: f64,
    pub iterations: usize,
}

pub const PERRON_MAX_ITER: usize = 100_000;
const PERRON_REL_TOL: f64 = 1e-13;

struct PowerResult {
    value: f64,
    vector: Vec<f64>,
    iterations: usize,
    rate: f64,
}

/// Power iteration for a nonnegative aperiodic matrix given by arcs.
/// Stops once the Collatz–Wielandt bracket `[min y/x, max y/x]` and the
/// successive Rayleigh quotients agree to relative `1e-13`.
fn power_iterate(dim: usize, arcs: &[(usize, usize, f64)]) -> Result<PowerResult> {
    let mut x = vec![1.0 / dim as f64; dim];
    let mut prev_rq = f64::NAN;
    let mut widths: Vec<f64> = Vec::new();
    for it in 1..=PERRON_MAX_ITER {
        let mut y = vec![0.0; dim];
        for &(i, j, w) in arcs {
            y[i] += w * x[j];
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let q = yi / xi;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let rq = y.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|b| b * b).sum::<f64>();
        let total: f64 = y.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Invariant("power iteration lost positivity".into()));
        }
        for v in y.iter_mut() {
            *v /= total;
        }
        let width = (hi - lo) / rq;
        widths.push(width);
        let converged = width <= PERRON_REL_TOL && (rq - prev_rq).abs() <= PERRON_REL_TOL * rq;
        prev_rq = rq;
        x = y;
        if converged || (width == 0.0 && it > 1) {
            return Ok(PowerResult {
                value: rq,
                vector: x,
                iterations: it,
                rate: contraction_rate(&widths),
            });
        }
    }
    Err(Error::Invariant(format!(
        "power iteration did not converge in {PERRON_MAX_ITER} iterations; the transition table is broken"
    )))
}

/// Geometric-mean contraction of the Collatz–Wielandt widths over the
/// window where they lie in `[1e-10, 1e-2]`.
fn contraction_rate(widths: &[f64]) -> f64 {
    let window: Vec<(usize, f64)> = widths
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > 1e-10 && w < 1e-2)
        .collect();
    match (window.first(), window.last()) {
        (Some(&(i0, w0)), Some(&(i1, w1))) if i1 > i0 => (w1 / w0).powf(1.0 / (i1 - i0) as f64),
        _ => 0.0,
    }
}

pub fn perron(ts: &TransferSystem, s: f64) -> Result<PerronData> {
    let d = ts.long_count();
    let base = ts.long.start;
    let weighted: Vec<(usize, usize, f64)> = ts
        .overlap
        .iter()
        .map(|a| (a.from - base, a.to - base, (-s * a.exponent).exp()))
        .collect();
    let transposed: Vec<(usize, usize, f64)> = weighted.iter().map(|&(i, j, w)| (j, i, w)).collect();
    let right = power_iterate(d, &weighted)?;
    let left = power_iterate(d, &transposed)?;
    let beta = right.value;

    let mut u_tilde = left.vector;
    let usum: f64 = u_tilde.iter().sum();
    u_tilde.iter_mut().for_each(|u| *u /= usum);
    let mut v_tilde = right.vector;
    let dot: f64 = u_tilde.iter().zip(&v_tilde).map(|(a, b)| a * b).sum();
    v_tilde.iter_mut().for_each(|v| *v /= dot);

    let residual = |arcs: &[(usize, usize, f64)], vec: &[f64]| -> f64 {
        let mut y = vec![0.0; d];
        for &(i, j, w) in arcs {
            y[i] += w * vec[j];
        }
        y.iter().zip(vec).map(|(a, b)| (a - beta * b).abs()).fold(0.0, f64::max)
    };
    let right_residual = residual(&weighted, &v_tilde);
    let left_residual = residual(&transposed, &u_tilde);

    // Extend u by back-substitution through the shrink arcs, longest first.
    let n = ts.state_count();
    let mut u_full = vec![0.0; n];
    u_full[ts.long.clone()].copy_from_slice(&u_tilde);
    for a in ts.shrink.iter().rev() {
        // shrink arcs are stored by increasing source index, i.e. by
        // increasing length, so reverse order completes every source first
        u_full[a.to] += u_full[a.from] * (-s * a.exponent).exp() / beta;
    }
    let u_empty = u_full[0];
    u_full.iter_mut().for_each(|u| *u /= u_empty);
    let mut v_full = vec![0.0; n];
    for (k, v) in v_tilde.iter().enumerate() {
        v_full[base + k] = v * u_empty;
    }

    Ok(PerronData {
        s,
        beta,
        u_tilde,
        v_tilde,
        u_full,
        v_full,
        gap: right.rate,
        left_residual,
        right_residual,
        iterations: right.iterations.max(left.iterations),
    })
}

/// `β′(s) = -Σ ũ_x R(x,y) e^{-sR(x,y)} ṽ_y` over the overlap arcs.
pub fn beta_prime(ts: &TransferSystem, pd: &PerronData) -> f64 {
    let base = ts.long.start;
    -ts.overlap
        .iter()
        .map(|a| pd.u_tilde[a.from - base] * a.exponent * (-pd.s * a.exponent).exp() * pd.v_tilde[a.to - base])
        .sum::<f64>()
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropySolution {
    pub h: f64,
    pub beta_at_h: f64,
    pub beta_prime: f64,
    pub bisection_steps: usize,
    pub newton_steps: usize,
}

pub const DEFAULT_ENTROPY_TOL: f64 = 1e-12;

/// Solves `β(h) = 1` by bracketing bisection followed by safeguarded Newton.
pub fn solve_entropy(ts: &TransferSystem, tol: f64) -> Result<EntropySolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let beta = |s: f64| perron(ts, s).map(|p| p.beta);
    let mut hi = 1.0;
    while beta(hi)? >= 1.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Invariant("β(s) stays above 1; no entropy bracket".into()));
        }
    }
    let mut lo = 0.0;
    let mut bisection_steps = 0;
    while hi - lo > 1e-3 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if beta(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        bisection_steps += 1;
    }
    let mut s = 0.5 * (lo + hi);
    let mut newton_steps = 0;
    loop {
        let pd = perron(ts, s)?;
        let f = pd.beta - 1.0;
        let df = beta_prime(ts, &pd);
        if f.abs() <= tol {
            return Ok(EntropySolution {
                h: s,
                beta_at_h: pd.beta,
                beta_prime: df,
                bisection_steps,
                newton_steps,
            });
        }
        if f > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let mut next = s - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if newton_steps > 200 || (hi - lo) <= f64::EPSILON * s {
            return Err(Error::Invariant(format!(
                "entropy solve stalled at s = {s} with |β(s) - 1| = {}",
                f.abs()
            )));
        }
        s = next;
        newton_steps += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SpectralBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

const SQUARINGS: usize = 12;
const POWER_RUNS: usize = 8;
const POWER_STEPS: usize = 2000;
const BOUNDS_SEED: u64 = 0x5eed_b0d5;

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Upper bound `min_j ‖M^{2^j}‖^{1/2^j}` by repeated squaring with
/// running rescaling; also returns the trace lower bound
/// `max_j (|tr M^{2^j}| / dim)^{1/2^j}`.
fn squaring_bounds(m: &DMatrix<Complex64>) -> (f64, f64) {
    let dim = m.nrows() as f64;
    let mut cur = m.clone();
    let mut log_scale = 0.0f64;
    let mut upper = f64::INFINITY;
    let mut lower = 0.0f64;
    let mut power = 1.0f64;
    for j in 0..=SQUARINGS {
        let norm = inf_norm(&cur);
        if norm == 0.0 {
            return (0.0, 0.0);
        }
        upper = upper.min(((norm.ln() + log_scale) / power).exp());
        let tr = cur.trace().norm();
        if tr > 0.0 {
            lower = lower.max(((tr.ln() - dim.ln() + log_scale) / power).exp());
        }
        if j == SQUARINGS {
            break;
        }
        cur /= Complex64::new(norm, 0.0);
        log_scale += norm.ln();
        cur = &cur * &cur;
        log_scale *= 2.0;
        power *= 2.0;
    }
    (upper, lower)
}

/// Modulus of the Rayleigh quotient after seeded complex power iteration.
fn power_lower_estimate(m: &DMatrix<Complex64>) -> f64 {
    let dim = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(BOUNDS_SEED);
    let mut best = 0.0f64;
    for _ in 0..POWER_RUNS {
        let mut v = nalgebra::DVector::from_fn(dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        for _ in 0..POWER_STEPS {
            let w = m * &v;
            let n = w.norm();
            if n == 0.0 {
                break;
            }
            v = w / Complex64::new(n, 0.0);
        }
        let rq = v.dotc(&(m * &v)) / v.dotc(&v);
        best = best.max(rq.norm());
    }
    best
}

/// Bounds on `spr(B_s)` for complex `s`.
///
/// The upper bound is a norm of a repeated square, so it holds by
/// sub-multiplicativity; both the plain row-sum norm and the row-sum norm
/// weighted by the Perron vector of `|B_s| = B_{Re s}` are used. The lower
/// bound is the larger of a trace bound and the Rayleigh-quotient estimate
/// from power iteration, capped at the upper bound.
pub fn spectral_radius_bounds(ts: &TransferSystem, s: Complex64) -> Result<SpectralBounds> {
    let b = overlap_matrix(ts, s);
    let (plain_upper, trace_lower) = squaring_bounds(&b);
    let weights = perron(ts, s.re)?.v_tilde;
    let mut scaled = b.clone();
    for ((i, j), z) in scaled.iter_mut().enumerate().map(|(k, z)| ((k % b.nrows(), k / b.nrows()), z)) {
        *z *= weights[j] / weights[i];
    }
    let (weighted_upper, _) = squaring_bounds(&scaled);
    let upper = plain_upper.min(weighted_upper);
    let lower = trace_lower.max(power_lower_estimate(&b)).min(upper);
    Ok(SpectralBounds { lower, upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub flag: bool,
}

/// Threshold below `1` that the certified upper bound must clear.
pub const WIELANDT_MARGIN: f64 = 1e-9;

/// Spectral-radius bounds along `Re s = h`; rows whose upper bound is not
/// below `1 - 1e-9` are flagged.
pub fn wielandt_scan(ts: &TransferSystem, h: f64, grid: &[f64]) -> Result<Vec<ScanRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("scan grid is empty".into()));
    }
    grid.par_iter()
        .map(|&t| {
            let b = spectral_radius_bounds(ts, Complex64::new(h, t))?;
            Ok(ScanRow {
                t,
                lower: b.lower,
                upper: b.upper,
                flag: b.upper >= 1.0 - WIELANDT_MARGIN,
            })
        })
        .collect()
}

/// `n` evenly spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{find_stabilization_depth, StabilizationOptions};
    use crate::graph::{build_presentation, parse_graph};

    fn system(text: &str) -> TransferSystem {
        let pres = build_presentation(&parse_graph(text).unwrap());
        build_transfer(&find_stabilization_depth(&pres, &StabilizationOptions::default()).unwrap())
    }

    const ROSE_1_1: &str = "vertex o\nedge a o o 1\nedge b o o 1\n";
    const ROSE_1_2: &str = "vertex o\nedge a o o 1\nedge b o o 2\n";
    const THETA: &str = "vertex u\nvertex v\nedge e1 u v 1\nedge e2 u v 1\nedge e3 u v 1\n";

    #[test]
    fn state_and_arc_counts() {
        let rose = system(ROSE_1_2);
        assert_eq!((rose.long_count(), rose.state_count()), (4, 5));
        assert_eq!((rose.overlap_arcs().len(), rose.shrink_arcs().len()), (12, 4));
        let theta = system(THETA);
        assert_eq!((theta.long_count(), theta.state_count()), (12, 17));
        assert_eq!(theta.overlap_arcs().len(), 36);
        assert_eq!(theta.shrink_arcs().len(), 16);
        // shrink arcs strictly decrease length, ∅ has no outgoing arcs
        for a in theta.shrink_arcs() {
            assert_eq!(theta.state(a.to).len() + 1, theta.state(a.from).len());
        }
        assert!(theta.arcs().all(|a| a.from != 0));
    }

    #[test]
    fn weighted_matrix_examples() {
        let rose = system(ROSE_1_2);
        let a0 = weighted_matrix(&rose, Complex64::new(0.0, 0.0));
        assert!(a0.iter().all(|z| z.im == 0.0 && (z.re == 0.0 || z.re == 1.0)));
        let s = 0.7;
        let b = overlap_matrix(&rose, Complex64::new(s, 0.0));
        // state `a` is the first long state
        let row: Vec<f64> = b.row(0).iter().map(|z| z.re).filter(|&x| x != 0.0).collect();
        assert_eq!(row.len(), 3);
        assert!(row.iter().all(|&x| (x - (-s).exp()).abs() < 1e-15));

        let unit = system(ROSE_1_1);
        let b1 = overlap_matrix(&unit, Complex64::new(0.3, 0.0));
        let b2 = overlap_matrix(&unit, Complex64::new(0.3, 2.0 * std::f64::consts::PI));
        assert!((b1 - b2).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn perron_rose_closed_form() {
        let rose = system(ROSE_1_1);
        for s in [0.0, 0.5, 1.0, 2.0] {
            let pd = perron(&rose, s).unwrap();
            assert!((pd.beta - 3.0 * (-s).exp()).abs() < 1e-13);
            assert!((beta_prime(&rose, &pd) + 3.0 * (-s).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn perron_normalizations() {
        for text in [ROSE_1_2, THETA] {
            let ts = system(text);
            let pd = perron(&ts, 0.4).unwrap();
            assert!(pd.left_residual <= 1e-12 * pd.beta);
            assert!(pd.right_residual <= 1e-12 * pd.beta);
            assert!((pd.u_tilde.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert_eq!(pd.u_full[0], 1.0);
            assert!(pd.u_full.iter().all(|&u| u > 0.0));
            let uv: f64 = pd.u_full.iter().zip(&pd.v_full).map(|(a, b)| a * b).sum();
            assert!((uv - 1.0).abs() < 1e-12);
            for i in 0..ts.state_count() {
                let long = ts.long_range().contains(&i);
                assert_eq!(pd.v_full[i] > 0.0, long);
                if !long {
                    assert_eq!(pd.v_full[i], 0.0);
                }
            }
            // A_s v = β v, u A_s = β u on every state
            let av = ts.apply(0.4, &pd.v_full);
            for (x, v) in av.iter().zip(&pd.v_full) {
                assert!((x - pd.beta * v).abs() <= 1e-12);
            }
            let a = weighted_matrix(&ts, Complex64::new(0.4, 0.0));
            for j in 0..ts.state_count() {
                let ua: f64 = (0..ts.state_count()).map(|i| pd.u_full[i] * a[(i, j)].re).sum();
                assert!((ua - pd.beta * pd.u_full[j]).abs() <= 1e-12 * pd.u_full[j].max(1.0));
            }
        }
    }

    #[test]
    fn entropy_closed_forms() {
        let h = solve_entropy(&system(ROSE_1_1), DEFAULT_ENTROPY_TOL).unwrap().h;
        assert!((h - 3f64.ln()).abs() < 1e-12);
        let h = solve_entropy(&system(THETA), DEFAULT_ENTROPY_TOL).unwrap().h;
        assert!((h - 2f64.ln()).abs() < 1e-12);
        assert!(solve_entropy(&system(THETA), 0.0).is_err());
    }

    #[test]
    fn bounds_bracket_beta_for_real_s() {
        let ts = system(ROSE_1_2);
        let pd = perron(&ts, 0.5).unwrap();
        let b = spectral_radius_bounds(&ts, Complex64::new(0.5, 0.0)).unwrap();
        assert!(b.lower <= pd.beta * (1.0 + 1e-12) && pd.beta <= b.upper * (1.0 + 1e-12));
        assert!(b.upper / b.lower <= 1.0 + 1e-6, "{b:?} vs {}", pd.beta);
    }

    #[test]
    fn lattice_scan_flags_period() {
        let ts = system(ROSE_1_1);
        let h = 3f64.ln();
        // all weights equal: B_{h+it} = e^{-it} B_h has spectral radius 1 for every t
        let rows = wielandt_scan(&ts, h, &[0.0, 1.0, 2.0 * std::f64::consts::PI]).unwrap();
        assert!(rows.iter().all(|r| r.flag));
        assert!((rows[2].lower - 1.0).abs() < 1e-9 && (rows[2].upper - 1.0).abs() < 1e-9);
        assert!(wielandt_scan(&ts, h, &[]).is_err());

        let irr = system("vertex o\nedge a o o 1\nedge b o o sqrt(2)\n");
        let h = solve_entropy(&irr, DEFAULT_ENTROPY_TOL).unwrap().h;
        let rows = wielandt_scan(&irr, h, &[0.0, 1.0]).unwrap();
        assert!(rows[0].flag);
        assert!(!rows[1].flag);
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.25, 25.0, 64);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 0.25);
        assert!((g[63] - 25.0).abs() < 1e-12);
    }
}
