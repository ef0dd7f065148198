//! End-to-end acceptance run. Every criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::time::Instant;

use conjcount::coding::{find_stabilization_depth, periodic_r_sum, telescope_sum, CodingData, StabilizationOptions};
use conjcount::counting::{douma_compare, decomposition_check, slope_fit, windowed_means, Counter, DEFAULT_BUDGET};
use conjcount::graph::{build_presentation, displacement, geodesic_length, parse_graph, Presentation};
use conjcount::transfer::{beta_prime, build_transfer, linspace, perron, solve_entropy, wielandt_scan, DEFAULT_ENTROPY_TOL};
use conjcount::words::{enumerate_words, ConjClassSpec, Word};

const FIXTURES: [&str; 6] = ["rose_1_1", "rose_1_2", "rose_1_sqrt2", "theta_unit", "theta_1_f1_f2", "barbell_unit"];

fn presentation(name: &str) -> Presentation {
    let path = format!("{}/../../fixtures/{name}.graph", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    build_presentation(&parse_graph(&text).unwrap())
}

fn coding(name: &str) -> CodingData {
    find_stabilization_depth(&presentation(name), &StabilizationOptions::default()).unwrap()
}

fn counter(name: &str) -> Counter {
    Counter::new(coding(name), DEFAULT_BUDGET).unwrap()
}

fn word(s: &str) -> Word {
    Word::parse(s, 2).unwrap()
}

fn words_up_to(rank: usize, n: usize) -> impl Iterator<Item = Word> {
    (0..=n).flat_map(move |m| enumerate_words(rank, m, &[]))
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn telescoping() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for name in FIXTURES {
        let c = coding(name);
        for x in words_up_to(c.rank(), 10) {
            let err = (telescope_sum(&c, &x) - displacement(c.presentation(), &x)).abs();
            worst = worst.max(err);
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, format!("max error {worst:e}"))?;
    ensure(secs <= 30.0, format!("took {secs:.1} s"))?;
    Ok(format!("{checked} words, max error {worst:.1e}, {secs:.1} s"))
}

fn geodesics() -> Outcome {
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for name in FIXTURES {
        let c = coding(name);
        let pres = c.presentation();
        for g in words_up_to(c.rank(), 8).filter(|g| !g.is_identity() && g.is_cyclically_reduced()) {
            let ell = geodesic_length(pres, &g).map_err(|e| e.to_string())?;
            let p = periodic_r_sum(&c, &g).map_err(|e| e.to_string())?;
            worst = worst.max((ell - p).abs());
            for j in 1..g.len() {
                let rot = periodic_r_sum(&c, &g.rotate(j)).map_err(|e| e.to_string())?;
                worst = worst.max((rot - p).abs());
            }
            checked += 1;
        }
    }
    ensure(worst <= 1e-9, format!("max error {worst:e}"))?;
    Ok(format!("{checked} cyclically reduced words with rotations, max error {worst:.1e}"))
}

fn stabilization() -> Outcome {
    let mut parts = Vec::new();
    for (name, want) in [("rose_1_1", 2), ("rose_1_2", 2), ("rose_1_sqrt2", 2), ("theta_unit", 3)] {
        let c = coding(name);
        ensure(c.depth() == want, format!("{name}: N = {}, expected {want}", c.depth()))?;
        ensure(c.margin() == 3, format!("{name}: margin {}", c.margin()))?;
        parts.push(format!("{name} N={}", c.depth()));
    }
    Ok(parts.join(", "))
}

/// Largest real root of `z³ - z² - z - 3` by bisection.
fn cubic_root() -> f64 {
    let f = |z: f64| z * z * z - z * z - z - 3.0;
    let (mut lo, mut hi) = (1.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn entropy() -> Outcome {
    let h = |name: &str| solve_entropy(&build_transfer(&coding(name)), DEFAULT_ENTROPY_TOL).unwrap().h;
    let h11 = h("rose_1_1");
    let ht = h("theta_unit");
    ensure((h11 - 3f64.ln()).abs() <= 1e-9, format!("rose_1_1 h = {h11}"))?;
    ensure((ht - 2f64.ln()).abs() <= 1e-9, format!("theta_unit h = {ht}"))?;
    let c = counter("rose_1_2");
    let h12 = c.h();
    let root = cubic_root().ln();
    ensure((h12 - root).abs() <= 1e-9, format!("rose_1_2 h = {h12}, cubic gives {root}"))?;
    let radii: Vec<f64> = (1..=56).map(|i| 0.25 * i as f64).collect();
    let counts = c.count_all_many(&radii).map_err(|e| e.to_string())?.counts;
    let samples: Vec<(f64, f64)> = radii.iter().zip(&counts).map(|(&t, &n)| (t, n as f64)).collect();
    let fit = slope_fit(&samples).map_err(|e| e.to_string())?;
    let rel = (fit.slope - h12).abs() / h12;
    ensure(rel <= 0.02, format!("rose_1_2 slope {} vs h {h12} ({:.2}%)", fit.slope, 100.0 * rel))?;
    Ok(format!(
        "log 3 err {:.1e}, log 2 err {:.1e}, cubic err {:.1e}, rose_1_2 slope {:.4} vs {:.4} ({:.2}%)",
        (h11 - 3f64.ln()).abs(),
        (ht - 2f64.ln()).abs(),
        (h12 - root).abs(),
        fit.slope,
        h12,
        100.0 * rel
    ))
}

fn derivative() -> Outcome {
    let mut worst = 0.0f64;
    for name in FIXTURES {
        let ts = build_transfer(&coding(name));
        let h = solve_entropy(&ts, DEFAULT_ENTROPY_TOL).unwrap().h;
        for s in linspace(0.5 * h, 2.0 * h, 10) {
            let pd = perron(&ts, s).unwrap();
            let hf = beta_prime(&ts, &pd);
            let eps = 1e-5 * s;
            let fd = (perron(&ts, s + eps).unwrap().beta - perron(&ts, s - eps).unwrap().beta) / (2.0 * eps);
            ensure(hf < 0.0, format!("{name}: β'({s}) = {hf} is not negative"))?;
            let rel = (hf - fd).abs() / fd.abs();
            ensure(rel <= 1e-6, format!("{name}: s = {s}, HF {hf} vs FD {fd}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("60 samples, max relative error {worst:.1e}, all negative"))
}

fn eta_identity() -> Outcome {
    let mut worst = 0.0f64;
    for name in FIXTURES {
        let c = coding(name);
        let ts = build_transfer(&c);
        let h = solve_entropy(&ts, DEFAULT_ENTROPY_TOL).unwrap().h;
        let lengths: Vec<Vec<f64>> = (0..=8)
            .map(|n| enumerate_words(c.rank(), n, &[]).map(|x| displacement(c.presentation(), &x)).collect())
            .collect();
        for s in [0.5 * h, h, 2.0] {
            let eta = ts.eta_terms(s, 8);
            for (n, ls) in lengths.iter().enumerate() {
                let direct: f64 = ls.iter().map(|l| (-s * l).exp()).sum();
                let rel = (eta[n] - direct).abs() / direct;
                ensure(rel <= 1e-9, format!("{name}: n = {n}, s = {s}: {} vs {direct}", eta[n]))?;
                worst = worst.max(rel);
            }
        }
    }
    Ok(format!("n ≤ 8 at three s per fixture, max relative error {worst:.1e}"))
}

fn wielandt() -> Outcome {
    let grid = linspace(0.25, 25.0, 64);
    let mut parts = Vec::new();
    for name in ["rose_1_sqrt2", "theta_1_f1_f2"] {
        let ts = build_transfer(&coding(name));
        let h = solve_entropy(&ts, DEFAULT_ENTROPY_TOL).unwrap().h;
        let rows = wielandt_scan(&ts, h, &grid).map_err(|e| e.to_string())?;
        let worst = rows.iter().max_by(|a, b| a.upper.partial_cmp(&b.upper).unwrap()).unwrap();
        ensure(worst.upper < 1.0, format!("{name}: upper bound {} at t = {}", worst.upper, worst.t))?;
        parts.push(format!("{name} max upper {:.9} at t={:.3}", worst.upper, worst.t));
    }
    let ts = build_transfer(&coding("rose_1_1"));
    let h = solve_entropy(&ts, DEFAULT_ENTROPY_TOL).unwrap().h;
    let row = wielandt_scan(&ts, h, &[2.0 * std::f64::consts::PI]).map_err(|e| e.to_string())?[0];
    ensure(
        row.lower <= 1.0 + 1e-9 && row.upper >= 1.0 - 1e-9 && row.upper - row.lower <= 2e-9 && (row.lower - 1.0).abs() <= 1e-9,
        format!("rose_1_1 at 2π: [{}, {}]", row.lower, row.upper),
    )?;
    parts.push(format!("rose_1_1 at 2π in [{:.12}, {:.12}]", row.lower, row.upper));
    Ok(parts.join("; "))
}

fn class_counts() -> Outcome {
    let c = counter("rose_1_1");
    let spec = ConjClassSpec::new(&word("a")).unwrap();
    let radii: Vec<f64> = (0..=9).map(|m| (2 * m + 1) as f64).collect();
    let counts = c.count_class_many(&spec, &radii, false).map_err(|e| e.to_string())?.counts;
    for (m, n) in counts.iter().enumerate() {
        ensure(*n == 3u64.pow(m as u32), format!("m = {m}: {n}"))?;
    }
    let theta = coding("theta_unit");
    let mut checked = 0;
    for w in ["a b", "a B"] {
        let rows = decomposition_check(&theta, &ConjClassSpec::new(&word(w)).unwrap(), 5).map_err(|e| e.to_string())?;
        let bad: u64 = rows.iter().map(|r| r.violations).sum();
        ensure(bad == 0, format!("class {w}: {bad} violations"))?;
        checked += rows.iter().map(|r| r.checked).sum::<u64>();
    }
    Ok(format!("3^m for m ≤ 9 exact; decomposition checked on {checked} elements, no violations"))
}

fn trend_for(c: &Counter, w: &str) -> Outcome {
    let spec = ConjClassSpec::new(&word(w)).unwrap();
    let h = c.h();
    let cc = c.class_constant(&spec).c;
    // top radius: first half-integer where C e^{hT/2} reaches 10^7
    let top = (2.0 / h * (1e7 / cc).ln() * 2.0).ceil() / 2.0;
    let steps = (top * 100.0).round() as usize;
    let radii: Vec<f64> = (1..=steps).map(|i| i as f64 * 0.01).collect();
    let counts = c.count_class_many(&spec, &radii, false).map_err(|e| e.to_string())?.counts;
    let samples: Vec<(f64, f64)> = radii.iter().zip(&counts).map(|(&t, &n)| (t, n as f64)).collect();
    let fit = slope_fit(&samples).map_err(|e| e.to_string())?;
    let rel = (fit.slope - 0.5 * h).abs() / (0.5 * h);
    let ratios: Vec<f64> = radii.iter().zip(&counts).map(|(&t, &n)| n as f64 / (cc * (0.5 * h * t).exp())).collect();
    let top_ratio = *ratios.last().unwrap();
    let means = windowed_means(&ratios[ratios.len() / 2..], 6);
    let dev: Vec<f64> = means[3..].iter().map(|m| (m - 1.0).abs()).collect();
    let summary = format!(
        "class {w}: T={top}, N_C={}, slope {:.4} vs h/2 {:.4} ({:.2}%), ratio {top_ratio:.4}, last window |mean-1| {:.4} {:.4} {:.4}",
        counts.last().unwrap(),
        fit.slope,
        0.5 * h,
        100.0 * rel,
        dev[0],
        dev[1],
        dev[2]
    );
    ensure(rel <= 0.05, format!("slope off; {summary}"))?;
    ensure((0.8..=1.25).contains(&top_ratio), format!("top ratio out of range; {summary}"))?;
    ensure(dev[0] >= dev[1] && dev[1] >= dev[2], format!("window means not monotone toward 1; {summary}"))?;
    Ok(summary)
}

fn trend() -> Outcome {
    let start = Instant::now();
    let c = counter("rose_1_sqrt2");
    let a = trend_for(&c, "a");
    let ab = trend_for(&c, "a b");
    let secs = start.elapsed().as_secs_f64();
    let (a, ab) = match (a, ab) {
        (Ok(a), Ok(ab)) => (a, ab),
        (a, ab) => return Err(format!("{}; {}", a.unwrap_or_else(|e| e), ab.unwrap_or_else(|e| e))),
    };
    ensure(secs <= 300.0, format!("took {secs:.0} s"))?;
    Ok(format!("{a}; {ab}; {secs:.1} s"))
}

fn douma() -> Outcome {
    let c = counter("theta_unit");
    let spec = ConjClassSpec::new(&word("a B")).unwrap();
    let table = douma_compare(&c, &spec, 20).map_err(|e| e.to_string())?;
    ensure(table.q == 2 && table.class_length == 2, format!("q = {}, ℓ = {}", table.q, table.class_length))?;
    let even = table.parity_drift(0, 4);
    let odd = table.parity_drift(1, 4);
    ensure(even <= 0.01 && odd <= 0.01, format!("parity drift even {even:.4}, odd {odd:.4}"))?;
    let rose = counter("rose_1_1");
    let rt = douma_compare(&rose, &ConjClassSpec::new(&word("a")).unwrap(), 20).map_err(|e| e.to_string())?;
    ensure(rt.rows.iter().all(|r| r.ratio == 1.0), "rose_1_1 ratio is not exactly 1")?;
    let last = table.rows.last().unwrap();
    Ok(format!(
        "theta_unit drift even {even:.2e}, odd {odd:.2e}, ratio at n={} is {:.6}; rose_1_1 ratio 1 for n ≤ 20",
        last.n, last.ratio
    ))
}

fn guillope() -> Outcome {
    let c = counter("rose_1_sqrt2");
    let bp = beta_prime(c.transfer(), c.perron());
    let lead = conjcount::counting::guillope_constant(c.perron(), bp).lead;
    let h = c.h();
    let top = ((1e7 / lead).ln() / h * 2.0).ceil() / 2.0;
    let n = c.count_all(top).map_err(|e| e.to_string())?;
    let ratio = n as f64 / (lead * (h * top).exp());
    ensure((0.8..=1.25).contains(&ratio), format!("ratio {ratio} at T = {top}"))?;
    Ok(format!("T={top}, N={n}, ratio {ratio:.4}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("telescoping", telescoping),
        ("geodesic lengths", geodesics),
        ("stabilization depth", stabilization),
        ("entropy closed forms", entropy),
        ("derivative of beta", derivative),
        ("eta identity", eta_identity),
        ("non-lattice spectral gap", wielandt),
        ("exact class counts", class_counts),
        ("class count trend", trend),
        ("regular-graph comparison", douma),
        ("full count constant", guillope),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
