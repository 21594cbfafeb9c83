//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Oracles here are written against first principles and
//! share no code with the library beyond the public API under test.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use dbicm::constellation::{ApskRate, Modulation};
use dbicm::demapper::{demap_no_prior, demap_with_priors};
use dbicm::framing::spectral_efficiency;
use dbicm::harness::{ebn0_to_sigma2, emit_csv, run_sweep, CodeSource, Link, RngPolicy, SimConfig, SweepRecord};
use dbicm::{Constellation, DemapMode, NoiseModel, PriorSet, Scheme};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

// ---------------------------------------------------------------------------
// Demapper oracle

fn label_bit(label: usize, pos: usize, m: usize) -> usize {
    (label >> (m - 1 - pos)) & 1
}

fn prob(llr: f64, bit: usize) -> f64 {
    if bit == 0 {
        1.0 / (1.0 + (-llr).exp())
    } else {
        1.0 / (1.0 + llr.exp())
    }
}

/// ln of the ratio of prior-weighted Gaussian likelihood sums, evaluated
/// term by term in the linear domain.
fn oracle_llr(y: Complex64, c: &Constellation, sigma2: f64, target: usize, priors: &[(usize, f64)]) -> f64 {
    let m = c.bits_per_symbol();
    let (mut num, mut den) = (0.0, 0.0);
    for (label, x) in c.points().iter().enumerate() {
        let d2 = (y.re - x.re).powi(2) + (y.im - x.im).powi(2);
        let mut w = (-d2 / (2.0 * sigma2)).exp();
        for &(pos, l) in priors {
            w *= prob(l, label_bit(label, pos, m));
        }
        if label_bit(label, target, m) == 0 {
            num += w;
        } else {
            den += w;
        }
    }
    num.ln() - den.ln()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        a == b
    } else {
        (a - b).abs() <= tol
    }
}

struct Draw {
    y: Complex64,
    sigma2: f64,
    target: usize,
    priors: Vec<(usize, f64)>,
}

fn draws(c: &Constellation, count: usize, seed: u64) -> Vec<Draw> {
    let m = c.bits_per_symbol();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let sigma2 = 10f64.powf(rng.gen_range(0.05f64.log10()..2f64.log10()));
            let x = c.point(rng.gen_range(0..c.order()));
            let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            let y = x + Complex64::new(re, im) * sigma2.sqrt();
            let target = rng.gen_range(0..m);
            let mut priors = Vec::new();
            for p in (0..m).filter(|&p| p != target) {
                if rng.gen_bool(0.6) {
                    let l = match rng.gen_range(0..10) {
                        0 => f64::INFINITY,
                        1 => f64::NEG_INFINITY,
                        2 => 0.0,
                        _ => rng.gen_range(-12.0..12.0),
                    };
                    priors.push((p, l));
                }
            }
            Draw { y, sigma2, target, priors }
        })
        .collect()
}

fn constellations() -> Vec<(&'static str, Constellation)> {
    vec![
        ("qpsk", Constellation::gray_qam(2).unwrap()),
        ("qam16", Constellation::gray_qam(4).unwrap()),
        ("qam64", Constellation::gray_qam(6).unwrap()),
        ("apsk32", Constellation::apsk32_dvbs2(ApskRate::R2_3).unwrap()),
    ]
}

fn c1_demapper_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for (i, (_, c)) in constellations().iter().enumerate() {
        for d in draws(c, 10_000, 100 + i as u64) {
            let nm = NoiseModel::new(d.sigma2).unwrap();
            let priors = PriorSet::from_entries(d.priors.clone()).unwrap();
            let got = demap_with_priors(d.y, c, nm, d.target, &priors, DemapMode::Exact).unwrap();
            let want = oracle_llr(d.y, c, d.sigma2, d.target, &d.priors);
            if !close(got, want, 1e-10) {
                failures += 1;
            } else if got.is_finite() {
                worst = worst.max((got - want).abs());
            }
        }
    }
    Outcome::new(failures == 0, format!("4 x 10000 draws, {failures} mismatches, max |diff| {worst:.2e} (tol 1e-10)"))
}

fn c2_zero_priors() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for (i, (_, c)) in constellations().iter().enumerate() {
        let m = c.bits_per_symbol();
        for d in draws(c, 10_000, 200 + i as u64) {
            let nm = NoiseModel::new(d.sigma2).unwrap();
            let zeros = PriorSet::from_entries((0..m).filter(|&p| p != d.target).map(|p| (p, 0.0)).collect()).unwrap();
            let with = demap_with_priors(d.y, c, nm, d.target, &zeros, DemapMode::Exact).unwrap();
            let without = demap_no_prior(d.y, c, nm, d.target, DemapMode::Exact).unwrap();
            if !close(with, without, 1e-12) {
                failures += 1;
            } else {
                worst = worst.max((with - without).abs());
            }
        }
    }
    Outcome::new(failures == 0, format!("4 x 10000 draws, {failures} mismatches, max |diff| {worst:.2e} (tol 1e-12)"))
}

// ---------------------------------------------------------------------------
// Degeneracy

fn c3_degeneracy() -> Outcome {
    let mut cfg = SimConfig::new(Scheme::Dbicm, Modulation::Qam16, vec![4.0]);
    cfg.delay = "0,0,0,0".parse().unwrap();
    let link = Link::from_config(&cfg).unwrap();
    let noise = ebn0_to_sigma2(4.0, link.eta).unwrap();
    let policy = RngPolicy::new(cfg.seed);
    let schemes = [Scheme::Dbicm, Scheme::DbicmWindowed, Scheme::DbicmId];
    let mut differing = [0usize; 3];
    let mut bicm_errors = 0;
    for trial in 0..100 {
        let run = |s: Scheme| {
            let mut rng = policy.stream(0, trial);
            link.trial(&mut rng, noise, s, cfg.window, cfg.iters, cfg.bp_iters, cfg.demap).unwrap()
        };
        let bicm = run(Scheme::Bicm);
        bicm_errors += bicm.frame_errors();
        for (d, &s) in differing.iter_mut().zip(&schemes) {
            if run(s).output.info != bicm.output.info {
                *d += 1;
            }
        }
    }
    let detail = schemes
        .iter()
        .zip(&differing)
        .map(|(s, d)| format!("{s}: {d}/100 trials differ"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(
        differing.iter().all(|&d| d == 0),
        format!("{detail} (bicm codeword errors {bicm_errors} of {})", 100 * link.plan.n_codewords()),
    )
}

// ---------------------------------------------------------------------------
// Complexity counters

fn c4_complexity() -> Outcome {
    let (w, i_max, c) = (5u64, 5u64, 100u64);
    // Windowed: W - 1 initial sweeps, one new frame per later window, and
    // W forward plus W backward sweeps per iteration.
    let wd_expected = (w - 1) + (c - w) + 2 * w * i_max * (c - w + 1);
    // ID: every non-fill position of every window frame, once per
    // iteration. Frame 0 has two fill positions in the first window; the
    // last window spans six frames, the last with four fill positions.
    let id_expected = i_max * ((c - w) * w * 6 - 2 + (w * 6 + 2));
    let mut cfg = SimConfig::new(Scheme::DbicmWindowed, Modulation::Qam64, vec![-5.0]);
    cfg.window = 5;
    let link = Link::from_config(&cfg).unwrap();
    let noise = ebn0_to_sigma2(-5.0, link.eta).unwrap();
    let policy = RngPolicy::new(cfg.seed);
    let run = |s: Scheme| {
        let mut rng = policy.stream(0, 0);
        link.trial(&mut rng, noise, s, 5, 5, cfg.bp_iters, cfg.demap).unwrap().output.counters
    };
    let wd = run(Scheme::DbicmWindowed);
    let id = run(Scheme::DbicmId);
    let ratio = id.point_evals as f64 / wd.point_evals as f64;
    let predicted = 30.0 / 11.0;
    let within = (ratio / predicted - 1.0).abs() <= 0.10;
    let frozen = wd.demap_passes == wd_expected && id.demap_passes == id_expected;
    Outcome::new(
        within && frozen,
        format!(
            "passes wd {} (expected {wd_expected}), id {} (expected {id_expected}); \
             point_evals ratio {ratio:.4} vs {predicted:.4} ({:+.1}%)",
            wd.demap_passes,
            id.demap_passes,
            100.0 * (ratio / predicted - 1.0)
        ),
    )
}

// ---------------------------------------------------------------------------
// BER experiment

/// Two-sided 95% Wilson score interval for `k` successes in `n` trials.
fn wilson(k: u64, n: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// BER interval from the binomial interval on codeword errors. Codewords
/// fail independently; bit errors arrive in clusters of tens per failed
/// codeword and are not binomial.
fn ber_interval(r: &SweepRecord) -> (f64, f64) {
    let (lo, hi) = wilson(r.frame_errors, r.frames);
    if r.frame_errors == 0 {
        return (0.0, hi);
    }
    let bits_per_frame_error = r.ber / r.fer;
    (lo * bits_per_frame_error, hi * bits_per_frame_error)
}

/// Eb/N0 at which the BER curve crosses `target`, interpolating log10(BER)
/// linearly between grid points.
fn crossing(records: &[SweepRecord], target: f64) -> Option<f64> {
    records.windows(2).find_map(|p| {
        let (a, b) = (&p[0], &p[1]);
        if a.ber >= target && b.ber <= target && b.ber > 0.0 && a.ber > b.ber {
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            Some(a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db))
        } else {
            None
        }
    })
}

struct Experiment {
    bicm: Vec<SweepRecord>,
    dbicm: Vec<SweepRecord>,
    wd: Vec<SweepRecord>,
    id: Vec<SweepRecord>,
    genie: Vec<SweepRecord>,
}

fn experiment() -> Experiment {
    let grid = vec![4.0, 4.25, 4.5];
    let sweep = |scheme: Scheme| {
        let mut cfg = SimConfig::new(scheme, Modulation::Qam16, grid.clone());
        cfg.workers = workers();
        let start = Instant::now();
        let records = run_sweep(&cfg).unwrap();
        println!("  {scheme:<8} {:>6.1}s", start.elapsed().as_secs_f64());
        for r in &records {
            println!(
                "    {:>5.2} dB  ber {:.3e}  [{:.3e}, {:.3e}]  frames {:>6}  frame errors {:>4}{}",
                r.ebn0_db,
                r.ber,
                ber_interval(r).0,
                ber_interval(r).1,
                r.frames,
                r.frame_errors,
                if r.truncated { "  truncated" } else { "" }
            );
        }
        records
    };
    Experiment {
        bicm: sweep(Scheme::Bicm),
        dbicm: sweep(Scheme::Dbicm),
        wd: sweep(Scheme::DbicmWindowed),
        id: sweep(Scheme::DbicmId),
        genie: sweep(Scheme::Genie),
    }
}

fn c5_ordering(e: &Experiment) -> Outcome {
    let chain = [("genie", &e.genie), ("dbicm-wd", &e.wd), ("dbicm", &e.dbicm), ("bicm", &e.bicm)];
    let mut checked = 0;
    let mut inversions = Vec::new();
    for (i, b) in e.bicm.iter().enumerate() {
        if !(1e-4..=1e-2).contains(&b.ber) {
            continue;
        }
        checked += 1;
        for pair in chain.windows(2) {
            let (lo_name, lo) = (pair[0].0, &pair[0].1[i]);
            let (hi_name, hi) = (pair[1].0, &pair[1].1[i]);
            if lo.ber > hi.ber && ber_interval(lo).0 > ber_interval(hi).1 {
                inversions.push(format!("{lo_name} > {hi_name} at {} dB", lo.ebn0_db));
            }
        }
    }
    let detail = if inversions.is_empty() {
        format!("{checked} points with bicm BER in [1e-4, 1e-2], no significant inversion")
    } else {
        format!("{checked} points checked; significant inversions: {}", inversions.join("; "))
    };
    Outcome::new(checked > 0 && inversions.is_empty(), detail)
}

fn c6_windowed_gain(e: &Experiment) -> Outcome {
    match (crossing(&e.bicm, 1e-3), crossing(&e.wd, 1e-3)) {
        (Some(b), Some(w)) => Outcome::new(
            b - w > 0.1,
            format!("BER 1e-3 at bicm {b:.3} dB, dbicm-wd {w:.3} dB: gain {:.3} dB (need > 0.1)", b - w),
        ),
        (b, w) => Outcome::new(false, format!("BER 1e-3 not bracketed (bicm {b:?}, dbicm-wd {w:?})")),
    }
}

fn c7_wd_vs_id(e: &Experiment) -> Outcome {
    let ratios: Vec<f64> = e.wd.iter().zip(&e.id).map(|(w, i)| w.ber / i.ber).collect();
    let pass = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Outcome::new(pass, format!("BER(wd)/BER(id) per point: {}", shown.join(", ")))
}

// ---------------------------------------------------------------------------
// Framing, reproducibility, LDPC

fn c8_spectral_efficiency() -> Outcome {
    let cases = [(4, 0.5, 1001, 0, 2.0), (4, 0.5, 1001, 1, 2000.0 / 1001.0), (6, 0.5, 1001, 1, 3000.0 / 1001.0)];
    let bad: Vec<String> = cases
        .iter()
        .filter_map(|&(m, r, tn, tmax, want)| {
            let got = spectral_efficiency(m, r, tn, tmax).unwrap();
            (got != want).then(|| format!("m={m} T_max={tmax}: {got} != {want}"))
        })
        .collect();
    Outcome::new(bad.is_empty(), if bad.is_empty() { "2, 1.998001998..., 2.997002997... exact".into() } else { bad.join("; ") })
}

fn c9_reproducibility() -> Outcome {
    let csv = |workers: usize| {
        let mut cfg = SimConfig::new(Scheme::DbicmWindowed, Modulation::Qam16, vec![3.0, 3.5, 4.0]);
        cfg.code = CodeSource::Peg { dv: 3, dc: 6, n: 240 };
        cfg.tn = 21;
        cfg.max_frames = 600;
        cfg.min_error_frames = 30;
        cfg.seed = 7;
        cfg.workers = workers;
        emit_csv(&run_sweep(&cfg).unwrap())
    };
    let runs = [csv(1), csv(1), csv(8), csv(8)];
    let identical = runs.iter().all(|r| r == &runs[0]);
    Outcome::new(identical, format!("workers 1,1,8,8: {} bytes each, identical = {identical}", runs[0].len()))
}

fn c10_ldpc() -> Outcome {
    let code = CodeSource::Peg { dv: 3, dc: 6, n: 1200 }.build().unwrap();
    let checks = code.parity_check().check_lists();
    let sets: Vec<HashSet<usize>> = checks.iter().map(|c| c.iter().copied().collect()).collect();
    let mut four_cycles = 0;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if sets[a].intersection(&sets[b]).count() >= 2 {
                four_cycles += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad_syndromes = 0;
    for _ in 0..1000 {
        let u: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let c = code.encode(&u).unwrap();
        if checks.iter().any(|row| row.iter().fold(0, |acc, &v| acc ^ c[v]) != 0) {
            bad_syndromes += 1;
        }
    }
    Outcome::new(
        four_cycles == 0 && bad_syndromes == 0,
        format!("N={} K={}: {four_cycles} check pairs sharing two variables, {bad_syndromes}/1000 nonzero syndromes", code.n(), code.k()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        results.push((name, o));
    };
    record("C1 demapper oracle", &c1_demapper_oracle);
    record("C2 zero-prior reduction", &c2_zero_priors);
    record("C3 zero-delay degeneracy", &c3_degeneracy);
    record("C4 complexity counters", &c4_complexity);
    println!("BER experiment: 16-QAM, peg:3,6,1200, T=[0,1,0,1], T_n=101, W=3, I=5, BP 50, >=100 error frames");
    let e = experiment();
    record("C5 BER ordering", &|| c5_ordering(&e));
    record("C6 windowed gain", &|| c6_windowed_gain(&e));
    record("C7 windowed vs ID", &|| c7_wd_vs_id(&e));
    record("C8 spectral efficiency", &c8_spectral_efficiency);
    record("C9 reproducibility", &c9_reproducibility);
    record("C10 LDPC sanity", &c10_ldpc);
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
