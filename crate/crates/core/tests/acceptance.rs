//! Acceptance run: one PASS/FAIL line per criterion, at the pinned tolerances.
//!
//! Set `DISTRANK_ACCEPTANCE_FULL=1` to add the m = n = 1000 rows of the
//! bivariate comparisons. The process exits non-zero when the set of failing
//! criteria differs from `KNOWN_FAILURES`, whose entries are explained in the
//! project notes.

use std::time::Instant;

use distrank::asymptotics::{contiguity_check, relative_efficiency, tail_mass, ScoreAltPair};
use distrank::classical::{hotelling_test, MahalanobisDepth};
use distrank::data::PooledSample;
use distrank::distances::{maximal_invariant, DistanceKernel, InvariantGroup};
use distrank::harness::{
    efficiency_table, run_experiment, slope_table, table2, table3, table4, table5, wilcoxon_power_table, Design,
    Experiment, ExperimentConfig, ResultTable, SizePair, TestSpec,
};
use distrank::rank_tests::{
    null_distribution_with, randomized_critical_value, randomized_lower_critical_value, NullDistribution, NullMethod,
    NullOptions, RankTestConfig, RankTestProcedure, Scheme,
};
use distrank::rng::RngSeed;
use distrank::sampling::LehmannKind;
use distrank::scores::{score_vector, ScoreFunction, ScoreMode, ScoreVector};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Criteria that cannot pass against the reference values.
const KNOWN_FAILURES: &[usize] = &[1];

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, k: usize, pass: bool, detail: String) {
        println!("{} criterion {k:>2}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((k, pass, detail));
    }
}

fn full() -> bool {
    std::env::var("DISTRANK_ACCEPTANCE_FULL").is_ok_and(|v| v == "1")
}

fn c1(r: &mut Report) {
    let start = Instant::now();
    let reference = [
        [1.000, 0.912, 0.750, 0.955, 0.750],
        [0.912, 1.000, 0.882, 0.992, 0.584],
        [0.750, 0.822, 1.000, 0.816, 0.480],
    ];
    let t = efficiency_table().expect("efficiency table");
    let mut bad = Vec::new();
    for (i, kind) in LehmannKind::ALL.iter().enumerate() {
        for (j, f) in ScoreFunction::ALL.iter().enumerate() {
            let v = t.value(&[kind.label(), f.label()]).expect("cell");
            if (v - reference[i][j]).abs() > 0.0015 {
                bad.push(format!("{}x{} {v:.5} vs {}", kind.label(), f.label(), reference[i][j]));
            }
        }
    }
    let w = |f| ScoreAltPair::new(f, LehmannKind::WilcoxonType);
    let psi = relative_efficiency(w(ScoreFunction::Psi), w(ScoreFunction::Wilcoxon), 0.5).unwrap();
    let sav = relative_efficiency(w(ScoreFunction::Savage), w(ScoreFunction::Wilcoxon), 0.5).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    let anchors = (psi - 9.0 / pi2).abs() <= 1e-10 && (sav - 0.75).abs() <= 1e-10;
    let secs = start.elapsed().as_secs_f64();
    let pass = bad.is_empty() && anchors && secs < 1.0;
    r.record(
        1,
        pass,
        format!(
            "{} of 15 cells within 0.0015{}; anchors 9/pi^2 err {:.1e}, 3/4 err {:.1e}; {secs:.3}s",
            15 - bad.len(),
            if bad.is_empty() { String::new() } else { format!(" (off: {})", bad.join(", ")) },
            (psi - 9.0 / pi2).abs(),
            (sav - 0.75).abs()
        ),
    );
}

fn table2_grid() -> Vec<f64> {
    let mut d: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    d.extend([2.0, 3.0]);
    d
}

fn c2(r: &mut Report) {
    let start = Instant::now();
    let reference = [0.050, 0.053, 0.056, 0.060, 0.063, 0.067, 0.071, 0.075, 0.079, 0.083, 0.088, 0.143, 0.218];
    let t = wilcoxon_power_table(&table2_grid(), 0.05).unwrap();
    let mut bad = Vec::new();
    for (d, p) in table2_grid().iter().zip(reference) {
        let v = t.value(&[&format!("{d:.1}"), "As.W"]).unwrap();
        if format!("{v:.3}") != format!("{p:.3}") {
            bad.push(format!("{d}: {v:.5} vs {p}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.record(
        2,
        bad.is_empty() && secs < 1.0,
        format!("{} of 13 As.W values equal at 3 decimals {bad:?}; {secs:.3}s", 13 - bad.len()),
    );
}

// Reference observed powers at m = n = 30 and 100.
const OBS_W: [[f64; 2]; 13] = [
    [0.050, 0.050],
    [0.052, 0.053],
    [0.056, 0.056],
    [0.059, 0.059],
    [0.063, 0.064],
    [0.067, 0.066],
    [0.069, 0.069],
    [0.076, 0.074],
    [0.077, 0.079],
    [0.081, 0.083],
    [0.085, 0.088],
    [0.141, 0.142],
    [0.214, 0.217],
];
const OBS_KS: [[f64; 2]; 13] = [
    [0.036, 0.039],
    [0.038, 0.040],
    [0.040, 0.043],
    [0.042, 0.046],
    [0.044, 0.050],
    [0.047, 0.052],
    [0.049, 0.055],
    [0.053, 0.057],
    [0.054, 0.061],
    [0.057, 0.063],
    [0.060, 0.067],
    [0.100, 0.107],
    [0.155, 0.165],
];

fn compare(t: &ResultTable, rows: &[String], sizes: &[usize], test: &str, reference: &dyn Fn(usize, usize) -> f64, tol: f64) -> (usize, usize, f64, Vec<String>) {
    let (mut ok, mut total, mut worst) = (0, 0, 0.0f64);
    let mut bad = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, &k) in sizes.iter().enumerate() {
            let ks = k.to_string();
            total += 1;
            match t.value(&[row, &ks, &ks, test]) {
                Some(v) => {
                    let d = (v - reference(i, j)).abs();
                    worst = worst.max(d);
                    if d <= tol {
                        ok += 1;
                    } else {
                        bad.push(format!("{row} m={k}: {v:.4} vs {}", reference(i, j)));
                    }
                }
                None => bad.push(format!("{row} m={k}: failed")),
            }
        }
    }
    (ok, total, worst, bad)
}

fn c3_c4(r: &mut Report) {
    let start = Instant::now();
    let config = table2().with_sizes(&[30, 100]).with_replications(100_000);
    let t = run_experiment(&config).expect("table 2 run");
    let secs = start.elapsed().as_secs_f64();
    let rows: Vec<String> = table2_grid().iter().map(|d| format!("{d:.1}")).collect();
    let sizes = [30, 100];
    let (ok, total, worst, bad) = compare(&t, &rows, &sizes, "W", &|i, j| OBS_W[i][j], 0.004);
    r.record(3, bad.is_empty(), format!("Obs.W {ok}/{total} cells within 0.004, worst {worst:.4} {bad:?}; {secs:.0}s for both tests"));
    let (ok, total, worst, bad) = compare(&t, &rows, &sizes, "KS", &|i, j| OBS_KS[i][j], 0.005);
    r.record(4, bad.is_empty(), format!("Obs.KS {ok}/{total} cells within 0.005, worst {worst:.4} {bad:?}"));
}

fn c5(r: &mut Report) {
    let reference = [
        (0.001, 0.001, 0.002, 2.07),
        (0.01, 0.009, 0.015, 1.68),
        (0.025, 0.022, 0.034, 1.50),
        (0.05, 0.044, 0.059, 1.35),
        (0.1, 0.086, 0.101, 1.18),
    ];
    let Design::Slopes { alphas, convention } = table3().design else {
        unreachable!()
    };
    let t = slope_table(&alphas, convention).unwrap();
    let mut bad = Vec::new();
    let mut worst_ratio = 0.0f64;
    for (a, ks, w, ratio) in reference {
        let key = a.to_string();
        let get = |q: &str| t.value(&[&key, q]).unwrap();
        if (get("ks") - ks).abs() > 0.001 {
            bad.push(format!("ks at {a}: {:.5} vs {ks}", get("ks")));
        }
        if (get("wilcoxon") - w).abs() > 0.001 {
            bad.push(format!("wilcoxon at {a}: {:.5} vs {w}", get("wilcoxon")));
        }
        // reference ratios carry two significant decimals
        if format!("{:.2}", get("ratio")) != format!("{ratio:.2}") {
            bad.push(format!("ratio at {a}: {:.4} vs {ratio}", get("ratio")));
        }
        worst_ratio = worst_ratio.max((get("ratio") - ratio).abs());
    }
    r.record(
        5,
        bad.is_empty(),
        format!("slopes within 0.001 and ratios equal at 2 decimals (largest ratio gap {worst_ratio:.4}) {bad:?}"),
    );
}

const T4_H: [[f64; 2]; 13] = [
    [0.0471, 0.0481],
    [0.0771, 0.4115],
    [0.2318, 0.9962],
    [0.0659, 0.0561],
    [0.0653, 0.0456],
    [0.0521, 0.0521],
    [0.0531, 0.0530],
    [0.0552, 0.0518],
    [0.0572, 0.0546],
    [0.0553, 0.1266],
    [0.0601, 0.1167],
    [0.0742, 0.3656],
    [0.0710, 0.3402],
];
const T4_W: [[f64; 2]; 13] = [
    [0.0457, 0.0505],
    [0.0520, 0.1715],
    [0.1085, 0.5701],
    [0.7994, 0.9998],
    [0.4851, 0.9932],
    [0.1182, 0.7034],
    [0.0656, 0.2881],
    [0.0999, 0.5395],
    [0.1029, 0.6568],
    [0.0491, 0.0932],
    [0.0667, 0.3182],
    [0.0548, 0.2246],
    [0.0668, 0.3551],
];
const T4_1000: [[f64; 2]; 13] = [
    [0.0493, 0.0487],
    [1.0, 0.6458],
    [1.0, 0.8617],
    [0.0452, 1.0],
    [0.0530, 1.0],
    [0.0463, 0.9968],
    [0.0514, 0.8525],
    [0.0508, 0.9670],
    [0.0521, 0.9936],
    [0.7897, 0.4232],
    [0.7183, 0.7690],
    [1.0, 0.6907],
    [0.9994, 0.7597],
];

fn row_labels(c: &ExperimentConfig) -> Vec<String> {
    match &c.design {
        Design::Scenarios { rows } => rows.iter().map(|r| r.label.clone()).collect(),
        _ => unreachable!(),
    }
}

fn c6(r: &mut Report) {
    let start = Instant::now();
    let config = table4().with_sizes(&[10, 100]).with_replications(10_000);
    let rows = row_labels(&config);
    let t = run_experiment(&config).expect("table 4 run");
    let (ok_h, n_h, worst_h, mut bad) = compare(&t, &rows, &[10, 100], "H", &|i, j| T4_H[i][j], 0.025);
    let (ok_w, n_w, worst_w, bad_w) = compare(&t, &rows, &[10, 100], "W", &|i, j| T4_W[i][j], 0.025);
    bad.extend(bad_w);
    let mut extra = String::new();
    if full() {
        let c = table4().with_sizes(&[1000]).with_replications(10_000);
        let t = run_experiment(&c).expect("table 4 large run");
        let (a, na, wa, ba) = compare(&t, &rows, &[1000], "H", &|i, _| T4_1000[i][0], 0.025);
        let (b, nb, wb, bb) = compare(&t, &rows, &[1000], "W", &|i, _| T4_1000[i][1], 0.025);
        extra = format!("; m=n=1000: {}/{} within 0.025, worst {:.4}", a + b, na + nb, wa.max(wb));
        bad.extend(ba);
        bad.extend(bb);
    }
    r.record(
        6,
        bad.is_empty(),
        format!(
            "{}/{} cells at m=n in {{10,100}} within 0.025 (worst H {worst_h:.4}, W {worst_w:.4}){extra} {bad:?}; {:.0}s",
            ok_h + ok_w,
            n_h + n_w,
            start.elapsed().as_secs_f64()
        ),
    );
}

const T5_H: [[f64; 4]; 13] = [
    [0.0191, 0.0156, 0.0171, 0.0217],
    [0.0227, 0.0232, 0.0227, 0.0174],
    [0.0408, 0.0404, 0.0414, 0.0361],
    [0.1038, 0.1193, 0.1260, 0.1226],
    [0.7387, 0.7535, 0.7683, 0.7772],
    [0.0200, 0.0171, 0.0193, 0.0103],
    [0.0207, 0.0168, 0.0182, 0.0172],
    [0.0189, 0.0201, 0.0196, 0.0240],
    [0.0741, 0.0814, 0.0865, 0.0943],
    [0.2356, 0.2546, 0.2690, 0.2716],
    [0.0248, 0.0186, 0.0217, 0.0158],
    [0.0575, 0.0616, 0.0623, 0.0676],
    [0.1796, 0.1936, 0.2045, 0.2164],
];
const T5_W: [[f64; 4]; 13] = [
    [0.0450, 0.0478, 0.0510, 0.0442],
    [0.0468, 0.0536, 0.0874, 0.3925],
    [0.0664, 0.1115, 0.2937, 0.7470],
    [0.1219, 0.2710, 0.6235, 0.8893],
    [0.7574, 0.9441, 0.9782, 0.9944],
    [0.0664, 0.1207, 0.3419, 0.8428],
    [0.1082, 0.2439, 0.6123, 0.9135],
    [0.0710, 0.1297, 0.3495, 0.8249],
    [0.1088, 0.2188, 0.4925, 0.8462],
    [0.2092, 0.4139, 0.7395, 0.9259],
    [0.1134, 0.2401, 0.5990, 0.9151],
    [0.1330, 0.2797, 0.5619, 0.8272],
    [0.1771, 0.3513, 0.6531, 0.8981],
];

fn c7(r: &mut Report) {
    let start = Instant::now();
    let mut sizes = vec![10, 25, 100];
    if full() {
        sizes.push(1000);
    }
    let config = table5().with_sizes(&sizes).with_replications(10_000);
    let rows = row_labels(&config);
    let t = run_experiment(&config).expect("table 5 run");
    let (ok_h, n_h, worst_h, mut bad) = compare(&t, &rows, &sizes, "H", &|i, j| T5_H[i][j], 0.03);
    let (ok_w, n_w, worst_w, bad_w) = compare(&t, &rows, &sizes, "W", &|i, j| T5_W[i][j], 0.03);
    bad.extend(bad_w);
    // Hotelling at zero shift with a scale change
    let mut worst_null_h = 0.0f64;
    for row in rows.iter().filter(|l| l.starts_with("m=(0,0)") && !l.ends_with("sigma=1")) {
        for k in &sizes {
            let ks = k.to_string();
            let v = t.value(&[row, &ks, &ks, "H"]).unwrap_or(1.0);
            worst_null_h = worst_null_h.max(v);
        }
    }
    let claim = worst_null_h <= 0.03;
    r.record(
        7,
        bad.is_empty() && claim,
        format!(
            "{}/{} cells within 0.03 (worst H {worst_h:.4}, W {worst_w:.4}); Hotelling at m=0, sigma!=1 at most {worst_null_h:.4} {bad:?}; {:.0}s",
            ok_h + ok_w,
            n_h + n_w,
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Brute-force law of `scale · Σ a(R_k)` over all n-subsets of ranks, atoms merged within `tol`.
fn brute_force(m: usize, n: usize, scores: &ScoreVector) -> Vec<(f64, f64)> {
    let total = m + n;
    let a = scores.values();
    let mut values = Vec::new();
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize == n {
            let s: f64 = (0..total).filter(|k| mask >> k & 1 == 1).map(|k| a[k]).sum();
            values.push(scores.scale() * s);
        }
    }
    values.sort_by(f64::total_cmp);
    let tol = 1e-9 * (1.0 + values.iter().fold(0.0f64, |s, v| s.max(v.abs())));
    let count = values.len() as f64;
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for v in values {
        match atoms.last_mut() {
            Some(last) if v - last.0 <= tol => last.1 += 1.0,
            _ => atoms.push((v, 1.0)),
        }
    }
    atoms.into_iter().map(|(v, c)| (v, c / count)).collect()
}

fn c8(r: &mut Report) {
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut size_worst = 0.0f64;
    for total in 2..=12usize {
        for m in 1..total {
            let n = total - m;
            let mut vectors = vec![("wilcoxon-raw".to_string(), ScoreVector::raw_ranks(total))];
            for f in ScoreFunction::ALL {
                for mode in [ScoreMode::Exact, ScoreMode::Approximate] {
                    vectors.push((format!("{}-{mode:?}", f.label()), score_vector(f, total, mode).unwrap()));
                }
            }
            for (name, scores) in &vectors {
                let oracle = brute_force(m, n, scores);
                let mut methods = vec![NullMethod::Auto, NullMethod::Enumerate];
                if scores.affine_in_rank().is_some() {
                    methods.push(NullMethod::Recursion);
                }
                for method in methods {
                    let options = NullOptions {
                        method,
                        ..NullOptions::default()
                    };
                    let d = null_distribution_with(m, n, scores, &options, RngSeed::new(8, 0)).unwrap();
                    checked += 1;
                    let same = d.support().len() == oracle.len()
                        && d.support().iter().zip(d.probabilities()).zip(&oracle).all(|((s, p), (os, op))| {
                            let e = (s - os).abs().max((p - op).abs());
                            worst = worst.max(e);
                            e <= 1e-12
                        });
                    if !same {
                        bad.push(format!("{name} m={m} n={n} {method:?}"));
                    }
                    size_worst = size_worst.max(size_error(&d));
                }
            }
        }
    }
    let pass = bad.is_empty() && size_worst <= 1e-12;
    r.record(
        8,
        pass,
        format!(
            "{checked} null laws equal to enumeration (max error {worst:.1e}); randomized size identity error {size_worst:.1e} {:?}",
            &bad[..bad.len().min(5)]
        ),
    );
}

fn size_error(d: &NullDistribution) -> f64 {
    [0.01, 0.05, 0.1, 0.25, 0.5]
        .iter()
        .map(|&a| {
            let up = randomized_critical_value(d, a).unwrap().size(d);
            let lo = randomized_lower_critical_value(d, a).unwrap().size(d);
            (up - a).abs().max((lo - a).abs())
        })
        .fold(0.0, f64::max)
}

fn sample_with(f: usize, m: usize, n: usize, seed: RngSeed) -> PooledSample {
    let mut rng = seed.rng();
    let z = DMatrix::from_fn(m + n, 2, |_, _| {
        let u: f64 = rng.random();
        match f {
            0 => u,
            1 => -(1.0 - u).ln(),
            _ => (std::f64::consts::PI * (u - 0.5)).tan(),
        }
    });
    PooledSample::from_matrix(z, m).unwrap()
}

fn c9(r: &mut Report) {
    let (m, n, reps, alpha) = (15, 15, 10_000u64, 0.05);
    let se = (alpha * (1.0 - alpha) / reps as f64).sqrt();
    let families = ["uniform", "exponential", "cauchy"];
    let mut lines = Vec::new();
    let mut pass = true;
    for scheme in [Scheme::Simple, Scheme::Randomized, Scheme::Conditional] {
        let config = RankTestConfig {
            mixture_p_value: false,
            ..RankTestConfig::default()
        };
        let proc = RankTestProcedure::new(scheme, config, m, n, 2, RngSeed::new(90, 0)).unwrap();
        let mut rates = Vec::new();
        for f in 0..3 {
            let mut hits = 0u64;
            for rep in 0..reps {
                let p = sample_with(f, m, n, RngSeed::new(900 + f as u64, rep));
                let seed = RngSeed::new(1900 + f as u64, rep);
                let res = proc.run(&p, seed).unwrap();
                let u: f64 = seed.derive(9).rng().random();
                hits += u64::from(res.realize(u));
            }
            rates.push(hits as f64 / reps as f64);
        }
        for (i, &a) in rates.iter().enumerate() {
            pass &= (a - alpha).abs() <= 3.0 * se;
            for &b in &rates[i + 1..] {
                pass &= (a - b).abs() <= 3.0 * se * 2f64.sqrt();
            }
        }
        lines.push(format!(
            "{}: {}",
            scheme.label(),
            families.iter().zip(&rates).map(|(f, v)| format!("{f} {v:.4}")).collect::<Vec<_>>().join(", ")
        ));
    }
    r.record(9, pass, format!("null rejection rates (SE {se:.4}): {}", lines.join("; ")));
}

fn random_affine(rng: &mut impl Rng) -> (DVector<f64>, DMatrix<f64>) {
    let a = DVector::from_fn(2, |_, _| 5.0 * rng.sample::<f64, _>(StandardNormal));
    let b = DMatrix::from_fn(2, 2, |i, j| rng.sample::<f64, _>(StandardNormal) + if i == j { 2.0 } else { 0.0 });
    (a, b)
}

fn normal_pooled(rng: &mut impl Rng, m: usize, n: usize) -> PooledSample {
    let z = DMatrix::from_fn(m + n, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
    PooledSample::from_matrix(z, m).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn c10(r: &mut Report) {
    let mut rng = RngSeed::new(10, 0).rng();
    let (m, n) = (8, 9);
    let euclid = |scheme| {
        let config = RankTestConfig {
            mixture_p_value: true,
            ..RankTestConfig::default()
        };
        RankTestProcedure::new(scheme, config, m, n, 2, RngSeed::new(10, 1)).unwrap()
    };
    let procs = [euclid(Scheme::Randomized), euclid(Scheme::Conditional)];
    let maha = RankTestProcedure::new(
        Scheme::Randomized,
        RankTestConfig {
            kernel: DistanceKernel::MahalanobisCentered,
            ..RankTestConfig::default()
        },
        m,
        n,
        2,
        RngSeed::new(10, 2),
    )
    .unwrap();
    let (mut shift_equal, mut maha_equal) = (0, 0);
    let (mut hot, mut depth, mut t_aff, mut t_lin, mut idem, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for trial in 0..100u64 {
        let p = normal_pooled(&mut rng, m, n);
        let (a, b) = random_affine(&mut rng);
        let shifted = p.affine(&a, &DMatrix::identity(2, 2));
        let seed = RngSeed::new(11, trial);
        let same = procs.iter().all(|proc| {
            let (s, t) = (proc.run(&p, seed).unwrap(), proc.run(&shifted, seed).unwrap());
            s.statistic == t.statistic && s.mixture_p_value == t.mixture_p_value
        });
        shift_equal += usize::from(same);
        let mapped = p.affine(&a, &b);
        maha_equal += usize::from(maha.run(&p, seed).unwrap().statistic == maha.run(&mapped, seed).unwrap().statistic);

        let h0 = hotelling_test(&p.first(), &p.second(), 0.05).unwrap().t2;
        let h1 = hotelling_test(&mapped.first(), &mapped.second(), 0.05).unwrap().t2;
        hot = hot.max(rel(h0, h1));

        let fit0 = MahalanobisDepth::fit(&p.first()).unwrap();
        let fit1 = MahalanobisDepth::fit(&mapped.first()).unwrap();
        for (y0, y1) in p.second().rows().zip(mapped.second().rows()) {
            depth = depth.max((fit0.depth(&y0) - fit1.depth(&y1)).abs());
        }

        let t0 = maximal_invariant(&p, InvariantGroup::Affine).unwrap();
        let t1 = maximal_invariant(&mapped, InvariantGroup::Affine).unwrap();
        t_aff = t_aff.max(max_abs(&t0, &t1));
        let linear = p.affine(&DVector::zeros(2), &b);
        let l0 = maximal_invariant(&p, InvariantGroup::LinearOnly).unwrap();
        let l1 = maximal_invariant(&linear, InvariantGroup::LinearOnly).unwrap();
        t_lin = t_lin.max(max_abs(&l0, &l1));
        for t in [&t0, &l0] {
            idem = idem.max(max_abs(&(t * t), t));
            sym = sym.max(max_abs(t, &t.transpose()));
        }
    }
    let pass = shift_equal == 100 && maha_equal == 100 && [hot, depth, t_aff, t_lin, idem, sym].iter().all(|&e| e <= 1e-9);
    r.record(
        10,
        pass,
        format!(
            "shift-equal statistics {shift_equal}/100, Mahalanobis under affine maps {maha_equal}/100; errors Hotelling {hot:.1e}, depth {depth:.1e}, T {t_aff:.1e}, T0 {t_lin:.1e}, idempotence {idem:.1e}, symmetry {sym:.1e}"
        ),
    );
}

fn c11(r: &mut Report) {
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    let mut beyond = 0.0f64;
    for kind in LehmannKind::ALL {
        for total in [100usize, 1_000, 10_000] {
            for delta0 in [0.5, 1.0, 2.0, 3.0] {
                let rep = contiguity_check(kind, delta0, total / 2, total / 2).unwrap();
                pass &= rep.pass && rep.sum_h2 <= rep.bound;
                worst_ratio = worst_ratio.max(rep.sum_h2 / rep.bound);
                if kind == LehmannKind::WilcoxonType {
                    for k in 1..=50 {
                        let c = rep.max_ratio + rep.delta_n * k as f64 / 50.0;
                        let q = tail_mass(kind, rep.delta_n, c);
                        beyond = beyond.max(q);
                        pass &= q == 0.0;
                    }
                    pass &= tail_mass(kind, rep.delta_n, 1.0 + 0.5 * rep.delta_n) > 0.0;
                }
            }
        }
    }
    r.record(
        11,
        pass,
        format!("Hellinger sums at most {worst_ratio:.3} of the bound; Wilcoxon-type tail mass beyond 1+Delta_N: {beyond}"),
    );
}

fn c12(r: &mut Report) {
    let tests: Vec<TestSpec> = [ScoreFunction::Wilcoxon, ScoreFunction::Psi, ScoreFunction::Savage]
        .iter()
        .map(|&f| TestSpec::Rank {
            label: f.label().into(),
            scheme: Scheme::Simple,
            config: RankTestConfig {
                score: f,
                mixture_p_value: false,
                ..RankTestConfig::default()
            },
        })
        .collect();
    let mut pass = true;
    let mut lowest = (f64::INFINITY, String::new());
    for (i, kind) in LehmannKind::ALL.into_iter().enumerate() {
        let config = ExperimentConfig {
            experiment: Experiment::Custom,
            tests: tests.clone(),
            design: Design::Lehmann {
                kind,
                delta0: vec![0.5, 1.0, 2.0],
            },
            sizes: vec![SizePair::equal(30)],
            alpha: 0.05,
            replications: 10_000,
            seed: 120 + i as u64,
            workers: None,
        };
        let t = run_experiment(&config).unwrap();
        for row in &t.rows {
            let (Some(v), Some(se)) = (row.estimate, row.std_error) else {
                pass = false;
                continue;
            };
            pass &= v >= 0.05 - 2.0 * se;
            let margin = (v - 0.05) / se.max(1e-12);
            if margin < lowest.0 {
                lowest = (margin, format!("{} {} d0={} power {v:.4}", kind.label(), row.keys[3], row.keys[0]));
            }
        }
    }
    r.record(
        12,
        pass,
        format!("27 cells with power >= alpha - 2 SE; smallest margin {:.1} SE at {}", lowest.0, lowest.1),
    );
}

fn main() {
    // optional criterion numbers on the command line restrict the run
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: &[usize]| only.is_empty() || k.iter().any(|c| only.contains(c));
    let mut r = Report { lines: Vec::new() };
    type Criterion = (&'static [usize], fn(&mut Report));
    let criteria: [Criterion; 11] = [
        (&[1], c1),
        (&[2], c2),
        (&[3, 4], c3_c4),
        (&[5], c5),
        (&[6], c6),
        (&[7], c7),
        (&[8], c8),
        (&[9], c9),
        (&[10], c10),
        (&[11], c11),
        (&[12], c12),
    ];
    for (k, run) in criteria {
        if want(k) {
            run(&mut r);
        }
    }
    let failed: Vec<usize> = r.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    let expected: Vec<usize> = KNOWN_FAILURES.iter().copied().filter(|k| r.lines.iter().any(|l| l.0 == *k)).collect();
    let passed = r.lines.len() - failed.len();
    println!("acceptance: {passed} of {} criteria pass; failing {failed:?}, documented {KNOWN_FAILURES:?}", r.lines.len());
    if failed != expected {
        std::process::exit(1);
    }
}
