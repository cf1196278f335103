//! One line per acceptance criterion. Runs without the libtest harness so the
//! verdicts are always printed; exits nonzero if a criterion fails that is
//! not listed in `KNOWN_FAILURES`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use moldkit::allotment::constant_factor_schedule;
use moldkit::compression::compressed_sizes;
use moldkit::driver::{guess_grid, solve, Estimate, SolverConfig};
use moldkit::fptas::{in_regime, FptasEstimator};
use moldkit::harness::{brute_force_opt, generate_instance, GeneratorSpec, ModelKind};
use moldkit::knapsack::{
    bellman_dp_knapsack, build_size_class_array, concave_maxplus_convolve, naive_maxplus_convolve,
    solve_knapsack_by_sizes, KnapsackItem,
};
use moldkit::model::{validate_schedule, Instance, Schedule};
use moldkit::two_shelf::{KnapsackBackend, ThreeHalfEstimator};

const KNAPSACK_BUDGET: Duration = Duration::from_secs(60);
const TINY_EPS: f64 = 0.3;
const TINY_RATIO: f64 = 1.8;
const TINY_FPTAS_RATIO: f64 = 1.3;
const SCALING_BUDGET: Duration = Duration::from_secs(5);
const SCALING_GROWTH: f64 = 2.3;

/// Criteria that cannot hold as stated, with the reason.
const KNOWN_FAILURES: &[(&str, &str)] = &[(
    "compressed-size structure",
    "the gap s+ - s- <= rho*s+ is not satisfiable by floor((1+rho)^i b) for rho < 1/4",
)];

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(name: &'static str, pass: bool, detail: String) -> Verdict {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    Verdict { name, pass, detail }
}

fn kind(rng: &mut ChaCha8Rng) -> ModelKind {
    if rng.gen_bool(0.5) {
        ModelKind::Table
    } else {
        ModelKind::PowerLaw
    }
}

fn knapsack_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let started = Instant::now();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..=12);
        let items: Vec<KnapsackItem> = (0..n)
            .map(|id| KnapsackItem {
                id,
                size: rng.gen_range(1..=8),
                profit: rng.gen_range(1..=100),
            })
            .collect();
        let t = rng.gen_range(0..=30);
        let sol = solve_knapsack_by_sizes(&items, t).unwrap();
        let mut ids = sol.chosen.clone();
        ids.sort_unstable();
        ids.dedup();
        let size: u64 = ids.iter().map(|&i| items[i].size).sum();
        let profit: i64 = ids.iter().map(|&i| items[i].profit).sum();
        let ok = sol.profit == bellman_dp_knapsack(&items, t)
            && ids.len() == sol.chosen.len()
            && size <= t
            && profit == sol.profit;
        if !ok {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    verdict(
        "knapsack oracle equivalence",
        mismatches == 0 && elapsed < KNAPSACK_BUDGET,
        format!(
            "1000 instances, {mismatches} mismatches, {elapsed:.2?} (budget {KNAPSACK_BUDGET:?})"
        ),
    )
}

fn convolution_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    let mut malformed = 0;
    for _ in 0..1000 {
        let t = rng.gen_range(0..=64u64);
        let a: Vec<i64> = (0..=t).map(|_| rng.gen_range(-1000..=1000)).collect();
        let h = rng.gen_range(1..=12u64);
        let mut profits: Vec<i64> = (0..rng.gen_range(0..=12))
            .map(|_| rng.gen_range(1..=200))
            .collect();
        profits.sort_unstable_by(|x, y| y.cmp(x));
        let class: Vec<KnapsackItem> = profits
            .iter()
            .enumerate()
            .map(|(id, &profit)| KnapsackItem {
                id,
                size: h,
                profit,
            })
            .collect();
        let r = build_size_class_array(&class, h, t).unwrap();
        if !r.is_well_formed() {
            malformed += 1;
        }
        if concave_maxplus_convolve(&a, &r).unwrap()
            != naive_maxplus_convolve(&a, &r.values).unwrap()
        {
            mismatches += 1;
        }
    }
    verdict(
        "convolution equivalence",
        mismatches == 0 && malformed == 0,
        format!("1000 pairs, {mismatches} mismatches, {malformed} malformed step arrays"),
    )
}

fn compression_inequality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut jobs = 0usize;
    let mut checks = 0usize;
    let mut violations = 0usize;
    while jobs < 10_000 {
        let model = kind(&mut rng);
        let m = match model {
            ModelKind::Table => rng.gen_range(16..=2000),
            ModelKind::PowerLaw => 10u64.pow(rng.gen_range(2..=9)),
        };
        let inst = generate_instance(&GeneratorSpec::new(rng.gen(), 100, m, model)).unwrap();
        for j in 0..inst.n() {
            for q in [4u64, 8, 16] {
                let factor = 1.0 + 4.0 / q as f64;
                let mut ks = vec![q.min(m), m];
                ks.extend((0..20).map(|_| rng.gen_range(q.min(m)..=m)));
                for k in ks.into_iter().filter(|&k| k >= q) {
                    let compressed = k * (q - 1) / q;
                    checks += 1;
                    if inst.time(j, compressed) > factor * inst.time(j, k) {
                        violations += 1;
                    }
                }
            }
        }
        jobs += inst.n();
    }
    verdict(
        "compression inequality",
        violations == 0,
        format!("{jobs} jobs, rho in {{1/4,1/8,1/16}}, {checks} checks, {violations} violations"),
    )
}

/// Exact sizes for `rho = 1/q` from integer arithmetic:
/// `floor(b (q+1)^i / q^i)` until the value reaches `m`.
fn exact_sizes(q: u64, m: u64) -> (Vec<u64>, usize) {
    let b = q;
    if m <= b {
        return ((1..=m).collect(), 0);
    }
    let mut sizes: Vec<u64> = (1..=b).collect();
    let (mut num, mut den) = (BigUint::from(b), BigUint::from(1u32));
    let big_m = BigUint::from(m);
    let mut i = 0;
    loop {
        i += 1;
        num *= q + 1;
        den *= q;
        let v = &num / &den;
        if v >= big_m {
            break;
        }
        let v = u64::try_from(&v).unwrap();
        if v > *sizes.last().unwrap() {
            sizes.push(v);
        }
    }
    sizes.push(m);
    (sizes, i)
}

fn compressed_size_structure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut range_err, mut prefix_err, mut card_err, mut oracle_err) = (0, 0, 0, 0);
    let mut gap_sets = 0;
    let mut gap_pairs = 0;
    let mut gap_example = None;
    for _ in 0..100 {
        let q = rng.gen_range(4..=64u64);
        let rho = 1.0 / q as f64;
        let m = 10f64.powf(rng.gen_range(0.0..=9.0)).round().max(1.0) as u64;
        let s = compressed_sizes(rho, m).unwrap();
        let sizes = s.sizes();
        let b = q;
        let (oracle, exponents) = exact_sizes(q, m);
        if sizes != oracle.as_slice() {
            oracle_err += 1;
        }
        let increasing = sizes.windows(2).all(|w| w[0] < w[1]);
        let in_range = sizes.first() == Some(&1) && sizes.last() == Some(&m);
        if !increasing || !in_range || (m <= b && sizes.len() as u64 != m) {
            range_err += 1;
        }
        if !(1..=b.min(m)).all(|k| s.contains(k)) {
            prefix_err += 1;
        }
        if sizes.len() > b as usize + exponents + 1 {
            card_err += 1;
        }
        let bad: Vec<(u64, u64)> = sizes
            .windows(2)
            .filter(|w| w[1] > b && (w[1] - w[0]) as f64 > rho * w[1] as f64)
            .map(|w| (w[0], w[1]))
            .collect();
        if !bad.is_empty() {
            gap_sets += 1;
            gap_pairs += bad.len();
            gap_example.get_or_insert((q, bad[0]));
        }
    }
    let example = compressed_sizes(0.025, 1_000_000_000).unwrap();
    let (_, example_exponents) = exact_sizes(40, 1_000_000_000);
    let example_ok = example.formula_len() == 730 && 40 + example_exponents == 730;
    let small = compressed_sizes(0.25, 100).unwrap();
    let small_ok = small.sizes()
        == [
            1, 2, 3, 4, 5, 6, 7, 9, 12, 15, 19, 23, 29, 37, 46, 58, 72, 90, 100,
        ];
    let gap_note = match gap_example {
        Some((q, (lo, hi))) => format!(", e.g. rho=1/{q}: {lo} -> {hi}"),
        None => String::new(),
    };
    verdict(
        "compressed-size structure",
        range_err + prefix_err + card_err + oracle_err + gap_sets == 0 && example_ok && small_ok,
        format!(
            "100 sets; range/order {range_err}, prefix {prefix_err}, cardinality {card_err}, \
             exact-oracle {oracle_err} failures; gap bound violated in {gap_sets} sets \
             ({gap_pairs} pairs{gap_note}); eps=0.1,m=1e9 formula length {} (want 730); \
             rho=1/4,m=100 example {}",
            example.formula_len(),
            if small_ok { "ok" } else { "wrong" }
        ),
    )
}

struct TinyRun {
    inst: Instance,
    opt: f64,
}

fn tiny_corpus() -> Vec<TinyRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..500)
        .map(|_| {
            let spec = GeneratorSpec::new(
                rng.gen(),
                rng.gen_range(1..=5),
                rng.gen_range(1..=6),
                kind(&mut rng),
            );
            let inst = generate_instance(&spec).unwrap();
            let (opt, _) = brute_force_opt(&inst).unwrap();
            TinyRun { inst, opt }
        })
        .collect()
}

#[derive(Default)]
struct Feasibility {
    checked: usize,
    violations: usize,
}

impl Feasibility {
    fn check(&mut self, s: &Schedule, inst: &Instance) {
        self.checked += 1;
        let ok = s.check_complete(inst).is_ok() && validate_schedule(s, inst).unwrap().feasible;
        if !ok {
            self.violations += 1;
        }
    }
}

fn end_to_end(corpus: &[TinyRun], feas: &mut Feasibility) -> Verdict {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut over = 0;
    let mut fptas_cases = 0;
    let mut fptas_over = 0;
    for run in corpus {
        let r = solve(&run.inst, TINY_EPS).unwrap();
        feas.check(&r.schedule, &run.inst);
        let ratio = r.makespan / run.opt;
        worst = worst.max(ratio);
        if ratio > TINY_RATIO {
            over += 1;
        }
        if in_regime(run.inst.m(), run.inst.n(), TINY_EPS) {
            fptas_cases += 1;
            if ratio > TINY_FPTAS_RATIO {
                fptas_over += 1;
            }
        }
    }
    verdict(
        "end-to-end approximation",
        over == 0 && fptas_over == 0,
        format!(
            "500 instances at eps={TINY_EPS}: worst ratio {worst:.4} (limit {TINY_RATIO}), {over} over; \
             {fptas_cases} in the m > 8n/eps regime, {fptas_over} over {TINY_FPTAS_RATIO}; {:.2?}",
            started.elapsed()
        ),
    )
}

fn rejection_telemetry(corpus: &[TinyRun], feas: &mut Feasibility) -> Verdict {
    let mut probes = 0;
    let mut bad = 0;
    for run in corpus {
        let inst = &run.inst;
        let config = SolverConfig::three_half(TINY_EPS).unwrap();
        let (boot, t, _) = constant_factor_schedule(inst, TINY_EPS).unwrap();
        feas.check(&boot, inst);
        let (_, opt_schedule) = brute_force_opt(inst).unwrap();
        feas.check(&opt_schedule, inst);
        let mut guesses: Vec<f64> = guess_grid(t, config.eps_hat)
            .into_iter()
            .filter(|&d| d >= run.opt)
            .collect();
        guesses.push(run.opt);
        for backend in [KnapsackBackend::Convolution, KnapsackBackend::BellmanDp] {
            let est = ThreeHalfEstimator::new(inst, config.eps_hat, backend).unwrap();
            for &d in &guesses {
                probes += 1;
                match est.estimate(inst, d).unwrap().0 {
                    Estimate::Accept(s) => feas.check(&s, inst),
                    Estimate::Reject(_) => bad += 1,
                }
            }
        }
        let r = solve(inst, TINY_EPS).unwrap();
        for p in r.stats.probes.iter().filter(|p| p.d >= run.opt) {
            probes += 1;
            if !p.accepted {
                bad += 1;
            }
        }
    }
    verdict(
        "rejection soundness telemetry",
        bad == 0,
        format!("{probes} estimator calls at d >= OPT, {bad} rejections"),
    )
}

/// Larger instances in both regimes, checked for feasibility only.
fn wider_feasibility(feas: &mut Feasibility) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..200 {
        let n = rng.gen_range(1..=60);
        let m = if i % 2 == 0 {
            rng.gen_range(1..=300)
        } else {
            rng.gen_range(1000..=100_000)
        };
        let model = if m > 5000 {
            ModelKind::PowerLaw
        } else {
            kind(&mut rng)
        };
        let inst = generate_instance(&GeneratorSpec::new(rng.gen(), n, m, model)).unwrap();
        let eps = [0.05, 0.1, 0.25, 0.5][i % 4];
        let r = solve(&inst, eps).unwrap();
        feas.check(&r.schedule, &inst);
        if let Ok(est) = FptasEstimator::new(&inst, eps) {
            for d in [0.5, 1.0, 1.5].map(|f| f * r.makespan) {
                if let Estimate::Accept(s) = est.estimate(&inst, d).unwrap() {
                    feas.check(&s, &inst);
                }
            }
        }
    }
}

fn feasibility(corpus: &[TinyRun], feas: &mut Feasibility) -> Verdict {
    let _ = corpus;
    wider_feasibility(feas);
    verdict(
        "feasibility",
        feas.violations == 0,
        format!(
            "{} schedules validated, {} violations",
            feas.checked, feas.violations
        ),
    )
}

fn time_solve(inst: &Instance) -> Duration {
    let started = Instant::now();
    let r = solve(inst, 0.25).unwrap();
    let elapsed = started.elapsed();
    assert!(r.makespan.is_finite());
    elapsed
}

/// Per size, the minimum of seven runs after a warm-up. Repetitions cycle
/// through the sizes so that machine load drifts hit all of them alike.
fn scaling() -> Verdict {
    let sizes = [100_000usize, 200_000, 400_000, 800_000];
    let instances: Vec<Instance> = sizes
        .iter()
        .map(|&n| {
            generate_instance(&GeneratorSpec::new(
                7,
                n,
                1_000_000_000,
                ModelKind::PowerLaw,
            ))
            .unwrap()
        })
        .collect();
    let mut times = vec![Duration::MAX; sizes.len()];
    for rep in 0..8 {
        for (inst, best) in instances.iter().zip(&mut times) {
            let t = time_solve(inst);
            if rep > 0 {
                *best = (*best).min(t);
            }
        }
    }
    let ratios: Vec<f64> = times
        .windows(2)
        .map(|w| w[1].as_secs_f64() / w[0].as_secs_f64())
        .collect();
    let pass = times[0] < SCALING_BUDGET && ratios.iter().all(|&r| r <= SCALING_GROWTH);
    verdict(
        "scaling smoke",
        pass,
        format!(
            "m=1e9, eps=0.25: n=1e5 in {:.2?} (budget {SCALING_BUDGET:?}); doubling ratios {:?} (limit {SCALING_GROWTH})",
            times[0],
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn main() -> ExitCode {
    let corpus = tiny_corpus();
    let mut feas = Feasibility::default();
    let verdicts = [
        knapsack_oracle(),
        convolution_oracle(),
        compression_inequality(),
        compressed_size_structure(),
        end_to_end(&corpus, &mut feas),
        rejection_telemetry(&corpus, &mut feas),
        feasibility(&corpus, &mut feas),
        scaling(),
    ];
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("{passed}/{} criteria pass", verdicts.len());
    let mut unexpected = false;
    for v in verdicts.iter().filter(|v| !v.pass) {
        match KNOWN_FAILURES.iter().find(|(name, _)| *name == v.name) {
            Some((_, why)) => println!("known failure `{}`: {why}", v.name),
            None => {
                println!("unexpected failure `{}`: {}", v.name, v.detail);
                unexpected = true;
            }
        }
    }
    if unexpected {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
