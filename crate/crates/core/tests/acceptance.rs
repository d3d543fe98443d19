//! Acceptance checks, one line per criterion. Runs as a plain binary
//! (`harness = false`). Failures are always reported; the exit status is
//! non-zero only when `ICREGRET_ACCEPTANCE_STRICT` is set, so the rest of
//! the workspace tests still run.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};

use ic_regret::accounting::bounds::{bound_dsp, bound_switching, discretization_error_bound, measured_discretization_error, TheoryParams};
use ic_regret::accounting::GroundTruth;
use ic_regret::auction::{seeded_rng, BidGrid, BlockObservation, SimRng};
use ic_regret::env::LinearMechanism;
use ic_regret::estimator::{ucb_regret, ucb_utility, ArmStats, UcbContext};
use ic_regret::harness::config::MarketKind;
use ic_regret::harness::run::build_oracle;
use ic_regret::harness::{simulate, ExperimentConfig, PolicyName};
use ic_regret::policy::{generate_bids, PairTable};

const REPS: usize = 10;
const HORIZON: usize = 2000;
const GROUPS: u64 = 10;
const GROUP_STRIDE: u64 = 1000;
const VALUE: f64 = 9.5;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// The GSP experiment on the 100-point grid {0.1, ..., 10}.
fn gsp_config(samples: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_kv_str(
        "grid_min = 0.1\ngrid_max = 10\ngrid_step = 0.1\nm = 15\nn = 1024\nT = 2000\nreps = 10\n",
    )
    .expect("static config");
    cfg.oracle_samples = samples;
    cfg.horizon = HORIZON;
    cfg.reps = REPS;
    cfg
}

fn with_policies(base: &ExperimentConfig, policies: &[PolicyName]) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.policies = policies.to_vec();
    cfg.value = policies.contains(&PolicyName::KnownValue).then_some(VALUE);
    cfg
}

/// Mean final cumulative pseudo-regret per policy label, in listed order.
fn final_means(cfg: &ExperimentConfig, gt: &GroundTruth) -> Vec<(String, f64)> {
    let rows = simulate(cfg, gt).expect("simulation");
    let mut order: Vec<String> = Vec::new();
    let mut sums: HashMap<String, (f64, usize)> = HashMap::new();
    for r in rows.iter().filter(|r| r.t == cfg.horizon) {
        if !order.contains(&r.policy) {
            order.push(r.policy.clone());
        }
        let e = sums.entry(r.policy.clone()).or_default();
        e.0 += r.cum_pseudo_regret;
        e.1 += 1;
    }
    order.into_iter().map(|p| { let (s, k) = sums[&p]; (p, s / k as f64) }).collect()
}

fn mean_at(cfg: &ExperimentConfig, gt: &GroundTruth, t: usize) -> f64 {
    let rows = simulate(cfg, gt).expect("simulation");
    let hits: Vec<f64> = rows.iter().filter(|r| r.t == t).map(|r| r.cum_pseudo_regret).collect();
    hits.iter().sum::<f64>() / hits.len() as f64
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ")
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn interior_beats_ends(xs: &[f64]) -> bool {
    let (first, last) = (xs[0], xs[xs.len() - 1]);
    xs[1..xs.len() - 1].iter().any(|&x| x < first && x < last)
}

fn criterion_1() -> Verdict {
    let mut cfg = ExperimentConfig::from_kv_str("environment = second_price\ngrid_min = 0\ngrid_max = 10\ngrid_step = 0.1\n").expect("config");
    cfg.oracle_samples = 1_000_000;
    assert_eq!(cfg.market, MarketKind::SecondPrice);
    let grid = cfg.grid().expect("grid");
    let gt = build_oracle(&cfg, &grid).expect("oracle");
    let mut parts = Vec::new();
    let mut pass = true;
    for v in [2.0, 5.0, 9.5] {
        let vi = grid.index_of(v).expect("value on grid");
        let b = gt.best_bid(vi);
        let rgt = gt.regret(vi, b);
        let se = gt.regret_std_error(vi, b);
        pass &= rgt <= 3.0 * se;
        parts.push(format!("v={v}: max rgt {rgt:.2e} at b={} (3 se = {:.2e})", grid.level(b), 3.0 * se));
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_2() -> Verdict {
    let cfg = gsp_config(100_000);
    let grid = cfg.grid().expect("grid");
    let gt = build_oracle(&cfg, &grid).expect("oracle");
    let (v, b) = gt.best_pair();
    let rgt = gt.max_regret();
    let se = gt.regret_std_error(v, b);
    Verdict::new(
        rgt > 10.0 * se,
        format!("max rgt {rgt:.4} at (v={}, b={}), se {se:.2e}, ratio {:.0}", grid.level(v), grid.level(b), rgt / se),
    )
}

fn criterion_3(base: &ExperimentConfig, gt: &GroundTruth) -> Verdict {
    let cfg = with_policies(base, &[PolicyName::KnownValue]);
    let rows = simulate(&cfg, gt).expect("simulation");
    let mean = |t: usize| {
        let xs: Vec<f64> = rows.iter().filter(|r| r.t == t).map(|r| r.cum_pseudo_regret).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    let (half, full) = (mean(HORIZON / 2), mean(HORIZON));
    let ratio = full / half;
    Verdict::new(ratio < 1.8, format!("R(1000) = {half:.2}, R(2000) = {full:.2}, ratio {ratio:.3} (< 1.8)"))
}

fn criterion_4(base: &ExperimentConfig, gt: &GroundTruth) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for policy in [PolicyName::KnownValue, PolicyName::Dsp] {
        let finals: Vec<f64> = [16, 64, 256, 1024]
            .iter()
            .map(|&n| {
                let mut cfg = with_policies(base, &[policy]);
                cfg.n = n;
                mean_at(&cfg, gt, HORIZON)
            })
            .collect();
        let ok = strictly_decreasing(&finals);
        pass &= ok;
        parts.push(format!("{} n=16..1024: [{}] {}", policy.as_str(), fmt_list(&finals), if ok { "decreasing" } else { "not decreasing" }));
    }
    Verdict::new(pass, parts.join("; "))
}

struct GroupResults {
    advertiser: Vec<Vec<(String, f64)>>,
    dsp: Vec<Vec<(String, f64)>>,
}

fn seed_groups(base: &ExperimentConfig, gt: &GroundTruth) -> GroupResults {
    let mut out = GroupResults { advertiser: Vec::new(), dsp: Vec::new() };
    for g in 0..GROUPS {
        let mut cfg = base.clone();
        cfg.base_seed = g * GROUP_STRIDE;
        let adv = with_policies(&cfg, &[PolicyName::KnownValue, PolicyName::RandomBids, PolicyName::EpsilonGreedy]);
        out.advertiser.push(final_means(&adv, gt));
        let dsp = with_policies(
            &cfg,
            &[PolicyName::Dsp, PolicyName::Switching, PolicyName::RandomBids, PolicyName::EpsilonGreedy],
        );
        out.dsp.push(final_means(&dsp, gt));
    }
    out
}

fn lookup(means: &[(String, f64)], prefix: &str) -> f64 {
    means.iter().find(|(p, _)| p.starts_with(prefix)).map(|(_, x)| *x).expect("policy present")
}

fn criterion_5(groups: &GroupResults) -> Verdict {
    let wins = |sets: &[Vec<(String, f64)>], ucb: &str| -> (usize, Vec<f64>) {
        let mut count = 0;
        let mut last = Vec::new();
        for m in sets {
            let (u, r, e) = (lookup(m, ucb), lookup(m, "random"), lookup(m, "epsilon"));
            if u < r && u < e {
                count += 1;
            }
            last = vec![u, r, e];
        }
        (count, last)
    };
    let (adv, adv_last) = wins(&groups.advertiser, PolicyName::KnownValue.as_str());
    let (dsp, dsp_last) = wins(&groups.dsp, PolicyName::Dsp.as_str());
    Verdict::new(
        adv >= 8 && dsp >= 8,
        format!(
            "UCB below both baselines in {adv}/10 advertiser groups and {dsp}/10 DSP groups (need 8); last group [ucb, random, eps]: advertiser [{}], dsp [{}]",
            fmt_list(&adv_last),
            fmt_list(&dsp_last)
        ),
    )
}

fn criterion_6(groups: &GroupResults, gt: &GroundTruth) -> Verdict {
    let mut wins = 0;
    let mut pairs = Vec::new();
    for m in &groups.dsp {
        let (sw, dsp) = (lookup(m, PolicyName::Switching.as_str()), lookup(m, PolicyName::Dsp.as_str()));
        if sw <= dsp {
            wins += 1;
        }
        pairs.push(format!("{sw:.1}/{dsp:.1}"));
    }
    let mut bound_ok = true;
    for m in 1..=63 {
        let p = TheoryParams { m, n: 1024, utility_bound: 10.0, horizon: HORIZON as f64 };
        let (sw, dsp) = (bound_switching(gt, &p).expect("bound"), bound_dsp(gt, &p).expect("bound"));
        bound_ok &= sw <= dsp;
    }
    Verdict::new(
        wins >= 8 && bound_ok,
        format!(
            "switching <= dsp in {wins}/10 groups (need 8) [switching/dsp: {}]; bounds ordered for all m in 1..=63: {bound_ok}",
            pairs.join(", ")
        ),
    )
}

fn criterion_7(base: &ExperimentConfig, gt: &GroundTruth) -> Verdict {
    let ms = [1usize, 3, 7, 15, 31, 63];
    let mut pass = true;
    let mut parts = Vec::new();
    for policy in [PolicyName::KnownValue, PolicyName::Dsp] {
        let finals: Vec<f64> = ms
            .iter()
            .map(|&m| {
                let mut cfg = with_policies(base, &[policy]);
                cfg.m = m;
                mean_at(&cfg, gt, HORIZON)
            })
            .collect();
        let ok = interior_beats_ends(&finals);
        pass &= ok;
        parts.push(format!("{} m=1..63: [{}] {}", policy.as_str(), fmt_list(&finals), if ok { "interior minimum" } else { "monotone ends" }));
    }
    Verdict::new(pass, parts.join("; "))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_8() -> Verdict {
    let grid = BidGrid::uniform(0.5, 10.0, 0.5).expect("grid");
    let (v, b) = (grid.index_of(9.5).expect("v"), grid.index_of(3.0).expect("b"));
    let mut counts = vec![1; grid.len()];
    let (mut alloc, mut pay) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    counts[b] = 4;
    alloc[b] = 0.5;
    pay[b] = 2.0;
    let stats = ArmStats::from_parts(&grid, counts, alloc, pay).expect("stats");
    let ctx = UcbContext::new(100, 15, 1024, 10.0, grid.len()).expect("ctx");
    let utility = ucb_utility(&stats, &ctx, v, b);
    let utility_ok = rel_close(utility, 6.543567823462866, 1e-9);

    let small = BidGrid::uniform(1.0, 5.0, 1.0).expect("grid");
    let stats = ArmStats::from_parts(&small, vec![2, 3, 5, 5, 5], vec![0.5, 0.45, 0.0, 0.0, 0.0], vec![0.2, 0.2, 0.0, 0.0, 0.0]).expect("stats");
    let ctx = UcbContext::new(50, 3, 1024, 10.0, small.len()).expect("ctx");
    let regret = ucb_regret(&stats, &ctx, 0, 1);
    let regret_ok = rel_close(regret, 6.006006578256737, 1e-9);

    let mut rng = seeded_rng(8, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let arms = rng.random_range(1..6);
        let len = rng.random_range(1..60);
        let grid = BidGrid::uniform(1.0, arms as f64, 1.0).expect("grid");
        let mut stats = ArmStats::new(&grid);
        let mut sums = vec![(0.0, 0.0, 0usize); arms];
        for _ in 0..len {
            let obs = BlockObservation {
                bid: rng.random_range(0..arms),
                mean_allocation: rng.random(),
                mean_payment: rng.random_range(0.0..10.0),
                block_size: 16,
            };
            stats.absorb(&obs).expect("absorb");
            let s = &mut sums[obs.bid];
            s.0 += obs.mean_allocation;
            s.1 += obs.mean_payment;
            s.2 += 1;
        }
        for (i, &(a, p, k)) in sums.iter().enumerate() {
            if k == 0 {
                continue;
            }
            worst = worst.max((stats.mean_allocation(i) - a / k as f64).abs());
            worst = worst.max((stats.mean_payment(i) - p / k as f64).abs());
        }
    }
    let absorb_ok = worst <= 1e-12;
    Verdict::new(
        utility_ok && regret_ok && absorb_ok,
        format!("ucb_utility {utility:.12}, ucb_regret {regret:.12}, worst absorb deviation {worst:.1e} over 10^4 streams"),
    )
}

fn criterion_9() -> Verdict {
    let arms = 20;
    let mut rng = SimRng::seed_from_u64(9);
    let mut failures = 0;
    for _ in 0..10_000 {
        let table = PairTable::from_fn(arms, |_, _| rng.random::<f64>());
        let target = rng.random_range(2..=10);
        let mut top = (0, 1);
        for v in 0..arms {
            for b in (0..arms).filter(|&b| b != v) {
                if table.get(v, b) > table.get(top.0, top.1) {
                    top = (v, b);
                }
            }
        }
        let bids = generate_bids(&table, target - 1, &mut rng);
        let mut sorted = bids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let ok = bids.len() == target && sorted.len() == target && bids.contains(&top.0) && bids.contains(&top.1);
        if !ok {
            failures += 1;
        }
    }
    Verdict::new(failures == 0, format!("{failures} of 10^4 random tables violated size, distinctness or top-pair inclusion"))
}

fn criterion_10() -> Verdict {
    let mut rng = seeded_rng(10, 0);
    let mut checked = 0;
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    let mechanisms: Vec<LinearMechanism> = (0..100)
        .map(|_| {
            let (g0, g1, p0, p1): (f64, f64, f64, f64) = (rng.random(), rng.random(), rng.random(), rng.random());
            LinearMechanism::new(g0, g1 - g0, p0, p1 - p0, 1.0).expect("admissible")
        })
        .collect();
    for step in [0.1, 0.01] {
        let coarse = BidGrid::uniform(0.0, 1.0, step).expect("grid");
        let fine = BidGrid::uniform(0.0, 1.0, step / 100.0).expect("grid");
        for mech in &mechanisms {
            let (lg, lp) = mech.lipschitz();
            let bound = discretization_error_bound(lg, lp, step, 1.0, HORIZON as f64).expect("bound");
            let measured = measured_discretization_error(&coarse, &fine, HORIZON as f64, |v, b| mech.regret(v, b));
            checked += 1;
            if measured > bound {
                violations += 1;
            }
            if measured > 0.0 {
                tightest = tightest.min(bound / measured);
            }
        }
    }
    Verdict::new(
        violations == 0,
        format!("{violations} violations in {checked} (mechanism, step) cases; smallest bound/measured ratio {tightest:.2}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let base = gsp_config(1_000_000);
    let grid = base.grid().expect("grid");
    let gt = build_oracle(&base, &grid).expect("oracle");
    eprintln!("shared oracle built in {:.1}s", start.elapsed().as_secs_f64());

    let mut failed = 0;
    let mut report = |id: usize, name: &str, run: &mut dyn FnMut() -> Verdict| {
        let t0 = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t0.elapsed().as_secs_f64()
        );
    };
    report(1, "second-price control is IC", &mut criterion_1);
    report(2, "GSP has positive IC regret", &mut criterion_2);
    report(3, "known-value Regret-UCB is sublinear", &mut || criterion_3(&base, &gt));
    report(4, "pseudo-regret decreases with n", &mut || criterion_4(&base, &gt));
    let groups = seed_groups(&base, &gt);
    report(5, "Regret-UCB beats baselines", &mut || criterion_5(&groups));
    report(6, "switching dominates DSP", &mut || criterion_6(&groups, &gt));
    report(7, "non-monotone m trade-off", &mut || criterion_7(&base, &gt));
    report(8, "estimator unit oracle", &mut criterion_8);
    report(9, "Generate-Bids invariants", &mut criterion_9);
    report(10, "discretization bound validity", &mut criterion_10);
    println!("{} of 10 criteria passed in {:.0}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed == 0 || std::env::var_os("ICREGRET_ACCEPTANCE_STRICT").is_none() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
