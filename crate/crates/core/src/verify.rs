//! Seeded invariant suites. Each check reports a statistic and, on failure,
//! the first offending case.

use num_traits::Float;
use rand_distr::{Distribution as _, Exp1};
use serde::Serialize;

use crate::distributions::FiniteDistribution;
use crate::error::{invalid, Result};
use crate::mim::{
    chain_rule_values, coefficient_for_element, dominant_index, evaluate, focused_mim, log_terms,
    lower_bound_report, uniform_gap, ImportanceCoefficient,
};
use crate::scalar::Real;
use crate::select::{
    binary_objective, dominance_margin, g, solve_coefficient_exact, taylor_coefficient,
};
use crate::stream::{
    chebyshev_bound, delta_moments, minority_event_probability, sample_empirical_mim,
    sample_empirical_probabilities, simulate_batches, substream, tracker_sandwich_check,
    union_bound_check, MinorityModel,
};
use crate::Quad;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Inclusive `lo:hi:step` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let nums = parts
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| invalid("grid", format!("expected lo:hi:step, got `{text}`")))?;
        match nums[..] {
            [lo, hi, step] if step > 0.0 && lo <= hi => Ok(Self { lo, hi, step }),
            _ => Err(invalid("grid", format!("expected lo:hi:step with step > 0, got `{text}`"))),
        }
    }

    /// Points `lo + k·step` up to `hi` (with a half-step of tolerance).
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub grid: Grid,
    pub taylor_grid: Grid,
    pub replicas: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            grid: Grid {
                lo: 0.02,
                hi: 0.45,
                step: 0.01,
            },
            taylor_grid: Grid {
                lo: 0.05,
                hi: 0.45,
                step: 0.01,
            },
            replicas: 100_000,
            runs: 100,
            seed: crate::DEFAULT_SEED,
        }
    }
}

/// Symmetric Dirichlet(1, ..., 1) sample with `n ∈ 2..=10`.
pub fn random_distribution(seed: u64, index: u64) -> FiniteDistribution<f64> {
    use rand::Rng;
    let mut rng = substream(seed, index);
    let n = rng.random_range(2..=10usize);
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    FiniteDistribution::new(w, true).expect("exponential draws are positive")
}

struct Tally {
    name: &'static str,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: 0,
            first: None,
        }
    }

    fn record(&mut self, ok: bool, case: impl FnOnce() -> String) {
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(case());
            }
        }
    }

    fn finish(self, total: usize, stat: String) -> CheckOutcome {
        let mut detail = format!("{total} cases, {} failures; {stat}", self.failures);
        if let Some(first) = self.first {
            detail.push_str("; first failure: ");
            detail.push_str(&first);
        }
        CheckOutcome::new(self.name, self.failures == 0, detail)
    }
}

fn fmt_probs(d: &FiniteDistribution<f64>) -> String {
    format!("{:?}", d.probs())
}

pub fn properties_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut principal = Tally::new("property1_principal_component");
    let mut monotone = Tally::new("property2_monotone_in_omega");
    let mut chain = Tally::new("property2_chain_rule_ordering");
    let mut lower = Tally::new("property3_lower_bound_chain");
    let mut floor = Tally::new("property4_uniform_floor");
    let mut min_gap = f64::INFINITY;
    let mut min_step = f64::INFINITY;

    for s in 0..opts.samples {
        let d = random_distribution(opts.seed, s as u64);
        let probs = d.probs();

        for j in 0..d.len() {
            let omega = coefficient_for_element(&d, j)?;
            let i = dominant_index(&d, omega);
            let terms = log_terms(&d, omega);
            // Ties between nearly equal probabilities may resolve either way;
            // the focused summand must still be maximal to rounding.
            let ok = probs[i] == probs[j] || terms[j] >= terms[i] - 1e-12 * terms[i].abs().max(1.0);
            principal.record(ok, || {
                format!("p={} j={j}: dominant index {i} (expected p_i = p_j)", fmt_probs(&d))
            });
        }

        let top = d.min_prob(true)?.recip();
        let mut prev = evaluate(&d, ImportanceCoefficient::new(0.0)?).nats();
        for k in 1..=20 {
            let w = top * k as f64 / 20.0;
            let cur = evaluate(&d, ImportanceCoefficient::new(w)?).nats();
            min_step = min_step.min(cur - prev);
            monotone.record(cur > prev, || {
                format!("p={} omega={w}: L={cur} not above previous {prev}", fmt_probs(&d))
            });
            prev = cur;
        }

        let vals = chain_rule_values(&d)?;
        for w in vals.windows(2) {
            let ((pa, la), (pb, lb)) = (w[0], w[1]);
            let distinct = pa - pb > 1e-12 * pa;
            let ok = if distinct { lb.nats() > la.nats() } else { lb.nats() >= la.nats() - 1e-12 };
            chain.record(ok, || {
                format!("p={}: L at p={pb} is {} vs {} at p={pa}", fmt_probs(&d), lb.nats(), la.nats())
            });
        }

        let lb = lower_bound_report(&d)?;
        for j in 0..d.len() {
            let lj = focused_mim(&d, j)?.nats();
            let ok = lj >= lb.at_inv_pmax.nats() - 1e-12 && lb.at_inv_pmax.nats() > lb.at_one.nats();
            lower.record(ok, || {
                format!(
                    "p={} j={j}: L_j={lj}, L(1/pmax)={}, L(1)={}",
                    fmt_probs(&d),
                    lb.at_inv_pmax.nats(),
                    lb.at_one.nats()
                )
            });
        }

        let gap = uniform_gap(&d)?;
        min_gap = min_gap.min(gap);
        floor.record(gap >= -1e-12, || format!("p={}: gap {gap} < -1e-12", fmt_probs(&d)));
    }

    let n = opts.samples;
    let mut checks = vec![
        principal.finish(n, "dominant summand at omega=1/p_j has probability p_j".into()),
        monotone.finish(n, format!("smallest increment {min_step:.3e}")),
        chain.finish(n, "L_j increasing as p_j decreases".into()),
        lower.finish(n, "L_j >= L(p,1/pmax) > L(p,1)".into()),
        floor.finish(n, format!("smallest gap {min_gap:.3e}")),
    ];
    checks.push(stability_check());
    Ok(SuiteReport {
        suite: "properties".into(),
        seed: opts.seed,
        checks,
    })
}

fn stability_check() -> CheckOutcome {
    let pmin: f64 = 1e-10;
    let d = FiniteDistribution::new(vec![pmin, 1.0 - pmin], false).expect("valid");
    let omega = pmin.recip();
    let v = evaluate(&d, ImportanceCoefficient::new(omega).expect("finite")).nats();
    let approx = pmin.ln() + omega * (1.0 - pmin);
    let rel = ((v - approx) / approx).abs();
    CheckOutcome::new(
        "stability_tiny_pmin",
        v.is_finite() && rel < 1e-6,
        format!("L={v}, dominant-term approximation {approx}, relative error {rel:.3e}"),
    )
}

/// Central difference of `T(·, ϖ)` at `p`, in quad precision.
fn objective_slope(p: Quad, omega: Quad) -> (Quad, Quad) {
    let h = Quad::lit(1e-10);
    let two = Quad::lit(2.0);
    let slope = (binary_objective(p + h, omega) - binary_objective(p - h, omega)) / (two * h);
    (slope, binary_objective(p, omega))
}

pub fn select_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let tol = Quad::lit(1e-8);
    let mut residual = Tally::new("select_residual");
    let mut bracket = Tally::new("select_bracket");
    let mut above_four = Tally::new("select_above_four");
    let mut decreasing = Tally::new("select_decreasing");
    let mut stationary = Tally::new("select_stationarity");
    let mut dominance = Tally::new("select_dominance");
    let mut worst_residual = 0.0f64;
    let mut worst_fd = 0.0f64;

    let grid = opts.grid.points();
    let mut previous: Option<(f64, Quad)> = None;
    for &pf in &grid {
        let p = Quad::lit(pf);
        let r = match solve_coefficient_exact(p, tol) {
            Ok(r) => r,
            Err(e) => {
                residual.record(false, || format!("p={pf}: {e}"));
                continue;
            }
        };
        let w = r.omega_star;
        let res = g(p, w).abs().to_f64_lossy();
        worst_residual = worst_residual.max(res);
        residual.record(res < 1e-8, || format!("p={pf}: |g|={res:e}"));
        bracket.record(w > p.recip() && w < Quad::lit(2.0) / p, || {
            format!("p={pf}: omega*={} outside (1/p, 2/p)", w.to_f64_lossy())
        });
        above_four.record(w > Quad::lit(4.0), || format!("p={pf}: omega*={}", w.to_f64_lossy()));
        if let Some((p0, w0)) = previous {
            decreasing.record(w < w0, || {
                format!("omega*({pf})={} not below omega*({p0})={}", w.to_f64_lossy(), w0.to_f64_lossy())
            });
        }
        previous = Some((pf, w));
        let (slope, level) = objective_slope(p, w);
        let ratio = (slope.abs() / level.abs()).to_f64_lossy();
        worst_fd = worst_fd.max(ratio);
        stationary.record(ratio < 1e-6, || format!("p={pf}: |T'|/|T|={ratio:e}"));
        let z = dominance_margin(p, w);
        dominance.record(z >= Quad::lit(0.0), || format!("p={pf}: z={}", z.to_f64_lossy()));
    }

    let mut taylor = Tally::new("select_taylor_ratio");
    let mut ratio_range = (f64::INFINITY, f64::NEG_INFINITY);
    let taylor_grid = opts.taylor_grid.points();
    for &pf in &taylor_grid {
        let exact = solve_coefficient_exact(Quad::lit(pf), tol)?.omega_star.to_f64_lossy();
        let ratio = taylor_coefficient(pf)? / exact;
        ratio_range = (ratio_range.0.min(ratio), ratio_range.1.max(ratio));
        taylor.record((0.5..=2.0).contains(&ratio), || format!("p={pf}: ratio {ratio}"));
    }

    let n = grid.len();
    Ok(SuiteReport {
        suite: "select".into(),
        seed: opts.seed,
        checks: vec![
            residual.finish(n, format!("worst |g| {worst_residual:.3e}")),
            bracket.finish(n, "omega* in (1/p, 2/p)".into()),
            above_four.finish(n, "omega* > 4".into()),
            decreasing.finish(n.saturating_sub(1), "omega* strictly decreasing in p".into()),
            stationary.finish(n, format!("worst |T'|/|T| {worst_fd:.3e}")),
            dominance.finish(n, "z(p, omega*) >= 0".into()),
            taylor.finish(
                taylor_grid.len(),
                format!("ratio range [{:.4}, {:.4}]", ratio_range.0, ratio_range.1),
            ),
        ],
    })
}

pub fn stream_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let (p, trials) = (0.1, 10_000u64);
    let moments = delta_moments(p, trials)?;
    let samples = sample_empirical_mim(p, trials, opts.replicas, opts.seed)?;
    let mc = samples.moments()?;

    let mean_err = (mc.mean - moments.mean_l).abs();
    checks.push(CheckOutcome::new(
        "stream_delta_mean",
        mean_err <= 0.01,
        format!("MC mean {:.6}, delta mean {:.6}, |diff| {mean_err:.3e} (limit 0.01)", mc.mean, moments.mean_l),
    ));
    let var_rel = (mc.variance - moments.var_l).abs() / moments.var_l;
    checks.push(CheckOutcome::new(
        "stream_delta_variance",
        var_rel <= 0.15,
        format!("MC variance {:.6}, delta variance {:.6}, relative diff {var_rel:.4} (limit 0.15)", mc.variance, moments.var_l),
    ));

    let eps = 1.0;
    let cheb = chebyshev_bound(&moments, eps)?;
    let freq = samples.exceedance(moments.mean_l, eps);
    let se = (freq * (1.0 - freq) / samples.values.len() as f64).sqrt();
    checks.push(CheckOutcome::new(
        "stream_chebyshev",
        freq <= cheb.bound + 3.0 * se,
        format!("exceedance {freq:.3e} vs bound {:.4} (unsquared form {:.4})", cheb.bound, cheb.printed_form),
    ));

    let probs = sample_empirical_probabilities(p, trials, opts.replicas, opts.seed.wrapping_add(1))?;
    let r = probs.len() as f64;
    let mean = probs.iter().sum::<f64>() / r;
    let var = probs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
    let true_var = p * (1.0 - p) / trials as f64;
    let mean_ok = (mean - p).abs() <= 3.0 * (true_var / r).sqrt();
    let var_ok = (var - true_var).abs() <= 3.0 * true_var * (2.0 / r).sqrt();
    checks.push(CheckOutcome::new(
        "stream_clt_moments",
        mean_ok && var_ok,
        format!("mean {mean:.6} (p={p}), variance {var:.4e} (p(1-p)/N={true_var:.4e})"),
    ));

    let model = MinorityModel::binary(0.3, 100, 0.1)?;
    let exact = minority_event_probability(&model);
    let mc_trials = opts.replicas.max(1) as u64;
    let tracker = simulate_batches(&model, &[mc_trials], opts.seed)?;
    let est = tracker.last().expect("one batch").p_hat;
    let se = (exact * (1.0 - exact) / mc_trials as f64).sqrt();
    checks.push(CheckOutcome::new(
        "stream_exact_tail",
        (est - exact).abs() <= 3.0 * se,
        format!("exact {exact:.6}, MC {est:.6} over {mc_trials} trials, {:.2} standard errors", (est - exact).abs() / se),
    ));

    let mut sandwich = Tally::new("stream_sandwich");
    let mut counted = (0usize, 0usize);
    for run in 0..opts.runs {
        let seed = opts.seed.wrapping_add(run as u64);
        let t = simulate_batches(&model, &[1000; 10], seed)?;
        let rep = tracker_sandwich_check(&t);
        counted.0 += rep.probability_checks;
        counted.1 += rep.measure_checks;
        sandwich.record(rep.passed(), || format!("seed {seed}: {:?}", rep.violations));
    }
    checks.push(sandwich.finish(
        opts.runs,
        format!("{} probability and {} measure comparisons", counted.0, counted.1),
    ));

    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for k in 1..=50 {
        let m = MinorityModel::binary(0.3, 100, k as f64 * 0.01)?;
        let v = minority_event_probability(&m);
        monotone &= v <= prev + 1e-15;
        prev = v;
    }
    checks.push(CheckOutcome::new(
        "stream_tail_monotone_in_epsilon",
        monotone,
        "epsilon = 0.01..0.50, M=100, p1=0.3".into(),
    ));

    let three = MinorityModel::new(FiniteDistribution::uniform(3)?, 50, 0.2)?;
    let ub = union_bound_check(&three, opts.replicas.max(1) as u64, opts.seed)?;
    checks.push(CheckOutcome::new(
        "stream_union_bound",
        ub.holds,
        format!("union {:.5} +- {:.1e} <= K max tail {:.5}", ub.union_estimate, ub.union_std_error, ub.bound),
    ));

    Ok(SuiteReport {
        suite: "stream".into(),
        seed: opts.seed,
        checks,
    })
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    match name {
        "properties" => Ok(vec![properties_suite(opts)?]),
        "select" => Ok(vec![select_suite(opts)?]),
        "stream" => Ok(vec![stream_suite(opts)?]),
        "all" => Ok(vec![properties_suite(opts)?, select_suite(opts)?, stream_suite(opts)?]),
        other => Err(invalid("suite", format!("unknown suite `{other}`"))),
    }
}
