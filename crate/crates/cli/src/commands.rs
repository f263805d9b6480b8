use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use mim_core::distributions::distribution_from_value;
use mim_core::figures::{default_figure_specs, fig1_rows, fig2_rows, fig3_tables, Fig3Grid};
use mim_core::mim::log_terms;
use mim_core::stream::{tracker_sandwich_check, ChebyshevReport, SandwichReport};
use mim_core::verify::{run_suite, Grid, VerifyOptions};
use mim_core::{
    chebyshev_bound, coefficient_bounds, coefficient_for_element, coefficient_with_prior,
    delta_moments, dominant_index, evaluate, minority_event_probability, simulate_batches,
    solve_coefficient_exact, taylor_coefficient, Distribution, GeneratorSpec, ImportanceCoefficient,
    MimError, MinorityModel, Moments, PriorInterval, Quad, Real,
};
use serde::Serialize;

use crate::args::{ComputeArgs, FigureName, FiguresArgs, SelectArgs, SimulateArgs, VerifyArgs};
use crate::output::sig12;

#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 2.
    Validation(String),
    /// Solver or sampler breakdown: exit 3.
    Numerical(String),
    /// A verify check failed; the report is already printed. Exit 1.
    Invariant,
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invariant => 1,
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> Option<&str> {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => Some(m),
            Failure::Invariant => None,
        }
    }
}

impl From<MimError> for Failure {
    fn from(e: MimError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Validation(format!("{}: {e}", path.display()))
}

fn validation(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

type CmdResult = Result<(), Failure>;

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn read_json_arg(source: &str, what: &str) -> Result<serde_json::Value, Failure> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        fs::read_to_string(source).map_err(|e| validation(format!("{what} {source}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| validation(format!("{what} is not valid JSON: {e}")))
}

fn load_distribution(source: &str) -> Result<Distribution, Failure> {
    Ok(distribution_from_value(&read_json_arg(source, "distribution")?)?)
}

pub fn compute(args: &ComputeArgs) -> CmdResult {
    let dist = load_distribution(&args.dist)?;
    let omega = match (args.omega, args.focus) {
        (Some(w), None) => ImportanceCoefficient::new(w)?,
        (None, Some(j)) => coefficient_for_element(&dist, j)?,
        _ => return Err(validation("exactly one of --omega and --focus is required")),
    };
    let value = evaluate(&dist, omega).nats();
    println!("L = {}", sig12(value));
    println!("omega = {}", sig12(omega.value()));
    if args.terms {
        let dominant = dominant_index(&dist, omega);
        println!("i,p_i,ln_term,term,dominant");
        for (i, (p, lt)) in dist.probs().iter().zip(log_terms(&dist, omega)).enumerate() {
            println!(
                "{i},{},{},{},{}",
                sig12(*p),
                sig12(lt),
                sig12(lt.exp()),
                if i == dominant { "*" } else { "" }
            );
        }
    }
    Ok(())
}

pub fn select(args: &SelectArgs) -> CmdResult {
    if !(args.tol > 0.0) {
        return Err(validation("--tol must be positive"));
    }
    let tol = Quad::lit(args.tol);
    match (&args.p, &args.interval) {
        (Some(p), None) => {
            let p = *p;
            if !(p > 0.0 && p < 1.0) {
                return Err(validation(format!("--p must lie in (0, 1/2), got {p}")));
            }
            let r = solve_coefficient_exact(Quad::lit(p), tol)?;
            let omega = r.omega_star.to_f64_lossy();
            let taylor = taylor_coefficient(p)?;
            println!("p = {}", sig12(p));
            println!("exact = {}", sig12(omega));
            println!("residual = {:.3e}", r.residual.to_f64_lossy());
            println!(
                "bracket = [{}, {}]",
                sig12(r.bracket_lo.to_f64_lossy()),
                sig12(r.bracket_hi.to_f64_lossy())
            );
            println!("taylor = {}", sig12(taylor));
            let (lo, hi) = (Quad::lit(1.0) / Quad::lit(p), Quad::lit(2.0) / Quad::lit(p));
            println!(
                "in ({}, {}) = {}",
                sig12(1.0 / p),
                sig12(2.0 / p),
                r.omega_star > lo && r.omega_star < hi
            );
            println!("above 4 = {}", omega > 4.0);
        }
        (None, Some(iv)) => {
            let iv = PriorInterval::new(Quad::lit(iv[0]), Quad::lit(iv[1]))?;
            let r = coefficient_with_prior(&iv, tol)?;
            let omega = r.omega_star.to_f64_lossy();
            let (b_lo, b_hi) = coefficient_bounds(&iv);
            let (b_lo, b_hi) = (b_lo.to_f64_lossy(), b_hi.to_f64_lossy());
            let p_lo = iv.lo().to_f64_lossy();
            println!("interval = [{}, {}]", sig12(p_lo), sig12(iv.hi().to_f64_lossy()));
            println!("solved at p = {}", sig12(p_lo));
            println!("exact = {}", sig12(omega));
            println!("residual = {:.3e}", r.residual.to_f64_lossy());
            println!("taylor = {}", sig12(taylor_coefficient(p_lo)?));
            println!("bounds = [{}, {}]", sig12(b_lo), sig12(b_hi));
            println!("in bounds = {}", omega >= b_lo && omega <= b_hi);
        }
        _ => return Err(validation("exactly one of --p and --interval is required")),
    }
    Ok(())
}

/// `1000,500,250` or `1000x10`.
pub fn parse_batches(text: &str) -> Result<Vec<u64>, Failure> {
    let bad = || validation(format!("--batches: expected `a,b,...` or `<size>x<count>`, got `{text}`"));
    let sizes: Vec<u64> = if let Some((size, count)) = text.split_once('x') {
        let size: u64 = size.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        vec![size; count]
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(validation("--batches: every batch needs at least one sequence"));
    }
    Ok(sizes)
}

fn build_model(args: &SimulateArgs) -> Result<MinorityModel, Failure> {
    if let Some(source) = &args.model {
        if args.sequence_len.is_some() || args.eps.is_some() {
            return Err(validation("--model already fixes M and epsilon"));
        }
        let value = read_json_arg(source, "model")?;
        return Ok(MinorityModel::from_json(&value.to_string())?);
    }
    let m = args.sequence_len.ok_or_else(|| validation("--M is required without --model"))?;
    let eps = args.eps.ok_or_else(|| validation("--eps is required without --model"))?;
    match (&args.dist, args.p1) {
        (Some(source), None) => Ok(MinorityModel::new(load_distribution(source)?, m, eps)?),
        (None, Some(p1)) => Ok(MinorityModel::binary(p1, m, eps)?),
        _ => Err(validation("one of --model, --dist or --p1 is required")),
    }
}

#[derive(Serialize)]
struct ChebyshevSummary {
    eps: f64,
    bound: f64,
    printed_form: f64,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    seed: u64,
    sequence_len: u64,
    epsilon: f64,
    p1: f64,
    batches: usize,
    total_sequences: u64,
    final_p_hat: f64,
    final_l_hat: Option<f64>,
    exact_event_probability: f64,
    /// `(p̂ - P) / sqrt(P(1-P)/N)`; absent when `P` is 0 or 1.
    final_z_score: Option<f64>,
    delta_moments: Option<Moments>,
    chebyshev: Option<ChebyshevSummary>,
    sandwich: &'a SandwichReport,
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let model = build_model(args)?;
    let sizes = parse_batches(&args.batches)?;
    if !(args.chebyshev_eps > 0.0) {
        return Err(validation("--chebyshev-eps must be positive"));
    }
    let tracker = simulate_batches(&model, &sizes, args.seed)?;
    let sandwich = tracker_sandwich_check(&tracker);
    let last = tracker.last().expect("at least one batch");
    let exact = minority_event_probability(&model);
    let n = last.trials;
    let se = (exact * (1.0 - exact) / n as f64).sqrt();
    let delta = if exact > 0.0 && exact < 0.5 {
        Some(delta_moments(exact, n)?)
    } else {
        None
    };
    let chebyshev = match &delta {
        Some(m) => {
            let ChebyshevReport { bound, printed_form } = chebyshev_bound(m, args.chebyshev_eps)?;
            Some(ChebyshevSummary {
                eps: args.chebyshev_eps,
                bound,
                printed_form,
            })
        }
        None => None,
    };
    let summary = SimulateSummary {
        seed: args.seed,
        sequence_len: model.sequence_len(),
        epsilon: model.epsilon(),
        p1: model.p1(),
        batches: sizes.len(),
        total_sequences: n,
        final_p_hat: last.p_hat,
        final_l_hat: last.l_hat,
        exact_event_probability: exact,
        final_z_score: (se > 0.0).then(|| (last.p_hat - exact) / se),
        delta_moments: delta,
        chebyshev,
        sandwich: &sandwich,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";

    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_failure(path, e))?;
            let mut w = BufWriter::new(file);
            tracker.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| io_failure(path, e))?;
        }
        None => tracker
            .write_csv(io::stdout().lock())
            .map_err(|e| validation(format!("stdout: {e}")))?,
    }
    match (&args.summary, &args.out) {
        (Some(path), _) => fs::write(path, &json).map_err(|e| io_failure(path, e))?,
        (None, Some(_)) => print!("{json}"),
        (None, None) => eprint!("{json}"),
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let opts = VerifyOptions {
        samples: args.samples,
        grid: Grid::parse(&args.grid)?,
        taylor_grid: Grid::parse(&args.taylor_grid)?,
        replicas: args.replicas,
        runs: args.runs,
        seed: args.seed,
    };
    let reports = run_suite(args.suite.as_str(), &opts)?;
    let mut all_passed = true;
    for report in &reports {
        println!("suite {} (seed {})", report.suite, report.seed);
        for check in &report.checks {
            let tag = if check.passed { "PASS" } else { "FAIL" };
            println!("  {tag} {}: {}", check.name, check.detail);
        }
        all_passed &= report.passed();
    }
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    let failed: usize = reports
        .iter()
        .map(|r| r.checks.iter().filter(|c| !c.passed).count())
        .sum();
    println!("result: {} ({} of {total} checks passed)", if all_passed { "PASS" } else { "FAIL" }, total - failed);
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&reports).expect("report serializes") + "\n";
        fs::write(path, json).map_err(|e| io_failure(path, e))?;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Invariant)
    }
}

fn figure_specs(args: &FiguresArgs) -> Result<Vec<GeneratorSpec>, Failure> {
    let mut specs = default_figure_specs();
    specs[0] = GeneratorSpec::Binomial {
        trials: args.binomial_n,
        theta: args.binomial_theta,
    };
    specs[1] = GeneratorSpec::TruncatedPoisson {
        rate: args.poisson_rate,
        support: args.support,
    };
    specs[2] = GeneratorSpec::TruncatedGeometric {
        q: args.geometric_q,
        support: args.support,
    };
    specs[3] = GeneratorSpec::Uniform { n: args.uniform_n };
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

fn write_table<R: Serialize>(dir: &Path, name: &str, rows: &[R]) -> CmdResult {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| io_failure(&path, e))?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

pub fn figures(args: &FiguresArgs) -> CmdResult {
    let specs = figure_specs(args)?;
    let grid = Fig3Grid {
        p_step: args.p_step,
        omega_step: args.omega_step,
        omega_max: args.omega_max,
    };
    let positive = |x: f64| x > 0.0 && x.is_finite();
    if !(positive(grid.p_step) && grid.p_step < 0.5 && positive(grid.omega_step) && positive(grid.omega_max)) {
        return Err(validation("fig3 grid steps and omega-max must be positive, p-step below 0.5"));
    }
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let all = args.which == FigureName::All;
    if all || args.which == FigureName::Fig1 {
        write_table(&args.out, "fig1.csv", &fig1_rows(&specs)?)?;
    }
    if all || args.which == FigureName::Fig2 {
        write_table(&args.out, "fig2.csv", &fig2_rows(&specs)?)?;
    }
    if all || args.which == FigureName::Fig3 {
        let t = fig3_tables(&grid);
        write_table(&args.out, "fig3_surface.csv", &t.surface)?;
        write_table(&args.out, "fig3_zeros.csv", &t.zeros)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_schedules() {
        assert_eq!(parse_batches("1000x3").unwrap(), vec![1000, 1000, 1000]);
        assert_eq!(parse_batches("5, 6,7").unwrap(), vec![5, 6, 7]);
        for bad in ["", "0x3", "10x0", "1,,2", "1,0", "ax2", "-1"] {
            assert!(matches!(parse_batches(bad), Err(Failure::Validation(_))), "{bad}");
        }
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        let numerical: Failure = MimError::NoSignChange { p: 0.5, lo: 2.0, hi: 4.0 }.into();
        assert_eq!(numerical.code(), 3);
        let bad: Failure = MimError::AllZero.into();
        assert_eq!(bad.code(), 2);
        assert_eq!(Failure::Invariant.code(), 1);
    }
}
