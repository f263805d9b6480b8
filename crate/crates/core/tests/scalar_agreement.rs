use mim_core::{
    delta_moments, evaluate, focused_mim, g, generate, parse_distribution_json, Distribution,
    GeneratorSpec, ImportanceCoefficient, Quad, QuadDistribution, Real,
};

#[test]
fn f64_and_quad_measures_agree() {
    let spec = GeneratorSpec::TruncatedGeometric { q: 0.3, support: 11 };
    let d: Distribution = generate(&spec).unwrap();
    let dq: QuadDistribution = generate(&spec).unwrap();
    for j in 0..d.len() {
        let a = focused_mim(&d, j).unwrap().nats();
        let b = focused_mim(&dq, j).unwrap().nats().to_f64_lossy();
        assert!((a - b).abs() <= 1e-12 * b.abs(), "j={j}: {a} vs {b}");
    }
    let w = ImportanceCoefficient::new(Quad::lit(3.5)).unwrap();
    let wf = ImportanceCoefficient::new(3.5).unwrap();
    let b = evaluate(&dq, w).nats().to_f64_lossy();
    assert!((evaluate(&d, wf).nats() - b).abs() < 1e-13);
}

#[test]
fn stationarity_function_agrees_away_from_cancellation() {
    for (p, w) in [(0.1, 5.0), (0.3, 8.0), (0.45, 2.0)] {
        let a = g(p, w);
        let b = g(Quad::lit(p), Quad::lit(w)).to_f64_lossy();
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{p} {w}");
    }
}

#[test]
fn delta_moments_agree() {
    let a = delta_moments(0.1, 10_000).unwrap();
    let b = delta_moments(Quad::lit(0.1), 10_000).unwrap();
    assert!((a.mean_l - b.mean_l.to_f64_lossy()).abs() < 1e-12);
    assert!((a.var_l - b.var_l.to_f64_lossy()).abs() < 1e-14);
}

#[test]
fn json_generator_matches_direct_generation() {
    let from_json = parse_distribution_json(r#"{"kind":"binomial","trials":10,"theta":0.3}"#).unwrap();
    let direct: Distribution = generate(&GeneratorSpec::Binomial { trials: 10, theta: 0.3 }).unwrap();
    assert_eq!(from_json, direct);
}
