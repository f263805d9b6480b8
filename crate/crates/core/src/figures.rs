//! Data tables behind the three figures: focused measures per element,
//! the minimum-probability focus against the uniform baseline, and the
//! `g(p, ϖ)` surface with its zero curve.

use serde::Serialize;

use crate::distributions::{generate, FiniteDistribution, GeneratorSpec};
use crate::error::Result;
use crate::mim::{evaluate, focused_mim, ImportanceCoefficient};
use crate::scalar::Real;
use crate::select::g;
use crate::Quad;

/// Binomial `n=10, θ=0.3`; truncated Poisson `λ=2, K=11`; truncated
/// geometric `q=0.3, K=11`; uniform `n=11`.
pub fn default_figure_specs() -> Vec<GeneratorSpec> {
    vec![
        GeneratorSpec::Binomial {
            trials: 10,
            theta: 0.3,
        },
        GeneratorSpec::TruncatedPoisson {
            rate: 2.0,
            support: 11,
        },
        GeneratorSpec::TruncatedGeometric { q: 0.3, support: 11 },
        GeneratorSpec::Uniform { n: 11 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocusRow {
    pub distribution: String,
    pub j: usize,
    pub p_j: f64,
    pub omega_j: f64,
    pub l_j: f64,
}

pub fn fig1_rows(specs: &[GeneratorSpec]) -> Result<Vec<FocusRow>> {
    let mut rows = Vec::new();
    for spec in specs {
        let dist: FiniteDistribution<f64> = generate(spec)?;
        dist.require_positive()?;
        for (j, &p) in dist.probs().iter().enumerate() {
            rows.push(FocusRow {
                distribution: spec.label(),
                j,
                p_j: p,
                omega_j: p.recip(),
                l_j: focused_mim(&dist, j)?.nats(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinFocusRow {
    pub distribution: String,
    pub n: usize,
    pub p_min: f64,
    pub omega_0: f64,
    pub l_0: f64,
    /// `L(u, n) = n - 1`, the uniform focused on its own minimum
    pub l_uniform: f64,
    /// `L(u, ϖ_0)` at the same coefficient
    pub l_uniform_same_omega: f64,
}

pub fn fig2_rows(specs: &[GeneratorSpec]) -> Result<Vec<MinFocusRow>> {
    specs
        .iter()
        .map(|spec| {
            let dist: FiniteDistribution<f64> = generate(spec)?;
            let p_min = dist.min_prob(true)?;
            let omega = ImportanceCoefficient::new(p_min.recip())?;
            let uniform = FiniteDistribution::<f64>::uniform(dist.len())?;
            Ok(MinFocusRow {
                distribution: spec.label(),
                n: dist.len(),
                p_min,
                omega_0: omega.value(),
                l_0: evaluate(&dist, omega).nats(),
                l_uniform: focused_mim(&uniform, 0)?.nats(),
                l_uniform_same_omega: evaluate(&uniform, omega).nats(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub p: f64,
    pub omega: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCrossing {
    pub p: f64,
    pub omega_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Tables {
    pub surface: Vec<SurfacePoint>,
    pub zeros: Vec<ZeroCrossing>,
}

/// Grid `p = k·p_step` in `(0, 1/2)` and `ϖ = i·ω_step` in `(0, ω_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Grid {
    pub p_step: f64,
    pub omega_step: f64,
    pub omega_max: f64,
}

impl Default for Fig3Grid {
    fn default() -> Self {
        Self {
            p_step: 0.01,
            omega_step: 0.05,
            omega_max: 25.0,
        }
    }
}

/// Evaluates the surface, then for each `p` locates the first sign change
/// along the `ϖ` grid and refines it by bisection inside that cell. Rows of
/// `p` with no crossing below `ω_max` have no zero entry.
pub fn fig3_tables(grid: &Fig3Grid) -> Fig3Tables {
    let p_count = (0.5 / grid.p_step).ceil() as usize;
    let omega_count = (grid.omega_max / grid.omega_step).round() as usize;
    let mut surface = Vec::new();
    let mut zeros = Vec::new();
    for k in 1..p_count {
        let p = k as f64 * grid.p_step;
        if p >= 0.5 {
            break;
        }
        let mut prev: Option<(f64, f64)> = None;
        let mut found = false;
        for i in 1..=omega_count {
            let omega = i as f64 * grid.omega_step;
            let value = g(p, omega);
            surface.push(SurfacePoint { p, omega, g: value });
            if let Some((w0, g0)) = prev {
                if !found && g0 > 0.0 && value <= 0.0 {
                    zeros.push(ZeroCrossing {
                        p,
                        omega_star: refine(p, w0, omega),
                    });
                    found = true;
                }
            }
            prev = Some((omega, value));
        }
    }
    Fig3Tables { surface, zeros }
}

/// Bisection on one grid cell, carried out in quad precision.
fn refine(p: f64, lo: f64, hi: f64) -> f64 {
    let p = Quad::lit(p);
    let half = Quad::lit(0.5);
    let (mut lo, mut hi) = (Quad::lit(lo), Quad::lit(hi));
    for _ in 0..120 {
        let mid = (lo + hi) * half;
        if g(p, mid) > Quad::lit(0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ((lo + hi) * half).to_f64_lossy()
}
