//! Search for matrix data that passes every scalar-kernel Pick test yet has
//! quotient norm above 1.
//!
//! The `v`-parametrized Pick test sees only representations whose irreducible
//! blocks have size at most `(n - r) + 1`, while the quotient lives on
//! `d = m + (n - r)` dimensions. For `m >= 2` some `2 x 2` data must fall in
//! between. The search draws random blocks, rescales them so the exact
//! quotient norm is `1 + excess`, and keeps the first draw whose sweep still
//! passes with a positive margin.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::feasibility::{matrix_pick_sweep, SearchConfig, SweepVerdict};
use crate::ideal::construct_matrix_interpolant;
use crate::linalg::CMatrix;
use crate::problem::{InterpolationProblem, Targets};
use crate::quotient::{build_compression, is_contraction, quotient_norm, CompressionRep, QuotientElement};

#[derive(Debug, Clone)]
pub struct GapConfig {
    /// Random draws per seed before giving up.
    pub budget: usize,
    pub block_size: usize,
    /// Draws are rescaled to quotient norm `1 + excess`.
    pub excess: f64,
    /// The sweep must also pass on targets multiplied by `1 + inflation`.
    pub inflation: f64,
    /// Required normalized sweep margin for a certified instance.
    pub min_margin: f64,
    /// Required quotient norm above 1 for a certified instance.
    pub min_norm_excess: f64,
    pub screen: SearchConfig,
    pub verify: SearchConfig,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            budget: 100_000,
            block_size: 2,
            excess: 0.01,
            inflation: 1e-3,
            min_margin: 1e-6,
            min_norm_excess: 1e-4,
            screen: SearchConfig {
                grid_resolution: 32,
                restarts: 4,
                polish: 2,
                max_iters: 100,
                ..SearchConfig::default()
            },
            verify: SearchConfig {
                grid_resolution: 512,
                restarts: 128,
                polish: 16,
                max_iters: 1000,
                grad_tol: 1e-9,
                ..SearchConfig::default()
            },
        }
    }
}

/// How one set of matrix targets fares under both tests.
///
/// For `r >= 1` the raw sweep minimum is never positive: some unit `v`
/// vanishes at the zeros of `B`, which zeroes a row of the Pick matrix. The
/// margin is therefore certified by scale: if the sweep still passes on
/// `(1 + t) W`, the normalized Pick matrix `K_v^{-1/2} P_v K_v^{-1/2}` is
/// bounded below by `1 - (1 + t)^{-2}` for every `v`.
#[derive(Debug, Clone)]
pub struct GapCheck {
    pub sweep: SweepVerdict,
    pub inflated_sweep: SweepVerdict,
    pub inflation: f64,
    /// `1 - (1 + inflation)^{-2}` when both sweeps pass, else negative.
    pub sweep_margin: f64,
    pub quotient_norm: f64,
    /// `λ_min(Q - D Q D^*)`; negative when the norm exceeds 1.
    pub contraction_margin: f64,
    /// Residual of the entrywise interpolant at the nodes, when one was built.
    pub interpolant_residual: Option<f64>,
    pub is_gap: bool,
}

/// Acceptance thresholds for [`check_instance`].
#[derive(Debug, Clone, Copy)]
pub struct GapCriteria {
    pub inflation: f64,
    pub min_margin: f64,
    pub min_norm_excess: f64,
}

impl From<&GapConfig> for GapCriteria {
    fn from(cfg: &GapConfig) -> Self {
        Self {
            inflation: cfg.inflation,
            min_margin: cfg.min_margin,
            min_norm_excess: cfg.min_norm_excess,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GapInstance {
    pub seed: u64,
    /// Zero-based index of the successful draw.
    pub attempt: usize,
    /// Targets in stored node order (zero nodes first).
    pub targets: Vec<CMatrix>,
    pub screen: GapCheck,
    pub verified: GapCheck,
    pub tau_psd: f64,
    pub criteria: GapCriteria,
}

#[derive(Debug, Clone)]
pub enum GapOutcome {
    Found(Box<GapInstance>),
    Exhausted {
        seed: u64,
        attempts: usize,
        /// Largest screened sweep margin among draws at the target norm.
        best_margin: f64,
        best_targets: Vec<CMatrix>,
    },
}

fn check_template(template: &InterpolationProblem) -> Result<()> {
    let (m, r, n) = (template.m(), template.r(), template.n());
    if r == 0 || m < 2 || n - r < m {
        return Err(Error::InvalidParameter(format!(
            "gap search needs r >= 1, m >= 2 and n - r >= m (got m={m}, n={n}, r={r})"
        )));
    }
    let d = m + n - r;
    if d <= n - r + 1 {
        return Err(Error::Internal(format!("d = {d} does not exceed (n-r)+1")));
    }
    Ok(())
}

fn element(template: &InterpolationProblem, targets: &[CMatrix]) -> Result<QuotientElement> {
    let r = template.r();
    QuotientElement::matrix(targets[0].clone(), targets[r..].to_vec())
}

/// Runs the sweeps and the exact norm on `targets` (stored node order).
pub fn check_instance(
    template: &InterpolationProblem,
    targets: &[CMatrix],
    cfg: &SearchConfig,
    criteria: GapCriteria,
) -> Result<GapCheck> {
    let problem = template.with_targets(Targets::Matrix(targets.to_vec()))?;
    let comp = build_compression(&problem)?;
    check_with(&problem, &comp, cfg, criteria, true)
}

fn check_with(
    problem: &InterpolationProblem,
    comp: &CompressionRep,
    cfg: &SearchConfig,
    criteria: GapCriteria,
    interpolate: bool,
) -> Result<GapCheck> {
    let blocks = problem.targets().as_blocks();
    let r = problem.r();
    let (elem, interpolant_residual) = if interpolate {
        // norm of the class of an actual interpolant, not just of the data
        let interp = construct_matrix_interpolant(problem, cfg.seed)?;
        let nodes = problem.nodes();
        let elem = QuotientElement::matrix(
            interp.function.eval(nodes[0]),
            nodes[r..].iter().map(|&z| interp.function.eval(z)).collect(),
        )?;
        (elem, Some(interp.residual))
    } else {
        (element(problem, &blocks)?, None)
    };
    let norm = quotient_norm(&elem, comp)?;
    let contraction = is_contraction(&elem, comp, cfg.tau_psd)?;
    let norm_ok = norm >= 1.0 + criteria.min_norm_excess && !contraction.contraction;

    let sweep = matrix_pick_sweep(problem, cfg)?;
    let up = Complex64::new(1.0 + criteria.inflation, 0.0);
    let inflated = problem.with_targets(Targets::Matrix(blocks.iter().map(|w| w * up).collect()))?;
    // skip the second sweep when the first already decides
    let inflated_sweep = if sweep.feasible {
        matrix_pick_sweep(&inflated, cfg)?
    } else {
        sweep.clone()
    };
    let sweep_margin = if sweep.feasible && inflated_sweep.feasible {
        1.0 - (1.0 + criteria.inflation).powi(-2)
    } else {
        sweep.min_lambda.min(inflated_sweep.min_lambda)
    };
    Ok(GapCheck {
        is_gap: norm_ok && sweep_margin >= criteria.min_margin,
        sweep,
        inflated_sweep,
        inflation: criteria.inflation,
        sweep_margin,
        quotient_norm: norm,
        contraction_margin: contraction.margin,
        interpolant_residual,
    })
}

fn draw(rng: &mut ChaCha8Rng, template: &InterpolationProblem, k: usize) -> Vec<CMatrix> {
    let mut block = || {
        CMatrix::from_fn(k, k, |_, _| {
            Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
        })
    };
    let common = block();
    let r = template.r();
    let mut out = vec![common; r];
    out.extend((r..template.n()).map(|_| block()));
    out
}

/// Searches one seed. Draws are deterministic in `seed`.
pub fn matrix_gap_search(template: &InterpolationProblem, seed: u64, cfg: &GapConfig) -> Result<GapOutcome> {
    check_template(template)?;
    let comp = build_compression(template)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let criteria = GapCriteria::from(cfg);
    let mut best_margin = f64::NEG_INFINITY;
    let mut best_targets = Vec::new();
    let screen = SearchConfig { seed, ..cfg.screen.clone() };
    let verify = SearchConfig { seed, ..cfg.verify.clone() };
    for attempt in 0..cfg.budget {
        let raw = draw(&mut rng, template, cfg.block_size);
        let norm = quotient_norm(&element(template, &raw)?, &comp)?;
        if norm == 0.0 {
            continue;
        }
        let scale = Complex64::new((1.0 + cfg.excess) / norm, 0.0);
        let targets: Vec<CMatrix> = raw.iter().map(|w| w * scale).collect();
        let problem = template.with_targets(Targets::Matrix(targets.clone()))?;
        let first = check_with(&problem, &comp, &screen, criteria, false)?;
        if first.sweep_margin > best_margin {
            best_margin = first.sweep_margin;
            best_targets = targets.clone();
        }
        if !first.is_gap {
            continue;
        }
        let verified = check_with(&problem, &comp, &verify, criteria, true)?;
        if verified.is_gap {
            return Ok(GapOutcome::Found(Box::new(GapInstance {
                seed,
                attempt,
                targets,
                screen: first,
                verified,
                tau_psd: cfg.verify.tau_psd,
                criteria,
            })));
        }
    }
    Ok(GapOutcome::Exhausted {
        seed,
        attempts: cfg.budget,
        best_margin,
        best_targets,
    })
}

/// Searches all seeds in parallel; the reported instance is the one from the
/// earliest seed in `seeds` that found any.
pub fn gap_search_seeds(
    template: &InterpolationProblem,
    seeds: &[u64],
    cfg: &GapConfig,
) -> Result<(Option<GapInstance>, Vec<GapOutcome>)> {
    let outcomes: Vec<GapOutcome> = seeds
        .par_iter()
        .map(|&s| matrix_gap_search(template, s, cfg))
        .collect::<Result<_>>()?;
    let first = outcomes.iter().find_map(|o| match o {
        GapOutcome::Found(inst) => Some((**inst).clone()),
        GapOutcome::Exhausted { .. } => None,
    });
    Ok((first, outcomes))
}

fn complex_json(c: Complex64) -> Value {
    json!({ "re": c.re, "im": c.im })
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn check_json(c: &GapCheck) -> Value {
    json!({
        "sweep_min_lambda": c.sweep.min_lambda,
        "inflated_sweep_min_lambda": c.inflated_sweep.min_lambda,
        "sweep_margin": c.sweep_margin,
        "sweep_converged": c.sweep.converged && c.inflated_sweep.converged,
        "restarts_used": c.sweep.restarts_used,
        "quotient_norm": c.quotient_norm,
        "norm_excess": c.quotient_norm - 1.0,
        "contraction_margin": c.contraction_margin,
        "interpolant_residual": c.interpolant_residual,
        "is_gap": c.is_gap,
    })
}

/// Fixture record: problem, targets and both sets of margins.
pub fn instance_json(template: &InterpolationProblem, inst: &GapInstance, cfg: &GapConfig) -> Value {
    let zeros: Vec<Value> = template
        .blaschke()
        .zeros()
        .iter()
        .map(|z| json!({ "re": z.alpha.re, "im": z.alpha.im, "mult": z.mult }))
        .collect();
    json!({
        "zeros": zeros,
        "nodes": template.nodes().iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
        "targets": inst.targets.iter().map(matrix_json).collect::<Vec<_>>(),
        "seed": inst.seed,
        "attempt": inst.attempt,
        "tolerances": {
            "tau_psd": inst.tau_psd,
            "inflation": inst.criteria.inflation,
            "min_margin": inst.criteria.min_margin,
            "min_norm_excess": inst.criteria.min_norm_excess,
            "excess": cfg.excess,
            "screen_grid": cfg.screen.grid_resolution,
            "screen_restarts": cfg.screen.restarts,
            "verify_grid": cfg.verify.grid_resolution,
            "verify_restarts": cfg.verify.restarts,
        },
        "screen": check_json(&inst.screen),
        "verified": check_json(&inst.verified),
    })
}

fn parse_complex(v: &Value) -> Result<Complex64> {
    let get = |k: &str| {
        v.get(k)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::InvalidParameter(format!("fixture: missing number '{k}'")))
    };
    Ok(Complex64::new(get("re")?, get("im")?))
}

fn parse_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidParameter(format!("fixture: '{what}' is not an array")))
}

/// Reads the problem (with its matrix targets) back from `instance_json`
/// output.
pub fn problem_from_json(v: &Value) -> Result<InterpolationProblem> {
    let zeros = parse_array(&v["zeros"], "zeros")?
        .iter()
        .map(|z| {
            let mult = z["mult"]
                .as_u64()
                .ok_or_else(|| Error::InvalidParameter("fixture: bad multiplicity".into()))?;
            Ok((parse_complex(z)?, mult as u32))
        })
        .collect::<Result<Vec<_>>>()?;
    let nodes = parse_array(&v["nodes"], "nodes")?
        .iter()
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    let targets = parse_array(&v["targets"], "targets")?
        .iter()
        .map(|m| {
            let rows = parse_array(m, "target")?
                .iter()
                .map(|row| parse_array(row, "row")?.iter().map(parse_complex).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let k = rows.len();
            if rows.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidParameter("fixture: target is not square".into()));
            }
            Ok(CMatrix::from_fn(k, k, |i, j| rows[i][j]))
        })
        .collect::<Result<Vec<_>>>()?;
    let b = crate::blaschke::BlaschkeProduct::new(zeros)?;
    InterpolationProblem::new(b, nodes, Targets::Matrix(targets))
}
