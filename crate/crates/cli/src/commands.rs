use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nevpick_core::cstar::{envelope_report, EnvelopeReport};
use nevpick_core::feasibility::{classical_pick, feasibility_sweep, matrix_pick_sweep, sweep_grid, write_grid_csv};
use nevpick_core::gap::{gap_search_seeds, instance_json, GapConfig, GapOutcome};
use nevpick_core::ideal::{construct_interpolant, construct_matrix_interpolant};
use nevpick_core::lattice::{canonical_form, join, meet, CanonicalForm};
use nevpick_core::modelspace::{grammian, model_space_labels};
use nevpick_core::quotient::{build_compression, is_contraction, quotient_norm};
use nevpick_core::{
    Analytic, BlaschkeProduct, DerivativeKernelLabel, Error, InterpolationProblem, QuotientElement, Targets, VerdictKind,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::config::Loaded;
use crate::report::{cx_vec, matrix, to_json, zeros, Cx, FunctionOut, VectorOut, ZeroOut};
use crate::Failure;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INDETERMINATE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 4;

/// What a command printed and how the process should exit.
pub struct Outcome {
    pub stdout: String,
    pub summary: Option<String>,
    pub code: u8,
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct Shape {
    m: usize,
    n: usize,
    r: usize,
    block_size: usize,
}

fn shape(p: &InterpolationProblem) -> Shape {
    Shape {
        m: p.m(),
        n: p.n(),
        r: p.r(),
        block_size: p.block_size(),
    }
}

#[derive(Serialize)]
struct FeasibilityReport {
    command: &'static str,
    seed: u64,
    problem: Shape,
    verdict: &'static str,
    feasible: bool,
    necessary_only: bool,
    min_lambda: f64,
    margin: f64,
    tau_psd: f64,
    converged: bool,
    restarts_used: usize,
    worst_v: VectorOut,
    classical_pick_min_eigenvalue: Option<f64>,
}

pub fn feasibility(cfg: &Loaded, seed: u64, csv: Option<&Path>, grid: Option<usize>) -> Result<Outcome, Failure> {
    let problem = cfg.problem(true)?;
    let search = cfg.search(seed);
    let sweep = match problem.targets() {
        Targets::Scalar(_) => feasibility_sweep(&problem, &search)?,
        Targets::Matrix(_) => matrix_pick_sweep(&problem, &search)?,
    };
    let classical = match problem.scalar_targets() {
        Some(t) => Some(classical_pick(problem.nodes(), t)?.min_eigenvalue),
        None => None,
    };
    if let Some(path) = csv {
        let points = sweep_grid(&problem, grid.unwrap_or(search.grid_resolution))?;
        let mut out = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
        write_grid_csv(&points, &mut out)
            .and_then(|_| out.flush())
            .map_err(|e| io_err(path, e))?;
    }
    let code = match sweep.kind {
        VerdictKind::Feasible | VerdictKind::BoundaryFeasible => EXIT_OK,
        VerdictKind::Infeasible => EXIT_NEGATIVE,
        VerdictKind::Indeterminate => EXIT_INDETERMINATE,
    };
    let report = FeasibilityReport {
        command: "feasibility",
        seed,
        problem: shape(&problem),
        verdict: sweep.kind.as_str(),
        feasible: sweep.feasible,
        necessary_only: sweep.necessary_only,
        min_lambda: sweep.min_lambda,
        margin: sweep.margin,
        tau_psd: search.tau_psd,
        converged: sweep.converged,
        restarts_used: sweep.restarts_used,
        worst_v: (&sweep.worst_v).into(),
        classical_pick_min_eigenvalue: classical,
    };
    Ok(Outcome {
        stdout: to_json(&report),
        summary: Some(format!("verdict={}, min_lambda={:e}", sweep.kind.as_str(), sweep.min_lambda)),
        code,
    })
}

/// The class of the data; all zero-node targets must agree.
fn data_class(problem: &InterpolationProblem) -> Result<QuotientElement, Failure> {
    let blocks = problem.targets().as_blocks();
    let r = problem.r();
    if let Some(j) = (1..r).find(|&j| (&blocks[j] - &blocks[0]).norm() > 1e-9 * blocks[0].norm().max(1.0)) {
        return Err(Error::InfeasibleByStructure(format!(
            "targets at zeros {} and {} of B differ",
            problem.nodes()[0],
            problem.nodes()[j]
        ))
        .into());
    }
    Ok(QuotientElement::matrix(blocks[0].clone(), blocks[r..].to_vec())?)
}

#[derive(Serialize)]
struct NormReport {
    command: &'static str,
    problem: Shape,
    d: usize,
    quotient_norm: f64,
    contraction: bool,
    contraction_margin: f64,
    tau_psd: f64,
    grammian_condition: f64,
    warnings: Vec<String>,
}

pub fn norm(cfg: &Loaded) -> Result<Outcome, Failure> {
    let problem = cfg.problem(true)?;
    let tau = cfg.search(0).tau_psd;
    let comp = build_compression(&problem)?;
    let elem = data_class(&problem)?;
    let norm = quotient_norm(&elem, &comp)?;
    let contraction = is_contraction(&elem, &comp, tau)?;
    let report = NormReport {
        command: "norm",
        problem: shape(&problem),
        d: comp.dim(),
        quotient_norm: norm,
        contraction: contraction.contraction,
        contraction_margin: contraction.margin,
        tau_psd: tau,
        grammian_condition: comp.gram.condition_number(),
        warnings: comp.gram.warnings.clone(),
    };
    Ok(Outcome {
        stdout: to_json(&report),
        summary: Some(format!("quotient_norm={norm}, contraction={}", contraction.contraction)),
        code: if contraction.contraction { EXIT_OK } else { EXIT_NEGATIVE },
    })
}

#[derive(Serialize)]
struct EnvelopeRow {
    m: usize,
    n_minus_r: usize,
    d: usize,
    algebra_dim: usize,
    commutant_dim: usize,
    full: bool,
    prediction: bool,
    agreement: bool,
    summary: String,
    warnings: Vec<String>,
}

impl From<EnvelopeReport> for EnvelopeRow {
    fn from(r: EnvelopeReport) -> Self {
        Self {
            summary: format!(
                "algebra_dim={}, commutant_dim={}, full={}, prediction={}, agreement={}",
                r.algebra_dim, r.commutant_dim, r.is_full, r.predicted_full, r.agreement
            ),
            m: r.m,
            n_minus_r: r.free_count,
            d: r.d,
            algebra_dim: r.algebra_dim,
            commutant_dim: r.commutant_dim,
            full: r.is_full,
            prediction: r.predicted_full,
            agreement: r.agreement,
            warnings: r.warnings,
        }
    }
}

#[derive(Serialize)]
struct EnvelopeTable {
    command: &'static str,
    cases: Vec<EnvelopeRow>,
}

/// `m` simple zeros (the first at 0, used as a node) and `free` nodes on a
/// circle of radius 0.4 away from them.
fn grid_case(m: usize, free: usize) -> Result<InterpolationProblem, Failure> {
    let c = Complex64::new;
    let zeros = [c(0.0, 0.0), c(0.5, 0.0), c(-0.5, 0.0), c(0.0, -0.6)];
    let b = BlaschkeProduct::from_points(&zeros[..m])?;
    let mut nodes = vec![zeros[0]];
    nodes.extend((0..free).map(|j| Complex64::from_polar(0.4, 0.9 + 1.6 * j as f64)));
    let n = nodes.len();
    Ok(InterpolationProblem::scalar(b, nodes, vec![c(0.0, 0.0); n])?)
}

pub fn envelope(cfg: Option<&Loaded>) -> Result<Outcome, Failure> {
    let problems = match cfg {
        Some(cfg) => vec![cfg.problem(false)?],
        None => {
            let mut out = Vec::new();
            for m in [2, 3, 4] {
                for free in 1..=3 {
                    out.push(grid_case(m, free)?);
                }
            }
            out
        }
    };
    let mut cases = Vec::with_capacity(problems.len());
    for p in &problems {
        cases.push(EnvelopeRow::from(envelope_report(p)?));
    }
    let summary = cases
        .iter()
        .map(|c| {
            if problems.len() == 1 {
                c.summary.clone()
            } else {
                format!("m={} n-r={}: {}", c.m, c.n_minus_r, c.summary)
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let code = if cases.iter().all(|c| c.agreement) { EXIT_OK } else { EXIT_INTERNAL };
    let stdout = if problems.len() == 1 && cfg.is_some() {
        to_json(&cases[0])
    } else {
        to_json(&EnvelopeTable {
            command: "envelope",
            cases,
        })
    };
    Ok(Outcome {
        stdout,
        summary: Some(summary),
        code,
    })
}

#[derive(Serialize)]
struct NodeResidual {
    node: Cx,
    residual: f64,
}

#[derive(Serialize)]
struct ConstructReport {
    command: &'static str,
    seed: u64,
    problem: Shape,
    /// Coefficient `h[k][j]` multiplies `z^j B^(k+1)`.
    form: &'static str,
    function: Option<FunctionOut>,
    matrix_function: Option<Vec<Vec<FunctionOut>>>,
    separation: f64,
    residual: f64,
    node_residuals: Vec<NodeResidual>,
    quotient_norm: Option<f64>,
}

pub fn construct(cfg: &Loaded, seed: u64) -> Result<Outcome, Failure> {
    let problem = cfg.problem(true)?;
    let blocks = problem.targets().as_blocks();
    let (function, matrix_function, separation, residual, node_residuals) = match problem.targets() {
        Targets::Scalar(t) => {
            let h = construct_interpolant(&problem, seed)?;
            let res = problem
                .nodes()
                .iter()
                .zip(t)
                .map(|(&z, &w)| NodeResidual {
                    node: z.into(),
                    residual: (h.function.eval(z) - w).norm(),
                })
                .collect();
            (Some(FunctionOut::from(&h.function)), None, h.separation, h.residual, res)
        }
        Targets::Matrix(_) => {
            let h = construct_matrix_interpolant(&problem, seed)?;
            let res = problem
                .nodes()
                .iter()
                .zip(&blocks)
                .map(|(&z, w)| NodeResidual {
                    node: z.into(),
                    residual: (h.function.eval(z) - w).norm(),
                })
                .collect();
            let entries = h
                .function
                .entries
                .iter()
                .map(|row| row.iter().map(FunctionOut::from).collect())
                .collect();
            (None, Some(entries), h.separation, h.residual, res)
        }
    };
    let quotient_norm = if problem.r() >= 1 {
        Some(quotient_norm(&data_class(&problem)?, &build_compression(&problem)?)?)
    } else {
        None
    };
    let report = ConstructReport {
        command: "construct",
        seed,
        problem: shape(&problem),
        form: "lambda + sum_k sum_j h[k][j] z^j B^(k+1)",
        function,
        matrix_function,
        separation,
        residual,
        node_residuals,
        quotient_norm,
    };
    Ok(Outcome {
        stdout: to_json(&report),
        summary: Some(format!("residual={residual:e}")),
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct CanonicalOut {
    phi: Vec<ZeroOut>,
    theta: Vec<ZeroOut>,
    w_basis: Vec<Vec<Cx>>,
}

impl From<&CanonicalForm> for CanonicalOut {
    fn from(f: &CanonicalForm) -> Self {
        Self {
            phi: zeros(&f.phi),
            theta: zeros(&f.theta),
            w_basis: f.w_basis.iter().map(|p| cx_vec(p.iter().copied())).collect(),
        }
    }
}

#[derive(Serialize)]
struct MeetOut {
    canonical: CanonicalOut,
    lower: Vec<ZeroOut>,
    upper: Vec<ZeroOut>,
    bounds_hold: bool,
}

#[derive(Serialize)]
struct JoinOut {
    canonical: CanonicalOut,
    expected: Vec<ZeroOut>,
    law_holds: bool,
}

#[derive(Serialize)]
struct LatticeReport {
    command: &'static str,
    n: u32,
    canonical: Vec<CanonicalOut>,
    meet: Option<MeetOut>,
    join: Option<JoinOut>,
}

pub fn lattice(cfg: &Loaded) -> Result<Outcome, Failure> {
    let (n, subspaces) = cfg.subspaces()?;
    let canonical = subspaces
        .iter()
        .map(|s| canonical_form(s).map(|f| CanonicalOut::from(&f)))
        .collect::<Result<Vec<_>, _>>()?;
    let (meet_out, join_out) = if let [a, b, ..] = subspaces.as_slice() {
        let m = meet(a, b)?;
        let j = join(a, b)?;
        (
            Some(MeetOut {
                canonical: (&m.canonical).into(),
                lower: zeros(&m.lower),
                upper: zeros(&m.upper),
                bounds_hold: m.bounds_hold,
            }),
            Some(JoinOut {
                canonical: (&j.canonical).into(),
                expected: zeros(&j.expected),
                law_holds: j.law_holds,
            }),
        )
    } else {
        (None, None)
    };
    let summary = match (&meet_out, &join_out) {
        (Some(m), Some(j)) => format!("meet bounds_hold={}, join law_holds={}", m.bounds_hold, j.law_holds),
        _ => format!("{} canonical forms", canonical.len()),
    };
    let report = LatticeReport {
        command: "lattice",
        n,
        canonical,
        meet: meet_out,
        join: join_out,
    };
    Ok(Outcome {
        stdout: to_json(&report),
        summary: Some(summary),
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct SeedOutcome {
    seed: u64,
    found: bool,
    attempts: usize,
    best_margin: Option<f64>,
}

#[derive(Serialize)]
struct GapReport {
    command: &'static str,
    seeds: Vec<u64>,
    budget: usize,
    found: bool,
    outcomes: Vec<SeedOutcome>,
    instance: Option<Value>,
}

pub fn gap_search(cfg: &Loaded, seeds: &[u64], budget: Option<usize>, fixture: Option<&Path>) -> Result<Outcome, Failure> {
    let template = cfg.problem(false)?;
    let g = &cfg.config.gap;
    let search = cfg.search(0);
    let defaults = GapConfig::default();
    let gap_cfg = GapConfig {
        budget: budget.or(g.budget).unwrap_or(defaults.budget),
        block_size: g.block_size.unwrap_or(defaults.block_size),
        excess: g.excess.unwrap_or(defaults.excess),
        inflation: g.inflation.unwrap_or(defaults.inflation),
        screen: nevpick_core::SearchConfig {
            tau_psd: search.tau_psd,
            ..defaults.screen.clone()
        },
        verify: nevpick_core::SearchConfig {
            tau_psd: search.tau_psd,
            ..defaults.verify.clone()
        },
        ..defaults
    };
    let (found, outcomes) = gap_search_seeds(&template, seeds, &gap_cfg)?;
    let outcomes = outcomes
        .iter()
        .map(|o| match o {
            GapOutcome::Found(inst) => SeedOutcome {
                seed: inst.seed,
                found: true,
                attempts: inst.attempt + 1,
                best_margin: Some(inst.verified.sweep_margin),
            },
            GapOutcome::Exhausted {
                seed,
                attempts,
                best_margin,
                ..
            } => SeedOutcome {
                seed: *seed,
                found: false,
                attempts: *attempts,
                best_margin: best_margin.is_finite().then_some(*best_margin),
            },
        })
        .collect();
    let instance = found.as_ref().map(|inst| instance_json(&template, inst, &gap_cfg));
    if let (Some(path), Some(inst)) = (fixture, &instance) {
        let text = serde_json::to_string_pretty(inst).expect("fixture serializes") + "\n";
        std::fs::write(path, text).map_err(|e| io_err(path, e))?;
    }
    let summary = match &found {
        Some(inst) => format!(
            "gap found: seed {} attempt {}, norm {}, sweep margin {:e}",
            inst.seed, inst.attempt, inst.verified.quotient_norm, inst.verified.sweep_margin
        ),
        None => "no gap instance within budget".to_string(),
    };
    let report = GapReport {
        command: "gap-search",
        seeds: seeds.to_vec(),
        budget: gap_cfg.budget,
        found: found.is_some(),
        outcomes,
        instance,
    };
    Ok(Outcome {
        stdout: to_json(&report),
        summary: Some(summary),
        code: if found.is_some() { EXIT_OK } else { EXIT_NEGATIVE },
    })
}

/// `Q` as CSV, each row a run of `re,im` pairs. Labels: the derivative kernels
/// at the zeros of `B`, then the Szegő kernels of the free nodes (all nodes
/// when none is a zero of `B`).
pub fn grammian_csv(cfg: &Loaded) -> Result<Outcome, Failure> {
    let problem = cfg.problem(false)?;
    let mut labels = model_space_labels(problem.blaschke());
    labels.extend(problem.free_nodes().iter().map(|&z| DerivativeKernelLabel::new(z, 0)));
    let g = grammian(&labels)?;
    let mut out = String::new();
    for row in matrix(&g.q) {
        let cells: Vec<String> = row.iter().map(|z| format!("{},{}", z.re, z.im)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(Outcome {
        stdout: out,
        summary: Some(format!("{0}x{0} Grammian, condition {1:e}", g.dim(), g.condition_number())),
        code: EXIT_OK,
    })
}
