//! Pick-matrix feasibility tests.
//!
//! For `H∞_B` the data `(z_j, w_j)` is interpolable by a contraction iff
//! `[(1 - w_i conj(w_j)) K^v(z_i, z_j)] >= 0` for every unit `v` in
//! `H^2 ⊖ BH^2`. The sweep below minimizes the smallest eigenvalue of that
//! matrix over the unit sphere of the model space. With matrix targets the
//! same test (blocks `I - W_i W_j^*`) is only a necessary condition.
//!
//! Writing `v = sum_l (Q^{-1/2} c)_l e_l` with `c` a unit vector of `C^m`
//! makes the sphere Euclidean. The Pick matrix is then
//! `P(c) = M0 + (a a^*) ∘ G` where `a_i = v(z_i)` is linear in `c`,
//! `M0 = [(I - W_i W_j^*) B(z_i) conj(B(z_j)) / (1 - z_i conj(z_j))]` and
//! `G = [I - W_i W_j^*]`.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{min_eigen, min_eigenvalue, CMatrix, CVector, ONE};
use crate::modelspace::{
    constrained_kernel, eval_label, grammian, model_space_labels, szego, GrammianRep, ModelVector,
};
use crate::problem::{InterpolationProblem, Targets};

/// Eigenvalues above `-TAU_PSD` count as nonnegative.
pub const TAU_PSD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Feasible,
    /// Minimum eigenvalue within `±tau_psd` of zero.
    BoundaryFeasible,
    Infeasible,
    /// No negative eigenvalue found, but the optimizer did not settle.
    Indeterminate,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::Feasible => "feasible",
            VerdictKind::BoundaryFeasible => "boundary-feasible",
            VerdictKind::Infeasible => "infeasible",
            VerdictKind::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepVerdict {
    pub kind: VerdictKind,
    pub feasible: bool,
    pub min_lambda: f64,
    pub worst_v: ModelVector,
    pub restarts_used: usize,
    /// `min_lambda + tau_psd`; nonnegative exactly when `feasible`.
    pub margin: f64,
    /// Matrix targets: the test is necessary but not sufficient.
    pub necessary_only: bool,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub seed: u64,
    /// Grid points per angle for `m = 2`.
    pub grid_resolution: usize,
    pub restarts: usize,
    /// Best grid points refined by local descent.
    pub polish: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub tau_psd: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            grid_resolution: 256,
            restarts: 64,
            polish: 8,
            max_iters: 400,
            grad_tol: 1e-7,
            tau_psd: TAU_PSD,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct PickReport {
    pub matrix: CMatrix,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// Classical Pick matrix `[(1 - w_i conj(w_j)) / (1 - z_i conj(z_j))]`.
pub fn classical_pick(nodes: &[Complex64], targets: &[Complex64]) -> Result<PickReport> {
    if nodes.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: targets.len(),
        });
    }
    let n = nodes.len();
    let matrix = CMatrix::from_fn(n, n, |i, j| {
        (ONE - targets[i] * targets[j].conj()) * szego(nodes[i], nodes[j])
    });
    let min = if n == 0 { 0.0 } else { min_eigenvalue(&matrix) };
    Ok(PickReport {
        matrix,
        min_eigenvalue: min,
        psd: min >= -TAU_PSD,
    })
}

/// `[(I - W_i W_j^*) K^v(z_i, z_j)]` for a unit vector `v` of the model space.
pub fn constrained_pick_matrix(problem: &InterpolationProblem, v: &ModelVector) -> Result<CMatrix> {
    let b = problem.blaschke();
    let nodes = problem.nodes();
    let blocks = problem.targets().as_blocks();
    let k = problem.block_size();
    let n = nodes.len();
    let mut out = CMatrix::zeros(n * k, n * k);
    for i in 0..n {
        for j in 0..n {
            let kv = constrained_kernel(b, v, nodes[i], nodes[j])?;
            let g = CMatrix::identity(k, k) - &blocks[i] * blocks[j].adjoint();
            out.view_mut((i * k, j * k), (k, k)).copy_from(&(g * kv));
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of the constrained Pick matrix at `v`.
pub fn lambda_min_at(problem: &InterpolationProblem, v: &ModelVector) -> Result<f64> {
    Ok(min_eigenvalue(&constrained_pick_matrix(problem, v)?))
}

/// Precomputed pieces of `P(c)`.
pub(crate) struct SweepContext {
    pub gram: GrammianRep,
    /// `a = A c`, `A[i][l] = (E Q^{-1/2})[i][l]` with `E[i][l] = e_l(z_i)`.
    a: CMatrix,
    m0: CMatrix,
    g: CMatrix,
    blocks: Vec<CMatrix>,
    k: usize,
}

impl SweepContext {
    pub fn new(problem: &InterpolationProblem) -> Result<Self> {
        let labels = model_space_labels(problem.blaschke());
        let gram = grammian(&labels)?;
        let nodes = problem.nodes();
        let n = nodes.len();
        let eval = CMatrix::from_fn(n, labels.len(), |i, l| eval_label(&labels[l], nodes[i]));
        let a = eval * &gram.q_invhalf;
        let blocks = problem.targets().as_blocks();
        let k = problem.block_size();
        let b = problem.blaschke();
        let bz: Vec<Complex64> = nodes.iter().map(|&z| b.value(z)).collect();
        let mut g = CMatrix::zeros(n * k, n * k);
        let mut m0 = CMatrix::zeros(n * k, n * k);
        for i in 0..n {
            for j in 0..n {
                let gij = CMatrix::identity(k, k) - &blocks[i] * blocks[j].adjoint();
                let s = bz[i] * bz[j].conj() * szego(nodes[i], nodes[j]);
                m0.view_mut((i * k, j * k), (k, k)).copy_from(&(&gij * s));
                g.view_mut((i * k, j * k), (k, k)).copy_from(&gij);
            }
        }
        Ok(Self {
            gram,
            a,
            m0,
            g,
            blocks,
            k,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn pick(&self, c: &CVector) -> CMatrix {
        let a = &self.a * c;
        let k = self.k;
        let mut p = self.m0.clone();
        let size = p.nrows();
        for r in 0..size {
            for s in 0..size {
                p[(r, s)] += a[r / k] * a[s / k].conj() * self.g[(r, s)];
            }
        }
        p
    }

    pub fn value(&self, c: &CVector) -> f64 {
        min_eigenvalue(&self.pick(c))
    }

    /// Smallest eigenvalue and its Riemannian gradient on the sphere.
    fn value_grad(&self, c: &CVector) -> (f64, CVector) {
        let (lambda, x) = min_eigen(&self.pick(c));
        let k = self.k;
        let (n, m) = self.a.shape();
        // u_l = sum_i conj(A_il) x_i, w_l = sum_i conj(A_il) W_i^* x_i
        let mut u = CMatrix::zeros(k, m);
        let mut w = CMatrix::zeros(k, m);
        for i in 0..n {
            let xi = x.rows(i * k, k).into_owned();
            let wx = self.blocks[i].adjoint() * &xi;
            for l in 0..m {
                let s = self.a[(i, l)].conj();
                for t in 0..k {
                    u[(t, l)] += s * xi[t];
                    w[(t, l)] += s * wx[t];
                }
            }
        }
        let h = (u.adjoint() * &u - w.adjoint() * &w).transpose();
        let hc = &h * c;
        let rayleigh = c.dotc(&hc);
        let grad = hc - c * rayleigh;
        (lambda, grad)
    }

    /// Riemannian descent from `c`. Returns `(value, point, converged)`.
    fn descend(&self, mut c: CVector, cfg: &SearchConfig) -> (f64, CVector, bool) {
        let (mut val, mut grad) = self.value_grad(&c);
        let mut step = 1.0;
        for _ in 0..cfg.max_iters {
            let gnorm = grad.norm();
            if gnorm < cfg.grad_tol {
                return (val, c, true);
            }
            let mut accepted = false;
            let mut trial_step = step;
            for _ in 0..50 {
                let cand = (&c - &grad * Complex64::new(trial_step, 0.0)).normalize();
                let cand_val = self.value(&cand);
                if cand_val <= val - 1e-4 * trial_step * gnorm * gnorm {
                    c = cand;
                    accepted = true;
                    break;
                }
                trial_step *= 0.5;
            }
            if !accepted {
                // no descent left at double precision: stationary up to rounding
                return (val, c, true);
            }
            step = (trial_step * 2.0).min(1e3);
            let next = self.value_grad(&c);
            val = next.0;
            grad = next.1;
        }
        (val, c, grad.norm() < cfg.grad_tol)
    }

    pub fn model_vector(&self, c: &CVector) -> ModelVector {
        ModelVector {
            labels: self.gram.labels.clone(),
            coeffs: &self.gram.q_invhalf * c,
        }
        .phase_fixed()
    }
}

/// One grid sample of the `m = 2` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    /// Polar angle on the Bloch sphere, `[0, pi]`.
    pub theta1: f64,
    /// Relative phase of the second coordinate, `[0, 2 pi)`.
    pub theta2: f64,
    /// Global phase (always 0 after phase fixing).
    pub phase: f64,
    pub lambda_min: f64,
}

fn bloch(theta1: f64, theta2: f64) -> CVector {
    CVector::from_vec(vec![
        Complex64::new((theta1 / 2.0).cos(), 0.0),
        Complex64::from_polar((theta1 / 2.0).sin(), theta2),
    ])
}

fn grid_on(ctx: &SweepContext, resolution: usize) -> Vec<GridPoint> {
    let res = resolution.max(2);
    (0..res)
        .into_par_iter()
        .flat_map_iter(|i| {
            let theta1 = std::f64::consts::PI * i as f64 / (res - 1) as f64;
            (0..res).map(move |j| {
                let theta2 = std::f64::consts::TAU * j as f64 / res as f64;
                GridPoint {
                    theta1,
                    theta2,
                    phase: 0.0,
                    lambda_min: ctx.value(&bloch(theta1, theta2)),
                }
            })
        })
        .collect()
}

/// `λ_min` on the deterministic `resolution x resolution` grid (only for `m = 2`).
pub fn sweep_grid(problem: &InterpolationProblem, resolution: usize) -> Result<Vec<GridPoint>> {
    let ctx = SweepContext::new(problem)?;
    if ctx.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "grid export needs a two-dimensional model space, got {}",
            ctx.dim()
        )));
    }
    Ok(grid_on(&ctx, resolution))
}

pub fn write_grid_csv(points: &[GridPoint], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "theta1,theta2,phase,lambda_min")?;
    for p in points {
        writeln!(out, "{:e},{:e},{:e},{:e}", p.theta1, p.theta2, p.phase, p.lambda_min)?;
    }
    Ok(())
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    v.normalize()
}

/// Global minimization of `λ_min` over unit vectors of the model space.
pub(crate) fn minimize(ctx: &SweepContext, cfg: &SearchConfig) -> (f64, CVector, usize, bool) {
    let dim = ctx.dim();
    let mut starts: Vec<CVector> = Vec::new();
    if dim == 2 && cfg.grid_resolution > 0 {
        let mut grid = grid_on(ctx, cfg.grid_resolution);
        grid.sort_by(|x, y| x.lambda_min.total_cmp(&y.lambda_min));
        starts.extend(grid.iter().take(cfg.polish).map(|p| bloch(p.theta1, p.theta2)));
    }
    for i in 0..dim {
        let mut e = CVector::zeros(dim);
        e[i] = ONE;
        starts.push(e);
    }
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        starts.push(random_unit(&mut rng, dim));
    }
    let results: Vec<(f64, CVector, bool)> = starts
        .into_par_iter()
        .map(|c| ctx.descend(c, cfg))
        .collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 < results[best].0 {
            best = i;
        }
    }
    let used = results.len();
    let (val, c, conv) = results.into_iter().nth(best).expect("at least one start");
    (val, c, used, conv)
}

fn verdict(ctx: &SweepContext, cfg: &SearchConfig, necessary_only: bool) -> SweepVerdict {
    let (min_lambda, c, used, converged) = minimize(ctx, cfg);
    let tau = cfg.tau_psd;
    let kind = if min_lambda < -tau {
        // any v with a negative eigenvalue certifies infeasibility
        VerdictKind::Infeasible
    } else if !converged {
        VerdictKind::Indeterminate
    } else if min_lambda <= tau {
        VerdictKind::BoundaryFeasible
    } else {
        VerdictKind::Feasible
    };
    SweepVerdict {
        kind,
        feasible: min_lambda >= -tau,
        min_lambda,
        worst_v: ctx.model_vector(&c),
        restarts_used: used,
        margin: min_lambda + tau,
        necessary_only,
        converged,
    }
}

/// Scalar feasibility: sweep over all unit `v`.
pub fn feasibility_sweep(problem: &InterpolationProblem, cfg: &SearchConfig) -> Result<SweepVerdict> {
    if !matches!(problem.targets(), Targets::Scalar(_)) {
        return Err(Error::InvalidParameter(
            "feasibility_sweep needs scalar targets; use matrix_pick_sweep".into(),
        ));
    }
    let ctx = SweepContext::new(problem)?;
    Ok(verdict(&ctx, cfg, false))
}

/// Necessary condition for matrix targets.
pub fn matrix_pick_sweep(problem: &InterpolationProblem, cfg: &SearchConfig) -> Result<SweepVerdict> {
    let ctx = SweepContext::new(problem)?;
    Ok(verdict(&ctx, cfg, true))
}
