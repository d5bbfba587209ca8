//! TOML problem files.
//!
//! ```toml
//! seed = 7
//! zeros = [{ re = 0.0, im = 0.0, mult = 1 }, { re = 0.5, im = 0.0 }]
//! nodes = [{ re = 0.0, im = 0.0 }, 0.3, { re = 0.0, im = -0.4 }]
//! targets = [0.0, 0.2, { re = 0.1, im = 0.1 }]
//! ```
//!
//! A number is either a real literal or `{ re, im }`. Matrix data goes in
//! `matrix_targets`, one array of rows per node. Optional tables: `[search]`,
//! `[tolerances]`, `[gap]` and `[lattice]`.

use std::fmt;
use std::ops::Range;
use std::path::Path;

use nevpick_core::lattice::InvariantSubspace;
use nevpick_core::linalg::CMatrix;
use nevpick_core::{BlaschkeProduct, InterpolationProblem, SearchConfig, Targets};
use num_complex::Complex64;
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}: {}", self.file, line, self.field, self.message),
            None => write!(f, "{}: {}: {}", self.file, self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Complex {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl Num {
    pub fn value(self) -> Complex64 {
        match self {
            Num::Real(x) => Complex64::new(x, 0.0),
            Num::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroRecord {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default = "one")]
    pub mult: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchTable {
    pub grid_resolution: Option<usize>,
    pub restarts: Option<usize>,
    pub polish: Option<usize>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceTable {
    pub tau_psd: Option<f64>,
    pub grad_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapTable {
    pub budget: Option<usize>,
    pub block_size: Option<usize>,
    pub excess: Option<f64>,
    pub inflation: Option<f64>,
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceRecord {
    #[serde(default)]
    pub psi: Vec<Spanned<ZeroRecord>>,
    /// Ascending coefficients of each polynomial of `V`.
    pub v: Vec<Vec<Num>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeTable {
    pub n: u32,
    pub subspaces: Vec<Spanned<SubspaceRecord>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub zeros: Vec<Spanned<ZeroRecord>>,
    #[serde(default)]
    pub nodes: Vec<Spanned<Num>>,
    pub targets: Option<Vec<Spanned<Num>>>,
    pub matrix_targets: Option<Vec<Spanned<Vec<Vec<Num>>>>>,
    #[serde(default)]
    pub search: SearchTable,
    #[serde(default)]
    pub tolerances: ToleranceTable,
    #[serde(default)]
    pub gap: GapTable,
    pub lattice: Option<LatticeTable>,
}

/// A parsed config together with its source text, for diagnostics.
pub struct Loaded {
    pub config: ProblemConfig,
    file: String,
    text: String,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: file.clone(),
        line: None,
        field: "file".into(),
        message: e.to_string(),
    })?;
    parse(&text, &file)
}

pub fn parse(text: &str, file: &str) -> Result<Loaded, ConfigError> {
    let config: ProblemConfig = toml::from_str(text).map_err(|e| ConfigError {
        file: file.into(),
        line: e.span().map(|s| line_of(text, s.start)),
        field: "syntax".into(),
        message: e.message().to_string(),
    })?;
    Ok(Loaded {
        config,
        file: file.into(),
        text: text.into(),
    })
}

impl Loaded {
    fn err(&self, span: Option<Range<usize>>, field: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.file.clone(),
            line: span.map(|s| line_of(&self.text, s.start)),
            field: field.into(),
            message: message.into(),
        }
    }

    fn point(&self, value: Complex64, span: Range<usize>, field: String) -> Result<Complex64, ConfigError> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(self.err(Some(span), field, "not a finite number"));
        }
        if value.norm() >= 1.0 {
            return Err(self.err(
                Some(span),
                field,
                format!("|{value}| = {} must be < 1", value.norm()),
            ));
        }
        Ok(value)
    }

    fn zeros(&self, records: &[Spanned<ZeroRecord>], field: &str) -> Result<Vec<(Complex64, u32)>, ConfigError> {
        records
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                let z = rec.get_ref();
                let name = format!("{field}[{i}]");
                if z.mult == 0 {
                    return Err(self.err(Some(rec.span()), name, "multiplicity must be at least 1"));
                }
                Ok((self.point(Complex64::new(z.re, z.im), rec.span(), name)?, z.mult))
            })
            .collect()
    }

    pub fn blaschke(&self) -> Result<BlaschkeProduct, ConfigError> {
        if self.config.zeros.is_empty() {
            return Err(self.err(None, "zeros", "at least one zero is required"));
        }
        let zeros = self.zeros(&self.config.zeros, "zeros")?;
        BlaschkeProduct::new(zeros).map_err(|e| self.err(self.config.zeros.first().map(|z| z.span()), "zeros", e.to_string()))
    }

    fn nodes(&self) -> Result<Vec<Complex64>, ConfigError> {
        if self.config.nodes.is_empty() {
            return Err(self.err(None, "nodes", "at least one node is required"));
        }
        self.config
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| self.point(n.get_ref().value(), n.span(), format!("nodes[{i}]")))
            .collect()
    }

    fn targets(&self, required: bool, count: usize) -> Result<Targets, ConfigError> {
        match (&self.config.targets, &self.config.matrix_targets) {
            (Some(_), Some(_)) => Err(self.err(None, "targets", "give either targets or matrix_targets, not both")),
            (Some(t), None) => {
                let values = t
                    .iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let v = w.get_ref().value();
                        if v.re.is_finite() && v.im.is_finite() {
                            Ok(v)
                        } else {
                            Err(self.err(Some(w.span()), format!("targets[{i}]"), "not a finite number"))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if values.len() != count {
                    return Err(self.err(
                        t.first().map(|w| w.span()),
                        "targets",
                        format!("{} targets for {count} nodes", values.len()),
                    ));
                }
                Ok(Targets::Scalar(values))
            }
            (None, Some(m)) => {
                let mut blocks = Vec::with_capacity(m.len());
                let k = m.first().map_or(0, |b| b.get_ref().len());
                for (i, block) in m.iter().enumerate() {
                    let rows = block.get_ref();
                    let field = format!("matrix_targets[{i}]");
                    if k == 0 || rows.len() != k || rows.iter().any(|r| r.len() != k) {
                        return Err(self.err(Some(block.span()), field, format!("expected a nonempty {k}x{k} matrix")));
                    }
                    blocks.push(CMatrix::from_fn(k, k, |a, b| rows[a][b].value()));
                }
                if blocks.len() != count {
                    return Err(self.err(
                        m.first().map(|w| w.span()),
                        "matrix_targets",
                        format!("{} targets for {count} nodes", blocks.len()),
                    ));
                }
                Ok(Targets::Matrix(blocks))
            }
            (None, None) if required => Err(self.err(None, "targets", "missing (give targets or matrix_targets)")),
            (None, None) => Ok(Targets::Scalar(vec![Complex64::new(0.0, 0.0); count])),
        }
    }

    /// The interpolation problem. Without `required_targets`, missing targets
    /// default to zero (commands that only use `B` and the nodes).
    pub fn problem(&self, required_targets: bool) -> Result<InterpolationProblem, ConfigError> {
        let b = self.blaschke()?;
        let nodes = self.nodes()?;
        let targets = self.targets(required_targets, nodes.len())?;
        InterpolationProblem::new(b, nodes, targets).map_err(|e| self.err(None, "problem", e.to_string()))
    }

    pub fn search(&self, seed: u64) -> SearchConfig {
        let s = &self.config.search;
        let t = &self.config.tolerances;
        let d = SearchConfig::with_seed(seed);
        SearchConfig {
            grid_resolution: s.grid_resolution.unwrap_or(d.grid_resolution),
            restarts: s.restarts.unwrap_or(d.restarts),
            polish: s.polish.unwrap_or(d.polish),
            max_iters: s.max_iters.unwrap_or(d.max_iters),
            grad_tol: t.grad_tol.unwrap_or(d.grad_tol),
            tau_psd: t.tau_psd.unwrap_or(d.tau_psd),
            ..d
        }
    }

    pub fn subspaces(&self) -> Result<(u32, Vec<InvariantSubspace>), ConfigError> {
        let lattice = self
            .config
            .lattice
            .as_ref()
            .ok_or_else(|| self.err(None, "lattice", "missing [lattice] table"))?;
        let out = lattice
            .subspaces
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                let field = format!("lattice.subspaces[{i}]");
                let s = rec.get_ref();
                let psi = BlaschkeProduct::new(self.zeros(&s.psi, &format!("{field}.psi"))?)
                    .map_err(|e| self.err(Some(rec.span()), field.clone(), e.to_string()))?;
                let v = s.v.iter().map(|p| p.iter().map(|c| c.value()).collect()).collect();
                InvariantSubspace::new(psi, v, lattice.n).map_err(|e| self.err(Some(rec.span()), field, e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((lattice.n, out))
    }
}
