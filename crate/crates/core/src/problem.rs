use num_complex::Complex64;

use crate::blaschke::{BlaschkeProduct, ZERO_MATCH_TOL};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Target data: one scalar or one `k x k` matrix per node.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Scalar(Vec<Complex64>),
    Matrix(Vec<CMatrix>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Scalar(v) => v.len(),
            Targets::Matrix(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Block size `k` (1 for scalar targets).
    pub fn block_size(&self) -> usize {
        match self {
            Targets::Scalar(_) => 1,
            Targets::Matrix(v) => v.first().map_or(1, |m| m.nrows()),
        }
    }

    /// Every target as a `k x k` matrix.
    pub fn as_blocks(&self) -> Vec<CMatrix> {
        match self {
            Targets::Scalar(v) => v.iter().map(|&w| CMatrix::from_element(1, 1, w)).collect(),
            Targets::Matrix(v) => v.clone(),
        }
    }

    fn permuted(&self, order: &[usize]) -> Self {
        match self {
            Targets::Scalar(v) => Targets::Scalar(order.iter().map(|&i| v[i]).collect()),
            Targets::Matrix(v) => Targets::Matrix(order.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

/// Interpolation data for `H∞_B`.
///
/// Nodes are reordered on construction so that the first `r` nodes are zeros
/// of `B` and the remaining `n - r` are not; relative order inside each group
/// is preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationProblem {
    b: BlaschkeProduct,
    nodes: Vec<Complex64>,
    targets: Targets,
    r: usize,
    input_index: Vec<usize>,
}

impl InterpolationProblem {
    pub fn new(b: BlaschkeProduct, nodes: Vec<Complex64>, targets: Targets) -> Result<Self> {
        if b.degree() < 2 {
            return Err(Error::InvalidParameter(format!(
                "constraint must have total multiplicity at least 2, got {}",
                b.degree()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("no interpolation nodes".into()));
        }
        if targets.len() != nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: targets.len(),
            });
        }
        if let Targets::Matrix(ws) = &targets {
            let k = ws[0].nrows();
            if k == 0 {
                return Err(Error::InvalidParameter("empty matrix target".into()));
            }
            for w in ws {
                if w.nrows() != k || w.ncols() != k {
                    return Err(Error::InvalidParameter(format!(
                        "matrix targets must all be {k}x{k}, found {}x{}",
                        w.nrows(),
                        w.ncols()
                    )));
                }
            }
        }
        for (i, z) in nodes.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) || z.norm() >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "node {i} = {z} is not in the open unit disk"
                )));
            }
            for (j, w) in nodes[..i].iter().enumerate() {
                if (z - w).norm() < ZERO_MATCH_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "nodes {j} and {i} coincide ({w} vs {z})"
                    )));
                }
            }
        }
        let mut is_zero = Vec::with_capacity(nodes.len());
        for z in &nodes {
            is_zero.push(b.multiplicity_at(*z)? > 0);
        }
        let mut order: Vec<usize> = (0..nodes.len()).filter(|&i| is_zero[i]).collect();
        let r = order.len();
        order.extend((0..nodes.len()).filter(|&i| !is_zero[i]));
        Ok(Self {
            nodes: order.iter().map(|&i| nodes[i]).collect(),
            targets: targets.permuted(&order),
            b,
            r,
            input_index: order,
        })
    }

    pub fn scalar(b: BlaschkeProduct, nodes: Vec<Complex64>, targets: Vec<Complex64>) -> Result<Self> {
        Self::new(b, nodes, Targets::Scalar(targets))
    }

    pub fn blaschke(&self) -> &BlaschkeProduct {
        &self.b
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn scalar_targets(&self) -> Option<&[Complex64]> {
        match &self.targets {
            Targets::Scalar(v) => Some(v),
            Targets::Matrix(_) => None,
        }
    }

    /// Degree of `B`.
    pub fn m(&self) -> usize {
        self.b.degree()
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Number of nodes that are zeros of `B`.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn block_size(&self) -> usize {
        self.targets.block_size()
    }

    pub fn zero_nodes(&self) -> &[Complex64] {
        &self.nodes[..self.r]
    }

    pub fn free_nodes(&self) -> &[Complex64] {
        &self.nodes[self.r..]
    }

    /// Position in the caller's node list of each stored node.
    pub fn input_index(&self) -> &[usize] {
        &self.input_index
    }

    /// Blaschke product with a simple zero at each node.
    pub fn node_blaschke(&self) -> Result<BlaschkeProduct> {
        BlaschkeProduct::from_points(&self.nodes)
    }

    /// Same nodes and constraint with new targets (given in stored node order).
    pub fn with_targets(&self, targets: Targets) -> Result<Self> {
        if targets.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: targets.len(),
            });
        }
        Self::new(self.b.clone(), self.nodes.clone(), targets)
    }
}
