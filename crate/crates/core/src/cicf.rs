//! Classical interpolation continued C-fraction
//!
//! ```text
//! D(x) = a0 + a1 (x - x0) / (1 + a2 (x - x1) / (1 + ... + an (x - x_{n-1}) / 1))
//! ```
//!
//! fitted to values `y_i` at distinct nodes `x_i`. Coefficient `a_k` comes from
//! inverting the fraction at node `x_k`:
//!
//! ```text
//! a_k = 1/(x_k - x_{k-1}) * ( -1 + a_{k-1}(x_k - x_{k-2}) / (-1 + ... + a_1 (x_k - x_0) / (y_k - y_0)) )
//! ```
//!
//! Not every data set admits such a fraction; a vanishing denominator in that
//! chain is reported as a breakdown rather than producing a huge coefficient.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fraction::{FiniteFraction, Floor, FractionError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CicfError {
    #[error("{0}")]
    InvalidInput(String),
    #[error("nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),
    #[error("no C-fraction of this form: breakdown computing coefficient k={k} (floor {floor} of the inverted chain)")]
    Breakdown { k: usize, floor: usize },
    #[error("pole of the fitted fraction: {0}")]
    Pole(FractionError),
}

/// A fitted C-fraction. Both vectors have the same length `n + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cicf<T> {
    nodes: Vec<T>,
    coefficients: Vec<T>,
}

fn check_nodes<T: Scalar>(nodes: &[T]) -> Result<(), CicfError> {
    let (mut lo, mut hi) = (nodes[0].clone(), nodes[0].clone());
    for x in nodes {
        if !x.is_finite_value() {
            return Err(CicfError::InvalidInput("non-finite node".into()));
        }
        if *x < lo {
            lo = x.clone();
        }
        if *x > hi {
            hi = x.clone();
        }
    }
    let tol = T::fit_tolerance() * (hi - lo);
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let gap = nodes[i].clone() - nodes[j].clone();
            if gap.is_zero() || gap.magnitude() <= tol {
                return Err(CicfError::DuplicateNodes(i, j));
            }
        }
    }
    Ok(())
}

impl<T: Scalar> Cicf<T> {
    /// Validates a stored model.
    pub fn from_parts(nodes: Vec<T>, coefficients: Vec<T>) -> Result<Self, CicfError> {
        if nodes.is_empty() || nodes.len() != coefficients.len() {
            return Err(CicfError::InvalidInput(format!(
                "model needs equal, non-zero numbers of nodes and coefficients (got {} and {})",
                nodes.len(),
                coefficients.len()
            )));
        }
        check_nodes(&nodes)?;
        if coefficients.iter().any(|a| !a.is_finite_value()) {
            return Err(CicfError::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Cicf {
            nodes,
            coefficients,
        })
    }

    pub fn fit(nodes: &[T], values: &[T]) -> Result<Self, CicfError> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(CicfError::InvalidInput(format!(
                "need equal, non-zero numbers of nodes and values (got {} and {})",
                nodes.len(),
                values.len()
            )));
        }
        if values.iter().any(|y| !y.is_finite_value()) {
            return Err(CicfError::InvalidInput("non-finite value".into()));
        }
        check_nodes(nodes)?;

        let x = nodes;
        let y = values;
        let rel = T::fit_tolerance();
        let mut a = Vec::with_capacity(x.len());
        a.push(y[0].clone());
        if x.len() > 1 {
            a.push((y[1].clone() - y[0].clone()) / (x[1].clone() - x[0].clone()));
        }
        for k in 2..x.len() {
            let innermost = y[k].clone() - y[0].clone();
            let scale = rel.clone() * (y[k].magnitude() + y[0].magnitude());
            if innermost.is_negligible(&T::breakdown_tolerance()) || innermost.magnitude() <= scale {
                return Err(CicfError::Breakdown { k, floor: k - 1 });
            }
            // floors j = k-1, ..., 1 with numerators a_j (x_k - x_{j-1})
            let floors = (1..k).rev().map(|j| {
                let num = a[j].clone() * (x[k].clone() - x[j - 1].clone());
                let den = if j == 1 { innermost.clone() } else { -T::one() };
                Floor::new(num, den)
            });
            let chain = FiniteFraction::new(-T::one(), floors)
                .map_err(|e| CicfError::InvalidInput(e.to_string()))?;
            let bracket = chain.eval_backward_strict(&rel).map_err(|e| match e {
                FractionError::Breakdown { floor } => CicfError::Breakdown { k, floor },
                other => CicfError::InvalidInput(other.to_string()),
            })?;
            let ak = bracket / (x[k].clone() - x[k - 1].clone());
            if !ak.is_finite_value() {
                return Err(CicfError::Breakdown { k, floor: 0 });
            }
            a.push(ak);
        }
        Ok(Cicf {
            nodes: x.to_vec(),
            coefficients: a,
        })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    /// Number of floors `n`.
    pub fn depth(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// The fraction at `x` as a [`FiniteFraction`] with unit denominators.
    pub fn fraction_at(&self, x: &T) -> Result<FiniteFraction<T>, FractionError> {
        let floors = (1..self.coefficients.len()).map(|i| {
            Floor::new(
                self.coefficients[i].clone() * (x.clone() - self.nodes[i - 1].clone()),
                T::one(),
            )
        });
        FiniteFraction::new(self.coefficients[0].clone(), floors)
    }

    pub fn evaluate(&self, x: &T) -> Result<T, CicfError> {
        self.fraction_at(x)
            .and_then(|cf| cf.eval_backward())
            .map_err(CicfError::Pole)
    }
}

impl Cicf<f64> {
    /// `{ "nodes": [...], "coefficients": [...] }`
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain numeric model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CicfError> {
        let raw: Cicf<f64> = serde_json::from_str(text)
            .map_err(|e| CicfError::InvalidInput(format!("malformed model JSON: {e}")))?;
        Cicf::from_parts(raw.nodes, raw.coefficients)
    }
}
