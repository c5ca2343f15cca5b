//! Integral functionals `F(x) = f(∫_0^1 x(t) dt)` and continual node systems.
//!
//! A node system holds functions `x_0, ..., x_n` on a shared grid. The
//! continual node `x^i(·, ξ)` equals `x_0` left of `ξ` and `x_i` from `ξ` on
//! (`H(0) = 1`), so its moment is
//!
//! ```text
//! s_i(ξ) = ∫_0^ξ x_0 + ∫_ξ^1 x_i = s_0 + ∫_ξ^1 (x_i - x_0)
//! ```
//!
//! and `d/dξ F(x^i(·, ξ)) = f'(s_i(ξ)) (x_0(ξ) - x_i(ξ))`.

use gauss_quad::legendre::GaussLegendre;
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};
use crate::grid::{GridError, GridFunction, Moment, PiecewiseGrid};
use crate::scalar::{lit, Real};

/// Minimum pointwise gap between any two node functions.
pub const NODE_SEPARATION: f64 = 1e-9;

/// Gauss-Legendre order used for `f(s0 + t) - f(s0) = ∫ f'`.
const INCREMENT_RULE_DEGREE: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionalError {
    #[error("a node system needs at least two node functions (n >= 1), got {0}")]
    TooFewNodes(usize),
    #[error("node functions x_{i} and x_{k} are not separated at grid index {index}")]
    NotSeparated { i: usize, k: usize, index: usize },
    #[error("node index {index} out of range 0..={n}")]
    NodeIndex { index: usize, n: usize },
    #[error("grid index {index} out of range 0..={n_cells}")]
    GridIndex { index: usize, n_cells: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("in {what}: {source}")]
    Parse {
        what: String,
        #[source]
        source: ParseError,
    },
}

/// `F(x) = f(∫ x)` together with the symbolic derivatives of `f`.
#[derive(Debug, Clone)]
pub struct Functional {
    /// `derivs[j]` is `f^{(j)}`, starting with `f` itself.
    derivs: Vec<Expr>,
    rule: Vec<(f64, f64)>,
}

impl Functional {
    /// Caches derivatives up to `order` (at least the first).
    pub fn new(f: Expr, order: usize) -> Self {
        let mut derivs = vec![f];
        for _ in 0..order.max(1) {
            let next = derivs.last().expect("non-empty").derive();
            derivs.push(next);
        }
        let rule = GaussLegendre::new(INCREMENT_RULE_DEGREE)
            .expect("degree >= 2")
            .into_node_weight_pairs();
        Functional { derivs, rule }
    }

    pub fn parse(text: &str, order: usize) -> Result<Self, FunctionalError> {
        let f = Expr::parse(text, "s").map_err(|source| FunctionalError::Parse {
            what: "f".into(),
            source,
        })?;
        Ok(Functional::new(f, order))
    }

    pub fn f(&self) -> &Expr {
        &self.derivs[0]
    }

    /// `f^{(order)}`, derived on demand past the cached order.
    pub fn derivative(&self, order: usize) -> Expr {
        match self.derivs.get(order) {
            Some(e) => e.clone(),
            None => {
                let mut e = self.derivs.last().expect("non-empty").clone();
                for _ in self.derivs.len() - 1..order {
                    e = e.derive();
                }
                e
            }
        }
    }

    pub fn cached_order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn f_at<T: Real>(&self, s: T) -> Result<T, EvalError> {
        self.derivs[0].eval_at(s)
    }

    pub fn f_prime_at<T: Real>(&self, s: T) -> Result<T, EvalError> {
        self.derivs[1].eval_at(s)
    }

    /// `F(x) = f(∫_0^1 x)`.
    pub fn apply<T: Real, M: Moment<T>>(&self, x: &M) -> Result<T, EvalError> {
        self.f_at(x.moment())
    }

    /// `f(s0 + t) - f(s0)`, evaluated as `∫_{s0}^{s0+t} f'` so that small
    /// increments keep full relative accuracy. The weights are normalized by
    /// their computed sum, which makes the result exactly `c t` for `f' = c`.
    pub fn increment<T: Real>(&self, s0: T, t: T) -> Result<T, EvalError> {
        if t == T::zero() {
            return Ok(T::zero());
        }
        let half = t * lit::<T>(0.5);
        let mid = s0 + half;
        let (mut acc, mut total) = (T::zero(), T::zero());
        for &(node, weight) in &self.rule {
            let w = lit::<T>(weight);
            acc = acc + w * self.f_prime_at(mid + half * lit::<T>(node))?;
            total = total + w;
        }
        Ok(t * (acc / total))
    }
}

/// Node functions `x_0..x_n` on one grid plus the functional `F`.
#[derive(Debug, Clone)]
pub struct NodeSystem<T> {
    nodes: Vec<GridFunction<T>>,
    functional: Functional,
    s0: T,
    /// `∫_{ξ_j}^1 (x_k - x_0)` for k = 0..=n.
    gap_tails: Vec<GridFunction<T>>,
}

impl<T: Real> NodeSystem<T> {
    pub fn new(nodes: Vec<GridFunction<T>>, f: Expr) -> Result<Self, FunctionalError> {
        if nodes.len() < 2 {
            return Err(FunctionalError::TooFewNodes(nodes.len().saturating_sub(1)));
        }
        let n_cells = nodes[0].n_cells();
        for x in &nodes[1..] {
            if x.n_cells() != n_cells {
                return Err(GridError::Mismatch(n_cells, x.n_cells()).into());
            }
        }
        let sep = lit::<T>(NODE_SEPARATION);
        for i in 0..nodes.len() {
            for k in i + 1..nodes.len() {
                let close = nodes[i]
                    .values()
                    .iter()
                    .zip(nodes[k].values())
                    .position(|(&a, &b)| (a - b).abs() <= sep);
                if let Some(index) = close {
                    return Err(FunctionalError::NotSeparated { i, k, index });
                }
            }
        }
        let order = (nodes.len() - 2).max(1);
        let functional = Functional::new(f, order);
        let s0 = nodes[0].integral();
        let gap_tails = nodes
            .iter()
            .map(|x| Ok(x.sub(&nodes[0])?.tail_integral_table()))
            .collect::<Result<Vec<_>, GridError>>()?;
        Ok(NodeSystem {
            nodes,
            functional,
            s0,
            gap_tails,
        })
    }

    /// Parses `f` (in `s`) and the node functions (in `z`), sampled on `n_cells`.
    pub fn from_exprs<S: AsRef<str>>(
        f: &str,
        node_exprs: &[S],
        n_cells: usize,
    ) -> Result<Self, FunctionalError> {
        let f = Expr::parse(f, "s").map_err(|source| FunctionalError::Parse {
            what: "f".into(),
            source,
        })?;
        let nodes = node_exprs
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let e = Expr::parse(text.as_ref(), "z").map_err(|source| {
                    FunctionalError::Parse {
                        what: format!("node x_{i}"),
                        source,
                    }
                })?;
                Ok(GridFunction::sample_expression(&e, n_cells)?)
            })
            .collect::<Result<Vec<_>, FunctionalError>>()?;
        NodeSystem::new(nodes, f)
    }

    /// Number of floors `n`.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_cells(&self) -> usize {
        self.nodes[0].n_cells()
    }

    pub fn nodes(&self) -> &[GridFunction<T>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &GridFunction<T> {
        &self.nodes[i]
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    /// `s_0 = ∫ x_0`.
    pub fn base_moment(&self) -> T {
        self.s0
    }

    pub fn xi(&self, j: usize) -> T {
        self.nodes[0].z(j)
    }

    fn check(&self, i: usize, j: usize) -> Result<(), FunctionalError> {
        if i > self.n() {
            return Err(FunctionalError::NodeIndex { index: i, n: self.n() });
        }
        if j > self.n_cells() {
            return Err(FunctionalError::GridIndex {
                index: j,
                n_cells: self.n_cells(),
            });
        }
        Ok(())
    }

    /// `x^i(·, ξ_j)`; `i = 0` gives `x_0` for every `ξ`.
    pub fn continual_node(&self, i: usize, xi_index: usize) -> Result<PiecewiseGrid<T>, FunctionalError> {
        self.check(i, xi_index)?;
        if i == 0 {
            return Ok(PiecewiseGrid::smooth(self.nodes[0].clone()));
        }
        Ok(PiecewiseGrid::step(
            self.nodes[0].clone(),
            self.nodes[i].clone(),
            xi_index,
        )?)
    }

    /// `s_k(ξ_j)`.
    pub fn moment(&self, k: usize, xi_index: usize) -> Result<T, FunctionalError> {
        self.check(k, xi_index)?;
        Ok(self.s0 + self.gap_tails[k].value(xi_index))
    }

    /// `(s_k(ξ_j), d/dξ F(x^k(·, ξ)) at ξ_j)`.
    pub fn moment_and_d_f(&self, k: usize, xi_index: usize) -> Result<(T, T), FunctionalError> {
        let s = self.moment(k, xi_index)?;
        let jump = self.nodes[0].value(xi_index) - self.nodes[k].value(xi_index);
        Ok((s, self.functional.f_prime_at(s)? * jump))
    }

    /// `Δ_k(ξ_j) = F(x^k(·, ξ_j)) - F(x_0)`; exactly zero at `ξ = 1`.
    pub fn delta(&self, k: usize, xi_index: usize) -> Result<T, FunctionalError> {
        self.check(k, xi_index)?;
        Ok(self
            .functional
            .increment(self.s0, self.gap_tails[k].value(xi_index))?)
    }

    /// `F(x^k(·, ξ_j))` computed from the continual node itself.
    pub fn apply_at_node(&self, k: usize, xi_index: usize) -> Result<T, FunctionalError> {
        let node = self.continual_node(k, xi_index)?;
        Ok(self.functional.apply(&node)?)
    }

    /// `f^{(j)}(s_0)` for `j = 1..=n-1` with magnitude below `tol`.
    pub fn degenerate_derivatives(&self, tol: f64) -> Result<Vec<(usize, T)>, FunctionalError> {
        let mut out = Vec::new();
        for order in 1..self.n() {
            let v: T = self.functional.derivative(order).eval_at(self.s0)?;
            if v.abs() < lit::<T>(tol) {
                out.push((order, v));
            }
        }
        Ok(out)
    }
}
