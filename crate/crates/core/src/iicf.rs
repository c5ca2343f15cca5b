//! Continual integral interpolating continued fractions.
//!
//! For a node system `x_0..x_n` and `F(x) = f(∫ x)` the fraction
//!
//! ```text
//! Q_n(x) = a_0 + ∫ a_1(z)[x(z) - x_0(z)] dz / (1 + ∫ a_2(z)[x(z) - x^1(z, ξ)] dz / (1 + ...))
//! ```
//!
//! satisfies `Q_n(x^k(·, ξ)) = F(x^k(·, ξ))` for every `k` and `ξ` once the
//! kernels are `a_0 = F(x_0)`, `a_1 = f'(s_1)` and, for `k >= 2`,
//! `a_k(ξ) = -G_k'(ξ) / (x_k(ξ) - x_{k-1}(ξ))` where
//!
//! ```text
//! G_k = I_{k-1} / (-1 + I_{k-2} / (-1 + ... + I_1 / Δ_k)),
//! I_j(ξ) = ∫_ξ^1 a_j(z)(x_k(z) - x_{j-1}(z)) dz,   Δ_k(ξ) = F(x^k(·, ξ)) - F(x_0).
//! ```
//!
//! `G_k` is a 0/0 quotient at `ξ = 1`; kernels are computed at every other
//! grid point and extended to `ξ = 1` by quadratic extrapolation.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cicf::{Cicf, CicfError};
use crate::expr::EvalError;
use crate::fraction::{FiniteFraction, Floor, FractionDerivativeInput, FractionError};
use crate::functional::{FunctionalError, NodeSystem};
use crate::grid::{GridError, GridFunction, PiecewiseGrid};
use crate::scalar::{lit, Real};

/// Threshold on `|f^{(j)}(s_0)|` below which a warning is attached.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IicfError {
    #[error("tail chain of level {k} breaks down at xi = {xi} (grid index {xi_index}, floor {floor})")]
    Breakdown {
        k: usize,
        xi_index: usize,
        xi: f64,
        floor: usize,
    },
    #[error("Q_n has a pole at grid index {xi_index} (floor {floor})")]
    Pole { xi_index: usize, floor: usize },
    #[error("level {k} out of range {lo}..={hi}")]
    Level { k: usize, lo: usize, hi: usize },
    #[error("grid index {index} out of range (must be below {limit})")]
    GridIndex { index: usize, limit: usize },
    #[error("node function x_{0} is not constant on the grid")]
    NotConstant(usize),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cicf(#[from] CicfError),
}

/// The ingredients of `G_k` on the whole grid, with their exact derivatives.
#[derive(Debug, Clone)]
pub struct TailChain<T> {
    k: usize,
    /// `I_1..I_{k-1}`.
    integrals: Vec<GridFunction<T>>,
    /// `dI_j/dξ = -a_j(ξ)(x_k(ξ) - x_{j-1}(ξ))`.
    rates: Vec<GridFunction<T>>,
    delta: GridFunction<T>,
    delta_rate: GridFunction<T>,
}

impl<T: Real> TailChain<T> {
    /// `kernels` must hold at least `a_1..a_{k-1}`.
    pub fn build(sys: &NodeSystem<T>, kernels: &[GridFunction<T>], k: usize) -> Result<Self, IicfError> {
        if k < 2 || k > sys.n() || kernels.len() < k - 1 {
            return Err(IicfError::Level { k, lo: 2, hi: sys.n().min(kernels.len() + 1) });
        }
        let xk = sys.node(k);
        let mut integrals = Vec::with_capacity(k - 1);
        let mut rates = Vec::with_capacity(k - 1);
        for j in 1..k {
            let integrand = kernels[j - 1].mul(&xk.sub(sys.node(j - 1))?)?;
            integrals.push(integrand.tail_integral_table());
            rates.push(integrand.map(|v| -v)?);
        }
        let n_cells = sys.n_cells();
        let delta = (0..=n_cells)
            .map(|j| sys.delta(k, j))
            .collect::<Result<Vec<_>, _>>()?;
        let delta_rate = (0..=n_cells)
            .map(|j| sys.moment_and_d_f(k, j).map(|(_, d)| d))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TailChain {
            k,
            integrals,
            rates,
            delta: GridFunction::new(delta)?,
            delta_rate: GridFunction::new(delta_rate)?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn integrals(&self) -> &[GridFunction<T>] {
        &self.integrals
    }

    pub fn delta(&self) -> &GridFunction<T> {
        &self.delta
    }

    fn n_cells(&self) -> usize {
        self.delta.n_cells()
    }

    // A vanishing denominator under numerators that all vanish too means the
    // lower levels already reproduce F on x^k; the chain is 0/0 and the
    // consistent completion is G = 1 (so a_k = 0 there).
    fn is_settled(&self, fraction: &FiniteFraction<T>, floor: usize) -> bool {
        let floors = fraction.floors();
        let inner = &floors[floors.len() - 1];
        let scale = inner.num.abs().max(inner.den.abs()) * T::fit_tolerance();
        floors[..floor].iter().all(|fl| fl.num.abs() <= scale)
    }

    /// `(G_k(ξ_j), G_k'(ξ_j))` for `j < N`.
    pub fn tail_fraction(&self, xi_index: usize) -> Result<(T, T), IicfError> {
        let n_cells = self.n_cells();
        if xi_index >= n_cells {
            return Err(IicfError::GridIndex { index: xi_index, limit: n_cells });
        }
        let j = xi_index;
        let breakdown = |e: FractionError| match e {
            FractionError::Breakdown { floor } | FractionError::NonFinite { floor } => IicfError::Breakdown {
                k: self.k,
                xi_index: j,
                xi: j as f64 / n_cells as f64,
                floor,
            },
            FractionError::LengthMismatch { .. } => unreachable!("lengths built together"),
        };
        let minus_one = -T::one();
        let last = self.integrals.len() - 1;
        let mut floors = Vec::with_capacity(self.integrals.len());
        let mut d_floors = Vec::with_capacity(self.integrals.len());
        for i in (0..=last).rev() {
            let (den, d_den) = if i == 0 {
                (self.delta.value(j), self.delta_rate.value(j))
            } else {
                (minus_one, T::zero())
            };
            floors.push(Floor::new(self.integrals[i].value(j), den));
            d_floors.push(Floor::new(self.rates[i].value(j), d_den));
        }
        let fraction = FiniteFraction::new(T::zero(), floors).map_err(breakdown)?;
        let g = match fraction.eval_backward_strict(&T::fit_tolerance()) {
            Ok(g) => g,
            Err(FractionError::Breakdown { floor }) if self.is_settled(&fraction, floor) => {
                return Ok((T::one(), T::zero()));
            }
            Err(e) => return Err(breakdown(e)),
        };
        let (_, dg) = FractionDerivativeInput::new(fraction, T::zero(), d_floors)
            .and_then(|input| input.eval_with_derivative())
            .map_err(breakdown)?;
        Ok((g, dg))
    }
}

/// Kernels `a_0, a_1..a_n` together with the system they interpolate.
#[derive(Debug, Clone)]
pub struct KernelSet<T> {
    a0: T,
    kernels: Vec<GridFunction<T>>,
    sys: NodeSystem<T>,
    warnings: Vec<String>,
    /// `node_tails[k-1][i-1]` is `∫_ξ^1 a_i (x_k - x_{i-1})` for `i <= k`.
    node_tails: Vec<Vec<GridFunction<T>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSidecar {
    pub a0: f64,
    pub n: usize,
    pub grid: usize,
}

/// Residuals `|Q_n(x^k(·, ξ)) - F(x^k(·, ξ))|`; `None` marks a breakdown.
#[derive(Debug, Clone)]
pub struct InterpolationReport<T> {
    pub residuals: Vec<Vec<Option<T>>>,
    pub max_residual: T,
    pub failures: Vec<(usize, usize, String)>,
}

impl<T: Real> InterpolationReport<T> {
    pub fn passed(&self, tolerance: T) -> bool {
        self.failures.is_empty() && self.max_residual <= tolerance
    }
}

#[derive(Debug, Clone)]
pub struct ReductionReport<T> {
    /// `a_0` followed by `∫ a_m` for `m = 1..n`.
    pub integrated: Vec<T>,
    pub classical: Cicf<T>,
    pub a0_gap: T,
    /// `max_m |∫ a_m - a_m^(c)|` over `m >= 1`.
    pub coefficient_gap: T,
}

impl<T: Real> ReductionReport<T> {
    pub fn max_gap(&self) -> T {
        self.a0_gap.max(self.coefficient_gap)
    }
}

/// Quadratic extrapolation to the last sample from the three before it.
fn extrapolate_last<T: Real>(values: &mut [T]) {
    let n = values.len() - 1;
    values[n] = lit::<T>(3.0) * (values[n - 1] - values[n - 2]) + values[n - 3];
}

impl<T: Real> KernelSet<T> {
    pub fn compute(sys: NodeSystem<T>) -> Result<Self, IicfError> {
        let n_cells = sys.n_cells();
        let functional = sys.functional();
        let a0 = functional.apply(sys.node(0))?;

        let warnings = sys
            .degenerate_derivatives(DEGENERACY_THRESHOLD)?
            .into_iter()
            .map(|(order, v)| {
                format!(
                    "f derivative of order {order} is {:e} at s0 = {}; kernels may be inaccurate",
                    v,
                    sys.base_moment()
                )
            })
            .collect();

        // a_1 = f'(s_1) holds up to and including ξ = 1
        let a1 = (0..=n_cells)
            .map(|j| {
                let s = sys.moment(1, j)?;
                Ok(functional.f_prime_at(s)?)
            })
            .collect::<Result<Vec<T>, IicfError>>()?;
        let mut kernels = vec![GridFunction::new(a1)?];

        for k in 2..=sys.n() {
            let chain = TailChain::build(&sys, &kernels, k)?;
            let xk = sys.node(k);
            let prev = sys.node(k - 1);
            let mut values = Vec::with_capacity(n_cells + 1);
            for j in 0..n_cells {
                let (_, dg) = chain.tail_fraction(j)?;
                values.push(-dg / (xk.value(j) - prev.value(j)));
            }
            values.push(T::zero());
            extrapolate_last(&mut values);
            kernels.push(GridFunction::new(values)?);
        }

        let mut node_tails = Vec::with_capacity(sys.n());
        for k in 1..=sys.n() {
            let xk = sys.node(k);
            let row = (1..=k)
                .map(|i| {
                    Ok(kernels[i - 1]
                        .mul(&xk.sub(sys.node(i - 1))?)?
                        .tail_integral_table())
                })
                .collect::<Result<Vec<_>, GridError>>()?;
            node_tails.push(row);
        }

        Ok(KernelSet {
            a0,
            kernels,
            sys,
            warnings,
            node_tails,
        })
    }

    pub fn a0(&self) -> T {
        self.a0
    }

    /// `a_1..a_n`.
    pub fn kernels(&self) -> &[GridFunction<T>] {
        &self.kernels
    }

    /// `a_k` for `k >= 1`.
    pub fn kernel(&self, k: usize) -> &GridFunction<T> {
        &self.kernels[k - 1]
    }

    pub fn system(&self) -> &NodeSystem<T> {
        &self.sys
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n(&self) -> usize {
        self.kernels.len()
    }

    pub fn n_cells(&self) -> usize {
        self.sys.n_cells()
    }

    pub fn tail_chain(&self, k: usize) -> Result<TailChain<T>, IicfError> {
        TailChain::build(&self.sys, &self.kernels, k)
    }

    fn check_xi(&self, xi_index: usize) -> Result<(), IicfError> {
        if xi_index > self.n_cells() {
            return Err(IicfError::GridIndex {
                index: xi_index,
                limit: self.n_cells() + 1,
            });
        }
        Ok(())
    }

    /// `Q_n(x)` with the continual nodes split at `ξ_j`.
    pub fn evaluate_q(&self, x: &PiecewiseGrid<T>, xi_index: usize) -> Result<T, IicfError> {
        self.check_xi(xi_index)?;
        let mut floors = Vec::with_capacity(self.n());
        for i in 1..=self.n() {
            let node = self.sys.continual_node(i - 1, xi_index)?;
            let num = x.sub(&node)?.mul_smooth(self.kernel(i))?.integral();
            floors.push((num, T::one()));
        }
        self.eval_floors(floors, xi_index)
    }

    /// `Q_k(x^k(·, ξ_j))` from the precomputed tail integrals.
    pub fn evaluate_q_at_node(&self, k: usize, xi_index: usize) -> Result<T, IicfError> {
        if k > self.n() {
            return Err(IicfError::Level { k, lo: 0, hi: self.n() });
        }
        self.check_xi(xi_index)?;
        if k == 0 {
            return Ok(self.a0);
        }
        let floors = self.node_tails[k - 1]
            .iter()
            .map(|t| (t.value(xi_index), T::one()))
            .collect();
        self.eval_floors(floors, xi_index)
    }

    fn eval_floors(&self, floors: Vec<(T, T)>, xi_index: usize) -> Result<T, IicfError> {
        let pole = |e: FractionError| match e {
            FractionError::Breakdown { floor } | FractionError::NonFinite { floor } => {
                IicfError::Pole { xi_index, floor }
            }
            FractionError::LengthMismatch { .. } => unreachable!("no derivative input"),
        };
        FiniteFraction::new(self.a0, floors)
            .and_then(|fr| fr.eval_backward())
            .map_err(pole)
    }

    pub fn verify_interpolation(&self) -> InterpolationReport<T> {
        let mut residuals = Vec::with_capacity(self.n() + 1);
        let mut failures = Vec::new();
        let mut max_residual = T::zero();
        for k in 0..=self.n() {
            let mut row = Vec::with_capacity(self.n_cells() + 1);
            for j in 0..=self.n_cells() {
                let cell = self
                    .evaluate_q_at_node(k, j)
                    .and_then(|q| Ok((q - self.sys.apply_at_node(k, j)?).abs()));
                match cell {
                    Ok(r) if r.is_finite() => {
                        max_residual = max_residual.max(r);
                        row.push(Some(r));
                    }
                    Ok(r) => {
                        failures.push((k, j, format!("non-finite residual {r}")));
                        row.push(None);
                    }
                    Err(e) => {
                        failures.push((k, j, e.to_string()));
                        row.push(None);
                    }
                }
            }
            residuals.push(row);
        }
        InterpolationReport {
            residuals,
            max_residual,
            failures,
        }
    }

    /// `K_m(ξ_j)`, the tail chain value whose limit at `ξ = 1` is 1.
    pub fn km_diagnostic(&self, m: usize, xi_index: usize) -> Result<T, IicfError> {
        Ok(self.tail_chain(m)?.tail_fraction(xi_index)?.0)
    }

    /// For constant nodes: compares `∫ a_m` with the point C-ICF through
    /// `(x_i, f(x_i))`.
    pub fn constant_node_reduction(&self) -> Result<ReductionReport<T>, IicfError> {
        let mut points = Vec::with_capacity(self.n() + 1);
        for (i, x) in self.sys.nodes().iter().enumerate() {
            let c = x.value(0);
            let spread = x.values().iter().fold(T::zero(), |m, &v| m.max((v - c).abs()));
            if spread > lit::<T>(1e-12) * (T::one() + c.abs()) {
                return Err(IicfError::NotConstant(i));
            }
            points.push(c);
        }
        let functional = self.sys.functional();
        let values = points
            .iter()
            .map(|&p| functional.f_at(p))
            .collect::<Result<Vec<_>, _>>()?;
        let classical = Cicf::fit(&points, &values)?;
        let mut integrated = vec![self.a0];
        integrated.extend(self.kernels.iter().map(|a| a.integral()));
        let coeffs = classical.coefficients();
        let a0_gap = (integrated[0] - coeffs[0]).abs();
        let coefficient_gap = integrated[1..]
            .iter()
            .zip(&coeffs[1..])
            .fold(T::zero(), |m, (&a, &c)| m.max((a - c).abs()));
        Ok(ReductionReport {
            integrated,
            classical,
            a0_gap,
            coefficient_gap,
        })
    }

    /// Header `xi,a1,...,an`, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = std::iter::once("xi".to_string())
            .chain((1..=self.n()).map(|k| format!("a{k}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for j in 0..=self.n_cells() {
            write!(w, "{:.16e}", self.sys.xi(j))?;
            for a in &self.kernels {
                write!(w, ",{:.16e}", a.value(j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn sidecar(&self) -> KernelSidecar {
        KernelSidecar {
            a0: self.a0.to_f64().unwrap_or(f64::NAN),
            n: self.n(),
            grid: self.n_cells(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked(f: &str, n_cells: usize) -> KernelSet<f64> {
        let sys = NodeSystem::<f64>::from_exprs(f, &["1", "2", "3"], n_cells).unwrap();
        KernelSet::compute(sys).unwrap()
    }

    fn smooth_system(n_cells: usize) -> KernelSet<f64> {
        let sys = NodeSystem::<f64>::from_exprs(
            "exp(s)",
            &["sin(z)/4", "1 + sin(2*z)/4", "2 + sin(3*z)/4"],
            n_cells,
        )
        .unwrap();
        KernelSet::compute(sys).unwrap()
    }

    #[test]
    fn worked_tail_fraction() {
        let ks = worked("s^2", 512);
        let chain = ks.tail_chain(2).unwrap();
        let (g, dg) = chain.tail_fraction(0).unwrap();
        assert!((g - 0.75).abs() < 1e-12, "{g}");
        assert!((dg - 0.125).abs() < 1e-10, "{dg}");
        for j in [64, 256, 448, 511] {
            let xi = j as f64 / 512.0;
            let (g, dg) = chain.tail_fraction(j).unwrap();
            assert!((g - (xi - 3.0) / (2.0 * (xi - 2.0))).abs() < 1e-10);
            assert!((dg - 1.0 / (2.0 * (xi - 2.0).powi(2))).abs() < 1e-8);
        }
        assert!(matches!(
            chain.tail_fraction(512),
            Err(IicfError::GridIndex { index: 512, .. })
        ));
        assert_eq!(chain.integrals()[0].value(512), 0.0);
        assert_eq!(chain.delta().value(512), 0.0);
    }

    #[test]
    fn worked_kernels() {
        let ks = worked("s^2", 512);
        assert_eq!(ks.a0(), 1.0);
        assert!(ks.warnings().is_empty());
        assert!((ks.kernel(1).value(0) - 4.0).abs() < 1e-12);
        assert!((ks.kernel(2).value(0) + 0.125).abs() < 1e-9);
        for j in 0..=512 {
            let xi = j as f64 / 512.0;
            assert!((ks.kernel(1).value(j) - 2.0 * (2.0 - xi)).abs() < 1e-12);
            let exact = -1.0 / (2.0 * (xi - 2.0).powi(2));
            assert!((ks.kernel(2).value(j) - exact).abs() < 1e-7, "j={j}");
        }
    }

    #[test]
    fn kernels_match_finite_differences_of_g() {
        for ks in [worked("s^2", 256), smooth_system(256)] {
            let sys = ks.system();
            let h = 1.0 / 256.0;
            for k in 2..=ks.n() {
                let chain = ks.tail_chain(k).unwrap();
                for j in 1..255 {
                    let gp = chain.tail_fraction(j + 1).unwrap().0;
                    let gm = chain.tail_fraction(j - 1).unwrap().0;
                    let jump = sys.node(k).value(j) - sys.node(k - 1).value(j);
                    let oracle = -(gp - gm) / (2.0 * h) / jump;
                    let a = ks.kernel(k).value(j);
                    assert!((a - oracle).abs() < 1e-5, "k={k} j={j}: {a} vs {oracle}");
                }
            }
        }
    }

    #[test]
    fn q_examples() {
        let ks = worked("s^2", 512);
        let sys = ks.system();
        let x0 = PiecewiseGrid::smooth(sys.node(0).clone());
        assert_eq!(ks.evaluate_q(&x0, 100).unwrap(), 1.0);
        let x2 = PiecewiseGrid::smooth(sys.node(2).clone());
        assert!((ks.evaluate_q(&x2, 0).unwrap() - 9.0).abs() < 1e-8);
        for j in [0, 17, 300, 512] {
            assert_eq!(ks.evaluate_q_at_node(0, j).unwrap(), 1.0);
        }
        assert!((ks.evaluate_q_at_node(1, 0).unwrap() - 4.0).abs() < 1e-12);

        let lin = KernelSet::compute(
            NodeSystem::<f64>::from_exprs("s", &["z", "1 + z*z", "4 - z"], 128).unwrap(),
        )
        .unwrap();
        let x = PiecewiseGrid::from(
            GridFunction::from_fn(128, |z: f64| (2.0 * z).cos() + 4.0).unwrap(),
        );
        let exact = x.integral();
        for j in [0, 64, 128] {
            assert!((lin.evaluate_q(&x, j).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn truncation_matches_full_evaluation() {
        let ks = smooth_system(128);
        for k in 0..=ks.n() {
            for j in (0..=128).step_by(9).chain([127, 128]) {
                let node = ks.system().continual_node(k, j).unwrap();
                let full = ks.evaluate_q(&node, j).unwrap();
                let short = ks.evaluate_q_at_node(k, j).unwrap();
                assert!((full - short).abs() <= 1e-12, "k={k} j={j}: {full} vs {short}");
            }
        }
    }

    #[test]
    fn interpolation_residuals() {
        let coarse = worked("s^2", 256).verify_interpolation();
        let fine = worked("s^2", 512).verify_interpolation();
        assert!(coarse.failures.is_empty() && fine.failures.is_empty());
        assert!(coarse.max_residual <= 1e-6, "{}", coarse.max_residual);
        assert!(fine.max_residual <= 1e-8, "{}", fine.max_residual);
        assert!(fine.residuals[0].iter().all(|r| *r == Some(0.0)));
        assert!(
            fine.max_residual == 0.0 || coarse.max_residual / fine.max_residual >= 8.0,
            "{} / {}",
            coarse.max_residual,
            fine.max_residual
        );
    }

    #[test]
    fn km_limit() {
        let ks = worked("s^2", 512);
        let v = ks.km_diagnostic(2, 256).unwrap();
        assert!((v - 5.0 / 6.0).abs() < 1e-10);
        let gaps: Vec<f64> = (507..512)
            .map(|j| (ks.km_diagnostic(2, j).unwrap() - 1.0).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[4] < 2.0 / 512.0);
        assert!(matches!(ks.km_diagnostic(1, 0), Err(IicfError::Level { .. })));
    }

    #[test]
    fn linear_functional_collapses() {
        let ks = KernelSet::compute(
            NodeSystem::<f64>::from_exprs("s", &["z", "1 + z*z", "4 - z", "6 + sin(z)"], 128).unwrap(),
        )
        .unwrap();
        assert!(ks.kernel(1).values().iter().all(|&v| v == 1.0));
        for k in 2..=3 {
            assert!(ks.kernel(k).values().iter().all(|v| v.abs() < 1e-12), "k={k}");
            for j in [0, 40, 127] {
                assert!((ks.km_diagnostic(k, j).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        let report = ks.verify_interpolation();
        assert!(report.failures.is_empty());
        assert!(report.max_residual <= 1e-13, "{}", report.max_residual);
    }

    #[test]
    fn reduction_to_point_fraction() {
        let ks = worked("s^2", 512);
        let r = ks.constant_node_reduction().unwrap();
        assert!((r.integrated[1] - 3.0).abs() < 1e-10);
        assert!((r.integrated[2] + 0.25).abs() < 1e-9);
        assert!(r.max_gap() <= 1e-9, "{}", r.max_gap());

        let lin = worked("s", 64).constant_node_reduction().unwrap();
        assert_eq!(lin.classical.coefficients()[1], 1.0);
        assert!(lin.max_gap() < 1e-12);

        for f in ["exp(s)", "s^3", "sin(s)"] {
            let sys = NodeSystem::<f64>::from_exprs(f, &["0.5", "1.5"], 512).unwrap();
            let ks = KernelSet::compute(sys).unwrap();
            let r = ks.constant_node_reduction().unwrap();
            let fe = crate::functional::Functional::parse(f, 1).unwrap();
            let dd = (fe.f_at(1.5).unwrap() - fe.f_at(0.5).unwrap()) / 1.0;
            assert!((r.integrated[1] - dd).abs() < 1e-10, "{f}");
        }

        assert!(matches!(smooth_system(64).constant_node_reduction(), Err(IicfError::NotConstant(0))));
    }

    #[test]
    fn degenerate_warning() {
        let sys = NodeSystem::<f64>::from_exprs("s^3", &["0", "1", "2"], 64).unwrap();
        let ks = KernelSet::compute(sys).unwrap();
        assert_eq!(ks.warnings().len(), 1);
    }

    #[test]
    fn single_precision_worked_system() {
        let sys = NodeSystem::<f32>::from_exprs("s^2", &["1", "2", "3"], 64).unwrap();
        let ks = KernelSet::compute(sys).unwrap();
        for j in [0, 16, 40] {
            let xi = j as f32 / 64.0;
            assert!((ks.kernel(1).value(j) - 2.0 * (2.0 - xi)).abs() < 1e-5);
            assert!((ks.kernel(2).value(j) + 0.5 / (xi - 2.0).powi(2)).abs() < 1e-3);
        }
        assert!(ks.verify_interpolation().max_residual < 1e-3);
    }

    #[test]
    fn csv_and_sidecar() {
        let ks = worked("s^2", 8);
        let mut buf = Vec::new();
        ks.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "xi,a1,a2");
        assert_eq!(lines.len(), 10);
        let row: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row[0], 0.0);
        assert_eq!(row[1], 4.0);
        let side = serde_json::to_value(ks.sidecar()).unwrap();
        assert_eq!(side, serde_json::json!({"a0": 1.0, "n": 2, "grid": 8}));
    }
}
