//! Finite continued fractions `b0 + a1/(b1 + a2/(b2 + ... + an/bn))`.
//!
//! Backward (innermost-first) evaluation is the runtime path. The forward
//! three-term recurrence for numerator and denominator convergents is kept as
//! an independent route, and is the one that carries first derivatives.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FractionError {
    /// The denominator of floor `floor` (1-based; 0 would be the whole fraction)
    /// vanished or fell below the breakdown tolerance.
    #[error("continued fraction breakdown: denominator of floor {floor} vanished")]
    Breakdown { floor: usize },
    #[error("non-finite entry in floor {floor}")]
    NonFinite { floor: usize },
    #[error("derivative input has {got} floors, fraction has {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// One level `a_i / (b_i + ...)` of a continued fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Floor<T> {
    pub num: T,
    pub den: T,
}

impl<T> Floor<T> {
    pub fn new(num: T, den: T) -> Self {
        Floor { num, den }
    }
}

impl<T> From<(T, T)> for Floor<T> {
    fn from((num, den): (T, T)) -> Self {
        Floor { num, den }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFraction<T> {
    b0: T,
    floors: Vec<Floor<T>>,
}

/// Final numerator/denominator convergents of the forward recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergents<T> {
    pub numerator: T,
    pub denominator: T,
    pub value: T,
}

impl<T: Scalar> FiniteFraction<T> {
    pub fn new<I, F>(b0: T, floors: I) -> Result<Self, FractionError>
    where
        I: IntoIterator<Item = F>,
        F: Into<Floor<T>>,
    {
        if !b0.is_finite_value() {
            return Err(FractionError::NonFinite { floor: 0 });
        }
        let floors: Vec<Floor<T>> = floors.into_iter().map(Into::into).collect();
        for (i, fl) in floors.iter().enumerate() {
            if !fl.num.is_finite_value() || !fl.den.is_finite_value() {
                return Err(FractionError::NonFinite { floor: i + 1 });
            }
        }
        Ok(FiniteFraction { b0, floors })
    }

    /// The fraction consisting of `b0` alone.
    pub fn constant(b0: T) -> Result<Self, FractionError> {
        Self::new(b0, Vec::<Floor<T>>::new())
    }

    pub fn b0(&self) -> &T {
        &self.b0
    }

    pub fn floors(&self) -> &[Floor<T>] {
        &self.floors
    }

    /// Number of floors `n`.
    pub fn depth(&self) -> usize {
        self.floors.len()
    }

    pub fn push_floor(&mut self, num: T, den: T) -> Result<(), FractionError> {
        if !num.is_finite_value() || !den.is_finite_value() {
            return Err(FractionError::NonFinite {
                floor: self.floors.len() + 1,
            });
        }
        self.floors.push(Floor { num, den });
        Ok(())
    }

    /// Innermost-first evaluation.
    ///
    /// A floor with an exactly zero partial numerator terminates the fraction:
    /// everything below it is ignored, so a vanishing denominator there is not a
    /// breakdown.
    pub fn eval_backward(&self) -> Result<T, FractionError> {
        let tol = T::breakdown_tolerance();
        let len = self
            .floors
            .iter()
            .position(|fl| fl.num.is_zero())
            .unwrap_or(self.floors.len());
        if len == 0 {
            return Ok(self.b0.clone());
        }
        // `tail` holds the full denominator of floor i (1-based).
        let mut tail = self.floors[len - 1].den.clone();
        for i in (1..len).rev() {
            if tail.is_negligible(&tol) {
                return Err(FractionError::Breakdown { floor: i + 1 });
            }
            tail = self.floors[i - 1].den.clone() + self.floors[i].num.clone() / tail;
        }
        if tail.is_negligible(&tol) {
            return Err(FractionError::Breakdown { floor: 1 });
        }
        Ok(self.b0.clone() + self.floors[0].num.clone() / tail)
    }

    /// Backward evaluation in which every floor counts: zero numerators do not
    /// truncate, and an intermediate denominator `b_i + q` counts as vanished
    /// when `|b_i + q| <= rel * (|b_i| + |q|)` (cancellation to relative
    /// level `rel`). The innermost `b_n` is only checked against the absolute
    /// breakdown tolerance.
    pub fn eval_backward_strict(&self, rel: &T) -> Result<T, FractionError> {
        let tol = T::breakdown_tolerance();
        let n = self.floors.len();
        if n == 0 {
            return Ok(self.b0.clone());
        }
        let mut tail = self.floors[n - 1].den.clone();
        for i in (1..n).rev() {
            if tail.is_negligible(&tol) {
                return Err(FractionError::Breakdown { floor: i + 1 });
            }
            let b = self.floors[i - 1].den.clone();
            let q = self.floors[i].num.clone() / tail;
            let scale = rel.clone() * (b.magnitude() + q.magnitude());
            tail = b + q;
            if tail.magnitude() <= scale {
                return Err(FractionError::Breakdown { floor: i });
            }
        }
        if tail.is_negligible(&tol) {
            return Err(FractionError::Breakdown { floor: 1 });
        }
        Ok(self.b0.clone() + self.floors[0].num.clone() / tail)
    }

    /// Three-term recurrence `A_i = b_i A_{i-1} + a_i A_{i-2}` (same for `B`),
    /// with `A_{-1} = 1, B_{-1} = 0, A_0 = b0, B_0 = 1`.
    pub fn eval_forward(&self) -> Result<Convergents<T>, FractionError> {
        let (mut a_prev, mut a_cur) = (T::one(), self.b0.clone());
        let (mut b_prev, mut b_cur) = (T::zero(), T::one());
        for fl in &self.floors {
            let a_next = fl.den.clone() * a_cur.clone() + fl.num.clone() * a_prev;
            let b_next = fl.den.clone() * b_cur.clone() + fl.num.clone() * b_prev;
            a_prev = std::mem::replace(&mut a_cur, a_next);
            b_prev = std::mem::replace(&mut b_cur, b_next);
        }
        if b_cur.is_negligible(&T::breakdown_tolerance()) {
            return Err(FractionError::Breakdown {
                floor: self.floors.len(),
            });
        }
        let value = a_cur.clone() / b_cur.clone();
        Ok(Convergents {
            numerator: a_cur,
            denominator: b_cur,
            value,
        })
    }
}

/// A fraction together with the derivatives of each of its entries along
/// some parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionDerivativeInput<T> {
    pub base: FiniteFraction<T>,
    pub d_b0: T,
    pub d_floors: Vec<Floor<T>>,
}

impl<T: Scalar> FractionDerivativeInput<T> {
    pub fn new(
        base: FiniteFraction<T>,
        d_b0: T,
        d_floors: Vec<Floor<T>>,
    ) -> Result<Self, FractionError> {
        if d_floors.len() != base.depth() {
            return Err(FractionError::LengthMismatch {
                expected: base.depth(),
                got: d_floors.len(),
            });
        }
        Ok(FractionDerivativeInput {
            base,
            d_b0,
            d_floors,
        })
    }

    /// Value of the fraction and its derivative, by co-propagating
    /// `A'_i = b'_i A_{i-1} + b_i A'_{i-1} + a'_i A_{i-2} + a_i A'_{i-2}`
    /// (and `B'` likewise) through the forward recurrence.
    pub fn eval_with_derivative(&self) -> Result<(T, T), FractionError> {
        if self.d_floors.len() != self.base.depth() {
            return Err(FractionError::LengthMismatch {
                expected: self.base.depth(),
                got: self.d_floors.len(),
            });
        }
        let (mut a_prev, mut a_cur) = (T::one(), self.base.b0.clone());
        let (mut da_prev, mut da_cur) = (T::zero(), self.d_b0.clone());
        let (mut b_prev, mut b_cur) = (T::zero(), T::one());
        let (mut db_prev, mut db_cur) = (T::zero(), T::zero());

        for (fl, dfl) in self.base.floors.iter().zip(&self.d_floors) {
            let (a, b, da, db) = (&fl.num, &fl.den, &dfl.num, &dfl.den);
            let a_next = b.clone() * a_cur.clone() + a.clone() * a_prev.clone();
            let da_next = db.clone() * a_cur.clone()
                + b.clone() * da_cur.clone()
                + da.clone() * a_prev
                + a.clone() * da_prev;
            let b_next = b.clone() * b_cur.clone() + a.clone() * b_prev.clone();
            let db_next = db.clone() * b_cur.clone()
                + b.clone() * db_cur.clone()
                + da.clone() * b_prev
                + a.clone() * db_prev;
            a_prev = std::mem::replace(&mut a_cur, a_next);
            da_prev = std::mem::replace(&mut da_cur, da_next);
            b_prev = std::mem::replace(&mut b_cur, b_next);
            db_prev = std::mem::replace(&mut db_cur, db_next);
        }

        if b_cur.is_negligible(&T::breakdown_tolerance()) {
            return Err(FractionError::Breakdown {
                floor: self.base.depth(),
            });
        }
        let value = a_cur.clone() / b_cur.clone();
        let d_value =
            (da_cur * b_cur.clone() - a_cur * db_cur) / (b_cur.clone() * b_cur);
        Ok((value, d_value))
    }
}
