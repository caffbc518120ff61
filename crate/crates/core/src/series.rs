//! Formal power series in ℏ with polynomial coefficients, truncated at a
//! fixed order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// `Σ_{r=0}^{order} coeffs[r]·ℏ^r`. The coefficient list always has exactly
/// `order + 1` entries.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FormalSeries {
    order: usize,
    coeffs: Vec<Polynomial>,
}

impl FormalSeries {
    pub fn zero(num_vars: usize, order: usize) -> Self {
        FormalSeries { order, coeffs: vec![Polynomial::zero(num_vars); order + 1] }
    }

    pub fn from_poly(p: Polynomial, order: usize) -> Self {
        let mut s = FormalSeries::zero(p.num_vars(), order);
        s.coeffs[0] = p;
        s
    }

    pub fn constant(num_vars: usize, c: Scalar, order: usize) -> Self {
        FormalSeries::from_poly(Polynomial::constant(num_vars, c), order)
    }

    /// Builds a series from explicit coefficients; entries past `order` are
    /// dropped and missing ones are zero.
    pub fn from_coeffs(num_vars: usize, coeffs: Vec<Polynomial>, order: usize) -> Result<Self, AlgebraError> {
        let mut s = FormalSeries::zero(num_vars, order);
        for (r, c) in coeffs.into_iter().enumerate() {
            if c.num_vars() != num_vars {
                return Err(AlgebraError::VarCountMismatch { left: num_vars, right: c.num_vars() });
            }
            if r <= order {
                s.coeffs[r] = c;
            }
        }
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs[0].num_vars()
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn coeff(&self, r: usize) -> &Polynomial {
        &self.coeffs[r]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Polynomial::is_zero)
    }

    /// True when every coefficient is a constant polynomial.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Polynomial::is_constant)
    }

    /// The scalar coefficients of a constant series.
    pub fn constants(&self) -> Vec<Scalar> {
        self.coeffs.iter().map(Polynomial::constant_term).collect()
    }

    /// Re-truncates at `order`, padding with zeros when raising it. Padding is
    /// only meaningful for series known to be exact polynomials in ℏ.
    pub fn with_order(&self, order: usize) -> FormalSeries {
        let n = self.num_vars();
        let mut coeffs: Vec<Polynomial> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, Polynomial::zero(n));
        FormalSeries { order, coeffs }
    }

    fn check(&self, other: &FormalSeries) -> Result<usize, AlgebraError> {
        if self.num_vars() != other.num_vars() {
            return Err(AlgebraError::VarCountMismatch { left: self.num_vars(), right: other.num_vars() });
        }
        Ok(self.order.min(other.order))
    }

    pub fn checked_add(&self, other: &FormalSeries) -> Result<FormalSeries, AlgebraError> {
        let order = self.check(other)?;
        let coeffs = (0..=order).map(|r| &self.coeffs[r] + &other.coeffs[r]).collect();
        Ok(FormalSeries { order, coeffs })
    }

    pub fn checked_sub(&self, other: &FormalSeries) -> Result<FormalSeries, AlgebraError> {
        let order = self.check(other)?;
        let coeffs = (0..=order).map(|r| &self.coeffs[r] - &other.coeffs[r]).collect();
        Ok(FormalSeries { order, coeffs })
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn checked_mul(&self, other: &FormalSeries) -> Result<FormalSeries, AlgebraError> {
        let order = self.check(other)?;
        let n = self.num_vars();
        let mut coeffs = vec![Polynomial::zero(n); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        Ok(FormalSeries { order, coeffs })
    }

    pub fn scale(&self, c: &Scalar) -> FormalSeries {
        FormalSeries { order: self.order, coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect() }
    }

    /// Multiplies every coefficient by a polynomial.
    pub fn scale_poly(&self, p: &Polynomial) -> FormalSeries {
        FormalSeries { order: self.order, coeffs: self.coeffs.iter().map(|c| c * p).collect() }
    }

    /// `ℏ^k · F`, keeping the order.
    pub fn scale_by_hbar_power(&self, k: usize) -> FormalSeries {
        let n = self.num_vars();
        let mut coeffs = vec![Polynomial::zero(n); self.order + 1];
        for r in 0..=self.order {
            if r + k <= self.order {
                coeffs[r + k] = self.coeffs[r].clone();
            }
        }
        FormalSeries { order: self.order, coeffs }
    }

    /// `F / ℏ`. The top coefficient of the quotient is unknown after
    /// truncation, so the result has order `order - 1`.
    pub fn divide_by_hbar(&self) -> Result<FormalSeries, AlgebraError> {
        if !self.coeffs[0].is_zero() {
            return Err(AlgebraError::NotDivisible(self.coeffs[0].to_string()));
        }
        if self.order == 0 {
            return Err(AlgebraError::NotDivisible("order-0 series has no quotient".into()));
        }
        Ok(FormalSeries { order: self.order - 1, coeffs: self.coeffs[1..].to_vec() })
    }

    /// Applies a coefficientwise linear map.
    pub fn map_coeffs<F: FnMut(&Polynomial) -> Polynomial>(&self, f: F) -> FormalSeries {
        FormalSeries { order: self.order, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Largest total degree over all coefficients.
    pub fn degree(&self) -> u32 {
        self.coeffs.iter().filter_map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn display_with(&self, names: &[&str]) -> String {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(r, c)| match r {
                0 => c.display_with(names),
                1 => format!("hbar*({})", c.display_with(names)),
                _ => format!("hbar^{r}*({})", c.display_with(names)),
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn from_json(num_vars: usize, v: &serde_json::Value) -> Result<FormalSeries, AlgebraError> {
        #[derive(Deserialize)]
        struct Repr {
            order: usize,
            coeffs: Vec<serde_json::Value>,
        }
        let r: Repr = serde_json::from_value(v.clone()).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        if r.coeffs.len() != r.order + 1 {
            return Err(AlgebraError::Parse(format!(
                "series of order {} needs {} coefficients, found {}",
                r.order,
                r.order + 1,
                r.coeffs.len()
            )));
        }
        let coeffs = r.coeffs.iter().map(|c| Polynomial::from_json(num_vars, c)).collect::<Result<_, _>>()?;
        FormalSeries::from_coeffs(num_vars, coeffs, r.order)
    }
}

/// The ℏ⁰ coefficient.
pub fn classical_limit(f: &FormalSeries) -> Polynomial {
    f.coeffs[0].clone()
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl fmt::Debug for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalSeries[order {}]({})", self.order, self)
    }
}

impl<'a> Add<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn add(self, o: &FormalSeries) -> FormalSeries {
        self.checked_add(o).expect("series variable count mismatch")
    }
}

impl<'a> Sub<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn sub(self, o: &FormalSeries) -> FormalSeries {
        self.checked_sub(o).expect("series variable count mismatch")
    }
}

impl<'a> Mul<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn mul(self, o: &FormalSeries) -> FormalSeries {
        self.checked_mul(o).expect("series variable count mismatch")
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        self.scale(&Scalar::from_int(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y1() -> Polynomial {
        Polynomial::var(2, 0)
    }

    fn series(cs: Vec<Polynomial>, order: usize) -> FormalSeries {
        FormalSeries::from_coeffs(2, cs, order).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let one = Polynomial::one(2);
        let a = series(vec![one.clone(), y1()], 2);
        let b = series(vec![one.clone(), -&y1()], 2);
        let expected = series(vec![one, Polynomial::zero(2), -&y1().pow(2)], 2);
        assert_eq!(&a * &b, expected);
    }

    #[test]
    fn divide_by_hbar_shifts() {
        let y2 = Polynomial::var(2, 1);
        let f = series(vec![Polynomial::zero(2), y1(), y2.clone()], 2);
        let q = f.divide_by_hbar().unwrap();
        assert_eq!(q, series(vec![y1(), y2], 1));
        assert_eq!(q.order(), 1);
    }

    #[test]
    fn divide_by_hbar_rejects_constant_term() {
        let f = series(vec![Polynomial::one(2), y1()], 2);
        assert!(matches!(f.divide_by_hbar(), Err(AlgebraError::NotDivisible(_))));
    }

    #[test]
    fn classical_limit_extracts_leading_coefficient() {
        let y2 = Polynomial::var(2, 1);
        assert_eq!(classical_limit(&series(vec![y1(), y2], 3)), y1());
        assert!(classical_limit(&FormalSeries::zero(2, 3)).is_zero());
    }

    #[test]
    fn mixed_orders_truncate_to_min() {
        let a = series(vec![y1(), y1()], 3);
        let b = series(vec![y1()], 1);
        assert_eq!((&a * &b).order(), 1);
        assert_eq!((&a + &b).order(), 1);
    }

    #[test]
    fn hbar_power_scaling() {
        let a = series(vec![y1(), y1()], 2);
        let s = a.scale_by_hbar_power(1);
        assert_eq!(s, series(vec![Polynomial::zero(2), y1(), y1()], 2));
    }
}
