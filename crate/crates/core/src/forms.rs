//! Formal series of closed 2-forms `Ω = Σ_{r≥1} ℏ^r Ω_r` with polynomial
//! coefficients.

use std::collections::BTreeMap;

use crate::error::{AlgebraError, QuantumError};
use crate::poly::Polynomial;
use crate::series::FormalSeries;
use crate::symplectic::{eval_two_form, VectorField};

pub type TwoForm = Vec<Vec<Polynomial>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoFormSeries {
    dim: usize,
    terms: BTreeMap<usize, TwoForm>,
}

impl TwoFormSeries {
    pub fn zero(dim: usize) -> Self {
        TwoFormSeries { dim, terms: BTreeMap::new() }
    }

    /// Builds from `(ℏ power, component matrix)` pairs; repeated powers add.
    /// Rejects an `ℏ⁰` term, non-antisymmetric components and non-closed forms.
    pub fn new(dim: usize, parts: Vec<(usize, TwoForm)>) -> Result<Self, QuantumError> {
        let mut terms: BTreeMap<usize, TwoForm> = BTreeMap::new();
        for (r, m) in parts {
            if r == 0 {
                return Err(QuantumError::OmegaHasClassicalTerm);
            }
            if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                return Err(AlgebraError::DimensionMismatch { expected: dim, found: m.len() }.into());
            }
            if let Some(p) = m.iter().flatten().find(|p| p.num_vars() != dim) {
                return Err(AlgebraError::VarCountMismatch { left: dim, right: p.num_vars() }.into());
            }
            match terms.get_mut(&r) {
                Some(existing) => {
                    for a in 0..dim {
                        for b in 0..dim {
                            existing[a][b] = &existing[a][b] + &m[a][b];
                        }
                    }
                }
                None => {
                    terms.insert(r, m);
                }
            }
        }
        for (&r, m) in &terms {
            for a in 0..dim {
                for b in a..dim {
                    if m[a][b] != -&m[b][a] {
                        return Err(QuantumError::OmegaNotAntisymmetric { order: r, a: a + 1, b: b + 1 });
                    }
                }
            }
            for a in 0..dim {
                for b in (a + 1)..dim {
                    for c in (b + 1)..dim {
                        let cyc = &(&m[b][c].d(a) + &m[c][a].d(b)) + &m[a][b].d(c);
                        if !cyc.is_zero() {
                            return Err(QuantumError::OmegaNotClosed { order: r, a: a + 1, b: b + 1, c: c + 1 });
                        }
                    }
                }
            }
        }
        terms.retain(|_, m| m.iter().flatten().any(|p| !p.is_zero()));
        Ok(TwoFormSeries { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero components keyed by ℏ power.
    pub fn terms(&self) -> &BTreeMap<usize, TwoForm> {
        &self.terms
    }

    pub fn max_power(&self) -> usize {
        self.terms.keys().next_back().copied().unwrap_or(0)
    }

    /// `Ω(X, Y)` as a series truncated at `order`.
    pub fn eval(&self, x: &VectorField, y: &VectorField, order: usize) -> FormalSeries {
        let mut coeffs = vec![Polynomial::zero(self.dim); order + 1];
        for (&r, m) in self.terms.range(..=order) {
            coeffs[r] = eval_two_form(m, x, y);
        }
        FormalSeries::from_coeffs(self.dim, coeffs, order).expect("matching variable count")
    }

    /// `i_X Ω_r` for each stored order.
    pub fn contract(&self, x: &VectorField) -> BTreeMap<usize, Vec<Polynomial>> {
        self.terms.iter().map(|(&r, m)| (r, x.contract_two_form(m))).collect()
    }

    /// First ℏ power at which `L_X Ω` is nonzero.
    pub fn lie_derivative_failure(&self, x: &VectorField) -> Option<usize> {
        self.terms.iter().find(|(_, m)| !is_zero_form(&lie_derivative_two_form(x, m))).map(|(&r, _)| r)
    }

    /// The same series scaled by a constant.
    pub fn scale(&self, c: &crate::scalar::Scalar) -> TwoFormSeries {
        let terms = self
            .terms
            .iter()
            .map(|(&r, m)| (r, m.iter().map(|row| row.iter().map(|p| p.scale(c)).collect()).collect()))
            .collect();
        TwoFormSeries { dim: self.dim, terms }
    }
}

fn is_zero_form(m: &TwoForm) -> bool {
    m.iter().flatten().all(Polynomial::is_zero)
}

/// `(L_X β)_{ab} = X^c ∂_c β_{ab} + β_{cb} ∂_a X^c + β_{ac} ∂_b X^c`.
pub fn lie_derivative_two_form(x: &VectorField, beta: &TwoForm) -> TwoForm {
    let dim = x.dim();
    let xs = x.components();
    let mut out = vec![vec![Polynomial::zero(dim); dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = x.apply(&beta[a][b]);
            for c in 0..dim {
                acc = &acc + &(&beta[c][b] * &xs[c].d(a));
                acc = &acc + &(&beta[a][c] * &xs[c].d(b));
            }
            out[a][b] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn constant_form(dim: usize, a: usize, b: usize, v: Scalar) -> TwoForm {
        let mut m = vec![vec![Polynomial::zero(dim); dim]; dim];
        m[a][b] = Polynomial::constant(dim, v.clone());
        m[b][a] = Polynomial::constant(dim, -v);
        m
    }

    #[test]
    fn rejects_bad_forms() {
        assert_eq!(
            TwoFormSeries::new(2, vec![(0, constant_form(2, 0, 1, Scalar::one()))]),
            Err(QuantumError::OmegaHasClassicalTerm)
        );
        let mut m = constant_form(2, 0, 1, Scalar::one());
        m[1][0] = Polynomial::zero(2);
        assert!(matches!(TwoFormSeries::new(2, vec![(1, m)]), Err(QuantumError::OmegaNotAntisymmetric { .. })));
        // x¹ dx²∧dx³ on R⁴ is not closed
        let mut m = vec![vec![Polynomial::zero(4); 4]; 4];
        m[1][2] = Polynomial::var(4, 0);
        m[2][1] = -&Polynomial::var(4, 0);
        assert!(matches!(
            TwoFormSeries::new(4, vec![(1, m)]),
            Err(QuantumError::OmegaNotClosed { order: 1, a: 1, b: 2, c: 3 })
        ));
    }

    #[test]
    fn invariance_under_translations() {
        let om = TwoFormSeries::new(2, vec![(1, constant_form(2, 0, 1, Scalar::ratio(1, 3)))]).unwrap();
        let dq = VectorField::new(vec![Polynomial::one(2), Polynomial::zero(2)]).unwrap();
        assert_eq!(om.lie_derivative_failure(&dq), None);
        let dp = VectorField::new(vec![Polynomial::zero(2), Polynomial::one(2)]).unwrap();
        let v = om.eval(&dq, &dp, 3);
        assert_eq!(v.coeff(1), &Polynomial::constant(2, Scalar::ratio(1, 3)));

        let mut m = vec![vec![Polynomial::zero(2); 2]; 2];
        m[0][1] = Polynomial::var(2, 0);
        m[1][0] = -&Polynomial::var(2, 0);
        let om = TwoFormSeries::new(2, vec![(1, m)]).unwrap();
        assert_eq!(om.lie_derivative_failure(&dq), Some(1));
    }
}
