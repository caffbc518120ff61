//! Classical momentum maps: validation, construction by radial integration,
//! the non-equivariance cocycle Σ and the extended map J̃₀ on `g ⊕ R`.

use serde::Serialize;

use crate::error::{MomentumError, SymplecticError};
use crate::lie::{
    central_extend, check_two_cocycle, cocycle_trivializer, CenterTag, Cochain, CochainKind, ExtElement,
    ExtendedAlgebra, LieAlgebra, SymplecticAction,
};
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::series::FormalSeries;
use crate::symplectic::{hamiltonian_vf, integrate_closed_one_form, omega_form, poisson_bracket, PhaseSpace};

/// `J₀(e_i)` for every basis element, with `X_{J₀(e_i)} = X_{e_i}`.
#[derive(Debug, Clone)]
pub struct ClassicalMomentumMap {
    action: SymplecticAction,
    values: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisCheck {
    /// One-based basis index.
    pub generator: usize,
    pub passed: bool,
    /// One-based component where `X_{J₀(e_i)}` and `X_{e_i}` first differ.
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentumValidation {
    pub passed: bool,
    pub checks: Vec<BasisCheck>,
}

impl MomentumValidation {
    pub fn first_failure(&self) -> Option<&BasisCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Compares `X_{J₀(e_i)}` against `X_{e_i}` for every basis element.
pub fn validate_momentum(action: &SymplecticAction, values: &[Polynomial]) -> MomentumValidation {
    let space = action.space();
    let checks: Vec<BasisCheck> = action
        .generators()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let component = match values.get(i) {
                Some(j) if j.num_vars() == space.dim() => {
                    let xj = hamiltonian_vf(space, j);
                    (0..space.dim()).find(|&c| xj.components()[c] != x.components()[c]).map(|c| c + 1)
                }
                _ => Some(1),
            };
            BasisCheck { generator: i + 1, passed: component.is_none(), component }
        })
        .collect();
    let passed = values.len() == action.generators().len() && checks.iter().all(|c| c.passed);
    MomentumValidation { passed, checks }
}

/// Integrates `dJ₀(ξ) = i_{X_ξ} ω` radially, with zero constant term.
pub fn solve_momentum(action: &SymplecticAction) -> Result<ClassicalMomentumMap, MomentumError> {
    let omega = omega_form(action.space());
    let values = action
        .generators()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            integrate_closed_one_form(&x.contract_two_form(&omega)).map_err(|e| match e {
                SymplecticError::NotClosed(..) => MomentumError::NotClosed { generator: i + 1, detail: e.to_string() },
                other => other.into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassicalMomentumMap { action: action.clone(), values })
}

impl ClassicalMomentumMap {
    /// Validates user-supplied values.
    pub fn new(action: &SymplecticAction, values: Vec<Polynomial>) -> Result<Self, MomentumError> {
        if values.len() != action.algebra().dim() {
            return Err(MomentumError::WrongCount { expected: action.algebra().dim(), found: values.len() });
        }
        let report = validate_momentum(action, &values);
        if let Some(c) = report.first_failure() {
            return Err(MomentumError::NotMomentumMap { generator: c.generator, component: c.component.unwrap_or(1) });
        }
        Ok(ClassicalMomentumMap { action: action.clone(), values })
    }

    pub fn action(&self) -> &SymplecticAction {
        &self.action
    }

    pub fn space(&self) -> &PhaseSpace {
        self.action.space()
    }

    pub fn algebra(&self) -> &LieAlgebra {
        self.action.algebra()
    }

    pub fn values(&self) -> &[Polynomial] {
        &self.values
    }

    /// `J₀(ξ) = Σ ξ_i J₀(e_i)`.
    pub fn eval(&self, xi: &[Scalar]) -> Polynomial {
        let mut out = Polynomial::zero(self.space().dim());
        for (c, j) in xi.iter().zip(&self.values) {
            if !c.is_zero() {
                out = &out + &j.scale(c);
            }
        }
        out
    }

    /// `{J₀(e_i), f} = ρ(e_i)(f)`; returns the first failing basis index.
    pub fn check_action_identity(&self, f: &Polynomial) -> Result<(), usize> {
        for (i, j) in self.values.iter().enumerate() {
            let lhs = poisson_bracket(self.space(), j, f).map_err(|_| i + 1)?;
            let rhs = -&self.action.generator(i).apply(f);
            if lhs != rhs {
                return Err(i + 1);
            }
        }
        Ok(())
    }

    /// The values as a 1-cochain with polynomial values at `ℏ⁰`.
    pub fn as_cochain(&self, order: usize) -> Cochain {
        let values: Vec<FormalSeries> = self.values.iter().map(|p| FormalSeries::from_poly(p.clone(), order)).collect();
        Cochain::from_values(&values, CochainKind::FunctionSeries).expect("values share the phase space")
    }
}

/// `Σ(e_i, e_j) = {J₀(e_i), J₀(e_j)} − J₀([e_i, e_j])`, checked constant and closed.
pub fn sigma_2cocycle(j0: &ClassicalMomentumMap) -> Result<Cochain, MomentumError> {
    let alg = j0.algebra();
    let n = j0.space().dim();
    let mut sigma = Cochain::zero(2, alg.dim(), n, 0, CochainKind::ConstantSeries);
    for i in 0..alg.dim() {
        for j in (i + 1)..alg.dim() {
            let pb = poisson_bracket(j0.space(), &j0.values[i], &j0.values[j]).map_err(SymplecticError::from)?;
            let diff = &pb - &j0.eval(&alg.bracket_basis(i, j));
            if !diff.is_constant() {
                return Err(MomentumError::NonConstantDifference {
                    i: i + 1,
                    j: j + 1,
                    value: j0.space().fmt_poly(&diff),
                });
            }
            sigma.set(&[i, j], FormalSeries::from_poly(diff, 0))?;
        }
    }
    check_two_cocycle(alg, &sigma)?;
    Ok(sigma)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivariance {
    Equivariant,
    /// `Σ(ξ, η) = μ([ξ, η])`.
    ExactCocycle(Cochain),
    /// No `μ` exists; the inconsistent pair is one-based.
    NonTrivial {
        pair: (usize, usize),
    },
}

impl Equivariance {
    pub fn label(&self) -> &'static str {
        match self {
            Equivariance::Equivariant => "equivariant",
            Equivariance::ExactCocycle(_) => "exact",
            Equivariance::NonTrivial { .. } => "nontrivial",
        }
    }
}

pub fn classify_equivariance(algebra: &LieAlgebra, sigma: &Cochain) -> Result<Equivariance, MomentumError> {
    if sigma.is_zero() {
        return Ok(Equivariance::Equivariant);
    }
    match cocycle_trivializer(algebra, sigma) {
        Ok(mu) => Ok(Equivariance::ExactCocycle(mu)),
        Err(crate::error::LieError::NotExact { pair, .. }) => Ok(Equivariance::NonTrivial { pair }),
        Err(e) => Err(e.into()),
    }
}

/// `J̃₀(ξ, a) = J₀(ξ) + a` on `g̃ = g ⊕_Σ R`.
#[derive(Debug, Clone)]
pub struct ExtendedClassicalMomentumMap {
    extension: ExtendedAlgebra,
    base: ClassicalMomentumMap,
}

impl ExtendedClassicalMomentumMap {
    pub fn extension(&self) -> &ExtendedAlgebra {
        &self.extension
    }

    pub fn base(&self) -> &ClassicalMomentumMap {
        &self.base
    }

    pub fn eval(&self, x: &ExtElement) -> Polynomial {
        let a = x.central.coeff(0).constant_term();
        let n = self.base.space().dim();
        &self.base.eval(&x.base) + &Polynomial::constant(n, a)
    }

    /// `J̃₀(ẽ_i)` for the `dim g + 1` basis elements, central unit last.
    pub fn basis_values(&self) -> Vec<Polynomial> {
        (0..self.extension.dim()).map(|i| self.eval(&self.extension.basis(i))).collect()
    }

    /// `{J̃₀(x), J̃₀(y)} = J̃₀([x, y])` on every basis pair of `g̃`.
    pub fn check_homomorphism(&self) -> Result<(), MomentumError> {
        let ext = &self.extension;
        for i in 0..ext.dim() {
            for j in 0..ext.dim() {
                let (x, y) = (ext.basis(i), ext.basis(j));
                let lhs = poisson_bracket(self.base.space(), &self.eval(&x), &self.eval(&y))
                    .map_err(SymplecticError::from)?;
                if lhs != self.eval(&ext.bracket(&x, &y)) {
                    return Err(MomentumError::NotHomomorphism { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(())
    }
}

pub fn extend_classical(
    j0: &ClassicalMomentumMap,
    sigma: &Cochain,
) -> Result<ExtendedClassicalMomentumMap, MomentumError> {
    let extension = central_extend(j0.algebra(), sigma, CenterTag::Real)?;
    let out = ExtendedClassicalMomentumMap { extension, base: j0.clone() };
    out.check_homomorphism()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{Convention, VectorField};

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn q() -> Polynomial {
        Polynomial::var(2, 0)
    }

    fn p() -> Polynomial {
        Polynomial::var(2, 1)
    }

    fn heisenberg() -> SymplecticAction {
        let gens = vec![
            VectorField::new(vec![Polynomial::one(2), Polynomial::zero(2)]).unwrap(),
            VectorField::new(vec![Polynomial::zero(2), Polynomial::one(2)]).unwrap(),
        ];
        SymplecticAction::new(PhaseSpace::standard(1, Convention::RealHalf), LieAlgebra::abelian(2), gens).unwrap()
    }

    fn sl2() -> SymplecticAction {
        let alg = LieAlgebra::new(3, &[(0, 1, 2, s(1)), (2, 0, 0, s(-2)), (2, 1, 1, s(2))]).unwrap();
        let gens = vec![
            VectorField::new(vec![Polynomial::zero(2), -&q()]).unwrap(),
            VectorField::new(vec![p(), Polynomial::zero(2)]).unwrap(),
            VectorField::new(vec![q(), -&p()]).unwrap(),
        ];
        SymplecticAction::new(PhaseSpace::standard(1, Convention::RealHalf), alg, gens).unwrap()
    }

    #[test]
    fn validation_examples() {
        let h = heisenberg();
        assert!(validate_momentum(&h, &[p(), -&q()]).passed);
        let shifted = [&p() + &Polynomial::constant(2, s(4)), &(-&q()) + &Polynomial::constant(2, s(-1))];
        assert!(validate_momentum(&h, &shifted).passed);
        let flipped = validate_momentum(&h, &[-&p(), q()]);
        assert!(!flipped.passed);
        assert_eq!(flipped.first_failure().unwrap().generator, 1);
    }

    #[test]
    fn solved_maps() {
        let h = solve_momentum(&heisenberg()).unwrap();
        assert_eq!(h.values(), &[p(), -&q()]);
        let half = Scalar::ratio(1, 2);
        let sl = solve_momentum(&sl2()).unwrap();
        assert_eq!(sl.values(), &[q().pow(2).scale(&half), p().pow(2).scale(&half), &q() * &p()]);
        assert!(validate_momentum(&sl2(), sl.values()).passed);
    }

    #[test]
    fn sigma_examples() {
        let h = solve_momentum(&heisenberg()).unwrap();
        let sigma = sigma_2cocycle(&h).unwrap();
        assert_eq!(sigma.eval_basis(&[0, 1]), FormalSeries::constant(2, s(1), 0));
        assert!(matches!(
            classify_equivariance(h.algebra(), &sigma).unwrap(),
            Equivariance::NonTrivial { pair: (1, 2) }
        ));

        let sl = solve_momentum(&sl2()).unwrap();
        let sigma = sigma_2cocycle(&sl).unwrap();
        assert!(sigma.is_zero());
        assert_eq!(classify_equivariance(sl.algebra(), &sigma).unwrap(), Equivariance::Equivariant);
    }

    #[test]
    fn shifted_sl2_is_exact() {
        let sl = solve_momentum(&sl2()).unwrap();
        let mu = [s(3), s(-2), s(5)];
        let shifted: Vec<Polynomial> =
            sl.values().iter().zip(&mu).map(|(j, c)| j + &Polynomial::constant(2, c.clone())).collect();
        let shifted = ClassicalMomentumMap::new(&sl2(), shifted).unwrap();
        let sigma = sigma_2cocycle(&shifted).unwrap();
        let alg = shifted.algebra();
        for i in 0..3 {
            for j in 0..3 {
                let br = alg.bracket_basis(i, j);
                let minus_mu: Scalar = br.iter().zip(&mu).fold(Scalar::zero(), |acc, (b, m)| acc - b * m);
                assert_eq!(sigma.eval_basis(&[i, j]), FormalSeries::constant(2, minus_mu, 0));
            }
        }
        match classify_equivariance(alg, &sigma).unwrap() {
            Equivariance::ExactCocycle(found) => {
                for i in 0..3 {
                    for j in 0..3 {
                        assert_eq!(found.eval(&[alg.bracket_basis(i, j)]), sigma.eval_basis(&[i, j]));
                    }
                }
            }
            other => panic!("expected exact, got {other:?}"),
        }
    }

    #[test]
    fn extension_is_homomorphism() {
        let h = solve_momentum(&heisenberg()).unwrap();
        let sigma = sigma_2cocycle(&h).unwrap();
        let ext = extend_classical(&h, &sigma).unwrap();
        assert_eq!(ext.basis_values(), vec![p(), -&q(), Polynomial::one(2)]);
        // without the central term the map fails to be a homomorphism
        let zero = Cochain::zero(2, 2, 2, 0, CochainKind::ConstantSeries);
        assert!(matches!(extend_classical(&h, &zero), Err(MomentumError::NotHomomorphism { i: 1, j: 2 })));
    }

    #[test]
    fn action_identity() {
        let sl = solve_momentum(&sl2()).unwrap();
        let f = &(&q().pow(3) * &p()) + &p().pow(2);
        assert!(sl.check_action_identity(&f).is_ok());
    }
}
