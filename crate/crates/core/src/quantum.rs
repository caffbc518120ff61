//! Quantum Hamiltonians and quantum momentum maps for a star product, the
//! homomorphism defect λ, existence solvers over `g` and over the classical
//! central extension `g̃`, and the canonical extension `ĝ = g ⊕_λ R[[ℏ]]`.
//!
//! Brackets are `(κ/ℏ)[·,·]_⋆` with `κ` the convention's commutator unit.
//! A bracket at order `N` consumes operands at order `N + 1`, so every
//! function taking `order` expects maps given to at least `order + 1`.

use serde::Serialize;

use crate::error::{AlgebraError, QuantumError};
use crate::lie::{
    ce_coboundary, central_extend, check_two_cocycle, cocycle_trivializer, CenterTag, Cochain, CochainKind, ExtElement,
    ExtendedAlgebra, LieAlgebra, SymplecticAction,
};
use crate::momentum::{sigma_2cocycle, ClassicalMomentumMap, ExtendedClassicalMomentumMap};
use crate::par::Exec;
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::series::{classical_limit, FormalSeries};
use crate::symplectic::{eval_two_form, integrate_closed_one_form, omega_form, quantum_bracket, StarProduct};

pub use crate::forms::TwoFormSeries;

/// `J(e_i) ∈ C^∞(M)[[ℏ]]` for every basis element, split as `J₀ + J₊`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumHamiltonian {
    values: Vec<FormalSeries>,
}

impl QuantumHamiltonian {
    pub fn new(action: &SymplecticAction, values: Vec<FormalSeries>) -> Result<Self, QuantumError> {
        if values.len() != action.algebra().dim() {
            return Err(
                AlgebraError::DimensionMismatch { expected: action.algebra().dim(), found: values.len() }.into()
            );
        }
        if let Some(v) = values.iter().find(|v| v.num_vars() != action.space().dim()) {
            return Err(AlgebraError::VarCountMismatch { left: action.space().dim(), right: v.num_vars() }.into());
        }
        let order = values.iter().map(FormalSeries::order).min().unwrap_or(0);
        Ok(QuantumHamiltonian { values: values.iter().map(|v| v.with_order(order)).collect() })
    }

    pub fn values(&self) -> &[FormalSeries] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.first().map_or(0, FormalSeries::order)
    }

    pub fn classical_part(&self) -> Vec<Polynomial> {
        self.values.iter().map(classical_limit).collect()
    }

    /// `J₊ = J − J₀`.
    pub fn quantum_part(&self) -> Vec<FormalSeries> {
        self.values
            .iter()
            .map(|v| {
                let mut c = v.coeffs().to_vec();
                c[0] = Polynomial::zero(v.num_vars());
                FormalSeries::from_coeffs(v.num_vars(), c, v.order()).expect("same variables")
            })
            .collect()
    }

    pub fn eval(&self, xi: &[Scalar]) -> FormalSeries {
        combine(&self.values, xi)
    }

    fn require_order(&self, order: usize) -> Result<(), QuantumError> {
        if self.order() < order + 1 {
            return Err(QuantumError::OrderTooLow { have: self.order(), need: order + 1 });
        }
        Ok(())
    }
}

fn combine(values: &[FormalSeries], xi: &[Scalar]) -> FormalSeries {
    let mut out = FormalSeries::zero(values[0].num_vars(), values[0].order());
    for (c, v) in xi.iter().zip(values) {
        if !c.is_zero() {
            out = &out + &v.scale(c);
        }
    }
    out
}

/// Integrates `i_{X_ξ}Ω_r` radially for every basis element and ℏ power,
/// after checking `L_{X_ξ}Ω = 0`. The result lies in `ℏ·C¹(g, C^∞(M))[[ℏ]]`.
pub fn solve_j_plus(
    action: &SymplecticAction,
    omega: &TwoFormSeries,
    order: usize,
) -> Result<Vec<FormalSeries>, QuantumError> {
    let dim = action.space().dim();
    if omega.dim() != dim {
        return Err(AlgebraError::DimensionMismatch { expected: dim, found: omega.dim() }.into());
    }
    let mut out = Vec::with_capacity(action.generators().len());
    for (i, x) in action.generators().iter().enumerate() {
        if let Some(r) = omega.lie_derivative_failure(x) {
            return Err(QuantumError::NotInvariant { generator: i + 1, order: r });
        }
        let mut coeffs = vec![Polynomial::zero(dim); order + 1];
        for (r, alpha) in omega.contract(x) {
            if r > order {
                continue;
            }
            coeffs[r] = integrate_closed_one_form(&alpha)
                .map_err(|_| QuantumError::NotClosed { generator: i + 1, order: r })?;
        }
        out.push(FormalSeries::from_coeffs(dim, coeffs, order)?);
    }
    Ok(out)
}

/// First failure of the Hamiltonian identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HamiltonianWitness {
    pub generator: usize,
    pub monomial: String,
    pub hbar_order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HamiltonianReport {
    pub passed: bool,
    pub max_degree: u32,
    pub order: usize,
    pub checked: usize,
    pub witness: Option<HamiltonianWitness>,
}

/// Checks `(κ/ℏ)[J(e_i), f]_⋆ = ρ(e_i)(f)` at `order` for every basis element
/// and every monomial of degree at most `max_degree`.
pub fn verify_quantum_hamiltonian<S: StarProduct + ?Sized>(
    action: &SymplecticAction,
    j: &QuantumHamiltonian,
    star: &S,
    max_degree: u32,
    order: usize,
) -> Result<HamiltonianReport, QuantumError> {
    j.require_order(order)?;
    let space = action.space();
    let monomials = Polynomial::monomial_basis(space.dim(), max_degree);
    let cases: Vec<(usize, usize)> =
        (0..j.values.len()).flat_map(|i| (0..monomials.len()).map(move |m| (i, m))).collect();
    let results = Exec::default().map(&cases, |&(i, m)| -> Result<Option<usize>, QuantumError> {
        let f = FormalSeries::from_poly(monomials[m].clone(), order + 1);
        let lhs = quantum_bracket(star, &j.values[i].with_order(order + 1), &f)?;
        let rhs = action.rho_basis(i, &f.with_order(order));
        Ok((0..=order).find(|&r| lhs.coeff(r) != rhs.coeff(r)))
    });
    let mut witness = None;
    for (&(i, m), res) in cases.iter().zip(results) {
        if let Some(r) = res? {
            witness =
                Some(HamiltonianWitness { generator: i + 1, monomial: space.fmt_poly(&monomials[m]), hbar_order: r });
            break;
        }
    }
    Ok(HamiltonianReport { passed: witness.is_none(), max_degree, order, checked: cases.len(), witness })
}

/// `(κ/ℏ)[V_i, V_j]_⋆ − Σ_k c_{ij}^k V_k` on every basis pair, at `order`.
pub fn homomorphism_defect<S: StarProduct + ?Sized>(
    algebra: &LieAlgebra,
    values: &[FormalSeries],
    star: &S,
    order: usize,
) -> Result<Cochain, QuantumError> {
    let d = algebra.dim();
    let n = star.space().dim();
    let pairs = crate::lie::increasing_tuples(d, 2);
    let vals: Vec<FormalSeries> = values.iter().map(|v| v.with_order(order + 1)).collect();
    let results = Exec::default().map(&pairs, |p| -> Result<FormalSeries, QuantumError> {
        let qb = quantum_bracket(star, &vals[p[0]], &vals[p[1]])?;
        let image = combine(&vals, &algebra.bracket_basis(p[0], p[1])).with_order(order);
        Ok(&qb - &image)
    });
    let mut out = Cochain::zero(2, d, n, order, CochainKind::FunctionSeries);
    for (p, v) in pairs.iter().zip(results) {
        out.set(p, v?)?;
    }
    Ok(out)
}

/// `(ω + Ω)(X_{e_i}, X_{e_j}) − J([e_i, e_j])`.
pub fn lambda_closed_form(
    action: &SymplecticAction,
    j: &QuantumHamiltonian,
    omega: &TwoFormSeries,
    order: usize,
) -> Result<Cochain, QuantumError> {
    let space = action.space();
    let om = omega_form(space);
    let d = action.algebra().dim();
    let vals: Vec<FormalSeries> = j.values.iter().map(|v| v.with_order(order)).collect();
    let mut out = Cochain::zero(2, d, space.dim(), order, CochainKind::FunctionSeries);
    for p in crate::lie::increasing_tuples(d, 2) {
        let (x, y) = (action.generator(p[0]), action.generator(p[1]));
        let classical = FormalSeries::from_poly(eval_two_form(&om, x, y), order);
        let value =
            &(&classical + &omega.eval(x, y, order)) - &combine(&vals, &action.algebra().bracket_basis(p[0], p[1]));
        out.set(&p, value)?;
    }
    Ok(out)
}

/// Computes `λ` in commutator form and in closed form, requires agreement,
/// constant values and `δλ = 0`.
pub fn lambda_cocycle<S: StarProduct + ?Sized>(
    action: &SymplecticAction,
    j: &QuantumHamiltonian,
    star: &S,
    omega: &TwoFormSeries,
    order: usize,
) -> Result<Cochain, QuantumError> {
    j.require_order(order)?;
    let commutator = homomorphism_defect(action.algebra(), &j.values, star, order)?;
    let closed = lambda_closed_form(action, j, omega, order)?;
    let d = action.algebra().dim();
    for p in crate::lie::increasing_tuples(d, 2) {
        let v = commutator.eval_basis(&p);
        if !v.is_constant() {
            return Err(QuantumError::NonConstant { i: p[0] + 1, j: p[1] + 1 });
        }
        if v != closed.eval_basis(&p) {
            return Err(QuantumError::FormMismatch { i: p[0] + 1, j: p[1] + 1 });
        }
    }
    let lambda = commutator.into_constant()?;
    check_two_cocycle(action.algebra(), &lambda)?;
    Ok(lambda)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuantumClass {
    QuantumMomentumMap,
    Anomalous(Cochain),
}

impl QuantumClass {
    pub fn label(&self) -> &'static str {
        match self {
            QuantumClass::QuantumMomentumMap => "quantum momentum map",
            QuantumClass::Anomalous(_) => "anomalous",
        }
    }
}

/// `λ = 0` decides; the `ℏ⁰` part of `λ` must equal `Σ` of the classical limit.
pub fn classify_quantum(
    action: &SymplecticAction,
    j: &QuantumHamiltonian,
    lambda: &Cochain,
) -> Result<QuantumClass, QuantumError> {
    let j0 = ClassicalMomentumMap::new(action, j.classical_part())?;
    let sigma = sigma_2cocycle(&j0)?;
    check_mod_hbar(lambda, &sigma)?;
    Ok(if lambda.is_zero() { QuantumClass::QuantumMomentumMap } else { QuantumClass::Anomalous(lambda.clone()) })
}

fn check_mod_hbar(lambda: &Cochain, sigma: &Cochain) -> Result<(), QuantumError> {
    for p in crate::lie::increasing_tuples(lambda.algebra_dim(), 2) {
        if lambda.eval_basis(&p).coeff(0) != sigma.eval_basis(&p).coeff(0) {
            return Err(QuantumError::CocycleMismatch { i: p[0] + 1, j: p[1] + 1 });
        }
    }
    Ok(())
}

/// Why an existence solver answered no.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceWitness {
    /// Nonzero `Σ` of the classical limit.
    pub sigma: Option<Cochain>,
    /// The residual `Ω(X_ξ, X_η) − (δJ₊⁰)(ξ, η)` and the one-based pair and
    /// ℏ order where it fails to be `−c([ξ, η])` for constants `c`.
    pub residual: Option<(Cochain, (usize, usize), usize)>,
    /// `L_{X_ξ}Ω ≠ 0` for this one-based generator and ℏ order.
    pub not_invariant: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Existence<T> {
    Yes(T),
    No(ExistenceWitness),
}

impl<T> Existence<T> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Existence::Yes(_))
    }
}

/// Outcome of solving the second existence condition over some algebra.
enum Residual {
    Solved { j_plus: Vec<FormalSeries> },
    Failed { residual: Cochain, pair: (usize, usize), order: usize },
    NotInvariant { generator: usize, order: usize },
}

/// Finds `J₊` with `i_XΩ = dJ₊` and `Ω(X_ξ, X_η) = (δJ₊)(ξ, η)`, using the
/// freedom `J₊ ↦ J₊ + c` with constants `c`, which contributes `−c([ξ, η])`.
fn solve_second_condition(
    action: &SymplecticAction,
    omega: &TwoFormSeries,
    order: usize,
) -> Result<Residual, QuantumError> {
    let particular = match solve_j_plus(action, omega, order) {
        Ok(v) => v,
        Err(QuantumError::NotInvariant { generator, order }) => return Ok(Residual::NotInvariant { generator, order }),
        Err(e) => return Err(e),
    };
    let d = action.algebra().dim();
    let n = action.space().dim();
    let jp = Cochain::from_values(&particular, CochainKind::FunctionSeries)?.with_order(order);
    let djp = ce_coboundary(action, &jp)?;
    let residual = Cochain::from_fn(2, d, n, order, CochainKind::FunctionSeries, |p| {
        let (x, y) = (action.generator(p[0]), action.generator(p[1]));
        &omega.eval(x, y, order) - &djp.eval_basis(p)
    })?;
    let residual = residual
        .into_constant()
        .map_err(|_| QuantumError::Inconsistent("residual of the second condition is not constant".into()))?;
    match cocycle_trivializer(action.algebra(), &residual) {
        Ok(mu) => {
            let j_plus = (0..d).map(|i| &particular[i] - &mu.eval_basis(&[i]).with_order(order)).collect();
            Ok(Residual::Solved { j_plus })
        }
        Err(crate::error::LieError::NotExact { pair, order }) => Ok(Residual::Failed { residual, pair, order }),
        Err(e) => Err(e.into()),
    }
}

/// Solves for a quantum momentum map `J = J₀ + J₊` at series order `order`,
/// then confirms `λ = 0` for `star` at `order − 1`.
pub fn quantum_momentum_exists<S: StarProduct + ?Sized>(
    j0: &ClassicalMomentumMap,
    omega: &TwoFormSeries,
    star: &S,
    order: usize,
) -> Result<Existence<QuantumHamiltonian>, QuantumError> {
    let action = j0.action();
    let sigma = sigma_2cocycle(j0)?;
    let mut witness = ExistenceWitness {
        sigma: if sigma.is_zero() { None } else { Some(sigma) },
        residual: None,
        not_invariant: None,
    };
    let solved = solve_second_condition(action, omega, order)?;
    let j_plus = match solved {
        Residual::Solved { j_plus } => Some(j_plus),
        Residual::Failed { residual, pair, order } => {
            witness.residual = Some((residual, pair, order));
            None
        }
        Residual::NotInvariant { generator, order } => {
            witness.not_invariant = Some((generator, order));
            None
        }
    };
    let Some(j_plus) = j_plus.filter(|_| witness.sigma.is_none()) else {
        return Ok(Existence::No(witness));
    };
    let values: Vec<FormalSeries> =
        j0.values().iter().zip(&j_plus).map(|(p, jp)| &FormalSeries::from_poly(p.clone(), order) + jp).collect();
    let j = QuantumHamiltonian::new(action, values)?;
    if order > 0 {
        let lambda = lambda_cocycle(action, &j, star, omega, order - 1)?;
        if !lambda.is_zero() {
            return Err(QuantumError::Inconsistent("solved map has nonzero lambda".into()));
        }
    }
    Ok(Existence::Yes(j))
}

/// A map on a central extension given by its values on the basis (central
/// unit last) and extended linearly: `J(ξ, a) = Σ ξ_i V_i + a·V_c`.
#[derive(Debug, Clone)]
pub struct ExtendedQuantumMomentumMap {
    extension: ExtendedAlgebra,
    values: Vec<FormalSeries>,
}

impl ExtendedQuantumMomentumMap {
    pub fn extension(&self) -> &ExtendedAlgebra {
        &self.extension
    }

    pub fn values(&self) -> &[FormalSeries] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.first().map_or(0, FormalSeries::order)
    }

    pub fn eval(&self, x: &ExtElement) -> FormalSeries {
        let d = self.extension.base().dim();
        let base = combine(&self.values[..d], &x.base);
        let central = &x.central.with_order(self.order()) * &self.values[d];
        &base + &central
    }

    /// `(κ/ℏ)[J(a), J(b)]_⋆ = J([a, b])` on all basis pairs at `order`;
    /// returns the first failing one-based pair.
    pub fn check_homomorphism<S: StarProduct + ?Sized>(
        &self,
        star: &S,
        order: usize,
    ) -> Result<Option<(usize, usize)>, QuantumError> {
        if self.order() < order + 1 {
            return Err(QuantumError::OrderTooLow { have: self.order(), need: order + 1 });
        }
        let ext = &self.extension;
        let pairs = crate::lie::increasing_tuples(ext.dim(), 2);
        let results = Exec::default().map(&pairs, |p| -> Result<bool, QuantumError> {
            let (a, b) = (ext.basis(p[0]), ext.basis(p[1]));
            let lhs = quantum_bracket(star, &self.eval(&a), &self.eval(&b))?;
            Ok(lhs == self.eval(&ext.bracket(&a, &b)).with_order(order))
        });
        for (p, ok) in pairs.iter().zip(results) {
            if !ok? {
                return Ok(Some((p[0] + 1, p[1] + 1)));
            }
        }
        Ok(None)
    }

    /// `J(ξ, 0)` for basis elements of `g`.
    pub fn restricted_values(&self) -> Vec<FormalSeries> {
        self.values[..self.extension.base().dim()].to_vec()
    }
}

/// Solution over `g̃` together with its central coefficient.
#[derive(Debug, Clone)]
pub struct ExtendedSolution {
    pub map: ExtendedQuantumMomentumMap,
    /// `c` with `J̃₊(0, a) = c·a`.
    pub central_coefficient: FormalSeries,
    /// Whether `i_XΩ = dJ₊` was solvable over `g` and over `g̃`.
    pub first_condition_g: bool,
    pub first_condition_gtilde: bool,
}

/// Solves both existence conditions over `g̃ = g ⊕_Σ R`, where the central
/// direction acts by the zero vector field and `J̃₊(0, a) = c·a` is an
/// unknown; then confirms the homomorphism identity for `star` at `order − 1`.
pub fn extended_qmm_exists<S: StarProduct + ?Sized>(
    j0: &ClassicalMomentumMap,
    omega: &TwoFormSeries,
    star: &S,
    order: usize,
) -> Result<Existence<ExtendedSolution>, QuantumError> {
    let action = j0.action();
    let sigma = sigma_2cocycle(j0)?;
    let extension = central_extend(action.algebra(), &sigma, CenterTag::Real)?;
    let lie = extension
        .as_lie_algebra()
        .ok_or_else(|| QuantumError::Inconsistent("classical cocycle depends on hbar".into()))?;
    let tilde_action = action.trivially_extended(lie);
    let first_g = solve_j_plus(action, omega, order).is_ok();
    let solved = solve_second_condition(&tilde_action, omega, order)?;
    let first_gtilde = !matches!(solved, Residual::NotInvariant { .. });
    if first_g != first_gtilde {
        return Err(QuantumError::Inconsistent("first condition differs between g and its extension".into()));
    }
    let j_plus = match solved {
        Residual::Solved { j_plus } => j_plus,
        Residual::Failed { residual, pair, order } => {
            return Ok(Existence::No(ExistenceWitness {
                sigma: None,
                residual: Some((residual, pair, order)),
                not_invariant: None,
            }))
        }
        Residual::NotInvariant { generator, order } => {
            return Ok(Existence::No(ExistenceWitness {
                sigma: None,
                residual: None,
                not_invariant: Some((generator, order)),
            }))
        }
    };
    let tilde_j0 = crate::momentum::extend_classical(j0, &sigma)?;
    let values: Vec<FormalSeries> = tilde_j0
        .basis_values()
        .into_iter()
        .zip(&j_plus)
        .map(|(p, jp)| &FormalSeries::from_poly(p, order) + jp)
        .collect();
    let central_coefficient = j_plus[action.algebra().dim()].clone();
    let map = ExtendedQuantumMomentumMap { extension, values };
    if order > 0 {
        if let Some((i, j)) = map.check_homomorphism(star, order - 1)? {
            return Err(QuantumError::NotHomomorphism { i, j });
        }
    }
    Ok(Existence::Yes(ExtendedSolution {
        map,
        central_coefficient,
        first_condition_g: first_g,
        first_condition_gtilde: first_gtilde,
    }))
}

#[derive(Debug, Clone)]
pub struct RestrictionReport {
    pub map: QuantumHamiltonian,
    pub hamiltonian: HamiltonianReport,
    /// The homomorphism defect of the restriction.
    pub defect: Cochain,
    pub is_homomorphism: bool,
    pub defect_mod_hbar_is_sigma: bool,
    pub classical_limit_is_j0: bool,
}

/// `J̆(ξ) = J_ext(ξ, 0)`: checks it is a quantum Hamiltonian, computes its
/// defect `λ`, and compares `λ mod ℏ` with `Σ` and the classical limit with `J₀`.
pub fn restrict_to_g<S: StarProduct + ?Sized>(
    ext: &ExtendedQuantumMomentumMap,
    j0: &ClassicalMomentumMap,
    omega: &TwoFormSeries,
    star: &S,
    max_degree: u32,
    order: usize,
) -> Result<RestrictionReport, QuantumError> {
    let action = j0.action();
    let map = QuantumHamiltonian::new(action, ext.restricted_values())?;
    let hamiltonian = verify_quantum_hamiltonian(action, &map, star, max_degree, order)?;
    let defect = lambda_cocycle(action, &map, star, omega, order)?;
    let sigma = sigma_2cocycle(j0)?;
    let defect_mod_hbar_is_sigma = check_mod_hbar(&defect, &sigma).is_ok();
    let classical_limit_is_j0 = map.classical_part() == j0.values();
    Ok(RestrictionReport {
        is_homomorphism: defect.is_zero(),
        map,
        hamiltonian,
        defect,
        defect_mod_hbar_is_sigma,
        classical_limit_is_j0,
    })
}

/// `ĝ = g ⊕_λ R[[ℏ]]` with `Ĵ(ξ, x) = J(ξ) + x`.
pub fn canonical_quantum_extension(
    action: &SymplecticAction,
    j: &QuantumHamiltonian,
    lambda: &Cochain,
) -> Result<ExtendedQuantumMomentumMap, QuantumError> {
    let extension = central_extend(action.algebra(), lambda, CenterTag::RealSeries)?;
    let n = action.space().dim();
    let mut values = j.values.clone();
    values.push(FormalSeries::constant(n, Scalar::one(), j.order()));
    Ok(ExtendedQuantumMomentumMap { extension, values })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralityReport {
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

/// `(κ/ℏ)[x, f]_⋆ = 0` for the given constant series and all monomials of
/// degree at most `max_degree`.
pub fn check_constants_central<S: StarProduct + ?Sized>(
    star: &S,
    constants: &[FormalSeries],
    max_degree: u32,
    order: usize,
) -> Result<CentralityReport, QuantumError> {
    let space = star.space();
    let monomials = Polynomial::monomial_basis(space.dim(), max_degree);
    let mut checked = 0;
    for x in constants {
        if !x.is_constant() {
            return Err(QuantumError::Inconsistent("centrality sample is not constant".into()));
        }
        for m in &monomials {
            checked += 1;
            let f = FormalSeries::from_poly(m.clone(), order + 1);
            if !quantum_bracket(star, &x.with_order(order + 1), &f)?.is_zero() {
                return Ok(CentralityReport {
                    passed: false,
                    checked,
                    witness: Some(format!("({}, {})", space.fmt_series(x), space.fmt_poly(m))),
                });
            }
        }
    }
    Ok(CentralityReport { passed: true, checked, witness: None })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    /// `Ĵ mod ℏ` equals `J̃₀` on every basis element of `g̃`.
    pub matches_tilde_j0: bool,
    /// `λ mod ℏ = Σ`, so the quotient bracket is that of `g̃`.
    pub cocycle_matches: bool,
}

/// Reduces `Ĵ` modulo ℏ and compares it with `J̃₀` on `g̃`.
pub fn classical_limit_quotient(
    jhat: &ExtendedQuantumMomentumMap,
    tilde_j0: &ExtendedClassicalMomentumMap,
) -> Result<QuotientReport, QuantumError> {
    let lambda = jhat.extension().cocycle();
    let sigma = tilde_j0.extension().cocycle();
    check_mod_hbar(lambda, sigma)?;
    let reduced: Vec<Polynomial> = jhat.values().iter().map(classical_limit).collect();
    Ok(QuotientReport { matches_tilde_j0: reduced == tilde_j0.basis_values(), cocycle_matches: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::{Fedosov, FedosovConfig};
    use crate::momentum::solve_momentum;
    use crate::symplectic::{Convention, Moyal, PhaseSpace, VectorField};

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn q() -> Polynomial {
        Polynomial::var(2, 0)
    }

    fn p() -> Polynomial {
        Polynomial::var(2, 1)
    }

    fn space() -> PhaseSpace {
        PhaseSpace::standard(1, Convention::RealHalf)
    }

    fn heisenberg() -> SymplecticAction {
        let gens = vec![
            VectorField::new(vec![Polynomial::one(2), Polynomial::zero(2)]).unwrap(),
            VectorField::new(vec![Polynomial::zero(2), Polynomial::one(2)]).unwrap(),
        ];
        SymplecticAction::new(space(), LieAlgebra::abelian(2), gens).unwrap()
    }

    fn sl2() -> SymplecticAction {
        let alg = LieAlgebra::new(3, &[(0, 1, 2, s(1)), (2, 0, 0, s(-2)), (2, 1, 1, s(2))]).unwrap();
        let gens = vec![
            VectorField::new(vec![Polynomial::zero(2), -&q()]).unwrap(),
            VectorField::new(vec![p(), Polynomial::zero(2)]).unwrap(),
            VectorField::new(vec![q(), -&p()]).unwrap(),
        ];
        SymplecticAction::new(space(), alg, gens).unwrap()
    }

    fn magnetic(beta: &Scalar) -> TwoFormSeries {
        let mut m = vec![vec![Polynomial::zero(2); 2]; 2];
        m[0][1] = Polynomial::constant(2, beta.clone());
        m[1][0] = Polynomial::constant(2, -beta);
        TwoFormSeries::new(2, vec![(1, m)]).unwrap()
    }

    /// `(1 + ℏβ)·f` as a series.
    fn one_plus(beta: &Scalar, f: &Polynomial, order: usize) -> FormalSeries {
        FormalSeries::from_coeffs(2, vec![f.clone(), f.scale(beta)], order).unwrap()
    }

    #[test]
    fn j_plus_examples() {
        let beta = Scalar::ratio(2, 5);
        let jp = solve_j_plus(&heisenberg(), &magnetic(&beta), 3).unwrap();
        assert_eq!(jp[0], FormalSeries::from_coeffs(2, vec![Polynomial::zero(2), p().scale(&beta)], 3).unwrap());
        assert_eq!(jp[1], FormalSeries::from_coeffs(2, vec![Polynomial::zero(2), (-&q()).scale(&beta)], 3).unwrap());
        assert!(solve_j_plus(&heisenberg(), &TwoFormSeries::zero(2), 2).unwrap().iter().all(FormalSeries::is_zero));
        let jp = solve_j_plus(&sl2(), &magnetic(&beta), 2).unwrap();
        let j0 = solve_momentum(&sl2()).unwrap();
        for (a, b) in jp.iter().zip(j0.values()) {
            assert_eq!(a.coeff(1), &b.scale(&beta));
        }
    }

    #[test]
    fn moyal_hamiltonian_checks() {
        let moyal = Moyal::new(space());
        let h = heisenberg();
        let j = QuantumHamiltonian::new(&h, vec![FormalSeries::from_poly(p(), 3), FormalSeries::from_poly(-&q(), 3)])
            .unwrap();
        assert!(verify_quantum_hamiltonian(&h, &j, &moyal, 4, 2).unwrap().passed);
        let flipped =
            QuantumHamiltonian::new(&h, vec![FormalSeries::from_poly(-&p(), 3), FormalSeries::from_poly(q(), 3)])
                .unwrap();
        let rep = verify_quantum_hamiltonian(&h, &flipped, &moyal, 4, 2).unwrap();
        assert_eq!(rep.witness, Some(HamiltonianWitness { generator: 1, monomial: "q".into(), hbar_order: 0 }));
        let sl = sl2();
        let j0 = solve_momentum(&sl).unwrap();
        let j =
            QuantumHamiltonian::new(&sl, j0.values().iter().map(|v| FormalSeries::from_poly(v.clone(), 3)).collect())
                .unwrap();
        assert!(verify_quantum_hamiltonian(&sl, &j, &moyal, 4, 2).unwrap().passed);
    }

    #[test]
    fn heisenberg_moyal_lambda_is_sigma() {
        let moyal = Moyal::new(space());
        let h = heisenberg();
        let j = QuantumHamiltonian::new(&h, vec![FormalSeries::from_poly(p(), 3), FormalSeries::from_poly(-&q(), 3)])
            .unwrap();
        let lambda = lambda_cocycle(&h, &j, &moyal, &TwoFormSeries::zero(2), 2).unwrap();
        assert_eq!(lambda.eval_basis(&[0, 1]), FormalSeries::constant(2, s(1), 2));
        assert!(matches!(classify_quantum(&h, &j, &lambda).unwrap(), QuantumClass::Anomalous(_)));
        let jhat = canonical_quantum_extension(&h, &j, &lambda).unwrap();
        assert_eq!(jhat.check_homomorphism(&moyal, 2).unwrap(), None);
    }

    #[test]
    fn sl2_magnetic_exists() {
        let beta = Scalar::ratio(1, 3);
        let omega = magnetic(&beta);
        let fed = Fedosov::new(FedosovConfig::new(space(), omega.clone(), 12)).unwrap();
        let j0 = solve_momentum(&sl2()).unwrap();
        match quantum_momentum_exists(&j0, &omega, &fed, 3).unwrap() {
            Existence::Yes(j) => {
                for (v, c) in j.values().iter().zip(j0.values()) {
                    assert_eq!(v, &one_plus(&beta, c, 3));
                }
            }
            Existence::No(w) => panic!("expected a solution, got {w:?}"),
        }
    }

    #[test]
    fn heisenberg_magnetic() {
        let beta = Scalar::ratio(1, 3);
        let omega = magnetic(&beta);
        let fed = Fedosov::new(FedosovConfig::new(space(), omega.clone(), 10)).unwrap();
        let j0 = solve_momentum(&heisenberg()).unwrap();
        let Existence::No(w) = quantum_momentum_exists(&j0, &omega, &fed, 3).unwrap() else {
            panic!("expected no");
        };
        assert!(w.sigma.is_some());
        let (residual, pair, order) = w.residual.unwrap();
        assert_eq!((pair, order), ((1, 2), 1));
        assert_eq!(residual.eval_basis(&[0, 1]).coeff(1), &Polynomial::constant(2, -&beta));

        let Existence::Yes(sol) = extended_qmm_exists(&j0, &omega, &fed, 3).unwrap() else {
            panic!("expected yes");
        };
        assert_eq!(
            sol.central_coefficient,
            FormalSeries::from_coeffs(2, vec![Polynomial::zero(2), Polynomial::constant(2, beta.clone())], 3).unwrap()
        );
        let expected = [one_plus(&beta, &p(), 3), one_plus(&beta, &-&q(), 3), one_plus(&beta, &Polynomial::one(2), 3)];
        assert_eq!(sol.map.values(), &expected);

        let rep = restrict_to_g(&sol.map, &j0, &omega, &fed, 3, 2).unwrap();
        assert!(rep.hamiltonian.passed);
        assert!(!rep.is_homomorphism);
        assert!(rep.defect_mod_hbar_is_sigma && rep.classical_limit_is_j0);
        assert_eq!(rep.defect.eval_basis(&[0, 1]), one_plus(&beta, &Polynomial::one(2), 2));

        let jhat = canonical_quantum_extension(j0.action(), &rep.map, &rep.defect).unwrap();
        assert_eq!(jhat.check_homomorphism(&fed, 2).unwrap(), None);
        let sigma = sigma_2cocycle(&j0).unwrap();
        let tilde = crate::momentum::extend_classical(&j0, &sigma).unwrap();
        assert_eq!(
            classical_limit_quotient(&jhat, &tilde).unwrap(),
            QuotientReport { matches_tilde_j0: true, cocycle_matches: true }
        );
    }

    #[test]
    fn non_invariant_omega() {
        let mut m = vec![vec![Polynomial::zero(2); 2]; 2];
        m[0][1] = q();
        m[1][0] = -&q();
        let omega = TwoFormSeries::new(2, vec![(1, m)]).unwrap();
        let j0 = solve_momentum(&heisenberg()).unwrap();
        let moyal = Moyal::new(space());
        let Existence::No(w) = extended_qmm_exists(&j0, &omega, &moyal, 2).unwrap() else { panic!() };
        assert_eq!(w.not_invariant, Some((1, 1)));
    }

    #[test]
    fn constants_are_central() {
        let moyal = Moyal::new(space());
        let x = FormalSeries::from_coeffs(2, vec![Polynomial::one(2), Polynomial::constant(2, s(3))], 3).unwrap();
        assert!(check_constants_central(&moyal, &[x], 4, 2).unwrap().passed);
    }
}
