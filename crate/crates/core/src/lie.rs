//! Finite-dimensional Lie algebras, their symplectic actions by polynomial
//! vector fields, Chevalley-Eilenberg cochains and central extensions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{AlgebraError, LieError};
use crate::linalg::{self, Solution};
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::series::FormalSeries;
use crate::symplectic::{PhaseSpace, VectorField};

/// Highest cochain degree the coboundary accepts as input.
pub const MAX_COCHAIN_DEGREE: usize = 3;

/// A Lie algebra given by structure constants `[e_i, e_j] = Σ_k c_{ij}^k e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<Scalar>,
}

impl LieAlgebra {
    /// Builds from `(i, j, k, c_{ij}^k)` triples (zero-based). Each triple
    /// also fixes `c_{ji}^k = −c_{ij}^k`; contradictory entries are rejected.
    /// Antisymmetry and the full Jacobi identity are verified.
    pub fn new(dim: usize, constants: &[(usize, usize, usize, Scalar)]) -> Result<Self, LieError> {
        let mut c = vec![Scalar::zero(); dim * dim * dim];
        let mut seen = vec![false; dim * dim * dim];
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for (i, j, k, v) in constants {
            let (i, j, k) = (*i, *j, *k);
            if i >= dim || j >= dim || k >= dim {
                return Err(AlgebraError::DimensionMismatch { expected: dim, found: i.max(j).max(k) + 1 }.into());
            }
            if i == j && !v.is_zero() {
                return Err(LieError::NotAntisymmetric { i: i + 1, j: j + 1, k: k + 1 });
            }
            for (a, b, val) in [(i, j, v.clone()), (j, i, -v)] {
                let at = idx(a, b, k);
                if seen[at] && c[at] != val {
                    return Err(LieError::NotAntisymmetric { i: i + 1, j: j + 1, k: k + 1 });
                }
                seen[at] = true;
                c[at] = val;
            }
        }
        let alg = LieAlgebra { dim, c };
        alg.check_jacobi()?;
        Ok(alg)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra { dim, c: vec![Scalar::zero(); dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(Scalar::is_zero)
    }

    /// `[e_i, e_j]` as a coefficient vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<Scalar> {
        (0..self.dim).map(|k| self.constant(i, j, k).clone()).collect()
    }

    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.dim];
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        *o += &(&xy * c);
                    }
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.dim];
        v[i] = Scalar::one();
        v
    }

    /// Complete quadruple loop over `Σ_m (c_{ij}^m c_{mk}^l + c_{jk}^m c_{mi}^l + c_{ki}^m c_{mj}^l)`.
    pub fn check_jacobi(&self) -> Result<(), LieError> {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                if self.constant(i, j, i) != &-self.constant(j, i, i) {
                    return Err(LieError::NotAntisymmetric { i: i + 1, j: j + 1, k: i + 1 });
                }
                for k in 0..d {
                    for l in 0..d {
                        let mut acc = Scalar::zero();
                        for m in 0..d {
                            acc += &(self.constant(i, j, m) * self.constant(m, k, l));
                            acc += &(self.constant(j, k, m) * self.constant(m, i, l));
                            acc += &(self.constant(k, i, m) * self.constant(m, j, l));
                        }
                        if !acc.is_zero() {
                            return Err(LieError::NotJacobi {
                                i: i + 1,
                                j: j + 1,
                                k: k + 1,
                                l: l + 1,
                                value: acc.to_string(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Nonzero brackets `(i, j, [e_i, e_j])` with `i < j`, zero-based.
    pub fn bracket_table(&self) -> Vec<(usize, usize, Vec<Scalar>)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let b = self.bracket_basis(i, j);
                if b.iter().any(|v| !v.is_zero()) {
                    out.push((i, j, b));
                }
            }
        }
        out
    }
}

/// A Lie algebra acting on phase space by polynomial vector fields `X_{e_i}`.
///
/// The generators preserve `ω` and satisfy `[X_ξ, X_η] = −X_{[ξ,η]}`, so
/// `ρ(ξ) = −L_{X_ξ}` is a representation on functions.
#[derive(Debug, Clone)]
pub struct SymplecticAction {
    space: PhaseSpace,
    algebra: LieAlgebra,
    generators: Vec<VectorField>,
}

impl SymplecticAction {
    pub fn new(space: PhaseSpace, algebra: LieAlgebra, generators: Vec<VectorField>) -> Result<Self, LieError> {
        if generators.len() != algebra.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: algebra.dim(), found: generators.len() }.into());
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != space.dim()) {
            return Err(AlgebraError::DimensionMismatch { expected: space.dim(), found: g.dim() }.into());
        }
        let action = SymplecticAction { space, algebra, generators };
        action.check_symplectic()?;
        action.check_anti_homomorphism()?;
        Ok(action)
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(space: PhaseSpace, algebra: LieAlgebra, generators: Vec<VectorField>) -> Self {
        SymplecticAction { space, algebra, generators }
    }

    /// `(L_X ω)_{ab} = Σ_c (∂_a X^c ω_{cb} + ω_{ac} ∂_b X^c)` must vanish.
    pub fn check_symplectic(&self) -> Result<(), LieError> {
        let dim = self.space.dim();
        let omega = self.space.omega();
        for (g, x) in self.generators.iter().enumerate() {
            for a in 0..dim {
                for b in 0..dim {
                    let mut acc = Polynomial::zero(dim);
                    for c in 0..dim {
                        let xc = &x.components()[c];
                        if !omega[c][b].is_zero() {
                            acc = &acc + &xc.d(a).scale(&omega[c][b]);
                        }
                        if !omega[a][c].is_zero() {
                            acc = &acc + &xc.d(b).scale(&omega[a][c]);
                        }
                    }
                    if !acc.is_zero() {
                        return Err(LieError::NotSymplectic {
                            generator: g + 1,
                            a: a + 1,
                            b: b + 1,
                            value: acc.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_anti_homomorphism(&self) -> Result<(), LieError> {
        let d = self.algebra.dim();
        for i in 0..d {
            for j in (i + 1)..d {
                let lhs = self.generators[i].bracket(&self.generators[j]);
                let rhs = self.field(&self.algebra.bracket_basis(i, j)).scale(&Scalar::from_int(-1));
                if let Some(c) = (0..self.space.dim()).find(|&c| lhs.components()[c] != rhs.components()[c]) {
                    return Err(LieError::NotAntiHomomorphism { i: i + 1, j: j + 1, component: c + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &VectorField {
        &self.generators[i]
    }

    /// `X_ξ = Σ ξ_i X_{e_i}`.
    pub fn field(&self, xi: &[Scalar]) -> VectorField {
        let mut out = VectorField::zero(self.space.dim());
        for (c, x) in xi.iter().zip(&self.generators) {
            if !c.is_zero() {
                out = out.add(&x.scale(c));
            }
        }
        out
    }

    /// `ρ_c(e_i)(F) = −L_{X_{e_i}} F`, coefficientwise in ℏ.
    pub fn rho_basis(&self, i: usize, f: &FormalSeries) -> FormalSeries {
        let x = &self.generators[i];
        f.map_coeffs(|p| -&x.apply(p))
    }

    /// `ρ_c(ξ)(F)` for a coefficient vector `ξ`.
    pub fn rho_apply(&self, xi: &[Scalar], f: &FormalSeries) -> Result<FormalSeries, LieError> {
        if xi.len() != self.algebra.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.algebra.dim(), found: xi.len() }.into());
        }
        if f.num_vars() != self.space.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.space.dim(), found: f.num_vars() }.into());
        }
        let x = self.field(xi);
        Ok(f.map_coeffs(|p| -&x.apply(p)))
    }

    /// The action of `g ⊕ R` in which the central direction acts trivially.
    pub fn trivially_extended(&self, extended: LieAlgebra) -> Self {
        let mut generators = self.generators.clone();
        generators.resize(extended.dim(), VectorField::zero(self.space.dim()));
        SymplecticAction::new_unchecked(self.space.clone(), extended, generators)
    }
}

/// Value module of a cochain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CochainKind {
    /// Values in `R[[ℏ]]` (constant polynomials); the action is trivial.
    ConstantSeries,
    /// Values in `C^∞(M)[[ℏ]]` with the action `ρ_c`.
    FunctionSeries,
}

/// An alternating `k`-linear map on `g`, stored on strictly increasing basis
/// tuples. Missing entries are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    degree: usize,
    algebra_dim: usize,
    num_vars: usize,
    order: usize,
    kind: CochainKind,
    values: BTreeMap<Vec<usize>, FormalSeries>,
}

impl Cochain {
    pub fn zero(degree: usize, algebra_dim: usize, num_vars: usize, order: usize, kind: CochainKind) -> Self {
        Cochain { degree, algebra_dim, num_vars, order, kind, values: BTreeMap::new() }
    }

    /// Builds a cochain from its values on every increasing tuple.
    pub fn from_fn<F>(
        degree: usize,
        algebra_dim: usize,
        num_vars: usize,
        order: usize,
        kind: CochainKind,
        mut f: F,
    ) -> Result<Self, LieError>
    where
        F: FnMut(&[usize]) -> FormalSeries,
    {
        let mut c = Cochain::zero(degree, algebra_dim, num_vars, order, kind);
        for idx in increasing_tuples(algebra_dim, degree) {
            let v = f(&idx);
            c.set(&idx, v)?;
        }
        Ok(c)
    }

    /// A 1-cochain from one series per basis element.
    pub fn from_values(values: &[FormalSeries], kind: CochainKind) -> Result<Self, LieError> {
        let num_vars = values.first().map_or(0, FormalSeries::num_vars);
        let order = values.iter().map(FormalSeries::order).min().unwrap_or(0);
        Cochain::from_fn(1, values.len(), num_vars, order, kind, |idx| values[idx[0]].with_order(order))
    }

    /// Sets the value on an increasing tuple.
    pub fn set(&mut self, indices: &[usize], value: FormalSeries) -> Result<(), LieError> {
        if indices.len() != self.degree || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AlgebraError::DimensionMismatch { expected: self.degree, found: indices.len() }.into());
        }
        if value.num_vars() != self.num_vars {
            return Err(AlgebraError::VarCountMismatch { left: self.num_vars, right: value.num_vars() }.into());
        }
        if self.kind == CochainKind::ConstantSeries && !value.is_constant() {
            return Err(LieError::NonConstantValue(indices.iter().map(|i| i + 1).collect()));
        }
        let value = value.with_order(self.order);
        if value.is_zero() {
            self.values.remove(indices);
        } else {
            self.values.insert(indices.to_vec(), value);
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn algebra_dim(&self) -> usize {
        self.algebra_dim
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> CochainKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonzero values keyed by increasing tuples.
    pub fn values(&self) -> &BTreeMap<Vec<usize>, FormalSeries> {
        &self.values
    }

    /// Value on an arbitrary basis tuple, using antisymmetry.
    pub fn eval_basis(&self, indices: &[usize]) -> FormalSeries {
        let zero = || FormalSeries::zero(self.num_vars, self.order);
        let mut idx = indices.to_vec();
        let mut sign = 1i64;
        // insertion sort tracking the permutation sign
        for a in 1..idx.len() {
            let mut b = a;
            while b > 0 && idx[b - 1] > idx[b] {
                idx.swap(b - 1, b);
                sign = -sign;
                b -= 1;
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return zero();
        }
        match self.values.get(&idx) {
            Some(v) if sign < 0 => -v,
            Some(v) => v.clone(),
            None => zero(),
        }
    }

    /// Value on arbitrary coefficient vectors, by multilinearity.
    pub fn eval(&self, args: &[Vec<Scalar>]) -> FormalSeries {
        let mut acc = FormalSeries::zero(self.num_vars, self.order);
        let mut idx = vec![0; args.len()];
        self.eval_rec(args, 0, &mut idx, Scalar::one(), &mut acc);
        acc
    }

    fn eval_rec(&self, args: &[Vec<Scalar>], pos: usize, idx: &mut Vec<usize>, w: Scalar, acc: &mut FormalSeries) {
        if pos == args.len() {
            let v = self.eval_basis(idx);
            if !v.is_zero() {
                *acc = &*acc + &v.scale(&w);
            }
            return;
        }
        for (i, c) in args[pos].iter().enumerate() {
            if !c.is_zero() {
                idx[pos] = i;
                self.eval_rec(args, pos + 1, idx, &w * c, acc);
            }
        }
    }

    pub fn scale(&self, c: &Scalar) -> Cochain {
        let mut out = self.clone();
        out.values = self.values.iter().map(|(k, v)| (k.clone(), v.scale(c))).filter(|(_, v)| !v.is_zero()).collect();
        out
    }

    pub fn checked_sub(&self, other: &Cochain) -> Result<Cochain, LieError> {
        if self.degree != other.degree || self.algebra_dim != other.algebra_dim {
            return Err(AlgebraError::DimensionMismatch { expected: self.degree, found: other.degree }.into());
        }
        let order = self.order.min(other.order);
        let kind = if self.kind == CochainKind::ConstantSeries && other.kind == CochainKind::ConstantSeries {
            CochainKind::ConstantSeries
        } else {
            CochainKind::FunctionSeries
        };
        Cochain::from_fn(self.degree, self.algebra_dim, self.num_vars, order, kind, |idx| {
            &self.eval_basis(idx).with_order(order) - &other.eval_basis(idx).with_order(order)
        })
    }

    /// Reinterprets the values as constants, failing if any value is not.
    pub fn into_constant(self) -> Result<Cochain, LieError> {
        if let Some((k, _)) = self.values.iter().find(|(_, v)| !v.is_constant()) {
            return Err(LieError::NonConstantValue(k.iter().map(|i| i + 1).collect()));
        }
        Ok(Cochain { kind: CochainKind::ConstantSeries, ..self })
    }

    /// The same cochain, truncated (or zero-padded) to `order`.
    pub fn with_order(&self, order: usize) -> Cochain {
        let mut out = self.clone();
        out.order = order;
        out.values =
            self.values.iter().map(|(k, v)| (k.clone(), v.with_order(order))).filter(|(_, v)| !v.is_zero()).collect();
        out
    }
}

/// All strictly increasing `k`-tuples from `0..n`.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Chevalley-Eilenberg coboundary for the module `C^∞(M)[[ℏ]]` with
/// `ρ_c(ξ) = −L_{X_ξ}`:
///
/// `(δα)(x_0..x_k) = Σ_i (−1)^i ρ(x_i) α(..x̂_i..) + Σ_{i<j} (−1)^{i+j} α([x_i,x_j], ..x̂_i..x̂_j..)`.
///
/// For `k = 1` this is `ρ(ξ)α(η) − ρ(η)α(ξ) − α([ξ,η])`.
pub fn ce_coboundary(action: &SymplecticAction, alpha: &Cochain) -> Result<Cochain, LieError> {
    coboundary_impl(action.algebra(), Some(action), alpha)
}

/// Coboundary for the trivial module `R[[ℏ]]`; only the bracket terms remain.
pub fn ce_coboundary_trivial(algebra: &LieAlgebra, alpha: &Cochain) -> Result<Cochain, LieError> {
    coboundary_impl(algebra, None, alpha)
}

fn coboundary_impl(
    algebra: &LieAlgebra,
    action: Option<&SymplecticAction>,
    alpha: &Cochain,
) -> Result<Cochain, LieError> {
    let k = alpha.degree();
    if k > MAX_COCHAIN_DEGREE {
        return Err(LieError::DegreeTooHigh(k));
    }
    if alpha.algebra_dim() != algebra.dim() {
        return Err(AlgebraError::DimensionMismatch { expected: algebra.dim(), found: alpha.algebra_dim() }.into());
    }
    let d = algebra.dim();
    Cochain::from_fn(k + 1, d, alpha.num_vars(), alpha.order(), alpha.kind(), |xs| {
        let mut acc = FormalSeries::zero(alpha.num_vars(), alpha.order());
        if let Some(action) = action {
            for i in 0..=k {
                let rest: Vec<usize> = xs.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &x)| x).collect();
                let term = action.rho_basis(xs[i], &alpha.eval_basis(&rest));
                acc = if i % 2 == 0 { &acc + &term } else { &acc - &term };
            }
        }
        for i in 0..=k {
            for j in (i + 1)..=k {
                let br = algebra.bracket_basis(xs[i], xs[j]);
                if br.iter().all(Scalar::is_zero) {
                    continue;
                }
                let mut args = vec![br];
                args.extend(
                    xs.iter().enumerate().filter(|&(t, _)| t != i && t != j).map(|(_, &x)| algebra.basis_vector(x)),
                );
                let term = alpha.eval(&args);
                acc = if (i + j) % 2 == 0 { &acc + &term } else { &acc - &term };
            }
        }
        acc
    })
}

/// Requires `δθ = 0` for a constant-valued 2-cochain.
pub fn check_two_cocycle(algebra: &LieAlgebra, theta: &Cochain) -> Result<(), LieError> {
    if theta.degree() != 2 {
        return Err(AlgebraError::DimensionMismatch { expected: 2, found: theta.degree() }.into());
    }
    let d = ce_coboundary_trivial(algebra, theta)?;
    if let Some((idx, v)) = d.values().iter().next() {
        return Err(LieError::NotACocycle { indices: idx.iter().map(|i| i + 1).collect(), value: v.to_string() });
    }
    Ok(())
}

/// Finds a constant 1-cochain `μ` with `θ(e_i, e_j) = μ([e_i, e_j])`, solving
/// the linear system separately at each power of ℏ.
pub fn cocycle_trivializer(algebra: &LieAlgebra, theta: &Cochain) -> Result<Cochain, LieError> {
    if theta.kind() != CochainKind::ConstantSeries {
        return Err(LieError::NonConstantValue(vec![]));
    }
    check_two_cocycle(algebra, theta)?;
    let d = algebra.dim();
    let pairs = increasing_tuples(d, 2);
    let matrix: Vec<Vec<Scalar>> = pairs.iter().map(|p| algebra.bracket_basis(p[0], p[1])).collect();
    let mut mu_coeffs = vec![vec![Scalar::zero(); theta.order() + 1]; d];
    for r in 0..=theta.order() {
        let rhs: Vec<Scalar> = pairs.iter().map(|p| theta.eval_basis(p).coeff(r).constant_term()).collect();
        match linalg::solve(&matrix, &rhs, d) {
            Solution::Found(x) => {
                for (k, v) in x.into_iter().enumerate() {
                    mu_coeffs[k][r] = v;
                }
            }
            Solution::Inconsistent { row } => {
                return Err(LieError::NotExact { pair: (pairs[row][0] + 1, pairs[row][1] + 1), order: r });
            }
        }
    }
    let n = theta.num_vars();
    let values: Vec<FormalSeries> = mu_coeffs
        .into_iter()
        .map(|cs| {
            let polys = cs.into_iter().map(|c| Polynomial::constant(n, c)).collect();
            FormalSeries::from_coeffs(n, polys, theta.order()).expect("matching variable count")
        })
        .collect();
    Cochain::from_fn(1, d, n, theta.order(), CochainKind::ConstantSeries, |idx| values[idx[0]].clone())
}

/// Whether the central direction carries real numbers or series in ℏ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CenterTag {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "R[[hbar]]")]
    RealSeries,
}

/// An element `(ξ, a)` of `g ⊕ V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtElement {
    pub base: Vec<Scalar>,
    pub central: FormalSeries,
}

/// `g ⊕ V` with bracket `[(ξ,a),(η,b)] = ([ξ,η], Θ(ξ,η))`.
#[derive(Debug, Clone)]
pub struct ExtendedAlgebra {
    base: LieAlgebra,
    center: CenterTag,
    cocycle: Cochain,
}

/// Builds the central extension by a constant-valued 2-cocycle and checks
/// the Jacobi identity on every basis triple, central element included.
pub fn central_extend(algebra: &LieAlgebra, theta: &Cochain, center: CenterTag) -> Result<ExtendedAlgebra, LieError> {
    if theta.kind() != CochainKind::ConstantSeries {
        return Err(LieError::NonConstantValue(vec![]));
    }
    check_two_cocycle(algebra, theta)?;
    let ext = ExtendedAlgebra { base: algebra.clone(), center, cocycle: theta.clone() };
    ext.check_jacobi()?;
    Ok(ext)
}

impl ExtendedAlgebra {
    pub fn base(&self) -> &LieAlgebra {
        &self.base
    }

    pub fn center(&self) -> CenterTag {
        self.center
    }

    pub fn cocycle(&self) -> &Cochain {
        &self.cocycle
    }

    /// `dim g + 1`; the last basis element is the central unit.
    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn central_index(&self) -> usize {
        self.base.dim()
    }

    fn zero_central(&self) -> FormalSeries {
        FormalSeries::zero(self.cocycle.num_vars(), self.cocycle.order())
    }

    pub fn basis(&self, i: usize) -> ExtElement {
        if i == self.central_index() {
            ExtElement {
                base: vec![Scalar::zero(); self.base.dim()],
                central: FormalSeries::constant(self.cocycle.num_vars(), Scalar::one(), self.cocycle.order()),
            }
        } else {
            ExtElement { base: self.base.basis_vector(i), central: self.zero_central() }
        }
    }

    pub fn bracket(&self, x: &ExtElement, y: &ExtElement) -> ExtElement {
        ExtElement {
            base: self.base.bracket(&x.base, &y.base),
            central: self.cocycle.eval(&[x.base.clone(), y.base.clone()]),
        }
    }

    pub fn check_jacobi(&self) -> Result<(), LieError> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b, c) = (self.basis(i), self.basis(j), self.basis(k));
                    let t1 = self.bracket(&self.bracket(&a, &b), &c);
                    let t2 = self.bracket(&self.bracket(&b, &c), &a);
                    let t3 = self.bracket(&self.bracket(&c, &a), &b);
                    let base_zero =
                        (0..self.base.dim()).all(|m| (&(&t1.base[m] + &t2.base[m]) + &t3.base[m]).is_zero());
                    let central = &(&t1.central + &t2.central) + &t3.central;
                    if !base_zero || !central.is_zero() {
                        return Err(LieError::NotJacobi {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            l: 0,
                            value: central.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Basis brackets `[ẽ_i, ẽ_j]` for `i < j`, central element included.
    pub fn bracket_table(&self) -> Vec<(usize, usize, ExtElement)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                out.push((i, j, self.bracket(&self.basis(i), &self.basis(j))));
            }
        }
        out
    }

    /// For an ℏ-independent cocycle, the extension as an ordinary Lie algebra
    /// of dimension `dim g + 1` (central unit last).
    pub fn as_lie_algebra(&self) -> Option<LieAlgebra> {
        let d = self.base.dim();
        let mut triples = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    let c = self.base.constant(i, j, k);
                    if !c.is_zero() {
                        triples.push((i, j, k, c.clone()));
                    }
                }
                let theta = self.cocycle.eval_basis(&[i, j]);
                if (1..=theta.order()).any(|r| !theta.coeff(r).is_zero()) {
                    return None;
                }
                let v = theta.coeff(0).constant_term();
                if !v.is_zero() {
                    triples.push((i, j, d, v));
                }
            }
        }
        LieAlgebra::new(d + 1, &triples).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::Convention;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn q() -> Polynomial {
        Polynomial::var(2, 0)
    }

    fn p() -> Polynomial {
        Polynomial::var(2, 1)
    }

    fn sl2() -> LieAlgebra {
        LieAlgebra::new(3, &[(0, 1, 2, s(1)), (2, 0, 0, s(-2)), (2, 1, 1, s(2))]).unwrap()
    }

    fn sl2_action() -> SymplecticAction {
        let space = PhaseSpace::standard(1, Convention::RealHalf);
        let gens = vec![
            VectorField::new(vec![Polynomial::zero(2), -&q()]).unwrap(),
            VectorField::new(vec![p(), Polynomial::zero(2)]).unwrap(),
            VectorField::new(vec![q(), -&p()]).unwrap(),
        ];
        SymplecticAction::new(space, sl2(), gens).unwrap()
    }

    fn heisenberg_action() -> SymplecticAction {
        let space = PhaseSpace::standard(1, Convention::RealHalf);
        let gens = vec![
            VectorField::new(vec![Polynomial::one(2), Polynomial::zero(2)]).unwrap(),
            VectorField::new(vec![Polynomial::zero(2), Polynomial::one(2)]).unwrap(),
        ];
        SymplecticAction::new(space, LieAlgebra::abelian(2), gens).unwrap()
    }

    fn const_series(v: Scalar) -> FormalSeries {
        FormalSeries::constant(2, v, 0)
    }

    #[test]
    fn rejects_non_jacobi_constants() {
        // [e1,e2] = e3, [e2,e3] = e2 violates Jacobi.
        let err = LieAlgebra::new(3, &[(0, 1, 2, s(1)), (1, 2, 1, s(1))]).unwrap_err();
        assert!(matches!(err, LieError::NotJacobi { .. }), "{err}");
        let err = LieAlgebra::new(2, &[(0, 1, 0, s(1)), (1, 0, 0, s(1))]).unwrap_err();
        assert!(matches!(err, LieError::NotAntisymmetric { .. }));
    }

    #[test]
    fn rho_examples() {
        let h = heisenberg_action();
        let r = h.rho_apply(&[s(1), s(0)], &FormalSeries::from_poly(q(), 0)).unwrap();
        assert_eq!(r, const_series(s(-1)));
        assert!(h.rho_apply(&[s(2), s(3)], &const_series(s(5))).unwrap().is_zero());
        let a = sl2_action();
        let r = a.rho_apply(&[s(0), s(0), s(1)], &FormalSeries::from_poly(q(), 0)).unwrap();
        assert_eq!(r, FormalSeries::from_poly(-&q(), 0));
        assert!(a.rho_apply(&[s(1)], &const_series(s(1))).is_err());
    }

    #[test]
    fn non_symplectic_generator_rejected() {
        let space = PhaseSpace::standard(1, Convention::RealHalf);
        let gens = vec![VectorField::new(vec![q(), Polynomial::zero(2)]).unwrap()];
        let err = SymplecticAction::new(space, LieAlgebra::abelian(1), gens).unwrap_err();
        assert!(matches!(err, LieError::NotSymplectic { generator: 1, .. }));
    }

    #[test]
    fn wrong_orientation_rejected() {
        // Generators satisfying [X,Y] = +X_[ξ,η] break the left-action convention.
        let space = PhaseSpace::standard(1, Convention::RealHalf);
        let gens = vec![
            VectorField::new(vec![Polynomial::zero(2), -&q()]).unwrap(),
            VectorField::new(vec![p(), Polynomial::zero(2)]).unwrap(),
            VectorField::new(vec![-&q(), p()]).unwrap(),
        ];
        let err = SymplecticAction::new(space, sl2(), gens).unwrap_err();
        assert!(matches!(err, LieError::NotAntiHomomorphism { .. }));
    }

    #[test]
    fn coboundary_examples() {
        // abelian algebra, constant 1-cochain
        let h = heisenberg_action();
        let mu = Cochain::from_values(&[const_series(s(3)), const_series(s(-7))], CochainKind::FunctionSeries).unwrap();
        assert!(ce_coboundary(&h, &mu).unwrap().is_zero());

        // J₊ = ℏβ(p, −q) with β = 1/3 gives (δJ₊)(e1,e2) = 2ℏβ
        let beta = Scalar::ratio(1, 3);
        let hb = |f: Polynomial| FormalSeries::from_coeffs(2, vec![Polynomial::zero(2), f.scale(&beta)], 2).unwrap();
        let jp = Cochain::from_values(&[hb(p()), hb(-&q())], CochainKind::FunctionSeries).unwrap();
        let d = ce_coboundary(&h, &jp).unwrap();
        let expected =
            FormalSeries::from_coeffs(2, vec![Polynomial::zero(2), Polynomial::constant(2, &beta * &s(2))], 2).unwrap();
        assert_eq!(d.eval_basis(&[0, 1]), expected);
    }

    #[test]
    fn coboundary_squares_to_zero_on_sl2() {
        let a = sl2_action();
        let f = |v: Polynomial| FormalSeries::from_poly(v, 1);
        let alpha = Cochain::from_values(
            &[f(&q().pow(3) + &p()), f(&q() * &p().pow(2)), f(p().pow(4))],
            CochainKind::FunctionSeries,
        )
        .unwrap();
        let d1 = ce_coboundary(&a, &alpha).unwrap();
        assert!(!d1.is_zero());
        assert!(ce_coboundary(&a, &d1).unwrap().is_zero());
        let d3 = ce_coboundary(&a, &ce_coboundary(&a, &d1).unwrap()).unwrap();
        assert!(d3.is_zero());
        assert!(matches!(
            ce_coboundary(&a, &Cochain::zero(4, 3, 2, 0, CochainKind::FunctionSeries)),
            Err(LieError::DegreeTooHigh(4))
        ));
    }

    #[test]
    fn trivializer_examples() {
        let heis = LieAlgebra::abelian(2);
        let mut sigma = Cochain::zero(2, 2, 2, 0, CochainKind::ConstantSeries);
        sigma.set(&[0, 1], const_series(s(1))).unwrap();
        assert!(matches!(cocycle_trivializer(&heis, &sigma), Err(LieError::NotExact { pair: (1, 2), order: 0 })));

        let zero = Cochain::zero(2, 3, 2, 0, CochainKind::ConstantSeries);
        assert!(cocycle_trivializer(&sl2(), &zero).unwrap().is_zero());

        // any 2-cocycle on sl(2) is exact: take θ = δ(μ₀) for some μ₀ and recover it
        let mu0 = Cochain::from_values(
            &[const_series(s(2)), const_series(s(-1)), const_series(s(5))],
            CochainKind::ConstantSeries,
        )
        .unwrap();
        let theta = ce_coboundary_trivial(&sl2(), &mu0).unwrap().scale(&s(-1));
        let mu = cocycle_trivializer(&sl2(), &theta).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(theta.eval_basis(&[i, j]), mu.eval(&[sl2().bracket_basis(i, j)]));
            }
        }
    }

    #[test]
    fn central_extension_of_heisenberg() {
        let heis = LieAlgebra::abelian(2);
        let mut sigma = Cochain::zero(2, 2, 2, 0, CochainKind::ConstantSeries);
        sigma.set(&[0, 1], const_series(s(1))).unwrap();
        let ext = central_extend(&heis, &sigma, CenterTag::Real).unwrap();
        let b = ext.bracket(&ext.basis(0), &ext.basis(1));
        assert_eq!(b.base, vec![s(0), s(0)]);
        assert_eq!(b.central, const_series(s(1)));
        let lie = ext.as_lie_algebra().unwrap();
        assert_eq!(lie.bracket_basis(0, 1), vec![s(0), s(0), s(1)]);
        assert!(lie.bracket_basis(0, 2).iter().all(Scalar::is_zero));
    }

    #[test]
    fn central_extension_rejects_non_cocycle() {
        // On sl(2) ⊕ R the 2-cochain with only θ(e1,e4) = 1 is not closed.
        let g = LieAlgebra::new(4, &[(0, 1, 2, s(1)), (2, 0, 0, s(-2)), (2, 1, 1, s(2))]).unwrap();
        let mut theta = Cochain::zero(2, 4, 2, 0, CochainKind::ConstantSeries);
        theta.set(&[0, 3], const_series(s(1))).unwrap();
        assert!(matches!(central_extend(&g, &theta, CenterTag::Real), Err(LieError::NotACocycle { .. })));
        let zero = Cochain::zero(2, 3, 2, 0, CochainKind::ConstantSeries);
        let ext = central_extend(&sl2(), &zero, CenterTag::Real).unwrap();
        assert_eq!(ext.as_lie_algebra().unwrap().bracket_basis(0, 1), vec![s(0), s(0), s(1), s(0)]);
    }
}
