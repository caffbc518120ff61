//! Constant symplectic structure on `R^{2n}`: Poisson bracket, Hamiltonian
//! vector fields, the Moyal-Weyl product, and star-product axiom checks.

use std::fmt;

use serde::Serialize;

use crate::error::{AlgebraError, FedosovError, SymplecticError};
use crate::linalg::{self, Matrix};
use crate::par::Exec;
use crate::poly::{Exponents, Polynomial};
use crate::scalar::Scalar;
use crate::series::FormalSeries;

/// Which first-order coefficient the star products use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `C₁ = ½{f,g}`; all bundled scenarios stay in `Q`.
    #[default]
    RealHalf,
    /// `C₁ = −(i/2){f,g}`.
    MinusIHalf,
}

impl Convention {
    /// `c₁` with `C₁(f,g) = c₁·{f,g}` for the Moyal product.
    pub fn first_order_coefficient(self) -> Scalar {
        match self {
            Convention::RealHalf => Scalar::ratio(1, 2),
            Convention::MinusIHalf => Scalar::parse_parts("0", "-1/2").expect("literal"),
        }
    }

    /// `κ = 1/(2c₁)`, so that `(κ/ℏ)[f,g]_⋆ = {f,g} + O(ℏ)`.
    pub fn commutator_unit(self) -> Scalar {
        match self {
            Convention::RealHalf => Scalar::one(),
            Convention::MinusIHalf => Scalar::i(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::RealHalf => "real_half",
            Convention::MinusIHalf => "minus_i_half",
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = AlgebraError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real_half" => Ok(Convention::RealHalf),
            "minus_i_half" => Ok(Convention::MinusIHalf),
            other => Err(AlgebraError::Parse(format!("unknown convention {other:?}"))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `R^{2n}` with constant `ω` and Poisson tensor `π`, tied by
/// `Σ_j π^{ij} ω_{jk} = −δ^i_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpace {
    n: usize,
    omega: Matrix,
    pi: Matrix,
    convention: Convention,
}

impl PhaseSpace {
    /// Validates `ω` (and `π` when given); a missing `π` is computed as `−ω⁻¹`.
    pub fn new(n: usize, omega: Matrix, pi: Option<Matrix>, convention: Convention) -> Result<Self, SymplecticError> {
        let dim = 2 * n;
        check_square(&omega, dim)?;
        for i in 0..dim {
            for j in 0..dim {
                if omega[i][j] != -&omega[j][i] {
                    return Err(SymplecticError::OmegaNotAntisymmetric(i + 1, j + 1));
                }
            }
        }
        let pi = match pi {
            Some(pi) => {
                check_square(&pi, dim)?;
                pi
            }
            None => {
                let inv = linalg::inverse(&omega).ok_or(SymplecticError::OmegaDegenerate)?;
                inv.into_iter().map(|row| row.into_iter().map(|v| -v).collect()).collect()
            }
        };
        if linalg::inverse(&omega).is_none() {
            return Err(SymplecticError::OmegaDegenerate);
        }
        for i in 0..dim {
            for j in 0..dim {
                if pi[i][j] != -&pi[j][i] {
                    return Err(SymplecticError::PiNotAntisymmetric(i + 1, j + 1));
                }
            }
        }
        let prod = linalg::mat_mul(&pi, &omega);
        for (i, row) in prod.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let expected = if i == k { Scalar::from_int(-1) } else { Scalar::zero() };
                if *v != expected {
                    return Err(SymplecticError::Incompatible(i + 1, k + 1));
                }
            }
        }
        Ok(PhaseSpace { n, omega, pi, convention })
    }

    /// Darboux form `ω = Σ dq_i ∧ dp_i` with coordinates `(q_1..q_n, p_1..p_n)`,
    /// so `{q_i, p_i} = 1`.
    pub fn standard(n: usize, convention: Convention) -> Self {
        let dim = 2 * n;
        let mut omega = vec![vec![Scalar::zero(); dim]; dim];
        for i in 0..n {
            omega[i][i + n] = Scalar::one();
            omega[i + n][i] = Scalar::from_int(-1);
        }
        PhaseSpace::new(n, omega, None, convention).expect("standard form is valid")
    }

    pub fn with_convention(&self, convention: Convention) -> Self {
        PhaseSpace { convention, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn omega(&self) -> &Matrix {
        &self.omega
    }

    pub fn pi(&self) -> &Matrix {
        &self.pi
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// `q, p` for one degree of freedom, `q1.., p1..` otherwise.
    pub fn var_names(&self) -> Vec<String> {
        if self.n == 1 {
            return vec!["q".into(), "p".into()];
        }
        (1..=self.n).map(|i| format!("q{i}")).chain((1..=self.n).map(|i| format!("p{i}"))).collect()
    }

    pub fn fmt_poly(&self, p: &Polynomial) -> String {
        let names = self.var_names();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        p.display_with(&names)
    }

    pub fn fmt_series(&self, s: &FormalSeries) -> String {
        let names = self.var_names();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        s.display_with(&names)
    }

    pub(crate) fn check_poly(&self, f: &Polynomial) -> Result<(), AlgebraError> {
        if f.num_vars() != self.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim(), found: f.num_vars() });
        }
        Ok(())
    }

    /// `π^{ij}·c₁` for every ordered pair with `π^{ij} ≠ 0`.
    pub(crate) fn contraction_pairs(&self, c: &Scalar) -> Vec<Contraction> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.pi[i][j].is_zero() {
                    out.push(Contraction { i, j, weight: &self.pi[i][j] * c });
                }
            }
        }
        out
    }
}

fn check_square(m: &Matrix, dim: usize) -> Result<(), SymplecticError> {
    if m.len() != dim {
        return Err(AlgebraError::DimensionMismatch { expected: dim, found: m.len() }.into());
    }
    if let Some(row) = m.iter().find(|r| r.len() != dim) {
        return Err(AlgebraError::DimensionMismatch { expected: dim, found: row.len() }.into());
    }
    Ok(())
}

/// One commuting factor `exp(weight·∂_i ⊗ ∂_j)` of the Moyal bidifferential
/// operator.
#[derive(Debug, Clone)]
pub(crate) struct Contraction {
    pub i: usize,
    pub j: usize,
    pub weight: Scalar,
}

/// Result of applying some number of contractions to a pair of monomials.
#[derive(Debug, Clone)]
pub(crate) struct Contracted {
    pub coeff: Scalar,
    pub left: Exponents,
    pub right: Exponents,
    pub k: u32,
}

/// Expands `exp(Σ weight·∂_i⊗∂_j)(y^a ⊗ y^b)` keeping only terms whose total
/// number of contractions lies in `min_k..=max_k`.
pub(crate) fn contract(pairs: &[Contraction], a: &[u32], b: &[u32], min_k: u32, max_k: u32) -> Vec<Contracted> {
    let mut states = vec![Contracted { coeff: Scalar::one(), left: a.to_vec(), right: b.to_vec(), k: 0 }];
    for c in pairs {
        let mut next = Vec::with_capacity(states.len());
        for st in states {
            let (a, b) = (st.left[c.i], st.right[c.j]);
            let top = a.min(b).min(max_k - st.k);
            // term_m = term_{m-1} · weight · (a−m+1)(b−m+1)/m
            let mut coeff = st.coeff.clone();
            for m in 0..=top {
                if m > 0 {
                    let step = Scalar::ratio(((a - m + 1) as i64) * ((b - m + 1) as i64), m as i64);
                    coeff = &(&coeff * &c.weight) * &step;
                }
                let mut left = st.left.clone();
                let mut right = st.right.clone();
                left[c.i] -= m;
                right[c.j] -= m;
                next.push(Contracted { coeff: coeff.clone(), left, right, k: st.k + m });
            }
        }
        states = next;
    }
    states.retain(|s| s.k >= min_k);
    states
}

/// A vector field with polynomial components `X = X^i ∂_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VectorField {
    components: Vec<Polynomial>,
}

impl VectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self, AlgebraError> {
        let dim = components.len();
        if let Some(c) = components.iter().find(|c| c.num_vars() != dim) {
            return Err(AlgebraError::VarCountMismatch { left: dim, right: c.num_vars() });
        }
        Ok(VectorField { components })
    }

    pub fn zero(dim: usize) -> Self {
        VectorField { components: vec![Polynomial::zero(dim); dim] }
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    /// Lie derivative of a function, `X^i ∂_i f`.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(f.num_vars());
        for (i, x) in self.components.iter().enumerate() {
            if !x.is_zero() {
                out = &out + &(x * &f.d(i));
            }
        }
        out
    }

    /// `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let components =
            (0..self.dim()).map(|i| &self.apply(&other.components[i]) - &other.apply(&self.components[i])).collect();
        VectorField { components }
    }

    pub fn scale(&self, c: &Scalar) -> VectorField {
        VectorField { components: self.components.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField { components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect() }
    }

    /// Largest polynomial degree among the components (0 for the zero field).
    pub fn max_degree(&self) -> u32 {
        self.components.iter().filter_map(Polynomial::degree).max().unwrap_or(0)
    }

    /// `i_X β` for a 2-form given by its antisymmetric component matrix:
    /// `(i_X β)_b = X^a β_{ab}`.
    pub fn contract_two_form(&self, beta: &[Vec<Polynomial>]) -> Vec<Polynomial> {
        let dim = self.dim();
        (0..dim)
            .map(|b| {
                let mut acc = Polynomial::zero(dim);
                for a in 0..dim {
                    if !self.components[a].is_zero() && !beta[a][b].is_zero() {
                        acc = &acc + &(&self.components[a] * &beta[a][b]);
                    }
                }
                acc
            })
            .collect()
    }
}

/// `ω` as a matrix of constant polynomials.
pub fn omega_form(space: &PhaseSpace) -> Vec<Vec<Polynomial>> {
    let dim = space.dim();
    space.omega().iter().map(|row| row.iter().map(|v| Polynomial::constant(dim, v.clone())).collect()).collect()
}

/// `β(X, Y) = X^a β_{ab} Y^b`.
pub fn eval_two_form(beta: &[Vec<Polynomial>], x: &VectorField, y: &VectorField) -> Polynomial {
    let ix = x.contract_two_form(beta);
    let dim = x.dim();
    let mut acc = Polynomial::zero(dim);
    for (b, v) in ix.iter().enumerate() {
        if !v.is_zero() {
            acc = &acc + &(v * &y.components()[b]);
        }
    }
    acc
}

/// `{f, g} = π^{ij} ∂_i f ∂_j g`.
pub fn poisson_bracket(space: &PhaseSpace, f: &Polynomial, g: &Polynomial) -> Result<Polynomial, AlgebraError> {
    space.check_poly(f)?;
    space.check_poly(g)?;
    let dim = space.dim();
    let df: Vec<Polynomial> = (0..dim).map(|i| f.d(i)).collect();
    let dg: Vec<Polynomial> = (0..dim).map(|j| g.d(j)).collect();
    let mut out = Polynomial::zero(dim);
    for i in 0..dim {
        if df[i].is_zero() {
            continue;
        }
        for j in 0..dim {
            let pij = &space.pi()[i][j];
            if pij.is_zero() || dg[j].is_zero() {
                continue;
            }
            out = &out + &(&df[i] * &dg[j]).scale(pij);
        }
    }
    Ok(out)
}

/// `X_f^i = π^{ij} ∂_j f`, the unique field with `i_{X_f} ω = df`.
pub fn hamiltonian_vf(space: &PhaseSpace, f: &Polynomial) -> VectorField {
    let dim = space.dim();
    let df: Vec<Polynomial> = (0..dim).map(|j| f.d(j)).collect();
    let components = (0..dim)
        .map(|i| {
            let mut acc = Polynomial::zero(dim);
            for (j, dfj) in df.iter().enumerate() {
                if !space.pi()[i][j].is_zero() {
                    acc = &acc + &dfj.scale(&space.pi()[i][j]);
                }
            }
            acc
        })
        .collect();
    VectorField { components }
}

/// Exterior derivative of a function as a list of components.
pub fn differential(f: &Polynomial) -> Vec<Polynomial> {
    (0..f.num_vars()).map(|i| f.d(i)).collect()
}

/// Integrates a closed polynomial 1-form `α = α_i dy^i` by the radial
/// homotopy, with zero constant term. Each monomial `c·y^m` of `α_i` with
/// `|m| = k` contributes `c/(k+1)·y^i·y^m`.
pub fn integrate_closed_one_form(alpha: &[Polynomial]) -> Result<Polynomial, SymplecticError> {
    let dim = alpha.len();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let curl = &alpha[b].d(a) - &alpha[a].d(b);
            if !curl.is_zero() {
                return Err(SymplecticError::NotClosed(a + 1, b + 1, curl.to_string()));
            }
        }
    }
    let mut out = Polynomial::zero(dim);
    for (i, ai) in alpha.iter().enumerate() {
        for (e, c) in ai.terms() {
            let k: u32 = e.iter().sum();
            let mut e2 = e.clone();
            e2[i] += 1;
            out.add_term(e2, c * &Scalar::ratio(1, k as i64 + 1));
        }
    }
    Ok(out)
}

/// A product on `C^∞(M)[[ℏ]]` restricted to polynomial series.
pub trait StarProduct: Sync {
    fn space(&self) -> &PhaseSpace;

    fn star(&self, f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries, FedosovError>;

    fn name(&self) -> String;
}

/// The Moyal-Weyl product on a symplectic vector space.
#[derive(Debug, Clone)]
pub struct Moyal {
    space: PhaseSpace,
    exec: Exec,
}

impl Moyal {
    pub fn new(space: PhaseSpace) -> Self {
        Moyal { space, exec: Exec::default() }
    }

    pub fn with_exec(space: PhaseSpace, exec: Exec) -> Self {
        Moyal { space, exec }
    }
}

impl StarProduct for Moyal {
    fn space(&self) -> &PhaseSpace {
        &self.space
    }

    fn star(&self, f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries, FedosovError> {
        Ok(moyal_product_with(&self.space, f, g, self.exec)?)
    }

    fn name(&self) -> String {
        format!("moyal[{}]", self.space.convention())
    }
}

/// Plain commutative product, extended ℏ-linearly. Not a deformation; used
/// as a negative control for the axiom checker.
#[derive(Debug, Clone)]
pub struct Pointwise(pub PhaseSpace);

impl StarProduct for Pointwise {
    fn space(&self) -> &PhaseSpace {
        &self.0
    }

    fn star(&self, f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries, FedosovError> {
        Ok(f.checked_mul(g)?)
    }

    fn name(&self) -> String {
        "pointwise".into()
    }
}

pub fn moyal_product(space: &PhaseSpace, f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries, AlgebraError> {
    moyal_product_with(space, f, g, Exec::default())
}

/// `f⋆g = Σ_k (c₁ℏ)^k/k! π^{i₁j₁}…π^{i_kj_k} ∂^k f ∂^k g`, truncated at the
/// smaller operand order.
pub fn moyal_product_with(
    space: &PhaseSpace,
    f: &FormalSeries,
    g: &FormalSeries,
    exec: Exec,
) -> Result<FormalSeries, AlgebraError> {
    if f.num_vars() != space.dim() || g.num_vars() != space.dim() {
        return Err(AlgebraError::DimensionMismatch {
            expected: space.dim(),
            found: if f.num_vars() != space.dim() { f.num_vars() } else { g.num_vars() },
        });
    }
    let order = f.order().min(g.order());
    let dim = space.dim();
    let pairs = space.contraction_pairs(&space.convention().first_order_coefficient());
    let left: Vec<(usize, &Exponents, &Scalar)> =
        (0..=order).flat_map(|r| f.coeff(r).terms().map(move |(e, c)| (r, e, c))).collect();
    let partials = exec.map(&left, |&(r, ea, ca)| {
        let mut acc = vec![Polynomial::zero(dim); order + 1];
        for s in 0..=(order - r) {
            for (eb, cb) in g.coeff(s).terms() {
                let base = ca * cb;
                for t in contract(&pairs, ea, eb, 0, (order - r - s) as u32) {
                    let e: Exponents = t.left.iter().zip(&t.right).map(|(a, b)| a + b).collect();
                    acc[r + s + t.k as usize].add_term(e, &base * &t.coeff);
                }
            }
        }
        acc
    });
    let mut coeffs = vec![Polynomial::zero(dim); order + 1];
    for part in partials {
        for (r, p) in part.into_iter().enumerate() {
            if !p.is_zero() {
                coeffs[r] = &coeffs[r] + &p;
            }
        }
    }
    FormalSeries::from_coeffs(dim, coeffs, order)
}

/// `(1/ℏ)(F⋆G − G⋆F)`, one order lower than the operands.
pub fn star_commutator_scaled<S: StarProduct + ?Sized>(
    star: &S,
    f: &FormalSeries,
    g: &FormalSeries,
) -> Result<FormalSeries, FedosovError> {
    let fg = star.star(f, g)?;
    let gf = star.star(g, f)?;
    Ok((&fg - &gf).divide_by_hbar()?)
}

/// `(κ/ℏ)[F, G]_⋆` with `κ` the convention's commutator unit; this is the
/// bracket whose ℏ⁰ part is `{F, G}` in either convention.
pub fn quantum_bracket<S: StarProduct + ?Sized>(
    star: &S,
    f: &FormalSeries,
    g: &FormalSeries,
) -> Result<FormalSeries, FedosovError> {
    let unit = star.space().convention().commutator_unit();
    Ok(star_commutator_scaled(star, f, g)?.scale(&unit))
}

/// Verdict for one axiom of a star product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    pub witness: Option<String>,
}

impl AxiomCheck {
    fn pass() -> Self {
        AxiomCheck { passed: true, witness: None }
    }

    fn fail(w: String) -> Self {
        AxiomCheck { passed: false, witness: Some(w) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarAxiomReport {
    pub product: String,
    pub order: usize,
    pub associativity: AxiomCheck,
    pub classical_term: AxiomCheck,
    pub first_order: AxiomCheck,
    pub unit: AxiomCheck,
    pub parity: AxiomCheck,
}

impl StarAxiomReport {
    pub fn all_passed(&self) -> bool {
        [&self.associativity, &self.classical_term, &self.first_order, &self.unit, &self.parity]
            .iter()
            .all(|c| c.passed)
    }
}

/// Checks the deformation-quantization axioms on all pairs and triples drawn
/// from `samples`. Failures are reported with the first offending input.
pub fn verify_star_axioms<S: StarProduct + ?Sized>(
    star: &S,
    samples: &[FormalSeries],
) -> Result<StarAxiomReport, FedosovError> {
    assert!(!samples.is_empty(), "verify_star_axioms needs samples");
    let space = star.space();
    let order = samples.iter().map(FormalSeries::order).min().unwrap_or(0);
    let dim = space.dim();
    let fmt = |s: &FormalSeries| space.fmt_series(s);
    let c1 = space.convention().first_order_coefficient();

    let mut associativity = AxiomCheck::pass();
    'assoc: for f in samples {
        for g in samples {
            let fg = star.star(f, g)?;
            for h in samples {
                let lhs = star.star(&fg, h)?;
                let rhs = star.star(f, &star.star(g, h)?)?;
                if lhs != rhs {
                    associativity = AxiomCheck::fail(format!("({}, {}, {})", fmt(f), fmt(g), fmt(h)));
                    break 'assoc;
                }
            }
        }
    }

    // Bidifferential coefficients are read off the classical parts.
    let classical: Vec<FormalSeries> =
        samples.iter().map(|s| FormalSeries::from_poly(s.coeff(0).clone(), order)).collect();
    let mut classical_term = AxiomCheck::pass();
    let mut first_order = AxiomCheck::pass();
    let mut parity = AxiomCheck::pass();
    let half = Scalar::ratio(1, 2);
    for (a, f) in classical.iter().enumerate() {
        for g in &classical[a..] {
            let fg = star.star(f, g)?;
            let gf = star.star(g, f)?;
            let (pf, pg) = (f.coeff(0), g.coeff(0));
            if classical_term.passed && *fg.coeff(0) != pf * pg {
                classical_term = AxiomCheck::fail(format!("({}, {})", fmt(f), fmt(g)));
            }
            if first_order.passed && order >= 1 {
                let anti = (fg.coeff(1) - gf.coeff(1)).scale(&half);
                let expected = poisson_bracket(space, pf, pg)?.scale(&c1);
                if anti != expected {
                    first_order = AxiomCheck::fail(format!("({}, {})", fmt(f), fmt(g)));
                }
            }
            if parity.passed {
                for r in 0..=order {
                    let sign = if r % 2 == 0 { Scalar::one() } else { Scalar::from_int(-1) };
                    if *fg.coeff(r) != gf.coeff(r).scale(&sign) {
                        parity = AxiomCheck::fail(format!("({}, {}) at hbar^{r}", fmt(f), fmt(g)));
                        break;
                    }
                }
            }
        }
    }

    let one = FormalSeries::constant(dim, Scalar::one(), order);
    let mut unit = AxiomCheck::pass();
    for f in &classical {
        let lf = star.star(&one, f)?;
        let rf = star.star(f, &one)?;
        if lf != *f || rf != *f {
            unit = AxiomCheck::fail(fmt(f));
            break;
        }
    }

    Ok(StarAxiomReport { product: star.name(), order, associativity, classical_term, first_order, unit, parity })
}
