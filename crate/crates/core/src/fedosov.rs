//! Fedosov construction over a flat base `R^{2n}`.
//!
//! Elements of the Weyl algebra bundle are sums of terms
//! `ℏ^r y^α dx^I ⊗ f(x)` with `f` polynomial in the base variables. Total
//! degree is `Deg = |α| + 2r`; everything is truncated at `Deg ≤ N_W`.
//!
//! With `κ` the convention's commutator unit the formal parameter of the
//! fiber product is `ν = ℏ/κ`, so `1/ν` replaces `1/ℏ` in the recursion and
//! in the derivation. For the real convention `κ = 1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{AlgebraError, FedosovError};
use crate::forms::TwoFormSeries;
use crate::lie::SymplecticAction;
use crate::par::Exec;
use crate::poly::{Exponents, Polynomial};
use crate::scalar::Scalar;
use crate::series::FormalSeries;
use crate::symplectic::{contract, Contraction, PhaseSpace, StarProduct};

/// `(ℏ power, fiber exponents α, form index set I as a bitmask)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeylKey {
    pub hbar: u32,
    pub y: Exponents,
    pub forms: u32,
}

impl WeylKey {
    pub fn new(hbar: u32, y: Exponents, forms: u32) -> Self {
        WeylKey { hbar, y, forms }
    }

    pub fn sym_degree(&self) -> u32 {
        self.y.iter().sum()
    }

    pub fn form_degree(&self) -> u32 {
        self.forms.count_ones()
    }

    pub fn total_degree(&self) -> u32 {
        self.sym_degree() + 2 * self.hbar
    }
}

/// Sign of `dx^I ∧ dx^J` relative to the increasing ordering of `I ∪ J`,
/// or `None` when the index sets overlap.
pub fn wedge_sign(i: u32, j: u32) -> Option<i64> {
    if i & j != 0 {
        return None;
    }
    // count pairs (a ∈ I, b ∈ J) with a > b
    let mut inversions = 0;
    let mut rest = j;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inversions += (i >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

/// Sign of moving `dx^i` to the front of `dx^I`.
fn insert_sign(i: usize, forms: u32) -> i64 {
    if (forms & ((1u32 << i) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// A truncated element of `W ⊗ Λ`. Stored coefficients are never zero.
#[derive(Clone, PartialEq, Eq)]
pub struct WeylElement {
    dim: usize,
    terms: BTreeMap<WeylKey, Polynomial>,
}

impl WeylElement {
    pub fn zero(dim: usize) -> Self {
        WeylElement { dim, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize) -> Self {
        Self::from_poly(Polynomial::one(dim))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        let dim = p.num_vars();
        let mut out = Self::zero(dim);
        out.add_term(WeylKey::new(0, vec![0; dim], 0), p);
        out
    }

    /// `f ↦ Σ ℏ^r f_r`, with no fiber or form part.
    pub fn from_series(f: &FormalSeries) -> Self {
        let dim = f.num_vars();
        let mut out = Self::zero(dim);
        for (r, c) in f.coeffs().iter().enumerate() {
            out.add_term(WeylKey::new(r as u32, vec![0; dim], 0), c.clone());
        }
        out
    }

    /// A single term `c · ℏ^hbar y^α dx^I`.
    pub fn monomial(dim: usize, hbar: u32, y: Exponents, forms: u32, c: Polynomial) -> Self {
        let mut out = Self::zero(dim);
        out.add_term(WeylKey::new(hbar, y, forms), c);
        out
    }

    pub fn y(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(dim, 0, e, 0, Polynomial::one(dim))
    }

    pub fn dx(dim: usize, i: usize) -> Self {
        Self::monomial(dim, 0, vec![0; dim], 1 << i, Polynomial::one(dim))
    }

    pub fn x(dim: usize, i: usize) -> Self {
        Self::from_poly(Polynomial::var(dim, i))
    }

    pub fn add_term(&mut self, key: WeylKey, c: Polynomial) {
        debug_assert_eq!(key.y.len(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<WeylKey, Polynomial> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(WeylKey::total_degree).max()
    }

    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(WeylKey::total_degree).min()
    }

    /// Terms with `Deg ≤ n`.
    pub fn truncate(&self, n: u32) -> WeylElement {
        self.filter(|k| k.total_degree() <= n)
    }

    pub fn filter<F: Fn(&WeylKey) -> bool>(&self, keep: F) -> WeylElement {
        WeylElement {
            dim: self.dim,
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> WeylElement {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        WeylElement { dim: self.dim, terms: self.terms.iter().map(|(k, v)| (k.clone(), v.scale(c))).collect() }
    }

    pub fn checked_add(&self, other: &WeylElement) -> Result<WeylElement, AlgebraError> {
        if self.dim != other.dim {
            return Err(AlgebraError::VarCountMismatch { left: self.dim, right: other.dim });
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &WeylElement) -> Result<WeylElement, AlgebraError> {
        self.checked_add(&other.scale(&Scalar::from_int(-1)))
    }

    fn format_key(&self, key: &WeylKey) -> String {
        let mut parts = Vec::new();
        if key.hbar == 1 {
            parts.push("hbar".to_string());
        } else if key.hbar > 1 {
            parts.push(format!("hbar^{}", key.hbar));
        }
        for (i, &e) in key.y.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("y{}", i + 1)),
                _ => parts.push(format!("y{}^{}", i + 1, e)),
            }
        }
        let forms: Vec<String> =
            (0..self.dim).filter(|i| key.forms & (1 << i) != 0).map(|i| format!("dx{}", i + 1)).collect();
        if !forms.is_empty() {
            parts.push(forms.join("^"));
        }
        parts.join(" ")
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| {
                let basis = self.format_key(k);
                let coeff = v.display_with(&names);
                if basis.is_empty() {
                    format!("({coeff})")
                } else {
                    format!("({coeff}) {basis}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a> std::ops::Add<&'a WeylElement> for &'a WeylElement {
    type Output = WeylElement;
    fn add(self, rhs: &'a WeylElement) -> WeylElement {
        self.checked_add(rhs).expect("Weyl elements over different dimensions")
    }
}

impl<'a> std::ops::Sub<&'a WeylElement> for &'a WeylElement {
    type Output = WeylElement;
    fn sub(self, rhs: &'a WeylElement) -> WeylElement {
        self.checked_sub(rhs).expect("Weyl elements over different dimensions")
    }
}

impl std::ops::Neg for &WeylElement {
    type Output = WeylElement;
    fn neg(self) -> WeylElement {
        self.scale(&Scalar::from_int(-1))
    }
}

/// `δ = dx^i ∧ ∂/∂y^i`.
pub fn delta(a: &WeylElement) -> WeylElement {
    let mut out = WeylElement::zero(a.dim);
    for (k, c) in &a.terms {
        for i in 0..a.dim {
            if k.y[i] == 0 || k.forms & (1 << i) != 0 {
                continue;
            }
            let mut y = k.y.clone();
            y[i] -= 1;
            let coeff = Scalar::from_int(insert_sign(i, k.forms) * k.y[i] as i64);
            out.add_term(WeylKey::new(k.hbar, y, k.forms | (1 << i)), c.scale(&coeff));
        }
    }
    out
}

/// `δ* = y^i i(∂/∂x^i)`; on a term of bidegree `(k, l)`, `δδ* + δ*δ = k + l`.
pub fn delta_star(a: &WeylElement) -> WeylElement {
    let mut out = WeylElement::zero(a.dim);
    for (k, c) in &a.terms {
        for i in 0..a.dim {
            if k.forms & (1 << i) == 0 {
                continue;
            }
            let mut y = k.y.clone();
            y[i] += 1;
            let forms = k.forms & !(1 << i);
            out.add_term(WeylKey::new(k.hbar, y, forms), c.scale(&Scalar::from_int(insert_sign(i, forms))));
        }
    }
    out
}

/// `δ⁻¹ = δ*/(k + l)` on terms of bidegree `(k, l) ≠ (0, 0)`.
pub fn delta_inv(a: &WeylElement) -> WeylElement {
    let mut out = WeylElement::zero(a.dim);
    for (k, c) in &a.terms {
        let l = k.form_degree();
        if l == 0 {
            continue;
        }
        let single = WeylElement { dim: a.dim, terms: BTreeMap::from([(k.clone(), c.clone())]) };
        let w = Scalar::ratio(1, (k.sym_degree() + l) as i64);
        for (k2, c2) in delta_star(&single).terms {
            out.add_term(k2, c2.scale(&w));
        }
    }
    out
}

/// Projection onto the part with no fiber and no form degree.
pub fn sigma_proj(a: &WeylElement, order: usize) -> FormalSeries {
    let mut coeffs = vec![Polynomial::zero(a.dim); order + 1];
    for (k, c) in &a.terms {
        if k.forms == 0 && k.y.iter().all(|&e| e == 0) && (k.hbar as usize) <= order {
            coeffs[k.hbar as usize] = c.clone();
        }
    }
    FormalSeries::from_coeffs(a.dim, coeffs, order).expect("matching variable count")
}

/// Flat connection `∇ = dx^i ∧ ∂/∂x^i`.
pub fn nabla(a: &WeylElement) -> WeylElement {
    let mut out = WeylElement::zero(a.dim);
    for (k, c) in &a.terms {
        for i in 0..a.dim {
            if k.forms & (1 << i) != 0 {
                continue;
            }
            let d = c.d(i);
            if d.is_zero() {
                continue;
            }
            let sign = Scalar::from_int(insert_sign(i, k.forms));
            out.add_term(WeylKey::new(k.hbar, k.y.clone(), k.forms | (1 << i)), d.scale(&sign));
        }
    }
    out
}

/// `1 ⊗ Ω = Σ_r ℏ^r Σ_{a<b} Ω_{r,ab} dx^a∧dx^b`.
pub fn omega_weyl(omega: &TwoFormSeries) -> WeylElement {
    let dim = omega.dim();
    let mut out = WeylElement::zero(dim);
    for (&r, m) in omega.terms() {
        for a in 0..dim {
            for b in (a + 1)..dim {
                out.add_term(WeylKey::new(r as u32, vec![0; dim], (1 << a) | (1 << b)), m[a][b].clone());
            }
        }
    }
    out
}

/// The fiberwise Moyal product on `W ⊗ Λ`, truncated at `N_W`.
#[derive(Debug, Clone)]
pub struct WeylAlgebra {
    space: PhaseSpace,
    n_w: u32,
    exec: Exec,
    pairs: Vec<Contraction>,
    kappa: Scalar,
}

impl WeylAlgebra {
    pub fn new(space: PhaseSpace, n_w: u32) -> Self {
        Self::with_exec(space, n_w, Exec::default())
    }

    pub fn with_exec(space: PhaseSpace, n_w: u32, exec: Exec) -> Self {
        let conv = space.convention();
        let pairs = space.contraction_pairs(&conv.first_order_coefficient());
        WeylAlgebra { space, n_w, exec, pairs, kappa: conv.commutator_unit() }
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn truncation(&self) -> u32 {
        self.n_w
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    fn check(&self, a: &WeylElement) -> Result<(), FedosovError> {
        if a.dim != self.space.dim() {
            return Err(AlgebraError::DimensionMismatch { expected: self.space.dim(), found: a.dim }.into());
        }
        Ok(())
    }

    /// `Σ_{t∈a, s∈b} w(t,s) · (contractions of t⊗s with at least min_k pairings)`,
    /// with `ℏ` lowered by `shift`, keeping `Deg ≤ N_W`.
    fn contract_terms<W>(&self, a: &WeylElement, b: &WeylElement, min_k: u32, shift: u32, weight: W) -> WeylElement
    where
        W: Fn(&WeylKey, &WeylKey) -> i64 + Sync,
    {
        let dim = a.dim;
        let left: Vec<(&WeylKey, &Polynomial)> = a.terms.iter().collect();
        let partials = self.exec.map(&left, |&(ka, pa)| {
            let mut acc = WeylElement::zero(dim);
            let da = ka.total_degree();
            for (kb, pb) in &b.terms {
                if da + kb.total_degree() > self.n_w + 2 * shift {
                    continue;
                }
                let Some(sign) = wedge_sign(ka.forms, kb.forms) else {
                    continue;
                };
                let w = sign * weight(ka, kb);
                if w == 0 {
                    continue;
                }
                let max_k = ka.sym_degree().min(kb.sym_degree());
                if max_k < min_k {
                    continue;
                }
                let prod = pa * pb;
                for t in contract(&self.pairs, &ka.y, &kb.y, min_k, max_k) {
                    let y: Exponents = t.left.iter().zip(&t.right).map(|(l, r)| l + r).collect();
                    let key = WeylKey::new(ka.hbar + kb.hbar + t.k - shift, y, ka.forms | kb.forms);
                    acc.add_term(key, prod.scale(&(&t.coeff * &Scalar::from_int(w))));
                }
            }
            acc
        });
        let mut out = WeylElement::zero(dim);
        for part in partials {
            for (k, v) in part.terms {
                out.add_term(k, v);
            }
        }
        out
    }

    /// `a ∘ b`: contractions of fiber variables with weight `c₁ℏπ^{ij}`,
    /// wedge with Koszul sign on forms.
    pub fn circ(&self, a: &WeylElement, b: &WeylElement) -> Result<WeylElement, FedosovError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.contract_terms(a, b, 0, 0, |_, _| 1))
    }

    /// `(1/ν)[a, b]` for the graded commutator
    /// `[a, b] = a∘b − (−1)^{|a||b|} b∘a`. The uncontracted parts cancel,
    /// so the division is exact.
    pub fn commutator_over_nu(&self, a: &WeylElement, b: &WeylElement) -> Result<WeylElement, FedosovError> {
        self.check(a)?;
        self.check(b)?;
        let ab = self.contract_terms(a, b, 1, 1, |_, _| 1);
        let ba = self.contract_terms(
            b,
            a,
            1,
            1,
            |kb, ka| {
                if (ka.form_degree() * kb.form_degree()) % 2 == 0 {
                    -1
                } else {
                    1
                }
            },
        );
        Ok((&ab + &ba).scale(&self.kappa))
    }

    /// `(1/ν) r∘r` for `r` of pure form degree one.
    pub fn square_over_nu(&self, r: &WeylElement) -> Result<WeylElement, FedosovError> {
        self.check(r)?;
        if r.terms.keys().any(|k| k.form_degree() != 1) {
            return Err(FedosovError::Config("square_over_nu needs a 1-form".into()));
        }
        Ok(self.contract_terms(r, r, 1, 1, |_, _| 1).scale(&self.kappa))
    }
}

/// Whether the normalization `s` must lie in `W₃` or `W₄`.
pub const DEFAULT_S_MIN_DEGREE: u32 = 3;

#[derive(Debug, Clone)]
pub struct FedosovConfig {
    pub space: PhaseSpace,
    pub omega: TwoFormSeries,
    pub s: WeylElement,
    pub n_w: u32,
    pub s_min_degree: u32,
    pub exec: Exec,
}

impl FedosovConfig {
    /// Flat connection, given `Ω`, `s = 0`.
    pub fn new(space: PhaseSpace, omega: TwoFormSeries, n_w: u32) -> Self {
        let dim = space.dim();
        FedosovConfig {
            space,
            omega,
            s: WeylElement::zero(dim),
            n_w,
            s_min_degree: DEFAULT_S_MIN_DEGREE,
            exec: Exec::default(),
        }
    }

    pub fn with_s(mut self, s: WeylElement, min_degree: u32) -> Self {
        self.s = s;
        self.s_min_degree = min_degree;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<(), FedosovError> {
        let dim = self.space.dim();
        if self.omega.dim() != dim || self.s.dim() != dim {
            return Err(AlgebraError::DimensionMismatch { expected: dim, found: self.s.dim() }.into());
        }
        if dim > 16 {
            return Err(FedosovError::Config(format!("dimension {dim} exceeds the form-index capacity")));
        }
        if !(3..=4).contains(&self.s_min_degree) {
            return Err(FedosovError::Config(format!("s minimum degree must be 3 or 4, got {}", self.s_min_degree)));
        }
        for k in self.s.terms.keys() {
            if k.forms != 0 {
                return Err(FedosovError::Config("s must have form degree 0".into()));
            }
            if k.sym_degree() == 0 {
                return Err(FedosovError::Config("s must satisfy sigma(s) = 0".into()));
            }
            if k.total_degree() < self.s_min_degree {
                return Err(FedosovError::Config(format!(
                    "s has a term of total degree {} below {}",
                    k.total_degree(),
                    self.s_min_degree
                )));
            }
            if self.s_min_degree == 4 && k.sym_degree() == 1 {
                return Err(FedosovError::Config("s must have no part of symmetric degree 1".into()));
            }
        }
        Ok(())
    }
}

/// Solves `r = δs + δ⁻¹(∇r − (1/ν) r∘r + R + 1⊗Ω)` with `R = 0` by iterating
/// to a fixed point at truncation `N_W`, then verifies the defining equation
/// and the normalization `δ⁻¹r = s`.
pub fn build_r(config: &FedosovConfig) -> Result<WeylElement, FedosovError> {
    config.validate()?;
    let weyl = WeylAlgebra::with_exec(config.space.clone(), config.n_w, config.exec);
    let omega = omega_weyl(&config.omega).truncate(config.n_w);
    let ds = delta(&config.s).truncate(config.n_w);
    let max_iter = config.n_w as usize + 3;
    let mut r = WeylElement::zero(config.space.dim());
    for _ in 0..max_iter {
        let rhs = &(&nabla(&r) - &weyl.square_over_nu(&r)?) + &omega;
        let next = (&ds + &delta_inv(&rhs)).truncate(config.n_w);
        if next == r {
            check_r(&weyl, config, &r)?;
            return Ok(r);
        }
        r = next;
    }
    Err(FedosovError::FixedPointNotReached(max_iter))
}

fn check_r(weyl: &WeylAlgebra, config: &FedosovConfig, r: &WeylElement) -> Result<(), FedosovError> {
    let n = config.n_w;
    if let Some(k) = r.terms.keys().find(|k| k.form_degree() != 1 || k.total_degree() < 2) {
        return Err(FedosovError::IdentityFailed(format!("r has a term outside W_2 (x) Lambda^1: {k:?}")));
    }
    let lhs = delta(r).truncate(n.saturating_sub(1));
    let rhs = (&(&nabla(r) - &weyl.square_over_nu(r)?) + &omega_weyl(&config.omega)).truncate(n.saturating_sub(1));
    if lhs != rhs {
        return Err(FedosovError::IdentityFailed(format!("delta r != nabla r - r o r / nu + Omega: {}", &lhs - &rhs)));
    }
    if delta_inv(r).truncate(n) != config.s.truncate(n) {
        return Err(FedosovError::IdentityFailed("delta^-1 r != s".into()));
    }
    Ok(())
}

/// The Fedosov data built from a configuration: `r`, the derivation `D`,
/// the Taylor map `τ` and the induced star product.
pub struct Fedosov {
    config: FedosovConfig,
    weyl: WeylAlgebra,
    r: WeylElement,
    cache: Mutex<HashMap<String, Arc<WeylElement>>>,
}

impl fmt::Debug for Fedosov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fedosov").field("n_w", &self.config.n_w).field("r", &self.r).finish()
    }
}

impl Fedosov {
    pub fn new(config: FedosovConfig) -> Result<Self, FedosovError> {
        let r = build_r(&config)?;
        let weyl = WeylAlgebra::with_exec(config.space.clone(), config.n_w, config.exec);
        Ok(Fedosov { config, weyl, r, cache: Mutex::new(HashMap::new()) })
    }

    pub fn config(&self) -> &FedosovConfig {
        &self.config
    }

    pub fn weyl(&self) -> &WeylAlgebra {
        &self.weyl
    }

    pub fn r(&self) -> &WeylElement {
        &self.r
    }

    pub fn truncation(&self) -> u32 {
        self.config.n_w
    }

    /// `D a = −δa + ∇a − (1/ν)[r, a]`, correct at `Deg ≤ N_W − 1`.
    pub fn derivation(&self, a: &WeylElement) -> Result<WeylElement, FedosovError> {
        let ad = self.weyl.commutator_over_nu(&self.r, a)?;
        Ok((&(&nabla(a) - &delta(a)) - &ad).truncate(self.config.n_w))
    }

    /// `τ(f) = f + δ⁻¹(∇τ(f) − (1/ν)[r, τ(f)])`, iterated to a fixed point.
    pub fn taylor(&self, f: &FormalSeries) -> Result<Arc<WeylElement>, FedosovError> {
        let key = format!("{f:?}");
        if let Some(t) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(t));
        }
        if f.num_vars() != self.config.space.dim() {
            return Err(
                AlgebraError::DimensionMismatch { expected: self.config.space.dim(), found: f.num_vars() }.into()
            );
        }
        let n = self.config.n_w;
        let base = WeylElement::from_series(f).truncate(n);
        let max_iter = n as usize + 3;
        let mut t = base.clone();
        let mut done = false;
        for _ in 0..max_iter {
            let step = &nabla(&t) - &self.weyl.commutator_over_nu(&self.r, &t)?;
            let next = (&base + &delta_inv(&step)).truncate(n);
            if next == t {
                done = true;
                break;
            }
            t = next;
        }
        if !done {
            return Err(FedosovError::FixedPointNotReached(max_iter));
        }
        let t = Arc::new(t);
        self.cache.lock().expect("cache lock").insert(key, Arc::clone(&t));
        Ok(t)
    }

    /// Weyl truncation needed for `f⋆g` at order `order`.
    pub fn required_truncation(deg_f: u32, deg_g: u32, order: usize) -> usize {
        deg_f as usize + deg_g as usize + 2 * order
    }
}

impl StarProduct for Fedosov {
    fn space(&self) -> &PhaseSpace {
        &self.config.space
    }

    /// `f⋆g = σ(τ(f) ∘ τ(g))` at the smaller operand order.
    fn star(&self, f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries, FedosovError> {
        let order = f.order().min(g.order());
        let need = Self::required_truncation(f.degree(), g.degree(), order);
        if (self.config.n_w as usize) < need {
            return Err(FedosovError::TruncationTooLow { have: self.config.n_w as usize, need });
        }
        let tf = self.taylor(f)?;
        let tg = self.taylor(g)?;
        let prod = self.weyl.contract_terms(&tf, &tg, 0, 0, |ka, kb| {
            // only fully contracted, form-free products reach σ
            if ka.forms == 0 && kb.forms == 0 && ka.sym_degree() == kb.sym_degree() {
                1
            } else {
                0
            }
        });
        Ok(sigma_proj(&prod, order))
    }

    fn name(&self) -> String {
        format!("fedosov[{}, N_W={}]", self.config.space.convention(), self.config.n_w)
    }
}

/// `f⋆g` for a one-off configuration.
pub fn fedosov_star(f: &FormalSeries, g: &FormalSeries, config: &FedosovConfig) -> Result<FormalSeries, FedosovError> {
    Fedosov::new(config.clone())?.star(f, g)
}

/// Outcome of the identity checks on a built Fedosov star product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FedosovCheckReport {
    pub weyl_order: u32,
    pub r_terms: usize,
    pub taylor_terms: Vec<usize>,
    pub defining_equation: bool,
    pub normalization: bool,
    pub homotopy_identity: bool,
    pub delta_squared: bool,
    pub nabla_squared: bool,
    pub delta_nabla_commute: bool,
    pub d_squared: bool,
    pub sigma_tau: bool,
    pub d_tau: bool,
    pub moyal_agreement: Option<bool>,
}

impl FedosovCheckReport {
    pub fn all_passed(&self) -> bool {
        self.defining_equation
            && self.normalization
            && self.homotopy_identity
            && self.delta_squared
            && self.nabla_squared
            && self.delta_nabla_commute
            && self.d_squared
            && self.sigma_tau
            && self.d_tau
            && self.moyal_agreement.unwrap_or(true)
    }
}

/// The homotopy identity `δδ⁻¹a + δ⁻¹δa + σ(a) = a`.
pub fn homotopy_identity_holds(a: &WeylElement) -> bool {
    let sig = a.filter(|k| k.forms == 0 && k.sym_degree() == 0);
    let sum = &(&delta(&delta_inv(a)) + &delta_inv(&delta(a))) + &sig;
    sum == *a
}

/// Checks `D² = 0` at `Deg ≤ N_W − 2`.
pub fn d_squared_vanishes(fed: &Fedosov, a: &WeylElement) -> Result<bool, FedosovError> {
    let dd = fed.derivation(&fed.derivation(a)?)?;
    Ok(dd.truncate(fed.truncation().saturating_sub(2)).is_zero())
}

/// `σ(τ(f)) = f` and `Dτ(f) = 0` at `Deg ≤ N_W − 1`.
pub fn taylor_identities(fed: &Fedosov, f: &FormalSeries) -> Result<(bool, bool), FedosovError> {
    let t = fed.taylor(f)?;
    let order = (fed.truncation() / 2) as usize;
    let sigma_ok = sigma_proj(&t, order) == f.with_order(order);
    let d_ok = fed.derivation(&t)?.truncate(fed.truncation().saturating_sub(1)).is_zero();
    Ok((sigma_ok, d_ok))
}

/// Runs every identity check on the given sample elements and functions.
pub fn run_checks(
    fed: &Fedosov,
    weyl_samples: &[WeylElement],
    functions: &[FormalSeries],
) -> Result<FedosovCheckReport, FedosovError> {
    let n = fed.truncation();
    let r = fed.r();
    let defining_equation = check_r(fed.weyl(), fed.config(), r).is_ok();
    let normalization = delta_inv(r).truncate(n) == fed.config().s.truncate(n);
    let mut homotopy = true;
    let mut delta_sq = true;
    let mut nabla_sq = true;
    let mut commute = true;
    let mut d_sq = true;
    for a in weyl_samples {
        homotopy &= homotopy_identity_holds(a);
        delta_sq &= delta(&delta(a)).is_zero();
        nabla_sq &= nabla(&nabla(a)).is_zero();
        commute &= (&delta(&nabla(a)) + &nabla(&delta(a))).is_zero();
        d_sq &= d_squared_vanishes(fed, a)?;
    }
    let mut sigma_tau = true;
    let mut d_tau = true;
    let mut taylor_terms = Vec::new();
    for f in functions {
        let (s, d) = taylor_identities(fed, f)?;
        sigma_tau &= s;
        d_tau &= d;
        taylor_terms.push(fed.taylor(f)?.len());
    }
    let moyal_agreement = if fed.config().omega.is_zero() && fed.config().s.is_zero() {
        let moyal = crate::symplectic::Moyal::with_exec(fed.config().space.clone(), fed.config().exec);
        let mut ok = true;
        for f in functions {
            for g in functions {
                let order = (n as usize).saturating_sub((f.degree() + g.degree()) as usize) / 2;
                let (f, g) = (f.with_order(order), g.with_order(order));
                ok &= fed.star(&f, &g)? == moyal.star(&f, &g)?;
            }
        }
        Some(ok)
    } else {
        None
    };
    Ok(FedosovCheckReport {
        weyl_order: n,
        r_terms: r.len(),
        taylor_terms,
        defining_equation,
        normalization,
        homotopy_identity: homotopy,
        delta_squared: delta_sq,
        nabla_squared: nabla_sq,
        delta_nabla_commute: commute,
        d_squared: d_sq,
        sigma_tau,
        d_tau,
        moyal_agreement,
    })
}

/// Result of the invariance conditions for a Lie algebra action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    /// One-based generators with a component of degree above one.
    pub non_affine: Vec<usize>,
    /// `(generator, ℏ power)` pairs with `L_X Ω ≠ 0`.
    pub omega_failures: Vec<(usize, usize)>,
    /// Generators with `L_X s ≠ 0`.
    pub s_failures: Vec<usize>,
    pub invariant: bool,
}

/// `L_X s` for a form-degree-zero `s`: `X` acts on the base coefficients and,
/// through its Jacobian, on the fiber variables.
pub fn lie_derivative_fiber(x: &crate::symplectic::VectorField, s: &WeylElement) -> WeylElement {
    let dim = s.dim;
    let mut out = WeylElement::zero(dim);
    for (k, c) in &s.terms {
        out.add_term(k.clone(), x.apply(c));
        for cc in 0..dim {
            if k.y[cc] == 0 {
                continue;
            }
            for a in 0..dim {
                let jac = x.components()[cc].d(a);
                if jac.is_zero() {
                    continue;
                }
                let mut y = k.y.clone();
                let mult = Scalar::from_int(y[cc] as i64);
                y[cc] -= 1;
                y[a] += 1;
                out.add_term(WeylKey::new(k.hbar, y, k.forms), (&jac * c).scale(&mult));
            }
        }
    }
    out
}

/// Affine generators, `L_X Ω = 0` and `L_X s = 0` for every generator.
pub fn check_invariance(action: &SymplecticAction, config: &FedosovConfig) -> InvarianceReport {
    let mut non_affine = Vec::new();
    let mut omega_failures = Vec::new();
    let mut s_failures = Vec::new();
    for (i, x) in action.generators().iter().enumerate() {
        if x.max_degree() > 1 {
            non_affine.push(i + 1);
        }
        if let Some(r) = config.omega.lie_derivative_failure(x) {
            omega_failures.push((i + 1, r));
        }
        if !lie_derivative_fiber(x, &config.s).is_zero() {
            s_failures.push(i + 1);
        }
    }
    let invariant = non_affine.is_empty() && omega_failures.is_empty() && s_failures.is_empty();
    InvarianceReport { non_affine, omega_failures, s_failures, invariant }
}
