//! Scenario paths and hand-written oracles shared by the integration tests.
//! The oracles use only coordinate formulas and plain polynomial arithmetic,
//! never the library's contraction or Weyl machinery.

#![allow(dead_code)]

use std::path::PathBuf;

use qmm_core::lie::SymplecticAction;
use qmm_core::scenario::{load_scenario, Scenario};
use qmm_core::{Convention, FormalSeries, Polynomial, Scalar};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

pub fn scenario(name: &str) -> Scenario {
    load_scenario(&scenario_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub const BUNDLED: [&str; 4] = ["heisenberg", "sl2", "sl2_magnetic", "heisenberg_magnetic"];

pub fn s(v: i64) -> Scalar {
    Scalar::from_int(v)
}

pub fn q(dim: usize) -> Polynomial {
    Polynomial::var(dim, 0)
}

pub fn p(dim: usize) -> Polynomial {
    Polynomial::var(dim, dim / 2)
}

pub fn c1(conv: Convention) -> Scalar {
    match conv {
        Convention::RealHalf => Scalar::ratio(1, 2),
        Convention::MinusIHalf => &Scalar::i() * &Scalar::ratio(-1, 2),
    }
}

fn factorial(k: u32) -> i64 {
    (1..=k as i64).product()
}

fn binomial(n: u32, k: u32) -> i64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn d_times(f: &Polynomial, var: usize, k: u32) -> Polynomial {
    (0..k).fold(f.clone(), |acc, _| acc.d(var))
}

/// Darboux bracket `Σ_i ∂_{q_i}f ∂_{p_i}g − ∂_{p_i}f ∂_{q_i}g`.
pub fn poisson(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let n = f.num_vars() / 2;
    let mut out = Polynomial::zero(f.num_vars());
    for i in 0..n {
        out = &out + &(&(&f.d(i) * &g.d(n + i)) - &(&f.d(n + i) * &g.d(i)));
    }
    out
}

/// Closed form of the Moyal coefficients in one degree of freedom:
/// `C_r(f,g) = c₁^r/r! Σ_k C(r,k)(−1)^k ∂_q^{r−k}∂_p^k f · ∂_q^k ∂_p^{r−k} g`.
pub fn moyal_coefficient(f: &Polynomial, g: &Polynomial, r: u32, conv: Convention) -> Polynomial {
    assert_eq!(f.num_vars(), 2, "closed form is for one degree of freedom");
    let mut out = Polynomial::zero(2);
    for k in 0..=r {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let left = d_times(&d_times(f, 0, r - k), 1, k);
        let right = d_times(&d_times(g, 0, k), 1, r - k);
        out = &out + &(&left * &right).scale(&s(sign * binomial(r, k)));
    }
    out.scale(&(&c1(conv).pow(r) / &s(factorial(r))))
}

pub fn moyal_oracle(f: &Polynomial, g: &Polynomial, order: usize, conv: Convention) -> FormalSeries {
    let coeffs = (0..=order as u32).map(|r| moyal_coefficient(f, g, r, conv)).collect();
    FormalSeries::from_coeffs(2, coeffs, order).unwrap()
}

/// `Σ_{ij} β_{ij} X^i Y^j` for a two-form given by its matrix.
pub fn pair_form(beta: &[Vec<Polynomial>], x: &[Polynomial], y: &[Polynomial]) -> Polynomial {
    let mut out = Polynomial::zero(x[0].num_vars());
    for i in 0..x.len() {
        for j in 0..y.len() {
            out = &out + &(&(&beta[i][j] * &x[i]) * &y[j]);
        }
    }
    out
}

/// `(ω + Ω)(X_i, X_j) − Σ_k c_{ij}^k J(e_k)` from the coordinate data.
pub fn lambda_oracle(sc: &Scenario, j: &[FormalSeries], i: usize, k: usize, order: usize) -> FormalSeries {
    let action: &SymplecticAction = &sc.action;
    let dim = sc.space.dim();
    let omega: Vec<Vec<Polynomial>> =
        sc.space.omega().iter().map(|row| row.iter().map(|c| Polynomial::constant(dim, c.clone())).collect()).collect();
    let (x, y) = (action.generator(i).components(), action.generator(k).components());
    let mut coeffs = vec![Polynomial::zero(dim); order + 1];
    coeffs[0] = pair_form(&omega, x, y);
    for (r, m) in sc.omega.terms() {
        if *r <= order {
            coeffs[*r] = &coeffs[*r] + &pair_form(m, x, y);
        }
    }
    let mut out = FormalSeries::from_coeffs(dim, coeffs, order).unwrap();
    for (m, jm) in j.iter().enumerate() {
        let c = sc.algebra.constant(i, k, m);
        if !c.is_zero() {
            out = &out - &jm.with_order(order).scale(c);
        }
    }
    out
}

/// `(1 + ℏβ)·f` as a series.
pub fn one_plus_hbar(beta: &Scalar, f: &Polynomial, order: usize) -> FormalSeries {
    FormalSeries::from_coeffs(f.num_vars(), vec![f.clone(), f.scale(beta)], order).unwrap()
}
