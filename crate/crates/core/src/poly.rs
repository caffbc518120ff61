//! Sparse multivariate polynomials over [`Scalar`].

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::AlgebraError;
use crate::scalar::Scalar;

/// Exponent vector, one entry per variable.
pub type Exponents = Vec<u32>;

/// A polynomial in `num_vars` commuting variables `y1..y_m`.
///
/// Terms are kept in a `BTreeMap` so iteration order (and therefore every
/// printed or serialized form) is deterministic. Zero coefficients are never
/// stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Exponents, Scalar>,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Self {
        Polynomial { num_vars, terms: BTreeMap::new() }
    }

    pub fn one(num_vars: usize) -> Self {
        Polynomial::constant(num_vars, Scalar::one())
    }

    pub fn constant(num_vars: usize, c: Scalar) -> Self {
        Polynomial::monomial(num_vars, vec![0; num_vars], c)
    }

    /// The coordinate function `y_{i+1}` (zero-based index).
    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Polynomial::monomial(num_vars, e, Scalar::one())
    }

    pub fn monomial(num_vars: usize, exponents: Exponents, c: Scalar) -> Self {
        assert_eq!(exponents.len(), num_vars, "exponent vector length");
        let mut p = Polynomial::zero(num_vars);
        p.add_term(exponents, c);
        p
    }

    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Exponents, Scalar)>,
    {
        let mut p = Polynomial::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(AlgebraError::VarCountMismatch { left: num_vars, right: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Scalar)> {
        self.terms.iter()
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

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&vec![0; self.num_vars]).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeff(&self, exponents: &[u32]) -> Scalar {
        self.terms.get(exponents).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Accumulates `c·y^e`, dropping the entry if it cancels.
    pub fn add_term(&mut self, exponents: Exponents, c: Scalar) {
        debug_assert_eq!(exponents.len(), self.num_vars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exponents) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &Polynomial) -> Result<(), AlgebraError> {
        if self.num_vars != other.num_vars {
            return Err(AlgebraError::VarCountMismatch { left: self.num_vars, right: other.num_vars });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_vars(other)?;
        let mut out = Polynomial::zero(self.num_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.num_vars);
        }
        Polynomial { num_vars: self.num_vars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    /// `∂/∂y_{i+1}`.
    pub fn partial(&self, i: usize) -> Result<Polynomial, AlgebraError> {
        if i >= self.num_vars {
            return Err(AlgebraError::DimensionMismatch { expected: self.num_vars, found: i + 1 });
        }
        let mut out = Polynomial::zero(self.num_vars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * &Scalar::from_int(e[i] as i64));
        }
        Ok(out)
    }

    /// Panicking form of [`Polynomial::partial`] for internal use where the
    /// index is known to be in range.
    pub fn d(&self, i: usize) -> Polynomial {
        self.partial(i).expect("partial derivative index in range")
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.num_vars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Every monomial `y^e` with `|e| <= max_degree`, in graded order.
    pub fn monomial_basis(num_vars: usize, max_degree: u32) -> Vec<Polynomial> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            let mut exps = Vec::new();
            compositions(num_vars, deg, &mut vec![0; num_vars], 0, &mut exps);
            out.extend(exps.into_iter().map(|e| Polynomial::monomial(num_vars, e, Scalar::one())));
        }
        out
    }

    /// Formats with caller-chosen variable names.
    pub fn display_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let name = names.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("y{}", i + 1));
                    if k == 1 {
                        name
                    } else {
                        format!("{name}^{k}")
                    }
                })
                .collect();
            let (neg, mag) = if c.is_real() && c.re() < &num::rational::BigRational::from_integer(0.into()) {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if idx > 0 {
                s.push_str(if neg { " - " } else { " + " });
            } else if neg {
                s.push('-');
            }
            if mono.is_empty() {
                s.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    s.push_str(&mag.to_string());
                    s.push('*');
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }
}

fn compositions(n: usize, remaining: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Exponents>) {
    if pos + 1 == n {
        cur[pos] = remaining;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k;
        compositions(n, remaining - k, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.num_vars, self)
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        self.checked_add(o).expect("polynomial variable count mismatch")
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        self.checked_sub(o).expect("polynomial variable count mismatch")
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        self.checked_mul(o).expect("polynomial variable count mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&Scalar::from_int(-1))
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, o: Polynomial) -> Polynomial {
        &self + &o
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, o: Polynomial) -> Polynomial {
        &self - &o
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        &self * &o
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Vec<u32>,
    re: String,
    #[serde(default = "zero_string")]
    im: String,
}

fn zero_string() -> String {
    "0".to_string()
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(e, c)| TermRepr { exponents: e.clone(), re: c.re_string(), im: c.im_string() })
            .collect();
        terms.serialize(s)
    }
}

impl Polynomial {
    /// Decodes the `[{exponents, re, im}]` term list for a known variable
    /// count. An empty list is the zero polynomial.
    pub fn from_json(num_vars: usize, v: &serde_json::Value) -> Result<Polynomial, AlgebraError> {
        let terms: Vec<TermRepr> = serde_json::from_value(v.clone()).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            out.push((t.exponents, Scalar::parse_parts(&t.re, &t.im)?));
        }
        Polynomial::from_terms(num_vars, out)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    /// The variable count is inferred from the first term; use
    /// [`Polynomial::from_json`] when the list may be empty.
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms: Vec<TermRepr> = Vec::deserialize(d)?;
        let n = terms.first().map(|t| t.exponents.len()).unwrap_or(0);
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let c = Scalar::parse_parts(&t.re, &t.im).map_err(serde::de::Error::custom)?;
            out.push((t.exponents, c));
        }
        Polynomial::from_terms(n, out).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(i: usize) -> Polynomial {
        Polynomial::var(2, i)
    }

    #[test]
    fn difference_of_squares() {
        let lhs = &(&y(0) + &y(1)) * &(&y(0) - &y(1));
        let rhs = &y(0).pow(2) - &y(1).pow(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partial_derivative() {
        let f = &y(0).pow(2) * &y(1);
        let expected = (&y(0) * &y(1)).scale(&Scalar::from_int(2));
        assert_eq!(f.partial(0).unwrap(), expected);
        assert!(f.partial(2).is_err());
    }

    #[test]
    fn zero_absorbs() {
        let f = &y(0).pow(3) + &y(1);
        assert!((&f * &Polynomial::zero(2)).is_zero());
        assert!(f.scale(&Scalar::zero()).is_zero());
    }

    #[test]
    fn mismatched_variables() {
        let a = Polynomial::var(2, 0);
        let b = Polynomial::var(3, 0);
        assert_eq!(a.checked_mul(&b), Err(AlgebraError::VarCountMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn monomial_basis_counts() {
        assert_eq!(Polynomial::monomial_basis(2, 4).len(), 15);
        assert_eq!(Polynomial::monomial_basis(4, 2).len(), 15);
    }

    #[test]
    fn json_roundtrip() {
        let f = &y(0).pow(2).scale(&Scalar::ratio(1, 2)) - &y(1).scale(&Scalar::i());
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(Polynomial::from_json(2, &v).unwrap(), f);
        assert!(Polynomial::from_json(3, &v).is_err());
    }

    #[test]
    fn display() {
        let f = &y(0).pow(2).scale(&Scalar::ratio(1, 2)) - &y(1);
        assert_eq!(f.display_with(&["q", "p"]), "-p + 1/2*q^2");
    }
}
