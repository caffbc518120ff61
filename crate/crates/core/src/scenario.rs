//! JSON scenario files: phase space, Lie algebra, action, optional momentum
//! map, `Ω`, Fedosov settings and requested stages.
//!
//! Scalars are strings `"p/q"`; polynomials are lists of
//! `{"exponents": [...], "re": "p/q", "im": "p/q"}` terms (`im` optional);
//! structure-constant indices are one-based.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::ScenarioError;
use crate::fedosov::{FedosovConfig, WeylElement, WeylKey, DEFAULT_S_MIN_DEGREE};
use crate::forms::TwoFormSeries;
use crate::lie::{LieAlgebra, SymplecticAction};
use crate::linalg::Matrix;
use crate::par::Exec;
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::symplectic::{Convention, PhaseSpace, VectorField};

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_DEGREE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Validate,
    Momentum,
    Classify,
    Quantize,
    Extend,
    Fedosov,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Validate, Stage::Momentum, Stage::Classify, Stage::Quantize, Stage::Extend, Stage::Fedosov];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Momentum => "momentum",
            Stage::Classify => "classify",
            Stage::Quantize => "quantize",
            Stage::Extend => "extend",
            Stage::Fedosov => "fedosov",
        }
    }

    /// Stages that must run before this one.
    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Validate => &[],
            Stage::Momentum => &[Stage::Validate],
            Stage::Classify => &[Stage::Validate, Stage::Momentum],
            Stage::Quantize | Stage::Extend => &[Stage::Validate, Stage::Momentum, Stage::Classify],
            Stage::Fedosov => &[Stage::Validate],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.as_str() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// Fedosov settings as written in the scenario.
#[derive(Debug, Clone)]
pub struct FedosovSpec {
    pub n_w: Option<u32>,
    pub s: WeylElement,
    pub s_min_degree: u32,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub space: PhaseSpace,
    pub order: usize,
    pub degree: u32,
    pub algebra: LieAlgebra,
    pub action: SymplecticAction,
    pub momentum: Option<Vec<Polynomial>>,
    pub omega: TwoFormSeries,
    pub fedosov: Option<FedosovSpec>,
    pub stages: Vec<Stage>,
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub order: Option<usize>,
    pub weyl_order: Option<u32>,
    pub degree: Option<u32>,
    pub convention: Option<Convention>,
}

fn field(key: &str, msg: impl fmt::Display) -> ScenarioError {
    ScenarioError::Field { key: key.to_string(), msg: msg.to_string() }
}

fn invariant(what: &str, detail: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invariant { what: what.to_string(), detail: detail.to_string() }
}

fn get<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value, ScenarioError> {
    obj.get(key).ok_or_else(|| field(&join(path, key), "missing key"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ScenarioError> {
    v.as_array().ok_or_else(|| field(path, "expected an array"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, ScenarioError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| field(path, "expected a non-negative integer"))
}

fn as_scalar(v: &Value, path: &str) -> Result<Scalar, ScenarioError> {
    match v {
        Value::String(s) => s.parse().map_err(|e| field(path, e)),
        Value::Number(n) if n.is_i64() => Ok(Scalar::from_int(n.as_i64().expect("checked"))),
        _ => Err(field(path, "expected a rational string such as \"1/2\" or an integer")),
    }
}

fn as_poly(v: &Value, dim: usize, path: &str) -> Result<Polynomial, ScenarioError> {
    Polynomial::from_json(dim, v).map_err(|e| field(path, e))
}

fn scalar_matrix(v: &Value, dim: usize, path: &str) -> Result<Matrix, ScenarioError> {
    let rows = as_array(v, path)?;
    if rows.len() != dim {
        return Err(field(path, format!("expected {dim} rows, found {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let p = format!("{path}[{i}]");
            let row = as_array(row, &p)?;
            if row.len() != dim {
                return Err(field(&p, format!("expected {dim} entries, found {}", row.len())));
            }
            row.iter().enumerate().map(|(j, x)| as_scalar(x, &format!("{p}[{j}]"))).collect()
        })
        .collect()
}

fn poly_matrix(v: &Value, dim: usize, path: &str) -> Result<Vec<Vec<Polynomial>>, ScenarioError> {
    let rows = as_array(v, path)?;
    if rows.len() != dim {
        return Err(field(path, format!("expected {dim} rows, found {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let p = format!("{path}[{i}]");
            let row = as_array(row, &p)?;
            if row.len() != dim {
                return Err(field(&p, format!("expected {dim} entries, found {}", row.len())));
            }
            row.iter().enumerate().map(|(j, x)| as_poly(x, dim, &format!("{p}[{j}]"))).collect()
        })
        .collect()
}

/// Reads and fully validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    if !root.is_object() {
        return Err(field("", "top level must be an object"));
    }
    let name = get(&root, "name", "")?.as_str().ok_or_else(|| field("name", "expected a string"))?.to_string();
    let n = as_usize(get(&root, "n", "")?, "n")?;
    if n == 0 {
        return Err(field("n", "must be at least 1"));
    }
    let dim = 2 * n;
    let convention = match root.get("convention") {
        None => Convention::default(),
        Some(v) => v
            .as_str()
            .ok_or_else(|| field("convention", "expected a string"))?
            .parse()
            .map_err(|e| field("convention", e))?,
    };
    let order = match root.get("order") {
        None => DEFAULT_ORDER,
        Some(v) => as_usize(v, "order")?,
    };
    let degree = match root.get("degree") {
        None => DEFAULT_DEGREE,
        Some(v) => as_usize(v, "degree")? as u32,
    };
    let space = match root.get("omega") {
        None => PhaseSpace::standard(n, convention),
        Some(v) => {
            let omega = scalar_matrix(v, dim, "omega")?;
            let pi = root.get("pi").map(|p| scalar_matrix(p, dim, "pi")).transpose()?;
            PhaseSpace::new(n, omega, pi, convention).map_err(|e| invariant("phase space", e))?
        }
    };

    let lie = get(&root, "lie", "")?;
    let d = as_usize(get(lie, "dim", "lie")?, "lie.dim")?;
    let mut constants = Vec::new();
    if let Some(sc) = lie.get("structure_constants") {
        for (t, entry) in as_array(sc, "lie.structure_constants")?.iter().enumerate() {
            let p = format!("lie.structure_constants[{t}]");
            let idx = |k: &str| -> Result<usize, ScenarioError> {
                let v = as_usize(get(entry, k, &p)?, &join(&p, k))?;
                if v == 0 || v > d {
                    return Err(field(&join(&p, k), format!("index must lie in 1..={d}")));
                }
                Ok(v - 1)
            };
            let value = as_scalar(get(entry, "value", &p)?, &join(&p, "value"))?;
            constants.push((idx("i")?, idx("j")?, idx("k")?, value));
        }
    }
    let algebra = LieAlgebra::new(d, &constants).map_err(|e| invariant("lie algebra", e))?;

    let gens = as_array(get(&root, "generators", "")?, "generators")?;
    if gens.len() != d {
        return Err(field("generators", format!("expected {d} generators, found {}", gens.len())));
    }
    let mut generators = Vec::with_capacity(d);
    for (g, comps) in gens.iter().enumerate() {
        let p = format!("generators[{g}]");
        let comps = as_array(comps, &p)?;
        if comps.len() != dim {
            return Err(field(&p, format!("expected {dim} components, found {}", comps.len())));
        }
        let comps = comps
            .iter()
            .enumerate()
            .map(|(c, v)| as_poly(v, dim, &format!("{p}[{c}]")))
            .collect::<Result<Vec<_>, _>>()?;
        generators.push(VectorField::new(comps).map_err(|e| field(&p, e))?);
    }
    let action =
        SymplecticAction::new(space.clone(), algebra.clone(), generators).map_err(|e| invariant("action", e))?;

    let momentum = match root.get("momentum") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let vals = as_array(v, "momentum")?;
            if vals.len() != d {
                return Err(field("momentum", format!("expected {d} polynomials, found {}", vals.len())));
            }
            Some(
                vals.iter()
                    .enumerate()
                    .map(|(i, v)| as_poly(v, dim, &format!("momentum[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
    };

    let mut parts = Vec::new();
    if let Some(om) = root.get("Omega") {
        for (t, entry) in as_array(om, "Omega")?.iter().enumerate() {
            let p = format!("Omega[{t}]");
            let r = as_usize(get(entry, "hbar_power", &p)?, &join(&p, "hbar_power"))?;
            let m = poly_matrix(get(entry, "components", &p)?, dim, &join(&p, "components"))?;
            parts.push((r, m));
        }
    }
    let omega = TwoFormSeries::new(dim, parts).map_err(|e| invariant("Omega", e))?;

    let fedosov = match root.get("fedosov") {
        None | Some(Value::Null) => None,
        Some(f) => Some(parse_fedosov(f, dim)?),
    };

    let stages = match root.get("stages") {
        None => Stage::ALL.to_vec(),
        Some(v) => {
            let mut st = as_array(v, "stages")?
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let p = format!("stages[{i}]");
                    s.as_str().ok_or_else(|| field(&p, "expected a string"))?.parse().map_err(|e| field(&p, e))
                })
                .collect::<Result<Vec<Stage>, _>>()?;
            st.sort();
            st.dedup();
            st
        }
    };

    let scenario = Scenario { name, space, order, degree, algebra, action, momentum, omega, fedosov, stages };
    if let Some(spec) = &scenario.fedosov {
        scenario
            .fedosov_config_with(spec.n_w.unwrap_or(8), Exec::default())
            .validate()
            .map_err(|e| invariant("fedosov", e))?;
    }
    Ok(scenario)
}

fn parse_fedosov(f: &Value, dim: usize) -> Result<FedosovSpec, ScenarioError> {
    let n_w = f.get("N_W").map(|v| as_usize(v, "fedosov.N_W").map(|x| x as u32)).transpose()?;
    let s_min_degree = match f.get("s_min_degree") {
        None => DEFAULT_S_MIN_DEGREE,
        Some(v) => as_usize(v, "fedosov.s_min_degree")? as u32,
    };
    let mut s = WeylElement::zero(dim);
    if let Some(terms) = f.get("s") {
        for (t, entry) in as_array(terms, "fedosov.s")?.iter().enumerate() {
            let p = format!("fedosov.s[{t}]");
            let r = as_usize(get(entry, "hbar_power", &p)?, &join(&p, "hbar_power"))? as u32;
            let idx = as_array(get(entry, "sym_multi_index", &p)?, &join(&p, "sym_multi_index"))?
                .iter()
                .map(|v| as_usize(v, &join(&p, "sym_multi_index")).map(|x| x as u32))
                .collect::<Result<Vec<u32>, _>>()?;
            if idx.len() != dim {
                return Err(field(&join(&p, "sym_multi_index"), format!("expected {dim} exponents")));
            }
            let c = as_poly(get(entry, "coefficient", &p)?, dim, &join(&p, "coefficient"))?;
            let mut term = WeylElement::zero(dim);
            term.add_term(WeylKey::new(r, idx, 0), c);
            s = &s + &term;
        }
    }
    Ok(FedosovSpec { n_w, s, s_min_degree })
}

impl Scenario {
    /// Applies command-line overrides; a convention change rebuilds the
    /// phase space and the action.
    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self, ScenarioError> {
        if let Some(n) = o.order {
            self.order = n;
        }
        if let Some(d) = o.degree {
            self.degree = d;
        }
        if let Some(nw) = o.weyl_order {
            let dim = self.space.dim();
            let spec = self.fedosov.get_or_insert_with(|| FedosovSpec {
                n_w: None,
                s: WeylElement::zero(dim),
                s_min_degree: DEFAULT_S_MIN_DEGREE,
            });
            spec.n_w = Some(nw);
        }
        if let Some(c) = o.convention {
            self.space = self.space.with_convention(c);
            self.action =
                SymplecticAction::new(self.space.clone(), self.algebra.clone(), self.action.generators().to_vec())
                    .map_err(|e| invariant("action", e))?;
        }
        Ok(self)
    }

    /// Whether the star product must be built by the Fedosov construction.
    pub fn needs_fedosov(&self) -> bool {
        !self.omega.is_zero() || self.fedosov.as_ref().is_some_and(|f| !f.s.is_zero())
    }

    pub fn requested_weyl_order(&self) -> Option<u32> {
        self.fedosov.as_ref().and_then(|f| f.n_w)
    }

    pub fn fedosov_config_with(&self, n_w: u32, exec: Exec) -> FedosovConfig {
        let mut config = FedosovConfig::new(self.space.clone(), self.omega.clone(), n_w).with_exec(exec);
        if let Some(spec) = &self.fedosov {
            config = config.with_s(spec.s.clone(), spec.s_min_degree);
        }
        config
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ScenarioError;

    const HEIS: &str = r#"{
        "name": "t",
        "n": 1,
        "lie": {"dim": 2, "structure_constants": []},
        "generators": [
            [[{"exponents": [0, 0], "re": "1"}], []],
            [[], [{"exponents": [0, 0], "re": "1"}]]
        ]
    }"#;

    #[test]
    fn loads_minimal() {
        let s = parse_scenario(HEIS).unwrap();
        assert_eq!(s.algebra.dim(), 2);
        assert!(s.algebra.is_abelian());
        assert_eq!(s.order, DEFAULT_ORDER);
        assert_eq!(s.stages, Stage::ALL.to_vec());
        assert!(!s.needs_fedosov());
    }

    #[test]
    fn located_errors() {
        match parse_scenario("{\n \"name\": 1,\n").unwrap_err() {
            ScenarioError::Syntax { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        let bad = HEIS.replace("\"re\": \"1\"}], []]", "\"re\": \"x\"}], []]");
        match parse_scenario(&bad).unwrap_err() {
            ScenarioError::Field { key, .. } => assert_eq!(key, "generators[0][0]"),
            e => panic!("{e}"),
        }
        let bad = HEIS.replace("\"dim\": 2", "\"dim\": 3");
        assert!(matches!(parse_scenario(&bad), Err(ScenarioError::Field { .. })));
    }

    #[test]
    fn classical_omega_term_rejected() {
        let with_omega = HEIS.replace(
            "\"generators\"",
            r#""Omega": [{"hbar_power": 0, "components": [[[], [{"exponents": [0,0], "re": "1"}]], [[{"exponents": [0,0], "re": "-1"}], []]]}], "generators""#,
        );
        let err = parse_scenario(&with_omega).unwrap_err();
        assert!(matches!(err, ScenarioError::Invariant { ref what, .. } if what == "Omega"), "{err}");
    }
}
