//! Runs the requested stages of a scenario and collects a report.
//!
//! Stage order is fixed: validate, momentum, classify, quantize, extend,
//! fedosov. Requested stages pull in their prerequisites; a stage whose
//! prerequisite did not finish cleanly is skipped. Identities are checked at
//! the scenario order `N` on monomials of degree at most `D`; maps are built
//! one order higher, since a bracket over ℏ consumes one order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{FedosovError, MomentumError, QuantumError};
use crate::fedosov::{check_invariance, run_checks, Fedosov};
use crate::lie::{Cochain, ExtendedAlgebra};
use crate::momentum::{
    classify_equivariance, extend_classical, sigma_2cocycle, solve_momentum, validate_momentum, ClassicalMomentumMap,
    Equivariance, ExtendedClassicalMomentumMap,
};
use crate::par::Exec;
use crate::poly::Polynomial;
use crate::quantum::{
    canonical_quantum_extension, check_constants_central, classical_limit_quotient, classify_quantum,
    extended_qmm_exists, lambda_cocycle, quantum_momentum_exists, restrict_to_g, solve_j_plus,
    verify_quantum_hamiltonian, Existence, ExistenceWitness, HamiltonianReport, QuantumClass, QuantumHamiltonian,
};
use crate::samples::{function_samples, weyl_samples};
use crate::scenario::{Scenario, Stage};
use crate::series::FormalSeries;
use crate::symplectic::{verify_star_axioms, Moyal, PhaseSpace, StarProduct};

/// Seed for the sampled Fedosov identity checks.
pub const SAMPLE_SEED: u64 = 0x5eed;

/// Weyl truncation used by the Fedosov stage when the scenario needs none.
pub const DEFAULT_CHECK_WEYL_ORDER: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Target {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "gtilde")]
    GTilde,
    #[serde(rename = "ghat")]
    GHat,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::G, Target::GTilde, Target::GHat];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::G => "g",
            Target::GTilde => "gtilde",
            Target::GHat => "ghat",
        }
    }

    /// The stage that handles this target.
    pub fn stage(self) -> Stage {
        match self {
            Target::G => Stage::Quantize,
            Target::GTilde | Target::GHat => Stage::Extend,
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| format!("unknown target `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Stages to run; `None` uses the scenario's list.
    pub stages: Option<Vec<Stage>>,
    pub targets: BTreeSet<Target>,
    pub exec: Exec,
    /// Treat a negative existence answer as a failure.
    pub expect_exists: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            stages: None,
            targets: Target::ALL.into_iter().collect(),
            exec: Exec::default(),
            expect_exists: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
    #[serde(rename = "INFO")]
    Info,
}

impl Status {
    fn check(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn answer(yes: bool) -> Status {
        if yes {
            Status::Yes
        } else {
            Status::No
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Yes => "YES",
            Status::No => "NO",
            Status::Info => "INFO",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One named claim and its outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    /// A checked identity does not hold.
    Failed,
    /// The computation stopped with an error.
    Error,
    /// Settings make the stage impossible, e.g. a Weyl truncation too low.
    ConfigError,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub status: StageStatus,
    pub data: Map<String, Value>,
    pub verdicts: Vec<Verdict>,
    pub error: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub settings: Map<String, Value>,
    pub stages: Vec<StageReport>,
    #[serde(skip)]
    pub expect_exists: bool,
}

impl Report {
    pub fn stage(&self, stage: Stage) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    pub fn verdicts(&self) -> impl Iterator<Item = &Verdict> {
        self.stages.iter().flat_map(|s| &s.verdicts)
    }

    pub fn verdict(&self, claim: &str) -> Option<&Verdict> {
        self.verdicts().find(|v| v.claim == claim)
    }

    /// 0 when everything passed, 2 when settings prevented a stage,
    /// 1 for any failed identity, stage error, or (with `expect_exists`) a
    /// negative existence answer.
    pub fn exit_code(&self) -> i32 {
        if self.stages.iter().any(|s| s.status == StageStatus::ConfigError) {
            return 2;
        }
        let failed = self.stages.iter().any(|s| matches!(s.status, StageStatus::Failed | StageStatus::Error));
        let negative = self.expect_exists && self.verdicts().any(|v| v.status == Status::No);
        i32::from(failed || negative)
    }

    /// Pretty JSON with lexicographically sorted keys. Timing is left out,
    /// so identical input gives identical bytes.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&sort_keys(v)).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self, timing: bool) -> String {
        let mut out = format!("scenario: {}\n", self.scenario);
        for (k, v) in &self.settings {
            out += &format!("  {k}: {}\n", plain(v));
        }
        for st in &self.stages {
            out += &format!(
                "\n[{}] {}",
                st.stage,
                serde_json::to_value(st.status).expect("status").as_str().unwrap_or("")
            );
            if timing && st.status != StageStatus::Skipped {
                out += &format!(" ({:.1} ms)", st.elapsed.as_secs_f64() * 1e3);
            }
            out.push('\n');
            if let Some(e) = &st.error {
                out += &format!("  error: {e}\n");
            }
            for (k, v) in &st.data {
                render(&mut out, k, v, 1);
            }
            for v in &st.verdicts {
                out += &format!("  {}: {}", v.claim, v.status);
                if !v.detail.is_empty() {
                    out += &format!("  ({})", v.detail);
                }
                out.push('\n');
            }
        }
        out
    }
}

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<String, Value> = m.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(out: &mut String, key: &str, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) if !m.is_empty() => {
            *out += &format!("{pad}{key}:\n");
            for (k, v) in m {
                render(out, k, v, indent + 1);
            }
        }
        Value::Array(a) if !a.is_empty() && a.iter().any(|x| x.is_object() || x.is_array()) => {
            *out += &format!("{pad}{key}:\n");
            for (i, x) in a.iter().enumerate() {
                render(out, &format!("[{i}]"), x, indent + 1);
            }
        }
        Value::Array(a) => {
            let items: Vec<String> = a.iter().map(plain).collect();
            *out += &format!("{pad}{key}: [{}]\n", items.join(", "));
        }
        other => *out += &format!("{pad}{key}: {}\n", plain(other)),
    }
}

/// Error that aborts a stage.
struct StageError {
    msg: String,
    config: bool,
}

impl From<QuantumError> for StageError {
    fn from(e: QuantumError) -> Self {
        let config = matches!(
            e,
            QuantumError::OrderTooLow { .. }
                | QuantumError::Fedosov(FedosovError::TruncationTooLow { .. } | FedosovError::Config(_))
        );
        StageError { msg: e.to_string(), config }
    }
}

impl From<FedosovError> for StageError {
    fn from(e: FedosovError) -> Self {
        QuantumError::from(e).into()
    }
}

impl From<MomentumError> for StageError {
    fn from(e: MomentumError) -> Self {
        StageError { msg: e.to_string(), config: false }
    }
}

impl From<crate::error::LieError> for StageError {
    fn from(e: crate::error::LieError) -> Self {
        StageError { msg: e.to_string(), config: false }
    }
}

/// Output of a stage under construction.
#[derive(Default)]
struct Out {
    data: Map<String, Value>,
    verdicts: Vec<Verdict>,
}

impl Out {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.data.insert(key.to_string(), v.into());
    }

    fn verdict(&mut self, claim: &str, status: Status, detail: impl Into<String>) {
        self.verdicts.push(Verdict { claim: claim.to_string(), status, detail: detail.into() });
    }

    fn failed(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Fail)
    }
}

struct Ctx<'a> {
    sc: &'a Scenario,
    opts: &'a PipelineOptions,
    star: Option<Box<dyn StarProduct + 'a>>,
    fedosov: Option<std::sync::Arc<Fedosov>>,
    j0: Option<ClassicalMomentumMap>,
    tilde_j0: Option<ExtendedClassicalMomentumMap>,
    /// A quantum Hamiltonian over `g` and its defect λ.
    candidate: Option<(QuantumHamiltonian, Cochain)>,
}

/// One Fedosov engine shared by the quantum stages and the check stage.
struct SharedFedosov(std::sync::Arc<Fedosov>);

impl StarProduct for SharedFedosov {
    fn space(&self) -> &PhaseSpace {
        self.0.space()
    }

    fn star(&self, f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries, FedosovError> {
        self.0.star(f, g)
    }

    fn name(&self) -> String {
        self.0.name()
    }
}

/// Largest polynomial degree a quantum Hamiltonian can reach: `J₀` and the
/// radial primitives of `i_XΩ`.
fn hamiltonian_degree(sc: &Scenario, j0: Option<&ClassicalMomentumMap>) -> u32 {
    let dj0 = match (j0, &sc.momentum) {
        (Some(j), _) => j.values().iter().filter_map(Polynomial::degree).max().unwrap_or(0),
        (None, Some(v)) => v.iter().filter_map(Polynomial::degree).max().unwrap_or(0),
        (None, None) => sc.action.generators().iter().map(|x| x.max_degree() + 1).max().unwrap_or(0),
    };
    let omega_deg = sc.omega.terms().values().flat_map(|m| m.iter().flatten()).filter_map(Polynomial::degree).max();
    let dj_plus = match omega_deg {
        Some(d) => d + sc.action.generators().iter().map(|x| x.max_degree()).max().unwrap_or(0) + 1,
        None => 0,
    };
    dj0.max(dj_plus)
}

/// Weyl truncation that supports every star product the pipeline forms.
pub fn auto_weyl_order(sc: &Scenario) -> u32 {
    let dj = hamiltonian_degree(sc, None);
    let operands = (dj + sc.degree).max(2 * dj);
    operands + 2 * (sc.order as u32 + 1)
}

impl<'a> Ctx<'a> {
    fn internal_order(&self) -> usize {
        self.sc.order + 1
    }

    fn weyl_order(&self) -> u32 {
        self.sc.requested_weyl_order().unwrap_or_else(|| auto_weyl_order(self.sc))
    }

    fn fedosov_engine(&mut self, n_w: u32) -> Result<std::sync::Arc<Fedosov>, StageError> {
        if let Some(f) = &self.fedosov {
            if f.truncation() == n_w {
                return Ok(std::sync::Arc::clone(f));
            }
        }
        let fed = std::sync::Arc::new(Fedosov::new(self.sc.fedosov_config_with(n_w, self.opts.exec))?);
        self.fedosov = Some(std::sync::Arc::clone(&fed));
        Ok(fed)
    }

    fn star(&mut self) -> Result<&dyn StarProduct, StageError> {
        if self.star.is_none() {
            let star: Box<dyn StarProduct + 'a> = if self.sc.needs_fedosov() {
                let n_w = self.weyl_order();
                Box::new(SharedFedosov(self.fedosov_engine(n_w)?))
            } else {
                Box::new(Moyal::with_exec(self.sc.space.clone(), self.opts.exec))
            };
            self.star = Some(star);
        }
        Ok(self.star.as_deref().expect("just set"))
    }

    fn j0(&self) -> &ClassicalMomentumMap {
        self.j0.as_ref().expect("momentum stage ran")
    }

    fn space(&self) -> &PhaseSpace {
        &self.sc.space
    }
}

fn fmt_values(space: &PhaseSpace, values: &[FormalSeries]) -> Value {
    Value::Object(values.iter().enumerate().map(|(i, v)| (format!("e{}", i + 1), json!(space.fmt_series(v)))).collect())
}

fn fmt_polys(space: &PhaseSpace, values: &[Polynomial]) -> Value {
    Value::Object(values.iter().enumerate().map(|(i, v)| (format!("e{}", i + 1), json!(space.fmt_poly(v)))).collect())
}

/// Values of a 2-cochain on basis pairs `i < j`, one-based.
fn fmt_pairs(space: &PhaseSpace, c: &Cochain) -> Value {
    let d = c.algebra_dim();
    let mut m = Map::new();
    for p in crate::lie::increasing_tuples(d, 2) {
        m.insert(format!("e{},e{}", p[0] + 1, p[1] + 1), json!(space.fmt_series(&c.eval_basis(&p))));
    }
    Value::Object(m)
}

fn fmt_coeffs(coeffs: &[crate::scalar::Scalar]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| if c.is_one() { format!("e{}", k + 1) } else { format!("({c})e{}", k + 1) })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn fmt_extension(space: &PhaseSpace, ext: &ExtendedAlgebra) -> Value {
    let c = ext.central_index();
    let mut m = Map::new();
    for (i, j, b) in ext.bracket_table() {
        let mut s = fmt_coeffs(&b.base);
        if !b.central.is_zero() {
            let central = if b.central.is_constant() && b.central.constants()[0].is_one() {
                format!("e{}", c + 1)
            } else {
                format!("({})e{}", space.fmt_series(&b.central), c + 1)
            };
            s = if s == "0" { central } else { format!("{s} + {central}") };
        }
        if s != "0" {
            m.insert(format!("e{},e{}", i + 1, j + 1), json!(s));
        }
    }
    Value::Object(m)
}

fn witness_detail(w: &ExistenceWitness) -> String {
    let mut parts = Vec::new();
    if let Some(s) = &w.sigma {
        let nz = crate::lie::increasing_tuples(s.algebra_dim(), 2)
            .into_iter()
            .find(|p| !s.eval_basis(p).is_zero())
            .map(|p| format!("Sigma(e{},e{}) = {}", p[0] + 1, p[1] + 1, s.eval_basis(&p)))
            .unwrap_or_default();
        parts.push(format!("classical cocycle nonzero: {nz}"));
    }
    if let Some((_, (i, j), r)) = &w.residual {
        parts.push(format!("second condition has no constant solution at pair (e{i},e{j}), hbar^{r}"));
    }
    if let Some((g, r)) = &w.not_invariant {
        parts.push(format!("Omega not invariant under e{g} at hbar^{r}"));
    }
    parts.join("; ")
}

fn witness_json(space: &PhaseSpace, w: &ExistenceWitness) -> Value {
    let mut m = Map::new();
    if let Some(s) = &w.sigma {
        m.insert("sigma".into(), fmt_pairs(space, s));
    }
    if let Some((res, (i, j), r)) = &w.residual {
        m.insert("residual".into(), json!({"values": fmt_pairs(space, res), "pair": [i, j], "hbar_order": r}));
    }
    if let Some((g, r)) = &w.not_invariant {
        m.insert("not_invariant".into(), json!({"generator": g, "hbar_order": r}));
    }
    Value::Object(m)
}

fn hamiltonian_detail(r: &HamiltonianReport) -> String {
    match &r.witness {
        None => format!("{} cases, degree <= {}, order hbar^{}", r.checked, r.max_degree, r.order),
        Some(w) => format!("fails for e{} on {} at hbar^{}", w.generator, w.monomial, w.hbar_order),
    }
}

/// Names of the claims the pipeline reports.
pub mod claims {
    pub const JACOBI: &str = "structure constants satisfy Jacobi";
    pub const SYMPLECTIC: &str = "generators preserve omega";
    pub const ANTI_HOMOMORPHISM: &str = "generators anti-represent the algebra";
    pub const OMEGA_INVARIANT: &str = "Omega is invariant under the action";
    pub const MOMENTUM_GENERATES: &str = "J0 generates the action";
    pub const MOMENTUM_ACTION: &str = "Poisson bracket with J0 reproduces the action";
    pub const SIGMA_COCYCLE: &str = "Sigma is a constant 2-cocycle";
    pub const EQUIVARIANCE: &str = "equivariance class of J0";
    pub const TILDE_J0_HOMOMORPHISM: &str = "extended J0 is a homomorphism on the classical extension";
    pub const QMM_EXISTS_G: &str = "quantum momentum map exists over g";
    pub const HAMILTONIAN: &str = "J is a quantum Hamiltonian";
    pub const LAMBDA_TWO_FORMS: &str = "commutator and closed-form lambda agree";
    pub const LAMBDA_MOD_HBAR: &str = "lambda mod hbar equals Sigma";
    pub const QUANTUM_CLASS: &str = "quantum class of J";
    pub const QMM_EXISTS_GTILDE: &str = "quantum momentum map exists over the classical extension";
    pub const GTILDE_HOMOMORPHISM: &str = "extended quantum map is a homomorphism";
    pub const RESTRICTION_HAMILTONIAN: &str = "restriction to g is a quantum Hamiltonian";
    pub const RESTRICTION_MOD_HBAR: &str = "restriction defect mod hbar equals Sigma";
    pub const RESTRICTION_LIMIT: &str = "restriction has classical limit J0";
    pub const RESTRICTION_CLASS: &str = "quantum class of the restriction";
    pub const RESTRICTION_AGREES: &str = "restriction agrees with the direct anomalous map";
    pub const GHAT_JACOBI: &str = "quantum extension satisfies Jacobi";
    pub const GHAT_CENTRAL: &str = "constant series are central for the star commutator";
    pub const GHAT_HOMOMORPHISM: &str = "canonical map on the quantum extension is a homomorphism";
    pub const QUOTIENT_MAP: &str = "quantum extension mod hbar recovers extended J0";
    pub const QUOTIENT_COCYCLE: &str = "quotient cocycle equals Sigma";
    pub const STAR_INVARIANT: &str = "star product is invariant under the action";
    pub const DEFINING_EQUATION: &str = "connection form solves its defining equation";
    pub const NORMALIZATION: &str = "connection form is normalized by s";
    pub const HOMOTOPY: &str = "homotopy identity";
    pub const DELTA_SQUARED: &str = "delta squares to zero";
    pub const NABLA_SQUARED: &str = "nabla squares to zero";
    pub const DELTA_NABLA: &str = "delta and nabla anticommute";
    pub const D_SQUARED: &str = "Fedosov derivation squares to zero";
    pub const SIGMA_TAU: &str = "Taylor map projects back to f";
    pub const D_TAU: &str = "Taylor map is flat";
    pub const MOYAL_AGREEMENT: &str = "Fedosov product with zero data equals Moyal";
    pub const ASSOCIATIVITY: &str = "star product is associative";
    pub const CLASSICAL_TERM: &str = "zeroth order is the pointwise product";
    pub const FIRST_ORDER: &str = "first order is the convention times the Poisson bracket";
    pub const UNIT: &str = "1 is a unit";
    pub const PARITY: &str = "C_r(f,g) = (-1)^r C_r(g,f)";
}

use claims::*;

fn stage_validate(ctx: &mut Ctx, out: &mut Out) -> Result<(), StageError> {
    let sc = ctx.sc;
    let space = &sc.space;
    out.put("n", space.n());
    out.put("convention", space.convention().as_str());
    out.put("algebra_dimension", sc.algebra.dim());
    let brackets: Map<String, Value> = sc
        .algebra
        .bracket_table()
        .into_iter()
        .filter(|(_, _, v)| v.iter().any(|c| !c.is_zero()))
        .map(|(i, j, v)| (format!("e{},e{}", i + 1, j + 1), json!(fmt_coeffs(&v))))
        .collect();
    out.put("brackets", Value::Object(brackets));
    let gens: Map<String, Value> = sc
        .action
        .generators()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let comps: Vec<String> = x.components().iter().map(|c| space.fmt_poly(c)).collect();
            (format!("e{}", i + 1), json!(comps))
        })
        .collect();
    out.put("generators", Value::Object(gens));
    let omega: Map<String, Value> = sc
        .omega
        .terms()
        .iter()
        .map(|(r, m)| {
            let rows: Vec<Vec<String>> = m.iter().map(|row| row.iter().map(|c| space.fmt_poly(c)).collect()).collect();
            (format!("hbar^{r}"), json!(rows))
        })
        .collect();
    out.put("Omega", Value::Object(omega));

    let jac = sc.algebra.check_jacobi();
    out.verdict(JACOBI, Status::check(jac.is_ok()), jac.err().map(|e| e.to_string()).unwrap_or_default());
    let symp = sc.action.check_symplectic();
    out.verdict(SYMPLECTIC, Status::check(symp.is_ok()), symp.err().map(|e| e.to_string()).unwrap_or_default());
    let hom = sc.action.check_anti_homomorphism();
    out.verdict(ANTI_HOMOMORPHISM, Status::check(hom.is_ok()), hom.err().map(|e| e.to_string()).unwrap_or_default());
    let failure = sc
        .action
        .generators()
        .iter()
        .enumerate()
        .find_map(|(i, x)| sc.omega.lie_derivative_failure(x).map(|r| (i + 1, r)));
    let detail = failure.map(|(g, r)| format!("L_X Omega != 0 for e{g} at hbar^{r}")).unwrap_or_default();
    out.verdict(OMEGA_INVARIANT, Status::answer(failure.is_none()), detail);
    Ok(())
}

fn stage_momentum(ctx: &mut Ctx, out: &mut Out) -> Result<(), StageError> {
    let sc = ctx.sc;
    let j0 = match &sc.momentum {
        Some(values) => {
            out.put("source", "supplied");
            let v = validate_momentum(&sc.action, values);
            let detail = match v.first_failure() {
                Some(c) => format!(
                    "X_J0(e{}) differs from X_e{} in component {}",
                    c.generator,
                    c.generator,
                    c.component.unwrap_or(0)
                ),
                None => String::new(),
            };
            out.verdict(MOMENTUM_GENERATES, Status::check(v.passed), detail);
            out.put("J0", fmt_polys(&sc.space, values));
            if !v.passed {
                return Ok(());
            }
            ClassicalMomentumMap::new(&sc.action, values.clone())?
        }
        None => {
            out.put("source", "solved");
            let j0 = solve_momentum(&sc.action)?;
            out.verdict(MOMENTUM_GENERATES, Status::Pass, "");
            out.put("J0", fmt_polys(&sc.space, j0.values()));
            j0
        }
    };
    let monomials = Polynomial::monomial_basis(sc.space.dim(), sc.degree);
    let bad = monomials.iter().find_map(|f| j0.check_action_identity(f).err().map(|g| (g, f)));
    let detail = match bad {
        None => format!("{} monomials, degree <= {}", monomials.len(), sc.degree),
        Some((g, f)) => format!("fails for e{g} on {}", sc.space.fmt_poly(f)),
    };
    out.verdict(MOMENTUM_ACTION, Status::check(bad.is_none()), detail);
    ctx.j0 = Some(j0);
    Ok(())
}

fn stage_classify(ctx: &mut Ctx, out: &mut Out) -> Result<(), StageError> {
    let space = ctx.space().clone();
    let sigma = match sigma_2cocycle(ctx.j0()) {
        Ok(s) => s,
        Err(e) => {
            out.verdict(SIGMA_COCYCLE, Status::Fail, e.to_string());
            return Ok(());
        }
    };
    out.verdict(SIGMA_COCYCLE, Status::Pass, "");
    out.put("Sigma", fmt_pairs(&space, &sigma));
    let class = classify_equivariance(&ctx.sc.algebra, &sigma)?;
    let detail = match &class {
        Equivariance::Equivariant => "Sigma = 0".to_string(),
        Equivariance::ExactCocycle(mu) => {
            let vals: Vec<String> =
                (0..mu.algebra_dim()).map(|i| format!("mu(e{}) = {}", i + 1, mu.eval_basis(&[i]))).collect();
            format!("Sigma = mu([.,.]) with {}", vals.join(", "))
        }
        Equivariance::NonTrivial { pair: (i, j) } => {
            format!("no mu solves the equation at (e{i},e{j})")
        }
    };
    out.put("classification", class.label());
    out.verdict(EQUIVARIANCE, Status::Info, format!("{}: {detail}", class.label()));
    match extend_classical(ctx.j0(), &sigma) {
        Ok(tilde) => {
            out.put("extension_brackets", fmt_extension(&space, tilde.extension()));
            out.put("tilde_J0", fmt_polys(&space, &tilde.basis_values()));
            out.verdict(TILDE_J0_HOMOMORPHISM, Status::Pass, "");
            ctx.tilde_j0 = Some(tilde);
        }
        Err(e) => out.verdict(TILDE_J0_HOMOMORPHISM, Status::Fail, e.to_string()),
    }
    Ok(())
}

/// Builds `J = J₀ + J₊` from the radial primitives of `i_XΩ` together with
/// its defect λ. Leaves no candidate when Ω is not invariant.
fn ensure_candidate(ctx: &mut Ctx, out: &mut Out) -> Result<(), StageError> {
    if ctx.candidate.is_some() {
        return Ok(());
    }
    let order = ctx.internal_order();
    let j_plus = match solve_j_plus(&ctx.sc.action, &ctx.sc.omega, order) {
        Ok(v) => v,
        Err(QuantumError::NotInvariant { generator, order }) => {
            out.verdict(
                QUANTUM_CLASS,
                Status::Info,
                format!("no quantum Hamiltonian: Omega not invariant under e{generator} at hbar^{order}"),
            );
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let values =
        ctx.j0().values().iter().zip(&j_plus).map(|(p, jp)| &FormalSeries::from_poly(p.clone(), order) + jp).collect();
    let j = QuantumHamiltonian::new(&ctx.sc.action, values)?;
    let (sc, n) = (ctx.sc, ctx.sc.order);
    let star = ctx.star()?;
    let ham = verify_quantum_hamiltonian(&sc.action, &j, star, sc.degree, n)?;
    out.verdict(HAMILTONIAN, Status::check(ham.passed), hamiltonian_detail(&ham));
    let lambda = match lambda_cocycle(&sc.action, &j, star, &sc.omega, n) {
        Ok(l) => {
            out.verdict(LAMBDA_TWO_FORMS, Status::Pass, format!("every basis pair, order hbar^{n}"));
            l
        }
        Err(e @ (QuantumError::FormMismatch { .. } | QuantumError::NonConstant { .. })) => {
            out.verdict(LAMBDA_TWO_FORMS, Status::Fail, e.to_string());
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    out.put("J", fmt_values(&sc.space, j.values()));
    out.put("lambda", fmt_pairs(&sc.space, &lambda));
    match classify_quantum(&sc.action, &j, &lambda) {
        Ok(class) => {
            out.verdict(LAMBDA_MOD_HBAR, Status::Pass, "");
            let detail = match &class {
                QuantumClass::QuantumMomentumMap => "lambda = 0".to_string(),
                QuantumClass::Anomalous(_) => "lambda != 0".to_string(),
            };
            out.verdict(QUANTUM_CLASS, Status::Info, format!("{}: {detail}", class.label()));
        }
        Err(QuantumError::CocycleMismatch { i, j: jj }) => {
            out.verdict(LAMBDA_MOD_HBAR, Status::Fail, format!("differs at (e{i},e{jj})"));
        }
        Err(e) => return Err(e.into()),
    }
    ctx.candidate = Some((j, lambda));
    Ok(())
}

fn stage_quantize(ctx: &mut Ctx, out: &mut Out) -> Result<(), StageError> {
    if !ctx.opts.targets.contains(&Target::G) {
        return Ok(());
    }
    let sc = ctx.sc;
    let order = ctx.internal_order();
    let name = ctx.star()?.name();
    out.put("star_product", name);
    let j0 = ctx.j0().clone();
    let star = ctx.star()?;
    match quantum_momentum_exists(&j0, &sc.omega, star, order)? {
        Existence::Yes(j) => {
            out.verdict(QMM_EXISTS_G, Status::Yes, format!("J = {}", fmt_values_inline(&sc.space, j.values())));
        }
        Existence::No(w) => {
            out.put("witness", witness_json(&sc.space, &w));
            out.verdict(QMM_EXISTS_G, Status::No, witness_detail(&w));
        }
    }
    ensure_candidate(ctx, out)
}

fn fmt_values_inline(space: &PhaseSpace, values: &[FormalSeries]) -> String {
    let parts: Vec<String> =
        values.iter().enumerate().map(|(i, v)| format!("e{}: {}", i + 1, space.fmt_series(v))).collect();
    format!("[{}]", parts.join(", "))
}

fn stage_extend(ctx: &mut Ctx, out: &mut Out) -> Result<(), StageError> {
    let sc = ctx.sc;
    let n = sc.order;
    let order = ctx.internal_order();
    let name = ctx.star()?.name();
    out.put("star_product", name);
    let j0 = ctx.j0().clone();

    if ctx.opts.targets.contains(&Target::GTilde) {
        let star = ctx.star()?;
        let sol = extended_qmm_exists(&j0, &sc.omega, star, order)?;
        match sol {
            Existence::No(w) => {
                out.put("gtilde_witness", witness_json(&sc.space, &w));
                out.verdict(QMM_EXISTS_GTILDE, Status::No, witness_detail(&w));
            }
            Existence::Yes(sol) => {
                let mut m = Map::new();
                m.insert("J".into(), fmt_values(&sc.space, sol.map.values()));
                m.insert("central_coefficient".into(), json!(sc.space.fmt_series(&sol.central_coefficient)));
                out.put("gtilde", Value::Object(m));
                out.verdict(
                    QMM_EXISTS_GTILDE,
                    Status::Yes,
                    format!("J = {}", fmt_values_inline(&sc.space, sol.map.values())),
                );
                let bad = sol.map.check_homomorphism(star, n)?;
                let detail = bad.map(|(i, j)| format!("fails at (e{i},e{j})")).unwrap_or(format!("order hbar^{n}"));
                out.verdict(GTILDE_HOMOMORPHISM, Status::check(bad.is_none()), detail);

                let rep = restrict_to_g(&sol.map, &j0, &sc.omega, star, sc.degree, n)?;
                out.put("restriction", fmt_values(&sc.space, rep.map.values()));
                out.put("restriction_defect", fmt_pairs(&sc.space, &rep.defect));
                out.verdict(
                    RESTRICTION_HAMILTONIAN,
                    Status::check(rep.hamiltonian.passed),
                    hamiltonian_detail(&rep.hamiltonian),
                );
                out.verdict(RESTRICTION_MOD_HBAR, Status::check(rep.defect_mod_hbar_is_sigma), "");
                out.verdict(RESTRICTION_LIMIT, Status::check(rep.classical_limit_is_j0), "");
                let class = if rep.is_homomorphism { "quantum momentum map" } else { "anomalous" };
                out.verdict(RESTRICTION_CLASS, Status::Info, class);
                let restricted = rep.map;
                ensure_candidate(ctx, out)?;
                if let Some((direct, _)) = &ctx.candidate {
                    let agree = direct.values().iter().zip(restricted.values()).all(|(a, b)| {
                        let o = a.order().min(b.order());
                        a.with_order(o) == b.with_order(o)
                    });
                    out.verdict(RESTRICTION_AGREES, Status::check(agree), "");
                }
            }
        }
    }

    if ctx.opts.targets.contains(&Target::GHat) {
        ensure_candidate(ctx, out)?;
        let Some((j, lambda)) = ctx.candidate.clone() else {
            return Ok(());
        };
        let jhat = canonical_quantum_extension(&sc.action, &j, &lambda)?;
        out.put("ghat_brackets", fmt_extension(&sc.space, jhat.extension()));
        out.put("hat_J", fmt_values(&sc.space, jhat.values()));
        let jac = jhat.extension().check_jacobi();
        out.verdict(GHAT_JACOBI, Status::check(jac.is_ok()), jac.err().map(|e| e.to_string()).unwrap_or_default());

        let mut constants: Vec<FormalSeries> = crate::lie::increasing_tuples(lambda.algebra_dim(), 2)
            .iter()
            .map(|p| lambda.eval_basis(p))
            .filter(|v| !v.is_zero())
            .collect();
        let dim = sc.space.dim();
        constants.push(
            FormalSeries::from_coeffs(dim, vec![Polynomial::one(dim), Polynomial::one(dim)], order).expect("constant"),
        );
        constants.dedup();
        let star = ctx.star()?;
        let central = check_constants_central(star, &constants, sc.degree, n)?;
        let detail = central.witness.clone().unwrap_or(format!("{} cases", central.checked));
        out.verdict(GHAT_CENTRAL, Status::check(central.passed), detail);
        let bad = jhat.check_homomorphism(star, n)?;
        let detail = bad.map(|(i, j)| format!("fails at (e{i},e{j})")).unwrap_or(format!("order hbar^{n}"));
        out.verdict(GHAT_HOMOMORPHISM, Status::check(bad.is_none()), detail);
        if let Some(tilde) = &ctx.tilde_j0 {
            match classical_limit_quotient(&jhat, tilde) {
                Ok(q) => {
                    out.verdict(QUOTIENT_MAP, Status::check(q.matches_tilde_j0), "");
                    out.verdict(QUOTIENT_COCYCLE, Status::check(q.cocycle_matches), "");
                }
                Err(QuantumError::CocycleMismatch { i, j }) => {
                    out.verdict(QUOTIENT_COCYCLE, Status::Fail, format!("differs at (e{i},e{j})"))
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

/// Low-degree samples for the axiom checks: the coordinates plus two
/// quadratic monomials.
fn axiom_samples(dim: usize, order: usize) -> Vec<FormalSeries> {
    let mut polys: Vec<Polynomial> = (0..dim).map(|i| Polynomial::var(dim, i)).collect();
    let (q, p) = (Polynomial::var(dim, 0), Polynomial::var(dim, dim / 2));
    polys.push(q.pow(2));
    polys.push(q.checked_mul(&p).expect("same variables"));
    polys.into_iter().map(|f| FormalSeries::from_poly(f, order)).collect()
}

fn stage_fedosov(ctx: &mut Ctx, out: &mut Out) -> Result<(), StageError> {
    let sc = ctx.sc;
    let n_w = if sc.needs_fedosov() {
        ctx.weyl_order()
    } else {
        sc.requested_weyl_order().unwrap_or(DEFAULT_CHECK_WEYL_ORDER)
    };
    let fed = ctx.fedosov_engine(n_w)?;
    let config = fed.config();
    let dim = sc.space.dim();
    out.put("weyl_order", n_w);
    out.put("star_product", fed.name());

    let inv = check_invariance(&sc.action, config);
    let mut detail = Vec::new();
    if !inv.non_affine.is_empty() {
        detail.push(format!("non-affine generators {:?}", inv.non_affine));
    }
    if !inv.omega_failures.is_empty() {
        detail.push(format!("L_X Omega != 0 at (generator, hbar order) {:?}", inv.omega_failures));
    }
    if !inv.s_failures.is_empty() {
        detail.push(format!("L_X s != 0 for generators {:?}", inv.s_failures));
    }
    out.verdict(STAR_INVARIANT, Status::answer(inv.invariant), detail.join("; "));

    let sample_order = (sc.order).min(n_w as usize / 2);
    let weyl = weyl_samples(dim, n_w.min(DEFAULT_CHECK_WEYL_ORDER), 40, SAMPLE_SEED);
    let funcs = function_samples(dim, 2, sample_order, 10, SAMPLE_SEED + 1);
    let rep = run_checks(&fed, &weyl, &funcs)?;
    out.put("r_terms", rep.r_terms);
    out.put("taylor_terms", rep.taylor_terms.clone());
    out.put("samples", json!({"weyl_elements": weyl.len(), "functions": funcs.len(), "seed": SAMPLE_SEED}));
    out.verdict(DEFINING_EQUATION, Status::check(rep.defining_equation), format!("Deg <= {}", n_w.saturating_sub(1)));
    out.verdict(NORMALIZATION, Status::check(rep.normalization), "");
    out.verdict(HOMOTOPY, Status::check(rep.homotopy_identity), "");
    out.verdict(DELTA_SQUARED, Status::check(rep.delta_squared), "");
    out.verdict(NABLA_SQUARED, Status::check(rep.nabla_squared), "");
    out.verdict(DELTA_NABLA, Status::check(rep.delta_nabla_commute), "");
    out.verdict(D_SQUARED, Status::check(rep.d_squared), "");
    out.verdict(SIGMA_TAU, Status::check(rep.sigma_tau), "");
    out.verdict(D_TAU, Status::check(rep.d_tau), "");
    if let Some(ok) = rep.moyal_agreement {
        out.verdict(MOYAL_AGREEMENT, Status::check(ok), "");
    }

    if n_w >= 6 {
        let order = ((n_w - 6) / 2).min(3) as usize;
        let samples = axiom_samples(dim, order);
        let ax = verify_star_axioms(fed.as_ref(), &samples)?;
        out.put("axiom_order", order);
        for (claim, check) in [
            (ASSOCIATIVITY, &ax.associativity),
            (CLASSICAL_TERM, &ax.classical_term),
            (FIRST_ORDER, &ax.first_order),
            (UNIT, &ax.unit),
        ] {
            out.verdict(claim, Status::check(check.passed), check.witness.clone().unwrap_or_default());
        }
        // Odd powers of ℏ in Ω break the parity symmetry; reported, not enforced.
        out.verdict(
            PARITY,
            Status::Info,
            if ax.parity.passed {
                "holds".into()
            } else {
                format!("fails at {}", ax.parity.witness.clone().unwrap_or_default())
            },
        );
    }
    Ok(())
}

/// Requested stages plus their prerequisites, in pipeline order.
pub fn plan(requested: &[Stage]) -> Vec<Stage> {
    let mut set: BTreeSet<Stage> = requested.iter().copied().collect();
    for s in requested {
        set.extend(s.prerequisites().iter().copied());
    }
    set.into_iter().collect()
}

pub fn run_pipeline(sc: &Scenario, opts: &PipelineOptions) -> Report {
    let requested = opts.stages.clone().unwrap_or_else(|| sc.stages.clone());
    let stages = plan(&requested);
    let mut settings = Map::new();
    settings.insert("order".into(), json!(sc.order));
    settings.insert("degree".into(), json!(sc.degree));
    settings.insert("convention".into(), json!(sc.space.convention().as_str()));
    settings.insert("star_product".into(), json!(if sc.needs_fedosov() { "fedosov" } else { "moyal" }));
    if sc.needs_fedosov() {
        settings.insert("weyl_order".into(), json!(sc.requested_weyl_order().unwrap_or_else(|| auto_weyl_order(sc))));
    }
    settings.insert("targets".into(), json!(opts.targets.iter().map(|t| t.as_str()).collect::<Vec<_>>()));

    let mut ctx = Ctx { sc, opts, star: None, fedosov: None, j0: None, tilde_j0: None, candidate: None };
    let mut reports: Vec<StageReport> = Vec::new();
    for stage in stages {
        let blocked =
            stage.prerequisites().iter().any(|p| reports.iter().any(|r| r.stage == *p && r.status != StageStatus::Ok));
        if blocked {
            reports.push(StageReport {
                stage,
                status: StageStatus::Skipped,
                data: Map::new(),
                verdicts: Vec::new(),
                error: None,
                elapsed: Duration::ZERO,
            });
            continue;
        }
        let start = Instant::now();
        let mut out = Out::default();
        let result = match stage {
            Stage::Validate => stage_validate(&mut ctx, &mut out),
            Stage::Momentum => stage_momentum(&mut ctx, &mut out),
            Stage::Classify => stage_classify(&mut ctx, &mut out),
            Stage::Quantize => stage_quantize(&mut ctx, &mut out),
            Stage::Extend => stage_extend(&mut ctx, &mut out),
            Stage::Fedosov => stage_fedosov(&mut ctx, &mut out),
        };
        let (status, error) = match result {
            Ok(()) if out.failed() => (StageStatus::Failed, None),
            Ok(()) => (StageStatus::Ok, None),
            Err(e) if e.config => (StageStatus::ConfigError, Some(e.msg)),
            Err(e) => (StageStatus::Error, Some(e.msg)),
        };
        reports.push(StageReport {
            stage,
            status,
            data: out.data,
            verdicts: out.verdicts,
            error,
            elapsed: start.elapsed(),
        });
    }
    Report { scenario: sc.name.clone(), settings, stages: reports, expect_exists: opts.expect_exists }
}
