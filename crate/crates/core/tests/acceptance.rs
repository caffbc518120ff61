//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails. Checks are exact; runtime bounds are
//! part of the criterion where one is stated.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use qmm_core::error::ScenarioError;
use qmm_core::fedosov::{
    d_squared_vanishes, delta, fedosov_star, homotopy_identity_holds, taylor_identities, Fedosov, FedosovConfig,
};
use qmm_core::forms::TwoFormSeries;
use qmm_core::lie::{increasing_tuples, ExtendedAlgebra};
use qmm_core::momentum::{
    classify_equivariance, extend_classical, sigma_2cocycle, solve_momentum, ClassicalMomentumMap, Equivariance,
};
use qmm_core::pipeline::{auto_weyl_order, claims, run_pipeline, PipelineOptions, StageStatus};
use qmm_core::quantum::{
    canonical_quantum_extension, check_constants_central, classical_limit_quotient, extended_qmm_exists,
    homomorphism_defect, lambda_closed_form, lambda_cocycle, quantum_momentum_exists, restrict_to_g, solve_j_plus,
    Existence, QuantumHamiltonian,
};
use qmm_core::samples::{random_polynomial, rng, weyl_samples};
use qmm_core::scenario::{load_scenario, Scenario, Stage};
use qmm_core::symplectic::{moyal_product, quantum_bracket, StarProduct};
use qmm_core::{Convention, FormalSeries, Moyal, PhaseSpace, Polynomial, Scalar};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn star_for(sc: &Scenario) -> Box<dyn StarProduct> {
    if sc.needs_fedosov() {
        let config = sc.fedosov_config_with(auto_weyl_order(sc), Default::default());
        Box::new(Fedosov::new(config).expect("fedosov builds"))
    } else {
        Box::new(Moyal::new(sc.space.clone()))
    }
}

fn beta_of(sc: &Scenario) -> Scalar {
    sc.omega.terms()[&1][0][1].constant_term()
}

fn moyal_associativity() -> Outcome {
    let start = Instant::now();
    let mut r = rng(11);
    for n in [1usize, 2] {
        let space = PhaseSpace::standard(n, Convention::RealHalf);
        let dim = 2 * n;
        for t in 0..50 {
            let f: Vec<FormalSeries> =
                (0..3).map(|_| FormalSeries::from_poly(random_polynomial(&mut r, dim, 3, 4), 5)).collect();
            let lhs = moyal_product(&space, &moyal_product(&space, &f[0], &f[1]).unwrap(), &f[2]).unwrap();
            let rhs = moyal_product(&space, &f[0], &moyal_product(&space, &f[1], &f[2]).unwrap()).unwrap();
            ensure(lhs == rhs, format!("n={n}, triple {t}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("100 triples, n in {{1,2}}, degree <= 3, hbar^5, {:?}", start.elapsed()))
}

fn star_axioms() -> Outcome {
    let mut checked = 0;
    for conv in [Convention::RealHalf, Convention::MinusIHalf] {
        for n in [1usize, 2] {
            let space = PhaseSpace::standard(n, conv);
            let dim = 2 * n;
            let basis = Polynomial::monomial_basis(dim, 4);
            let order = 4;
            let one = FormalSeries::constant(dim, Scalar::one(), order);
            for f in &basis {
                let fs = FormalSeries::from_poly(f.clone(), order);
                ensure(moyal_product(&space, &one, &fs).unwrap() == fs, format!("1*f != f for {f}"))?;
                ensure(moyal_product(&space, &fs, &one).unwrap() == fs, format!("f*1 != f for {f}"))?;
                for g in &basis {
                    let gs = FormalSeries::from_poly(g.clone(), order);
                    let fg = moyal_product(&space, &fs, &gs).unwrap();
                    let gf = moyal_product(&space, &gs, &fs).unwrap();
                    checked += 1;
                    for r in 0..=order {
                        let sign = if r % 2 == 0 { s(1) } else { s(-1) };
                        ensure(*fg.coeff(r) == gf.coeff(r).scale(&sign), format!("parity ({f}, {g}) at r={r}"))?;
                    }
                    ensure(*fg.coeff(0) == f * g, format!("classical term ({f}, {g})"))?;
                    ensure(*fg.coeff(1) == poisson(f, g).scale(&c1(conv)), format!("C_1 ({f}, {g}) {conv}"))?;
                    if n == 1 {
                        ensure(fg == moyal_oracle(f, g, order, conv), format!("closed form ({f}, {g}) {conv}"))?;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} ordered monomial pairs up to degree 4, both conventions, n in {{1,2}}"))
}

fn quadratic_exactness() -> Outcome {
    let mut checked = 0;
    for conv in [Convention::RealHalf, Convention::MinusIHalf] {
        for n in [1usize, 2] {
            let dim = 2 * n;
            let moyal = Moyal::new(PhaseSpace::standard(n, conv));
            let order = 4;
            for f in Polynomial::monomial_basis(dim, 2) {
                for g in Polynomial::monomial_basis(dim, 4) {
                    let b = quantum_bracket(
                        &moyal,
                        &FormalSeries::from_poly(f.clone(), order + 1),
                        &FormalSeries::from_poly(g.clone(), order + 1),
                    )
                    .unwrap();
                    ensure(b == FormalSeries::from_poly(poisson(&f, &g), order), format!("({f}, {g}) {conv}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} pairs, all orders through hbar^4 exact"))
}

fn heisenberg() -> Outcome {
    let start = Instant::now();
    let sc = scenario("heisenberg");
    let j0 = ClassicalMomentumMap::new(&sc.action, sc.momentum.clone().unwrap()).map_err(|e| e.to_string())?;
    let sigma = sigma_2cocycle(&j0).map_err(|e| e.to_string())?;
    ensure(sigma.eval_basis(&[0, 1]) == FormalSeries::constant(2, s(1), sigma.order()), "Sigma(e1,e2) != 1")?;
    let class = classify_equivariance(&sc.algebra, &sigma).map_err(|e| e.to_string())?;
    ensure(matches!(class, Equivariance::NonTrivial { .. }), format!("classified {}", class.label()))?;
    let tilde = extend_classical(&j0, &sigma).map_err(|e| e.to_string())?;
    // Heisenberg algebra: [e1,e2] = e3 central, all other brackets zero.
    let lie = tilde.extension().as_lie_algebra().ok_or("extension depends on hbar")?;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let expected = match (i, j, k) {
                    (0, 1, 2) => s(1),
                    (1, 0, 2) => s(-1),
                    _ => s(0),
                };
                ensure(*lie.constant(i, j, k) == expected, format!("c[{i}][{j}]^{k}"))?;
            }
        }
    }
    tilde.check_homomorphism().map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("Sigma = 1, nontrivial, extension is Heisenberg, homomorphism exact, {:?}", start.elapsed()))
}

fn sl2() -> Outcome {
    let sc = scenario("sl2");
    let j0 = solve_momentum(&sc.action).map_err(|e| e.to_string())?;
    let (q, p) = (q(2), p(2));
    let half = Scalar::ratio(1, 2);
    let expected = [q.pow(2).scale(&half), p.pow(2).scale(&half), &q * &p];
    for (i, (got, want)) in j0.values().iter().zip(&expected).enumerate() {
        let shifted = got - &Polynomial::constant(2, got.constant_term());
        ensure(shifted == *want, format!("J0(e{}) = {got}", i + 1))?;
    }
    ensure(sigma_2cocycle(&j0).map_err(|e| e.to_string())?.is_zero(), "Sigma != 0")?;

    let sc = scenario("sl2_magnetic");
    let beta = beta_of(&sc);
    let star = star_for(&sc);
    let order = 4;
    let j = match quantum_momentum_exists(&j0, &sc.omega, star.as_ref(), order + 1).map_err(|e| e.to_string())? {
        Existence::Yes(j) => j,
        Existence::No(w) => return Err(format!("no solution: {w:?}")),
    };
    for (i, (v, c)) in j.values().iter().zip(j0.values()).enumerate() {
        ensure(*v == one_plus_hbar(&beta, c, order + 1), format!("J(e{}) = {v}", i + 1))?;
    }
    let lambda = lambda_cocycle(&sc.action, &j, star.as_ref(), &sc.omega, order).map_err(|e| e.to_string())?;
    ensure(lambda.is_zero() && lambda.order() == order, "lambda != 0")?;
    Ok(format!("J0 = (q^2/2, p^2/2, qp), Sigma = 0, J = (1 + {beta} hbar) J0, lambda = 0 at hbar^4"))
}

fn heisenberg_magnetic() -> Outcome {
    let sc = scenario("heisenberg_magnetic");
    let beta = beta_of(&sc);
    let star = star_for(&sc);
    let order = 4;
    let j0 = ClassicalMomentumMap::new(&sc.action, sc.momentum.clone().unwrap()).map_err(|e| e.to_string())?;
    let w = match quantum_momentum_exists(&j0, &sc.omega, star.as_ref(), order + 1).map_err(|e| e.to_string())? {
        Existence::No(w) => w,
        Existence::Yes(_) => return Err("expected no quantum momentum map over g".into()),
    };
    let (residual, pair, at) = w.residual.ok_or("missing residual witness")?;
    ensure(pair == (1, 2) && at == 1, format!("residual fails at {pair:?}, hbar^{at}"))?;
    // Ω(∂_q, ∂_p) − δJ₊(e1, e2) = β − 2β for J₊ = ℏβ(p, −q).
    ensure(*residual.eval_basis(&[0, 1]).coeff(1) == Polynomial::constant(2, -&beta), "residual value")?;

    let sol = match extended_qmm_exists(&j0, &sc.omega, star.as_ref(), order + 1).map_err(|e| e.to_string())? {
        Existence::Yes(sol) => sol,
        Existence::No(w) => return Err(format!("expected extended solution, got {w:?}")),
    };
    let sigma = sigma_2cocycle(&j0).map_err(|e| e.to_string())?;
    let tilde = extend_classical(&j0, &sigma).map_err(|e| e.to_string())?;
    for (i, (v, c)) in sol.map.values().iter().zip(tilde.basis_values()).enumerate() {
        ensure(*v == one_plus_hbar(&beta, &c, order + 1), format!("tilde J(e{}) = {v}", i + 1))?;
    }
    let rep = restrict_to_g(&sol.map, &j0, &sc.omega, star.as_ref(), sc.degree, order).map_err(|e| e.to_string())?;
    ensure(rep.hamiltonian.passed, "restriction is not a quantum Hamiltonian")?;
    let lambda = rep.defect.eval_basis(&[0, 1]);
    ensure(lambda == one_plus_hbar(&beta, &Polynomial::one(2), order), format!("lambda(e1,e2) = {lambda}"))?;
    ensure(*lambda.coeff(0) == *sigma.eval_basis(&[0, 1]).coeff(0), "lambda mod hbar != Sigma")?;
    ensure(rep.defect_mod_hbar_is_sigma, "library reports lambda mod hbar != Sigma")?;
    Ok(format!("no over g (residual -{beta} at hbar^1), yes over extension, lambda(e1,e2) = 1 + {beta} hbar"))
}

fn lambda_two_ways() -> Outcome {
    let order = 4;
    let mut pairs = 0;
    for name in BUNDLED {
        let sc = scenario(name);
        let star = star_for(&sc);
        let j0 = match &sc.momentum {
            Some(v) => ClassicalMomentumMap::new(&sc.action, v.clone()).map_err(|e| e.to_string())?,
            None => solve_momentum(&sc.action).map_err(|e| e.to_string())?,
        };
        let jp = solve_j_plus(&sc.action, &sc.omega, order + 1).map_err(|e| e.to_string())?;
        let values: Vec<FormalSeries> =
            j0.values().iter().zip(&jp).map(|(c, q)| &FormalSeries::from_poly(c.clone(), order + 1) + q).collect();
        let j = QuantumHamiltonian::new(&sc.action, values.clone()).map_err(|e| e.to_string())?;
        let commutator = homomorphism_defect(&sc.algebra, &values, star.as_ref(), order).map_err(|e| e.to_string())?;
        let closed = lambda_closed_form(&sc.action, &j, &sc.omega, order).map_err(|e| e.to_string())?;
        for pr in increasing_tuples(sc.algebra.dim(), 2) {
            let oracle = lambda_oracle(&sc, &values, pr[0], pr[1], order);
            let c = commutator.eval_basis(&pr);
            ensure(c == oracle, format!("{name} ({},{}): commutator {c} vs {oracle}", pr[0] + 1, pr[1] + 1))?;
            ensure(closed.eval_basis(&pr) == oracle, format!("{name}: closed form at {pr:?}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} basis pairs over {} scenarios at hbar^{order}", BUNDLED.len()))
}

fn fedosov_engine() -> Outcome {
    let start = Instant::now();
    let space = PhaseSpace::standard(1, Convention::RealHalf);
    let n_w = 8;
    let mut m = vec![vec![Polynomial::zero(2); 2]; 2];
    m[0][1] = Polynomial::constant(2, Scalar::ratio(1, 2));
    m[1][0] = Polynomial::constant(2, Scalar::ratio(-1, 2));
    let magnetic = TwoFormSeries::new(2, vec![(1, m)]).unwrap();
    let weyl = weyl_samples(2, n_w, 100, 21);
    let mut r = rng(22);
    let funcs: Vec<FormalSeries> =
        (0..20).map(|_| FormalSeries::from_poly(random_polynomial(&mut r, 2, 3, 4), 3)).collect();
    for omega in [TwoFormSeries::zero(2), magnetic] {
        let fed = Fedosov::new(FedosovConfig::new(space.clone(), omega, n_w)).map_err(|e| e.to_string())?;
        for (i, a) in weyl.iter().enumerate() {
            ensure(homotopy_identity_holds(a), format!("homotopy identity, sample {i}"))?;
            ensure(delta(&delta(a)).is_zero(), format!("delta^2, sample {i}"))?;
            ensure(d_squared_vanishes(&fed, a).map_err(|e| e.to_string())?, format!("D^2, sample {i}"))?;
        }
        for (i, f) in funcs.iter().enumerate() {
            let (sigma_ok, flat) = taylor_identities(&fed, f).map_err(|e| e.to_string())?;
            ensure(sigma_ok, format!("sigma(tau f) != f, sample {i}"))?;
            ensure(flat, format!("D tau f != 0, sample {i}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("100 Weyl elements, 20 functions, N_W = 8, zero and magnetic Omega, {:?}", start.elapsed()))
}

fn fedosov_moyal() -> Outcome {
    let mut checked = 0;
    for conv in [Convention::RealHalf, Convention::MinusIHalf] {
        let space = PhaseSpace::standard(1, conv);
        let config = FedosovConfig::new(space.clone(), TwoFormSeries::zero(2), 10);
        let basis = Polynomial::monomial_basis(2, 2);
        for f in &basis {
            for g in &basis {
                let (fs, gs) = (FormalSeries::from_poly(f.clone(), 3), FormalSeries::from_poly(g.clone(), 3));
                let fed = fedosov_star(&fs, &gs, &config).map_err(|e| e.to_string())?;
                ensure(fed == moyal_product(&space, &fs, &gs).unwrap(), format!("({f}, {g}) {conv}"))?;
                ensure(fed == moyal_oracle(f, g, 3, conv), format!("closed form ({f}, {g}) {conv}"))?;
                checked += 1;
            }
        }
        let mut r = rng(31);
        for _ in 0..10 {
            let f = FormalSeries::from_poly(random_polynomial(&mut r, 2, 2, 4), 3);
            let g = FormalSeries::from_poly(random_polynomial(&mut r, 2, 2, 4), 3);
            let fed = fedosov_star(&f, &g, &config).map_err(|e| e.to_string())?;
            ensure(fed == moyal_product(&space, &f, &g).unwrap(), format!("random pair {f}, {g}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs of degree <= 2 at hbar^3, N_W = 10, both conventions"))
}

fn jacobi_of(ext: &ExtendedAlgebra) -> Result<(), String> {
    ext.check_jacobi().map_err(|e| e.to_string())
}

fn quantum_extension() -> Outcome {
    let order = 4;
    for name in ["heisenberg", "heisenberg_magnetic"] {
        let sc = scenario(name);
        let star = star_for(&sc);
        let j0 = ClassicalMomentumMap::new(&sc.action, sc.momentum.clone().unwrap()).map_err(|e| e.to_string())?;
        let jp = solve_j_plus(&sc.action, &sc.omega, order + 1).map_err(|e| e.to_string())?;
        let values =
            j0.values().iter().zip(&jp).map(|(c, q)| &FormalSeries::from_poly(c.clone(), order + 1) + q).collect();
        let j = QuantumHamiltonian::new(&sc.action, values).map_err(|e| e.to_string())?;
        let lambda = lambda_cocycle(&sc.action, &j, star.as_ref(), &sc.omega, order).map_err(|e| e.to_string())?;
        let jhat = canonical_quantum_extension(&sc.action, &j, &lambda).map_err(|e| e.to_string())?;
        jacobi_of(jhat.extension()).map_err(|e| format!("{name}: {e}"))?;
        let samples = [
            lambda.eval_basis(&[0, 1]).with_order(order + 1),
            FormalSeries::from_coeffs(2, vec![Polynomial::one(2), Polynomial::constant(2, s(3))], order + 1).unwrap(),
        ];
        let central = check_constants_central(star.as_ref(), &samples, sc.degree, order).map_err(|e| e.to_string())?;
        ensure(central.passed, format!("{name}: constants not central: {:?}", central.witness))?;
        let bad = jhat.check_homomorphism(star.as_ref(), order).map_err(|e| e.to_string())?;
        ensure(bad.is_none(), format!("{name}: homomorphism fails at {bad:?}"))?;
        let sigma = sigma_2cocycle(&j0).map_err(|e| e.to_string())?;
        let tilde = extend_classical(&j0, &sigma).map_err(|e| e.to_string())?;
        let quotient = classical_limit_quotient(&jhat, &tilde).map_err(|e| e.to_string())?;
        ensure(quotient.matches_tilde_j0 && quotient.cocycle_matches, format!("{name}: quotient {quotient:?}"))?;
        let reduced: Vec<Polynomial> = jhat.values().iter().map(qmm_core::classical_limit).collect();
        ensure(reduced == tilde.basis_values(), format!("{name}: reduced map differs"))?;
        ensure(*lambda.eval_basis(&[0, 1]).coeff(0) == *sigma.eval_basis(&[0, 1]).coeff(0), "lambda mod hbar")?;
    }
    Ok(format!("Jacobi, centrality, homomorphism at hbar^{order}, quotient on both Heisenberg scenarios"))
}

fn load_error(name: &str) -> Result<ScenarioError, String> {
    match load_scenario(&scenario_path(&format!("corrupted/{name}"))) {
        Ok(_) => Err(format!("{name} loaded")),
        Err(e) => Ok(e),
    }
}

fn invariant_error(name: &str, what: &str, detail: &str) -> Result<(), String> {
    match load_error(name)? {
        ScenarioError::Invariant { what: w, detail: d } if w == what && d.contains(detail) => Ok(()),
        other => Err(format!("{name}: unexpected error {other}")),
    }
}

fn negative_paths() -> Outcome {
    invariant_error("non_jacobi", "lie algebra", "Jacobi identity fails at (i, j, k, l)")?;
    invariant_error("non_closed_omega", "Omega", "not closed")?;
    invariant_error("non_symplectic_generator", "action", "does not preserve omega")?;
    invariant_error("classical_omega_term", "Omega", "hbar^0 term")?;

    let sc = load_scenario(&scenario_path("corrupted/flipped_momentum")).map_err(|e| e.to_string())?;
    let report = run_pipeline(&sc, &PipelineOptions::default());
    let status = |st: Stage| report.stage(st).map(|r| r.status);
    ensure(status(Stage::Validate) == Some(StageStatus::Ok), "flipped J0 failed validation")?;
    ensure(status(Stage::Momentum) == Some(StageStatus::Failed), "flipped J0 passed the momentum stage")?;
    let v = report.verdict(claims::MOMENTUM_GENERATES).ok_or("missing momentum verdict")?;
    ensure(v.detail.contains("e1"), format!("witness {}", v.detail))?;
    for st in [Stage::Classify, Stage::Quantize, Stage::Extend] {
        ensure(status(st) == Some(StageStatus::Skipped), format!("{st} ran after the failure"))?;
    }
    ensure(report.exit_code() == 1, "exit code")?;
    Ok("four load-time invariant errors, flipped J0 stops at the momentum stage".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("Moyal associativity on random triples", moyal_associativity),
        ("star product axioms on the monomial basis", star_axioms),
        ("quantum bracket of quadratics is the Poisson bracket", quadratic_exactness),
        ("Heisenberg cocycle, class and extension", heisenberg),
        ("sl(2) momentum map and magnetic quantization", sl2),
        ("Heisenberg-magnetic existence and restriction", heisenberg_magnetic),
        ("lambda by commutator equals closed form", lambda_two_ways),
        ("Fedosov engine identities", fedosov_engine),
        ("Fedosov with zero data equals Moyal", fedosov_moyal),
        ("canonical quantum extension", quantum_extension),
        ("corrupted scenarios fail at their stage", negative_paths),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.2}s]: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name} [{secs:.2}s]: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
