//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (visible with `--nocapture`).

use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use codiff::forms::Form;
use codiff::geometry::{builtin, parse_geometry, Geometry};
use codiff::report::CheckResult;
use codiff::riemann::{
    conformal_check, conformal_data, pairing_scalar, ricci_via_delta, Christoffel, DeltaHandle,
};
use codiff::scalar::{rational_to_f64, Scalar};
use codiff::suites::{
    extension_suite, riemann_suite, run_suite, timext_suite, z2_suite, SuiteConfig, SuiteKind,
};
use codiff::timext::{iterated_line_calculus, spacetime_relations};

fn geo(name: &str) -> Geometry {
    parse_geometry(builtin(name).unwrap())
        .unwrap()
        .instantiate(None)
        .unwrap()
}

fn lam() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(3))
}

fn report(criterion: &str, pass: bool) {
    println!("criterion {criterion}: {}", if pass { "pass" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed");
}

fn all_pass(checks: &[CheckResult], wanted: &[&str]) -> bool {
    wanted.iter().all(|id| {
        checks
            .iter()
            .find(|c| c.id == *id)
            .map(|c| c.pass)
            .unwrap_or(false)
    })
}

#[test]
fn criterion_01_ricci_reproduction() {
    let start = Instant::now();
    // sphere2: -1/2 Δ(g) = oracle Ricci = g, per jet coefficient at 1e-8
    let mut ok = true;
    if let Geometry::Jets(g) = geo("sphere2") {
        let m = &g.metric;
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let ric = ricci_via_delta(m, &delta).unwrap();
        let oracle = Christoffel::new(m).unwrap().ricci_matrix(&m.exemplar).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d1 = ric.entries[i][j].sub(&oracle[i][j]).unwrap().residual_norm();
                let d2 = ric.entries[i][j].sub(&m.g[i][j]).unwrap().residual_norm();
                ok &= d1 <= 1e-8 && d2 <= 1e-8;
            }
        }
    } else {
        ok = false;
    }
    // flat3: exactly zero in rational arithmetic
    if let Geometry::Rational(g) = geo("flat3") {
        let m = &g.metric;
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let ric = ricci_via_delta(m, &delta).unwrap();
        ok &= ric.is_zero();
    } else {
        ok = false;
    }
    ok &= start.elapsed().as_secs_f64() < 10.0;
    report("01 ricci reproduction", ok);
}

#[test]
fn criterion_02_levi_civita_reconstruction() {
    let mut ok = true;
    for (name, tol) in [("flat2", 0.0), ("sphere2", 1e-8), ("diagpoly", 0.0)] {
        let checks = match geo(name) {
            Geometry::Rational(g) => riemann_suite(&g.metric, 100, 5, tol).unwrap(),
            Geometry::Jets(g) => riemann_suite(&g.metric, 100, 5, tol).unwrap(),
        };
        ok &= all_pass(
            &checks,
            &["riemann.levi_oracle", "riemann.torsion", "riemann.compat"],
        );
        let torsion = checks.iter().find(|c| c.id == "riemann.torsion").unwrap();
        ok &= torsion.samples >= 100;
    }
    report("02 levi-civita reconstruction", ok);
}

#[test]
fn criterion_03_bv_suite() {
    let ids = [
        "riemann.bv7",
        "riemann.fourterm",
        "riemann.delta_lie",
        "riemann.comrel",
        "riemann.schouten",
        "riemann.l1",
        "riemann.l2",
        "riemann.liehigher",
    ];
    let mut ok = true;
    for (name, tol) in [("flat2", 0.0), ("sphere2", 1e-8), ("diagpoly", 0.0)] {
        let checks = match geo(name) {
            Geometry::Rational(g) => riemann_suite(&g.metric, 100, 11, tol).unwrap(),
            Geometry::Jets(g) => riemann_suite(&g.metric, 100, 11, tol).unwrap(),
        };
        ok &= all_pass(&checks, &ids);
        for id in &ids {
            let c = checks.iter().find(|c| &c.id == id).unwrap();
            ok &= c.samples >= 100;
        }
    }
    report("03 bv suite", ok);
}

#[test]
fn criterion_04_theta_fiber() {
    let mut ok = true;
    for name in ["flat2", "diagpoly"] {
        let checks = match geo(name) {
            Geometry::Rational(g) => riemann_suite(&g.metric, 10, 23, 0.0).unwrap(),
            Geometry::Jets(_) => unreachable!(),
        };
        ok &= all_pass(&checks, &["riemann.theta_fiber"]);
    }
    report("04 theta fiber invariance", ok);
}

#[test]
fn criterion_05_z2_example() {
    let start = Instant::now();
    let checks = z2_suite(8, &lam(), 40, 3).unwrap();
    let mut ok = checks.iter().all(|c| c.pass && c.tolerance == 0.0);
    ok &= start.elapsed().as_secs_f64() < 1.0;
    report("05 z2 example exact", ok);
}

#[test]
fn criterion_06_extension_soundness() {
    let ids = [
        "extension.assoc",
        "extension.leibniz",
        "extension.dsq",
        "extension.theta_central",
        "extension.cleft",
        "extension.reconstruct",
        "extension.project",
        "extension.cocycle.c1",
        "extension.cocycle.c2",
        "extension.cocycle.dcomm",
    ];
    let mut ok = true;
    for (name, tol) in [("flat2", 0.0), ("sphere2", 1e-8)] {
        let checks = match geo(name) {
            Geometry::Rational(g) => {
                extension_suite(&g.metric, &g.chart, &lam(), 100, 17, tol).unwrap()
            }
            Geometry::Jets(g) => {
                extension_suite(&g.metric, &g.chart, &lam(), 100, 17, tol).unwrap()
            }
        };
        ok &= all_pass(&checks, &ids);
    }
    // the Z₂ inner cocycle
    let z2 = z2_suite(8, &lam(), 100, 19).unwrap();
    ok &= all_pass(
        &z2,
        &[
            "z2.extension.cocycle.c1",
            "z2.extension.cocycle.c2",
            "z2.extension.cocycle.dcomm",
            "z2.bracket_is_2nabla",
            "z2.reconstruct",
        ],
    );
    report("06 extension soundness", ok);
}

#[test]
fn criterion_07_gauge_invariance() {
    let mut ok = true;
    for (name, tol) in [("flat2", 0.0), ("sphere2", 1e-8)] {
        let checks = match geo(name) {
            Geometry::Rational(g) => {
                extension_suite(&g.metric, &g.chart, &lam(), 30, 29, tol).unwrap()
            }
            Geometry::Jets(g) => {
                extension_suite(&g.metric, &g.chart, &lam(), 30, 29, tol).unwrap()
            }
        };
        ok &= all_pass(&checks, &["extension.gauge"]);
    }
    report("07 gauge invariance", ok);
}

#[test]
fn criterion_08_semidirect_product() {
    let mut ok = true;
    // exhaustive min-relation for the triple iterated line calculus
    let line = iterated_line_calculus(3, lam(), 4, 0.0).unwrap();
    ok &= line.iter().all(|c| c.pass);
    ok &= line.iter().any(|c| c.id == "line.min_relation");
    // τ = 0 and spacetime τ over flat2 (conformal built in)
    if let Geometry::Rational(g) = geo("flat2") {
        let checks = timext_suite(
            &g.metric,
            &g.chart,
            g.conformal.as_ref(),
            &lam(),
            4,
            30,
            31,
            0.0,
        )
        .unwrap();
        ok &= all_pass(
            &checks,
            &[
                "timext.assoc",
                "timext.dsq",
                "timext.tau0.commute",
                "timext.tau0.dt",
                "spacetime.tau.derivation",
            ],
        );
    } else {
        ok = false;
    }
    report("08 semidirect product", ok);
}

#[test]
fn criterion_09_conformal_suite() {
    let mut ok = true;
    for name in ["flat2", "flat3"] {
        if let Geometry::Rational(g) = geo(name) {
            let m = &g.metric;
            let n = m.n;
            let handle = DeltaHandle::divergence(m.clone()).unwrap();
            let delta = handle.as_fn();
            let tau = g.conformal.as_ref().unwrap();
            let checks = conformal_check(m, &delta, tau, 40, 37, 0.0, true).unwrap();
            ok &= checks.iter().all(|c| c.pass);
            // Euler form: α = 2 and β = n/2 exactly
            let data = conformal_data(m, &delta, tau).unwrap();
            let two = m.exemplar.one_like().scale(&BigRational::from_integer(2.into()));
            ok &= data.alpha.sub(&two).unwrap().is_zero();
            ok &= data.beta == BigRational::new(BigInt::from(n as i64), BigInt::from(2));
        } else {
            ok = false;
        }
    }
    // a deliberately wrong conformal form must fail
    if let Geometry::Rational(g) = geo("flat2") {
        let m = &g.metric;
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let bad = Form::basis_one_form(2, 1, &m.exemplar)
            .scalar_mul(&m.coordinate(0))
            .unwrap();
        let failed = match conformal_check(m, &delta, &bad, 10, 41, 0.0, false) {
            Ok(checks) => checks.iter().any(|c| !c.pass),
            Err(_) => true,
        };
        ok &= failed;
    }
    report("09 conformal suite", ok);
}

#[test]
fn criterion_10_spacetime_quantization() {
    let mut ok = true;
    // flat2: everything exact, with the λ²(n−2)/4 coefficient exactly zero
    if let Geometry::Rational(g) = geo("flat2") {
        let checks = spacetime_relations(&g.metric, g.conformal.as_ref().unwrap(), lam(), 4, 6, 43, 0.0)
            .unwrap();
        ok &= checks.iter().all(|c| c.pass);
        ok &= all_pass(
            &checks,
            &[
                "spacetime.tau.derivation",
                "spacetime.tau.dcomm",
                "spacetime.t_omega",
                "spacetime.dt_omega",
                "spacetime.t_thetaprime",
            ],
        );
    } else {
        ok = false;
    }
    // flat3 with the special conformal τ: the λ² term has a nonzero
    // coefficient (dα, ω) and the relation still holds exactly
    if let Geometry::Rational(g) = geo("flat3sc") {
        let m = &g.metric;
        let tau = g.conformal.as_ref().unwrap();
        let handle = DeltaHandle::divergence(m.clone()).unwrap();
        let delta = handle.as_fn();
        let data = conformal_data(m, &delta, tau).unwrap();
        let dalpha = Form::scalar(3, data.alpha.clone()).exterior_d().unwrap();
        let pair = pairing_scalar(
            &m.ginv,
            &dalpha,
            &m.basis_one_form(0),
            &m.exemplar,
        )
        .unwrap();
        ok &= !pair.is_zero();
        ok &= rational_to_f64(&(data.beta.clone()
            - BigRational::new(BigInt::from(1), BigInt::from(4))
                * BigRational::from_integer(BigInt::from(6))))
        .abs()
            < 1e-12; // β = 3/2 for n = 3
        let checks = spacetime_relations(m, tau, lam(), 4, 4, 47, 0.0).unwrap();
        ok &= checks.iter().all(|c| c.pass);
    } else {
        ok = false;
    }
    report("10 spacetime quantization", ok);
}

#[test]
fn cli_suite_config_round_trip() {
    // run_suite smoke test shared by the CLI path
    let g = geo("flat2");
    let cfg = SuiteConfig {
        lambda: BigRational::from_str("1/3").unwrap(),
        samples: 10,
        seed: 1,
        tolerance: 0.0,
        tcap: 4,
    };
    let checks = run_suite(&g, SuiteKind::All, &cfg).unwrap();
    assert!(checks.iter().all(|c| c.pass));
}
