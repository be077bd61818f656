//! Command line front end: load geometry definitions, run verification
//! suites, and emit Ricci tables, quantized-relation reports, the two-point
//! example, and the spacetime relation table.

use std::process::ExitCode;
use std::rc::Rc;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use codiff::dga::{ClassicalForms, Dga};
use codiff::error::{Error, Result};
use codiff::extension::{
    cocycle_check, construct_flat_cleft, ext2_mul, ext_d, ext_mul, sample_triples, BiMap,
    ElemMap, Ext2Dga, Ext2Element, ExtElement, HostSampler,
};
use codiff::forms::Form;
use codiff::geometry::{load_geometry, Geometry, GeometryData};
use codiff::ncdga::{
    nc_connection, nc_inner_delta, nc_laplace_beltrami, nc_laplacian, nc_metric, nc_torsion,
    NcForm, PerpTable,
};
use codiff::report::{CheckResult, Report};
use codiff::riemann::{conformal_check, perp, ricci_via_delta, Christoffel, DeltaHandle};
use codiff::scalar::Scalar;
use codiff::suites::{run_suite, z2_suite, SuiteConfig, SuiteKind};
use codiff::timext::spacetime_relations;

#[derive(Parser)]
#[command(
    name = "codiff",
    about = "Exact verification of Riemannian reconstruction from a codifferential"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Built-in geometry name or path to a geometry definition file
    #[arg(long, default_value = "flat2")]
    geometry: String,
    /// Random seed for sampled checks
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Samples per sampled check
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Deformation parameter, a rational like 1/3
    #[arg(long, default_value = "1/3")]
    lambda: String,
    /// Residual tolerance; defaults to 0 (rational) or 1e-8 (jets)
    #[arg(long)]
    tolerance: Option<f64>,
    /// Jet truncation order override
    #[arg(long)]
    order: Option<u32>,
    /// Degree cap for the time variable / two-point calculus
    #[arg(long, default_value_t = 4)]
    cap: usize,
    /// Also print the report as JSON
    #[arg(long, default_value_t = false)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites against a geometry
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Suite selector: riemann | extension | timext | all
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Print Ricci via -1/2 Δ(g) and via the Christoffel oracle
    Ricci {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the quantized relation tables for a classical geometry
    Quantize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the noncommutative two-point example
    Z2 {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the spacetime relation table for a geometry with conformal data
    Spacetime {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn parse_lambda(text: &str) -> Result<BigRational> {
    BigRational::from_str(text)
        .map_err(|e| Error::Usage(format!("cannot parse --lambda '{text}': {e}")))
}

fn load(common: &CommonArgs) -> Result<Geometry> {
    let source = if std::path::Path::new(&common.geometry).is_file() {
        std::fs::read_to_string(&common.geometry)
            .map_err(|e| Error::Usage(format!("cannot read {}: {e}", common.geometry)))?
    } else {
        common.geometry.clone()
    };
    load_geometry(&source)?.instantiate(common.order)
}

fn config(common: &CommonArgs, geo: &Geometry) -> Result<SuiteConfig> {
    Ok(SuiteConfig {
        lambda: parse_lambda(&common.lambda)?,
        samples: common.samples,
        seed: common.seed,
        tolerance: common.tolerance.unwrap_or_else(|| geo.default_tolerance()),
        tcap: common.cap,
    })
}

fn emit(report: &Report, json: bool) -> Result<bool> {
    print!("{}", report.render_text());
    if json {
        let doc = serde_json::to_string_pretty(report)
            .map_err(|e| Error::Usage(format!("cannot serialize report: {e}")))?;
        println!("{doc}");
    }
    Ok(report.pass)
}

fn cmd_verify(common: &CommonArgs, suite: &str) -> Result<bool> {
    let kind = SuiteKind::from_str(suite)?;
    let geo = load(common)?;
    let cfg = config(common, &geo)?;
    let checks = run_suite(&geo, kind, &cfg)?;
    emit(&Report::new(suite, geo.name(), cfg.seed, checks), common.json)
}

fn ricci_table<S: Scalar>(g: &GeometryData<S>, tolerance: f64) -> Result<bool> {
    let m = &g.metric;
    let names = &g.chart.coords;
    let handle = DeltaHandle::divergence(m.clone())?;
    let delta = handle.as_fn();
    let ric = ricci_via_delta(m, &delta)?;
    let oracle = Christoffel::new(m)?.ricci_matrix(&m.exemplar)?;
    println!("Ricci for {} (tolerance {:.1e})", g.name, tolerance);
    let mut worst = 0.0_f64;
    for i in 0..m.n {
        for j in 0..m.n {
            let diff = ric.entries[i][j].sub(&oracle[i][j])?.residual_norm();
            worst = worst.max(diff);
            println!(
                "  Ricci[{}][{}]  -1/2·Δ(g): {:<24}  oracle: {:<24}  diff {:.3e}",
                names[i],
                names[j],
                ric.entries[i][j].render(names),
                oracle[i][j].render(names),
                diff
            );
        }
    }
    let pass = worst <= tolerance;
    println!("overall: {}", if pass { "pass" } else { "FAIL" });
    Ok(pass)
}

fn cmd_ricci(common: &CommonArgs) -> Result<bool> {
    let geo = load(common)?;
    let tol = common.tolerance.unwrap_or_else(|| geo.default_tolerance());
    match &geo {
        Geometry::Rational(g) => ricci_table(g, tol),
        Geometry::Jets(g) => ricci_table(g, tol),
    }
}

fn render_ext<S: Scalar>(g: &GeometryData<S>, x: &ExtElement<Form<S>>) -> String {
    let body = x.body.render(&g.chart);
    if x.prime.is_zero() {
        body
    } else if x.body.is_zero() {
        format!("({}) θ'", x.prime.render(&g.chart))
    } else {
        format!("{} + ({}) θ'", body, x.prime.render(&g.chart))
    }
}

fn render_ext2<S: Scalar>(g: &GeometryData<S>, x: &Ext2Element<Form<S>>) -> String {
    let mut parts = Vec::new();
    if !x.body.is_zero() {
        parts.push(x.body.render(&g.chart));
    }
    if !x.prime.is_zero() {
        parts.push(format!("({}) θ'", x.prime.render(&g.chart)));
    }
    if !x.dprime.is_zero() {
        parts.push(format!("({}) dθ'", x.dprime.render(&g.chart)));
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

fn quantize_tables<S: Scalar>(
    g: &GeometryData<S>,
    lambda: &BigRational,
    seed: u64,
    tolerance: f64,
) -> Result<bool> {
    let m = &g.metric;
    let n = m.n;
    let host = ClassicalForms::new(n, m.exemplar.clone(), g.chart.clone());
    let handle = DeltaHandle::divergence(m.clone())?;
    let perp_map: BiMap<Form<S>> = Rc::new(|w, e| perp(&m.ginv, w, e));
    let delta_map: ElemMap<Form<S>> = Rc::new(|w| handle.apply(w));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples = sample_triples(&host, &mut rng, 20, 2)?;
    let functions: Vec<Form<S>> = (0..3)
        .map(|_| host.sample(&mut rng, 0))
        .collect::<Result<_>>()?;
    let data = construct_flat_cleft(
        &host,
        perp_map,
        delta_map,
        lambda.clone(),
        &triples,
        &functions,
        tolerance,
    )?;
    let lift = |w: &Form<S>| ExtElement::from_body(w.clone(), Form::zero(n));

    println!("Quantized relations for {} at λ = {}", g.name, lambda);
    println!("Ω̃ (one extra generator θ' of degree 1):");
    for i in 0..n {
        let xi = Form::scalar(n, m.coordinate(i));
        for j in 0..n {
            let dxj = m.basis_one_form(j);
            let ab = ext_mul(&host, &data.cocycle, &lift(&xi), &lift(&dxj))?;
            let ba = ext_mul(&host, &data.cocycle, &lift(&dxj), &lift(&xi))?;
            let comm = ExtElement {
                body: ab.body.sub(&ba.body)?,
                prime: ab.prime.sub(&ba.prime)?,
            };
            println!(
                "  [{}, d{}] = {}",
                g.chart.coords[i],
                g.chart.coords[j],
                render_ext(g, &comm)
            );
        }
    }
    for i in 0..n {
        for j in i..n {
            let a = lift(&m.basis_one_form(i));
            let b = lift(&m.basis_one_form(j));
            let ab = ext_mul(&host, &data.cocycle, &a, &b)?;
            let ba = ext_mul(&host, &data.cocycle, &b, &a)?;
            let anti = ExtElement {
                body: ab.body.add(&ba.body)?,
                prime: ab.prime.add(&ba.prime)?,
            };
            println!(
                "  {{d{}, d{}}} = {}",
                g.chart.coords[i],
                g.chart.coords[j],
                render_ext(g, &anti)
            );
        }
    }
    for i in 0..n {
        let xi = Form::scalar(n, m.coordinate(i));
        let dx = ext_d(&host, &data.cocycle, &lift(&xi))?;
        println!("  d_·{} = {}", g.chart.coords[i], render_ext(g, &dx));
    }
    for i in 0..n {
        let wi = m.basis_one_form(i);
        let dw = ext_d(&host, &data.cocycle, &lift(&wi))?;
        println!("  d_·d{} = {}", g.chart.coords[i], render_ext(g, &dw));
    }

    println!("Ω̃̃ (further generator dθ' with d_·θ' = dθ'):");
    let ext2 = Ext2Dga::new(&host, &data);
    let theta = ext2.theta_prime();
    println!("  d_·θ' = {}", render_ext2(g, &ext2.d(&theta)?));
    for i in 0..n {
        let xi = ext2.lift(Form::scalar(n, m.coordinate(i)));
        let ab = ext2_mul(&host, &data, &xi, &theta)?;
        let ba = ext2_mul(&host, &data, &theta, &xi)?;
        let comm = Ext2Element {
            body: ab.body.sub(&ba.body)?,
            prime: ab.prime.sub(&ba.prime)?,
            dprime: ab.dprime.sub(&ba.dprime)?,
        };
        println!("  [{}, θ'] = {}", g.chart.coords[i], render_ext2(g, &comm));
    }

    let checks = cocycle_check(&host, &data.cocycle, &triples, tolerance)?;
    let report = Report::new("quantize", &g.name, seed, checks);
    print!("{}", report.render_text());
    Ok(report.pass)
}

fn cmd_quantize(common: &CommonArgs) -> Result<bool> {
    let geo = load(common)?;
    let lambda = parse_lambda(&common.lambda)?;
    let tol = common.tolerance.unwrap_or_else(|| geo.default_tolerance());
    match &geo {
        Geometry::Rational(g) => quantize_tables(g, &lambda, common.seed, tol),
        Geometry::Jets(g) => quantize_tables(g, &lambda, common.seed, tol),
    }
}

fn cmd_z2(common: &CommonArgs) -> Result<bool> {
    let cap = common.cap.max(8);
    let p = PerpTable::standard();
    println!("Two-point (Z₂) calculus, degree cap {cap}");
    let gmetric = nc_metric(cap)?;
    println!("  metric g = {}", gmetric.wedge()?.render());
    for k in 1..=6usize.min(cap.saturating_sub(2)) {
        let w = NcForm::theta_pow(cap, k)?;
        println!("  degree {k}:");
        println!("    δ(θ^{k})      = {}", nc_inner_delta(&p, &w)?.render());
        println!(
            "    ∇_θ(θ^{k})    = {}",
            nc_connection(&p, &NcForm::theta(cap), &w)?.render()
        );
        println!("    T(θ^{k})      = {}", nc_torsion(&p, &w)?.render());
        println!("    Δ(θ^{k})      = {}", nc_laplacian(&p, &w)?.render());
        println!("    Δ_LB(θ^{k})   = {}", nc_laplace_beltrami(&p, &w)?.render());
    }
    let lambda = parse_lambda(&common.lambda)?;
    let checks = z2_suite(cap, &lambda, common.samples, common.seed)?;
    let report = Report::new("z2", "z2", common.seed, checks);
    emit(&report, common.json)
}

fn spacetime_report<S: Scalar>(
    g: &GeometryData<S>,
    lambda: &BigRational,
    tcap: usize,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<bool> {
    let tau = g.conformal.as_ref().ok_or_else(|| {
        Error::Usage(format!(
            "geometry '{}' carries no conformal 1-form; spacetime needs one",
            g.name
        ))
    })?;
    let m = &g.metric;
    let handle = DeltaHandle::divergence(m.clone())?;
    let delta = handle.as_fn();
    println!(
        "Spacetime quantization of {} with τ = {}, λ = {}",
        g.name,
        tau.render(&g.chart),
        lambda
    );
    let mut checks: Vec<CheckResult> =
        conformal_check(m, &delta, tau, samples.min(20), seed, tolerance, true)?;
    checks.extend(spacetime_relations(
        m,
        tau,
        lambda.clone(),
        tcap,
        samples.min(6),
        seed.wrapping_add(1),
        tolerance,
    )?);
    let report = Report::new("spacetime", &g.name, seed, checks);
    print!("{}", report.render_text());
    Ok(report.pass)
}

fn cmd_spacetime(common: &CommonArgs) -> Result<bool> {
    let geo = load(common)?;
    let lambda = parse_lambda(&common.lambda)?;
    let tol = common.tolerance.unwrap_or_else(|| geo.default_tolerance());
    match &geo {
        Geometry::Rational(g) => {
            spacetime_report(g, &lambda, common.cap, common.samples, common.seed, tol)
        }
        Geometry::Jets(g) => {
            spacetime_report(g, &lambda, common.cap, common.samples, common.seed, tol)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Verify { common, suite } => cmd_verify(common, suite),
        Command::Ricci { common } => cmd_ricci(common),
        Command::Quantize { common } => cmd_quantize(common),
        Command::Z2 { common } => cmd_z2(common),
        Command::Spacetime { common } => cmd_spacetime(common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
