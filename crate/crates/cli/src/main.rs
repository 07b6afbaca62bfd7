//! `volcone`: exact volumes, Zariski decompositions, toric section counting,
//! regularity probes, Lipschitz certificates, and bundle segment identities
//! from one reproducible command line.

mod output;
mod parse;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use output::{float_value, rational_text, rational_value, Format, Rendered};
use parse::parse_class;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use volcone_core::lipschitz::{
    chain_inequality_check, empirical_lipschitz, lipschitz_certificate,
    lipschitz_certificate_with_sup, verify_axioms, ConeFunction,
};
use volcone_core::probes::{
    boundary_lipschitz_probe, concavity_check, hessian_probe, kt_probe,
    lipschitz_gradient_estimate, ConeScalar,
};
use volcone_core::report::ProbeReport;
use volcone_core::sample::{self, SampleBox};
use volcone_core::wolfe::{
    calibrate_line, segment_minus, segment_minus_derivative, segment_plus,
    segment_plus_derivative, transfer_regularity_report, wolfe_vol, BaseClass, BundleModel,
    QuadratureResult, QuadratureScheme,
};
use volcone_core::zariski::ZariskiError;
use volcone_core::{
    builtin_geometry, builtin_names, builtin_toric, builtin_toric_names, chamber_scan,
    fmt_rat, geometry_from_json, geometry_to_json, grad_vol, parse_rat, rat, rat_int,
    save_geometry, segment_profile, vol, zariski_decompose, DivisorClass, Rat, SurfaceGeometry,
    WallKind,
};

#[derive(Parser)]
#[command(
    name = "volcone",
    version,
    about = "Exact-arithmetic laboratory for volume functions of divisor classes on surfaces"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Write the report to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized probes
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List, show, or validate geometries
    Geom {
        #[command(subcommand)]
        cmd: GeomCmd,
    },
    /// Zariski decomposition of a divisor class
    Zariski(ClassArgs),
    /// Volume of a divisor class
    Vol(ClassArgs),
    /// Gradient of the volume at a big class
    Grad(ClassArgs),
    /// Sample t -> Vol(class + t dir) on a grid
    Profile(SegmentArgs),
    /// Exact chamber decomposition along a segment
    Chambers(ChambersArgs),
    /// Toric section-counting oracle
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Randomized regularity probes
    Probe {
        #[command(subcommand)]
        cmd: ProbeCmd,
    },
    /// Lipschitz certificates for cone functions
    Lipschitz {
        #[command(subcommand)]
        cmd: LipschitzCmd,
    },
    /// Bundle volumes and segment identities
    Wolfe {
        #[command(subcommand)]
        cmd: WolfeCmd,
    },
}

#[derive(Args)]
struct ClassArgs {
    /// Builtin geometry name or geometry file (searched via VOLCONE_GEOM_PATH)
    #[arg(long)]
    geom: String,
    /// Class expression, e.g. "2H-1E"
    #[arg(long, allow_hyphen_values = true)]
    class: String,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    geom: String,
    #[arg(long, allow_hyphen_values = true)]
    class: String,
    /// Direction class expression
    #[arg(long, allow_hyphen_values = true)]
    dir: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    t0: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    t1: String,
    #[arg(long, default_value_t = 16)]
    steps: u64,
}

#[derive(Args)]
struct ChambersArgs {
    #[arg(long)]
    geom: String,
    #[arg(long, allow_hyphen_values = true)]
    class: String,
    #[arg(long, allow_hyphen_values = true)]
    dir: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    t0: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    t1: String,
}

#[derive(Subcommand)]
enum GeomCmd {
    /// Builtin geometry families
    List,
    /// Geometry document as JSON
    Show {
        #[arg(long)]
        geom: String,
    },
    /// Validate a geometry (signature, curve negativity, schema)
    Check {
        #[arg(long)]
        geom: String,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Lattice points of the m-scaled sections polytope
    Count {
        #[arg(long)]
        toric: String,
        /// Ray coefficients, comma separated rationals
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long)]
        m: u64,
    },
    /// Exact polytope volume, with an optional count-based estimate
    Volume {
        #[arg(long)]
        toric: String,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long)]
        m: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// Midpoint concavity margins of f^exponent on random big segments
    Concavity {
        #[arg(long)]
        geom: String,
        /// "vol" or "dual:<CLASS>"
        #[arg(long = "fn", default_value = "vol", allow_hyphen_values = true)]
        function: String,
        #[arg(long, default_value = "1/2")]
        exponent: String,
        /// Sampling box "lo:hi,lo:hi,..." (default: geometry-specific)
        #[arg(long = "box", allow_hyphen_values = true)]
        sample_box: Option<String>,
        #[arg(long, default_value_t = 2000)]
        samples: u64,
    },
    /// Log-concavity of intersection numbers on random nef pairs
    Kt {
        #[arg(long)]
        geom: String,
        #[arg(long, default_value_t = 2000)]
        samples: u64,
    },
    /// Second differences of the volume along a one-parameter family
    Hessian {
        #[arg(long)]
        geom: String,
        /// Base class of the family
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// Family direction
        #[arg(long, allow_hyphen_values = true)]
        line: String,
        #[arg(long, allow_hyphen_values = true)]
        dir1: String,
        #[arg(long, allow_hyphen_values = true)]
        dir2: String,
        #[arg(long, default_value = "-1/2", allow_hyphen_values = true)]
        grid_from: String,
        #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
        grid_to: String,
        #[arg(long, default_value_t = 20)]
        grid_steps: u64,
        #[arg(long, default_value = "1/100", allow_hyphen_values = true)]
        step: String,
    },
    /// Gradient difference quotients on a box inside the big cone
    Lipschitz {
        #[arg(long)]
        geom: String,
        #[arg(long = "box", allow_hyphen_values = true)]
        sample_box: String,
        #[arg(long, default_value_t = 2000)]
        pairs: u64,
        /// Exact bound asserted on the max quotient
        #[arg(long, allow_hyphen_values = true)]
        bound: Option<String>,
    },
    /// Difference quotients at a volume-boundary class
    Boundary {
        #[arg(long)]
        geom: String,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// One-sided derivative directions, semicolon separated
        #[arg(long, allow_hyphen_values = true)]
        dirs: Option<String>,
        #[arg(long, default_value_t = 2000)]
        samples: u64,
        #[arg(long, default_value = "1/4", allow_hyphen_values = true)]
        radius: String,
        #[arg(long, allow_hyphen_values = true)]
        bound: Option<String>,
    },
}

#[derive(Args)]
struct CertifyArgs {
    /// "vol" (requires --geom), "monomial:a,b", or "linear:p,q"
    #[arg(long = "fn", allow_hyphen_values = true)]
    function: String,
    #[arg(long)]
    geom: Option<String>,
    /// Center coordinates, comma separated rationals
    #[arg(long, allow_hyphen_values = true)]
    center: String,
    #[arg(long, allow_hyphen_values = true)]
    eps: String,
    /// Basis vectors "a,b;c,d" (default: standard basis)
    #[arg(long, allow_hyphen_values = true)]
    basis: Option<String>,
    /// Closed-form supremum over the epsilon ball, if known
    #[arg(long, allow_hyphen_values = true)]
    sup: Option<String>,
    #[arg(long, default_value_t = 2000)]
    sup_samples: u64,
}

#[derive(Subcommand)]
enum LipschitzCmd {
    /// Verify the cone axioms and produce the certificate constant
    Certify(CertifyArgs),
    /// Fuzz empirical quotients and the sandwich inequalities against it
    Fuzz {
        #[command(flatten)]
        certify: CertifyArgs,
        #[arg(long, default_value_t = 10_000)]
        pairs: u64,
        #[arg(long, default_value_t = 1000)]
        chain_samples: u64,
    },
}

#[derive(Args)]
struct WolfeBaseArgs {
    /// "p1" or a surface geometry
    #[arg(long)]
    base: String,
    /// Ample class: a degree over p1, a class expression over a surface
    #[arg(long = "A", allow_hyphen_values = true)]
    ample: String,
    /// The class D: degree over p1, class expression over a surface
    #[arg(long = "D", default_value = "0", allow_hyphen_values = true)]
    d: String,
}

#[derive(Subcommand)]
enum WolfeCmd {
    /// Determine kappa from the Hirzebruch oracle (line base only)
    Calibrate {
        #[arg(long, default_value = "p1")]
        base: String,
        /// Ample degree (positive integer)
        #[arg(long = "A", allow_hyphen_values = true)]
        ample: String,
        /// Test degrees, comma separated (default 0..9)
        #[arg(long, allow_hyphen_values = true)]
        tests: Option<String>,
    },
    /// Bundle volume of xi + pi*E
    Vol {
        #[command(flatten)]
        base: WolfeBaseArgs,
        /// The class E (defaults to D)
        #[arg(long = "E", allow_hyphen_values = true)]
        e: Option<String>,
    },
    /// Segment values and closed-form derivatives at t
    Segment {
        #[command(flatten)]
        base: WolfeBaseArgs,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// Use the minus segment (requires Vol_B(D) = 0)
        #[arg(long)]
        minus: bool,
        /// Tabulate the transfer report on a grid up to t instead
        #[arg(long)]
        transfer: bool,
    },
}

fn resolve_geometry(spec: &str) -> Result<SurfaceGeometry> {
    if let Ok(g) = builtin_geometry(spec) {
        return Ok(g);
    }
    let direct = Path::new(spec);
    if direct.is_file() {
        let text = std::fs::read_to_string(direct)
            .with_context(|| format!("reading geometry file {spec}"))?;
        return Ok(geometry_from_json(&text)?);
    }
    if let Ok(paths) = std::env::var("VOLCONE_GEOM_PATH") {
        for dir in paths.split(':').filter(|d| !d.is_empty()) {
            for candidate in [
                Path::new(dir).join(spec),
                Path::new(dir).join(format!("{spec}.json")),
            ] {
                if candidate.is_file() {
                    let text = std::fs::read_to_string(&candidate)
                        .with_context(|| format!("reading {}", candidate.display()))?;
                    return Ok(geometry_from_json(&text)?);
                }
            }
        }
    }
    bail!("`{spec}` is neither a builtin geometry nor a readable geometry file")
}

fn parse_rat_arg(s: &str, what: &str) -> Result<Rat> {
    parse_rat(s).map_err(|e| anyhow!("invalid {what} `{s}`: {e}"))
}

fn parse_rat_list(s: &str, what: &str) -> Result<Vec<Rat>> {
    s.split(',')
        .map(|p| parse_rat_arg(p.trim(), what))
        .collect()
}

fn parse_basis(s: &str, dim: usize) -> Result<Vec<Vec<Rat>>> {
    let rows: Vec<Vec<Rat>> = s
        .split(';')
        .map(|v| parse_rat_list(v, "basis entry"))
        .collect::<Result<_>>()?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        bail!("basis must list {dim} vectors of dimension {dim}");
    }
    Ok(rows)
}

fn probe_json(report: &ProbeReport) -> serde_json::Value {
    serde_json::to_value(report).expect("report serializes")
}

fn probe_table(report: &ProbeReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "probe {} on {} ({})\nseed {}  samples {}\n",
        report.kind, report.geometry, report.region, report.seed, report.samples
    ));
    for stat in &report.statistics {
        match &stat.exact {
            Some(e) => s.push_str(&format!("  {} = {} ({})\n", stat.name, e, stat.decimal)),
            None => s.push_str(&format!("  {} = {}\n", stat.name, stat.decimal)),
        }
    }
    for w in &report.witnesses {
        s.push_str(&format!("  witness [{}]: {:?}\n", w.label, w.points));
    }
    s.push_str(if report.passed { "passed\n" } else { "FAILED\n" });
    s
}

fn probe_rendered(report: ProbeReport) -> Rendered {
    let violation = !report.passed;
    Rendered::new(probe_json(&report), probe_table(&report)).with_violation(violation)
}

fn cone_function(spec: &str, geom: Option<&SurfaceGeometry>) -> Result<ConeFunction> {
    if spec == "vol" {
        let geom = geom.ok_or_else(|| anyhow!("--fn vol requires --geom"))?;
        return Ok(ConeFunction::vol_on_big(geom));
    }
    if let Some(rest) = spec.strip_prefix("monomial:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            bail!("monomial spec must be `monomial:a,b`");
        }
        let a: u32 = parts[0].trim().parse().context("monomial exponent")?;
        let b: u32 = parts[1].trim().parse().context("monomial exponent")?;
        return Ok(ConeFunction::monomial(a, b));
    }
    if let Some(rest) = spec.strip_prefix("linear:") {
        let coeffs = parse_rat_list(rest, "linear coefficient")?;
        if coeffs.len() != 2 {
            bail!("linear spec must be `linear:p,q`");
        }
        return Ok(ConeFunction::linear_form(
            coeffs[0].clone(),
            coeffs[1].clone(),
        ));
    }
    bail!("unknown cone function `{spec}`; use vol, monomial:a,b, or linear:p,q")
}

fn quadrature_json(q: &QuadratureResult) -> serde_json::Value {
    serde_json::json!({
        "value": match &q.exact {
            Some(e) => rational_value(e),
            None => float_value(q.value),
        },
        "scheme": match q.scheme {
            QuadratureScheme::ExactPiecewise => "exact-piecewise",
            QuadratureScheme::AdaptiveSimpson => "adaptive-simpson",
        },
        "error_bound": float_value(q.error_bound),
        "subdivision": q.subdivision.iter().map(rational_value).collect::<Vec<_>>(),
    })
}

fn quadrature_text(q: &QuadratureResult) -> String {
    match &q.exact {
        Some(e) => format!("{} [exact-piecewise]", rational_text(e)),
        None => format!(
            "{:.12} [adaptive-simpson, error <= {:.2e}]",
            q.value, q.error_bound
        ),
    }
}

fn base_class_arg(model_base: &str, geom: Option<&SurfaceGeometry>, s: &str) -> Result<BaseClass> {
    if model_base == "p1" {
        Ok(BaseClass::Degree(parse_rat_arg(s, "degree")?))
    } else {
        let geom = geom.expect("surface base resolved");
        Ok(BaseClass::Class(
            parse_class(s, geom).map_err(|e| anyhow!("class `{s}`: {e}"))?,
        ))
    }
}

fn build_model(args: &WolfeBaseArgs) -> Result<(BundleModel, Option<SurfaceGeometry>)> {
    if args.base == "p1" {
        let deg = parse_rat_arg(&args.ample, "ample degree")?;
        if !deg.is_integer() {
            bail!("line-base ample degree must be a positive integer");
        }
        let deg = i64::try_from(deg.to_integer()).context("ample degree range")?;
        let d = parse_rat_arg(&args.d, "degree of D")?;
        Ok((BundleModel::over_line(deg, d)?, None))
    } else {
        let geom = resolve_geometry(&args.base)?;
        let ample = parse_class(&args.ample, &geom).map_err(|e| anyhow!("--A: {e}"))?;
        let d = parse_class(&args.d, &geom).map_err(|e| anyhow!("--D: {e}"))?;
        Ok((BundleModel::over_surface(&geom, ample, d)?, Some(geom)))
    }
}

fn run(cli: &Cli) -> Result<(String, BTreeMap<String, String>, Rendered)> {
    let mut config = BTreeMap::new();
    match &cli.command {
        Command::Geom { cmd } => match cmd {
            GeomCmd::List => {
                let mut rows = Vec::new();
                let mut table = String::from("name        rank  basis\n");
                for name in builtin_names() {
                    let g = builtin_geometry(&name).unwrap();
                    table.push_str(&format!(
                        "{name:<12}{:<6}{}\n",
                        g.rank(),
                        g.basis_labels().join(",")
                    ));
                    rows.push(serde_json::json!({
                        "name": name,
                        "rank": g.rank(),
                        "basis": g.basis_labels(),
                        "curves": g.curve_count(),
                    }));
                }
                table.push_str("(hirzebruch_E accepts any integer E >= 0)\n");
                table.push_str(&format!(
                    "toric models: {}\n",
                    builtin_toric_names().join(", ")
                ));
                Ok((
                    "geom list".into(),
                    config,
                    Rendered::new(serde_json::json!(rows), table),
                ))
            }
            GeomCmd::Show { geom } => {
                config.insert("geom".into(), geom.clone());
                let g = resolve_geometry(geom)?;
                let doc = serde_json::to_value(save_geometry(&g)).expect("document");
                let table = geometry_to_json(&g) + "\n";
                Ok(("geom show".into(), config, Rendered::new(doc, table)))
            }
            GeomCmd::Check { geom } => {
                config.insert("geom".into(), geom.clone());
                match resolve_geometry(geom) {
                    Ok(g) => {
                        let result = serde_json::json!({
                            "name": g.name(),
                            "rank": g.rank(),
                            "signature_ok": true,
                            "negative_curves": g.curve_count(),
                            "nef_duals": g.nef_duals().map_or(0, |d| d.len()),
                            "ok": true,
                        });
                        let table = format!(
                            "{}: ok (rank {}, {} catalog curves, {} nef duals)\n",
                            g.name(),
                            g.rank(),
                            g.curve_count(),
                            g.nef_duals().map_or(0, |d| d.len())
                        );
                        Ok(("geom check".into(), config, Rendered::new(result, table)))
                    }
                    Err(e) => {
                        let result = serde_json::json!({ "ok": false, "error": e.to_string() });
                        let table = format!("invalid geometry: {e}\n");
                        Ok((
                            "geom check".into(),
                            config,
                            Rendered::new(result, table).with_violation(true),
                        ))
                    }
                }
            }
        },
        Command::Zariski(args) => {
            config.insert("geom".into(), args.geom.clone());
            config.insert("class".into(), args.class.clone());
            let g = resolve_geometry(&args.geom)?;
            let d = parse_class(&args.class, &g).map_err(|e| anyhow!("--class: {e}"))?;
            match zariski_decompose(&d) {
                Ok(z) => {
                    let volume = z.positive_square();
                    let coeffs: Vec<serde_json::Value> =
                        z.negative_coeffs().iter().map(rational_value).collect();
                    let coords = |c: &DivisorClass| -> Vec<serde_json::Value> {
                        c.coords().iter().map(rational_value).collect()
                    };
                    let result = serde_json::json!({
                        "input": d.to_string(),
                        "positive": z.positive().to_string(),
                        "positive_coords": coords(z.positive()),
                        "negative": z.negative_class().to_string(),
                        "negative_coords": coords(&z.negative_class()),
                        "coefficients": coeffs,
                        "support": z.support(),
                        "vol": rational_value(&volume),
                    });
                    let table = format!(
                        "D = {d}\nP = {}\nN = {}\nsupport = {:?}\nvol = {}\n",
                        z.positive(),
                        z.negative_class(),
                        z.support(),
                        rational_text(&volume)
                    );
                    Ok(("zariski".into(), config, Rendered::new(result, table)))
                }
                Err(ZariskiError::NotPseudoEffective) => {
                    let result = serde_json::json!({
                        "input": d.to_string(),
                        "pseudo_effective": false,
                        "vol": rational_value(&Rat::from_integer(0.into())),
                    });
                    let table = format!(
                        "D = {d}\nnot pseudo-effective relative to the catalog; vol = 0\n"
                    );
                    Ok(("zariski".into(), config, Rendered::new(result, table)))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Vol(args) => {
            config.insert("geom".into(), args.geom.clone());
            config.insert("class".into(), args.class.clone());
            let g = resolve_geometry(&args.geom)?;
            let d = parse_class(&args.class, &g).map_err(|e| anyhow!("--class: {e}"))?;
            let v = vol(&d)?;
            let result = serde_json::json!({
                "class": d.to_string(),
                "vol": rational_value(&v),
            });
            let table = format!("vol({d}) = {}\n", rational_text(&v));
            Ok(("vol".into(), config, Rendered::new(result, table)))
        }
        Command::Grad(args) => {
            config.insert("geom".into(), args.geom.clone());
            config.insert("class".into(), args.class.clone());
            let g = resolve_geometry(&args.geom)?;
            let d = parse_class(&args.class, &g).map_err(|e| anyhow!("--class: {e}"))?;
            let grad = grad_vol(&d)?;
            let coords: Vec<serde_json::Value> =
                grad.coords().iter().map(rational_value).collect();
            let result = serde_json::json!({
                "class": d.to_string(),
                "gradient": coords,
                "basis": g.basis_labels(),
            });
            let mut table = format!("grad vol at {d}:\n");
            for (label, c) in g.basis_labels().iter().zip(grad.coords()) {
                table.push_str(&format!("  d/d{label} = {}\n", rational_text(c)));
            }
            Ok(("grad".into(), config, Rendered::new(result, table)))
        }
        Command::Profile(args) => {
            config.insert("geom".into(), args.geom.clone());
            config.insert("class".into(), args.class.clone());
            config.insert("dir".into(), args.dir.clone());
            config.insert("t0".into(), args.t0.clone());
            config.insert("t1".into(), args.t1.clone());
            config.insert("steps".into(), args.steps.to_string());
            let g = resolve_geometry(&args.geom)?;
            let alpha = parse_class(&args.class, &g).map_err(|e| anyhow!("--class: {e}"))?;
            let beta = parse_class(&args.dir, &g).map_err(|e| anyhow!("--dir: {e}"))?;
            let t0 = parse_rat_arg(&args.t0, "t0")?;
            let t1 = parse_rat_arg(&args.t1, "t1")?;
            if args.steps == 0 || t0 >= t1 {
                bail!("need steps >= 1 and t0 < t1");
            }
            let grid: Vec<Rat> = (0..=args.steps)
                .map(|k| &t0 + (&t1 - &t0) * rat_int(k as i64) / rat_int(args.steps as i64))
                .collect();
            let profile = segment_profile(&alpha, &beta, &grid)?;
            let rows: Vec<serde_json::Value> = profile
                .rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "t": rational_value(&r.t),
                        "vol": rational_value(&r.volume),
                        "derivative": r.derivative.as_ref().map(rational_value),
                        "chamber": r.chamber,
                    })
                })
                .collect();
            let mut table =
                String::from("t              vol            d/dt           chamber\n");
            let mut csv = String::from("t,vol,derivative,chamber\n");
            for r in &profile.rows {
                table.push_str(&format!(
                    "{:<15}{:<15}{:<15}{}\n",
                    fmt_rat(&r.t),
                    fmt_rat(&r.volume),
                    r.derivative.as_ref().map_or("-".into(), fmt_rat),
                    r.chamber
                ));
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_rat(&r.t),
                    fmt_rat(&r.volume),
                    r.derivative.as_ref().map_or(String::new(), fmt_rat),
                    r.chamber
                ));
            }
            Ok((
                "profile".into(),
                config,
                Rendered::new(serde_json::json!(rows), table).with_csv(csv),
            ))
        }
        Command::Chambers(args) => {
            config.insert("geom".into(), args.geom.clone());
            config.insert("class".into(), args.class.clone());
            config.insert("dir".into(), args.dir.clone());
            config.insert("t0".into(), args.t0.clone());
            config.insert("t1".into(), args.t1.clone());
            let g = resolve_geometry(&args.geom)?;
            let alpha = parse_class(&args.class, &g).map_err(|e| anyhow!("--class: {e}"))?;
            let beta = parse_class(&args.dir, &g).map_err(|e| anyhow!("--dir: {e}"))?;
            let t0 = parse_rat_arg(&args.t0, "t0")?;
            let t1 = parse_rat_arg(&args.t1, "t1")?;
            let report = chamber_scan(&alpha, &beta, &t0, &t1)?;
            let chambers: Vec<serde_json::Value> = report
                .chambers
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "from": rational_value(&c.lo),
                        "to": rational_value(&c.hi),
                        "support": c.support,
                        "poly": c.poly.iter().map(rational_value).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let walls: Vec<serde_json::Value> = report
                .walls
                .iter()
                .map(|w| {
                    serde_json::json!({
                        "t": rational_value(&w.t),
                        "kind": match &w.kind {
                            WallKind::SupportChange { gained, lost } =>
                                serde_json::json!({"support_change": {"gained": gained, "lost": lost}}),
                            WallKind::VolumeBoundary => serde_json::json!("volume-boundary"),
                        },
                        "value": rational_value(&w.value_left),
                        "derivative_left": rational_value(&w.derivative_left),
                        "derivative_right": rational_value(&w.derivative_right),
                        "c1_matched": w.c1_matched,
                        "second_derivative_jump": rational_value(&w.second_derivative_jump),
                    })
                })
                .collect();
            let mut table = String::new();
            let mut csv = String::from("from,to,support,c0,c1,c2\n");
            for c in &report.chambers {
                table.push_str(&format!(
                    "[{}, {}]  support {:?}  vol = {} + {} t + {} t^2\n",
                    fmt_rat(&c.lo),
                    fmt_rat(&c.hi),
                    c.support,
                    fmt_rat(&c.poly[0]),
                    fmt_rat(&c.poly[1]),
                    fmt_rat(&c.poly[2]),
                ));
                csv.push_str(&format!(
                    "{},{},{:?},{},{},{}\n",
                    fmt_rat(&c.lo),
                    fmt_rat(&c.hi),
                    c.support.clone().unwrap_or_default(),
                    fmt_rat(&c.poly[0]),
                    fmt_rat(&c.poly[1]),
                    fmt_rat(&c.poly[2]),
                ));
            }
            for w in &report.walls {
                table.push_str(&format!(
                    "wall at t = {}: {:?}, value {}, d/dt {} | {}, C1 match: {}\n",
                    fmt_rat(&w.t),
                    w.kind,
                    fmt_rat(&w.value_left),
                    fmt_rat(&w.derivative_left),
                    fmt_rat(&w.derivative_right),
                    w.c1_matched
                ));
            }
            Ok((
                "chambers".into(),
                config,
                Rendered::new(
                    serde_json::json!({"chambers": chambers, "walls": walls}),
                    table,
                )
                .with_csv(csv),
            ))
        }
        Command::Oracle { cmd } => match cmd {
            OracleCmd::Count { toric, coeffs, m } => {
                config.insert("toric".into(), toric.clone());
                config.insert("coeffs".into(), coeffs.clone());
                config.insert("m".into(), m.to_string());
                let t = builtin_toric(toric)?;
                let a = parse_rat_list(coeffs, "ray coefficient")?;
                let count = t.count_sections(&a, *m)?;
                let class = t.class_of(&a)?;
                let result = serde_json::json!({
                    "class": class.to_string(),
                    "m": m,
                    "count": count,
                });
                let table = format!("sections({class}, m={m}) = {count}\n");
                Ok(("oracle count".into(), config, Rendered::new(result, table)))
            }
            OracleCmd::Volume { toric, coeffs, m } => {
                config.insert("toric".into(), toric.clone());
                config.insert("coeffs".into(), coeffs.clone());
                if let Some(m) = m {
                    config.insert("m".into(), m.to_string());
                }
                let t = builtin_toric(toric)?;
                let a = parse_rat_list(coeffs, "ray coefficient")?;
                let exact = t.volume_exact(&a)?;
                let class = t.class_of(&a)?;
                let mut result = serde_json::json!({
                    "class": class.to_string(),
                    "volume_exact": rational_value(&exact),
                });
                let mut table = format!(
                    "class {class}\nvolume (2 x polygon area) = {}\n",
                    rational_text(&exact)
                );
                if let Some(m) = m {
                    let est = t.volume_empirical(&a, *m)?;
                    result["volume_empirical"] = float_value(est);
                    table.push_str(&format!("count-based estimate at m = {m}: {est:.8}\n"));
                }
                Ok((
                    "oracle volume".into(),
                    config,
                    Rendered::new(result, table),
                ))
            }
        },
        Command::Probe { cmd } => match cmd {
            ProbeCmd::Concavity {
                geom,
                function,
                exponent,
                sample_box,
                samples,
            } => {
                config.insert("geom".into(), geom.clone());
                config.insert("fn".into(), function.clone());
                config.insert("exponent".into(), exponent.clone());
                config.insert("samples".into(), samples.to_string());
                let g = resolve_geometry(geom)?;
                let f = if function == "vol" {
                    ConeScalar::Vol
                } else if let Some(cls) = function.strip_prefix("dual:") {
                    ConeScalar::DualPairing(
                        parse_class(cls, &g).map_err(|e| anyhow!("--fn dual: {e}"))?,
                    )
                } else {
                    bail!("--fn must be `vol` or `dual:<CLASS>`");
                };
                let e = parse_rat_arg(exponent, "exponent")?;
                let region = match sample_box {
                    Some(spec) => {
                        config.insert("box".into(), spec.clone());
                        SampleBox::parse(spec)?
                    }
                    None => {
                        let b = sample::default_box(&g);
                        config.insert("box".into(), b.describe());
                        b
                    }
                };
                let report = concavity_check(&g, &f, &e, &region, *samples, cli.seed)?;
                Ok(("probe concavity".into(), config, probe_rendered(report)))
            }
            ProbeCmd::Kt { geom, samples } => {
                config.insert("geom".into(), geom.clone());
                config.insert("samples".into(), samples.to_string());
                let g = resolve_geometry(geom)?;
                let report = kt_probe(&g, *samples, cli.seed)?;
                Ok(("probe kt".into(), config, probe_rendered(report)))
            }
            ProbeCmd::Hessian {
                geom,
                class,
                line,
                dir1,
                dir2,
                grid_from,
                grid_to,
                grid_steps,
                step,
            } => {
                config.insert("geom".into(), geom.clone());
                config.insert("class".into(), class.clone());
                config.insert("line".into(), line.clone());
                config.insert("dir1".into(), dir1.clone());
                config.insert("dir2".into(), dir2.clone());
                config.insert(
                    "grid".into(),
                    format!("{grid_from}..{grid_to}/{grid_steps}"),
                );
                config.insert("step".into(), step.clone());
                let g = resolve_geometry(geom)?;
                let base = parse_class(class, &g).map_err(|e| anyhow!("--class: {e}"))?;
                let line = parse_class(line, &g).map_err(|e| anyhow!("--line: {e}"))?;
                let d1 = parse_class(dir1, &g).map_err(|e| anyhow!("--dir1: {e}"))?;
                let d2 = parse_class(dir2, &g).map_err(|e| anyhow!("--dir2: {e}"))?;
                let from = parse_rat_arg(grid_from, "grid-from")?;
                let to = parse_rat_arg(grid_to, "grid-to")?;
                if *grid_steps == 0 || from >= to {
                    bail!("need grid-steps >= 1 and grid-from < grid-to");
                }
                let grid: Vec<Rat> = (0..=*grid_steps)
                    .map(|k| {
                        &from + (&to - &from) * rat_int(k as i64) / rat_int(*grid_steps as i64)
                    })
                    .collect();
                let h = parse_rat_arg(step, "step")?;
                let report = hessian_probe(&base, &line, &grid, &d1, &d2, &h)?;
                Ok(("probe hessian".into(), config, probe_rendered(report)))
            }
            ProbeCmd::Lipschitz {
                geom,
                sample_box,
                pairs,
                bound,
            } => {
                config.insert("geom".into(), geom.clone());
                config.insert("box".into(), sample_box.clone());
                config.insert("pairs".into(), pairs.to_string());
                let g = resolve_geometry(geom)?;
                let region = SampleBox::parse(sample_box)?;
                let bound_rat = bound
                    .as_ref()
                    .map(|b| {
                        config.insert("bound".into(), b.clone());
                        parse_rat_arg(b, "bound")
                    })
                    .transpose()?;
                let report = lipschitz_gradient_estimate(
                    &g,
                    &region,
                    *pairs,
                    cli.seed,
                    bound_rat.as_ref(),
                )?;
                Ok(("probe lipschitz".into(), config, probe_rendered(report)))
            }
            ProbeCmd::Boundary {
                geom,
                class,
                dirs,
                samples,
                radius,
                bound,
            } => {
                config.insert("geom".into(), geom.clone());
                config.insert("class".into(), class.clone());
                config.insert("samples".into(), samples.to_string());
                config.insert("radius".into(), radius.clone());
                let g = resolve_geometry(geom)?;
                let alpha = parse_class(class, &g).map_err(|e| anyhow!("--class: {e}"))?;
                let directions: Vec<DivisorClass> = match dirs {
                    Some(spec) => {
                        config.insert("dirs".into(), spec.clone());
                        spec.split(';')
                            .map(|s| parse_class(s, &g).map_err(|e| anyhow!("--dirs: {e}")))
                            .collect::<Result<_>>()?
                    }
                    None => vec![],
                };
                let r = parse_rat_arg(radius, "radius")?;
                let bound_rat = bound
                    .as_ref()
                    .map(|b| {
                        config.insert("bound".into(), b.clone());
                        parse_rat_arg(b, "bound")
                    })
                    .transpose()?;
                let report = boundary_lipschitz_probe(
                    &alpha,
                    &directions,
                    *samples,
                    cli.seed,
                    &r,
                    bound_rat.as_ref(),
                )?;
                Ok(("probe boundary".into(), config, probe_rendered(report)))
            }
        },
        Command::Lipschitz { cmd } => {
            let (certify, fuzz) = match cmd {
                LipschitzCmd::Certify(c) => (c, None),
                LipschitzCmd::Fuzz {
                    certify,
                    pairs,
                    chain_samples,
                } => (certify, Some((*pairs, *chain_samples))),
            };
            config.insert("fn".into(), certify.function.clone());
            config.insert("center".into(), certify.center.clone());
            config.insert("eps".into(), certify.eps.clone());
            let geom = certify
                .geom
                .as_ref()
                .map(|s| {
                    config.insert("geom".into(), s.clone());
                    resolve_geometry(s)
                })
                .transpose()?;
            let f = cone_function(&certify.function, geom.as_ref())?;
            let center = parse_rat_list(&certify.center, "center coordinate")?;
            if center.len() != f.dimension {
                bail!(
                    "center has {} coordinates, function dimension is {}",
                    center.len(),
                    f.dimension
                );
            }
            let eps = parse_rat_arg(&certify.eps, "eps")?;
            let basis = match &certify.basis {
                Some(spec) => {
                    config.insert("basis".into(), spec.clone());
                    parse_basis(spec, f.dimension)?
                }
                None => (0..f.dimension)
                    .map(|i| {
                        (0..f.dimension)
                            .map(|j| if i == j { rat_int(1) } else { rat_int(0) })
                            .collect()
                    })
                    .collect(),
            };
            let cert = match &certify.sup {
                Some(s) => {
                    config.insert("sup".into(), s.clone());
                    let sup = parse_rat_arg(s, "sup")?;
                    lipschitz_certificate_with_sup(&f, &center, &eps, &basis, &sup)?
                }
                None => lipschitz_certificate(
                    &f,
                    &center,
                    &eps,
                    &basis,
                    certify.sup_samples,
                    cli.seed,
                )?,
            };
            let region = SampleBox::new(
                center
                    .iter()
                    .map(|c| (c - rat(1, 8), c + rat(1, 8)))
                    .collect(),
            );
            let axioms = verify_axioms(&f, &region, 500, cli.seed)?;
            let cert_json = serde_json::json!({
                "function": f.label,
                "degree": fmt_rat(&f.degree),
                "epsilon": rational_value(&cert.epsilon),
                "sup_u": float_value(cert.sup_u),
                "sup_exact": cert.sup_exact.as_ref().map(rational_value),
                "constant": float_value(cert.constant),
                "validity_radius": rational_value(&cert.validity_radius),
                "axioms": probe_json(&axioms),
            });
            let mut table = format!(
                "{}: degree {}, eps {}\nsup_U = {:.12}\nL = (2^d/eps) * sup * 1.05 = {:.12}\nvalid on the basis-norm ball of radius {}\naxioms: {}\n",
                f.label,
                fmt_rat(&f.degree),
                fmt_rat(&cert.epsilon),
                cert.sup_u,
                cert.constant,
                fmt_rat(&cert.validity_radius),
                if axioms.passed { "passed" } else { "FAILED" }
            );
            let mut violation = !axioms.passed;
            match fuzz {
                None => Ok((
                    "lipschitz certify".into(),
                    config,
                    Rendered::new(cert_json, table).with_violation(violation),
                )),
                Some((pairs, chain_samples)) => {
                    config.insert("pairs".into(), pairs.to_string());
                    let emp = empirical_lipschitz(&f, &cert, pairs, cli.seed)?;
                    let chain = chain_inequality_check(&f, &cert, chain_samples, cli.seed)?;
                    violation |= !emp.passed || !chain.passed;
                    table.push_str(&probe_table(&emp));
                    table.push_str(&probe_table(&chain));
                    let result = serde_json::json!({
                        "certificate": cert_json,
                        "empirical": probe_json(&emp),
                        "chain": probe_json(&chain),
                    });
                    Ok((
                        "lipschitz fuzz".into(),
                        config,
                        Rendered::new(result, table).with_violation(violation),
                    ))
                }
            }
        }
        Command::Wolfe { cmd } => match cmd {
            WolfeCmd::Calibrate { base, ample, tests } => {
                config.insert("base".into(), base.clone());
                config.insert("A".into(), ample.clone());
                if base != "p1" {
                    bail!(
                        "calibration needs the line base (the independent oracle exists only there)"
                    );
                }
                let deg_rat = parse_rat_arg(ample, "ample degree")?;
                if !deg_rat.is_integer() {
                    bail!("ample degree must be a positive integer");
                }
                let deg = i64::try_from(deg_rat.to_integer()).context("ample degree range")?;
                let test_degrees = match tests {
                    Some(t) => {
                        config.insert("tests".into(), t.clone());
                        parse_rat_list(t, "test degree")?
                    }
                    None => (0..10).map(rat_int).collect(),
                };
                let kappa = calibrate_line(deg, &test_degrees)?;
                let result = serde_json::json!({
                    "kappa": rational_value(&kappa),
                    "test_classes": test_degrees.len(),
                });
                let table = format!(
                    "kappa_1 = {} (consistent across {} test classes)\n",
                    rational_text(&kappa),
                    test_degrees.len()
                );
                Ok((
                    "wolfe calibrate".into(),
                    config,
                    Rendered::new(result, table),
                ))
            }
            WolfeCmd::Vol { base, e } => {
                config.insert("base".into(), base.base.clone());
                config.insert("A".into(), base.ample.clone());
                config.insert("D".into(), base.d.clone());
                let (model, geom) = build_model(base)?;
                let e_class = match e {
                    Some(spec) => {
                        config.insert("E".into(), spec.clone());
                        base_class_arg(&base.base, geom.as_ref(), spec)?
                    }
                    None => model.d_class(),
                };
                let q = wolfe_vol(&model, &e_class)?;
                let result = serde_json::json!({
                    "base": model.base_label(),
                    "kappa": rational_value(model.kappa()),
                    "vol": quadrature_json(&q),
                });
                let table = format!(
                    "base {} (kappa = {})\nVol_X(xi + pi*E) = {}\n",
                    model.base_label(),
                    fmt_rat(model.kappa()),
                    quadrature_text(&q)
                );
                Ok(("wolfe vol".into(), config, Rendered::new(result, table)))
            }
            WolfeCmd::Segment {
                base,
                t,
                minus,
                transfer,
            } => {
                config.insert("base".into(), base.base.clone());
                config.insert("A".into(), base.ample.clone());
                config.insert("D".into(), base.d.clone());
                config.insert("t".into(), t.clone());
                config.insert("minus".into(), minus.to_string());
                let (model, _geom) = build_model(base)?;
                let t_val = parse_rat_arg(t, "t")?;
                if *transfer {
                    config.insert("transfer".into(), "true".into());
                    let steps = 12i64;
                    let ts: Vec<Rat> = (0..=steps)
                        .map(|k| &t_val * rat_int(k) / rat_int(steps))
                        .collect();
                    let rep = transfer_regularity_report(&model, &ts)?;
                    let rows: Vec<serde_json::Value> = rep
                        .rows
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "t": rational_value(&r.t),
                                "value": quadrature_json(&r.value),
                                "derivative": rational_value(&r.derivative),
                                "second_derivative_fd": rational_value(&r.second_derivative_fd),
                            })
                        })
                        .collect();
                    let walls: Vec<serde_json::Value> = rep
                        .walls
                        .iter()
                        .map(|w| {
                            serde_json::json!({
                                "t": rational_value(&w.t),
                                "base_u": rational_value(&w.base_u),
                                "via_upper_endpoint": w.via_upper_endpoint,
                                "interior": w.interior,
                                "base_derivative_jump": rational_value(&w.base_derivative_jump),
                                "base_second_derivative_jump":
                                    rational_value(&w.base_second_derivative_jump),
                                "bundle_second_derivative_jump":
                                    rational_value(&w.bundle_second_derivative_jump),
                                "bundle_third_derivative_jump":
                                    rational_value(&w.bundle_third_derivative_jump),
                            })
                        })
                        .collect();
                    let mut table =
                        String::from("t         value         d/dt        d2/dt2 (FD)\n");
                    for r in &rep.rows {
                        table.push_str(&format!(
                            "{:<10}{:<14}{:<12}{}\n",
                            fmt_rat(&r.t),
                            quadrature_text(&r.value),
                            fmt_rat(&r.derivative),
                            fmt_rat(&r.second_derivative_fd)
                        ));
                    }
                    for w in &rep.walls {
                        table.push_str(&format!(
                            "wall at t = {} (base u = {}{}): base d'/d'' jumps {} / {}, bundle d''/d''' jumps {} / {}\n",
                            fmt_rat(&w.t),
                            fmt_rat(&w.base_u),
                            if w.interior { "" } else { ", range edge" },
                            fmt_rat(&w.base_derivative_jump),
                            fmt_rat(&w.base_second_derivative_jump),
                            fmt_rat(&w.bundle_second_derivative_jump),
                            fmt_rat(&w.bundle_third_derivative_jump)
                        ));
                    }
                    table.push_str(if rep.c2_on_open_range {
                        "bundle segment is C^2 on the open range (one derivative above the base)\n"
                    } else {
                        "bundle second-derivative jumps recorded at interior walls\n"
                    });
                    let result = serde_json::json!({
                        "rows": rows,
                        "walls": walls,
                        "c2_on_open_range": rep.c2_on_open_range,
                    });
                    return Ok((
                        "wolfe segment".into(),
                        config,
                        Rendered::new(result, table),
                    ));
                }
                let (value, derivative) = if *minus {
                    (
                        segment_minus(&model, &t_val)?,
                        segment_minus_derivative(&model, &t_val)?,
                    )
                } else {
                    (
                        segment_plus(&model, &t_val)?,
                        segment_plus_derivative(&model, &t_val)?,
                    )
                };
                let sign = if *minus { "-" } else { "+" };
                let result = serde_json::json!({
                    "base": model.base_label(),
                    "kappa": rational_value(model.kappa()),
                    "direction": sign,
                    "t": rational_value(&t_val),
                    "value": quadrature_json(&value),
                    "derivative": rational_value(&derivative),
                });
                let table = format!(
                    "Vol_X(alpha {sign} t omega) at t = {}: {}\nclosed-form derivative: {}\n",
                    fmt_rat(&t_val),
                    quadrature_text(&value),
                    rational_text(&derivative)
                );
                Ok((
                    "wolfe segment".into(),
                    config,
                    Rendered::new(result, table),
                ))
            }
        },
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok((command, config, rendered)) => {
            match output::emit(
                cli.format,
                cli.out.as_deref(),
                &command,
                config,
                cli.seed,
                rendered,
            ) {
                Ok(code) => std::process::ExitCode::from(code),
                Err(e) => {
                    eprintln!("error: {e}");
                    std::process::ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(2)
        }
    }
}
