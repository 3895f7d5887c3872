//! Command-line front end: condition checks, one-off index computations,
//! and the two-sided verification driver over scenario suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use shift_index::error::Error;
use shift_index::fredholm::model_euler_index;
use shift_index::geometry::ManifoldModel;
use shift_index::group::{
    diophantine_check, growth_check, DiophantineResult, GroupLaw, IsometryGroup, RigidMotion,
};
use shift_index::scenario::{
    analytic_side, build_group, build_symbol, manifold_kind, parse_scenario, parse_suite,
    report_csv, report_json, topological_side, verify_suite, AngleSpec, Scenario,
    SuiteReport,
};
use shift_index::symbol::InvertOptions;

#[derive(Parser)]
#[command(
    name = "shift-index",
    about = "Two-sided verification of the index theorem for elliptic operators with shifts"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Args)]
struct ScenarioOverrides {
    /// Carrier resolution override.
    #[arg(long)]
    resolution: Option<usize>,
    /// Truncation schedule override, e.g. 64,128,256.
    #[arg(long, value_delimiter = ',')]
    truncations: Option<Vec<i64>>,
    /// Word-length cutoff override for the topological series.
    #[arg(long)]
    shell_max: Option<u64>,
    /// Tolerance override for symbol inversion.
    #[arg(long)]
    tol: Option<f64>,
}

impl ScenarioOverrides {
    fn apply(&self, s: &mut Scenario) {
        if let Some(r) = self.resolution {
            s.resolution = r;
        }
        if let Some(t) = &self.truncations {
            s.truncations = t.clone();
        }
        if let Some(m) = self.shell_max {
            s.shell_max = m;
        }
        if let Some(t) = self.tol {
            s.tolerances.invert = t;
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Growth and Diophantine condition checks for a group declaration.
    CheckGroup {
        /// circle | torus2 | sphere_circle
        #[arg(long, default_value = "circle")]
        manifold: String,
        /// trivial | free:<rank> | cyclic:<order>
        #[arg(long, default_value = "free:1")]
        law: String,
        /// golden | liouville6 | near-liouville | value:<radians> |
        /// rational:<p>/<q> (one per generator)
        #[arg(long = "angle")]
        angles: Vec<String>,
        /// Word-length range for the Diophantine envelope.
        #[arg(long, default_value_t = 48)]
        g_range: u64,
        /// Dyadic radius for the growth estimate.
        #[arg(long, default_value_t = 32)]
        growth_kmax: u64,
    },
    /// Invert the symbol of a scenario file and report residual and decay.
    InvertSymbol {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: ScenarioOverrides,
    },
    /// Finite-section index estimate for a scenario file.
    AnalyticIndex {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: ScenarioOverrides,
    },
    /// Index-formula evaluation for a scenario file.
    TopologicalIndex {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: ScenarioOverrides,
    },
    /// The noncompact model operator x + d/dx.
    ModelEuler {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        truncations: Vec<i64>,
    },
    /// Run a scenario suite two-sided and emit reports.
    Verify {
        suite: PathBuf,
        /// Seed recorded in the report (randomized property tests live in
        /// the test suite; the driver itself is deterministic).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// json | csv (default: both)
        #[arg(long)]
        format: Option<String>,
        /// Output directory for report files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-emit a previously written JSON report in another format.
    Report {
        input: PathBuf,
        /// json | csv (default: csv)
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn parse_law(text: &str) -> Result<GroupLaw, Error> {
    if text == "trivial" {
        return Ok(GroupLaw::FreeAbelian { rank: 0 });
    }
    if let Some(rank) = text.strip_prefix("free:") {
        let rank: usize = rank
            .parse()
            .map_err(|_| Error::ParseError(format!("bad rank in law {text:?}")))?;
        return Ok(GroupLaw::FreeAbelian { rank });
    }
    if let Some(order) = text.strip_prefix("cyclic:") {
        let order: u64 = order
            .parse()
            .map_err(|_| Error::ParseError(format!("bad order in law {text:?}")))?;
        return Ok(GroupLaw::Cyclic { order });
    }
    Err(Error::ParseError(format!("unknown group law {text:?}")))
}

fn parse_angle(text: &str) -> Result<AngleSpec, Error> {
    match text {
        "golden" => return Ok(AngleSpec::Golden),
        "liouville6" => return Ok(AngleSpec::Liouville6),
        "near-liouville" => return Ok(AngleSpec::NearLiouville),
        _ => {}
    }
    if let Some(v) = text.strip_prefix("value:") {
        let radians: f64 = v
            .parse()
            .map_err(|_| Error::ParseError(format!("bad angle value {text:?}")))?;
        return Ok(AngleSpec::Value { radians });
    }
    if let Some(pq) = text.strip_prefix("rational:") {
        let (p, q) = pq
            .split_once('/')
            .ok_or_else(|| Error::ParseError(format!("bad rational angle {text:?}")))?;
        let p: i64 = p
            .parse()
            .map_err(|_| Error::ParseError(format!("bad rational angle {text:?}")))?;
        let q: i64 = q
            .parse()
            .map_err(|_| Error::ParseError(format!("bad rational angle {text:?}")))?;
        return Ok(AngleSpec::Rational { p, q });
    }
    Err(Error::ParseError(format!("unknown angle {text:?}")))
}

fn load_scenario(path: &Path, overrides: &ScenarioOverrides) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut s = parse_scenario(&text)?;
    overrides.apply(&mut s);
    Ok(s)
}

fn check_group(
    manifold: &str,
    law: &str,
    angles: &[String],
    g_range: u64,
    growth_kmax: u64,
) -> Result<(), Error> {
    let manifold = ManifoldModel::new(manifold_kind(manifold)?);
    let kind = manifold.kind;
    let law = parse_law(law)?;
    let motions = angles
        .iter()
        .map(|a| {
            let t = parse_angle(a)?.radians()?;
            Ok(match kind {
                shift_index::geometry::ManifoldKind::Circle => RigidMotion::circle_rotation(t),
                shift_index::geometry::ManifoldKind::Torus2 => {
                    RigidMotion::torus_translation(t, 0.0)
                }
                shift_index::geometry::ManifoldKind::SphereCrossCircle => {
                    RigidMotion::stretch_motion(t, 0.0)
                }
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let group: Arc<IsometryGroup> = if motions.is_empty() {
        IsometryGroup::trivial(manifold)
    } else {
        IsometryGroup::new(manifold, law, motions)?
    };
    let growth = growth_check(&group, growth_kmax);
    println!("growth_exponent: {:.4}", growth.exponent);
    println!("ball_counts: {:?}", growth.counts);
    if !group.generators.is_empty() {
        match diophantine_check(&group, g_range, 64)? {
            DiophantineResult::Fit { c, n, records } => {
                println!("diophantine: fit N={n} C={c:.4e} ({} records)", records.len());
            }
            DiophantineResult::Violation {
                worst_exponent,
                records,
            } => {
                println!(
                    "diophantine: violation worst_exponent={worst_exponent:.2} ({} records)",
                    records.len()
                );
            }
        }
    }
    Ok(())
}

fn invert_symbol(s: &Scenario) -> Result<(), Error> {
    let group = build_group(s)?;
    let sigma = build_symbol(s, &group)?;
    let opts = InvertOptions {
        tol: s.tolerances.invert,
        ..InvertOptions::default()
    };
    let inv = sigma.invert(&opts)?;
    println!("residual: {:.4e}", sigma.residual(&inv)?);
    println!("support_radius: {}", inv.support_radius());
    let profile = inv.decay_profile()?;
    println!("decay_exponent: {:.4}", profile.exponent);
    for (l, s) in &profile.shells {
        println!("shell {l}: {s:.6e}");
    }
    Ok(())
}

fn analytic_index(s: &Scenario) -> Result<(), Error> {
    let group = build_group(s)?;
    if matches!(s.kind, shift_index::scenario::ScenarioKind::ModelEuler) {
        return model_euler(&s.truncations);
    }
    let est = analytic_side(s, &group)?.expect("non-model scenario")?;
    println!("index: {}", est.index);
    println!("ker_dim: {} coker_dim: {}", est.ker_dim, est.coker_dim);
    println!("spectral_gap: {:.4e}", est.spectral_gap);
    for (size, svd, heat) in &est.plateau {
        println!("size {size}: svd={svd:?} heat={heat:?}");
    }
    Ok(())
}

fn topological_index(s: &Scenario) -> Result<(), Error> {
    let group = build_group(s)?;
    let report = topological_side(s, &group)?
        .ok_or_else(|| Error::ScenarioInvalid("topological side not applicable".into()))??;
    println!("total: {:.9} + {:.3e}i", report.total.re, report.total.im);
    println!(
        "nearest: {} (distance {:.3e})",
        report.nearest, report.distance
    );
    if let Some(d) = report.decay_exponent {
        println!("decay_exponent: {d:.4}");
    }
    for (l, v) in &report.shell_sums {
        println!("shell {l}: {:.6e}", v.re);
    }
    println!("empty_strata: {}", report.empty_strata);
    Ok(())
}

fn model_euler(truncations: &[i64]) -> Result<(), Error> {
    for &n in truncations {
        let r = model_euler_index(n as usize)?;
        println!(
            "N={n}: index={} ker={} coker={} overlap={:.12} supertrace_dev={:.3e}",
            r.index, r.kernel_dim, r.adjoint_kernel_dim, r.kernel_overlap, r.supertrace_deviation
        );
    }
    Ok(())
}

fn emit_report(
    report: &SuiteReport,
    format: Option<&str>,
    out: &Path,
) -> Result<(), Error> {
    std::fs::create_dir_all(out)?;
    let json = format.map_or(true, |f| f == "json");
    let csv = format.map_or(true, |f| f == "csv");
    if let Some(f) = format {
        if f != "json" && f != "csv" {
            return Err(Error::ParseError(format!("unknown format {f:?}")));
        }
    }
    if json {
        let path = out.join(format!("{}-report.json", report.suite));
        std::fs::write(&path, report_json(report))?;
        println!("wrote {}", path.display());
    }
    if csv {
        let path = out.join(format!("{}-report.csv", report.suite));
        std::fs::write(&path, report_csv(report))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn verify(suite: &Path, seed: u64, format: Option<&str>, out: &Path) -> Result<bool, Error> {
    let text = std::fs::read_to_string(suite)?;
    let suite = parse_suite(&text)?;
    let report = verify_suite(&suite, seed);
    for r in &report.results {
        println!(
            "{}: analytic={} topological={} agree={}",
            r.name,
            r.analytic.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            r.topological_rounded
                .map(|v| v.to_string())
                .unwrap_or_else(|| "-".into()),
            r.agree
        );
    }
    emit_report(&report, format, out)?;
    println!(
        "{}: {}",
        report.suite,
        if report.all_pass { "PASS" } else { "FAIL" }
    );
    Ok(report.all_pass)
}

fn run(cli: Cli) -> Result<bool, Error> {
    match &cli.cmd {
        Cmd::CheckGroup {
            manifold,
            law,
            angles,
            g_range,
            growth_kmax,
        } => {
            check_group(manifold, law, angles, *g_range, *growth_kmax)?;
            Ok(true)
        }
        Cmd::InvertSymbol {
            scenario,
            overrides,
        } => {
            invert_symbol(&load_scenario(scenario, overrides)?)?;
            Ok(true)
        }
        Cmd::AnalyticIndex {
            scenario,
            overrides,
        } => {
            analytic_index(&load_scenario(scenario, overrides)?)?;
            Ok(true)
        }
        Cmd::TopologicalIndex {
            scenario,
            overrides,
        } => {
            topological_index(&load_scenario(scenario, overrides)?)?;
            Ok(true)
        }
        Cmd::ModelEuler { truncations } => {
            model_euler(truncations)?;
            Ok(true)
        }
        Cmd::Verify {
            suite,
            seed,
            format,
            out,
        } => verify(suite, *seed, format.as_deref(), out),
        Cmd::Report { input, format, out } => {
            let text = std::fs::read_to_string(input)?;
            let report: SuiteReport = serde_json::from_str(&text)
                .map_err(|e| Error::ParseError(format!("report file: {e}")))?;
            emit_report(&report, Some(format), out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
