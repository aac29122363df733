//! Command-line front end: parse problem and certificate files, dispatch
//! to the certificate constructors, and report results deterministically.
//!
//! Exit codes: 0 found/verified, 1 failed/inconclusive, 2 parse error,
//! 3 resource cap.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use poscert::cert::{verify_module, verify_preorder, ModuleCert, SosPoly};
use poscert::format::{
    parse_cert, parse_directions, parse_intervals, parse_logpoly, parse_problem,
    serialize_cert, serialize_intervals, CertFile, CertPayload,
};
use poscert::noncompact::{
    eliminate_squares, is_putinar_1d, natural_generators, stability_degree_bound,
    stability_multipliers, triple_intersection_check, unimodular_cone_check,
    PutinarVerdict, TripleVerdict,
};
use poscert::poly::Polynomial;
use poscert::polya::{
    habicht_certificate, handelman_simplex, polya_exponent, SimplexSpec,
};
use poscert::putinar::{projective_putinar_search, putinar_search, PutinarError};

#[derive(Parser)]
#[command(name = "poscert", version, about = "Exact positivity certificates")]
struct Cli {
    /// Emit the run report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Exactly re-verify a certificate file.
    Verify { certfile: String },
    /// Find a Polya exponent for a homogeneous polynomial.
    Polya {
        polyfile: String,
        #[arg(long, default_value_t = 10)]
        max_n: u32,
    },
    /// Habicht denominator certificate for a positive definite form.
    Habicht {
        polyfile: String,
        #[arg(long, default_value_t = 10)]
        max_n: u32,
        #[arg(long, default_value_t = 20000)]
        cap: usize,
        /// Output prefix; writes <prefix>.num.cert and <prefix>.den.cert.
        #[arg(long, default_value = "habicht")]
        emit: String,
    },
    /// Handelman representation on the simplex cut out by the generators.
    Handelman {
        problemfile: String,
        #[arg(long, default_value_t = 10)]
        max_n: u32,
        #[arg(long)]
        emit: Option<String>,
    },
    /// Putinar-style quadratic module certificate search.
    Putinar {
        problemfile: String,
        #[arg(long)]
        emit: Option<String>,
    },
    /// Projective (homogeneous) variant of the Putinar search.
    Projective {
        problemfile: String,
        #[arg(long)]
        emit: Option<String>,
    },
    /// Natural generators of a closed interval union, e.g. "[0,1]u[2,inf)".
    Natgen { intervals: String },
    /// Stability multipliers for tentacle directions, e.g. "(0,1);(1,-1)".
    Stability {
        #[arg(long)]
        dirs: String,
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long, default_value_t = 20)]
        bound: u32,
    },
    /// Eliminate a squared variable from a module certificate.
    Desquare {
        certfile: String,
        #[arg(long)]
        var: String,
        #[arg(long, default_value = "desquared.cert")]
        emit: String,
    },
    /// Unimodularity and triple-intersection checks for a log polyhedron.
    Logpoly { file: String },
    /// Homogenize the target polynomial with a fresh first variable.
    Homogenize {
        polyfile: String,
        #[arg(long)]
        even: bool,
        #[arg(long, default_value = "z")]
        var: String,
    },
}

#[derive(Serialize)]
struct RunReport {
    verdict: String,
    certificate: Option<String>,
    timing_ms: u128,
    trace: Vec<String>,
    reason: Option<String>,
}

impl RunReport {
    fn new(verdict: &str) -> Self {
        RunReport {
            verdict: verdict.to_string(),
            certificate: None,
            timing_ms: 0,
            trace: Vec::new(),
            reason: None,
        }
    }
}

enum RunError {
    /// Exit 2: malformed input.
    Parse(String),
    /// Exit 1: a sound "no" or an honest inconclusive.
    Failed(String),
    /// Exit 3: a configured cap was hit before an answer.
    Cap(String),
}

impl From<poscert::format::FormatError> for RunError {
    fn from(e: poscert::format::FormatError) -> Self {
        RunError::Parse(e.to_string())
    }
}

impl From<PutinarError> for RunError {
    fn from(e: PutinarError) -> Self {
        match e {
            PutinarError::ResourceCap(m) => RunError::Cap(m),
            other => RunError::Failed(other.to_string()),
        }
    }
}

fn read(path: &str) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|e| RunError::Parse(format!("{path}: {e}")))
}

fn write_atomic(path: &str, contents: &str) -> Result<(), RunError> {
    let tmp = format!("{path}.tmp");
    fs::write(&tmp, contents).map_err(|e| RunError::Failed(format!("{path}: {e}")))?;
    fs::rename(&tmp, path).map_err(|e| RunError::Failed(format!("{path}: {e}")))
}

/// Global degree cap from the environment; inputs above it are refused.
fn max_degree_cap() -> Option<u32> {
    std::env::var("POSCERT_MAX_DEGREE").ok().and_then(|v| v.parse().ok())
}

fn check_degree_cap(polys: &[&Polynomial]) -> Result<(), RunError> {
    if let Some(cap) = max_degree_cap() {
        for p in polys {
            if p.degree().unwrap_or(0) > cap {
                return Err(RunError::Cap(format!(
                    "input degree exceeds POSCERT_MAX_DEGREE={cap}"
                )));
            }
        }
    }
    Ok(())
}

fn sos_cert_file(names: &[String], target: Polynomial, sos: SosPoly) -> CertFile {
    CertFile {
        names: names.to_vec(),
        generators: Vec::new(),
        payload: CertPayload::Module(ModuleCert {
            target,
            sigmas: vec![sos],
        }),
    }
}

fn run(verb: &Verb, report: &mut RunReport) -> Result<(), RunError> {
    match verb {
        Verb::Verify { certfile } => {
            let cf = parse_cert(&read(certfile)?)?;
            let set = cf.set();
            let outcome = match &cf.payload {
                CertPayload::Module(c) => verify_module(c, &set),
                CertPayload::Preorder(c) => verify_preorder(c, &set),
            };
            outcome.map_err(|e| RunError::Failed(e.to_string()))?;
            report.verdict = "verified".into();
            report.trace.push(format!("certificate {certfile} verifies exactly"));
        }
        Verb::Polya { polyfile, max_n } => {
            let pf = parse_problem(&read(polyfile)?)?;
            check_degree_cap(&[&pf.problem.target])?;
            let r = polya_exponent(&pf.problem.target, *max_n)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            report.verdict = "found".into();
            report.trace.push(format!("N = {}", r.n));
            report
                .trace
                .push(format!("product = {}", r.product.display(&pf.names)));
        }
        Verb::Habicht { polyfile, max_n, cap, emit } => {
            let pf = parse_problem(&read(polyfile)?)?;
            let f = &pf.problem.target;
            check_degree_cap(&[f])?;
            let cert = habicht_certificate(f, *max_n, *cap)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            let nvars = f.nvars();
            let mut den = cert.m2.clone();
            for (w, b) in &cert.r2.squares {
                den.push(w.clone(), b.clone());
            }
            let mut num = cert.m1.clone();
            for (w, b) in &cert.r1.squares {
                num.push(w.clone(), b.clone());
            }
            let den_target = den.expand(nvars);
            let num_target = den_target.mul(f);
            let den_file = sos_cert_file(&pf.names, den_target, den);
            let num_file = sos_cert_file(&pf.names, num_target, num);
            for cf in [&den_file, &num_file] {
                let CertPayload::Module(c) = &cf.payload else { unreachable!() };
                verify_module(c, &cf.set()).map_err(|e| RunError::Failed(e.to_string()))?;
            }
            let num_path = format!("{emit}.num.cert");
            let den_path = format!("{emit}.den.cert");
            write_atomic(&num_path, &serialize_cert(&num_file))?;
            write_atomic(&den_path, &serialize_cert(&den_file))?;
            report.verdict = "found".into();
            report.certificate = Some(num_path.clone());
            report.trace.push(format!("exponent N = {}", cert.d));
            report.trace.push(format!("numerator certificate: {num_path}"));
            report.trace.push(format!("denominator certificate: {den_path}"));
        }
        Verb::Handelman { problemfile, max_n, emit } => {
            let pf = parse_problem(&read(problemfile)?)?;
            let f = &pf.problem.target;
            check_degree_cap(&[f])?;
            let spec = SimplexSpec::Lambdas(pf.problem.set.generators.clone());
            let cert = handelman_simplex(f, &spec, *max_n)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            let (set, pre) = cert.to_preorder(f);
            verify_preorder(&pre, &set).map_err(|e| RunError::Failed(e.to_string()))?;
            for (alpha, a) in &cert.coefficients {
                report.trace.push(format!(
                    "a_{alpha:?} = {}",
                    poscert::format::display_rational(a)
                ));
            }
            if let Some(path) = emit {
                let cf = CertFile {
                    names: pf.names.clone(),
                    generators: set.generators.clone(),
                    payload: CertPayload::Preorder(pre),
                };
                write_atomic(path, &serialize_cert(&cf))?;
                report.certificate = Some(path.clone());
            }
            report.verdict = "found".into();
        }
        Verb::Putinar { problemfile, emit } => {
            let mut pf = parse_problem(&read(problemfile)?)?;
            let mut caps: Vec<&Polynomial> = vec![&pf.problem.target];
            caps.extend(pf.problem.set.generators.iter());
            check_degree_cap(&caps)?;
            if let Some(cap) = max_degree_cap() {
                pf.problem.degree_cap = pf.problem.degree_cap.min(cap);
            }
            let (trace, cert) = putinar_search(&pf.problem)?;
            verify_module(&cert, &pf.problem.set)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            for step in &trace.steps {
                report.trace.push(format!(
                    "peeled generator {} with margin {}",
                    step.peeled,
                    poscert::format::display_rational(&step.margin)
                ));
            }
            report.trace.push(format!("base case: {}", trace.base));
            if let Some(path) = emit {
                let cf = CertFile {
                    names: pf.names.clone(),
                    generators: pf.problem.set.generators.clone(),
                    payload: CertPayload::Module(cert),
                };
                write_atomic(path, &serialize_cert(&cf))?;
                report.certificate = Some(path.clone());
            }
            report.verdict = "found".into();
        }
        Verb::Projective { problemfile, emit } => {
            let pf = parse_problem(&read(problemfile)?)?;
            let mut caps: Vec<&Polynomial> = vec![&pf.problem.target];
            caps.extend(pf.problem.set.generators.iter());
            check_degree_cap(&caps)?;
            let (n, cert) = projective_putinar_search(&pf.problem)?;
            let mut set = pf.problem.set.clone();
            set.homogeneous = true;
            set.even_degrees = true;
            verify_module(&cert, &set).map_err(|e| RunError::Failed(e.to_string()))?;
            report.trace.push(format!("denominator exponent N = {n}"));
            if let Some(path) = emit {
                let cf = CertFile {
                    names: pf.names.clone(),
                    generators: set.generators.clone(),
                    payload: CertPayload::Module(cert),
                };
                write_atomic(path, &serialize_cert(&cf))?;
                report.certificate = Some(path.clone());
            }
            report.verdict = "found".into();
        }
        Verb::Natgen { intervals } => {
            let k = parse_intervals(intervals)?;
            let gens = natural_generators(&k);
            let names = vec!["x".to_string()];
            report
                .trace
                .push(format!("set: {}", serialize_intervals(&k)));
            for g in &gens {
                report.trace.push(format!("gen: {}", g.display(&names)));
            }
            if !k.is_compact() {
                match is_putinar_1d(&gens) {
                    Ok((_, PutinarVerdict::Putinar)) => {
                        report.trace.push("natural generators are Putinar".into());
                    }
                    Ok((_, PutinarVerdict::NotPutinar { .. })) | Err(_) => {}
                }
            }
            report.verdict = "found".into();
        }
        Verb::Stability { dirs, degree, bound } => {
            let t = parse_directions(dirs)?;
            let r = stability_multipliers(&t, *bound)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            match r {
                None => {
                    return Err(RunError::Failed(
                        "no multipliers: a coordinate is bounded on the tentacles".into(),
                    ));
                }
                Some(r) => {
                    report.trace.push(format!("multipliers: {r:?}"));
                    if let Some(d) = degree {
                        let b = stability_degree_bound(&t, &r, *d)
                            .map_err(|e| RunError::Failed(e.to_string()))?;
                        report.trace.push(format!(
                            "degree bound for d = {d}: {}",
                            poscert::format::display_rational(&b)
                        ));
                    }
                    report.verdict = "found".into();
                }
            }
        }
        Verb::Desquare { certfile, var, emit } => {
            let cf = parse_cert(&read(certfile)?)?;
            let CertPayload::Module(cert) = &cf.payload else {
                return Err(RunError::Parse(
                    "desquare expects a module certificate".into(),
                ));
            };
            let yvar = cf
                .names
                .iter()
                .position(|n| n == var)
                .ok_or_else(|| RunError::Parse(format!("unknown variable `{var}`")))?;
            let set = cf.set();
            let (new_set, pre) = eliminate_squares(cert, &set, yvar)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            let out = CertFile {
                names: cf.names.clone(),
                generators: new_set.generators.clone(),
                payload: CertPayload::Preorder(pre),
            };
            write_atomic(emit, &serialize_cert(&out))?;
            report.certificate = Some(emit.clone());
            report.verdict = "found".into();
            report
                .trace
                .push(format!("rewrote over {} generators", new_set.generators.len()));
        }
        Verb::Logpoly { file } => {
            let p = parse_logpoly(&read(file)?)?;
            let (uni, witness) = unimodular_cone_check(&p)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            let triples = triple_intersection_check(&p);
            report.trace.push(if uni {
                match witness {
                    Some((b1, b2)) => format!("unimodular: yes, witness {b1:?} {b2:?}"),
                    None => "unimodular: yes".to_string(),
                }
            } else {
                "unimodular: no".to_string()
            });
            match &triples {
                TripleVerdict::Pass => report.trace.push("triple intersections: none".into()),
                TripleVerdict::Fail { triple } => report
                    .trace
                    .push(format!("triple intersections: curves {triple:?} meet")),
            }
            if uni && matches!(triples, TripleVerdict::Pass) {
                report.verdict = "verified".into();
            } else {
                return Err(RunError::Failed("structural checks failed".into()));
            }
        }
        Verb::Homogenize { polyfile, even, var } => {
            let pf = parse_problem(&read(polyfile)?)?;
            let h = pf
                .problem
                .target
                .homogenize(*even)
                .map_err(|e| RunError::Failed(e.to_string()))?;
            let mut names = vec![var.clone()];
            names.extend(pf.names.iter().cloned());
            report.trace.push(h.display(&names));
            report.verdict = "found".into();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = RunReport::new("error");
    let code = match run(&cli.verb, &mut report) {
        Ok(()) => 0u8,
        Err(RunError::Parse(m)) => {
            report.verdict = "error".into();
            report.reason = Some(m);
            2
        }
        Err(RunError::Failed(m)) => {
            report.verdict = "failed".into();
            report.reason = Some(m);
            1
        }
        Err(RunError::Cap(m)) => {
            report.verdict = "error".into();
            report.reason = Some(m);
            3
        }
    };
    report.timing_ms = start.elapsed().as_millis();
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("verdict: {}", report.verdict);
        for line in &report.trace {
            println!("{line}");
        }
        if let Some(cert) = &report.certificate {
            println!("certificate: {cert}");
        }
        if let Some(reason) = &report.reason {
            eprintln!("error: {reason}");
        }
    }
    ExitCode::from(code)
}
