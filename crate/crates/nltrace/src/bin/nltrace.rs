//! Command-line front end: norm and extension evaluation, verification
//! studies with CSV/SVG output, and chart-cover validation.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use nltrace::dsl::{parse_expr, parse_field_decl};
use nltrace::extension::{extend_e, extend_el, extend_lipschitz, Branch, ExtensionConfig};
use nltrace::field::Field;
use nltrace::geometry::{Domain, GraphDomain, StripDomain};
use nltrace::kernels::KernelSpec;
use nltrace::plot::ratio_vs_delta_svg;
use nltrace::point::Point;
use nltrace::quad::QuadratureSpec;
use nltrace::seminorms::{norm_lp, norm_s, norm_t, seminorm_local_trace, seminorm_s, seminorm_t};
use nltrace::study::{run_study, to_csv, CoverConfig, ExperimentConfig, StudyKind};
use nltrace::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nltrace",
    version,
    about = "Nonlocal function-space toolkit: horizon kernels, trace/energy seminorms, Whitney extensions, verification studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute norms and seminorms of declared fields on a domain
    Norm {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate an extension operator on a sample grid
    Extend {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a verification study (scaling, equivalence, trace, inverse-trace,
    /// lipschitz-trace, general-trace, embedding, local-limit,
    /// laplacian-limit)
    Study {
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional SVG plot of ratio versus horizon
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Record wall-clock times (makes the CSV non-reproducible)
        #[arg(long)]
        timing: bool,
    },
    /// Check the cover conditions of a chart configuration
    ValidateCover {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Study {
            name,
            config,
            out,
            plot,
            seed,
            jobs,
            timing,
        } => {
            let kind = StudyKind::parse(&name)?;
            let mut cfg = match config {
                Some(path) => ExperimentConfig::parse(kind, &std::fs::read_to_string(path)?)?,
                None => ExperimentConfig::default_for(kind),
            };
            if let Some(s) = seed {
                cfg.quad.seed = s;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            cfg.timing |= timing;
            let report = run_study(&cfg)?;
            let csv = to_csv(&report.rows);
            match out {
                Some(path) => std::fs::write(path, &csv)?,
                None => print!("{csv}"),
            }
            if let Some(path) = plot {
                let svg = ratio_vs_delta_svg(&report.rows, &format!("{} ratios", kind.name()));
                std::fs::write(path, svg)?;
            }
            let failed_rows = report.rows.iter().filter(|r| !r.pass).count();
            for g in &report.groups {
                eprintln!(
                    "[{}] {} -- {}",
                    if g.pass { "PASS" } else { "FAIL" },
                    g.name,
                    g.detail
                );
            }
            eprintln!(
                "{}: {} rows ({} failed), {} group checks ({} failed)",
                kind.name(),
                report.rows.len(),
                failed_rows,
                report.groups.len(),
                report.groups.iter().filter(|g| !g.pass).count()
            );
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Command::Norm { config, out, seed } => {
            let text = std::fs::read_to_string(config)?;
            let csv = norm_command(&text, seed)?;
            match out {
                Some(path) => std::fs::write(path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Extend { config, out, seed } => {
            let text = std::fs::read_to_string(config)?;
            let csv = extend_command(&text, seed)?;
            match out {
                Some(path) => std::fs::write(path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::ValidateCover { config, seed } => {
            let text = std::fs::read_to_string(config)?;
            let mut cc = CoverConfig::parse(&text)?;
            if let Some(s) = seed {
                cc.seed = s;
            }
            match cc.cover.validate(cc.delta, cc.samples, cc.seed) {
                Ok(()) => {
                    println!(
                        "cover OK: {} charts, delta {}, {} samples",
                        cc.cover.charts.len(),
                        cc.delta,
                        cc.samples
                    );
                    Ok(0)
                }
                Err(e) => {
                    println!("cover INVALID: {e}");
                    Ok(1)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// `norm` subcommand
// ---------------------------------------------------------------------------

struct NormConfig {
    kind: String,
    d: usize,
    p: f64,
    beta: f64,
    delta: f64,
    cross_clip: Option<f64>,
    geometry: String,
    region: String,
    functions: Vec<(String, Field)>,
    quad: QuadratureSpec,
}

fn parse_kv_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected 'key = value' in '{line}'")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_norm_config(text: &str) -> Result<NormConfig> {
    let mut cfg = NormConfig {
        kind: "s".into(),
        d: 1,
        p: 2.0,
        beta: 0.0,
        delta: 0.5,
        cross_clip: None,
        geometry: "halfspace".into(),
        region: "hat".into(),
        functions: Vec::new(),
        quad: QuadratureSpec::default(),
    };
    for (k, v) in parse_kv_config(text)? {
        let num = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad number '{v}'")))
        };
        match k.as_str() {
            "kind" => cfg.kind = v,
            "d" => cfg.d = num(&v)? as usize,
            "p" => cfg.p = num(&v)?,
            "beta" => cfg.beta = num(&v)?,
            "delta" => cfg.delta = num(&v)?,
            "cross_clip" => cfg.cross_clip = Some(num(&v)?),
            "geometry" => cfg.geometry = v,
            "region" => cfg.region = v,
            "function" => cfg.functions.push(parse_field_decl(&v)?),
            "quad_order" => cfg.quad.order = num(&v)? as usize,
            "quad_depth" => cfg.quad.depth = num(&v)? as usize,
            "split_radius" => cfg.quad.split_radius = num(&v)?,
            "mc_samples" => cfg.quad.mc_samples = num(&v)? as u64,
            "seed" => cfg.quad.seed = num(&v)? as u64,
            other => return Err(Error::Config(format!("unknown norm key '{other}'"))),
        }
    }
    if cfg.functions.is_empty() {
        return Err(Error::Config("norm config declares no functions".into()));
    }
    Ok(cfg)
}

fn build_domain(cfg: &NormConfig) -> Result<Domain> {
    let d = cfg.d;
    let delta = cfg.delta;
    let toks: Vec<&str> = cfg.region.split_whitespace().collect();
    match (cfg.geometry.as_str(), toks.first().copied()) {
        (_, Some("interval")) => Ok(Domain::Interval {
            a: toks[1].parse().unwrap(),
            b: toks[2].parse().unwrap(),
        }),
        (_, Some("strip")) => {
            let a: f64 = toks[1].parse().unwrap();
            let upper: f64 = if toks[2] == "inf" {
                f64::INFINITY
            } else {
                toks[2].parse().unwrap()
            };
            Ok(Domain::Strip {
                strip: StripDomain::new(a, upper, d)?,
                cross_clip: cfg.cross_clip,
            })
        }
        (_, Some("box")) => Ok(Domain::Box2 {
            axial: (toks[1].parse().unwrap(), toks[2].parse().unwrap()),
            cross: (toks[3].parse().unwrap(), toks[4].parse().unwrap()),
        }),
        ("halfspace", Some("collar")) => Ok(Domain::Strip {
            strip: StripDomain::collar(delta, d)?,
            cross_clip: cfg.cross_clip,
        }),
        ("halfspace", Some("hat")) => Ok(Domain::Strip {
            strip: StripDomain::hat(delta, d)?,
            cross_clip: cfg.cross_clip,
        }),
        (geom, Some(region @ ("collar" | "hat" | "interior"))) => {
            if geom.starts_with("disk") {
                let r: f64 = geom
                    .split_whitespace()
                    .nth(1)
                    .and_then(|t| t.parse().ok())
                    .unwrap_or(1.0);
                return Ok(match region {
                    "collar" => Domain::Annulus {
                        center: Point::d2(0.0, 0.0),
                        r_inner: r,
                        r_outer: r + delta,
                    },
                    _ => Domain::Ball {
                        center: Point::d2(0.0, 0.0),
                        radius: r + delta,
                    },
                });
            }
            let g = build_graph(geom, delta)?;
            Ok(match region {
                "collar" => Domain::GraphCollar(g),
                "interior" => Domain::GraphInterior(g),
                _ => Domain::GraphHat(g),
            })
        }
        other => Err(Error::Config(format!("unsupported geometry/region {other:?}"))),
    }
}

fn build_graph(geom: &str, delta: f64) -> Result<Arc<GraphDomain>> {
    let toks: Vec<&str> = geom.split_whitespace().collect();
    match toks.first().copied() {
        Some("flat") => GraphDomain::flat(delta, 2),
        Some("wedge") => {
            let a: f64 = toks.get(1).and_then(|t| t.parse().ok()).unwrap_or(0.5);
            GraphDomain::wedge(a, 0.0, delta)
        }
        Some("tilt") => {
            let a: f64 = toks.get(1).and_then(|t| t.parse().ok()).unwrap_or(0.5);
            GraphDomain::tilt(a, 0.0, delta)
        }
        Some("graph") => {
            let split = toks
                .iter()
                .position(|t| *t == "lip")
                .ok_or_else(|| Error::Config("graph geometry needs 'lip <L>'".into()))?;
            let expr = toks[1..split].join(" ");
            let lip: f64 = toks
                .get(split + 1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Config("bad Lipschitz bound".into()))?;
            let e = parse_expr(&expr)?;
            GraphDomain::new(move |xb: &[f64]| e.eval(&Point::d2(0.0, xb[0])), lip, delta, 2)
        }
        other => Err(Error::Config(format!("unknown geometry {other:?}"))),
    }
}

fn norm_command(text: &str, seed: Option<u64>) -> Result<String> {
    let mut cfg = parse_norm_config(text)?;
    if let Some(s) = seed {
        cfg.quad.seed = s;
    }
    let mut out = String::from("function,kind,d,p,beta,delta,value,err_est,n_evals\n");
    for (fid, u) in &cfg.functions {
        let res = match cfg.kind.as_str() {
            "lp" => {
                let dom = build_domain(&cfg)?;
                norm_lp(u, &dom, cfg.p, &cfg.quad)?
            }
            "s" => {
                let spec = KernelSpec::new(cfg.d, cfg.p, cfg.beta, cfg.delta)?;
                let dom = build_domain(&cfg)?;
                seminorm_s(u, &dom, &spec, &cfg.quad)?
            }
            "t" => {
                let spec = KernelSpec::new(cfg.d, cfg.p, cfg.beta, cfg.delta)?;
                let dom = build_domain(&cfg)?;
                seminorm_t(u, &dom, &spec, &cfg.quad)?
            }
            "norm_s" => {
                let spec = KernelSpec::new(cfg.d, cfg.p, cfg.beta, cfg.delta)?;
                let dom = build_domain(&cfg)?;
                norm_s(u, &dom, &spec, &cfg.quad)?
            }
            "norm_t" => {
                let spec = KernelSpec::new(cfg.d, cfg.p, cfg.beta, cfg.delta)?;
                let dom = build_domain(&cfg)?;
                norm_t(u, &dom, &spec, &cfg.quad)?
            }
            "local_trace" => seminorm_local_trace(u, cfg.d, cfg.p, &cfg.quad, cfg.cross_clip)?,
            other => return Err(Error::Config(format!("unknown norm kind '{other}'"))),
        };
        out.push_str(&format!(
            "{fid},{},{},{},{},{},{:.12e},{:.3e},{}\n",
            cfg.kind, cfg.d, cfg.p, cfg.beta, cfg.delta, res.value, res.err_est, res.n_evals
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// `extend` subcommand
// ---------------------------------------------------------------------------

fn extend_command(text: &str, seed: Option<u64>) -> Result<String> {
    let mut op = "e".to_string();
    let mut d = 1usize;
    let mut p = 2.0;
    let mut beta = 0.5;
    let mut delta = 0.25;
    let mut strip_len = 2.0;
    let mut cap = 1.0;
    let mut geometry = "flat".to_string();
    let mut functions: Vec<(String, Field)> = Vec::new();
    let mut grid_axial: Vec<f64> = vec![-0.2, -0.1, 0.1, 0.3, 0.7, 1.5];
    let mut grid_cross: Vec<f64> = vec![0.0];
    let mut quad = QuadratureSpec::default();
    for (k, v) in parse_kv_config(text)? {
        let list = |v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number '{t}'")))
                })
                .collect()
        };
        match k.as_str() {
            "op" => op = v,
            "d" => d = list(&v)?[0] as usize,
            "p" => p = list(&v)?[0],
            "beta" => beta = list(&v)?[0],
            "delta" => delta = list(&v)?[0],
            "strip_len" => strip_len = list(&v)?[0],
            "cap" => cap = list(&v)?[0],
            "geometry" => geometry = v,
            "function" => functions.push(parse_field_decl(&v)?),
            "grid_axial" => grid_axial = list(&v)?,
            "grid_cross" => grid_cross = list(&v)?,
            "quad_order" => quad.order = list(&v)?[0] as usize,
            "quad_depth" => quad.depth = list(&v)?[0] as usize,
            "mc_samples" => quad.mc_samples = list(&v)?[0] as u64,
            "seed" => quad.seed = list(&v)?[0] as u64,
            other => return Err(Error::Config(format!("unknown extend key '{other}'"))),
        }
    }
    if let Some(s) = seed {
        quad.seed = s;
    }
    if functions.is_empty() {
        return Err(Error::Config("extend config declares no functions".into()));
    }
    let spec = KernelSpec::new(d, p, beta, delta)?;
    let mut out = String::from("function,op,xt,xb,value\n");
    for (fid, u) in &functions {
        let ext: Field = match op.as_str() {
            "el" => {
                // E^L acts on the unit collar
                let spec1 = KernelSpec::new(d, p, beta, 1.0)?;
                let cfg = ExtensionConfig::for_spec(&spec1, strip_len, cap.max(2.0), quad)?;
                extend_el(u, &cfg, d)?
            }
            "e" => {
                let cfg = ExtensionConfig::for_spec(&spec, strip_len, cap, quad)?;
                extend_e(u, &spec, &cfg)?
            }
            "lipschitz" => {
                let g = build_graph(&geometry, delta)?;
                let cfg = ExtensionConfig::for_spec(&spec, strip_len, cap, quad)?;
                extend_lipschitz(u, &g, &spec, &cfg)?
            }
            other => return Err(Error::Config(format!("unknown extend op '{other}'"))),
        };
        let _uses: Branch = nltrace::extension::branch_for(&spec)?;
        for &xt in &grid_axial {
            for &xb in &grid_cross {
                let x = if d == 1 { Point::d1(xt) } else { Point::d2(xt, xb) };
                out.push_str(&format!(
                    "{fid},{op},{xt},{xb},{:.12e}\n",
                    ext.eval(&x)
                ));
            }
        }
    }
    Ok(out)
}
