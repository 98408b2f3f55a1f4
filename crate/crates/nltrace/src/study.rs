//! Experiment harness: declarative configs, verification studies for the
//! scaling, equivalence, trace, inverse-trace, embedding, local-limit and
//! diffusion-limit behaviour, and CSV emission.
//!
//! Every study is deterministic given its config and seed: rows are computed
//! independently (optionally in parallel), then sorted on the schema key, so
//! reruns reproduce the CSV byte for byte. Per-row error estimates must stay
//! below 10% of the reported quantity or the row fails loudly; studies with
//! sweep-wide claims (uniformity in the horizon, monotone local limits) add
//! group checks on top.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dsl::{parse_expr, parse_field_decl};
use crate::extension::{extend_e, extend_el, ExtensionConfig};
use crate::field::{smoothstep, Field, Smoothness};
use crate::geometry::{Domain, GraphDomain, StripDomain};
use crate::kernels::{laplacian_fd, nonlocal_laplacian, KernelSpec};
use crate::point::Point;
use crate::quad::QuadratureSpec;
use crate::seminorms::{norm_lp, norm_s, norm_t, seminorm_local_trace, seminorm_s, seminorm_t};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    Scaling,
    Equivalence,
    Trace,
    InverseTrace,
    LipschitzTrace,
    GeneralTrace,
    Embedding,
    LocalLimit,
    LaplacianLimit,
}

impl StudyKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "scaling" => StudyKind::Scaling,
            "equivalence" => StudyKind::Equivalence,
            "trace" => StudyKind::Trace,
            "inverse-trace" => StudyKind::InverseTrace,
            "lipschitz-trace" => StudyKind::LipschitzTrace,
            "general-trace" => StudyKind::GeneralTrace,
            "embedding" => StudyKind::Embedding,
            "local-limit" => StudyKind::LocalLimit,
            "laplacian-limit" => StudyKind::LaplacianLimit,
            other => {
                return Err(Error::Config(format!(
                    "unknown study '{other}' (expected scaling, equivalence, trace, \
                     inverse-trace, lipschitz-trace, general-trace, embedding, local-limit, \
                     laplacian-limit)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::Scaling => "scaling",
            StudyKind::Equivalence => "equivalence",
            StudyKind::Trace => "trace",
            StudyKind::InverseTrace => "inverse-trace",
            StudyKind::LipschitzTrace => "lipschitz-trace",
            StudyKind::GeneralTrace => "general-trace",
            StudyKind::Embedding => "embedding",
            StudyKind::LocalLimit => "local-limit",
            StudyKind::LaplacianLimit => "laplacian-limit",
        }
    }
}

/// Geometry the trace studies run on.
#[derive(Clone, Debug)]
pub enum DomainMode {
    HalfSpace,
    /// Special Lipschitz graph `phi(xb)` given as a DSL expression in `xb`.
    Graph { expr: String, lip: f64 },
    /// Disk of radius `r` with its ring collar (the chart-covered demo
    /// domain).
    Disk { r: f64 },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub study: StudyKind,
    pub d: Vec<usize>,
    pub p: Vec<f64>,
    /// None selects the default grid {0, d/2, 0.9 d, 1.1 d, d + p/2}.
    pub beta: Option<Vec<f64>>,
    pub delta: Vec<f64>,
    pub strip_len: Vec<f64>,
    pub alpha: Vec<f64>,
    pub cap: f64,
    pub domain: DomainMode,
    pub functions: Vec<(String, Field)>,
    pub quad: QuadratureSpec,
    pub jobs: usize,
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn default_for(study: StudyKind) -> Self {
        let functions = default_fields(study);
        let (d, p, delta) = match study {
            StudyKind::LocalLimit => (
                vec![2],
                vec![2.0],
                vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
            ),
            StudyKind::LaplacianLimit => (vec![1, 2], vec![2.0], vec![0.4, 0.2, 0.1, 0.05]),
            StudyKind::Trace | StudyKind::InverseTrace => {
                (vec![1], vec![2.0], vec![0.5, 0.25, 0.125, 0.0625])
            }
            StudyKind::LipschitzTrace | StudyKind::GeneralTrace => {
                (vec![2], vec![2.0], vec![0.5, 0.25, 0.125, 0.0625])
            }
            _ => (vec![1, 2], vec![2.0, 3.0], vec![0.5, 0.25, 0.125, 0.0625]),
        };
        let beta = match study {
            StudyKind::Embedding => Some(vec![0.0]),
            StudyKind::LocalLimit | StudyKind::LaplacianLimit => Some(vec![0.0]),
            StudyKind::Trace
            | StudyKind::LipschitzTrace
            | StudyKind::GeneralTrace
            | StudyKind::InverseTrace => Some(vec![0.5]),
            _ => None,
        };
        let domain = match study {
            StudyKind::LipschitzTrace => DomainMode::Graph {
                expr: "0.5*abs(xb)".into(),
                lip: 0.5,
            },
            StudyKind::GeneralTrace => DomainMode::Disk { r: 1.0 },
            _ => DomainMode::HalfSpace,
        };
        let strip_len = match study {
            StudyKind::Embedding => vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            StudyKind::InverseTrace => vec![1.0, 2.0, 4.0, 8.0],
            _ => vec![1.0],
        };
        ExperimentConfig {
            study,
            d,
            p,
            beta,
            delta,
            strip_len,
            alpha: vec![1.0 / 3.0, 0.5, 2.0 / 3.0],
            cap: 1.0,
            domain,
            functions,
            quad: QuadratureSpec::default(),
            jobs: 1,
            timing: false,
        }
    }

    /// Parse the `key = value` config format; repeated `function` keys append.
    pub fn parse(study: StudyKind, text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default_for(study);
        let mut functions: Vec<(String, Field)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let list = |v: &str| -> Result<Vec<f64>> {
                v.split(',')
                    .map(|t| {
                        let t = t.trim();
                        if t.eq_ignore_ascii_case("inf") {
                            Ok(f64::INFINITY)
                        } else {
                            t.parse::<f64>()
                                .map_err(|_| Error::Config(format!("bad number '{t}'")))
                        }
                    })
                    .collect()
            };
            match key {
                "study" => {
                    let parsed = StudyKind::parse(value)?;
                    if parsed != study {
                        return Err(Error::Config(format!(
                            "config is for study '{}' but '{}' was requested",
                            parsed.name(),
                            study.name()
                        )));
                    }
                }
                "d" => cfg.d = list(value)?.into_iter().map(|v| v as usize).collect(),
                "p" => cfg.p = list(value)?,
                "beta" => {
                    cfg.beta = if value == "default" {
                        None
                    } else {
                        Some(list(value)?)
                    }
                }
                "delta" => cfg.delta = list(value)?,
                "strip_len" => cfg.strip_len = list(value)?,
                "alpha" => cfg.alpha = list(value)?,
                "cap" => cfg.cap = list(value)?[0],
                "domain" => cfg.domain = parse_domain_mode(value)?,
                "function" => functions.push(parse_field_decl(value)?),
                "quad_order" => cfg.quad.order = list(value)?[0] as usize,
                "quad_depth" => cfg.quad.depth = list(value)?[0] as usize,
                "split_radius" => cfg.quad.split_radius = list(value)?[0],
                "mc_samples" => cfg.quad.mc_samples = list(value)?[0] as u64,
                "seed" => cfg.quad.seed = list(value)?[0] as u64,
                "jobs" => cfg.jobs = list(value)?[0] as usize,
                "timing" => cfg.timing = value == "on" || value == "true",
                other => return Err(Error::Config(format!("unknown config key '{other}'"))),
            }
        }
        if !functions.is_empty() {
            cfg.functions = functions;
        }
        Ok(cfg)
    }

    pub fn beta_grid(&self, d: usize, p: f64) -> Vec<f64> {
        match &self.beta {
            Some(list) => list.clone(),
            None => {
                let df = d as f64;
                vec![0.0, 0.5 * df, 0.9 * df, 1.1 * df, df + 0.5 * p]
            }
        }
    }
}

fn parse_domain_mode(value: &str) -> Result<DomainMode> {
    let mut parts = value.split_whitespace();
    match parts.next() {
        Some("halfspace") => Ok(DomainMode::HalfSpace),
        Some("flat") => Ok(DomainMode::Graph {
            expr: "0".into(),
            lip: 0.0,
        }),
        Some("wedge") => {
            let a: f64 = parts
                .next()
                .unwrap_or("0.5")
                .parse()
                .map_err(|_| Error::Config("wedge needs a slope".into()))?;
            Ok(DomainMode::Graph {
                expr: format!("{a}*abs(xb)"),
                lip: a.abs(),
            })
        }
        Some("tilt") => {
            let a: f64 = parts
                .next()
                .unwrap_or("0.5")
                .parse()
                .map_err(|_| Error::Config("tilt needs a slope".into()))?;
            Ok(DomainMode::Graph {
                expr: format!("{a}*xb"),
                lip: a.abs(),
            })
        }
        Some("graph") => {
            // graph <expr> lip <L>
            let rest: Vec<&str> = parts.collect();
            let split = rest
                .iter()
                .position(|t| *t == "lip")
                .ok_or_else(|| Error::Config("graph domain needs 'lip <L>'".into()))?;
            let expr = rest[..split].join(" ");
            let lip: f64 = rest
                .get(split + 1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Config("graph domain needs a numeric Lipschitz bound".into()))?;
            parse_expr(&expr)?;
            Ok(DomainMode::Graph { expr, lip })
        }
        Some("disk") => {
            let r: f64 = parts.next().unwrap_or("1").parse().unwrap_or(1.0);
            Ok(DomainMode::Disk { r })
        }
        other => Err(Error::Config(format!("unknown domain mode {other:?}"))),
    }
}

fn default_fields(study: StudyKind) -> Vec<(String, Field)> {
    let decls: &[&str] = match study {
        StudyKind::LocalLimit => &["slab: bump(xb/1)*bump(xt/8) @ 8.1"],
        StudyKind::GeneralTrace => &[
            "ring: bump((xt*xt+xb*xb-1)/0.6) @ 1.3",
            "lobe: bump(((xt-1)^2+xb^2)/0.5) @ 1.8",
        ],
        StudyKind::Trace | StudyKind::InverseTrace | StudyKind::LipschitzTrace => &[
            "f1: bump(xt/1.5) @ 1.5",
            "f2: bump(xt/1.5)*sin(2*xt) @ 1.5",
            "f3: bump(xt/1.2)*(xt+0.3*cos(3*xt)) @ 1.2",
            "f4: bump(xt/1.5)*bump(xb/1.5) @ 2.2",
            "f5: bump((xt*xt+xb*xb)^0.5/1.4) @ 1.4",
        ],
        _ => &[
            "f1: bump(xt/1.5) @ 1.5",
            "f2: bump(xt/1.5)*sin(2*xt) @ 1.5",
        ],
    };
    decls
        .iter()
        .map(|s| parse_field_decl(s).expect("built-in field declaration"))
        .collect()
}

// ---------------------------------------------------------------------------
// Rows and reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Row {
    pub study: String,
    pub d: usize,
    pub p: f64,
    pub beta: f64,
    pub delta: f64,
    pub strip_len: f64,
    pub function: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub err_lhs: f64,
    pub err_rhs: f64,
    pub n_evals: u64,
    pub wall_ms: u64,
    pub pass: bool,
}

impl Row {
    fn key(&self) -> (String, usize, u64, u64, u64, u64, String) {
        (
            self.study.clone(),
            self.d,
            ord_bits(self.p),
            ord_bits(self.beta),
            ord_bits(self.delta),
            ord_bits(self.strip_len),
            self.function.clone(),
        )
    }
}

fn ord_bits(v: f64) -> u64 {
    if v.is_nan() {
        return u64::MAX;
    }
    let b = v.to_bits();
    if v >= 0.0 {
        b ^ 0x8000_0000_0000_0000
    } else {
        !b
    }
}

/// Row-level error discipline: estimates above 10% of the value fail loudly.
fn err_ok(value: f64, err: f64) -> bool {
    err <= 0.10 * value.abs() + 1e-12
}

#[derive(Clone, Debug)]
pub struct GroupCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct StudyReport {
    pub rows: Vec<Row>,
    pub groups: Vec<GroupCheck>,
}

impl StudyReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.groups.iter().all(|g| g.pass)
    }

    fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.key().cmp(&b.key()));
        self.groups.sort_by(|a, b| a.name.cmp(&b.name));
    }
}

pub const CSV_HEADER: &str =
    "study,d,p,beta,delta,L,function,lhs,rhs,ratio,err_lhs,err_rhs,n_evals,wall_ms";

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        (if v > 0.0 { "inf" } else { "-inf" }).to_string()
    } else {
        format!("{v:.12e}")
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.study,
            r.d,
            fmt_f64(r.p),
            fmt_f64(r.beta),
            fmt_f64(r.delta),
            fmt_f64(r.strip_len),
            r.function,
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.ratio),
            fmt_f64(r.err_lhs),
            fmt_f64(r.err_rhs),
            r.n_evals,
            r.wall_ms
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Study execution
// ---------------------------------------------------------------------------

pub fn run_study(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let mut report = match cfg.study {
        StudyKind::Scaling => run_scaling(cfg)?,
        StudyKind::Equivalence => run_equivalence(cfg)?,
        StudyKind::Trace | StudyKind::LipschitzTrace | StudyKind::GeneralTrace => run_trace(cfg)?,
        StudyKind::InverseTrace => run_inverse_trace(cfg)?,
        StudyKind::Embedding => run_embedding(cfg)?,
        StudyKind::LocalLimit => run_local_limit(cfg)?,
        StudyKind::LaplacianLimit => run_laplacian_limit(cfg)?,
    };
    report.sort();
    Ok(report)
}

fn maybe_par<T, R, F>(jobs: usize, tasks: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Send + Sync,
{
    if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| tasks.into_par_iter().map(&f).collect())
    } else {
        tasks.into_iter().map(f).collect()
    }
}

fn timed<T>(timing: bool, f: impl FnOnce() -> T) -> (T, u64) {
    if timing {
        let t0 = std::time::Instant::now();
        let v = f();
        (v, t0.elapsed().as_millis() as u64)
    } else {
        (f(), 0)
    }
}

fn pow_err(value: f64, err: f64, p: f64) -> f64 {
    (value + err).powf(p) - value.powf(p)
}

fn collar(delta: f64, d: usize) -> Result<Domain> {
    Ok(Domain::Strip {
        strip: StripDomain::collar(delta, d)?,
        cross_clip: None,
    })
}

fn strip(a: f64, upper: f64, d: usize) -> Result<Domain> {
    Ok(Domain::Strip {
        strip: StripDomain::new(a, upper, d)?,
        cross_clip: None,
    })
}

// --- scaling ---------------------------------------------------------------

fn run_scaling(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let l0 = cfg.strip_len.first().copied().unwrap_or(1.0);
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        for &p in &cfg.p {
            for beta in cfg.beta_grid(d, p) {
                for &delta in &cfg.delta {
                    for (fid, u) in &cfg.functions {
                        tasks.push((d, p, beta, delta, fid.clone(), u.clone()));
                    }
                }
            }
        }
    }
    let quad = cfg.quad;
    let timing = cfg.timing;
    let rows_nested = maybe_par(cfg.jobs, tasks, move |(d, p, beta, delta, fid, u)| {
        let spec_d = KernelSpec::new(d, p, beta, delta)?;
        let spec_1 = KernelSpec::new(d, p, beta, 1.0)?;
        let v = u.rescale(delta);
        let scale_sem = delta.powf(d as f64 - p);
        let scale_lp = delta.powi(d as i32);
        let tol = if d == 1 { 1e-3 } else { 1e-2 };
        let mut rows = Vec::new();
        let mut push = |identity: &str,
                        lhs: (f64, f64, u64),
                        rhs: (f64, f64, u64),
                        wall: u64| {
            let gap = (lhs.0 - rhs.0).abs() / rhs.0.abs().max(1e-300);
            rows.push(Row {
                study: "scaling".into(),
                d,
                p,
                beta,
                delta,
                strip_len: l0,
                function: format!("{fid}/{identity}"),
                lhs: lhs.0,
                rhs: rhs.0,
                ratio: lhs.0 / rhs.0.abs().max(1e-300),
                err_lhs: lhs.1,
                err_rhs: rhs.1,
                n_evals: lhs.2 + rhs.2,
                wall_ms: wall,
                pass: gap < tol && err_ok(lhs.0, lhs.1) && err_ok(rhs.0, rhs.1),
            });
        };

        // |.|_S on the strip R_-delta^L vs R_-1^{L/delta}
        let (res, wall) = timed(timing, || -> Result<_> {
            let lhs = seminorm_s(&v, &strip(-1.0, l0 / delta, d)?, &spec_1, &quad)?;
            let rhs = seminorm_s(&u, &strip(-delta, l0, d)?, &spec_d, &quad)?;
            Ok((lhs, rhs))
        });
        let (lhs, rhs) = res?;
        push(
            "S_strip",
            (
                scale_sem * lhs.value.powf(p),
                scale_sem * pow_err(lhs.value, lhs.err_est, p),
                lhs.n_evals,
            ),
            (rhs.value.powf(p), pow_err(rhs.value, rhs.err_est, p), rhs.n_evals),
            wall,
        );

        // |.|_T on the collar
        let (res, wall) = timed(timing, || -> Result<_> {
            let lhs = seminorm_t(&v, &collar(1.0, d)?, &spec_1, &quad)?;
            let rhs = seminorm_t(&u, &collar(delta, d)?, &spec_d, &quad)?;
            Ok((lhs, rhs))
        });
        let (lhs, rhs) = res?;
        push(
            "T_collar",
            (
                scale_sem * lhs.value.powf(p),
                scale_sem * pow_err(lhs.value, lhs.err_est, p),
                lhs.n_evals,
            ),
            (rhs.value.powf(p), pow_err(rhs.value, rhs.err_est, p), rhs.n_evals),
            wall,
        );

        // L^p identities on the strip and on the collar
        let (res, wall) = timed(timing, || -> Result<_> {
            let lhs = norm_lp(&v, &strip(-1.0, l0 / delta, d)?, p, &quad)?;
            let rhs = norm_lp(&u, &strip(-delta, l0, d)?, p, &quad)?;
            Ok((lhs, rhs))
        });
        let (lhs, rhs) = res?;
        push(
            "Lp_strip",
            (
                scale_lp * lhs.value.powf(p),
                scale_lp * pow_err(lhs.value, lhs.err_est, p),
                lhs.n_evals,
            ),
            (rhs.value.powf(p), pow_err(rhs.value, rhs.err_est, p), rhs.n_evals),
            wall,
        );

        let (res, wall) = timed(timing, || -> Result<_> {
            let lhs = norm_lp(&v, &collar(1.0, d)?, p, &quad)?;
            let rhs = norm_lp(&u, &collar(delta, d)?, p, &quad)?;
            Ok((lhs, rhs))
        });
        let (lhs, rhs) = res?;
        push(
            "Lp_collar",
            (
                scale_lp * lhs.value.powf(p),
                scale_lp * pow_err(lhs.value, lhs.err_est, p),
                lhs.n_evals,
            ),
            (rhs.value.powf(p), pow_err(rhs.value, rhs.err_est, p), rhs.n_evals),
            wall,
        );

        // |.|_S on the half space with its collar (L = infinity)
        let (res, wall) = timed(timing, || -> Result<_> {
            let lhs = seminorm_s(&v, &strip(-1.0, f64::INFINITY, d)?, &spec_1, &quad)?;
            let rhs = seminorm_s(&u, &strip(-delta, f64::INFINITY, d)?, &spec_d, &quad)?;
            Ok((lhs, rhs))
        });
        let (lhs, rhs) = res?;
        push(
            "S_hat",
            (
                scale_sem * lhs.value.powf(p),
                scale_sem * pow_err(lhs.value, lhs.err_est, p),
                lhs.n_evals,
            ),
            (rhs.value.powf(p), pow_err(rhs.value, rhs.err_est, p), rhs.n_evals),
            wall,
        );
        Ok(rows)
    })?;
    Ok(StudyReport {
        rows: rows_nested.into_iter().flatten().collect(),
        groups: Vec::new(),
    })
}

// --- equivalence -----------------------------------------------------------

fn run_equivalence(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        for &p in &cfg.p {
            for beta in cfg.beta_grid(d, p) {
                for &delta in &cfg.delta {
                    for &alpha in &cfg.alpha {
                        for (fid, u) in &cfg.functions {
                            tasks.push((d, p, beta, delta, alpha, fid.clone(), u.clone()));
                        }
                    }
                }
            }
        }
    }
    let quad = cfg.quad;
    let timing = cfg.timing;
    let rows = maybe_par(cfg.jobs, tasks, move |(d, p, beta, delta, alpha, fid, u)| {
        let spec = KernelSpec::new(d, p, beta, delta)?;
        let spec_a = KernelSpec::new(d, p, beta, alpha * delta)?;
        let r = u.support_radius() + delta;
        let dom = if d == 1 {
            Domain::Interval { a: -r, b: r }
        } else {
            Domain::Box2 {
                axial: (-r, r),
                cross: (-r, r),
            }
        };
        let (res, wall) = timed(timing, || -> Result<_> {
            let base = seminorm_s(&u, &dom, &spec, &quad)?;
            let contracted = seminorm_s(&u, &dom, &spec_a, &quad)?;
            Ok((base, contracted))
        });
        let (base, contracted) = res?;
        let ratio = contracted.value / base.value.max(1e-300);
        let lo = 2.0f64.powf(-(d as f64) / p - 1.0);
        let hi = alpha.powf(-(d as f64) / p - 1.0);
        let tol = 1e-3;
        Ok(Row {
            study: "equivalence".into(),
            d,
            p,
            beta,
            delta,
            strip_len: f64::NAN,
            function: format!("{fid}/a={alpha:.6}"),
            lhs: contracted.value,
            rhs: base.value,
            ratio,
            err_lhs: contracted.err_est,
            err_rhs: base.err_est,
            n_evals: base.n_evals + contracted.n_evals,
            wall_ms: wall,
            pass: ratio >= lo - tol
                && ratio <= hi + tol
                && err_ok(base.value, base.err_est)
                && err_ok(contracted.value, contracted.err_est),
        })
    })?;
    Ok(StudyReport {
        rows,
        groups: Vec::new(),
    })
}

// --- trace (half space, Lipschitz graph, chart-covered disk) ----------------

fn trace_domains(
    mode: &DomainMode,
    delta: f64,
    d: usize,
) -> Result<(Domain, Domain)> {
    match mode {
        DomainMode::HalfSpace => Ok((
            collar(delta, d)?,
            Domain::Strip {
                strip: StripDomain::hat(delta, d)?,
                cross_clip: None,
            },
        )),
        DomainMode::Graph { expr, lip } => {
            if d != 2 {
                return Err(Error::InvalidDomain(
                    "graph trace studies run in d = 2".into(),
                ));
            }
            let e = parse_expr(expr)?;
            let g = GraphDomain::new(move |xb: &[f64]| e.eval(&Point::d2(0.0, xb[0])), *lip, delta, 2)?;
            Ok((Domain::GraphCollar(g.clone()), Domain::GraphHat(g)))
        }
        DomainMode::Disk { r } => Ok((
            Domain::Annulus {
                center: Point::d2(0.0, 0.0),
                r_inner: *r,
                r_outer: r + delta,
            },
            Domain::Ball {
                center: Point::d2(0.0, 0.0),
                radius: r + delta,
            },
        )),
    }
}

fn run_trace(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let study_name = cfg.study.name().to_string();
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        for &p in &cfg.p {
            for beta in cfg.beta_grid(d, p) {
                for &delta in &cfg.delta {
                    for (fid, u) in &cfg.functions {
                        tasks.push((d, p, beta, delta, fid.clone(), u.clone()));
                    }
                }
            }
        }
    }
    let quad = cfg.quad;
    let timing = cfg.timing;
    let mode = cfg.domain.clone();
    let name2 = study_name.clone();
    let rows = maybe_par(cfg.jobs, tasks, move |(d, p, beta, delta, fid, u)| {
        let spec = KernelSpec::new(d, p, beta, delta)?;
        let (collar_dom, hat_dom) = trace_domains(&mode, delta, d)?;
        let (res, wall) = timed(timing, || -> Result<_> {
            let t = norm_t(&u, &collar_dom, &spec, &quad)?;
            let s = norm_s(&u, &hat_dom, &spec, &quad)?;
            Ok((t, s))
        });
        let (t, s) = res?;
        let weight = (d as f64 + p - beta).abs().powf(-1.0 / p);
        let rhs = weight * s.value;
        Ok(Row {
            study: name2.clone(),
            d,
            p,
            beta,
            delta,
            strip_len: f64::NAN,
            function: fid,
            lhs: t.value,
            rhs,
            ratio: t.value / rhs.max(1e-300),
            err_lhs: t.err_est,
            err_rhs: weight * s.err_est,
            n_evals: t.n_evals + s.n_evals,
            wall_ms: wall,
            pass: err_ok(t.value, t.err_est) && err_ok(s.value, s.err_est),
        })
    })?;
    let groups = uniformity_groups(&study_name, &rows, 4.0);
    Ok(StudyReport { rows, groups })
}

/// Per-(d, p, beta, function) spread of the ratio across the horizon sweep.
fn uniformity_groups(study: &str, rows: &[Row], bound: f64) -> Vec<GroupCheck> {
    use std::collections::BTreeMap;
    let mut by_key: BTreeMap<(usize, u64, u64, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        by_key
            .entry((r.d, ord_bits(r.p), ord_bits(r.beta), r.function.clone()))
            .or_default()
            .push(r.ratio);
    }
    let mut out = Vec::new();
    for ((d, _, _, f), ratios) in by_key {
        if ratios.len() < 2 {
            continue;
        }
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = max / min.max(1e-300);
        out.push(GroupCheck {
            name: format!("{study}/uniformity/d={d}/{f}"),
            pass: spread <= bound && min > 0.0,
            detail: format!("ratio spread {spread:.3} over {} horizons (bound {bound})", ratios.len()),
        });
    }
    out
}

// --- inverse trace ----------------------------------------------------------

fn run_inverse_trace(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    let quad = cfg.quad;
    let timing = cfg.timing;
    let cap = cfg.cap;

    // Part 1: the horizon-scaled operator E across the delta sweep
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        for &p in &cfg.p {
            for beta in cfg.beta_grid(d, p) {
                if (beta - d as f64).abs() < 1e-9 {
                    continue;
                }
                for &delta in &cfg.delta {
                    for (fid, u) in &cfg.functions {
                        tasks.push((d, p, beta, delta, fid.clone(), u.clone()));
                    }
                }
            }
        }
    }
    let part1 = maybe_par(cfg.jobs, tasks, move |(d, p, beta, delta, fid, u)| {
        let spec = KernelSpec::new(d, p, beta, delta)?;
        let ext_cfg = ExtensionConfig::for_spec(&spec, 1.0, cap, quad)?;
        let (res, wall) = timed(timing, || -> Result<_> {
            let eu = extend_e(&u, &spec, &ext_cfg)?;
            // restriction spot check
            let mut restriction_ok = true;
            for i in 0..100 {
                let t = -delta * (0.5 + 0.249 * ((i as f64) * 0.37).sin());
                let x = if d == 1 {
                    Point::d1(t)
                } else {
                    Point::d2(t, ((i as f64) * 0.61).cos())
                };
                if eu.eval(&x).to_bits() != u.eval(&x).to_bits() {
                    restriction_ok = false;
                    break;
                }
            }
            let s = norm_s(
                &eu,
                &Domain::Strip {
                    strip: StripDomain::hat(delta, d)?,
                    cross_clip: None,
                },
                &spec,
                &quad,
            )?;
            let t = norm_t(&u, &collar(delta, d)?, &spec, &quad)?;
            Ok((s, t, restriction_ok))
        });
        let (s, t, restriction_ok) = res?;
        let weight = (d as f64 - beta).abs().powf(-1.0 / p);
        let rhs = weight * t.value;
        Ok(Row {
            study: "inverse-trace".into(),
            d,
            p,
            beta,
            delta,
            strip_len: f64::NAN,
            function: fid,
            lhs: s.value,
            rhs,
            ratio: s.value / rhs.max(1e-300),
            err_lhs: s.err_est,
            err_rhs: weight * t.err_est,
            n_evals: s.n_evals + t.n_evals,
            wall_ms: wall,
            pass: restriction_ok && err_ok(s.value, s.err_est) && err_ok(t.value, t.err_est),
        })
    })?;
    groups.extend(uniformity_groups("inverse-trace", &part1, 4.0));
    rows.extend(part1);

    // Part 2: the strip operator E^L at delta = 1: L^p growth across L
    let d = *cfg.d.first().unwrap_or(&1);
    let p0 = *cfg.p.first().unwrap_or(&2.0);
    let mut tasks = Vec::new();
    for &l in &cfg.strip_len {
        for (fid, u) in &cfg.functions {
            tasks.push((l, fid.clone(), u.clone()));
        }
    }
    let beta_lp = cfg.beta_grid(d, p0)[0];
    let part2 = maybe_par(cfg.jobs, tasks, move |(l, fid, u)| {
        let spec = KernelSpec::new(d, p0, beta_lp.min(d as f64 * 0.5), 1.0)?;
        let ext_cfg = ExtensionConfig::for_spec(&spec, l, cap.max(2.0), quad)?;
        let (res, wall) = timed(timing, || -> Result<_> {
            let el = extend_el(&u, &ext_cfg, d)?;
            let lhs = norm_lp(
                &el,
                &Domain::Strip {
                    strip: StripDomain::new(-1.0, f64::INFINITY, d)?,
                    cross_clip: None,
                },
                p0,
                &quad,
            )?;
            let base = norm_lp(&u, &collar(1.0, d)?, p0, &quad)?;
            Ok((lhs, base))
        });
        let (lhs, base) = res?;
        let rhs = ext_cfg.strip_len * base.value.powf(p0);
        Ok(Row {
            study: "inverse-trace".into(),
            d,
            p: p0,
            beta: beta_lp.min(d as f64 * 0.5),
            delta: 1.0,
            strip_len: ext_cfg.strip_len,
            function: format!("{fid}/EL_Lp"),
            lhs: lhs.value.powf(p0),
            rhs,
            ratio: lhs.value.powf(p0) / rhs.max(1e-300),
            err_lhs: pow_err(lhs.value, lhs.err_est, p0),
            err_rhs: ext_cfg.strip_len * pow_err(base.value, base.err_est, p0),
            n_evals: lhs.n_evals + base.n_evals,
            wall_ms: wall,
            pass: err_ok(lhs.value, lhs.err_est) && err_ok(base.value, base.err_est),
        })
    })?;
    {
        use std::collections::BTreeMap;
        let mut by_f: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &part2 {
            by_f.entry(r.function.clone()).or_default().push(r.ratio);
        }
        for (f, ratios) in by_f {
            let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = max / min.max(1e-300);
            groups.push(GroupCheck {
                name: format!("inverse-trace/EL_Lp_growth/{f}"),
                pass: spread <= 4.0,
                detail: format!("L^p ratio spread {spread:.3} across strip lengths"),
            });
        }
    }
    rows.extend(part2);

    // Part 3: the strip operator's energy bound across the beta grid
    let l_fix = cfg.strip_len.get(1).copied().unwrap_or(2.0);
    let mut tasks = Vec::new();
    for beta in cfg.beta_grid(d, p0) {
        if (beta - d as f64).abs() < 1e-9 {
            continue;
        }
        for (fid, u) in &cfg.functions {
            tasks.push((beta, fid.clone(), u.clone()));
        }
    }
    let part3 = maybe_par(cfg.jobs, tasks, move |(beta, fid, u)| {
        let spec = KernelSpec::new(d, p0, beta, 1.0)?;
        let ext_cfg = ExtensionConfig::for_spec(&spec, l_fix, cap.max(2.0), quad)?;
        let (res, wall) = timed(timing, || -> Result<_> {
            let el = extend_el(&u, &ext_cfg, d)?;
            let s = seminorm_s(
                &el,
                &Domain::Strip {
                    strip: StripDomain::new(-1.0, f64::INFINITY, d)?,
                    cross_clip: None,
                },
                &spec,
                &quad,
            )?;
            let lp = norm_lp(&u, &collar(1.0, d)?, p0, &quad)?;
            let t = seminorm_t(&u, &collar(1.0, d)?, &spec, &quad)?;
            Ok((s, lp, t))
        });
        let (s, lp, t) = res?;
        let rhs = ext_cfg.strip_len.powf(-(p0 - 1.0)) * lp.value.powf(p0)
            + (beta - d as f64).abs().recip() * t.value.powf(p0);
        Ok(Row {
            study: "inverse-trace".into(),
            d,
            p: p0,
            beta,
            delta: 1.0,
            strip_len: ext_cfg.strip_len,
            function: format!("{fid}/EL_S"),
            lhs: s.value.powf(p0),
            rhs,
            ratio: s.value.powf(p0) / rhs.max(1e-300),
            err_lhs: pow_err(s.value, s.err_est, p0),
            err_rhs: pow_err(t.value, t.err_est, p0),
            n_evals: s.n_evals + lp.n_evals + t.n_evals,
            wall_ms: wall,
            pass: err_ok(s.value, s.err_est) && err_ok(t.value, t.err_est),
        })
    })?;
    {
        use std::collections::BTreeMap;
        let mut by_f: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &part3 {
            by_f.entry(r.function.clone()).or_default().push(r.ratio);
        }
        for (f, ratios) in by_f {
            if ratios.len() < 2 {
                continue;
            }
            let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = max / min.max(1e-300);
            groups.push(GroupCheck {
                name: format!("inverse-trace/EL_S_stability/{f}"),
                pass: spread <= 4.0,
                detail: format!("seminorm bound ratio spread {spread:.3} across beta grid"),
            });
        }
    }
    rows.extend(part3);

    Ok(StudyReport { rows, groups })
}

// --- embedding ---------------------------------------------------------------

fn run_embedding(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let mut tasks = Vec::new();
    for &d in &cfg.d {
        for &p in &cfg.p {
            for &l in &cfg.strip_len {
                for (fid, u) in &cfg.functions {
                    tasks.push((d, p, l, fid.clone(), u.clone()));
                }
            }
        }
    }
    let quad = cfg.quad;
    let timing = cfg.timing;
    let rows = maybe_par(cfg.jobs, tasks, move |(d, p, l, fid, u)| {
        let spec = KernelSpec::new(d, p, 0.0, 1.0)?;
        let (res, wall) = timed(timing, || -> Result<_> {
            let lhs = norm_lp(&u, &collar(1.0, d)?, p, &quad)?;
            let lp_strip = norm_lp(&u, &strip(-1.0, l, d)?, p, &quad)?;
            let s_strip = seminorm_s(&u, &strip(-1.0, l, d)?, &spec, &quad)?;
            Ok((lhs, lp_strip, s_strip))
        });
        let (lhs, lp_strip, s_strip) = res?;
        let rhs = lp_strip.value.powf(p) / l + l.powf(p - 1.0) * s_strip.value.powf(p);
        let ratio = lhs.value.powf(p) / rhs.max(1e-300);
        let degenerate_ok = l >= 1.0 || ratio <= 1.0 + 1e-6;
        Ok(Row {
            study: "embedding".into(),
            d,
            p,
            beta: 0.0,
            delta: 1.0,
            strip_len: l,
            function: fid,
            lhs: lhs.value.powf(p),
            rhs,
            ratio,
            err_lhs: pow_err(lhs.value, lhs.err_est, p),
            err_rhs: pow_err(s_strip.value, s_strip.err_est, p),
            n_evals: lhs.n_evals + lp_strip.n_evals + s_strip.n_evals,
            wall_ms: wall,
            pass: degenerate_ok
                && err_ok(lhs.value, lhs.err_est)
                && err_ok(lp_strip.value, lp_strip.err_est)
                && err_ok(s_strip.value, s_strip.err_est),
        })
    })?;
    // uniformity of the constant over L >= 1, per (d, p, function)
    use std::collections::BTreeMap;
    let mut by_key: BTreeMap<(usize, u64, String), Vec<f64>> = BTreeMap::new();
    for r in &rows {
        if r.strip_len >= 1.0 {
            by_key
                .entry((r.d, ord_bits(r.p), r.function.clone()))
                .or_default()
                .push(r.ratio);
        }
    }
    let mut groups = Vec::new();
    for ((d, _, f), ratios) in by_key {
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = max / min.max(1e-300);
        groups.push(GroupCheck {
            name: format!("embedding/uniformity/d={d}/{f}"),
            pass: spread <= 4.0,
            detail: format!("embedding constant spread {spread:.3} across strip lengths"),
        });
    }
    Ok(StudyReport { rows, groups })
}

// --- local limit --------------------------------------------------------------

fn run_local_limit(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let d = 2usize;
    let quad = cfg.quad;
    let timing = cfg.timing;
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for &p in &cfg.p {
        for beta in cfg.beta_grid(d, p) {
            for (fid, u) in &cfg.functions {
                // boundary restriction g(xb) = u(0, xb) as a 1-d field
                let uu = u.clone();
                let g = Field::new(
                    move |x: &Point| uu.eval(&Point::d2(0.0, x.axial())),
                    u.support_radius(),
                    u.smoothness(),
                );
                let clip = u.support_radius() + 1.0;
                let target = seminorm_local_trace(&g, d, p, &quad, Some(1.0))?;
                let target_coarse = seminorm_local_trace(&g, d, p, &quad.coarser(), Some(1.0))?;
                let self_consistent = (target.value - target_coarse.value).abs()
                    <= 1e-3 * target.value.abs().max(1e-300);
                groups.push(GroupCheck {
                    name: format!("local-limit/target_self_consistency/{fid}/p={p}"),
                    pass: self_consistent,
                    detail: format!(
                        "boundary seminorm {:.6e} vs coarser {:.6e}",
                        target.value, target_coarse.value
                    ),
                });
                let w_p = target.value.powf(p);
                let mut es = Vec::new();
                let deltas = cfg.delta.clone();
                let quad2 = quad;
                let tasks: Vec<f64> = deltas.clone();
                let u2 = u.clone();
                let per_delta = maybe_par(cfg.jobs, tasks, move |delta| {
                    let spec = KernelSpec::new(d, p, beta, delta)?;
                    let dom = Domain::Strip {
                        strip: StripDomain::collar(delta, d)?,
                        cross_clip: Some(clip),
                    };
                    let (t, wall) = timed(timing, || seminorm_t(&u2, &dom, &spec, &quad2));
                    let t = t?;
                    Ok((delta, t, wall))
                })?;
                for (delta, t, wall) in per_delta {
                    let t_p = t.value.powf(p);
                    let e = (t_p - w_p).abs();
                    es.push((delta, e));
                    rows.push(Row {
                        study: "local-limit".into(),
                        d,
                        p,
                        beta,
                        delta,
                        strip_len: f64::NAN,
                        function: fid.clone(),
                        lhs: t_p,
                        rhs: w_p,
                        ratio: t_p / w_p.max(1e-300),
                        err_lhs: pow_err(t.value, t.err_est, p),
                        err_rhs: pow_err(target.value, target.err_est, p),
                        n_evals: t.n_evals + target.n_evals,
                        wall_ms: wall,
                        pass: err_ok(t.value, t.err_est) && err_ok(target.value, target.err_est),
                    });
                }
                es.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap()); // largest horizon first
                let mut monotone = true;
                for w in es.windows(2) {
                    if w[1].1 > w[0].1 * 1.02 + 1e-9 {
                        monotone = false;
                    }
                }
                let quarter = es.last().map(|l| l.1).unwrap_or(0.0)
                    < es.first().map(|f| f.1 / 4.0).unwrap_or(0.0);
                groups.push(GroupCheck {
                    name: format!("local-limit/monotone/{fid}/p={p}/beta={beta}"),
                    pass: monotone && quarter,
                    detail: format!(
                        "defects {:?}",
                        es.iter().map(|(dl, e)| format!("{dl}:{e:.4e}")).collect::<Vec<_>>()
                    ),
                });
            }
        }
    }
    Ok(StudyReport { rows, groups })
}

// --- nonlocal diffusion limit --------------------------------------------------

fn run_laplacian_limit(cfg: &ExperimentConfig) -> Result<StudyReport> {
    let quad = cfg.quad;
    let timing = cfg.timing;
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for &d in &cfg.d {
        for beta in cfg.beta_grid(d, 2.0) {
            let x0 = match d {
                1 => Point::d1(0.0),
                2 => Point::d2(0.0, 0.0),
                _ => Point::d3(0.0, 0.0, 0.0),
            };
            let sq = Field::new(|x: &Point| x.norm() * x.norm(), f64::INFINITY, Smoothness::Cinf);
            let sine = Field::new(|x: &Point| x.axial().sin(), f64::INFINITY, Smoothness::Cinf);
            let mut sine_defects = Vec::new();
            for &delta in &cfg.delta {
                let spec = KernelSpec::new(d, 2.0, beta, delta)?;
                let (v, wall) = timed(timing, || nonlocal_laplacian(&spec, &sq, &x0, &quad));
                let v = v?;
                rows.push(Row {
                    study: "laplacian-limit".into(),
                    d,
                    p: 2.0,
                    beta,
                    delta,
                    strip_len: f64::NAN,
                    function: "squared_norm".into(),
                    lhs: v,
                    rhs: 2.0 * d as f64,
                    ratio: v / (2.0 * d as f64),
                    err_lhs: (v - 2.0 * d as f64).abs(),
                    err_rhs: 0.0,
                    n_evals: 0,
                    wall_ms: wall,
                    pass: (v - 2.0 * d as f64).abs() <= 1e-6,
                });
                let (v, wall) = timed(timing, || nonlocal_laplacian(&spec, &sine, &x0, &quad));
                let v = v?;
                let target = laplacian_fd(&sine, &x0, 1e-5);
                let defect = (v - -(x0.axial().sin())).abs();
                let _ = target;
                sine_defects.push((delta, defect));
                rows.push(Row {
                    study: "laplacian-limit".into(),
                    d,
                    p: 2.0,
                    beta,
                    delta,
                    strip_len: f64::NAN,
                    function: "sine".into(),
                    lhs: v,
                    rhs: -(x0.axial().sin()),
                    ratio: defect,
                    err_lhs: defect,
                    err_rhs: 0.0,
                    n_evals: 0,
                    wall_ms: wall,
                    pass: true,
                });
            }
            sine_defects.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let mut monotone = true;
            for w in sine_defects.windows(2) {
                if w[1].1 > w[0].1 + 1e-12 {
                    monotone = false;
                }
            }
            groups.push(GroupCheck {
                name: format!("laplacian-limit/sine_defect_decreases/d={d}/beta={beta}"),
                pass: monotone,
                detail: format!(
                    "defects {:?}",
                    sine_defects
                        .iter()
                        .map(|(dl, e)| format!("{dl}:{e:.3e}"))
                        .collect::<Vec<_>>()
                ),
            });
        }
    }
    Ok(StudyReport { rows, groups })
}

// ---------------------------------------------------------------------------
// Chart-cover validation entry point (CLI `validate-cover`)
// ---------------------------------------------------------------------------

pub struct CoverConfig {
    pub cover: crate::geometry::ChartCover,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
}

impl CoverConfig {
    /// Parse a validate-cover config: either `cover = disk r chart_radius eps`
    /// or repeated `chart = cx cy nx ny radius lip : phi-expr` lines plus
    /// `epsilon`, `delta0`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut delta = 0.05;
        let mut samples = 500;
        let mut seed = 7;
        let mut disk: Option<(f64, f64, f64)> = None;
        let mut charts: Vec<crate::geometry::Chart> = Vec::new();
        let mut epsilon = 0.1;
        let mut delta0 = 0.1;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config("expected 'key = value'".into()))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "delta" => delta = value.parse().map_err(|_| Error::Config("bad delta".into()))?,
                "samples" => {
                    samples = value.parse().map_err(|_| Error::Config("bad samples".into()))?
                }
                "seed" => seed = value.parse().map_err(|_| Error::Config("bad seed".into()))?,
                "epsilon" => {
                    epsilon = value.parse().map_err(|_| Error::Config("bad epsilon".into()))?
                }
                "delta0" => delta0 = value.parse().map_err(|_| Error::Config("bad delta0".into()))?,
                "cover" => {
                    let toks: Vec<&str> = value.split_whitespace().collect();
                    if toks.first() != Some(&"disk") {
                        return Err(Error::Config("only 'disk r chart_radius eps' covers".into()));
                    }
                    let r: f64 = toks.get(1).and_then(|t| t.parse().ok()).unwrap_or(1.0);
                    let cr: f64 = toks.get(2).and_then(|t| t.parse().ok()).unwrap_or(0.9 * r);
                    let ep: f64 = toks.get(3).and_then(|t| t.parse().ok()).unwrap_or(0.1 * r);
                    disk = Some((r, cr, ep));
                }
                "chart" => {
                    let (head, expr) = value
                        .split_once(':')
                        .ok_or_else(|| Error::Config("chart line needs ': phi-expr'".into()))?;
                    let nums: Vec<f64> = head
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| Error::Config("bad chart number".into())))
                        .collect::<Result<_>>()?;
                    if nums.len() != 6 {
                        return Err(Error::Config(
                            "chart = cx cy nx ny radius lip : expr".into(),
                        ));
                    }
                    let e = parse_expr(expr.trim())?;
                    charts.push(crate::geometry::Chart {
                        center: Point::d2(nums[0], nums[1]),
                        radius: nums[4],
                        frame: crate::geometry::Frame::from_inward_normal_2d(nums[2], nums[3]),
                        phi: Arc::new(move |xb: &[f64]| e.eval(&Point::d2(0.0, xb[0]))),
                        lip: nums[5],
                    });
                }
                other => return Err(Error::Config(format!("unknown cover key '{other}'"))),
            }
        }
        let cover = if let Some((r, cr, ep)) = disk {
            crate::geometry::disk_cover(r, cr, ep)?
        } else if !charts.is_empty() {
            crate::geometry::ChartCover::new(charts, epsilon, delta0, 2)?
        } else {
            return Err(Error::Config(
                "validate-cover needs 'cover = disk ...' or chart lines".into(),
            ));
        };
        Ok(CoverConfig {
            cover,
            delta,
            samples,
            seed,
        })
    }
}

/// Smooth plateau used by in-code slab fields: identically one on
/// `[lo, hi]`, decaying to zero over a margin `w` on both sides.
pub fn plateau(t: f64, lo: f64, hi: f64, w: f64) -> f64 {
    smoothstep((t - (lo - w)) / w) * (1.0 - smoothstep((t - hi) / w))
}
