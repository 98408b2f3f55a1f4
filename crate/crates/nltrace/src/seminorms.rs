//! Norms and seminorms: `L^p` norms, the horizon energy seminorm `|.|_S`,
//! the collar trace seminorm `|.|_T`, their full norms, and the classical
//! boundary Gagliardo seminorm used as the local-limit target.
//!
//! d = 1 double integrals use tensor Gauss-Legendre with the inner domain
//! split at the singular shell `|y-x| in {0, split_radius*delta, delta}` and
//! a graded transform on the singular head. d = 2 double integrals are four
//! dimensional and use the replicated Sobol engine with polar coordinates
//! around the outer point; the radial map `r = delta t^(1/q)`,
//! `q = d + p - beta`, flattens the singular mass exactly.

use crate::field::{Field, Smoothness};
use crate::geometry::{Domain, Region2};
use crate::kernels::KernelSpec;
use crate::point::Point;
use crate::quad::{adaptive_1d, integrate_graded, qmc_unit_cube, QuadOutcome, QuadratureSpec, SeminormResult};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Radial pair weights
// ---------------------------------------------------------------------------

/// Radial weight of a double integral `iint w(|y-x|) |u(y)-u(x)|^p`.
#[derive(Clone, Debug)]
pub(crate) enum PairWeight {
    /// Truncated energy kernel `gamma_delta^beta`.
    Energy(KernelSpec),
    /// Trace weight `delta^(beta-2) / ((r v delta)^(d+p-2) (r ^ delta)^beta)`.
    Trace(KernelSpec),
    /// Boundary Gagliardo weight `r^-(d+p-2)` on the (d-1)-dimensional
    /// boundary.
    Gagliardo { d: usize, p: f64 },
}

impl PairWeight {
    #[inline]
    pub(crate) fn eval(&self, r: f64) -> f64 {
        match self {
            PairWeight::Energy(spec) => spec.eval(r),
            PairWeight::Trace(spec) => {
                let delta = spec.delta();
                let d = spec.dim() as f64;
                let p = spec.p();
                let beta = spec.beta();
                if r < delta {
                    delta.powf(beta - 2.0 - (d + p - 2.0)) * r.powf(-beta)
                } else {
                    delta.powf(-2.0) * r.powf(-(d + p - 2.0))
                }
            }
            PairWeight::Gagliardo { d, p } => r.powf(-(*d as f64 + p - 2.0)),
        }
    }

    /// Dimension of the region the pair integral ranges over.
    fn region_dim(&self) -> usize {
        match self {
            PairWeight::Energy(s) | PairWeight::Trace(s) => s.dim(),
            PairWeight::Gagliardo { d, .. } => d - 1,
        }
    }

    /// Power `beta_eff` of the `r -> 0` singularity.
    fn sing_exponent(&self) -> f64 {
        match self {
            PairWeight::Energy(s) | PairWeight::Trace(s) => s.beta(),
            PairWeight::Gagliardo { d, p } => *d as f64 + p - 2.0,
        }
    }

    fn p(&self) -> f64 {
        match self {
            PairWeight::Energy(s) | PairWeight::Trace(s) => s.p(),
            PairWeight::Gagliardo { p, .. } => *p,
        }
    }

    /// Grading exponent of the singular head: the radial integrand behaves
    /// like `r^(q-1)` with `q = dim + p - beta_eff`.
    fn grading_q(&self) -> f64 {
        self.region_dim() as f64 + self.p() - self.sing_exponent()
    }

    /// Head length of the singular split and whether a far part remains.
    fn split(&self, split_radius: f64, diam: f64) -> (f64, Option<(f64, f64)>, Vec<f64>) {
        match self {
            PairWeight::Energy(s) => {
                let delta = s.delta();
                let head = (split_radius * delta).min(diam);
                // kernel truncates at delta: no contribution beyond
                let far = if diam > head {
                    Some((head, delta.min(diam)))
                } else {
                    None
                };
                (head, far, vec![delta])
            }
            PairWeight::Trace(s) => {
                let delta = s.delta();
                let head = (split_radius * delta).min(diam);
                let far = if diam > head { Some((head, diam)) } else { None };
                (head, far, vec![delta])
            }
            PairWeight::Gagliardo { .. } => {
                let head = (0.25 * diam).min(1.0);
                let far = if diam > head { Some((head, diam)) } else { None };
                (head, far, Vec::new())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// d = 1 pair integral
// ---------------------------------------------------------------------------

/// `iint_{X x Y} w(|y-x|) |u(y)-u(x)|^p dy dx` for intervals X, Y.
///
/// The inner integral in `r = |y - x|` is split at the singular shell; the
/// head uses the graded transform, the remaining smooth pieces adaptive GL
/// with the horizon as a mandatory breakpoint. `axial_breaks` marks axial
/// positions where the field itself kinks (support edges, gluing planes).
pub(crate) fn pair_integral_1d(
    u: &Field,
    x_range: (f64, f64),
    y_range: (f64, f64),
    w: &PairWeight,
    quad: &QuadratureSpec,
    axial_breaks: &[f64],
) -> QuadOutcome {
    let p = w.p();
    let q = w.grading_q();
    let (xa, xb) = x_range;
    let (ya, yb) = y_range;
    if !(xb > xa) || !(yb > ya) {
        return QuadOutcome {
            value: 0.0,
            err: 0.0,
            n_evals: 0,
            converged: true,
        };
    }
    let diam = (xb - xa).max(yb - ya) + (xa - ya).abs().max((xb - yb).abs());
    let (head_len, far, w_breaks) = w.split(quad.split_radius, diam);
    let order = quad.order.max(6);
    let inner_cells = 512usize;

    let mut n_evals: u64 = 0;
    let mut inner_err_max: f64 = 0.0;

    let mut inner = |x: f64| -> f64 {
        let ux = u.eval(&Point::d1(x));
        let mut acc = 0.0;
        for (sign, reach) in [(-1.0_f64, x - ya), (1.0, yb - x)] {
            if reach <= 0.0 {
                continue;
            }
            let mut g = |r: f64| {
                let y = x + sign * r;
                let diff = (u.eval(&Point::d1(y)) - ux).abs();
                w.eval(r) * diff.powf(p)
            };
            // singular head
            let h = head_len.min(reach);
            if h > 0.0 {
                let out = integrate_graded(&mut g, h, q, order, 1e-9, 1e-300, inner_cells);
                acc += out.value;
                inner_err_max = inner_err_max.max(out.err);
                n_evals += out.n_evals;
            }
            // smooth body out to the reach (or the truncation radius)
            let body_hi = match (&far, w) {
                (_, PairWeight::Energy(s)) => s.delta().min(reach),
                (Some((_, _)), _) => reach,
                (None, _) => h,
            };
            if body_hi > h {
                let mut breaks: Vec<f64> = w_breaks.clone();
                for &b in axial_breaks {
                    let r = (b - x) * sign;
                    if r > h && r < body_hi {
                        breaks.push(r);
                    }
                }
                let out = adaptive_1d(&mut g, h, body_hi, &breaks, order, 1e-9, 1e-300, inner_cells);
                acc += out.value;
                inner_err_max = inner_err_max.max(out.err);
                n_evals += out.n_evals;
            }
        }
        acc
    };

    // outer breakpoints: shell radii around the inner endpoints, field kinks
    let mut outer_breaks: Vec<f64> = Vec::new();
    for &e in &[ya, yb] {
        for &r in std::iter::once(&head_len).chain(w_breaks.iter()) {
            outer_breaks.push(e - r);
            outer_breaks.push(e + r);
        }
        outer_breaks.push(e);
    }
    outer_breaks.extend_from_slice(axial_breaks);

    let out = adaptive_1d(
        &mut inner,
        xa,
        xb,
        &outer_breaks,
        order,
        1e-8,
        1e-300,
        1 << quad.depth,
    );
    QuadOutcome {
        value: out.value,
        err: out.err + inner_err_max * (xb - xa),
        n_evals: out.n_evals.max(n_evals),
        converged: out.converged,
    }
}

// ---------------------------------------------------------------------------
// d = 2 pair integral (QMC)
// ---------------------------------------------------------------------------

/// Four-dimensional `iint w(|y-x|) |u(y)-u(x)|^p` over `region_x x region_y`
/// by replicated Sobol sampling in (outer point, radial, angular) variables.
pub(crate) fn pair_integral_2d(
    u: &Field,
    region_x: &Region2,
    region_y: &Region2,
    w: &PairWeight,
    quad: &QuadratureSpec,
) -> QuadOutcome {
    let p = w.p();
    let q = w.grading_q();
    let diam = region_x.diam_bound().max(region_y.diam_bound()) * 1.5;
    let (head_len, far, _) = w.split(quad.split_radius, diam);
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0u64;

    // near piece: r = head * t^(1/q) flattens the singular mass
    {
        let integrand = |s: &[f64; 4]| -> f64 {
            let (x, jac_x) = region_x.sample(s[0], s[1]);
            if jac_x == 0.0 {
                return 0.0;
            }
            let t = s[2].max(1e-300);
            let r = head_len * t.powf(1.0 / q);
            let jac_r = head_len / q * t.powf(1.0 / q - 1.0);
            let th = two_pi * s[3];
            let y = Point::d2(x.coord(0) + r * th.cos(), x.coord(1) + r * th.sin());
            if !region_y.contains(&y) {
                return 0.0;
            }
            let diff = (u.eval(&y) - u.eval(&x)).abs();
            jac_x * two_pi * jac_r * r * w.eval(r) * diff.powf(p)
        };
        let out = qmc_unit_cube::<4, _>(integrand, quad.mc_samples, 8, quad.seed);
        total += out.value;
        err += out.err;
        evals += out.n_evals;
    }

    // far piece: log-uniform radial sampling out to the region diameter
    if let Some((r_lo, r_hi)) = far {
        if r_hi > r_lo {
            let log_ratio = (r_hi / r_lo).ln();
            let integrand = |s: &[f64; 4]| -> f64 {
                let (x, jac_x) = region_x.sample(s[0], s[1]);
                if jac_x == 0.0 {
                    return 0.0;
                }
                let r = r_lo * (s[2] * log_ratio).exp();
                let jac_r = r * log_ratio;
                let th = two_pi * s[3];
                let y = Point::d2(x.coord(0) + r * th.cos(), x.coord(1) + r * th.sin());
                if !region_y.contains(&y) {
                    return 0.0;
                }
                let diff = (u.eval(&y) - u.eval(&x)).abs();
                jac_x * two_pi * jac_r * r * w.eval(r) * diff.powf(p)
            };
            let out = qmc_unit_cube::<4, _>(integrand, quad.mc_samples, 8, quad.seed ^ 0xfa52);
            total += out.value;
            err += out.err;
            evals += out.n_evals;
        }
    }

    QuadOutcome {
        value: total,
        err,
        n_evals: evals,
        converged: true,
    }
}

// ---------------------------------------------------------------------------
// Area integrals (for L^p norms)
// ---------------------------------------------------------------------------

fn area_integral_2d<F: Fn(&Point) -> f64>(
    f: F,
    region: &Region2,
    quad: &QuadratureSpec,
    axial_breaks: &[f64],
) -> QuadOutcome {
    let order = quad.order.max(6);
    let cells = 512usize;
    let mut inner_err: f64 = 0.0;
    let mut n_evals = 0u64;
    match region {
        Region2::Profile { c0, c1, lo, hi } => {
            let mut outer = |c: f64| -> f64 {
                let l = lo.eval(c);
                let h = hi.eval(c);
                if h <= l {
                    return 0.0;
                }
                let mut g = |t: f64| f(&Point::d2(t, c));
                let out = adaptive_1d(&mut g, l, h, axial_breaks, order, 1e-10, 1e-300, cells);
                inner_err = inner_err.max(out.err);
                n_evals += out.n_evals;
                out.value
            };
            let breaks = region.cross_breaks();
            let out = adaptive_1d(&mut outer, *c0, *c1, &breaks, order, 1e-9, 1e-300, 1 << quad.depth);
            QuadOutcome {
                value: out.value,
                err: out.err + inner_err * (c1 - c0),
                n_evals: out.n_evals.max(n_evals),
                converged: out.converged,
            }
        }
        Region2::Radial { center, r0, r1 } => {
            let mut outer = |th: f64| -> f64 {
                let mut g = |rho: f64| {
                    rho * f(&Point::d2(
                        center.coord(0) + rho * th.cos(),
                        center.coord(1) + rho * th.sin(),
                    ))
                };
                let out = adaptive_1d(&mut g, *r0, *r1, &[], order, 1e-10, 1e-300, cells);
                inner_err = inner_err.max(out.err);
                n_evals += out.n_evals;
                out.value
            };
            let pi = std::f64::consts::PI;
            let out = adaptive_1d(
                &mut outer,
                0.0,
                2.0 * pi,
                &[0.5 * pi, pi, 1.5 * pi],
                order,
                1e-9,
                1e-300,
                1 << quad.depth,
            );
            QuadOutcome {
                value: out.value,
                err: out.err + inner_err * 2.0 * pi,
                n_evals: out.n_evals.max(n_evals),
                converged: out.converged,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

fn check_outcome(out: &QuadOutcome, what: &str) -> Result<()> {
    if !out.converged && out.err > 0.05 * out.value.abs().max(1e-300) {
        return Err(Error::QuadratureNonConvergence(format!(
            "{what}: residual {:.3e} on value {:.6e}",
            out.err, out.value
        )));
    }
    Ok(())
}

/// `(int_domain |u|^p)^(1/p)` over the support-clipped effective region.
pub fn norm_lp(u: &Field, domain: &Domain, p: f64, quad: &QuadratureSpec) -> Result<SeminormResult> {
    quad.validate()?;
    if !(p >= 1.0) {
        return Err(Error::Config(format!("L^p norm needs p >= 1 (got {p})")));
    }
    let r = u.support_radius();
    match domain.dim() {
        1 => {
            let (a, b) = domain.interval_clipped(r, 0.0)?;
            let mut f = |x: f64| u.eval(&Point::d1(x)).abs().powf(p);
            let breaks = [-r, r, 0.0];
            let out = adaptive_1d(&mut f, a, b, &breaks, quad.order.max(6), 1e-10, 1e-300, 1 << quad.depth);
            check_outcome(&out, "L^p norm")?;
            Ok(SeminormResult::new(out.value, out.err, out.n_evals).root(p))
        }
        2 => {
            let region = domain.region2(r, 0.0)?;
            let out = area_integral_2d(
                |x| u.eval(x).abs().powf(p),
                &region,
                quad,
                &[-r, 0.0, r],
            );
            check_outcome(&out, "L^p norm")?;
            Ok(SeminormResult::new(out.value, out.err, out.n_evals).root(p))
        }
        d => Err(Error::Unsupported(format!("L^p norm in d = {d}"))),
    }
}

fn pair_dispatch(
    u: &Field,
    domain: &Domain,
    w: &PairWeight,
    quad: &QuadratureSpec,
    pad: f64,
    axial_breaks: &[f64],
) -> Result<QuadOutcome> {
    let r = u.support_radius();
    match domain.dim() {
        1 => {
            let (a, b) = domain.interval_clipped(r, pad)?;
            let mut breaks = vec![-r, r];
            breaks.extend_from_slice(axial_breaks);
            Ok(pair_integral_1d(u, (a, b), (a, b), w, quad, &breaks))
        }
        2 => {
            let region = domain.region2(r, pad)?;
            Ok(pair_integral_2d(u, &region, &region, w, quad))
        }
        d => Err(Error::Unsupported(format!("pair integrals in d = {d}"))),
    }
}

/// Energy seminorm `|u|_{S^beta_delta(domain)}`: the p-th root of the double
/// integral of `gamma(|y-x|) |u(y)-u(x)|^p` over the domain squared.
pub fn seminorm_s(
    u: &Field,
    domain: &Domain,
    spec: &KernelSpec,
    quad: &QuadratureSpec,
) -> Result<SeminormResult> {
    quad.validate()?;
    check_dim(domain, spec)?;
    let w = PairWeight::Energy(*spec);
    let out = pair_dispatch(u, domain, &w, quad, spec.delta(), &[])?;
    check_outcome(&out, "S seminorm")?;
    // merely continuous fields against a non-integrable kernel: flag growth
    // under refinement instead of returning a silently truncated value
    if u.smoothness() == Smoothness::C0 && spec.beta() >= spec.dim() as f64 {
        let coarse = pair_dispatch(u, domain, &w, &quad.coarser(), spec.delta(), &[])?;
        if out.value > 1.25 * coarse.value.max(1e-300) {
            return Err(Error::Divergent(format!(
                "S seminorm grows under refinement ({:.6e} -> {:.6e}); raise depth/mc_samples if this is expected to converge",
                coarse.value, out.value
            )));
        }
    }
    Ok(SeminormResult::new(out.value, out.err, out.n_evals).root(spec.p()))
}

/// Trace seminorm `|u|_{T^beta_delta(domain)}` on a collar domain.
pub fn seminorm_t(
    u: &Field,
    domain: &Domain,
    spec: &KernelSpec,
    quad: &QuadratureSpec,
) -> Result<SeminormResult> {
    quad.validate()?;
    check_dim(domain, spec)?;
    let w = PairWeight::Trace(*spec);
    let out = pair_dispatch(u, domain, &w, quad, spec.delta(), &[])?;
    check_outcome(&out, "T seminorm")?;
    Ok(SeminormResult::new(out.value, out.err, out.n_evals).root(spec.p()))
}

/// Full energy norm `(||u||_p^p + |u|_S^p)^(1/p)`.
pub fn norm_s(
    u: &Field,
    domain: &Domain,
    spec: &KernelSpec,
    quad: &QuadratureSpec,
) -> Result<SeminormResult> {
    let p = spec.p();
    let lp = norm_lp(u, domain, p, quad)?;
    let sm = seminorm_s(u, domain, spec, quad)?;
    Ok(combine_norm(&lp, 1.0, &sm, p))
}

/// Full trace norm `((1/delta) ||u||_p^p + |u|_T^p)^(1/p)`.
pub fn norm_t(
    u: &Field,
    domain: &Domain,
    spec: &KernelSpec,
    quad: &QuadratureSpec,
) -> Result<SeminormResult> {
    let p = spec.p();
    let lp = norm_lp(u, domain, p, quad)?;
    let sm = seminorm_t(u, domain, spec, quad)?;
    Ok(combine_norm(&lp, 1.0 / spec.delta(), &sm, p))
}

fn combine_norm(lp: &SeminormResult, lp_weight: f64, sm: &SeminormResult, p: f64) -> SeminormResult {
    let a = lp_weight * lp.value.powf(p);
    let b = sm.value.powf(p);
    let a_hi = lp_weight * (lp.value + lp.err_est).powf(p);
    let b_hi = (sm.value + sm.err_est).powf(p);
    let value = (a + b).powf(1.0 / p);
    let err = (a_hi + b_hi).powf(1.0 / p) - value;
    SeminormResult::new(value, err, lp.n_evals + sm.n_evals)
}

/// Classical boundary Gagliardo seminorm
/// `(iint |g(y)-g(x)|^p / |y-x|^(d+p-2))^(1/p)` over the flat boundary
/// `R^(d-1)`, clipped to the field's support plus `cross_clip`
/// (default 32). The boundary field `g` is evaluated in `d - 1` coordinates.
pub fn seminorm_local_trace(
    g: &Field,
    d: usize,
    p: f64,
    quad: &QuadratureSpec,
    cross_clip: Option<f64>,
) -> Result<SeminormResult> {
    quad.validate()?;
    if d < 2 {
        return Err(Error::InvalidDomain(
            "the boundary of a 1-d domain is a point set; no Gagliardo seminorm".into(),
        ));
    }
    if d > 3 {
        return Err(Error::Unsupported(format!("boundary seminorm for d = {d}")));
    }
    let r = g.support_radius();
    if !r.is_finite() {
        return Err(Error::InvalidDomain(
            "boundary field must be compactly supported".into(),
        ));
    }
    let clip = cross_clip.unwrap_or(32.0).max(1e-9) + r;
    let w = PairWeight::Gagliardo { d, p };
    let out = match d {
        2 => pair_integral_1d(g, (-clip, clip), (-clip, clip), &w, quad, &[-r, r]),
        _ => {
            let region = Region2::Profile {
                c0: -clip,
                c1: clip,
                lo: crate::geometry::Prof::Const(-clip),
                hi: crate::geometry::Prof::Const(clip),
            };
            pair_integral_2d(g, &region, &region, &w, quad)
        }
    };
    check_outcome(&out, "boundary Gagliardo seminorm")?;
    Ok(SeminormResult::new(out.value, out.err, out.n_evals).root(p))
}

fn check_dim(domain: &Domain, spec: &KernelSpec) -> Result<()> {
    if domain.dim() != spec.dim() {
        return Err(Error::InvalidDomain(format!(
            "domain dimension {} does not match kernel dimension {}",
            domain.dim(),
            spec.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StripDomain;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn interval(a: f64, b: f64) -> Domain {
        Domain::Interval { a, b }
    }

    #[test]
    fn lp_norm_closed_forms() {
        let q = quad();
        let zero = Field::constant(0.0);
        assert_eq!(norm_lp(&zero, &interval(-1.0, 0.0), 2.0, &q).unwrap().value, 0.0);

        let one = Field::constant(1.0);
        let r = norm_lp(&one, &interval(-1.0, 0.0), 2.0, &q).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);

        let lin = Field::new(|x: &Point| x.axial(), f64::INFINITY, Smoothness::Cinf);
        let r = norm_lp(&lin, &interval(0.0, 1.0), 2.0, &q).unwrap();
        assert_abs_diff_eq!(r.value, (1.0f64 / 3.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn lp_norm_rejects_unbounded_effective_region() {
        let one = Field::constant(1.0);
        let dom = Domain::Strip {
            strip: StripDomain::hat(1.0, 1).unwrap(),
            cross_clip: None,
        };
        assert!(norm_lp(&one, &dom, 2.0, &quad()).is_err());
    }

    #[test]
    fn seminorm_s_closed_form_d1() {
        // u = x on (-1,2), d=1, p=2, beta=0, delta=1:
        // interior plate contributes 1, each boundary layer 5/8
        let spec = KernelSpec::new(1, 2.0, 0.0, 1.0).unwrap();
        let u = Field::new(|x: &Point| x.axial(), f64::INFINITY, Smoothness::Cinf);
        let r = seminorm_s(&u, &interval(-1.0, 2.0), &spec, &quad()).unwrap();
        assert_abs_diff_eq!(r.value * r.value, 2.25, epsilon = 1e-6);
        assert_abs_diff_eq!(r.value, 1.5, epsilon = 1e-6);
    }

    #[test]
    fn seminorm_s_zero_on_constants() {
        let spec = KernelSpec::new(1, 2.0, 1.5, 0.5).unwrap();
        let u = Field::constant(7.0);
        let r = seminorm_s(&u, &interval(-1.0, 1.0), &spec, &quad()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn seminorm_t_closed_form_d1() {
        // u = x on (-1,0), beta=0, delta=1: weight is 1 and the integral is 1/6
        let spec = KernelSpec::new(1, 2.0, 0.0, 1.0).unwrap();
        let u = Field::new(|x: &Point| x.axial(), f64::INFINITY, Smoothness::Cinf);
        let r = seminorm_t(&u, &interval(-1.0, 0.0), &spec, &quad()).unwrap();
        assert_abs_diff_eq!(r.value * r.value, 1.0 / 6.0, epsilon = 1e-6);
    }

    #[test]
    fn norm_t_closed_form_and_constant() {
        let spec = KernelSpec::new(1, 2.0, 0.0, 1.0).unwrap();
        let u = Field::new(|x: &Point| x.axial(), f64::INFINITY, Smoothness::Cinf);
        let r = norm_t(&u, &interval(-1.0, 0.0), &spec, &quad()).unwrap();
        assert_abs_diff_eq!(r.value, 0.5f64.sqrt(), epsilon = 1e-6);

        // constants: the collar measure delta cancels the 1/delta weight
        let spec = KernelSpec::new(1, 2.0, 0.0, 0.25).unwrap();
        let c = Field::constant(-3.0);
        let r = norm_t(&c, &interval(-0.25, 0.0), &spec, &quad()).unwrap();
        assert_abs_diff_eq!(r.value, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn norm_s_closed_form() {
        let spec = KernelSpec::new(1, 2.0, 0.0, 1.0).unwrap();
        let u = Field::new(|x: &Point| x.axial(), f64::INFINITY, Smoothness::Cinf);
        let r = norm_s(&u, &interval(-1.0, 2.0), &spec, &quad()).unwrap();
        assert_abs_diff_eq!(r.value, (3.0f64 + 2.25).sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn seminorm_s_singular_beta_still_converges_for_smooth_fields() {
        // beta = 1.5 > d = 1: the difference |u(y)-u(x)|^p tames r^-beta
        let spec = KernelSpec::new(1, 2.0, 1.5, 0.5).unwrap();
        let u = Field::new(
            |x: &Point| (x.axial() * 2.0).sin(),
            f64::INFINITY,
            Smoothness::Cinf,
        );
        let fine = seminorm_s(&u, &interval(-1.0, 1.0), &spec, &quad()).unwrap();
        let coarser = seminorm_s(&u, &interval(-1.0, 1.0), &spec, &quad().coarser()).unwrap();
        assert!(
            (fine.value - coarser.value).abs() <= 1e-5 * fine.value,
            "fine {} coarse {}",
            fine.value,
            coarser.value
        );
    }

    fn random_smooth_field(rng: &mut impl Rng, support: f64) -> Field {
        let a1 = rng.gen_range(0.5..3.0);
        let a2 = rng.gen_range(0.5..3.0);
        let c0 = rng.gen_range(-1.0..1.0);
        let c1 = rng.gen_range(-1.0..1.0);
        let c2 = rng.gen_range(-1.0..1.0);
        let s = support;
        Field::new(
            move |x: &Point| {
                let t = x.axial();
                let envelope = crate::field::bump_profile(t / s);
                envelope * (c0 + c1 * (a1 * t).sin() + c2 * (a2 * t).cos())
            },
            support,
            Smoothness::Cinf,
        )
    }

    #[test]
    fn scaling_identities_d1() {
        // delta^(d-p) |v|_{S_1(R_-1^{L/delta})}^p = |u|_{S_delta(R_-delta^L)}^p
        // with v(x) = u(delta x), plus the T and L^p counterparts
        let q = quad();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let u = random_smooth_field(&mut rng, 1.5);
        let (d, p, beta, delta, strip_len) = (1usize, 2.0, 0.7, 0.3, 1.0);
        let spec_d = KernelSpec::new(d, p, beta, delta).unwrap();
        let spec_1 = KernelSpec::new(d, p, beta, 1.0).unwrap();
        let v = u.rescale(delta);
        let scale = delta.powf(d as f64 - p);

        let lhs = seminorm_s(&v, &interval(-1.0, strip_len / delta), &spec_1, &q).unwrap();
        let rhs = seminorm_s(&u, &interval(-delta, strip_len), &spec_d, &q).unwrap();
        let gap = (scale * lhs.value.powf(p) - rhs.value.powf(p)).abs() / rhs.value.powf(p);
        assert!(gap < 1e-4, "S gap {gap}");

        let lhs = seminorm_t(&v, &interval(-1.0, 0.0), &spec_1, &q).unwrap();
        let rhs = seminorm_t(&u, &interval(-delta, 0.0), &spec_d, &q).unwrap();
        let gap = (scale * lhs.value.powf(p) - rhs.value.powf(p)).abs() / rhs.value.powf(p);
        assert!(gap < 1e-4, "T gap {gap}");

        let lhs = norm_lp(&v, &interval(-1.0, strip_len / delta), p, &q).unwrap();
        let rhs = norm_lp(&u, &interval(-delta, strip_len), p, &q).unwrap();
        let gap = (delta.powi(d as i32) * lhs.value.powf(p) - rhs.value.powf(p)).abs()
            / rhs.value.powf(p);
        assert!(gap < 1e-6, "Lp gap {gap}");
    }

    #[test]
    fn equivalence_sandwich_d1() {
        // 2^(-d/p-1) <= |u|_{S_{alpha delta}} / |u|_{S_delta} <= alpha^(-d/p-1)
        let q = quad();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (d, p, delta) = (1usize, 2.0f64, 0.5f64);
        let dom = interval(-2.0, 2.0);
        for _ in 0..3 {
            let u = random_smooth_field(&mut rng, 1.5);
            for alpha in [1.0f64 / 3.0, 0.5, 2.0 / 3.0] {
                for beta in [0.0, 0.9] {
                    let spec = KernelSpec::new(d, p, beta, delta).unwrap();
                    let spec_a = KernelSpec::new(d, p, beta, alpha * delta).unwrap();
                    let base = seminorm_s(&u, &dom, &spec, &q).unwrap().value;
                    let contracted = seminorm_s(&u, &dom, &spec_a, &q).unwrap().value;
                    let ratio = contracted / base;
                    let lo = 2.0f64.powf(-(d as f64) / p - 1.0);
                    let hi = alpha.powf(-(d as f64) / p - 1.0);
                    assert!(
                        ratio >= lo - 1e-3 && ratio <= hi + 1e-3,
                        "alpha={alpha} beta={beta} ratio={ratio} bounds=[{lo},{hi}]"
                    );
                }
            }
        }
    }

    #[test]
    fn absolute_homogeneity_and_triangle() {
        let q = quad();
        let spec = KernelSpec::new(1, 2.0, 0.5, 0.5).unwrap();
        let dom = interval(-1.5, 1.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let u = random_smooth_field(&mut rng, 1.0);
        let v = random_smooth_field(&mut rng, 1.0);
        let su = norm_s(&u, &dom, &spec, &q).unwrap().value;
        let sv = norm_s(&v, &dom, &spec, &q).unwrap().value;
        let scaled = norm_s(&u.linear_comb(-2.5, &Field::constant(0.0), 0.0), &dom, &spec, &q)
            .unwrap()
            .value;
        assert_abs_diff_eq!(scaled, 2.5 * su, epsilon = 1e-6 * su.max(1.0));
        let sum = norm_s(&u.linear_comb(1.0, &v, 1.0), &dom, &spec, &q).unwrap().value;
        assert!(sum <= su + sv + 1e-8, "triangle: {sum} vs {su} + {sv}");
    }

    // -- d = 2 oracles ------------------------------------------------------

    /// Reduction oracle for translation-invariant double integrals over a box:
    /// iint_{A x A} w(|y-x|) F(y-x) = int_z w(|z|) F(z) overlap(z) dz with
    /// overlap(z) = prod (len_i - |z_i|)_+ , evaluated in polar coordinates by
    /// plain Simpson over caller-chosen radial panels (each panel flattened by
    /// r = lo + (hi - lo) t^(1/q)). Independent of the QMC path under test.
    fn box_pair_oracle<WF, FF>(
        len_axial: f64,
        len_cross: f64,
        w: WF,
        f: FF,
        panels: &[(f64, f64, f64)],
    ) -> f64
    where
        WF: Fn(f64) -> f64,
        FF: Fn(f64, f64) -> f64,
    {
        let nt = 4000;
        let nth = 2048;
        let ring = |r: f64| {
            let mut acc = 0.0;
            for k in 0..nth {
                let th = 2.0 * std::f64::consts::PI * k as f64 / nth as f64;
                let (zt, zc) = (r * th.cos(), r * th.sin());
                let ov = (len_axial - zt.abs()).max(0.0) * (len_cross - zc.abs()).max(0.0);
                if ov > 0.0 {
                    acc += f(zt, zc) * ov;
                }
            }
            acc * 2.0 * std::f64::consts::PI / nth as f64
        };
        let mut total = 0.0;
        for &(lo, hi, q_flat) in panels {
            let mut acc = 0.0;
            for i in 0..=nt {
                let t = i as f64 / nt as f64;
                let wt = if i == 0 || i == nt {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                if t == 0.0 && lo == 0.0 {
                    continue;
                }
                let r = lo + (hi - lo) * t.powf(1.0 / q_flat);
                let jac = (hi - lo) / q_flat * t.max(1e-300).powf(1.0 / q_flat - 1.0);
                acc += wt * w(r) * ring(r) * r * jac;
            }
            total += acc / 3.0 / nt as f64;
        }
        total
    }

    #[test]
    fn seminorm_s_d2_against_reduction_oracle() {
        // u = x_tilde on the box (0,1) x (0,1), p=2, beta=1, delta=0.5
        let spec = KernelSpec::new(2, 2.0, 1.0, 0.5).unwrap();
        let u = Field::new(|x: &Point| x.axial(), f64::INFINITY, Smoothness::Cinf);
        let dom = Domain::Box2 {
            axial: (0.0, 1.0),
            cross: (0.0, 1.0),
        };
        let mut q = quad();
        q.mc_samples = 1 << 18;
        let got = seminorm_s(&u, &dom, &spec, &q).unwrap();
        let oracle = box_pair_oracle(
            1.0,
            1.0,
            |r| spec.eval(r),
            |zt, _| zt * zt,
            &[(0.0, 0.5, spec.moment_exponent())],
        );
        let rel = (got.value * got.value - oracle).abs() / oracle;
        assert!(rel < 5e-3, "engine {} oracle {oracle} rel {rel}", got.value * got.value);
    }

    #[test]
    fn seminorm_t_d2_against_reduction_oracle() {
        // u = x_tilde on the flat collar (-delta,0) x (-1,1), beta=0, p=2
        let delta = 0.25;
        let spec = KernelSpec::new(2, 2.0, 0.0, delta).unwrap();
        let u = Field::new(|x: &Point| x.axial(), f64::INFINITY, Smoothness::Cinf);
        let dom = Domain::Strip {
            strip: StripDomain::collar(delta, 2).unwrap(),
            cross_clip: Some(1.0),
        };
        let mut q = quad();
        q.mc_samples = 1 << 18;
        let got = seminorm_t(&u, &dom, &spec, &q).unwrap();
        let w = PairWeight::Trace(spec);
        let r_max = (delta * delta + 4.0f64).sqrt();
        let oracle = box_pair_oracle(
            delta,
            2.0,
            |r| w.eval(r),
            |zt, _| zt * zt,
            &[(0.0, delta, 4.0), (delta, r_max, 1.0)],
        );
        let rel = (got.value * got.value - oracle).abs() / oracle;
        assert!(rel < 1e-2, "engine {} oracle {oracle} rel {rel}", got.value * got.value);
    }

    #[test]
    fn local_trace_symmetry_and_self_convergence() {
        // tent profile max(0, 1 - |s|) on the boundary of the d=2 half space
        let g = Field::new(
            |x: &Point| (1.0 - x.axial().abs()).max(0.0),
            1.0,
            Smoothness::C0,
        );
        let q = quad();
        let a = seminorm_local_trace(&g, 2, 2.0, &q, Some(8.0)).unwrap();
        let reflected = Field::new(
            |x: &Point| (1.0 - (-x.axial()).abs()).max(0.0),
            1.0,
            Smoothness::C0,
        );
        let b = seminorm_local_trace(&reflected, 2, 2.0, &q, Some(8.0)).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-9 * a.value);
        // self-convergence under refinement
        let coarse = seminorm_local_trace(&g, 2, 2.0, &q.coarser(), Some(8.0)).unwrap();
        assert!(
            (a.value - coarse.value).abs() < 1e-3 * a.value,
            "fine {} coarse {}",
            a.value,
            coarse.value
        );
        assert!(a.value.is_finite() && a.value > 0.0);
        // d = 1 rejected
        assert!(seminorm_local_trace(&g, 1, 2.0, &q, None).is_err());
    }

    #[test]
    fn local_trace_zero_on_constants() {
        // a constant has zero Gagliardo seminorm; use a compactly supported
        // constant-on-support field times zero to keep the support finite
        let g = Field::constant(0.0);
        let r = seminorm_local_trace(&g, 2, 2.0, &quad(), None).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
