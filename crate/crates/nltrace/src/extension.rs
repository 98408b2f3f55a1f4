//! Whitney-average extension operators: the strip operator `E^L` (low and
//! high singularity branches), the horizon-scaled operator `E`, the special
//! Lipschitz extension through the collar transforms, and the chart-composite
//! extension on bounded domains.
//!
//! All operators reproduce the input field exactly (same evaluation path) on
//! their collar domain, and evaluate the Whitney sum lazily: at any point only
//! the finitely many cubes whose bumps are supported there contribute, with
//! cube averages memoised per cube.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::field::Field;
use crate::geometry::{clone_profile, transform_g, ChartCover, GraphDomain};
use crate::kernels::KernelSpec;
use crate::point::Point;
use crate::quad::{adaptive_1d, QuadratureSpec, SeminormResult};
use crate::whitney::{bump_eval, map_m1, map_m2, supported_cubes_at, AxisBox, CoverKind, WhitneyCover, WhitneyCube};
use crate::{Error, Result};

/// Which singularity branch the extension runs in: `Low` pairs the Type I
/// cover with the full-height collar boxes (M1) for `beta < d`; `High` pairs
/// Type II with the reflection boxes (M2) for `beta > d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Low,
    High,
}

/// Configuration of the strip extension operators.
#[derive(Clone, Debug)]
pub struct ExtensionConfig {
    pub branch: Branch,
    /// Strip length `L = 2^m`; arbitrary positive inputs round up.
    pub strip_len: f64,
    /// Horizon cap `M` of the scaled operator: requires `delta < M`.
    pub cap: f64,
    pub quad: QuadratureSpec,
}

impl ExtensionConfig {
    pub fn new(branch: Branch, strip_len: f64, cap: f64, quad: QuadratureSpec) -> Result<Self> {
        if !(strip_len > 0.0) || !strip_len.is_finite() {
            return Err(Error::InvalidExtension(format!(
                "strip length {strip_len} must be positive and finite"
            )));
        }
        if !(cap > 0.0) {
            return Err(Error::InvalidExtension(format!("horizon cap {cap} must be positive")));
        }
        quad.validate()?;
        Ok(ExtensionConfig {
            branch,
            strip_len: round_up_pow2(strip_len),
            cap,
            quad,
        })
    }

    /// Choose the branch from the kernel's singularity order; `beta = d` is
    /// rejected outright (no extension branch exists there).
    pub fn for_spec(spec: &KernelSpec, strip_len: f64, cap: f64, quad: QuadratureSpec) -> Result<Self> {
        ExtensionConfig::new(branch_for(spec)?, strip_len, cap, quad)
    }

    /// Branch/spec consistency: the low branch serves `beta < d`, the high
    /// branch `beta > d`.
    pub fn check_spec(&self, spec: &KernelSpec) -> Result<()> {
        let want = branch_for(spec)?;
        if want != self.branch {
            return Err(Error::InvalidExtension(format!(
                "branch {:?} does not match beta = {} in dimension {}",
                self.branch,
                spec.beta(),
                spec.dim()
            )));
        }
        Ok(())
    }

    fn cover_kind(&self) -> CoverKind {
        match self.branch {
            Branch::Low => CoverKind::TypeI,
            Branch::High => CoverKind::TypeII,
        }
    }
}

pub fn branch_for(spec: &KernelSpec) -> Result<Branch> {
    let d = spec.dim() as f64;
    if (spec.beta() - d).abs() < 1e-12 {
        return Err(Error::InvalidExtension(
            "beta = d admits no extension branch".into(),
        ));
    }
    Ok(if spec.beta() < d { Branch::Low } else { Branch::High })
}

fn round_up_pow2(l: f64) -> f64 {
    let m = l.log2().ceil().max(0.0);
    (2.0f64).powi(m as i32)
}

/// Strip length `2^m` with `m = ceil(log2(cap / delta))`, the scale the
/// horizon-scaled operator works at.
pub fn scaled_strip_len(cap: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < cap) {
        return Err(Error::InvalidExtension(format!(
            "scaled extension requires 0 < delta < cap (delta={delta}, cap={cap})"
        )));
    }
    let m = (cap / delta).log2().ceil().max(1.0);
    Ok((2.0f64).powi(m as i32))
}

/// Mean value of `u` over an axis box contained in the unit collar
/// `(-1, 0) x R^(d-1)`, by tensor quadrature.
pub fn cube_average(u: &Field, bx: &AxisBox, quad: &QuadratureSpec) -> Result<SeminormResult> {
    if bx.axial.0 < -1.0 - 1e-12 || bx.axial.1 > 1e-12 {
        return Err(Error::InvalidExtension(format!(
            "averaging box axial range {:?} leaves the unit collar",
            bx.axial
        )));
    }
    let order = quad.order.max(8);
    let cells = 256usize;
    let mut n_evals = 0u64;
    let mut err_acc = 0.0f64;
    let (value, volume) = match bx.d {
        1 => {
            let mut f = |t: f64| u.eval(&Point::d1(t));
            let out = adaptive_1d(&mut f, bx.axial.0, bx.axial.1, &[], order, 1e-11, 1e-300, cells);
            n_evals += out.n_evals;
            err_acc += out.err;
            (out.value, bx.axial.1 - bx.axial.0)
        }
        2 => {
            let mut inner_err: f64 = 0.0;
            let mut outer = |c: f64| {
                let mut g = |t: f64| u.eval(&Point::d2(t, c));
                let out = adaptive_1d(&mut g, bx.axial.0, bx.axial.1, &[], order, 1e-11, 1e-300, cells);
                inner_err = inner_err.max(out.err);
                n_evals += out.n_evals;
                out.value
            };
            let (c0, c1) = bx.cross[0];
            let out = adaptive_1d(&mut outer, c0, c1, &[], order, 1e-11, 1e-300, cells);
            err_acc += out.err + inner_err * (c1 - c0);
            (out.value, (bx.axial.1 - bx.axial.0) * (c1 - c0))
        }
        3 => {
            let mut err1: f64 = 0.0;
            let mut err2: f64 = 0.0;
            let mut outer = |c2: f64| {
                let mut mid = |c1v: f64| {
                    let mut g = |t: f64| u.eval(&Point::d3(t, c1v, c2));
                    let out =
                        adaptive_1d(&mut g, bx.axial.0, bx.axial.1, &[], order, 1e-11, 1e-300, cells);
                    err1 = err1.max(out.err);
                    n_evals += out.n_evals;
                    out.value
                };
                let (c0, c1) = bx.cross[0];
                let out = adaptive_1d(&mut mid, c0, c1, &[], order, 1e-10, 1e-300, cells);
                err2 = err2.max(out.err + err1 * (c1 - c0));
                out.value
            };
            let (e0, e1) = bx.cross[1];
            let out = adaptive_1d(&mut outer, e0, e1, &[], order, 1e-10, 1e-300, cells);
            err_acc += out.err + err2 * (e1 - e0);
            (out.value, bx.volume())
        }
        d => return Err(Error::Unsupported(format!("cube averages in d = {d}"))),
    };
    if volume <= 0.0 {
        return Err(Error::InvalidExtension("degenerate averaging box".into()));
    }
    Ok(SeminormResult::new(value / volume, err_acc / volume, n_evals))
}

struct StripExtension {
    cover: WhitneyCover,
    u: Field,
    quad: QuadratureSpec,
    averages: Mutex<HashMap<WhitneyCube, f64>>,
}

impl StripExtension {
    fn average(&self, w: &WhitneyCube) -> f64 {
        if let Some(&v) = self.averages.lock().unwrap().get(w) {
            return v;
        }
        let bx = match self.cover.kind {
            CoverKind::TypeI => map_m1(w, self.cover.d),
            CoverKind::TypeII => map_m2(w, self.cover.d),
        };
        let v = cube_average(&self.u, &bx, &self.quad)
            .map(|r| r.value)
            .unwrap_or(0.0);
        self.averages.lock().unwrap().insert(*w, v);
        v
    }

    fn eval(&self, x: &Point) -> f64 {
        let t = x.axial();
        if t > -1.0 && t < 0.0 {
            return self.u.eval(x);
        }
        if t <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for w in supported_cubes_at(&self.cover, x) {
            acc += self.average(&w) * bump_eval(&self.cover, &w, x);
        }
        acc
    }
}

/// The strip extension `E^L`: the input restricted to the unit collar, the
/// bump-weighted cube averages above the boundary, zero beyond the cover
/// fringe. `d` is the ambient dimension.
pub fn extend_el(u: &Field, cfg: &ExtensionConfig, d: usize) -> Result<Field> {
    let cover = WhitneyCover::new(cfg.cover_kind(), cfg.strip_len, d)?;
    let state = Arc::new(StripExtension {
        cover,
        u: u.clone(),
        quad: cfg.quad,
        averages: Mutex::new(HashMap::new()),
    });
    let support = extension_support(u.support_radius(), cfg.strip_len, 1.0);
    Ok(Field::new(
        move |x: &Point| state.eval(x),
        support,
        crate::field::Smoothness::C0,
    ))
}

fn extension_support(r: f64, strip_len: f64, delta: f64) -> f64 {
    if r.is_infinite() {
        return f64::INFINITY;
    }
    let axial = delta * strip_len * 1.125 + delta;
    let cross = r + 1.5 * delta * strip_len.max(2.0);
    (axial * axial + cross * cross).sqrt()
}

/// The horizon-scaled extension `E`: rescale to the unit collar, extend with
/// `E^L` at `L = 2^ceil(log2(cap/delta))`, map back. Equals `u` on the collar
/// `R_{-delta}` through the identical evaluation path.
pub fn extend_e(u: &Field, spec: &KernelSpec, cfg: &ExtensionConfig) -> Result<Field> {
    cfg.check_spec(spec)?;
    let delta = spec.delta();
    let strip_len = scaled_strip_len(cfg.cap, delta)?;
    let mut inner_cfg = cfg.clone();
    inner_cfg.strip_len = strip_len;
    let v = u.rescale(delta);
    let el = extend_el(&v, &inner_cfg, spec.dim())?;
    let uu = u.clone();
    let support = extension_support(u.support_radius(), strip_len, delta);
    Ok(Field::new(
        move |x: &Point| {
            let t = x.axial();
            if t > -delta && t < 0.0 {
                return uu.eval(x);
            }
            el.eval(&x.scale(1.0 / delta))
        },
        support,
        crate::field::Smoothness::C0,
    ))
}

/// Special-Lipschitz extension: flatten the collar with the `G` pullback,
/// extend over the half space, and push back through the inverse gluing map.
/// Equals `u` on the graph collar.
pub fn extend_lipschitz(
    u: &Field,
    dom: &Arc<GraphDomain>,
    spec: &KernelSpec,
    cfg: &ExtensionConfig,
) -> Result<Field> {
    cfg.check_spec(spec)?;
    if dom.dim() != spec.dim() {
        return Err(Error::InvalidDomain(format!(
            "graph domain dimension {} does not match kernel dimension {}",
            dom.dim(),
            spec.dim()
        )));
    }
    if (dom.delta() - spec.delta()).abs() > 1e-12 * spec.delta() {
        return Err(Error::InvalidDomain(format!(
            "graph collar thickness {} does not match the kernel horizon {}",
            dom.delta(),
            spec.delta()
        )));
    }
    let gu = transform_g(dom, u);
    let e_gu = extend_e(&gu, spec, cfg)?;
    let dom = dom.clone();
    let uu = u.clone();
    let support = e_gu.support_radius();
    Ok(Field::new(
        move |x: &Point| {
            let c = x.cross();
            let phi = dom.phi(c);
            let t = x.axial();
            if t >= phi {
                // interior: the shear component of the inverse gluing map
                e_gu.eval(&x.with_axial(t - phi))
            } else if t > dom.psi(c) {
                uu.eval(x)
            } else {
                0.0
            }
        },
        support,
        crate::field::Smoothness::C0,
    ))
}

/// Chart-composite extension on a bounded domain: localise by the chart
/// cutoffs, extend each piece in its chart frame (zero outside that chart's
/// half space), and recombine with the normalised weights. Equals `u` on the
/// collar.
pub fn extend_general(
    u: &Field,
    cover: &ChartCover,
    spec: &KernelSpec,
    cfg: &ExtensionConfig,
) -> Result<Field> {
    cfg.check_spec(spec)?;
    let delta = spec.delta();
    if delta >= cover.epsilon {
        return Err(Error::InvalidExtension(format!(
            "horizon {delta} must stay below the chart shrink margin {}",
            cover.epsilon
        )));
    }
    if delta > cover.delta0 {
        return Err(Error::InvalidExtension(format!(
            "horizon {delta} exceeds the cover reach {}",
            cover.delta0
        )));
    }
    let graphs: Vec<Arc<GraphDomain>> = cover
        .charts
        .iter()
        .map(|ch| GraphDomain::new(clone_profile(&ch.phi), ch.lip, delta, cover.d))
        .collect::<Result<_>>()?;

    let mut locals: Vec<Field> = Vec::new();
    for (i, (ch, g)) in cover.charts.iter().zip(graphs.iter()).enumerate() {
        let cover_cl = cover.clone();
        let uu = u.clone();
        let ch_cl = ch.clone();
        let w_i = Field::new(
            move |loc: &Point| {
                let gx = ch_cl.global(loc);
                let l = cover_cl.lambda(i, &gx);
                if l == 0.0 {
                    0.0
                } else {
                    l * uu.eval(&gx)
                }
            },
            ch.radius,
            u.smoothness(),
        );
        locals.push(extend_lipschitz(&w_i, g, spec, cfg)?);
    }

    let cover = cover.clone();
    let uu = u.clone();
    let support = cover
        .charts
        .iter()
        .map(|ch| ch.center.norm() + ch.radius)
        .fold(0.0f64, f64::max)
        .max(u.support_radius().min(1e18));
    Ok(Field::new(
        move |x: &Point| {
            if cover.in_collar(x, &graphs) {
                return uu.eval(x);
            }
            let n = cover.charts.len();
            let lambdas: Vec<f64> = (0..n).map(|i| cover.lambda(i, x)).collect();
            let s: f64 = lambdas.iter().map(|l| l * l).sum();
            if s == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for (i, l) in lambdas.iter().enumerate() {
                if *l > 0.0 {
                    let loc = cover.charts[i].local(x);
                    acc += l / s * locals[i].eval(&loc);
                }
            }
            acc
        },
        support,
        crate::field::Smoothness::C0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Smoothness;
    use crate::geometry::disk_cover;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn cfg(branch: Branch, l: f64) -> ExtensionConfig {
        ExtensionConfig::new(branch, l, 1.0, quad()).unwrap()
    }

    #[test]
    fn cube_average_closed_forms() {
        let q = quad();
        // constant
        let c = Field::constant(4.25);
        let bx = AxisBox::new_2d((-1.0, 0.0), (3.0, 5.0));
        assert_abs_diff_eq!(cube_average(&c, &bx, &q).unwrap().value, 4.25, epsilon = 1e-12);
        // mean of the cross coordinate over (-1,0) x (0,1]
        let u = Field::new(|x: &Point| x.coord(1), f64::INFINITY, Smoothness::Cinf);
        let bx = AxisBox::new_2d((-1.0, 0.0), (0.0, 1.0));
        assert_abs_diff_eq!(cube_average(&u, &bx, &q).unwrap().value, 0.5, epsilon = 1e-10);
        // mean of x^2 over (-1, -1/2): 7/12
        let u = Field::new(|x: &Point| x.axial() * x.axial(), f64::INFINITY, Smoothness::Cinf);
        let bx = AxisBox::new_1d(-1.0, -0.5);
        assert_abs_diff_eq!(cube_average(&u, &bx, &q).unwrap().value, 7.0 / 12.0, epsilon = 1e-10);
        // boxes outside the unit collar are rejected
        let bx = AxisBox::new_1d(-1.5, -0.5);
        assert!(cube_average(&u, &bx, &q).is_err());
    }

    #[test]
    fn branch_selection_and_rejection() {
        let low = KernelSpec::new(2, 2.0, 0.5, 0.5).unwrap();
        let high = KernelSpec::new(2, 2.0, 3.0, 0.5).unwrap();
        let exact = KernelSpec::new(2, 2.0, 2.0, 0.5).unwrap();
        assert_eq!(branch_for(&low).unwrap(), Branch::Low);
        assert_eq!(branch_for(&high).unwrap(), Branch::High);
        assert!(branch_for(&exact).is_err());
        let c = cfg(Branch::Low, 2.0);
        assert!(c.check_spec(&high).is_err());
        assert!(c.check_spec(&low).is_ok());
    }

    #[test]
    fn strip_len_rounds_up_and_scaled_choice() {
        assert_eq!(cfg(Branch::Low, 3.0).strip_len, 4.0);
        assert_eq!(cfg(Branch::Low, 1.0).strip_len, 1.0);
        assert_eq!(scaled_strip_len(1.0, 0.25).unwrap(), 4.0);
        assert_eq!(scaled_strip_len(1.0, 0.2).unwrap(), 8.0);
        assert!(scaled_strip_len(1.0, 1.0).is_err());
    }

    #[test]
    fn extend_el_constant_is_constant_on_strip() {
        for branch in [Branch::Low, Branch::High] {
            let e = extend_el(&Field::constant(3.0), &cfg(branch, 4.0), 2).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
            for _ in 0..200 {
                let x = Point::d2(rng.gen_range(1e-3..4.0), rng.gen_range(-3.0..3.0));
                assert_abs_diff_eq!(e.eval(&x), 3.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn extend_el_restriction_is_bit_exact() {
        let u = Field::new(
            |x: &Point| (x.axial() * 7.3).sin() * (x.coord(1) + 0.2),
            10.0,
            Smoothness::Cinf,
        );
        let e = extend_el(&u, &cfg(Branch::High, 2.0), 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = Point::d2(rng.gen_range(-1.0 + 1e-9..-1e-9), rng.gen_range(-3.0..3.0));
            assert_eq!(e.eval(&x).to_bits(), u.eval(&x).to_bits());
        }
        // beyond the cover fringe the sum is empty
        assert_eq!(e.eval(&Point::d2(2.0 * 1.125 + 0.01, 0.0)), 0.0);
        assert_eq!(e.eval(&Point::d2(-1.5, 0.0)), 0.0);
    }

    #[test]
    fn extend_el_hand_computed_point() {
        // u = cross coordinate; at (0.5, 0.5) only the central base cube
        // contributes and its average is 1/2
        let u = Field::new(|x: &Point| x.coord(1), f64::INFINITY, Smoothness::Cinf);
        let e = extend_el(&u, &cfg(Branch::Low, 2.0), 2).unwrap();
        assert_abs_diff_eq!(e.eval(&Point::d2(0.5, 0.5)), 0.5, epsilon = 1e-6);
    }

    #[test]
    fn extend_el_linearity() {
        let u = Field::new(|x: &Point| (x.axial()).cos(), 8.0, Smoothness::Cinf);
        let v = Field::new(|x: &Point| x.coord(1) * 0.3, 8.0, Smoothness::Cinf);
        let c = cfg(Branch::Low, 2.0);
        let eu = extend_el(&u, &c, 2).unwrap();
        let ev = extend_el(&v, &c, 2).unwrap();
        let ew = extend_el(&u.linear_comb(2.0, &v, -3.0), &c, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let x = Point::d2(rng.gen_range(1e-3..2.2), rng.gen_range(-2.0..2.0));
            let lhs = ew.eval(&x);
            let rhs = 2.0 * eu.eval(&x) - 3.0 * ev.eval(&x);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn extend_e_restriction_and_constants() {
        let spec = KernelSpec::new(2, 2.0, 0.5, 0.25).unwrap();
        let c = ExtensionConfig::for_spec(&spec, 1.0, 1.0, quad()).unwrap();
        let u = Field::new(
            |x: &Point| x.axial() * 2.0 + (x.coord(1) * 3.0).cos(),
            6.0,
            Smoothness::Cinf,
        );
        let e = extend_e(&u, &spec, &c).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let x = Point::d2(rng.gen_range(-0.25 + 1e-9..-1e-9), rng.gen_range(-2.0..2.0));
            assert_eq!(e.eval(&x).to_bits(), u.eval(&x).to_bits());
        }
        // constants extend to constants over the scaled strip
        let ec = extend_e(&Field::constant(-2.0), &spec, &c).unwrap();
        for _ in 0..200 {
            let x = Point::d2(rng.gen_range(1e-4..0.9), rng.gen_range(-2.0..2.0));
            assert_abs_diff_eq!(ec.eval(&x), -2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn extend_lipschitz_flat_matches_extend_e() {
        let spec = KernelSpec::new(2, 2.0, 0.5, 0.25).unwrap();
        let c = ExtensionConfig::for_spec(&spec, 1.0, 1.0, quad()).unwrap();
        let dom = GraphDomain::flat(0.25, 2).unwrap();
        let u = Field::new(
            |x: &Point| (x.axial() * 1.7).sin() + 0.5 * x.coord(1),
            6.0,
            Smoothness::Cinf,
        );
        let a = extend_lipschitz(&u, &dom, &spec, &c).unwrap();
        let b = extend_e(&u, &spec, &c).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..400 {
            let x = Point::d2(rng.gen_range(-0.24..1.5), rng.gen_range(-2.0..2.0));
            if x.axial().abs() < 1e-6 {
                continue;
            }
            assert_abs_diff_eq!(a.eval(&x), b.eval(&x), epsilon = 1e-9);
        }
    }

    #[test]
    fn extend_lipschitz_restriction_and_constants_on_wedge() {
        let spec = KernelSpec::new(2, 2.0, 0.5, 0.2).unwrap();
        let c = ExtensionConfig::for_spec(&spec, 1.0, 1.0, quad()).unwrap();
        let dom = GraphDomain::wedge(0.6, 0.0, 0.2).unwrap();
        let u = Field::new(
            |x: &Point| x.axial() - 0.3 * x.coord(1),
            8.0,
            Smoothness::Cinf,
        );
        let e = extend_lipschitz(&u, &dom, &spec, &c).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let xb = rng.gen_range(-1.5..1.5);
            let (phi, psi) = (dom.phi(&[xb]), dom.psi(&[xb]));
            let t = psi + rng.gen_range(1e-6..1.0 - 1e-6) * (phi - psi);
            let x = Point::d2(t, xb);
            assert_eq!(e.eval(&x).to_bits(), u.eval(&x).to_bits());
        }
        let ec = extend_lipschitz(&Field::constant(9.0), &dom, &spec, &c).unwrap();
        for _ in 0..300 {
            let xb = rng.gen_range(-1.5..1.5);
            let t = dom.phi(&[xb]) + rng.gen_range(0.0..1.0);
            assert_abs_diff_eq!(ec.eval(&Point::d2(t, xb)), 9.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn extend_general_on_the_disk() {
        let spec = KernelSpec::new(2, 2.0, 0.5, 0.05).unwrap();
        let c = ExtensionConfig::for_spec(&spec, 1.0, 1.0, quad()).unwrap();
        let cover = disk_cover(1.0, 0.9, 0.1).unwrap();
        let cover_graphs: Vec<_> = cover
            .charts
            .iter()
            .map(|ch| GraphDomain::new(clone_profile(&ch.phi), ch.lip, 0.05, 2).unwrap())
            .collect();
        let u = Field::new(
            |x: &Point| 1.0 + 0.2 * x.coord(0) - 0.1 * x.coord(1),
            4.0,
            Smoothness::Cinf,
        );
        let e = extend_general(&u, &cover, &spec, &c).unwrap();
        // restriction on collar points (sampled around the ring)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..2000 {
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(1.0 + 1e-6..1.05 - 1e-6);
            let x = Point::d2(r * th.cos(), r * th.sin());
            if cover.in_collar(&x, &cover_graphs) {
                assert_eq!(e.eval(&x).to_bits(), u.eval(&x).to_bits());
                checked += 1;
            }
        }
        assert!(checked > 1000, "only {checked} collar points hit");
        // constants: exact on the collar; in the interior the lambda-localised
        // pieces recombine to a bounded value, approaching c continuously at
        // the rim for the high branch (whose extension is continuous there)
        let ec = extend_general(&Field::constant(2.0), &cover, &spec, &c).unwrap();
        for _ in 0..100 {
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = Point::d2(0.97 * th.cos(), 0.97 * th.sin());
            let v = ec.eval(&x);
            assert!(v.abs() <= 6.0, "interior value {v} out of the bounded band");
        }
        let spec_hi = KernelSpec::new(2, 2.0, 3.0, 0.05).unwrap();
        let c_hi = ExtensionConfig::for_spec(&spec_hi, 1.0, 1.0, quad()).unwrap();
        let ec_hi = extend_general(&Field::constant(2.0), &cover, &spec_hi, &c_hi).unwrap();
        for k in 0..32 {
            let th = std::f64::consts::TAU * k as f64 / 32.0;
            let x = Point::d2(0.9995 * th.cos(), 0.9995 * th.sin());
            let v = ec_hi.eval(&x);
            assert_abs_diff_eq!(v, 2.0, epsilon = 0.15);
        }
        // horizon must stay below the shrink margin
        let bad = KernelSpec::new(2, 2.0, 0.5, 0.2).unwrap();
        let cbad = ExtensionConfig::for_spec(&bad, 1.0, 1.0, quad()).unwrap();
        assert!(extend_general(&u, &cover, &bad, &cbad).is_err());
    }

    #[test]
    fn lambda_tilde_recombination_on_collar() {
        let cover = disk_cover(1.0, 0.9, 0.1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(1.0..1.04);
            let x = Point::d2(r * th.cos(), r * th.sin());
            let s: f64 = (0..cover.charts.len())
                .map(|i| cover.lambda_tilde(i, &x) * cover.lambda(i, &x))
                .sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }
}
