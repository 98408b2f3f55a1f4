//! Domain geometry: strips and half spaces with the axial-first convention,
//! special Lipschitz graph domains with their collar profile `psi`, the shear
//! and collar-flattening pullbacks, bi-Lipschitz distortion constants, and
//! chart covers of bounded domains.
//!
//! The paper's strip length symbol and Lipschitz constant collide on `L`;
//! here they are always `strip_len` and `lip`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::field::{smoothstep, Field};
use crate::point::Point;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Strips
// ---------------------------------------------------------------------------

/// The strip `R_a^L = (a, L) x R^(d-1)`. `strip_len` may be `f64::INFINITY`
/// for the half space; `upper = 0` with `a < 0` gives the collar `R_a`.
#[derive(Clone, Copy, Debug)]
pub struct StripDomain {
    pub a: f64,
    pub strip_len: f64,
    pub d: usize,
}

impl StripDomain {
    pub fn new(a: f64, strip_len: f64, d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidDomain(format!("dimension {d} out of range")));
        }
        if !(a < strip_len) {
            return Err(Error::InvalidDomain(format!(
                "strip requires a < upper bound (got a={a}, upper={strip_len})"
            )));
        }
        if !a.is_finite() {
            return Err(Error::InvalidDomain("strip lower bound must be finite".into()));
        }
        Ok(StripDomain { a, strip_len, d })
    }

    /// `R^L = (0, L) x R^(d-1)`.
    pub fn upper(strip_len: f64, d: usize) -> Result<Self> {
        StripDomain::new(0.0, strip_len, d)
    }

    /// The flat collar `R_{-delta} = (-delta, 0) x R^(d-1)`.
    pub fn collar(delta: f64, d: usize) -> Result<Self> {
        StripDomain::new(-delta, 0.0, d)
    }

    /// `R_{-delta}^inf`, the half space together with its collar.
    pub fn hat(delta: f64, d: usize) -> Result<Self> {
        StripDomain::new(-delta, f64::INFINITY, d)
    }

    pub fn contains(&self, x: &Point) -> bool {
        let t = x.axial();
        t > self.a && t < self.strip_len
    }
}

// ---------------------------------------------------------------------------
// Special Lipschitz graph domains
// ---------------------------------------------------------------------------

type Profile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The supergraph domain `Omega = { x_tilde > phi(x_bar) }` of a nonnegative
/// Lipschitz profile, together with the lower collar profile `psi` placed at
/// graph distance `delta` below it.
///
/// `psi` values are found by bisection against a sampled graph-distance
/// evaluator and memoised on a uniform grid of spacing `delta/32` with linear
/// interpolation in between.
pub struct GraphDomain {
    d: usize,
    phi: Profile,
    lip: f64,
    delta: f64,
    psi_cache: Mutex<HashMap<[i64; 2], f64>>,
}

impl GraphDomain {
    pub fn new<F>(phi: F, lip: f64, delta: f64, d: usize) -> Result<Arc<Self>>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidDomain(format!(
                "graph domains need d in {{2, 3}} (got {d})"
            )));
        }
        if !(lip >= 0.0) || !lip.is_finite() {
            return Err(Error::InvalidDomain(format!("Lipschitz constant {lip} invalid")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidDomain(format!("collar thickness {delta} invalid")));
        }
        Ok(Arc::new(GraphDomain {
            d,
            phi: Arc::new(phi),
            lip,
            delta,
            psi_cache: Mutex::new(HashMap::new()),
        }))
    }

    /// Flat boundary `phi = 0`; `psi` is exactly `-delta`.
    pub fn flat(delta: f64, d: usize) -> Result<Arc<Self>> {
        GraphDomain::new(|_| 0.0, 0.0, delta, d)
    }

    /// Tilted plane `phi(xb) = slope * xb + offset` (d = 2).
    pub fn tilt(slope: f64, offset: f64, delta: f64) -> Result<Arc<Self>> {
        GraphDomain::new(move |xb: &[f64]| slope * xb[0] + offset, slope.abs(), delta, 2)
    }

    /// Wedge `phi(xb) = slope * |xb| + offset` (d = 2).
    pub fn wedge(slope: f64, offset: f64, delta: f64) -> Result<Arc<Self>> {
        GraphDomain::new(
            move |xb: &[f64]| slope * xb[0].abs() + offset,
            slope.abs(),
            delta,
            2,
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }
    #[inline]
    pub fn lip(&self) -> f64 {
        self.lip
    }
    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn phi(&self, xbar: &[f64]) -> f64 {
        (self.phi)(xbar)
    }

    /// Distance from the point `(t, xbar)` to the graph of `phi`, by coarse
    /// sampling at resolution `delta/16` over the window radius
    /// `(1 + lip) * delta` followed by golden-section refinement.
    pub fn graph_dist(&self, t: f64, xbar: &[f64]) -> f64 {
        let window = (1.0 + self.lip) * self.delta;
        let step = self.delta / 16.0;
        let dist2 = |ybar: &[f64]| -> f64 {
            let dphi = (self.phi)(ybar) - t;
            let mut s = dphi * dphi;
            for (a, b) in xbar.iter().zip(ybar.iter()) {
                s += (a - b) * (a - b);
            }
            s
        };
        match self.d {
            2 => {
                let n = ((2.0 * window / step).ceil() as usize).max(4);
                let mut best_y = xbar[0];
                let mut best = dist2(&[best_y]);
                for i in 0..=n {
                    let y = xbar[0] - window + 2.0 * window * i as f64 / n as f64;
                    let v = dist2(&[y]);
                    if v < best {
                        best = v;
                        best_y = y;
                    }
                }
                let refined = golden_min(|y| dist2(&[y]), best_y - step, best_y + step);
                refined.1.min(best).sqrt()
            }
            3 => {
                // coarse grid, then two rounds of per-axis golden refinement
                let n = ((2.0 * window / step).ceil() as usize).max(4).min(96);
                let mut best = (xbar[0], xbar[1], dist2(&[xbar[0], xbar[1]]));
                for i in 0..=n {
                    let y0 = xbar[0] - window + 2.0 * window * i as f64 / n as f64;
                    for j in 0..=n {
                        let y1 = xbar[1] - window + 2.0 * window * j as f64 / n as f64;
                        let v = dist2(&[y0, y1]);
                        if v < best.2 {
                            best = (y0, y1, v);
                        }
                    }
                }
                let h = 2.0 * window / n as f64;
                let (mut y0, mut y1, mut v) = best;
                for _ in 0..2 {
                    let r0 = golden_min(|y| dist2(&[y, y1]), y0 - h, y0 + h);
                    y0 = r0.0;
                    let r1 = golden_min(|y| dist2(&[y0, y]), y1 - h, y1 + h);
                    y1 = r1.0;
                    v = v.min(r1.1);
                }
                v.sqrt()
            }
            _ => unreachable!(),
        }
    }

    /// The collar profile value `psi(xbar)`: the smallest `t` in
    /// `[-delta, phi(xbar))` at graph distance exactly `delta`, located by a
    /// coarse march and bisection to `1e-10 * delta`.
    pub fn psi_exact(&self, xbar: &[f64]) -> Result<f64> {
        let delta = self.delta;
        let phi = (self.phi)(xbar);
        let g = |t: f64| self.graph_dist(t, xbar) - delta;
        // Anything at or below (window minimum of phi) - delta is at graph
        // distance >= delta: in-window graph points sit at least delta higher,
        // out-of-window ones are at least (1+lip) delta away horizontally.
        let window = (1.0 + self.lip) * delta;
        let mut phi_min = phi;
        let n = ((32.0 * (1.0 + self.lip)).ceil() as usize).max(8);
        match self.d {
            2 => {
                for i in 0..=n {
                    let y = xbar[0] - window + 2.0 * window * i as f64 / n as f64;
                    phi_min = phi_min.min((self.phi)(&[y]));
                }
            }
            3 => {
                for i in 0..=n {
                    let y0 = xbar[0] - window + 2.0 * window * i as f64 / n as f64;
                    for j in 0..=n {
                        let y1 = xbar[1] - window + 2.0 * window * j as f64 / n as f64;
                        phi_min = phi_min.min((self.phi)(&[y0, y1]));
                    }
                }
            }
            _ => unreachable!(),
        }
        let t0 = (-delta).min(phi_min - 1.001 * delta);
        let g0 = g(t0);
        if g0 < -1e-7 * delta {
            return Err(Error::GeometryFault(format!(
                "graph distance at the collar floor is {:.3e} below delta",
                -g0
            )));
        }
        // march towards phi looking for the first sign change
        let step = delta / 16.0;
        let mut a = t0;
        let mut ga = g0.max(0.0);
        let mut found = None;
        let mut t = t0;
        while t < phi {
            let next = (t + step).min(phi - 1e-14 * delta.max(phi.abs()));
            if next <= t {
                break;
            }
            let gn = g(next);
            if ga >= 0.0 && gn < 0.0 {
                found = Some((a, next));
                break;
            }
            a = next;
            ga = gn;
            t = next;
        }
        let (mut lo, mut hi) = match found {
            Some(br) => br,
            None => {
                return Err(Error::GeometryFault(
                    "could not bracket the graph distance crossing".into(),
                ))
            }
        };
        while hi - lo > 1e-10 * delta {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Memoised `psi` with linear interpolation on the `delta/32` grid.
    pub fn psi(&self, xbar: &[f64]) -> f64 {
        let h = self.delta / 32.0;
        let node = |k: [i64; 2]| -> f64 {
            {
                let cache = self.psi_cache.lock().unwrap();
                if let Some(&v) = cache.get(&k) {
                    return v;
                }
            }
            let y = [k[0] as f64 * h, k[1] as f64 * h];
            let v = self
                .psi_exact(&y[..self.d - 1])
                .expect("psi bisection cannot bracket; profile violates the collar geometry");
            self.psi_cache.lock().unwrap().insert(k, v);
            v
        };
        match self.d {
            2 => {
                let s = xbar[0] / h;
                let j = s.floor();
                let f = s - j;
                let j = j as i64;
                let a = node([j, 0]);
                let b = node([j + 1, 0]);
                a * (1.0 - f) + b * f
            }
            3 => {
                let s0 = xbar[0] / h;
                let s1 = xbar[1] / h;
                let (j0, j1) = (s0.floor(), s1.floor());
                let (f0, f1) = (s0 - j0, s1 - j1);
                let (j0, j1) = (j0 as i64, j1 as i64);
                let v00 = node([j0, j1]);
                let v10 = node([j0 + 1, j1]);
                let v01 = node([j0, j1 + 1]);
                let v11 = node([j0 + 1, j1 + 1]);
                v00 * (1.0 - f0) * (1.0 - f1)
                    + v10 * f0 * (1.0 - f1)
                    + v01 * (1.0 - f0) * f1
                    + v11 * f0 * f1
            }
            _ => unreachable!(),
        }
    }

    /// `Omega`: strictly above the graph.
    pub fn in_interior(&self, x: &Point) -> bool {
        x.axial() > self.phi(x.cross())
    }

    /// `Omega_delta`: between `psi` and `phi`.
    pub fn in_collar(&self, x: &Point) -> bool {
        let t = x.axial();
        let c = x.cross();
        t < self.phi(c) && t > self.psi(c)
    }
}

impl std::fmt::Debug for GraphDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphDomain")
            .field("d", &self.d)
            .field("lip", &self.lip)
            .field("delta", &self.delta)
            .finish()
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm).min(fc).min(fd))
}

// ---------------------------------------------------------------------------
// Transforms P, G, S between a graph domain and the flat strip
// ---------------------------------------------------------------------------

fn transformed_support(dom: &GraphDomain, u: &Field) -> f64 {
    let r = u.support_radius();
    if r.is_infinite() {
        return f64::INFINITY;
    }
    let phi0 = dom.phi(&[0.0, 0.0][..dom.dim() - 1]).abs();
    (2.0 + dom.lip) * r + phi0 + dom.delta
}

/// Shear pullback `(P u)(x) = u(x_tilde + phi(x_bar), x_bar)`, mapping fields
/// on `Omega` to fields on the half space.
pub fn transform_p(dom: &Arc<GraphDomain>, u: &Field) -> Field {
    let d = dom.dim();
    let dom = dom.clone();
    let uu = u.clone();
    let r = transformed_support(&dom, u);
    let sm = u.smoothness();
    Field::new(
        move |x: &Point| {
            debug_assert_eq!(x.dim(), d);
            let shifted = x.with_axial(x.axial() + dom.phi(x.cross()));
            uu.eval(&shifted)
        },
        r,
        sm,
    )
}

/// Collar-flattening pullback
/// `(G u)(x) = u((1 + x_tilde/delta) phi(x_bar) - (x_tilde/delta) psi(x_bar), x_bar)`
/// mapping fields on `Omega_delta` to fields on the flat collar `R_{-delta}`.
/// Evaluation outside `-delta < x_tilde < 0` is a contract violation and
/// panics.
pub fn transform_g(dom: &Arc<GraphDomain>, u: &Field) -> Field {
    let dom = dom.clone();
    let uu = u.clone();
    let r = transformed_support(&dom, u);
    let sm = u.smoothness();
    Field::new(
        move |x: &Point| {
            let t = x.axial();
            let delta = dom.delta();
            assert!(
                t > -delta && t < 0.0,
                "G pullback evaluated at x_tilde = {t}, outside (-{delta}, 0)"
            );
            let c = x.cross();
            let s = t / delta;
            let target = (1.0 + s) * dom.phi(c) - s * dom.psi(c);
            uu.eval(&x.with_axial(target))
        },
        r,
        sm,
    )
}

/// Inverse of [`transform_g`]: maps fields on the flat collar back to the
/// graph collar via `x_tilde = delta (x_tilde' - phi) / (phi - psi)`.
pub fn transform_g_inv(dom: &Arc<GraphDomain>, u: &Field) -> Field {
    let dom = dom.clone();
    let uu = u.clone();
    let r = transformed_support(&dom, u);
    let sm = u.smoothness();
    Field::new(
        move |x: &Point| {
            let c = x.cross();
            let phi = dom.phi(c);
            let psi = dom.psi(c);
            let tp = x.axial();
            assert!(
                tp > psi && tp < phi,
                "inverse G pullback evaluated outside the collar (x_tilde' = {tp})"
            );
            let t = dom.delta() * (tp - phi) / (phi - psi);
            uu.eval(&x.with_axial(t))
        },
        r,
        sm,
    )
}

/// Piecewise glue `S = P` on the half space, `G` on the flat collar, mapping
/// fields on `Omega_hat` to fields on `R_{-delta}^inf`.
pub fn transform_s(dom: &Arc<GraphDomain>, u: &Field) -> Field {
    let p = transform_p(dom, u);
    let g = transform_g(dom, u);
    let r = p.support_radius().max(g.support_radius());
    let sm = u.smoothness();
    Field::new(
        move |x: &Point| {
            if x.axial() >= 0.0 {
                p.eval(x)
            } else {
                g.eval(x)
            }
        },
        r,
        sm,
    )
}

/// Inverse of [`transform_s`], defined piecewise on `Omega` and `Omega_delta`;
/// zero below the collar floor.
pub fn transform_s_inv(dom: &Arc<GraphDomain>, u: &Field) -> Field {
    let dom2 = dom.clone();
    let uu = u.clone();
    let r = transformed_support(dom, u);
    let sm = u.smoothness();
    Field::new(
        move |x: &Point| {
            let c = x.cross();
            let phi = dom2.phi(c);
            let tp = x.axial();
            if tp >= phi {
                uu.eval(&x.with_axial(tp - phi))
            } else {
                let psi = dom2.psi(c);
                if tp <= psi {
                    0.0
                } else {
                    let t = dom2.delta() * (tp - phi) / (phi - psi);
                    uu.eval(&x.with_axial(t))
                }
            }
        },
        r,
        sm,
    )
}

// ---------------------------------------------------------------------------
// Distortion constants
// ---------------------------------------------------------------------------

/// Bi-Lipschitz constants of the collar map and the kernel comparison
/// factors, as functions of the profile's Lipschitz constant.
#[derive(Clone, Copy, Debug)]
pub struct DistortionConstants {
    /// Upper bi-Lipschitz constant `K_L = L + 1 + 3 sqrt(L^2+1)`.
    pub k_fwd: f64,
    /// Lower bi-Lipschitz constant `K'_L = 1 / (3L + 2)`.
    pub k_bwd: f64,
    /// Forward kernel comparison factor `max(L + 1 + sqrt(L^2+1), K_L)`.
    pub m_fwd: f64,
    /// Inverse kernel comparison factor `max(L + 2, K'_L)`.
    pub m_bwd: f64,
}

pub fn distortion_constants(lip: f64) -> DistortionConstants {
    assert!(lip >= 0.0);
    let root = (lip * lip + 1.0).sqrt();
    let k_fwd = lip + 1.0 + 3.0 * root;
    let k_bwd = 1.0 / (3.0 * lip + 2.0);
    DistortionConstants {
        k_fwd,
        k_bwd,
        m_fwd: (lip + 1.0 + root).max(k_fwd),
        m_bwd: (lip + 2.0).max(k_bwd),
    }
}

/// Collar coordinate change `x -> x'` of the flattening map (the same map
/// whose pullback is `G`), exposed for sampled distortion checks.
pub fn collar_map(dom: &GraphDomain, x: &Point) -> Point {
    let t = x.axial();
    let c = x.cross();
    let s = t / dom.delta();
    x.with_axial((1.0 + s) * dom.phi(c) - s * dom.psi(c))
}

/// Sampled range of `|x' - y'| / |x - y|` over random pairs in the flat
/// collar, for comparison against `[k_bwd, k_fwd]`.
pub fn sample_distortion(
    dom: &Arc<GraphDomain>,
    cross_window: f64,
    pairs: usize,
    seed: u64,
) -> (f64, f64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let delta = dom.delta();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    let dcross = dom.dim() - 1;
    for _ in 0..pairs {
        let mut sample = || {
            let t = -delta * rng.gen_range(1e-6..1.0 - 1e-6);
            let mut coords = vec![t];
            for _ in 0..dcross {
                coords.push(rng.gen_range(-cross_window..cross_window));
            }
            Point::new(&coords)
        };
        let x = sample();
        let y = sample();
        let dist = x.dist(&y);
        if dist < 1e-9 * delta {
            continue;
        }
        let ratio = collar_map(dom, &x).dist(&collar_map(dom, &y)) / dist;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo, hi)
}

// ---------------------------------------------------------------------------
// Chart covers of bounded domains
// ---------------------------------------------------------------------------

/// Orthonormal local frame of a chart: `axial` points into the domain.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    axial: [f64; 3],
    cross: [[f64; 3]; 2],
    dim: usize,
}

impl Frame {
    /// d = 2 frame from the inward normal direction.
    pub fn from_inward_normal_2d(nx: f64, ny: f64) -> Frame {
        let n = (nx * nx + ny * ny).sqrt();
        let (nx, ny) = (nx / n, ny / n);
        Frame {
            axial: [nx, ny, 0.0],
            cross: [[-ny, nx, 0.0], [0.0, 0.0, 0.0]],
            dim: 2,
        }
    }

    pub fn to_local(&self, rel: &Point) -> Point {
        let dot = |a: &[f64; 3]| a[0] * rel.coord(0) + a[1] * rel.coord(1) + a[2] * rel.coord(2);
        match self.dim {
            2 => Point::d2(dot(&self.axial), dot(&self.cross[0])),
            _ => Point::d3(dot(&self.axial), dot(&self.cross[0]), dot(&self.cross[1])),
        }
    }

    pub fn to_global_rel(&self, local: &Point) -> Point {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = local.coord(0) * self.axial[i];
        }
        let cr = local.cross();
        for (k, c) in cr.iter().enumerate() {
            for i in 0..3 {
                out[i] += c * self.cross[k][i];
            }
        }
        Point::new(&out[..self.dim])
    }
}

/// One boundary chart: a ball around a boundary point together with the local
/// frame in which the boundary is the graph of `phi`.
#[derive(Clone)]
pub struct Chart {
    pub center: Point,
    pub radius: f64,
    pub frame: Frame,
    pub phi: Profile,
    pub lip: f64,
}

impl Chart {
    pub fn local(&self, x: &Point) -> Point {
        let rel = Point::new(
            &(0..x.dim())
                .map(|i| x.coord(i) - self.center.coord(i))
                .collect::<Vec<_>>(),
        );
        self.frame.to_local(&rel)
    }

    pub fn global(&self, local: &Point) -> Point {
        let rel = self.frame.to_global_rel(local);
        Point::new(
            &(0..local.dim())
                .map(|i| self.center.coord(i) + rel.coord(i))
                .collect::<Vec<_>>(),
        )
    }
}

impl std::fmt::Debug for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Chart")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .field("lip", &self.lip)
            .finish()
    }
}

/// A finite family of boundary charts covering the collar of a bounded
/// domain, with shrink margin `epsilon` and cover reach `delta0`.
#[derive(Clone, Debug)]
pub struct ChartCover {
    pub charts: Vec<Chart>,
    pub epsilon: f64,
    pub delta0: f64,
    pub d: usize,
}

impl ChartCover {
    pub fn new(charts: Vec<Chart>, epsilon: f64, delta0: f64, d: usize) -> Result<Self> {
        if charts.is_empty() {
            return Err(Error::InvalidCover("no charts supplied".into()));
        }
        if !(epsilon > 0.0) || !(delta0 > 0.0) {
            return Err(Error::InvalidCover(
                "epsilon and delta0 must be positive".into(),
            ));
        }
        for (i, ch) in charts.iter().enumerate() {
            if ch.radius <= 2.0 * epsilon {
                return Err(Error::InvalidCover(format!(
                    "chart {i} radius {} not larger than 2 epsilon = {}",
                    ch.radius,
                    2.0 * epsilon
                )));
            }
            if ch.center.dim() != d {
                return Err(Error::InvalidCover(format!("chart {i} dimension mismatch")));
            }
        }
        Ok(ChartCover {
            charts,
            epsilon,
            delta0,
            d,
        })
    }

    /// Smooth chart cutoff: 1 on `B(c_i, r_i - 2 eps)`, 0 outside
    /// `B(c_i, r_i - eps)`.
    pub fn lambda(&self, i: usize, x: &Point) -> f64 {
        let ch = &self.charts[i];
        let r = x.dist(&ch.center);
        1.0 - smoothstep((r - (ch.radius - 2.0 * self.epsilon)) / self.epsilon)
    }

    /// Normalised recombination weight `lambda_i / sum_j lambda_j^2`;
    /// zero where no chart is active.
    pub fn lambda_tilde(&self, i: usize, x: &Point) -> f64 {
        let s: f64 = (0..self.charts.len())
            .map(|j| {
                let l = self.lambda(j, x);
                l * l
            })
            .sum();
        if s == 0.0 {
            0.0
        } else {
            self.lambda(i, x) / s
        }
    }

    /// Membership in the collar `Omega_delta`, decided chart-locally. Valid
    /// for `delta <= delta0` on covers that pass validation.
    pub fn in_collar(&self, x: &Point, graphs: &[Arc<GraphDomain>]) -> bool {
        for (ch, g) in self.charts.iter().zip(graphs.iter()) {
            if x.dist(&ch.center) < ch.radius - 2.0 * self.epsilon {
                let loc = ch.local(x);
                if g.in_collar(&loc) {
                    return true;
                }
            }
        }
        false
    }

    /// Sampled validation of the cover conditions: every collar point seen
    /// from one chart must lie inside the shrunken ball union, and
    /// overlapping charts must agree on collar membership.
    pub fn validate(&self, delta: f64, samples: usize, seed: u64) -> Result<()> {
        use rand::{Rng, SeedableRng};
        if delta > self.delta0 {
            return Err(Error::InvalidCover(format!(
                "delta {delta} exceeds the cover reach delta0 {}",
                self.delta0
            )));
        }
        let graphs: Vec<_> = self
            .charts
            .iter()
            .map(|ch| GraphDomain::new(clone_profile(&ch.phi), ch.lip, delta, self.d))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let i = rng.gen_range(0..self.charts.len());
            let ch = &self.charts[i];
            let g = &graphs[i];
            // sample a collar point of chart i near its center
            let w = 0.5 * (ch.radius - 2.0 * self.epsilon);
            let xb = rng.gen_range(-w..w);
            let phi = g.phi(&[xb]);
            let psi = g.psi(&[xb]);
            let t = rng.gen_range(0.0..1.0);
            let loc = Point::d2(psi + t * (phi - psi), xb);
            let gx = ch.global(&loc);
            if gx.dist(&ch.center) >= ch.radius - 2.0 * self.epsilon {
                continue; // sampled outside the shrunken ball; not this chart's responsibility
            }
            // the union of shrunken balls must contain it
            let covered = self
                .charts
                .iter()
                .any(|c| gx.dist(&c.center) < c.radius - 2.0 * self.epsilon);
            if !covered {
                return Err(Error::InvalidCover(format!(
                    "collar point {gx} escapes the shrunken ball union"
                )));
            }
            // overlapping charts must agree that it is collar
            for (j, (cj, gj)) in self.charts.iter().zip(graphs.iter()).enumerate() {
                if j != i && gx.dist(&cj.center) < cj.radius - 2.0 * self.epsilon {
                    let lj = cj.local(&gx);
                    if !gj.in_collar(&lj) {
                        return Err(Error::InvalidCover(format!(
                            "charts {i} and {j} disagree on collar membership at {gx}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn clone_profile(p: &Profile) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
    let p = p.clone();
    move |xb: &[f64]| p(xb)
}

/// Four-chart cover of the disk of radius `r` centred at the origin (d = 2):
/// one chart per axis direction, boundary expressed as the local graph
/// `phi(xb) = r - sqrt(r^2 - xb^2)`.
pub fn disk_cover(r: f64, chart_radius: f64, epsilon: f64) -> Result<ChartCover> {
    if !(r > 0.0) {
        return Err(Error::InvalidCover("disk radius must be positive".into()));
    }
    let mut charts = Vec::new();
    for (nx, ny) in [(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)] {
        // boundary point with inward normal (nx, ny)
        let center = Point::d2(-nx * r, -ny * r);
        let rr = r;
        let phi = move |xb: &[f64]| {
            let s = xb[0].abs().min(rr * 0.999_999);
            rr - (rr * rr - s * s).sqrt()
        };
        charts.push(Chart {
            center,
            radius: chart_radius,
            frame: Frame::from_inward_normal_2d(nx, ny),
            phi: Arc::new(phi),
            lip: chart_lip(r, chart_radius),
            });
    }
    // cover reach: the four shrunken balls must still cover the collar
    let delta0 = 0.25 * chart_radius;
    ChartCover::new(charts, epsilon, delta0, 2)
}

fn chart_lip(r: f64, chart_radius: f64) -> f64 {
    // slope of the circular graph at the edge of the chart window
    let s = (chart_radius / r).min(0.9);
    s / (1.0 - s * s).sqrt()
}

// ---------------------------------------------------------------------------
// Integration domains
// ---------------------------------------------------------------------------

/// A geometric region over which norms and seminorms are taken.
///
/// Unbounded strips are clipped to the field's support (inflated by the
/// horizon) before integration; `cross_clip` pins the cross-sectional window
/// explicitly when a study needs matched windows across scales.
#[derive(Clone, Debug)]
pub enum Domain {
    /// d = 1 interval `(a, b)`.
    Interval { a: f64, b: f64 },
    /// `R_a^L x R^(d-1)`, optionally with a fixed cross window `[-c, c]`.
    Strip {
        strip: StripDomain,
        cross_clip: Option<f64>,
    },
    /// d = 2 axis box (axial range) x (cross range).
    Box2 { axial: (f64, f64), cross: (f64, f64) },
    /// Collar `Omega_delta` of a graph domain.
    GraphCollar(Arc<GraphDomain>),
    /// Interior `Omega` of a graph domain.
    GraphInterior(Arc<GraphDomain>),
    /// `Omega_hat = Omega union Omega_delta` of a graph domain.
    GraphHat(Arc<GraphDomain>),
    /// d = 2 ring `r_inner <= |x - c| < r_outer` (collar of a disk).
    Annulus {
        center: Point,
        r_inner: f64,
        r_outer: f64,
    },
    /// d = 2 ball `|x - c| < radius` (disk together with its collar).
    Ball { center: Point, radius: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Strip { strip, .. } => strip.d,
            Domain::Box2 { .. } => 2,
            Domain::GraphCollar(g) | Domain::GraphInterior(g) | Domain::GraphHat(g) => g.dim(),
            Domain::Annulus { .. } | Domain::Ball { .. } => 2,
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Domain::Interval { a, b } => x.axial() > *a && x.axial() < *b,
            Domain::Strip { strip, cross_clip } => {
                strip.contains(x)
                    && cross_clip.map_or(true, |c| x.cross().iter().all(|v| v.abs() <= c))
            }
            Domain::Box2 { axial, cross } => {
                let t = x.axial();
                let c = x.coord(1);
                t > axial.0 && t < axial.1 && c > cross.0 && c < cross.1
            }
            Domain::GraphCollar(g) => g.in_collar(x),
            Domain::GraphInterior(g) => g.in_interior(x),
            Domain::GraphHat(g) => {
                let t = x.axial();
                t > g.psi(x.cross()) && (g.in_interior(x) || t < g.phi(x.cross()))
            }
            Domain::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = x.dist(center);
                r >= *r_inner && r < *r_outer
            }
            Domain::Ball { center, radius } => x.dist(center) < *radius,
        }
    }

    /// Effective d = 1 interval after clipping to the support ball inflated
    /// by `pad`.
    pub(crate) fn interval_clipped(&self, support: f64, pad: f64) -> Result<(f64, f64)> {
        let clip = support + pad;
        match self {
            Domain::Interval { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidDomain("interval must be bounded".into()));
                }
                Ok((*a, *b))
            }
            Domain::Strip { strip, cross_clip: _ } if strip.d == 1 => {
                let lo = strip.a.max(-clip);
                let hi = strip.strip_len.min(clip);
                if !hi.is_finite() || !lo.is_finite() {
                    return Err(Error::InvalidDomain(
                        "unbounded effective region: field has no finite support".into(),
                    ));
                }
                Ok((lo, hi))
            }
            _ => Err(Error::InvalidDomain(format!(
                "domain {self:?} is not one-dimensional"
            ))),
        }
    }

    /// Effective d = 2 sampling region after support clipping.
    pub(crate) fn region2(&self, support: f64, pad: f64) -> Result<Region2> {
        let clip = support + pad;
        let finite = |v: f64| -> Result<f64> {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidDomain(
                    "unbounded effective region: field has no finite support".into(),
                ))
            }
        };
        match self {
            Domain::Strip { strip, cross_clip } if strip.d == 2 => {
                let c = cross_clip.unwrap_or(clip);
                Ok(Region2::Profile {
                    c0: finite(-c)?,
                    c1: finite(c)?,
                    lo: Prof::Const(strip.a.max(-clip)),
                    hi: Prof::Const(finite(strip.strip_len.min(clip))?),
                })
            }
            Domain::Box2 { axial, cross } => Ok(Region2::Profile {
                c0: finite(cross.0)?,
                c1: finite(cross.1)?,
                lo: Prof::Const(finite(axial.0)?),
                hi: Prof::Const(finite(axial.1)?),
            }),
            Domain::GraphCollar(g) => Ok(Region2::Profile {
                c0: finite(-clip)?,
                c1: finite(clip)?,
                lo: Prof::Psi(g.clone()),
                hi: Prof::Phi(g.clone()),
            }),
            Domain::GraphInterior(g) => Ok(Region2::Profile {
                c0: finite(-clip)?,
                c1: finite(clip)?,
                lo: Prof::Phi(g.clone()),
                hi: Prof::Const(finite(clip)?),
            }),
            Domain::GraphHat(g) => Ok(Region2::Profile {
                c0: finite(-clip)?,
                c1: finite(clip)?,
                lo: Prof::Psi(g.clone()),
                hi: Prof::Const(finite(clip)?),
            }),
            Domain::Annulus {
                center,
                r_inner,
                r_outer,
            } => Ok(Region2::Radial {
                center: *center,
                r0: *r_inner,
                r1: finite(*r_outer)?,
            }),
            Domain::Ball { center, radius } => Ok(Region2::Radial {
                center: *center,
                r0: 0.0,
                r1: finite(*radius)?,
            }),
            _ => Err(Error::InvalidDomain(format!(
                "domain {self:?} is not two-dimensional"
            ))),
        }
    }
}

/// Axial profile bounding a 2-D region from below or above.
#[derive(Clone)]
pub(crate) enum Prof {
    Const(f64),
    Phi(Arc<GraphDomain>),
    Psi(Arc<GraphDomain>),
}

impl Prof {
    #[inline]
    pub(crate) fn eval(&self, xb: f64) -> f64 {
        match self {
            Prof::Const(v) => *v,
            Prof::Phi(g) => g.phi(&[xb]),
            Prof::Psi(g) => g.psi(&[xb]),
        }
    }
}

/// Bounded d = 2 region with a uniform sampling map from the unit square.
#[derive(Clone)]
pub(crate) enum Region2 {
    /// `{ (t, c) : c0 < c < c1, lo(c) < t < hi(c) }`.
    Profile {
        c0: f64,
        c1: f64,
        lo: Prof,
        hi: Prof,
    },
    /// `{ r0 <= |x - center| < r1 }`.
    Radial { center: Point, r0: f64, r1: f64 },
}

impl Region2 {
    /// Map `(t1, t2)` in the unit square to a point and the sampling
    /// Jacobian (so that `E[f(x) jac]` over the square equals the area
    /// integral of `f`).
    #[inline]
    pub(crate) fn sample(&self, t1: f64, t2: f64) -> (Point, f64) {
        match self {
            Region2::Profile { c0, c1, lo, hi } => {
                let c = c0 + t1 * (c1 - c0);
                let l = lo.eval(c);
                let h = hi.eval(c);
                let thick = (h - l).max(0.0);
                let t = l + t2 * thick;
                (Point::d2(t, c), (c1 - c0) * thick)
            }
            Region2::Radial { center, r0, r1 } => {
                let rho = (r0 * r0 + t2 * (r1 * r1 - r0 * r0)).sqrt();
                let th = 2.0 * std::f64::consts::PI * t1;
                let p = Point::d2(
                    center.coord(0) + rho * th.cos(),
                    center.coord(1) + rho * th.sin(),
                );
                (p, std::f64::consts::PI * (r1 * r1 - r0 * r0))
            }
        }
    }

    #[inline]
    pub(crate) fn contains(&self, x: &Point) -> bool {
        match self {
            Region2::Profile { c0, c1, lo, hi } => {
                let c = x.coord(1);
                if c < *c0 || c > *c1 {
                    return false;
                }
                let t = x.axial();
                t > lo.eval(c) && t < hi.eval(c)
            }
            Region2::Radial { center, r0, r1 } => {
                let r = x.dist(center);
                r >= *r0 && r < *r1
            }
        }
    }

    /// Upper bound on the distance between any two points of the region.
    pub(crate) fn diam_bound(&self) -> f64 {
        match self {
            Region2::Profile { c0, c1, lo, hi } => {
                // probe the profiles over the cross range
                let mut tmin = f64::INFINITY;
                let mut tmax = f64::NEG_INFINITY;
                for i in 0..=64 {
                    let c = c0 + (c1 - c0) * i as f64 / 64.0;
                    tmin = tmin.min(lo.eval(c));
                    tmax = tmax.max(hi.eval(c));
                }
                ((c1 - c0).powi(2) + (tmax - tmin).powi(2)).sqrt()
            }
            Region2::Radial { r1, .. } => 2.0 * r1,
        }
    }

    /// Cross positions where the bounding profiles may kink.
    pub(crate) fn cross_breaks(&self) -> Vec<f64> {
        match self {
            Region2::Profile { lo, hi, .. } => {
                let mut v = Vec::new();
                if !matches!(lo, Prof::Const(_)) || !matches!(hi, Prof::Const(_)) {
                    v.push(0.0);
                }
                v
            }
            Region2::Radial { .. } => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Smoothness;
    use approx::assert_abs_diff_eq;

    #[test]
    fn strip_constructors() {
        let s = StripDomain::hat(0.5, 2).unwrap();
        assert!(s.contains(&Point::d2(3.0, -7.0)));
        assert!(s.contains(&Point::d2(-0.4, 0.0)));
        assert!(!s.contains(&Point::d2(-0.6, 0.0)));
        assert!(StripDomain::new(1.0, 0.5, 2).is_err());
    }

    #[test]
    fn psi_flat_is_minus_delta() {
        let dom = GraphDomain::flat(1.0, 2).unwrap();
        for &xb in &[-2.0, 0.0, 0.3, 11.0] {
            let v = dom.psi_exact(&[xb]).unwrap();
            assert_abs_diff_eq!(v, -1.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(dom.psi(&[0.17]), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn psi_tilt_matches_point_to_line_distance() {
        // phi(xb) = a xb; the line offset at distance delta below is
        // psi(xb) = a xb - delta sqrt(1 + a^2)
        let a = 0.75;
        let dom = GraphDomain::tilt(a, 0.0, 1.0).unwrap();
        let expected = |xb: f64| a * xb - (1.0 + a * a).sqrt();
        for &xb in &[-1.0, 0.0, 2.0] {
            let v = dom.psi_exact(&[xb]).unwrap();
            assert_abs_diff_eq!(v, expected(xb), epsilon = 1e-8);
        }
        // spec spot value: xb = 2 gives 1.5 - sqrt(1.5625) = 0.25
        assert_abs_diff_eq!(dom.psi_exact(&[2.0]).unwrap(), 0.25, epsilon = 1e-8);
        // memoised path interpolates a linear function exactly
        assert_abs_diff_eq!(dom.psi(&[0.71]), expected(0.71), epsilon = 1e-8);
    }

    #[test]
    fn psi_wedge_vertex_sees_the_corner() {
        // phi(xb) = |xb|: from below the vertex the nearest graph point is the
        // vertex itself, so psi(0) = -delta
        let dom = GraphDomain::wedge(1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(dom.psi_exact(&[0.0]).unwrap(), -1.0, epsilon = 1e-8);
        // independent dense-sampling oracle at another cross position
        let xb = 0.8;
        let oracle = {
            let mut best = f64::INFINITY;
            let mut t_best = f64::NAN;
            let mut t = -1.0;
            while t < dom.phi(&[xb]) {
                // distance from (t, xb) to the graph by dense sampling
                let mut dist = f64::INFINITY;
                let mut y = xb - 3.0;
                while y < xb + 3.0 {
                    let d = ((t - y.abs()).powi(2) + (xb - y).powi(2)).sqrt();
                    dist = dist.min(d);
                    y += 1e-4;
                }
                if (dist - 1.0).abs() < best {
                    best = (dist - 1.0).abs();
                    t_best = t;
                }
                t += 1e-4;
            }
            t_best
        };
        assert_abs_diff_eq!(dom.psi_exact(&[xb]).unwrap(), oracle, epsilon = 1e-3);
    }

    #[test]
    fn collar_thickness_bounds() {
        // delta <= phi - psi <= delta sqrt(L^2 + 1) on sampled cross positions
        for dom in [
            GraphDomain::flat(0.5, 2).unwrap(),
            GraphDomain::tilt(0.6, 0.2, 0.5).unwrap(),
            GraphDomain::wedge(0.8, 0.0, 0.5).unwrap(),
        ] {
            let bound = 0.5 * (dom.lip() * dom.lip() + 1.0).sqrt();
            for i in 0..40 {
                let xb = -1.5 + 3.0 * i as f64 / 39.0;
                let gap = dom.phi(&[xb]) - dom.psi_exact(&[xb]).unwrap();
                assert!(gap >= 0.5 - 1e-7, "gap {gap}");
                assert!(gap <= bound + 1e-7, "gap {gap} bound {bound}");
            }
        }
    }

    #[test]
    fn psi_inherits_the_lipschitz_constant() {
        let dom = GraphDomain::wedge(0.8, 0.0, 0.5).unwrap();
        let mut worst: f64 = 0.0;
        let mut prev = dom.psi_exact(&[-1.0]).unwrap();
        let h = 0.05;
        let mut xb = -1.0;
        while xb < 1.0 {
            let next = dom.psi_exact(&[xb + h]).unwrap();
            worst = worst.max((next - prev).abs() / h);
            prev = next;
            xb += h;
        }
        assert!(worst <= dom.lip() + 1e-3, "psi slope {worst}");
    }

    #[test]
    fn transform_p_shear() {
        let dom = GraphDomain::tilt(1.0, 0.0, 0.5).unwrap();
        let u = Field::new(|x: &Point| x.axial(), 100.0, Smoothness::Cinf);
        let pu = transform_p(&dom, &u);
        // (x_tilde, x_bar) -> x_tilde + x_bar
        for (t, c) in [(0.3, 1.0), (2.0, -0.5), (0.0, 4.0)] {
            assert_abs_diff_eq!(pu.eval(&Point::d2(t, c)), t + c, epsilon = 1e-12);
        }
        // zero shear leaves fields unchanged
        let flat = GraphDomain::flat(0.5, 2).unwrap();
        let pu = transform_p(&flat, &u);
        assert_eq!(pu.eval(&Point::d2(0.7, -3.0)), 0.7);
        // constants stay constants
        let c = Field::constant(4.5);
        let pc = transform_p(&dom, &c);
        assert_eq!(pc.eval(&Point::d2(1.0, 2.0)), 4.5);
    }

    #[test]
    fn transform_g_tilt_closed_form() {
        // phi = a xb, psi = a xb - delta sqrt(1+a^2):
        // (G u)(x) = u(a xb + x_tilde sqrt(1+a^2), xb)
        let a = 0.6;
        let delta = 0.5;
        let dom = GraphDomain::tilt(a, 0.0, delta).unwrap();
        let u = Field::new(|x: &Point| x.axial() + 10.0 * x.coord(1), 100.0, Smoothness::Cinf);
        let gu = transform_g(&dom, &u);
        let root = (1.0 + a * a).sqrt();
        for (t, c) in [(-0.1, 0.4), (-0.45, -1.2), (-0.25, 0.0)] {
            let expect = a * c + t * root + 10.0 * c;
            assert_abs_diff_eq!(gu.eval(&Point::d2(t, c)), expect, epsilon = 1e-7);
        }
    }

    #[test]
    fn transform_g_round_trip() {
        use rand::{Rng, SeedableRng};
        let dom = GraphDomain::wedge(0.7, 0.1, 0.4).unwrap();
        let u = Field::new(
            |x: &Point| (x.axial() * 3.1).sin() + x.coord(1),
            100.0,
            Smoothness::Cinf,
        );
        let back = transform_g_inv(&dom, &transform_g(&dom, &u));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let xb = rng.gen_range(-2.0..2.0);
            let phi = dom.phi(&[xb]);
            let psi = dom.psi(&[xb]);
            let t = psi + rng.gen_range(1e-6..1.0 - 1e-6) * (phi - psi);
            let x = Point::d2(t, xb);
            assert_abs_diff_eq!(back.eval(&x), u.eval(&x), epsilon = 1e-12);
        }
    }

    #[test]
    fn transform_s_round_trip_and_identity_on_flat() {
        use rand::{Rng, SeedableRng};
        let dom = GraphDomain::tilt(0.5, 0.3, 0.4).unwrap();
        let u = Field::new(
            |x: &Point| (x.axial() - 0.2) * (x.coord(1) + 0.4),
            100.0,
            Smoothness::Cinf,
        );
        let round = transform_s_inv(&dom, &transform_s(&dom, &u));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let xb = rng.gen_range(-2.0..2.0);
            let phi = dom.phi(&[xb]);
            let psi = dom.psi(&[xb]);
            // points of Omega_hat strictly away from the gluing interface
            let x = if rng.gen_bool(0.5) {
                Point::d2(phi + rng.gen_range(1e-3..2.0), xb)
            } else {
                Point::d2(psi + rng.gen_range(1e-6..1.0 - 1e-3) * (phi - psi), xb)
            };
            assert_abs_diff_eq!(round.eval(&x), u.eval(&x), epsilon = 1e-10);
        }
        // flat profile: S reduces to the identity on the strip
        let flat = GraphDomain::flat(0.4, 2).unwrap();
        let su = transform_s(&flat, &u);
        for (t, c) in [(0.5, 1.0), (-0.2, -0.7), (3.0, 0.0)] {
            assert_abs_diff_eq!(su.eval(&Point::d2(t, c)), u.eval(&Point::d2(t, c)), epsilon = 1e-9);
        }
    }

    #[test]
    fn distortion_constant_formulas() {
        let c = distortion_constants(0.0);
        assert_abs_diff_eq!(c.k_fwd, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.k_bwd, 0.5, epsilon = 1e-15);
        let c1 = distortion_constants(1.0);
        let r2 = 2.0f64.sqrt();
        assert_abs_diff_eq!(c1.m_fwd, (2.0 + r2).max(2.0 + 3.0 * r2), epsilon = 1e-15);
        assert_abs_diff_eq!(c1.m_bwd, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn sampled_distortion_within_bounds() {
        let dom = GraphDomain::wedge(0.8, 0.0, 0.5).unwrap();
        let c = distortion_constants(dom.lip());
        let (lo, hi) = sample_distortion(&dom, 2.0, 10_000, 42);
        assert!(lo >= c.k_bwd - 1e-9, "lo {lo} vs {}", c.k_bwd);
        assert!(hi <= c.k_fwd + 1e-9, "hi {hi} vs {}", c.k_fwd);
        // flat profile: the map is the identity, sharp ratio 1
        let flat = GraphDomain::flat(0.5, 2).unwrap();
        let (lo, hi) = sample_distortion(&flat, 2.0, 2_000, 1);
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn disk_cover_validates() {
        let cover = disk_cover(1.0, 0.9, 0.1).unwrap();
        assert_eq!(cover.charts.len(), 4);
        cover.validate(0.05, 400, 9).unwrap();
        // lambda_tilde recombination: sum_i lambda_tilde_i lambda_i = 1 where
        // some chart is fully active
        let x = Point::d2(-1.02, 0.0);
        let s: f64 = (0..4).map(|i| cover.lambda_tilde(i, &x) * cover.lambda(i, &x)).sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chart_frames_round_trip() {
        let f = Frame::from_inward_normal_2d(0.0, 1.0);
        let p = Point::d2(0.3, -0.8);
        let back = f.to_local(&f.to_global_rel(&p));
        assert_abs_diff_eq!(back.coord(0), p.coord(0), epsilon = 1e-14);
        assert_abs_diff_eq!(back.coord(1), p.coord(1), epsilon = 1e-14);
    }
}
