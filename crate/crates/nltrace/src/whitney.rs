//! Whitney-type dyadic decompositions of the strip `(0, L] x R^(d-1)` and of
//! the half space, the collar maps M1/M2 that assign an averaging box to each
//! cube, neighbour enumeration, and the smooth partition-of-unity bumps.
//!
//! A regular cube at level `k` occupies the slab `(2^-k, 2^-k+1]` times a
//! dyadic cross cell of side `2^-k`; Type I covers add a base layer of unit
//! cubes touching the boundary. Covers are never materialised: enumeration is
//! lazy over query windows and evaluation points.

use crate::field::{smoothstep, step_up};
use crate::point::Point;
use crate::{Error, Result};

/// Side-length scale `2^-k` (exact in floating point).
#[inline]
fn pow2(k: i32) -> f64 {
    (2.0f64).powi(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CubeKind {
    /// Slab cube `(2^-k, 2^-k+1] x Q`.
    Regular,
    /// Unit cube `(0, 1] x Q` of the Type I base layer.
    Base,
}

/// One dyadic slab cube, identified by its level and cross indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WhitneyCube {
    pub kind: CubeKind,
    /// Level `k`; side length is `2^-k`. Base cubes store level 0.
    pub level: i32,
    /// Cross cell indices (`d - 1` of them used).
    pub cross: [i64; 2],
}

impl WhitneyCube {
    pub fn side(&self) -> f64 {
        match self.kind {
            CubeKind::Regular => pow2(-self.level),
            CubeKind::Base => 1.0,
        }
    }

    /// Axial extent `(lo, hi]`.
    pub fn axial_range(&self) -> (f64, f64) {
        match self.kind {
            CubeKind::Regular => (pow2(-self.level), pow2(-self.level + 1)),
            CubeKind::Base => (0.0, 1.0),
        }
    }

    /// Cross extent `(lo, hi]` in dimension `i`.
    pub fn cross_range(&self, i: usize) -> (f64, f64) {
        let s = self.side();
        (s * self.cross[i] as f64, s * (self.cross[i] + 1) as f64)
    }

    /// Barycentre of the cube (d-dimensional).
    pub fn barycenter(&self, d: usize) -> Point {
        let (a, b) = self.axial_range();
        let mut coords = vec![0.5 * (a + b)];
        for i in 0..d - 1 {
            let (c0, c1) = self.cross_range(i);
            coords.push(0.5 * (c0 + c1));
        }
        Point::new(&coords)
    }
}

/// Axis-aligned box, used for query windows and the M1/M2 images.
#[derive(Clone, Copy, Debug)]
pub struct AxisBox {
    pub d: usize,
    pub axial: (f64, f64),
    pub cross: [(f64, f64); 2],
}

impl AxisBox {
    pub fn new_1d(a: f64, b: f64) -> Self {
        AxisBox {
            d: 1,
            axial: (a, b),
            cross: [(0.0, 0.0); 2],
        }
    }

    pub fn new_2d(axial: (f64, f64), cross: (f64, f64)) -> Self {
        AxisBox {
            d: 2,
            axial,
            cross: [cross, (0.0, 0.0)],
        }
    }

    pub fn volume(&self) -> f64 {
        let mut v = self.axial.1 - self.axial.0;
        for i in 0..self.d - 1 {
            v *= self.cross[i].1 - self.cross[i].0;
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverKind {
    TypeI,
    TypeII,
}

/// A Whitney cover of `(0, L] x R^(d-1)` with `L = 2^m`, or of the half space
/// when `m` is `None`.
#[derive(Clone, Copy, Debug)]
pub struct WhitneyCover {
    pub kind: CoverKind,
    /// `L = 2^m`; `None` encodes `L = +inf`.
    pub m: Option<u32>,
    pub d: usize,
}

impl WhitneyCover {
    pub fn new(kind: CoverKind, strip_len: f64, d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidDomain(format!("dimension {d} out of range")));
        }
        if strip_len.is_infinite() {
            return Ok(WhitneyCover { kind, m: None, d });
        }
        if !(strip_len > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "strip length {strip_len} must be positive"
            )));
        }
        let m = strip_len.log2();
        if (m - m.round()).abs() > 1e-12 || m.round() < 0.0 {
            return Err(Error::InvalidDomain(format!(
                "strip length {strip_len} is not 2^m for integer m >= 0"
            )));
        }
        Ok(WhitneyCover {
            kind,
            m: Some(m.round() as u32),
            d,
        })
    }

    pub fn strip_len(&self) -> f64 {
        self.m.map_or(f64::INFINITY, |m| pow2(m as i32))
    }

    /// Coarsest regular level `-m + 1` (`None` when levels are unbounded
    /// below, i.e. the half-space cover).
    pub fn min_level(&self) -> Option<i32> {
        self.m.map(|m| -(m as i32) + 1)
    }

    /// Finest regular level (`None` for Type II, whose levels grow without
    /// bound towards the boundary).
    pub fn max_level(&self) -> Option<i32> {
        match self.kind {
            CoverKind::TypeI => Some(0),
            CoverKind::TypeII => None,
        }
    }

    fn has_regular_level(&self, k: i32) -> bool {
        if let Some(lo) = self.min_level() {
            if k < lo {
                return false;
            }
        }
        if let Some(hi) = self.max_level() {
            if k > hi {
                return false;
            }
        }
        true
    }

    fn has_base(&self) -> bool {
        self.kind == CoverKind::TypeI
    }
}

fn level_of_axial(t: f64) -> i32 {
    debug_assert!(t > 0.0);
    let mut k = (-(t.log2())).ceil() as i32;
    while pow2(-k) >= t {
        k += 1;
    }
    while pow2(-k + 1) < t {
        k -= 1;
    }
    k
}

fn cell_index(c: f64, s: f64) -> i64 {
    let mut m = (c / s).ceil() as i64 - 1;
    while s * m as f64 >= c {
        m -= 1;
    }
    while s * ((m + 1) as f64) < c {
        m += 1;
    }
    m
}

/// The unique cover cube whose half-open box contains `x` (Type I sends
/// `x_tilde <= 1` to the base layer). Rejects points outside `(0, L]`.
pub fn cube_containing(cover: &WhitneyCover, x: &Point) -> Result<WhitneyCube> {
    let t = x.axial();
    let l = cover.strip_len();
    if !(t > 0.0) || t > l {
        return Err(Error::InvalidDomain(format!(
            "axial coordinate {t} outside (0, {l}]"
        )));
    }
    let (kind, level, side) = if cover.has_base() && t <= 1.0 {
        (CubeKind::Base, 0, 1.0)
    } else {
        let k = level_of_axial(t);
        debug_assert!(cover.has_regular_level(k));
        (CubeKind::Regular, k, pow2(-k))
    };
    let mut cross = [0i64; 2];
    for (i, &c) in x.cross().iter().enumerate() {
        cross[i] = cell_index(c, side);
    }
    Ok(WhitneyCube { kind, level, cross })
}

/// Exactly the cover cubes whose boxes intersect the closed window. Finite
/// because the window is bounded away from the boundary; Type II windows
/// touching `x_tilde = 0` demand infinitely many levels and are rejected.
pub fn cubes_in_window(cover: &WhitneyCover, window: &AxisBox) -> Result<Vec<WhitneyCube>> {
    if window.d != cover.d {
        return Err(Error::InvalidDomain("window dimension mismatch".into()));
    }
    let (w0, w1) = window.axial;
    if !(w1 > 0.0) || !(w0 < cover.strip_len()) {
        return Ok(Vec::new());
    }
    if !w0.is_finite() || !w1.is_finite() {
        return Err(Error::InvalidDomain("window must be bounded".into()));
    }
    if cover.kind == CoverKind::TypeII && w0 <= 0.0 {
        return Err(Error::InvalidDomain(
            "Type II window touches the boundary: clip it away from x_tilde = 0".into(),
        ));
    }
    let mut out = Vec::new();

    // base layer
    if cover.has_base() && w0 <= 1.0 {
        push_cross_cells(&mut out, CubeKind::Base, 0, 1.0, window, cover.d);
    }

    // regular levels whose slab (2^-k, 2^-k+1] meets [w0, w1]
    let w0_eff = w0.max(if cover.has_base() { f64::MIN_POSITIVE } else { w0 });
    let mut k_lo = level_of_axial(w1.min(cover.strip_len()));
    if pow2(-k_lo + 1) <= w1 && !(pow2(-k_lo) < w1) {
        k_lo += 1;
    }
    // slab upper end 2^(-k+1) must reach w0: k <= 1 - log2(w0)
    let k_hi = if w0_eff > 0.0 {
        let mut k = level_of_axial(w0_eff.min(cover.strip_len()));
        // the slab containing w0 is the finest one needed
        while pow2(-k + 1) < w0_eff {
            k -= 1;
        }
        k
    } else {
        // Type I window touching 0: regular slabs start above 1, which the
        // base layer already covers; the finest regular level is 0
        0
    };
    for k in k_lo..=k_hi {
        if !cover.has_regular_level(k) {
            continue;
        }
        let (a, b) = (pow2(-k), pow2(-k + 1));
        if !(a < w1 && b >= w0) {
            continue;
        }
        push_cross_cells(&mut out, CubeKind::Regular, k, pow2(-k), window, cover.d);
    }
    out.sort();
    Ok(out)
}

fn push_cross_cells(
    out: &mut Vec<WhitneyCube>,
    kind: CubeKind,
    level: i32,
    side: f64,
    window: &AxisBox,
    d: usize,
) {
    match d {
        1 => out.push(WhitneyCube {
            kind,
            level,
            cross: [0, 0],
        }),
        2 => {
            let (c0, c1) = window.cross[0];
            let m_lo = cell_index(c0, side);
            let m_hi = cell_index(c1, side);
            for m in m_lo..=m_hi {
                // closed-window intersection with the half-open cell
                if (side * m as f64) < c1 && side * ((m + 1) as f64) >= c0 {
                    out.push(WhitneyCube {
                        kind,
                        level,
                        cross: [m, 0],
                    });
                }
            }
        }
        3 => {
            let (c0, c1) = window.cross[0];
            let (e0, e1) = window.cross[1];
            for m in cell_index(c0, side)..=cell_index(c1, side) {
                if !((side * m as f64) < c1 && side * ((m + 1) as f64) >= c0) {
                    continue;
                }
                for n in cell_index(e0, side)..=cell_index(e1, side) {
                    if (side * n as f64) < e1 && side * ((n + 1) as f64) >= e0 {
                        out.push(WhitneyCube {
                            kind,
                            level,
                            cross: [m, n],
                        });
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

/// M1: every Type I cube averages over the full-height collar box
/// `(-1, 0) x Q`.
pub fn map_m1(cube: &WhitneyCube, d: usize) -> AxisBox {
    let mut b = AxisBox {
        d,
        axial: (-1.0, 0.0),
        cross: [(0.0, 0.0); 2],
    };
    for i in 0..d - 1 {
        b.cross[i] = cube.cross_range(i);
    }
    b
}

/// M2: Type II cubes `(a, b] x Q` reflect to `(-b, -a) x Q` while `b <= 1`
/// (the fractional regime) and fall back to the unit collar box `(-1, 0) x Q`
/// for `b > 1` (the classical regime).
pub fn map_m2(cube: &WhitneyCube, d: usize) -> AxisBox {
    let (a, b) = cube.axial_range();
    let axial = if b <= 1.0 { (-b, -a) } else { (-1.0, 0.0) };
    let mut bx = AxisBox {
        d,
        axial,
        cross: [(0.0, 0.0); 2],
    };
    for i in 0..d - 1 {
        bx.cross[i] = cube.cross_range(i);
    }
    bx
}

/// All cover cubes intersecting the closed `side/4` inflation of the cube's
/// box.
pub fn neighbors(cover: &WhitneyCover, cube: &WhitneyCube) -> Result<Vec<WhitneyCube>> {
    let r = cube.side() / 4.0;
    let (a, b) = cube.axial_range();
    let mut window = AxisBox {
        d: cover.d,
        axial: ((a - r).max(f64::MIN_POSITIVE), b + r),
        cross: [(0.0, 0.0); 2],
    };
    for i in 0..cover.d - 1 {
        let (c0, c1) = cube.cross_range(i);
        window.cross[i] = (c0 - r, c1 + r);
    }
    cubes_in_window(cover, &window)
}

// ---------------------------------------------------------------------------
// Partition of unity
// ---------------------------------------------------------------------------

/// Monotone axial step rising through the dyadic boundary `2^-j` with
/// half-width `2^-(j+1)/4` (a quarter of the finer neighbouring slab).
#[inline]
fn axial_step(j: i32, t: f64) -> f64 {
    let b = pow2(-j);
    step_up(t, b, b / 8.0)
}

/// Cutoff multiplying the outermost slab of a finite cover: 1 up to
/// `x_tilde = L`, 0 beyond `L + L/8`.
#[inline]
fn top_cutoff(l: f64, t: f64) -> f64 {
    1.0 - smoothstep((t - l) / (l / 8.0))
}

fn axial_window(cover: &WhitneyCover, cube: &WhitneyCube, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    match cube.kind {
        CubeKind::Base => match cover.m {
            Some(0) => top_cutoff(1.0, t),
            _ => 1.0 - axial_step(0, t),
        },
        CubeKind::Regular => {
            let k = cube.level;
            let is_top = cover.min_level() == Some(k);
            if is_top {
                axial_step(k, t) * top_cutoff(cover.strip_len(), t)
            } else {
                axial_step(k, t) - axial_step(k - 1, t)
            }
        }
    }
}

/// Smooth bump of the cube: a tensor product of the axial slab window and the
/// cross-cell transitions (half-width `side/8`). Supported inside the
/// `side/4` inflation of the cube, identically 1 past all transition zones,
/// and at least `2^-d` on the cube itself.
pub fn bump_eval(cover: &WhitneyCover, cube: &WhitneyCube, x: &Point) -> f64 {
    let mut v = axial_window(cover, cube, x.axial());
    if v == 0.0 {
        return 0.0;
    }
    let s = cube.side();
    for (i, &c) in x.cross().iter().enumerate() {
        let m = cube.cross[i] as f64;
        let chi = step_up(c, s * m, s / 8.0) - step_up(c, s * (m + 1.0), s / 8.0);
        if chi <= 0.0 {
            return 0.0;
        }
        v *= chi;
    }
    v
}

/// The finitely many cover cubes whose bumps are nonzero at `x`, sorted.
pub fn supported_cubes_at(cover: &WhitneyCover, x: &Point) -> Vec<WhitneyCube> {
    let t = x.axial();
    let l = cover.strip_len();
    let mut out = Vec::new();
    if t <= 0.0 || (l.is_finite() && t > l * (1.0 + 0.125 + 1e-12)) {
        return out;
    }
    let mut candidate_levels: Vec<(CubeKind, i32)> = Vec::new();
    if cover.has_base() && t <= 1.0 + 0.125 + 1e-12 {
        candidate_levels.push((CubeKind::Base, 0));
    }
    let kc = level_of_axial(t.min(l));
    for k in (kc - 2)..=(kc + 2) {
        if cover.has_regular_level(k) {
            candidate_levels.push((CubeKind::Regular, k));
        }
    }
    for (kind, k) in candidate_levels {
        let probe = WhitneyCube {
            kind,
            level: k,
            cross: [0, 0],
        };
        if axial_window(cover, &probe, t) == 0.0 {
            continue;
        }
        let s = probe.side();
        // adjacent cross cells within transition reach
        let mut cells: Vec<[i64; 2]> = vec![[0, 0]];
        for (i, &c) in x.cross().iter().enumerate() {
            let f = cell_index(c, s);
            let mut next = Vec::new();
            for base in &cells {
                for cand in [f - 1, f, f + 1] {
                    let mut cc = *base;
                    cc[i] = cand;
                    next.push(cc);
                }
            }
            cells = next;
        }
        for cross in cells {
            let cube = WhitneyCube {
                kind,
                level: k,
                cross,
            };
            if bump_eval(cover, &cube, x) > 0.0 {
                out.push(cube);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Partition sum at `x`: 1 on `(0, L]` for every cover by construction.
pub fn partition_sum(cover: &WhitneyCover, x: &Point) -> f64 {
    supported_cubes_at(cover, x)
        .iter()
        .map(|cube| bump_eval(cover, cube, x))
        .sum()
}
