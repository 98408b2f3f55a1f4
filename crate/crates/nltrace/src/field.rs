//! Scalar fields: the objects norms, seminorms and extension operators act on.

use crate::point::Point;
use std::sync::Arc;

/// Declared smoothness class of a field. Quadrature uses it to decide when a
/// singular energy integral may fail to converge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    C0,
    C1,
    Cinf,
}

/// A scalar field `u: R^d -> R` with a declared support radius.
///
/// `support_radius` promises that the evaluator returns exactly 0 outside the
/// closed ball of that radius around the origin; `f64::INFINITY` declares an
/// unbounded field, in which case norm computations over unbounded domains are
/// rejected.
#[derive(Clone)]
pub struct Field {
    eval: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    support_radius: f64,
    smoothness: Smoothness,
}

impl Field {
    pub fn new<F>(f: F, support_radius: f64, smoothness: Smoothness) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        Field {
            eval: Arc::new(f),
            support_radius,
            smoothness,
        }
    }

    /// Constant field; support is unbounded unless the constant is zero.
    pub fn constant(c: f64) -> Self {
        let r = if c == 0.0 { 0.0 } else { f64::INFINITY };
        Field::new(move |_| c, r, Smoothness::Cinf)
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    #[inline]
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    #[inline]
    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.support_radius = r;
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    /// Pointwise linear combination `a*self + b*other`.
    pub fn linear_comb(&self, a: f64, other: &Field, b: f64) -> Field {
        let f = self.clone();
        let g = other.clone();
        let r = if a == 0.0 {
            if b == 0.0 { 0.0 } else { g.support_radius }
        } else if b == 0.0 {
            f.support_radius
        } else {
            f.support_radius.max(g.support_radius)
        };
        let s = rougher(f.smoothness, g.smoothness);
        Field::new(move |x| a * f.eval(x) + b * g.eval(x), r, s)
    }

    /// Pointwise product.
    pub fn product(&self, other: &Field) -> Field {
        let f = self.clone();
        let g = other.clone();
        let r = f.support_radius.min(g.support_radius);
        let s = rougher(f.smoothness, g.smoothness);
        Field::new(move |x| f.eval(x) * g.eval(x), r, s)
    }

    /// The rescaled field `v(x) = u(s x)`; support shrinks by `1/s`.
    pub fn rescale(&self, s: f64) -> Field {
        assert!(s > 0.0 && s.is_finite());
        let f = self.clone();
        let r = f.support_radius / s;
        let sm = f.smoothness;
        Field::new(move |x| f.eval(&x.scale(s)), r, sm)
    }
}

fn rougher(a: Smoothness, b: Smoothness) -> Smoothness {
    use Smoothness::*;
    match (a, b) {
        (C0, _) | (_, C0) => C0,
        (C1, _) | (_, C1) => C1,
        _ => Cinf,
    }
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("support_radius", &self.support_radius)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

/// The C-infinity cutoff profile used throughout: `exp(1 - 1/(1-t^2))` on
/// |t| < 1 and 0 outside, normalised so the value at t = 0 is 1.
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Smooth monotone step: 0 for t <= 0, 1 for t >= 1, C-infinity in between,
/// with s(1/2) = 1/2 exactly by symmetry.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Step of `smoothstep` shape rising 0 -> 1 across `[c-h, c+h]`.
pub fn step_up(x: f64, c: f64, h: f64) -> f64 {
    smoothstep((x - (c - h)) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn smoothstep_endpoints_and_midpoint() {
        assert_eq!(smoothstep(-0.3), 0.0);
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(2.0), 1.0);
        assert_abs_diff_eq!(smoothstep(0.5), 0.5, epsilon = 1e-15);
        // complementary symmetry
        for &t in &[0.1, 0.25, 0.4, 0.47] {
            assert_abs_diff_eq!(smoothstep(t) + smoothstep(1.0 - t), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn smoothstep_slope_stays_below_quarter_width_bound() {
        // max |s'| is about 2; the partition construction relies on <= 2.5.
        let n = 20000;
        let mut max_slope: f64 = 0.0;
        for i in 0..n {
            let t0 = i as f64 / n as f64;
            let t1 = (i + 1) as f64 / n as f64;
            let sl = (smoothstep(t1) - smoothstep(t0)) * n as f64;
            max_slope = max_slope.max(sl.abs());
        }
        assert!(max_slope < 2.5, "max smoothstep slope {max_slope}");
    }

    #[test]
    fn bump_profile_support_and_peak() {
        assert_eq!(bump_profile(1.0), 0.0);
        assert_eq!(bump_profile(-1.2), 0.0);
        assert_eq!(bump_profile(0.0), 1.0);
        assert!(bump_profile(0.9) > 0.0);
    }

    #[test]
    fn rescale_composes() {
        let u = Field::new(|x: &Point| x.axial() * 2.0, 4.0, Smoothness::Cinf);
        let v = u.rescale(0.5);
        assert_eq!(v.eval(&Point::d1(1.0)), 1.0);
        assert_eq!(v.support_radius(), 8.0);
    }
}
