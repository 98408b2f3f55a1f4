//! Points of the ambient space, written axially first.
//!
//! Everywhere in this crate a point of `R^d` (d ≤ 3) is split as
//! `x = (x_tilde, x_bar)` where `x_tilde` is the distinguished axial
//! coordinate (normal to the flat boundary `{0} x R^{d-1}`) and `x_bar`
//! collects the `d-1` cross coordinates. Coordinates beyond the ambient
//! dimension are kept at zero so distances can be taken over all three slots.

pub const MAX_DIM: usize = 3;

/// A point of `R^d`, `d <= 3`, stored axial-first. Unused slots are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&coords.len()),
            "point dimension must be 1..=3"
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            coords: c,
            dim: coords.len() as u8,
        }
    }

    pub fn d1(x: f64) -> Self {
        Point::new(&[x])
    }

    pub fn d2(xt: f64, xb: f64) -> Self {
        Point::new(&[xt, xb])
    }

    pub fn d3(xt: f64, xb1: f64, xb2: f64) -> Self {
        Point::new(&[xt, xb1, xb2])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// The axial coordinate x~.
    #[inline]
    pub fn axial(&self) -> f64 {
        self.coords[0]
    }

    /// Cross coordinates x_bar (length d-1).
    #[inline]
    pub fn cross(&self) -> &[f64] {
        &self.coords[1..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn with_axial(&self, xt: f64) -> Self {
        let mut p = *self;
        p.coords[0] = xt;
        p
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.coords[0] - other.coords[0];
        let dy = self.coords[1] - other.coords[1];
        let dz = self.coords[2] - other.coords[2];
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        let [x, y, z] = self.coords;
        (x * x + y * y + z * z).sqrt()
    }

    /// Cross-coordinate distance |x_bar - y_bar|.
    #[inline]
    pub fn cross_dist(&self, other: &Point) -> f64 {
        let dy = self.coords[1] - other.coords[1];
        let dz = self.coords[2] - other.coords[2];
        (dy * dy + dz * dz).sqrt()
    }

    /// Scale all coordinates, keeping the dimension.
    #[inline]
    pub fn scale(&self, s: f64) -> Self {
        let mut p = *self;
        for c in p.coords.iter_mut() {
            *c *= s;
        }
        p
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
