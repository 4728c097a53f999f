//! Node positions and RIS grid geometry.
//!
//! Every RIS carries a local frame `(horizontal, vertical, normal)`. Directions
//! seen from a RIS are expressed in that frame: azimuth is measured in the
//! horizontal/normal plane from broadside, elevation towards the vertical axis.

use std::ops::{Add, Mul, Sub};

use crate::error::{domain, Result};

/// A point (or displacement) in the world frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Position3D {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Position3D {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Position3D {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Orientation of a planar RIS: outward unit normal plus the in-plane
/// horizontal axis. The vertical axis completes a right-handed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    normal: Position3D,
    horizontal: Position3D,
}

impl Orientation {
    pub fn new(normal: Position3D, horizontal: Position3D) -> Result<Self> {
        let n = normal.norm();
        let h = horizontal.norm();
        if !(n.is_finite() && h.is_finite() && n > 0.0 && h > 0.0) {
            return Err(domain("orientation axes must be finite and non-zero"));
        }
        let normal = normal * (1.0 / n);
        let horizontal = horizontal * (1.0 / h);
        if normal.dot(horizontal).abs() > 1e-9 {
            return Err(domain("orientation axes must be orthogonal"));
        }
        Ok(Self { normal, horizontal })
    }

    /// A vertical surface whose normal is the horizontal projection of
    /// `direction`; the in-plane axes are then world-horizontal and world-up.
    pub fn vertical_facing(direction: Position3D) -> Result<Self> {
        let flat = Position3D::new(direction.x, direction.y, 0.0);
        let up = Position3D::new(0.0, 0.0, 1.0);
        Self::new(flat, up.cross(flat))
    }

    pub fn normal(&self) -> Position3D {
        self.normal
    }

    pub fn horizontal(&self) -> Position3D {
        self.horizontal
    }

    pub fn vertical(&self) -> Position3D {
        self.normal.cross(self.horizontal)
    }

    /// Azimuth and elevation (radians) of the unit direction `dir` in this frame.
    pub fn angles_of(&self, dir: Position3D) -> (f64, f64) {
        let u = dir.dot(self.horizontal);
        let v = dir.dot(self.vertical());
        let w = dir.dot(self.normal);
        let elevation = v.clamp(-1.0, 1.0).asin();
        let azimuth = u.atan2(w);
        (azimuth, elevation)
    }
}

/// Rectangular RIS element grid. Element `(p, q)` sits `p` steps along the
/// horizontal axis and `q` steps along the vertical axis; flattening is row-major
/// (`k = p * cols + q`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry {
    pub rows: usize,
    pub cols: usize,
    pub spacing_wavelengths: f64,
    pub orientation: Orientation,
}

impl RisGeometry {
    pub fn new(rows: usize, cols: usize, spacing_wavelengths: f64, orientation: Orientation) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(domain("RIS grid must have at least one row and one column"));
        }
        if !(spacing_wavelengths.is_finite() && spacing_wavelengths > 0.0) {
            return Err(domain("element spacing must be positive"));
        }
        Ok(Self { rows, cols, spacing_wavelengths, orientation })
    }

    /// Number of unit elements K.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// World positions of every element, row-major, for a grid centred at `center`.
    pub fn element_positions(&self, center: Position3D, wavelength: f64) -> Vec<Position3D> {
        let step = self.spacing_wavelengths * wavelength;
        let h = self.orientation.horizontal();
        let v = self.orientation.vertical();
        let p0 = (self.rows as f64 - 1.0) / 2.0;
        let q0 = (self.cols as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.len());
        for p in 0..self.rows {
            for q in 0..self.cols {
                out.push(center + h * ((p as f64 - p0) * step) + v * ((q as f64 - q0) * step));
            }
        }
        out
    }
}

/// One deployed RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ris {
    pub position: Position3D,
    pub geometry: RisGeometry,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facing_frame_is_right_handed_with_up_vertical() {
        for dir in [Position3D::new(0.0, 1.0, 0.0), Position3D::new(0.0, -1.0, 0.0), Position3D::new(1.0, 1.0, 0.3)] {
            let o = Orientation::vertical_facing(dir).unwrap();
            let v = o.vertical();
            assert!((v.z - 1.0).abs() < 1e-12, "{v:?}");
            assert!(o.horizontal().cross(v).distance(o.normal()) < 1e-12);
        }
    }

    #[test]
    fn broadside_direction_has_zero_angles() {
        let o = Orientation::vertical_facing(Position3D::new(0.0, 1.0, 0.0)).unwrap();
        let (az, el) = o.angles_of(o.normal());
        assert_eq!((az, el), (0.0, 0.0));
    }

    #[test]
    fn rejects_non_orthogonal_axes() {
        let r = Orientation::new(Position3D::new(1.0, 0.0, 0.0), Position3D::new(1.0, 1.0, 0.0));
        assert!(r.is_err());
    }

    #[test]
    fn element_grid_is_centred() {
        let o = Orientation::vertical_facing(Position3D::new(0.0, 1.0, 0.0)).unwrap();
        let g = RisGeometry::new(8, 8, 0.5, o).unwrap();
        let c = Position3D::new(15.0, 25.0, 2.0);
        let pts = g.element_positions(c, 0.1);
        assert_eq!(pts.len(), 64);
        let mean = pts.iter().fold(Position3D::new(0.0, 0.0, 0.0), |a, &p| a + p) * (1.0 / 64.0);
        assert!(mean.distance(c) < 1e-12);
        // neighbours along q are one spacing apart vertically
        assert!((pts[1].z - pts[0].z - 0.05).abs() < 1e-12);
    }
}
