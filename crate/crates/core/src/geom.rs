//! Small planar/spatial vector kit and 2D rigid motions.
//!
//! All intrinsic computations in this crate happen in per-face 2D frames;
//! `Iso2` is the orientation-preserving isometry used to chain those frames
//! into planar developments.

use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub use std::f64::consts::PI;
pub const TAU: f64 = std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product (signed parallelogram area).
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(a: Vec2, b: Vec2, t: f64) -> Vec2 {
        a + (b - a) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}
impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}
impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}
impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}
impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Serialize for Vec2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.x)?;
        t.serialize_element(&self.y)?;
        t.end()
    }
}

/// Counterclockwise angle from `from` to `to`, in `[0, 2π)`.
pub fn ccw_angle(from: Vec2, to: Vec2) -> f64 {
    let a = to.angle() - from.angle();
    a.rem_euclid(TAU)
}

/// Unsigned angle between two vectors, in `[0, π]`.
pub fn angle_between(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b)).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        Vec3::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(a: Vec3, b: Vec3, t: f64) -> Vec3 {
        a + (b - a) * t
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}
impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}
impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}
impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Serialize for Vec3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(3)?;
        t.serialize_element(&self.x)?;
        t.serialize_element(&self.y)?;
        t.serialize_element(&self.z)?;
        t.end()
    }
}

/// Orientation-preserving planar isometry `p ↦ R·p + t` with `R` a rotation.
#[derive(Clone, Copy, Debug)]
pub struct Iso2 {
    pub c: f64,
    pub s: f64,
    pub t: Vec2,
}

impl Iso2 {
    pub const IDENTITY: Iso2 = Iso2 {
        c: 1.0,
        s: 0.0,
        t: Vec2::ZERO,
    };

    pub fn rotation(theta: f64) -> Iso2 {
        Iso2 {
            c: theta.cos(),
            s: theta.sin(),
            t: Vec2::ZERO,
        }
    }

    pub fn translation(t: Vec2) -> Iso2 {
        Iso2 { c: 1.0, s: 0.0, t }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            self.c * p.x - self.s * p.y + self.t.x,
            self.s * p.x + self.c * p.y + self.t.y,
        )
    }

    /// Rotation part only (for directions).
    pub fn apply_vec(&self, d: Vec2) -> Vec2 {
        Vec2::new(self.c * d.x - self.s * d.y, self.s * d.x + self.c * d.y)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Iso2) -> Iso2 {
        Iso2 {
            c: self.c * other.c - self.s * other.s,
            s: self.s * other.c + self.c * other.s,
            t: self.apply(other.t),
        }
    }

    pub fn inverse(&self) -> Iso2 {
        let inv = Iso2 {
            c: self.c,
            s: -self.s,
            t: Vec2::ZERO,
        };
        Iso2 {
            c: self.c,
            s: -self.s,
            t: -inv.apply(self.t),
        }
    }

    /// The unique orientation-preserving isometry taking `(a0, a1)` to `(b0, b1)`.
    /// The segments should have (nearly) equal length; only the direction and
    /// anchor of the first pair are used.
    pub fn mapping_segment(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Iso2 {
        let theta = (b1 - b0).angle() - (a1 - a0).angle();
        let (s, c) = theta.sin_cos();
        let rot = Iso2 {
            c,
            s,
            t: Vec2::ZERO,
        };
        Iso2 {
            c,
            s,
            t: b0 - rot.apply(a0),
        }
    }

    pub fn rotation_angle(&self) -> f64 {
        self.s.atan2(self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ccw_angle_quadrants() {
        let e = Vec2::new(1.0, 0.0);
        assert_relative_eq!(ccw_angle(e, Vec2::new(0.0, 1.0)), PI / 2.0);
        assert_relative_eq!(ccw_angle(e, Vec2::new(-1.0, 0.0)), PI);
        assert_relative_eq!(ccw_angle(e, Vec2::new(0.0, -1.0)), 3.0 * PI / 2.0);
        assert_relative_eq!(ccw_angle(Vec2::new(0.0, 1.0), e), 3.0 * PI / 2.0);
    }

    #[test]
    fn iso_compose_inverse() {
        let a = Iso2::mapping_segment(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 3.0),
            Vec2::new(2.0, 4.0),
        );
        let p = Vec2::new(0.3, -0.7);
        let q = a.apply(p);
        let r = a.inverse().apply(q);
        assert_relative_eq!(r.x, p.x, epsilon = 1e-14);
        assert_relative_eq!(r.y, p.y, epsilon = 1e-14);

        let b = Iso2::rotation(0.4).compose(&Iso2::translation(Vec2::new(1.0, 2.0)));
        let lhs = a.compose(&b).apply(p);
        let rhs = a.apply(b.apply(p));
        assert_relative_eq!(lhs.x, rhs.x, epsilon = 1e-14);
        assert_relative_eq!(lhs.y, rhs.y, epsilon = 1e-14);
    }

    #[test]
    fn mapping_segment_moves_endpoints() {
        let a0 = Vec2::new(1.0, 1.0);
        let a1 = Vec2::new(2.0, 1.0);
        let b0 = Vec2::new(0.0, 0.0);
        let b1 = Vec2::new(0.0, 1.0);
        let iso = Iso2::mapping_segment(a0, a1, b0, b1);
        assert!(iso.apply(a0).dist(b0) < 1e-14);
        assert!(iso.apply(a1).dist(b1) < 1e-14);
    }
}
