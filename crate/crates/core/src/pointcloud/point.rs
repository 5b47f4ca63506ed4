use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, other: Self) -> T {
        (other - self).norm()
    }

    #[inline]
    pub fn midpoint(self, other: Self) -> Self {
        let half = T::lit(0.5);
        Self::new((self.x + other.x) * half, (self.y + other.y) * half)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector in the same direction; the zero vector is returned unchanged.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            Self::new(self.x / n, self.y / n)
        } else {
            self
        }
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Real> AddAssign for Point<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// One of the four edges of the rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
            Side::Bottom => 2,
            Side::Top => 3,
        }
    }

    pub fn outward_normal<T: Real>(self) -> Point<T> {
        let (o, z) = (T::one(), T::zero());
        match self {
            Side::Left => Point::new(-o, z),
            Side::Right => Point::new(o, z),
            Side::Bottom => Point::new(z, -o),
            Side::Top => Point::new(z, o),
        }
    }
}

/// Axis-aligned rectangle `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub xmin: T,
    pub xmax: T,
    pub ymin: T,
    pub ymax: T,
}

impl<T: Real> Default for Rect<T> {
    /// The benchmark domain `[-1, 1]^2`.
    fn default() -> Self {
        Self::new(-T::one(), T::one(), -T::one(), T::one())
    }
}

impl<T: Real> Rect<T> {
    pub fn new(xmin: T, xmax: T, ymin: T, ymax: T) -> Self {
        Self {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    pub fn width(&self) -> T {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> T {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn is_valid(&self) -> bool {
        self.xmin.is_finite()
            && self.xmax.is_finite()
            && self.ymin.is_finite()
            && self.ymax.is_finite()
            && self.xmax > self.xmin
            && self.ymax > self.ymin
    }

    /// Counter-clockwise corners starting at `(xmin, ymin)`.
    pub fn corners(&self) -> [Point<T>; 4] {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmax, self.ymax),
            Point::new(self.xmin, self.ymax),
        ]
    }

    pub fn contains(&self, p: Point<T>, tol: T) -> bool {
        p.x >= self.xmin - tol
            && p.x <= self.xmax + tol
            && p.y >= self.ymin - tol
            && p.y <= self.ymax + tol
    }

    pub fn distance_to_boundary(&self, p: Point<T>) -> T {
        (p.x - self.xmin)
            .min(self.xmax - p.x)
            .min(p.y - self.ymin)
            .min(self.ymax - p.y)
    }

    /// Sides whose line passes within `tol` of `p`.
    pub fn sides_at(&self, p: Point<T>, tol: T) -> Vec<Side> {
        let mut sides = Vec::with_capacity(2);
        if (p.x - self.xmin).abs() <= tol {
            sides.push(Side::Left);
        }
        if (p.x - self.xmax).abs() <= tol {
            sides.push(Side::Right);
        }
        if (p.y - self.ymin).abs() <= tol {
            sides.push(Side::Bottom);
        }
        if (p.y - self.ymax).abs() <= tol {
            sides.push(Side::Top);
        }
        sides
    }

    /// Outward unit normal at a boundary point; corners get the normalized
    /// sum of both edge normals. `None` away from the boundary.
    pub fn outward_normal(&self, p: Point<T>, tol: T) -> Option<Point<T>> {
        let sides = self.sides_at(p, tol);
        if sides.is_empty() {
            return None;
        }
        let sum = sides
            .iter()
            .fold(Point::zero(), |acc, s| acc + s.outward_normal());
        Some(sum.normalized())
    }
}
