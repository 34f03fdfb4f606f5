//! Symmetric quadrature rules on triangles in barycentric form.

use crate::scalar::{cross, sub, Point, Real};

/// Barycentric points and area-normalized weights (they sum to one).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    points: Vec<[T; 3]>,
    weights: Vec<T>,
    degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    /// One-point centroid rule, exact for degree 1.
    pub fn centroid() -> Self {
        let t = T::one() / T::lit(3.0);
        QuadratureRule {
            points: vec![[t, t, t]],
            weights: vec![T::one()],
            degree: 1,
        }
    }

    /// Three edge-midpoint rule, exact for degree 2.
    pub fn edge_midpoints() -> Self {
        let h = T::lit(0.5);
        let z = T::zero();
        let w = T::one() / T::lit(3.0);
        QuadratureRule {
            points: vec![[h, h, z], [z, h, h], [h, z, h]],
            weights: vec![w, w, w],
            degree: 2,
        }
    }

    /// Seven-point rule exact for degree 5 (Radon).
    pub fn seven_point() -> Self {
        let s15 = 15f64.sqrt();
        let third = 1.0 / 3.0;
        let a1 = (6.0 - s15) / 21.0;
        let b1 = (9.0 + 2.0 * s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let a2 = (6.0 + s15) / 21.0;
        let b2 = (9.0 - 2.0 * s15) / 21.0;
        let w2 = (155.0 + s15) / 1200.0;
        let pts = [
            [third, third, third],
            [a1, a1, b1],
            [a1, b1, a1],
            [b1, a1, a1],
            [a2, a2, b2],
            [a2, b2, a2],
            [b2, a2, a2],
        ];
        let ws = [0.225, w1, w1, w1, w2, w2, w2];
        QuadratureRule {
            points: pts.iter().map(|p| p.map(T::lit)).collect(),
            weights: ws.iter().map(|&w| T::lit(w)).collect(),
            degree: 5,
        }
    }

    /// Rule with the smallest number of points exact for `degree` (up to 5).
    pub fn with_degree(degree: usize) -> Option<Self> {
        match degree {
            0 | 1 => Some(Self::centroid()),
            2 => Some(Self::edge_midpoints()),
            3..=5 => Some(Self::seven_point()),
            _ => None,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn barycentric_points(&self) -> &[[T; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Physical quadrature points and absolute weights on a triangle.
    pub fn physical(&self, tri: &[Point<T>; 3]) -> impl Iterator<Item = (Point<T>, T)> + '_ {
        let area = triangle_area(tri);
        let tri = *tri;
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(b, &w)| (from_barycentric(&tri, b), w * area))
    }

    /// `∫_tri f`.
    pub fn integrate<F: FnMut(Point<T>) -> T>(&self, tri: &[Point<T>; 3], mut f: F) -> T {
        self.physical(tri).fold(T::zero(), |acc, (p, w)| acc + w * f(p))
    }

    /// `∫_tri f` on `4^levels` congruent sub-triangles.
    pub fn integrate_composite<F: FnMut(Point<T>) -> T>(&self, tri: &[Point<T>; 3], levels: u32, mut f: F) -> T {
        let mut total = T::zero();
        for_each_subtriangle(tri, levels, &mut |t| total = total + self.integrate(t, &mut f));
        total
    }
}

impl<T: Real> Default for QuadratureRule<T> {
    fn default() -> Self {
        Self::seven_point()
    }
}

pub(crate) fn triangle_area<T: Real>(tri: &[Point<T>; 3]) -> T {
    T::lit(0.5) * cross(sub(tri[1], tri[0]), sub(tri[2], tri[0])).abs()
}

pub(crate) fn from_barycentric<T: Real>(tri: &[Point<T>; 3], b: &[T; 3]) -> Point<T> {
    [
        b[0] * tri[0][0] + b[1] * tri[1][0] + b[2] * tri[2][0],
        b[0] * tri[0][1] + b[1] * tri[1][1] + b[2] * tri[2][1],
    ]
}

/// Midpoint (red) subdivision of a triangle into four; child 0 is the corner at vertex 0.
pub(crate) fn red_children<T: Real>(t: &[Point<T>; 3]) -> [[Point<T>; 3]; 4] {
    let h = T::lit(0.5);
    let mid = |a: Point<T>, b: Point<T>| [(a[0] + b[0]) * h, (a[1] + b[1]) * h];
    let m01 = mid(t[0], t[1]);
    let m12 = mid(t[1], t[2]);
    let m20 = mid(t[2], t[0]);
    [[t[0], m01, m20], [m01, t[1], m12], [m20, m12, t[2]], [m12, m20, m01]]
}

pub(crate) fn for_each_subtriangle<T: Real, F: FnMut(&[Point<T>; 3])>(tri: &[Point<T>; 3], levels: u32, f: &mut F) {
    if levels == 0 {
        f(tri);
    } else {
        for c in red_children(tri) {
            for_each_subtriangle(&c, levels - 1, f);
        }
    }
}
