//! Energy-type error norms against an exact gradient.
//!
//! Elements that touch a declared point singularity are integrated with a
//! self-similar extrapolation: if the integrand is homogeneous of degree `p`
//! about a vertex `z`, then over the corner child `z + (K - z)/2` it integrates
//! to `2^-(p+2)` times the integral over `K`, so
//! `∫_K = ∫_{K \ corner} / (1 - 2^-(p+2))`.

use super::coefficient::{CoefficientField, VectorFn};
use super::function::FEFunction;
use super::quadrature::{red_children, triangle_area, QuadratureRule};
use crate::mesh::Mesh;
use crate::scalar::{mat_vec, norm, quad_form, sub, Mat2, Point, Real};

/// A point where the exact solution behaves like `r^exponent`.
///
/// Inside every element having `center` as a vertex, `∇u(center + s·x)` must
/// equal `s^(exponent-1) ∇u(center + x)` for `s ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity<T> {
    pub center: Point<T>,
    pub exponent: T,
}

/// Quadrature policy for error norms.
#[derive(Debug, Clone)]
pub struct ErrorIntegrator<T> {
    pub quad: QuadratureRule<T>,
    pub singularity: Option<Singularity<T>>,
    /// Subdivision levels for the non-corner part of a singular element.
    pub singular_levels: u32,
    /// Subdivision levels for elements within two diameters of the singularity.
    pub near_levels: u32,
}

impl<T: Real> ErrorIntegrator<T> {
    pub fn new(quad: QuadratureRule<T>) -> Self {
        ErrorIntegrator {
            quad,
            singularity: None,
            singular_levels: 3,
            near_levels: 2,
        }
    }

    pub fn with_singularity(mut self, singularity: Option<Singularity<T>>) -> Self {
        self.singularity = singularity;
        self
    }
}

impl<T: Real> Default for ErrorIntegrator<T> {
    fn default() -> Self {
        Self::new(QuadratureRule::default())
    }
}

/// Global norm plus per-element squared contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError<T> {
    pub global: T,
    pub element_sq: Vec<T>,
}

impl<T: Real> FieldError<T> {
    fn from_squares(element_sq: Vec<T>) -> Self {
        let global = element_sq.iter().fold(T::zero(), |s, &x| s + x).sqrt();
        FieldError { global, element_sq }
    }
}

/// `‖A^{1/2}(∇u - ∇u_h)‖` with per-element contributions.
pub fn energy_error<T: Real>(
    u_h: &FEFunction<T>,
    exact_grad: &VectorFn<T>,
    coefficient: &CoefficientField<T>,
    integrator: &ErrorIntegrator<T>,
) -> FieldError<T> {
    let corners: Vec<[Point<T>; 3]> = u_h.gradients().into_iter().map(|g| [g; 3]).collect();
    linear_field_error(u_h.mesh(), &corners, exact_grad, coefficient, integrator)
}

/// `‖A^{1/2}(∇u - W)‖` for an elementwise-linear vector field `W` given by its
/// three corner values on each element.
pub fn linear_field_error<T: Real>(
    mesh: &Mesh<T>,
    corners: &[[Point<T>; 3]],
    exact_grad: &VectorFn<T>,
    coefficient: &CoefficientField<T>,
    integrator: &ErrorIntegrator<T>,
) -> FieldError<T> {
    assert_eq!(corners.len(), mesh.n_elements(), "corner field does not match mesh");
    let sq = (0..mesh.n_elements())
        .map(|k| element_error_sq(mesh, k, &corners[k], exact_grad, coefficient, integrator))
        .collect();
    FieldError::from_squares(sq)
}

fn element_error_sq<T: Real>(
    mesh: &Mesh<T>,
    k: usize,
    corners: &[Point<T>; 3],
    exact_grad: &VectorFn<T>,
    coefficient: &CoefficientField<T>,
    integrator: &ErrorIntegrator<T>,
) -> T {
    let tri = mesh.coords(k);
    let label = mesh.subdomain(k);
    let constant_a = coefficient.is_elementwise_constant();
    if let (Some(s), true) = (integrator.singularity, constant_a) {
        if let Some(i) = tri.iter().position(|&p| p == s.center) {
            let a = coefficient.at(label, s.center);
            return singular_element_error_sq(&tri, i, corners, exact_grad, &a, s.exponent, integrator);
        }
    }
    let integrand = |p: Point<T>, b: [T; 3]| {
        let w = [
            b[0] * corners[0][0] + b[1] * corners[1][0] + b[2] * corners[2][0],
            b[0] * corners[0][1] + b[1] * corners[1][1] + b[2] * corners[2][1],
        ];
        let d = sub(exact_grad(p), w);
        quad_form(&coefficient.at(label, p), d)
    };
    let levels = match integrator.singularity {
        Some(s) if near(&tri, s.center, mesh.element_diameter(k)) => integrator.near_levels,
        _ => 0,
    };
    integrate_with_barycentric(&integrator.quad, &tri, levels, &integrand)
}

fn near<T: Real>(tri: &[Point<T>; 3], c: Point<T>, h: T) -> bool {
    tri.iter().any(|&p| norm(sub(p, c)) < T::lit(2.0) * h)
}

/// Integrates `f(x, λ(x))` where `λ` are barycentric coordinates of `x` in `tri`,
/// on `4^levels` sub-triangles.
fn integrate_with_barycentric<T: Real, F: Fn(Point<T>, [T; 3]) -> T>(
    quad: &QuadratureRule<T>,
    tri: &[Point<T>; 3],
    levels: u32,
    f: &F,
) -> T {
    let mut total = T::zero();
    let mut visit = |sub_tri: &[Point<T>; 3]| {
        for (p, w) in quad.physical(sub_tri) {
            total = total + w * f(p, barycentric(tri, p));
        }
    };
    super::quadrature::for_each_subtriangle(tri, levels, &mut visit);
    total
}

fn barycentric<T: Real>(tri: &[Point<T>; 3], p: Point<T>) -> [T; 3] {
    let d = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
    let l1 = ((p[0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (p[1] - tri[0][1])) / d;
    let l2 = ((tri[1][0] - tri[0][0]) * (p[1] - tri[0][1]) - (p[0] - tri[0][0]) * (tri[1][1] - tri[0][1])) / d;
    [T::one() - l1 - l2, l1, l2]
}

/// Error on an element whose vertex `s` is the singular point.
fn singular_element_error_sq<T: Real>(
    tri: &[Point<T>; 3],
    s: usize,
    corners: &[Point<T>; 3],
    exact_grad: &VectorFn<T>,
    a: &Mat2<T>,
    exponent: T,
    integrator: &ErrorIntegrator<T>,
) -> T {
    let z = tri[s];
    let rotated = [tri[s], tri[(s + 1) % 3], tri[(s + 2) % 3]];
    // Moments: [∇uᵀA∇u, ∂x u, ∂y u, (x-z)_0 ∂x u, (x-z)_0 ∂y u, (x-z)_1 ∂x u, (x-z)_1 ∂y u].
    let degrees = [
        T::lit(2.0) * (exponent - T::one()),
        exponent - T::one(),
        exponent - T::one(),
        exponent,
        exponent,
        exponent,
        exponent,
    ];
    let children = red_children(&rotated);
    let mut rest = [T::zero(); 7];
    for child in &children[1..] {
        super::quadrature::for_each_subtriangle(child, integrator.singular_levels, &mut |t| {
            for (p, w) in integrator.quad.physical(t) {
                let g = exact_grad(p);
                let r = sub(p, z);
                let vals = [
                    quad_form(a, g),
                    g[0],
                    g[1],
                    r[0] * g[0],
                    r[0] * g[1],
                    r[1] * g[0],
                    r[1] * g[1],
                ];
                for i in 0..7 {
                    rest[i] = rest[i] + w * vals[i];
                }
            }
        });
    }
    let two = T::lit(2.0);
    let mut m = [T::zero(); 7];
    for i in 0..7 {
        m[i] = rest[i] / (T::one() - two.powf(-(degrees[i] + two)));
    }

    // W(x) = W(z) + M (x - z) with M_ab = Σ_i W_i[a] ∂_b λ_i.
    let grads = crate::mesh::basis_gradients(tri);
    let mut mm = [[T::zero(); 2]; 2];
    for i in 0..3 {
        for aa in 0..2 {
            for b in 0..2 {
                mm[aa][b] = mm[aa][b] + corners[i][aa] * grads[i][b];
            }
        }
    }
    let wz = corners[s];
    let j = [m[1], m[2]];
    let q = [[m[3], m[4]], [m[5], m[6]]];
    // ∫ Wᵀ A ∇u = W(z)ᵀ A J + Σ_{a,b,c} M_ab A_ac Q_bc.
    let mut cross_term = crate::scalar::dot(wz, mat_vec(a, j));
    for aa in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                cross_term = cross_term + mm[aa][b] * a[aa][c] * q[b][c];
            }
        }
    }
    let area = triangle_area(tri);
    let sum = [
        corners[0][0] + corners[1][0] + corners[2][0],
        corners[0][1] + corners[1][1] + corners[2][1],
    ];
    let ww = area / T::lit(12.0)
        * (quad_form(a, corners[0]) + quad_form(a, corners[1]) + quad_form(a, corners[2]) + quad_form(a, sum));
    (m[0] - two * cross_term + ww).max(T::zero())
}
