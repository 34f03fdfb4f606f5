use std::sync::Arc;

use super::meshes::{lshape_fan, structured, CellSplit};
use super::{InterfaceSample, ProblemSpec, SubdomainGeometry};
use crate::error::Result;
use crate::fem::{CoefficientField, ScalarFn, Singularity, VectorFn};
use crate::scalar::{Point, Real};

fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Polar angle in `[0, 2π)`.
fn angle<T: Real>(p: Point<T>) -> T {
    let t = p[1].atan2(p[0]);
    if t < T::zero() {
        t + T::TAU()
    } else {
        t
    }
}

/// `∇(ψ(r) Θ(θ))` from the radial derivative part `a = ψ'Θ` and angular part `b = ψΘ'/r`.
fn polar_gradient<T: Real>(p: Point<T>, radial: T, angular: T) -> Point<T> {
    let r = p[0].hypot(p[1]);
    let (c, s) = (p[0] / r, p[1] / r);
    [radial * c - angular * s, radial * s + angular * c]
}

fn zero<T: Real>() -> ScalarFn<T> {
    Arc::new(|_| T::zero())
}

/// `u = r^{2/3} sin(2θ/3)` on `(-1,1)² \ (0,1)×(-1,0)` with `A = I`, `f = 0`.
pub fn lshape<T: Real>() -> Result<ProblemSpec<T>> {
    let u: ScalarFn<T> = Arc::new(|p| {
        let r = p[0].hypot(p[1]);
        if r == T::zero() {
            return T::zero();
        }
        r.powf(lit(2.0 / 3.0)) * (lit::<T>(2.0 / 3.0) * angle(p)).sin()
    });
    let grad: VectorFn<T> = Arc::new(|p| {
        let r = p[0].hypot(p[1]);
        if r == T::zero() {
            return [T::zero(); 2];
        }
        let t = angle(p) / lit(3.0);
        let s = lit::<T>(2.0 / 3.0) * r.powf(lit(-1.0 / 3.0));
        [-s * t.sin(), s * t.cos()]
    });
    Ok(ProblemSpec {
        name: "lshape".into(),
        domain: "(-1,1)^2 minus (0,1)x(-1,0)".into(),
        mesh: lshape_fan()?,
        coefficient: CoefficientField::Identity,
        f: zero(),
        g: u.clone(),
        exact_u: Some(u),
        exact_grad: Some(grad),
        subdomains: None,
        singularity: Some(Singularity {
            center: [T::zero(); 2],
            exponent: lit(2.0 / 3.0),
        }),
    })
}

fn checker_load<T: Real>() -> ScalarFn<T> {
    Arc::new(|p| {
        let cell = |x: T| {
            (x * lit(4.0))
                .floor()
                .max(T::zero())
                .min(lit(3.0))
                .to_i64()
                .unwrap_or(0)
        };
        if (cell(p[0]) + cell(p[1])) % 2 == 1 {
            T::one()
        } else {
            -T::one()
        }
    })
}

fn checker_problem<T: Real>(name: &str, mesh: crate::mesh::Mesh<T>) -> ProblemSpec<T> {
    ProblemSpec {
        name: name.into(),
        domain: "(0,1)^2".into(),
        mesh,
        coefficient: CoefficientField::Identity,
        f: checker_load(),
        g: zero(),
        exact_u: None,
        exact_grad: None,
        subdomains: None,
        singularity: None,
    }
}

/// `f = ±1` on a 4×4 checkerboard of `(0,1)²` (`+1` where `j + k` is odd), `g = 0`.
///
/// The initial mesh uses alternating cell diagonals on the 4×4 grid, on which
/// the load vector vanishes and so does the discrete solution.
pub fn checkerboard<T: Real>() -> Result<ProblemSpec<T>> {
    let mesh = structured([T::zero(); 2], [T::one(); 2], 4, CellSplit::UnionJack, |_| 0)?;
    Ok(checker_problem("checkerboard", mesh))
}

/// The checkerboard load on a coarser 2×2 criss-cross mesh.
pub fn checkerboard_coarse<T: Real>() -> Result<ProblemSpec<T>> {
    let mesh = structured([T::zero(); 2], [T::one(); 2], 2, CellSplit::CrissCross, |_| 0)?;
    Ok(checker_problem("checkerboard-b", mesh))
}

/// Four diagonal strips of `(-1,1)²` separated by the lines `x + y = -1, 0, 1`,
/// with `A = 1, 10, 100, 1000` and a piecewise linear exact solution.
pub fn four_quadrant_interface<T: Real>() -> Result<ProblemSpec<T>> {
    let coef = [1.0, 10.0, 100.0, 1000.0];
    let slope = [1.0, 0.1, 0.01, 0.001];
    let offset = [0.9, 0.0, 0.0, 0.009];
    let region_of = |p: Point<T>| {
        let s = p[0] + p[1];
        if s < -T::one() {
            0
        } else if s < T::zero() {
            1
        } else if s < T::one() {
            2
        } else {
            3
        }
    };
    let branch_u = move |i: usize, p: Point<T>| lit::<T>(slope[i]) * (p[0] + p[1]) + lit(offset[i]);
    let branch_grad = move |i: usize, _p: Point<T>| [lit::<T>(slope[i]); 2];
    let mut interfaces = Vec::new();
    let n: T = lit(std::f64::consts::FRAC_1_SQRT_2);
    for (i, c) in [-1.0, 0.0, 1.0].into_iter().enumerate() {
        for t in [-0.8, -0.4, 0.0, 0.3, 0.7] {
            let (x, y): (f64, f64) = (t, c - t);
            if x.abs() < 1.0 && y.abs() < 1.0 {
                interfaces.push(InterfaceSample {
                    point: [lit(x), lit(y)],
                    normal: [n, n],
                    regions: [i, i + 1],
                });
            }
        }
    }
    let mesh = structured([-T::one(); 2], [T::one(); 2], 4, CellSplit::Anti, region_of)?;
    let u: ScalarFn<T> = Arc::new(move |p| branch_u(region_of(p), p));
    let grad: VectorFn<T> = Arc::new(move |p| branch_grad(region_of(p), p));
    Ok(ProblemSpec {
        name: "interface4".into(),
        domain: "(-1,1)^2 split by x+y = -1, 0, 1".into(),
        mesh,
        coefficient: CoefficientField::piecewise_scalar(&coef.map(lit)),
        f: zero(),
        g: u.clone(),
        exact_u: Some(u),
        exact_grad: Some(grad),
        subdomains: Some(SubdomainGeometry {
            region_of: Arc::new(region_of),
            region_labels: vec![0, 1, 2, 3],
            branch_u: Arc::new(branch_u),
            branch_grad: Arc::new(branch_grad),
            interfaces,
        }),
        singularity: None,
    })
}

const LAYER_CENTER: [f64; 2] = [1.25, -0.25];
const LAYER_STEEPNESS: f64 = 60.0;

/// `u = atan(S(|x - c| - π/3))` with `c = (1.25, -0.25)`, `S = 60` on `(-1,1)²`.
pub fn circular_layer<T: Real>() -> Result<ProblemSpec<T>> {
    let radial = |p: Point<T>| {
        let d = [p[0] - lit(LAYER_CENTER[0]), p[1] - lit(LAYER_CENTER[1])];
        (d, d[0].hypot(d[1]))
    };
    let s_of = |r: T| lit::<T>(LAYER_STEEPNESS) * (r - T::FRAC_PI_3());
    let u: ScalarFn<T> = Arc::new(move |p| s_of(radial(p).1).atan());
    let grad: VectorFn<T> = Arc::new(move |p| {
        let (d, r) = radial(p);
        let s = s_of(r);
        let du = lit::<T>(LAYER_STEEPNESS) / (T::one() + s * s);
        [du * d[0] / r, du * d[1] / r]
    });
    let f: ScalarFn<T> = Arc::new(move |p| {
        let r = radial(p).1;
        let s = s_of(r);
        let big: T = lit(LAYER_STEEPNESS);
        let q = T::one() + s * s;
        lit::<T>(2.0) * s * big * big / (q * q) - big / (q * r)
    });
    let mesh = structured([-T::one(); 2], [T::one(); 2], 8, CellSplit::Forward, |_| 0)?;
    Ok(ProblemSpec {
        name: "layer".into(),
        domain: "(-1,1)^2".into(),
        mesh,
        coefficient: CoefficientField::Identity,
        f,
        g: u.clone(),
        exact_u: Some(u),
        exact_grad: Some(grad),
        subdomains: None,
        singularity: None,
    })
}

const PEAKS: [[f64; 2]; 2] = [[-0.5, 0.5], [0.5, -0.5]];

/// `u = 1/d₁ - 1/d₂`, `d_i = |x - x_i|² + 0.01`, with `A = 10 cos(y) I` on `(-1,1)²`.
pub fn variable_coefficient_peaks<T: Real>() -> Result<ProblemSpec<T>> {
    let rho = |p: Point<T>, i: usize| [p[0] - lit(PEAKS[i][0]), p[1] - lit(PEAKS[i][1])];
    let d = move |p: Point<T>, i: usize| {
        let r = rho(p, i);
        r[0] * r[0] + r[1] * r[1] + lit(0.01)
    };
    let u: ScalarFn<T> = Arc::new(move |p| T::one() / d(p, 0) - T::one() / d(p, 1));
    let grad_u = move |p: Point<T>| {
        let mut g = [T::zero(); 2];
        for (i, sign) in [(0, T::one()), (1, -T::one())] {
            let (r, di) = (rho(p, i), d(p, i));
            let c = -lit::<T>(2.0) * sign / (di * di);
            g[0] = g[0] + c * r[0];
            g[1] = g[1] + c * r[1];
        }
        g
    };
    let laplace_u = move |p: Point<T>| {
        let mut l = T::zero();
        for (i, sign) in [(0, T::one()), (1, -T::one())] {
            let (r, di) = (rho(p, i), d(p, i));
            let rr = r[0] * r[0] + r[1] * r[1];
            l = l + sign * (-lit::<T>(4.0) / (di * di) + lit::<T>(8.0) * rr / (di * di * di));
        }
        l
    };
    let a = |p: Point<T>| lit::<T>(10.0) * p[1].cos();
    let grad_a = |p: Point<T>| [T::zero(), -lit::<T>(10.0) * p[1].sin()];
    let f: ScalarFn<T> = Arc::new(move |p| {
        let g = grad_u(p);
        let ga = grad_a(p);
        -(ga[0] * g[0] + ga[1] * g[1] + a(p) * laplace_u(p))
    });
    let mesh = structured([-T::one(); 2], [T::one(); 2], 8, CellSplit::Forward, |_| 0)?;
    Ok(ProblemSpec {
        name: "peaks".into(),
        domain: "(-1,1)^2".into(),
        mesh,
        coefficient: CoefficientField::Scalar {
            a: Arc::new(a),
            grad: Some(Arc::new(grad_a)),
        },
        f,
        g: u.clone(),
        exact_u: Some(u),
        exact_grad: Some(Arc::new(grad_u)),
        subdomains: None,
        singularity: None,
    })
}

/// Parameters of the four-quadrant interface solution `u = r^γ μ(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KelloggParameters {
    pub gamma: f64,
    pub sigma: f64,
    pub rho: f64,
    pub a1: f64,
    pub a2: f64,
}

pub const KELLOGG: KelloggParameters = KelloggParameters {
    gamma: 0.1,
    sigma: -14.92256510455152,
    rho: std::f64::consts::FRAC_PI_4,
    a1: 161.4476387975881,
    a2: 1.0,
};

/// `(μ(θ), μ'(θ))` using the formula of quadrant `branch` (0..4, counter-clockwise from the positive x-axis).
pub fn kellogg_mu<T: Real>(branch: usize, theta: T) -> (T, T) {
    let KelloggParameters { gamma, sigma, rho, .. } = KELLOGG;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    let (c, phase) = match branch {
        0 => (((half_pi - sigma) * gamma).cos(), half_pi - rho),
        1 => ((rho * gamma).cos(), pi - sigma),
        2 => ((sigma * gamma).cos(), pi + rho),
        _ => (((half_pi - rho) * gamma).cos(), 3.0 * half_pi + sigma),
    };
    let (c, g): (T, T) = (lit(c), lit(gamma));
    let arg = (theta - lit(phase)) * g;
    (c * arg.cos(), -c * g * arg.sin())
}

/// `u = r^γ μ(θ)` with `A = a₁ I` where `xy > 0` and `a₂ I` where `xy < 0`.
///
/// The initial mesh is an 8×8 criss-cross grid of `(-1,1)²` aligned with the axes.
pub fn kellogg<T: Real>() -> Result<ProblemSpec<T>> {
    let gamma: T = lit(KELLOGG.gamma);
    let region_of = |p: Point<T>| {
        let q = (angle(p) / T::FRAC_PI_2()).floor().to_usize().unwrap_or(0);
        q.min(3)
    };
    // The angle seen from quadrant `i`, continued across the positive x-axis.
    let local_angle = |i: usize, p: Point<T>| {
        let t = angle(p);
        if i == 3 && t < T::FRAC_PI_2() {
            t + T::TAU()
        } else if i == 0 && t > lit(4.5) {
            t - T::TAU()
        } else {
            t
        }
    };
    let branch_u = move |i: usize, p: Point<T>| {
        let r = p[0].hypot(p[1]);
        if r == T::zero() {
            return T::zero();
        }
        r.powf(gamma) * kellogg_mu(i, local_angle(i, p)).0
    };
    let branch_grad = move |i: usize, p: Point<T>| {
        let r = p[0].hypot(p[1]);
        if r == T::zero() {
            return [T::zero(); 2];
        }
        let (mu, dmu) = kellogg_mu(i, local_angle(i, p));
        let rg = r.powf(gamma - T::one());
        polar_gradient(p, gamma * rg * mu, rg * dmu)
    };
    let mut interfaces = Vec::new();
    let axes: [(Point<f64>, Point<f64>, [usize; 2]); 4] = [
        ([0.0, 1.0], [-1.0, 0.0], [0, 1]),
        ([-1.0, 0.0], [0.0, -1.0], [1, 2]),
        ([0.0, -1.0], [1.0, 0.0], [2, 3]),
        ([1.0, 0.0], [0.0, 1.0], [3, 0]),
    ];
    for (dir, normal, regions) in axes {
        for r in [0.05, 0.2, 0.45, 0.7, 0.95] {
            interfaces.push(InterfaceSample {
                point: [lit(r * dir[0]), lit(r * dir[1])],
                normal: normal.map(lit),
                regions,
            });
        }
    }
    let labels = [0, 1, 0, 1];
    let mesh = structured([-T::one(); 2], [T::one(); 2], 8, CellSplit::CrissCross, move |c| {
        labels[region_of(c)]
    })?;
    let u: ScalarFn<T> = Arc::new(move |p| branch_u(region_of(p), p));
    let grad: VectorFn<T> = Arc::new(move |p| branch_grad(region_of(p), p));
    Ok(ProblemSpec {
        name: "kellogg".into(),
        domain: "(-1,1)^2 with quadrant coefficients".into(),
        mesh,
        coefficient: CoefficientField::piecewise_scalar(&[lit(KELLOGG.a1), lit(KELLOGG.a2)]),
        f: zero(),
        g: u.clone(),
        exact_u: Some(u),
        exact_grad: Some(grad),
        subdomains: Some(SubdomainGeometry {
            region_of: Arc::new(region_of),
            region_labels: labels.to_vec(),
            branch_u: Arc::new(branch_u),
            branch_grad: Arc::new(branch_grad),
            interfaces,
        }),
        singularity: Some(Singularity {
            center: [T::zero(); 2],
            exponent: gamma,
        }),
    })
}
