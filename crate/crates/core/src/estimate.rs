//! A posteriori error estimators: residual, ZZ recovery, and recovery with a
//! divergence residual ("improved"), plus data oscillation.

use std::fmt;
use std::fmt::Write;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{AfemError, Result};
use crate::fem::{CoefficientField, FEFunction, QuadratureRule};
use crate::mesh::{EdgeTopology, Mesh};
use crate::recovery::RecoveredGradient;
use crate::scalar::{dot, mat_vec, quad_form, sub, Point, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Residual,
    Zz,
    #[default]
    Improved,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Residual, EstimatorKind::Zz, EstimatorKind::Improved];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Residual => "residual",
            EstimatorKind::Zz => "zz",
            EstimatorKind::Improved => "improved",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = AfemError;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| AfemError::InvalidConfig(format!("unknown estimator `{s}`")))
    }
}

/// Element indicators and their global aggregates.
///
/// Every indicator splits as `η_K² = term1_K² + term2_K²`: for the improved
/// estimator these are the recovery and divergence parts, for the residual
/// estimator the element and jump parts; the ZZ estimator has `term2 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub kind: EstimatorKind,
    pub eta_k: Vec<T>,
    pub osc_k: Vec<T>,
    pub term1_k: Vec<T>,
    pub term2_k: Vec<T>,
    pub eta: T,
    pub osc: T,
    pub term1: T,
    pub term2: T,
    /// Set when `∇a` had to be approximated by finite differences.
    pub finite_difference: bool,
}

fn l2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

impl<T: Real> Estimate<T> {
    fn from_terms(kind: EstimatorKind, term1_k: Vec<T>, term2_k: Vec<T>, osc: Oscillation<T>) -> Self {
        let eta_k: Vec<T> = term1_k.iter().zip(&term2_k).map(|(&a, &b)| a.hypot(b)).collect();
        Estimate {
            kind,
            eta: l2(&eta_k),
            term1: l2(&term1_k),
            term2: l2(&term2_k),
            eta_k,
            term1_k,
            term2_k,
            osc: osc.global,
            osc_k: osc.per_element,
            finite_difference: false,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.eta_k.len()
    }

    /// `element_id,eta_K,osc_K` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("element_id,eta_K,osc_K\n");
        for (k, (e, o)) in self.eta_k.iter().zip(&self.osc_k).enumerate() {
            let _ = writeln!(out, "{k},{e:?},{o:?}");
        }
        out
    }
}

/// Per-element and global oscillation `h_K ‖f - f_K‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillation<T> {
    pub per_element: Vec<T>,
    pub global: T,
}

pub fn oscillation<T: Real>(mesh: &Mesh<T>, f: &dyn Fn(Point<T>) -> T, quad: &QuadratureRule<T>) -> Oscillation<T> {
    let per_element: Vec<T> = (0..mesh.n_elements())
        .map(|k| {
            let tri = mesh.coords(k);
            let mean = quad.integrate(&tri, f) / mesh.area(k);
            let dev = quad.integrate(&tri, |p| {
                let d = f(p) - mean;
                d * d
            });
            mesh.element_diameter(k) * dev.max(T::zero()).sqrt()
        })
        .collect();
    Oscillation {
        global: l2(&per_element),
        per_element,
    }
}

/// `[A∇u_h · n]` across an interior edge: flux of the element on the side the
/// normal points out of minus the flux of its neighbour.
pub fn edge_jump<T: Real>(
    u_h: &FEFunction<T>,
    coefficient: &CoefficientField<T>,
    topology: &EdgeTopology<T>,
    edge: usize,
) -> Result<T> {
    let e = topology.edges.get(edge).ok_or(AfemError::BadIndex {
        index: edge,
        limit: topology.edges.len(),
        context: "edge",
    })?;
    let (minus, plus) = match e.elements {
        [Some(a), Some(b)] => (a, b),
        _ => return Err(AfemError::NotInteriorEdge { edge }),
    };
    let mesh = u_h.mesh();
    let p = mesh.vertices();
    let mid = [
        (p[e.vertices[0]][0] + p[e.vertices[1]][0]) * T::lit(0.5),
        (p[e.vertices[0]][1] + p[e.vertices[1]][1]) * T::lit(0.5),
    ];
    let flux = |k: usize| {
        dot(
            mat_vec(&coefficient.at(mesh.subdomain(k), mid), u_h.element_gradient(k)),
            e.normal,
        )
    };
    Ok(flux(minus) - flux(plus))
}

/// `η_K² = h_K²‖R_K‖² + Σ_{e⊂∂K} h_e‖J_e‖²_e`, with `R_K = f + ∇a·∇u_h`
/// (just `f` when `A` is elementwise constant).
pub fn residual_indicator<T: Real>(
    u_h: &FEFunction<T>,
    coefficient: &CoefficientField<T>,
    f: &dyn Fn(Point<T>) -> T,
    quad: &QuadratureRule<T>,
) -> Result<Estimate<T>> {
    let mesh = u_h.mesh();
    let topo = mesh.edge_topology();
    let mut jump_sq = vec![T::zero(); topo.edges.len()];
    for (i, e) in topo.edges.iter().enumerate() {
        if !e.is_boundary() {
            let j = edge_jump(u_h, coefficient, &topo, i)?;
            // h_e ‖J‖²_e with J constant along the edge.
            jump_sq[i] = e.length * e.length * j * j;
        }
    }
    let grad_a = coefficient_gradient(mesh, coefficient, true)?;
    let mut element = Vec::with_capacity(mesh.n_elements());
    let mut jumps = Vec::with_capacity(mesh.n_elements());
    for k in 0..mesh.n_elements() {
        let tri = mesh.coords(k);
        let gu = u_h.element_gradient(k);
        let r_sq = quad.integrate(&tri, |p| {
            let r = match &grad_a {
                Some(ga) => f(p) + dot(ga(p), gu),
                None => f(p),
            };
            r * r
        });
        element.push(mesh.element_diameter(k) * r_sq.max(T::zero()).sqrt());
        jumps.push(
            topo.element_edges[k]
                .iter()
                .fold(T::zero(), |s, &e| s + jump_sq[e])
                .sqrt(),
        );
    }
    let mut est = Estimate::from_terms(EstimatorKind::Residual, element, jumps, oscillation(mesh, f, quad));
    est.finite_difference = uses_finite_difference(coefficient);
    Ok(est)
}

/// `η_K = ‖A^{1/2}(G - ∇u_h)‖_K`.
pub fn zz_indicator<T: Real>(
    u_h: &FEFunction<T>,
    g: &RecoveredGradient<T>,
    coefficient: &CoefficientField<T>,
) -> Result<Estimate<T>> {
    check_same_mesh(u_h, g)?;
    let mesh = u_h.mesh();
    let quad = QuadratureRule::default();
    let term1 = zz_terms(u_h, g, coefficient, &quad);
    let zero = vec![T::zero(); mesh.n_elements()];
    let osc = Oscillation {
        per_element: zero.clone(),
        global: T::zero(),
    };
    Ok(Estimate::from_terms(EstimatorKind::Zz, term1, zero, osc))
}

/// `η_K² = ‖A^{1/2}(G - ∇u_h)‖²_K + h_K²‖A^{-1/2}(f + ∇·(AG))‖²_K`.
///
/// `A^{-1/2}` is applied as the scalar weight `λ_min(A)^{-1/2}`. For a variable
/// scalar coefficient without an analytic gradient, `∇a` is approximated by
/// central differences when `finite_difference` is true.
pub fn improved_indicator<T: Real>(
    u_h: &FEFunction<T>,
    g: &RecoveredGradient<T>,
    coefficient: &CoefficientField<T>,
    f: &dyn Fn(Point<T>) -> T,
    quad: &QuadratureRule<T>,
    finite_difference: bool,
) -> Result<Estimate<T>> {
    check_same_mesh(u_h, g)?;
    let mesh = u_h.mesh();
    let term1 = zz_terms(u_h, g, coefficient, quad);
    let grad_a = coefficient_gradient(mesh, coefficient, finite_difference)?;
    let mut term2 = Vec::with_capacity(mesh.n_elements());
    for k in 0..mesh.n_elements() {
        let tri = mesh.coords(k);
        let label = mesh.subdomain(k);
        let m = g.jacobian(k);
        let sq = match (coefficient, &grad_a) {
            (CoefficientField::Scalar { a, .. }, Some(ga)) => {
                let trace = m[0][0] + m[1][1];
                integrate_bary(quad, &tri, |p, b| {
                    let av = a(p);
                    let r = f(p) + dot(ga(p), g.eval(k, b)) + av * trace;
                    r * r / av
                })
            }
            _ => {
                let am = coefficient.at(label, tri[0]);
                let div = am[0][0] * m[0][0] + am[0][1] * m[1][0] + am[1][0] * m[0][1] + am[1][1] * m[1][1];
                let w = coefficient.inverse_weight(label, tri[0]);
                quad.integrate(&tri, |p| {
                    let r = f(p) + div;
                    r * r
                }) * w
            }
        };
        term2.push(mesh.element_diameter(k) * sq.max(T::zero()).sqrt());
    }
    let mut est = Estimate::from_terms(EstimatorKind::Improved, term1, term2, oscillation(mesh, f, quad));
    est.finite_difference = uses_finite_difference(coefficient);
    Ok(est)
}

/// `η / ‖A^{1/2}(∇u - ∇u_h)‖`.
pub fn effectivity<T: Real>(estimate: &Estimate<T>, exact_error: T) -> Result<T> {
    if !(exact_error >= T::lit(1e-12)) {
        return Err(AfemError::ZeroError(exact_error.as_f64()));
    }
    Ok(estimate.eta / exact_error)
}

/// `max_K η_K / (Σ_{K'⊂ω_K} err_{K'}² + osc_{K'}²)^{1/2}` over elements with a
/// nonzero denominator, `ω_K` being the elements sharing a vertex with `K`.
pub fn local_efficiency_constant<T: Real>(mesh: &Mesh<T>, eta_k: &[T], error_sq: &[T], osc_k: &[T]) -> T {
    let patches = mesh.element_patches();
    let mut worst = T::zero();
    for (k, patch) in patches.iter().enumerate() {
        let local = patch
            .iter()
            .fold(T::zero(), |s, &j| s + error_sq[j] + osc_k[j] * osc_k[j]);
        if local > T::zero() {
            worst = worst.max(eta_k[k] / local.sqrt());
        }
    }
    worst
}

/// Dispatches on `kind`; the recovered gradient is ignored by the residual estimator.
pub fn compute_estimate<T: Real>(
    kind: EstimatorKind,
    u_h: &FEFunction<T>,
    g: &RecoveredGradient<T>,
    coefficient: &CoefficientField<T>,
    f: &dyn Fn(Point<T>) -> T,
    quad: &QuadratureRule<T>,
    finite_difference: bool,
) -> Result<Estimate<T>> {
    match kind {
        EstimatorKind::Residual => residual_indicator(u_h, coefficient, f, quad),
        EstimatorKind::Zz => zz_indicator(u_h, g, coefficient),
        EstimatorKind::Improved => improved_indicator(u_h, g, coefficient, f, quad, finite_difference),
    }
}

fn check_same_mesh<T: Real>(u_h: &FEFunction<T>, g: &RecoveredGradient<T>) -> Result<()> {
    if Arc::ptr_eq(u_h.mesh(), g.mesh()) || **u_h.mesh() == **g.mesh() {
        Ok(())
    } else {
        Err(AfemError::MeshMismatch)
    }
}

fn zz_terms<T: Real>(
    u_h: &FEFunction<T>,
    g: &RecoveredGradient<T>,
    coefficient: &CoefficientField<T>,
    quad: &QuadratureRule<T>,
) -> Vec<T> {
    let mesh = u_h.mesh();
    (0..mesh.n_elements())
        .map(|k| {
            let gu = u_h.element_gradient(k);
            let w = g.corners()[k].map(|c| sub(c, gu));
            let sq = match coefficient {
                CoefficientField::Scalar { a, .. } => integrate_bary(quad, &mesh.coords(k), |p, b| {
                    let d = [
                        b[0] * w[0][0] + b[1] * w[1][0] + b[2] * w[2][0],
                        b[0] * w[0][1] + b[1] * w[1][1] + b[2] * w[2][1],
                    ];
                    a(p) * dot(d, d)
                }),
                _ => {
                    // ∫_K vᵀAv for linear v with corner values w_i.
                    let am = coefficient.at(mesh.subdomain(k), mesh.centroid(k));
                    let s = [w[0][0] + w[1][0] + w[2][0], w[0][1] + w[1][1] + w[2][1]];
                    mesh.area(k) / T::lit(12.0)
                        * (quad_form(&am, w[0]) + quad_form(&am, w[1]) + quad_form(&am, w[2]) + quad_form(&am, s))
                }
            };
            sq.max(T::zero()).sqrt()
        })
        .collect()
}

fn integrate_bary<T: Real>(quad: &QuadratureRule<T>, tri: &[Point<T>; 3], f: impl Fn(Point<T>, [T; 3]) -> T) -> T {
    quad.barycentric_points()
        .iter()
        .zip(quad.weights())
        .fold(T::zero(), |s, (b, &w)| {
            let p = [
                b[0] * tri[0][0] + b[1] * tri[1][0] + b[2] * tri[2][0],
                b[0] * tri[0][1] + b[1] * tri[1][1] + b[2] * tri[2][1],
            ];
            s + w * f(p, *b)
        })
        * crate::fem::triangle_area(tri)
}

type GradFn<T> = Box<dyn Fn(Point<T>) -> Point<T>>;

fn uses_finite_difference<T>(coefficient: &CoefficientField<T>) -> bool {
    matches!(coefficient, CoefficientField::Scalar { grad: None, .. })
}

/// `∇a` for a variable scalar coefficient, `None` when `A` is elementwise constant.
fn coefficient_gradient<T: Real>(
    mesh: &Mesh<T>,
    coefficient: &CoefficientField<T>,
    finite_difference: bool,
) -> Result<Option<GradFn<T>>> {
    match coefficient {
        CoefficientField::Scalar { grad: Some(g), .. } => {
            let g = g.clone();
            Ok(Some(Box::new(move |p| g(p))))
        }
        CoefficientField::Scalar { a, grad: None } => {
            if !finite_difference {
                return Err(AfemError::MissingCoefficientGradient);
            }
            let h = T::lit(1e-6) * domain_diameter(mesh);
            let a = a.clone();
            let two_h = h + h;
            Ok(Some(Box::new(move |p| {
                [
                    (a([p[0] + h, p[1]]) - a([p[0] - h, p[1]])) / two_h,
                    (a([p[0], p[1] + h]) - a([p[0], p[1] - h])) / two_h,
                ]
            })))
        }
        _ => Ok(None),
    }
}

fn domain_diameter<T: Real>(mesh: &Mesh<T>) -> T {
    let mut lo = [T::infinity(); 2];
    let mut hi = [T::neg_infinity(); 2];
    for p in mesh.vertices() {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (hi[0] - lo[0]).hypot(hi[1] - lo[1])
}
