use std::fmt;

use serde::Serialize;

use super::ProblemSpec;
use crate::fem::CoefficientField;
use crate::scalar::{Point, Real};

/// Outcome of one oracle; `max_violation` is `None` when the check does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub max_violation: Option<f64>,
    pub tolerance: f64,
    pub samples: usize,
}

impl Check {
    pub fn applicable(&self) -> bool {
        self.max_violation.is_some()
    }

    pub fn passed(&self) -> bool {
        self.max_violation.is_none_or(|v| v <= self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub problem: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem {}", self.problem)?;
        for c in &self.checks {
            match c.max_violation {
                None => writeln!(f, "  {:<12} n/a", c.name)?,
                Some(v) => writeln!(
                    f,
                    "  {:<12} {} max violation {v:.3e} (tolerance {:.0e}, {} samples)",
                    c.name,
                    if c.passed() { "ok  " } else { "FAIL" },
                    c.tolerance,
                    c.samples
                )?,
            }
        }
        Ok(())
    }
}

/// Deterministic low-discrepancy points spread over the elements of the initial mesh.
fn interior_points<T: Real>(problem: &ProblemSpec<T>, samples: usize) -> Vec<Point<f64>> {
    let mesh = &problem.mesh;
    let mut out = Vec::with_capacity(samples);
    let mut i = 0usize;
    while out.len() < samples && i < 50 * samples.max(1) {
        i += 1;
        let (mut s, mut t) = (radical_inverse(i, 2), radical_inverse(i, 3));
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        let tri = mesh.coords((i * 7919) % mesh.n_elements()).map(|p| p.map(T::as_f64));
        let p = [
            tri[0][0] + s * (tri[1][0] - tri[0][0]) + t * (tri[2][0] - tri[0][0]),
            tri[0][1] + s * (tri[1][1] - tri[0][1]) + t * (tri[2][1] - tri[0][1]),
        ];
        let away = problem
            .singularity
            .is_none_or(|sg| (p[0] - sg.center[0].as_f64()).hypot(p[1] - sg.center[1].as_f64()) > 0.2);
        if away {
            out.push(p);
        }
    }
    out
}

fn radical_inverse(mut n: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut x = 0.0;
    while n > 0 {
        x += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    x
}

/// Runs the boundary, continuity, flux, gradient and PDE-residual oracles on a
/// problem with an exact solution; every check is `n/a` otherwise.
pub fn validate<T: Real>(problem: &ProblemSpec<T>, samples: usize) -> ValidationReport {
    let to_t = |p: Point<f64>| p.map(T::lit);
    let mut checks = Vec::new();
    let Some(u) = problem.exact_u.as_ref() else {
        for (name, tol) in [
            ("boundary", 1e-12),
            ("continuity", 1e-10),
            ("flux", 1e-10),
            ("gradient", 1e-5),
            ("pde", 1e-4),
        ] {
            checks.push(Check {
                name,
                max_violation: None,
                tolerance: tol,
                samples: 0,
            });
        }
        return ValidationReport {
            problem: problem.name.clone(),
            checks,
        };
    };

    // Boundary data against the exact solution along every boundary edge.
    let mesh = &problem.mesh;
    let mut worst = 0.0f64;
    let mut n = 0;
    for be in mesh.boundary_edges() {
        let [a, b] = be.vertices.map(|v| mesh.vertices()[v]);
        for t in [0.0, 0.25, 0.5, 0.75] {
            let t = T::lit(t);
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let (ue, ge) = (u(p).as_f64(), (problem.g)(p).as_f64());
            worst = worst.max((ue - ge).abs() / ue.abs().max(1.0));
            n += 1;
        }
    }
    checks.push(Check {
        name: "boundary",
        max_violation: Some(worst),
        tolerance: 1e-12,
        samples: n,
    });

    // Continuity and flux continuity of the branches across interfaces.
    let (mut cont, mut flux) = (None, None);
    let mut n_if = 0;
    if let Some(sd) = &problem.subdomains {
        let (mut wc, mut wf) = (0.0f64, 0.0f64);
        for s in &sd.interfaces {
            let [i, j] = s.regions;
            let (ui, uj) = ((sd.branch_u)(i, s.point).as_f64(), (sd.branch_u)(j, s.point).as_f64());
            wc = wc.max((ui - uj).abs() / ui.abs().max(1.0));
            let fl = |r: usize| {
                let a = problem.coefficient.at(sd.region_labels[r], s.point);
                let g = (sd.branch_grad)(r, s.point);
                let ag = [a[0][0] * g[0] + a[0][1] * g[1], a[1][0] * g[0] + a[1][1] * g[1]];
                (ag[0] * s.normal[0] + ag[1] * s.normal[1]).as_f64()
            };
            wf = wf.max((fl(i) - fl(j)).abs() / fl(i).abs().max(1.0));
            n_if += 1;
        }
        cont = Some(wc);
        flux = Some(wf);
    }
    checks.push(Check {
        name: "continuity",
        max_violation: cont,
        tolerance: 1e-10,
        samples: n_if,
    });
    checks.push(Check {
        name: "flux",
        max_violation: flux,
        tolerance: 1e-10,
        samples: n_if,
    });

    // Gradient and PDE residual by finite differences on the branch containing each point.
    let points = interior_points(problem, samples);
    let eval_u = |region: Option<usize>, p: Point<f64>| -> f64 {
        match (region, &problem.subdomains) {
            (Some(r), Some(sd)) => (sd.branch_u)(r, to_t(p)).as_f64(),
            _ => u(to_t(p)).as_f64(),
        }
    };
    let (mut wg, mut wp) = (None::<f64>, 0.0f64);
    for &p in &points {
        let region = problem.subdomains.as_ref().map(|sd| (sd.region_of)(to_t(p)));
        let label = region.map_or(0, |r| problem.subdomains.as_ref().unwrap().region_labels[r]);
        let uu = |q: Point<f64>| eval_u(region, q);
        if let Some(grad) = problem.exact_grad.as_ref() {
            let g = grad(to_t(p)).map(T::as_f64);
            let h = 1e-6;
            let fd = [
                (uu([p[0] + h, p[1]]) - uu([p[0] - h, p[1]])) / (2.0 * h),
                (uu([p[0], p[1] + h]) - uu([p[0], p[1] - h])) / (2.0 * h),
            ];
            let err = (g[0] - fd[0]).hypot(g[1] - fd[1]) / g[0].hypot(g[1]).max(1e-3);
            wg = Some(wg.unwrap_or(0.0).max(err));
        }
        let a = |q: Point<f64>| -> f64 {
            match &problem.coefficient {
                CoefficientField::Scalar { a, .. } => a(to_t(q)).as_f64(),
                c => c.at(label, to_t(q))[0][0].as_f64(),
            }
        };
        let h = 1e-4;
        let c = uu(p);
        let terms = [
            a([p[0] + h / 2.0, p[1]]) * (uu([p[0] + h, p[1]]) - c),
            a([p[0] - h / 2.0, p[1]]) * (uu([p[0] - h, p[1]]) - c),
            a([p[0], p[1] + h / 2.0]) * (uu([p[0], p[1] + h]) - c),
            a([p[0], p[1] - h / 2.0]) * (uu([p[0], p[1] - h]) - c),
        ];
        let op = -terms.iter().sum::<f64>() / (h * h);
        let scale = terms.iter().map(|t| t.abs()).sum::<f64>() / (h * h);
        let f = (problem.f)(to_t(p)).as_f64();
        wp = wp.max((op - f).abs() / f.abs().max(scale).max(1.0));
    }
    checks.push(Check {
        name: "gradient",
        max_violation: wg,
        tolerance: 1e-5,
        samples: points.len(),
    });
    checks.push(Check {
        name: "pde",
        max_violation: Some(wp),
        tolerance: 1e-4,
        samples: points.len(),
    });
    ValidationReport {
        problem: problem.name.clone(),
        checks,
    }
}
