//! Dörfler marking and the SOLVE → ESTIMATE → MARK → REFINE loop.

use std::fmt;
use std::fmt::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{AfemError, Result};
use crate::estimate::{
    compute_estimate, effectivity, improved_indicator, local_efficiency_constant, Estimate, EstimatorKind,
};
use crate::fem::{
    apply_dirichlet, assemble_system, energy_error, CoefficientField, ErrorIntegrator, FEFunction, QuadratureRule,
    SolverSettings,
};
use crate::mesh::{refine, MarkSet, Mesh};
use crate::problems::ProblemSpec;
use crate::recovery::{recover, recovered_error, RecoveredGradient, RecoveryMode, Weighting};
use crate::scalar::Real;

/// Parameters of the adaptive loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveConfig {
    pub theta_e: f64,
    pub theta_0: f64,
    /// Stop once the global estimator drops to this value.
    pub tolerance: f64,
    /// Maximum number of SOLVE steps.
    pub max_iterations: usize,
    /// Stop after the first solve with at least this many degrees of freedom.
    pub max_dofs: usize,
    /// Bisection generations per marked element: 1, or 3 for the interior-node property.
    pub depth: usize,
    pub estimator: EstimatorKind,
    /// `None` picks per-subdomain recovery for piecewise coefficients with several subdomains.
    pub recovery: Option<RecoveryMode>,
    pub weighting: Weighting,
    pub solver: SolverSettings,
    /// Approximate `∇a` by finite differences when the coefficient has no analytic gradient.
    pub finite_difference: bool,
    /// Record wall-clock seconds per iteration; off by default so that histories are reproducible.
    pub record_timing: bool,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            theta_e: 0.5,
            theta_0: 0.5,
            tolerance: 1e-2,
            max_iterations: 100,
            max_dofs: 200_000,
            depth: 1,
            estimator: EstimatorKind::Improved,
            recovery: None,
            weighting: Weighting::Area,
            solver: SolverSettings::default(),
            finite_difference: true,
            record_timing: false,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.theta_e) || !open_unit(self.theta_0) {
            return Err(AfemError::InvalidConfig(
                "theta_e and theta_0 must lie in (0, 1)".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(AfemError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(AfemError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.depth != 1 && self.depth != 3 {
            return Err(AfemError::InvalidDepth(self.depth));
        }
        if !(self.solver.tol_rel > 0.0) {
            return Err(AfemError::InvalidConfig("solver tolerance must be positive".into()));
        }
        Ok(())
    }

    /// The recovery mode used for `coefficient` on `mesh`.
    pub fn recovery_for<T: Real>(&self, coefficient: &CoefficientField<T>, mesh: &Mesh<T>) -> RecoveryMode {
        self.recovery.unwrap_or(match coefficient {
            CoefficientField::PiecewiseConstant(_) if mesh.n_subdomains() > 1 => RecoveryMode::PerSubdomain,
            _ => RecoveryMode::Global,
        })
    }
}

const BULK_SLACK: f64 = 1e-12;

/// Indices sorted by value descending, ties by index ascending.
fn descending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Minimal set carrying `θ²` of `Σ v_K²`, picked greedily by descending `v_K`.
pub fn mark_bulk<T: Real>(values: &[T], theta: f64) -> MarkSet {
    let order = descending_order(values);
    let total = order.iter().fold(T::zero(), |s, &k| s + values[k] * values[k]);
    // Relative slack so that e.g. θ = √0.5 does not lose an exact tie to rounding.
    let target = T::lit(theta * theta) * total * (T::one() - T::lit(BULK_SLACK));
    let mut picked = Vec::new();
    let mut sum = T::zero();
    for &k in &order {
        if sum >= target && !picked.is_empty() {
            break;
        }
        if target == T::zero() {
            break;
        }
        picked.push(k);
        sum = sum + values[k] * values[k];
    }
    if let Some(&last) = picked.last() {
        debug_assert!(
            sum - values[last] * values[last] < target,
            "bulk marking is not minimal"
        );
    }
    MarkSet::new(picked)
}

/// Marking strategy E: the smallest set with `Σ_M η_K² ≥ θ_E² η²`.
pub fn mark_e<T: Real>(estimate: &Estimate<T>, theta_e: f64) -> MarkSet {
    mark_bulk(&estimate.eta_k, theta_e)
}

/// Marking strategy R: enlarges `marks` minimally until `Σ_M osc_K² ≥ θ_0² osc²`.
pub fn mark_r<T: Real>(marks: &MarkSet, osc_k: &[T], theta_0: f64) -> MarkSet {
    let total = descending_order(osc_k)
        .iter()
        .fold(T::zero(), |s, &k| s + osc_k[k] * osc_k[k]);
    let target = T::lit(theta_0 * theta_0) * total * (T::one() - T::lit(BULK_SLACK));
    let mut current = marks.iter().fold(T::zero(), |s, k| s + osc_k[k] * osc_k[k]);
    let mut out = marks.clone();
    if current >= target {
        return out;
    }
    for k in descending_order(osc_k) {
        if current >= target {
            break;
        }
        if !marks.contains(k) {
            out.insert(k);
            current = current + osc_k[k] * osc_k[k];
        }
    }
    out
}

/// One row of the convergence history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub k: usize,
    pub nv: usize,
    pub ndof: usize,
    pub ne: usize,
    pub eta: f64,
    /// `‖A^{1/2}(G - ∇u_h)‖`.
    pub term1: f64,
    /// `‖A^{-1/2} h (f + ∇·(AG))‖`.
    pub term2: f64,
    pub osc: f64,
    pub err: Option<f64>,
    pub rec_err: Option<f64>,
    pub effectivity: Option<f64>,
    /// Smallest interior angle, degrees.
    pub min_angle: f64,
    pub seconds: f64,
}

/// History of an adaptive run, one row per SOLVE.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub rows: Vec<IterationRow>,
}

/// Frozen CSV header of [`ConvergenceRecord::to_csv`].
pub const CSV_HEADER: &str = "k,Nv,Ndof,Ne,eta,term1,term2,osc,err,rec_err,effectivity,min_angle,seconds";

/// Columns that can be fitted against the number of degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Eta,
    Term1,
    Term2,
    Osc,
    Err,
    RecErr,
    Effectivity,
}

impl ConvergenceRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRow> {
        self.rows.last()
    }

    pub fn ndofs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ndof as f64).collect()
    }

    /// Values of a column; missing entries are `NaN`.
    pub fn column(&self, column: Column) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match column {
                Column::Eta => r.eta,
                Column::Term1 => r.term1,
                Column::Term2 => r.term2,
                Column::Osc => r.osc,
                Column::Err => r.err.unwrap_or(f64::NAN),
                Column::RecErr => r.rec_err.unwrap_or(f64::NAN),
                Column::Effectivity => r.effectivity.unwrap_or(f64::NAN),
            })
            .collect()
    }

    /// CSV with [`CSV_HEADER`]; missing values are empty fields.
    pub fn to_csv(&self) -> String {
        // `{:?}` keeps full precision and switches to exponent form for tiny values.
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:?},{:?},{:?},{:?},{},{},{},{:?},{:?}",
                r.k,
                r.nv,
                r.ndof,
                r.ne,
                r.eta,
                r.term1,
                r.term2,
                r.osc,
                opt(r.err),
                opt(r.rec_err),
                opt(r.effectivity),
                r.min_angle,
                r.seconds
            );
        }
        out
    }
}

/// Why the loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIterations,
    MaxDofs,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIterations => "max_iterations",
            StopReason::MaxDofs => "max_dofs",
        })
    }
}

/// Final state of an adaptive run.
#[derive(Debug, Clone)]
pub struct AdaptiveOutcome<T> {
    pub solution: FEFunction<T>,
    pub estimate: Estimate<T>,
    pub recovered: RecoveredGradient<T>,
    pub record: ConvergenceRecord,
    pub stop: StopReason,
    /// Local efficiency constant per iteration, when the exact solution is known.
    pub efficiency: Vec<Option<f64>>,
}

impl<T: Real> AdaptiveOutcome<T> {
    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        self.solution.mesh()
    }

    /// Number of refinements performed.
    pub fn refinements(&self) -> usize {
        self.record.len().saturating_sub(1)
    }

    /// Fails with [`AfemError::NonConvergence`] when the iteration cap stopped the loop.
    pub fn check_converged(&self, config: &AdaptiveConfig) -> Result<()> {
        match self.stop {
            StopReason::MaxIterations => Err(AfemError::NonConvergence {
                iterations: self.record.len(),
                eta: self.estimate.eta.as_f64(),
                tolerance: config.tolerance,
            }),
            _ => Ok(()),
        }
    }
}

/// What an observer sees after each ESTIMATE step.
pub struct IterationState<'a, T> {
    pub k: usize,
    pub solution: &'a FEFunction<T>,
    pub estimate: &'a Estimate<T>,
    pub recovered: &'a RecoveredGradient<T>,
    pub row: &'a IterationRow,
}

/// Runs the adaptive loop until `η ≤ tolerance`, `max_iterations` or `max_dofs`.
pub fn adaptive_solve<T: Real>(problem: &ProblemSpec<T>, config: &AdaptiveConfig) -> Result<AdaptiveOutcome<T>> {
    adaptive_solve_with(problem, config, &mut |_| Ok(()))
}

/// [`adaptive_solve`] with a callback invoked once per iteration.
pub fn adaptive_solve_with<T: Real>(
    problem: &ProblemSpec<T>,
    config: &AdaptiveConfig,
    observer: &mut dyn FnMut(&IterationState<'_, T>) -> Result<()>,
) -> Result<AdaptiveOutcome<T>> {
    config.validate()?;
    problem.coefficient.validate(&problem.mesh)?;
    let quad = QuadratureRule::default();
    let integrator = ErrorIntegrator::new(quad.clone()).with_singularity(problem.singularity);
    let mode = config.recovery_for(&problem.coefficient, &problem.mesh);
    let coef = &problem.coefficient;
    let f = &*problem.f;

    let mut mesh = Arc::new(problem.mesh.clone());
    let mut record = ConvergenceRecord::default();
    let mut efficiency = Vec::new();
    for k in 0.. {
        let start = Instant::now();
        let (stiffness, load) = assemble_system(&mesh, coef, f, &quad)?;
        let system = apply_dirichlet(&stiffness, &load, &mesh, &*problem.g);
        let ndof = system.n_dofs();
        let u_h = system.solve(mesh.clone(), &config.solver)?;
        let g = recover(&u_h, config.weighting, mode)?;
        let improved = improved_indicator(&u_h, &g, coef, f, &quad, config.finite_difference)?;
        let estimate = match config.estimator {
            EstimatorKind::Improved => improved.clone(),
            kind => compute_estimate(kind, &u_h, &g, coef, f, &quad, config.finite_difference)?,
        };
        let (err, rec_err, eff) = match &problem.exact_grad {
            Some(grad) => {
                let e = energy_error(&u_h, grad, coef, &integrator);
                let r = recovered_error(&g, grad, coef, &integrator);
                let c = local_efficiency_constant(&mesh, &estimate.eta_k, &e.element_sq, &improved.osc_k);
                efficiency.push(Some(c.as_f64()));
                (
                    Some(e.global.as_f64()),
                    Some(r.global.as_f64()),
                    effectivity(&estimate, e.global).ok(),
                )
            }
            None => {
                efficiency.push(None);
                (None, None, None)
            }
        };
        let row = IterationRow {
            k,
            nv: mesh.n_vertices(),
            ndof,
            ne: mesh.n_elements(),
            eta: estimate.eta.as_f64(),
            term1: improved.term1.as_f64(),
            term2: improved.term2.as_f64(),
            osc: improved.osc.as_f64(),
            err,
            rec_err,
            effectivity: eff.map(T::as_f64),
            min_angle: mesh.min_angle().as_f64().to_degrees(),
            seconds: if config.record_timing {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
        };
        log::info!(
            "k={k} ndof={ndof} eta={:.4e} err={} ({})",
            row.eta,
            err.map_or("-".to_string(), |e| format!("{e:.4e}")),
            config.estimator
        );
        observer(&IterationState {
            k,
            solution: &u_h,
            estimate: &estimate,
            recovered: &g,
            row: &row,
        })?;
        record.rows.push(row);

        let stop = if estimate.eta.as_f64() <= config.tolerance {
            Some(StopReason::Tolerance)
        } else if ndof >= config.max_dofs {
            Some(StopReason::MaxDofs)
        } else if k + 1 >= config.max_iterations {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if let Some(stop) = stop {
            return Ok(AdaptiveOutcome {
                solution: u_h,
                estimate,
                recovered: g,
                record,
                stop,
                efficiency,
            });
        }

        let marks = mark_r(&mark_e(&estimate, config.theta_e), &improved.osc_k, config.theta_0);
        mesh = Arc::new(refine(&mesh, &marks, config.depth)?);
    }
    unreachable!("the iteration counter is unbounded")
}
