use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use afem::adapt::{adaptive_solve_with, AdaptiveConfig, AdaptiveOutcome, IterationState};
use afem::estimate::EstimatorKind;
use afem::mesh::{refine, write_mesh_text, MarkSet, VtkExport};
use afem::problems::{by_name, validate};
use afem::report::{RateFit, RunSummary};
use anyhow::Context;

use crate::args::{CompareArgs, ExportArgs, MeshFormat, RunArgs, ValidateArgs};

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn vtk_frame(state: &IterationState<'_, f64>, dir: &Path) -> afem::Result<()> {
    let mesh = state.solution.mesh();
    VtkExport::new(mesh)
        .title(&format!("iteration {}", state.k))
        .point_scalars("u_h", state.solution.values().to_vec())
        .cell_scalars("eta_K", state.estimate.eta_k.clone())
        .cell_scalars("osc_K", state.estimate.osc_k.clone())
        .write(dir.join(format!("mesh_{:04}.vtk", state.k)))
}

/// Runs one adaptive loop and writes its history, summary and final indicators into `dir`.
fn solve_into(
    problem: &str,
    config: &AdaptiveConfig,
    dir: &Path,
    history_name: &str,
    vtk: bool,
) -> anyhow::Result<(AdaptiveOutcome<f64>, RunSummary)> {
    let spec = by_name::<f64>(problem)?;
    let outcome = adaptive_solve_with(&spec, config, &mut |state| {
        if vtk {
            vtk_frame(state, dir)
        } else {
            Ok(())
        }
    })?;
    let summary = RunSummary::new(problem, config, &outcome.record, outcome.stop)?;
    write(&dir.join(history_name), &outcome.record.to_csv())?;
    Ok((outcome, summary))
}

pub fn run(args: &RunArgs) -> anyhow::Result<()> {
    let config = args.common.adaptive_config(args.estimator)?;
    let dir = &args.common.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (outcome, summary) = solve_into(&args.common.problem, &config, dir, "history.csv", args.vtk)?;
    write(&dir.join("summary.json"), &summary.to_json())?;
    write(&dir.join("indicators.csv"), &outcome.estimate.to_csv())?;
    let last = outcome.record.last().expect("at least one iteration");
    println!(
        "{} {}: {} iterations, Ndof={}, eta={:.4e}, stop={}",
        summary.problem, summary.estimator, summary.iterations, last.ndof, last.eta, summary.stop_reason
    );
    outcome.check_converged(&config)?;
    Ok(())
}

/// Smallest Ndof at which `values` first drops to `tol`.
fn first_below(ndofs: &[f64], values: &[f64], tol: f64) -> Option<usize> {
    ndofs
        .iter()
        .zip(values)
        .find(|(_, v)| **v <= tol)
        .map(|(n, _)| *n as usize)
}

fn opt<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| format!("{x:?}"))
}

fn slope(fit: &Option<RateFit>) -> String {
    opt(fit.as_ref().map(|f| f.slope))
}

pub const COMPARE_HEADER: &str = "estimator,iterations,stop_reason,final_ndof,final_eta,final_error,final_effectivity,\
ndof_eta_below_tol,ndof_error_below_tol,error_slope,eta_slope,recovered_error_slope,effectivity_trajectory";

pub fn compare(args: &CompareArgs) -> anyhow::Result<()> {
    let dir = &args.common.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let configs: Vec<(EstimatorKind, AdaptiveConfig)> = args
        .estimator
        .iter()
        .map(|&kind| Ok((kind, args.common.adaptive_config(Some(kind))?)))
        .collect::<anyhow::Result<_>>()?;

    // Runs are independent and write to distinct files.
    let results: Vec<anyhow::Result<(AdaptiveOutcome<f64>, RunSummary)>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(kind, config)| {
                let name = format!("history_{kind}.csv");
                s.spawn(move || solve_into(&args.common.problem, config, dir, &name, false))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("estimator run panicked"))
            .collect()
    });

    let mut table = String::from(COMPARE_HEADER);
    table.push('\n');
    let mut failures = Vec::new();
    for ((kind, config), result) in configs.iter().zip(results) {
        let (outcome, summary) = result?;
        let record = &outcome.record;
        let ndofs = record.ndofs();
        let tol = config.tolerance;
        let errors = record.column(afem::adapt::Column::Err);
        let trajectory: Vec<String> = record.rows.iter().map(|r| opt(r.effectivity)).collect();
        let f = &summary.final_values;
        let _ = writeln!(
            table,
            "{kind},{},{},{},{:?},{},{},{},{},{},{},{},{}",
            summary.iterations,
            summary.stop_reason,
            f.ndof,
            f.eta,
            opt(f.error),
            opt(f.effectivity),
            opt(first_below(&ndofs, &record.column(afem::adapt::Column::Eta), tol)),
            opt(first_below(&ndofs, &errors, tol)),
            slope(&summary.rates.error),
            slope(&summary.rates.eta),
            slope(&summary.rates.recovered_error),
            trajectory.join(";"),
        );
        println!(
            "{kind}: {} iterations, Ndof={}, eta={:.4e}, stop={}",
            summary.iterations, f.ndof, f.eta, summary.stop_reason
        );
        if let Err(e) = outcome.check_converged(config) {
            failures.push(format!("{kind}: {e}"));
        }
    }
    write(&dir.join("compare.csv"), &table)?;
    if !failures.is_empty() {
        anyhow::bail!(failures.join("; "));
    }
    Ok(())
}

pub fn validate_problem(args: &ValidateArgs) -> anyhow::Result<bool> {
    let spec = by_name::<f64>(&args.problem)?;
    let report = validate(&spec, args.samples);
    print!("{report}");
    Ok(report.passed())
}

pub fn export_mesh(args: &ExportArgs) -> anyhow::Result<()> {
    let spec = by_name::<f64>(&args.problem)?;
    let mut mesh = spec.mesh;
    for _ in 0..args.uniform {
        mesh = refine(&mesh, &MarkSet::all(&mesh), 1)?;
    }
    let format = args.format.unwrap_or_else(|| {
        if args.out.extension().is_some_and(|e| e == "vtk") {
            MeshFormat::Vtk
        } else {
            MeshFormat::Text
        }
    });
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    match format {
        MeshFormat::Vtk => VtkExport::new(&mesh).title(&spec.name).write(&args.out)?,
        MeshFormat::Text => write(&args.out, &write_mesh_text(&mesh))?,
    }
    println!(
        "{}: {} vertices, {} elements -> {}",
        spec.name,
        mesh.n_vertices(),
        mesh.n_elements(),
        args.out.display()
    );
    Ok(())
}
