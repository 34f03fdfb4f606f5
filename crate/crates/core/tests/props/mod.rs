//! Property suites shared by the `properties` target and the acceptance runner.
//!
//! Each suite drives a deterministic proptest runner and returns the first
//! counterexample as a message.

use std::sync::Arc;

use afem::adapt::{adaptive_solve, mark_bulk, mark_r, AdaptiveConfig};
use afem::fem::{cg, FEFunction, QuadratureRule, SparseMatrix};
use afem::mesh::{refine, MarkSet, Mesh};
use afem::problems::{by_name, meshes};
use afem::recovery::{recover, RecoveryMode, Weighting};
use afem::Mesh64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestError, TestRng, TestRunner};

pub type Outcome = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn report<V: std::fmt::Debug>(r: Result<(), TestError<V>>) -> Outcome {
    r.map_err(|e| e.to_string())
}

/// A 4×4 grid of `[0,1]²` with interior vertices moved by up to 0.2 h.
fn jittered_mesh(jitter: &[(f64, f64)], split: meshes::CellSplit) -> Mesh64 {
    let base = meshes::structured([0.0, 0.0], [1.0, 1.0], 4, split, |_| 0).unwrap();
    let boundary = base.boundary_vertices();
    let h = 0.25;
    let mut it = jitter.iter().cycle();
    let vertices = base
        .vertices()
        .iter()
        .zip(&boundary)
        .map(|(p, &on_boundary)| {
            let (dx, dy) = *it.next().unwrap();
            if on_boundary {
                *p
            } else {
                [p[0] + 0.2 * h * dx, p[1] + 0.2 * h * dy]
            }
        })
        .collect();
    Mesh::build(vertices, base.elements().to_vec(), vec![], None)
        .unwrap()
        .assign_initial_labels()
}

fn split_strategy() -> impl Strategy<Value = meshes::CellSplit> {
    prop_oneof![
        Just(meshes::CellSplit::Forward),
        Just(meshes::CellSplit::Anti),
        Just(meshes::CellSplit::UnionJack),
        Just(meshes::CellSplit::CrissCross),
    ]
}

fn jitter_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 41)
}

/// Smallest interior angle over the first `levels` uniform refinements.
///
/// Every element produced by bisection also appears in the uniform refinement
/// of the same generation, so this bounds the angles of any refined mesh.
fn uniform_angle_bound(mesh: &Mesh64, levels: usize) -> f64 {
    let mut m = mesh.clone();
    let mut bound = m.min_angle();
    for _ in 0..levels {
        m = refine(&m, &MarkSet::all(&m), 1).unwrap();
        bound = bound.min(m.min_angle());
    }
    bound
}

/// Ten rounds of random marking keep the mesh conforming and shape regular.
pub fn mesh_conformity_and_angles(cases: u32) -> Outcome {
    let strategy = (
        jitter_strategy(),
        split_strategy(),
        prop::collection::vec(prop::collection::vec(0.0..1.0f64, 8), 10),
        prop_oneof![Just(1usize), Just(3usize)],
    );
    report(runner(cases).run(&strategy, |(jitter, split, rounds, depth)| {
        let mut mesh = jittered_mesh(&jitter, split);
        // Generations grow by at most `depth` per round and closure adds a few more.
        let bound = uniform_angle_bound(&mesh, 4);
        let area: f64 = (0..mesh.n_elements()).map(|k| mesh.area(k)).sum();
        for picks in rounds {
            let n = mesh.n_elements();
            let marks = MarkSet::new(picks.iter().map(|p| ((p * n as f64) as usize).min(n - 1)).collect());
            mesh = refine(&mesh, &marks, depth).unwrap();
            prop_assert!(mesh.check_conformity().is_ok());
            prop_assert!(mesh.min_angle() >= bound - 1e-12, "{} < {}", mesh.min_angle(), bound);
            let now: f64 = (0..mesh.n_elements()).map(|k| mesh.area(k)).sum();
            prop_assert!((now - area).abs() < 1e-12);
            prop_assert!((0..mesh.n_elements()).all(|k| mesh.area(k) > 0.0));
        }
        Ok(())
    }))
}

/// The recovered gradient of an affine function is its exact gradient.
pub fn recovery_linear_consistency(cases: u32) -> Outcome {
    let strategy = (
        jitter_strategy(),
        split_strategy(),
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
        prop::collection::vec(0.0..1.0f64, 6),
    );
    report(runner(cases).run(&strategy, |(jitter, split, (c, a, b), picks)| {
        let mut mesh = jittered_mesh(&jitter, split);
        let n = mesh.n_elements();
        let marks = MarkSet::new(picks.iter().map(|p| ((p * n as f64) as usize).min(n - 1)).collect());
        mesh = refine(&mesh, &marks, 1).unwrap();
        let u = FEFunction::interpolate(Arc::new(mesh), |p| c + a * p[0] + b * p[1]);
        for weighting in [Weighting::Area, Weighting::Arithmetic] {
            for mode in [RecoveryMode::Global, RecoveryMode::PerSubdomain] {
                let g = recover(&u, weighting, mode).unwrap();
                for corners in g.corners() {
                    for v in corners {
                        prop_assert!((v[0] - a).abs() < 1e-10 && (v[1] - b).abs() < 1e-10, "{v:?}");
                    }
                }
            }
        }
        Ok(())
    }))
}

/// Bulk marking hits the target with the fewest elements, and R only enlarges E.
pub fn marking_minimality(cases: u32) -> Outcome {
    let strategy = (
        prop::collection::vec(prop_oneof![0.0..10.0f64, Just(1.0)], 1..60),
        prop::collection::vec(0.0..3.0f64, 1..60),
        0.05..0.95f64,
        0.05..0.95f64,
    );
    report(runner(cases).run(&strategy, |(eta, osc_raw, theta_e, theta_0)| {
        let total: f64 = eta.iter().map(|x| x * x).sum();
        let marks = mark_bulk(&eta, theta_e);
        if total == 0.0 {
            prop_assert!(marks.is_empty());
            return Ok(());
        }
        let target = theta_e * theta_e * total * (1.0 - 1e-12);
        let marked: f64 = marks.iter().map(|k| eta[k] * eta[k]).sum();
        prop_assert!(marked >= target);
        // Oracle: the shortest prefix of the sorted squares reaching the target.
        let mut sq: Vec<f64> = eta.iter().map(|x| x * x).collect();
        sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut acc = 0.0;
        let fewest = sq
            .iter()
            .position(|&s| {
                acc += s;
                acc >= target
            })
            .unwrap()
            + 1;
        prop_assert_eq!(marks.len(), fewest);
        let smallest = marks.iter().map(|k| eta[k] * eta[k]).fold(f64::INFINITY, f64::min);
        prop_assert!(marked - smallest < target);

        let osc: Vec<f64> = (0..eta.len()).map(|k| osc_raw[k % osc_raw.len()]).collect();
        let both = mark_r(&marks, &osc, theta_0);
        prop_assert!(marks.iter().all(|k| both.contains(k)));
        let osc_total: f64 = osc.iter().map(|x| x * x).sum();
        let osc_marked: f64 = both.iter().map(|k| osc[k] * osc[k]).sum();
        prop_assert!(osc_marked >= theta_0 * theta_0 * osc_total * (1.0 - 1e-12));
        Ok(())
    }))
}

/// Scaling the data by `s` scales `u_h` and every estimator by `|s|`.
pub fn scaling_homogeneity(cases: u32) -> Outcome {
    let names = ["lshape", "checkerboard-b", "peaks", "layer", "kellogg"];
    let strategy = (
        0..names.len(),
        prop_oneof![0.01..0.5f64, 2.0..100.0f64],
        any::<bool>(),
        0..3usize,
    );
    report(runner(cases).run(&strategy, |(i, s, negate, kind)| {
        let s = if negate { -s } else { s };
        let problem = by_name::<f64>(names[i]).unwrap();
        let config = AdaptiveConfig {
            max_iterations: 1,
            estimator: afem::estimate::EstimatorKind::ALL[kind],
            record_timing: false,
            ..AdaptiveConfig::default()
        };
        let base = adaptive_solve(&problem, &config).unwrap();
        let scaled = adaptive_solve(&problem.scaled(s), &config).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-8 * (1.0 + x.abs().max(y.abs()));
        prop_assert!(close(scaled.estimate.eta, s.abs() * base.estimate.eta));
        prop_assert!(close(scaled.estimate.osc, s.abs() * base.estimate.osc));
        let umax = base.solution.max_abs();
        for (a, b) in base.solution.values().iter().zip(scaled.solution.values()) {
            prop_assert!((b - s * a).abs() <= 1e-8 * s.abs() * (1.0 + umax));
        }
        Ok(())
    }))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// The seven-point rule integrates every polynomial of degree five exactly.
pub fn quadrature_exactness(cases: u32) -> Outcome {
    let monomials: Vec<[u32; 3]> = (0..=5u32)
        .flat_map(|a| (0..=5 - a).flat_map(move |b| (0..=5 - a - b).map(move |c| [a, b, c])))
        .collect();
    let strategy = (
        prop::collection::vec(-10.0..10.0f64, 6),
        prop::collection::vec(-1.0..1.0f64, monomials.len()),
    );
    let rule = QuadratureRule::<f64>::seven_point();
    report(runner(cases).run(&strategy, |(xy, coeffs)| {
        let tri = [[xy[0], xy[1]], [xy[2], xy[3]], [xy[4], xy[5]]];
        let det = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
        prop_assume!(det.abs() > 1e-3);
        let area = det.abs() / 2.0;
        let bary = |p: [f64; 2]| {
            let l1 =
                ((p[0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (p[1] - tri[0][1])) / det;
            let l2 =
                ((tri[1][0] - tri[0][0]) * (p[1] - tri[0][1]) - (p[0] - tri[0][0]) * (tri[1][1] - tri[0][1])) / det;
            [1.0 - l1 - l2, l1, l2]
        };
        // ∫ λ1^a λ2^b λ3^c = 2|K| a! b! c! / (a+b+c+2)!
        let exact: f64 = monomials
            .iter()
            .zip(&coeffs)
            .map(|(m, c)| {
                c * 2.0 * area * factorial(m[0]) * factorial(m[1]) * factorial(m[2]) / factorial(m[0] + m[1] + m[2] + 2)
            })
            .sum();
        let got = rule.integrate(&tri, |p| {
            let l = bary(p);
            monomials
                .iter()
                .zip(&coeffs)
                .map(|(m, c)| c * l[0].powi(m[0] as i32) * l[1].powi(m[1] as i32) * l[2].powi(m[2] as i32))
                .sum()
        });
        prop_assert!((got - exact).abs() <= 1e-9 * area.max(1.0), "{got} vs {exact}");
        Ok(())
    }))
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// CG on random sparse SPD systems agrees with a dense direct solve.
pub fn cg_matches_dense(cases: u32) -> Outcome {
    let strategy = (2..40usize).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n, -1.0..1.0f64), 0..4 * n),
            prop::collection::vec(0.1..2.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
        )
    });
    report(runner(cases).run(&strategy, |(n, offdiag, shift, b)| {
        // B^T B + diag(shift) with sparse B is symmetric positive definite.
        let mut bmat = vec![vec![0.0; n]; n];
        for &(i, j, v) in &offdiag {
            bmat[i][j] += v;
        }
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                dense[i][j] = (0..n).map(|k| bmat[k][i] * bmat[k][j]).sum::<f64>();
            }
            dense[i][i] += shift[i];
        }
        let triplets = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| dense[i][j] != 0.0)
            .map(|(i, j)| (i, j, dense[i][j]))
            .collect();
        let sparse = SparseMatrix::from_triplets(n, triplets);
        let solution = cg(&sparse, &b, 1e-13, 50 * n, None);
        let oracle = dense_solve(dense, b.clone());
        let scale = oracle.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for (x, y) in solution.x.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-8 * scale, "{x} vs {y}");
        }
        Ok(())
    }))
}

pub type Suite = fn(u32) -> Outcome;

/// Every suite with the case counts used by the test targets.
pub const SUITES: [(&str, Suite, u32); 6] = [
    ("mesh conformity and min-angle bound", mesh_conformity_and_angles, 64),
    ("recovery linear consistency", recovery_linear_consistency, 48),
    ("marking minimality", marking_minimality, 256),
    ("scaling homogeneity", scaling_homogeneity, 48),
    ("quadrature exactness", quadrature_exactness, 256),
    ("CG against dense oracle", cg_matches_dense, 128),
];
