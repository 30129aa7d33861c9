//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use qudit_core::analysis::{coefficient_of_variation, fwhm, peak_spacing, schmidt_decompose};
use qudit_core::designer::{
    evaluate_layout, layout_mask, rank, search, DesignObjective, Evaluation, ForwardModel, Layout, SearchOptions,
};
use qudit_core::jsa::{marginal, superposed_jsi, JointSpectrum, SpectralAxis, SpectralGrid, SuperpositionMode};
use qudit_core::phase_matching::{central_wavelengths_at_angle, solve_degenerate_angle, PhaseMatchConfig};
use qudit_core::pump::{ProfileKind, PumpSpec};
use qudit_core::scenario::{preset, presets, run_scenario, run_sweep, simulate, Preset, ScenarioConfig};
use qudit_core::CrystalSpec;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bbo() -> PhaseMatchConfig {
    PhaseMatchConfig::type_ii(CrystalSpec::bbo())
}

fn config(name: &str) -> ScenarioConfig {
    preset(name).expect("preset exists").config
}

fn phase_matching_angle() -> Outcome {
    let cfg = bbo();
    let t = Instant::now();
    let theta = solve_degenerate_angle(&cfg, 405.0).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let residual = cfg
        .delta_k_wavelengths(0.81, 0.81, theta)
        .map_err(|e| e.to_string())?
        .abs();
    let deg = theta.to_degrees();
    check(
        (41.4..=42.4).contains(&deg) && residual < 1e-10 && elapsed < Duration::from_millis(100),
        format!("theta* = {deg:.4} deg, |dk| = {residual:.2e} rad/um, {:.1} ms", elapsed.as_secs_f64() * 1e3),
    )
}

fn angle_to_mode_map() -> Outcome {
    let cfg = bbo();
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (angle, signal, idler) in [(41.29, 794.0, 827.0), (41.79, 810.0, 810.0), (42.29, 827.0, 794.0)] {
        let (s, i) = central_wavelengths_at_angle(&cfg, 405.0, f64::to_radians(angle)).map_err(|e| e.to_string())?;
        ok &= (s - signal).abs() <= 3.0 && (i - idler).abs() <= 3.0;
        parts.push(format!("{angle}: {s:.1}/{i:.1} nm"));
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    check(ok, format!("{}, {:.1} ms", parts.join(", "), elapsed.as_secs_f64() * 1e3))
}

fn figure2_peak_counts() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=5 {
        let cfg = config(&format!("fig2-a{k}"));
        assert_eq!(cfg.grid.signal_points, 512);
        let t = Instant::now();
        let s = simulate(&cfg).map_err(|e| e.to_string())?;
        let elapsed = t.elapsed();
        let n = s.report.signal_peaks.len();
        ok &= n == k && elapsed < Duration::from_secs(5);
        parts.push(format!("a{k}: {n} ({:.2} s)", elapsed.as_secs_f64()));
    }
    check(ok, parts.join(", "))
}

fn single_mode_fwhm() -> Outcome {
    let s = simulate(&config("fig2-a1")).map_err(|e| e.to_string())?;
    let w = s.report.signal_fwhm_nm.ok_or("FWHM truncated by the grid")?;
    check((w - 19.7).abs() <= 0.15 * 19.7, format!("FWHM {w:.2} nm (target 19.7 +- 2.96)"))
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn slit_width_trend() -> Outcome {
    // S1 as a sweep over the slit width
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = config("figS1-a1");
    let values: Vec<toml::Value> = [3, 5, 9, 13].into_iter().map(toml::Value::Integer).collect();
    let items = run_sweep(&base, "mask.width", &values, dir.path()).map_err(|e| e.to_string())?;
    let mut bins_spacing = Vec::new();
    for it in &items {
        let row = it.outcome.as_ref().map_err(|e| e.clone())?;
        if row.peak_count != 2 {
            return Err(format!("slit width {}: {} peaks", it.value, row.peak_count));
        }
        bins_spacing.push(row.mean_spacing_nm.unwrap());
    }
    let mut mm_spacing = Vec::new();
    for tag in ["c", "d", "e", "f"] {
        let s = simulate(&config(&format!("fig3-{tag}"))).map_err(|e| e.to_string())?;
        let sp = peak_spacing(&s.report.signal_peaks).map_err(|e| e.to_string())?;
        mm_spacing.push(sp[0]);
    }
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.1}")).collect::<Vec<_>>().join("/");
    check(
        strictly_increasing(&bins_spacing) && strictly_increasing(&mm_spacing),
        format!("S1 widths 3/5/9/13: {} nm; block lines 0.3/0.6/1.0/1.5 mm: {} nm", fmt(&bins_spacing), fmt(&mm_spacing)),
    )
}

fn slit_panel_suite() -> Outcome {
    let t = Instant::now();
    let list: Vec<Preset> = presets().into_iter().filter(|p| p.name.starts_with("figS")).collect();
    let mut failures = Vec::new();
    let mut worst_cv: f64 = 0.0;
    for p in &list {
        let s = simulate(&p.config).map_err(|e| format!("{}: {e}", p.name))?;
        let n = s.report.signal_peaks.len();
        if n != p.expected_peaks {
            failures.push(format!("{} {n}/{}", p.name, p.expected_peaks));
        }
        if p.name.starts_with("figS6") && p.expected_peaks > 1 {
            let cv = coefficient_of_variation(&s.report.signal_peaks.heights());
            worst_cv = worst_cv.max(cv);
            if cv >= 0.15 {
                failures.push(format!("{} height CV {cv:.3}", p.name));
            }
        }
    }
    let elapsed = t.elapsed();
    if elapsed > Duration::from_secs(180) {
        failures.push(format!("took {:.0} s", elapsed.as_secs_f64()));
    }
    check(
        failures.is_empty() && list.len() == 30,
        format!(
            "{} panels, {} mismatches{}, worst S6 height CV {worst_cv:.3}, {:.1} s",
            list.len(),
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(" ({})", failures.join("; ")) },
            elapsed.as_secs_f64()
        ),
    )
}

fn product_spectrum(grid: SpectralGrid, lobes: &[(f64, f64)]) -> JointSpectrum {
    // sum of separable Gaussian lobes (signal center, idler center), 2 nm wide
    let g = |x: f64, c: f64| (-(x - c).powi(2) / (2.0 * 2.0 * 2.0)).exp();
    let mut amp = Vec::with_capacity(grid.len());
    for ls in grid.signal.values() {
        for li in grid.idler.values() {
            let v: f64 = lobes.iter().map(|(cs, ci)| g(ls, *cs) * g(li, *ci)).sum();
            amp.push(Complex64::new(v, 0.0));
        }
    }
    let mut s = JointSpectrum::from_amplitude(grid, amp);
    s.normalize();
    s
}

fn invariant_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // normalization, both modes
    let mut cfg = config("fig2-a3");
    for mode in [SuperpositionMode::Coherent, SuperpositionMode::Incoherent] {
        cfg.mode = mode;
        let s = simulate(&cfg).map_err(|e| e.to_string())?;
        let err = (s.spectrum.total_integral() - 1.0).abs();
        ok &= err <= 1e-12;
        // marginal integral against the total
        for axis in [SpectralAxis::Signal, SpectralAxis::Idler] {
            let m = marginal(&s.spectrum, axis);
            let rel = (m.integral() - s.spectrum.total_integral()).abs() / s.spectrum.total_integral();
            ok &= rel <= 1e-12;
        }
        ok &= s.spectrum.intensity.iter().all(|v| *v >= 0.0);
        notes.push(format!("norm err {err:.1e}"));
    }

    // single bin: coherent equals incoherent
    let r = config("fig1-b").resolve().map_err(|e| e.to_string())?;
    let rays = match &r.shaping {
        qudit_core::scenario::PumpShaping::Rays(b) => b.clone(),
        _ => unreachable!(),
    };
    let c = superposed_jsi(&r.phase, &r.pump, &r.grid, &rays, SuperpositionMode::Coherent).map_err(|e| e.to_string())?;
    let i = superposed_jsi(&r.phase, &r.pump, &r.grid, &rays, SuperpositionMode::Incoherent).map_err(|e| e.to_string())?;
    let max = c.intensity.iter().cloned().fold(0.0, f64::max);
    let diff = c
        .intensity
        .iter()
        .zip(&i.intensity)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / max;
    ok &= diff <= 1e-12;
    notes.push(format!("single-bin mode diff {diff:.1e}"));

    // Schmidt on constructed spectra
    let grid = SpectralGrid::square(770.0, 850.0, 256);
    let sep = schmidt_decompose(&product_spectrum(grid, &[(805.0, 812.0)])).map_err(|e| e.to_string())?;
    let sum: f64 = sep.coefficients.iter().sum();
    ok &= (sum - 1.0).abs() <= 1e-12 && (sep.schmidt_number - 1.0).abs() <= 1e-9 && sep.reconstruction_error < 1e-10;
    notes.push(format!("separable K {:.10}", sep.schmidt_number));
    let lobes = schmidt_decompose(&product_spectrum(grid, &[(790.0, 830.0), (810.0, 810.0), (830.0, 790.0)]))
        .map_err(|e| e.to_string())?;
    ok &= (lobes.schmidt_number - 3.0).abs() <= 0.05 && lobes.reconstruction_error < 1e-10;
    notes.push(format!("3 lobes K {:.4}", lobes.schmidt_number));
    let sim = simulate(&{
        let mut c = config("fig2-a3");
        c.mode = SuperpositionMode::Coherent;
        c
    })
    .map_err(|e| e.to_string())?;
    let k = schmidt_decompose(&sim.spectrum).map_err(|e| e.to_string())?;
    ok &= k.reconstruction_error < 1e-10 && k.schmidt_number >= 1.0;
    notes.push(format!("simulated SVD err {:.1e}", k.reconstruction_error));

    // grid refinement
    let mut c = config("fig2-a1");
    let coarse = fwhm(&simulate(&c).map_err(|e| e.to_string())?.signal).map_err(|e| e.to_string())?;
    c.grid = c.grid.clone().with_points(1024, 1024);
    let fine = fwhm(&simulate(&c).map_err(|e| e.to_string())?.signal).map_err(|e| e.to_string())?;
    let drift = (fine - coarse).abs() / coarse;
    ok &= drift < 0.01;
    notes.push(format!("FWHM drift {drift:.1e}"));

    check(ok, notes.join(", "))
}

fn brute_force(model: &ForwardModel, objective: &DesignObjective) -> (Layout, Evaluation) {
    let n = model.bins;
    let mut best: Option<(Layout, Evaluation)> = None;
    for width in 1..=n {
        for start in 1..=n + 1 - width {
            let layout = vec![(start, width)];
            let mask = layout_mask(&layout, n, model.aperture_mm).unwrap();
            let e = evaluate_layout(&mask, model, objective);
            let better = match &best {
                None => true,
                Some((bl, be)) => {
                    (e.objective, e.blocked_bins, &layout).partial_cmp(&(be.objective, be.blocked_bins, bl))
                        == Some(std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some((layout, e));
            }
        }
    }
    best.unwrap()
}

fn designer_oracle() -> Outcome {
    let t = Instant::now();
    let theta = solve_degenerate_angle(&bbo(), 405.0).map_err(|e| e.to_string())?;
    let pump = PumpSpec::from_fwhm(405.0, 0.53, ProfileKind::Gaussian, 0.7, 50.0, theta.to_degrees()).unwrap();
    let model = ForwardModel::new(
        CrystalSpec::bbo(),
        pump,
        SpectralGrid::square(770.0, 850.0, 128),
        SuperpositionMode::Incoherent,
        15,
        2.8,
    );
    let mut objective = DesignObjective::new(2);
    objective.min_open_width = 1;
    let (oracle_layout, oracle) = brute_force(&model, &objective);
    let found = search(&objective, &model, &SearchOptions::new(10_000)).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let same_rank = rank((&found.evaluation, &found.layout), (&oracle, &oracle_layout)) == std::cmp::Ordering::Equal;
    check(
        found.layout == oracle_layout
            && found.evaluation.objective == oracle.objective
            && same_rank
            && found.trace.exhaustive_ran
            && elapsed < Duration::from_secs(30),
        format!(
            "search {:?} obj {:.6}, oracle {:?} obj {:.6}, {:.1} s",
            found.layout,
            found.evaluation.objective,
            oracle_layout,
            oracle.objective,
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for name in ["fig2-a3", "figS6-a4", "fig1-d", "fig3-g"] {
        let mut cfg = config(name);
        cfg.analysis.plots = false;
        let a = run_scenario(&cfg, &dir.path().join(format!("{name}-1"))).map_err(|e| e.to_string())?;
        let b = run_scenario(&cfg, &dir.path().join(format!("{name}-2"))).map_err(|e| e.to_string())?;
        if a.index.files != b.index.files {
            return Err(format!("{name}: checksums differ"));
        }
        compared += a.index.files.len();
    }
    // coherent mode as well
    let mut cfg = config("fig2-a4");
    cfg.mode = SuperpositionMode::Coherent;
    cfg.analysis.plots = false;
    let a = run_scenario(&cfg, &dir.path().join("coh-1")).map_err(|e| e.to_string())?;
    let b = run_scenario(&cfg, &dir.path().join("coh-2")).map_err(|e| e.to_string())?;
    compared += a.index.files.len();
    check(a.index.files == b.index.files, format!("{compared} artifacts identical across reruns"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("phase-matching angle", phase_matching_angle),
        ("angle-to-mode map", angle_to_mode_map),
        ("figure 2 peak counts", figure2_peak_counts),
        ("single-mode FWHM", single_mode_fwhm),
        ("slit-width spacing trend", slit_width_trend),
        ("slit-panel transcription suite", slit_panel_suite),
        ("invariant suite", invariant_suite),
        ("designer oracle equivalence", designer_oracle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
