use std::collections::HashSet;
use std::fs;

use qudit_core::analysis::{coefficient_of_variation, mode_overlap};
use qudit_core::designer::{
    evaluate_layout, reevaluate, search, seed_layout, DesignObjective, ForwardModel, SearchOptions,
};
use qudit_core::export::jsi_from_binary;
use qudit_core::pump::{parse_widths, Leading, MaskSpec};
use qudit_core::scenario::{
    parse_values, preset, presets, run_scenario, run_sweep, simulate, verify_index, MaskConfig, PumpShaping,
    ScenarioConfig, DESIGN_FILE, INDEX_FILE, SWEEP_SUMMARY_FILE,
};
use qudit_core::{Error, ProfileKind, SpectralGrid, SuperpositionMode};

fn config(name: &str) -> ScenarioConfig {
    preset(name).unwrap().config
}

fn mask_of(cfg: &ScenarioConfig) -> MaskSpec {
    match cfg.resolve().unwrap().shaping {
        PumpShaping::Mask(m) => m,
        other => panic!("{} has no mask: {other:?}", cfg.name),
    }
}

fn runs(pattern: &str) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut prev = None;
    for c in pattern.chars() {
        if Some(c) == prev {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
            prev = Some(c);
        }
    }
    out
}

fn model(cfg: &ScenarioConfig, points: usize, mode: SuperpositionMode, bins: usize) -> ForwardModel {
    let r = cfg.resolve().unwrap();
    ForwardModel::new(
        r.phase.crystal.clone(),
        r.pump.clone(),
        SpectralGrid::square(770.0, 850.0, points),
        mode,
        bins,
        2.8,
    )
}

#[test]
fn catalog_covers_every_panel() {
    let all = presets();
    assert!(all.len() >= 30);
    assert_eq!(all.len(), 44);
    let names: HashSet<&str> = all.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names.len(), all.len(), "duplicate preset names");
    for n in ["fig1-a", "fig1-b", "fig1-c", "fig2-a1", "fig2-a3", "fig2-a5"] {
        assert!(names.contains(n), "{n}");
    }
    for s in 1..=6 {
        for a in 1..=5 {
            assert!(names.contains(format!("figS{s}-a{a}").as_str()));
        }
    }
    assert!(all.iter().filter(|p| p.qualitative).all(|p| p.name.starts_with("fig3")));
    assert!(all.iter().all(|p| p.config.mode == SuperpositionMode::Incoherent));
}

#[test]
fn every_preset_validates() {
    for p in presets() {
        p.config.resolve().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        let again = ScenarioConfig::from_toml_str(&p.config.effective()).unwrap();
        assert_eq!(again, p.config, "{} does not round-trip", p.name);
    }
}

#[test]
fn slit_beam_presets_match_captions() {
    for p in presets() {
        let MaskConfig::Pattern { widths, leading, bins, .. } = &p.config.mask else {
            continue;
        };
        if p.caption.is_empty() {
            continue;
        }
        assert_eq!(widths, &p.caption, "{}", p.name);
        let mask = mask_of(&p.config);
        assert_eq!(mask.bins(), *bins);
        let caption = parse_widths(&p.caption).unwrap();
        let pattern = mask.pattern_string();
        let r = runs(&pattern);
        match leading {
            // centered, open margins on both sides
            Leading::Block => {
                assert_eq!(&r[1..r.len() - 1], &caption[..], "{}: {pattern}", p.name);
                assert!(pattern.starts_with('1') && pattern.ends_with('1'));
                assert!(r[0].abs_diff(r[r.len() - 1]) <= 1);
            }
            Leading::Open => {
                assert_eq!(r, caption, "{}: {pattern}", p.name);
                assert!(pattern.starts_with('1'));
            }
        }
    }
}

#[test]
fn slit_presets_match_captions() {
    for p in presets() {
        let MaskConfig::Slit { center, width, .. } = p.config.mask else {
            continue;
        };
        if p.caption.is_empty() {
            continue;
        }
        let mask = mask_of(&p.config);
        let expect = if width == 0 {
            "width 0".to_string()
        } else {
            format!("width {width}")
        };
        assert!(p.caption.starts_with(&expect), "{}: {}", p.name, p.caption);
        if p.name.starts_with("figS2") || p.name.starts_with("figS3") {
            assert_eq!(p.caption, format!("width 5, center {center}"));
        }
        if width > 0 {
            let blocks = mask.blocks();
            assert_eq!(blocks.len(), 1);
            let (start, w) = blocks[0];
            assert_eq!(w, width);
            assert_eq!(start + (w - 1) / 2, center, "{}", p.name);
        } else {
            assert!(mask.blocks().is_empty());
        }
    }
}

#[test]
fn caption_examples() {
    // two open windows of 14 bins
    let m = mask_of(&config("figS6-a2"));
    assert_eq!(m.open_windows(), vec![(1, 14), (28, 14)]);
    // four blocks, five open windows
    let m = mask_of(&config("figS5-a4"));
    assert_eq!(m.pattern_string(), "11111111111000010000100001000011111111111");
    assert_eq!(m.open_windows().len(), 5);
    // 101-bin panels
    assert_eq!(mask_of(&config("figS5-a1")).bins(), 101);
    assert_eq!(mask_of(&config("figS5-a5")).bins(), 101);
    // the S1 slit of width 5 at center 21 covers bins 19..=23
    assert_eq!(mask_of(&config("figS1-a3")).blocks(), vec![(19, 5)]);
}

#[test]
fn fig2_a1_report_records_fwhm() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&config("fig2-a1"), dir.path()).unwrap();
    let report = fs::read_to_string(dir.path().join("report.toml")).unwrap();
    let w = out.simulation.report.signal_fwhm_nm.unwrap();
    assert!((w - 19.7).abs() < 0.15 * 19.7);
    assert!(report.contains("signal_fwhm_nm"));
    assert_eq!(out.simulation.report.signal_peaks.len(), 1);
    assert!(verify_index(dir.path()).unwrap().is_empty());
}

#[test]
fn flat_top_three_slit_panel_has_three_peaks() {
    let s = simulate(&config("figS6-a3")).unwrap();
    assert_eq!(s.report.signal_peaks.len(), 3);
    assert!(coefficient_of_variation(&s.report.signal_peaks.heights()) < 0.15);
}

#[test]
fn contradictory_grid_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut cfg = config("fig2-a2");
    cfg.grid.signal_min_nm = 850.0;
    cfg.grid.signal_max_nm = 770.0;
    let err = run_scenario(&cfg, &out).unwrap_err();
    assert!(err.is_validation(), "{err}");
    assert!(!out.exists());
}

#[test]
fn validation_errors_name_the_field() {
    let mut cfg = config("fig2-a2");
    cfg.analysis.schmidt = true;
    let e = cfg.resolve().unwrap_err();
    assert!(e.is_validation() && e.to_string().contains("schmidt"), "{e}");

    let mut cfg = config("fig2-a2");
    cfg.crystal.sellmeier = "no-such-set".into();
    assert!(cfg.resolve().unwrap_err().to_string().contains("crystal.sellmeier"));

    let mut cfg = config("fig2-a2");
    cfg.mask = MaskConfig::Slit {
        bins: 41,
        aperture_mm: 2.8,
        center: 40,
        width: 9,
    };
    assert!(matches!(cfg.resolve().unwrap_err(), Error::MaskBounds { .. }));

    let mut cfg = config("fig2-a2");
    cfg.mask = MaskConfig::Slits {
        bins: 5,
        aperture_mm: 2.8,
        blocks: vec![(1, 5)],
    };
    assert!(cfg.resolve().unwrap_err().is_validation());

    let text = "mode = \"coherent\"\n[pump]\nbeam_radius = 1.0\n[mask]\nkind = \"open\"\n";
    assert!(matches!(ScenarioConfig::from_toml_str(text), Err(Error::Parse { .. })));
    // the mode has no default
    assert!(ScenarioConfig::from_toml_str("[mask]\nkind = \"open\"\n").is_err());
}

#[test]
fn scenario_file_with_own_dispersion_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = include_str!("../data/bbo_kato1986.toml");
    fs::write(dir.path().join("my_bbo.toml"), data).unwrap();
    let scenario = dir.path().join("s.toml");
    fs::write(
        &scenario,
        "mode = \"incoherent\"\n[crystal]\nsellmeier = \"my_bbo.toml\"\n[grid]\nsignal_points = 64\nidler_points = 64\n\
         [mask]\nkind = \"pattern\"\nwidths = \"5-3-5\"\nleading = \"block\"\n",
    )
    .unwrap();
    let cfg = ScenarioConfig::from_file(&scenario).unwrap();
    let s = simulate(&cfg).unwrap();
    let mut builtin = cfg.clone();
    builtin.crystal.sellmeier = "bbo-kato-1986".into();
    let b = simulate(&builtin).unwrap();
    assert_eq!(s.spectrum.intensity, b.spectrum.intensity);
}

#[test]
fn sweep_keeps_order_and_survives_failures() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = config("figS1-a3");
    base.grid = base.grid.clone().with_points(96, 96);
    let values = parse_values("9, 60, 3").unwrap();
    let items = run_sweep(&base, "mask.width", &values, dir.path()).unwrap();
    assert_eq!(items.len(), 3);
    assert!(items[0].outcome.is_ok());
    assert!(items[1].outcome.is_err());
    assert!(items[2].outcome.is_ok());
    assert!(!items[1].directory.exists());
    let summary = fs::read_to_string(dir.path().join(SWEEP_SUMMARY_FILE)).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert!(rows[0].starts_with("mask.width,status"));
    assert!(rows[1].starts_with("9,ok,2,"));
    assert!(rows[2].starts_with("60,failed"));
    assert!(rows[3].starts_with("3,ok,2,"));
    for it in [&items[0], &items[2]] {
        assert!(it.directory.join(INDEX_FILE).exists());
    }
}

#[test]
fn sweep_rejects_bad_requests() {
    let base = config("fig2-a1");
    let dir = tempfile::tempdir().unwrap();
    assert!(run_sweep(&base, "pump.beam_radius_mm", &[], dir.path()).is_err());
    assert!(parse_values(" , ").is_err());
    let v = parse_values("0.5").unwrap();
    assert!(run_sweep(&base, "pump.no_such_field", &v, dir.path()).unwrap_err().is_validation());
    assert!(run_sweep(&base, "nothing.beam", &v, dir.path()).unwrap_err().is_validation());
}

#[test]
fn parse_values_reads_numbers_and_strings() {
    let v = parse_values("0.5,7,5-3-5,\"a\"").unwrap();
    assert_eq!(v[0], toml::Value::Float(0.5));
    assert_eq!(v[1], toml::Value::Integer(7));
    assert_eq!(v[2], toml::Value::String("5-3-5".into()));
    assert_eq!(v[3], toml::Value::String("a".into()));
}

#[test]
fn moving_slit_shifts_weight_between_peaks() {
    // S2: the slit moves up and the two peaks' relative heights drift
    let ratios: Vec<f64> = (1..=5)
        .map(|k| {
            let s = simulate(&config(&format!("figS2-a{k}"))).unwrap();
            let h = s.report.signal_peaks.heights();
            assert_eq!(h.len(), 2);
            h[0] / h[1]
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    // S3 moves it the other way
    let ratios: Vec<f64> = (1..=5)
        .map(|k| {
            let h = simulate(&config(&format!("figS3-a{k}"))).unwrap().report.signal_peaks.heights();
            h[0] / h[1]
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn three_mode_scenario_overlap_and_schmidt() {
    let mut cfg = config("fig2-a3");
    cfg.mode = SuperpositionMode::Coherent;
    cfg.analysis.schmidt = true;
    let s = simulate(&cfg).unwrap();
    let peaks = &s.report.signal_peaks;
    assert_eq!(peaks.len(), 3);
    for i in 0..2 {
        let o = mode_overlap(&s.spectrum, peaks, i, i + 1).unwrap();
        assert!(o < 0.01, "overlap {i}-{} = {o}", i + 1);
    }
    let k = s.report.schmidt.as_ref().unwrap().schmidt_number;
    // regression value at 512 x 512; lobes are correlated stripes, so K
    // exceeds the mode count
    assert!((k - 9.4395).abs() < 1e-3, "K = {k}");
    assert!(k > 3.0 && k <= 512.0);
}

#[test]
fn designer_evaluation_examples() {
    let cfg = config("fig2-a1");
    let m = model(&cfg, 256, SuperpositionMode::Incoherent, 41);
    let d3 = DesignObjective::new(3);
    let open = evaluate_layout(&MaskSpec::open(41).unwrap().with_aperture(2.8).unwrap(), &m, &d3);
    assert_eq!(open.peak_count, 1);
    assert!(open.objective >= 2.0);
    let two_block = evaluate_layout(&mask_of(&config("fig2-a3")), &m, &d3);
    assert_eq!(two_block.peak_count, 3);
    assert!(two_block.objective < 1.0);
    let blocked = evaluate_layout(&MaskSpec::new(vec![0.0; 41], 2.8).unwrap(), &m, &d3);
    assert!(blocked.objective.is_infinite());

    // symmetric mask, d = 2: weights nearly equal (type-II dispersion keeps
    // them from being exactly equal)
    let m = model(&cfg, 512, SuperpositionMode::Coherent, 41);
    let e = evaluate_layout(&mask_of(&config("fig2-a2")), &m, &DesignObjective::new(2));
    assert_eq!(e.mode_weights.len(), 2);
    let cv = coefficient_of_variation(&e.mode_weights);
    assert!(cv < 0.05, "{cv}");
    assert!(e.mode_weights.iter().sum::<f64>() <= 1.0 + 1e-12);
}

#[test]
fn reflected_layout_scores_alike() {
    let m = model(&config("fig2-a1"), 256, SuperpositionMode::Incoherent, 41);
    let d = DesignObjective::new(3);
    let mask = mask_of(&config("fig2-a3"));
    let a = evaluate_layout(&mask, &m, &d);
    let b = evaluate_layout(&mask.reflected(), &m, &d);
    assert_eq!(a.peak_count, b.peak_count);
    assert!((a.objective - b.objective).abs() < 0.05, "{} vs {}", a.objective, b.objective);
    // exactly symmetric masks are their own reflection
    let sym = mask_of(&config("figS4-a2"));
    assert_eq!(sym.reflected(), sym);
}

#[test]
fn budget_of_one_returns_the_seed() {
    let m = model(&config("fig2-a1"), 128, SuperpositionMode::Incoherent, 41);
    let d = DesignObjective::new(3);
    let r = search(&d, &m, &SearchOptions::new(1)).unwrap();
    assert_eq!(r.layout, seed_layout(41, &d));
    assert_eq!(r.trace.evaluations, 1);
    assert_eq!(r.evaluation.objective, r.trace.seed_objective);
}

#[test]
fn larger_budget_never_worsens_the_result() {
    let m = model(&config("fig2-a1"), 96, SuperpositionMode::Incoherent, 21);
    let d = DesignObjective::new(3);
    let mut last = f64::INFINITY;
    let mut last_evals = 0;
    for budget in [1, 3, 10, 30, 100, 300] {
        let r = search(&d, &m, &SearchOptions::new(budget)).unwrap();
        assert!(r.evaluation.objective <= last, "budget {budget}");
        assert!(r.trace.evaluations <= budget && r.trace.evaluations >= last_evals);
        last = r.evaluation.objective;
        last_evals = r.trace.evaluations;
    }
}

#[test]
fn flat_top_three_mode_design() {
    let mut cfg = config("figS6-a1");
    cfg.pump.profile = ProfileKind::FlatTop;
    let m = model(&cfg, 256, SuperpositionMode::Incoherent, 41);
    let d = DesignObjective::new(3);
    let r = search(&d, &m, &SearchOptions::new(400)).unwrap();
    let fine = reevaluate(&r, &m, &d, SpectralGrid::square(770.0, 850.0, 512));
    assert_eq!(fine.peak_count, 3);
    let mean = fine.mode_weights.iter().sum::<f64>() / 3.0;
    for w in &fine.mode_weights {
        assert!((w - mean).abs() / mean < 0.05, "{:?}", fine.mode_weights);
    }
    assert!(fine.max_overlap() < 0.01);
}

#[test]
fn design_scenario_writes_the_mask_in_both_forms() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("fig2-a1");
    cfg.grid = cfg.grid.clone().with_points(96, 96);
    cfg.mask = MaskConfig::Design {
        bins: 15,
        aperture_mm: 2.8,
        objective: DesignObjective::new(2),
        budget: 200,
        exhaustive: true,
    };
    let out = run_scenario(&cfg, dir.path()).unwrap();
    let design = out.simulation.design.as_ref().unwrap();
    assert!(design.trace.exhaustive_ran);
    let text = fs::read_to_string(dir.path().join(DESIGN_FILE)).unwrap();
    let doc: qudit_core::scenario::DesignDocument = toml::from_str(&text).unwrap();
    assert_eq!(doc.mask.pattern, design.mask.pattern_string());
    assert_eq!(doc.mask.blocks, design.layout);
    assert_eq!(doc.mask.blocks_mm.len(), design.layout.len());
    assert_eq!(doc.design.search_points, 256);
}

#[test]
fn binary_export_round_trips_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("fig2-a4");
    cfg.grid = cfg.grid.clone().with_points(64, 80);
    let out = run_scenario(&cfg, dir.path()).unwrap();
    let bytes = fs::read(dir.path().join("jsi.bin")).unwrap();
    let back = jsi_from_binary(&bytes).unwrap();
    assert_eq!(back.grid, out.simulation.spectrum.grid);
    assert_eq!(back.intensity, out.simulation.spectrum.intensity);

    // tampering shows up in the index check
    fs::write(dir.path().join("marginal_idler.csv"), "x").unwrap();
    assert_eq!(verify_index(dir.path()).unwrap(), vec!["marginal_idler.csv".to_string()]);
}

#[test]
fn effective_config_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::from_toml_str(
        "mode = \"coherent\"\n[grid]\nsignal_points = 48\nidler_points = 48\n[mask]\nkind = \"open\"\n",
    )
    .unwrap();
    run_scenario(&cfg, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("effective_config.toml")).unwrap();
    for key in ["bandwidth_fwhm_nm", "beam_radius_mm", "focal_length_mm", "center_angle", "cut_angle_deg", "bins", "threshold_fraction"] {
        assert!(text.contains(key), "{key} missing:\n{text}");
    }
    assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
}
