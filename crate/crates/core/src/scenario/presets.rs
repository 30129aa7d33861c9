//! Named scenarios, one per figure panel of the reference study.
//!
//! Masks use 41 bins over a 2.8 mm aperture (twice the beam radius on each
//! side) unless a caption asks for 101 bins. Slit patterns that start with a
//! blocked run ("slit-beam-slit") are centered with the spare bins left
//! open; flat-top patterns that start with an open run cover the whole
//! mask.

use super::config::{AnalysisConfig, CrystalConfig, GridConfig, MaskConfig, PumpConfig, ScenarioConfig};
use crate::error::{Error, Result};
use crate::jsa::SuperpositionMode;
use crate::pump::{Leading, ProfileKind, DEFAULT_APERTURE_MM};

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub description: String,
    /// Bin arithmetic as written in the figure caption, e.g. `"14-13-14"` or
    /// `"width 5, center 23"`. Empty when the caption gives none.
    pub caption: String,
    /// Physical-unit masks whose bin calibration is assumed, so only trends
    /// are meaningful.
    pub qualitative: bool,
    /// Peaks in the signal marginal that the panel shows.
    pub expected_peaks: usize,
    pub config: ScenarioConfig,
}

fn base(name: &str, description: &str, profile: ProfileKind, mask: MaskConfig) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        mode: SuperpositionMode::Incoherent,
        crystal: CrystalConfig::default(),
        pump: PumpConfig {
            profile,
            ..PumpConfig::default()
        },
        grid: GridConfig::default(),
        mask,
        analysis: AnalysisConfig::default(),
        output_dir: None,
    }
}

fn pattern(bins: usize, widths: &str, leading: Leading) -> MaskConfig {
    MaskConfig::Pattern {
        bins,
        aperture_mm: DEFAULT_APERTURE_MM,
        widths: widths.into(),
        leading,
    }
}

fn slit(center: usize, width: usize) -> MaskConfig {
    MaskConfig::Slit {
        bins: 41,
        aperture_mm: DEFAULT_APERTURE_MM,
        center,
        width,
    }
}

fn physical(blocks_mm: Vec<(f64, f64)>) -> MaskConfig {
    MaskConfig::Physical {
        bins: 41,
        aperture_mm: DEFAULT_APERTURE_MM,
        blocks_mm,
    }
}

struct Entry {
    name: String,
    description: String,
    caption: String,
    qualitative: bool,
    expected_peaks: usize,
    profile: ProfileKind,
    mask: MaskConfig,
}

fn entry(name: &str, description: &str, caption: &str, expected_peaks: usize, mask: MaskConfig) -> Entry {
    Entry {
        name: name.into(),
        description: description.into(),
        caption: caption.into(),
        qualitative: false,
        expected_peaks,
        profile: ProfileKind::Gaussian,
        mask,
    }
}

fn entries() -> Vec<Entry> {
    let mut v = Vec::new();

    for (tag, angle, signal) in [("a", 41.29, 794), ("b", 41.79, 810), ("c", 42.29, 827)] {
        v.push(entry(
            &format!("fig1-{tag}"),
            &format!("single pump ray at {angle} deg, signal mode near {signal} nm"),
            &format!("{angle}"),
            1,
            MaskConfig::Angles { angles_deg: vec![angle] },
        ));
    }
    v.push(entry(
        "fig1-d",
        "three pump rays at 41.29, 41.79 and 42.29 deg",
        "41.29, 41.79, 42.29",
        3,
        MaskConfig::Angles {
            angles_deg: vec![41.29, 41.79, 42.29],
        },
    ));

    let fig2: [(&str, MaskConfig); 5] = [
        (
            "open mask",
            MaskConfig::Open {
                bins: 41,
                aperture_mm: DEFAULT_APERTURE_MM,
            },
        ),
        ("one central block of 9 bins", slit(21, 9)),
        ("two blocks, slit-beam-slit 5-3-5", pattern(41, "5-3-5", Leading::Block)),
        ("three blocks, 4-3-4-3-4", pattern(41, "4-3-4-3-4", Leading::Block)),
        ("four blocks, 3-3-3-3-3-3-3", pattern(41, "3-3-3-3-3-3-3", Leading::Block)),
    ];
    for (k, (desc, mask)) in fig2.into_iter().enumerate() {
        v.push(entry(
            &format!("fig2-a{}", k + 1),
            &format!("Gaussian pump, {desc}; {} frequency mode(s)", k + 1),
            "",
            k + 1,
            mask,
        ));
    }

    for (k, w) in [0usize, 3, 5, 9, 13].into_iter().enumerate() {
        v.push(entry(
            &format!("figS1-a{}", k + 1),
            &format!("single slit of {w} bins at the beam center"),
            &format!("width {w}"),
            if w == 0 { 1 } else { 2 },
            slit(21, w),
        ));
    }
    for (fig, centers) in [("figS2", [21, 22, 23, 24, 25]), ("figS3", [21, 20, 19, 18, 17])] {
        for (k, c) in centers.into_iter().enumerate() {
            v.push(entry(
                &format!("{fig}-a{}", k + 1),
                &format!("single 5-bin slit centered on bin {c}"),
                &format!("width 5, center {c}"),
                2,
                slit(c, 5),
            ));
        }
    }
    for (k, w) in (4..=8).enumerate() {
        let p = format!("{w}-1-{w}");
        v.push(entry(
            &format!("figS4-a{}", k + 1),
            &format!("two slits, slit-beam-slit {p}"),
            &p,
            3,
            pattern(41, &p, Leading::Block),
        ));
    }
    for (k, (bins, p, peaks)) in [
        (101, "11-2-11-2-11", 4),
        (101, "13-2-13-2-13", 4),
        (101, "15-2-15-2-15", 4),
        (41, "4-1-4-1-4-1-4", 5),
        (101, "12-2-12-2-12-2-12", 5),
    ]
    .into_iter()
    .enumerate()
    {
        v.push(entry(
            &format!("figS5-a{}", k + 1),
            &format!("{} slits on {bins} bins, {p}", p.split('-').count().div_ceil(2)),
            p,
            peaks,
            pattern(bins, p, Leading::Block),
        ));
    }
    for (k, (p, peaks)) in [
        ("41", 1),
        ("14-13-14", 2),
        ("9-7-9-7-9", 3),
        ("5-7-5-7-5-7-5", 4),
        ("2-8-2-8-2-8-2-7-2", 5),
    ]
    .into_iter()
    .enumerate()
    {
        let mut e = entry(
            &format!("figS6-a{}", k + 1),
            &format!("flat-top pump, beam-slit widths {p}"),
            p,
            peaks,
            pattern(41, p, Leading::Open),
        );
        e.profile = ProfileKind::FlatTop;
        v.push(e);
    }

    let calibration = "assumes the 2.8 mm aperture spans 41 bins";
    for (tag, w) in [("c", 0.3), ("d", 0.6), ("e", 1.0), ("f", 1.5)] {
        let mut e = entry(
            &format!("fig3-{tag}"),
            &format!("central block line of {w} mm; {calibration}"),
            &format!("{w} mm"),
            2,
            physical(vec![(0.0, w)]),
        );
        e.qualitative = true;
        v.push(e);
    }
    let mut g = entry(
        "fig3-g",
        &format!("two 0.8 mm block lines 0.1 mm apart; {calibration}"),
        "0.8 mm, 0.1 mm gap",
        3,
        physical(vec![(-0.45, 0.8), (0.45, 0.8)]),
    );
    g.qualitative = true;
    v.push(g);
    v
}

/// Every preset, in catalog order.
pub fn presets() -> Vec<Preset> {
    entries()
        .into_iter()
        .map(|e| {
            let config = base(&e.name, &e.description, e.profile, e.mask);
            Preset {
                name: e.name,
                description: e.description,
                caption: e.caption,
                qualitative: e.qualitative,
                expected_peaks: e.expected_peaks,
                config,
            }
        })
        .collect()
}

pub fn preset(name: &str) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::invalid("preset", format!("unknown preset `{name}`; see the `presets` command")))
}

