//! Inverse design of slit layouts.
//!
//! A layout is a set of blocked runs on the mask's bin lattice. Each
//! candidate is scored by running the forward model and reading the signal
//! marginal: the number of peaks should equal the target dimension, the
//! modes should carry equal power, and their heralded partner spectra
//! should not overlap. Lower scores are better.
//!
//! The search is a coordinate descent over block edges started from `d-1`
//! evenly spaced blocks, optionally followed by exhaustive enumeration
//! when the layout space is small. Candidates are evaluated in parallel
//! but always ranked in a fixed order, so the outcome only depends on the
//! inputs and the evaluation budget.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{coefficient_of_variation, find_peaks, mode_overlap, mode_weights};
use crate::crystal::CrystalSpec;
use crate::error::{Error, Result};
use crate::jsa::{marginal, superposed_jsi, SpectralAxis, SpectralGrid, SuperpositionMode};
use crate::phase_matching::PhaseMatchConfig;
use crate::pump::{bin_angles, mask_from_slits, MaskSpec, PumpSpec};

/// Layout spaces up to this size may be enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;
pub const SEARCH_GRID_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignObjective {
    pub dimension: usize,
    #[serde(default = "one")]
    pub weight_count: f64,
    #[serde(default = "one")]
    pub weight_uniformity: f64,
    #[serde(default = "one")]
    pub weight_overlap: f64,
    /// Smallest open window allowed between two blocks, in bins.
    #[serde(default = "one_usize")]
    pub min_open_width: usize,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl DesignObjective {
    pub fn new(dimension: usize) -> Self {
        DesignObjective {
            dimension,
            weight_count: 1.0,
            weight_uniformity: 1.0,
            weight_overlap: 1.0,
            min_open_width: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::invalid("objective.dimension", "must be >= 2"));
        }
        let w = [self.weight_count, self.weight_uniformity, self.weight_overlap];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("objective.weights", "must be finite and >= 0"));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(Error::invalid("objective.weights", "at least one weight must be positive"));
        }
        if self.min_open_width == 0 {
            return Err(Error::invalid("objective.min_open_width", "must be >= 1"));
        }
        Ok(())
    }

    pub fn blocks(&self) -> usize {
        self.dimension - 1
    }
}

/// Everything the forward model needs besides the mask.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    pub phase: PhaseMatchConfig,
    pub pump: PumpSpec,
    pub grid: SpectralGrid,
    pub mode: SuperpositionMode,
    pub bins: usize,
    pub aperture_mm: f64,
    pub threshold_fraction: f64,
    pub min_separation_nm: f64,
}

impl ForwardModel {
    pub fn new(crystal: CrystalSpec, pump: PumpSpec, grid: SpectralGrid, mode: SuperpositionMode, bins: usize, aperture_mm: f64) -> Self {
        ForwardModel {
            phase: PhaseMatchConfig::type_ii(crystal),
            pump,
            grid,
            mode,
            bins,
            aperture_mm,
            threshold_fraction: crate::analysis::DEFAULT_THRESHOLD_FRACTION,
            min_separation_nm: crate::analysis::DEFAULT_MIN_SEPARATION_NM,
        }
    }
}

/// Blocked runs as 1-based `(start, width)`, sorted and non-touching.
pub type Layout = Vec<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objective: f64,
    pub peak_count: usize,
    pub mode_weights: Vec<f64>,
    pub overlaps: Vec<Vec<f64>>,
    pub blocked_bins: usize,
}

impl Evaluation {
    fn worst(blocked_bins: usize) -> Self {
        Evaluation {
            objective: f64::INFINITY,
            peak_count: 0,
            mode_weights: Vec::new(),
            overlaps: Vec::new(),
            blocked_bins,
        }
    }

    pub fn max_overlap(&self) -> f64 {
        self.overlaps
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, v)| *v))
            .fold(0.0, f64::max)
    }
}

/// Scores one mask. A fully blocked mask, or one the forward model cannot
/// evaluate, gets an infinite objective rather than an error.
pub fn evaluate_layout(mask: &MaskSpec, model: &ForwardModel, objective: &DesignObjective) -> Evaluation {
    let blocked = mask.blocked_bins();
    let Ok(bins) = bin_angles(&model.pump, mask, &model.phase.crystal) else {
        return Evaluation::worst(blocked);
    };
    let Ok(spectrum) = superposed_jsi(&model.phase, &model.pump, &model.grid, &bins, model.mode) else {
        return Evaluation::worst(blocked);
    };
    let m = marginal(&spectrum, SpectralAxis::Signal);
    let catalog = find_peaks(&m, model.threshold_fraction, model.min_separation_nm);
    let weights = mode_weights(&m, &catalog);
    let n = catalog.len();
    let mut overlaps = vec![vec![0.0; n]; n];
    let mut max_overlap: f64 = 0.0;
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        overlaps[i][i] = 1.0;
        for j in i + 1..n {
            let v = mode_overlap(&spectrum, &catalog, i, j).unwrap_or(1.0);
            overlaps[i][j] = v;
            overlaps[j][i] = v;
            max_overlap = max_overlap.max(v);
        }
    }
    let count_penalty = (n as f64 - objective.dimension as f64).abs();
    let score = objective.weight_count * count_penalty
        + objective.weight_uniformity * coefficient_of_variation(&weights)
        + objective.weight_overlap * max_overlap;
    Evaluation {
        objective: score,
        peak_count: n,
        mode_weights: weights,
        overlaps,
        blocked_bins: blocked,
    }
}

/// Ranking used everywhere: objective, then fewer blocked bins, then the
/// lexicographically smallest layout.
pub fn rank(a: (&Evaluation, &Layout), b: (&Evaluation, &Layout)) -> Ordering {
    a.0.objective
        .total_cmp(&b.0.objective)
        .then(a.0.blocked_bins.cmp(&b.0.blocked_bins))
        .then_with(|| a.1.cmp(b.1))
}

pub fn layout_mask(layout: &Layout, bins: usize, aperture_mm: f64) -> Result<MaskSpec> {
    mask_from_slits(bins, layout)?.with_aperture(aperture_mm)
}

/// Whether `layout` has `blocks` runs that fit in `bins`, each at least one
/// bin wide, separated by at least `min_gap` open bins.
pub fn is_valid_layout(layout: &Layout, bins: usize, blocks: usize, min_gap: usize) -> bool {
    if layout.len() != blocks {
        return false;
    }
    let mut prev_end = 0; // one past the previous block, 1-based
    for (k, &(start, width)) in layout.iter().enumerate() {
        if width == 0 || start == 0 || start + width - 1 > bins {
            return false;
        }
        if k > 0 && start < prev_end + min_gap {
            return false;
        }
        prev_end = start + width;
    }
    true
}

/// `d-1` blocks and `d` open windows of (nearly) equal width; spare bins
/// go to the outer windows.
pub fn seed_layout(bins: usize, objective: &DesignObjective) -> Layout {
    let blocks = objective.blocks();
    let runs = 2 * blocks + 1;
    let w = (bins / runs).max(1);
    let spare = bins.saturating_sub(w * runs);
    let mut start = 1 + w + spare / 2;
    let mut layout = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        layout.push((start, w));
        start += 2 * w;
    }
    layout
}

/// Number of valid layouts, or `None` above `cap`.
pub fn layout_space_size(bins: usize, blocks: usize, min_gap: usize, cap: u64) -> Option<u64> {
    let mut count = 0u64;
    let mut too_big = false;
    enumerate_layouts(bins, blocks, min_gap, &mut |_| {
        count += 1;
        if count > cap {
            too_big = true;
            return false;
        }
        true
    });
    (!too_big).then_some(count)
}

/// Visits every valid layout in lexicographic order until `visit` returns false.
pub fn enumerate_layouts(bins: usize, blocks: usize, min_gap: usize, visit: &mut dyn FnMut(&Layout) -> bool) {
    fn rec(
        bins: usize,
        left: usize,
        first_start: usize,
        min_gap: usize,
        cur: &mut Layout,
        visit: &mut dyn FnMut(&Layout) -> bool,
    ) -> bool {
        if left == 0 {
            return visit(cur);
        }
        for start in first_start..=bins {
            for width in 1..=bins + 1 - start {
                cur.push((start, width));
                let next = start + width + min_gap;
                let ok = if left == 1 {
                    visit(cur)
                } else if next <= bins {
                    rec(bins, left - 1, next, min_gap, cur, visit)
                } else {
                    true
                };
                cur.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    if blocks == 0 {
        visit(&Vec::new());
        return;
    }
    rec(bins, blocks, 1, min_gap, &mut Vec::new(), visit);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub budget: usize,
    pub exhaustive: bool,
    /// Starting layout; `None` uses [`seed_layout`].
    pub start: Option<Layout>,
}

impl SearchOptions {
    pub fn new(budget: usize) -> Self {
        SearchOptions {
            budget,
            exhaustive: true,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub evaluations: usize,
    pub seed_objective: f64,
    pub descent_steps: usize,
    pub exhaustive_ran: bool,
    pub layout_space: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub layout: Layout,
    pub mask: MaskSpec,
    pub evaluation: Evaluation,
    pub trace: SearchTrace,
}

struct Searcher<'a> {
    model: &'a ForwardModel,
    objective: &'a DesignObjective,
    cache: HashMap<Layout, Evaluation>,
    remaining: usize,
    evaluations: usize,
    best: Option<(Layout, Evaluation)>,
}

impl<'a> Searcher<'a> {
    /// Evaluates `candidates` in order until the budget runs out. Returns
    /// the evaluated prefix (cached layouts are free) and whether the
    /// whole list was covered.
    fn batch(&mut self, candidates: &[Layout]) -> (Vec<(Layout, Evaluation)>, bool) {
        let mut take = Vec::new();
        let mut fresh = 0;
        let mut complete = true;
        for c in candidates {
            if !self.cache.contains_key(c) {
                if fresh == self.remaining {
                    complete = false;
                    break;
                }
                fresh += 1;
            }
            take.push(c.clone());
        }
        let todo: Vec<&Layout> = take.iter().filter(|c| !self.cache.contains_key(*c)).collect();
        let model = self.model;
        let objective = self.objective;
        let results: Vec<Evaluation> = todo
            .par_iter()
            .map(|l| match layout_mask(l, model.bins, model.aperture_mm) {
                Ok(mask) => evaluate_layout(&mask, model, objective),
                Err(_) => Evaluation::worst(0),
            })
            .collect();
        for (l, e) in todo.into_iter().zip(results) {
            self.cache.insert(l.clone(), e);
        }
        self.remaining -= fresh;
        self.evaluations += fresh;
        let out: Vec<(Layout, Evaluation)> = take
            .into_iter()
            .map(|l| {
                let e = self.cache[&l].clone();
                (l, e)
            })
            .collect();
        for (l, e) in &out {
            let better = match &self.best {
                None => true,
                Some((bl, be)) => rank((e, l), (be, bl)) == Ordering::Less,
            };
            if better {
                self.best = Some((l.clone(), e.clone()));
            }
        }
        (out, complete)
    }
}

fn neighbours(layout: &Layout, bins: usize, min_gap: usize) -> Vec<Layout> {
    let mut out = Vec::new();
    for k in 0..layout.len() {
        let (s, w) = layout[k];
        let moves: [(isize, isize); 6] = [(-1, 0), (1, 0), (-1, 1), (0, 1), (1, -1), (0, -1)];
        for (ds, dw) in moves {
            let ns = s as isize + ds;
            let nw = w as isize + dw;
            if ns < 1 || nw < 1 {
                continue;
            }
            let mut cand = layout.clone();
            cand[k] = (ns as usize, nw as usize);
            if is_valid_layout(&cand, bins, layout.len(), min_gap) {
                out.push(cand);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Searches for the best layout with `objective.dimension - 1` blocks.
pub fn search(objective: &DesignObjective, model: &ForwardModel, options: &SearchOptions) -> Result<DesignResult> {
    objective.validate()?;
    if options.budget == 0 {
        return Err(Error::invalid("budget", "must be >= 1"));
    }
    let blocks = objective.blocks();
    let bins = model.bins;
    let gap = objective.min_open_width;
    let start = options.start.clone().unwrap_or_else(|| seed_layout(bins, objective));
    if !is_valid_layout(&start, bins, blocks, gap) {
        return Err(Error::invalid("start", format!("layout {start:?} does not fit {bins} bins")));
    }

    let mut s = Searcher {
        model,
        objective,
        cache: HashMap::new(),
        remaining: options.budget,
        evaluations: 0,
        best: None,
    };
    let (seed, _) = s.batch(std::slice::from_ref(&start));
    let seed_objective = seed[0].1.objective;
    let mut current = seed.into_iter().next().unwrap();
    let mut steps = 0;
    loop {
        let cands = neighbours(&current.0, bins, gap);
        let (evaluated, complete) = s.batch(&cands);
        let best = evaluated.into_iter().min_by(|a, b| rank((&a.1, &a.0), (&b.1, &b.0)));
        match best {
            Some(b) if rank((&b.1, &b.0), (&current.1, &current.0)) == Ordering::Less => {
                current = b;
                steps += 1;
            }
            _ => break,
        }
        if !complete || s.remaining == 0 {
            break;
        }
    }

    let space = layout_space_size(bins, blocks, gap, EXHAUSTIVE_LIMIT);
    let mut exhaustive_ran = false;
    if options.exhaustive && s.remaining > 0 && space.is_some() {
        exhaustive_ran = true;
        let mut all = Vec::new();
        enumerate_layouts(bins, blocks, gap, &mut |l| {
            all.push(l.clone());
            true
        });
        for chunk in all.chunks(256) {
            let (_, complete) = s.batch(chunk);
            if !complete {
                break;
            }
        }
    }

    let (layout, evaluation) = s.best.take().expect("at least the seed was evaluated");
    let mask = layout_mask(&layout, bins, model.aperture_mm)?;
    Ok(DesignResult {
        layout,
        mask,
        evaluation,
        trace: SearchTrace {
            evaluations: s.evaluations,
            seed_objective,
            descent_steps: steps,
            exhaustive_ran,
            layout_space: space,
        },
    })
}

/// Re-scores a design on a different (typically finer) grid.
pub fn reevaluate(result: &DesignResult, model: &ForwardModel, objective: &DesignObjective, grid: SpectralGrid) -> Evaluation {
    let mut m = model.clone();
    m.grid = grid;
    evaluate_layout(&result.mask, &m, objective)
}
