//! A synthetic geological lobe simulator.
//!
//! Each step deposits one parabolic lobe on a 1-D lateral grid. Deposition
//! is compensational: thickness is reduced where the surface already stands
//! high, which couples every step to the full history and produces the
//! jagged, multimodal fit landscapes the inference engines are exercised on.
//! Emissions are per-well porosity segments: the slice of column deposited
//! at each well location during the step, sampled on a fixed height grid.
//!
//! The simulator makes no claim of geological fidelity; it reproduces the
//! structural properties inversion depends on — a deterministic transition,
//! deterministic per-well emissions, and uniform `[0,1]^5` step parameters.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contract::{ParamStep, Simulator};
use crate::error::{Error, Result};
use crate::likelihood::Norm;
use crate::sim::welllog::{PorositySample, WellLog, WellLogSet};

/// Tolerance used when deciding how many height samples fit in a deposit.
const THICKNESS_EPS: f64 = 1e-9;

/// Raw parameter components per step: center, width, amplitude, base
/// porosity, decay.
pub const LOBE_PARAM_DIM: usize = 5;

/// Geometry and scoring configuration for the lobe simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct LobeConfig {
    /// Lateral grid cells `G`.
    pub grid_cells: usize,
    /// Height sampling resolution `dh` in meters.
    pub sample_spacing_m: f64,
    /// Compensation factor: how strongly existing relief suppresses
    /// deposition.
    pub compensation: f64,
    /// Number of lobes `T`.
    pub horizon: usize,
    /// Well locations as grid cell indices.
    pub wells: Vec<usize>,
    /// Add `|H_T(g_l) - top_l|` to each well's distance at the final step,
    /// penalizing globally under- or over-filled columns. Off by default;
    /// the experiment harness enables it for lobe runs.
    pub terminal_surface_penalty: bool,
    /// Divide segment distances by the square root of the sample count.
    /// Off by default (raw norm over samples).
    pub length_normalized_distance: bool,
    /// How per-sample porosity differences aggregate into one distance.
    pub segment_norm: Norm,
    /// Width of the base-porosity scaling range starting at 0.05.
    pub porosity_span: f64,
    /// Wavelength of decay lamination in meters; zero disables lamination.
    ///
    /// Lobes with nonzero decay deposit finely banded porosity, periodic in
    /// absolute height. Columns that stack lobes at the wrong heights then
    /// decorrelate from the data within one sample spacing, which is what
    /// couples every step to the accuracy of its whole prefix.
    pub lamination_wavelength_m: f64,
}

impl LobeConfig {
    /// Desk-scale defaults: 64 cells, 5 cm sampling, compensation 0.5, and
    /// `well_count` wells spread evenly across the interior.
    pub fn standard(horizon: usize, well_count: usize) -> Self {
        let grid_cells = 64;
        Self {
            grid_cells,
            sample_spacing_m: 0.05,
            compensation: 0.5,
            horizon,
            wells: Self::spread_wells(grid_cells, well_count),
            terminal_surface_penalty: false,
            length_normalized_distance: false,
            segment_norm: Norm::default(),
            porosity_span: 0.3,
            lamination_wavelength_m: 0.0,
        }
    }

    /// Evenly spaced interior cell indices.
    pub fn spread_wells(grid_cells: usize, well_count: usize) -> Vec<usize> {
        (0..well_count)
            .map(|l| {
                let frac = (l + 1) as f64 / (well_count + 1) as f64;
                (frac * (grid_cells - 1) as f64).round() as usize
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.grid_cells < 2 {
            return Err(Error::Config("lobe grid needs at least 2 cells".into()));
        }
        if self.sample_spacing_m <= 0.0 {
            return Err(Error::Config("sample spacing must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.wells.is_empty() {
            return Err(Error::Config("at least one well location required".into()));
        }
        if let Some(&bad) = self.wells.iter().find(|&&w| w >= self.grid_cells) {
            return Err(Error::Config(format!(
                "well cell {bad} outside grid 0..{}",
                self.grid_cells
            )));
        }
        Ok(())
    }
}

/// Physical per-step parameters, scaled from the raw `[0,1]^5` block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeParams {
    /// Apex position in grid coordinates.
    pub center_cell: f64,
    /// Parabola half-width in cells.
    pub half_width: f64,
    /// Maximum (uncompensated) thickness in meters.
    pub amplitude: f64,
    /// Porosity at the lobe base.
    pub base_porosity: f64,
    /// Fractional porosity loss from base to top.
    pub decay: f64,
}

impl LobeParams {
    /// Scale a raw parameter block. Components are clamped to `[0,1]`;
    /// engines only pass support-checked values.
    pub fn from_raw(raw: &ParamStep, config: &LobeConfig) -> Self {
        debug_assert_eq!(raw.len(), LOBE_PARAM_DIM);
        let unit = |i: usize| raw.values()[i].clamp(0.0, 1.0);
        Self {
            center_cell: unit(0) * (config.grid_cells - 1) as f64,
            half_width: 4.0 + 20.0 * unit(1),
            amplitude: 0.2 + 1.8 * unit(2),
            base_porosity: 0.05 + config.porosity_span * unit(3),
            decay: 0.5 * unit(4),
        }
    }

    /// Porosity at relative height `z` in `(0, 1]` within the lobe and
    /// absolute height `height` above datum.
    ///
    /// The smooth part decays linearly from the base porosity. Lobes with
    /// nonzero decay additionally carry laminae: banding periodic in
    /// absolute height, with amplitude growing as `sqrt(decay)`. A lobe
    /// with zero decay has constant porosity.
    pub fn porosity_at(&self, z: f64, height: f64, lamination_wavelength: f64) -> f64 {
        let mut phi = self.base_porosity * (1.0 - self.decay * z);
        if self.decay > 0.0 && lamination_wavelength > 0.0 {
            // Full modulation at maximum decay, vanishing smoothly at zero.
            let amplitude = self.base_porosity * (2.0 * self.decay).sqrt();
            let phase = std::f64::consts::TAU * height / lamination_wavelength;
            phi += amplitude * phase.sin();
        }
        phi.clamp(0.0, 1.0)
    }
}

/// The porosity slice deposited at one well during one step.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionSegment {
    /// Index of the well in the simulator's well list.
    pub well: usize,
    /// Height interval `[end_{t-1}, end_t]` covered by this step's deposit.
    /// Equal bounds mean no deposition reached the well.
    pub interval: (f64, f64),
    /// Porosities at spacing `dh` above the interval's lower bound; the
    /// `j`-th sample sits at `interval.0 + (j + 1) * dh`.
    pub samples: Vec<f64>,
}

impl EmissionSegment {
    pub fn is_deposition_free(&self) -> bool {
        self.samples.is_empty() && self.interval.0 == self.interval.1
    }

    pub fn thickness(&self) -> f64 {
        self.interval.1 - self.interval.0
    }

    /// Absolute height of sample `j`.
    pub fn sample_height(&self, j: usize, dh: f64) -> f64 {
        self.interval.0 + (j + 1) as f64 * dh
    }
}

/// Simulator state: the current surface plus the segments deposited by the
/// most recent step (which `emit` returns). The full per-well column record
/// is the concatenation of a trace's emissions.
#[derive(Debug, Clone, PartialEq)]
pub struct LobeState {
    /// Surface height per grid cell, nondecreasing over time.
    pub surface: Vec<f64>,
    /// Deposits of the latest step, one segment per well.
    pub last_segments: Vec<EmissionSegment>,
}

/// The lobe simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct LobeSimulator {
    config: LobeConfig,
}

impl LobeSimulator {
    pub fn new(config: LobeConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &LobeConfig {
        &self.config
    }

    pub fn well_count(&self) -> usize {
        self.config.wells.len()
    }

    /// One deposition step: thickness at cell `x` is the parabola
    /// `A * (1 - ((x - x_c) / W)^2)` reduced by `beta * (H(x) - min H)`,
    /// floored at zero. Porosity decreases linearly with relative height
    /// inside the lobe. Pure and deterministic.
    pub fn deposit(&self, state: &LobeState, raw: &ParamStep) -> LobeState {
        let cfg = &self.config;
        let p = LobeParams::from_raw(raw, cfg);
        let min_height = state
            .surface
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);

        let mut surface = Vec::with_capacity(state.surface.len());
        for (x, &h) in state.surface.iter().enumerate() {
            let offset = (x as f64 - p.center_cell) / p.half_width;
            let parabola = p.amplitude * (1.0 - offset * offset);
            let thickness = (parabola - cfg.compensation * (h - min_height)).max(0.0);
            surface.push(h + thickness);
        }

        let last_segments = cfg
            .wells
            .iter()
            .enumerate()
            .map(|(well, &cell)| {
                let base = state.surface[cell];
                let top = surface[cell];
                let thickness = top - base;
                let count = (thickness / cfg.sample_spacing_m + THICKNESS_EPS).floor() as usize;
                let samples = (1..=count)
                    .map(|j| {
                        let offset = j as f64 * cfg.sample_spacing_m;
                        let z = offset / thickness;
                        p.porosity_at(z, base + offset, cfg.lamination_wavelength_m)
                    })
                    .collect();
                EmissionSegment {
                    well,
                    interval: (base, top),
                    samples,
                }
            })
            .collect();

        LobeState {
            surface,
            last_segments,
        }
    }

    /// The emission connecting two consecutive states, checking they really
    /// are consecutive: `after` must start where `before` ends at every
    /// well.
    pub fn emission_between(
        &self,
        before: &LobeState,
        after: &LobeState,
    ) -> Result<Vec<EmissionSegment>> {
        for (l, &cell) in self.config.wells.iter().enumerate() {
            let seg = after.last_segments.get(l).ok_or_else(|| {
                Error::Incoherent(format!("state has no segment for well {l}"))
            })?;
            if seg.interval.0 != before.surface[cell] || seg.interval.1 != after.surface[cell] {
                return Err(Error::Incoherent(format!(
                    "segment interval at well {l} does not bridge the two states"
                )));
            }
        }
        Ok(after.last_segments.clone())
    }

    /// Distance between a generated segment and the real log at the same
    /// well: the configured norm over the per-sample differences, with the
    /// real log linearly interpolated at the segment's sample heights.
    /// Empty segments contribute zero.
    pub fn segment_distance(&self, segment: &EmissionSegment, log: &WellLog) -> f64 {
        if segment.samples.is_empty() {
            return 0.0;
        }
        let dh = self.config.sample_spacing_m;
        let mut sq = 0.0;
        let mut abs = 0.0;
        for (j, &generated) in segment.samples.iter().enumerate() {
            let real = log.interpolate(segment.sample_height(j, dh));
            let diff = generated - real;
            sq += diff * diff;
            abs += diff.abs();
        }
        let mut d = match self.config.segment_norm {
            Norm::Euclidean => sq.sqrt(),
            Norm::AbsoluteSum => abs,
        };
        if self.config.length_normalized_distance {
            d /= (segment.samples.len() as f64).sqrt();
        }
        d
    }

    /// Forward-simulate from a hidden seed and package the emissions as
    /// per-well logs. Returns the data plus the held-out ground truth; the
    /// truth is for evaluation reports only and never enters inference.
    ///
    /// Each log ends with a cap sample exactly at the final surface height,
    /// so a log's top height equals the final surface at its well.
    pub fn make_synthetic_dataset(&self, seed: u64) -> (WellLogSet, SyntheticTruth) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = &self.config;
        let mut state = self.initialize();
        let mut params = Vec::with_capacity(cfg.horizon);
        let mut columns: Vec<Vec<PorositySample>> = vec![Vec::new(); cfg.wells.len()];
        // Porosity at the exact top of each column, tracked so the cap
        // sample sits on the same linear profile as the grid samples.
        let mut caps: Vec<Option<(f64, f64)>> = vec![None; cfg.wells.len()];

        for _ in 0..cfg.horizon {
            let raw = self.sample_params(&mut rng);
            let scaled = LobeParams::from_raw(&raw, cfg);
            let next = self.deposit(&state, &raw);
            for (l, seg) in next.last_segments.iter().enumerate() {
                let dh = cfg.sample_spacing_m;
                for (j, &porosity) in seg.samples.iter().enumerate() {
                    columns[l].push(PorositySample {
                        height_m: seg.sample_height(j, dh),
                        porosity,
                    });
                }
                if seg.thickness() > 0.0 {
                    let top = seg.interval.1;
                    caps[l] = Some((
                        top,
                        scaled.porosity_at(1.0, top, cfg.lamination_wavelength_m),
                    ));
                }
            }
            params.push(raw);
            state = next;
        }

        let wells = cfg
            .wells
            .iter()
            .enumerate()
            .map(|(l, &cell)| {
                let mut samples = std::mem::take(&mut columns[l]);
                if let Some((top, porosity)) = caps[l] {
                    let already_there = samples
                        .last()
                        .is_some_and(|s| (s.height_m - top).abs() <= 1e-12);
                    if !already_there {
                        samples.push(PorositySample {
                            height_m: top,
                            porosity,
                        });
                    }
                }
                WellLog {
                    id: l as u32,
                    x: cell,
                    samples,
                }
            })
            .collect();

        let data = WellLogSet { wells };
        let truth = SyntheticTruth {
            seed,
            params,
            final_surface: state.surface,
        };
        (data, truth)
    }
}

/// Hidden ground truth behind a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub seed: u64,
    pub params: Vec<ParamStep>,
    pub final_surface: Vec<f64>,
}

impl Simulator for LobeSimulator {
    type State = LobeState;
    type Emission = Vec<EmissionSegment>;
    type Data = WellLogSet;

    fn param_dim(&self) -> usize {
        LOBE_PARAM_DIM
    }

    fn horizon(&self) -> usize {
        self.config.horizon
    }

    fn initialize(&self) -> LobeState {
        LobeState {
            surface: vec![0.0; self.config.grid_cells],
            last_segments: (0..self.config.wells.len())
                .map(|well| EmissionSegment {
                    well,
                    interval: (0.0, 0.0),
                    samples: Vec::new(),
                })
                .collect(),
        }
    }

    fn sample_component(&self, _component: usize, rng: &mut dyn RngCore) -> f64 {
        rng.gen::<f64>()
    }

    fn log_prob_component(&self, _component: usize, value: f64) -> f64 {
        if (0.0..=1.0).contains(&value) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn component_in_support(&self, _component: usize, value: f64) -> bool {
        (0.0..=1.0).contains(&value)
    }

    fn simulate(&self, state: &LobeState, params: &ParamStep) -> LobeState {
        self.deposit(state, params)
    }

    fn emit(&self, state: &LobeState) -> Vec<EmissionSegment> {
        state.last_segments.clone()
    }

    fn per_well_distances(
        &self,
        step: usize,
        emission: &Vec<EmissionSegment>,
        data: &WellLogSet,
    ) -> Result<Vec<f64>> {
        if emission.len() != data.wells.len() {
            return Err(Error::Config(format!(
                "emission covers {} wells, data has {}",
                emission.len(),
                data.wells.len()
            )));
        }
        let terminal = self.config.terminal_surface_penalty && step == self.config.horizon;
        Ok(emission
            .iter()
            .zip(&data.wells)
            .map(|(seg, log)| {
                let mut d = self.segment_distance(seg, log);
                if terminal {
                    d += (seg.interval.1 - log.top_height()).abs();
                }
                d
            })
            .collect())
    }

    fn validate_data(&self, data: &WellLogSet) -> Result<()> {
        data.validate()?;
        if data.wells.len() != self.config.wells.len() {
            return Err(Error::Config(format!(
                "data has {} wells, simulator expects {}",
                data.wells.len(),
                self.config.wells.len()
            )));
        }
        for (l, (well, &cell)) in data.wells.iter().zip(&self.config.wells).enumerate() {
            if well.x != cell {
                return Err(Error::Config(format!(
                    "well {l} is at cell {} in the data but {cell} in the simulator",
                    well.x
                )));
            }
        }
        Ok(())
    }
}
