//! Monte Carlo trials: post-selection outcome plus both meter readouts.
//!
//! Each branch (success on `E_f`, failure on `1 − E_f`) has a readout law
//! that is a signed mixture of six Gaussians. Draws come from rejection
//! sampling against the same mixture with absolute weights; acceptance is
//! exactly `Σw / Σ|w|`. When that falls below [`MIN_ACCEPTANCE`] the branch
//! switches to inverse-CDF sampling on a 512×512 grid (bias of order one cell).
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, index)`, so
//! output is identical regardless of thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::statistics::{Component, Experiment};

pub const MIN_ACCEPTANCE: f64 = 0.01;
pub const FALLBACK_GRID: usize = 512;
/// Half-width of the fallback grid around the outermost centres, in meter spreads.
const FALLBACK_SPREADS: f64 = 8.0;

const SAMPLE_DOMAIN: u64 = 0x5452_4941_4c53_0001;
const NOISE_DOMAIN: u64 = 0x4e4f_4953_4553_0002;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub n_trials: u64,
    pub seed: u64,
    pub noise: Option<(f64, f64)>,
}

impl SamplerConfig {
    pub fn new(n_trials: u64, seed: u64) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
        }
        Ok(Self { n_trials, seed, noise: None })
    }

    pub fn with_noise(mut self, nu_x: f64, nu_y: f64) -> Self {
        self.noise = Some((nu_x, nu_y));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u64,
    pub postselected: bool,
    pub x: f64,
    pub y: f64,
    /// `xy` on success, `−xy` on failure.
    pub c: f64,
}

impl TrialRecord {
    pub fn new(index: u64, postselected: bool, x: f64, y: f64) -> Self {
        let c = if postselected { x * y } else { -(x * y) };
        Self { index, postselected, x, y, c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchInfo {
    pub probability: f64,
    /// `Σw / Σ|w|`, the rejection acceptance rate.
    pub acceptance: f64,
    pub grid_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetadata {
    pub seed: u64,
    pub n_trials: u64,
    pub success: BranchInfo,
    /// `None` when the complementary post-selection has zero probability.
    pub failure: Option<BranchInfo>,
    pub noise: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub records: Vec<TrialRecord>,
    pub metadata: SampleMetadata,
}

/// Stream for trial `index` in `domain`.
fn trial_rng(key: &[u8; 32], index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(index);
    rng
}

fn domain_key(seed: u64, domain: u64) -> [u8; 32] {
    let mut base = ChaCha8Rng::seed_from_u64(seed ^ domain);
    let mut key = [0u8; 32];
    base.fill(&mut key);
    key
}

#[derive(Debug, Clone)]
struct GridTable {
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Method {
    Rejection { cumulative_abs: [f64; 6] },
    Grid(GridTable),
}

/// Draws `(x, y)` from one branch's conditional readout law.
#[derive(Debug, Clone)]
pub struct BranchSampler {
    components: [Component; 6],
    sd_x: f64,
    sd_y: f64,
    acceptance: f64,
    method: Method,
}

fn unit_gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp()
}

impl BranchSampler {
    pub fn new(exp: &Experiment) -> Self {
        let components = exp.components();
        let sd_x = 1.0 / exp.meter_x().epsilon();
        let sd_y = 1.0 / exp.meter_y().epsilon();
        let signed: f64 = components.iter().map(|c| c.weight).sum();
        let total_abs: f64 = components.iter().map(|c| c.weight.abs()).sum();
        let acceptance = signed / total_abs;
        let mut s = Self { components, sd_x, sd_y, acceptance, method: Method::Rejection { cumulative_abs: [0.0; 6] } };
        s.method = if acceptance < MIN_ACCEPTANCE {
            Method::Grid(s.build_grid())
        } else {
            let mut acc = 0.0;
            let mut cumulative_abs = [0.0; 6];
            for (slot, c) in cumulative_abs.iter_mut().zip(&components) {
                acc += c.weight.abs() / total_abs;
                *slot = acc;
            }
            Method::Rejection { cumulative_abs }
        };
        s
    }

    /// Always uses the inverse-CDF grid, whatever the acceptance rate.
    pub fn with_grid(exp: &Experiment) -> Self {
        let mut s = Self::new(exp);
        if !s.uses_grid() {
            s.method = Method::Grid(s.build_grid());
        }
        s
    }

    pub fn acceptance(&self) -> f64 {
        self.acceptance
    }

    pub fn uses_grid(&self) -> bool {
        matches!(self.method, Method::Grid(_))
    }

    /// Unnormalized density and envelope at `(x, y)`, up to a common factor.
    fn density_and_envelope(&self, x: f64, y: f64) -> (f64, f64) {
        self.components.iter().fold((0.0, 0.0), |(f, g), c| {
            let k = unit_gaussian((x - c.center.0) / self.sd_x) * unit_gaussian((y - c.center.1) / self.sd_y);
            (f + c.weight * k, g + c.weight.abs() * k)
        })
    }

    fn build_grid(&self) -> GridTable {
        let n = FALLBACK_GRID;
        let (cx_min, cx_max) = (0.0, 1.0);
        let (cy_min, cy_max) = (-1.0, 1.0);
        let x0 = cx_min - FALLBACK_SPREADS * self.sd_x;
        let y0 = cy_min - FALLBACK_SPREADS * self.sd_y;
        let dx = (cx_max - cx_min + 2.0 * FALLBACK_SPREADS * self.sd_x) / n as f64;
        let dy = (cy_max - cy_min + 2.0 * FALLBACK_SPREADS * self.sd_y) / n as f64;
        let mut cumulative = Vec::with_capacity(n * n);
        let mut acc = 0.0;
        for i in 0..n {
            let x = x0 + (i as f64 + 0.5) * dx;
            for j in 0..n {
                let y = y0 + (j as f64 + 0.5) * dy;
                acc += self.density_and_envelope(x, y).0.max(0.0);
                cumulative.push(acc);
            }
        }
        GridTable { x0, y0, dx, dy, cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match &self.method {
            Method::Rejection { cumulative_abs } => loop {
                let u: f64 = rng.random();
                let k = cumulative_abs.iter().position(|&c| u < c).unwrap_or(5);
                let c = &self.components[k];
                let zx: f64 = rng.sample(StandardNormal);
                let zy: f64 = rng.sample(StandardNormal);
                let (x, y) = (c.center.0 + self.sd_x * zx, c.center.1 + self.sd_y * zy);
                let (f, g) = self.density_and_envelope(x, y);
                let v: f64 = rng.random();
                if v * g < f {
                    return (x, y);
                }
            },
            Method::Grid(t) => {
                let total = *t.cumulative.last().unwrap_or(&0.0);
                let u: f64 = rng.random::<f64>() * total;
                let cell = t.cumulative.partition_point(|&c| c <= u).min(t.cumulative.len() - 1);
                let (i, j) = (cell / FALLBACK_GRID, cell % FALLBACK_GRID);
                let jx: f64 = rng.random();
                let jy: f64 = rng.random();
                (t.x0 + (i as f64 + jx) * t.dx, t.y0 + (j as f64 + jy) * t.dy)
            }
        }
    }
}

/// Density of one branch, normalized, for diagnostics and tests.
pub fn branch_density(exp: &Experiment, x: f64, y: f64) -> f64 {
    let (ex, ey) = (exp.meter_x().epsilon(), exp.meter_y().epsilon());
    let norm = ex * ey / (2.0 * PI);
    exp.components()
        .iter()
        .map(|c| c.weight * unit_gaussian((x - c.center.0) * ex) * unit_gaussian((y - c.center.1) * ey))
        .sum::<f64>()
        * norm
        / exp.p_postselect()
}

/// I.i.d. trials of post-selection outcome and readouts.
pub fn sample_trials(exp: &Experiment, cfg: &SamplerConfig) -> Result<SampleRun> {
    if cfg.n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    let p = exp.p_postselect();
    let success = BranchSampler::new(exp);
    let failure = match exp.complement() {
        Ok(comp) => Some((comp.p_postselect(), BranchSampler::new(&comp))),
        Err(Error::ZeroPostselection { .. }) => None,
        Err(e) => return Err(e),
    };
    let key = domain_key(cfg.seed, SAMPLE_DOMAIN);

    let mut records: Vec<TrialRecord> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(&key, i);
            let u: f64 = rng.random();
            match &failure {
                Some((_, fs)) if u >= p => {
                    let (x, y) = fs.sample(&mut rng);
                    TrialRecord::new(i, false, x, y)
                }
                _ => {
                    let (x, y) = success.sample(&mut rng);
                    TrialRecord::new(i, true, x, y)
                }
            }
        })
        .collect();

    if let Some((nu_x, nu_y)) = cfg.noise {
        records = apply_readout_noise(&records, nu_x, nu_y, cfg.seed)?;
    }

    let metadata = SampleMetadata {
        seed: cfg.seed,
        n_trials: cfg.n_trials,
        success: BranchInfo { probability: p, acceptance: success.acceptance(), grid_fallback: success.uses_grid() },
        failure: failure.as_ref().map(|(q, s)| BranchInfo {
            probability: *q,
            acceptance: s.acceptance(),
            grid_fallback: s.uses_grid(),
        }),
        noise: cfg.noise,
    };
    Ok(SampleRun { records, metadata })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheshireEstimate {
    /// Sample mean of the signed products; estimates `C = 2 C(E_f)`.
    pub estimate: f64,
    /// Sample standard deviation over `√n` (zero for a single record).
    pub std_error: f64,
    pub n: usize,
}

pub fn estimate_cheshire(records: &[TrialRecord]) -> Result<CheshireEstimate> {
    let n = records.len();
    if n == 0 {
        return Err(Error::EmptyRecords);
    }
    let mean = records.iter().map(|r| r.c).sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let var = records.iter().map(|r| (r.c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(CheshireEstimate { estimate: mean, std_error, n })
}

/// Adds independent zero-mean Gaussian noise (standard deviations `ν_x`,
/// `ν_y`) to the readouts and recomputes the signed products.
pub fn apply_readout_noise(records: &[TrialRecord], nu_x: f64, nu_y: f64, seed: u64) -> Result<Vec<TrialRecord>> {
    if !(nu_x >= 0.0 && nu_y >= 0.0) || !nu_x.is_finite() || !nu_y.is_finite() {
        return Err(Error::InvalidArgument(format!("noise levels must be non-negative, got ({nu_x}, {nu_y})")));
    }
    if nu_x == 0.0 && nu_y == 0.0 {
        return Ok(records.to_vec());
    }
    let key = domain_key(seed, NOISE_DOMAIN);
    Ok(records
        .par_iter()
        .map(|r| {
            let mut rng = trial_rng(&key, r.index);
            let zx: f64 = rng.sample(StandardNormal);
            let zy: f64 = rng.sample(StandardNormal);
            TrialRecord::new(r.index, r.postselected, r.x + nu_x * zx, r.y + nu_y * zy)
        })
        .collect())
}

/// CSV with header `trial_index,postselected,x,y,c`.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial_index", "postselected", "x", "y", "c"])?;
    for r in records {
        w.write_record([
            r.index.to_string(),
            u8::from(r.postselected).to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.c.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
