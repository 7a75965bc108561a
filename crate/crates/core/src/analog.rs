//! Lumped charge-sharing and sensing model with Monte Carlo process variation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bank::CellLevel;
use crate::bits::BitRow;

/// Deviations closer than this to the threshold count as an exact tie.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum AnalogError {
    #[error("invalid analog parameter: {0}")]
    InvalidParam(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalogParams {
    pub vdd: f64,
    pub c_cell_nominal: f64,
    /// Bitline capacitance in units of the nominal cell capacitance.
    pub cb_ratio: f64,
    /// Relative spread of cell capacitance (0.4 = 40%).
    pub variation_sigma: f64,
    /// Static per-bitline sense-amp offset spread, volts per unit of
    /// `variation_sigma`.
    pub sense_offset_sigma: f64,
    /// Per-sensing-event noise spread, volts per unit of `variation_sigma`.
    pub noise_sigma: f64,
    pub sense_threshold: f64,
    /// Sample cell capacitances once per cell instead of once per trial.
    pub static_variation: bool,
}

impl Default for AnalogParams {
    fn default() -> Self {
        Self {
            vdd: 1.2,
            c_cell_nominal: 1.0,
            cb_ratio: 5.79,
            variation_sigma: 0.0,
            sense_offset_sigma: 0.03,
            noise_sigma: 0.04,
            sense_threshold: 0.0,
            static_variation: true,
        }
    }
}

impl AnalogParams {
    pub fn with_variation(mut self, sigma: f64) -> Self {
        self.variation_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<(), AnalogError> {
        let positive = [
            ("vdd", self.vdd),
            ("c_cell_nominal", self.c_cell_nominal),
            ("cb_ratio", self.cb_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AnalogError::InvalidParam(format!(
                    "{name} must be positive"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.variation_sigma) {
            return Err(AnalogError::InvalidParam(
                "variation_sigma must be in [0, 1)".into(),
            ));
        }
        if self.sense_offset_sigma < 0.0 || self.noise_sigma < 0.0 {
            return Err(AnalogError::InvalidParam("negative noise spread".into()));
        }
        Ok(())
    }

    pub fn c_bitline(&self) -> f64 {
        self.cb_ratio * self.c_cell_nominal
    }

    pub fn offset_volts(&self) -> f64 {
        self.sense_offset_sigma * self.variation_sigma
    }

    pub fn noise_volts(&self) -> f64 {
        self.noise_sigma * self.variation_sigma
    }

    pub fn sense(&self, deviation: f64, offset: f64, bias: bool) -> bool {
        sense(deviation, offset, self.sense_threshold, bias)
    }
}

/// Bitline deviation from Vdd/2 after sharing with `cells`, given as
/// `(volts, capacitance multiplier)` pairs.
pub fn charge_share(cells: &[(f64, f64)], params: &AnalogParams) -> f64 {
    let half = params.vdd / 2.0;
    let mut num = 0.0;
    let mut den = params.c_bitline();
    for &(v, mult) in cells {
        let c = params.c_cell_nominal * mult;
        num += c * (v - half);
        den += c;
    }
    num / den
}

pub fn sense(deviation: f64, offset: f64, threshold: f64, bias: bool) -> bool {
    let v = deviation + offset - threshold;
    if v > TIE_EPSILON {
        true
    } else if v < -TIE_EPSILON {
        false
    } else {
        bias
    }
}

/// Row-wise form of [`charge_share`] used wherever a whole row buffer is
/// shared at once. `rows[k][b]` is the voltage of cell `k` on bitline `b`;
/// `weights[k]` scales that cell's capacitance (1.0 for a full share).
pub fn share_rows(
    rows: &[Vec<f64>],
    caps: &[Vec<f64>],
    weights: &[f64],
    params: &AnalogParams,
) -> Vec<f64> {
    let n_bitlines = rows.first().map_or(0, Vec::len);
    let half = params.vdd / 2.0;
    let mut num = vec![0.0; n_bitlines];
    let mut den = vec![params.c_bitline(); n_bitlines];
    for ((volts, mults), w) in rows.iter().zip(caps).zip(weights) {
        let scale = params.c_cell_nominal * w;
        for b in 0..n_bitlines {
            let c = scale * mults[b];
            num[b] += c * (volts[b] - half);
            den[b] += c;
        }
    }
    num.iter_mut().zip(&den).for_each(|(n, d)| *n /= d);
    num
}

/// Senses every bitline: `dev + offset + noise` against the threshold.
pub fn sense_row(
    deviations: &[f64],
    offsets: &[f64],
    noise: &[f64],
    params: &AnalogParams,
    bias: bool,
) -> BitRow {
    BitRow::from_fn(deviations.len(), |b| {
        params.sense(deviations[b], offsets[b] + noise[b], bias)
    })
}

const CAP_DOMAIN: u64 = 0x6361_7073_0000_0001;
const OFFSET_DOMAIN: u64 = 0x6f66_6673_0000_0002;
const NOISE_DOMAIN: u64 = 0x6e6f_6973_0000_0003;

/// Combines two keys into one RNG stream id.
pub fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over a simple combination
    let mut z = a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.rotate_left(29);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent ChaCha stream for `(seed, domain, key)`.
pub fn stream(seed: u64, domain: u64, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(key);
    rng
}

/// Reproducible source of per-cell capacitance multipliers, per-bitline
/// sense offsets and per-event noise. Every quantity is drawn from its own
/// RNG stream keyed by what it belongs to, so results do not depend on the
/// order in which they are requested.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationSample {
    pub seed: u64,
    pub n_bitlines: usize,
    sigma: f64,
    offset_volts: f64,
    noise_volts: f64,
    static_variation: bool,
}

impl VariationSample {
    pub fn new(params: &AnalogParams, seed: u64, n_bitlines: usize) -> Self {
        Self {
            seed,
            n_bitlines,
            sigma: params.variation_sigma,
            offset_volts: params.offset_volts(),
            noise_volts: params.noise_volts(),
            static_variation: params.static_variation,
        }
    }

    /// No variation and no noise.
    pub fn nominal(n_bitlines: usize) -> Self {
        Self::new(&AnalogParams::default(), 0, n_bitlines)
    }

    pub fn is_static(&self) -> bool {
        self.static_variation || self.sigma == 0.0
    }

    pub fn is_nominal(&self) -> bool {
        self.sigma == 0.0 && self.offset_volts == 0.0 && self.noise_volts == 0.0
    }

    /// Capacitance multipliers of `row`'s cells, normal around 1, truncated at
    /// three sigma and floored at 0.05. `trial` only matters when variation is
    /// resampled per trial.
    pub fn cap_multipliers(&self, row: u64, trial: u64) -> Vec<f64> {
        if self.sigma == 0.0 {
            return vec![1.0; self.n_bitlines];
        }
        let key = if self.static_variation {
            row
        } else {
            mix(row, trial.wrapping_add(1))
        };
        let mut rng = stream(self.seed, CAP_DOMAIN, key);
        (0..self.n_bitlines)
            .map(|_| {
                let z = loop {
                    let z: f64 = rng.sample(StandardNormal);
                    if z.abs() <= 3.0 {
                        break z;
                    }
                };
                (1.0 + self.sigma * z).max(0.05)
            })
            .collect()
    }

    pub fn sense_offsets(&self, subarray: u64) -> Vec<f64> {
        self.normals(OFFSET_DOMAIN, subarray, self.offset_volts)
    }

    pub fn noise(&self, trial: u64, subarray: u64, event: u64) -> Vec<f64> {
        self.normals(
            NOISE_DOMAIN,
            mix(mix(trial, subarray), event),
            self.noise_volts,
        )
    }

    fn normals(&self, domain: u64, key: u64, scale: f64) -> Vec<f64> {
        if scale == 0.0 {
            return vec![0.0; self.n_bitlines];
        }
        let mut rng = stream(self.seed, domain, key);
        (0..self.n_bitlines)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

/// Per-bitline outcome of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    pub expected: BitRow,
    pub stable: BitRow,
    pub correct_trials: Vec<u32>,
    pub trials: u32,
}

impl McResult {
    pub fn success_rate(&self) -> f64 {
        if self.stable.is_empty() {
            return 1.0;
        }
        self.stable.count_ones() as f64 / self.stable.len() as f64
    }

    pub fn unstable_bitlines(&self) -> usize {
        self.stable.len() - self.stable.count_ones()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitline,expected,stable,correct_trials,trials\n");
        for b in 0..self.stable.len() {
            let _ = writeln!(
                out,
                "{b},{},{},{},{}",
                self.expected.get(b) as u8,
                self.stable.get(b) as u8,
                self.correct_trials[b],
                self.trials
            );
        }
        out
    }
}

/// Counts, per bitline, the trials whose sensed bit matched. `trial_correct`
/// returns the correct-bit row for one trial; trials run in parallel and the
/// integer counts are merged, so the result is independent of scheduling.
pub fn count_correct<F>(n_bitlines: usize, trials: u32, trial_correct: F) -> Vec<u32>
where
    F: Fn(u64) -> BitRow + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .fold(
            || vec![0u32; n_bitlines],
            |mut acc, t| {
                let row = trial_correct(t);
                for (wi, &w) in row.words().iter().enumerate() {
                    let mut w = w;
                    while w != 0 {
                        acc[wi * 64 + w.trailing_zeros() as usize] += 1;
                        w &= w - 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; n_bitlines],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Monte Carlo success rate of a fixed cell layout. `cells[k][b]` is the level
/// of cell `k` on bitline `b`; cell `k` draws its capacitance from the same
/// stream a bank row `k` would. A bitline is stable if it senses `expected`
/// in every trial.
pub fn mc_success_rate(
    cells: &[Vec<CellLevel>],
    expected: &BitRow,
    params: &AnalogParams,
    trials: u32,
    seed: u64,
    bias: bool,
) -> McResult {
    assert!(trials >= 1, "at least one trial");
    let n_bitlines = expected.len();
    let variation = VariationSample::new(params, seed, n_bitlines);
    let volts: Vec<Vec<f64>> = cells
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n_bitlines, "layout width");
            row.iter().map(|c| c.volts(params.vdd)).collect()
        })
        .collect();
    let weights = vec![1.0; cells.len()];
    let offsets = variation.sense_offsets(0);
    let static_dev = params.static_variation.then(|| {
        let caps: Vec<_> = (0..cells.len() as u64)
            .map(|k| variation.cap_multipliers(k, 0))
            .collect();
        share_rows(&volts, &caps, &weights, params)
    });
    let correct_trials = count_correct(n_bitlines, trials, |t| {
        let dev = match &static_dev {
            Some(d) => d.clone(),
            None => {
                let caps: Vec<_> = (0..cells.len() as u64)
                    .map(|k| variation.cap_multipliers(k, t))
                    .collect();
                share_rows(&volts, &caps, &weights, params)
            }
        };
        let noise = variation.noise(t, 0, 0);
        sense_row(&dev, &offsets, &noise, params, bias)
            .xor(expected)
            .not()
    });
    let stable = BitRow::from_fn(n_bitlines, |b| correct_trials[b] == trials);
    McResult {
        expected: expected.clone(),
        stable,
        correct_trials,
        trials,
    }
}
