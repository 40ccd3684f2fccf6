//! Desk-scale substitute dataset used when no input CSV is supplied. The
//! generator mimics a year of coastal sensor readings: seasonal water
//! temperature, anti-correlated salinity, right-skewed UVB, and a
//! chlorophyll-a target driven nonlinearly by all three with heteroscedastic
//! noise plus occasional unexplained bloom spikes. All parameters are frozen
//! constants; nothing here claims fidelity to any real ecosystem.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::table::Table;

/// Default fraction of cells flagged missing.
pub const DEFAULT_MISSING_FRAC: f64 = 0.02;

/// Column names of the bundled dataset, target last.
pub const BUNDLED_SCHEMA: [&str; 4] = ["temp", "sal", "uvb", "chla"];
pub const BUNDLED_TARGET: &str = "chla";

const TEMP_MEAN: f64 = 15.5;
const TEMP_AMPLITUDE: f64 = 6.0;
const TEMP_NOISE: f64 = 0.7;
const SAL_BASE: f64 = 37.5;
const SAL_SLOPE: f64 = -0.12;
const SAL_NOISE: f64 = 0.30;
const UVB_BASE: f64 = 30.0;
const UVB_AMPLITUDE: f64 = 55.0;
const UVB_LOG_NOISE: f64 = 0.45;
const CHLA_INTERCEPT: f64 = 0.40;
const CHLA_TEMP_SLOPE: f64 = 0.16;
const CHLA_SAL_SLOPE: f64 = -0.30;
const CHLA_UVB_SLOPE: f64 = 0.50;
const CHLA_UVB_HALF: f64 = 40.0;
/// Bloom response: chlorophyll ramps up steeply when warm, fresher, bright
/// conditions coincide, a joint effect of all three drivers.
const BLOOM_GAIN: f64 = 2.8;
const BLOOM_TEMP_MID: f64 = 16.5;
const BLOOM_TEMP_WIDTH: f64 = 0.8;
const BLOOM_SAL_MID: f64 = 37.2;
const BLOOM_SAL_WIDTH: f64 = 0.45;
const BLOOM_UVB_MID: f64 = 55.0;
const BLOOM_UVB_WIDTH: f64 = 18.0;
const CHLA_NOISE_FLOOR: f64 = 0.05;
const CHLA_NOISE_SCALE: f64 = 0.04;
/// Bloom events: a small fraction of readings get a large positive kick
/// unexplained by the three drivers. The magnitude is truncated so single
/// events stay within plausible sensor readings.
const SPIKE_PROB: f64 = 0.02;
const SPIKE_OFFSET: f64 = 2.0;
const SPIKE_SCALE: f64 = 5.0;
const SPIKE_TRUNC: f64 = 1.2;
const CHLA_FLOOR: f64 = 0.02;

/// Generates `n` rows with the default 2% missing-cell fraction.
pub fn make_bundled_dataset(n: usize, seed: u64) -> Table {
    make_bundled_dataset_with(n, seed, DEFAULT_MISSING_FRAC)
}

/// Generates `n` rows with a configurable missing-cell fraction. The draw
/// count per row is fixed, so shorter tables are prefixes of longer ones
/// under the same seed.
pub fn make_bundled_dataset_with(n: usize, seed: u64, missing_frac: f64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut temp_col = Vec::with_capacity(n);
    let mut sal_col = Vec::with_capacity(n);
    let mut uvb_col = Vec::with_capacity(n);
    let mut chla_col = Vec::with_capacity(n);
    let mut missing = vec![Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];

    for i in 0..n {
        let frac = i as f64 / n as f64;
        let season = (2.0 * std::f64::consts::PI * frac - std::f64::consts::FRAC_PI_2).sin();

        let temp_eps: f64 = rng.sample(StandardNormal);
        let sal_eps: f64 = rng.sample(StandardNormal);
        let uvb_eps: f64 = rng.sample(StandardNormal);
        let chla_eps: f64 = rng.sample(StandardNormal);
        let spike_u: f64 = rng.gen();
        let spike_eps: f64 = rng.sample(StandardNormal);

        let temp = TEMP_MEAN + TEMP_AMPLITUDE * season + TEMP_NOISE * temp_eps;
        let sal = SAL_BASE + SAL_SLOPE * (temp - TEMP_MEAN) + SAL_NOISE * sal_eps;
        let uvb = (UVB_BASE + UVB_AMPLITUDE * (0.5 + 0.5 * season)) * (UVB_LOG_NOISE * uvb_eps).exp();

        // Monotone response in every driver plus a steep joint bloom ramp
        // where warm, fresher, bright conditions coincide.
        let sigmoid = |t: f64| 1.0 / (1.0 + (-t).exp());
        let bloom = BLOOM_GAIN
            * sigmoid((temp - BLOOM_TEMP_MID) / BLOOM_TEMP_WIDTH)
            * sigmoid((BLOOM_SAL_MID - sal) / BLOOM_SAL_WIDTH)
            * sigmoid((uvb - BLOOM_UVB_MID) / BLOOM_UVB_WIDTH);
        let base = CHLA_INTERCEPT
            + CHLA_TEMP_SLOPE * (temp - 9.0)
            + CHLA_SAL_SLOPE * (sal - SAL_BASE)
            + CHLA_UVB_SLOPE * (1.0 + uvb / CHLA_UVB_HALF).ln()
            + bloom;
        let noise = (CHLA_NOISE_FLOOR + CHLA_NOISE_SCALE * base.abs()) * chla_eps;
        let spike = if spike_u < SPIKE_PROB {
            SPIKE_OFFSET + SPIKE_SCALE * spike_eps.abs().min(SPIKE_TRUNC)
        } else {
            0.0
        };
        let chla = (base + noise + spike).max(CHLA_FLOOR);

        temp_col.push(temp);
        sal_col.push(sal);
        uvb_col.push(uvb);
        chla_col.push(chla);
        for mask in missing.iter_mut() {
            mask.push(rng.gen::<f64>() < missing_frac);
        }
    }

    let mut columns = vec![temp_col, sal_col, uvb_col, chla_col];
    for (col, mask) in columns.iter_mut().zip(&missing) {
        for (v, &m) in col.iter_mut().zip(mask) {
            if m {
                *v = f64::NAN;
            }
        }
    }
    Table::new(
        BUNDLED_SCHEMA.map(str::to_string).to_vec(),
        columns,
        missing,
        BUNDLED_TARGET,
    )
    .expect("bundled schema is valid by construction")
}
