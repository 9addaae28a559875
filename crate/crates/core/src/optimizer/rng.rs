use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Source of the random draws consumed by the optimizer steps.
///
/// Steps are written against this trait rather than a concrete generator so
/// tests can pin individual draws.
pub trait RandomSource {
    /// Uniform on `[0, 1)`.
    fn uniform(&mut self) -> f64;

    /// Standard normal.
    fn standard_normal(&mut self) -> f64;

    /// Uniform integer on `0..n`. `n` must be non-zero.
    fn index_below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Uniform on `[-1, 1)`.
    fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }
}

impl<T: RandomSource + ?Sized> RandomSource for &mut T {
    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }
    fn standard_normal(&mut self) -> f64 {
        (**self).standard_normal()
    }
    fn index_below(&mut self, n: usize) -> usize {
        (**self).index_below(n)
    }
    fn symmetric(&mut self) -> f64 {
        (**self).symmetric()
    }
}

/// Seeded per-run generator (ChaCha8).
#[derive(Debug, Clone)]
pub struct RunRng(ChaCha8Rng);

impl RunRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Stream for run `run` of an experiment seeded with `master`.
    pub fn for_run(master: u64, run: u64) -> Self {
        Self::new(derive_seed(master, run))
    }
}

impl RandomSource for RunRng {
    fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    fn index_below(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` under master seed `master`:
/// `splitmix64(master ^ splitmix64(run))`.
pub fn derive_seed(master: u64, run: u64) -> u64 {
    splitmix64(master ^ splitmix64(run))
}

/// Two distinct indices from `0..n`, both different from `exclude`.
///
/// Requires `n >= 3`.
pub fn distinct_pair<R: RandomSource + ?Sized>(
    rng: &mut R,
    n: usize,
    exclude: usize,
) -> (usize, usize) {
    debug_assert!(n >= 3);
    let mut a = rng.index_below(n - 1);
    if a >= exclude {
        a += 1;
    }
    let (lo, hi) = if a < exclude {
        (a, exclude)
    } else {
        (exclude, a)
    };
    let mut b = rng.index_below(n - 2);
    if b >= lo {
        b += 1;
    }
    if b >= hi {
        b += 1;
    }
    (a, b)
}
