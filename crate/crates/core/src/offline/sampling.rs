use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fem::{ParameterBox, ParameterVector};

/// Independent random substreams drawn from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStream {
    Training,
    Test,
}

impl SampleStream {
    fn id(self) -> u64 {
        match self {
            SampleStream::Training => 1,
            SampleStream::Test => 2,
        }
    }
}

/// `count` points drawn uniformly and independently per coordinate of `bounds`.
pub fn sample_parameters(
    bounds: &ParameterBox,
    count: usize,
    seed: u64,
    stream: SampleStream,
) -> Vec<ParameterVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    let intervals = bounds.intervals();
    (0..count)
        .map(|_| {
            let mut draw = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.gen::<f64>();
            ParameterVector {
                k: draw(intervals[0]),
                r: draw(intervals[1]),
                q: draw(intervals[2]),
                sigma: draw(intervals[3]),
            }
        })
        .collect()
}

pub fn sample_training_set(bounds: &ParameterBox, count: usize, seed: u64) -> Vec<ParameterVector> {
    sample_parameters(bounds, count, seed, SampleStream::Training)
}

pub fn sample_test_set(bounds: &ParameterBox, count: usize, seed: u64) -> Vec<ParameterVector> {
    sample_parameters(bounds, count, seed, SampleStream::Test)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_box_returns_center() {
        let b = ParameterBox {
            eps: 0.0,
            ..ParameterBox::default()
        };
        for mu in sample_training_set(&b, 5, 9) {
            assert_eq!(mu.as_array(), [100.0, 0.05, 0.0015, 0.5]);
        }
    }

    #[test]
    fn default_box_bounds_hold() {
        let b = ParameterBox::default();
        for seed in 0..20 {
            for mu in sample_training_set(&b, 16, seed) {
                assert!((95.0..=105.0).contains(&mu.k));
                assert!((0.0475..=0.0525).contains(&mu.r));
                assert!((0.001425..=0.001575).contains(&mu.q));
                assert!((0.475..=0.525).contains(&mu.sigma));
            }
        }
    }

    #[test]
    fn seeded_and_stream_separated() {
        let b = ParameterBox::default();
        assert_eq!(sample_training_set(&b, 16, 42), sample_training_set(&b, 16, 42));
        assert_ne!(sample_training_set(&b, 4, 42), sample_test_set(&b, 4, 42));
        // growing one stream does not reshuffle its prefix
        assert_eq!(
            sample_test_set(&b, 10, 42)[..4],
            sample_test_set(&b, 4, 42)[..]
        );
    }
}
