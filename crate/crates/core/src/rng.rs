//! Seed splitting. Trial `t` of a run seeded with `s` draws from ChaCha8
//! keyed by `s` on stream `t`, so trials are independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn seeded_rng(seed: u64) -> TrialRng {
    trial_rng(seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = trial_rng(7, 0).random();
        let b: u64 = trial_rng(7, 1).random();
        let a2: u64 = trial_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }
}
