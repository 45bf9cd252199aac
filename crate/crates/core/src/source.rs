//! Sources of per-slot capacity matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::CapacityMatrix;
use crate::scalar::Scalar;

/// Random number generator used for every simulation stream.
pub type SimRng = ChaCha8Rng;

/// Deterministic generator for `seed`, sub-stream `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Anything able to produce an i.i.d. capacity matrix per slot.
pub trait SlotSource<T: Scalar>: Sync {
    fn relays(&self) -> usize;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CapacityMatrix<T>;

    /// `slots` consecutive draws.
    fn trace<R: Rng + ?Sized>(&self, slots: usize, rng: &mut R) -> Vec<CapacityMatrix<T>> {
        (0..slots).map(|_| self.draw(rng)).collect()
    }
}

/// The same capacity matrix in every slot (deterministic channels).
#[derive(Debug, Clone)]
pub struct FixedCapacities<T>(pub CapacityMatrix<T>);

impl<T: Scalar> SlotSource<T> for FixedCapacities<T> {
    fn relays(&self) -> usize {
        self.0.relays()
    }

    fn draw<R: Rng + ?Sized>(&self, _rng: &mut R) -> CapacityMatrix<T> {
        self.0.clone()
    }
}

/// Draws uniformly from a finite set of matrices.
#[derive(Debug, Clone)]
pub struct EmpiricalCapacities<T>(pub Vec<CapacityMatrix<T>>);

impl<T: Scalar> SlotSource<T> for EmpiricalCapacities<T> {
    fn relays(&self) -> usize {
        self.0[0].relays()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CapacityMatrix<T> {
        self.0[rng.random_range(0..self.0.len())].clone()
    }
}
