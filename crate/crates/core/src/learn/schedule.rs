use rand::seq::SliceRandom;

use crate::error::{AmpcError, Result};
use crate::rng;

/// Mini-batch indices per (client, iteration): uniform without replacement
/// within an epoch, reshuffled every epoch. Any trailing `m mod B` rows of a
/// permutation are skipped that epoch.
#[derive(Debug, Clone)]
pub struct BatchSchedule {
    seed: u64,
    rows_per_client: usize,
    batch: usize,
}

impl BatchSchedule {
    pub fn new(seed: u64, rows_per_client: usize, batch: usize) -> Result<Self> {
        if batch == 0 || batch > rows_per_client {
            return Err(AmpcError::invalid(format!(
                "batch size must be in 1..={rows_per_client}, got {batch}"
            )));
        }
        Ok(Self { seed, rows_per_client, batch })
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.rows_per_client / self.batch
    }

    /// Row indices of `client`'s batch at 0-based `iteration`.
    pub fn indices(&self, client: usize, iteration: usize) -> Vec<usize> {
        let per = self.batches_per_epoch();
        let (epoch, slot) = (iteration / per, iteration % per);
        let mut r = rng::derive(self.seed, &[client as u64, rng::label_hash("batch"), epoch as u64]);
        let mut perm: Vec<usize> = (0..self.rows_per_client).collect();
        perm.shuffle(&mut r);
        perm[slot * self.batch..(slot + 1) * self.batch].to_vec()
    }
}
