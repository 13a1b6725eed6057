use crate::data::shuffle_epoch;

/// Example visit order for one epoch: the seeded permutation when shuffling
/// is live, the identity otherwise.
pub fn epoch_order(dataset_size: usize, shuffle_seed: Option<u64>, epoch_index: usize) -> Vec<usize> {
    match shuffle_seed {
        Some(seed) => shuffle_epoch(dataset_size, seed, epoch_index),
        None => (0..dataset_size).collect(),
    }
}
