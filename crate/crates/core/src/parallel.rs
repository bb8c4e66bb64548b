use std::ops::Range;

use rayon::prelude::*;

/// Rows per reduction block unless configured otherwise.
pub const DEFAULT_BLOCK: usize = 32;

/// Splits `0..n` into fixed blocks of `block` rows and maps each block,
/// returning the per-block results in block order. The partition depends only
/// on `n` and `block`, never on the worker count, so reducing the returned
/// vector sequentially is reproducible bit for bit.
pub fn map_blocks<T, F>(n: usize, block: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let block = block.max(1);
    let count = n.div_ceil(block);
    (0..count)
        .into_par_iter()
        .map(|b| f(b * block..((b + 1) * block).min(n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_range_in_order() {
        let got = map_blocks(10, 4, |r| r);
        assert_eq!(got, vec![0..4, 4..8, 8..10]);
        assert!(map_blocks(0, 4, |r| r).is_empty());
    }
}
