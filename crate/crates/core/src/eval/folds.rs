//! Seeded fold assignment for cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;

/// Shuffles `0..n` with a ChaCha8 stream seeded by `seed` and cuts it into
/// `folds` contiguous parts. When `n` is not a multiple of `folds`, the first
/// `n % folds` parts hold one extra index each, so sizes differ by at most one.
pub fn assign_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if folds == 0 {
        return Err(EvalError::Config("folds must be positive".into()));
    }
    if folds > n {
        return Err(EvalError::Config(format!("{folds} folds cannot partition {n} problems")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        out.push(fold);
        start += size;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_partition() {
        let sizes: Vec<usize> = assign_folds(11, 5, 7).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 2, 2, 2, 2]);
        let folds = assign_folds(10, 5, 42).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(folds, assign_folds(10, 5, 42).unwrap());
        assert!(assign_folds(3, 5, 0).is_err());
        assert!(assign_folds(3, 0, 0).is_err());
    }
}
