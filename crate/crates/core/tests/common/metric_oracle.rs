//! Brute-force metric oracle and random outcome matrices.

use proptest::prelude::*;

/// Independent enumeration over `rows[n][k][m]`.
pub fn brute_force(rows: &[Vec<Vec<bool>>]) -> (f64, f64) {
    let n = rows.len();
    let mut solved = 0usize;
    let mut passed = 0usize;
    let mut total = 0usize;
    for problem in rows {
        let mut any_full = false;
        for sample in problem {
            let mut all = true;
            for &cell in sample {
                total += 1;
                if cell {
                    passed += 1;
                } else {
                    all = false;
                }
            }
            if all {
                any_full = true;
            }
        }
        if any_full {
            solved += 1;
        }
    }
    (solved as f64 / n as f64, passed as f64 / total as f64)
}

pub fn rows_strategy() -> impl Strategy<Value = Vec<Vec<Vec<bool>>>> {
    (1usize..=6, 1usize..=4, 1usize..=5).prop_flat_map(|(n, k, m)| {
        proptest::collection::vec(
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), m), k),
            n,
        )
    })
}
