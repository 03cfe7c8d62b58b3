#![allow(dead_code)]

use ladcd::{rng, Dataset};

/// Standard-normal design and response; column 0 is all ones when `intercept`.
pub fn gaussian(seed: u64, n: usize, p: usize, intercept: bool) -> Dataset {
    let mut g = rng::stream(seed, "test-instance", 0);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|j| if intercept && j == 0 { 1.0 } else { rng::standard_normal(&mut g) })
                .collect()
        })
        .collect();
    let y = (0..n).map(|_| rng::standard_normal(&mut g)).collect();
    Dataset::from_rows(&rows, y, intercept.then_some(0)).unwrap()
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
