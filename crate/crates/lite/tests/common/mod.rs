#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// CSV text shaped like the car data: four independents (one symbolic) and
/// three goals that trade off against each other.
pub fn cars_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("Clndrs,Volume,Model,origin,Lbs-,Acc+,Mpg+\n");
    for _ in 0..n {
        let clndrs = [4, 4, 4, 6, 8][rng.random_range(0..5)];
        let volume = clndrs as f64 * rng.random_range(20.0..45.0);
        let model = rng.random_range(70..83);
        let origin = rng.random_range(1..4);
        let lbs = 1500.0 + volume * 7.0 + rng.random_range(0.0..400.0);
        let acc = 25.0 - volume / 30.0 + rng.random_range(0.0..4.0);
        let mpg = ((60.0 - lbs / 110.0 + (model - 70) as f64 * 0.6 + rng.random_range(-3.0..3.0)) / 10.0)
            .round()
            .max(1.0)
            * 10.0;
        out.push_str(&format!(
            "{clndrs},{volume:.0},{model},{origin},{lbs:.0},{acc:.1},{mpg:.0}\n"
        ));
    }
    out
}

/// A numeric-only problem with a small sweet spot near the origin.
pub fn bowl_csv(n: usize, dims: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for d in 0..dims {
        out.push_str(&format!("X{d},"));
    }
    out.push_str("Cost-,Quality+\n");
    for _ in 0..n {
        let x: Vec<f64> = (0..dims).map(|_| rng.random_range(0.0..1.0)).collect();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let cost = r2 + rng.random_range(0.0..0.05);
        let quality = 1.0 - (x[0] - 0.2).abs() + rng.random_range(0.0..0.05);
        for v in &x {
            out.push_str(&format!("{v:.4},"));
        }
        out.push_str(&format!("{cost:.4},{quality:.4}\n"));
    }
    out
}

pub fn dataset(csv: &str) -> lite_core::Dataset {
    lite::io::parse_str(csv).unwrap()
}
