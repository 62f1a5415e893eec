use super::libsvm::{Dataset, Row};
use super::logistic::sigmoid_neg;
use crate::numkit::Rng;

/// Sizes of the one-hot groups that make up a1a's 123 binary features
/// (age, workclass, fnlwgt, education, education-num, marital status,
/// occupation, relationship, race, sex, capital gain, capital loss, hours
/// per week, native country).
pub const A1A_GROUP_SIZES: [usize; 14] = [5, 8, 5, 16, 5, 7, 14, 6, 5, 2, 2, 2, 5, 41];

/// Seeded sample with a1a's layout: one active binary feature per group,
/// category frequencies decaying like `1/(k+1)` within each group, and
/// labels drawn from a planted logistic model with a negative bias, so
/// roughly a quarter of the rows are positive.
pub fn a1a_like(rows: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let n: usize = A1A_GROUP_SIZES.iter().sum();
    let weights: Vec<f64> = (0..n).map(|_| 0.8 * rng.normal()).collect();
    let bias = -1.2;

    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut features = Vec::with_capacity(A1A_GROUP_SIZES.len());
        let mut offset = 0;
        for &size in &A1A_GROUP_SIZES {
            let total: f64 = (1..=size).map(|k| 1.0 / k as f64).sum();
            let mut u = rng.uniform() * total;
            let mut pick = size - 1;
            for k in 0..size {
                u -= 1.0 / (k + 1) as f64;
                if u < 0.0 {
                    pick = k;
                    break;
                }
            }
            features.push((offset + pick, 1.0));
            offset += size;
        }
        let score: f64 = bias + features.iter().map(|(i, _)| weights[*i]).sum::<f64>();
        // P(y = +1) = σ(score) = σ_neg(−score)
        let label = if rng.uniform() < sigmoid_neg(-score) { 1.0 } else { -1.0 };
        out.push(Row { label, features });
    }
    let n_features = out.iter().flat_map(|r| r.features.last()).map(|(i, _)| i + 1).max().unwrap_or(0);
    Dataset { rows: out, n_features }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_cover_123_features() {
        assert_eq!(A1A_GROUP_SIZES.iter().sum::<usize>(), 123);
    }

    #[test]
    fn deterministic_and_one_hot() {
        let a = a1a_like(50, 3);
        assert_eq!(a, a1a_like(50, 3));
        for r in &a.rows {
            assert_eq!(r.features.len(), 14);
            assert!(r.features.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }
}
