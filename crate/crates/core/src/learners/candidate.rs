use rand::Rng;

use crate::error::Result;
use crate::field::FieldElement;
use crate::samples::SampleSource;

/// Measures `m` fresh samples and accepts `candidate` iff every one satisfies
/// `|b - a·candidate| <= k` in centered representation. Stops at the first
/// failing sample.
pub fn test_candidate<S, R>(
    candidate: &[FieldElement],
    m: usize,
    source: &mut S,
    k: u64,
    rng: &mut R,
) -> Result<bool>
where
    S: SampleSource,
    R: Rng + ?Sized,
{
    let fp = source.field().clone();
    for _ in 0..m {
        let (a, b) = source.next_classical(rng)?;
        let residual = fp.sub(b, fp.dot(&a, candidate));
        if fp.centered_abs(residual) > k {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::samples::{LweSource, NoiseModel, SubsetMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn correct_candidate_always_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fp = FieldParams::new(11).unwrap();
        let s = fp.elems(&[3, 8]);
        let mut source = LweSource::new(
            &fp,
            s.clone(),
            SubsetMode::All,
            NoiseModel::BoundedUniform { k: 2 },
        )
        .unwrap();
        for _ in 0..2_000 {
            assert!(test_candidate(&s, 3, &mut source, 2, &mut rng).unwrap());
        }
        assert_eq!(source.samples_drawn(), 6_000);
    }

    #[test]
    fn vacuous_interval_accepts_anything() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fp = FieldParams::new(7).unwrap();
        let s = fp.elems(&[1]);
        let mut source = LweSource::new(&fp, s, SubsetMode::All, NoiseModel::None).unwrap();
        for c in 0..7 {
            assert!(test_candidate(&fp.elems(&[c]), 1, &mut source, 3, &mut rng).unwrap());
        }
    }

    #[test]
    fn wrong_candidate_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fp = FieldParams::new(11).unwrap();
        let s = fp.elems(&[4, 2]);
        let wrong = fp.elems(&[4, 3]);
        let mut source =
            LweSource::new(&fp, s, SubsetMode::All, NoiseModel::BoundedUniform { k: 1 }).unwrap();
        let trials = 20_000;
        let accepted = (0..trials)
            .filter(|_| test_candidate(&wrong, 2, &mut source, 1, &mut rng).unwrap())
            .count();
        let p = (3.0f64 / 11.0).powi(2);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((accepted as f64 / trials as f64 - p).abs() < 3.0 * sigma);
    }
}
