//! Inverted dropout.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::ChaCha8Rng;

/// Samples a mask of zeros and `1/(1-rate)` survivors.
pub fn dropout_mask(len: usize, rate: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::config(format!("dropout rate {rate} outside [0, 1)")));
    }
    let keep = 1.0 - rate;
    Ok((0..len)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { 1.0 / keep })
        .collect())
}

/// Training mode multiplies by a fresh mask and returns it; evaluation mode is
/// the identity and returns no mask.
pub fn dropout_apply(
    input: &mut [f64],
    rate: f64,
    training: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<f64>>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::config(format!("dropout rate {rate} outside [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok(None);
    }
    let mask = dropout_mask(input.len(), rate, rng)?;
    for (v, m) in input.iter_mut().zip(mask.iter()) {
        *v *= m;
    }
    Ok(Some(mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn rate_zero_is_identity() {
        let mut rng = rng_from_seed(40);
        let mut v = vec![1.0, 2.0, 3.0];
        let mask = dropout_apply(&mut v, 0.0, true, &mut rng).unwrap();
        assert!(mask.is_none());
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn evaluation_mode_is_identity() {
        let mut rng = rng_from_seed(41);
        let mut v = vec![1.0, 2.0, 3.0];
        let mask = dropout_apply(&mut v, 0.9, false, &mut rng).unwrap();
        assert!(mask.is_none());
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rate_one_rejected() {
        let mut rng = rng_from_seed(42);
        let mut v = vec![1.0];
        assert!(dropout_apply(&mut v, 1.0, true, &mut rng).is_err());
        assert!(dropout_apply(&mut v, -0.1, true, &mut rng).is_err());
    }

    #[test]
    fn survivor_scaling_keeps_mean_near_one() {
        let mut rng = rng_from_seed(43);
        let mut v = vec![1.0; 100_000];
        dropout_apply(&mut v, 0.5, true, &mut rng).unwrap();
        let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        assert!(v.iter().all(|x| *x == 0.0 || *x == 2.0));
    }

    #[test]
    fn same_seed_same_mask() {
        let mut r1 = rng_from_seed(44);
        let mut r2 = rng_from_seed(44);
        assert_eq!(
            dropout_mask(64, 0.5, &mut r1).unwrap(),
            dropout_mask(64, 0.5, &mut r2).unwrap()
        );
    }
}
