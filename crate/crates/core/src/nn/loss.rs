//! Softmax, cross-entropy, and mean squared error.

use crate::error::{Error, Result};

/// Numerically stable softmax; subtracts the max before exponentiating.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|v| v / sum).collect()
}

fn check_normalized(probs: &[f64]) -> Result<()> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::input(format!("probability vector sums to {sum}")));
    }
    Ok(())
}

/// `-ln p[class]` for a normalized probability vector.
pub fn cross_entropy(probs: &[f64], class: usize) -> Result<f64> {
    check_normalized(probs)?;
    if class >= probs.len() {
        return Err(Error::input("class index out of range"));
    }
    Ok(-probs[class].max(1e-300).ln())
}

/// Gradient of cross-entropy w.r.t. the logits that produced `probs` via
/// softmax: `p - onehot(class)`.
pub fn softmax_cross_entropy_backward(probs: &[f64], class: usize) -> Vec<f64> {
    let mut g = probs.to_vec();
    g[class] -= 1.0;
    g
}

/// Gradient of an arbitrary loss through softmax: given `g = dL/dp` and the
/// softmax output `p`, returns dL/d(logits) via the full Jacobian.
pub fn softmax_backward(probs: &[f64], g: &[f64]) -> Vec<f64> {
    let inner: f64 = probs.iter().zip(g.iter()).map(|(p, gv)| p * gv).sum();
    probs
        .iter()
        .zip(g.iter())
        .map(|(p, gv)| p * (gv - inner))
        .collect()
}

/// Mean of squared component differences.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::input("mse operands differ in length"));
    }
    if a.is_empty() {
        return Err(Error::input("mse of empty vectors"));
    }
    let sum: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// Gradient of `mse(pred, target)` w.r.t. `pred`.
pub fn mse_backward(pred: &[f64], target: &[f64]) -> Vec<f64> {
    let n = pred.len() as f64;
    pred.iter()
        .zip(target.iter())
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_uniform_on_equal_logits() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        let p = softmax(&[3.0, 3.0, 3.0]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_no_overflow_on_large_logits() {
        let p = softmax(&[1000.0, 0.0]);
        assert!(p[0] > 1.0 - 1e-12);
        assert!(p[1] < 1e-12);
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[0.3, -2.0, 5.5, 1.1]);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn cross_entropy_of_uniform_three_way() {
        let p = softmax(&[0.0, 0.0, 0.0]);
        let l = cross_entropy(&p, 0).unwrap();
        assert!((l - 1.0986122886681098).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_zero_iff_certain() {
        assert_eq!(cross_entropy(&[1.0, 0.0], 0).unwrap(), 0.0);
        assert!(cross_entropy(&[0.9, 0.1], 0).unwrap() > 0.0);
    }

    #[test]
    fn cross_entropy_rejects_unnormalized() {
        assert!(cross_entropy(&[0.5, 0.4], 0).is_err());
        assert!(cross_entropy(&[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn fused_backward_matches_jacobian_route() {
        let p = softmax(&[0.2, -0.4, 1.3]);
        let fused = softmax_cross_entropy_backward(&p, 1);
        let g: Vec<f64> = p.iter().enumerate().map(|(i, pi)| if i == 1 { -1.0 / pi } else { 0.0 }).collect();
        let via_jacobian = softmax_backward(&p, &g);
        for (a, b) in fused.iter().zip(via_jacobian.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mse_values() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5);
        assert!(mse(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mse_backward_matches_finite_differences() {
        let pred = vec![0.5, -1.0, 2.0];
        let target = vec![0.0, 1.0, 2.0];
        let g = mse_backward(&pred, &target);
        let eps = 1e-6;
        for i in 0..pred.len() {
            let mut up = pred.clone();
            up[i] += eps;
            let mut dn = pred.clone();
            dn[i] -= eps;
            let fd = (mse(&up, &target).unwrap() - mse(&dn, &target).unwrap()) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-6);
        }
    }
}
