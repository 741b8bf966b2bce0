use super::ModelError;
use crate::scalar::Real;

/// Logistic function, evaluated without overflow for large `|x|`.
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `ℓ(s, y) = max(s, 0) − s·y + ln(1 + e^{−|s|})`.
#[inline]
pub(crate) fn bce_term<T: Real>(s: T, y: T) -> T {
    s.max(T::zero()) - s * y + (-s.abs()).exp().ln_1p()
}

/// Mean binary cross-entropy of logits `scores` against 0/1 `labels`.
pub fn bce_loss<T: Real>(scores: &[T], labels: &[T]) -> Result<T, ModelError> {
    if scores.len() != labels.len() {
        return Err(ModelError::Shape {
            what: "scores vs labels",
            expected: vec![scores.len()],
            found: vec![labels.len()],
        });
    }
    if scores.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    if let Some(&y) = labels.iter().find(|&&y| y != T::zero() && y != T::one()) {
        return Err(ModelError::BadLabel(y.as_f64()));
    }
    // running mean: identical terms average to themselves exactly
    let mut mean = T::zero();
    for (i, (&s, &y)) in scores.iter().zip(labels).enumerate() {
        mean = mean + (bce_term(s, y) - mean) / T::of_usize(i + 1);
    }
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uninformative_logit() {
        let l = bce_loss(&[0.0f64], &[1.0]).unwrap();
        assert_eq!(l, std::f64::consts::LN_2);
        let l = bce_loss(&[0.0f64; 6], &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(l, std::f64::consts::LN_2);
    }

    #[test]
    fn large_logits_are_stable() {
        let l = bce_loss(&[20.0f64], &[1.0]).unwrap();
        let expect = (-20.0f64).exp().ln_1p();
        assert!((l - expect).abs() < 1e-24);
        assert!((l - 2.061_153_6e-9).abs() < 1e-16);
        assert!(bce_loss(&[1e4f64, -1e4], &[1.0, 0.0]).unwrap() == 0.0);
        assert!(bce_loss(&[-800.0f64], &[1.0]).unwrap().is_finite());
        assert!(bce_loss(&[100.0f32], &[0.0]).unwrap().is_finite());
    }

    #[test]
    fn separated_batches_approach_zero() {
        let mut last = f64::INFINITY;
        for m in [1.0, 5.0, 10.0, 30.0] {
            let l = bce_loss(&[m, -m], &[1.0, 0.0]).unwrap();
            assert!(l < last && l >= 0.0);
            last = l;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(bce_loss::<f64>(&[], &[]), Err(ModelError::EmptyBatch)));
        assert!(matches!(bce_loss(&[0.0f64], &[0.5]), Err(ModelError::BadLabel(_))));
        assert!(bce_loss(&[0.0f64, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn sigmoid_tails() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!(sigmoid(-1000.0f64) >= 0.0);
        assert_eq!(sigmoid(1000.0f64), 1.0);
    }
}
