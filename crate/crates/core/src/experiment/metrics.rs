use nalgebra::DVector;

use crate::error::{Error, Result};

/// Mean absolute percentage error over the state indices in `mask`:
/// `100/(nN) Σₖ Σᵢ |xᵢₖ − x̂ᵢₖ| / |xᵢₖ|`.
pub fn mape(truth: &[DVector<f64>], estimates: &[DVector<f64>], mask: &[usize]) -> Result<f64> {
    if truth.len() != estimates.len() {
        return Err(Error::DimensionMismatch {
            context: "mape sequence length",
            expected: truth.len(),
            actual: estimates.len(),
        });
    }
    if truth.is_empty() || mask.is_empty() {
        return Err(Error::InvalidConfig("mape needs at least one step and one index".into()));
    }
    let mut zeros = Vec::new();
    let mut total = 0.0;
    for (k, (x, xhat)) in truth.iter().zip(estimates).enumerate() {
        for &i in mask {
            if i >= x.len() || i >= xhat.len() {
                return Err(Error::DimensionMismatch {
                    context: "mape index",
                    expected: x.len().min(xhat.len()),
                    actual: i + 1,
                });
            }
            if x[i] == 0.0 {
                zeros.push((i, k));
            } else {
                total += ((x[i] - xhat[i]) / x[i]).abs();
            }
        }
    }
    if !zeros.is_empty() {
        return Err(Error::DivisionByZeroTruth(zeros));
    }
    Ok(100.0 * total / (mask.len() * truth.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(rows: &[&[f64]]) -> Vec<DVector<f64>> {
        rows.iter().map(|r| DVector::from_column_slice(r)).collect()
    }

    #[test]
    fn perfect_estimate() {
        let x = seq(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(mape(&x, &x, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn single_term() {
        let v = mape(&seq(&[&[100.0]]), &seq(&[&[90.0]]), &[0]).unwrap();
        assert!((v - 10.0).abs() < 1e-12);
    }

    #[test]
    fn two_steps() {
        let v = mape(&seq(&[&[100.0], &[200.0]]), &seq(&[&[110.0], &[180.0]]), &[0]).unwrap();
        assert!((v - 10.0).abs() < 1e-12);
    }

    #[test]
    fn mask_selects_indices() {
        let truth = seq(&[&[100.0, 10.0]]);
        let est = seq(&[&[100.0, 5.0]]);
        assert_eq!(mape(&truth, &est, &[0]).unwrap(), 0.0);
        assert!((mape(&truth, &est, &[1]).unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn zero_truth_is_reported() {
        let truth = seq(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let err = mape(&truth, &truth, &[0, 1]).unwrap_err();
        assert_eq!(err, Error::DivisionByZeroTruth(vec![(1, 0), (0, 1)]));
    }

    #[test]
    fn length_mismatch() {
        let a = seq(&[&[1.0]]);
        let b = seq(&[&[1.0], &[2.0]]);
        assert!(matches!(mape(&a, &b, &[0]), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn scale_invariant(
            rows in prop::collection::vec((1.0f64..100.0, -50.0f64..50.0), 1..20),
            c in 0.01f64..100.0,
        ) {
            let truth: Vec<_> = rows.iter().map(|(x, _)| DVector::from_element(1, *x)).collect();
            let est: Vec<_> = rows.iter().map(|(x, e)| DVector::from_element(1, x + e)).collect();
            let scaled = |v: &[DVector<f64>]| v.iter().map(|x| x * c).collect::<Vec<_>>();
            let a = mape(&truth, &est, &[0]).unwrap();
            let b = mape(&scaled(&truth), &scaled(&est), &[0]).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }
}
