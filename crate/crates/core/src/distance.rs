use crate::error::{Error, Result};
use crate::types::FeatureVector;

pub fn euclidean_distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::dim(a.dim(), b.dim()));
    }
    Ok(squared_distance(a.values(), b.values()).sqrt())
}

/// Squared distance over equal-length slices. Callers guarantee the lengths.
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn known_distances() {
        assert_eq!(euclidean_distance(&fv(&[0.0, 0.0]), &fv(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&fv(&[0.0, 0.0]), &fv(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(
            euclidean_distance(&fv(&[1.0, 2.0, 3.0]), &fv(&[4.0, 6.0, 3.0])).unwrap(),
            5.0
        );
    }

    #[test]
    fn dimension_mismatch() {
        let err = euclidean_distance(&fv(&[0.0]), &fv(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn triangle_inequality(
            a in prop::collection::vec(-100.0f64..100.0, 4),
            b in prop::collection::vec(-100.0f64..100.0, 4),
            c in prop::collection::vec(-100.0f64..100.0, 4),
        ) {
            let (a, b, c) = (fv(&a), fv(&b), fv(&c));
            let ab = euclidean_distance(&a, &b).unwrap();
            let bc = euclidean_distance(&b, &c).unwrap();
            let ac = euclidean_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert_eq!(ab, euclidean_distance(&b, &a).unwrap());
        }
    }
}
