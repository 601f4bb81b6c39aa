//! Upper and lower records of cumulative-sum paths.
//!
//! A point of a path is an upper (lower) record when it is strictly above
//! (below) every earlier point. The first point is a record of both kinds.
//! Ties with the running extreme register nothing and are counted in
//! [`RecordCounts::ties`] instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty sequence of finite observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "sample value #{} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        Ok(Sample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn negated(&self) -> Sample {
        Sample(self.0.iter().map(|v| -v).collect())
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

impl TryFrom<&[f64]> for Sample {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Sample::new(values.to_vec())
    }
}

/// The ordered points `X_1, ..., X_T` of a walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Path(Vec<f64>);

impl Path {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("path is empty"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("path contains a non-finite point"));
        }
        Ok(Path(points))
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Prepend an origin point; used to view a sample as an N-step walk.
    pub fn with_origin(&self, origin: f64) -> Path {
        let mut points = Vec::with_capacity(self.0.len() + 1);
        points.push(origin);
        points.extend_from_slice(&self.0);
        Path(points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordCounts {
    pub r_plus: u32,
    pub r_minus: u32,
    pub r0: i32,
    /// Points equal to the running maximum or minimum (no record registered).
    pub ties: u32,
}

/// Running sums in left-to-right order.
pub fn cumulative_sum(sample: &Sample) -> Path {
    let mut acc = 0.0;
    Path(
        sample
            .values()
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect(),
    )
}

pub fn count_records(path: &Path) -> RecordCounts {
    count_points(path.points())
}

fn count_points(points: &[f64]) -> RecordCounts {
    let first = points[0];
    let (mut hi, mut lo) = (first, first);
    let (mut r_plus, mut r_minus, mut ties) = (1u32, 1u32, 0u32);
    for &p in &points[1..] {
        if p > hi {
            hi = p;
            r_plus += 1;
        } else if p < lo {
            lo = p;
            r_minus += 1;
        } else if p == hi || p == lo {
            ties += 1;
        }
    }
    RecordCounts {
        r_plus,
        r_minus,
        r0: r_plus as i32 - r_minus as i32,
        ties,
    }
}

/// Records of the cumulative sum of `increments`, without materialising the
/// path. Summation order and comparisons match
/// `count_records(&cumulative_sum(..))` exactly; callers guarantee a
/// non-empty slice.
#[inline]
pub(crate) fn records_of_increments(increments: &[f64]) -> RecordCounts {
    let mut acc = increments[0];
    let (mut hi, mut lo) = (acc, acc);
    let (mut r_plus, mut r_minus, mut ties) = (1u32, 1u32, 0u32);
    for &x in &increments[1..] {
        acc += x;
        if acc > hi {
            hi = acc;
            r_plus += 1;
        } else if acc < lo {
            lo = acc;
            r_minus += 1;
        } else if acc == hi || acc == lo {
            ties += 1;
        }
    }
    RecordCounts {
        r_plus,
        r_minus,
        r0: r_plus as i32 - r_minus as i32,
        ties,
    }
}

/// `R_0 = R_+ - R_-` of the sample's cumulative sum.
pub fn r0_of_sample(sample: &Sample) -> i32 {
    records_of_increments(sample.values()).r0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cumulative_sum_examples() {
        assert_eq!(cumulative_sum(&sample(&[1., 2., -1., 3.])).points(), &[1., 3., 2., 5.]);
        assert_eq!(cumulative_sum(&sample(&[0.5])).points(), &[0.5]);
        assert_eq!(cumulative_sum(&sample(&[1., -1., 1., -1.])).points(), &[1., 0., 1., 0.]);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(Sample::new(vec![]), Err(Error::InvalidInput(_))));
        assert!(matches!(Path::new(vec![]), Err(Error::InvalidInput(_))));
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn count_records_examples() {
        let c = count_records(&Path::new(vec![1., 3., 2., 5.]).unwrap());
        assert_eq!((c.r_plus, c.r_minus, c.r0), (3, 1, 2));

        let inc = Path::new((0..10).map(f64::from).collect()).unwrap();
        let c = count_records(&inc);
        assert_eq!((c.r_plus, c.r_minus, c.r0), (10, 1, 9));
    }

    #[test]
    fn r0_examples() {
        assert_eq!(r0_of_sample(&sample(&[1., 2., -1., 3.])), 2);
        assert_eq!(r0_of_sample(&sample(&[-1., -2., -3.])), -2);
        assert_eq!(r0_of_sample(&sample(&[1., 2., -1., 3.]).negated()), -2);
    }

    #[test]
    fn ties_register_no_record() {
        // 1, 3, 3 (tie with max), 1 (tie with min)
        let c = count_records(&Path::new(vec![1., 3., 3., 1.]).unwrap());
        assert_eq!((c.r_plus, c.r_minus, c.ties), (2, 1, 2));
        let c = count_records(&Path::new(vec![0., 0., 0.]).unwrap());
        assert_eq!((c.r_plus, c.r_minus, c.r0, c.ties), (1, 1, 0, 2));
    }

    #[test]
    fn origin_is_prepended() {
        let p = Path::new(vec![1., 2.]).unwrap().with_origin(0.0);
        assert_eq!(p.points(), &[0., 1., 2.]);
        assert_eq!(count_records(&p).r_plus, 3);
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e6f64..1e6
    }

    proptest! {
        #[test]
        fn fast_path_matches_definition(v in prop::collection::vec(finite(), 1..200)) {
            let s = Sample::new(v).unwrap();
            prop_assert_eq!(records_of_increments(s.values()), count_records(&cumulative_sum(&s)));
        }

        #[test]
        fn negation_swaps_records(v in prop::collection::vec(finite(), 1..200)) {
            let s = Sample::new(v).unwrap();
            let a = count_records(&cumulative_sum(&s));
            let b = count_records(&cumulative_sum(&s.negated()));
            prop_assert_eq!((a.r_plus, a.r_minus), (b.r_minus, b.r_plus));
            prop_assert_eq!(r0_of_sample(&s), -r0_of_sample(&s.negated()));
        }

        #[test]
        fn power_of_two_scaling_is_exact(v in prop::collection::vec(finite(), 1..200), k in -20i32..20) {
            // Powers of two rescale every partial sum exactly, so even
            // floating-point order relations are preserved.
            let c = 2f64.powi(k);
            let s = Sample::new(v.clone()).unwrap();
            let t = Sample::new(v.iter().map(|x| x * c).collect()).unwrap();
            prop_assert_eq!(count_records(&cumulative_sum(&s)), count_records(&cumulative_sum(&t)));
        }

        #[test]
        fn scaling_preserves_records_on_integer_data(v in prop::collection::vec(-1000i32..1000, 1..100), c in 1u32..1000) {
            let s = Sample::new(v.iter().map(|&x| f64::from(x)).collect()).unwrap();
            let t = Sample::new(v.iter().map(|&x| f64::from(x) * f64::from(c)).collect()).unwrap();
            prop_assert_eq!(count_records(&cumulative_sum(&s)), count_records(&cumulative_sum(&t)));
        }

        #[test]
        fn bounds_hold(v in prop::collection::vec(finite(), 1..200)) {
            let n = v.len() as u32;
            let strictly_increasing = cumulative_sum(&Sample::new(v.clone()).unwrap())
                .points().windows(2).all(|w| w[1] > w[0]);
            let c = count_records(&cumulative_sum(&Sample::new(v).unwrap()));
            prop_assert!(c.r_plus >= 1 && c.r_plus <= n);
            prop_assert!(c.r_minus >= 1 && c.r_minus <= n);
            prop_assert!(c.r_plus + c.r_minus <= n + 1);
            prop_assert_eq!(c.r0, c.r_plus as i32 - c.r_minus as i32);
            prop_assert!(c.r0.unsigned_abs() < n.max(1));
            prop_assert_eq!(c.r_plus == n, strictly_increasing);
        }

        #[test]
        fn appending_running_max_adds_no_record(v in prop::collection::vec(finite(), 1..100)) {
            let p = cumulative_sum(&Sample::new(v).unwrap());
            let max = p.points().iter().cloned().fold(f64::MIN, f64::max);
            let mut extended = p.points().to_vec();
            extended.push(max);
            let a = count_records(&p);
            let b = count_records(&Path::new(extended).unwrap());
            prop_assert_eq!(a.r_plus, b.r_plus);
            prop_assert_eq!(b.ties, a.ties + 1);
        }
    }
}
