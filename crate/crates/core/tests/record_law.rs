//! Brute-force oracle for the record-number law: enumerate every signed
//! permutation of fixed distinct magnitudes and count upper records of the
//! walk started at the origin.

use num_bigint::BigInt;
use num_rational::BigRational;
use rstat::null::exact_record_pmf;
use rstat::records::{count_records, Path};

/// Heap's algorithm over all orderings of `items`.
fn permutations(items: &mut Vec<f64>, k: usize, visit: &mut impl FnMut(&[f64])) {
    if k <= 1 {
        visit(items);
        return;
    }
    for i in 0..k - 1 {
        permutations(items, k - 1, visit);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
    permutations(items, k - 1, visit);
}

/// `counts[r - 1]` = number of signed orderings whose walk has `r` upper
/// records, the origin included. Magnitudes `2^k` keep all partial sums
/// distinct, so there are no ties.
fn enumerate(n: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n + 1];
    let mut mags: Vec<f64> = (0..n).map(|k| f64::from(1u32 << k)).collect();
    permutations(&mut mags, n, &mut |order| {
        for signs in 0u32..(1 << n) {
            let (mut pos, mut max, mut records) = (0.0, 0.0, 1usize);
            for (i, m) in order.iter().enumerate() {
                pos += if signs >> i & 1 == 1 { *m } else { -*m };
                if pos > max {
                    max = pos;
                    records += 1;
                }
            }
            counts[records - 1] += 1;
        }
    });
    counts
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[test]
fn enumeration_matches_exact_law() {
    for n in 1..=7 {
        let counts = enumerate(n);
        let total = factorial(n) << n;
        assert_eq!(counts.iter().sum::<u64>(), total);
        let exact = exact_record_pmf(n).unwrap().exact.unwrap();
        for (r, &c) in counts.iter().enumerate() {
            let observed = BigRational::new(BigInt::from(c), BigInt::from(total));
            assert_eq!(observed, exact[r], "n = {n}, R = {}", r + 1);
        }
    }
}

#[test]
fn library_counter_agrees_with_oracle_walks() {
    let n = 5;
    let mut mags: Vec<f64> = (0..n).map(|k| f64::from(1u32 << k)).collect();
    permutations(&mut mags, n, &mut |order| {
        for signs in 0u32..(1 << n) {
            let mut pts = Vec::with_capacity(n);
            let mut pos = 0.0;
            for (i, m) in order.iter().enumerate() {
                pos += if signs >> i & 1 == 1 { *m } else { -*m };
                pts.push(pos);
            }
            let path = Path::new(pts.clone()).unwrap().with_origin(0.0);
            let c = count_records(&path);
            let mut expected = 1;
            let mut max = 0.0;
            for p in &pts {
                if *p > max {
                    max = *p;
                    expected += 1;
                }
            }
            assert_eq!(c.r_plus as usize, expected);
            assert_eq!(c.ties, 0);
        }
    });
}

#[test]
fn small_cases_by_hand() {
    // n = 2: orderings of {1, 2} with signs; records 1: 3/8, 2: 3/8, 3: 1/4.
    assert_eq!(enumerate(2), vec![3, 3, 2]);
    assert_eq!(enumerate(1), vec![1, 1]);
}
