//! Cantor pairing and its right-nested iteration.
//!
//! `pair2(x, y) = (x+y)(x+y+1)/2 + y`, which walks the diagonals
//! `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...` and is strictly
//! increasing in both coordinates. Tuples of arity n are coded by
//! nesting on the right: `⟨a,b,c⟩ = pair2(a, pair2(b, c))`.

use super::PcfError;

/// Cantor code of the pair (x, y).
pub fn pair2(x: u64, y: u64) -> u64 {
    let s = x as u128 + y as u128;
    let code = s * (s + 1) / 2 + y as u128;
    debug_assert!(code <= u64::MAX as u128, "pair2 overflow");
    code as u64
}

/// Checked variant used where inputs may be adversarial.
pub fn pair2_checked(x: u64, y: u64) -> Result<u64, PcfError> {
    let s = x as u128 + y as u128;
    let code = s * (s + 1) / 2 + y as u128;
    if code > u64::MAX as u128 {
        return Err(PcfError::Overflow);
    }
    Ok(code as u64)
}

/// Inverse of [`pair2`].
pub fn unpair2(code: u64) -> (u64, u64) {
    // Largest d with d(d+1)/2 <= code, via integer sqrt then correction.
    let c = code as u128;
    let mut d = (((8.0 * code as f64 + 1.0).sqrt() - 1.0) / 2.0) as u128;
    while d * (d + 1) / 2 > c {
        d -= 1;
    }
    while (d + 1) * (d + 2) / 2 <= c {
        d += 1;
    }
    let y = c - d * (d + 1) / 2;
    ((d - y) as u64, y as u64)
}

/// Right-nested code of a non-empty tuple.
pub fn pair(xs: &[u64]) -> Result<u64, PcfError> {
    match xs {
        [] => Err(PcfError::EmptyTuple),
        [x] => Ok(*x),
        [x, rest @ ..] => Ok(pair2(*x, pair(rest)?)),
    }
}

/// Decode a code back into a tuple of the given arity.
pub fn tuple_decode(code: u64, arity: usize) -> Vec<u64> {
    assert!(arity >= 1, "arity must be positive");
    let mut out = Vec::with_capacity(arity);
    let mut rest = code;
    for _ in 0..arity - 1 {
        let (x, r) = unpair2(rest);
        out.push(x);
        rest = r;
    }
    out.push(rest);
    out
}

/// Coordinate projection: `project(i, pair(xs), n) = xs[i]`.
pub fn project(i: usize, code: u64, arity: usize) -> u64 {
    tuple_decode(code, arity)[i]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_case() {
        assert_eq!(pair(&[0, 0]).unwrap(), 0);
    }

    #[test]
    fn coordinate_monotonicity() {
        assert!(pair(&[1, 2]).unwrap() > pair(&[1, 1]).unwrap());
        assert!(pair(&[2, 1]).unwrap() > pair(&[1, 1]).unwrap());
    }

    /// Independent oracle: enumerate pairs in Cantor diagonal order and
    /// read off the index of (1, 2).
    #[test]
    fn pair_1_2_matches_diagonal_enumeration() {
        let mut index = 0u64;
        let mut found = None;
        'outer: for d in 0..10u64 {
            for y in 0..=d {
                let x = d - y;
                if (x, y) == (1, 2) {
                    found = Some(index);
                    break 'outer;
                }
                index += 1;
            }
        }
        assert_eq!(pair(&[1, 2]).unwrap(), found.unwrap());
        assert_eq!(pair(&[1, 2]).unwrap(), 8);
    }

    #[test]
    fn empty_tuple_is_an_error() {
        assert_eq!(pair(&[]), Err(PcfError::EmptyTuple));
    }

    /// Round-trip on the box required by the module contract: all tuples
    /// with entries < 64 for arities 2, 3, 4.
    #[test]
    fn roundtrip_box() {
        for arity in 2..=4usize {
            let mut tuple = vec![0u64; arity];
            loop {
                let code = pair(&tuple).unwrap();
                assert_eq!(tuple_decode(code, arity), tuple);
                // odometer increment
                let mut k = 0;
                loop {
                    tuple[k] += 1;
                    if tuple[k] < 64 {
                        break;
                    }
                    tuple[k] = 0;
                    k += 1;
                    if k == arity {
                        break;
                    }
                }
                if k == arity {
                    break;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn unpair_is_left_inverse(code in 0u64..1_000_000_000) {
            let (x, y) = unpair2(code);
            prop_assert_eq!(pair2(x, y), code);
        }

        #[test]
        fn pair_is_injective_ish(x in 0u64..40_000, y in 0u64..40_000) {
            prop_assert_eq!(unpair2(pair2(x, y)), (x, y));
        }
    }
}
