//! Dense integer polynomial helpers used by the cyclotomic and decomposition
//! code. Everything here is exact; divisions are only performed by monic
//! divisors so no rational arithmetic is ever needed.

use crate::error::{Error, Result};

/// Trim trailing zeros in place.
pub fn trim(v: &mut Vec<i128>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub fn degree(v: &[i128]) -> Option<usize> {
    v.iter().rposition(|&c| c != 0)
}

/// Multiply two dense polynomials.
pub fn mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = out[i + j]
                    .checked_add(x.checked_mul(y).expect("poly mul overflow"))
                    .expect("poly mul overflow");
            }
        }
    }
    out
}

/// Exact division by a monic divisor. Errors if the remainder is nonzero.
pub fn div_exact_monic(num: &[i128], den: &[i128]) -> Result<Vec<i128>> {
    let dd = degree(den).ok_or_else(|| Error::Malformed("division by zero polynomial".into()))?;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let mut rem: Vec<i128> = num.to_vec();
    let nd = match degree(&rem) {
        None => return Ok(Vec::new()),
        Some(d) => d,
    };
    if nd < dd {
        return Err(Error::Malformed("inexact polynomial division".into()));
    }
    let mut quo = vec![0i128; nd - dd + 1];
    for i in (dd..=nd).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        quo[i - dd] = c;
        for (j, &dc) in den.iter().enumerate().take(dd + 1) {
            if dc != 0 {
                rem[i - dd + j] -= c * dc;
            }
        }
    }
    if degree(&rem).is_some() {
        return Err(Error::Malformed("inexact polynomial division".into()));
    }
    trim(&mut quo);
    Ok(quo)
}

/// Remainder of `num` modulo a monic divisor, in place; returns the remainder
/// (degree < deg(den)).
pub fn rem_monic(num: &[i128], den: &[i128]) -> Vec<i128> {
    let dd = degree(den).expect("nonzero divisor");
    assert_eq!(den[dd], 1, "divisor must be monic");
    let mut rem: Vec<i128> = num.to_vec();
    let nd = match degree(&rem) {
        None => return Vec::new(),
        Some(d) => d,
    };
    if nd < dd {
        trim(&mut rem);
        return rem;
    }
    for i in (dd..=nd).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        for (j, &dc) in den.iter().enumerate().take(dd + 1) {
            if dc != 0 {
                rem[i - dd + j] -= c * dc;
            }
        }
    }
    rem.truncate(dd);
    trim(&mut rem);
    rem
}

/// Remainder modulo a monic *sparse* divisor given as (exponent, coeff)
/// pairs sorted ascending with the leading coefficient 1.
pub fn rem_sparse_monic(num: &mut Vec<i128>, den: &[(usize, i128)]) {
    let (dd, lead) = *den.last().expect("nonzero divisor");
    assert_eq!(lead, 1, "divisor must be monic");
    let nd = match degree(num) {
        None => return,
        Some(d) => d,
    };
    if nd < dd {
        return;
    }
    for i in (dd..=nd).rev() {
        let c = num[i];
        if c == 0 {
            continue;
        }
        for &(e, dc) in den {
            num[i - dd + e] = num[i - dd + e]
                .checked_sub(c.checked_mul(dc).expect("remainder overflow"))
                .expect("remainder overflow");
        }
    }
    num.truncate(dd);
}

/// `X^n - 1`.
pub fn x_pow_minus_one(n: usize) -> Vec<i128> {
    let mut v = vec![0i128; n + 1];
    v[0] = -1;
    v[n] = 1;
    v
}
