//! Exact rational oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Exact `min_c ‖x^γ - Σ cᵢ x^{γᵢ}‖₂²` from the normal equations.
pub fn projection_distance_sq(gamma: f64, others: &[f64]) -> f64 {
    let n = others.len();
    let one = BigRational::from_integer(BigInt::from(1));
    let entry = |a: f64, b: f64| one.clone() / (rat(a) + rat(b) + one.clone());
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n).map(|j| entry(others[i], others[j])).collect();
            row.push(entry(others[i], gamma));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("Gram matrix is nonsingular");
        m.swap(col, piv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone() / m[col][col].clone();
                for c in col..=n {
                    let v = f.clone() * m[col][c].clone();
                    m[r][c] -= v;
                }
            }
        }
    }
    let mut d2 = entry(gamma, gamma);
    for i in 0..n {
        let ci = m[i][n].clone() / m[i][i].clone();
        d2 -= ci * entry(others[i], gamma);
    }
    d2.to_f64().expect("representable")
}

pub fn exact_l2_sq(exps: &[f64], coeffs: &[f64]) -> f64 {
    let one = BigRational::from_integer(BigInt::from(1));
    let mut s = BigRational::zero();
    for (i, &a) in coeffs.iter().enumerate() {
        for (j, &b) in coeffs.iter().enumerate() {
            s += rat(a) * rat(b) / (rat(exps[i]) + rat(exps[j]) + one.clone());
        }
    }
    s.to_f64().expect("representable")
}
