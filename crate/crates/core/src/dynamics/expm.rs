//! Padé scaling-and-squaring exponential (Higham 2005).

use ndarray::Array2;
use ndarray_linalg::{FactorizeInto, Solve};
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::linalg::{identity, norm_one};
use crate::superop::{CMatrix, SuperOperator};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn lincomb(terms: &[(f64, &CMatrix)], n: usize) -> CMatrix {
    let mut out = Array2::zeros((n, n));
    for (c, m) in terms {
        if *c != 0.0 {
            out.scaled_add(C64::new(*c, 0.0), *m);
        }
    }
    out
}

/// `(V − U)⁻¹ (V + U)` by LU solves, column by column.
fn pade_quotient(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let n = u.nrows();
    let p = v + u;
    let q = v - u;
    let lu = q.factorize_into()?;
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        let col = lu.solve(&p.column(j).to_owned())?;
        out.column_mut(j).assign(&col);
    }
    Ok(out)
}

fn pade_low(a: &CMatrix, b: &[f64]) -> Result<CMatrix> {
    let n = a.nrows();
    let ident = identity(n);
    let a2 = a.dot(a);
    // powers A^0, A^2, A^4, ...
    let mut even = vec![ident.clone(), a2.clone()];
    while even.len() < b.len().div_ceil(2) {
        let next = even.last().expect("nonempty").dot(&a2);
        even.push(next);
    }
    let mut odd = Array2::zeros((n, n));
    let mut v = Array2::zeros((n, n));
    for (k, pow) in even.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            odd.scaled_add(C64::new(b[2 * k + 1], 0.0), pow);
        }
        v.scaled_add(C64::new(b[2 * k], 0.0), pow);
    }
    let u = a.dot(&odd);
    pade_quotient(&u, &v)
}

fn pade_13(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let b = &B13;
    let ident = identity(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let outer_u = lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)], n);
    let u = a.dot(&(a6.dot(&inner_u) + outer_u));
    let inner_v = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let outer_v = lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)], n);
    let v = a6.dot(&inner_v) + outer_v;
    pade_quotient(&u, &v)
}

/// Dense matrix exponential.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let norm = norm_one(a);
    if norm == 0.0 {
        return Ok(identity(n));
    }
    for (m, theta) in THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, b);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a.mapv(|z| z / 2f64.powi(s));
    let mut r = pade_13(&scaled)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// `exp(s·t)`.
pub fn superop_exp(s: &SuperOperator, t: f64) -> Result<SuperOperator> {
    let scaled = s.matrix().mapv(|z| z * t);
    SuperOperator::from_matrix(expm(&scaled)?, s.hilbert_dim())
}
