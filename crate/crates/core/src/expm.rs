//! Matrix exponential by scaling and squaring with Padé approximants
//! (Higham's degree selection, up to degree 13).

use nalgebra::DMatrix;
use num_complex::Complex64;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
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

type CMat = DMatrix<Complex64>;

pub fn one_norm(a: &CMat) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(a: &CMat, s: f64) -> CMat {
    a.map(|z| z * s)
}

/// U and V for the low-degree approximants, from even powers of A.
fn low_degree(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let a2 = a * a;
    let mut u = CMat::identity(n, n) * Complex64::from(b[1]);
    let mut v = CMat::identity(n, n) * Complex64::from(b[0]);
    let mut power = CMat::identity(n, n);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u += scaled(&power, b[2 * k + 1]);
        v += scaled(&power, b[2 * k]);
    }
    (a * u, v)
}

fn degree_13(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let b = &B13;
    let id = CMat::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]));
    let u = a * (inner_u + scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]) + scaled(&id, b[1]));
    let inner_v = &a6 * (scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]));
    let v = inner_v + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&id, b[0]);
    (u, v)
}

/// exp(A). Non-finite entries in the result signal overflow.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return CMat::from_element(n, n, Complex64::new(f64::NAN, f64::NAN));
    }
    for (m, theta) in THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_ratio(low_degree(a, b));
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let a = scaled(a, 0.5f64.powi(s));
    let mut r = pade_ratio(degree_13(&a));
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_ratio((u, v): (CMat, CMat)) -> CMat {
    let p = &v + &u;
    let q = &v - &u;
    let n = p.nrows();
    q.lu()
        .solve(&p)
        .unwrap_or_else(|| CMat::from_element(n, n, Complex64::new(f64::NAN, f64::NAN)))
}
