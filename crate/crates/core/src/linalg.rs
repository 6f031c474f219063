//! Dense complex matrix helpers: fast products, the matrix exponential and
//! Hermitian spectral utilities.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// `a * b` through the packed zgemm kernel. nalgebra's generic product is
/// several times slower for complex scalars.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // Complex64 is repr(C) { re, im }, layout-identical to [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMatrix) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Relative Frobenius distance between `a` and its adjoint.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    let norm = frobenius(a);
    if norm == 0.0 {
        return 0.0;
    }
    frobenius(&(a - a.adjoint())) / norm
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// True when every eigenvalue of the Hermitian part of `a` is above `-tol`.
/// A Cholesky factorisation of `H + tol*I` exists exactly in that case, which
/// is far cheaper than a full eigendecomposition.
pub fn is_psd_within(a: &CMatrix, tol: f64) -> bool {
    let mut h = hermitian_part(a);
    for i in 0..h.nrows() {
        h[(i, i)] += tol;
    }
    cholesky_succeeds(&h)
}

// nalgebra's complex Cholesky takes complex square roots and never reports
// failure, so the pivot sign test is done here.
fn cholesky_succeeds(h: &CMatrix) -> bool {
    let n = h.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(0.0)
}

/// Principal square root of a positive semidefinite matrix; negative
/// rounding-level eigenvalues are clipped to zero.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    matmul(&scaled, &vectors.adjoint())
}

/// Sum of singular values.
pub fn nuclear_norm(a: &CMatrix) -> f64 {
    SVD::new(a.clone(), false, false).singular_values.iter().sum()
}

// Padé coefficients and the theta_m thresholds for double precision from
// Higham, "The scaling and squaring method for the matrix exponential
// revisited" (2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
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
#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.539398330063230e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA13: f64 = 5.371920351148152;

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn solve_pade(u: CMatrix, v: CMatrix) -> CMatrix {
    let p = &v + &u;
    let q = &v - &u;
    q.lu().solve(&p).expect("Pade denominator is singular")
}

fn pade_low(a: &CMatrix, coeffs: &[f64]) -> CMatrix {
    let n = a.nrows();
    let a2 = matmul(a, a);
    let mut even = identity(n).scale(coeffs[0]);
    let mut odd = identity(n).scale(coeffs[1]);
    let mut power = identity(n);
    for k in 1..coeffs.len() / 2 {
        power = matmul(&power, &a2);
        even += power.scale(coeffs[2 * k]);
        odd += power.scale(coeffs[2 * k + 1]);
    }
    solve_pade(matmul(a, &odd), even)
}

fn pade13(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let b = &PADE13;
    let a2 = matmul(a, a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let id = identity(n);
    let inner_u = a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]);
    let u = matmul(&a6, &inner_u) + a6.scale(b[7]) + a4.scale(b[5]) + a2.scale(b[3]) + id.scale(b[1]);
    let u = matmul(a, &u);
    let inner_v = a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]);
    let v = matmul(&a6, &inner_v) + a6.scale(b[6]) + a4.scale(b[4]) + a2.scale(b[2]) + id.scale(b[0]);
    solve_pade(u, v)
}

/// Matrix exponential by scaling and squaring with a Padé approximant of
/// degree 3, 5, 7, 9 or 13 chosen from the 1-norm.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    match n {
        0 => return CMatrix::zeros(0, 0),
        1 => return CMatrix::from_element(1, 1, a[(0, 0)].exp()),
        _ => {}
    }
    let norm = one_norm(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(0.5f64.powi(s));
    let mut result = pade13(&scaled);
    for _ in 0..s {
        result = matmul(&result, &result);
    }
    result
}
