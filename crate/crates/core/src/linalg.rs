//! Dense linear-algebra helpers shared by the rest of the crate: the scalar
//! abstraction over real and complex fields, rank-revealing
//! orthonormalisation, operator norms and the matrix exponential.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

/// Directions whose Gram-Schmidt residual falls below this fraction of their
/// reference norm are treated as linearly dependent and dropped.
pub const DROP_TOL: f64 = 1e-10;

/// Scalar field of a state space: `f64` for real Hilbert spaces, `Complex64`
/// for complex ones. Inner products are conjugate-linear in the first slot.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const FIELD: FieldTag;

    fn lift(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Scalar for f64 {
    const FIELD: FieldTag = FieldTag::Real;
}

impl Scalar for Complex64 {
    const FIELD: FieldTag = FieldTag::Complex;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Real,
    Complex,
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn inner<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> T {
    a.dotc(b)
}

pub fn all_finite<T: Scalar>(v: &DVector<T>) -> bool {
    v.iter().all(|x| x.modulus().is_finite())
}

/// Orthonormalises `vectors` in order with twice-iterated modified
/// Gram-Schmidt. A vector is dropped when its residual is at most
/// `DROP_TOL * max(|v|, scale)`.
pub fn orthonormalize<'a, T, I>(vectors: I, scale: f64) -> Vec<DVector<T>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a DVector<T>>,
{
    let mut basis: Vec<DVector<T>> = Vec::new();
    for v in vectors {
        extend_orthonormal(&mut basis, v, scale);
    }
    basis
}

/// Appends the normalised component of `v` orthogonal to `basis`, unless it
/// is numerically dependent (see [`orthonormalize`]). Returns whether a
/// direction was added.
pub fn extend_orthonormal<T: Scalar>(basis: &mut Vec<DVector<T>>, v: &DVector<T>, scale: f64) -> bool {
    let reference = v.norm().max(scale);
    if reference == 0.0 {
        return false;
    }
    let mut w = v.clone();
    for _ in 0..2 {
        for q in basis.iter() {
            let c = inner(q, &w);
            w.axpy(-c, q, T::one());
        }
    }
    let r = w.norm();
    if r > DROP_TOL * reference && r.is_finite() {
        w.unscale_mut(r);
        basis.push(w);
        true
    } else {
        false
    }
}

/// Largest singular value.
pub fn sigma_max<T: Scalar>(m: &DMatrix<T>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc: f64, &s| acc.max(s))
}

/// Largest singular value by power iteration on `M^H M`; an independent route
/// to [`sigma_max`].
pub fn power_iteration_norm<T: Scalar>(m: &DMatrix<T>, max_iter: usize) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let n = m.ncols();
    // Deterministic start with no special alignment to coordinate axes.
    let mut v = DVector::from_fn(n, |i, _| T::lift(1.0 + 0.1 * ((i * 7 + 3) % 11) as f64));
    v.unscale_mut(v.norm());
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let w = m.ad_mul(&(m * &v));
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = w.unscale(norm);
        let converged = (next - estimate).abs() <= 1e-15 * next;
        estimate = next;
        if converged {
            break;
        }
    }
    (m * &v).norm()
}

/// Maximum absolute column sum.
pub fn one_norm<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entrywise deviation of the Gram matrix of `basis` from identity.
pub fn gram_deviation<T: Scalar>(basis: &[DVector<T>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((inner(a, b) - target).modulus());
        }
    }
    worst
}

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
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
const PADE_13: [f64; 14] = [
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

/// Matrix exponential by scaling and squaring with a diagonal Padé kernel
/// (degree chosen from the 1-norm, Higham 2005).
pub fn expm<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    for (m, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * T::lift(2f64.powi(-s));
    let mut r = pade_13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low<T: Scalar>(a: &DMatrix<T>, b: &[f64]) -> DMatrix<T> {
    let n = a.nrows();
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let mut power = ident.clone();
    let mut odd = DMatrix::<T>::zeros(n, n);
    let mut even = DMatrix::<T>::zeros(n, n);
    for j in 0..b.len() / 2 {
        odd += &power * T::lift(b[2 * j + 1]);
        even += &power * T::lift(b[2 * j]);
        power = &power * &a2;
    }
    let u = a * odd;
    solve_pade(&u, &even)
}

fn pade_13<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let b = |k: usize| T::lift(PADE_13[k]);
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = a * (&a6 * inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);
    solve_pade(&u, &v)
}

fn solve_pade<T: Scalar>(u: &DMatrix<T>, v: &DMatrix<T>) -> DMatrix<T> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn orthonormalize_drops_dependent_directions() {
        let a = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 2.0, 0.0]);
        let c = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let q = orthonormalize([&a, &b, &c], 0.0);
        assert_eq!(q.len(), 2);
        assert!(gram_deviation(&q) < 1e-15);
    }

    #[test]
    fn orthonormalize_complex() {
        let a = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let b = DVector::from_vec(vec![C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]);
        // b = i a, so they span the same complex line
        let q = orthonormalize([&a, &b], 0.0);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn expm_diagonal() {
        for scale in [1e-3, 0.3, 2.0, 40.0] {
            let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-scale, 0.5 * scale, 2.0 * scale]));
            let e = expm(&d);
            for i in 0..3 {
                let exact = d[(i, i)].exp();
                assert!((e[(i, i)] - exact).abs() <= 1e-13 * exact.max(1.0), "scale {scale}");
            }
        }
    }

    #[test]
    fn expm_rotation_generator() {
        for t in [0.01, 1.0, 7.5, 100.0] {
            let a = DMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
            let e = expm(&a);
            assert!((e[(0, 0)] - t.cos()).abs() < 1e-12);
            assert!((e[(0, 1)] - t.sin()).abs() < 1e-12);
            assert!((e[(1, 0)] + t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn expm_complex_phase() {
        let lam = [1.0, 9.0, 250.0];
        let a = DMatrix::from_diagonal(&DVector::from_iterator(3, lam.iter().map(|&l| C64::new(0.0, -l))));
        let e = expm(&a);
        for (i, &l) in lam.iter().enumerate() {
            assert!((e[(i, i)] - C64::new(0.0, -l).exp()).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_nilpotent_is_polynomial() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let e = expm(&a);
        let exact = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.5, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        assert!((e - exact).amax() < 1e-15);
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.3, 0.5, 1.5, -0.7, 0.1, 0.2, 3.0]);
        let a = sigma_max(&m);
        let b = power_iteration_norm(&m, 10_000);
        assert!((a - b).abs() <= 1e-8 * a);
    }
}
