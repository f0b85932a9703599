//! Small dense helpers shared by the engines.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity2() -> CMat {
    CMat::identity(2, 2)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// |0><1|, lowering towards the `+1` eigenstate of `sigma_z`.
pub fn sigma_minus() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
}

/// Paulis in the order I, X, Y, Z.
pub fn paulis() -> [CMat; 4] {
    [identity2(), sigma_x(), sigma_y(), sigma_z()]
}

/// Kronecker product over a list; the first factor is the most significant index.
pub fn kron_all(ops: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for op in ops {
        out = out.kronecker(op);
    }
    out
}

/// Embed a one-qubit operator on `site` of an `n`-qubit register where site `i`
/// is bit `i` of the basis index.
pub fn site_operator(op: &CMat, site: usize, n: usize) -> CMat {
    let ops: Vec<CMat> = (0..n)
        .rev()
        .map(|s| if s == site { op.clone() } else { identity2() })
        .collect();
    kron_all(&ops)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn hermitize(m: &mut CMat) {
    let h = (&*m + m.adjoint()) * c(0.5);
    *m = h;
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// exp(-i 2π h t) for Hermitian `h`.
pub fn unitary_step(h: &CMat, t: f64) -> CMat {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = CVec::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&e| C64::from_polar(1.0, -2.0 * std::f64::consts::PI * e * t)),
    );
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(c)
}

/// Pfaffian of a complex antisymmetric matrix by Parlett-Reid elimination with pivoting.
pub fn pfaffian(a: &CMat) -> C64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "pfaffian needs a square matrix");
    if n % 2 == 1 {
        return c(0.0);
    }
    let mut a = a.clone();
    let mut pf = c(1.0);
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for r in k + 2..n {
            let v = a[(r, k)].norm();
            if v > best {
                best = v;
                kp = r;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if a[(k + 1, k)] == c(0.0) {
            return c(0.0);
        }
        pf *= a[(k, k + 1)];
        if k + 2 < n {
            let piv = a[(k, k + 1)];
            let m = n - k - 2;
            let tau: Vec<C64> = (0..m).map(|j| a[(k, k + 2 + j)] / piv).collect();
            let col: Vec<C64> = (0..m).map(|j| a[(k + 2 + j, k + 1)]).collect();
            for r in 0..m {
                for s in 0..m {
                    a[(k + 2 + r, k + 2 + s)] += tau[r] * col[s] - col[r] * tau[s];
                }
            }
        }
        k += 2;
    }
    pf
}
