//! Small dense complex algebra: 3×3 spectral decompositions, Green matrices,
//! Kronecker products and dense solves.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{CbsError, Result};

pub type C64 = Complex64;
pub type Mat3 = Matrix3<C64>;
pub type Vec3 = Vector3<C64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Relative root separation below which roots are treated as a cluster.
pub const CLUSTER_TOL: f64 = 1e-3;
/// Minimal distance between an evaluation point and a pole.
pub const POLE_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Eigenvalues λ_k with the Newton-form coefficients
/// N₀ = I, N₁ = M − λ₁, N₂ = (M − λ₁)(M − λ₂), so that
/// G(z) = Σ_j N_j / Π_{k≤j}(z − λ_k) for any 3×3 matrix, defective or not.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: [C64; 3],
    pub newton: [Mat3; 3],
    pub matrix: Mat3,
}

/// Coefficients (c0, c1, c2) of det(λ − M) = λ³ + c2 λ² + c1 λ + c0.
pub fn characteristic_coefficients(m: &Mat3) -> [C64; 3] {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    [-m.determinant(), minors, -tr]
}

fn cubic_eval(coef: &[C64; 3], x: C64) -> (C64, C64) {
    let f = ((x + coef[2]) * x + coef[1]) * x + coef[0];
    let df = (3.0 * x + 2.0 * coef[2]) * x + coef[1];
    (f, df)
}

/// Roots of the monic cubic λ³ + c2 λ² + c1 λ + c0. Well separated roots are
/// Newton polished.
pub fn cubic_roots(coef: &[C64; 3]) -> [C64; 3] {
    let [c0, c1, c2] = *coef;
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < (-q / 2.0 - disc).norm() {
        u3 = -q / 2.0 - disc;
    }
    let omega = c(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [ZERO; 3];
    if u3.norm() == 0.0 {
        roots = [ZERO; 3];
    } else {
        let u = u3.powf(1.0 / 3.0);
        let mut uk = u;
        for r in roots.iter_mut() {
            *r = uk - p / (3.0 * uk);
            uk *= omega;
        }
    }
    for r in roots.iter_mut() {
        *r -= shift;
    }
    // Close roots are ill-conditioned individually, but their symmetric
    // functions are not; polishing them one by one would spoil the latter,
    // which the Newton form of the resolvent relies on.
    let close = |a: C64, b: C64| (a - b).norm() < CLUSTER_TOL * (1.0 + a.norm());
    let sep = |k: usize| (0..3).filter(|&j| j != k).all(|j| !close(roots[k], roots[j]));
    let isolated: Vec<usize> = (0..3).filter(|&k| sep(k)).collect();
    match isolated.len() {
        3 => {
            for r in roots.iter_mut() {
                newton_polish(coef, r);
            }
            roots
        }
        1 => {
            let mut r3 = roots[isolated[0]];
            newton_polish(coef, &mut r3);
            let b = coef[2] + r3;
            let cq = coef[1] + r3 * b;
            let d = (b * b - 4.0 * cq).sqrt();
            let q1 = if (-b + d).norm() >= (-b - d).norm() { (-b + d) / 2.0 } else { (-b - d) / 2.0 };
            let q2 = if q1.norm() > 0.0 { cq / q1 } else { ZERO };
            [r3, q1, q2]
        }
        _ => roots,
    }
}

fn newton_polish(coef: &[C64; 3], r: &mut C64) {
    for _ in 0..4 {
        let (f, df) = cubic_eval(coef, *r);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        *r -= step;
        if step.norm() <= 1e-16 * (1.0 + r.norm()) {
            break;
        }
    }
}

fn check_finite(m: &Mat3) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(CbsError::Input("non-finite matrix entry".into()))
    }
}

/// Eigenvalues from the characteristic polynomial and the Newton form of
/// the resolvent.
pub fn eigen_decompose(m: &Mat3) -> Result<SpectralDecomposition> {
    check_finite(m)?;
    let lam = cubic_roots(&characteristic_coefficients(m));
    let id = Mat3::identity();
    let n1 = m - id * lam[0];
    let n2 = n1 * (m - id * lam[1]);
    Ok(SpectralDecomposition {
        eigenvalues: lam,
        newton: [id, n1, n2],
        matrix: *m,
    })
}

impl SpectralDecomposition {
    /// Decomposition of conj(M).
    pub fn conj(&self) -> Self {
        SpectralDecomposition {
            eigenvalues: self.eigenvalues.map(|l| l.conj()),
            newton: self.newton.map(|p| p.map(|z| z.conj())),
            matrix: self.matrix.map(|z| z.conj()),
        }
    }

    /// Spectral projectors P_k = Π_{j≠k}(M − λ_j)/(λ_k − λ_j); `None` when two
    /// eigenvalues are closer than `min_gap`.
    pub fn projectors(&self, min_gap: f64) -> Option<[Mat3; 3]> {
        let l = self.eigenvalues;
        let id = Mat3::identity();
        let mut out = [Mat3::zeros(); 3];
        for k in 0..3 {
            let mut p = id;
            for j in (0..3).filter(|&j| j != k) {
                let gap = l[k] - l[j];
                if gap.norm() < min_gap {
                    return None;
                }
                p = p * (self.matrix - id * l[j]) / gap;
            }
            out[k] = p;
        }
        Some(out)
    }

    pub fn pole_distance(&self, z: C64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| (z - l).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// G(z) = (z − M)^{-1} from the Newton form.
pub fn green(decomp: &SpectralDecomposition, z: C64) -> Result<Mat3> {
    let dist = decomp.pole_distance(z);
    if dist < POLE_TOL {
        return Err(CbsError::PoleProximity {
            z: format!("{z}"),
            dist,
        });
    }
    let mut g = Mat3::zeros();
    let mut den = ONE;
    for k in 0..3 {
        den *= z - decomp.eigenvalues[k];
        g += decomp.newton[k] / den;
    }
    Ok(g)
}

/// (z − M)^{-1} by dense cofactor inversion.
pub fn green_direct(m: &Mat3, z: C64) -> Result<Mat3> {
    (Mat3::identity() * z - m)
        .try_inverse()
        .ok_or_else(|| CbsError::Solve("singular z − M".into()))
}

/// Kronecker product; entry (i₁·rows(B) + i₂, j₁·cols(B) + j₂) = A[i₁,j₁]·B[i₂,j₂].
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of two 3-vectors; component (i, j) sits at index 3i + j.
pub fn kron3(a: &Vec3, b: &Vec3) -> CVec {
    CVec::from_fn(9, |k, _| a[k / 3] * b[k % 3])
}

pub fn to_dyn(m: &Mat3) -> CMat {
    CMat::from_fn(3, 3, |i, j| m[(i, j)])
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn solve(a: &CMat, b: &CVec) -> Result<CVec> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| CbsError::Solve("singular matrix".into()))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    a.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| CbsError::Solve("singular matrix".into()))
}
