//! Two-atom generator built directly from 4×4 operator algebra.

use cbs_core::atom::AtomDriveParams;
use cbs_core::linalg::{CMat, CVec, C64};
use nalgebra::DMatrix;

type Op = DMatrix<C64>;

fn z(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn single() -> [Op; 4] {
    // ground |1⟩ at index 0, excited |2⟩ at index 1
    let id = Op::identity(2, 2);
    let sm = Op::from_row_slice(2, 2, &[z(0., 0.), z(1., 0.), z(0., 0.), z(0., 0.)]);
    let sp = sm.transpose();
    let sz = &sp * &sm - &sm * &sp;
    [id, sm, sp, sz]
}

fn comm(a: &Op, b: &Op) -> Op {
    a * b - b * a
}

pub struct OperatorBasis {
    ops: Vec<Op>,
    solver: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Position of q₁ᵃ⊗q₂ᵇ in the 15-vector, `None` for I⊗I.
fn slot(a: usize, b: usize) -> Option<usize> {
    match (a, b) {
        (0, 0) => None,
        (0, k) => Some(k - 1),
        (k, 0) => Some(3 + k - 1),
        (i, j) => Some(6 + 3 * (i - 1) + (j - 1)),
    }
}

impl OperatorBasis {
    pub fn new() -> Self {
        let s = single();
        let mut ops = Vec::new();
        let mut cols = DMatrix::<C64>::zeros(16, 16);
        for a in 0..4 {
            for b in 0..4 {
                let o = s[a].kronecker(&s[b]);
                let k = 4 * a + b;
                for r in 0..16 {
                    cols[(r, k)] = o[(r / 4, r % 4)];
                }
                ops.push(o);
            }
        }
        OperatorBasis { ops, solver: cols.lu() }
    }

    fn expand(&self, x: &Op) -> Vec<C64> {
        let v = CVec::from_fn(16, |r, _| x[(r / 4, r % 4)]);
        self.solver.solve(&v).unwrap().iter().cloned().collect()
    }

    /// Matrix and free vector of the linear map Q ↦ F(Q) on expectation values.
    pub fn generator(&self, f: impl Fn(&Op) -> Op) -> (CMat, CVec) {
        let mut m = CMat::zeros(15, 15);
        let mut l = CVec::zeros(15);
        for a in 0..4 {
            for b in 0..4 {
                let Some(row) = slot(a, b) else { continue };
                let c = self.expand(&f(&self.ops[4 * a + b]));
                for a2 in 0..4 {
                    for b2 in 0..4 {
                        let k = c[4 * a2 + b2];
                        match slot(a2, b2) {
                            Some(col) => m[(row, col)] += k,
                            None => l[row] += k,
                        }
                    }
                }
            }
        }
        (m, l)
    }

    /// 15-vector of expectation values in the state ρ.
    pub fn expectations(&self, rho: &Op) -> CVec {
        let mut v = CVec::zeros(15);
        for a in 0..4 {
            for b in 0..4 {
                if let Some(k) = slot(a, b) {
                    v[k] = (rho * &self.ops[4 * a + b]).trace();
                }
            }
        }
        v
    }
}

pub struct TwoAtomOps {
    pub sm: [Op; 2],
    pub sp: [Op; 2],
}

pub fn two_atom_ops() -> TwoAtomOps {
    let s = single();
    let id = &s[0];
    TwoAtomOps {
        sm: [s[1].kronecker(id), id.kronecker(&s[1])],
        sp: [s[2].kronecker(id), id.kronecker(&s[2])],
    }
}

/// Free part A and free vector from the single-atom terms of the master equation.
pub fn free_generator(p1: &AtomDriveParams, p2: &AtomDriveParams) -> (CMat, CVec) {
    let b = OperatorBasis::new();
    let o = two_atom_ops();
    let ps = [p1, p2];
    b.generator(|q| {
        let mut out = Op::zeros(4, 4);
        for j in 0..2 {
            let p = ps[j];
            let om = p.rabi_complex();
            let (sm, sp) = (&o.sm[j], &o.sp[j]);
            let n = sp * sm;
            out += comm(&n, q) * z(0.0, -p.delta);
            out += comm(&(sp * om + sm * om.conj()), q) * z(0.0, -0.5);
            out -= (&n * q + q * &n - sp * q * sm * z(2.0, 0.0)) * z(p.gamma, 0.0);
        }
        out
    })
}

/// Interaction parts V₁₂, V₂₁, V₁₂*, V₂₁* and their free vectors.
pub fn interaction_generators(t: C64) -> [(CMat, CVec); 4] {
    let b = OperatorBasis::new();
    let o = two_atom_ops();
    let (sp, sm) = (&o.sp, &o.sm);
    [
        b.generator(|q| comm(&(&sp[0] * q), &sm[1]) * t),
        b.generator(|q| comm(&(&sp[1] * q), &sm[0]) * t),
        b.generator(|q| comm(&sp[0], &(q * &sm[1])) * t.conj()),
        b.generator(|q| comm(&sp[1], &(q * &sm[0])) * t.conj()),
    ]
}
