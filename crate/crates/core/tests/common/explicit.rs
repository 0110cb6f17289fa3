//! Explicit low-order formulas for the two-atom problem, written out
//! independently of the library's recurrences.

use std::f64::consts::PI;

use cbs_core::atom::{AtomDriveParams, BlochSystem};
use cbs_core::linalg::{CMat, CVec, Mat3, Vec3, C64};
use cbs_core::two_atom::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_params, rng, z};

pub const I: C64 = C64::new(0.0, 1.0);

pub fn dm() -> Mat3 {
    Mat3::new(
        z(0.0, 0.0), z(0.0, 0.0), z(0.0, -0.5),
        z(0.0, 0.0), z(0.0, 0.0), z(0.0, 0.0),
        z(0.0, 0.0), z(0.0, 1.0), z(0.0, 0.0),
    )
}

pub fn dp() -> Mat3 {
    Mat3::new(
        z(0.0, 0.0), z(0.0, 0.0), z(0.0, 0.0),
        z(0.0, 0.0), z(0.0, 0.0), z(0.0, 0.5),
        z(0.0, -1.0), z(0.0, 0.0), z(0.0, 0.0),
    )
}

pub fn n1() -> Vec3 {
    Vec3::new(z(0.5, 0.0), z(0.0, 0.0), z(0.0, 0.0))
}

pub fn n2() -> Vec3 {
    Vec3::new(z(0.0, 0.0), z(0.5, 0.0), z(0.0, 0.0))
}

pub fn lvec() -> Vec3 {
    Vec3::new(z(0.0, 0.0), z(0.0, 0.0), z(-2.0, 0.0))
}

pub fn kr(a: &Vec3, b: &Vec3) -> CVec {
    CVec::from_fn(9, |k, _| a[k / 3] * b[k % 3])
}

pub fn rvec(r: &mut ChaCha8Rng) -> Vec3 {
    Vec3::from_fn(|_, _| z(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

pub fn stack(x2: &Vec3, x1: &Vec3, y: &CVec) -> CVec {
    let mut q = CVec::zeros(DIM);
    for k in 0..3 {
        q[k] = x2[k];
        q[3 + k] = x1[k];
    }
    q.rows_mut(6, 9).copy_from(y);
    q
}

pub fn seg(q: &CVec, off: usize) -> Vec3 {
    Vec3::new(q[off], q[off + 1], q[off + 2])
}

pub fn rel_vec(a: &CVec, b: &CVec) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn random_pair(r: &mut ChaCha8Rng) -> (AtomDriveParams, AtomDriveParams) {
    let (o, d) = random_params(r);
    let p = AtomDriveParams::new(o, d);
    (p.with_phase(r.random_range(0.0..2.0 * PI)), p.with_phase(r.random_range(0.0..2.0 * PI)))
}

/// Generator whose exchange terms follow the reference block rules with coupling `t`.
pub fn reference_sign(p1: AtomDriveParams, p2: AtomDriveParams, t: C64) -> TwoAtomGenerator {
    TwoAtomGenerator::with_coupling(p1, p2, t * EXCHANGE_SIGN).unwrap()
}

/// Reference action of V_p on the probe pair: x-part from a₁⊗a₂ and
/// y-part from (a₂, a₁) and a₁⊗a₂.
pub fn reference_rule(p: Process, t: C64, a1: &Vec3, a2: &Vec3) -> CVec {
    let tc = t.conj();
    let zero = Vec3::zeros();
    let (x2, x1, y) = match p {
        Process::P12 => (
            dp() * a2 * (2.0 * I * t * a1[1]),
            zero,
            kr(&(dm() * a1), &(dp() * a2)) * (-2.0 * t) + kr(&n1(), &(dp() * a2 * (2.0 * I * t))),
        ),
        Process::P21 => (
            zero,
            dp() * a1 * (2.0 * I * t * a2[1]),
            kr(&(dp() * a1), &(dm() * a2)) * (-2.0 * t) + kr(&(dp() * a1 * (2.0 * I * t)), &n1()),
        ),
        Process::P12c => (
            zero,
            dm() * a1 * (-2.0 * I * tc * a2[0]),
            kr(&(dm() * a1), &(dp() * a2)) * (-2.0 * tc) + kr(&(dm() * a1 * (-2.0 * I * tc)), &n2()),
        ),
        Process::P21c => (
            dm() * a2 * (-2.0 * I * tc * a1[0]),
            zero,
            kr(&(dp() * a1), &(dm() * a2)) * (-2.0 * tc) + kr(&n2(), &(dm() * a2 * (-2.0 * I * tc))),
        ),
    };
    stack(&x2, &x1, &y)
}

pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub struct Pieces {
    pub g1: Mat3,
    pub g2: Mat3,
    pub g1l: Vec3,
    pub g2l: Vec3,
    /// ∫dω′/2π G₁(iω′)⊗G₂(−iω′) by dense inversion.
    pub gx: CMat,
}

impl Pieces {
    pub fn new(p1: AtomDriveParams, p2: AtomDriveParams) -> Self {
        let (s1, s2) = (BlochSystem::build(p1).unwrap(), BlochSystem::build(p2).unwrap());
        let id = CMat::identity(3, 3);
        let d = |m: &Mat3| CMat::from_fn(3, 3, |i, j| m[(i, j)]);
        let mx = d(&s1.m).kronecker(&id) + id.kronecker(&d(&s2.m));
        Pieces {
            g1: s1.g(),
            g2: s2.g(),
            g1l: s1.steady_state(),
            g2l: s2.steady_state(),
            gx: -mx.try_inverse().unwrap(),
        }
    }

    /// G⃗⁽⁰⁾_{j;1}, G⃗⁽⁰⁾_{j;2}.
    pub fn gvec(gl: &Vec3) -> (Vec3, Vec3) {
        (
            dp() * gl * (-I) + n2() - gl * gl[0],
            dm() * gl * I + n1() - gl * gl[1],
        )
    }

    pub fn pair(&self, a: &Vec3, b: &Vec3) -> CVec {
        &self.gx * kr(a, b)
    }
}

/// Largest relative deviation of the block actions from the reference rules.
pub fn block_identity_dev(seed: u64, draws: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (p1, p2) = random_pair(&mut r);
        let t = z(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let g = reference_sign(p1, p2, t);
        let (a1, a2) = (rvec(&mut r), rvec(&mut r));
        let probe = stack(&a2, &a1, &kr(&a1, &a2));
        for p in Process::ALL {
            let want = reference_rule(p, t, &a1, &a2);
            let scale = 1.0 + want.norm();
            worst = worst.max((g.apply_process(p, &probe) - &want).norm() / scale);
            worst = worst.max((g.v(p) * &probe - &want).norm() / scale);
        }
    }
    worst
}

/// First-order Bloch vectors against their explicit form.
pub fn first_order_bloch_dev(seed: u64, draws: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (p1, p2) = random_pair(&mut r);
        let t = coupling(r.random_range(10.0..100.0));
        let o = reference_sign(p1, p2, t).perturbative_orders().unwrap();
        let (s1, s2) = (BlochSystem::build(p1).unwrap(), BlochSystem::build(p2).unwrap());
        let (g1l, g2l) = (s1.g() * lvec(), s2.g() * lvec());
        let (g1, g2) = (s1.g(), s2.g());
        let cases = [
            (Process::P12, 0, g2 * dp() * g2l * (2.0 * I * t * g1l[1])),
            (Process::P21c, 0, g2 * dm() * g2l * (-2.0 * I * t.conj() * g1l[0])),
            (Process::P21, 3, g1 * dp() * g1l * (2.0 * I * t * g2l[1])),
            (Process::P12c, 3, g1 * dm() * g1l * (-2.0 * I * t.conj() * g2l[0])),
        ];
        for (p, off, want) in cases {
            worst = worst.max((seg(&o.o1[p.index()], off) - want).norm() / want.norm());
        }
    }
    worst
}

/// First-order correlations against their explicit form. Returns the
/// deviation with the integral pairing G₁(iω′)⊗G₂(−iω′) in the last line
/// and, second, the deviation of that line in its literal form.
pub fn first_order_correlation_dev(seed: u64, draws: usize) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut worst, mut literal): (f64, f64) = (0.0, 0.0);
    for _ in 0..draws {
        let (p1, p2) = random_pair(&mut r);
        let t = coupling(r.random_range(10.0..100.0));
        let o = reference_sign(p1, p2, t).perturbative_orders().unwrap();
        let y = |p: Process| o.o1[p.index()].rows(6, 9).into_owned();
        let k = Pieces::new(p1, p2);
        let (g11, g12) = Pieces::gvec(&k.g1l);
        let (g21, g22) = Pieces::gvec(&k.g2l);
        let tc = t.conj();
        let l21c = (kr(&k.g1l, &(k.g2 * dm() * k.g2l)) * k.g1l[0] + k.pair(&g11, &(dm() * k.g2l))) * (-2.0 * I * tc);
        let l12 = (kr(&k.g1l, &(k.g2 * dp() * k.g2l)) * k.g1l[1] + k.pair(&g12, &(dp() * k.g2l))) * (2.0 * I * t);
        let l21 = (kr(&(k.g1 * dp() * k.g1l), &k.g2l) * k.g2l[1] + k.pair(&(dp() * k.g1l), &g22)) * (2.0 * I * t);
        let first = kr(&(k.g1 * dm() * k.g1l), &k.g2l) * k.g2l[0] * (-2.0 * I * tc);
        let l12c = &first + k.pair(&(dm() * k.g1l), &g21) * (-2.0 * I * tc);
        for (p, want) in [(Process::P21c, &l21c), (Process::P12, &l12), (Process::P21, &l21), (Process::P12c, &l12c)] {
            worst = worst.max(rel_vec(&y(p), want));
        }
        // in the literal form both Green factors of the last line have poles in the
        // same half plane, so its integral vanishes
        literal = literal.max(rel_vec(&y(Process::P12c), &first));
    }
    (worst, literal)
}

/// Second-order |T|² Bloch vectors against their explicit form.
pub fn second_order_bloch_dev(seed: u64, draws: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (p1, p2) = random_pair(&mut r);
        let t = coupling(r.random_range(10.0..100.0));
        let o = reference_sign(p1, p2, t).perturbative_orders().unwrap();
        let pair = |p: Process, q: Process| {
            let v = if p == q {
                o.o2[p.index()][p.index()].clone()
            } else {
                &o.o2[p.index()][q.index()] + &o.o2[q.index()][p.index()]
            };
            seg(&v, 0)
        };
        let k = Pieces::new(p1, p2);
        let (g11, g12) = Pieces::gvec(&k.g1l);
        let (g21, g22) = Pieces::gvec(&k.g2l);
        let t2 = z(4.0 * t.norm_sqr(), 0.0);
        let (g2, g2l, g1l) = (k.g2, k.g2l, k.g1l);
        // ∫(G₁(∓iω′)a)_c G₂(±iω′)b, as an atom-2 vector
        let integ = |a: &Vec3, c: usize, b: &Vec3| {
            let v = k.pair(a, b);
            Vec3::new(v[3 * c], v[3 * c + 1], v[3 * c + 2])
        };
        let ab = (g2 * dm() * g2 * dp() * g2l + g2 * dp() * g2 * dm() * g2l) * (g1l[1] * g1l[0])
            + g2 * dm() * integ(&g12, 0, &(dp() * g2l))
            + g2 * dp() * integ(&g11, 1, &(dm() * g2l));
        let aa = g2 * dp() * g2l * (g2l[0] * (k.g1 * dm() * g1l)[1]) + g2 * dp() * integ(&(dm() * g1l), 1, &g21);
        let dd = g2 * dm() * g2l * (g2l[1] * (k.g1 * dp() * g1l)[0]) + g2 * dm() * integ(&(dp() * g1l), 0, &g22);
        for (p, q, want) in [
            (Process::P12, Process::P21c, ab * t2),
            (Process::P12, Process::P12c, aa * t2),
            (Process::P21, Process::P21c, dd * t2),
        ] {
            worst = worst.max((pair(p, q) - want).norm() / want.norm());
        }
    }
    worst
}

/// Displaced-atom phase relations, as max |a − b|/(1 + |b|).
pub fn phase_relation_dev(seed: u64, draws: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (o, d) = random_params(&mut r);
        let kr_j = r.random_range(-50.0..50.0);
        let sj = BlochSystem::build(AtomDriveParams::new(o, d).with_phase(kr_j)).unwrap();
        let s0 = BlochSystem::build(AtomDriveParams::new(o, d)).unwrap();
        let zz = I * r.random_range(-5.0..5.0);
        let ph = |k: f64| C64::from_polar(1.0, k * kr_j);
        let (lj, l0) = (sj.steady_state(), s0.steady_state());
        let (gj, g0) = (sj.green(zz).unwrap(), s0.green(zz).unwrap());
        let mut dev = |a: C64, b: C64| worst = worst.max((a - b).norm() / (1.0 + b.norm()));
        dev(lj[0], l0[0] * ph(1.0));
        dev(lj[1], l0[1] * ph(-1.0));
        let (a, b) = (gj * dp() * lj, g0 * dp() * l0);
        dev(a[0], b[0] * ph(2.0));
        dev(a[1], b[1]);
        let (a, b) = (gj * dm() * lj, g0 * dm() * l0);
        dev(a[0], b[0]);
        dev(a[1], b[1] * ph(-2.0));
        let (a, b) = (sj.g() * dm() * gj * dp() * lj, s0.g() * dm() * g0 * dp() * l0);
        dev(a[0], b[0] * ph(1.0));
        dev(a[1], b[1] * ph(-1.0));
        let (a, b) = (sj.g() * dp() * gj * dm() * lj, s0.g() * dp() * g0 * dm() * l0);
        dev(a[0], b[0] * ph(1.0));
        dev(a[1], b[1] * ph(-1.0));
    }
    worst
}

/// Log-log slope of the steady-state remainder beyond second order against |T|.
pub fn remainder_exponent() -> f64 {
    let p = AtomDriveParams::new(2.0, 0.5);
    let (mut lt, mut lr) = (vec![], vec![]);
    for x in [1e2, 1e3, 1e4] {
        let g = TwoAtomGenerator::with_coupling(p.with_phase(0.4), p.with_phase(2.0), coupling(x)).unwrap();
        let o = g.perturbative_orders().unwrap();
        let rem = g.exact_steady_state().unwrap() - &o.o0 - o.first() - o.second();
        lt.push(coupling(x).norm().ln());
        lr.push(rem.norm().ln());
    }
    slope(&lt, &lr)
}
