//! Fixed-step fourth-order Runge–Kutta for complex linear ODEs.

use std::f64::consts::PI;

use cbs_core::atom::{delta_minus, delta_plus, BlochSystem};
use cbs_core::linalg::{CVec, Vec3, C64};

/// Integrates dx/dt = f(t, x) from `t0` over `steps` steps of size `h`.
pub fn rk4(mut f: impl FnMut(f64, &CVec) -> CVec, x0: &CVec, t0: f64, h: f64, steps: usize) -> CVec {
    let mut x = x0.clone();
    let mut t = t0;
    for _ in 0..steps {
        let k1 = f(t, &x);
        let k2 = f(t + h / 2.0, &(&x + &k1 * C64::new(h / 2.0, 0.0)));
        let k3 = f(t + h / 2.0, &(&x + &k2 * C64::new(h / 2.0, 0.0)));
        let k4 = f(t + h, &(&x + &k3 * C64::new(h, 0.0)));
        x += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        t += h;
    }
    x
}

/// Trajectory sampled after every step.
pub fn rk4_path(mut f: impl FnMut(f64, &CVec) -> CVec, x0: &CVec, t0: f64, h: f64, steps: usize) -> Vec<CVec> {
    let mut out = Vec::with_capacity(steps);
    let mut x = x0.clone();
    let mut t = t0;
    for _ in 0..steps {
        x = rk4(&mut f, &x, t, h, 1);
        t += h;
        out.push(x.clone());
    }
    out
}

pub fn dyn3(v: &Vec3) -> CVec {
    CVec::from_column_slice(v.as_slice())
}

/// Harmonic `n` (coefficient of e^{−inωt}) of the Bloch vector under
/// M + vp e^{−iωt}Δ⁻ + vm e^{iωt}Δ⁺, by time integration.
pub fn driven_harmonic(s: &BlochSystem, omega: f64, vp: f64, vm: f64, n: i32) -> Vec3 {
    let (m, dm, dp, l) = (s.m, delta_minus(), delta_plus(), s.l);
    let f = |t: f64, x: &CVec| {
        let mt = m + dm * C64::from_polar(vp, -omega * t) + dp * C64::from_polar(vm, omega * t);
        let y = mt * Vec3::new(x[0], x[1], x[2]) + l;
        dyn3(&y)
    };
    let period = 2.0 * PI / omega;
    let per = 400;
    let h = period / per as f64;
    let settle = (40.0 / period).ceil() as usize * per;
    let x0 = dyn3(&s.steady_state());
    let mut x = rk4(f, &x0, 0.0, h, settle);
    let mut t = settle as f64 * h;
    let mut acc = Vec3::zeros();
    for _ in 0..per {
        let v = Vec3::new(x[0], x[1], x[2]);
        acc += v * C64::from_polar(1.0, n as f64 * omega * t);
        x = rk4(f, &x, t, h, 1);
        t += h;
    }
    acc.map(|x| x / per as f64)
}
