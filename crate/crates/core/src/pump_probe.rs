//! Single atom under bichromatic classical driving: the laser plus a weak
//! probe detuned by ω from it.
//!
//! In the frame rotating at ω_L the Bloch generator is
//! M + v₊e^{−iωt}Δ⁻ + v₋e^{iωt}Δ⁺. Periodic quantities are stored as
//! harmonics x(t) = Σ_n x_n e^{−inωt}. Two-time correlations follow from the
//! quantum regression theorem with the same harmonic generator; the
//! coefficient of each δ-function in C(ω₁, ω₂) comes out of the stationary
//! harmonic structure directly.

use std::f64::consts::PI;

use crate::atom::{bloch_matrix, delta_minus, delta_plus, drive_vector, AtomDriveParams};
use crate::error::{CbsError, Result};
use crate::linalg::{CMat, CVec, Mat3, Vec3, C64, ZERO, POLE_TOL};

/// Default harmonic truncation for the perturbative solver.
pub const DEFAULT_HARMONICS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BichromaticDrive {
    pub params: AtomDriveParams,
    /// Probe amplitudes in Rabi-frequency units.
    pub v_plus: C64,
    pub v_minus: C64,
    /// Probe detuning from the laser, units of γ.
    pub omega: f64,
}

impl BichromaticDrive {
    pub fn new(params: AtomDriveParams, omega: f64) -> Self {
        BichromaticDrive { params, v_plus: ZERO, v_minus: ZERO, omega }
    }

    pub fn with_probes(self, v_plus: C64, v_minus: C64) -> Self {
        BichromaticDrive { v_plus, v_minus, ..self }
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.omega.is_finite() || ![self.v_plus, self.v_minus].iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(CbsError::Input("non-finite probe settings".into()));
        }
        Ok(())
    }
}

/// Perturbative order in (v₊, v₋).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Zero,
    Plus,
    Minus,
    Mixed,
}

impl Order {
    pub const ALL: [Order; 4] = [Order::Zero, Order::Plus, Order::Minus, Order::Mixed];

    fn index(self) -> usize {
        self as usize
    }

    /// Harmonic carried by this order.
    pub fn harmonic(self) -> i64 {
        match self {
            Order::Zero | Order::Mixed => 0,
            Order::Plus => 1,
            Order::Minus => -1,
        }
    }

    fn amplitude(self, d: &BichromaticDrive) -> C64 {
        match self {
            Order::Zero => C64::new(1.0, 0.0),
            Order::Plus => d.v_plus,
            Order::Minus => d.v_minus,
            Order::Mixed => d.v_plus * d.v_minus,
        }
    }
}

/// Harmonic vectors indexed n = −N..=N.
#[derive(Clone, Debug, PartialEq)]
pub struct Harmonics {
    pub n_max: usize,
    pub v: Vec<Vec3>,
}

impl Harmonics {
    fn zeros(n_max: usize) -> Self {
        Harmonics { n_max, v: vec![Vec3::zeros(); 2 * n_max + 1] }
    }

    pub fn get(&self, n: i64) -> Vec3 {
        if n.unsigned_abs() as usize > self.n_max {
            Vec3::zeros()
        } else {
            self.v[(n + self.n_max as i64) as usize]
        }
    }

    fn set(&mut self, n: i64, x: Vec3) {
        self.v[(n + self.n_max as i64) as usize] = x;
    }

    fn range(&self) -> impl Iterator<Item = i64> {
        let n = self.n_max as i64;
        -n..=n
    }

    fn scale(&self, c: C64) -> Harmonics {
        Harmonics { n_max: self.n_max, v: self.v.iter().map(|a| a * c).collect() }
    }

    fn boundary_norm(&self) -> f64 {
        self.v[0].norm().max(self.v[2 * self.n_max].norm())
    }

    fn max_norm(&self) -> f64 {
        self.v.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// Stationary Bloch-vector harmonics by perturbative order, each multiplied
/// by its monomial v₊^p v₋^q.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicState {
    pub orders: [Harmonics; 4],
}

impl HarmonicState {
    pub fn order(&self, o: Order) -> &Harmonics {
        &self.orders[o.index()]
    }
}

/// Coefficient set of a quantity expanded to first order in v₊ and in v₋.
#[derive(Clone, Debug)]
struct Series([Harmonics; 4]);

impl Series {
    fn zeros(n_max: usize) -> Self {
        Series(std::array::from_fn(|_| Harmonics::zeros(n_max)))
    }
}

#[derive(Clone, Debug)]
struct Engine {
    m: Mat3,
    dm: Mat3,
    dp: Mat3,
    omega: f64,
    n_max: usize,
}

impl Engine {
    fn new(d: &BichromaticDrive, n_max: usize) -> Result<Self> {
        d.validate()?;
        if n_max < 2 {
            return Err(CbsError::Input("harmonic truncation must be at least 2".into()));
        }
        Ok(Engine { m: bloch_matrix(&d.params), dm: delta_minus(), dp: delta_plus(), omega: d.omega, n_max })
    }

    /// (z − inω − M)^{-1} r.
    fn resolve(&self, z: C64, n: i64, r: &Vec3) -> Result<Vec3> {
        let zz = z - C64::new(0.0, n as f64 * self.omega);
        let inv = (Mat3::identity() * zz - self.m).try_inverse();
        match inv {
            Some(g) if g.norm() < 1.0 / POLE_TOL => Ok(g * r),
            g => Err(CbsError::PoleProximity {
                z: format!("{zz}"),
                dist: g.map_or(0.0, |g| 1.0 / g.norm()),
            }),
        }
    }

    /// Order-by-order solution of (z − inω − M)x_n = s_n + Δ⁻x_{n−1} + Δ⁺x_{n+1}
    /// with unit probe amplitudes.
    fn solve_series(&self, z: C64, src: &Series) -> Result<Series> {
        let mut out = Series::zeros(self.n_max);
        for o in Order::ALL {
            let mut h = Harmonics::zeros(self.n_max);
            for n in h.range() {
                let mut r = src.0[o.index()].get(n);
                if matches!(o, Order::Plus | Order::Mixed) {
                    let lower = if o == Order::Plus { Order::Zero } else { Order::Minus };
                    r += self.dm * out.0[lower.index()].get(n - 1);
                }
                if matches!(o, Order::Minus | Order::Mixed) {
                    let lower = if o == Order::Minus { Order::Zero } else { Order::Plus };
                    r += self.dp * out.0[lower.index()].get(n + 1);
                }
                if r.norm() > 0.0 {
                    h.set(n, self.resolve(z, n, &r)?);
                }
            }
            out.0[o.index()] = h;
        }
        for h in &out.0 {
            if h.boundary_norm() > 1e-13 * h.max_norm().max(1e-300) {
                return Err(CbsError::Solve("harmonic truncation insufficient".into()));
            }
        }
        Ok(out)
    }

    fn means(&self) -> Result<Series> {
        let mut src = Series::zeros(self.n_max);
        src.0[0].set(0, drive_vector());
        self.solve_series(ZERO, &src)
    }
}

/// Truncated product of two expanded scalars/vectors, harmonic convolution.
fn product(a: &Series, ia: usize, b: &Series, n_max: usize) -> Series {
    // component ia of a times the full vector b
    let mut out = Series::zeros(n_max);
    let pairs: [(usize, usize, usize); 9] = [
        (0, 0, 0),
        (1, 0, 1),
        (1, 1, 0),
        (2, 0, 2),
        (2, 2, 0),
        (3, 0, 3),
        (3, 3, 0),
        (3, 1, 2),
        (3, 2, 1),
    ];
    for (o, p, q) in pairs {
        let (x, y) = (&a.0[p], &b.0[q]);
        let mut h = out.0[o].clone();
        for n in h.range() {
            let mut acc = h.get(n);
            for k in x.range() {
                let s = x.get(k)[ia];
                if s != ZERO {
                    acc += y.get(n - k) * s;
                }
            }
            h.set(n, acc);
        }
        out.0[o] = h;
    }
    out
}

/// Regression sources: U = ⟨σ⃗σ⁻⟩ − ⟨σ⃗⟩⟨σ⁻⟩ and W = ⟨σ⁺σ⃗⟩ − ⟨σ⁺⟩⟨σ⃗⟩.
fn regression_sources(s: &Series, n_max: usize) -> (Series, Series) {
    let pu = product(s, 0, s, n_max);
    let pw = product(s, 1, s, n_max);
    let mut u = Series::zeros(n_max);
    let mut w = Series::zeros(n_max);
    for o in 0..4 {
        let mut hu = Harmonics::zeros(n_max);
        let mut hw = Harmonics::zeros(n_max);
        for n in hu.range() {
            let x = s.0[o].get(n);
            let one = if o == 0 && n == 0 { 1.0 } else { 0.0 };
            let pop = (x[2] + one) * 0.5;
            hu.set(n, Vec3::new(ZERO, pop, -x[0]) - pu.0[o].get(n));
            hw.set(n, Vec3::new(pop, ZERO, -x[1]) - pw.0[o].get(n));
        }
        u.0[o] = hu;
        w.0[o] = hw;
    }
    (u, w)
}

/// Stationary harmonic components of the Bloch vector up to order (1,1).
pub fn harmonic_solve(drive: &BichromaticDrive, n_max: usize) -> Result<HarmonicState> {
    let e = Engine::new(drive, n_max)?;
    let s = e.means()?;
    Ok(HarmonicState {
        orders: std::array::from_fn(|k| s.0[k].scale(Order::ALL[k].amplitude(drive))),
    })
}

/// δ-function coefficients of C(ω₁, ω₂) for a bichromatic drive.
#[derive(Clone, Debug)]
pub struct CorrelationSolver {
    engine: Engine,
    u: Series,
    w: Series,
}

impl CorrelationSolver {
    pub fn new(params: AtomDriveParams, omega: f64) -> Result<Self> {
        Self::with_harmonics(params, omega, DEFAULT_HARMONICS)
    }

    pub fn with_harmonics(params: AtomDriveParams, omega: f64, n_max: usize) -> Result<Self> {
        let engine = Engine::new(&BichromaticDrive::new(params, omega), n_max)?;
        let s = engine.means()?;
        let (u, w) = regression_sources(&s, n_max);
        Ok(CorrelationSolver { engine, u, w })
    }

    /// Coefficient of δ(ω₂ − ω₁ − nω) in ∂^{p+q}C/∂v₊^p∂v₋^q at v = 0,
    /// with n = p − q, as a function of ω₁.
    pub fn coefficient(&self, order: Order, omega1: f64) -> Result<C64> {
        let n = order.harmonic();
        let omega2 = omega1 + n as f64 * self.engine.omega;
        let x = self.engine.solve_series(C64::new(0.0, omega2), &self.u)?;
        let y = self.engine.solve_series(C64::new(0.0, -omega1), &self.w)?;
        let k = order.index();
        Ok(x.0[k].get(n)[1] + y.0[k].get(n)[0])
    }

    /// Mollow density in the library normalization (integral ⟨σ⁺σ⁻⟩ − |⟨σ⁻⟩|²).
    pub fn p0(&self, nu: f64) -> Result<f64> {
        Ok(self.coefficient(Order::Zero, nu)?.re / (2.0 * PI))
    }

    /// P^(+)(ω, ν) from the δ(ω₁ − ω₂ − ω) coefficient of ∂C/∂v₋ at ω₁ = ν.
    pub fn p_plus(&self, nu: f64) -> Result<C64> {
        self.coefficient(Order::Minus, nu)
    }

    /// P^(−)(ω, ν) from the δ(ω₂ − ω₁ − ω) coefficient of ∂C/∂v₊ at ω₂ = ν.
    pub fn p_minus(&self, nu: f64) -> Result<C64> {
        self.coefficient(Order::Plus, nu - self.engine.omega)
    }

    /// P^(2)(ω, ν) from the δ(ω₁ − ω₂) coefficient of ∂²C/∂v₊∂v₋ at ω₁ = ν.
    pub fn p2(&self, nu: f64) -> Result<f64> {
        Ok(self.coefficient(Order::Mixed, nu)?.re)
    }
}

/// Nonperturbative periodic solution at finite probe amplitudes, used as an
/// oracle through finite differences.
pub mod floquet {
    use super::*;

    fn block_system(d: &BichromaticDrive, n_max: usize, z: C64) -> CMat {
        let m = bloch_matrix(&d.params);
        let (dm, dp) = (delta_minus(), delta_plus());
        let dim = 3 * (2 * n_max + 1);
        let mut a = CMat::zeros(dim, dim);
        let nn = n_max as i64;
        for n in -nn..=nn {
            let r = 3 * (n + nn) as usize;
            let zz = z - C64::new(0.0, n as f64 * d.omega);
            for i in 0..3 {
                a[(r + i, r + i)] += zz;
                for j in 0..3 {
                    a[(r + i, r + j)] -= m[(i, j)];
                    if n > -nn {
                        a[(r + i, r - 3 + j)] -= d.v_plus * dm[(i, j)];
                    }
                    if n < nn {
                        a[(r + i, r + 3 + j)] -= d.v_minus * dp[(i, j)];
                    }
                }
            }
        }
        a
    }

    fn solve_blocks(d: &BichromaticDrive, n_max: usize, z: C64, src: &Harmonics) -> Result<Harmonics> {
        let a = block_system(d, n_max, z);
        let b = CVec::from_iterator(a.nrows(), src.v.iter().flat_map(|x| x.iter().copied()));
        let x = crate::linalg::solve(&a, &b)?;
        Ok(Harmonics { n_max, v: (0..2 * n_max + 1).map(|k| Vec3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2])).collect() })
    }

    fn conv(a: &Harmonics, ia: usize, b: &Harmonics) -> Harmonics {
        let mut out = Harmonics::zeros(a.n_max);
        for n in out.range() {
            let mut acc = Vec3::zeros();
            for k in a.range() {
                acc += b.get(n - k) * a.get(k)[ia];
            }
            out.set(n, acc);
        }
        out
    }

    /// Periodic Bloch-vector harmonics at finite v₊, v₋.
    pub fn means(d: &BichromaticDrive, n_max: usize) -> Result<Harmonics> {
        d.validate()?;
        let mut src = Harmonics::zeros(n_max);
        src.set(0, drive_vector());
        solve_blocks(d, n_max, ZERO, &src)
    }

    /// Coefficient of δ(ω₂ − ω₁ − nω) in C(ω₁, ω₂) at finite probe amplitudes.
    pub fn coefficient(d: &BichromaticDrive, n_max: usize, n: i64, omega1: f64) -> Result<C64> {
        let s = means(d, n_max)?;
        let (pu, pw) = (conv(&s, 0, &s), conv(&s, 1, &s));
        let mut u = Harmonics::zeros(n_max);
        let mut w = Harmonics::zeros(n_max);
        for k in s.range() {
            let x = s.get(k);
            let pop = (x[2] + if k == 0 { 1.0 } else { 0.0 }) * 0.5;
            u.set(k, Vec3::new(ZERO, pop, -x[0]) - pu.get(k));
            w.set(k, Vec3::new(pop, ZERO, -x[1]) - pw.get(k));
        }
        let omega2 = omega1 + n as f64 * d.omega;
        let x = solve_blocks(d, n_max, C64::new(0.0, omega2), &u)?;
        let y = solve_blocks(d, n_max, C64::new(0.0, -omega1), &w)?;
        Ok(x.get(n)[1] + y.get(n)[0])
    }

    /// Central-difference derivative of the δ coefficient with respect to
    /// the probe amplitudes at step h: `order` selects ∂/∂v₊, ∂/∂v₋ or
    /// ∂²/∂v₊∂v₋.
    pub fn derivative(params: AtomDriveParams, omega: f64, order: Order, omega1: f64, h: f64, n_max: usize) -> Result<C64> {
        let base = BichromaticDrive::new(params, omega);
        let n = order.harmonic();
        let at = |vp: f64, vm: f64| coefficient(&base.with_probes(C64::new(vp, 0.0), C64::new(vm, 0.0)), n_max, n, omega1);
        Ok(match order {
            Order::Zero => at(0.0, 0.0)?,
            Order::Plus => (at(h, 0.0)? - at(-h, 0.0)?) / (2.0 * h),
            Order::Minus => (at(0.0, h)? - at(0.0, -h)?) / (2.0 * h),
            Order::Mixed => (at(h, h)? - at(h, -h)? - at(-h, h)? + at(-h, -h)?) / (4.0 * h * h),
        })
    }
}

/// Maximal deviation of each pump-probe function from its closed form for
/// one parameter set, relative to the largest closed-form magnitude over the
/// grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceRow {
    pub params: AtomDriveParams,
    pub omega_p: f64,
    pub p0: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub p2: f64,
}

impl EquivalenceRow {
    pub fn max(&self) -> f64 {
        self.p0.max(self.p_plus).max(self.p_minus).max(self.p2)
    }
}

fn rel_dev(pairs: &[(C64, C64)]) -> f64 {
    let scale = pairs.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    let dev = pairs.iter().map(|p| (p.0 - p.1).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        dev
    } else {
        dev / scale
    }
}

/// Pump-probe versus closed forms over a ν grid at probe detuning ω′.
pub fn equivalence_row(params: AtomDriveParams, omega_p: f64, nus: &[f64]) -> Result<EquivalenceRow> {
    use crate::atom::BlochSystem;
    let sys = BlochSystem::build(params)?;
    let pp = CorrelationSolver::new(params, omega_p)?;
    let mut p0 = Vec::with_capacity(nus.len());
    let mut pl = Vec::with_capacity(nus.len());
    let mut pm = Vec::with_capacity(nus.len());
    let mut p2 = Vec::with_capacity(nus.len());
    let re = |x: f64| C64::new(x, 0.0);
    for &nu in nus {
        p0.push((re(pp.p0(nu)?), re(sys.mollow_p0(nu)?)));
        pl.push((pp.p_plus(nu)?, sys.p_plus(omega_p, nu)?));
        pm.push((pp.p_minus(nu)?, sys.p_minus(omega_p, nu)?));
        p2.push((re(pp.p2(nu)?), re(sys.p2(omega_p, nu)?)));
    }
    Ok(EquivalenceRow {
        params,
        omega_p,
        p0: rel_dev(&p0),
        p_plus: rel_dev(&pl),
        p_minus: rel_dev(&pm),
        p2: rel_dev(&p2),
    })
}

/// Equivalence rows over a parameter grid, evaluated in parallel.
pub fn equivalence_report(
    rabis: &[f64],
    detunings: &[f64],
    omegas: &[f64],
    nus: &[f64],
) -> Result<Vec<EquivalenceRow>> {
    use rayon::prelude::*;
    let mut jobs = Vec::new();
    for &r in rabis {
        for &d in detunings {
            for &w in omegas {
                jobs.push((AtomDriveParams::new(r, d), w));
            }
        }
    }
    jobs.par_iter().map(|(p, w)| equivalence_row(*p, *w, nus)).collect()
}

/// First-order responses (G(−iω)Δ⁻GL, G(iω)Δ⁺GL) read off the harmonic solve.
fn first_responses(params: AtomDriveParams, omega: f64) -> Result<(Vec3, Vec3)> {
    let one = C64::new(1.0, 0.0);
    let s = harmonic_solve(&BichromaticDrive::new(params, omega).with_probes(one, one), DEFAULT_HARMONICS)?;
    Ok((s.order(Order::Plus).get(1), s.order(Order::Minus).get(-1)))
}

/// Inelastic ladder and crossed densities at ν assembled from bichromatic
/// solver output only. The ω′ convolutions are done by adaptive quadrature
/// to relative tolerance `rel`.
pub fn inelastic_densities(params: AtomDriveParams, nu: f64, rel: f64) -> Result<(f64, f64)> {
    use crate::integrals::quad;
    let s = harmonic_solve(&BichromaticDrive::new(params, nu), DEFAULT_HARMONICS)?.order(Order::Zero).get(0);
    let (sm, sp) = (s[0], s[1]);
    let (dm_f, dp_f) = first_responses(params, nu)?;
    let (dm_mf, dp_mf) = first_responses(params, -nu)?;
    let at_zero = CorrelationSolver::new(params, 0.0)?;
    let at_nu = CorrelationSolver::new(params, nu)?;
    let window = params.rabi / params.gamma + 20.0;

    let conv_l = quad::real_line(
        |w| {
            let pp = CorrelationSolver::new(params, w)?;
            Ok(C64::new(2.0 * PI * pp.p0(w)? * pp.p2(nu)?, 0.0))
        },
        window,
        1e-15,
        rel,
    )?;
    let pair = dm_mf[1] * dp_mf[0] + dp_f[1] * dm_f[0];
    let ladder = conv_l + sp * sm * at_zero.p2(nu)? + pair * (2.0 * PI * at_nu.p0(nu)?);

    let conv_c = quad::real_line(
        |w| Ok(CorrelationSolver::new(params, w)?.p_plus(nu)? * CorrelationSolver::new(params, nu - w)?.p_minus(nu)?),
        window,
        1e-15,
        rel,
    )?;
    let crossed = conv_c + sp * dm_f[0] * at_zero.p_plus(nu)? + sm * dp_f[1] * at_zero.p_minus(nu)?;
    Ok((ladder.re / (2.0 * PI), crossed.re / (2.0 * PI)))
}

/// ∫L_inel dν and ∫C_inel dν over the real line from [`inelastic_densities`].
pub fn inelastic_totals(params: AtomDriveParams, rel: f64) -> Result<(f64, f64)> {
    use crate::integrals::quad;
    let window = params.rabi / params.gamma + 6.0;
    let v = quad::real_line(
        |nu| inelastic_densities(params, nu, 0.1 * rel).map(|(l, c)| C64::new(l, c)),
        window,
        1e-14,
        rel,
    )?;
    Ok((v.re * 2.0 * PI, v.im * 2.0 * PI))
}
