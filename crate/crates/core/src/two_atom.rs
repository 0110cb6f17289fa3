//! Two laser-driven atoms coupled by far-field dipole-dipole exchange.
//!
//! The 15-vector is ordered (σ⃗₂, σ⃗₁, σ⃗₁⊗σ⃗₂) with σ⃗ = (σ⁻, σ⁺, σᶻ); the
//! product block stores ⟨σ₁ⁱσ₂ʲ⟩ at 6 + 3i + j. Positions are in units of
//! 1/k_L, frequencies in units of γ.

use std::array;
use std::sync::Arc;

use crate::atom::{delta_minus, delta_plus, drive_vector, n1, n2, AtomDriveParams, BlochSystem};
use crate::error::{CbsError, Result};
use crate::integrals::{Freq, GreenBuilder, VecExpr};
use crate::linalg::{green, inverse, kron, solve, to_dyn, CMat, CVec, Mat3, Vec3, C64, I, ZERO};

pub const DIM: usize = 15;
/// Index of σ₂⁻ in the 15-vector.
pub const CH_LADDER: usize = 0;
/// Index of σ₁⁻ in the 15-vector.
pub const CH_CROSSED: usize = 3;

/// Overall sign multiplying the block action rules: with it the rules
/// reproduce T σ_j⁺[Q, σ_k⁻] + T* [σ_j⁺, Q] σ_k⁻ entry by entry. Second-order
/// quantities are even in it.
pub const EXCHANGE_SIGN: f64 = -1.0;

/// T(x) = i(3/2)e^{−ix}/x in units of γ.
pub fn coupling(x: f64) -> C64 {
    I * 1.5 * C64::from_polar(1.0, -x) / x
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringConfig {
    pub r1: [f64; 3],
    pub r2: [f64; 3],
    /// Unit vector along k_L.
    pub k_dir: [f64; 3],
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl ScatteringConfig {
    pub fn new(r1: [f64; 3], r2: [f64; 3], k_dir: [f64; 3]) -> Result<Self> {
        let kn = dot(&k_dir, &k_dir).sqrt();
        if !(kn > 0.0) || !kn.is_finite() || r1.iter().chain(&r2).any(|v| !v.is_finite()) {
            return Err(CbsError::Config("non-finite positions or zero wave vector".into()));
        }
        let cfg = ScatteringConfig { r1, r2, k_dir: k_dir.map(|v| v / kn) };
        if !(cfg.x() > 0.0) {
            return Err(CbsError::Config("atoms must be at distinct positions".into()));
        }
        Ok(cfg)
    }

    /// Atom 2 at the origin, atom 1 at distance x along `axis`.
    pub fn from_separation(x: f64, axis: [f64; 3], k_dir: [f64; 3]) -> Result<Self> {
        let n = dot(&axis, &axis).sqrt();
        if !(x > 0.0) || !(n > 0.0) {
            return Err(CbsError::Config(format!("invalid separation {x}")));
        }
        Self::new(axis.map(|a| a * x / n), [0.0; 3], k_dir)
    }

    pub fn translated(&self, d: [f64; 3]) -> Self {
        let sh = |r: [f64; 3]| [r[0] + d[0], r[1] + d[1], r[2] + d[2]];
        ScatteringConfig { r1: sh(self.r1), r2: sh(self.r2), ..*self }
    }

    /// Dimensionless distance x = k|r₁ − r₂|.
    pub fn x(&self) -> f64 {
        let d = [self.r1[0] - self.r2[0], self.r1[1] - self.r2[1], self.r1[2] - self.r2[2]];
        dot(&d, &d).sqrt()
    }

    pub fn coupling(&self) -> C64 {
        coupling(self.x())
    }

    /// k_L·r_j for atom 1 or 2.
    pub fn phase(&self, atom: usize) -> f64 {
        match atom {
            1 => dot(&self.k_dir, &self.r1),
            2 => dot(&self.k_dir, &self.r2),
            _ => panic!("atom index {atom}"),
        }
    }

    /// k_L·r₁₂.
    pub fn backscatter_phase(&self) -> f64 {
        self.phase(1) - self.phase(2)
    }
}

/// Elementary exchange processes; `P12c` is V₁₂*.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    P12,
    P21,
    P12c,
    P21c,
}

impl Process {
    pub const ALL: [Process; 4] = [Process::P12, Process::P21, Process::P12c, Process::P21c];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_conjugate(self) -> bool {
        matches!(self, Process::P12c | Process::P21c)
    }
}

/// Quantity expanded to second order with each contribution labelled by
/// the exchange processes producing it. `o2[p][q]` holds V_p applied after
/// V_q, or a product of a `p`-tagged and a `q`-tagged first order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tagged<T> {
    pub o0: T,
    pub o1: [T; 4],
    pub o2: [[T; 4]; 4],
}

impl<T> Tagged<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Tagged<U> {
        Tagged {
            o0: f(&self.o0),
            o1: array::from_fn(|p| f(&self.o1[p])),
            o2: array::from_fn(|p| array::from_fn(|q| f(&self.o2[p][q]))),
        }
    }
}

impl Tagged<C64> {
    /// Second-order product of two tagged scalars.
    pub fn product(a: &Tagged<C64>, b: &Tagged<C64>) -> Tagged<C64> {
        Tagged {
            o0: a.o0 * b.o0,
            o1: array::from_fn(|p| a.o0 * b.o1[p] + a.o1[p] * b.o0),
            o2: array::from_fn(|p| {
                array::from_fn(|q| a.o0 * b.o2[p][q] + a.o2[p][q] * b.o0 + a.o1[p] * b.o1[q])
            }),
        }
    }

    /// Second-order part carried by the unordered pair {p, q}.
    pub fn pair(&self, p: Process, q: Process) -> C64 {
        let (a, b) = (p.index(), q.index());
        if a == b {
            self.o2[a][a]
        } else {
            self.o2[a][b] + self.o2[b][a]
        }
    }

    pub fn first(&self) -> C64 {
        self.o1.iter().sum()
    }

    pub fn second(&self) -> C64 {
        self.o2.iter().flatten().sum()
    }
}

impl Tagged<CVec> {
    pub fn component(&self, i: usize) -> Tagged<C64> {
        self.map(|v| v[i])
    }

    pub fn first(&self) -> CVec {
        self.o1.iter().fold(CVec::zeros(DIM), |a, v| a + v)
    }

    pub fn second(&self) -> CVec {
        self.o2.iter().flatten().fold(CVec::zeros(DIM), |a, v| a + v)
    }

    /// Order-n block (x⃗⁽ⁿ⁾, y⃗⁽ⁿ⁾) with all tags summed.
    pub fn order(&self, n: usize) -> (CVec, CVec) {
        let v = match n {
            0 => self.o0.clone(),
            1 => self.first(),
            2 => self.second(),
            _ => panic!("order {n} not expanded"),
        };
        (v.rows(0, 6).into_owned(), v.rows(6, 9).into_owned())
    }
}

/// Laplace image of the order-2 regression vector split by the order of the
/// initial condition: `o2[n]` holds R^(2−n)Δs⃗^(n).
#[derive(Clone, Debug)]
pub struct ResolventTerms {
    pub o0: CVec,
    pub o1: [CVec; 4],
    pub o2: [[[CVec; 4]; 4]; 3],
}

/// One component of [`ResolventTerms`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelOrders {
    pub o0: C64,
    pub o1: [C64; 4],
    pub o2: [[[C64; 4]; 4]; 3],
}

impl ResolventTerms {
    pub fn channel(&self, i: usize) -> ChannelOrders {
        ChannelOrders {
            o0: self.o0[i],
            o1: array::from_fn(|p| self.o1[p][i]),
            o2: array::from_fn(|n| array::from_fn(|p| array::from_fn(|q| self.o2[n][p][q][i]))),
        }
    }
}

impl ChannelOrders {
    /// Pair {p, q} contribution of R^(2−n)Δs⃗^(n).
    pub fn pair_split(&self, n: usize, p: Process, q: Process) -> C64 {
        let (a, b) = (p.index(), q.index());
        if a == b {
            self.o2[n][a][a]
        } else {
            self.o2[n][a][b] + self.o2[n][b][a]
        }
    }

    pub fn pair(&self, p: Process, q: Process) -> C64 {
        (0..3).map(|n| self.pair_split(n, p, q)).sum()
    }

    pub fn first(&self) -> C64 {
        self.o1.iter().sum()
    }

    pub fn second(&self) -> C64 {
        self.o2.iter().flatten().flatten().sum()
    }
}

/// Spectral data of one configuration at one frequency offset ν.
#[derive(Clone, Copy, Debug)]
pub struct FixedConfigPoint {
    pub nu: f64,
    /// [Δs̃⃗₂(−iν)]₁ by order.
    pub ladder: ChannelOrders,
    /// [Δs̃⃗₂(−iν)]₄ by order, without the backscattering phase.
    pub crossed: ChannelOrders,
}

/// Products of ordered means entering the elastic weights.
#[derive(Clone, Debug)]
pub struct ElasticOrders {
    /// ⟨σ₂⁺⟩⟨σ₂⁻⟩.
    pub ladder: Tagged<C64>,
    /// ⟨σ₁⁻⟩⟨σ₂⁺⟩, without the backscattering phase.
    pub crossed: Tagged<C64>,
}

#[derive(Clone, Debug)]
pub struct TwoAtomGenerator {
    pub atom1: BlochSystem,
    pub atom2: BlochSystem,
    pub t: C64,
    a: CMat,
    v: [CMat; 4],
    lplus0: CVec,
}

fn reshape(y: &CVec, off: usize) -> Mat3 {
    Mat3::from_fn(|i, j| y[off + 3 * i + j])
}

fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
    a * b.transpose()
}

fn seg(q: &CVec, off: usize) -> Vec3 {
    Vec3::new(q[off], q[off + 1], q[off + 2])
}

impl TwoAtomGenerator {
    /// Generator for a configuration; `params.phase` is ignored in favour of
    /// the positions.
    pub fn assemble(cfg: &ScatteringConfig, params: AtomDriveParams) -> Result<Self> {
        Self::with_coupling(
            params.with_phase(cfg.phase(1)),
            params.with_phase(cfg.phase(2)),
            cfg.coupling(),
        )
    }

    /// Generator with explicit per-atom parameters and coupling constant.
    pub fn with_coupling(p1: AtomDriveParams, p2: AtomDriveParams, t: C64) -> Result<Self> {
        if !t.re.is_finite() || !t.im.is_finite() {
            return Err(CbsError::Config("non-finite coupling".into()));
        }
        let atom1 = BlochSystem::build(p1)?;
        let atom2 = BlochSystem::build(p2)?;
        let mut g = TwoAtomGenerator {
            atom1,
            atom2,
            t,
            a: CMat::zeros(DIM, DIM),
            v: array::from_fn(|_| CMat::zeros(DIM, DIM)),
            lplus0: CVec::zeros(DIM),
        };
        g.a = g.build_a();
        for p in Process::ALL {
            g.v[p.index()] = g.dense_process(p);
        }
        let l = drive_vector();
        for k in 0..3 {
            g.lplus0[k] = l[k];
            g.lplus0[3 + k] = l[k];
        }
        Ok(g)
    }

    fn build_a(&self) -> CMat {
        let mut a = CMat::zeros(DIM, DIM);
        let (m1, m2) = (self.atom1.m, self.atom2.m);
        a.view_mut((0, 0), (3, 3)).copy_from(&m2);
        a.view_mut((3, 3), (3, 3)).copy_from(&m1);
        a.view_mut((6, 6), (9, 9)).copy_from(&self.m_cross());
        let l = drive_vector();
        for i in 0..3 {
            for j in 0..3 {
                // L⊗x₂ and x₁⊗L
                a[(6 + 3 * i + j, j)] += l[i];
                a[(6 + 3 * i + j, 3 + i)] += l[j];
            }
        }
        a
    }

    /// M_× = M₁⊗I + I⊗M₂.
    pub fn m_cross(&self) -> CMat {
        let id = CMat::identity(3, 3);
        kron(&to_dyn(&self.atom1.m), &id) + kron(&id, &to_dyn(&self.atom2.m))
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn v(&self, p: Process) -> &CMat {
        &self.v[p.index()]
    }

    pub fn v_total(&self) -> CMat {
        self.v.iter().fold(CMat::zeros(DIM, DIM), |a, v| a + v)
    }

    pub fn lplus0(&self) -> &CVec {
        &self.lplus0
    }

    /// Coupling carried by process `p`, including the overall sign of the
    /// exchange terms in the adjoint Lindblad generator.
    fn coeff(&self, p: Process) -> C64 {
        let t = if p.is_conjugate() { self.t.conj() } else { self.t };
        EXCHANGE_SIGN * t
    }

    /// V_p acting on a 15-vector through the block action rules.
    pub fn apply_process(&self, p: Process, q: &CVec) -> CVec {
        let (dm, dp) = (delta_minus(), delta_plus());
        let x2 = seg(q, 0);
        let x1 = seg(q, 3);
        let y = reshape(q, 6);
        let t = self.coeff(p);
        let mut top2 = Vec3::zeros();
        let mut top1 = Vec3::zeros();
        let ny = match p {
            Process::P12 => {
                top2 = dp * y.row(1).transpose() * (2.0 * I * t);
                dm * y * dp.transpose() * (-2.0 * t) + outer(&n1(), &(dp * x2 * (2.0 * I * t)))
            }
            Process::P21 => {
                top1 = dp * y.column(1) * (2.0 * I * t);
                dp * y * dm.transpose() * (-2.0 * t) + outer(&(dp * x1 * (2.0 * I * t)), &n1())
            }
            Process::P12c => {
                top1 = dm * y.column(0) * (-2.0 * I * t);
                dm * y * dp.transpose() * (-2.0 * t) + outer(&(dm * x1 * (-2.0 * I * t)), &n2())
            }
            Process::P21c => {
                top2 = dm * y.row(0).transpose() * (-2.0 * I * t);
                dp * y * dm.transpose() * (-2.0 * t) + outer(&n2(), &(dm * x2 * (-2.0 * I * t)))
            }
        };
        let mut out = CVec::zeros(DIM);
        for k in 0..3 {
            out[k] = top2[k];
            out[3 + k] = top1[k];
        }
        for i in 0..3 {
            for j in 0..3 {
                out[6 + 3 * i + j] = ny[(i, j)];
            }
        }
        out
    }

    fn dense_process(&self, p: Process) -> CMat {
        let mut m = CMat::zeros(DIM, DIM);
        for c in 0..DIM {
            let mut e = CVec::zeros(DIM);
            e[c] = C64::new(1.0, 0.0);
            m.set_column(c, &self.apply_process(p, &e));
        }
        m
    }

    fn apply_tagged(&self, p: Process, q: &CVec) -> CVec {
        &self.v[p.index()] * q
    }

    /// G_×(z)·y, solving zY − M₁Y − YM₂ᵀ = Y₀ for the 3×3 reshape.
    pub fn g_cross_apply(&self, z: C64, y: &CVec) -> Result<CVec> {
        solve(&(CMat::identity(9, 9) * z - self.m_cross()), y)
    }

    /// G_×(z) as a dense 9×9 matrix.
    pub fn g_cross(&self, z: C64) -> Result<CMat> {
        let mut m = CMat::zeros(9, 9);
        for c in 0..9 {
            let mut e = CVec::zeros(9);
            e[c] = C64::new(1.0, 0.0);
            m.set_column(c, &self.g_cross_apply(z, &e)?);
        }
        Ok(m)
    }

    /// G_×(z) = (z − M_×)^{-1} by dense inversion.
    pub fn g_cross_direct(&self, z: C64) -> Result<CMat> {
        inverse(&(CMat::identity(9, 9) * z - self.m_cross()))
    }

    /// G_× = ∫dω′/2π G₁(iω′)⊗G₂(−iω′), evaluated by residues.
    pub fn g_cross_integral(&self) -> Result<CMat> {
        let b1 = GreenBuilder::new(Arc::clone(&self.atom1.decomp));
        let b2 = GreenBuilder::new(Arc::clone(&self.atom2.decomp));
        let w = Freq::var(0);
        let (f1, f2) = (b1.at(1.0, w)?, b2.at(-1.0, w)?);
        let mut m = CMat::zeros(9, 9);
        for b in 0..3 {
            for d in 0..3 {
                let e1 = VecExpr::constant(Vec3::from_fn(|k, _| if k == b { C64::new(1.0, 0.0) } else { ZERO })).apply(&f1);
                let e2 = VecExpr::constant(Vec3::from_fn(|k, _| if k == d { C64::new(1.0, 0.0) } else { ZERO })).apply(&f2);
                for a in 0..3 {
                    for c in 0..3 {
                        m[(3 * a + c, 3 * b + d)] = e1.comp(a).mul(&e2.comp(c)).integrate(0)?.value()?;
                    }
                }
            }
        }
        Ok(m)
    }

    /// (z − A)^{-1}·w by blocks.
    pub fn free_resolvent(&self, z: C64, w: &CVec) -> Result<CVec> {
        let x2 = green(&self.atom2.decomp, z)? * seg(w, 0);
        let x1 = green(&self.atom1.decomp, z)? * seg(w, 3);
        let l = drive_vector();
        let mut ry = w.rows(6, 9).into_owned();
        for i in 0..3 {
            for j in 0..3 {
                ry[3 * i + j] += l[i] * x2[j] + x1[i] * l[j];
            }
        }
        let y = self.g_cross_apply(z, &ry)?;
        let mut out = CVec::zeros(DIM);
        for k in 0..3 {
            out[k] = x2[k];
            out[3 + k] = x1[k];
        }
        out.rows_mut(6, 9).copy_from(&y);
        Ok(out)
    }

    /// ⟨Q⃗⟩ = −(A + V)^{-1}L⃗₊,₀.
    pub fn exact_steady_state(&self) -> Result<CVec> {
        let m = &self.a + self.v_total();
        crate::linalg::solve(&(-m), &self.lplus0)
    }

    /// Steady state to second order in V, tagged by process.
    pub fn perturbative_orders(&self) -> Result<Tagged<CVec>> {
        let z = ZERO;
        let o0 = self.free_resolvent(z, &self.lplus0)?;
        let o1: [CVec; 4] = try_array(|p| self.free_resolvent(z, &self.apply_tagged(Process::ALL[p], &o0)))?;
        let o2 = try_array(|p| try_array(|q| self.free_resolvent(z, &self.apply_tagged(Process::ALL[p], &o1[q]))))?;
        Ok(Tagged { o0, o1, o2 })
    }

    /// Affine map ⟨σ₂⁺Q⃗⟩ = S⟨Q⃗⟩ + e from two-level operator identities.
    pub fn sigma2_plus_map() -> (CMat, CVec) {
        let idm = delta_minus() * I;
        let n = n1();
        let mut s = CMat::zeros(DIM, DIM);
        let mut e = CVec::zeros(DIM);
        for a in 0..3 {
            for b in 0..3 {
                s[(a, b)] = idm[(a, b)];
            }
            e[a] = n[a];
            // ⟨σ₁ᵃσ₂⁺⟩
            s[(3 + a, 6 + 3 * a + 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..3 {
            for j in 0..3 {
                for b in 0..3 {
                    s[(6 + 3 * i + j, 6 + 3 * i + b)] = idm[(j, b)];
                }
                s[(6 + 3 * i + j, 3 + i)] += n[j];
            }
        }
        (s, e)
    }

    /// Δs⃗₂(0) = ⟨σ₂⁺Q⃗⟩ − ⟨σ₂⁺⟩⟨Q⃗⟩ for a given steady state.
    pub fn regression_initial_exact(q: &CVec) -> CVec {
        let (s, e) = Self::sigma2_plus_map();
        &s * q + e - q * q[1]
    }

    /// Δs⃗₂^(n)(0) for n ≤ 2, tagged by process.
    pub fn regression_initials(q: &Tagged<CVec>) -> Tagged<CVec> {
        let (s, e) = Self::sigma2_plus_map();
        let o0 = &s * &q.o0 + e - &q.o0 * q.o0[1];
        let o1 = array::from_fn(|p| &s * &q.o1[p] - &q.o1[p] * q.o0[1] - &q.o0 * q.o1[p][1]);
        let o2 = array::from_fn(|p| {
            array::from_fn(|r| {
                &s * &q.o2[p][r] - &q.o2[p][r] * q.o0[1] - &q.o0 * q.o2[p][r][1] - &q.o1[r] * q.o1[p][1]
            })
        });
        Tagged { o0, o1, o2 }
    }

    /// R^(n)(z) applied to v for n ≤ 2, tagged by process.
    pub fn resolvent_orders(&self, z: C64, v: &CVec) -> Result<Tagged<CVec>> {
        let o0 = self.free_resolvent(z, v)?;
        let o1: [CVec; 4] = try_array(|p| self.free_resolvent(z, &self.apply_tagged(Process::ALL[p], &o0)))?;
        let o2 = try_array(|p| try_array(|q| self.free_resolvent(z, &self.apply_tagged(Process::ALL[p], &o1[q]))))?;
        Ok(Tagged { o0, o1, o2 })
    }

    /// Δs̃⃗₂(z) to second order given tagged initial conditions.
    pub fn resolvent_terms(&self, z: C64, ds: &Tagged<CVec>) -> Result<ResolventTerms> {
        let r0 = self.resolvent_orders(z, &ds.o0)?;
        let r1: [Tagged<CVec>; 4] = try_array(|q| self.resolvent_orders(z, &ds.o1[q]))?;
        let o0 = r0.o0.clone();
        let o1 = array::from_fn(|p| &r0.o1[p] + &r1[p].o0);
        let n2 = try_array(|p| try_array(|q| self.free_resolvent(z, &ds.o2[p][q])))?;
        let n1 = array::from_fn(|p| array::from_fn(|q| r1[q].o1[p].clone()));
        let n0 = r0.o2.clone();
        Ok(ResolventTerms { o0, o1, o2: [n0, n1, n2] })
    }

    /// Δs̃⃗₂(z) = (z − A − V)^{-1}Δs⃗₂(0) without expansion.
    pub fn correlation_exact(&self, z: C64, ds0: &CVec) -> Result<CVec> {
        let m = CMat::identity(DIM, DIM) * z - &self.a - self.v_total();
        crate::linalg::solve(&m, ds0)
    }

    /// Order-resolved spectral data at each ν, with z = −iν.
    pub fn fixed_config_spectrum(&self, nus: &[f64]) -> Result<Vec<FixedConfigPoint>> {
        let q = self.perturbative_orders()?;
        let ds = Self::regression_initials(&q);
        nus.iter()
            .map(|&nu| {
                let r = self.resolvent_terms(C64::new(0.0, -nu), &ds)?;
                Ok(FixedConfigPoint { nu, ladder: r.channel(CH_LADDER), crossed: r.channel(CH_CROSSED) })
            })
            .collect()
    }

    /// Tagged products of means for the elastic weights.
    pub fn elastic_orders(&self) -> Result<ElasticOrders> {
        let q = self.perturbative_orders()?;
        let s2m = q.component(0);
        let s2p = q.component(1);
        let s1m = q.component(3);
        Ok(ElasticOrders {
            ladder: Tagged::product(&s2p, &s2m),
            crossed: Tagged::product(&s1m, &s2p),
        })
    }
}

/// Stationary intensity radiated along `n_dir` (unit vector, units of k_L).
pub fn intensity(q: &CVec, cfg: &ScatteringConfig, n_dir: [f64; 3]) -> f64 {
    intensity_linear(cfg, n_dir, |i| q[i]).re
}

/// Order-resolved intensity along `n_dir`.
pub fn intensity_tagged(q: &Tagged<CVec>, cfg: &ScatteringConfig, n_dir: [f64; 3]) -> Tagged<C64> {
    // the population constant only enters order 0
    let mut t = q.map(|v| intensity_linear(cfg, n_dir, |i| v[i]) - C64::new(1.0, 0.0));
    t.o0 += C64::new(1.0, 0.0);
    t
}

fn intensity_linear(cfg: &ScatteringConfig, n_dir: [f64; 3], q: impl Fn(usize) -> C64) -> C64 {
    let r12 = [cfg.r1[0] - cfg.r2[0], cfg.r1[1] - cfg.r2[1], cfg.r1[2] - cfg.r2[2]];
    let ph = C64::from_polar(1.0, dot(&n_dir, &r12));
    // ⟨σ⁺σ⁻⟩ = (1 + ⟨σᶻ⟩)/2
    let pops = C64::new(1.0, 0.0) + (q(2) + q(5)) * 0.5;
    // ⟨σ₁⁺σ₂⁻⟩ at 6+3·1+0, ⟨σ₂⁺σ₁⁻⟩ at 6+3·0+1
    pops + q(9) * ph + q(7) * ph.conj()
}

fn try_array<T, const N: usize>(mut f: impl FnMut(usize) -> Result<T>) -> Result<[T; N]> {
    let mut v = Vec::with_capacity(N);
    for i in 0..N {
        v.push(f(i)?);
    }
    Ok(v.try_into().unwrap_or_else(|_| unreachable!()))
}
