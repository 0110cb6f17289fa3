//! Single driven two-level atom: Bloch generator, steady state, coupling
//! matrices, probe-response vectors and spectral correlation functions.
//!
//! Frequencies are in units of γ throughout. The Bloch vector is ordered
//! (σ⁻, σ⁺, σᶻ).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{CbsError, Result};
use crate::integrals::{Factor, Freq, GreenBuilder, ScalarExpr, VecExpr};
use crate::linalg::{c, eigen_decompose, green, Mat3, SpectralDecomposition, Vec3, C64, I, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomDriveParams {
    pub gamma: f64,
    pub delta: f64,
    pub rabi: f64,
    pub phase: f64,
}

impl AtomDriveParams {
    pub fn new(rabi: f64, delta: f64) -> Self {
        AtomDriveParams { gamma: 1.0, delta, rabi, phase: 0.0 }
    }

    pub fn with_phase(self, phase: f64) -> Self {
        AtomDriveParams { phase, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.rabi >= 0.0) || !self.phase.is_finite() || !self.delta.is_finite() {
            return Err(CbsError::Input(format!("invalid drive parameters {self:?}")));
        }
        Ok(())
    }

    /// Ω_j = Ω e^{iφ} in units of γ.
    pub fn rabi_complex(&self) -> C64 {
        C64::from_polar(self.rabi / self.gamma, self.phase)
    }
}

/// Δ⁻: (a₁, a₂, a₃) ↦ (−i a₃/2, 0, i a₂).
pub fn delta_minus() -> Mat3 {
    Mat3::new(ZERO, ZERO, -I / 2.0, ZERO, ZERO, ZERO, ZERO, I, ZERO)
}

/// Δ⁺: (a₁, a₂, a₃) ↦ (0, i a₃/2, −i a₁).
pub fn delta_plus() -> Mat3 {
    Mat3::new(ZERO, ZERO, ZERO, ZERO, ZERO, I / 2.0, -I, ZERO, ZERO)
}

pub fn drive_vector() -> Vec3 {
    Vec3::new(ZERO, ZERO, c(-2.0, 0.0))
}

pub fn n1() -> Vec3 {
    Vec3::new(c(0.5, 0.0), ZERO, ZERO)
}

pub fn n2() -> Vec3 {
    Vec3::new(ZERO, c(0.5, 0.0), ZERO)
}

/// Bloch matrix M for the given parameters (units of γ).
pub fn bloch_matrix(p: &AtomDriveParams) -> Mat3 {
    let d = p.delta / p.gamma;
    let o = p.rabi_complex();
    Mat3::new(
        c(-1.0, d), ZERO, -I * o / 2.0,
        ZERO, c(-1.0, -d), I * o.conj() / 2.0,
        -I * o.conj(), I * o, c(-2.0, 0.0),
    )
}

#[derive(Clone, Debug)]
pub struct BlochSystem {
    pub params: AtomDriveParams,
    pub m: Mat3,
    pub l: Vec3,
    pub decomp: Arc<SpectralDecomposition>,
    g0: Mat3,
    steady: Vec3,
}

impl BlochSystem {
    pub fn build(params: AtomDriveParams) -> Result<Self> {
        params.validate()?;
        let m = bloch_matrix(&params);
        let decomp = Arc::new(eigen_decompose(&m)?);
        let g0 = green(&decomp, ZERO)?;
        let l = drive_vector();
        let steady = g0 * l;
        Ok(BlochSystem { params, m, l, decomp, g0, steady })
    }

    /// Green matrix G(z) = (z − M)^{-1}.
    pub fn green(&self, z: C64) -> Result<Mat3> {
        green(&self.decomp, z)
    }

    /// G = G(0) = −M^{-1}.
    pub fn g(&self) -> Mat3 {
        self.g0
    }

    /// ⟨σ⃗⟩ = G L.
    pub fn steady_state(&self) -> Vec3 {
        self.steady
    }

    /// Excited-state population ⟨σ⁺σ⁻⟩ = (1 + ⟨σᶻ⟩)/2.
    pub fn population(&self) -> f64 {
        0.5 * (1.0 + self.steady[2].re)
    }

    pub fn canonical(&self) -> Side<'_> {
        Side { sys: self, mirrored: false }
    }

    pub fn mirrored(&self) -> Side<'_> {
        Side { sys: self, mirrored: true }
    }

    /// (G⃗₁⁽⁰⁾, G⃗₂⁽⁰⁾).
    pub fn g0_vectors(&self) -> (Vec3, Vec3) {
        let a = self.canonical();
        (
            a.mirror().g0_2().constant_value().unwrap(),
            a.g0_2().constant_value().unwrap(),
        )
    }

    /// Inelastic resonance-fluorescence spectrum at offset ν from the laser,
    /// normalized so that its integral is ⟨σ⁺σ⁻⟩ − |⟨σ⁻⟩|².
    pub fn mollow_p0(&self, nu: f64) -> Result<f64> {
        Ok(self.canonical().p0(Freq::fixed(nu))?.value()?.re)
    }

    /// ⟨Δσ⃗(±iω)⟩^(±) = G(±iω) Δ^(±) G L.
    pub fn delta_sigma_first(&self, sign: Sign, omega: f64) -> Result<Vec3> {
        let a = self.canonical();
        let e = match sign {
            Sign::Plus => a.mirror().ds_minus(Freq::fixed(omega))?,
            Sign::Minus => a.ds_minus(Freq::fixed(omega))?,
        };
        Ok(e.constant_value().unwrap())
    }

    /// ⟨Δσ⃗(ω)⟩^(2).
    pub fn delta_sigma_second(&self, omega: f64) -> Result<Vec3> {
        Ok(self.canonical().ds_second(Freq::fixed(omega))?.constant_value().unwrap())
    }

    /// Probe vectors (G⃗₂^(−)(−iν), G⃗₂^(+)(iν), G⃗₂^(2)(ν)).
    pub fn probe_vectors(&self, nu: f64) -> Result<ProbeVectors> {
        Self::probe_vectors_of(self.canonical(), nu)
    }

    /// Counterparts (G⃗₁^(+)(iν), G⃗₁^(−)(−iν), G⃗₁^(2)(ν)) under the
    /// substitution i ↔ −i, 1 ↔ 2, (+) ↔ (−).
    pub fn probe_vectors_mirrored(&self, nu: f64) -> Result<ProbeVectors> {
        Self::probe_vectors_of(self.mirrored(), nu)
    }

    fn probe_vectors_of(a: Side<'_>, nu: f64) -> Result<ProbeVectors> {
        let f = Freq::fixed(nu);
        Ok(ProbeVectors {
            first_same: a.g2_minus(f)?.constant_value().unwrap(),
            first_cross: a.g2_plus(f)?.constant_value().unwrap(),
            second: a.g2_second(f)?.constant_value().unwrap(),
        })
    }

    /// P^(+)(ω′, ν).
    pub fn p_plus(&self, omega_p: f64, nu: f64) -> Result<C64> {
        self.canonical()
            .p_plus(Freq::fixed(omega_p), Freq::fixed(nu))?
            .value()
    }

    /// P^(−)(ω′, ν).
    pub fn p_minus(&self, omega_p: f64, nu: f64) -> Result<C64> {
        self.canonical()
            .p_minus(Freq::fixed(omega_p), Freq::fixed(nu))?
            .value()
    }

    /// P^(2)(ω′, ν).
    pub fn p2(&self, omega_p: f64, nu: f64) -> Result<f64> {
        let x = self
            .canonical()
            .p2_half(Freq::fixed(omega_p), Freq::fixed(nu))?
            .value()?;
        Ok(2.0 * x.re)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Probe-response vectors of one atom. For the canonical side these are
/// (G⃗₂^(−)(−iν), G⃗₂^(+)(iν), G⃗₂^(2)(ν)); for the mirrored side
/// (G⃗₁^(+)(iν), G⃗₁^(−)(−iν), G⃗₁^(2)(ν)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeVectors {
    pub first_same: Vec3,
    pub first_cross: Vec3,
    pub second: Vec3,
}

/// Expression builder for one atom, optionally under the substitution
/// i ↔ −i, component 1 ↔ 2, Δ⁺ ↔ Δ⁻, n₁ ↔ n₂.
///
/// Names refer to the canonical side: `ds_minus` is G(−iω)Δ⁻GL, whose
/// mirror is G(iω)Δ⁺GL.
#[derive(Clone, Copy)]
pub struct Side<'a> {
    pub sys: &'a BlochSystem,
    pub mirrored: bool,
}

impl<'a> Side<'a> {
    pub fn mirror(self) -> Self {
        Side { sys: self.sys, mirrored: !self.mirrored }
    }

    /// Explicit imaginary unit.
    fn i(&self) -> C64 {
        if self.mirrored { -I } else { I }
    }

    /// Sign multiplying i in Green arguments.
    fn k(&self) -> f64 {
        if self.mirrored { -1.0 } else { 1.0 }
    }

    /// Component index for the formula subscript 1 or 2.
    pub fn comp(&self, label: usize) -> usize {
        match (label, self.mirrored) {
            (1, false) | (2, true) => 0,
            (2, false) | (1, true) => 1,
            (3, _) => 2,
            _ => panic!("component {label}"),
        }
    }

    pub fn dm(&self) -> Factor {
        Factor::Mat(if self.mirrored { delta_plus() } else { delta_minus() })
    }

    pub fn dp(&self) -> Factor {
        Factor::Mat(if self.mirrored { delta_minus() } else { delta_plus() })
    }

    fn n1(&self) -> Vec3 {
        if self.mirrored { n2() } else { n1() }
    }

    fn gb(&self) -> GreenBuilder {
        GreenBuilder::new(self.sys.decomp.clone())
    }

    /// G(±i·w) with the formula sign `k`.
    pub fn gi(&self, k: f64, w: Freq) -> Result<Factor> {
        self.gb().at(self.k() * k, w)
    }

    pub fn g(&self) -> Factor {
        Factor::Mat(self.sys.g0)
    }

    pub fn gl(&self) -> VecExpr {
        VecExpr::constant(self.sys.steady)
    }

    pub fn gl_c(&self, label: usize) -> C64 {
        self.sys.steady[self.comp(label)]
    }

    fn scalar(&self, v: &VecExpr, label: usize) -> ScalarExpr {
        v.comp(self.comp(label))
    }

    /// G⃗₂⁽⁰⁾ = iΔ⁻GL + n₁ − (GL)₂GL.
    pub fn g0_2(&self) -> VecExpr {
        self.gl()
            .apply(&self.dm())
            .scale(self.i())
            .add(VecExpr::constant(self.n1()))
            .sub(self.gl().scale(self.gl_c(2)))
    }

    /// G(−iω)Δ⁻GL.
    pub fn ds_minus(&self, w: Freq) -> Result<VecExpr> {
        Ok(self.gl().apply(&self.dm()).apply(&self.gi(-1.0, w)?))
    }

    /// GΔ⁺G(−iω)Δ⁻GL + GΔ⁻G(iω)Δ⁺GL.
    pub fn ds_second(&self, w: Freq) -> Result<VecExpr> {
        let a = self.ds_minus(w)?.apply(&self.dp()).apply(&self.g());
        let b = self.mirror().ds_minus(w)?.apply(&self.dm()).apply(&self.g());
        Ok(a.add(b))
    }

    /// Inelastic single-atom spectrum (1/2π)[(G(−iν)G⃗₂⁽⁰⁾)₁ + (G(iν)G⃗₁⁽⁰⁾)₂].
    pub fn p0(&self, nu: Freq) -> Result<ScalarExpr> {
        let m = self.mirror();
        let a = self.scalar(&self.g0_2().apply(&self.gi(-1.0, nu)?), 1);
        let b = m.scalar(&m.g0_2().apply(&m.gi(-1.0, nu)?), 1);
        Ok(a.add(b).scale(c(0.5 / PI, 0.0)))
    }

    /// G⃗₂^(−)(−iν) = iΔ⁻G(−iν)Δ⁻GL − G(−iν)Δ⁻GL(GL)₂ − GL(G(−iν)Δ⁻GL)₂.
    pub fn g2_minus(&self, nu: Freq) -> Result<VecExpr> {
        let d = self.ds_minus(nu)?;
        Ok(d.clone()
            .apply(&self.dm())
            .scale(self.i())
            .sub(d.clone().scale(self.gl_c(2)))
            .sub(self.gl().times(&self.scalar(&d, 2))))
    }

    /// G⃗₂^(+)(iν) = iΔ⁻G(iν)Δ⁺GL − (G(iν)Δ⁺GL)₂GL − (GL)₂G(iν)Δ⁺GL.
    pub fn g2_plus(&self, nu: Freq) -> Result<VecExpr> {
        let d = self.mirror().ds_minus(nu)?;
        Ok(d.clone()
            .apply(&self.dm())
            .scale(self.i())
            .sub(self.gl().times(&self.scalar(&d, 2)))
            .sub(d.scale(self.gl_c(2))))
    }

    /// G⃗₂^(2)(ν).
    pub fn g2_second(&self, nu: Freq) -> Result<VecExpr> {
        let m = self.mirror();
        let a = self.ds_minus(nu)?.apply(&self.dp()).apply(&self.g());
        let b = m.ds_minus(nu)?.apply(&self.dm()).apply(&self.g());
        let dm = self.ds_minus(nu)?;
        let dp = m.ds_minus(nu)?;
        Ok(a.clone()
            .apply(&self.dm())
            .scale(self.i())
            .add(b.clone().apply(&self.dm()).scale(self.i()))
            .sub(self.gl().times(&self.scalar(&a, 2)))
            .sub(self.gl().times(&self.scalar(&b, 2)))
            .sub(a.scale(self.gl_c(2)))
            .sub(b.scale(self.gl_c(2)))
            .sub(dm.times(&self.scalar(&dp, 2)))
            .sub(dp.times(&self.scalar(&dm, 2))))
    }

    /// P^(+)(ω′, ν).
    pub fn p_plus(&self, wp: Freq, nu: Freq) -> Result<ScalarExpr> {
        let m = self.mirror();
        // (G(iν)Δ⁺G(iν−iω′)G⃗₁⁽⁰⁾)₂ + (G(iν)G⃗₁^(+)(iω′))₂ are the mirrors of
        // (G(−iν)Δ⁻G(−iν+iω′)G⃗₂⁽⁰⁾)₁ + (G(−iν)G⃗₂^(−)(−iω′))₁.
        let t1 = m.scalar(
            &m.g0_2()
                .apply(&m.gi(-1.0, nu.sub(wp))?)
                .apply(&m.dm())
                .apply(&m.gi(-1.0, nu)?),
            1,
        );
        let t2 = m.scalar(&m.g2_minus(wp)?.apply(&m.gi(-1.0, nu)?), 1);
        let t3 = self.scalar(
            &self
                .g0_2()
                .apply(&self.gi(-1.0, nu)?)
                .apply(&self.dp())
                .apply(&self.gi(-1.0, nu.sub(wp))?),
            1,
        );
        let t4 = self.scalar(&self.g2_plus(wp)?.apply(&self.gi(-1.0, nu.sub(wp))?), 1);
        Ok(t1.add(t2).add(t3).add(t4))
    }

    /// P^(−)(ω′, ν), the mirror of P^(+)(ω′, ν).
    pub fn p_minus(&self, wp: Freq, nu: Freq) -> Result<ScalarExpr> {
        self.mirror().p_plus(wp, nu)
    }

    /// The bracket whose doubled real part is P^(2)(ω′, ν).
    pub fn p2_half(&self, wp: Freq, nu: Freq) -> Result<ScalarExpr> {
        let gnu = self.gi(-1.0, nu)?;
        let g0v = self.g0_2().apply(&gnu);
        let v = self
            .g2_second(wp)?
            .add(
                g0v.clone()
                    .apply(&self.dp())
                    .apply(&self.gi(-1.0, nu.sub(wp))?)
                    .apply(&self.dm()),
            )
            .add(
                self.g2_plus(wp)?
                    .apply(&self.gi(-1.0, nu.sub(wp))?)
                    .apply(&self.dm()),
            )
            .add(
                g0v.apply(&self.dm())
                    .apply(&self.gi(-1.0, nu.add(wp))?)
                    .apply(&self.dp()),
            )
            .add(
                self.g2_minus(wp)?
                    .apply(&self.gi(-1.0, nu.add(wp))?)
                    .apply(&self.dp()),
            );
        Ok(self.scalar(&v.apply(&gnu), 1))
    }
}

