//! Configuration-averaged double-scattering observables of the origin atom:
//! elastic ladder/crossed weights, inelastic ladder/crossed densities and
//! the enhancement factor.
//!
//! All values omit the common factor 4|T|² of one emitting atom. Densities
//! are per unit ν (units of γ) with ∫L_inel dν the inelastic ladder power.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::atom::{AtomDriveParams, BlochSystem, Side};
use crate::error::{CbsError, Result};
use crate::integrals::{integrate_quadrature, integrate_quadrature_2d, quad, Factor, Freq, ScalarExpr, VecExpr};
use crate::linalg::{c, C64};

/// Imaginary part tolerated in a real observable, relative to max(1, |re|).
pub const IMAG_TOL: f64 = 1e-10;

/// Points in the default ν grid.
pub const DEFAULT_GRID_POINTS: usize = 601;

/// Density samples on an ascending ν grid plus the weight of δ(ν).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunctionGrid {
    pub nu: Vec<f64>,
    pub values: Vec<f64>,
    pub elastic_weight: f64,
}

impl SpectralFunctionGrid {
    pub fn new(nu: Vec<f64>, values: Vec<f64>, elastic_weight: f64) -> Result<Self> {
        check_grid(&nu)?;
        if values.len() != nu.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(CbsError::Input("grid values must be finite and match the grid".into()));
        }
        Ok(SpectralFunctionGrid { nu, values, elastic_weight })
    }

    /// Trapezoid estimate of ∫ values dν over the grid span.
    pub fn trapezoid(&self) -> f64 {
        self.nu
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

/// Full averaged result for one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct CbsResult {
    pub params: AtomDriveParams,
    pub l_el: f64,
    pub c_el: f64,
    pub l_inel: SpectralFunctionGrid,
    pub c_inel: SpectralFunctionGrid,
    /// ∫L_inel dν over the whole real line.
    pub l_inel_total: f64,
    /// ∫C_inel dν over the whole real line.
    pub c_inel_total: f64,
    pub enhancement: f64,
}

/// Evaluation route for the inelastic densities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InelasticPath {
    /// P^(0), P^(2), P^(±) convolution forms.
    Compact,
    /// Sum of the three resolvent-order contributions.
    Decomposed,
}

fn check_grid(nu: &[f64]) -> Result<()> {
    if nu.is_empty() || nu.iter().any(|x| !x.is_finite()) || nu.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CbsError::Input("ν grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

fn real(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(CbsError::Solve(format!("observable has imaginary part {:e} (real part {:e})", z.im, z.re)));
    }
    Ok(z.re)
}

/// Default grid: 601 points on [−W, W] with W = max(15, Ω + 6) in units of γ.
pub fn default_grid(params: &AtomDriveParams) -> Vec<f64> {
    let w = (params.rabi / params.gamma + 6.0).max(15.0);
    let n = DEFAULT_GRID_POINTS;
    (0..n).map(|k| -w + 2.0 * w * k as f64 / (n - 1) as f64).collect()
}

/// How frequency integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integration {
    /// Exact pole sums.
    Residue,
    /// Adaptive quadrature with directly inverted Green matrices.
    Quadrature { window: f64, rel: f64 },
}

impl Integration {
    fn one(self, e: &ScalarExpr) -> Result<C64> {
        match self {
            Integration::Residue => e.integrate(0)?.value(),
            Integration::Quadrature { window, rel } => integrate_quadrature(e, 0, &[], window, rel),
        }
    }

    fn two(self, e: &ScalarExpr) -> Result<C64> {
        match self {
            Integration::Residue => e.integrate(1)?.integrate(0)?.value(),
            Integration::Quadrature { window, rel } => integrate_quadrature_2d(e, window, rel),
        }
    }
}

/// Builder shortcuts on the canonical side of one atom.
struct Terms<'a> {
    a: Side<'a>,
    s_minus: C64,
    s_plus: C64,
}

impl<'a> Terms<'a> {
    fn new(sys: &'a BlochSystem) -> Self {
        let s = sys.steady_state();
        Terms { a: sys.canonical(), s_minus: s[0], s_plus: s[1] }
    }

    fn m(&self) -> Side<'a> {
        self.a.mirror()
    }

    fn g(&self, k: f64, w: Freq) -> Result<Factor> {
        self.a.gi(k, w)
    }

    /// (F₁ F₂ … Fₙ v)_j with formula component j.
    fn ch(&self, v: VecExpr, fs: &[&Factor], j: usize) -> ScalarExpr {
        fs.iter().rev().fold(v, |v, f| v.apply(f)).comp(j - 1)
    }

    /// G(−iω)Δ⁻GL.
    fn dsm(&self, w: Freq) -> Result<VecExpr> {
        self.a.ds_minus(w)
    }

    /// G(iω)Δ⁺GL.
    fn dsp(&self, w: Freq) -> Result<VecExpr> {
        self.m().ds_minus(w)
    }

    /// Single-atom inelastic spectrum without the 1/2π.
    fn p0(&self, w: Freq) -> Result<ScalarExpr> {
        Ok(self.a.p0(w)?.scale(c(2.0 * PI, 0.0)))
    }

    fn p2(&self, wp: Freq, nu: Freq) -> Result<ScalarExpr> {
        Ok(self.a.p2_half(wp, nu)?.add(self.m().p2_half(wp, nu)?))
    }
}

/// Elastic ladder weight L_el.
pub fn elastic_ladder(sys: &BlochSystem) -> Result<f64> {
    elastic_ladder_with(sys, Integration::Residue)
}

/// [`elastic_ladder`] with a chosen integration route.
pub fn elastic_ladder_with(sys: &BlochSystem, mode: Integration) -> Result<f64> {
    let int = |e: &ScalarExpr| mode.one(e);
    let t = Terms::new(sys);
    let (sm, sp) = (t.s_minus, t.s_plus);
    let z = Freq::fixed(0.0);
    let d2 = sys.delta_sigma_second(0.0)?;
    let dm = t.dsm(z)?.constant_value().unwrap();
    let dp = t.dsp(z)?.constant_value().unwrap();
    let local = sp * sm * (d2[1] * sm + d2[0] * sp + dp[1] * dm[0] + dm[1] * dp[0]);
    let w = Freq::var(0);
    let ds = t.a.ds_second(w)?;
    let conv = int(&t.p0(w)?.mul(&ds.comp(1).scale(sm).add(ds.comp(0).scale(sp))))?;
    real(local + conv)
}

/// Elastic crossed weight C_el.
pub fn elastic_crossed(sys: &BlochSystem) -> Result<f64> {
    elastic_crossed_with(sys, Integration::Residue)
}

/// [`elastic_crossed`] with a chosen integration route.
pub fn elastic_crossed_with(sys: &BlochSystem, mode: Integration) -> Result<f64> {
    let int = |e: &ScalarExpr| mode.one(e);
    let t = Terms::new(sys);
    let (sm, sp) = (t.s_minus, t.s_plus);
    let z = Freq::fixed(0.0);
    let dm = t.dsm(z)?.constant_value().unwrap();
    let dp = t.dsp(z)?.constant_value().unwrap();
    let local = sp * sm * dm[0] * dp[1] + sp * sp * dm[0] * dp[0] + sm * sm * dm[1] * dp[1];
    let w = Freq::var(0);
    let (g, dmat, pmat) = (t.a.g(), t.a.dm(), t.a.dp());
    let gw = t.g(1.0, w)?;
    let gmw = t.g(-1.0, w)?;
    let a4 = t.dsm(w)?.comp(1).mul(&t.ch(t.m().g0_2(), &[&g, &pmat, &gw], 2));
    let a5 = t.ch(t.a.g0_2(), &[&g, &dmat, &gmw], 1).mul(&t.dsp(w)?.comp(0));
    real(local + sm * int(&a4)? + sp * int(&a5)?)
}

/// Compact inelastic ladder density at ν.
pub fn inelastic_ladder_at(sys: &BlochSystem, nu: f64) -> Result<f64> {
    inelastic_ladder_at_with(sys, nu, Integration::Residue)
}

/// [`inelastic_ladder_at`] with a chosen integration route.
pub fn inelastic_ladder_at_with(sys: &BlochSystem, nu: f64, mode: Integration) -> Result<f64> {
    let int = |e: &ScalarExpr| mode.one(e);
    let t = Terms::new(sys);
    let f = Freq::fixed(nu);
    let w = Freq::var(0);
    let conv = int(&t.p0(w)?.mul(&t.p2(w, f)?))?;
    let el = t.s_plus * t.s_minus * t.p2(Freq::fixed(0.0), f)?.value()?;
    let g = |v: VecExpr| v.constant_value().unwrap();
    let mf = f.neg();
    let pair = g(t.dsm(mf)?)[1] * g(t.dsp(mf)?)[0] + g(t.dsp(f)?)[1] * g(t.dsm(f)?)[0];
    let one = pair * t.p0(f)?.value()?;
    real((conv + el + one) / (2.0 * PI))
}

/// Compact inelastic crossed density at ν.
pub fn inelastic_crossed_at(sys: &BlochSystem, nu: f64) -> Result<f64> {
    inelastic_crossed_at_with(sys, nu, Integration::Residue)
}

/// [`inelastic_crossed_at`] with a chosen integration route.
pub fn inelastic_crossed_at_with(sys: &BlochSystem, nu: f64, mode: Integration) -> Result<f64> {
    let int = |e: &ScalarExpr| mode.one(e);
    let t = Terms::new(sys);
    let f = Freq::fixed(nu);
    let w = Freq::var(0);
    let z = Freq::fixed(0.0);
    let conv = int(&t.a.p_plus(w, f)?.mul(&t.a.p_minus(f.sub(w), f)?))?;
    let g = |v: VecExpr| v.constant_value().unwrap();
    let e1 = t.s_plus * g(t.dsm(f)?)[0] * t.a.p_plus(z, f)?.value()?;
    let e2 = t.s_minus * g(t.dsp(f)?)[1] * t.a.p_minus(z, f)?.value()?;
    real((conv + e1 + e2) / (2.0 * PI))
}

/// Ladder correlation functions (L^(2;0), L^(1;1), L^(0;2)) at z = −iν.
pub fn ladder_orders(sys: &BlochSystem, nu: f64) -> Result<[C64; 3]> {
    ladder_orders_with(sys, nu, Integration::Residue)
}

/// [`ladder_orders`] with a chosen integration route.
pub fn ladder_orders_with(sys: &BlochSystem, nu: f64, mode: Integration) -> Result<[C64; 3]> {
    let int = |e: &ScalarExpr| mode.one(e);
    let t = Terms::new(sys);
    let (a, m) = (t.a, t.m());
    let s12 = t.s_minus * t.s_plus;
    let f = Freq::fixed(nu);
    let w = Freq::var(0);
    let z = Freq::fixed(0.0);
    let (gn, dp, dm) = (t.g(-1.0, f)?, a.dp(), a.dm());
    let (gw, gmw) = (t.g(1.0, w)?, t.g(-1.0, w)?);
    let (g01, g02, gl) = (m.g0_2(), a.g0_2(), a.gl());
    // (G(iω′)G⃗₁⁽⁰⁾)₂ and (G(−iω′)G⃗₂⁽⁰⁾)₁
    let w1 = t.ch(g01.clone(), &[&gw], 2);
    let w2 = t.ch(g02.clone(), &[&gmw], 1);
    let v = |e: ScalarExpr| e.value();

    let l20 = s12 * v(t.ch(g02.clone(), &[&gn, &dp, &gn, &dm, &gn], 1))?
        + s12 * v(t.ch(g02.clone(), &[&gn, &dm, &gn, &dp, &gn], 1))?
        + int(&w1.mul(&t.ch(g02.clone(), &[&gn, &dp, &t.g(-1.0, f.add(w))?, &dm, &gn], 1)))?
        + int(&w2.mul(&t.ch(g02.clone(), &[&gn, &dm, &t.g(-1.0, f.sub(w))?, &dp, &gn], 1)))?;

    let l11 = s12 * v(t.ch(a.g2_minus(z)?, &[&gn, &dp, &gn], 1))?
        + s12 * v(t.ch(a.g2_plus(z)?, &[&gn, &dm, &gn], 1))?
        + int(&w1.mul(&t.ch(a.g2_minus(w)?, &[&gn, &dp, &t.g(-1.0, f.add(w))?], 1)))?
        + int(&w2.mul(&t.ch(a.g2_plus(w)?, &[&gn, &dm, &t.g(-1.0, f.sub(w))?], 1)))?
        + int(&t
            .ch(g01.clone(), &[&gn, &gw], 2)
            .mul(&t.ch(gl.clone(), &[&gmw, &dm], 2))
            .mul(&t.ch(gl.clone(), &[&gn, &dp], 1)))?
        + int(&t
            .ch(g02.clone(), &[&gn, &gmw], 1)
            .mul(&t.ch(gl.clone(), &[&gw, &dp], 2))
            .mul(&t.ch(gl.clone(), &[&gn, &dm], 1)))?;

    let g2w = t.ch(a.g2_second(w)?, &[&gn], 1);
    let minus_n = t.ch(gl.clone(), &[&gn, &gmw, &dm], 1);
    let plus_n = t.ch(gl.clone(), &[&gn, &gw, &dp], 1);
    let plus_2 = t.ch(gl.clone(), &[&gw, &dp], 2);
    let minus_2 = t.ch(gl.clone(), &[&gmw, &dm], 2);
    let l02 = s12 * v(t.ch(a.g2_second(z)?, &[&gn], 1))?
        + int(&w2.mul(&g2w))?
        + int(&w1.mul(&g2w))?
        + int(&w2.mul(&minus_n).mul(&plus_2))?
        + int(&w2.mul(&plus_n).mul(&minus_2))?
        + int(&w1.mul(&plus_n).mul(&minus_2))?
        + int(&w1.mul(&minus_n).mul(&plus_2))?;
    Ok([l20, l11, l02])
}

/// Crossed correlation functions (C^(2;0), C^(1;1), C^(0;2)) at z = −iν.
pub fn crossed_orders(sys: &BlochSystem, nu: f64) -> Result<[C64; 3]> {
    crossed_orders_with(sys, nu, Integration::Residue)
}

/// [`crossed_orders`] with a chosen integration route.
pub fn crossed_orders_with(sys: &BlochSystem, nu: f64, mode: Integration) -> Result<[C64; 3]> {
    let int = |e: &ScalarExpr| mode.one(e);
    let t = Terms::new(sys);
    let (a, m) = (t.a, t.m());
    let (s1, s2) = (t.s_minus, t.s_plus);
    let f = Freq::fixed(nu);
    let (w, w2) = (Freq::var(0), Freq::var(1));
    let z = Freq::fixed(0.0);
    let (gn, dp, dm) = (t.g(-1.0, f)?, a.dp(), a.dm());
    let (gw, gmw) = (t.g(1.0, w)?, t.g(-1.0, w)?);
    let (gw2, gmw2) = (t.g(1.0, w2)?, t.g(-1.0, w2)?);
    let (g01, g02, gl) = (m.g0_2(), a.g0_2(), a.gl());
    let int2 = |e: ScalarExpr| mode.two(&e);
    let dsm_n = t.ch(gl.clone(), &[&gn, &dm], 1);
    let lead = t.ch(g02.clone(), &[&gn, &dm, &gmw], 1);

    let c20 = s2 * dsm_n.mul(&t.ch(g02.clone(), &[&gn, &dp, &gn], 1)).value()?
        + int(&lead.mul(&t.ch(g02.clone(), &[&t.g(-1.0, f.sub(w))?, &dp, &gn], 1)))?;

    let c11 = s2 * dsm_n.mul(&t.ch(a.g2_plus(z)?, &[&gn], 1)).value()?
        + int(&lead.mul(&t.ch(a.g2_plus(w)?, &[&t.g(-1.0, f.sub(w))?], 1)))?
        + s1 * int(&t
            .ch(g02.clone(), &[&gn, &dm, &gn, &gmw], 1)
            .mul(&t.ch(gl.clone(), &[&gw, &dp], 2)))?;

    let inner = t.ch(g02.clone(), &[&gn, &gw2, &dm, &gmw], 1);
    let outer = t.ch(g01.clone(), &[&gmw2, &dp, &gw], 2);
    let c02 = s2 * int(&t.ch(gl.clone(), &[&gn, &gmw, &dm], 1).mul(&t.ch(m.g2_minus(z)?, &[&gw], 2)))?
        + s1 * int(&t.ch(a.g2_minus(z)?, &[&gn, &gmw], 1).mul(&t.ch(gl.clone(), &[&gw, &dp], 2)))?
        + s1 * int2(inner.mul(&t.ch(gl.clone(), &[&gmw2, &gw, &dp], 2)))?
        + int2(t.ch(m.g2_minus(w)?, &[&gmw2], 2).mul(&inner))?
        + int2(t.ch(a.g2_minus(w)?, &[&gn, &gw2], 1).mul(&outer))?
        + s2 * int2(outer.mul(&t.ch(gl.clone(), &[&gn, &gw2, &gmw, &dm], 1)))?;
    Ok([c20, c11, c02])
}

/// Ladder density from the resolvent-order decomposition.
pub fn inelastic_ladder_decomposed_at(sys: &BlochSystem, nu: f64) -> Result<f64> {
    Ok(ladder_orders(sys, nu)?.iter().sum::<C64>().re / PI)
}

/// Crossed density from the resolvent-order decomposition.
pub fn inelastic_crossed_decomposed_at(sys: &BlochSystem, nu: f64) -> Result<f64> {
    Ok(crossed_orders(sys, nu)?.iter().sum::<C64>().re / PI)
}

fn density_fn(path: InelasticPath, crossed: bool) -> fn(&BlochSystem, f64) -> Result<f64> {
    match (path, crossed) {
        (InelasticPath::Compact, false) => inelastic_ladder_at,
        (InelasticPath::Compact, true) => inelastic_crossed_at,
        (InelasticPath::Decomposed, false) => inelastic_ladder_decomposed_at,
        (InelasticPath::Decomposed, true) => inelastic_crossed_decomposed_at,
    }
}

fn on_grid(sys: &BlochSystem, nu: &[f64], f: fn(&BlochSystem, f64) -> Result<f64>) -> Result<Vec<f64>> {
    check_grid(nu)?;
    nu.par_iter().map(|&x| f(sys, x)).collect()
}

/// Inelastic ladder spectrum on a grid, with the elastic ladder weight.
pub fn inelastic_ladder(sys: &BlochSystem, nu: &[f64], path: InelasticPath) -> Result<SpectralFunctionGrid> {
    let values = on_grid(sys, nu, density_fn(path, false))?;
    SpectralFunctionGrid::new(nu.to_vec(), values, elastic_ladder(sys)?)
}

/// Inelastic crossed spectrum on a grid, with the elastic crossed weight.
pub fn inelastic_crossed(sys: &BlochSystem, nu: &[f64], path: InelasticPath) -> Result<SpectralFunctionGrid> {
    let values = on_grid(sys, nu, density_fn(path, true))?;
    SpectralFunctionGrid::new(nu.to_vec(), values, elastic_crossed(sys)?)
}

/// ∫ density dν over the real line by adaptive quadrature.
pub fn inelastic_total(sys: &BlochSystem, crossed: bool) -> Result<f64> {
    let f = density_fn(InelasticPath::Compact, crossed);
    let window = sys.params.rabi / sys.params.gamma + 6.0;
    let v = quad::real_line(|x| f(sys, x).map(|y| c(y, 0.0)), window, 1e-12, 1e-9)?;
    Ok(v.re * 2.0 * PI)
}

/// Backward total over background: 1 + (C_el + ∫C_inel)/(L_el + ∫L_inel).
pub fn enhancement_factor(r: &CbsResult) -> Result<f64> {
    let l = r.l_el + r.l_inel_total;
    if r.params.rabi == 0.0 || l == 0.0 {
        return Err(CbsError::Input("enhancement factor undefined without scattering (Ω = 0)".into()));
    }
    Ok(1.0 + (r.c_el + r.c_inel_total) / l)
}

/// All four observables and the enhancement factor on the given grid.
pub fn compute(params: AtomDriveParams, nu: &[f64], path: InelasticPath) -> Result<CbsResult> {
    if params.rabi == 0.0 {
        return Err(CbsError::Input("Ω = 0: nothing scatters".into()));
    }
    let sys = BlochSystem::build(params)?;
    let l_inel = inelastic_ladder(&sys, nu, path)?;
    let c_inel = inelastic_crossed(&sys, nu, path)?;
    let (l_inel_total, c_inel_total) = rayon::join(|| inelastic_total(&sys, false), || inelastic_total(&sys, true));
    let mut r = CbsResult {
        params,
        l_el: l_inel.elastic_weight,
        c_el: c_inel.elastic_weight,
        l_inel,
        c_inel,
        l_inel_total: l_inel_total?,
        c_inel_total: c_inel_total?,
        enhancement: 0.0,
    };
    r.enhancement = enhancement_factor(&r)?;
    Ok(r)
}
