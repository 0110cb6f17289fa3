//! Frequency integrals over chains of Green matrices.
//!
//! Expressions are sums of products of component extractions
//! `(F_1 F_2 … F_n b)_c`, where each factor is a constant matrix or a Green
//! matrix `G(a + s·i·ω_v)` of some Bloch system. Integrals over `ω_v/2π` are
//! evaluated exactly from the pole decomposition, or by adaptive quadrature.

use std::sync::Arc;

use crate::error::{CbsError, Result};
use crate::linalg::{green, green_direct, Mat3, SpectralDecomposition, Vec3, C64, I, ONE, ZERO};

/// Real frequency `c + s·ω_v` with `s ∈ {−1, 0, +1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Freq {
    pub c: f64,
    pub var: Option<(usize, f64)>,
}

impl Freq {
    pub const fn fixed(c: f64) -> Self {
        Freq { c, var: None }
    }

    pub const fn var(index: usize) -> Self {
        Freq { c: 0.0, var: Some((index, 1.0)) }
    }

    pub fn neg(self) -> Self {
        Freq {
            c: -self.c,
            var: self.var.map(|(v, s)| (v, -s)),
        }
    }

    pub fn add(self, o: Freq) -> Self {
        let var = match (self.var, o.var) {
            (None, v) | (v, None) => v,
            (Some((a, s)), Some((b, t))) if a == b && s + t == 0.0 => None,
            _ => panic!("frequency combination of two integration variables"),
        };
        Freq { c: self.c + o.c, var }
    }

    pub fn sub(self, o: Freq) -> Self {
        self.add(o.neg())
    }

    pub fn at(&self, vars: &[f64]) -> f64 {
        self.c + self.var.map_or(0.0, |(v, s)| s * vars[v])
    }
}

/// `G(offset + sign·i·ω_var)`.
#[derive(Clone, Debug)]
pub struct GreenFactor {
    pub sys: Arc<SpectralDecomposition>,
    pub offset: C64,
    pub var: usize,
    pub sign: f64,
}

#[derive(Clone, Debug)]
pub enum Factor {
    Mat(Mat3),
    Green(GreenFactor),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenEval {
    Projector,
    Direct,
}

impl GreenFactor {
    fn z(&self, vars: &[f64]) -> C64 {
        self.offset + I * self.sign * vars[self.var]
    }

    fn eval(&self, vars: &[f64], mode: GreenEval) -> Result<Mat3> {
        let z = self.z(vars);
        match mode {
            GreenEval::Projector => green(&self.sys, z),
            GreenEval::Direct => green_direct(&self.sys.matrix, z),
        }
    }
}

/// `F_1 F_2 … F_n b` with `factors[0]` leftmost.
#[derive(Clone, Debug)]
pub struct Chain {
    pub factors: Vec<Factor>,
    pub base: Vec3,
}

impl Chain {
    fn is_constant(&self) -> bool {
        self.factors.iter().all(|f| matches!(f, Factor::Mat(_)))
    }

    fn collapse(&mut self) {
        if self.is_constant() {
            let mut v = self.base;
            for f in self.factors.iter().rev() {
                if let Factor::Mat(m) = f {
                    v = m * v;
                }
            }
            self.base = v;
            self.factors.clear();
        }
    }

    fn eval(&self, vars: &[f64], mode: GreenEval) -> Result<Vec3> {
        let mut v = self.base;
        for f in self.factors.iter().rev() {
            v = match f {
                Factor::Mat(m) => m * v,
                Factor::Green(g) => g.eval(vars, mode)? * v,
            };
        }
        Ok(v)
    }
}

/// Component `comp` of a chain.
#[derive(Clone, Debug)]
pub struct ScalarFactor {
    pub comp: usize,
    pub chain: Chain,
}

#[derive(Clone, Debug)]
pub struct ScalarTerm {
    pub coeff: C64,
    pub scalars: Vec<ScalarFactor>,
}

#[derive(Clone, Debug, Default)]
pub struct ScalarExpr {
    pub terms: Vec<ScalarTerm>,
}

#[derive(Clone, Debug)]
pub struct VecTerm {
    pub coeff: C64,
    pub scalars: Vec<ScalarFactor>,
    pub chain: Chain,
}

#[derive(Clone, Debug, Default)]
pub struct VecExpr {
    pub terms: Vec<VecTerm>,
}

fn fold_constants(coeff: &mut C64, scalars: &mut Vec<ScalarFactor>) {
    scalars.retain(|s| {
        if s.chain.factors.is_empty() {
            *coeff *= s.chain.base[s.comp];
            false
        } else {
            true
        }
    });
}

impl VecExpr {
    pub fn constant(v: Vec3) -> Self {
        VecExpr {
            terms: vec![VecTerm {
                coeff: ONE,
                scalars: vec![],
                chain: Chain { factors: vec![], base: v },
            }],
        }
    }

    pub fn zero() -> Self {
        VecExpr::default()
    }

    /// Left-multiplies by a factor.
    pub fn apply(mut self, f: &Factor) -> Self {
        for t in &mut self.terms {
            t.chain.factors.insert(0, f.clone());
            t.chain.collapse();
        }
        self
    }

    pub fn apply_mat(self, m: &Mat3) -> Self {
        self.apply(&Factor::Mat(*m))
    }

    pub fn scale(mut self, c: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn add(mut self, o: VecExpr) -> Self {
        self.terms.extend(o.terms);
        self
    }

    pub fn sub(self, o: VecExpr) -> Self {
        self.add(o.scale(-ONE))
    }

    /// Multiplies by a scalar expression.
    pub fn times(&self, s: &ScalarExpr) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * s.terms.len());
        for a in &self.terms {
            for b in &s.terms {
                let mut scalars = a.scalars.clone();
                scalars.extend(b.scalars.iter().cloned());
                out.push(VecTerm {
                    coeff: a.coeff * b.coeff,
                    scalars,
                    chain: a.chain.clone(),
                });
            }
        }
        VecExpr { terms: out }
    }

    pub fn comp(&self, c: usize) -> ScalarExpr {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut coeff = t.coeff;
                let mut scalars = t.scalars.clone();
                scalars.push(ScalarFactor { comp: c, chain: t.chain.clone() });
                fold_constants(&mut coeff, &mut scalars);
                ScalarTerm { coeff, scalars }
            })
            .collect();
        ScalarExpr { terms }
    }

    pub fn eval(&self, vars: &[f64], mode: GreenEval) -> Result<Vec3> {
        let mut acc = Vec3::zeros();
        for t in &self.terms {
            let mut c = t.coeff;
            for s in &t.scalars {
                c *= s.chain.eval(vars, mode)?[s.comp];
            }
            acc += t.chain.eval(vars, mode)? * c;
        }
        Ok(acc)
    }

    /// Value of a variable-free expression.
    pub fn constant_value(&self) -> Option<Vec3> {
        let mut acc = Vec3::zeros();
        for t in &self.terms {
            if !t.scalars.is_empty() || !t.chain.factors.is_empty() {
                return None;
            }
            acc += t.chain.base * t.coeff;
        }
        Some(acc)
    }
}

impl ScalarExpr {
    pub fn constant(c: C64) -> Self {
        ScalarExpr {
            terms: vec![ScalarTerm { coeff: c, scalars: vec![] }],
        }
    }

    pub fn zero() -> Self {
        ScalarExpr::default()
    }

    pub fn scale(mut self, c: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn add(mut self, o: ScalarExpr) -> Self {
        self.terms.extend(o.terms);
        self
    }

    pub fn sub(self, o: ScalarExpr) -> Self {
        self.add(o.scale(-ONE))
    }

    pub fn mul(&self, o: &ScalarExpr) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                let mut scalars = a.scalars.clone();
                scalars.extend(b.scalars.iter().cloned());
                out.push(ScalarTerm { coeff: a.coeff * b.coeff, scalars });
            }
        }
        ScalarExpr { terms: out }
    }

    pub fn eval(&self, vars: &[f64], mode: GreenEval) -> Result<C64> {
        let mut acc = ZERO;
        for t in &self.terms {
            let mut c = t.coeff;
            for s in &t.scalars {
                c *= s.chain.eval(vars, mode)?[s.comp];
            }
            acc += c;
        }
        Ok(acc)
    }

    pub fn constant_value(&self) -> Option<C64> {
        let mut acc = ZERO;
        for t in &self.terms {
            if !t.scalars.is_empty() {
                return None;
            }
            acc += t.coeff;
        }
        Some(acc)
    }

    pub fn value(&self) -> Result<C64> {
        self.eval(&[], GreenEval::Projector)
    }

    /// Exact `∫dω_var/2π` by residues in the upper half plane.
    pub fn integrate(&self, var: usize) -> Result<ScalarExpr> {
        let mut out = Vec::new();
        for t in &self.terms {
            integrate_term(t, var, &mut out)?;
        }
        Ok(ScalarExpr { terms: out })
    }
}

/// Distance from the real axis below which a pole is rejected.
pub const AXIS_TOL: f64 = 1e-9;

fn integrate_term(t: &ScalarTerm, var: usize, out: &mut Vec<ScalarTerm>) -> Result<()> {
    let mut slots = Vec::new();
    for (si, s) in t.scalars.iter().enumerate() {
        for (fi, f) in s.chain.factors.iter().enumerate() {
            if let Factor::Green(g) = f {
                if g.var == var {
                    slots.push((si, fi, g.clone()));
                }
            }
        }
    }
    if slots.is_empty() {
        if t.coeff == ZERO {
            return Ok(());
        }
        return Err(CbsError::NonDecaying);
    }
    // Factor 1/(a + s·i·ω − λ) = (−i·s)/(ω − p), p = −i·s·(λ − a).
    // Newton term j of a slot contributes poles p_0..p_j.
    let mut poles = Vec::with_capacity(slots.len());
    for (_, _, g) in &slots {
        let ps: Vec<C64> = g
            .sys
            .eigenvalues
            .iter()
            .map(|l| -I * g.sign * (l - g.offset))
            .collect();
        for p in &ps {
            if p.im.abs() < AXIS_TOL {
                return Err(CbsError::PoleProximity {
                    z: format!("{p}"),
                    dist: p.im.abs(),
                });
            }
        }
        poles.push(ps);
    }
    let m = slots.len();
    let mut idx = vec![0usize; m];
    let mut ps = Vec::with_capacity(3 * m);
    loop {
        ps.clear();
        let mut pref = ONE;
        for (f, (_, _, g)) in slots.iter().enumerate() {
            for p in &poles[f][..=idx[f]] {
                ps.push(*p);
                pref *= -I * g.sign;
            }
        }
        let weight = pref * pole_product_integral(&ps);
        if weight != ZERO {
            let mut nt = t.clone();
            nt.coeff *= weight;
            for (f, (si, fi, g)) in slots.iter().enumerate() {
                nt.scalars[*si].chain.factors[*fi] = Factor::Mat(g.sys.newton[idx[f]]);
            }
            for s in &mut nt.scalars {
                s.chain.collapse();
            }
            let mut coeff = nt.coeff;
            fold_constants(&mut coeff, &mut nt.scalars);
            nt.coeff = coeff;
            out.push(nt);
        }
        let mut k = 0;
        loop {
            if k == m {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < 3 {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `∫dω/2π Π_f 1/(ω − p_f)` for poles off the real axis. A single factor
/// is taken as a symmetric principal value.
pub fn pole_product_integral(poles: &[C64]) -> C64 {
    if poles.len() == 1 {
        return I * 0.5 * poles[0].im.signum();
    }
    let upper: Vec<C64> = poles.iter().copied().filter(|p| p.im > 0.0).collect();
    if upper.is_empty() {
        return ZERO;
    }
    let lower: Vec<C64> = poles.iter().copied().filter(|p| p.im < 0.0).collect();
    I * divided_difference_of_product(&upper, &lower)
}

/// Divided difference `h[x_0, …, x_n]` of `h(ω) = Π_l 1/(ω − q_l)`, valid for
/// repeated nodes.
fn divided_difference_of_product(x: &[C64], q: &[C64]) -> C64 {
    let n = x.len();
    // table[i][j] = h[x_i..x_j]
    let mut table = vec![vec![ZERO; n]; n];
    for i in 0..n {
        table[i][i] = ONE;
    }
    for &ql in q {
        // g[x_i..x_j] = (−1)^{j−i} Π_{m=i..j} 1/(x_m − q)
        let mut g = vec![vec![ZERO; n]; n];
        for i in 0..n {
            let mut acc = ONE;
            for j in i..n {
                acc /= x[j] - ql;
                g[i][j] = if (j - i) % 2 == 0 { acc } else { -acc };
            }
        }
        let mut next = vec![vec![ZERO; n]; n];
        for i in 0..n {
            for j in i..n {
                let mut s = ZERO;
                for r in i..=j {
                    s += table[i][r] * g[r][j];
                }
                next[i][j] = s;
            }
        }
        table = next;
    }
    table[0][n - 1]
}

pub mod quad {
    //! Adaptive Gauss–Kronrod quadrature for complex integrands.

    use super::*;

    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];

    fn gk15<F: FnMut(f64) -> Result<C64>>(f: &mut F, a: f64, b: f64) -> Result<(C64, f64)> {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        let fc = f(m)?;
        let mut k = fc * WGK[7];
        let mut g = fc * WG[3];
        for j in 0..7 {
            let x = h * XGK[j];
            let s = f(m - x)? + f(m + x)?;
            k += s * WGK[j];
            if j % 2 == 1 {
                g += s * WG[j / 2];
            }
        }
        Ok((k * h, ((k - g) * h).norm()))
    }

    /// `∫_a^b f` to absolute tolerance `abs` or relative tolerance `rel`.
    pub fn adaptive<F: FnMut(f64) -> Result<C64>>(
        mut f: F,
        a: f64,
        b: f64,
        abs: f64,
        rel: f64,
    ) -> Result<C64> {
        let mut pieces: Vec<(f64, f64, C64, f64)> = Vec::new();
        let n0 = 16;
        for i in 0..n0 {
            let x0 = a + (b - a) * i as f64 / n0 as f64;
            let x1 = a + (b - a) * (i + 1) as f64 / n0 as f64;
            let (v, e) = gk15(&mut f, x0, x1)?;
            pieces.push((x0, x1, v, e));
        }
        for _ in 0..20_000 {
            let total: C64 = pieces.iter().map(|p| p.2).sum();
            let err: f64 = pieces.iter().map(|p| p.3).sum();
            if err <= abs.max(rel * total.norm()) {
                return Ok(total);
            }
            let (k, _) = pieces
                .iter()
                .enumerate()
                .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
                .unwrap();
            let (x0, x1, _, _) = pieces.swap_remove(k);
            let xm = 0.5 * (x0 + x1);
            let (v1, e1) = gk15(&mut f, x0, xm)?;
            let (v2, e2) = gk15(&mut f, xm, x1)?;
            pieces.push((x0, xm, v1, e1));
            pieces.push((xm, x1, v2, e2));
        }
        Ok(pieces.iter().map(|p| p.2).sum())
    }

    /// `∫_{−∞}^{∞} f(ω) dω/2π`: adaptive on `|ω| ≤ window`, tails mapped by
    /// `u = 1/ω` and paired symmetrically.
    pub fn real_line<F: FnMut(f64) -> Result<C64>>(
        mut f: F,
        window: f64,
        abs: f64,
        rel: f64,
    ) -> Result<C64> {
        let core = adaptive(&mut f, -window, window, abs, rel)?;
        let tail = adaptive(
            |u: f64| Ok((f(1.0 / u)? + f(-1.0 / u)?) / (u * u)),
            0.0,
            1.0 / window,
            abs,
            rel,
        )?;
        Ok((core + tail) / (2.0 * std::f64::consts::PI))
    }
}

/// Quadrature evaluation of `∫dω_var/2π` of an expression whose remaining
/// variables take the values in `vars`. Green factors are inverted directly.
pub fn integrate_quadrature(
    e: &ScalarExpr,
    var: usize,
    vars: &[f64],
    window: f64,
    rel: f64,
) -> Result<C64> {
    let mut v = vars.to_vec();
    if v.len() <= var {
        v.resize(var + 1, 0.0);
    }
    quad::real_line(
        |w| {
            v[var] = w;
            e.eval(&v, GreenEval::Direct)
        },
        window,
        1e-15,
        rel,
    )
}

/// `∫∫dω_0/2π dω_1/2π` by nested quadrature.
pub fn integrate_quadrature_2d(e: &ScalarExpr, window: f64, rel: f64) -> Result<C64> {
    quad::real_line(
        |w0| integrate_quadrature(e, 1, &[w0, 0.0], window, rel).map(|x| x * 2.0 * std::f64::consts::PI),
        window,
        1e-14,
        rel,
    )
    .map(|x| x / (2.0 * std::f64::consts::PI))
}

/// Shorthand for building Green factors of one system.
#[derive(Clone, Debug)]
pub struct GreenBuilder {
    pub sys: Arc<SpectralDecomposition>,
}

impl GreenBuilder {
    pub fn new(sys: Arc<SpectralDecomposition>) -> Self {
        GreenBuilder { sys }
    }

    /// `G(k·i·w)`; constant when `w` carries no variable.
    pub fn at(&self, k: f64, w: Freq) -> Result<Factor> {
        self.shifted(ZERO, k, w)
    }

    /// `G(a + k·i·w)`.
    pub fn shifted(&self, a: C64, k: f64, w: Freq) -> Result<Factor> {
        let offset = a + I * k * w.c;
        match w.var {
            Some((v, s)) if s * k != 0.0 => Ok(Factor::Green(GreenFactor {
                sys: self.sys.clone(),
                offset,
                var: v,
                sign: s * k,
            })),
            _ => Ok(Factor::Mat(green(&self.sys, offset)?)),
        }
    }
}

pub mod sum_rules {
    //! The three sum rules with random constant insertions.

    use super::*;
    use crate::linalg::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random constant insertions standing in for the elided factors.
    pub struct Insertions {
        pub mats: Vec<Mat3>,
        pub vecs: Vec<Vec3>,
    }

    impl Insertions {
        pub fn random(seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cz = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let mats = (0..6).map(|_| Mat3::from_fn(|_, _| cz())).collect();
            let vecs = (0..4).map(|_| Vec3::from_fn(|_, _| cz())).collect();
            Insertions { mats, vecs }
        }
    }

    fn chain(factors: Vec<Factor>, base: Vec3) -> VecExpr {
        let mut e = VecExpr::constant(base);
        for f in factors.iter().rev() {
            e = e.apply(f);
        }
        e
    }

    fn row(v: &Vec3) -> Factor {
        Factor::Mat(Mat3::from_fn(|i, j| if i == 0 { v[j] } else { ZERO }))
    }

    /// Rule I for systems `s1`, `s2` at imaginary `z`; returns (LHS, RHS).
    pub fn rule_one(
        s1: &Arc<SpectralDecomposition>,
        s2: &Arc<SpectralDecomposition>,
        z: C64,
        ins: &Insertions,
    ) -> Result<(C64, C64)> {
        let g1 = GreenBuilder::new(s1.clone());
        let g2 = GreenBuilder::new(s2.clone());
        let w = Freq::var(0);
        let half = z / 2.0;
        let x1 = Factor::Mat(ins.mats[0]);
        let x2 = Factor::Mat(ins.mats[1]);
        let y1 = Factor::Mat(ins.mats[2]);
        let y2 = Factor::Mat(ins.mats[3]);
        let (u1, v1, u2, v2) = (row(&ins.vecs[0]), ins.vecs[1], row(&ins.vecs[2]), ins.vecs[3]);
        let g1w = g1.shifted(half, 1.0, w)?;
        let g2w = g2.shifted(half, -1.0, w)?;
        let g10 = g1.at(1.0, Freq::fixed(0.0))?;
        let g2z = Factor::Mat(green(s2, z)?);
        let a1 = chain(vec![u1.clone(), x1.clone(), g1w.clone(), x2.clone()], v1).comp(0);
        let b1 = chain(vec![u2.clone(), y1.clone(), g2w.clone(), g2z.clone(), y2.clone()], v2).comp(0);
        let a2 = chain(vec![u1.clone(), x1.clone(), g1w, g10.clone(), x2.clone()], v1).comp(0);
        let b2 = chain(vec![u2.clone(), y1.clone(), g2w, y2.clone()], v2).comp(0);
        let lhs = a1.mul(&b1).add(a2.mul(&b2)).integrate(0)?.value()?;
        let ra = chain(vec![u1, x1, g10, x2], v1).comp(0).value()?;
        let rb = chain(vec![u2, y1, g2z, y2], v2).comp(0).value()?;
        Ok((lhs, ra * rb))
    }

    /// Rule II; returns (double integral, single integral) as expressions
    /// before integration, in variables ω′ = 0 and ω″ = 1.
    pub fn rule_two_exprs(
        s1: &Arc<SpectralDecomposition>,
        s2: &Arc<SpectralDecomposition>,
        omega: f64,
        ins: &Insertions,
    ) -> Result<(ScalarExpr, ScalarExpr)> {
        let g1 = GreenBuilder::new(s1.clone());
        let g2 = GreenBuilder::new(s2.clone());
        let wp = Freq::var(0);
        let wpp = Freq::var(1);
        let m = |k: usize| Factor::Mat(ins.mats[k]);
        let (u1, v1, u2, v2) = (row(&ins.vecs[0]), ins.vecs[1], row(&ins.vecs[2]), ins.vecs[3]);
        let half = Freq::fixed(-omega / 2.0);
        let lhs1 = chain(
            vec![u1.clone(), m(0), g1.at(1.0, half.add(wpp))?, g1.at(1.0, wp)?, m(1)],
            v1,
        )
        .comp(0);
        let lhs2 = chain(
            vec![u2.clone(), m(2), g2.at(1.0, half.sub(wpp))?, m(3), g2.at(-1.0, wp)?, m(4)],
            v2,
        )
        .comp(0);
        let rhs1 = chain(vec![u1, m(0), g1.at(1.0, wp)?, m(1)], v1).comp(0);
        let rhs2 = chain(
            vec![u2, m(2), g2.at(1.0, Freq::fixed(-omega).sub(wp))?, m(3), g2.at(-1.0, wp)?, m(4)],
            v2,
        )
        .comp(0);
        Ok((lhs1.mul(&lhs2), rhs1.mul(&rhs2)))
    }

    /// Rule II by residues; returns (LHS, RHS).
    pub fn rule_two(
        s1: &Arc<SpectralDecomposition>,
        s2: &Arc<SpectralDecomposition>,
        omega: f64,
        ins: &Insertions,
    ) -> Result<(C64, C64)> {
        let (l, r) = rule_two_exprs(s1, s2, omega, ins)?;
        let lhs = l.integrate(1)?.integrate(0)?.value()?;
        let rhs = r.integrate(0)?.value()?;
        Ok((lhs, rhs))
    }

    /// Rule III with the pair `G(a + iω′)…G(a − iω′)`, `a = (z₁ + z₂)/2`;
    /// returns (LHS, RHS). For `z₁ + z₂ = 0` this is the unshifted form.
    pub fn rule_three(
        s: &Arc<SpectralDecomposition>,
        z1: C64,
        z2: C64,
        ins: &Insertions,
    ) -> Result<(C64, C64)> {
        rule_three_shifted(s, z1, z2, (z1 + z2) / 2.0, ins)
    }

    /// Rule III with an explicit shift `a` on both ω′-dependent factors.
    pub fn rule_three_shifted(
        s: &Arc<SpectralDecomposition>,
        z1: C64,
        z2: C64,
        a: C64,
        ins: &Insertions,
    ) -> Result<(C64, C64)> {
        let g = GreenBuilder::new(s.clone());
        let w = Freq::var(0);
        let m = |k: usize| Factor::Mat(ins.mats[k]);
        let (u, v) = (row(&ins.vecs[0]), ins.vecs[1]);
        let gz1 = Factor::Mat(green(s, z1)?);
        let gz2 = Factor::Mat(green(s, z2)?);
        let gp = g.shifted(a, 1.0, w)?;
        let gm = g.shifted(a, -1.0, w)?;
        let l1 = chain(vec![u.clone(), m(0), gz1.clone(), gp.clone(), m(1), gm.clone(), m(2)], v).comp(0);
        let l2 = chain(vec![u.clone(), m(0), gp, m(1), gz2.clone(), gm, m(2)], v).comp(0);
        let lhs = l1.add(l2).integrate(0)?.value()?;
        let rhs = chain(vec![u, m(0), gz1, m(1), gz2, m(2)], v).comp(0).value()?;
        Ok((lhs, rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eigen_decompose};

    fn sys(o: f64, d: f64) -> Arc<SpectralDecomposition> {
        let oc = c(o, 0.0);
        let m = Mat3::new(
            c(-1.0, d), ZERO, -I * oc / 2.0,
            ZERO, c(-1.0, -d), I * oc / 2.0,
            -I * oc, I * oc, c(-2.0, 0.0),
        );
        Arc::new(eigen_decompose(&m).unwrap())
    }

    #[test]
    fn textbook_pair() {
        let (l, m) = (c(-1.0, 0.3), c(-0.5, -2.0));
        // (iω − λ)^{-1} (−iω − μ)^{-1} = (−i)(i)/((ω + iλ)(ω − iμ))
        let v = pole_product_integral(&[-I * l, I * m]);
        assert!((v - (-1.0 / (l + m))).norm() < 1e-14);
    }

    #[test]
    fn double_pole_matches_limit() {
        let p = c(0.2, 0.7);
        let q = c(-0.4, -1.1);
        let exact = pole_product_integral(&[p, p, q]);
        let eps = 1e-5;
        let near = pole_product_integral(&[p, p + c(eps, 0.0), q]);
        assert!((exact - near).norm() < 1e-4);
        // ∫ 1/((ω−p)²(ω−q)) dω/2π = i · d/dω[1/(ω−q)] at p
        let expect = I * (-1.0 / ((p - q) * (p - q)));
        assert!((exact - expect).norm() < 1e-14);
    }

    #[test]
    fn green_cross_representation() {
        let s1 = sys(1.3, 0.7);
        let s2 = sys(2.0, -0.4);
        let g1 = GreenBuilder::new(s1.clone());
        let g2 = GreenBuilder::new(s2.clone());
        let a = Vec3::new(c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0));
        let b = Vec3::new(c(0.2, 0.0), c(-1.0, 0.3), c(0.0, 0.0));
        let w = Freq::var(0);
        let e1 = VecExpr::constant(a).apply(&g1.at(1.0, w).unwrap());
        let e2 = VecExpr::constant(b).apply(&g2.at(-1.0, w).unwrap());
        let m1 = s1.matrix;
        let m2 = s2.matrix;
        let mx = crate::linalg::kron(&crate::linalg::to_dyn(&m1), &crate::linalg::identity(3))
            + crate::linalg::kron(&crate::linalg::identity(3), &crate::linalg::to_dyn(&m2));
        let gx = -crate::linalg::inverse(&mx).unwrap();
        let ab = crate::linalg::kron3(&a, &b);
        let direct = gx * ab;
        for i in 0..3 {
            for j in 0..3 {
                let v = e1.comp(i).mul(&e2.comp(j)).integrate(0).unwrap().value().unwrap();
                assert!((v - direct[3 * i + j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn residue_equals_quadrature() {
        let s = sys(2.0, 1.0);
        let g = GreenBuilder::new(s.clone());
        let w = Freq::var(0);
        let v = Vec3::new(c(0.3, 0.1), c(-0.2, 0.4), c(1.0, 0.0));
        let e = VecExpr::constant(v)
            .apply(&g.shifted(c(0.0, 0.5), -1.0, w).unwrap())
            .apply(&g.at(1.0, w).unwrap())
            .apply(&g.at(1.0, w).unwrap())
            .comp(1);
        let r = e.integrate(0).unwrap().value().unwrap();
        let q = integrate_quadrature(&e, 0, &[], 200.0, 1e-12).unwrap();
        assert!((r - q).norm() < 1e-10 * (1.0 + r.norm()), "{r} {q}");
    }
}
