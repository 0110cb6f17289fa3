//! Validation suites run by `cbs validate`.

use std::f64::consts::PI;

use cbs_core::atom::{AtomDriveParams, BlochSystem};
use cbs_core::disorder::{oracle_average, selected_spectra, ConfigSampler};
use cbs_core::integrals::quad;
use cbs_core::integrals::sum_rules::{self, Insertions};
use cbs_core::linalg::{C64, I};
use cbs_core::pump_probe::equivalence_report;
use cbs_core::spectra::*;
use cbs_core::two_atom::{ScatteringConfig, TwoAtomGenerator};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    SumRules,
    Equivalence,
    Oracle,
    Physics,
}

impl Suite {
    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::SumRules => 1e-10,
            Suite::Equivalence => 1e-6,
            Suite::Oracle => 1e-8,
            Suite::Physics => 1e-6,
        }
    }
}

/// One named check: measured deviation against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound }
    }

    pub fn pass(&self) -> bool {
        self.value <= self.bound
    }
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn sys(o: f64, d: f64) -> Result<BlochSystem, CliError> {
    Ok(BlochSystem::build(AtomDriveParams::new(o, d))?)
}

const GRID: [(f64, f64); 9] = [
    (0.5, 0.0), (0.5, 1.0), (0.5, 3.0),
    (2.0, 0.0), (2.0, 1.0), (2.0, 3.0),
    (5.0, 0.0), (5.0, 1.0), (5.0, 3.0),
];

pub fn run(suite: Suite, tol: f64) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::SumRules => sum_rule_checks(tol),
        Suite::Equivalence => equivalence_checks(tol),
        Suite::Oracle => oracle_checks(tol),
        Suite::Physics => physics_checks(tol),
    }
}

fn sum_rule_checks(tol: f64) -> Result<Vec<Check>, CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(17);
    let random = |r: &mut ChaCha8Rng| -> Result<BlochSystem, CliError> {
        let p = AtomDriveParams::new(r.random_range(0.1..6.0), r.random_range(-4.0..4.0)).with_phase(r.random_range(0.0..2.0 * PI));
        Ok(BlochSystem::build(p)?)
    };
    let mut worst = [0.0f64; 3];
    for k in 0..20 {
        let (s1, s2) = (random(&mut r)?, random(&mut r)?);
        let ins = Insertions::random(k);
        let (a, b) = sum_rules::rule_one(&s1.decomp, &s2.decomp, I * r.random_range(-6.0..6.0), &ins)?;
        worst[0] = worst[0].max(rel(a, b));
        let (a, b) = sum_rules::rule_two(&s1.decomp, &s2.decomp, r.random_range(-8.0..8.0), &ins)?;
        worst[1] = worst[1].max(rel(a, b));
        let w = r.random_range(-6.0..6.0);
        let (a, b) = sum_rules::rule_three(&s1.decomp, I * w, -I * w, &ins)?;
        worst[2] = worst[2].max(rel(a, b));
    }
    Ok(vec![
        Check::new("rule I (20 draws)", worst[0], tol),
        Check::new("rule II (20 draws)", worst[1], tol),
        Check::new("rule III (20 draws)", worst[2], tol),
    ])
}

fn equivalence_checks(tol: f64) -> Result<Vec<Check>, CliError> {
    let rows = equivalence_report(&[0.5, 2.0, 5.0], &[0.0, 1.0, 3.0], &[-5.0, 0.0, 3.0], &grid(601, -15.0, 15.0))?;
    Ok(rows
        .iter()
        .map(|r| {
            Check::new(
                format!("rabi={} detuning={} omega'={}", r.params.rabi, r.params.delta, r.omega_p),
                r.max(),
                tol,
            )
        })
        .collect())
}

fn oracle_checks(tol: f64) -> Result<Vec<Check>, CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(23);
    let nus = grid(9, -8.0, 8.0);
    let mut out = Vec::new();
    for (o, d) in [(0.5, 0.0), (2.0, 0.0), (5.0, 3.0)] {
        let p = AtomDriveParams::new(o, d);
        let s = BlochSystem::build(p)?;
        let axis: [f64; 3] = UnitSphere.sample(&mut r);
        let cfg = ScatteringConfig::from_separation(r.random_range(20.0..400.0), axis, [0.0, 0.0, 1.0])?;
        let g = TwoAtomGenerator::assemble(&cfg, p)?;
        let sel = selected_spectra(&g, cfg.backscatter_phase(), &nus)?;
        let dev = |a: f64, b: f64| (a - b).abs() / b.abs();
        let mut worst = dev(sel.l_el, elastic_ladder(&s)?).max(dev(sel.c_el, elastic_crossed(&s)?));
        for (k, &nu) in nus.iter().enumerate() {
            worst = worst.max(dev(sel.l_inel[k], inelastic_ladder_at(&s, nu)?));
            worst = worst.max(dev(sel.c_inel[k], inelastic_crossed_at(&s, nu)?));
        }
        out.push(Check::new(format!("fixed configuration rabi={o} detuning={d}"), worst, tol));
    }
    // configuration average: deviation in units of max(3σ, 1e-2 |closed form|)
    let p = AtomDriveParams::new(2.0, 0.0);
    let s = BlochSystem::build(p)?;
    let nus = grid(7, -6.0, 6.0);
    let (mean, err) = oracle_average(p, &ConfigSampler::new(200.0, 8, 10_000, 2024)?, &nus)?;
    let band = |m: f64, e: f64, c: f64| (m - c).abs() / (3.0 * e).max(1e-2 * c.abs());
    let mut worst = band(mean.l_el, err.l_el, elastic_ladder(&s)?).max(band(mean.c_el, err.c_el, elastic_crossed(&s)?));
    for (k, &nu) in nus.iter().enumerate() {
        worst = worst.max(band(mean.l_inel[k], err.l_inel[k], inelastic_ladder_at(&s, nu)?));
        worst = worst.max(band(mean.c_inel[k], err.c_inel[k], inelastic_crossed_at(&s, nu)?));
    }
    out.push(Check::new("configuration average rabi=2 (fraction of allowed band)", worst, 1.0));
    Ok(out)
}

fn physics_checks(tol: f64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let mut mollow_neg: f64 = 0.0;
    let mut norm: f64 = 0.0;
    let mut ladder_neg: f64 = 0.0;
    let mut enh_out: f64 = 0.0;
    for (o, d) in GRID {
        let s = sys(o, d)?;
        let nus = grid(121, -15.0, 15.0);
        for &nu in &nus {
            mollow_neg = mollow_neg.max(-s.mollow_p0(nu)?);
            ladder_neg = ladder_neg.max(-inelastic_ladder_at(&s, nu)?);
        }
        let want = s.population() - s.steady_state()[0].norm_sqr();
        let got = quad::real_line(|nu| Ok(C64::new(s.mollow_p0(nu)?, 0.0)), o + 20.0, 1e-14, 1e-12)?.re * 2.0 * PI;
        norm = norm.max((got - want).abs());
        let r = compute(AtomDriveParams::new(o, d), &[0.0], InelasticPath::Compact)?;
        enh_out = enh_out.max((1.0 - r.enhancement).max(r.enhancement - 2.0));
    }
    out.push(Check::new("Mollow spectrum non-negative (max negative part)", mollow_neg.max(0.0), 1e-12));
    out.push(Check::new("Mollow normalization", norm, tol));
    out.push(Check::new("inelastic ladder non-negative (max negative part)", ladder_neg.max(0.0), 1e-10));
    out.push(Check::new("enhancement within [1, 2] (max excursion)", enh_out.max(0.0), tol));
    Ok(out)
}
