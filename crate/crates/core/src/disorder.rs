//! Configuration averaging: selection of the exchange-process pairs that
//! survive the average, and Monte Carlo over random atomic positions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;

use crate::atom::AtomDriveParams;
use crate::error::{CbsError, Result};
use crate::linalg::{CVec, C64};
use crate::two_atom::{ChannelOrders, Process, ScatteringConfig, Tagged, TwoAtomGenerator, CH_CROSSED, CH_LADDER};

pub const MIN_X0: f64 = 50.0;
pub const MIN_PERIODS: usize = 8;
pub const MIN_SAMPLES: usize = 1000;

/// Random two-atom configurations: distance uniform on [x₀, x₀ + 2πm],
/// orientation uniform on the sphere, laser along +z, and a random common
/// offset of both atoms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfigSampler {
    pub x0: f64,
    pub periods: usize,
    pub samples: usize,
    pub seed: u64,
}

impl ConfigSampler {
    pub fn new(x0: f64, periods: usize, samples: usize, seed: u64) -> Result<Self> {
        if !(x0 >= MIN_X0) || periods < MIN_PERIODS || samples < MIN_SAMPLES {
            return Err(CbsError::Config(format!(
                "sampler needs x0 >= {MIN_X0}, m >= {MIN_PERIODS}, N >= {MIN_SAMPLES} (got {x0}, {periods}, {samples})"
            )));
        }
        Ok(ConfigSampler { x0, periods, samples, seed })
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + 2.0 * PI * self.periods as f64
    }

    /// Configuration number `i`; each index has its own random stream.
    pub fn sample(&self, i: usize) -> ScatteringConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let x = rng.random_range(self.x0..self.x_max());
        let axis: [f64; 3] = UnitSphere.sample(&mut rng);
        let offset: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
        ScatteringConfig::from_separation(x, axis, [0.0, 0.0, 1.0])
            .expect("positive separation")
            .translated(offset)
    }

    /// Window mean of |T(x)|² for x uniform on [x₀, x_max].
    pub fn window_mean_t2(&self) -> f64 {
        2.25 / (self.x0 * self.x_max())
    }
}

/// Sample means with standard errors, component-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
}

/// Plain Monte Carlo mean of a vector observable. Samples are evaluated in
/// parallel and reduced in index order.
pub fn monte_carlo_raw<F>(sampler: &ConfigSampler, f: F) -> Result<Estimate>
where
    F: Fn(&ScatteringConfig) -> Result<Vec<f64>> + Sync,
{
    let values: Vec<Vec<f64>> = (0..sampler.samples)
        .into_par_iter()
        .map(|i| f(&sampler.sample(i)))
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let dim = values.first().map_or(0, Vec::len);
    if values.iter().any(|v| v.len() != dim) {
        return Err(CbsError::Input("observable length varies between samples".into()));
    }
    let mut mean = vec![0.0; dim];
    for v in &values {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for v in &values {
        for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let std_err = var.iter().map(|s| (s / (n - 1.0)).sqrt() / n.sqrt()).collect();
    Ok(Estimate { mean, std_err })
}

/// Monte Carlo mean normalized by the window mean of 4|T|².
pub fn monte_carlo_average<F>(sampler: &ConfigSampler, f: F) -> Result<Estimate>
where
    F: Fn(&ScatteringConfig) -> Result<Vec<f64>> + Sync,
{
    let raw = monte_carlo_raw(sampler, f)?;
    let k = 4.0 * sampler.window_mean_t2();
    Ok(Estimate {
        mean: raw.mean.iter().map(|m| m / k).collect(),
        std_err: raw.std_err.iter().map(|s| s / k).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Ladder,
    Crossed,
}

impl Channel {
    /// Process pair surviving the average in this channel.
    pub fn surviving(self) -> (Process, Process) {
        match self {
            Channel::Ladder => (Process::P12, Process::P21c),
            Channel::Crossed => (Process::P12, Process::P12c),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Channel::Ladder => CH_LADDER,
            Channel::Crossed => CH_CROSSED,
        }
    }
}

/// One contribution with the exchange processes that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub order: usize,
    pub processes: Vec<Process>,
    pub value: C64,
}

impl Term {
    fn same_pair(&self, pair: (Process, Process)) -> bool {
        let p = &self.processes;
        p.len() == 2 && ((p[0] == pair.0 && p[1] == pair.1) || (p[0] == pair.1 && p[1] == pair.0))
    }
}

/// Flat term list of an order-tagged scalar.
pub fn terms_of(t: &Tagged<C64>) -> Vec<Term> {
    let mut out = vec![Term { order: 0, processes: vec![], value: t.o0 }];
    for p in Process::ALL {
        out.push(Term { order: 1, processes: vec![p], value: t.o1[p.index()] });
    }
    for p in Process::ALL {
        for q in Process::ALL {
            out.push(Term { order: 2, processes: vec![p, q], value: t.o2[p.index()][q.index()] });
        }
    }
    out
}

/// Flat term list of one resolvent channel, keeping the split by the order
/// of the initial condition.
pub fn channel_terms(c: &ChannelOrders) -> Vec<Term> {
    let mut out = vec![Term { order: 0, processes: vec![], value: c.o0 }];
    for p in Process::ALL {
        out.push(Term { order: 1, processes: vec![p], value: c.o1[p.index()] });
    }
    for split in &c.o2 {
        for p in Process::ALL {
            for q in Process::ALL {
                out.push(Term { order: 2, processes: vec![p, q], value: split[p.index()][q.index()] });
            }
        }
    }
    out
}

/// Terms surviving the configuration average in `channel`. Crossed terms
/// are multiplied by the backscattering phase e^{ik_L·r₁₂}.
pub fn select_surviving(terms: &[Term], channel: Channel, backscatter_phase: f64) -> Result<Vec<Term>> {
    if let Some(t) = terms.iter().find(|t| t.processes.len() != t.order) {
        return Err(CbsError::Untagged(format!("order-{} term with {} process tags", t.order, t.processes.len())));
    }
    let ph = match channel {
        Channel::Ladder => C64::new(1.0, 0.0),
        Channel::Crossed => C64::from_polar(1.0, backscatter_phase),
    };
    Ok(terms
        .iter()
        .filter(|t| t.order == 2 && t.same_pair(channel.surviving()))
        .map(|t| Term { value: t.value * ph, ..t.clone() })
        .collect())
}

fn selected_sum(terms: &[Term], channel: Channel, phase: f64) -> Result<C64> {
    Ok(select_surviving(terms, channel, phase)?.iter().map(|t| t.value).sum())
}

/// Spectral observables on a ν grid: elastic weights and inelastic densities.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpectra {
    pub nu: Vec<f64>,
    pub l_el: f64,
    pub c_el: f64,
    pub l_inel: Vec<f64>,
    pub c_inel: Vec<f64>,
}

impl ChannelSpectra {
    fn flatten(&self) -> Vec<f64> {
        let mut v = vec![self.l_el, self.c_el];
        v.extend(&self.l_inel);
        v.extend(&self.c_inel);
        v
    }

    fn unflatten(nu: &[f64], v: &[f64]) -> Self {
        let n = nu.len();
        ChannelSpectra {
            nu: nu.to_vec(),
            l_el: v[0],
            c_el: v[1],
            l_inel: v[2..2 + n].to_vec(),
            c_inel: v[2 + n..2 + 2 * n].to_vec(),
        }
    }
}

/// Selected second-order spectra of one configuration divided by 4|T|².
pub fn selected_spectra(gen: &TwoAtomGenerator, backscatter_phase: f64, nus: &[f64]) -> Result<ChannelSpectra> {
    let norm = 4.0 * gen.t.norm_sqr();
    let el = gen.elastic_orders()?;
    let l_el = selected_sum(&terms_of(&el.ladder), Channel::Ladder, backscatter_phase)?;
    let c_el = selected_sum(&terms_of(&el.crossed), Channel::Crossed, backscatter_phase)?;
    let pts = gen.fixed_config_spectrum(nus)?;
    let mut l_inel = Vec::with_capacity(nus.len());
    let mut c_inel = Vec::with_capacity(nus.len());
    for p in &pts {
        let l = selected_sum(&channel_terms(&p.ladder), Channel::Ladder, backscatter_phase)?;
        let c = selected_sum(&channel_terms(&p.crossed), Channel::Crossed, backscatter_phase)?;
        l_inel.push(l.re / PI / norm);
        c_inel.push(c.re / PI / norm);
    }
    Ok(ChannelSpectra { nu: nus.to_vec(), l_el: l_el.re / norm, c_el: c_el.re / norm, l_inel, c_inel })
}

/// Nonperturbative spectra of one configuration with the single-scattering
/// orders (zeroth and first in the coupling) removed. Elastic weights are
/// atom 2's ⟨σ₂⁺⟩⟨σ₂⁻⟩ and ⟨σ₂⁺⟩⟨σ₁⁻⟩e^{ik_L·r₁₂}; densities are
/// (1/π)Re of the Laplace-transformed fluctuation correlation.
pub fn remainder_spectra(params: AtomDriveParams, cfg: &ScatteringConfig, nus: &[f64]) -> Result<ChannelSpectra> {
    let gen = TwoAtomGenerator::assemble(cfg, params)?;
    let ph = C64::from_polar(1.0, cfg.backscatter_phase());
    let exact = gen.exact_steady_state()?;
    let q = gen.perturbative_orders()?;
    let low = |a: usize, b: usize| -> C64 {
        let mut s = q.o0[a] * q.o0[b];
        for p in 0..4 {
            s += q.o1[p][a] * q.o0[b] + q.o0[a] * q.o1[p][b];
        }
        s
    };
    let l_el = (exact[1] * exact[0] - low(1, 0)).re;
    let c_el = ((exact[1] * exact[3] - low(1, 3)) * ph).re;

    let ds_exact = TwoAtomGenerator::regression_initial_exact(&exact);
    let ds = TwoAtomGenerator::regression_initials(&q);
    let ds1: CVec = ds.o1.iter().fold(CVec::zeros(ds.o0.len()), |a, b| a + b);
    let v = gen.v_total();
    let mut l_inel = Vec::with_capacity(nus.len());
    let mut c_inel = Vec::with_capacity(nus.len());
    for &nu in nus {
        let z = C64::new(0.0, -nu);
        let full = gen.correlation_exact(z, &ds_exact)?;
        let r0 = gen.free_resolvent(z, &ds.o0)?;
        let r1 = gen.free_resolvent(z, &(&v * &r0 + &ds1))?;
        let rem = full - r0 - r1;
        l_inel.push(rem[CH_LADDER].re / PI);
        c_inel.push((rem[CH_CROSSED] * ph).re / PI);
    }
    Ok(ChannelSpectra { nu: nus.to_vec(), l_el, c_el, l_inel, c_inel })
}

/// Monte Carlo configuration average of [`remainder_spectra`], normalized
/// by the window mean of 4|T|², with standard errors.
pub fn oracle_average(params: AtomDriveParams, sampler: &ConfigSampler, nus: &[f64]) -> Result<(ChannelSpectra, ChannelSpectra)> {
    let est = monte_carlo_average(sampler, |cfg| Ok(remainder_spectra(params, cfg, nus)?.flatten()))?;
    Ok((ChannelSpectra::unflatten(nus, &est.mean), ChannelSpectra::unflatten(nus, &est.std_err)))
}
