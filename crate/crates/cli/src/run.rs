//! Spectrum evaluation for one configuration, by the selected method.

use cbs_core::atom::BlochSystem;
use cbs_core::disorder::oracle_average;
use cbs_core::pump_probe::{inelastic_densities, inelastic_totals};
use cbs_core::spectra::{compute, elastic_crossed, elastic_ladder, InelasticPath, SpectralFunctionGrid};
use rayon::prelude::*;

use crate::config::{Method, RunConfig};
use crate::CliError;

/// Relative tolerance of the pump-probe ω′ convolutions.
const PUMP_PROBE_REL: f64 = 1e-10;
/// Relative tolerance of the pump-probe whole-line totals.
const PUMP_PROBE_TOTAL_REL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Errors {
    pub l_el: f64,
    pub c_el: f64,
    pub l_inel: Vec<f64>,
    pub c_inel: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub nu: Vec<f64>,
    pub l_inel: Vec<f64>,
    pub c_inel: Vec<f64>,
    pub l_el: f64,
    pub c_el: f64,
    pub l_inel_total: f64,
    pub c_inel_total: f64,
    pub enhancement: f64,
    /// How the inelastic totals were obtained.
    pub totals_basis: &'static str,
    pub errors: Option<Errors>,
}

fn enhancement(l_el: f64, c_el: f64, l_tot: f64, c_tot: f64) -> f64 {
    1.0 + (c_el + c_tot) / (l_el + l_tot)
}

pub fn run(cfg: &RunConfig) -> Result<Spectrum, CliError> {
    cfg.validate()?;
    let p = cfg.params();
    let nu = cfg.grid();
    match cfg.method {
        Method::Analytic => {
            let r = compute(p, &nu, InelasticPath::Compact)?;
            Ok(Spectrum {
                nu,
                l_inel: r.l_inel.values,
                c_inel: r.c_inel.values,
                l_el: r.l_el,
                c_el: r.c_el,
                l_inel_total: r.l_inel_total,
                c_inel_total: r.c_inel_total,
                enhancement: r.enhancement,
                totals_basis: "whole real line",
                errors: None,
            })
        }
        Method::PumpProbe => {
            let sys = BlochSystem::build(p)?;
            let dens: Vec<(f64, f64)> = nu
                .par_iter()
                .map(|&x| inelastic_densities(p, x, PUMP_PROBE_REL))
                .collect::<Result<_, _>>()?;
            let (l_tot, c_tot) = inelastic_totals(p, PUMP_PROBE_TOTAL_REL)?;
            let (l_el, c_el) = (elastic_ladder(&sys)?, elastic_crossed(&sys)?);
            Ok(Spectrum {
                l_inel: dens.iter().map(|d| d.0).collect(),
                c_inel: dens.iter().map(|d| d.1).collect(),
                nu,
                l_el,
                c_el,
                l_inel_total: l_tot,
                c_inel_total: c_tot,
                enhancement: enhancement(l_el, c_el, l_tot, c_tot),
                totals_basis: "whole real line",
                errors: None,
            })
        }
        Method::Oracle => {
            let (mean, err) = oracle_average(p, &cfg.sampler()?, &nu)?;
            let trap = |v: &[f64]| -> Result<f64, CliError> { Ok(SpectralFunctionGrid::new(nu.clone(), v.to_vec(), 0.0)?.trapezoid()) };
            let (l_tot, c_tot) = (trap(&mean.l_inel)?, trap(&mean.c_inel)?);
            Ok(Spectrum {
                l_el: mean.l_el,
                c_el: mean.c_el,
                l_inel_total: l_tot,
                c_inel_total: c_tot,
                enhancement: enhancement(mean.l_el, mean.c_el, l_tot, c_tot),
                totals_basis: "trapezoid over the output grid",
                errors: Some(Errors { l_el: err.l_el, c_el: err.c_el, l_inel: err.l_inel, c_inel: err.c_inel }),
                l_inel: mean.l_inel,
                c_inel: mean.c_inel,
                nu,
            })
        }
    }
}
