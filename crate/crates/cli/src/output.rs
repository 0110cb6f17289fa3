//! CSV, JSON and plot-script writers. CSV floats carry 17 significant
//! digits; JSON numbers use the shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{num, Format, RunConfig};
use crate::run::Spectrum;
use crate::CliError;

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn f(x: f64) -> Value {
    json!(x)
}

fn params(cfg: &RunConfig) -> Value {
    Value::Object(cfg.echo().into_iter().map(|(k, v)| (k, Value::String(v))).collect::<Map<_, _>>())
}

fn weights(s: &Spectrum) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("L_el".into(), f(s.l_el));
    m.insert("C_el".into(), f(s.c_el));
    m.insert("L_inel_total".into(), f(s.l_inel_total));
    m.insert("C_inel_total".into(), f(s.c_inel_total));
    m.insert("enhancement".into(), f(s.enhancement));
    m.insert("totals_basis".into(), Value::String(s.totals_basis.into()));
    if let Some(e) = &s.errors {
        m.insert("L_el_err".into(), f(e.l_el));
        m.insert("C_el_err".into(), f(e.c_el));
    }
    m
}

pub fn csv_text(cfg: &RunConfig, s: &Spectrum) -> String {
    let mut out = String::new();
    for (k, v) in cfg.echo() {
        writeln!(out, "# {k}={v}").unwrap();
    }
    out.push_str(if s.errors.is_some() { "nu,L_inel,C_inel,L_inel_err,C_inel_err\n" } else { "nu,L_inel,C_inel\n" });
    for k in 0..s.nu.len() {
        write!(out, "{},{},{}", num(s.nu[k]), num(s.l_inel[k]), num(s.c_inel[k])).unwrap();
        if let Some(e) = &s.errors {
            write!(out, ",{},{}", num(e.l_inel[k]), num(e.c_inel[k])).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn plot_script(csv: &str) -> String {
    format!(
        "# gnuplot; run from the directory holding {csv}\n\
         set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set key autotitle columnhead\n\
         set xlabel 'nu / gamma'\n\
         set ylabel 'spectral density'\n\
         plot '{csv}' using 1:2 with lines, '' using 1:3 with lines\n"
    )
}

/// Writes the output set for one configuration and returns the paths.
pub fn write_spectrum(cfg: &RunConfig, s: &Spectrum) -> Result<Vec<PathBuf>, CliError> {
    let json_path = with_ext(&cfg.output, "json");
    match cfg.format {
        Format::Csv => {
            let csv_path = with_ext(&cfg.output, "csv");
            let gp_path = with_ext(&cfg.output, "gp");
            write(&csv_path, &csv_text(cfg, s))?;
            let mut side = Map::new();
            side.insert("parameters".into(), params(cfg));
            side.insert("data".into(), Value::String(file_name(&csv_path)));
            side.extend(weights(s));
            write(&json_path, &(serde_json::to_string_pretty(&Value::Object(side)).unwrap() + "\n"))?;
            write(&gp_path, &plot_script(&file_name(&csv_path)))?;
            Ok(vec![csv_path, json_path, gp_path])
        }
        Format::Json => {
            let mut all = Map::new();
            all.insert("parameters".into(), params(cfg));
            all.extend(weights(s));
            all.insert("nu".into(), json!(s.nu));
            all.insert("L_inel".into(), json!(s.l_inel));
            all.insert("C_inel".into(), json!(s.c_inel));
            if let Some(e) = &s.errors {
                all.insert("L_inel_err".into(), json!(e.l_inel));
                all.insert("C_inel_err".into(), json!(e.c_inel));
            }
            write(&json_path, &(serde_json::to_string_pretty(&Value::Object(all)).unwrap() + "\n"))?;
            Ok(vec![json_path])
        }
    }
}

/// Sweep summary: one row per parameter point, in input order.
pub fn write_summary(dir: &Path, rows: &[(RunConfig, Spectrum)]) -> Result<PathBuf, CliError> {
    let mut out = String::new();
    if let Some((cfg, _)) = rows.first() {
        for (k, v) in cfg.echo().into_iter().filter(|(k, _)| k != "rabi" && k != "detuning") {
            writeln!(out, "# {k}={v}").unwrap();
        }
    }
    out.push_str("rabi,detuning,L_el,C_el,L_inel_total,C_inel_total,enhancement,data\n");
    for (cfg, s) in rows {
        let data = cfg.output.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(cfg.rabi),
            num(cfg.detuning),
            num(s.l_el),
            num(s.c_el),
            num(s.l_inel_total),
            num(s.c_inel_total),
            num(s.enhancement),
            data
        )
        .unwrap();
    }
    let path = dir.join("summary.csv");
    write(&path, &out)?;
    Ok(path)
}
