use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::commands::{assess, dispatch, pipeline_manifest, run_pipeline, Ctx};
use crate::error::{CliError, CliResult};
use crate::manifest::{
    AxisChoice, Command, FourCatSection, Manifest, Range, StageSection, SweepSection,
    SystemSection, TargetSection,
};
use crate::output::{num, with_pool, Report, Sink};

pub const CATALOG: &[&str] = &[
    "fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig2g", "fig2h", "fig2i", "fig2j",
    "fig3a", "fig3b", "fig3c", "fig3d", "fig4b", "figS1a", "figS1b", "figS1c", "figS2a", "figS2b",
    "figS2c", "figS2d", "figS3a", "figS3b", "figS4", "figS5a", "figS5b", "figS5c", "figS5d",
    "figS6a", "figS6b", "figS6c", "figS6d", "figS6e", "figS6f",
];

/// Homodyne efficiency held fixed while η varies along `Γ = η + μ`.
pub const FIG3_MU: f64 = 0.8;
pub const FIG3_R: f64 = 0.5;

fn cat(axis: AxisChoice) -> TargetSection {
    TargetSection::BestCat { axis, parity: 1 }
}

fn fock2() -> TargetSection {
    TargetSection::BestFock { n: 2 }
}

/// Two-photon EPS with gain fixed by `xi`, or unamplified when `None`.
fn eps_figure(r: f64, xi: Option<f64>, target: TargetSection) -> Manifest {
    let mut m = pipeline_manifest(Command::Eps, r);
    m.stages = vec![match xi {
        Some(x) => StageSection::xi(x, 2),
        None => StageSection::gain_db(0.0, 2),
    }];
    m.target = Some(target);
    m
}

fn target_for(xi: f64) -> TargetSection {
    if xi == 0.5 {
        fock2()
    } else if xi == 0.0 {
        cat(AxisChoice::X)
    } else {
        cat(AxisChoice::P)
    }
}

fn reflectivity_span() -> Range {
    Range::Span {
        start: 0.01,
        stop: 1.0,
        n: 100,
    }
}

fn sweep_figure(system: SystemSection, dbs: Vec<f64>) -> Manifest {
    let mut m = Manifest::new(Command::EntanglementSweep);
    m.system = system;
    m.sweep = Some(SweepSection {
        reflectivity: Some(reflectivity_span()),
        squeeze_db: Some(Range::List(dbs)),
        ..Default::default()
    });
    m
}

/// The manifest that reproduces figure `id`.
pub fn figure_manifest(id: &str) -> CliResult<Manifest> {
    let xi_of = |k: usize| [None, Some(1.0), Some(0.5), Some(0.0)][k];
    let m = match id {
        "fig2a" => sweep_figure(SystemSection::default(), vec![-6.0, -3.0]),
        "fig2b" => {
            let mut m = Manifest::new(Command::GainSolve);
            m.sweep = Some(SweepSection {
                reflectivity: Some(Range::Span {
                    start: 0.05,
                    stop: 0.99,
                    n: 95,
                }),
                ..Default::default()
            });
            m
        }
        "fig2c" | "fig2d" | "fig2e" | "fig2f" | "fig2g" | "fig2h" | "fig2i" | "fig2j" => {
            let k = (id.as_bytes()[4] - b'c') as usize;
            let r = if k < 4 { 0.9 } else { 0.5 };
            let xi = xi_of(k % 4);
            eps_figure(r, xi, xi.map(target_for).unwrap_or(cat(AxisChoice::Auto)))
        }
        "fig3a" | "fig3b" => {
            let mut m = pipeline_manifest(Command::Figures, FIG3_R);
            m.figures = vec![id.into()];
            m.sweep = Some(SweepSection {
                inverse_cooperativity: Some(Range::Span {
                    start: 0.0,
                    stop: 2.0,
                    n: 11,
                }),
                ..Default::default()
            });
            m
        }
        "fig3c" | "fig3d" => {
            let mut m = pipeline_manifest(Command::Figures, FIG3_R);
            m.figures = vec![id.into()];
            m.measurement.efficiency = FIG3_MU;
            m.sweep = Some(SweepSection {
                eta: Some(Range::Span {
                    start: 0.5,
                    stop: 1.0,
                    n: 11,
                }),
                ..Default::default()
            });
            m
        }
        "fig4b" | "figS4" => {
            let mut m = pipeline_manifest(Command::FourCat, 0.9);
            m.four_cat = Some(FourCatSection { xi1: 0.0 });
            m
        }
        "figS1a" => sweep_figure(SystemSection::with_cooperativity(0.5), vec![-6.0, -3.0]),
        "figS1b" => sweep_figure(SystemSection::with_cooperativity(0.1), vec![-6.0, -3.0]),
        "figS1c" => {
            let mut m = pipeline_manifest(Command::EntanglementSweep, 0.5);
            let cs: Vec<f64> = (0..=60)
                .map(|k| 10f64.powf(-2.0 + 3.0 * k as f64 / 60.0))
                .collect();
            m.sweep = Some(SweepSection {
                cooperativity: Some(Range::List(cs)),
                ..Default::default()
            });
            m
        }
        "figS2a" | "figS2b" | "figS2c" | "figS2d" => {
            let xi = [None, Some(0.0), Some(0.5), Some(1.0)][(id.as_bytes()[5] - b'a') as usize];
            eps_figure(0.9, xi, xi.map(target_for).unwrap_or(cat(AxisChoice::Auto)))
        }
        "figS3a" | "figS3b" => {
            let (db, n_m, gain) = if id == "figS3a" {
                (-3.0, 0.05, 2.88)
            } else {
                (-6.0, 0.2, 5.66)
            };
            let mut m = pipeline_manifest(Command::Eps, 0.9);
            m.system = SystemSection {
                n_m,
                squeeze_db: db,
                ..SystemSection::with_cooperativity(0.8)
            };
            m.stages = vec![StageSection::gain_db(gain, 2)];
            m.target = Some(cat(AxisChoice::X));
            m
        }
        "figS5a" => {
            let mut m = sweep_figure(SystemSection::with_cooperativity(0.8), vec![-6.0]);
            m.channel.eta = 0.9;
            m
        }
        "figS5b" | "figS5c" | "figS5d" => {
            let xi = [1.0, 0.5, 0.0][(id.as_bytes()[5] - b'b') as usize];
            let mut m = eps_figure(0.5, Some(xi), target_for(xi));
            m.command = Command::Imperfections;
            m.system = SystemSection::with_cooperativity(0.8);
            m.channel.eta = 0.9;
            m.channel.nu = 0.98;
            m.measurement.efficiency = 0.8;
            m
        }
        "figS6a" | "figS6b" | "figS6c" | "figS6d" | "figS6e" | "figS6f" => {
            let k = (id.as_bytes()[5] - b'a') as usize;
            let xi = [1.0, 0.5, 0.0][k % 3];
            let mut m = eps_figure(0.5, Some(xi), target_for(xi));
            m.system = SystemSection::with_cooperativity(0.8);
            m.measurement.zeta = 1.0;
            m.measurement.theta = if k < 3 { 0.0 } else { FRAC_PI_2 };
            m
        }
        _ => {
            return Err(CliError::validation(format!(
                "unknown figure id {id:?}; known: {}",
                CATALOG.join(", ")
            )))
        }
    };
    Ok(m)
}

fn curve_script(
    title: &str,
    data: &str,
    xcol: usize,
    cols: &[(usize, &str)],
    xlabel: &str,
) -> String {
    let mut s = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset title '{title}'\nset xlabel '{xlabel}'\nplot "
    );
    let parts: Vec<String> = cols
        .iter()
        .map(|(c, t)| format!("'{data}' using {xcol}:{c} with lines title '{t}'"))
        .collect();
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

fn grid_script(title: &str, data: &str) -> String {
    format!(
        "set datafile separator ','\nset title '{title}'\nset xlabel 'X_M'\nset ylabel 'P_M'\nset view map\nset size square\nset palette defined (-1 'blue', 0 'white', 1 'red')\nsplot '{data}' every ::1 using 1:2:3 with image notitle\n"
    )
}

fn sweep_script(id: &str) -> String {
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset title '{id}'\nset xlabel 'R'\n\
         plot for [s in '-6 -3'] 'sweep.csv' using 1:((column(3) == s) ? column(4) : 1/0) with lines title 'E_N '.s.' dB', \\\n     \
         for [s in '-6 -3'] 'sweep.csv' using 1:((column(3) == s) ? column(5) : 1/0) with lines dt 2 title 'steering '.s.' dB'\n"
    )
}

/// Metrics of the P-cat and the Fock state for one system setting.
fn two_states(m: &Manifest, noise: f64) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (xi, target) in [(1.0, cat(AxisChoice::P)), (0.5, fock2())] {
        let mut mm = m.clone();
        mm.stages = vec![StageSection {
            noise,
            ..StageSection::xi(xi, 2)
        }];
        let (_, _, res) = run_pipeline(&mm)?;
        let q = assess(&res.state, Some(&target))?;
        out.push(q.fidelity.unwrap_or(f64::NAN));
        out.push(q.delta);
        if xi == 1.0 {
            out.push(q.alpha2.unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

fn fig3(id: &str, m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    let sw = m.sweep.clone().unwrap_or_default();
    if let Some(inv) = &sw.inverse_cooperativity {
        let pts = inv.points("inverse_cooperativity")?;
        let rows = with_pool(ctx.jobs, || {
            pts.par_iter()
                .map(|&ci| -> CliResult<Vec<f64>> {
                    let mut mm = m.clone();
                    mm.system = SystemSection {
                        gamma_mhz: if ci == 0.0 { Some(0.0) } else { None },
                        cooperativity: if ci == 0.0 { None } else { Some(1.0 / ci) },
                        ..m.system.clone()
                    };
                    let mut row = vec![ci];
                    row.extend(two_states(&mm, 0.0)?);
                    Ok(row)
                })
                .collect::<CliResult<Vec<_>>>()
        })?;
        let header = [
            "C_om_inv",
            "F_pcat",
            "delta_pcat",
            "alpha2_pcat",
            "F_fock",
            "delta_fock",
        ];
        let file = sink.write_curve("quality", &header, &rows)?;
        let (cols, label): (&[(usize, &str)], &str) = if id == "fig3a" {
            (&[(2, "P-cat"), (5, "Fock")], "F")
        } else {
            (&[(3, "P-cat"), (6, "Fock")], "delta")
        };
        sink.write_text(
            "plot.gp",
            &format!(
                "{}set arrow from 1.25, graph 0 to 1.25, graph 1 nohead dt 2\n",
                curve_script(&format!("{id} {label}"), &file, 1, cols, "1/C_om")
            ),
        )?;
        report.metrics.insert("data".into(), json!(file));
    } else {
        let etas = sw
            .eta
            .as_ref()
            .ok_or_else(|| CliError::validation("fig3c/d: needs sweep.eta"))?
            .points("eta")?;
        let mu = m.measurement.efficiency;
        let jobs: Vec<(f64, f64)> = [0.0, 0.1]
            .iter()
            .flat_map(|&n| etas.iter().map(move |&e| (n, e)))
            .collect();
        let rows = with_pool(ctx.jobs, || {
            jobs.par_iter()
                .map(|&(noise, eta)| -> CliResult<Vec<f64>> {
                    let mut mm = m.clone();
                    mm.channel.eta = eta;
                    let mut row = vec![eta + mu, eta, noise];
                    row.extend(two_states(&mm, noise)?);
                    Ok(row)
                })
                .collect::<CliResult<Vec<_>>>()
        })?;
        let header = [
            "Gamma",
            "eta",
            "n_A",
            "F_pcat",
            "delta_pcat",
            "alpha2_pcat",
            "F_fock",
            "delta_fock",
        ];
        let file = sink.write_curve("quality", &header, &rows)?;
        let cols: &[(usize, &str)] = if id == "fig3c" {
            &[(4, "F P-cat"), (7, "F Fock"), (6, "|alpha|^2")]
        } else {
            &[(5, "delta P-cat"), (8, "delta Fock")]
        };
        sink.write_text(
            "plot.gp",
            &curve_script(id, &file, 1, cols, "Gamma = eta + mu"),
        )?;
        report.metrics.insert("mu".into(), num(mu));
        report.metrics.insert("data".into(), json!(file));
        report.notes.push(format!("Gamma = eta + mu swept with mu fixed at {mu} and eta varying; rows with n_A = 0 and 0.1"));
    }
    report.notes.push(format!(
        "P-cat at xi = 1 and Fock state at xi = 1/2, R = {FIG3_R}"
    ));
    Ok(())
}

fn run_figure(id: &str, outer: &Manifest, ctx: &Ctx, parent: &Sink) -> CliResult<Report> {
    let mut m = figure_manifest(id)?;
    if outer.grid.is_some() {
        m.grid = outer.grid.clone();
    }
    m.output.format = outer.output.format;
    let mut sink = parent.subdir(id)?;
    let mut report = Report::new(&m);
    match id {
        "fig3a" | "fig3b" | "fig3c" | "fig3d" => {
            sink.write_manifest(&m)?;
            fig3(id, &m, ctx, &mut sink, &mut report)?;
        }
        "figS5a" => {
            sink.write_manifest(&m)?;
            let mut loss = sink.subdir("loss")?;
            let mut r1 = Report::new(&m);
            dispatch(&m, ctx, &mut loss, &mut r1)?;
            let mut noisy = m.clone();
            noisy.channel.eta = 1.0;
            noisy.sweep.as_mut().expect("sweep").amplifier_noise = 0.16;
            let mut nsink = sink.subdir("noise")?;
            let mut r2 = Report::new(&noisy);
            dispatch(&noisy, ctx, &mut nsink, &mut r2)?;
            report
                .metrics
                .insert("loss".into(), Value::Object(r1.metrics));
            report
                .metrics
                .insert("noise".into(), Value::Object(r2.metrics));
            sink.artifacts
                .extend(loss.artifacts.iter().map(|a| format!("loss/{a}")));
            sink.artifacts
                .extend(nsink.artifacts.iter().map(|a| format!("noise/{a}")));
            sink.write_text(
                "plot.gp",
                "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'R'\n\
                 plot 'loss/sweep.csv' using 1:4 with lines title 'E_N eta=0.9', 'loss/sweep.csv' using 1:5 with lines dt 2 title 'steering eta=0.9', \\\n     \
                 'noise/sweep.csv' using 1:4 with lines title 'E_N n_A=0.16', 'noise/sweep.csv' using 1:5 with lines dt 2 title 'steering n_A=0.16'\n",
            )?;
        }
        _ => {
            dispatch(&m, ctx, &mut sink, &mut report)?;
            let script = match id {
                "fig2a" | "figS1a" | "figS1b" => sweep_script(id),
                "fig2b" => curve_script(
                    id,
                    "gains.csv",
                    1,
                    &[(2, "g_p"), (3, "g_F"), (4, "g_x")],
                    "R",
                ),
                "figS1c" => curve_script(
                    id,
                    "cooperativity.csv",
                    2,
                    &[(5, "E_N"), (6, "steering")],
                    "1/C_om",
                ),
                "figS4" => curve_script(
                    id,
                    "wavefunction.csv",
                    1,
                    &[(2, "pipeline"), (3, "ideal four-cat")],
                    "X_M",
                ),
                "fig4b" => format!(
                    "{}\n# marginal: plot 'marginal.csv' using 1:2 with lines\n",
                    grid_script(id, "wigner.csv")
                ),
                _ => grid_script(id, "wigner.csv"),
            };
            sink.write_text("plot.gp", &script)?;
        }
    }
    report.artifacts = sink.artifacts.clone();
    Ok(report)
}

pub fn run(m: &Manifest, ctx: &Ctx, sink: &mut Sink, report: &mut Report) -> CliResult<()> {
    for id in &m.figures {
        if !CATALOG.contains(&id.as_str()) {
            return Err(CliError::validation(format!(
                "unknown figure id {id:?}; known: {}",
                CATALOG.join(", ")
            )));
        }
    }
    for id in &m.figures {
        let r = run_figure(id, m, ctx, sink)?;
        let mut entry = Map::new();
        entry.insert("manifest_sha256".into(), json!(r.manifest_sha256));
        entry.insert("metrics".into(), Value::Object(r.metrics));
        entry.insert("notes".into(), json!(r.notes));
        report.metrics.insert(id.clone(), Value::Object(entry));
        sink.artifacts
            .extend(r.artifacts.iter().map(|a| format!("{id}/{a}")));
    }
    Ok(())
}
