use super::config::{RunConfig, Turbulence};
use super::table::{Cell, PlotSpec, Table};
use crate::channel::{build_channel, NlosChannel};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::{self, ellipse_configuration, LinkGeometry};
use crate::mcsim::{empirical_error_rate, SimConfig};
use crate::modem::{db_to_linear, error_rate, linear_to_db, snr_penalty, ErrorRateResult, Method, Modulation};

/// A finished run: the table, how many rows carry a numerical failure, and
/// the default plot for `--format svg`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub failures: usize,
    pub plot: Option<PlotSpec>,
}

/// A channel with the turbulence label it was built from.
struct Labelled {
    cn2: Option<f64>,
    channel: NlosChannel,
}

fn cn2_cell(cn2: Option<f64>) -> Cell {
    Cell::opt(cn2)
}

fn tx_power(cfg: &RunConfig) -> f64 {
    cfg.link_budget.map_or(1.0, |lb| lb.tx_power)
}

fn fixed_geometry(cfg: &RunConfig) -> Result<LinkGeometry> {
    let g = &cfg.geometry;
    LinkGeometry::new(g.theta_t, g.beta_t, g.theta_r, g.beta_r, g.baseline, cfg.aperture)
}

fn channels(cfg: &RunConfig) -> Result<Vec<Labelled>> {
    match &cfg.turbulence {
        Turbulence::Shapes([a1, b1, a2, b2]) => Ok(vec![Labelled {
            cn2: None,
            channel: build_channel(1.0, 1.0, (*a1, *b1), (*a2, *b2))?,
        }]),
        Turbulence::Cn2(list) => {
            let g = fixed_geometry(cfg)?;
            list.iter()
                .map(|&cn2| {
                    let atm = crate::geometry::Atmosphere { cn2, ..cfg.atmosphere };
                    Ok(Labelled {
                        cn2: Some(cn2),
                        channel: geometry::nlos_channel(&g, &atm, cfg.wavelength, tx_power(cfg))?,
                    })
                })
                .collect()
        }
    }
}

/// Channel parameters, one row per turbulence setting.
pub fn run_channel(cfg: &RunConfig) -> Result<RunOutput> {
    let mut t = Table::new(vec![
        "cn2", "r1", "r2", "theta_s_deg", "alpha1", "beta1", "alpha2", "beta2", "s", "a", "h", "omega_v", "e2",
        "omega_r", "perturbed",
    ]);
    let cv = match cfg.turbulence {
        Turbulence::Cn2(_) => Some(fixed_geometry(cfg)?.common_volume()?),
        Turbulence::Shapes(_) => None,
    };
    for l in channels(cfg)? {
        let c = &l.channel;
        let [a1, b1, a2, b2] = c.shapes();
        t.push(vec![
            cn2_cell(l.cn2),
            Cell::opt(cv.map(|v| v.r1)),
            Cell::opt(cv.map(|v| v.r2)),
            Cell::opt(cv.map(|v| v.theta_s.to_degrees())),
            a1.into(),
            b1.into(),
            a2.into(),
            b2.into(),
            c.s.into(),
            c.a.into(),
            c.h.into(),
            c.omega_v().into(),
            c.e2.into(),
            c.omega_r.into(),
            Cell::Bool(c.perturbation.is_some()),
        ]);
    }
    Ok(RunOutput { table: t, failures: 0, plot: None })
}

/// Normalized density by the three routes on the configured grid.
pub fn run_pdf(cfg: &RunConfig, exec: Execution) -> Result<RunOutput> {
    let mut t = Table::new(vec!["cn2", "i_n", "pdf_meijer", "pdf_series", "pdf_quadrature", "error"]);
    let mut failures = 0;
    for l in channels(cfg)? {
        let rows = exec::map(exec, &cfg.pdf_grid, |&i| -> Result<[f64; 3]> {
            Ok([
                l.channel.pdf_meijer(i)?,
                l.channel.pdf_series(i, cfg.pdf_series_terms)?,
                l.channel.pdf_quadrature_normalized(i)?,
            ])
        });
        for (&i, r) in cfg.pdf_grid.iter().zip(rows) {
            match r {
                Ok([m, s, q]) => t.push(vec![cn2_cell(l.cn2), i.into(), m.into(), s.into(), q.into(), Cell::Empty]),
                Err(e) => {
                    failures += 1;
                    t.push(vec![cn2_cell(l.cn2), i.into(), Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]);
                }
            }
        }
    }
    Ok(RunOutput {
        table: t,
        failures,
        plot: Some(PlotSpec { x: "i_n", y: "pdf_meijer", group_by: vec!["cn2"], log_x: true, log_y: true }),
    })
}

fn evaluate(ch: &NlosChannel, snr: f64, m: Modulation, method: Method, sim: &SimConfig, exec: Execution) -> Result<ErrorRateResult> {
    match method {
        Method::MonteCarlo(n) => empirical_error_rate(ch, snr, m, &SimConfig { sample_count: n, ..*sim }, exec),
        _ => error_rate(ch, snr, m, method),
    }
}

/// Error rates on the SNR grid, ordered by channel, then SNR, then scheme,
/// then method. Failed points keep their row and carry the message.
pub fn run_ber_sweep(cfg: &RunConfig, exec: Execution) -> Result<RunOutput> {
    let mut t = Table::new(vec![
        "cn2", "snr_db", "scheme", "method", "error_rate", "trunc_bound", "stderr", "out_of_range", "error",
    ]);
    let mut failures = 0;
    for l in channels(cfg)? {
        let mut points = Vec::new();
        for &db in &cfg.snr_grid_db {
            for &m in &cfg.schemes {
                for &method in &cfg.methods {
                    points.push((db, m, method));
                }
            }
        }
        let results = exec::map(exec, &points, |&(db, m, method)| {
            evaluate(&l.channel, db_to_linear(db), m, method, &cfg.sim, exec)
        });
        for (&(db, m, method), r) in points.iter().zip(results) {
            let head = vec![cn2_cell(l.cn2), db.into(), m.name().into(), method.to_string().into()];
            let tail = match r {
                Ok(r) => vec![
                    r.probability.into(),
                    Cell::opt(r.truncation_upper),
                    Cell::opt(r.std_error),
                    Cell::Bool(r.out_of_range),
                    Cell::Empty,
                ],
                Err(e) => {
                    failures += 1;
                    vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]
                }
            };
            t.push([head, tail].concat());
        }
    }
    Ok(RunOutput {
        table: t,
        failures,
        plot: Some(PlotSpec {
            x: "snr_db",
            y: "error_rate",
            group_by: vec!["cn2", "scheme", "method"],
            log_x: false,
            log_y: true,
        }),
    })
}

/// Receiver-elevation sweep. In ellipse mode `θ_T` follows from `θ_R`; in
/// fixed mode `θ_T` stays at the configured value. The SNR is `[snr] fixed`
/// when given and otherwise follows from the link budget. Angles without a
/// common volume give a single row with the reason.
pub fn run_geometry_sweep(cfg: &RunConfig, exec: Execution) -> Result<RunOutput> {
    let Turbulence::Cn2(cn2_list) = &cfg.turbulence else {
        return Err(Error::Config("the geometry sweep derives shapes from cn2; remove [turbulence] shapes".into()));
    };
    let fixed_snr = cfg.fixed_snr_db.map(db_to_linear);
    if fixed_snr.is_none() && cfg.link_budget.is_none() {
        return Err(Error::Config("the geometry sweep needs [snr] fixed or a [link_budget] section".into()));
    }
    let method = cfg.methods.first().copied().unwrap_or(Method::Meijer);
    let g = &cfg.geometry;
    let mut t = Table::new(vec![
        "cn2", "theta_r_deg", "theta_t_deg", "e", "r", "alpha1", "beta1", "alpha2", "beta2", "omega_r", "snr_db",
        "scheme", "ber", "ber_no_turbulence", "skipped",
    ]);
    let mut failures = 0;
    let mut points = Vec::new();
    for &cn2 in cn2_list {
        for &theta_r in &g.theta_r_sweep {
            points.push((cn2, theta_r));
        }
    }
    let results = exec::map(exec, &points, |&(cn2, theta_r)| {
        let link = match g.eccentricity {
            Some(e) => ellipse_configuration(e, g.baseline, theta_r, g.beta_t, g.beta_r, cfg.aperture),
            None => LinkGeometry::new(g.theta_t, g.beta_t, theta_r, g.beta_r, g.baseline, cfg.aperture),
        };
        let link = match link.and_then(|l| l.common_volume().map(|_| l)) {
            Ok(l) => l,
            Err(e) => return Err(e),
        };
        let atm = crate::geometry::Atmosphere { cn2, ..cfg.atmosphere };
        let ch = geometry::nlos_channel(&link, &atm, cfg.wavelength, tx_power(cfg))?;
        let snr = match (fixed_snr, cfg.link_budget) {
            (Some(s), _) => s,
            (None, Some(lb)) => geometry::mean_snr(ch.omega_r, lb.filter_eta, lb.detector_eta, cfg.wavelength, lb.bit_rate)?,
            (None, None) => unreachable!(),
        };
        let bers = cfg
            .schemes
            .iter()
            .map(|&m| evaluate(&ch, snr, m, method, &cfg.sim, Execution::Sequential).map(|r| r.probability))
            .collect::<Vec<_>>();
        Ok((link, ch, snr, bers))
    });
    for (&(cn2, theta_r), r) in points.iter().zip(results) {
        let e_cell = Cell::opt(g.eccentricity);
        match r {
            Err(err) => {
                let geometric = matches!(err, Error::Geometry(_) | Error::Domain { func: "ellipse_configuration", .. });
                if !geometric {
                    failures += 1;
                }
                let mut row = vec![Cell::Float(cn2), theta_r.to_degrees().into(), Cell::Empty, e_cell, g.baseline.into()];
                row.extend(std::iter::repeat(Cell::Empty).take(9));
                row.push(err.to_string().into());
                t.push(row);
            }
            Ok((link, ch, snr, bers)) => {
                let [a1, b1, a2, b2] = ch.shapes();
                for (&m, ber) in cfg.schemes.iter().zip(bers) {
                    let (ber_cell, skipped) = match ber {
                        Ok(p) => (Cell::Float(p), Cell::Empty),
                        Err(e) => {
                            failures += 1;
                            (Cell::Empty, Cell::Text(e.to_string()))
                        }
                    };
                    t.push(vec![
                        Cell::Float(cn2),
                        theta_r.to_degrees().into(),
                        link.theta_t.to_degrees().into(),
                        e_cell.clone(),
                        g.baseline.into(),
                        a1.into(),
                        b1.into(),
                        a2.into(),
                        b2.into(),
                        ch.omega_r.into(),
                        linear_to_db(snr).into(),
                        m.name().into(),
                        ber_cell,
                        m.conditional(snr).into(),
                        skipped,
                    ]);
                }
            }
        }
    }
    Ok(RunOutput {
        table: t,
        failures,
        plot: Some(PlotSpec {
            x: "theta_r_deg",
            y: "ber",
            group_by: vec!["cn2", "scheme"],
            log_x: false,
            log_y: true,
        }),
    })
}

/// SNR penalties by bisection on the two-term asymptotes.
pub fn run_penalty(cfg: &RunConfig, exec: Execution) -> Result<RunOutput> {
    let mut t = Table::new(vec![
        "cn2", "scheme_pair", "target_ber", "snr_a_db", "snr_b_db", "bisection_db", "closed_form_db", "error",
    ]);
    let mut failures = 0;
    for l in channels(cfg)? {
        let mut points = Vec::new();
        for &pair in &cfg.penalty_pairs {
            for &target in &cfg.penalty_targets {
                points.push((pair, target));
            }
        }
        let results = exec::map(exec, &points, |&((a, b), target)| snr_penalty(&l.channel, a, b, target));
        for (&((a, b), target), r) in points.iter().zip(results) {
            let head = vec![cn2_cell(l.cn2), format!("{a}-{b}").into(), target.into()];
            let tail = match r {
                Ok(p) => vec![
                    p.snr_a_db.into(),
                    p.snr_b_db.into(),
                    p.bisection_db.into(),
                    Cell::opt(p.closed_form_db),
                    Cell::Empty,
                ],
                Err(e) => {
                    failures += 1;
                    vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]
                }
            };
            t.push([head, tail].concat());
        }
    }
    Ok(RunOutput {
        table: t,
        failures,
        plot: Some(PlotSpec {
            x: "target_ber",
            y: "bisection_db",
            group_by: vec!["cn2", "scheme_pair"],
            log_x: true,
            log_y: false,
        }),
    })
}

/// Monte-Carlo error rates on the SNR grid next to the Meijer value and the
/// deviation in standard errors.
pub fn run_mc(cfg: &RunConfig, exec: Execution) -> Result<RunOutput> {
    let mut t = Table::new(vec![
        "cn2", "snr_db", "scheme", "samples", "seed", "error_rate", "stderr", "meijer", "z_score", "error",
    ]);
    let mut failures = 0;
    for l in channels(cfg)? {
        for &db in &cfg.snr_grid_db {
            for &m in &cfg.schemes {
                let snr = db_to_linear(db);
                // Lanes run in parallel inside each estimate.
                let r = empirical_error_rate(&l.channel, snr, m, &cfg.sim, exec).and_then(|mc| {
                    let reference = error_rate(&l.channel, snr, m, Method::Meijer)?.probability;
                    Ok((mc, reference))
                });
                let head = vec![
                    cn2_cell(l.cn2),
                    db.into(),
                    m.name().into(),
                    Cell::Int(cfg.sim.sample_count as u64),
                    Cell::Int(cfg.sim.seed),
                ];
                let tail = match r {
                    Ok((mc, reference)) => {
                        let se = mc.std_error.unwrap_or(0.0);
                        let z = if se > 0.0 { (mc.probability - reference) / se } else { 0.0 };
                        vec![mc.probability.into(), se.into(), reference.into(), z.into(), Cell::Empty]
                    }
                    Err(e) => {
                        failures += 1;
                        vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]
                    }
                };
                t.push([head, tail].concat());
            }
        }
    }
    Ok(RunOutput {
        table: t,
        failures,
        plot: Some(PlotSpec {
            x: "snr_db",
            y: "error_rate",
            group_by: vec!["cn2", "scheme"],
            log_x: false,
            log_y: true,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn ber_sweep_ordering_and_empty_grid() {
        let c = cfg("[turbulence]\nshapes = 6.99, 1.05, 4.59, 1.23\n[snr]\ngrid = 10, 20, 10\n[modulation]\nschemes = bpsk, dpsk\n[methods]\nlist = meijer, series:30\n");
        let out = run_ber_sweep(&c, Execution::Sequential).unwrap();
        assert_eq!(out.failures, 0);
        let keys: Vec<String> = out.table.rows.iter().map(|r| format!("{} {} {}", r[1].render(), r[2].render(), r[3].render())).collect();
        assert_eq!(keys.len(), 8);
        assert!(keys[0].ends_with("bpsk meijer") && keys[1].ends_with("bpsk series:30") && keys[2].ends_with("dpsk meijer"));
        assert!(keys[3].starts_with("1.0000000000000000e1") && keys[4].starts_with("2.0000000000000000e1"));
        let empty = cfg("[turbulence]\nshapes = 6.99, 1.05, 4.59, 1.23\n[snr]\ngrid =\n");
        assert!(run_ber_sweep(&empty, Execution::Sequential).unwrap().table.rows.is_empty());
    }

    #[test]
    fn geometry_sweep_skips_unreachable_angles() {
        let c = cfg("[geometry]\ntheta_t = 60 deg\ntheta_r = 60 deg\ntheta_r_sweep = 100 deg, 140 deg, 20 deg\n[snr]\nfixed = 30\n[modulation]\nschemes = bpsk\n");
        let out = run_geometry_sweep(&c, Execution::Sequential).unwrap();
        assert_eq!(out.table.rows.len(), 3);
        assert_eq!(out.failures, 0);
        let skipped = out.table.column("skipped").unwrap();
        assert!(out.table.rows[0][skipped] == Cell::Empty);
        assert!(matches!(&out.table.rows[1][skipped], Cell::Text(s) if s.contains("common volume")));
    }

    #[test]
    fn geometry_sweep_needs_an_snr_source() {
        let c = cfg("[geometry]\neccentricity = 0.5\ntheta_r_sweep = 60 deg\n");
        assert!(matches!(run_geometry_sweep(&c, Execution::Sequential), Err(Error::Config(_))));
    }

    #[test]
    fn penalty_rows_carry_the_closed_form() {
        let c = cfg("[turbulence]\nshapes = 6.99, 1.05, 4.59, 1.23\n[penalty]\npairs = dpsk-ncfsk\ntargets = 1e-3\n");
        let out = run_penalty(&c, Execution::Sequential).unwrap();
        let cf = out.table.column("closed_form_db").unwrap();
        assert_eq!(out.table.rows[0][cf].as_f64(), Some(10.0 * 2f64.log10()));
    }
}
