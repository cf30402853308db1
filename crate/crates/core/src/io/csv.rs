//! Snapshot and jump-log CSV files with a `# key = value` config echo.

use std::fmt::Write as _;

use crate::hybrid::{num, HybridTrajectory, SimConfig};

use super::IoError;

fn echo(out: &mut String, title: &str, cfg: &SimConfig) {
    let _ = writeln!(out, "# {title}");
    for (k, v) in cfg.to_pairs() {
        let _ = writeln!(out, "# {k} = {v}");
    }
}

/// `time,u_0,...,u_M`, one row per snapshot.
pub fn snapshots_csv(traj: &HybridTrajectory) -> String {
    let mut out = String::new();
    echo(&mut out, "pdmp-axon snapshots", &traj.config);
    out.push_str("time");
    for q in 0..traj.grid.nodes() {
        let _ = write!(out, ",u_{q}");
    }
    out.push('\n');
    for s in &traj.snapshots {
        out.push_str(&num(s.time));
        for v in &s.values {
            out.push(',');
            out.push_str(&num(*v));
        }
        out.push('\n');
    }
    out
}

/// `time,channel,from,to`; states (full) or labels (averaged) by index.
pub fn jumps_csv(traj: &HybridTrajectory) -> String {
    let mut out = String::new();
    echo(&mut out, "pdmp-axon jump log", &traj.config);
    let _ = writeln!(
        out,
        "# initial = {}",
        traj.initial
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    out.push_str("time,channel,from,to\n");
    for e in &traj.jumps {
        let _ = writeln!(out, "{},{},{},{}", num(e.time), e.channel, e.from, e.to);
    }
    out
}

/// Recovers the run config from the `# key = value` header of an output file.
pub fn parse_echo(text: &str) -> Result<SimConfig, IoError> {
    let pairs: Vec<(&str, &str)> = text
        .lines()
        .map_while(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| *k != "initial")
        .collect();
    Ok(SimConfig::from_pairs(pairs)?)
}

/// Numeric rows of a CSV, skipping `#` lines and a non-numeric header.
/// Rows must all have the same length.
pub fn read_matrix(text: &str) -> Result<Vec<Vec<f64>>, IoError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> =
            line.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(IoError::Ragged {
                            line: ln + 1,
                            expected: first.len(),
                            got: row.len(),
                        });
                    }
                }
                rows.push(row);
            }
            Err(_) if rows.is_empty() => continue,
            Err(_) => {
                return Err(IoError::Format(format!("line {}: not numeric", ln + 1)));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::{member_rng, simulate, ModelKind};
    use crate::kinetics::KineticScheme;

    fn traj() -> HybridTrajectory {
        let s = KineticScheme::toy2();
        let mut cfg = SimConfig::new("toy2", ModelKind::Full);
        cfg.n = 4;
        cfg.m = 8;
        cfg.t_end = 0.2;
        cfg.seed = 11;
        let cfg = cfg.with_admissible_dt(&s).unwrap();
        simulate(&s, &cfg, &mut member_rng(cfg.seed, 0)).unwrap()
    }

    #[test]
    fn echo_round_trip() {
        let t = traj();
        assert_eq!(parse_echo(&snapshots_csv(&t)).unwrap(), t.config);
        assert_eq!(parse_echo(&jumps_csv(&t)).unwrap(), t.config);
    }

    #[test]
    fn snapshots_parse_back_exactly() {
        let t = traj();
        let rows = read_matrix(&snapshots_csv(&t)).unwrap();
        assert_eq!(rows.len(), t.snapshots.len());
        for (row, s) in rows.iter().zip(&t.snapshots) {
            assert_eq!(row[0], s.time);
            assert_eq!(&row[1..], s.values.as_slice());
        }
        let jumps = read_matrix(&jumps_csv(&t)).unwrap();
        assert_eq!(jumps.len(), t.jumps.len());
    }

    #[test]
    fn ragged_rejected() {
        assert!(matches!(
            read_matrix("t,a,b\n0,1,2\n1,2\n"),
            Err(IoError::Ragged { line: 3, .. })
        ));
    }
}
