//! Trajectory rows and their CSV serialization.
//!
//! The schema is fixed:
//! `iter,accepted,r,eps_i,f_old,f_new,inner_steps,inner_status,x0..,y0..`
//! with one coordinate column per dimension. Floats are written with Rust's
//! shortest round-trip formatting, so serialize -> parse is the identity and
//! equal runs produce byte-identical files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ascent::AscentStatus;
use crate::error::{CoreError, CoreResult};
use crate::scalar::Scalar;

/// Inner-loop outcome column. `None` is used by rows that have no inner
/// ascent (baseline algorithms).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerStatus {
    Converged,
    HitCap,
    ProjectedFixedPoint,
    None,
}

impl From<AscentStatus> for InnerStatus {
    fn from(s: AscentStatus) -> Self {
        match s {
            AscentStatus::Converged => InnerStatus::Converged,
            AscentStatus::HitCap => InnerStatus::HitCap,
            AscentStatus::ProjectedFixedPoint => InnerStatus::ProjectedFixedPoint,
        }
    }
}

impl InnerStatus {
    fn as_str(self) -> &'static str {
        match self {
            InnerStatus::Converged => "Converged",
            InnerStatus::HitCap => "HitCap",
            InnerStatus::ProjectedFixedPoint => "ProjectedFixedPoint",
            InnerStatus::None => "None",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "Converged" => Some(InnerStatus::Converged),
            "HitCap" => Some(InnerStatus::HitCap),
            "ProjectedFixedPoint" => Some(InnerStatus::ProjectedFixedPoint),
            "None" => Some(InnerStatus::None),
            _ => None,
        }
    }
}

/// One outer-iteration row. `x`/`y` are the state at the start of the
/// iteration; `f_old`/`f_new` and the decision fields describe what happened
/// during it. `r` is the rejection counter after the decision.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow<F> {
    pub iter: u64,
    pub accepted: bool,
    pub r: u64,
    pub eps_i: F,
    pub f_old: F,
    pub f_new: F,
    pub inner_steps: u64,
    pub inner_status: InnerStatus,
    pub x: Vec<F>,
    pub y: Vec<F>,
}

fn fmt_float<F: Scalar>(v: F, out: &mut String) {
    // {:?} gives the shortest representation that parses back exactly
    // (including "inf" and scientific notation for extreme magnitudes).
    write!(out, "{v:?}").expect("string write");
}

/// Render rows to CSV bytes. All rows must share the coordinate dimensions.
pub fn write_csv<F: Scalar>(rows: &[TrajectoryRow<F>], dim_x: usize, dim_y: usize) -> String {
    let mut s = String::new();
    s.push_str("iter,accepted,r,eps_i,f_old,f_new,inner_steps,inner_status");
    for j in 0..dim_x {
        write!(s, ",x{j}").unwrap();
    }
    for j in 0..dim_y {
        write!(s, ",y{j}").unwrap();
    }
    s.push('\n');
    for row in rows {
        debug_assert_eq!(row.x.len(), dim_x);
        debug_assert_eq!(row.y.len(), dim_y);
        write!(s, "{},{},{},", row.iter, row.accepted, row.r).unwrap();
        fmt_float(row.eps_i, &mut s);
        s.push(',');
        fmt_float(row.f_old, &mut s);
        s.push(',');
        fmt_float(row.f_new, &mut s);
        s.push(',');
        write!(s, "{},{}", row.inner_steps, row.inner_status.as_str()).unwrap();
        for v in row.x.iter().chain(&row.y) {
            s.push(',');
            fmt_float(*v, &mut s);
        }
        s.push('\n');
    }
    s
}

fn parse_err(line: usize, msg: impl Into<String>) -> CoreError {
    CoreError::TrajectoryParse {
        line,
        msg: msg.into(),
    }
}

/// Parse CSV produced by [`write_csv`]. Returns the rows and the coordinate
/// dimensions recovered from the header.
pub fn read_csv<F: Scalar>(text: &str) -> CoreResult<(Vec<TrajectoryRow<F>>, usize, usize)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let cols: Vec<&str> = header.split(',').collect();
    const FIXED: [&str; 8] = [
        "iter",
        "accepted",
        "r",
        "eps_i",
        "f_old",
        "f_new",
        "inner_steps",
        "inner_status",
    ];
    if cols.len() < FIXED.len() || cols[..FIXED.len()] != FIXED {
        return Err(parse_err(1, "unexpected header"));
    }
    let dim_x = cols[FIXED.len()..]
        .iter()
        .take_while(|c| c.starts_with('x'))
        .count();
    let dim_y = cols[FIXED.len() + dim_x..].len();
    if cols[FIXED.len() + dim_x..]
        .iter()
        .any(|c| !c.starts_with('y'))
    {
        return Err(parse_err(1, "coordinate columns must be x* then y*"));
    }

    let parse_f = |s: &str, line: usize| -> CoreResult<F> {
        let v: f64 = s
            .parse()
            .map_err(|_| parse_err(line, format!("bad float {s:?}")))?;
        F::from_f64(v).ok_or_else(|| parse_err(line, "float out of range"))
    };

    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let n = idx + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != FIXED.len() + dim_x + dim_y {
            return Err(parse_err(n, "wrong column count"));
        }
        let row = TrajectoryRow {
            iter: f[0].parse().map_err(|_| parse_err(n, "bad iter"))?,
            accepted: f[1].parse().map_err(|_| parse_err(n, "bad accepted"))?,
            r: f[2].parse().map_err(|_| parse_err(n, "bad r"))?,
            eps_i: parse_f(f[3], n)?,
            f_old: parse_f(f[4], n)?,
            f_new: parse_f(f[5], n)?,
            inner_steps: f[6].parse().map_err(|_| parse_err(n, "bad inner_steps"))?,
            inner_status: InnerStatus::parse(f[7])
                .ok_or_else(|| parse_err(n, "bad inner_status"))?,
            x: f[8..8 + dim_x]
                .iter()
                .map(|s| parse_f(s, n))
                .collect::<CoreResult<_>>()?,
            y: f[8 + dim_x..]
                .iter()
                .map(|s| parse_f(s, n))
                .collect::<CoreResult<_>>()?,
        };
        rows.push(row);
    }
    Ok((rows, dim_x, dim_y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<TrajectoryRow<f64>> {
        vec![
            TrajectoryRow {
                iter: 0,
                accepted: true,
                r: 0,
                eps_i: 0.025,
                f_old: f64::INFINITY,
                f_new: -60.5,
                inner_steps: 12,
                inner_status: InnerStatus::Converged,
                x: vec![5.5],
                y: vec![5.5],
            },
            TrajectoryRow {
                iter: 1,
                accepted: false,
                r: 1,
                eps_i: 0.025,
                f_old: -60.5,
                f_new: -60.4999999,
                inner_steps: 0,
                inner_status: InnerStatus::HitCap,
                x: vec![5.2],
                y: vec![4.9],
            },
        ]
    }

    #[test]
    fn roundtrip_is_identity() {
        let rows = sample_rows();
        let text = write_csv(&rows, 1, 1);
        let (back, dx, dy) = read_csv::<f64>(&text).unwrap();
        assert_eq!((dx, dy), (1, 1));
        assert_eq!(back, rows);
        // serialize(parse(serialize)) is byte-identical
        assert_eq!(write_csv(&back, 1, 1), text);
    }

    #[test]
    fn header_matches_schema() {
        let text = write_csv(&sample_rows(), 1, 1);
        assert!(
            text.starts_with("iter,accepted,r,eps_i,f_old,f_new,inner_steps,inner_status,x0,y0\n")
        );
    }

    #[test]
    fn infinity_survives_roundtrip() {
        let rows = sample_rows();
        let text = write_csv(&rows, 1, 1);
        let (back, _, _) = read_csv::<f64>(&text).unwrap();
        assert!(back[0].f_old.is_infinite());
    }

    #[test]
    fn multidimensional_columns_expand() {
        let row = TrajectoryRow {
            iter: 0,
            accepted: true,
            r: 0,
            eps_i: 0.1f64,
            f_old: 0.0,
            f_new: 0.0,
            inner_steps: 0,
            inner_status: InnerStatus::None,
            x: vec![1.0, 2.0],
            y: vec![3.0, 4.0, 5.0],
        };
        let text = write_csv(std::slice::from_ref(&row), 2, 3);
        assert!(text.contains("x0,x1,y0,y1,y2"));
        let (back, dx, dy) = read_csv::<f64>(&text).unwrap();
        assert_eq!((dx, dy), (2, 3));
        assert_eq!(back[0], row);
    }

    #[test]
    fn malformed_input_reports_line() {
        let text = "iter,accepted,r,eps_i,f_old,f_new,inner_steps,inner_status,x0,y0\n0,true,0,nope,1,1,0,Converged,0,0\n";
        match read_csv::<f64>(text) {
            Err(CoreError::TrajectoryParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
