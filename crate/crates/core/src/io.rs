//! CSV and JSON layouts. Floats are written with 12 significant digits so identical runs give
//! byte-identical files.

use std::io::{Read, Write};

use serde::Serialize;
use serde_json::Value;

use crate::analysis::{PortraitTrajectory, SensitivityCurve};
use crate::dynamics::TrajectoryRow;
use crate::elastic::ForceStretchSample;
use crate::error::{Error, Result};
use crate::thrust::ThrustProfile;

pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "theta", "theta_dot", "h", "h_dot", "h_ddot", "lambda", "F_l", "F_y", "F_N", "T_kin", "V_pot", "E_band",
];
pub const THRUST_HEADER: [&str; 7] = ["theta", "h", "lambda", "F_l", "F_y", "h_norm", "Fy_norm"];
pub const SENSITIVITY_HEADER: [&str; 4] = ["parameter", "proportion", "eta_pct", "status"];
pub const PORTRAIT_HEADER: [&str; 4] = ["t", "theta", "theta_dot", "energy"];
pub const FORCE_STRETCH_HEADER: [&str; 2] = ["lambda", "force_N"];

/// `x` in scientific notation with 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0".
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

fn round12(x: f64) -> f64 {
    if x.is_finite() {
        fmt_float(x).parse().unwrap_or(x)
    } else {
        x
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Input(e.to_string())
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(&r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    write_rows(
        out,
        &TRAJECTORY_HEADER,
        rows.iter().map(|r| {
            [
                r.t,
                r.theta,
                r.theta_dot,
                r.h,
                r.h_dot,
                r.h_ddot,
                r.lambda,
                r.drive_force,
                r.thrust,
                r.ground_reaction,
                r.kinetic,
                r.potential,
                r.band_energy,
            ]
            .map(fmt_float)
            .to_vec()
        }),
    )
}

pub fn write_thrust_csv<W: Write>(out: W, profile: &ThrustProfile) -> Result<()> {
    write_rows(
        out,
        &THRUST_HEADER,
        profile.samples.iter().map(|s| {
            [s.theta, s.h, s.lambda, s.drive_force, s.thrust, s.h_norm, s.thrust_norm]
                .map(fmt_float)
                .to_vec()
        }),
    )
}

pub fn write_sensitivity_csv<W: Write>(out: W, curves: &[SensitivityCurve]) -> Result<()> {
    write_rows(
        out,
        &SENSITIVITY_HEADER,
        curves.iter().flat_map(|c| {
            c.points.iter().map(move |p| {
                vec![
                    c.parameter.name().to_string(),
                    fmt_float(p.proportion),
                    p.eta.map(fmt_float).unwrap_or_default(),
                    p.status.clone(),
                ]
            })
        }),
    )
}

pub fn write_portrait_csv<W: Write>(out: W, trajectory: &PortraitTrajectory) -> Result<()> {
    write_rows(
        out,
        &PORTRAIT_HEADER,
        trajectory
            .points
            .iter()
            .map(|p| [p.t, p.theta, p.theta_dot, p.energy].map(fmt_float).to_vec()),
    )
}

/// Reads `lambda,force_N` rows. Slack rows (λ < 1) are rejected by sample validation.
pub fn read_force_stretch_csv<R: Read>(input: R) -> Result<Vec<ForceStretchSample>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers().map_err(io_err)?.clone();
    if header.iter().collect::<Vec<_>>() != FORCE_STRETCH_HEADER {
        return Err(Error::Input(format!(
            "expected header `lambda,force_N`, got `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Input(format!("row {}: missing column {k}", i + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("row {}: {e}", i + 1)))
        };
        out.push(ForceStretchSample::new(field(0)?, field(1)?)?);
    }
    Ok(out)
}

/// Serialises to a JSON tree with every float rounded to 12 significant digits.
pub fn to_json_value<T: Serialize>(value: &T) -> Result<Value> {
    let v = serde_json::to_value(value).map_err(io_err)?;
    Ok(round_json(v))
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = to_json_value(value)?;
    let mut s = serde_json::to_string_pretty(&v).map_err(io_err)?;
    s.push('\n');
    Ok(s)
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(0.066), "6.60000000000e-2");
        assert_eq!(fmt_float(-0.0), "0.00000000000e0");
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn json_rounding() {
        let s = to_json_string(&serde_json::json!({"x": 1.0 / 3.0, "n": 3, "v": [0.1 + 0.2]})).unwrap();
        assert!(s.contains("0.333333333333"));
        assert!(s.contains("0.3\n") || s.contains("0.3,") || s.contains("0.3\r") || s.contains("0.3 "));
    }

    #[test]
    fn force_stretch_reader() {
        let data = "lambda,force_N\n1.0,0\n1.5, 0.8\n";
        let s = read_force_stretch_csv(data.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].force, 0.8);
        assert!(read_force_stretch_csv("l,f\n1,2\n".as_bytes()).is_err());
        assert!(read_force_stretch_csv("lambda,force_N\n0.5,0\n".as_bytes()).is_err());
        assert!(read_force_stretch_csv("lambda,force_N\nx,0\n".as_bytes()).is_err());
    }
}
