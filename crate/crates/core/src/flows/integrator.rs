use serde::{Deserialize, Serialize};

use crate::gridcore::FieldScalar;
use crate::{Error, Result};

/// Explicit time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Rk4,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "euler" => Ok(Scheme::Euler),
            "rk4" => Ok(Scheme::Rk4),
            _ => Err(format!("unknown scheme {s:?} (expected euler or rk4)")),
        }
    }
}

fn axpy<T: FieldScalar>(y: &[T], k: &[T], a: f64) -> Vec<T> {
    y.iter().zip(k).map(|(&y, &k)| y + k * a).collect()
}

/// One step of y' = f(τ, y), where τ is the stage offset from the step start.
/// `fixup` runs on every intermediate and final state (ghost refresh).
pub fn advance<T, F, G>(
    y: &[T],
    dt: f64,
    scheme: Scheme,
    mut rhs: F,
    mut fixup: G,
) -> Result<Vec<T>>
where
    T: FieldScalar,
    F: FnMut(f64, &[T]) -> Result<Vec<T>>,
    G: FnMut(&mut Vec<T>),
{
    match scheme {
        Scheme::Euler => {
            let k1 = rhs(0.0, y)?;
            let mut out = axpy(y, &k1, dt);
            fixup(&mut out);
            Ok(out)
        }
        Scheme::Rk4 => {
            let k1 = rhs(0.0, y)?;
            let mut y2 = axpy(y, &k1, 0.5 * dt);
            fixup(&mut y2);
            let k2 = rhs(0.5 * dt, &y2)?;
            let mut y3 = axpy(y, &k2, 0.5 * dt);
            fixup(&mut y3);
            let k3 = rhs(0.5 * dt, &y3)?;
            let mut y4 = axpy(y, &k3, dt);
            fixup(&mut y4);
            let k4 = rhs(dt, &y4)?;
            let mut out: Vec<T> = (0..y.len())
                .map(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
                .collect();
            fixup(&mut out);
            Ok(out)
        }
    }
}

/// Number of steps of size `dt` needed to reach `t_end`; the last one may be shorter.
pub fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("dt = {dt} must be positive")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Config(format!(
            "t_end = {t_end} must be nonnegative"
        )));
    }
    Ok((t_end / dt - 1e-9).ceil().max(0.0) as usize)
}

/// Start and end time of step `k` out of `steps`, computed without drift.
pub fn step_times(k: usize, steps: usize, dt: f64, t_end: f64) -> (f64, f64) {
    let t0 = k as f64 * dt;
    let t1 = if k + 1 == steps {
        t_end
    } else {
        (k + 1) as f64 * dt
    };
    (t0, t1)
}
