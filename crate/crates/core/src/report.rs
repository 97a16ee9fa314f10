//! Run results and per-iteration traces.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Both residuals at or below the tolerance.
    Converged,
    MaxIterReached,
    /// Primal residual above the divergence bound, or a non-finite value.
    Diverged,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterReached => "max_iter_reached",
            Status::Diverged => "diverged",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the convergence trace. `iter` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    #[serde(with = "lossless_f64")]
    pub r: f64,
    #[serde(with = "lossless_f64")]
    pub s: f64,
    #[serde(with = "lossless_f64")]
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(with = "lossless_vec")]
    pub solution: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceRecord>,
    #[serde(with = "lossless_f64")]
    pub final_r: f64,
    #[serde(with = "lossless_f64")]
    pub final_s: f64,
    /// Tolerance the residuals were compared against.
    pub epsilon: f64,
    /// Objective at `solution`.
    #[serde(with = "lossless_f64")]
    pub objective: f64,
    /// Disagreement between the duplicated primal copies at exit
    /// (`max |p_{i+1} - q_i|` on the chain, `max |g - h|` on the DAG).
    #[serde(with = "lossless_f64")]
    pub consistency_gap: f64,
    /// How the solution was read out of the split variables.
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// JSON has no encoding for non-finite floats; diverged runs produce them.
/// They are written as the strings `"inf"`, `"-inf"` and `"nan"`.
pub(crate) mod lossless_f64 {
    use serde::de::{self, Deserializer, Visitor};
    use serde::ser::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct F64Visitor;

    impl Visitor<'_> for F64Visitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("unexpected float string {other:?}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(F64Visitor)
    }

    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(transparent)]
    pub(crate) struct Wrapped(#[serde(with = "self")] pub f64);
}

pub(crate) mod lossless_vec {
    use super::lossless_f64::Wrapped;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Wrapped> = v.iter().map(|&a| Wrapped(a)).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let wrapped = Vec::<Wrapped>::deserialize(d)?;
        Ok(wrapped.into_iter().map(|w| w.0).collect())
    }
}
