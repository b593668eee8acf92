//! JSON rendering for reports.
//!
//! Floating-point numbers are written with 17 significant digits so every
//! `f64` survives a round trip; non-finite values become `null`.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use serde_json::{json, Value};

use crate::estimators::EstimateReport;
use crate::spectrum::SpectrumSummary;

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Pretty-printing formatter that writes floats as `d.dddddddddddddddde±x`.
struct SeventeenDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SeventeenDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

/// Pretty JSON with 17-digit floats and a trailing newline.
pub fn render(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SeventeenDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("values serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

impl EstimateReport {
    /// The report's JSON object. `per_trial_log` is included only when
    /// `verbose` is set.
    pub fn to_json(&self, verbose: bool) -> Value {
        let mut v = json!({
            "kind": self.kind.name(),
            "aggregation": self.aggregation.name(),
            "trials": self.trials,
            "estimate_log": finite_or_null(self.estimate.log_abs()),
            "estimate_sign": self.estimate.sign(),
            "exact_log": self.exact.and_then(|e| e.ln()).map_or(Value::Null, finite_or_null),
            "log_ratio": self.log_ratio.map_or(Value::Null, finite_or_null),
            "trials_zero": self.trials_zero,
            "seed": self.seed,
            "estimate_only": self.estimate_only,
        });
        if verbose {
            v["per_trial_log"] = Value::Array(
                self.per_trial
                    .iter()
                    .map(|t| finite_or_null(t.log_abs()))
                    .collect(),
            );
        }
        v
    }
}

impl SpectrumSummary {
    /// `{epsilon, sigma, log_det_trunc, log_det_small, s_eps, sigma_min}`;
    /// a zero `det_small` is written as `null`.
    pub fn to_json(&self) -> Value {
        json!({
            "epsilon": finite_or_null(self.epsilon),
            "sigma": self.sigma.sigma,
            "log_det_trunc": finite_or_null(self.log_det_trunc),
            "log_det_small": finite_or_null(self.log_det_small),
            "s_eps": self.s_eps,
            "sigma_min": finite_or_null(self.sigma_min),
        })
    }
}
