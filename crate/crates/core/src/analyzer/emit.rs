use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::report::{Aggregate, PinchReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(Error::Config(format!(
                "unknown format {other:?}; expected json, csv or text"
            ))),
        }
    }
}

/// Floats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Pretty JSON whose floats always carry 17 significant digits.
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Deterministic JSON: field order follows the type definition.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, FixedFloat(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

pub fn from_json_bytes<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::Config(format!("invalid report JSON: {e}")))
}

/// CSV columns, in order.
pub const CSV_COLUMNS: [&str; 11] = [
    "row",
    "u",
    "S",
    "lambda1",
    "rho_perp",
    "rho_perp0",
    "minimality_residual",
    "nabla_h2",
    "simons_balance",
    "codazzi_defect",
    "normal_rank",
];

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv output failed: {e}"))
}

fn to_csv(report: &PinchReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for (i, p) in report.points.iter().enumerate() {
        let u =
            p.u.iter()
                .map(|x| fmt_f64(*x))
                .collect::<Vec<_>>()
                .join(";");
        let mut row = vec![i.to_string(), u];
        row.extend(
            [
                p.s,
                p.lambda1,
                p.rho_perp,
                p.rho_perp0,
                p.minimality_residual,
                p.nabla_h2,
                p.simons_balance,
                p.codazzi_defect,
            ]
            .iter()
            .map(|x| fmt_f64(*x)),
        );
        row.push(p.normal_rank.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    let a = &report.aggregates;
    let fields = [
        a.s,
        a.lambda1,
        a.rho_perp,
        a.rho_perp0,
        a.minimality_residual,
        a.nabla_h2,
        a.simons_balance,
        a.codazzi_defect,
    ];
    for (label, pick) in [("min", 0), ("max", 1), ("mean", 2)] {
        let mut row = vec![label.to_string(), String::new()];
        row.extend(
            fields
                .iter()
                .map(|g: &Aggregate| fmt_f64([g.min, g.max, g.mean][pick])),
        );
        row.push(String::new());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(csv_err)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "-".into())
}

fn to_text(r: &PinchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model        {}", r.model.id);
    let _ = writeln!(s, "n, m         {}, {}", r.n, r.m);
    let _ = writeln!(s, "grid         {:?} ({} points)", r.grid, r.points.len());
    let _ = writeln!(s, "verdict      {}", r.verdict.as_str());
    let _ = writeln!(s, "normal rank  {}", r.first_normal_rank);
    let _ = writeln!(s, "minimal      {}", r.minimal);
    let _ = writeln!(
        s,
        "\n{:<22}{:>26}{:>26}{:>26}",
        "field", "min", "max", "mean"
    );
    let a = &r.aggregates;
    for (name, g) in [
        ("S", a.s),
        ("lambda1", a.lambda1),
        ("rho_perp", a.rho_perp),
        ("rho_perp0", a.rho_perp0),
        ("minimality_residual", a.minimality_residual),
        ("nabla_h2", a.nabla_h2),
        ("simons_balance", a.simons_balance),
        ("codazzi_defect", a.codazzi_defect),
    ] {
        let _ = writeln!(
            s,
            "{:<22}{:>26}{:>26}{:>26}",
            name,
            fmt_f64(g.min),
            fmt_f64(g.max),
            fmt_f64(g.mean)
        );
    }
    let _ = writeln!(s, "\nexpected");
    for e in &r.model.expected {
        let _ = writeln!(
            s,
            "  {:<20}{:>26}  [{}]",
            e.name,
            fmt_f64(e.value),
            e.provenance.as_str()
        );
    }
    let h = &r.hypotheses;
    let _ = writeln!(s, "\nhypotheses");
    let _ = writeln!(
        s,
        "  inf(n - lambda1)      {}",
        fmt_f64(h.inf_n_minus_lambda1)
    );
    let _ = writeln!(s, "  rho_perp bound        {}", fmt_f64(h.rho_perp_bound));
    let _ = writeln!(s, "  lambda1 pinching      {}", h.thm11_hypothesis);
    let _ = writeln!(s, "  S pinching            {}", h.thm12_hypothesis);
    let _ = writeln!(s, "  delta sign            {:?}", h.cor13_delta_sign);
    let _ = writeln!(s, "  constant-S threshold  {:?}", h.cor14_hypothesis);
    let q = &r.quadrature;
    let _ = writeln!(s, "\nquadrature {:?}", q.nodes);
    let _ = writeln!(
        s,
        "  vol {}  int S {}  int S^2 {}",
        fmt_f64(q.vol),
        fmt_f64(q.int_s),
        fmt_f64(q.int_s2)
    );
    let c = &r.corollary;
    let _ = writeln!(
        s,
        "  delta {}  low {}  high {}  branch {:?}",
        fmt_f64(c.delta),
        opt(c.low),
        opt(c.high),
        c.branch
    );
    let _ = writeln!(
        s,
        "  threshold {}  satisfied {:?}",
        opt(c.threshold),
        c.threshold_satisfied
    );
    let v = &r.convergence;
    let _ = writeln!(
        s,
        "\nconvergence: grid {:?} gives mean S {} (change {}), mean lambda1 {} (change {})",
        v.coarse_grid,
        fmt_f64(v.s_mean_coarse),
        fmt_f64(v.s_mean_change),
        fmt_f64(v.lambda1_mean_coarse),
        fmt_f64(v.lambda1_mean_change)
    );
    let _ = writeln!(s, "\nchecks");
    for ch in &r.checks {
        let _ = writeln!(
            s,
            "  {:<5} {:<30} {}",
            if ch.passed { "PASS" } else { "FAIL" },
            ch.name,
            ch.detail
        );
    }
    let p = &r.provenance;
    let _ = writeln!(
        s,
        "\nfd_step {} ({}), margin {}, seed {:?}, version {}",
        fmt_f64(p.fd_step),
        p.fd_scheme,
        fmt_f64(p.margin),
        p.seed,
        p.version
    );
    s
}

/// Serializes a report. Output is a pure function of the report.
pub fn report_emit(report: &PinchReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => to_json_bytes(report),
        Format::Csv => to_csv(report),
        Format::Text => Ok(to_text(report).into_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_fixed_format() {
        for v in [
            0.0,
            -0.0,
            1.0 / 3.0,
            4.0 / 3.0,
            1e-300,
            -2.5e17,
            f64::MIN_POSITIVE,
            0.1 + 0.2,
        ] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        let bytes = to_json_bytes(&vec![1.0 / 3.0, 2.0]).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("3.3333333333333331e-1"));
        let back: Vec<f64> = from_json_bytes(&bytes).unwrap();
        assert_eq!(back, vec![1.0 / 3.0, 2.0]);
    }

    #[test]
    fn unknown_format_is_a_config_error() {
        assert!(matches!("xml".parse::<Format>(), Err(Error::Config(_))));
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
    }
}
