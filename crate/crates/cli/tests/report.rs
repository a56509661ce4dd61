use infsup_cli::config::ResolvedConfig;
use infsup_cli::report::{
    format_f64, from_json_str, read_report, to_csv_string, to_json_string, write_report, Bound, Check, ReportDocument,
    ReportError, ReportFormat, Summary, CSV_HEADER,
};
use infsup_core::mesh::{DomainKind, DomainSpec};
use infsup_core::pipeline::{compute_case, extrapolate, CaseSpec};
use proptest::prelude::*;
use std::sync::OnceLock;

const SCHEMA: &str = include_str!("../../../schema/report.schema.json");

fn sample() -> ReportDocument {
    static SAMPLE: OnceLock<ReportDocument> = OnceLock::new();
    SAMPLE.get_or_init(build_sample).clone()
}

fn build_sample() -> ReportDocument {
    let domain = DomainSpec::new(DomainKind::Annulus { inner_radius: 0.4 }, 2).unwrap();
    let mut spec = CaseSpec::new(domain, 1, vec![0]);
    spec.lbb_cross_check_enabled = true;
    spec.holomorphic_oracle_degree = Some(3);
    let report = compute_case(&spec).unwrap();
    let mut config = ResolvedConfig::empty("compute");
    config.domain = Some(domain);
    config.ell = Some(1);
    config.refinement_levels = vec![0];
    config.output = Some("x.json".into());
    config.format = Some(ReportFormat::Json);
    let series = extrapolate(vec![0, 1, 2], vec![1.5, 1.75, 1.8125]).unwrap();
    let summary = Summary {
        max_identity_deviation: report.max_identity_deviation(),
        holomorphic_gamma: report.holomorphic_gamma,
        convergence: Some(series),
        checks: vec![Check::new("identity_deviation", 1e-15, Bound::AtMost, 1e-7)],
        ..Summary::default()
    };
    ReportDocument::new(config, report.levels, summary)
}

fn validator() -> jsonschema::Validator {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn json_round_trip_is_lossless() {
    let doc = sample();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report(&doc, &path, ReportFormat::Json).unwrap();
    assert_eq!(read_report(&path).unwrap(), doc);
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let text = to_json_string(&sample());
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut floats = 0;
    for token in text.split([',', ':', '[', ']', '{', '}']) {
        if token.contains('e') && token.chars().next().is_some_and(|c| c == '-' || c.is_ascii_digit()) {
            let mantissa = token.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.len(), 18, "{token}");
            floats += 1;
        }
    }
    assert!(floats >= 15, "{floats}");
    assert!(value["levels"][0]["c_h"].is_number());
}

#[test]
fn json_validates_against_schema() {
    let v = validator();
    let value: serde_json::Value = serde_json::from_str(&to_json_string(&sample())).unwrap();
    let errors: Vec<String> = v.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");

    let mut broken = value.clone();
    broken["levels"][0]["dofs"] = serde_json::json!(-3);
    assert!(!v.is_valid(&broken));
    let mut extra = value;
    extra["surprise"] = serde_json::json!(1);
    assert!(!v.is_valid(&extra));
}

#[test]
fn csv_has_fixed_header_and_one_row_per_level() {
    let doc = sample();
    let text = to_csv_string(&doc);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,h,dofs,C_h,beta_squared,gamma_identity,gamma_direct,identity_deviation,lbb_beta_squared,b0,b1,b2,seconds"
    );
    assert_eq!(CSV_HEADER.split(',').count(), 13);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 13);
    assert_eq!(&row[9..12], &["1", "1", "0"]);
    assert_eq!(row[12], "");
    let c: f64 = row[3].parse().unwrap();
    assert_eq!(Some(c), doc.levels[0].c_h);
    assert!(lines.next().is_none());
}

#[test]
fn summary_flags_failures() {
    let mut config = ResolvedConfig::empty("compute");
    config.refinement_levels = vec![];
    let failing = ReportDocument::new(
        config.clone(),
        Vec::new(),
        Summary {
            checks: vec![Check::new("c", 2.0, Bound::AtMost, 1.0)],
            ..Summary::default()
        },
    );
    assert!(!failing.summary.passed);
    let passing = ReportDocument::new(
        config,
        Vec::new(),
        Summary {
            checks: vec![Check::new("c", 2.0, Bound::AtLeast, 1.0)],
            ..Summary::default()
        },
    );
    assert!(passing.summary.passed);
}

#[test]
fn malformed_reports_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"schema_version\": 1").unwrap();
    assert!(matches!(read_report(&path), Err(ReportError::Parse { .. })));
    assert!(matches!(
        read_report(&dir.path().join("none.json")),
        Err(ReportError::Io { .. })
    ));
    assert!(write_report(&sample(), &dir.path().join("no/such/dir/r.json"), ReportFormat::Json).is_err());
}

proptest! {
    #[test]
    fn float_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = format_f64(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        let via_json: f64 = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(via_json.to_bits(), x.to_bits());
    }

    #[test]
    fn documents_with_arbitrary_values_round_trip(h in 1e-300f64..1e300, c in 1.0f64..1e12) {
        let mut doc = sample();
        doc.levels[0].h = h;
        doc.levels[0].c_h = Some(c);
        doc.summary.holomorphic_gamma = Some(-c);
        let back = from_json_str(&to_json_string(&doc)).unwrap();
        prop_assert_eq!(back, doc);
    }
}
