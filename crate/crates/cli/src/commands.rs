use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rfbroker_core::catalog::{ingest_catalog, Catalog, CatalogDocument, QosMode};
use rfbroker_core::pipeline::{select, SelectionReport, SelectionStatus};
use rfbroker_core::request::parse_request;
use rfbroker_core::scoring::{normalize_offers, validate_request, ScoringError};
use rfbroker_core::SelectionError;

use crate::exit::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: cannot read: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::io(format!("{}: cannot write: {e}", path.display())))
}

fn load_catalog(path: &Path) -> Result<Catalog, CliError> {
    let text = read(path)?;
    ingest_catalog(&text).map_err(|e| {
        let mut msg = format!("{}: {e}", path.display());
        if !e.issues().is_empty() {
            msg = format!("{}: catalog rejected", path.display());
            for issue in e.issues() {
                let _ = write!(msg, "\n  {issue}");
            }
        }
        CliError::invalid(msg)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Table,
}

pub fn rank(
    catalog_path: &Path,
    request_path: &Path,
    out: Option<&Path>,
    format: Format,
    tolerance: f64,
) -> Result<String, CliError> {
    let catalog = load_catalog(catalog_path)?;
    let request_text = read(request_path)?;
    let request = parse_request(&request_text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", request_path.display())))?;
    let report = select(&catalog, &request, tolerance).map_err(|e| match e {
        SelectionError::Invalid(violations) => {
            let mut msg = format!("{}: request rejected", request_path.display());
            for v in violations {
                let _ = write!(msg, "\n  {v}");
            }
            CliError::invalid(msg)
        }
        other => CliError::invalid(format!("{}: {other}", request_path.display())),
    })?;

    let json = report.to_json_pretty();
    if let Some(out) = out {
        write(out, &json)?;
    }
    Ok(match format {
        Format::Json => json,
        Format::Table => render_table(&report),
    })
}

pub fn render_table(report: &SelectionReport) -> String {
    let ranking = &report.ranking;
    let mut s = String::new();
    let _ = writeln!(s, "threshold EU = {:.4}", ranking.threshold);
    if report.status == SelectionStatus::NoMatch {
        let _ = writeln!(s, "no matching providers");
        for r in &report.excluded {
            let reasons: Vec<_> = r.mismatches.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "  {}: {}", r.provider_id, reasons.join("; "));
        }
        return s;
    }
    let width = ranking
        .entries
        .iter()
        .map(|e| e.provider_id.len())
        .max()
        .unwrap_or(0)
        .max("provider".len());
    let _ = writeln!(s, "{:<width$}  {:>6}  eligible", "provider", "AU");
    for e in &ranking.entries {
        let _ = writeln!(
            s,
            "{:<width$}  {:>6.4}  {}",
            e.provider_id,
            e.aggregate_utility,
            if e.eligible { "yes" } else { "no" }
        );
    }
    if !report.excluded.is_empty() {
        let ids: Vec<_> = report
            .excluded
            .iter()
            .map(|r| r.provider_id.as_str())
            .collect();
        let _ = writeln!(s, "excluded by functional requirements: {}", ids.join(", "));
    }
    if let Some(p) = &report.selected_provider {
        let _ = writeln!(s, "selected: {p}");
    }
    let _ = writeln!(s, "threshold EU = {:.4}", ranking.threshold);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Auto,
    Catalog,
    Request,
}

pub fn validate(path: &Path, kind: Kind, tolerance: f64) -> Result<String, CliError> {
    let text = read(path)?;
    let kind = match kind {
        Kind::Auto => {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
                CliError::invalid(format!("{}: not valid JSON: {e}", path.display()))
            })?;
            if value.get("attributes").is_some() {
                Kind::Catalog
            } else {
                Kind::Request
            }
        }
        k => k,
    };
    match kind {
        Kind::Catalog => {
            let catalog = load_catalog(path)?;
            Ok(format!(
                "{}: valid {} catalog, {} attribute(s), {} provider(s)",
                path.display(),
                match catalog.mode() {
                    QosMode::Normalized => "normalized",
                    QosMode::Raw => "raw",
                },
                catalog.registry().len(),
                catalog.providers().len()
            ))
        }
        _ => {
            let req = parse_request(&text)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            let mut problems: Vec<String> = req.functional.invalid_minimums();
            match validate_request(req.weights, req.sensitivities, req.minima, tolerance) {
                Ok(_) => {}
                Err(ScoringError::Validation(v)) => {
                    problems.extend(v.iter().map(ToString::to_string))
                }
                Err(e) => problems.push(e.to_string()),
            }
            if problems.is_empty() {
                Ok(format!("{}: valid selection request", path.display()))
            } else {
                Err(CliError::invalid(format!(
                    "{}: request rejected\n  {}",
                    path.display(),
                    problems.join("\n  ")
                )))
            }
        }
    }
}

/// Converts a raw catalog into a normalized one.
pub fn normalize(catalog_path: &Path, out: Option<&Path>) -> Result<String, CliError> {
    let catalog = load_catalog(catalog_path)?;
    let mut doc: CatalogDocument = catalog.to_document();
    if catalog.mode() == QosMode::Raw && !catalog.providers().is_empty() {
        let refs: Vec<_> = catalog.providers().iter().collect();
        let offers = normalize_offers(&refs, catalog.registry())
            .map_err(|e| CliError::invalid(format!("{}: {e}", catalog_path.display())))?;
        for (p, offer) in doc.providers.iter_mut().zip(offers) {
            p.qos_offering = offer.values().clone();
        }
    }
    doc.mode = QosMode::Normalized;
    let json = serde_json::to_string_pretty(&doc).expect("catalog document serializes");
    if let Some(out) = out {
        write(out, &json)?;
    }
    Ok(json)
}
