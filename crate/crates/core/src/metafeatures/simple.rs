use crate::data::{AttributeKind, Dataset};
use crate::metafeatures::summary;

/// Counts refer to the original attributes; logical attributes count as
/// nominal with two symbols.
pub fn extract_simple(d: &Dataset) -> Vec<f64> {
    let attributes = d.attributes.len() as f64;
    let numeric = d.attributes.iter().filter(|a| a.is_numeric()).count() as f64;
    let symbols: Vec<f64> = d
        .attributes
        .iter()
        .filter_map(|a| match a.kind {
            AttributeKind::Numeric => None,
            AttributeKind::Nominal { categories } => Some(categories as f64),
            AttributeKind::Logical => Some(2.0),
        })
        .collect();
    let nominal = symbols.len() as f64;
    let n = d.n_instances() as f64;
    let freqs: Vec<f64> = d.class_counts().iter().map(|&c| c as f64 / n).collect();
    let ratio = |a: f64| if attributes > 0.0 { a / attributes } else { 0.0 };
    let s = summary(&symbols);
    let c = summary(&freqs);
    vec![
        d.n_classes as f64,
        attributes,
        numeric,
        nominal,
        n,
        ratio(n),
        ratio(numeric),
        ratio(nominal),
        s[0],
        s[1],
        s[2],
        s[3],
        symbols.iter().sum(),
        c[0],
        c[1],
        c[2],
        c[3],
    ]
}
