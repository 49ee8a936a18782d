//! Text formats: event CSV, horizon CSV, parameter JSON, estimates JSON.
//!
//! The event CSV has the header `realization_id,dim,t` and one row per
//! event, grouped by realization with times increasing. Observation
//! horizons travel in a companion CSV `realization_id,horizon`; without it
//! each realization is observed up to its last event (or a caller-supplied
//! common horizon). Realizations keep the order of first appearance, with
//! ids that only appear in the horizon file becoming empty streams.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so
//! writing then parsing reproduces every `f64` exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::estimators::DecayEstimates;
use crate::model::{Event, EventStream, HawkesParams, ParamsDoc, RealizationSet};
use crate::{Error, Result};

pub const EVENTS_HEADER: &str = "realization_id,dim,t";
pub const HORIZONS_HEADER: &str = "realization_id,horizon";

/// How to close each realization's observation window.
#[derive(Debug, Clone, Default)]
pub enum Horizons {
    /// Up to the last event of each realization.
    #[default]
    LastEvent,
    /// One horizon for every realization.
    Common(f64),
    /// Per-realization horizons, in realization order.
    PerRealization(Vec<(String, f64)>),
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })
}

fn rows(text: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((i, first)) = lines.next() else {
        return Err(Error::EmptyInput);
    };
    if first.trim().trim_start_matches('\u{feff}') != header {
        return Err(Error::Parse {
            line: i + 1,
            msg: format!("expected header {header:?}, found {:?}", first.trim()),
        });
    }
    let width = header.split(',').count();
    lines
        .map(|(i, l)| {
            let fields: Vec<String> = l.split(',').map(|f| f.trim().to_string()).collect();
            if fields.len() != width {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            Ok((i + 1, fields))
        })
        .collect()
}

fn number(line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what} {field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("{what} {field:?} is not finite"),
        });
    }
    Ok(v)
}

/// Parses horizon CSV text.
pub fn parse_horizons(text: &str) -> Result<Vec<(String, f64)>> {
    let rows = rows(text, HORIZONS_HEADER)?;
    let mut seen = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        if seen.insert(f[0].clone(), line).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("realization {:?} listed twice", f[0]),
            });
        }
        out.push((f[0].clone(), number(line, &f[1], "horizon")?));
    }
    Ok(out)
}

/// Parses event CSV text. `dims` fixes M; otherwise it is one more than the
/// largest label seen.
pub fn parse_events_str(text: &str, dims: Option<usize>, horizons: &Horizons) -> Result<RealizationSet> {
    let rows = rows(text, EVENTS_HEADER)?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Event>> = HashMap::new();
    let mut last_id: Option<String> = None;
    let mut max_dim = 0;
    for (line, f) in &rows {
        let dim: usize = f[1].parse().map_err(|_| Error::Parse {
            line: *line,
            msg: format!("dim {:?} is not a nonnegative integer", f[1]),
        })?;
        let t = number(*line, &f[2], "time")?;
        if let Some(m) = dims {
            if dim >= m {
                return Err(Error::DimOutOfRange { dim, dims: m });
            }
        }
        max_dim = max_dim.max(dim);
        let id = &f[0];
        if last_id.as_deref() != Some(id.as_str()) {
            if groups.contains_key(id) {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("rows of realization {id:?} are not contiguous"),
                });
            }
            order.push(id.clone());
            groups.insert(id.clone(), Vec::new());
            last_id = Some(id.clone());
        }
        groups.get_mut(id).expect("inserted above").push(Event { t, dim });
    }
    let dims = dims.unwrap_or(max_dim + 1);

    let windows: Vec<(String, Option<f64>)> = match horizons {
        Horizons::PerRealization(list) => {
            if let Some(missing) = order.iter().find(|id| !list.iter().any(|(h, _)| h == *id)) {
                return Err(Error::InvalidConfig(format!("no horizon given for realization {missing:?}")));
            }
            list.iter().map(|(id, h)| (id.clone(), Some(*h))).collect()
        }
        Horizons::Common(h) => order.iter().map(|id| (id.clone(), Some(*h))).collect(),
        Horizons::LastEvent => order.iter().map(|id| (id.clone(), None)).collect(),
    };
    if windows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let streams = windows
        .into_iter()
        .map(|(id, h)| {
            let events = groups.remove(&id).unwrap_or_default();
            let horizon = match h {
                Some(h) => h,
                None => events.last().map(|e| e.t).unwrap_or(0.0),
            };
            EventStream::new(id, dims, events, horizon)
        })
        .collect::<Result<Vec<_>>>()?;
    RealizationSet::new(streams)
}

/// Reads an event CSV and, if given, its horizon CSV.
pub fn parse_events(path: &Path, dims: Option<usize>, horizons_path: Option<&Path>, common: Option<f64>) -> Result<RealizationSet> {
    let text = read(path)?;
    let horizons = match (horizons_path, common) {
        (Some(p), _) => Horizons::PerRealization(parse_horizons(&read(p)?)?),
        (None, Some(h)) => Horizons::Common(h),
        (None, None) => Horizons::LastEvent,
    };
    parse_events_str(&text, dims, &horizons)
}

pub fn write_events(streams: &[EventStream]) -> String {
    let mut out = String::with_capacity(32 * streams.iter().map(EventStream::len).sum::<usize>() + 32);
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    for s in streams {
        for e in s.events() {
            let _ = writeln!(out, "{},{},{}", s.id(), e.dim, e.t);
        }
    }
    out
}

pub fn write_horizons(streams: &[EventStream]) -> String {
    let mut out = String::from(HORIZONS_HEADER);
    out.push('\n');
    for s in streams {
        let _ = writeln!(out, "{},{}", s.id(), s.horizon());
    }
    out
}

pub fn parse_params_str(text: &str) -> Result<HawkesParams> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let doc: ParamsDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    HawkesParams::from_doc(doc)
}

pub fn parse_params(path: &Path) -> Result<HawkesParams> {
    parse_params_str(&read(path)?)
}

pub fn write_params(params: &HawkesParams) -> String {
    serde_json::to_string_pretty(&params.to_doc()).expect("parameters serialize")
}

pub fn parse_estimates_str(text: &str) -> Result<DecayEstimates> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let est: DecayEstimates = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    est.check()?;
    Ok(est)
}

pub fn parse_estimates(path: &Path) -> Result<DecayEstimates> {
    parse_estimates_str(&read(path)?)
}

pub fn write_estimates(est: &DecayEstimates) -> String {
    serde_json::to_string_pretty(est).expect("estimates serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Decay;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        assert!(matches!(parse_events_str("", None, &Horizons::LastEvent), Err(Error::EmptyInput)));
        assert!(matches!(
            parse_events_str("realization_id,dim,t\n", None, &Horizons::LastEvent),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn duplicate_timestamp_is_rejected() {
        let text = "realization_id,dim,t\na,0,1.0\na,0,1.0\n";
        assert!(matches!(
            parse_events_str(text, Some(1), &Horizons::LastEvent),
            Err(Error::NonMonotoneTime { index: 1, .. })
        ));
    }

    #[test]
    fn dimension_and_syntax_errors() {
        let text = "realization_id,dim,t\na,2,1.0\n";
        assert!(matches!(
            parse_events_str(text, Some(2), &Horizons::LastEvent),
            Err(Error::DimOutOfRange { dim: 2, dims: 2 })
        ));
        let text = "realization_id,dim,t\na,0,1.0\na,0,zz\n";
        assert!(matches!(
            parse_events_str(text, None, &Horizons::LastEvent),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = "id,dim,t\na,0,1.0\n";
        assert!(matches!(parse_events_str(text, None, &Horizons::LastEvent), Err(Error::Parse { line: 1, .. })));
        let text = "realization_id,dim,t\na,0,1.0\nb,0,1.0\na,0,2.0\n";
        assert!(matches!(parse_events_str(text, None, &Horizons::LastEvent), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn horizon_modes() {
        let text = "realization_id,dim,t\n7,0,0.5\n7,1,1.5\n3,0,0.25\n";
        let set = parse_events_str(text, None, &Horizons::LastEvent).unwrap();
        assert_eq!(set.dims(), 2);
        assert_eq!(set[0].id(), "7");
        assert_eq!(set[0].horizon(), 1.5);
        let set = parse_events_str(text, None, &Horizons::Common(10.0)).unwrap();
        assert_eq!(set[1].horizon(), 10.0);
        let h = parse_horizons("realization_id,horizon\n7,2\n9,4\n3,1\n").unwrap();
        let set = parse_events_str(text, None, &Horizons::PerRealization(h)).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set[1].is_empty());
        assert_eq!(set[2].horizon(), 1.0);
    }

    #[test]
    fn params_documents() {
        let p = parse_params_str(r#"{"mu":[0.1],"alpha":[[0.5]],"beta":1.2}"#).unwrap();
        assert_eq!(p, HawkesParams::univariate(0.1, 0.5, 1.2).unwrap());
        let err = parse_params_str(r#"{"mu":[0.1],"alpha":[[0.5,0.1],[0.1,0.1]],"beta":1.2}"#).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
        let m = parse_params_str(r#"{"mu":[0.1,0.2],"alpha":[[0.5,0.1],[0.1,0.1]],"beta":[[1,2],[3,4]]}"#).unwrap();
        assert!(matches!(m.beta(), Decay::PerPair(_)));
        assert!(!m.is_fittable());
        assert_eq!(parse_params_str(&write_params(&m)).unwrap(), m);
    }

    #[test]
    fn estimates_documents() {
        let e = parse_estimates_str(r#"{"values":[0.5,1.5],"method":"nonlinear"}"#).unwrap();
        assert_eq!(e.values, [0.5, 1.5]);
        assert_eq!(parse_estimates_str(&write_estimates(&e)).unwrap(), e);
        assert!(parse_estimates_str(r#"{"values":[0.5,-1]}"#).is_err());
    }

    fn arb_set() -> impl Strategy<Value = Vec<EventStream>> {
        let stream = (1usize..4, prop::collection::vec((1e-6f64..10.0, 0usize..3), 0..40), 0.0f64..5.0);
        prop::collection::vec(stream, 1..5).prop_map(|specs| {
            specs
                .into_iter()
                .enumerate()
                .map(|(k, (dims, gaps, extra))| {
                    let mut t = 0.0;
                    let events = gaps
                        .into_iter()
                        .map(|(g, d)| {
                            t += g;
                            Event { t, dim: d % dims }
                        })
                        .collect();
                    EventStream::new(format!("r{k}"), 3, events, t + extra + 1e-3).unwrap()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(set in arb_set()) {
            let h = parse_horizons(&write_horizons(&set)).unwrap();
            let back = parse_events_str(&write_events(&set), Some(3), &Horizons::PerRealization(h)).unwrap();
            prop_assert_eq!(back.into_streams(), set);
        }
    }
}
