use std::ops::Deref;

use crate::{Error, Result};

/// A single event: its time and the dimension it occurred in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub dim: usize,
}

/// One realization: strictly increasing event times observed on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    id: String,
    dims: usize,
    events: Vec<Event>,
    horizon: f64,
}

impl EventStream {
    /// Validates ordering, dimension labels and the horizon. Tied timestamps
    /// are rejected.
    pub fn new(id: impl Into<String>, dims: usize, events: Vec<Event>, horizon: f64) -> Result<Self> {
        let id = id.into();
        if dims == 0 {
            return Err(Error::ShapeMismatch("a stream needs at least one dimension".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for (index, e) in events.iter().enumerate() {
            if !e.t.is_finite() {
                return Err(Error::NonFinite(format!("realization {id} event {index} time")));
            }
            if e.dim >= dims {
                return Err(Error::DimOutOfRange { dim: e.dim, dims });
            }
            if e.t < 0.0 || e.t <= prev {
                return Err(Error::NonMonotoneTime {
                    realization: id,
                    index,
                    t: e.t,
                });
            }
            prev = e.t;
        }
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::NonFinite(format!("realization {id} horizon {horizon}")));
        }
        if let Some(last) = events.last() {
            if horizon < last.t {
                return Err(Error::HorizonBeforeLastEvent {
                    horizon,
                    last: last.t,
                });
            }
        }
        Ok(Self {
            id,
            dims,
            events,
            horizon,
        })
    }

    /// Univariate stream from bare times.
    pub fn univariate(id: impl Into<String>, times: &[f64], horizon: f64) -> Result<Self> {
        let events = times.iter().map(|&t| Event { t, dim: 0 }).collect();
        Self::new(id, 1, events, horizon)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.events.last().map(|e| e.t)
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t).collect()
    }

    pub fn times_of(&self, dim: usize) -> Vec<f64> {
        self.events.iter().filter(|e| e.dim == dim).map(|e| e.t).collect()
    }

    pub fn count_in(&self, dim: usize) -> usize {
        self.events.iter().filter(|e| e.dim == dim).count()
    }

    /// Gaps between consecutive events of one dimension, the first measured from 0.
    pub fn inter_event_times(&self, dim: usize) -> Vec<f64> {
        let mut prev = 0.0;
        self.events
            .iter()
            .filter(|e| e.dim == dim)
            .map(|e| {
                let gap = e.t - prev;
                prev = e.t;
                gap
            })
            .collect()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

/// Ordered, non-empty collection of realizations of one process.
///
/// Dereferences to a slice so prefixes (`&set[..k]`) can be passed wherever
/// streams are expected.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationSet {
    streams: Vec<EventStream>,
}

impl RealizationSet {
    pub fn new(streams: Vec<EventStream>) -> Result<Self> {
        check_streams(&streams)?;
        Ok(Self { streams })
    }

    pub fn dims(&self) -> usize {
        self.streams[0].dims()
    }

    pub fn total_events(&self) -> usize {
        self.streams.iter().map(EventStream::len).sum()
    }

    pub fn into_streams(self) -> Vec<EventStream> {
        self.streams
    }
}

impl Deref for RealizationSet {
    type Target = [EventStream];

    fn deref(&self) -> &[EventStream] {
        &self.streams
    }
}

/// Non-empty with a common dimension count; returns that count.
pub fn check_streams(streams: &[EventStream]) -> Result<usize> {
    let first = streams.first().ok_or(Error::EmptySet)?;
    let dims = first.dims();
    if let Some(s) = streams.iter().find(|s| s.dims() != dims) {
        return Err(Error::ShapeMismatch(format!(
            "realization {} has {} dimensions, expected {dims}",
            s.id(),
            s.dims()
        )));
    }
    Ok(dims)
}
