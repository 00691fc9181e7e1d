//! Music-streaming application: song catalog, Zipf popularity, and the
//! per-consumer streaming session with pipelining and a playback buffer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::WorkloadError;
use crate::ndn::Name;
use crate::time::SimDuration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScriptedConsumer {
    pub vehicle: String,
    pub song: usize,
    pub start_s: f64,
    /// Area label to bind the song prefix to before the first Interest.
    pub prebind_area: Option<String>,
}

impl Default for ScriptedConsumer {
    fn default() -> Self {
        ScriptedConsumer {
            vehicle: String::new(),
            song: 0,
            start_s: 0.0,
            prebind_area: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadParams {
    pub provider: String,
    pub n_songs: usize,
    pub chunks_per_song: u32,
    pub song_duration_s: f64,
    pub payload_bytes: u32,
    pub consumer_fraction: f64,
    pub pipeline_limit: usize,
    pub buffer_ms: u64,
    pub top_fraction: f64,
    pub top_mass: f64,
    /// Consumers start uniformly within this window after their arrival.
    pub start_window_s: f64,
    /// When non-empty, replaces random consumer selection.
    pub scripted: Vec<ScriptedConsumer>,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            provider: "provider".into(),
            n_songs: 100,
            chunks_per_song: 1700,
            song_duration_s: 180.0,
            payload_bytes: 1024,
            consumer_fraction: 0.2,
            pipeline_limit: 20,
            buffer_ms: 30_000,
            top_fraction: 0.12,
            top_mass: 0.88,
            start_window_s: 1.0,
            scripted: Vec::new(),
        }
    }
}

impl WorkloadParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.provider.is_empty() || self.provider.contains('/') {
            return Err(format!(
                "provider {:?} must be one non-empty name component",
                self.provider
            ));
        }
        if self.chunks_per_song == 0 || self.pipeline_limit == 0 || self.payload_bytes == 0 {
            return Err(
                "chunks_per_song, pipeline_limit and payload_bytes must be positive".into(),
            );
        }
        if !(self.song_duration_s > 0.0 && self.song_duration_s.is_finite()) {
            return Err("song_duration_s must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.consumer_fraction) {
            return Err(format!(
                "consumer_fraction must be in [0, 1], got {}",
                self.consumer_fraction
            ));
        }
        if !(self.start_window_s >= 0.0 && self.start_window_s.is_finite()) {
            return Err("start_window_s must be non-negative".into());
        }
        if self.buffer_ms < self.chunk_play().as_micros().div_ceil(1000) {
            return Err("buffer_ms must hold at least one chunk".into());
        }
        for s in &self.scripted {
            if s.song >= self.n_songs {
                return Err(format!(
                    "scripted song {} outside catalog of {}",
                    s.song, self.n_songs
                ));
            }
            if !(s.start_s >= 0.0 && s.start_s.is_finite()) {
                return Err(format!(
                    "scripted start_s {} must be non-negative",
                    s.start_s
                ));
            }
        }
        Ok(())
    }

    pub fn chunk_play(&self) -> SimDuration {
        SimDuration::from_micros(
            (self.song_duration_s * 1e6 / self.chunks_per_song as f64).round() as u64,
        )
    }

    pub fn catalog(&self) -> Catalog {
        Catalog {
            provider: self.provider.clone(),
            n_songs: self.n_songs,
            chunks_per_song: self.chunks_per_song,
            chunk_play: self.chunk_play(),
            payload_bytes: self.payload_bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub provider: String,
    pub n_songs: usize,
    pub chunks_per_song: u32,
    pub chunk_play: SimDuration,
    pub payload_bytes: u32,
}

impl Catalog {
    pub fn provider_prefix(&self) -> Name {
        Name::from_components([self.provider.as_str()]).expect("validated provider")
    }

    pub fn song_prefix(&self, song: usize) -> Name {
        Name::from_components([self.provider.clone(), format!("song{song}")])
            .expect("non-empty components")
    }

    pub fn chunk_name(&self, song: usize, chunk: u32) -> Name {
        Name::from_components([
            self.provider.clone(),
            format!("song{song}"),
            format!("chunk{chunk}"),
        ])
        .expect("non-empty components")
    }

    /// `(song, chunk)` for a name of this catalog.
    pub fn parse_chunk(&self, name: &Name) -> Option<(usize, u32)> {
        let [p, s, c] = name.components() else {
            return None;
        };
        if *p != self.provider {
            return None;
        }
        let song: usize = s.strip_prefix("song")?.parse().ok()?;
        let chunk: u32 = c.strip_prefix("chunk")?.parse().ok()?;
        (song < self.n_songs && chunk < self.chunks_per_song).then_some((song, chunk))
    }

    pub fn has(&self, name: &Name) -> bool {
        self.parse_chunk(name).is_some()
    }
}

fn top_count(n: usize, top_fraction: f64) -> usize {
    ((top_fraction * n as f64).round() as usize).clamp(1, n)
}

/// Share of requests that go to the `top` most popular of `n` ranks.
pub fn zipf_top_share(n: usize, top: usize, alpha: f64) -> f64 {
    let mut head = 0.0;
    let mut total = 0.0;
    for r in 1..=n {
        let w = (r as f64).powf(-alpha);
        total += w;
        if r <= top {
            head += w;
        }
    }
    head / total
}

/// Zipf exponent that puts `mass` of the requests on the top `top_fraction`
/// of `n` songs. The share grows monotonically with the exponent, so plain
/// bisection converges.
pub fn calibrate_alpha(n: usize, top_fraction: f64, mass: f64) -> Result<f64, WorkloadError> {
    if n < 10 {
        return Err(WorkloadError::TooFewSongs(n));
    }
    let top = top_count(n, top_fraction);
    let infeasible = WorkloadError::Infeasible { n, top, mass };
    if !(mass > top as f64 / n as f64 && mass < 1.0) {
        return Err(infeasible);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while zipf_top_share(n, top, hi) < mass {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(infeasible);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if zipf_top_share(n, top, mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Inverse-CDF sampler over ranks `0..n` (rank 0 most popular).
#[derive(Debug, Clone)]
pub struct ZipfPopularity {
    pub alpha: f64,
    cdf: Vec<f64>,
}

impl ZipfPopularity {
    pub fn new(n: usize, alpha: f64) -> Self {
        let weights: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-alpha)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        ZipfPopularity { alpha, cdf }
    }

    pub fn calibrated(n: usize, top_fraction: f64, mass: f64) -> Result<Self, WorkloadError> {
        Ok(Self::new(n, calibrate_alpha(n, top_fraction, mass)?))
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn probability(&self, rank: usize) -> f64 {
        self.cdf[rank] - if rank == 0 { 0.0 } else { self.cdf[rank - 1] }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf
            .partition_point(|c| *c <= u)
            .min(self.cdf.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tick {
    /// Playback has not started (first chunk missing).
    Waiting,
    Played,
    /// The next chunk is missing. `first` is true on the first stall of the song.
    Stalled {
        first: bool,
    },
    Finished,
}

/// One song being streamed.
#[derive(Debug, Clone)]
pub struct StreamSession {
    pub song: usize,
    chunks: u32,
    pipeline_limit: usize,
    window: u32,
    next_to_request: u32,
    pending: std::collections::BTreeSet<u32>,
    received: Vec<bool>,
    play_index: u32,
    started: bool,
    underflow: bool,
    finished: bool,
}

impl StreamSession {
    pub fn new(
        song: usize,
        chunks: u32,
        pipeline_limit: usize,
        buffer_ms: u64,
        chunk_play: SimDuration,
    ) -> Self {
        let window = ((buffer_ms * 1000) / chunk_play.as_micros().max(1)).max(1) as u32;
        StreamSession {
            song,
            chunks,
            pipeline_limit,
            window,
            next_to_request: 0,
            pending: Default::default(),
            received: vec![false; chunks as usize],
            play_index: 0,
            started: false,
            underflow: false,
            finished: false,
        }
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn is_pending(&self, chunk: u32) -> bool {
        self.pending.contains(&chunk)
    }

    pub fn play_index(&self) -> u32 {
        self.play_index
    }

    pub fn underflow(&self) -> bool {
        self.underflow
    }

    pub fn finished(&self) -> bool {
        self.finished
    }

    pub fn started(&self) -> bool {
        self.started
    }

    /// Chunks held beyond the playout point.
    pub fn buffered_chunks(&self) -> u32 {
        (self.play_index..self.chunks)
            .filter(|&c| self.received[c as usize])
            .count() as u32
    }

    pub fn buffered_ms(&self, chunk_play: SimDuration) -> f64 {
        self.buffered_chunks() as f64 * chunk_play.as_millis_f64()
    }

    /// New chunks to request now, within the pipeline and buffer limits.
    pub fn fill(&mut self) -> Vec<u32> {
        let mut out = Vec::new();
        let horizon = self.play_index.saturating_add(self.window).min(self.chunks);
        while self.pending.len() < self.pipeline_limit && self.next_to_request < horizon {
            let c = self.next_to_request;
            self.next_to_request += 1;
            if !self.received[c as usize] {
                self.pending.insert(c);
                out.push(c);
            }
        }
        out
    }

    /// A chunk arrived. Returns false for duplicates and chunks not asked for.
    pub fn on_data(&mut self, chunk: u32) -> bool {
        if chunk >= self.chunks || self.received[chunk as usize] || !self.pending.remove(&chunk) {
            return false;
        }
        self.received[chunk as usize] = true;
        if chunk == 0 {
            self.started = true;
        }
        true
    }

    /// Advances playout by one chunk period.
    pub fn on_tick(&mut self) -> Tick {
        if self.finished {
            return Tick::Finished;
        }
        if !self.started {
            return Tick::Waiting;
        }
        if self.received[self.play_index as usize] {
            self.play_index += 1;
            if self.play_index == self.chunks {
                self.finished = true;
                return Tick::Finished;
            }
            Tick::Played
        } else {
            let first = !self.underflow;
            self.underflow = true;
            Tick::Stalled { first }
        }
    }

    /// Application timeout for `chunk`: re-express if still outstanding.
    pub fn on_timeout(&self, chunk: u32) -> bool {
        self.pending.contains(&chunk)
    }
}
