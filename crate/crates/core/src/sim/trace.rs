//! Vehicle mobility traces: `time_s,vehicle_id,x_m,y_m,speed_mps` rows,
//! as exported from SUMO floating-car data, played back by linear
//! interpolation.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::TraceError;
use crate::geo::Position;
use crate::road::RoadGraph;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub time_s: f64,
    pub vehicle_id: String,
    pub x_m: f64,
    pub y_m: f64,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: String,
    times: Vec<SimTime>,
    positions: Vec<Position>,
}

impl Track {
    pub fn first(&self) -> SimTime {
        self.times[0]
    }

    pub fn last(&self) -> SimTime {
        *self.times.last().expect("track has samples")
    }

    pub fn present(&self, t: SimTime) -> bool {
        t >= self.first() && t <= self.last()
    }

    /// Interpolated position, or `None` outside the sampled window.
    pub fn position_at(&self, t: SimTime) -> Option<Position> {
        if !self.present(t) {
            return None;
        }
        let i = self.times.partition_point(|s| *s <= t);
        // times[i - 1] <= t, and i - 1 is the last sample when t == last
        let k = i - 1;
        if k + 1 == self.times.len() || self.times[k] == t {
            return Some(self.positions[k]);
        }
        let (t0, t1) = (self.times[k].0 as f64, self.times[k + 1].0 as f64);
        let f = (t.0 as f64 - t0) / (t1 - t0);
        let (a, b) = (self.positions[k], self.positions[k + 1]);
        Some(Position::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)))
    }

    pub fn samples(&self) -> impl Iterator<Item = (SimTime, Position)> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.positions.iter().copied())
    }
}

/// All tracks, ordered by vehicle id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MobilityTrace {
    tracks: Vec<Track>,
}

impl MobilityTrace {
    pub fn from_samples(samples: &[TraceSample]) -> Result<Self, TraceError> {
        let mut by_id: BTreeMap<&str, Track> = BTreeMap::new();
        for (i, s) in samples.iter().enumerate() {
            let row = i + 2;
            if s.vehicle_id.is_empty() {
                return Err(TraceError::Row {
                    row,
                    message: "empty vehicle_id".into(),
                });
            }
            if !(s.time_s.is_finite()
                && s.time_s >= 0.0
                && s.x_m.is_finite()
                && s.y_m.is_finite()
                && s.speed_mps.is_finite())
            {
                return Err(TraceError::Row {
                    row,
                    message: "non-finite or negative value".into(),
                });
            }
            let track = by_id.entry(&s.vehicle_id).or_insert_with(|| Track {
                id: s.vehicle_id.clone(),
                times: Vec::new(),
                positions: Vec::new(),
            });
            let t = SimTime::from_secs_f64(s.time_s);
            if track.times.last().is_some_and(|last| *last >= t) {
                return Err(TraceError::NonMonotone {
                    vehicle: s.vehicle_id.clone(),
                    time_s: s.time_s,
                });
            }
            track.times.push(t);
            track.positions.push(Position::new(s.x_m, s.y_m));
        }
        Ok(MobilityTrace {
            tracks: by_id.into_values().collect(),
        })
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, TraceError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| TraceError::Csv(e.to_string()))?
            .clone();
        let expected = ["time_s", "vehicle_id", "x_m", "y_m", "speed_mps"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(TraceError::Csv(format!(
                "header must be {}",
                expected.join(",")
            )));
        }
        let mut samples = Vec::new();
        for (i, rec) in rdr.deserialize::<TraceSample>().enumerate() {
            samples.push(rec.map_err(|e| TraceError::Row {
                row: i + 2,
                message: e.to_string(),
            })?);
        }
        Self::from_samples(&samples)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, TraceError> {
        let file = std::fs::File::open(path)
            .map_err(|e| TraceError::Csv(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn index_of(&self, vehicle: &str) -> Option<usize> {
        self.tracks
            .binary_search_by(|t| t.id.as_str().cmp(vehicle))
            .ok()
    }

    pub fn position_at(&self, vehicle: &str, t: SimTime) -> Result<Option<Position>, TraceError> {
        let i = self
            .index_of(vehicle)
            .ok_or_else(|| TraceError::UnknownVehicle(vehicle.to_string()))?;
        Ok(self.tracks[i].position_at(t))
    }

    /// Every sample must lie within `tolerance_m` of a street.
    pub fn check_on_roads(&self, graph: &RoadGraph, tolerance_m: f64) -> Result<(), TraceError> {
        for track in &self.tracks {
            for (t, p) in track.samples() {
                let d = graph.project(&p).distance;
                if d > tolerance_m {
                    return Err(TraceError::Row {
                        row: 0,
                        message: format!(
                            "vehicle {} at {t} is {d:.1} m off the road network",
                            track.id
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn write_samples<W: Write>(writer: W, samples: &[TraceSample]) -> Result<(), TraceError> {
    let mut w = csv::Writer::from_writer(writer);
    for s in samples {
        w.serialize(s).map_err(|e| TraceError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| TraceError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str =
        "time_s,vehicle_id,x_m,y_m,speed_mps\n0,car1,0,0,10\n10,car1,100,0,10\n0,car0,5,5,0\n";

    #[test]
    fn exact_and_interpolated() {
        let tr = MobilityTrace::from_csv_reader(CSV.as_bytes()).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.tracks()[0].id, "car0");
        assert_eq!(
            tr.position_at("car1", SimTime::from_secs_f64(10.0))
                .unwrap(),
            Some(Position::new(100.0, 0.0))
        );
        assert_eq!(
            tr.position_at("car1", SimTime::from_secs_f64(5.0)).unwrap(),
            Some(Position::new(50.0, 0.0))
        );
        assert_eq!(
            tr.position_at("car1", SimTime::from_secs_f64(0.0)).unwrap(),
            Some(Position::new(0.0, 0.0))
        );
    }

    #[test]
    fn outside_window_is_absent() {
        let tr = MobilityTrace::from_csv_reader(CSV.as_bytes()).unwrap();
        assert_eq!(
            tr.position_at("car1", SimTime::from_secs_f64(10.5))
                .unwrap(),
            None
        );
        assert_eq!(
            tr.position_at("car0", SimTime::from_secs_f64(0.0)).unwrap(),
            Some(Position::new(5.0, 5.0))
        );
        assert_eq!(
            tr.position_at("car0", SimTime::from_secs_f64(1.0)).unwrap(),
            None
        );
    }

    #[test]
    fn unknown_vehicle() {
        let tr = MobilityTrace::from_csv_reader(CSV.as_bytes()).unwrap();
        assert_eq!(
            tr.position_at("bus", SimTime::ZERO),
            Err(TraceError::UnknownVehicle("bus".into()))
        );
    }

    #[test]
    fn bad_rows() {
        let back = "time_s,vehicle_id,x_m,y_m,speed_mps\n5,car1,0,0,1\n5,car1,1,0,1\n";
        assert!(matches!(
            MobilityTrace::from_csv_reader(back.as_bytes()),
            Err(TraceError::NonMonotone { .. })
        ));
        let junk = "time_s,vehicle_id,x_m,y_m,speed_mps\n0,car1,zero,0,1\n";
        assert!(matches!(
            MobilityTrace::from_csv_reader(junk.as_bytes()),
            Err(TraceError::Row { row: 2, .. })
        ));
        let header = "t,id,x,y,v\n";
        assert!(matches!(
            MobilityTrace::from_csv_reader(header.as_bytes()),
            Err(TraceError::Csv(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let samples = vec![
            TraceSample {
                time_s: 0.0,
                vehicle_id: "a".into(),
                x_m: 1.5,
                y_m: 2.0,
                speed_mps: 3.0,
            },
            TraceSample {
                time_s: 1.0,
                vehicle_id: "a".into(),
                x_m: 4.5,
                y_m: 2.0,
                speed_mps: 3.0,
            },
        ];
        let mut buf = Vec::new();
        write_samples(&mut buf, &samples).unwrap();
        let tr = MobilityTrace::from_csv_reader(&buf[..]).unwrap();
        assert_eq!(tr, MobilityTrace::from_samples(&samples).unwrap());
    }
}
