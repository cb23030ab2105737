//! Per-tick session records and their CSV form.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a log
//! read back from disk is bit-identical to the one in memory.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::FINGERS;
use crate::mapping::retarget::FOLLOWER_DOF;
use crate::mapping::{HapticCommand, SensorFrame, PALM_SENSORS};
use crate::protocol::LinkState;

use super::endpoint::{FollowerRecord, LeaderRecord, ANGLES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub t: f64,
    pub leader: LeaderRecord,
    pub follower: FollowerRecord,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionLog {
    pub records: Vec<TickRecord>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("log header does not match this build ({0})")]
    Header(String),
    #[error("row {row}, column `{column}`: {reason}")]
    Field {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("row {row}: tick {found} follows tick {previous}")]
    Gap {
        row: usize,
        previous: u64,
        found: u64,
    },
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = vec!["tick".into(), "t_s".into(), "leader_link".into()];
    for f in 0..FINGERS {
        for j in 0..ANGLES / FINGERS {
            h.push(format!("q{f}_{j}_rad"));
        }
    }
    h.push("frame_seq".into());
    h.push("frame_t_s".into());
    h.extend((0..FINGERS).map(|i| format!("frame_force{i}_N")));
    h.extend((0..PALM_SENSORS).map(|i| format!("frame_temp{i}_C")));
    h.push("cmd_seq".into());
    h.extend((0..FINGERS).map(|i| format!("current{i}_mA")));
    h.extend((0..FINGERS).map(|i| format!("duty{i}")));
    h.push("setpoint_C".into());
    h.extend((0..FINGERS).map(|i| format!("pressure{i}_kPa")));
    h.extend((0..FINGERS).map(|i| format!("torque{i}_Nm")));
    h.push("glove_temp_C".into());
    h.push("thermo_V".into());
    h.push("follower_link".into());
    h.extend((0..FINGERS).map(|i| format!("leader_q{i}_rad")));
    h.extend((0..FOLLOWER_DOF).map(|i| format!("target{i}_rad")));
    h.extend((0..FINGERS).map(|i| format!("force{i}_N")));
    h.extend((0..FINGERS).map(|i| format!("penetration{i}_m")));
    h.push("grip_N".into());
    h.push("spilled_g".into());
    h.push("dropped".into());
    h
}

fn fmt(v: f64) -> String {
    v.to_string()
}

impl TickRecord {
    fn to_row(&self) -> Vec<String> {
        let l = &self.leader;
        let f = &self.follower;
        let mut row = vec![self.tick.to_string(), fmt(self.t), l.link.as_str().into()];
        row.extend(l.angles.iter().map(|&v| fmt(v)));
        row.push(l.frame_sequence.map(|s| s.to_string()).unwrap_or_default());
        match &l.frame {
            Some(fr) => {
                row.push(fmt(fr.timestamp));
                row.extend(fr.forces.iter().chain(&fr.palm_temps).map(|&v| fmt(v)));
            }
            None => row.extend(std::iter::repeat_n(
                String::new(),
                1 + FINGERS + PALM_SENSORS,
            )),
        }
        let c = &l.command;
        row.push(c.sequence.to_string());
        row.extend(c.motor_current.iter().chain(&c.pwm_duty).map(|&v| fmt(v)));
        row.push(fmt(c.palm_setpoint));
        row.extend(
            l.pressure_kpa
                .iter()
                .chain(&l.motor_torque)
                .map(|&v| fmt(v)),
        );
        row.push(fmt(l.glove_temp));
        row.push(fmt(l.thermo_voltage));
        row.push(f.link.as_str().into());
        row.extend(f.leader_actuated.iter().chain(&f.targets).map(|&v| fmt(v)));
        row.extend(f.forces.iter().chain(&f.penetration).map(|&v| fmt(v)));
        row.push(fmt(f.grip));
        row.push(fmt(f.spilled_g));
        row.push(u8::from(f.dropped).to_string());
        row
    }
}

struct Cursor<'a> {
    row: usize,
    fields: &'a csv::StringRecord,
    header: &'a [String],
    at: usize,
}

impl Cursor<'_> {
    fn next_str(&mut self) -> Result<&str, LogError> {
        let i = self.at;
        self.at += 1;
        self.fields.get(i).ok_or_else(|| LogError::Field {
            row: self.row,
            column: self.header.get(i).cloned().unwrap_or_default(),
            reason: "missing".into(),
        })
    }

    fn err(&self, reason: String) -> LogError {
        LogError::Field {
            row: self.row,
            column: self.header[self.at - 1].clone(),
            reason,
        }
    }

    fn parse<T: std::str::FromStr>(&mut self) -> Result<T, LogError>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.next_str()?.to_string();
        s.parse::<T>().map_err(|e| self.err(format!("`{s}`: {e}")))
    }

    fn opt<T: std::str::FromStr>(&mut self) -> Result<Option<T>, LogError>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.next_str()?.to_string();
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<T>()
            .map(Some)
            .map_err(|e| self.err(format!("`{s}`: {e}")))
    }

    fn floats<const N: usize>(&mut self) -> Result<[f64; N], LogError> {
        let mut out = [0.0; N];
        for v in &mut out {
            *v = self.parse()?;
        }
        Ok(out)
    }

    fn link(&mut self) -> Result<LinkState, LogError> {
        let s = self.next_str()?.to_string();
        LinkState::parse(&s).ok_or_else(|| self.err(format!("unknown link state `{s}`")))
    }
}

fn parse_row(
    row: usize,
    fields: &csv::StringRecord,
    header: &[String],
) -> Result<TickRecord, LogError> {
    let mut c = Cursor {
        row,
        fields,
        header,
        at: 0,
    };
    let tick = c.parse()?;
    let t = c.parse()?;
    let leader_link = c.link()?;
    let angles = c.floats::<ANGLES>()?;
    let frame_sequence = c.opt::<u32>()?;
    let frame = match c.opt::<f64>()? {
        Some(timestamp) => Some(SensorFrame {
            timestamp,
            forces: c.floats()?,
            palm_temps: c.floats()?,
        }),
        None => {
            c.at += FINGERS + PALM_SENSORS;
            None
        }
    };
    let command = HapticCommand {
        sequence: c.parse()?,
        motor_current: c.floats()?,
        pwm_duty: c.floats()?,
        palm_setpoint: c.parse()?,
    };
    let leader = LeaderRecord {
        link: leader_link,
        angles,
        frame,
        frame_sequence,
        command,
        pressure_kpa: c.floats()?,
        motor_torque: c.floats()?,
        glove_temp: c.parse()?,
        thermo_voltage: c.parse()?,
    };
    let follower = FollowerRecord {
        link: c.link()?,
        leader_actuated: c.floats()?,
        targets: c.floats()?,
        forces: c.floats()?,
        penetration: c.floats()?,
        grip: c.parse()?,
        spilled_g: c.parse()?,
        dropped: c.parse::<u8>()? != 0,
    };
    Ok(TickRecord {
        tick,
        t,
        leader,
        follower,
    })
}

impl SessionLog {
    pub fn push(&mut self, record: TickRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(csv_header())?;
        for r in &self.records {
            w.write_record(r.to_row())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LogError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, LogError> {
        let mut r = csv::Reader::from_reader(input);
        let header = csv_header();
        let found: Vec<String> = r.headers()?.iter().map(String::from).collect();
        if found != header {
            let first_diff = header
                .iter()
                .zip(&found)
                .position(|(a, b)| a != b)
                .unwrap_or(header.len().min(found.len()));
            return Err(LogError::Header(format!(
                "column {first_diff}: expected `{}`, found `{}`",
                header.get(first_diff).map_or("", String::as_str),
                found.get(first_diff).map_or("", String::as_str)
            )));
        }
        let mut log = SessionLog::default();
        for (row, rec) in r.records().enumerate() {
            let rec = parse_row(row, &rec?, &header)?;
            if let Some(prev) = log.records.last() {
                if rec.tick != prev.tick + 1 {
                    return Err(LogError::Gap {
                        row,
                        previous: prev.tick,
                        found: rec.tick,
                    });
                }
            }
            log.push(rec);
        }
        Ok(log)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LogError> {
        SessionLog::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Compact per-tick view: grip, mean duty and current over the fingers,
    /// glove temperature and spilled mass.
    pub fn write_scenario_csv<W: Write>(&self, out: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_s", "grip_N", "duty", "current_mA", "temp_C", "spilled_g"])?;
        let mean = |v: &[f64; FINGERS]| v.iter().sum::<f64>() / FINGERS as f64;
        for r in &self.records {
            let c = &r.leader.command;
            w.write_record([
                fmt(r.t),
                fmt(r.follower.grip),
                fmt(mean(&c.pwm_duty)),
                fmt(mean(&c.motor_current)),
                fmt(r.leader.glove_temp),
                fmt(r.follower.spilled_g),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
