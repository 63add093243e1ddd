//! Packet-log ingestion: CSV parsing, channel-gain compensation, censoring,
//! 0.4 s binning and LOS/OLOS segmentation.
//!
//! Input CSV columns (header required):
//! `t_s, tx_id, rx_id, rssi_dbm, tx_lat, tx_lon, rx_lat, rx_lon,
//! tx_speed_mps, rx_speed_mps, los` where `rssi_dbm` is a decimal or the
//! literal `LOST`, and `los` is `LOS` or `OLOS`. Position and speed fields
//! may be empty on LOST rows; the missing distances and speeds are linearly
//! interpolated from neighboring records.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("invalid link config: {0}")]
    Config(String),
    #[error("{0}")]
    Invalid(String),
}

/// Propagation condition label of a packet or bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Condition {
    Los,
    Olos,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::Los => write!(f, "LOS"),
            Condition::Olos => write!(f, "OLOS"),
        }
    }
}

/// One transmitted packet as logged by a receiver: either successfully
/// decoded with an RSSI, or lost.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    /// GPS-synchronized timestamp (s).
    pub t_s: f64,
    pub tx_id: String,
    pub rx_id: String,
    /// Reported RSSI (dBm); `None` marks a lost packet.
    pub rssi_dbm: Option<f64>,
    /// TX position (lat, lon) in degrees, if logged for this packet.
    pub tx_pos: Option<(f64, f64)>,
    /// RX position (lat, lon) in degrees, if logged for this packet.
    pub rx_pos: Option<(f64, f64)>,
    pub tx_speed_mps: Option<f64>,
    pub rx_speed_mps: Option<f64>,
    pub los: Condition,
}

/// Per-link power compensation and censoring configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    /// TX output power (dBm).
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
    /// TX cable loss (dB, positive).
    #[serde(default)]
    pub tx_cable_loss_db: f64,
    /// RX cable loss (dB, positive).
    #[serde(default)]
    pub rx_cable_loss_db: f64,
    /// RSSI level below which observations count as censored (dBm).
    #[serde(default = "default_censor_rssi")]
    pub censor_rssi_dbm: f64,
}

fn default_tx_power() -> f64 {
    23.0
}

fn default_censor_rssi() -> f64 {
    -94.0
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: default_tx_power(),
            tx_cable_loss_db: 0.0,
            rx_cable_loss_db: 0.0,
            censor_rssi_dbm: default_censor_rssi(),
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.censor_rssi_dbm >= self.tx_power_dbm {
            return Err(IngestError::Config(format!(
                "censor_rssi_dbm ({}) must be below tx_power_dbm ({})",
                self.censor_rssi_dbm, self.tx_power_dbm
            )));
        }
        Ok(())
    }
}

/// A 0.4 s averaged channel-gain observation.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSample {
    /// Bin center time (s); carried for cross-link alignment, not exported.
    pub t_s: f64,
    /// Mean TX-RX distance in the bin (m).
    pub d_m: f64,
    /// Cumulative link travel distance (m), mean of TX and RX speeds times
    /// elapsed time.
    pub traveled_m: f64,
    /// Mean channel gain over uncensored packets (dB), or the censoring
    /// bound if the whole bin is censored.
    pub gain_db: f64,
    pub censored: bool,
    pub condition: Condition,
    /// Packets contributing to the bin (censored ones included); 0 marks a
    /// total-outage bin synthesized over a gap.
    pub n_packets: usize,
}

/// How packet gains are averaged within a bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainAveraging {
    /// Arithmetic mean of dB values (matches lognormal shadowing statistics).
    #[default]
    Db,
    /// Mean in linear power domain, converted back to dB.
    Linear,
}

/// Binning options; defaults reproduce the measurement processing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningOptions {
    pub bin_s: f64,
    pub averaging: GainAveraging,
}

impl Default for BinningOptions {
    fn default() -> Self {
        Self {
            bin_s: 0.4,
            averaging: GainAveraging::Db,
        }
    }
}

/// Sample-support diagnostics for a fitted link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Total sample count.
    pub m: usize,
    /// Censored sample count.
    pub m_c: usize,
    pub d_min_m: f64,
    pub d_max_m: f64,
    /// d_max/d_min >= 10
    pub distance_ratio_ok: bool,
    /// m > 1000
    pub sample_count_ok: bool,
    /// Largest gap between consecutive sorted distances, relative to the
    /// total span; 0 for fewer than 3 samples.
    pub largest_relative_gap: f64,
}

impl QualityReport {
    pub fn pass(&self) -> bool {
        self.distance_ratio_ok && self.sample_count_ok
    }
}

const EXPECTED_HEADER: [&str; 11] = [
    "t_s",
    "tx_id",
    "rx_id",
    "rssi_dbm",
    "tx_lat",
    "tx_lon",
    "rx_lat",
    "rx_lon",
    "tx_speed_mps",
    "rx_speed_mps",
    "los",
];

/// Mean Earth radius (m) for great-circle distances.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle (haversine) distance between two (lat, lon) points in degrees.
pub fn haversine_m(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().asin()
}

/// Parses a packet log CSV into records, validating the header and reporting
/// malformed lines by line number.
pub fn parse_log<R: Read>(reader: R) -> Result<Vec<PacketRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Parse {
            line: 1,
            msg: format!("cannot read header: {e}"),
        })?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != EXPECTED_HEADER {
        return Err(IngestError::Parse {
            line: 1,
            msg: format!(
                "unexpected header {:?}, expected {:?}",
                names, EXPECTED_HEADER
            ),
        });
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            IngestError::Parse {
                line,
                msg: format!("{e}"),
            }
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != EXPECTED_HEADER.len() {
            return Err(IngestError::Parse {
                line,
                msg: format!("expected {} columns, got {}", EXPECTED_HEADER.len(), row.len()),
            });
        }

        let field = |idx: usize| -> &str { row.get(idx).unwrap_or("") };
        let parse_f64 = |idx: usize| -> Result<f64, IngestError> {
            field(idx).parse::<f64>().map_err(|_| IngestError::Parse {
                line,
                msg: format!(
                    "column `{}`: cannot parse `{}` as a number",
                    EXPECTED_HEADER[idx],
                    field(idx)
                ),
            })
        };
        let parse_opt_f64 = |idx: usize| -> Result<Option<f64>, IngestError> {
            if field(idx).is_empty() {
                Ok(None)
            } else {
                parse_f64(idx).map(Some)
            }
        };

        let t_s = parse_f64(0)?;
        let tx_id = field(1).to_string();
        let rx_id = field(2).to_string();
        let rssi_dbm = if field(3).eq_ignore_ascii_case("LOST") {
            None
        } else {
            Some(parse_f64(3)?)
        };
        let tx_lat = parse_opt_f64(4)?;
        let tx_lon = parse_opt_f64(5)?;
        let rx_lat = parse_opt_f64(6)?;
        let rx_lon = parse_opt_f64(7)?;
        let tx_speed = parse_opt_f64(8)?;
        let rx_speed = parse_opt_f64(9)?;
        if let Some(s) = tx_speed {
            if s < 0.0 {
                return Err(IngestError::Parse {
                    line,
                    msg: format!("tx_speed_mps must be >= 0, got {s}"),
                });
            }
        }
        if let Some(s) = rx_speed {
            if s < 0.0 {
                return Err(IngestError::Parse {
                    line,
                    msg: format!("rx_speed_mps must be >= 0, got {s}"),
                });
            }
        }
        let los = match field(10) {
            "LOS" => Condition::Los,
            "OLOS" => Condition::Olos,
            other => {
                return Err(IngestError::Parse {
                    line,
                    msg: format!("los must be LOS or OLOS, got `{other}`"),
                })
            }
        };
        records.push(PacketRecord {
            t_s,
            tx_id,
            rx_id,
            rssi_dbm,
            tx_pos: tx_lat.zip(tx_lon),
            rx_pos: rx_lat.zip(rx_lon),
            tx_speed_mps: tx_speed,
            rx_speed_mps: rx_speed,
            los,
        });
    }
    Ok(records)
}

/// Compensated channel gain of a received packet:
/// RSSI − TX output power + TX cable loss + RX cable loss.
/// `None` for lost packets.
pub fn channel_gain(record: &PacketRecord, cfg: &LinkConfig) -> Option<f64> {
    record
        .rssi_dbm
        .map(|rssi| rssi - cfg.tx_power_dbm + cfg.tx_cable_loss_db + cfg.rx_cable_loss_db)
}

/// The censoring bound expressed in the channel-gain domain. Every lost
/// packet and every RSSI below `censor_rssi_dbm` is treated as censored at
/// this bound.
pub fn censor_threshold_gain(cfg: &LinkConfig) -> f64 {
    cfg.censor_rssi_dbm - cfg.tx_power_dbm + cfg.tx_cable_loss_db + cfg.rx_cable_loss_db
}

/// Whether the record counts as censored: lost, or RSSI below the bound.
pub fn is_censored(record: &PacketRecord, cfg: &LinkConfig) -> bool {
    match record.rssi_dbm {
        None => true,
        Some(rssi) => rssi < cfg.censor_rssi_dbm,
    }
}

/// Fills `None` gaps by linear interpolation over `t`; edge gaps take the
/// nearest known value. Returns `None` if no value is known at all.
fn interpolate_gaps(t: &[f64], values: &[Option<f64>]) -> Option<Vec<f64>> {
    debug_assert_eq!(t.len(), values.len());
    let known: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    if known.is_empty() {
        return None;
    }
    let mut out = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        if let Some(v) = values[i] {
            out.push(v);
            continue;
        }
        let next = known.partition_point(|&k| k < i);
        let filled = if next == 0 {
            values[known[0]].unwrap()
        } else if next == known.len() {
            values[*known.last().unwrap()].unwrap()
        } else {
            let (i0, i1) = (known[next - 1], known[next]);
            let (v0, v1) = (values[i0].unwrap(), values[i1].unwrap());
            let span = t[i1] - t[i0];
            if span <= 0.0 {
                v0
            } else {
                v0 + (v1 - v0) * (t[i] - t[i0]) / span
            }
        };
        out.push(filled);
    }
    Some(out)
}

/// Averages packets of one directed link into fixed-duration bins.
///
/// Per bin: mean channel gain over uncensored packets; the bin is censored
/// iff every packet in it is censored or lost, in which case it carries the
/// censoring bound. Distances come from GPS via great-circle distance, with
/// gaps interpolated. Total-outage gaps in the bin grid are emitted as
/// censored bins with interpolated distance.
pub fn bin_samples(
    records: &[PacketRecord],
    cfg: &LinkConfig,
    opts: &BinningOptions,
) -> Result<Vec<BinnedSample>, IngestError> {
    cfg.validate()?;
    if opts.bin_s <= 0.0 {
        return Err(IngestError::Invalid(format!(
            "bin duration must be > 0, got {}",
            opts.bin_s
        )));
    }
    if records.is_empty() {
        return Ok(Vec::new());
    }

    let link = (&records[0].tx_id, &records[0].rx_id);
    for (i, r) in records.iter().enumerate() {
        if (&r.tx_id, &r.rx_id) != link {
            return Err(IngestError::Invalid(format!(
                "record {i} belongs to link {}->{}, expected {}->{}",
                r.tx_id, r.rx_id, link.0, link.1
            )));
        }
        if i > 0 && r.t_s < records[i - 1].t_s {
            return Err(IngestError::Invalid(format!(
                "timestamps must be non-decreasing, record {i} at t={} follows t={}",
                r.t_s,
                records[i - 1].t_s
            )));
        }
    }

    let times: Vec<f64> = records.iter().map(|r| r.t_s).collect();
    let raw_dist: Vec<Option<f64>> = records
        .iter()
        .map(|r| r.tx_pos.zip(r.rx_pos).map(|(a, b)| haversine_m(a, b)))
        .collect();
    let distances = interpolate_gaps(&times, &raw_dist).ok_or_else(|| {
        IngestError::Invalid("no record carries both TX and RX positions".into())
    })?;
    let raw_speed: Vec<Option<f64>> = records
        .iter()
        .map(|r| {
            r.tx_speed_mps
                .zip(r.rx_speed_mps)
                .map(|(a, b)| 0.5 * (a + b))
        })
        .collect();
    let speeds = interpolate_gaps(&times, &raw_speed)
        .ok_or_else(|| IngestError::Invalid("no record carries both speeds".into()))?;

    let t0 = records[0].t_s;
    // The epsilon absorbs float noise for packets that land exactly on bin
    // boundaries, keeping membership stable under common time-origin shifts.
    let bin_of = |t: f64| -> usize { ((t - t0) / opts.bin_s + 1e-9).floor() as usize };
    let n_bins = bin_of(records.last().unwrap().t_s) + 1;
    let bound = censor_threshold_gain(cfg);

    struct BinAcc {
        gains: Vec<f64>,
        dists: Vec<f64>,
        speeds: Vec<f64>,
        los_packets: usize,
        olos_packets: usize,
        n_packets: usize,
    }
    let mut bins: Vec<BinAcc> = (0..n_bins)
        .map(|_| BinAcc {
            gains: Vec::new(),
            dists: Vec::new(),
            speeds: Vec::new(),
            los_packets: 0,
            olos_packets: 0,
            n_packets: 0,
        })
        .collect();

    for (i, r) in records.iter().enumerate() {
        let acc = &mut bins[bin_of(r.t_s)];
        acc.n_packets += 1;
        acc.dists.push(distances[i]);
        acc.speeds.push(speeds[i]);
        match r.los {
            Condition::Los => acc.los_packets += 1,
            Condition::Olos => acc.olos_packets += 1,
        }
        if !is_censored(r, cfg) {
            // Uncensored implies received, so the gain exists.
            acc.gains.push(channel_gain(r, cfg).unwrap());
        }
    }

    // Distances and speeds for empty (total outage) bins, interpolated over
    // the bin-center time axis.
    let bin_centers: Vec<f64> = (0..n_bins)
        .map(|k| t0 + (k as f64 + 0.5) * opts.bin_s)
        .collect();
    let bin_dist_raw: Vec<Option<f64>> = bins
        .iter()
        .map(|b| {
            if b.dists.is_empty() {
                None
            } else {
                Some(b.dists.iter().sum::<f64>() / b.dists.len() as f64)
            }
        })
        .collect();
    let bin_dist = interpolate_gaps(&bin_centers, &bin_dist_raw).expect("non-empty record set");
    let bin_speed_raw: Vec<Option<f64>> = bins
        .iter()
        .map(|b| {
            if b.speeds.is_empty() {
                None
            } else {
                Some(b.speeds.iter().sum::<f64>() / b.speeds.len() as f64)
            }
        })
        .collect();
    let bin_speed = interpolate_gaps(&bin_centers, &bin_speed_raw).expect("non-empty record set");

    let mut out = Vec::with_capacity(n_bins);
    let mut traveled = 0.0;
    let mut last_condition: Option<Condition> = None;
    // Condition of an empty bin falls back to the previous non-empty bin,
    // or the next one at the head of the stream.
    let next_condition: Vec<Option<Condition>> = {
        let mut v = vec![None; n_bins];
        let mut upcoming = None;
        for k in (0..n_bins).rev() {
            if bins[k].n_packets > 0 {
                upcoming = Some(majority_condition(bins[k].los_packets, bins[k].olos_packets));
            }
            v[k] = upcoming;
        }
        v
    };

    for (k, acc) in bins.iter().enumerate() {
        traveled += bin_speed[k] * opts.bin_s;
        let condition = if acc.n_packets > 0 {
            let c = majority_condition(acc.los_packets, acc.olos_packets);
            last_condition = Some(c);
            c
        } else {
            last_condition
                .or(next_condition[k])
                .expect("at least one bin has packets")
        };
        let censored = acc.gains.is_empty();
        let gain_db = if censored {
            bound
        } else {
            match opts.averaging {
                GainAveraging::Db => acc.gains.iter().sum::<f64>() / acc.gains.len() as f64,
                GainAveraging::Linear => {
                    let lin =
                        acc.gains.iter().map(|g| 10f64.powf(g / 10.0)).sum::<f64>()
                            / acc.gains.len() as f64;
                    10.0 * lin.log10()
                }
            }
        };
        out.push(BinnedSample {
            t_s: bin_centers[k],
            d_m: bin_dist[k],
            traveled_m: traveled,
            gain_db,
            censored,
            condition,
            n_packets: acc.n_packets,
        });
    }
    Ok(out)
}

/// Ties go to OLOS.
fn majority_condition(los_packets: usize, olos_packets: usize) -> Condition {
    if los_packets > olos_packets {
        Condition::Los
    } else {
        Condition::Olos
    }
}

/// Order-preserving LOS/OLOS partition of binned samples.
#[derive(Debug, Clone, Default)]
pub struct Segmented {
    pub los: Vec<BinnedSample>,
    pub olos: Vec<BinnedSample>,
}

/// Splits samples by condition, preserving order within each partition.
pub fn segment_by_condition(samples: &[BinnedSample]) -> Segmented {
    let mut seg = Segmented::default();
    for s in samples {
        match s.condition {
            Condition::Los => seg.los.push(s.clone()),
            Condition::Olos => seg.olos.push(s.clone()),
        }
    }
    seg
}

/// Evaluates the sample-support rules: d_max/d_min >= 10 and more than 1000
/// samples, plus a largest-relative-gap diagnostic.
pub fn quality_check(samples: &[BinnedSample]) -> QualityReport {
    let m = samples.len();
    let m_c = samples.iter().filter(|s| s.censored).count();
    let mut dists: Vec<f64> = samples.iter().map(|s| s.d_m).collect();
    dists.sort_by(f64::total_cmp);
    let d_min = dists.first().copied().unwrap_or(f64::NAN);
    let d_max = dists.last().copied().unwrap_or(f64::NAN);
    let span = d_max - d_min;
    let largest_relative_gap = if dists.len() >= 3 && span > 0.0 {
        dists
            .windows(2)
            .map(|w| (w[1] - w[0]) / span)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    QualityReport {
        m,
        m_c,
        d_min_m: d_min,
        d_max_m: d_max,
        distance_ratio_ok: d_min > 0.0 && d_max / d_min >= 10.0,
        sample_count_ok: m > 1000,
        largest_relative_gap,
    }
}

/// Writes binned samples as CSV with the documented column set.
pub fn write_binned_csv<W: std::io::Write>(
    samples: &[BinnedSample],
    fmt: impl Fn(f64) -> String,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "d_m,traveled_m,gain_db,censored,condition,n_packets")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt(s.d_m),
            fmt(s.traveled_m),
            fmt(s.gain_db),
            s.censored,
            s.condition,
            s.n_packets
        )?;
    }
    Ok(())
}

/// Reads binned samples from the CSV produced by [`write_binned_csv`].
/// Bin times are not part of the interchange format; rows get sequential
/// placeholder times.
pub fn read_binned_csv<R: Read>(reader: R) -> Result<Vec<BinnedSample>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let expected = ["d_m", "traveled_m", "gain_db", "censored", "condition", "n_packets"];
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::Parse {
            line: 1,
            msg: format!("cannot read header: {e}"),
        })?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if names != expected {
        return Err(IngestError::Parse {
            line: 1,
            msg: format!("unexpected header {names:?}, expected {expected:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| IngestError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: format!("{e}"),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let get = |idx: usize| row.get(idx).unwrap_or("");
        let f = |idx: usize| -> Result<f64, IngestError> {
            get(idx).parse().map_err(|_| IngestError::Parse {
                line,
                msg: format!("column `{}`: cannot parse `{}`", expected[idx], get(idx)),
            })
        };
        let censored = match get(3) {
            "true" => true,
            "false" => false,
            other => {
                return Err(IngestError::Parse {
                    line,
                    msg: format!("censored must be true/false, got `{other}`"),
                })
            }
        };
        let condition = match get(4) {
            "LOS" => Condition::Los,
            "OLOS" => Condition::Olos,
            other => {
                return Err(IngestError::Parse {
                    line,
                    msg: format!("condition must be LOS/OLOS, got `{other}`"),
                })
            }
        };
        out.push(BinnedSample {
            t_s: i as f64 * 0.4,
            d_m: f(0)?,
            traveled_m: f(1)?,
            gain_db: f(2)?,
            censored,
            condition,
            n_packets: get(5).parse().map_err(|_| IngestError::Parse {
                line,
                msg: format!("column `n_packets`: cannot parse `{}`", get(5)),
            })?,
        });
    }
    Ok(out)
}
