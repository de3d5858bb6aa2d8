//! Visibility observations, station climatology, seeded surrogate data and
//! the five-feature QoS table.

use std::io::{Read, Write};

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Weibull};
use serde::{Deserialize, Serialize};

use crate::atmosphere::{beta_to_db_per_km, extinction_per_km, path_attenuation_db, AttenuationModel};
use crate::error::{domain, Error, Result};
use crate::exec::{derive_seed, map_slice, Parallelism};
use crate::link_budget::{
    achievable_data_rate, received_power_geometric, snr_budget_db, watts_to_dbm, OokScheme, ReceiverNoiseConfig,
    RfBudgetInputs, TransceiverConfig,
};
use crate::table::LabeledTable;

pub const VISIBILITY_COLUMNS: [&str; 6] = ["station", "date", "hour", "visibility_km", "wind_speed_mps", "altitude_m"];
pub const SYNOPTIC_HOURS: [u32; 3] = [8, 14, 20];
pub const DEFAULT_WAVELENGTHS_NM: [f64; 5] = [760.0, 860.0, 960.0, 1260.0, 1550.0];
pub const QOS_FEATURES: [&str; 5] = ["modulation", "data_rate_bps", "attenuation_db_per_km", "tx_power_w", "wavelength_nm"];
const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRecord {
    pub station: String,
    pub date: NaiveDate,
    pub hour: u32,
    pub visibility_km: f64,
    pub wind_speed_mps: f64,
    pub altitude_m: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedVisibility {
    pub records: Vec<VisibilityRecord>,
    pub rejected: Vec<RejectedRow>,
    pub warnings: Vec<String>,
}

/// Parses the strict six-column visibility schema. Malformed rows abort
/// with the offending line; rows with visibility ≤ 0 are set aside with a
/// reason, and non-synoptic hours are kept with a warning.
pub fn parse_visibility_csv<R: Read>(input: R) -> Result<ParsedVisibility> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != VISIBILITY_COLUMNS {
        return Err(Error::Parse { line: 1, message: format!("header {header:?} does not match {VISIBILITY_COLUMNS:?}") });
    }
    let mut out = ParsedVisibility::default();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != VISIBILITY_COLUMNS.len() {
            return Err(Error::Parse { line, message: format!("expected 6 fields, found {}", rec.len()) });
        }
        let bad = |col: &str, msg: String| Error::Parse { line, message: format!("column {col}: {msg}") };
        let station = rec[0].to_string();
        if station.is_empty() {
            return Err(bad("station", "empty station label".into()));
        }
        let date = NaiveDate::parse_from_str(&rec[1], DATE_FORMAT).map_err(|e| bad("date", e.to_string()))?;
        let hour: u32 = rec[2].parse().map_err(|_| bad("hour", format!("`{}` is not an hour", &rec[2])))?;
        if hour > 23 {
            return Err(bad("hour", format!("{hour} is outside 0..=23")));
        }
        let num = |i: usize| -> Result<f64> {
            let v: f64 = rec[i].parse().map_err(|_| bad(VISIBILITY_COLUMNS[i], format!("`{}` is not a number", &rec[i])))?;
            if !v.is_finite() {
                return Err(bad(VISIBILITY_COLUMNS[i], "value is not finite".into()));
            }
            Ok(v)
        };
        let visibility_km = num(3)?;
        let wind_speed_mps = num(4)?;
        let altitude_m = num(5)?;
        if wind_speed_mps < 0.0 {
            return Err(bad("wind_speed_mps", format!("negative wind speed {wind_speed_mps}")));
        }
        if visibility_km <= 0.0 {
            out.rejected.push(RejectedRow { line, reason: "nonpositive visibility".into() });
            continue;
        }
        if !SYNOPTIC_HOURS.contains(&hour) {
            out.warnings.push(format!("line {line}: hour {hour} is not a synoptic observation hour"));
        }
        out.records.push(VisibilityRecord { station, date, hour, visibility_km, wind_speed_mps, altitude_m });
    }
    Ok(out)
}

pub fn write_visibility_csv<W: Write>(w: W, records: &[VisibilityRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(VISIBILITY_COLUMNS)?;
    for r in records {
        out.write_record([
            r.station.clone(),
            r.date.format(DATE_FORMAT).to_string(),
            r.hour.to_string(),
            r.visibility_km.to_string(),
            r.wind_speed_mps.to_string(),
            r.altitude_m.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationClimatology {
    pub station: String,
    pub n_records: usize,
    pub mean_visibility_km: f64,
    /// `(wavelength_nm, mean β per km)`, averaged over records.
    pub mean_extinction: Vec<(f64, f64)>,
}

/// Per-station means. Extinction is evaluated per record and then averaged,
/// which differs from β at the mean visibility. An empty `stations` list
/// means every station present, in order of first appearance.
pub fn aggregate_station_climatology(
    records: &[VisibilityRecord],
    stations: &[String],
    wavelengths_nm: &[f64],
    model: AttenuationModel,
) -> Result<Vec<StationClimatology>> {
    let wanted: Vec<String> = if stations.is_empty() {
        let mut seen: Vec<String> = Vec::new();
        for r in records {
            if !seen.contains(&r.station) {
                seen.push(r.station.clone());
            }
        }
        seen
    } else {
        stations.to_vec()
    };
    if wanted.is_empty() {
        return domain("no records to aggregate");
    }
    wanted
        .into_iter()
        .map(|station| {
            let own: Vec<&VisibilityRecord> = records.iter().filter(|r| r.station == station).collect();
            if own.is_empty() {
                return Err(Error::MissingStation(station));
            }
            let n = own.len() as f64;
            let mean_visibility_km = own.iter().map(|r| r.visibility_km).sum::<f64>() / n;
            let mean_extinction = wavelengths_nm
                .iter()
                .map(|&lambda| {
                    let sum = own.iter().map(|r| extinction_per_km(r.visibility_km, lambda, model)).sum::<Result<f64>>()?;
                    Ok((lambda, sum / n))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(StationClimatology { station, n_records: own.len(), mean_visibility_km, mean_extinction })
        })
        .collect()
}

/// Lognormal visibility generator for one station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationProfile {
    pub name: String,
    pub mean_visibility_km: f64,
    /// Shape σ of the log of visibility.
    pub sigma: f64,
    pub altitude_m: f64,
    pub mean_wind_mps: f64,
}

impl StationProfile {
    pub fn new(name: &str, mean_visibility_km: f64, sigma: f64, altitude_m: f64, mean_wind_mps: f64) -> Self {
        Self { name: name.to_string(), mean_visibility_km, sigma, altitude_m, mean_wind_mps }
    }

    /// Four named stations. The distribution parameters are illustrative
    /// defaults, not measured climatology.
    pub fn presets() -> Vec<Self> {
        vec![
            Self::new("Polokwane", 8.0, 0.8, 1230.0, 3.5),
            Self::new("Kimberley", 12.0, 0.7, 1197.0, 4.0),
            Self::new("Bloemfontein", 10.0, 0.75, 1395.0, 3.8),
            Self::new("George", 6.0, 0.9, 193.0, 3.2),
        ]
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::presets()
            .into_iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingStation(name.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return domain(format!("station {}: lognormal sigma must be positive", self.name));
        }
        if !(self.mean_visibility_km > 0.0 && self.mean_visibility_km.is_finite()) {
            return domain(format!("station {}: mean visibility must be positive", self.name));
        }
        if !(self.mean_wind_mps > 0.0 && self.mean_wind_mps.is_finite()) {
            return domain(format!("station {}: mean wind speed must be positive", self.name));
        }
        Ok(())
    }
}

pub const SYNTHETIC_START: (i32, u32, u32) = (2010, 1, 1);

/// Three observations a day at the synoptic hours for every profile,
/// station by station. Each station draws from its own seeded stream.
pub fn synthesize_dataset(profiles: &[StationProfile], n_days: usize, seed: u64) -> Result<Vec<VisibilityRecord>> {
    if n_days == 0 {
        return domain("n_days must be positive");
    }
    let start = NaiveDate::from_ymd_opt(SYNTHETIC_START.0, SYNTHETIC_START.1, SYNTHETIC_START.2).expect("valid date");
    let mut out = Vec::with_capacity(profiles.len() * n_days * 3);
    for (s, p) in profiles.iter().enumerate() {
        p.validate()?;
        let mu = p.mean_visibility_km.ln() - p.sigma * p.sigma / 2.0;
        let vis = LogNormal::new(mu, p.sigma).map_err(|e| Error::Domain(e.to_string()))?;
        // Weibull with shape 2 has mean scale·Γ(1.5)
        let wind = Weibull::new(p.mean_wind_mps / 0.886_226_925_452_758, 2.0).map_err(|e| Error::Domain(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, s as u64));
        for d in 0..n_days {
            let date = start.checked_add_days(Days::new(d as u64)).ok_or_else(|| Error::Domain("date overflow".into()))?;
            for hour in SYNOPTIC_HOURS {
                let visibility_km = vis.sample(&mut rng).max(f64::MIN_POSITIVE);
                let wind_speed_mps = wind.sample(&mut rng);
                out.push(VisibilityRecord {
                    station: p.name.clone(),
                    date,
                    hour,
                    visibility_km,
                    wind_speed_mps,
                    altitude_m: p.altitude_m,
                });
            }
        }
    }
    Ok(out)
}

/// Grids and fixed link settings for the QoS table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QosSweep {
    pub wavelengths_nm: Vec<f64>,
    pub tx_powers_w: Vec<f64>,
    pub range_km: f64,
    pub model: AttenuationModel,
    pub transceiver: TransceiverConfig,
    pub noise: ReceiverNoiseConfig,
    pub budget: RfBudgetInputs,
}

impl Default for QosSweep {
    fn default() -> Self {
        Self {
            wavelengths_nm: DEFAULT_WAVELENGTHS_NM.to_vec(),
            tx_powers_w: vec![0.005, 0.025, 0.05, 0.1],
            range_km: 1.0,
            model: AttenuationModel::Kruse,
            transceiver: TransceiverConfig::default(),
            noise: ReceiverNoiseConfig::default(),
            budget: RfBudgetInputs::default(),
        }
    }
}

/// One QoS row's features and target for a given channel.
pub fn qos_row(sweep: &QosSweep, visibility_km: f64, wavelength_nm: f64, tx_power_w: f64, scheme: OokScheme) -> Result<(Vec<f64>, f64)> {
    let beta = extinction_per_km(visibility_km, wavelength_nm, sweep.model)?;
    let atten_db_per_km = beta_to_db_per_km(beta);
    let cfg = TransceiverConfig { tx_power_w, wavelength_nm, ..sweep.transceiver };
    let p_rx = received_power_geometric(&cfg, atten_db_per_km, sweep.range_km)?;
    let rate = achievable_data_rate(p_rx, wavelength_nm, cfg.photons_per_bit, &sweep.noise)?;
    let inputs = RfBudgetInputs {
        tx_power_dbm: watts_to_dbm(tx_power_w),
        wavelength_m: wavelength_nm * 1e-9,
        total_attenuation_db: path_attenuation_db(beta, sweep.range_km)?,
        ..sweep.budget
    };
    let target = snr_budget_db(&inputs)?;
    Ok((vec![scheme.code(), rate, atten_db_per_km, tx_power_w, wavelength_nm], target))
}

/// Cartesian product of records × wavelengths × powers × both OOK schemes,
/// in that nesting order. Rows carry their station as a group label.
pub fn build_qos_table(records: &[VisibilityRecord], sweep: &QosSweep, mode: Parallelism) -> Result<LabeledTable> {
    if records.is_empty() {
        return domain("no visibility records");
    }
    if sweep.wavelengths_nm.is_empty() || sweep.tx_powers_w.is_empty() {
        return domain("wavelength and power grids must be nonempty");
    }
    if let Some(p) = sweep.tx_powers_w.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return domain(format!("transmit power must be positive, got {p}"));
    }
    sweep.transceiver.validate()?;
    sweep.noise.validate()?;
    let schemes = [OokScheme::NrzOok, OokScheme::RzOok];
    let blocks = map_slice(records, mode, |r| {
        let mut rows = Vec::with_capacity(sweep.wavelengths_nm.len() * sweep.tx_powers_w.len() * 2);
        for &lambda in &sweep.wavelengths_nm {
            for &p in &sweep.tx_powers_w {
                for s in schemes {
                    rows.push(qos_row(sweep, r.visibility_km, lambda, p, s)?);
                }
            }
        }
        Ok::<_, Error>((r.station.clone(), rows))
    });
    let n = records.len() * sweep.wavelengths_nm.len() * sweep.tx_powers_w.len() * 2;
    let (mut rows, mut targets, mut groups) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for b in blocks {
        let (station, block) = b?;
        for (x, y) in block {
            rows.push(x);
            targets.push(y);
            groups.push(station.clone());
        }
    }
    let names = QOS_FEATURES.iter().map(|s| s.to_string()).collect();
    LabeledTable::new(names, rows, targets)?.with_groups(groups)
}

/// Shuffled train/validation/test index sets. Sizes come from the largest
/// remainder rule so they are within one of the exact proportions.
pub fn split_indices(m: usize, fractions: (f64, f64, f64), seed: u64) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let f = [fractions.0, fractions.1, fractions.2];
    if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || f[0] <= 0.0 {
        return domain(format!("split fractions {fractions:?} must be nonnegative with a positive train share"));
    }
    if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return domain(format!("split fractions {fractions:?} must sum to 1"));
    }
    let exact: Vec<f64> = f.iter().map(|v| v * m as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = m - sizes.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if f[i] > 0.0 {
            sizes[i] += 1;
            left -= 1;
        }
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(sizes[0] + sizes[1]);
    let val = idx.split_off(sizes[0]);
    Ok((idx, val, test))
}

pub fn split_dataset(
    table: &LabeledTable,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(LabeledTable, LabeledTable, LabeledTable)> {
    let (a, b, c) = split_indices(table.n_rows(), fractions, seed)?;
    Ok((table.subset(&a), table.subset(&b), table.subset(&c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "station,date,hour,visibility_km,wind_speed_mps,altitude_m\n\
        George,2015-06-01,8,0.75,2.5,193\n\
        George,2015-06-01,14,4.2,3.1,193\n\
        Kimberley,2015-06-01,20,12,0,1197\n";

    #[test]
    fn parse_and_round_trip() {
        let parsed = parse_visibility_csv(SAMPLE.as_bytes()).unwrap();
        assert_eq!(parsed.records.len(), 3);
        assert!(parsed.rejected.is_empty() && parsed.warnings.is_empty());
        let mut buf = Vec::new();
        write_visibility_csv(&mut buf, &parsed.records).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), SAMPLE);
    }

    #[test]
    fn rejects_and_warns() {
        let text = "station,date,hour,visibility_km,wind_speed_mps,altitude_m\n\
            A,2015-06-01,8,0,1,1\n\
            A,2015-06-01,11,3,1,1\n";
        let p = parse_visibility_csv(text.as_bytes()).unwrap();
        assert_eq!(p.rejected, vec![RejectedRow { line: 2, reason: "nonpositive visibility".into() }]);
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.warnings.len(), 1);
        assert!(p.warnings[0].contains("hour 11"));
    }

    #[test]
    fn malformed_row_names_line() {
        let text = "station,date,hour,visibility_km,wind_speed_mps,altitude_m\nA,2015-06-01,8,1,1,1\nA,2015-13-01,8,1,1,1\n";
        match parse_visibility_csv(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("date"));
            }
            other => panic!("{other:?}"),
        }
        let short = "station,date,hour,visibility_km,wind_speed_mps,altitude_m\nA,2015-06-01,8,1\n";
        assert!(matches!(parse_visibility_csv(short.as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_visibility_csv("a,b\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    fn rec(station: &str, v: f64) -> VisibilityRecord {
        VisibilityRecord {
            station: station.into(),
            date: NaiveDate::from_ymd_opt(2012, 3, 4).unwrap(),
            hour: 8,
            visibility_km: v,
            wind_speed_mps: 1.0,
            altitude_m: 0.0,
        }
    }

    #[test]
    fn climatology_averages_per_record() {
        let m = AttenuationModel::Kruse;
        let c = aggregate_station_climatology(&[rec("A", 2.0)], &[], &[1550.0], m).unwrap();
        assert_eq!(c[0].mean_visibility_km, 2.0);

        let c = aggregate_station_climatology(&[rec("A", 1.0), rec("A", 3.0)], &[], &[1550.0], m).unwrap();
        assert_eq!(c[0].mean_visibility_km, 2.0);
        let b1 = extinction_per_km(1.0, 1550.0, m).unwrap();
        let b3 = extinction_per_km(3.0, 1550.0, m).unwrap();
        assert_eq!(c[0].mean_extinction[0].1, (b1 + b3) / 2.0);
        assert!(c[0].mean_extinction[0].1 > extinction_per_km(2.0, 1550.0, m).unwrap());

        let missing = aggregate_station_climatology(&[rec("A", 1.0)], &["B".to_string()], &[1550.0], m);
        assert!(matches!(missing, Err(Error::MissingStation(s)) if s == "B"));
    }

    #[test]
    fn synthetic_counts_and_determinism() {
        let p = [StationProfile::new("X", 5.0, 0.6, 10.0, 3.0)];
        let one = synthesize_dataset(&p, 1, 3).unwrap();
        assert_eq!(one.len(), 3);
        assert_eq!(one.iter().map(|r| r.hour).collect::<Vec<_>>(), vec![8, 14, 20]);
        assert_eq!(synthesize_dataset(&p, 20, 3).unwrap(), synthesize_dataset(&p, 20, 3).unwrap());
        assert_ne!(synthesize_dataset(&p, 20, 3).unwrap(), synthesize_dataset(&p, 20, 4).unwrap());
        assert!(synthesize_dataset(&[StationProfile::new("X", 5.0, 0.0, 0.0, 1.0)], 1, 0).is_err());
    }

    #[test]
    fn ten_year_mean_near_profile() {
        let p = [StationProfile::new("X", 5.0, 0.8, 10.0, 3.0)];
        let recs = synthesize_dataset(&p, 3650, 17).unwrap();
        let mean = recs.iter().map(|r| r.visibility_km).sum::<f64>() / recs.len() as f64;
        assert!((4.75..=5.25).contains(&mean), "{mean}");
        assert!(recs.iter().all(|r| r.visibility_km > 0.0));
    }

    #[test]
    fn qos_counts_and_columns() {
        let sweep = QosSweep { wavelengths_nm: vec![1550.0], tx_powers_w: vec![0.05], ..Default::default() };
        let t = build_qos_table(&[rec("A", 2.0)], &sweep, Parallelism::Sequential).unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.row(0)[0], 0.0);
        assert_eq!(t.row(1)[0], 1.0);
        assert_eq!(t.row(0)[2], t.row(1)[2]);
        assert_eq!(t.groups(), &["A".to_string(), "A".to_string()]);

        let empty = QosSweep { tx_powers_w: vec![], ..Default::default() };
        assert!(build_qos_table(&[rec("A", 2.0)], &empty, Parallelism::Sequential).is_err());
    }

    #[test]
    fn split_sizes() {
        let (a, b, c) = split_indices(100, (0.7, 0.15, 0.15), 1).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (70, 15, 15));
        let mut all = [a, b, c].concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        let (a, b, c) = split_indices(7, (0.5, 0.25, 0.25), 2).unwrap();
        assert_eq!(a.len() + b.len() + c.len(), 7);
        assert!(split_indices(10, (0.5, 0.5, 0.5), 0).is_err());
        assert_eq!(split_indices(10, (1.0, 0.0, 0.0), 0).unwrap().1.len(), 0);
        assert_eq!(split_indices(33, (0.7, 0.15, 0.15), 5).unwrap(), split_indices(33, (0.7, 0.15, 0.15), 5).unwrap());
    }
}
