use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::{Error, Result};

pub const CSV_HEADER: &str = "step,reward,avg_reward,eta,critic_loss,wall_ms";

/// One line of a metrics file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub step: u64,
    pub reward: f64,
    /// Running mean of `reward` over rows `1..=step`.
    pub avg_reward: f64,
    pub eta: f64,
    pub critic_loss: f64,
    pub wall_ms: f64,
}

/// Mean of the first `i` rewards, summed in order.
pub fn avg_reward(rewards: &[f64], i: usize) -> f64 {
    assert!(i >= 1 && i <= rewards.len(), "avg_reward index out of range");
    rewards[..i].iter().sum::<f64>() / i as f64
}

/// Formats with 9 significant digits, `%g` style.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `x` as it reads back from a metrics file.
pub fn round_sig9(x: f64) -> f64 {
    format_sig9(x).parse().expect("formatted float parses")
}

/// Builds rows from per-step values. Rewards are rounded to their written
/// precision first, so the `avg_reward` column can be recomputed exactly
/// from the file.
pub fn rows_from_series(rewards: &[f64], eta: &[f64], critic_loss: &[f64], wall_ms: &[f64]) -> Vec<MetricsRow> {
    let n = rewards.len();
    assert!(eta.len() == n && critic_loss.len() == n && wall_ms.len() == n);
    let rounded: Vec<f64> = rewards.iter().map(|&r| round_sig9(r)).collect();
    let mut sum = 0.0;
    (0..n)
        .map(|i| {
            sum += rounded[i];
            MetricsRow {
                step: i as u64 + 1,
                reward: rounded[i],
                avg_reward: sum / (i + 1) as f64,
                eta: eta[i],
                critic_loss: critic_loss[i],
                wall_ms: wall_ms[i],
            }
        })
        .collect()
}

pub fn write_metrics<W: Write>(w: &mut W, rows: &[MetricsRow]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.step,
            format_sig9(r.reward),
            format_sig9(r.avg_reward),
            format_sig9(r.eta),
            format_sig9(r.critic_loss),
            format_sig9(r.wall_ms)
        )?;
    }
    Ok(())
}

pub fn write_metrics_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_metrics(&mut w, rows)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::Config(format!("{}:{line}: {msg}", path.display()));
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 {
            if line != CSV_HEADER {
                return Err(bad(1, "unexpected header"));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(i + 1, "expected 6 fields"));
        }
        let p = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "unparsable number"));
        rows.push(MetricsRow {
            step: f[0].parse().map_err(|_| bad(i + 1, "unparsable step"))?,
            reward: p(f[1])?,
            avg_reward: p(f[2])?,
            eta: p(f[3])?,
            critic_loss: p(f[4])?,
            wall_ms: p(f[5])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;
    use proptest::prelude::*;

    #[test]
    fn avg_examples() {
        assert_eq!(avg_reward(&[2.0, 4.0, 6.0], 3), 4.0);
        assert_eq!(avg_reward(&[2.0, 4.0, 6.0], 1), 2.0);
    }

    #[test]
    fn avg_matches_naive() {
        let mut rng = RngStream::new(1, 0);
        let r: Vec<f64> = (0..500).map(|_| rng.uniform_range(0.0, 10.0)).collect();
        for i in 1..=r.len() {
            let mut s = 0.0;
            for x in &r[..i] {
                s += x;
            }
            assert!((avg_reward(&r, i) - s / i as f64).abs() <= 1e-12 * s.abs());
        }
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.1), "0.1");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567891.0), "1.23456789e9");
        assert_eq!(format_sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(format_sig9(1.5e-7), "1.5e-7");
        assert_eq!(format_sig9(-0.00012345), "-0.00012345");
        assert_eq!(format_sig9(f64::NAN), "NaN");
        assert!(format_sig9(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    proptest! {
        #[test]
        fn sig9_round_trip(x in -1e12f64..1e12, e in -20i32..20) {
            let v = x * 10f64.powi(e);
            let s = format_sig9(v);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(format_sig9(back), s);
            if v != 0.0 {
                prop_assert!(((back - v) / v).abs() <= 5e-9);
            }
        }
    }

    #[test]
    fn header_only_for_no_rows() {
        let mut buf = Vec::new();
        write_metrics(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn file_round_trip_and_recomputation() {
        let mut rng = RngStream::new(2, 0);
        let n = 300;
        let rewards: Vec<f64> = (0..n).map(|_| rng.uniform_range(0.0, 12.0)).collect();
        let eta: Vec<f64> = (0..n).map(|i| 0.1 * (-(i as f64) / 75.0).exp()).collect();
        let loss: Vec<f64> = (0..n).map(|i| if i < 20 { f64::NAN } else { 1.0 / i as f64 }).collect();
        let rows = rows_from_series(&rewards, &eta, &loss, &vec![0.0; n]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        let back = read_metrics_csv(&path).unwrap();
        assert_eq!(back.len(), n);
        let col: Vec<f64> = back.iter().map(|r| r.reward).collect();
        for (i, r) in back.iter().enumerate() {
            assert_eq!(format_sig9(r.reward), format_sig9(rows[i].reward));
            assert_eq!(format_sig9(r.eta), format_sig9(eta[i]));
            assert_eq!(format_sig9(avg_reward(&col, i + 1)), format_sig9(r.avg_reward));
        }
    }

    #[test]
    fn unwritable_path_names_path() {
        let err = write_metrics_csv(&[], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
