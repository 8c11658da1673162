//! Ingest of a file the size of one busy trading day.

use std::io::Write;
use std::time::Instant;

use hfvol::ingest::{load_days, read_series_file, write_series_csv, IngestSpec};

#[test]
fn full_day_ingests_quickly() {
    let rows = 246_653;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("day.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path).unwrap());
    writeln!(f, "date,time,price").unwrap();
    // a few rows before the open and after the close
    writeln!(f, "2011-03-01,09:29:59,45.10").unwrap();
    for i in 0..rows {
        let micros = 34_200_000_000u64 + (i as u64 * 23_400_000_000) / rows as u64;
        let (s, us) = (micros / 1_000_000, micros % 1_000_000);
        let price = 45.0 + 0.01 * ((i * 7919) % 37) as f64;
        writeln!(
            f,
            "2011-03-01,{:02}:{:02}:{:02}.{:06},{price:.2}",
            s / 3600,
            s / 60 % 60,
            s % 60,
            us
        )
        .unwrap();
    }
    writeln!(f, "2011-03-01,16:00:01,45.10").unwrap();
    drop(f);

    let start = Instant::now();
    let got = load_days(&IngestSpec::new(&path)).unwrap();
    let took = start.elapsed();
    assert!(took.as_secs_f64() < 1.0, "took {took:?}");

    assert_eq!(got.days.len(), 1);
    let r = &got.report;
    assert_eq!(r.rows_in, rows + 2);
    assert_eq!(r.rows_kept, rows);
    assert_eq!(r.dropped_outside_session, 2);
    assert_eq!(r.rows_in, r.rows_kept + r.dropped_total());

    let s = &got.days[0].series;
    assert_eq!(s.timestamps()[0], 0.0);
    assert!(s.timestamps().windows(2).all(|w| w[1] > w[0]));
    let out = dir.path().join("series.csv");
    write_series_csv(s, std::fs::File::create(&out).unwrap()).unwrap();
    let back = read_series_file(&out).unwrap();
    assert_eq!(back.len(), s.len());
    for (a, b) in s.log_prices().iter().zip(back.log_prices()) {
        assert!((a - b).abs() <= 1e-11 * a.abs());
    }
}
