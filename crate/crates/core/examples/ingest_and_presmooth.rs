//! Reads a daily-count CSV, zero-filling gaps, and applies the trailing
//! 7-day pre-smoothing. Pass a path, or run without one for a demo file.

use epialarm::io::{ingest_csv, presmooth, Schema};

fn main() -> epialarm::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            let p = std::env::temp_dir().join("epialarm-demo.csv");
            let rows = [(1, 3), (2, 8), (3, 0), (5, 12), (6, 4), (7, 9), (8, 15), (9, 6)];
            let mut text = String::from("date,cases\n");
            for (day, cases) in rows {
                text.push_str(&format!("2020-03-{day:02},{cases}\n"));
            }
            std::fs::write(&p, text)?;
            p
        }
    };
    let raw = ingest_csv(&path, Schema::DailyCounts)?;
    let smooth = presmooth(&raw, 7)?;
    for note in &smooth.notes {
        println!("note: {note}");
    }
    for d in 0..raw.len() {
        println!("{}  {:>4}  {:>4}", raw.date(d), raw.cases[d], smooth.cases[d]);
    }
    Ok(())
}
