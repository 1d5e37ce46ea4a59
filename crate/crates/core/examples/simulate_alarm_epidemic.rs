//! Forward simulation under each parametric alarm, printing weekly incidence.

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::epidemic::{simulate_with_trace, Population, RateParams, TransmissionFormulation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::sir(10_000, 5)?;
    let rates = RateParams::sir(0.6, 0.2);
    let smoothing = SmoothingRule::MovingAverage { window: 30 };
    let alarms = [
        AlarmSpec::None,
        AlarmSpec::Power { k: 0.002, n: 10_000.0 },
        AlarmSpec::Threshold { delta: 0.8, h: 20.0 },
        AlarmSpec::Hill { delta: 0.85, x0: 25.0, nu: 2.0 },
    ];
    for alarm in alarms {
        let name = alarm.family_name();
        let f = TransmissionFormulation::Alarm { alarm, smoothing };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trace = simulate_with_trace(&pop, &rates, &f, 100, &mut rng)?;
        let weekly: Vec<u32> = trace.series.istar.chunks(7).map(|w| w.iter().sum()).collect();
        let peak_alarm = trace.alarm.iter().cloned().fold(0.0, f64::max);
        println!("{name:>10}: total {:>5}, peak alarm {peak_alarm:.2}", trace.series.istar.iter().sum::<u32>());
        println!("{:>10}  weekly {weekly:?}", "");
    }
    Ok(())
}
