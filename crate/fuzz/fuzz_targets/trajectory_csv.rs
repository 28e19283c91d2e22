#![no_main]

use covariant_bohm::integrator::{Scheme, Termination, Trajectory};
use covariant_bohm::output::{read_trajectory_csv, trajectory_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = read_trajectory_csv(text) else {
        return;
    };
    let traj = Trajectory {
        epsilon: 0.01,
        scheme: Scheme::Midpoint,
        records: records.clone(),
        termination: Termination::Completed,
    };
    let back = read_trajectory_csv(&trajectory_csv(&traj, &[])).expect("re-emitted csv must parse");
    assert_eq!(back.len(), records.len());
    for (a, b) in back.iter().zip(&records) {
        assert!(a.sigma.to_bits() == b.sigma.to_bits() || (a.sigma.is_nan() && b.sigma.is_nan()));
    }
});
