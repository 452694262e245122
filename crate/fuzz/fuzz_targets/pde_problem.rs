#![no_main]

use libfuzzer_sys::fuzz_target;
use xva_core::pde::{solve_vhat, Grid, PdeProblem};

fuzz_target!(|data: &[u8]| {
    let Ok(problem) = serde_json::from_slice::<PdeProblem>(data) else { return };
    if problem.validate().is_err() {
        return;
    }
    // small grid, the point is reaching the solver not accuracy
    if let Ok(solution) = solve_vhat(&problem, &Grid::new(21, 10)) {
        let _ = solution.adjustment_at_spot();
    }
});
