//! Fixtures shared by the benches in `benches/`.

use tandem_core::ModelParams;

/// The three-regime model of `models/three_regime.toml`.
pub fn three_regime() -> ModelParams {
    ModelParams::from_rows(
        &[vec![0.6, 0.4, 0.0], vec![0.1, 0.4, 0.5], vec![0.0, 0.2, 0.8]],
        &[0.1, 0.12, 0.09],
        &[0.4, 0.41, 0.39],
        &[0.5, 0.47, 0.52],
    )
    .expect("fixture is a valid model")
}
