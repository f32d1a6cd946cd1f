//! Regenerates the bundled circuit files under configs/circuits/ from
//! their defining seeds.

use cauchyborn_core::lattice::{GateCircuit, GateKind};

fn main() -> anyhow::Result<()> {
    let dir = std::path::Path::new("configs/circuits");
    std::fs::create_dir_all(dir)?;

    let demo = GateCircuit::random(12, 8, 2024)?;
    std::fs::write(
        dir.join("demo_circuit.json"),
        serde_json::to_string_pretty(&demo.to_spec(Some(2024)))?,
    )?;

    // Same circuit with one gate replaced by a pair-mixing unitary that
    // creates particles out of the vacuum: breaks propagation locality.
    let negative_pl = demo.with_gate_replaced(0, 0, GateKind::PairMixing { alpha: 0.6 })?;
    std::fs::write(
        dir.join("negative_pl_circuit.json"),
        serde_json::to_string_pretty(&negative_pl.to_spec(None))?,
    )?;

    let small = GateCircuit::random(10, 6, 4242)?;
    std::fs::write(
        dir.join("staircase_circuit.json"),
        serde_json::to_string_pretty(&small.to_spec(Some(4242)))?,
    )?;

    println!(
        "wrote demo, negative-pl and staircase circuits to {}",
        dir.display()
    );
    Ok(())
}
