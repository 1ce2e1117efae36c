//! Prints the circuit manifest; redirect into `data/circuits.manifest`.
fn main() {
    print!("{}", qkrec::qsim::circuit_manifest());
}
