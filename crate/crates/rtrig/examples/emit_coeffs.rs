fn main() {
    let text = rtrig::artifacts::emit_coeffs(rtrig::kernels::coeffs(), rtrig::tables::sin_table());
    std::fs::write("artifacts/coeffs.txt", text).unwrap();
}
