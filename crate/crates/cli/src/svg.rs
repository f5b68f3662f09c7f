//! Static scatter plot written as plain SVG.

use std::fmt::Write;

use tfcop::sampling::SampleBatch;

pub const SIZE: usize = 800;
const OFF_DIAGONAL: &str = "#1f4e79";
const DIAGONAL: &str = "#d62728";

/// One 1px square per draw; `v` grows upward. Diagonal draws are drawn
/// last so the atom stays visible.
pub fn scatter(batch: &SampleBatch, title: &str) -> String {
    let span = (SIZE - 1) as f64;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#).unwrap();
    for (flag, color) in [(false, OFF_DIAGONAL), (true, DIAGONAL)] {
        writeln!(s, r#"<g fill="{color}">"#).unwrap();
        for (&(u, v), _) in batch.pairs.iter().zip(&batch.on_diagonal).filter(|(_, &d)| d == flag) {
            writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="1" height="1"/>"#, u * span, (1.0 - v) * span).unwrap();
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
