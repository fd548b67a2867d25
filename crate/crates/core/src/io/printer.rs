use crate::poly::{Polynomial, VarLayout};
use crate::reduction::{ReducedSystem, SystemSpec};

fn expr(p: &Polynomial, layout: &VarLayout) -> String {
    p.display(layout)
}

/// Prints a system in the file format; the families are written out
/// component by component so that parsing the output gives back the same
/// system.
pub fn print_system(spec: &SystemSpec) -> String {
    let layout = spec.layout();
    let mut out = String::new();
    if !spec.source().is_empty() {
        out.push_str(&format!("name = {}\n", spec.source()));
    }
    out.push_str(&format!("n = {}\n", spec.n()));
    if spec.t() > 0 {
        out.push_str(&format!("params = {}\n", spec.t()));
    }
    for f in spec.equalities() {
        out.push_str(&format!("sym: {} = 0\n", expr(f, &layout)));
    }
    for (f, rel) in spec.symmetric() {
        out.push_str(&format!("sym: {} {} 0\n", expr(f, &layout), rel));
    }
    if let Some((g, rel)) = spec.family() {
        out.push_str("equ-explicit:\n");
        for (i, c) in g.components().iter().enumerate() {
            out.push_str(&format!("  g{}: {} {} 0\n", i + 1, expr(c, &layout), rel));
        }
    }
    for (f, rel) in spec.general() {
        out.push_str(&format!("con: {} {} 0\n", expr(f, &layout), rel));
    }
    out
}

/// Prints a reduced system as a standalone file in `q` variables, block
/// variable `a_i` becoming `x_i`.
pub fn print_reduced(r: &ReducedSystem, source: &str) -> String {
    let src = r.layout;
    let q = r.q();
    let dst = VarLayout::new(q, src.t);
    let rename = |v: u32| {
        if src.is_a(v) {
            dst.x(v as usize - src.n)
        } else {
            dst.y(v as usize - 2 * src.n)
        }
    };
    let mut out = format!("# partition {} of n = {}\n", r.partition, src.n);
    if !source.is_empty() {
        out.push_str(&format!("name = {source} {}\n", r.partition));
    }
    out.push_str(&format!("n = {q}\n"));
    if src.t > 0 {
        out.push_str(&format!("params = {}\n", src.t));
    }
    for c in r.constraints() {
        out.push_str(&format!("con: {} {} 0\n", expr(&c.poly.rename(rename), &dst), c.rel));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_system;
    use crate::partition::Partition;
    use crate::reduction::reduce_system;

    #[test]
    fn roundtrip() {
        let text = "name = demo\nn = 3\nparams = 1\nsym: p2 - y1 = 0\nsym: e2 + 1/3 > 0\nequ-grad: p3 - 2*p1^2 >= 0\ncon: x1 - x2 >= 0\n";
        let spec = parse_system(text).unwrap();
        let printed = print_system(&spec);
        assert_eq!(parse_system(&printed).unwrap(), spec);
        assert_eq!(print_system(&parse_system(&printed).unwrap()), printed);
    }

    #[test]
    fn reduced_files_parse() {
        let spec = parse_system("n = 4\nparams = 1\nsym: p2 - y1 = 0\nequ-template: x1^2 - p1 >= 0\n").unwrap();
        let r = reduce_system(&spec, &Partition::new(vec![1, 3]).unwrap());
        let text = print_reduced(&r, "demo");
        let back = parse_system(&text).unwrap();
        assert_eq!(back.n(), 2);
        assert_eq!(back.t(), 1);
        assert_eq!(back.general().len(), r.constraints().len());
        assert!(text.contains("con: x1^2 + 3*x2^2 - y1 = 0"), "{text}");
    }
}
