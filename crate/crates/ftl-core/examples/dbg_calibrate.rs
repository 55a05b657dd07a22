use ftl_core::domain::DomainModel;
use ftl_core::io::write_domain;

fn main() {
    for (name, mut d) in ftl_core::verify::bundled_domains() {
        let rep = d.calibrate(13_000, 42).unwrap();
        println!("== {name}: c0={:.4} c1={:.4} c2={:.4} c3={:.4} c4={:.4} c5={:.6} pairs={}",
            rep.c0, rep.c1, rep.c2, rep.c3, rep.c4, rep.c5, rep.q_pairs);
        println!("{}", write_domain(&d));
    }
    let _ = DomainModel::egg(1, 1.0);
}
