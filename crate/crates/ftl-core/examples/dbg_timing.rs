use std::time::Instant;
use ftl_core::verify;

fn main() {
    let seed = 42;
    let mut total = 0.0;
    macro_rules! time {
        ($name:expr, $e:expr) => {{
            let t0 = Instant::now();
            let checks = $e.unwrap();
            let dt = t0.elapsed().as_secs_f64();
            total += dt;
            let fails: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
            println!("{:28} {:7.2}s  checks={:3} fails={}", $name, dt, checks.len(), fails.len());
            for f in fails { println!("    FAIL {} value={} threshold={}", f.name, f.value, f.threshold); }
        }};
    }
    time!("tau-oracle", verify::check_tau_oracle(seed));
    time!("sandwich", verify::check_sandwich(seed));
    time!("eps-tilde", verify::check_eps_tilde(seed));
    time!("constants", verify::check_constants_stability(seed));
    time!("chains", verify::check_chains(seed));
    time!("renorm-suites", verify::check_renorm_suites(seed, None));
    time!("schwarz-claim", verify::check_schwarz_claim(seed, 200));
    time!("pba", verify::check_pba(seed));
    time!("normality", verify::check_normality(seed));
    time!("limit-domain", verify::check_limit_domain(seed));
    time!("kobayashi", verify::check_kobayashi(seed));
    println!("TOTAL {total:.2}s");
}
