use ftl_core::renorm::*;
use num_complex::Complex64;

fn main() {
    let fam = SphereJFamily;
    let params = suite::sphere_schwarz_params(0.5);
    for n in [30u32, 60, 90, 120, 150, 180] {
        let f = |t: Complex64| SpherePoint((t * n as f64).exp());
        // witness like the suite does
        let mut witness = None;
        let steps = 400;
        let ratio = (1.0f64 / 1e-6).powf(1.0 / steps as f64);
        'outer: for i in 0..=steps {
            let r = 1e-6 * ratio.powi(i);
            if r >= 1.0 { break; }
            for d in [Complex64::new(1.0,0.0), Complex64::new(0.0,1.0), Complex64::new(-1.0,0.0), Complex64::new(0.0,-1.0)] {
                let eps = d * r;
                if fam.j(&f(Complex64::ZERO), &f(eps)) >= 0.5 { witness = Some((Complex64::ZERO, eps)); break 'outer; }
            }
        }
        let est = sigma_estimate(&f, &fam, params.k, &SigmaGrid::default(), &[witness.unwrap()]).unwrap();
        println!("n={n:4} t=({:+.6},{:+.6}) |t|={:.6} eps=({:+.8},{:+.8}) |eps|={:.8} n*eps=({:+.6},{:+.6}) sigma={:.8}",
            est.t.re, est.t.im, est.t.norm(), est.eps.re, est.eps.im, est.eps.norm(),
            (est.eps*n as f64).re, (est.eps*n as f64).im, est.sigma);
    }
}
