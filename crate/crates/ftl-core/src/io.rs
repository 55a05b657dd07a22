//! Text descriptors: domain files, suite descriptors, experiment
//! descriptors and metric-sweep descriptors.
//!
//! All formats are line oriented, whitespace separated, `#` starts a
//! comment. Parse errors carry the file name and 1-based line number.

use num_complex::Complex64;

use crate::domain::{DomainConstants, DomainModel, PointC2};
use crate::error::{FtlError, Result};
use crate::kobayashi::TangentVec;
use crate::poly::MixedPoly;
use crate::renorm::{Modulus, SchwarzParams};

fn parse_err(file: &str, line: usize, msg: impl Into<String>) -> FtlError {
    FtlError::Parse {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_num<T: std::str::FromStr>(file: &str, line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(file, line, format!("invalid {what}: `{tok}`")))
}

/// Polynomial lines `j k re im`, upper triangle only (j >= k), conjugate
/// pair implied.
pub fn parse_poly_lines(
    file: &str,
    lines: &[(usize, Vec<String>)],
) -> Result<MixedPoly> {
    let mut terms = Vec::new();
    for (ln, toks) in lines {
        if toks.len() != 4 {
            return Err(parse_err(
                file,
                *ln,
                format!("expected `j k re im`, got {} fields", toks.len()),
            ));
        }
        let j: u32 = parse_num(file, *ln, &toks[0], "exponent j")?;
        let k: u32 = parse_num(file, *ln, &toks[1], "exponent k")?;
        let re: f64 = parse_num(file, *ln, &toks[2], "real part")?;
        let im: f64 = parse_num(file, *ln, &toks[3], "imaginary part")?;
        if j < k {
            return Err(parse_err(
                file,
                *ln,
                format!("coefficient ({j},{k}) is below the diagonal; list j >= k only"),
            ));
        }
        terms.push((j, k, Complex64::new(re, im)));
    }
    MixedPoly::from_terms(&terms).map_err(|e| parse_err(file, 0, e.to_string()))
}

/// Domain file: header `m <int> box <float>`, polynomial lines, optional
/// `const eps0 <float> alpha0 <float> C5 <float>`.
pub fn parse_domain(file: &str, text: &str) -> Result<DomainModel> {
    let mut header: Option<(usize, u32, f64)> = None;
    let mut constants: Option<(usize, DomainConstants)> = None;
    let mut poly_lines: Vec<(usize, Vec<String>)> = Vec::new();

    for (ln, line) in content_lines(text) {
        let toks: Vec<String> = line.split_whitespace().map(|s| s.to_string()).collect();
        match toks[0].as_str() {
            "m" => {
                if toks.len() != 4 || toks[2] != "box" {
                    return Err(parse_err(file, ln, "expected `m <int> box <float>`"));
                }
                let m = parse_num(file, ln, &toks[1], "type m")?;
                let b = parse_num(file, ln, &toks[3], "box half-width")?;
                header = Some((ln, m, b));
            }
            "const" => {
                if toks.len() != 7 || toks[1] != "eps0" || toks[3] != "alpha0" || toks[5] != "C5" {
                    return Err(parse_err(
                        file,
                        ln,
                        "expected `const eps0 <float> alpha0 <float> C5 <float>`",
                    ));
                }
                constants = Some((
                    ln,
                    DomainConstants {
                        eps0: parse_num(file, ln, &toks[2], "eps0")?,
                        alpha0: parse_num(file, ln, &toks[4], "alpha0")?,
                        c5: Some(parse_num(file, ln, &toks[6], "C5")?),
                    },
                ));
            }
            _ => poly_lines.push((ln, toks)),
        }
    }

    let (hln, m, box_) = header.ok_or_else(|| parse_err(file, 1, "missing `m <int> box <float>` header"))?;
    let poly = parse_poly_lines(file, &poly_lines)?;
    let domain = DomainModel::new(poly, box_).map_err(|e| parse_err(file, hln, e.to_string()))?;
    if domain.m() != m {
        return Err(parse_err(
            file,
            hln,
            format!("declared type m = {m} but the mixed terms have degree {}", domain.m()),
        ));
    }
    Ok(match constants {
        Some((_, c)) => domain.with_constants(c),
        None => domain,
    })
}

/// Renders a domain back to its file form (used to freeze constants).
pub fn write_domain(domain: &DomainModel) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "m {} box {}\n",
        domain.m(),
        fmt_f64(domain.box_half_width())
    ));
    for (j, k, a) in domain.poly().upper_terms() {
        out.push_str(&format!("{j} {k} {} {}\n", fmt_f64(a.re), fmt_f64(a.im)));
    }
    if let Some(c5) = domain.constants.c5 {
        out.push_str(&format!(
            "const eps0 {} alpha0 {} C5 {}\n",
            fmt_f64(domain.constants.eps0),
            fmt_f64(domain.constants.alpha0),
            fmt_f64(c5)
        ));
    }
    out
}

/// 17 significant digits, `.` decimal separator.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v:.16e}")
    }
}

/// Suite descriptor: `suite <name>`, `k <float>`, `alpha- <float>`,
/// `alpha+ <float>`, `c <float>`, `s linear <slope>`, `indices <n1..n2>`.
#[derive(Clone, Debug)]
pub struct SuiteDescriptor {
    pub name: String,
    pub params: Option<SchwarzParams>,
    pub indices: Option<Vec<u32>>,
}

pub fn parse_suite(file: &str, text: &str) -> Result<SuiteDescriptor> {
    let mut name = None;
    let mut k = None;
    let mut a_minus = None;
    let mut a_plus = None;
    let mut c = None;
    let mut slope = None;
    let mut indices = None;
    let mut last_line = 1;

    for (ln, line) in content_lines(text) {
        last_line = ln;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "suite" if toks.len() == 2 => name = Some(toks[1].to_string()),
            "k" if toks.len() == 2 => k = Some(parse_num(file, ln, toks[1], "k")?),
            "alpha-" if toks.len() == 2 => {
                a_minus = Some(parse_num(file, ln, toks[1], "alpha-")?)
            }
            "alpha+" if toks.len() == 2 => a_plus = Some(parse_num(file, ln, toks[1], "alpha+")?),
            "c" if toks.len() == 2 => c = Some(parse_num(file, ln, toks[1], "c")?),
            "s" if toks.len() == 3 && toks[1] == "linear" => {
                slope = Some(parse_num(file, ln, toks[2], "slope")?)
            }
            "indices" if toks.len() == 2 => {
                indices = Some(parse_range(file, ln, toks[1])?);
            }
            other => {
                return Err(parse_err(file, ln, format!("unknown directive `{other}`")));
            }
        }
    }
    let name = name.ok_or_else(|| parse_err(file, last_line, "missing `suite <name>`"))?;
    let params = match (a_minus, a_plus, c, slope, k) {
        (None, None, None, None, None) => None,
        (Some(am), Some(ap), Some(cc), Some(sl), Some(kk)) => Some(
            SchwarzParams::new(am, ap, cc, Modulus::Linear { slope: sl }, kk)
                .map_err(|e| parse_err(file, last_line, e.to_string()))?,
        ),
        _ => {
            return Err(parse_err(
                file,
                last_line,
                "give all of alpha-/alpha+/c/s/k or none",
            ))
        }
    };
    Ok(SuiteDescriptor {
        name,
        params,
        indices,
    })
}

fn parse_range(file: &str, ln: usize, tok: &str) -> Result<Vec<u32>> {
    let (a, b) = tok
        .split_once("..")
        .ok_or_else(|| parse_err(file, ln, format!("expected `n1..n2`, got `{tok}`")))?;
    let lo: u32 = parse_num(file, ln, a, "range start")?;
    let hi: u32 = parse_num(file, ln, b, "range end")?;
    if lo > hi {
        return Err(parse_err(file, ln, "empty index range"));
    }
    Ok((lo..=hi).collect())
}

/// Rescaling / normality experiment descriptor.
#[derive(Clone, Debug)]
pub struct ExperimentDescriptor {
    pub domain_file: String,
    pub sequence: SequenceSpec,
    pub compact_box: f64,
    pub compact_grid: usize,
    pub disc_degree: usize,
    pub disc_count: usize,
    pub disc_seed: u64,
}

#[derive(Clone, Debug)]
pub enum SequenceSpec {
    /// eta_n = (0, dir/n) for n in the range
    Ray { dir: f64, indices: Vec<u32> },
    Points(Vec<PointC2>),
}

impl SequenceSpec {
    pub fn points(&self) -> Vec<PointC2> {
        match self {
            SequenceSpec::Ray { dir, indices } => indices
                .iter()
                .map(|&n| PointC2::new(Complex64::ZERO, Complex64::new(dir / n as f64, 0.0)))
                .collect(),
            SequenceSpec::Points(p) => p.clone(),
        }
    }
}

pub fn parse_experiment(file: &str, text: &str) -> Result<ExperimentDescriptor> {
    let mut domain_file = None;
    let mut sequence = None;
    let mut compact = None;
    let mut discs = None;
    let mut points: Vec<PointC2> = Vec::new();
    let mut collecting_points = false;
    let mut last_line = 1;

    for (ln, line) in content_lines(text) {
        last_line = ln;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "domain" if toks.len() == 2 => {
                domain_file = Some(toks[1].to_string());
                collecting_points = false;
            }
            "sequence" if toks.len() == 4 && toks[1] == "ray" => {
                sequence = Some(SequenceSpec::Ray {
                    dir: parse_num(file, ln, toks[2], "ray direction")?,
                    indices: parse_range(file, ln, toks[3])?,
                });
                collecting_points = false;
            }
            "sequence" if toks.len() == 2 && toks[1] == "points" => {
                collecting_points = true;
            }
            "point" if toks.len() == 5 && collecting_points => {
                points.push(PointC2::from_re(
                    parse_num(file, ln, toks[1], "re w1")?,
                    parse_num(file, ln, toks[2], "im w1")?,
                    parse_num(file, ln, toks[3], "re w2")?,
                    parse_num(file, ln, toks[4], "im w2")?,
                ));
            }
            "compact" if toks.len() == 5 && toks[1] == "box" && toks[3] == "grid" => {
                compact = Some((
                    parse_num::<f64>(file, ln, toks[2], "compact box")?,
                    parse_num::<usize>(file, ln, toks[4], "compact grid")?,
                ));
                collecting_points = false;
            }
            "discs"
                if toks.len() == 8
                    && toks[1] == "poly"
                    && toks[2] == "degree"
                    && toks[4] == "count"
                    && toks[6] == "seed" =>
            {
                discs = Some((
                    parse_num::<usize>(file, ln, toks[3], "disc degree")?,
                    parse_num::<usize>(file, ln, toks[5], "disc count")?,
                    parse_num::<u64>(file, ln, toks[7], "disc seed")?,
                ));
                collecting_points = false;
            }
            other => {
                return Err(parse_err(file, ln, format!("unknown directive `{other}`")));
            }
        }
    }
    let sequence = if !points.is_empty() {
        SequenceSpec::Points(points)
    } else {
        sequence.ok_or_else(|| parse_err(file, last_line, "missing `sequence` directive"))?
    };
    let (compact_box, compact_grid) = compact.unwrap_or((0.5, 24));
    let (disc_degree, disc_count, disc_seed) = discs.unwrap_or((4, 50, 0));
    Ok(ExperimentDescriptor {
        domain_file: domain_file
            .ok_or_else(|| parse_err(file, last_line, "missing `domain <file>`"))?,
        sequence,
        compact_box,
        compact_grid,
        disc_degree,
        disc_count,
        disc_seed,
    })
}

/// Metric sweep descriptor: `domain <file>`,
/// `ray w2 <delta-min> <delta-max> <count> log`,
/// `direction <re1> <im1> <re2> <im2>`, `family affine|affine+quad`.
#[derive(Clone, Debug)]
pub struct SweepDescriptor {
    pub domain_file: String,
    pub delta_min: f64,
    pub delta_max: f64,
    pub count: usize,
    pub direction: TangentVec,
    pub family: String,
}

pub fn parse_sweep(file: &str, text: &str) -> Result<SweepDescriptor> {
    let mut domain_file = None;
    let mut ray = None;
    let mut direction = None;
    let mut family = None;
    let mut last_line = 1;

    for (ln, line) in content_lines(text) {
        last_line = ln;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "domain" if toks.len() == 2 => domain_file = Some(toks[1].to_string()),
            "ray" if toks.len() == 6 && toks[1] == "w2" && toks[5] == "log" => {
                ray = Some((
                    parse_num::<f64>(file, ln, toks[2], "delta-min")?,
                    parse_num::<f64>(file, ln, toks[3], "delta-max")?,
                    parse_num::<usize>(file, ln, toks[4], "count")?,
                ));
            }
            "direction" if toks.len() == 5 => {
                direction = Some(TangentVec::new(
                    Complex64::new(
                        parse_num(file, ln, toks[1], "re X1")?,
                        parse_num(file, ln, toks[2], "im X1")?,
                    ),
                    Complex64::new(
                        parse_num(file, ln, toks[3], "re X2")?,
                        parse_num(file, ln, toks[4], "im X2")?,
                    ),
                ));
            }
            "family" if toks.len() == 2 => family = Some(toks[1].to_string()),
            other => {
                return Err(parse_err(file, ln, format!("unknown directive `{other}`")));
            }
        }
    }
    let (delta_min, delta_max, count) =
        ray.ok_or_else(|| parse_err(file, last_line, "missing `ray w2 ...` directive"))?;
    Ok(SweepDescriptor {
        domain_file: domain_file
            .ok_or_else(|| parse_err(file, last_line, "missing `domain <file>`"))?,
        delta_min,
        delta_max,
        count,
        direction: direction
            .ok_or_else(|| parse_err(file, last_line, "missing `direction` directive"))?,
        family: family.unwrap_or_else(|| "affine+quad".to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_round_trip() {
        let text = "# unit egg\nm 2 box 1.0\n1 1 1.0 0.0\nconst eps0 0.1 alpha0 0.1 C5 18.0\n";
        let d = parse_domain("egg.dom", text).unwrap();
        assert_eq!(d.m(), 2);
        assert_eq!(d.constants.c5, Some(18.0));
        let rendered = write_domain(&d);
        let d2 = parse_domain("egg.dom", &rendered).unwrap();
        assert_eq!(d2.m(), d.m());
        assert_eq!(d2.poly(), d.poly());
        assert_eq!(d2.constants.c5, d.constants.c5);
    }

    #[test]
    fn domain_rejects_harmonic_coefficient_with_location() {
        let text = "m 2 box 1.0\n1 1 1.0 0.0\n2 0 0.5 0.0\n";
        match parse_domain("bad.dom", text) {
            Err(FtlError::Parse { file, line, msg }) => {
                assert_eq!(file, "bad.dom");
                assert_eq!(line, 1); // reported against the header line
                assert!(msg.contains("(2,0)"), "msg: {msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn domain_rejects_below_diagonal_line() {
        let text = "m 2 box 1.0\n0 1 1.0 0.0\n";
        match parse_domain("bad.dom", text) {
            Err(FtlError::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("below the diagonal"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn domain_rejects_type_mismatch() {
        let text = "m 4 box 1.0\n1 1 1.0 0.0\n";
        assert!(matches!(
            parse_domain("bad.dom", text),
            Err(FtlError::Parse { .. })
        ));
    }

    #[test]
    fn suite_descriptor_parses() {
        let text = "suite zalcman-nz\nk 0.5\nalpha- 0.5\nalpha+ 0.7\nc 1.0\ns linear 1.65\nindices 10..50\n";
        let s = parse_suite("suite.txt", text).unwrap();
        assert_eq!(s.name, "zalcman-nz");
        let p = s.params.unwrap();
        assert_eq!(p.k, 0.5);
        assert_eq!(s.indices.unwrap().len(), 41);
    }

    #[test]
    fn suite_descriptor_minimal() {
        let s = parse_suite("s.txt", "suite catlin-discs\n").unwrap();
        assert!(s.params.is_none());
        assert!(s.indices.is_none());
    }

    #[test]
    fn experiment_descriptor_parses() {
        let text = "domain egg1.dom\nsequence ray -1.0 10..200\ncompact box 0.5 grid 24\ndiscs poly degree 4 count 50 seed 7\n";
        let e = parse_experiment("exp.txt", text).unwrap();
        assert_eq!(e.domain_file, "egg1.dom");
        assert_eq!(e.sequence.points().len(), 191);
        assert_eq!(e.disc_degree, 4);
        let p = &e.sequence.points()[0];
        assert!((p.w2.re + 0.1).abs() < 1e-15);
    }

    #[test]
    fn experiment_descriptor_point_list() {
        let text = "domain egg1.dom\nsequence points\npoint 0.0 0.0 -0.5 0.0\npoint 0.1 0.0 -0.25 0.0\n";
        let e = parse_experiment("exp.txt", text).unwrap();
        assert_eq!(e.sequence.points().len(), 2);
    }

    #[test]
    fn sweep_descriptor_parses() {
        let text = "domain egg1.dom\nray w2 1e-4 1e-1 17 log\ndirection 1.0 0.0 0.0 0.0\nfamily affine\n";
        let s = parse_sweep("sweep.txt", text).unwrap();
        assert_eq!(s.count, 17);
        assert_eq!(s.family, "affine");
        assert_eq!(s.direction.x1.re, 1.0);
    }

    #[test]
    fn unknown_directive_names_file_and_line() {
        match parse_sweep("s.txt", "domain d\nbogus 1\n") {
            Err(FtlError::Parse { file, line, .. }) => {
                assert_eq!(file, "s.txt");
                assert_eq!(line, 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
