//! Subcommand implementations.

use eqdist::arith::FactoredModulus;
use eqdist::completion::{completion_estimate, make_cutoff, CutoffShape, PeriodicFunction};
use eqdist::decomp;
use eqdist::densediv::{DenseDivCache, DenseDivQuery, ModuliInterval, ModuliMode};
use eqdist::experiments::{
    self, AuditFamily, MpzExperimentConfig, SatoTateModulus,
};
use eqdist::exponents::{
    self, claim_sets, parse_rational, ClaimSet, DeltaPolicy,
};
use eqdist::expsum::{
    self, kf_table, HkCache, KfNormalization, KfParams, TwoVarSumSpec,
};
use eqdist::poly::RationalPhase;
use eqdist::report::ExperimentReport;

use crate::args::Parsed;

pub const USAGE: &str = "\
usage: eqdist <command> [flags]

commands:
  densediv check    --n N --i I --y Y
  densediv witness  --n N --i I --j J --k K --y Y --r R
  densediv enum     --limit L --mode denselyDivisible|smooth|allSquarefree
                    [--i I] [--y Y] [--interval LO:HI]
  sum ramanujan          --b B --q Q
  sum kloosterman        --a A --b B --q Q
  sum hyperkloosterman   --m M --x X --q Q
  sum F                  --h1 H1 --h2 H2 --h3 H3 --a A --q Q
  sum kf                 --x X --q Q --a A --b B --c C --d D --e E
                         [--normalization paperMinus|corollaryPlus]
  sum correlation        --p P --b B [--a A --form first|corr] [--m M]
  sum twovar             --m M --alpha .. --beta .. --gamma1 .. --gamma2 ..
                         --l .. --dscale D --nscale N
                         [--q0 Q0 --d0 D0 --n0 N0 --y Y]
  audit    --family weil|dork|kls|corr2|lode|vdc|inctraceQ --grid FILE
           [--out PATH]
  complete --f SPEC --q Q --n N [--x0 X0]
  vdc      --f SPEC --r R --s S [--n N] [--x0 X0] [--depth 1|2]
  decomp hb          --K K --x X [--n N]
  decomp vaughan     --x X [--n N] [--u U] [--v V]
  decomp classify    --t \"t1,t2,...\" --sigma S [--extended]
  decomp discrepancy --alpha lambda|mu|one|tau --lo LO --hi HI --q Q --a A
  exponents region --claims NAME --i I
  exponents max    --claims NAME --i I --delta-policy zero|ray:C
  exponents check  --varpi P/Q --delta P/Q [--claims NAME] [--i I]
  mpz      --x X --varpi P/Q --delta P/Q --i I --a A
           [--mode M] [--interval LO:HI] [--norm A1,A2]
           [--filter-exceptional] [--out PATH]
  satotate (--p P | --r R --s S) --limit L [--out PATH]

global flags: --config FILE (key = value defaults), --out PATH
  (report destination; .csv or .json by extension)

f-spec syntax: rationalPhase:num=1:0:1;den=0:1   klTable:m=3
  kfTable:a=1;b=0;c=0;d=0;e=2
";

pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<eqdist::Error> for CliError {
    fn from(e: eqdist::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Usage(msg)
    }
}

type CmdResult = Result<(), CliError>;

pub fn dispatch(p: &Parsed) -> CmdResult {
    let path: Vec<&str> = p.command.iter().map(String::as_str).collect();
    match path.as_slice() {
        ["densediv", "check"] => densediv_check(p),
        ["densediv", "witness"] => densediv_witness(p),
        ["densediv", "enum"] => densediv_enum(p),
        ["sum", "ramanujan"] => sum_ramanujan(p),
        ["sum", "kloosterman"] => sum_kloosterman(p),
        ["sum", "hyperkloosterman"] => sum_hyper(p),
        ["sum", "F"] => sum_triple(p),
        ["sum", "kf"] => sum_kf(p),
        ["sum", "correlation"] => sum_correlation(p),
        ["sum", "twovar"] => sum_twovar(p),
        ["audit"] => audit(p),
        ["complete"] => complete(p),
        ["vdc"] => vdc(p),
        ["decomp", "hb"] => decomp_hb(p),
        ["decomp", "vaughan"] => decomp_vaughan(p),
        ["decomp", "classify"] => decomp_classify(p),
        ["decomp", "discrepancy"] => decomp_discrepancy(p),
        ["exponents", "region"] => exponents_region(p),
        ["exponents", "max"] => exponents_max(p),
        ["exponents", "check"] => exponents_check(p),
        ["mpz"] => mpz(p),
        ["satotate"] => satotate(p),
        other => Err(CliError::Usage(format!("unknown command: {}", other.join(" ")))),
    }
}

fn factored(p: &Parsed, key: &str) -> Result<FactoredModulus, CliError> {
    Ok(FactoredModulus::factor(p.parse::<u64>(key)?)?)
}

fn emit_report(p: &Parsed, report: &ExperimentReport) -> CmdResult {
    if let Some(path) = p.get("out") {
        let body = if path.ends_with(".json") {
            report.to_json()
        } else {
            report.to_csv()
        };
        std::fs::write(path, body).map_err(|e| CliError::Failed(format!("write {path}: {e}")))?;
    }
    for (k, v) in &report.summary {
        println!("{k} = {v}");
    }
    Ok(())
}

fn densediv_check(p: &Parsed) -> CmdResult {
    let query = DenseDivQuery::new(p.parse("n")?, p.parse("i")?, p.parse("y")?)?;
    let result = DenseDivCache::new().is_dd(query);
    println!(
        "{{\"n\": {}, \"i\": {}, \"y\": {}, \"densely_divisible\": {}}}",
        query.n, query.i, query.y, result
    );
    Ok(())
}

fn densediv_witness(p: &Parsed) -> CmdResult {
    let (n, i, j, k) = (p.parse("n")?, p.parse("i")?, p.parse("j")?, p.parse("k")?);
    let (y, r) = (p.parse("y")?, p.parse("r")?);
    match DenseDivCache::new().dd_witness(n, i, j, k, y, r)? {
        Some((q, rr)) => println!(
            "{{\"n\": {n}, \"i\": {i}, \"j\": {j}, \"k\": {k}, \"y\": {y}, \"R\": {r}, \"q\": {q}, \"r\": {rr}}}"
        ),
        None => println!(
            "{{\"n\": {n}, \"i\": {i}, \"j\": {j}, \"k\": {k}, \"y\": {y}, \"R\": {r}, \"witness\": null}}"
        ),
    }
    Ok(())
}

fn densediv_enum(p: &Parsed) -> CmdResult {
    let mode = match p.require("mode")? {
        "denselyDivisible" => ModuliMode::DenselyDivisible,
        "smooth" => ModuliMode::Smooth,
        "allSquarefree" => ModuliMode::AllSquarefree,
        other => return Err(CliError::Usage(format!("unknown mode {other}"))),
    };
    let (lo, hi) = match p.get("interval") {
        None => (1.0, f64::INFINITY),
        Some(s) => {
            let (a, b) = s
                .split_once(':')
                .ok_or_else(|| CliError::Usage("interval must be LO:HI".into()))?;
            let lo = a.parse().map_err(|_| CliError::Usage("bad interval".into()))?;
            let hi = if b == "inf" {
                f64::INFINITY
            } else {
                b.parse().map_err(|_| CliError::Usage("bad interval".into()))?
            };
            (lo, hi)
        }
    };
    let interval = ModuliInterval::new(lo, hi, p.parse("limit")?)?;
    let moduli = eqdist::densediv::enumerate_moduli(
        &interval,
        p.parse_or("i", 1)?,
        p.parse_or("y", 1.0)?,
        mode,
    )?;
    for q in moduli {
        let primes: Vec<String> = q.primes().map(|v| v.to_string()).collect();
        println!("{{\"q\": {}, \"primes\": [{}]}}", q.value(), primes.join(", "));
    }
    Ok(())
}

fn print_complex(label: &str, v: eqdist::Complex64) {
    println!(
        "{{\"{label}_re\": {:.12}, \"{label}_im\": {:.12}, \"abs\": {:.12}}}",
        v.re,
        v.im,
        v.norm()
    );
}

fn sum_ramanujan(p: &Parsed) -> CmdResult {
    let q = factored(p, "q")?;
    let v = expsum::ramanujan(p.parse("b")?, &q)?;
    println!("{{\"value\": {v}}}");
    Ok(())
}

fn sum_kloosterman(p: &Parsed) -> CmdResult {
    let q = factored(p, "q")?;
    let v = expsum::kloosterman2(p.parse("a")?, p.parse("b")?, &q)?;
    print_complex("value", v);
    Ok(())
}

fn sum_hyper(p: &Parsed) -> CmdResult {
    let q = factored(p, "q")?;
    let v = expsum::hyper_kloosterman(p.parse("m")?, p.parse("x")?, &q)?;
    print_complex("value", v);
    Ok(())
}

fn sum_triple(p: &Parsed) -> CmdResult {
    let q = factored(p, "q")?;
    let v = expsum::triple_sum_f(
        (p.parse("h1")?, p.parse("h2")?, p.parse("h3")?),
        p.parse("a")?,
        &q,
    )?;
    print_complex("value", v);
    Ok(())
}

fn kf_params(p: &Parsed) -> Result<KfParams, CliError> {
    Ok(KfParams {
        a: p.parse("a")?,
        b: p.parse("b")?,
        c: p.parse("c")?,
        d: p.parse("d")?,
        e: p.parse("e")?,
    })
}

fn sum_kf(p: &Parsed) -> CmdResult {
    let q = factored(p, "q")?;
    let normalization = match p.get("normalization").unwrap_or("paperMinus") {
        "paperMinus" => KfNormalization::PaperMinus,
        "corollaryPlus" => KfNormalization::CorollaryPlus,
        other => return Err(CliError::Usage(format!("unknown normalization {other}"))),
    };
    let v = expsum::kf_sum(kf_params(p)?, p.parse("x")?, &q, normalization)?;
    print_complex("value", v);
    Ok(())
}

fn sum_correlation(p: &Parsed) -> CmdResult {
    let cache = HkCache::new();
    let form = match p.get("form").unwrap_or("first") {
        "first" => expsum::CorrelationForm::FirstMoment,
        "corr" => expsum::CorrelationForm::Correlation,
        other => return Err(CliError::Usage(format!("unknown form {other}"))),
    };
    let rep = expsum::kl_correlation(
        &cache,
        p.parse_or("m", 3)?,
        p.parse_or("a", 1)?,
        p.parse("b")?,
        p.parse("p")?,
        form,
    )?;
    println!(
        "{{\"abs\": {:.12}, \"bound\": {:.12}, \"ratio\": {:.12}, \"formula\": \"{}\"}}",
        rep.actual_abs, rep.bound, rep.ratio, rep.bound_formula
    );
    Ok(())
}

fn sum_twovar(p: &Parsed) -> CmdResult {
    let spec = TwoVarSumSpec {
        m: factored(p, "m")?,
        alpha: p.parse("alpha")?,
        beta: p.parse("beta")?,
        gamma1: p.parse("gamma1")?,
        gamma2: p.parse("gamma2")?,
        l: p.parse("l")?,
        q0: p.parse_or("q0", 1)?,
        d0: p.parse_or("d0", 0)?,
        n0: p.parse_or("n0", 0)?,
        cutoff_d: make_cutoff(p.parse_or("dx0", 0.0)?, p.parse("dscale")?, CutoffShape::Bump)?,
        cutoff_n: make_cutoff(p.parse_or("nx0", 0.0)?, p.parse("nscale")?, CutoffShape::Bump)?,
    };
    let rep = expsum::two_var_sum(&spec, p.parse_or("y", 2.0)?)?;
    println!(
        "{{\"abs\": {:.12}, \"gcd_prefactor\": {}, \"bound1\": {:.12}, \"ratio1\": {:.12}, \"bound2\": {:.12}, \"ratio2\": {:.12}}}",
        rep.actual.norm(),
        rep.gcd_prefactor,
        rep.lode1.bound,
        rep.lode1.ratio,
        rep.lode2.bound,
        rep.lode2.ratio
    );
    Ok(())
}

fn audit(p: &Parsed) -> CmdResult {
    let family = AuditFamily::parse(p.require("family")?)?;
    let grid_path = p.require("grid")?;
    let text = std::fs::read_to_string(grid_path)
        .map_err(|e| CliError::Failed(format!("read {grid_path}: {e}")))?;
    let rows = experiments::parse_grid(&text)?;
    let cache = HkCache::new();
    let report = experiments::run_bound_audit(family, &rows, &cache)?;
    if p.get("out").is_none() {
        print!("{}", report.to_csv());
        return Ok(());
    }
    emit_report(p, &report)
}

/// Parse an f-spec into a periodic function table mod `q`.
fn periodic_from_spec(spec: &str, q: &FactoredModulus) -> Result<PeriodicFunction, CliError> {
    let (family, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params: std::collections::BTreeMap<&str, &str> = rest
        .split(';')
        .filter(|s| !s.is_empty())
        .filter_map(|kv| kv.split_once('='))
        .collect();
    let coeffs = |key: &str| -> Result<Vec<i64>, CliError> {
        params
            .get(key)
            .ok_or_else(|| CliError::Usage(format!("f-spec missing {key}")))?
            .split(':')
            .map(|s| {
                s.parse()
                    .map_err(|_| CliError::Usage(format!("bad coefficient in {key}")))
            })
            .collect()
    };
    let int = |key: &str| -> Result<i64, CliError> {
        params
            .get(key)
            .ok_or_else(|| CliError::Usage(format!("f-spec missing {key}")))?
            .parse()
            .map_err(|_| CliError::Usage(format!("bad integer for {key}")))
    };
    match family {
        "rationalPhase" => {
            let f = RationalPhase::from_coeffs(coeffs("num")?, coeffs("den")?)?;
            Ok(expsum::phase_table(&f, q)?)
        }
        "klTable" => {
            let m = int("m")? as u32;
            let cache = HkCache::new();
            let values = (0..q.value())
                .map(|x| cache.hyper_kloosterman(m, x as i64, q))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PeriodicFunction::new(q.clone(), values)?)
        }
        "kfTable" => {
            let params = KfParams {
                a: int("a")?,
                b: int("b")?,
                c: int("c")?,
                d: int("d")?,
                e: int("e")?,
            };
            Ok(kf_table(params, q, KfNormalization::CorollaryPlus)?)
        }
        other => Err(CliError::Usage(format!("unknown f-spec family {other}"))),
    }
}

fn complete(p: &Parsed) -> CmdResult {
    let q = factored(p, "q")?;
    let f = periodic_from_spec(p.require("f")?, &q)?;
    let cutoff = make_cutoff(p.parse_or("x0", 0.0)?, p.parse("n")?, CutoffShape::Bump)?;
    let rep = completion_estimate(&f, &cutoff)?;
    println!(
        "{{\"incomplete_abs\": {:.12}, \"main_abs\": {:.12}, \"error_abs\": {:.12}, \"plancherel_dev\": {:.3e}, \"bound_complete\": {:.12}, \"ratio_complete\": {:.12}, \"bound_truncated\": {:.12}, \"ratio_truncated\": {:.12}}}",
        rep.incomplete.norm(),
        rep.main_term.norm(),
        rep.exact_error.norm(),
        (rep.incomplete - rep.plancherel_rhs).norm(),
        rep.bound_complete,
        rep.ratio_complete,
        rep.bound_truncated,
        rep.ratio_truncated
    );
    Ok(())
}

fn vdc(p: &Parsed) -> CmdResult {
    let r: u64 = p.parse("r")?;
    let s: u64 = p.parse("s")?;
    let q = FactoredModulus::factor(
        r.checked_mul(s)
            .ok_or_else(|| CliError::Usage("r·s overflows".into()))?,
    )?;
    let f = periodic_from_spec(p.require("f")?, &q)?;
    let n_scale = p.parse_or("n", (q.value() as f64).sqrt().max(2.0))?;
    let cutoff = make_cutoff(p.parse_or("x0", 0.0)?, n_scale, CutoffShape::Bump)?;
    let rep = eqdist::completion::vdc_estimate(&f, &cutoff, r, s, p.parse_or("depth", 1)?)?;
    println!(
        "{{\"abs\": {:.12}, \"bound\": {:.12}, \"ratio\": {:.12}, \"pv_reference\": {:.12}, \"diag\": {:.12}, \"offdiag\": {:.12}, \"split\": {:?}}}",
        rep.report.actual_abs,
        rep.report.bound,
        rep.report.ratio,
        rep.pv_reference,
        rep.diag_abs_sum,
        rep.offdiag_abs_sum,
        rep.split
    );
    Ok(())
}

fn decomp_hb(p: &Parsed) -> CmdResult {
    let k: u32 = p.parse("K")?;
    let x: u64 = p.parse("x")?;
    match p.get("n") {
        Some(_) => {
            let eval = decomp::heath_brown_terms(k, x, p.parse("n")?)?;
            let terms: Vec<String> = eval.terms.iter().map(|t| format!("{t:.9}")).collect();
            println!(
                "{{\"truncation\": {}, \"terms\": [{}], \"total\": {:.9}, \"lambda\": {:.9}, \"residual\": {:.3e}}}",
                eval.truncation,
                terms.join(", "),
                eval.total,
                eval.lambda,
                eval.residual
            );
        }
        None => {
            let max = decomp::heath_brown_max_residual(k, x)?;
            println!("{{\"K\": {k}, \"x\": {x}, \"max_residual\": {max:.3e}}}");
        }
    }
    Ok(())
}

fn decomp_vaughan(p: &Parsed) -> CmdResult {
    let x: u64 = p.parse("x")?;
    match p.get("n") {
        Some(_) => {
            let n: u64 = p.parse("n")?;
            let cut = (n as f64).powf(1.0 / 3.0).max(1.5);
            let eval = decomp::vaughan_terms(
                p.parse_or("u", cut)?,
                p.parse_or("v", cut)?,
                n,
            )?;
            println!(
                "{{\"mu_log\": {:.9}, \"small\": {:.9}, \"large\": {:.9}, \"total\": {:.9}, \"lambda_ge\": {:.9}, \"residual\": {:.3e}}}",
                eval.term_mu_log, eval.term_small, eval.term_large, eval.total,
                eval.lambda_ge, eval.residual
            );
        }
        None => {
            let mut max = 0.0f64;
            for n in 2..=x {
                let cut = (n as f64).powf(1.0 / 3.0).max(1.5);
                max = max.max(decomp::vaughan_terms(cut, cut, n)?.residual);
            }
            println!("{{\"x\": {x}, \"max_residual\": {max:.3e}}}");
        }
    }
    Ok(())
}

fn decomp_classify(p: &Parsed) -> CmdResult {
    let t: Vec<_> = p
        .require("t")?
        .split(',')
        .map(parse_rational)
        .collect::<Result<_, _>>()?;
    let sigma = parse_rational(p.require("sigma")?)?;
    let extended = p.get("extended").is_some_and(|v| v != "false");
    let result = if extended {
        decomp::classify_extended(&t, &sigma)?
    } else {
        decomp::classify(&t, &sigma)?
    };
    println!("{{\"classification\": \"{result:?}\"}}");
    Ok(())
}

fn decomp_discrepancy(p: &Parsed) -> CmdResult {
    let lo: u64 = p.parse("lo")?;
    let hi: u64 = p.parse("hi")?;
    if hi < lo || hi - lo > 10_000_000 {
        return Err(CliError::Usage("need lo ≤ hi with a window ≤ 10⁷".into()));
    }
    let alpha = match p.require("alpha")? {
        "lambda" => decomp::CoefficientSeq::lambda_range(lo, hi),
        "mu" => decomp::CoefficientSeq::on_range(lo, hi, |n| {
            FactoredModulus::factor(n).unwrap().mobius() as f64
        }),
        "one" => decomp::CoefficientSeq::on_range(lo, hi, |_| 1.0),
        "tau" => decomp::CoefficientSeq::on_range(lo, hi, |n| {
            FactoredModulus::factor(n).unwrap().tau() as f64
        }),
        other => return Err(CliError::Usage(format!("unknown alpha family {other}"))),
    };
    let q = factored(p, "q")?;
    let d = decomp::discrepancy(&alpha, p.parse("a")?, &q)?;
    print_complex("discrepancy", d);
    Ok(())
}

fn load_claims(p: &Parsed) -> Result<ClaimSet, CliError> {
    if let Some(path) = p.get("claims-file") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Failed(format!("read {path}: {e}")))?;
        return Ok(exponents::parse_claims(path, &text)?);
    }
    Ok(claim_sets(p.require("claims")?)?)
}

fn exponents_region(p: &Parsed) -> CmdResult {
    let set = load_claims(p)?;
    let region = exponents::mpz_region(&set, p.parse("i")?);
    if region.is_empty() {
        println!("empty region");
        return Ok(());
    }
    for (idx, cell) in region.cells.iter().enumerate() {
        if region.cells.len() > 1 {
            println!("cell {}:", idx + 1);
        }
        for c in cell {
            println!("{c}");
        }
    }
    Ok(())
}

fn exponents_max(p: &Parsed) -> CmdResult {
    let set = load_claims(p)?;
    let policy = match p.require("delta-policy")? {
        "zero" => DeltaPolicy::Zero,
        ray if ray.starts_with("ray:") => DeltaPolicy::Ray(parse_rational(&ray[4..])?),
        other => return Err(CliError::Usage(format!("unknown delta policy {other}"))),
    };
    match exponents::max_distribution_exponent(&set, p.parse("i")?, &policy) {
        Some(sup) => println!("{sup} (open)"),
        None => println!("empty region"),
    }
    Ok(())
}

fn exponents_check(p: &Parsed) -> CmdResult {
    let set = load_claims(p)?;
    let i = p.parse_or("i", 4)?;
    let w = parse_rational(p.require("varpi")?)?;
    let d = parse_rational(p.require("delta")?)?;
    let region = exponents::mpz_region(&set, i);
    let inside = region.contains(&w, &d);
    let intervals = exponents::sigma_interval(&set, i, &w, &d);
    let ivs: Vec<String> = intervals
        .iter()
        .map(|(lo, hi)| format!("({lo}, {hi})"))
        .collect();
    println!(
        "{{\"in_region\": {inside}, \"sigma_intervals\": [{}]}}",
        ivs.join(", ")
    );
    Ok(())
}

fn mpz(p: &Parsed) -> CmdResult {
    let mode = match p.get("mode").unwrap_or("denselyDivisible") {
        "denselyDivisible" => ModuliMode::DenselyDivisible,
        "smooth" => ModuliMode::Smooth,
        "allSquarefree" => ModuliMode::AllSquarefree,
        other => return Err(CliError::Usage(format!("unknown mode {other}"))),
    };
    let norm = match p.get("norm") {
        None => vec![1],
        Some(s) => s
            .split(',')
            .map(|v| v.parse().map_err(|_| CliError::Usage("bad --norm".into())))
            .collect::<Result<_, _>>()?,
    };
    let interval = match p.get("interval") {
        None => None,
        Some(s) => {
            let (a, b) = s
                .split_once(':')
                .ok_or_else(|| CliError::Usage("interval must be LO:HI".into()))?;
            let lo = a.parse().map_err(|_| CliError::Usage("bad interval".into()))?;
            let hi = if b == "inf" {
                f64::INFINITY
            } else {
                b.parse().map_err(|_| CliError::Usage("bad interval".into()))?
            };
            Some((lo, hi))
        }
    };
    let config = MpzExperimentConfig {
        x: p.parse("x")?,
        varpi: parse_rational(p.require("varpi")?)?,
        delta: parse_rational(p.require("delta")?)?,
        multiplicity: p.parse("i")?,
        residue_seed: p.parse("a")?,
        mode,
        interval,
        norm_exponents: norm,
        filter_exceptional: p.get("filter-exceptional").is_some_and(|v| v != "false"),
    };
    let out = experiments::run_mpz(&config)?;
    emit_report(p, &out.report)
}

fn satotate(p: &Parsed) -> CmdResult {
    let modulus = if p.get("p").is_some() {
        SatoTateModulus::Prime(p.parse("p")?)
    } else {
        SatoTateModulus::Composite { r: p.parse("r")?, s: p.parse("s")? }
    };
    let cache = HkCache::new();
    let out = experiments::run_satotate(&cache, modulus, p.parse("limit")?)?;
    emit_report(p, &out.report)
}
