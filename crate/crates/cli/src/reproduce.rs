//! Canned reproduction targets: reference tables and figure data, each
//! emitted side-by-side with the published value and a pass/fail verdict
//! at the acceptance tolerance.

use hmpzeta::exact::{self, Case1Params, Case2Params};
use hmpzeta::genfun::{self, ZetaFamily};
use hmpzeta::{oracle, zeta, Error, HmpModel, Result};

use crate::output::{fmt_sig, Csv};

const TOL_TABLE: f64 = 1e-5;

pub struct Reproduction {
    /// CSV for stdout (or the chosen output path).
    pub csv: Csv,
    /// Human-readable summary lines for stderr.
    pub notes: Vec<String>,
}

pub fn run(target: &str) -> Result<Reproduction> {
    match target {
        "table2" => table2(),
        "table3" => table3(),
        "table4" => table4(),
        "fig1" => fig1(),
        "fig2" => fig_rates("fig2", 0.05, 0.01, 0.166671),
        "fig3" => fig_rates("fig3", 0.1, 0.4, 0.619519),
        "fig4" => fig4(),
        other => Err(Error::Validation(format!(
            "unknown reproduction target '{other}' \
             (expected table2|table3|table4|fig1|fig2|fig3|fig4)"
        ))),
    }
}

fn check_row(csv: &mut Csv, item: &str, computed: f64, reference: f64, tol: f64) -> bool {
    let ok = (computed - reference).abs() <= tol;
    csv.row(vec![
        item.to_string(),
        fmt_sig(computed),
        fmt_sig(reference),
        fmt_sig(tol),
        if ok { "PASS" } else { "FAIL" }.to_string(),
    ]);
    ok
}

fn table2() -> Result<Reproduction> {
    let mut csv = Csv::new(&["item", "computed", "reference", "tolerance", "status"]);
    let rows = [
        (0.75, 0.10, 0.25, 0.20, 0.569580, 0.557243, 0.572373),
        (0.30, 0.20, 0.55, 0.10, 0.684796, 0.682486, 0.684843),
    ];
    for (i, (p1, p2, q1, q2, h_ref, lo_ref, up_ref)) in rows.into_iter().enumerate() {
        let params = Case1Params::new(p1, p2, q1, q2)?;
        let h = exact::exact_entropy_case1(&params)?;
        let model = HmpModel::aggregated_case1(p1, p2, q1, q2)?;
        let (lo, up) = oracle::entropy_bounds(&model)?;
        check_row(&mut csv, &format!("table2:row{}:h", i + 1), h, h_ref, TOL_TABLE);
        check_row(&mut csv, &format!("table2:row{}:lower", i + 1), lo, lo_ref, TOL_TABLE);
        check_row(&mut csv, &format!("table2:row{}:upper", i + 1), up, up_ref, TOL_TABLE);
    }
    Ok(Reproduction { csv, notes: vec![] })
}

fn table3() -> Result<Reproduction> {
    let mut csv = Csv::new(&["item", "computed", "reference", "tolerance", "status"]);
    let rows = [
        (0.1, 0.1, 0.2, 0.3, 0.528531, 0.525571, 0.528534),
        (0.2, 0.2, 0.3, 0.4, 0.659897, 0.656974, 0.659901),
    ];
    for (i, (p1, p2, q, r, h_ref, lo_ref, up_ref)) in rows.into_iter().enumerate() {
        let params = Case2Params::new(p1, p2, q, r)?;
        let h = exact::exact_entropy_case2(&params);
        let model = HmpModel::aggregated_case2(p1, p2, q, r)?;
        let (lo, up) = oracle::entropy_bounds(&model)?;
        check_row(&mut csv, &format!("table3:row{}:h", i + 1), h, h_ref, TOL_TABLE);
        check_row(&mut csv, &format!("table3:row{}:lower", i + 1), lo, lo_ref, TOL_TABLE);
        check_row(&mut csv, &format!("table3:row{}:upper", i + 1), up, up_ref, TOL_TABLE);
    }
    Ok(Reproduction { csv, notes: vec![] })
}

fn table4() -> Result<Reproduction> {
    let mut csv = Csv::new(&["item", "computed", "reference", "tolerance", "status"]);
    let rows = [
        (0.2, 0.45, [(2usize, 0.687811), (12, 0.693100), (13, 0.693108)], 0.691346, 0.693129),
        (0.25, 0.4, [(2, 0.681322), (12, 0.692881), (13, 0.692884)], 0.688139, 0.692947),
    ];
    for (i, (q, eps, hs, lo_ref, up_ref)) in rows.into_iter().enumerate() {
        let model = HmpModel::binary_symmetric(q, eps)?;
        for (k, h_ref) in hs {
            let est = zeta::entropy_cycle_expansion(&model, k)?;
            check_row(
                &mut csv,
                &format!("table4:row{}:h{k}", i + 1),
                est.entropy,
                h_ref,
                TOL_TABLE,
            );
        }
        let (lo, up) = oracle::entropy_bounds(&model)?;
        check_row(&mut csv, &format!("table4:row{}:lower", i + 1), lo, lo_ref, TOL_TABLE);
        check_row(&mut csv, &format!("table4:row{}:upper", i + 1), up, up_ref, TOL_TABLE);
    }
    Ok(Reproduction { csv, notes: vec![] })
}

/// Entropy versus observation error at q = 0.1, order 13, with the bound
/// curves; checked pointwise for the sandwich property.
fn fig1() -> Result<Reproduction> {
    let mut csv = Csv::new(&["eps", "h13", "lower", "upper", "status"]);
    let mut notes = Vec::new();
    let mut all_ok = true;
    for i in 1..=50 {
        let eps = 0.01 * i as f64;
        let model = HmpModel::binary_symmetric(0.1, eps)?;
        let est = zeta::entropy_cycle_expansion(&model, 13)?;
        let (lo, up) = oracle::entropy_bounds(&model)?;
        let ok = est.entropy >= lo - 1e-9 && est.entropy <= up + 1e-9;
        all_ok &= ok;
        csv.row(vec![
            fmt_sig(eps),
            fmt_sig(est.entropy),
            fmt_sig(lo),
            fmt_sig(up),
            if ok { "PASS" } else { "FAIL" }.to_string(),
        ]);
    }
    notes.push(format!(
        "fig1 sandwich lower <= h13 <= upper pointwise: {}",
        if all_ok { "PASS" } else { "FAIL" }
    ));
    Ok(Reproduction { csv, notes })
}

/// Rate functions of an exactly solvable model, from root tracking of the
/// cleared cubic form (the truncation is unreliable this close to its
/// convergence edge).
fn fig_rates(tag: &str, q: f64, r: f64, h_ref: f64) -> Result<Reproduction> {
    let (p1, p2) = (0.2, 0.3);
    let params = Case2Params::new(p1, p2, q, r)?;
    let h = exact::exact_entropy_case2(&params);
    let family: Box<dyn ZetaFamily> = Box::new(exact::Case2Cubic::new(params));
    let track = genfun::lambda_track(family, &genfun::default_n_grid(genfun::DEFAULT_G_CAP))?;
    let etas = genfun::uniform_grid(0.0, 0.5, 51);
    let f = genfun::rate_function_f(&track, h, &etas)?;
    let g = genfun::rate_function_g(&track, h, &etas, genfun::DEFAULT_G_CAP)?;

    let mut csv = Csv::new(&["eta", "f", "g", "n_star_f", "n_star_g"]);
    for (pf, pg) in f.points.iter().zip(&g.points) {
        csv.row(vec![
            fmt_sig(pf.eta),
            fmt_sig(pf.rate),
            fmt_sig(pg.rate),
            fmt_sig(pf.n_star),
            fmt_sig(pg.n_star),
        ]);
    }
    let h_ok = (h - h_ref).abs() <= TOL_TABLE;
    let notes = vec![
        format!(
            "{tag} caption entropy: computed {} reference {} : {}",
            fmt_sig(h),
            fmt_sig(h_ref),
            if h_ok { "PASS" } else { "FAIL" }
        ),
        format!(
            "{tag} boundary: f(0) = {}, g(0) = {}",
            fmt_sig(f.points[0].rate),
            fmt_sig(g.points[0].rate)
        ),
    ];
    Ok(Reproduction { csv, notes })
}

/// Exact case-1 entropy versus q2 at p2 = q1 = 0 for four p1 values; for
/// small p1 the curve is nearly flat over the middle of the range.
fn fig4() -> Result<Reproduction> {
    let p1_values = [0.01, 0.05, 0.5, 0.75];
    let mut csv = Csv::new(&["q2", "h_p1_0.01", "h_p1_0.05", "h_p1_0.50", "h_p1_0.75"]);
    let mut flat_range: Vec<f64> = Vec::new();
    for i in 1..=19 {
        let q2 = 0.05 * i as f64;
        let mut cells = vec![fmt_sig(q2)];
        for &p1 in &p1_values {
            let params = Case1Params::new(p1, 0.0, 0.0, q2)?;
            let h = exact::exact_entropy_case1(&params)?;
            if p1 == 0.01 && (0.1..=0.9).contains(&q2) {
                flat_range.push(h);
            }
            cells.push(fmt_sig(h));
        }
        csv.row(cells);
    }
    let spread = flat_range.iter().cloned().fold(f64::MIN, f64::max)
        - flat_range.iter().cloned().fold(f64::MAX, f64::min);
    let ok = spread < 0.05;
    let notes = vec![format!(
        "fig4 flatness (p1 = 0.01, q2 in [0.1, 0.9]): max - min = {} < 0.05: {}",
        fmt_sig(spread),
        if ok { "PASS" } else { "FAIL" }
    )];
    Ok(Reproduction { csv, notes })
}
