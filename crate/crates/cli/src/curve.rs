//! CSV export of `t ↦ E_t` curves.

use std::io::Write;

use canonbase::{CanonicalBase, CbFamily, Element};

use crate::error::CliResult;

/// `x` with 12 significant digits and no trailing zeros, like C's `%.12g`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        return format!("{}e{e}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The grid points and `E_t` values carried by a base, in increasing `t`.
pub fn partial_rows(cb: &CanonicalBase) -> Vec<(f64, &Element)> {
    match &cb.family {
        CbFamily::Partials { values, .. } => cb.grid.iter().copied().zip(values).collect(),
        // E_t = E_{[0,t]}; those pairs come first, one per grid point.
        CbFamily::Intervals(list) => list
            .iter()
            .filter(|((t, s), _)| *t == 0.0 && *s < 1.0)
            .map(|((_, s), e)| (*s, e))
            .collect(),
    }
}

/// Writes `t,atom_0,…` and one row per grid point. An empty grid gives a
/// header-only file; the header then has as many atom columns as the
/// limit carries.
pub fn emit_curve<W: Write>(cb: &CanonicalBase, out: W) -> CliResult<()> {
    let rows = partial_rows(cb);
    let atoms = match (&cb.family, rows.first()) {
        (_, Some((_, e))) => e.len(),
        (CbFamily::Partials { limit, .. }, None) => limit.len(),
        (CbFamily::Intervals(list), None) => list.first().map_or(0, |(_, e)| e.len()),
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((0..atoms).map(|i| format!("atom_{i}")));
    w.write_record(&header)?;
    for (t, e) in rows {
        let mut record = vec![format_sig(t)];
        record.extend(e.values().iter().map(|v| format_sig(*v)));
        w.write_record(&record)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
