//! CSV and JSON surfaces: comma-separated, '.' decimal, 17 significant
//! digits so binary64 values round-trip bit-exactly, one header row.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::sequences::Path;
use num_complex::Complex64;
use std::io::Write;

/// 17-significant-digit scientific formatting; round-trip exact for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(
    mut w: W,
    header: &str,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Path CSV: n, re, im.
pub fn write_path<W: Write>(w: W, path: &Path) -> Result<()> {
    write_csv(
        w,
        "n,re,im",
        path.values
            .iter()
            .enumerate()
            .map(|(n, v)| vec![n.to_string(), fmt_f64(v.re), fmt_f64(v.im)]),
    )
}

pub fn read_path<R: std::io::BufRead>(r: R) -> Result<Path> {
    let mut values = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 3 {
            return Err(Error::Io(format!("path row {i}: expected n,re,im")));
        }
        let re: f64 = parts[1].trim().parse().map_err(|e| Error::Io(format!("row {i}: {e}")))?;
        let im: f64 = parts[2].trim().parse().map_err(|e| Error::Io(format!("row {i}: {e}")))?;
        values.push(Complex64::new(re, im));
    }
    if values.is_empty() {
        return Err(Error::Io("empty path file".into()));
    }
    Ok(Path { values, seed: 0, tag: "csv".into() })
}

/// Kernel table CSV: n, m, re, im.
pub fn write_kernel_table<W: Write>(
    w: W,
    size: usize,
    value: impl Fn(usize, usize) -> Complex64,
) -> Result<()> {
    write_csv(
        w,
        "n,m,re,im",
        (0..size).flat_map(|n| (0..size).map(move |m| (n, m))).map(|(n, m)| {
            let v = value(n, m);
            vec![n.to_string(), m.to_string(), fmt_f64(v.re), fmt_f64(v.im)]
        }),
    )
}

pub fn read_kernel_table<R: std::io::BufRead>(r: R) -> Result<(usize, Vec<Complex64>)> {
    let mut entries = Vec::new();
    let mut max_n = 0usize;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 4 {
            return Err(Error::Io(format!("kernel row {i}: expected n,m,re,im")));
        }
        let n: usize = parts[0].trim().parse().map_err(|e| Error::Io(format!("row {i}: {e}")))?;
        let m: usize = parts[1].trim().parse().map_err(|e| Error::Io(format!("row {i}: {e}")))?;
        let re: f64 = parts[2].trim().parse().map_err(|e| Error::Io(format!("row {i}: {e}")))?;
        let im: f64 = parts[3].trim().parse().map_err(|e| Error::Io(format!("row {i}: {e}")))?;
        max_n = max_n.max(n).max(m);
        entries.push((n, m, Complex64::new(re, im)));
    }
    let size = max_n + 1;
    let mut values = vec![Complex64::new(0.0, 0.0); size * size];
    for (n, m, v) in entries {
        values[n * size + m] = v;
    }
    Ok((size, values))
}

/// Dense symmetric matrix CSV: plain rows of comma-separated values.
pub fn write_matrix<W: Write>(w: W, m: &SymMatrix) -> Result<()> {
    let header: Vec<String> = (0..m.n).map(|j| format!("c{j}")).collect();
    write_csv(
        w,
        &header.join(","),
        (0..m.n).map(|i| (0..m.n).map(|j| fmt_f64(m.get(i, j))).collect()),
    )
}

pub fn read_matrix<R: std::io::BufRead>(r: R) -> Result<SymMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Io(format!("matrix row {i}: {e}")))?);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Io("matrix must be square and non-empty".into()));
    }
    let mut m = SymMatrix::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// Moment vector CSV: k, d.
pub fn write_moments<W: Write>(w: W, d: &[f64]) -> Result<()> {
    write_csv(
        w,
        "k,d",
        d.iter().enumerate().map(|(k, &v)| vec![k.to_string(), fmt_f64(v)]),
    )
}

pub fn read_moments<R: std::io::BufRead>(r: R) -> Result<Vec<f64>> {
    let mut d = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 2 {
            return Err(Error::Io(format!("moment row {i}: expected k,d")));
        }
        d.push(parts[1].trim().parse().map_err(|e| Error::Io(format!("row {i}: {e}")))?);
    }
    if d.is_empty() {
        return Err(Error::Io("empty moment file".into()));
    }
    Ok(d)
}

/// Grid CSV: x, y, re, im (gnuplot-ready long format).
pub fn write_grid<W: Write>(w: W, grid: &crate::estimate::Grid2) -> Result<()> {
    let ys = grid.ys.clone();
    write_csv(
        w,
        "x,y,re,im",
        grid.xs
            .iter()
            .enumerate()
            .flat_map(move |(i, &x)| {
                let ys = ys.clone();
                ys.into_iter().enumerate().map(move |(j, y)| (i, x, j, y))
            })
            .map(|(i, x, j, y)| {
                let v = grid.get(i, j);
                vec![fmt_f64(x), fmt_f64(y), fmt_f64(v.re), fmt_f64(v.im)]
            }),
    )
}

/// Connection-triangle CSV: k, l, value.
pub fn write_triangle<W: Write>(w: W, tri: &crate::opseq::ConnectionTriangle) -> Result<()> {
    write_csv(
        w,
        "k,l,value",
        (0..=tri.order()).flat_map(|k| (0..=k).map(move |l| (k, l))).map(|(k, l)| {
            vec![k.to_string(), l.to_string(), fmt_f64(tri.value(k, l))]
        }),
    )
}

/// Linearization dump CSV: m, n, k, g.
pub fn write_linearization<W: Write>(
    w: W,
    hg: &crate::hyperconv::Hypergroup,
    m_max: usize,
    n_max: usize,
) -> Result<()> {
    let mut rows = Vec::new();
    for m in 0..=m_max {
        for n in m..=n_max {
            let row = hg.linearize(m, n)?;
            for (k, g) in row.iter() {
                rows.push(vec![m.to_string(), n.to_string(), k.to_string(), fmt_f64(g)]);
            }
        }
    }
    write_csv(w, "m,n,k,g", rows.into_iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{Family, PolynomialSystem};

    #[test]
    fn f64_round_trip_is_exact() {
        for &v in &[
            0.1,
            -1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            2f64.sqrt(),
            6.02e23,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }

    #[test]
    fn path_round_trip() {
        let t = Hypergroup::new(PolynomialSystem::from_family(Family::ChebyshevFirst).unwrap());
        let p = crate::sequences::white_noise(&t, 16, 99);
        let mut buf = Vec::new();
        write_path(&mut buf, &p).unwrap();
        let back = read_path(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(p.values, back.values);
    }

    use crate::hyperconv::Hypergroup;

    #[test]
    fn matrix_round_trip() {
        let mut m = SymMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, (i * 3 + j) as f64 / 7.0);
            }
        }
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let back = read_matrix(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(m.data, back.data);
    }

    #[test]
    fn moments_round_trip() {
        let d = vec![1.0, 0.25, -0.125, 1e-17];
        let mut buf = Vec::new();
        write_moments(&mut buf, &d).unwrap();
        let back = read_moments(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(d, back);
    }
}
