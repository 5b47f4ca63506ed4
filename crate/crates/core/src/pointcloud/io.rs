//! Plain-text CSV exchange format: header `x,y,h,kind,nx,ny` with
//! `kind` 0 = interior, 1 = dirichlet, 2 = neumann. Normals are written for
//! Neumann points only; Dirichlet normals are recovered from the domain.

use std::io::{Read, Write};

use super::point::{Point, Rect};
use super::{BoundaryKind, PointCloud, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const HEADER: [&str; 6] = ["x", "y", "h", "kind", "nx", "ny"];

/// 17 significant digits, enough to round-trip an `f64` exactly.
pub(crate) fn fmt_full<T: Real>(v: T) -> String {
    format!("{v:.16e}")
}

pub fn write_cloud<T: Real, W: Write>(cloud: &PointCloud<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let k = cloud.kind(i);
        let n = match k {
            BoundaryKind::Neumann { normal } => normal,
            _ => Point::zero(),
        };
        w.write_record([
            fmt_full(p.x),
            fmt_full(p.y),
            fmt_full(cloud.h(i)),
            k.code().to_string(),
            fmt_full(n.x),
            fmt_full(n.y),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: Real>(field: Option<&str>, line: usize, name: &str) -> Result<T> {
    let s = field.ok_or_else(|| Error::Parse(format!("line {line}: missing {name}")))?;
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} value {s:?}")))
}

pub fn read_cloud<T: Real, R: Read>(input: R, domain: Rect<T>) -> Result<PointCloud<T>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let (mut points, mut h, mut kind) = (Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let p = Point::new(parse(rec.get(0), line, "x")?, parse(rec.get(1), line, "y")?);
        h.push(parse(rec.get(2), line, "h")?);
        let code: u8 = rec
            .get(3)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("line {line}: bad kind")))?;
        let k = match code {
            0 => BoundaryKind::Interior,
            1 => BoundaryKind::Dirichlet {
                normal: domain
                    .outward_normal(p, T::lit(BOUNDARY_TOL))
                    .ok_or_else(|| Error::Parse(format!("line {line}: dirichlet point off the boundary")))?,
            },
            2 => BoundaryKind::Neumann {
                normal: Point::new(parse(rec.get(4), line, "nx")?, parse(rec.get(5), line, "ny")?),
            },
            other => return Err(Error::Parse(format!("line {line}: unknown kind {other}"))),
        };
        points.push(p);
        kind.push(k);
    }
    PointCloud::new(points, h, kind, domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{generate_advancing_front, BcType, Side};

    #[test]
    fn round_trip_is_exact() {
        let cloud = generate_advancing_front(0.2f64, &Rect::default(), 0.25, 0.45, 3)
            .unwrap()
            .with_partition(|s| match s {
                Side::Top | Side::Bottom => BcType::Neumann,
                _ => BcType::Dirichlet,
            });
        let mut buf = Vec::new();
        write_cloud(&cloud, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,h,kind,nx,ny\n"));
        let back = read_cloud(buf.as_slice(), Rect::default()).unwrap();
        assert_eq!(back.points(), cloud.points());
        assert_eq!(back.radii(), cloud.radii());
        assert_eq!(back.kinds(), cloud.kinds());
    }

    #[test]
    fn rejects_bad_header_and_kind() {
        let bad = "a,b,c\n1,2,3\n";
        assert!(read_cloud::<f64, _>(bad.as_bytes(), Rect::default()).is_err());
        let bad_kind = "x,y,h,kind,nx,ny\n0,0,0.1,7,0,0\n";
        assert!(read_cloud::<f64, _>(bad_kind.as_bytes(), Rect::default()).is_err());
    }
}
