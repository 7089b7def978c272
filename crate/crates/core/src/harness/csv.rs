//! Plot-ready CSV serialization (UTF-8, LF, fixed headers).

use std::io::{self, Write};

use super::{PacketProbe, PointAggregate};
use crate::harness::oracle::OracleCurve;

/// Header of the sweep CSV, one row per (grid point, user).
pub const SWEEP_HEADER: &str = "config_id,K,Kp,modulation,access,n_users,snr_db,user_id,bits,errors,ber";

pub fn write_sweep_csv<W: Write>(points: &[PointAggregate], w: &mut W) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for p in points {
        for (&user, &(errors, bits)) in &p.per_user {
            let ber = errors as f64 / bits as f64;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.config_id,
                p.k,
                p.kp,
                p.modulation.as_str(),
                p.access.as_str(),
                p.n_users,
                p.snr_db,
                user,
                bits,
                errors,
                ber
            )?;
        }
    }
    Ok(())
}

pub fn sweep_csv_string(points: &[PointAggregate]) -> String {
    let mut buf = Vec::new();
    write_sweep_csv(points, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Header of the oracle CSV.
pub const ORACLE_HEADER: &str = "kind,snr_db,ber";

pub fn write_oracle_csv<W: Write>(curve: &OracleCurve, w: &mut W) -> io::Result<()> {
    writeln!(w, "{ORACLE_HEADER}")?;
    for &(snr, ber) in &curve.points {
        writeln!(w, "{},{},{}", curve.kind.as_str(), snr, ber)?;
    }
    Ok(())
}

pub fn oracle_csv_string(curve: &OracleCurve) -> String {
    let mut buf = Vec::new();
    write_oracle_csv(curve, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Header of the adaptive-run trace CSV.
pub const ADAPT_HEADER: &str = "packet_index,K,errors,bits,ber";

pub fn write_adapt_csv<W: Write>(trace: &[PacketProbe], w: &mut W) -> io::Result<()> {
    writeln!(w, "{ADAPT_HEADER}")?;
    for p in trace {
        writeln!(w, "{},{},{},{},{}", p.index, p.k, p.errors, p.bits, p.errors as f64 / p.bits as f64)?;
    }
    Ok(())
}

pub fn adapt_csv_string(trace: &[PacketProbe]) -> String {
    let mut buf = Vec::new();
    write_adapt_csv(trace, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::oracle::{oracle_curve, OracleKind};
    use crate::transmitter::{AccessScheme, Modulation};
    use std::collections::BTreeMap;

    #[test]
    fn sweep_csv_has_exact_header_and_rows() {
        let mut per_user = BTreeMap::new();
        per_user.insert(1u32, (5u64, 1000u64));
        per_user.insert(2u32, (0u64, 1000u64));
        let p = PointAggregate {
            config_id: "K128_Kp32_bpsk_block_u2".into(),
            k: 128,
            kp: 32,
            modulation: Modulation::Bpsk,
            access: AccessScheme::Block,
            n_users: 2,
            snr_db: 12.0,
            per_user,
            sync_failures: 0,
        };
        let csv = sweep_csv_string(&[p]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "K128_Kp32_bpsk_block_u2,128,32,bpsk,block,2,12,1,1000,5,0.005"
        );
        assert_eq!(
            lines.next().unwrap(),
            "K128_Kp32_bpsk_block_u2,128,32,bpsk,block,2,12,2,1000,0,0"
        );
        assert!(lines.next().is_none());
    }

    #[test]
    fn oracle_csv_single_point() {
        let curve = oracle_curve(OracleKind::RayleighBpsk, &[10.0]);
        let csv = oracle_csv_string(&curve);
        let row = csv.lines().nth(1).unwrap();
        let mut fields = row.split(',');
        assert_eq!(fields.next(), Some("rayleigh_bpsk"));
        assert_eq!(fields.next(), Some("10"));
        let ber: f64 = fields.next().unwrap().parse().unwrap();
        assert!((ber - 0.02327).abs() < 5e-5, "row: {row}");
    }
}
