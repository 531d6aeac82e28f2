//! Built-in consistency checks against independent closed forms.

use std::collections::BTreeMap;

use moduli_core::exact::{int, rat};
use moduli_core::invariants::{
    elliptic_fd_oracle, elliptic_inv_oracle, inv_fixed_det, inv_rank2_oracle, inv_sheaf, inv_sheaf_opts,
    inv_sheaf_via_regsum, pairing_monomial, pairing_rank2_oracle, volume_fd, volume_fd_jk, volume_rank2_oracle,
    PairingKind,
};
use moduli_core::regsum::{jigsaw_check, permutation_identity_check};
use moduli_core::{Result, SuperPoly, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    /// Rank at most 2, genus at most 2.
    Quick,
    /// Rank at most 3, genus at most 3, including the regularized-sum path.
    Full,
}

type Check = (String, Result<bool>);

fn s(j: u16, k: u8, l: i32) -> SuperPoly {
    SuperPoly::var(Var::sheaf(j, k, l))
}

fn golden() -> Check {
    let expected = s(1, 0, 2).mul(&s(1, 2, 2).pow(3)).scale(&rat(1, 8))
        + s(1, 2, 2).pow(5).scale(&rat(-1, 48))
        + s(1, 2, 2).pow(3).mul(&s(1, 2, 3)).scale(&rat(1, 16))
        + s(1, 2, 2).mul(&s(1, 2, 3).pow(2)).scale(&rat(-1, 4))
        + s(1, 2, 2).pow(2).mul(&s(1, 2, 4)).scale(&rat(11, 48));
    ("genus-2 rank-2 even part".into(), inv_sheaf_opts(2, 2, 1, true).map(|c| c.rep == expected))
}

fn checks(level: Level) -> Vec<Check> {
    let (max_r, max_g) = match level {
        Level::Quick => (2i64, 2u16),
        Level::Full => (3, 3),
    };
    let mut out = vec![golden()];
    for r in 1..=max_r.max(3) {
        for d in -2..=2 {
            out.push((
                format!("elliptic ({r},{d})"),
                inv_sheaf(1, r, d).and_then(|c| Ok(c.rep == elliptic_inv_oracle(r, d)?.rep)),
            ));
            out.push((
                format!("elliptic fixed determinant ({r},{d})"),
                inv_fixed_det(1, r, d).and_then(|c| Ok(c.rep == elliptic_fd_oracle(r, d)?.rep)),
            ));
        }
    }
    for g in 0..=max_g {
        for d in 0..4 {
            out.push((
                format!("rank-2 single residue g={g} d={d}"),
                inv_sheaf(g, 2, d).and_then(|c| Ok(c.rep == inv_rank2_oracle(g, d)?.rep)),
            ));
        }
    }
    for g in 1..=max_g {
        for d in 0..=1 {
            for (m, kind) in [
                (BTreeMap::new(), PairingKind::Sheaf),
                (BTreeMap::new(), PairingKind::FixedDeterminant),
                (BTreeMap::from([(2, 1u32)]), PairingKind::Sheaf),
            ] {
                let h: i64 = m.iter().map(|(l, e)| *l as i64 * *e as i64).sum();
                let top = match kind {
                    PairingKind::Sheaf => 4 * g as i64 - 3 - h,
                    PairingKind::FixedDeterminant => 3 * g as i64 - 3 - h,
                };
                if top < 0 {
                    continue;
                }
                out.push((
                    format!("rank-2 pairing g={g} d={d} {m:?} {kind:?}"),
                    pairing_monomial(g, 2, d, &m, top as u32, kind).map(|v| v == pairing_rank2_oracle(g, d, &m, kind)),
                ));
            }
        }
    }
    for g in 1..=max_g {
        for d in 0..=1 {
            out.push((format!("rank-2 volume g={g} d={d}"), volume_fd(g, 2, d).map(|v| v == volume_rank2_oracle(g, d))));
        }
    }
    out.push(("volume (2,2,1) = 1/12".into(), volume_fd(2, 2, 1).map(|v| v == rat(1, 12))));
    out.push(("volume (2,2,0) = 1/6".into(), volume_fd(2, 2, 0).map(|v| v == rat(1, 6))));
    for ds in [vec![0i64, 1], vec![1, -1, 2], vec![2, 2, -2]] {
        out.push((format!("jigsaw {ds:?}"), Ok(jigsaw_check(&ds))));
    }
    let pts: Vec<_> = (-3..=3).map(|a| vec![rat(a, 2), rat(-a, 2)]).collect();
    out.push(("permutation identity r=2".into(), permutation_identity_check(2, 1, &pts)));
    if level == Level::Full {
        for g in 1..=2 {
            for r in 2..=3 {
                for d in 0..=2 {
                    out.push((
                        format!("regularized sum g={g} ({r},{d})"),
                        inv_sheaf_via_regsum(g, r, d).and_then(|a| Ok(a.rep == inv_sheaf(g, r, d)?.rep)),
                    ));
                }
            }
        }
        for g in 1..=3 {
            for (r, d) in [(2i64, 1i64), (3, 1), (3, 2)] {
                out.push((
                    format!("volume residue forms g={g} ({r},{d})"),
                    volume_fd(g, r, d).and_then(|a| Ok(a == volume_fd_jk(g, r, d)?)),
                ));
            }
        }
        out.push(("rank-1 volume".into(), volume_fd(3, 1, 2).map(|v| v == int(1))));
    }
    out
}

/// Runs the suite, printing one line per check; true when all pass.
pub fn run(level: Level) -> bool {
    let mut ok = true;
    for (name, result) in checks(level) {
        match result {
            Ok(true) => println!("ok      {name}"),
            Ok(false) => {
                ok = false;
                println!("FAILED  {name}");
            }
            Err(e) => {
                ok = false;
                println!("FAILED  {name}: {e}");
            }
        }
    }
    ok
}
