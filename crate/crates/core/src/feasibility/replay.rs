//! Independent re-verification of verdict certificates.

use thiserror::Error;

use super::certify::krawczyk_operator;
use super::search::Compiled;
use super::{derive_region, Certificate, CoverNode, Problem, Region, Relation, Verdict, VerdictKind, Witness};
use crate::poly::Interval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("verdict {0} carries no replayable certificate")]
    Missing(VerdictKind),
    #[error("witness check failed: {0}")]
    Witness(String),
    #[error("cover check failed: {0}")]
    Cover(String),
    #[error("region check failed: {0}")]
    Region(String),
}

/// Recomputes every claim in the certificate. `SatNumeric` and `Unknown`
/// verdicts carry nothing to check and pass trivially.
pub fn replay(problem: &Problem, verdict: &Verdict) -> Result<(), ReplayError> {
    match verdict.kind {
        VerdictKind::SatCertified => replay_sat(problem, verdict),
        VerdictKind::UnsatInBox => replay_unsat(problem, verdict),
        VerdictKind::SatNumeric | VerdictKind::Unknown => Ok(()),
    }
}

fn replay_sat(problem: &Problem, verdict: &Verdict) -> Result<(), ReplayError> {
    let (Some(witness), Some(cert)) = (&verdict.witness, &verdict.certificate) else {
        return Err(ReplayError::Missing(verdict.kind));
    };
    if witness.len() != problem.nvars {
        return Err(ReplayError::Witness(format!("dimension {} != {}", witness.len(), problem.nvars)));
    }
    let comp = Compiled::new(problem);
    match (witness, cert) {
        (Witness::Point(p), Certificate::ExactPoint) => {
            for (k, c) in problem.constraints.iter().enumerate() {
                if !c.holds_at(p) {
                    return Err(ReplayError::Witness(format!("constraint {k} fails at the witness point")));
                }
            }
            Ok(())
        }
        (Witness::Box(w), Certificate::Enclosure { krawczyk, .. }) => {
            let mut accounted = vec![false; problem.constraints.len()];
            let mut wbox = w.clone();
            if let Some(rec) = krawczyk {
                let m = rec.equations.len();
                let shapes_ok = rec.vars.len() == m
                    && rec.center.len() == m
                    && rec.input.len() == m
                    && rec.preconditioner.len() == m
                    && rec.preconditioner.iter().all(|r| r.len() == m)
                    && rec.base.len() == problem.nvars
                    && rec.vars.iter().all(|&v| v < problem.nvars)
                    && rec.equations.iter().chain(&rec.implied).all(|&k| k < problem.constraints.len());
                if !shapes_ok {
                    return Err(ReplayError::Witness("malformed Krawczyk record".into()));
                }
                let out = krawczyk_operator(
                    &comp,
                    &rec.equations,
                    &rec.vars,
                    &rec.base,
                    &rec.center,
                    &rec.input,
                    &rec.preconditioner,
                );
                if !out.iter().zip(&rec.input).all(|(o, i)| o.is_interior_of(i)) {
                    return Err(ReplayError::Witness("Krawczyk image is not inside the input box".into()));
                }
                wbox = rec.base.iter().map(|&v| Interval::point(v)).collect();
                for (i, &v) in rec.vars.iter().enumerate() {
                    wbox[v] = out[i];
                }
                for &k in &rec.equations {
                    if problem.constraints[k].rel == Relation::Gt {
                        return Err(ReplayError::Witness(format!("strict constraint {k} used as an equation")));
                    }
                    accounted[k] = true;
                }
                for &k in &rec.implied {
                    let c = &problem.constraints[k];
                    let matches = rec.equations.iter().any(|&e| {
                        let p = &problem.constraints[e].poly;
                        &c.poly == p || c.poly == -p
                    });
                    if c.rel == Relation::Gt || !matches {
                        return Err(ReplayError::Witness(format!("constraint {k} is not implied by the equations")));
                    }
                    accounted[k] = true;
                }
            }
            for (k, c) in problem.constraints.iter().enumerate() {
                if accounted[k] {
                    continue;
                }
                let e = comp.centered(k, &wbox);
                if !c.rel.satisfied_by(e) {
                    return Err(ReplayError::Witness(format!(
                        "constraint {k} {} 0 not certified on the box: {e}",
                        c.rel
                    )));
                }
            }
            Ok(())
        }
        _ => Err(ReplayError::Witness("certificate does not match the witness kind".into())),
    }
}

fn replay_unsat(problem: &Problem, verdict: &Verdict) -> Result<(), ReplayError> {
    let Some(Certificate::Cover { refuted_by_propagation, nodes }) = &verdict.certificate else {
        return Err(ReplayError::Missing(verdict.kind));
    };
    if let Some(k) = refuted_by_propagation {
        return match derive_region(problem) {
            Region::Empty { constraint } if constraint == *k => Ok(()),
            other => Err(ReplayError::Region(format!("propagation does not refute constraint {k}: {other:?}"))),
        };
    }
    if verdict.box_is_global {
        match derive_region(problem) {
            Region::Bounded(b) if b == verdict.search_box => {}
            other => return Err(ReplayError::Region(format!("derived region differs from the search box: {other:?}"))),
        }
    }
    let q = problem.nvars;
    if verdict.search_box.len() != q {
        return Err(ReplayError::Cover(format!("search box has dimension {}", verdict.search_box.len())));
    }
    let comp = Compiled::new(problem);
    let mut stack = vec![verdict.search_box.clone()];
    for (i, node) in nodes.iter().enumerate() {
        let Some(cell) = stack.pop() else {
            return Err(ReplayError::Cover(format!("node {i} has no cell left to cover")));
        };
        match *node {
            CoverNode::Split { var, at } => {
                if var >= q || !(cell[var].lo < at && at < cell[var].hi) {
                    return Err(ReplayError::Cover(format!("node {i}: invalid split of variable {var} at {at}")));
                }
                let mut lower = cell.clone();
                let mut upper = cell;
                lower[var] = Interval::new(lower[var].lo, at);
                upper[var] = Interval::new(at, upper[var].hi);
                stack.push(upper);
                stack.push(lower);
            }
            CoverNode::Leaf { constraint, method, .. } => {
                let Some(c) = problem.constraints.get(constraint) else {
                    return Err(ReplayError::Cover(format!("node {i}: no constraint {constraint}")));
                };
                let e = comp.enclosure(constraint, &cell, method);
                if !c.rel.excluded_by(e) {
                    return Err(ReplayError::Cover(format!("node {i}: constraint {constraint} not excluded ({e})")));
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err(ReplayError::Cover(format!("{} cells left uncovered", stack.len())));
    }
    Ok(())
}
