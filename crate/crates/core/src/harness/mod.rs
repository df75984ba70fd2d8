//! Seeded, scripted experiments with machine-readable reports.
//!
//! Every experiment reads its parameters from a TOML table named after its
//! id. The shipped `configs/default.toml` supplies all keys; a user file only
//! needs the keys it changes.

mod config;
mod experiments;
mod report;

pub use config::{ExperimentConfig, DEFAULT_CONFIG};
pub use report::{
    emit_report, ExperimentReport, FigureEntry, Format, Manifest, MetricRecord, Table, Timestamp, Verdict,
    SCHEMA_VERSION,
};

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use report::ReportBuilder;

/// A registered experiment.
pub struct ExperimentInfo {
    pub id: &'static str,
    /// The statement the experiment tests.
    pub anchor: &'static str,
    run: fn(&ExperimentConfig, &mut ReportBuilder) -> Result<()>,
}

static REGISTRY: [ExperimentInfo; 9] = [
    ExperimentInfo {
        id: "E1_equivalence",
        anchor: "equivalence theorem: H^k(f(E)) = 0 iff H^k(g(E)) = 0 for landmark projections g iff ap rank Df < k a.e.",
        run: experiments::equivalence,
    },
    ExperimentInfo {
        id: "E2_diameter",
        anchor: "diameter bound: diam f(D) <= C(k) L H^k(D \\ A)^(1/k), A = {Df = 0}",
        run: experiments::diameter,
    },
    ExperimentInfo {
        id: "E3_si_majority",
        anchor: "segment lemma: most segments [x, y] meet E in length at most C H^n(E)^(1/n)",
        run: experiments::segment_majority,
    },
    ExperimentInfo {
        id: "E4_covering_decay",
        anchor: "covering lemma: f(K_j cap Q) is covered by m^j balls of radius C L d / m",
        run: experiments::covering_decay,
    },
    ExperimentInfo {
        id: "E5_heisenberg_unrect",
        anchor: "low rank lemma and pure unrectifiability: Lipschitz maps into H^n have ap rank <= n",
        run: experiments::heisenberg_unrect,
    },
    ExperimentInfo {
        id: "E6_bld_jacobian",
        anchor: "weak BLD maps are locally Lipschitz with Jacobian bounded below, m >= n",
        run: experiments::bld_jacobian,
    },
    ExperimentInfo {
        id: "E7_taxis_length",
        anchor: "t-axis segments have infinite CC length",
        run: experiments::taxis_length,
    },
    ExperimentInfo {
        id: "E8_area_formula",
        anchor: "area formula: integral of |J_g| over E equals integral of N(g, E, y) dH^k(y)",
        run: experiments::area_formula,
    },
    ExperimentInfo {
        id: "E9_straightening",
        anchor: "straightening: g o H^-1 fixes the first j variables near the base point",
        run: experiments::straightening,
    },
];

pub fn registry() -> &'static [ExperimentInfo] {
    &REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static ExperimentInfo> {
    REGISTRY
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownExperiment(id.to_string()))
}

/// Runs one experiment. Failed assertions are recorded as verdicts, not
/// errors; errors mean the experiment could not be carried out.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let info = lookup(&config.name)?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let clock = Instant::now();
    let mut builder = ReportBuilder::new(info.id, info.anchor, config.clone());
    (info.run)(config, &mut builder)?;
    Ok(builder.finish(Timestamp {
        started_unix_ms: started,
        runtime_ms: clock.elapsed().as_millis() as u64,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_rejects_unknown_ids() {
        assert!(matches!(lookup("E10_nothing"), Err(Error::UnknownExperiment(_))));
        assert_eq!(registry().len(), 9);
    }

    #[test]
    fn area_formula_on_coarser_grid() {
        let cfg =
            ExperimentConfig::load("E8_area_formula", Some("[E8_area_formula]\nh = 0.01\n"), None).unwrap();
        let r = run_experiment(&cfg).unwrap();
        assert!(r.passed());
        assert!((r.metric("linear.lhs").unwrap() - 4.0).abs() < 1e-12);
        assert!(r.metric("linear.gap").unwrap() < 0.01);
    }
}
