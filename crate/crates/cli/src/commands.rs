use std::path::Path;

use vagueness_core::{
    apply_update, binarize_metric, check_faithfulness, compare_observers, derive_prime,
    grid_probes, pan_x_check, property_identity_analysis, sharpness, shared_clear_agreement,
    simulate_stream, Classifier, Error as CoreError, PropertyFramework, SetKind, SystemRecord,
    Thresholds, TraceEvent, UpdateKind, TIE_RULE,
};

use crate::error::{CliError, Result};
use crate::report::*;
use crate::scenario::{load_scenario, Scenario};
use crate::systems::ingest_rows;
use crate::{Command, GlobalArgs, Outcome, EXIT_OK, EXIT_VIOLATION};

/// Largest probe grid `compare` will build.
pub const MAX_GRID_PROBES: usize = 1_000_000;

pub fn dispatch(global: &GlobalArgs, command: &Command) -> Result<Outcome> {
    let path = global
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Usage("--scenario PATH is required".into()))?;
    let scenario = load_scenario(path, global.epsilon)?;
    let ctx = Ctx {
        global,
        path,
        scenario: &scenario,
    };
    match command {
        Command::Thresholds => ctx.thresholds(),
        Command::Classify => ctx.classify(),
        Command::Faithfulness => ctx.faithfulness(),
        Command::Sharpness => ctx.sharpness(),
        Command::PanCheck => ctx.pan_check(),
        Command::Update => ctx.update(),
        Command::Simulate { steps } => ctx.simulate(*steps),
        Command::Compare { against, grid_points } => ctx.compare(against, *grid_points),
        Command::Rescale => ctx.rescale(),
        Command::Binarize => ctx.binarize(),
    }
}

struct Ctx<'a> {
    global: &'a GlobalArgs,
    path: &'a Path,
    scenario: &'a Scenario,
}

fn ok(report: String) -> Result<Outcome> {
    Ok(Outcome { report, code: EXIT_OK })
}

impl Ctx<'_> {
    fn fw(&self) -> &PropertyFramework {
        &self.scenario.framework
    }

    fn json(&self) -> bool {
        self.global.format == Format::Json
    }

    fn model(&self, e: CoreError) -> CliError {
        CliError::model(self.path.display().to_string(), e)
    }

    fn classifier(&self) -> Result<Classifier<'_>> {
        Classifier::new(self.fw(), self.scenario.tolerance).map_err(|e| self.model(e))
    }

    /// `--systems` when given, else the scenario's probes.
    fn systems(&self) -> Result<Vec<SystemRecord>> {
        match &self.global.systems {
            Some(p) => crate::systems::ingest_systems_csv(p, self.fw().schema()),
            None => Ok(self.scenario.probes.clone()),
        }
    }

    fn thresholds(&self) -> Result<Outcome> {
        let c = self.classifier()?;
        let th = *c.thresholds();
        if self.json() {
            return ok(to_json(&ThresholdsReport {
                thresholds: th,
                width: th.width(),
                tie_rule: TIE_RULE,
                epsilon: c.tolerance().get(),
                framework: frame_ref(self.fw()),
            }));
        }
        let mut items = thresholds_pairs(&th);
        items.push(("width", num(th.width())));
        items.push(("tie_rule", TIE_RULE.into()));
        items.push(("epsilon", num(c.tolerance().get())));
        ok(pairs(&items))
    }

    fn classify(&self) -> Result<Outcome> {
        let c = self.classifier()?;
        let determinations = self
            .systems()?
            .iter()
            .map(|s| c.determination(s))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| self.model(e))?;
        if self.json() {
            return ok(to_json(&ClassifyReport {
                thresholds: *c.thresholds(),
                epsilon: c.tolerance().get(),
                determinations,
            }));
        }
        let mut t = Table::new(["id", "value", "verdict", "margin"]);
        for d in &determinations {
            t.row([
                d.system_id.to_string(),
                num(d.metric_value),
                d.verdict.to_string(),
                num(d.margin),
            ]);
        }
        ok(t.render())
    }

    fn faithfulness(&self) -> Result<Outcome> {
        let tol = self.scenario.tolerance;
        let report = check_faithfulness(self.fw(), tol).map_err(|e| self.model(e))?;
        let code = if report.is_faithful { EXIT_OK } else { EXIT_VIOLATION };
        let text = if self.json() {
            to_json(&FaithfulnessOut {
                report,
                epsilon: tol.get(),
            })
        } else {
            let mut out = pairs(&[("faithful", report.is_faithful.to_string())]);
            if let Some(th) = &report.derived_thresholds {
                out.push_str(&pairs(&thresholds_pairs(th)));
            }
            if !report.violations.is_empty() {
                let mut t = Table::new(["id", "set", "value", "condition"]);
                for v in &report.violations {
                    t.row([
                        v.system_id.to_string(),
                        v.set.as_str().to_string(),
                        num(v.metric_value),
                        v.condition.to_string(),
                    ]);
                }
                out.push('\n');
                out.push_str(&t.render());
            }
            out
        };
        Ok(Outcome { report: text, code })
    }

    fn sharpness(&self) -> Result<Outcome> {
        let c = self.classifier()?;
        let th = *c.thresholds();
        let verdict = sharpness(self.fw(), &th, c.tolerance()).map_err(|e| self.model(e))?;
        let borderline_exemplars = self.fw().exemplars().borderline().len();
        if self.json() {
            return ok(to_json(&SharpnessReport {
                verdict,
                borderline_exemplars,
                thresholds: th,
            }));
        }
        let mut items = vec![
            ("weak_sharp", verdict.weak_sharp.to_string()),
            ("strong_sharp", verdict.strong_sharp.to_string()),
            ("borderline_exemplars", borderline_exemplars.to_string()),
        ];
        items.extend(thresholds_pairs(&th));
        ok(pairs(&items))
    }

    fn pan_check(&self) -> Result<Outcome> {
        let c = self.classifier()?;
        let th = *c.thresholds();
        let probes = self.systems()?;
        let report = pan_x_check(self.fw(), &th, &probes, c.tolerance()).map_err(|e| self.model(e))?;
        if self.json() {
            return ok(to_json(&PanCheckReport {
                report,
                probes_evaluated: probes.len(),
                thresholds: th,
            }));
        }
        let flagged: Vec<String> = report.flagged_small_systems.iter().map(|s| s.to_string()).collect();
        ok(pairs(&[
            ("gamma_at_floor", report.gamma_at_floor.to_string()),
            ("non_exhibit_is_singleton", report.non_exhibit_is_singleton.to_string()),
            ("probes_evaluated", probes.len().to_string()),
            ("flagged", flagged.join(",")),
        ]))
    }

    fn update(&self) -> Result<Outcome> {
        let systems = self
            .global
            .systems
            .as_deref()
            .ok_or_else(|| CliError::Usage("update needs --systems PATH with a `target` column".into()))?;
        let rows = ingest_rows(systems, self.fw().schema())?;
        if let Some(i) = rows.iter().position(|r| r.target.is_none()) {
            return Err(CliError::Csv {
                file: systems.to_path_buf(),
                row: i as u64 + 2,
                column: "target".into(),
                message: "update needs a `target` column".into(),
            });
        }
        let tol = self.scenario.tolerance;
        let initial = *self.classifier()?.thresholds();
        let tracked = &self.scenario.probes;
        let mut current = self.fw().clone();
        let mut events = Vec::new();
        for (step, row) in rows.iter().enumerate() {
            let target = row.target.expect("checked above");
            let (next, event) =
                apply_update(&current, row.record.clone(), target, tracked, tol).map_err(|e| self.model(e))?;
            current = next;
            let stop = event.kind == UpdateKind::FaithfulnessViolation;
            events.push(TraceEvent {
                step: step as u64,
                event,
            });
            if stop {
                break;
            }
        }
        let quarantined = current.is_quarantined();
        let final_thresholds = if quarantined {
            None
        } else {
            Some(*Classifier::new(&current, tol).map_err(|e| self.model(e))?.thresholds())
        };
        let code = if quarantined { EXIT_VIOLATION } else { EXIT_OK };
        let text = if self.json() {
            to_json(&UpdateReport {
                initial_thresholds: initial,
                updates_requested: rows.len(),
                updates_processed: events.len(),
                events,
                final_thresholds,
                quarantined,
            })
        } else {
            let mut t = event_table();
            for ev in &events {
                event_row(&mut t, ev);
            }
            let mut out = t.render();
            out.push('\n');
            out.push_str(&pairs(&[
                ("quarantined", quarantined.to_string()),
                ("final_eta0", opt_num(final_thresholds.map(|t| t.eta0))),
                ("final_gamma0", opt_num(final_thresholds.map(|t| t.gamma0))),
            ]));
            out
        };
        Ok(Outcome { report: text, code })
    }

    fn simulate(&self, steps: Option<u64>) -> Result<Outcome> {
        let sim = self.scenario.simulation.as_ref().ok_or_else(|| {
            CliError::Usage(format!("{}: scenario has no `simulation` block", self.path.display()))
        })?;
        let seed = self.global.seed.unwrap_or(sim.seed);
        let steps = steps.unwrap_or(sim.steps);
        let tol = self.scenario.tolerance;
        let trace = simulate_stream(self.fw(), &sim.generator(), seed, steps, &self.scenario.probes, tol)
            .map_err(|e| self.model(e))?;
        let violations = trace
            .events
            .iter()
            .filter(|e| e.event.kind == UpdateKind::FaithfulnessViolation)
            .count();
        let code = if violations > 0 { EXIT_VIOLATION } else { EXIT_OK };
        let text = if self.json() {
            let mut out = to_json_line(&TraceLine::Header {
                generator: trace.generator,
                seed,
                steps,
                epsilon: tol.get(),
                initial: trace.width_series[0],
            });
            for ev in &trace.events {
                out.push_str(&to_json_line(&TraceLine::Event(ev)));
            }
            out.push_str(&to_json_line(&TraceLine::Summary {
                events: trace.events.len(),
                halted: trace.halted,
                violations,
                width_series: &trace.width_series,
            }));
            out
        } else {
            let mut t = event_table();
            for ev in &trace.events {
                event_row(&mut t, ev);
            }
            let mut out = t.render();
            out.push('\n');
            out.push_str(&pairs(&[
                ("generator", trace.generator.into()),
                ("seed", seed.to_string()),
                ("halted", trace.halted.to_string()),
                ("violations", violations.to_string()),
            ]));
            out
        };
        Ok(Outcome { report: text, code })
    }

    fn compare(&self, against: &Path, grid_points: usize) -> Result<Outcome> {
        let other = load_scenario(against, self.global.epsilon)?;
        let (a, b) = (self.fw(), &other.framework);
        let tol = self.scenario.tolerance;
        let other_model = |e| CliError::model(against.display().to_string(), e);
        let th_a = *self.classifier()?.thresholds();
        let th_b = *Classifier::new(b, tol).map_err(other_model)?.thresholds();
        if a.schema() != b.schema() {
            return Err(self.model(CoreError::SchemaConflict(format!(
                "{} vs {}",
                a.schema().feature_names().join(","),
                b.schema().feature_names().join(",")
            ))));
        }

        let (probes, grid) = match &self.global.systems {
            Some(p) => (crate::systems::ingest_systems_csv(p, a.schema())?, None),
            None => {
                let ranges = feature_ranges(&[a, b], &[&self.scenario.probes, &other.probes]);
                let total = (grid_points as f64).powi(ranges.len() as i32);
                if grid_points < 2 || total > MAX_GRID_PROBES as f64 {
                    return Err(CliError::Usage(format!(
                        "--grid-points {grid_points} over {} features is outside 2..={MAX_GRID_PROBES} probes",
                        ranges.len()
                    )));
                }
                (
                    grid_probes(&ranges, grid_points),
                    Some(GridSpec {
                        ranges,
                        points_per_dim: grid_points,
                    }),
                )
            }
        };
        let report = compare_observers(a, b, &probes, tol).map_err(|e| self.model(e))?;
        let shared = match shared_clear_agreement(a, b, &probes, tol) {
            Ok(v) => Some(v),
            Err(CoreError::PreconditionUnmet(_)) => None,
            Err(e) => return Err(self.model(e)),
        };
        if !self.json() {
            let mut out = pairs(&[
                ("first", format!("{} / {}", a.observer_id(), a.property_name())),
                ("second", format!("{} / {}", b.observer_id(), b.property_name())),
                ("probes", probes.len().to_string()),
                ("agreement_rate", num(report.agreement_rate)),
                ("opposite", report.opposite.len().to_string()),
                ("borderline_vs_decided", report.borderline_vs_decided.len().to_string()),
                ("emergent_vagueness", report.emergent_vagueness.to_string()),
                (
                    "shared_clear_agreement",
                    shared.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into()),
                ),
            ]);
            let disagreements: Vec<_> = report.rows.iter().filter(|r| r.first != r.second).collect();
            if !disagreements.is_empty() {
                let mut t = Table::new(["id", "first", "second", "first_value", "second_value"]);
                for r in disagreements {
                    t.row([
                        r.system_id.to_string(),
                        r.first.to_string(),
                        r.second.to_string(),
                        num(r.first_value),
                        num(r.second_value),
                    ]);
                }
                out.push('\n');
                out.push_str(&t.render());
            }
            return ok(out);
        }
        ok(to_json(&CompareReport {
            first: ObserverSide {
                framework: frame_ref(a),
                thresholds: th_a,
            },
            second: ObserverSide {
                framework: frame_ref(b),
                thresholds: th_b,
            },
            probes_evaluated: probes.len(),
            grid,
            shared_clear_agreement: shared,
            report,
        }))
    }

    fn rescale(&self) -> Result<Outcome> {
        let c = self.classifier()?;
        let tol = c.tolerance();
        let source_th = *c.thresholds();
        let prime = derive_prime(self.fw(), tol).map_err(|e| self.model(e))?;
        let pc = Classifier::with_thresholds(&prime.framework, prime.thresholds, tol).map_err(|e| self.model(e))?;
        let mut exemplars = Vec::new();
        for (set, r) in self.fw().exemplars().iter() {
            let source_value = c.value(r).map_err(|e| self.model(e))?;
            let prime_value = pc.value(r).map_err(|e| self.model(e))?;
            exemplars.push(RescaledExemplar {
                system_id: r.id.clone(),
                set,
                source_value,
                source_verdict: source_th.verdict(source_value, tol),
                prime_value,
                prime_verdict: prime.thresholds.verdict(prime_value, tol),
            });
        }
        let probes = self.systems()?;
        let identity = property_identity_analysis(self.fw(), &prime, &probes, tol).map_err(|e| self.model(e))?;
        if !self.json() {
            let mut out = pairs(&[
                ("prime_property", prime.framework.property_name().to_string()),
                ("source_eta0", num(source_th.eta0)),
                ("source_gamma0", num(source_th.gamma0)),
                ("prime_eta0", num(prime.thresholds.eta0)),
                ("prime_gamma0", num(prime.thresholds.gamma0)),
                ("seam", opt_num(prime.map.map(|m| m.seam()))),
                ("probe_differences", identity.differences.len().to_string()),
            ]);
            let mut t = Table::new(["id", "set", "value", "verdict", "prime_value", "prime_verdict"]);
            for e in &exemplars {
                t.row([
                    e.system_id.to_string(),
                    e.set.as_str().to_string(),
                    num(e.source_value),
                    e.source_verdict.to_string(),
                    num(e.prime_value),
                    e.prime_verdict.to_string(),
                ]);
            }
            out.push('\n');
            out.push_str(&t.render());
            return ok(out);
        }
        ok(to_json(&RescaleReport {
            source_thresholds: source_th,
            prime_property: prime.framework.property_name().to_string(),
            prime_thresholds: prime.thresholds,
            seam: prime.map.map(|m| m.seam()),
            map: prime.map,
            exemplars,
            identity,
        }))
    }

    fn binarize(&self) -> Result<Outcome> {
        let c = self.classifier()?;
        let tol = c.tolerance();
        let th = *c.thresholds();
        let phi = self.fw().metric();
        let phi_prime = binarize_metric(phi, th.eta0, tol).map_err(|e| self.model(e))?;
        let binarized_thresholds = Thresholds::new(1.0, 0.0, 0.0, 1.0);
        let mut rows = Vec::new();
        let exemplars = self.fw().exemplars().iter().map(|(k, r)| (Some(k), r.clone()));
        let probes = self.systems()?.into_iter().map(|r| (None, r));
        for (set, r) in exemplars.chain(probes) {
            let value = c.value(&r).map_err(|e| self.model(e))?;
            let binarized_value = phi_prime.evaluate(&r).map_err(|e| self.model(e))?;
            rows.push(BinarizedRow {
                system_id: r.id.clone(),
                set,
                value,
                verdict: th.verdict(value, tol),
                binarized_value,
                binarized_verdict: binarized_thresholds.verdict(binarized_value, tol),
            });
        }
        let clear_values_collapsed = rows
            .iter()
            .filter(|r| r.set == Some(SetKind::Clear))
            .all(|r| r.binarized_value == 1.0);
        if !self.json() {
            let mut out = pairs(&[
                ("eta0", num(th.eta0)),
                ("clear_values_collapsed", clear_values_collapsed.to_string()),
            ]);
            let mut t = Table::new(["id", "set", "value", "verdict", "binarized", "binarized_verdict"]);
            for r in &rows {
                t.row([
                    r.system_id.to_string(),
                    r.set.map(|s| s.as_str()).unwrap_or("probe").to_string(),
                    num(r.value),
                    r.verdict.to_string(),
                    num(r.binarized_value),
                    r.binarized_verdict.to_string(),
                ]);
            }
            out.push('\n');
            out.push_str(&t.render());
            return ok(out);
        }
        ok(to_json(&BinarizeReport {
            eta0: th.eta0,
            binarized_thresholds,
            clear_values_collapsed,
            rows,
        }))
    }
}

fn frame_ref(fw: &PropertyFramework) -> FrameworkRef {
    FrameworkRef {
        observer: fw.observer_id().to_string(),
        property: fw.property_name().to_string(),
    }
}

/// Per-feature `[min, max]` over all exemplars and probes; a degenerate
/// range is widened by 1 on each side.
pub fn feature_ranges(frameworks: &[&PropertyFramework], probes: &[&[SystemRecord]]) -> Vec<(f64, f64)> {
    let d = frameworks[0].schema().dimension();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    let records = frameworks
        .iter()
        .flat_map(|fw| fw.exemplars().iter().map(|(_, r)| r))
        .chain(probes.iter().flat_map(|p| p.iter()));
    for r in records {
        for (range, &x) in ranges.iter_mut().zip(&r.features) {
            range.0 = range.0.min(x);
            range.1 = range.1.max(x);
        }
    }
    for range in &mut ranges {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(range.0 < range.1) {
            let mid = if range.0.is_finite() { range.0 } else { 0.0 };
            *range = (mid - 1.0, mid + 1.0);
        }
    }
    ranges
}

fn event_table() -> Table {
    Table::new(["step", "trigger", "target", "kind", "gamma0", "eta0", "reclassified"])
}

fn event_row(t: &mut Table, ev: &TraceEvent) {
    let (id, target) = match &ev.event.trigger {
        vagueness_core::Trigger::Exemplar { system_id, target } => (system_id.to_string(), target.as_str().to_string()),
        vagueness_core::Trigger::MetricSwap => ("metric".into(), "-".into()),
    };
    let th = ev.event.resulting_thresholds;
    t.row([
        ev.step.to_string(),
        id,
        target,
        kind_str(ev.event.kind).to_string(),
        opt_num(th.map(|t| t.gamma0)),
        opt_num(th.map(|t| t.eta0)),
        ev.event.reclassified.len().to_string(),
    ]);
}

fn kind_str(k: UpdateKind) -> &'static str {
    match k {
        UpdateKind::Sharpening => "sharpening",
        UpdateKind::Vaguening => "vaguening",
        UpdateKind::Neutral => "neutral",
        UpdateKind::FaithfulnessViolation => "faithfulness_violation",
        UpdateKind::Rejected => "rejected",
    }
}
