use std::sync::Arc;

use hetree::{build_tree, sort_dataset, AdaptTarget, ExplorationSession, StartRequest};

use crate::{classify, ExploreArgs, Failure};

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Start(StartRequest),
    Drill(usize),
    RollUp,
    Adapt(AdaptTarget),
}

fn parse_line(text: &str) -> Result<Option<Step>, String> {
    let text = text.split('#').next().unwrap_or_default().trim();
    let words: Vec<&str> = text.split_whitespace().collect();
    let num = |w: &str| w.parse::<f64>().map_err(|_| format!("expected a number, got {w:?}"));
    let count = |w: &str| w.parse::<usize>().map_err(|_| format!("expected a whole number, got {w:?}"));
    Ok(Some(match words.as_slice() {
        [] => return Ok(None),
        ["start", "bsc"] => Step::Start(StartRequest::Bsc),
        ["start", "res", subject] => Step::Start(StartRequest::Res { resource: (*subject).to_owned() }),
        ["start", "ran", lo, hi] => Step::Start(StartRequest::Ran { lower: num(lo)?, upper: num(hi)? }),
        ["drill", k] => Step::Drill(count(k)?),
        ["rollup"] | ["roll-up"] => Step::RollUp,
        ["adapt", "degree", d] => Step::Adapt(AdaptTarget::Degree(count(d)?)),
        ["adapt", "leaves", l] => Step::Adapt(AdaptTarget::Leaves(count(l)?)),
        _ => return Err(format!("cannot parse {text:?}")),
    }))
}

pub fn explore(args: ExploreArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.script)
        .map_err(|e| Failure::Usage(format!("cannot read script {}: {e}", args.script.display())))?;
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match parse_line(line) {
            Ok(Some(step)) => steps.push((i + 1, step)),
            Ok(None) => {}
            Err(message) => return Err(Failure::Script { line: i + 1, message }),
        }
    }
    let Some((first_line, Step::Start(start))) = steps.first().cloned() else {
        let line = steps.first().map_or(1, |(l, _)| *l);
        return Err(Failure::Script { line, message: "a script must begin with `start`".into() });
    };

    let raw = args.input.load()?;
    let params = args.shape.params(raw.len()).map_err(classify)?;
    let fail = |line: usize| move |e: hetree::Error| Failure::Script { line, message: e.to_string() };
    let mut session = if args.incremental {
        ExplorationSession::incremental(Arc::new(raw), params, &start).map_err(fail(first_line))?
    } else {
        let (tree, counters) = build_tree(sort_dataset(raw), params).map_err(classify)?;
        ExplorationSession::full(tree, counters, &start).map_err(fail(first_line))?
    };
    eprintln!("{} session, variant {} leaves {} degree {}", if args.incremental { "incremental" } else { "full" }, params.variant, params.leaves, params.degree);

    let mut total = session.counters().nodes_built;
    report(&session, 1, "start", total, total, args.quiet);
    for (n, (line, step)) in steps.iter().enumerate().skip(1) {
        let label = match step {
            Step::Start(_) => return Err(Failure::Script { line: *line, message: "`start` may only appear first".into() }),
            Step::Drill(k) => {
                session.drill_nth(*k).map_err(fail(*line))?;
                format!("drill {k}")
            }
            Step::RollUp => {
                session.roll_up().map_err(fail(*line))?;
                "rollup".to_owned()
            }
            Step::Adapt(target) => {
                let r = session.adapt(*target, None).map_err(fail(*line))?;
                eprintln!("adaptation: {}", serde_json::to_string(&r).unwrap_or_default());
                format!("adapt {target:?}")
            }
        };
        let now = session.counters().nodes_built;
        report(&session, n + 1, &label, now - total, now, args.quiet);
        total = now;
    }
    println!("counters {}", serde_json::to_string(&session.counters()).unwrap_or_default());
    Ok(())
}

fn report(session: &ExplorationSession, step: usize, label: &str, built: u64, total: u64, quiet: bool) {
    println!("step {step} {label}: built {built} total {total}");
    if !quiet {
        println!("{}", serde_json::to_string(&session.view()).unwrap_or_default());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        assert_eq!(parse_line("start ran 30 50.5").unwrap(), Some(Step::Start(StartRequest::Ran { lower: 30.0, upper: 50.5 })));
        assert_eq!(parse_line("  # note").unwrap(), None);
        assert_eq!(parse_line("drill 2 # second").unwrap(), Some(Step::Drill(2)));
        assert_eq!(parse_line("adapt leaves 4").unwrap(), Some(Step::Adapt(AdaptTarget::Leaves(4))));
        assert!(parse_line("drill two").is_err());
        assert!(parse_line("jump").is_err());
    }
}
