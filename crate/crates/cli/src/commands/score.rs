//! `score`: single-triple debugging scorer.

use taxoprompt::prompts::{builtin, instantiate, TemplateGroup};

use crate::error::CliError;
use crate::output::metric;
use crate::ScoreArgs;

use super::{load_groups, Runtime};

fn find_template(args: &ScoreArgs) -> Result<TemplateGroup, CliError> {
    let groups = match &args.catalog {
        Some(_) => load_groups(&args.catalog, builtin::hypernym)?,
        None => {
            let mut all = builtin::hypernym();
            all.extend(builtin::cohyponym());
            all.extend(builtin::cohypo_augmented());
            all
        }
    };
    groups
        .into_iter()
        .find(|g| g.id == args.template)
        .ok_or_else(|| CliError::config(format!("template {:?} not found", args.template)))
}

pub fn run(args: ScoreArgs) -> Result<String, CliError> {
    let runtime = Runtime::new(&args.common)?;
    let scorer = runtime.scorer();
    let group = find_template(&args)?;
    let mode = runtime.config.mode;
    let score = scorer.score_group(
        &group,
        mode,
        &args.hypo,
        args.hyper.as_deref(),
        args.cohypo.as_deref(),
    )?;
    // show the surface form of the first variant for context
    let shown = {
        let lower = |s: &str| {
            if runtime.config.lowercase {
                s.to_lowercase()
            } else {
                s.to_string()
            }
        };
        let hypo = lower(&args.hypo);
        let hyper = args.hyper.as_deref().map(&lower);
        let cohypo = args.cohypo.as_deref().map(&lower);
        instantiate(&group.variants[0], &hypo, hyper.as_deref(), cohypo.as_deref())?.text
    };
    let mut summary = format!(
        "score ok template={} mode={} log_score={}",
        group.id,
        mode,
        metric(score.log_score)
    );
    if runtime.config.prob_scores {
        summary.push_str(&format!(" prob={:.6e}", score.log_score.exp()));
    }
    summary.push_str(&format!(" text={shown:?}"));
    Ok(summary)
}
