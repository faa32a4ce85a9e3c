use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use coalition_core::channel::{load_scenario, ClusteredMac, Scenario};
use coalition_core::game::{core_feasible, parse_mask, Check, Coalition, CoreStatus, TuGame};
use coalition_core::jamming::{tx_game, value_tx_jamming, SaddleConfig};
use coalition_core::pdf::{pdf_rate_region, region_contains, Containment, RateRegionSamples, RegionConfig};
use coalition_core::rx::{
    mud_game, rx_joint_game, single_receiver_mac_game, single_receiver_mac_value, sinr,
    value_joint_decoding, Detector,
};
use coalition_core::verify::{mac_stable_structures, run_criteria, VerifyConfig};

use crate::sweep::SweepSpec;
use crate::{Command, Input, Model, EXIT_EMPTY_CORE, EXIT_ERROR, EXIT_OK};

pub fn dispatch(cmd: &Command, out: &mut impl Write) -> Result<u8> {
    match cmd {
        Command::Value { input, coalition } => value(input, coalition, out),
        Command::Core { input } => core(input, out),
        Command::Cohesive { input } => cohesive(input, out),
        Command::MudStability { input } => mud_stability(input, out),
        Command::StabilityMap {
            scenario,
            axes,
            overrides,
            jobs,
            out: path,
        } => stability_map(scenario, axes, overrides, *jobs, path.as_deref(), out),
        Command::PdfRegion {
            scenario,
            coalition,
            grid,
            weights,
            fix_pc,
            plane,
            out: prefix,
        } => pdf_region(scenario, coalition, *grid, *weights, fix_pc, plane.as_deref(), prefix.as_deref(), out),
        Command::VerifyExamples { filter, seed } => verify(filter.as_deref(), *seed, out),
    }
}

fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_scenario(&text).with_context(|| format!("loading {}", path.display()))
}

enum Loaded {
    Game(TuGame),
    Scenario(Scenario, Model),
}

fn load(input: &Input) -> Result<Loaded> {
    if let Some(path) = &input.game {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(Loaded::Game(TuGame::from_json(&text)?));
    }
    let path = input.scenario.as_ref().ok_or_else(|| anyhow!("--scenario or --game is required"))?;
    let scenario = read_scenario(path)?;
    let model = match (input.model, &scenario) {
        (Some(m), _) => m,
        (None, Scenario::Ic(_)) => Model::RxJoint,
        (None, Scenario::Cdma(_)) => Model::Mud,
        (None, Scenario::Mac(_)) => Model::SingleReceiverMac,
        (None, Scenario::Clustered(_)) => bail!("clustered scenarios are analysed with pdf-region"),
    };
    let fits = matches!(
        (model, &scenario),
        (Model::RxJoint | Model::TxPerfect, Scenario::Ic(_))
            | (Model::Mud, Scenario::Cdma(_))
            | (Model::SingleReceiverMac, Scenario::Mac(_))
    );
    if !fits {
        bail!("model {model:?} does not apply to a {} scenario", scenario.model_name());
    }
    Ok(Loaded::Scenario(scenario, model))
}

fn coalition_arg(text: &str, k: usize) -> Result<Coalition> {
    let s = Coalition::from_mask(parse_mask(text)?);
    if s.is_empty() || !s.is_subset(Coalition::full(k)) {
        bail!("coalition {text} is empty or outside K={k}");
    }
    Ok(s)
}

fn tu_game(input: &Input, out: &mut impl Write) -> Result<TuGame> {
    Ok(match load(input)? {
        Loaded::Game(g) => g,
        Loaded::Scenario(Scenario::Ic(ic), Model::RxJoint) => rx_joint_game(&ic)?,
        Loaded::Scenario(Scenario::Ic(ic), Model::TxPerfect) => {
            let tg = tx_game(&ic, &SaddleConfig::default())?;
            for (s, gap) in tg.unconverged() {
                writeln!(out, "warning: saddle solve for {s} stopped with gap {gap:.3e} bits")?;
            }
            tg.game
        }
        Loaded::Scenario(Scenario::Mac(m), _) => single_receiver_mac_game(&m.snr_linear())?,
        Loaded::Scenario(_, Model::Mud) => bail!("the mud model is NTU; use value or mud-stability"),
        Loaded::Scenario(..) => unreachable!("checked in load"),
    })
}

fn value(input: &Input, mask: &str, out: &mut impl Write) -> Result<u8> {
    match load(input)? {
        Loaded::Game(g) => {
            let s = coalition_arg(mask, g.k())?;
            writeln!(out, "{:.6}", g.value(s))?;
        }
        Loaded::Scenario(sc, model) => {
            let s = coalition_arg(mask, sc.k())?;
            match (sc, model) {
                (Scenario::Ic(ic), Model::RxJoint) => writeln!(out, "{:.6}", value_joint_decoding(&ic, s)?)?,
                (Scenario::Ic(ic), Model::TxPerfect) => {
                    let r = value_tx_jamming(&ic, s, &SaddleConfig::default())?;
                    writeln!(out, "{:.6}", r.value_bits)?;
                    writeln!(
                        out,
                        "upper {:.9} lower {:.9} gap {:.3e} iterations {} converged {}",
                        r.upper_bits,
                        r.lower_bits,
                        r.gap_bits(),
                        r.iterations,
                        r.converged
                    )?;
                }
                (Scenario::Mac(m), _) => writeln!(out, "{:.6}", single_receiver_mac_value(&m.snr_linear(), s))?,
                (Scenario::Cdma(c), _) => {
                    let det: Detector = input.detector.parse()?;
                    for k in s.members() {
                        let g = sinr(&c, det, s, k)?;
                        writeln!(out, "user {k}: sinr {g:.6} rate {:.6}", (1.0 + g).log2())?;
                    }
                }
                _ => unreachable!("checked in load"),
            }
        }
    }
    Ok(EXIT_OK)
}

fn core(input: &Input, out: &mut impl Write) -> Result<u8> {
    let g = tu_game(input, out)?;
    let r = core_feasible(&g)?;
    match r.status {
        CoreStatus::NonEmpty => {
            let x = r.witness.unwrap_or_default();
            let x: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "NonEmpty")?;
            writeln!(out, "witness: {}", x.join(" "))?;
            Ok(EXIT_OK)
        }
        CoreStatus::Empty => {
            writeln!(out, "Empty")?;
            if let Some(cert) = r.certificate {
                writeln!(out, "balanced family with excess {:.6e}:", cert.excess)?;
                for (s, w) in cert.weights {
                    writeln!(out, "  {s}: {w:.6}")?;
                }
            }
            Ok(EXIT_EMPTY_CORE)
        }
    }
}

fn cohesive(input: &Input, out: &mut impl Write) -> Result<u8> {
    let g = tu_game(input, out)?;
    match g.is_superadditive() {
        Check::Holds => writeln!(out, "superadditive")?,
        Check::Violated((a, b)) => writeln!(out, "not superadditive: {a} and {b} lose value when merged")?,
    }
    let margin = g.cohesion_margin()?;
    match g.is_cohesive()? {
        Check::Holds => writeln!(out, "cohesive (best partition margin {margin:.6e})")?,
        Check::Violated(p) => writeln!(out, "not cohesive: {} beats v(K) by {margin:.6e}", p.encode())?,
    }
    Ok(EXIT_OK)
}

fn mud_stability(input: &Input, out: &mut impl Write) -> Result<u8> {
    let Loaded::Scenario(Scenario::Cdma(c), _) = load(input)? else {
        bail!("mud-stability needs a cdma scenario");
    };
    let det: Detector = input.detector.parse()?;
    let g = mud_game(&c, det)?;
    for s in Coalition::all_nonempty(c.k()) {
        let p: Vec<String> = g.payoffs(s).iter().map(|v| format!("{v:.6}")).collect();
        writeln!(out, "{s}: {}", p.join(" "))?;
    }
    match g.gc_stable() {
        Check::Holds => writeln!(out, "grand coalition stable")?,
        Check::Violated(b) => writeln!(out, "grand coalition blocked by {b}")?,
    }
    Ok(EXIT_OK)
}

fn stability_map(
    scenario: &Path,
    axes: &[String],
    overrides: &[String],
    jobs: Option<usize>,
    path: Option<&Path>,
    out: &mut impl Write,
) -> Result<u8> {
    let Scenario::Mac(mac) = read_scenario(scenario)? else {
        bail!("stability-map needs a mac scenario");
    };
    let spec = SweepSpec::parse(axes, overrides)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build()?;
    let rows: Vec<String> = pool.install(|| {
        spec.points()
            .par_iter()
            .map(|&pt| {
                let snr = spec.apply(mac.snr_db(), pt)?;
                let stable = mac_stable_structures(&snr)?;
                let enc: Vec<String> = stable.iter().map(|c| c.encode()).collect();
                Ok(format!("{},{},\"{}\"", pt.0, pt.1, enc.join(";")))
            })
            .collect::<Result<Vec<String>>>()
    })?;
    let [a, b] = &spec.axes;
    let mut csv = format!("snr{}_db,snr{}_db,stable\n", a.user, b.user);
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    emit(path, &csv, out)?;
    Ok(EXIT_OK)
}

fn emit(path: Option<&Path>, text: &str, out: &mut impl Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn parse_users(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|u| u.trim().parse().with_context(|| format!("bad user '{u}'")))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn pdf_region(
    scenario: &Path,
    mask: &str,
    grid: usize,
    weights: usize,
    fix_pc: &[String],
    plane: Option<&str>,
    prefix: Option<&Path>,
    out: &mut impl Write,
) -> Result<u8> {
    let Scenario::Clustered(mac) = read_scenario(scenario)? else {
        bail!("pdf-region needs a clustered scenario");
    };
    let s = coalition_arg(mask, mac.k())?;
    let plane = match plane {
        Some(p) => parse_users(p)?,
        None => s.members(),
    };
    let mut cfg = RegionConfig {
        grid,
        directions: weights,
        ..RegionConfig::default()
    };
    for f in fix_pc {
        let (u, v) = f.split_once('=').with_context(|| format!("--fix-pc '{f}': expected user=p_c"))?;
        cfg = cfg.fix(u.trim().parse()?, v.trim().parse()?);
    }
    let gc_cfg = RegionConfig {
        grid,
        directions: weights,
        ..RegionConfig::default()
    };
    let region = pdf_rate_region(&mac, s, &cfg)?;
    let grand = pdf_rate_region(&mac, Coalition::full(mac.k()), &gc_cfg)?;
    warn_coarse(&region, "coalition");
    warn_coarse(&grand, "grand coalition");
    if let Some(p) = prefix {
        let name = |tag: &str| {
            let mut n = p.as_os_str().to_owned();
            n.push(format!("_{tag}.csv"));
            std::path::PathBuf::from(n)
        };
        for (tag, r) in [("coalition", &region), ("grand", &grand)] {
            let file = name(tag);
            fs::write(&file, r.to_csv()).with_context(|| format!("writing {}", file.display()))?;
            writeln!(out, "wrote {}", file.display())?;
        }
    }
    verdict(&mac, s, &region, &grand, &plane, out)?;
    Ok(EXIT_OK)
}

fn warn_coarse(r: &RateRegionSamples, what: &str) {
    if r.grid_too_coarse() {
        // flat faces also make the maximizer jump, so this is advisory
        eprintln!(
            "note: {what} boundary has {} neighbouring samples more than 5% apart; \
             raise --grid or --weights if the curve looks jagged",
            r.coarse_jumps
        );
    }
}

fn verdict(
    mac: &ClusteredMac,
    s: Coalition,
    region: &RateRegionSamples,
    grand: &RateRegionSamples,
    plane: &[usize],
    out: &mut impl Write,
) -> Result<()> {
    let inside = region_contains(grand, region, plane)?;
    let covers = region_contains(region, grand, plane)?;
    let gc = Coalition::full(mac.k());
    let line = match (&inside, covers.is_contained()) {
        (Containment::Contained, _) if s == gc => "GC region contains itself".to_string(),
        (Containment::Contained, true) => format!("{s} region and GC projection coincide: no violation from {s}"),
        (Containment::Contained, false) => format!("GC projection contains {s} region: no violation from {s}"),
        (Containment::Witness(_), true) => format!("{s} region contains GC projection: game NOT cohesive"),
        (Containment::Witness(_), false) => format!("{s} region leaves GC projection: game NOT cohesive"),
    };
    writeln!(out, "{line}")?;
    if let Containment::Witness(w) = inside {
        let w: Vec<String> = w.iter().map(|v| format!("{v:.6}")).collect();
        writeln!(out, "witness outside GC projection: ({})", w.join(", "))?;
    }
    Ok(())
}

fn verify(filter: Option<&str>, seed: u64, out: &mut impl Write) -> Result<u8> {
    writeln!(out, "seed {seed}")?;
    let outcomes = run_criteria(&VerifyConfig { seed }, filter);
    if outcomes.is_empty() {
        bail!("filter {:?} matches no criterion", filter.unwrap_or(""));
    }
    let mut failed = 0;
    for o in &outcomes {
        writeln!(out, "{}", o.line())?;
        if !o.passed {
            failed += 1;
            writeln!(out, "  reproduce: coalition verify-examples --filter {} --seed {seed}", o.name)?;
        }
    }
    writeln!(out, "{}/{} passed", outcomes.len() - failed, outcomes.len())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_ERROR })
}
