use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use clairvoyant::geometry::{
    build_cc_route, build_connection, connection_threshold, CellDims, Route, RouteCell,
};
use clairvoyant::montecarlo::{derive_seed, survival_curve, Verdict};
use clairvoyant::multiscale::{
    build_level1, build_next_level, check_recursive_estimates, sample_block, Budget, ConstOracle,
    EstimateCheck, GoodnessOracle, Law, McConfig, McOracle,
};
use clairvoyant::reachability::{
    cc_connected, cs_connected, non_oriented_reaches, sc_connected, ss_connected, survival_depth,
    BlockPair, ChunkedBlock, Rect,
};
use clairvoyant::scheduler::{schedule_to_depth, Search};
use clairvoyant::{Error, Params, Result, Role, Sequence};

use crate::args::{
    BlocksArgs, CheckArgs, Command, GenerateArgs, GoodnessArgs, GoodnessSource, PercolateArgs,
    Query, RouteArgs, ScheduleArgs, SeqFormat, SurviveArgs,
};

/// Everything a subcommand may depend on besides its own arguments.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub params: Params,
    pub seed: u64,
    pub workers: usize,
    pub force_point: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The payload is a report of violations.
    Invalid,
    /// Some Monte Carlo verdict could not be certified.
    Undecided,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub body: Vec<u8>,
    pub status: Status,
}

impl Outcome {
    fn ok(body: impl Into<Vec<u8>>) -> Self {
        Outcome {
            body: body.into(),
            status: Status::Ok,
        }
    }
}

pub fn execute(cmd: &Command, ctx: &Ctx) -> Result<Outcome> {
    match cmd {
        Command::Percolate(a) => percolate(a, ctx),
        Command::Survive(a) => survive(a, ctx),
        Command::Blocks(a) => blocks(a, ctx),
        Command::Goodness(a) => goodness(a, ctx),
        Command::Route(a) => route(a, ctx),
        Command::Schedule(a) => schedule(a),
        Command::CheckEstimates(a) => check_estimates(a, ctx),
        Command::ParamsValidate => params_validate(ctx),
        Command::Generate(a) => generate(a, ctx),
        Command::Rerun(_) => Err(Error::Domain("rerun cannot be nested".into())),
    }
}

fn read_seq(path: &Path, role: Role) -> Result<Sequence> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Sequence::from_bytes(&bytes, role)
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Domain(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Domain(e.to_string()))
}

fn sub_lens(given: &Option<Vec<usize>>, width: usize, side: &str) -> Result<Vec<usize>> {
    match given {
        None => Ok(vec![1; width]),
        Some(v) => {
            let total: usize = v.iter().sum();
            if total != width {
                return Err(Error::Domain(format!(
                    "{side} sub-block lengths sum to {total}, rectangle side is {width}"
                )));
            }
            Ok(v.clone())
        }
    }
}

fn percolate(a: &PercolateArgs, ctx: &Ctx) -> Result<Outcome> {
    let x = read_seq(&a.x, Role::X)?;
    let y = read_seq(&a.y, Role::Y)?;
    let rect = match a.rect.as_deref() {
        None => Rect::full(&x, &y)?,
        Some(&[a1, a2, b1, b2]) => Rect::new(a1, a2, b1, b2)?,
        Some(v) => {
            return Err(Error::Domain(format!(
                "--rect takes a1,a2,b1,b2, got {} values",
                v.len()
            )))
        }
    };
    let rect_json = [rect.a1, rect.a2, rect.b1, rect.b2];
    let n = a.n.unwrap_or(x.len().min(y.len()));
    let record = match a.query {
        Query::Cc => json!({
            "query": "cc",
            "rect": rect_json,
            "verdict": cc_connected(&x, &y, rect)?,
        }),
        Query::Cs | Query::Sc | Query::Ss => {
            let p = &ctx.params;
            let size = p.scale_pow(a.j, p.p_chunk())? as usize;
            let xs = sub_lens(&a.x_subs, rect.width(), "X")?;
            let ys = sub_lens(&a.y_subs, rect.height(), "Y")?;
            let xb = ChunkedBlock::new(&xs, rect.a1, size, Role::X)?;
            let yb = ChunkedBlock::new(&ys, rect.b1, size, Role::Y)?;
            let pair = BlockPair {
                x: &x,
                y: &y,
                xb: &xb,
                yb: &yb,
                j: a.j,
            };
            let (name, verdict) = match a.query {
                Query::Cs => ("cs", cs_connected(&pair, p)?),
                Query::Sc => ("sc", sc_connected(&pair, p)?),
                _ => ("ss", ss_connected(&pair, p)?),
            };
            json!({
                "query": name,
                "rect": rect_json,
                "j": a.j,
                "chunk_size": size,
                "verdict": verdict,
            })
        }
        Query::Depth => json!({
            "query": "depth",
            "n": n,
            "depth": survival_depth(&x, &y, n)?,
        }),
        Query::Nonoriented => json!({
            "query": "nonoriented",
            "n": n,
            "verdict": non_oriented_reaches(&x, &y, n)?,
        }),
    };
    Ok(Outcome::ok(to_json(&record)?))
}

fn survive(a: &SurviveArgs, ctx: &Ctx) -> Result<Outcome> {
    let curve = survival_curve(
        a.m,
        &a.depths,
        a.trials,
        ctx.seed,
        ctx.workers,
        a.alphabet.into(),
    )?;
    let mut s = String::from("n,point,ci_low,ci_high,trials,seed\n");
    for c in &curve {
        let e = &c.estimate;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.n, e.point, e.ci_low, e.ci_high, e.trials, e.master_seed
        );
    }
    Ok(Outcome::ok(s))
}

fn mc_config(ctx: &Ctx, samples: u64, budget: usize) -> McConfig {
    McConfig {
        samples,
        seed: ctx.seed,
        force_point: ctx.force_point,
        budget: Budget { attempts: budget },
    }
}

fn blocks(a: &BlocksArgs, ctx: &Ctx) -> Result<Outcome> {
    if a.level == 0 {
        return Err(Error::Domain("blocks start at level 1".into()));
    }
    let role: Role = a.role.into();
    let seq = read_seq(&a.seq, role)?;
    let mut part = build_level1(&seq, &ctx.params, role)?;
    let mut oracle: Box<dyn GoodnessOracle> = match a.goodness {
        GoodnessSource::Mc => Box::new(McOracle::new(
            ctx.params.clone(),
            seq.m(),
            mc_config(ctx, a.samples, Budget::default().attempts),
        )),
        GoodnessSource::Good => Box::new(ConstOracle(true)),
        GoodnessSource::Bad => Box::new(ConstOracle(false)),
    };
    for lvl in 1..a.level {
        let verdicts = part
            .blocks
            .iter()
            .map(|b| oracle.is_good(b, seq.slice(b.lo, b.hi)?))
            .collect::<Result<Vec<_>>>()?;
        part = build_next_level(
            &part,
            &verdicts,
            &ctx.params,
            derive_seed(ctx.seed, lvl as u64),
        )?;
    }
    Ok(Outcome::ok(to_json(&part)?))
}

fn goodness(a: &GoodnessArgs, ctx: &Ctx) -> Result<Outcome> {
    let role: Role = a.role.into();
    let mut oracle = McOracle::new(ctx.params.clone(), a.m, mc_config(ctx, a.samples, a.budget));
    let mut s = String::new();
    let mut undecided = false;
    for i in 0..a.count {
        let sb = sample_block(
            a.level,
            Law::Mu,
            role,
            a.m,
            &ctx.params,
            derive_seed(ctx.seed, i),
            &mut oracle,
            Budget { attempts: a.budget },
        )?;
        let v = oracle.classify(&sb.block, &sb.symbols)?;
        undecided |= v.overall == Verdict::Undecided;
        s.push_str(&json_line(&v)?);
        s.push('\n');
    }
    Ok(Outcome {
        body: s.into_bytes(),
        status: if undecided {
            Status::Undecided
        } else {
            Status::Ok
        },
    })
}

#[derive(Serialize)]
struct RouteOut<'a> {
    vertices: Vec<(usize, usize)>,
    cells: &'a [RouteCell],
}

impl<'a> From<&'a Route> for RouteOut<'a> {
    fn from(r: &'a Route) -> Self {
        RouteOut {
            vertices: r.vertices().collect(),
            cells: &r.cells,
        }
    }
}

fn route(a: &RouteArgs, ctx: &Ctx) -> Result<Outcome> {
    let p = &ctx.params;
    let dims = match &a.cells {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let d: CellDims = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            if d.t() != a.t || d.t_prime() != a.tprime {
                return Err(Error::Domain(format!(
                    "cell file has {} x {} cells, expected {} x {}",
                    d.t(),
                    d.t_prime(),
                    a.t,
                    a.tprime
                )));
            }
            d
        }
        None => {
            if a.j == 0 {
                return Err(Error::Domain("routes are defined from level 1".into()));
            }
            let side = p.scale_pow(a.j - 1, p.p_cell())?;
            CellDims::uniform(a.t, a.tprime, side, side)
        }
    };
    let routes = match a.kind.connection() {
        None => vec![build_cc_route(&dims, a.j, p)?],
        Some(kind) => {
            let min_side = match a.min_side {
                Some(m) => m,
                None => connection_threshold(p, a.j)?,
            };
            build_connection(kind, &dims, a.j, p, min_side)?
        }
    };
    let out: Vec<RouteOut> = routes.iter().map(RouteOut::from).collect();
    let record = json!({
        "kind": a.kind,
        "j": a.j,
        "t": a.t,
        "tprime": a.tprime,
        "dims": dims,
        "routes": out,
    });
    Ok(Outcome::ok(to_json(&record)?))
}

fn schedule(a: &ScheduleArgs) -> Result<Outcome> {
    let x = read_seq(&a.x, Role::X)?;
    let y = read_seq(&a.y, Role::Y)?;
    let body = match schedule_to_depth(&x, &y, a.n)? {
        Search::Found(s) => s.to_text(),
        Search::Blocked { max_depth } => format!("BLOCKED {max_depth}\n"),
    };
    Ok(Outcome::ok(body))
}

fn check_estimates(a: &CheckArgs, ctx: &Ctx) -> Result<Outcome> {
    let cfg = EstimateCheck {
        level: a.level,
        ensemble: a.ensemble,
        m: a.m,
        mc: mc_config(ctx, a.samples, a.budget),
        p_grid: a.p_grid.clone(),
        mgf_tolerance: a.mgf_tolerance,
    };
    let report = check_recursive_estimates(&cfg, &ctx.params)?;
    let undecided = report.mgf_verdict == Verdict::Undecided
        || report.good_verdict == Verdict::Undecided
        || report.tail.iter().any(|t| t.verdict == Verdict::Undecided);
    Ok(Outcome {
        body: to_json(&report)?,
        status: if undecided {
            Status::Undecided
        } else {
            Status::Ok
        },
    })
}

fn params_validate(ctx: &Ctx) -> Result<Outcome> {
    let report = ctx.params.validate();
    Ok(Outcome {
        body: to_json(&json!({ "params": ctx.params, "report": report }))?,
        status: if report.ok {
            Status::Ok
        } else {
            Status::Invalid
        },
    })
}

fn generate(a: &GenerateArgs, ctx: &Ctx) -> Result<Outcome> {
    let seq = clairvoyant::generate(a.m, a.n, ctx.seed, a.role.into())?;
    let body = match a.format {
        SeqFormat::Text => seq.to_text().into_bytes(),
        SeqFormat::Binary => {
            let mut buf = Vec::new();
            seq.write_binary(&mut buf)?;
            buf
        }
    };
    Ok(Outcome::ok(body))
}
