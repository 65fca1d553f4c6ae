//! The experiment suite. Each study returns per-replication results so
//! callers can test properties instance by instance; the `*_tables`
//! functions reduce them to the CSV schemas.

use crate::error::{Error, Result};
use crate::matching::{assignment_value, marginal_gap, DmaTrace};
use crate::par;
use crate::sim::{
    build_pair_table, generate_scenario, pair, realize, run_mobility, run_one_timescale_restricted,
    FrameMetrics, MobilityConfig, Pairing, ScenarioConfig, Stat, Streams,
};

use super::table::{Cell, Table};

/// Runs `count` replications, in parallel when enabled; the first error
/// (by replication index) wins.
fn replicate<T: Send>(count: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    par::map_indexed(count, |r| f(r as u64))
        .into_iter()
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// One replication of the pairing comparison.
#[derive(Debug, Clone)]
pub struct PairingRep {
    /// Indexed like [`Pairing::ALL`].
    pub frames: Vec<FrameMetrics>,
    /// `Σ v` of the DMA and the optimal assignment.
    pub dma_value: f64,
    pub optimal_value: f64,
    /// Marginal gap of each D2D pair under the DMA matching, in units of ε.
    pub gaps_over_eps: Vec<f64>,
    pub iterations: usize,
    pub iteration_cap: usize,
}

impl PairingRep {
    pub fn frame(&self, scheme: Pairing) -> &FrameMetrics {
        let i = Pairing::ALL
            .iter()
            .position(|&p| p == scheme)
            .expect("listed");
        &self.frames[i]
    }
}

#[derive(Debug, Clone)]
pub struct NPoint {
    pub n: usize,
    pub reps: Vec<PairingRep>,
}

impl NPoint {
    pub fn stat(&self, scheme: Pairing, f: impl Fn(&FrameMetrics) -> f64) -> Stat {
        Stat::from_samples(
            &self
                .reps
                .iter()
                .map(|r| f(r.frame(scheme)))
                .collect::<Vec<_>>(),
        )
    }
}

fn pairing_rep(cfg: &ScenarioConfig, streams: &Streams) -> Result<PairingRep> {
    let scn = generate_scenario(cfg, &mut streams.geometry())?;
    let table = build_pair_table(&scn, cfg, streams)?;
    let mut frames = Vec::with_capacity(Pairing::ALL.len());
    let mut dma = None;
    let mut optimal_value = 0.0;
    for scheme in Pairing::ALL {
        let (matching, iterations) = pair(&table, cfg, streams, scheme)?;
        frames.push(realize(&scn, cfg, streams, &table, &matching, iterations)?);
        match scheme {
            Pairing::Dma => dma = Some((matching, iterations)),
            Pairing::Optimal => optimal_value = assignment_value(&table.payoffs, &matching),
            _ => {}
        }
    }
    let (matching, iterations) = dma.expect("DMA is in the scheme list");
    let gaps_over_eps = (0..table.payoffs.dps())
        .map(|n| marginal_gap(&table.payoffs, &matching, n) / cfg.eps)
        .collect();
    Ok(PairingRep {
        frames,
        dma_value: assignment_value(&table.payoffs, &matching),
        optimal_value,
        gaps_over_eps,
        iterations,
        iteration_cap: DmaTrace::iteration_cap(&table.payoffs, cfg.eps),
    })
}

/// All four pairing schemes at each `N`, with `M = cfg.m_count`.
pub fn study_vs_n(
    cfg: &ScenarioConfig,
    n_values: &[usize],
    replications: usize,
    seed: u64,
) -> Result<Vec<NPoint>> {
    n_values
        .iter()
        .map(|&n| {
            let c = cfg.with_sizes(cfg.m_count, n);
            let reps = replicate(replications, |r| pairing_rep(&c, &Streams::new(seed, r)))?;
            Ok(NPoint { n, reps })
        })
        .collect()
}

pub fn gap_table(points: &[NPoint]) -> Table {
    let mut t = Table::new("gap-stats", &["n", "max_gap_over_eps", "mean_gap_over_eps"]);
    for p in points {
        let gaps = || p.reps.iter().flat_map(|r| r.gaps_over_eps.iter().copied());
        t.push(vec![
            p.n.into(),
            gaps().fold(0.0, f64::max).into(),
            mean(gaps()).into(),
        ]);
    }
    t
}

pub fn utility_table(points: &[NPoint]) -> Table {
    let mut t = Table::new("avg-utility", &["n", "side", "eau"]);
    for p in points {
        t.push(vec![
            p.n.into(),
            "cu".into(),
            p.stat(Pairing::Dma, |f| f.eau_cu).mean.into(),
        ]);
        t.push(vec![
            p.n.into(),
            "d2d".into(),
            p.stat(Pairing::Dma, |f| f.eau_d2d).mean.into(),
        ]);
    }
    t
}

pub fn sumrate_table(points: &[NPoint]) -> Table {
    let mut t = Table::new("sumrate-vs-n", &["n", "algo", "mean_wsr", "stderr"]);
    for p in points {
        for scheme in Pairing::ALL {
            let s = p.stat(scheme, |f| f.weighted_sum_rate);
            t.push(vec![
                p.n.into(),
                scheme.name().into(),
                s.mean.into(),
                s.stderr.into(),
            ]);
        }
    }
    t
}

pub fn outage_table(points: &[NPoint]) -> Table {
    let mut t = Table::new("outage-vs-n", &["n", "algo", "outage_pct", "stderr"]);
    for p in points {
        for scheme in Pairing::ALL {
            let s = p.stat(scheme, |f| 100.0 * f.outage_fraction());
            t.push(vec![
                p.n.into(),
                scheme.name().into(),
                s.mean.into(),
                s.stderr.into(),
            ]);
        }
    }
    t
}

/// Per ε, the frames of every scheme over all replications.
#[derive(Debug, Clone)]
pub struct EpsPoint {
    pub eps: f64,
    /// `frames[scheme][rep]`, schemes as in [`Pairing::ALL`].
    pub frames: Vec<Vec<FrameMetrics>>,
}

/// Pairing comparison across price steps on the same scenarios.
pub fn study_vs_eps(
    cfg: &ScenarioConfig,
    eps_values: &[f64],
    replications: usize,
    seed: u64,
) -> Result<Vec<EpsPoint>> {
    let per_rep = replicate(replications, |r| {
        let streams = Streams::new(seed, r);
        let scn = generate_scenario(cfg, &mut streams.geometry())?;
        let table = build_pair_table(&scn, cfg, &streams)?;
        eps_values
            .iter()
            .map(|&eps| {
                let c = ScenarioConfig { eps, ..cfg.clone() };
                Pairing::ALL
                    .iter()
                    .map(|&scheme| {
                        let (m, it) = pair(&table, &c, &streams, scheme)?;
                        realize(&scn, &c, &streams, &table, &m, it)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(eps_values
        .iter()
        .enumerate()
        .map(|(e, &eps)| EpsPoint {
            eps,
            frames: (0..Pairing::ALL.len())
                .map(|s| per_rep.iter().map(|rep| rep[e][s].clone()).collect())
                .collect(),
        })
        .collect())
}

pub fn eps_table(points: &[EpsPoint]) -> Table {
    let mut t = Table::new("epsilon-sweep", &["eps", "algo", "mean_wsr"]);
    for p in points {
        for (s, scheme) in Pairing::ALL.iter().enumerate() {
            let wsr = mean(p.frames[s].iter().map(|f| f.weighted_sum_rate));
            t.push(vec![p.eps.into(), scheme.name().into(), wsr.into()]);
        }
    }
    t
}

#[derive(Debug, Clone)]
pub struct IterationPoint {
    pub eps: f64,
    pub m: usize,
    pub n: usize,
    /// DMA rounds per replication.
    pub iterations: Vec<usize>,
}

/// DMA rounds for every `(ε, M, N)`. Fails if any run exceeds the
/// iteration cap.
pub fn study_iterations(
    cfg: &ScenarioConfig,
    m_values: &[usize],
    n_values: &[usize],
    eps_values: &[f64],
    replications: usize,
    seed: u64,
) -> Result<Vec<IterationPoint>> {
    let mut out = Vec::new();
    for &m in m_values {
        for &n in n_values {
            let c = cfg.with_sizes(m, n);
            let per_rep = replicate(replications, |r| {
                let streams = Streams::new(seed, r);
                let scn = generate_scenario(&c, &mut streams.geometry())?;
                let table = build_pair_table(&scn, &c, &streams)?;
                eps_values
                    .iter()
                    .map(|&eps| {
                        let ce = ScenarioConfig { eps, ..c.clone() };
                        let (_, it) = pair(&table, &ce, &streams, Pairing::Dma)?;
                        let cap = DmaTrace::iteration_cap(&table.payoffs, eps);
                        if it > cap {
                            return Err(Error::Invariant(format!(
                                "DMA iteration cap exceeded: {it} rounds > {cap} (M={m}, N={n}, eps={eps})"
                            )));
                        }
                        Ok(it)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            for (e, &eps) in eps_values.iter().enumerate() {
                out.push(IterationPoint {
                    eps,
                    m,
                    n,
                    iterations: per_rep.iter().map(|r| r[e]).collect(),
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.eps
            .total_cmp(&b.eps)
            .then(a.m.cmp(&b.m))
            .then(a.n.cmp(&b.n))
    });
    Ok(out)
}

pub fn iterations_table(points: &[IterationPoint]) -> Table {
    let mut t = Table::new(
        "iterations-vs-epsilon",
        &["eps", "m", "n", "mean_iterations"],
    );
    for p in points {
        let it = mean(p.iterations.iter().map(|&i| i as f64));
        t.push(vec![p.eps.into(), p.m.into(), p.n.into(), it.into()]);
    }
    t
}

#[derive(Debug, Clone)]
pub struct TimescalePoint {
    pub n: usize,
    pub two: Vec<FrameMetrics>,
    pub one: Vec<FrameMetrics>,
}

pub fn study_timescales(
    cfg: &ScenarioConfig,
    n_values: &[usize],
    replications: usize,
    seed: u64,
) -> Result<Vec<TimescalePoint>> {
    n_values
        .iter()
        .map(|&n| {
            let c = cfg.with_sizes(cfg.m_count, n);
            let reps = replicate(replications, |r| {
                let streams = Streams::new(seed, r);
                let scn = generate_scenario(&c, &mut streams.geometry())?;
                let table = build_pair_table(&scn, &c, &streams)?;
                let (matching, it) = pair(&table, &c, &streams, Pairing::Dma)?;
                let two = realize(&scn, &c, &streams, &table, &matching, it)?;
                let one = run_one_timescale_restricted(&scn, &c, &streams)?;
                Ok((two, one))
            })?;
            let (two, one) = reps.into_iter().unzip();
            Ok(TimescalePoint { n, two, one })
        })
        .collect()
}

pub fn timescale_table(points: &[TimescalePoint]) -> Table {
    let mut t = Table::new(
        "one-timescale-compare",
        &[
            "n",
            "scheme",
            "mean_wsr",
            "outage_pct",
            "csi_count",
            "switch_count",
        ],
    );
    for p in points {
        for (scheme, frames) in [("two_timescale", &p.two), ("one_timescale", &p.one)] {
            t.push(vec![
                p.n.into(),
                scheme.into(),
                mean(frames.iter().map(|f| f.weighted_sum_rate)).into(),
                mean(frames.iter().map(|f| 100.0 * f.outage_fraction())).into(),
                mean(frames.iter().map(FrameMetrics::csi_per_subframe)).into(),
                mean(frames.iter().map(|f| f.switch_count as f64)).into(),
            ]);
        }
    }
    t
}

#[derive(Debug, Clone)]
pub struct MobilityPoint {
    pub speed: f64,
    pub bucket_len: f64,
    /// `buckets[rep][bucket]`
    pub buckets: Vec<Vec<FrameMetrics>>,
}

impl MobilityPoint {
    pub fn bucket_count(&self) -> usize {
        self.buckets.first().map_or(0, Vec::len)
    }

    pub fn bucket_stat(&self, b: usize, f: impl Fn(&FrameMetrics) -> f64) -> Stat {
        Stat::from_samples(&self.buckets.iter().map(|r| f(&r[b])).collect::<Vec<_>>())
    }
}

pub fn study_mobility(
    cfg: &ScenarioConfig,
    mob: &MobilityConfig,
    speeds: &[f64],
    replications: usize,
    seed: u64,
) -> Result<Vec<MobilityPoint>> {
    speeds
        .iter()
        .map(|&speed| {
            let m = MobilityConfig { speed, ..*mob };
            let buckets = replicate(replications, |r| {
                let streams = Streams::new(seed, r);
                let scn = generate_scenario(cfg, &mut streams.geometry())?;
                run_mobility(&scn, cfg, &m, &streams)
            })?;
            Ok(MobilityPoint {
                speed,
                bucket_len: mob.bucket_len,
                buckets,
            })
        })
        .collect()
}

pub fn mobility_table(points: &[MobilityPoint]) -> Table {
    let mut t = Table::new("mobility", &["t_bucket", "speed", "mean_wsr", "outage_pct"]);
    for p in points {
        for b in 0..p.bucket_count() {
            t.push(vec![
                (b as f64 * p.bucket_len).into(),
                p.speed.into(),
                p.bucket_stat(b, |f| f.weighted_sum_rate).mean.into(),
                p.bucket_stat(b, |f| 100.0 * f.outage_fraction())
                    .mean
                    .into(),
            ]);
        }
    }
    t
}

/// Row of the single-run table.
pub fn single_run_row(cfg: &ScenarioConfig, f: &FrameMetrics) -> Vec<Cell> {
    vec![
        cfg.m_count.into(),
        cfg.n_count.into(),
        cfg.eps.into(),
        f.weighted_sum_rate.into(),
        (100.0 * f.outage_fraction()).into(),
        f.eau_cu.into(),
        f.eau_d2d.into(),
        f.pairs.len().into(),
        f.iterations.into(),
        f.csi_per_subframe().into(),
    ]
}

pub const SINGLE_RUN_HEADER: [&str; 10] = [
    "m",
    "n",
    "eps",
    "weighted_sum_rate",
    "outage_pct",
    "eau_cu",
    "eau_d2d",
    "matched",
    "iterations",
    "csi_per_subframe",
];
