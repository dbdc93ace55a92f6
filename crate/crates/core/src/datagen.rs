//! Random game instances, solved and reduced to (MDF, RA, ODF) rows.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{build_game, CardDistribution, GameSpec};
use crate::metrics;
use crate::solver::{solve, SolverConfig};

/// Uniform sample from the (n-1)-simplex: normalized unit-exponential draws.
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CardDistribution {
    assert!(n >= 2, "deck size must be at least 2");
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    CardDistribution::new(draws.into_iter().map(|x| x / total).collect())
        .expect("normalized exponentials form a distribution")
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-game RNG seed. Depends only on its arguments, so games can be
/// generated in any order or chunking.
pub fn derive_seed(master_seed: u64, bet_index: u64, game_index: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ bet_index) ^ game_index)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub games_per_bet_size: usize,
    /// Bet sizes as fractions of the pot.
    pub bet_sizes: Vec<f64>,
    pub n: usize,
    pub pot: f64,
    pub stack: f64,
    pub master_seed: u64,
    pub solver: SolverConfig,
    /// Use the same (p, q) pairs for every bet size instead of fresh ones.
    pub reuse_distributions: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            games_per_bet_size: 5_000,
            bet_sizes: vec![0.5, 0.75, 1.0],
            n: 10,
            pot: 1.0,
            stack: 1.0,
            master_seed: 0,
            solver: SolverConfig::default(),
            reuse_distributions: false,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.games_per_bet_size == 0 {
            return Err(Error::validation("games_per_bet_size", "must be > 0"));
        }
        if self.bet_sizes.is_empty() {
            return Err(Error::validation("bet_sizes", "need at least one bet size"));
        }
        if self.n < 2 {
            return Err(Error::validation("n", format!("deck size {} < 2", self.n)));
        }
        let u = CardDistribution::uniform(self.n)?;
        for &b in &self.bet_sizes {
            GameSpec::single_bet(u.clone(), u.clone(), self.pot, self.stack, b * self.pot)
                .map_err(|e| Error::validation("bet_sizes", e.to_string()))?;
        }
        Ok(())
    }

    pub fn total_games(&self) -> usize {
        self.games_per_bet_size * self.bet_sizes.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub game_id: u64,
    /// Bet as a fraction of the pot.
    pub bet_size: f64,
    pub mdf: f64,
    pub ra: f64,
    pub odf: f64,
    pub exploitability: f64,
    /// Probability that player 1 bets at all, over `p` and the equilibrium.
    pub p1_bet_mass: f64,
    pub p_weights: Vec<f64>,
    pub q_weights: Vec<f64>,
}

impl DatasetRow {
    /// Player 1 (almost) never bets, so player 2's calls are unconstrained.
    pub fn is_off_path(&self) -> bool {
        self.p1_bet_mass < OFF_PATH_BET_MASS
    }
}

pub const OFF_PATH_BET_MASS: f64 = 1e-4;

/// Solve one game and reduce it to a row.
pub fn solve_row(
    game_id: u64,
    p: CardDistribution,
    q: CardDistribution,
    bet_fraction: f64,
    pot: f64,
    stack: f64,
    solver: &SolverConfig,
) -> Result<DatasetRow> {
    let spec = GameSpec::single_bet(p, q, pot, stack, bet_fraction * pot)?;
    let tree = build_game(&spec)?;
    let report = solve(&tree, solver)?;
    let spec = tree.spec();
    Ok(DatasetRow {
        game_id,
        bet_size: bet_fraction,
        mdf: metrics::mdf(pot, bet_fraction * pot)?,
        ra: metrics::range_advantage(&spec.p, &spec.q)?,
        odf: metrics::odf(&tree, &spec.q, &report.profile.p2, 0)?,
        exploitability: report.exploitability,
        p1_bet_mass: report.p1_bet_mass(&tree).clamp(0.0, 1.0),
        p_weights: spec.p.weights().to_vec(),
        q_weights: spec.q.weights().to_vec(),
    })
}

pub fn generate_dataset(config: &GenConfig) -> Result<Vec<DatasetRow>> {
    generate_dataset_with_progress(config, |_| {})
}

/// Like [`generate_dataset`], calling `progress(done)` as games finish. Rows
/// come back ordered by `game_id` whatever the thread count.
pub fn generate_dataset_with_progress(
    config: &GenConfig,
    progress: impl Fn(usize) + Sync,
) -> Result<Vec<DatasetRow>> {
    config.validate()?;
    let per = config.games_per_bet_size;
    let done = AtomicUsize::new(0);
    (0..config.total_games())
        .into_par_iter()
        .map(|idx| {
            let (bet_index, game_index) = (idx / per, idx % per);
            let stream = if config.reuse_distributions {
                0
            } else {
                bet_index
            };
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.master_seed,
                stream as u64,
                game_index as u64,
            ));
            let p = sample_simplex(config.n, &mut rng);
            let q = sample_simplex(config.n, &mut rng);
            let row = solve_row(
                idx as u64,
                p,
                q,
                config.bet_sizes[bet_index],
                config.pot,
                config.stack,
                &config.solver,
            );
            progress(done.fetch_add(1, Ordering::Relaxed) + 1);
            row
        })
        .collect()
}

/// Round to 12 significant digits and print the shortest exact form.
pub fn format_decimal(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}")
        .parse()
        .expect("float formatting parses");
    format!("{rounded}")
}

pub fn csv_header(n: usize) -> String {
    let mut cols: Vec<String> = [
        "game_id",
        "bet_size",
        "mdf",
        "ra",
        "odf",
        "exploitability",
        "p1_bet_mass",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend((1..=n).map(|i| format!("p_{i}")));
    cols.extend((1..=n).map(|i| format!("q_{i}")));
    cols.join(",")
}

pub fn write_csv_to<W: Write>(rows: &[DatasetRow], out: W) -> Result<()> {
    let n = rows.first().map_or(0, |r| r.p_weights.len());
    let mut w = BufWriter::new(out);
    writeln!(w, "{}", csv_header(n))?;
    for row in rows {
        if row.p_weights.len() != n || row.q_weights.len() != n {
            return Err(Error::validation(
                "rows",
                format!("game {} has a different deck size", row.game_id),
            ));
        }
        let mut fields = vec![
            row.game_id.to_string(),
            format_decimal(row.bet_size),
            format_decimal(row.mdf),
            format_decimal(row.ra),
            format_decimal(row.odf),
            format_decimal(row.exploitability),
            format_decimal(row.p1_bet_mass),
        ];
        fields.extend(
            row.p_weights
                .iter()
                .chain(&row.q_weights)
                .map(|&x| format_decimal(x)),
        );
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[DatasetRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_csv_to(rows, File::create(path).map_err(|e| Error::file(path, e))?)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<DatasetRow>> {
    let path = path.as_ref();
    read_csv_from(File::open(path).map_err(|e| Error::file(path, e))?, path)
}

/// Parse a dataset; `path` is only used in error messages.
pub fn read_csv_from<R: Read>(input: R, path: &Path) -> Result<Vec<DatasetRow>> {
    let err = |line: u64, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| err(1, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    let cols = header.split(',').count();
    if cols < 7 + 4 || (cols - 7) % 2 != 0 || header != csv_header((cols - 7) / 2) {
        return Err(err(1, format!("unexpected header `{header}`")));
    }
    let n = (cols - 7) / 2;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    err(
                        line,
                        format!("column {} is not a number: `{}`", i + 1, &record[i]),
                    )
                })
        };
        let game_id = record[0]
            .parse::<u64>()
            .map_err(|_| err(line, format!("bad game_id `{}`", &record[0])))?;
        let vals = (1..cols).map(num).collect::<Result<Vec<f64>>>()?;
        let row = DatasetRow {
            game_id,
            bet_size: vals[0],
            mdf: vals[1],
            ra: vals[2],
            odf: vals[3],
            exploitability: vals[4],
            p1_bet_mass: vals[5],
            p_weights: vals[6..6 + n].to_vec(),
            q_weights: vals[6 + n..].to_vec(),
        };
        check_row(&row).map_err(|reason| err(line, format!("game {game_id}: {reason}")))?;
        rows.push(row);
    }
    Ok(rows)
}

fn check_row(row: &DatasetRow) -> std::result::Result<(), String> {
    if !(row.bet_size > 0.0) {
        return Err(format!("bet_size {} must be > 0", row.bet_size));
    }
    let expected = 1.0 / (1.0 + row.bet_size);
    if (row.mdf - expected).abs() > 1e-9 {
        return Err(format!(
            "mdf {} does not match bet_size {}",
            row.mdf, row.bet_size
        ));
    }
    for (name, v) in [
        ("ra", row.ra),
        ("odf", row.odf),
        ("p1_bet_mass", row.p1_bet_mass),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(format!("{name} {v} outside [0, 1]"));
        }
    }
    for (name, w) in [("p", &row.p_weights), ("q", &row.q_weights)] {
        CardDistribution::new(w.clone()).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_draws_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [2, 3, 10, 50] {
            let d = sample_simplex(n, &mut rng);
            assert_eq!(d.len(), n);
            assert!(d.weights().iter().all(|&w| w >= 0.0));
            assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn simplex_moments_match_flat_dirichlet() {
        let n = 10;
        let draws = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut sum = vec![0.0; n];
        let mut sq = vec![0.0; n];
        for _ in 0..draws {
            for (i, w) in sample_simplex(n, &mut rng).weights().iter().enumerate() {
                sum[i] += w;
                sq[i] += w * w;
            }
        }
        // Dirichlet(1, ..., 1): mean 1/n, variance (n-1) / (n^2 (n+1))
        let var_expected = (n as f64 - 1.0) / ((n * n) as f64 * (n as f64 + 1.0));
        assert!((var_expected - 9.0 / 1100.0).abs() < 1e-15);
        for i in 0..n {
            let mean = sum[i] / draws as f64;
            let var = sq[i] / draws as f64 - mean * mean;
            assert!((mean - 0.1).abs() < 0.005, "mean[{i}] = {mean}");
            assert!((var / var_expected - 1.0).abs() < 0.15, "var[{i}] = {var}");
        }
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, 0, 0), derive_seed(7, 0, 0));
        let seeds: std::collections::HashSet<_> = (0..3)
            .flat_map(|b| (0..1000).map(move |g| derive_seed(7, b, g)))
            .collect();
        assert_eq!(seeds.len(), 3000);
        assert_ne!(derive_seed(7, 1, 0), derive_seed(7, 0, 1));
    }

    #[test]
    fn two_pot_sized_games() {
        let cfg = GenConfig {
            games_per_bet_size: 2,
            bet_sizes: vec![1.0],
            ..Default::default()
        };
        let rows = generate_dataset(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.mdf == 0.5));
        assert_ne!(rows[0].p_weights, rows[1].p_weights);
        assert_ne!(rows[0].p_weights, rows[0].q_weights);
    }

    #[test]
    fn rows_are_ordered_and_sized() {
        let cfg = GenConfig {
            games_per_bet_size: 4,
            ..Default::default()
        };
        let rows = generate_dataset(&cfg).unwrap();
        assert_eq!(rows.len(), 12);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.game_id, i as u64);
            assert_eq!(r.bet_size, cfg.bet_sizes[i / 4]);
            assert!((r.mdf - 1.0 / (1.0 + r.bet_size)).abs() < 1e-12);
            for v in [r.ra, r.odf, r.p1_bet_mass] {
                assert!((0.0..=1.0).contains(&v));
            }
            assert!(r.exploitability <= 1e-3);
        }
    }

    #[test]
    fn reuse_distributions_shares_pairs() {
        let cfg = GenConfig {
            games_per_bet_size: 3,
            bet_sizes: vec![0.5, 1.0],
            reuse_distributions: true,
            ..Default::default()
        };
        let rows = generate_dataset(&cfg).unwrap();
        for g in 0..3 {
            assert_eq!(rows[g].p_weights, rows[g + 3].p_weights);
            assert_eq!(rows[g].q_weights, rows[g + 3].q_weights);
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            GenConfig {
                games_per_bet_size: 0,
                ..Default::default()
            },
            GenConfig {
                bet_sizes: vec![],
                ..Default::default()
            },
            GenConfig {
                bet_sizes: vec![1.5],
                ..Default::default()
            },
            GenConfig {
                bet_sizes: vec![-0.5],
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(
                generate_dataset(&cfg),
                Err(Error::Validation { .. })
            ));
        }
    }

    #[test]
    fn format_decimal_keeps_twelve_digits() {
        assert_eq!(format_decimal(0.5), "0.5");
        assert_eq!(format_decimal(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_decimal(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_decimal(1.234e-7), "0.0000001234");
        assert_eq!(format_decimal(0.0), "0");
    }

    #[test]
    fn header_schema() {
        assert_eq!(
            csv_header(3),
            "game_id,bet_size,mdf,ra,odf,exploitability,p1_bet_mass,p_1,p_2,p_3,q_1,q_2,q_3"
        );
    }
}
