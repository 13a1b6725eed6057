//! Seeded synthetic data: a binary click-prediction stand-in (13 numeric +
//! 26 categorical features by default) and a MovieLens-format corpus writer
//! for desk-scale runs without the real files.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::data::movielens::{AGE_BUCKETS, GENRES, OCCUPATION_COUNT};
use crate::data::{CategoricalFeature, Dataset, Example, FeatureSchema, Label, Provenance, TaskKind};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Binary-task generator. Labels come from a hidden sparse logistic ground
/// truth sampled per seed, so the task is learnable but not separable and the
/// same seed always yields the identical dataset.
pub fn gen_synthetic_binary<T: Scalar>(
    n_rows: usize,
    n_numeric: usize,
    cat_cardinalities: &[usize],
    seed: u64,
) -> Result<Dataset<T>> {
    if n_rows == 0 {
        return Err(Error::Config("synthetic dataset needs n_rows > 0".to_owned()));
    }
    if cat_cardinalities.contains(&0) {
        return Err(Error::Config("categorical cardinalities must be positive".to_owned()));
    }

    // Hidden ground truth: sparse numeric weights plus per-value effects for
    // a random subset of the categorical features.
    let mut truth = Stream::new(seed, "truth");
    let numeric_w: Vec<f64> = (0..n_numeric)
        .map(|_| {
            if truth.next_unit_f64() < 0.6 {
                truth.next_standard_normal()
            } else {
                0.0
            }
        })
        .collect();
    let cat_effects: Vec<Vec<f64>> = cat_cardinalities
        .iter()
        .map(|&card| {
            let live = truth.next_unit_f64() < 0.5;
            (0..card)
                .map(|_| {
                    let e = truth.next_standard_normal() * 0.8;
                    if live {
                        e
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let logit_scale = 1.5 / (1.0 + n_numeric as f64).sqrt();

    let mut feat = Stream::new(seed, "features");
    let mut labels = Stream::new(seed, "labels");
    let mut rows = Vec::with_capacity(n_rows);
    for row_id in 0..n_rows {
        let numeric_f64: Vec<f64> = (0..n_numeric).map(|_| feat.next_standard_normal()).collect();
        let categorical: Vec<usize> = cat_cardinalities
            .iter()
            .map(|&card| feat.next_below(card as u64) as usize)
            .collect();

        let mut logit = 0.0;
        for (x, w) in numeric_f64.iter().zip(&numeric_w) {
            logit += x * w;
        }
        for (id, effects) in categorical.iter().zip(&cat_effects) {
            logit += effects[*id];
        }
        logit *= logit_scale;
        let label = if labels.next_unit_f64() < sigmoid(logit) {
            T::one()
        } else {
            T::zero()
        };

        rows.push(Example {
            row_id: row_id as u64,
            categorical,
            numeric: numeric_f64.iter().map(|v| T::from_f64_lossy(*v)).collect(),
            label: Label::Value(label),
        });
    }

    let schema = FeatureSchema {
        categorical: cat_cardinalities
            .iter()
            .enumerate()
            .map(|(i, &card)| CategoricalFeature {
                name: format!("cat{i:02}"),
                vocab: card,
            })
            .collect(),
        numeric: n_numeric,
        task: TaskKind::Binary,
    };
    Dataset::new(
        schema,
        rows,
        Provenance {
            source: format!("synthetic-binary:seed={seed}"),
            split_name: "full".to_owned(),
            parent_seed: Some(seed),
        },
    )
}

/// Default shape matching the click-prediction stand-in: 13 numeric features
/// and 26 categorical features of the given uniform cardinality.
pub fn default_cat_cardinalities(card: usize) -> Vec<usize> {
    vec![card; 26]
}

/// Paths of a generated MovieLens-format corpus.
#[derive(Debug, Clone)]
pub struct MovielensPaths {
    pub ratings: PathBuf,
    pub users: PathBuf,
    pub movies: PathBuf,
}

/// Write a MovieLens-format corpus (`ratings.dat`, `users.dat`, `movies.dat`)
/// generated from a latent user/movie model with popularity skew and
/// per-user noise levels. Ratings are integers in 1..=5.
pub fn write_movielens_like(
    dir: &Path,
    n_users: usize,
    n_movies: usize,
    n_ratings: usize,
    seed: u64,
) -> Result<MovielensPaths> {
    if n_users == 0 || n_movies == 0 || n_ratings == 0 {
        return Err(Error::Config("movielens-like generator needs positive sizes".to_owned()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let paths = MovielensPaths {
        ratings: dir.join("ratings.dat"),
        users: dir.join("users.dat"),
        movies: dir.join("movies.dat"),
    };

    const LATENT_DIM: usize = 4;
    let mut gen = Stream::new(seed, "ml-like/latent");

    struct User {
        gender: char,
        age: u32,
        occupation: usize,
        bias: f64,
        factors: [f64; LATENT_DIM],
        noise: f64,
    }
    let users: Vec<User> = (0..n_users)
        .map(|_| {
            let mut factors = [0.0; LATENT_DIM];
            for f in &mut factors {
                *f = gen.next_standard_normal() * 0.4;
            }
            User {
                gender: if gen.next_unit_f64() < 0.5 { 'F' } else { 'M' },
                age: AGE_BUCKETS[gen.next_below(AGE_BUCKETS.len() as u64) as usize],
                occupation: gen.next_below(OCCUPATION_COUNT as u64) as usize,
                bias: gen.next_standard_normal() * 0.45,
                factors,
                noise: 0.25 + 1.05 * gen.next_unit_f64(),
            }
        })
        .collect();

    // Some genres are consistently rated, others polarize; the per-genre
    // noise factor makes rating consistency visible from the genre inputs.
    let genre_noise: Vec<f64> = (0..GENRES.len())
        .map(|_| 0.55 + 1.25 * gen.next_unit_f64())
        .collect();

    struct Movie {
        genres: Vec<usize>,
        bias: f64,
        factors: [f64; LATENT_DIM],
        noise_factor: f64,
    }
    let movies: Vec<Movie> = (0..n_movies)
        .map(|_| {
            let n_genres = 1 + gen.next_below(3) as usize;
            let mut genres: Vec<usize> = Vec::new();
            while genres.len() < n_genres {
                let g = gen.next_below(GENRES.len() as u64) as usize;
                if !genres.contains(&g) {
                    genres.push(g);
                }
            }
            genres.sort_unstable();
            let mut factors = [0.0; LATENT_DIM];
            for f in &mut factors {
                *f = gen.next_standard_normal() * 0.4;
            }
            let noise_factor =
                genres.iter().map(|&g| genre_noise[g]).sum::<f64>() / genres.len() as f64;
            Movie {
                genres,
                bias: gen.next_standard_normal() * 0.45,
                factors,
                noise_factor,
            }
        })
        .collect();

    // Popularity skew: cumulative weights ~ 1/(rank+1)^0.8.
    let cumw = |n: usize| -> Vec<f64> {
        let mut acc = 0.0;
        (0..n)
            .map(|i| {
                acc += 1.0 / ((i + 1) as f64).powf(1.05);
                acc
            })
            .collect()
    };
    let user_cum = cumw(n_users);
    let movie_cum = cumw(n_movies);
    let draw_skewed = |cum: &[f64], u: f64| -> usize {
        let target = u * cum[cum.len() - 1];
        cum.partition_point(|&c| c < target).min(cum.len() - 1)
    };

    let write_err = |p: &Path, e: std::io::Error| Error::io(p.display().to_string(), e);

    let mut f = std::io::BufWriter::new(
        std::fs::File::create(&paths.users).map_err(|e| write_err(&paths.users, e))?,
    );
    for (i, u) in users.iter().enumerate() {
        writeln!(f, "{}::{}::{}::{}::00000", i + 1, u.gender, u.age, u.occupation)
            .map_err(|e| write_err(&paths.users, e))?;
    }
    f.flush().map_err(|e| write_err(&paths.users, e))?;

    let mut f = std::io::BufWriter::new(
        std::fs::File::create(&paths.movies).map_err(|e| write_err(&paths.movies, e))?,
    );
    for (i, m) in movies.iter().enumerate() {
        let genres: Vec<&str> = m.genres.iter().map(|&g| GENRES[g]).collect();
        writeln!(f, "{}::Movie {} (1995)::{}", i + 1, i + 1, genres.join("|"))
            .map_err(|e| write_err(&paths.movies, e))?;
    }
    f.flush().map_err(|e| write_err(&paths.movies, e))?;

    let mut draw = Stream::new(seed, "ml-like/ratings");
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(&paths.ratings).map_err(|e| write_err(&paths.ratings, e))?,
    );
    for t in 0..n_ratings {
        let ui = draw_skewed(&user_cum, draw.next_unit_f64());
        let mi = draw_skewed(&movie_cum, draw.next_unit_f64());
        let (u, m) = (&users[ui], &movies[mi]);
        let mut score = 3.55 + u.bias + m.bias;
        for d in 0..LATENT_DIM {
            score += u.factors[d] * m.factors[d] * 1.4;
        }
        // Mild genre affinity tied to user factors keeps genres informative.
        for &g in &m.genres {
            score += u.factors[g % LATENT_DIM] * 0.18;
        }
        score += draw.next_standard_normal() * u.noise * m.noise_factor;
        let rating = (score.round() as i64).clamp(1, 5);
        writeln!(f, "{}::{}::{}::{}", ui + 1, mi + 1, rating, 978_000_000 + t)
            .map_err(|e| write_err(&paths.ratings, e))?;
    }
    f.flush().map_err(|e| write_err(&paths.ratings, e))?;

    Ok(paths)
}
