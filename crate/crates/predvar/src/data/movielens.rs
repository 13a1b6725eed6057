//! MovieLens ml-1m ingestion ("::"-separated `ratings.dat`, `users.dat`,
//! `movies.dat`).
//!
//! One example per rating, in file order. Categorical features: user id,
//! gender, age bucket, occupation, movie id (all ids remapped densely from
//! the file vocabularies). Genres become an 18-slot multi-hot numeric vector.
//! Titles are not ingested.

use std::collections::HashMap;
use std::path::Path;

use crate::data::{CategoricalFeature, Dataset, Example, FeatureSchema, Label, Provenance, TaskKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Canonical ml-1m genre list, in multi-hot slot order.
pub const GENRES: [&str; 18] = [
    "Action",
    "Adventure",
    "Animation",
    "Children's",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

/// Age buckets as they appear in users.dat.
pub const AGE_BUCKETS: [u32; 7] = [1, 18, 25, 35, 45, 50, 56];

pub const OCCUPATION_COUNT: usize = 21;

struct UserRecord {
    gender: usize,
    age: usize,
    occupation: usize,
}

struct MovieRecord {
    genres: Vec<usize>,
}

fn read_lossy(path: &Path) -> Result<String> {
    // ml-1m files are Latin-1; titles may hold non-UTF8 bytes we never use.
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Load the three ml-1m files into one regression dataset (rating 1..5 as the
/// label). Use [`Dataset::to_task`] for the multi-class view.
pub fn load_movielens<T: Scalar>(
    ratings_path: &Path,
    users_path: &Path,
    movies_path: &Path,
) -> Result<Dataset<T>> {
    let genre_slot: HashMap<&str, usize> =
        GENRES.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let age_id: HashMap<u32, usize> =
        AGE_BUCKETS.iter().enumerate().map(|(i, a)| (*a, i)).collect();

    // users.dat: UserID::Gender::Age::Occupation::Zip-code
    let mut users: HashMap<u64, UserRecord> = HashMap::new();
    let mut user_dense: HashMap<u64, usize> = HashMap::new();
    let users_text = read_lossy(users_path)?;
    for (lineno, line) in users_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 5 {
            return Err(parse_err(users_path, lineno + 1, "expected 5 \"::\" fields"));
        }
        let raw_id: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(users_path, lineno + 1, "bad user id"))?;
        let gender = match fields[1] {
            "F" => 0,
            "M" => 1,
            other => return Err(parse_err(users_path, lineno + 1, format!("bad gender {other:?}"))),
        };
        let age_raw: u32 = fields[2]
            .parse()
            .map_err(|_| parse_err(users_path, lineno + 1, "bad age"))?;
        let age = *age_id
            .get(&age_raw)
            .ok_or_else(|| parse_err(users_path, lineno + 1, format!("unknown age bucket {age_raw}")))?;
        let occupation: usize = fields[3]
            .parse()
            .map_err(|_| parse_err(users_path, lineno + 1, "bad occupation"))?;
        if occupation >= OCCUPATION_COUNT {
            return Err(parse_err(
                users_path,
                lineno + 1,
                format!("occupation {occupation} out of range"),
            ));
        }
        let dense = user_dense.len();
        if user_dense.insert(raw_id, dense).is_some() {
            return Err(parse_err(users_path, lineno + 1, format!("duplicate user id {raw_id}")));
        }
        users.insert(
            raw_id,
            UserRecord {
                gender,
                age,
                occupation,
            },
        );
    }

    // movies.dat: MovieID::Title::Genres (genres "|"-separated)
    let mut movies: HashMap<u64, MovieRecord> = HashMap::new();
    let mut movie_dense: HashMap<u64, usize> = HashMap::new();
    let movies_text = read_lossy(movies_path)?;
    for (lineno, line) in movies_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(3, "::").collect();
        if fields.len() != 3 {
            return Err(parse_err(movies_path, lineno + 1, "expected 3 \"::\" fields"));
        }
        let raw_id: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(movies_path, lineno + 1, "bad movie id"))?;
        let mut genres = Vec::new();
        for token in fields[2].split('|') {
            let slot = *genre_slot.get(token).ok_or_else(|| {
                parse_err(movies_path, lineno + 1, format!("unknown genre token {token:?}"))
            })?;
            genres.push(slot);
        }
        let dense = movie_dense.len();
        if movie_dense.insert(raw_id, dense).is_some() {
            return Err(parse_err(movies_path, lineno + 1, format!("duplicate movie id {raw_id}")));
        }
        movies.insert(raw_id, MovieRecord { genres });
    }

    let schema = FeatureSchema {
        categorical: vec![
            CategoricalFeature {
                name: "user_id".to_owned(),
                vocab: user_dense.len(),
            },
            CategoricalFeature {
                name: "gender".to_owned(),
                vocab: 2,
            },
            CategoricalFeature {
                name: "age".to_owned(),
                vocab: AGE_BUCKETS.len(),
            },
            CategoricalFeature {
                name: "occupation".to_owned(),
                vocab: OCCUPATION_COUNT,
            },
            CategoricalFeature {
                name: "movie_id".to_owned(),
                vocab: movie_dense.len(),
            },
        ],
        numeric: GENRES.len(),
        task: TaskKind::Regression,
    };

    // ratings.dat: UserID::MovieID::Rating::Timestamp, row order = file order.
    let ratings_text = read_lossy(ratings_path)?;
    let mut rows = Vec::new();
    for (lineno, line) in ratings_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 4 {
            return Err(parse_err(ratings_path, lineno + 1, "expected 4 \"::\" fields"));
        }
        let user_raw: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(ratings_path, lineno + 1, "bad user id"))?;
        let movie_raw: u64 = fields[1]
            .parse()
            .map_err(|_| parse_err(ratings_path, lineno + 1, "bad movie id"))?;
        let rating: u32 = fields[2]
            .parse()
            .map_err(|_| parse_err(ratings_path, lineno + 1, "bad rating"))?;
        if !(1..=5).contains(&rating) {
            return Err(parse_err(ratings_path, lineno + 1, format!("rating {rating} not in 1..=5")));
        }
        let user = users
            .get(&user_raw)
            .ok_or_else(|| parse_err(ratings_path, lineno + 1, format!("unknown user {user_raw}")))?;
        let movie = movies
            .get(&movie_raw)
            .ok_or_else(|| parse_err(ratings_path, lineno + 1, format!("unknown movie {movie_raw}")))?;

        let mut genres_hot = vec![T::zero(); GENRES.len()];
        for &slot in &movie.genres {
            genres_hot[slot] = T::one();
        }
        rows.push(Example {
            row_id: rows.len() as u64,
            categorical: vec![
                user_dense[&user_raw],
                user.gender,
                user.age,
                user.occupation,
                movie_dense[&movie_raw],
            ],
            numeric: genres_hot,
            label: Label::Value(T::from_f64_lossy(f64::from(rating))),
        });
    }

    Dataset::new(
        schema,
        rows,
        Provenance {
            source: format!("movielens:{}", ratings_path.display()),
            split_name: "full".to_owned(),
            parent_seed: None,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_fixture(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf, std::path::PathBuf) {
        let ratings = dir.join("ratings.dat");
        let users = dir.join("users.dat");
        let movies = dir.join("movies.dat");
        let mut f = std::fs::File::create(&users).unwrap();
        writeln!(f, "1::F::1::10::48067").unwrap();
        writeln!(f, "2::M::56::16::70072").unwrap();
        let mut f = std::fs::File::create(&movies).unwrap();
        writeln!(f, "1::Toy Story (1995)::Animation|Children's|Comedy").unwrap();
        writeln!(f, "2::Jumanji (1995)::Adventure|Children's|Fantasy").unwrap();
        writeln!(f, "3::Heat (1995)::Action|Crime|Thriller").unwrap();
        let mut f = std::fs::File::create(&ratings).unwrap();
        writeln!(f, "1::1::5::978300760").unwrap();
        writeln!(f, "2::3::4::978302109").unwrap();
        writeln!(f, "1::2::3::978301968").unwrap();
        (ratings, users, movies)
    }

    #[test]
    fn fixture_preserves_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let (r, u, m) = write_fixture(dir.path());
        let ds: Dataset<f64> = load_movielens(&r, &u, &m).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.row_ids(), vec![0, 1, 2]);
        assert_eq!(ds.rows[0].label, Label::Value(5.0));
        assert_eq!(ds.rows[1].label, Label::Value(4.0));
        // second rating is user 2 (dense 1) on movie 3 (dense 2)
        assert_eq!(ds.rows[1].categorical, vec![1, 1, 6, 16, 2]);
    }

    #[test]
    fn genres_multi_hot() {
        let dir = tempfile::tempdir().unwrap();
        let (r, u, m) = write_fixture(dir.path());
        let ds: Dataset<f64> = load_movielens(&r, &u, &m).unwrap();
        // Toy Story: Animation, Children's, Comedy -> exactly 3 ones
        let ones: f64 = ds.rows[0].numeric.iter().sum();
        assert_eq!(ones, 3.0);
        assert_eq!(ds.rows[0].numeric[2], 1.0); // Animation slot
    }

    #[test]
    fn two_genre_movie_has_two_ones() {
        let dir = tempfile::tempdir().unwrap();
        let users = dir.path().join("users.dat");
        let movies = dir.path().join("movies.dat");
        let ratings = dir.path().join("ratings.dat");
        std::fs::write(&users, "1::M::25::0::00000\n").unwrap();
        std::fs::write(&movies, "7::Some Film (1999)::Comedy|Drama\n").unwrap();
        std::fs::write(&ratings, "1::7::2::978300000\n").unwrap();
        let ds: Dataset<f64> = load_movielens(&ratings, &users, &movies).unwrap();
        let ones: f64 = ds.rows[0].numeric.iter().sum();
        assert_eq!(ones, 2.0);
    }

    #[test]
    fn unknown_genre_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let users = dir.path().join("users.dat");
        let movies = dir.path().join("movies.dat");
        let ratings = dir.path().join("ratings.dat");
        std::fs::write(&users, "1::M::25::0::00000\n").unwrap();
        std::fs::write(&movies, "7::Some Film (1999)::Dramedy\n").unwrap();
        std::fs::write(&ratings, "1::7::2::978300000\n").unwrap();
        let got = load_movielens::<f64>(&ratings, &users, &movies);
        assert!(matches!(got, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let users = dir.path().join("users.dat");
        let movies = dir.path().join("movies.dat");
        let ratings = dir.path().join("ratings.dat");
        std::fs::write(&users, "1::M::25::0::00000\n").unwrap();
        std::fs::write(&movies, "7::Film (1999)::Comedy\n").unwrap();
        std::fs::write(&ratings, "1::7::2::978300000\n1::7::oops\n").unwrap();
        match load_movielens::<f64>(&ratings, &users, &movies) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
