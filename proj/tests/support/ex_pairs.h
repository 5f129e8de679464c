// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace trajsql::testing {

/// (pred, gold) pairs over the shipped fixture databases with verdicts
/// worked out by hand from the fixture rows.
struct ExPair {
  const char* db;
  const char* pred;
  const char* gold;
  bool match;
};

inline const std::vector<ExPair>& hand_checked_ex_pairs() {
  static const std::vector<ExPair> pairs{
      // Alameda has 3 SOC 11 closures in the decade, Kern 2, Fresno 1.
      {"california_schools",
       "SELECT County FROM schools WHERE SOC = 11 AND ClosedDate BETWEEN '1980-01-01' AND '1989-12-31' GROUP BY "
       "County ORDER BY COUNT(ClosedDate) DESC LIMIT 1",
       "SELECT County FROM schools WHERE strftime('%Y', ClosedDate) BETWEEN '1980' AND '1989' AND SOC = 11 GROUP BY "
       "County ORDER BY COUNT(ClosedDate) DESC LIMIT 1",
       true},
      // No Year column: the prediction fails to execute.
      {"california_schools",
       "SELECT County, COUNT(*) AS YearCount FROM schools WHERE Year BETWEEN '1980-01-01' AND '1989-12-31' AND SOC = "
       "11 GROUP BY County ORDER BY YearCount DESC LIMIT 1",
       "SELECT County FROM schools WHERE strftime('%Y', ClosedDate) BETWEEN '1980' AND '1989' AND SOC = 11 GROUP BY "
       "County ORDER BY COUNT(ClosedDate) DESC LIMIT 1",
       false},
      {"california_schools", "SELECT COUNT(*) FROM schools WHERE County = 'Fresno' AND SOC = 62",
       "SELECT COUNT(CDSCode) FROM schools WHERE SOC = 62 AND County = 'Fresno'", true},
      // 2 closed dates against 6 rows.
      {"california_schools", "SELECT COUNT(ClosedDate) FROM schools WHERE County = 'Fresno'",
       "SELECT COUNT(*) FROM schools WHERE County = 'Fresno'", false},
      {"california_schools", "SELECT School FROM schools WHERE StatusType = 'Active' AND County = 'Kern'",
       "SELECT School FROM schools WHERE County = 'Kern' AND ClosedDate IS NULL", true},
      // Oakland three times against once.
      {"california_schools", "SELECT City FROM schools WHERE County = 'Alameda'",
       "SELECT DISTINCT City FROM schools WHERE County = 'Alameda'", false},
      // Gold is ordered, so row order counts.
      {"california_schools", "SELECT County, COUNT(*) FROM schools GROUP BY County ORDER BY County",
       "SELECT County, COUNT(*) FROM schools GROUP BY County ORDER BY County DESC", false},
      {"california_schools", "SELECT County, COUNT(*) FROM schools GROUP BY County ORDER BY County DESC",
       "SELECT County, COUNT(*) FROM schools GROUP BY County", true},
      {"california_schools", "SELECT MIN(OpenDate) FROM schools",
       "SELECT OpenDate FROM schools ORDER BY OpenDate ASC LIMIT 1", true},
      {"movie_platform", "SELECT director FROM movie ORDER BY likes DESC LIMIT 1",
       "SELECT director FROM movie WHERE likes = (SELECT MAX(likes) FROM movie)", true},
      // 25 / 6 both ways.
      {"movie_platform",
       "SELECT SUM(score) * 1.0 / COUNT(*) FROM ratings JOIN movie ON ratings.movie_id = movie.id WHERE "
       "movie.director = 'Nolan'",
       "SELECT AVG(r.score) FROM ratings AS r JOIN movie AS m ON r.movie_id = m.id WHERE m.director = 'Nolan'", true},
      // Integer division gives 4.
      {"movie_platform",
       "SELECT SUM(score) / COUNT(*) FROM ratings JOIN movie ON ratings.movie_id = movie.id WHERE movie.director = "
       "'Nolan'",
       "SELECT AVG(r.score) FROM ratings AS r JOIN movie AS m ON r.movie_id = m.id WHERE m.director = 'Nolan'", false},
      {"movie_platform", "SELECT title FROM movie WHERE release_year < 1990",
       "SELECT title FROM movie WHERE release_year <= 1985", true},
      {"movie_platform", "SELECT title, likes FROM movie WHERE release_year < 1990",
       "SELECT title FROM movie WHERE release_year < 1990", false},
      {"movie_platform", "SELECT user_id FROM users WHERE country_code = 20",
       "SELECT user_id FROM users WHERE country_code = 20 AND gender = 'male'", false},
      {"movie_platform", "SELECT COUNT(*) FROM users WHERE age > 30",
       "SELECT COUNT(user_id) FROM users WHERE age >= 31", true},
      // Counting ratings per gender (6, 4) is not counting users (4, 3).
      {"movie_platform",
       "SELECT u.gender, COUNT(*) FROM users AS u JOIN ratings AS r ON u.user_id = r.user_id GROUP BY u.gender",
       "SELECT gender, COUNT(*) FROM users GROUP BY gender", false},
      // Swapped columns change every row tuple.
      {"retail_complaints",
       "SELECT district.district_id, district.city FROM reviews JOIN district ON reviews.district_id = "
       "district.district_id WHERE reviews.Date = '2018-09-11'",
       "SELECT district.city, district.district_id FROM reviews JOIN district ON reviews.district_id = "
       "district.district_id WHERE reviews.Date = '2018-09-11'",
       false},
      {"retail_complaints", "SELECT COUNT(*) FROM reviews WHERE Stars = 5",
       "SELECT COUNT(review_id) FROM reviews WHERE Stars >= 5", true},
      {"retail_complaints", "SELECT Product FROM reviews WHERE Stars = 5",
       "SELECT DISTINCT Product FROM reviews WHERE Stars = 5", true},
  };
  return pairs;
}

}  // namespace trajsql::testing
