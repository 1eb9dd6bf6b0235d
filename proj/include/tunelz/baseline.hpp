#pragma once

// Random-string baseline: how much a coder "compresses" text with no
// structure at all, as a function of length. Used to remove the length
// dependence from ratios of tunes of different lengths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunelz/lz.hpp"

namespace tunelz::baseline {

struct CurvePoint {
  std::size_t length;
  double mean_ratio;
  double std_dev;
};

struct BaselineCurve {
  std::size_t alphabet_size = 13;
  std::size_t samples_per_length = 1000;
  std::uint64_t rng_seed = 0;
  lz::Algorithm algorithm = lz::Algorithm::lz77;
  std::vector<CurvePoint> points;  // strictly increasing length

  std::size_t min_length() const { return points.empty() ? 0 : points.front().length; }
  std::size_t max_length() const { return points.empty() ? 0 : points.back().length; }
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the `index`-th sample at `length`; independent of evaluation order.
constexpr std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t length, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ length) ^ index);
}

// Unbiased draw in [0, bound) by rejection, so streams are identical on every
// standard library.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

inline std::string random_string(std::uint64_t seed, std::size_t length, std::size_t alphabet_size) {
  std::mt19937_64 rng(seed);
  std::string s(length, 'a');
  for (auto& c : s) c = static_cast<char>('a' + draw_below(rng, alphabet_size));
  return s;
}

inline CurvePoint sample_length(std::size_t length, std::size_t alphabet_size, std::size_t samples,
                                std::uint64_t seed, lz::Algorithm algo) {
  std::vector<double> ratios(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto s = random_string(sample_seed(seed, length, i), length, alphabet_size);
    ratios[i] = lz::compression_ratio(lz::compress(algo, s));
  }
  double sum = 0.0;
  for (double r : ratios) sum += r;
  const double mean = sum / static_cast<double>(samples);
  double ss = 0.0;
  for (double r : ratios) ss += (r - mean) * (r - mean);
  const double sd = samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1)) : 0.0;
  return {length, mean, sd};
}

}  // namespace detail

/// Mean and sample standard deviation of the compression ratio of `samples`
/// uniform random strings at each length. Lengths are evaluated in parallel;
/// the result depends only on the arguments.
inline BaselineCurve estimate_baseline(std::span<const std::size_t> lengths, std::size_t alphabet_size,
                                       std::size_t samples, std::uint64_t seed,
                                       lz::Algorithm algo = lz::Algorithm::lz77) {
  if (lengths.empty()) throw std::invalid_argument("baseline: no lengths given");
  if (alphabet_size < 1 || alphabet_size > 26) throw std::invalid_argument("baseline: alphabet size must be in 1..26");
  if (samples < 1) throw std::invalid_argument("baseline: need at least one sample per length");
  std::vector<std::size_t> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.front() < 1) throw std::invalid_argument("baseline: lengths must be >= 1");

  std::vector<std::future<CurvePoint>> jobs;
  jobs.reserve(sorted.size());
  for (auto len : sorted) {
    jobs.push_back(std::async(std::launch::async, detail::sample_length, len, alphabet_size, samples, seed, algo));
  }
  BaselineCurve curve{alphabet_size, samples, seed, algo, {}};
  for (auto& j : jobs) curve.points.push_back(j.get());
  return curve;
}

/// Mean ratio at `length`: exact when sampled, else linear interpolation
/// between the bracketing points. Never extrapolates.
inline double baseline_at(const BaselineCurve& curve, std::size_t length) {
  if (curve.points.empty() || length < curve.min_length() || length > curve.max_length()) {
    throw std::out_of_range("baseline: length " + std::to_string(length) + " outside sampled span [" +
                            std::to_string(curve.min_length()) + ", " + std::to_string(curve.max_length()) + "]");
  }
  auto hi = std::lower_bound(curve.points.begin(), curve.points.end(), length,
                             [](const CurvePoint& p, std::size_t l) { return p.length < l; });
  if (hi->length == length) return hi->mean_ratio;
  auto lo = std::prev(hi);
  const double t = static_cast<double>(length - lo->length) / static_cast<double>(hi->length - lo->length);
  return lo->mean_ratio + t * (hi->mean_ratio - lo->mean_ratio);
}

/// The ratio a tune of `own_length` would be expected to show at
/// `reference_length`: raw * baseline(reference) / baseline(own).
inline double normalize_ratio(double raw_ratio, std::size_t own_length, std::size_t reference_length,
                              const BaselineCurve& curve) {
  return raw_ratio * (baseline_at(curve, reference_length) / baseline_at(curve, own_length));
}

inline nlohmann::json to_json(const BaselineCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"length", p.length}, {"mean_ratio", p.mean_ratio}, {"std_dev", p.std_dev}});
  }
  return {{"alphabet_size", curve.alphabet_size},
          {"samples", curve.samples_per_length},
          {"seed", curve.rng_seed},
          {"algorithm", std::string(lz::to_string(curve.algorithm))},
          {"points", std::move(points)}};
}

inline BaselineCurve curve_from_json(const nlohmann::json& j) {
  BaselineCurve curve;
  try {
    curve.alphabet_size = j.at("alphabet_size").get<std::size_t>();
    curve.samples_per_length = j.at("samples").get<std::size_t>();
    curve.rng_seed = j.at("seed").get<std::uint64_t>();
    curve.algorithm = lz::algorithm_from_string(j.value("algorithm", std::string("lz77")));
    for (const auto& p : j.at("points")) {
      curve.points.push_back({p.at("length").get<std::size_t>(), p.at("mean_ratio").get<double>(),
                              p.value("std_dev", 0.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed baseline curve JSON: ") + e.what());
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (curve.points[i].length <= curve.points[i - 1].length) {
      throw std::invalid_argument("baseline curve points must have strictly increasing lengths");
    }
  }
  return curve;
}

/// Two-column CSV for plotting.
inline std::string to_csv(const BaselineCurve& curve) {
  std::ostringstream os;
  os << "length,mean_ratio\n";
  os.precision(6);
  os << std::fixed;
  for (const auto& p : curve.points) os << p.length << ',' << p.mean_ratio << '\n';
  return os.str();
}

}  // namespace tunelz::baseline
