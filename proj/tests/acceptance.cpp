// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. Optional arguments name ABC files or JSON dumps
// of standard-length reels for criterion 6; the bundled samples are used
// otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support/golden.hpp"
#include "support/properties.hpp"
#include "test_paths.hpp"
#include "tunelz/tunelz.hpp"

using namespace tunelz;

namespace {

// Tolerances.
constexpr double ratio_exact_tol = 1e-9;
constexpr double baseline_tol = 0.03;
constexpr std::size_t baseline_samples = 1000;
constexpr std::uint64_t baseline_seed = 7;
constexpr double normalize_tol = 0.01;
constexpr double law_rel_tol = 1e-12;
constexpr int round_trip_trials = 10000;
constexpr int oracle_trials = 3000;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (!pass) detail << "; ";
    else detail.str("");
    pass = false;
    detail << why;
  }
};

// Positions where `decoded` differs from `expected`, for diagnostics.
std::string diff_positions(std::string_view decoded, std::string_view expected) {
  std::ostringstream os;
  if (decoded.size() != expected.size()) os << "length " << decoded.size() << " vs " << expected.size() << "; ";
  int shown = 0;
  for (std::size_t i = 0; i < std::min(decoded.size(), expected.size()); ++i) {
    if (decoded[i] != expected[i]) {
      if (shown++) os << ", ";
      os << "@" << i << " table " << decoded[i] << " vs sequence " << expected[i];
    }
  }
  return shown ? os.str() : os.str() + "no symbol differences";
}

Outcome lz78_table() {
  Outcome o;
  const auto s = lz::compress_lz78(golden::sally_gardens);
  const auto& toks = s.lz78();
  if (toks.size() != golden::sally_lz78.size()) {
    o.fail("token count " + std::to_string(toks.size()) + ", table has " + std::to_string(golden::sally_lz78.size()));
  }
  std::size_t cumulative = 0;
  std::vector<std::size_t> phrase_len{0};
  for (std::size_t i = 0; i < std::min(toks.size(), golden::sally_lz78.size()); ++i) {
    const auto& row = golden::sally_lz78[i];
    cumulative += phrase_len[toks[i].prefix] + (toks[i].extension ? 1 : 0);
    if (toks[i].extension) phrase_len.push_back(phrase_len[toks[i].prefix] + 1);
    if (toks[i].prefix != row.prefix || toks[i].extension != row.extension || cumulative != row.cumulative) {
      std::ostringstream os;
      os << "first mismatch at token " << i + 1 << ": got " << lz::to_text(toks[i]) << " (ends at " << cumulative
         << "), table " << row.prefix << row.extension << " (ends at " << row.cumulative << ")";
      o.fail(os.str());
      break;
    }
  }
  // Decode the reference table on its own to locate the disagreement.
  std::vector<lz::Lz78Token<char>> reference;
  for (const auto& row : golden::sally_lz78) reference.push_back({row.prefix, row.extension});
  const lz::TokenStream<char> table{reference, 128};
  try {
    const auto decoded = lz::decompress_string(table);
    if (decoded != golden::sally_gardens) o.fail("reference table decodes to a different sequence: " + diff_positions(decoded, golden::sally_gardens));
  } catch (const std::exception& e) {
    o.fail(std::string("reference table does not decode: ") + e.what());
  }
  if (o.pass) o.detail << "56 tokens, ratio 128/56";
  return o;
}

Outcome lz77_table() {
  Outcome o;
  const auto s = lz::compress_lz77(golden::sally_gardens);
  const auto& toks = s.lz77();
  if (toks.size() != golden::sally_lz77.size()) {
    o.fail("token count " + std::to_string(toks.size()) + ", table has " + std::to_string(golden::sally_lz77.size()));
  }
  std::vector<lz::Lz77Token<char>> reference;
  for (const auto& row : golden::sally_lz77) {
    if (row.literal != '\0') reference.emplace_back(lz::Literal<char>{row.literal});
    else reference.emplace_back(lz::BackRef{row.position - 1, row.length});
  }
  for (std::size_t i = 0; i < std::min(toks.size(), reference.size()); ++i) {
    if (toks[i] != reference[i]) {
      o.fail("first mismatch at token " + std::to_string(i + 1) + ": got " + lz::to_text(toks[i]) + ", table " +
             lz::to_text(reference[i]) + " (0-based)");
      break;
    }
  }
  try {
    const auto decoded = lz::decompress_string(lz::TokenStream<char>{reference, 128});
    if (decoded != golden::sally_gardens) o.fail("reference table decodes to a different sequence: " + diff_positions(decoded, golden::sally_gardens));
  } catch (const std::exception& e) {
    o.fail(std::string("reference table does not decode: ") + e.what());
  }
  if (o.pass) o.detail << "48 tokens, ratio 128/48";
  return o;
}

Outcome extremes() {
  Outcome o;
  const auto c = lz::compress_lz77(golden::concertina_reel);
  if (c.token_count() != 26) o.fail("Concertina Reel: " + std::to_string(c.token_count()) + " tokens");
  if (lz::to_text(c) != golden::concertina_lz77) o.fail("Concertina Reel stream differs: " + lz::to_text(c));
  const double rc = lz::compression_ratio(c);
  if (std::abs(rc - 128.0 / 26.0) > ratio_exact_tol || std::abs(rc - 4.9231) > 1e-4) o.fail("Concertina ratio " + std::to_string(rc));
  const auto s = lz::compress_lz77(golden::star_of_munster);
  if (s.token_count() != 64) o.fail("Star of Munster: " + std::to_string(s.token_count()) + " tokens");
  if (lz::to_text(s) != golden::star_of_munster_lz77) o.fail("Star of Munster stream differs");
  if (lz::compression_ratio_exact(s) != Rational(2)) o.fail("Star ratio " + lz::compression_ratio_exact(s).str());
  if (o.pass) o.detail << "26 tokens (" << rc << "), 64 tokens (2)";
  return o;
}

Outcome baseline_means() {
  Outcome o;
  std::vector<std::size_t> lengths;
  for (const auto& [len, _] : golden::baseline_means) lengths.push_back(len);
  const auto curve = baseline::estimate_baseline(lengths, 13, baseline_samples, baseline_seed);
  for (const auto& [len, target] : golden::baseline_means) {
    const double got = baseline::baseline_at(curve, len);
    o.detail << (o.detail.tellp() > 0 ? " " : "") << len << ":" << std::fixed;
    o.detail.precision(3);
    o.detail << got;
    if (std::abs(got - target) > baseline_tol) {
      std::ostringstream os;
      os << "length " << len << " mean " << got << ", expected " << target << " +- " << baseline_tol;
      o.fail(os.str());
    }
  }
  return o;
}

Outcome normalization_formula() {
  Outcome o;
  baseline::BaselineCurve curve;
  curve.points = {{96, 1.23, 0.0}, {128, 1.29, 0.0}};
  const double got = baseline::normalize_ratio(2.61, 96, 128, curve);
  o.detail << got;
  if (std::abs(got - 2.73) > normalize_tol) o.fail("normalize_ratio(2.61, 96, 128) = " + std::to_string(got));
  return o;
}

std::vector<corpus::TuneRecord> reel_records(const std::vector<std::string>& args) {
  std::vector<corpus::TuneRecord> recs;
  auto add = [&](const std::filesystem::path& p) {
    auto more = p.extension() == ".json" ? corpus::ingest_json_dump(p)
                                         : corpus::records_from_abc(corpus::detail::read_file(p), p.filename().string());
    recs.insert(recs.end(), more.begin(), more.end());
  };
  if (args.empty()) {
    for (const auto* name : {"sally_gardens.abc", "concertina_reel.abc", "star_of_munster.abc", "session_dump.json"}) {
      add(test_paths::tune(name));
    }
  } else {
    for (const auto& a : args) add(a);
  }
  return recs;
}

Outcome corpus_properties(const std::vector<std::string>& args) {
  Outcome o;
  auto run_once = [&] {
    const auto recs = reel_records(args);
    return corpus::analyze(recs);
  };
  const auto first = run_once();
  std::vector<corpus::ComplexityReport> reels;
  for (const auto& r : first.reports) {
    if (r.category == Category::reel) reels.push_back(r);
  }
  if (reels.empty()) {
    o.fail("no standard-length reels in the input");
    return o;
  }
  for (const auto& r : reels) {
    if (r.length != abc::reel_length) o.fail(r.id + " has length " + std::to_string(r.length));
    if (r.exact_ratio_lz77() != Rational(128, static_cast<std::int64_t>(r.lz77_tokens))) o.fail(r.id + " LZ77 ratio not 128/tokens");
    if (r.ratio_lz77 != 128.0 / static_cast<double>(r.lz77_tokens)) o.fail(r.id + " LZ77 ratio rounding");
    if (r.ratio_lz78 != 128.0 / static_cast<double>(r.lz78_tokens)) o.fail(r.id + " LZ78 ratio rounding");
  }
  const auto st = corpus::aggregate(reels, Category::reel, 20);
  if (!(st.min.ratio <= st.mean_ratio && st.mean_ratio <= st.max.ratio)) o.fail("mean outside [min, max]");
  if (st.histogram.counts.size() != 20 || st.histogram.bin_count != 20) o.fail("histogram does not have 20 bins");
  std::size_t mass = 0;
  for (auto c : st.histogram.counts) mass += c;
  if (mass != st.count || st.count != reels.size()) o.fail("histogram mass " + std::to_string(mass) + " vs " + std::to_string(reels.size()));
  for (int rep = 0; rep < 3; ++rep) {
    const auto again = run_once();
    std::vector<corpus::ComplexityReport> r2;
    for (const auto& r : again.reports) {
      if (r.category == Category::reel) r2.push_back(r);
    }
    const auto st2 = corpus::aggregate(r2, Category::reel, 20);
    if (corpus::to_json(st2) != corpus::to_json(st) || corpus::reports_to_csv(r2) != corpus::reports_to_csv(reels)) {
      o.fail("repeated run differs");
      break;
    }
  }
  if (o.pass) {
    o.detail << st.count << " reels, mean " << st.mean_ratio << " in [" << st.min.ratio << ", " << st.max.ratio << "]";
  }
  return o;
}

Outcome property_suites() {
  Outcome o;
  auto check = [&](const char* what, const std::string& r) {
    if (!r.empty()) o.fail(std::string(what) + ": " + r);
  };
  check("round trip", props::check_round_trip(101, round_trip_trials, 512));
  check("oracle", props::check_oracle_agreement(202, oracle_trials, 256));
  check("lz78 dictionary", props::check_lz78_dictionary(303, 2000));

  // Normalization laws on a sampled curve.
  std::vector<std::size_t> lengths{20, 50, 96, 128, 200};
  const auto curve = baseline::estimate_baseline(lengths, 13, 50, 11);
  props::Gen g(404);
  for (int t = 0; t < 10000 && o.pass; ++t) {
    const double r = 1.0 + static_cast<double>(g.below(10000)) / 2000.0;
    const std::size_t a = 20 + g.below(181), b = 20 + g.below(181), c = 20 + g.below(181);
    const double id = baseline::normalize_ratio(r, a, a, curve);
    if (std::abs(id - r) > law_rel_tol * r) o.fail("identity fails at length " + std::to_string(a));
    const double direct = baseline::normalize_ratio(r, a, c, curve);
    const double via = baseline::normalize_ratio(baseline::normalize_ratio(r, a, b, curve), b, c, curve);
    if (std::abs(direct - via) > law_rel_tol * std::abs(direct)) o.fail("composition fails for " + std::to_string(a) + "->" + std::to_string(b) + "->" + std::to_string(c));
  }
  if (o.pass) o.detail << round_trip_trials << " round trips per coder, " << oracle_trials << " oracle comparisons";
  return o;
}

Outcome abc_normalization() {
  Outcome o;
  const auto tune = abc::parse_abc(corpus::detail::read_file(test_paths::tune("sally_gardens.abc"))).at(0);
  const auto r = abc::normalize(tune);
  if (const auto* seq = std::get_if<abc::QuaverSequence>(&r)) {
    if (seq->symbols != golden::sally_gardens) o.fail("Sally Gardens: " + diff_positions(seq->symbols, golden::sally_gardens));
  } else {
    o.fail("Sally Gardens rejected: " + std::get<abc::NormalizationError>(r).message());
  }
  auto body = [](const std::string& b) {
    return abc::normalize(abc::parse_abc("X:1\nM:4/4\nL:1/8\nK:D\n" + b + "\n").at(0), {false});
  };
  const auto two = body("A2");
  if (!std::holds_alternative<abc::QuaverSequence>(two) || std::get<abc::QuaverSequence>(two).size() != 2) o.fail("A2 did not expand to two symbols");
  auto expect_kind = [&](const std::string& b, abc::ErrorKind k) {
    const auto res = body(b);
    const auto* e = std::get_if<abc::NormalizationError>(&res);
    if (!e || e->kind != k) o.fail("'" + b + "' not rejected as " + std::string(abc::to_string(k)));
  };
  expect_kind("a'", abc::ErrorKind::out_of_range_note);
  expect_kind("A,", abc::ErrorKind::out_of_range_note);
  expect_kind("A/2", abc::ErrorKind::non_quaver_duration);
  expect_kind("(3ABc", abc::ErrorKind::non_quaver_duration);
  if (o.pass) o.detail << "128 symbols match";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"LZ78 parse of Sally Gardens matches the reference table", lz78_table},
      {"LZ77 parse of Sally Gardens matches the reference table", lz77_table},
      {"Concertina Reel and Star of Munster extremes", extremes},
      {"Random-string baseline means", baseline_means},
      {"Normalization formula 2.61 -> 2.73", normalization_formula},
      {"Corpus properties on standard-length reels", [&] { return corpus_properties(args); }},
      {"Property suites", property_suites},
      {"ABC normalization", abc_normalization},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " (" << ms << " ms): "
              << o.detail.str() << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed\n";
  return failed;
}
