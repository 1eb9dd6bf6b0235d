#pragma once

// Tune collections: ingestion, per-tune complexity reports, and the
// per-category statistics, histograms and rankings built from them.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunelz/abc.hpp"
#include "tunelz/baseline.hpp"
#include "tunelz/lz.hpp"

namespace tunelz::corpus {

struct TuneRecord {
  std::string id;
  std::string name;
  Category category = Category::other;
  std::string key;
  std::string abc;
  std::variant<abc::QuaverSequence, abc::NormalizationError> outcome;

  bool accepted() const { return std::holds_alternative<abc::QuaverSequence>(outcome); }
  const abc::QuaverSequence* sequence() const { return std::get_if<abc::QuaverSequence>(&outcome); }
  const abc::NormalizationError* error() const { return std::get_if<abc::NormalizationError>(&outcome); }
};

/// Whole-input failures (unreadable file, invalid JSON). Per-tune problems
/// are recorded on the TuneRecord instead.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Field names of a JSON dump entry. The id comes from `id`, falling back to
/// `fallback_id`; `meter` and `mode` are only consulted when the ABC text has
/// no header of its own.
struct DumpKeys {
  std::string id = "setting_id";
  std::string fallback_id = "tune_id";
  std::string name = "name";
  std::string type = "type";
  std::string abc = "abc";
  std::string meter = "meter";
  std::string mode = "mode";
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IngestError("error reading " + path.string());
  return ss.str();
}

inline std::string field_text(const nlohmann::json& entry, const std::string& key) {
  if (key.empty() || !entry.contains(key)) return {};
  const auto& v = entry[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_null()) return {};
  return v.dump();
}

inline bool has_key_line(std::string_view abc) {
  for (const auto& line : abc::detail::split_lines(abc)) {
    if (abc::detail::trim(line.text).starts_with("K:")) return true;
  }
  return false;
}

inline std::string default_meter(Category c) {
  switch (c) {
    case Category::reel: return "4/4";
    case Category::jig: return "6/8";
    case Category::other: return "none";
  }
  return "none";
}

inline TuneRecord record_from_block(abc::ParsedBlock block, std::string id, std::string name, Category category,
                                    std::string abc_text, const abc::NormalizeOptions& options) {
  TuneRecord rec{std::move(id), std::move(name), category, {}, std::move(abc_text), abc::NormalizationError{}};
  if (auto* err = std::get_if<abc::NormalizationError>(&block)) {
    rec.outcome = *err;
    return rec;
  }
  const auto& tune = std::get<abc::AbcTune>(block);
  rec.key = tune.key;
  if (rec.name.empty()) rec.name = tune.title;
  auto result = abc::normalize(tune, options);
  if (auto* seq = std::get_if<abc::QuaverSequence>(&result)) rec.outcome = std::move(*seq);
  else rec.outcome = std::get<abc::NormalizationError>(std::move(result));
  return rec;
}

}  // namespace detail

/// One record per array element. Entries whose ABC lacks a header (the usual
/// dump layout stores the body only) get one built from the entry's fields.
inline std::vector<TuneRecord> records_from_json(const nlohmann::json& dump, const DumpKeys& keys = {},
                                                 const abc::NormalizeOptions& options = {}) {
  if (!dump.is_array()) throw IngestError("tune dump must be a JSON array");
  std::vector<TuneRecord> records;
  records.reserve(dump.size());
  for (std::size_t i = 0; i < dump.size(); ++i) {
    const auto& entry = dump[i];
    if (!entry.is_object()) throw IngestError("tune dump entry " + std::to_string(i) + " is not an object");
    std::string id = detail::field_text(entry, keys.id);
    if (id.empty()) id = detail::field_text(entry, keys.fallback_id);
    if (id.empty()) id = "#" + std::to_string(i);
    const std::string name = detail::field_text(entry, keys.name);
    const Category category = category_from_string(detail::field_text(entry, keys.type));
    std::string abc_text = detail::field_text(entry, keys.abc);

    std::string source = abc_text;
    if (!detail::has_key_line(abc_text)) {
      std::string meter = detail::field_text(entry, keys.meter);
      if (meter.empty()) meter = detail::default_meter(category);
      std::string mode = detail::field_text(entry, keys.mode);
      if (mode.empty()) mode = "C";
      source = "X:1\nT:" + name + "\nM:" + meter + "\nL:1/8\nK:" + mode + "\n" + abc_text + "\n";
    } else if (!abc::detail::trim(abc_text).starts_with("X:")) {
      source = "X:1\n" + abc_text;
    }

    auto blocks = abc::parse_abc_blocks(source);
    abc::ParsedBlock block = blocks.empty()
                                 ? abc::ParsedBlock{abc::NormalizationError{abc::ErrorKind::malformed_header, "no tune found", 0}}
                                 : std::move(blocks.front());
    records.push_back(detail::record_from_block(std::move(block), std::move(id), name, category, std::move(abc_text), options));
  }
  return records;
}

inline std::vector<TuneRecord> ingest_json_dump(const std::filesystem::path& path, const DumpKeys& keys = {},
                                                const abc::NormalizeOptions& options = {}) {
  const auto text = detail::read_file(path);
  nlohmann::json dump;
  try {
    dump = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
  return records_from_json(dump, keys, options);
}

/// Records for every tune block of an ABC text. Ids are `<origin>:<X>`; the
/// category comes from R: when present, else from the normalized meter and
/// length.
inline std::vector<TuneRecord> records_from_abc(std::string_view source, std::string_view origin,
                                                const abc::NormalizeOptions& options = {}) {
  std::vector<TuneRecord> records;
  std::size_t ordinal = 0;
  for (auto& block : abc::parse_abc_blocks(source)) {
    ++ordinal;
    std::string id;
    std::string name;
    std::string text;
    std::optional<Category> declared;
    if (const auto* tune = std::get_if<abc::AbcTune>(&block)) {
      id = std::string(origin) + ":" + std::to_string(tune->reference_number);
      name = tune->title;
      if (!tune->rhythm.empty()) declared = category_from_string(tune->rhythm);
      text = tune->body;
    } else {
      id = std::string(origin) + ":#" + std::to_string(ordinal);
    }
    auto rec = detail::record_from_block(std::move(block), std::move(id), std::move(name), Category::other,
                                         std::move(text), options);
    if (declared) rec.category = *declared;
    else if (const auto* seq = rec.sequence()) rec.category = seq->category;
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<TuneRecord> ingest_abc_files(std::span<const std::filesystem::path> paths,
                                                const abc::NormalizeOptions& options = {}) {
  std::vector<TuneRecord> records;
  for (const auto& path : paths) {
    auto more = records_from_abc(detail::read_file(path), path.filename().string(), options);
    records.insert(records.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  return records;
}

struct ComplexityReport {
  std::string id;
  std::string name;
  Category category = Category::other;
  std::size_t length = 0;
  std::size_t lz77_tokens = 0;
  std::size_t lz78_tokens = 0;
  double ratio_lz77 = 0.0;
  double ratio_lz78 = 0.0;
  std::optional<double> normalized_ratio;

  Rational exact_ratio_lz77() const {
    return {static_cast<std::int64_t>(length), static_cast<std::int64_t>(lz77_tokens)};
  }
};

struct Rejection {
  std::string id;
  std::string name;
  abc::NormalizationError error;
};

struct Analysis {
  std::vector<ComplexityReport> reports;
  std::vector<Rejection> skipped;
};

struct NormalizationTarget {
  const baseline::BaselineCurve& curve;
  std::size_t reference_length;
};

inline ComplexityReport analyze_sequence(std::string id, std::string name, Category category, std::string_view symbols,
                                         const std::optional<NormalizationTarget>& target = std::nullopt) {
  ComplexityReport r;
  r.id = std::move(id);
  r.name = std::move(name);
  r.category = category;
  r.length = symbols.size();
  if (symbols.empty()) throw lz::UndefinedRatio("cannot analyze an empty sequence");
  const auto s77 = lz::compress_lz77(symbols);
  const auto s78 = lz::compress_lz78(symbols);
  r.lz77_tokens = s77.token_count();
  r.lz78_tokens = s78.token_count();
  r.ratio_lz77 = lz::compression_ratio(s77);
  r.ratio_lz78 = lz::compression_ratio(s78);
  if (target) r.normalized_ratio = baseline::normalize_ratio(r.ratio_lz77, r.length, target->reference_length, target->curve);
  return r;
}

/// Reports for the accepted records, in input order; rejected records are
/// listed in `skipped`.
inline Analysis analyze(std::span<const TuneRecord> records, const std::optional<NormalizationTarget>& target = std::nullopt) {
  Analysis out;
  for (const auto& rec : records) {
    if (const auto* seq = rec.sequence()) {
      out.reports.push_back(analyze_sequence(rec.id, rec.name, rec.category, seq->symbols, target));
    } else {
      out.skipped.push_back({rec.id, rec.name, *rec.error()});
    }
  }
  return out;
}

enum class Order { easiest_first, hardest_first };

namespace detail {

// Exact comparison of length/tokens ratios.
inline int compare_ratio(const ComplexityReport& a, const ComplexityReport& b) {
  const auto c = a.exact_ratio_lz77() <=> b.exact_ratio_lz77();
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

inline bool ranks_before(const ComplexityReport& a, const ComplexityReport& b, Order order) {
  const int c = compare_ratio(a, b);
  if (c != 0) return order == Order::easiest_first ? c > 0 : c < 0;
  if (a.name != b.name) return a.name < b.name;
  return a.id < b.id;
}

}  // namespace detail

/// Easiest first means most repetitive (highest LZ77 ratio) first. Ties are
/// broken by name, then id.
inline std::vector<ComplexityReport> rank(std::span<const ComplexityReport> reports, Order order) {
  std::vector<ComplexityReport> out(reports.begin(), reports.end());
  std::stable_sort(out.begin(), out.end(),
                   [order](const auto& a, const auto& b) { return detail::ranks_before(a, b, order); });
  return out;
}

struct Histogram {
  std::size_t bin_count = 20;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::size_t> counts;

  double width() const { return (upper - lower) / static_cast<double>(bin_count); }
  double bin_lower(std::size_t i) const { return lower + width() * static_cast<double>(i); }
  double bin_upper(std::size_t i) const { return i + 1 == bin_count ? upper : lower + width() * static_cast<double>(i + 1); }
};

/// Equal-width bins over [lower, upper]; the upper edge falls in the last
/// bin. Constant data gets the range [v, v + 1].
inline Histogram make_histogram(std::span<const double> values, std::size_t bin_count) {
  if (bin_count == 0) throw std::invalid_argument("histogram needs at least one bin");
  Histogram h{bin_count, 0.0, 1.0, std::vector<std::size_t>(bin_count, 0)};
  if (values.empty()) return h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.lower = *lo;
  h.upper = *hi > *lo ? *hi : *lo + 1.0;
  for (double v : values) {
    auto bin = static_cast<std::size_t>(std::floor((v - h.lower) / (h.upper - h.lower) * static_cast<double>(bin_count)));
    h.counts[std::min(bin, bin_count - 1)]++;
  }
  return h;
}

struct Extreme {
  std::string id;
  std::string name;
  double ratio = 0.0;
};

struct CorpusStats {
  std::optional<Category> category;  // nullopt: all categories
  std::size_t count = 0;
  double mean_ratio = 0.0;
  double std_dev = 0.0;  // sample (n - 1) convention
  bool degenerate = false;  // single report: std_dev is reported as 0
  Extreme min;
  Extreme max;
  Histogram histogram;
};

class EmptyCategory : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Statistics of the LZ77 ratio over the reports of one category (all when
/// `category` is empty). Reports are folded in id order so the result does
/// not depend on input order.
inline CorpusStats aggregate(std::span<const ComplexityReport> reports, std::optional<Category> category,
                             std::size_t bin_count = 20) {
  std::vector<const ComplexityReport*> sel;
  for (const auto& r : reports) {
    if (!category || r.category == *category) sel.push_back(&r);
  }
  if (sel.empty()) {
    throw EmptyCategory("no reports in category " + std::string(category ? to_string(*category) : "all"));
  }
  std::sort(sel.begin(), sel.end(), [](const auto* a, const auto* b) {
    return a->id != b->id ? a->id < b->id : a->name < b->name;
  });

  CorpusStats st;
  st.category = category;
  st.count = sel.size();
  std::vector<double> values;
  values.reserve(sel.size());
  double sum = 0.0;
  for (const auto* r : sel) {
    values.push_back(r->ratio_lz77);
    sum += r->ratio_lz77;
  }
  st.mean_ratio = sum / static_cast<double>(sel.size());
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean_ratio) * (v - st.mean_ratio);
  st.degenerate = sel.size() == 1;
  st.std_dev = st.degenerate ? 0.0 : std::sqrt(ss / static_cast<double>(sel.size() - 1));

  const auto* easiest = *std::min_element(sel.begin(), sel.end(), [](const auto* a, const auto* b) {
    return detail::ranks_before(*a, *b, Order::easiest_first);
  });
  const auto* hardest = *std::min_element(sel.begin(), sel.end(), [](const auto* a, const auto* b) {
    return detail::ranks_before(*a, *b, Order::hardest_first);
  });
  st.max = {easiest->id, easiest->name, easiest->ratio_lz77};
  st.min = {hardest->id, hardest->name, hardest->ratio_lz77};
  // Rounding in the sum must not push the mean outside [min, max].
  st.mean_ratio = std::clamp(st.mean_ratio, st.min.ratio, st.max.ratio);
  st.histogram = make_histogram(values, bin_count);
  return st;
}

// ---- output ----

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

}  // namespace detail

inline std::string reports_to_csv(std::span<const ComplexityReport> reports) {
  std::string out = "id,name,category,length,lz77_tokens,lz78_tokens,ratio_lz77,ratio_lz78,normalized_ratio\n";
  for (const auto& r : reports) {
    out += detail::csv_field(r.id) + ',' + detail::csv_field(r.name) + ',' + std::string(to_string(r.category)) + ',' +
           std::to_string(r.length) + ',' + std::to_string(r.lz77_tokens) + ',' + std::to_string(r.lz78_tokens) + ',' +
           detail::fixed(r.ratio_lz77) + ',' + detail::fixed(r.ratio_lz78) + ',' +
           (r.normalized_ratio ? detail::fixed(*r.normalized_ratio) : std::string()) + '\n';
  }
  return out;
}

inline nlohmann::json to_json(const ComplexityReport& r) {
  return {{"id", r.id},
          {"name", r.name},
          {"category", std::string(to_string(r.category))},
          {"length", r.length},
          {"lz77_tokens", r.lz77_tokens},
          {"lz78_tokens", r.lz78_tokens},
          {"ratio_lz77", r.ratio_lz77},
          {"ratio_lz78", r.ratio_lz78},
          {"normalized_ratio", r.normalized_ratio ? nlohmann::json(*r.normalized_ratio) : nlohmann::json(nullptr)}};
}

inline nlohmann::json to_json(const Histogram& h) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i <= h.bin_count; ++i) edges.push_back(i == h.bin_count ? h.upper : h.bin_lower(i));
  return {{"bin_count", h.bin_count}, {"lower", h.lower}, {"upper", h.upper}, {"counts", h.counts}, {"edges", edges}};
}

inline nlohmann::json to_json(const CorpusStats& st) {
  auto extreme = [](const Extreme& e) { return nlohmann::json{{"id", e.id}, {"name", e.name}, {"ratio", e.ratio}}; };
  return {{"category", st.category ? std::string(to_string(*st.category)) : std::string("all")},
          {"count", st.count},
          {"mean_ratio", st.mean_ratio},
          {"std_dev", st.std_dev},
          {"degenerate", st.degenerate},
          {"min", extreme(st.min)},
          {"max", extreme(st.max)},
          {"histogram", to_json(st.histogram)}};
}

inline std::string histogram_to_csv(const Histogram& h) {
  std::string out = "bin_lower,bin_upper,count\n";
  for (std::size_t i = 0; i < h.bin_count; ++i) {
    out += detail::fixed(h.bin_lower(i)) + ',' + detail::fixed(h.bin_upper(i)) + ',' + std::to_string(h.counts[i]) + '\n';
  }
  return out;
}

/// Horizontal bar chart, one row per bin, scaled to `width` characters.
inline std::string histogram_bars(const Histogram& h, std::size_t width = 40) {
  const std::size_t peak = h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
  std::string out;
  for (std::size_t i = 0; i < h.bin_count; ++i) {
    const std::size_t n = h.counts[i];
    const std::size_t bar = peak == 0 ? 0 : (n * width + peak - 1) / peak;
    out += "[" + detail::fixed(h.bin_lower(i), 3) + ", " + detail::fixed(h.bin_upper(i), 3) +
           (i + 1 == h.bin_count ? "] " : ") ") + std::string(bar, '#') + (bar ? " " : "") + std::to_string(n) + '\n';
  }
  return out;
}

}  // namespace tunelz::corpus
