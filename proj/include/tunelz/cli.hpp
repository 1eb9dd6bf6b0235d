#pragma once

// `tunelz` command-line front end. Kept in a header so the test suite can
// run commands in-process against string streams.
//
// Exit codes: 0 success, 1 some tunes were rejected, 2 usage or fatal input
// error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tunelz/abc.hpp"
#include "tunelz/baseline.hpp"
#include "tunelz/corpus.hpp"
#include "tunelz/lz.hpp"
#include "tunelz/token_format.hpp"

namespace tunelz::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_rejected = 1;
inline constexpr int exit_fatal = 2;

enum class Format { text, json, csv };

struct InputOptions {
  std::vector<std::string> paths;
  std::string dump;
  bool any_length = false;
  std::string octave_case = "low";
  corpus::DumpKeys keys;
};

struct Config {
  Format format = Format::text;
  std::uint64_t seed = 0;
  int verbosity = 0;
  InputOptions input;
  std::string algo = "lz77";
  std::size_t index_base = 0;
  std::string category = "all";
  std::size_t bins = 20;
  std::optional<std::size_t> normalize_to;
  std::string baseline_path;
  std::string reports_out;
  std::string histogram_out;
  std::string stats_out;
  std::vector<std::size_t> lengths{50, 100, 150, 200};
  std::size_t alphabet = 13;
  std::size_t samples = 1000;
  std::string curve_out;
  std::string order = "easiest";
};

/// A named symbol sequence read from an ABC tune or a normalized file.
struct NamedSequence {
  std::string label;  // comment line, without the leading "% "
  std::string symbols;
};

namespace detail {

inline std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return corpus::detail::read_file(path);
}

inline abc::NormalizeOptions normalize_options(const InputOptions& in) {
  return {!in.any_length, in.octave_case == "abc" ? abc::OctaveCase::abc : abc::OctaveCase::lower_is_low};
}

inline std::string label(const corpus::TuneRecord& r) {
  return r.id + (r.name.empty() ? "" : " " + r.name) + " (" + std::string(to_string(r.category)) + ")";
}

inline std::vector<corpus::TuneRecord> load_records(const InputOptions& in) {
  const auto opts = normalize_options(in);
  if (!in.dump.empty()) return corpus::ingest_json_dump(in.dump, in.keys, opts);
  std::vector<corpus::TuneRecord> records;
  for (const auto& p : in.paths) {
    auto more = corpus::records_from_abc(read_input(p), std::filesystem::path(p).filename().string(), opts);
    records.insert(records.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  return records;
}

inline int report_rejections(const std::vector<corpus::TuneRecord>& records, std::ostream& err) {
  int rejected = 0;
  for (const auto& r : records) {
    if (const auto* e = r.error()) {
      err << "rejected " << r.id << (r.name.empty() ? "" : " " + r.name) << ": " << e->message() << '\n';
      ++rejected;
    }
  }
  return rejected;
}

// ABC files (anything with a K: line) are normalized; other files hold one
// sequence per line, with optional `%` label lines.
inline std::vector<NamedSequence> load_sequences(const InputOptions& in, std::ostream& err, int& rejected) {
  std::vector<NamedSequence> out;
  if (!in.dump.empty()) {
    auto records = load_records(in);
    rejected += report_rejections(records, err);
    for (const auto& r : records) {
      if (const auto* s = r.sequence()) out.push_back({label(r), s->symbols});
    }
    return out;
  }
  for (const auto& p : in.paths) {
    const auto text = read_input(p);
    if (corpus::detail::has_key_line(text)) {
      auto records = corpus::records_from_abc(text, std::filesystem::path(p).filename().string(), normalize_options(in));
      rejected += report_rejections(records, err);
      for (const auto& r : records) {
        if (const auto* s = r.sequence()) out.push_back({label(r), s->symbols});
      }
      continue;
    }
    std::string pending_label;
    for (const auto& line : abc::detail::split_lines(text)) {
      auto t = abc::detail::trim(line.text);
      if (t.empty()) continue;
      if (t.front() == '%') {
        pending_label = std::string(abc::detail::trim(t.substr(1)));
        continue;
      }
      std::string symbols;
      for (char c : t) {
        if (!std::isspace(static_cast<unsigned char>(c))) symbols += c;
      }
      out.push_back({std::exchange(pending_label, {}), std::move(symbols)});
    }
  }
  return out;
}

inline std::optional<Category> parse_category(const std::string& s) {
  if (s == "all") return std::nullopt;
  return category_from_string(s);
}

inline std::string two_decimals(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

inline int cmd_normalize(const Config& cfg, std::ostream& out, std::ostream& err) {
  auto records = load_records(cfg.input);
  const int rejected = report_rejections(records, err);
  if (cfg.format == Format::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json j{{"id", r.id}, {"name", r.name}, {"category", std::string(to_string(r.category))}};
      if (const auto* s = r.sequence()) {
        j["length"] = s->size();
        j["symbols"] = s->symbols;
      } else {
        j["error"] = {{"kind", std::string(abc::to_string(r.error()->kind))},
                      {"detail", r.error()->detail},
                      {"location", r.error()->location}};
      }
      arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& r : records) {
      if (const auto* s = r.sequence()) out << "% " << label(r) << '\n' << s->symbols << '\n';
    }
  }
  return rejected ? exit_rejected : exit_ok;
}

inline int cmd_compress(const Config& cfg, std::ostream& out, std::ostream& err) {
  int rejected = 0;
  const auto seqs = load_sequences(cfg.input, err, rejected);
  const auto algo = lz::algorithm_from_string(cfg.algo);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : seqs) {
    const auto stream = lz::compress(algo, s.symbols);
    const auto n = stream.token_count();
    if (cfg.format == Format::json) {
      auto j = lz::to_json(stream);
      j["label"] = s.label;
      j["ratio"] = n ? nlohmann::json(lz::compression_ratio(stream)) : nlohmann::json(nullptr);
      arr.push_back(std::move(j));
      continue;
    }
    if (!s.label.empty()) out << "% " << s.label << '\n';
    out << lz::to_text(stream, cfg.index_base) << '\n';
    if (n) {
      out << "ratio " << stream.source_length << '/' << n << " ≈ " << two_decimals(lz::compression_ratio(stream))
          << '\n';
    } else {
      out << "ratio undefined\n";
    }
  }
  if (cfg.format == Format::json) out << arr.dump(2) << '\n';
  return rejected ? exit_rejected : exit_ok;
}

inline int cmd_decompress(const Config& cfg, std::ostream& out) {
  std::vector<NamedSequence> decoded;
  for (const auto& p : cfg.input.paths) {
    const auto text = read_input(p);
    auto parsed = nlohmann::json::parse(text, nullptr, false);
    if (!parsed.is_discarded() && (parsed.is_array() || parsed.is_object())) {
      if (parsed.is_object()) parsed = nlohmann::json::array({parsed});
      for (const auto& j : parsed) {
        decoded.push_back({j.value("label", std::string()), lz::decompress_string(lz::stream_from_json(j))});
      }
      continue;
    }
    std::string pending_label;
    const auto algo = lz::algorithm_from_string(cfg.algo);
    for (const auto& line : abc::detail::split_lines(text)) {
      auto t = abc::detail::trim(line.text);
      if (t.empty() || t.starts_with("ratio")) continue;
      if (t.front() == '%') {
        pending_label = std::string(abc::detail::trim(t.substr(1)));
        continue;
      }
      auto stream = lz::parse_text(t, algo, cfg.index_base);
      decoded.push_back({std::exchange(pending_label, {}), lz::decompress_string(stream)});
    }
  }
  if (cfg.format == Format::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : decoded) arr.push_back({{"label", d.label}, {"symbols", d.symbols}});
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& d : decoded) {
      if (!d.label.empty()) out << "% " << d.label << '\n';
      out << d.symbols << '\n';
    }
  }
  return exit_ok;
}

inline std::optional<baseline::BaselineCurve> load_curve(const Config& cfg) {
  if (cfg.baseline_path.empty()) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(corpus::detail::read_file(cfg.baseline_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw corpus::IngestError(cfg.baseline_path + ": " + e.what());
  }
  return baseline::curve_from_json(j);
}

inline corpus::Analysis run_analysis(const Config& cfg, std::ostream& err, int& rejected) {
  const auto records = load_records(cfg.input);
  rejected = report_rejections(records, err);
  const auto curve = load_curve(cfg);
  std::optional<corpus::NormalizationTarget> target;
  if (curve && cfg.normalize_to) target.emplace(corpus::NormalizationTarget{*curve, *cfg.normalize_to});
  auto analysis = corpus::analyze(records, target);
  if (cfg.verbosity > 0) {
    err << "ingested " << records.size() << " tunes: " << analysis.reports.size() << " accepted, "
        << analysis.skipped.size() << " rejected\n";
  }
  return analysis;
}

inline void write_reports(const std::vector<corpus::ComplexityReport>& reports, Format format, std::ostream& out) {
  if (format == Format::csv) {
    out << corpus::reports_to_csv(reports);
  } else if (format == Format::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(corpus::to_json(r));
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& r : reports) {
      out << r.name << " [" << r.id << ", " << to_string(r.category) << "]: " << r.length << " quavers, LZ77 "
          << r.lz77_tokens << " tokens (ratio " << corpus::detail::fixed(r.ratio_lz77, 3) << "), LZ78 "
          << r.lz78_tokens << " tokens (ratio " << corpus::detail::fixed(r.ratio_lz78, 3) << ")";
      if (r.normalized_ratio) out << ", normalized " << corpus::detail::fixed(*r.normalized_ratio, 3);
      out << '\n';
    }
  }
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw corpus::IngestError("cannot write " + path);
  f << content;
}

inline int cmd_analyze(const Config& cfg, std::ostream& out, std::ostream& err) {
  int rejected = 0;
  const auto analysis = run_analysis(cfg, err, rejected);
  write_reports(analysis.reports, cfg.format, out);
  return rejected ? exit_rejected : exit_ok;
}

inline int cmd_rank(const Config& cfg, std::ostream& out, std::ostream& err) {
  int rejected = 0;
  const auto analysis = run_analysis(cfg, err, rejected);
  const auto category = parse_category(cfg.category);
  std::vector<corpus::ComplexityReport> selected;
  for (const auto& r : analysis.reports) {
    if (!category || r.category == *category) selected.push_back(r);
  }
  const auto ranked =
      corpus::rank(selected, cfg.order == "hardest" ? corpus::Order::hardest_first : corpus::Order::easiest_first);
  if (cfg.format == Format::text) {
    std::size_t i = 0;
    for (const auto& r : ranked) {
      out << ++i << ". " << r.name << " [" << r.id << "] ratio " << r.length << '/' << r.lz77_tokens << " = "
          << corpus::detail::fixed(r.ratio_lz77, 3) << '\n';
    }
  } else {
    write_reports(ranked, cfg.format, out);
  }
  return rejected ? exit_rejected : exit_ok;
}

inline int cmd_corpus(const Config& cfg, std::ostream& out, std::ostream& err) {
  int rejected = 0;
  const auto analysis = run_analysis(cfg, err, rejected);
  const auto stats = corpus::aggregate(analysis.reports, parse_category(cfg.category), cfg.bins);

  if (!cfg.reports_out.empty()) write_file(cfg.reports_out, corpus::reports_to_csv(analysis.reports));
  if (!cfg.histogram_out.empty()) write_file(cfg.histogram_out, corpus::histogram_to_csv(stats.histogram));
  if (!cfg.stats_out.empty()) write_file(cfg.stats_out, corpus::to_json(stats).dump(2) + "\n");

  if (cfg.format == Format::json) {
    out << corpus::to_json(stats).dump(2) << '\n';
  } else if (cfg.format == Format::csv) {
    out << corpus::histogram_to_csv(stats.histogram);
  } else {
    out << "category " << (stats.category ? to_string(*stats.category) : "all") << ": " << stats.count
        << " tunes, mean LZ77 ratio " << corpus::detail::fixed(stats.mean_ratio, 3) << ", std dev "
        << corpus::detail::fixed(stats.std_dev, 3) << (stats.degenerate ? " (single tune)" : "") << '\n';
    out << "max " << corpus::detail::fixed(stats.max.ratio, 3) << ' ' << stats.max.name << " [" << stats.max.id << "]\n";
    out << "min " << corpus::detail::fixed(stats.min.ratio, 3) << ' ' << stats.min.name << " [" << stats.min.id << "]\n";
    out << corpus::histogram_bars(stats.histogram);
    if (!analysis.skipped.empty()) out << "skipped " << analysis.skipped.size() << " rejected tunes\n";
  }
  return rejected ? exit_rejected : exit_ok;
}

inline int cmd_baseline(const Config& cfg, std::ostream& out) {
  const auto curve =
      baseline::estimate_baseline(cfg.lengths, cfg.alphabet, cfg.samples, cfg.seed, lz::algorithm_from_string(cfg.algo));
  if (!cfg.curve_out.empty()) write_file(cfg.curve_out, baseline::to_json(curve).dump(2) + "\n");
  if (cfg.format == Format::json) {
    out << baseline::to_json(curve).dump(2) << '\n';
  } else if (cfg.format == Format::text) {
    for (const auto& p : curve.points) {
      out << "length " << p.length << ": mean ratio " << corpus::detail::fixed(p.mean_ratio, 4) << ", std dev "
          << corpus::detail::fixed(p.std_dev, 4) << '\n';
    }
  } else {
    out << baseline::to_csv(curve);
  }
  return exit_ok;
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LZ77/LZ78 token-count complexity of ABC tunes", "tunelz"};
  app.require_subcommand(1, 1);
  Config cfg;
  std::string format;
  const std::map<std::string, Format> formats{{"text", Format::text}, {"json", Format::json}, {"csv", Format::csv}};

  // Default format is text, except csv for baseline.
  auto shared = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format: text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_flag("-v,--verbose", cfg.verbosity, "More diagnostics on stderr");
  };
  auto inputs = [&](CLI::App* sub, bool allow_dump) {
    auto* paths = sub->add_option("paths", cfg.input.paths, "ABC or normalized sequence files ('-' for stdin)");
    sub->add_flag("--any-length", cfg.input.any_length, "Accept tunes that are not standard-length reels or jigs");
    sub->add_option("--octave-case", cfg.input.octave_case, "Spelling of the two octaves: low (low octave lowercase) or abc")
        ->check(CLI::IsMember({"low", "abc"}));
    if (allow_dump) {
      auto* dump = sub->add_option("--dump", cfg.input.dump, "JSON tune dump")->excludes(paths);
      paths->excludes(dump);
      sub->add_option("--id-key", cfg.input.keys.id, "Dump field holding the record id");
      sub->add_option("--name-key", cfg.input.keys.name, "Dump field holding the tune name");
      sub->add_option("--type-key", cfg.input.keys.type, "Dump field holding the tune type");
      sub->add_option("--abc-key", cfg.input.keys.abc, "Dump field holding the ABC text");
    }
  };
  auto normalization = [&](CLI::App* sub) {
    auto* to = sub->add_option("--normalize-to", cfg.normalize_to, "Reference length for baseline normalization");
    auto* curve = sub->add_option("--baseline", cfg.baseline_path, "Baseline curve JSON")->check(CLI::ExistingFile);
    to->needs(curve);
    curve->needs(to);
  };

  auto* normalize = app.add_subcommand("normalize", "Flatten ABC tunes onto the quaver grid");
  shared(normalize);
  inputs(normalize, true);

  auto* compress = app.add_subcommand("compress", "Print the token stream of each tune");
  shared(compress);
  inputs(compress, true);
  compress->add_option("--algo", cfg.algo)->check(CLI::IsMember({"lz77", "lz78"}));
  compress->add_option("--index-base", cfg.index_base, "Displayed LZ77 positions count from 0 or 1")
      ->check(CLI::IsMember({"0", "1"}));

  auto* decompress = app.add_subcommand("decompress", "Decode token streams written by compress");
  shared(decompress);
  decompress->add_option("paths", cfg.input.paths, "Token stream files ('-' for stdin)")->required();
  decompress->add_option("--algo", cfg.algo)->check(CLI::IsMember({"lz77", "lz78"}));
  decompress->add_option("--index-base", cfg.index_base)->check(CLI::IsMember({"0", "1"}));

  auto* analyze = app.add_subcommand("analyze", "Per-tune complexity reports");
  shared(analyze);
  inputs(analyze, true);
  normalization(analyze);

  auto* corpus_cmd = app.add_subcommand("corpus", "Category statistics and histogram");
  shared(corpus_cmd);
  inputs(corpus_cmd, true);
  normalization(corpus_cmd);
  corpus_cmd->add_option("--category", cfg.category)->check(CLI::IsMember({"reel", "jig", "all"}));
  corpus_cmd->add_option("--bins", cfg.bins)->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--reports", cfg.reports_out, "Also write per-tune CSV here");
  corpus_cmd->add_option("--histogram", cfg.histogram_out, "Also write histogram CSV here");
  corpus_cmd->add_option("--stats", cfg.stats_out, "Also write statistics JSON here");

  auto* base = app.add_subcommand("baseline", "Mean compression ratio of random strings by length");
  shared(base);
  base->add_option("--lengths", cfg.lengths)->delimiter(',')->check(CLI::PositiveNumber);
  base->add_option("--alphabet", cfg.alphabet)->check(CLI::Range(1, 26));
  base->add_option("--samples", cfg.samples)->check(CLI::PositiveNumber);
  base->add_option("--algo", cfg.algo)->check(CLI::IsMember({"lz77", "lz78"}));
  base->add_option("--out", cfg.curve_out, "Write the curve JSON here");

  auto* rank = app.add_subcommand("rank", "Order tunes from easiest to hardest");
  shared(rank);
  inputs(rank, true);
  normalization(rank);
  rank->add_option("--order", cfg.order)->check(CLI::IsMember({"easiest", "hardest"}));
  rank->add_option("--category", cfg.category)->check(CLI::IsMember({"reel", "jig", "all"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return exit_fatal;
  }
  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  cfg.format = formats.at(format.empty() ? (name == "baseline" ? "csv" : "text") : format);

  try {
    const bool needs_input = name != "baseline" && name != "decompress";
    if (needs_input && cfg.input.paths.empty() && cfg.input.dump.empty()) {
      err << name << ": no input files\n" << sub->help();
      return exit_fatal;
    }
    if (name == "normalize") return detail::cmd_normalize(cfg, out, err);
    if (name == "compress") return detail::cmd_compress(cfg, out, err);
    if (name == "decompress") return detail::cmd_decompress(cfg, out);
    if (name == "analyze") return detail::cmd_analyze(cfg, out, err);
    if (name == "corpus") return detail::cmd_corpus(cfg, out, err);
    if (name == "baseline") return detail::cmd_baseline(cfg, out);
    if (name == "rank") return detail::cmd_rank(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_fatal;
  }
  return exit_fatal;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace tunelz::cli
