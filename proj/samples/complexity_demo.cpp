// Ranks the tunes in the given ABC files from most to least repetitive and
// shows the LZ77 parse of the easiest one.
//
//   complexity_demo samples/tunes/*.abc

#include <filesystem>
#include <iostream>
#include <vector>

#include "tunelz/tunelz.hpp"

int main(int argc, char** argv) {
  using namespace tunelz;
  std::vector<std::filesystem::path> paths(argv + 1, argv + argc);
  if (paths.empty()) {
    std::cerr << "usage: complexity_demo FILE.abc...\n";
    return 2;
  }

  const auto records = corpus::ingest_abc_files(paths);
  const auto analysis = corpus::analyze(records);
  for (const auto& skip : analysis.skipped) std::cerr << "skipped " << skip.id << ": " << skip.error.message() << '\n';
  if (analysis.reports.empty()) return 1;

  const auto ranked = corpus::rank(analysis.reports, corpus::Order::easiest_first);
  for (const auto& r : ranked) {
    std::cout << r.name << ": " << r.length << '/' << r.lz77_tokens << " = " << r.ratio_lz77 << '\n';
  }

  for (const auto& rec : records) {
    if (rec.id != ranked.front().id) continue;
    const auto stream = lz::compress_lz77(rec.sequence()->symbols);
    std::cout << '\n' << rec.name << " (" << stream.token_count() << " tokens)\n" << lz::to_text(stream) << '\n';
  }
  return 0;
}
