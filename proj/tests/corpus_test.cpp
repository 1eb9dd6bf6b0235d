#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/golden.hpp"
#include "test_paths.hpp"
#include "tunelz/corpus.hpp"

using namespace tunelz;
using namespace tunelz::corpus;

namespace {

ComplexityReport report(std::string id, std::string name, std::size_t length, std::size_t tokens,
                        Category c = Category::reel) {
  ComplexityReport r;
  r.id = std::move(id);
  r.name = std::move(name);
  r.category = c;
  r.length = length;
  r.lz77_tokens = r.lz78_tokens = tokens;
  r.ratio_lz77 = r.ratio_lz78 = static_cast<double>(length) / static_cast<double>(tokens);
  return r;
}

}  // namespace

TEST(Ingest, JsonDumpRecordsAndRejections) {
  const auto recs = ingest_json_dump(test_paths::tune("session_dump.json"));
  ASSERT_EQ(recs.size(), 5u);
  EXPECT_EQ(recs[0].id, "101");
  EXPECT_EQ(recs[0].category, Category::reel);
  ASSERT_TRUE(recs[0].accepted());
  // Bodies from a dump are spelled as in the ABC: the default folding swaps case.
  EXPECT_EQ(recs[0].sequence()->symbols, golden::sally_gardens);
  EXPECT_EQ(recs[1].sequence()->category, Category::jig);
  EXPECT_EQ(recs[1].sequence()->size(), 96u);
  EXPECT_TRUE(recs[2].accepted());
  EXPECT_TRUE(recs[3].accepted());
  ASSERT_FALSE(recs[4].accepted());
  EXPECT_EQ(recs[4].error()->kind, abc::ErrorKind::non_quaver_duration);
}

TEST(Ingest, EmptyArray) { EXPECT_TRUE(records_from_json(nlohmann::json::array()).empty()); }

TEST(Ingest, NotAnArray) {
  EXPECT_THROW(records_from_json(nlohmann::json::object()), IngestError);
  EXPECT_THROW(records_from_json(nlohmann::json::parse("[1]")), IngestError);
}

TEST(Ingest, FallbackIdAndCustomKeys) {
  const auto dump = nlohmann::json::parse(R"([{"tune_id": 9, "title": "x", "kind": "reel", "abc": "ABcd|"}])");
  DumpKeys keys;
  keys.name = "title";
  keys.type = "kind";
  const auto recs = records_from_json(dump, keys, {false});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].id, "9");
  EXPECT_EQ(recs[0].name, "x");
  EXPECT_EQ(recs[0].category, Category::reel);
  EXPECT_EQ(recs[0].sequence()->symbols, "abCD");
}

TEST(Ingest, MissingFileIsFatal) {
  EXPECT_THROW(ingest_json_dump(test_paths::tune("no_such_file.json")), IngestError);
  EXPECT_THROW(ingest_json_dump(test_paths::tune("mixed.abc")), IngestError);
}

TEST(Ingest, AbcFiles) {
  const std::vector<std::filesystem::path> paths{test_paths::tune("sally_gardens.abc"), test_paths::tune("mixed.abc")};
  const auto recs = ingest_abc_files(paths);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].id, "sally_gardens.abc:1");
  EXPECT_EQ(recs[0].category, Category::reel);
  EXPECT_EQ(recs[1].id, "mixed.abc:1");
  EXPECT_EQ(recs[1].category, Category::jig);
  EXPECT_TRUE(recs[1].accepted());
  EXPECT_EQ(recs[2].name, "Half a Reel");
  ASSERT_FALSE(recs[2].accepted());
  EXPECT_EQ(recs[2].error()->kind, abc::ErrorKind::wrong_length);
}

TEST(Analyze, ReportsAndSkipped) {
  const auto recs = ingest_json_dump(test_paths::tune("session_dump.json"));
  const auto a = analyze(recs);
  ASSERT_EQ(a.reports.size(), 4u);
  ASSERT_EQ(a.skipped.size(), 1u);
  EXPECT_EQ(a.skipped[0].id, "505");
  const auto& sally = a.reports[0];
  EXPECT_EQ(sally.length, 128u);
  EXPECT_EQ(sally.lz77_tokens, 48u);
  EXPECT_EQ(sally.lz78_tokens, 57u);
  EXPECT_EQ(sally.exact_ratio_lz77(), Rational(8, 3));
  EXPECT_FALSE(sally.normalized_ratio);
  EXPECT_EQ(a.reports[2].lz77_tokens, 26u);
  EXPECT_EQ(a.reports[3].lz77_tokens, 64u);
}

TEST(Analyze, NormalizedRatioUsesCurve) {
  baseline::BaselineCurve curve;
  curve.points = {{96, 1.23, 0}, {128, 1.29, 0}};
  const auto r = analyze_sequence("k", "Kesh", Category::jig, std::string(96, 'a'), NormalizationTarget{curve, 128});
  ASSERT_TRUE(r.normalized_ratio);
  EXPECT_NEAR(*r.normalized_ratio, r.ratio_lz77 * 1.29 / 1.23, 1e-12);
  EXPECT_THROW(analyze_sequence("e", "", Category::other, ""), lz::UndefinedRatio);
}

TEST(Aggregate, ExtremesOfSampleReels) {
  const auto a = analyze(ingest_json_dump(test_paths::tune("session_dump.json")));
  const auto st = aggregate(a.reports, Category::reel);
  EXPECT_EQ(st.count, 3u);
  EXPECT_EQ(st.max.name, "The Concertina Reel");
  EXPECT_NEAR(st.max.ratio, 4.92, 0.005);
  EXPECT_EQ(st.min.name, "The Star of Munster");
  EXPECT_DOUBLE_EQ(st.min.ratio, 2.0);
  const double mean = (128.0 / 48 + 128.0 / 26 + 2.0) / 3;
  EXPECT_NEAR(st.mean_ratio, mean, 1e-12);
  EXPECT_THROW(aggregate(a.reports, Category::other), EmptyCategory);
  EXPECT_EQ(aggregate(a.reports, std::nullopt).count, 4u);
}

TEST(Aggregate, SingleReportIsDegenerate) {
  const std::vector<ComplexityReport> one{report("1", "a", 128, 40)};
  const auto st = aggregate(one, Category::reel);
  EXPECT_TRUE(st.degenerate);
  EXPECT_EQ(st.std_dev, 0.0);
  EXPECT_EQ(st.mean_ratio, 3.2);
}

TEST(Aggregate, ConstantRatios) {
  const std::vector<ComplexityReport> same{report("1", "a", 128, 64), report("2", "b", 96, 48), report("3", "c", 2, 1)};
  const auto st = aggregate(same, Category::reel, 20);
  EXPECT_EQ(st.mean_ratio, 2.0);
  EXPECT_EQ(st.std_dev, 0.0);
  EXPECT_FALSE(st.degenerate);
  EXPECT_EQ(st.histogram.lower, 2.0);
  EXPECT_EQ(st.histogram.upper, 3.0);
  EXPECT_EQ(st.histogram.counts[0], 3u);
}

TEST(Aggregate, SampleStandardDeviation) {
  const std::vector<ComplexityReport> rs{report("1", "a", 4, 4), report("2", "b", 4, 2), report("3", "c", 4, 1)};
  // ratios 1, 2, 4: mean 7/3, sample variance 7/3.
  const auto st = aggregate(rs, std::nullopt);
  EXPECT_NEAR(st.mean_ratio, 7.0 / 3, 1e-12);
  EXPECT_NEAR(st.std_dev, std::sqrt(7.0 / 3), 1e-12);
}

TEST(Aggregate, IndependentOfInputOrder) {
  std::vector<ComplexityReport> rs;
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::size_t tokens = 20 + rng() % 60;
    rs.push_back(report("id" + std::to_string(i), "t" + std::to_string(i % 17), 128, tokens));
  }
  const auto base = aggregate(rs, Category::reel);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(rs.begin(), rs.end(), rng);
    const auto st = aggregate(rs, Category::reel);
    EXPECT_EQ(st.mean_ratio, base.mean_ratio);
    EXPECT_EQ(st.std_dev, base.std_dev);
    EXPECT_EQ(st.max.id, base.max.id);
    EXPECT_EQ(st.min.id, base.min.id);
    EXPECT_EQ(st.histogram.counts, base.histogram.counts);
  }
  EXPECT_GE(base.mean_ratio, base.min.ratio);
  EXPECT_LE(base.mean_ratio, base.max.ratio);
  EXPECT_EQ(std::accumulate(base.histogram.counts.begin(), base.histogram.counts.end(), std::size_t{0}), 200u);
}

TEST(Rank, OrderAndTies) {
  const std::vector<ComplexityReport> rs{report("3", "b", 128, 64), report("1", "c", 96, 48),
                                         report("2", "a", 128, 26), report("4", "b", 128, 64)};
  const auto easy = rank(rs, Order::easiest_first);
  ASSERT_EQ(easy.size(), 4u);
  EXPECT_EQ(easy[0].id, "2");
  // Equal ratios of 2: by name, then id.
  EXPECT_EQ(easy[1].id, "3");
  EXPECT_EQ(easy[2].id, "4");
  EXPECT_EQ(easy[3].id, "1");
  const auto hard = rank(rs, Order::hardest_first);
  EXPECT_EQ(hard[0].id, "3");
  EXPECT_EQ(hard[3].id, "2");
}

TEST(Histogram, MassAndEdges) {
  const std::vector<double> v{1.0, 1.5, 2.0, 2.5, 3.0};
  const auto h = make_histogram(v, 4);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 1, 1, 2}));
  EXPECT_EQ(h.bin_lower(0), 1.0);
  EXPECT_EQ(h.bin_upper(3), 3.0);
  EXPECT_THROW(make_histogram(v, 0), std::invalid_argument);
  const auto empty = make_histogram(std::vector<double>{}, 3);
  EXPECT_EQ(empty.counts, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Output, CsvAndJson) {
  const std::vector<ComplexityReport> rs{report("1", "Tune, The", 128, 64)};
  const auto csv = reports_to_csv(rs);
  EXPECT_NE(csv.find("\"Tune, The\""), std::string::npos);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "id,name,category,length,lz77_tokens,lz78_tokens,ratio_lz77,ratio_lz78,normalized_ratio");
  const auto j = to_json(rs[0]);
  EXPECT_EQ(j["lz77_tokens"], 64);
  EXPECT_EQ(j["category"], "reel");
  const auto st = to_json(aggregate(rs, Category::reel, 5));
  EXPECT_EQ(st["count"], 1);
  EXPECT_EQ(histogram_to_csv(make_histogram(std::vector<double>{1.0, 2.0}, 2)),
            "bin_lower,bin_upper,count\n1.000000,1.500000,1\n1.500000,2.000000,1\n");
}
