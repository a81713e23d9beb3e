#include <gtest/gtest.h>

#include "campaigns.hpp"
#include "tracefail/report.hpp"

using namespace tracefail;

TEST(Report, HtmlEscape) {
  EXPECT_EQ(html_escape(R"(<a href="x">&'</a>)"), "&lt;a href=&quot;x&quot;&gt;&amp;&#39;&lt;/a&gt;");
  EXPECT_EQ(html_escape("plain"), "plain");
}

class ReportDocs : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    run_ = new tracefail::testing::PipelineRun(
        tracefail::testing::run_pipeline(plan_from_json(tracefail::testing::zero_noise_spec(3, 3, 20, 4))));
  }
  static void TearDownTestSuite() {
    delete run_;
    run_ = nullptr;
  }
  static tracefail::testing::PipelineRun* run_;
};
tracefail::testing::PipelineRun* ReportDocs::run_ = nullptr;

TEST_F(ReportDocs, SummaryKeysAndMetrics) {
  const auto s = summary_json(run_->reports, run_->encoded.table, {}, &run_->campaign.truth, std::nullopt);
  EXPECT_EQ(s["format"], "tracefail.summary");
  EXPECT_EQ(s["settings"]["d"], 5);
  EXPECT_DOUBLE_EQ(s["settings"]["eps_spurious"].get<double>(), 0.2);
  EXPECT_EQ(s["experiment_count"], 12);
  EXPECT_EQ(s["experiments"].size(), 12u);
  EXPECT_FALSE(s.contains("elapsed_seconds"));
  EXPECT_FALSE(s["settings"].contains("workers"));
  EXPECT_DOUBLE_EQ(s["metrics"]["lcs_vmm"]["false_alarm_rate"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(s["metrics"]["lcs_vmm"]["hit_rate"].get<double>(), 1.0);

  const auto bare = summary_json(run_->reports, run_->encoded.table, {}, nullptr, 1.5);
  EXPECT_TRUE(bare["metrics"].is_null());
  EXPECT_DOUBLE_EQ(bare["elapsed_seconds"].get<double>(), 1.5);
}

TEST_F(ReportDocs, ClusterDocumentAndPages) {
  const auto d = run_->encoded.table.size();
  const auto vectors = build_vectors(run_->reports, d, Representation::Vmm);
  const auto sel = select_k(vectors, 2, 6, 0);
  const auto labels = run_->labels();
  const auto c = cluster_json(sel, vectors, run_->encoded.table, {}, &labels);
  EXPECT_EQ(c["format"], "tracefail.cluster");
  EXPECT_EQ(c["best_k"], 3);
  EXPECT_DOUBLE_EQ(c["purity"].get<double>(), 1.0);
  EXPECT_EQ(c["assignments"].size(), 12u);
  EXPECT_EQ(c["clusters"].size(), 3u);
  EXPECT_EQ(c["curve"].size(), sel.curve.size());

  const auto summary = summary_json(run_->reports, run_->encoded.table, {}, &run_->campaign.truth, std::nullopt);
  const auto index = render_index_html(c, summary, std::nullopt);
  EXPECT_NE(index.find("<svg"), std::string::npos);
  EXPECT_NE(index.find("exp/" + run_->reports[0].experiment_id + ".html"), std::string::npos);
  for (const char* ref : {"src=\"http", "href=\"http", "url(http", "<link"}) EXPECT_EQ(index.find(ref), std::string::npos);
  EXPECT_NE(render_index_html(c, summary, std::string("2026-01-01T00:00:00Z")).find("2026-01-01"), std::string::npos);

  const nlohmann::json report = run_->reports[0];
  const nlohmann::json symbols = run_->encoded.table;
  const auto page = render_timeline_html(report, symbols, std::nullopt);
  EXPECT_NE(page.find(run_->reports[0].experiment_id), std::string::npos);
  EXPECT_NE(page.find("spurious"), std::string::npos);
  EXPECT_EQ(page.find("<script src"), std::string::npos);
}
