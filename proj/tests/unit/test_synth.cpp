#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace ledger_emd;
using namespace ledger_emd::testing;

namespace {

std::vector<WeightedSubtrees> weigh(const Population& pop, const ChartOfAccounts& chart) {
  return build_all_weighted_subtrees(pop.balances, chart);
}

}  // namespace

TEST(SynthChart, NodeCounts) {
  EXPECT_EQ(generate_chart(1, 1, 1).size(), 4u);
  EXPECT_EQ(generate_chart(1, 3, 3).size(), 80u);
  EXPECT_EQ(generate_chart(1, 3, 4).size(), 170u);
  EXPECT_EQ(generate_chart(1, 2, 12).size(), 2u * (1 + 12 + 144));
  EXPECT_THROW(generate_chart(1, 0, 3), Error);
  EXPECT_THROW(generate_chart(1, 3, 0), Error);
}

TEST(SynthChart, ShapeAndDeterminism) {
  const auto chart = generate_chart(9, 3, 4);
  EXPECT_EQ(chart.node(chart.root_active()).code, "1");
  EXPECT_EQ(chart.node(chart.root_passive()).code, "2");
  EXPECT_EQ(chart.height(Side::Active), 3u);
  EXPECT_EQ(chart.height(Side::Passive), 3u);
  for (const auto& node : chart.nodes()) {
    if (!node.parent) continue;
    const auto& parent = chart.node(*node.parent).code;
    EXPECT_EQ(node.code.substr(0, parent.size()), parent);
    EXPECT_EQ(node.code.size(), parent.size() + 1);
  }
  EXPECT_EQ(chart_to_json(chart), chart_to_json(generate_chart(9, 3, 4)));
}

TEST(SynthPopulation, Deterministic) {
  const auto chart = generate_chart(2, 2, 4);
  SynthConfig cfg;
  cfg.seed = 2;
  cfg.n_companies = 50;
  cfg.n_industries = 5;
  const auto a = generate_population(chart, cfg);
  const auto b = generate_population(chart, cfg);
  std::ostringstream ta, tb, na, nb;
  write_trial_balances(ta, a.balances);
  write_trial_balances(tb, b.balances);
  write_nace_metadata(na, a.meta);
  write_nace_metadata(nb, b.meta);
  EXPECT_EQ(ta.str(), tb.str());
  EXPECT_EQ(na.str(), nb.str());
  cfg.seed = 3;
  std::ostringstream tc;
  write_trial_balances(tc, generate_population(chart, cfg).balances);
  EXPECT_NE(ta.str(), tc.str());
}

TEST(SynthPopulation, MetadataShape) {
  const auto chart = generate_chart(4, 3, 4);
  SynthConfig cfg;
  cfg.seed = 4;
  cfg.n_companies = 120;
  cfg.min_codes = 2;
  cfg.max_codes = 3;
  const auto pop = generate_population(chart, cfg);
  ASSERT_EQ(pop.meta.size(), 120u);
  ASSERT_EQ(pop.balances.size(), 120u);
  EXPECT_EQ(pop.balances.front().company_id, "C0001");
  for (std::size_t c = 0; c < 120; ++c) {
    const auto& codes = pop.meta[c].nace_codes;
    EXPECT_EQ(pop.meta[c].company_id, pop.balances[c].company_id);
    EXPECT_GE(codes.size(), 1u);  // extras may collide with each other
    EXPECT_LE(codes.size(), 3u);
    EXPECT_EQ(codes.count(pop.industry_codes[pop.industry[c]]), 1u);
    for (const auto& [code, value] : pop.balances[c].values) {
      EXPECT_TRUE(chart.find(code).has_value());
      EXPECT_NE(value, 0.0);
      EXPECT_EQ(value, std::round(value * 100.0) / 100.0);
    }
  }
}

TEST(SynthPopulation, VanishingNoiseCollapsesIndustries) {
  const auto chart = generate_chart(5, 3, 4);
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.n_companies = 48;
  cfg.noise = 1e6;
  const auto pop = generate_population(chart, cfg);
  const auto ws = weigh(pop, chart);
  double worst = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    for (std::size_t j = i + 1; j < ws.size(); ++j) {
      if (pop.industry[i] == pop.industry[j]) worst = std::max(worst, company_distance(ws[i], ws[j], chart));
    }
  }
  EXPECT_LT(worst, 0.05);
}

TEST(SynthPopulation, IntraIndustryCloserThanInter) {
  const auto chart = generate_chart(6, 3, 4);
  SynthConfig cfg;
  cfg.seed = 6;
  cfg.n_companies = 120;
  const auto pop = generate_population(chart, cfg);
  const auto d = distance_matrix(weigh(pop, chart), chart, MetricChoice::EmdGdm, 2);
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (pop.industry[i] == pop.industry[j]) {
        intra += d(i, j);
        ++n_intra;
      } else {
        inter += d(i, j);
        ++n_inter;
      }
    }
  }
  EXPECT_LT(intra / n_intra, inter / n_inter);
}

TEST(SynthPopulation, CsvRoundTripRevalidates) {
  const auto chart = generate_chart(7, 2, 5);
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.n_companies = 40;
  const auto pop = generate_population(chart, cfg);

  std::stringstream chart_doc;
  chart_doc << chart_to_json(chart).dump(2);
  const auto chart2 = parse_chart_of_accounts(chart_doc);
  EXPECT_EQ(chart_to_json(chart2), chart_to_json(chart));

  std::stringstream tb;
  write_trial_balances(tb, pop.balances);
  const auto balances = parse_trial_balance(tb, chart2);
  ASSERT_EQ(balances.size(), pop.balances.size());
  for (std::size_t i = 0; i < balances.size(); ++i) EXPECT_EQ(balances[i].values, pop.balances[i].values);

  std::stringstream nace;
  write_nace_metadata(nace, pop.meta);
  const auto meta = parse_nace_metadata(nace);
  ASSERT_EQ(meta.size(), pop.meta.size());
  for (std::size_t i = 0; i < meta.size(); ++i) EXPECT_EQ(meta[i].nace_codes, pop.meta[i].nace_codes);

  // Every company yields weights on both sides.
  for (const auto& ws : build_all_weighted_subtrees(balances, chart2)) {
    EXPECT_FALSE(ws.empty(SubtreeKind::DebitActive));
    EXPECT_FALSE(ws.empty(SubtreeKind::CreditPassive));
  }
}

TEST(SynthPopulation, SharedCodeAppears) {
  const auto chart = generate_chart(8, 3, 4);
  SynthConfig cfg;
  cfg.seed = 8;
  cfg.n_companies = 300;
  const auto pop = generate_population(chart, cfg);
  std::size_t shared = 0;
  for (const auto& m : pop.meta) shared += m.nace_codes.count(std::string(kSharedNaceCode));
  EXPECT_GT(shared, 0u);
  EXPECT_LT(shared, pop.meta.size());
}
