#include <gtest/gtest.h>

#include "dictloops/etymology.hpp"
#include "support.hpp"

using namespace dictloops;
using testing_support::named_graph;

namespace {

ComponentSet one_component(std::vector<NodeId> members) {
  ComponentSet cs;
  Component c;
  std::sort(members.begin(), members.end());
  c.members = members;
  cs.components.push_back(c);
  return cs;
}

}  // namespace

TEST(AttachDates, ShoeAndSneaker) {
  const auto g = named_graph("shoe>sneaker sneaker>shoe");
  const auto d = attach_dates(one_component({g["shoe"], g["sneaker"]}), {{"shoe", 1150, 0}, {"sneaker", 1895, 0}},
                              [&](NodeId v) { return g.graph.node(v).word(); });
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].years, (std::vector<int>{1150, 1895}));
  EXPECT_EQ(d[0].excluded.total(), 0u);
  EXPECT_EQ(*median_pairwise_distance(d[0].years), 745.0);
}

TEST(AttachDates, ExclusionsAreTallied) {
  const auto g = named_graph("a>b b>c c>d d>e e>a");
  const std::vector<DateRecord> dates{{"a", 1700, 0},
                                      {"b", 1664, proper_noun},
                                      {"c", 1800, compound | polysemous},
                                      {"d", 1500, polysemous}};
  const auto d = attach_dates(one_component(g.ids({"a", "b", "c", "d", "e"})), dates,
                              [&](NodeId v) { return g.graph.node(v).word(); });
  EXPECT_EQ(d[0].years, (std::vector<int>{1700}));
  EXPECT_EQ(d[0].excluded.proper_noun, 1u);
  EXPECT_EQ(d[0].excluded.compound, 1u);
  EXPECT_EQ(d[0].excluded.polysemous, 1u);
  EXPECT_EQ(d[0].excluded.no_date, 1u);
  EXPECT_EQ(d[0].excluded.total() + d[0].years.size(), d[0].size);
}

TEST(AttachDates, LookupIsCaseFolded) {
  const auto g = named_graph("Apple>Pie Pie>Apple");
  const auto d = attach_dates(one_component(g.ids({"Apple", "Pie"})), {{"apple", 900, 0}},
                              [&](NodeId v) { return g.graph.node(v).word(); });
  EXPECT_EQ(d[0].years, (std::vector<int>{900}));
}

TEST(MedianPairwise, Examples) {
  EXPECT_EQ(*median_pairwise_distance({1300, 1300, 1300}), 0.0);
  EXPECT_EQ(*median_pairwise_distance({1150, 1895}), 745.0);
  EXPECT_EQ(*median_pairwise_distance({1200, 1300, 1500}), 200.0);
  // pairs {100, 200, 300, 100, 200, 100} -> sorted 100 100 100 200 200 300
  EXPECT_EQ(*median_pairwise_distance({1000, 1100, 1200, 1300}), 150.0);
  EXPECT_FALSE(median_pairwise_distance({1500}).has_value());
  EXPECT_FALSE(median_pairwise_distance({}).has_value());
}

TEST(MedianPairwise, TranslationInvariantAndScaleMonotone) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> years(2 + rng.below(10));
    for (auto& y : years) y = 1000 + static_cast<int>(rng.below(800));
    const double base = *median_pairwise_distance(years);
    auto shifted = years;
    const int delta = static_cast<int>(rng.below(200));
    for (auto& y : shifted) y += delta;
    EXPECT_EQ(*median_pairwise_distance(shifted), base);
    auto scaled = years;
    const int lo = *std::min_element(years.begin(), years.end());
    for (auto& y : scaled) y = lo + 2 * (y - lo);
    EXPECT_EQ(*median_pairwise_distance(scaled), 2 * base);
    EXPECT_GE(*median_pairwise_distance(scaled), base);
  }
}

TEST(Baseline, IdenticalYearsGiveZeros) {
  const auto dist = random_baseline(std::vector<int>(20, 1400), {2, 3, 5}, 50, 9);
  EXPECT_EQ(dist.samples.size(), 150u);
  for (const auto& s : dist.samples) EXPECT_EQ(s.median_pairwise_distance, 0.0);
  EXPECT_EQ(dist.quantile(0.5), 0.0);
}

TEST(Baseline, DeterministicAndThreadIndependent) {
  std::vector<int> pool;
  for (int i = 0; i < 60; ++i) pool.push_back(1100 + 13 * i);
  const auto saved = thread_limit();
  thread_limit() = 1;
  const auto a = random_baseline(pool, {4, 6, 10}, 200, 3);
  thread_limit() = 3;
  const auto b = random_baseline(pool, {4, 6, 10}, 200, 3);
  thread_limit() = saved;
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    EXPECT_EQ(a.samples[i].median_pairwise_distance, b.samples[i].median_pairwise_distance);
  const auto c = random_baseline(pool, {4, 6, 10}, 200, 4);
  EXPECT_NE(a.quantile(0.3), c.quantile(0.3) + 1e9);  // sanity: finite
  EXPECT_EQ(a.size_profile, (std::vector<std::size_t>{4, 6, 10}));
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].trial, i / 3);
    EXPECT_EQ(a.samples[i].pseudo_component, i % 3);
  }
}

TEST(Baseline, ProfileLargerThanPoolIsAnError) {
  EXPECT_THROW(random_baseline({1, 2, 3}, {2, 2}, 10, 0), Error);
  EXPECT_THROW(random_baseline({1, 2, 3}, {1}, 10, 0), Error);
}

TEST(Baseline, TightClustersSitBelowBaseline) {
  // 30 components of 5 years each, every component within +-10 years
  Rng rng(6);
  std::vector<ComponentDates> comps;
  std::vector<int> pool;
  std::vector<std::size_t> profile;
  for (std::uint32_t c = 0; c < 30; ++c) {
    ComponentDates cd;
    cd.component_id = c;
    const int center = 1200 + static_cast<int>(rng.below(700));
    for (int i = 0; i < 5; ++i) cd.years.push_back(center - 10 + static_cast<int>(rng.below(21)));
    cd.size = 5;
    pool.insert(pool.end(), cd.years.begin(), cd.years.end());
    profile.push_back(5);
    comps.push_back(cd);
  }
  const auto stats = component_date_stats(comps);
  const auto dist = random_baseline(pool, profile, 300, 1);
  std::vector<double> real, base;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    real.push_back(stats[i].median_pairwise_distance);
    base.push_back(dist.pseudo_component_median(i));
  }
  const auto t = sign_test(real, base);
  EXPECT_EQ(t.below, 30u);
  EXPECT_LT(t.p_value, 0.01);
}

TEST(SignTest, ExactBinomialTail) {
  // 8 below, 2 above: P(X >= 8 | n = 10) = (45 + 10 + 1) / 1024
  std::vector<double> real(10, 0), base(10, 1);
  real[0] = real[1] = 2;
  const auto t = sign_test(real, base);
  EXPECT_EQ(t.below, 8u);
  EXPECT_EQ(t.above, 2u);
  EXPECT_NEAR(t.p_value, 56.0 / 1024.0, 1e-12);
  EXPECT_EQ(sign_test({1, 1}, {1, 1}).p_value, 1.0);
  EXPECT_THROW(sign_test({1}, {}), Error);
}

TEST(ComponentStats, FewerThanTwoDatedWordsExcluded) {
  std::vector<ComponentDates> comps(3);
  comps[0].years = {1400, 1500};
  comps[1].years = {1700};
  comps[2].years = {1150, 1150, 1150};
  comps[2].component_id = 2;
  const auto stats = component_date_stats(comps);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].mean_year, 1450.0);
  EXPECT_EQ(stats[1].component_id, 2u);
  EXPECT_EQ(stats[1].median_pairwise_distance, 0.0);
}

TEST(MeanDates, Bins) {
  std::vector<ComponentDates> comps(4);
  comps[0].years = {1400, 1500};
  comps[1].years = {1150, 1150};
  comps[2].years = {};
  comps[3].years = {1890, 1910};
  const auto h = mean_dates(comps, 50);
  EXPECT_EQ(h.bins, (std::map<int, std::size_t>{{1150, 1}, {1450, 1}, {1900, 1}}));
  ASSERT_EQ(h.means.size(), 3u);
  EXPECT_EQ(h.means[1].second, 1150.0);
  EXPECT_THROW(mean_dates(comps, 0), Error);
}

TEST(MeanDates, TwoEpochsDominate) {
  Rng rng(2);
  std::vector<ComponentDates> comps;
  for (int c = 0; c < 40; ++c) {
    ComponentDates cd;
    const int center = c % 2 ? 1420 : 1870;
    for (int i = 0; i < 4; ++i) cd.years.push_back(center + static_cast<int>(rng.below(20)));
    comps.push_back(cd);
  }
  const auto h = mean_dates(comps, 50);
  std::vector<std::size_t> counts;
  for (auto [bin, n] : h.bins) counts.push_back(n);
  std::sort(counts.rbegin(), counts.rend());
  ASSERT_GE(counts.size(), 2u);
  EXPECT_EQ(counts[0] + counts[1], 40u);
}
