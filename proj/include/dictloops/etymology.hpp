#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dictloops/decompose.hpp"
#include "dictloops/ingest.hpp"
#include "dictloops/parallel.hpp"
#include "dictloops/random.hpp"

namespace dictloops {

struct ExclusionTally {
  std::size_t proper_noun = 0;
  std::size_t compound = 0;
  std::size_t polysemous = 0;
  std::size_t no_date = 0;

  std::size_t total() const { return proper_noun + compound + polysemous + no_date; }
};

struct ComponentDates {
  std::uint32_t component_id = 0;
  std::size_t size = 0;
  std::vector<int> years;  // in member order
  ExclusionTally excluded;
};

/// Dates of each component's members, looked up by the member's first lemma.
/// A member carrying several flags is tallied under the first of
/// proper_noun, compound, polysemous, so tallies + years = size.
inline std::vector<ComponentDates> attach_dates(const ComponentSet& cs, const std::vector<DateRecord>& dates,
                                                const std::function<std::string(NodeId)>& word_of) {
  std::unordered_map<std::string, const DateRecord*> by_word;
  for (const auto& d : dates) by_word.emplace(d.word, &d);
  std::vector<ComponentDates> result;
  for (const auto& c : cs.components) {
    ComponentDates cd;
    cd.component_id = c.id;
    cd.size = c.members.size();
    for (NodeId v : c.members) {
      const auto it = by_word.find(fold_case(word_of(v)));
      if (it == by_word.end()) ++cd.excluded.no_date;
      else if (it->second->flags & proper_noun) ++cd.excluded.proper_noun;
      else if (it->second->flags & compound) ++cd.excluded.compound;
      else if (it->second->flags & polysemous) ++cd.excluded.polysemous;
      else cd.years.push_back(it->second->year);
    }
    result.push_back(std::move(cd));
  }
  return result;
}

inline double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2;
}

/// Median over all unordered pairs of |year_i - year_j|; nullopt for fewer
/// than two years.
inline std::optional<double> median_pairwise_distance(const std::vector<int>& years) {
  if (years.size() < 2) return std::nullopt;
  std::vector<double> gaps;
  gaps.reserve(years.size() * (years.size() - 1) / 2);
  for (std::size_t i = 0; i < years.size(); ++i)
    for (std::size_t j = i + 1; j < years.size(); ++j) gaps.push_back(std::abs(years[i] - years[j]));
  return median_of(gaps);
}

inline double mean_year(const std::vector<int>& years) {
  double s = 0;
  for (int y : years) s += y;
  return s / static_cast<double>(years.size());
}

struct BaselineSample {
  std::size_t trial = 0;
  std::size_t pseudo_component = 0;
  double median_pairwise_distance = 0;
};

struct BaselineDistribution {
  std::vector<BaselineSample> samples;  // trial-major
  std::vector<std::size_t> size_profile;
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  /// q in [0, 1], linear interpolation between order statistics.
  double quantile(double q) const {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.median_pairwise_distance);
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0;
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  }

  /// Median over trials of pseudo-component i's median pairwise distance.
  double pseudo_component_median(std::size_t i) const {
    std::vector<double> v;
    for (const auto& s : samples)
      if (s.pseudo_component == i) v.push_back(s.median_pairwise_distance);
    return median_of(v);
  }
};

/// Null model: shuffle the pooled years and cut them into pseudo-components
/// with the real size profile. Trial t uses seed + t, so results do not
/// depend on how trials are scheduled.
inline BaselineDistribution random_baseline(const std::vector<int>& all_years, const std::vector<std::size_t>& size_profile,
                                            std::size_t trials = 1000, std::uint64_t seed = 0) {
  std::size_t needed = 0;
  for (auto s : size_profile) {
    if (s < 2) throw Error("pseudo-components need at least 2 years");
    needed += s;
  }
  if (needed > all_years.size())
    throw Error("size profile needs " + std::to_string(needed) + " years but the pool has " +
                std::to_string(all_years.size()));
  BaselineDistribution dist;
  dist.size_profile = size_profile;
  dist.trials = trials;
  dist.seed = seed;
  dist.samples.resize(trials * size_profile.size());
  parallel_for(trials, [&](std::size_t t) {
    std::vector<int> pool = all_years;
    Rng rng(seed + t);
    rng.shuffle(std::span<int>(pool));
    std::size_t offset = 0;
    for (std::size_t p = 0; p < size_profile.size(); ++p) {
      std::vector<int> part(pool.begin() + static_cast<std::ptrdiff_t>(offset),
                            pool.begin() + static_cast<std::ptrdiff_t>(offset + size_profile[p]));
      offset += size_profile[p];
      dist.samples[t * size_profile.size() + p] = {t, p, *median_pairwise_distance(part)};
    }
  });
  return dist;
}

struct ComponentDateStats {
  std::uint32_t component_id = 0;
  std::size_t n = 0;
  double median_pairwise_distance = 0;
  double mean_year = 0;
};

/// Statistics for components with at least two dated members.
inline std::vector<ComponentDateStats> component_date_stats(const std::vector<ComponentDates>& comps) {
  std::vector<ComponentDateStats> out;
  for (const auto& c : comps) {
    if (c.years.size() < 2) continue;
    out.push_back({c.component_id, c.years.size(), *median_pairwise_distance(c.years), mean_year(c.years)});
  }
  return out;
}

struct MeanDateHistogram {
  int bin_width = 50;
  std::map<int, std::size_t> bins;  // bin start -> components
  std::vector<std::pair<std::uint32_t, double>> means;
};

/// Histogram of per-component mean years over [start, start + bin_width) bins.
/// Components without any dated member are skipped.
inline MeanDateHistogram mean_dates(const std::vector<ComponentDates>& comps, int bin_width = 50) {
  if (bin_width <= 0) throw Error("bin width must be positive");
  MeanDateHistogram h;
  h.bin_width = bin_width;
  for (const auto& c : comps) {
    if (c.years.empty()) continue;
    const double m = mean_year(c.years);
    h.means.emplace_back(c.component_id, m);
    ++h.bins[static_cast<int>(std::floor(m / bin_width)) * bin_width];
  }
  return h;
}

struct SignTest {
  std::size_t below = 0;  // real < baseline
  std::size_t above = 0;
  std::size_t ties = 0;
  double p_value = 1;     // one-sided, H1: real tends to be below baseline
};

/// Exact one-sided sign test on paired values; ties are dropped.
inline SignTest sign_test(const std::vector<double>& real, const std::vector<double>& baseline) {
  if (real.size() != baseline.size()) throw Error("sign test needs paired samples");
  SignTest t;
  for (std::size_t i = 0; i < real.size(); ++i) {
    if (real[i] < baseline[i]) ++t.below;
    else if (real[i] > baseline[i]) ++t.above;
    else ++t.ties;
  }
  const std::size_t n = t.below + t.above;
  // P(X >= below), X ~ Binomial(n, 1/2), summed in log space
  double p = 0;
  for (std::size_t k = t.below; k <= n; ++k)
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  t.p_value = std::min(1.0, p);
  return t;
}

}  // namespace dictloops
