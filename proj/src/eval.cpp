#include "a2dcdr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "a2dcdr/fusion_scoring.hpp"

namespace a2dcdr {

using nlohmann::json;

RankResult rank_metrics(std::span<const double> scores, std::size_t positive_position, int k) {
  if (k < 1) throw std::invalid_argument("rank_metrics: K must be >= 1");
  if (positive_position >= scores.size()) throw std::out_of_range("rank_metrics: positive position out of range");
  const double pos = scores[positive_position];
  int ahead = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == positive_position) continue;
    // Ties and NaN positives count against the positive.
    if (!(scores[i] < pos)) ++ahead;
  }
  RankResult r;
  r.rank = ahead + 1;
  if (r.rank <= k) {
    r.hit = 1.0;
    r.ndcg = 1.0 / std::log2(static_cast<double>(r.rank) + 1.0);
  }
  return r;
}

std::vector<RankResult> rank_candidates(std::span<const CandidateSet> sets, const CandidateScorer& scorer, int k) {
  std::vector<RankResult> out;
  out.reserve(sets.size());
  for (const auto& cs : sets) {
    const Vector scores = scorer(cs);
    if (scores.size() != static_cast<Eigen::Index>(cs.negatives.size() + 1)) {
      throw std::invalid_argument("scorer returned " + std::to_string(scores.size()) + " scores for " +
                                  std::to_string(cs.negatives.size() + 1) + " candidates");
    }
    out.push_back(rank_metrics(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), 0, k));
  }
  return out;
}

DomainMetrics aggregate(std::span<const RankResult> results) {
  DomainMetrics m;
  m.users = static_cast<int>(results.size());
  if (results.empty()) return m;
  double hr = 0.0, ndcg = 0.0;
  for (const auto& r : results) {
    hr += r.hit;
    ndcg += r.ndcg;
  }
  m.hr = 100.0 * hr / static_cast<double>(results.size());
  m.ndcg = 100.0 * ndcg / static_cast<double>(results.size());
  return m;
}

ModelScorer::ModelScorer(const ModelParameters& params, const DomainGraphs& graphs, bool attention)
    : encoded_(encode_tables(params, graphs)), attention_(attention) {}

Vector ModelScorer::operator()(const CandidateSet& set) const {
  const int di = index_of(set.domain);
  const int oi = index_of(other(set.domain));
  const Matrix& items = encoded_.h_v[di];
  Matrix candidates(static_cast<Eigen::Index>(set.negatives.size() + 1), items.cols());
  candidates.row(0) = items.row(set.positive_item);
  for (std::size_t k = 0; k < set.negatives.size(); ++k) {
    candidates.row(static_cast<Eigen::Index>(k + 1)) = items.row(set.negatives[k]);
  }
  const RepTriple reps{encoded_.h_t[oi].row(set.user).transpose(), encoded_.h_t[di].row(set.user).transpose(),
                       encoded_.h_s[di].row(set.user).transpose()};
  return score_candidates(candidates, reps, attention_);
}

DomainMetrics evaluate_domain(const ModelParameters& params, const DomainGraphs& graphs, Domain domain,
                              std::span<const CandidateSet> sets, int k, bool attention) {
  if (sets.empty()) throw std::invalid_argument(std::string("evaluate_domain: no candidate sets for domain ") + name_of(domain));
  for (const auto& cs : sets) {
    if (cs.domain != domain) throw std::invalid_argument("evaluate_domain: candidate set from the wrong domain");
  }
  const ModelScorer scorer(params, graphs, attention);
  const auto results = rank_candidates(sets, std::cref(scorer), k);
  return aggregate(results);
}

int SparsityBuckets::bucket_of(int count) const {
  if (ranges.empty()) throw std::invalid_argument("SparsityBuckets: no ranges");
  if (count < ranges.front().first) return 0;
  for (std::size_t b = 0; b < ranges.size(); ++b) {
    if (count >= ranges[b].first && count <= ranges[b].second) return static_cast<int>(b);
  }
  return static_cast<int>(ranges.size()) - 1;
}

std::string SparsityBuckets::label(int bucket) const {
  const auto& [lo, hi] = ranges.at(static_cast<std::size_t>(bucket));
  if (hi == std::numeric_limits<int>::max()) return ">" + std::to_string(lo - 1);
  return std::to_string(lo) + "-" + std::to_string(hi);
}

std::vector<SparsityCell> sparsity_cells(const DomainDataset& dataset, std::span<const CandidateSet> sets,
                                         std::span<const RankResult> results, const SparsityBuckets& buckets) {
  if (sets.size() != results.size()) throw std::invalid_argument("sparsity_cells: sets and results differ in length");
  std::map<std::pair<int, int>, std::vector<RankResult>> cells;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const int u = sets[i].user;
    const int ba = buckets.bucket_of(static_cast<int>(dataset.user_train_items[0][u].size()));
    const int bb = buckets.bucket_of(static_cast<int>(dataset.user_train_items[1][u].size()));
    cells[{ba, bb}].push_back(results[i]);
  }
  std::vector<SparsityCell> out;
  for (const auto& [key, rs] : cells) out.push_back({key.first, key.second, aggregate(rs)});
  return out;
}

SparsityReport sparsity_report(const ModelParameters& params, const DomainDataset& dataset, const DomainGraphs& graphs,
                               const std::array<std::vector<CandidateSet>, 2>& sets, const SparsityBuckets& buckets,
                               int k, bool attention) {
  const ModelScorer scorer(params, graphs, attention);
  SparsityReport report;
  report.buckets = buckets;
  for (int di = 0; di < 2; ++di) {
    const auto results = rank_candidates(sets[di], std::cref(scorer), k);
    report.cells[di] = sparsity_cells(dataset, sets[di], results, buckets);
  }
  return report;
}

json to_json(const EvalReport& report) {
  json j;
  j["k"] = report.k;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  for (Domain d : kDomains) {
    const auto& m = report.domains[index_of(d)];
    j["domains"][name_of(d)] = {{"hr", m.hr}, {"ndcg", m.ndcg}, {"users", m.users}};
  }
  if (report.sparsity) {
    const auto& sp = *report.sparsity;
    for (Domain d : kDomains) {
      json cells = json::array();
      for (const auto& c : sp.cells[index_of(d)]) {
        cells.push_back({{"bucket_A", sp.buckets.label(c.bucket_a)},
                         {"bucket_B", sp.buckets.label(c.bucket_b)},
                         {"hr", c.metrics.hr},
                         {"ndcg", c.metrics.ndcg},
                         {"users", c.metrics.users}});
      }
      j["sparsity"][name_of(d)] = cells;
    }
  }
  return j;
}

std::string format_table(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  const std::string k = std::to_string(report.k);
  out << std::left << std::setw(8) << "Domain" << std::right << std::setw(10) << ("HR@" + k) << std::setw(10)
      << ("NDCG@" + k) << std::setw(8) << "Users" << '\n';
  for (Domain d : kDomains) {
    const auto& m = report.domains[index_of(d)];
    out << std::left << std::setw(8) << name_of(d) << std::right << std::setw(10) << m.hr << std::setw(10) << m.ndcg
        << std::setw(8) << m.users << '\n';
  }
  if (report.sparsity) {
    const auto& sp = *report.sparsity;
    for (Domain d : kDomains) {
      out << "\nSparsity cells, candidates of domain " << name_of(d) << " (train counts A x B)\n";
      out << std::left << std::setw(10) << "A" << std::setw(10) << "B" << std::right << std::setw(10) << ("HR@" + k)
          << std::setw(10) << ("NDCG@" + k) << std::setw(8) << "Users" << '\n';
      for (const auto& c : sp.cells[index_of(d)]) {
        out << std::left << std::setw(10) << sp.buckets.label(c.bucket_a) << std::setw(10)
            << sp.buckets.label(c.bucket_b) << std::right << std::setw(10) << c.metrics.hr << std::setw(10)
            << c.metrics.ndcg << std::setw(8) << c.metrics.users << '\n';
      }
    }
  }
  return out.str();
}

void export_representations(const ModelParameters& params, const DomainDataset& dataset, const DomainGraphs& graphs,
                            int sample_size, std::uint64_t seed, const std::filesystem::path& path,
                            bool include_specific_a) {
  if (sample_size < 1 || sample_size > dataset.user_count) {
    throw std::invalid_argument("export_representations: sample_size " + std::to_string(sample_size) +
                                " exceeds the " + std::to_string(dataset.user_count) + " available users");
  }
  Rng rng(seed);
  std::vector<int> users(static_cast<std::size_t>(dataset.user_count));
  std::iota(users.begin(), users.end(), 0);
  std::shuffle(users.begin(), users.end(), rng);
  users.resize(static_cast<std::size_t>(sample_size));

  const EncodedTables enc = encode_tables(params, graphs);
  std::vector<std::pair<std::string, const Matrix*>> groups{
      {"h_t_A", &enc.h_t[0]}, {"h_t_B", &enc.h_t[1]}, {"h_s_B", &enc.h_s[1]}};
  if (include_specific_a) groups.emplace_back("h_s_A", &enc.h_s[0]);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("I/O error: cannot write " + path.string());
  out << "group\tuser_index";
  for (int c = 0; c < params.tables.d; ++c) out << "\tc" << c;
  out << '\n';
  out << std::setprecision(17);
  for (const auto& [name, table] : groups) {
    for (int u : users) {
      out << name << '\t' << u;
      for (Eigen::Index c = 0; c < table->cols(); ++c) out << '\t' << (*table)(u, c);
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("I/O error while writing " + path.string());
}

}  // namespace a2dcdr
