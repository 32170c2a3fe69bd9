#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "a2dcdr/data.hpp"
#include "a2dcdr/graph_encoders.hpp"
#include "json.hpp"

namespace a2dcdr {

struct RankResult {
  int rank = 0;  // 1-based, ties resolved against the positive
  double hit = 0.0;
  double ndcg = 0.0;
};

RankResult rank_metrics(std::span<const double> scores, std::size_t positive_position, int k);

// HR@K and NDCG@K in percent over `users` evaluated users.
struct DomainMetrics {
  double hr = 0.0;
  double ndcg = 0.0;
  int users = 0;
};

// Scores for [positive, negatives...] of one candidate set.
using CandidateScorer = std::function<Vector(const CandidateSet&)>;

std::vector<RankResult> rank_candidates(std::span<const CandidateSet> sets, const CandidateScorer& scorer, int k);
DomainMetrics aggregate(std::span<const RankResult> results);

// Encodes once, then scores every candidate through fusion and dot product.
class ModelScorer {
 public:
  ModelScorer(const ModelParameters& params, const DomainGraphs& graphs, bool attention);
  Vector operator()(const CandidateSet& set) const;
  const EncodedTables& encoded() const { return encoded_; }

 private:
  EncodedTables encoded_;
  bool attention_;
};

DomainMetrics evaluate_domain(const ModelParameters& params, const DomainGraphs& graphs, Domain domain,
                              std::span<const CandidateSet> sets, int k, bool attention = true);

// Inclusive train-interaction-count ranges; counts below the first lower bound
// fold into the first bucket so the buckets partition every user.
struct SparsityBuckets {
  std::vector<std::pair<int, int>> ranges{{1, 10}, {11, 20}, {21, 30}, {31, std::numeric_limits<int>::max()}};
  int bucket_of(int count) const;
  std::string label(int bucket) const;
};

struct SparsityCell {
  int bucket_a = 0;
  int bucket_b = 0;
  DomainMetrics metrics;
};

// Populated cells only, for candidates of one domain.
std::vector<SparsityCell> sparsity_cells(const DomainDataset& dataset, std::span<const CandidateSet> sets,
                                         std::span<const RankResult> results, const SparsityBuckets& buckets);

struct SparsityReport {
  SparsityBuckets buckets;
  std::array<std::vector<SparsityCell>, 2> cells;
};

SparsityReport sparsity_report(const ModelParameters& params, const DomainDataset& dataset, const DomainGraphs& graphs,
                               const std::array<std::vector<CandidateSet>, 2>& sets, const SparsityBuckets& buckets,
                               int k, bool attention = true);

struct EvalReport {
  std::array<DomainMetrics, 2> domains;
  int k = 10;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::optional<SparsityReport> sparsity;
};

nlohmann::json to_json(const EvalReport& report);
std::string format_table(const EvalReport& report);

// Writes rows "group, user_index, c0..c{d-1}" for the same sampled users in
// every group (h_t_A, h_t_B, h_s_B, and h_s_A when requested).
void export_representations(const ModelParameters& params, const DomainDataset& dataset, const DomainGraphs& graphs,
                            int sample_size, std::uint64_t seed, const std::filesystem::path& path,
                            bool include_specific_a = false);

}  // namespace a2dcdr
