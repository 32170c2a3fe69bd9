#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string_view>
#include <stdexcept>
#include <string>
#include <vector>

#include "a2dcdr/autodiff.hpp"

namespace a2dcdr {

enum class Domain : int { A = 0, B = 1 };

inline constexpr std::array<Domain, 2> kDomains{Domain::A, Domain::B};
inline int index_of(Domain d) { return static_cast<int>(d); }
inline Domain other(Domain d) { return d == Domain::A ? Domain::B : Domain::A; }
inline const char* name_of(Domain d) { return d == Domain::A ? "A" : "B"; }
Domain parse_domain(const std::string& tag);

using Rng = std::mt19937_64;

struct Interaction {
  int user = 0;
  int item = 0;
  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct LabeledInteraction {
  int user = 0;
  int item = 0;
  double label = 0.0;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two implicit-feedback domains over one shared user set. Immutable once built
// by finalize(); all lookups are read-only afterwards.
struct DomainDataset {
  int user_count = 0;
  std::array<int, 2> item_counts{0, 0};
  std::array<std::vector<Interaction>, 2> train;
  std::array<std::vector<Interaction>, 2> test;
  // Sorted train ∪ test items per user.
  std::array<std::vector<std::vector<int>>, 2> user_items;
  // Train-only items per user (sorted); drives propagation and sparsity buckets.
  std::array<std::vector<std::vector<int>>, 2> user_train_items;

  // Original id vocabularies; position = contiguous index.
  std::vector<std::string> user_ids;
  std::array<std::vector<std::string>, 2> item_ids;

  int item_count(Domain d) const { return item_counts[index_of(d)]; }
  const std::vector<Interaction>& train_of(Domain d) const { return train[index_of(d)]; }
  const std::vector<Interaction>& test_of(Domain d) const { return test[index_of(d)]; }
  const std::vector<int>& items_of(Domain d, int user) const { return user_items[index_of(d)][user]; }
  bool interacted(Domain d, int user, int item) const;

  friend bool operator==(const DomainDataset&, const DomainDataset&) = default;

  // Rebuilds the per-user sets from train/test and checks every invariant.
  void finalize();
  void validate() const;
};

// ---- ingestion ----

struct LoadOptions {
  char delimiter = '\t';
  bool skip_header = false;
};

// One file per domain: user_id, item_id[, timestamp]. Leave-one-out split
// (latest row per user per domain, by timestamp when present, else file order)
// unless explicit test files are provided.
DomainDataset load_interactions(const std::filesystem::path& domain_a, const std::filesystem::path& domain_b,
                                const LoadOptions& options = {},
                                const std::filesystem::path& test_a = {},
                                const std::filesystem::path& test_b = {});

// Single file: user_id, item_id, domain_tag[, timestamp]; tags are A/B.
DomainDataset load_tagged_interactions(const std::filesystem::path& path, const LoadOptions& options = {});

// ---- synthesis ----

struct SyntheticSpec {
  int user_count = 500;
  std::array<int, 2> item_counts{200, 200};
  int latent_dim = 8;
  double shared_strength = 0.8;
  double exclusive_strength = 0.5;
  double noise = 0.5;
  double interactions_per_user = 12.0;  // mean per domain
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  DomainDataset dataset;
  std::array<Matrix, 2> user_latents;  // preferences driving each domain
  std::array<Matrix, 2> item_latents;
};

SyntheticDataset synthesize_dataset(const SyntheticSpec& spec);

// ---- sampling ----

std::vector<LabeledInteraction> sample_training_negatives(const DomainDataset& dataset, Domain domain,
                                                          std::span<const Interaction> positives, int ratio,
                                                          Rng& rng);

struct CandidateSet {
  int user = 0;
  Domain domain = Domain::A;
  int positive_item = 0;
  std::vector<int> negatives;
  std::uint64_t seed = 0;
};

struct CandidateBuild {
  std::vector<CandidateSet> sets;
  int skipped_users = 0;
};

inline constexpr int kEvalNegatives = 999;

CandidateBuild build_candidate_sets(const DomainDataset& dataset, Domain domain, std::uint64_t seed,
                                    int negatives = kEvalNegatives);

// ---- persistence ----

// Writes train/test rows, id vocabularies and a manifest.json describing counts.
void save_dataset(const DomainDataset& dataset, const std::filesystem::path& dir);
DomainDataset load_dataset(const std::filesystem::path& dir);

void save_candidates(std::span<const CandidateSet> sets, const std::filesystem::path& path);
std::vector<CandidateSet> load_candidates(const std::filesystem::path& path);

// FNV-1a over a sequence of files' bytes, rendered as 16 hex digits.
std::string fingerprint_files(std::span<const std::filesystem::path> files);
std::string fnv1a_hex(std::string_view bytes);

}  // namespace a2dcdr
