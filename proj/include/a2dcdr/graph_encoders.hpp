#pragma once

// Embedding tables, light-weight graph propagation encoders and the full
// parameter bundle of the model.

#include <array>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "a2dcdr/alignment.hpp"
#include "a2dcdr/autodiff.hpp"
#include "a2dcdr/config.hpp"
#include "a2dcdr/data.hpp"
#include "a2dcdr/disentangle.hpp"
#include "a2dcdr/representations.hpp"

namespace a2dcdr {

// Bipartite user-item operator with weights 1/sqrt(deg(u) deg(i)) built from
// train interactions only.
struct PropagationGraph {
  int users = 0;
  int items = 0;
  SparseMatrix user_item;  // users x items
  SparseMatrix item_user;  // transpose

  static PropagationGraph build(int users, int items, std::span<const Interaction> edges);
  static PropagationGraph build(const DomainDataset& dataset, Domain domain);
};

struct EmbeddingTables {
  int d = 0;
  std::array<Matrix, 2> user_t;
  std::array<Matrix, 2> user_s;
  std::array<Matrix, 2> item;
};

struct ModelParameters {
  EmbeddingTables tables;
  std::array<ProjectorHead, 2> projector;
  std::array<VariationalNet, 2> variational;
  std::array<Reconstructor, 2> reconstructor;
  int layers = 2;

  // Embeddings, projectors and reconstructors: everything the main objective updates.
  ParameterList main_parameters();
  ConstParameterList main_parameters() const;
  ParameterList variational_parameters();
  ConstParameterList variational_parameters() const;

  // Named view used for checkpoints.
  std::vector<std::pair<std::string, const Matrix*>> named() const;
  std::vector<std::pair<std::string, Matrix*>> named();
};

// Embeddings ~ N(0, 1/d); network weights Glorot-uniform, zero biases.
ModelParameters init_parameters(const DomainDataset& dataset, const TrainingConfig& config, Rng& rng);

// Layer-mean propagation: out = mean_{k=0..L} A^k x, alternating sides.
std::pair<Matrix, Matrix> propagate(const Matrix& users, const Matrix& items, const PropagationGraph& graph, int layers);
std::pair<ad::Var, ad::Var> propagate(const ad::Var& users, const ad::Var& items, const PropagationGraph& graph,
                                      int layers);

using DomainGraphs = std::array<PropagationGraph, 2>;
DomainGraphs build_graphs(const DomainDataset& dataset);

// Full-table encoder outputs for both domains.
struct EncodedTables {
  std::array<Matrix, 2> h_t;
  std::array<Matrix, 2> h_s;
  std::array<Matrix, 2> h_v;
};
EncodedTables encode_tables(const ModelParameters& params, const DomainGraphs& graphs);

struct EncodedVars {
  std::array<ad::Var, 2> h_t;
  std::array<ad::Var, 2> h_s;
  std::array<ad::Var, 2> h_v;
  std::array<ad::Var, 2> u_t;  // raw bound tables
  std::array<ad::Var, 2> u_s;
};
EncodedVars encode_tables(ad::Binder& bind, const ModelParameters& params, const DomainGraphs& graphs);

// Gathers batch rows from the encoded tables: h_t/h_s for `user_batch`,
// h_v per domain for `item_batches`.
DisentangledBatch encode_all(const ModelParameters& params, const DomainGraphs& graphs, std::span<const int> user_batch,
                             const std::array<std::vector<int>, 2>& item_batches);

// Directory of raw little-endian float64 arrays plus manifest.json.
void save_checkpoint(const ModelParameters& params, const std::string& config_hash, const std::filesystem::path& dir);
ModelParameters load_checkpoint(const std::filesystem::path& dir, const DomainDataset& dataset,
                                const TrainingConfig& config);

}  // namespace a2dcdr
