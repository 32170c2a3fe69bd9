#include "a2dcdr/graph_encoders.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace a2dcdr {

namespace fs = std::filesystem;
using nlohmann::json;

PropagationGraph PropagationGraph::build(int users, int items, std::span<const Interaction> edges) {
  std::vector<Interaction> unique(edges.begin(), edges.end());
  std::sort(unique.begin(), unique.end(),
            [](const Interaction& a, const Interaction& b) { return a.user != b.user ? a.user < b.user : a.item < b.item; });
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<double> user_deg(static_cast<std::size_t>(users), 0.0);
  std::vector<double> item_deg(static_cast<std::size_t>(items), 0.0);
  for (const auto& e : unique) {
    if (e.user < 0 || e.user >= users || e.item < 0 || e.item >= items) {
      throw std::out_of_range("PropagationGraph: edge (" + std::to_string(e.user) + ", " + std::to_string(e.item) +
                              ") outside graph bounds");
    }
    user_deg[static_cast<std::size_t>(e.user)] += 1.0;
    item_deg[static_cast<std::size_t>(e.item)] += 1.0;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(unique.size());
  for (const auto& e : unique) {
    const double w = 1.0 / std::sqrt(user_deg[static_cast<std::size_t>(e.user)] * item_deg[static_cast<std::size_t>(e.item)]);
    triplets.emplace_back(e.user, e.item, w);
  }
  PropagationGraph g;
  g.users = users;
  g.items = items;
  g.user_item.resize(users, items);
  g.user_item.setFromTriplets(triplets.begin(), triplets.end());
  g.item_user = g.user_item.transpose();
  return g;
}

PropagationGraph PropagationGraph::build(const DomainDataset& dataset, Domain domain) {
  return build(dataset.user_count, dataset.item_count(domain), dataset.train_of(domain));
}

namespace {

void collect_main(auto& params, auto& out) {
  for (int di = 0; di < 2; ++di) {
    out.push_back(&params.tables.user_t[di]);
    out.push_back(&params.tables.user_s[di]);
    out.push_back(&params.tables.item[di]);
  }
  for (auto& p : params.projector) p.collect(out);
  for (auto& r : params.reconstructor) r.collect(out);
}

template <typename Ptr, typename Params>
std::vector<std::pair<std::string, Ptr>> named_impl(Params& params) {
  std::vector<std::pair<std::string, Ptr>> out;
  auto add_mlp = [&](const std::string& prefix, auto& mlp) {
    for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
      out.emplace_back(prefix + ".layer" + std::to_string(i) + ".weight", &mlp.layers[i].weight);
      out.emplace_back(prefix + ".layer" + std::to_string(i) + ".bias", &mlp.layers[i].bias);
    }
  };
  for (Domain d : kDomains) {
    const int di = index_of(d);
    const std::string tag = name_of(d);
    out.emplace_back("user_t_" + tag, &params.tables.user_t[di]);
    out.emplace_back("user_s_" + tag, &params.tables.user_s[di]);
    out.emplace_back("item_" + tag, &params.tables.item[di]);
    add_mlp("projector_" + tag, params.projector[di]);
    add_mlp("reconstructor_" + tag, params.reconstructor[di]);
    add_mlp("variational_" + tag + ".trunk", params.variational[di].trunk);
    out.emplace_back("variational_" + tag + ".mean.weight", &params.variational[di].mean_head.weight);
    out.emplace_back("variational_" + tag + ".mean.bias", &params.variational[di].mean_head.bias);
    out.emplace_back("variational_" + tag + ".logvar.weight", &params.variational[di].logvar_head.weight);
    out.emplace_back("variational_" + tag + ".logvar.bias", &params.variational[di].logvar_head.bias);
  }
  return out;
}

}  // namespace

ParameterList ModelParameters::main_parameters() {
  ParameterList out;
  collect_main(*this, out);
  return out;
}

ConstParameterList ModelParameters::main_parameters() const {
  ConstParameterList out;
  collect_main(*this, out);
  return out;
}

ParameterList ModelParameters::variational_parameters() {
  ParameterList out;
  for (auto& v : variational) v.collect(out);
  return out;
}

ConstParameterList ModelParameters::variational_parameters() const {
  ConstParameterList out;
  for (const auto& v : variational) v.collect(out);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParameters::named() const {
  return named_impl<const Matrix*>(*this);
}

std::vector<std::pair<std::string, Matrix*>> ModelParameters::named() { return named_impl<Matrix*>(*this); }

ModelParameters init_parameters(const DomainDataset& dataset, const TrainingConfig& config, Rng& rng) {
  if (config.d < 1) throw ConfigError("d", "must be >= 1");
  const int d = config.d;
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  auto table = [&](int rows) {
    Matrix m(rows, d);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = normal(rng);
    return m;
  };
  ModelParameters p;
  p.layers = config.layers;
  p.tables.d = d;
  for (int di = 0; di < 2; ++di) {
    p.tables.user_t[di] = table(dataset.user_count);
    p.tables.user_s[di] = table(dataset.user_count);
    p.tables.item[di] = table(dataset.item_counts[di]);
  }
  for (int di = 0; di < 2; ++di) {
    p.projector[di] = make_projector(d, rng);
    p.variational[di] = VariationalNet::make(d, rng, config.logvar_min, config.logvar_max);
    p.reconstructor[di] = make_reconstructor(d, rng);
  }
  return p;
}

namespace {

void check_graph(const Matrix& users, const Matrix& items, const PropagationGraph& graph) {
  if (users.rows() != graph.users || items.rows() != graph.items || users.cols() != items.cols()) {
    throw std::invalid_argument("propagate: tables (" + std::to_string(users.rows()) + " users, " +
                                std::to_string(items.rows()) + " items) do not match graph (" +
                                std::to_string(graph.users) + ", " + std::to_string(graph.items) + ")");
  }
}

}  // namespace

std::pair<Matrix, Matrix> propagate(const Matrix& users, const Matrix& items, const PropagationGraph& graph,
                                    int layers) {
  if (layers < 0) throw std::invalid_argument("propagate: layers must be >= 0");
  check_graph(users, items, graph);
  Matrix u = users, v = items;
  Matrix u_sum = users, v_sum = items;
  for (int k = 0; k < layers; ++k) {
    Matrix u_next = graph.user_item * v;
    Matrix v_next = graph.item_user * u;
    u = std::move(u_next);
    v = std::move(v_next);
    u_sum += u;
    v_sum += v;
  }
  const double inv = 1.0 / static_cast<double>(layers + 1);
  return {u_sum * inv, v_sum * inv};
}

std::pair<ad::Var, ad::Var> propagate(const ad::Var& users, const ad::Var& items, const PropagationGraph& graph,
                                      int layers) {
  if (layers < 0) throw std::invalid_argument("propagate: layers must be >= 0");
  check_graph(users.value(), items.value(), graph);
  ad::Var u = users, v = items;
  ad::Var u_sum = users, v_sum = items;
  for (int k = 0; k < layers; ++k) {
    ad::Var u_next = ad::spmm(graph.user_item, graph.item_user, v);
    ad::Var v_next = ad::spmm(graph.item_user, graph.user_item, u);
    u = u_next;
    v = v_next;
    u_sum = u_sum + u;
    v_sum = v_sum + v;
  }
  const double inv = 1.0 / static_cast<double>(layers + 1);
  return {ad::scale(u_sum, inv), ad::scale(v_sum, inv)};
}

DomainGraphs build_graphs(const DomainDataset& dataset) {
  return {PropagationGraph::build(dataset, Domain::A), PropagationGraph::build(dataset, Domain::B)};
}

EncodedTables encode_tables(const ModelParameters& params, const DomainGraphs& graphs) {
  EncodedTables out;
  for (int di = 0; di < 2; ++di) {
    auto [h_t, h_v] = propagate(params.tables.user_t[di], params.tables.item[di], graphs[di], params.layers);
    auto [h_s, unused] = propagate(params.tables.user_s[di], params.tables.item[di], graphs[di], params.layers);
    (void)unused;
    out.h_t[di] = std::move(h_t);
    out.h_v[di] = std::move(h_v);
    out.h_s[di] = std::move(h_s);
  }
  return out;
}

EncodedVars encode_tables(ad::Binder& bind, const ModelParameters& params, const DomainGraphs& graphs) {
  EncodedVars out;
  for (int di = 0; di < 2; ++di) {
    out.u_t[di] = bind(params.tables.user_t[di]);
    out.u_s[di] = bind(params.tables.user_s[di]);
    const ad::Var items = bind(params.tables.item[di]);
    auto [h_t, h_v] = propagate(out.u_t[di], items, graphs[di], params.layers);
    // Only the user side of the specific pass is used; its item output has no consumer.
    auto [h_s, unused] = propagate(out.u_s[di], items, graphs[di], params.layers);
    (void)unused;
    out.h_t[di] = h_t;
    out.h_v[di] = h_v;
    out.h_s[di] = h_s;
  }
  return out;
}

namespace {

Matrix gather(const Matrix& m, std::span<const int> rows, const char* what) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) {
      throw std::out_of_range(std::string("encode_all: ") + what + " index " + std::to_string(rows[i]) +
                              " outside [0, " + std::to_string(m.rows()) + ")");
    }
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

DisentangledBatch encode_all(const ModelParameters& params, const DomainGraphs& graphs, std::span<const int> user_batch,
                             const std::array<std::vector<int>, 2>& item_batches) {
  const EncodedTables enc = encode_tables(params, graphs);
  DisentangledBatch batch;
  for (int di = 0; di < 2; ++di) {
    batch.h_t[di] = gather(enc.h_t[di], user_batch, "user");
    batch.h_s[di] = gather(enc.h_s[di], user_batch, "user");
    batch.h_v[di] = gather(enc.h_v[di], item_batches[di], "item");
  }
  return batch;
}

void save_checkpoint(const ModelParameters& params, const std::string& config_hash, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["d"] = params.tables.d;
  manifest["layers"] = params.layers;
  manifest["config_hash"] = config_hash;
  for (const auto& [name, m] : params.named()) {
    const fs::path file = dir / (name + ".bin");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    // Row-major on disk so the files read naturally in other tools.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = *m;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    manifest["arrays"][name] = {{"file", name + ".bin"}, {"shape", {m->rows(), m->cols()}}};
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

ModelParameters load_checkpoint(const fs::path& dir, const DomainDataset& dataset, const TrainingConfig& config) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json under " + dir.string());
  const json manifest = json::parse(in);
  for (const auto& [key, want] : {std::pair<const char*, int>{"d", config.d}, {"layers", config.layers}}) {
    const int got = manifest.at(key).get<int>();
    if (got != want) {
      throw std::runtime_error("checkpoint " + dir.string() + " has " + key + " = " + std::to_string(got) +
                               ", config asks for " + std::to_string(want));
    }
  }
  Rng scratch(0);
  ModelParameters params = init_parameters(dataset, config, scratch);
  for (auto& [name, m] : params.named()) {
    const auto& entry = manifest.at("arrays").at(name);
    const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
    if (shape.size() != 2 || shape[0] != m->rows() || shape[1] != m->cols()) {
      throw std::runtime_error("checkpoint array " + name + " has a shape inconsistent with the dataset");
    }
    std::ifstream f(dir / entry.at("file").get<std::string>(), std::ios::binary);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(m->rows(), m->cols());
    f.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!f) throw std::runtime_error("checkpoint array " + name + " is truncated");
    *m = rm;
  }
  return params;
}

}  // namespace a2dcdr
