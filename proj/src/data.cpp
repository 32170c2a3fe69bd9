#include "a2dcdr/data.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace a2dcdr {

namespace fs = std::filesystem;
using nlohmann::json;

Domain parse_domain(const std::string& tag) {
  if (tag == "A" || tag == "a" || tag == "0") return Domain::A;
  if (tag == "B" || tag == "b" || tag == "1") return Domain::B;
  throw DataError("unknown domain tag '" + tag + "' (expected A or B)");
}

bool DomainDataset::interacted(Domain d, int user, int item) const {
  const auto& items = user_items[index_of(d)][user];
  return std::binary_search(items.begin(), items.end(), item);
}

void DomainDataset::finalize() {
  for (Domain d : kDomains) {
    const int di = index_of(d);
    auto& all = user_items[di];
    auto& tr = user_train_items[di];
    all.assign(user_count, {});
    tr.assign(user_count, {});
    for (const auto& x : train[di]) {
      all[x.user].push_back(x.item);
      tr[x.user].push_back(x.item);
    }
    for (const auto& x : test[di]) all[x.user].push_back(x.item);
    for (auto& v : all) std::sort(v.begin(), v.end());
    for (auto& v : tr) std::sort(v.begin(), v.end());
  }
  validate();
}

void DomainDataset::validate() const {
  if (user_count <= 0) throw DataError("dataset has no users");
  for (Domain d : kDomains) {
    const int di = index_of(d);
    if (item_counts[di] <= 0) throw DataError(std::string("domain ") + name_of(d) + " has no items");
    auto check_range = [&](const std::vector<Interaction>& rows, const char* split) {
      for (const auto& x : rows) {
        if (x.user < 0 || x.user >= user_count || x.item < 0 || x.item >= item_counts[di]) {
          throw DataError(std::string("domain ") + name_of(d) + " " + split + ": index out of range (user " +
                          std::to_string(x.user) + ", item " + std::to_string(x.item) + ")");
        }
      }
    };
    check_range(train[di], "train");
    check_range(test[di], "test");
    if (user_items[di].size() != static_cast<std::size_t>(user_count)) {
      throw DataError("per-user item sets not built; call finalize()");
    }
    for (int u = 0; u < user_count; ++u) {
      const auto& tr = user_train_items[di][u];
      if (std::adjacent_find(tr.begin(), tr.end()) != tr.end()) {
        throw DataError(std::string("domain ") + name_of(d) + ": duplicate train pair for user " + std::to_string(u));
      }
    }
    std::unordered_set<std::int64_t> seen_test;
    for (const auto& x : test[di]) {
      const auto key = static_cast<std::int64_t>(x.user) * item_counts[di] + x.item;
      if (!seen_test.insert(key).second) {
        throw DataError(std::string("domain ") + name_of(d) + ": duplicate test pair for user " +
                        std::to_string(x.user));
      }
      const auto& tr = user_train_items[di][x.user];
      if (std::binary_search(tr.begin(), tr.end(), x.item)) {
        throw DataError(std::string("domain ") + name_of(d) + ": test positive (" + std::to_string(x.user) + ", " +
                        std::to_string(x.item) + ") also appears in train");
      }
    }
  }
}

namespace {

struct RawRow {
  std::string user;
  std::string item;
  double timestamp = 0.0;
  std::size_t order = 0;
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delimiter)) fields.push_back(trim(field));
  if (!line.empty() && line.back() == delimiter) fields.emplace_back();
  return fields;
}

double parse_timestamp(const std::string& text, const fs::path& path, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed timestamp '" + text + "'");
  }
}

// Reads rows; `tag_column` >= 0 routes each row into one of the two outputs.
void read_rows(const fs::path& path, const LoadOptions& options, int tag_column,
               std::array<std::vector<RawRow>, 2>& out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t order = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && options.skip_header) continue;
    if (trim(line).empty()) continue;
    const auto fields = split(line, options.delimiter);
    const std::size_t required = tag_column >= 0 ? 3 : 2;
    if (fields.size() < required || fields.size() > required + 1) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(required) +
                      " or " + std::to_string(required + 1) + " fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty user or item id");
    }
    RawRow row{fields[0], fields[1], 0.0, order++};
    if (fields.size() == required + 1) row.timestamp = parse_timestamp(fields[required], path, line_no);
    int domain = 0;
    if (tag_column >= 0) {
      try {
        domain = index_of(parse_domain(fields[static_cast<std::size_t>(tag_column)]));
      } catch (const DataError& e) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    out[domain].push_back(std::move(row));
  }
}

class Vocabulary {
 public:
  int intern(const std::string& id) {
    auto [it, inserted] = index_.emplace(id, static_cast<int>(ids_.size()));
    if (inserted) ids_.push_back(id);
    return it->second;
  }
  int find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
  }
  std::size_t size() const { return ids_.size(); }
  std::vector<std::string> take() { return std::move(ids_); }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> ids_;
};

DomainDataset assemble(std::array<std::vector<RawRow>, 2> rows, std::array<std::vector<RawRow>, 2>* explicit_test) {
  if (rows[0].empty() && rows[1].empty()) throw DataError("no interactions");
  for (Domain d : kDomains) {
    if (rows[index_of(d)].empty()) throw DataError(std::string("no interactions in domain ") + name_of(d));
  }

  std::array<std::unordered_set<std::string>, 2> users_in;
  for (int di = 0; di < 2; ++di) {
    for (const auto& r : rows[di]) users_in[di].insert(r.user);
    if (explicit_test) {
      for (const auto& r : (*explicit_test)[di]) users_in[di].insert(r.user);
    }
  }
  std::size_t only_a = 0, only_b = 0;
  for (const auto& u : users_in[0]) only_a += users_in[1].count(u) == 0;
  for (const auto& u : users_in[1]) only_b += users_in[0].count(u) == 0;
  if (only_a + only_b > 0) {
    throw DataError("users must appear in both domains: " + std::to_string(only_a) + " only in A, " +
                    std::to_string(only_b) + " only in B");
  }

  Vocabulary users;
  std::array<Vocabulary, 2> items;
  for (int di = 0; di < 2; ++di) {
    for (const auto& r : rows[di]) {
      users.intern(r.user);
      items[di].intern(r.item);
    }
  }
  if (explicit_test) {
    for (int di = 0; di < 2; ++di) {
      for (const auto& r : (*explicit_test)[di]) {
        users.intern(r.user);
        items[di].intern(r.item);
      }
    }
  }

  DomainDataset ds;
  ds.user_count = static_cast<int>(users.size());
  for (int di = 0; di < 2; ++di) {
    ds.item_counts[di] = static_cast<int>(items[di].size());

    // Deduplicate, keeping the first occurrence of each (user, item).
    std::vector<std::vector<RawRow>> per_user(ds.user_count);
    std::unordered_set<std::int64_t> seen;
    for (auto& r : rows[di]) {
      const int u = users.find(r.user);
      const int i = items[di].find(r.item);
      const auto key = static_cast<std::int64_t>(u) * static_cast<std::int64_t>(items[di].size()) + i;
      if (!seen.insert(key).second) continue;
      per_user[u].push_back(std::move(r));
    }

    if (explicit_test) {
      std::unordered_set<std::int64_t> test_seen;
      for (const auto& r : (*explicit_test)[di]) {
        const int u = users.find(r.user);
        const int i = items[di].find(r.item);
        const auto key = static_cast<std::int64_t>(u) * static_cast<std::int64_t>(items[di].size()) + i;
        if (seen.count(key)) {
          throw DataError("test pair (" + r.user + ", " + r.item + ") also appears in train for domain " +
                          name_of(static_cast<Domain>(di)));
        }
        if (test_seen.insert(key).second) ds.test[di].push_back({u, i});
      }
      for (int u = 0; u < ds.user_count; ++u) {
        for (const auto& r : per_user[u]) ds.train[di].push_back({u, items[di].find(r.item)});
      }
      continue;
    }

    for (int u = 0; u < ds.user_count; ++u) {
      auto& list = per_user[u];
      std::stable_sort(list.begin(), list.end(), [](const RawRow& a, const RawRow& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.order < b.order;
      });
      const std::size_t held = list.size() >= 2 ? 1 : 0;
      for (std::size_t k = 0; k + held < list.size(); ++k) ds.train[di].push_back({u, items[di].find(list[k].item)});
      if (held) ds.test[di].push_back({u, items[di].find(list.back().item)});
    }
  }
  ds.user_ids = users.take();
  for (int di = 0; di < 2; ++di) ds.item_ids[di] = items[di].take();
  ds.finalize();
  return ds;
}

}  // namespace

DomainDataset load_interactions(const fs::path& domain_a, const fs::path& domain_b, const LoadOptions& options,
                                const fs::path& test_a, const fs::path& test_b) {
  std::array<std::vector<RawRow>, 2> rows;
  {
    std::array<std::vector<RawRow>, 2> tmp;
    read_rows(domain_a, options, -1, tmp);
    rows[0] = std::move(tmp[0]);
  }
  {
    std::array<std::vector<RawRow>, 2> tmp;
    read_rows(domain_b, options, -1, tmp);
    rows[1] = std::move(tmp[0]);
  }
  if (test_a.empty() != test_b.empty()) throw DataError("explicit split needs test files for both domains");
  if (test_a.empty()) return assemble(std::move(rows), nullptr);

  std::array<std::vector<RawRow>, 2> tests;
  {
    std::array<std::vector<RawRow>, 2> tmp;
    read_rows(test_a, options, -1, tmp);
    tests[0] = std::move(tmp[0]);
  }
  {
    std::array<std::vector<RawRow>, 2> tmp;
    read_rows(test_b, options, -1, tmp);
    tests[1] = std::move(tmp[0]);
  }
  return assemble(std::move(rows), &tests);
}

DomainDataset load_tagged_interactions(const fs::path& path, const LoadOptions& options) {
  std::array<std::vector<RawRow>, 2> rows;
  read_rows(path, options, 2, rows);
  return assemble(std::move(rows), nullptr);
}

void SyntheticSpec::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(shared_strength)) throw DataError("shared_strength must lie in [0, 1]");
  if (!in_unit(exclusive_strength)) throw DataError("exclusive_strength must lie in [0, 1]");
  if (user_count < 1) throw DataError("user_count must be positive");
  if (item_counts[0] < 2 || item_counts[1] < 2) throw DataError("each domain needs at least two items");
  if (latent_dim < 1) throw DataError("latent_dim must be positive");
  if (noise < 0.0) throw DataError("noise must be non-negative");
  if (interactions_per_user < 2.0) throw DataError("interactions_per_user must be at least 2");
}

SyntheticDataset synthesize_dataset(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = spec.user_count;
  const int k = spec.latent_dim;
  auto draw = [&](int rows, int cols) {
    Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
  };

  const Matrix shared = draw(n, k);
  const Matrix source_only = draw(n, k);
  const Matrix private_a = draw(n, k);
  const Matrix private_b = draw(n, k);
  const double s = spec.shared_strength;
  const double e = spec.exclusive_strength;

  SyntheticDataset out;
  // Domain A (source) carries the exclusive signal; B sees only shared + private.
  out.user_latents[0] = std::sqrt(1.0 - e) * (std::sqrt(s) * shared + std::sqrt(1.0 - s) * private_a) +
                        std::sqrt(e) * source_only;
  out.user_latents[1] = std::sqrt(s) * shared + std::sqrt(1.0 - s) * private_b;

  DomainDataset& ds = out.dataset;
  ds.user_count = n;
  ds.user_ids.resize(n);
  for (int u = 0; u < n; ++u) ds.user_ids[u] = "u" + std::to_string(u);

  for (int di = 0; di < 2; ++di) {
    const int m = spec.item_counts[di];
    ds.item_counts[di] = m;
    ds.item_ids[di].resize(m);
    for (int j = 0; j < m; ++j) ds.item_ids[di][j] = std::string(di == 0 ? "a" : "b") + std::to_string(j);

    out.item_latents[di] = draw(m, k);
    Matrix affinity = out.user_latents[di] * out.item_latents[di].transpose() / std::sqrt(static_cast<double>(k));
    for (int j = 0; j < m; ++j)
      for (int u = 0; u < n; ++u) affinity(u, j) += spec.noise * normal(rng);

    // Global threshold at the quantile matching the requested mean density.
    const double density = std::min(0.5, spec.interactions_per_user / m);
    std::vector<double> flat(affinity.data(), affinity.data() + affinity.size());
    const auto cut = static_cast<std::size_t>(std::floor((1.0 - density) * static_cast<double>(flat.size())));
    std::nth_element(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(cut), flat.end());
    const double threshold = flat[cut];
    const int cap = m / 2;

    for (int u = 0; u < n; ++u) {
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return affinity(u, a) != affinity(u, b) ? affinity(u, a) > affinity(u, b) : a < b;
      });
      int take = 0;
      while (take < m && affinity(u, order[take]) >= threshold) ++take;
      take = std::clamp(take, 2, cap);
      std::vector<int> chosen(order.begin(), order.begin() + take);
      std::shuffle(chosen.begin(), chosen.end(), rng);
      for (int t = 0; t + 1 < take; ++t) ds.train[di].push_back({u, chosen[t]});
      ds.test[di].push_back({u, chosen.back()});
    }
  }
  ds.finalize();
  return out;
}

std::vector<LabeledInteraction> sample_training_negatives(const DomainDataset& dataset, Domain domain,
                                                          std::span<const Interaction> positives, int ratio,
                                                          Rng& rng) {
  if (ratio < 1) throw DataError("negative ratio must be >= 1");
  const int items = dataset.item_count(domain);
  std::vector<LabeledInteraction> rows;
  rows.reserve(positives.size() * static_cast<std::size_t>(ratio + 1));
  std::uniform_int_distribution<int> any_item(0, items - 1);
  for (const auto& p : positives) {
    if (p.user < 0 || p.user >= dataset.user_count || p.item < 0 || p.item >= items) {
      throw DataError("positive (" + std::to_string(p.user) + ", " + std::to_string(p.item) + ") out of range");
    }
    rows.push_back({p.user, p.item, 1.0});
    const auto& seen = dataset.items_of(domain, p.user);
    const int eligible = items - static_cast<int>(seen.size());
    if (eligible <= 0) {
      throw DataError("user " + std::to_string(p.user) + " has interacted with every item in domain " +
                      name_of(domain) + "; cannot sample a negative");
    }
    if (eligible * 4 <= items) {
      std::vector<int> pool;
      pool.reserve(static_cast<std::size_t>(eligible));
      for (int j = 0; j < items; ++j)
        if (!std::binary_search(seen.begin(), seen.end(), j)) pool.push_back(j);
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (int r = 0; r < ratio; ++r) rows.push_back({p.user, pool[pick(rng)], 0.0});
    } else {
      for (int r = 0; r < ratio; ++r) {
        int j = any_item(rng);
        while (std::binary_search(seen.begin(), seen.end(), j)) j = any_item(rng);
        rows.push_back({p.user, j, 0.0});
      }
    }
  }
  return rows;
}

CandidateBuild build_candidate_sets(const DomainDataset& dataset, Domain domain, std::uint64_t seed, int negatives) {
  if (negatives < 1) throw DataError("candidate sets need at least one negative");
  CandidateBuild out;
  Rng rng(seed);
  const int items = dataset.item_count(domain);
  for (const auto& t : dataset.test_of(domain)) {
    const auto& seen = dataset.items_of(domain, t.user);
    const int eligible = items - static_cast<int>(seen.size());
    if (eligible < negatives) {
      ++out.skipped_users;
      continue;
    }
    CandidateSet cs{t.user, domain, t.item, {}, seed};
    cs.negatives.reserve(static_cast<std::size_t>(negatives));
    if (eligible < 2 * negatives) {
      std::vector<int> pool;
      pool.reserve(static_cast<std::size_t>(eligible));
      for (int j = 0; j < items; ++j)
        if (!std::binary_search(seen.begin(), seen.end(), j)) pool.push_back(j);
      // Partial Fisher-Yates: the first `negatives` slots form the sample.
      for (int k = 0; k < negatives; ++k) {
        std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), pool.size() - 1);
        std::swap(pool[static_cast<std::size_t>(k)], pool[pick(rng)]);
      }
      cs.negatives.assign(pool.begin(), pool.begin() + negatives);
    } else {
      std::uniform_int_distribution<int> any_item(0, items - 1);
      std::unordered_set<int> taken;
      while (static_cast<int>(cs.negatives.size()) < negatives) {
        const int j = any_item(rng);
        if (std::binary_search(seen.begin(), seen.end(), j) || !taken.insert(j).second) continue;
        cs.negatives.push_back(j);
      }
    }
    out.sets.push_back(std::move(cs));
  }
  return out;
}

namespace {

void write_rows(const fs::path& path, const std::vector<Interaction>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : rows) out << r.user << '\t' << r.item << '\n';
}

std::vector<Interaction> read_index_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Interaction> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    Interaction r;
    if (!(fields >> r.user >> r.item)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed index row");
    }
    rows.push_back(r);
  }
  return rows;
}

void write_vocab(const fs::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < ids.size(); ++i) out << i << '\t' << ids[i] << '\n';
}

std::vector<std::string> read_vocab(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path.string() + ": malformed vocabulary row");
    ids.push_back(line.substr(tab + 1));
  }
  return ids;
}

}  // namespace

void save_dataset(const DomainDataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  write_vocab(dir / "users.tsv", dataset.user_ids);
  json manifest;
  manifest["user_count"] = dataset.user_count;
  for (Domain d : kDomains) {
    const int di = index_of(d);
    const std::string tag = name_of(d);
    write_vocab(dir / ("items_" + tag + ".tsv"), dataset.item_ids[di]);
    write_rows(dir / ("train_" + tag + ".tsv"), dataset.train[di]);
    write_rows(dir / ("test_" + tag + ".tsv"), dataset.test[di]);
    manifest["domains"][tag] = {{"items", dataset.item_counts[di]},
                                {"train", dataset.train[di].size()},
                                {"test", dataset.test[di].size()}};
  }
  std::ofstream(dir / "dataset.json") << manifest.dump(2) << '\n';
}

DomainDataset load_dataset(const fs::path& dir) {
  std::ifstream in(dir / "dataset.json");
  if (!in) throw DataError("no dataset.json under " + dir.string());
  const json manifest = json::parse(in);
  DomainDataset ds;
  ds.user_count = manifest.at("user_count").get<int>();
  ds.user_ids = read_vocab(dir / "users.tsv");
  for (Domain d : kDomains) {
    const int di = index_of(d);
    const std::string tag = name_of(d);
    ds.item_counts[di] = manifest.at("domains").at(tag).at("items").get<int>();
    ds.item_ids[di] = read_vocab(dir / ("items_" + tag + ".tsv"));
    ds.train[di] = read_index_rows(dir / ("train_" + tag + ".tsv"));
    ds.test[di] = read_index_rows(dir / ("test_" + tag + ".tsv"));
  }
  ds.finalize();
  return ds;
}

void save_candidates(std::span<const CandidateSet> sets, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& cs : sets) {
    out << cs.user << '\t' << name_of(cs.domain) << '\t' << cs.positive_item << '\t' << cs.seed << '\t';
    for (std::size_t k = 0; k < cs.negatives.size(); ++k) out << (k ? "," : "") << cs.negatives[k];
    out << '\n';
  }
}

std::vector<CandidateSet> load_candidates(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<CandidateSet> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 5) throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed candidate row");
    CandidateSet cs;
    try {
      cs.user = std::stoi(fields[0]);
      cs.domain = parse_domain(fields[1]);
      cs.positive_item = std::stoi(fields[2]);
      cs.seed = std::stoull(fields[3]);
      for (const auto& tok : split(fields[4], ',')) cs.negatives.push_back(std::stoi(tok));
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed candidate row");
    }
    sets.push_back(std::move(cs));
  }
  return sets;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint_files(std::span<const fs::path> files) {
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw DataError("cannot open " + f.string());
    all += f.filename().string();
    all.push_back('\0');
    all.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return fnv1a_hex(all);
}

}  // namespace a2dcdr
