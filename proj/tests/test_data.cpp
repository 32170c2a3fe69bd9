#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "a2dcdr/data.hpp"
#include "support.hpp"

using namespace a2dcdr;
using a2dcdr::testing::TempDir;
using a2dcdr::testing::write_file;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

DomainDataset three_by_two(const TempDir& dir) {
  write_file(dir / "a.tsv", "u1\tx\nu1\ty\nu2\tx\nu2\tz\nu3\ty\nu3\tz\n");
  write_file(dir / "b.tsv", "u1\tp\nu1\tq\nu2\tq\nu2\tr\nu3\tp\nu3\tr\n");
  return load_interactions(dir / "a.tsv", dir / "b.tsv");
}

}  // namespace

TEST(Loader, LeaveOneOutOnTinyCorpus) {
  TempDir dir("loo");
  const DomainDataset ds = three_by_two(dir);
  EXPECT_EQ(ds.user_count, 3);
  EXPECT_EQ(ds.item_counts[0], 3);
  EXPECT_EQ(ds.item_counts[1], 3);
  for (int di = 0; di < 2; ++di) {
    EXPECT_EQ(ds.train[di].size(), 3u);
    EXPECT_EQ(ds.test[di].size(), 3u);
    for (int u = 0; u < 3; ++u) EXPECT_EQ(ds.user_train_items[di][u].size(), 1u);
  }
  // last row in file order is held out: u1 -> y in A
  const int u1 = static_cast<int>(std::find(ds.user_ids.begin(), ds.user_ids.end(), "u1") - ds.user_ids.begin());
  const int y = static_cast<int>(std::find(ds.item_ids[0].begin(), ds.item_ids[0].end(), "y") - ds.item_ids[0].begin());
  bool found = false;
  for (const auto& t : ds.test[0]) found = found || (t.user == u1 && t.item == y);
  EXPECT_TRUE(found);
}

TEST(Loader, TimestampDecidesHeldOutRow) {
  TempDir dir("ts");
  write_file(dir / "a.tsv", "u1\tx\t30\nu1\ty\t10\n");
  write_file(dir / "b.tsv", "u1\tp\t5\nu1\tq\t6\n");
  const DomainDataset ds = load_interactions(dir / "a.tsv", dir / "b.tsv");
  ASSERT_EQ(ds.test[0].size(), 1u);
  EXPECT_EQ(ds.item_ids[0][ds.test[0][0].item], "x");
  EXPECT_EQ(ds.item_ids[1][ds.test[1][0].item], "q");
}

TEST(Loader, DuplicatesDropped) {
  TempDir dir("dup");
  write_file(dir / "a.tsv", "u1\tx\nu1\tx\nu1\ty\n");
  write_file(dir / "b.tsv", "u1\tp\nu1\tq\nu1\tq\n");
  const DomainDataset ds = load_interactions(dir / "a.tsv", dir / "b.tsv");
  EXPECT_EQ(ds.train[0].size() + ds.test[0].size(), 2u);
  EXPECT_EQ(ds.train[1].size() + ds.test[1].size(), 2u);
}

TEST(Loader, EmptyFileReportsNoInteractions) {
  TempDir dir("empty");
  write_file(dir / "a.tsv", "");
  write_file(dir / "b.tsv", "");
  EXPECT_THROW(load_interactions(dir / "a.tsv", dir / "b.tsv"), DataError);
  EXPECT_EQ(message_of([&] { load_interactions(dir / "a.tsv", dir / "b.tsv"); }), "no interactions");
}

TEST(Loader, MalformedRowNamesLine) {
  TempDir dir("bad");
  write_file(dir / "a.tsv", "u1\tx\nu1\n");
  write_file(dir / "b.tsv", "u1\tp\n");
  const std::string msg = message_of([&] { load_interactions(dir / "a.tsv", dir / "b.tsv"); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
}

TEST(Loader, UserInOneDomainRejectedWithCounts) {
  TempDir dir("oneside");
  write_file(dir / "a.tsv", "u1\tx\nu2\tx\nu3\tx\n");
  write_file(dir / "b.tsv", "u1\tp\n");
  const std::string msg = message_of([&] { load_interactions(dir / "a.tsv", dir / "b.tsv"); });
  EXPECT_NE(msg.find("2 only in A"), std::string::npos) << msg;
}

TEST(Loader, TaggedSingleFile) {
  TempDir dir("tagged");
  write_file(dir / "all.tsv", "u1\tx\tA\nu1\ty\tA\nu1\tp\tB\nu1\tq\tB\n");
  const DomainDataset ds = load_tagged_interactions(dir / "all.tsv");
  EXPECT_EQ(ds.user_count, 1);
  EXPECT_EQ(ds.test[0].size(), 1u);
  EXPECT_EQ(ds.test[1].size(), 1u);
}

TEST(Loader, ReindexingIsBijective) {
  TempDir dir("bij");
  const DomainDataset ds = three_by_two(dir);
  std::set<std::string> users(ds.user_ids.begin(), ds.user_ids.end());
  EXPECT_EQ(users.size(), ds.user_ids.size());
  EXPECT_EQ(users, (std::set<std::string>{"u1", "u2", "u3"}));
  for (int di = 0; di < 2; ++di) {
    std::set<std::string> items(ds.item_ids[di].begin(), ds.item_ids[di].end());
    EXPECT_EQ(static_cast<int>(items.size()), ds.item_counts[di]);
  }
}

TEST(Dataset, ValidateCatchesLeakedTestPositive) {
  TempDir dir("leak");
  DomainDataset ds = three_by_two(dir);
  ds.train[0].push_back(ds.test[0][0]);
  EXPECT_THROW(ds.finalize(), DataError);
}

TEST(Synthesizer, Deterministic) {
  SyntheticSpec spec = a2dcdr::testing::small_spec(3);
  spec.user_count = 120;
  const auto a = synthesize_dataset(spec);
  const auto b = synthesize_dataset(spec);
  EXPECT_TRUE(a.dataset == b.dataset);
  EXPECT_EQ(a.user_latents[0], b.user_latents[0]);
}

TEST(Synthesizer, RejectsStrengthsOutsideUnitInterval) {
  SyntheticSpec spec;
  spec.shared_strength = 1.5;
  EXPECT_THROW(synthesize_dataset(spec), DataError);
  spec.shared_strength = 0.5;
  spec.exclusive_strength = -0.1;
  EXPECT_THROW(synthesize_dataset(spec), DataError);
}

TEST(Synthesizer, FullSharingUsesIdenticalLatents) {
  SyntheticSpec spec;
  spec.user_count = 50;
  spec.shared_strength = 1.0;
  spec.exclusive_strength = 0.0;
  const auto out = synthesize_dataset(spec);
  EXPECT_EQ(out.user_latents[0], out.user_latents[1]);
}

TEST(Synthesizer, NoSharingGivesUncorrelatedPreferences) {
  SyntheticSpec spec;
  spec.user_count = 1000;
  spec.shared_strength = 0.0;
  spec.seed = 11;
  const auto out = synthesize_dataset(spec);
  const Matrix& a = out.user_latents[0];
  const Matrix& b = out.user_latents[1];
  const double ma = a.mean(), mb = b.mean();
  const double cov = ((a.array() - ma) * (b.array() - mb)).mean();
  const double r = cov / std::sqrt((a.array() - ma).square().mean() * (b.array() - mb).square().mean());
  EXPECT_LT(std::abs(r), 0.05);
}

TEST(Synthesizer, SplitInvariants) {
  const auto out = synthesize_dataset(a2dcdr::testing::small_spec());
  const DomainDataset& ds = out.dataset;
  EXPECT_NO_THROW(ds.validate());
  for (int di = 0; di < 2; ++di) {
    std::map<int, int> tests_per_user;
    for (const auto& t : ds.test[di]) ++tests_per_user[t.user];
    for (int u = 0; u < ds.user_count; ++u) {
      if (ds.user_items[di][u].size() >= 2) EXPECT_EQ(tests_per_user[u], 1);
    }
  }
}

TEST(Negatives, RatioOneDoublesRows) {
  const auto ds = synthesize_dataset(a2dcdr::testing::small_spec()).dataset;
  Rng rng(0);
  std::vector<Interaction> pos(ds.train[0].begin(), ds.train[0].begin() + 4);
  const auto rows = sample_training_negatives(ds, Domain::A, pos, 1, rng);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.label == 1.0; }), 4);
  for (const auto& r : rows)
    if (r.label == 0.0) EXPECT_FALSE(ds.interacted(Domain::A, r.user, r.item));
}

namespace {

// One user, `items` items per domain, interacting with all but `free` of them in A.
DomainDataset crowded_user(int items, int free) {
  DomainDataset ds;
  ds.user_count = 1;
  ds.item_counts = {items, items};
  for (int j = 0; j < items - free; ++j) ds.train[0].push_back({0, j});
  ds.train[1].push_back({0, 0});
  ds.user_ids = {"u"};
  for (int di = 0; di < 2; ++di)
    for (int j = 0; j < items; ++j) ds.item_ids[di].push_back(std::to_string(j));
  ds.finalize();
  return ds;
}

}  // namespace

TEST(Negatives, SingleEligibleItemIsForced) {
  const DomainDataset ds = crowded_user(20, 1);
  Rng rng(5);
  const std::vector<Interaction> pos{{0, 0}};
  for (int t = 0; t < 20; ++t) {
    const auto rows = sample_training_negatives(ds, Domain::A, pos, 3, rng);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].item, 19);
  }
}

TEST(Negatives, SaturatedUserErrors) {
  const DomainDataset ds = crowded_user(10, 0);
  Rng rng(5);
  const std::vector<Interaction> pos{{0, 0}};
  EXPECT_THROW(sample_training_negatives(ds, Domain::A, pos, 1, rng), DataError);
  EXPECT_THROW(sample_training_negatives(ds, Domain::B, pos, 0, rng), DataError);
}

TEST(Negatives, UniformOverEligibleItems) {
  // Both sampler branches: a sparse pool (5 of 40) and a dense one (5 of 6).
  for (const auto& [items, free] : std::vector<std::pair<int, int>>{{40, 5}, {6, 5}}) {
    const DomainDataset ds = crowded_user(items, free);
    Rng rng(17);
    std::map<int, int> counts;
    const std::vector<Interaction> pos{{0, 0}};
    int draws = 0;
    while (draws < 10000) {
      for (const auto& r : sample_training_negatives(ds, Domain::A, pos, 2, rng)) {
        if (r.label == 0.0) {
          ++counts[r.item];
          ++draws;
        }
      }
    }
    ASSERT_EQ(counts.size(), 5u);
    const double expected = draws / 5.0;
    const double sigma = std::sqrt(draws * 0.2 * 0.8);
    double chi2 = 0.0;
    for (const auto& [item, c] : counts) {
      EXPECT_GE(item, items - free);
      EXPECT_LT(std::abs(c - expected), 3.0 * sigma);
      chi2 += (c - expected) * (c - expected) / expected;
    }
    EXPECT_LT(chi2, 18.47);  // 99.9% quantile, 4 dof
  }
}

TEST(Candidates, ExhaustiveInvariants) {
  const auto ds = synthesize_dataset(a2dcdr::testing::small_spec()).dataset;
  for (const Domain d : kDomains) {
    const auto build = build_candidate_sets(ds, d, 42, 99);
    EXPECT_EQ(build.sets.size() + build.skipped_users, ds.test_of(d).size());
    for (const auto& cs : build.sets) {
      ASSERT_EQ(cs.negatives.size(), 99u);
      std::set<int> uniq(cs.negatives.begin(), cs.negatives.end());
      EXPECT_EQ(uniq.size(), 99u);
      EXPECT_FALSE(uniq.count(cs.positive_item));
      for (const int j : cs.negatives) EXPECT_FALSE(ds.interacted(d, cs.user, j));
      EXPECT_EQ(cs.seed, 42u);
    }
  }
}

TEST(Candidates, DefaultIs999AndForcedOnThousandItems) {
  DomainDataset ds;
  ds.user_count = 1;
  ds.item_counts = {1000, 1000};
  ds.test[0].push_back({0, 7});
  ds.test[1].push_back({0, 3});
  ds.user_ids = {"u"};
  for (int di = 0; di < 2; ++di)
    for (int j = 0; j < 1000; ++j) ds.item_ids[di].push_back(std::to_string(j));
  ds.finalize();
  const auto build = build_candidate_sets(ds, Domain::A, 1);
  ASSERT_EQ(build.sets.size(), 1u);
  const auto& neg = build.sets[0].negatives;
  EXPECT_EQ(neg.size(), 999u);
  std::vector<int> sorted(neg);
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected;
  for (int j = 0; j < 1000; ++j)
    if (j != 7) expected.push_back(j);
  EXPECT_EQ(sorted, expected);
}

TEST(Candidates, SkipsUsersWithoutEnoughItems) {
  const auto ds = synthesize_dataset(a2dcdr::testing::small_spec()).dataset;
  const auto build = build_candidate_sets(ds, Domain::A, 1);
  EXPECT_TRUE(build.sets.empty());
  EXPECT_EQ(build.skipped_users, static_cast<int>(ds.test[0].size()));
}

TEST(Candidates, SameSeedSameLists) {
  const auto ds = synthesize_dataset(a2dcdr::testing::small_spec()).dataset;
  const auto a = build_candidate_sets(ds, Domain::B, 9, 50);
  const auto b = build_candidate_sets(ds, Domain::B, 9, 50);
  ASSERT_EQ(a.sets.size(), b.sets.size());
  for (std::size_t i = 0; i < a.sets.size(); ++i) EXPECT_EQ(a.sets[i].negatives, b.sets[i].negatives);
}

TEST(Persistence, DatasetAndCandidatesRoundTrip) {
  TempDir dir("persist");
  const auto ds = synthesize_dataset(a2dcdr::testing::small_spec()).dataset;
  save_dataset(ds, dir.path());
  EXPECT_TRUE(load_dataset(dir.path()) == ds);

  const auto sets = build_candidate_sets(ds, Domain::A, 4, 30).sets;
  save_candidates(sets, dir / "cand.tsv");
  const auto back = load_candidates(dir / "cand.tsv");
  ASSERT_EQ(back.size(), sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ(back[i].user, sets[i].user);
    EXPECT_EQ(back[i].positive_item, sets[i].positive_item);
    EXPECT_EQ(back[i].negatives, sets[i].negatives);
    EXPECT_EQ(back[i].seed, sets[i].seed);
    EXPECT_EQ(back[i].domain, sets[i].domain);
  }
}

TEST(Persistence, FingerprintTracksBytes) {
  TempDir dir("fp");
  write_file(dir / "x", "abc");
  const std::vector<std::filesystem::path> files{dir / "x"};
  const std::string first = fingerprint_files(files);
  EXPECT_EQ(first.size(), 16u);
  EXPECT_EQ(first, fingerprint_files(files));
  write_file(dir / "x", "abd");
  EXPECT_NE(first, fingerprint_files(files));
  // FNV-1a 64 of the empty string is the offset basis.
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}
