#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "toonrig/assets.hpp"
#include "toonrig/assign.hpp"
#include "toonrig/blob.hpp"
#include "toonrig/dataset.hpp"
#include "toonrig/error.hpp"
#include "toonrig/raster.hpp"
#include "toonrig/rng.hpp"

using namespace toonrig;

TEST_CASE("sample_params is seed-deterministic and rejects n = 0") {
  Rig rig = make_default_rig();
  auto a = sample_params(rig, 3, 7);
  auto b = sample_params(rig, 3, 7);
  REQUIRE(a.size() == 3);
  for (size_t i = 0; i < 3; ++i)
    for (const auto& [id, w] : a[i].entries)
      for (int k = 0; k < 3; ++k) CHECK(w[k] == b[i].entries.at(id)[k]);
  CHECK_THROWS_AS(sample_params(rig, 0, 7), Error);
}

TEST_CASE("sampled weights look uniform on [-30, 30]") {
  Rig rig = make_default_rig();
  auto params = sample_params(rig, 10000, 4242);
  // Pool per-axis statistics over one axis of one component.
  double sum = 0, mn = 1e9, mx = -1e9;
  for (const auto& p : params) {
    double w = p.entries.at("mouth")[0];
    sum += w;
    mn = std::min(mn, w);
    mx = std::max(mx, w);
    CHECK(std::abs(w) <= 30.0);
  }
  double mean = sum / params.size();
  CHECK(std::abs(mean) < 1.0);  // stderr of uniform(-30,30) at n=10k is ~0.17
  CHECK(mn < -27.0);
  CHECK(mx > 27.0);
}

TEST_CASE("detect_blobs centroid and area on a constructed square") {
  Image img(256, 256, {0, 0, 0, 255});
  // 3x3 white square whose center pixel is (100, 200): pixel centers average
  // to (100.5, 200.5).
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      img.set(100 + dx, 200 + dy, {255, 255, 255, 255});
  auto blobs = detect_blobs(img);
  REQUIRE(blobs.size() == 1);
  CHECK(blobs[0].area == 9);
  CHECK(blobs[0].centroid.x == doctest::Approx(100.5));
  CHECK(blobs[0].centroid.y == doctest::Approx(200.5));
}

TEST_CASE("detect_blobs on black image and two-disc image") {
  Image black(64, 64, {0, 0, 0, 255});
  CHECK(detect_blobs(black).empty());

  Rig rig = make_default_rig();
  Image img(256, 256, {0, 0, 0, 255});
  auto disc = [&](double cx, double cy) {
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) {
        double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= 2.5 * 2.5) img.set(x, y, {255, 255, 255, 255});
      }
  };
  disc(100, 100);
  disc(150, 100);  // 50 px apart
  CHECK(detect_blobs(img).size() == 2);
}

TEST_CASE("blob sort order is area-descending") {
  Image img(64, 64, {0, 0, 0, 255});
  img.set(5, 5, {255, 255, 255, 255});
  for (int y = 20; y < 24; ++y)
    for (int x = 20; x < 24; ++x) img.set(x, y, {255, 255, 255, 255});
  auto blobs = detect_blobs(img);
  REQUIRE(blobs.size() == 2);
  CHECK(blobs[0].area == 16);
  CHECK(blobs[1].area == 1);
}

TEST_CASE("associate_landmarks recovers identity and survives a global shift") {
  Rig rig = make_default_rig();
  const LandmarkSet& tpl = rig.template_landmarks;

  SUBCASE("blobs exactly at template positions") {
    std::vector<Blob> blobs;
    for (const auto& [id, p] : tpl.points) blobs.push_back({p * 1024.0, 5});
    LandmarkSet out = associate_landmarks(blobs, tpl, 1024);
    for (const auto& [id, p] : tpl.points) {
      CHECK(out.points.at(id).x == doctest::Approx(p.x).epsilon(1e-12));
      CHECK(out.points.at(id).y == doctest::Approx(p.y).epsilon(1e-12));
    }
  }

  SUBCASE("global (+5, +3) px shift preserves the assignment") {
    std::vector<Blob> blobs;
    for (const auto& [id, p] : tpl.points)
      blobs.push_back({p * 1024.0 + Vec2{5, 3}, 5});
    LandmarkSet out = associate_landmarks(blobs, tpl, 1024);
    for (const auto& [id, p] : tpl.points) {
      CHECK(out.points.at(id).x * 1024.0 == doctest::Approx(p.x * 1024.0 + 5));
      CHECK(out.points.at(id).y * 1024.0 == doctest::Approx(p.y * 1024.0 + 3));
    }
  }

  SUBCASE("count mismatch carries both counts") {
    std::vector<Blob> blobs;
    size_t want = tpl.points.size() - 1;
    size_t k = 0;
    for (const auto& [id, p] : tpl.points) {
      if (k++ == want) break;
      blobs.push_back({p * 1024.0, 5});
    }
    CHECK_THROWS_WITH_AS(associate_landmarks(blobs, tpl, 1024),
                         doctest::Contains(std::to_string(want).c_str()), Error);
  }
}

TEST_CASE("hungarian assignment matches brute force on small instances") {
  // 5 source points against a permuted copy; brute force all 120 assignments.
  std::vector<Vec2> pts = {{0, 0}, {10, 2}, {4, 9}, {7, 7}, {1, 5}};
  std::vector<Vec2> dst = {{4.2, 9.1}, {0.3, -0.2}, {1.2, 5.3}, {9.8, 2.2}, {6.9, 7.4}};
  const int n = 5;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost[i][j] = (pts[i] - dst[j]).squared_norm();

  std::vector<int> perm = {0, 1, 2, 3, 4};
  double best = 1e30;
  std::vector<int> best_perm;
  do {
    double c = 0;
    for (int i = 0; i < n; ++i) c += cost[i][perm[i]];
    if (c < best) {
      best = c;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<int> got = solve_assignment(cost);
  double got_cost = 0;
  for (int i = 0; i < n; ++i) got_cost += cost[i][got[i]];
  CHECK(got_cost == doctest::Approx(best).epsilon(1e-12));
  CHECK(got == best_perm);
}

TEST_CASE("build_dataset recovers analytic landmarks within 0.7 px at 1024") {
  Rig rig = make_default_rig();
  Dataset ds = build_dataset(rig, 100, 11, 2);
  REQUIRE(ds.samples.size() == 100);
  CHECK(ds.dropped == 0);
  auto params = sample_params(rig, 100, 11);
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    auto analytic = displaced_landmarks(rig, params[i]);
    for (const auto& [id, pos] : analytic) {
      Vec2 det = ds.samples[i].landmarks.points.at(id) * 1024.0;
      CHECK((det - pos).norm() <= 0.7);
    }
  }
}

TEST_CASE("zero-weight sample lands on the template") {
  Rig rig = make_default_rig();
  Image img = render_markers(rig, ParamVector::zeros(rig.component_ids()));
  auto blobs = detect_blobs(img);
  LandmarkSet det = associate_landmarks(blobs, rig.template_landmarks, rig.canvas_size);
  for (const auto& [id, p] : rig.template_landmarks.points)
    CHECK((det.points.at(id) * 1024.0 - p * 1024.0).norm() <= 0.7);
}

TEST_CASE("dataset generation is deterministic and worker-count independent") {
  Rig rig = make_default_rig().scaled_to(512);
  namespace fs = std::filesystem;
  auto tmp = fs::temp_directory_path();
  std::string p1 = (tmp / "ds_run1.trds").string();
  std::string p2 = (tmp / "ds_run2.trds").string();

  Dataset a = build_dataset(rig, 40, 99, 1);
  Dataset b = build_dataset(rig, 40, 99, 3);
  save_dataset(a, p1);
  save_dataset(b, p2);

  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  CHECK(slurp(p1) == slurp(p2));
  CHECK(!slurp(p1).empty());
  fs::remove(p1);
  fs::remove(p2);
  fs::remove(p1 + ".json");
  fs::remove(p2 + ".json");
}

TEST_CASE("dataset file round-trip preserves samples and metadata") {
  Rig rig = make_default_rig().scaled_to(512);
  Dataset ds = build_dataset(rig, 10, 5, 2);
  namespace fs = std::filesystem;
  std::string path = (fs::temp_directory_path() / "ds_roundtrip.trds").string();
  save_dataset(ds, path);
  Dataset loaded = load_dataset(path);
  CHECK(loaded.rig_fingerprint == ds.rig_fingerprint);
  CHECK(loaded.seed == ds.seed);
  CHECK(loaded.landmark_schema == ds.landmark_schema);
  CHECK(loaded.component_ids == ds.component_ids);
  REQUIRE(loaded.samples.size() == ds.samples.size());
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    auto a = flatten_landmarks(ds.samples[i], ds.landmark_schema);
    auto b = flatten_landmarks(loaded.samples[i], ds.landmark_schema);
    CHECK(a == b);
    auto pa = flatten_params(ds.samples[i], ds.component_ids);
    auto pb = flatten_params(loaded.samples[i], ds.component_ids);
    CHECK(pa == pb);
  }
  fs::remove(path);
  fs::remove(path + ".json");
}

TEST_CASE("dataset fingerprint mismatch is detectable") {
  Rig rig = make_default_rig();
  Rig other = rig.scaled_to(512);
  CHECK(rig.fingerprint() != other.fingerprint());
}
