#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "toonrig/assembly.hpp"
#include "toonrig/assets.hpp"
#include "toonrig/error.hpp"
#include "toonrig/raster.hpp"
#include "toonrig/rng.hpp"

using namespace toonrig;
namespace fs = std::filesystem;

TEST_CASE("inpaint: constant image is a fixed point; empty mask is identity") {
  Image img(32, 32, {120, 90, 60, 255});
  BinaryMask mask(32, 32);
  for (int y = 10; y < 20; ++y)
    for (int x = 12; x < 22; ++x) mask.set(x, y, true);
  Image out = inpaint(img, mask);
  CHECK(out.pixels == img.pixels);

  BinaryMask empty(32, 32);
  Image out2 = inpaint(img, empty);
  CHECK(out2.pixels == img.pixels);
}

TEST_CASE("inpaint: linear gradients are harmonic, hole fill within 2/255") {
  // 64x64 horizontal gradient, 8x8 centered hole (small enough that the
  // default tolerance stop still reaches the bound).
  Image img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      uint8_t v = static_cast<uint8_t>(x * 4);
      img.set(x, y, {v, static_cast<uint8_t>(255 - v), 128, 255});
    }
  BinaryMask mask(64, 64);
  for (int y = 28; y < 36; ++y)
    for (int x = 28; x < 36; ++x) mask.set(x, y, true);
  Image out = inpaint(img, mask);
  for (int y = 28; y < 36; ++y)
    for (int x = 28; x < 36; ++x) {
      const uint8_t* got = out.at(x, y);
      CHECK(std::abs(int(got[0]) - x * 4) <= 2);
      CHECK(std::abs(int(got[1]) - (255 - x * 4)) <= 2);
      CHECK(std::abs(int(got[2]) - 128) <= 2);
    }
  // Unmasked pixels are untouched bit-exactly.
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (!mask.get(x, y)) {
        const uint8_t* a = img.at(x, y);
        const uint8_t* b = out.at(x, y);
        for (int c = 0; c < 4; ++c) REQUIRE(a[c] == b[c]);
      }
}

TEST_CASE("inpaint: maximum principle over random masks") {
  Rng rng(314);
  for (int trial = 0; trial < 50; ++trial) {
    Image img(24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        img.set(x, y, {static_cast<uint8_t>(rng.next_below(256)),
                       static_cast<uint8_t>(rng.next_below(256)),
                       static_cast<uint8_t>(rng.next_below(256)), 255});
    BinaryMask mask(24, 24);
    // Random interior blob.
    int cx = 6 + static_cast<int>(rng.next_below(12));
    int cy = 6 + static_cast<int>(rng.next_below(12));
    int r = 2 + static_cast<int>(rng.next_below(4));
    for (int y = 1; y < 23; ++y)
      for (int x = 1; x < 23; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) mask.set(x, y, true);

    // Boundary range per channel.
    int lo[4] = {256, 256, 256, 256}, hi[4] = {-1, -1, -1, -1};
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) {
        if (mask.get(x, y)) continue;
        bool boundary = false;
        for (auto [dx, dy] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
          int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < 24 && ny < 24 && mask.get(nx, ny)) boundary = true;
        }
        if (!boundary) continue;
        for (int c = 0; c < 4; ++c) {
          lo[c] = std::min(lo[c], int(img.at(x, y)[c]));
          hi[c] = std::max(hi[c], int(img.at(x, y)[c]));
        }
      }
    Image out = inpaint(img, mask);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        if (mask.get(x, y))
          for (int c = 0; c < 4; ++c) {
            REQUIRE(int(out.at(x, y)[c]) >= lo[c]);
            REQUIRE(int(out.at(x, y)[c]) <= hi[c]);
          }
  }
}

TEST_CASE("inpaint: fully masked region with no boundary errors") {
  Image img(8, 8, {10, 10, 10, 255});
  BinaryMask mask(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) mask.set(x, y, true);
  CHECK_THROWS_AS(inpaint(img, mask), Error);
}

TEST_CASE("inpaint is worker-count independent") {
  Image img(48, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      img.set(x, y, {static_cast<uint8_t>(x * 5), static_cast<uint8_t>(y * 5), 77, 255});
  BinaryMask mask(48, 48);
  for (int y = 15; y < 33; ++y)
    for (int x = 10; x < 38; ++x) mask.set(x, y, true);
  Image a = inpaint(img, mask, {.workers = 1});
  Image b = inpaint(img, mask, {.workers = 3});
  CHECK(a.pixels == b.pixels);
}

TEST_CASE("dilation: growth on discs bounded by perimeter*r + ceil(pi r^2)") {
  for (int R : {10, 20, 40}) {
    BinaryMask mask(128, 128);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) {
        double dx = x + 0.5 - 64, dy = y + 0.5 - 64;
        if (dx * dx + dy * dy <= R * R) mask.set(x, y, true);
      }
    BinaryMask grown = dilate(mask, 3);
    // Every original bit survives.
    for (size_t i = 0; i < mask.bits.size(); ++i)
      if (mask.bits[i]) REQUIRE(grown.bits[i]);
    double growth = static_cast<double>(grown.count()) - static_cast<double>(mask.count());
    double bound = 2 * 3.14159265358979 * (R + 0.5) * 3 + std::ceil(9 * 3.14159265358979);
    INFO("R=", R, " growth=", growth, " bound=", bound);
    CHECK(growth <= bound);
  }
}

TEST_CASE("repaint_mask: dilation 0 equals render_mask; dilated is a superset") {
  Rig rig = make_default_rig().scaled_to(512);
  Image atlas = make_default_atlas(make_default_rig());
  ParamVector p = sample_params(rig, 1, 61)[0];
  std::set<std::string> features;
  for (const auto& c : rig.components) features.insert(c.id);
  BinaryMask plain = render_mask(rig, atlas, p, features);
  BinaryMask zero = repaint_mask(rig, atlas, p, 0);
  CHECK(plain.bits == zero.bits);
  BinaryMask grown = repaint_mask(rig, atlas, p, 3);
  for (size_t i = 0; i < plain.bits.size(); ++i)
    if (plain.bits[i]) REQUIRE(grown.bits[i]);
  CHECK(grown.count() > plain.count());
}

TEST_CASE("repaint masks differ only inside the moved layer's footprints") {
  Rig rig = make_default_rig().scaled_to(512);
  Image atlas = make_default_atlas(make_default_rig());
  ParamVector zero = ParamVector::zeros(rig.component_ids());
  ParamVector moved = zero;
  moved.set("left_eye", Axis::y, 30.0);
  BinaryMask ma = repaint_mask(rig, atlas, zero, 3);
  BinaryMask mb = repaint_mask(rig, atlas, moved, 3);
  Bounds fa = layer_bounds(rig, compose_geometry(rig, zero), "left_eye").dilated(3.5);
  Bounds fb = layer_bounds(rig, compose_geometry(rig, moved), "left_eye").dilated(3.5);
  Bounds allowed = fa.united(fb);
  for (int y = 0; y < ma.height; ++y)
    for (int x = 0; x < ma.width; ++x)
      if (ma.get(x, y) != mb.get(x, y)) REQUIRE(allowed.contains(x + 0.5, y + 0.5));
}

namespace {

// Self-reconstruction package at known weights, fitted exactly (no model).
ModelPackage fixture_package(const Rig& rig, const Image& atlas, const ParamVector& truth) {
  Fixture fx = make_fixture(rig, atlas, truth);
  ModelPackage pkg = begin_package(rig, fx.portrait, fx.landmarks, atlas.width, atlas.height);
  pkg.fitted_params = truth;
  return pkg;
}

}  // namespace

TEST_CASE("repaint: outside pixels bit-identical, second pass a no-op, artifact removed") {
  Rig rig = make_default_rig();
  Image atlas = make_default_atlas(rig);
  ParamVector truth = ParamVector::zeros(rig.component_ids());
  truth.set("left_eye", Axis::y, 10.0);
  truth.set("mouth", Axis::scale, 12.0);
  ModelPackage pkg = fixture_package(rig, atlas, truth);

  const Rect& rect = rig.base_face.texture_rect;
  Image before = pkg.atlas;
  repaint_base_face(pkg);

  // Canvas mask pulled into texture space is rect-aligned 1:1 here.
  for (int y = 0; y < rect.h; ++y)
    for (int x = 0; x < rect.w; ++x) {
      int cx = 162 + x, cy = 110 + y;
      bool masked = pkg.repaint_mask.in_bounds(cx, cy) && pkg.repaint_mask.get(cx, cy);
      if (masked) continue;
      const uint8_t* a = before.at(rect.x + x, rect.y + y);
      const uint8_t* b = pkg.atlas.at(rect.x + x, rect.y + y);
      for (int c = 0; c < 4; ++c) REQUIRE(a[c] == b[c]);
    }

  // Deterministic solver + identical mask -> second repaint changes nothing.
  Image after_once = pkg.atlas;
  repaint_base_face(pkg);
  CHECK(pkg.atlas.pixels == after_once.pixels);

  // The painted iris under the eye is gone: base-face-only render has no
  // iris-colored pixel near the fitted eye center.
  Image base_render = render(pkg.rig, pkg.atlas, ParamVector::zeros(rig.component_ids()),
                             std::set<std::string>{"base_face"});
  auto iris_like = [&](int x, int y) {
    const uint8_t* p = base_render.at(x, y);
    double d = 0;
    const auto& iris = DefaultColors::iris;
    for (int c = 0; c < 3; ++c) d += (double(p[c]) - iris[c]) * (double(p[c]) - iris[c]);
    return std::sqrt(d) < 30.0;
  };
  // Fitted left eye center: anchor + dy.
  const Component* eye = rig.find_component("left_eye");
  int ex = static_cast<int>(eye->anchor.x);
  int ey = static_cast<int>(eye->anchor.y + (10.0 / 30.0) * eye->gains.dy_max);
  int iris_count = 0;
  for (int y = ey - 15; y <= ey + 15; ++y)
    for (int x = ex - 15; x <= ex + 15; ++x)
      if (iris_like(x, y)) ++iris_count;
  CHECK(iris_count == 0);
}

TEST_CASE("integrate_hair warps masked pixels through the contour transform") {
  Rig rig = make_default_rig();
  Image atlas = make_default_atlas(rig);
  ParamVector zero = ParamVector::zeros(rig.component_ids());
  ModelPackage pkg = fixture_package(rig, atlas, zero);

  SUBCASE("all-false mask leaves the hair layer empty") {
    Image hair_img(1024, 1024, {80, 50, 30, 255});
    BinaryMask hair_mask(1024, 1024);
    integrate_hair(pkg, hair_img, hair_mask, HairZ::front);
    const Rect& rect = rig.hair->texture_rect;
    for (int y = 0; y < rect.h; y += 3)
      for (int x = 0; x < rect.w; x += 3)
        REQUIRE(pkg.atlas.at(rect.x + x, rect.y + y)[3] == 0);
    CHECK(pkg.rig.z_order.back() == "hair");
  }

  SUBCASE("full mask over a solid color fills the transform's image") {
    Image hair_img(1024, 1024, {80, 50, 30, 255});
    BinaryMask hair_mask(1024, 1024);
    for (auto& b : hair_mask.bits) b = 1;
    integrate_hair(pkg, hair_img, hair_mask, HairZ::front);
    const Rect& rect = rig.hair->texture_rect;
    SimilarityTransform inv = pkg.contour_transform->inverse();
    int checked = 0;
    for (int y = 0; y < rect.h; y += 7)
      for (int x = 0; x < rect.w; x += 7) {
        // Hair mesh is the full canvas 1:1, so texel (x, y) <-> canvas (x, y).
        Vec2 src = inv.apply({x + 0.5, y + 0.5});
        const uint8_t* p = pkg.atlas.at(rect.x + x, rect.y + y);
        bool inside = src.x >= 1 && src.y >= 1 && src.x < 1023 && src.y < 1023;
        if (!inside) continue;
        REQUIRE(p[3] == 255);
        REQUIRE(int(p[0]) == 80);
        ++checked;
      }
    CHECK(checked > 1000);
  }

  SUBCASE("behind-face slot goes before base_face; frame mismatch errors") {
    Image hair_img(1024, 1024, {80, 50, 30, 255});
    BinaryMask hair_mask(1024, 1024);
    integrate_hair(pkg, hair_img, hair_mask, HairZ::behind_face);
    CHECK(pkg.rig.z_order.front() == "hair");

    Image wrong(512, 512, {1, 2, 3, 255});
    BinaryMask wrong_mask(512, 512);
    CHECK_THROWS_AS(integrate_hair(pkg, wrong, wrong_mask, HairZ::front), Error);
  }
}

TEST_CASE("package save/load round-trip verifies hashes") {
  Rig rig = make_default_rig().scaled_to(256);
  Image atlas = make_default_atlas(make_default_rig());
  ParamVector truth = ParamVector::zeros(rig.component_ids());
  truth.set("nose", Axis::x, -7.5);
  ModelPackage pkg = fixture_package(rig, atlas, truth);
  repaint_base_face(pkg);

  fs::path dir = fs::temp_directory_path() / "toonrig_pkg_test";
  fs::remove_all(dir);
  save_package(pkg, dir.string());

  ModelPackage loaded = load_package(dir.string());
  CHECK(loaded.rig.fingerprint() == pkg.rig.fingerprint());
  CHECK(loaded.atlas.pixels == pkg.atlas.pixels);
  CHECK(loaded.repaint_mask.bits == pkg.repaint_mask.bits);
  for (const auto& [id, w] : pkg.fitted_params.entries)
    for (int a = 0; a < 3; ++a)
      CHECK(loaded.fitted_params.entries.at(id)[a] == doctest::Approx(w[a]).epsilon(1e-9));

  SUBCASE("corrupting the atlas is caught by the hash check") {
    // Flip one byte in the middle of the file.
    fs::path atlas_path = dir / "atlas.png";
    std::fstream f(atlas_path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(400);
    char b;
    f.seekg(400);
    f.get(b);
    f.seekp(400);
    f.put(static_cast<char>(b ^ 0x7f));
    f.close();
    CHECK_THROWS_WITH_AS(load_package(dir.string()), doctest::Contains("atlas.png"), Error);
  }

  SUBCASE("missing params file is named") {
    fs::remove(dir / "params.json");
    CHECK_THROWS_WITH_AS(load_package(dir.string()), doctest::Contains("params.json"), Error);
  }
  fs::remove_all(dir);
}

TEST_CASE("fit_portrait uses the contour transform as the landmark provider") {
  Rig rig = make_default_rig();
  Image atlas = make_default_atlas(rig);
  ParamVector zero = ParamVector::zeros(rig.component_ids());
  Fixture fx = make_fixture(rig, atlas, zero);
  ModelPackage pkg = begin_package(rig, fx.portrait, fx.landmarks, atlas.width, atlas.height);

  // A zero model predicts all-zero weights regardless of input.
  MlpModel model = init_model_for_rig(rig, {8, 8, 8}, 1);
  for (auto& w : model.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : model.biases) std::fill(b.begin(), b.end(), 0.0);

  Image base_render;
  ParamVector fitted = fit_portrait(pkg, model, std::nullopt, &base_render);
  for (const auto& [id, w] : fitted.entries)
    for (int a = 0; a < 3; ++a) CHECK(w[a] == 0.0);
  CHECK(base_render.width == rig.canvas_size);

  SUBCASE("missing landmark group fails with the absent id") {
    LandmarkSet broken = fx.landmarks;
    for (const auto& lid : rig.find_component("mouth")->landmark_ids) {
      broken.points.erase(lid);
      broken.grouping.erase(lid);
    }
    ModelPackage pkg2 = begin_package(rig, fx.portrait, fx.landmarks, atlas.width, atlas.height);
    pkg2.aligned->landmarks = broken;
    CHECK_THROWS_WITH_AS(fit_portrait(pkg2, model), doctest::Contains("mouth"), Error);
  }
}

TEST_CASE("hair-over-eyebrow overlap warning trigger") {
  Rig rig = make_default_rig();
  Image atlas = make_default_atlas(rig);
  ModelPackage pkg = fixture_package(rig, atlas, ParamVector::zeros(rig.component_ids()));

  BinaryMask clear_mask(1024, 1024);
  CHECK_FALSE(hair_occludes_eyebrows(pkg, clear_mask));

  BinaryMask over_brow(1024, 1024);
  for (int y = 340; y < 420; ++y)
    for (int x = 250; x < 480; ++x) over_brow.set(x, y, true);
  CHECK(hair_occludes_eyebrows(pkg, over_brow));
}
