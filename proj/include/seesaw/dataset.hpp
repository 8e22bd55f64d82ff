#pragma once

// On-disk datasets: binary PPM (P6) images, identity manifests
// ("<relative path> <label>") and pair manifests ("<path a> <path b> <0|1>"),
// plus a generator for synthetic identity datasets.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seesaw/training.hpp"
#include "seesaw/verification.hpp"

namespace seesaw {

namespace fs = std::filesystem;

inline void write_ppm(const std::string& path, const Image8& img) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline Image8 read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open image '" + path + "'");
  auto token = [&]() {
    std::string t;
    int ch;
    while ((ch = f.get()) != EOF) {
      if (ch == '#') {
        while ((ch = f.get()) != EOF && ch != '\n') {
        }
        continue;
      }
      if (std::isspace(ch)) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(static_cast<char>(ch));
    }
    return t;
  };
  if (token() != "P6") throw Error("'" + path + "' is not a binary PPM (P6) image");
  Image8 img;
  try {
    img.width = std::stoul(token());
    img.height = std::stoul(token());
    if (std::stoul(token()) != 255) throw Error("'" + path + "': only 8-bit PPM images are supported");
  } catch (const std::logic_error&) {
    throw Error("'" + path + "': malformed PPM header");
  }
  img.pixels.resize(img.width * img.height * 3);
  f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(f.gcount()) != img.pixels.size()) throw Error("'" + path + "': truncated pixel data");
  return img;
}

namespace detail {

/// Non-empty, non-comment lines split on whitespace and commas.
inline std::vector<std::vector<std::string>> read_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open manifest '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<std::string> row;
    for (std::string t; ls >> t;) row.push_back(t);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string resolve(const std::string& manifest, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? rel : (fs::path(manifest).parent_path() / p).string();
}

inline std::size_t parse_label(const std::string& s, const std::string& manifest, std::size_t row) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos == s.size() && v >= 0) return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
  }
  throw Error(manifest + ": row " + std::to_string(row + 1) + " has invalid label '" + s + "'");
}

}  // namespace detail

struct ManifestEntry {
  std::string path;
  std::size_t label = 0;
};

inline std::vector<ManifestEntry> read_identity_manifest(const std::string& path) {
  std::vector<ManifestEntry> out;
  const auto rows = detail::read_table(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 2) throw Error(path + ": row " + std::to_string(i + 1) + " must be '<path> <label>'");
    out.push_back({detail::resolve(path, rows[i][0]), detail::parse_label(rows[i][1], path, i)});
  }
  return out;
}

template <typename T>
Dataset<T> load_dataset(const std::string& manifest, std::size_t height, std::size_t width) {
  Dataset<T> data;
  for (const auto& e : read_identity_manifest(manifest)) {
    data.samples.push_back({preprocess<T>(read_ppm(e.path), height, width), e.label});
    data.num_classes = std::max(data.num_classes, e.label + 1);
  }
  if (data.samples.empty()) throw Error("dataset manifest '" + manifest + "' lists no images");
  return data;
}

struct PairEntry {
  std::string a;
  std::string b;
  bool same = false;
};

inline std::vector<PairEntry> read_pair_manifest(const std::string& path) {
  std::vector<PairEntry> out;
  const auto rows = detail::read_table(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 3 || (rows[i][2] != "0" && rows[i][2] != "1"))
      throw Error(path + ": row " + std::to_string(i + 1) + " must be '<path a> <path b> <0|1>'");
    out.push_back({detail::resolve(path, rows[i][0]), detail::resolve(path, rows[i][1]), rows[i][2] == "1"});
  }
  return out;
}

inline std::vector<ImagePair> load_pairs(const std::string& manifest) {
  std::vector<ImagePair> out;
  for (const auto& e : read_pair_manifest(manifest)) out.push_back({read_ppm(e.a), read_ppm(e.b), e.same});
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic identities

struct SyntheticSpec {
  std::size_t identities = 20;
  std::size_t images_per_identity = 20;
  std::size_t size = 28;
  std::size_t grid = 4;        // identity pattern is a grid×grid mosaic of random colors
  double noise_sigma = 24.0;   // per-pixel Gaussian noise, in 8-bit units
  std::uint64_t seed = 1;
};

/// Each identity is a fixed random color mosaic; every image adds fresh noise.
inline std::vector<std::pair<Image8, std::size_t>> synthetic_identities(const SyntheticSpec& spec) {
  if (spec.identities == 0 || spec.images_per_identity == 0 || spec.size == 0 || spec.grid == 0)
    throw Error("synthetic_identities: all counts must be positive");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> color(0, 255);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  std::vector<std::pair<Image8, std::size_t>> out;
  for (std::size_t id = 0; id < spec.identities; ++id) {
    std::vector<int> mosaic(spec.grid * spec.grid * 3);
    for (auto& v : mosaic) v = color(rng);
    for (std::size_t k = 0; k < spec.images_per_identity; ++k) {
      Image8 img(spec.size, spec.size);
      for (std::size_t y = 0; y < spec.size; ++y)
        for (std::size_t x = 0; x < spec.size; ++x) {
          const std::size_t cell = (y * spec.grid / spec.size) * spec.grid + x * spec.grid / spec.size;
          for (std::size_t c = 0; c < 3; ++c) {
            const double v = mosaic[cell * 3 + c] + noise(rng);
            img.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
          }
        }
      out.emplace_back(std::move(img), id);
    }
  }
  return out;
}

template <typename T>
Dataset<T> synthetic_dataset(const SyntheticSpec& spec) {
  Dataset<T> data;
  data.num_classes = spec.identities;
  for (auto& [img, label] : synthetic_identities(spec))
    data.samples.push_back({preprocess<T>(img, spec.size, spec.size), label});
  return data;
}

/// Writes `<dir>/idXXX_YYY.ppm`, `<dir>/manifest.txt` and a `<dir>/pairs.txt`
/// with `pair_count` alternating same/different pairs. Returns the manifest path.
inline std::string write_synthetic_dataset(const std::string& dir, const SyntheticSpec& spec,
                                           std::size_t pair_count = 0) {
  fs::create_directories(dir);
  const auto items = synthetic_identities(spec);
  const std::string manifest = (fs::path(dir) / "manifest.txt").string();
  std::ofstream mf(manifest, std::ios::trunc);
  if (!mf) throw Error("cannot write '" + manifest + "'");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < items.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "id%03zu_%03zu.ppm", items[i].second, i % spec.images_per_identity);
    write_ppm((fs::path(dir) / buf).string(), items[i].first);
    mf << buf << " " << items[i].second << "\n";
    names.emplace_back(buf);
  }
  if (pair_count > 0) {
    std::ofstream pf(fs::path(dir) / "pairs.txt", std::ios::trunc);
    std::mt19937_64 rng(spec.seed + 17);
    const std::size_t per = spec.images_per_identity;
    std::uniform_int_distribution<std::size_t> pick_id(0, spec.identities - 1), pick_img(0, per - 1);
    for (std::size_t p = 0; p < pair_count; ++p) {
      const bool same = p % 2 == 0 || spec.identities < 2;
      const std::size_t ia = pick_id(rng);
      std::size_t ib = ia;
      while (!same && ib == ia) ib = pick_id(rng);
      std::size_t ka = pick_img(rng), kb = pick_img(rng);
      if (same && per > 1)
        while (kb == ka) kb = pick_img(rng);
      pf << names[ia * per + ka] << " " << names[ib * per + kb] << " " << (same ? 1 : 0) << "\n";
    }
  }
  return manifest;
}

}  // namespace seesaw
