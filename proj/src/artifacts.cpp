// Copyright 2026 The isdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "isd/artifacts.hpp"

#include <cstdlib>
#include <fstream>

#include "json.hpp"

#include "isd/csv.hpp"
#include "isd/monte_carlo.hpp"

namespace isd {

namespace fs = std::filesystem;

ArtifactCache::ArtifactCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ArtifactCache::resolve_dir(const fs::path& fallback) {
  if (const char* env = std::getenv("ISDSIM_CACHE_DIR"); env && *env) return fs::path(env);
  return fallback;
}

std::uint64_t burn_config_key(const BurnConfig& c, const LevelScheme& scheme) {
  const nlohmann::json j = {{"kind", "profile"},
                            {"nu_init", exact_number(c.nu_init)},
                            {"qubit_count", c.qubit_count},
                            {"grid_step", exact_number(c.grid_step)},
                            {"repetition_scale", exact_number(c.repetition_scale)},
                            {"t2", exact_number(c.t2)},
                            {"scheme", hex64(scheme.hash())}};
  return fnv1a(j.dump());
}

fs::path ArtifactCache::profile_path(const BurnConfig& c, const LevelScheme& s) const {
  return dir_ / ("profile-" + hex64(burn_config_key(c, s)) + ".csv");
}
fs::path ArtifactCache::inside_path(const MapResolution& r, const LevelScheme& s,
                                    const TwoColorGate& g) const {
  return dir_ / ("inside-" + r.preset + "-" + hex64(inside_map_key(r, s, g)) + ".csv");
}
fs::path ArtifactCache::outside_path(const MapResolution& r, const TwoColorGate& g) const {
  return dir_ / ("outside-" + r.preset + "-" + hex64(outside_map_key(r, g)) + ".csv");
}
fs::path ArtifactCache::excitation_path(const MapResolution& r, const LevelScheme& s,
                                        const TwoColorGate& g) const {
  return dir_ / ("excitation-" + r.preset + "-" + hex64(excitation_curves_key(r, s, g)) + ".csv");
}

namespace {

// Loads `path` when it holds the artifact with key `want`; otherwise
// regenerates (or reports it missing).
template <class T, class Load, class Make, class Key>
T fetch(const fs::path& path, std::uint64_t want, bool generate, Load load, Make make, Key key,
        const std::function<void(const std::string&)>& log) {
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  if (fs::exists(path)) {
    try {
      T t = load(path);
      if (key(t) == want) {
        say("cache hit " + path.string());
        return t;
      }
      say("stale cache entry " + path.string() + " (key mismatch)");
    } catch (const std::exception& e) {
      say("stale cache entry " + path.string() + " (" + e.what() + ")");
    }
  }
  if (!generate) {
    throw MissingInputError("missing artifact " + path.string() + "; run `isdsim genmaps` or `isdsim burn` first");
  }
  say("generating " + path.string());
  fs::create_directories(path.parent_path());
  return make();
}

}  // namespace

PopulationProfile ArtifactCache::profile(const BurnConfig& c, const LevelScheme& s, bool generate) {
  const std::uint64_t want = burn_config_key(c, s);
  const fs::path path = profile_path(c, s);
  const std::string tag = "profile_key=" + hex64(want);
  bool made = false;
  PopulationProfile p = fetch<PopulationProfile>(
      path, want, generate,
      [&](const fs::path& f) {
        // The key sits on the first comment line written by save below.
        std::ifstream in(f);
        std::string first;
        std::getline(in, first);
        if (first != "# " + tag) throw MapFormatError("profile key missing");
        return PopulationProfile::load_csv(f);
      },
      [&] {
        made = true;
        return run_scheme(c, s);
      },
      [&](const PopulationProfile&) { return want; }, log);
  if (made) {
    const fs::path tmp = path.string() + ".tmp";
    p.save_csv(tmp, tag);
    fs::rename(tmp, path);
  }
  return p;
}

InsideMap ArtifactCache::inside(const MapResolution& r, const LevelScheme& s, const TwoColorGate& g,
                                int workers, bool generate) {
  const fs::path path = inside_path(r, s, g);
  const std::uint64_t want = inside_map_key(r, s, g);
  bool made = false;
  InsideMap m = fetch<InsideMap>(
      path, want, generate, [](const fs::path& f) { return InsideMap::load(f); },
      [&] {
        made = true;
        return generate_inside_map(r, s, g, workers);
      },
      [](const InsideMap& x) { return x.key(); }, log);
  if (made) m.save(path);
  return m;
}

OutsideMap ArtifactCache::outside(const MapResolution& r, const TwoColorGate& g, int workers,
                                  bool generate) {
  const fs::path path = outside_path(r, g);
  bool made = false;
  OutsideMap m = fetch<OutsideMap>(
      path, outside_map_key(r, g), generate, [](const fs::path& f) { return OutsideMap::load(f); },
      [&] {
        made = true;
        return generate_outside_map(r, g, workers);
      },
      [](const OutsideMap& x) { return x.key(); }, log);
  if (made) m.save(path);
  return m;
}

ExcitationCurves ArtifactCache::excitation(const MapResolution& r, const LevelScheme& s,
                                           const TwoColorGate& g, int workers, bool generate) {
  const fs::path path = excitation_path(r, s, g);
  bool made = false;
  ExcitationCurves m = fetch<ExcitationCurves>(
      path, excitation_curves_key(r, s, g), generate,
      [](const fs::path& f) { return ExcitationCurves::load(f); },
      [&] {
        made = true;
        return generate_excitation_curves(r, s, g, workers);
      },
      [](const ExcitationCurves& x) { return x.key(); }, log);
  if (made) m.save(path);
  return m;
}

}  // namespace isd
