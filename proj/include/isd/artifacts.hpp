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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "isd/hole_burning.hpp"
#include "isd/isd_maps.hpp"
#include "isd/level_scheme.hpp"
#include "isd/pulse.hpp"

namespace isd {

/// Content-keyed store of burned profiles, lookup tables and excitation curves.
/// File names carry the key; a file whose embedded key disagrees with its name
/// or with its contents counts as stale.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::filesystem::path dir);
  /// $ISDSIM_CACHE_DIR when set, else `fallback`.
  static std::filesystem::path resolve_dir(const std::filesystem::path& fallback);

  const std::filesystem::path& dir() const { return dir_; }

  /// Status line sink ("generated ...", "cache hit ...", "stale ...").
  std::function<void(const std::string&)> log;

  std::filesystem::path profile_path(const BurnConfig& config, const LevelScheme& scheme) const;
  std::filesystem::path inside_path(const MapResolution& res, const LevelScheme& scheme,
                                    const TwoColorGate& gate) const;
  std::filesystem::path outside_path(const MapResolution& res, const TwoColorGate& gate) const;
  std::filesystem::path excitation_path(const MapResolution& res, const LevelScheme& scheme,
                                        const TwoColorGate& gate) const;

  /// With `generate` false a missing or stale entry throws MissingInputError.
  PopulationProfile profile(const BurnConfig& config, const LevelScheme& scheme, bool generate);
  InsideMap inside(const MapResolution& res, const LevelScheme& scheme, const TwoColorGate& gate,
                   int workers, bool generate);
  OutsideMap outside(const MapResolution& res, const TwoColorGate& gate, int workers, bool generate);
  ExcitationCurves excitation(const MapResolution& res, const LevelScheme& scheme,
                              const TwoColorGate& gate, int workers, bool generate);

 private:
  void note(const std::string& s) const {
    if (log) log(s);
  }
  std::filesystem::path dir_;
};

std::uint64_t burn_config_key(const BurnConfig& config, const LevelScheme& scheme);

}  // namespace isd
