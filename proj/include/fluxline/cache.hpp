#pragma once
#include <optional>
#include <string>

#include "json.hpp"

namespace fluxline {

// file-backed store for stage outputs, keyed by (stage, dependency hash).
// an empty dir disables it; corrupt entries are discarded with a warning
// so a damaged cache can never poison a run
struct StageCache {
    std::string dir;
    int hits = 0;    // maintained by the orchestrator once an entry proves usable
    int misses = 0;

    bool enabled() const { return !dir.empty(); }
    std::optional<nlohmann::json> load(const std::string& stage, const std::string& key);
    void store(const std::string& stage, const std::string& key, const nlohmann::json& doc);
};

// reads the cache directory from FLUXLINE_CACHE_DIR; bypass or an unset
// variable leaves the cache disabled
StageCache open_cache(bool bypass);

}  // namespace fluxline
