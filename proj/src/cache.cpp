#include "fluxline/cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "fluxline/io.hpp"

namespace fluxline {

namespace {

std::string entry_path(const StageCache& c, const std::string& stage, const std::string& key) {
    return c.dir + "/" + stage + "-" + key + ".json";
}

}  // namespace

std::optional<nlohmann::json> StageCache::load(const std::string& stage, const std::string& key) {
    if (!enabled()) return std::nullopt;
    const std::string path = entry_path(*this, stage, key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cache: discarding corrupt entry %s (%s)\n", path.c_str(), e.what());
        return std::nullopt;
    }
}

void StageCache::store(const std::string& stage, const std::string& key,
                       const nlohmann::json& doc) {
    if (!enabled()) return;
    try {
        write_text_file(entry_path(*this, stage, key), doc.dump());
    } catch (const std::exception& e) {
        // a full or read-only cache disk must never fail the run
        std::fprintf(stderr, "cache: cannot store %s entry (%s)\n", stage.c_str(), e.what());
    }
}

StageCache open_cache(bool bypass) {
    StageCache cache;
    if (bypass) return cache;
    const char* dir = std::getenv("FLUXLINE_CACHE_DIR");
    if (!dir || !*dir) return cache;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        std::fprintf(stderr, "cache: cannot create %s (%s), running without cache\n", dir,
                     ec.message().c_str());
        return cache;
    }
    cache.dir = dir;
    return cache;
}

}  // namespace fluxline
