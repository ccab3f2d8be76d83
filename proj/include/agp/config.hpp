#pragma once
// Application configuration: a small key = value config file with [section]
// tables, mirrored by command-line overrides.

#include <cstdint>
#include <map>
#include <string>

#include "agp/dataset.hpp"
#include "agp/http_backend.hpp"
#include "agp/optimizer.hpp"

namespace agp {

struct AppConfig {
    std::string backend = "mock";  // "mock" or "http"
    std::string run_dir = "run";

    HttpBackendConfig http;
    int requests_per_minute = 0;
    int max_retries = 3;

    SyntheticWorldSpec world;
    bool has_world = false;

    std::string users_path;
    std::string rankings_path;
    int n_train = 0;
    int n_eval = 0;
    std::uint64_t split_seed = 0;
    bool allow_overlap = false;

    TrainConfig train;
    std::string seed_template = "default";
};

// Raw parsed file: section -> key -> value ("" section for top-level keys).
using ConfigTable = std::map<std::string, std::map<std::string, std::string>>;

ConfigTable parse_config_file(const std::string& path);
AppConfig config_from_table(const ConfigTable& table);
AppConfig load_config(const std::string& path);

}  // namespace agp
